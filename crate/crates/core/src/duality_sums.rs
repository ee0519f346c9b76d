//! Numeric duality checks, the sum identities for minimal and maximal
//! multinorms, and the finite-stage subquotient representation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::extension_lifting::{embed_fd, min_norm_lift, LevelRatio};
use crate::linalg::{max_abs, pairing, Mat};
use crate::lp::{LinearProgram, Sense, VarBound};
use crate::norm::{BanachNormSpec, NormKind};
use crate::operator_norms::LevelOptions;
use crate::optim::NelderMead;
use crate::space::{dual_spec, Node, SpaceSpec};
use crate::tensor_norms::{eval_node, lattice_norm, EvalOptions};

/// One sampled pair `(x, w)` at level `m`.
#[derive(Clone, Debug, Serialize)]
pub struct DualityPair {
    pub level: usize,
    pub primal: (f64, f64),
    pub dual: (f64, f64),
    pub pairing: f64,
    /// `sup {⟨w, x⟩ : ‖x‖_S ≤ 1}` bracketed using only the primal evaluator.
    pub numeric_dual: (f64, f64),
    /// Excess of `|⟨w, x⟩|` over `primal.upper · dual.upper`, relative.
    pub pairing_violation: f64,
    /// Separation of `numeric_dual` and `dual`, beyond the tolerance, relative.
    pub dual_violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub space: String,
    pub dual_space: String,
    pub tolerance: f64,
    pub pairs: Vec<DualityPair>,
    pub max_relative_violation: f64,
    pub violations: usize,
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Interval for `sup {⟨w, x⟩ : ‖x‖_S ≤ 1}` from the primal evaluator alone.
///
/// Outer cutting planes: every certified witness `W` of a primal point has
/// dual norm `≤ 1`, so `⟨W, x⟩ ≤ 1` holds on the ball. The LP optimum over
/// the cuts is an upper bound once the box `|x_ij| ≤ R` is inactive, and the
/// LP point `x*` gives the lower bound `⟨w, x*⟩ / upper(‖x*‖)`.
pub fn numeric_dual_norm(
    s: &SpaceSpec,
    w: &Mat,
    tol: f64,
    opts: &EvalOptions,
) -> Result<(f64, f64, Mat)> {
    let (m, d) = w.shape();
    let nv = m * d;
    if max_abs(w) == 0.0 {
        return Ok((0.0, 0.0, Mat::zeros(m, d)));
    }
    let objective: Vec<f64> = w.iter().map(|v| -v).collect();
    let mut cuts: Vec<Vec<f64>> = Vec::new();
    let add_cut = |cuts: &mut Vec<Vec<f64>>, x: &Mat| -> Result<(f64, f64)> {
        let est = eval_node(s.p, &s.node, x, opts)?;
        cuts.push(est.witness.iter().copied().collect());
        Ok((est.lower, est.upper))
    };
    let (_, wu) = add_cut(&mut cuts, w)?;
    let mut lower = if wu > 0.0 { pairing(w, w) / wu } else { 0.0 };
    let mut arg = w / wu.max(1e-300);
    for j in 0..nv {
        for sign in [1.0, -1.0] {
            let mut e = Mat::zeros(m, d);
            e.as_mut_slice()[j] = sign;
            add_cut(&mut cuts, &e)?;
        }
    }
    let mut radius = 4.0 * max_abs(&arg).max(1.0);
    let mut upper = f64::INFINITY;
    for _ in 0..400 {
        let mut lp = LinearProgram::new(objective.clone());
        for j in 0..nv {
            lp.set_bound(j, VarBound::Boxed(-radius, radius));
        }
        for c in &cuts {
            lp.add_row(c.clone(), Sense::Le, 1.0);
        }
        let sol = lp.solve()?;
        let x = Mat::from_column_slice(m, d, &sol.x);
        if sol.x.iter().any(|v| v.abs() >= 0.999 * radius) {
            radius *= 4.0;
        } else {
            upper = upper.min(-sol.objective);
        }
        let (_, xu) = add_cut(&mut cuts, &x)?;
        if xu > 0.0 {
            let value = pairing(w, &x) / xu;
            if value > lower {
                lower = value;
                arg = x / xu;
            }
        }
        if upper - lower <= tol * upper {
            break;
        }
    }
    Ok((lower, upper.max(lower), arg))
}

/// Checks the pairing inequality and compares the dual norm computed
/// through `dual_spec` with the numeric supremum over the primal ball.
pub fn duality_check(
    s: &SpaceSpec,
    levels: &[usize],
    samples: usize,
    seed: u64,
    tol: f64,
    opts: &EvalOptions,
) -> Result<DualityReport> {
    s.node.validate()?;
    let dual = dual_spec(s);
    let d = s.dim();
    let mut pairs = Vec::new();
    for &m in levels {
        if m == 0 {
            return Err(Error::InvalidArgument("levels must be positive".into()));
        }
        for k in 0..samples {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((m as u64) << 32) ^ k as u64);
            let x = gaussian(&mut rng, m, d);
            let w = gaussian(&mut rng, m, d);
            pairs.push(check_pair(s, &dual, &x, &w, tol, opts)?);
        }
    }
    Ok(finish(s, &dual, tol, pairs))
}

/// The check for one given pair.
pub fn check_pair(
    s: &SpaceSpec,
    dual: &SpaceSpec,
    x: &Mat,
    w: &Mat,
    tol: f64,
    opts: &EvalOptions,
) -> Result<DualityPair> {
    let primal = eval_node(s.p, &s.node, x, opts)?;
    let dn = eval_node(dual.p, &dual.node, w, opts)?;
    let pair = pairing(w, x);
    let bound = primal.upper * dn.upper;
    let scale = bound.max(1e-300);
    let pairing_violation = ((pair.abs() - bound) / scale).max(0.0);
    let (nl, nu, _) = numeric_dual_norm(s, w, tol * 1e-2, opts)?;
    let dscale = dn.upper.max(1e-300);
    let separation = (nl - dn.upper).max(dn.lower - nu);
    let dual_violation = ((separation - tol * dscale) / dscale).max(0.0);
    Ok(DualityPair {
        level: x.nrows(),
        primal: (primal.lower, primal.upper),
        dual: (dn.lower, dn.upper),
        pairing: pair,
        numeric_dual: (nl, nu),
        pairing_violation,
        dual_violation,
    })
}

fn finish(s: &SpaceSpec, dual: &SpaceSpec, tol: f64, pairs: Vec<DualityPair>) -> DualityReport {
    let worst = pairs
        .iter()
        .map(|q| q.pairing_violation.max(q.dual_violation))
        .fold(0.0, f64::max);
    let violations = pairs
        .iter()
        .filter(|q| q.pairing_violation > 1e-9 || q.dual_violation > 0.0)
        .count();
    DualityReport {
        space: describe(s),
        dual_space: describe(dual),
        tolerance: tol,
        pairs,
        max_relative_violation: worst,
        violations,
    }
}

/// A short human-readable description of a space.
pub fn describe(s: &SpaceSpec) -> String {
    format!("{} at p = {}", describe_node(&s.node), s.p)
}

fn describe_norm(e: &BanachNormSpec) -> String {
    match e.kind() {
        NormKind::Lq(q) => format!("l^{q}_{}", e.dim()),
        NormKind::WeightedLq { q, .. } => format!("l^{q}_{}(w)", e.dim()),
        NormKind::Polytope(_) => format!("polytope_{}", e.dim()),
    }
}

fn describe_node(n: &Node) -> String {
    let list = |parts: &[Node]| {
        parts
            .iter()
            .map(describe_node)
            .collect::<Vec<_>>()
            .join(", ")
    };
    match n {
        Node::Min(e) => format!("Min({})", describe_norm(e)),
        Node::Max(e) => format!("Max({})", describe_norm(e)),
        Node::Lattice(e) => format!("Lattice({})", describe_norm(e)),
        Node::Dual(inner) => format!("Dual({})", describe_node(inner)),
        Node::SumInf(parts) => format!("SumInf[{}]", list(parts)),
        Node::Sum1(parts) => format!("Sum1[{}]", list(parts)),
        Node::Subspace { parent, basis } => {
            format!("Subspace({}, dim {})", describe_node(parent), basis.nrows())
        }
        Node::Quotient { parent, map } => {
            format!("Quotient({}, dim {})", describe_node(parent), map.nrows())
        }
    }
}

/// The `ℓ^∞`-sum of polyhedral or sup norms as one Banach norm.
pub fn sum_norm_inf(parts: &[BanachNormSpec]) -> Result<BanachNormSpec> {
    let dim: usize = parts.iter().map(BanachNormSpec::dim).sum();
    if parts
        .iter()
        .all(|e| matches!(e.kind(), NormKind::Lq(q) if q.is_infinite()))
    {
        return Ok(BanachNormSpec::lq(PExponent::Infinite, dim));
    }
    // Products of block vertices.
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for e in parts {
        let verts = block_vertices(e)?;
        let mut next = Vec::with_capacity(points.len() * verts.len());
        for p in &points {
            for v in &verts {
                let mut q = p.clone();
                q.extend_from_slice(v);
                next.push(q);
            }
        }
        points = next;
    }
    BanachNormSpec::polytope(dim, &points)
}

/// The `ℓ¹`-sum of polyhedral or `ℓ¹` norms as one Banach norm.
pub fn sum_norm_one(parts: &[BanachNormSpec]) -> Result<BanachNormSpec> {
    let dim: usize = parts.iter().map(BanachNormSpec::dim).sum();
    if parts
        .iter()
        .all(|e| matches!(e.kind(), NormKind::Lq(q) if q.is_one()))
    {
        return Ok(BanachNormSpec::lq(PExponent::ONE, dim));
    }
    let mut points = Vec::new();
    let mut off = 0;
    for e in parts {
        for v in block_vertices(e)? {
            let mut q = vec![0.0; dim];
            q[off..off + v.len()].copy_from_slice(&v);
            points.push(q);
        }
        off += e.dim();
    }
    BanachNormSpec::polytope(dim, &points)
}

/// Both signs of every vertex, so that products stay symmetric.
fn block_vertices(e: &BanachNormSpec) -> Result<Vec<Vec<f64>>> {
    let verts = e
        .ball_vertices()
        .ok_or_else(|| Error::InvalidNorm(format!("{} is not polyhedral", describe_norm(e))))?;
    Ok(verts
        .iter()
        .flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()])
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct SumIdentityEntry {
    pub identity: String,
    pub level: usize,
    pub sum_of_spaces: (f64, f64),
    pub space_of_sum: (f64, f64),
    /// Separation of the two intervals, relative; 0 when they overlap.
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SumIdentityReport {
    pub entries: Vec<SumIdentityEntry>,
    pub max_gap: f64,
}

fn interval_gap(a: (f64, f64), b: (f64, f64)) -> f64 {
    let scale = a.1.max(b.1).max(1e-300);
    ((a.0 - b.1).max(b.0 - a.1) / scale).max(0.0)
}

/// `(Σ Min(E_i))_∞ = Min((Σ E_i)_∞)` and `(Σ Max(E_i))_1 = Max((Σ E_i)_1)`
/// on random tensors. The blocks must be polyhedral (or all `ℓ^∞` / `ℓ¹`).
pub fn sum_identity_check(
    p: PExponent,
    parts: &[BanachNormSpec],
    levels: &[usize],
    samples: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<SumIdentityReport> {
    let dim: usize = parts.iter().map(BanachNormSpec::dim).sum();
    let min_parts = Node::SumInf(parts.iter().cloned().map(Node::Min).collect());
    let max_parts = Node::Sum1(parts.iter().cloned().map(Node::Max).collect());
    let min_sum = Node::Min(sum_norm_inf(parts)?);
    let max_sum = Node::Max(sum_norm_one(parts)?);
    let mut entries = Vec::new();
    for &m in levels {
        for k in 0..samples {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((m as u64) << 32) ^ k as u64);
            let t = gaussian(&mut rng, m, dim);
            for (name, a, b) in [
                ("inf-sum of minimal", &min_parts, &min_sum),
                ("1-sum of maximal", &max_parts, &max_sum),
            ] {
                let x = eval_node(p, a, &t, opts)?;
                let y = eval_node(p, b, &t, opts)?;
                let (xa, yb) = ((x.lower, x.upper), (y.lower, y.upper));
                entries.push(SumIdentityEntry {
                    identity: name.into(),
                    level: m,
                    sum_of_spaces: xa,
                    space_of_sum: yb,
                    gap: interval_gap(xa, yb),
                });
            }
        }
    }
    let max_gap = entries.iter().map(|e| e.gap).fold(0.0, f64::max);
    Ok(SumIdentityReport { entries, max_gap })
}

/// Lattice and maximal `p`-multinorms on `ℓ¹_d` at one tensor.
#[derive(Clone, Debug, Serialize)]
pub struct LatticeMaxEntry {
    pub lattice: f64,
    pub maximal: (f64, f64),
    /// `Σ_j (Σ_i |t_ij|^p)^{1/p}` computed directly.
    pub column_sum: f64,
    pub gap: f64,
}

/// Compares `Lattice(ℓ¹_d)`, `Max(ℓ¹_d)` and the explicit column formula.
pub fn lattice_max_entry(p: PExponent, t: &Mat, opts: &EvalOptions) -> Result<LatticeMaxEntry> {
    let l1 = BanachNormSpec::lq(PExponent::ONE, t.ncols());
    let lattice = lattice_norm(p, &l1, t)?;
    let max = eval_node(p, &Node::Max(l1), t, opts)?;
    let column_sum: f64 = (0..t.ncols())
        .map(|j| p.norm(t.column(j).iter().copied().collect::<Vec<_>>().as_slice()))
        .sum();
    let scale = lattice.max(max.upper).max(1e-300);
    let gap = [
        (lattice - max.upper) / scale,
        (max.lower - lattice) / scale,
        (lattice - column_sum).abs() / scale,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(LatticeMaxEntry {
        lattice,
        maximal: (max.lower, max.upper),
        column_sum,
        gap,
    })
}

/// One stage `q_i : Max(ℓ¹_d) → Max(ℓ^{p′}_n)`.
#[derive(Clone, Debug, Serialize)]
pub struct Stage {
    pub n: usize,
    pub d: usize,
    /// Columns of `q` (images of the `ℓ¹` atoms), as rows.
    pub atoms: Vec<Vec<f64>>,
    /// `max ‖y‖_F / ‖y‖_{p′}`, `F` the quotient norm; `1` means exact.
    pub quotient_constant: f64,
    /// `upper(lift) / ‖target‖_{Max(ℓ^{p′})}` for sampled unit targets.
    pub lift_ratios: Vec<f64>,
    pub max_lift_ratio: f64,
}

/// `d` points of the unit sphere of `ℓ^{p′}_n` whose absolute convex hull
/// approximates the ball: the ball's vertices first when it is a polytope,
/// then equally spaced directions (`n = 2`) or seeded random ones.
fn stage_atoms(pc: PExponent, n: usize, d: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if d < n {
        return Err(Error::InvalidArgument(format!(
            "stage width d = {d} is below n = {n}"
        )));
    }
    let mut atoms: Vec<Vec<f64>> = Vec::new();
    if let Some(v) = BanachNormSpec::lq(pc, n).ball_vertices() {
        atoms.extend(v.into_iter().take(d));
    }
    let normalise = |v: Vec<f64>| -> Vec<f64> {
        let r = pc.norm(&v);
        v.into_iter().map(|x| x / r).collect()
    };
    if n == 2 {
        let k = d - atoms.len();
        for j in 0..k {
            let a = std::f64::consts::PI * (j as f64 + 0.5) / k as f64;
            atoms.push(normalise(vec![a.cos(), a.sin()]));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if atoms.is_empty() {
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                atoms.push(e);
            }
        }
        while atoms.len() < d {
            let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            atoms.push(normalise(v));
        }
    }
    Ok(atoms)
}

fn atoms_matrix(atoms: &[Vec<f64>], n: usize) -> Mat {
    Mat::from_fn(n, atoms.len(), |i, j| atoms[j][i])
}

/// The exact quotient constant: `F` has ball `absconv(atoms)`, whose polar
/// is the polytope `{φ : |⟨φ, a_j⟩| ≤ 1}`, so `max ‖y‖_F/‖y‖_{p′}` is the
/// largest `‖φ‖_p` over its vertices.
pub fn quotient_constant(p: PExponent, atoms: &[Vec<f64>]) -> Result<f64> {
    let n = atoms.first().map(Vec::len).unwrap_or(0);
    let f = BanachNormSpec::polytope(n, atoms)?;
    let NormKind::Polytope(poly) = f.kind() else {
        unreachable!()
    };
    Ok(poly
        .facets()
        .iter()
        .map(|phi| p.norm(phi))
        .fold(0.0, f64::max))
}

/// Builds a stage and checks the quotient property by lifting sampled
/// targets from the unit ball of `Max(ℓ^{p′}_n)` at the given levels.
pub fn build_stage(
    p: PExponent,
    n: usize,
    d: usize,
    levels: &[usize],
    samples: usize,
    seed: u64,
    opts: &EvalOptions,
) -> Result<Stage> {
    let pc = p.conjugate();
    let atoms = stage_atoms(pc, n, d, seed)?;
    let q = atoms_matrix(&atoms, n);
    let quotient_constant = quotient_constant(p, &atoms)?;
    let quot = SpaceSpec::quotient(SpaceSpec::max(p, BanachNormSpec::lq(PExponent::ONE, d)), q)?;
    let target = Node::Max(BanachNormSpec::lq(pc, n));
    let mut lift_ratios = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    for &m in levels {
        for _ in 0..samples {
            let e = gaussian(&mut rng, m, n);
            let en = eval_node(p, &target, &e, opts)?;
            let lift = min_norm_lift(&quot, &e, 1e-4, opts)?;
            lift_ratios.push(lift.norm.upper / en.lower);
        }
    }
    let max_lift_ratio = lift_ratios.iter().copied().fold(0.0, f64::max);
    Ok(Stage {
        n,
        d,
        atoms,
        quotient_constant,
        lift_ratios,
        max_lift_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SubquotientReport {
    pub space: String,
    pub lattice_max: Vec<LatticeMaxEntry>,
    pub lattice_max_gap: f64,
    pub stages: Vec<Stage>,
    /// `V : S → (Σ Max(ℓ¹_{d_i})/ker q_i)_∞`; empty when the stages cannot host it.
    pub levels: Vec<LevelRatio>,
    /// Largest `‖x Vᵀ‖/‖x‖` found.
    pub expansion: f64,
    /// Largest `‖x‖/‖x Vᵀ‖` found.
    pub contraction: f64,
    /// `expansion · contraction`.
    pub distortion: f64,
    pub blocks: usize,
    pub note: Option<String>,
}

/// The finite-stage subquotient representation of `S`: (a) the lattice and
/// maximal multinorms on `ℓ¹` agree, (b) each `q_i` is a `p`-quotient up to
/// its measured constant, (c) `embed_fd` at level `n_0` composed with the
/// stages exhibits `S` inside the `ℓ^∞`-sum of the quotients. Blocks of the
/// embedding cycle through the stages; all stages must share `n = n_0`.
pub fn subquotient_demo(
    s: &SpaceSpec,
    widths: &[(usize, usize)],
    eps: f64,
    net_budget: usize,
    opts: &LevelOptions,
) -> Result<SubquotientReport> {
    s.node.validate()?;
    if widths.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one stage width is required".into(),
        ));
    }
    let p = s.p;
    let eval = &opts.eval;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut lattice_max = Vec::new();
    for &(n, d) in widths {
        let identity = Mat::from_fn(n.max(1), d, |i, j| if i == j { 1.0 } else { 0.0 });
        lattice_max.push(lattice_max_entry(p, &identity, eval)?);
        lattice_max.push(lattice_max_entry(
            p,
            &gaussian(&mut rng, n.max(1), d),
            eval,
        )?);
    }
    let lattice_max_gap = lattice_max.iter().map(|e| e.gap).fold(0.0, f64::max);
    let levels: Vec<usize> = (1..=widths[0].0.min(3)).collect();
    let mut stages = Vec::with_capacity(widths.len());
    let mut note = None;
    for (i, &(n, d)) in widths.iter().enumerate() {
        match build_stage(p, n, d, &levels, 2, opts.seed.wrapping_add(i as u64), eval) {
            Ok(st) => stages.push(st),
            Err(e) => note = Some(format!("stage {i} ({n}, {d}): {e}")),
        }
    }
    let empty = |stages, note| SubquotientReport {
        space: describe(s),
        lattice_max: lattice_max.clone(),
        lattice_max_gap,
        stages,
        levels: Vec::new(),
        expansion: f64::NAN,
        contraction: f64::NAN,
        distortion: f64::NAN,
        blocks: 0,
        note,
    };
    if note.is_some() || stages.iter().any(|st| st.n != stages[0].n) {
        let note = note.unwrap_or_else(|| "stages must share n to host the embedding".into());
        return Ok(empty(stages, Some(note)));
    }
    let level = stages[0].n;
    let emb = embed_fd(s, eps, level, net_budget, opts)?;
    let blocks = emb.net.len();
    let parts: Vec<Node> = (0..blocks)
        .map(|b| {
            let st = &stages[b % stages.len()];
            Node::Quotient {
                parent: Box::new(Node::Max(BanachNormSpec::lq(PExponent::ONE, st.d))),
                map: atoms_matrix(&st.atoms, st.n),
            }
        })
        .collect();
    let v = emb.operator.matrix.clone();
    let target = Node::SumInf(parts);
    let mut out = Vec::new();
    let (mut expansion, mut contraction): (f64, f64) = (0.0, 0.0);
    for m in levels {
        let (up, down) = distortion_search(s, &target, &v, m, opts)?;
        expansion = expansion.max(up);
        contraction = contraction.max(down);
        out.push(LevelRatio {
            level: m,
            lower: down,
            upper: up,
        });
    }
    Ok(SubquotientReport {
        space: describe(s),
        lattice_max,
        lattice_max_gap,
        stages,
        levels: out,
        expansion,
        contraction,
        distortion: expansion * contraction,
        blocks,
        note: None,
    })
}

/// Largest `‖x Vᵀ‖/‖x‖` and `‖x‖/‖x Vᵀ‖` at level `m`, by Nelder–Mead,
/// each certified with the matching interval ends.
fn distortion_search(
    s: &SpaceSpec,
    target: &Node,
    v: &Mat,
    m: usize,
    opts: &LevelOptions,
) -> Result<(f64, f64)> {
    let n = s.dim();
    let p = s.p;
    let loose = EvalOptions {
        tol: 1e-5,
        coset_tol: 1e-5,
        ..opts.eval
    };
    let vt = v.transpose();
    let pair = |x: &Mat, o: &EvalOptions| -> Result<(f64, f64, f64, f64)> {
        let a = eval_node(p, &s.node, x, o)?;
        let b = eval_node(p, target, &(x * &vt), o)?;
        Ok((a.lower, a.upper, b.lower, b.upper))
    };
    let nm = NelderMead {
        max_evals: 40 * m * n + 60,
        ftol: 1e-9,
        initial_step: 0.3,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (m as u64));
    let mut best = (0.0f64, 0.0f64);
    for _ in 0..opts.restarts.max(1) {
        let x0 = gaussian(&mut rng, m, n);
        for up in [true, false] {
            let f = |w: &[f64]| -> f64 {
                match pair(&Mat::from_column_slice(m, n, w), &loose) {
                    Ok((_, au, _, bu)) if au > 0.0 && bu > 0.0 => {
                        if up {
                            -bu / au
                        } else {
                            -au / bu
                        }
                    }
                    _ => 0.0,
                }
            };
            let (arg, _) = nm.minimize(f, x0.as_slice());
            let (al, au, bl, bu) = pair(&Mat::from_column_slice(m, n, &arg), &opts.eval)?;
            if up {
                best.0 = best.0.max(bl / au);
            } else if bu > 0.0 {
                best.1 = best.1.max(al / bu);
            }
        }
    }
    Ok(best)
}
