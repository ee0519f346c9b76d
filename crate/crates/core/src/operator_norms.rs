//! Amplified operator norms `‖I_{ℓ^p_m} ⊗ u‖`, level profiles, nuclear norms
//! and the trace-duality formula for maps into `Max(ℓ^{p′}_n)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::bilinear::{bilinear_max_with, BranchOptions};
use crate::error::{Error, Result};
use crate::estimate::{NormEstimate, UpperCertificate};
use crate::exponent::PExponent;
use crate::linalg::{col_vec, max_abs, pad_rows, rank, Mat};
use crate::norm::{BanachNormSpec, NormKind};
use crate::space::Node;
use crate::tensor::OperatorRep;
use crate::tensor_norms::{eval_node, projective_norm_with, EvalOptions};

#[derive(Clone, Copy, Debug)]
pub struct LevelOptions {
    /// Random starting tensors on top of the canonical ones.
    pub restarts: usize,
    pub ascent_steps: usize,
    pub seed: u64,
    /// Use `‖u‖_p = ‖I_{ℓ^p_n} ⊗ u‖` as an upper bound for maps into
    /// `Max(ℓ^{p′}_n)`. Disable it to obtain an upper bound that does not
    /// rely on that identity.
    pub trace_duality: bool,
    pub eval: EvalOptions,
}

impl Default for LevelOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            ascent_steps: 25,
            seed: 0,
            trace_duality: true,
            eval: EvalOptions::default(),
        }
    }
}

/// The outcome of a level-`m` search.
#[derive(Clone, Debug)]
pub struct LevelSearch {
    /// `witness` is `Σ_i w_i e_iᵀ` (codomain × domain), so `⟨witness, U⟩ = lower`.
    pub estimate: NormEstimate,
    /// A tensor of `X` with `‖e‖ ≤ 1` whose image attains `lower`.
    pub argument: Mat,
    /// A tensor of `Y*` with dual norm `≤ 1` norming the image of `argument`.
    pub functional: Mat,
    /// Whether the upper bound holds at every level, i.e. bounds `‖u‖_p`.
    pub all_levels: bool,
}

struct UpperBound {
    value: f64,
    reason: String,
    all_levels: bool,
}

impl UpperBound {
    fn new(value: f64, reason: &str) -> Self {
        Self {
            value,
            reason: reason.into(),
            all_levels: true,
        }
    }
}

fn check_exponents(u: &OperatorRep) -> Result<()> {
    if u.domain.p != u.codomain.p {
        return Err(Error::ExponentMismatch(
            u.domain.p.to_string(),
            u.codomain.p.to_string(),
        ));
    }
    Ok(())
}

/// Certified interval for `‖I_{ℓ^p_m} ⊗ u‖`.
pub fn level_m_norm(u: &OperatorRep, m: usize) -> Result<NormEstimate> {
    Ok(level_m_search(u, m, &LevelOptions::default(), None)?.estimate)
}

pub fn level_m_norm_with(u: &OperatorRep, m: usize, opts: &LevelOptions) -> Result<NormEstimate> {
    Ok(level_m_search(u, m, opts, None)?.estimate)
}

/// Alternating ascent for the lower bound: from `e`, take a norming
/// functional `W` of `e Uᵀ` in `Y`, then a norming element of `W U` in `X`.
/// Every value is certified as `lower(‖e Uᵀ‖_Y) / upper(‖e‖_X)`.
pub fn level_m_search(
    u: &OperatorRep,
    m: usize,
    opts: &LevelOptions,
    seed_tensor: Option<&Mat>,
) -> Result<LevelSearch> {
    check_exponents(u)?;
    if m == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    let p = u.domain.p;
    let x = u.domain.node.normalized();
    let y = u.codomain.node.normalized();
    let mat = &u.matrix;
    let (d2, d1) = mat.shape();
    let bound = level_upper(p, &x, &y, mat, m, opts)?;
    let upper = bound.value;
    let mut best = LevelSearch {
        estimate: NormEstimate {
            lower: 0.0,
            upper,
            witness: Mat::zeros(d2, d1),
            upper_certificate: UpperCertificate::Bound(bound.reason.clone()),
            tolerance: opts.eval.tol,
            converged: upper == 0.0,
        },
        argument: Mat::zeros(m, d1),
        functional: Mat::zeros(m, d2),
        all_levels: bound.all_levels,
    };
    if upper == 0.0 {
        return Ok(best);
    }
    let xd = x.dual();
    let pc = p.conjugate();
    let mut starts = canonical_starts(&x, &y, mat, m, opts);
    if let Some(s) = seed_tensor {
        starts.insert(0, pad_rows(s, m));
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(opts.seed ^ (m as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for _ in 0..opts.restarts {
        starts.push(Mat::from_fn(m, d1, |_, _| StandardNormal.sample(&mut rng)));
    }
    // The ascent runs at a loose tolerance; the best tensor is certified again at the end.
    let loose = EvalOptions {
        tol: opts.eval.tol.max(1e-6),
        coset_tol: opts.eval.coset_tol.max(1e-6),
        branch: BranchOptions {
            rel_tol: opts.eval.branch.rel_tol.max(1e-7),
            ..opts.eval.branch
        },
        ..opts.eval
    };
    let mut best_start: Option<Mat> = None;
    let mut best_value = 0.0;
    for start in starts {
        if start.iter().all(|v| *v == 0.0) {
            continue;
        }
        let mut e = start;
        let mut last = 0.0;
        for _ in 0..opts.ascent_steps.max(1) {
            let Some((value, w)) = ratio(p, &x, &y, mat, &e, &loose)? else {
                break;
            };
            if value > best_value {
                best_value = value;
                best_start = Some(e.clone());
            }
            if value <= last * (1.0 + 1e-10) {
                break;
            }
            last = value;
            let g = &w * mat;
            if g.iter().all(|v| *v == 0.0) {
                break;
            }
            e = eval_node(pc, &xd, &g, &loose)?.witness;
        }
    }
    if let Some(e) = best_start {
        let ex = eval_node(p, &x, &e, &opts.eval)?;
        let ey = eval_node(p, &y, &(&e * mat.transpose()), &opts.eval)?;
        if ex.upper > 0.0 {
            best.estimate.lower = ey.lower / ex.upper;
            best.argument = &e / ex.upper;
            best.estimate.witness = ey.witness.transpose() * &best.argument;
            best.functional = ey.witness;
        }
    }
    let est = &mut best.estimate;
    est.lower = est.lower.min(est.upper);
    est.converged = est.upper - est.lower <= opts.eval.tol.max(1e-9) * est.upper;
    Ok(best)
}

/// `lower(‖e Uᵀ‖_Y) / upper(‖e‖_X)` and the norming functional of `e Uᵀ`.
fn ratio(
    p: PExponent,
    x: &Node,
    y: &Node,
    mat: &Mat,
    e: &Mat,
    opts: &EvalOptions,
) -> Result<Option<(f64, Mat)>> {
    let ex = eval_node(p, x, e, opts)?;
    if ex.upper <= 0.0 {
        return Ok(None);
    }
    let ey = eval_node(p, y, &(e * mat.transpose()), opts)?;
    Ok(Some((ey.lower / ex.upper, ey.witness)))
}

/// Elementary tensors from the basis and the level-one maximiser, and the
/// permutation patterns `Σ_i δ_i ⊗ b_{σ(i)}`.
fn canonical_starts(x: &Node, y: &Node, mat: &Mat, m: usize, opts: &LevelOptions) -> Vec<Mat> {
    let (_, d1) = mat.shape();
    let mut out = Vec::new();
    if let (Some(e), Some(f)) = (x.level_one_norm(), y.level_one_norm()) {
        let r = bilinear_max_with(mat, &f.dual(), &e, opts.eval.branch);
        let mut t = Mat::zeros(m, d1);
        for j in 0..d1 {
            t[(0, j)] = r.x[j];
        }
        out.push(t);
    }
    for j in 0..d1 {
        let mut t = Mat::zeros(m, d1);
        t[(0, j)] = 1.0;
        out.push(t);
    }
    if m > 1 {
        for shift in 0..d1 {
            out.push(Mat::from_fn(m, d1, |i, j| {
                if (i + shift) % d1 == j {
                    1.0
                } else {
                    0.0
                }
            }));
            out.push(Mat::from_fn(m, d1, |i, j| {
                if (i + shift) % d1 == j {
                    if i % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    0.0
                }
            }));
        }
    }
    out
}

/// `max_{‖x‖_E ≤ 1} ‖U x‖_F` between leaf norms.
fn banach_norm(mat: &Mat, e: &BanachNormSpec, f: &BanachNormSpec, opts: &EvalOptions) -> f64 {
    bilinear_max_with(mat, &f.dual(), e, opts.branch).upper
}

fn is_plain_lq(e: &BanachNormSpec, q: PExponent) -> bool {
    matches!(e.kind(), NormKind::Lq(r) if *r == q)
}

/// An upper bound for `‖I_{ℓ^p_m} ⊗ u‖` with its reason; `all_levels`
/// records whether it also bounds `‖u‖_p`.
fn level_upper(
    p: PExponent,
    x: &Node,
    y: &Node,
    mat: &Mat,
    m: usize,
    opts: &LevelOptions,
) -> Result<UpperBound> {
    if mat.iter().all(|v| *v == 0.0) {
        return Ok(UpperBound::new(0.0, "zero operator"));
    }
    // Exact reductions of the codomain and the domain.
    if let Node::SumInf(parts) = y {
        let mut worst = UpperBound::new(0.0, "");
        let mut all = true;
        let mut off = 0;
        for part in parts {
            let k = part.dim();
            let block = mat.rows(off, k).into_owned();
            let b = level_upper(p, x, &part.normalized(), &block, m, opts)?;
            all &= b.all_levels;
            if b.value >= worst.value {
                worst = b;
            }
            off += k;
        }
        return Ok(UpperBound {
            value: worst.value,
            reason: format!("max over codomain summands of {}", worst.reason),
            all_levels: all,
        });
    }
    if let Node::Sum1(parts) = x {
        let mut worst = UpperBound::new(0.0, "");
        let mut all = true;
        let mut off = 0;
        for part in parts {
            let k = part.dim();
            let block = mat.columns(off, k).into_owned();
            let b = level_upper(p, &part.normalized(), y, &block, m, opts)?;
            all &= b.all_levels;
            if b.value >= worst.value {
                worst = b;
            }
            off += k;
        }
        return Ok(UpperBound {
            value: worst.value,
            reason: format!("max over domain summands of {}", worst.reason),
            all_levels: all,
        });
    }
    if let Node::Subspace { parent, basis } = y {
        return level_upper(p, x, parent, &(basis.transpose() * mat), m, opts);
    }
    if let Node::Quotient { parent, map } = x {
        return level_upper(p, parent, y, &(mat * map), m, opts);
    }
    let pc = p.conjugate();
    // Trace duality into Max(ℓ^{p′}_n), directly or for the adjoint.
    if opts.trace_duality {
        if let Node::Max(f) = y {
            if is_plain_lq(f, pc) {
                let v = eval_node(pc, &x.dual(), mat, &opts.eval)?.upper;
                return Ok(UpperBound::new(v, "trace duality at the codomain level"));
            }
        }
        if let Node::Min(e) = x {
            if is_plain_lq(e, pc) {
                let v = eval_node(p, y, &mat.transpose(), &opts.eval)?.upper;
                return Ok(UpperBound::new(v, "trace duality for the adjoint"));
            }
        }
    }
    let leaves = (x.level_one_norm(), y.level_one_norm());
    if let (Some(e), Some(f)) = &leaves {
        let positive_lattices = matches!(x, Node::Lattice(_))
            && matches!(y, Node::Lattice(_))
            && mat.iter().all(|v| *v >= 0.0);
        let reason = match (x, y) {
            (Node::Max(_), _) => Some("maximal domain: equals the Banach norm"),
            (_, Node::Min(_)) => Some("minimal codomain: equals the Banach norm"),
            _ if positive_lattices => Some("positive map between lattices: equals the Banach norm"),
            _ => None,
        };
        if let Some(reason) = reason {
            return Ok(UpperBound::new(banach_norm(mat, e, f, &opts.eval), reason));
        }
        if m == 1 {
            let value = banach_norm(mat, e, f, &opts.eval);
            return Ok(UpperBound {
                value,
                reason: "level one: the Banach norm".into(),
                all_levels: false,
            });
        }
    }
    let v = nuclear_bound(p, x, y, mat, &opts.eval)?;
    Ok(UpperBound::new(v, "nuclear decomposition bound"))
}

/// `Σ_k ‖φ_k‖_{X*} ‖y_k‖_Y` for a decomposition `U = Σ y_k φ_kᵀ`; every
/// rank-one map has `‖y φᵀ‖_p = ‖φ‖ ‖y‖`. Uses column generation when one
/// factor is a plain `ℓ^q`, else the best of the row, column and singular
/// value decompositions.
fn nuclear_bound(p: PExponent, x: &Node, y: &Node, mat: &Mat, opts: &EvalOptions) -> Result<f64> {
    let (d2, d1) = mat.shape();
    let xd = x.dual();
    let pc = p.conjugate();
    if let (Some(e), Some(f)) = (x.level_one_norm(), y.level_one_norm()) {
        let ed = e.dual();
        if let NormKind::Lq(r) = ed.kind() {
            return Ok(projective_norm_with(*r, &f, &mat.transpose(), opts)?.upper);
        }
        if let NormKind::Lq(r) = f.kind() {
            return Ok(projective_norm_with(*r, &ed, mat, opts)?.upper);
        }
    }
    let norm_y = |v: &[f64]| -> Result<f64> {
        Ok(eval_node(p, y, &Mat::from_row_slice(1, d2, v), opts)?.upper)
    };
    let norm_phi = |v: &[f64]| -> Result<f64> {
        Ok(eval_node(pc, &xd, &Mat::from_row_slice(1, d1, v), opts)?.upper)
    };
    let mut by_cols = 0.0;
    for j in 0..d1 {
        let c = col_vec(mat, j);
        if c.iter().any(|v| *v != 0.0) {
            let mut e = vec![0.0; d1];
            e[j] = 1.0;
            by_cols += norm_y(&c)? * norm_phi(&e)?;
        }
    }
    let mut by_rows = 0.0;
    for i in 0..d2 {
        let r: Vec<f64> = mat.row(i).iter().copied().collect();
        if r.iter().any(|v| *v != 0.0) {
            let mut e = vec![0.0; d2];
            e[i] = 1.0;
            by_rows += norm_y(&e)? * norm_phi(&r)?;
        }
    }
    let svd = mat.clone().svd(true, true);
    let (uu, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let mut by_svd = 0.0;
    for k in 0..svd.singular_values.len() {
        let s = svd.singular_values[k];
        if s > 1e-15 * max_abs(mat) {
            by_svd += s
                * norm_y(&col_vec(&uu, k))?
                * norm_phi(&vt.row(k).iter().copied().collect::<Vec<_>>())?;
        }
    }
    Ok(by_cols.min(by_rows).min(by_svd))
}

/// `ν₁(w) = inf Σ ‖φ_k‖_{q′} ‖y_k‖_q` for `w: ℓ^q_m → ℓ^q_n` (`n × m`),
/// computed as the projective norm of `wᵀ` in `ℓ^{q′}_m ⊗ ℓ^q_n`.
pub fn nuclear_norm(q: PExponent, w: &Mat) -> Result<NormEstimate> {
    let n = w.nrows();
    projective_norm_with(
        q.conjugate(),
        &BanachNormSpec::lq(q, n),
        &w.transpose(),
        &EvalOptions::default(),
    )
}

/// `‖u‖_p` for `u: X → Max(ℓ^{p′}_n)`: the supremum of `tr(u ∘ op(x))` over
/// `ball(ℓ^p_n ⊗ X)`, which is the dual norm of `U` (`n × d`) at level `n`.
pub fn norm_to_max(u: &OperatorRep) -> Result<NormEstimate> {
    norm_to_max_with(u, &EvalOptions::default())
}

pub fn norm_to_max_with(u: &OperatorRep, opts: &EvalOptions) -> Result<NormEstimate> {
    check_exponents(u)?;
    let pc = u.domain.p.conjugate();
    match u.codomain.node.normalized() {
        Node::Max(f) if is_plain_lq(&f, pc) => {}
        _ => {
            return Err(Error::InvalidSpace(format!(
                "codomain must be Max(l^{pc}_n)"
            )))
        }
    }
    let xd = u.domain.node.normalized().dual();
    eval_node(pc, &xd, &u.matrix, opts)
}

/// `⌈x⌉`, ignoring a relative rounding error of `1e-12` in `x`.
pub(crate) fn ceil_tolerant(x: f64) -> u128 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r as u128
    } else {
        x.ceil() as u128
    }
}

/// `2^n ⌈c n^k / ε⌉^n`, saturating.
pub fn grid_constant(n: usize, c: f64, k: i32, eps: f64) -> u128 {
    let base = ceil_tolerant(c * (n as f64).powi(k) / eps);
    let mut out: u128 = 1;
    for _ in 0..n {
        out = out.saturating_mul(2).saturating_mul(base);
    }
    out
}

/// `M(n, ε) = 2^n ⌈4n³/ε⌉^n`: levels needed for `(1+ε)`-control of a rank-`n` map.
pub fn control_m(n: usize, eps: f64) -> u128 {
    grid_constant(n, 4.0, 3, eps)
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelEntry {
    pub m: usize,
    pub estimate: NormEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelProfile {
    pub levels: Vec<LevelEntry>,
    pub rank: usize,
    pub control_m: u128,
    pub eps: f64,
    /// True when every level up to `control_m` was evaluated, so that
    /// `‖u‖_p ≤ (1+ε) · upper(level control_m)`.
    pub certified: bool,
    /// An interval for `‖u‖_p`: the best lower bound over the levels, and
    /// `(1+ε)` times the top level's upper bound when certified, otherwise
    /// the best bound known to hold at every level (possibly infinite).
    pub bound: (f64, f64),
}

/// Levels `1..=min(m_budget, M(rank, ε))`; each level is seeded with the best
/// tensor of the previous one (padded by a zero row).
pub fn multibounded_norm(u: &OperatorRep, eps: f64, m_budget: usize) -> Result<LevelProfile> {
    multibounded_norm_with(u, eps, m_budget, &LevelOptions::default())
}

pub fn multibounded_norm_with(
    u: &OperatorRep,
    eps: f64,
    m_budget: usize,
    opts: &LevelOptions,
) -> Result<LevelProfile> {
    check_exponents(u)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let r = rank(&u.matrix, 1e-10);
    let control = if r == 0 { 1 } else { control_m(r, eps) };
    let top = (m_budget as u128).min(control).max(1) as usize;
    let mut levels: Vec<LevelEntry> = Vec::with_capacity(top);
    let mut prev: Option<Mat> = None;
    let mut global_upper = f64::INFINITY;
    for m in 1..=top {
        let res = level_m_search(u, m, opts, prev.as_ref())?;
        prev = Some(res.argument.clone());
        if res.all_levels {
            global_upper = global_upper.min(res.estimate.upper);
        }
        levels.push(LevelEntry {
            m,
            estimate: res.estimate,
        });
    }
    let certified = control <= m_budget as u128;
    let lower = levels.iter().map(|l| l.estimate.lower).fold(0.0, f64::max);
    let last_upper = levels.last().map(|l| l.estimate.upper).unwrap_or(0.0);
    let upper = if certified {
        ((1.0 + eps) * last_upper).min(global_upper)
    } else {
        global_upper
    };
    Ok(LevelProfile {
        levels,
        rank: r,
        control_m: control,
        eps,
        certified,
        bound: (lower, upper),
    })
}
