use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{extend_to_max, matrix_json, norming_functional_map};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, null_space, pad_rows, pinv, Mat};
use crate::norm::BanachNormSpec;
use crate::operator_norms::{grid_constant, level_m_search, LevelOptions};
use crate::optim::NelderMead;
use crate::space::{Node, SpaceSpec};
use crate::tensor::OperatorRep;
use crate::tensor_norms::{eval_node, EvalOptions};

/// `M(n, ε) = 2^n ⌈12n³/ε⌉^n`, the level at which the net is taken.
pub fn embed_constant(n: usize, eps: f64) -> u128 {
    grid_constant(n, 12.0, 3, eps)
}

/// Interval for `‖I_{ℓ^p_m} ⊗ T‖` at one tested level.
#[derive(Clone, Debug, Serialize)]
pub struct LevelRatio {
    pub level: usize,
    pub lower: f64,
    pub upper: f64,
}

/// `U : S → (Σ Max(ℓ^{p′}_M̂))_∞` built from norming functionals of net points.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub operator: OperatorRep,
    /// The inverse on the range, as a map from `Subspace(range, Uᵀ)` onto `S`.
    pub inverse: OperatorRep,
    pub net: Vec<Mat>,
    pub level: usize,
    /// `ε/(2+ε)`, the covering radius a full net would need.
    pub delta: f64,
    pub eps: f64,
    /// Upper bound for `‖U‖_p`: the largest block norm.
    pub contraction: f64,
    pub levels: Vec<LevelRatio>,
    /// Largest lower bound for `‖I ⊗ U⁻¹‖` over the tested levels.
    pub measured: f64,
    /// Largest upper bound over the tested levels.
    pub upper: f64,
    /// `upper ≤ 1 + ε` at every tested level.
    pub certified: bool,
    pub theoretical_level: u128,
}

impl Serialize for Embedding {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            matrix: Vec<Vec<f64>>,
            net_size: usize,
            level: usize,
            delta: f64,
            eps: f64,
            contraction: f64,
            levels: &'a [LevelRatio],
            measured: f64,
            upper: f64,
            certified: bool,
            theoretical_level: String,
        }
        Out {
            matrix: matrix_json(&self.operator.matrix),
            net_size: self.net.len(),
            level: self.level,
            delta: self.delta,
            eps: self.eps,
            contraction: self.contraction,
            levels: &self.levels,
            measured: self.measured,
            upper: self.upper,
            certified: self.certified,
            theoretical_level: self.theoretical_level.to_string(),
        }
        .serialize(s)
    }
}

struct Assembled {
    operator: OperatorRep,
    inverse: OperatorRep,
    contraction: f64,
}

/// The norming maps of the net stacked into `U`, and `max ‖map‖_p`.
fn stack(s: &SpaceSpec, net: &[Mat], level: usize, opts: &LevelOptions) -> Result<(Mat, f64)> {
    let mut u = Mat::zeros(level * net.len(), s.dim());
    let mut contraction: f64 = 0.0;
    for (i, x) in net.iter().enumerate() {
        let map = norming_functional_map(s, x, &opts.eval)?;
        contraction = contraction.max(map.norm.upper);
        u.rows_mut(i * level, level).copy_from(&map.operator.matrix);
    }
    Ok((u, contraction))
}

fn assemble(s: &SpaceSpec, net: &[Mat], level: usize, opts: &LevelOptions) -> Result<Assembled> {
    let p = s.p;
    let n = s.dim();
    let (u, contraction) = stack(s, net, level, opts)?;
    let parts = vec![Node::Max(BanachNormSpec::lq(p.conjugate(), level)); net.len()];
    let codomain = SpaceSpec {
        p,
        node: Node::SumInf(parts),
    };
    let range = SpaceSpec::subspace(codomain.clone(), u.transpose())?;
    let operator = OperatorRep::new(s.clone(), codomain, u)?;
    let inverse = OperatorRep::new(range, s.clone(), Mat::identity(n, n))?;
    Ok(Assembled {
        operator,
        inverse,
        contraction,
    })
}

fn unit_tensor(s: &SpaceSpec, t: Mat, opts: &LevelOptions) -> Result<Option<Mat>> {
    let nrm = eval_node(s.p, &s.node, &t, &opts.eval)?.upper;
    Ok(if nrm > 1e-12 { Some(t / nrm) } else { None })
}

/// Lower bound for `‖I_{ℓ^p_m} ⊗ U⁻¹‖ = sup ‖x‖_S / ‖x Uᵀ‖`, by Nelder–Mead
/// from the net points and seeded random tensors, with the best point
/// certified as `lower(‖x‖_S) / upper(‖x Uᵀ‖)`.
fn inverse_search(
    s: &SpaceSpec,
    u: &OperatorRep,
    net: &[Mat],
    m: usize,
    opts: &LevelOptions,
) -> Result<(f64, Mat)> {
    let n = s.dim();
    let (p, sn, yn) = (s.p, &s.node, &u.codomain.node);
    let loose = EvalOptions {
        tol: 1e-6,
        ..opts.eval
    };
    let ut = u.matrix.transpose();
    let ratio = |x: &Mat, o: &EvalOptions| -> Result<f64> {
        let top = eval_node(p, sn, x, o)?.lower;
        let bottom = eval_node(p, yn, &(x * &ut), o)?.upper;
        Ok(if bottom > 0.0 { top / bottom } else { 0.0 })
    };
    let mut rng =
        ChaCha8Rng::seed_from_u64(opts.seed ^ (m as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut starts: Vec<Mat> = net.iter().map(|t| t.rows(0, m).into_owned()).collect();
    for _ in 0..opts.restarts + 2 {
        starts.push(Mat::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng)));
    }
    // Coarse pass over all starts, then a local search from the few best.
    let mut scored = Vec::with_capacity(starts.len());
    for x in starts {
        if max_abs(&x) > 0.0 {
            scored.push((ratio(&x, &loose)?, x));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let nm = NelderMead {
        max_evals: 60 * m * n + 100,
        ftol: 1e-10,
        initial_step: 0.2,
    };
    let mut best = (0.0, Mat::zeros(m, n));
    let mut failure = None;
    for (_, x0) in scored.into_iter().take(3) {
        let start: Vec<f64> = x0.iter().copied().collect();
        let (arg, _) = nm.minimize(
            |v| match ratio(&Mat::from_column_slice(m, n, v), &loose) {
                Ok(r) => -r,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &start,
        );
        let x = Mat::from_column_slice(m, n, &arg);
        let r = ratio(&x, &opts.eval)?;
        if r > best.0 {
            best = (r, x);
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(best)
}

/// Embed `S` into a finite `ℓ^∞`-sum of `Max(ℓ^{p′}_M̂)` with `‖U‖_p ≤ 1`.
///
/// The net of the unit sphere of `ℓ^p_M̂ ⊗ S` starts from the normalised
/// basis vectors and seeded random points, and is refined greedily: each
/// round adds the worst tensor found by the level searches on `U⁻¹`. The
/// net never exceeds `net_budget` points. `‖I ⊗ U⁻¹‖` is searched at levels
/// `1..=level_budget`. An upper bound is only available for `dim S = 1`,
/// where `U⁻¹` has rank one and its `p`-norm is its norm; otherwise
/// `certified` is false and `measured` is the searched value.
pub fn embed_fd(
    s: &SpaceSpec,
    eps: f64,
    level_budget: usize,
    net_budget: usize,
    opts: &LevelOptions,
) -> Result<Embedding> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    if level_budget == 0 || net_budget == 0 {
        return Err(Error::InvalidArgument("budgets must be positive".into()));
    }
    let n = s.dim();
    let level = level_budget;
    let mut net = Vec::new();
    for j in 0..n.min(net_budget) {
        let mut t = Mat::zeros(level, n);
        t[(0, j)] = 1.0;
        if let Some(t) = unit_tensor(s, t, opts)? {
            net.push(t);
        }
    }
    // A kernel vector x of U is normed by its own map, so adding it raises
    // the rank; few basis vectors can share a norming functional.
    loop {
        let kernel = null_space(&stack(s, &net, level, opts)?.0);
        if kernel.ncols() == 0 {
            break;
        }
        if net.len() >= net_budget {
            return Err(Error::InvalidArgument(format!(
                "a net of {net_budget} points cannot make the embedding injective"
            )));
        }
        let mut t = Mat::zeros(level, n);
        t.row_mut(0).copy_from(&kernel.column(0).transpose());
        net.extend(unit_tensor(s, t, opts)?);
    }
    let random = (net_budget - net.len()) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..random {
        let t = Mat::from_fn(level, n, |_, _| StandardNormal.sample(&mut rng));
        if let Some(t) = unit_tensor(s, t, opts)? {
            net.push(t);
        }
    }
    loop {
        let built = assemble(s, &net, level, opts)?;
        let mut levels = Vec::with_capacity(level);
        let mut worst: Vec<(f64, Mat)> = Vec::new();
        for m in 1..=level {
            let (lower, argument) = inverse_search(s, &built.operator, &net, m, opts)?;
            let upper = if n == 1 { lower } else { f64::INFINITY };
            levels.push(LevelRatio {
                level: m,
                lower,
                upper,
            });
            worst.push((lower, argument));
        }
        let measured = levels.iter().map(|l| l.lower).fold(1.0, f64::max);
        let room = net_budget.saturating_sub(net.len());
        if measured > 1.0 + 1e-9 && room > 0 {
            worst.sort_by(|a, b| b.0.total_cmp(&a.0));
            let before = net.len();
            for (_, arg) in worst.into_iter().take(room) {
                if let Some(t) = unit_tensor(s, pad_rows(&arg, level), opts)? {
                    net.push(t);
                }
            }
            if net.len() > before {
                continue;
            }
        }
        let upper = levels.iter().map(|l| l.upper).fold(0.0, f64::max);
        return Ok(Embedding {
            operator: built.operator,
            inverse: built.inverse,
            net,
            level,
            delta: eps / (2.0 + eps),
            eps,
            contraction: built.contraction,
            measured,
            upper,
            certified: upper <= 1.0 + eps,
            levels,
            theoretical_level: embed_constant(n, eps),
        });
    }
}

/// A projection `P = u⁻¹ ũ|_Y` from `Y = ũ⁻¹(range u)` onto `E`.
#[derive(Clone, Debug)]
pub struct AlmostProjection {
    /// `Y` as a subspace of `X`; the first `dim E` basis rows span `E`.
    pub y: SpaceSpec,
    pub operator: OperatorRep,
    pub embedding: Embedding,
    /// Largest `‖ũ_i‖_p` over the extended blocks.
    pub extension_norm: f64,
    /// `max |P_Y² − P_Y|` in `Y`-coordinates.
    pub idempotence_error: f64,
    /// `max |P|_E − I|`.
    pub identity_error: f64,
    pub levels: Vec<LevelRatio>,
    pub measured: f64,
    /// `‖u⁻¹‖ ‖ũ‖` with the embedding's upper bound.
    pub product_bound: f64,
}

impl Serialize for AlmostProjection {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            y_basis: Vec<Vec<f64>>,
            matrix: Vec<Vec<f64>>,
            embedding: &'a Embedding,
            extension_norm: f64,
            idempotence_error: f64,
            identity_error: f64,
            levels: &'a [LevelRatio],
            measured: f64,
            product_bound: f64,
        }
        let y_basis = match &self.y.node {
            Node::Subspace { basis, .. } => matrix_json(basis),
            _ => Vec::new(),
        };
        Out {
            y_basis,
            matrix: matrix_json(&self.operator.matrix),
            embedding: &self.embedding,
            extension_norm: self.extension_norm,
            idempotence_error: self.idempotence_error,
            identity_error: self.identity_error,
            levels: &self.levels,
            measured: self.measured,
            product_bound: self.product_bound,
        }
        .serialize(s)
    }
}

/// Projection onto `E = span(rows of e_basis) ⊂ X` from a finite-codimensional `Y ⊃ E`.
pub fn almost_projection(
    x: &SpaceSpec,
    e_basis: &Mat,
    eps: f64,
    level_budget: usize,
    net_budget: usize,
    opts: &LevelOptions,
) -> Result<AlmostProjection> {
    let big = x.dim();
    if e_basis.ncols() != big {
        return Err(Error::DimensionMismatch {
            expected: big,
            got: e_basis.ncols(),
        });
    }
    let k = e_basis.nrows();
    let e = SpaceSpec::subspace(x.clone(), e_basis.clone())?;
    let embedding = embed_fd(&e, eps, level_budget, net_budget, opts)?;
    let u = &embedding.operator.matrix;
    let level = embedding.level;
    let blocks = u.nrows() / level;
    let mut ext = Mat::zeros(u.nrows(), big);
    let mut extension_norm: f64 = 0.0;
    for i in 0..blocks {
        let block = u.rows(i * level, level).into_owned();
        let codomain = SpaceSpec::max(x.p, BanachNormSpec::lq(x.p.conjugate(), level));
        let ui = OperatorRep::new(e.clone(), codomain, block)?;
        let found = extend_to_max(&ui, 1e-3, opts)?;
        extension_norm = extension_norm.max(found.norm.upper);
        ext.rows_mut(i * level, level)
            .copy_from(&found.operator.matrix);
    }
    let u_pinv = pinv(u);
    let off_range = Mat::identity(u.nrows(), u.nrows()) - u * &u_pinv;
    let mut constraints = Mat::zeros(u.nrows() + k, big);
    constraints
        .rows_mut(0, u.nrows())
        .copy_from(&(&off_range * &ext));
    constraints.rows_mut(u.nrows(), k).copy_from(e_basis);
    let extra = null_space(&constraints);
    let dim_y = k + extra.ncols();
    let mut y_basis = Mat::zeros(dim_y, big);
    y_basis.rows_mut(0, k).copy_from(e_basis);
    y_basis
        .rows_mut(k, extra.ncols())
        .copy_from(&extra.transpose());
    let y = SpaceSpec::subspace(x.clone(), y_basis.clone())?;
    let p_mat = &u_pinv * &ext * y_basis.transpose();
    let mut p_y = Mat::zeros(dim_y, dim_y);
    p_y.rows_mut(0, k).copy_from(&p_mat);
    let idempotence_error = max_abs(&(&p_y * &p_y - &p_y));
    let identity_error = max_abs(&(p_mat.columns(0, k).into_owned() - Mat::identity(k, k)));
    let operator = OperatorRep::new(y.clone(), e, p_mat)?;
    let mut levels = Vec::with_capacity(level);
    for m in 1..=level {
        let est = level_m_search(&operator, m, opts, None)?.estimate;
        levels.push(LevelRatio {
            level: m,
            lower: est.lower,
            upper: est.upper,
        });
    }
    let measured = levels.iter().map(|l| l.lower).fold(0.0, f64::max);
    let product_bound = embedding.upper * extension_norm;
    Ok(AlmostProjection {
        y,
        operator,
        embedding,
        extension_norm,
        idempotence_error,
        identity_error,
        levels,
        measured,
        product_bound,
    })
}
