//! Norm-preserving extensions into `Max(ℓ^{p′}_n)`, near-isometric lifts
//! through quotients, and the embedding and almost-projection built on them.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::NormEstimate;
use crate::exponent::PExponent;
use crate::linalg::{max_abs, min_norm_preimage, null_space, to_rows, Mat};
use crate::norm::{BanachNormSpec, NormKind};
use crate::operator_norms::{level_m_norm_with, LevelOptions};
use crate::space::{dual_spec, Node, SpaceSpec};
use crate::tensor::OperatorRep;
use crate::tensor_norms::{eval_node, minimize_on_coset, EvalOptions};

mod embed;
pub use embed::{
    almost_projection, embed_constant, embed_fd, AlmostProjection, Embedding, LevelRatio,
};

/// `‖u‖_p` for `u` with a fixed ball: lower bound from the level search,
/// upper bound valid at every level when one is available.
fn operator_p_norm(u: &OperatorRep, level: usize, opts: &LevelOptions) -> Result<NormEstimate> {
    level_m_norm_with(u, level.max(1), opts)
}

fn is_plain(e: &BanachNormSpec, q: PExponent) -> bool {
    matches!(e.kind(), NormKind::Lq(r) if *r == q)
}

fn matrix_json(m: &Mat) -> Vec<Vec<f64>> {
    to_rows(m)
}

/// The ratio of two certified intervals, `1` when both vanish.
fn certified_ratio(top: f64, bottom: f64) -> f64 {
    if top <= 0.0 {
        1.0
    } else if bottom <= 0.0 {
        f64::INFINITY
    } else {
        top / bottom
    }
}

/// A norm-preserving extension `ũ : Y → Max(ℓ^{p′}_n)` of `u : X → Max(ℓ^{p′}_n)`.
#[derive(Clone, Debug)]
pub struct Extension {
    pub operator: OperatorRep,
    /// `max |ũ Bᵀ − U|`.
    pub residual: f64,
    /// `‖ũ‖_p`, evaluated independently on the found matrix.
    pub norm: NormEstimate,
    /// `‖u‖_p`; the lower bound comes from the level-`n` search.
    pub source_norm: NormEstimate,
    /// `norm.upper / source_norm.lower`.
    pub ratio: f64,
    pub converged: bool,
}

impl Serialize for Extension {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            matrix: Vec<Vec<f64>>,
            residual: f64,
            norm: &'a NormEstimate,
            source_norm: &'a NormEstimate,
            ratio: f64,
            converged: bool,
        }
        Out {
            matrix: matrix_json(&self.operator.matrix),
            residual: self.residual,
            norm: &self.norm,
            source_norm: &self.source_norm,
            ratio: self.ratio,
            converged: self.converged,
        }
        .serialize(s)
    }
}

/// Split a space into `(parent, basis)` when it is a subspace, else `(itself, I)`.
fn as_subspace(s: &SpaceSpec) -> (Node, Mat) {
    match s.node.normalized() {
        Node::Subspace { parent, basis } => (*parent, basis),
        node => {
            let d = node.dim();
            (node, Mat::identity(d, d))
        }
    }
}

fn as_quotient(s: &SpaceSpec) -> (Node, Mat) {
    match s.node.normalized() {
        Node::Quotient { parent, map } => (*parent, map),
        node => {
            let d = node.dim();
            (node, Mat::identity(d, d))
        }
    }
}

/// Extend `u : X → Max(ℓ^{p′}_n)`, `X = Subspace(Y, B)`, to all of `Y`.
///
/// Extensions are the coset `Ũ₀ + Z Kᵀ` with `K` spanning `ker B`, and
/// `‖ũ‖_p` is the level-`n` norm of `Ũ` in `Y*`, so the minimal extension
/// is a coset minimisation. The achieved ratio is measured against the
/// level-`n` search on `u`, which does not use the extension property.
pub fn extend_to_max(u: &OperatorRep, tolerance: f64, opts: &LevelOptions) -> Result<Extension> {
    let p = u.domain.p;
    let pc = p.conjugate();
    let n = u.codomain.dim();
    match u.codomain.node.normalized() {
        Node::Max(f) if is_plain(&f, pc) => {}
        _ => {
            return Err(Error::InvalidSpace(format!(
                "codomain must be Max(l^{pc}_{n})"
            )))
        }
    }
    let (y, b) = as_subspace(&u.domain);
    let y_dual = y.dual();
    let start = min_norm_preimage(&u.matrix, &b);
    let kernel = null_space(&b);
    let eval = EvalOptions {
        coset_tol: opts.eval.coset_tol.min(tolerance * 1e-2),
        ..opts.eval
    };
    let best = minimize_on_coset(pc, &y_dual, &start, &kernel, &eval)?;
    let ext = best.point;
    let residual = max_abs(&(&ext * b.transpose() - &u.matrix));
    let norm = eval_node(pc, &y_dual, &ext, &opts.eval)?;
    let source_norm = operator_p_norm(u, n, opts)?;
    let ratio = certified_ratio(norm.upper, source_norm.lower);
    let operator = OperatorRep::new(SpaceSpec { p, node: y }, u.codomain.clone(), ext)?;
    Ok(Extension {
        operator,
        residual,
        norm,
        source_norm,
        ratio,
        converged: ratio <= 1.0 + tolerance,
    })
}

/// A lift `ũ` of `u : Min(ℓ^{p′}_n) → X/Y` through the quotient map.
#[derive(Clone, Debug)]
pub struct Lift {
    pub operator: OperatorRep,
    /// `max |q ũ − u|`.
    pub residual: f64,
    pub norm: NormEstimate,
    pub source_norm: NormEstimate,
    pub ratio: f64,
    pub converged: bool,
}

impl Serialize for Lift {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            matrix: Vec<Vec<f64>>,
            residual: f64,
            norm: &'a NormEstimate,
            source_norm: &'a NormEstimate,
            ratio: f64,
            converged: bool,
        }
        Out {
            matrix: matrix_json(&self.operator.matrix),
            residual: self.residual,
            norm: &self.norm,
            source_norm: &self.source_norm,
            ratio: self.ratio,
            converged: self.converged,
        }
        .serialize(s)
    }
}

fn check_min_domain(u: &OperatorRep) -> Result<()> {
    let pc = u.domain.p.conjugate();
    match u.domain.node.normalized() {
        Node::Min(f) if is_plain(&f, pc) => Ok(()),
        _ => Err(Error::InvalidSpace(format!("domain must be Min(l^{pc}_n)"))),
    }
}

/// Lift `u : Min(ℓ^{p′}_n) → X/Y` to `ũ : Min(ℓ^{p′}_n) → X` with `qũ = u`.
///
/// For this domain `‖ũ‖_p` is the level-`n` norm of `ũᵀ` in `X`, so the
/// best lift minimises that norm over the coset of `ũᵀ` modulo `ker q`.
pub fn lift_operator(u: &OperatorRep, eps: f64, opts: &LevelOptions) -> Result<Lift> {
    check_min_domain(u)?;
    let p = u.domain.p;
    let n = u.domain.dim();
    let (x, q) = as_quotient(&u.codomain);
    let target = u.matrix.transpose();
    let start = min_norm_preimage(&target, &q);
    let kernel = null_space(&q);
    let eval = EvalOptions {
        coset_tol: opts.eval.coset_tol.min(eps * 1e-2),
        ..opts.eval
    };
    let best = minimize_on_coset(p, &x, &start, &kernel, &eval)?;
    let lifted = best.point.transpose();
    finish_lift(u, SpaceSpec { p, node: x }, &q, lifted, n, eps, opts)
}

fn finish_lift(
    u: &OperatorRep,
    x: SpaceSpec,
    q: &Mat,
    lifted: Mat,
    n: usize,
    eps: f64,
    opts: &LevelOptions,
) -> Result<Lift> {
    let residual = max_abs(&(q * &lifted - &u.matrix));
    let norm = eval_node(x.p, &x.node, &lifted.transpose(), &opts.eval)?;
    let source_norm = operator_p_norm(u, n, opts)?;
    let ratio = certified_ratio(norm.upper, source_norm.lower);
    let operator = OperatorRep::new(u.domain.clone(), x, lifted)?;
    Ok(Lift {
        operator,
        residual,
        norm,
        source_norm,
        ratio,
        converged: ratio <= 1.0 + eps,
    })
}

/// The dual route: `u*` restricted through `q*` is a map from a subspace of
/// `X*` into `Max(ℓ^p_n)`; its norm-preserving extension `w` gives `ũ = w*`.
pub fn lift_operator_dual(u: &OperatorRep, eps: f64, opts: &LevelOptions) -> Result<Lift> {
    check_min_domain(u)?;
    let p = u.domain.p;
    let n = u.domain.dim();
    let (x, q) = as_quotient(&u.codomain);
    let sub = dual_spec(&SpaceSpec {
        p,
        node: Node::Quotient {
            parent: Box::new(x.clone()),
            map: q.clone(),
        },
    });
    let target = SpaceSpec::max(p.conjugate(), BanachNormSpec::lq(p, n));
    let ustar = OperatorRep::new(sub, target, u.matrix.transpose())?;
    let ext = extend_to_max(&ustar, eps, opts)?;
    finish_lift(
        u,
        SpaceSpec { p, node: x },
        &q,
        ext.operator.matrix.transpose(),
        n,
        eps,
        opts,
    )
}

/// A representative of a quotient tensor with nearly minimal norm.
#[derive(Clone, Debug)]
pub struct LiftedTensor {
    pub point: Mat,
    pub residual: f64,
    /// Norm of `point` in the parent.
    pub norm: NormEstimate,
    /// Norm of the target in the quotient.
    pub quotient_norm: NormEstimate,
    pub ratio: f64,
    pub converged: bool,
}

impl Serialize for LiftedTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            point: Vec<Vec<f64>>,
            residual: f64,
            norm: &'a NormEstimate,
            quotient_norm: &'a NormEstimate,
            ratio: f64,
            converged: bool,
        }
        Out {
            point: matrix_json(&self.point),
            residual: self.residual,
            norm: &self.norm,
            quotient_norm: &self.quotient_norm,
            ratio: self.ratio,
            converged: self.converged,
        }
        .serialize(s)
    }
}

/// `x` with `(I ⊗ q)x = e` and `‖x‖ ≤ (1 + ε)‖e‖`.
pub fn min_norm_lift(
    quotient: &SpaceSpec,
    e: &Mat,
    eps: f64,
    opts: &EvalOptions,
) -> Result<LiftedTensor> {
    let (x, q) = as_quotient(quotient);
    if e.ncols() != q.nrows() {
        return Err(Error::DimensionMismatch {
            expected: q.nrows(),
            got: e.ncols(),
        });
    }
    let p = quotient.p;
    let start = min_norm_preimage(e, &q);
    let kernel = null_space(&q);
    let eval = EvalOptions {
        coset_tol: opts.coset_tol.min(eps * 1e-2),
        ..*opts
    };
    let best = minimize_on_coset(p, &x, &start, &kernel, &eval)?;
    let residual = max_abs(&(&best.point * q.transpose() - e));
    let norm = eval_node(p, &x, &best.point, opts)?;
    let quotient_norm = eval_node(p, &quotient.node, e, opts)?;
    let ratio = certified_ratio(norm.upper, quotient_norm.lower);
    Ok(LiftedTensor {
        point: best.point,
        residual,
        norm,
        quotient_norm,
        ratio,
        converged: ratio <= 1.0 + eps,
    })
}

/// The geometric-series lift over a net of the unit ball.
#[derive(Clone, Debug, Serialize)]
pub struct TelescopingLift {
    #[serde(serialize_with = "ser_mat")]
    pub point: Mat,
    pub residual: f64,
    pub terms: usize,
    /// `‖e − Σ_{j<k} (ε/6)^j e_j‖` after each term.
    pub residual_norms: Vec<f64>,
    /// Net points visited, each lifted once.
    pub lifted_net_points: usize,
    /// Grid spacing of the implicit `ε/6`-net.
    pub spacing: f64,
    pub norm: NormEstimate,
    pub quotient_norm: NormEstimate,
    /// `(1 + ε/9)/(1 − ε/6)`, the bound on `‖x‖/‖e‖`.
    pub bound: f64,
    pub ratio: f64,
}

fn ser_mat<S: serde::Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
    to_rows(m).serialize(s)
}

/// Lift `e` as `Σ_k (ε/6)^k z(e_k)`, `e_k` from an `ε/6`-net of the unit
/// ball of `ℓ^p_m ⊗ (X/Y)` and `z(e_k)` lifts with `‖z‖ ≤ (1 + ε/9)‖e_k‖`.
///
/// The net is the grid of spacing `h` in tensor coordinates, intersected
/// with the ball: quantising costs at most `(h/2) m Σ_j ‖b_j‖ ≤ ε/12` and
/// pulling the point back into the ball at most as much again. Once the
/// residual is at round-off level the remainder is lifted by least squares.
pub fn telescoping_lift(
    quotient: &SpaceSpec,
    e: &Mat,
    eps: f64,
    max_terms: usize,
    opts: &EvalOptions,
) -> Result<TelescopingLift> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let (x, q) = as_quotient(quotient);
    let p = quotient.p;
    let (m, n) = e.shape();
    if n != q.nrows() {
        return Err(Error::DimensionMismatch {
            expected: q.nrows(),
            got: n,
        });
    }
    let qnode = &quotient.node;
    let norm_q = |t: &Mat| -> Result<f64> { Ok(eval_node(p, qnode, t, opts)?.upper) };
    let quotient_norm = eval_node(p, qnode, e, opts)?;
    let scale = quotient_norm.upper;
    let zero = |lifted: usize, spacing: f64| TelescopingLift {
        point: Mat::zeros(m, x.dim()),
        residual: max_abs(e),
        terms: 0,
        residual_norms: Vec::new(),
        lifted_net_points: lifted,
        spacing,
        norm: NormEstimate::zero(m, x.dim()),
        quotient_norm: quotient_norm.clone(),
        bound: (1.0 + eps / 9.0) / (1.0 - eps / 6.0),
        ratio: 1.0,
    };
    if scale == 0.0 {
        return Ok(zero(0, 0.0));
    }
    let mut basis_norm = 0.0;
    for j in 0..n {
        let mut t = Mat::zeros(1, n);
        t[(0, j)] = 1.0;
        basis_norm += norm_q(&t)?;
    }
    let h = eps / (6.0 * m as f64 * basis_norm);
    let ratio_step = eps / 6.0;
    let mut cache: HashMap<Vec<i64>, Mat> = HashMap::new();
    let mut point = Mat::zeros(m, x.dim());
    // Work with e/‖e‖ so that it lies in the unit ball.
    let target = e / scale;
    let mut residual = target.clone();
    let mut residual_norms = Vec::new();
    let mut coef = 1.0;
    let mut terms = 0;
    let lift_eps = eps / 9.0;
    // Residuals are normed after rescaling by (ε/6)^k, where they have unit size.
    let mut rn = 1.0;
    while terms < max_terms && rn * coef > 1e-14 {
        let scaled = &residual / coef;
        let key: Vec<i64> = scaled.iter().map(|v| (v / h).round() as i64).collect();
        let net_point = match cache.get(&key) {
            Some(g) => g.clone(),
            None => {
                let mut g = Mat::from_iterator(m, n, key.iter().map(|k| *k as f64 * h));
                let gn = norm_q(&g)?;
                if gn > 1.0 {
                    g /= gn;
                }
                cache.insert(key, g.clone());
                g
            }
        };
        let lifted = min_norm_lift(quotient, &net_point, lift_eps, opts)?;
        point += &lifted.point * coef;
        residual -= &net_point * coef;
        // ‖r_{k+1}‖ = (ε/6)^k ‖r̂_k − e_k‖; `rn` becomes the norm of r̂_{k+1}.
        let step = norm_q(&(&scaled - &net_point))?;
        residual_norms.push(step * coef * scale);
        coef *= ratio_step;
        terms += 1;
        rn = step / ratio_step;
    }
    // Round-off remainder.
    point += min_norm_preimage(&residual, &q);
    point *= scale;
    let norm = eval_node(p, &x, &point, opts)?;
    let resid = max_abs(&(&point * q.transpose() - e));
    Ok(TelescopingLift {
        ratio: certified_ratio(norm.upper, quotient_norm.lower),
        point,
        residual: resid,
        terms,
        residual_norms,
        lifted_net_points: cache.len(),
        spacing: h,
        norm,
        quotient_norm: quotient_norm.clone(),
        bound: (1.0 + eps / 9.0) / (1.0 - eps / 6.0),
    })
}

/// `u = op(x*)` for a norming functional `x*` of `x`.
#[derive(Clone, Debug)]
pub struct NormingMap {
    pub operator: OperatorRep,
    /// `‖u‖_p` through trace duality.
    pub norm: NormEstimate,
    pub x_norm: NormEstimate,
    /// `‖(I ⊗ u)x‖`.
    pub image_norm: NormEstimate,
    pub ratio: f64,
}

impl Serialize for NormingMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            matrix: Vec<Vec<f64>>,
            norm: &'a NormEstimate,
            x_norm: &'a NormEstimate,
            image_norm: &'a NormEstimate,
            ratio: f64,
        }
        Out {
            matrix: matrix_json(&self.operator.matrix),
            norm: &self.norm,
            x_norm: &self.x_norm,
            image_norm: &self.image_norm,
            ratio: self.ratio,
        }
        .serialize(s)
    }
}

/// For `x ∈ ℓ^p_m ⊗ S`, the map `u : S → Max(ℓ^{p′}_m)` whose matrix is the
/// certified norming functional `W` of `x`: `‖u‖_p = ‖W‖_{S*} ≤ 1` and
/// `‖(I ⊗ u)x‖ ≥ tr(x Wᵀ) = ‖x‖`.
pub fn norming_functional_map(s: &SpaceSpec, x: &Mat, opts: &EvalOptions) -> Result<NormingMap> {
    let p = s.p;
    let m = x.nrows();
    let x_norm = eval_node(p, &s.node, x, opts)?;
    if x_norm.lower <= 0.0 {
        return Err(Error::Degenerate(
            "tensor has no positive norm certificate".into(),
        ));
    }
    let w = x_norm.witness.clone();
    let codomain = SpaceSpec::max(p, BanachNormSpec::lq(p.conjugate(), m));
    let operator = OperatorRep::new(s.clone(), codomain.clone(), w.clone())?;
    let norm = eval_node(p.conjugate(), &s.node.dual(), &w, opts)?;
    let image_norm = eval_node(p, &codomain.node, &(x * w.transpose()), opts)?;
    let ratio = image_norm.lower / x_norm.upper;
    Ok(NormingMap {
        operator,
        norm,
        x_norm,
        image_norm,
        ratio,
    })
}
