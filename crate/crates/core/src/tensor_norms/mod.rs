//! Level-m norms of every node kind, with certified intervals.

mod coset;
mod injective;
mod lattice;
mod projective;

pub use coset::{minimize_on_coset, CosetMin};
pub use injective::{injective_norm, injective_norm_with};
pub use lattice::{lattice_estimate, lattice_norm};
pub use projective::{
    closed_form, decomposition_search, decomposition_sum, decomposition_value, projective_norm,
    projective_norm_with,
};

use crate::bilinear::BranchOptions;
use crate::error::{Error, Result};
use crate::estimate::{NormEstimate, UpperCertificate};
use crate::exponent::PExponent;
use crate::linalg::{pinv, Mat};
use crate::space::{Node, SpaceSpec};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    /// Relative gap at which an interval is declared converged.
    pub tol: f64,
    /// Column-generation rounds for projective norms.
    pub max_iter: usize,
    pub branch: BranchOptions,
    /// Relative gap for coset minimisation (quotients, extensions, lifts).
    pub coset_tol: f64,
    pub coset_iter: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 300,
            branch: BranchOptions::default(),
            coset_tol: 1e-8,
            coset_iter: 400,
        }
    }
}

impl EvalOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            coset_tol: tol.max(1e-10),
            ..Self::default()
        }
    }
}

pub fn multinorm_eval(space: &SpaceSpec, e: &Tensor) -> Result<NormEstimate> {
    eval_with(space, e.entries(), &EvalOptions::default())
}

pub fn eval(space: &SpaceSpec, t: &Mat) -> Result<NormEstimate> {
    eval_with(space, t, &EvalOptions::default())
}

pub fn eval_with(space: &SpaceSpec, t: &Mat, opts: &EvalOptions) -> Result<NormEstimate> {
    eval_node(space.p, &space.node, t, opts)
}

pub fn eval_node(p: PExponent, node: &Node, t: &Mat, opts: &EvalOptions) -> Result<NormEstimate> {
    if t.ncols() != node.dim() {
        return Err(Error::DimensionMismatch {
            expected: node.dim(),
            got: t.ncols(),
        });
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "tensor has non-finite entries".into(),
        ));
    }
    let (m, d) = t.shape();
    if m == 0 || t.iter().all(|v| *v == 0.0) {
        return Ok(NormEstimate::zero(m, d));
    }
    match node {
        Node::Min(e) => injective_norm_with(p, e, t, opts),
        Node::Max(e) => projective_norm_with(p, e, t, opts),
        Node::Lattice(e) => lattice_estimate(p, e, t),
        Node::Dual(inner) => eval_node(p, &inner.normalized().dual(), t, opts),
        Node::SumInf(parts) | Node::Sum1(parts) => {
            let sup = matches!(node, Node::SumInf(_));
            let mut offset = 0;
            let mut lower = 0.0_f64;
            let mut upper = 0.0_f64;
            let mut witness = Mat::zeros(m, d);
            let mut best_lower = -1.0;
            let mut exact = true;
            let mut converged = true;
            for part in parts {
                let k = part.dim();
                let block = t.columns(offset, k).into_owned();
                let est = eval_node(p, part, &block, opts)?;
                exact &= matches!(est.upper_certificate, UpperCertificate::Exact);
                converged &= est.converged;
                if sup {
                    upper = upper.max(est.upper);
                    if est.lower > best_lower {
                        best_lower = est.lower;
                        lower = est.lower;
                        witness = Mat::zeros(m, d);
                        witness.columns_mut(offset, k).copy_from(&est.witness);
                    }
                } else {
                    upper += est.upper;
                    lower += est.lower;
                    witness.columns_mut(offset, k).copy_from(&est.witness);
                }
                offset += k;
            }
            let upper_certificate = if exact {
                UpperCertificate::Exact
            } else {
                UpperCertificate::Bound(if sup {
                    "max of component bounds".into()
                } else {
                    "sum of component bounds".into()
                })
            };
            Ok(NormEstimate {
                lower,
                upper,
                witness,
                upper_certificate,
                tolerance: opts.tol,
                converged,
            })
        }
        Node::Subspace { parent, basis } => {
            let pushed = t * basis;
            let est = eval_node(p, parent, &pushed, opts)?;
            let upper_certificate = match est.upper_certificate {
                UpperCertificate::PrimalPoint(x) => UpperCertificate::PrimalPoint(x),
                other => other,
            };
            Ok(NormEstimate {
                witness: &est.witness * basis.transpose(),
                upper_certificate,
                ..est
            })
        }
        Node::Quotient { parent, map } => {
            let gram_inv = pinv(&(map * map.transpose()));
            let x0 = t * &gram_inv * map;
            let kernel = crate::linalg::null_space(map);
            let res = minimize_on_coset(p, parent, &x0, &kernel, opts)?;
            let witness = &res.annihilator_witness * map.transpose() * gram_inv;
            Ok(NormEstimate {
                lower: res.lower,
                upper: res.upper,
                witness,
                upper_certificate: UpperCertificate::PrimalPoint(res.point),
                tolerance: opts.coset_tol,
                converged: res.converged,
            })
        }
    }
}
