use crate::bilinear::{bilinear_max_with, Method};
use crate::error::Result;
use crate::estimate::{NormEstimate, UpperCertificate};
use crate::exponent::PExponent;
use crate::linalg::{outer, pairing, Mat};
use crate::norm::BanachNormSpec;

use super::EvalOptions;

/// `ε(e) = ‖op(e): ℓ^{p′}_m → E‖`, maximised over `ball(ℓ^{p′}_m) × ball(E*)`.
pub fn injective_norm(p: PExponent, e_norm: &BanachNormSpec, t: &Mat) -> Result<NormEstimate> {
    injective_norm_with(p, e_norm, t, &EvalOptions::default())
}

pub fn injective_norm_with(
    p: PExponent,
    e_norm: &BanachNormSpec,
    t: &Mat,
    opts: &EvalOptions,
) -> Result<NormEstimate> {
    e_norm.check_dim(t.ncols())?;
    let left = BanachNormSpec::lq(p.conjugate(), t.nrows());
    let right = e_norm.dual();
    let r = bilinear_max_with(t, &left, &right, opts.branch);
    let witness = outer(&r.a, &r.x);
    let attained = pairing(&witness, t);
    let upper_certificate = match r.method {
        Method::Branch => UpperCertificate::BranchAndBound {
            boxes: r.open_boxes,
        },
        _ => UpperCertificate::Exact,
    };
    let upper = r.upper.max(attained);
    Ok(NormEstimate {
        lower: attained,
        upper,
        witness,
        converged: upper - attained <= opts.tol * upper.max(1e-300) || upper == 0.0,
        upper_certificate,
        tolerance: opts.tol,
    })
}
