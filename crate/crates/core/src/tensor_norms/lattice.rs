use crate::error::{Error, Result};
use crate::estimate::NormEstimate;
use crate::exponent::PExponent;
use crate::linalg::{col_vec, Mat};
use crate::norm::{BanachNormSpec, FiniteNorm};

/// Coordinatewise `s_j = (Σ_i |t_ij|^p)^{1/p}`, measured in `L`.
pub fn lattice_norm(p: PExponent, l: &BanachNormSpec, t: &Mat) -> Result<f64> {
    Ok(lattice_estimate(p, l, t)?.upper)
}

/// The lattice value with a norming dual tensor in the dual lattice.
pub fn lattice_estimate(p: PExponent, l: &BanachNormSpec, t: &Mat) -> Result<NormEstimate> {
    l.check_dim(t.ncols())?;
    if !l.is_lattice_norm() {
        return Err(Error::InvalidSpace(
            "lattice base must be an lq or weighted_lq norm".into(),
        ));
    }
    let (m, d) = t.shape();
    let cols: Vec<Vec<f64>> = (0..d).map(|j| col_vec(t, j)).collect();
    let s: Vec<f64> = cols.iter().map(|c| p.norm(c)).collect();
    let value = l.norm(&s);
    let g = l.norming_functional(&s);
    let mut w = Mat::zeros(m, d);
    for j in 0..d {
        let h = p.norming_functional(&cols[j]);
        for i in 0..m {
            w[(i, j)] = g[j].abs() * h[i];
        }
    }
    Ok(NormEstimate::exact(value, w))
}
