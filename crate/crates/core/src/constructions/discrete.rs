use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linalg::{dot, Mat};
use crate::lp::{LinearProgram, Sense, VarBound};
use crate::norm::{BanachNormSpec, FiniteNorm};

/// `ℓ^p_N(μ)` for an atomic measure with positive masses `weights`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLpSpace {
    pub p: PExponent,
    pub weights: Vec<f64>,
}

impl DiscreteLpSpace {
    pub fn new(p: PExponent, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument(
                "measure weights must be positive and finite".into(),
            ));
        }
        Ok(Self { p, weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn norm_spec(&self) -> BanachNormSpec {
        if self.p.is_infinite() {
            BanachNormSpec::lq(PExponent::INF, self.dim())
        } else {
            BanachNormSpec::weighted(self.p, self.weights.clone()).expect("positive weights")
        }
    }

    /// The subspace spanned by the rows of `basis`, in coefficient coordinates.
    pub fn subspace(&self, basis: &Mat) -> Result<SubspaceNorm> {
        SubspaceNorm::new(self.clone(), basis.clone())
    }
}

/// `‖c‖ = ‖Zᵀc‖_{p,μ}` for a `d × N` matrix `Z` of full row rank.
#[derive(Clone, Debug)]
pub struct SubspaceNorm {
    space: DiscreteLpSpace,
    basis: Mat,
    ambient: BanachNormSpec,
    gram_inv: Mat,
}

impl SubspaceNorm {
    pub fn new(space: DiscreteLpSpace, basis: Mat) -> Result<Self> {
        if basis.ncols() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                got: basis.ncols(),
            });
        }
        let mu = if space.p.is_infinite() {
            vec![1.0; space.dim()]
        } else {
            space.weights.clone()
        };
        let gram =
            &basis * Mat::from_diagonal(&nalgebra::DVector::from_vec(mu)) * basis.transpose();
        let gram_inv = gram
            .clone()
            .try_inverse()
            .filter(|_| crate::linalg::rank(&basis, 1e-12) == basis.nrows())
            .ok_or_else(|| {
                Error::Degenerate("subspace basis is not linearly independent".into())
            })?;
        let ambient = space.norm_spec();
        Ok(Self {
            space,
            basis,
            ambient,
            gram_inv,
        })
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn space(&self) -> &DiscreteLpSpace {
        &self.space
    }

    /// `Zᵀc`.
    pub fn lift(&self, c: &[f64]) -> Vec<f64> {
        (0..self.basis.ncols())
            .map(|t| (0..c.len()).map(|i| c[i] * self.basis[(i, t)]).sum())
            .collect()
    }

    /// Certified `(lower, upper)` for `‖g‖_*` with a unit-norm maximiser.
    pub fn dual_bounds(&self, g: &[f64]) -> (f64, f64, Vec<f64>) {
        let d = self.basis.nrows();
        if g.iter().all(|v| *v == 0.0) {
            return (0.0, 0.0, vec![0.0; d]);
        }
        let p = self.space.p;
        if p.is_two() {
            let v = &self.gram_inv * nalgebra::DVector::from_column_slice(g);
            let s = dot(g, v.as_slice()).max(0.0).sqrt();
            let c: Vec<f64> = v.iter().map(|x| x / s).collect();
            return (s, s, c);
        }
        if p.is_one() || p.is_infinite() {
            return self.dual_lp(g);
        }
        self.dual_newton(g)
    }

    /// `max ⟨g, c⟩` over `‖Zᵀc‖ ≤ 1`, with auxiliary `u_t ≥ |y_t|` when `p = 1`.
    fn dual_lp(&self, g: &[f64]) -> (f64, f64, Vec<f64>) {
        let d = self.basis.nrows();
        let n = self.basis.ncols();
        let one = self.space.p.is_one();
        let nv = if one { d + n } else { d };
        let mut obj = vec![0.0; nv];
        for i in 0..d {
            obj[i] = -g[i];
        }
        let mut lp = LinearProgram::new(obj);
        for i in 0..d {
            lp.set_bound(i, VarBound::Free);
        }
        for t in 0..n {
            let mut row = vec![0.0; nv];
            for i in 0..d {
                row[i] = self.basis[(i, t)];
            }
            if one {
                row[d + t] = -1.0;
                lp.add_row(row.clone(), Sense::Le, 0.0);
                for v in row.iter_mut().take(d) {
                    *v = -*v;
                }
                lp.add_row(row, Sense::Le, 0.0);
            } else {
                lp.add_row(row.clone(), Sense::Le, 1.0);
                lp.add_row(row, Sense::Ge, -1.0);
            }
        }
        if one {
            let mut row = vec![0.0; nv];
            row[d..].copy_from_slice(&self.space.weights);
            lp.add_row(row, Sense::Le, 1.0);
        }
        let sol = lp.solve().expect("bounded feasible LP");
        let mut c = sol.x[..d].to_vec();
        let nc = self.norm(&c);
        if nc > 1.0 {
            c.iter_mut().for_each(|v| *v /= nc);
        }
        let value = dot(g, &c);
        let h = self.min_dual_preimage(g);
        (value, self.dual_preimage_bound(g, &h).max(value), c)
    }

    /// `min ‖h‖_*` over `Zh = g`: `‖h‖₁` when `p = ∞`, `max_t |h_t|/μ_t` when `p = 1`.
    fn min_dual_preimage(&self, g: &[f64]) -> Vec<f64> {
        let d = self.basis.nrows();
        let n = self.basis.ncols();
        let one = self.space.p.is_one();
        // Variables h (free, n) then either u (n, ≥ |h|) or s (1, ≥ |h_t|/μ_t).
        let nv = if one { n + 1 } else { 2 * n };
        let mut obj = vec![0.0; nv];
        if one {
            obj[n] = 1.0;
        } else {
            obj[n..].iter_mut().for_each(|v| *v = 1.0);
        }
        let mut lp = LinearProgram::new(obj);
        for t in 0..n {
            lp.set_bound(t, VarBound::Free);
        }
        for i in 0..d {
            let mut row = vec![0.0; nv];
            for t in 0..n {
                row[t] = self.basis[(i, t)];
            }
            lp.add_row(row, Sense::Eq, g[i]);
        }
        for t in 0..n {
            for sign in [1.0, -1.0] {
                let mut row = vec![0.0; nv];
                row[t] = sign;
                if one {
                    row[n] = -self.space.weights[t];
                } else {
                    row[n + t] = -1.0;
                }
                lp.add_row(row, Sense::Le, 0.0);
            }
        }
        lp.solve().expect("feasible LP").x[..n].to_vec()
    }

    /// Newton on `ψ(c) = ‖Zᵀc‖^p/p − ⟨g, c⟩`; at the minimiser `c*` the
    /// normalised point attains `‖g‖_* = ‖Zᵀc*‖^{p−1}`.
    fn dual_newton(&self, g: &[f64]) -> (f64, f64, Vec<f64>) {
        let d = self.basis.nrows();
        let p = self.space.p.value();
        let mu = &self.space.weights;
        let psi = |c: &[f64]| -> f64 { self.norm(c).powf(p) / p - dot(g, c) };
        let grad_h = |y: &[f64]| -> Vec<f64> {
            y.iter()
                .zip(mu)
                .map(|(v, m)| m * v.abs().powf(p - 1.0) * v.signum())
                .collect()
        };
        // Start from the Euclidean maximiser, scaled to the stationary radius.
        let v = &self.gram_inv * nalgebra::DVector::from_column_slice(g);
        let mut c: Vec<f64> = v.iter().copied().collect();
        let r = self.norm(&c);
        let target = dot(g, &c) / r;
        let scale = target.abs().powf(1.0 / (p - 1.0)) / r;
        c.iter_mut().for_each(|x| *x *= scale);
        for _ in 0..200 {
            let y = self.lift(&c);
            let h = grad_h(&y);
            let grad: Vec<f64> = (0..d)
                .map(|i| dot(&self.basis.row(i).iter().copied().collect::<Vec<_>>(), &h) - g[i])
                .collect();
            let gn = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn <= 1e-15 * g.iter().map(|v| v.abs()).fold(0.0, f64::max) {
                break;
            }
            let ymax = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let floor = 1e-9 * ymax;
            let curv: Vec<f64> = y
                .iter()
                .zip(mu)
                .map(|(v, m)| (p - 1.0) * m * v.abs().max(floor).powf(p - 2.0))
                .collect();
            let hess = Mat::from_fn(d, d, |i, j| {
                (0..y.len())
                    .map(|t| self.basis[(i, t)] * curv[t] * self.basis[(j, t)])
                    .sum()
            });
            let step = hess
                .lu()
                .solve(&nalgebra::DVector::from_vec(grad.clone()))
                .map(|s| s.iter().copied().collect::<Vec<_>>())
                .unwrap_or(grad.clone());
            let f0 = psi(&c);
            let slope = -dot(&grad, &step);
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-12 {
                let cand: Vec<f64> = c.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                if psi(&cand) <= f0 + 1e-4 * t * slope {
                    c = cand;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let nc = self.norm(&c);
        let x: Vec<f64> = c.iter().map(|v| v / nc).collect();
        let lower = dot(g, &x);
        let h = grad_h(&self.lift(&c));
        (lower, self.dual_preimage_bound(g, &h).max(lower), x)
    }

    /// Any `h` with `Zh = g` has `‖g‖_* ≤ ‖h‖_*`; `h0` is first corrected by
    /// the least-squares solution of the residual equation.
    fn dual_preimage_bound(&self, g: &[f64], h0: &[f64]) -> f64 {
        let d = self.basis.nrows();
        let res: Vec<f64> = (0..d)
            .map(|i| {
                g[i] - (0..h0.len())
                    .map(|t| self.basis[(i, t)] * h0[t])
                    .sum::<f64>()
            })
            .collect();
        let zz = &self.basis * self.basis.transpose();
        let lam = zz
            .lu()
            .solve(&nalgebra::DVector::from_vec(res))
            .expect("full row rank");
        let h: Vec<f64> = (0..h0.len())
            .map(|t| h0[t] + (0..d).map(|i| self.basis[(i, t)] * lam[i]).sum::<f64>())
            .collect();
        self.ambient.dual_norm(&h)
    }
}

impl FiniteNorm for SubspaceNorm {
    fn dim(&self) -> usize {
        self.basis.nrows()
    }

    fn norm(&self, c: &[f64]) -> f64 {
        self.ambient.norm(&self.lift(c))
    }

    /// Certified upper bound, equal to the dual norm up to solver round-off.
    fn dual_norm(&self, g: &[f64]) -> f64 {
        self.dual_bounds(g).1
    }

    fn norming_element(&self, g: &[f64]) -> Vec<f64> {
        self.dual_bounds(g).2
    }
}
