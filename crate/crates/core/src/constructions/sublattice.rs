use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::auerbach::{auerbach_search, AuerbachBasis};
use super::discrete::DiscreteLpSpace;
use crate::error::{Error, Result};
use crate::estimate::NormEstimate;
use crate::linalg::{max_abs, rank, to_rows, Mat};
use crate::norm::FiniteNorm;
use crate::operator_norms::{grid_constant, level_m_norm_with, LevelOptions};
use crate::optim::NelderMead;
use crate::tensor::OperatorRep;
use crate::tensor_norms::{eval_node, EvalOptions};

/// `M₀(n, ε) = 2^n ⌈2n²/ε⌉^n`.
pub fn m0(n: usize, eps: f64) -> u128 {
    grid_constant(n, 2.0, 2, eps)
}

/// The discretisation of a subspace `Z ⊂ ℓ^p_N(μ)`: a sublattice `E`
/// spanned by disjointly supported vectors and a positive projection `P`
/// onto it that moves the unit ball of `Z` by little.
#[derive(Clone, Debug)]
pub struct SublatticeResult {
    pub space: DiscreteLpSpace,
    /// Auerbach basis `z_i` of `Z` as rows of an `n × N` matrix.
    pub auerbach: Mat,
    /// `max_i ‖f_i‖_* − 1` for the biorthogonal functionals.
    pub auerbach_slack: f64,
    pub z: Vec<f64>,
    pub z0: Vec<f64>,
    /// `ν = z₀^p μ` on `S` (`p < ∞`), or `μ` restricted to `S` and normalised.
    pub nu: Vec<f64>,
    /// `Jf = j ⊙ f`: `1/z₀` on `S` (`p < ∞`), `1` on `S` (`p = ∞`), `0` off `S`.
    pub j_diag: Vec<f64>,
    pub k: usize,
    /// `u_i = J z_i`, rows of an `n × N` matrix.
    pub u: Mat,
    /// `level_sets[i][s] = j` when `s ∈ B_ij` (zero-based `j`), `None` off `S`.
    pub level_sets: Vec<Vec<Option<usize>>>,
    /// The step functions `v_i`, constant on the `B_ij`.
    pub v: Mat,
    /// Atoms of the algebra generated by the `B_ij`, in order of first occurrence.
    pub cells: Vec<Vec<usize>>,
    /// Disjointly supported basis of `E`, normalised, one row per cell.
    pub basis: Mat,
    pub projection: Mat,
    pub m: usize,
    pub m0: u128,
    pub eps: f64,
}

/// Discretise the span of the rows of `z` (`n × N`, full row rank).
pub fn sublattice_discretize(
    space: &DiscreteLpSpace,
    z: &Mat,
    eps: f64,
) -> Result<SublatticeResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let n = z.nrows();
    let big_n = space.dim();
    if z.ncols() != big_n {
        return Err(Error::DimensionMismatch {
            expected: big_n,
            got: z.ncols(),
        });
    }
    if n == 0 || rank(z, 1e-10) < n {
        return Err(Error::Degenerate("subspace basis is rank deficient".into()));
    }
    let sub = space.subspace(z)?;
    let ab: AuerbachBasis = match auerbach_search(&sub, 0) {
        Ok(a) => a,
        Err(Error::AuerbachNotConverged { best, .. }) => *best,
        Err(e) => return Err(e),
    };
    let zi = &ab.basis * z;
    let ambient = space.norm_spec();
    let zsum: Vec<f64> = (0..big_n)
        .map(|s| (0..n).map(|i| zi[(i, s)].abs()).sum())
        .collect();
    let zn = ambient.norm(&zsum);
    let z0: Vec<f64> = zsum.iter().map(|v| v / zn).collect();
    let support: Vec<bool> = zsum.iter().map(|v| *v != 0.0).collect();
    let inf = space.p.is_infinite();
    let nu: Vec<f64> = if inf {
        let total: f64 = (0..big_n)
            .filter(|&s| support[s])
            .map(|s| space.weights[s])
            .sum();
        (0..big_n)
            .map(|s| {
                if support[s] {
                    space.weights[s] / total
                } else {
                    0.0
                }
            })
            .collect()
    } else {
        let p = space.p.value();
        (0..big_n)
            .map(|s| {
                if support[s] {
                    z0[s].powf(p) * space.weights[s]
                } else {
                    0.0
                }
            })
            .collect()
    };
    let j_diag: Vec<f64> = (0..big_n)
        .map(|s| match (support[s], inf) {
            (false, _) => 0.0,
            (true, true) => 1.0,
            (true, false) => 1.0 / z0[s],
        })
        .collect();
    let u = Mat::from_fn(n, big_n, |i, s| zi[(i, s)] * j_diag[s]);

    let k = crate::operator_norms::ceil_tolerant(2.0 * (n * n) as f64 / eps) as usize;
    let nf = n as f64;
    let width = 2.0 * nf / k as f64;
    // A_j = [−n + jw, −n + (j+1)w) for j < k − 1, and the last cell closed;
    // values a rounding error outside [−n, n] go to the end cells.
    let cell_of = |x: f64| -> usize { (((x + nf) / width).floor().max(0.0) as usize).min(k - 1) };
    let level_sets: Vec<Vec<Option<usize>>> = (0..n)
        .map(|i| {
            (0..big_n)
                .map(|s| support[s].then(|| cell_of(u[(i, s)])))
                .collect()
        })
        .collect();
    let v = Mat::from_fn(n, big_n, |i, s| match level_sets[i][s] {
        Some(j) => nf * (-1.0 + (2 * j + 1) as f64 / k as f64),
        None => 0.0,
    });

    let mut keys: Vec<Vec<usize>> = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for s in (0..big_n).filter(|&s| support[s]) {
        let key: Vec<usize> = (0..n).map(|i| level_sets[i][s].expect("on S")).collect();
        match keys.iter().position(|kk| *kk == key) {
            Some(c) => cells[c].push(s),
            None => {
                keys.push(key);
                cells.push(vec![s]);
            }
        }
    }
    let m = cells.len();
    let mut basis = Mat::zeros(m, big_n);
    let mut projection = Mat::zeros(big_n, big_n);
    for (c, cell) in cells.iter().enumerate() {
        let mass: f64 = cell.iter().map(|&t| nu[t]).sum();
        // P = J⁻¹QJR: within a cell, (Pf)(s) = (1/j_s) Σ_t ν_t j_t f_t / ν(c).
        for &s in cell {
            for &t in cell {
                projection[(s, t)] = nu[t] * j_diag[t] / (j_diag[s] * mass);
            }
        }
        let row: Vec<f64> = (0..big_n)
            .map(|s| {
                if cell.contains(&s) {
                    1.0 / j_diag[s]
                } else {
                    0.0
                }
            })
            .collect();
        let rn = ambient.norm(&row);
        for s in 0..big_n {
            basis[(c, s)] = row[s] / rn;
        }
    }
    Ok(SublatticeResult {
        space: space.clone(),
        auerbach: zi,
        auerbach_slack: ab.slack,
        z: zsum,
        z0,
        nu,
        j_diag,
        k,
        u,
        level_sets,
        v,
        cells,
        basis,
        projection,
        m,
        m0: m0(n, eps),
        eps,
    })
}

impl SublatticeResult {
    /// `max |P² − P|`.
    pub fn idempotence_error(&self) -> f64 {
        max_abs(&(&self.projection * &self.projection - &self.projection))
    }

    pub fn min_entry(&self) -> f64 {
        self.projection
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `‖P‖` on `ℓ^p_N(μ)`. `P` is a sum of rank-one blocks `a_c ⊗ b_c` on
    /// disjoint cells, so its norm is `max_c ‖a_c‖ ‖b_c‖_*`.
    pub fn contraction_norm(&self) -> f64 {
        let ambient = self.space.norm_spec();
        let big_n = self.space.dim();
        self.cells
            .iter()
            .map(|cell| {
                let t0 = cell[0];
                // Column t0 restricted to the cell is a multiple of a_c, row t0 of b_c.
                let a: Vec<f64> = (0..big_n)
                    .map(|s| {
                        if cell.contains(&s) {
                            self.projection[(s, t0)]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let b: Vec<f64> = (0..big_n)
                    .map(|t| {
                        if cell.contains(&t) {
                            self.projection[(t0, t)]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let scale = self.projection[(t0, t0)];
                ambient.norm(&a) * ambient.dual_norm(&b) / scale
            })
            .fold(0.0, f64::max)
    }

    /// `‖(I − P)z‖` for `z ∈ ℓ^p_N(μ)`.
    pub fn deviation(&self, z: &[f64]) -> f64 {
        let pz = &self.projection * nalgebra::DVector::from_column_slice(z);
        let diff: Vec<f64> = z.iter().zip(pz.iter()).map(|(a, b)| a - b).collect();
        self.space.norm_spec().norm(&diff)
    }

    /// Certified bound for `sup ‖(I − P)z‖` over the unit ball of `Z`: the
    /// coefficients of a unit vector in the Auerbach basis are bounded by
    /// `1 + slack`, and the deviation is convex in them, so the cube vertices
    /// decide.
    pub fn deviation_bound(&self) -> f64 {
        let n = self.auerbach.nrows();
        let big_n = self.space.dim();
        let mut worst: f64 = 0.0;
        for mask in 0..1usize << n {
            let z: Vec<f64> = (0..big_n)
                .map(|s| {
                    (0..n)
                        .map(
                            |i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 } * self.auerbach[(i, s)],
                        )
                        .sum()
                })
                .collect();
            worst = worst.max(self.deviation(&z));
        }
        worst * (1.0 + self.auerbach_slack.max(0.0))
    }

    /// `max_s |u_i(s) − v_i(s)|`, at most `n/k`.
    pub fn step_error(&self) -> f64 {
        max_abs(&(&self.u - &self.v))
    }
}

impl Serialize for SublatticeResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a> {
            m: usize,
            m0: String,
            k: usize,
            eps: f64,
            cells: &'a [Vec<usize>],
            basis: Vec<Vec<f64>>,
            projection: Vec<Vec<f64>>,
            auerbach: Vec<Vec<f64>>,
            auerbach_slack: f64,
            z: &'a [f64],
            z0: &'a [f64],
            nu: &'a [f64],
            j_diag: &'a [f64],
            level_sets: &'a [Vec<Option<usize>>],
            step_functions: Vec<Vec<f64>>,
            idempotence_error: f64,
            min_entry: f64,
            contraction_norm: f64,
            deviation_bound: f64,
        }
        Out {
            m: self.m,
            m0: self.m0.to_string(),
            k: self.k,
            eps: self.eps,
            cells: &self.cells,
            basis: to_rows(&self.basis),
            projection: to_rows(&self.projection),
            auerbach: to_rows(&self.auerbach),
            auerbach_slack: self.auerbach_slack,
            z: &self.z,
            z0: &self.z0,
            nu: &self.nu,
            j_diag: &self.j_diag,
            level_sets: &self.level_sets,
            step_functions: to_rows(&self.v),
            idempotence_error: self.idempotence_error(),
            min_entry: self.min_entry(),
            contraction_norm: self.contraction_norm(),
            deviation_bound: self.deviation_bound(),
        }
        .serialize(s)
    }
}

/// Both sides of `‖I_Z ⊗ u‖ = ‖I_{ℓ^p_K} ⊗ u‖` for a sublattice `Z ⊂ ℓ^p_N`.
#[derive(Clone, Debug, Serialize)]
pub struct TransferReport {
    pub k: usize,
    pub n: usize,
    /// Certified lower bound for the sup over `ball(Z ⊗ X)`, by direct search.
    pub lhs_lower: f64,
    /// `‖I_{ℓ^p_N} ⊗ u‖` from above, which dominates the left side.
    pub lhs_upper: f64,
    pub rhs: NormEstimate,
    /// `|lhs_lower − rhs.lower|`.
    pub gap: f64,
    /// The two intervals intersect.
    pub consistent: bool,
}

const TRANSFER_STARTS: usize = 4;

/// `z` is `K × N` with disjointly supported rows of constant sign in
/// `ℓ^p_N`, `p` the exponent of `u`.
pub fn sublattice_transfer_check(
    z: &Mat,
    u: &OperatorRep,
    opts: &LevelOptions,
) -> Result<TransferReport> {
    let (kk, big_n) = (z.nrows(), z.ncols());
    for s in 0..big_n {
        if (0..kk).filter(|&c| z[(c, s)] != 0.0).count() > 1 {
            return Err(Error::InvalidArgument(
                "sublattice rows must be disjointly supported".into(),
            ));
        }
    }
    for c in 0..kk {
        let row: Vec<f64> = (0..big_n)
            .map(|s| z[(c, s)])
            .filter(|v| *v != 0.0)
            .collect();
        if row.is_empty() || !(row.iter().all(|v| *v > 0.0) || row.iter().all(|v| *v < 0.0)) {
            return Err(Error::InvalidArgument(
                "each sublattice row must be nonzero of constant sign".into(),
            ));
        }
    }
    let p = u.domain.p;
    let d1 = u.domain.dim();
    let x = &u.domain.node;
    let y = &u.codomain.node;
    let loose = EvalOptions {
        tol: 1e-6,
        ..opts.eval
    };
    let ratio = |xc: &Mat, ev: &EvalOptions| -> Result<(f64, NormEstimate)> {
        let e = z.transpose() * xc;
        let ex = eval_node(p, x, &e, ev)?;
        if ex.upper <= 0.0 {
            return Ok((0.0, ex));
        }
        let ey = eval_node(p, y, &(&e * u.matrix.transpose()), ev)?;
        Ok((ey.lower / ex.upper, ex))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let nm = NelderMead {
        max_evals: 800,
        ftol: 1e-12,
        initial_step: 0.3,
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut failure: Option<Error> = None;
    for _ in 0..TRANSFER_STARTS {
        let x0: Vec<f64> = (0..kk * d1)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let (arg, val) = nm.minimize(
            |v| {
                let xc = Mat::from_row_slice(kk, d1, v);
                match ratio(&xc, &loose) {
                    Ok((r, _)) => -r,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            },
            &x0,
        );
        if best.as_ref().is_none_or(|(b, _)| -val > *b) {
            best = Some((-val, arg));
        }
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let (_, arg) = best.expect("starts");
    let (lhs_lower, _) = ratio(&Mat::from_row_slice(kk, d1, &arg), &opts.eval)?;
    let rhs = level_m_norm_with(u, kk, opts)?;
    let lhs_upper = if big_n == kk {
        rhs.upper
    } else {
        level_m_norm_with(u, big_n, opts)?.upper
    };
    let gap = (lhs_lower - rhs.lower).abs();
    let consistent = lhs_lower <= rhs.upper + 1e-9 * rhs.upper.max(1.0)
        && rhs.lower <= lhs_upper + 1e-9 * lhs_upper.max(1.0);
    Ok(TransferReport {
        k: kk,
        n: big_n,
        lhs_lower,
        lhs_upper,
        rhs,
        gap,
        consistent,
    })
}

#[cfg(test)]
mod tests;
