use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{from_rows, to_rows, Mat};
use crate::norm::{BanachNormSpec, FiniteNorm, NormKind};

/// Unit vectors `z_i` (rows of `basis`) with biorthogonal functionals `f_i`
/// (rows of `functionals`) of dual norm one.
#[derive(Clone, Debug)]
pub struct AuerbachBasis {
    pub basis: Mat,
    pub functionals: Mat,
    pub determinant: f64,
    /// `max_i ‖f_i‖_* − 1`.
    pub slack: f64,
}

impl Serialize for AuerbachBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            basis: Vec<Vec<f64>>,
            functionals: Vec<Vec<f64>>,
            determinant: f64,
            slack: f64,
        }
        Out {
            basis: to_rows(&self.basis),
            functionals: to_rows(&self.functionals),
            determinant: self.determinant,
            slack: self.slack,
        }
        .serialize(s)
    }
}

/// Functional norms up to this slack count as one.
const SLACK_TOL: f64 = 1e-9;

/// Auerbach basis of a leaf norm: exact for `ℓ^q` (scaled coordinates),
/// exhaustive over vertex tuples for polytopes, coordinate ascent otherwise.
pub fn auerbach_basis(e: &BanachNormSpec) -> Result<AuerbachBasis> {
    let d = e.dim();
    if let Some(s) = e.scales() {
        let basis = Mat::from_fn(d, d, |i, j| if i == j { 1.0 / s[i] } else { 0.0 });
        let functionals = Mat::from_fn(d, d, |i, j| if i == j { s[i] } else { 0.0 });
        let determinant = s.iter().map(|v| 1.0 / v).product();
        return Ok(AuerbachBasis {
            basis,
            functionals,
            determinant,
            slack: 0.0,
        });
    }
    if let NormKind::Polytope(_) = e.kind() {
        let vertices = e.ball_vertices().expect("polytope");
        return Ok(best_vertex_tuple(e, &vertices));
    }
    auerbach_search(e, 0)
}

/// `|det|` is convex in each row, so its maximum over the product of balls
/// is attained at vertices; the maximiser is Auerbach.
fn best_vertex_tuple<N: FiniteNorm + ?Sized>(norm: &N, vertices: &[Vec<f64>]) -> AuerbachBasis {
    let d = norm.dim();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| vertices[i].clone()).collect();
        let det = from_rows(&rows).determinant().abs();
        if best.as_ref().is_none_or(|(b, _)| det > *b) {
            best = Some((det, idx.clone()));
        }
        // Next d-combination in lexicographic order.
        let n = vertices.len();
        let mut i = d;
        while i > 0 && idx[i - 1] == n - d + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..d {
            idx[j] = idx[j - 1] + 1;
        }
    }
    let (_, idx) = best.expect("vertices");
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| vertices[i].clone()).collect();
    finish(norm, from_rows(&rows))
}

fn finish<N: FiniteNorm + ?Sized>(norm: &N, basis: Mat) -> AuerbachBasis {
    let determinant = basis.determinant();
    let inv = basis.clone().try_inverse().expect("nonsingular basis");
    // ⟨f_i, z_j⟩ = δ_ij: the functionals are the columns of the inverse.
    let functionals = inv.transpose();
    let slack = (0..basis.nrows())
        .map(|i| norm.dual_norm(&functionals.row(i).iter().copied().collect::<Vec<_>>()) - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut b = basis;
    if determinant < 0.0 {
        // Keep a positive orientation; flipping one vector changes nothing else.
        for j in 0..b.ncols() {
            b[(0, j)] = -b[(0, j)];
        }
        let mut f = functionals;
        for j in 0..f.ncols() {
            f[(0, j)] = -f[(0, j)];
        }
        return AuerbachBasis {
            basis: b,
            functionals: f,
            determinant: -determinant,
            slack,
        };
    }
    AuerbachBasis {
        basis: b,
        functionals,
        determinant,
        slack,
    }
}

/// Cofactor coordinate ascent: `det` is linear in each row, `det = ⟨cof_i, z_i⟩`,
/// so replacing `z_i` by a norming element of `cof_i` cannot decrease it; at
/// a fixed point every `f_i = cof_i / det` has dual norm one.
pub fn auerbach_search<N: FiniteNorm + ?Sized>(norm: &N, seed: u64) -> Result<AuerbachBasis> {
    let d = norm.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<AuerbachBasis> = None;
    for start in 0..8 {
        let mut rows: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let v: Vec<f64> = if start == 0 {
                    (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
                } else {
                    (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
                };
                let n = norm.norm(&v);
                v.iter().map(|x| x / n).collect()
            })
            .collect();
        let mut det = from_rows(&rows).determinant().abs();
        if det < 1e-12 {
            continue;
        }
        for _sweep in 0..5000 {
            let before = det;
            for i in 0..d {
                let b = from_rows(&rows);
                let Some(inv) = b.clone().try_inverse() else {
                    break;
                };
                let signed = b.determinant();
                let cof: Vec<f64> = (0..d).map(|j| signed * inv[(j, i)]).collect();
                let z = norm.norming_element(&cof);
                let nz = norm.norm(&z);
                if nz <= 0.0 {
                    continue;
                }
                let z: Vec<f64> = z.iter().map(|v| v / nz).collect();
                let old = std::mem::replace(&mut rows[i], z);
                let new_det = from_rows(&rows).determinant().abs();
                if new_det < det {
                    rows[i] = old;
                } else {
                    det = new_det;
                }
            }
            if det <= before * (1.0 + 1e-15) {
                break;
            }
        }
        let cand = finish(norm, from_rows(&rows));
        if cand.slack <= SLACK_TOL {
            return Ok(cand);
        }
        if best.as_ref().is_none_or(|b| cand.slack < b.slack) {
            best = Some(cand);
        }
    }
    let best = best.ok_or_else(|| Error::Degenerate("no nonsingular starting basis".into()))?;
    Err(Error::AuerbachNotConverged {
        slack: best.slack,
        best: Box::new(best),
    })
}
