//! Certified maximisation of `aᵀ W x` over a product of two unit balls.
//!
//! This single primitive is the injective norm, the pricing step of the
//! projective norm and the Banach operator norm between leaf norms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::linalg::Mat;
use crate::norm::{BanachNormSpec, FiniteNorm, MAX_VERTEX_PAIRS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Zero,
    Vertices,
    Singular,
    Branch,
}

#[derive(Clone, Debug)]
pub struct BilinearMax {
    pub lower: f64,
    pub upper: f64,
    /// Maximiser on the left ball (`dim = W.nrows()`).
    pub a: Vec<f64>,
    /// Maximiser on the right ball (`dim = W.ncols()`).
    pub x: Vec<f64>,
    pub method: Method,
    pub open_boxes: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct BranchOptions {
    pub rel_tol: f64,
    pub max_boxes: usize,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_boxes: 200_000,
        }
    }
}

/// `max { aᵀ W x : ‖a‖_left ≤ 1, ‖x‖_right ≤ 1 }`.
pub fn bilinear_max(w: &Mat, left: &BanachNormSpec, right: &BanachNormSpec) -> BilinearMax {
    bilinear_max_with(w, left, right, BranchOptions::default())
}

pub fn bilinear_max_with(
    w: &Mat,
    left: &BanachNormSpec,
    right: &BanachNormSpec,
    opts: BranchOptions,
) -> BilinearMax {
    let (m, d) = w.shape();
    debug_assert_eq!(m, left.dim());
    debug_assert_eq!(d, right.dim());
    if w.iter().all(|v| *v == 0.0) {
        return BilinearMax {
            lower: 0.0,
            upper: 0.0,
            a: vec![0.0; m],
            x: vec![0.0; d],
            method: Method::Zero,
            open_boxes: 0,
        };
    }
    let lv = left.vertex_count().filter(|&c| c <= MAX_VERTEX_PAIRS);
    let rv = right.vertex_count().filter(|&c| c <= MAX_VERTEX_PAIRS);
    match (lv, rv) {
        (Some(a), Some(b)) if a <= b => return via_left_vertices(w, left, right),
        (Some(_), Some(_)) => return via_right_vertices(w, left, right),
        (Some(_), None) => return via_left_vertices(w, left, right),
        (None, Some(_)) => return via_right_vertices(w, left, right),
        _ => {}
    }
    if let (Some(sl), Some(sr)) = (left.euclidean_scales(), right.euclidean_scales()) {
        let scaled = Mat::from_fn(m, d, |i, j| w[(i, j)] / (sl[i] * sr[j]));
        let svd = scaled.svd(true, true);
        let (k, &sigma) = svd
            .singular_values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let u = svd.u.expect("u");
        let vt = svd.v_t.expect("v_t");
        let a: Vec<f64> = (0..m).map(|i| u[(i, k)] / sl[i]).collect();
        let x: Vec<f64> = (0..d).map(|j| vt[(k, j)] / sr[j]).collect();
        let val = pair(w, &a, &x).abs();
        let a = if pair(w, &a, &x) < 0.0 {
            a.iter().map(|v| -v).collect()
        } else {
            a
        };
        return BilinearMax {
            lower: val.min(sigma),
            upper: sigma.max(val),
            a,
            x,
            method: Method::Singular,
            open_boxes: 0,
        };
    }
    if d <= m {
        branch(w, left, right, opts)
    } else {
        let wt = w.transpose();
        let r = branch(&wt, right, left, opts);
        BilinearMax {
            a: r.x,
            x: r.a,
            ..r
        }
    }
}

fn pair(w: &Mat, a: &[f64], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in 0..x.len() {
            s += a[i] * w[(i, j)] * x[j];
        }
    }
    s
}

fn mat_vec(w: &Mat, x: &[f64]) -> Vec<f64> {
    (0..w.nrows())
        .map(|i| (0..w.ncols()).map(|j| w[(i, j)] * x[j]).sum())
        .collect()
}

fn mat_t_vec(w: &Mat, a: &[f64]) -> Vec<f64> {
    (0..w.ncols())
        .map(|j| (0..w.nrows()).map(|i| w[(i, j)] * a[i]).sum())
        .collect()
}

fn via_left_vertices(w: &Mat, left: &BanachNormSpec, right: &BanachNormSpec) -> BilinearMax {
    let verts = left.ball_vertices().expect("vertex count checked");
    let mut best = (-1.0, Vec::new());
    for v in verts {
        let val = right.dual_norm(&mat_t_vec(w, &v));
        if val > best.0 {
            best = (val, v);
        }
    }
    let a = best.1;
    let x = right.norming_element(&mat_t_vec(w, &a));
    let attained = pair(w, &a, &x);
    BilinearMax {
        lower: attained.min(best.0),
        upper: best.0.max(attained),
        a,
        x,
        method: Method::Vertices,
        open_boxes: 0,
    }
}

fn via_right_vertices(w: &Mat, left: &BanachNormSpec, right: &BanachNormSpec) -> BilinearMax {
    let verts = right.ball_vertices().expect("vertex count checked");
    let mut best = (-1.0, Vec::new());
    for v in verts {
        let val = left.dual_norm(&mat_vec(w, &v));
        if val > best.0 {
            best = (val, v);
        }
    }
    let x = best.1;
    let a = left.norming_element(&mat_vec(w, &x));
    let attained = pair(w, &a, &x);
    BilinearMax {
        lower: attained.min(best.0),
        upper: best.0.max(attained),
        a,
        x,
        method: Method::Vertices,
        open_boxes: 0,
    }
}

/// Alternating maximisation from `x`; returns `(value, a, x)` with both in their balls.
pub fn alternating_ascent(
    w: &Mat,
    left: &BanachNormSpec,
    right: &BanachNormSpec,
    x0: &[f64],
    iters: usize,
) -> (f64, Vec<f64>, Vec<f64>) {
    let nx = right.norm(x0);
    let mut x: Vec<f64> = if nx > 0.0 {
        x0.iter().map(|v| v / nx).collect()
    } else {
        x0.to_vec()
    };
    let mut a = left.norming_element(&mat_vec(w, &x));
    let mut val = pair(w, &a, &x);
    for _ in 0..iters {
        let x_new = right.norming_element(&mat_t_vec(w, &a));
        let a_new = left.norming_element(&mat_vec(w, &x_new));
        let v = pair(w, &a_new, &x_new);
        let improved = v > val * (1.0 + 1e-15);
        if v >= val {
            x = x_new;
            a = a_new;
            val = v;
        }
        if !improved {
            break;
        }
    }
    (val, a, x)
}

struct Cell {
    bound: f64,
    face: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.bound == o.bound
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.bound.total_cmp(&o.bound)
    }
}

fn lift(face: usize, c: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(c.len() + 1);
    v.extend_from_slice(&c[..face]);
    v.push(1.0);
    v.extend_from_slice(&c[face..]);
    v
}

/// Maximise `‖W x‖_{left*}` over the sphere of `right`, parametrised by the
/// `+` faces of the cube (the objective is even). On a box of a face, with
/// `g` a norming functional at the box centre, `‖c‖ ≥ ⟨g, c⟩`, so the
/// quasi-convex ratio `‖W c‖_* / ⟨g, c⟩` evaluated at the box corners
/// bounds the objective on the whole box.
fn branch(
    w: &Mat,
    left: &BanachNormSpec,
    right: &BanachNormSpec,
    opts: BranchOptions,
) -> BilinearMax {
    let k = right.dim();
    let f = |x: &[f64]| left.dual_norm(&mat_vec(w, x));
    let mut best_val = -1.0;
    let mut best_x = vec![0.0; k];
    let consider = |x: Vec<f64>, best_val: &mut f64, best_x: &mut Vec<f64>| {
        let n = right.norm(&x);
        if n <= 0.0 {
            return;
        }
        let x: Vec<f64> = x.iter().map(|v| v / n).collect();
        let v = f(&x);
        if v > *best_val {
            let (pv, _, px) = alternating_ascent(w, left, right, &x, 50);
            if pv > v {
                *best_val = pv;
                *best_x = px;
            } else {
                *best_val = v;
                *best_x = x;
            }
        }
    };
    if k == 1 {
        consider(vec![1.0], &mut best_val, &mut best_x);
        let a = left.norming_element(&mat_vec(w, &best_x));
        return BilinearMax {
            lower: best_val,
            upper: best_val,
            a,
            x: best_x,
            method: Method::Branch,
            open_boxes: 0,
        };
    }
    // Seeds: coordinate directions and the alternating ascent from each.
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        consider(e, &mut best_val, &mut best_x);
    }
    let crude: f64 = {
        let bl: Vec<f64> = (0..w.nrows())
            .map(|i| {
                let mut e = vec![0.0; w.nrows()];
                e[i] = 1.0;
                left.dual_norm(&e)
            })
            .collect();
        let br: Vec<f64> = (0..k)
            .map(|j| {
                let mut e = vec![0.0; k];
                e[j] = 1.0;
                right.dual_norm(&e)
            })
            .collect();
        let mut s = 0.0;
        for i in 0..w.nrows() {
            for j in 0..k {
                s += w[(i, j)].abs() * bl[i] * br[j];
            }
        }
        s
    };
    // Corner evaluations dominate; they reuse one buffer and precomputed scales.
    let m = w.nrows();
    let inv_scales: Option<Vec<f64>> = left.scales().map(|s| s.iter().map(|v| 1.0 / v).collect());
    let conj = left.exponent().map(|q| q.conjugate());
    let buf = std::cell::RefCell::new(vec![0.0; m]);
    let bound_of = |face: usize, lo: &[f64], hi: &[f64]| -> (f64, Vec<f64>) {
        let centre: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let c = lift(face, &centre);
        let mut g = right.norming_functional(&c);
        let gn = right.dual_norm(&g);
        if gn > 1.0 {
            g.iter_mut().for_each(|v| *v /= gn);
        }
        let km = lo.len();
        let col = |t: usize| if t < face { t } else { t + 1 };
        let mut wv = buf.borrow_mut();
        let mut b = 0.0_f64;
        for mask in 0..(1usize << km) {
            let mut den = g[face];
            for (i, out) in wv.iter_mut().enumerate() {
                *out = w[(i, face)];
            }
            for t in 0..km {
                let y = if (mask >> t) & 1 == 1 { hi[t] } else { lo[t] };
                let j = col(t);
                den += g[j] * y;
                for (i, out) in wv.iter_mut().enumerate() {
                    *out += w[(i, j)] * y;
                }
            }
            if den <= 0.0 {
                return (f64::INFINITY, c);
            }
            let num = match (&inv_scales, conj) {
                (Some(s), Some(q)) => {
                    wv.iter_mut().zip(s).for_each(|(v, r)| *v *= r);
                    q.norm(&wv)
                }
                _ => left.dual_norm(&wv),
            };
            b = b.max(num / den);
        }
        (b * (1.0 + 1e-12), c)
    };
    let mut heap = BinaryHeap::new();
    for face in 0..k {
        let lo = vec![-1.0; k - 1];
        let hi = vec![1.0; k - 1];
        let (bound, c) = bound_of(face, &lo, &hi);
        consider(c, &mut best_val, &mut best_x);
        heap.push(Cell {
            bound,
            face,
            lo,
            hi,
        });
    }
    let mut evaluated = 0usize;
    let upper;
    loop {
        let Some(top) = heap.peek() else {
            upper = best_val;
            break;
        };
        if top.bound <= best_val * (1.0 + opts.rel_tol) {
            upper = top.bound.max(best_val);
            break;
        }
        if evaluated >= opts.max_boxes {
            upper = top.bound.min(crude).max(best_val);
            break;
        }
        let cell = heap.pop().expect("peeked");
        let (axis, _) = cell
            .lo
            .iter()
            .zip(&cell.hi)
            .map(|(a, b)| b - a)
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("k ≥ 2");
        let mid = 0.5 * (cell.lo[axis] + cell.hi[axis]);
        for half in 0..2 {
            let mut lo = cell.lo.clone();
            let mut hi = cell.hi.clone();
            if half == 0 {
                hi[axis] = mid;
            } else {
                lo[axis] = mid;
            }
            let (bound, c) = bound_of(cell.face, &lo, &hi);
            consider(c, &mut best_val, &mut best_x);
            evaluated += 1;
            if bound > best_val * (1.0 + opts.rel_tol) {
                heap.push(Cell {
                    bound,
                    face: cell.face,
                    lo,
                    hi,
                });
            }
        }
    }
    let a = left.norming_element(&mat_vec(w, &best_x));
    let attained = pair(w, &a, &best_x);
    BilinearMax {
        lower: attained.min(best_val),
        upper: upper.max(attained),
        a,
        x: best_x,
        method: Method::Branch,
        open_boxes: heap.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::PExponent;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lq(p: PExponent, d: usize) -> BanachNormSpec {
        BanachNormSpec::lq(p, d)
    }

    #[test]
    fn identity_operator_norms() {
        let id = Mat::identity(2, 2);
        // ‖I: ℓ^∞_2 → ℓ^∞_2‖ = 1 through (ℓ¹, ℓ^∞) pairing.
        let r = bilinear_max(&id, &lq(PExponent::ONE, 2), &lq(PExponent::INF, 2));
        assert!((r.upper - 1.0).abs() < 1e-12 && (r.lower - 1.0).abs() < 1e-12);
        let r = bilinear_max(&id, &lq(PExponent::TWO, 2), &lq(PExponent::TWO, 2));
        assert!((r.upper - 1.0).abs() < 1e-12);
        assert_eq!(r.method, Method::Singular);
    }

    #[test]
    fn branch_matches_dense_sampling() {
        let p3 = PExponent::integer(3).unwrap();
        let p32 = PExponent::finite(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let w = Mat::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let left = lq(p3, 3);
            let right = lq(p32, 3);
            let r = bilinear_max(&w, &left, &right);
            assert_eq!(r.method, Method::Branch);
            assert!(
                r.upper - r.lower <= 1e-9 * r.upper,
                "{} {}",
                r.lower,
                r.upper
            );
            assert!(left.norm(&r.a) <= 1.0 + 1e-12 && right.norm(&r.x) <= 1.0 + 1e-12);
            // No sampled point beats the certified upper bound.
            for _ in 0..2000 {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = right.norm(&x);
                let x: Vec<f64> = x.iter().map(|v| v / n).collect();
                assert!(left.dual_norm(&mat_vec(&w, &x)) <= r.upper + 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_is_product() {
        let p3 = PExponent::integer(3).unwrap();
        let a = [1.0, -2.0, 0.5];
        let x = [0.3, 0.4, -1.0, 2.0];
        let w = crate::linalg::outer(&a, &x);
        let left = lq(p3, 3);
        let right =
            BanachNormSpec::weighted(PExponent::finite(5, 4).unwrap(), vec![1.0, 2.0, 0.5, 1.5])
                .unwrap();
        let r = bilinear_max(&w, &left, &right);
        let expect = left.dual_norm(&a) * right.dual_norm(&x);
        assert!((r.lower - expect).abs() < 1e-9 * expect);
        assert!((r.upper - expect).abs() < 1e-9 * expect);
    }
}
