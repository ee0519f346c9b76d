use crate::error::Result;
use crate::exponent::PExponent;
use crate::linalg::{pairing, Mat};
use crate::lp::{LinearProgram, Sense, VarBound};
use crate::space::Node;

use super::{eval_node, EvalOptions};

/// Result of `min { ‖x0 + Z Kᵀ‖ : Z }` in a parent space.
#[derive(Clone, Debug)]
pub struct CosetMin {
    /// Best representative found.
    pub point: Mat,
    pub upper: f64,
    /// Certified lower bound, attained by `annihilator_witness`.
    pub lower: f64,
    /// A parent dual tensor `W` with `W K = 0`, dual norm `≤ 1` and `⟨W, x0⟩ = lower`.
    pub annihilator_witness: Mat,
    pub converged: bool,
    pub iterations: usize,
}

/// Kelley cutting planes over the coset `x0 + {Z Kᵀ}` (`K` orthonormal
/// columns). Every cut comes from a certified parent witness, so any convex
/// combination `W̄` of cuts satisfies `‖W̄‖_* ≤ 1`; removing its component
/// along `K` costs at most `‖W̄ K Kᵀ‖_*`, which is bounded by evaluating the
/// dual parent, and gives a witness constant on the coset.
pub fn minimize_on_coset(
    p: PExponent,
    parent: &Node,
    x0: &Mat,
    kernel: &Mat,
    opts: &EvalOptions,
) -> Result<CosetMin> {
    // The LP tolerances are absolute, so the problem is solved at unit scale.
    let scale = x0.norm();
    if scale == 0.0 || (scale - 1.0).abs() < 1e-12 {
        return coset_unit(p, parent, x0, kernel, opts);
    }
    let mut out = coset_unit(p, parent, &(x0 / scale), kernel, opts)?;
    out.point *= scale;
    out.upper *= scale;
    out.lower *= scale;
    Ok(out)
}

fn coset_unit(
    p: PExponent,
    parent: &Node,
    x0: &Mat,
    kernel: &Mat,
    opts: &EvalOptions,
) -> Result<CosetMin> {
    let (m, dim) = x0.shape();
    let r = kernel.ncols();
    let first = eval_node(p, parent, x0, opts)?;
    if r == 0 || first.upper == 0.0 {
        return Ok(CosetMin {
            point: x0.clone(),
            upper: first.upper,
            lower: first.lower,
            annihilator_witness: first.witness.clone(),
            converged: first.converged || first.upper == 0.0,
            iterations: 0,
        });
    }
    let dual_parent = parent.dual();
    let pc = p.conjugate();
    let nv = m * r;
    let to_point = |z: &[f64]| -> Mat {
        let zm = Mat::from_fn(m, r, |i, j| z[i * r + j]);
        x0 + zm * kernel.transpose()
    };
    let mut cuts: Vec<(Vec<f64>, f64, Mat)> = Vec::new();
    let add_cut = |cuts: &mut Vec<(Vec<f64>, f64, Mat)>, w: &Mat| {
        let wk = w * kernel;
        let g: Vec<f64> = (0..m)
            .flat_map(|i| (0..r).map(move |j| (i, j)))
            .map(|(i, j)| wk[(i, j)])
            .collect();
        cuts.push((g, pairing(w, x0), w.clone()));
    };
    add_cut(&mut cuts, &first.witness);
    let mut best_point = x0.clone();
    let mut best_upper = first.upper;
    // The first witness projected onto the annihilator.
    let (mut best_witness, first_lower) =
        certify(pc, &dual_parent, x0, kernel, &first.witness, opts)?;
    let mut best_lower = first_lower;
    if best_lower < 0.0 {
        best_witness = -best_witness;
        best_lower = -best_lower;
    }
    // A proximal bundle phase; Kelley below finishes what it leaves open.
    let bundle = proximal_bundle(
        p,
        parent,
        x0,
        kernel,
        &first.witness,
        first.upper,
        opts,
        |w| certify(pc, &dual_parent, x0, kernel, w, opts),
    )?;
    for w in &bundle.witnesses {
        add_cut(&mut cuts, w);
    }
    if bundle.upper < best_upper {
        best_upper = bundle.upper;
        best_point = bundle.point;
    }
    if bundle.lower > best_lower {
        best_lower = bundle.lower;
        best_witness = bundle.witness;
    }
    if best_upper - best_lower <= opts.coset_tol * best_upper {
        return Ok(CosetMin {
            point: best_point,
            upper: best_upper,
            lower: best_lower.min(best_upper),
            annihilator_witness: best_witness,
            converged: true,
            iterations: bundle.iterations,
        });
    }
    let mut radius = 2.0 * x0.norm() + 1e-12;
    let mut converged = false;
    let mut iterations = 0;
    // Kelley stalls on curved norms; it stops when the gap stops shrinking.
    let mut checkpoint = best_upper - best_lower;
    for it in 0..opts.coset_iter {
        iterations = it + 1;
        if it > 0 && it % STALL_WINDOW == 0 {
            let gap = best_upper - best_lower;
            if gap > 0.9 * checkpoint {
                break;
            }
            checkpoint = gap;
        }
        let mut lp = LinearProgram::new({
            let mut c = vec![0.0; nv + 1];
            c[nv] = 1.0;
            c
        });
        for j in 0..nv {
            lp.set_bound(j, VarBound::Boxed(-radius, radius));
        }
        lp.set_bound(nv, VarBound::Free);
        for (g, b, _) in &cuts {
            let mut row = g.clone();
            row.push(-1.0);
            lp.add_row(row, Sense::Le, -b);
        }
        let sol = lp.solve()?;
        let z = &sol.x[..nv];
        let model = sol.x[nv];
        let on_box = z.iter().any(|v| v.abs() >= 0.999 * radius);
        if model >= best_upper * (1.0 - opts.coset_tol) {
            // The model has closed the gap inside the box: certify from the LP duals.
            let total: f64 = sol.duals.iter().map(|v| v.abs()).sum();
            if total > 0.0 {
                let mut wbar = Mat::zeros(m, dim);
                for (k, (_, _, w)) in cuts.iter().enumerate() {
                    wbar += w * (sol.duals[k].abs() / total);
                }
                let (w, l) = certify(pc, &dual_parent, x0, kernel, &wbar, opts)?;
                if l > best_lower {
                    best_lower = l;
                    best_witness = w;
                }
            }
            if best_upper - best_lower <= opts.coset_tol * best_upper {
                converged = true;
                break;
            }
            if on_box {
                radius *= 4.0;
                continue;
            }
            if model >= best_upper * (1.0 - 1e-14) {
                // No progress is possible at floating-point resolution.
                break;
            }
        }
        let x = to_point(z);
        let est = eval_node(p, parent, &x, opts)?;
        if est.upper < best_upper {
            best_upper = est.upper;
            best_point = x;
        }
        add_cut(&mut cuts, &est.witness);
    }
    Ok(CosetMin {
        point: best_point,
        upper: best_upper,
        lower: best_lower.min(best_upper),
        annihilator_witness: best_witness,
        converged,
        iterations,
    })
}

/// Projects `w` onto the annihilator of `K` and rescales by the certified
/// dual norm of the removed part; returns the witness and its pairing with `x0`.
fn certify(
    pc: PExponent,
    dual_parent: &Node,
    x0: &Mat,
    kernel: &Mat,
    w: &Mat,
    opts: &EvalOptions,
) -> Result<(Mat, f64)> {
    let delta_t = w * kernel * kernel.transpose();
    let corrected = w - &delta_t;
    let delta = if delta_t.iter().all(|v| v.abs() < 1e-300) {
        0.0
    } else {
        eval_node(pc, dual_parent, &delta_t, opts)?.upper
    };
    let scaled = corrected / (1.0 + delta);
    let value = pairing(&scaled, x0);
    Ok((scaled, value))
}

struct Bundle {
    point: Mat,
    upper: f64,
    lower: f64,
    witness: Mat,
    witnesses: Vec<Mat>,
    iterations: usize,
}

const BUNDLE_STEPS: usize = 300;
const STALL_WINDOW: usize = 25;
const BUNDLE_SIZE: usize = 40;

/// Proximal bundle method on `f(Z) = ‖x0 + Z Kᵀ‖`. Every witness `W` gives
/// the global minorant `f(Z) ≥ ⟨W, x0⟩ + ⟨W K, Z⟩`; the aggregate of the
/// active cuts is again a witness and is certified by `certify`.
#[allow(clippy::too_many_arguments)]
fn proximal_bundle<C>(
    p: PExponent,
    parent: &Node,
    x0: &Mat,
    kernel: &Mat,
    w0: &Mat,
    f0: f64,
    opts: &EvalOptions,
    certify: C,
) -> Result<Bundle>
where
    C: Fn(&Mat) -> Result<(Mat, f64)>,
{
    let (m, r) = (x0.nrows(), kernel.ncols());
    let kt = kernel.transpose();
    // Cuts as (W, b = ⟨W, x0⟩, g = W K).
    let cut = |w: Mat| -> (f64, Mat, Mat) { (pairing(&w, x0), &w * kernel, w) };
    let mut bundle = vec![cut(w0.clone())];
    let mut center = Mat::zeros(m, r);
    let mut f_center = f0;
    let g0 = bundle[0].1.norm();
    let mut t = if g0 > 0.0 { f0 / (g0 * g0) } else { 1.0 };
    let mut lower = f64::NEG_INFINITY;
    let mut witness = w0.clone();
    let mut witnesses = Vec::new();
    let mut iterations = 0;
    let mut nulls = 0;
    let mut checkpoint = f_center;
    for it in 0..BUNDLE_STEPS {
        iterations = it + 1;
        // Once the centre stops moving, the cutting-plane phase certifies faster.
        if it > 0 && it % 50 == 0 {
            if checkpoint - f_center <= 0.1 * opts.coset_tol * f_center {
                break;
            }
            checkpoint = f_center;
        }
        // Linearisation errors at the centre.
        let errs: Vec<f64> = bundle
            .iter()
            .map(|(b, g, _)| (f_center - b - g.dot(&center)).max(0.0))
            .collect();
        let lambda = simplex_qp(&bundle.iter().map(|c| &c.1).collect::<Vec<_>>(), &errs, t);
        let mut gbar = Mat::zeros(m, r);
        let mut wbar = Mat::zeros(x0.nrows(), x0.ncols());
        let mut ebar = 0.0;
        for (k, l) in lambda.iter().enumerate() {
            if *l > 0.0 {
                gbar += &bundle[k].1 * *l;
                wbar += &bundle[k].2 * *l;
                ebar += errs[k] * l;
            }
        }
        let predicted = t * gbar.norm_squared() + ebar;
        if predicted <= opts.coset_tol * 0.25 * f_center || it % 10 == 9 {
            let (w, l) = certify(&wbar)?;
            if l > lower {
                lower = l;
                witness = w;
            }
            if f_center - lower <= opts.coset_tol * f_center {
                break;
            }
        }
        if predicted <= f64::EPSILON * f_center {
            // The model predicts no decrease: the centre is optimal to round-off.
            break;
        }
        let trial = &center - &gbar * t;
        let x = x0 + &trial * &kt;
        let est = eval_node(p, parent, &x, opts)?;
        witnesses.push(est.witness.clone());
        // Keep the active cuts, the aggregate and the new one.
        let mut kept: Vec<(f64, Mat, Mat)> = Vec::new();
        for (k, c) in bundle.into_iter().enumerate() {
            if lambda[k] > 1e-12 {
                kept.push(c);
            }
        }
        if kept.len() >= BUNDLE_SIZE {
            kept = vec![cut(wbar)];
        }
        kept.push(cut(est.witness));
        bundle = kept;
        if f_center - est.upper >= 0.1 * predicted {
            if f_center - est.upper >= 0.5 * predicted {
                t *= 2.0;
            }
            center = trial;
            f_center = est.upper;
            nulls = 0;
        } else {
            nulls += 1;
            if nulls % 5 == 0 {
                t *= 0.5;
            }
        }
    }
    let point = x0 + &center * &kt;
    Ok(Bundle {
        point,
        upper: f_center,
        lower,
        witness,
        witnesses,
        iterations,
    })
}

/// `argmin_{λ ∈ Δ} (t/2)‖Σ λ_k g_k‖² + Σ λ_k e_k` by accelerated projected gradient.
fn simplex_qp(g: &[&Mat], e: &[f64], t: f64) -> Vec<f64> {
    let n = g.len();
    let gram = Mat::from_fn(n, n, |i, j| g[i].dot(g[j]));
    // The bundle is small, so the Lipschitz constant comes from a full eigensolve.
    let eig = gram
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |m, v| m.max(*v));
    if !(t * eig > 0.0) {
        // A linear objective over the simplex: the vertex with the least error.
        let k = (0..n)
            .min_by(|&a, &b| e[a].total_cmp(&e[b]))
            .expect("nonempty bundle");
        return (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
    }
    let lip = t * eig * 1.01;
    let mut lam = vec![1.0 / n as f64; n];
    let mut y = lam.clone();
    let mut theta: f64 = 1.0;
    for _ in 0..600 {
        let grad: Vec<f64> = (0..n)
            .map(|i| t * (0..n).map(|j| gram[(i, j)] * y[j]).sum::<f64>() + e[i])
            .collect();
        let next = project_simplex(&(0..n).map(|i| y[i] - grad[i] / lip).collect::<Vec<_>>());
        let theta_next = (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0;
        let beta = (theta - 1.0) / theta_next;
        y = (0..n)
            .map(|i| next[i] + beta * (next[i] - lam[i]))
            .collect();
        lam = next;
        theta = theta_next;
    }
    lam
}

fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, x) in u.iter().enumerate() {
        cum += x;
        let cand = (cum - 1.0) / (k + 1) as f64;
        if x - cand > 0.0 {
            tau = cand;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}
