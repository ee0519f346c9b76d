use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::norm::{BanachNormSpec, FiniteNorm, NormKind};

/// `(⌈1/δ⌉ + 1)^d`, saturating.
pub fn volume_bound(delta: f64, d: usize) -> u64 {
    let c = ceil_inv(delta) + 1;
    let mut out: u64 = 1;
    for _ in 0..d {
        out = out.saturating_mul(c);
    }
    out
}

fn ceil_inv(delta: f64) -> u64 {
    let x = 1.0 / delta;
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// A `δ`-net of `ball(E)` inside the ball.
pub fn delta_net(e: &BanachNormSpec, delta: f64) -> Result<Vec<Vec<f64>>> {
    let box_scales = match e.kind() {
        NormKind::Lq(PExponent::Infinite)
        | NormKind::WeightedLq {
            q: PExponent::Infinite,
            ..
        } => e.scales(),
        _ => None,
    };
    delta_net_with(e, delta, box_scales.as_deref())
}

/// `δ`-net for any norm; `box_scales` marks a box ball `max_i s_i |x_i| ≤ 1`,
/// covered by a product grid. Other balls are covered greedily from a
/// sample set that is itself a `2η`-net, with cover radius `δ − 2η`.
pub fn delta_net_with<N: FiniteNorm + ?Sized>(
    norm: &N,
    delta: f64,
    box_scales: Option<&[f64]>,
) -> Result<Vec<Vec<f64>>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let d = norm.dim();
    if delta >= 1.0 {
        return Ok(vec![vec![0.0; d]]);
    }
    let bound = volume_bound(delta, d);
    let net = match box_scales {
        Some(s) => product_grid(s, ceil_inv(delta) as usize),
        None => greedy_cover(norm, delta),
    };
    if net.len() as u64 > bound {
        return Err(Error::NetCardinality {
            size: net.len(),
            bound,
        });
    }
    Ok(net)
}

fn product_grid(scales: &[f64], c: usize) -> Vec<Vec<f64>> {
    let d = scales.len();
    let axis = |i: usize| -> Vec<f64> {
        let r = 1.0 / scales[i];
        (0..c)
            .map(|t| -r + r * (2 * t + 1) as f64 / c as f64)
            .collect()
    };
    let axes: Vec<Vec<f64>> = (0..d).map(axis).collect();
    let mut out = vec![Vec::new()];
    for ax in &axes {
        out = out
            .iter()
            .flat_map(|pre| {
                ax.iter().map(move |v| {
                    let mut p = pre.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}

const MAX_SAMPLES: usize = 40_000;

fn greedy_cover<N: FiniteNorm + ?Sized>(norm: &N, delta: f64) -> Vec<Vec<f64>> {
    let d = norm.dim();
    // Covering radius of the grid hZ^d in the norm: the worst half-diagonal.
    let half_diag = (0..1usize << d)
        .map(|mask| {
            norm.norm(
                &(0..d)
                    .map(|i| if mask >> i & 1 == 1 { 0.5 } else { -0.5 })
                    .collect::<Vec<_>>(),
            )
        })
        .fold(0.0, f64::max);
    let radii: Vec<f64> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            norm.dual_norm(&e)
        })
        .collect();
    let mut eta = delta / 60.0;
    let samples = loop {
        let s = grid_samples(norm, &radii, eta / half_diag, eta);
        if s.len() <= MAX_SAMPLES || eta >= delta / 8.0 {
            break s;
        }
        eta *= 1.25;
    };
    let spacing = delta / 12.0;
    let candidates = grid_samples(norm, &radii, spacing / half_diag, 0.0);
    let rho = delta - 2.0 * eta;
    let covers: Vec<Vec<usize>> = candidates
        .iter()
        .map(|c| {
            let mut buf = vec![0.0; d];
            (0..samples.len())
                .filter(|&j| {
                    for (b, (x, y)) in buf.iter_mut().zip(samples[j].iter().zip(c)) {
                        *b = x - y;
                    }
                    norm.norm(&buf) <= rho
                })
                .collect()
        })
        .collect();
    let mut covered = vec![false; samples.len()];
    let mut left = samples.len();
    let mut chosen: Vec<usize> = Vec::new();
    while left > 0 {
        let (best, _) = covers
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.iter().filter(|&&j| !covered[j]).count()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("samples");
        for &j in &covers[best] {
            if !covered[j] {
                covered[j] = true;
                left -= 1;
            }
        }
        chosen.push(best);
    }
    // Drop centres whose samples are all covered by the others.
    let mut count = vec![0usize; samples.len()];
    for &c in &chosen {
        for &j in &covers[c] {
            count[j] += 1;
        }
    }
    let mut keep = Vec::new();
    for &c in chosen.iter().rev() {
        if covers[c].iter().all(|&j| count[j] > 1) {
            for &j in &covers[c] {
                count[j] -= 1;
            }
        } else {
            keep.push(c);
        }
    }
    keep.reverse();
    let mut net: Vec<Vec<f64>> = keep.into_iter().map(|c| candidates[c].clone()).collect();
    let coarse = grid_samples(norm, &radii, spacing / half_diag, spacing);
    while net.len() > 1 {
        match shrink(norm, &net, &coarse, &samples, rho) {
            Some(smaller) => net = smaller,
            None => break,
        }
    }
    net
}

fn dist<N: FiniteNorm + ?Sized>(norm: &N, a: &[f64], b: &[f64]) -> f64 {
    let mut buf = [0.0; 8];
    if a.len() > buf.len() {
        return norm.norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>());
    }
    for (t, (x, y)) in buf.iter_mut().zip(a.iter().zip(b)) {
        *t = x - y;
    }
    norm.norm(&buf[..a.len()])
}

fn covering_radius<N: FiniteNorm + ?Sized>(
    norm: &N,
    net: &[Vec<f64>],
    samples: &[Vec<f64>],
) -> f64 {
    samples
        .iter()
        .map(|s| {
            net.iter()
                .map(|c| dist(norm, s, c))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Try each centre for removal; re-centre the rest by minimax steps toward
/// the farthest sample of each cluster, and accept when the fine samples
/// stay covered at radius `rho`.
fn shrink<N: FiniteNorm + ?Sized>(
    norm: &N,
    net: &[Vec<f64>],
    coarse: &[Vec<f64>],
    fine: &[Vec<f64>],
    rho: f64,
) -> Option<Vec<Vec<f64>>> {
    let mut order: Vec<(f64, usize)> = (0..net.len())
        .map(|drop| {
            let rest: Vec<Vec<f64>> = net
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, c)| c.clone())
                .collect();
            (covering_radius(norm, &rest, coarse), drop)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for &(_, drop) in order.iter().take(4) {
        let mut centres: Vec<Vec<f64>> = net
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != drop)
            .map(|(_, c)| c.clone())
            .collect();
        for it in 0..200 {
            let mut far: Vec<Option<(f64, usize)>> = vec![None; centres.len()];
            for (j, s) in coarse.iter().enumerate() {
                let (k, dk) = centres
                    .iter()
                    .enumerate()
                    .map(|(k, c)| (k, dist(norm, s, c)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .expect("centres");
                if far[k].is_none_or(|(d, _)| dk > d) {
                    far[k] = Some((dk, j));
                }
            }
            let step = 1.0 / (it as f64 + 2.0);
            for (c, f) in centres.iter_mut().zip(&far) {
                if let Some((_, j)) = f {
                    for (ci, si) in c.iter_mut().zip(&coarse[*j]) {
                        *ci += step * (si - *ci);
                    }
                    let n = norm.norm(c);
                    if n > 1.0 {
                        c.iter_mut().for_each(|v| *v /= n);
                    }
                }
            }
            if it % 25 == 24
                && covering_radius(norm, &centres, coarse) <= rho
                && covering_radius(norm, &centres, fine) <= rho
            {
                return Some(centres);
            }
        }
    }
    None
}

/// Grid points of spacing `h` in the ball, and radial projections of the
/// grid points within `η` outside it; together a `2η`-net of the ball.
fn grid_samples<N: FiniteNorm + ?Sized>(
    norm: &N,
    radii: &[f64],
    h: f64,
    eta: f64,
) -> Vec<Vec<f64>> {
    let d = radii.len();
    let counts: Vec<i64> = radii.iter().map(|r| ((r + h) / h).ceil() as i64).collect();
    let mut out = Vec::new();
    let mut idx: Vec<i64> = counts.iter().map(|c| -c).collect();
    loop {
        let g: Vec<f64> = idx.iter().map(|&k| k as f64 * h).collect();
        let n = norm.norm(&g);
        if n <= 1.0 {
            out.push(g);
        } else if n <= 1.0 + eta {
            out.push(g.iter().map(|v| v / n).collect());
        }
        let mut i = 0;
        while i < d {
            idx[i] += 1;
            if idx[i] <= counts[i] {
                break;
            }
            idx[i] = -counts[i];
            i += 1;
        }
        if i == d {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Sampled check that every ball point is within `δ` of the net.
    fn covers(e: &BanachNormSpec, net: &[Vec<f64>], delta: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = e.dim();
        for p in net {
            assert!(e.norm(p) <= 1.0 + 1e-12);
        }
        for _ in 0..3000 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = e.norm(&x);
            let r: f64 = rng.random_range(0.0..1.0);
            let x: Vec<f64> = x.iter().map(|v| v / n * r.powf(1.0 / d as f64)).collect();
            let dist = net
                .iter()
                .map(|c| e.norm(&x.iter().zip(c).map(|(a, b)| a - b).collect::<Vec<_>>()))
                .fold(f64::INFINITY, f64::min);
            assert!(dist <= delta + 1e-12, "point {x:?} at distance {dist}");
        }
    }

    #[test]
    fn small_examples() {
        let e = BanachNormSpec::lq(PExponent::TWO, 1);
        let net = delta_net(&e, 1.0).unwrap();
        assert!(net.len() <= 2);
        let e = BanachNormSpec::lq(PExponent::INF, 2);
        let net = delta_net(&e, 0.5).unwrap();
        assert!(net.len() <= 9);
        covers(&e, &net, 0.5);
        let e = BanachNormSpec::lq(PExponent::ONE, 3);
        assert_eq!(delta_net(&e, 1.0).unwrap(), vec![vec![0.0; 3]]);
        assert_eq!(volume_bound(0.5, 2), 9);
        assert_eq!(volume_bound(1.0, 1), 2);
    }

    #[test]
    fn greedy_nets_cover_and_respect_bound() {
        for (e, delta) in [
            (BanachNormSpec::lq(PExponent::TWO, 2), 0.5),
            (BanachNormSpec::lq(PExponent::ONE, 2), 0.25),
            (BanachNormSpec::lq(PExponent::ONE, 2), 0.5),
            (BanachNormSpec::lq(PExponent::finite(3, 2).unwrap(), 2), 0.5),
            (BanachNormSpec::lq(PExponent::TWO, 1), 0.2),
            (
                BanachNormSpec::weighted(PExponent::INF, vec![1.0, 3.0]).unwrap(),
                0.3,
            ),
        ] {
            let net = delta_net(&e, delta).unwrap();
            assert!(net.len() as u64 <= volume_bound(delta, e.dim()));
            covers(&e, &net, delta);
        }
    }

    #[test]
    fn invalid_delta() {
        let e = BanachNormSpec::lq(PExponent::TWO, 2);
        assert!(matches!(delta_net(&e, 0.0), Err(Error::InvalidArgument(_))));
    }
}
