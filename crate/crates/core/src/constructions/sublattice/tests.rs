use super::*;
use crate::exponent::PExponent;
use crate::linalg::{from_rows, spectral_norm};
use crate::norm::BanachNormSpec;
use crate::space::SpaceSpec;
use rand::Rng;

/// Operator norm of `P` on `ℓ^p_N(μ)` by the classical formulas.
fn oracle_norm(p: PExponent, mu: &[f64], pm: &Mat) -> f64 {
    let n = mu.len();
    if p.is_one() {
        (0..n)
            .map(|t| (0..n).map(|s| mu[s] * pm[(s, t)].abs()).sum::<f64>() / mu[t])
            .fold(0.0, f64::max)
    } else if p.is_infinite() {
        (0..n)
            .map(|s| (0..n).map(|t| pm[(s, t)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    } else {
        let scaled = Mat::from_fn(n, n, |s, t| mu[s].sqrt() * pm[(s, t)] / mu[t].sqrt());
        spectral_norm(&scaled)
    }
}

#[test]
fn one_dimensional_simple_function() {
    let sp = DiscreteLpSpace::new(PExponent::TWO, vec![0.5, 1.0, 2.0, 1.0]).unwrap();
    let z = from_rows(&[vec![1.0, 2.0, 3.0, 0.0]]);
    let r = sublattice_discretize(&sp, &z, 0.5).unwrap();
    assert_eq!(r.k, 4);
    assert_eq!(r.m, 1);
    assert_eq!(r.cells, vec![vec![0, 1, 2]]);
    // u = Jz₁ is constant on S.
    for s in 0..3 {
        assert!((r.u[(0, s)].abs() - r.u[(0, 0)].abs()).abs() < 1e-12);
    }
    let z1: Vec<f64> = z.row(0).iter().copied().collect();
    assert!(r.deviation(&z1) < 1e-12);
    assert_eq!(m0(1, 0.5), 8);
    assert_eq!(m0(2, 0.5), 4 * 16 * 16);
}

#[test]
fn disjoint_indicators_are_fixed() {
    for p in [
        PExponent::ONE,
        PExponent::finite(3, 2).unwrap(),
        PExponent::INF,
    ] {
        let sp = DiscreteLpSpace::new(p, vec![1.0, 0.3, 0.7, 2.0, 1.5]).unwrap();
        let z = from_rows(&[vec![1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0, 1.0]]);
        let r = sublattice_discretize(&sp, &z, 0.25).unwrap();
        for i in 0..2 {
            let zi: Vec<f64> = z.row(i).iter().copied().collect();
            assert!(r.deviation(&zi) < 1e-12, "{p:?}");
        }
        assert!(r.deviation_bound() < 1e-12);
    }
}

#[test]
fn randomized_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for inst in 0..24 {
        let p = [
            PExponent::ONE,
            PExponent::TWO,
            PExponent::INF,
            PExponent::finite(3, 2).unwrap(),
        ][inst % 4];
        let eps = [0.25, 0.5][inst % 2];
        let n = 1 + inst % 3;
        let big_n = rng.random_range(n + 1..=30);
        let mu: Vec<f64> = (0..big_n).map(|_| rng.random_range(0.05..1.0)).collect();
        let sp = DiscreteLpSpace::new(p, mu.clone()).unwrap();
        let z = Mat::from_fn(n, big_n, |_, _| {
            if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(-1.0..1.0)
            }
        });
        let r = sublattice_discretize(&sp, &z, eps).unwrap();
        assert!(r.min_entry() >= 0.0);
        assert!(r.idempotence_error() <= 1e-9);
        let c = r.contraction_norm();
        assert!(c <= 1.0 + 1e-9, "{p:?}: {c}");
        if !p.is_interior() || p.is_two() {
            assert!((c - oracle_norm(p, &mu, &r.projection)).abs() < 1e-9);
        }
        assert!((r.m as u128) <= r.m0);
        assert!(r.step_error() <= n as f64 / r.k as f64 + 1e-12);
        // Range: P fixes the basis of E, whose rows are disjoint, and rank P = M.
        let pe = &r.projection * r.basis.transpose();
        assert!(max_abs(&(pe - r.basis.transpose())) < 1e-9);
        assert_eq!(rank(&r.projection, 1e-9), r.m);
        for s in 0..big_n {
            assert!((0..r.m).filter(|&c| r.basis[(c, s)] != 0.0).count() <= 1);
        }
        let bound = r.deviation_bound();
        assert!(bound <= 2.0 * eps + 1e-8, "{p:?} n={n}: {bound}");
        // Sampled unit vectors of Z never exceed the certified bound.
        let sub = sp.subspace(&z).unwrap();
        for _ in 0..50 {
            let cf: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let nc = sub.norm(&cf);
            let v: Vec<f64> = sub.lift(&cf).iter().map(|x| x / nc).collect();
            assert!(r.deviation(&v) <= bound + 1e-12);
        }
    }
}

#[test]
fn invalid_inputs() {
    let sp = DiscreteLpSpace::new(PExponent::TWO, vec![1.0; 3]).unwrap();
    let z = from_rows(&[vec![1.0, 0.0, 1.0]]);
    assert!(matches!(
        sublattice_discretize(&sp, &z, 1.0),
        Err(Error::InvalidArgument(_))
    ));
    let dep = from_rows(&[vec![1.0, 0.0, 1.0], vec![2.0, 0.0, 2.0]]);
    assert!(matches!(
        sublattice_discretize(&sp, &dep, 0.5),
        Err(Error::Degenerate(_))
    ));
}

fn min_l2(p: PExponent) -> SpaceSpec {
    SpaceSpec::min(p, BanachNormSpec::lq(PExponent::TWO, 2))
}

#[test]
fn transfer_canonical_and_level_one() {
    let p = PExponent::TWO;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = OperatorRep::new(
        min_l2(p),
        min_l2(p),
        Mat::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0)),
    )
    .unwrap();
    let want = spectral_norm(&u.matrix);
    let opts = LevelOptions {
        restarts: 4,
        ..LevelOptions::default()
    };
    let canon = from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
    let r = sublattice_transfer_check(&canon, &u, &opts).unwrap();
    assert!(r.consistent && r.gap < 1e-6, "{r:?}");
    assert!((r.rhs.lower - want).abs() < 1e-8);
    let one = from_rows(&[vec![0.0, 2.0, 1.0]]);
    let r = sublattice_transfer_check(&one, &u, &opts).unwrap();
    assert!(r.consistent && (r.lhs_lower - want).abs() < 1e-6, "{r:?}");
}

#[test]
fn transfer_random_disjoint_sublattice() {
    let p = PExponent::finite(3, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = SpaceSpec::max(p, BanachNormSpec::lq(PExponent::TWO, 2));
    let y = min_l2(p);
    let u = OperatorRep::new(x, y, Mat::from_fn(2, 2, |_, _| rng.random_range(-1.0..1.0))).unwrap();
    let z = from_rows(&[vec![0.4, 0.0, 1.3, 0.0], vec![0.0, 0.8, 0.0, 0.5]]);
    let r = sublattice_transfer_check(
        &z,
        &u,
        &LevelOptions {
            restarts: 4,
            ..LevelOptions::default()
        },
    )
    .unwrap();
    assert!(r.consistent && r.gap < 1e-4, "{r:?}");
}

#[test]
fn transfer_rejects_overlapping_rows() {
    let u = OperatorRep::identity(min_l2(PExponent::TWO));
    let z = from_rows(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]);
    assert!(matches!(
        sublattice_transfer_check(&z, &u, &LevelOptions::default()),
        Err(Error::InvalidArgument(_))
    ));
    let mixed = from_rows(&[vec![1.0, -1.0, 0.0]]);
    assert!(matches!(
        sublattice_transfer_check(&mixed, &u, &LevelOptions::default()),
        Err(Error::InvalidArgument(_))
    ));
}
