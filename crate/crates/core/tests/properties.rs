use multinorm::constructions::{delta_net, sublattice_discretize, volume_bound, DiscreteLpSpace};
use multinorm::extension_lifting::min_norm_lift;
use multinorm::json::{space_from_value, space_to_value};
use multinorm::linalg::Mat;
use multinorm::tensor_norms::{
    injective_norm_with, lattice_norm, projective_norm_with, EvalOptions,
};
use multinorm::{BanachNormSpec, FiniteNorm, Node, PExponent, SpaceSpec};
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = PExponent> {
    prop_oneof![
        Just(PExponent::INF),
        (1i64..6, 1i64..4).prop_map(|(a, b)| PExponent::finite(a + b - 1, b).unwrap())
    ]
}

fn lattice_exponent() -> impl Strategy<Value = PExponent> {
    prop_oneof![
        Just(PExponent::ONE),
        Just(PExponent::TWO),
        Just(PExponent::INF)
    ]
}

fn matrix(m: usize, d: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-2.0f64..2.0, m * d).prop_map(move |v| Mat::from_row_slice(m, d, &v))
}

fn lq_norm(d: usize) -> impl Strategy<Value = BanachNormSpec> {
    prop_oneof![
        lattice_exponent().prop_map(move |q| BanachNormSpec::lq(q, d)),
        (lattice_exponent(), prop::collection::vec(0.5f64..2.0, d))
            .prop_map(|(q, w)| BanachNormSpec::weighted(q, w).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exponents_round_trip(p in exponent()) {
        let back: PExponent = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
        prop_assert_eq!(p.conjugate().conjugate(), p);
    }

    #[test]
    fn nets_respect_the_volume_bound(d in 1usize..=2, delta in 0.3f64..1.0, e in (1usize..=2).prop_flat_map(lq_norm)) {
        let e = if e.dim() == d { e } else { BanachNormSpec::lq(PExponent::TWO, d) };
        let net = delta_net(&e, delta).unwrap();
        prop_assert!(net.len() as u64 <= volume_bound(delta, d));
        prop_assert!(net.iter().all(|x| e.norm(x) <= 1.0 + 1e-12));
    }

    #[test]
    fn lattice_norm_between_injective_and_projective(
        p in exponent(),
        (e, t) in (1usize..=3, 1usize..=3).prop_flat_map(|(m, d)| (lq_norm(d), matrix(m, d))),
    ) {
        let opts = EvalOptions::default();
        let inj = injective_norm_with(p, &e, &t, &opts).unwrap();
        let proj = projective_norm_with(p, &e, &t, &opts).unwrap();
        let lat = lattice_norm(p, &e, &t).unwrap();
        let slack = 1e-8 * proj.upper.max(1e-12);
        prop_assert!(inj.lower <= lat + slack, "{} {}", inj.lower, lat);
        prop_assert!(lat <= proj.upper + slack, "{} {}", lat, proj.upper);
        prop_assert!(inj.lower <= inj.upper && proj.lower <= proj.upper + slack);
    }

    #[test]
    fn lifts_never_beat_the_quotient_norm(
        p in lattice_exponent(),
        e in lq_norm(3),
        kernel in matrix(1, 3),
        t in (1usize..=2).prop_flat_map(|m| matrix(m, 2)),
    ) {
        prop_assume!(kernel.norm() > 0.1);
        let parent = SpaceSpec::new(p, Node::Min(e)).unwrap();
        let quotient = SpaceSpec::quotient_by_kernel(parent, kernel).unwrap();
        let lift = min_norm_lift(&quotient, &t, 1e-3, &EvalOptions::default()).unwrap();
        prop_assert!(lift.residual <= 1e-9);
        prop_assert!(lift.norm.upper >= lift.quotient_norm.lower * (1.0 - 1e-9));
    }

    #[test]
    fn discretisation_invariants(
        p in lattice_exponent(),
        eps in prop_oneof![Just(0.25), Just(0.5)],
        (z, w) in (1usize..=2, 3usize..=12).prop_flat_map(|(n, big)| (matrix(n, big), prop::collection::vec(0.5f64..2.0, big))),
    ) {
        let space = DiscreteLpSpace::new(p, w).unwrap();
        let Ok(res) = sublattice_discretize(&space, &z, eps) else { return Ok(()) };
        prop_assert!(res.min_entry() >= 0.0);
        prop_assert!(res.idempotence_error() <= 1e-9);
        prop_assert!(res.contraction_norm() <= 1.0 + 1e-9);
        prop_assert!(res.m as u128 <= res.m0);
        prop_assert!(res.deviation_bound() <= 2.0 * eps + 1e-8);
    }

    #[test]
    fn space_documents_round_trip(p in exponent(), e in lq_norm(2), f in lq_norm(1), basis in matrix(1, 3)) {
        prop_assume!(basis.norm() > 0.1);
        let parts = vec![Node::Max(e), Node::Lattice(f)];
        let sum = SpaceSpec::new(p, Node::SumInf(parts)).unwrap();
        let s = SpaceSpec::subspace(sum, basis).unwrap();
        let back = space_from_value(&space_to_value(&s)).unwrap();
        prop_assert_eq!(back, s);
    }
}
