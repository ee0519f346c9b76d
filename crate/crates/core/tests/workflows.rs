use multinorm::extension_lifting::{almost_projection, embed_fd};
use multinorm::linalg::Mat;
use multinorm::operator_norms::LevelOptions;
use multinorm::{BanachNormSpec, PExponent, SpaceSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn options() -> LevelOptions {
    LevelOptions {
        restarts: 4,
        ..LevelOptions::default()
    }
}

#[test]
fn almost_projection_onto_a_random_plane_of_min_l2() {
    let two = PExponent::TWO;
    let x = SpaceSpec::min(two, BanachNormSpec::lq(two, 4));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let e = Mat::from_fn(2, 4, |_, _| StandardNormal.sample(&mut rng));
    let proj = almost_projection(&x, &e, 0.25, 4, 16, &options()).unwrap();
    assert!(proj.idempotence_error <= 1e-9, "{}", proj.idempotence_error);
    assert!(proj.identity_error <= 1e-9, "{}", proj.identity_error);
    assert!(proj.levels.len() <= 4);
    assert!(proj.measured <= 1.25, "{}", proj.measured);
}

#[test]
fn embedding_of_a_scalar_space_is_isometric() {
    let p: PExponent = "3/2".parse().unwrap();
    let s = SpaceSpec::max(p, BanachNormSpec::lq(PExponent::INF, 1));
    let emb = embed_fd(&s, 0.5, 2, 4, &options()).unwrap();
    assert!(emb.certified);
    assert!((emb.measured - 1.0).abs() < 1e-9, "{}", emb.measured);
}
