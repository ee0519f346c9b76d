//! Seeded randomized verification suites.
//!
//! Instance `i` of a suite draws all of its randomness from the ChaCha
//! stream `i` of the run seed, so any instance can be rerun alone with
//! [`run_instance`]. Instances run in parallel and are reported in index
//! order; equal configurations give byte-identical reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{sublattice_discretize, DiscreteLpSpace};
use crate::duality_sums::{check_pair, describe, lattice_max_entry, subquotient_demo};
use crate::error::{Error, Result};
use crate::estimate::UpperCertificate;
use crate::exponent::PExponent;
use crate::extension_lifting::{extend_to_max, lift_operator};
use crate::linalg::{max_abs, outer, pairing, spectral_norm, Mat};
use crate::norm::BanachNormSpec;
use crate::operator_norms::{level_m_norm_with, norm_to_max_with, LevelOptions};
use crate::space::{dual_spec, Node, SpaceSpec};
use crate::tensor::OperatorRep;
use crate::tensor_norms::{
    decomposition_sum, decomposition_value, eval_node, injective_norm_with, lattice_norm,
    projective_norm_with, EvalOptions,
};

pub const SUITES: [&str; 9] = [
    "axioms",
    "duality",
    "sandwich",
    "lattice-max",
    "control",
    "discretize",
    "inject",
    "project",
    "subquotient",
];

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Number of instances; `None` takes the suite's default.
    pub instances: Option<usize>,
    /// Relative slack for the checks that are not tied to a fixed tolerance.
    pub tol: f64,
    /// Highest level for level profiles.
    pub levels: usize,
    pub restarts: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: None,
            tol: 1e-6,
            levels: 4,
            restarts: 4,
        }
    }
}

/// One inequality `value ≤ bound`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub reference: &'static str,
    pub value: f64,
    pub bound: f64,
    pub ok: bool,
}

impl Check {
    fn new(name: &'static str, reference: &'static str, value: f64, bound: f64) -> Self {
        Self {
            name,
            reference,
            value,
            bound,
            ok: value <= bound,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceReport {
    pub index: usize,
    pub description: String,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub violation: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub tolerance: f64,
    pub instances: usize,
    pub violations: usize,
    pub results: Vec<InstanceReport>,
}

type Outcome = Result<(String, Vec<Check>)>;

fn suite_fn(name: &str) -> Option<(fn(usize, &mut ChaCha8Rng, &SuiteConfig) -> Outcome, usize)> {
    Some(match name {
        "axioms" => (axioms, 800),
        "duality" => (duality, 100),
        "sandwich" => (sandwich, 200),
        "lattice-max" => (lattice_max, 200),
        "control" => (control, 40),
        "discretize" => (discretize, 100),
        "inject" => (inject, 50),
        "project" => (project, 50),
        "subquotient" => (subquotient, 4),
        _ => return None,
    })
}

/// The generator for instance `index`: stream `index` of the seed.
pub fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn unknown(name: &str) -> Error {
    Error::InvalidArgument(format!(
        "unknown suite \"{name}\" (expected one of {})",
        SUITES.join(", ")
    ))
}

pub fn run_instance(name: &str, cfg: &SuiteConfig, index: usize) -> Result<InstanceReport> {
    let (f, _) = suite_fn(name).ok_or_else(|| unknown(name))?;
    Ok(run_one(f, cfg, index))
}

fn run_one(
    f: fn(usize, &mut ChaCha8Rng, &SuiteConfig) -> Outcome,
    cfg: &SuiteConfig,
    index: usize,
) -> InstanceReport {
    let mut rng = instance_rng(cfg.seed, index);
    match f(index, &mut rng, cfg) {
        Ok((description, checks)) => {
            let violation = checks.iter().any(|c| !c.ok);
            InstanceReport {
                index,
                description,
                checks,
                error: None,
                violation,
            }
        }
        Err(e) => InstanceReport {
            index,
            description: String::new(),
            checks: Vec::new(),
            error: Some(e.to_string()),
            violation: true,
        },
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let (f, default) = suite_fn(name).ok_or_else(|| unknown(name))?;
    let count = cfg.instances.unwrap_or(default);
    let results: Vec<InstanceReport> = (0..count)
        .into_par_iter()
        .map(|i| run_one(f, cfg, i))
        .collect();
    let violations = results.iter().filter(|r| r.violation).count();
    Ok(SuiteReport {
        suite: name.to_string(),
        seed: cfg.seed,
        tolerance: cfg.tol,
        instances: count,
        violations,
        results,
    })
}

const EXPONENTS: [&str; 4] = ["1", "3/2", "2", "inf"];
const LATTICE_EXPONENTS: [&str; 3] = ["1", "2", "inf"];

fn exponent(s: &str) -> PExponent {
    s.parse().expect("valid exponent literal")
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// A random leaf norm on `ℝ^d`; polytopes only when `lattice` is false.
fn random_norm(rng: &mut ChaCha8Rng, d: usize, lattice: bool) -> BanachNormSpec {
    let kinds = if lattice || d > 3 { 5 } else { 6 };
    match rng.random_range(0..kinds) {
        0 => BanachNormSpec::lq(PExponent::ONE, d),
        1 => BanachNormSpec::lq(PExponent::TWO, d),
        2 => BanachNormSpec::lq(PExponent::INF, d),
        3 => BanachNormSpec::lq(exponent("3"), d),
        4 => {
            let q = [PExponent::ONE, PExponent::TWO, PExponent::INF][rng.random_range(0..3)];
            let w = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
            BanachNormSpec::weighted(q, w).expect("positive weights")
        }
        _ => loop {
            let pts: Vec<Vec<f64>> = (0..d + 2).map(|_| gaussian_vec(rng, d)).collect();
            if let Ok(e) = BanachNormSpec::polytope(d, &pts) {
                break e;
            }
        },
    }
}

fn random_leaf(rng: &mut ChaCha8Rng, d: usize) -> Node {
    match rng.random_range(0..3) {
        0 => Node::Min(random_norm(rng, d, false)),
        1 => Node::Max(random_norm(rng, d, false)),
        _ => Node::Lattice(random_norm(rng, d, true)),
    }
}

/// `‖T : ℓ^p_n → ℓ^p_k‖`: closed forms at `p ∈ {1, 2, ∞}`, otherwise the
/// power iteration for `|T|`, which converges from below for positive
/// matrices. Callers only pass `D₁ A D₂` with `A` positive.
fn lp_operator_norm(p: PExponent, t: &Mat) -> f64 {
    if p.is_one() {
        return (0..t.ncols())
            .map(|j| t.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    }
    if p.is_infinite() {
        return (0..t.nrows())
            .map(|i| t.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
    }
    if p.is_two() {
        return spectral_norm(t);
    }
    let a = t.map(f64::abs);
    let pv = p.value();
    let mut x = vec![1.0; a.ncols()];
    let mut best: f64 = 0.0;
    for _ in 0..2000 {
        let xn = p.norm(&x);
        x.iter_mut().for_each(|v| *v /= xn);
        let ax: Vec<f64> = (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
            .collect();
        let value = p.norm(&ax);
        if value <= best * (1.0 + 1e-15) {
            best = best.max(value);
            break;
        }
        best = value;
        let y: Vec<f64> = ax.iter().map(|v| v.powf(pv - 1.0)).collect();
        x = (0..a.ncols())
            .map(|j| {
                (0..a.nrows())
                    .map(|i| a[(i, j)] * y[i])
                    .sum::<f64>()
                    .powf(1.0 / (pv - 1.0))
            })
            .collect();
    }
    best
}

/// `sup |⟨a*⊗x*, u⟩|` over the dual balls, by alternating maximisation from
/// random starts; every value found is attained by an elementary functional.
fn elementary_pairing(p: PExponent, e: &BanachNormSpec, u: &Mat, rng: &mut ChaCha8Rng) -> f64 {
    let ed = e.dual();
    let mut best: f64 = 0.0;
    for _ in 0..4 {
        let mut xs = gaussian_vec(rng, u.ncols());
        let r = ed.eval(&xs).expect("dimension");
        xs.iter_mut().for_each(|v| *v /= r);
        for _ in 0..8 {
            let ux: Vec<f64> = (0..u.nrows())
                .map(|i| (0..u.ncols()).map(|j| u[(i, j)] * xs[j]).sum())
                .collect();
            let a = p.norming_functional(&ux);
            let ua: Vec<f64> = (0..u.ncols())
                .map(|j| (0..u.nrows()).map(|i| u[(i, j)] * a[i]).sum())
                .collect();
            xs = e.norming_functional(&ua);
            let r = ed.eval(&xs).expect("dimension");
            if r > 0.0 {
                xs.iter_mut().for_each(|v| *v /= r.max(1.0));
            }
            best = best.max(pairing(&outer(&a, &xs), u).abs());
        }
    }
    best
}

fn rel(excess: f64, scale: f64) -> f64 {
    excess / scale.max(1e-300)
}

fn axioms(index: usize, rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Outcome {
    const ELEMENTARY: &str = "cross-norm axiom: the norm of a⊗x is the product of the norms";
    const PAIRING: &str =
        "cross-norm axiom: elementary functionals a*⊗x* are bounded by the product of their norms";
    const TENSORIAL: &str = "left tensoriality: (T⊗I)u has norm at most ‖T‖‖u‖";
    let p = exponent(EXPONENTS[index % 4]);
    let d = rng.random_range(1..=4);
    let n = rng.random_range(1..=4);
    let (node, e) = match (index / 4) % 3 {
        0 => {
            let e = random_norm(rng, d, false);
            (Node::Min(e.clone()), e)
        }
        1 => {
            let e = random_norm(rng, d, false);
            (Node::Max(e.clone()), e)
        }
        _ => {
            let e = random_norm(rng, d, true);
            (Node::Lattice(e.clone()), e)
        }
    };
    let s = SpaceSpec::new(p, node)?;
    let opts = EvalOptions::default();
    let mut checks = Vec::new();

    let a = gaussian_vec(rng, n);
    let x = gaussian_vec(rng, d);
    let product = p.norm(&a) * e.eval(&x)?;
    let el = eval_node(p, &s.node, &outer(&a, &x), &opts)?;
    let gap = (el.upper - product).abs().max((el.lower - product).abs());
    checks.push(Check::new(
        "elementary",
        ELEMENTARY,
        rel(gap, product),
        cfg.tol,
    ));

    let u = gaussian(rng, n, d);
    let un = eval_node(p, &s.node, &u, &opts)?;
    let sampled = elementary_pairing(p, &e, &u, rng);
    checks.push(Check::new(
        "pairing",
        PAIRING,
        rel(sampled - un.upper, un.upper),
        cfg.tol,
    ));

    let k = rng.random_range(1..=4);
    // D₁ A D₂ with A positive and D_i sign diagonals has the norm of A.
    let left: Vec<f64> = (0..k)
        .map(|_| if rng.random_bool(0.5) { -1.0 } else { 1.0 })
        .collect();
    let right: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.5) { -1.0 } else { 1.0 })
        .collect();
    let t = Mat::from_fn(k, n, |i, j| left[i] * right[j] * rng.random_range(0.0..1.0));
    let tn = lp_operator_norm(p, &t);
    let tu = eval_node(p, &s.node, &(&t * &u), &opts)?;
    checks.push(Check::new(
        "tensorial",
        TENSORIAL,
        rel(tu.upper - tn * un.upper, tn * un.upper),
        cfg.tol,
    ));
    Ok((format!("{}, level {n}", describe(&s)), checks))
}

/// Min/Max leaves and their SumInf/Sum1 combinations, total dimension ≤ 4.
fn random_dual_pair_space(rng: &mut ChaCha8Rng, p: PExponent, index: usize) -> Result<SpaceSpec> {
    let leaf = |rng: &mut ChaCha8Rng, d: usize| {
        let e = random_norm(rng, d, false);
        if rng.random_bool(0.5) {
            Node::Min(e)
        } else {
            Node::Max(e)
        }
    };
    let node = match index % 2 {
        0 => {
            let d = rng.random_range(1..=4);
            leaf(rng, d)
        }
        _ => {
            let d1 = rng.random_range(1..=2);
            let d2 = rng.random_range(1..=2);
            let parts = vec![leaf(rng, d1), leaf(rng, d2)];
            if rng.random_bool(0.5) {
                Node::SumInf(parts)
            } else {
                Node::Sum1(parts)
            }
        }
    };
    SpaceSpec::new(p, node)
}

fn duality(index: usize, rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Outcome {
    const PAIR: &str = "pairing inequality |⟨w, x⟩| ≤ ‖x‖_S ‖w‖_S* at every level";
    const DUAL: &str = "symbolic dual (Min ↔ Max, Sum1 ↔ SumInf) equals the numeric dual norm";
    let p = exponent(EXPONENTS[rng.random_range(0..4)]);
    let s = random_dual_pair_space(rng, p, index)?;
    let m = rng.random_range(1..=2);
    let x = gaussian(rng, m, s.dim());
    let w = gaussian(rng, m, s.dim());
    let dual = dual_spec(&s);
    let tol = cfg.tol.max(1e-4);
    let pair = check_pair(&s, &dual, &x, &w, tol, &EvalOptions::default())?;
    let checks = vec![
        Check::new("pairing", PAIR, pair.pairing_violation, 1e-9),
        Check::new("dual_norm", DUAL, pair.dual_violation, 0.0),
    ];
    Ok((
        format!("{} vs {}, level {m}", describe(&s), describe(&dual)),
        checks,
    ))
}

fn sandwich(_index: usize, rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Outcome {
    const SANDWICH: &str = "the injective norm is dominated by the projective norm";
    const LATTICE: &str = "the lattice norm lies between the injective and projective norms";
    const CERT: &str = "decomposition certificates re-evaluate to their claimed value";
    let p = exponent(EXPONENTS[rng.random_range(0..4)]);
    let d = rng.random_range(1..=4);
    let m = rng.random_range(1..=4);
    let e = random_norm(rng, d, false);
    let t = gaussian(rng, m, d);
    let opts = EvalOptions::default();
    let inj = injective_norm_with(p, &e, &t, &opts)?;
    let proj = projective_norm_with(p, &e, &t, &opts)?;
    let scale = proj.upper;
    let mut checks = vec![
        Check::new(
            "upper",
            SANDWICH,
            rel(inj.upper - proj.upper, scale),
            cfg.tol,
        ),
        Check::new(
            "lower",
            SANDWICH,
            rel(inj.lower - proj.lower, scale),
            cfg.tol,
        ),
    ];
    if e.is_lattice_norm() {
        let l = lattice_norm(p, &e, &t)?;
        checks.push(Check::new(
            "lattice_above_injective",
            LATTICE,
            rel(inj.lower - l, scale),
            cfg.tol,
        ));
        checks.push(Check::new(
            "lattice_below_projective",
            LATTICE,
            rel(l - proj.upper, scale),
            cfg.tol,
        ));
    }
    if let UpperCertificate::Decomposition(terms) = &proj.upper_certificate {
        let value = decomposition_value(p, &e, terms);
        let sum = decomposition_sum(m, d, terms);
        checks.push(Check::new(
            "certificate_value",
            CERT,
            rel((value - proj.upper).abs(), scale),
            1e-9,
        ));
        checks.push(Check::new(
            "certificate_sum",
            CERT,
            rel(max_abs(&(&sum - &t)), max_abs(&t)),
            1e-9,
        ));
    }
    Ok((format!("{e:?} at p = {p}, level {m}"), checks))
}

fn lattice_max(_index: usize, rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Outcome {
    const REF: &str =
        "on ℓ¹ the lattice p-multinorm equals the maximal one, Σ_j (Σ_i |t_ij|^p)^{1/p}";
    let p = exponent(LATTICE_EXPONENTS[rng.random_range(0..3)]);
    let d = rng.random_range(1..=5);
    let m = rng.random_range(1..=4);
    let t = gaussian(rng, m, d);
    let entry = lattice_max_entry(p, &t, &EvalOptions::default())?;
    Ok((
        format!("l^1_{d} at p = {p}, level {m}"),
        vec![Check::new("gap", REF, entry.gap, cfg.tol)],
    ))
}

/// Separation of two intervals relative to `scale`; zero when they overlap.
fn separation(a: (f64, f64), b: (f64, f64), scale: f64) -> f64 {
    rel((a.0 - b.1).max(b.0 - a.1).max(0.0), scale)
}

fn control(index: usize, rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Outcome {
    const TRACE: &str = "the p-multibounded norm of a map into Max(l^{p'}_n) is its level-n norm, computed by trace duality";
    const FLAT: &str = "rank-one maps have a flat level profile";
    const MONOTONE: &str = "level norms are nondecreasing and dominate the operator norm";
    const POSITIVE: &str = "positive maps between lattices have a flat level profile";
    let p = exponent(LATTICE_EXPONENTS[rng.random_range(0..3)]);
    let opts = LevelOptions {
        restarts: cfg.restarts,
        seed: index as u64,
        ..LevelOptions::default()
    };
    let levels = cfg.levels.max(1);
    match index % 4 {
        0 => {
            let d = rng.random_range(1..=3);
            let n = rng.random_range(1..=2);
            let domain = SpaceSpec::new(p, random_leaf(rng, d))?;
            let codomain = SpaceSpec::max(p, BanachNormSpec::lq(p.conjugate(), n));
            let u = OperatorRep::new(domain.clone(), codomain, gaussian(rng, n, d))?;
            let by_trace = norm_to_max_with(&u, &opts.eval)?;
            let direct = level_m_norm_with(
                &u,
                n,
                &LevelOptions {
                    trace_duality: false,
                    ..opts
                },
            )?;
            let sep = separation(
                (by_trace.lower, by_trace.upper),
                (direct.lower, direct.upper),
                by_trace.upper,
            );
            Ok((
                format!("{} -> Max(l^{}_{n})", describe(&domain), p.conjugate()),
                vec![Check::new("trace_duality", TRACE, sep, 1e-9)],
            ))
        }
        1 | 2 => {
            let d = rng.random_range(1..=3);
            let k = rng.random_range(1..=3);
            let domain = SpaceSpec::new(p, random_leaf(rng, d))?;
            let codomain = SpaceSpec::new(p, random_leaf(rng, k))?;
            let rank_one = index % 4 == 1;
            let matrix = if rank_one {
                outer(&gaussian_vec(rng, k), &gaussian_vec(rng, d))
            } else {
                gaussian(rng, k, d)
            };
            let u = OperatorRep::new(domain.clone(), codomain.clone(), matrix)?;
            let profile: Vec<(f64, f64)> = (1..=levels)
                .map(|m| level_m_norm_with(&u, m, &opts).map(|e| (e.lower, e.upper)))
                .collect::<Result<_>>()?;
            let scale = profile.iter().map(|l| l.1).fold(0.0, f64::max);
            let mut checks = Vec::new();
            if rank_one {
                let v = profile[0].0;
                let spread = profile
                    .iter()
                    .map(|l| (l.1 - v).max(v - l.0))
                    .fold(0.0, f64::max);
                checks.push(Check::new("flat", FLAT, rel(spread, v), 1e-4));
            }
            let mut worst: f64 = 0.0;
            for i in 0..profile.len() {
                for j in i..profile.len() {
                    worst = worst.max(profile[i].0 - profile[j].1);
                }
            }
            checks.push(Check::new("monotone", MONOTONE, rel(worst, scale), cfg.tol));
            let what = if rank_one { "rank one" } else { "random" };
            Ok((
                format!(
                    "{what} {} -> {}, levels 1..{levels}",
                    describe(&domain),
                    describe(&codomain)
                ),
                checks,
            ))
        }
        _ => {
            let d = rng.random_range(1..=3);
            let k = rng.random_range(1..=3);
            let domain = SpaceSpec::lattice(p, random_norm(rng, d, true))?;
            let codomain = SpaceSpec::lattice(p, random_norm(rng, k, true))?;
            let matrix = Mat::from_fn(k, d, |_, _| rng.random_range(0.0..1.0));
            let u = OperatorRep::new(domain.clone(), codomain.clone(), matrix)?;
            let profile: Vec<(f64, f64)> = (1..=levels)
                .map(|m| level_m_norm_with(&u, m, &opts).map(|e| (e.lower, e.upper)))
                .collect::<Result<_>>()?;
            let spread = profile
                .iter()
                .map(|l| separation(*l, profile[0], profile[0].1))
                .fold(0.0, f64::max);
            Ok((
                format!(
                    "positive {} -> {}, levels 1..{levels}",
                    describe(&domain),
                    describe(&codomain)
                ),
                vec![Check::new("flat", POSITIVE, spread, cfg.tol)],
            ))
        }
    }
}

fn discretize(index: usize, rng: &mut ChaCha8Rng, _cfg: &SuiteConfig) -> Outcome {
    const REF: &str = "a finite-dimensional subspace of l^p is almost contained in a finite-dimensional sublattice with a positive contractive projection";
    let p = exponent(LATTICE_EXPONENTS[index % 3]);
    let eps = [0.25, 0.5][(index / 3) % 2];
    let n = rng.random_range(1..=3);
    let big_n = rng.random_range(n..=50);
    let weights = (0..big_n).map(|_| rng.random_range(0.5..2.0)).collect();
    let space = DiscreteLpSpace::new(p, weights)?;
    let z = gaussian(rng, n, big_n);
    let res = sublattice_discretize(&space, &z, eps)?;
    let checks = vec![
        Check::new("positive", REF, -res.min_entry(), 0.0),
        Check::new("idempotent", REF, res.idempotence_error(), 1e-9),
        Check::new("contractive", REF, res.contraction_norm() - 1.0, 1e-9),
        Check::new("cells", REF, res.m as f64, res.m0 as f64),
        Check::new("deviation", REF, res.deviation_bound(), 2.0 * eps + 1e-8),
    ];
    Ok((format!("dim {n} in l^{p}_{big_n}, eps {eps}"), checks))
}

fn inject(index: usize, rng: &mut ChaCha8Rng, _cfg: &SuiteConfig) -> Outcome {
    const REF: &str = "Max(l^{p'}_n) is 1-injective: maps from a subspace extend with no increase of the p-multibounded norm";
    let p = exponent(LATTICE_EXPONENTS[index % 3]);
    let dy = rng.random_range(2..=4);
    let dx = rng.random_range(1..=(dy - 1).min(3));
    let n = rng.random_range(1..=2);
    let y = SpaceSpec::new(p, random_leaf(rng, dy))?;
    let x = SpaceSpec::subspace(y.clone(), gaussian(rng, dx, dy))?;
    let u = OperatorRep::new(
        x,
        SpaceSpec::max(p, BanachNormSpec::lq(p.conjugate(), n)),
        gaussian(rng, n, dx),
    )?;
    let opts = LevelOptions {
        restarts: 4,
        seed: index as u64,
        ..LevelOptions::default()
    };
    let ext = extend_to_max(&u, 1e-3, &opts)?;
    let checks = vec![
        Check::new("ratio", REF, ext.ratio, 1.0 + 1e-3),
        Check::new("residual", REF, ext.residual, 1e-9),
    ];
    Ok((
        format!(
            "dim {dx} in {}, into Max(l^{}_{n})",
            describe(&y),
            p.conjugate()
        ),
        checks,
    ))
}

fn project(index: usize, rng: &mut ChaCha8Rng, _cfg: &SuiteConfig) -> Outcome {
    const REF: &str = "Min(l^{p'}_n) is 1-projective: maps into a quotient lift with arbitrarily small increase of the p-multibounded norm";
    let p = exponent(LATTICE_EXPONENTS[index % 3]);
    let dy = rng.random_range(2..=4);
    let k = rng.random_range(1..=(dy - 1).min(3));
    let n = rng.random_range(1..=2);
    let y = SpaceSpec::new(p, random_leaf(rng, dy))?;
    let quot = SpaceSpec::quotient(y.clone(), gaussian(rng, k, dy))?;
    let u = OperatorRep::new(
        SpaceSpec::min(p, BanachNormSpec::lq(p.conjugate(), n)),
        quot,
        gaussian(rng, k, n),
    )?;
    let opts = LevelOptions {
        restarts: 4,
        seed: index as u64,
        ..LevelOptions::default()
    };
    let lift = lift_operator(&u, 1e-3, &opts)?;
    let checks = vec![
        Check::new("ratio", REF, lift.ratio, 1.0 + 1e-2),
        Check::new("residual", REF, lift.residual, 1e-9),
    ];
    Ok((
        format!(
            "Min(l^{}_{n}) -> {} / rank {k}",
            p.conjugate(),
            describe(&y)
        ),
        checks,
    ))
}

fn subquotient(index: usize, rng: &mut ChaCha8Rng, cfg: &SuiteConfig) -> Outcome {
    const LATTICE: &str = "on ℓ¹ the lattice p-multinorm equals the maximal one";
    const QUOTIENT: &str =
        "each stage Max(ℓ¹_d) → Max(ℓ^{p'}_n) is a p-quotient up to its quotient constant";
    let p = if index % 2 == 0 {
        PExponent::ONE
    } else {
        PExponent::INF
    };
    let d = rng.random_range(1..=2);
    let s = SpaceSpec::new(p, random_leaf(rng, d))?;
    let opts = LevelOptions {
        restarts: 2,
        seed: rng.random(),
        ..LevelOptions::default()
    };
    let rep = subquotient_demo(&s, &[(d, 4 * d)], 0.25, 6, &opts)?;
    let mut checks = vec![Check::new(
        "lattice_max",
        LATTICE,
        rep.lattice_max_gap,
        cfg.tol,
    )];
    for st in &rep.stages {
        checks.push(Check::new(
            "stage_lift",
            QUOTIENT,
            st.max_lift_ratio,
            st.quotient_constant * (1.0 + 1e-3),
        ));
    }
    Ok((
        format!("{}, distortion {:.6}", describe(&s), rep.distortion),
        checks,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_norms_of_coefficient_grids() {
        let t = Mat::from_row_slice(2, 2, &[1.0, 2.0, 0.5, 1.0]);
        assert_eq!(lp_operator_norm(PExponent::ONE, &t), 3.0);
        assert_eq!(lp_operator_norm(PExponent::INF, &t), 3.0);
        // Rank one: ‖a bᵀ‖_{p→p} = ‖a‖_p ‖b‖_{p′}.
        let p = exponent("3/2");
        let (a, b) = ([1.0, 0.5], [1.0, 2.0]);
        let oracle = p.norm(&a) * p.conjugate().norm(&b);
        assert!((lp_operator_norm(p, &t) - oracle).abs() < 1e-9 * oracle);
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = instance_rng(5, 3).random();
        let _: f64 = instance_rng(5, 2).random();
        let b: f64 = instance_rng(5, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, instance_rng(5, 4).random::<f64>());
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn every_suite_runs_a_few_instances() {
        for name in SUITES {
            let cfg = SuiteConfig {
                seed: 3,
                instances: Some(2),
                levels: 2,
                restarts: 2,
                ..SuiteConfig::default()
            };
            let rep = run_suite(name, &cfg).unwrap();
            assert_eq!(
                rep.violations,
                0,
                "{}",
                serde_json::to_string_pretty(&rep).unwrap()
            );
        }
    }
}
