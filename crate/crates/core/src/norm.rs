//! Computable norms on ℝ^d: ℓ^q, weighted ℓ^q and symmetric polytope balls.

use crate::error::{Error, Result};
use crate::exponent::{argmax_abs, PExponent};
use crate::linalg::{dot, Mat};

/// Ball vertex lists larger than this are not enumerated.
pub const MAX_VERTEX_PAIRS: usize = 1 << 12;

/// A norm on a finite-dimensional space, with enough dual information to
/// certify bounds: `‖x‖`, the dual norm `‖g‖_*` and a maximiser of `⟨g, ·⟩`
/// over the unit ball.
pub trait FiniteNorm {
    fn dim(&self) -> usize;
    fn norm(&self, x: &[f64]) -> f64;
    fn dual_norm(&self, g: &[f64]) -> f64;
    /// Some `x` with `‖x‖ ≤ 1` and `⟨g, x⟩ = ‖g‖_*`.
    fn norming_element(&self, g: &[f64]) -> Vec<f64>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    /// One representative of each `±v` pair.
    vertices: Vec<Vec<f64>>,
    /// Facet normals `f` with `‖x‖ = max_f |⟨f, x⟩|`, one per `±f` pair.
    facets: Vec<Vec<f64>>,
}

impl Polytope {
    pub fn from_vertices(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().all(|v| *v == 0.0) {
                continue;
            }
            let dup = vertices.iter().any(|v| {
                let same = v.iter().zip(p).all(|(a, b)| (a - b).abs() < 1e-12);
                let opp = v.iter().zip(p).all(|(a, b)| (a + b).abs() < 1e-12);
                same || opp
            });
            if !dup {
                vertices.push(p.clone());
            }
        }
        let span = Mat::from_fn(vertices.len(), dim, |i, j| vertices[i][j]);
        if vertices.len() < dim || crate::linalg::rank(&span, 1e-10) < dim {
            return Err(Error::InvalidNorm(
                "polytope vertices do not span the space".into(),
            ));
        }
        let facets = polar_vertices(dim, &vertices);
        if facets.is_empty() {
            return Err(Error::InvalidNorm(
                "could not enumerate polytope facets".into(),
            ));
        }
        Ok(Self { vertices, facets })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Vec<f64>] {
        &self.facets
    }

    fn polar(&self) -> Self {
        Self {
            vertices: self.facets.clone(),
            facets: self.vertices.clone(),
        }
    }
}

/// Vertices of the polar of the symmetric hull of `vertices`: each is the
/// solution `f` of `⟨f, v⟩ = 1` on some `d` signed vertices with
/// `|⟨f, w⟩| ≤ 1` for all of them.
fn polar_vertices(dim: usize, vertices: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let signed: Vec<Vec<f64>> = vertices
        .iter()
        .flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()])
        .collect();
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    let n = signed.len();
    loop {
        // Only subsets whose first element is a positive representative; the
        // negated subset gives −f.
        if idx[0] % 2 == 0 {
            let a = Mat::from_fn(dim, dim, |i, j| signed[idx[i]][j]);
            if let Some(inv) = a.clone().try_inverse() {
                let f: Vec<f64> = (inv * crate::linalg::Vector::from_element(dim, 1.0))
                    .iter()
                    .copied()
                    .collect();
                let ok = vertices.iter().all(|v| dot(&f, v).abs() <= 1.0 + 1e-9);
                let dup = out.iter().any(|g| {
                    g.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-9)
                        || g.iter().zip(&f).all(|(a, b)| (a + b).abs() < 1e-9)
                });
                if ok && !dup {
                    out.push(f);
                }
            }
        }
        // Next combination.
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - dim + i {
                idx[i] += 1;
                for k in i + 1..dim {
                    idx[k] = idx[k - 1] + 1;
                }
                break;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormKind {
    Lq(PExponent),
    /// `(Σ w_i |x_i|^q)^{1/q}`, and `max_i w_i |x_i|` at `q = ∞`.
    WeightedLq {
        q: PExponent,
        weights: Vec<f64>,
    },
    Polytope(Polytope),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BanachNormSpec {
    dim: usize,
    kind: NormKind,
}

impl BanachNormSpec {
    pub fn lq(q: PExponent, dim: usize) -> Self {
        Self {
            dim,
            kind: NormKind::Lq(q),
        }
    }

    pub fn weighted(q: PExponent, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidNorm(
                "weights must be positive and finite".into(),
            ));
        }
        Ok(Self {
            dim: weights.len(),
            kind: NormKind::WeightedLq { q, weights },
        })
    }

    pub fn polytope(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        Ok(Self {
            dim,
            kind: NormKind::Polytope(Polytope::from_vertices(dim, points)?),
        })
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> Option<PExponent> {
        match &self.kind {
            NormKind::Lq(q) | NormKind::WeightedLq { q, .. } => Some(*q),
            NormKind::Polytope(_) => None,
        }
    }

    pub fn is_lattice_norm(&self) -> bool {
        !matches!(self.kind, NormKind::Polytope(_))
    }

    /// Coordinate scales `s` with `‖x‖ = ‖s ∘ x‖_q`.
    pub fn scales(&self) -> Option<Vec<f64>> {
        match &self.kind {
            NormKind::Lq(_) => Some(vec![1.0; self.dim]),
            NormKind::WeightedLq { q, weights } => Some(match q {
                PExponent::Infinite => weights.clone(),
                _ => weights.iter().map(|w| w.powf(q.reciprocal())).collect(),
            }),
            NormKind::Polytope(_) => None,
        }
    }

    /// Scales of a weighted Euclidean norm, `None` otherwise.
    pub fn euclidean_scales(&self) -> Option<Vec<f64>> {
        match self.exponent() {
            Some(q) if q.is_two() => self.scales(),
            _ => None,
        }
    }

    pub fn dual(&self) -> BanachNormSpec {
        match &self.kind {
            NormKind::Lq(q) => Self::lq(q.conjugate(), self.dim),
            NormKind::WeightedLq { q, .. } => {
                let qc = q.conjugate();
                let s = self.scales().expect("weighted");
                let weights = s
                    .iter()
                    .map(|si| match qc {
                        PExponent::Infinite => 1.0 / si,
                        _ => si.powf(-qc.value()),
                    })
                    .collect();
                Self {
                    dim: self.dim,
                    kind: NormKind::WeightedLq { q: qc, weights },
                }
            }
            NormKind::Polytope(p) => Self {
                dim: self.dim,
                kind: NormKind::Polytope(p.polar()),
            },
        }
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// Norm with dimension checking.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(FiniteNorm::norm(self, x))
    }

    /// A dual vector `g` with `‖g‖_* ≤ 1` and `⟨g, x⟩ = ‖x‖`.
    pub fn norming_functional(&self, x: &[f64]) -> Vec<f64> {
        self.dual().norming_element(x)
    }

    /// Extreme points of the unit ball, one per `±` pair, when there are few.
    pub fn ball_vertices(&self) -> Option<Vec<Vec<f64>>> {
        let d = self.dim;
        match &self.kind {
            NormKind::Polytope(p) => Some(p.vertices.clone()),
            _ => {
                let q = self.exponent().expect("lq");
                let s = self.scales().expect("lq");
                if q.is_one() {
                    Some(
                        (0..d)
                            .map(|i| {
                                let mut v = vec![0.0; d];
                                v[i] = 1.0 / s[i];
                                v
                            })
                            .collect(),
                    )
                } else if q.is_infinite() {
                    if d > 13 {
                        return None;
                    }
                    let count = 1usize << (d - 1);
                    Some(
                        (0..count)
                            .map(|mask| {
                                (0..d)
                                    .map(|i| {
                                        let sign = if i > 0 && (mask >> (i - 1)) & 1 == 1 {
                                            -1.0
                                        } else {
                                            1.0
                                        };
                                        sign / s[i]
                                    })
                                    .collect()
                            })
                            .collect(),
                    )
                } else {
                    None
                }
            }
        }
    }

    pub fn vertex_count(&self) -> Option<usize> {
        match &self.kind {
            NormKind::Polytope(p) => Some(p.vertices.len()),
            _ => {
                let q = self.exponent()?;
                if q.is_one() {
                    Some(self.dim)
                } else if q.is_infinite() && self.dim <= 13 {
                    Some(1 << (self.dim - 1))
                } else {
                    None
                }
            }
        }
    }
}

impl FiniteNorm for BanachNormSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn norm(&self, x: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Lq(q) => q.norm(x),
            NormKind::WeightedLq { q, .. } => {
                let s = self.scales().expect("weighted");
                let y: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a * b).collect();
                q.norm(&y)
            }
            NormKind::Polytope(p) => p.facets.iter().fold(0.0_f64, |m, f| m.max(dot(f, x).abs())),
        }
    }

    fn dual_norm(&self, g: &[f64]) -> f64 {
        match &self.kind {
            NormKind::Lq(q) => q.conjugate().norm(g),
            NormKind::WeightedLq { q, .. } => {
                let s = self.scales().expect("weighted");
                let y: Vec<f64> = g.iter().zip(&s).map(|(a, b)| a / b).collect();
                q.conjugate().norm(&y)
            }
            NormKind::Polytope(p) => p
                .vertices
                .iter()
                .fold(0.0_f64, |m, v| m.max(dot(v, g).abs())),
        }
    }

    fn norming_element(&self, g: &[f64]) -> Vec<f64> {
        match &self.kind {
            NormKind::Lq(q) => q.conjugate().norming_functional(g),
            NormKind::WeightedLq { q, .. } => {
                let s = self.scales().expect("weighted");
                let y: Vec<f64> = g.iter().zip(&s).map(|(a, b)| a / b).collect();
                let h = q.conjugate().norming_functional(&y);
                h.iter().zip(&s).map(|(a, b)| a / b).collect()
            }
            NormKind::Polytope(p) => {
                if g.iter().all(|v| *v == 0.0) {
                    return vec![0.0; self.dim];
                }
                let vals: Vec<f64> = p.vertices.iter().map(|v| dot(v, g)).collect();
                let k = argmax_abs(&vals);
                let sign = if vals[k] < 0.0 { -1.0 } else { 1.0 };
                p.vertices[k].iter().map(|v| sign * v).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{LinearProgram, Sense, VarBound};
    use proptest::prelude::*;

    /// Gauge of the symmetric hull by linear programming: min Σ|λ_k| with Σ λ_k v_k = x.
    fn lp_gauge(vertices: &[Vec<f64>], x: &[f64]) -> f64 {
        let k = vertices.len();
        let mut c = vec![0.0; 2 * k];
        c.iter_mut().for_each(|v| *v = 1.0);
        let mut lp = LinearProgram::new(c);
        for i in 0..x.len() {
            let mut row = vec![0.0; 2 * k];
            for (j, v) in vertices.iter().enumerate() {
                row[j] = v[i];
                row[k + j] = -v[i];
            }
            lp.add_row(row, Sense::Eq, x[i]);
        }
        for j in 0..2 * k {
            lp.set_bound(j, VarBound::NonNeg);
        }
        lp.solve().unwrap().objective
    }

    fn hexagon() -> Vec<Vec<f64>> {
        (0..6)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / 3.0;
                vec![t.cos(), t.sin()]
            })
            .collect()
    }

    #[test]
    fn spec_examples() {
        let e = BanachNormSpec::lq(PExponent::TWO, 2);
        assert_eq!(e.eval(&[3.0, 4.0]).unwrap(), 5.0);
        let e = BanachNormSpec::lq(PExponent::INF, 2);
        assert_eq!(e.eval(&[1.0, -2.0]).unwrap(), 2.0);
        let e = BanachNormSpec::polytope(
            2,
            &[
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
        )
        .unwrap();
        assert!((e.eval(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!(e.eval(&[1.0]).is_err());
    }

    #[test]
    fn polytope_gauge_matches_lp() {
        let hex = BanachNormSpec::polytope(2, &hexagon()).unwrap();
        let NormKind::Polytope(p) = hex.kind() else {
            unreachable!()
        };
        assert_eq!(p.facets().len(), 3);
        for x in [[1.0, 0.0], [0.3, -0.7], [2.0, 5.0], [-0.1, 0.05]] {
            let g = lp_gauge(p.vertices(), &x);
            assert!((hex.norm(&x) - g).abs() < 1e-9 * g.max(1.0));
        }
    }

    #[test]
    fn weighted_dual_is_dual() {
        let w = BanachNormSpec::weighted(PExponent::finite(3, 2).unwrap(), vec![2.0, 0.5, 1.0])
            .unwrap();
        let g = [0.4, -1.0, 2.0];
        let x = w.norming_element(&g);
        assert!((w.norm(&x) - 1.0).abs() < 1e-12);
        assert!((dot(&g, &x) - w.dual_norm(&g)).abs() < 1e-12);
        assert!((w.dual().norm(&g) - w.dual_norm(&g)).abs() < 1e-12);
        let back = w.dual().dual();
        assert!((back.norm(&g) - w.norm(&g)).abs() < 1e-12);
    }

    fn arb_norm() -> impl Strategy<Value = BanachNormSpec> {
        prop_oneof![
            Just(BanachNormSpec::lq(PExponent::ONE, 3)),
            Just(BanachNormSpec::lq(PExponent::finite(3, 2).unwrap(), 3)),
            Just(BanachNormSpec::lq(PExponent::INF, 3)),
            prop::collection::vec(0.1f64..5.0, 3).prop_map(|w| BanachNormSpec::weighted(
                PExponent::integer(3).unwrap(),
                w
            )
            .unwrap()),
            prop::collection::vec(0.1f64..5.0, 3).prop_map(|w| BanachNormSpec::weighted(
                PExponent::INF,
                w
            )
            .unwrap()),
            prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 4..7)
                .prop_filter_map("full rank", |v| BanachNormSpec::polytope(3, &v).ok()),
        ]
    }

    proptest! {
        #[test]
        fn norm_axioms(n in arb_norm(), x in prop::collection::vec(-3.0f64..3.0, 3), y in prop::collection::vec(-3.0f64..3.0, 3), t in -4.0f64..4.0) {
            let nx = n.norm(&x);
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert!((n.norm(&neg) - nx).abs() <= 1e-12 * nx.max(1.0));
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            prop_assert!((n.norm(&tx) - t.abs() * nx).abs() <= 1e-10 * nx.max(1.0));
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            prop_assert!(n.norm(&s) <= nx + n.norm(&y) + 1e-10);
            prop_assert!(n.norm(&[0.0; 3]) == 0.0);
            if x.iter().any(|v| *v != 0.0) { prop_assert!(nx > 0.0); }
            let g = n.norming_functional(&x);
            prop_assert!(n.dual_norm(&g) <= 1.0 + 1e-9);
            prop_assert!((dot(&g, &x) - nx).abs() <= 1e-9 * nx.max(1.0));
        }
    }
}
