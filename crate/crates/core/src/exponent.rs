//! Exact exponents `p ∈ [1, ∞]` and the ℓ^p arithmetic built on them.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exponent `p ∈ [1, ∞]`, stored exactly as a rational or the infinity token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PExponent {
    Finite(Ratio<i64>),
    Infinite,
}

impl PExponent {
    pub const ONE: PExponent = PExponent::Finite(Ratio::new_raw(1, 1));
    pub const TWO: PExponent = PExponent::Finite(Ratio::new_raw(2, 1));
    pub const INF: PExponent = PExponent::Infinite;

    pub fn finite(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidExponent(format!("{num}/{den}")));
        }
        let r = Ratio::new(num, den);
        if r < Ratio::one() {
            return Err(Error::InvalidExponent(format!("{r} < 1")));
        }
        Ok(PExponent::Finite(r))
    }

    pub fn integer(p: i64) -> Result<Self> {
        Self::finite(p, 1)
    }

    /// The conjugate exponent `p′` with `1/p + 1/p′ = 1`.
    pub fn conjugate(self) -> Self {
        match self {
            PExponent::Infinite => PExponent::ONE,
            PExponent::Finite(r) if r.is_one() => PExponent::Infinite,
            PExponent::Finite(r) => PExponent::Finite(r / (r - Ratio::one())),
        }
    }

    pub fn is_one(self) -> bool {
        matches!(self, PExponent::Finite(r) if r.is_one())
    }

    pub fn is_two(self) -> bool {
        matches!(self, PExponent::Finite(r) if r == Ratio::from_integer(2))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PExponent::Infinite)
    }

    /// Strictly between 1 and ∞, i.e. the unit ball is smooth and strictly convex.
    pub fn is_interior(self) -> bool {
        !self.is_one() && !self.is_infinite()
    }

    pub fn value(self) -> f64 {
        match self {
            PExponent::Infinite => f64::INFINITY,
            PExponent::Finite(r) => r.to_f64().unwrap_or(f64::INFINITY),
        }
    }

    /// `1/p`, exactly zero at infinity.
    pub fn reciprocal(self) -> f64 {
        match self {
            PExponent::Infinite => 0.0,
            PExponent::Finite(r) => (Ratio::one() / r).to_f64().unwrap_or(0.0),
        }
    }

    /// `(Σ|x_i|^p)^{1/p}`, or `max |x_i|` at infinity.
    pub fn norm(self, x: &[f64]) -> f64 {
        match self {
            PExponent::Infinite => x.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            _ if self.is_one() => x.iter().map(|v| v.abs()).sum(),
            _ if self.is_two() => scaled_euclid(x),
            _ => {
                let p = self.value();
                let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                if scale == 0.0 {
                    return 0.0;
                }
                let s: f64 = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
                scale * s.powf(1.0 / p)
            }
        }
    }

    /// A vector `g` in the unit ball of ℓ^{p′} with `⟨g, x⟩ = ‖x‖_p`.
    pub fn norming_functional(self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        let nrm = self.norm(x);
        if nrm == 0.0 {
            return g;
        }
        match self {
            PExponent::Infinite => {
                let k = argmax_abs(x);
                g[k] = x[k].signum();
            }
            _ if self.is_one() => {
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi = if *xi == 0.0 { 0.0 } else { xi.signum() };
                }
            }
            _ => {
                let p = self.value();
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi = xi.signum() * (xi.abs() / nrm).powf(p - 1.0);
                }
            }
        }
        g
    }
}

pub(crate) fn scaled_euclid(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * s.sqrt()
}

pub(crate) fn argmax_abs(x: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    best
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Infinite => write!(f, "inf"),
            PExponent::Finite(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            PExponent::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for PExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => return Ok(PExponent::Infinite),
            _ => {}
        }
        let bad = || Error::InvalidExponent(s.to_string());
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            return PExponent::finite(n, d);
        }
        if let Ok(n) = t.parse::<i64>() {
            return PExponent::integer(n);
        }
        // Terminating decimals such as "1.5" are accepted and stored exactly.
        if let Some((int, frac)) = t.split_once('.') {
            if frac.len() <= 9 && frac.chars().all(|c| c.is_ascii_digit()) {
                let den = 10_i64.pow(frac.len() as u32);
                let int: i64 = if int.is_empty() {
                    0
                } else {
                    int.parse().map_err(|_| bad())?
                };
                let frac_v: i64 = if frac.is_empty() {
                    0
                } else {
                    frac.parse().map_err(|_| bad())?
                };
                return PExponent::finite(int * den + frac_v, den);
            }
        }
        Err(bad())
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        let raw = Raw::deserialize(d)?;
        let parsed = match raw {
            Raw::Str(s) => s.parse(),
            Raw::Int(i) => PExponent::integer(i),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

impl Default for PExponent {
    fn default() -> Self {
        PExponent::TWO
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_examples() {
        assert_eq!(PExponent::ONE.conjugate(), PExponent::INF);
        assert_eq!(PExponent::TWO.conjugate(), PExponent::TWO);
        let p = PExponent::finite(4, 3).unwrap();
        assert_eq!(p.conjugate(), PExponent::integer(4).unwrap());
        assert_eq!(PExponent::INF.conjugate(), PExponent::ONE);
    }

    #[test]
    fn conjugate_is_involution_and_reciprocals_sum_to_one() {
        for (n, d) in [(1, 1), (3, 2), (2, 1), (5, 3), (7, 1), (4, 3)] {
            let p = PExponent::finite(n, d).unwrap();
            assert_eq!(p.conjugate().conjugate(), p);
            let s = p.reciprocal() + p.conjugate().reciprocal();
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_below_one() {
        assert!(PExponent::finite(1, 2).is_err());
        assert!("0".parse::<PExponent>().is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["1", "2", "3/2", "inf", "4/3"] {
            let p: PExponent = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert_eq!(
            "1.5".parse::<PExponent>().unwrap(),
            PExponent::finite(3, 2).unwrap()
        );
    }

    #[test]
    fn norms_and_norming_functionals() {
        let x = [3.0, -4.0];
        assert_eq!(PExponent::TWO.norm(&x), 5.0);
        assert_eq!(PExponent::INF.norm(&[1.0, -2.0]), 2.0);
        assert_eq!(PExponent::ONE.norm(&x), 7.0);
        for p in [
            PExponent::ONE,
            PExponent::TWO,
            PExponent::INF,
            PExponent::finite(3, 2).unwrap(),
        ] {
            let g = p.norming_functional(&x);
            let pairing: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
            assert!((pairing - p.norm(&x)).abs() < 1e-12);
            assert!(p.conjugate().norm(&g) <= 1.0 + 1e-12);
        }
    }
}
