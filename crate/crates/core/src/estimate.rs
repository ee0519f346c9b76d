//! Certified intervals for norm values.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::linalg::{pairing, to_rows, Mat};

/// How an upper bound was obtained.
#[derive(Clone, Debug)]
pub enum UpperCertificate {
    /// Closed form; the lower witness attains it.
    Exact,
    /// `Σ_k a_k ⊗ x_k` with `Σ ‖a_k‖_p ‖x_k‖ = upper`.
    Decomposition(Vec<(Vec<f64>, Vec<f64>)>),
    /// A feasible point of an infimum (a coset representative, an extension, a lift).
    PrimalPoint(Mat),
    /// Branch and bound over the unit sphere of one factor; the number of open boxes.
    BranchAndBound { boxes: usize },
    /// Upper bound of a maximisation derived from a structural inequality.
    Bound(String),
}

impl UpperCertificate {
    pub fn label(&self) -> &'static str {
        match self {
            UpperCertificate::Exact => "exact",
            UpperCertificate::Decomposition(_) => "decomposition",
            UpperCertificate::PrimalPoint(_) => "primal_point",
            UpperCertificate::BranchAndBound { .. } => "branch_and_bound",
            UpperCertificate::Bound(_) => "bound",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    /// A dual tensor `w` with dual norm `≤ 1` and `⟨w, e⟩ = lower`.
    pub witness: Mat,
    pub upper_certificate: UpperCertificate,
    pub tolerance: f64,
    pub converged: bool,
}

impl NormEstimate {
    pub fn exact(value: f64, witness: Mat) -> Self {
        Self {
            lower: value,
            upper: value,
            witness,
            upper_certificate: UpperCertificate::Exact,
            tolerance: 0.0,
            converged: true,
        }
    }

    pub fn zero(m: usize, d: usize) -> Self {
        Self::exact(0.0, Mat::zeros(m, d))
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn relative_width(&self) -> f64 {
        self.width() / self.upper.abs().max(f64::MIN_POSITIVE)
    }

    /// Recomputes `⟨w, e⟩` from the stored witness.
    pub fn witness_pairing(&self, e: &Mat) -> f64 {
        pairing(&self.witness, e)
    }

    pub fn scaled(mut self, t: f64) -> Self {
        let t = t.abs();
        self.lower *= t;
        self.upper *= t;
        self
    }
}

impl Serialize for NormEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Certs<'a> {
            lower_witness: Vec<Vec<f64>>,
            upper: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            upper_detail: Option<serde_json::Value>,
            tolerance: f64,
            converged: bool,
        }
        let detail = match &self.upper_certificate {
            UpperCertificate::Decomposition(terms) => Some(serde_json::json!(terms
                .iter()
                .map(|(a, x)| serde_json::json!({"a": a, "x": x}))
                .collect::<Vec<_>>())),
            UpperCertificate::PrimalPoint(x) => Some(serde_json::json!(to_rows(x))),
            UpperCertificate::BranchAndBound { boxes } => {
                Some(serde_json::json!({ "open_boxes": boxes }))
            }
            UpperCertificate::Bound(why) => Some(serde_json::json!(why)),
            UpperCertificate::Exact => None,
        };
        let mut st = s.serialize_struct("NormEstimate", 3)?;
        st.serialize_field("lower", &self.lower)?;
        st.serialize_field("upper", &self.upper)?;
        st.serialize_field(
            "certificates",
            &Certs {
                lower_witness: to_rows(&self.witness),
                upper: self.upper_certificate.label(),
                upper_detail: detail,
                tolerance: self.tolerance,
                converged: self.converged,
            },
        )?;
        st.end()
    }
}
