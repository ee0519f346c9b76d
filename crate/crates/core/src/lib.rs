pub mod bilinear;
pub mod constructions;
pub mod duality_sums;
pub mod error;
pub mod estimate;
pub mod exponent;
pub mod extension_lifting;
pub mod json;
pub mod linalg;
pub mod lp;
pub mod norm;
pub mod operator_norms;
pub mod optim;
pub mod space;
pub mod tensor;
pub mod tensor_norms;
pub mod verify;

pub use error::{Error, Result};
pub use estimate::{NormEstimate, UpperCertificate};
pub use exponent::PExponent;
pub use norm::{BanachNormSpec, FiniteNorm};
pub use space::{dual_spec, Node, SpaceSpec};
pub use tensor::{OperatorRep, Tensor};
