//! Tensors in ℓ^p_m ⊗ ℝ^d and linear maps between represented spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank, Mat};
use crate::space::SpaceSpec;

/// `Σ_i δ_i ⊗ e_i`, stored as the `m × d` grid whose rows are the `e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    entries: Mat,
}

impl Tensor {
    pub fn new(entries: Mat) -> Self {
        Self { entries }
    }

    pub fn zeros(m: usize, d: usize) -> Self {
        Self {
            entries: Mat::zeros(m, d),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        Ok(Self {
            entries: crate::linalg::from_rows(rows),
        })
    }

    /// The elementary tensor `a ⊗ x`.
    pub fn elementary(a: &[f64], x: &[f64]) -> Self {
        Self {
            entries: crate::linalg::outer(a, x),
        }
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn d(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    pub fn into_entries(self) -> Mat {
        self.entries
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        crate::linalg::row_vec(&self.entries, i)
    }

    pub fn rank(&self) -> usize {
        rank(&self.entries, 1e-10)
    }

    /// `op(e)`: the `d × m` matrix sending `δ′_i` to `e_i`.
    pub fn op(&self) -> Mat {
        self.entries.transpose()
    }

    pub fn from_op(op: &Mat) -> Self {
        Self {
            entries: op.transpose(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    m: usize,
    d: usize,
    entries: Vec<Vec<f64>>,
}

impl Serialize for Tensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson {
            m: self.m(),
            d: self.d(),
            entries: crate::linalg::to_rows(&self.entries),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TensorJson::deserialize(d)?;
        if raw.entries.len() != raw.m || raw.entries.iter().any(|r| r.len() != raw.d) {
            return Err(serde::de::Error::custom(format!(
                "tensor entries are not {}x{}",
                raw.m, raw.d
            )));
        }
        Ok(Tensor {
            entries: Mat::from_fn(raw.m, raw.d, |i, j| raw.entries[i][j]),
        })
    }
}

/// A linear map between represented spaces, acting on column vectors.
#[derive(Clone, Debug)]
pub struct OperatorRep {
    pub domain: SpaceSpec,
    pub codomain: SpaceSpec,
    /// `dim(codomain) × dim(domain)`.
    pub matrix: Mat,
}

impl OperatorRep {
    pub fn new(domain: SpaceSpec, codomain: SpaceSpec, matrix: Mat) -> Result<Self> {
        if matrix.ncols() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                got: matrix.ncols(),
            });
        }
        if matrix.nrows() != codomain.dim() {
            return Err(Error::DimensionMismatch {
                expected: codomain.dim(),
                got: matrix.nrows(),
            });
        }
        if domain.p != codomain.p {
            return Err(Error::ExponentMismatch(
                domain.p.to_string(),
                codomain.p.to_string(),
            ));
        }
        Ok(Self {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn identity(space: SpaceSpec) -> Self {
        let d = space.dim();
        Self {
            domain: space.clone(),
            codomain: space,
            matrix: Mat::identity(d, d),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &OperatorRep) -> Result<OperatorRep> {
        if inner.matrix.nrows() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: inner.matrix.nrows(),
            });
        }
        Ok(OperatorRep {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix * &inner.matrix,
        })
    }

    /// `(I ⊗ u) e`, row by row.
    pub fn apply(&self, e: &Tensor) -> Result<Tensor> {
        if e.d() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.ncols(),
                got: e.d(),
            });
        }
        Ok(Tensor::new(e.entries() * self.matrix.transpose()))
    }

    pub fn rank(&self) -> usize {
        rank(&self.matrix, 1e-10)
    }
}
