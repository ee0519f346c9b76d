//! Recursive descriptions of p-multinormed spaces on ℝ^d.

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linalg::{rank, Mat};
use crate::norm::BanachNormSpec;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// Injective structure: level-m norm is `‖op(e): ℓ^{p′}_m → E‖`.
    Min(BanachNormSpec),
    /// Projective structure.
    Max(BanachNormSpec),
    /// Coordinatewise lattice with its natural p-multinorm.
    Lattice(BanachNormSpec),
    /// The dual of `inner`, which lives at the conjugate exponent.
    Dual(Box<Node>),
    SumInf(Vec<Node>),
    Sum1(Vec<Node>),
    /// The span of the rows of `basis` (`d × D`) inside `parent` (dim `D`).
    Subspace {
        parent: Box<Node>,
        basis: Mat,
    },
    /// `parent / ker(map)`, coordinatised by `map` (`d × D`, full row rank).
    Quotient {
        parent: Box<Node>,
        map: Mat,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceSpec {
    pub p: PExponent,
    pub node: Node,
}

impl Node {
    pub fn dim(&self) -> usize {
        match self {
            Node::Min(e) | Node::Max(e) | Node::Lattice(e) => e.dim(),
            Node::Dual(inner) => inner.dim(),
            Node::SumInf(parts) | Node::Sum1(parts) => parts.iter().map(Node::dim).sum(),
            Node::Subspace { basis, .. } => basis.nrows(),
            Node::Quotient { map, .. } => map.nrows(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Node::Min(_) | Node::Max(_) => Ok(()),
            Node::Lattice(e) => {
                if e.is_lattice_norm() {
                    Ok(())
                } else {
                    Err(Error::InvalidSpace(
                        "lattice base must be an lq or weighted_lq norm".into(),
                    ))
                }
            }
            Node::Dual(inner) => inner.validate(),
            Node::SumInf(parts) | Node::Sum1(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidSpace("empty sum".into()));
                }
                parts.iter().try_for_each(Node::validate)
            }
            Node::Subspace { parent, basis } => {
                parent.validate()?;
                if basis.ncols() != parent.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: parent.dim(),
                        got: basis.ncols(),
                    });
                }
                if basis.nrows() == 0 || rank(basis, 1e-10) < basis.nrows() {
                    return Err(Error::InvalidSpace(
                        "subspace basis is not injective".into(),
                    ));
                }
                Ok(())
            }
            Node::Quotient { parent, map } => {
                parent.validate()?;
                if map.ncols() != parent.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: parent.dim(),
                        got: map.ncols(),
                    });
                }
                if map.nrows() == 0 || rank(map, 1e-10) < map.nrows() {
                    return Err(Error::InvalidSpace("quotient map is not surjective".into()));
                }
                Ok(())
            }
        }
    }

    /// The symbolic dual node (to be read at the conjugate exponent).
    pub fn dual(&self) -> Node {
        match self {
            Node::Min(e) => Node::Max(e.dual()),
            Node::Max(e) => Node::Min(e.dual()),
            Node::Lattice(e) => Node::Lattice(e.dual()),
            Node::Dual(inner) => (**inner).clone(),
            Node::SumInf(parts) => Node::Sum1(parts.iter().map(Node::dual).collect()),
            Node::Sum1(parts) => Node::SumInf(parts.iter().map(Node::dual).collect()),
            Node::Subspace { parent, basis } => Node::Quotient {
                parent: Box::new(parent.dual()),
                map: basis.clone(),
            },
            Node::Quotient { parent, map } => Node::Subspace {
                parent: Box::new(parent.dual()),
                basis: map.clone(),
            },
        }
    }

    /// Removes `Dual` wrappers by symbolic rewriting.
    pub fn normalized(&self) -> Node {
        match self {
            Node::Dual(inner) => inner.normalized().dual(),
            Node::SumInf(parts) => Node::SumInf(parts.iter().map(Node::normalized).collect()),
            Node::Sum1(parts) => Node::Sum1(parts.iter().map(Node::normalized).collect()),
            Node::Subspace { parent, basis } => Node::Subspace {
                parent: Box::new(parent.normalized()),
                basis: basis.clone(),
            },
            Node::Quotient { parent, map } => Node::Quotient {
                parent: Box::new(parent.normalized()),
                map: map.clone(),
            },
            other => other.clone(),
        }
    }

    /// The Banach norm of the first level, when it is one of the leaf norms.
    pub fn level_one_norm(&self) -> Option<BanachNormSpec> {
        match self.normalized() {
            Node::Min(e) | Node::Max(e) | Node::Lattice(e) => Some(e),
            _ => None,
        }
    }
}

impl SpaceSpec {
    pub fn new(p: PExponent, node: Node) -> Result<Self> {
        node.validate()?;
        Ok(Self { p, node })
    }

    pub fn min(p: PExponent, e: BanachNormSpec) -> Self {
        Self {
            p,
            node: Node::Min(e),
        }
    }

    pub fn max(p: PExponent, e: BanachNormSpec) -> Self {
        Self {
            p,
            node: Node::Max(e),
        }
    }

    pub fn lattice(p: PExponent, e: BanachNormSpec) -> Result<Self> {
        Self::new(p, Node::Lattice(e))
    }

    pub fn sum_inf(p: PExponent, parts: Vec<Node>) -> Result<Self> {
        Self::new(p, Node::SumInf(parts))
    }

    pub fn sum_one(p: PExponent, parts: Vec<Node>) -> Result<Self> {
        Self::new(p, Node::Sum1(parts))
    }

    pub fn subspace(parent: SpaceSpec, basis: Mat) -> Result<Self> {
        Self::new(
            parent.p,
            Node::Subspace {
                parent: Box::new(parent.node),
                basis,
            },
        )
    }

    pub fn quotient(parent: SpaceSpec, map: Mat) -> Result<Self> {
        Self::new(
            parent.p,
            Node::Quotient {
                parent: Box::new(parent.node),
                map,
            },
        )
    }

    /// `parent / span(kernel rows)`, coordinatised by an orthonormal complement.
    pub fn quotient_by_kernel(parent: SpaceSpec, kernel: Mat) -> Result<Self> {
        let dim = parent.dim();
        if kernel.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: kernel.ncols(),
            });
        }
        let map = crate::linalg::complement_rows(&kernel, dim);
        if map.nrows() == 0 {
            return Err(Error::InvalidSpace("kernel is the whole space".into()));
        }
        Self::quotient(parent, map)
    }

    pub fn dim(&self) -> usize {
        self.node.dim()
    }

    /// The dual space at the conjugate exponent.
    pub fn dual(&self) -> SpaceSpec {
        SpaceSpec {
            p: self.p.conjugate(),
            node: self.node.dual(),
        }
    }

    pub fn level_one_norm(&self) -> Option<BanachNormSpec> {
        self.node.level_one_norm()
    }

    pub fn with_node(&self, node: Node) -> SpaceSpec {
        SpaceSpec { p: self.p, node }
    }
}

/// Symbolic dual: Min ↔ Max, Sum1 ↔ SumInf, Subspace ↔ Quotient, lattice to
/// the dual lattice, with `p` flipped to `p′`.
pub fn dual_spec(s: &SpaceSpec) -> SpaceSpec {
    s.dual()
}
