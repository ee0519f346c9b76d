//! JSON documents for spaces, tensors and operators.
//!
//! A space is `{"p": "3/2", "space": <node>}` where a node is tagged by
//! `kind`: `min`/`max`/`lattice` (with a `base` norm), `dual` (`inner`),
//! `sum_inf`/`sum_one` (`parts`), `subspace` (`parent`, `basis` rows) and
//! `quotient` (`parent` and either `map` rows or `kernel` rows). Norms are
//! `lq` (`q`, `dim`), `weighted` (`q`, `weights`) and `polytope` (`dim`,
//! `vertices`).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::linalg::{complement_rows, to_rows, Mat};
use crate::norm::{BanachNormSpec, NormKind};
use crate::space::{Node, SpaceSpec};
use crate::tensor::{OperatorRep, Tensor};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormJson {
    Lq {
        q: PExponent,
        dim: usize,
    },
    Weighted {
        q: PExponent,
        weights: Vec<f64>,
    },
    Polytope {
        dim: usize,
        #[serde(alias = "points")]
        vertices: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeJson {
    Min {
        base: NormJson,
    },
    Max {
        base: NormJson,
    },
    Lattice {
        base: NormJson,
    },
    Dual {
        inner: Box<NodeJson>,
    },
    SumInf {
        parts: Vec<NodeJson>,
    },
    #[serde(alias = "sum1")]
    SumOne {
        parts: Vec<NodeJson>,
    },
    Subspace {
        parent: Box<NodeJson>,
        basis: Vec<Vec<f64>>,
    },
    Quotient {
        parent: Box<NodeJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        map: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kernel: Option<Vec<Vec<f64>>>,
    },
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<Mat> {
    let cols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse(format!(
            "{what} must be a non-empty rectangular array of rows"
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("{what} has non-finite entries")));
    }
    Ok(Mat::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn norm_from_json(n: &NormJson) -> Result<BanachNormSpec> {
    match n {
        NormJson::Lq { q, dim } => {
            if *dim == 0 {
                return Err(Error::Parse("norm dimension must be positive".into()));
            }
            Ok(BanachNormSpec::lq(*q, *dim))
        }
        NormJson::Weighted { q, weights } => BanachNormSpec::weighted(*q, weights.clone()),
        NormJson::Polytope { dim, vertices } => BanachNormSpec::polytope(*dim, vertices),
    }
}

pub fn norm_to_json(e: &BanachNormSpec) -> NormJson {
    match e.kind() {
        NormKind::Lq(q) => NormJson::Lq {
            q: *q,
            dim: e.dim(),
        },
        NormKind::WeightedLq { q, weights } => NormJson::Weighted {
            q: *q,
            weights: weights.clone(),
        },
        NormKind::Polytope(poly) => NormJson::Polytope {
            dim: e.dim(),
            vertices: poly.vertices().to_vec(),
        },
    }
}

pub fn node_from_json(n: &NodeJson) -> Result<Node> {
    Ok(match n {
        NodeJson::Min { base } => Node::Min(norm_from_json(base)?),
        NodeJson::Max { base } => Node::Max(norm_from_json(base)?),
        NodeJson::Lattice { base } => Node::Lattice(norm_from_json(base)?),
        NodeJson::Dual { inner } => Node::Dual(Box::new(node_from_json(inner)?)),
        NodeJson::SumInf { parts } => {
            Node::SumInf(parts.iter().map(node_from_json).collect::<Result<_>>()?)
        }
        NodeJson::SumOne { parts } => {
            Node::Sum1(parts.iter().map(node_from_json).collect::<Result<_>>()?)
        }
        NodeJson::Subspace { parent, basis } => Node::Subspace {
            parent: Box::new(node_from_json(parent)?),
            basis: matrix(basis, "subspace basis")?,
        },
        NodeJson::Quotient {
            parent,
            map,
            kernel,
        } => {
            let parent = node_from_json(parent)?;
            let map = match (map, kernel) {
                (Some(m), None) => matrix(m, "quotient map")?,
                (None, Some(k)) => {
                    let k = matrix(k, "quotient kernel")?;
                    if k.ncols() != parent.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: parent.dim(),
                            got: k.ncols(),
                        });
                    }
                    let map = complement_rows(&k, parent.dim());
                    if map.nrows() == 0 {
                        return Err(Error::InvalidSpace("kernel is the whole space".into()));
                    }
                    map
                }
                _ => {
                    return Err(Error::Parse(
                        "quotient needs exactly one of \"map\" or \"kernel\"".into(),
                    ))
                }
            };
            Node::Quotient {
                parent: Box::new(parent),
                map,
            }
        }
    })
}

pub fn node_to_json(n: &Node) -> NodeJson {
    match n {
        Node::Min(e) => NodeJson::Min {
            base: norm_to_json(e),
        },
        Node::Max(e) => NodeJson::Max {
            base: norm_to_json(e),
        },
        Node::Lattice(e) => NodeJson::Lattice {
            base: norm_to_json(e),
        },
        Node::Dual(inner) => NodeJson::Dual {
            inner: Box::new(node_to_json(inner)),
        },
        Node::SumInf(parts) => NodeJson::SumInf {
            parts: parts.iter().map(node_to_json).collect(),
        },
        Node::Sum1(parts) => NodeJson::SumOne {
            parts: parts.iter().map(node_to_json).collect(),
        },
        Node::Subspace { parent, basis } => NodeJson::Subspace {
            parent: Box::new(node_to_json(parent)),
            basis: to_rows(basis),
        },
        Node::Quotient { parent, map } => NodeJson::Quotient {
            parent: Box::new(node_to_json(parent)),
            map: Some(to_rows(map)),
            kernel: None,
        },
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Parse(format!("missing field \"{key}\"")))
}

fn decode<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn exponent_at(v: &Value, key: &str) -> Result<PExponent> {
    decode(field(v, key)?, key)
}

/// The exponent under `"p"`.
pub fn exponent_from_value(v: &Value) -> Result<PExponent> {
    exponent_at(v, "p")
}

/// A node under `key`, validated at exponent `p`.
pub fn space_at(v: &Value, key: &str, p: PExponent) -> Result<SpaceSpec> {
    let node: NodeJson = decode(field(v, key)?, key)?;
    SpaceSpec::new(p, node_from_json(&node)?)
}

/// `{"p": …, "space": …}`.
pub fn space_from_value(v: &Value) -> Result<SpaceSpec> {
    space_at(v, "space", exponent_from_value(v)?)
}

/// `{"p": …, "space": …, "tensor": {"m", "d", "entries"}}`.
pub fn tensor_input(v: &Value) -> Result<(SpaceSpec, Tensor)> {
    let s = space_from_value(v)?;
    let t: Tensor = decode(field(v, "tensor")?, "tensor")?;
    if t.d() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: t.d(),
        });
    }
    Ok((s, t))
}

/// `{"p": …, "domain": …, "codomain": …, "matrix": rows}`.
pub fn operator_from_value(v: &Value) -> Result<OperatorRep> {
    let p = exponent_from_value(v)?;
    let domain = space_at(v, "domain", p)?;
    let codomain = space_at(v, "codomain", p)?;
    let rows: Vec<Vec<f64>> = decode(field(v, "matrix")?, "matrix")?;
    OperatorRep::new(domain, codomain, matrix(&rows, "matrix")?)
}

/// `"matrix"`-style rows under `key`.
pub fn matrix_at(v: &Value, key: &str) -> Result<Mat> {
    let rows: Vec<Vec<f64>> = decode(field(v, key)?, key)?;
    matrix(&rows, key)
}

pub fn norm_at(v: &Value, key: &str) -> Result<BanachNormSpec> {
    norm_from_json(&decode(field(v, key)?, key)?)
}

pub fn space_to_value(s: &SpaceSpec) -> Value {
    serde_json::json!({ "p": s.p, "space": node_to_json(&s.node) })
}

pub fn operator_to_value(u: &OperatorRep) -> Value {
    serde_json::json!({
        "p": u.domain.p,
        "domain": node_to_json(&u.domain.node),
        "codomain": node_to_json(&u.codomain.node),
        "matrix": to_rows(&u.matrix),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn reads_the_documented_example() {
        let v = json!({"p": "2", "space": {"kind": "max", "base": {"kind": "lq", "q": "2", "dim": 3}},
            "tensor": {"m": 2, "d": 3, "entries": [[1, 0, 0], [0, 1, 0]]}});
        let (s, t) = tensor_input(&v).unwrap();
        assert_eq!(
            s,
            SpaceSpec::max(PExponent::TWO, BanachNormSpec::lq(PExponent::TWO, 3))
        );
        assert_eq!((t.m(), t.d()), (2, 3));
    }

    #[test]
    fn round_trips_nested_spaces() {
        let p: PExponent = "3/2".parse().unwrap();
        let hex = BanachNormSpec::polytope(2, &[vec![1.0, 0.0], vec![0.5, 0.8], vec![-0.5, 0.8]])
            .unwrap();
        let inner = Node::Sum1(vec![
            Node::Max(hex),
            Node::Lattice(BanachNormSpec::weighted(PExponent::INF, vec![1.0, 2.0]).unwrap()),
        ]);
        let node = Node::Subspace {
            parent: Box::new(Node::Dual(Box::new(inner))),
            basis: Mat::from_row_slice(1, 4, &[1.0, 0.0, 0.5, 0.0]),
        };
        let s = SpaceSpec::new(p, node).unwrap();
        let text = serde_json::to_string(&space_to_value(&s)).unwrap();
        assert!(text.contains("\"p\":\"3/2\""));
        let back = space_from_value(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn quotient_by_kernel_or_map() {
        let base = json!({"kind": "min", "base": {"kind": "lq", "q": "2", "dim": 2}});
        let v =
            json!({"p": "2", "space": {"kind": "quotient", "parent": base, "kernel": [[0, 1]]}});
        let s = space_from_value(&v).unwrap();
        assert_eq!(s.dim(), 1);
        let both = json!({"p": "2", "space": {"kind": "quotient", "parent": base, "kernel": [[0, 1]], "map": [[1, 0]]}});
        assert!(matches!(space_from_value(&both), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_bad_documents() {
        let bad = [
            json!({"space": {"kind": "min", "base": {"kind": "lq", "q": "2", "dim": 2}}}),
            json!({"p": "1/2", "space": {"kind": "min", "base": {"kind": "lq", "q": "2", "dim": 2}}}),
            json!({"p": "2", "space": {"kind": "nope"}}),
            json!({"p": "2", "space": {"kind": "subspace", "parent": {"kind": "min", "base": {"kind": "lq", "q": "2", "dim": 2}}, "basis": [[1, 0], [1]]}}),
        ];
        for v in &bad {
            assert!(space_from_value(v).is_err(), "{v}");
        }
        let v = json!({"p": "2", "space": {"kind": "min", "base": {"kind": "lq", "q": "2", "dim": 2}},
            "tensor": {"m": 1, "d": 3, "entries": [[1, 2, 3]]}});
        assert!(tensor_input(&v).is_err());
    }

    #[test]
    fn operators() {
        let l = json!({"kind": "lq", "q": "1", "dim": 2});
        let v = json!({"p": "inf", "domain": {"kind": "max", "base": l}, "codomain": {"kind": "lattice", "base": l},
            "matrix": [[1, 1], [0, 1]]});
        let u = operator_from_value(&v).unwrap();
        assert_eq!(u.matrix[(0, 1)], 1.0);
        let again = operator_from_value(&operator_to_value(&u)).unwrap();
        assert_eq!(again.matrix, u.matrix);
        assert_eq!(again.codomain, u.codomain);
    }
}
