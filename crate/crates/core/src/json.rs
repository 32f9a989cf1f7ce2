//! Canonical JSON encoding of expressions, slices and graphs.
//!
//! Tagged by `kind`: `pred`, `formula`, `slice`, `graph`, `cmpl`. Arcs are
//! `{"expr": .., "args": [..]}`. Sets are written in their sorted order, so
//! equal values always encode to identical bytes.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{Arc, Draft, Expr, Graph, Slice, StructureError};
use crate::name::{Name, PredSym};
use crate::syntax::{parse_formula, render_formula, SyntaxError};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("ill-formed structure: {0}")]
    Structure(#[from] StructureError),
    #[error("formula text does not parse: {0}")]
    Formula(#[from] SyntaxError),
    #[error("expected a {expected}, found a {found}")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("graph arity missing and not inferable from an empty slice list")]
    MissingArity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExprJson {
    Pred { name: String, arity: usize },
    Formula { text: String },
    Slice(SliceJson),
    Graph(GraphJson),
    Cmpl { of: Box<ExprJson> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcJson {
    pub expr: ExprJson,
    pub args: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceJson {
    pub nodes: Vec<Name>,
    pub arcs: Vec<ArcJson>,
    pub dist: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    pub slices: Vec<SliceBody>,
}

/// A slice inside a graph; the `kind` tag is optional there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceBody {
    #[serde(default = "slice_kind")]
    pub kind: String,
    #[serde(flatten)]
    pub slice: SliceJson,
}

fn slice_kind() -> String {
    "slice".into()
}

impl ExprJson {
    fn kind(&self) -> &'static str {
        match self {
            ExprJson::Pred { .. } => "pred",
            ExprJson::Formula { .. } => "formula",
            ExprJson::Slice(_) => "slice",
            ExprJson::Graph(_) => "graph",
            ExprJson::Cmpl { .. } => "cmpl",
        }
    }
}

pub fn expr_to_json(e: &Expr) -> ExprJson {
    match e {
        Expr::Pred(p) => ExprJson::Pred { name: p.name().to_string(), arity: p.arity() },
        Expr::Formula(f) => ExprJson::Formula { text: render_formula(f) },
        Expr::Slice(s) => ExprJson::Slice(slice_to_json(s)),
        Expr::Graph(g) => ExprJson::Graph(graph_to_json(g)),
        Expr::Cmpl(inner) => ExprJson::Cmpl { of: Box::new(expr_to_json(inner)) },
    }
}

pub fn slice_to_json(s: &Slice) -> SliceJson {
    SliceJson {
        nodes: s.nodes().iter().cloned().collect(),
        arcs: s.arcs().iter().map(|a| ArcJson { expr: expr_to_json(a.expr()), args: a.args().to_vec() }).collect(),
        dist: s.dist().to_vec(),
    }
}

pub fn graph_to_json(g: &Graph) -> GraphJson {
    GraphJson {
        arity: Some(g.arity()),
        slices: g.slices().map(|s| SliceBody { kind: slice_kind(), slice: slice_to_json(s) }).collect(),
    }
}

pub fn expr_from_json(j: &ExprJson) -> Result<Expr, JsonError> {
    Ok(match j {
        ExprJson::Pred { name, arity } => {
            if name == crate::name::EQUALITY {
                Expr::Pred(PredSym::equality())
            } else {
                Expr::Pred(PredSym::new(name, *arity))
            }
        }
        ExprJson::Formula { text } => Expr::formula(parse_formula(text)?),
        ExprJson::Slice(s) => Expr::slice(&slice_from_json(s)?),
        ExprJson::Graph(g) => Expr::graph(&graph_from_json(g)?),
        ExprJson::Cmpl { of } => Expr::cmpl(expr_from_json(of)?),
    })
}

pub fn slice_from_json(j: &SliceJson) -> Result<Slice, JsonError> {
    let arcs = j
        .arcs
        .iter()
        .map(|a| Ok(Arc::new(expr_from_json(&a.expr)?, a.args.clone())?))
        .collect::<Result<_, JsonError>>()?;
    let draft = Draft::new(j.nodes.iter().cloned().collect(), arcs)?;
    Ok(Slice::new(draft, j.dist.clone())?)
}

pub fn graph_from_json(j: &GraphJson) -> Result<Graph, JsonError> {
    let slices: Vec<Slice> = j.slices.iter().map(|b| slice_from_json(&b.slice)).collect::<Result<_, _>>()?;
    let arity = match (j.arity, slices.first()) {
        (Some(a), _) => a,
        (None, Some(s)) => s.arity(),
        (None, None) => 0,
    };
    Ok(Graph::new(arity, slices)?)
}

/// Top-level values that can be written as JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Expr(Expr),
    Slice(Slice),
    Graph(Graph),
}

impl Document {
    pub fn to_json(&self) -> ExprJson {
        match self {
            Document::Expr(e) => expr_to_json(e),
            Document::Slice(s) => ExprJson::Slice(slice_to_json(s)),
            Document::Graph(g) => ExprJson::Graph(graph_to_json(g)),
        }
    }

    /// Loads a document; slices and graphs at top level keep their names.
    pub fn from_json(j: &ExprJson) -> Result<Document, JsonError> {
        Ok(match j {
            ExprJson::Slice(s) => Document::Slice(slice_from_json(s)?),
            ExprJson::Graph(g) => Document::Graph(graph_from_json(g)?),
            other => Document::Expr(expr_from_json(other)?),
        })
    }

    pub fn parse(text: &str) -> Result<Document, JsonError> {
        let j: ExprJson = serde_json::from_str(text)?;
        Document::from_json(&j)
    }

    pub fn to_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("serializable")
    }

    pub fn into_graph(self) -> Result<Graph, JsonError> {
        match self {
            Document::Graph(g) => Ok(g),
            Document::Slice(s) => Ok(Graph::singleton(s)),
            Document::Expr(e) => Err(JsonError::WrongKind { expected: "graph", found: expr_to_json(&e).kind() }),
        }
    }
}

pub fn slice_to_string(s: &Slice) -> String {
    serde_json::to_string(&ExprJson::Slice(slice_to_json(s))).expect("serializable")
}

pub fn graph_to_string(g: &Graph) -> String {
    serde_json::to_string(&ExprJson::Graph(graph_to_json(g))).expect("serializable")
}

pub fn expr_to_string(e: &Expr) -> String {
    serde_json::to_string(&expr_to_json(e)).expect("serializable")
}

/// Hex SHA-256 of the given bytes.
pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn slice_from_str(text: &str) -> Result<Slice, JsonError> {
    match serde_json::from_str::<ExprJson>(text)? {
        ExprJson::Slice(s) => slice_from_json(&s),
        other => Err(JsonError::WrongKind { expected: "slice", found: other.kind() }),
    }
}

pub fn graph_from_str(text: &str) -> Result<Graph, JsonError> {
    Document::parse(text)?.into_graph()
}
