//! The graph language: expressions, arcs, drafts, slices and graphs.
//!
//! All values are immutable. Slices and graphs that occur as arc labels are
//! held in canonical form ([`Canon`]), so structural equality on
//! expressions is equality up to isomorphism of the embedded objects.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc as Shared;

use thiserror::Error;

use crate::canon;
use crate::formula::Formula;
use crate::name::{Name, PredSym};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("arc over {expr} expects {expected} arguments, got {found}")]
    ArityMismatch { expr: String, expected: usize, found: usize },
    #[error("name `{0}` is not a node of the enclosing draft")]
    UnknownName(Name),
    #[error("graph of arity {expected} cannot hold a slice of arity {found}")]
    MixedArity { expected: usize, found: usize },
}

/// A slice or graph kept in canonical form. Only the canonicalizer
/// constructs these.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Canon<T>(Shared<T>);

impl<T> Canon<T> {
    pub(crate) fn new_unchecked(value: T) -> Self {
        Canon(Shared::new(value))
    }
}

impl<T> Deref for Canon<T> {
    type Target = T;
    fn deref(&self) -> &T {
        &self.0
    }
}

impl<T: fmt::Debug> fmt::Debug for Canon<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An arc label.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Pred(PredSym),
    Formula(Shared<Formula>),
    Slice(Canon<Slice>),
    Graph(Canon<Graph>),
    Cmpl(Shared<Expr>),
}

impl Expr {
    pub fn pred(p: PredSym) -> Expr {
        Expr::Pred(p)
    }

    pub fn formula(f: Formula) -> Expr {
        Expr::Formula(Shared::new(f))
    }

    pub fn slice(s: &Slice) -> Expr {
        Expr::Slice(canon::canonical_slice(s))
    }

    pub fn graph(g: &Graph) -> Expr {
        Expr::Graph(canon::canonical_graph(g))
    }

    pub fn cmpl(e: Expr) -> Expr {
        Expr::Cmpl(Shared::new(e))
    }

    pub fn arity(&self) -> usize {
        match self {
            Expr::Pred(p) => p.arity(),
            Expr::Formula(f) => f.free_names().len(),
            Expr::Slice(s) => s.arity(),
            Expr::Graph(g) => g.arity(),
            Expr::Cmpl(e) => e.arity(),
        }
    }

    /// The slice `T` when this expression is a complemented slice.
    pub fn complemented_slice(&self) -> Option<&Canon<Slice>> {
        match self {
            Expr::Cmpl(inner) => match &**inner {
                Expr::Slice(t) => Some(t),
                _ => None,
            },
            _ => None,
        }
    }

    /// Predicate symbols occurring anywhere inside.
    pub fn predicates(&self, acc: &mut BTreeSet<PredSym>) {
        match self {
            Expr::Pred(p) => {
                acc.insert(p.clone());
            }
            Expr::Formula(f) => f.predicates(acc),
            Expr::Slice(s) => s.predicates(acc),
            Expr::Graph(g) => {
                for s in g.slices() {
                    s.predicates(acc);
                }
            }
            Expr::Cmpl(e) => e.predicates(acc),
        }
    }

    /// Number of constructors, counting embedded arcs and formula size.
    pub fn size(&self) -> usize {
        match self {
            Expr::Pred(_) => 1,
            Expr::Formula(f) => f.size(),
            Expr::Slice(s) => s.size(),
            Expr::Graph(g) => 1 + g.slices().map(Slice::size).sum::<usize>(),
            Expr::Cmpl(e) => 1 + e.size(),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Pred(p) => write!(f, "{p}"),
            Expr::Formula(phi) => write!(f, "[{}]", crate::syntax::render_formula(phi)),
            Expr::Slice(s) => write!(f, "{:?}", **s),
            Expr::Graph(g) => write!(f, "{:?}", **g),
            Expr::Cmpl(e) => write!(f, "~{e:?}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// An expression applied to a list of names.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    expr: Expr,
    args: Vec<Name>,
}

impl Arc {
    pub fn new(expr: Expr, args: Vec<Name>) -> Result<Arc, StructureError> {
        let expected = expr.arity();
        if expected != args.len() {
            return Err(StructureError::ArityMismatch { expr: format!("{expr:?}"), expected, found: args.len() });
        }
        Ok(Arc { expr, args })
    }

    /// Predicate arc; panics on an arity mismatch.
    pub fn pred(p: &PredSym, args: &[&str]) -> Arc {
        Arc::new(Expr::Pred(p.clone()), args.iter().map(Name::new).collect()).expect("predicate arity")
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn args(&self) -> &[Name] {
        &self.args
    }

    pub fn map_args(&self, f: impl Fn(&Name) -> Name) -> Arc {
        Arc { expr: self.expr.clone(), args: self.args.iter().map(f).collect() }
    }

    pub(crate) fn from_parts(expr: Expr, args: Vec<Name>) -> Arc {
        debug_assert_eq!(expr.arity(), args.len());
        Arc { expr, args }
    }
}

impl fmt::Debug for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{:?};", self.expr)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(">")
    }
}

/// A finite set of names with a finite set of arcs over them.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Draft {
    nodes: BTreeSet<Name>,
    arcs: BTreeSet<Arc>,
}

impl Draft {
    pub fn new(nodes: BTreeSet<Name>, arcs: BTreeSet<Arc>) -> Result<Draft, StructureError> {
        for a in &arcs {
            for n in a.args() {
                if !nodes.contains(n) {
                    return Err(StructureError::UnknownName(n.clone()));
                }
            }
        }
        Ok(Draft { nodes, arcs })
    }

    pub(crate) fn from_parts(nodes: BTreeSet<Name>, arcs: BTreeSet<Arc>) -> Draft {
        debug_assert!(arcs.iter().all(|a| a.args().iter().all(|n| nodes.contains(n))));
        Draft { nodes, arcs }
    }

    /// The draft whose nodes are exactly the names occurring in `arcs`.
    pub fn of_arcs<I: IntoIterator<Item = Arc>>(arcs: I) -> Draft {
        let arcs: BTreeSet<Arc> = arcs.into_iter().collect();
        let nodes = arcs.iter().flat_map(|a| a.args().iter().cloned()).collect();
        Draft { nodes, arcs }
    }

    pub fn nodes(&self) -> &BTreeSet<Name> {
        &self.nodes
    }

    pub fn arcs(&self) -> &BTreeSet<Arc> {
        &self.arcs
    }

    pub fn add_arc(&self, arc: Arc) -> Draft {
        let mut d = self.clone();
        d.nodes.extend(arc.args().iter().cloned());
        d.arcs.insert(arc);
        d
    }

    pub fn add_nodes<I: IntoIterator<Item = Name>>(&self, names: I) -> Draft {
        let mut d = self.clone();
        d.nodes.extend(names);
        d
    }

    pub fn without_arc(&self, arc: &Arc) -> Draft {
        let mut d = self.clone();
        d.arcs.remove(arc);
        d
    }
}

impl fmt::Debug for Draft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{:?}; {:?}}}", self.nodes, self.arcs)
    }
}

/// A draft with a distinguished list of names.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slice {
    draft: Draft,
    dist: Vec<Name>,
}

impl Slice {
    pub fn new(draft: Draft, dist: Vec<Name>) -> Result<Slice, StructureError> {
        for n in &dist {
            if !draft.nodes.contains(n) {
                return Err(StructureError::UnknownName(n.clone()));
            }
        }
        Ok(Slice { draft, dist })
    }

    pub(crate) fn from_parts(draft: Draft, dist: Vec<Name>) -> Slice {
        debug_assert!(dist.iter().all(|n| draft.nodes.contains(n)));
        Slice { draft, dist }
    }

    /// The arcless slice over `dist`.
    pub fn arcless(dist: Vec<Name>) -> Slice {
        let nodes = dist.iter().cloned().collect();
        Slice { draft: Draft { nodes, arcs: BTreeSet::new() }, dist }
    }

    pub fn arity(&self) -> usize {
        self.dist.len()
    }

    pub fn draft(&self) -> &Draft {
        &self.draft
    }

    pub fn nodes(&self) -> &BTreeSet<Name> {
        &self.draft.nodes
    }

    pub fn arcs(&self) -> &BTreeSet<Arc> {
        &self.draft.arcs
    }

    pub fn dist(&self) -> &[Name] {
        &self.dist
    }

    pub fn add_arc(&self, arc: Arc) -> Slice {
        Slice { draft: self.draft.add_arc(arc), dist: self.dist.clone() }
    }

    pub fn without_arc(&self, arc: &Arc) -> Slice {
        Slice { draft: self.draft.without_arc(arc), dist: self.dist.clone() }
    }

    pub fn with_dist(&self, dist: Vec<Name>) -> Result<Slice, StructureError> {
        Slice::new(self.draft.clone(), dist)
    }

    pub fn predicates(&self, acc: &mut BTreeSet<PredSym>) {
        for a in self.arcs() {
            a.expr().predicates(acc);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.arcs().iter().map(|a| a.expr().size()).sum::<usize>()
    }

    /// Re-checks every structural invariant, descending into embedded
    /// slices and graphs.
    pub fn audit(&self) -> Result<(), StructureError> {
        for a in self.arcs() {
            if a.expr().arity() != a.args().len() {
                return Err(StructureError::ArityMismatch {
                    expr: format!("{:?}", a.expr()),
                    expected: a.expr().arity(),
                    found: a.args().len(),
                });
            }
            for n in a.args() {
                if !self.nodes().contains(n) {
                    return Err(StructureError::UnknownName(n.clone()));
                }
            }
            audit_expr(a.expr())?;
        }
        for n in &self.dist {
            if !self.nodes().contains(n) {
                return Err(StructureError::UnknownName(n.clone()));
            }
        }
        Ok(())
    }
}

fn audit_expr(e: &Expr) -> Result<(), StructureError> {
    match e {
        Expr::Pred(_) | Expr::Formula(_) => Ok(()),
        Expr::Slice(s) => s.audit(),
        Expr::Graph(g) => g.audit(),
        Expr::Cmpl(inner) => audit_expr(inner),
    }
}

impl fmt::Debug for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{:?}; {:?}; {:?}>", self.draft.nodes, self.draft.arcs, self.dist)
    }
}

/// A finite set of slices sharing one arity; denotes the union of their
/// extensions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Graph {
    arity: usize,
    slices: BTreeSet<Slice>,
}

impl Graph {
    pub fn new<I: IntoIterator<Item = Slice>>(arity: usize, slices: I) -> Result<Graph, StructureError> {
        let slices: BTreeSet<Slice> = slices.into_iter().collect();
        for s in &slices {
            if s.arity() != arity {
                return Err(StructureError::MixedArity { expected: arity, found: s.arity() });
            }
        }
        Ok(Graph { arity, slices })
    }

    pub fn empty(arity: usize) -> Graph {
        Graph { arity, slices: BTreeSet::new() }
    }

    pub fn singleton(slice: Slice) -> Graph {
        let arity = slice.arity();
        Graph { arity, slices: BTreeSet::from([slice]) }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn slices(&self) -> impl ExactSizeIterator<Item = &Slice> + '_ {
        self.slices.iter()
    }

    pub fn slice_set(&self) -> &BTreeSet<Slice> {
        &self.slices
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// Adds the arc to every slice.
    pub fn add_arc(&self, arc: &Arc) -> Graph {
        Graph { arity: self.arity, slices: self.slices.iter().map(|s| s.add_arc(arc.clone())).collect() }
    }

    pub fn audit(&self) -> Result<(), StructureError> {
        for s in &self.slices {
            if s.arity() != self.arity {
                return Err(StructureError::MixedArity { expected: self.arity, found: s.arity() });
            }
            s.audit()?;
        }
        Ok(())
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}-ary: ", self.arity)?;
        for (i, s) in self.slices.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{s:?}")?;
        }
        f.write_str("}")
    }
}

/// Arity of an expression.
pub fn arity(e: &Expr) -> usize {
    e.arity()
}
