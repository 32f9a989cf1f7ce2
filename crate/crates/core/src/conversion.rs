//! Conversion rules and normalization to basic form.
//!
//! The working object is a top-level graph whose slices keep their own
//! names. A locus is a path of indices: from a graph to one of its slices,
//! from a slice to one of its arcs (reaching the arc's label), and from a
//! complement to its operand (index 0). Indices follow the sorted order of
//! the underlying sets.
//!
//! Expression rules rewrite the expression at the locus. Arc rules
//! (`StrGraphArc`, `StrSliceArc`, `D_GlueGraph`, `D_CmplGraphArc`,
//! `D_EqRename`) take the locus of an arc label and rewrite the slice
//! holding that arc; a slice that becomes a graph is spliced into the
//! enclosing graph, or becomes a graph label.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Quantifier, Term};
use crate::json::{digest, expr_to_string, graph_to_string};
use crate::model::{Arc, Draft, Expr, Graph, Slice};
use crate::name::{Name, NameGen, PredSym};
use crate::ops::{glue_slice, glue_slice_graph, rename_nodes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleName {
    At,
    Bot,
    Neg,
    And,
    Or,
    Cond,
    Ex,
    All,
    Eq,
    CmplGraph,
    DblCmpl,
    StrGraphArc,
    StrSliceArc,
    Lift,
    #[serde(rename = "D_GlueGraph")]
    DGlueGraph,
    #[serde(rename = "D_CmplGraphArc")]
    DCmplGraphArc,
    #[serde(rename = "D_EqRename")]
    DEqRename,
}

impl RuleName {
    pub const ALL: [RuleName; 17] = [
        RuleName::At,
        RuleName::Bot,
        RuleName::Neg,
        RuleName::And,
        RuleName::Or,
        RuleName::Cond,
        RuleName::Ex,
        RuleName::All,
        RuleName::Eq,
        RuleName::CmplGraph,
        RuleName::DblCmpl,
        RuleName::StrGraphArc,
        RuleName::StrSliceArc,
        RuleName::Lift,
        RuleName::DGlueGraph,
        RuleName::DCmplGraphArc,
        RuleName::DEqRename,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleName::At => "At",
            RuleName::Bot => "Bot",
            RuleName::Neg => "Neg",
            RuleName::And => "And",
            RuleName::Or => "Or",
            RuleName::Cond => "Cond",
            RuleName::Ex => "Ex",
            RuleName::All => "All",
            RuleName::Eq => "Eq",
            RuleName::CmplGraph => "CmplGraph",
            RuleName::DblCmpl => "DblCmpl",
            RuleName::StrGraphArc => "StrGraphArc",
            RuleName::StrSliceArc => "StrSliceArc",
            RuleName::Lift => "Lift",
            RuleName::DGlueGraph => "D_GlueGraph",
            RuleName::DCmplGraphArc => "D_CmplGraphArc",
            RuleName::DEqRename => "D_EqRename",
        }
    }

    /// Rules that rewrite the slice holding the arc at the locus.
    pub fn is_arc_rule(self) -> bool {
        matches!(
            self,
            RuleName::StrGraphArc
                | RuleName::StrSliceArc
                | RuleName::DGlueGraph
                | RuleName::DCmplGraphArc
                | RuleName::DEqRename
        )
    }
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleName {
    type Err = ConversionError;
    fn from_str(s: &str) -> Result<RuleName, ConversionError> {
        RuleName::ALL.into_iter().find(|r| r.as_str() == s).ok_or_else(|| ConversionError::UnknownRule(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConversionError {
    #[error("rule {rule} does not apply at locus {locus:?}")]
    Inapplicable { rule: RuleName, locus: Vec<usize> },
    #[error("locus {0:?} does not address an expression")]
    BadLocus(Vec<usize>),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("normalization exceeded {0} steps")]
    StepBudget(usize),
    #[error("replay diverged at step {index}: expected digest {expected}, got {found}")]
    ReplayMismatch { index: usize, expected: String, found: String },
}

/// One recorded rule application.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConversionStep {
    pub rule: RuleName,
    pub locus: Vec<usize>,
    pub digest_before: String,
    pub digest_after: String,
}

pub fn graph_digest(g: &Graph) -> String {
    digest(graph_to_string(g).as_bytes())
}

pub fn expr_digest(e: &Expr) -> String {
    digest(expr_to_string(e).as_bytes())
}

// ---------------------------------------------------------------------
// Basic objects

pub fn is_basic_expr(e: &Expr) -> bool {
    match e {
        Expr::Pred(p) => !p.is_equality(),
        Expr::Cmpl(inner) => matches!(&**inner, Expr::Slice(t) if is_basic_slice(t)),
        _ => false,
    }
}

pub fn is_basic_draft(d: &Draft) -> bool {
    d.arcs().iter().all(|a| is_basic_expr(a.expr()))
}

pub fn is_basic_slice(s: &Slice) -> bool {
    is_basic_draft(s.draft())
}

pub fn is_basic_graph(g: &Graph) -> bool {
    g.slices().all(is_basic_slice)
}

/// Basic expression, or basic slice/graph when `e` wraps one.
pub fn is_basic(e: &Expr) -> bool {
    match e {
        Expr::Slice(s) => is_basic_slice(s),
        Expr::Graph(g) => is_basic_graph(g),
        other => is_basic_expr(other),
    }
}

// ---------------------------------------------------------------------
// Expression rules

fn fresh_distinct(gen: &mut NameGen, r: usize, avoid: &BTreeSet<Name>) -> Vec<Name> {
    (0..r)
        .map(|_| loop {
            let n = gen.fresh_from("u");
            if !avoid.contains(&n) {
                break n;
            }
        })
        .collect()
}

fn slice_expr(nodes: impl IntoIterator<Item = Name>, arcs: impl IntoIterator<Item = Arc>, dist: Vec<Name>) -> Expr {
    let draft = Draft::new(nodes.into_iter().collect(), arcs.into_iter().collect()).expect("well-formed rule output");
    Expr::slice(&Slice::new(draft, dist).expect("dist among nodes"))
}

fn formula_label_arc(f: &Formula) -> Arc {
    Arc::new(Expr::formula(f.clone()), f.free_names()).expect("name-set arity")
}

fn cmpl_formula_arc(f: &Formula) -> Arc {
    Arc::new(Expr::cmpl(Expr::formula(f.clone())), f.free_names()).expect("name-set arity")
}

/// Maximal block of equal quantifiers and the body under it.
fn quantifier_block(f: &Formula) -> (Quantifier, Vec<&str>, &Formula) {
    let Formula::Quant(q, _, _) = f else { unreachable!("quantified formula") };
    let mut vars = Vec::new();
    let mut cur = f;
    while let Formula::Quant(q2, v, body) = cur {
        if q2 != q {
            break;
        }
        vars.push(&**v);
        cur = body;
    }
    (*q, vars, cur)
}

fn formula_rule(f: &Formula) -> RuleName {
    match f {
        Formula::Atom(..) => RuleName::At,
        Formula::Falsum => RuleName::Bot,
        Formula::Not(_) => RuleName::Neg,
        Formula::And(..) => RuleName::And,
        Formula::Or(..) => RuleName::Or,
        Formula::Implies(..) => RuleName::Cond,
        Formula::Quant(Quantifier::Exists, ..) => RuleName::Ex,
        Formula::Quant(Quantifier::Forall, ..) => RuleName::All,
    }
}

/// Applies an expression rule to `e`, or `None` if its pattern fails.
fn rewrite_expr(e: &Expr, rule: RuleName, gen: &mut NameGen) -> Option<Expr> {
    match (rule, e) {
        (RuleName::Lift, _) => {
            let w = fresh_distinct(gen, e.arity(), &BTreeSet::new());
            let arc = Arc::new(e.clone(), w.clone()).expect("lift arity");
            Some(slice_expr(w.clone(), [arc], w))
        }
        (RuleName::Eq, Expr::Pred(p)) if p.is_equality() => {
            let u = gen.fresh_from("u");
            Some(slice_expr([u.clone()], [], vec![u.clone(), u]))
        }
        (RuleName::DblCmpl, Expr::Cmpl(inner)) => match &**inner {
            Expr::Cmpl(e2) => Some((**e2).clone()),
            _ => None,
        },
        (RuleName::CmplGraph, Expr::Cmpl(inner)) => match &**inner {
            Expr::Graph(h) => {
                let w = fresh_distinct(gen, h.arity(), &BTreeSet::new());
                let arcs: Vec<Arc> =
                    h.slices().map(|t| Arc::new(Expr::cmpl(Expr::slice(t)), w.clone()).expect("graph arity")).collect();
                Some(slice_expr(w.clone(), arcs, w))
            }
            _ => None,
        },
        (rule, Expr::Formula(f)) if formula_rule(f) == rule => Some(rewrite_formula(f, gen)),
        _ => None,
    }
}

fn rewrite_formula(f: &Formula, gen: &mut NameGen) -> Expr {
    match f {
        Formula::Atom(p, args) => {
            let names: Vec<Name> = args
                .iter()
                .map(|t| match t {
                    Term::Name(n) => n.clone(),
                    Term::Var(v) => panic!("free variable `{v}` in formula label"),
                })
                .collect();
            let dist = f.free_names();
            let arc = Arc::new(Expr::pred(p.clone()), names).expect("predicate arity");
            slice_expr(dist.clone(), [arc], dist)
        }
        Formula::Falsum => Expr::graph(&Graph::empty(0)),
        Formula::Not(g) => Expr::cmpl(Expr::formula((**g).clone())),
        Formula::And(a, b) => {
            let w = f.free_names();
            slice_expr(w.clone(), [formula_label_arc(a), formula_label_arc(b)], w)
        }
        Formula::Or(a, b) => {
            let w = f.free_names();
            let s1 = Slice::new(Draft::of_arcs([formula_label_arc(a)]).add_nodes(w.clone()), w.clone()).expect("dist");
            let s2 = Slice::new(Draft::of_arcs([formula_label_arc(b)]).add_nodes(w.clone()), w.clone()).expect("dist");
            Expr::graph(&Graph::new(w.len(), [s1, s2]).expect("same arity"))
        }
        Formula::Implies(a, b) => {
            let w = f.free_names();
            let s1 = Slice::new(Draft::of_arcs([cmpl_formula_arc(a)]).add_nodes(w.clone()), w.clone()).expect("dist");
            let s2 = Slice::new(Draft::of_arcs([formula_label_arc(b)]).add_nodes(w.clone()), w.clone()).expect("dist");
            Expr::graph(&Graph::new(w.len(), [s1, s2]).expect("same arity"))
        }
        Formula::Quant(..) => {
            let (q, vars, body) = quantifier_block(f);
            let outer = f.free_names();
            let avoid: BTreeSet<Name> = outer.iter().cloned().collect();
            let mut inst = body.clone();
            for v in &vars {
                let fresh = loop {
                    let n = gen.fresh_from(v);
                    if !avoid.contains(&n) {
                        break n;
                    }
                };
                inst = inst.instantiate(v, &fresh);
            }
            let w = inst.free_names();
            match q {
                Quantifier::Exists => slice_expr(w, [formula_label_arc(&inst)], outer),
                Quantifier::Forall => Expr::cmpl(slice_expr(w, [cmpl_formula_arc(&inst)], outer)),
            }
        }
    }
}

// ---------------------------------------------------------------------
// Arc rules

/// Result of rewriting a slice: a slice, or a graph of alternatives.
enum Replacement {
    Slice(Slice),
    Graph(Graph),
}

impl Replacement {
    fn into_expr(self) -> Expr {
        match self {
            Replacement::Slice(s) => Expr::slice(&s),
            Replacement::Graph(g) if g.len() == 1 => Expr::slice(g.slices().next().expect("one slice")),
            Replacement::Graph(g) => Expr::graph(&g),
        }
    }

    fn into_slices(self) -> Vec<Slice> {
        match self {
            Replacement::Slice(s) => vec![s],
            Replacement::Graph(g) => g.slice_set().iter().cloned().collect(),
        }
    }
}

fn rewrite_arc(s: &Slice, arc: &Arc, rule: RuleName, gen: &mut NameGen) -> Option<Replacement> {
    let rest = s.without_arc(arc);
    let v = arc.args();
    match (rule, arc.expr()) {
        (RuleName::StrGraphArc, Expr::Graph(h)) => {
            let slices = h.slices().map(|t| rest.add_arc(Arc::from_parts(Expr::slice(t), v.to_vec())));
            Some(Replacement::Graph(Graph::new(s.arity(), slices).expect("host arity")))
        }
        (RuleName::StrSliceArc, Expr::Slice(t)) => Some(Replacement::Slice(glue_slice(&rest, v, t, gen).ok()?.glued)),
        (RuleName::DGlueGraph, Expr::Graph(h)) => Some(Replacement::Graph(glue_slice_graph(&rest, v, h, gen).ok()?)),
        (RuleName::DCmplGraphArc, Expr::Cmpl(inner)) => match &**inner {
            Expr::Graph(h) => {
                let mut out = rest;
                for t in h.slices() {
                    out = out.add_arc(Arc::from_parts(Expr::cmpl(Expr::slice(t)), v.to_vec()));
                }
                Some(Replacement::Slice(out))
            }
            _ => None,
        },
        (RuleName::DEqRename, Expr::Pred(p)) if p.is_equality() => {
            let (keep, drop) = if v[0] <= v[1] { (&v[0], &v[1]) } else { (&v[1], &v[0]) };
            Some(Replacement::Slice(rename_nodes(&rest, &|n: &Name| if n == drop { keep.clone() } else { n.clone() })))
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------
// Locus navigation

struct Ctx<'a> {
    rule: RuleName,
    full: &'a [usize],
    gen: &'a mut NameGen,
}

impl Ctx<'_> {
    fn inapplicable<T>(&self) -> Result<T, ConversionError> {
        Err(ConversionError::Inapplicable { rule: self.rule, locus: self.full.to_vec() })
    }

    fn bad<T>(&self) -> Result<T, ConversionError> {
        Err(ConversionError::BadLocus(self.full.to_vec()))
    }

    fn in_graph(&mut self, g: &Graph, path: &[usize]) -> Result<Graph, ConversionError> {
        let Some((&i, rest)) = path.split_first() else { return self.bad() };
        let Some(s) = g.slices().nth(i) else { return self.bad() };
        let repl = self.in_slice(s, rest)?;
        let mut slices: BTreeSet<Slice> = g.slice_set().clone();
        slices.remove(s);
        slices.extend(repl.into_slices());
        Ok(Graph::new(g.arity(), slices).expect("arity preserved"))
    }

    fn in_slice(&mut self, s: &Slice, path: &[usize]) -> Result<Replacement, ConversionError> {
        let Some((&j, rest)) = path.split_first() else { return self.bad() };
        let Some(arc) = s.arcs().iter().nth(j) else { return self.bad() };
        if rest.is_empty() && self.rule.is_arc_rule() {
            return match rewrite_arc(s, arc, self.rule, self.gen) {
                Some(r) => Ok(r),
                None => self.inapplicable(),
            };
        }
        let label = self.in_expr(arc.expr(), rest)?;
        let rewritten = s.without_arc(arc).add_arc(Arc::from_parts(label, arc.args().to_vec()));
        Ok(Replacement::Slice(rewritten))
    }

    fn in_expr(&mut self, e: &Expr, path: &[usize]) -> Result<Expr, ConversionError> {
        if path.is_empty() {
            if self.rule.is_arc_rule() {
                return self.inapplicable();
            }
            return match rewrite_expr(e, self.rule, self.gen) {
                Some(out) => {
                    debug_assert_eq!(out.arity(), e.arity());
                    Ok(out)
                }
                None => self.inapplicable(),
            };
        }
        match e {
            Expr::Cmpl(inner) if path[0] == 0 => Ok(Expr::cmpl(self.in_expr(inner, &path[1..])?)),
            Expr::Slice(t) => Ok(self.in_slice(t, path)?.into_expr()),
            Expr::Graph(h) => {
                let g = self.in_graph(h, path)?;
                Ok(if g.len() == 1 { Expr::slice(g.slices().next().expect("one")) } else { Expr::graph(&g) })
            }
            _ => self.bad(),
        }
    }
}

/// Applies `rule` at `locus` in the top-level graph `root`.
pub fn convert_step(root: &Graph, rule: RuleName, locus: &[usize], gen: &mut NameGen) -> Result<Graph, ConversionError> {
    Ctx { rule, full: locus, gen }.in_graph(root, locus)
}

// ---------------------------------------------------------------------
// Redex search (leftmost, innermost first)

fn prefixed(i: usize, found: Option<(RuleName, Vec<usize>)>) -> Option<(RuleName, Vec<usize>)> {
    found.map(|(r, mut p)| {
        p.insert(0, i);
        (r, p)
    })
}

fn redex_graph(g: &Graph) -> Option<(RuleName, Vec<usize>)> {
    g.slices().enumerate().find_map(|(i, s)| prefixed(i, redex_slice(s)))
}

fn redex_slice(s: &Slice) -> Option<(RuleName, Vec<usize>)> {
    s.arcs().iter().enumerate().find_map(|(j, a)| prefixed(j, redex_label(a.expr())))
}

/// Redex for an arc label; an empty path means the label (or, for arc
/// rules, its arc) itself.
fn redex_label(e: &Expr) -> Option<(RuleName, Vec<usize>)> {
    match e {
        Expr::Pred(p) if p.is_equality() => Some((RuleName::DEqRename, vec![])),
        Expr::Pred(_) => None,
        Expr::Formula(f) => Some((formula_rule(f), vec![])),
        Expr::Slice(t) => redex_slice(t).or(Some((RuleName::StrSliceArc, vec![]))),
        Expr::Graph(h) => redex_graph(h).or(Some((RuleName::StrGraphArc, vec![]))),
        Expr::Cmpl(x) => redex_cmpl(x),
    }
}

/// Redex inside `Cmpl(x)`, path relative to the complement.
fn redex_cmpl(x: &Expr) -> Option<(RuleName, Vec<usize>)> {
    match x {
        Expr::Cmpl(_) => Some((RuleName::DblCmpl, vec![])),
        Expr::Pred(p) if p.is_equality() => Some((RuleName::Eq, vec![0])),
        Expr::Pred(_) => Some((RuleName::Lift, vec![0])),
        Expr::Formula(f) => Some((formula_rule(f), vec![0])),
        Expr::Slice(t) => prefixed(0, redex_slice(t)),
        Expr::Graph(h) => prefixed(0, redex_graph(h)).or(Some((RuleName::CmplGraph, vec![]))),
    }
}

/// The next redex the normalizer would rewrite.
pub fn find_redex(root: &Graph) -> Option<(RuleName, Vec<usize>)> {
    redex_graph(root)
}

// ---------------------------------------------------------------------
// Normalization

/// A normalized graph with the steps that produced it.
#[derive(Debug, Clone)]
pub struct Conversion {
    /// The graph the steps start from.
    pub initial: Graph,
    pub graph: Graph,
    pub steps: Vec<ConversionStep>,
    /// Name source to continue the derivation with.
    pub gen: NameGen,
}

/// Records steps against a root graph.
pub struct Converter {
    pub gen: NameGen,
    pub steps: Vec<ConversionStep>,
}

impl Converter {
    pub fn new(gen: NameGen) -> Self {
        Converter { gen, steps: Vec::new() }
    }

    pub fn step(&mut self, root: &Graph, rule: RuleName, locus: &[usize]) -> Result<Graph, ConversionError> {
        let out = convert_step(root, rule, locus, &mut self.gen)?;
        self.steps.push(ConversionStep {
            rule,
            locus: locus.to_vec(),
            digest_before: graph_digest(root),
            digest_after: graph_digest(&out),
        });
        Ok(out)
    }

    pub fn normalize(&mut self, mut root: Graph) -> Result<Graph, ConversionError> {
        let limit = 10_000 + 200 * root.slices().map(Slice::size).sum::<usize>();
        let mut taken = 0;
        while let Some((rule, locus)) = find_redex(&root) {
            taken += 1;
            if taken > limit {
                return Err(ConversionError::StepBudget(limit));
            }
            root = self.step(&root, rule, &locus)?;
        }
        Ok(root)
    }
}

/// Names a derivation must never generate: everything visible in `g`.
pub fn visible_names(g: &Graph) -> BTreeSet<Name> {
    g.slices().flat_map(|s| s.nodes().iter().cloned()).collect()
}

/// Basic form of a top-level graph.
pub fn to_basic_graph(g: &Graph) -> Result<Conversion, ConversionError> {
    let mut c = Converter::new(NameGen::reserving(visible_names(g)));
    let out = c.normalize(g.clone())?;
    Ok(Conversion { initial: g.clone(), graph: out, steps: c.steps, gen: c.gen })
}

pub fn to_basic_slice(s: &Slice) -> Result<Conversion, ConversionError> {
    to_basic_graph(&Graph::singleton(s.clone()))
}

/// Top-level slice `⟨C(w); {⟨e, w⟩}; w⟩`: a formula keeps its own names
/// as `w`, other expressions get fresh ones.
pub fn lift_root(e: &Expr, gen: &mut NameGen) -> Slice {
    let w = match e {
        Expr::Formula(f) => f.free_names(),
        _ => fresh_distinct(gen, e.arity(), &BTreeSet::new()),
    };
    Slice::new(Draft::of_arcs([Arc::new(e.clone(), w.clone()).expect("arity")]).add_nodes(w.clone()), w)
        .expect("dist among nodes")
}

/// Basic form of an expression. The first recorded step is the `Lift`
/// placing the expression into a top-level slice (locus `[]`).
pub fn to_basic(e: &Expr) -> Result<Conversion, ConversionError> {
    let root = Graph::singleton(lift_root(e, &mut NameGen::new()));
    let mut c = to_basic_graph(&root)?;
    c.steps.insert(
        0,
        ConversionStep {
            rule: RuleName::Lift,
            locus: vec![],
            digest_before: expr_digest(e),
            digest_after: graph_digest(&root),
        },
    );
    Ok(c)
}

/// Replays steps from `initial`, checking every digest. Fresh names are
/// drawn exactly as `to_basic_graph` draws them. Steps with an empty locus
/// (the initial lift) are skipped.
pub fn replay(initial: &Graph, steps: &[ConversionStep]) -> Result<Graph, ConversionError> {
    let mut gen = NameGen::reserving(visible_names(initial));
    let mut cur = initial.clone();
    for (index, st) in steps.iter().enumerate() {
        if st.locus.is_empty() {
            continue;
        }
        let before = graph_digest(&cur);
        if before != st.digest_before {
            return Err(ConversionError::ReplayMismatch { index, expected: st.digest_before.clone(), found: before });
        }
        cur = convert_step(&cur, st.rule, &st.locus, &mut gen)?;
        let after = graph_digest(&cur);
        if after != st.digest_after {
            return Err(ConversionError::ReplayMismatch { index, expected: st.digest_after.clone(), found: after });
        }
    }
    Ok(cur)
}

/// Predicate symbols occurring in a graph (useful for building models).
pub fn graph_predicates(g: &Graph) -> BTreeSet<PredSym> {
    let mut acc = BTreeSet::new();
    for s in g.slices() {
        s.predicates(&mut acc);
    }
    acc
}
