//! Interactive derivation state: a difference slice normalized to basic
//! form, then expanded step by step. Every mutation yields a delta that a
//! client can apply to its copy of the graph view; deltas also serve as a
//! replay log.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::formula::Formula;
use crate::json::{slice_from_json, slice_to_json, ArcJson, SliceJson, expr_to_json};
use crate::model::{Graph, Slice};
use crate::name::Name;
use crate::ops::difference_slice_of_formulas;
use crate::prover::{templates, Budget, Derivation, EraseRecord, ExpandRecord, ProverError, Status, Trace, TraceEntry};
use crate::render::render_graph;
use crate::semantics::FiniteModel;
use crate::syntax::{parse_formula_with, Signature, SyntaxError};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{which}: {source}")]
    Parse { which: String, source: SyntaxError },
    #[error("no open slice with id {0}")]
    UnknownSlice(u64),
    #[error("illegal expansion: {0}")]
    Illegal(String),
    #[error("session is {0:?}")]
    Terminal(Status),
    #[error(transparent)]
    Prover(#[from] ProverError),
}

impl SessionError {
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::Parse { .. } => "parse_error",
            SessionError::UnknownSlice(_) => "unknown_slice",
            SessionError::Illegal(_) => "illegal_choice",
            SessionError::Terminal(_) => "terminal_state",
            SessionError::Prover(_) => "internal",
        }
    }

    /// Position in the offending text, for parse errors.
    pub fn locus(&self) -> Option<usize> {
        match self {
            SessionError::Parse { source, .. } => source.position(),
            _ => None,
        }
    }
}

/// Formulas a session was created from. A missing conclusion means
/// `false`, i.e. the premises are checked for unsatisfiability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    #[serde(default)]
    pub premises: Vec<String>,
    #[serde(default)]
    pub conclusion: Option<String>,
}

impl Problem {
    pub fn parse(&self) -> Result<(Vec<Formula>, Formula), SessionError> {
        let mut sig = Signature::default();
        let mut premises = Vec::new();
        for (i, p) in self.premises.iter().enumerate() {
            let f = parse_formula_with(p, &mut sig).map_err(|source| SessionError::Parse { which: format!("premise {i}"), source })?;
            premises.push(f);
        }
        let conclusion = match &self.conclusion {
            Some(c) => parse_formula_with(c, &mut sig).map_err(|source| SessionError::Parse { which: "conclusion".into(), source })?,
            None => Formula::Falsum,
        };
        Ok((premises, conclusion))
    }
}

/// A complemented-slice arc of a slice, offered as an expansion template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateView {
    pub arc: ArcJson,
    pub t: SliceJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceView {
    pub id: u64,
    pub slice: SliceJson,
    /// Complemented-slice arcs of the slice itself.
    pub templates: Vec<TemplateView>,
    /// Complemented slices occurring deeper inside those arcs.
    pub nested: Vec<SliceJson>,
    pub nodes: Vec<Name>,
    pub stuck: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Countermodel {
    pub slice: u64,
    pub model: FiniteModel,
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphView {
    pub status: Status,
    pub arity: usize,
    /// Number of trace entries; increases with every change.
    pub version: usize,
    pub slices: Vec<SliceView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub countermodel: Option<Countermodel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub version: usize,
    pub status: Status,
    pub removed: Vec<u64>,
    pub added: Vec<SliceView>,
    /// Slices whose view changed without being replaced.
    pub updated: Vec<SliceView>,
    pub expansions: Vec<ExpandRecord>,
    pub erased: Vec<EraseRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub countermodel: Option<Countermodel>,
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty() && self.updated.is_empty() && self.countermodel.is_none()
    }
}

/// Applies a delta to a graph view, as a client would.
pub fn apply_delta(view: &mut GraphView, delta: &Delta) {
    view.slices.retain(|s| !delta.removed.contains(&s.id));
    for s in delta.added.iter().chain(&delta.updated) {
        view.slices.retain(|x| x.id != s.id);
        view.slices.push(s.clone());
    }
    view.slices.sort_by_key(|s| s.id);
    view.status = delta.status;
    view.version = delta.version;
    if delta.countermodel.is_some() {
        view.countermodel = delta.countermodel.clone();
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    problem: Problem,
    derivation: Derivation,
}

fn slice_view(id: u64, s: &Slice, stuck: bool) -> SliceView {
    let direct: Vec<TemplateView> = s
        .arcs()
        .iter()
        .filter_map(|a| {
            let t = a.expr().complemented_slice()?;
            Some(TemplateView { arc: ArcJson { expr: expr_to_json(a.expr()), args: a.args().to_vec() }, t: slice_to_json(t) })
        })
        .collect();
    let direct_set: BTreeSet<_> = s.arcs().iter().filter_map(|a| a.expr().complemented_slice().cloned()).collect();
    let nested = templates(s).into_iter().filter(|t| !direct_set.contains(t)).map(|t| slice_to_json(&t)).collect();
    SliceView { id, slice: slice_to_json(s), templates: direct, nested, nodes: s.nodes().iter().cloned().collect(), stuck }
}

impl Session {
    pub fn create(problem: Problem, exec: Exec) -> Result<Session, SessionError> {
        let (premises, conclusion) = problem.parse()?;
        let delta = difference_slice_of_formulas(&premises, &conclusion);
        let derivation = Derivation::new(&Graph::singleton(delta), exec)?;
        Ok(Session { problem, derivation })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn status(&self) -> Status {
        self.derivation.status()
    }

    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    fn views(&self) -> BTreeMap<u64, SliceView> {
        self.derivation
            .open_slices()
            .into_iter()
            .map(|(id, s)| (id, slice_view(id, s, self.derivation.is_stuck(id))))
            .collect()
    }

    fn countermodel(&self) -> Option<Countermodel> {
        self.derivation.saturation().map(|s| Countermodel { slice: s.slice, model: s.model.clone(), witness: s.witness.clone() })
    }

    pub fn graph_view(&self) -> GraphView {
        GraphView {
            status: self.status(),
            arity: self.derivation.start().arity(),
            version: self.derivation.steps().len(),
            slices: self.views().into_values().collect(),
            countermodel: self.countermodel(),
        }
    }

    pub fn trace(&self) -> Trace {
        self.derivation.trace()
    }

    pub fn render(&self) -> String {
        render_graph(&self.derivation.graph())
    }

    fn delta_since(&self, before: BTreeMap<u64, SliceView>, steps_before: usize, had_model: bool) -> Delta {
        let after = self.views();
        let removed = before.keys().filter(|id| !after.contains_key(id)).copied().collect();
        let added = after.iter().filter(|(id, _)| !before.contains_key(id)).map(|(_, v)| v.clone()).collect();
        let updated =
            after.iter().filter(|(id, v)| before.get(id).is_some_and(|b| b != *v)).map(|(_, v)| v.clone()).collect();
        let mut expansions = Vec::new();
        let mut erased = Vec::new();
        for e in &self.derivation.steps()[steps_before..] {
            match e {
                TraceEntry::Expand { expand } => expansions.push(expand.clone()),
                TraceEntry::Erase { erase } => erased.push(erase.clone()),
                TraceEntry::Convert(_) => {}
            }
        }
        Delta {
            version: self.derivation.steps().len(),
            status: self.status(),
            removed,
            added,
            updated,
            expansions,
            erased,
            countermodel: if had_model { None } else { self.countermodel() },
        }
    }

    fn require_open(&self) -> Result<(), SessionError> {
        match self.status() {
            Status::Open => Ok(()),
            s => Err(SessionError::Terminal(s)),
        }
    }

    /// Expands open slice `id` with `t` at `v`.
    pub fn expand(&mut self, id: u64, t: &SliceJson, v: &[Name]) -> Result<Delta, SessionError> {
        self.require_open()?;
        if !self.derivation.open_slices().contains_key(&id) {
            return Err(SessionError::UnknownSlice(id));
        }
        let t = slice_from_json(t).map_err(|e| SessionError::Illegal(e.to_string()))?;
        let (before, steps) = (self.views(), self.derivation.steps().len());
        match self.derivation.apply_expansion(id, &t, v) {
            Ok(()) => Ok(self.delta_since(before, steps, false)),
            Err(e @ (ProverError::Arity { .. } | ProverError::NotANode(_) | ProverError::NotBasic)) => {
                Err(SessionError::Illegal(e.to_string()))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Runs the automatic strategy within `budget`.
    pub fn auto(&mut self, budget: &Budget) -> Result<Delta, SessionError> {
        self.require_open()?;
        let (before, steps) = (self.views(), self.derivation.steps().len());
        self.derivation.run(budget)?;
        Ok(self.delta_since(before, steps, false))
    }

    /// Re-applies a recorded delta (expansions, set-aside slices and
    /// saturation) to a session created from the same problem.
    pub fn replay_delta(&mut self, delta: &Delta) -> Result<(), SessionError> {
        for x in &delta.expansions {
            let t = slice_from_json(&x.t).map_err(|e| SessionError::Illegal(e.to_string()))?;
            self.derivation.apply_expansion(x.slice, &t, &x.v)?;
        }
        for v in delta.added.iter().chain(&delta.updated) {
            if v.stuck {
                self.derivation.set_aside(v.id);
            }
        }
        if let Some(c) = &delta.countermodel {
            self.derivation.mark_saturated(c.slice)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(premises: &[&str], conclusion: Option<&str>) -> Problem {
        Problem { premises: premises.iter().map(|s| s.to_string()).collect(), conclusion: conclusion.map(str::to_string) }
    }

    #[test]
    fn direct_conflict_is_refuted_at_creation() {
        let s = Session::create(problem(&["p(u) & q(u)"], Some("p(u)")), Exec::Sequential).unwrap();
        assert_eq!(s.status(), Status::Refuted);
        assert!(s.graph_view().slices.is_empty());
    }

    #[test]
    fn falsum_saturates() {
        let mut s = Session::create(problem(&[], Some("false")), Exec::Sequential).unwrap();
        assert_eq!(s.status(), Status::Open);
        let d = s.auto(&Budget::default()).unwrap();
        assert_eq!(d.status, Status::Saturated);
        assert!(d.countermodel.is_some());
        assert!(matches!(s.auto(&Budget::default()), Err(SessionError::Terminal(Status::Saturated))));
    }

    #[test]
    fn zero_budget_changes_nothing() {
        let mut s = Session::create(problem(&["forall x. (p(x) -> q(x))", "p(u)"], Some("q(u)")), Exec::Sequential).unwrap();
        let v0 = s.graph_view();
        let d = s.auto(&Budget { max_expansions: 0, ..Budget::default() }).unwrap();
        assert!(d.is_empty());
        assert_eq!(s.graph_view(), v0);
    }

    #[test]
    fn deltas_rebuild_the_view_and_replay() {
        let p = problem(&["forall x. (p(x) -> q(x))", "p(u)"], Some("q(u)"));
        let mut s = Session::create(p.clone(), Exec::Sequential).unwrap();
        let mut view = s.graph_view();
        let d = s.auto(&Budget::default()).unwrap();
        apply_delta(&mut view, &d);
        assert_eq!(view, s.graph_view());
        assert_eq!(view.status, Status::Refuted);

        let mut again = Session::create(p, Exec::Sequential).unwrap();
        again.replay_delta(&d).unwrap();
        assert_eq!(
            serde_json::to_string(&again.graph_view()).unwrap(),
            serde_json::to_string(&s.graph_view()).unwrap()
        );
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = Session::create(problem(&["p(u"], None), Exec::Sequential).unwrap_err();
        assert_eq!(e.code(), "parse_error");
        assert!(e.locus().is_some());
    }
}
