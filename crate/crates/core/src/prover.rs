//! Expansion, zero erasure and proof search.
//!
//! A derivation keeps a frontier of open slices, each with an id. A step
//! picks the shallowest open slice, chooses a live candidate `(T, v)` and
//! replaces the slice by `S ⋈_v T` and `S + ⟨T̄, v⟩`; children found zero
//! are erased with their witnesses. A slice with no live candidate is
//! saturated and its natural model (nodes as elements, predicate arcs as
//! relations) is checked by the oracle.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conversion::{self, is_basic_slice, ConversionError, ConversionStep};
use crate::exec::Exec;
use crate::formula::Formula;
use crate::json::{self, graph_from_json, graph_to_json, slice_from_json, slice_to_json, GraphJson, JsonError, SliceJson};
use crate::matching::{is_zero_slice, slice_maps_onto, Target, ZeroWitness};
use crate::model::{Arc, Canon, Draft, Expr, Graph, Slice};
use crate::name::{Name, NameGen, PredSym};
use crate::ops::{difference_slice_of_formulas, glue_slice, GlueResult, OpsError};
use crate::semantics::{Assignment, Evaluator, FiniteModel, SemanticsError};

#[derive(Debug, Error)]
pub enum ProverError {
    #[error("tuple of length {found} does not fit a slice of arity {expected}")]
    Arity { expected: usize, found: usize },
    #[error("name `{0}` is not a node of the slice")]
    NotANode(Name),
    #[error("slice is not basic")]
    NotBasic,
    #[error("no open slice with id {0}")]
    UnknownSlice(u64),
    #[error("derivation is closed")]
    Closed,
    #[error("slice is not saturated")]
    NotSaturated,
    #[error("trace replay failed at entry {index}: {reason}")]
    Replay { index: usize, reason: String },
    #[error(transparent)]
    Ops(#[from] OpsError),
    #[error(transparent)]
    Conversion(#[from] ConversionError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Json(#[from] JsonError),
}

/// Resource limits for proof search. Missing fields take their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct Budget {
    pub max_expansions: u64,
    pub max_slice_nodes: usize,
    #[serde(with = "millis")]
    pub max_wall_time: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_expansions: 10_000, max_slice_nodes: 64, max_wall_time: Duration::from_secs(30) }
    }
}

mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

// ---------------------------------------------------------------------
// Expansion

fn check_choice(s: &Slice, t: &Slice, v: &[Name]) -> Result<(), ProverError> {
    if v.len() != t.arity() {
        return Err(ProverError::Arity { expected: t.arity(), found: v.len() });
    }
    if let Some(n) = v.iter().find(|n| !s.nodes().contains(*n)) {
        return Err(ProverError::NotANode(n.clone()));
    }
    Ok(())
}

/// Fresh names for gluing into `s` depend on `s` alone, so replay needs no
/// generator state.
fn slice_gen(s: &Slice) -> NameGen {
    NameGen::reserving(s.nodes().iter().cloned())
}

fn cmpl_arc(t: &Canon<Slice>, v: &[Name]) -> Arc {
    Arc::new(Expr::cmpl(Expr::Slice(t.clone())), v.to_vec()).expect("tuple matches arity")
}

fn expand_parts(s: &Slice, t: &Canon<Slice>, v: &[Name]) -> Result<(GlueResult<Slice>, Slice), ProverError> {
    check_choice(s, t, v)?;
    let left = glue_slice(s, v, t, &mut slice_gen(s))?;
    let right = s.add_arc(cmpl_arc(t, v));
    Ok((left, right))
}

/// `S ⤳ { S ⋈_v T , S + ⟨T̄, v⟩ }`.
pub fn expand(s: &Slice, t: &Slice, v: &[Name]) -> Result<Graph, ProverError> {
    if !is_basic_slice(s) || !is_basic_slice(t) {
        return Err(ProverError::NotBasic);
    }
    let t = canonical(t);
    let (left, right) = expand_parts(s, &t, v)?;
    Ok(Graph::new(s.arity(), [left.glued, right]).expect("children keep the arity"))
}

fn canonical(t: &Slice) -> Canon<Slice> {
    match Expr::slice(t) {
        Expr::Slice(c) => c,
        _ => unreachable!("slice expression"),
    }
}

/// Slices occurring complemented in `s`, also inside embedded slices.
pub fn templates(s: &Slice) -> BTreeSet<Canon<Slice>> {
    fn walk(d: &Draft, acc: &mut BTreeSet<Canon<Slice>>) {
        for a in d.arcs() {
            if let Some(t) = a.expr().complemented_slice() {
                if acc.insert(t.clone()) {
                    walk(t.draft(), acc);
                }
            }
        }
    }
    let mut acc = BTreeSet::new();
    walk(s.draft(), &mut acc);
    acc
}

// ---------------------------------------------------------------------
// Candidates

/// A possible expansion of a slice, ordered by age first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Candidate {
    pub age: u32,
    pub t: Canon<Slice>,
    pub v: Vec<Name>,
}

/// An open slice with the bookkeeping needed for fair selection.
#[derive(Debug, Clone)]
struct Open {
    slice: Slice,
    depth: u32,
    node_age: BTreeMap<Name, u32>,
    t_age: BTreeMap<Canon<Slice>, u32>,
}

impl Open {
    fn root(slice: Slice) -> Open {
        let node_age = slice.nodes().iter().map(|n| (n.clone(), 0)).collect();
        let t_age = templates(&slice).into_iter().map(|t| (t, 0)).collect();
        Open { slice, depth: 0, node_age, t_age }
    }

    /// Child bookkeeping; `embed` maps parent nodes to child nodes.
    fn child(&self, slice: Slice, embed: Option<&BTreeMap<Name, Name>>) -> Open {
        let born = self.depth + 1;
        let mut node_age: BTreeMap<Name, u32> = BTreeMap::new();
        for (n, &age) in &self.node_age {
            let image = embed.map_or(n, |m| &m[n]);
            let e = node_age.entry(image.clone()).or_insert(age);
            *e = (*e).min(age);
        }
        for n in slice.nodes() {
            node_age.entry(n.clone()).or_insert(born);
        }
        let t_age = templates(&slice).into_iter().map(|t| {
            let age = self.t_age.get(&t).copied().unwrap_or(born);
            (t, age)
        });
        Open { t_age: t_age.collect(), slice, depth: born, node_age }
    }
}

/// Upper bound on (template, tuple) pairs examined per slice.
const MAX_PAIRS: usize = 2_000_000;
/// Candidates whose children are computed before choosing.
const LOOKAHEAD: usize = 256;

fn tuples(nodes: &[Name], r: usize) -> Vec<Vec<Name>> {
    let mut out = vec![Vec::new()];
    for _ in 0..r {
        out = out.into_iter().flat_map(|p| nodes.iter().map(move |n| [p.clone(), vec![n.clone()]].concat())).collect();
    }
    out
}

/// Live candidates in fair order, or `None` if there are too many pairs
/// to examine.
fn live_candidates(o: &Open, exec: Exec) -> Option<Vec<Candidate>> {
    let nodes: Vec<Name> = o.slice.nodes().iter().cloned().collect();
    let mut total = 0usize;
    for t in o.t_age.keys() {
        total = total.saturating_add(nodes.len().saturating_pow(t.arity() as u32));
    }
    if total > MAX_PAIRS {
        return None;
    }
    let pairs: Vec<(Canon<Slice>, Vec<Name>)> =
        o.t_age.keys().flat_map(|t| tuples(&nodes, t.arity()).into_iter().map(move |v| (t.clone(), v))).collect();
    let target = Target::new(o.slice.draft());
    let live = exec.map(&pairs, |(t, v)| {
        !o.slice.arcs().contains(&cmpl_arc(t, v)) && slice_maps_onto(t, &target, v).is_none()
    });
    let mut out: Vec<Candidate> = pairs
        .into_iter()
        .zip(live)
        .filter(|(_, l)| *l)
        .map(|((t, v), _)| {
            let age = v.iter().map(|n| o.node_age[n]).chain([o.t_age[&t]]).max().unwrap_or(0);
            Candidate { age, t, v }
        })
        .collect();
    out.sort();
    Some(out)
}

struct Outcome {
    cand: Candidate,
    left: GlueResult<Slice>,
    right: Slice,
    left_zero: Option<ZeroWitness>,
    right_zero: Option<ZeroWitness>,
}

impl Outcome {
    fn score(&self) -> usize {
        self.left_zero.is_some() as usize + self.right_zero.is_some() as usize
    }
}

fn outcome(o: &Open, cand: &Candidate) -> Outcome {
    let (left, right) = expand_parts(&o.slice, &cand.t, &cand.v).expect("candidate tuples are node tuples");
    let left_zero = is_zero_slice(&left.glued);
    let right_zero = is_zero_slice(&right);
    Outcome { cand: cand.clone(), left, right, left_zero, right_zero }
}

/// Closing expansions first; one-sided closes on even depths; otherwise
/// the oldest candidate, which keeps the search fair.
fn choose(o: &Open, cands: &[Candidate], exec: Exec) -> Outcome {
    let window = &cands[..cands.len().min(LOOKAHEAD)];
    let mut outs = exec.map(window, |c| outcome(o, c));
    let pick = outs
        .iter()
        .position(|x| x.score() == 2)
        .or_else(|| if o.depth.is_multiple_of(2) { outs.iter().position(|x| x.score() == 1) } else { None })
        .unwrap_or(0);
    outs.swap_remove(pick)
}

// ---------------------------------------------------------------------
// Natural model

/// Model whose elements are the nodes of `s` and whose relations are read
/// off the predicate arcs. Symbols in `extra` are interpreted as empty.
pub fn natural_model(s: &Slice, extra: &BTreeSet<PredSym>) -> Result<FiniteModel, SemanticsError> {
    let mut nodes: Vec<Name> = s.nodes().iter().cloned().collect();
    if nodes.is_empty() {
        nodes.push(Name::new("u"));
    }
    let index: BTreeMap<&Name, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let mut symbols = extra.clone();
    s.predicates(&mut symbols);
    let mut interp: BTreeMap<PredSym, Vec<Vec<usize>>> = symbols.into_iter().map(|p| (p, Vec::new())).collect();
    for a in s.arcs() {
        if let Expr::Pred(p) = a.expr() {
            interp.entry(p.clone()).or_default().push(a.args().iter().map(|n| index[n]).collect());
        }
    }
    FiniteModel::labelled(nodes.iter().map(|n| n.as_str().to_string()).collect(), interp)
}

/// Natural model of a saturated slice, verified: the identity assignment
/// must satisfy every arc.
pub fn extract_countermodel(s: &Slice, extra: &BTreeSet<PredSym>) -> Result<FiniteModel, ProverError> {
    let m = natural_model(s, extra)?;
    let g: Assignment = s.nodes().iter().map(|n| (n.clone(), m.element(n.as_str()).expect("node element"))).collect();
    if Evaluator::new(&m).satisfies_draft(&g, s.draft())? {
        Ok(m)
    } else {
        Err(ProverError::NotSaturated)
    }
}

/// Whether `s` has no live candidate.
pub fn is_saturated(s: &Slice, exec: Exec) -> bool {
    live_candidates(&Open::root(s.clone()), exec).is_some_and(|c| c.is_empty())
}

// ---------------------------------------------------------------------
// Trace

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandRecord {
    pub slice: u64,
    pub t: SliceJson,
    pub v: Vec<Name>,
    pub left: u64,
    pub right: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EraseRecord {
    pub slice: u64,
    pub witness: ZeroWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceEntry {
    Convert(ConversionStep),
    Expand { expand: ExpandRecord },
    Erase { erase: EraseRecord },
}

/// Conversion steps from `initial`, then expansions and erasures from
/// `start` (the basic graph, slices numbered in order from 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub initial: GraphJson,
    pub start: GraphJson,
    pub steps: Vec<TraceEntry>,
}

impl Trace {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("trace serializes")
    }

    pub fn digest(&self) -> String {
        json::digest(self.to_json_string().as_bytes())
    }

    pub fn expansions(&self) -> usize {
        self.steps.iter().filter(|e| matches!(e, TraceEntry::Expand { .. })).count()
    }

    pub fn conversion_steps(&self) -> impl Iterator<Item = &ConversionStep> {
        self.steps.iter().filter_map(|e| match e {
            TraceEntry::Convert(c) => Some(c),
            _ => None,
        })
    }

    pub fn erasures(&self) -> impl Iterator<Item = &EraseRecord> {
        self.steps.iter().filter_map(|e| match e {
            TraceEntry::Erase { erase } => Some(erase),
            _ => None,
        })
    }
}

/// Gives every nodeless slice one isolated node, so that its natural
/// model has a nonempty universe. This does not change its extension.
pub fn pad(g: &Graph) -> Graph {
    let slices = g.slices().map(|s| {
        if s.nodes().is_empty() {
            Slice::new(s.draft().add_nodes([Name::new("u")]), s.dist().to_vec()).expect("dist unchanged")
        } else {
            s.clone()
        }
    });
    Graph::new(g.arity(), slices).expect("arity unchanged")
}

/// Slices left after replaying a trace.
#[derive(Debug, Clone, Default)]
pub struct Replayed {
    pub open: BTreeMap<u64, Slice>,
    /// Erased slices with the witness that erased them, in trace order.
    pub erased: Vec<(u64, Slice, ZeroWitness)>,
}

/// Replays a trace, checking conversion digests, recomputing every
/// expansion and re-verifying every witness. Returns the open slices by id.
pub fn replay_trace(trace: &Trace) -> Result<BTreeMap<u64, Slice>, ProverError> {
    replay_trace_full(trace).map(|r| r.open)
}

pub fn replay_trace_full(trace: &Trace) -> Result<Replayed, ProverError> {
    let initial = graph_from_json(&trace.initial)?;
    let convs: Vec<ConversionStep> = trace.conversion_steps().cloned().collect();
    let converted = conversion::replay(&initial, &convs)?;
    let start = graph_from_json(&trace.start)?;
    if pad(&converted) != start {
        return Err(ProverError::Replay { index: convs.len(), reason: "start graph differs from conversion result".into() });
    }
    let mut open: BTreeMap<u64, Slice> = start.slices().cloned().enumerate().map(|(i, s)| (i as u64, s)).collect();
    let mut erased = Vec::new();
    for (index, e) in trace.steps.iter().enumerate() {
        let fail = |reason: &str| ProverError::Replay { index, reason: reason.to_string() };
        match e {
            TraceEntry::Convert(_) => {}
            TraceEntry::Expand { expand } => {
                let s = open.remove(&expand.slice).ok_or_else(|| fail("expanded slice is not open"))?;
                let t = canonical(&slice_from_json(&expand.t)?);
                let (left, right) = expand_parts(&s, &t, &expand.v)?;
                open.insert(expand.left, left.glued);
                open.insert(expand.right, right);
            }
            TraceEntry::Erase { erase } => {
                let s = open.remove(&erase.slice).ok_or_else(|| fail("erased slice is not open"))?;
                if !erase.witness.verify(&s) {
                    return Err(fail("witness does not verify"));
                }
                erased.push((erase.slice, s, erase.witness.clone()));
            }
        }
    }
    Ok(Replayed { open, erased })
}

// ---------------------------------------------------------------------
// Derivation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Open,
    Refuted,
    Saturated,
    Exhausted,
}

/// Statistics reported when the search gives up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub expansions: u64,
    pub frontier: usize,
    pub stuck: usize,
    pub elapsed_ms: u64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct Saturation {
    pub slice: u64,
    pub model: FiniteModel,
    /// Values of the slice's distinguished list.
    pub witness: Vec<String>,
}

/// State of a normal derivation after conversion.
#[derive(Debug, Clone)]
pub struct Derivation {
    initial: Graph,
    start: Graph,
    open: BTreeMap<u64, Open>,
    stuck: BTreeSet<u64>,
    next_id: u64,
    steps: Vec<TraceEntry>,
    expansions: u64,
    saturated: Option<Saturation>,
    extra: BTreeSet<PredSym>,
    max_slice_nodes: usize,
    exec: Exec,
}

impl Derivation {
    /// Converts `initial` to basic form and erases zero slices.
    pub fn new(initial: &Graph, exec: Exec) -> Result<Derivation, ProverError> {
        let conv = conversion::to_basic_graph(initial)?;
        Ok(Derivation::from_conversion(initial, conv.graph, conv.steps, exec))
    }

    /// Starts from a basic graph obtained from `initial` by `steps`.
    pub fn from_conversion(initial: &Graph, basic: Graph, steps: Vec<ConversionStep>, exec: Exec) -> Derivation {
        let start = pad(&basic);
        let mut extra = conversion::graph_predicates(initial);
        extra.extend(conversion::graph_predicates(&start));
        let mut d = Derivation {
            initial: initial.clone(),
            open: start.slices().cloned().enumerate().map(|(i, s)| (i as u64, Open::root(s))).collect(),
            next_id: start.len() as u64,
            start,
            stuck: BTreeSet::new(),
            steps: steps.into_iter().map(TraceEntry::Convert).collect(),
            expansions: 0,
            saturated: None,
            extra,
            max_slice_nodes: Budget::default().max_slice_nodes,
            exec,
        };
        let ids: Vec<u64> = d.open.keys().copied().collect();
        for id in ids {
            d.erase_if_zero(id);
        }
        d
    }

    pub fn set_max_slice_nodes(&mut self, n: usize) {
        self.max_slice_nodes = n;
    }

    fn erase_if_zero(&mut self, id: u64) -> bool {
        let Some(w) = is_zero_slice(&self.open[&id].slice) else { return false };
        self.open.remove(&id);
        self.steps.push(TraceEntry::Erase { erase: EraseRecord { slice: id, witness: w } });
        true
    }

    pub fn status(&self) -> Status {
        if self.saturated.is_some() {
            Status::Saturated
        } else if !self.open.is_empty() {
            Status::Open
        } else if self.stuck.is_empty() {
            Status::Refuted
        } else {
            Status::Exhausted
        }
    }

    pub fn saturation(&self) -> Option<&Saturation> {
        self.saturated.as_ref()
    }

    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    pub fn start(&self) -> &Graph {
        &self.start
    }

    /// Open slices by id (slices set aside for size are included).
    pub fn open_slices(&self) -> BTreeMap<u64, &Slice> {
        self.open.iter().map(|(id, o)| (*id, &o.slice)).collect()
    }

    pub fn is_stuck(&self, id: u64) -> bool {
        self.stuck.contains(&id)
    }

    /// The current graph: every open slice.
    pub fn graph(&self) -> Graph {
        Graph::new(self.start.arity(), self.open.values().map(|o| o.slice.clone())).expect("same arity")
    }

    pub fn trace(&self) -> Trace {
        Trace { initial: graph_to_json(&self.initial), start: graph_to_json(&self.start), steps: self.steps.clone() }
    }

    pub fn steps(&self) -> &[TraceEntry] {
        &self.steps
    }

    /// Live candidates of an open slice in fair order.
    pub fn candidates(&self, id: u64) -> Result<Vec<Candidate>, ProverError> {
        let o = self.open.get(&id).ok_or(ProverError::UnknownSlice(id))?;
        Ok(live_candidates(o, self.exec).unwrap_or_default())
    }

    fn record(&mut self, id: u64, out: Outcome) -> u64 {
        let parent = self.open.remove(&id).expect("open slice");
        let (left_id, right_id) = (self.next_id, self.next_id + 1);
        self.next_id += 2;
        self.expansions += 1;
        self.steps.push(TraceEntry::Expand {
            expand: ExpandRecord {
                slice: id,
                t: slice_to_json(&out.cand.t),
                v: out.cand.v.clone(),
                left: left_id,
                right: right_id,
            },
        });
        let left = parent.child(out.left.glued, Some(&out.left.embed_left));
        let right = parent.child(out.right, None);
        for (cid, child, zero) in [(left_id, left, out.left_zero), (right_id, right, out.right_zero)] {
            match zero {
                Some(w) => self.steps.push(TraceEntry::Erase { erase: EraseRecord { slice: cid, witness: w } }),
                None => {
                    let big = child.slice.nodes().len() > self.max_slice_nodes;
                    self.open.insert(cid, child);
                    if big {
                        self.stuck.insert(cid);
                    }
                }
            }
        }
        left_id
    }

    /// Applies a chosen expansion to open slice `id`.
    pub fn apply_expansion(&mut self, id: u64, t: &Slice, v: &[Name]) -> Result<(), ProverError> {
        if self.status() != Status::Open {
            return Err(ProverError::Closed);
        }
        let o = self.open.get(&id).ok_or(ProverError::UnknownSlice(id))?;
        if !is_basic_slice(t) {
            return Err(ProverError::NotBasic);
        }
        let t = canonical(t);
        check_choice(&o.slice, &t, v)?;
        let age = v.iter().map(|n| o.node_age[n]).max().unwrap_or(0);
        let out = outcome(o, &Candidate { age, t, v: v.to_vec() });
        self.record(id, out);
        Ok(())
    }

    /// Excludes an open slice from automatic search.
    pub fn set_aside(&mut self, id: u64) {
        if self.open.contains_key(&id) {
            self.stuck.insert(id);
        }
    }

    /// Declares open slice `id` saturated after checking that it is and
    /// that its natural model passes the oracle.
    pub fn mark_saturated(&mut self, id: u64) -> Result<(), ProverError> {
        let o = self.open.get(&id).ok_or(ProverError::UnknownSlice(id))?;
        if !live_candidates(o, self.exec).is_some_and(|c| c.is_empty()) {
            return Err(ProverError::NotSaturated);
        }
        let model = extract_countermodel(&o.slice, &self.extra)?;
        let witness = o.slice.dist().iter().map(|n| n.as_str().to_string()).collect();
        self.saturated = Some(Saturation { slice: id, model, witness });
        Ok(())
    }

    /// Next slice the automatic strategy works on: shallowest, then lowest id.
    fn next_slice(&self) -> Option<u64> {
        self.open.iter().filter(|(id, _)| !self.stuck.contains(id)).min_by_key(|(id, o)| (o.depth, **id)).map(|(id, _)| *id)
    }

    /// One step of the automatic strategy: expand, or detect saturation.
    /// Returns `false` when nothing was done (status not open).
    pub fn auto_step(&mut self) -> Result<bool, ProverError> {
        if self.status() != Status::Open {
            return Ok(false);
        }
        let Some(id) = self.next_slice() else { return Ok(false) };
        let o = &self.open[&id];
        let Some(cands) = live_candidates(o, self.exec) else {
            self.stuck.insert(id);
            return Ok(true);
        };
        if cands.is_empty() {
            match extract_countermodel(&o.slice, &self.extra) {
                Ok(model) => {
                    let witness = o.slice.dist().iter().map(|n| n.as_str().to_string()).collect();
                    self.saturated = Some(Saturation { slice: id, model, witness });
                }
                Err(_) => {
                    self.stuck.insert(id);
                }
            }
            return Ok(true);
        }
        let out = choose(o, &cands, self.exec);
        self.record(id, out);
        Ok(true)
    }

    /// Whether every remaining open slice was set aside.
    fn all_stuck(&self) -> bool {
        self.open.keys().all(|id| self.stuck.contains(id))
    }

    /// Runs the automatic strategy within `budget` (counting expansions
    /// made in this call).
    pub fn run(&mut self, budget: &Budget) -> Result<Option<Report>, ProverError> {
        self.max_slice_nodes = budget.max_slice_nodes;
        let started = Instant::now();
        let base = self.expansions;
        loop {
            if self.status() != Status::Open {
                return Ok(None);
            }
            let reason = if self.all_stuck() {
                Some("every open slice exceeds the size limits")
            } else if self.expansions - base >= budget.max_expansions {
                Some("expansion budget exhausted")
            } else if started.elapsed() >= budget.max_wall_time {
                Some("time budget exhausted")
            } else {
                None
            };
            if let Some(r) = reason {
                return Ok(Some(self.report(started, r)));
            }
            self.auto_step()?;
        }
    }

    fn report(&self, started: Instant, reason: &str) -> Report {
        Report {
            expansions: self.expansions,
            frontier: self.open.len(),
            stuck: self.stuck.len(),
            elapsed_ms: started.elapsed().as_millis() as u64,
            reason: reason.to_string(),
        }
    }
}

// ---------------------------------------------------------------------
// Verdicts

#[derive(Debug, Clone)]
pub enum Verdict {
    Null { trace: Trace },
    NotNull { model: FiniteModel, witness: Vec<String>, assignment: BTreeMap<Name, String>, trace: Trace },
    Unknown { report: Report, trace: Trace },
}

impl Verdict {
    pub fn is_null(&self) -> bool {
        matches!(self, Verdict::Null { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Null { .. } => "NULL",
            Verdict::NotNull { .. } => "NOT_NULL",
            Verdict::Unknown { .. } => "UNKNOWN",
        }
    }

    pub fn trace(&self) -> &Trace {
        match self {
            Verdict::Null { trace } | Verdict::NotNull { trace, .. } | Verdict::Unknown { trace, .. } => trace,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Verdict::Null { trace } => serde_json::json!({"verdict": "NULL", "trace": trace}),
            Verdict::NotNull { model, witness, assignment, trace } => serde_json::json!({
                "verdict": "NOT_NULL", "model": model, "witness": witness, "assignment": assignment, "trace": trace
            }),
            Verdict::Unknown { report, trace } => serde_json::json!({"verdict": "UNKNOWN", "report": report, "trace": trace}),
        }
    }
}

/// Some assignment of the nodes of `s` satisfying its draft in `m`,
/// preferring elements labelled like the nodes. Gives up beyond `limit`
/// assignments.
pub fn satisfying_assignment(s: &Slice, m: &FiniteModel, limit: u64) -> Result<Option<Assignment>, SemanticsError> {
    let names: Vec<Name> = s.nodes().iter().cloned().collect();
    let n = m.size();
    let mut ev = Evaluator::new(m);
    let natural: Option<Assignment> = names.iter().map(|x| m.element(x.as_str()).map(|i| (x.clone(), i))).collect();
    if let Some(g) = natural {
        if ev.satisfies_draft(&g, s.draft())? {
            return Ok(Some(g));
        }
    }
    let mut vals = vec![0usize; names.len()];
    for _ in 0..limit {
        let g: Assignment = names.iter().cloned().zip(vals.iter().copied()).collect();
        if ev.satisfies_draft(&g, s.draft())? {
            return Ok(Some(g));
        }
        let mut i = names.len();
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            vals[i] += 1;
            if vals[i] < n {
                break;
            }
            vals[i] = 0;
        }
    }
    Ok(None)
}

fn finish(d: &mut Derivation, budget: &Budget, root: Option<&Slice>) -> Result<Verdict, ProverError> {
    let report = d.run(budget)?;
    let trace = d.trace();
    Ok(match d.status() {
        Status::Refuted => Verdict::Null { trace },
        Status::Saturated => {
            let sat = d.saturation().expect("saturated").clone();
            let mut assignment = BTreeMap::new();
            if let Some(root) = root {
                match satisfying_assignment(root, &sat.model, 1 << 20)? {
                    Some(g) => {
                        assignment = g.into_iter().map(|(k, x)| (k, sat.model.universe()[x].clone())).collect();
                    }
                    None => {
                        let report = Report {
                            expansions: d.expansions(),
                            frontier: d.open.len(),
                            stuck: d.stuck.len(),
                            elapsed_ms: 0,
                            reason: "natural model failed the oracle check on the root".into(),
                        };
                        return Ok(Verdict::Unknown { report, trace });
                    }
                }
            }
            Verdict::NotNull { model: sat.model, witness: sat.witness, assignment, trace }
        }
        Status::Open | Status::Exhausted => Verdict::Unknown {
            report: report.unwrap_or_else(|| d.report(Instant::now(), "every open slice exceeds the size limits")),
            trace,
        },
    })
}

/// Converts `g` to basic form and searches for a zero graph.
pub fn prove_null(g: &Graph, budget: &Budget, exec: Exec) -> Result<Verdict, ProverError> {
    let mut d = Derivation::new(g, exec)?;
    let root = if g.len() == 1 { g.slices().next().cloned() } else { None };
    finish(&mut d, budget, root.as_ref())
}

/// `premises ⊨ conclusion` iff the difference slice is null.
pub fn check_consequence(premises: &[Formula], conclusion: &Formula, budget: &Budget, exec: Exec) -> Result<Verdict, ProverError> {
    let delta = difference_slice_of_formulas(premises, conclusion);
    prove_null(&Graph::singleton(delta), budget, exec)
}
