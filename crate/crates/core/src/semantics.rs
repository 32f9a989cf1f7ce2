//! Finite-model semantics: extensions of expressions, arc satisfaction and
//! bounded entailment by exhaustive model enumeration.
//!
//! This module is the reference oracle. It evaluates every construct
//! directly from its definition and shares no code with conversion,
//! matching or the prover.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc as Shared;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::formula::{Formula, Quantifier, Term};
use crate::model::{Arc, Draft, Expr, Graph, Slice};
use crate::name::{Name, PredSym};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("a model needs a nonempty universe")]
    EmptyUniverse,
    #[error("duplicate universe element `{0}`")]
    DuplicateElement(String),
    #[error("unknown universe element `{0}`")]
    UnknownElement(String),
    #[error("predicate {0:?} is not interpreted in the model")]
    Uninterpreted(PredSym),
    #[error("tuple of length {found} for predicate {pred:?}")]
    BadTuple { pred: PredSym, found: usize },
    #[error("bad predicate key `{0}`")]
    BadKey(String),
    #[error("assignment does not cover name `{0}`")]
    MissingName(Name),
    #[error("model enumeration needs {needed} units of work, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("universe bound must be at least 1")]
    ZeroBound,
}

/// A relation over `{0..n}` stored as a dense bitmap in lexicographic
/// tuple order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    arity: usize,
    n: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.tuples()).finish()
    }
}

fn power(n: usize, k: usize) -> usize {
    n.checked_pow(k as u32).expect("relation too large")
}

impl Relation {
    pub fn empty(arity: usize, n: usize) -> Relation {
        let len = power(n, arity);
        Relation { arity, n, bits: vec![0; len.div_ceil(64)] }
    }

    pub fn full(arity: usize, n: usize) -> Relation {
        Relation::empty(arity, n).complement()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn universe_size(&self) -> usize {
        self.n
    }

    fn len_tuples(&self) -> usize {
        power(self.n, self.arity)
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.arity);
        tuple.iter().fold(0, |acc, &x| acc * self.n + x)
    }

    fn tuple_at(&self, mut idx: usize) -> Vec<usize> {
        let mut t = vec![0; self.arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % self.n;
            idx /= self.n;
        }
        t
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        let i = self.index(tuple);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    fn contains_index(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, tuple: &[usize]) {
        let i = self.index(tuple);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    fn insert_index(&mut self, i: usize) {
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn complement(&self) -> Relation {
        let mut r = self.clone();
        for w in &mut r.bits {
            *w = !*w;
        }
        let len = self.len_tuples();
        if !len.is_multiple_of(64) {
            let last = r.bits.len() - 1;
            r.bits[last] &= (1u64 << (len % 64)) - 1;
        }
        r
    }

    pub fn union_with(&mut self, other: &Relation) {
        assert_eq!((self.arity, self.n), (other.arity, other.n));
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Tuples in lexicographic order.
    pub fn tuples(&self) -> Vec<Vec<usize>> {
        (0..self.len_tuples()).filter(|&i| self.contains_index(i)).map(|i| self.tuple_at(i)).collect()
    }
}

/// A finite structure; element `i` is printed as `universe[i]`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ModelJson", into = "ModelJson")]
pub struct FiniteModel {
    universe: Vec<String>,
    interp: BTreeMap<PredSym, Shared<Relation>>,
}

impl std::fmt::Debug for FiniteModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", serde_json::to_string(&ModelJson::from(self.clone())).unwrap_or_default())
    }
}

/// Default element labels: `a`, `b`, ..., then `e26`, `e27`, ...
pub fn default_label(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("e{i}")
    }
}

impl FiniteModel {
    /// Builds a model over `size` elements with default labels.
    pub fn new<I, T>(size: usize, interp: I) -> Result<FiniteModel, SemanticsError>
    where
        I: IntoIterator<Item = (PredSym, T)>,
        T: IntoIterator<Item = Vec<usize>>,
    {
        FiniteModel::labelled((0..size).map(default_label).collect(), interp)
    }

    pub fn labelled<I, T>(universe: Vec<String>, interp: I) -> Result<FiniteModel, SemanticsError>
    where
        I: IntoIterator<Item = (PredSym, T)>,
        T: IntoIterator<Item = Vec<usize>>,
    {
        if universe.is_empty() {
            return Err(SemanticsError::EmptyUniverse);
        }
        let mut seen = BTreeSet::new();
        for u in &universe {
            if !seen.insert(u) {
                return Err(SemanticsError::DuplicateElement(u.clone()));
            }
        }
        let n = universe.len();
        let mut map = BTreeMap::new();
        for (p, tuples) in interp {
            if p.is_equality() {
                continue;
            }
            let mut r = Relation::empty(p.arity(), n);
            for t in tuples {
                if t.len() != p.arity() {
                    return Err(SemanticsError::BadTuple { pred: p.clone(), found: t.len() });
                }
                if let Some(&x) = t.iter().find(|&&x| x >= n) {
                    return Err(SemanticsError::UnknownElement(x.to_string()));
                }
                r.insert(&t);
            }
            map.insert(p, Shared::new(r));
        }
        let mut eq = Relation::empty(2, n);
        for a in 0..n {
            eq.insert(&[a, a]);
        }
        map.insert(PredSym::equality(), Shared::new(eq));
        Ok(FiniteModel { universe, interp: map })
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn relation(&self, p: &PredSym) -> Result<&Shared<Relation>, SemanticsError> {
        self.interp.get(p).ok_or_else(|| SemanticsError::Uninterpreted(p.clone()))
    }

    /// Interpreted symbols other than equality.
    pub fn symbols(&self) -> impl Iterator<Item = &PredSym> + '_ {
        self.interp.keys().filter(|p| !p.is_equality())
    }

    pub fn element(&self, label: &str) -> Option<usize> {
        self.universe.iter().position(|u| u == label)
    }

    /// Same structure with new element labels.
    pub fn relabel(&self, labels: Vec<String>) -> Result<FiniteModel, SemanticsError> {
        assert_eq!(labels.len(), self.size());
        let interp: Vec<(PredSym, Vec<Vec<usize>>)> =
            self.symbols().map(|p| (p.clone(), self.interp[p].tuples())).collect();
        FiniteModel::labelled(labels, interp)
    }

    /// Same model with `p` interpreted as the given tuples (used to extend
    /// models with symbols that do not matter).
    pub fn with_relation(&self, p: &PredSym, tuples: Vec<Vec<usize>>) -> Result<FiniteModel, SemanticsError> {
        let mut all: Vec<(PredSym, Vec<Vec<usize>>)> =
            self.symbols().filter(|q| *q != p).map(|q| (q.clone(), self.interp[q].tuples())).collect();
        all.push((p.clone(), tuples));
        FiniteModel::labelled(self.universe.clone(), all)
    }

    /// Tuples of `p` as element labels.
    pub fn labelled_tuples(&self, p: &PredSym) -> Vec<Vec<String>> {
        self.interp
            .get(p)
            .map(|r| r.tuples().into_iter().map(|t| t.into_iter().map(|x| self.universe[x].clone()).collect()).collect())
            .unwrap_or_default()
    }
}

/// Wire form: `{"universe":["a","b"],"interp":{"p/1":[["a"]]}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelJson {
    pub universe: Vec<String>,
    pub interp: BTreeMap<String, Vec<Vec<String>>>,
}

impl From<FiniteModel> for ModelJson {
    fn from(m: FiniteModel) -> ModelJson {
        let interp = m.symbols().map(|p| (p.key(), m.labelled_tuples(p))).collect();
        ModelJson { universe: m.universe.clone(), interp }
    }
}

impl TryFrom<ModelJson> for FiniteModel {
    type Error = SemanticsError;
    fn try_from(j: ModelJson) -> Result<FiniteModel, SemanticsError> {
        let index: BTreeMap<&str, usize> = j.universe.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
        let mut interp = Vec::new();
        for (key, tuples) in &j.interp {
            let p = PredSym::parse_key(key).ok_or_else(|| SemanticsError::BadKey(key.clone()))?;
            let mut ts = Vec::new();
            for t in tuples {
                let mut row = Vec::new();
                for x in t {
                    row.push(*index.get(x.as_str()).ok_or_else(|| SemanticsError::UnknownElement(x.clone()))?);
                }
                ts.push(row);
            }
            interp.push((p, ts));
        }
        FiniteModel::labelled(j.universe.clone(), interp)
    }
}

/// Total map from a set of names into the universe.
pub type Assignment = BTreeMap<Name, usize>;

// ---------------------------------------------------------------------
// Compiled formulas

#[derive(Clone, Copy)]
enum Slot {
    Name(usize),
    Var(usize),
}

enum CFormula {
    Atom(Shared<Relation>, Vec<Slot>),
    False,
    Not(Box<CFormula>),
    And(Box<CFormula>, Box<CFormula>),
    Or(Box<CFormula>, Box<CFormula>),
    Implies(Box<CFormula>, Box<CFormula>),
    Quant(Quantifier, Box<CFormula>),
}

fn compile(f: &Formula, names: &[Name], scope: &mut Vec<std::sync::Arc<str>>, m: &FiniteModel) -> Result<CFormula, SemanticsError> {
    Ok(match f {
        Formula::Atom(p, args) => {
            let rel = m.relation(p)?.clone();
            let slots = args
                .iter()
                .map(|t| match t {
                    Term::Name(n) => Slot::Name(names.binary_search(n).expect("name listed")),
                    Term::Var(v) => {
                        let depth = scope.iter().rposition(|w| w == v).expect("bound variable");
                        Slot::Var(depth)
                    }
                })
                .collect();
            CFormula::Atom(rel, slots)
        }
        Formula::Falsum => CFormula::False,
        Formula::Not(g) => CFormula::Not(Box::new(compile(g, names, scope, m)?)),
        Formula::And(a, b) => CFormula::And(Box::new(compile(a, names, scope, m)?), Box::new(compile(b, names, scope, m)?)),
        Formula::Or(a, b) => CFormula::Or(Box::new(compile(a, names, scope, m)?), Box::new(compile(b, names, scope, m)?)),
        Formula::Implies(a, b) => {
            CFormula::Implies(Box::new(compile(a, names, scope, m)?), Box::new(compile(b, names, scope, m)?))
        }
        Formula::Quant(q, v, body) => {
            scope.push(v.clone());
            let b = compile(body, names, scope, m);
            scope.pop();
            CFormula::Quant(*q, Box::new(b?))
        }
    })
}

fn holds(f: &CFormula, names: &[usize], vars: &mut Vec<usize>, n: usize) -> bool {
    match f {
        CFormula::Atom(rel, slots) => {
            let mut idx = 0;
            for s in slots {
                let x = match *s {
                    Slot::Name(i) => names[i],
                    Slot::Var(d) => vars[d],
                };
                idx = idx * n + x;
            }
            rel.contains_index(idx)
        }
        CFormula::False => false,
        CFormula::Not(g) => !holds(g, names, vars, n),
        CFormula::And(a, b) => holds(a, names, vars, n) && holds(b, names, vars, n),
        CFormula::Or(a, b) => holds(a, names, vars, n) || holds(b, names, vars, n),
        CFormula::Implies(a, b) => !holds(a, names, vars, n) || holds(b, names, vars, n),
        CFormula::Quant(q, body) => {
            vars.push(0);
            let mut result = *q == Quantifier::Forall;
            for x in 0..n {
                *vars.last_mut().expect("pushed") = x;
                let h = holds(body, names, vars, n);
                if h != result {
                    result = h;
                    break;
                }
            }
            vars.pop();
            result
        }
    }
}

// ---------------------------------------------------------------------
// Slice search plans

struct Plan {
    /// Node indices of the distinguished list.
    dist: Vec<usize>,
    /// Nodes in search order; distinct dist nodes first.
    order: Vec<usize>,
    /// Number of distinct dist nodes (prefix of `order`).
    k_dist: usize,
    /// Arc checks that become decidable once `order[d]` is assigned.
    checks: Vec<Vec<(usize, Vec<usize>)>>,
    /// 0-ary arcs.
    nullary: Vec<usize>,
    n_nodes: usize,
}

enum Memo {
    Dense { known: Vec<u64>, value: Vec<u64> },
    Sparse(HashMap<usize, bool>),
}

impl Memo {
    fn new(len: usize) -> Memo {
        if len <= 1 << 22 {
            Memo::Dense { known: vec![0; len.div_ceil(64)], value: vec![0; len.div_ceil(64)] }
        } else {
            Memo::Sparse(HashMap::new())
        }
    }

    fn get(&self, i: usize) -> Option<bool> {
        match self {
            Memo::Dense { known, value } => (known[i / 64] >> (i % 64) & 1 == 1).then(|| value[i / 64] >> (i % 64) & 1 == 1),
            Memo::Sparse(m) => m.get(&i).copied(),
        }
    }

    fn set(&mut self, i: usize, v: bool) {
        match self {
            Memo::Dense { known, value } => {
                known[i / 64] |= 1 << (i % 64);
                if v {
                    value[i / 64] |= 1 << (i % 64);
                }
            }
            Memo::Sparse(m) => {
                m.insert(i, v);
            }
        }
    }
}

enum Node {
    Pred(Shared<Relation>),
    Formula { body: Shared<CFormula>, memo: Memo },
    Slice { plan: Shared<Plan>, memo: Memo },
    Graph { plans: Vec<Shared<Plan>>, memo: Memo },
    Cmpl(usize),
}

/// Evaluates expressions in one model, memoizing embedded expressions.
pub struct Evaluator<'m> {
    model: &'m FiniteModel,
    handles: HashMap<Expr, usize>,
    nodes: Vec<Node>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m FiniteModel) -> Self {
        Evaluator { model, handles: HashMap::new(), nodes: Vec::new() }
    }

    pub fn model(&self) -> &FiniteModel {
        self.model
    }

    fn handle(&mut self, e: &Expr) -> Result<usize, SemanticsError> {
        if let Some(&h) = self.handles.get(e) {
            return Ok(h);
        }
        let n = self.model.size();
        let node = match e {
            Expr::Pred(p) => Node::Pred(self.model.relation(p)?.clone()),
            Expr::Formula(f) => {
                let names = f.free_names();
                let body = compile(f, &names, &mut Vec::new(), self.model)?;
                Node::Formula { body: Shared::new(body), memo: Memo::new(power(n, names.len())) }
            }
            Expr::Slice(s) => Node::Slice { plan: self.plan(s)?, memo: Memo::new(power(n, s.arity())) },
            Expr::Graph(g) => {
                let plans = g.slices().map(|s| self.plan(s)).collect::<Result<_, _>>()?;
                Node::Graph { plans, memo: Memo::new(power(n, g.arity())) }
            }
            Expr::Cmpl(inner) => Node::Cmpl(self.handle(inner)?),
        };
        let h = self.nodes.len();
        self.nodes.push(node);
        self.handles.insert(e.clone(), h);
        Ok(h)
    }

    fn plan(&mut self, s: &Slice) -> Result<Shared<Plan>, SemanticsError> {
        self.plan_draft(s.draft(), s.dist())
    }

    fn plan_draft(&mut self, d: &Draft, dist: &[Name]) -> Result<Shared<Plan>, SemanticsError> {
        let nodes: Vec<&Name> = d.nodes().iter().collect();
        let ix = |n: &Name| nodes.binary_search(&n).expect("node of draft");
        let mut arcs = Vec::new();
        for a in d.arcs() {
            arcs.push((self.handle(a.expr())?, a.args().iter().map(ix).collect::<Vec<usize>>()));
        }
        let dist_ix: Vec<usize> = dist.iter().map(ix).collect();
        let mut order: Vec<usize> = Vec::new();
        let mut placed = vec![false; nodes.len()];
        for &x in &dist_ix {
            if !placed[x] {
                placed[x] = true;
                order.push(x);
            }
        }
        let k_dist = order.len();
        // Greedy: next node is the one sharing most arcs with placed nodes.
        loop {
            let mut best: Option<(usize, usize)> = None;
            for x in 0..nodes.len() {
                if placed[x] {
                    continue;
                }
                let mut score = 0;
                let mut touches = false;
                for (_, args) in &arcs {
                    if args.contains(&x) {
                        touches = true;
                        score += args.iter().filter(|&&y| placed[y]).count() + 1;
                    }
                }
                if touches && best.is_none_or(|(_, s)| score > s) {
                    best = Some((x, score));
                }
            }
            match best {
                Some((x, _)) => {
                    placed[x] = true;
                    order.push(x);
                }
                None => break,
            }
        }
        let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut checks = vec![Vec::new(); order.len()];
        let mut nullary = Vec::new();
        for (h, args) in arcs {
            match args.iter().map(|x| pos[x]).max() {
                Some(d) => checks[d].push((h, args)),
                None => nullary.push(h),
            }
        }
        Ok(Shared::new(Plan { dist: dist_ix, order, k_dist, checks, nullary, n_nodes: nodes.len() }))
    }

    fn query(&mut self, h: usize, tuple: &[usize]) -> Result<bool, SemanticsError> {
        let n = self.model.size();
        let idx = tuple.iter().fold(0usize, |acc, &x| acc * n + x);
        let (cached, plans): (Option<bool>, Vec<Shared<Plan>>) = match &self.nodes[h] {
            Node::Pred(r) => return Ok(r.contains_index(idx)),
            Node::Cmpl(inner) => {
                let inner = *inner;
                return Ok(!self.query(inner, tuple)?);
            }
            Node::Formula { body, memo, .. } => {
                if let Some(v) = memo.get(idx) {
                    return Ok(v);
                }
                let body = body.clone();
                let v = holds(&body, tuple, &mut Vec::new(), n);
                if let Node::Formula { memo, .. } = &mut self.nodes[h] {
                    memo.set(idx, v);
                }
                return Ok(v);
            }
            Node::Slice { plan, memo } => (memo.get(idx), vec![plan.clone()]),
            Node::Graph { plans, memo } => (memo.get(idx), plans.clone()),
        };
        if let Some(v) = cached {
            return Ok(v);
        }
        let mut v = false;
        for plan in &plans {
            if self.holds_at(plan, tuple)? {
                v = true;
                break;
            }
        }
        match &mut self.nodes[h] {
            Node::Slice { memo, .. } | Node::Graph { memo, .. } => memo.set(idx, v),
            _ => unreachable!(),
        }
        Ok(v)
    }

    fn nullary_ok(&mut self, plan: &Plan) -> Result<bool, SemanticsError> {
        for &h in &plan.nullary {
            if !self.query(h, &[])? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Is `tuple` in the extension of the planned slice?
    fn holds_at(&mut self, plan: &Plan, tuple: &[usize]) -> Result<bool, SemanticsError> {
        if !self.nullary_ok(plan)? {
            return Ok(false);
        }
        let mut assign = vec![usize::MAX; plan.n_nodes];
        for (&x, &val) in plan.dist.iter().zip(tuple) {
            if assign[x] != usize::MAX && assign[x] != val {
                return Ok(false);
            }
            assign[x] = val;
        }
        for d in 0..plan.k_dist {
            if !self.checks_pass(plan, d, &assign)? {
                return Ok(false);
            }
        }
        self.exists_from(plan, plan.k_dist, &mut assign)
    }

    fn checks_pass(&mut self, plan: &Plan, d: usize, assign: &[usize]) -> Result<bool, SemanticsError> {
        let mut buf = Vec::new();
        for (h, args) in &plan.checks[d] {
            buf.clear();
            buf.extend(args.iter().map(|&x| assign[x]));
            if !self.query(*h, &buf)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn exists_from(&mut self, plan: &Plan, d: usize, assign: &mut Vec<usize>) -> Result<bool, SemanticsError> {
        if d == plan.order.len() {
            return Ok(true);
        }
        let x = plan.order[d];
        for val in 0..self.model.size() {
            assign[x] = val;
            if self.checks_pass(plan, d, assign)? && self.exists_from(plan, d + 1, assign)? {
                assign[x] = usize::MAX;
                return Ok(true);
            }
        }
        assign[x] = usize::MAX;
        Ok(false)
    }

    /// All dist tuples of satisfying assignments.
    fn extension(&mut self, plan: &Plan, out: &mut Relation) -> Result<(), SemanticsError> {
        if !self.nullary_ok(plan)? {
            return Ok(());
        }
        let mut assign = vec![usize::MAX; plan.n_nodes];
        self.extend_dist(plan, 0, &mut assign, out)
    }

    fn extend_dist(&mut self, plan: &Plan, d: usize, assign: &mut Vec<usize>, out: &mut Relation) -> Result<(), SemanticsError> {
        if d == plan.k_dist {
            if self.exists_from(plan, d, assign)? {
                let t: Vec<usize> = plan.dist.iter().map(|&x| assign[x]).collect();
                out.insert(&t);
            }
            return Ok(());
        }
        let x = plan.order[d];
        for val in 0..self.model.size() {
            assign[x] = val;
            if self.checks_pass(plan, d, assign)? {
                self.extend_dist(plan, d + 1, assign, out)?;
            }
        }
        assign[x] = usize::MAX;
        Ok(())
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Relation, SemanticsError> {
        let n = self.model.size();
        match e {
            Expr::Pred(p) => Ok((**self.model.relation(p)?).clone()),
            Expr::Slice(s) => self.eval_slice(s),
            Expr::Graph(g) => self.eval_graph(g),
            Expr::Cmpl(inner) => Ok(self.eval(inner)?.complement()),
            Expr::Formula(_) => {
                let h = self.handle(e)?;
                let mut r = Relation::empty(e.arity(), n);
                for i in 0..r.len_tuples() {
                    let t = r.tuple_at(i);
                    if self.query(h, &t)? {
                        r.insert_index(i);
                    }
                }
                Ok(r)
            }
        }
    }

    pub fn eval_slice(&mut self, s: &Slice) -> Result<Relation, SemanticsError> {
        let plan = self.plan(s)?;
        let mut r = Relation::empty(s.arity(), self.model.size());
        self.extension(&plan, &mut r)?;
        Ok(r)
    }

    pub fn eval_graph(&mut self, g: &Graph) -> Result<Relation, SemanticsError> {
        let mut r = Relation::empty(g.arity(), self.model.size());
        for s in g.slices() {
            let plan = self.plan(s)?;
            self.extension(&plan, &mut r)?;
        }
        Ok(r)
    }

    /// The relation a formula denotes over its ordered free names.
    pub fn eval_formula(&mut self, f: &Formula) -> Result<Relation, SemanticsError> {
        self.eval(&Expr::formula(f.clone()))
    }

    pub fn satisfies_arc(&mut self, g: &Assignment, a: &Arc) -> Result<bool, SemanticsError> {
        let tuple: Vec<usize> =
            a.args().iter().map(|n| g.get(n).copied().ok_or_else(|| SemanticsError::MissingName(n.clone()))).collect::<Result<_, _>>()?;
        let h = self.handle(a.expr())?;
        self.query(h, &tuple)
    }

    /// Does `g` satisfy every arc of the draft?
    pub fn satisfies_draft(&mut self, g: &Assignment, d: &Draft) -> Result<bool, SemanticsError> {
        for a in d.arcs() {
            if !self.satisfies_arc(g, a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Extension of `e` in `m`.
pub fn eval_expression(e: &Expr, m: &FiniteModel) -> Result<Relation, SemanticsError> {
    Evaluator::new(m).eval(e)
}

pub fn eval_slice(s: &Slice, m: &FiniteModel) -> Result<Relation, SemanticsError> {
    Evaluator::new(m).eval_slice(s)
}

pub fn eval_graph(g: &Graph, m: &FiniteModel) -> Result<Relation, SemanticsError> {
    Evaluator::new(m).eval_graph(g)
}

pub fn eval_formula(f: &Formula, m: &FiniteModel) -> Result<Relation, SemanticsError> {
    Evaluator::new(m).eval_formula(f)
}

pub fn satisfies_arc(g: &Assignment, a: &Arc, m: &FiniteModel) -> Result<bool, SemanticsError> {
    Evaluator::new(m).satisfies_arc(g, a)
}

// ---------------------------------------------------------------------
// Model enumeration

/// Number of bits needed to describe an interpretation of `symbols`.
pub fn interpretation_bits(symbols: &[PredSym], size: usize) -> Option<u32> {
    symbols.iter().try_fold(0u32, |acc, p| {
        let k = size.checked_pow(p.arity() as u32)?;
        acc.checked_add(u32::try_from(k).ok()?)
    })
}

/// The `k`-th model of the given size. Bit `B-1` (most significant)
/// belongs to the first tuple of the first symbol.
pub fn model_from_index(symbols: &[PredSym], size: usize, k: u64) -> FiniteModel {
    let total = interpretation_bits(symbols, size).expect("enumerable");
    let mut bit = total;
    let mut interp = Vec::new();
    for p in symbols {
        let mut tuples = Vec::new();
        let count = power(size, p.arity());
        let rel = Relation::empty(p.arity(), size);
        for i in 0..count {
            bit -= 1;
            if k >> bit & 1 == 1 {
                tuples.push(rel.tuple_at(i));
            }
        }
        interp.push((p.clone(), tuples));
    }
    FiniteModel::new(size, interp).expect("valid model")
}

/// Every model over `symbols` with exactly `size` elements, smallest
/// interpretation index first.
pub fn models_of_size(symbols: &[PredSym], size: usize) -> impl Iterator<Item = FiniteModel> + '_ {
    let bits = interpretation_bits(symbols, size).expect("enumerable");
    assert!(bits < 40, "too many models to enumerate");
    (0..1u64 << bits).map(move |k| model_from_index(symbols, size, k))
}

/// Every model with 1..=max elements.
pub fn models_up_to(symbols: &[PredSym], max: usize) -> impl Iterator<Item = FiniteModel> + '_ {
    (1..=max).flat_map(move |n| models_of_size(symbols, n))
}

/// Outcome of a bounded entailment check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bounded {
    HoldsUpTo(usize),
    Countermodel { model: FiniteModel, assignment: Assignment },
}

pub const DEFAULT_WORK_BUDGET: u128 = 200_000_000;

/// Searches all models with at most `max` elements (and all assignments
/// of the occurring names) for one where every premise holds and the
/// conclusion fails.
pub fn entails_bounded(
    premises: &[Formula],
    conclusion: &Formula,
    max: usize,
    work_budget: u128,
    exec: Exec,
) -> Result<Bounded, SemanticsError> {
    if max == 0 {
        return Err(SemanticsError::ZeroBound);
    }
    let mut preds = BTreeSet::new();
    let mut names = BTreeSet::new();
    for f in premises.iter().chain([conclusion]) {
        f.predicates(&mut preds);
        names.extend(f.free_names());
    }
    let symbols: Vec<PredSym> = preds.into_iter().filter(|p| !p.is_equality()).collect();
    let names: Vec<Name> = names.into_iter().collect();

    let mut needed: u128 = 0;
    for size in 1..=max {
        let bits = interpretation_bits(&symbols, size)
            .filter(|b| *b < 64)
            .ok_or(SemanticsError::BudgetExceeded { needed: u128::MAX, budget: work_budget })?;
        let assignments = (size as u128).checked_pow(names.len() as u32).unwrap_or(u128::MAX);
        needed = needed.saturating_add((1u128 << bits).saturating_mul(assignments));
    }
    if needed > work_budget {
        return Err(SemanticsError::BudgetExceeded { needed, budget: work_budget });
    }

    for size in 1..=max {
        let bits = interpretation_bits(&symbols, size).expect("checked");
        let found = exec.find_map_first_index(1u64 << bits, |k| {
            let m = model_from_index(&symbols, size, k);
            counter_assignment(&m, premises, conclusion, &names).map(|g| (m, g))
        });
        if let Some((m, g)) = found {
            let (model, assignment) = label_by_names(&m, g);
            return Ok(Bounded::Countermodel { model, assignment });
        }
    }
    Ok(Bounded::HoldsUpTo(max))
}

fn counter_assignment(m: &FiniteModel, premises: &[Formula], conclusion: &Formula, names: &[Name]) -> Option<Assignment> {
    let n = m.size();
    let compiled: Vec<CFormula> =
        premises.iter().map(|f| compile(f, names, &mut Vec::new(), m).expect("symbols interpreted")).collect();
    let goal = compile(conclusion, names, &mut Vec::new(), m).expect("symbols interpreted");
    let mut vals = vec![0usize; names.len()];
    loop {
        let mut vars = Vec::new();
        if compiled.iter().all(|c| holds(c, &vals, &mut vars, n)) && !holds(&goal, &vals, &mut vars, n) {
            return Some(names.iter().cloned().zip(vals.iter().copied()).collect());
        }
        // Next assignment, last name fastest.
        let mut i = names.len();
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            vals[i] += 1;
            if vals[i] < n {
                break;
            }
            vals[i] = 0;
        }
    }
}

/// Relabels elements by the names assigned to them when the assignment is
/// a bijection onto the universe.
fn label_by_names(m: &FiniteModel, g: Assignment) -> (FiniteModel, Assignment) {
    let mut labels: Vec<Option<String>> = vec![None; m.size()];
    for (name, &x) in &g {
        if labels[x].is_some() {
            return (m.clone(), g);
        }
        labels[x] = Some(name.as_str().to_string());
    }
    let Some(labels) = labels.into_iter().collect::<Option<Vec<String>>>() else { return (m.clone(), g) };
    // Element order follows the labels.
    let mut order: Vec<usize> = (0..m.size()).collect();
    order.sort_by(|a, b| labels[*a].cmp(&labels[*b]));
    let mut pos = vec![0; m.size()];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let interp: Vec<(PredSym, Vec<Vec<usize>>)> = m
        .symbols()
        .map(|p| {
            let tuples = m.interp[p].tuples().into_iter().map(|t| t.into_iter().map(|x| pos[x]).collect()).collect();
            (p.clone(), tuples)
        })
        .collect();
    let universe = order.iter().map(|&i| labels[i].clone()).collect();
    match FiniteModel::labelled(universe, interp) {
        Ok(relabelled) => (relabelled, g.into_iter().map(|(k, x)| (k, pos[x])).collect()),
        Err(_) => (m.clone(), g),
    }
}
