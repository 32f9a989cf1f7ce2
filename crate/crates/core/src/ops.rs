//! Constructions on drafts, slices and graphs: arc addition, gluing
//! (pushouts along a name list), difference slices and node renaming.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::formula::Formula;
use crate::model::{Arc, Draft, Expr, Graph, Slice};
use crate::name::{Name, NameGen};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpsError {
    #[error("name list of length {found} cannot glue a slice of arity {expected}")]
    Arity { expected: usize, found: usize },
    #[error("name `{0}` is not a node")]
    NameAbsent(Name),
}

/// Result of gluing: the pushout object and the two quotient maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlueResult<T> {
    pub glued: T,
    /// From the host's nodes (and the gluing list).
    pub embed_left: BTreeMap<Name, Name>,
    /// From the glued slice's nodes.
    pub embed_right: BTreeMap<Name, Name>,
}

struct UnionFind {
    parent: BTreeMap<Name, Name>,
    /// Names of the host side win over names of the glued side.
    host: BTreeSet<Name>,
}

impl UnionFind {
    fn find(&mut self, x: &Name) -> Name {
        let p = self.parent.get(x).cloned().unwrap_or_else(|| x.clone());
        if &p == x {
            return p;
        }
        let root = self.find(&p);
        self.parent.insert(x.clone(), root.clone());
        root
    }

    fn preferred<'a>(&self, a: &'a Name, b: &'a Name) -> bool {
        match (self.host.contains(a), self.host.contains(b)) {
            (true, false) => true,
            (false, true) => false,
            _ => a < b,
        }
    }

    fn union(&mut self, a: &Name, b: &Name) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.preferred(&ra, &rb) {
            self.parent.insert(rb, ra);
        } else {
            self.parent.insert(ra, rb);
        }
    }
}

/// Glues slice `t` onto draft `d` along `w`: the pushout of `d` and the
/// draft of `t` over the arcless draft identifying `w` with `dist(t)`.
/// Internal names of `t` are freshened with `gen`.
pub fn glue_draft(d: &Draft, w: &[Name], t: &Slice, gen: &mut NameGen) -> Result<GlueResult<Draft>, OpsError> {
    if w.len() != t.arity() {
        return Err(OpsError::Arity { expected: t.arity(), found: w.len() });
    }
    let host: BTreeSet<Name> = d.nodes().iter().chain(w).cloned().collect();
    let mut fresh: BTreeMap<Name, Name> = BTreeMap::new();
    for x in t.nodes() {
        let mut y = gen.fresh(x);
        while host.contains(&y) {
            y = gen.fresh(x);
        }
        fresh.insert(x.clone(), y);
    }
    let mut uf = UnionFind { parent: BTreeMap::new(), host: host.clone() };
    for (wi, ti) in w.iter().zip(t.dist()) {
        uf.union(wi, &fresh[ti]);
    }
    let embed_left: BTreeMap<Name, Name> = host.iter().map(|x| (x.clone(), uf.find(x))).collect();
    let embed_right: BTreeMap<Name, Name> = fresh.iter().map(|(x, y)| (x.clone(), uf.find(y))).collect();
    let mut arcs: BTreeSet<Arc> = d.arcs().iter().map(|a| a.map_args(|n| embed_left[n].clone())).collect();
    arcs.extend(t.arcs().iter().map(|a| a.map_args(|n| embed_right[n].clone())));
    let nodes: BTreeSet<Name> = embed_left.values().chain(embed_right.values()).cloned().collect();
    Ok(GlueResult { glued: Draft::from_parts(nodes, arcs), embed_left, embed_right })
}

/// `S ⋈_w T`: the glued draft with the distinguished list of `s` carried
/// along.
pub fn glue_slice(s: &Slice, w: &[Name], t: &Slice, gen: &mut NameGen) -> Result<GlueResult<Slice>, OpsError> {
    let r = glue_draft(s.draft(), w, t, gen)?;
    let dist = s.dist().iter().map(|n| r.embed_left[n].clone()).collect();
    Ok(GlueResult { glued: Slice::from_parts(r.glued, dist), embed_left: r.embed_left, embed_right: r.embed_right })
}

/// `S ⋈_w H = { S ⋈_w T : T ∈ H }`.
pub fn glue_slice_graph(s: &Slice, w: &[Name], h: &Graph, gen: &mut NameGen) -> Result<Graph, OpsError> {
    if w.len() != h.arity() {
        return Err(OpsError::Arity { expected: h.arity(), found: w.len() });
    }
    let slices = h.slices().map(|t| glue_slice(s, w, t, gen).map(|r| r.glued)).collect::<Result<Vec<_>, _>>()?;
    Ok(Graph::new(s.arity(), slices).expect("glued slices keep the host arity"))
}

/// `G ⋈_w H`: union over the slices of `g`.
pub fn glue_graph(g: &Graph, w: &[Name], h: &Graph, gen: &mut NameGen) -> Result<Graph, OpsError> {
    let mut slices = Vec::new();
    for s in g.slices() {
        slices.extend(glue_slice_graph(s, w, h, gen)?.slice_set().iter().cloned());
    }
    Ok(Graph::new(g.arity(), slices).expect("same arity"))
}

/// The arc `⟨φ, SN(φ)⟩` of a formula.
pub fn formula_arc(f: &Formula) -> Arc {
    let names = f.free_names();
    Arc::new(Expr::formula(f.clone()), names).expect("formula arity is its name count")
}

/// The 0-ary slice with the given arcs plus the complement of `a`; its
/// nodes are exactly the names occurring in the arcs.
pub fn difference_slice<'a, I: IntoIterator<Item = &'a Arc>>(arcs: I, a: &Arc) -> Slice {
    let complemented = Arc::new(Expr::cmpl(a.expr().clone()), a.args().to_vec()).expect("complement keeps arity");
    let all = arcs.into_iter().cloned().chain([complemented]);
    Slice::new(Draft::of_arcs(all), Vec::new()).expect("0-ary")
}

/// Difference slice of premises and conclusion.
pub fn difference_slice_of_formulas(premises: &[Formula], conclusion: &Formula) -> Slice {
    let arcs: Vec<Arc> = premises.iter().map(formula_arc).collect();
    difference_slice(arcs.iter(), &formula_arc(conclusion))
}

/// Replaces node `from` by `to` in nodes, arc arguments and the
/// distinguished list. Embedded slices keep their own names.
pub fn rename_node(s: &Slice, from: &Name, to: &Name) -> Result<Slice, OpsError> {
    for n in [from, to] {
        if !s.nodes().contains(n) {
            return Err(OpsError::NameAbsent(n.clone()));
        }
    }
    Ok(rename_nodes(s, &|n: &Name| if n == from { to.clone() } else { n.clone() }))
}

/// Applies a name map to a slice (the map need not be injective).
pub fn rename_nodes(s: &Slice, f: &dyn Fn(&Name) -> Name) -> Slice {
    let nodes = s.nodes().iter().map(f).collect();
    let arcs = s.arcs().iter().map(|a| a.map_args(f)).collect();
    Slice::from_parts(Draft::from_parts(nodes, arcs), s.dist().iter().map(f).collect())
}
