//! Morphisms between drafts and zero detection.
//!
//! A morphism is a total name map that sends every arc of the source to an
//! arc of the target with the same label. Labels are compared structurally;
//! embedded slices and graphs are canonical, so this is comparison up to
//! isomorphism.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::json::{expr_from_json, expr_to_json, ArcJson};
use crate::model::{Arc, Draft, Expr, Graph, Slice};
use crate::name::Name;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Morphism {
    pub map: BTreeMap<Name, Name>,
}

impl Morphism {
    pub fn apply(&self, n: &Name) -> &Name {
        &self.map[n]
    }
}

/// Independent re-check: `map` is total on `src` nodes, lands in `dst`
/// nodes and preserves arcs.
pub fn is_morphism(map: &BTreeMap<Name, Name>, src: &Draft, dst: &Draft) -> bool {
    src.nodes().iter().all(|n| map.get(n).is_some_and(|m| dst.nodes().contains(m)))
        && src.arcs().iter().all(|a| {
            let image = a.map_args(|n| map[n].clone());
            dst.arcs().contains(&image)
        })
}

/// Target draft prepared for repeated matching.
pub struct Target<'a> {
    nodes: Vec<&'a Name>,
    by_label: HashMap<&'a Expr, Vec<Vec<usize>>>,
    arcs: HashSet<(&'a Expr, Vec<usize>)>,
}

impl<'a> Target<'a> {
    pub fn new(dst: &'a Draft) -> Target<'a> {
        let nodes: Vec<&Name> = dst.nodes().iter().collect();
        let ix = |n: &Name| nodes.binary_search(&n).expect("node");
        let mut by_label: HashMap<&Expr, Vec<Vec<usize>>> = HashMap::new();
        let mut arcs = HashSet::new();
        for a in dst.arcs() {
            let args: Vec<usize> = a.args().iter().map(ix).collect();
            by_label.entry(a.expr()).or_default().push(args.clone());
            arcs.insert((a.expr(), args));
        }
        Target { nodes, by_label, arcs }
    }

    fn index(&self, n: &Name) -> Option<usize> {
        self.nodes.binary_search(&n).ok()
    }

    /// Calls `found` on each morphism from `src` extending `fixed` until it
    /// returns false.
    pub fn search(
        &self,
        src: &Draft,
        fixed: &BTreeMap<Name, Name>,
        found: &mut dyn FnMut(BTreeMap<Name, Name>) -> bool,
    ) {
        let snodes: Vec<&Name> = src.nodes().iter().collect();
        let six = |n: &Name| snodes.binary_search(&n).expect("node");
        let sarcs: Vec<(&Expr, Vec<usize>)> = src.arcs().iter().map(|a| (a.expr(), a.args().iter().map(six).collect())).collect();

        // Domains from label/position occurrences.
        let mut domain: Vec<Option<Vec<bool>>> = vec![None; snodes.len()];
        for (label, args) in &sarcs {
            let Some(targets) = self.by_label.get(label) else { return };
            for (pos, &x) in args.iter().enumerate() {
                let mut allowed = vec![false; self.nodes.len()];
                for t in targets {
                    allowed[t[pos]] = true;
                }
                domain[x] = Some(match domain[x].take() {
                    None => allowed,
                    Some(d) => d.iter().zip(&allowed).map(|(a, b)| *a && *b).collect(),
                });
            }
        }
        let mut assign: Vec<Option<usize>> = vec![None; snodes.len()];
        for (s, t) in fixed {
            let (Ok(si), Some(ti)) = (snodes.binary_search(&s), self.index(t)) else { return };
            if domain[si].as_ref().is_some_and(|d| !d[ti]) {
                return;
            }
            assign[si] = Some(ti);
        }

        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); snodes.len()];
        for (k, (_, args)) in sarcs.iter().enumerate() {
            for &x in args {
                if touching[x].last() != Some(&k) {
                    touching[x].push(k);
                }
            }
        }
        // Fixed arcs must already be present.
        for (label, args) in &sarcs {
            if args.iter().all(|&x| assign[x].is_some()) {
                let img: Vec<usize> = args.iter().map(|&x| assign[x].expect("assigned")).collect();
                if !self.arcs.contains(&(*label, img)) {
                    return;
                }
            }
        }

        let order = search_order(&assign, &touching, &sarcs);
        let mut st = SearchState { target: self, snodes: &snodes, sarcs: &sarcs, touching: &touching, domain: &domain, order: &order };
        st.go(0, &mut assign, found);
    }
}

fn search_order(assign: &[Option<usize>], touching: &[Vec<usize>], sarcs: &[(&Expr, Vec<usize>)]) -> Vec<usize> {
    let n = assign.len();
    let mut placed: Vec<bool> = assign.iter().map(Option::is_some).collect();
    let mut order = Vec::new();
    while placed.iter().any(|p| !p) {
        let mut best: Option<(usize, (usize, usize))> = None;
        for x in 0..n {
            if placed[x] {
                continue;
            }
            let linked = touching[x].iter().filter(|&&k| sarcs[k].1.iter().any(|&y| y != x && placed[y])).count();
            let key = (linked, touching[x].len());
            if best.is_none_or(|(_, b)| key > b) {
                best = Some((x, key));
            }
        }
        let (x, _) = best.expect("unplaced node");
        placed[x] = true;
        order.push(x);
    }
    order
}

struct SearchState<'s, 'a> {
    target: &'s Target<'a>,
    snodes: &'s [&'s Name],
    sarcs: &'s [(&'s Expr, Vec<usize>)],
    touching: &'s [Vec<usize>],
    domain: &'s [Option<Vec<bool>>],
    order: &'s [usize],
}

impl SearchState<'_, '_> {
    fn consistent(&self, x: usize, assign: &[Option<usize>]) -> bool {
        self.touching[x].iter().all(|&k| {
            let (label, args) = &self.sarcs[k];
            if args.iter().all(|&y| assign[y].is_some()) {
                let img: Vec<usize> = args.iter().map(|&y| assign[y].expect("assigned")).collect();
                return self.target.arcs.contains(&(*label, img));
            }
            self.target.by_label[label]
                .iter()
                .any(|t| args.iter().zip(t).all(|(&y, &ty)| assign[y].is_none_or(|v| v == ty)))
        })
    }

    /// Returns false when the consumer asked to stop.
    fn go(&mut self, d: usize, assign: &mut Vec<Option<usize>>, found: &mut dyn FnMut(BTreeMap<Name, Name>) -> bool) -> bool {
        if d == self.order.len() {
            let map = self
                .snodes
                .iter()
                .enumerate()
                .map(|(i, n)| ((*n).clone(), self.target.nodes[assign[i].expect("total")].clone()))
                .collect();
            return found(map);
        }
        let x = self.order[d];
        for v in 0..self.target.nodes.len() {
            if self.domain[x].as_ref().is_some_and(|dom| !dom[v]) {
                continue;
            }
            assign[x] = Some(v);
            if self.consistent(x, assign) && !self.go(d + 1, assign, found) {
                assign[x] = None;
                return false;
            }
        }
        assign[x] = None;
        true
    }
}

/// All morphisms from `src` to `dst`, sorted lexicographically along the
/// source nodes.
pub fn enumerate_morphisms(src: &Draft, dst: &Draft) -> Vec<Morphism> {
    let mut out = Vec::new();
    Target::new(dst).search(src, &BTreeMap::new(), &mut |m| {
        out.push(Morphism { map: m });
        true
    });
    out.sort();
    out
}

/// Some morphism extending `fixed`, if any.
pub fn find_morphism(src: &Draft, dst: &Draft, fixed: &BTreeMap<Name, Name>) -> Option<Morphism> {
    find_morphism_in(src, &Target::new(dst), fixed)
}

pub fn find_morphism_in(src: &Draft, dst: &Target<'_>, fixed: &BTreeMap<Name, Name>) -> Option<Morphism> {
    let mut result = None;
    dst.search(src, fixed, &mut |m| {
        result = Some(Morphism { map: m });
        false
    });
    result
}

/// Map sending `dist[i]` to `w[i]`, or `None` if a repeated name would
/// need two images.
pub fn dist_constraint(dist: &[Name], w: &[Name]) -> Option<BTreeMap<Name, Name>> {
    let mut fixed = BTreeMap::new();
    for (d, x) in dist.iter().zip(w) {
        if let Some(prev) = fixed.insert(d.clone(), x.clone()) {
            if &prev != x {
                return None;
            }
        }
    }
    Some(fixed)
}

/// Is there a morphism from the draft of `t` into `dst` sending
/// `dist(t)` to `w`?
pub fn slice_maps_onto(t: &Slice, dst: &Target<'_>, w: &[Name]) -> Option<Morphism> {
    let fixed = dist_constraint(t.dist(), w)?;
    find_morphism_in(t.draft(), dst, &fixed)
}

/// Evidence that a slice is zero: a complemented-slice arc `⟨T̄, w⟩` and a
/// morphism from `T` into the slice sending `dist(T)` to `w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZeroWitness {
    pub arc: Arc,
    pub morphism: Morphism,
}

impl ZeroWitness {
    /// Checks both conditions from scratch.
    pub fn verify(&self, s: &Slice) -> bool {
        let Some(t) = self.arc.expr().complemented_slice() else { return false };
        s.arcs().contains(&self.arc)
            && is_morphism(&self.morphism.map, t.draft(), s.draft())
            && t.dist().iter().map(|n| self.morphism.map.get(n)).eq(self.arc.args().iter().map(Some))
    }
}

#[derive(Serialize, Deserialize)]
struct WitnessJson {
    arc: ArcJson,
    morphism: Morphism,
}

impl Serialize for ZeroWitness {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        WitnessJson {
            arc: ArcJson { expr: expr_to_json(self.arc.expr()), args: self.arc.args().to_vec() },
            morphism: self.morphism.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ZeroWitness {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let w = WitnessJson::deserialize(de)?;
        let expr = expr_from_json(&w.arc.expr).map_err(serde::de::Error::custom)?;
        let arc = Arc::new(expr, w.arc.args).map_err(serde::de::Error::custom)?;
        Ok(ZeroWitness { arc, morphism: w.morphism })
    }
}

/// First zero witness in canonical arc order.
pub fn is_zero_slice(s: &Slice) -> Option<ZeroWitness> {
    let target = Target::new(s.draft());
    zero_witness_in(s, &target)
}

pub fn zero_witness_in(s: &Slice, target: &Target<'_>) -> Option<ZeroWitness> {
    s.arcs().iter().find_map(|a| {
        let t = a.expr().complemented_slice()?;
        slice_maps_onto(t, target, a.args()).map(|m| ZeroWitness { arc: a.clone(), morphism: m })
    })
}

/// Zero check of a graph with one optional witness per slice (in slice
/// order). A graph is zero iff every entry is `Some`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphZero {
    pub witnesses: Vec<Option<ZeroWitness>>,
}

impl GraphZero {
    pub fn is_zero(&self) -> bool {
        self.witnesses.iter().all(Option::is_some)
    }
}

pub fn is_zero_graph(g: &Graph, exec: Exec) -> GraphZero {
    let slices: Vec<&Slice> = g.slices().collect();
    GraphZero { witnesses: exec.map(&slices, |s| is_zero_slice(s)) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name::PredSym;

    fn names(xs: &[&str]) -> Vec<Name> {
        xs.iter().map(Name::new).collect()
    }

    #[test]
    fn isolated_source_node_maps_everywhere() {
        let src = Draft::default().add_nodes(names(&["x"]));
        let p = PredSym::new("p", 1);
        let dst = Draft::of_arcs([Arc::pred(&p, &["a"]), Arc::pred(&p, &["b"])]).add_nodes(names(&["c"]));
        let ms = enumerate_morphisms(&src, &dst);
        assert_eq!(ms.len(), 3);
        assert!(ms.iter().all(|m| is_morphism(&m.map, &src, &dst)));
    }

    #[test]
    fn arcs_must_be_preserved() {
        let r = PredSym::new("r", 2);
        let src = Draft::of_arcs([Arc::pred(&r, &["x", "y"]), Arc::pred(&r, &["y", "z"])]);
        let dst = Draft::of_arcs([Arc::pred(&r, &["a", "b"]), Arc::pred(&r, &["b", "a"])]);
        let ms = enumerate_morphisms(&src, &dst);
        // x->a,y->b,z->a  and  x->b,y->a,z->b
        assert_eq!(ms.len(), 2);
    }

    #[test]
    fn zero_slice_example() {
        // r(u,v) together with ~<{u,z}; r(u,z); [u]> at u
        let r = PredSym::new("r", 2);
        let t = Slice::new(Draft::of_arcs([Arc::pred(&r, &["u", "z"])]), names(&["u"])).unwrap();
        let carc = Arc::new(Expr::cmpl(Expr::slice(&t)), names(&["u"])).unwrap();
        let s = Slice::new(Draft::of_arcs([Arc::pred(&r, &["u", "v"]), carc]), vec![]).unwrap();
        let w = is_zero_slice(&s).expect("zero");
        assert!(w.verify(&s));
        let tdist = &w.arc.expr().complemented_slice().unwrap().dist()[0];
        assert_eq!(w.morphism.apply(tdist), &Name::new("u"));
        // Zero-ness does not depend on the distinguished list.
        let s2 = s.with_dist(names(&["u", "v"])).unwrap();
        assert!(is_zero_slice(&s2).is_some());
    }

    #[test]
    fn non_zero_and_empty_graph() {
        assert!(is_zero_slice(&Slice::arcless(names(&["u"]))).is_none());
        assert!(is_zero_graph(&Graph::empty(2), Exec::Sequential).is_zero());
    }
}
