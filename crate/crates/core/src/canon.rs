//! Canonical forms of slices and graphs.
//!
//! Canonical labeling uses colour refinement with individualization. Nodes
//! start coloured by their positions in the distinguished list; colours
//! are refined by the (label, position, neighbour colours) of incident
//! arcs; ties are broken by trying every member of the first non-trivial
//! cell and keeping the smallest encoding. Members whose swap with an
//! already tried member is an automorphism are skipped.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Arc, Canon, Draft, Expr, Graph, Slice};
use crate::name::Name;

/// Types with a canonical representative of their isomorphism class.
pub trait Canonicalize: Sized {
    fn canonicalize(&self) -> Self;
}

impl Canonicalize for Slice {
    fn canonicalize(&self) -> Slice {
        canonical_labeling(self).0
    }
}

impl Canonicalize for Graph {
    fn canonicalize(&self) -> Graph {
        Graph::new(self.arity(), self.slices().map(Canonicalize::canonicalize)).expect("arity preserved")
    }
}

/// True iff the two values are isomorphic.
pub fn iso_equal<T: Canonicalize + Eq>(a: &T, b: &T) -> bool {
    a.canonicalize() == b.canonicalize()
}

pub(crate) fn canonical_slice(s: &Slice) -> Canon<Slice> {
    Canon::new_unchecked(s.canonicalize())
}

pub(crate) fn canonical_graph(g: &Graph) -> Canon<Graph> {
    Canon::new_unchecked(g.canonicalize())
}

/// Name of the `i`-th node in canonical order.
pub fn canonical_name(i: usize) -> Name {
    Name::new(format!("n{i}"))
}

struct Indexed {
    n: usize,
    /// Arcs as (label rank, argument indices), sorted.
    arcs: Vec<(usize, Vec<usize>)>,
    dist: Vec<usize>,
    /// For each node, the arcs it occurs in.
    incident: Vec<Vec<usize>>,
}

impl Indexed {
    fn new(s: &Slice, nodes: &[Name], labels: &[&Expr]) -> Indexed {
        let index: BTreeMap<&Name, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut arcs: Vec<(usize, Vec<usize>)> = s
            .arcs()
            .iter()
            .map(|a| {
                let rank = labels.binary_search(&a.expr()).expect("label ranked");
                (rank, a.args().iter().map(|n| index[n]).collect())
            })
            .collect();
        arcs.sort();
        let mut incident = vec![Vec::new(); nodes.len()];
        for (k, (_, args)) in arcs.iter().enumerate() {
            for &x in args {
                if incident[x].last() != Some(&k) {
                    incident[x].push(k);
                }
            }
        }
        let dist = s.dist().iter().map(|n| index[n]).collect();
        Indexed { n: nodes.len(), arcs, dist, incident }
    }

    fn refine(&self, colors: &mut Vec<usize>) {
        let mut count = distinct(colors);
        loop {
            let sigs: Vec<(usize, Vec<(usize, usize, Vec<usize>)>)> = (0..self.n)
                .map(|x| {
                    let mut inc: Vec<(usize, usize, Vec<usize>)> = Vec::new();
                    for &k in &self.incident[x] {
                        let (label, args) = &self.arcs[k];
                        let cols: Vec<usize> = args.iter().map(|&y| colors[y]).collect();
                        for (pos, &y) in args.iter().enumerate() {
                            if y == x {
                                inc.push((*label, pos, cols.clone()));
                            }
                        }
                    }
                    inc.sort();
                    (colors[x], inc)
                })
                .collect();
            *colors = rank(&sigs);
            let next = distinct(colors);
            if next == count {
                return;
            }
            count = next;
        }
    }

    fn encode(&self, colors: &[usize]) -> Encoding {
        let mut arcs: Vec<(usize, Vec<usize>)> =
            self.arcs.iter().map(|(l, args)| (*l, args.iter().map(|&x| colors[x]).collect())).collect();
        arcs.sort();
        Encoding { dist: self.dist.iter().map(|&x| colors[x]).collect(), arcs }
    }

    fn swap_is_automorphism(&self, a: usize, b: usize) -> bool {
        let sw = |x: usize| if x == a { b } else if x == b { a } else { x };
        if self.dist.iter().map(|&x| sw(x)).ne(self.dist.iter().copied()) {
            return false;
        }
        let mut touched: Vec<usize> = self.incident[a].iter().chain(&self.incident[b]).copied().collect();
        touched.sort_unstable();
        touched.dedup();
        touched.iter().all(|&k| {
            let (l, args) = &self.arcs[k];
            let image = (*l, args.iter().map(|&x| sw(x)).collect::<Vec<_>>());
            self.arcs.binary_search(&image).is_ok()
        })
    }

    fn search(&self, colors: Vec<usize>, best: &mut Option<(Encoding, Vec<usize>)>) {
        if distinct(&colors) == self.n {
            let enc = self.encode(&colors);
            if best.as_ref().is_none_or(|(b, _)| enc < *b) {
                *best = Some((enc, colors));
            }
            return;
        }
        let cell_color = first_nontrivial_cell(&colors);
        let cell: Vec<usize> = (0..self.n).filter(|&x| colors[x] == cell_color).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &x in &cell {
            if tried.iter().any(|&y| self.swap_is_automorphism(x, y)) {
                continue;
            }
            tried.push(x);
            let sigs: Vec<(usize, usize)> = (0..self.n).map(|y| (colors[y], usize::from(y != x))).collect();
            let mut next = rank(&sigs);
            self.refine(&mut next);
            self.search(next, best);
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Encoding {
    dist: Vec<usize>,
    arcs: Vec<(usize, Vec<usize>)>,
}

fn distinct(colors: &[usize]) -> usize {
    colors.iter().collect::<BTreeSet<_>>().len()
}

fn first_nontrivial_cell(colors: &[usize]) -> usize {
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in colors {
        *sizes.entry(c).or_default() += 1;
    }
    *sizes.iter().find(|(_, &n)| n > 1).expect("non-discrete colouring").0
}

/// Dense ranks of the items under their order.
fn rank<T: Ord>(items: &[T]) -> Vec<usize> {
    let mut sorted: Vec<&T> = items.iter().collect();
    sorted.sort();
    sorted.dedup();
    items.iter().map(|x| sorted.binary_search(&x).expect("present")).collect()
}

/// Canonical form of `s` together with the renaming applied to its nodes.
pub fn canonical_labeling(s: &Slice) -> (Slice, BTreeMap<Name, Name>) {
    let nodes: Vec<Name> = s.nodes().iter().cloned().collect();
    let mut labels: Vec<&Expr> = s.arcs().iter().map(Arc::expr).collect();
    labels.sort();
    labels.dedup();
    let ix = Indexed::new(s, &nodes, &labels);

    // Initial colour: the dist positions a node occupies; nodes outside
    // the distinguished list come after all distinguished ones.
    let initial: Vec<(usize, Vec<usize>)> = (0..ix.n)
        .map(|x| {
            let pos: Vec<usize> = ix.dist.iter().enumerate().filter(|(_, &d)| d == x).map(|(i, _)| i).collect();
            (usize::from(pos.is_empty()), pos)
        })
        .collect();
    let mut colors = rank(&initial);
    ix.refine(&mut colors);
    let mut best = None;
    ix.search(colors, &mut best);
    let (_, colors) = best.expect("search visits at least one leaf");

    let renaming: BTreeMap<Name, Name> =
        nodes.iter().enumerate().map(|(i, n)| (n.clone(), canonical_name(colors[i]))).collect();
    let arcs: BTreeSet<Arc> = s.arcs().iter().map(|a| a.map_args(|n| renaming[n].clone())).collect();
    let draft = Draft::from_parts(renaming.values().cloned().collect(), arcs);
    let dist = s.dist().iter().map(|n| renaming[n].clone()).collect();
    (Slice::from_parts(draft, dist), renaming)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::name::PredSym;

    fn names(xs: &[&str]) -> Vec<Name> {
        xs.iter().map(Name::new).collect()
    }

    fn slice(arcs: Vec<Arc>, dist: &[&str]) -> Slice {
        Slice::new(Draft::of_arcs(arcs).add_nodes(names(dist)), names(dist)).unwrap()
    }

    #[test]
    fn single_node() {
        let p = PredSym::new("p", 1);
        let s = slice(vec![Arc::pred(&p, &["a"])], &["a"]);
        let c = s.canonicalize();
        assert_eq!(c, slice(vec![Arc::pred(&p, &["n0"])], &["n0"]));
    }

    #[test]
    fn renamed_slices_agree() {
        let r = PredSym::new("r", 2);
        let a = slice(vec![Arc::pred(&r, &["u", "x"]), Arc::pred(&r, &["x", "y"])], &["u"]);
        let b = slice(vec![Arc::pred(&r, &["k", "m"]), Arc::pred(&r, &["b", "k"])], &["b"]);
        assert!(iso_equal(&a, &b));
        let c = slice(vec![Arc::pred(&r, &["u", "x"]), Arc::pred(&r, &["y", "x"])], &["u"]);
        assert!(!iso_equal(&a, &c));
    }

    #[test]
    fn arity_distinguishes() {
        assert!(!iso_equal(&Slice::arcless(names(&["u"])), &Slice::arcless(names(&["u", "v"]))));
    }

    #[test]
    fn symmetric_structure_terminates_quickly() {
        // 12 isolated nodes plus a 6-cycle: twin pruning keeps this small.
        let r = PredSym::new("r", 2);
        let mut arcs = Vec::new();
        let cyc = ["c0", "c1", "c2", "c3", "c4", "c5"];
        for i in 0..6 {
            arcs.push(Arc::pred(&r, &[cyc[i], cyc[(i + 1) % 6]]));
        }
        let mut s = slice(arcs, &[]);
        let iso: Vec<String> = (0..12).map(|i| format!("z{i}")).collect();
        s = Slice::new(s.draft().add_nodes(iso.iter().map(Name::new)), vec![]).unwrap();
        let c = s.canonicalize();
        assert_eq!(c.canonicalize(), c);
        assert_eq!(c.nodes().len(), 18);
    }

    #[test]
    fn repeated_dist_positions() {
        let p = PredSym::new("p", 1);
        let a = slice(vec![Arc::pred(&p, &["u"])], &["u", "v", "u"]);
        let b = slice(vec![Arc::pred(&p, &["x"])], &["x", "y", "x"]);
        let c = slice(vec![Arc::pred(&p, &["y"])], &["x", "y", "x"]);
        assert!(iso_equal(&a, &b));
        assert!(!iso_equal(&a, &c));
    }
}
