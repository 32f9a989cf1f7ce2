#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use grefute_core::conversion::to_basic;
use grefute_core::semantics::{model_from_index, models_up_to, FiniteModel};
use grefute_core::{Draft, Expr, Formula, Graph, Name, PredSym, Slice, Term};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const NAMES: [&str; 2] = ["u", "v"];
const VARS: [&str; 3] = ["x", "y", "z"];

pub fn p() -> PredSym {
    PredSym::new("p", 1)
}

pub fn r() -> PredSym {
    PredSym::new("r", 2)
}

/// The signature random formulas draw from (besides equality).
pub fn symbols() -> Vec<PredSym> {
    vec![p(), r()]
}

fn term(rng: &mut StdRng, bound: &[&'static str]) -> Term {
    if !bound.is_empty() && rng.gen_bool(0.6) {
        Term::Var((*bound.choose(rng).unwrap()).into())
    } else {
        Term::Name(Name::new(NAMES.choose(rng).unwrap()))
    }
}

fn atom(rng: &mut StdRng, bound: &[&'static str]) -> Formula {
    match rng.gen_range(0..10) {
        0..=3 => Formula::Atom(p(), vec![term(rng, bound)]),
        4..=7 => Formula::Atom(r(), vec![term(rng, bound), term(rng, bound)]),
        8 => Formula::Atom(PredSym::equality(), vec![term(rng, bound), term(rng, bound)]),
        _ => Formula::Falsum,
    }
}

/// A random formula over `p/1`, `r/2`, `=` and the names `u`, `v`.
pub fn random_formula(rng: &mut StdRng, depth: u32) -> Formula {
    fn go(rng: &mut StdRng, depth: u32, bound: &mut Vec<&'static str>) -> Formula {
        if depth == 0 || rng.gen_bool(0.25) {
            return atom(rng, bound);
        }
        match rng.gen_range(0..6) {
            0 => Formula::not(go(rng, depth - 1, bound)),
            1 => Formula::and(go(rng, depth - 1, bound), go(rng, depth - 1, bound)),
            2 => Formula::or(go(rng, depth - 1, bound), go(rng, depth - 1, bound)),
            3 => Formula::implies(go(rng, depth - 1, bound), go(rng, depth - 1, bound)),
            k => {
                let var = VARS[bound.len() % VARS.len()];
                bound.push(var);
                let body = go(rng, depth - 1, bound);
                bound.pop();
                if k == 4 {
                    Formula::exists(var, body)
                } else {
                    Formula::forall(var, body)
                }
            }
        }
    }
    go(rng, depth, &mut Vec::new())
}

/// Every model over `symbols()` with at most `max` elements.
pub fn all_models(max: usize) -> Vec<FiniteModel> {
    let syms = symbols();
    models_up_to(&syms, max).collect()
}

/// A uniformly random model over `syms` with 1..=max elements.
pub fn random_model(rng: &mut StdRng, syms: &[PredSym], max: usize) -> FiniteModel {
    let size = rng.gen_range(1..=max);
    let bits: u32 = syms.iter().map(|s| size.pow(s.arity() as u32) as u32).sum();
    assert!(bits < 64);
    model_from_index(syms, size, rng.gen_range(0..1u64 << bits))
}

/// A random nonempty basic slice, obtained by converting a random formula.
pub fn random_basic_slice(rng: &mut StdRng, depth: u32) -> Slice {
    loop {
        let f = random_formula(rng, depth);
        let g = to_basic(&Expr::formula(f)).expect("converts").graph;
        if let Some(s) = g.slices().collect::<Vec<_>>().choose(rng) {
            return (*s).clone();
        }
    }
}

/// Every map from `src` nodes to `dst` nodes, filtered for arc
/// preservation; written without the matcher.
pub fn brute_force_morphisms(src: &Draft, dst: &Draft) -> BTreeSet<BTreeMap<Name, Name>> {
    let from: Vec<&Name> = src.nodes().iter().collect();
    let to: Vec<&Name> = dst.nodes().iter().collect();
    let mut out = BTreeSet::new();
    if to.is_empty() && !from.is_empty() {
        return out;
    }
    let mut idx = vec![0usize; from.len()];
    loop {
        let map: BTreeMap<Name, Name> = from.iter().zip(&idx).map(|(a, &i)| ((*a).clone(), to[i].clone())).collect();
        let preserves = src.arcs().iter().all(|a| {
            let image: Vec<Name> = a.args().iter().map(|n| map[n].clone()).collect();
            dst.arcs().iter().any(|b| b.expr() == a.expr() && b.args() == image.as_slice())
        });
        if preserves {
            out.insert(map);
        }
        let mut k = from.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < to.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Every draft occurring in `g`, including those of nested slices.
pub fn drafts_of(g: &Graph) -> Vec<Draft> {
    fn expr(e: &Expr, acc: &mut Vec<Draft>) {
        match e {
            Expr::Slice(s) => slice(s, acc),
            Expr::Graph(g) => g.slices().for_each(|s| slice(s, acc)),
            Expr::Cmpl(inner) => expr(inner, acc),
            Expr::Pred(_) | Expr::Formula(_) => {}
        }
    }
    fn slice(s: &Slice, acc: &mut Vec<Draft>) {
        acc.push(s.draft().clone());
        for a in s.arcs() {
            expr(a.expr(), acc);
        }
    }
    let mut acc = Vec::new();
    g.slices().for_each(|s| slice(s, &mut acc));
    acc
}

pub fn names(xs: &[&str]) -> Vec<Name> {
    xs.iter().map(Name::new).collect()
}
