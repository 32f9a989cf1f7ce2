mod common;

#[path = "common/dot.rs"]
mod dot;

use grefute_core::conversion::to_basic;
use grefute_core::render::{dot_counts, render_expr, render_graph, render_slice};
use grefute_core::{Arc, Draft, Expr, Graph, PredSym, Slice};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{names, random_formula};
use dot::check_dot;

/// Deepest nesting of clusters.
fn cluster_depth(dot: &str) -> usize {
    let (mut depth, mut max, mut stack) = (0usize, 0usize, Vec::new());
    for line in dot.lines().map(str::trim) {
        if line.starts_with("subgraph") {
            stack.push(true);
            depth += 1;
            max = max.max(depth);
        } else if line.ends_with('{') {
            stack.push(false);
        } else if line == "}" && stack.pop() == Some(true) {
            depth -= 1;
        }
    }
    max
}

fn cmpl_slice(t: &Slice, args: &[&str]) -> Arc {
    Arc::new(Expr::cmpl(Expr::slice(t)), names(args)).unwrap()
}

#[test]
fn checker_accepts_and_rejects() {
    dot::self_test();
}

#[test]
fn conflict_draft_counts() {
    let (p, q) = (PredSym::new("p", 1), PredSym::new("q", 1));
    let not_p = Arc::new(Expr::cmpl(Expr::pred(p.clone())), names(&["u"])).unwrap();
    let s = Slice::new(Draft::of_arcs([Arc::pred(&p, &["u"]), Arc::pred(&q, &["u"]), not_p]), vec![]).unwrap();
    let out = render_slice(&s);
    check_dot(&out).unwrap();
    assert_eq!(dot_counts(&out), (1, 3, 3));
    assert!(out.contains("label=\"¬p\""));
}

#[test]
fn empty_graph_is_a_single_dashed_cluster() {
    let out = render_graph(&Graph::empty(0));
    check_dot(&out).unwrap();
    assert_eq!(out.matches("subgraph").count(), 1);
    assert!(out.contains("style=dashed"));
    assert_eq!(dot_counts(&out), (0, 0, 0));
}

#[test]
fn case_split_slice_nests_two_levels() {
    let (r, s, t) = (PredSym::new("r", 2), PredSym::new("s", 2), PredSym::new("t", 2));
    let t1 = Slice::new(Draft::of_arcs([Arc::pred(&r, &["u", "w"]), Arc::pred(&s, &["w", "v"])]), names(&["u", "v"])).unwrap();
    let lifted = Slice::new(Draft::of_arcs([Arc::pred(&s, &["u", "v"])]), names(&["u", "v"])).unwrap();
    let t2 = Slice::new(Draft::of_arcs([cmpl_slice(&lifted, &["u", "w"]), Arc::pred(&t, &["w", "v"])]), names(&["u", "v"])).unwrap();
    let top = Slice::new(
        Draft::of_arcs([Arc::pred(&r, &["u", "w"]), Arc::pred(&t, &["w2", "v"]), cmpl_slice(&t1, &["u", "w"]), cmpl_slice(&t2, &["w", "v"])]),
        names(&["u", "v", "w"]),
    )
    .unwrap();
    let out = render_slice(&top);
    check_dot(&out).unwrap();
    assert_eq!(cluster_depth(&out), 3);
    assert_eq!(out.matches("label=\"¬slice\"").count(), 3);
    for mark in ["u^{1}", "v^{2}", "w^{3}"] {
        assert!(out.contains(mark), "{mark}");
    }
}

#[test]
fn distinguished_positions_are_marked() {
    let s = Slice::arcless(names(&["u", "v", "u"]));
    let out = render_slice(&s);
    check_dot(&out).unwrap();
    assert!(out.contains("u^{1,3}") && out.contains("v^{2}"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rendered_graphs_parse(seed in any::<u64>()) {
        let f = random_formula(&mut StdRng::seed_from_u64(seed), 4);
        let e = Expr::formula(f);
        check_dot(&render_expr(&e)).map_err(TestCaseError::fail)?;
        let g = to_basic(&e).unwrap().graph;
        let out = render_graph(&g);
        check_dot(&out).map_err(TestCaseError::fail)?;
        prop_assert_eq!(out.matches("subgraph").count(), 1 + g.len() + nested(&g));
    }
}

/// Number of slice or graph labels at any depth.
fn nested(g: &Graph) -> usize {
    fn expr(e: &Expr) -> usize {
        match e {
            Expr::Slice(s) => 1 + slice(s),
            Expr::Graph(g) => 1 + g.slices().map(|s| 1 + slice(s)).sum::<usize>(),
            Expr::Cmpl(inner) => match &**inner {
                Expr::Slice(_) | Expr::Graph(_) | Expr::Cmpl(_) => expr(inner),
                _ => 0,
            },
            _ => 0,
        }
    }
    fn slice(s: &Slice) -> usize {
        s.arcs().iter().map(|a| expr(a.expr())).sum()
    }
    g.slices().map(slice).sum()
}
