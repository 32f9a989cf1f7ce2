#[path = "../../core/tests/common/dot.rs"]
mod dot;

use std::path::Path;
use std::process::{Command, Output};

use grefute_cli::problem::{parse_problem, ProblemFile};
use grefute_cli::render_json;
use grefute_core::conversion::to_basic;
use grefute_core::json::{graph_from_str, graph_to_string, slice_to_string};
use grefute_core::render::dot_counts;
use grefute_core::syntax::parse_formula;
use grefute_core::{iso_equal, Arc, Draft, Expr, Graph, Name, PredSym, Slice};
use proptest::prelude::*;
use serde_json::Value;

use dot::check_dot;

fn grefute(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grefute")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn with_file(name: &str, text: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(name), text).unwrap();
    dir
}

fn names(ns: &[&str]) -> Vec<Name> {
    ns.iter().map(Name::new).collect()
}

#[test]
fn conflict_problem_is_valid() {
    let dir = with_file("ex1.txt", "# premises in conflict with the negated conclusion\np(u) & q(u)\n|- p(u)\n");
    let o = grefute(&["prove", "ex1.txt"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "VALID");
}

#[test]
fn unrelated_names_give_a_countermodel() {
    let dir = with_file("ex2.txt", "p(u)\n|- p(v)\n");
    let o = grefute(&["prove", "ex2.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("COUNTERMODEL"));
    assert!(out.contains("universe = {u, v}"), "{out}");
    assert!(out.contains("p = {u}"), "{out}");

    let o = grefute(&["prove", "ex2.txt", "--json", "--model-bound", "2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let j: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["result"], "COUNTERMODEL");
    assert_eq!(j["model"]["universe"], serde_json::json!(["u", "v"]));
    assert_eq!(j["model"]["interp"]["p/1"], serde_json::json!([["u"]]));
    assert!(j["oracle"]["countermodel"].is_object());
}

#[test]
fn budget_exhaustion_is_unknown() {
    let dir = with_file("inf.txt", "forall x. exists y. r(x,y)\n|- exists x. r(x,x)\n");
    let o = grefute(&["prove", "inf.txt", "--budget-expansions", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("UNKNOWN"));
    let o = grefute(&["prove", "inf.txt", "--budget-expansions", "3", "--model-bound", "2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("bounded search"));
}

#[test]
fn trace_and_render_files_are_written() {
    let dir = with_file("p.txt", "forall x. (p(x) -> q(x))\np(u)\n|- q(u)\n");
    let o = grefute(&["prove", "p.txt", "--trace", "t.json", "--render", "g.dot", "--sequential"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let trace: grefute_core::prover::Trace = serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert!(grefute_core::prover::replay_trace(&trace).unwrap().is_empty());
    check_dot(&std::fs::read_to_string(dir.path().join("g.dot")).unwrap()).unwrap();
}

#[test]
fn sat_checks_premises_only() {
    let dir = with_file("s.txt", "p(u)\n~p(u)\n");
    let o = grefute(&["sat", "s.txt"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "UNSATISFIABLE");
    let dir = with_file("s.txt", "p(u) | q(u)\n|- p(u)\n");
    let o = grefute(&["sat", "s.txt"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("SATISFIABLE"));
}

#[test]
fn errors_have_documented_exit_codes() {
    let dir = with_file("bad.txt", "p(u)\nq(u) & \n");
    let o = grefute(&["prove", "bad.txt"], dir.path());
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(grefute(&["prove", "missing.txt"], dir.path()).status.code(), Some(74));
    assert_eq!(grefute(&["frobnicate"], dir.path()).status.code(), Some(64));
    assert_eq!(grefute(&["prove", "bad.txt", "--budget-time", "-1"], dir.path()).status.code(), Some(64));
    assert_eq!(grefute(&["convert", "p(u"], dir.path()).status.code(), Some(64));
    assert_eq!(grefute(&["render", "bad.txt"], dir.path()).status.code(), Some(64));
    assert_eq!(grefute(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn falsum_converts_to_the_empty_graph() {
    let o = grefute(&["convert", "false"], Path::new("."));
    assert_eq!(o.status.code(), Some(0));
    let j: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(j["kind"], "graph");
    assert_eq!(j["slices"], serde_json::json!([]));
}

#[test]
fn quantifier_alternation_converts_to_nested_complements() {
    let dir = tempfile::tempdir().unwrap();
    let o = grefute(&["convert", "exists y. forall z. r(y,z)", "--trace", "t.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let got = graph_from_str(stdout(&o).trim()).unwrap();

    let r = PredSym::new("r", 2);
    let lifted = Slice::new(Draft::of_arcs([Arc::pred(&r, &["v", "w"])]), names(&["v", "w"])).unwrap();
    let mid = Slice::new(Draft::of_arcs([Arc::new(Expr::cmpl(Expr::slice(&lifted)), names(&["v", "w"])).unwrap()]), names(&["v"])).unwrap();
    let top = Slice::new(Draft::of_arcs([Arc::new(Expr::cmpl(Expr::slice(&mid)), names(&["v"])).unwrap()]), vec![]).unwrap();
    assert!(iso_equal(&got, &Graph::singleton(top)), "{got:?}");

    let trace: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert!(trace["steps"].as_array().is_some_and(|s| !s.is_empty()));
}

#[test]
fn converted_json_reloads() {
    for text in ["forall x. (p(x) -> exists y. r(x,y))", "p(u) | ~(q(u) & r(u,v))", "exists x. x = u"] {
        let o = grefute(&["convert", text], Path::new("."));
        let back = graph_from_str(stdout(&o).trim()).unwrap();
        let direct = to_basic(&Expr::formula(parse_formula(text).unwrap())).unwrap().graph;
        assert!(iso_equal(&back, &direct), "{text}");
        assert_eq!(graph_to_string(&back), stdout(&o).trim());
    }
}

#[test]
fn rendering_follows_the_drawing_conventions() {
    let (p, q) = (PredSym::new("p", 1), PredSym::new("q", 1));
    let not_p = Arc::new(Expr::cmpl(Expr::pred(p.clone())), names(&["u"])).unwrap();
    let s = Slice::new(Draft::of_arcs([Arc::pred(&p, &["u"]), Arc::pred(&q, &["u"]), not_p]), vec![]).unwrap();
    let dir = with_file("s.json", &slice_to_string(&s));
    let o = grefute(&["render", "s.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    check_dot(&out).unwrap();
    assert_eq!(dot_counts(&out), (1, 3, 3));

    let empty = render_json(&graph_to_string(&Graph::empty(0))).unwrap();
    check_dot(&empty).unwrap();
    assert_eq!(empty.matches("subgraph").count(), 1);
    assert!(empty.contains("style=dashed"));

    let case_split = "r(u,w) & t(w2,v) & ~(exists x. (r(u,x) & s(x,w2))) & ~(exists y. (~s(w,y) & t(y,v)))";
    let g = to_basic(&Expr::formula(parse_formula(case_split).unwrap())).unwrap().graph;
    let dir = with_file("g.json", &graph_to_string(&g));
    let o = grefute(&["render", "g.json", "-o", "g.dot"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let out = std::fs::read_to_string(dir.path().join("g.dot")).unwrap();
    check_dot(&out).unwrap();
    assert!(out.matches("label=\"¬slice\"").count() >= 2, "{out}");
}

fn json_noise() -> impl Strategy<Value = String> {
    let valid = [
        slice_to_string(&Slice::new(Draft::of_arcs([Arc::pred(&PredSym::new("p", 1), &["u"])]), names(&["u"])).unwrap()),
        graph_to_string(&Graph::empty(1)),
        r#"{"kind":"cmpl","of":{"kind":"pred","name":"p","arity":2}}"#.to_string(),
    ];
    (0usize..3, any::<u64>(), "\\PC{0,4}").prop_map(move |(which, seed, junk)| {
        let mut s: Vec<char> = valid[which].chars().collect();
        let at = (seed as usize) % (s.len() + 1);
        let cut = ((seed >> 16) as usize) % 4;
        let end = (at + cut).min(s.len());
        s.splice(at..end, junk.chars());
        s.into_iter().collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn problem_parser_never_panics(text in "(\\PC{0,30}\n){0,5}") {
        let _ = ProblemFile::parse(&text);
        let _ = parse_problem(&text);
    }

    #[test]
    fn problem_parser_survives_formula_like_noise(text in "[pqr()xyuv,&|~=.# \n-]{0,40}|(exists|forall|false|signature:|\\|-)[ a-z(),./0-9]{0,20}") {
        let _ = parse_problem(&text);
    }

    #[test]
    fn render_never_panics_on_arbitrary_text(text in "\\PC{0,60}") {
        let _ = render_json(&text);
    }

    #[test]
    fn render_never_panics_on_damaged_json(text in json_noise()) {
        if let Ok(dot) = render_json(&text) {
            prop_assert!(check_dot(&dot).is_ok());
        }
    }
}
