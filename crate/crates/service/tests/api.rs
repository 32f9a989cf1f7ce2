use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use grefute_core::prover::Status;
use grefute_core::session::{apply_delta, Delta, GraphView};
use grefute_service::{router, AppState, Created};
use proptest::prelude::*;
use serde_json::{json, Value};
use tower::ServiceExt;

const EXPRL: &str = "r(u,w) & t(w2,v) & ~(exists x. (r(u,x) & s(x,w2))) & ~(exists y. (~s(w,y) & t(y,v)))";

fn app() -> Router {
    router(Arc::new(AppState::in_memory()))
}

async fn call(app: &Router, method: &str, path: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let body = match body {
        Some(v) => Body::from(v.to_string()),
        None => Body::empty(),
    };
    let req = Request::builder().method(method).uri(path).header("content-type", "application/json").body(body).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn call_json(app: &Router, method: &str, path: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, path, body).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

async fn create(app: &Router, premises: &[&str], conclusion: Option<&str>) -> Created {
    let (s, v) = call_json(app, "POST", "/sessions", Some(json!({"premises": premises, "conclusion": conclusion}))).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    serde_json::from_value(v).unwrap()
}

async fn graph(app: &Router, id: &str) -> GraphView {
    let (s, v) = call_json(app, "GET", &format!("/sessions/{id}/graph"), None).await;
    assert_eq!(s, StatusCode::OK);
    serde_json::from_value(v).unwrap()
}

#[tokio::test]
async fn case_split_is_refuted_by_one_expansion() {
    let app = app();
    let c = create(&app, &[EXPRL], None).await;
    assert_eq!(c.graph.status, Status::Open);
    assert_eq!(c.graph.slices.len(), 1);
    let s = &c.graph.slices[0];
    assert_eq!(s.templates.len(), 2);

    let (code, v) = call_json(&app, "POST", &format!("/sessions/{}/auto", c.id), Some(json!({"budget": {"maxExpansions": 1}}))).await;
    assert_eq!(code, StatusCode::OK, "{v}");
    let auto: Delta = serde_json::from_value(v).unwrap();
    assert_eq!(auto.status, Status::Refuted);
    let [x] = &auto.expansions[..] else { panic!("expected one expansion: {auto:?}") };

    // the same choice made by hand
    let fresh = create(&app, &[EXPRL], None).await;
    let body = json!({"slice": x.slice, "t": x.t, "v": x.v});
    let (code, v) = call_json(&app, "POST", &format!("/sessions/{}/expand", fresh.id), Some(body)).await;
    assert_eq!(code, StatusCode::OK, "{v}");
    let d: Delta = serde_json::from_value(v).unwrap();
    assert_eq!(d.status, Status::Refuted);
    assert_eq!(d.expansions.len(), 1);
    assert_eq!(d.erased.len(), 2);
    assert!(graph(&app, &fresh.id).await.slices.is_empty());
}

#[tokio::test]
async fn conflicting_premises_are_refuted_at_creation() {
    let app = app();
    let c = create(&app, &["p(u) & q(u)"], Some("p(u)")).await;
    assert_eq!(c.graph.status, Status::Refuted);
    assert!(c.graph.slices.is_empty());
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/auto", c.id), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["code"], "terminal_state");
}

#[tokio::test]
async fn satisfiable_problem_saturates_with_a_countermodel() {
    let app = app();
    let c = create(&app, &["p(u)"], Some("q(u)")).await;
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/auto", c.id), Some(json!({}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let d: Delta = serde_json::from_value(v).unwrap();
    assert_eq!(d.status, Status::Saturated);
    assert!(d.countermodel.is_some());
    assert!(graph(&app, &c.id).await.countermodel.is_some());
}

#[tokio::test]
async fn zero_budget_gives_an_empty_delta() {
    let app = app();
    let c = create(&app, &["forall x. (p(x) -> q(x))", "p(u)"], Some("q(u)")).await;
    let body = json!({"budget": {"maxExpansions": 0}});
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/auto", c.id), Some(body)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let d: Delta = serde_json::from_value(v).unwrap();
    assert!(d.is_empty());
    assert_eq!(graph(&app, &c.id).await, c.graph);
}

#[tokio::test]
async fn auto_deltas_rebuild_the_graph() {
    let app = app();
    let c = create(&app, &["forall x. (p(x) -> q(x))", "forall x. (q(x) -> s(x))", "p(u)"], Some("s(u)")).await;
    let mut view = c.graph.clone();
    loop {
        let body = json!({"budget": {"maxExpansions": 1}});
        let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/auto", c.id), Some(body)).await;
        if s == StatusCode::CONFLICT {
            break;
        }
        assert_eq!(s, StatusCode::OK, "{v}");
        apply_delta(&mut view, &serde_json::from_value(v).unwrap());
        assert_eq!(view, graph(&app, &c.id).await);
    }
    assert_eq!(view.status, Status::Refuted);
}

#[tokio::test]
async fn trace_and_render_are_served() {
    let app = app();
    let c = create(&app, &[EXPRL], None).await;
    let (s, v) = call_json(&app, "GET", &format!("/sessions/{}/trace", c.id), None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["initial"].is_object() && v["steps"].is_array(), "{v}");
    let (s, dot) = call(&app, "GET", &format!("/sessions/{}/render", c.id), None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(String::from_utf8(dot).unwrap().trim_start().starts_with("digraph"));
}

#[tokio::test]
async fn errors_carry_codes_and_statuses() {
    let app = app();
    let (s, v) = call_json(&app, "POST", "/sessions", Some(json!({"premises": ["p(u"]}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "parse_error");
    assert!(v["locus"].is_number());

    let (s, v) = call_json(&app, "GET", "/sessions/999/graph", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "unknown_session");

    let (s, _) = call(&app, "POST", "/sessions", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let c = create(&app, &[EXPRL], None).await;
    let t = &c.graph.slices[0].templates[0];
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/expand", c.id), Some(json!({"slice": 77, "t": t.t, "v": t.arc.args}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "unknown_slice");

    let id = c.graph.slices[0].id;
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/expand", c.id), Some(json!({"slice": id, "t": t.t, "v": []}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["code"], "illegal_choice");

    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/expand", c.id), Some(json!({"slice": id, "t": t.t, "v": ["nowhere", "else"]}))).await;
    assert_eq!(s, StatusCode::CONFLICT, "{v}");

    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/auto", c.id), Some(json!({"budget": "lots"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "bad_request");
}

#[tokio::test]
async fn journal_reloads_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let state = Arc::new(AppState::with_journal(dir.path().to_path_buf()).unwrap());
    let app = router(state);
    let a = create(&app, &["forall x. (p(x) -> q(x))", "p(u)"], Some("q(u)")).await;
    let b = create(&app, &["p(u)"], Some("q(u)")).await;
    let c = create(&app, &[EXPRL], None).await;
    let t = &c.graph.slices[0].templates[1];
    call(&app, "POST", &format!("/sessions/{}/expand", c.id), Some(json!({"slice": c.graph.slices[0].id, "t": t.t, "v": t.arc.args}))).await;
    call(&app, "POST", &format!("/sessions/{}/auto", a.id), Some(json!({"budget": {"maxExpansions": 1}}))).await;
    call(&app, "POST", &format!("/sessions/{}/auto", b.id), None).await;
    let before: Vec<GraphView> = graphs(&app, &[&a.id, &b.id, &c.id]).await;

    let reloaded = AppState::with_journal(dir.path().to_path_buf()).unwrap();
    assert_eq!(reloaded.session_ids(), vec![a.id.clone(), b.id.clone(), c.id.clone()]);
    let app2 = router(Arc::new(reloaded));
    let after: Vec<GraphView> = graphs(&app2, &[&a.id, &b.id, &c.id]).await;
    assert_eq!(before, after);
    let d = create(&app2, &["p(u)"], None).await;
    assert_eq!(d.id, "4");
}

async fn graphs(app: &Router, ids: &[&str]) -> Vec<GraphView> {
    let mut out = Vec::new();
    for id in ids {
        out.push(graph(app, id).await);
    }
    out
}

#[derive(Debug, Clone)]
enum Op {
    Auto(u64),
    Expand(usize, usize),
    Graph,
    Garbage,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0u64..3).prop_map(Op::Auto),
        (0usize..4, 0usize..4).prop_map(|(s, t)| Op::Expand(s, t)),
        Just(Op::Graph),
        Just(Op::Garbage),
    ]
}

const PROBLEMS: [(&[&str], Option<&str>); 4] = [
    (&[EXPRL], None),
    (&["forall x. (p(x) -> q(x))", "p(u)"], Some("q(u)")),
    (&["p(u) | q(u)"], Some("p(u)")),
    (&["forall x. exists y. r(x,y)"], Some("exists x. r(x,x)")),
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Random request sequences never leave a terminal state, never
    /// answer 5xx and keep the delta stream consistent with the graph.
    #[test]
    fn request_sequences_respect_the_state_machine(which in 0usize..4, ops in prop::collection::vec(op(), 1..12)) {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(async {
            let app = app();
            let (prem, concl) = PROBLEMS[which];
            let c = create(&app, prem, concl).await;
            let mut view = c.graph.clone();
            let path = |p: &str| format!("/sessions/{}/{p}", c.id);
            for op in ops {
                let terminal = view.status != Status::Open;
                let (s, v) = match &op {
                    Op::Auto(n) => call_json(&app, "POST", &path("auto"), Some(json!({"budget": {"maxExpansions": n}}))).await,
                    Op::Expand(si, ti) => {
                        let Some(slice) = view.slices.get(*si % view.slices.len().max(1)) else { continue };
                        let Some(t) = slice.templates.get(*ti % slice.templates.len().max(1)) else { continue };
                        call_json(&app, "POST", &path("expand"), Some(json!({"slice": slice.id, "t": t.t, "v": t.arc.args}))).await
                    }
                    Op::Graph => call_json(&app, "GET", &path("graph"), None).await,
                    Op::Garbage => call_json(&app, "POST", &path("expand"), Some(json!([1, 2, 3]))).await,
                };
                prop_assert!(!s.is_server_error(), "{op:?}: {v}");
                match op {
                    Op::Graph => prop_assert_eq!(serde_json::from_value::<GraphView>(v).unwrap(), view.clone()),
                    Op::Garbage => prop_assert_eq!(s, StatusCode::BAD_REQUEST),
                    _ if terminal => prop_assert_eq!(s, StatusCode::CONFLICT),
                    _ => {
                        prop_assert_eq!(s, StatusCode::OK, "{:?}: {}", op, v);
                        let d: Delta = serde_json::from_value(v).unwrap();
                        prop_assert!(d.version >= view.version);
                        apply_delta(&mut view, &d);
                    }
                }
            }
            prop_assert_eq!(graph(&app, &c.id).await, view);
            Ok(())
        })?;
    }
}

const PRF_PHI: &str = "q(v,w) & exists z. (p(z) & r(v,z) & exists x. exists y. (s(v,x) & t(x,w) & a(x,y) & b(y,w)))";
const PRF_THETA: &str = "exists x1. exists x2. exists x3. exists yp. exists y1. exists y2. exists zp. exists z1. exists z2. \
     (p(zp) & s(y2,x3) & t(x2,z1) & q(y1,z1) & q(y2,z2) & a(x1,yp) & a(x3,yp) \
      & r(v,zp) & r(y1,zp) & r(y2,zp) & b(yp,w) & b(yp,z1) & b(yp,z2))";

#[tokio::test]
async fn morphism_at_basic_form_refutes_without_expansions() {
    let app = app();
    let c = create(&app, &[PRF_PHI], Some(PRF_THETA)).await;
    assert_eq!(c.graph.status, Status::Refuted);
    let (_, trace) = call_json(&app, "GET", &format!("/sessions/{}/trace", c.id), None).await;
    let steps = trace["steps"].as_array().unwrap();
    assert!(steps.iter().all(|s| s.get("expand").is_none()));
    assert!(steps.iter().any(|s| s.get("erase").is_some()));
    let (s, _) = call(&app, "POST", &format!("/sessions/{}/auto", c.id), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test]
async fn falsum_alone_saturates() {
    let app = app();
    let c = create(&app, &[], Some("false")).await;
    assert_eq!(c.graph.status, Status::Open);
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/auto", c.id), None).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["status"], "SATURATED");
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/auto", c.id), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["code"], "terminal_state");
}

#[tokio::test]
async fn arcless_template_erases_one_child() {
    let app = app();
    let c = create(&app, &["p(u)"], Some("q(u)")).await;
    let parent = &c.graph.slices[0];
    let t = json!({"nodes": ["n0"], "arcs": [], "dist": ["n0"]});
    let (s, v) = call_json(&app, "POST", &format!("/sessions/{}/expand", c.id), Some(json!({"slice": parent.id, "t": t, "v": ["u"]}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let d: Delta = serde_json::from_value(v).unwrap();
    let [x] = &d.expansions[..] else { panic!("{d:?}") };
    let [e] = &d.erased[..] else { panic!("{d:?}") };
    assert_eq!(e.slice, x.right);
    let after = graph(&app, &c.id).await;
    assert_eq!(after.status, Status::Open);
    assert_eq!(after.slices.iter().map(|s| s.id).collect::<Vec<_>>(), vec![x.left]);
}

#[tokio::test]
async fn replayed_trace_gives_identical_graph_json() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(AppState::with_journal(dir.path().to_path_buf()).unwrap()));
    let c = create(&app, &["forall x. exists y. r(x,y)", "p(u) | q(u)"], Some("exists x. (r(x,x) & p(x))")).await;
    for _ in 0..3 {
        call(&app, "POST", &format!("/sessions/{}/auto", c.id), Some(json!({"budget": {"maxExpansions": 2}}))).await;
    }
    let (_, before) = call(&app, "GET", &format!("/sessions/{}/graph", c.id), None).await;
    let app2 = router(Arc::new(AppState::with_journal(dir.path().to_path_buf()).unwrap()));
    let (_, after) = call(&app2, "GET", &format!("/sessions/{}/graph", c.id), None).await;
    assert_eq!(String::from_utf8(before).unwrap(), String::from_utf8(after).unwrap());
}
