//! Graphviz output.
//!
//! Slices are solid clusters, graphs dashed clusters, and complements put a
//! `¬` in front of the cluster label. Names are circle nodes; distinguished
//! names carry their positions, so `⟨u,v,u⟩` shows as `u^{1,3}` and `v^{2}`.
//! Predicate and formula labels become box nodes with one edge per
//! argument; slice and graph labels become nested clusters whose edges
//! leave from the cluster border.

use crate::json::Document;
use crate::model::{Arc, Expr, Graph, Slice};
use crate::name::Name;
use crate::syntax::render_formula;

struct Dot {
    out: String,
    nodes: usize,
    clusters: usize,
    depth: usize,
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

/// Text of an expression that is drawn as a single box.
fn flat_label(e: &Expr) -> Option<String> {
    match e {
        Expr::Pred(p) => Some(p.name().to_string()),
        Expr::Formula(f) => Some(render_formula(f)),
        Expr::Cmpl(inner) => flat_label(inner).map(|s| format!("¬{s}")),
        Expr::Slice(_) | Expr::Graph(_) => None,
    }
}

fn dist_label(n: &Name, dist: &[Name]) -> String {
    let pos: Vec<String> = dist.iter().enumerate().filter(|(_, d)| *d == n).map(|(i, _)| (i + 1).to_string()).collect();
    if pos.is_empty() {
        n.as_str().to_string()
    } else {
        format!("{}^{{{}}}", n.as_str(), pos.join(","))
    }
}

impl Dot {
    fn new() -> Dot {
        Dot { out: String::new(), nodes: 0, clusters: 0, depth: 1 }
    }

    fn line(&mut self, text: &str) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn node_id(&mut self) -> String {
        self.nodes += 1;
        format!("n{}", self.nodes)
    }

    fn open_cluster(&mut self, label: &str, dashed: bool) -> String {
        self.clusters += 1;
        let id = format!("cluster_{}", self.clusters);
        self.line(&format!("subgraph {id} {{"));
        self.depth += 1;
        self.line(&format!("label={};", quote(label)));
        self.line(if dashed { "style=dashed;" } else { "style=solid;" });
        id
    }

    fn close_cluster(&mut self) {
        self.depth -= 1;
        self.line("}");
    }

    /// Draws the nodes and arcs of `s` in the current cluster; returns the
    /// node ids of its names.
    fn slice_body(&mut self, s: &Slice) -> Vec<(Name, String)> {
        let mut ids = Vec::new();
        for n in s.nodes() {
            let id = self.node_id();
            self.line(&format!("{id} [shape=circle, label={}];", quote(&dist_label(n, s.dist()))));
            ids.push((n.clone(), id));
        }
        for a in s.arcs() {
            self.arc(a, &ids);
        }
        ids
    }

    fn slice(&mut self, s: &Slice, prefix: &str) -> String {
        let id = self.open_cluster(&format!("{prefix}slice"), false);
        self.slice_body(s);
        self.close_cluster();
        id
    }

    fn graph(&mut self, g: &Graph, prefix: &str) -> String {
        let id = self.open_cluster(&format!("{prefix}graph"), true);
        for s in g.slices() {
            self.slice(s, "");
        }
        self.close_cluster();
        id
    }

    fn edges(&mut self, from: &str, a: &Arc, ids: &[(Name, String)], ltail: Option<&str>) {
        let r = a.args().len();
        for (i, n) in a.args().iter().enumerate() {
            let to = &ids.iter().find(|(m, _)| m == n).expect("argument is a node").1;
            let mut attrs = Vec::new();
            if r > 1 {
                attrs.push(format!("label={}", quote(&(i + 1).to_string())));
            }
            if let Some(c) = ltail {
                attrs.push(format!("ltail={c}"));
            }
            if attrs.is_empty() {
                self.line(&format!("{from} -> {to};"));
            } else {
                self.line(&format!("{from} -> {to} [{}];", attrs.join(", ")));
            }
        }
    }

    fn arc(&mut self, a: &Arc, ids: &[(Name, String)]) {
        if let Some(text) = flat_label(a.expr()) {
            let id = self.node_id();
            self.line(&format!("{id} [shape=box, label={}];", quote(&text)));
            self.edges(&id, a, ids, None);
            return;
        }
        let (mut e, mut prefix) = (a.expr(), String::new());
        while let Expr::Cmpl(inner) = e {
            prefix.push('¬');
            e = inner;
        }
        let anchor = self.node_id();
        let cluster = match e {
            Expr::Slice(t) => {
                let id = self.open_cluster(&format!("{prefix}slice"), false);
                self.line(&format!("{anchor} [shape=point, width=0.05];"));
                self.slice_body(t);
                self.close_cluster();
                id
            }
            Expr::Graph(h) => {
                let id = self.open_cluster(&format!("{prefix}graph"), true);
                self.line(&format!("{anchor} [shape=point, width=0.05];"));
                for s in h.slices() {
                    self.slice(s, "");
                }
                self.close_cluster();
                id
            }
            _ => unreachable!("flat labels handled above"),
        };
        self.edges(&anchor, a, ids, Some(&cluster));
    }

    fn finish(self) -> String {
        format!("digraph G {{\n  compound=true;\n  node [fontsize=10];\n{}}}\n", self.out)
    }
}

pub fn render_slice(s: &Slice) -> String {
    let mut d = Dot::new();
    d.slice(s, "");
    d.finish()
}

pub fn render_graph(g: &Graph) -> String {
    let mut d = Dot::new();
    d.graph(g, "");
    d.finish()
}

/// An expression on its own is drawn as the arc `⟨E, u_1 … u_r⟩`.
pub fn render_expr(e: &Expr) -> String {
    let mut d = Dot::new();
    let names: Vec<Name> = (1..=e.arity()).map(|i| Name::new(format!("u_{i}"))).collect();
    let s = Slice::new(
        crate::model::Draft::of_arcs([Arc::new(e.clone(), names.clone()).expect("arity")]).add_nodes(names.clone()),
        names,
    )
    .expect("dist among nodes");
    d.slice(&s, "");
    d.finish()
}

pub fn render_document(doc: &Document) -> String {
    match doc {
        Document::Expr(e) => render_expr(e),
        Document::Slice(s) => render_slice(s),
        Document::Graph(g) => render_graph(g),
    }
}

/// Counts of (name nodes, expression nodes, edges) in rendered output.
pub fn dot_counts(dot: &str) -> (usize, usize, usize) {
    let mut counts = (0, 0, 0);
    for line in dot.lines() {
        let line = line.trim();
        if line.contains("shape=circle") {
            counts.0 += 1;
        } else if line.contains("shape=box") || line.contains("shape=point") {
            counts.1 += 1;
        } else if line.contains("->") {
            counts.2 += 1;
        }
    }
    counts
}
