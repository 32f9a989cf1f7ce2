//! Checker for the DOT language grammar as published with Graphviz:
//!
//! ```text
//! graph     : [strict] (graph | digraph) [ID] '{' stmt_list '}'
//! stmt_list : [stmt [';'] stmt_list]
//! stmt      : node_stmt | edge_stmt | attr_stmt | ID '=' ID | subgraph
//! attr_stmt : (graph | node | edge) attr_list
//! attr_list : '[' [a_list] ']' [attr_list]
//! a_list    : ID '=' ID [(';' | ',')] [a_list]
//! edge_stmt : (node_id | subgraph) edgeRHS [attr_list]
//! edgeRHS   : edgeop (node_id | subgraph) [edgeRHS]
//! node_stmt : node_id [attr_list]
//! node_id   : ID [port]
//! port      : ':' ID [':' compass_pt] | ':' compass_pt
//! subgraph  : [subgraph [ID]] '{' stmt_list '}'
//! ```

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Kw(&'static str),
    Sym(char),
    Edge(&'static str),
}

const KEYWORDS: [&str; 6] = ["strict", "graph", "digraph", "node", "edge", "subgraph"];

fn lex(text: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '/' if cs.get(i + 1) == Some(&'/') => {
                while i < cs.len() && cs[i] != '\n' {
                    i += 1;
                }
            }
            '/' if cs.get(i + 1) == Some(&'*') => {
                i += 2;
                while i + 1 < cs.len() && !(cs[i] == '*' && cs[i + 1] == '/') {
                    i += 1;
                }
                if i + 1 >= cs.len() {
                    return Err("unterminated comment".into());
                }
                i += 2;
            }
            '{' | '}' | '[' | ']' | ';' | ',' | '=' | ':' => {
                out.push(Tok::Sym(c));
                i += 1;
            }
            '-' if cs.get(i + 1) == Some(&'>') => {
                out.push(Tok::Edge("->"));
                i += 2;
            }
            '-' if cs.get(i + 1) == Some(&'-') => {
                out.push(Tok::Edge("--"));
                i += 2;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match cs.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') if i + 1 < cs.len() => {
                            s.push(cs[i + 1]);
                            i += 2;
                        }
                        Some(&d) => {
                            s.push(d);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push(Tok::Id(s));
            }
            c if c.is_ascii_digit() || c == '-' || c == '.' => {
                let start = i;
                i += 1;
                while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                    i += 1;
                }
                let num: String = cs[start..i].iter().collect();
                let body = num.trim_start_matches('-');
                let valid = !body.is_empty() && body.matches('.').count() <= 1 && body.chars().any(|d| d.is_ascii_digit());
                if !valid {
                    return Err(format!("bad numeral `{num}`"));
                }
                out.push(Tok::Id(num));
            }
            c if c.is_alphabetic() || c == '_' || !c.is_ascii() => {
                let start = i;
                while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_' || !cs[i].is_ascii()) {
                    i += 1;
                }
                let word: String = cs[start..i].iter().collect();
                match KEYWORDS.iter().find(|k| k.eq_ignore_ascii_case(&word)) {
                    Some(k) => out.push(Tok::Kw(k)),
                    None => out.push(Tok::Id(word)),
                }
            }
            c => return Err(format!("unexpected character `{c}`")),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    at: usize,
    edgeop: &'static str,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), String> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(format!("expected {t:?} at token {}, found {:?}", self.at, self.peek()))
        }
    }

    fn id(&mut self) -> Result<(), String> {
        match self.peek() {
            Some(Tok::Id(_)) => {
                self.at += 1;
                Ok(())
            }
            other => Err(format!("expected ID at token {}, found {other:?}", self.at)),
        }
    }

    fn graph(&mut self) -> Result<(), String> {
        self.eat(&Tok::Kw("strict"));
        self.edgeop = if self.eat(&Tok::Kw("digraph")) {
            "->"
        } else if self.eat(&Tok::Kw("graph")) {
            "--"
        } else {
            return Err("expected graph or digraph".into());
        };
        if matches!(self.peek(), Some(Tok::Id(_))) {
            self.at += 1;
        }
        self.expect(Tok::Sym('{'))?;
        self.stmt_list()?;
        self.expect(Tok::Sym('}'))?;
        if self.at != self.toks.len() {
            return Err("trailing input".into());
        }
        Ok(())
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        while !matches!(self.peek(), Some(Tok::Sym('}')) | None) {
            self.stmt()?;
            self.eat(&Tok::Sym(';'));
        }
        Ok(())
    }

    fn attr_list(&mut self) -> Result<(), String> {
        self.expect(Tok::Sym('['))?;
        loop {
            while self.eat(&Tok::Sym('[')) {}
            if self.eat(&Tok::Sym(']')) {
                if matches!(self.peek(), Some(Tok::Sym('['))) {
                    continue;
                }
                return Ok(());
            }
            self.id()?;
            self.expect(Tok::Sym('='))?;
            self.id()?;
            if !self.eat(&Tok::Sym(',')) {
                self.eat(&Tok::Sym(';'));
            }
        }
    }

    fn subgraph(&mut self) -> Result<(), String> {
        if self.eat(&Tok::Kw("subgraph")) && matches!(self.peek(), Some(Tok::Id(_))) {
            self.at += 1;
        }
        self.expect(Tok::Sym('{'))?;
        self.stmt_list()?;
        self.expect(Tok::Sym('}'))
    }

    fn node_id(&mut self) -> Result<(), String> {
        self.id()?;
        if self.eat(&Tok::Sym(':')) {
            self.id()?;
            if self.eat(&Tok::Sym(':')) {
                self.id()?;
            }
        }
        Ok(())
    }

    fn operand(&mut self) -> Result<(), String> {
        match self.peek() {
            Some(Tok::Kw("subgraph")) | Some(Tok::Sym('{')) => self.subgraph(),
            _ => self.node_id(),
        }
    }

    fn stmt(&mut self) -> Result<(), String> {
        match self.peek() {
            Some(Tok::Kw("graph")) | Some(Tok::Kw("node")) | Some(Tok::Kw("edge")) => {
                self.at += 1;
                return self.attr_list();
            }
            Some(Tok::Id(_)) if self.toks.get(self.at + 1) == Some(&Tok::Sym('=')) => {
                self.at += 2;
                return self.id();
            }
            _ => {}
        }
        self.operand()?;
        while let Some(Tok::Edge(op)) = self.peek() {
            if *op != self.edgeop {
                return Err(format!("edge operator {op} in a graph using {}", self.edgeop));
            }
            self.at += 1;
            self.operand()?;
        }
        if matches!(self.peek(), Some(Tok::Sym('['))) {
            self.attr_list()?;
        }
        Ok(())
    }
}

/// Parses `text` against the DOT grammar.
pub fn check_dot(text: &str) -> Result<(), String> {
    let toks = lex(text)?;
    Parser { toks, at: 0, edgeop: "->" }.graph()
}

#[allow(dead_code)]
pub fn self_test() {
    assert!(check_dot("digraph G { a -> b [label=\"x\"]; subgraph cluster_1 { c; } }").is_ok());
    assert!(check_dot("graph { a -- b; c = d }").is_ok());
    assert!(check_dot("digraph { a -- b }").is_err());
    assert!(check_dot("digraph { a -> }").is_err());
    assert!(check_dot("digraph { a [label=] }").is_err());
    assert!(check_dot("digraph { \"open }").is_err());
}
