//! Concrete formula syntax.
//!
//! ```text
//! formula  := quant | impl
//! impl     := or ("->" impl)?
//! or       := and ("|" and)*
//! and      := neg ("&" neg)*
//! neg      := "~" neg | quant | atomexpr
//! atomexpr := "false" | ident "(" args? ")" | ident "=" ident | "(" formula ")"
//! quant    := ("exists" | "forall") ident "." formula
//! ```
//!
//! An identifier in argument position is a variable when an enclosing
//! quantifier binds it and a name otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Quantifier, Term};
use crate::name::{Name, PredSym};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("at {pos}: expected {expected}, found {found}")]
    Unexpected { pos: usize, expected: String, found: String },
    #[error("at {pos}: unexpected character `{ch}`")]
    BadChar { pos: usize, ch: char },
    #[error("at {pos}: predicate `{pred}` has arity {expected}, used with {found} arguments")]
    Arity { pos: usize, pred: String, expected: usize, found: usize },
    #[error("at {pos}: `{word}` is a reserved word")]
    Reserved { pos: usize, word: String },
    #[error("bad signature entry `{0}`")]
    BadSignature(String),
}

impl SyntaxError {
    /// Byte offset into the source text, when known.
    pub fn position(&self) -> Option<usize> {
        match self {
            SyntaxError::Unexpected { pos, .. }
            | SyntaxError::BadChar { pos, .. }
            | SyntaxError::Arity { pos, .. }
            | SyntaxError::Reserved { pos, .. } => Some(*pos),
            SyntaxError::BadSignature(_) => None,
        }
    }
}

const RESERVED: [&str; 3] = ["exists", "forall", "false"];

/// Predicate arities. Symbols not declared are fixed at first use.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    arities: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Signature::default()
    }

    pub fn declare(&mut self, name: &str, arity: usize) {
        self.arities.insert(name.to_string(), arity);
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }

    /// Parses `p/1, r/2` style declarations.
    pub fn parse(text: &str) -> Result<Signature, SyntaxError> {
        let mut sig = Signature::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let p = PredSym::parse_key(item).ok_or_else(|| SyntaxError::BadSignature(item.to_string()))?;
            if !is_ident(p.name()) || RESERVED.contains(&p.name()) {
                return Err(SyntaxError::BadSignature(item.to_string()));
            }
            sig.declare(p.name(), p.arity());
        }
        Ok(sig)
    }

    pub fn symbols(&self) -> impl Iterator<Item = PredSym> + '_ {
        self.arities.iter().map(|(n, a)| PredSym::new(n, *a))
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some('a'..='z')) && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A parsed formula together with its source text and free names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFormula {
    pub text: String,
    pub parsed: Formula,
    pub names: Vec<Name>,
}

impl SourceFormula {
    pub fn parse(text: &str, sig: &mut Signature) -> Result<SourceFormula, SyntaxError> {
        let parsed = parse_formula_with(text, sig)?;
        let names = parsed.free_names();
        Ok(SourceFormula { text: text.to_string(), parsed, names })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Arrow,
    Eq,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Eq => "`=`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            'a'..='z' | 'A'..='Z' | '_' | '0'..='9' => {
                let mut end = i;
                while let Some(&(j, d)) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        end = j + d.len_utf8();
                        it.next();
                    } else {
                        break;
                    }
                }
                let word = &text[i..end];
                if !is_ident(word) {
                    return Err(SyntaxError::BadChar { pos: i, ch: c });
                }
                out.push((i, Tok::Ident(word.to_string())));
            }
            '-' => {
                it.next();
                match it.next() {
                    Some((_, '>')) => out.push((i, Tok::Arrow)),
                    _ => return Err(SyntaxError::BadChar { pos: i, ch: '-' }),
                }
            }
            _ => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '~' => Tok::Not,
                    '&' => Tok::And,
                    '|' => Tok::Or,
                    '=' => Tok::Eq,
                    _ => return Err(SyntaxError::BadChar { pos: i, ch: c }),
                };
                it.next();
                out.push((i, tok));
            }
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    sig: &'a mut Signature,
    bound: Vec<Arc<str>>,
}

impl Parser<'_> {
    fn current(&self) -> &(usize, Tok) {
        &self.toks[self.at.min(self.toks.len() - 1)]
    }

    fn peek(&self) -> &Tok {
        &self.current().1
    }

    fn pos(&self) -> usize {
        self.current().0
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek().clone();
        self.at += 1;
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError::Unexpected { pos: self.pos(), expected: expected.to_string(), found: self.peek().describe() })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(&tok.describe())
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        if self.at_quantifier() {
            self.quant()
        } else {
            self.implication()
        }
    }

    fn at_quantifier(&self) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == "exists" || w == "forall")
    }

    fn quant(&mut self) -> Result<Formula, SyntaxError> {
        let q = match self.bump() {
            Tok::Ident(w) if w == "exists" => Quantifier::Exists,
            _ => Quantifier::Forall,
        };
        let pos = self.pos();
        let var = match self.bump() {
            Tok::Ident(w) if RESERVED.contains(&w.as_str()) => return Err(SyntaxError::Reserved { pos, word: w }),
            Tok::Ident(w) => Arc::<str>::from(w),
            _ => {
                self.at -= 1;
                return self.fail("a variable");
            }
        };
        self.expect(Tok::Dot)?;
        self.bound.push(var.clone());
        let body = self.formula();
        self.bound.pop();
        Ok(Formula::Quant(q, var, Box::new(body?)))
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula_rhs()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    /// Right operand of `->`: another implication, or a quantifier.
    fn formula_rhs(&mut self) -> Result<Formula, SyntaxError> {
        if self.at_quantifier() {
            self.quant()
        } else {
            self.implication()
        }
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.negation()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.negation()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn negation(&mut self) -> Result<Formula, SyntaxError> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Formula::not(self.negation()?));
        }
        if self.at_quantifier() {
            return self.quant();
        }
        self.atomic()
    }

    fn term(&self, word: &str) -> Term {
        if self.bound.iter().any(|v| &**v == word) {
            Term::Var(Arc::from(word))
        } else {
            Term::Name(Name::new(word))
        }
    }

    fn atomic(&mut self) -> Result<Formula, SyntaxError> {
        let pos = self.pos();
        match self.bump() {
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(w) if w == "false" => Ok(Formula::Falsum),
            Tok::Ident(w) if RESERVED.contains(&w.as_str()) => Err(SyntaxError::Reserved { pos, word: w }),
            Tok::Ident(w) => match self.peek() {
                Tok::LParen => {
                    self.bump();
                    let mut args = Vec::new();
                    if *self.peek() != Tok::RParen {
                        loop {
                            let apos = self.pos();
                            match self.bump() {
                                Tok::Ident(a) if RESERVED.contains(&a.as_str()) => {
                                    return Err(SyntaxError::Reserved { pos: apos, word: a })
                                }
                                Tok::Ident(a) => args.push(self.term(&a)),
                                _ => {
                                    self.at -= 1;
                                    return self.fail("an argument");
                                }
                            }
                            if *self.peek() == Tok::Comma {
                                self.bump();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    let arity = match self.sig.arity(&w) {
                        Some(a) if a != args.len() => {
                            return Err(SyntaxError::Arity { pos, pred: w, expected: a, found: args.len() })
                        }
                        Some(a) => a,
                        None => {
                            self.sig.declare(&w, args.len());
                            args.len()
                        }
                    };
                    Ok(Formula::Atom(PredSym::new(&w, arity), args))
                }
                Tok::Eq => {
                    self.bump();
                    let rpos = self.pos();
                    match self.bump() {
                        Tok::Ident(r) if RESERVED.contains(&r.as_str()) => {
                            Err(SyntaxError::Reserved { pos: rpos, word: r })
                        }
                        Tok::Ident(r) => {
                            let args = vec![self.term(&w), self.term(&r)];
                            Ok(Formula::Atom(PredSym::equality(), args))
                        }
                        _ => {
                            self.at -= 1;
                            self.fail("a name or variable")
                        }
                    }
                }
                _ => self.fail("`(` or `=`"),
            },
            _ => {
                self.at -= 1;
                self.fail("a formula")
            }
        }
    }
}

/// Parses a formula, inferring predicate arities at first use.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    parse_formula_with(text, &mut Signature::new())
}

/// Parses a formula against (and extending) `sig`.
pub fn parse_formula_with(text: &str, sig: &mut Signature) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut snapshot = sig.clone();
    let mut p = Parser { toks, at: 0, sig: &mut snapshot, bound: Vec::new() };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.fail("end of input");
    }
    *sig = snapshot;
    Ok(f)
}

/// Ordered duplicate-free list of free names.
pub fn free_names(f: &Formula) -> Vec<Name> {
    f.free_names()
}

/// Renders a formula in the concrete syntax. Bound variables are renamed
/// where they would clash with a name or fail to lex.
pub fn render_formula(f: &Formula) -> String {
    let mut avoid: BTreeSet<String> = f.free_names().iter().map(|n| n.as_str().to_string()).collect();
    avoid.extend(RESERVED.iter().map(|s| s.to_string()));
    let mut r = Renderer { avoid, scope: Vec::new(), next: 1 };
    let mut out = String::new();
    r.go(f, 0, true, &mut out);
    out
}

struct Renderer {
    avoid: BTreeSet<String>,
    /// (source variable, printed variable), innermost last.
    scope: Vec<(Arc<str>, String)>,
    next: usize,
}

const PREC_IMPL: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_NEG: u8 = 4;

impl Renderer {
    fn var_name(&mut self, v: &str) -> String {
        let printed_outer = |s: &str, scope: &[(Arc<str>, String)]| scope.iter().any(|(_, p)| p == s);
        if is_ident(v) && !self.avoid.contains(v) && !printed_outer(v, &self.scope) {
            return v.to_string();
        }
        loop {
            let cand = format!("x{}", self.next);
            self.next += 1;
            if !self.avoid.contains(&cand) && !printed_outer(&cand, &self.scope) {
                return cand;
            }
        }
    }

    fn term(&self, t: &Term) -> String {
        match t {
            Term::Name(n) => n.as_str().to_string(),
            Term::Var(v) => match self.scope.iter().rev().find(|(s, _)| s == v) {
                Some((_, p)) => p.clone(),
                None => v.to_string(),
            },
        }
    }

    /// `min` is the weakest binding the context accepts without parentheses;
    /// `tail` says nothing follows within the current group.
    fn go(&mut self, f: &Formula, min: u8, tail: bool, out: &mut String) {
        let (prec, quantified) = match f {
            Formula::Implies(..) => (PREC_IMPL, false),
            Formula::Or(..) => (PREC_OR, false),
            Formula::And(..) => (PREC_AND, false),
            Formula::Quant(..) => (0, true),
            _ => (PREC_NEG, false),
        };
        let paren = if quantified { !tail } else { prec < min };
        if paren {
            out.push('(');
        }
        let tail = tail || paren;
        match f {
            Formula::Atom(p, args) if p.is_equality() => {
                out.push_str(&self.term(&args[0]));
                out.push_str(" = ");
                out.push_str(&self.term(&args[1]));
            }
            Formula::Atom(p, args) => {
                out.push_str(p.name());
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&self.term(a));
                }
                out.push(')');
            }
            Formula::Falsum => out.push_str("false"),
            Formula::Not(g) => {
                out.push('~');
                self.go(g, PREC_NEG, tail, out);
            }
            Formula::And(a, b) => {
                self.go(a, PREC_AND, false, out);
                out.push_str(" & ");
                self.go(b, PREC_NEG, tail, out);
            }
            Formula::Or(a, b) => {
                self.go(a, PREC_OR, false, out);
                out.push_str(" | ");
                self.go(b, PREC_AND, tail, out);
            }
            Formula::Implies(a, b) => {
                self.go(a, PREC_OR, false, out);
                out.push_str(" -> ");
                self.go(b, PREC_IMPL, tail, out);
            }
            Formula::Quant(q, v, body) => {
                let printed = self.var_name(v);
                out.push_str(match q {
                    Quantifier::Exists => "exists ",
                    Quantifier::Forall => "forall ",
                });
                out.push_str(&printed);
                out.push_str(". ");
                self.scope.push((v.clone(), printed));
                self.go(body, 0, true, out);
                self.scope.pop();
            }
        }
        if paren {
            out.push(')');
        }
    }
}
