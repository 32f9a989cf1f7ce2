//! First-order formulas without function symbols.
//!
//! Names mark free places; variables mark bound places. A variable term
//! refers to the innermost enclosing quantifier binding the same text.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::name::{Name, PredSym};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Name(Name),
    Var(Arc<str>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(PredSym, Vec<Term>),
    Falsum,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Quant(Quantifier, Arc<str>, Box<Formula>),
}

impl Formula {
    pub fn atom(pred: PredSym, args: impl IntoIterator<Item = Name>) -> Formula {
        Formula::Atom(pred, args.into_iter().map(Term::Name).collect())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Quant(Quantifier::Exists, Arc::from(var), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Quant(Quantifier::Forall, Arc::from(var), Box::new(body))
    }

    /// Ordered, duplicate-free list of the names occurring in the formula.
    pub fn free_names(&self) -> Vec<Name> {
        let mut acc = BTreeSet::new();
        self.collect_names(&mut acc);
        acc.into_iter().collect()
    }

    fn collect_names(&self, acc: &mut BTreeSet<Name>) {
        match self {
            Formula::Atom(_, args) => {
                for t in args {
                    if let Term::Name(n) = t {
                        acc.insert(n.clone());
                    }
                }
            }
            Formula::Falsum => {}
            Formula::Not(f) | Formula::Quant(_, _, f) => f.collect_names(acc),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_names(acc);
                b.collect_names(acc);
            }
        }
    }

    /// Predicate symbols occurring in the formula (equality included).
    pub fn predicates(&self, acc: &mut BTreeSet<PredSym>) {
        match self {
            Formula::Atom(p, _) => {
                acc.insert(p.clone());
            }
            Formula::Falsum => {}
            Formula::Not(f) | Formula::Quant(_, _, f) => f.predicates(acc),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.predicates(acc);
                b.predicates(acc);
            }
        }
    }

    /// Replaces the free occurrences of variable `var` by `name`.
    pub fn instantiate(&self, var: &str, name: &Name) -> Formula {
        match self {
            Formula::Atom(p, args) => Formula::Atom(
                p.clone(),
                args.iter()
                    .map(|t| match t {
                        Term::Var(v) if &**v == var => Term::Name(name.clone()),
                        other => other.clone(),
                    })
                    .collect(),
            ),
            Formula::Falsum => Formula::Falsum,
            Formula::Not(f) => Formula::not(f.instantiate(var, name)),
            Formula::And(a, b) => Formula::and(a.instantiate(var, name), b.instantiate(var, name)),
            Formula::Or(a, b) => Formula::or(a.instantiate(var, name), b.instantiate(var, name)),
            Formula::Implies(a, b) => Formula::implies(a.instantiate(var, name), b.instantiate(var, name)),
            Formula::Quant(q, v, body) if &**v == var => Formula::Quant(*q, v.clone(), body.clone()),
            Formula::Quant(q, v, body) => Formula::Quant(*q, v.clone(), Box::new(body.instantiate(var, name))),
        }
    }

    /// Replaces names by names (simultaneously).
    pub fn rename_names(&self, map: &dyn Fn(&Name) -> Name) -> Formula {
        match self {
            Formula::Atom(p, args) => Formula::Atom(
                p.clone(),
                args.iter()
                    .map(|t| match t {
                        Term::Name(n) => Term::Name(map(n)),
                        other => other.clone(),
                    })
                    .collect(),
            ),
            Formula::Falsum => Formula::Falsum,
            Formula::Not(f) => Formula::not(f.rename_names(map)),
            Formula::And(a, b) => Formula::and(a.rename_names(map), b.rename_names(map)),
            Formula::Or(a, b) => Formula::or(a.rename_names(map), b.rename_names(map)),
            Formula::Implies(a, b) => Formula::implies(a.rename_names(map), b.rename_names(map)),
            Formula::Quant(q, v, body) => Formula::Quant(*q, v.clone(), Box::new(body.rename_names(map))),
        }
    }

    /// Variables occurring free (should be empty for a well-formed formula).
    pub fn free_vars(&self) -> BTreeSet<Arc<str>> {
        fn go(f: &Formula, bound: &mut Vec<Arc<str>>, acc: &mut BTreeSet<Arc<str>>) {
            match f {
                Formula::Atom(_, args) => {
                    for t in args {
                        if let Term::Var(v) = t {
                            if !bound.contains(v) {
                                acc.insert(v.clone());
                            }
                        }
                    }
                }
                Formula::Falsum => {}
                Formula::Not(g) => go(g, bound, acc),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound, acc);
                    go(b, bound, acc);
                }
                Formula::Quant(_, v, body) => {
                    bound.push(v.clone());
                    go(body, bound, acc);
                    bound.pop();
                }
            }
        }
        let mut acc = BTreeSet::new();
        go(self, &mut Vec::new(), &mut acc);
        acc
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(..) | Formula::Falsum => 1,
            Formula::Not(f) | Formula::Quant(_, _, f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn go(a: &Formula, b: &Formula, sa: &mut Vec<Arc<str>>, sb: &mut Vec<Arc<str>>) -> bool {
            let index = |scope: &Vec<Arc<str>>, v: &Arc<str>| scope.iter().rposition(|x| x == v);
            match (a, b) {
                (Formula::Atom(p, xs), Formula::Atom(q, ys)) => {
                    p == q
                        && xs.len() == ys.len()
                        && xs.iter().zip(ys).all(|(x, y)| match (x, y) {
                            (Term::Name(m), Term::Name(n)) => m == n,
                            (Term::Var(v), Term::Var(w)) => {
                                let (i, j) = (index(sa, v), index(sb, w));
                                match (i, j) {
                                    (Some(i), Some(j)) => sa.len() - i == sb.len() - j,
                                    (None, None) => v == w,
                                    _ => false,
                                }
                            }
                            _ => false,
                        })
                }
                (Formula::Falsum, Formula::Falsum) => true,
                (Formula::Not(x), Formula::Not(y)) => go(x, y, sa, sb),
                (Formula::And(a1, a2), Formula::And(b1, b2))
                | (Formula::Or(a1, a2), Formula::Or(b1, b2))
                | (Formula::Implies(a1, a2), Formula::Implies(b1, b2)) => go(a1, b1, sa, sb) && go(a2, b2, sa, sb),
                (Formula::Quant(q1, v, x), Formula::Quant(q2, w, y)) if q1 == q2 => {
                    sa.push(v.clone());
                    sb.push(w.clone());
                    let r = go(x, y, sa, sb);
                    sa.pop();
                    sb.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new(), &mut Vec::new())
    }
}
