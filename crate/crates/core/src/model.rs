//! Terms, literals, rules and programs of the rule language.
//!
//! Every value here is immutable once built and cheap to clone: symbols are
//! reference-counted strings, so the same program can be shared across
//! threads without copying.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::number::Decimal;
use crate::patterns::PatternDecl;

pub type Symbol = Arc<str>;

/// Generated atoms use this prefix; user programs may not.
pub const RESERVED_PREFIX: &str = "__";

pub fn sym(s: &str) -> Symbol {
    Arc::from(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(Symbol),
    Num(Decimal),
    Var(Symbol),
}

impl Term {
    pub fn constant(s: &str) -> Term {
        Term::Const(sym(s))
    }

    pub fn var(s: &str) -> Term {
        Term::Var(sym(s))
    }

    pub fn num(s: &str) -> Term {
        Term::Num(s.parse().expect("valid decimal literal"))
    }

    pub fn is_ground(&self) -> bool {
        !matches!(self, Term::Var(_))
    }

    pub fn as_number(&self) -> Option<Decimal> {
        match self {
            Term::Num(n) => Some(*n),
            _ => None,
        }
    }

    fn substitute(&self, binding: &Binding) -> Term {
        match self {
            Term::Var(v) => binding.get(v).cloned().unwrap_or_else(|| self.clone()),
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) | Term::Var(s) => f.write_str(s),
            Term::Num(n) => write!(f, "{n}"),
        }
    }
}

pub type Binding = BTreeMap<Symbol, Term>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Atom {
        Atom { predicate: sym(predicate), args }
    }

    pub fn prop(predicate: &str) -> Atom {
        Atom::new(predicate, Vec::new())
    }

    pub fn key(&self) -> PredicateKey {
        PredicateKey { name: self.predicate.clone(), arity: self.args.len() }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    fn substitute(&self, binding: &Binding) -> Atom {
        Atom { predicate: self.predicate.clone(), args: self.args.iter().map(|t| t.substitute(binding)).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// `name/arity`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct PredicateKey {
    pub name: Symbol,
    pub arity: usize,
}

impl PredicateKey {
    pub fn new(name: &str, arity: usize) -> Self {
        PredicateKey { name: sym(name), arity }
    }
}

impl fmt::Display for PredicateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// An atom, optionally under classical negation (`-p`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub strong_neg: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal { atom, strong_neg: false }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal { atom, strong_neg: true }
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }

    pub fn substitute(&self, binding: &Binding) -> Literal {
        Literal { atom: self.atom.substitute(binding), strong_neg: self.strong_neg }
    }
}

/// Flips classical negation; the atom is untouched.
pub fn complement(l: &Literal) -> Literal {
    Literal { atom: l.atom.clone(), strong_neg: !l.strong_neg }
}

/// Literals serialize as their source text, e.g. `"history(mi, recent)"`.
impl serde::Serialize for Literal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.strong_neg {
            f.write_str("-")?;
        }
        write!(f, "{}", self.atom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    pub fn eval(self, lhs: Decimal, rhs: Decimal) -> bool {
        match self {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Builtin {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyElement {
    Pos(Literal),
    Naf(Literal),
    Builtin(Builtin),
}

impl BodyElement {
    pub fn pos(atom: Atom) -> BodyElement {
        BodyElement::Pos(Literal::pos(atom))
    }

    pub fn naf(atom: Atom) -> BodyElement {
        BodyElement::Naf(Literal::pos(atom))
    }

    pub fn literal(&self) -> Option<&Literal> {
        match self {
            BodyElement::Pos(l) | BodyElement::Naf(l) => Some(l),
            BodyElement::Builtin(_) => None,
        }
    }

    pub fn terms(&self) -> Box<dyn Iterator<Item = &Term> + '_> {
        match self {
            BodyElement::Pos(l) | BodyElement::Naf(l) => Box::new(l.atom.args.iter()),
            BodyElement::Builtin(b) => Box::new([&b.lhs, &b.rhs].into_iter()),
        }
    }

    fn substitute(&self, binding: &Binding) -> BodyElement {
        match self {
            BodyElement::Pos(l) => BodyElement::Pos(l.substitute(binding)),
            BodyElement::Naf(l) => BodyElement::Naf(l.substitute(binding)),
            BodyElement::Builtin(b) => BodyElement::Builtin(Builtin {
                lhs: b.lhs.substitute(binding),
                op: b.op,
                rhs: b.rhs.substitute(binding),
            }),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.as_str(), self.rhs)
    }
}

impl fmt::Display for BodyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyElement::Pos(l) => write!(f, "{l}"),
            BodyElement::Naf(l) => write!(f, "not {l}"),
            BodyElement::Builtin(b) => write!(f, "{b}"),
        }
    }
}

/// A rule; a missing head makes it a constraint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Option<Literal>,
    pub body: Vec<BodyElement>,
}

impl Rule {
    pub fn fact(head: Literal) -> Rule {
        Rule { head: Some(head), body: Vec::new() }
    }

    pub fn new(head: Literal, body: Vec<BodyElement>) -> Rule {
        Rule { head: Some(head), body }
    }

    pub fn constraint(body: Vec<BodyElement>) -> Rule {
        Rule { head: None, body }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.head.as_ref().is_none_or(Literal::is_ground) && self.body.iter().all(|b| b.terms().all(Term::is_ground))
    }

    /// Variables in order of first occurrence (head first, then body).
    pub fn variables(&self) -> Vec<Symbol> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let head_terms = self.head.iter().flat_map(|h| h.atom.args.iter());
        for t in head_terms.chain(self.body.iter().flat_map(|b| b.terms())) {
            if let Term::Var(v) = t {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    /// Variables that occur in the head, a naf element or a builtin but in no
    /// positive body literal.
    pub fn unsafe_variables(&self) -> Vec<Symbol> {
        let bound: BTreeSet<&Symbol> = self
            .body
            .iter()
            .filter_map(|b| match b {
                BodyElement::Pos(l) => Some(l),
                _ => None,
            })
            .flat_map(|l| l.atom.args.iter())
            .filter_map(|t| match t {
                Term::Var(v) => Some(v),
                _ => None,
            })
            .collect();
        self.variables().into_iter().filter(|v| !bound.contains(v)).collect()
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.head.iter().chain(self.body.iter().filter_map(BodyElement::literal))
    }
}

/// Replaces every bound variable; unbound variables stay as they are.
pub fn apply_binding(rule: &Rule, binding: &Binding) -> Rule {
    Rule {
        head: rule.head.as_ref().map(|h| h.substitute(binding)),
        body: rule.body.iter().map(|b| b.substitute(binding)).collect(),
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(h) = &self.head {
            write!(f, "{h}")?;
            if self.body.is_empty() {
                return f.write_str(".");
            }
            f.write_str(" ")?;
        }
        f.write_str(":- ")?;
        for (i, b) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub abducibles: Vec<PredicateKey>,
    pub patterns: Vec<PatternDecl>,
}

impl Program {
    pub fn from_rules(rules: Vec<Rule>) -> Program {
        Program { rules, ..Program::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.abducibles.is_empty() && self.patterns.is_empty()
    }

    pub fn add_abducible(&mut self, key: PredicateKey) {
        if !self.abducibles.contains(&key) {
            self.abducibles.push(key);
        }
    }

    pub fn extend(&mut self, other: Program) {
        self.rules.extend(other.rules);
        for a in other.abducibles {
            self.add_abducible(a);
        }
        self.patterns.extend(other.patterns);
    }

    /// First literal whose predicate uses the reserved prefix, if any.
    pub fn reserved_collision(&self) -> Option<&Literal> {
        self.rules.iter().flat_map(Rule::literals).find(|l| l.atom.predicate.starts_with(RESERVED_PREFIX))
    }
}
