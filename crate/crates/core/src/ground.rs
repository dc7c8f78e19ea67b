//! Instantiation of rule variables and evaluation of comparison builtins.
//!
//! Variables are only instantiated with tuples that can actually occur: a
//! fixpoint over positive bodies (ignoring negation) gives the set of literals
//! that are possibly derivable, and positive body literals are joined against
//! it. Any instance left out this way has a positive body literal that no
//! stable model can contain, so dropping it never changes the models.
//! Rules that are already ground are kept verbatim.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::model::{apply_binding, Binding, BodyElement, Builtin, Literal, PredicateKey, Program, Rule, Term};
use crate::patterns::{expand_all, MalformedPattern};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroundError {
    #[error("unsafe rule `{rule}`: variable(s) {} occur in no positive body literal", .vars.join(", "))]
    Unsafe { rule: String, vars: Vec<String> },
    #[error("rule `{rule}` compares non-numbers in `{builtin}`")]
    NonNumericComparison { rule: String, builtin: String },
    #[error(transparent)]
    Pattern(#[from] MalformedPattern),
}

/// A variable-free program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundProgram {
    pub rules: Vec<Rule>,
    /// Every literal mentioned by `rules`; `a` and `-a` count separately.
    pub atom_universe: BTreeSet<Literal>,
    pub warnings: Vec<String>,
}

impl GroundProgram {
    /// Builds a ground program from rules that are already variable-free
    /// and builtin-free, e.g. ones produced by a test generator.
    pub fn from_ground_rules(rules: Vec<Rule>) -> GroundProgram {
        let atom_universe = universe_of(&rules);
        GroundProgram { rules, atom_universe, warnings: Vec::new() }
    }
}

pub fn universe_of(rules: &[Rule]) -> BTreeSet<Literal> {
    rules.iter().flat_map(Rule::literals).cloned().collect()
}

enum BuiltinOutcome {
    True,
    False,
    NonNumeric,
}

fn eval_builtin(b: &Builtin, binding: &Binding) -> BuiltinOutcome {
    let resolve = |t: &Term| match t {
        Term::Var(v) => binding.get(v).and_then(Term::as_number),
        other => other.as_number(),
    };
    match (resolve(&b.lhs), resolve(&b.rhs)) {
        (Some(l), Some(r)) if b.op.eval(l, r) => BuiltinOutcome::True,
        (Some(_), Some(_)) => BuiltinOutcome::False,
        _ => BuiltinOutcome::NonNumeric,
    }
}

/// Index of ground literals by (predicate, arity, strong negation).
#[derive(Default)]
struct Index {
    by_key: HashMap<(PredicateKey, bool), Vec<Literal>>,
    all: HashSet<Literal>,
}

impl Index {
    fn insert(&mut self, l: Literal) -> bool {
        if self.all.insert(l.clone()) {
            self.by_key.entry((l.atom.key(), l.strong_neg)).or_default().push(l);
            true
        } else {
            false
        }
    }

    fn candidates(&self, l: &Literal) -> &[Literal] {
        self.by_key.get(&(l.atom.key(), l.strong_neg)).map_or(&[], Vec::as_slice)
    }
}

/// Extends `binding` so that `pattern` matches `ground`.
fn unify(pattern: &Literal, ground: &Literal, binding: &Binding) -> Option<Binding> {
    let mut b = binding.clone();
    for (p, g) in pattern.atom.args.iter().zip(&ground.atom.args) {
        match p {
            Term::Var(v) => match b.get(v) {
                Some(t) if t != g => return None,
                Some(_) => {}
                None => {
                    b.insert(v.clone(), g.clone());
                }
            },
            t if t != g => return None,
            _ => {}
        }
    }
    Some(b)
}

/// All bindings of the rule's positive body literals against `index`
/// that also satisfy its builtins. Also returns how many join results there
/// were before the builtins filtered them.
fn bindings(rule: &Rule, index: &Index) -> (Vec<Binding>, usize) {
    let positives: Vec<&Literal> = rule
        .body
        .iter()
        .filter_map(|b| match b {
            BodyElement::Pos(l) => Some(l),
            _ => None,
        })
        .collect();
    let mut partial = vec![Binding::new()];
    for lit in positives {
        let mut next = Vec::new();
        for b in &partial {
            for g in index.candidates(lit) {
                if let Some(nb) = unify(lit, g, b) {
                    next.push(nb);
                }
            }
        }
        partial = next;
        if partial.is_empty() {
            break;
        }
    }
    let joined = partial.len();
    let kept = partial
        .into_iter()
        .filter(|b| {
            rule.body.iter().all(|e| match e {
                BodyElement::Builtin(bi) => match eval_builtin(bi, b) {
                    BuiltinOutcome::True => true,
                    // non-numbers never compare; the instance is dropped
                    BuiltinOutcome::False | BuiltinOutcome::NonNumeric => false,
                },
                _ => true,
            })
        })
        .collect();
    (kept, joined)
}

fn strip_builtins(rule: Rule) -> Rule {
    Rule { head: rule.head, body: rule.body.into_iter().filter(|b| !matches!(b, BodyElement::Builtin(_))).collect() }
}

fn has_builtin(rule: &Rule) -> bool {
    rule.body.iter().any(|b| matches!(b, BodyElement::Builtin(_)))
}

/// Expands pattern declarations and grounds the resulting rules.
pub fn ground_program(p: &Program) -> Result<GroundProgram, GroundError> {
    let rules = expand_all(&p.patterns, &p.rules)?;
    ground_rules(&rules)
}

pub fn ground_rules(rules: &[Rule]) -> Result<GroundProgram, GroundError> {
    for r in rules {
        let vars = r.unsafe_variables();
        if !vars.is_empty() {
            return Err(GroundError::Unsafe { rule: r.to_string(), vars: vars.iter().map(|v| v.to_string()).collect() });
        }
    }

    // Ground rules: evaluate builtins once, strictly.
    let mut ground_kept: Vec<Option<Rule>> = Vec::with_capacity(rules.len());
    for r in rules {
        if !r.is_ground() {
            ground_kept.push(None);
            continue;
        }
        let mut keep = true;
        for e in &r.body {
            if let BodyElement::Builtin(b) = e {
                match eval_builtin(b, &Binding::new()) {
                    BuiltinOutcome::True => {}
                    BuiltinOutcome::False => keep = false,
                    BuiltinOutcome::NonNumeric => {
                        return Err(GroundError::NonNumericComparison { rule: r.to_string(), builtin: b.to_string() })
                    }
                }
            }
        }
        ground_kept.push(keep.then(|| strip_builtins(r.clone())));
    }

    // Possibly-derivable literals.
    let mut index = Index::default();
    loop {
        let mut changed = false;
        for (r, g) in rules.iter().zip(&ground_kept) {
            let Some(head) = &r.head else { continue };
            if r.is_ground() {
                let Some(g) = g else { continue };
                let body_ok = g.body.iter().all(|e| match e {
                    BodyElement::Pos(l) => index.all.contains(l),
                    _ => true,
                });
                if body_ok {
                    changed |= index.insert(head.clone());
                }
            } else {
                for b in bindings(r, &index).0 {
                    changed |= index.insert(head.substitute(&b));
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for (r, g) in rules.iter().zip(ground_kept) {
        if r.is_ground() {
            out.extend(g);
            continue;
        }
        let (bs, joined) = bindings(r, &index);
        let bs: BTreeSet<BTreeMap<_, _>> = bs.into_iter().collect();
        if bs.is_empty() && joined > 0 && has_builtin(r) {
            warnings.push(format!("no instance of `{r}` survives its comparisons"));
        }
        for b in bs {
            out.push(strip_builtins(apply_binding(r, &b)));
        }
    }
    let mut seen = HashSet::new();
    out.retain(|r| seen.insert(r.clone()));
    Ok(GroundProgram::from_ground_rules_with_warnings(out, warnings))
}

impl GroundProgram {
    fn from_ground_rules_with_warnings(rules: Vec<Rule>, warnings: Vec<String>) -> GroundProgram {
        GroundProgram { warnings, ..GroundProgram::from_ground_rules(rules) }
    }
}
