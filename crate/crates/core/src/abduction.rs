//! Abductive query answering: abducible atoms may be assumed true or false.
//!
//! Each ground abducible atom `a` gets an even loop with a hidden twin,
//! `a :- not __neg_a.` and `__neg_a :- not a.`, so the solver is free to
//! pick either side. Which side it picked is read back off the twin.

use std::collections::{BTreeMap, BTreeSet};

use crate::ground::{ground_program, GroundError};
use crate::patterns::expand_all;
use crate::model::{sym, Atom, Binding, BodyElement, Literal, PredicateKey, Program, Rule, Symbol, Term};
use crate::parser::Query;
use crate::solver::{solve, solve_witnessed, Compiled, PartialAnswerSet, SolveError, SolveOptions, Witnessed};

pub const NEG_PREFIX: &str = "__neg_";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AbductionError {
    #[error("`{0}` uses the reserved `__` prefix")]
    ReservedPrefixCollision(String),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Assumptions {
    /// Abducibles assumed true, sorted.
    pub positive: Vec<Literal>,
    /// Abducibles assumed false, sorted.
    pub negative: Vec<Literal>,
}

impl Assumptions {
    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbductiveResult {
    pub answer: PartialAnswerSet,
    pub assumptions: Assumptions,
}

/// The hidden twin of an abducible literal.
pub fn twin(l: &Literal) -> Literal {
    let strong = if l.strong_neg { "n_" } else { "" };
    Literal::pos(Atom { predicate: sym(&format!("{NEG_PREFIX}{strong}{}", l.atom.predicate)), args: l.atom.args.clone() })
}

fn is_twin(l: &Literal) -> bool {
    l.atom.predicate.starts_with(NEG_PREFIX)
}

/// Ground instances of the abducible predicates: every ground occurrence in
/// the program, plus non-ground occurrences instantiated over the constants
/// seen at each argument position of that predicate.
/// Pattern declarations count as their expansion.
pub fn abducible_instances(p: &Program) -> Result<Vec<Literal>, AbductionError> {
    let keys: BTreeSet<&PredicateKey> = p.abducibles.iter().collect();
    let rules = expand_all(&p.patterns, &p.rules).map_err(GroundError::from)?;
    let occurrences: Vec<&Literal> = rules
        .iter()
        .flat_map(Rule::literals)
        .filter(|l| keys.contains(&l.atom.key()))
        .collect();
    // argument-position domains
    let mut domains: BTreeMap<(PredicateKey, usize), BTreeSet<Term>> = BTreeMap::new();
    for l in &occurrences {
        for (i, t) in l.atom.args.iter().enumerate() {
            if t.is_ground() {
                domains.entry((l.atom.key(), i)).or_default().insert(t.clone());
            }
        }
    }
    let mut out = BTreeSet::new();
    for l in occurrences {
        let vars: Vec<(usize, Symbol)> = l
            .atom
            .args
            .iter()
            .enumerate()
            .filter_map(|(i, t)| match t {
                Term::Var(v) => Some((i, v.clone())),
                _ => None,
            })
            .collect();
        let mut bindings = vec![Binding::new()];
        for (i, v) in vars {
            let dom = domains.get(&(l.atom.key(), i)).cloned().unwrap_or_default();
            let v = &v;
            bindings = bindings
                .into_iter()
                .flat_map(|b| {
                    dom.iter().filter_map(move |t| match b.get(v) {
                        Some(bound) if bound != t => None,
                        Some(_) => Some(b.clone()),
                        None => {
                            let mut nb = b.clone();
                            nb.insert(v.clone(), t.clone());
                            Some(nb)
                        }
                    }).collect::<Vec<_>>()
                })
                .collect();
        }
        for b in bindings {
            out.insert(l.substitute(&b));
        }
    }
    Ok(out.into_iter().collect())
}

/// Adds the even-loop pair for every abducible instance that is not already
/// a fact. Programs without abducibles are returned unchanged.
pub fn transform_abducibles(p: &Program) -> Result<Program, AbductionError> {
    if let Some(l) = p.reserved_collision() {
        return Err(AbductionError::ReservedPrefixCollision(l.to_string()));
    }
    let facts: BTreeSet<&Literal> = p.rules.iter().filter(|r| r.is_fact()).filter_map(|r| r.head.as_ref()).collect();
    let mut out = p.clone();
    for a in abducible_instances(p)? {
        if facts.contains(&a) {
            continue;
        }
        let t = twin(&a);
        out.rules.push(Rule::new(a.clone(), vec![BodyElement::Naf(t.clone())]));
        out.rules.push(Rule::new(t, vec![BodyElement::Naf(a)]));
    }
    Ok(out)
}

/// Splits a raw answer over the transformed program into the reported
/// answer (twins removed) and the assumptions read off `choices`: an
/// abducible is assumed true when `choices` refuted its twin. Assuming `a`
/// false only counts when the justification relies on it and the original
/// program could derive `a` at all.
fn extract(
    raw: &PartialAnswerSet,
    choices: &PartialAnswerSet,
    abducibles: &BTreeSet<Literal>,
    derivable: &BTreeSet<&Literal>,
) -> AbductiveResult {
    let mut assumptions = Assumptions::default();
    let mut positive: BTreeSet<Literal> = raw.positive.iter().filter(|l| !is_twin(l)).cloned().collect();
    for a in abducibles {
        let t = twin(a);
        if choices.nafs.contains(&t) {
            assumptions.positive.push(a.clone());
            positive.insert(a.clone());
        } else if raw.positive.contains(&t) && derivable.contains(a) {
            assumptions.negative.push(a.clone());
        }
    }
    let answer = PartialAnswerSet {
        bindings: raw.bindings.clone(),
        positive,
        nafs: raw.nafs.iter().filter(|l| !is_twin(l)).cloned().collect(),
    };
    AbductiveResult { answer, assumptions }
}

/// Whether the original program plus the positive assumptions as facts has
/// a stable model agreeing with the answer.
fn sufficient(p: &Program, r: &AbductiveResult, opts: &SolveOptions) -> Result<bool, AbductionError> {
    let mut with = p.clone();
    with.abducibles.clear();
    with.rules.extend(r.assumptions.positive.iter().cloned().map(Rule::fact));
    let goals = r
        .answer
        .positive
        .iter()
        .cloned()
        .map(BodyElement::Pos)
        .chain(r.answer.nafs.iter().cloned().map(BodyElement::Naf))
        .collect();
    let g = ground_program(&with)?;
    let found = solve(&g, &Query { goals }, &SolveOptions { limit: Some(1), first_per_binding: false, ..*opts })?;
    Ok(!found.is_empty())
}

pub fn abduce(p: &Program, q: &Query, opts: &SolveOptions) -> Result<Vec<AbductiveResult>, AbductionError> {
    let transformed = transform_abducibles(p)?;
    let g = ground_program(&transformed)?;
    let original = ground_program(p)?;
    let derivable: BTreeSet<&Literal> = original.rules.iter().filter_map(|r| r.head.as_ref()).collect();
    let abducibles: BTreeSet<Literal> = abducible_instances(p)?.into_iter().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for Witnessed { answer, witness } in solve_witnessed(&Compiled::new(&g), q, &SolveOptions { limit: None, ..*opts })? {
        // The justification's own choices usually explain the answer. When
        // they do not, the consistency checks needed more, and the witness
        // records what.
        let lean = extract(&answer, &answer, &abducibles, &derivable);
        let r = if sufficient(p, &lean, opts)? { lean } else { extract(&answer, &witness, &abducibles, &derivable) };
        // distinct twin choices can collapse to the same reported answer
        if seen.insert((r.answer.clone(), r.assumptions.positive.clone(), r.assumptions.negative.clone())) {
            out.push(r);
            if opts.limit.is_some_and(|l| out.len() >= l) {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_program, parse_query};

    fn run(src: &str, q: &str) -> Vec<AbductiveResult> {
        abduce(&parse_program(src).unwrap(), &parse_query(q).unwrap(), &SolveOptions::unlimited()).unwrap()
    }

    #[test]
    fn pair_for_propositional_abducible() {
        let p = transform_abducibles(&parse_program("#abducible a/0.\nq :- a.").unwrap()).unwrap();
        let text: Vec<String> = p.rules.iter().map(ToString::to_string).collect();
        assert_eq!(text, ["q :- a.", "a :- not __neg_a.", "__neg_a :- not a."]);
    }

    #[test]
    fn identity_without_abducibles() {
        let p = parse_program("q :- a.\na.").unwrap();
        assert_eq!(transform_abducibles(&p).unwrap(), p);
    }

    #[test]
    fn instances_from_occurrences() {
        let p = parse_program(
            "#abducible history/1.\nc(x) :- not history(standard_neurohormonal_antagonist_therapy).\nh :- history(mi, recent).",
        )
        .unwrap();
        let inst: Vec<String> = abducible_instances(&p).unwrap().iter().map(ToString::to_string).collect();
        assert_eq!(inst, ["history(standard_neurohormonal_antagonist_therapy)"]);
    }

    #[test]
    fn variables_range_over_position_domain() {
        let p = parse_program("#abducible h/1.\nh(a).\ng(X) :- h(X), k(X).\nk(b).").unwrap();
        let inst: Vec<String> = abducible_instances(&p).unwrap().iter().map(ToString::to_string).collect();
        assert_eq!(inst, ["h(a)"]);
    }

    #[test]
    fn only_explanation() {
        let r = run("#abducible a/0.\nq :- a.", "?- q.");
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].assumptions.positive, vec![Literal::pos(Atom::prop("a"))]);
        assert!(r[0].assumptions.negative.is_empty());
        assert_eq!(r[0].answer.to_string(), "{ a, q }");
    }

    #[test]
    fn no_assumption_needed() {
        let r = run("#abducible a/0.\nq.", "?- q.");
        assert!(r[0].assumptions.is_empty());
    }

    #[test]
    fn negative_assumption() {
        let r = run("#abducible b/0.\nq :- not b.\nb :- c.", "?- q.");
        assert_eq!(r[0].assumptions.negative, vec![Literal::pos(Atom::prop("b"))]);
        assert!(r[0].answer.positive.iter().chain(&r[0].answer.nafs).all(|l| !is_twin(l)));
    }

    #[test]
    fn facts_are_not_assumed() {
        let r = run("#abducible a/1.\nq(X) :- a(X).\na(x).\nz :- a(y).", "?- q(X).");
        assert_eq!(r.len(), 2);
        assert!(r[0].assumptions.is_empty());
        assert_eq!(r[1].assumptions.positive, vec![Literal::pos(Atom::new("a", vec![Term::constant("y")]))]);
    }

    #[test]
    fn underivable_absence_is_not_an_assumption() {
        let r = run("#abducible b/0.\nq :- not b.", "?- q.");
        assert_eq!(r.len(), 1);
        assert!(r[0].assumptions.is_empty());
    }

    #[test]
    fn assumption_forced_by_consistency_is_reported() {
        // only assuming r removes the odd loop on o
        let r = run("#abducible r/0.\np.\no :- not o, not r.", "?- p.");
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].assumptions.positive, [Literal::pos(Atom::prop("r"))]);
        assert!(r[0].answer.positive.contains(&Literal::pos(Atom::prop("r"))));
    }

    #[test]
    fn reserved_prefix() {
        let p = Program::from_rules(vec![Rule::fact(Literal::pos(Atom::prop("__neg_x")))]);
        assert!(matches!(transform_abducibles(&p), Err(AbductionError::ReservedPrefixCollision(_))));
    }
}
