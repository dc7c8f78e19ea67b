//! Shared generators for the property tests and the acceptance run.
#![allow(dead_code)]

pub mod patients;
pub mod patterns;
pub mod roundtrip;

use std::collections::BTreeSet;

use chf_advisor::ground::GroundProgram;
use chf_advisor::model::{Atom, BodyElement, Literal, Rule};
use chf_advisor::solver::{PartialAnswerSet, StableModel};
use rand::Rng;

pub struct GenParams {
    pub max_atoms: usize,
    pub max_rules: usize,
    pub naf_prob: f64,
    pub constraint_prob: f64,
    pub strong_neg_prob: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { max_atoms: 12, max_rules: 20, naf_prob: 0.5, constraint_prob: 0.1, strong_neg_prob: 0.1 }
    }
}

fn literal<R: Rng>(rng: &mut R, n: usize, p: &GenParams) -> Literal {
    let atom = Atom::prop(&format!("a{}", rng.gen_range(0..n)));
    if rng.gen_bool(p.strong_neg_prob) {
        Literal::neg(atom)
    } else {
        Literal::pos(atom)
    }
}

/// A random propositional program; the universe never exceeds `max_atoms`
/// literals because strong negation draws from the same atom pool.
pub fn random_program<R: Rng>(rng: &mut R, p: &GenParams) -> GroundProgram {
    loop {
        let n = rng.gen_range(1..=p.max_atoms);
        let nrules = rng.gen_range(1..=p.max_rules);
        let mut rules = Vec::new();
        for _ in 0..nrules {
            let len = rng.gen_range(0..=3);
            let body: Vec<BodyElement> = (0..len)
                .map(|_| {
                    let l = literal(rng, n, p);
                    if rng.gen_bool(p.naf_prob) {
                        BodyElement::Naf(l)
                    } else {
                        BodyElement::Pos(l)
                    }
                })
                .collect();
            if rng.gen_bool(p.constraint_prob) && !body.is_empty() {
                rules.push(Rule::constraint(body));
            } else {
                rules.push(Rule::new(literal(rng, n, p), body));
            }
        }
        let g = GroundProgram::from_ground_rules(rules);
        if g.atom_universe.len() <= p.max_atoms && !g.atom_universe.is_empty() {
            return g;
        }
    }
}

pub fn consistent_with(a: &PartialAnswerSet, m: &BTreeSet<Literal>) -> bool {
    a.positive.is_subset(m) && a.nafs.is_disjoint(m)
}

/// Compares solver answers with oracle models for the query `query`
/// (or `not query` when `positive` is false).
/// Returns a description of the first disagreement.
pub fn compare(
    g: &GroundProgram,
    query: &Literal,
    positive: bool,
    answers: &[PartialAnswerSet],
    models: &BTreeSet<StableModel>,
) -> Result<(), String> {
    for a in answers {
        if !a.positive.is_disjoint(&a.nafs) {
            return Err(format!("answer {a} has a literal both true and false"));
        }
        if a.positive.iter().any(|l| !l.strong_neg && a.positive.contains(&chf_advisor::model::complement(l))) {
            return Err(format!("answer {a} is classically inconsistent"));
        }
        if a.positive.iter().chain(&a.nafs).any(|l| !g.atom_universe.contains(l)) {
            return Err(format!("answer {a} leaves the atom universe"));
        }
        if positive && !a.positive.contains(query) || !positive && a.positive.contains(query) {
            return Err(format!("answer {a} does not contain the query"));
        }
        if !models.iter().any(|m| consistent_with(a, &m.atoms)) {
            return Err(format!("answer {a} matches no stable model"));
        }
    }
    for m in models.iter().filter(|m| m.atoms.contains(query) == positive) {
        if !answers.iter().any(|a| consistent_with(a, &m.atoms)) {
            return Err(format!("model {:?} containing the query has no matching answer", m.atoms));
        }
    }
    Ok(())
}

pub fn program_text(g: &GroundProgram) -> String {
    g.rules.iter().map(|r| format!("{r}\n")).collect()
}
