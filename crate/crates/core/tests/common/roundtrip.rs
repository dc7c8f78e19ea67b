//! Random syntax trees and the parse/print round-trip check.

use chf_advisor::model::{Atom, Builtin, BodyElement, CmpOp, Literal, PredicateKey, Program, Rule, Term};
use chf_advisor::parser::{parse_program, print_program};
use chf_advisor::patterns::{Choice, PatternDecl};
use rand::seq::SliceRandom;
use rand::Rng;

const NAMES: &[&str] = &["p", "q", "r", "history", "contraindication", "a_1", "x9"];
const CONSTS: &[&str] = &["a", "b", "class_1", "ace_inhibitors", "mi", "zz"];
const VARS: &[&str] = &["X", "Y", "Data", "_Tmp", "T2"];
const OPS: &[CmpOp] = &[CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne];

fn number<R: Rng>(rng: &mut R) -> Term {
    let text = match rng.gen_range(0..3) {
        0 => format!("{}", rng.gen_range(0..1000)),
        1 => format!("-{}", rng.gen_range(1..100)),
        _ => format!("{}.{}", rng.gen_range(0..10), rng.gen_range(1..100)),
    };
    Term::num(&text)
}

fn term<R: Rng>(rng: &mut R) -> Term {
    match rng.gen_range(0..3) {
        0 => Term::constant(CONSTS.choose(rng).unwrap()),
        1 => Term::var(VARS.choose(rng).unwrap()),
        _ => number(rng),
    }
}

fn literal<R: Rng>(rng: &mut R) -> Literal {
    let arity = rng.gen_range(0..=3);
    let atom = Atom::new(NAMES.choose(rng).unwrap(), (0..arity).map(|_| term(rng)).collect());
    if rng.gen_bool(0.2) {
        Literal::neg(atom)
    } else {
        Literal::pos(atom)
    }
}

fn element<R: Rng>(rng: &mut R) -> BodyElement {
    match rng.gen_range(0..10) {
        0..=4 => BodyElement::Pos(literal(rng)),
        5..=7 => BodyElement::Naf(literal(rng)),
        _ => BodyElement::Builtin(Builtin { lhs: term(rng), op: *OPS.choose(rng).unwrap(), rhs: term(rng) }),
    }
}

fn elements<R: Rng>(rng: &mut R, min: usize, max: usize) -> Vec<BodyElement> {
    (0..rng.gen_range(min..=max)).map(|_| element(rng)).collect()
}

fn choice<R: Rng>(rng: &mut R) -> Choice {
    Choice::new(CONSTS.choose(rng).unwrap(), ["class_1", "class_2a", "class_3"].choose(rng).unwrap())
}

/// Two choices naming different treatments.
fn two_choices<R: Rng>(rng: &mut R) -> (Choice, Choice) {
    let a = choice(rng);
    loop {
        let b = choice(rng);
        if b.name != a.name {
            return (a, b);
        }
    }
}

/// Well-formed declarations only: the parser rejects the rest.
fn pattern<R: Rng>(rng: &mut R) -> PatternDecl {
    let dangers = |rng: &mut R| (0..rng.gen_range(1..=3)).map(|_| elements(rng, 1, 2)).collect();
    match rng.gen_range(0..7) {
        0 => PatternDecl::Aggressive { choice: choice(rng), pre: elements(rng, 0, 3), dangers: dangers(rng) },
        1 => PatternDecl::Conservative {
            choice: choice(rng),
            pre: elements(rng, 0, 3),
            dangers: (0..rng.gen_range(1..=3)).map(|_| vec![BodyElement::Pos(literal(rng))]).collect(),
        },
        2 => PatternDecl::Anti { choice: Term::constant(CONSTS.choose(rng).unwrap()), dangers: dangers(rng) },
        3 => {
            let (first, second) = two_choices(rng);
            PatternDecl::Prefer { first, second, pre: elements(rng, 0, 3) }
        }
        4 => {
            let (trigger, with) = two_choices(rng);
            PatternDecl::Concomitant { trigger, with, pre: elements(rng, 0, 3) }
        }
        5 => {
            let (trigger, needs) = two_choices(rng);
            PatternDecl::Indispensable { trigger, needs, pre: elements(rng, 0, 3) }
        }
        _ => PatternDecl::Incompatible {
            choices: {
                let n = rng.gen_range(2..=4);
                CONSTS.choose_multiple(rng, n).map(|c| Term::constant(c)).collect()
            },
            class: Term::constant("class_1"),
            pre: elements(rng, 0, 2),
        },
    }
}

pub fn random_ast<R: Rng>(rng: &mut R) -> Program {
    let mut p = Program::default();
    for _ in 0..rng.gen_range(0..3) {
        // directives are a set; repeats collapse on parse
        p.add_abducible(PredicateKey::new(NAMES.choose(rng).unwrap(), rng.gen_range(0..3)));
    }
    for _ in 0..rng.gen_range(0..3) {
        p.patterns.push(pattern(rng));
    }
    for _ in 0..rng.gen_range(1..8) {
        let head = (!rng.gen_bool(0.15)).then(|| literal(rng));
        let min = usize::from(head.is_none());
        p.rules.push(Rule { head, body: elements(rng, min, 4) });
    }
    p
}

/// parse(print(p)) == p, and printing is stable from then on.
pub fn roundtrip(p: &Program) -> Result<(), String> {
    let text = print_program(p);
    let back = parse_program(&text).map_err(|e| format!("reparse failed: {e}\n{text}"))?;
    if &back != p {
        return Err(format!("round trip changed the program:\n{text}---\n{}", print_program(&back)));
    }
    if print_program(&back) != text {
        return Err(format!("printing is not stable:\n{text}"));
    }
    Ok(())
}

/// Source text -> AST -> text -> AST gives the same AST.
pub fn roundtrip_source(name: &str, src: &str) -> Result<(), String> {
    let p = parse_program(src).map_err(|e| format!("{name}:{e}"))?;
    roundtrip(&p).map_err(|e| format!("{name}: {e}"))
}
