//! Knowledge-pattern declarations and their expansion into plain rules.
//!
//! A declaration names one of seven reasoning templates (aggressive,
//! conservative, anti-recommendation, preference, concomitant, indispensable,
//! incompatible) together with the choices and condition lists it applies to.
//! [`expand`] turns one declaration into its stand-alone template rules.
//! [`expand_all`] expands a whole set and wires the cross-pattern guards: a
//! choice that is a concomitant or indispensable trigger, or a member of an
//! incompatible group, gets the matching guard on every rule that recommends
//! it, whichever declaration produced that rule.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{complement, Atom, BodyElement, Literal, Rule, Term};

pub const RECOMMENDATION: &str = "recommendation";
pub const CONTRAINDICATION: &str = "contraindication";
pub const TABOO_CHOICE: &str = "taboo_choice";
pub const SKIP_CONCOMITANT: &str = "skip_concomitant_choice";
pub const ABSENT_INDISPENSABLE: &str = "absent_indispensable_choice";

/// A choice together with the evidence class it is recommended at.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Choice {
    pub name: Term,
    pub class: Term,
}

impl Choice {
    pub fn new(name: &str, class: &str) -> Choice {
        Choice { name: Term::constant(name), class: Term::constant(class) }
    }

    fn recommendation(&self) -> Atom {
        Atom { predicate: RECOMMENDATION.into(), args: vec![self.name.clone(), self.class.clone()] }
    }
}

/// One danger: a conjunction of body elements.
pub type Danger = Vec<BodyElement>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternDecl {
    Aggressive { choice: Choice, pre: Vec<BodyElement>, dangers: Vec<Danger> },
    Conservative { choice: Choice, pre: Vec<BodyElement>, dangers: Vec<Danger> },
    Anti { choice: Term, dangers: Vec<Danger> },
    Prefer { first: Choice, second: Choice, pre: Vec<BodyElement> },
    Concomitant { trigger: Choice, with: Choice, pre: Vec<BodyElement> },
    Indispensable { trigger: Choice, needs: Choice, pre: Vec<BodyElement> },
    Incompatible { choices: Vec<Term>, class: Term, pre: Vec<BodyElement> },
}

impl PatternDecl {
    pub fn kind(&self) -> &'static str {
        match self {
            PatternDecl::Aggressive { .. } => "aggressive",
            PatternDecl::Conservative { .. } => "conservative",
            PatternDecl::Anti { .. } => "anti",
            PatternDecl::Prefer { .. } => "prefer",
            PatternDecl::Concomitant { .. } => "concomitant",
            PatternDecl::Indispensable { .. } => "indispensable",
            PatternDecl::Incompatible { .. } => "incompatible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed {kind} pattern: field `{field}`: {message}")]
pub struct MalformedPattern {
    pub kind: &'static str,
    pub field: &'static str,
    pub message: String,
}

fn unary(pred: &str, name: &Term) -> Atom {
    Atom { predicate: pred.into(), args: vec![name.clone()] }
}

fn contra(name: &Term) -> Atom {
    unary(CONTRAINDICATION, name)
}

fn rule(head: Atom, pre: &[BodyElement], rest: Vec<BodyElement>) -> Rule {
    let mut body = pre.to_vec();
    body.extend(rest);
    Rule::new(Literal::pos(head), body)
}

fn check_name(kind: &'static str, field: &'static str, t: &Term) -> Result<(), MalformedPattern> {
    match t {
        Term::Const(_) => Ok(()),
        other => Err(MalformedPattern { kind, field, message: format!("expected a constant, found `{other}`") }),
    }
}

fn check_choice(kind: &'static str, field: &'static str, c: &Choice) -> Result<(), MalformedPattern> {
    check_name(kind, field, &c.name)?;
    check_name(kind, field, &c.class)
}

fn check_dangers(kind: &'static str, dangers: &[Danger]) -> Result<(), MalformedPattern> {
    if dangers.iter().any(Vec::is_empty) {
        return Err(MalformedPattern { kind, field: "dangers", message: "empty danger".into() });
    }
    Ok(())
}

fn validate(d: &PatternDecl) -> Result<(), MalformedPattern> {
    let kind = d.kind();
    match d {
        PatternDecl::Aggressive { choice, dangers, .. } => {
            check_choice(kind, "choice", choice)?;
            check_dangers(kind, dangers)
        }
        PatternDecl::Conservative { choice, dangers, .. } => {
            check_choice(kind, "choice", choice)?;
            check_dangers(kind, dangers)?;
            for danger in dangers {
                if !matches!(danger.as_slice(), [BodyElement::Pos(_)]) {
                    return Err(MalformedPattern {
                        kind,
                        field: "dangers",
                        message: "each conservative danger must be a single literal".into(),
                    });
                }
            }
            Ok(())
        }
        PatternDecl::Anti { choice, dangers } => {
            check_name(kind, "choice", choice)?;
            check_dangers(kind, dangers)
        }
        PatternDecl::Prefer { first, second, .. } => {
            check_choice(kind, "first", first)?;
            check_choice(kind, "second", second)?;
            if first.name == second.name {
                return Err(MalformedPattern { kind, field: "second", message: "must differ from first".into() });
            }
            Ok(())
        }
        PatternDecl::Concomitant { trigger, with, .. } => {
            check_choice(kind, "trigger", trigger)?;
            check_choice(kind, "with", with)?;
            if trigger.name == with.name {
                return Err(MalformedPattern { kind, field: "with", message: "must differ from trigger".into() });
            }
            Ok(())
        }
        PatternDecl::Indispensable { trigger, needs, .. } => {
            check_choice(kind, "trigger", trigger)?;
            check_choice(kind, "needs", needs)?;
            if trigger.name == needs.name {
                return Err(MalformedPattern { kind, field: "needs", message: "must differ from trigger".into() });
            }
            Ok(())
        }
        PatternDecl::Incompatible { choices, class, .. } => {
            for c in choices {
                check_name(kind, "choices", c)?;
            }
            check_name(kind, "class", class)?;
            let distinct: BTreeSet<&Term> = choices.iter().collect();
            if distinct.len() < 2 || distinct.len() != choices.len() {
                return Err(MalformedPattern {
                    kind,
                    field: "choices",
                    message: "an incompatible group needs at least two distinct choices".into(),
                });
            }
            Ok(())
        }
    }
}

fn trigger_rule(trigger: &Choice, pre: &[BodyElement], guard: &str) -> Rule {
    rule(
        trigger.recommendation(),
        pre,
        vec![BodyElement::naf(contra(&trigger.name)), BodyElement::naf(unary(guard, &trigger.name))],
    )
}

fn helper_rules(d: &PatternDecl) -> Vec<Rule> {
    match d {
        PatternDecl::Concomitant { trigger, with, pre } => vec![
            rule(
                unary(SKIP_CONCOMITANT, &trigger.name),
                pre,
                vec![BodyElement::naf(with.recommendation()), BodyElement::naf(contra(&with.name))],
            ),
            rule(
                with.recommendation(),
                pre,
                vec![BodyElement::pos(trigger.recommendation()), BodyElement::naf(contra(&with.name))],
            ),
        ],
        PatternDecl::Indispensable { trigger, needs, pre } => vec![
            rule(unary(ABSENT_INDISPENSABLE, &trigger.name), pre, vec![BodyElement::naf(needs.recommendation())]),
            rule(
                needs.recommendation(),
                pre,
                vec![BodyElement::pos(trigger.recommendation()), BodyElement::naf(contra(&needs.name))],
            ),
        ],
        _ => Vec::new(),
    }
}

/// Expands a single declaration into its template rules.
pub fn expand(d: &PatternDecl) -> Result<Vec<Rule>, MalformedPattern> {
    validate(d)?;
    let rules = match d {
        PatternDecl::Aggressive { choice, pre, dangers } => {
            let mut out = vec![rule(choice.recommendation(), pre, vec![BodyElement::naf(contra(&choice.name))])];
            out.extend(dangers.iter().map(|danger| rule(contra(&choice.name), danger, Vec::new())));
            out
        }
        PatternDecl::Conservative { choice, pre, dangers } => {
            let mut out = vec![rule(choice.recommendation(), pre, vec![BodyElement::naf(contra(&choice.name))])];
            for danger in dangers {
                if let [BodyElement::Pos(lit)] = danger.as_slice() {
                    out.push(rule(contra(&choice.name), &[], vec![BodyElement::Naf(complement(lit))]));
                }
            }
            out
        }
        PatternDecl::Anti { choice, dangers } => {
            dangers.iter().map(|danger| rule(contra(choice), danger, Vec::new())).collect()
        }
        PatternDecl::Prefer { first, second, pre } => vec![
            rule(first.recommendation(), pre, vec![BodyElement::naf(contra(&first.name))]),
            rule(
                second.recommendation(),
                pre,
                vec![
                    BodyElement::pos(contra(&first.name)),
                    BodyElement::naf(contra(&second.name)),
                    BodyElement::naf(unary(TABOO_CHOICE, &second.name)),
                ],
            ),
        ],
        PatternDecl::Concomitant { trigger, pre, .. } => {
            let mut out = vec![trigger_rule(trigger, pre, SKIP_CONCOMITANT)];
            out.extend(helper_rules(d));
            out
        }
        PatternDecl::Indispensable { trigger, pre, .. } => {
            let mut out = vec![trigger_rule(trigger, pre, ABSENT_INDISPENSABLE)];
            out.extend(helper_rules(d));
            out
        }
        PatternDecl::Incompatible { choices, class, pre } => choices
            .iter()
            .map(|own| {
                let others = choices
                    .iter()
                    .filter(|c| *c != own)
                    .map(|c| BodyElement::pos(Choice { name: c.clone(), class: class.clone() }.recommendation()))
                    .collect();
                rule(unary(TABOO_CHOICE, own), pre, others)
            })
            .collect(),
    };
    Ok(rules)
}

/// Heads `recommendation(name, class)` that a rule produces, if any.
fn recommended(rule: &Rule) -> Option<(&Term, &Term)> {
    let head = rule.head.as_ref()?;
    if head.strong_neg || &*head.atom.predicate != RECOMMENDATION || head.atom.args.len() != 2 {
        return None;
    }
    Some((&head.atom.args[0], &head.atom.args[1]))
}

/// Expands a set of declarations and attaches cross-pattern guards to every
/// recommendation rule, including those in `extra_rules`.
///
/// Concomitant and indispensable declarations only emit their own trigger
/// rule when no aggressive, conservative or preference declaration already
/// recommends the trigger at that class.
pub fn expand_all(decls: &[PatternDecl], extra_rules: &[Rule]) -> Result<Vec<Rule>, MalformedPattern> {
    let mut primary: BTreeSet<&Choice> = BTreeSet::new();
    let mut skip: BTreeSet<&Choice> = BTreeSet::new();
    let mut absent: BTreeSet<&Choice> = BTreeSet::new();
    let mut taboo: BTreeSet<(Term, Term)> = BTreeSet::new();
    for d in decls {
        validate(d)?;
        match d {
            PatternDecl::Aggressive { choice, .. } | PatternDecl::Conservative { choice, .. } => {
                primary.insert(choice);
            }
            PatternDecl::Prefer { first, second, .. } => {
                primary.insert(first);
                primary.insert(second);
            }
            PatternDecl::Concomitant { trigger, .. } => {
                skip.insert(trigger);
            }
            PatternDecl::Indispensable { trigger, .. } => {
                absent.insert(trigger);
            }
            PatternDecl::Incompatible { choices, class, .. } => {
                taboo.extend(choices.iter().map(|c| (c.clone(), class.clone())));
            }
            PatternDecl::Anti { .. } => {}
        }
    }

    let mut rules = Vec::new();
    for d in decls {
        match d {
            PatternDecl::Concomitant { trigger, .. } | PatternDecl::Indispensable { trigger, .. }
                if primary.contains(trigger) =>
            {
                rules.extend(helper_rules(d));
            }
            _ => rules.extend(expand(d)?),
        }
    }
    rules.extend(extra_rules.iter().cloned());

    for r in &mut rules {
        let Some((name, class)) = recommended(r).map(|(n, c)| (n.clone(), c.clone())) else {
            continue;
        };
        let choice = Choice { name: name.clone(), class: class.clone() };
        let mut guards = Vec::new();
        if skip.contains(&choice) {
            guards.push(BodyElement::naf(unary(SKIP_CONCOMITANT, &name)));
        }
        if absent.contains(&choice) {
            guards.push(BodyElement::naf(unary(ABSENT_INDISPENSABLE, &name)));
        }
        if taboo.contains(&(name.clone(), class)) {
            guards.push(BodyElement::naf(unary(TABOO_CHOICE, &name)));
        }
        for g in guards {
            if !r.body.contains(&g) {
                r.body.push(g);
            }
        }
    }
    Ok(rules)
}

struct Elems<'a>(&'a [BodyElement]);

impl fmt::Display for Elems<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

struct Dangers<'a>(&'a [Danger]);

impl fmt::Display for Dangers<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("dangers([")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if d.len() == 1 {
                write!(f, "{}", d[0])?;
            } else {
                write!(f, "({})", Elems(d))?;
            }
        }
        f.write_str("])")
    }
}

impl fmt::Display for PatternDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#pattern {}(", self.kind())?;
        match self {
            PatternDecl::Aggressive { choice, pre, dangers } | PatternDecl::Conservative { choice, pre, dangers } => {
                write!(f, "choice({}, {}), pre([{}]), {}", choice.name, choice.class, Elems(pre), Dangers(dangers))?
            }
            PatternDecl::Anti { choice, dangers } => write!(f, "choice({choice}), {}", Dangers(dangers))?,
            PatternDecl::Prefer { first, second, pre } => write!(
                f,
                "first({}, {}), second({}, {}), pre([{}])",
                first.name,
                first.class,
                second.name,
                second.class,
                Elems(pre)
            )?,
            PatternDecl::Concomitant { trigger, with, pre } => write!(
                f,
                "trigger({}, {}), with({}, {}), pre([{}])",
                trigger.name,
                trigger.class,
                with.name,
                with.class,
                Elems(pre)
            )?,
            PatternDecl::Indispensable { trigger, needs, pre } => write!(
                f,
                "trigger({}, {}), needs({}, {}), pre([{}])",
                trigger.name,
                trigger.class,
                needs.name,
                needs.class,
                Elems(pre)
            )?,
            PatternDecl::Incompatible { choices, class, pre } => {
                f.write_str("[")?;
                for (i, c) in choices.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "], {class}")?;
                if !pre.is_empty() {
                    write!(f, ", pre([{}])", Elems(pre))?;
                }
            }
        }
        f.write_str(").")
    }
}
