//! Pattern expansion goldens (hand-transcribed listings) and oracle-checked
//! pattern properties.

use std::collections::BTreeSet;

use chf_advisor::ground::{ground_program, ground_rules};
use chf_advisor::model::{BodyElement, Literal, Program, Rule};
use chf_advisor::parser::parse_program;
use chf_advisor::patterns::expand_all;
use chf_advisor::solver::{enumerate_stable_models_bruteforce, StableModel};
use rand::seq::SliceRandom;
use rand::Rng;

pub struct Golden {
    pub name: &'static str,
    pub decls: &'static str,
    /// The expected expansion, hand-written. The concomitant helper is
    /// spelled `skip_concomitant_choice` throughout (one source spelling,
    /// `skip_concomitant_treatment`, is a typo).
    pub listing: &'static str,
}

pub const GOLDENS: &[Golden] = &[
    Golden {
        name: "aggressive (digoxin)",
        decls: "#pattern aggressive(choice(digoxin, class_2a), pre([accf_stage(c), hf_with_reduced_ef]),
                    dangers([evidence(atrioventricular_block)])).",
        listing: "recommendation(digoxin, class_2a) :- not contraindication(digoxin),
                      accf_stage(c), hf_with_reduced_ef.
                  contraindication(digoxin) :- evidence(atrioventricular_block).",
    },
    Golden {
        name: "conservative (blood pressure control)",
        decls: "#pattern conservative(choice(blood_pressure_control, class_1),
                    pre([accf_stage(b), diagnosis(structural_cardiac_abnormalities)]),
                    dangers([history(mi), history(acs)])).",
        listing: "recommendation(blood_pressure_control, class_1):-
                      accf_stage(b), diagnosis(structural_cardiac_abnormalities),
                      not contraindication(blood_pressure_control).
                  contraindication(blood_pressure_control):- not -history(mi).
                  contraindication(blood_pressure_control):- not -history(acs).",
    },
    Golden {
        name: "anti-recommendation (anticoagulation)",
        decls: "#pattern anti(choice(anticoagulation),
                    dangers([(not cardioembolic_source, not diagnosis(af), not history(thromboembolism),
                              hf_with_reduced_ef)])).",
        listing: "contraindication(anticoagulation) :- not cardioembolic_source,
                      not diagnosis(af), not history(thromboembolism),
                      hf_with_reduced_ef.",
    },
    Golden {
        name: "preference (ace inhibitors, arbs)",
        decls: "#pattern prefer(first(ace_inhibitors, class_1), second(arbs, class_1),
                    pre([accf_stage(c), hf_with_reduced_ef])).",
        listing: "recommendation(ace_inhibitors, class_1) :-
                      not contraindication(ace_inhibitors),
                      accf_stage(c), hf_with_reduced_ef.
                  recommendation(arbs, class_1) :- contraindication(ace_inhibitors),
                      not contraindication(arbs),
                      not taboo_choice(arbs),
                      accf_stage(c), hf_with_reduced_ef.",
    },
    Golden {
        name: "concomitant (ace inhibitors, diuretics)",
        decls: "#pattern aggressive(choice(ace_inhibitors, class_1), pre([accf_stage(c), hf_with_reduced_ef]),
                    dangers([])).
                #pattern concomitant(trigger(ace_inhibitors, class_1), with(diuretics, class_1),
                    pre([hf_with_reduced_ef])).",
        listing: "recommendation(ace_inhibitors, class_1) :- accf_stage(c),
                      not skip_concomitant_choice(ace_inhibitors),
                      not contraindication(ace_inhibitors), hf_with_reduced_ef.
                  skip_concomitant_choice(ace_inhibitors) :-
                      hf_with_reduced_ef, not recommendation(diuretics, class_1),
                      not contraindication(diuretics).
                  recommendation(diuretics, class_1) :-
                      hf_with_reduced_ef, not contraindication(diuretics),
                      recommendation(ace_inhibitors, class_1).",
    },
    Golden {
        name: "indispensable (beta blockers, diuretics)",
        decls: "#pattern aggressive(choice(beta_blockers, class_1), pre([accf_stage(c), hf_with_reduced_ef]),
                    dangers([])).
                #pattern concomitant(trigger(beta_blockers, class_1), with(diuretics, class_1),
                    pre([hf_with_reduced_ef])).
                #pattern indispensable(trigger(beta_blockers, class_1), needs(diuretics, class_1),
                    pre([hf_with_reduced_ef, accf_stage(c), current_or_recent_history_of_fluid_retention])).",
        // the listing shows only the indispensable part; the concomitant
        // helpers are the pattern-5 template for beta blockers
        listing: "recommendation(beta_blockers, class_1) :-
                      not skip_concomitant_choice(beta_blockers),
                      not absent_indispensable_choice(beta_blockers),
                      not contraindication(beta_blockers), accf_stage(c), hf_with_reduced_ef.
                  absent_indispensable_choice(beta_blockers) :-
                      not recommendation(diuretics, class_1), hf_with_reduced_ef,
                      accf_stage(c), current_or_recent_history_of_fluid_retention.
                  recommendation(diuretics, class_1) :-
                      recommendation(beta_blockers, class_1),
                      not contraindication(diuretics), accf_stage(c), hf_with_reduced_ef,
                      current_or_recent_history_of_fluid_retention.
                  skip_concomitant_choice(beta_blockers) :-
                      hf_with_reduced_ef, not recommendation(diuretics, class_1),
                      not contraindication(diuretics).
                  recommendation(diuretics, class_1) :-
                      hf_with_reduced_ef, not contraindication(diuretics),
                      recommendation(beta_blockers, class_1).",
    },
    Golden {
        name: "incompatible (ace inhibitors, arbs, aldosterone antagonist)",
        decls: "#pattern prefer(first(ace_inhibitors, class_1), second(arbs, class_1),
                    pre([accf_stage(c), hf_with_reduced_ef])).
                #pattern aggressive(choice(aldosterone_antagonist, class_1),
                    pre([conditions_for_aldosterone_antagonist_class_1]), dangers([])).
                #pattern concomitant(trigger(ace_inhibitors, class_1), with(diuretics, class_1),
                    pre([hf_with_reduced_ef])).
                #pattern concomitant(trigger(aldosterone_antagonist, class_1), with(diuretics, class_1),
                    pre([hf_with_reduced_ef])).
                #pattern incompatible([ace_inhibitors, arbs, aldosterone_antagonist], class_1,
                    pre([hf_with_reduced_ef])).",
        // listing plus the two concomitant declarations' helpers
        listing: "taboo_choice(ace_inhibitors) :- hf_with_reduced_ef,
                      recommendation(arbs, class_1),
                      recommendation(aldosterone_antagonist, class_1).
                  taboo_choice(arbs) :- hf_with_reduced_ef,
                      recommendation(ace_inhibitors, class_1),
                      recommendation(aldosterone_antagonist, class_1).
                  taboo_choice(aldosterone_antagonist) :- hf_with_reduced_ef,
                      recommendation(arbs, class_1), recommendation(ace_inhibitors, class_1).
                  recommendation(ace_inhibitors, class_1) :- accf_stage(c),
                      hf_with_reduced_ef, not skip_concomitant_choice(ace_inhibitors),
                      not taboo_choice(ace_inhibitors), not contraindication(ace_inhibitors).
                  recommendation(arbs, class_1) :- contraindication(ace_inhibitors),
                      not contraindication(arbs), not taboo_choice(arbs),
                      accf_stage(c), hf_with_reduced_ef.
                  recommendation(aldosterone_antagonist, class_1) :-
                      conditions_for_aldosterone_antagonist_class_1,
                      not skip_concomitant_choice(aldosterone_antagonist),
                      not contraindication(aldosterone_antagonist),
                      not taboo_choice(aldosterone_antagonist).
                  skip_concomitant_choice(ace_inhibitors) :- hf_with_reduced_ef,
                      not recommendation(diuretics, class_1), not contraindication(diuretics).
                  recommendation(diuretics, class_1) :- hf_with_reduced_ef,
                      recommendation(ace_inhibitors, class_1), not contraindication(diuretics).
                  skip_concomitant_choice(aldosterone_antagonist) :- hf_with_reduced_ef,
                      not recommendation(diuretics, class_1), not contraindication(diuretics).
                  recommendation(diuretics, class_1) :- hf_with_reduced_ef,
                      recommendation(aldosterone_antagonist, class_1), not contraindication(diuretics).",
    },
];

/// Rules as text with body elements sorted, the whole list sorted.
pub fn canonical(rules: &[Rule]) -> Vec<String> {
    let mut out: Vec<String> = rules
        .iter()
        .map(|r| {
            let mut body: Vec<String> = r.body.iter().map(ToString::to_string).collect();
            body.sort();
            let head = r.head.as_ref().map(ToString::to_string).unwrap_or_default();
            format!("{head} :- {}", body.join(", "))
        })
        .collect();
    out.sort();
    out
}

fn edb(rules: &[Rule]) -> Vec<Literal> {
    let heads: BTreeSet<&Literal> = rules.iter().filter_map(|r| r.head.as_ref()).collect();
    let mut out = BTreeSet::new();
    for r in rules {
        for l in r.body.iter().filter_map(BodyElement::literal) {
            if !heads.contains(l) {
                out.insert(l.clone());
            }
        }
    }
    out.into_iter().collect()
}

fn models(rules: Vec<Rule>) -> Result<BTreeSet<StableModel>, String> {
    let g = ground_rules(&rules).map_err(|e| e.to_string())?;
    Ok(enumerate_stable_models_bruteforce(&g).map_err(|e| e.to_string())?.into_iter().collect())
}

/// Structural check, then model equality under every subset of the
/// listing's input literals added as facts.
pub fn check_golden(g: &Golden) -> Result<(), String> {
    let decls = parse_program(g.decls).map_err(|e| format!("{}: decls: {e}", g.name))?;
    let expanded = expand_all(&decls.patterns, &decls.rules).map_err(|e| format!("{}: {e}", g.name))?;
    let listing = parse_program(g.listing).map_err(|e| format!("{}: listing: {e}", g.name))?.rules;
    let (got, want) = (canonical(&expanded), canonical(&listing));
    if got != want {
        return Err(format!("{}: expansion differs\n got: {got:#?}\nwant: {want:#?}", g.name));
    }
    let inputs = edb(&listing);
    for mask in 0u32..(1 << inputs.len()) {
        let facts: Vec<Rule> =
            inputs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| Rule::fact(l.clone())).collect();
        let with = |mut rs: Vec<Rule>| {
            rs.extend(facts.iter().cloned());
            rs
        };
        if models(with(expanded.clone()))? != models(with(listing.clone()))? {
            return Err(format!("{}: stable models differ with facts {mask:#b}", g.name));
        }
    }
    Ok(())
}

pub fn golden_suite() -> Result<(), String> {
    GOLDENS.iter().try_for_each(check_golden)
}

// ---- behavioral properties over fresh atoms ----

fn random_facts<R: Rng>(rng: &mut R, pool: &[&str]) -> String {
    pool.iter().filter(|_| rng.gen_bool(0.6)).map(|a| format!("{a}.\n")).collect()
}

fn solve_models(src: &str) -> Result<(Program, Vec<BTreeSet<Literal>>), String> {
    let p = parse_program(src).map_err(|e| format!("{e}\n{src}"))?;
    let g = ground_program(&p).map_err(|e| e.to_string())?;
    let ms = enumerate_stable_models_bruteforce(&g).map_err(|e| format!("{e}\n{src}"))?;
    Ok((p, ms.into_iter().map(|m| m.atoms).collect()))
}

fn lit(s: &str) -> Literal {
    chf_advisor::parser::parse_literal(s).unwrap()
}

/// Fresh names `<prefix>1..=n`.
fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn conj(items: &[String]) -> String {
    items.join(", ")
}

/// Blocking: an aggressive or conservative choice is never recommended in
/// a model where it is contraindicated.
pub fn blocking<R: Rng>(rng: &mut R) -> Result<(), String> {
    let n = rng.gen_range(2..=4);
    let pre = names("p", rng.gen_range(1..=n - 1));
    let dangers = names("d", n - pre.len());
    let kind = if rng.gen_bool(0.5) { "aggressive" } else { "conservative" };
    let mut src = format!(
        "#pattern {kind}(choice(c, k), pre([{}]), dangers([{}])).\n",
        conj(&pre),
        conj(&dangers)
    );
    let mut pool: Vec<String> = pre.clone();
    pool.extend(dangers.iter().cloned());
    pool.extend(dangers.iter().map(|d| format!("-{d}")));
    pool.push("contraindication(c)".into());
    let pool: Vec<&str> = pool.iter().map(String::as_str).collect();
    // a fact and its classical negation would only yield zero models
    src += &random_facts(rng, &pool);
    let (_, ms) = solve_models(&src)?;
    for m in &ms {
        if m.contains(&lit("contraindication(c)")) && m.contains(&lit("recommendation(c, k)")) {
            return Err(format!("blocking violated\n{src}"));
        }
    }
    Ok(())
}

/// Coupling: whenever the trigger is recommended and the concomitant choice
/// is not contraindicated, the concomitant choice is recommended too. The
/// concomitant declaration's preconditions are a subset of the trigger's.
pub fn coupling<R: Rng>(rng: &mut R) -> Result<(), String> {
    let n = rng.gen_range(2..=4);
    let pre = names("p", n);
    let mut shared = pre.clone();
    shared.shuffle(rng);
    shared.truncate(rng.gen_range(0..=n));
    let own = rng.gen_bool(0.5);
    let mut src = String::new();
    if own {
        src += &format!("#pattern aggressive(choice(t, k), pre([{}]), dangers([])).\n", conj(&pre));
    }
    src += &format!("#pattern concomitant(trigger(t, k), with(w, k), pre([{}])).\n", conj(if own { &shared } else { &pre }));
    let mut pool: Vec<String> = pre.clone();
    pool.push("contraindication(w)".into());
    pool.push("contraindication(t)".into());
    let pool: Vec<&str> = pool.iter().map(String::as_str).collect();
    src += &random_facts(rng, &pool);
    let (_, ms) = solve_models(&src)?;
    for m in &ms {
        if m.contains(&lit("recommendation(t, k)"))
            && !m.contains(&lit("contraindication(w)"))
            && !m.contains(&lit("recommendation(w, k)"))
        {
            return Err(format!("coupling violated\n{src}"));
        }
    }
    Ok(())
}

/// Revocation: whenever the indispensable declaration's preconditions hold,
/// no model recommends the trigger without the needed choice.
pub fn revocation<R: Rng>(rng: &mut R) -> Result<(), String> {
    let n = rng.gen_range(2..=4);
    let pre = names("p", n);
    let mut ipre = pre.clone();
    ipre.shuffle(rng);
    ipre.truncate(rng.gen_range(0..=n));
    let mut src = format!("#pattern aggressive(choice(t, k), pre([{}]), dangers([])).\n", conj(&pre[..1]));
    src += &format!("#pattern indispensable(trigger(t, k), needs(w, k), pre([{}])).\n", conj(&ipre));
    let mut pool: Vec<String> = pre.clone();
    pool.push("contraindication(w)".into());
    let pool: Vec<&str> = pool.iter().map(String::as_str).collect();
    src += &random_facts(rng, &pool);
    let (_, ms) = solve_models(&src)?;
    for m in &ms {
        let pre_holds = ipre.iter().all(|p| m.contains(&lit(p)));
        if pre_holds && m.contains(&lit("recommendation(t, k)")) && !m.contains(&lit("recommendation(w, k)")) {
            return Err(format!("revocation violated\n{src}"));
        }
    }
    Ok(())
}

/// Incompatibility: when the group's preconditions hold, no model
/// recommends every choice of the group.
pub fn incompatibility<R: Rng>(rng: &mut R) -> Result<(), String> {
    let n = rng.gen_range(2..=4);
    let choices = names("c", n);
    let mut src = String::new();
    let mut pool: Vec<String> = vec!["g".into()];
    for (i, c) in choices.iter().enumerate() {
        src += &format!("#pattern aggressive(choice({c}, k), pre([q{i}]), dangers([])).\n");
        pool.push(format!("q{i}"));
    }
    let group_pre = if rng.gen_bool(0.5) { "g" } else { "" };
    src += &format!("#pattern incompatible([{}], k, pre([{group_pre}])).\n", conj(&choices));
    let pool: Vec<&str> = pool.iter().map(String::as_str).collect();
    src += &random_facts(rng, &pool);
    let (_, ms) = solve_models(&src)?;
    for m in &ms {
        let pre_holds = group_pre.is_empty() || m.contains(&lit(group_pre));
        if pre_holds && choices.iter().all(|c| m.contains(&lit(&format!("recommendation({c}, k)")))) {
            return Err(format!("incompatibility violated\n{src}"));
        }
    }
    Ok(())
}

pub fn pattern_properties<R: Rng>(rng: &mut R, rounds: usize) -> Result<(), String> {
    for _ in 0..rounds {
        blocking(rng)?;
        coupling(rng)?;
        revocation(rng)?;
        incompatibility(rng)?;
    }
    Ok(())
}
