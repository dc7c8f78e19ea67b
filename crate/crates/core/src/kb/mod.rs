//! The heart-failure knowledge base and the recommendation entry points.

pub mod patient;
pub mod vocabulary;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::abduction::{abduce, AbductionError, Assumptions};
use crate::ground::{ground_program, GroundError};
use crate::model::{Atom, BodyElement, Literal, PredicateKey, Program, Rule, Term};
use crate::parser::{parse_program, ParseError, Query};
use crate::patterns::expand_all;
use crate::solver::{solve, PartialAnswerSet, SolveError, SolveOptions};

pub use patient::{patient_to_facts, HistoryEntry, PatientRecord, Recency, ValidationError};
pub use vocabulary::ChfVocabulary;

/// The knowledge base shipped with the crate, as `(file name, source)`.
pub const DEFAULT_KB: &[(&str, &str)] = &[
    ("bridge.lp", include_str!("../../kb/bridge.lp")),
    ("stage_a.lp", include_str!("../../kb/stage_a.lp")),
    ("stage_b.lp", include_str!("../../kb/stage_b.lp")),
    ("stage_c.lp", include_str!("../../kb/stage_c.lp")),
    ("devices.lp", include_str!("../../kb/devices.lp")),
];

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{file}:{source}")]
    Parse { file: String, source: ParseError },
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Abduction(#[from] AbductionError),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("unknown {field} `{value}`")]
    UnknownSymbol { field: &'static str, value: String },
}

/// A loaded knowledge base: patterns already expanded into plain rules.
#[derive(Clone, Debug, PartialEq)]
pub struct Kb {
    pub program: Program,
    /// Files the base was loaded from, in load order.
    pub sources: Vec<String>,
}

fn parse_named(file: &str, src: &str) -> Result<Program, KbError> {
    parse_program(src).map_err(|source| KbError::Parse { file: file.to_string(), source })
}

fn finish(mut program: Program, sources: Vec<String>) -> Result<Kb, KbError> {
    program.rules = expand_all(&program.patterns, &program.rules).map_err(GroundError::from)?;
    program.patterns.clear();
    // fail early on unsafe rules and bad comparisons
    ground_program(&program)?;
    Ok(Kb { program, sources })
}

pub fn default_kb() -> Kb {
    let mut program = Program::default();
    for (name, src) in DEFAULT_KB {
        program.extend(parse_named(name, src).expect("bundled knowledge base parses"));
    }
    finish(program, DEFAULT_KB.iter().map(|(n, _)| n.to_string()).collect()).expect("bundled knowledge base grounds")
}

/// Loads `.lp` files; directories contribute their `.lp` files in name order.
pub fn load_kb<P: AsRef<Path>>(paths: &[P]) -> Result<Kb, KbError> {
    let mut files = Vec::new();
    for p in paths {
        let p = p.as_ref();
        if p.is_dir() {
            let entries = std::fs::read_dir(p).map_err(|source| KbError::Io { path: p.to_path_buf(), source })?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "lp"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.to_path_buf());
        }
    }
    let mut program = Program::default();
    let mut sources = Vec::new();
    for f in files {
        let src = std::fs::read_to_string(&f).map_err(|source| KbError::Io { path: f.clone(), source })?;
        let name = f.display().to_string();
        program.extend(parse_named(&name, &src)?);
        sources.push(name);
    }
    finish(program, sources)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Recommendation {
    pub treatment: String,
    #[serde(rename = "class")]
    pub class_label: String,
    /// The partial answer set justifying the recommendation.
    #[serde(serialize_with = "ser_support")]
    pub support: PartialAnswerSet,
}

#[derive(Serialize)]
struct SupportJson<'a> {
    positive: &'a std::collections::BTreeSet<Literal>,
    nafs: &'a std::collections::BTreeSet<Literal>,
}

fn ser_support<S: serde::Serializer>(a: &PartialAnswerSet, s: S) -> Result<S::Ok, S::Error> {
    SupportJson { positive: &a.positive, nafs: &a.nafs }.serialize(s)
}

/// One explanation of a what-if query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WhatIf {
    pub assumptions: Assumptions,
    #[serde(serialize_with = "ser_support")]
    pub support: PartialAnswerSet,
}

pub fn recommendation_query() -> Query {
    Query {
        goals: vec![BodyElement::pos(Atom::new("recommendation", vec![Term::var("T"), Term::var("C")]))],
    }
}

fn to_recommendation(a: PartialAnswerSet) -> Recommendation {
    let get = |v: &str| a.bindings.iter().find(|(k, _)| &***k == v).map(|(_, t)| t.to_string()).unwrap_or_default();
    Recommendation { treatment: get("T"), class_label: get("C"), support: a }
}

fn with_facts(kb: &Kb, facts: &[Rule]) -> Program {
    let mut p = kb.program.clone();
    p.rules.extend(facts.iter().cloned());
    p
}

fn rec_options(limit: Option<usize>) -> SolveOptions {
    SolveOptions { limit, first_per_binding: true, ..SolveOptions::default() }
}

/// Recommendations for a set of patient facts (and any extra rules).
pub fn recommend_facts(kb: &Kb, facts: &[Rule], limit: Option<usize>) -> Result<Vec<Recommendation>, KbError> {
    let g = ground_program(&with_facts(kb, facts))?;
    let answers = solve(&g, &recommendation_query(), &rec_options(limit))?;
    Ok(answers.into_iter().map(to_recommendation).collect())
}

pub fn recommend(record: &PatientRecord, kb: &Kb, limit: Option<usize>) -> Result<Vec<Recommendation>, KbError> {
    record.validate()?;
    recommend_facts(kb, &patient_to_facts(record), limit)
}

/// Patient-fact predicates plus `contraindication/1`: what a physician may
/// ask "what if" about.
pub fn default_whatif_abducibles() -> Vec<PredicateKey> {
    let mut v = vocabulary::fact_predicates();
    v.push(PredicateKey::new("contraindication", 1));
    v
}

/// Abductive answers to `query` over the KB plus `facts`, with the given
/// predicates abducible.
pub fn whatif_facts(
    kb: &Kb,
    facts: &[Rule],
    abducibles: &[PredicateKey],
    query: &Query,
    opts: &SolveOptions,
) -> Result<Vec<WhatIf>, KbError> {
    let mut p = with_facts(kb, facts);
    for a in abducibles {
        p.add_abducible(a.clone());
    }
    Ok(abduce(&p, query, opts)?
        .into_iter()
        .map(|r| WhatIf { assumptions: r.assumptions, support: r.answer })
        .collect())
}

/// What would have to hold (or not hold) for `treatment` to be recommended
/// at `class` for this patient.
pub fn whatif(
    record: &PatientRecord,
    kb: &Kb,
    treatment: &str,
    class: &str,
    limit: Option<usize>,
) -> Result<Vec<WhatIf>, KbError> {
    record.validate()?;
    if !vocabulary::is_treatment(treatment) {
        return Err(KbError::UnknownSymbol { field: "treatment", value: treatment.to_string() });
    }
    if !vocabulary::CLASS_LABELS.contains(&class) {
        return Err(KbError::UnknownSymbol { field: "class", value: class.to_string() });
    }
    let q = Query {
        goals: vec![BodyElement::pos(Atom::new(
            "recommendation",
            vec![Term::constant(treatment), Term::constant(class)],
        ))],
    };
    let opts = SolveOptions { limit, ..SolveOptions::default() };
    whatif_facts(kb, &patient_to_facts(record), &default_whatif_abducibles(), &q, &opts)
}

/// Literals in an answer that are treatment recommendations.
pub fn recommended_in(a: &PartialAnswerSet) -> Vec<&Literal> {
    a.positive.iter().filter(|l| !l.strong_neg && &*l.atom.predicate == "recommendation").collect()
}
