//! Patient records and their translation into ground facts.

use serde::{Deserialize, Serialize};

use super::vocabulary::{self, FLAGS, STAGES};
use crate::model::{Atom, Literal, Rule, Term};
use crate::number::Decimal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recency {
    Recent,
    Remote,
    Unspecified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryEntry {
    pub condition: String,
    #[serde(default = "unspecified")]
    pub recency: Recency,
}

fn unspecified() -> Recency {
    Recency::Unspecified
}

/// A patient's information. Every field is optional; missing information
/// simply produces no fact.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PatientRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub race: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nyha_class: Option<u8>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub creatinine: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potassium: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lvef: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qrs_duration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lbbb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sinus_rhythm: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,

    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnoses: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidences: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub histories: Vec<HistoryEntry>,
    /// Conditions the patient is known NOT to have had (`-history(c)`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub absent_histories: Vec<String>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectation_of_survival: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_mi_days: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hf_with_reduced_ef: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pregnancy: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardioembolic_source: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eligible_for_significant_ventricular_pacing: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eligible_for_mechanical_circulatory_support: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependent_on_continuous_parenteral_inotropic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ischemic_etiology_of_hf: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requires_ventricular_pacing: Option<bool>,

    /// Treatments a physician has ruled out for this patient.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contraindications: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize)]
#[error("invalid patient record: {}", .errors.iter().map(|e| format!("{}: {}", e.field, e.message)).collect::<Vec<_>>().join("; "))]
pub struct ValidationError {
    pub errors: Vec<FieldError>,
}

fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl PatientRecord {
    fn flags(&self) -> [Option<bool>; 8] {
        [
            self.hf_with_reduced_ef,
            self.pregnancy,
            self.cardioembolic_source,
            self.eligible_for_significant_ventricular_pacing,
            self.eligible_for_mechanical_circulatory_support,
            self.dependent_on_continuous_parenteral_inotropic,
            self.ischemic_etiology_of_hf,
            self.requires_ventricular_pacing,
        ]
    }

    /// Checks the record against the vocabulary. Returns warnings for
    /// suspicious but acceptable combinations.
    pub fn validate(&self) -> Result<Vec<String>, ValidationError> {
        let mut errors = Vec::new();
        let mut err = |field: &str, message: String| errors.push(FieldError { field: field.into(), message });

        for (name, v) in [("gender", &self.gender), ("race", &self.race)] {
            if let Some(s) = v {
                if !is_symbol(s) {
                    err(name, format!("`{s}` is not a lowercase symbol"));
                }
            }
        }
        if let Some(s) = &self.stage {
            if !STAGES.contains(&s.as_str()) {
                err("stage", format!("`{s}` is not one of a, b, c, d"));
            }
        }
        if let Some(n) = self.nyha_class {
            if !(1..=4).contains(&n) {
                err("nyhaClass", format!("{n} is not between 1 and 4"));
            }
        }
        if let Some(v) = self.lvef {
            if !(0.0..=1.0).contains(&v) {
                err("lvef", format!("{v} is not a fraction between 0 and 1"));
            }
        }
        let numbers = [
            ("creatinine", self.creatinine),
            ("potassium", self.potassium),
            ("lvef", self.lvef),
            ("qrsDuration", self.qrs_duration),
            ("lbbb", self.lbbb),
            ("weight", self.weight),
            ("expectationOfSurvival", self.expectation_of_survival),
        ];
        for (name, v) in numbers {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 || Decimal::from_f64(v).is_none() {
                    err(name, format!("{v} is not a non-negative number with at most 18 decimals"));
                }
            }
        }
        for (name, list) in [("diagnoses", &self.diagnoses), ("evidences", &self.evidences)] {
            for s in list {
                if !vocabulary::is_disease(s) {
                    err(name, format!("`{s}` is not a known disease or symptom"));
                }
            }
        }
        for h in &self.histories {
            if !vocabulary::is_history_condition(&h.condition) {
                err("histories", format!("`{}` is not a known history condition", h.condition));
            }
        }
        for s in &self.absent_histories {
            if !vocabulary::is_history_condition(s) {
                err("absentHistories", format!("`{s}` is not a known history condition"));
            }
        }
        for s in &self.contraindications {
            if !vocabulary::is_treatment(s) {
                err("contraindications", format!("`{s}` is not a known treatment"));
            }
        }
        if !errors.is_empty() {
            return Err(ValidationError { errors });
        }
        let mut warnings = Vec::new();
        if self.stage.as_deref() == Some("a") && self.nyha_class.is_some() {
            warnings.push("stage A patients have no NYHA class".to_string());
        }
        Ok(warnings)
    }
}

fn fact(pred: &str, args: Vec<Term>) -> Rule {
    Rule::fact(Literal::pos(Atom::new(pred, args)))
}

fn c(s: &str) -> Term {
    Term::constant(s)
}

fn num(v: f64) -> Term {
    Term::Num(Decimal::from_f64(v).expect("validated number"))
}

fn int(v: u32) -> Term {
    Term::Num(Decimal::from_int(v as i64))
}

fn flag(pred: &str, v: bool) -> Rule {
    let atom = Atom::prop(pred);
    Rule::fact(if v { Literal::pos(atom) } else { Literal::neg(atom) })
}

/// Ground facts for a record, grouped as demographics, measurements, findings.
/// The record must have passed [`PatientRecord::validate`].
pub fn patient_to_facts(r: &PatientRecord) -> Vec<Rule> {
    let mut out = Vec::new();
    if let Some(s) = &r.stage {
        out.push(fact("accf_stage", vec![c(s)]));
    }
    if let Some(n) = r.nyha_class {
        out.push(fact("nyha_class", vec![int(n as u32)]));
    }
    if let Some(v) = r.expectation_of_survival {
        out.push(fact("expectation_of_survival", vec![num(v)]));
    }
    if let Some(s) = &r.gender {
        out.push(fact("gender", vec![c(s)]));
    }
    if let Some(a) = r.age {
        out.push(fact("age", vec![int(a)]));
    }
    if let Some(s) = &r.race {
        out.push(fact("race", vec![c(s)]));
    }
    let flags = r.flags();
    if let Some(v) = flags[0] {
        out.push(flag(FLAGS[0].1, v));
    }
    let measurements = [
        ("creatinine", r.creatinine),
        ("potassium", r.potassium),
        ("lvef", r.lvef),
        ("qrs_duration", r.qrs_duration),
        ("lbbb", r.lbbb),
    ];
    for (name, v) in measurements {
        if let Some(v) = v {
            out.push(fact("measurement", vec![c(name), num(v)]));
        }
    }
    match r.sinus_rhythm {
        Some(true) => out.push(fact("measurement", vec![c("sinus_rhythm")])),
        Some(false) => out.push(Rule::fact(Literal::neg(Atom::new("measurement", vec![c("sinus_rhythm")])))),
        None => {}
    }
    if let Some(v) = r.weight {
        out.push(fact("measurement", vec![c("weight"), num(v)]));
    }
    for d in &r.diagnoses {
        out.push(fact("diagnosis", vec![c(d)]));
    }
    for e in &r.evidences {
        out.push(fact("evidence", vec![c(e)]));
    }
    for h in &r.histories {
        out.push(match h.recency {
            Recency::Unspecified => fact("history", vec![c(&h.condition)]),
            Recency::Recent => fact("history", vec![c(&h.condition), c("recent")]),
            Recency::Remote => fact("history", vec![c(&h.condition), c("remote")]),
        });
    }
    for h in &r.absent_histories {
        out.push(Rule::fact(Literal::neg(Atom::new("history", vec![c(h)]))));
    }
    if let Some(d) = r.post_mi_days {
        out.push(fact("post_mi", vec![int(d)]));
    }
    for (i, v) in flags.iter().enumerate().skip(1) {
        if let Some(v) = v {
            out.push(flag(FLAGS[i].1, *v));
        }
    }
    for t in &r.contraindications {
        out.push(fact("contraindication", vec![c(t)]));
    }
    // duplicates in list fields would only repeat facts
    let mut seen = std::collections::HashSet::new();
    out.retain(|r| seen.insert(r.clone()));
    out
}
