//! Symbols the CHF knowledge base and patient records may use.

use serde::Serialize;

use crate::model::PredicateKey;

/// Pharmaceutical treatments, management objectives, device/surgery
/// therapies, plus `blood_pressure_control` which the stage-B rule uses.
pub const TREATMENTS: &[&str] = &[
    "ace_inhibitors",
    "arbs",
    "beta_blockers",
    "statin",
    "diuretics",
    "aldosterone_antagonist",
    "hydralazine_and_isosorbide_dinitrate",
    "digoxin",
    "anticoagulation",
    "omega_3_fatty_acids",
    "inotropes",
    "systolic_blood_pressure_control",
    "diastolic_blood_pressure_control",
    "obesity_control",
    "diabetes_control",
    "tobacco_avoidance",
    "cardiotoxic_agents_avoidance",
    "atrial_fibrillation_control",
    "water_restriction",
    "sodium_restriction",
    "implantable_cardioverter_defibrillator",
    "cardiac_resynchronization_therapy",
    "mechanical_circulatory_support",
    "coronary_revascularization",
    "blood_pressure_control",
];

pub const DISEASES: &[&str] = &[
    "sleep_apnea",
    "acute_coronary_syndrome",
    "myocardial_infarction",
    "obesity",
    "diabetes",
    "stroke",
    "fluid_retention",
    "angioedema",
    "ischemic_attack",
    "thromboembolism",
    "elevated_plasma_natriuretic_peptide_level",
    "asymptomatic_ischemic_cardiomyopathy",
    "lipid_disorders",
    "hypertension",
    "atrial_fibrillation",
    "myocardial_ischemia",
    "coronary_artery_disease",
    "dilated_cardiomyopathy",
    "acute_profound_hemodynamic_compromise",
    "threatened_end_organ_dysfunction",
    "ischemic_heart_disease",
    "angina",
    "structural_cardiac_abnormalities",
    "atrioventricular_block",
    "volume_overload",
];

/// Short forms the rules use for two of the diseases.
pub const DISEASE_ALIASES: &[&str] = &["mi", "acs"];

/// History entries that are not diseases.
pub const HISTORY_EXTRAS: &[&str] = &["standard_neurohormonal_antagonist_therapy", "cardiovascular_hospitalization"];

pub const CLASS_LABELS: &[&str] = &["class_1", "class_2a", "class_2b"];

pub const STAGES: &[&str] = &["a", "b", "c", "d"];

pub const RECENCIES: &[&str] = &["recent", "remote", "unspecified"];

/// Yes/no miscellany, as `(record field, fact predicate)`.
pub const FLAGS: &[(&str, &str)] = &[
    ("hfWithReducedEf", "hf_with_reduced_ef"),
    ("pregnancy", "pregnancy"),
    ("cardioembolicSource", "cardioembolic_source"),
    ("eligibleForSignificantVentricularPacing", "eligible_for_significant_ventricular_pacing"),
    ("eligibleForMechanicalCirculatorySupport", "eligible_for_mechanical_circulatory_support"),
    ("dependentOnContinuousParenteralInotropic", "dependent_on_continuous_parenteral_inotropic"),
    ("ischemicEtiologyOfHf", "ischemic_etiology_of_hf"),
    ("requiresVentricularPacing", "requires_ventricular_pacing"),
];

fn keys(list: &[(&str, usize)]) -> Vec<PredicateKey> {
    list.iter().map(|(n, a)| PredicateKey::new(n, *a)).collect()
}

pub fn fact_predicates() -> Vec<PredicateKey> {
    let mut v = keys(&[
        ("accf_stage", 1),
        ("nyha_class", 1),
        ("gender", 1),
        ("age", 1),
        ("race", 1),
        ("expectation_of_survival", 1),
        ("measurement", 1),
        ("measurement", 2),
        ("diagnosis", 1),
        ("evidence", 1),
        ("history", 1),
        ("history", 2),
        ("post_mi", 1),
    ]);
    v.extend(FLAGS.iter().map(|(_, p)| PredicateKey::new(p, 0)));
    v
}

pub fn derived_predicates() -> Vec<PredicateKey> {
    keys(&[
        ("recommendation", 2),
        ("contraindication", 1),
        ("taboo_choice", 1),
        ("skip_concomitant_choice", 1),
        ("absent_indispensable_choice", 1),
        ("reduced_ef", 1),
        ("history_of_mi_or_acs", 0),
        ("nyha_class_3_to_4", 0),
        ("current_or_recent_history_of_fluid_retention", 0),
    ])
}

pub fn is_disease(s: &str) -> bool {
    DISEASES.contains(&s) || DISEASE_ALIASES.contains(&s)
}

pub fn is_history_condition(s: &str) -> bool {
    is_disease(s) || HISTORY_EXTRAS.contains(&s)
}

pub fn is_treatment(s: &str) -> bool {
    TREATMENTS.contains(&s)
}

/// Metadata for one patient form field, used by form-based clients.
#[derive(Clone, Debug, Serialize)]
pub struct FieldSpec {
    pub name: &'static str,
    /// `symbol`, `integer`, `number`, `boolean`, `symbols` or `histories`.
    #[serde(rename = "type")]
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<&'static str>>,
}

fn field(name: &'static str, kind: &'static str) -> FieldSpec {
    FieldSpec { name, kind, unit: None, min: None, max: None, options: None }
}

pub fn form_fields() -> Vec<FieldSpec> {
    let mut v = vec![
        field("gender", "symbol"),
        FieldSpec { min: Some(0.0), unit: Some("years"), ..field("age", "integer") },
        field("race", "symbol"),
        FieldSpec { options: Some(STAGES.to_vec()), ..field("stage", "symbol") },
        FieldSpec { min: Some(1.0), max: Some(4.0), ..field("nyhaClass", "integer") },
        FieldSpec { min: Some(0.0), unit: Some("mg/dL"), ..field("creatinine", "number") },
        FieldSpec { min: Some(0.0), unit: Some("mEq/L"), ..field("potassium", "number") },
        FieldSpec { min: Some(0.0), max: Some(1.0), unit: Some("fraction"), ..field("lvef", "number") },
        FieldSpec { min: Some(0.0), unit: Some("ms"), ..field("qrsDuration", "number") },
        FieldSpec { min: Some(0.0), unit: Some("ms"), ..field("lbbb", "number") },
        field("sinusRhythm", "boolean"),
        FieldSpec { min: Some(0.0), unit: Some("kg"), ..field("weight", "number") },
        FieldSpec { options: Some(DISEASES.to_vec()), ..field("diagnoses", "symbols") },
        FieldSpec { options: Some(DISEASES.to_vec()), ..field("evidences", "symbols") },
        FieldSpec { options: Some(RECENCIES.to_vec()), ..field("histories", "histories") },
        field("absentHistories", "symbols"),
        FieldSpec { min: Some(0.0), unit: Some("years"), ..field("expectationOfSurvival", "number") },
        FieldSpec { min: Some(0.0), unit: Some("days"), ..field("postMiDays", "integer") },
        FieldSpec { options: Some(TREATMENTS.to_vec()), ..field("contraindications", "symbols") },
    ];
    v.extend(FLAGS.iter().map(|(f, _)| field(f, "boolean")));
    v
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChfVocabulary {
    pub fact_predicates: Vec<String>,
    pub derived_predicates: Vec<String>,
    pub class_labels: Vec<&'static str>,
    pub treatments: Vec<&'static str>,
    pub diseases: Vec<&'static str>,
    pub history_conditions: Vec<&'static str>,
    pub stages: Vec<&'static str>,
    pub recencies: Vec<&'static str>,
    pub fields: Vec<FieldSpec>,
}

impl ChfVocabulary {
    pub fn get() -> ChfVocabulary {
        let mut history_conditions: Vec<&'static str> = DISEASES.to_vec();
        history_conditions.extend(DISEASE_ALIASES);
        history_conditions.extend(HISTORY_EXTRAS);
        ChfVocabulary {
            fact_predicates: fact_predicates().iter().map(ToString::to_string).collect(),
            derived_predicates: derived_predicates().iter().map(ToString::to_string).collect(),
            class_labels: CLASS_LABELS.to_vec(),
            treatments: TREATMENTS.to_vec(),
            diseases: DISEASES.to_vec(),
            history_conditions,
            stages: STAGES.to_vec(),
            recencies: RECENCIES.to_vec(),
            fields: form_fields(),
        }
    }
}
