//! Patient-record fuzzing and field ablation.

use chf_advisor::kb::vocabulary::{DISEASES, DISEASE_ALIASES, FLAGS, HISTORY_EXTRAS, TREATMENTS};
use chf_advisor::kb::{HistoryEntry, PatientRecord, Recency};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::Value;

pub const REFERENCE_PATIENT: &str = include_str!("../fixtures/reference_patient.json");

/// The ten reference-record fields the ablation switches on and off.
pub const ABLATION_FIELDS: [&str; 10] = [
    "stage",
    "nyhaClass",
    "hfWithReducedEf",
    "lvef",
    "lbbb",
    "sinusRhythm",
    "diagnoses",
    "evidences",
    "histories",
    "postMiDays",
];

/// The reference record without the fields whose bit is set in `mask`.
pub fn ablate(mask: u32) -> PatientRecord {
    let mut v: Value = serde_json::from_str(REFERENCE_PATIENT).unwrap();
    let obj = v.as_object_mut().unwrap();
    for (i, f) in ABLATION_FIELDS.iter().enumerate() {
        if mask & (1 << i) != 0 {
            obj.remove(*f);
        }
    }
    serde_json::from_value(v).unwrap()
}

fn some<R: Rng, T>(rng: &mut R, p: f64, f: impl FnOnce(&mut R) -> T) -> Option<T> {
    if rng.gen_bool(p) {
        Some(f(rng))
    } else {
        None
    }
}

fn subset<R: Rng>(rng: &mut R, from: &[&str], max: usize) -> Vec<String> {
    let n = rng.gen_range(0..=max);
    from.choose_multiple(rng, n).map(|s| s.to_string()).collect()
}

/// A valid, mostly stage C record with random findings. Weighted towards
/// the reduced-EF patients where the interesting interactions live.
pub fn fuzz_patient<R: Rng>(rng: &mut R) -> PatientRecord {
    let conditions: Vec<&str> = DISEASES.iter().chain(DISEASE_ALIASES).chain(HISTORY_EXTRAS).copied().collect();
    let recencies = [Recency::Recent, Recency::Remote, Recency::Unspecified];
    let mut r = PatientRecord {
        gender: some(rng, 0.5, |r| ["female", "male"].choose(r).unwrap().to_string()),
        age: some(rng, 0.5, |r| r.gen_range(20..95)),
        race: some(rng, 0.5, |r| ["african_american", "white", "asian"].choose(r).unwrap().to_string()),
        stage: some(rng, 0.9, |r| ["a", "b", "c", "c", "c", "d"].choose(r).unwrap().to_string()),
        nyha_class: some(rng, 0.7, |r| r.gen_range(1..=4)),
        creatinine: some(rng, 0.3, |r| f64::from(r.gen_range(5..40u8)) / 10.0),
        potassium: some(rng, 0.3, |r| f64::from(r.gen_range(30..60u8)) / 10.0),
        lvef: some(rng, 0.6, |r| f64::from(r.gen_range(10..70u8)) / 100.0),
        qrs_duration: some(rng, 0.3, |r| f64::from(r.gen_range(80..200u8))),
        lbbb: some(rng, 0.3, |r| f64::from(r.gen_range(80..200u8))),
        sinus_rhythm: some(rng, 0.3, |r| r.gen_bool(0.5)),
        weight: None,
        diagnoses: subset(rng, DISEASES, 4),
        evidences: subset(rng, DISEASES, 2),
        histories: subset(rng, &conditions, 3)
            .into_iter()
            .map(|condition| HistoryEntry { condition, recency: *recencies.choose(rng).unwrap() })
            .collect(),
        absent_histories: subset(rng, &conditions, 2),
        expectation_of_survival: some(rng, 0.3, |r| f64::from(r.gen_range(0..10u8))),
        post_mi_days: some(rng, 0.2, |r| r.gen_range(0..400)),
        contraindications: if rng.gen_bool(0.4) { subset(rng, TREATMENTS, 3) } else { Vec::new() },
        ..PatientRecord::default()
    };
    r.hf_with_reduced_ef = some(rng, 0.8, |r| r.gen_bool(0.8));
    // the remaining yes/no fields, through their wire names
    let mut v = serde_json::to_value(&r).unwrap();
    for (field, _) in &FLAGS[1..] {
        if rng.gen_bool(0.25) {
            v[*field] = Value::Bool(rng.gen_bool(0.5));
        }
    }
    serde_json::from_value(v).unwrap()
}

/// A fuzzed record steered towards the reduced-EF stage C patient after an
/// MI, where ACE inhibitors (or ARBs) and aldosterone antagonists compete.
pub fn fuzz_hfref_patient<R: Rng>(rng: &mut R) -> PatientRecord {
    let mut r = fuzz_patient(rng);
    r.stage = Some(if rng.gen_bool(0.85) { "c" } else { "b" }.into());
    r.hf_with_reduced_ef = Some(true);
    if rng.gen_bool(0.8) {
        r.post_mi_days = Some(rng.gen_range(0..90));
    }
    if rng.gen_bool(0.8) {
        r.lvef = Some(f64::from(rng.gen_range(10..=40u8)) / 100.0);
    }
    // ARBs only come in when ACE inhibitors are ruled out
    if rng.gen_bool(0.3) {
        let recency = *[Recency::Recent, Recency::Remote, Recency::Unspecified].choose(rng).unwrap();
        r.histories.push(HistoryEntry { condition: "angioedema".into(), recency });
    }
    r.contraindications.retain(|t| !TRIPLE.contains(&t.as_str()));
    r
}

pub const TRIPLE: [&str; 3] = ["ace_inhibitors", "arbs", "aldosterone_antagonist"];

fn joint_query(treatments: &[&str]) -> chf_advisor::parser::Query {
    let goals = treatments.iter().map(|t| format!("recommendation({t}, class_1)")).collect::<Vec<_>>().join(", ");
    chf_advisor::parser::parse_query(&format!("?- {goals}.")).unwrap()
}

#[derive(Debug, Default)]
pub struct TripleStats {
    pub patients: usize,
    /// Patients for whom some two of the three are jointly derivable.
    pub pair_jointly: usize,
    /// Patients with at least one of the three recommended.
    pub any: usize,
}

/// No support recommends all three of the group at class 1, and no stable
/// model does either (checked exactly with a conjunctive query).
pub fn incompatible_triple<R: Rng>(rng: &mut R, patients: usize) -> Result<TripleStats, String> {
    use chf_advisor::kb::{default_kb, patient_to_facts, recommend};
    use chf_advisor::ground::ground_program;
    use chf_advisor::solver::{solve, SolveOptions};

    let kb = default_kb();
    let q = joint_query(&TRIPLE);
    let pairs: Vec<_> = (0..3).map(|skip| {
        let pair: Vec<&str> = (0..3).filter(|&i| i != skip).map(|i| TRIPLE[i]).collect();
        joint_query(&pair)
    }).collect();
    let mut stats = TripleStats { patients, ..TripleStats::default() };
    for i in 0..patients {
        let record = if i % 2 == 0 { fuzz_patient(rng) } else { fuzz_hfref_patient(rng) };
        let json = serde_json::to_string(&record).unwrap();
        let recs = recommend(&record, &kb, None).map_err(|e| format!("patient {i}: {e}\n{json}"))?;
        let mut best = 0;
        for r in &recs {
            // one support justifies one recommendation, but it may commit to others
            let held = TRIPLE
                .iter()
                .filter(|t| r.support.positive.iter().any(|l| l.to_string() == format!("recommendation({t}, class_1)")))
                .count();
            if held == 3 {
                return Err(format!("patient {i}: support holds the whole group: {}\n{json}", r.support));
            }
            best = best.max(held);
        }
        stats.any += usize::from(best >= 1);
        let mut p = kb.program.clone();
        p.rules.extend(patient_to_facts(&record));
        let g = ground_program(&p).map_err(|e| e.to_string())?;
        let together = solve(&g, &q, &SolveOptions { limit: Some(1), ..SolveOptions::default() })
            .map_err(|e| format!("patient {i}: {e}"))?;
        if let Some(a) = together.first() {
            return Err(format!("patient {i}: the group is jointly derivable: {a}\n{json}"));
        }
        if best >= 1 {
            let one = SolveOptions { limit: Some(1), ..SolveOptions::default() };
            for pq in &pairs {
                if !solve(&g, pq, &one).map_err(|e| format!("patient {i}: {e}"))?.is_empty() {
                    stats.pair_jointly += 1;
                    break;
                }
            }
        }
    }
    Ok(stats)
}

/// All 1024 subsets of the ablation fields: recommend never fails, every
/// support contains its own recommendation.
pub fn ablation_sweep() -> Result<usize, String> {
    use chf_advisor::kb::{default_kb, recommend};
    let kb = default_kb();
    let mut total = 0;
    for mask in 0..(1u32 << ABLATION_FIELDS.len()) {
        let recs = recommend(&ablate(mask), &kb, None).map_err(|e| format!("mask {mask:#012b}: {e}"))?;
        for r in &recs {
            let own = format!("recommendation({}, {})", r.treatment, r.class_label);
            if !r.support.positive.iter().any(|l| l.to_string() == own) {
                return Err(format!("mask {mask:#012b}: support of {own} lacks it"));
            }
        }
        total += recs.len();
    }
    Ok(total)
}
