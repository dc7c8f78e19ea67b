//! Command-line front end. `run` is the whole program minus process exit,
//! so it can be driven from tests.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::abduction::{abduce, AbductionError, Assumptions};
use crate::ground::ground_program;
use crate::kb::{self, default_kb, load_kb, patient_to_facts, Kb, PatientRecord};
use crate::model::{Literal, Program};
use crate::parser::{parse_literal, parse_program, parse_query, Query};
use crate::solver::{solve, PartialAnswerSet, SolveOptions, DEFAULT_STEP_BUDGET};

#[derive(Parser, Debug)]
#[command(name = "chf-advisor", version, about = "Goal-directed answer set solver and heart-failure treatment advisor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Answer a query against the knowledge base and facts.
    Solve(Common),
    /// Recommend treatments for a patient document.
    Recommend(Common),
    /// Answer a query, allowing abducible facts to be assumed.
    Abduce(Common),
    /// Parse, expand and ground the knowledge base and report counts.
    CheckKb(Common),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Knowledge base files or directories of .lp files (default: the bundled KB).
    #[arg(long, num_args = 1..)]
    kb: Vec<PathBuf>,
    /// Patient document (JSON).
    #[arg(long)]
    patient: Option<PathBuf>,
    /// Extra facts or rules in .lp syntax.
    #[arg(long)]
    facts: Vec<PathBuf>,
    #[arg(long)]
    query: Option<String>,
    /// Maximum number of answers; 0 means all.
    #[arg(long, default_value_t = 10)]
    limit: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    step_budget: u64,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, num_args = 1..)]
    kb: Vec<PathBuf>,
    /// Directory holding stored patients.
    #[arg(long, default_value = "patients")]
    store: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    JsonLines,
}

/// One answer in json-lines output. Literals are in `.lp` syntax.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub bindings: BTreeMap<String, String>,
    pub positive: Vec<String>,
    pub nafs: Vec<String>,
    pub assumptions: AssumptionRecord,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssumptionRecord {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl AnswerRecord {
    pub fn new(a: &PartialAnswerSet, bindings: &[(String, String)], assumptions: Option<&Assumptions>) -> AnswerRecord {
        let text = |v: &mut dyn Iterator<Item = &Literal>| v.map(ToString::to_string).collect::<Vec<_>>();
        AnswerRecord {
            bindings: bindings.iter().cloned().collect(),
            positive: text(&mut a.positive.iter()),
            nafs: text(&mut a.nafs.iter()),
            assumptions: assumptions
                .map(|s| AssumptionRecord {
                    positive: text(&mut s.positive.iter()),
                    negative: text(&mut s.negative.iter()),
                })
                .unwrap_or_default(),
        }
    }

    /// Parses the literal texts back.
    pub fn literals(&self) -> Result<(Vec<Literal>, Vec<Literal>), crate::parser::ParseError> {
        let parse = |v: &[String]| v.iter().map(|s| parse_literal(s)).collect::<Result<Vec<_>, _>>();
        Ok((parse(&self.positive)?, parse(&self.nafs)?))
    }
}

/// Usage, IO, parse and solver errors: all exit with status 2.
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_base(paths: &[PathBuf]) -> Result<Kb, Failure> {
    if paths.is_empty() {
        Ok(default_kb())
    } else {
        Ok(load_kb(paths)?)
    }
}

fn load_patient(path: &Path, err: &mut dyn Write) -> Result<PatientRecord, Failure> {
    let record: PatientRecord =
        serde_json::from_str(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    for w in record.validate().map_err(|e| Failure(format!("{}: {e}", path.display())))? {
        let _ = writeln!(err, "warning: {}: {w}", path.display());
    }
    Ok(record)
}

/// KB plus `--facts` files plus the `--patient` document, as one program.
fn assemble(c: &Common, err: &mut dyn Write) -> Result<(Kb, Program), Failure> {
    let kb = load_base(&c.kb)?;
    let mut extra = Program::default();
    for f in &c.facts {
        extra.extend(parse_program(&read(f)?).map_err(|e| Failure(format!("{}:{e}", f.display())))?);
    }
    if let Some(p) = &c.patient {
        extra.rules.extend(patient_to_facts(&load_patient(p, err)?));
    }
    Ok((kb, extra))
}

fn query_of(c: &Common) -> Result<Query, Failure> {
    let text = c.query.as_deref().ok_or_else(|| Failure("--query is required".into()))?;
    parse_query(text).map_err(|e| Failure(format!("query:{e}")))
}

fn options(c: &Common) -> SolveOptions {
    SolveOptions { limit: (c.limit > 0).then_some(c.limit), step_budget: c.step_budget, first_per_binding: false }
}

fn print_answer(
    out: &mut dyn Write,
    fmt: Format,
    a: &PartialAnswerSet,
    bindings: &[(String, String)],
    assumptions: Option<&Assumptions>,
) -> std::io::Result<()> {
    match fmt {
        Format::JsonLines => {
            let line = serde_json::to_string(&AnswerRecord::new(a, bindings, assumptions)).expect("serializable");
            writeln!(out, "{line}")
        }
        Format::Text => {
            writeln!(out, "{a}")?;
            let n = bindings.len();
            for (i, (k, v)) in bindings.iter().enumerate() {
                writeln!(out, "{k} = {v}{}", if i + 1 < n { "," } else { "" })?;
            }
            if let Some(s) = assumptions {
                let join = |v: &[Literal]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
                writeln!(out, "Assumed: {{ {} }}", join(&s.positive))?;
                writeln!(out, "Assumed absent: {{ {} }}", join(&s.negative))?;
            }
            writeln!(out)
        }
    }
}

fn exit_for(n: usize) -> i32 {
    if n > 0 {
        0
    } else {
        1
    }
}

fn cmd_solve(c: &Common, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let q = query_of(c)?;
    let (kb, extra) = assemble(c, err)?;
    let mut p = kb.program;
    p.extend(extra);
    let g = ground_program(&p)?;
    for w in &g.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let answers = solve(&g, &q, &options(c))?;
    for a in &answers {
        print_answer(out, c.format, a, &bindings_of(a), None)?;
    }
    Ok(exit_for(answers.len()))
}

fn cmd_recommend(c: &Common, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    if c.patient.is_none() {
        return Err(Failure("recommend requires --patient".into()));
    }
    let (kb, extra) = assemble(c, err)?;
    let mut opts = options(c);
    opts.first_per_binding = true;
    let mut p = kb.program;
    p.extend(extra);
    let g = ground_program(&p)?;
    let answers = solve(&g, &kb::recommendation_query(), &opts)?;
    for a in &answers {
        print_answer(out, c.format, a, &recommendation_bindings(a), None)?;
    }
    Ok(exit_for(answers.len()))
}

fn bindings_of(a: &PartialAnswerSet) -> Vec<(String, String)> {
    a.bindings.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// `T`/`C` read better as `Treatment`/`Class`, in that order.
fn recommendation_bindings(a: &PartialAnswerSet) -> Vec<(String, String)> {
    let get = |k: &str| a.bindings.get(k).map(ToString::to_string).unwrap_or_default();
    vec![("Treatment".into(), get("T")), ("Class".into(), get("C"))]
}

fn cmd_abduce(c: &Common, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let q = query_of(c)?;
    let (kb, extra) = assemble(c, err)?;
    let mut p = kb.program;
    p.extend(extra);
    if p.abducibles.is_empty() {
        for a in kb::default_whatif_abducibles() {
            p.add_abducible(a);
        }
    }
    let results = abduce(&p, &q, &options(c)).map_err(|e| match e {
        AbductionError::Solve(e) => Failure(e.to_string()),
        e => Failure(e.to_string()),
    })?;
    for r in &results {
        print_answer(out, c.format, &r.answer, &bindings_of(&r.answer), Some(&r.assumptions))?;
    }
    Ok(exit_for(results.len()))
}

fn cmd_check(c: &Common, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (kb, extra) = assemble(c, err)?;
    let mut p = kb.program;
    p.extend(extra);
    let g = ground_program(&p)?;
    writeln!(out, "files: {}", kb.sources.len())?;
    writeln!(out, "rules: {}", p.rules.len())?;
    writeln!(out, "ground rules: {}", g.rules.len())?;
    writeln!(out, "atoms: {}", g.atom_universe.len())?;
    writeln!(out, "warnings: {}", g.warnings.len())?;
    for w in &g.warnings {
        writeln!(out, "warning: {w}")?;
    }
    Ok(0)
}

fn cmd_serve(s: &ServeArgs) -> Result<i32, Failure> {
    let kb = load_base(&s.kb)?;
    let config = crate::service::Config { kb_paths: s.kb.clone(), store_dir: s.store.clone() };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(crate::service::serve(config, kb, &s.addr))?;
    Ok(0)
}

/// Runs the CLI and returns the process exit status: 0 with answers, 1 with
/// none, 2 on bad input.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(c) => cmd_solve(c, out, err),
        Command::Recommend(c) => cmd_recommend(c, out, err),
        Command::Abduce(c) => cmd_abduce(c, out, err),
        Command::CheckKb(c) => cmd_check(c, out, err),
        Command::Serve(s) => cmd_serve(s),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}
