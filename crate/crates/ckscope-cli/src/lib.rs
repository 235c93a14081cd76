//! Command-line front end for the workbench library.
//!
//! Every subcommand is a thin adapter: it parses arguments and files, makes
//! one or two library calls, and serialises the result. Exit codes follow a
//! fixed convention so the tool scripts cleanly:
//!
//! * `0` — success, or the asserted verdict is true;
//! * `1` — the asserted verdict is false (a proof fails to check, a
//!   countermodel exists, an audit finds violations, ...);
//! * `2` — usage or format errors (unknown flags, malformed files,
//!   enumeration cap exceeded).
//!
//! `--json` switches every subcommand to machine-readable output on stdout.
//! The environment variable `CKSCOPE_MAX_FRAMES` caps the raw candidate count
//! of frame enumeration for `decide` and `audit`.

mod corpus;
mod dot;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use ckscope::conditions::{violation, ConditionName, CONDITION_NAMES};
use ckscope::hilbert::builtins::{builtin_proof, BUILTIN_NAMES};
use ckscope::hilbert::{check_proof, proof_from_json_str, proof_to_doc};
use ckscope::kripke::frame_validates_schema;
use ckscope::search::{
    correspondence_audit, find_countermodel, EnumerationOptions, FilterMode, SearchError,
    SearchOutcome,
};
use ckscope::syntax::parse;
use ckscope::transform::{transform_report, PreservationOutcome, TransformOp};
use ckscope::{Formula, Model};

pub use dot::to_dot;

const USAGE_ERROR: i32 = 2;
const VERDICT_FALSE: i32 = 1;
const OK: i32 = 0;

#[derive(Parser)]
#[command(
    name = "ckscope",
    version,
    about = "Workbench for intuitionistic modal logics between CK and IK"
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula and show its syntax tree.
    Parse { formula: String },
    /// Parse a formula and reprint it with minimal parentheses.
    Print { formula: String },
    /// Replay a proof file and report its end consecution.
    CheckProof { file: PathBuf },
    /// Show, re-check, or export a packaged derivation.
    Builtin {
        name: String,
        /// Write the proof as JSON to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Replay the proof through the checker and report the verdict.
        #[arg(long)]
        check: bool,
    },
    /// Evaluate a formula at a world of a model.
    ModelCheck {
        model: PathBuf,
        /// World name at which to evaluate.
        #[arg(long)]
        at: String,
        formula: String,
    },
    /// Check whether a frame validates a schema under every valuation.
    FrameValid { frame: PathBuf, schema: String },
    /// Evaluate frame conditions on a frame file.
    CheckFrame {
        frame: PathBuf,
        /// `all` or a comma-separated list like `NdSuff,CdStrong`.
        #[arg(long, default_value = "all")]
        conditions: String,
        /// Print the witnessing tuple for each failed condition.
        #[arg(long)]
        explain: bool,
    },
    /// Search for a countermodel to a formula over an axiom set.
    Decide {
        formula: String,
        /// Comma-separated extra axioms, e.g. `Nd,Idb` (empty for plain CK).
        #[arg(long, default_value = "")]
        axioms: String,
        /// Additional user schema (repeatable); cited as S1, S2, ...
        #[arg(long = "schema")]
        user_schemas: Vec<String>,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
        /// Frame filter: `suff`, `corr`, or `schema` (brute force).
        #[arg(long, default_value = "corr")]
        mode: String,
        /// Write the countermodel (if any) to this file as JSON.
        #[arg(long)]
        emit_model: Option<PathBuf>,
        /// Write the countermodel (if any) to this file as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Sweep all small frames, comparing an axiom's conditions with validity.
    Audit {
        #[arg(long)]
        axiom: String,
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
        /// Write the full report to this file as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Apply a frame surgery to a model.
    Transform {
        model: PathBuf,
        /// `bomb-saturate` or `plus-duplicate`.
        #[arg(long)]
        op: String,
        /// Verify that diamond-free truth is preserved.
        #[arg(long)]
        check_preservation: bool,
        /// Formula depth bound for the preservation check.
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Write the transformed model to this file as JSON.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Render a model (or bare frame) as a DOT digraph on stdout.
    Dot { model: PathBuf },
    /// Operate on the packaged corpus of figures, proofs and targets.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Re-check every packaged verdict.
    Verify,
}

/// A usage or format error: printed to stderr, exit status 2.
struct CliError(String);

impl CliError {
    fn new(msg: impl Into<String>) -> CliError {
        CliError(msg.into())
    }
}

type CliResult = Result<i32, CliError>;

/// Run the tool on an argument list (without the leading program name) and
/// return the process exit status.
pub fn run<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    let full = std::iter::once("ckscope".to_string()).chain(argv);
    let cli = match Cli::try_parse_from(full) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    OK
                }
                _ => {
                    eprint!("{e}");
                    USAGE_ERROR
                }
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            USAGE_ERROR
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    let json = cli.json;
    match cli.cmd {
        Cmd::Parse { formula } => cmd_parse(&formula, json),
        Cmd::Print { formula } => cmd_print(&formula, json),
        Cmd::CheckProof { file } => cmd_check_proof(&file, json),
        Cmd::Builtin { name, emit, check } => cmd_builtin(&name, emit.as_deref(), check, json),
        Cmd::ModelCheck { model, at, formula } => cmd_model_check(&model, &at, &formula, json),
        Cmd::FrameValid { frame, schema } => cmd_frame_valid(&frame, &schema, json),
        Cmd::CheckFrame {
            frame,
            conditions,
            explain,
        } => cmd_check_frame(&frame, &conditions, explain, json),
        Cmd::Decide {
            formula,
            axioms,
            user_schemas,
            max_worlds,
            mode,
            emit_model,
            dot,
        } => cmd_decide(
            &formula,
            &axioms,
            &user_schemas,
            max_worlds,
            &mode,
            emit_model.as_deref(),
            dot.as_deref(),
            json,
        ),
        Cmd::Audit {
            axiom,
            max_worlds,
            report,
        } => cmd_audit(&axiom, max_worlds, report.as_deref(), json),
        Cmd::Transform {
            model,
            op,
            check_preservation,
            depth,
            emit,
        } => cmd_transform(&model, &op, check_preservation, depth, emit.as_deref(), json),
        Cmd::Dot { model } => cmd_dot(&model, json),
        Cmd::Corpus { action } => match action {
            CorpusAction::Verify => cmd_corpus_verify(json),
        },
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::new(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::new(format!("cannot write {}: {e}", path.display())))
}

fn parse_formula(src: &str) -> Result<Formula, CliError> {
    parse(src).map_err(|e| CliError::new(format!("malformed formula `{src}`: {e}")))
}

fn load_model(path: &Path) -> Result<Model, CliError> {
    Model::from_json_str(&read_file(path)?)
        .map_err(|e| CliError::new(format!("malformed model file {}: {e}", path.display())))
}

fn parse_axiom_set(axioms: &str, user_schemas: &[String]) -> Result<ckscope::AxiomSet, CliError> {
    let mut extras = BTreeSet::new();
    for part in axioms.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        extras.insert(
            ckscope::AxiomName::from_str(part).map_err(|e| CliError::new(e.to_string()))?,
        );
    }
    let mut ax = ckscope::AxiomSet::with_extras(extras);
    for schema in user_schemas {
        ax.add_user_schema(parse_formula(schema)?);
    }
    Ok(ax)
}

fn enumeration_options() -> Result<EnumerationOptions, CliError> {
    let mut opts = EnumerationOptions::default();
    if let Ok(raw) = std::env::var("CKSCOPE_MAX_FRAMES") {
        opts.cap = raw.parse::<u128>().map_err(|_| {
            CliError::new(format!(
                "CKSCOPE_MAX_FRAMES must be an unsigned integer, got `{raw}`"
            ))
        })?;
    }
    Ok(opts)
}

fn map_search_error(e: SearchError) -> CliError {
    CliError::new(e.to_string())
}

fn emit(value: Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("JSON output serialises"));
}

fn model_json(m: &Model) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("models serialise");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn ast_tree(f: &Formula, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match f {
        Formula::Bot => writeln!(out, "{pad}Bot").unwrap(),
        Formula::Prop(p) => writeln!(out, "{pad}Prop {p}").unwrap(),
        Formula::And(a, b) => {
            writeln!(out, "{pad}And").unwrap();
            ast_tree(a, indent + 1, out);
            ast_tree(b, indent + 1, out);
        }
        Formula::Or(a, b) => {
            writeln!(out, "{pad}Or").unwrap();
            ast_tree(a, indent + 1, out);
            ast_tree(b, indent + 1, out);
        }
        Formula::Imp(a, b) => {
            writeln!(out, "{pad}Imp").unwrap();
            ast_tree(a, indent + 1, out);
            ast_tree(b, indent + 1, out);
        }
        Formula::Box(a) => {
            writeln!(out, "{pad}Box").unwrap();
            ast_tree(a, indent + 1, out);
        }
        Formula::Dia(a) => {
            writeln!(out, "{pad}Dia").unwrap();
            ast_tree(a, indent + 1, out);
        }
    }
}

fn cmd_parse(formula: &str, json: bool) -> CliResult {
    let f = parse_formula(formula)?;
    if json {
        emit(json!({
            "printed": f.to_string(),
            "depth": f.depth(),
            "props": f.prop_names(),
            "diamond_free": f.is_diamond_free(),
        }));
    } else {
        let mut tree = String::new();
        ast_tree(&f, 0, &mut tree);
        print!("{tree}");
    }
    Ok(OK)
}

fn cmd_print(formula: &str, json: bool) -> CliResult {
    let f = parse_formula(formula)?;
    if json {
        emit(json!({ "printed": f.to_string() }));
    } else {
        println!("{f}");
    }
    Ok(OK)
}

fn cmd_check_proof(file: &Path, json: bool) -> CliResult {
    let (ax, proof) = proof_from_json_str(&read_file(file)?)
        .map_err(|e| CliError::new(format!("malformed proof file {}: {e}", file.display())))?;
    match check_proof(&proof, &ax) {
        Ok(end) => {
            if json {
                emit(json!({
                    "ok": true,
                    "axioms": ax.to_string(),
                    "lines": proof.len(),
                    "conclusion": end.to_string(),
                }));
            } else {
                println!("ok: {} lines in {} ending at {}", proof.len(), ax, end);
            }
            Ok(OK)
        }
        Err(e) => {
            if json {
                emit(json!({ "ok": false, "error": e.to_string() }));
            } else {
                println!("proof does not check: {e}");
            }
            Ok(VERDICT_FALSE)
        }
    }
}

fn cmd_builtin(name: &str, emit_path: Option<&Path>, check: bool, json: bool) -> CliResult {
    let Some((proof, ax)) = builtin_proof(name) else {
        return Err(CliError::new(format!(
            "unknown builtin `{name}` (available: {})",
            BUILTIN_NAMES.join(", ")
        )));
    };
    let end = proof
        .conclusion()
        .expect("packaged proofs are nonempty")
        .clone();
    let checked = if check {
        Some(check_proof(&proof, &ax).is_ok())
    } else {
        None
    };
    if let Some(path) = emit_path {
        let doc = proof_to_doc(&ax, &proof);
        let mut text =
            serde_json::to_string_pretty(&doc).expect("proof documents serialise");
        text.push('\n');
        write_file(path, &text)?;
    }
    if json {
        emit(json!({
            "name": name,
            "axioms": ax.to_string(),
            "lines": proof.len(),
            "conclusion": end.to_string(),
            "checked": checked,
        }));
    } else {
        println!("{name}: {} lines in {} ending at {end}", proof.len(), ax);
        if let Some(ok) = checked {
            println!("checks: {ok}");
        }
    }
    Ok(if checked == Some(false) { VERDICT_FALSE } else { OK })
}

fn cmd_model_check(model: &Path, at: &str, formula: &str, json: bool) -> CliResult {
    let m = load_model(model)?;
    let f = parse_formula(formula)?;
    let w = m
        .frame()
        .world_index(at)
        .ok_or_else(|| CliError::new(format!("no world named `{at}` in {}", model.display())))?;
    let forces = m.forces(w, &f);
    if json {
        emit(json!({ "world": at, "formula": f.to_string(), "forces": forces }));
    } else {
        println!("{forces}");
    }
    Ok(if forces { OK } else { VERDICT_FALSE })
}

fn cmd_frame_valid(frame: &Path, schema: &str, json: bool) -> CliResult {
    let fr = ckscope::Frame::from_json_str(&read_file(frame)?)
        .map_err(|e| CliError::new(format!("malformed frame file {}: {e}", frame.display())))?;
    let f = parse_formula(schema)?;
    let valid = frame_validates_schema(&fr, &f);
    if json {
        emit(json!({ "schema": f.to_string(), "valid": valid }));
    } else {
        println!("{valid}");
    }
    Ok(if valid { OK } else { VERDICT_FALSE })
}

fn cmd_check_frame(frame: &Path, conditions: &str, explain: bool, json: bool) -> CliResult {
    let fr = ckscope::Frame::from_json_str(&read_file(frame)?)
        .map_err(|e| CliError::new(format!("malformed frame file {}: {e}", frame.display())))?;
    let list: Vec<ConditionName> = if conditions.trim() == "all" {
        CONDITION_NAMES.to_vec()
    } else {
        conditions
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| ConditionName::from_str(s).map_err(|e| CliError::new(e.to_string())))
            .collect::<Result<_, _>>()?
    };
    let mut rows = Vec::new();
    for c in list {
        let witness = violation(&fr, c);
        rows.push((c, witness));
    }
    if json {
        let table: Vec<Value> = rows
            .iter()
            .map(|(c, witness)| {
                json!({
                    "condition": c,
                    "holds": witness.is_none(),
                    "witness": witness.as_ref().map(|ws| {
                        ws.iter().map(|&w| fr.name(w)).collect::<Vec<_>>()
                    }),
                })
            })
            .collect();
        emit(json!({ "conditions": table }));
    } else {
        for (c, witness) in &rows {
            println!("{c}: {}", witness.is_none());
            if explain {
                if let Some(ws) = witness {
                    let names: Vec<&str> = ws.iter().map(|&w| fr.name(w)).collect();
                    println!("  witness: ({})", names.join(", "));
                }
            }
        }
    }
    Ok(OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_decide(
    formula: &str,
    axioms: &str,
    user_schemas: &[String],
    max_worlds: usize,
    mode: &str,
    emit_model: Option<&Path>,
    dot_path: Option<&Path>,
    json: bool,
) -> CliResult {
    let f = parse_formula(formula)?;
    let ax = parse_axiom_set(axioms, user_schemas)?;
    let mode = match mode {
        "suff" => FilterMode::Suff,
        "corr" => FilterMode::Corr,
        "schema" => FilterMode::Schema,
        other => {
            return Err(CliError::new(format!(
                "unknown mode `{other}` (expected suff, corr or schema)"
            )))
        }
    };
    let opts = enumeration_options()?;
    let result = find_countermodel(&f, &ax, max_worlds, mode, &opts).map_err(map_search_error)?;
    match result.outcome {
        SearchOutcome::Countermodel { model, world } => {
            let world_name = model.frame().name(world).to_string();
            if let Some(path) = emit_model {
                write_file(path, &model_json(&model))?;
            }
            if let Some(path) = dot_path {
                write_file(path, &dot::to_dot(&model))?;
            }
            if json {
                emit(json!({
                    "outcome": "countermodel",
                    "world": world_name,
                    "model": serde_json::to_value(&model).expect("models serialise"),
                    "stats": serde_json::to_value(&result.stats).expect("stats serialise"),
                }));
            } else {
                println!(
                    "countermodel: {} worlds, {} fails at `{world_name}` \
                     ({} frames, {} valuations examined)",
                    model.frame().n(),
                    f,
                    result.stats.frames,
                    result.stats.valuations
                );
            }
            Ok(VERDICT_FALSE)
        }
        SearchOutcome::Exhausted { max_worlds } => {
            if json {
                emit(json!({
                    "outcome": "exhausted",
                    "max_worlds": max_worlds,
                    "stats": serde_json::to_value(&result.stats).expect("stats serialise"),
                }));
            } else {
                println!(
                    "no countermodel up to {max_worlds} worlds \
                     ({} frames, {} valuations examined)",
                    result.stats.frames, result.stats.valuations
                );
            }
            Ok(OK)
        }
    }
}

fn cmd_audit(axiom: &str, max_worlds: usize, report_path: Option<&Path>, json: bool) -> CliResult {
    let axiom =
        ckscope::AxiomName::from_str(axiom).map_err(|e| CliError::new(e.to_string()))?;
    let opts = enumeration_options()?;
    let report = correspondence_audit(axiom, max_worlds, &opts).map_err(map_search_error)?;
    if let Some(path) = report_path {
        let mut text =
            serde_json::to_string_pretty(&report).expect("audit reports serialise");
        text.push('\n');
        write_file(path, &text)?;
    }
    if json {
        emit(serde_json::to_value(&report).expect("audit reports serialise"));
    } else {
        println!(
            "{}: {} over {} frames (≤ {} worlds)",
            axiom,
            if report.pass { "PASS" } else { "FAIL" },
            report.frames,
            report.max_worlds
        );
        for (t, count) in &report.buckets {
            println!(
                "  suff={} corr={} valid={}: {count}",
                t.suff, t.corr, t.valid
            );
        }
        for v in &report.violations {
            println!("  violation: {} ({} worlds)", v.reason, v.frame.n());
        }
    }
    Ok(if report.pass { OK } else { VERDICT_FALSE })
}

fn cmd_transform(
    model: &Path,
    op: &str,
    check_preservation: bool,
    depth: usize,
    emit_path: Option<&Path>,
    json: bool,
) -> CliResult {
    let m = load_model(model)?;
    let op = TransformOp::from_str(op).map_err(|e| CliError::new(e.to_string()))?;
    let report = transform_report(
        &model.display().to_string(),
        &m,
        op,
        check_preservation.then_some(depth),
    );
    if let Some(path) = emit_path {
        write_file(path, &model_json(&report.output))?;
    }
    if json {
        emit(serde_json::to_value(&report).expect("transform reports serialise"));
    } else {
        println!(
            "{op}: {} worlds -> {} worlds",
            m.frame().n(),
            report.output.frame().n()
        );
        for (c, ok) in &report.conditions {
            println!("  {c}: {ok}");
        }
        match &report.preservation {
            Some(PreservationOutcome::Pass { profiles }) => {
                println!("  preservation: pass ({profiles} truth profiles)");
            }
            Some(PreservationOutcome::Fail { world, formula }) => {
                println!(
                    "  preservation: FAIL at `{}` on {formula}",
                    m.frame().name(*world)
                );
            }
            None => {}
        }
    }
    Ok(if report.is_clean() { OK } else { VERDICT_FALSE })
}

fn cmd_dot(model: &Path, _json: bool) -> CliResult {
    let m = load_model(model)?;
    print!("{}", dot::to_dot(&m));
    Ok(OK)
}

fn cmd_corpus_verify(json: bool) -> CliResult {
    let checks = corpus::verify();
    let pass = checks.iter().all(|c| c.ok);
    if json {
        let list: Vec<Value> = checks
            .iter()
            .map(|c| json!({ "name": c.name, "ok": c.ok, "detail": c.detail }))
            .collect();
        emit(json!({ "pass": pass, "checks": list }));
    } else {
        for c in &checks {
            if c.ok {
                println!("ok   {}", c.name);
            } else {
                println!("FAIL {}: {}", c.name, c.detail);
            }
        }
        println!(
            "{} of {} corpus checks passed",
            checks.iter().filter(|c| c.ok).count(),
            checks.len()
        );
    }
    Ok(if pass { OK } else { VERDICT_FALSE })
}
