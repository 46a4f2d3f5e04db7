//! `uml2ts`: batch front end for the verification pipeline.
//!
//! Exit codes: 0 on success with all properties satisfied, 1 when a checked
//! property is violated, 2 on usage, parse or validation errors.

mod props;
mod tsdump;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use uml2ts_core::check::{check, format_trace, Verdict};
use uml2ts_core::ctl::{instantiate_pattern, parse_ctl, render_ctl, Formula, PatternSpec};
use uml2ts_core::nusmv::{nusmv_binary, run_nusmv, NUSMV_ENV};
use uml2ts_core::pipeline::build_unified;
use uml2ts_core::smv::{emit_smv, EmitOptions};
use uml2ts_core::ubd::load_bundle;
use uml2ts_core::UnifiedTs;

#[derive(Parser)]
#[command(
    name = "uml2ts",
    about = "Merge UML behavioral diagrams into a transition system, emit NuSMV source, and check CTL properties",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the unified transition system and print its dump and statistics
    Build(BuildArgs),
    /// Generate NuSMV source from diagrams or a previously built dump
    Emit(EmitArgs),
    /// Check CTL properties against the unified transition system
    Check(CheckArgs),
    /// Instantiate a specification pattern as a CTL formula
    Pattern(PatternArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Two or three .ubd diagram files (the sequence diagram is mandatory)
    #[arg(required = true)]
    diagrams: Vec<PathBuf>,
    /// Write the dump here instead of stdout
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Print only `declared=<n> reachable=<n>`
    #[arg(long)]
    stats_only: bool,
}

#[derive(Args)]
struct EmitArgs {
    /// Diagram files, or a single transition-system dump written by `build`
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// File with one CTL formula or pattern line per line
    #[arg(long)]
    props: Option<PathBuf>,
    /// Write the .smv here instead of stdout
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Keep hyphens in emitted identifiers instead of mapping them to `_`
    #[arg(long)]
    paper_style: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Two or three .ubd diagram files
    #[arg(required = true)]
    diagrams: Vec<PathBuf>,
    /// File with one CTL formula or pattern line per line
    #[arg(long)]
    props: Option<PathBuf>,
    /// Inline CTL formula; may repeat
    #[arg(long = "ctl")]
    formulas: Vec<String>,
    /// Machine-readable report on stdout
    #[arg(long)]
    json: bool,
    /// Also run NuSMV on the emitted model and compare verdicts
    #[arg(long)]
    cross_validate: bool,
}

#[derive(Args)]
struct PatternArgs {
    /// Pattern name: absence, existence, universality, response, precedence
    pattern: String,
    /// Scope: global, before-r, after-q, between-q-and-r, after-q-until-r
    #[arg(long)]
    scope: String,
    /// Primary proposition
    #[arg(long)]
    p: String,
    /// Scope anchor Q
    #[arg(long)]
    q: Option<String>,
    /// Scope anchor R
    #[arg(long)]
    r: Option<String>,
    /// Effect proposition for response/precedence
    #[arg(long)]
    s: Option<String>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode, String> {
    match Cli::parse().command {
        Command::Build(args) => cmd_build(args),
        Command::Emit(args) => cmd_emit(args),
        Command::Check(args) => cmd_check(args),
        Command::Pattern(args) => cmd_pattern(args),
    }
}

fn build_from_diagrams(paths: &[PathBuf]) -> Result<UnifiedTs, String> {
    let bundle = load_bundle(paths).map_err(|e| e.to_string())?;
    build_unified(&bundle).map_err(|report| format!("validation failed:\n{report}"))
}

fn write_out(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_build(args: BuildArgs) -> Result<ExitCode, String> {
    let uts = build_from_diagrams(&args.diagrams)?;
    let (declared, reachable) = uts.reachable_stats();
    if args.stats_only {
        println!("declared={declared} reachable={reachable}");
        return Ok(ExitCode::SUCCESS);
    }
    let dump = format!(
        "# declared={declared}\n# reachable={reachable}\n{}",
        uts.dump()
    );
    write_out(&args.out, &dump)?;
    if args.out.is_some() {
        println!("declared={declared} reachable={reachable}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_emit(args: EmitArgs) -> Result<ExitCode, String> {
    let uts = if args.inputs.len() == 1
        && args.inputs[0].extension().map(|e| e != "ubd").unwrap_or(true)
    {
        let text = std::fs::read_to_string(&args.inputs[0])
            .map_err(|e| format!("cannot read {}: {e}", args.inputs[0].display()))?;
        tsdump::parse_dump(&text)?
    } else {
        build_from_diagrams(&args.inputs)?
    };
    let properties = match &args.props {
        Some(path) => props::load_props(path)?,
        None => Vec::new(),
    };
    let opts = EmitOptions {
        paper_style: args.paper_style,
    };
    let smv = emit_smv(&uts, &properties, opts);
    write_out(&args.out, &smv)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode, String> {
    let uts = build_from_diagrams(&args.diagrams)?;
    let mut properties: Vec<Formula> = match &args.props {
        Some(path) => props::load_props(path)?,
        None => Vec::new(),
    };
    for (i, text) in args.formulas.iter().enumerate() {
        let f = parse_ctl(text).map_err(|e| format!("--ctl #{}: {e}", i + 1))?;
        properties.push(f);
    }
    if properties.is_empty() {
        return Err("no properties given (use --props or --ctl)".into());
    }

    let mut verdicts: Vec<Verdict> = Vec::new();
    for f in &properties {
        verdicts.push(check(&uts, f).map_err(|e| e.to_string())?);
    }

    if args.cross_validate {
        cross_validate(&uts, &properties, &verdicts)?;
    }

    let any_violated = verdicts.iter().any(|v| !v.satisfied);
    if args.json {
        println!("{}", json_report(&uts, &verdicts));
    } else {
        for v in &verdicts {
            let word = if v.satisfied { "SATISFIED" } else { "VIOLATED" };
            println!("{word}  {}", render_ctl(&v.formula));
            if let Some(trace) = &v.trace {
                print!("{}", format_trace(&uts, trace));
            } else if v.trace_unsupported {
                println!("(no trace: formula shape outside the witness fragment)");
            }
        }
    }
    Ok(if any_violated {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cross_validate(
    uts: &UnifiedTs,
    properties: &[Formula],
    verdicts: &[Verdict],
) -> Result<(), String> {
    let Some(binary) = nusmv_binary() else {
        eprintln!("cross-validation skipped: {NUSMV_ENV} does not point at a NuSMV binary");
        return Ok(());
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.smv");
    let smv = emit_smv(uts, properties, EmitOptions::default());
    std::fs::write(&path, &smv).map_err(|e| e.to_string())?;
    let external = run_nusmv(&binary, &path).map_err(|e| e.to_string())?;
    if external.len() != verdicts.len() {
        return Err(format!(
            "NuSMV reported {} verdicts for {} properties",
            external.len(),
            verdicts.len()
        ));
    }
    for ((f, ours), theirs) in properties.iter().zip(verdicts).zip(external) {
        if ours.satisfied != theirs {
            return Err(format!(
                "cross-validation mismatch on {}: embedded={} NuSMV={}",
                render_ctl(f),
                ours.satisfied,
                theirs
            ));
        }
    }
    eprintln!("cross-validation: NuSMV agrees on all {} properties", verdicts.len());
    Ok(())
}

fn json_report(uts: &UnifiedTs, verdicts: &[Verdict]) -> String {
    let (declared, reachable) = uts.reachable_stats();
    let verdicts: Vec<serde_json::Value> = verdicts
        .iter()
        .map(|v| {
            let trace = v.trace.as_ref().map(|t| {
                let states: Vec<serde_json::Value> = t
                    .prefix
                    .iter()
                    .map(|&i| {
                        let state = uts.state(i);
                        let guards: serde_json::Map<String, serde_json::Value> = (0..uts
                            .domain
                            .len())
                            .map(|gi| {
                                (
                                    uts.domain.name(gi).to_string(),
                                    serde_json::Value::String(state.gvs.get(gi).to_string()),
                                )
                            })
                            .collect();
                        serde_json::json!({
                            "name": uts.render_state(i),
                            "guards": guards,
                        })
                    })
                    .collect();
                serde_json::json!({
                    "states": states,
                    "loop_start": t.loop_start,
                })
            });
            serde_json::json!({
                "formula": render_ctl(&v.formula),
                "satisfied": v.satisfied,
                "trace": trace,
                "trace_unsupported": v.trace_unsupported,
            })
        })
        .collect();
    serde_json::json!({
        "stats": {"declared": declared, "reachable": reachable},
        "verdicts": verdicts,
    })
    .to_string()
}

fn cmd_pattern(args: PatternArgs) -> Result<ExitCode, String> {
    let pattern = args.pattern.parse().map_err(|e| format!("{e}"))?;
    let scope = args.scope.parse().map_err(|e| format!("{e}"))?;
    let parse_part = |label: &str, text: &Option<String>| -> Result<Option<Formula>, String> {
        text.as_ref()
            .map(|t| parse_ctl(t).map_err(|e| format!("--{label}: {e}")))
            .transpose()
    };
    let spec = PatternSpec {
        pattern,
        scope,
        p: parse_ctl(&args.p).map_err(|e| format!("--p: {e}"))?,
        q: parse_part("q", &args.q)?,
        r: parse_part("r", &args.r)?,
        s: parse_part("s", &args.s)?,
    };
    let formula = instantiate_pattern(&spec).map_err(|e| e.to_string())?;
    println!("{}", render_ctl(&formula));
    Ok(ExitCode::SUCCESS)
}
