//! `idlc`: parse dependency specifications, export their constraint
//! problems and run the analysis operations from the command line.
//!
//! Exit status: 0 when the answer is affirmative (or there is nothing to
//! judge), 1 when it is negative, 2 on usage, parse or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use idl_core::idl::{parse_idl, render_dependency};
use idl_core::model::{
    load_idl4oas, load_spec_files, parse_document, parse_request_literal, request_from_map,
};
use idl_core::{
    render_csp, render_idl, AnalysisOptions, Analyzer, IntWindow, OnlyOneSemantics, OperationSpec,
    Request,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "idlc",
    version,
    about = "Analyze inter-parameter dependencies of web API operations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Is the specification consistent, with no dead or false-optional parameters?
    CheckSpec(Common),
    /// Full report: consistency, dead and false-optional parameters, request count.
    Analyze(Common),
    /// Is the request valid?
    CheckRequest(RequestArgs),
    /// Can the partial request be extended into a valid one?
    CheckPartial(RequestArgs),
    /// Parameters that can never be sent.
    DeadParams(Common),
    /// Optional parameters that every valid request must send.
    FalseOptionals(Common),
    /// Every valid request.
    AllRequests(Common),
    /// Number of valid requests.
    CountRequests(Common),
    /// Valid requests picked at random (seed with IDLC_SEED).
    RandomRequest(RandomArgs),
    /// The constraint problem the specification compiles to.
    ExportCsp(Common),
    /// Parse and print the dependencies in canonical form.
    Parse(Common),
}

#[derive(Args)]
struct Common {
    /// OpenAPI document with `x-dependencies` on its operations.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["idl", "params"], requires = "operation")]
    oas: Option<PathBuf>,
    /// Operation inside the OpenAPI document: an operationId or "METHOD /path".
    #[arg(long, value_name = "ID", requires = "oas")]
    operation: Option<String>,
    /// Dependency document.
    #[arg(long, value_name = "PATH", required_unless_present = "oas")]
    idl: Option<PathBuf>,
    /// Parameter declarations (YAML or JSON list) for --idl.
    #[arg(long, value_name = "PATH", requires = "idl")]
    params: Option<PathBuf>,
    /// Print a JSON object instead of text.
    #[arg(long)]
    json: bool,
    /// Fixed window LO:HI for integers with no declared bounds.
    #[arg(long, value_name = "LO:HI", value_parser = parse_window)]
    int_window: Option<IntWindow>,
    /// Meaning of OnlyOne.
    #[arg(long, value_enum, default_value_t = OnlyOneArg::Exact)]
    onlyone: OnlyOneArg,
}

#[derive(Args)]
struct RequestArgs {
    #[command(flatten)]
    common: Common,
    /// Request as name=value pairs separated by commas.
    #[arg(
        long,
        conflicts_with = "request_file",
        required_unless_present = "request_file"
    )]
    request: Option<String>,
    /// Request as a YAML or JSON map.
    #[arg(long, value_name = "PATH")]
    request_file: Option<PathBuf>,
}

#[derive(Args)]
struct RandomArgs {
    #[command(flatten)]
    common: Common,
    /// How many requests to draw.
    #[arg(short = 'n', long, default_value_t = 1)]
    count: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnlyOneArg {
    Exact,
    AtMostOne,
}

fn parse_window(s: &str) -> Result<IntWindow, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("LO: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("HI: {e}"))?;
    if lo > hi {
        return Err(format!("empty window {lo}:{hi}"));
    }
    Ok(IntWindow::Fixed { lo, hi })
}

/// The JSON envelope. Every command emits every field, `null` when it does
/// not apply.
#[derive(Serialize, Default)]
#[serde(rename_all = "camelCase")]
struct Output {
    command: &'static str,
    operation_id: String,
    verdict: Option<&'static str>,
    consistent: Option<bool>,
    valid_spec: Option<bool>,
    dead_params: Option<Vec<String>>,
    false_optional_params: Option<Vec<String>>,
    request_count: Option<u64>,
    requests: Option<Vec<Request>>,
    request: Option<Request>,
    violated: Option<Vec<String>>,
    csp: Option<String>,
    idl: Option<String>,
    diagnostics: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("idlc: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    let (name, common) = match &command {
        Command::CheckSpec(c) => ("check-spec", c),
        Command::Analyze(c) => ("analyze", c),
        Command::CheckRequest(r) => ("check-request", &r.common),
        Command::CheckPartial(r) => ("check-partial", &r.common),
        Command::DeadParams(c) => ("dead-params", c),
        Command::FalseOptionals(c) => ("false-optionals", c),
        Command::AllRequests(c) => ("all-requests", c),
        Command::CountRequests(c) => ("count-requests", c),
        Command::RandomRequest(r) => ("random-request", &r.common),
        Command::ExportCsp(c) => ("export-csp", c),
        Command::Parse(c) => ("parse", c),
    };

    // `parse` also accepts a bare dependency document.
    if let (Command::Parse(_), Some(idl), None) = (&command, &common.idl, &common.params) {
        let text =
            std::fs::read_to_string(idl).with_context(|| format!("reading {}", idl.display()))?;
        let model = parse_idl(&text)?;
        let out = Output {
            command: name,
            idl: Some(render_idl(&model)),
            ..Default::default()
        };
        return emit(common.json, out, 0, |o| {
            print!("{}", o.idl.as_deref().unwrap_or_default())
        });
    }

    let spec = load(common)?;
    let options = AnalysisOptions {
        only_one: match common.onlyone {
            OnlyOneArg::Exact => OnlyOneSemantics::Exact,
            OnlyOneArg::AtMostOne => OnlyOneSemantics::AtMostOne,
        },
        int_window: common.int_window.unwrap_or_default(),
    };
    let analyzer = Analyzer::with_options(&spec, options);
    let mut out = Output {
        command: name,
        operation_id: spec.operation_id.clone(),
        ..Default::default()
    };

    match &command {
        Command::CheckSpec(_) => {
            let consistent = analyzer.is_consistent()?;
            let (dead, false_optional) = if consistent {
                (
                    analyzer.dead_parameters()?,
                    analyzer.false_optional_parameters()?,
                )
            } else {
                (Vec::new(), Vec::new())
            };
            let valid = consistent && dead.is_empty() && false_optional.is_empty();
            out.verdict = Some(if valid { "valid" } else { "invalid" });
            out.consistent = Some(consistent);
            out.valid_spec = Some(valid);
            out.dead_params = Some(dead);
            out.false_optional_params = Some(false_optional);
            emit(common.json, out, code(valid), print_spec)
        }
        Command::Analyze(_) => {
            let report = analyzer.analyze_all()?;
            out.verdict = Some(if report.valid_spec {
                "valid"
            } else {
                "invalid"
            });
            out.consistent = Some(report.consistent);
            out.valid_spec = Some(report.valid_spec);
            out.dead_params = Some(report.dead_params);
            out.false_optional_params = Some(report.false_optional_params);
            out.request_count = report.request_count;
            out.diagnostics = report.diagnostics;
            emit(common.json, out, code(report.valid_spec), |o| {
                print_spec(o);
                match o.request_count {
                    Some(n) => println!("requests: {n}"),
                    None => println!("requests: not counted"),
                }
                for d in &o.diagnostics {
                    println!("note: {d}");
                }
            })
        }
        Command::CheckRequest(args) | Command::CheckPartial(args) => {
            let request = read_request(&spec, args)?;
            let partial = matches!(command, Command::CheckPartial(_));
            let valid = if partial {
                analyzer.is_valid_partial_request(&request)?
            } else {
                analyzer.is_valid_request(&request)?
            };
            out.verdict = Some(if valid { "valid" } else { "invalid" });
            if !partial {
                let mut violated: Vec<String> = analyzer
                    .violated_dependencies(&request)
                    .into_iter()
                    .map(|i| format!("{};", render_dependency(&spec.model.dependencies[i])))
                    .collect();
                violated.extend(
                    spec.parameters
                        .iter()
                        .filter(|p| p.required && !request.contains(&p.name))
                        .map(|p| format!("required parameter {} is missing", p.name)),
                );
                out.violated = Some(violated);
            }
            out.request = Some(request);
            emit(common.json, out, code(valid), |o| {
                println!("{}", o.verdict.unwrap_or_default());
                for v in o.violated.iter().flatten() {
                    println!("  violates: {v}");
                }
            })
        }
        Command::DeadParams(_) => {
            let dead = analyzer.dead_parameters()?;
            let none = dead.is_empty();
            out.verdict = Some(if none { "none" } else { "found" });
            out.dead_params = Some(dead);
            emit(common.json, out, code(none), |o| {
                print_list(o.dead_params.as_deref())
            })
        }
        Command::FalseOptionals(_) => {
            let found = analyzer.false_optional_parameters()?;
            let none = found.is_empty();
            out.verdict = Some(if none { "none" } else { "found" });
            out.false_optional_params = Some(found);
            emit(common.json, out, code(none), |o| {
                print_list(o.false_optional_params.as_deref())
            })
        }
        Command::AllRequests(_) => {
            let all: Vec<Request> = analyzer.all_requests()?.into_iter().collect();
            let any = !all.is_empty();
            out.verdict = Some(if any { "satisfiable" } else { "unsatisfiable" });
            out.request_count = Some(all.len() as u64);
            out.requests = Some(all);
            emit(common.json, out, code(any), |o| {
                for r in o.requests.iter().flatten() {
                    println!("{r}");
                }
            })
        }
        Command::CountRequests(_) => {
            out.request_count = Some(analyzer.number_of_requests()?);
            emit(common.json, out, 0, |o| {
                println!("{}", o.request_count.unwrap_or_default())
            })
        }
        Command::RandomRequest(args) => {
            let mut rng = match std::env::var("IDLC_SEED") {
                Ok(seed) => ChaCha8Rng::seed_from_u64(
                    seed.trim()
                        .parse()
                        .context("IDLC_SEED must be an integer")?,
                ),
                Err(_) => ChaCha8Rng::from_entropy(),
            };
            let drawn = analyzer.random_requests(args.count, &mut rng)?;
            let any = !drawn.is_empty();
            out.verdict = Some(if any { "satisfiable" } else { "unsatisfiable" });
            out.request = drawn.first().cloned();
            out.requests = Some(drawn);
            emit(common.json, out, code(any), |o| {
                for r in o.requests.iter().flatten() {
                    println!("{r}");
                }
            })
        }
        Command::ExportCsp(_) => {
            out.csp = Some(render_csp(analyzer.mapped()));
            emit(common.json, out, 0, |o| {
                print!("{}", o.csp.as_deref().unwrap_or_default())
            })
        }
        Command::Parse(_) => {
            out.idl = Some(render_idl(&spec.model));
            emit(common.json, out, 0, |o| {
                print!("{}", o.idl.as_deref().unwrap_or_default())
            })
        }
    }
}

fn code(affirmative: bool) -> u8 {
    if affirmative {
        0
    } else {
        1
    }
}

fn load(common: &Common) -> Result<OperationSpec> {
    match (&common.oas, &common.operation, &common.idl, &common.params) {
        (Some(oas), Some(op), _, _) => {
            let text = std::fs::read_to_string(oas)
                .with_context(|| format!("reading {}", oas.display()))?;
            Ok(load_idl4oas(&text, op)?)
        }
        (None, _, Some(idl), Some(params)) => Ok(load_spec_files(params, idl, None)?),
        (None, _, Some(_), None) => bail!("--idl needs --params for this command"),
        _ => bail!("give either --oas with --operation, or --idl with --params"),
    }
}

fn read_request(spec: &OperationSpec, args: &RequestArgs) -> Result<Request> {
    if let Some(literal) = &args.request {
        return Ok(parse_request_literal(spec, literal)?);
    }
    let path = args
        .request_file
        .as_ref()
        .expect("clap enforces one request source");
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(request_from_map(spec, &parse_document(&text)?)?)
}

fn emit(json: bool, out: Output, code: u8, text: impl FnOnce(&Output)) -> Result<u8> {
    if json {
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        text(&out);
    }
    Ok(code)
}

fn print_spec(o: &Output) {
    println!("{}", o.verdict.unwrap_or_default());
    if o.consistent == Some(false) {
        println!("no request satisfies all dependencies");
    }
    for p in o.dead_params.iter().flatten() {
        println!("dead: {p}");
    }
    for p in o.false_optional_params.iter().flatten() {
        println!("false optional: {p}");
    }
}

fn print_list(items: Option<&[String]>) {
    for p in items.unwrap_or_default() {
        println!("{p}");
    }
}
