use std::fs;
use std::io::Read;
use std::path::Path;

use scalebridge::dsl::{parse_expression, parse_relation, solve_for, Env, ParseError};
use scalebridge::engine::{builtin_catalog, export_catalog, parse_catalog, run_catalog, run_chain, EngineError};
use scalebridge::registry::ConfigError;
use scalebridge::{Quantity64, Registry64};
use serde_json::json;

use crate::{CatalogCommand, CheckArgs, Cli, Command, EvalArgs, Failure, Format, Overrides, SolveArgs};

pub const REGISTRY_ENV: &str = "SCALEBRIDGE_REGISTRY";

pub fn run(cli: Cli) -> Result<(), Failure> {
    let registry_file = cli.registry.clone().or_else(|| std::env::var_os(REGISTRY_ENV).map(Into::into));
    let base = || load_registry(registry_file.as_deref());
    match cli.command {
        Command::Catalog(c) => catalog(c),
        Command::Check(args) => check(args, base()?),
        Command::Eval(args) => eval(args, base()?),
        Command::Solve(args) => solve(args, base()?),
        Command::Simulate(args) => crate::scenario::simulate(args),
    }
}

fn read_source(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))
    }
}

fn config_failure(e: ConfigError) -> Failure {
    if e.is_evaluation() {
        Failure::Eval(e.to_string())
    } else {
        Failure::Usage(e.to_string())
    }
}

fn load_registry(file: Option<&Path>) -> Result<Registry64, Failure> {
    let mut reg = Registry64::cgs_default();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        reg.apply_config(&text, &path.display().to_string()).map_err(config_failure)?;
    }
    Ok(reg)
}

/// `--set` values arrive as `SYM=VAL` optionally followed by a unit
/// expression; applied in order, so a repeated symbol keeps its last value.
fn apply_overrides(reg: &mut Registry64, o: &Overrides) -> Result<(), Failure> {
    let mut lines: Vec<String> = Vec::new();
    for item in &o.set {
        if item.contains('=') {
            lines.push(item.clone());
        } else if let Some(last) = lines.last_mut() {
            if last.contains(' ') {
                return Err(Failure::Usage(format!("--set: unexpected argument {item:?}")));
            }
            last.push(' ');
            last.push_str(item);
        } else {
            return Err(Failure::Usage(format!("--set expects SYM=VALUE, got {item:?}")));
        }
    }
    for (i, line) in lines.iter().enumerate() {
        reg.apply_assignment(line, "--set", i + 1).map_err(config_failure)?;
    }
    Ok(())
}

fn parse_failure(text: &str, e: &ParseError) -> Failure {
    let caret = format!("{}^", " ".repeat(e.offset().min(text.len())));
    Failure::Usage(format!("{e}\n  {text}\n  {caret}"))
}

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn print_quantity(q: &Quantity64, format: Format) {
    match format {
        Format::Table => println!("{}  {}", sig9(q.magnitude()), q.dimension()),
        Format::Json => println!(
            "{}",
            json!({ "value": q.magnitude(), "dimension": q.dimension().to_string() })
        ),
    }
}

fn catalog(cmd: CatalogCommand) -> Result<(), Failure> {
    match cmd {
        CatalogCommand::List { format } => {
            let entries = builtin_catalog();
            match format {
                Format::Table => {
                    for e in &entries {
                        println!(
                            "{:<9} {:<34} {:>5}  {} {} {}",
                            e.name(),
                            e.paper_tag(),
                            e.relation.tol_decades(),
                            e.relation.lhs,
                            e.relation.operator.symbol(),
                            e.relation.rhs
                        );
                    }
                }
                Format::Json => {
                    let rows: Vec<_> = entries
                        .iter()
                        .map(|e| {
                            json!({
                                "name": e.name(),
                                "paper_tag": e.paper_tag(),
                                "relation": e.relation.to_string(),
                                "tol_decades": e.relation.tol_decades(),
                                "description": e.description,
                                "expected_log10_ratio": e.expected_log10_ratio,
                            })
                        })
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&json!({ "entries": rows })).expect("json"));
                }
            }
            Ok(())
        }
        CatalogCommand::Export => {
            print!("{}", export_catalog(&builtin_catalog()));
            Ok(())
        }
        CatalogCommand::Parse { file } => {
            let text = read_source(&file)?;
            let entries = parse_catalog(&text).map_err(|(line, e)| Failure::Usage(format!("{file}:{line}: {e}")))?;
            print!("{}", export_catalog(&entries));
            Ok(())
        }
    }
}

fn engine_failure(e: EngineError) -> Failure {
    Failure::Eval(e.to_string())
}

fn check(args: CheckArgs, mut reg: Registry64) -> Result<(), Failure> {
    apply_overrides(&mut reg, &args.overrides)?;
    if let Some(t) = args.tol_decades {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Failure::Usage(format!("--tol-decades must be finite and non-negative, got {t}")));
        }
    }
    let entries = match &args.catalog {
        None => builtin_catalog(),
        Some(path) => {
            let name = path.display().to_string();
            let text = read_source(&name)?;
            parse_catalog(&text).map_err(|(line, e)| Failure::Usage(format!("{name}:{line}: {e}")))?
        }
    };
    let report = run_catalog(&entries, &reg, args.tol_decades).map_err(engine_failure)?;
    match args.format {
        Format::Table => print!("{}", report.to_table()),
        Format::Json => println!("{}", report.to_json()),
    }
    if report.live_failures().next().is_some() {
        Err(Failure::Check)
    } else {
        Ok(())
    }
}

fn eval(args: EvalArgs, mut reg: Registry64) -> Result<(), Failure> {
    apply_overrides(&mut reg, &args.overrides)?;
    let expr = parse_expression(&args.expr).map_err(|e| parse_failure(&args.expr, &e))?;
    let q = scalebridge::dsl::evaluate(&expr, &Env::new(&reg)).map_err(|e| Failure::Eval(e.to_string()))?;
    print_quantity(&q, args.format);
    Ok(())
}

fn solve(args: SolveArgs, mut reg: Registry64) -> Result<(), Failure> {
    apply_overrides(&mut reg, &args.overrides)?;
    let env = Env::new(&reg);
    if let Some(chain) = args.chain {
        let report = run_chain(chain.as_str(), &env).map_err(engine_failure)?;
        match args.format {
            Format::Table => print!("{}", report.to_table()),
            Format::Json => println!("{}", report.to_json()),
        }
        return if report.pass() { Ok(()) } else { Err(Failure::Check) };
    }
    let text = args.relation.expect("clap requires a relation without --chain");
    let unknown = args.unknown.expect("clap requires --for without --chain");
    let rel = parse_relation(&text).map_err(|e| parse_failure(&text, &e))?;
    let solution = solve_for(&rel, &unknown, &env).map_err(|e| Failure::Eval(e.to_string()))?;
    match args.format {
        Format::Table => {
            println!("{unknown} = {}", solution.closed_form);
            println!("{unknown} = {}  {}", sig9(solution.value.magnitude()), solution.value.dimension());
        }
        Format::Json => println!(
            "{}",
            json!({
                "symbol": unknown,
                "closed_form": solution.closed_form.to_string(),
                "value": solution.value.magnitude(),
                "dimension": solution.value.dimension().to_string(),
            })
        ),
    }
    Ok(())
}
