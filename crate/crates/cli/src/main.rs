use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use enumfunctor::error::Error;
use enumfunctor::examples::{
    parse_config, run_bundle, run_example, transform, Format, RunConfig, DIRECTIONS, EXAMPLES, NEGATIVE_CONTROLS,
};
use enumfunctor::formats::{parse_bundle, write_bundle};
use enumfunctor::report::{Report, Verdict};
use serde_json::json;

/// Default config file, read when `--config` is absent.
const CONFIG_ENV: &str = "ENUMFUNCTOR_CONFIG";

#[derive(Parser)]
#[command(name = "enumfunctor", version, about = "Enumerable functors, computable functors and effective interpretations, checked on finite prefixes")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// key = value config file; defaults to $ENUMFUNCTOR_CONFIG
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    stage: Option<u64>,
    #[arg(long, global = true)]
    prefix: Option<usize>,
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[arg(long, global = true, value_parser = ["text", "structured"])]
    format: Option<String>,
    /// Count inconclusive verdicts as failures
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in examples
    List,
    /// Run the checks of an example or a bundle file
    Verify { target: String },
    /// Transform a bundle file
    Transform {
        input: PathBuf,
        #[arg(long, value_parser = DIRECTIONS.to_vec())]
        to: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config(common: &Common) -> Result<RunConfig, Error> {
    let path = common.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut cfg = match path {
        Some(p) => parse_config(&p.display().to_string(), &read(&p)?)?,
        None => RunConfig::default(),
    };
    let bad = |msg: String| Error::InvalidInput(msg);
    if let Some(v) = common.stage {
        cfg.stage = v;
    }
    if let Some(v) = common.prefix {
        cfg.prefix = v;
    }
    if let Some(v) = common.budget {
        cfg.budget = v;
    }
    if let Some(f) = &common.format {
        cfg.set("format", f).map_err(bad)?;
    }
    cfg.strict |= common.strict;
    cfg.validate().map_err(bad)?;
    Ok(cfg)
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn read(p: &Path) -> Result<String, Error> {
    std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn structured(r: &Report) -> String {
    let checks: Vec<_> = r
        .checks
        .iter()
        .map(|c| match &c.verdict {
            Verdict::Fail { witness } => json!({"name": c.name, "verdict": "fail", "witness": witness.to_string()}),
            v => json!({"name": c.name, "verdict": v.label()}),
        })
        .collect();
    let doc = json!({
        "title": r.title,
        "notes": r.notes,
        "checks": checks,
        "summary": {"pass": r.count("pass"), "fail": r.count("fail"), "inconclusive": r.count("inconclusive")},
    });
    format!("{}\n", serde_json::to_string_pretty(&doc).expect("json values serialize"))
}

fn verify(target: &str, cfg: &RunConfig) -> Result<ExitCode, Error> {
    let report = if EXAMPLES.iter().any(|e| e.name == target) || NEGATIVE_CONTROLS.contains(&target) {
        run_example(target, cfg)?
    } else if Path::new(target).is_file() {
        run_bundle(target, &parse_bundle(target, &read(Path::new(target))?)?, cfg)?
    } else {
        return Err(Error::UnknownName(target.into()));
    };
    emit(&match cfg.format {
        Format::Text => report.render_text(),
        Format::Structured => structured(&report),
    });
    let failed = report.has_failure() || (cfg.strict && report.count("inconclusive") > 0);
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let cfg = config(&cli.common)?;
    match cli.command.unwrap_or(Command::List) {
        Command::List => {
            emit(&EXAMPLES.iter().map(|e| format!("{:<26}{}\n", e.name, e.summary)).collect::<String>());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { target } => verify(&target, &cfg),
        Command::Transform { input, to, out } => {
            let name = input.display().to_string();
            let bundle = parse_bundle(&name, &read(&input)?)?;
            let text = write_bundle(&transform(bundle, &to)?);
            std::fs::write(&out, text).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
