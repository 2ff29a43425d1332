//! malscan: command-line front door for the code security pipeline.
//!
//! Exit codes: 0 when no finding reaches the fail threshold, 1 when one
//! does, 2 for usage and scan-level errors.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use malscan_core::backend::{AnalysisBackend, ModelBackend, ModelBackendConfig, RuleBackend};
use malscan_core::eval::{build_bundled_corpus, run_eval, EvalResult};
use malscan_core::orchestrator::{scan_tree, BackendChoice, ScanConfig};
use malscan_core::prescore::RuleSet;
use malscan_core::report::{exit_code, ScanReport};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "malscan",
    version,
    about = "Component-wise code security scanning with CVSS triage and deep analysis",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a file or directory tree and emit a component-wise report.
    Scan(ScanArgs),
    /// Load and validate a rule file, reporting the rule count.
    RulesCheck(RulesCheckArgs),
    /// Re-render Markdown from a stored JSON report without re-scanning.
    Render(RenderArgs),
    /// Scan a labeled corpus and print detection recall/precision.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendFlag {
    Rules,
    Model,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatFlag {
    Json,
    Markdown,
    Both,
}

#[derive(Args)]
struct ScanArgs {
    /// File or directory to scan.
    target: PathBuf,
    /// TOML config file; CLI flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Analysis backend (the model backend reads MALSCAN_API_KEY).
    #[arg(long, value_enum)]
    backend: Option<BackendFlag>,
    /// Rule file path (defaults to the bundled rule set).
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Flag threshold: prescore at or above this routes to deep analysis.
    #[arg(long)]
    threshold: Option<f64>,
    /// Fail threshold: any finding at or above this makes the exit code 1.
    #[arg(long)]
    fail_threshold: Option<f64>,
    /// Analyze every component regardless of prescore.
    #[arg(long)]
    force_analyze_all: bool,
    /// Also summarize components that are not analyzed.
    #[arg(long)]
    summarize_all: bool,
    #[arg(long)]
    max_parallel: Option<usize>,
    #[arg(long)]
    token_budget: Option<usize>,
    /// Include glob (repeatable); empty means all files.
    #[arg(long)]
    include: Vec<String>,
    /// Exclude glob (repeatable).
    #[arg(long)]
    exclude: Vec<String>,
    /// Content-addressed result cache directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Output format(s).
    #[arg(long, value_enum, default_value = "json")]
    format: FormatFlag,
    /// JSON report output path (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Markdown report output path (stdout when omitted).
    #[arg(long)]
    markdown_output: Option<PathBuf>,
    /// Chat-completion endpoint URL for the model backend.
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name for the model backend.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args)]
struct RulesCheckArgs {
    /// Rule file to check (defaults to the bundled rule set).
    rules_file: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Stored JSON report.
    report: PathBuf,
    /// Markdown output path (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Corpus directory of project subdirectories with manifest.toml files;
    /// the bundled corpus is materialized to a temp dir when omitted.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Write the bundled corpus to this directory and exit.
    #[arg(long)]
    export: Option<PathBuf>,
    /// Write the EvalResult as JSON to this path.
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "rules")]
    backend: BackendFlag,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
}

#[derive(Debug, Default, Clone, serde::Deserialize)]
#[serde(default)]
struct ModelFileConfig {
    endpoint: Option<String>,
    model: Option<String>,
    timeout_secs: Option<u64>,
    max_concurrent: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Scan(args) => cmd_scan(args),
        Command::RulesCheck(args) => cmd_rules_check(args),
        Command::Render(args) => cmd_render(args),
        Command::Eval(args) => cmd_eval(args),
    };
    match code {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

/// Load the TOML config file into (ScanConfig, model section).
fn load_config(path: Option<&Path>) -> Result<(ScanConfig, ModelFileConfig)> {
    let Some(path) = path else {
        return Ok((ScanConfig::default(), ModelFileConfig::default()));
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut value: toml::Value = toml::from_str(&text)
        .with_context(|| format!("config {} is not valid TOML", path.display()))?;
    let model = match value.as_table_mut().and_then(|t| t.remove("model")) {
        Some(section) => section
            .try_into()
            .context("invalid [model] section in config")?,
        None => ModelFileConfig::default(),
    };
    let scan: ScanConfig = value.try_into().context("invalid scan configuration")?;
    Ok((scan, model))
}

fn load_rules(explicit: Option<&Path>, cfg: &ScanConfig) -> Result<RuleSet> {
    let path = explicit.or(cfg.rule_set_path.as_deref());
    match path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read rule file {}", path.display()))?;
            RuleSet::load(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
        }
        None => Ok(RuleSet::bundled()),
    }
}

fn build_backend(
    choice: BackendChoice,
    endpoint: Option<String>,
    model: Option<String>,
    file_cfg: &ModelFileConfig,
    max_parallel: usize,
) -> Result<Box<dyn AnalysisBackend>> {
    match choice {
        BackendChoice::Rules => Ok(Box::new(RuleBackend::new())),
        BackendChoice::Model => {
            let endpoint = endpoint
                .or_else(|| file_cfg.endpoint.clone())
                .ok_or_else(|| anyhow!("model backend needs --endpoint or [model].endpoint"))?;
            let model = model
                .or_else(|| file_cfg.model.clone())
                .ok_or_else(|| anyhow!("model backend needs --model or [model].model"))?;
            let mut config = ModelBackendConfig::new(endpoint, model);
            if let Some(t) = file_cfg.timeout_secs {
                config.timeout_secs = t;
            }
            config.max_concurrent = file_cfg.max_concurrent.unwrap_or(max_parallel);
            Ok(Box::new(ModelBackend::new(config)))
        }
    }
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_scan(args: ScanArgs) -> Result<i32> {
    if !args.target.exists() {
        bail!("target {} does not exist", args.target.display());
    }
    let (mut cfg, model_cfg) = load_config(args.config.as_deref())?;
    if let Some(v) = args.threshold {
        cfg.flag_threshold = v;
    }
    if let Some(v) = args.fail_threshold {
        cfg.fail_threshold = v;
    }
    if let Some(v) = args.max_parallel {
        cfg.max_parallel = v;
    }
    if let Some(v) = args.token_budget {
        cfg.token_budget = v;
    }
    if args.force_analyze_all {
        cfg.force_analyze_all = true;
    }
    if args.summarize_all {
        cfg.summarize_all = true;
    }
    if let Some(backend) = args.backend {
        cfg.backend_id = match backend {
            BackendFlag::Rules => BackendChoice::Rules,
            BackendFlag::Model => BackendChoice::Model,
        };
    }
    if !args.include.is_empty() {
        cfg.include = args.include.clone();
    }
    if !args.exclude.is_empty() {
        cfg.exclude.extend(args.exclude.iter().cloned());
    }
    if let Some(dir) = &args.cache_dir {
        cfg.cache_dir = Some(dir.clone());
    }
    cfg.validate().map_err(|e| anyhow!(e))?;

    let rules = load_rules(args.rules.as_deref(), &cfg)?;
    let backend = build_backend(
        cfg.backend_id,
        args.endpoint.clone(),
        args.model.clone(),
        &model_cfg,
        cfg.max_parallel,
    )?;

    let report = scan_tree(&args.target, &cfg, &rules, backend.as_ref())?;

    match args.format {
        FormatFlag::Json => write_or_print(args.output.as_deref(), &report.to_json())?,
        FormatFlag::Markdown => {
            write_or_print(args.markdown_output.as_deref(), &report.to_markdown())?
        }
        FormatFlag::Both => {
            write_or_print(args.output.as_deref(), &report.to_json())?;
            let md_path = args
                .markdown_output
                .as_deref()
                .ok_or_else(|| anyhow!("--format both needs --markdown-output"))?;
            write_or_print(Some(md_path), &report.to_markdown())?;
        }
    }
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(exit_code(&report, cfg.fail_threshold))
}

fn cmd_rules_check(args: RulesCheckArgs) -> Result<i32> {
    let rules = match &args.rules_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read rule file {}", path.display()))?;
            RuleSet::load(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?
        }
        None => RuleSet::bundled(),
    };
    println!("{} rules loaded", rules.rules.len());
    Ok(0)
}

fn cmd_render(args: RenderArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.report)
        .with_context(|| format!("cannot read report {}", args.report.display()))?;
    let report = ScanReport::from_json(&text)?;
    write_or_print(args.output.as_deref(), &report.to_markdown())?;
    Ok(0)
}

fn print_eval_table(result: &EvalResult) {
    println!(
        "{:<12} {:<9} {:>3} {:>3} {:>3} {:>7} {:>9} {:>9} {:>8}",
        "project", "profile", "tp", "fn", "fp", "recall", "precision", "specific", "generic"
    );
    for p in &result.projects {
        println!(
            "{:<12} {:<9} {:>3} {:>3} {:>3} {:>7.3} {:>9.3} {:>9} {:>8}",
            p.project_id,
            p.security_profile.as_str(),
            p.true_positives,
            p.false_negatives,
            p.false_positives,
            p.recall,
            p.precision,
            p.remediation.specific,
            p.remediation.generic,
        );
    }
}

fn cmd_eval(args: EvalArgs) -> Result<i32> {
    if let Some(dest) = &args.export {
        build_bundled_corpus(dest).context("cannot export bundled corpus")?;
        println!("bundled corpus written to {}", dest.display());
        return Ok(0);
    }

    let (cfg, model_cfg) = load_config(args.config.as_deref())?;
    let backend_choice = match args.backend {
        BackendFlag::Rules => BackendChoice::Rules,
        BackendFlag::Model => BackendChoice::Model,
    };
    let backend = build_backend(
        backend_choice,
        args.endpoint.clone(),
        args.model.clone(),
        &model_cfg,
        cfg.max_parallel,
    )?;
    let rules = load_rules(None, &cfg)?;

    let temp;
    let corpus_dir = match &args.corpus {
        Some(dir) => {
            if !dir.exists() {
                bail!("corpus {} does not exist", dir.display());
            }
            dir.clone()
        }
        None => {
            temp = tempfile::tempdir().context("cannot create temp dir")?;
            build_bundled_corpus(temp.path()).context("cannot materialize bundled corpus")?;
            temp.path().to_path_buf()
        }
    };

    let (result, _reports) = run_eval(&corpus_dir, &cfg, &rules, backend.as_ref())?;
    print_eval_table(&result);
    if let Some(path) = &args.json_out {
        let mut json = serde_json::to_string_pretty(&result).context("serialize eval result")?;
        json.push('\n');
        std::fs::write(path, json).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(0)
}
