//! `ghcft`: validate, analyze and transform `.ghcft` models.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ghcft::format::{parse_model, serialize_model, ModelDocument};
use ghcft::model::{validate_model, FailureLogic, InputSource, OfmRef, SystemModel};
use ghcft::oracle::{simulate_first_passage, OracleError};
use ghcft::qualitative::{
    cmc_to_cft, flatten_ghcft, minimal_cut_sets_with_limit, CutSetResult, FlattenOptions, QualitativeError,
    DEFAULT_CUT_SET_LIMIT,
};
use ghcft::quantitative::{build_generator, evaluate_ghcft, mttf_rate, QuantError, RateResult, SolverConfig};
use ghcft::report::{cut_set_table, format_mtbf, top_event_table, RateDisplay, TopEventRow};

const EXIT_ANALYSIS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Parser)]
#[command(name = "ghcft", version, about = "Hybrid component fault tree analysis")]
struct Cli {
    /// Report format on standard output.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text, global = true)]
    output: OutputFormat,
    /// Unit for displayed failure rates.
    #[arg(long, value_enum, default_value_t = Units::Fit, global = true)]
    units: Units,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Units {
    Fit,
    Perhour,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model for structural errors.
    Validate { model: PathBuf },
    /// Minimal cut sets of one or more top events.
    Mcs {
        model: PathBuf,
        #[command(flatten)]
        tops: TopArgs,
        #[command(flatten)]
        flatten: FlattenArgs,
        /// Cap on intermediate cut sets per gate expansion.
        #[arg(long, default_value_t = DEFAULT_CUT_SET_LIMIT)]
        max_cut_sets: usize,
    },
    /// Failure rate and MTBF of one or more top events, with cut sets.
    Rate {
        model: PathBuf,
        #[command(flatten)]
        tops: TopArgs,
        #[command(flatten)]
        flatten: FlattenArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Replace a Markov-chain component by its fault-tree form.
    Transform {
        model: PathBuf,
        /// Component to transform.
        #[arg(long)]
        component: String,
        /// Write here instead of standard output.
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo first-passage estimate for one state of a Markov chain.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        component: String,
        /// Target state.
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 100_000)]
        runs: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Censoring horizon in hours (default: 100 / smallest rate).
        #[arg(long)]
        horizon: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args)]
struct TopArgs {
    /// Top event as `component.failure_mode`; repeatable. Default: every
    /// output failure mode on an unconnected outport.
    #[arg(long = "top")]
    tops: Vec<String>,
}

#[derive(Args)]
struct FlattenArgs {
    /// Fail on unconnected input failure modes instead of ignoring them.
    #[arg(long)]
    strict: bool,
    /// Keep zero-rate basic events as cut-set members.
    #[arg(long)]
    keep_zero_rate: bool,
}

#[derive(Args)]
struct SolverArgs {
    /// Mission time in hours; needed for AND gates and --transient.
    #[arg(long)]
    mission_time: Option<f64>,
    /// Relative solver tolerance.
    #[arg(long, env = "GHCFT_RTOL", default_value_t = 1e-8)]
    rtol: f64,
    /// Absolute solver tolerance.
    #[arg(long, env = "GHCFT_ATOL", default_value_t = 1e-12)]
    atol: f64,
    /// Step limit of the transient solver.
    #[arg(long, env = "GHCFT_MAX_STEPS", default_value_t = 1_000_000)]
    max_steps: usize,
    /// Rate Markov-chain outputs by transient integration over the mission time.
    #[arg(long)]
    transient: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            mission_time: self.mission_time,
            prefer_transient: self.transient,
        }
    }
}

impl FlattenArgs {
    fn options(&self) -> FlattenOptions {
        FlattenOptions {
            strict: self.strict,
            prune_never_occurring: !self.keep_zero_rate,
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<QualitativeError> for Failure {
    fn from(e: QualitativeError) -> Self {
        let code = match e {
            QualitativeError::CutSetLimit { .. } => EXIT_RESOURCE,
            _ => EXIT_ANALYSIS,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<QuantError> for Failure {
    fn from(e: QuantError) -> Self {
        let mut root = &e;
        while let QuantError::InComponent { source, .. } = root {
            root = source;
        }
        let code = match root {
            QuantError::MaxSteps(_) => EXIT_RESOURCE,
            QuantError::InvalidConfig(_) => EXIT_USAGE,
            _ => EXIT_ANALYSIS,
        };
        let mut message = e.to_string();
        if let QuantError::InvalidModel(findings) = &e {
            for f in findings {
                message.push_str(&format!("\n  {f}"));
            }
        }
        Failure::new(code, message)
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Quant(q) => q.into(),
            OracleError::TooManyEvents { .. } => Failure::new(EXIT_RESOURCE, e.to_string()),
            OracleError::InvalidRequest => Failure::new(EXIT_USAGE, e.to_string()),
        }
    }
}

/// What a command produced: the report and the diagnostics for stderr.
struct Outcome {
    text: String,
    machine: Value,
    diagnostics: Vec<String>,
    code: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    let stderr = &mut std::io::stderr();
    match result {
        Ok(outcome) => {
            for d in &outcome.diagnostics {
                let _ = writeln!(stderr, "{d}");
            }
            let body = match cli.output {
                OutputFormat::Text => outcome.text,
                OutputFormat::Machine => {
                    let mut v = outcome.machine;
                    v["diagnostics"] = json!(outcome.diagnostics);
                    serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
                }
            };
            print!("{body}");
            ExitCode::from(outcome.code)
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let units = match cli.units {
        Units::Fit => RateDisplay::Fit,
        Units::Perhour => RateDisplay::PerHour,
    };
    match &cli.command {
        Command::Validate { model } => validate(model),
        Command::Mcs {
            model,
            tops,
            flatten,
            max_cut_sets,
        } => mcs(model, tops, flatten, *max_cut_sets),
        Command::Rate {
            model,
            tops,
            flatten,
            solver,
        } => rate(model, tops, flatten, solver, units),
        Command::Transform { model, component, out } => transform(model, component, out.as_deref()),
        Command::Simulate {
            model,
            component,
            target,
            runs,
            seed,
            horizon,
            solver,
        } => simulate(model, component, target, *runs, *seed, *horizon, solver, units),
    }
}

fn load(path: &Path) -> Result<ModelDocument, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| Failure::new(EXIT_USAGE, format!("{}:{e}", path.display())))
}

fn run_header(command: &str, path: &Path) -> Value {
    json!({
        "run": { "tool": "ghcft", "version": env!("CARGO_PKG_VERSION"), "command": command, "model": path.display().to_string() },
    })
}

// Output failure modes on outports that feed nothing.
fn default_tops(model: &SystemModel) -> Vec<OfmRef> {
    let mut tops = Vec::new();
    for c in model.components.values() {
        let ofms: Vec<(&String, &String)> = match &c.flm {
            FailureLogic::Cft(cft) => cft.ofms.iter().map(|(id, o)| (id, &o.port)).collect(),
            FailureLogic::Cmc(cmc) => cmc.ofms.iter().map(|(id, o)| (id, &o.port)).collect(),
        };
        for (id, port) in ofms {
            let used = model.connections.iter().any(|k| k.from.component == c.id && &k.from.port == port);
            if !used {
                tops.push(OfmRef::new(&c.id, id));
            }
        }
    }
    tops
}

fn tops_of(model: &SystemModel, args: &TopArgs) -> Result<Vec<OfmRef>, Failure> {
    if args.tops.is_empty() {
        return Ok(default_tops(model));
    }
    args.tops
        .iter()
        .map(|t| {
            let r: OfmRef = t.parse().map_err(|_| {
                Failure::new(EXIT_USAGE, format!("`{t}` is not a `component.failure_mode` reference"))
            })?;
            if !model.has_ofm(&r) {
                return Err(Failure::new(EXIT_ANALYSIS, format!("top event `{r}` is not an output failure mode")));
            }
            Ok(r)
        })
        .collect()
}

fn validate(path: &Path) -> Result<Outcome, Failure> {
    let doc = load(path)?;
    let report = validate_model(&doc.system);
    let mut text = String::new();
    for f in &report.findings {
        text.push_str(&format!("{f}\n"));
    }
    let errors = report.errors().count();
    let warnings = report.warnings().count();
    text.push_str(&format!(
        "{}: {} component(s), {} connection(s), {errors} error(s), {warnings} warning(s)\n",
        path.display(),
        doc.system.components.len(),
        doc.system.connections.len()
    ));
    let mut machine = run_header("validate", path);
    machine["valid"] = json!(errors == 0);
    machine["findings"] = serde_json::to_value(&report.findings).expect("findings serialize");
    Ok(Outcome {
        text,
        machine,
        diagnostics: Vec::new(),
        code: if errors == 0 { 0 } else { EXIT_ANALYSIS },
    })
}

fn cut_sets(model: &SystemModel, top: &OfmRef, flatten: &FlattenArgs, limit: usize) -> Result<CutSetResult, Failure> {
    let tree = flatten_ghcft(model, top, &flatten.options())?;
    Ok(minimal_cut_sets_with_limit(&tree, limit)?)
}

fn require_valid(model: &SystemModel) -> Result<Vec<String>, Failure> {
    let report = validate_model(model);
    if report.has_errors() {
        let mut msg = String::from("the model has validation errors:");
        for f in report.errors() {
            msg.push_str(&format!("\n  {f}"));
        }
        return Err(Failure::new(EXIT_ANALYSIS, msg));
    }
    Ok(report.warnings().map(ToString::to_string).collect())
}

fn mcs(path: &Path, tops: &TopArgs, flatten: &FlattenArgs, limit: usize) -> Result<Outcome, Failure> {
    let doc = load(path)?;
    let diagnostics = require_valid(&doc.system)?;
    let mut text = String::new();
    let mut results = Vec::new();
    for top in tops_of(&doc.system, tops)? {
        let r = cut_sets(&doc.system, &top, flatten, limit)?;
        if !text.is_empty() {
            text.push('\n');
        }
        text.push_str(&format!("Top event {top}: {} minimal cut set(s)\n", r.cut_sets.len()));
        text.push_str(&cut_set_table(&r));
        results.push(json!({ "top": top.to_string(), "cut_sets": r.cut_sets }));
    }
    let mut machine = run_header("mcs", path);
    machine["results"] = json!(results);
    Ok(Outcome {
        text,
        machine,
        diagnostics,
        code: 0,
    })
}

fn rate_json(r: &RateResult) -> Value {
    json!({
        "top": r.top.to_string(),
        "rate_per_hour": r.rate,
        "rate_fit": r.rate * ghcft::model::FIT_SCALE,
        "mtbf_hours": r.mtbf,
        "method": r.method,
        "per_ofm": r.per_ofm.iter().map(|o| json!({
            "ofm": o.ofm.to_string(),
            "rate_per_hour": o.rate,
            "method": o.method,
            "mtbf_hours": o.mtbf,
        })).collect::<Vec<_>>(),
    })
}

fn rate(path: &Path, tops: &TopArgs, flatten: &FlattenArgs, solver: &SolverArgs, units: RateDisplay) -> Result<Outcome, Failure> {
    let doc = load(path)?;
    let cfg = solver.config();
    cfg.validate()?;
    let mut diagnostics = Vec::new();
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut methods = String::new();
    for top in tops_of(&doc.system, tops)? {
        let r = evaluate_ghcft(&doc.system, &top, &cfg)?;
        let sets = cut_sets(&doc.system, &top, flatten, DEFAULT_CUT_SET_LIMIT)?;
        for d in &r.diagnostics {
            if !diagnostics.contains(d) {
                diagnostics.push(d.clone());
            }
        }
        methods.push_str(&format!("{top}: {} via {}\n", units.format(r.rate), r.method));
        let mut v = rate_json(&r);
        v["cut_sets"] = json!(sets.cut_sets);
        results.push(v);
        rows.push(TopEventRow {
            top: top.to_string(),
            cut_sets: sets.cut_sets,
            rate: Some(r.rate),
            mtbf: r.mtbf,
        });
    }
    let mut text = top_event_table(&rows, units);
    text.push('\n');
    text.push_str(&methods);
    let mut machine = run_header("rate", path);
    machine["solver"] = serde_json::to_value(&cfg).expect("config serializes");
    machine["results"] = json!(results);
    Ok(Outcome {
        text,
        machine,
        diagnostics,
        code: 0,
    })
}

fn transform(path: &Path, component: &str, out: Option<&Path>) -> Result<Outcome, Failure> {
    let mut doc = load(path)?;
    let c = doc
        .system
        .components
        .get_mut(component)
        .ok_or_else(|| Failure::new(EXIT_ANALYSIS, format!("component `{component}` not found")))?;
    let FailureLogic::Cmc(cmc) = &c.flm else {
        return Err(Failure::new(
            EXIT_ANALYSIS,
            format!("component `{component}` already has a fault tree; nothing to transform"),
        ));
    };
    let transformed = cmc_to_cft(cmc)?;
    c.flm = FailureLogic::Cft(transformed.cft);
    let text = serialize_model(&doc);
    let diagnostics = transformed.warnings;
    let mut machine = run_header("transform", path);
    machine["component"] = json!(component);
    match out {
        Some(p) => {
            fs::write(p, &text).map_err(|e| Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", p.display())))?;
            machine["written"] = json!(p.display().to_string());
            Ok(Outcome {
                text: format!("wrote {}\n", p.display()),
                machine,
                diagnostics,
                code: 0,
            })
        }
        None => {
            machine["model"] = json!(text);
            Ok(Outcome {
                text,
                machine,
                diagnostics,
                code: 0,
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    path: &Path,
    component: &str,
    target: &str,
    runs: u64,
    seed: u64,
    horizon: Option<f64>,
    solver: &SolverArgs,
    units: RateDisplay,
) -> Result<Outcome, Failure> {
    let doc = load(path)?;
    let model = &doc.system;
    let mut diagnostics = require_valid(model)?;
    let cfg = solver.config();
    cfg.validate()?;
    let c = model
        .components
        .get(component)
        .ok_or_else(|| Failure::new(EXIT_ANALYSIS, format!("component `{component}` not found")))?;
    let FailureLogic::Cmc(cmc) = &c.flm else {
        return Err(Failure::new(EXIT_ANALYSIS, format!("component `{component}` is not a Markov chain")));
    };
    let mut inputs = BTreeMap::new();
    for (id, ifm) in &cmc.ifms {
        let rate = match model.resolve_input(component, id, ifm) {
            InputSource::Connected(src) => evaluate_ghcft(model, &src, &cfg)?.rate,
            _ => 0.0,
        };
        inputs.insert(id.clone(), rate);
    }
    let estimate = simulate_first_passage(cmc, &inputs, target, runs, horizon, seed)?;
    let generator = build_generator(cmc, &inputs)?;
    let analytic = mttf_rate(&generator, target)?;
    diagnostics.extend(estimate.warnings.iter().cloned());
    diagnostics.extend(analytic.warnings.iter().map(|w| format!("analytic: {w}")));

    let text = format!(
        "runs {runs}, seed {seed}, hits {}, censored {}\n\
         mean first passage  {:.6e} h\n\
         simulated rate      {} ± {}\n\
         analytic rate       {}\n\
         analytic MTBF       {} h\n",
        estimate.hits,
        estimate.censored,
        estimate.mean_first_passage,
        units.format(estimate.rate_estimate),
        units.format(estimate.std_error),
        units.format(analytic.rate),
        format_mtbf(ghcft::quantitative::mtbf(analytic.rate)),
    );
    let mut machine = run_header("simulate", path);
    machine["component"] = json!(component);
    machine["target"] = json!(target);
    machine["inputs_per_hour"] = json!(inputs);
    machine["estimate"] = serde_json::to_value(&estimate).expect("estimate serializes");
    machine["analytic_rate_per_hour"] = json!(analytic.rate);
    Ok(Outcome {
        text,
        machine,
        diagnostics,
        code: 0,
    })
}
