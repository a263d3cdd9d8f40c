use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use resilience_bench::{Artifact, BenchmarkSpec, Family};
use resilience_cefsm::{compile_text, CompileOptions, StateDictionary};
use resilience_core::format::{self, parse_state_list};
use resilience_core::game::{res_k_set, safe_k};
use resilience_core::oracle::{self, Policy, SimulationConfig, StartStates};
use resilience_core::risk::{self, MissionProfile};
use resilience_core::{k_max, res_k, Mode, ResilienceLevel, ResilienceStrategy, StateId, StateSet, TransitionSystem};
use serde_json::json;

#[derive(Parser)]
#[command(name = "kres", version, about = "Dense-failure resilience analysis of transition systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a .cefsm model into TSF JSON and a state dictionary.
    Compile(CompileArgs),
    /// Print safe_k(G) and res_k for a system.
    Solve(SolveArgs),
    /// Find the largest k for which a state is k-resilient.
    Kmax(KmaxArgs),
    /// Export the res_k controller as JSON.
    Strategy(StrategyArgs),
    /// Play a strategy against a fault injector.
    Simulate(SimulateArgs),
    /// Generate a benchmark model.
    Gen(GenArgs),
    /// Failure probabilities for k total versus k dense failures.
    Risk(RiskArgs),
    /// Render a system as Graphviz DOT.
    ExportDot(DotArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
    Csv,
    Dot,
}

#[derive(Args)]
struct SystemArg {
    /// System file: TSF JSON, or a .cefsm model compiled on the fly.
    #[arg(value_name = "SYSTEM", required_unless_present = "input", conflicts_with = "input")]
    path: Option<PathBuf>,
    /// Same as the positional SYSTEM argument.
    #[arg(short, long, value_name = "SYSTEM")]
    input: Option<PathBuf>,
    /// Keep replica identities when compiling a .cefsm model (≤ 3 replicas).
    #[arg(long)]
    explicit: bool,
    /// Accept overlapping controlled, failure and repair edges.
    #[arg(long)]
    allow_overlap: bool,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(value_name = "MODEL", required_unless_present = "input", conflicts_with = "input")]
    model: Option<PathBuf>,
    /// Same as the positional MODEL argument.
    #[arg(short, long, value_name = "MODEL")]
    input: Option<PathBuf>,
    /// Output TSF path [default: <model>.tsf.json].
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// State dictionary path [default: <model>.dict.json].
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long, default_value_t = resilience_cefsm::compile::DEFAULT_MAX_STATES)]
    max_states: usize,
    #[arg(long)]
    explicit: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: SystemArg,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value = "base")]
    mode: Mode,
    /// Goal set as comma-separated labels or indices [default: all non-error states].
    #[arg(long)]
    goal: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct KmaxArgs {
    #[command(flatten)]
    input: SystemArg,
    /// State label or index [default: initial state].
    #[arg(long)]
    state: Option<String>,
    #[arg(long, default_value = "base")]
    mode: Mode,
    /// Write the strategy for the resulting level here.
    #[arg(long)]
    strategy_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct StrategyArgs {
    #[command(flatten)]
    input: SystemArg,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value = "base")]
    mode: Mode,
    /// Keep a single safety move per state.
    #[arg(long)]
    determinize: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: SystemArg,
    /// Strategy JSON; computed from --k when omitted.
    #[arg(long)]
    strategy: Option<PathBuf>,
    #[arg(long, required_unless_present = "strategy")]
    k: Option<u32>,
    #[arg(long, default_value = "base")]
    mode: Mode,
    #[arg(long, default_value = "greedy")]
    antagonist: Policy,
    #[arg(long, default_value_t = 10_000)]
    plays: u64,
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    #[arg(long)]
    seed: u64,
    /// Start state label or index [default: initial state].
    #[arg(long, conflicts_with = "rotate_starts")]
    start: Option<String>,
    /// Rotate start states over the resilient set.
    #[arg(long)]
    rotate_starts: bool,
    /// Where to write the first failing play [default: <system>.trace.json].
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: Family,
    /// Processors (avionics).
    #[arg(long)]
    n: Option<u32>,
    /// Memory copies (avionics).
    #[arg(long)]
    m: Option<u32>,
    /// Replicas (voting, simple_voting, pbft).
    #[arg(long)]
    r: Option<u32>,
    /// Clock servers (clock_sync).
    #[arg(long)]
    s: Option<u32>,
    /// Chain length (chain).
    #[arg(long)]
    len: Option<u32>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// `text` emits the model itself; `json` wraps it with metadata.
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct RiskArgs {
    /// Mission time in hours.
    #[arg(long = "T", default_value_t = 20.0)]
    mission: f64,
    /// Mean time between failures in hours.
    #[arg(long, default_value_t = 10.0)]
    mtbf: f64,
    /// Repair time, e.g. 36s, 2m, 0.01h.
    #[arg(long, default_value = "36s")]
    repair: String,
    /// Range of k, e.g. 1..6 or 3.
    #[arg(long, default_value = "1..6")]
    k: String,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct DotArgs {
    #[command(flatten)]
    input: SystemArg,
    /// Highlight res_k for this k.
    #[arg(long)]
    highlight_k: Option<u32>,
    #[arg(long, default_value = "base")]
    mode: Mode,
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// `dot` for Graphviz, `json` for the system with the highlighted set.
    #[arg(long, value_enum, default_value = "dot")]
    format: OutputFormat,
}

impl SystemArg {
    fn system(&self) -> &Path {
        self.path.as_deref().or(self.input.as_deref()).expect("clap requires a system")
    }
}

struct Loaded {
    sys: TransitionSystem,
    dict: Option<StateDictionary>,
}

fn load(input: &SystemArg) -> Result<Loaded> {
    let path = input.system();
    if path.extension().is_some_and(|e| e == "cefsm") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let compiled = compile_text(
            &text,
            CompileOptions {
                explicit_identities: input.explicit,
                ..Default::default()
            },
        )
        .with_context(|| format!("{}", path.display()))?;
        eprintln!(
            "compiled {}: {} states",
            path.display(),
            compiled.system.num_states()
        );
        return Ok(Loaded {
            sys: compiled.system,
            dict: Some(compiled.dictionary),
        });
    }
    let options = resilience_core::ValidationOptions {
        allow_overlap: input.allow_overlap,
    };
    let sys = format::load_with(path, options)?;
    Ok(Loaded { sys, dict: None })
}

fn state_arg(sys: &TransitionSystem, text: Option<&str>) -> Result<StateId> {
    match text {
        None => Ok(sys.initial()),
        Some(t) => sys.find_state(t).ok_or_else(|| anyhow!("unknown state `{t}`")),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn ids(set: &StateSet) -> Vec<u32> {
    set.iter().map(|s| s.0).collect()
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let stem = name
        .strip_suffix(".tsf.json")
        .or_else(|| name.strip_suffix(".cefsm"))
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(name);
    path.with_file_name(format!("{stem}{suffix}"))
}

fn run_compile(a: CompileArgs) -> Result<()> {
    let model = a.model.or(a.input).expect("clap requires a model");
    let text = fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
    let compiled = compile_text(
        &text,
        CompileOptions {
            max_states: a.max_states,
            explicit_identities: a.explicit,
        },
    )
    .with_context(|| format!("{}", model.display()))?;
    let out = a.out.unwrap_or_else(|| sibling(&model, ".tsf.json"));
    let dict = a.dict.unwrap_or_else(|| sibling(&model, ".dict.json"));
    format::save(&compiled.system, &out)?;
    fs::write(&dict, compiled.dictionary.to_json())?;
    eprintln!("wrote {} and {}", out.display(), dict.display());
    let sys = &compiled.system;
    let edges = |kind| sys.edge_count(kind);
    use resilience_core::EdgeKind::{Controlled, Repair, Uncontrolled};
    match a.format {
        OutputFormat::Json => {
            let v = json!({
                "states": sys.num_states(),
                "errors": sys.errors().len(),
                "controlled": edges(Controlled),
                "uncontrolled": edges(Uncontrolled),
                "repair": edges(Repair),
                "dropped_controlled": compiled.dropped_controlled,
                "system": out,
                "dictionary": dict,
            });
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        OutputFormat::Text => {
            println!(
                "{} states ({} errors), {} controlled / {} failure / {} repair edges",
                sys.num_states(),
                sys.errors().len(),
                edges(Controlled),
                edges(Uncontrolled),
                edges(Repair),
            );
            if compiled.dropped_controlled > 0 {
                println!(
                    "dropped {} controlled steps into error configurations",
                    compiled.dropped_controlled
                );
            }
        }
        _ => bail!("compile supports --format text or json"),
    }
    Ok(())
}

fn run_solve(a: SolveArgs) -> Result<()> {
    let Loaded { sys, .. } = load(&a.input)?;
    let goal = match &a.goal {
        Some(g) => parse_state_list(&sys, g).map_err(|e| anyhow!(e))?,
        None => sys.non_error(),
    };
    let run = safe_k(&sys, &goal, a.k, a.mode);
    let (res, rounds) = res_k_set(&sys, a.k, a.mode, Some(&goal));
    match a.format {
        OutputFormat::Json => {
            let v = json!({
                "k": a.k,
                "mode": a.mode,
                "goal": ids(&goal),
                "safe_k": ids(&run.safe_set),
                "res_k": ids(&res),
                "res_rounds": rounds,
                "limits": run.limits.iter().map(ids).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        OutputFormat::Text => {
            println!("k = {}, mode = {}", a.k, a.mode);
            println!("G        = {}", sys.format_set(&goal));
            println!("safe_k(G) = {}", sys.format_set(&run.safe_set));
            println!("res_k(G)  = {}  ({rounds} rounds)", sys.format_set(&res));
        }
        _ => bail!("solve supports --format text or json"),
    }
    Ok(())
}

fn level_json(level: ResilienceLevel) -> serde_json::Value {
    match level {
        ResilienceLevel::Unbounded { cap } => json!({"k_max": null, "unbounded": true, "checked_up_to": cap}),
        other => json!({"k_max": other.as_int(), "unbounded": false}),
    }
}

fn run_kmax(a: KmaxArgs) -> Result<()> {
    let Loaded { sys, dict } = load(&a.input)?;
    let state = state_arg(&sys, a.state.as_deref())?;
    let result = k_max(&sys, a.mode, state);
    eprintln!("{} res_k evaluations", result.probes.len());
    if let (Some(path), Some(strat)) = (&a.strategy_out, &result.strategy) {
        fs::write(path, strat.to_json())?;
        eprintln!("wrote {}", path.display());
    }
    match a.format {
        OutputFormat::Json => {
            let mut v = level_json(result.level);
            v["state"] = json!(state.0);
            v["mode"] = json!(a.mode);
            v["probes"] = json!(result.probes);
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        OutputFormat::Text => {
            let name = match &dict {
                Some(d) => d.describe(state),
                None => sys.label(state).into_owned(),
            };
            println!("k_max({name}) = {}", result.level);
        }
        _ => bail!("kmax supports --format text or json"),
    }
    Ok(())
}

fn run_strategy(a: StrategyArgs) -> Result<()> {
    let Loaded { sys, .. } = load(&a.input)?;
    let mut strat = res_k(&sys, a.k, a.mode, None);
    if a.determinize {
        strat = strat.determinized();
    }
    eprintln!(
        "res_{} has {} states, {} recovery moves",
        a.k,
        strat.resilient.len(),
        strat.recovery_moves.len()
    );
    let text = match a.format {
        OutputFormat::Json => strat.to_json() + "\n",
        OutputFormat::Text => strategy_text(&sys, &strat),
        _ => bail!("strategy supports --format json or text"),
    };
    write_or_print(a.out.as_deref(), &text)
}

fn strategy_text(sys: &TransitionSystem, strat: &ResilienceStrategy) -> String {
    use std::fmt::Write;
    let name = |s: StateId| sys.label(s).into_owned();
    let mut out = format!("res_{} ({}) = {}\n", strat.k, strat.mode, sys.format_set(&strat.resilient));
    for (s, moves) in &strat.safety_moves {
        let targets: Vec<String> = moves.iter().map(|&t| name(t)).collect();
        writeln!(out, "  stay    {} -> {}", name(*s), targets.join(" | ")).unwrap();
    }
    for (s, r) in &strat.recovery_moves {
        let action = match r.action {
            resilience_core::Move::To(t) => name(t),
            resilience_core::Move::Wait => "wait".into(),
        };
        writeln!(out, "  recover {} -> {} (level {}, distance {})", name(*s), action, r.level, r.distance).unwrap();
    }
    out
}

fn run_simulate(a: SimulateArgs) -> Result<ExitCode> {
    let Loaded { sys, .. } = load(&a.input)?;
    let strat = match (&a.strategy, a.k) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ResilienceStrategy::from_json(&text, sys.num_states()).map_err(|e| anyhow!("{}: {e}", path.display()))?
        }
        (None, Some(k)) => res_k(&sys, k, a.mode, None),
        (None, None) => unreachable!("clap requires --k without --strategy"),
    };
    let mut config = SimulationConfig::new(a.antagonist, a.plays, a.horizon, a.seed);
    config.start = if a.rotate_starts {
        StartStates::RotateResilient
    } else if let Some(s) = &a.start {
        StartStates::Fixed(state_arg(&sys, Some(s))?)
    } else {
        StartStates::Initial
    };
    eprintln!(
        "simulating {} plays of {} steps against the {} antagonist",
        a.plays, a.horizon, a.antagonist
    );
    let report = oracle::simulate(&sys, &strat, &config)?;
    if let Some(trace) = &report.first_failure {
        let path = a.trace_out.clone().unwrap_or_else(|| sibling(a.input.system(), ".trace.json"));
        fs::write(&path, trace.to_json())?;
        eprintln!("failing play {} written to {}", trace.play, path.display());
    }
    match a.format {
        OutputFormat::Json => {
            let mut v = serde_json::to_value(&report)?;
            if let Some(obj) = v.as_object_mut() {
                obj.remove("first_failure");
                obj.insert("clean".into(), json!(report.is_clean()));
            }
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
        OutputFormat::Text => {
            println!(
                "{} plays x {} steps, {} antagonist, seed {}",
                report.plays, report.horizon, report.policy, report.seed
            );
            println!(
                "failures {}, repairs {}, recoveries {} (mean length {:.2}), max block {}",
                report.failures, report.repairs, report.resets, report.mean_recovery_length, report.max_block_failures
            );
            println!(
                "error reaches {}, stalled plays {}, safety breaches {}, budget violations {}",
                report.error_reaches, report.stalled_plays, report.safety_breaches, report.budget_violations
            );
            println!("{}", if report.is_clean() { "clean" } else { "FAILED" });
        }
        _ => bail!("simulate supports --format json or text"),
    }
    Ok(if report.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn run_gen(a: GenArgs) -> Result<()> {
    let need = |v: Option<u32>, name: &str| v.ok_or_else(|| anyhow!("--{name} is required for {}", a.family));
    let spec = match a.family {
        Family::Avionics => BenchmarkSpec::Avionics {
            n: need(a.n, "n")?,
            m: need(a.m, "m")?,
        },
        Family::Voting => BenchmarkSpec::Voting { r: need(a.r, "r")? },
        Family::SimpleVoting => BenchmarkSpec::SimpleVoting { r: need(a.r, "r")? },
        Family::Pbft => BenchmarkSpec::Pbft { r: need(a.r, "r")? },
        Family::ClockSync => BenchmarkSpec::ClockSync { s: need(a.s, "s")? },
        Family::Chain => BenchmarkSpec::Chain { len: need(a.len, "len")? },
    };
    let text = match spec.generate()? {
        Artifact::Cefsm(text) => text,
        Artifact::System(sys) => format::to_json_string(&sys),
    };
    eprintln!("{spec}: expected k_max = {}", spec.expected_k());
    let text = match a.format {
        OutputFormat::Text => text,
        OutputFormat::Json => {
            let v = json!({
                "family": spec.family().name(),
                "spec": spec.to_string(),
                "expected_k": spec.expected_k(),
                "artifact": text,
            });
            serde_json::to_string_pretty(&v)? + "\n"
        }
        _ => bail!("gen supports --format text or json"),
    };
    write_or_print(a.out.as_deref(), &text)
}

fn parse_k_range(text: &str) -> Result<Vec<u32>> {
    let bad = || anyhow!("invalid k range `{text}` (expected e.g. 1..6 or 3)");
    let ks: Vec<u32> = match text.split_once("..") {
        Some((lo, hi)) => {
            let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u32 = hi.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
            (lo..=hi).collect()
        }
        None => vec![text.trim().parse().map_err(|_| bad())?],
    };
    if ks.is_empty() || ks.contains(&0) {
        bail!("k range must be nonempty and start at 1 or above");
    }
    Ok(ks)
}

fn run_risk(a: RiskArgs) -> Result<()> {
    let repair = risk::parse_duration_seconds(&a.repair).map_err(|e| anyhow!(e))?;
    let profile = MissionProfile::new(a.mission, a.mtbf, repair)?;
    for w in profile.warnings() {
        eprintln!("warning: {w}");
    }
    let rows = risk::risk_table(&profile, parse_k_range(&a.k)?);
    match a.format {
        OutputFormat::Text => print!("{}", risk::table_text(&rows)),
        OutputFormat::Csv => print!("{}", risk::table_csv(&rows)),
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&json!({"profile": profile, "rows": rows}))?),
        OutputFormat::Dot => bail!("risk supports --format text, csv or json"),
    }
    Ok(())
}

fn run_dot(a: DotArgs) -> Result<()> {
    let Loaded { sys, .. } = load(&a.input)?;
    let highlight = a.highlight_k.map(|k| res_k_set(&sys, k, a.mode, None).0);
    let text = match a.format {
        OutputFormat::Dot | OutputFormat::Text => format::to_dot(&sys, highlight.as_ref()),
        OutputFormat::Json => {
            let mut v: serde_json::Value = serde_json::from_str(&format::to_json_string(&sys))?;
            v["highlight"] = json!(highlight.as_ref().map(ids));
            serde_json::to_string_pretty(&v)? + "\n"
        }
        OutputFormat::Csv => bail!("export-dot supports --format dot, text or json"),
    };
    write_or_print(a.out.as_deref(), &text)
}

/// Names the module an error came from.
fn module_prefix(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if cause.is::<resilience_core::format::FormatError>() {
            return "core-model: ";
        }
        if cause.is::<resilience_cefsm::Error>()
            || cause.is::<resilience_cefsm::ParseError>()
            || cause.is::<resilience_cefsm::CompileError>()
        {
            return "cefsm: ";
        }
        if cause.is::<oracle::SimulationError>() {
            return "oracle: ";
        }
        if cause.is::<risk::ProfileError>() {
            return "risk: ";
        }
        if cause.is::<resilience_bench::SpecError>() {
            return "benchmarks: ";
        }
    }
    ""
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile(a) => run_compile(a).map(|_| ExitCode::SUCCESS),
        Command::Solve(a) => run_solve(a).map(|_| ExitCode::SUCCESS),
        Command::Kmax(a) => run_kmax(a).map(|_| ExitCode::SUCCESS),
        Command::Strategy(a) => run_strategy(a).map(|_| ExitCode::SUCCESS),
        Command::Simulate(a) => run_simulate(a),
        Command::Gen(a) => run_gen(a).map(|_| ExitCode::SUCCESS),
        Command::Risk(a) => run_risk(a).map(|_| ExitCode::SUCCESS),
        Command::ExportDot(a) => run_dot(a).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}{e:#}", module_prefix(&e));
            ExitCode::from(1)
        }
    }
}
