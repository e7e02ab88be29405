//! Batch command-line surface for the simulation and characterization
//! toolkit.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 inconclusive
//! result, 4 I/O failure, 5 inconsistent oracle.

mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cachescope_core::bench::{
    parse_event_config, run_benchmark, Aggregate, BenchConfig, Event, EventConfig, SyntheticBackend, UnrollMode,
};
use cachescope_core::geometry::CacheGeometry;
use cachescope_core::inference::{
    age_graph, detect_dueling, equivalence_classes, identify_policy, infer_permutation_policy, DuelScanConfig,
    IdentifyConfig, InferPermConfig, InferenceError, PermutationInference, SetClass, SimOracle,
};
use cachescope_core::policies::names::{format_set_list, parse_set_list};
use cachescope_core::policies::presets::{builtin_presets, lookup, parse_presets, Preset};
use cachescope_core::policies::{format_policy_name, parse_policy_name, policy_zoo, PolicySpec};
use cachescope_core::seqlang::{eval_sequence, parse_sequence, AccessSeq};

use manifest::RunManifest;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_INCONSISTENT: u8 = 5;

#[derive(Parser)]
#[command(name = "cachescope", version, about = "Cache replacement-policy simulation and characterization")]
struct Cli {
    /// Load additional presets from a `name = policy` file.
    #[arg(long, global = true)]
    presets: Option<PathBuf>,
    /// Write the resolved run manifest to this path.
    #[arg(long, global = true)]
    manifest_out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Evaluate an access sequence and report measured hits and misses.
    Seq(SeqArgs),
    /// Identify a simulated policy by comparing random sequences against
    /// candidate policies.
    Identify(IdentifyArgs),
    /// Infer the permutation vectors of a simulated policy.
    InferPerm(InferPermArgs),
    /// Emit the age graph of an access sequence as CSV.
    AgeGraph(AgeGraphArgs),
    /// Classify cache sets of an adaptive cache as fixed or follower sets.
    DuelScan(DuelScanArgs),
    /// Run the benchmark loop against a synthetic counter backend.
    Bench(BenchArgs),
    /// List known policies and bundled presets.
    ListPolicies(ListArgs),
    /// Re-execute a stored run manifest.
    Rerun(RerunArgs),
}

#[derive(Args, serde::Serialize, serde::Deserialize)]
struct SeqArgs {
    /// Policy name or preset.
    #[arg(long, short)]
    policy: String,
    #[arg(long, default_value_t = 8)]
    assoc: usize,
    #[arg(long, default_value_t = 1)]
    num_sets: usize,
    /// Target sets: comma-separated indices or `lo-hi` ranges.
    #[arg(long, default_value = "0")]
    sets: String,
    /// Main-sequence loop count.
    #[arg(long = "loop", default_value_t = 1)]
    loop_count: u32,
    /// Initialization sequence, executed once.
    #[arg(long, default_value = "")]
    init: String,
    #[arg(long, env = "CACHESCOPE_SEED", default_value_t = 0)]
    seed: u64,
    /// C-Box to pin accesses to. Slice selection is a hardware addressing
    /// concern; the simulator accepts the flag and records it in the
    /// output without acting on it.
    #[arg(long)]
    cbox: Option<u32>,
    /// The access sequence, e.g. "<wbinvd> A B C D A?".
    sequence: String,
}

#[derive(Args, serde::Serialize, serde::Deserialize)]
struct IdentifyArgs {
    /// Policy of the simulated oracle.
    #[arg(long)]
    oracle_policy: String,
    #[arg(long, default_value_t = 8)]
    assoc: usize,
    /// `all` for the built-in zoo, or a file with one policy name per line.
    #[arg(long, default_value = "all")]
    candidates: String,
    #[arg(long, default_value_t = 250)]
    nseq: usize,
    #[arg(long, default_value_t = 50)]
    len: usize,
    #[arg(long, default_value_t = 64)]
    trials: u32,
    #[arg(long, env = "CACHESCOPE_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the full report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, serde::Serialize, serde::Deserialize)]
struct InferPermArgs {
    #[arg(long, short)]
    policy: String,
    #[arg(long, default_value_t = 8)]
    assoc: usize,
    #[arg(long, env = "CACHESCOPE_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, serde::Serialize, serde::Deserialize)]
struct AgeGraphArgs {
    #[arg(long, short)]
    policy: String,
    #[arg(long, default_value_t = 12)]
    assoc: usize,
    /// The access sequence whose blocks are tracked.
    #[arg(long)]
    seq: String,
    /// Largest number of fresh blocks.
    #[arg(long, default_value_t = 200)]
    nmax: usize,
    #[arg(long, default_value_t = 512)]
    trials: u32,
    #[arg(long, env = "CACHESCOPE_SEED", default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, serde::Serialize, serde::Deserialize)]
struct DuelScanArgs {
    /// Adaptive policy (or preset such as `ivybridge-sim`) to simulate and
    /// scan.
    #[arg(long, short)]
    policy: String,
    /// Associativity; defaults from the known `-sim` presets.
    #[arg(long)]
    assoc: Option<usize>,
    #[arg(long, default_value_t = 1024)]
    num_sets: usize,
    /// Sets to probe (defaults to all).
    #[arg(long)]
    sets: Option<String>,
    #[arg(long, env = "CACHESCOPE_SEED", default_value_t = 0)]
    seed: u64,
    /// Optional CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, serde::Serialize, serde::Deserialize)]
struct BenchArgs {
    /// Synthetic backend: constant overhead per invocation.
    #[arg(long, default_value_t = 100.0)]
    base: f64,
    /// Synthetic backend: cost per benchmark copy.
    #[arg(long, default_value_t = 4.0)]
    cost: f64,
    /// Gaussian noise scale (0 = noiseless).
    #[arg(long, default_value_t = 0.0)]
    noise_scale: f64,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    /// Simultaneously programmable counters of the backend.
    #[arg(long, default_value_t = 4)]
    capacity: usize,
    #[arg(long, default_value_t = 0)]
    warmup: u32,
    #[arg(long, default_value_t = 10)]
    nmeas: u32,
    #[arg(long = "loop", default_value_t = 0)]
    loop_count: u32,
    #[arg(long, default_value_t = 100)]
    unroll: u32,
    #[arg(long, value_enum, default_value_t = AggArg::Min)]
    agg: AggArg,
    #[arg(long, value_enum, default_value_t = ModeArg::TwoUnroll)]
    mode: ModeArg,
    /// Performance-event configuration file; defaults to one `cost` event.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args, serde::Serialize, serde::Deserialize)]
struct ListArgs {
    #[arg(long, default_value_t = 8)]
    assoc: usize,
}

#[derive(Args, serde::Serialize, serde::Deserialize)]
struct RerunArgs {
    manifest: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, serde::Serialize, serde::Deserialize)]
enum AggArg {
    Min,
    Median,
    TrimmedMean,
}

#[derive(Clone, Copy, ValueEnum, serde::Serialize, serde::Deserialize)]
enum ModeArg {
    TwoUnroll,
    ZeroUnroll,
}

impl From<AggArg> for Aggregate {
    fn from(a: AggArg) -> Self {
        match a {
            AggArg::Min => Aggregate::Min,
            AggArg::Median => Aggregate::Median,
            AggArg::TrimmedMean => Aggregate::TrimmedMean20,
        }
    }
}

impl From<ModeArg> for UnrollMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::TwoUnroll => UnrollMode::TwoUnroll,
            ModeArg::ZeroUnroll => UnrollMode::ZeroUnroll,
        }
    }
}

struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn load_presets(extra: &Option<PathBuf>) -> Result<Vec<Preset>, UsageError> {
    let mut presets = builtin_presets();
    if let Some(path) = extra {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        presets.extend(parse_presets(&text)?);
    }
    Ok(presets)
}

/// A policy argument is either a policy name in the grammar or a preset.
fn resolve_policy(text: &str, presets: &[Preset]) -> Result<PolicySpec, UsageError> {
    match parse_policy_name(text) {
        Ok(spec) => Ok(spec),
        Err(parse_err) => lookup(presets, text)
            .ok_or_else(|| UsageError(format!("{text:?} is neither a policy name ({parse_err}) nor a preset"))),
    }
}

/// Geometry defaults for the bundled simulation presets.
fn default_assoc(policy_name: &str) -> Option<usize> {
    match policy_name {
        "ivybridge-sim" => Some(12),
        "skylake-sim" => Some(16),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let presets = match load_presets(&cli.presets) {
        Ok(p) => p,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let command = match cli.command {
        Command::Rerun(args) => match manifest::load(&args.manifest) {
            Ok(RunManifest { command }) => command,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_IO);
            }
        },
        other => other,
    };
    if let Some(path) = &cli.manifest_out {
        if let Err(e) = manifest::store(path, &command) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    let code = match &command {
        Command::Seq(args) => cmd_seq(args, &presets),
        Command::Identify(args) => cmd_identify(args, &presets),
        Command::InferPerm(args) => cmd_infer_perm(args, &presets),
        Command::AgeGraph(args) => cmd_age_graph(args, &presets),
        Command::DuelScan(args) => cmd_duel_scan(args, &presets),
        Command::Bench(args) => cmd_bench(args),
        Command::ListPolicies(args) => cmd_list(args, &presets),
        Command::Rerun(_) => unreachable!("rerun resolved above"),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn cmd_seq(args: &SeqArgs, presets: &[Preset]) -> Result<u8, UsageError> {
    let policy = resolve_policy(&args.policy, presets)?;
    let geometry = CacheGeometry::new(args.num_sets, args.assoc, 64, "cli")?;
    let main = parse_sequence(&args.sequence)?;
    let init = parse_sequence(&args.init)?;
    let sets = parse_set_list(&args.sets)?;
    let seq = AccessSeq {
        init,
        main,
        loop_count: args.loop_count,
        target_sets: sets,
    };
    let counts = eval_sequence(&seq, &policy, &geometry, args.seed)?;
    if let Some(cbox) = args.cbox {
        println!("cbox: {cbox} (ignored in simulation)");
    }
    for (set, (hits, misses)) in &counts.per_set {
        println!("set {set}: hits={hits} misses={misses}");
    }
    println!("hits: {}, misses: {}", counts.hits, counts.misses);
    Ok(EXIT_OK)
}

fn cmd_identify(args: &IdentifyArgs, presets: &[Preset]) -> Result<u8, UsageError> {
    let oracle_policy = resolve_policy(&args.oracle_policy, presets)?;
    let candidates: Vec<PolicySpec> = if args.candidates == "all" {
        policy_zoo(args.assoc)
    } else {
        let text = std::fs::read_to_string(&args.candidates)
            .map_err(|e| UsageError(format!("{}: {e}", args.candidates)))?;
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| resolve_policy(l, presets))
            .collect::<Result<_, _>>()?
    };
    if candidates.is_empty() {
        return Err(UsageError("no candidate policies".to_owned()));
    }
    let oracle = SimOracle::single_set(oracle_policy, args.assoc, args.seed);
    let cfg = IdentifyConfig {
        n_seq: args.nseq,
        len: args.len,
        trials_per_seq: args.trials,
        seed: args.seed,
        ..IdentifyConfig::default()
    };
    let report = identify_policy(&oracle, &candidates, &cfg).map_err(|e| UsageError(e.to_string()))?;

    let survivor_indices: Vec<usize> = report
        .candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.counterexample_count == 0)
        .map(|(i, _)| i)
        .collect();
    let survivor_specs: Vec<PolicySpec> = survivor_indices.iter().map(|&i| candidates[i].clone()).collect();
    let classes = equivalence_classes(&survivor_specs, args.assoc, args.seed ^ 0xC1A5, 64, args.len.max(20));

    println!(
        "evaluated {} sequences against {} candidates",
        report.sequences_evaluated,
        report.candidates.len()
    );
    println!(
        "survivors: {} in {} equivalence class(es)",
        survivor_indices.len(),
        classes.len()
    );
    for class in &classes {
        let names: Vec<&str> = class
            .iter()
            .map(|&i| report.candidates[survivor_indices[i]].name.as_str())
            .collect();
        println!("  class: {}", names.join(" = "));
    }
    let mut ruled_out: Vec<&cachescope_core::inference::CandidateReport> = report
        .candidates
        .iter()
        .filter(|c| c.counterexample_count > 0)
        .collect();
    ruled_out.sort_by_key(|c| c.counterexample_count);
    if let Some(closest) = ruled_out.first() {
        println!(
            "closest ruled-out candidate: {} ({} counterexamples)",
            closest.name, closest.counterexample_count
        );
        if let Some(ce) = &closest.first_counterexample {
            println!("  first counterexample: {} (expected {}, observed {})", ce.sequence, ce.expected, ce.observed);
        }
    }
    if let Some(path) = &args.json {
        output::write_file(path, &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))
            .map_err(|e| UsageError(e.to_string()))?;
    }
    Ok(if classes.len() == 1 { EXIT_OK } else { EXIT_INCONCLUSIVE })
}

fn cmd_infer_perm(args: &InferPermArgs, presets: &[Preset]) -> Result<u8, UsageError> {
    let policy = resolve_policy(&args.policy, presets)?;
    let assoc = match (default_assoc(&args.policy), &policy) {
        (Some(a), _) => a,
        (None, PolicySpec::Lru3Plru4) => 12,
        _ => args.assoc,
    };
    let oracle = SimOracle::single_set(policy, assoc, args.seed);
    let cfg = InferPermConfig {
        seed: args.seed,
        ..InferPermConfig::default()
    };
    match infer_permutation_policy(&oracle, &cfg) {
        Ok(PermutationInference::Vectors(vectors)) => {
            for (i, v) in vectors.hit.iter().enumerate() {
                println!("Pi_{i:<2} = {}", output::vector(v));
            }
            println!("Pi_miss = {}", output::vector(&vectors.miss));
            Ok(EXIT_OK)
        }
        Ok(PermutationInference::NotPermutation { reason }) => {
            println!("not a permutation policy: {reason}");
            Ok(EXIT_INCONCLUSIVE)
        }
        Err(InferenceError::InconsistentOracle { detail }) => {
            eprintln!("inconsistent oracle: {detail}");
            Ok(EXIT_INCONSISTENT)
        }
        Err(e) => Err(UsageError(e.to_string())),
    }
}

fn cmd_age_graph(args: &AgeGraphArgs, presets: &[Preset]) -> Result<u8, UsageError> {
    let policy = resolve_policy(&args.policy, presets)?;
    let tokens = parse_sequence(&args.seq)?;
    let oracle = SimOracle::single_set(policy, args.assoc, args.seed);
    let graph =
        age_graph(&oracle, &tokens, args.nmax, args.trials, args.seed).map_err(|e| UsageError(e.to_string()))?;
    match output::write_file(&args.out, &graph.to_csv()) {
        Ok(()) => {
            println!(
                "wrote age graph for {} blocks, n = 0..{}, {} trial(s) per cell: {}",
                graph.blocks.len(),
                graph.n_max,
                graph.trials,
                args.out.display()
            );
            Ok(EXIT_OK)
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(EXIT_IO)
        }
    }
}

fn cmd_duel_scan(args: &DuelScanArgs, presets: &[Preset]) -> Result<u8, UsageError> {
    let policy = resolve_policy(&args.policy, presets)?;
    let assoc = default_assoc(&args.policy).or(args.assoc).ok_or_else(|| {
        UsageError("--assoc is required unless the policy is a known -sim preset".to_owned())
    })?;
    let PolicySpec::Adaptive(adaptive) = &policy else {
        return Err(UsageError("duel-scan needs an adaptive policy".to_owned()));
    };
    let (policy_a, policy_b) = ((*adaptive.policy_a).clone(), (*adaptive.policy_b).clone());
    let geometry = CacheGeometry::new(args.num_sets, assoc, 64, "duel-scan")?;
    let sets: Vec<usize> = match &args.sets {
        Some(text) => parse_set_list(text)?,
        None => (0..args.num_sets).collect(),
    };
    let oracle = SimOracle::new(policy.clone(), geometry, args.seed);
    let cfg = DuelScanConfig {
        seed: args.seed,
        ..DuelScanConfig::default()
    };
    let result = match detect_dueling(&oracle, &policy_a, &policy_b, &sets, &cfg) {
        Ok(r) => r,
        Err(InferenceError::InconsistentOracle { detail }) => {
            eprintln!("inconsistent oracle: {detail}");
            return Ok(EXIT_INCONSISTENT);
        }
        Err(InferenceError::ProbeUndistinguishing { .. }) => {
            eprintln!("error: the two policies cannot be separated by any probe found");
            return Ok(EXIT_INCONCLUSIVE);
        }
        Err(e) => return Err(UsageError(e.to_string())),
    };
    println!("probe: {}", result.probe);
    println!(
        "expected probe hits: policy A {:.2}, policy B {:.2}",
        result.expected_hits_a, result.expected_hits_b
    );
    let fixed_a = result.sets_with(SetClass::FixedPolicyA);
    let fixed_b = result.sets_with(SetClass::FixedPolicyB);
    let followers = result.sets_with(SetClass::Follower);
    let unknown = result.sets_with(SetClass::Unknown);
    println!("fixed policy A ({}): {}", format_policy_name(&policy_a), format_set_list(&fixed_a));
    println!("fixed policy B ({}): {}", format_policy_name(&policy_b), format_set_list(&fixed_b));
    println!("follower sets: {}", followers.len());
    if !unknown.is_empty() {
        println!("unknown sets: {}", format_set_list(&unknown));
    }
    if let Some(path) = &args.out {
        if let Err(e) = output::write_file(path, &result.to_csv()) {
            eprintln!("error: {e}");
            return Ok(EXIT_IO);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, UsageError> {
    let events = match &args.events {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            parse_event_config(&text)?
        }
        None => EventConfig {
            events: vec![Event {
                name: "cost".to_owned(),
                encoding: None,
            }],
        },
    };
    let mut backend =
        SyntheticBackend::new(args.base, args.cost, args.capacity).with_noise(args.noise_scale, args.noise_seed);
    let cfg = BenchConfig {
        warm_up_count: args.warmup,
        n_measurements: args.nmeas,
        loop_count: args.loop_count,
        unroll_count: args.unroll,
        agg: args.agg.into(),
        mode: args.mode.into(),
    };
    let result = run_benchmark(&mut backend, &cfg, &events)?;
    print!("{}", result.render(&events));
    Ok(EXIT_OK)
}

fn cmd_list(args: &ListArgs, presets: &[Preset]) -> Result<u8, UsageError> {
    println!("policy zoo (associativity {}):", args.assoc);
    for policy in policy_zoo(args.assoc) {
        println!("  {}", format_policy_name(&policy));
    }
    println!("presets:");
    for preset in presets {
        println!("  {} = {}", preset.name, format_policy_name(&preset.policy));
    }
    Ok(EXIT_OK)
}
