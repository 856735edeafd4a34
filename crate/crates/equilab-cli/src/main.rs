//! equilab command-line front end.
//!
//! Subcommands: `gen` (sequence prefixes), `stats` (equidistribution
//! report for a value-per-line input), `mass` (cylinder-event masses and
//! Borel–Cantelli sums), `experiment` (named Monte Carlo experiments),
//! and `list`. Exit codes: 0 success/pass, 1 semantic fail (strict verdict
//! or failed experiment), 2 usage/validation error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use equilab::canonical::to_canonical_json;
use equilab::equidist::{default_threshold, ud_verdict, TestFunction, Verdict};
use equilab::experiments::{
    self, parse_flat_config, ExperimentConfig, ExperimentParams, FlatConfig, EXPERIMENT_NAMES,
};
use equilab::generators::{generate, GeneratorKind, GeneratorSpec, SequencePrefix, ShiftVector};
use equilab::measures::{
    borel_cantelli_sum, envelope_sum, gaussian_mass, CylinderEvent, GaussianSchedule,
};

#[derive(Parser)]
#[command(
    name = "equilab",
    version,
    about = "Equidistribution laboratory: generators, discrepancy statistics, Gaussian cylinder masses, Monte Carlo experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)] // parsed once at startup
enum Command {
    /// Generate a sequence prefix, one value per line (or a JSON array)
    Gen(GenArgs),
    /// Equidistribution report for a value-per-line input
    Stats(StatsArgs),
    /// Cylinder-event masses, cumulative sums, and the geometric envelope
    Mass(MassArgs),
    /// Run a named experiment and write JSON + CSV artifacts
    Experiment(ExperimentArgs),
    /// List experiments and test-function bank ids
    List,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    /// van der Corput radical inverse
    Vdc,
    /// Kronecker sequence {k*alpha}
    Kronecker,
    /// i.i.d. uniform on [a, b)
    IidUniform,
    /// Gaussian sigma-schedule sample
    Gaussian,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct ShiftArgs {
    /// Constant shift h_k = c
    #[arg(long, value_name = "C", conflicts_with_all = ["shift_linear", "shift_explicit"])]
    shift_const: Option<f64>,
    /// Linear shift h_k = slope * k
    #[arg(long, value_name = "SLOPE", conflicts_with = "shift_explicit")]
    shift_linear: Option<f64>,
    /// Explicit comma-separated shifts, zero-padded beyond the list
    #[arg(long, value_name = "V1,V2,...")]
    shift_explicit: Option<String>,
}

impl ShiftArgs {
    fn to_shift(&self) -> Result<Option<ShiftVector>, String> {
        if let Some(c) = self.shift_const {
            return Ok(Some(ShiftVector::Constant { c }));
        }
        if let Some(slope) = self.shift_linear {
            return Ok(Some(ShiftVector::Linear { slope }));
        }
        if let Some(csv) = &self.shift_explicit {
            let values = csv
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|_| format!("invalid shift-explicit: cannot parse {csv:?}"))?;
            return Ok(Some(ShiftVector::Explicit { values }));
        }
        Ok(None)
    }
}

#[derive(Args)]
struct GenArgs {
    /// Generator family
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Number of values
    #[arg(short = 'n', long = "count", value_name = "N")]
    n: u32,
    /// van der Corput base (vdc)
    #[arg(long)]
    base: Option<u32>,
    /// Kronecker alpha
    #[arg(long)]
    alpha: Option<f64>,
    /// Lower endpoint (iid-uniform)
    #[arg(long)]
    a: Option<f64>,
    /// Upper endpoint (iid-uniform)
    #[arg(long)]
    b: Option<f64>,
    /// Schedule scale (gaussian)
    #[arg(long)]
    c: Option<f64>,
    /// Schedule length (gaussian)
    #[arg(long, value_name = "N_MAX")]
    n_max: Option<u32>,
    /// Root seed for the stochastic kinds
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    shift: ShiftArgs,
    /// Output path, or - for stdout
    #[arg(short = 'o', long, default_value = "-")]
    output: String,
    #[arg(long, value_enum, default_value = "text")]
    format: TextFormat,
}

#[derive(Args)]
struct StatsArgs {
    /// Input path with one real per line, or - for stdin
    #[arg(default_value = "-")]
    input: String,
    /// Domain lower endpoint
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Domain upper endpoint
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Number of diagnostic grid subintervals
    #[arg(long, default_value_t = 10)]
    grid: u32,
    /// Verdict threshold; defaults to 2/sqrt(N) + 0.01 clamped to [0.01, 0.5]
    #[arg(long)]
    threshold: Option<f64>,
    /// Exit 1 when the verdict is inconsistent
    #[arg(long)]
    strict: bool,
    /// Output path, or - for stdout
    #[arg(short = 'o', long, default_value = "-")]
    output: String,
    #[arg(long, value_enum, default_value = "json")]
    format: TableFormat,
}

#[derive(Args)]
struct MassArgs {
    /// Schedule scale
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Schedule length
    #[arg(long, value_name = "N_MAX", default_value_t = GaussianSchedule::DEFAULT_N_MAX)]
    n_max: u32,
    /// First event index
    #[arg(long = "from", value_name = "N_FROM")]
    n_from: u32,
    /// Last event index
    #[arg(long = "to", value_name = "N_TO")]
    n_to: u32,
    /// Interval lower endpoint
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    lo: f64,
    /// Interval upper endpoint
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    hi: f64,
    #[command(flatten)]
    shift: ShiftArgs,
    /// Output path, or - for stdout
    #[arg(short = 'o', long, default_value = "-")]
    output: String,
    #[arg(long, value_enum, default_value = "json")]
    format: TableFormat,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment name (see `equilab list`)
    name: String,
    /// Prefix length per replica
    #[arg(short = 'N', long = "N", value_name = "N")]
    n: Option<u32>,
    /// Number of replicas
    #[arg(short = 'M', long = "M", value_name = "M")]
    m: Option<u32>,
    /// Root seed
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key-value config file; flags override file values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for <name>-seed<seed>-N<N>-M<M>.{json,csv}
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    allowed_failures: Option<f64>,
    #[arg(long)]
    grid: Option<u32>,
    /// Schedule scale
    #[arg(long)]
    c: Option<f64>,
    /// Schedule length
    #[arg(long, value_name = "N_MAX")]
    n_max: Option<u32>,
    #[arg(long)]
    density_floor: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    hi: Option<f64>,
    /// Comma-separated n_from sweep (borel-cantelli)
    #[arg(long, value_name = "N1,N2,...")]
    sweep: Option<String>,
    #[arg(long, value_name = "N_TO")]
    n_to: Option<u32>,
    #[arg(long)]
    slack_sigma: Option<f64>,
    /// uniform | gaussian (weyl-slln)
    #[arg(long)]
    generator: Option<String>,
    /// Comma-separated test-function ids (weyl-slln)
    #[arg(long, value_name = "ID1,ID2,...")]
    bank: Option<String>,
    /// fractional | centered (gaussian-mod1-ud)
    #[arg(long)]
    transform: Option<String>,
    /// Keep raw prefixes in the per-replica records
    #[arg(long)]
    keep_raw: bool,
    #[command(flatten)]
    shift: ShiftArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Mass(args) => cmd_mass(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::List => cmd_list(),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("EQUILAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("EQUILAB_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn write_output(target: &str, content: &str) -> Result<(), String> {
    if target == "-" {
        io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| e.to_string())
    } else {
        fs::write(target, content).map_err(|e| format!("cannot write {target}: {e}"))
    }
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

fn cmd_gen(args: GenArgs) -> Result<u8, String> {
    let require = |field: &str, ok: bool| -> Result<(), String> {
        if ok {
            Ok(())
        } else {
            Err(format!("--{field} is required for this kind"))
        }
    };
    let kind = match args.kind {
        GenKind::Vdc => {
            require("base", args.base.is_some())?;
            GeneratorKind::VanDerCorput {
                base: args.base.unwrap(),
            }
        }
        GenKind::Kronecker => {
            require("alpha", args.alpha.is_some())?;
            GeneratorKind::Kronecker {
                alpha: args.alpha.unwrap(),
            }
        }
        GenKind::IidUniform => {
            require("a", args.a.is_some())?;
            require("b", args.b.is_some())?;
            GeneratorKind::IidUniform {
                a: args.a.unwrap(),
                b: args.b.unwrap(),
            }
        }
        GenKind::Gaussian => GeneratorKind::GaussianSchedule {
            schedule: GaussianSchedule {
                c: args.c.unwrap_or(1.0),
                n_max: args.n_max.unwrap_or(GaussianSchedule::DEFAULT_N_MAX),
            },
        },
    };
    let spec = GeneratorSpec {
        kind,
        shift: args.shift.to_shift()?,
        seed: args.seed,
    };
    let prefix = generate(&spec, args.n).map_err(|e| e.to_string())?;
    let content = match args.format {
        TextFormat::Text => {
            let mut out = String::with_capacity(prefix.len() * 20);
            for v in prefix.values() {
                out.push_str(&format!("{v}\n"));
            }
            out
        }
        TextFormat::Json => {
            let mut json = to_canonical_json(&prefix).map_err(|e| e.to_string())?;
            json.push('\n');
            json
        }
    };
    write_output(&args.output, &content)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

fn read_prefix(input: &str) -> Result<SequencePrefix, String> {
    let text = if input == "-" {
        let mut buf = String::new();
        io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| e.to_string())?;
        buf
    } else {
        fs::read_to_string(input).map_err(|e| format!("cannot read {input}: {e}"))?
    };
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line
            .parse()
            .map_err(|_| format!("line {}: cannot parse {line:?} as a real", idx + 1))?;
        if !value.is_finite() {
            return Err(format!("line {}: value must be finite, got {line}", idx + 1));
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err("input contains no values".to_string());
    }
    SequencePrefix::new(values).map_err(|e| e.to_string())
}

fn cmd_stats(args: StatsArgs) -> Result<u8, String> {
    let prefix = read_prefix(&args.input)?;
    let threshold = args
        .threshold
        .unwrap_or_else(|| default_threshold(prefix.len()));
    let report = ud_verdict(&prefix, args.a, args.b, args.grid, threshold)
        .map_err(|e| e.to_string())?;
    let content = match args.format {
        TableFormat::Json => {
            let mut json = to_canonical_json(&report).map_err(|e| e.to_string())?;
            json.push('\n');
            json
        }
        TableFormat::Csv => report.to_csv(),
    };
    write_output(&args.output, &content)?;
    if args.strict && report.verdict == Verdict::Inconsistent {
        return Ok(1);
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// mass
// ---------------------------------------------------------------------------

fn cmd_mass(args: MassArgs) -> Result<u8, String> {
    let schedule = GaussianSchedule::new(args.c, args.n_max).map_err(|e| e.to_string())?;
    let shift = args.shift.to_shift()?.unwrap_or_else(ShiftVector::zero);
    if args.n_from == 0 || args.n_from > args.n_to {
        return Err(format!(
            "invalid range: requires 1 <= from <= to, got from={} to={}",
            args.n_from, args.n_to
        ));
    }
    let value = borel_cantelli_sum(
        &schedule,
        &shift,
        (args.lo, args.hi),
        args.n_from,
        args.n_to,
    )
    .map_err(|e| e.to_string())?;
    let envelope = envelope_sum(args.n_from, args.n_to);

    let content = match args.format {
        TableFormat::Json => {
            let record = serde_json::json!({
                "n_from": args.n_from,
                "n_to": args.n_to,
                "value": value,
                "envelope": envelope,
            });
            let mut json = to_canonical_json(&record).map_err(|e| e.to_string())?;
            json.push('\n');
            json
        }
        TableFormat::Csv => {
            let mut out = String::new();
            out.push_str("n,sigma,shift,mass,cumulative,envelope,envelope_cumulative\n");
            let mut cumulative = 0.0;
            let mut env_cumulative = 0.0;
            for n in args.n_from..=args.n_to {
                let h = shift.eval(n);
                let event =
                    CylinderEvent::new(n, args.lo, args.hi, h).map_err(|e| e.to_string())?;
                let mass = gaussian_mass(&event, &schedule).map_err(|e| e.to_string())?;
                cumulative += mass;
                let env = f64::exp2(-(n as f64));
                env_cumulative += env;
                let sigma = schedule.sigma(n).map_err(|e| e.to_string())?;
                out.push_str(&format!(
                    "{n},{sigma},{h},{mass},{cumulative},{env},{env_cumulative}\n"
                ));
            }
            out
        }
    };
    write_output(&args.output, &content)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

fn cmd_experiment(args: ExperimentArgs) -> Result<u8, String> {
    let file: FlatConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            parse_flat_config(&text).map_err(|e| e.to_string())?
        }
        None => FlatConfig::default(),
    };

    let mut flags = ExperimentParams {
        threshold: args.threshold,
        allowed_failures: args.allowed_failures,
        grid: args.grid,
        c: args.c,
        n_max: args.n_max,
        density_floor: args.density_floor,
        shift: args.shift.to_shift()?,
        lo: args.lo,
        hi: args.hi,
        sweep: None,
        n_to: args.n_to,
        slack_sigma: args.slack_sigma,
        generator: args.generator.clone(),
        bank: args
            .bank
            .as_ref()
            .map(|csv| csv.split(',').map(|s| s.trim().to_string()).collect()),
        transform: args.transform.clone(),
        keep_raw: args.keep_raw.then_some(true),
    };
    if let Some(csv) = &args.sweep {
        let sweep = csv
            .split(',')
            .map(|s| s.trim().parse::<u32>())
            .collect::<Result<Vec<u32>, _>>()
            .map_err(|_| format!("invalid sweep: cannot parse {csv:?}"))?;
        flags.sweep = Some(sweep);
    }

    let n = args.n.or(file.n).unwrap_or(10_000);
    let m = args.m.or(file.m).unwrap_or(100);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let params = file.params.merged(&flags);

    let config =
        ExperimentConfig::new(&args.name, n, m, seed, params).map_err(|e| e.to_string())?;
    let result = experiments::run(&config).map_err(|e| e.to_string())?;

    fs::create_dir_all(&args.out_dir)
        .map_err(|e| format!("cannot create {}: {e}", args.out_dir.display()))?;
    let base = result.basename();
    let json_path = args.out_dir.join(format!("{base}.json"));
    let csv_path = args.out_dir.join(format!("{base}.csv"));
    let mut json = result.to_canonical_json().map_err(|e| e.to_string())?;
    json.push('\n');
    fs::write(&json_path, json).map_err(|e| format!("cannot write {}: {e}", json_path.display()))?;
    fs::write(&csv_path, result.to_csv())
        .map_err(|e| format!("cannot write {}: {e}", csv_path.display()))?;

    println!(
        "{}: {} -> {}",
        config.name,
        if result.pass { "PASS" } else { "FAIL" },
        json_path.display()
    );
    Ok(if result.pass { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// list
// ---------------------------------------------------------------------------

fn cmd_list() -> Result<u8, String> {
    println!("experiments:");
    let blurbs = [
        ("uniform-ae-ud", "i.i.d. uniform prefixes look uniformly distributed"),
        ("gaussian-not-ud", "sigma-schedule samples escape [-1/2, 1/2]"),
        ("gaussian-mod1-ud", "fractional parts of schedule samples are near-uniform"),
        ("borel-cantelli", "tail-event hit fractions vs analytic union bounds"),
        ("weyl-slln", "prefix averages of the function bank vs exact integrals"),
    ];
    for (name, blurb) in blurbs {
        debug_assert!(EXPERIMENT_NAMES.contains(&name));
        println!("  {name:<17} {blurb}");
    }
    println!("\ntest functions:");
    let ids: Vec<String> = TestFunction::default_bank()
        .iter()
        .map(|f| f.id().to_string())
        .collect();
    println!("  {}", ids.join(", "));
    Ok(0)
}
