//! `ringmc` command line: sampling, profiles, knot analysis and the two
//! experiments. Exit codes: 0 success, 1 runtime failure, 2 invalid
//! configuration or input, 3 trefoil study stopped by its sample budget
//! (the partial report is still written).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::experiments::{
    for_each_ordered, open_chain_stats, ring_profile, run_convergence, run_trefoil_study, ConvergenceParams, Envelope,
    TrefoilStudyParams, BUILD_ID, CLASSIFY_DOMAIN, KNOT_LENGTH_DOMAIN,
};
use crate::knot::{
    classify_ring, knot_length, KnotClass, KnotLengthParams, KnotLengthResult, DEFAULT_CLOSURES, DEFAULT_RADIUS_FACTOR,
    DEFAULT_TOLERANCE,
};
use crate::polygon_io::{read_rings, ring_vertices, write_json, write_text};
use crate::sampler::{ensemble_ring, MixPolicy, RngStream};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Comma-separated tables; for polygon files, whitespace-separated `x y z` lines.
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "ringmc", version = BUILD_ID, about = "Monte Carlo sampling and knot analysis of ideal rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: available parallelism). Never changes output.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct KnotArgs {
    /// Random closures per closure spectrum.
    #[arg(long, default_value_t = DEFAULT_CLOSURES)]
    closures: usize,
    /// Trefoil fraction a segment's spectrum must exceed.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Closure sphere radius as a multiple of the segment diameter.
    #[arg(long, default_value_t = DEFAULT_RADIUS_FACTOR)]
    radius_factor: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample rings and write their vertices.
    Sample {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        count: u64,
        /// Crankshaft moves per ring [default: 6n].
        #[arg(long)]
        moves: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Estimate the shape profile with closed-form columns for rings and open chains.
    Profile {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        count: u64,
        /// Crankshaft moves per ring [default: 6n].
        #[arg(long)]
        moves: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Classify the rings of a polygon file; trefoils also get a knot length.
    Knots {
        /// Polygon file (text or JSON).
        input: PathBuf,
        #[command(flatten)]
        knot: KnotArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convergence of the mean ring radius of gyration with population size.
    Converge {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 150)]
        moves: usize,
        /// Comma-separated population sizes.
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000,100000")]
        sizes: Vec<u64>,
        #[arg(long, default_value_t = 10)]
        replicates: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare trefoil and phantom shape profiles and measure knot lengths.
    TrefoilStudy {
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// Trefoils to collect.
        #[arg(long, default_value_t = 200)]
        target: usize,
        /// Crankshaft moves per ring [default: 6n].
        #[arg(long)]
        moves: Option<usize>,
        /// Sample budget as a multiple of the target.
        #[arg(long, default_value_t = 100)]
        budget_factor: u64,
        #[command(flatten)]
        knot: KnotArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Sample,
    Profile,
    Knots,
    Converge,
    TrefoilStudy,
}

/// Validated settings for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub n: usize,
    pub count: u64,
    pub moves: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub knot: KnotLengthParams,
    #[serde(skip)]
    pub threads: Option<usize>,
    pub sizes: Vec<u64>,
    pub replicates: usize,
    pub target: usize,
    pub budget_factor: u64,
    pub input: Option<PathBuf>,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> RunConfig {
        let base = |command, n: usize, output: OutputArgs| RunConfig {
            command,
            n,
            count: 0,
            moves: 6 * n,
            seed: output.seed,
            out: output.out,
            format: output.format,
            knot: KnotLengthParams::default(),
            threads: cli.threads,
            sizes: Vec::new(),
            replicates: 0,
            target: 0,
            budget_factor: 0,
            input: None,
        };
        let knot_params = |k: KnotArgs| KnotLengthParams {
            closures: k.closures,
            tolerance: k.tolerance,
            radius_factor: k.radius_factor,
        };
        match cli.command {
            Command::Sample { n, count, moves, output } => {
                RunConfig { count, moves: moves.unwrap_or(6 * n), ..base(CommandKind::Sample, n, output) }
            }
            Command::Profile { n, count, moves, output } => {
                RunConfig { count, moves: moves.unwrap_or(6 * n), ..base(CommandKind::Profile, n, output) }
            }
            Command::Knots { input, knot, output } => {
                RunConfig { knot: knot_params(knot), input: Some(input), ..base(CommandKind::Knots, 0, output) }
            }
            Command::Converge { n, moves, sizes, replicates, output } => {
                RunConfig { moves, sizes, replicates, ..base(CommandKind::Converge, n, output) }
            }
            Command::TrefoilStudy { n, target, moves, budget_factor, knot, output } => RunConfig {
                moves: moves.unwrap_or(6 * n),
                target,
                budget_factor,
                knot: knot_params(knot),
                ..base(CommandKind::TrefoilStudy, n, output)
            },
        }
    }

    /// Checks every constraint; the message names the offending flag.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.threads == Some(0) {
            return Err("--threads must be positive".into());
        }
        if self.command != CommandKind::Knots {
            if self.n % 2 == 1 {
                return Err(format!("--n must be even for ring sampling (got {})", self.n));
            }
            if self.n < 4 {
                return Err(format!("--n must be at least 4 (got {})", self.n));
            }
            if self.moves == 0 {
                return Err("--moves must be positive".into());
            }
        }
        match self.command {
            CommandKind::Sample | CommandKind::Profile if self.count == 0 => {
                return Err("--count must be positive".into())
            }
            CommandKind::Converge => {
                if self.sizes.is_empty() || self.sizes.contains(&0) {
                    return Err("--sizes must list positive sizes".into());
                }
                if self.replicates == 0 {
                    return Err("--replicates must be positive".into());
                }
            }
            CommandKind::TrefoilStudy => {
                if self.target == 0 {
                    return Err("--target must be positive".into());
                }
                if self.budget_factor == 0 {
                    return Err("--budget-factor must be positive".into());
                }
            }
            _ => {}
        }
        if matches!(self.command, CommandKind::Knots | CommandKind::TrefoilStudy) {
            if self.knot.closures == 0 {
                return Err("--closures must be positive".into());
            }
            if !(self.knot.tolerance > 0.0 && self.knot.tolerance < 1.0) {
                return Err(format!("--tolerance must lie in (0, 1) (got {})", self.knot.tolerance));
            }
            if !(self.knot.radius_factor >= 3.0) || !self.knot.radius_factor.is_finite() {
                return Err(format!("--radius-factor must be at least 3 (got {})", self.knot.radius_factor));
            }
        }
        Ok(())
    }
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Invalid(e.to_string()),
            e => Failure::Runtime(e.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let config = RunConfig::from_cli(cli);
    if let Err(msg) = config.validate() {
        eprintln!("error: {msg}");
        return EXIT_INVALID;
    }
    if let Some(threads) = config.threads {
        // a second call in the same process keeps the first pool, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match execute(&config) {
        Ok(code) => code,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn execute(config: &RunConfig) -> std::result::Result<i32, Failure> {
    match config.command {
        CommandKind::Sample => cmd_sample(config),
        CommandKind::Profile => cmd_profile(config),
        CommandKind::Knots => cmd_knots(config),
        CommandKind::Converge => cmd_converge(config),
        CommandKind::TrefoilStudy => cmd_trefoil_study(config),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Runtime(format!("cannot write output: {e}")))
        }
    }
}

/// `#` comment lines carrying build, seed and parameters ahead of a CSV table.
fn csv_preamble(config: &RunConfig) -> String {
    format!(
        "# build: {BUILD_ID}\n# seed: {}\n# parameters: {}\n",
        config.seed,
        serde_json::to_string(config).expect("config serializes")
    )
}

fn json_report<R: Serialize>(config: &RunConfig, report: R) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope::new(config.seed, config, report)).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_sample(config: &RunConfig) -> std::result::Result<i32, Failure> {
    let policy = MixPolicy::with_moves(config.moves);
    let mut polygons = Vec::with_capacity(config.count as usize);
    for_each_ordered(
        config.count,
        |i| ensemble_ring(config.seed, config.n, policy, i),
        |_, r| {
            polygons.push(ring_vertices(&r));
            Ok(true)
        },
    )?;
    let text = match config.format {
        Format::Csv => write_text(&polygons),
        Format::Json => write_json(&polygons),
    };
    emit(&config.out, &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ProfileReport {
    profile: crate::shape_stats::ShapeProfile,
    open_chains: crate::experiments::OpenChainStats,
}

fn cmd_profile(config: &RunConfig) -> std::result::Result<i32, Failure> {
    let profile = ring_profile(config.seed, config.n, MixPolicy::with_moves(config.moves), config.count)?;
    let text = match config.format {
        Format::Csv => csv_preamble(config) + &profile.to_csv(),
        Format::Json => {
            let open_chains = open_chain_stats(config.seed, config.n, config.count)?;
            json_report(config, ProfileReport { profile, open_chains })
        }
    };
    emit(&config.out, &text)?;
    Ok(EXIT_OK)
}

/// One line of `knots` output.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct KnotRecord {
    pub index: usize,
    pub class: Option<KnotClass>,
    pub determinant: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub knot_length: Option<KnotLengthResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

fn cmd_knots(config: &RunConfig) -> std::result::Result<i32, Failure> {
    let path = config.input.as_deref().expect("knots has an input");
    let text = read_input(path)?;
    let rings = read_rings(&text).map_err(|e| match e {
        Error::Parse { line, message } => Failure::Invalid(format!("{}:{line}: {message}", path.display())),
        e => Failure::Invalid(e.to_string()),
    })?;
    let classify = RngStream::new(config.seed).substream(CLASSIFY_DOMAIN);
    let lengths = RngStream::new(config.seed).substream(KNOT_LENGTH_DOMAIN);
    let mut records = Vec::with_capacity(rings.len());
    for_each_ordered(
        rings.len() as u64,
        |i| {
            let ring = &rings[i as usize];
            let mut record =
                KnotRecord { index: i as usize, class: None, determinant: None, knot_length: None, error: None };
            match classify_ring(ring, &mut classify.substream(i)) {
                Ok(class) => {
                    record.class = Some(class);
                    record.determinant = Some(class.determinant());
                    if class == KnotClass::Trefoil {
                        match knot_length(ring, config.knot, &lengths.substream(i)) {
                            Ok(k) => record.knot_length = Some(k),
                            Err(e) => record.error = Some(e.to_string()),
                        }
                    }
                }
                Err(e @ (Error::ProjectionFailed(_) | Error::InconsistentClassification(_))) => {
                    record.error = Some(e.to_string())
                }
                Err(e) => return Err(e),
            }
            Ok(record)
        },
        |_, r| {
            records.push(r);
            Ok(true)
        },
    )?;
    let mut out = String::new();
    match config.format {
        Format::Json => {
            for r in &records {
                out.push_str(&serde_json::to_string(r).expect("record serializes"));
                out.push('\n');
            }
        }
        Format::Csv => {
            out.push_str(&csv_preamble(config));
            out.push_str("index,class,determinant,knot_start,knot_length\n");
            for r in &records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.index,
                    r.class.map(|c| c.label()).unwrap_or_default(),
                    r.determinant.map(|d| d.to_string()).unwrap_or_default(),
                    r.knot_length.as_ref().map(|k| k.start.to_string()).unwrap_or_default(),
                    r.knot_length.as_ref().map(|k| k.length.to_string()).unwrap_or_default(),
                );
            }
        }
    }
    emit(&config.out, &out)?;
    Ok(EXIT_OK)
}

fn read_input(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn cmd_converge(config: &RunConfig) -> std::result::Result<i32, Failure> {
    let params = ConvergenceParams {
        n: config.n,
        moves: config.moves,
        sizes: config.sizes.clone(),
        replicates: config.replicates,
        seed: config.seed,
    };
    let report = run_convergence(&params)?;
    let text = match config.format {
        Format::Csv => csv_preamble(config) + &report.to_csv(),
        Format::Json => json_report(config, &report),
    };
    emit(&config.out, &text)?;
    eprintln!("fitted slope {:.3}, monotone decrease: {}", report.fit.slope, report.monotone_decreasing);
    Ok(EXIT_OK)
}

fn cmd_trefoil_study(config: &RunConfig) -> std::result::Result<i32, Failure> {
    let params = TrefoilStudyParams {
        n: config.n,
        moves: config.moves,
        target_trefoils: config.target,
        budget_factor: config.budget_factor,
        knot: config.knot,
        seed: config.seed,
    };
    let report = run_trefoil_study(&params)?;
    let text = match config.format {
        Format::Csv => csv_preamble(config) + &report.to_csv(),
        Format::Json => json_report(config, &report),
    };
    emit(&config.out, &text)?;
    if !report.complete {
        eprintln!(
            "warning: sample budget exhausted after {} rings with {} of {} trefoils",
            report.sampled, report.trefoils, config.target
        );
        return Ok(EXIT_INCOMPLETE);
    }
    Ok(EXIT_OK)
}
