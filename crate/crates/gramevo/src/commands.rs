//! `gramevo` subcommands.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gramevo_core::{
    build_dataset, evaluate, evolve_with, parse_formula, sieve, Dataset, DatasetMode, Evaluator,
    GenerationRecord, PrimeTable, RunResult, SequentialEvaluator,
};

use crate::config::RunConfigFile;
use crate::io::{load_grammar, read_dataset, write_atomic, write_dataset};
use crate::parallel::{ParallelEvaluator, WallClock};
use crate::report::{best_txt, history_csv, predictions_csv, RunSources};
use crate::Error;

pub const SEED_ENV: &str = "GRAMEVO_SEED";
pub const DEFAULT_GRAMMAR: &str = "builtin:canonical";
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "gramevo", version, about = "Grammatical evolution for symbolic regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a prime-counting dataset file.
    GenData(GenDataArgs),
    /// Evolve a formula against a dataset.
    Evolve(EvolveArgs),
    /// Evaluate a formula at given points.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// x = i-th prime, y = i
    PrimeIndexed,
    /// x = 2..=n+1, y = pi(x)
    IntegerRange,
}

impl From<ModeArg> for DatasetMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::PrimeIndexed => DatasetMode::PrimeIndexed,
            ModeArg::IntegerRange => DatasetMode::IntegerRange,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenDataArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::PrimeIndexed)]
    pub mode: ModeArg,
    /// Number of points.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Sieve limit; by default just large enough for `n`.
    #[arg(long)]
    pub limit: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvolveArgs {
    /// `key = value` run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grammar file, or `builtin:paper` / `builtin:canonical`.
    #[arg(long)]
    pub grammar: Option<PathBuf>,
    /// Dataset file; defaults to the first 1000 primes, prime-indexed.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long = "out")]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub genome_length: Option<usize>,
    #[arg(long)]
    pub codon_max: Option<u32>,
    #[arg(long)]
    pub max_wraps: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub tournament_size: Option<usize>,
    #[arg(long)]
    pub crossover_rate: Option<f64>,
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    #[arg(long)]
    pub elitism: Option<usize>,
    #[arg(long)]
    pub invalid_retries: Option<usize>,
    /// Evaluation threads; 0 uses every core, 1 evaluates sequentially.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Suppress per-generation progress lines.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, conflicts_with = "formula_file", required_unless_present = "formula_file")]
    pub formula: Option<String>,
    /// File whose contents (trimmed) are the formula.
    #[arg(long)]
    pub formula_file: Option<PathBuf>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub points: Vec<f64>,
    /// Also report the MSE against this dataset.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), Error> {
    match cli.command {
        Command::GenData(a) => gen_data(&a, out),
        Command::Evolve(a) => evolve(&a, out).map(|_| ()),
        Command::Eval(a) => eval(&a, out),
    }
}

fn table_for(mode: DatasetMode, n: usize, limit: Option<u32>) -> Result<PrimeTable, Error> {
    Ok(match (limit, mode) {
        (Some(l), _) => sieve(l)?,
        (None, DatasetMode::PrimeIndexed) => PrimeTable::with_count(n),
        (None, DatasetMode::IntegerRange) => {
            let l = u32::try_from(n + 1)
                .map_err(|_| Error::Usage(format!("n = {n} is beyond the 32-bit range")))?;
            sieve(l.max(2))?
        }
    })
}

pub fn gen_data(args: &GenDataArgs, out: &mut dyn Write) -> Result<(), Error> {
    let mode = DatasetMode::from(args.mode);
    let table = table_for(mode, args.n, args.limit)?;
    let dataset = build_dataset(mode, args.n, &table)?;
    write_dataset(&dataset, &args.out)?;
    let pts = dataset.points();
    let _ = writeln!(
        out,
        "wrote {} points, x from {} to {}, to {}",
        pts.len(),
        pts[0].0,
        pts[pts.len() - 1].0,
        args.out.display()
    );
    Ok(())
}

/// The prime-indexed dataset of the first 1000 primes.
pub fn default_dataset() -> Dataset {
    build_dataset(DatasetMode::PrimeIndexed, 1000, &PrimeTable::with_count(1000))
        .expect("table sized for 1000 primes")
}

fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, Error> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(rand::random()),
    }
}

pub fn evolve(args: &EvolveArgs, out: &mut dyn Write) -> Result<RunResult, Error> {
    let file = match &args.config {
        Some(p) => RunConfigFile::load(p)?,
        None => RunConfigFile::default(),
    };
    let mut config = file.evolution;
    let overrides = [
        (&mut config.population_size, args.population),
        (&mut config.generations, args.generations),
        (&mut config.genome_length, args.genome_length),
        (&mut config.max_wraps, args.max_wraps),
        (&mut config.max_depth, args.max_depth),
        (&mut config.tournament_size, args.tournament_size),
        (&mut config.elitism_count, args.elitism),
        (&mut config.invalid_retries, args.invalid_retries),
    ];
    for (field, value) in overrides {
        if let Some(v) = value {
            *field = v;
        }
    }
    if let Some(v) = args.codon_max {
        config.codon_max = v;
    }
    if let Some(v) = args.crossover_rate {
        config.crossover_rate = v;
    }
    if let Some(v) = args.mutation_rate {
        config.mutation_rate = v;
    }
    config.rng_seed = resolve_seed(args.seed, file.rng_seed)?;
    config.validate()?;

    let grammar_spec = args
        .grammar
        .clone()
        .or(file.grammar_path)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_GRAMMAR));
    let grammar = load_grammar(&grammar_spec)?;
    let dataset_path = args.dataset.clone().or(file.dataset_path);
    let dataset = match &dataset_path {
        Some(p) => read_dataset(p)?,
        None => default_dataset(),
    };
    let output_dir = args
        .output_dir
        .clone()
        .or(file.output_dir)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    fs::create_dir_all(&output_dir).map_err(|e| Error::io(&output_dir, e))?;

    let dataset_label = dataset_path
        .as_ref()
        .map_or_else(|| "builtin:prime-indexed-1000".to_string(), |p| p.display().to_string());
    let grammar_label = grammar_spec.display().to_string();
    let _ = writeln!(
        out,
        "seed {}  grammar {}  dataset {} ({} points)",
        config.rng_seed,
        grammar_label,
        dataset_label,
        dataset.len()
    );

    let evaluator: Box<dyn Evaluator> = match args.threads {
        1 => Box::new(SequentialEvaluator),
        0 => Box::new(ParallelEvaluator::new()),
        n => Box::new(
            ParallelEvaluator::with_threads(n).map_err(|e| Error::Usage(e.to_string()))?,
        ),
    };
    let quiet = args.quiet;
    let mut sink = |r: &GenerationRecord| {
        if !quiet {
            let mean = r.mean_fitness.map_or_else(|| "-".to_string(), |m| format!("{m:.4e}"));
            let _ = writeln!(
                out,
                "gen {:>4}  best {}  mean {}  invalid {}  {}",
                r.generation, r.best_fitness, mean, r.invalid_count, r.best_phenotype
            );
        }
    };
    let clock = WallClock::start();
    let run = evolve_with(&config, &grammar, &dataset, evaluator.as_ref(), &clock, Some(&mut sink))?;

    write_atomic(&output_dir.join("history.csv"), history_csv(&run.history).as_bytes())?;
    let sources = RunSources {
        grammar: &grammar_label,
        dataset: &dataset_label,
    };
    write_atomic(&output_dir.join("best.txt"), best_txt(&run, &sources).as_bytes())?;
    if let Some(expr) = &run.best.expr {
        write_atomic(&output_dir.join("predictions.csv"), predictions_csv(expr, &dataset).as_bytes())?;
    }
    let _ = writeln!(
        out,
        "best fitness {}  {}  ({:.1} s)",
        run.best.fitness,
        run.best.expr.as_ref().map(gramevo_core::format_expr).unwrap_or_default(),
        run.elapsed_seconds
    );
    Ok(run)
}

fn read_formula(args: &EvalArgs) -> Result<String, Error> {
    match (&args.formula, &args.formula_file) {
        (Some(f), _) => Ok(f.clone()),
        (None, Some(p)) => fs::read_to_string(p)
            .map(|s| s.trim().to_string())
            .map_err(|e| Error::io(p, e)),
        (None, None) => Err(Error::Usage("give --formula or --formula-file".into())),
    }
}

pub fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<(), Error> {
    let text = read_formula(args)?;
    let expr = parse_formula(&text)?;
    let dataset = args.dataset.as_deref().map(read_dataset).transpose()?;
    for &x in &args.points {
        let _ = writeln!(out, "{x}\t{}", evaluate(&expr, x));
    }
    if let Some(d) = dataset {
        let _ = writeln!(out, "mse\t{}", raw_mse(&expr, &d));
    }
    Ok(())
}

/// Plain MSE, non-finite results included.
fn raw_mse(expr: &gramevo_core::ExprNode, dataset: &Dataset) -> f64 {
    let sum: f64 = dataset
        .points()
        .iter()
        .map(|&(x, y)| (evaluate(expr, x) - y).powi(2))
        .sum();
    sum / dataset.len() as f64
}
