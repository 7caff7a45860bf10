//! Generational evolutionary loop.
//!
//! All random decisions come from one ChaCha8 stream seeded with
//! `rng_seed`, consumed in a fixed order:
//!
//! 1. initialization: for each individual in turn, `genome_length` codon
//!    draws, repeated for every re-draw of an invalid mapping;
//! 2. each generation after the first, for each pair of offspring: two
//!    tournaments, the crossover coin and cut point, then mutation of the
//!    first child and of the second child. A surplus second child is
//!    generated and discarded.
//!
//! Scoring never touches the stream, so an [`Evaluator`] may score genomes
//! in parallel without changing the run.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{parse_formula, ExprNode};
use crate::grammar::Grammar;
use crate::mapping::{map_genome, Genome, MapLimits, DEFAULT_MAX_DEPTH, DEFAULT_MAX_WRAPS};
use crate::primes::Dataset;

pub type EngineRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> EngineRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimized fitness. `Worst` orders after every finite value.
#[derive(Debug, Clone, Copy)]
pub enum Fitness {
    Value(f64),
    Worst,
}

impl Fitness {
    /// `Worst` unless `v` is finite.
    pub fn from_value(v: f64) -> Self {
        if v.is_finite() {
            Fitness::Value(v)
        } else {
            Fitness::Worst
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Fitness::Value(v) => Some(v),
            Fitness::Worst => None,
        }
    }

    pub fn is_worst(self) -> bool {
        matches!(self, Fitness::Worst)
    }
}

impl Ord for Fitness {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Fitness::Value(a), Fitness::Value(b)) => a.total_cmp(b),
            (Fitness::Value(_), Fitness::Worst) => Ordering::Less,
            (Fitness::Worst, Fitness::Value(_)) => Ordering::Greater,
            (Fitness::Worst, Fitness::Worst) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Fitness {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Fitness {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Fitness {}

impl fmt::Display for Fitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fitness::Value(v) => write!(f, "{v}"),
            Fitness::Worst => f.write_str("worst"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub phenotype: Option<String>,
    pub expr: Option<ExprNode>,
    pub fitness: Fitness,
    /// Mapping succeeded and fitness is finite.
    pub valid: bool,
    pub codons_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub genome_length: usize,
    pub codon_max: u32,
    pub max_wraps: usize,
    pub max_depth: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-codon replacement probability.
    pub mutation_rate: f64,
    pub elitism_count: usize,
    pub rng_seed: u64,
    pub invalid_retries: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 500,
            generations: 50,
            genome_length: 200,
            codon_max: 100_000,
            max_wraps: DEFAULT_MAX_WRAPS,
            max_depth: DEFAULT_MAX_DEPTH,
            tournament_size: 2,
            crossover_rate: 0.75,
            mutation_rate: 0.01,
            elitism_count: 1,
            rng_seed: 0,
            invalid_retries: 10,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: &str| Err(EngineError::InvalidConfig(m.to_string()));
        if self.population_size == 0 {
            return bad("population_size must be positive");
        }
        if self.generations == 0 {
            return bad("generations must be positive");
        }
        if self.genome_length == 0 {
            return bad("genome_length must be positive");
        }
        if self.codon_max == 0 {
            return bad("codon_max must be positive");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return bad("tournament_size must be in 1..=population_size");
        }
        if self.elitism_count > self.population_size {
            return bad("elitism_count must not exceed population_size");
        }
        for (name, rate) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(EngineError::InvalidConfig(alloc::format!(
                    "{name} must be within [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn map_limits(&self) -> MapLimits {
        MapLimits::new(self.max_wraps, self.max_depth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: Fitness,
    /// Mean over valid individuals; `None` when none are valid.
    pub mean_fitness: Option<f64>,
    pub invalid_count: usize,
    /// Empty when the generation's best did not map.
    pub best_phenotype: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub best: Individual,
    pub history: Vec<GenerationRecord>,
    pub elapsed_seconds: f64,
    pub config_echo: EvolutionConfig,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("max_depth {max_depth} cannot hold any complete derivation (start rule needs {needed})")]
    DepthBelowMinimum { max_depth: usize, needed: usize },
}

/// Mean squared error of `expr` over the dataset; `Worst` if any prediction
/// or the sum is not finite.
pub fn fitness_mse(expr: &ExprNode, dataset: &Dataset) -> Fitness {
    let mut sum = 0.0;
    for &(x, y) in dataset.points() {
        let pred = expr.eval(x);
        if !pred.is_finite() {
            return Fitness::Worst;
        }
        let d = pred - y;
        sum += d * d;
    }
    Fitness::from_value(sum / dataset.len() as f64)
}

/// Immutable inputs shared by every scoring call.
#[derive(Debug, Clone, Copy)]
pub struct ScoringContext<'a> {
    pub grammar: &'a Grammar,
    pub dataset: &'a Dataset,
    pub limits: MapLimits,
}

impl ScoringContext<'_> {
    pub fn score(&self, genome: Genome) -> Individual {
        let mapped = map_genome(self.grammar, &genome, self.limits);
        let expr = mapped
            .phenotype
            .as_deref()
            .and_then(|p| parse_formula(p).ok());
        let fitness = expr
            .as_ref()
            .map_or(Fitness::Worst, |e| fitness_mse(e, self.dataset));
        Individual {
            genome,
            phenotype: mapped.phenotype,
            valid: expr.is_some() && !fitness.is_worst(),
            expr,
            fitness,
            codons_used: mapped.codons_used,
        }
    }
}

/// Scores a batch of genomes. Output order must match input order.
pub trait Evaluator {
    fn score_all(&self, ctx: &ScoringContext<'_>, genomes: Vec<Genome>) -> Vec<Individual>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialEvaluator;

impl Evaluator for SequentialEvaluator {
    fn score_all(&self, ctx: &ScoringContext<'_>, genomes: Vec<Genome>) -> Vec<Individual> {
        genomes.into_iter().map(|g| ctx.score(g)).collect()
    }
}

/// Monotonic time source in seconds.
pub trait Clock {
    fn now_seconds(&self) -> f64;
}

/// Reports zero elapsed time.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_seconds(&self) -> f64 {
        0.0
    }
}

fn random_genome<R: Rng + ?Sized>(length: usize, codon_max: u32, rng: &mut R) -> Genome {
    let codons = (0..length).map(|_| rng.gen_range(0..codon_max)).collect();
    Genome::from_parts_unchecked(codons, codon_max)
}

/// Draws and scores the initial population. A genome whose mapping is
/// invalid is re-drawn up to `invalid_retries` times, then kept as is.
pub fn init_population<R: Rng + ?Sized>(
    config: &EvolutionConfig,
    ctx: &ScoringContext<'_>,
    rng: &mut R,
    evaluator: &dyn Evaluator,
) -> Vec<Individual> {
    let genomes = (0..config.population_size)
        .map(|_| {
            let mut genome = random_genome(config.genome_length, config.codon_max, rng);
            for _ in 0..config.invalid_retries {
                if map_genome(ctx.grammar, &genome, ctx.limits).is_valid() {
                    break;
                }
                genome = random_genome(config.genome_length, config.codon_max, rng);
            }
            genome
        })
        .collect();
    evaluator.score_all(ctx, genomes)
}

/// Draws `k` individuals with replacement and returns the fittest; ties go
/// to the earliest draw.
///
/// # Panics
///
/// If the population is empty or `k` is zero.
pub fn tournament_select<'a, R: Rng + ?Sized>(
    population: &'a [Individual],
    k: usize,
    rng: &mut R,
) -> &'a Individual {
    assert!(!population.is_empty() && k > 0, "tournament needs k >= 1 and a non-empty population");
    let mut best = &population[rng.gen_range(0..population.len())];
    for _ in 1..k {
        let challenger = &population[rng.gen_range(0..population.len())];
        if challenger.fitness < best.fitness {
            best = challenger;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverOutcome {
    Swapped { cut: usize },
    Skipped,
    /// The shorter parent has fewer than two codons; parents are returned.
    DegenerateLength,
}

/// One-point crossover: with probability `rate`, swaps the tails after a cut
/// drawn uniformly from `1..min_len`.
pub fn crossover<R: Rng + ?Sized>(
    a: &Genome,
    b: &Genome,
    rate: f64,
    rng: &mut R,
) -> (Genome, Genome, CrossoverOutcome) {
    if !rng.gen_bool(rate) {
        return (a.clone(), b.clone(), CrossoverOutcome::Skipped);
    }
    let shortest = a.len().min(b.len());
    if shortest < 2 {
        return (a.clone(), b.clone(), CrossoverOutcome::DegenerateLength);
    }
    let cut = rng.gen_range(1..shortest);
    let (x, y) = crossover_at(a, b, cut);
    (x, y, CrossoverOutcome::Swapped { cut })
}

/// Swaps the tails of `a` and `b` starting at codon `cut`.
///
/// # Panics
///
/// If `cut` exceeds either genome's length or the codon bounds differ.
pub fn crossover_at(a: &Genome, b: &Genome, cut: usize) -> (Genome, Genome) {
    assert_eq!(a.codon_max(), b.codon_max(), "parents must share codon_max");
    let (ac, bc) = (a.codons(), b.codons());
    let first = [&ac[..cut], &bc[cut..]].concat();
    let second = [&bc[..cut], &ac[cut..]].concat();
    (
        Genome::from_parts_unchecked(first, a.codon_max()),
        Genome::from_parts_unchecked(second, a.codon_max()),
    )
}

/// Replaces each codon, with probability `rate`, by a uniform draw.
pub fn mutate<R: Rng + ?Sized>(genome: &Genome, rate: f64, rng: &mut R) -> Genome {
    let codon_max = genome.codon_max();
    let codons = genome
        .codons()
        .iter()
        .map(|&c| {
            if rng.gen_bool(rate) {
                rng.gen_range(0..codon_max)
            } else {
                c
            }
        })
        .collect();
    Genome::from_parts_unchecked(codons, codon_max)
}

fn record(generation: usize, population: &[Individual]) -> GenerationRecord {
    let best = population
        .iter()
        .min_by(|a, b| a.fitness.cmp(&b.fitness))
        .expect("population is never empty");
    let best_fitness = best.fitness;
    let invalid_count = population.iter().filter(|i| !i.valid).count();
    // Incremental mean of offsets from the minimum: never overflows and never
    // drops below the minimum through rounding.
    let mean_fitness = best_fitness.value().map(|min| {
        let mut mean_offset = 0.0;
        let mut k = 0.0;
        for v in population.iter().filter_map(|i| i.fitness.value()) {
            k += 1.0;
            mean_offset += (v - min - mean_offset) / k;
        }
        min + mean_offset
    });
    GenerationRecord {
        generation,
        best_fitness,
        mean_fitness,
        invalid_count,
        best_phenotype: best.phenotype.clone().unwrap_or_default(),
    }
}

/// Runs with the sequential evaluator and no clock.
pub fn evolve(
    config: &EvolutionConfig,
    grammar: &Grammar,
    dataset: &Dataset,
    progress: Option<&mut dyn FnMut(&GenerationRecord)>,
) -> Result<RunResult, EngineError> {
    evolve_with(config, grammar, dataset, &SequentialEvaluator, &NoClock, progress)
}

pub fn evolve_with(
    config: &EvolutionConfig,
    grammar: &Grammar,
    dataset: &Dataset,
    evaluator: &dyn Evaluator,
    clock: &dyn Clock,
    mut progress: Option<&mut dyn FnMut(&GenerationRecord)>,
) -> Result<RunResult, EngineError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(EngineError::EmptyDataset);
    }
    // A tree of n nonterminal levels has n + 1 levels counting its leaves.
    let needed = grammar.start_rule().min_depth() + 1;
    if config.max_depth < needed {
        return Err(EngineError::DepthBelowMinimum {
            max_depth: config.max_depth,
            needed,
        });
    }

    let started = clock.now_seconds();
    let ctx = ScoringContext {
        grammar,
        dataset,
        limits: config.map_limits(),
    };
    let mut rng = seeded_rng(config.rng_seed);
    let mut population = init_population(config, &ctx, &mut rng, evaluator);
    let mut history = Vec::with_capacity(config.generations);
    let mut best: Option<Individual> = None;

    for generation in 0..config.generations {
        let rec = record(generation, &population);
        if best.as_ref().is_none_or(|b| rec.best_fitness < b.fitness) {
            best = population
                .iter()
                .min_by(|a, b| a.fitness.cmp(&b.fitness))
                .cloned();
        }
        if let Some(sink) = progress.as_mut() {
            sink(&rec);
        }
        history.push(rec);
        if generation + 1 == config.generations {
            break;
        }

        let mut ranked: Vec<&Individual> = population.iter().collect();
        ranked.sort_by_key(|a| a.fitness);
        let elite_count = config.elitism_count.min(config.population_size);
        let mut next: Vec<Individual> = ranked[..elite_count].iter().map(|&i| i.clone()).collect();

        let wanted = config.population_size - next.len();
        let mut offspring = Vec::with_capacity(wanted + 1);
        while offspring.len() < wanted {
            let a = tournament_select(&population, config.tournament_size, &mut rng);
            let b = tournament_select(&population, config.tournament_size, &mut rng);
            let (c1, c2, _) = crossover(&a.genome, &b.genome, config.crossover_rate, &mut rng);
            offspring.push(mutate(&c1, config.mutation_rate, &mut rng));
            offspring.push(mutate(&c2, config.mutation_rate, &mut rng));
        }
        offspring.truncate(wanted);
        next.extend(evaluator.score_all(&ctx, offspring));
        population = next;
    }

    Ok(RunResult {
        best: best.expect("at least one generation is recorded"),
        history,
        elapsed_seconds: clock.now_seconds() - started,
        config_echo: *config,
    })
}
