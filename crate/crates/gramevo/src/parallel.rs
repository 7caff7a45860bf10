//! Rayon-backed fitness evaluation and a wall clock for the engine.

use std::time::Instant;

use gramevo_core::{Clock, Evaluator, Genome, Individual, ScoringContext};
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Scores genomes on a rayon pool. Results keep input order, so runs are
/// identical to the sequential evaluator.
pub struct ParallelEvaluator {
    pool: Option<ThreadPool>,
}

impl ParallelEvaluator {
    /// Uses the global rayon pool.
    pub fn new() -> Self {
        ParallelEvaluator { pool: None }
    }

    pub fn with_threads(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(ParallelEvaluator { pool: Some(pool) })
    }
}

impl Default for ParallelEvaluator {
    fn default() -> Self {
        Self::new()
    }
}

impl Evaluator for ParallelEvaluator {
    fn score_all(&self, ctx: &ScoringContext<'_>, genomes: Vec<Genome>) -> Vec<Individual> {
        let run = || genomes.into_par_iter().map(|g| ctx.score(g)).collect();
        match &self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        }
    }
}

pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn now_seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
