//! Grammatical evolution for single-variable symbolic regression.
//!
//! A linear genome of integer codons is mapped through a BNF grammar into a
//! formula string (the phenotype), which is parsed into an [`ExprNode`] and
//! scored by mean squared error against a [`Dataset`]. The generational loop
//! in [`engine`] evolves a population of such genomes.
//!
//! The crate is `no_std` and only needs `alloc`. File IO, timing, parallel
//! evaluation and the command line live in the `gramevo` crate.
#![no_std]

extern crate alloc;

pub mod engine;
pub mod expr;
pub mod grammar;
pub mod mapping;
pub mod primes;

pub use engine::{
    crossover, crossover_at, evolve, evolve_with, fitness_mse, init_population, mutate, tournament_select,
    Clock, CrossoverOutcome, EngineError, Evaluator, EvolutionConfig, Fitness, GenerationRecord,
    Individual, NoClock, RunResult, ScoringContext, SequentialEvaluator, seeded_rng, EngineRng,
};
pub use expr::{evaluate, evaluate_batch, format_expr, parse_formula, BinaryOp, ExprError, ExprNode, UnaryOp};
pub use grammar::{parse_grammar, Grammar, GrammarError, Production, Rule, Symbol};
pub use mapping::{
    map_genome, phenotype_of, tree_depth, DerivationTree, Genome, GenomeError, MapLimits, MappingResult,
    MappingStatus, TreeError,
};
pub use primes::{
    build_dataset, prime_pi, sieve, Dataset, DatasetError, DatasetMode, PrimeTable, PrimesError,
};
