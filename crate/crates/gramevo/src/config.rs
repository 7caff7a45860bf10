//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! population_size = 500
//! generations = 50
//! grammar_path = grammars/pi_paper.bnf
//! dataset_path = data/pi.txt
//! output_dir = runs/seed42
//! rng_seed = 42
//! ```
//!
//! Keys are the [`EvolutionConfig`] field names plus `grammar_path`,
//! `dataset_path` and `output_dir`. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gramevo_core::EvolutionConfig;

use crate::Error;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfigFile {
    pub evolution: EvolutionConfig,
    /// Seed given in the file, if any.
    pub rng_seed: Option<u64>,
    pub grammar_path: Option<PathBuf>,
    pub dataset_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

pub const KEYS: &[&str] = &[
    "population_size",
    "generations",
    "genome_length",
    "codon_max",
    "max_wraps",
    "max_depth",
    "tournament_size",
    "crossover_rate",
    "mutation_rate",
    "elitism_count",
    "rng_seed",
    "invalid_retries",
    "grammar_path",
    "dataset_path",
    "output_dir",
];

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|(line, message)| Error::Config {
            path: path.to_path_buf(),
            line,
            message,
        })
    }

    /// Parses config text; errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut cfg = RunConfigFile::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| (line_no, format!("expected `key = value`, got `{line}`")))?;
            cfg.set(key, value).map_err(|m| (line_no, m))?;
        }
        let e = &cfg.evolution;
        if let Err(err) = e.validate() {
            return Err((0, err.to_string()));
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("invalid value `{value}` for `{key}`"))
        }
        let e = &mut self.evolution;
        match key {
            "population_size" => e.population_size = num(key, value)?,
            "generations" => e.generations = num(key, value)?,
            "genome_length" => e.genome_length = num(key, value)?,
            "codon_max" => e.codon_max = num(key, value)?,
            "max_wraps" => e.max_wraps = num(key, value)?,
            "max_depth" => e.max_depth = num(key, value)?,
            "tournament_size" => e.tournament_size = num(key, value)?,
            "crossover_rate" => e.crossover_rate = num(key, value)?,
            "mutation_rate" => e.mutation_rate = num(key, value)?,
            "elitism_count" => e.elitism_count = num(key, value)?,
            "invalid_retries" => e.invalid_retries = num(key, value)?,
            "rng_seed" => self.rng_seed = Some(num(key, value)?),
            "grammar_path" => self.grammar_path = Some(PathBuf::from(value)),
            "dataset_path" => self.dataset_path = Some(PathBuf::from(value)),
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}

/// `key = value` lines for every evolution setting, in [`KEYS`] order.
pub fn echo_lines(config: &EvolutionConfig) -> Vec<(&'static str, String)> {
    vec![
        ("population_size", config.population_size.to_string()),
        ("generations", config.generations.to_string()),
        ("genome_length", config.genome_length.to_string()),
        ("codon_max", config.codon_max.to_string()),
        ("max_wraps", config.max_wraps.to_string()),
        ("max_depth", config.max_depth.to_string()),
        ("tournament_size", config.tournament_size.to_string()),
        ("crossover_rate", config.crossover_rate.to_string()),
        ("mutation_rate", config.mutation_rate.to_string()),
        ("elitism_count", config.elitism_count.to_string()),
        ("rng_seed", config.rng_seed.to_string()),
        ("invalid_retries", config.invalid_retries.to_string()),
    ]
}
