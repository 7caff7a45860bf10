//! Run artifacts.
//!
//! * `history.csv`: `generation,best_fitness,mean_fitness,invalid_count`.
//!   A generation with no valid individual has best `inf` and mean `nan`.
//! * `predictions.csv`: `x,y_true,y_pred` over the dataset.
//! * `best.txt`: `key = value` lines describing the best individual and the
//!   settings of the run, with `elapsed_seconds` last.
//!
//! Numbers use the shortest round-tripping decimal form and `\n` endings.

use std::fmt::Write;

use gramevo_core::{format_expr, Dataset, ExprNode, Fitness, GenerationRecord, RunResult};

use crate::config::echo_lines;

fn fitness_field(f: Fitness) -> String {
    match f {
        Fitness::Value(v) => v.to_string(),
        Fitness::Worst => "inf".to_string(),
    }
}

pub fn history_csv(history: &[GenerationRecord]) -> String {
    let mut out = String::from("generation,best_fitness,mean_fitness,invalid_count\n");
    for r in history {
        let mean = r.mean_fitness.map_or_else(|| "nan".to_string(), |m| m.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.generation,
            fitness_field(r.best_fitness),
            mean,
            r.invalid_count
        );
    }
    out
}

pub fn predictions_csv(expr: &ExprNode, dataset: &Dataset) -> String {
    let mut out = String::from("x,y_true,y_pred\n");
    for &(x, y) in dataset.points() {
        let _ = writeln!(out, "{x},{y},{}", expr.eval(x));
    }
    out
}

/// Inputs echoed into `best.txt` besides the engine settings.
pub struct RunSources<'a> {
    pub grammar: &'a str,
    pub dataset: &'a str,
}

pub fn best_txt(run: &RunResult, sources: &RunSources<'_>) -> String {
    let best = &run.best;
    let canonical = best
        .expr
        .as_ref()
        .map(format_expr)
        .unwrap_or_default();
    let mut out = String::new();
    let mut line = |k: &str, v: &str| {
        let _ = writeln!(out, "{k} = {v}");
    };
    line("phenotype", &canonical);
    line("raw_phenotype", best.phenotype.as_deref().unwrap_or(""));
    line("fitness", &fitness_field(best.fitness));
    line("valid", &best.valid.to_string());
    line("codons_used", &best.codons_used.to_string());
    line("grammar", sources.grammar);
    line("dataset", sources.dataset);
    for (k, v) in echo_lines(&run.config_echo) {
        line(k, &v);
    }
    line("elapsed_seconds", &format!("{:.3}", run.elapsed_seconds));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use gramevo_core::parse_formula;

    #[test]
    fn history_rows() {
        let rows = [
            GenerationRecord {
                generation: 0,
                best_fitness: Fitness::Value(2.5),
                mean_fitness: Some(10.0),
                invalid_count: 3,
                best_phenotype: "x".into(),
            },
            GenerationRecord {
                generation: 1,
                best_fitness: Fitness::Worst,
                mean_fitness: None,
                invalid_count: 9,
                best_phenotype: String::new(),
            },
        ];
        assert_eq!(
            history_csv(&rows),
            "generation,best_fitness,mean_fitness,invalid_count\n0,2.5,10,3\n1,inf,nan,9\n"
        );
    }

    #[test]
    fn prediction_rows() {
        let d = Dataset::new("d", vec![(2.0, 1.0), (3.0, 2.0)]).unwrap();
        let e = parse_formula("x*0.5").unwrap();
        assert_eq!(predictions_csv(&e, &d), "x,y_true,y_pred\n2,1,1\n3,2,1.5\n");
    }
}
