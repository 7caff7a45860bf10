//! Acceptance checks. Prints one `[PASS]` or `[FAIL]` line per criterion
//! and exits non-zero if any fail.
//!
//! Run with `cargo test -p gramevo --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use gramevo::io::{read_dataset, write_dataset, PAPER_GRAMMAR};
use gramevo::parallel::{ParallelEvaluator, WallClock};
use gramevo_core::{
    build_dataset, evaluate, evolve_with, fitness_mse, format_expr, map_genome, parse_formula,
    parse_grammar, seeded_rng, sieve, Dataset, DatasetMode, DerivationTree, EvolutionConfig,
    Fitness, Genome, Grammar, MapLimits, NoClock, PrimeTable, RunResult, SequentialEvaluator,
    Symbol,
};
use rand::Rng;

const FIRST: &str = "2 sqrt(x) + x/(tanh((x + sqrt(tanh(78.45) sin(51.98)) x - log(sqrt(84.76) + 47.5))/exp(log(log(69.92) + 7.51)) x) + sqrt(38.86) + log(log(x - log(sin(x) + 15.6) tanh(tanh(sqrt(x))) tanh(sin(log(x)) + 69.37) x)))";
const SECOND: &str = "x/(ln(x/(ln(ln(92.89-sin(x)+x*x+sin(x)-64.03*sqrt(x)*ln(exp(sin(89.77))))*sqrt(sin(19.94))))))";
const CANONICAL: &str = include_str!("../../../grammars/pi_canonical.bnf");

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn trial_division_primes(limit: u32) -> Vec<u32> {
    (2..=limit)
        .filter(|&n| (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
        .collect()
}

fn paper_grammar() -> Grammar {
    parse_grammar(PAPER_GRAMMAR).expect("paper grammar parses")
}

fn prime_indexed_1000() -> Dataset {
    build_dataset(DatasetMode::PrimeIndexed, 1000, &PrimeTable::with_count(1000)).unwrap()
}

fn ac1_reference_values() -> Check {
    let e = parse_formula(SECOND).map_err(|e| e.to_string())?;
    let (a, b) = (evaluate(&e, 100.0), evaluate(&e, 1400.0));
    ensure((a - 26.0574).abs() <= 0.02, || format!("f(100) = {a}"))?;
    ensure((b - 222.801).abs() <= 0.02, || format!("f(1400) = {b}"))?;
    Ok(format!("f(100) = {a:.4}, f(1400) = {b:.4}, tolerance 0.02"))
}

fn ac2_dataset() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("pi.txt");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_gramevo"))
        .args(["gen-data", "--mode", "prime-indexed", "--n", "1000", "--out"])
        .arg(&path)
        .output()
        .map_err(|e| e.to_string())?
        .status;
    let secs = start.elapsed().as_secs_f64();
    ensure(status.success(), || format!("gen-data exited with {status}"))?;
    ensure(secs < 1.0, || format!("gen-data took {secs:.3} s"))?;

    let data = read_dataset(&path).map_err(|e| e.to_string())?;
    let pts = data.points();
    ensure(pts.len() == 1000, || format!("{} points", pts.len()))?;
    ensure(pts[0] == (2.0, 1.0), || format!("first point {:?}", pts[0]))?;
    ensure(pts[999] == (7919.0, 1000.0), || format!("last point {:?}", pts[999]))?;
    let oracle = trial_division_primes(7919);
    for &(x, y) in pts {
        let count = oracle.iter().take_while(|&&p| f64::from(p) <= x).count();
        ensure(count as f64 == y, || format!("pi({x}) = {count}, file says {y}"))?;
    }
    Ok(format!("1000 points from (2, 1) to (7919, 1000) in {secs:.3} s"))
}

fn ac3_grammar() -> Check {
    let g = paper_grammar();
    let counts: Vec<(String, usize)> = g
        .rules()
        .iter()
        .map(|r| (r.name().to_string(), r.productions().len()))
        .collect();
    ensure(counts == [("e".to_string(), 11), ("c".to_string(), 10)], || {
        format!("rules {counts:?}")
    })?;
    let e = &g.rules()[0];
    let first = e.productions()[0].to_string();
    let last = e.productions()[10].to_string();
    ensure(first == "<e>+<e>" && last == "<c><c>.<c><c>", || {
        format!("productions out of order: {first} .. {last}")
    })?;

    let canonical = parse_grammar(CANONICAL).map_err(|e| e.to_string())?;
    let traces: [(&Grammar, &[u32], &str); 6] = [
        (&canonical, &[9], "x"),
        (&canonical, &[10, 1, 2, 3, 4], "12.34"),
        (&canonical, &[0, 9, 9], "x+x"),
        (&g, &[9], "x[:, 0]"),
        (&g, &[10, 1, 2, 3, 4], "12.34"),
        (&g, &[0, 9, 9], "x[:, 0]+x[:, 0]"),
    ];
    for (grammar, codons, want) in traces {
        let genome = Genome::from_codons(codons.to_vec()).unwrap();
        let got = map_genome(grammar, &genome, MapLimits::new(0, 10)).phenotype;
        ensure(got.as_deref() == Some(want), || format!("{codons:?} -> {got:?}, want {want}"))?;
    }
    Ok("2 rules with 11 and 10 productions; 6 golden traces hold".into())
}

fn ac4_reference_formulas() -> Check {
    let a = parse_formula(FIRST).map_err(|e| format!("first formula: {e}"))?;
    let b = parse_formula(SECOND).map_err(|e| format!("second formula: {e}"))?;
    Ok(format!("parsed into {} and {} nodes", a.node_count(), b.node_count()))
}

fn ac5_evolution() -> Check {
    let grammar = paper_grammar();
    let data = prime_indexed_1000();
    let ys: Vec<f64> = data.points().iter().map(|p| p.1).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let var = ys.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / ys.len() as f64;

    let evaluator = ParallelEvaluator::new();
    let mut beaten = 0;
    let mut summary = Vec::new();
    for seed in 1..=5 {
        let config = EvolutionConfig {
            population_size: 500,
            generations: 50,
            rng_seed: seed,
            ..EvolutionConfig::default()
        };
        let clock = WallClock::start();
        let run = evolve_with(&config, &grammar, &data, &evaluator, &clock, None)
            .map_err(|e| e.to_string())?;
        ensure(run.elapsed_seconds <= 300.0, || {
            format!("seed {seed} took {:.1} s", run.elapsed_seconds)
        })?;
        let mse = run.best.fitness.value().unwrap_or(f64::INFINITY);
        if mse < var {
            beaten += 1;
        }
        summary.push(format!("seed {seed}: {mse:.2} in {:.1} s", run.elapsed_seconds));
    }
    ensure(beaten >= 4, || format!("{beaten}/5 below var(y) = {var}; {}", summary.join(", ")))?;
    Ok(format!("{beaten}/5 below var(y) = {var:.2}; {}", summary.join(", ")))
}

fn replay(g: &Grammar, tree: &DerivationTree, codons: &[u32], used: &mut usize) -> bool {
    let Symbol::NonTerminal { name, .. } = &tree.node else {
        return tree.children.is_empty();
    };
    let rule = g.rule(name).unwrap();
    let k = rule.productions().len();
    let chosen = tree.production_index.unwrap();
    let expected = if k > 1 {
        let c = codons[*used % codons.len()] as usize % k;
        *used += 1;
        c
    } else {
        0
    };
    chosen == expected
        && tree
            .children
            .iter()
            .map(|c| &c.node)
            .eq(rule.productions()[chosen].symbols())
        && tree.children.iter().all(|c| replay(g, c, codons, used))
}

fn random_genomes(n: usize, seed: u64) -> Vec<Genome> {
    let mut rng = seeded_rng(seed);
    (0..n)
        .map(|_| Genome::new((0..200).map(|_| rng.gen_range(0..100_000)).collect(), 100_000).unwrap())
        .collect()
}

fn mapping_properties(g: &Grammar) -> Result<usize, String> {
    let limits = MapLimits::default();
    let mut rng = seeded_rng(3);
    let mut valid = 0;
    for genome in random_genomes(10_000, 2) {
        let a = map_genome(g, &genome, limits);
        ensure(a == map_genome(g, &genome, limits), || "mapping not deterministic".into())?;
        let Some(tree) = &a.tree else { continue };
        valid += 1;
        let mut used = 0;
        ensure(replay(g, tree, genome.codons(), &mut used) && used == a.codons_used, || {
            format!("mod-rule replay failed for {:?}", a.phenotype)
        })?;
        if a.codons_used < genome.len() {
            let mut codons = genome.codons().to_vec();
            for c in &mut codons[a.codons_used..] {
                *c = rng.gen_range(0..100_000);
            }
            let b = map_genome(g, &Genome::new(codons, 100_000).unwrap(), limits);
            ensure(a == b, || "unused codons changed the mapping".into())?;
        }
    }
    Ok(valid)
}

fn run_with(seed: u64, parallel: bool) -> Result<RunResult, String> {
    let config = EvolutionConfig {
        rng_seed: seed,
        ..EvolutionConfig::default()
    };
    let (g, d) = (paper_grammar(), prime_indexed_1000());
    let run = if parallel {
        let eval = ParallelEvaluator::with_threads(4).map_err(|e| e.to_string())?;
        evolve_with(&config, &g, &d, &eval, &WallClock::start(), None)
    } else {
        evolve_with(&config, &g, &d, &SequentialEvaluator, &NoClock, None)
    };
    let mut run = run.map_err(|e| e.to_string())?;
    run.elapsed_seconds = 0.0;
    Ok(run)
}

fn ac6_properties() -> Check {
    let g = paper_grammar();
    let valid = mapping_properties(&g)?;

    let runs = [run_with(21, false)?, run_with(21, false)?, run_with(21, true)?, run_with(22, true)?];
    ensure(runs[0] == runs[1] && runs[0] == runs[2], || {
        "same-seed runs differ across repeats or parallelism".into()
    })?;
    for run in &runs {
        ensure(run.history.windows(2).all(|w| w[1].best_fitness <= w[0].best_fitness), || {
            "best_fitness rose between generations".into()
        })?;
    }

    let data = prime_indexed_1000();
    let mut phenotypes = Vec::new();
    let mut seed = 100;
    while phenotypes.len() < 10_000 {
        phenotypes.extend(
            random_genomes(2000, seed)
                .iter()
                .filter_map(|genome| map_genome(&g, genome, MapLimits::default()).phenotype),
        );
        seed += 1;
    }
    phenotypes.truncate(10_000);
    let mut worst = 0;
    for p in &phenotypes {
        let expr = parse_formula(p).map_err(|e| format!("{p}: {e}"))?;
        let sum: f64 = data.points().iter().map(|&(x, y)| (expr.eval(x) - y).powi(2)).sum();
        let fitness = fitness_mse(&expr, &data);
        ensure(fitness.is_worst() != sum.is_finite(), || format!("{p} scored {fitness:?}"))?;
        worst += usize::from(fitness == Fitness::Worst);
        let again = parse_formula(&format_expr(&expr)).map_err(|e| format!("{p}: {e}"))?;
        ensure(again == expr, || format!("expression round-trip changed {p}"))?;
    }

    let oracle = trial_division_primes(10_000);
    for limit in 2..=10_000u32 {
        let table = sieve(limit).map_err(|e| e.to_string())?;
        let n = oracle.partition_point(|&p| p <= limit);
        ensure(table.primes() == &oracle[..n], || format!("sieve({limit}) differs"))?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (mode, n) in [(DatasetMode::PrimeIndexed, 1000), (DatasetMode::IntegerRange, 500)] {
        let d = build_dataset(mode, n, &sieve(8000).unwrap()).unwrap();
        let path = dir.path().join("d.txt");
        write_dataset(&d, &path).map_err(|e| e.to_string())?;
        let back = read_dataset(&path).map_err(|e| e.to_string())?;
        ensure(back.points() == d.points(), || format!("{mode:?} dataset round-trip differs"))?;
        ensure(Dataset::from_text("d", &d.to_text()).unwrap().to_text() == d.to_text(), || {
            "dataset text round-trip differs".into()
        })?;
    }

    Ok(format!(
        "{valid} valid of 10000 mapped; 4 full runs monotone and reproducible; \
         10000 phenotypes total ({worst} Worst) and round-trip; sieve ok to 10000; datasets round-trip"
    ))
}

fn main() -> ExitCode {
    let checks: [Criterion; 6] = [
        ("AC1 reference formula values", ac1_reference_values),
        ("AC2 prime-indexed dataset", ac2_dataset),
        ("AC3 grammar fidelity", ac3_grammar),
        ("AC4 reference formulas parse", ac4_reference_formulas),
        ("AC5 evolution beats the constant predictor", ac5_evolution),
        ("AC6 property suites", ac6_properties),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.2} s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail} ({secs:.2} s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
