//! Prime tables, the prime-counting function and regression datasets.
//!
//! The dataset text format is a header line `x<TAB>y` followed by one
//! `x<TAB>y` line per point, `\n` terminated, with no trailing whitespace.
//! Values use the shortest decimal that round-trips, so integer data is
//! written without a fractional part.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrimesError {
    #[error("sieve limit {0} is below 2")]
    LimitTooSmall(u32),
    #[error("x = {x} exceeds the prime table limit {limit}")]
    OutOfTableRange { x: u64, limit: u32 },
    #[error("prime table (limit {limit}, {available} primes) is too small for {requested} points")]
    TableTooSmall {
        requested: usize,
        available: usize,
        limit: u32,
    },
    #[error("dataset size must be positive")]
    ZeroPoints,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    primes: Vec<u32>,
    limit: u32,
}

impl PrimeTable {
    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn limit(&self) -> u32 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Sieves just far enough to hold at least `count` primes, using the
    /// Rosser bound `p_n < n (ln n + ln ln n)` for n >= 6.
    pub fn with_count(count: usize) -> Self {
        let limit = if count < 6 {
            13
        } else {
            let n = count as f64;
            let bound = n * (libm::log(n) + libm::log(libm::log(n)));
            libm::ceil(bound).min(f64::from(u32::MAX)) as u32
        };
        // limit >= 13, cannot fail
        sieve(limit).unwrap_or_else(|_| unreachable!())
    }
}

/// All primes up to and including `limit` (sieve of Eratosthenes).
pub fn sieve(limit: u32) -> Result<PrimeTable, PrimesError> {
    if limit < 2 {
        return Err(PrimesError::LimitTooSmall(limit));
    }
    let n = limit as usize;
    let mut composite = alloc::vec![false; n + 1];
    let mut i = 2usize;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    let primes = (2..=n)
        .filter(|&k| !composite[k])
        .map(|k| k as u32)
        .collect();
    Ok(PrimeTable { primes, limit })
}

/// Number of primes `<= x`.
pub fn prime_pi(x: u64, table: &PrimeTable) -> Result<usize, PrimesError> {
    if x > u64::from(table.limit) {
        return Err(PrimesError::OutOfTableRange {
            x,
            limit: table.limit,
        });
    }
    Ok(table.primes.partition_point(|&p| u64::from(p) <= x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DatasetMode {
    /// `(p_i, i)` for the first `n` primes.
    PrimeIndexed,
    /// `(x, pi(x))` for `x = 2..=n+1`.
    IntegerRange,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("dataset has no points")]
    Empty,
    #[error("point {index} is not finite")]
    NonFinite { index: usize },
    #[error("x values must be strictly increasing (point {index})")]
    NotIncreasing { index: usize },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Ordered `(x, y)` pairs; non-empty, finite, strictly increasing in x.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    points: Vec<(f64, f64)>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self, DatasetError> {
        if points.is_empty() {
            return Err(DatasetError::Empty);
        }
        for (index, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(DatasetError::NonFinite { index });
            }
            if index > 0 && x <= points[index - 1].0 {
                return Err(DatasetError::NotIncreasing { index });
            }
        }
        Ok(Dataset {
            name: name.into(),
            points,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// Population variance of y, i.e. the MSE of the best constant predictor.
    pub fn y_variance(&self) -> f64 {
        let n = self.points.len() as f64;
        let mean = self.points.iter().map(|p| p.1).sum::<f64>() / n;
        self.points.iter().map(|p| (p.1 - mean) * (p.1 - mean)).sum::<f64>() / n
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 * (self.points.len() + 1));
        out.push_str("x\ty\n");
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x}\t{y}");
        }
        out
    }

    /// Parses the text format. The header may separate `x` and `y` with any
    /// whitespace; data lines must hold exactly two numbers.
    pub fn from_text(name: impl Into<String>, text: &str) -> Result<Self, DatasetError> {
        let format = |line: usize, message: &str| DatasetError::Format {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.split_whitespace().eq(["x", "y"]) => {}
            _ => return Err(format(1, "expected header `x\ty`")),
        }
        let mut points = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(xs), Some(ys), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(format(line_no, "expected two fields"));
            };
            let parse = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| format(line_no, "malformed number"))
            };
            let (x, y) = (parse(xs)?, parse(ys)?);
            if let Some(&(prev, _)) = points.last() {
                if x <= prev {
                    return Err(format(line_no, "x values must be strictly increasing"));
                }
            }
            points.push((x, y));
        }
        if points.is_empty() {
            return Err(format(1, "dataset has no data rows"));
        }
        Dataset::new(name, points)
    }
}

pub fn build_dataset(
    mode: DatasetMode,
    n: usize,
    table: &PrimeTable,
) -> Result<Dataset, PrimesError> {
    if n == 0 {
        return Err(PrimesError::ZeroPoints);
    }
    let too_small = || PrimesError::TableTooSmall {
        requested: n,
        available: table.len(),
        limit: table.limit,
    };
    let points: Vec<(f64, f64)> = match mode {
        DatasetMode::PrimeIndexed => {
            if table.len() < n {
                return Err(too_small());
            }
            table.primes[..n]
                .iter()
                .enumerate()
                .map(|(i, &p)| (f64::from(p), (i + 1) as f64))
                .collect()
        }
        DatasetMode::IntegerRange => {
            if (n as u64) + 1 > u64::from(table.limit) {
                return Err(too_small());
            }
            let mut count = 0usize;
            let mut primes = table.primes.iter().peekable();
            (2..=n as u64 + 1)
                .map(|x| {
                    while primes.next_if(|&&p| u64::from(p) <= x).is_some() {
                        count += 1;
                    }
                    (x as f64, count as f64)
                })
                .collect()
        }
    };
    let name = match mode {
        DatasetMode::PrimeIndexed => "prime-indexed",
        DatasetMode::IntegerRange => "integer-range",
    };
    // points are finite and strictly increasing by construction
    Ok(Dataset::new(name, points).unwrap_or_else(|_| unreachable!()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn trial_division(limit: u32) -> Vec<u32> {
        (2..=limit)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect()
    }

    #[test]
    fn small_sieves() {
        assert_eq!(sieve(10).unwrap().primes(), [2, 3, 5, 7]);
        assert_eq!(sieve(2).unwrap().primes(), [2]);
        assert_eq!(sieve(1), Err(PrimesError::LimitTooSmall(1)));
        assert_eq!(sieve(0), Err(PrimesError::LimitTooSmall(0)));
    }

    #[test]
    fn sieve_matches_trial_division() {
        let table = sieve(10_000).unwrap();
        assert_eq!(table.primes(), trial_division(10_000).as_slice());
        for limit in [2, 3, 4, 97, 100, 101, 7919, 7920] {
            assert_eq!(sieve(limit).unwrap().primes(), trial_division(limit).as_slice());
        }
    }

    #[test]
    fn thousandth_prime() {
        let t = sieve(8000).unwrap();
        assert_eq!(t.len(), 1007);
        assert_eq!(t.primes()[999], 7919);
    }

    #[test]
    fn prime_counts() {
        let t = sieve(2000).unwrap();
        assert_eq!(prime_pi(100, &t).unwrap(), 25);
        assert_eq!(prime_pi(1400, &t).unwrap(), 222);
        assert_eq!(prime_pi(2, &t).unwrap(), 1);
        assert_eq!(prime_pi(1, &t).unwrap(), 0);
        assert_eq!(prime_pi(0, &t).unwrap(), 0);
        assert_eq!(
            prime_pi(2001, &t),
            Err(PrimesError::OutOfTableRange { x: 2001, limit: 2000 })
        );
    }

    #[test]
    fn prime_pi_steps_exactly_at_primes() {
        let t = sieve(5000).unwrap();
        let oracle = trial_division(5000);
        for p in 2..=5000u32 {
            let step = prime_pi(u64::from(p), &t).unwrap() - prime_pi(u64::from(p - 1), &t).unwrap();
            assert_eq!(step == 1, oracle.binary_search(&p).is_ok(), "p = {p}");
            assert!(step <= 1);
        }
    }

    #[test]
    fn with_count_is_large_enough() {
        for n in [1, 5, 6, 7, 100, 1000, 10_000] {
            assert!(PrimeTable::with_count(n).len() >= n, "n = {n}");
        }
    }

    #[test]
    fn prime_indexed_dataset() {
        let t = sieve(8000).unwrap();
        let d = build_dataset(DatasetMode::PrimeIndexed, 1000, &t).unwrap();
        assert_eq!(d.len(), 1000);
        assert_eq!(d.points()[0], (2.0, 1.0));
        assert_eq!(d.points()[999], (7919.0, 1000.0));
        let oracle = trial_division(8000);
        for &(x, y) in d.points() {
            assert!(oracle.binary_search(&(x as u32)).is_ok());
            assert_eq!(prime_pi(x as u64, &t).unwrap() as f64, y);
        }
        let one = build_dataset(DatasetMode::PrimeIndexed, 1, &t).unwrap();
        assert_eq!(one.points(), [(2.0, 1.0)]);
        assert!(matches!(
            build_dataset(DatasetMode::PrimeIndexed, 1008, &t),
            Err(PrimesError::TableTooSmall { requested: 1008, available: 1007, .. })
        ));
        assert_eq!(
            build_dataset(DatasetMode::PrimeIndexed, 0, &t),
            Err(PrimesError::ZeroPoints)
        );
    }

    #[test]
    fn integer_range_dataset() {
        let t = sieve(10).unwrap();
        let d = build_dataset(DatasetMode::IntegerRange, 9, &t).unwrap();
        assert_eq!(d.xs(), (2..=10).map(f64::from).collect::<Vec<_>>());
        assert_eq!(d.ys(), vec![1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 4.0, 4.0]);
        assert!(build_dataset(DatasetMode::IntegerRange, 10, &t).is_err());
    }

    #[test]
    fn variance_of_paper_targets() {
        let t = sieve(8000).unwrap();
        let d = build_dataset(DatasetMode::PrimeIndexed, 1000, &t).unwrap();
        // (n^2 - 1) / 12 for y = 1..n
        assert!((d.y_variance() - 83_333.25).abs() < 1e-6);
    }

    #[test]
    fn dataset_invariants() {
        assert_eq!(Dataset::new("d", vec![]), Err(DatasetError::Empty));
        assert_eq!(
            Dataset::new("d", vec![(1.0, 1.0), (1.0, 2.0)]),
            Err(DatasetError::NotIncreasing { index: 1 })
        );
        assert_eq!(
            Dataset::new("d", vec![(f64::NAN, 1.0)]),
            Err(DatasetError::NonFinite { index: 0 })
        );
    }

    #[test]
    fn text_format() {
        let d = Dataset::new("d", vec![(2.0, 1.0), (3.0, 2.0), (4.5, 0.25)]).unwrap();
        assert_eq!(d.to_text(), "x\ty\n2\t1\n3\t2\n4.5\t0.25\n");
        assert_eq!(Dataset::from_text("d", &d.to_text()).unwrap(), d);
        assert_eq!(Dataset::from_text("d", "x y\n2 1\n").unwrap().points(), [(2.0, 1.0)]);
    }

    #[test]
    fn text_format_errors() {
        let line_of = |text: &str| match Dataset::from_text("d", text) {
            Err(DatasetError::Format { line, .. }) => line,
            other => panic!("expected format error, got {other:?}"),
        };
        assert_eq!(line_of("x\ty\n"), 1);
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("abc 1\n"), 1);
        assert_eq!(line_of("x y\nabc 1\n"), 2);
        assert_eq!(line_of("x\ty\n1\t2\n3\n"), 3);
        assert_eq!(line_of("x\ty\n1\t2\t3\n"), 2);
        assert_eq!(line_of("x\ty\n2\t1\n1\t1\n"), 3);
        assert_eq!(line_of("x\ty\n2\tinf\n"), 2);
    }

    proptest! {
        #[test]
        fn text_round_trip(raw in prop::collection::vec((-1.0e12f64..1.0e12, -1.0e12f64..1.0e12), 1..50)) {
            let mut raw = raw;
            raw.sort_by(|a, b| a.0.total_cmp(&b.0));
            raw.dedup_by(|a, b| a.0 == b.0);
            let d = Dataset::new("p", raw).unwrap();
            let back = Dataset::from_text("p", &d.to_text()).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
