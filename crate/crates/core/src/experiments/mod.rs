//! Experiment drivers: piece-length sweep, strategy comparison, straggler
//! stress test and failure resilience, plus CSV and manifest output.

mod config;
mod output;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::engine::rng::{stream_rng, Stream};
use crate::engine::{run_episode, EpisodeMetrics};
use crate::error::{Error, Result};
use crate::scenario::{ScenarioConfig, StragglerMode};
use crate::strategies::{traditional_layout, StrategyKind, StrategyParams};

pub use config::{load_experiment_file, parse_experiment, run_scenario_file, ExperimentFile, ExperimentName};
pub use output::{write_manifest, write_table_csv, Manifest, Table, VERSION};

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// `ceil(N2 / 2^k)` for `k = 0..=5`, largest first, duplicates removed.
pub fn default_b_grid(n2: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=5).map(|k| n2.div_ceil(1 << k)).collect();
    v.dedup();
    v
}

/// Runs `seeds` episodes in parallel; results come back in seed order.
pub fn run_batch(scenario: &ScenarioConfig, strategy: StrategyKind, seeds: &[u64]) -> Result<Vec<EpisodeMetrics>> {
    seeds.par_iter().map(|&s| run_episode(scenario, strategy, s)).collect()
}

fn seeds(seed_base: u64, reps: usize) -> Vec<u64> {
    (0..reps as u64).map(|r| seed_base + r).collect()
}

fn times(episodes: &[EpisodeMetrics]) -> Vec<f64> {
    episodes.iter().map(|e| e.outcome.completion_time).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub b: usize,
    pub mean_time: f64,
    pub std_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub best_b: usize,
    pub episodes: Vec<(usize, EpisodeMetrics)>,
}

/// Mean dynamic-strategy completion time for each `b` over seeds `seed_base..seed_base + reps`.
pub fn sweep_b(scenario: &ScenarioConfig, b_values: &[usize], reps: usize, seed_base: u64) -> Result<SweepResult> {
    if b_values.is_empty() || reps == 0 {
        return Err(Error::invalid("need at least one b value and one repetition"));
    }
    let seeds = seeds(seed_base, reps);
    let mut rows = Vec::new();
    let mut episodes = Vec::new();
    for &b in b_values {
        let sc = ScenarioConfig { b: Some(b), ..scenario.clone() };
        sc.validate()?;
        let eps = run_batch(&sc, StrategyKind::Dynamic, &seeds)?;
        let (mean_time, std_time) = mean_std(&times(&eps));
        rows.push(SweepRow { b, mean_time, std_time });
        episodes.extend(eps.into_iter().map(|e| (b, e)));
    }
    let best_b = rows
        .iter()
        .min_by(|x, y| x.mean_time.total_cmp(&y.mean_time))
        .map(|r| r.b)
        .expect("non-empty");
    Ok(SweepResult { rows, best_b, episodes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRow {
    pub ratio: f64,
    pub strategy: StrategyKind,
    pub mean_time: f64,
    pub std_time: f64,
    pub successes: usize,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub rows: Vec<StrategyRow>,
    pub episodes: Vec<(f64, EpisodeMetrics)>,
}

impl ComparisonResult {
    pub fn mean(&self, ratio: f64, strategy: StrategyKind) -> Option<f64> {
        self.rows.iter().find(|r| r.ratio == ratio && r.strategy == strategy).map(|r| r.mean_time)
    }
}

/// Paired-seed comparison of `strategies` at each straggler ratio. Every
/// strategy at a given (ratio, seed) sees the same workers and stragglers.
pub fn stress_test(
    scenario: &ScenarioConfig,
    ratios: &[f64],
    strategies: &[StrategyKind],
    reps: usize,
    seed_base: u64,
) -> Result<ComparisonResult> {
    if ratios.is_empty() || strategies.is_empty() || reps == 0 {
        return Err(Error::invalid("need ratios, strategies and at least one repetition"));
    }
    let seeds = seeds(seed_base, reps);
    let mode = match scenario.stragglers.mode {
        m @ StragglerMode::Delayed(_) => m,
        _ => StragglerMode::Delayed(15.0),
    };
    let mut rows = Vec::new();
    let mut episodes = Vec::new();
    for &ratio in ratios {
        let sc = scenario.clone().with_stragglers(ratio, mode);
        sc.validate()?;
        for &k in strategies {
            let eps = run_batch(&sc, k, &seeds)?;
            let (mean_time, std_time) = mean_std(&times(&eps));
            let successes = eps.iter().filter(|e| e.outcome.success).count();
            rows.push(StrategyRow { ratio, strategy: k, mean_time, std_time, successes, reps });
            episodes.extend(eps.into_iter().map(|e| (ratio, e)));
        }
    }
    Ok(ComparisonResult { rows, episodes })
}

/// [`stress_test`] at a single ratio with all three strategies.
pub fn compare_strategies(scenario: &ScenarioConfig, ratio: f64, reps: usize, seed_base: u64) -> Result<ComparisonResult> {
    stress_test(scenario, &[ratio], &StrategyKind::ALL, reps, seed_base)
}

/// How failure counts are drawn per run in [`success_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FailureDraw {
    /// Counts `0..=P` equally often, in a seeded random order.
    Balanced,
    /// Independent uniform count in `0..=P` per run.
    UniformCount,
    /// Each worker fails independently with this probability.
    PerWorker(f64),
}

/// Failure count for each run.
pub fn failure_counts(p: usize, runs: usize, draw: FailureDraw, seed_base: u64) -> Result<Vec<usize>> {
    let mut rng = stream_rng(seed_base, Stream::Failures, 0);
    Ok(match draw {
        FailureDraw::Balanced => {
            let mut v: Vec<usize> = (0..runs).map(|r| r % (p + 1)).collect();
            v.shuffle(&mut rng);
            v
        }
        FailureDraw::UniformCount => (0..runs).map(|_| rng.random_range(0..=p)).collect(),
        FailureDraw::PerWorker(q) => {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::invalid(format!("failure probability {q} outside [0, 1]")));
            }
            (0..runs).map(|_| (0..p).filter(|_| rng.random_bool(q)).count()).collect()
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessRow {
    pub strategy: StrategyKind,
    pub runs: usize,
    pub successes: usize,
    /// Fraction of runs with at least one surviving worker that succeeded.
    pub conditional_rate: f64,
    pub analytic_rate: f64,
    /// Success probability from the global failure bound alone (coded only).
    pub bound_rate: Option<f64>,
}

impl SuccessRow {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.runs as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessResult {
    pub rows: Vec<SuccessRow>,
    pub failure_counts: Vec<usize>,
    pub episodes: Vec<(usize, EpisodeMetrics)>,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability that a uniformly random set of `f` failed workers out of `p`
/// leaves every column of the traditional layout with enough results.
pub fn coded_survival_probability(n1: usize, n2: usize, p: usize, s: usize, f: usize) -> Result<f64> {
    let layout = traditional_layout(n1, n2, p, s)?;
    let spare = layout.coded_per_column - layout.a_pieces;
    // Generating function over failure counts: per column at most `spare`
    // failures, idle workers unrestricted.
    let mut poly = vec![1.0];
    let column: Vec<f64> = (0..=spare).map(|k| binomial(layout.coded_per_column, k)).collect();
    for _ in 0..layout.x_pieces {
        poly = multiply(&poly, &column);
    }
    let idle = p - layout.workers_used();
    let free: Vec<f64> = (0..=idle).map(|k| binomial(idle, k)).collect();
    poly = multiply(&poly, &free);
    Ok(poly.get(f).copied().unwrap_or(0.0) / binomial(p, f))
}

fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Success probability of `strategy` when the failure count is uniform on `0..=P`
/// and failed workers are a uniform subset. `s` is the coded sub-vector length.
pub fn analytic_success_rate(strategy: StrategyKind, n1: usize, n2: usize, p: usize, s: usize) -> Result<f64> {
    let q = 1.0 / (p + 1) as f64;
    Ok(match strategy {
        StrategyKind::Uncoded => q,
        StrategyKind::Dynamic => p as f64 * q,
        StrategyKind::Coded => {
            let mut total = 0.0;
            for f in 0..=p {
                total += coded_survival_probability(n1, n2, p, s, f)?;
            }
            total * q
        }
    })
}

/// Success probability implied by the global bound alone: runs with at most
/// `floor(P - N1 N2 / s^2)` failures succeed.
pub fn bound_success_rate(n1: usize, n2: usize, p: usize, s: usize) -> f64 {
    let tol = p as f64 - (n1 as f64 * n2 as f64) / (s as f64 * s as f64);
    if tol < 0.0 {
        return 0.0;
    }
    ((tol.floor() as usize).min(p) + 1) as f64 / (p + 1) as f64
}

/// Runs each strategy `runs` times with permanent failures at time 0 and
/// reports observed and analytic success rates.
pub fn success_rate(
    scenario: &ScenarioConfig,
    runs: usize,
    draw: FailureDraw,
    seed_base: u64,
) -> Result<SuccessResult> {
    if runs == 0 {
        return Err(Error::invalid("need at least one run"));
    }
    scenario.validate()?;
    let p = scenario.workers;
    let counts = failure_counts(p, runs, draw, seed_base)?;
    let mode = match scenario.stragglers.mode {
        m @ (StragglerMode::Fail { .. } | StragglerMode::Leave { .. }) => m,
        StragglerMode::Delayed(_) => StragglerMode::Fail { at: 0.0 },
    };
    let mut rows = Vec::new();
    let mut episodes = Vec::new();
    for k in StrategyKind::ALL {
        let eps: Vec<EpisodeMetrics> = counts
            .par_iter()
            .enumerate()
            .map(|(r, &f)| {
                let sc = scenario.clone().with_straggler_count(f, mode);
                run_episode(&sc, k, seed_base + r as u64)
            })
            .collect::<Result<_>>()?;
        let successes = eps.iter().filter(|e| e.outcome.success).count();
        let with_survivor: Vec<bool> =
            eps.iter().zip(&counts).filter(|(_, &f)| f < p).map(|(e, _)| e.outcome.success).collect();
        let conditional_rate = if with_survivor.is_empty() {
            f64::NAN
        } else {
            with_survivor.iter().filter(|&&s| s).count() as f64 / with_survivor.len() as f64
        };
        let s = eps
            .iter()
            .find_map(|e| match e.params {
                StrategyParams::Coded { s } => Some(s),
                _ => None,
            })
            .unwrap_or(1);
        let analytic_rate = analytic_success_rate(k, scenario.n1, scenario.n2, p, s)?;
        let bound_rate = (k == StrategyKind::Coded).then(|| bound_success_rate(scenario.n1, scenario.n2, p, s));
        rows.push(SuccessRow { strategy: k, runs, successes, conditional_rate, analytic_rate, bound_rate });
        episodes.extend(eps.into_iter().enumerate().map(|(r, e)| (counts[r], e)));
    }
    Ok(SuccessResult { rows, failure_counts: counts, episodes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.2909944487358056).abs() < 1e-15);
    }

    #[test]
    fn b_grid() {
        assert_eq!(default_b_grid(256), vec![256, 128, 64, 32, 16, 8]);
        assert_eq!(default_b_grid(3750), vec![3750, 1875, 938, 469, 235, 118]);
        assert_eq!(default_b_grid(4), vec![4, 2, 1]);
    }

    #[test]
    fn balanced_counts_cover_each_value() {
        let c = failure_counts(8, 18, FailureDraw::Balanced, 3).unwrap();
        for f in 0..=8 {
            assert_eq!(c.iter().filter(|&&x| x == f).count(), 2);
        }
    }

    #[test]
    fn single_column_survival_matches_bound() {
        // 512 x 256, P = 8, s = 256: one column needing 2 of 8.
        for f in 0..=8 {
            let p = coded_survival_probability(512, 256, 8, 256, f).unwrap();
            assert_eq!(p, if f <= 6 { 1.0 } else { 0.0 });
        }
        let a = analytic_success_rate(StrategyKind::Coded, 512, 256, 8, 256).unwrap();
        assert!((a - 7.0 / 9.0).abs() < 1e-15);
        assert!((bound_success_rate(512, 256, 8, 256) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn two_column_survival_by_enumeration() {
        // 2500 x 3750, P = 8, s = 2500: two columns of 4 workers, each needing 1.
        for f in 0..=8 {
            let mut ok = 0usize;
            let mut total = 0usize;
            for mask in 0u32..256 {
                if mask.count_ones() as usize != f {
                    continue;
                }
                total += 1;
                if (mask & 0x0f) != 0x0f && (mask & 0xf0) != 0xf0 {
                    ok += 1;
                }
            }
            let p = coded_survival_probability(2500, 3750, 8, 2500, f).unwrap();
            assert!((p - ok as f64 / total as f64).abs() < 1e-12, "f = {f}");
        }
    }
}
