use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::{ComparisonResult, SuccessResult, SweepResult};
use crate::engine::EpisodeMetrics;
use crate::error::{Error, Result};
use crate::fmt::format_g6;
use crate::scenario::{ScenarioConfig, StragglerMode};
use crate::strategies::StrategyParams;

/// Build version, from `git describe` when available.
pub const VERSION: &str = env!("CODECONV_VERSION");

/// A CSV table: header plus pre-formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn sweep(res: &SweepResult) -> Table {
        Table {
            header: vec!["b", "mean_time_s", "std_time_s"],
            rows: res
                .rows
                .iter()
                .map(|r| vec![r.b.to_string(), format_g6(r.mean_time), format_g6(r.std_time)])
                .collect(),
        }
    }

    pub fn compare(res: &ComparisonResult) -> Table {
        Table {
            header: vec!["strategy", "mean_time_s", "std_time_s", "successes", "reps"],
            rows: res
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.strategy.to_string(),
                        format_g6(r.mean_time),
                        format_g6(r.std_time),
                        r.successes.to_string(),
                        r.reps.to_string(),
                    ]
                })
                .collect(),
        }
    }

    pub fn stress(res: &ComparisonResult) -> Table {
        Table {
            header: vec!["ratio", "strategy", "mean_time_s", "std_time_s", "successes", "reps"],
            rows: res
                .rows
                .iter()
                .map(|r| {
                    vec![
                        format_g6(r.ratio),
                        r.strategy.to_string(),
                        format_g6(r.mean_time),
                        format_g6(r.std_time),
                        r.successes.to_string(),
                        r.reps.to_string(),
                    ]
                })
                .collect(),
        }
    }

    pub fn success(res: &SuccessResult) -> Table {
        Table {
            header: vec![
                "strategy",
                "runs",
                "successes",
                "success_rate",
                "success_rate_with_survivor",
                "analytic_rate",
                "bound_rate",
            ],
            rows: res
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.strategy.to_string(),
                        r.runs.to_string(),
                        r.successes.to_string(),
                        format_g6(r.rate()),
                        format_g6(r.conditional_rate),
                        format_g6(r.analytic_rate),
                        r.bound_rate.map(format_g6).unwrap_or_default(),
                    ]
                })
                .collect(),
        }
    }

    /// One row per episode; `label` names the swept parameter column.
    pub fn episodes<P: Copy, F: Fn(P) -> String>(label: &'static str, eps: &[(P, EpisodeMetrics)], fmt: F) -> Table {
        Table {
            header: vec![
                label,
                "seed",
                "strategy",
                "param",
                "success",
                "completion_time_s",
                "pieces_dispatched",
                "redundancy_used",
                "horizon_s",
            ],
            rows: eps
                .iter()
                .map(|(p, e)| {
                    vec![
                        fmt(*p),
                        e.rng_seed.to_string(),
                        e.strategy.to_string(),
                        param_string(&e.params),
                        e.outcome.success.to_string(),
                        format_g6(e.outcome.completion_time),
                        e.outcome.pieces_dispatched.to_string(),
                        e.outcome.redundancy_used.to_string(),
                        format_g6(e.horizon),
                    ]
                })
                .collect(),
        }
    }
}

fn param_string(p: &StrategyParams) -> String {
    match p {
        StrategyParams::Uncoded => String::new(),
        StrategyParams::Coded { s } => format!("s={s}"),
        StrategyParams::Dynamic { b } => format!("b={b}"),
    }
}

pub fn write_table_csv(path: &Path, table: &Table) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(table.to_csv().as_bytes())?;
    Ok(())
}

/// Sidecar record that makes an output reproducible from its inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub version: String,
    pub experiment: String,
    pub outputs: Vec<String>,
    pub seed_base: u64,
    pub repetitions: usize,
    pub seeds: Vec<u64>,
    pub s_values: Vec<usize>,
    pub b_values: Vec<usize>,
    pub scenario: ManifestScenario,
    /// Seconds since the Unix epoch when the manifest was written.
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestScenario {
    pub name: String,
    pub n1: usize,
    pub n2: usize,
    pub workers: usize,
    pub mu_min: f64,
    pub mu_max: f64,
    pub load_constant: f64,
    pub init_half_width_m: f64,
    pub velocity_max_mps: f64,
    pub straggler_ratio: f64,
    pub straggler_mode: String,
    pub horizon_factor: f64,
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    pub bytes_per_number: f64,
}

impl ManifestScenario {
    pub fn from_config(sc: &ScenarioConfig) -> Self {
        let mode = match sc.stragglers.mode {
            StragglerMode::Delayed(f) => format!("delayed({f})"),
            StragglerMode::Fail { at } => format!("fail(at={at})"),
            StragglerMode::Leave { at } => format!("leave(at={at})"),
        };
        ManifestScenario {
            name: sc.name.clone(),
            n1: sc.n1,
            n2: sc.n2,
            workers: sc.workers,
            mu_min: sc.mu_range.0,
            mu_max: sc.mu_range.1,
            load_constant: sc.load_constant,
            init_half_width_m: sc.init_half_width_m,
            velocity_max_mps: sc.velocity_max_mps,
            straggler_ratio: sc.stragglers.ratio,
            straggler_mode: mode,
            horizon_factor: sc.horizon_factor,
            bandwidth_hz: sc.comm.bandwidth_hz,
            noise_w: sc.comm.noise_w,
            bytes_per_number: sc.comm.bytes_per_number,
        }
    }
}

impl Manifest {
    pub fn new<'a, I>(experiment: &str, scenario: &ScenarioConfig, seed_base: u64, reps: usize, episodes: I) -> Self
    where
        I: IntoIterator<Item = &'a EpisodeMetrics>,
    {
        let mut seeds = Vec::new();
        let mut s_values = Vec::new();
        let mut b_values = Vec::new();
        for e in episodes {
            seeds.push(e.rng_seed);
            match e.params {
                StrategyParams::Coded { s } => s_values.push(s),
                StrategyParams::Dynamic { b } => b_values.push(b),
                StrategyParams::Uncoded => {}
            }
        }
        for v in [&mut s_values, &mut b_values] {
            v.sort_unstable();
            v.dedup();
        }
        seeds.sort_unstable();
        seeds.dedup();
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Manifest {
            version: VERSION.to_string(),
            experiment: experiment.to_string(),
            outputs: Vec::new(),
            seed_base,
            repetitions: reps,
            seeds,
            s_values,
            b_values,
            scenario: ManifestScenario::from_config(scenario),
            created_unix,
        }
    }
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let text = toml::to_string(manifest).map_err(|e| Error::Io(e.to_string()))?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}
