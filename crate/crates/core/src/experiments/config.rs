//! Experiment plans and their TOML file format.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::output::{write_manifest, write_table_csv, Manifest, Table};
use super::{compare_strategies, default_b_grid, stress_test, success_rate, sweep_b, FailureDraw};
use crate::engine::{run_episode, write_event_log_csv};
use crate::error::{Error, Result};
use crate::fmt::format_g6;
use crate::models::{CommParams, SignalModel};
use crate::scenario::{ScenarioConfig, StragglerMode, StragglerSpec, DEFAULT_SCALE};
use crate::strategies::StrategyKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    SweepB,
    Compare,
    Stress,
    SuccessRate,
    Episode,
}

impl ExperimentName {
    pub fn file_stem(self) -> &'static str {
        match self {
            ExperimentName::SweepB => "sweep_b",
            ExperimentName::Compare => "compare",
            ExperimentName::Stress => "stress",
            ExperimentName::SuccessRate => "success_rate",
            ExperimentName::Episode => "episode",
        }
    }
}

/// A fully resolved experiment ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentFile {
    pub name: ExperimentName,
    pub scenarios: Vec<ScenarioConfig>,
    pub reps: usize,
    pub seed: u64,
    /// Piece lengths for the sweep; the default grid per scenario when empty.
    pub b_values: Vec<usize>,
    pub ratios: Vec<f64>,
    /// Straggler ratio for `compare`.
    pub ratio: f64,
    pub runs: usize,
    pub failure_draw: FailureDraw,
    pub strategy: StrategyKind,
}

impl ExperimentFile {
    pub fn new(name: ExperimentName, scenarios: Vec<ScenarioConfig>) -> Self {
        ExperimentFile {
            name,
            scenarios,
            reps: 25,
            seed: 0,
            b_values: Vec::new(),
            ratios: (0..=6).map(|k| k as f64 / 6.0).collect(),
            ratio: 0.5,
            runs: 2000,
            failure_draw: FailureDraw::Balanced,
            strategy: StrategyKind::Dynamic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::Config("no scenario selected".into()));
        }
        if self.reps == 0 || self.runs == 0 {
            return Err(Error::Config("reps and runs must be at least 1".into()));
        }
        for sc in &self.scenarios {
            sc.validate().map_err(to_config)?;
            if let Some(&b) = self.b_values.iter().find(|&&b| b == 0 || b > sc.n2) {
                return Err(Error::Config(format!("b = {b} outside [1, {}] for {}", sc.n2, sc.name)));
            }
        }
        for &r in self.ratios.iter().chain(std::iter::once(&self.ratio)) {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("straggler ratio {r} outside [0, 1]")));
            }
        }
        if self.ratios.is_empty() {
            return Err(Error::Config("ratios must not be empty".into()));
        }
        if let FailureDraw::PerWorker(q) = self.failure_draw {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Config(format!("failure probability {q} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Runs the experiment and writes CSV files plus manifests into `out_dir`.
    /// Returns the written paths.
    pub fn execute(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        self.validate()?;
        let mut written = Vec::new();
        let stem = self.name.file_stem();
        for sc in &self.scenarios {
            let base = format!("{stem}_{}", sc.name);
            let csv = out_dir.join(format!("{base}.csv"));
            let raw = out_dir.join(format!("{base}_episodes.csv"));
            let (table, episodes, manifest) = match self.name {
                ExperimentName::SweepB => {
                    let grid = if self.b_values.is_empty() { default_b_grid(sc.n2) } else { self.b_values.clone() };
                    let res = sweep_b(sc, &grid, self.reps, self.seed)?;
                    let m = Manifest::new(stem, sc, self.seed, self.reps, res.episodes.iter().map(|(_, e)| e));
                    (Table::sweep(&res), Table::episodes("b", &res.episodes, |b| b.to_string()), m)
                }
                ExperimentName::Compare | ExperimentName::Stress => {
                    let res = if self.name == ExperimentName::Compare {
                        compare_strategies(sc, self.ratio, self.reps, self.seed)?
                    } else {
                        stress_test(sc, &self.ratios, &StrategyKind::ALL, self.reps, self.seed)?
                    };
                    let m = Manifest::new(stem, sc, self.seed, self.reps, res.episodes.iter().map(|(_, e)| e));
                    let t = if self.name == ExperimentName::Compare { Table::compare(&res) } else { Table::stress(&res) };
                    (t, Table::episodes("ratio", &res.episodes, format_g6), m)
                }
                ExperimentName::SuccessRate => {
                    let res = success_rate(sc, self.runs, self.failure_draw, self.seed)?;
                    let m = Manifest::new(stem, sc, self.seed, self.runs, res.episodes.iter().map(|(_, e)| e));
                    (Table::success(&res), Table::episodes("failures", &res.episodes, |f| f.to_string()), m)
                }
                ExperimentName::Episode => {
                    let sc = ScenarioConfig { record_events: true, ..sc.clone() };
                    let mut ep = run_episode(&sc, self.strategy, self.seed)?;
                    let events = ep.event_log.take().unwrap_or_default();
                    let log_path = out_dir.join(format!("{base}_{}_events.csv", self.strategy));
                    fs::create_dir_all(out_dir)?;
                    write_event_log_csv(&events, fs::File::create(&log_path)?)?;
                    written.push(log_path);
                    let m = Manifest::new(stem, &sc, self.seed, 1, std::iter::once(&ep));
                    let summary = Table::episodes("scenario", &[(0u8, ep)], |_| sc.name.clone());
                    (summary.clone(), summary, m)
                }
            };
            write_table_csv(&csv, &table)?;
            written.push(csv.clone());
            if self.name != ExperimentName::Episode {
                write_table_csv(&raw, &episodes)?;
                written.push(raw);
            }
            let mpath = out_dir.join(format!("{base}.manifest.toml"));
            let mut manifest = manifest;
            manifest.outputs = written
                .iter()
                .filter(|p| p.file_name().is_some_and(|n| n.to_string_lossy().starts_with(&base)))
                .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                .collect();
            write_manifest(&mpath, &manifest)?;
            written.push(mpath);
        }
        Ok(written)
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::Config(m),
        other => other,
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRoot {
    experiment: ExperimentSection,
    #[serde(default)]
    scenario: ScenarioSection,
    #[serde(default)]
    straggler: StragglerSection,
    #[serde(default)]
    comm: CommSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    name: ExperimentName,
    reps: Option<usize>,
    seed: Option<u64>,
    b_values: Option<Vec<usize>>,
    ratios: Option<Vec<f64>>,
    ratio: Option<f64>,
    runs: Option<usize>,
    failure_draw: Option<DrawName>,
    failure_probability: Option<f64>,
    strategy: Option<String>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum DrawName {
    Balanced,
    Uniform,
    PerWorker,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    preset: Option<usize>,
    scale: Option<usize>,
    name: Option<String>,
    n1: Option<usize>,
    n2: Option<usize>,
    workers: Option<usize>,
    mu_min: Option<f64>,
    mu_max: Option<f64>,
    load_constant: Option<f64>,
    init_half_width_m: Option<f64>,
    velocity_max_mps: Option<f64>,
    b: Option<usize>,
    s: Option<usize>,
    horizon_factor: Option<f64>,
    master_flop_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModeName {
    Delayed,
    Fail,
    Leave,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StragglerSection {
    ratio: Option<f64>,
    count: Option<usize>,
    mode: Option<ModeName>,
    factor: Option<f64>,
    at: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SignalName {
    Simplified,
    Full,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommSection {
    bandwidth_hz: Option<f64>,
    noise_w: Option<f64>,
    bytes_per_number: Option<f64>,
    signal: Option<SignalName>,
    tx_power_dbm: Option<f64>,
    wavelength_m: Option<f64>,
    gain_dbi: Option<f64>,
    noise_sigma_db: Option<f64>,
}

fn build_scenario(sc: &ScenarioSection, st: &StragglerSection, comm: &CommSection) -> Result<ScenarioConfig> {
    let mut cfg = match sc.preset {
        Some(i) => ScenarioConfig::preset(i, sc.scale.unwrap_or(DEFAULT_SCALE)).map_err(to_config)?,
        None => ScenarioConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = sc.$field { cfg.$field = v; } )* };
    }
    set!(n1, n2, workers, load_constant, init_half_width_m, velocity_max_mps, horizon_factor, master_flop_time);
    if let Some(n) = &sc.name {
        cfg.name = n.clone();
    }
    if sc.b.is_some() {
        cfg.b = sc.b;
    } else if sc.preset.is_some() && (sc.n2.is_some() || sc.workers.is_some()) {
        cfg.b = None;
    }
    if sc.s.is_some() {
        cfg.s = sc.s;
    }
    cfg.mu_range = (sc.mu_min.unwrap_or(cfg.mu_range.0), sc.mu_max.unwrap_or(cfg.mu_range.1));

    let at = st.at.unwrap_or(0.0);
    let mode = match st.mode.unwrap_or(ModeName::Delayed) {
        ModeName::Delayed => StragglerMode::Delayed(st.factor.unwrap_or(15.0)),
        ModeName::Fail => StragglerMode::Fail { at },
        ModeName::Leave => StragglerMode::Leave { at },
    };
    cfg.stragglers = StragglerSpec { ratio: st.ratio.unwrap_or(0.0), count: st.count, mode };

    let d = CommParams::default();
    let signal = match comm.signal.unwrap_or(SignalName::Simplified) {
        SignalName::Simplified => SignalModel::Simplified,
        SignalName::Full => SignalModel::Full {
            tx_power_dbm: comm.tx_power_dbm.unwrap_or(20.0),
            wavelength_m: comm.wavelength_m.unwrap_or(0.125),
            gain_dbi: comm.gain_dbi.unwrap_or(0.0),
            noise_sigma_db: comm.noise_sigma_db.unwrap_or(0.0),
        },
    };
    cfg.comm = CommParams {
        bandwidth_hz: comm.bandwidth_hz.unwrap_or(d.bandwidth_hz),
        noise_w: comm.noise_w.unwrap_or(d.noise_w),
        bytes_per_number: comm.bytes_per_number.unwrap_or(d.bytes_per_number),
        signal,
    };
    cfg.validate().map_err(to_config)?;
    Ok(cfg)
}

/// Parses and validates an experiment description.
pub fn parse_experiment(text: &str) -> Result<ExperimentFile> {
    let root: FileRoot = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let scenario = build_scenario(&root.scenario, &root.straggler, &root.comm)?;
    let ex = &root.experiment;
    let mut plan = ExperimentFile::new(ex.name, vec![scenario]);
    if let Some(r) = ex.reps {
        plan.reps = r;
    }
    if let Some(s) = ex.seed {
        plan.seed = s;
    }
    if let Some(b) = &ex.b_values {
        plan.b_values = b.clone();
    }
    if let Some(r) = &ex.ratios {
        plan.ratios = r.clone();
    }
    plan.ratio = ex.ratio.or(root.straggler.ratio).unwrap_or(0.5);
    if let Some(r) = ex.runs {
        plan.runs = r;
    }
    plan.failure_draw = match ex.failure_draw.unwrap_or(DrawName::Balanced) {
        DrawName::Balanced => FailureDraw::Balanced,
        DrawName::Uniform => FailureDraw::UniformCount,
        DrawName::PerWorker => FailureDraw::PerWorker(ex.failure_probability.unwrap_or(0.5)),
    };
    if let Some(s) = &ex.strategy {
        plan.strategy = s.parse().map_err(to_config)?;
    }
    plan.validate()?;
    Ok(plan)
}

pub fn load_experiment_file(path: &Path) -> Result<ExperimentFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_experiment(&text)
}

/// Loads `path`, runs the experiment it names and writes outputs into `out_dir`.
pub fn run_scenario_file(path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    load_experiment_file(path)?.execute(out_dir)
}
