//! Scenario descriptions shared by the episode runner and the experiments.

use crate::error::{Error, Result};
use crate::models::{Behavior, CommParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StragglerMode {
    /// Service takes `factor` times as long.
    Delayed(f64),
    /// Stops returning results at the given time.
    Fail { at: f64 },
    /// Leaves the master's range at the given time.
    Leave { at: f64 },
}

impl StragglerMode {
    pub fn behavior(self) -> Behavior {
        match self {
            StragglerMode::Delayed(f) => Behavior::Delayed(f),
            StragglerMode::Fail { at } => Behavior::FailedAt(at),
            StragglerMode::Leave { at } => Behavior::LeavesAt(at),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StragglerSpec {
    /// Fraction of workers that straggle.
    pub ratio: f64,
    /// Exact straggler count; overrides `ratio` when set.
    pub count: Option<usize>,
    pub mode: StragglerMode,
}

impl Default for StragglerSpec {
    fn default() -> Self {
        StragglerSpec { ratio: 0.0, count: None, mode: StragglerMode::Delayed(15.0) }
    }
}

impl StragglerSpec {
    /// Number of stragglers among `p` workers.
    pub fn count_for(&self, p: usize) -> usize {
        self.count.unwrap_or_else(|| (self.ratio * p as f64).round() as usize).min(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub n1: usize,
    pub n2: usize,
    pub workers: usize,
    /// Straggling parameters are drawn uniformly from this range; the shift is `1 / mu`.
    pub mu_range: (f64, f64),
    pub load_constant: f64,
    /// Initial positions are uniform in `[-h, h]^2`.
    pub init_half_width_m: f64,
    pub velocity_max_mps: f64,
    pub comm: CommParams,
    pub stragglers: StragglerSpec,
    /// Piece length for the dynamic strategy; `ceil(N2 / P)` when unset.
    pub b: Option<usize>,
    /// Sub-vector length for the traditional strategy; chosen by `select_s` when unset.
    pub s: Option<usize>,
    /// Cut-off as a multiple of the straggler-free completion time.
    pub horizon_factor: f64,
    pub master_flop_time: f64,
    pub record_events: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "custom".into(),
            n1: 512,
            n2: 256,
            workers: 8,
            mu_range: (3e6, 6e6),
            load_constant: 1.0,
            init_half_width_m: 1500.0,
            velocity_max_mps: 10.0,
            comm: CommParams::default(),
            stragglers: StragglerSpec::default(),
            b: None,
            s: None,
            horizon_factor: 50.0,
            master_flop_time: 0.0,
            record_events: false,
        }
    }
}

/// Full-size parameters of the four reference scenarios: `(N1, N2, P)`.
pub const SCENARIOS: [(usize, usize, usize); 4] = [(4096, 2048, 8), (4096, 2048, 4), (20000, 30000, 8), (20000, 30000, 6)];

/// Default shrink factor for desk-scale runs.
pub const DEFAULT_SCALE: usize = 8;

/// Piece lengths picked by the b-sweep at the default scale, indexed like [`SCENARIOS`].
const SCALED_B: [usize; 4] = [128, 128, 938, 1875];

impl ScenarioConfig {
    /// Reference scenario `index` (1-based) with lengths divided by `scale` (rounded up).
    pub fn preset(index: usize, scale: usize) -> Result<Self> {
        if !(1..=SCENARIOS.len()).contains(&index) {
            return Err(Error::invalid(format!("scenario must be 1..={}, got {index}", SCENARIOS.len())));
        }
        if scale == 0 {
            return Err(Error::invalid("scale must be at least 1"));
        }
        let (n1, n2, p) = SCENARIOS[index - 1];
        let (n1, n2) = (n1.div_ceil(scale), n2.div_ceil(scale));
        let b = if scale == DEFAULT_SCALE { Some(SCALED_B[index - 1]) } else { None };
        Ok(ScenarioConfig { name: format!("scenario{index}"), n1, n2, workers: p, b, ..Default::default() })
    }

    pub fn with_stragglers(mut self, ratio: f64, mode: StragglerMode) -> Self {
        self.stragglers = StragglerSpec { ratio, count: None, mode };
        self
    }

    pub fn with_straggler_count(mut self, count: usize, mode: StragglerMode) -> Self {
        self.stragglers = StragglerSpec { ratio: count as f64 / self.workers.max(1) as f64, count: Some(count), mode };
        self
    }

    /// `b`, defaulting to `ceil(N2 / P)`.
    pub fn b_or_default(&self) -> usize {
        self.b.unwrap_or_else(|| self.n2.div_ceil(self.workers.max(1)))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.n1 == 0 || self.n2 == 0 || self.workers == 0 {
            return bad("n1, n2 and workers must be at least 1".into());
        }
        if self.workers > u32::MAX as usize - 1 {
            return bad("too many workers".into());
        }
        let (lo, hi) = self.mu_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return bad(format!("mu range [{lo}, {hi}] must be positive and ordered"));
        }
        if !(self.load_constant > 0.0 && self.load_constant.is_finite()) {
            return bad("load constant must be positive".into());
        }
        if !(self.init_half_width_m >= 0.0 && self.velocity_max_mps >= 0.0) {
            return bad("position and velocity bounds must be non-negative".into());
        }
        let st = &self.stragglers;
        if !(0.0..=1.0).contains(&st.ratio) {
            return bad(format!("straggler ratio {} outside [0, 1]", st.ratio));
        }
        if st.count.is_some_and(|c| c > self.workers) {
            return bad(format!("straggler count exceeds {} workers", self.workers));
        }
        st.mode.behavior().validate()?;
        if let Some(b) = self.b {
            if b == 0 || b > self.n2 {
                return bad(format!("b = {b} outside [1, {}]", self.n2));
            }
        }
        if let Some(s) = self.s {
            if s == 0 || s > self.n1.min(self.n2) {
                return bad(format!("s = {s} outside [1, {}]", self.n1.min(self.n2)));
            }
        }
        if !(self.horizon_factor >= 1.0 && self.horizon_factor.is_finite()) {
            return bad("horizon factor must be at least 1".into());
        }
        if !(self.master_flop_time >= 0.0) {
            return bad("master flop time must be non-negative".into());
        }
        self.comm.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_scale() {
        let s1 = ScenarioConfig::preset(1, 8).unwrap();
        assert_eq!((s1.n1, s1.n2, s1.workers), (512, 256, 8));
        let s4 = ScenarioConfig::preset(4, 8).unwrap();
        assert_eq!((s4.n1, s4.n2, s4.workers), (2500, 3750, 6));
        let full = ScenarioConfig::preset(3, 1).unwrap();
        assert_eq!((full.n1, full.n2), (20000, 30000));
        assert!(ScenarioConfig::preset(5, 8).is_err());
        for i in 1..=4 {
            ScenarioConfig::preset(i, 8).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn validation_catches_ranges() {
        let bad = ScenarioConfig::default().with_stragglers(1.5, StragglerMode::Delayed(15.0));
        assert!(bad.validate().is_err());
        let bad = ScenarioConfig { b: Some(0), ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ScenarioConfig { mu_range: (5.0, 1.0), ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn straggler_counts() {
        let spec = StragglerSpec { ratio: 0.5, ..Default::default() };
        assert_eq!(spec.count_for(6), 3);
        assert_eq!(StragglerSpec { count: Some(2), ..spec }.count_for(6), 2);
    }
}
