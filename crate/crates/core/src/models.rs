//! Mobility, computing and communication models for the simulated workers,
//! plus straggler behaviour.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Uniform sample from the axis-aligned box `[-half, half]^2`.
    pub fn sample_box<R: Rng + ?Sized>(rng: &mut R, half: f64) -> Vec2 {
        Vec2::new(rng.random_range(-half..=half), rng.random_range(-half..=half))
    }
}

/// Point-mass step: `p + v * dt`.
pub fn advance_position(p: Vec2, v: Vec2, dt: f64) -> Vec2 {
    debug_assert!(dt >= 0.0, "negative time step");
    Vec2::new(p.x + v.x * dt, p.y + v.y * dt)
}

/// FFT cost of convolving vectors of lengths `n1` and `n2`:
/// `C (n1 + n2) log2(n1 + n2)`.
pub fn compute_load(n1: usize, n2: usize, c: f64) -> f64 {
    let n = (n1 + n2) as f64;
    c * n * n.log2()
}

/// Shifted-exponential compute time: `alpha * load + E`, `E ~ Exp(mu / load)`.
///
/// CDF: `1 - exp(-(mu / load) (t - alpha load))` for `t >= alpha load`.
pub fn sample_compute_time<R: Rng + ?Sized>(rng: &mut R, mu: f64, alpha: f64, load: f64) -> f64 {
    let tail = Exp::new(mu / load).expect("positive rate").sample(rng);
    alpha * load + tail
}

/// Mean of [`sample_compute_time`].
pub fn mean_compute_time(mu: f64, alpha: f64, load: f64) -> f64 {
    alpha * load + load / mu
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalModel {
    /// `S_d = 6 - 20 log10(d)` dBm.
    Simplified,
    /// Free-space link budget:
    /// `P_t + 20 log10(lambda) - 20 log10(4 pi) - 20 log10(d) + G + w`.
    Full {
        tx_power_dbm: f64,
        wavelength_m: f64,
        gain_dbi: f64,
        /// Standard deviation of the zero-mean Gaussian term `w`, dB.
        noise_sigma_db: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommParams {
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    pub bytes_per_number: f64,
    pub signal: SignalModel,
}

impl Default for CommParams {
    fn default() -> Self {
        CommParams {
            bandwidth_hz: 1e6,
            noise_w: 1e-12,
            bytes_per_number: 8.0,
            signal: SignalModel::Simplified,
        }
    }
}

impl CommParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0 && self.noise_w > 0.0 && self.bytes_per_number > 0.0) {
            return Err(Error::invalid("bandwidth, noise power and bytes per number must be positive"));
        }
        if let SignalModel::Full { wavelength_m, noise_sigma_db, .. } = self.signal {
            if !(wavelength_m > 0.0 && noise_sigma_db >= 0.0) {
                return Err(Error::invalid("wavelength must be positive and noise sigma non-negative"));
            }
        }
        Ok(())
    }
}

/// Received signal power in dBm at distance `d` metres, with the Gaussian term at its mean (0).
pub fn signal_power_dbm(d: f64, params: &CommParams) -> Result<f64> {
    if d.is_nan() || d <= 0.0 {
        return Err(Error::invalid(format!("distance must be positive, got {d}")));
    }
    Ok(match params.signal {
        SignalModel::Simplified => 6.0 - 20.0 * d.log10(),
        SignalModel::Full { tx_power_dbm, wavelength_m, gain_dbi, .. } => {
            tx_power_dbm + 20.0 * wavelength_m.log10()
                - 20.0 * (4.0 * std::f64::consts::PI).log10()
                - 20.0 * d.log10()
                + gain_dbi
        }
    })
}

/// As [`signal_power_dbm`], drawing the Gaussian term for the full model.
pub fn sample_signal_power_dbm<R: Rng + ?Sized>(
    rng: &mut R,
    d: f64,
    params: &CommParams,
) -> Result<f64> {
    let base = signal_power_dbm(d, params)?;
    match params.signal {
        SignalModel::Full { noise_sigma_db, .. } if noise_sigma_db > 0.0 => {
            let w = rand_distr::Normal::new(0.0, noise_sigma_db)
                .map_err(|e| Error::invalid(e.to_string()))?
                .sample(rng);
            Ok(base + w)
        }
        _ => Ok(base),
    }
}

/// Shannon rate in bits/s for a link whose received power is `s_dbm`.
pub fn rate_from_signal(s_dbm: f64, params: &CommParams) -> f64 {
    let watts = 10f64.powf((s_dbm - 30.0) / 10.0);
    params.bandwidth_hz * (1.0 + watts / params.noise_w).log2()
}

/// Shannon rate in bits/s at distance `d`.
pub fn data_rate(d: f64, params: &CommParams) -> Result<f64> {
    Ok(rate_from_signal(signal_power_dbm(d, params)?, params))
}

/// Seconds to move `n` numbers of `bytes_per_number` bytes at `rate` bits/s.
pub fn comm_time(n: usize, bytes_per_number: f64, rate: f64) -> Result<f64> {
    if rate.is_nan() || rate <= 0.0 {
        return Err(Error::invalid(format!("rate must be positive, got {rate}")));
    }
    Ok(n as f64 * bytes_per_number * 8.0 / rate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Behavior {
    Normal,
    /// Every service takes `factor` times its sampled duration.
    Delayed(f64),
    /// Stops silently at the given time.
    FailedAt(f64),
    /// Leaves the master's range at the given time.
    LeavesAt(f64),
    /// Becomes reachable at the given time.
    JoinsAt(f64),
}

impl Behavior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Behavior::Delayed(f) if !(f >= 1.0) => {
                Err(Error::invalid(format!("delay factor must be >= 1, got {f}")))
            }
            Behavior::FailedAt(t) | Behavior::LeavesAt(t) | Behavior::JoinsAt(t) if !(t >= 0.0) => {
                Err(Error::invalid(format!("behaviour time must be >= 0, got {t}")))
            }
            _ => Ok(()),
        }
    }

    /// Time after which the worker no longer returns anything, if any.
    pub fn stop_time(&self) -> Option<f64> {
        match *self {
            Behavior::FailedAt(t) | Behavior::LeavesAt(t) => Some(t),
            _ => None,
        }
    }

    pub fn join_time(&self) -> f64 {
        match *self {
            Behavior::JoinsAt(t) => t,
            _ => 0.0,
        }
    }

    pub fn delay_factor(&self) -> f64 {
        match *self {
            Behavior::Delayed(f) => f,
            _ => 1.0,
        }
    }
}

/// Effective duration of a service starting at `now` with nominal length
/// `nominal`, or `None` when the worker never delivers it.
pub fn apply_straggler(behavior: Behavior, nominal: f64, now: f64) -> Option<f64> {
    match behavior {
        Behavior::Normal => Some(nominal),
        Behavior::Delayed(f) => Some(f * nominal),
        Behavior::FailedAt(t) | Behavior::LeavesAt(t) => (now + nominal <= t).then_some(nominal),
        Behavior::JoinsAt(t) => (now >= t).then_some(nominal),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerProfile {
    pub id: usize,
    pub position: Vec2,
    pub velocity: Vec2,
    /// Straggling parameter.
    pub mu: f64,
    /// Shift parameter.
    pub alpha: f64,
    pub behavior: Behavior,
}

impl WorkerProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.alpha > 0.0) {
            return Err(Error::invalid(format!("worker {}: mu and alpha must be positive", self.id)));
        }
        self.behavior.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn position_steps() {
        let p = advance_position(Vec2::new(0.0, 0.0), Vec2::new(10.0, -10.0), 1.0);
        assert_eq!(p, Vec2::new(10.0, -10.0));
        let q = Vec2::new(3.0, 4.0);
        assert_eq!(advance_position(q, Vec2::new(7.0, 7.0), 0.0), q);
        let r = advance_position(Vec2::new(100.0, 200.0), Vec2::new(-5.0, 3.0), 2.5);
        assert_eq!(r, Vec2::new(87.5, 207.5));
    }

    #[test]
    fn load_formula() {
        assert_eq!(compute_load(512, 512, 1.0), 10240.0);
        assert_eq!(compute_load(1, 1, 1.0), 2.0);
        for n in [4usize, 64, 1000] {
            let ratio = compute_load(2 * n, 2 * n, 1.0) / compute_load(n, n, 1.0);
            let expect = 2.0 * (1.0 + 1.0 / ((2 * n) as f64).log2());
            assert!(close(ratio, expect, 1e-12));
        }
    }

    #[test]
    fn compute_time_respects_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mu, alpha, load) = (4e6, 2.5e-7, 1e6);
        for _ in 0..1000 {
            assert!(sample_compute_time(&mut rng, mu, alpha, load) >= alpha * load);
        }
    }

    #[test]
    fn compute_time_median() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mu, alpha, load) = (4e6, 2.5e-7, 1e6);
        let median = alpha * load + load * std::f64::consts::LN_2 / mu;
        let n = 100_000;
        let below = (0..n)
            .filter(|_| sample_compute_time(&mut rng, mu, alpha, load) <= median)
            .count();
        assert!((below as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn simplified_signal() {
        let p = CommParams::default();
        assert!(close(signal_power_dbm(1000.0, &p).unwrap(), -54.0, 1e-12));
        assert_eq!(signal_power_dbm(1.0, &p).unwrap(), 6.0);
        let drop = signal_power_dbm(100.0, &p).unwrap() - signal_power_dbm(200.0, &p).unwrap();
        assert!(close(drop, 20.0 * 2f64.log10(), 1e-12));
        assert!(matches!(signal_power_dbm(0.0, &p), Err(Error::InvalidArgument(_))));
        assert!(signal_power_dbm(-1.0, &p).is_err());
    }

    #[test]
    fn full_signal_matches_link_budget() {
        let p = CommParams {
            signal: SignalModel::Full {
                tx_power_dbm: 20.0,
                wavelength_m: 0.125,
                gain_dbi: 6.0,
                noise_sigma_db: 0.0,
            },
            ..CommParams::default()
        };
        let expect = 20.0 + 20.0 * 0.125f64.log10() - 20.0 * (4.0 * std::f64::consts::PI).log10()
            - 20.0 * 500f64.log10()
            + 6.0;
        assert!(close(signal_power_dbm(500.0, &p).unwrap(), expect, 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_signal_power_dbm(&mut rng, 500.0, &p).unwrap(), signal_power_dbm(500.0, &p).unwrap());
    }

    #[test]
    fn rate_at_one_kilometre() {
        // -54 dBm = 10^-8.4 W, SNR ~ 3981, rate = 1e6 log2(3982)
        let r = data_rate(1000.0, &CommParams::default()).unwrap();
        let expect = 1e6 * (1.0 + 10f64.powf(-8.4) / 1e-12).log2();
        assert!(close(r, expect, 1e-12));
        assert!(close(r, 1.196e7, 1e-3));
    }

    #[test]
    fn rate_equals_bandwidth_at_unit_snr() {
        let p = CommParams::default();
        // 6 - 20 log10(d) = 30 + 10 log10(N0)  =>  d = 10^((6 - 30 - 10 log10(N0)) / 20)
        let d = 10f64.powf((6.0 - 30.0 - 10.0 * p.noise_w.log10()) / 20.0);
        assert!(close(data_rate(d, &p).unwrap(), p.bandwidth_hz, 1e-9));
    }

    #[test]
    fn rate_decreases_with_distance() {
        let p = CommParams::default();
        let mut last = f64::INFINITY;
        for d in [1.0, 10.0, 100.0, 1000.0, 4243.0, 1e5] {
            let r = data_rate(d, &p).unwrap();
            assert!(r < last && r > 0.0);
            last = r;
        }
    }

    #[test]
    fn comm_time_cases() {
        assert_eq!(comm_time(0, 8.0, 1e7).unwrap(), 0.0);
        let t = comm_time(1_000_000, 8.0, 1.196e7).unwrap();
        assert!(close(t, 6.4e7 / 1.196e7, 1e-12));
        assert!(close(comm_time(2_000_000, 8.0, 1.196e7).unwrap(), 2.0 * t, 1e-12));
        assert!(matches!(comm_time(1, 8.0, 0.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn straggler_behaviours() {
        assert!(close(apply_straggler(Behavior::Delayed(15.0), 0.2, 0.0).unwrap(), 3.0, 1e-12));
        assert_eq!(apply_straggler(Behavior::Normal, 0.2, 0.0), Some(0.2));
        assert_eq!(apply_straggler(Behavior::FailedAt(5.0), 1.1, 5.0), None);
        assert_eq!(apply_straggler(Behavior::FailedAt(5.0), 1.0, 3.0), Some(1.0));
        assert_eq!(apply_straggler(Behavior::LeavesAt(1.0), 0.5, 0.6), None);
        assert_eq!(apply_straggler(Behavior::JoinsAt(2.0), 0.5, 1.0), None);
        assert_eq!(apply_straggler(Behavior::JoinsAt(2.0), 0.5, 2.0), Some(0.5));
        assert!(Behavior::Delayed(0.5).validate().is_err());
    }
}
