use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use super::rng::{stream_rng, Stream, MASTER_INDEX};
use super::{EngineConfig, LoggedEvent, SimEngine};
use crate::coding::RealVector;
use crate::error::Result;
use crate::models::{Behavior, Vec2, WorkerProfile};
use crate::scenario::ScenarioConfig;
use crate::strategies::{run_strategy, select_s, StrategyKind, StrategyOutcome, StrategyParams, TaskSpec};

/// Everything drawn from the seed before the simulation starts.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub master_position: Vec2,
    pub workers: Vec<WorkerProfile>,
    pub a: RealVector,
    pub x: RealVector,
}

impl World {
    pub fn straggler_free(&self) -> Self {
        let mut w = self.clone();
        for p in &mut w.workers {
            p.behavior = Behavior::Normal;
        }
        w
    }

    pub fn profiles(&self) -> Vec<(f64, f64)> {
        self.workers.iter().map(|w| (w.mu, w.alpha)).collect()
    }
}

fn uniform_vector<R: Rng>(rng: &mut R, n: usize) -> RealVector {
    RealVector::from_vec_unchecked((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
}

/// Draws positions, compute parameters, straggler assignment and input data.
///
/// Each quantity comes from its own stream keyed by worker index, so worker
/// `j` sees the same draws whatever the straggler ratio or strategy. The
/// straggler set is a prefix of one seeded permutation, so sets are nested
/// as the count grows.
pub fn build_world(scenario: &ScenarioConfig, seed: u64) -> Result<World> {
    scenario.validate()?;
    let half = scenario.init_half_width_m;
    let vmax = scenario.velocity_max_mps;
    let mut master_rng = stream_rng(seed, Stream::Placement, MASTER_INDEX);
    let master_position = Vec2::sample_box(&mut master_rng, half);
    let p = scenario.workers;
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(&mut stream_rng(seed, Stream::Stragglers, 0));
    let mut behavior = vec![Behavior::Normal; p];
    for &w in &order[..scenario.stragglers.count_for(p)] {
        behavior[w] = scenario.stragglers.mode.behavior();
    }
    let (lo, hi) = scenario.mu_range;
    let workers = (0..p)
        .map(|j| {
            let mut place = stream_rng(seed, Stream::Placement, j as u32);
            let position = Vec2::sample_box(&mut place, half);
            let velocity = Vec2::sample_box(&mut place, vmax);
            let mu = if lo == hi { lo } else { stream_rng(seed, Stream::Params, j as u32).random_range(lo..=hi) };
            WorkerProfile { id: j, position, velocity, mu, alpha: 1.0 / mu, behavior: behavior[j] }
        })
        .collect();
    let a = uniform_vector(&mut stream_rng(seed, Stream::Data, 0), scenario.n1);
    let x = uniform_vector(&mut stream_rng(seed, Stream::Data, 1), scenario.n2);
    Ok(World { master_position, workers, a, x })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub strategy: StrategyKind,
    pub params: StrategyParams,
    pub outcome: StrategyOutcome,
    /// Cut-off used for this episode.
    pub horizon: f64,
    pub event_log: Option<Vec<LoggedEvent>>,
    pub rng_seed: u64,
    /// Host seconds spent; informational only.
    pub wall_runtime: f64,
}

impl EpisodeMetrics {
    /// Equality ignoring host timing.
    pub fn same_simulation(&self, other: &Self) -> bool {
        EpisodeMetrics { wall_runtime: 0.0, ..self.clone() } == EpisodeMetrics { wall_runtime: 0.0, ..other.clone() }
    }
}

/// Strategy parameters for `scenario` given the drawn worker profiles.
pub fn strategy_params(scenario: &ScenarioConfig, world: &World, strategy: StrategyKind) -> Result<StrategyParams> {
    Ok(match strategy {
        StrategyKind::Uncoded => StrategyParams::Uncoded,
        StrategyKind::Coded => StrategyParams::Coded {
            s: match scenario.s {
                Some(s) => s,
                None => select_s(scenario.n1, scenario.n2, scenario.workers, &world.profiles(), scenario.load_constant)?,
            },
        },
        StrategyKind::Dynamic => StrategyParams::Dynamic { b: scenario.b_or_default() },
    })
}

fn engine_config(scenario: &ScenarioConfig, seed: u64, horizon: f64, record: bool) -> EngineConfig {
    EngineConfig {
        comm: scenario.comm,
        load_constant: scenario.load_constant,
        velocity_max_mps: scenario.velocity_max_mps,
        horizon,
        master_flop_time: scenario.master_flop_time,
        record_events: record,
        seed,
    }
}

fn simulate(
    scenario: &ScenarioConfig,
    world: &World,
    task: &TaskSpec,
    seed: u64,
    horizon: f64,
    record: bool,
) -> Result<(StrategyOutcome, Option<Vec<LoggedEvent>>)> {
    let cfg = engine_config(scenario, seed, horizon, record);
    let mut engine = SimEngine::new(cfg, world.master_position, world.workers.clone())?;
    let outcome = run_strategy(task, &mut engine)?;
    let log = record.then(|| engine.take_event_log());
    Ok((outcome, log))
}

/// Runs one episode of `strategy` on `scenario`. Stragglers are cut off at
/// `horizon_factor` times the completion time of a straggler-free pilot run
/// with the same seed.
pub fn run_episode(scenario: &ScenarioConfig, strategy: StrategyKind, seed: u64) -> Result<EpisodeMetrics> {
    let started = Instant::now();
    let world = build_world(scenario, seed)?;
    let params = strategy_params(scenario, &world, strategy)?;
    let task = TaskSpec::new(world.a.clone(), world.x.clone(), params)?;
    let clean = world.workers.iter().all(|w| w.behavior == Behavior::Normal);
    let record = scenario.record_events;
    let (outcome, horizon, event_log) = if clean {
        let (outcome, log) = simulate(scenario, &world, &task, seed, f64::INFINITY, record)?;
        let horizon = scenario.horizon_factor * outcome.completion_time;
        (outcome, horizon, log)
    } else {
        let (pilot, _) = simulate(scenario, &world.straggler_free(), &task, seed, f64::INFINITY, false)?;
        let horizon = scenario.horizon_factor * pilot.completion_time;
        let (outcome, log) = simulate(scenario, &world, &task, seed, horizon, record)?;
        (outcome, horizon, log)
    };
    Ok(EpisodeMetrics {
        strategy,
        params,
        outcome,
        horizon,
        event_log,
        rng_seed: seed,
        wall_runtime: started.elapsed().as_secs_f64(),
    })
}
