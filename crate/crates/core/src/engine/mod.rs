//! Discrete-event kernel: clock, event queue, master/worker message exchange
//! and worker lifecycle. Scheduling policy lives in a [`Master`] implementation.

mod episode;
mod event;
mod log;
pub mod rng;

use std::collections::VecDeque;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use crate::coding::{convolve, RealVector};
use crate::error::{Error, Result};
use crate::models::{
    advance_position, comm_time, compute_load, rate_from_signal, sample_compute_time,
    sample_signal_power_dbm, CommParams, Vec2, WorkerProfile,
};
use rng::{stream_rng, Stream, MASTER_INDEX};

pub use episode::{build_world, run_episode, strategy_params, EpisodeMetrics, World};
pub use event::{EventKind, EventQueue, PieceId, SimEvent};
pub use log::{write_event_log_csv, LoggedEvent, EVENT_LOG_HEADER};

/// Distances are floored here so co-located nodes get a finite rate.
pub const MIN_SEPARATION_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub comm: CommParams,
    pub load_constant: f64,
    /// Velocity components are resampled uniformly from `[-v, v]` each second.
    pub velocity_max_mps: f64,
    /// Simulated time after which the episode is cut off. May be infinite.
    pub horizon: f64,
    /// Master-side seconds per floating-point operation spent encoding and
    /// decoding. Zero means master work is free.
    pub master_flop_time: f64,
    pub record_events: bool,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            comm: CommParams::default(),
            load_constant: 1.0,
            velocity_max_mps: 10.0,
            horizon: f64::INFINITY,
            master_flop_time: 0.0,
            record_events: false,
            seed: 0,
        }
    }
}

/// Left operand of a dispatched convolution.
#[derive(Debug, Clone)]
pub enum Operand {
    /// The vector stored at every worker before the task starts; costs no transfer.
    Prestored,
    Sent(Arc<RealVector>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceStatus {
    InFlight,
    Delivered,
    Dropped,
}

/// Bookkeeping for one dispatched piece.
#[derive(Debug, Clone)]
pub struct PieceRecord {
    pub worker: usize,
    /// Caller-chosen label, e.g. the encoding row.
    pub tag: usize,
    pub sent_at: f64,
    pub numbers_in: usize,
    pub transfer_in: f64,
    pub compute_time: Option<f64>,
    pub transfer_out: Option<f64>,
    pub received_at: Option<f64>,
    pub status: PieceStatus,
    lhs: Operand,
    rhs: Option<Arc<RealVector>>,
    result: Option<RealVector>,
}

/// A result handed to the master.
#[derive(Debug, Clone)]
pub struct Delivery {
    pub worker: usize,
    pub piece: PieceId,
    pub tag: usize,
    pub sent_at: f64,
    pub received_at: f64,
    /// Transport-only round trip: inbound plus outbound transfer time.
    pub rtt: f64,
    pub data: RealVector,
}

/// Scheduling policy driven by the engine.
pub trait Master {
    fn start(&mut self, engine: &mut SimEngine) -> Result<()>;
    fn on_result(&mut self, engine: &mut SimEngine, delivery: Delivery) -> Result<()>;
    fn on_dispatch_due(&mut self, _engine: &mut SimEngine, _worker: usize) -> Result<()> {
        Ok(())
    }
    fn on_join(&mut self, _engine: &mut SimEngine, _worker: usize) -> Result<()> {
        Ok(())
    }
    fn on_leave(&mut self, _engine: &mut SimEngine, _worker: usize) -> Result<()> {
        Ok(())
    }
    fn is_done(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunEnd {
    pub completed: bool,
    /// Completion time, or the cut-off time when not completed.
    pub time: f64,
}

#[derive(Debug)]
struct Node {
    position: Vec2,
    velocity: Vec2,
    velocity_rng: ChaCha8Rng,
}

impl Node {
    fn new(seed: u64, index: u32, position: Vec2, velocity: Option<Vec2>, vmax: f64) -> Self {
        let mut velocity_rng = stream_rng(seed, Stream::Velocity, index);
        let velocity = velocity.unwrap_or_else(|| Vec2::sample_box(&mut velocity_rng, vmax));
        Node { position, velocity, velocity_rng }
    }

    fn tick(&mut self, vmax: f64) {
        self.position = advance_position(self.position, self.velocity, 1.0);
        self.velocity = Vec2::sample_box(&mut self.velocity_rng, vmax);
    }
}

#[derive(Debug)]
struct WorkerState {
    profile: WorkerProfile,
    node: Node,
    compute_rng: ChaCha8Rng,
    signal_rng: ChaCha8Rng,
    visible: bool,
    busy: bool,
    queue: VecDeque<PieceId>,
}

impl WorkerState {
    fn stopped_by(&self, t: f64) -> bool {
        self.profile.behavior.stop_time().is_some_and(|s| s <= t)
    }
}

#[derive(Debug)]
pub struct SimEngine {
    cfg: EngineConfig,
    queue: EventQueue,
    master: Node,
    workers: Vec<WorkerState>,
    pieces: Vec<PieceRecord>,
    log: Vec<LoggedEvent>,
    prestored: Option<Arc<RealVector>>,
}

impl SimEngine {
    /// Builds an engine with the master at `master_position`. Worker stream
    /// indices come from `WorkerProfile::id`.
    pub fn new(cfg: EngineConfig, master_position: Vec2, workers: Vec<WorkerProfile>) -> Result<Self> {
        cfg.comm.validate()?;
        if !(cfg.load_constant > 0.0) || !(cfg.velocity_max_mps >= 0.0) {
            return Err(Error::invalid("load constant must be positive and velocity bound non-negative"));
        }
        if !(cfg.horizon > 0.0) || !(cfg.master_flop_time >= 0.0) {
            return Err(Error::invalid("horizon must be positive and master flop time non-negative"));
        }
        if workers.is_empty() {
            return Err(Error::invalid("at least one worker is required"));
        }
        let seed = cfg.seed;
        let vmax = cfg.velocity_max_mps;
        let master = Node::new(seed, MASTER_INDEX, master_position, None, vmax);
        let workers = workers
            .into_iter()
            .map(|profile| {
                profile.validate()?;
                let idx = profile.id as u32;
                Ok(WorkerState {
                    node: Node::new(seed, idx, profile.position, Some(profile.velocity), vmax),
                    compute_rng: stream_rng(seed, Stream::Compute, idx),
                    signal_rng: stream_rng(seed, Stream::Signal, idx),
                    visible: profile.behavior.join_time() <= 0.0,
                    busy: false,
                    queue: VecDeque::new(),
                    profile,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SimEngine {
            cfg,
            queue: EventQueue::new(),
            master,
            workers,
            pieces: Vec::new(),
            log: Vec::new(),
            prestored: None,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn now(&self) -> f64 {
        self.queue.now()
    }

    pub fn worker_count(&self) -> usize {
        self.workers.len()
    }

    pub fn profile(&self, worker: usize) -> &WorkerProfile {
        &self.workers[worker].profile
    }

    /// Whether the master can currently reach `worker`: it has joined and not left.
    /// Silently failed workers still count as reachable.
    pub fn is_reachable(&self, worker: usize) -> bool {
        self.workers.get(worker).is_some_and(|w| w.visible)
    }

    pub fn reachable_workers(&self) -> Vec<usize> {
        (0..self.workers.len()).filter(|&w| self.workers[w].visible).collect()
    }

    pub fn pieces(&self) -> &[PieceRecord] {
        &self.pieces
    }

    pub fn event_log(&self) -> &[LoggedEvent] {
        &self.log
    }

    pub fn take_event_log(&mut self) -> Vec<LoggedEvent> {
        std::mem::take(&mut self.log)
    }

    pub fn master_position(&self) -> Vec2 {
        self.master.position
    }

    pub fn worker_position(&self, worker: usize) -> Vec2 {
        self.workers[worker].node.position
    }

    /// Master-to-worker distance at the latest tick, floored at [`MIN_SEPARATION_M`].
    pub fn distance(&self, worker: usize) -> f64 {
        self.master.position.distance(self.workers[worker].node.position).max(MIN_SEPARATION_M)
    }

    fn transfer_time(&mut self, worker: usize, numbers: usize) -> Result<f64> {
        let d = self.distance(worker);
        let comm = self.cfg.comm;
        let s = sample_signal_power_dbm(&mut self.workers[worker].signal_rng, d, &comm)?;
        comm_time(numbers, comm.bytes_per_number, rate_from_signal(s, &comm))
    }

    /// Sends `lhs * rhs` to `worker` now. The piece lands after the inbound
    /// transfer and joins the worker's FIFO queue.
    pub fn send(&mut self, worker: usize, tag: usize, lhs: Operand, rhs: Arc<RealVector>) -> Result<PieceId> {
        if !self.is_reachable(worker) {
            return Err(Error::invalid(format!("worker {worker} is not reachable")));
        }
        let numbers_in = rhs.len()
            + match &lhs {
                Operand::Prestored => 0,
                Operand::Sent(v) => v.len(),
            };
        let transfer_in = self.transfer_time(worker, numbers_in)?;
        let id = self.pieces.len();
        let now = self.now();
        self.pieces.push(PieceRecord {
            worker,
            tag,
            sent_at: now,
            numbers_in,
            transfer_in,
            compute_time: None,
            transfer_out: None,
            received_at: None,
            status: PieceStatus::InFlight,
            lhs,
            rhs: Some(rhs),
            result: None,
        });
        self.queue.schedule(now + transfer_in, EventKind::PieceArrives { worker, piece: id })?;
        Ok(id)
    }

    /// Arms a [`EventKind::DispatchDue`] timer for `worker` at `time` (clamped to now).
    pub fn wake_at(&mut self, worker: usize, time: f64) -> Result<()> {
        let t = time.max(self.now());
        self.queue.schedule(t, EventKind::DispatchDue { worker }).map(|_| ())
    }

    /// Runs `master` until it reports done, the horizon passes, or nothing
    /// but clock ticks remain.
    pub fn run(&mut self, master: &mut dyn Master) -> Result<RunEnd> {
        for w in 0..self.workers.len() {
            let b = self.workers[w].profile.behavior;
            let join = b.join_time();
            if join > 0.0 {
                self.queue.schedule(join, EventKind::WorkerJoins { worker: w })?;
            }
            if let crate::models::Behavior::LeavesAt(t) = b {
                self.queue.schedule(t, EventKind::WorkerLeaves { worker: w })?;
            }
        }
        self.queue.schedule(1.0, EventKind::ClockTick)?;
        master.start(self)?;
        let horizon = self.cfg.horizon;
        loop {
            if master.is_done() {
                return Ok(RunEnd { completed: true, time: self.now() });
            }
            if self.queue.only_ticks() {
                break;
            }
            match self.queue.peek_time() {
                Some(t) if t <= horizon => {}
                _ => break,
            }
            let ev = self.queue.next_event().expect("peeked");
            self.handle(ev, master)?;
        }
        let time = if horizon.is_finite() { horizon } else { self.now() };
        Ok(RunEnd { completed: false, time })
    }

    fn record(&mut self, ev: &SimEvent, payload_size: usize) {
        if self.cfg.record_events {
            let piece_row = ev.kind.piece().map(|p| self.pieces[p].tag);
            self.log.push(LoggedEvent {
                time: ev.time,
                seq: ev.seq,
                kind: ev.kind,
                piece_row,
                payload_size,
            });
        }
    }

    fn handle(&mut self, ev: SimEvent, master: &mut dyn Master) -> Result<()> {
        let now = ev.time;
        match ev.kind {
            EventKind::ClockTick => {
                self.record(&ev, 0);
                let vmax = self.cfg.velocity_max_mps;
                self.master.tick(vmax);
                for w in &mut self.workers {
                    w.node.tick(vmax);
                }
                self.queue.schedule(now + 1.0, EventKind::ClockTick)?;
            }
            EventKind::PieceArrives { worker, piece } => {
                self.record(&ev, self.pieces[piece].numbers_in);
                if self.workers[worker].stopped_by(now) {
                    self.drop_piece(piece);
                } else {
                    self.workers[worker].queue.push_back(piece);
                    if !self.workers[worker].busy {
                        self.start_next(worker)?;
                    }
                }
            }
            EventKind::ComputeDone { worker, piece } => {
                self.workers[worker].busy = false;
                if self.workers[worker].stopped_by(now) {
                    self.record(&ev, 0);
                    self.drop_piece(piece);
                    while let Some(p) = self.workers[worker].queue.pop_front() {
                        self.drop_piece(p);
                    }
                    return Ok(());
                }
                let rec = &mut self.pieces[piece];
                let rhs = rec.rhs.take().expect("piece operands present until computed");
                let lhs = std::mem::replace(&mut rec.lhs, Operand::Prestored);
                let a = self.resolve(&lhs)?;
                let result = convolve(&a, &rhs)?;
                self.record(&ev, result.len());
                let factor = self.workers[worker].profile.behavior.delay_factor();
                let out = self.transfer_time(worker, result.len())? * factor;
                let arrival = now + out;
                let rec = &mut self.pieces[piece];
                rec.transfer_out = Some(out);
                if self.workers[worker].profile.behavior.stop_time().is_some_and(|s| s < arrival) {
                    self.drop_piece(piece);
                } else {
                    self.pieces[piece].result = Some(result);
                    self.queue.schedule(arrival, EventKind::ResultArrives { worker, piece })?;
                }
                self.start_next(worker)?;
            }
            EventKind::ResultArrives { worker, piece } => {
                let rec = &mut self.pieces[piece];
                rec.status = PieceStatus::Delivered;
                rec.received_at = Some(now);
                let data = rec.result.take().expect("delivered piece has a result");
                let delivery = Delivery {
                    worker,
                    piece,
                    tag: rec.tag,
                    sent_at: rec.sent_at,
                    received_at: now,
                    rtt: rec.transfer_in + rec.transfer_out.unwrap_or(0.0),
                    data,
                };
                self.record(&ev, delivery.data.len());
                master.on_result(self, delivery)?;
            }
            EventKind::WorkerJoins { worker } => {
                self.record(&ev, 0);
                self.workers[worker].visible = true;
                master.on_join(self, worker)?;
            }
            EventKind::WorkerLeaves { worker } => {
                self.record(&ev, 0);
                self.workers[worker].visible = false;
                master.on_leave(self, worker)?;
            }
            EventKind::DispatchDue { worker } => {
                self.record(&ev, 0);
                master.on_dispatch_due(self, worker)?;
            }
        }
        Ok(())
    }

    fn drop_piece(&mut self, piece: PieceId) {
        let rec = &mut self.pieces[piece];
        rec.status = PieceStatus::Dropped;
        rec.rhs = None;
        rec.lhs = Operand::Prestored;
        rec.result = None;
    }

    fn start_next(&mut self, worker: usize) -> Result<()> {
        let Some(piece) = self.workers[worker].queue.pop_front() else {
            return Ok(());
        };
        let n1 = self.resolve(&self.pieces[piece].lhs)?.len();
        let n2 = self.pieces[piece].rhs.as_ref().map_or(0, |r| r.len());
        let load = compute_load(n1, n2, self.cfg.load_constant);
        let w = &mut self.workers[worker];
        let nominal = sample_compute_time(&mut w.compute_rng, w.profile.mu, w.profile.alpha, load);
        let dur = nominal * w.profile.behavior.delay_factor();
        w.busy = true;
        self.pieces[piece].compute_time = Some(dur);
        let now = self.now();
        self.queue.schedule(now + dur, EventKind::ComputeDone { worker, piece })?;
        Ok(())
    }

    /// Stores `a` at every worker; pieces sent with [`Operand::Prestored`] use it.
    pub fn set_prestored(&mut self, a: Arc<RealVector>) {
        self.prestored = Some(a);
    }

    fn resolve(&self, lhs: &Operand) -> Result<Arc<RealVector>> {
        match lhs {
            Operand::Sent(a) => Ok(Arc::clone(a)),
            Operand::Prestored => self
                .prestored
                .clone()
                .ok_or_else(|| Error::invalid("no vector is pre-stored at the workers")),
        }
    }
}
