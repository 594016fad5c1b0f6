use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use crate::error::{Error, Result};

/// Index into the engine's table of dispatched pieces.
pub type PieceId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    PieceArrives { worker: usize, piece: PieceId },
    ComputeDone { worker: usize, piece: PieceId },
    ResultArrives { worker: usize, piece: PieceId },
    WorkerJoins { worker: usize },
    WorkerLeaves { worker: usize },
    /// Master-side timer for the next dispatch to `worker`.
    DispatchDue { worker: usize },
    ClockTick,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::PieceArrives { .. } => "piece_arrives",
            EventKind::ComputeDone { .. } => "compute_done",
            EventKind::ResultArrives { .. } => "result_arrives",
            EventKind::WorkerJoins { .. } => "worker_joins",
            EventKind::WorkerLeaves { .. } => "worker_leaves",
            EventKind::DispatchDue { .. } => "dispatch_due",
            EventKind::ClockTick => "clock_tick",
        }
    }

    pub fn worker(&self) -> Option<usize> {
        match *self {
            EventKind::PieceArrives { worker, .. }
            | EventKind::ComputeDone { worker, .. }
            | EventKind::ResultArrives { worker, .. }
            | EventKind::WorkerJoins { worker }
            | EventKind::WorkerLeaves { worker }
            | EventKind::DispatchDue { worker } => Some(worker),
            EventKind::ClockTick => None,
        }
    }

    pub fn piece(&self) -> Option<PieceId> {
        match *self {
            EventKind::PieceArrives { piece, .. }
            | EventKind::ComputeDone { piece, .. }
            | EventKind::ResultArrives { piece, .. } => Some(piece),
            _ => None,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

// Min-heap order on (time, seq).
impl Eq for SimEvent {}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Pending events ordered by `(time, seq)` plus the simulation clock.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<SimEvent>,
    next_seq: u64,
    clock: f64,
    /// Pending events other than clock ticks.
    active: usize,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> f64 {
        self.clock
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) -> Result<u64> {
        if time.is_nan() || time < self.clock {
            return Err(Error::invalid(format!(
                "cannot schedule {kind} at {time} before clock {}",
                self.clock
            )));
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        if kind != EventKind::ClockTick {
            self.active += 1;
        }
        self.heap.push(SimEvent { time, seq, kind });
        Ok(seq)
    }

    /// Pops the earliest event and advances the clock to it. `None` ends the episode.
    pub fn next_event(&mut self) -> Option<SimEvent> {
        let ev = self.heap.pop()?;
        if ev.kind != EventKind::ClockTick {
            self.active -= 1;
        }
        self.clock = ev.time;
        Some(ev)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    /// True when nothing but clock ticks remains.
    pub fn only_ticks(&self) -> bool {
        self.active == 0
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }
}
