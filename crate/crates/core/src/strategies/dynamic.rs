use std::sync::Arc;

use super::estimator::{estimate_dispatch_interval, DispatchEstimator};
use super::{decode_flops, StrategyOutcome, StrategyParams, TaskSpec};
use crate::coding::{encode_row, mds_decode, overlap_add, partition, EncodingMatrix, Partition, RealVector};
use crate::engine::{Delivery, Master, Operand, SimEngine};
use crate::error::{Error, Result};

/// Minimum number of generator rows available to the dynamic strategy.
pub const DYNAMIC_ROW_BUDGET: usize = 4096;

struct DynamicMaster {
    parts: Partition,
    matrix: EncodingMatrix,
    /// Coded pieces waiting to be sent; the top is the last element.
    stack: Vec<(usize, Arc<RealVector>)>,
    next_row: usize,
    k: usize,
    received: Vec<(usize, RealVector)>,
    est: DispatchEstimator,
    /// Workers the master dispatches to.
    active: Vec<bool>,
    /// Whether a worker has returned a result yet.
    warmed: Vec<bool>,
    last_send: Vec<f64>,
    interval: Vec<Option<f64>>,
    timer: Vec<Option<f64>>,
    per_worker: Vec<usize>,
    dispatched: usize,
}

impl DynamicMaster {
    fn m(&self) -> usize {
        self.parts.len()
    }

    fn push_row(&mut self) -> Result<bool> {
        if self.next_row >= self.matrix.rows() {
            return Ok(false);
        }
        let piece = encode_row(self.parts.pieces(), &self.matrix, self.next_row)?;
        self.stack.push((self.next_row, Arc::new(piece)));
        self.next_row += 1;
        Ok(true)
    }

    fn send_next(&mut self, engine: &mut SimEngine, worker: usize) -> Result<()> {
        if self.stack.len() <= 1 && self.push_row()? {
            self.k += 1;
        }
        let Some((row, piece)) = self.stack.pop() else {
            return Ok(());
        };
        engine.send(worker, row, Operand::Prestored, piece)?;
        self.dispatched += 1;
        let now = engine.now();
        self.last_send[worker] = now;
        if let Some(t) = self.interval[worker] {
            self.arm(engine, worker, now + t)?;
        }
        Ok(())
    }

    fn arm(&mut self, engine: &mut SimEngine, worker: usize, at: f64) -> Result<()> {
        if self.timer[worker].is_some_and(|t| t <= at) {
            return Ok(());
        }
        let at = at.max(engine.now());
        self.timer[worker] = Some(at);
        engine.wake_at(worker, at)
    }
}

impl Master for DynamicMaster {
    fn start(&mut self, engine: &mut SimEngine) -> Result<()> {
        for w in engine.reachable_workers() {
            self.active[w] = true;
            self.send_next(engine, w)?;
        }
        Ok(())
    }

    fn on_result(&mut self, engine: &mut SimEngine, d: Delivery) -> Result<()> {
        self.per_worker[d.worker] += 1;
        if self.received.len() < self.m() {
            self.received.push((d.tag, d.data));
        }
        if self.is_done() {
            return Ok(());
        }
        self.est.record_result(d.worker, d.sent_at, d.received_at, d.rtt)?;
        let t = estimate_dispatch_interval(&self.est, d.worker)?;
        self.interval[d.worker] = Some(t);
        self.warmed[d.worker] = true;
        if !self.active[d.worker] {
            return Ok(());
        }
        let due = self.last_send[d.worker] + t;
        if due <= engine.now() {
            self.send_next(engine, d.worker)
        } else {
            self.timer[d.worker] = None;
            self.arm(engine, d.worker, due)
        }
    }

    fn on_dispatch_due(&mut self, engine: &mut SimEngine, worker: usize) -> Result<()> {
        if self.timer[worker] != Some(engine.now()) {
            return Ok(());
        }
        self.timer[worker] = None;
        if self.active[worker] && self.warmed[worker] {
            self.send_next(engine, worker)?;
        }
        Ok(())
    }

    fn on_join(&mut self, engine: &mut SimEngine, worker: usize) -> Result<()> {
        self.active[worker] = true;
        if !self.warmed[worker] {
            self.send_next(engine, worker)?;
        }
        Ok(())
    }

    fn on_leave(&mut self, _engine: &mut SimEngine, worker: usize) -> Result<()> {
        self.active[worker] = false;
        self.timer[worker] = None;
        Ok(())
    }

    fn is_done(&self) -> bool {
        self.received.len() >= self.m()
    }
}

/// Cuts `x` into `m = N2/b` pieces and hands out coded pieces from a stack
/// seeded with `m + 1` rows, adding one row whenever at most one is left.
/// Each worker gets one piece up front and further pieces paced by its
/// estimated dispatch interval. The first `m` results are decoded and
/// overlap-added with the pre-stored `a`.
pub fn run_dynamic(task: &TaskSpec, engine: &mut SimEngine) -> Result<StrategyOutcome> {
    let StrategyParams::Dynamic { b } = task.params else {
        return Err(Error::invalid("run_dynamic needs dynamic parameters"));
    };
    task.validate()?;
    let (n1, n2) = (task.n1(), task.n2());
    let parts = partition(&task.x, b)?;
    let m = parts.len();
    let matrix = EncodingMatrix::chebyshev(DYNAMIC_ROW_BUDGET.max(8 * m), m)?;
    let p = engine.worker_count();
    let u = engine.config().comm.bytes_per_number;
    let est = DispatchEstimator::new(p, b as f64 * u, (n1 + b - 1) as f64 * u)?;
    engine.set_prestored(Arc::new(task.a.clone()));
    let mut master = DynamicMaster {
        parts,
        matrix,
        stack: Vec::new(),
        next_row: 0,
        k: 1,
        received: Vec::new(),
        est,
        active: vec![false; p],
        warmed: vec![false; p],
        last_send: vec![0.0; p],
        interval: vec![None; p],
        timer: vec![None; p],
        per_worker: vec![0; p],
        dispatched: 0,
    };
    for _ in 0..m + master.k {
        master.push_row()?;
    }
    // Pop in row order.
    master.stack.reverse();
    let end = engine.run(&mut master)?;
    let (result, completion_time) = if end.completed {
        let blocks = mds_decode(&master.received, &master.matrix)?;
        let flops = decode_flops(m, n1 + b - 1);
        let out = overlap_add(&blocks, b, n1 + n2 - 1)?;
        (Some(out), end.time + flops * engine.config().master_flop_time)
    } else {
        (None, end.time)
    };
    Ok(StrategyOutcome {
        success: end.completed,
        completion_time,
        result,
        pieces_dispatched: master.dispatched,
        redundancy_used: master.k,
        per_worker_results: master.per_worker,
    })
}
