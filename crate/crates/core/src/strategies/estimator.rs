//! Per-worker dispatch interval estimation from observed send/receive times.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WorkerTiming {
    /// Send time of the piece whose result arrived last.
    pub last_send: f64,
    /// Arrival time of the latest result.
    pub last_recv: f64,
    /// Arrival time of the result before that (0 before the second result).
    pub prev_recv: f64,
    /// Accumulated idle time.
    pub idle: f64,
    /// Results returned so far.
    pub results: u64,
    /// Transport round trip of the latest exchange.
    pub rtt: f64,
}

/// Master-side timing state used to pace dispatches to each worker.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchEstimator {
    /// Bytes of one dispatched piece.
    pub bytes_in: f64,
    /// Bytes of one returned result.
    pub bytes_out: f64,
    pub workers: Vec<WorkerTiming>,
}

impl DispatchEstimator {
    pub fn new(workers: usize, bytes_in: f64, bytes_out: f64) -> Result<Self> {
        if !(bytes_in > 0.0 && bytes_out > 0.0) {
            return Err(Error::invalid("piece and result sizes must be positive"));
        }
        Ok(DispatchEstimator { bytes_in, bytes_out, workers: vec![WorkerTiming::default(); workers] })
    }

    /// Records a result from `worker` for the piece sent at `sent_at`.
    ///
    /// The idle time grows by `max(0, rtt - t_prev_recv - sent_at)`, taken
    /// literally with absolute master-clock times, so in practice it only
    /// grows when the first piece goes out near time zero.
    pub fn record_result(&mut self, worker: usize, sent_at: f64, received_at: f64, rtt: f64) -> Result<()> {
        let w = self
            .workers
            .get_mut(worker)
            .ok_or_else(|| Error::invalid(format!("unknown worker {worker}")))?;
        if !(received_at >= sent_at) || !(rtt > 0.0) {
            return Err(Error::invalid("result must arrive after its send and rtt must be positive"));
        }
        w.prev_recv = w.last_recv;
        w.idle += (rtt - w.prev_recv - sent_at).max(0.0);
        w.last_send = sent_at;
        w.last_recv = received_at;
        w.rtt = rtt;
        w.results += 1;
        Ok(())
    }

    /// Estimated time at which `worker` finished computing its latest piece:
    /// the arrival time minus the result's share of the round trip.
    pub fn finish_time(&self, worker: usize) -> f64 {
        let w = &self.workers[worker];
        w.last_recv - self.bytes_out / (self.bytes_out + self.bytes_in) * w.rtt
    }

    /// Estimated mean compute time per piece: busy time over result count.
    pub fn expected_compute_time(&self, worker: usize) -> Result<f64> {
        let w = self.workers.get(worker).ok_or_else(|| Error::invalid(format!("unknown worker {worker}")))?;
        if w.results == 0 {
            return Err(Error::NotReady(worker));
        }
        Ok((self.finish_time(worker) - w.idle) / w.results as f64)
    }
}

/// Interval to wait between consecutive sends to `worker`: the smaller of the
/// last observed service time and the expected compute time. A non-positive
/// compute estimate falls back to the service time.
pub fn estimate_dispatch_interval(est: &DispatchEstimator, worker: usize) -> Result<f64> {
    let expected = est.expected_compute_time(worker)?;
    let w = &est.workers[worker];
    let service = w.last_recv - w.last_send;
    Ok(if expected > 0.0 { service.min(expected) } else { service })
}
