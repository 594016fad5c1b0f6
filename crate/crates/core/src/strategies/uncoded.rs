use std::sync::Arc;

use super::{assemble_blocks, StrategyOutcome, StrategyParams, TaskSpec};
use crate::coding::{partition, RealVector};
use crate::engine::{Delivery, Master, Operand, SimEngine};
use crate::error::{Error, Result};

/// `round(sqrt(n1 n2 / p))`, clamped to `[1, min(n1, n2)]`.
pub fn uncoded_piece_length(n1: usize, n2: usize, p: usize) -> usize {
    let s = ((n1 as f64) * (n2 as f64) / p.max(1) as f64).sqrt().round() as usize;
    s.clamp(1, n1.min(n2))
}

struct UncodedMaster {
    a_pieces: Vec<Arc<RealVector>>,
    x_pieces: Vec<Arc<RealVector>>,
    results: Vec<Option<RealVector>>,
    received: usize,
    per_worker: Vec<usize>,
    dispatched: usize,
}

impl Master for UncodedMaster {
    fn start(&mut self, engine: &mut SimEngine) -> Result<()> {
        let workers = engine.reachable_workers();
        if workers.is_empty() {
            return Ok(());
        }
        let nx = self.x_pieces.len();
        for q in 0..self.results.len() {
            let (i, j) = (q / nx, q % nx);
            let w = workers[q % workers.len()];
            engine.send(w, q, Operand::Sent(Arc::clone(&self.a_pieces[i])), Arc::clone(&self.x_pieces[j]))?;
            self.dispatched += 1;
        }
        Ok(())
    }

    fn on_result(&mut self, _engine: &mut SimEngine, d: Delivery) -> Result<()> {
        self.per_worker[d.worker] += 1;
        let slot = &mut self.results[d.tag];
        if slot.is_none() {
            *slot = Some(d.data);
            self.received += 1;
        }
        Ok(())
    }

    fn is_done(&self) -> bool {
        self.received == self.results.len()
    }
}

/// Splits both operands into pieces of length `s = round(sqrt(N1 N2 / P))`,
/// sends every `(a_i, x_j)` pair to the workers reachable at the start
/// (round-robin), and succeeds only if every pair comes back.
pub fn run_uncoded(task: &TaskSpec, engine: &mut SimEngine) -> Result<StrategyOutcome> {
    if task.params != StrategyParams::Uncoded {
        return Err(Error::invalid("run_uncoded needs uncoded parameters"));
    }
    let (n1, n2) = (task.n1(), task.n2());
    let s = uncoded_piece_length(n1, n2, engine.worker_count());
    let pa = partition(&task.a, s)?;
    let px = partition(&task.x, s)?;
    let (na, nx) = (pa.len(), px.len());
    let mut master = UncodedMaster {
        a_pieces: pa.pieces().iter().cloned().map(Arc::new).collect(),
        x_pieces: px.pieces().iter().cloned().map(Arc::new).collect(),
        results: vec![None; na * nx],
        received: 0,
        per_worker: vec![0; engine.worker_count()],
        dispatched: 0,
    };
    let end = engine.run(&mut master)?;
    let result = if end.completed {
        let blocks: Vec<RealVector> = master.results.into_iter().map(|r| r.expect("all received")).collect();
        Some(assemble_blocks(&blocks, na, nx, s, n1, n2)?)
    } else {
        None
    };
    Ok(StrategyOutcome {
        success: end.completed,
        completion_time: end.time,
        result,
        pieces_dispatched: master.dispatched,
        redundancy_used: 0,
        per_worker_results: master.per_worker,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piece_length_rounding() {
        assert_eq!(uncoded_piece_length(4, 4, 4), 2);
        assert_eq!(uncoded_piece_length(512, 256, 8), 128);
        assert_eq!(uncoded_piece_length(1024, 1024, 8), 362);
        assert_eq!(uncoded_piece_length(3, 100, 1), 3);
        assert_eq!(uncoded_piece_length(1, 1, 8), 1);
    }
}
