use std::sync::Arc;

use super::{assemble_blocks, decode_flops, StrategyOutcome, StrategyParams, TaskSpec};
use crate::coding::{mds_decode, mds_encode, partition, EncodingMatrix, RealVector};
use crate::engine::{Delivery, Master, Operand, SimEngine};
use crate::error::{Error, Result};

/// Selection objective for the sub-vector length `s`:
///
/// `-sum_j (P s / N2 - N1 / s + 1) mu_j^alpha_j / (P ((2 C s) log2(2 s))^alpha_j)`.
pub fn epsilon(s: usize, n1: usize, n2: usize, profiles: &[(f64, f64)], c: f64) -> f64 {
    let p = profiles.len() as f64;
    let s = s as f64;
    let lead = p * s / n2 as f64 - n1 as f64 / s + 1.0;
    let base = 2.0 * c * s * (2.0 * s).log2();
    -profiles
        .iter()
        .map(|&(mu, alpha)| lead * mu.powf(alpha) / (p * base.powf(alpha)))
        .sum::<f64>()
}

/// Integer `s` in `[ceil(sqrt(N1 N2 / P)), min(N1, N2)]` maximising `|epsilon(s)|`,
/// smallest on ties. `profiles` holds `(mu_j, alpha_j)` for each of the `P` workers.
pub fn select_s(n1: usize, n2: usize, p: usize, profiles: &[(f64, f64)], c: f64) -> Result<usize> {
    if p == 0 || profiles.len() != p {
        return Err(Error::invalid(format!("expected {p} worker profiles, got {}", profiles.len())));
    }
    if n1 == 0 || n2 == 0 || !(c > 0.0) {
        return Err(Error::invalid("lengths and load constant must be positive"));
    }
    let lo = ((n1 as f64) * (n2 as f64) / p as f64).sqrt().ceil() as usize;
    let lo = lo.max(1);
    let hi = n1.min(n2);
    if lo > hi {
        return Err(Error::invalid(format!("empty range for s: [{lo}, {hi}]")));
    }
    let mut best = lo;
    let mut best_val = epsilon(lo, n1, n2, profiles, c).abs();
    for s in lo + 1..=hi {
        let v = epsilon(s, n1, n2, profiles, c).abs();
        if v > best_val {
            best = s;
            best_val = v;
        }
    }
    Ok(best)
}

/// How the traditional strategy lays work out for a given `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraditionalLayout {
    pub s: usize,
    /// Source pieces of `a`; also the results each column needs.
    pub a_pieces: usize,
    /// Pieces of `x`, one column each.
    pub x_pieces: usize,
    /// Coded pieces of `a` per column, `floor(P / x_pieces)`.
    pub coded_per_column: usize,
}

impl TraditionalLayout {
    pub fn workers_used(&self) -> usize {
        self.coded_per_column * self.x_pieces
    }

    /// Failures the layout always survives: `P - N1 N2 / s^2` when everything divides evenly.
    pub fn guaranteed_tolerance(&self) -> usize {
        self.coded_per_column - self.a_pieces
    }
}

pub fn traditional_layout(n1: usize, n2: usize, p: usize, s: usize) -> Result<TraditionalLayout> {
    if s == 0 || s > n1.min(n2) {
        return Err(Error::invalid(format!("s = {s} outside [1, {}]", n1.min(n2))));
    }
    let a_pieces = n1.div_ceil(s);
    let x_pieces = n2.div_ceil(s);
    let coded_per_column = p / x_pieces;
    if coded_per_column < a_pieces {
        return Err(Error::invalid(format!(
            "s = {s} needs {} workers per column over {x_pieces} columns, only {p} available",
            a_pieces
        )));
    }
    Ok(TraditionalLayout { s, a_pieces, x_pieces, coded_per_column })
}

struct CodedMaster {
    layout: TraditionalLayout,
    matrix: EncodingMatrix,
    coded_a: Vec<Arc<RealVector>>,
    x_pieces: Vec<Arc<RealVector>>,
    columns: Vec<Vec<(usize, RealVector)>>,
    decoded: Vec<Option<Vec<RealVector>>>,
    done_columns: usize,
    per_worker: Vec<usize>,
    dispatched: usize,
    flops: f64,
}

impl Master for CodedMaster {
    fn start(&mut self, engine: &mut SimEngine) -> Result<()> {
        let workers = engine.reachable_workers();
        if workers.is_empty() {
            return Ok(());
        }
        let rows = self.layout.coded_per_column;
        for q in 0..self.layout.workers_used() {
            let (j, r) = (q / rows, q % rows);
            let w = workers[q % workers.len()];
            engine.send(w, q, Operand::Sent(Arc::clone(&self.coded_a[r])), Arc::clone(&self.x_pieces[j]))?;
            self.dispatched += 1;
        }
        Ok(())
    }

    fn on_result(&mut self, _engine: &mut SimEngine, d: Delivery) -> Result<()> {
        self.per_worker[d.worker] += 1;
        let rows = self.layout.coded_per_column;
        let (j, r) = (d.tag / rows, d.tag % rows);
        if self.decoded[j].is_some() {
            return Ok(());
        }
        self.columns[j].push((r, d.data));
        if self.columns[j].len() < self.layout.a_pieces {
            return Ok(());
        }
        match mds_decode(&self.columns[j], &self.matrix) {
            Ok(blocks) => {
                self.flops += decode_flops(self.layout.a_pieces, blocks[0].len());
                self.decoded[j] = Some(blocks);
                self.columns[j].clear();
                self.done_columns += 1;
                Ok(())
            }
            Err(Error::DecodeFailure(_)) => {
                // Retry with the next arrival in place of the oldest result.
                self.columns[j].remove(0);
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    fn is_done(&self) -> bool {
        self.done_columns == self.layout.x_pieces
    }
}

/// Encodes the `N1/s` pieces of `a` into `floor(P / (N2/s))` coded pieces per
/// column with a Vandermonde matrix, pairs each coded piece with one piece of
/// `x`, and decodes every column from the first `N1/s` results it receives.
pub fn run_traditional_coded(task: &TaskSpec, engine: &mut SimEngine) -> Result<StrategyOutcome> {
    let StrategyParams::Coded { s } = task.params else {
        return Err(Error::invalid("run_traditional_coded needs coded parameters"));
    };
    let (n1, n2) = (task.n1(), task.n2());
    let layout = traditional_layout(n1, n2, engine.worker_count(), s)?;
    let pa = partition(&task.a, s)?;
    let px = partition(&task.x, s)?;
    let matrix = EncodingMatrix::chebyshev(layout.coded_per_column, layout.a_pieces)?;
    let coded_a = (0..layout.coded_per_column)
        .map(|r| mds_encode(&pa, &matrix, r).map(|c| Arc::new(c.data)))
        .collect::<Result<Vec<_>>>()?;
    let mut master = CodedMaster {
        layout,
        matrix,
        coded_a,
        x_pieces: px.pieces().iter().cloned().map(Arc::new).collect(),
        columns: vec![Vec::new(); layout.x_pieces],
        decoded: vec![None; layout.x_pieces],
        done_columns: 0,
        per_worker: vec![0; engine.worker_count()],
        dispatched: 0,
        flops: 0.0,
    };
    let end = engine.run(&mut master)?;
    let (result, completion_time) = if end.completed {
        let (na, nx) = (layout.a_pieces, layout.x_pieces);
        let cols: Vec<Vec<RealVector>> = master.decoded.into_iter().map(|c| c.expect("decoded")).collect();
        let mut blocks = Vec::with_capacity(na * nx);
        for i in 0..na {
            for col in &cols {
                blocks.push(col[i].clone());
            }
        }
        let out = assemble_blocks(&blocks, na, nx, s, n1, n2)?;
        (Some(out), end.time + master.flops * engine.config().master_flop_time)
    } else {
        (None, end.time)
    };
    Ok(StrategyOutcome {
        success: end.completed,
        completion_time,
        result,
        pieces_dispatched: master.dispatched,
        redundancy_used: 0,
        per_worker_results: master.per_worker,
    })
}
