//! Distributed convolution strategies, each a [`Master`](crate::engine::Master)
//! policy over the simulation engine.

mod dynamic;
mod estimator;
mod traditional;
mod uncoded;

use std::fmt;
use std::str::FromStr;

use crate::coding::{overlap_add, RealVector};
use crate::engine::SimEngine;
use crate::error::{Error, Result};

pub use dynamic::{run_dynamic, DYNAMIC_ROW_BUDGET};
pub use estimator::{estimate_dispatch_interval, DispatchEstimator, WorkerTiming};
pub use traditional::{epsilon, run_traditional_coded, select_s, traditional_layout, TraditionalLayout};
pub use uncoded::{run_uncoded, uncoded_piece_length};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Uncoded,
    Coded,
    Dynamic,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::Uncoded, StrategyKind::Coded, StrategyKind::Dynamic];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Uncoded => "uncoded",
            StrategyKind::Coded => "coded",
            StrategyKind::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncoded" => Ok(StrategyKind::Uncoded),
            "coded" | "traditional" => Ok(StrategyKind::Coded),
            "dynamic" => Ok(StrategyKind::Dynamic),
            other => Err(Error::invalid(format!(
                "unknown strategy '{other}' (expected uncoded, coded or dynamic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyParams {
    Uncoded,
    /// Traditional MDS coding with sub-vector length `s`.
    Coded { s: usize },
    /// Dynamic coding with `x` piece length `b`.
    Dynamic { b: usize },
}

impl StrategyParams {
    pub fn kind(&self) -> StrategyKind {
        match self {
            StrategyParams::Uncoded => StrategyKind::Uncoded,
            StrategyParams::Coded { .. } => StrategyKind::Coded,
            StrategyParams::Dynamic { .. } => StrategyKind::Dynamic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub a: RealVector,
    pub x: RealVector,
    pub params: StrategyParams,
}

impl TaskSpec {
    pub fn new(a: RealVector, x: RealVector, params: StrategyParams) -> Result<Self> {
        let t = TaskSpec { a, x, params };
        t.validate()?;
        Ok(t)
    }

    pub fn n1(&self) -> usize {
        self.a.len()
    }

    pub fn n2(&self) -> usize {
        self.x.len()
    }

    pub fn output_len(&self) -> usize {
        self.n1() + self.n2() - 1
    }

    pub fn validate(&self) -> Result<()> {
        match self.params {
            StrategyParams::Uncoded => Ok(()),
            StrategyParams::Coded { s } if s == 0 || s > self.n1().min(self.n2()) => Err(Error::invalid(
                format!("s = {s} outside [1, {}]", self.n1().min(self.n2())),
            )),
            StrategyParams::Dynamic { b } if b == 0 || b > self.n2() => {
                Err(Error::invalid(format!("b = {b} outside [1, {}]", self.n2())))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyOutcome {
    pub success: bool,
    /// Simulated seconds until the result was assembled, or the cut-off time on failure.
    pub completion_time: f64,
    pub result: Option<RealVector>,
    pub pieces_dispatched: usize,
    /// Final redundancy counter of the dynamic strategy; 0 for the others.
    pub redundancy_used: usize,
    pub per_worker_results: Vec<usize>,
}

/// Runs the strategy selected by `task.params`.
pub fn run_strategy(task: &TaskSpec, engine: &mut SimEngine) -> Result<StrategyOutcome> {
    match task.params {
        StrategyParams::Uncoded => run_uncoded(task, engine),
        StrategyParams::Coded { .. } => run_traditional_coded(task, engine),
        StrategyParams::Dynamic { .. } => run_dynamic(task, engine),
    }
}

/// Rebuilds `a * x` from the block products `a_i * x_j` (row-major in `i`),
/// where `a` and `x` were cut into pieces of length `s`.
pub(crate) fn assemble_blocks(
    blocks: &[RealVector],
    na: usize,
    nx: usize,
    s: usize,
    n1: usize,
    n2: usize,
) -> Result<RealVector> {
    debug_assert_eq!(blocks.len(), na * nx);
    let rows = blocks
        .chunks(nx)
        .map(|row| overlap_add(row, s, s + n2 - 1))
        .collect::<Result<Vec<_>>>()?;
    overlap_add(&rows, s, n1 + n2 - 1)
}

/// Flops of an `m x m` dense solve with `width` right-hand-side columns.
pub(crate) fn decode_flops(m: usize, width: usize) -> f64 {
    let m = m as f64;
    2.0 / 3.0 * m * m * m + 2.0 * m * m * width as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::convolve_direct;

    #[test]
    fn block_assembly_matches_direct() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let x = [5.0, 6.0, 7.0];
        let s = 2;
        let pa = crate::coding::partition(&a, s).unwrap();
        let px = crate::coding::partition(&x, s).unwrap();
        let mut blocks = Vec::new();
        for ai in pa.pieces() {
            for xj in px.pieces() {
                blocks.push(convolve_direct(ai, xj).unwrap());
            }
        }
        let got = assemble_blocks(&blocks, pa.len(), px.len(), s, a.len(), x.len()).unwrap();
        assert_eq!(got, convolve_direct(&a, &x).unwrap());
    }

    #[test]
    fn strategy_names_round_trip() {
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("fastest".parse::<StrategyKind>().is_err());
    }
}
