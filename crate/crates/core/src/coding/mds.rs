//! Real-valued MDS coding with Vandermonde generator matrices.
//!
//! Row `i` of an [`EncodingMatrix`] is `[1, g_i, g_i^2, ..., g_i^(m-1)]`. With
//! pairwise distinct points every `m x m` row subset is invertible, so any `m`
//! coded pieces determine the `m` source pieces.
//!
//! The default points are the Chebyshev nodes `cos(pi (2i+1) / (2R))` for a
//! row budget `R`, enumerated in bit-reversed index order. A prefix of that
//! order is spread across `(-1, 1)` instead of clustering next to `1`, which
//! matters when rows are handed out incrementally and decoding uses whichever
//! `m` of the first few rows come back.
//!
//! Monomial Vandermonde systems over the reals are exponentially ill
//! conditioned in `m`; with these points decoding stays near `1e-8` relative
//! error up to roughly `m = 16`, degrades beyond that, and the elimination
//! reports a singular system by `m = 64`.

use std::collections::HashSet;
use std::f64::consts::PI;

use super::{Partition, RealVector};
use crate::error::{Error, Result};

/// Relative re-encoding mismatch above which a decode is rejected.
pub const DECODE_GUARD_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingMatrix {
    points: Vec<f64>,
    cols: usize,
}

/// One encoded input piece and the generator row that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedPiece {
    pub row_index: usize,
    pub data: RealVector,
}

impl EncodingMatrix {
    /// Vandermonde matrix on the bit-reversed Chebyshev nodes of `rows`.
    pub fn chebyshev(rows: usize, cols: usize) -> Result<Self> {
        if cols == 0 {
            return Err(Error::invalid("encoding matrix needs at least one column"));
        }
        if rows < cols {
            return Err(Error::invalid(format!("rows ({rows}) < cols ({cols})")));
        }
        let points = bit_reversed_order(rows)
            .into_iter()
            .map(|i| (PI * (2 * i + 1) as f64 / (2 * rows) as f64).cos())
            .collect();
        Ok(EncodingMatrix { points, cols })
    }

    /// Vandermonde matrix on caller-supplied evaluation points.
    pub fn from_points(points: Vec<f64>, cols: usize) -> Result<Self> {
        if cols == 0 {
            return Err(Error::invalid("encoding matrix needs at least one column"));
        }
        if points.len() < cols {
            return Err(Error::invalid(format!("rows ({}) < cols ({cols})", points.len())));
        }
        if points.iter().any(|g| !g.is_finite()) {
            return Err(Error::invalid("evaluation points must be finite"));
        }
        let mut seen = HashSet::with_capacity(points.len());
        if !points.iter().all(|g| seen.insert(g.to_bits())) {
            return Err(Error::invalid("evaluation points must be pairwise distinct"));
        }
        Ok(EncodingMatrix { points, cols })
    }

    pub fn rows(&self) -> usize {
        self.points.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.points[row].powi(col as i32)
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.entry(row, j)).collect()
    }

    /// Dense `rows x cols` copy of the matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| self.row(i)).collect()
    }
}

/// Indices `0..n` ordered by their bit-reversed value.
fn bit_reversed_order(n: usize) -> Vec<usize> {
    let bits = usize::BITS - n.saturating_sub(1).leading_zeros();
    let mut idx: Vec<usize> = (0..n).collect();
    if bits > 0 {
        idx.sort_by_key(|&i| i.reverse_bits() >> (usize::BITS - bits));
    }
    idx
}

pub fn make_encoding_matrix(rows: usize, cols: usize) -> Result<EncodingMatrix> {
    EncodingMatrix::chebyshev(rows, cols)
}

/// `sum_j V[row][j] * pieces[j]`, element-wise.
pub fn encode_row<P: AsRef<[f64]>>(
    pieces: &[P],
    matrix: &EncodingMatrix,
    row_index: usize,
) -> Result<RealVector> {
    if pieces.len() != matrix.cols() {
        return Err(Error::invalid(format!(
            "{} pieces for a matrix with {} columns",
            pieces.len(),
            matrix.cols()
        )));
    }
    if row_index >= matrix.rows() {
        return Err(Error::invalid(format!(
            "row {row_index} out of range for {} rows",
            matrix.rows()
        )));
    }
    let len = pieces[0].as_ref().len();
    if len == 0 || pieces.iter().any(|p| p.as_ref().len() != len) {
        return Err(Error::invalid("pieces must be non-empty and of equal length"));
    }
    let mut out = vec![0.0; len];
    let g = matrix.points[row_index];
    let mut coeff = 1.0;
    for p in pieces {
        for (o, &v) in out.iter_mut().zip(p.as_ref()) {
            *o += coeff * v;
        }
        coeff *= g;
    }
    RealVector::new(out)
}

pub fn mds_encode(p: &Partition, matrix: &EncodingMatrix, row_index: usize) -> Result<CodedPiece> {
    let data = encode_row(p.pieces(), matrix, row_index)?;
    Ok(CodedPiece { row_index, data })
}

/// Recovers the source pieces from exactly `matrix.cols()` coded results.
///
/// The square system is solved by LU with partial pivoting. Every supplied row
/// is then re-encoded from the solution; a relative mismatch above
/// [`DECODE_GUARD_TOLERANCE`] is reported as a decode failure.
pub fn mds_decode<P: AsRef<[f64]>>(
    results: &[(usize, P)],
    matrix: &EncodingMatrix,
) -> Result<Vec<RealVector>> {
    let m = matrix.cols();
    if results.len() < m {
        return Err(Error::InsufficientResults { needed: m, got: results.len() });
    }
    if results.len() > m {
        return Err(Error::invalid(format!("expected exactly {m} results, got {}", results.len())));
    }
    let mut seen = HashSet::with_capacity(m);
    for (row, _) in results {
        if *row >= matrix.rows() {
            return Err(Error::invalid(format!("row {row} out of range")));
        }
        if !seen.insert(*row) {
            return Err(Error::invalid(format!("duplicate row index {row}")));
        }
    }
    let len = results[0].1.as_ref().len();
    if len == 0 || results.iter().any(|(_, r)| r.as_ref().len() != len) {
        return Err(Error::invalid("results must be non-empty and of equal length"));
    }

    let mut lhs: Vec<Vec<f64>> = results.iter().map(|(row, _)| matrix.row(*row)).collect();
    let mut rhs: Vec<Vec<f64>> = results.iter().map(|(_, r)| r.as_ref().to_vec()).collect();
    solve_in_place(&mut lhs, &mut rhs)?;

    if rhs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DecodeFailure("non-finite values in solution".into()));
    }

    for (row, r) in results {
        let reenc = encode_row(&rhs, matrix, *row)?;
        let scale = r.as_ref().iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(f64::MIN_POSITIVE);
        let err = reenc
            .iter()
            .zip(r.as_ref())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        if err / scale > DECODE_GUARD_TOLERANCE {
            return Err(Error::DecodeFailure(format!(
                "re-encoding row {row} is off by {:.3e} relative",
                err / scale
            )));
        }
    }

    Ok(rhs.into_iter().map(RealVector::from_vec_unchecked).collect())
}

/// Gaussian elimination with partial pivoting on `lhs`, applying the same row
/// operations to every column of `rhs`. On return `rhs` holds the solution.
fn solve_in_place(lhs: &mut [Vec<f64>], rhs: &mut [Vec<f64>]) -> Result<()> {
    let m = lhs.len();
    let norm = lhs.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tiny = norm * f64::EPSILON * m as f64;

    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&a, &b| lhs[a][col].abs().total_cmp(&lhs[b][col].abs()))
            .expect("non-empty range");
        if lhs[pivot][col].abs() <= tiny {
            return Err(Error::DecodeFailure(format!("singular system at column {col}")));
        }
        lhs.swap(col, pivot);
        rhs.swap(col, pivot);

        let (top, bottom) = lhs.split_at_mut(col + 1);
        let (rtop, rbottom) = rhs.split_at_mut(col + 1);
        let prow = &top[col];
        let prhs = &rtop[col];
        for (row, rrow) in bottom.iter_mut().zip(rbottom.iter_mut()) {
            let f = row[col] / prow[col];
            if f == 0.0 {
                continue;
            }
            for k in col..m {
                row[k] -= f * prow[k];
            }
            for (v, p) in rrow.iter_mut().zip(prhs) {
                *v -= f * p;
            }
        }
    }

    for col in (0..m).rev() {
        let (head, solved) = rhs.split_at_mut(col + 1);
        let cur = &mut head[col];
        for (k, other) in solved.iter().enumerate() {
            let f = lhs[col][col + 1 + k];
            if f == 0.0 {
                continue;
            }
            for (v, o) in cur.iter_mut().zip(other) {
                *v -= f * o;
            }
        }
        let d = lhs[col][col];
        for v in cur.iter_mut() {
            *v /= d;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::partition;

    fn basis() -> Partition {
        partition(&[1.0, 0.0, 0.0, 1.0], 2).unwrap()
    }

    #[test]
    fn vandermonde_from_integer_points() {
        let v = EncodingMatrix::from_points(vec![1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(v.to_dense(), vec![vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 3.0]]);
    }

    #[test]
    fn degenerate_one_by_one() {
        let v = make_encoding_matrix(1, 1).unwrap();
        assert_eq!(v.to_dense(), vec![vec![1.0]]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(make_encoding_matrix(2, 3), Err(Error::InvalidArgument(_))));
        assert!(EncodingMatrix::from_points(vec![1.0, 1.0], 2).is_err());
    }

    #[test]
    fn chebyshev_points_distinct_and_spread() {
        let v = make_encoding_matrix(64, 4).unwrap();
        let mut pts = v.points().to_vec();
        pts.sort_by(f64::total_cmp);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        // the first four rows already cover both halves of (-1, 1)
        let head = &v.points()[..4];
        assert!(head.iter().any(|&g| g > 0.5) && head.iter().any(|&g| g < -0.5));
    }

    #[test]
    fn basis_pieces_reveal_rows() {
        let v = EncodingMatrix::from_points(vec![1.0, 2.0, 3.0], 2).unwrap();
        let coded: Vec<_> = (0..3).map(|i| mds_encode(&basis(), &v, i).unwrap()).collect();
        assert_eq!(coded[0].data.as_slice(), &[1.0, 1.0]);
        assert_eq!(coded[1].data.as_slice(), &[1.0, 2.0]);
        assert_eq!(coded[2].data.as_slice(), &[1.0, 3.0]);
        assert_eq!(coded[2].row_index, 2);
    }

    #[test]
    fn encode_dimension_mismatch() {
        let v = make_encoding_matrix(4, 3).unwrap();
        assert!(matches!(mds_encode(&basis(), &v, 0), Err(Error::InvalidArgument(_))));
        let v = make_encoding_matrix(4, 2).unwrap();
        assert!(mds_encode(&basis(), &v, 4).is_err());
    }

    #[test]
    fn decode_hand_solved_system() {
        // [[1,2],[1,3]] Y = [[1,2],[1,3]]  =>  Y = I
        let v = EncodingMatrix::from_points(vec![1.0, 2.0, 3.0], 2).unwrap();
        let results = vec![(1, vec![1.0, 2.0]), (2, vec![1.0, 3.0])];
        let y = mds_decode(&results, &v).unwrap();
        for (got, want) in y.iter().zip([[1.0, 0.0], [0.0, 1.0]]) {
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decode_error_paths() {
        let v = make_encoding_matrix(4, 2).unwrap();
        let dup = vec![(1, vec![1.0]), (1, vec![2.0])];
        assert!(matches!(mds_decode(&dup, &v), Err(Error::InvalidArgument(_))));
        let short = vec![(0, vec![1.0])];
        assert_eq!(
            mds_decode(&short, &v),
            Err(Error::InsufficientResults { needed: 2, got: 1 })
        );
        let ragged = vec![(0, vec![1.0]), (1, vec![1.0, 2.0])];
        assert!(matches!(mds_decode(&ragged, &v), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn decode_rejects_singular_system() {
        // Adjacent doubles: distinct points, numerically singular system.
        let v = EncodingMatrix::from_points(vec![1.0, 1.0 + f64::EPSILON, 5.0], 2).unwrap();
        let results = vec![(0, vec![1.0, 2.0]), (1, vec![3.0, 4.0])];
        assert!(matches!(mds_decode(&results, &v), Err(Error::DecodeFailure(_))));
    }

    #[test]
    fn bit_reversed_order_is_a_permutation() {
        for n in [1usize, 2, 3, 5, 8, 24, 100] {
            let mut o = bit_reversed_order(n);
            o.sort_unstable();
            assert_eq!(o, (0..n).collect::<Vec<_>>());
        }
        assert_eq!(bit_reversed_order(8), vec![0, 4, 2, 6, 1, 5, 3, 7]);
    }
}
