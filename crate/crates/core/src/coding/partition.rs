use super::RealVector;
use crate::error::{Error, Result};

/// A vector split into equal-length pieces, the last one zero-padded.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pieces: Vec<RealVector>,
    piece_length: usize,
    original_length: usize,
    pad_count: usize,
}

impl Partition {
    pub fn pieces(&self) -> &[RealVector] {
        &self.pieces
    }

    pub fn piece_length(&self) -> usize {
        self.piece_length
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn pad_count(&self) -> usize {
        self.pad_count
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Concatenates the pieces and drops the padding.
    pub fn reassemble(&self) -> RealVector {
        let mut v: Vec<f64> = self.pieces.iter().flat_map(|p| p.iter().copied()).collect();
        v.truncate(self.original_length);
        RealVector::from_vec_unchecked(v)
    }
}

/// Splits `v` into `ceil(|v| / piece_length)` pieces of `piece_length` each.
pub fn partition(v: &[f64], piece_length: usize) -> Result<Partition> {
    if v.is_empty() {
        return Err(Error::invalid("cannot partition an empty vector"));
    }
    if piece_length == 0 || piece_length > v.len() {
        return Err(Error::invalid(format!(
            "piece length {piece_length} outside [1, {}]",
            v.len()
        )));
    }
    let count = v.len().div_ceil(piece_length);
    let pad_count = count * piece_length - v.len();
    let pieces = v
        .chunks(piece_length)
        .map(|c| {
            let mut p = c.to_vec();
            p.resize(piece_length, 0.0);
            RealVector::from_vec_unchecked(p)
        })
        .collect();
    Ok(Partition { pieces, piece_length, original_length: v.len(), pad_count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_split() {
        let p = partition(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(p.pieces()[0].as_slice(), &[1.0, 2.0]);
        assert_eq!(p.pieces()[1].as_slice(), &[3.0, 4.0]);
        assert_eq!(p.pad_count(), 0);
    }

    #[test]
    fn padded_split() {
        let p = partition(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(p.pieces()[1].as_slice(), &[3.0, 0.0]);
        assert_eq!(p.pad_count(), 1);
        assert_eq!(p.reassemble().as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn bad_piece_length() {
        assert!(matches!(partition(&[1.0, 2.0], 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(partition(&[1.0, 2.0], 3), Err(Error::InvalidArgument(_))));
    }
}
