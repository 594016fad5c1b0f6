//! Convolution, partitioning, overlap-add and real-valued MDS coding.

mod conv;
mod mds;
mod partition;
mod vector;

pub use conv::{convolve, convolve_direct, convolve_fft, overlap_add};
pub use mds::{
    encode_row, make_encoding_matrix, mds_decode, mds_encode, CodedPiece, EncodingMatrix,
    DECODE_GUARD_TOLERANCE,
};
pub use partition::{partition, Partition};
pub use vector::RealVector;
