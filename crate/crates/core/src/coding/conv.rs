//! Linear convolution (direct and FFT) and overlap-add reassembly.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::RealVector;
use crate::error::{Error, Result};

/// Products below this size are convolved directly in [`convolve`].
const DIRECT_THRESHOLD: usize = 4096;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Textbook O(n1·n2) linear convolution.
pub fn convolve_direct(a: &[f64], x: &[f64]) -> Result<RealVector> {
    if a.is_empty() || x.is_empty() {
        return Err(Error::invalid("convolution operands must be non-empty"));
    }
    let mut out = vec![0.0; a.len() + x.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &xj) in x.iter().enumerate() {
            out[i + j] += ai * xj;
        }
    }
    Ok(RealVector::from_vec_unchecked(out))
}

/// Linear convolution through a zero-padded complex FFT of power-of-two size.
pub fn convolve_fft(a: &[f64], x: &[f64]) -> Result<RealVector> {
    if a.is_empty() || x.is_empty() {
        return Err(Error::invalid("convolution operands must be non-empty"));
    }
    let out_len = a.len() + x.len() - 1;
    let n = out_len.next_power_of_two();

    let (fwd, inv) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    });

    // Pack a into the real part and x into the imaginary part: one forward
    // transform yields both spectra.
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (b, &v) in buf.iter_mut().zip(a) {
        b.re = v;
    }
    for (b, &v) in buf.iter_mut().zip(x) {
        b.im = v;
    }
    fwd.process(&mut buf);

    let mut prod = vec![Complex::new(0.0, 0.0); n];
    for k in 0..n {
        let z = buf[k];
        let zc = buf[(n - k) % n].conj();
        let fa = (z + zc) * 0.5;
        let fx = (z - zc) * Complex::new(0.0, -0.5);
        prod[k] = fa * fx;
    }
    inv.process(&mut prod);

    let scale = 1.0 / n as f64;
    let out = prod[..out_len].iter().map(|c| c.re * scale).collect();
    Ok(RealVector::from_vec_unchecked(out))
}

/// Convolves with whichever of the two routes is cheaper for the operand sizes.
pub fn convolve(a: &[f64], x: &[f64]) -> Result<RealVector> {
    if a.len().saturating_mul(x.len()) <= DIRECT_THRESHOLD {
        convolve_direct(a, x)
    } else {
        convolve_fft(a, x)
    }
}

/// Sums `partials[j]` shifted right by `j * shift`, into a vector of
/// `total_length` entries. Contributions past `total_length` are dropped; they
/// are the tails produced by zero padding.
pub fn overlap_add<V: AsRef<[f64]>>(
    partials: &[V],
    shift: usize,
    total_length: usize,
) -> Result<RealVector> {
    let first = partials
        .first()
        .ok_or_else(|| Error::invalid("overlap_add needs at least one partial"))?;
    let len = first.as_ref().len();
    if len == 0 {
        return Err(Error::invalid("partials must be non-empty"));
    }
    if partials.iter().any(|p| p.as_ref().len() != len) {
        return Err(Error::invalid("partials must have equal length"));
    }
    if shift == 0 {
        return Err(Error::invalid("shift must be at least 1"));
    }
    if total_length == 0 {
        return Err(Error::invalid("total_length must be at least 1"));
    }

    let mut out = vec![0.0; total_length];
    for (j, p) in partials.iter().enumerate() {
        let offset = j * shift;
        if offset >= total_length {
            break;
        }
        for (o, &v) in out[offset..].iter_mut().zip(p.as_ref()) {
            *o += v;
        }
    }
    Ok(RealVector::from_vec_unchecked(out))
}
