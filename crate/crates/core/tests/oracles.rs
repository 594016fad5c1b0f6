//! Library results checked against independent reference computations.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use codeconv::coding::{convolve, convolve_direct, convolve_fft, encode_row, mds_decode, EncodingMatrix, RealVector};
use codeconv::engine::{Delivery, EngineConfig, Master, Operand, SimEngine};
use codeconv::models::{compute_load, data_rate, Behavior, Vec2, WorkerProfile};
use codeconv::strategies::{select_s, uncoded_piece_length};
use codeconv::Result;

/// Schoolbook product of two polynomials given by coefficient lists.
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

#[test]
fn small_product_matches_hand_expansion() {
    let want = [5.0, 16.0, 34.0, 60.0, 61.0, 52.0, 32.0];
    let a = [1.0, 2.0, 3.0, 4.0];
    let x = [5.0, 6.0, 7.0, 8.0];
    assert_eq!(convolve_direct(&a, &x).unwrap().as_slice(), &want);
    assert!(close(&convolve_fft(&a, &x).unwrap(), &want, 1e-12));
    assert!(close(&convolve(&a, &x).unwrap(), &want, 1e-12));
}

#[test]
fn convolution_matches_polynomial_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (n1, n2) in [(1, 1), (1, 9), (7, 3), (64, 64), (100, 37), (513, 1000)] {
        let a: Vec<f64> = (0..n1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..n2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let want = poly_mul(&a, &x);
        assert!(close(&convolve_direct(&a, &x).unwrap(), &want, 1e-12), "direct {n1}x{n2}");
        assert!(close(&convolve_fft(&a, &x).unwrap(), &want, 1e-10), "fft {n1}x{n2}");
        assert!(close(&convolve(&a, &x).unwrap(), &want, 1e-10), "auto {n1}x{n2}");
    }
}

/// Monomial coefficients of the interpolating polynomial through `(pts, vals)`,
/// via Newton divided differences.
fn interpolate(pts: &[f64], vals: &[f64]) -> Vec<f64> {
    let n = pts.len();
    let mut dd = vals.to_vec();
    for k in 1..n {
        for i in (k..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (pts[i] - pts[i - k]);
        }
    }
    let mut coeffs = vec![0.0; n];
    for k in (0..n).rev() {
        // coeffs = coeffs * (t - pts[k]) + dd[k]
        let mut next = vec![0.0; n];
        for i in 0..n {
            if i + 1 < n {
                next[i + 1] += coeffs[i];
            }
            next[i] -= coeffs[i] * pts[k];
        }
        next[0] += dd[k];
        coeffs = next;
    }
    coeffs
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (k - 1..n)
        .flat_map(|last| {
            combinations(last, k - 1).into_iter().map(move |mut c| {
                c.push(last);
                c
            })
        })
        .collect()
}

fn check_all_subsets(rows: usize, cols: usize) {
    let matrix = EncodingMatrix::chebyshev(rows, cols).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64((rows * 100 + cols) as u64);
    let len = 5;
    let pieces: Vec<Vec<f64>> = (0..cols).map(|_| (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let coded: Vec<RealVector> = (0..rows).map(|r| encode_row(&pieces, &matrix, r).unwrap()).collect();
    let subsets = combinations(rows, cols);
    for subset in &subsets {
        let picked: Vec<(usize, &RealVector)> = subset.iter().map(|&r| (r, &coded[r])).collect();
        let decoded = mds_decode(&picked, &matrix).unwrap();
        let pts: Vec<f64> = subset.iter().map(|&r| matrix.points()[r]).collect();
        for e in 0..len {
            let vals: Vec<f64> = subset.iter().map(|&r| coded[r][e]).collect();
            let oracle = interpolate(&pts, &vals);
            for j in 0..cols {
                assert!((decoded[j][e] - oracle[j]).abs() < 1e-8, "subset {subset:?} piece {j}");
                assert!((decoded[j][e] - pieces[j][e]).abs() < 1e-8, "subset {subset:?} piece {j}");
            }
        }
    }
    let expected = (0..cols).fold(1usize, |acc, i| acc * (rows - i) / (i + 1));
    assert_eq!(subsets.len(), expected);
}

#[test]
fn every_eight_of_twelve_decodes() {
    check_all_subsets(12, 8);
}

#[test]
fn every_six_of_nine_decodes() {
    check_all_subsets(9, 6);
}

#[test]
fn vandermonde_determinant_is_product_of_differences() {
    let m = EncodingMatrix::chebyshev(6, 6).unwrap();
    let pts = m.points();
    let mut a = m.to_dense();
    let mut det = 1.0;
    for c in 0..6 {
        let p = (c..6).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..6 {
            let f = a[r][c] / a[c][c];
            let pivot = a[c].clone();
            for (x, p) in a[r].iter_mut().zip(&pivot).skip(c) {
                *x -= f * p;
            }
        }
    }
    let mut want = 1.0;
    for i in 0..6 {
        for j in i + 1..6 {
            want *= pts[j] - pts[i];
        }
    }
    assert!((det - want).abs() <= 1e-10 * want.abs());
    assert!(want != 0.0);
}

/// The sub-vector objective written out term by term.
fn objective(s: usize, n1: usize, n2: usize, profiles: &[(f64, f64)], c: f64) -> f64 {
    let p = profiles.len() as f64;
    let s = s as f64;
    let mut total = 0.0;
    for &(mu, alpha) in profiles {
        let redundancy = p * s / n2 as f64 - n1 as f64 / s + 1.0;
        let work = 2.0 * c * s * (2.0 * s).ln() / std::f64::consts::LN_2;
        total += redundancy * mu.powf(alpha) / (p * work.powf(alpha));
    }
    -total
}

#[test]
fn select_s_is_the_exhaustive_argmax() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for &(n1, n2, p) in &[(512, 256, 8), (512, 256, 4), (2500, 3750, 8), (2500, 3750, 6), (300, 200, 5)] {
        for c in [1.0, 0.5] {
            let profiles: Vec<(f64, f64)> = (0..p)
                .map(|_| {
                    let mu = rng.random_range(3e6..6e6);
                    (mu, 1.0 / mu)
                })
                .collect();
            let lo = ((n1 * n2) as f64 / p as f64).sqrt().ceil() as usize;
            let hi = n1.min(n2);
            let mut best = lo;
            for s in lo..=hi {
                if objective(s, n1, n2, &profiles, c).abs() > objective(best, n1, n2, &profiles, c).abs() {
                    best = s;
                }
            }
            assert_eq!(select_s(n1, n2, p, &profiles, c).unwrap(), best, "{n1}x{n2} P={p}");
        }
    }
}

#[test]
fn uncoded_pieces_follow_square_root_rule() {
    assert_eq!(uncoded_piece_length(1024, 1024, 8), 362);
    assert_eq!(uncoded_piece_length(512, 256, 8), 128);
    assert_eq!(uncoded_piece_length(16, 16, 1), 16);
}

struct OneShot {
    rhs: Arc<RealVector>,
    lhs: Arc<RealVector>,
    got: Option<Delivery>,
}

impl Master for OneShot {
    fn start(&mut self, engine: &mut SimEngine) -> Result<()> {
        engine.send(0, 0, Operand::Sent(self.lhs.clone()), self.rhs.clone())?;
        Ok(())
    }
    fn on_result(&mut self, _engine: &mut SimEngine, delivery: Delivery) -> Result<()> {
        self.got = Some(delivery);
        Ok(())
    }
    fn is_done(&self) -> bool {
        self.got.is_some()
    }
}

#[test]
fn single_worker_timeline_recomputed_from_models() {
    let mu = 4e6;
    let worker = WorkerProfile {
        id: 0,
        position: Vec2::new(300.0, -400.0),
        velocity: Vec2::new(0.0, 0.0),
        mu,
        alpha: 1.0 / mu,
        behavior: Behavior::Normal,
    };
    let cfg = EngineConfig { velocity_max_mps: 0.0, record_events: true, seed: 5, ..Default::default() };
    let mut engine = SimEngine::new(cfg, Vec2::new(0.0, 0.0), vec![worker]).unwrap();
    let (n1, n2) = (300, 200);
    let lhs = Arc::new(RealVector::new((0..n1).map(|i| (i as f64).sin()).collect()).unwrap());
    let rhs = Arc::new(RealVector::new((0..n2).map(|i| (i as f64).cos()).collect()).unwrap());
    let mut master = OneShot { rhs: rhs.clone(), lhs: lhs.clone(), got: None };
    let end = engine.run(&mut master).unwrap();
    assert!(end.completed);
    let d = master.got.unwrap();

    let rate = data_rate(500.0, &EngineConfig::default().comm).unwrap();
    let t_in = (n1 + n2) as f64 * 8.0 * 8.0 / rate;
    let t_out = (n1 + n2 - 1) as f64 * 8.0 * 8.0 / rate;
    let rec = &engine.pieces()[0];
    assert!((rec.transfer_in - t_in).abs() < 1e-12);
    assert!((rec.transfer_out.unwrap() - t_out).abs() < 1e-12);
    let compute = rec.compute_time.unwrap();
    assert!(compute >= compute_load(n1, n2, 1.0) / mu);
    assert!((d.received_at - (t_in + compute + t_out)).abs() < 1e-12);
    assert!((d.rtt - (t_in + t_out)).abs() < 1e-12);
    assert!((end.time - d.received_at).abs() < 1e-12);
    assert!(close(&d.data, &poly_mul(&lhs, &rhs), 1e-10));

    let kinds: Vec<&str> = engine.event_log().iter().filter(|e| e.kind.worker().is_some()).map(|e| e.kind.name()).collect();
    assert_eq!(kinds, ["piece_arrives", "compute_done", "result_arrives"]);
    let times: Vec<f64> = engine.event_log().iter().filter(|e| e.kind.worker().is_some()).map(|e| e.time).collect();
    assert!((times[0] - t_in).abs() < 1e-12);
    assert!((times[1] - (t_in + compute)).abs() < 1e-12);
}
