//! The pyramid against an explicitly assembled orthogonal matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavereg::wavelet::{dwt_periodic, idwt_periodic, WaveletFilter};

type Matrix = Vec<Vec<f64>>;

/// One analysis step on length `m` as an `m × m` matrix: low-pass rows on
/// top, high-pass rows below.
fn step_matrix(filter: &WaveletFilter, m: usize) -> Matrix {
    let mut a = vec![vec![0.0; m]; m];
    for i in 0..m / 2 {
        for (k, (h, g)) in filter.lowpass().iter().zip(filter.highpass()).enumerate() {
            a[i][(2 * i + k) % m] += h;
            a[m / 2 + i][(2 * i + k) % m] += g;
        }
    }
    a
}

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect()
}

fn mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = b[0].len();
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).map(|(x, r)| x * r[j]).sum())
                .collect()
        })
        .collect()
}

/// Full transform to `coarse`: the step on the leading `2^j` block, for
/// `j = J..coarse+1`, composed left to right.
fn transform_matrix(filter: &WaveletFilter, n: usize, coarse: usize) -> Matrix {
    let mut w = identity(n);
    let mut m = n;
    while m > 1 << coarse {
        let mut s = identity(n);
        let block = step_matrix(filter, m);
        for i in 0..m {
            s[i][..m].copy_from_slice(&block[i]);
        }
        w = mul(&s, &w);
        m /= 2;
    }
    w
}

/// Coefficients in the matrix ordering: approx, then details coarse to fine.
fn flatten(p: &wavereg::wavelet::CoefficientPyramid) -> Vec<f64> {
    let mut out = p.approx().to_vec();
    for (_, d) in p.details() {
        out.extend_from_slice(d);
    }
    out
}

#[test]
fn db8_pyramid_equals_orthogonal_matrix() {
    let filter = WaveletFilter::daubechies(8).unwrap();
    let w = transform_matrix(&filter, 64, 2);
    // Orthogonality of the assembled matrix.
    for i in 0..64 {
        for j in 0..64 {
            let dot: f64 = w[i].iter().zip(&w[j]).map(|(a, b)| a * b).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((dot - expected).abs() < 1e-10, "W Wᵀ[{i}][{j}] = {dot}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let x: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
        let via_matrix: Vec<f64> = w
            .iter()
            .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();
        let via_pyramid = flatten(&dwt_periodic(&x, &filter, 2).unwrap());
        for (a, b) in via_matrix.iter().zip(&via_pyramid) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn reconstruction_and_energy_for_all_tested_orders() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for order in [1, 2, 4, 8] {
        let filter = WaveletFilter::daubechies(order).unwrap();
        for n in [64usize, 1024] {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for coarse in [0, 3] {
                let p = dwt_periodic(&x, &filter, coarse).unwrap();
                let energy: f64 = x.iter().map(|v| v * v).sum();
                assert!((p.energy() - energy).abs() / energy < 1e-10);
                let y = idwt_periodic(&p, &filter).unwrap();
                let err = x
                    .iter()
                    .zip(&y)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-10, "N={order}, n={n}: {err}");
            }
        }
    }
}
