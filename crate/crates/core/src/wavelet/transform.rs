//! Periodized Mallat pyramid.
//!
//! One analysis step maps a signal of length `m` to `m/2` approximation and
//! `m/2` detail coefficients:
//!
//! ```text
//! a[i] = Σₖ hₖ · s[(2i + k) mod m]
//! d[i] = Σₖ gₖ · s[(2i + k) mod m]
//! ```
//!
//! The same indexing is used by the synthesis step, which is its transpose.

use serde::{Deserialize, Serialize};

use super::filter::WaveletFilter;
use crate::error::{log2_exact, Error, Result};

/// Scaling coefficients at `coarse_level` plus detail coefficients for every
/// level `coarse_level..finest_level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPyramid {
    coarse_level: usize,
    approx: Vec<f64>,
    details: Vec<Vec<f64>>,
}

impl CoefficientPyramid {
    /// `details[i]` holds level `coarse_level + i` and must have `2^(coarse_level + i)` entries.
    pub fn new(coarse_level: usize, approx: Vec<f64>, details: Vec<Vec<f64>>) -> Result<Self> {
        if approx.len() != 1 << coarse_level {
            return Err(Error::Shape(format!(
                "approximation at level {coarse_level} has {} entries, expected {}",
                approx.len(),
                1usize << coarse_level
            )));
        }
        for (i, d) in details.iter().enumerate() {
            let level = coarse_level + i;
            if d.len() != 1 << level {
                return Err(Error::Shape(format!(
                    "detail level {level} has {} entries, expected {}",
                    d.len(),
                    1usize << level
                )));
            }
        }
        Ok(Self {
            coarse_level,
            approx,
            details,
        })
    }

    /// A pyramid of zeros for a signal of length `2^finest_level`.
    pub fn zeros(coarse_level: usize, finest_level: usize) -> Result<Self> {
        if coarse_level > finest_level {
            return Err(Error::Shape(format!(
                "coarse level {coarse_level} exceeds finest level {finest_level}"
            )));
        }
        let details = (coarse_level..finest_level)
            .map(|j| vec![0.0; 1 << j])
            .collect();
        Self::new(coarse_level, vec![0.0; 1 << coarse_level], details)
    }

    pub fn coarse_level(&self) -> usize {
        self.coarse_level
    }

    /// `J` such that the reconstructed signal has `2^J` samples.
    pub fn finest_level(&self) -> usize {
        self.coarse_level + self.details.len()
    }

    pub fn approx(&self) -> &[f64] {
        &self.approx
    }

    pub fn approx_mut(&mut self) -> &mut [f64] {
        &mut self.approx
    }

    /// Detail coefficients at absolute level `level`.
    pub fn detail(&self, level: usize) -> Option<&[f64]> {
        level
            .checked_sub(self.coarse_level)
            .and_then(|i| self.details.get(i))
            .map(Vec::as_slice)
    }

    pub fn detail_mut(&mut self, level: usize) -> Option<&mut [f64]> {
        level
            .checked_sub(self.coarse_level)
            .and_then(|i| self.details.get_mut(i))
            .map(Vec::as_mut_slice)
    }

    /// Iterator over `(level, coefficients)` from coarse to fine.
    pub fn details(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.details
            .iter()
            .enumerate()
            .map(move |(i, d)| (self.coarse_level + i, d.as_slice()))
    }

    /// Total number of coefficients (equals the signal length).
    pub fn len(&self) -> usize {
        self.approx.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn energy(&self) -> f64 {
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        sq(&self.approx) + self.details.iter().map(|d| sq(d)).sum::<f64>()
    }
}

fn analysis_step(input: &[f64], filter: &WaveletFilter) -> (Vec<f64>, Vec<f64>) {
    let m = input.len();
    let half = m / 2;
    let (h, g) = (filter.lowpass(), filter.highpass());
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for i in 0..half {
        let (mut a, mut d) = (0.0, 0.0);
        for (k, (hk, gk)) in h.iter().zip(g).enumerate() {
            let s = input[(2 * i + k) % m];
            a += hk * s;
            d += gk * s;
        }
        approx[i] = a;
        detail[i] = d;
    }
    (approx, detail)
}

fn synthesis_step(approx: &[f64], detail: &[f64], filter: &WaveletFilter) -> Vec<f64> {
    let half = approx.len();
    let m = 2 * half;
    let (h, g) = (filter.lowpass(), filter.highpass());
    let mut out = vec![0.0; m];
    for i in 0..half {
        let (a, d) = (approx[i], detail[i]);
        for (k, (hk, gk)) in h.iter().zip(g).enumerate() {
            out[(2 * i + k) % m] += hk * a + gk * d;
        }
    }
    out
}

/// Forward periodized transform of a length-`2^J` signal down to `coarse_level`.
pub fn dwt_periodic(
    signal: &[f64],
    filter: &WaveletFilter,
    coarse_level: usize,
) -> Result<CoefficientPyramid> {
    let finest = log2_exact(signal.len())?;
    if coarse_level > finest {
        return Err(Error::Shape(format!(
            "coarse level {coarse_level} exceeds log2 of signal length ({finest})"
        )));
    }
    let mut current = signal.to_vec();
    let mut details = Vec::with_capacity(finest - coarse_level);
    for _ in coarse_level..finest {
        let (a, d) = analysis_step(&current, filter);
        details.push(d);
        current = a;
    }
    details.reverse();
    CoefficientPyramid::new(coarse_level, current, details)
}

/// Inverse of [`dwt_periodic`].
pub fn idwt_periodic(pyramid: &CoefficientPyramid, filter: &WaveletFilter) -> Result<Vec<f64>> {
    let mut current = pyramid.approx.clone();
    for (level, d) in pyramid.details() {
        if current.len() != d.len() || d.len() != 1 << level {
            return Err(Error::Shape(format!(
                "level {level}: approximation has {} entries, detail has {}",
                current.len(),
                d.len()
            )));
        }
        current = synthesis_step(&current, d, filter);
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn haar() -> WaveletFilter {
        WaveletFilter::haar()
    }

    #[test]
    fn haar_constant_signal() {
        let p = dwt_periodic(&[1.0; 4], &haar(), 0).unwrap();
        assert!((p.approx()[0] - 2.0).abs() < 1e-15);
        for (_, d) in p.details() {
            assert!(d.iter().all(|x| x.abs() < 1e-15));
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(
            dwt_periodic(&[0.0; 6], &haar(), 0),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            dwt_periodic(&[0.0; 8], &haar(), 4),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn zero_pyramid_gives_zero_signal() {
        let p = CoefficientPyramid::zeros(2, 6).unwrap();
        let f = WaveletFilter::daubechies(4).unwrap();
        assert!(idwt_periodic(&p, &f).unwrap().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn single_approx_coefficient_haar() {
        let mut p = CoefficientPyramid::zeros(0, 3).unwrap();
        p.approx_mut()[0] = 3.0;
        let x = idwt_periodic(&p, &haar()).unwrap();
        for v in x {
            assert!((v - 3.0 / 8f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn inconsistent_sizes_are_rejected() {
        assert!(CoefficientPyramid::new(1, vec![0.0; 2], vec![vec![0.0; 3]]).is_err());
        assert!(CoefficientPyramid::new(1, vec![0.0; 3], vec![]).is_err());
    }

    #[test]
    fn constant_input_has_no_details() {
        for n in [2, 4, 8] {
            let f = WaveletFilter::daubechies(n).unwrap();
            let p = dwt_periodic(&[0.7; 256], &f, 0).unwrap();
            for (_, d) in p.details() {
                assert!(d.iter().all(|x| x.abs() < 1e-12));
            }
        }
    }

    proptest! {
        #[test]
        fn perfect_reconstruction_and_parseval(
            order in prop::sample::select(vec![1usize, 2, 4, 8]),
            log_len in 1usize..=10,
            seed in any::<u64>(),
            coarse in 0usize..=10,
        ) {
            use rand::{Rng, SeedableRng};
            let coarse = coarse.min(log_len);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..1usize << log_len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = WaveletFilter::daubechies(order).unwrap();
            let p = dwt_periodic(&x, &f, coarse).unwrap();
            prop_assert_eq!(p.len(), x.len());
            let e_in: f64 = x.iter().map(|v| v * v).sum();
            prop_assert!((p.energy() - e_in).abs() <= 1e-10 * e_in.max(1e-300));
            let y = idwt_periodic(&p, &f).unwrap();
            let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err < 1e-10);
        }
    }
}
