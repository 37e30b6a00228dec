//! Cascade evaluation of `φ` and `ψ` on a dyadic grid, and lookup of the
//! periodized basis functions `Φ_{j,k}`, `Ψ_{j,k}` on `[0, 1)`.

use serde::{Deserialize, Serialize};

use super::filter::WaveletFilter;
use crate::error::{Error, Result};

/// Default grid depth: values are tabulated at multiples of `2^-12`.
pub const DEFAULT_DEPTH: u32 = 12;

const POWER_ITERATIONS: usize = 500;
const EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    Phi,
    Psi,
}

/// `φ(i·2^-D)` and `ψ(i·2^-D)` for `i = 0..=(2N−1)·2^D`.
#[derive(Debug, Clone)]
pub struct ScalingTable {
    filter: WaveletFilter,
    depth: u32,
    phi: Vec<f64>,
    psi: Vec<f64>,
}

impl ScalingTable {
    pub fn filter(&self) -> &WaveletFilter {
        &self.filter
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Grid spacing `2^-D`.
    pub fn step(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    pub fn values_phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn values_psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn grid_x(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    /// Nearest-grid-point lookup; zero outside the support.
    pub fn value(&self, kind: BasisKind, t: f64) -> f64 {
        let support = self.filter.support_len() as f64;
        if !(0.0..=support).contains(&t) {
            return 0.0;
        }
        let idx = (t * (1u64 << self.depth) as f64).round() as usize;
        let values = match kind {
            BasisKind::Phi => &self.phi,
            BasisKind::Psi => &self.psi,
        };
        values.get(idx).copied().unwrap_or(0.0)
    }
}

/// Values of `φ` at the integers `0..=L`, from the eigenvector with
/// eigenvalue 1 of the refinement matrix `M[m][l] = √2·h_{2m−l}`.
fn integer_values(filter: &WaveletFilter) -> Result<Vec<f64>> {
    let h = filter.lowpass();
    let support = filter.support_len();
    if support == 1 {
        // Haar: φ = 𝟙[0,1), right-continuous at the integers.
        return Ok(vec![1.0, 0.0]);
    }
    // φ vanishes at both ends of its support; iterate on the interior points.
    let interior = support - 1;
    let tap = |i: isize| -> f64 {
        if i >= 0 && (i as usize) < h.len() {
            std::f64::consts::SQRT_2 * h[i as usize]
        } else {
            0.0
        }
    };
    let apply = |v: &[f64]| -> Vec<f64> {
        (1..=interior)
            .map(|m| {
                (1..=interior)
                    .map(|l| tap(2 * m as isize - l as isize) * v[l - 1])
                    .sum()
            })
            .collect()
    };
    let mut v = vec![1.0 / interior as f64; interior];
    for _ in 0..POWER_ITERATIONS {
        let next = apply(&v);
        let sum: f64 = next.iter().sum();
        if !sum.is_finite() || sum.abs() < f64::MIN_POSITIVE {
            return Err(Error::FilterInvalid(
                "refinement iteration collapsed; no eigenvalue 1".into(),
            ));
        }
        v = next.into_iter().map(|x| x / sum).collect();
    }
    let residual = apply(&v)
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > EIGEN_TOL {
        return Err(Error::FilterInvalid(format!(
            "refinement matrix has no eigenvalue 1 (residual {residual:e})"
        )));
    }
    let mut out = Vec::with_capacity(support + 1);
    out.push(0.0);
    out.extend(v);
    out.push(0.0);
    Ok(out)
}

/// Tabulates `φ` and `ψ` at resolution `2^-depth` by the cascade algorithm.
pub fn cascade_scaling_table(filter: &WaveletFilter, depth: u32) -> Result<ScalingTable> {
    if depth == 0 || depth > 20 {
        return Err(Error::Config(format!(
            "cascade depth {depth} outside 1..=20"
        )));
    }
    let h = filter.lowpass();
    let g = filter.highpass();
    let support = filter.support_len();
    let s2 = std::f64::consts::SQRT_2;

    let mut phi = integer_values(filter)?;
    for d in 1..=depth {
        let half = 1usize << (d - 1);
        let size = support * (1 << d) + 1;
        let prev = &phi;
        let next: Vec<f64> = (0..size)
            .map(|i| {
                h.iter()
                    .enumerate()
                    .filter_map(|(k, hk)| {
                        let idx = i.checked_sub(k * half)?;
                        prev.get(idx).map(|p| hk * p)
                    })
                    .sum::<f64>()
                    * s2
            })
            .collect();
        phi = next;
    }

    // ψ(x) = √2 Σ gₖ φ(2x − k): at x = i·2^-D the argument sits at index 2i − k·2^D.
    let scale = 1usize << depth;
    let psi = (0..phi.len())
        .map(|i| {
            g.iter()
                .enumerate()
                .filter_map(|(k, gk)| {
                    let idx = (2 * i).checked_sub(k * scale)?;
                    phi.get(idx).map(|p| gk * p)
                })
                .sum::<f64>()
                * s2
        })
        .collect();

    Ok(ScalingTable {
        filter: filter.clone(),
        depth,
        phi,
        psi,
    })
}

/// `2^{j/2} Σ_m f(2^j (x + m) − k)` for `f ∈ {φ, ψ}`.
pub fn eval_basis_periodized(
    table: &ScalingTable,
    kind: BasisKind,
    level: usize,
    shift: usize,
    x: f64,
) -> Result<f64> {
    let bound = 1usize << level;
    if shift >= bound {
        return Err(Error::Index {
            level,
            index: shift,
            bound,
        });
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(x));
    }
    Ok(periodized_unchecked(table, kind, level, shift, x))
}

pub(crate) fn periodized_unchecked(
    table: &ScalingTable,
    kind: BasisKind,
    level: usize,
    shift: usize,
    x: f64,
) -> f64 {
    let period = (1u64 << level) as f64;
    let support = table.filter.support_len() as f64;
    let mut t = (period * x - shift as f64).rem_euclid(period);
    let mut acc = 0.0;
    while t <= support {
        acc += table.value(kind, t);
        t += period;
    }
    acc * period.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_phi_is_indicator() {
        let t = cascade_scaling_table(&WaveletFilter::haar(), 4).unwrap();
        let phi = t.values_phi();
        assert_eq!(phi.len(), 17);
        assert!(phi[..16].iter().all(|v| (*v - 1.0).abs() < 1e-15));
        assert_eq!(phi[16], 0.0);
        // ψ = +1 on [0, ½), −1 on [½, 1).
        assert!((t.values_psi()[3] - 1.0).abs() < 1e-15);
        assert!((t.values_psi()[12] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_and_zero_mean() {
        for n in 1..=10 {
            let f = WaveletFilter::daubechies(n).unwrap();
            let t = cascade_scaling_table(&f, 10).unwrap();
            let phi: f64 = t.values_phi().iter().sum::<f64>() * t.step();
            let psi: f64 = t.values_psi().iter().sum::<f64>() * t.step();
            assert!((phi - 1.0).abs() < 1e-4, "N={n}: ∫φ = {phi}");
            assert!(psi.abs() < 1e-4, "N={n}: ∫ψ = {psi}");
        }
    }

    #[test]
    fn db2_value_at_one() {
        // Closed form for the D4 scaling function at x = 1: (1 + √3)/2.
        let expected = (1.0 + 3f64.sqrt()) / 2.0;
        let f = WaveletFilter::daubechies(2).unwrap();
        let t = cascade_scaling_table(&f, 10).unwrap();
        assert!((t.value(BasisKind::Phi, 1.0) - expected).abs() < 1e-9);
        assert!((t.value(BasisKind::Phi, 1.0) - 1.36603).abs() < 1e-5);
        assert!((t.value(BasisKind::Phi, 2.0) - (1.0 - 3f64.sqrt()) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn haar_periodized_values() {
        let t = cascade_scaling_table(&WaveletFilter::haar(), 8).unwrap();
        for x in [0.0, 0.1, 0.5, 0.99] {
            assert!(
                (eval_basis_periodized(&t, BasisKind::Phi, 0, 0, x).unwrap() - 1.0).abs() < 1e-15
            );
        }
        let s2 = std::f64::consts::SQRT_2;
        assert!(
            (eval_basis_periodized(&t, BasisKind::Phi, 1, 0, 0.25).unwrap() - s2).abs() < 1e-15
        );
        assert_eq!(
            eval_basis_periodized(&t, BasisKind::Phi, 1, 0, 0.75).unwrap(),
            0.0
        );
    }

    #[test]
    fn index_and_domain_errors() {
        let t = cascade_scaling_table(&WaveletFilter::haar(), 4).unwrap();
        assert!(matches!(
            eval_basis_periodized(&t, BasisKind::Phi, 2, 4, 0.5),
            Err(Error::Index { .. })
        ));
        assert!(matches!(
            eval_basis_periodized(&t, BasisKind::Psi, 2, 0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn db8_periodized_basis_is_normalized() {
        let f = WaveletFilter::daubechies(8).unwrap();
        let t = cascade_scaling_table(&f, DEFAULT_DEPTH).unwrap();
        let m = 1usize << 14;
        for kind in [BasisKind::Phi, BasisKind::Psi] {
            let norm: f64 = (0..m)
                .map(|i| {
                    let v = eval_basis_periodized(&t, kind, 3, 5, i as f64 / m as f64).unwrap();
                    v * v
                })
                .sum::<f64>()
                / m as f64;
            assert!((norm - 1.0).abs() < 1e-3, "{kind:?}: {norm}");
        }
    }
}
