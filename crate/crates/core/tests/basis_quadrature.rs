//! Periodized basis evaluation checked against the pyramid and against
//! orthonormality.

use wavereg::estimator::basis_quadrature;
use wavereg::wavelet::{dwt_periodic, BasisKind, WaveletBasis};

fn db8() -> WaveletBasis {
    WaveletBasis::new(8, 12).unwrap()
}

#[test]
fn psi_is_normalized_under_quadrature() {
    let b = db8();
    // ∫ Ψ_{3,2}² = 1: take g² = Ψ_{3,2} as the quadrature weight.
    let w = basis_quadrature(&b, BasisKind::Psi, 3, 2, 1 << 14, |x| {
        b.eval(BasisKind::Psi, 3, 2, x)
    });
    assert!((w - 1.0).abs() < 1e-3, "{w}");
    let cross = basis_quadrature(&b, BasisKind::Psi, 3, 2, 1 << 14, |x| {
        b.eval(BasisKind::Psi, 3, 3, x)
    });
    assert!(cross.abs() < 1e-3, "{cross}");
    let mixed = basis_quadrature(&b, BasisKind::Phi, 3, 2, 1 << 14, |x| {
        b.eval(BasisKind::Psi, 3, 5, x)
    });
    assert!(mixed.abs() < 1e-3, "{mixed}");
}

#[test]
fn pyramid_of_sampled_basis_function_is_a_unit_vector() {
    // The finest-level scaling coefficients of a smooth f are close to
    // n^{-1/2} f((i + m₁)/n) with m₁ = ∫ x φ(x) dx. Feeding those samples of
    // Ψ_{j,k} to the pyramid must isolate the single coefficient (j, k).
    let b = db8();
    let n = 1024;
    let t = b.table();
    let m1: f64 = t
        .values_phi()
        .iter()
        .enumerate()
        .map(|(i, p)| t.grid_x(i) * p)
        .sum::<f64>()
        * t.step();
    for (kind, j, k) in [
        (BasisKind::Psi, 4, 5),
        (BasisKind::Psi, 6, 40),
        (BasisKind::Phi, 3, 7),
    ] {
        let s: Vec<f64> = (0..n)
            .map(|i| b.eval(kind, j, k, (i as f64 + m1) / n as f64) / (n as f64).sqrt())
            .collect();
        let p = dwt_periodic(&s, b.filter(), 3).unwrap();
        let mut flat: Vec<(BasisKind, usize, usize, f64)> = p
            .approx()
            .iter()
            .enumerate()
            .map(|(i, v)| (BasisKind::Phi, 3, i, *v))
            .collect();
        for (level, d) in p.details() {
            flat.extend(
                d.iter()
                    .enumerate()
                    .map(|(i, v)| (BasisKind::Psi, level, i, *v)),
            );
        }
        for (bk, bj, bi, v) in flat {
            let expected = if (bk, bj, bi) == (kind, j, k) {
                1.0
            } else {
                0.0
            };
            assert!(
                (v - expected).abs() < 1e-2,
                "{kind:?}({j},{k}) coefficient ({bj},{bi}) = {v}"
            );
        }
    }
}
