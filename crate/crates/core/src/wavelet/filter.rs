//! Daubechies extremal-phase filters.
//!
//! Taps are stored in synthesis order (`h₀` is the leading tap of the
//! two-scale relation `φ(x) = √2 Σₖ hₖ φ(2x − k)`), so `φ` is supported on
//! `[0, 2N − 1]`. Every filter is checked against the orthonormality and
//! vanishing-moment conditions when it is loaded.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Largest supported number of vanishing moments.
pub const MAX_VANISHING_MOMENTS: usize = 10;

const SUM_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    vanishing_moments: usize,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl WaveletFilter {
    /// Daubechies filter with `vanishing_moments` vanishing moments (`1` is Haar).
    pub fn daubechies(vanishing_moments: usize) -> Result<Self> {
        let taps: &[f64] = match vanishing_moments {
            1 => &DB1,
            2 => &DB2,
            3 => &DB3,
            4 => &DB4,
            5 => &DB5,
            6 => &DB6,
            7 => &DB7,
            8 => &DB8,
            9 => &DB9,
            10 => &DB10,
            other => return Err(Error::UnsupportedOrder(other)),
        };
        Self::from_lowpass(vanishing_moments, taps.to_vec())
    }

    pub fn haar() -> Self {
        Self::daubechies(1).expect("Haar filter is always valid")
    }

    /// Builds a filter from lowpass taps, deriving the quadrature-mirror
    /// highpass `gₖ = (−1)ᵏ h_{L−1−k}` and validating the result.
    pub fn from_lowpass(vanishing_moments: usize, lowpass: Vec<f64>) -> Result<Self> {
        if lowpass.len() != 2 * vanishing_moments || vanishing_moments == 0 {
            return Err(Error::FilterInvalid(format!(
                "{} taps given for {} vanishing moments",
                lowpass.len(),
                vanishing_moments
            )));
        }
        let len = lowpass.len();
        let highpass = (0..len)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * lowpass[len - 1 - k]
            })
            .collect();
        let filter = Self {
            vanishing_moments,
            lowpass,
            highpass,
        };
        filter.validate()?;
        Ok(filter)
    }

    pub fn vanishing_moments(&self) -> usize {
        self.vanishing_moments
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    /// Number of taps, `2N`.
    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    /// Length of the support of `φ` and `ψ`, `2N − 1`.
    pub fn support_len(&self) -> usize {
        self.lowpass.len() - 1
    }

    /// Checks `Σh = √2`, orthonormality of even shifts and the vanishing
    /// moments of the highpass.
    pub fn validate(&self) -> Result<()> {
        let h = &self.lowpass;
        let sum: f64 = h.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > SUM_TOL {
            return Err(Error::FilterInvalid(format!(
                "lowpass sums to {sum}, expected √2"
            )));
        }
        for shift in (0..h.len()).step_by(2) {
            let dot: f64 = h.iter().zip(&h[shift..]).map(|(a, b)| a * b).sum();
            let target = if shift == 0 { 1.0 } else { 0.0 };
            if (dot - target).abs() > ORTHO_TOL {
                return Err(Error::FilterInvalid(format!(
                    "shift {shift} autocorrelation is {dot}, expected {target}"
                )));
            }
        }
        // Moments are compared relative to Σ|gₖ|kᵖ: the raw sums reach 1e11
        // for N = 10, far beyond what an absolute 1e-8 can resolve in f64.
        for p in 0..self.vanishing_moments {
            let (moment, scale) =
                self.highpass
                    .iter()
                    .enumerate()
                    .fold((0.0, 0.0), |(m, s), (k, g)| {
                        let kp = (k as f64).powi(p as i32);
                        (m + g * kp, s + g.abs() * kp)
                    });
            if moment.abs() > MOMENT_TOL * scale.max(1.0) {
                return Err(Error::FilterInvalid(format!(
                    "moment {p} of highpass is {moment}"
                )));
            }
        }
        Ok(())
    }
}

/// Convenience wrapper matching the catalog operation name.
pub fn make_daubechies_filter(vanishing_moments: usize) -> Result<WaveletFilter> {
    WaveletFilter::daubechies(vanishing_moments)
}

const DB1: [f64; 2] = [
    std::f64::consts::FRAC_1_SQRT_2,
    std::f64::consts::FRAC_1_SQRT_2,
];

const DB2: [f64; 4] = [
    0.48296291314453414337,
    0.83651630373780790558,
    0.22414386804201338103,
    -0.12940952255126038117,
];

const DB3: [f64; 6] = [
    0.332670552950082616,
    0.80689150931109257649,
    0.4598775021184915701,
    -0.1350110200102545887,
    -0.085441273882026661693,
    0.035226291885709536603,
];

const DB4: [f64; 8] = [
    0.23037781330889650086,
    0.71484657055291564709,
    0.63088076792985890788,
    -0.027983769416859854211,
    -0.18703481171909308408,
    0.030841381835560763627,
    0.032883011666885199735,
    -0.010597401785069032105,
];

const DB5: [f64; 10] = [
    0.16010239797419291448,
    0.60382926979718967054,
    0.72430852843777292773,
    0.13842814590132073151,
    -0.24229488706638203186,
    -0.032244869584638374648,
    0.077571493840045713523,
    -0.0062414902127982742742,
    -0.012580751999081999469,
    0.003335725285473771278,
];

const DB6: [f64; 12] = [
    0.11154074335010946362,
    0.49462389039845308568,
    0.75113390802109535068,
    0.31525035170919762909,
    -0.22626469396543982008,
    -0.12976686756726193556,
    0.097501605587323049102,
    0.027522865530305728626,
    -0.031582039317486029565,
    0.00055384220116149613925,
    0.0047772575109455106396,
    -0.0010773010853084795649,
];

const DB7: [f64; 14] = [
    0.07785205408500917902,
    0.39653931948191730654,
    0.72913209084623511992,
    0.46978228740519312247,
    -0.14390600392856497541,
    -0.22403618499387498264,
    0.071309219266830264751,
    0.080612609151083071913,
    -0.03802993693501441358,
    -0.016574541630666880654,
    0.012550998556099840613,
    0.00042957797292136652113,
    -0.0018016407040474909153,
    0.00035371379997452024845,
];

const DB8: [f64; 16] = [
    0.054415842243104009955,
    0.31287159091429997066,
    0.67563073629728980681,
    0.58535468365420671277,
    -0.015829105256349305667,
    -0.28401554296154692652,
    0.00047248457391328277036,
    0.12874742662047845886,
    -0.01736930100180754617,
    -0.044088253930794751507,
    0.013981027917398281649,
    0.0087460940474057767164,
    -0.0048703529934515743104,
    -0.0003917403733769470463,
    0.00067544940645056936637,
    -0.00011747678412476953373,
];

const DB9: [f64; 18] = [
    0.038077947363878346589,
    0.24383467461259035373,
    0.6048231236901111119,
    0.65728807805130053808,
    0.13319738582500757619,
    -0.29327378327917490881,
    -0.096840783222976460514,
    0.14854074933810638014,
    0.030725681479333379212,
    -0.067632829061329973676,
    0.00025094711483145195759,
    0.022361662123679097205,
    -0.0047232047577513972779,
    -0.0042815036824634298345,
    0.0018476468830562264766,
    0.00023038576352319596721,
    -0.00025196318894271013697,
    0.000039347320316271599481,
];

const DB10: [f64; 20] = [
    0.026670057900555553587,
    0.18817680007769148902,
    0.52720118893172558648,
    0.68845903945360356574,
    0.28117234366057746075,
    -0.24984642432731537942,
    -0.1959462743773770435,
    0.12736934033579326008,
    0.09305736460357235116,
    -0.071394147166397087145,
    -0.029457536821875812858,
    0.03321267405934100174,
    0.0036065535669561696554,
    -0.010733175483330575044,
    0.0013953517470529011658,
    0.0019924052951850561172,
    -0.00068585669495971162656,
    -0.00011646685512928545095,
    0.000093588670320069591334,
    -0.000013264202894521244812,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_taps() {
        let f = make_daubechies_filter(1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(f.lowpass(), &[s, s]);
        assert_eq!(f.highpass(), &[s, -s]);
    }

    #[test]
    fn all_orders_load() {
        for n in 1..=MAX_VANISHING_MOMENTS {
            let f = make_daubechies_filter(n).unwrap();
            assert_eq!(f.len(), 2 * n);
            assert_eq!(f.support_len(), 2 * n - 1);
        }
    }

    #[test]
    fn out_of_range_orders() {
        assert!(matches!(
            make_daubechies_filter(11),
            Err(Error::UnsupportedOrder(11))
        ));
        assert!(matches!(
            make_daubechies_filter(0),
            Err(Error::UnsupportedOrder(0))
        ));
    }

    #[test]
    fn db8_invariants() {
        let f = make_daubechies_filter(8).unwrap();
        let h = f.lowpass();
        assert_eq!(h.len(), 16);
        let sum: f64 = h.iter().sum();
        assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-12);
        for m in 0..8 {
            let dot: f64 = (0..16 - 2 * m).map(|k| h[k] * h[k + 2 * m]).sum();
            let target = if m == 0 { 1.0 } else { 0.0 };
            assert!((dot - target).abs() < 1e-12, "m={m} dot={dot}");
        }
        for (k, g) in f.highpass().iter().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(*g, sign * h[15 - k]);
        }
        // Absolute moments up to p = 7 stay well inside f64 range for 16 taps.
        for p in 0..8 {
            let m: f64 = f
                .highpass()
                .iter()
                .enumerate()
                .map(|(k, g)| g * (k as f64).powi(p))
                .sum();
            assert!(m.abs() < 1e-6, "p={p} moment={m}");
        }
    }

    #[test]
    fn perturbed_filter_is_rejected() {
        let mut taps = make_daubechies_filter(4).unwrap().lowpass().to_vec();
        taps[2] += 1e-6;
        assert!(matches!(
            WaveletFilter::from_lowpass(4, taps),
            Err(Error::FilterInvalid(_))
        ));
    }
}
