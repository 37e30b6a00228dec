//! Daubechies filters, the periodized pyramid and cascade tables.

mod cascade;
mod filter;
mod transform;

use std::sync::Arc;

pub(crate) use cascade::periodized_unchecked;
pub use cascade::{
    cascade_scaling_table, eval_basis_periodized, BasisKind, ScalingTable, DEFAULT_DEPTH,
};
pub use filter::{make_daubechies_filter, WaveletFilter, MAX_VANISHING_MOMENTS};
pub use transform::{dwt_periodic, idwt_periodic, CoefficientPyramid};

use crate::error::Result;

/// A filter together with its cascade table; shared read-only between
/// estimators and replications.
#[derive(Debug, Clone)]
pub struct WaveletBasis {
    table: Arc<ScalingTable>,
}

impl WaveletBasis {
    pub fn new(vanishing_moments: usize, depth: u32) -> Result<Self> {
        let filter = WaveletFilter::daubechies(vanishing_moments)?;
        let table = cascade_scaling_table(&filter, depth)?;
        Ok(Self {
            table: Arc::new(table),
        })
    }

    pub fn filter(&self) -> &WaveletFilter {
        self.table.filter()
    }

    pub fn table(&self) -> &ScalingTable {
        &self.table
    }

    /// Periodized `Φ_{j,k}(x)` or `Ψ_{j,k}(x)`; `x` is wrapped into `[0, 1)`.
    pub fn eval(&self, kind: BasisKind, level: usize, shift: usize, x: f64) -> f64 {
        periodized_unchecked(&self.table, kind, level, shift, x.rem_euclid(1.0))
    }
}
