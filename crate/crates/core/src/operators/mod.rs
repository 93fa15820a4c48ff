//! Design matrices as implicit linear operators `C^{ML} -> C^n`.
//!
//! Every family is scaled so columns have unit norm (exactly for the DFT and
//! circulant families, in expectation for the random ones). Message values are
//! then `sqrt(n P_l)` regardless of family, so the power bookkeeping is shared.

mod check;
mod circulant;
mod dense;
mod dft;
mod sc;

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use check::{check_operator, DenseSummary, OperatorReport, REPORT_DENSE_CAP};
pub use circulant::{CirculantOperator, CirculantPhases};
pub use dense::{DenseOperator, DENSE_ENTRY_CAP};
pub use dft::DftBlockOperator;
pub use sc::ScOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorFamily {
    Gaussian,
    Dft,
    Circulant,
    SpatiallyCoupled,
}

impl std::fmt::Display for OperatorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OperatorFamily::Gaussian => "gaussian",
            OperatorFamily::Dft => "dft",
            OperatorFamily::Circulant => "circulant",
            OperatorFamily::SpatiallyCoupled => "spatially-coupled",
        };
        f.write_str(s)
    }
}

/// How the rows and sections of an operator split into coupled blocks.
///
/// `weights[r][c]` is `M_R` times the per-entry variance of block `(r, c)`, so
/// a column in column-block `c` has squared norm `sum_r weights[r][c]`. Plain
/// (uncoupled) operators use a single block with weight 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    pub row_blocks: Vec<Range<usize>>,
    pub section_block: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
}

impl CouplingProfile {
    pub fn uncoupled(rows: usize, sections: usize) -> Self {
        Self {
            row_blocks: std::iter::once(0..rows).collect(),
            section_block: vec![0; sections],
            weights: vec![vec![1.0]],
        }
    }

    pub fn column_blocks(&self) -> usize {
        self.weights.first().map_or(0, |w| w.len())
    }
}

pub trait DesignOperator: Send + Sync {
    fn rows(&self) -> usize;
    fn sections(&self) -> usize;
    fn section_size(&self) -> usize;
    fn family(&self) -> OperatorFamily;

    fn columns(&self) -> usize {
        self.sections() * self.section_size()
    }

    /// `A beta`.
    fn forward(&self, beta: &[Complex64]) -> Result<Vec<Complex64>>;

    /// `A^* z`.
    fn adjoint(&self, z: &[Complex64]) -> Result<Vec<Complex64>>;

    fn forward_real(&self, beta: &[f64]) -> Result<Vec<Complex64>> {
        let b: Vec<Complex64> = beta.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&b)
    }

    fn coupling(&self) -> CouplingProfile {
        CouplingProfile::uncoupled(self.rows(), self.sections())
    }

    /// Dense `n x ML` matrix (row-major) obtained by probing with unit vectors.
    fn to_dense(&self) -> Result<Vec<Vec<Complex64>>> {
        let (n, cols) = (self.rows(), self.columns());
        let mut dense = vec![vec![Complex64::new(0.0, 0.0); cols]; n];
        let mut e = vec![Complex64::new(0.0, 0.0); cols];
        for j in 0..cols {
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.forward(&e)?;
            for (i, v) in col.into_iter().enumerate() {
                dense[i][j] = v;
            }
            e[j] = Complex64::new(0.0, 0.0);
        }
        Ok(dense)
    }
}

/// Inner product `<a, b> = sum a_i conj(b_i)`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}
