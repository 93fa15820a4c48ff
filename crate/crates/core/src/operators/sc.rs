use num_complex::Complex64;

use super::dense::{complex_gaussian, matvec_acc, matvec_adj_acc};
use super::{CouplingProfile, DesignOperator, OperatorFamily};
use crate::error::{check_len, Error, Result};
use crate::sc::BaseMatrix;
use crate::seed;

/// Spatially coupled Gaussian operator mirroring a `(w, Lambda)` base matrix.
///
/// Block `(r, c)` is `M_R x M_C` with i.i.d. `CN(0, W_rc / (n P))` entries, or
/// all-zero where `W_rc = 0`. This is the usual `CN(0, W_rc / L)` construction
/// rescaled by `sqrt(L / (n P))` so that columns have unit norm in expectation
/// and the message carries `sqrt(n P / L)` per section.
#[derive(Debug, Clone)]
pub struct ScOperator {
    base: BaseMatrix,
    rows_per_block: usize,
    cols_per_block: usize,
    sections: usize,
    section_size: usize,
    /// `blocks[r * L_C + c]`, row-major `M_R x M_C`
    blocks: Vec<Option<Vec<Complex64>>>,
}

impl ScOperator {
    pub fn new(
        base: &BaseMatrix,
        rows_per_block: usize,
        sections: usize,
        section_size: usize,
        seed: u64,
    ) -> Result<Self> {
        let lc = base.column_blocks();
        let lr = base.row_blocks();
        if rows_per_block == 0 {
            return Err(Error::InvalidParameter("M_R must be at least 1".into()));
        }
        if !sections.is_multiple_of(lc) {
            return Err(Error::InvalidParameter(format!(
                "L = {sections} sections do not split evenly over L_C = {lc} column blocks"
            )));
        }
        let cols_per_block = sections / lc * section_size;
        let n = rows_per_block * lr;
        let entries = base.nonzeros() * rows_per_block * cols_per_block;
        if entries > 4 * super::DENSE_ENTRY_CAP {
            return Err(Error::TooLarge {
                entries,
                cap: 4 * super::DENSE_ENTRY_CAP,
            });
        }
        let norm = n as f64 * base.power();
        let blocks = (0..lr)
            .flat_map(|r| (0..lc).map(move |c| (r, c)))
            .map(|(r, c)| {
                let w = base.entry(r, c);
                (w != 0.0).then(|| {
                    let mut rng = seed::rng(seed, &[seed::stream::OPERATOR, r as u64, c as u64]);
                    complex_gaussian(rows_per_block * cols_per_block, w / norm, &mut rng)
                })
            })
            .collect();
        Ok(Self {
            base: base.clone(),
            rows_per_block,
            cols_per_block,
            sections,
            section_size,
            blocks,
        })
    }

    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn rows_per_block(&self) -> usize {
        self.rows_per_block
    }

    pub fn cols_per_block(&self) -> usize {
        self.cols_per_block
    }

    /// Row-major entries of block `(r, c)`, `None` for a zero block.
    pub fn block(&self, r: usize, c: usize) -> Option<&[Complex64]> {
        self.blocks[r * self.base.column_blocks() + c].as_deref()
    }

    /// Per-entry variance of block `(r, c)`.
    pub fn entry_variance(&self, r: usize, c: usize) -> f64 {
        self.base.entry(r, c) / (self.rows() as f64 * self.base.power())
    }
}

impl DesignOperator for ScOperator {
    fn rows(&self) -> usize {
        self.rows_per_block * self.base.row_blocks()
    }

    fn sections(&self) -> usize {
        self.sections
    }

    fn section_size(&self) -> usize {
        self.section_size
    }

    fn family(&self) -> OperatorFamily {
        OperatorFamily::SpatiallyCoupled
    }

    fn forward(&self, beta: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("forward input", self.columns(), beta.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows()];
        let lc = self.base.column_blocks();
        for (r, out_r) in out.chunks_exact_mut(self.rows_per_block).enumerate() {
            for (c, beta_c) in beta.chunks_exact(self.cols_per_block).enumerate() {
                if let Some(block) = &self.blocks[r * lc + c] {
                    matvec_acc(block, self.cols_per_block, beta_c, out_r);
                }
            }
        }
        Ok(out)
    }

    fn adjoint(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("adjoint input", self.rows(), z.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.columns()];
        let lc = self.base.column_blocks();
        for (r, z_r) in z.chunks_exact(self.rows_per_block).enumerate() {
            for (c, out_c) in out.chunks_exact_mut(self.cols_per_block).enumerate() {
                if let Some(block) = &self.blocks[r * lc + c] {
                    matvec_adj_acc(block, self.cols_per_block, z_r, out_c);
                }
            }
        }
        Ok(out)
    }

    fn coupling(&self) -> CouplingProfile {
        let (lr, lc) = (self.base.row_blocks(), self.base.column_blocks());
        let per_block = self.sections / lc;
        let scale = lr as f64 * self.base.power();
        CouplingProfile {
            row_blocks: (0..lr)
                .map(|r| r * self.rows_per_block..(r + 1) * self.rows_per_block)
                .collect(),
            section_block: (0..self.sections).map(|s| s / per_block).collect(),
            weights: (0..lr)
                .map(|r| (0..lc).map(|c| self.base.entry(r, c) / scale).collect())
                .collect(),
        }
    }
}
