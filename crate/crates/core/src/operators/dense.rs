use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DesignOperator, OperatorFamily};
use crate::error::{check_len, Error, Result};
use crate::params::SparcParams;
use crate::seed;

/// Dense storage is a test oracle, not a performance path.
pub const DENSE_ENTRY_CAP: usize = 1 << 22;

/// Dense row-major operator. The i.i.d. Gaussian family lives here.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    rows: usize,
    section_size: usize,
    sections: usize,
    family: OperatorFamily,
    data: Vec<Complex64>,
}

/// `out += B x` for a row-major `rows x cols` block.
pub(crate) fn matvec_acc(block: &[Complex64], cols: usize, x: &[Complex64], out: &mut [Complex64]) {
    for (row, o) in block.chunks_exact(cols).zip(out.iter_mut()) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in row.iter().zip(x) {
            acc += a * b;
        }
        *o += acc;
    }
}

/// `out += B^* z` for a row-major `rows x cols` block.
pub(crate) fn matvec_adj_acc(block: &[Complex64], cols: usize, z: &[Complex64], out: &mut [Complex64]) {
    for (row, zi) in block.chunks_exact(cols).zip(z) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a.conj() * zi;
        }
    }
}

/// Fills `len` entries i.i.d. `CN(0, variance)`.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(len: usize, variance: f64, rng: &mut R) -> Vec<Complex64> {
    let sd = (variance / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sd * re, sd * im)
        })
        .collect()
}

impl DenseOperator {
    /// i.i.d. `CN(0, 1/n)` entries.
    pub fn gaussian(params: &SparcParams, seed: u64) -> Result<Self> {
        let (n, cols) = (params.block_length(), params.columns());
        let entries = n.saturating_mul(cols);
        if entries > DENSE_ENTRY_CAP {
            return Err(Error::TooLarge {
                entries,
                cap: DENSE_ENTRY_CAP,
            });
        }
        let mut rng = seed::rng(seed, &[seed::stream::OPERATOR]);
        Ok(Self {
            rows: n,
            section_size: params.section_size(),
            sections: params.sections(),
            family: OperatorFamily::Gaussian,
            data: complex_gaussian(entries, 1.0 / n as f64, &mut rng),
        })
    }

    /// Wraps an explicit row-major matrix.
    pub fn from_matrix(rows: usize, sections: usize, section_size: usize, data: Vec<Complex64>) -> Result<Self> {
        check_len("dense matrix entries", rows * sections * section_size, data.len())?;
        Ok(Self {
            rows,
            section_size,
            sections,
            family: OperatorFamily::Gaussian,
            data,
        })
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.columns() + col]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
}

impl DesignOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.rows
    }

    fn sections(&self) -> usize {
        self.sections
    }

    fn section_size(&self) -> usize {
        self.section_size
    }

    fn family(&self) -> OperatorFamily {
        self.family
    }

    fn forward(&self, beta: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("forward input", self.columns(), beta.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        matvec_acc(&self.data, self.columns(), beta, &mut out);
        Ok(out)
    }

    fn adjoint(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("adjoint input", self.rows, z.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.columns()];
        matvec_adj_acc(&self.data, self.columns(), z, &mut out);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_cap_enforced() {
        let p = SparcParams::with_block_length(1024, 512, 4096, 1.0, 1.0).unwrap();
        assert!(matches!(DenseOperator::gaussian(&p, 0), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = SparcParams::with_block_length(4, 8, 16, 1.0, 1.0).unwrap();
        let a = DenseOperator::gaussian(&p, 1).unwrap();
        let y = a.forward(&vec![Complex64::new(0.0, 0.0); 32]).unwrap();
        assert!(y.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn column_norms_concentrate() {
        let p = SparcParams::with_block_length(16, 16, 256, 1.0, 1.0).unwrap();
        let a = DenseOperator::gaussian(&p, 9).unwrap();
        let cols = p.columns();
        let mean: f64 = (0..cols)
            .map(|j| (0..256).map(|i| a.entry(i, j).norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / cols as f64;
        assert!((0.9..=1.1).contains(&mean), "mean column norm^2 {mean}");
    }

    #[test]
    fn seeded() {
        let p = SparcParams::with_block_length(4, 8, 16, 1.0, 1.0).unwrap();
        let a = DenseOperator::gaussian(&p, 5).unwrap();
        let b = DenseOperator::gaussian(&p, 5).unwrap();
        let c = DenseOperator::gaussian(&p, 6).unwrap();
        assert_eq!(a.data(), b.data());
        assert_ne!(a.data(), c.data());
    }
}
