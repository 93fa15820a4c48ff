//! Numerical invariant report for a design operator.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{inner, DesignOperator};
use crate::error::Result;
use crate::seed;

/// Dense reconstruction is skipped above this many entries.
pub const REPORT_DENSE_CAP: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorReport {
    pub rows: usize,
    pub columns: usize,
    /// Worst `|<A b, z> - <b, A* z>| / (|A b| |z|)` over the random pairs.
    pub adjoint_rel_err: f64,
    /// Worst `|sum_i (A b)_i| / sqrt(n)` over random section-sparse messages.
    pub max_dc: f64,
    pub dense: Option<DenseSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSummary {
    /// Forward and adjoint against the dense matrix, max-abs.
    pub fast_vs_dense: f64,
    pub column_norm2_min: f64,
    pub column_norm2_max: f64,
    pub column_norm2_mean: f64,
    pub max_row_sum: f64,
    pub max_column_sum: f64,
}

fn random_complex<R: Rng>(len: usize, rng: &mut R) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

pub fn check_operator(op: &dyn DesignOperator, seed: u64, pairs: usize) -> Result<OperatorReport> {
    let (n, cols, m) = (op.rows(), op.columns(), op.section_size());
    let mut rng = seed::rng(seed, &[]);
    let mut adjoint_rel_err: f64 = 0.0;
    let mut max_dc: f64 = 0.0;
    for _ in 0..pairs {
        let b = random_complex(cols, &mut rng);
        let z = random_complex(n, &mut rng);
        let ab = op.forward(&b)?;
        let az = op.adjoint(&z)?;
        let lhs = inner(&ab, &z);
        let rhs = inner(&b, &az);
        let scale = (inner(&ab, &ab).re * inner(&z, &z).re).sqrt().max(f64::MIN_POSITIVE);
        adjoint_rel_err = adjoint_rel_err.max((lhs - rhs).norm() / scale);

        let mut beta = vec![0.0; cols];
        for sec in 0..op.sections() {
            beta[sec * m + rng.random_range(0..m)] = 1.0;
        }
        let x = op.forward_real(&beta)?;
        let dc: Complex64 = x.iter().sum();
        max_dc = max_dc.max(dc.norm() / (n as f64).sqrt());
    }

    let dense = if n * cols <= REPORT_DENSE_CAP {
        let a = op.to_dense()?;
        let mut fast_vs_dense: f64 = 0.0;
        for _ in 0..pairs.clamp(1, 5) {
            let b = random_complex(cols, &mut rng);
            let z = random_complex(n, &mut rng);
            for (i, v) in op.forward(&b)?.iter().enumerate() {
                let d: Complex64 = a[i].iter().zip(&b).map(|(x, y)| x * y).sum();
                fast_vs_dense = fast_vs_dense.max((v - d).norm());
            }
            for (j, v) in op.adjoint(&z)?.iter().enumerate() {
                let d: Complex64 = (0..n).map(|i| a[i][j].conj() * z[i]).sum();
                fast_vs_dense = fast_vs_dense.max((v - d).norm());
            }
        }
        let norms: Vec<f64> = (0..cols).map(|j| (0..n).map(|i| a[i][j].norm_sqr()).sum()).collect();
        let max_row_sum = a.iter().map(|r| r.iter().sum::<Complex64>().norm()).fold(0.0, f64::max);
        let max_column_sum = (0..cols)
            .map(|j| (0..n).map(|i| a[i][j]).sum::<Complex64>().norm())
            .fold(0.0, f64::max);
        Some(DenseSummary {
            fast_vs_dense,
            column_norm2_min: norms.iter().copied().fold(f64::INFINITY, f64::min),
            column_norm2_max: norms.iter().copied().fold(0.0, f64::max),
            column_norm2_mean: norms.iter().sum::<f64>() / cols as f64,
            max_row_sum,
            max_column_sum,
        })
    } else {
        None
    };

    Ok(OperatorReport {
        rows: n,
        columns: cols,
        adjoint_rel_err,
        max_dc,
        dense,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{CirculantOperator, DftBlockOperator};
    use crate::params::SparcParams;
    use crate::sequences::sequence_for_length;

    #[test]
    fn circulant_report() {
        let p = SparcParams::with_block_length(4, 16, 32, 1.0, 1.0).unwrap();
        let op = CirculantOperator::new(&p, 1, sequence_for_length(16).unwrap()).unwrap();
        let r = check_operator(&op, 2, 10).unwrap();
        let d = r.dense.unwrap();
        assert!(r.adjoint_rel_err < 1e-12);
        assert!(r.max_dc < 1e-9);
        assert!(d.fast_vs_dense < 1e-12);
        assert!(d.max_row_sum < 1e-9 && d.max_column_sum < 1e-9);
        assert!((d.column_norm2_min - 1.0).abs() < 1e-12 && (d.column_norm2_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dft_report() {
        let p = SparcParams::with_block_length(4, 16, 40, 1.0, 1.0).unwrap();
        let op = DftBlockOperator::new(&p, 1).unwrap();
        let r = check_operator(&op, 2, 10).unwrap();
        assert!(r.adjoint_rel_err < 1e-12);
        assert!(r.dense.unwrap().fast_vs_dense < 1e-12);
    }
}
