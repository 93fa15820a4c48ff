use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rustfft::{Fft, FftPlanner};

use super::{DesignOperator, OperatorFamily};
use crate::error::{check_len, Result};
use crate::params::SparcParams;
use crate::seed;

/// `[A_1 | ... | A_L]` where each `A_i` keeps `n` randomly chosen non-DC rows
/// and the first `M` non-DC columns of a `2^k`-point DFT matrix, scaled by
/// `1/sqrt(n)`.
///
/// Entry `(p, c)` of block `i` is `exp(-2 pi i rows_i[p] (c + 1) / N) / sqrt(n)`.
pub struct DftBlockOperator {
    rows: usize,
    sections: usize,
    section_size: usize,
    fft_len: usize,
    row_sel: Vec<Vec<usize>>,
    forward_fft: Arc<dyn Fft<f64>>,
    inverse_fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for DftBlockOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftBlockOperator")
            .field("rows", &self.rows)
            .field("sections", &self.sections)
            .field("section_size", &self.section_size)
            .field("fft_len", &self.fft_len)
            .finish()
    }
}

impl DftBlockOperator {
    pub fn new(params: &SparcParams, seed: u64) -> Result<Self> {
        let n = params.block_length();
        let m = params.section_size();
        let fft_len = (n + 1).max(m + 1).next_power_of_two();
        let row_sel = (0..params.sections())
            .map(|i| {
                let mut rng = seed::rng(seed, &[seed::stream::OPERATOR, i as u64]);
                let mut rows: Vec<usize> = (1..fft_len).collect();
                rows.shuffle(&mut rng);
                rows.truncate(n);
                rows
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            rows: n,
            sections: params.sections(),
            section_size: m,
            fft_len,
            row_sel,
            forward_fft: planner.plan_fft_forward(fft_len),
            inverse_fft: planner.plan_fft_inverse(fft_len),
            scale: 1.0 / (n as f64).sqrt(),
        })
    }

    /// DFT size `2^k` with `k = ceil(log2(max(n + 1, M + 1)))`.
    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    /// DFT row indices selected for section `i`.
    pub fn selected_rows(&self, section: usize) -> &[usize] {
        &self.row_sel[section]
    }
}

impl DesignOperator for DftBlockOperator {
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
        OperatorFamily::Dft
    }

    fn forward(&self, beta: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("forward input", self.columns(), beta.len())?;
        let m = self.section_size;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.rows];
        let mut buf = vec![zero; self.fft_len];
        let mut scratch = vec![zero; self.forward_fft.get_inplace_scratch_len()];
        for (sec, rows) in beta.chunks_exact(m).zip(&self.row_sel) {
            if sec.iter().all(|v| *v == zero) {
                continue;
            }
            buf.fill(zero);
            buf[1..=m].copy_from_slice(sec);
            self.forward_fft.process_with_scratch(&mut buf, &mut scratch);
            for (o, &r) in out.iter_mut().zip(rows) {
                *o += buf[r];
            }
        }
        for o in out.iter_mut() {
            *o *= self.scale;
        }
        Ok(out)
    }

    fn adjoint(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("adjoint input", self.rows, z.len())?;
        let m = self.section_size;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.columns()];
        let mut buf = vec![zero; self.fft_len];
        let mut scratch = vec![zero; self.inverse_fft.get_inplace_scratch_len()];
        for (sec, rows) in out.chunks_exact_mut(m).zip(&self.row_sel) {
            buf.fill(zero);
            for (&zi, &r) in z.iter().zip(rows) {
                buf[r] = zi;
            }
            self.inverse_fft.process_with_scratch(&mut buf, &mut scratch);
            for (o, b) in sec.iter_mut().zip(&buf[1..=m]) {
                *o = b * self.scale;
            }
        }
        Ok(out)
    }
}
