use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{DesignOperator, OperatorFamily};
use crate::error::{check_len, Error, Result};
use crate::params::SparcParams;
use crate::seed;
use crate::sequences::PerfectSequence;

/// Block-row phases `phi_j` and block-column phases `phi'_i`.
///
/// Both sets must be unit-modulus and sum to zero; together they make every row
/// sum and every column sum of the operator vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirculantPhases {
    pub row: Vec<Complex64>,
    pub column: Vec<Complex64>,
}

impl CirculantPhases {
    /// `phi_j = exp(2 pi i j / L_BR)`, `phi'_i = (-1)^i` (zero-based `i`, `j`).
    pub fn standard(block_rows: usize, sections: usize) -> Self {
        Self {
            row: (0..block_rows)
                .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / block_rows as f64))
                .collect(),
            column: (0..sections)
                .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
                .collect(),
        }
    }

    fn validate(&self, block_rows: usize, sections: usize) -> Result<()> {
        check_len("row phases", block_rows, self.row.len())?;
        check_len("column phases", sections, self.column.len())?;
        for (name, set) in [("row", &self.row), ("column", &self.column)] {
            if set.iter().any(|p| (p.norm() - 1.0).abs() > 1e-12) {
                return Err(Error::InvalidParameter(format!("{name} phases must have unit modulus")));
            }
            let sum: Complex64 = set.iter().sum();
            if sum.norm() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "{name} phases must sum to zero, got |sum| = {:.3e}",
                    sum.norm()
                )));
            }
        }
        Ok(())
    }
}

/// `L_BR x L` array of row-permuted, phase-rotated copies of one circulant
/// matrix `C` whose leading row is a perfect sequence, scaled by `1/sqrt(n)`.
///
/// Block `(j, i)` row `p` equals `phi_j phi'_i C[perm_{j,i}[p], :] / sqrt(n)`,
/// with `C[a][b] = theta[(b - a) mod M]`.
pub struct CirculantOperator {
    rows: usize,
    sections: usize,
    section_size: usize,
    block_rows: usize,
    sequence: PerfectSequence,
    phases: CirculantPhases,
    /// `perms[j * L + i]`
    perms: Vec<Vec<usize>>,
    eigen: Vec<Complex64>,
    forward_fft: Arc<dyn Fft<f64>>,
    inverse_fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for CirculantOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantOperator")
            .field("rows", &self.rows)
            .field("sections", &self.sections)
            .field("section_size", &self.section_size)
            .field("sequence", &self.sequence.family())
            .finish()
    }
}

impl CirculantOperator {
    pub fn new(params: &SparcParams, seed: u64, sequence: PerfectSequence) -> Result<Self> {
        let m = params.section_size();
        let n = params.block_length();
        if !n.is_multiple_of(m) {
            return Err(Error::InvalidParameter(format!(
                "circulant family needs M | n (n = {n}, M = {m}); round n up first"
            )));
        }
        let phases = CirculantPhases::standard(n / m, params.sections());
        Self::with_phases(params, seed, sequence, phases)
    }

    pub fn with_phases(
        params: &SparcParams,
        seed: u64,
        sequence: PerfectSequence,
        phases: CirculantPhases,
    ) -> Result<Self> {
        let m = params.section_size();
        let n = params.block_length();
        let l = params.sections();
        check_len("sequence length", m, sequence.len())?;
        if !l.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "circulant family needs an even number of sections, got {l}"
            )));
        }
        if !n.is_multiple_of(m) {
            return Err(Error::InvalidParameter(format!(
                "circulant family needs M | n (n = {n}, M = {m})"
            )));
        }
        let block_rows = n / m;
        phases.validate(block_rows, l)?;

        let perms = (0..block_rows)
            .flat_map(|j| (0..l).map(move |i| (j, i)))
            .map(|(j, i)| {
                let mut rng = seed::rng(seed, &[seed::stream::OPERATOR, j as u64, i as u64]);
                let mut p: Vec<usize> = (0..m).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();

        let mut planner = FftPlanner::new();
        let forward_fft = planner.plan_fft_forward(m);
        let inverse_fft = planner.plan_fft_inverse(m);
        // first column of C is theta[(-a) mod M]
        let theta = sequence.entries();
        let mut eigen: Vec<Complex64> = (0..m).map(|a| theta[(m - a) % m]).collect();
        forward_fft.process(&mut eigen);

        Ok(Self {
            rows: n,
            sections: l,
            section_size: m,
            block_rows,
            sequence,
            phases,
            perms,
            eigen,
            forward_fft,
            inverse_fft,
            scale: 1.0 / (n as f64).sqrt(),
        })
    }

    /// `L_BR = n / M`.
    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn sequence(&self) -> &PerfectSequence {
        &self.sequence
    }

    pub fn phases(&self) -> &CirculantPhases {
        &self.phases
    }

    pub fn permutation(&self, block_row: usize, section: usize) -> &[usize] {
        &self.perms[block_row * self.sections + section]
    }

    /// `buf <- C buf` (or `C^* buf` when `adjoint`).
    fn apply_circulant(&self, buf: &mut [Complex64], scratch: &mut [Complex64], adjoint: bool) {
        self.forward_fft.process_with_scratch(buf, scratch);
        let inv_m = 1.0 / self.section_size as f64;
        for (b, e) in buf.iter_mut().zip(&self.eigen) {
            let lam = if adjoint { e.conj() } else { *e };
            *b *= lam * inv_m;
        }
        self.inverse_fft.process_with_scratch(buf, scratch);
    }
}

impl DesignOperator for CirculantOperator {
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
        OperatorFamily::Circulant
    }

    fn forward(&self, beta: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("forward input", self.columns(), beta.len())?;
        let m = self.section_size;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.rows];
        let mut buf = vec![zero; m];
        let mut scratch = vec![
            zero;
            self.forward_fft
                .get_inplace_scratch_len()
                .max(self.inverse_fft.get_inplace_scratch_len())
        ];
        for (i, sec) in beta.chunks_exact(m).enumerate() {
            if sec.iter().all(|v| *v == zero) {
                continue;
            }
            buf.copy_from_slice(sec);
            self.apply_circulant(&mut buf, &mut scratch, false);
            let col_phase = self.phases.column[i] * self.scale;
            for (j, out_block) in out.chunks_exact_mut(m).enumerate() {
                let phase = self.phases.row[j] * col_phase;
                for (o, &src) in out_block.iter_mut().zip(self.permutation(j, i)) {
                    *o += phase * buf[src];
                }
            }
        }
        Ok(out)
    }

    fn adjoint(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("adjoint input", self.rows, z.len())?;
        let m = self.section_size;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.columns()];
        let mut scratch = vec![
            zero;
            self.forward_fft
                .get_inplace_scratch_len()
                .max(self.inverse_fft.get_inplace_scratch_len())
        ];
        for (i, sec) in out.chunks_exact_mut(m).enumerate() {
            for (j, z_block) in z.chunks_exact(m).enumerate() {
                let phase = self.phases.row[j].conj();
                for (&zi, &dst) in z_block.iter().zip(self.permutation(j, i)) {
                    sec[dst] += phase * zi;
                }
            }
            self.apply_circulant(sec, &mut scratch, true);
            let col_phase = self.phases.column[i].conj() * self.scale;
            for v in sec.iter_mut() {
                *v *= col_phase;
            }
        }
        Ok(out)
    }
}
