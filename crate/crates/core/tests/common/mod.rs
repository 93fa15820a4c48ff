//! Independent reference implementations used by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use sparc_core::operators::{CirculantOperator, DenseOperator, DesignOperator, DftBlockOperator, ScOperator};

/// Row-major dense matrix.
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl Dense {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.at(r, c) * x[c]).sum())
            .collect()
    }

    pub fn mul_adjoint(&self, z: &[Complex64]) -> Vec<Complex64> {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.at(r, c).conj() * z[r]).sum())
            .collect()
    }

    pub fn row_sum(&self, r: usize) -> Complex64 {
        (0..self.cols).map(|c| self.at(r, c)).sum()
    }

    pub fn column_sum(&self, c: usize) -> Complex64 {
        (0..self.rows).map(|r| self.at(r, c)).sum()
    }
}

pub fn dense_gaussian(op: &DenseOperator) -> Dense {
    let mut d = Dense::zeros(op.rows(), op.columns());
    for r in 0..d.rows {
        for c in 0..d.cols {
            d.set(r, c, op.entry(r, c));
        }
    }
    d
}

/// Entry `(p, c)` of section `i` is `exp(-2 pi i rows_i[p] (c + 1) / N) / sqrt(n)`.
pub fn dense_dft(op: &DftBlockOperator) -> Dense {
    let (n, m, big_n) = (op.rows(), op.section_size(), op.fft_len());
    let scale = 1.0 / (n as f64).sqrt();
    let mut d = Dense::zeros(n, op.columns());
    for i in 0..op.sections() {
        for (p, &row) in op.selected_rows(i).iter().enumerate() {
            for c in 0..m {
                let k = (row * (c + 1)) % big_n;
                let angle = -2.0 * PI * k as f64 / big_n as f64;
                d.set(p, i * m + c, Complex64::from_polar(scale, angle));
            }
        }
    }
    d
}

/// Entry `(j M + p, i M + b)` is `phi_j phi'_i theta[(b - perm_ji[p]) mod M] / sqrt(n)`.
pub fn dense_circulant(op: &CirculantOperator) -> Dense {
    let (n, m) = (op.rows(), op.section_size());
    let scale = 1.0 / (n as f64).sqrt();
    let theta = op.sequence().entries();
    let phases = op.phases();
    let mut d = Dense::zeros(n, op.columns());
    for j in 0..op.block_rows() {
        for i in 0..op.sections() {
            let perm = op.permutation(j, i);
            let ph = phases.row[j] * phases.column[i] * scale;
            for p in 0..m {
                for b in 0..m {
                    d.set(j * m + p, i * m + b, ph * theta[(b + m - perm[p]) % m]);
                }
            }
        }
    }
    d
}

/// Assembles the block array, leaving zero blocks empty.
pub fn dense_sc(op: &ScOperator) -> Dense {
    let (mr, mc) = (op.rows_per_block(), op.cols_per_block());
    let base = op.base();
    let mut d = Dense::zeros(op.rows(), op.columns());
    for r in 0..base.row_blocks() {
        for c in 0..base.column_blocks() {
            if let Some(block) = op.block(r, c) {
                for p in 0..mr {
                    for q in 0..mc {
                        d.set(r * mr + p, c * mc + q, block[p * mc + q]);
                    }
                }
            }
        }
    }
    d
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Exhaustive maximum-likelihood search over every position tuple.
///
/// Returns the best positions, the best distance and the runner-up distance.
pub fn exhaustive_ml(y: &[Complex64], a: &Dense, sections: usize, m: usize, amps: &[f64]) -> (Vec<usize>, f64, f64) {
    let total = m.pow(sections as u32);
    let mut best = (Vec::new(), f64::INFINITY);
    let mut second = f64::INFINITY;
    for code in 0..total {
        let positions: Vec<usize> = (0..sections).map(|l| code / m.pow(l as u32) % m).collect();
        let mut r = y.to_vec();
        for (l, &p) in positions.iter().enumerate() {
            for (row, ri) in r.iter_mut().enumerate() {
                *ri -= a.at(row, l * m + p) * amps[l];
            }
        }
        let dist = norm(&r);
        if dist < best.1 {
            second = best.1;
            best = (positions, dist);
        } else if dist < second {
            second = dist;
        }
    }
    (best.0, best.1, second)
}

/// Every bit pattern ranked by summed log-probability, best first.
pub fn exhaustive_ranking(p0: &[f64]) -> Vec<(Vec<u8>, f64)> {
    let len = p0.len();
    let mut all: Vec<(Vec<u8>, f64)> = (0..1u64 << len)
        .map(|w| {
            let bits: Vec<u8> = (0..len).map(|i| ((w >> (len - 1 - i)) & 1) as u8).collect();
            let metric = bits
                .iter()
                .zip(p0)
                .map(|(&b, &p)| if b == 0 { p } else { 1.0 - p }.max(1e-12).ln())
                .sum();
            (bits, metric)
        })
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all
}

/// Writes to the stderr handle directly so the line survives output capture.
pub fn note(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

/// One summary line per acceptance check.
pub fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    note(&format!("[{id:>2}] {verdict} {name}: {detail}"));
}
