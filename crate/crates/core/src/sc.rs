//! Spatially coupled SPARCs: the `(w, Lambda)` base matrix and decoding entry point.

use std::io::Write;

use num_complex::Complex64;

use crate::amp::{amp_decode_amplitudes, AmpConfig, AmpTrace};
use crate::error::{Error, Result};
use crate::operators::{DesignOperator, ScOperator};

/// Banded power template with `Lambda + w - 1` row-blocks and `Lambda`
/// column-blocks. Entry `(r, c)` (0-based) is `P (Lambda + w - 1) / w` when
/// `c <= r <= c + w - 1` and zero otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMatrix {
    width: usize,
    length: usize,
    power: f64,
}

pub fn base_matrix(width: usize, length: usize, power: f64) -> Result<BaseMatrix> {
    BaseMatrix::new(width, length, power)
}

impl BaseMatrix {
    pub fn new(width: usize, length: usize, power: f64) -> Result<Self> {
        if width == 0 || length == 0 {
            return Err(Error::InvalidParameter(format!(
                "coupling width and length must be at least 1, got w = {width}, Lambda = {length}"
            )));
        }
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidParameter(format!("power must be positive, got {power}")));
        }
        Ok(Self { width, length, power })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn row_blocks(&self) -> usize {
        self.length + self.width - 1
    }

    pub fn column_blocks(&self) -> usize {
        self.length
    }

    pub fn is_nonzero(&self, r: usize, c: usize) -> bool {
        c < self.length && c <= r && r < c + self.width
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        if self.is_nonzero(r, c) {
            self.power * self.row_blocks() as f64 / self.width as f64
        } else {
            0.0
        }
    }

    pub fn nonzeros(&self) -> usize {
        self.width * self.length
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.row_blocks())
            .map(|r| (0..self.length).map(|c| self.entry(r, c)).collect())
            .collect()
    }

    pub fn mean(&self) -> f64 {
        let sum: f64 = self.to_rows().iter().flatten().sum();
        sum / (self.row_blocks() * self.column_blocks()) as f64
    }

    /// One row per base-matrix row, comma separated.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for row in self.to_rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Dimensions of an SC design: `n = M_R L_R`, `M L = M_C L_C`, sections
/// mapped contiguously onto column-blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ScParams {
    pub base: BaseMatrix,
    pub rows_per_block: usize,
    pub sections: usize,
    pub section_size: usize,
}

impl ScParams {
    pub fn new(base: BaseMatrix, rows_per_block: usize, sections: usize, section_size: usize) -> Result<Self> {
        if rows_per_block == 0 || sections == 0 || section_size == 0 {
            return Err(Error::InvalidParameter("SC dimensions must be positive".into()));
        }
        if !sections.is_multiple_of(base.column_blocks()) {
            return Err(Error::InvalidParameter(format!(
                "L = {sections} sections do not split evenly over {} column blocks",
                base.column_blocks()
            )));
        }
        Ok(Self {
            base,
            rows_per_block,
            sections,
            section_size,
        })
    }

    /// Picks `M_R = ceil(n / L_R)` for the block length implied by `rate`
    /// over `info_bits` information bits.
    pub fn for_rate(
        base: BaseMatrix,
        sections: usize,
        section_size: usize,
        info_bits: usize,
        rate: f64,
    ) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")));
        }
        let n = (info_bits as f64 / rate).ceil() as usize;
        let rows_per_block = n.div_ceil(base.row_blocks()).max(1);
        Self::new(base, rows_per_block, sections, section_size)
    }

    pub fn block_length(&self) -> usize {
        self.rows_per_block * self.base.row_blocks()
    }

    pub fn cols_per_block(&self) -> usize {
        self.sections / self.base.column_blocks() * self.section_size
    }

    pub fn sections_per_block(&self) -> usize {
        self.sections / self.base.column_blocks()
    }

    /// Nonzero value carried by every section, `sqrt(n P / L)`.
    pub fn amplitude(&self) -> f64 {
        (self.block_length() as f64 * self.base.power() / self.sections as f64).sqrt()
    }

    pub fn operator(&self, seed: u64) -> Result<ScOperator> {
        ScOperator::new(&self.base, self.rows_per_block, self.sections, self.section_size, seed)
    }
}

/// AMP over an SC operator with block-resolved residual variances.
pub fn sc_decode(y: &[Complex64], params: &ScParams, op: &ScOperator, config: &AmpConfig) -> Result<AmpTrace> {
    if op.rows() != params.block_length() || op.sections() != params.sections || op.base() != &params.base {
        return Err(Error::InvalidParameter(
            "operator was not built from these SC parameters".into(),
        ));
    }
    let amps = vec![params.amplitude(); params.sections];
    amp_decode_amplitudes(y, op, &amps, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::awgn_channel;
    use crate::seed;
    use rand::Rng;

    #[test]
    fn diagonal_for_unit_width() {
        let b = base_matrix(1, 3, 1.5).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(b.entry(r, c), if r == c { 4.5 } else { 0.0 });
            }
        }
    }

    #[test]
    fn width_three_band() {
        let b = base_matrix(3, 4, 1.0).unwrap();
        assert_eq!((b.row_blocks(), b.column_blocks()), (6, 4));
        let expect = [
            [1, 0, 0, 0],
            [1, 1, 0, 0],
            [1, 1, 1, 0],
            [0, 1, 1, 1],
            [0, 0, 1, 1],
            [0, 0, 0, 1],
        ];
        for (r, row) in expect.iter().enumerate() {
            for (c, &nz) in row.iter().enumerate() {
                assert_eq!(b.entry(r, c), if nz == 1 { 2.0 } else { 0.0 });
            }
        }
        for c in 0..4 {
            assert_eq!((0..6).filter(|&r| b.is_nonzero(r, c)).count(), 3);
        }
    }

    #[test]
    fn mean_equals_power() {
        for w in 1..=6 {
            for lam in 1..=40 {
                let b = base_matrix(w, lam, 1.3).unwrap();
                assert_eq!(b.nonzeros() * b.row_blocks(), w * b.row_blocks() * b.column_blocks());
                assert!((b.mean() - 1.3).abs() <= 1e-12 * 1.3);
            }
        }
    }

    #[test]
    fn invalid_base() {
        assert!(base_matrix(0, 3, 1.0).is_err());
        assert!(base_matrix(2, 0, 1.0).is_err());
        assert!(base_matrix(2, 3, 0.0).is_err());
    }

    #[test]
    fn csv_dump() {
        let mut out = Vec::new();
        base_matrix(2, 2, 1.0).unwrap().write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1.5,0\n1.5,1.5\n0,1.5\n");
    }

    #[test]
    fn params_validation() {
        let b = base_matrix(2, 4, 1.0).unwrap();
        assert!(ScParams::new(b.clone(), 8, 6, 8).is_err());
        let p = ScParams::for_rate(b, 8, 16, 32, 0.5).unwrap();
        assert_eq!(p.rows_per_block, 13);
        assert_eq!(p.block_length(), 65);
        assert_eq!(p.cols_per_block(), 32);
    }

    #[test]
    fn noise_free_recovery() {
        let b = base_matrix(2, 4, 1.0).unwrap();
        let p = ScParams::new(b, 8, 4, 8).unwrap();
        let op = p.operator(5).unwrap();
        let mut rng = seed::rng(9, &[]);
        for _ in 0..20 {
            let pos: Vec<usize> = (0..4).map(|_| rng.random_range(0..8)).collect();
            let mut beta = vec![0.0; 32];
            for (s, &j) in pos.iter().enumerate() {
                beta[s * 8 + j] = p.amplitude();
            }
            let x = op.forward_real(&beta).unwrap();
            let y = awgn_channel(&x, 0.0, &mut rng).unwrap();
            let tr = sc_decode(&y, &p, &op, &AmpConfig::default()).unwrap();
            assert_eq!(tr.final_decisions(), pos);
        }
    }
}
