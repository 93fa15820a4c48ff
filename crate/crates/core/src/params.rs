//! Code geometry, the sparse message vector, and the bit-chunk ↔ position map.
//!
//! Bit convention: within a chunk of `log2(M)` bits, bit `k` (zero-based) carries
//! weight `2^k`, so the first bit of a chunk is the least significant. Positions
//! are zero-based column offsets inside a section.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::power::PowerAllocation;

/// Geometry of a SPARC: `L` sections of `M` columns, block length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparcParams {
    sections: usize,
    section_size: usize,
    block_length: usize,
    power: f64,
    sigma2: f64,
}

impl SparcParams {
    /// Builds parameters from a requested rate; `n = ceil(L log2 M / R)` and the
    /// stored rate is recomputed from the integer `n`.
    pub fn from_rate(sections: usize, section_size: usize, rate: f64, power: f64, sigma2: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")));
        }
        validate_section_size(section_size)?;
        let bits = sections * section_size.trailing_zeros() as usize;
        let n = (bits as f64 / rate).ceil() as usize;
        Self::with_block_length(sections, section_size, n, power, sigma2)
    }

    pub fn with_block_length(
        sections: usize,
        section_size: usize,
        block_length: usize,
        power: f64,
        sigma2: f64,
    ) -> Result<Self> {
        if sections == 0 {
            return Err(Error::InvalidParameter("L must be at least 1".into()));
        }
        validate_section_size(section_size)?;
        if block_length == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidParameter(format!("P must be positive, got {power}")));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma^2 must be positive, got {sigma2}"
            )));
        }
        Ok(Self {
            sections,
            section_size,
            block_length,
            power,
            sigma2,
        })
    }

    pub fn sections(&self) -> usize {
        self.sections
    }

    pub fn section_size(&self) -> usize {
        self.section_size
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Bits carried by one section.
    pub fn log2_m(&self) -> usize {
        self.section_size.trailing_zeros() as usize
    }

    /// Total message bits `L log2 M`.
    pub fn message_bits(&self) -> usize {
        self.sections * self.log2_m()
    }

    /// Number of columns `M L` of the design matrix.
    pub fn columns(&self) -> usize {
        self.sections * self.section_size
    }

    /// Rate in bits per channel use per dimension, `L log2 M / n`.
    pub fn rate(&self) -> f64 {
        self.message_bits() as f64 / self.block_length as f64
    }

    /// `P / (sigma^2 R)`.
    pub fn snr_b(&self) -> f64 {
        self.power / (self.sigma2 * self.rate())
    }

    /// `log2(1 + P / sigma^2)`.
    pub fn capacity(&self) -> f64 {
        (1.0 + self.power / self.sigma2).log2()
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma^2 must be positive, got {sigma2}"
            )));
        }
        self.sigma2 = sigma2;
        Ok(self)
    }

    /// Rounds `n` up to the next multiple of `m`. Returns the adjusted params and
    /// whether anything changed.
    pub fn round_block_length_to(mut self, m: usize) -> (Self, bool) {
        let rounded = self.block_length.div_ceil(m) * m;
        let changed = rounded != self.block_length;
        self.block_length = rounded;
        (self, changed)
    }

    /// Per-section nonzero values `sqrt(n P_l)`.
    pub fn amplitudes(&self, alloc: &PowerAllocation) -> Result<Vec<f64>> {
        check_len("power allocation", self.sections, alloc.len())?;
        let n = self.block_length as f64;
        Ok(alloc.powers().iter().map(|p| (n * p).sqrt()).collect())
    }
}

fn validate_section_size(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "M must be a power of two >= 2, got {m}"
        )));
    }
    Ok(())
}

/// Maps a chunk of `log2 M` bits to a zero-based position in `0..M`.
pub fn position_map(chunk: &[u8], log2_m: usize) -> Result<usize> {
    check_len("bit chunk", log2_m, chunk.len())?;
    Ok(chunk
        .iter()
        .enumerate()
        .fold(0usize, |acc, (k, &b)| acc | (((b & 1) as usize) << k)))
}

/// Inverse of [`position_map`].
pub fn position_to_chunk(position: usize, log2_m: usize) -> Vec<u8> {
    (0..log2_m).map(|k| ((position >> k) & 1) as u8).collect()
}

/// One nonzero per section: (zero-based position, value).
#[derive(Debug, Clone, PartialEq)]
pub struct MessageVector {
    section_size: usize,
    sections: Vec<(usize, f64)>,
}

impl MessageVector {
    pub fn new(section_size: usize, sections: Vec<(usize, f64)>) -> Result<Self> {
        for &(pos, value) in &sections {
            if pos >= section_size {
                return Err(Error::InvalidParameter(format!(
                    "position {pos} outside section of size {section_size}"
                )));
            }
            if !(value >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative section value {value}")));
            }
        }
        Ok(Self { section_size, sections })
    }

    /// Rebuilds the message from positions and amplitudes.
    pub fn from_positions(section_size: usize, positions: &[usize], amplitudes: &[f64]) -> Result<Self> {
        check_len("amplitudes", positions.len(), amplitudes.len())?;
        Self::new(
            section_size,
            positions.iter().copied().zip(amplitudes.iter().copied()).collect(),
        )
    }

    pub fn section_size(&self) -> usize {
        self.section_size
    }

    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    pub fn sections(&self) -> &[(usize, f64)] {
        &self.sections
    }

    pub fn positions(&self) -> Vec<usize> {
        self.sections.iter().map(|&(p, _)| p).collect()
    }

    /// Dense `M L` expansion.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.section_size * self.sections.len()];
        for (l, &(pos, value)) in self.sections.iter().enumerate() {
            out[l * self.section_size + pos] = value;
        }
        out
    }

    pub fn to_dense_complex(&self) -> Vec<Complex64> {
        self.to_dense().into_iter().map(|v| Complex64::new(v, 0.0)).collect()
    }

    /// Recovers the bitstream (least-significant-first chunks).
    pub fn to_bits(&self) -> Vec<u8> {
        let log2_m = self.section_size.trailing_zeros() as usize;
        self.sections
            .iter()
            .flat_map(|&(p, _)| position_to_chunk(p, log2_m))
            .collect()
    }
}

/// Splits `bits` into `L` chunks and places `sqrt(n P_l)` at each mapped position.
pub fn build_message(bits: &[u8], alloc: &PowerAllocation, params: &SparcParams) -> Result<MessageVector> {
    check_len("bitstream", params.message_bits(), bits.len())?;
    let amps = params.amplitudes(alloc)?;
    let log2_m = params.log2_m();
    let sections = bits
        .chunks(log2_m)
        .zip(amps)
        .map(|(chunk, a)| Ok((position_map(chunk, log2_m)?, a)))
        .collect::<Result<Vec<_>>>()?;
    MessageVector::new(params.section_size(), sections)
}

/// Uniform random bits.
pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

/// Positions of a bitstream without attaching amplitudes.
pub fn bits_to_positions(bits: &[u8], log2_m: usize) -> Result<Vec<usize>> {
    if log2_m == 0 || !bits.len().is_multiple_of(log2_m) {
        return Err(Error::InvalidParameter(format!(
            "bitstream of length {} does not split into {log2_m}-bit chunks",
            bits.len()
        )));
    }
    bits.chunks(log2_m).map(|c| position_map(c, log2_m)).collect()
}

pub fn positions_to_bits(positions: &[usize], log2_m: usize) -> Vec<u8> {
    positions.iter().flat_map(|&p| position_to_chunk(p, log2_m)).collect()
}
