//! Cyclic redundancy checks over GF(2), most significant bit first.

use crate::error::{Error, Result};

/// Generator polynomial plus the number of information bits it protects.
///
/// `generator` holds every coefficient including the leading `x^r` term,
/// e.g. `0x12F` for `x^8 + x^5 + x^3 + x^2 + x + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrcSpec {
    degree: usize,
    generator: u64,
    info_bits: usize,
    table: Vec<u64>,
}

impl CrcSpec {
    /// Koopman notation drops the constant term and keeps the leading one:
    /// `0x97` is `x^8 + x^5 + x^3 + x^2 + x + 1`.
    pub fn from_koopman(koopman: u64, info_bits: usize) -> Result<Self> {
        if koopman == 0 || koopman >> 62 != 0 {
            return Err(Error::InvalidParameter(format!(
                "unsupported Koopman polynomial {koopman:#x}"
            )));
        }
        Self::from_generator((koopman << 1) | 1, info_bits)
    }

    /// Parses `"0x97"` or `"97"`.
    pub fn from_koopman_str(hex: &str, info_bits: usize) -> Result<Self> {
        let digits = hex.trim().trim_start_matches("0x").trim_start_matches("0X");
        let value = u64::from_str_radix(digits, 16)
            .map_err(|e| Error::InvalidParameter(format!("bad CRC polynomial {hex:?}: {e}")))?;
        Self::from_koopman(value, info_bits)
    }

    pub fn from_generator(generator: u64, info_bits: usize) -> Result<Self> {
        if generator & 1 == 0 || generator < 2 {
            return Err(Error::InvalidParameter(format!(
                "generator {generator:#x} must have degree >= 1 and a constant term"
            )));
        }
        if info_bits == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        let degree = 63 - generator.leading_zeros() as usize;
        let mut spec = Self {
            degree,
            generator,
            info_bits,
            table: Vec::new(),
        };
        if degree >= 8 {
            spec.table = (0..256u64).map(|byte| spec.table_entry(byte)).collect();
        }
        Ok(spec)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn info_bits(&self) -> usize {
        self.info_bits
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    pub fn koopman(&self) -> u64 {
        self.generator >> 1
    }

    /// Coefficients from `x^r` down to `x^0`.
    pub fn coefficients(&self) -> Vec<u8> {
        (0..=self.degree)
            .rev()
            .map(|k| ((self.generator >> k) & 1) as u8)
            .collect()
    }

    fn mask(&self) -> u64 {
        (1u64 << self.degree) - 1
    }

    fn table_entry(&self, byte: u64) -> u64 {
        (0..8).fold(byte << (self.degree - 8), |reg, _| self.clock(reg, 0))
    }

    fn clock(&self, reg: u64, bit: u64) -> u64 {
        let fb = ((reg >> (self.degree - 1)) & 1) ^ bit;
        let reg = (reg << 1) & self.mask();
        if fb == 1 {
            reg ^ (self.generator & self.mask())
        } else {
            reg
        }
    }

    /// Remainder of `m(x) x^r` where `m` is the low `len` bits of `word`,
    /// most significant first.
    pub fn remainder_word(&self, word: u64, len: usize) -> u64 {
        debug_assert!(len <= 64);
        let mut reg = 0;
        let mut left = len;
        if self.table.is_empty() {
            while left > 0 {
                left -= 1;
                reg = self.clock(reg, (word >> left) & 1);
            }
            return reg;
        }
        while !left.is_multiple_of(8) {
            left -= 1;
            reg = self.clock(reg, (word >> left) & 1);
        }
        let shift = self.degree - 8;
        while left > 0 {
            left -= 8;
            let byte = (word >> left) & 0xFF;
            let idx = ((reg >> shift) ^ byte) & 0xFF;
            reg = ((reg << 8) & self.mask()) ^ self.table[idx as usize];
        }
        reg
    }

    /// Remainder of `m(x) x^r` for a bit vector, first bit highest order.
    pub fn remainder(&self, bits: &[u8]) -> u64 {
        bits.iter().fold(0, |reg, &b| self.clock(reg, b as u64 & 1))
    }

    /// The `r` check bits, highest order first.
    pub fn compute(&self, bits: &[u8]) -> Vec<u8> {
        let rem = self.remainder(bits);
        (0..self.degree).rev().map(|k| ((rem >> k) & 1) as u8).collect()
    }

    /// Message followed by its check bits.
    pub fn encode(&self, bits: &[u8]) -> Vec<u8> {
        let mut out = bits.to_vec();
        out.extend(self.compute(bits));
        out
    }

    /// True when the codeword polynomial is divisible by the generator.
    pub fn check(&self, codeword: &[u8]) -> bool {
        self.remainder(codeword) == 0
    }

    pub fn check_word(&self, word: u64, len: usize) -> bool {
        self.remainder_word(word, len) == 0
    }
}

pub fn crc_compute(bits: &[u8], spec: &CrcSpec) -> Vec<u8> {
    spec.compute(bits)
}
