//! Bit, section and codeword error counts.

use super::layout::GroupingLayout;
use super::list::CodewordStatus;
use crate::error::{check_len, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorMetrics {
    pub bit_errors: usize,
    pub bits: usize,
    pub section_errors: usize,
    pub sections: usize,
    pub detected: usize,
    /// CRC-valid codewords that differ from what was sent.
    pub undetected: usize,
}

impl ErrorMetrics {
    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    pub fn secer(&self) -> f64 {
        ratio(self.section_errors, self.sections)
    }

    pub fn merge(&mut self, other: &ErrorMetrics) {
        self.bit_errors += other.bit_errors;
        self.bits += other.bits;
        self.section_errors += other.section_errors;
        self.sections += other.sections;
        self.detected += other.detected;
        self.undetected += other.undetected;
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Bit and section errors between two information bit streams.
pub fn uncoded_metrics(decoded: &[u8], truth: &[u8], log2_m: usize) -> Result<ErrorMetrics> {
    check_len("decoded bits", truth.len(), decoded.len())?;
    let bit_errors = decoded.iter().zip(truth).filter(|(a, b)| a != b).count();
    let section_errors = decoded
        .chunks(log2_m)
        .zip(truth.chunks(log2_m))
        .filter(|(a, b)| a != b)
        .count();
    Ok(ErrorMetrics {
        bit_errors,
        bits: truth.len(),
        section_errors,
        sections: truth.len() / log2_m,
        ..ErrorMetrics::default()
    })
}

/// BER and SecER over information sections plus detected/undetected codeword
/// counts, from full transmitted bit streams.
pub fn error_metrics(
    decoded_stream: &[u8],
    truth_stream: &[u8],
    layout: &GroupingLayout,
    statuses: &[CodewordStatus],
) -> Result<ErrorMetrics> {
    check_len("decoded stream", truth_stream.len(), decoded_stream.len())?;
    check_len("codeword statuses", layout.num_codewords(), statuses.len())?;
    let mut m = uncoded_metrics(
        &layout.extract_info(decoded_stream)?,
        &layout.extract_info(truth_stream)?,
        layout.log2_m(),
    )?;
    for (cw, status) in statuses.iter().enumerate() {
        match status {
            CodewordStatus::DetectedError => m.detected += 1,
            CodewordStatus::Valid => {
                let idx = layout.codeword_bit_indices(cw);
                if idx.iter().any(|&i| decoded_stream[i] != truth_stream[i]) {
                    m.undetected += 1;
                }
            }
        }
    }
    Ok(m)
}
