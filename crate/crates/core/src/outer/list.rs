//! Beam list decoding of one CRC codeword from soft bit posteriors.

use std::cmp::Ordering;

use super::crc::CrcSpec;
use crate::error::{Error, Result};

/// Probabilities are floored here before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ListConfig {
    /// Beam width `S`.
    pub beam: usize,
}

impl ListConfig {
    pub fn new(beam: usize) -> Result<Self> {
        if beam == 0 {
            return Err(Error::InvalidParameter("list size S must be at least 1".into()));
        }
        Ok(Self { beam })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodewordStatus {
    Valid,
    DetectedError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ListOutcome {
    pub bits: Vec<u8>,
    pub status: CodewordStatus,
    /// 0-based rank of the accepted candidate in the final list.
    pub rank: Option<usize>,
    pub metric: f64,
}

/// Log-probability of choosing `bit` when `P(0) = p0`.
#[inline]
pub fn bit_metric(p0: f64, bit: u8) -> f64 {
    let p = if bit == 0 { p0 } else { 1.0 - p0 };
    p.max(PROB_FLOOR).ln()
}

/// Higher metric first, then lexicographically smaller bits.
pub fn candidate_order(a: &(Vec<u8>, f64), b: &(Vec<u8>, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.0.cmp(&b.0))
}

/// The `beam` best paths after a layer-by-layer search, best first.
pub fn list_candidates(posteriors: &[f64], beam: usize) -> Vec<(Vec<u8>, f64)> {
    let mut paths: Vec<(Vec<u8>, f64)> = vec![(Vec::with_capacity(posteriors.len()), 0.0)];
    let mut next = Vec::with_capacity(2 * beam);
    for &p0 in posteriors {
        next.clear();
        for (bits, metric) in &paths {
            for bit in [0u8, 1] {
                let mut b = bits.clone();
                b.push(bit);
                next.push((b, metric + bit_metric(p0, bit)));
            }
        }
        next.sort_by(candidate_order);
        next.truncate(beam);
        std::mem::swap(&mut paths, &mut next);
    }
    paths
}

/// First CRC-valid candidate in metric order, or the best candidate flagged
/// as a detected error.
pub fn list_decode_codeword(posteriors: &[f64], spec: &CrcSpec, config: &ListConfig) -> ListOutcome {
    let candidates = list_candidates(posteriors, config.beam);
    if let Some((rank, (bits, metric))) = candidates.iter().enumerate().find(|(_, (c, _))| spec.check(c)) {
        return ListOutcome {
            bits: bits.clone(),
            status: CodewordStatus::Valid,
            rank: Some(rank),
            metric: *metric,
        };
    }
    let (bits, metric) = candidates.into_iter().next().expect("beam is never empty");
    ListOutcome {
        bits,
        status: CodewordStatus::DetectedError,
        rank: None,
        metric,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outer::bits::hard_bits;

    fn exhaustive(posteriors: &[f64]) -> Vec<(Vec<u8>, f64)> {
        let n = posteriors.len();
        let mut all: Vec<(Vec<u8>, f64)> = (0..1u32 << n)
            .map(|v| {
                let bits: Vec<u8> = (0..n).map(|i| ((v >> (n - 1 - i)) & 1) as u8).collect();
                let m = bits
                    .iter()
                    .zip(posteriors)
                    .fold(0.0, |acc, (&b, &p)| acc + bit_metric(p, b));
                (bits, m)
            })
            .collect();
        all.sort_by(candidate_order);
        all
    }

    #[test]
    fn beam_of_one_is_hard_decision() {
        let spec = CrcSpec::from_koopman(0x7, 4).unwrap();
        let post = [0.9, 0.2, 0.5, 0.51, 0.49, 0.0, 1.0];
        let out = list_decode_codeword(&post, &spec, &ListConfig::new(1).unwrap());
        assert_eq!(out.bits, hard_bits(&post));
        assert_eq!(out.status == CodewordStatus::Valid, spec.check(&out.bits));
    }

    #[test]
    fn confident_valid_codeword() {
        let spec = CrcSpec::from_koopman(0x97, 8).unwrap();
        let cw = spec.encode(&[1, 0, 1, 1, 0, 0, 1, 0]);
        let post: Vec<f64> = cw.iter().map(|&b| if b == 0 { 0.995 } else { 0.005 }).collect();
        let out = list_decode_codeword(&post, &spec, &ListConfig::new(4).unwrap());
        assert_eq!(out.bits, cw);
        assert_eq!((out.status, out.rank), (CodewordStatus::Valid, Some(0)));
    }

    #[test]
    fn matches_exhaustive_ranking() {
        let post = [0.8, 0.3, 0.55, 0.9, 0.1, 0.65, 0.45, 0.7, 0.2, 0.6];
        let all = exhaustive(&post);
        for beam in [1, 2, 5, 16, 64] {
            assert_eq!(list_candidates(&post, beam), all[..beam].to_vec());
        }
    }

    #[test]
    fn zero_beam_rejected() {
        assert!(ListConfig::new(0).is_err());
    }
}
