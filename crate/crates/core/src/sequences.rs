//! Perfect polyphase sequences (Frank, Milewski) and periodic autocorrelation.
//!
//! Phases are reduced with exact integer arithmetic before the trigonometric
//! call, so entries stay accurate to a few ulp even for lengths in the thousands.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceFamily {
    Frank { d: usize },
    Milewski { d: usize, h: u32 },
}

impl fmt::Display for SequenceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceFamily::Frank { d } => write!(f, "frank(d={d})"),
            SequenceFamily::Milewski { d, h } => write!(f, "milewski(d={d}, h={h})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerfectSequence {
    family: SequenceFamily,
    entries: Vec<Complex64>,
}

impl PerfectSequence {
    pub fn family(&self) -> SequenceFamily {
        self.family
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `exp(i pi num / den)` with `num` reduced mod `2 den` first.
fn half_turn_phase(num: u128, den: u128) -> Complex64 {
    let reduced = num % (2 * den);
    Complex64::from_polar(1.0, PI * reduced as f64 / den as f64)
}

/// Frank sequence of length `d^2`: entry `j + k d` is `exp(2 pi i j k / d)`.
pub fn frank_sequence(d: usize) -> Result<PerfectSequence> {
    if d == 0 {
        return Err(Error::InvalidParameter("Frank sequence needs d >= 1".into()));
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
    for k in 0..d {
        for j in 0..d {
            entries[j + k * d] = half_turn_phase(2 * (j * k % d) as u128, d as u128);
        }
    }
    Ok(PerfectSequence {
        family: SequenceFamily::Frank { d },
        entries,
    })
}

/// Milewski sequence of length `d^(2h+1)`.
pub fn milewski_sequence(d: usize, h: u32) -> Result<PerfectSequence> {
    if d == 0 {
        return Err(Error::InvalidParameter("Milewski sequence needs d >= 1".into()));
    }
    let dh = (d as u128)
        .checked_pow(h)
        .ok_or_else(|| Error::InvalidParameter("Milewski length overflows".into()))?;
    let dh1 = dh * d as u128;
    let len = dh * dh1;
    if len > (1u128 << 32) {
        return Err(Error::InvalidParameter(format!("Milewski length {len} too large")));
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); len as usize];
    let even = d.is_multiple_of(2);
    for k in 0..dh1 {
        for j in 0..dh {
            let inner = if even { 2 * j + k * dh } else { 2 * j + (k + 1) * dh };
            entries[(j + k * dh) as usize] = half_turn_phase(k * inner, dh1);
        }
    }
    Ok(PerfectSequence {
        family: SequenceFamily::Milewski { d, h },
        entries,
    })
}

/// Cyclic correlation `sum_i seq[i] conj(seq[(i + shift) mod N])`.
pub fn periodic_autocorrelation(seq: &[Complex64], shift: usize) -> Result<Complex64> {
    let n = seq.len();
    if shift >= n {
        return Err(Error::InvalidParameter(format!(
            "shift {shift} out of range for length {n}"
        )));
    }
    Ok((0..n).map(|i| seq[i] * seq[(i + shift) % n].conj()).sum())
}

/// All lags of [`periodic_autocorrelation`] at once, via FFT.
pub fn autocorrelation_profile(seq: &[Complex64]) -> Vec<Complex64> {
    let n = seq.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let mut buf = seq.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    // the FFT route yields sum_i seq[i + s] conj(seq[i]); conjugate to match
    buf.iter().map(|v| v.conj() * scale).collect()
}

/// Largest nontrivial autocorrelation magnitude.
pub fn max_offpeak_autocorrelation(seq: &[Complex64]) -> f64 {
    autocorrelation_profile(seq)
        .iter()
        .skip(1)
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

fn integer_sqrt(m: usize) -> Option<usize> {
    let r = (m as f64).sqrt().round() as usize;
    (r.saturating_sub(1)..=r + 1).find(|&d| d * d == m)
}

/// Picks a perfect sequence of length `m`: Frank when `m` is a perfect square,
/// otherwise Milewski with `h >= 1` and the smallest base `d`.
pub fn sequence_for_length(m: usize) -> Result<PerfectSequence> {
    if m == 0 {
        return Err(Error::UnsupportedLength { len: m });
    }
    if let Some(d) = integer_sqrt(m) {
        return frank_sequence(d);
    }
    let mut d = 2usize;
    while d * d * d <= m {
        let mut h = 1u32;
        let mut len = d * d * d;
        loop {
            if len == m {
                return milewski_sequence(d, h);
            }
            match len.checked_mul(d * d) {
                Some(next) if next <= m => {
                    len = next;
                    h += 1;
                }
                _ => break,
            }
        }
        d += 1;
    }
    Err(Error::UnsupportedLength { len: m })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn frank_small() {
        let s = frank_sequence(1).unwrap();
        assert_eq!(s.entries(), &[Complex64::new(1.0, 0.0)]);
        let s = frank_sequence(2).unwrap();
        let expect = [1.0, 1.0, 1.0, -1.0];
        for (e, x) in s.entries().iter().zip(expect) {
            assert!(close(*e, Complex64::new(x, 0.0), 1e-15));
        }
        assert!(frank_sequence(0).is_err());
    }

    #[test]
    fn milewski_small() {
        let s = milewski_sequence(1, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert!(close(s.entries()[0], Complex64::new(1.0, 0.0), 1e-15));
        let s = milewski_sequence(2, 0).unwrap();
        assert!(close(s.entries()[0], Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(s.entries()[1], Complex64::new(0.0, 1.0), 1e-15));
        assert_eq!(milewski_sequence(2, 1).unwrap().len(), 8);
        assert_eq!(milewski_sequence(3, 1).unwrap().len(), 27);
        assert!(milewski_sequence(0, 1).is_err());
    }

    #[test]
    fn autocorrelation_examples() {
        let ones = [Complex64::new(1.0, 0.0); 2];
        assert_eq!(periodic_autocorrelation(&ones, 1).unwrap(), Complex64::new(2.0, 0.0));
        let f = frank_sequence(2).unwrap();
        assert!(periodic_autocorrelation(f.entries(), 1).unwrap().norm() < 1e-12);
        assert!(periodic_autocorrelation(f.entries(), 2).unwrap().norm() < 1e-12);
        let z = periodic_autocorrelation(f.entries(), 0).unwrap();
        assert!(close(z, Complex64::new(4.0, 0.0), 1e-12));
        assert!(periodic_autocorrelation(f.entries(), 4).is_err());
        let m = milewski_sequence(2, 1).unwrap();
        for s in 1..8 {
            assert!(periodic_autocorrelation(m.entries(), s).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn fft_profile_matches_direct() {
        for seq in [
            frank_sequence(5).unwrap(),
            milewski_sequence(3, 1).unwrap(),
            milewski_sequence(6, 0).unwrap(),
        ] {
            // perturb so nontrivial lags are nonzero and the comparison means something
            let x: Vec<_> = seq
                .entries()
                .iter()
                .enumerate()
                .map(|(i, v)| v * (1.0 + 0.1 * i as f64))
                .collect();
            let prof = autocorrelation_profile(&x);
            for (s, &p) in prof.iter().enumerate() {
                let d = periodic_autocorrelation(&x, s).unwrap();
                assert!(close(p, d, 1e-9), "lag {s}: {p} vs {d}");
            }
        }
    }

    #[test]
    fn family_selection() {
        assert_eq!(
            sequence_for_length(512).unwrap().family(),
            SequenceFamily::Milewski { d: 2, h: 4 }
        );
        assert_eq!(
            sequence_for_length(1024).unwrap().family(),
            SequenceFamily::Frank { d: 32 }
        );
        assert_eq!(
            sequence_for_length(8).unwrap().family(),
            SequenceFamily::Milewski { d: 2, h: 1 }
        );
        assert_eq!(
            sequence_for_length(27).unwrap().family(),
            SequenceFamily::Milewski { d: 3, h: 1 }
        );
        assert!(matches!(
            sequence_for_length(6),
            Err(Error::UnsupportedLength { len: 6 })
        ));
        assert!(sequence_for_length(2).is_err());
        assert!(sequence_for_length(0).is_err());
    }

    #[test]
    fn unit_modulus_and_perfect() {
        for d in 1..=12 {
            let f = frank_sequence(d).unwrap();
            assert!(f.entries().iter().all(|e| (e.norm() - 1.0).abs() < 1e-12));
            let n = f.len() as f64;
            let energy: f64 = autocorrelation_profile(f.entries())
                .iter()
                .skip(1)
                .map(|c| c.norm_sqr())
                .sum();
            assert!(energy < 1e-16 * n * n, "frank {d}: {energy}");
        }
    }
}
