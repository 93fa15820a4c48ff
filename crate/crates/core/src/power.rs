//! Power allocation across sections.
//!
//! The iterative scheme walks the blocks in order, giving each block the
//! smallest per-section power that the large-`M` decodability rule says it needs
//! at the current effective noise level, until the even split of what is left
//! clears that minimum.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    powers: Vec<f64>,
    total: f64,
    blocks: usize,
    rate_pa: f64,
}

impl PowerAllocation {
    /// `P_l = P / L` for every section.
    pub fn flat(sections: usize, total: f64) -> Result<Self> {
        if sections == 0 {
            return Err(Error::InvalidParameter("need at least one section".into()));
        }
        if !(total > 0.0) {
            return Err(Error::InvalidParameter(format!("P must be positive, got {total}")));
        }
        Ok(Self {
            powers: vec![total / sections as f64; sections],
            total,
            blocks: 1,
            rate_pa: 0.0,
        })
    }

    /// Wraps explicit per-section powers; they must be positive.
    pub fn from_powers(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() || powers.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidParameter(
                "section powers must be positive and finite".into(),
            ));
        }
        let total = powers.iter().sum();
        Ok(Self {
            blocks: powers.len(),
            powers,
            total,
            rate_pa: f64::NAN,
        })
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn rate_pa(&self) -> f64 {
        self.rate_pa
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn is_flat(&self) -> bool {
        self.powers.windows(2).all(|w| w[0] == w[1])
    }
}

/// Block sizes: `L / B` sections each, with any remainder as a final short block.
fn block_sizes(sections: usize, blocks: usize) -> Vec<usize> {
    let size = sections / blocks;
    let mut sizes = vec![size; blocks];
    if !sections.is_multiple_of(blocks) {
        sizes.push(sections % blocks);
    }
    sizes
}

/// Iterative block power allocation tuned by `rate_pa`.
pub fn iterative_allocation(
    sections: usize,
    blocks: usize,
    total: f64,
    sigma2: f64,
    rate_pa: f64,
) -> Result<PowerAllocation> {
    if sections == 0 || blocks == 0 || blocks > sections {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= B <= L, got B = {blocks}, L = {sections}"
        )));
    }
    if !(total > 0.0) || !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "P and sigma^2 must be positive (P = {total}, sigma^2 = {sigma2})"
        )));
    }
    if !(rate_pa >= 0.0) || !rate_pa.is_finite() {
        return Err(Error::InvalidParameter(format!("R_PA must be >= 0, got {rate_pa}")));
    }

    let l = sections as f64;
    let mut powers = vec![0.0; sections];
    let mut allocated = 0.0;
    let mut start = 0;
    for (b, size) in block_sizes(sections, blocks).into_iter().enumerate() {
        let remaining = total - allocated;
        let tau2 = sigma2 + remaining;
        let required = rate_pa * tau2 * LN_2 / l;
        let average = remaining / (sections - start) as f64;
        if average >= required {
            powers[start..].fill(average);
            return Ok(PowerAllocation {
                powers,
                total,
                blocks,
                rate_pa,
            });
        }
        if required * size as f64 > remaining {
            return Err(Error::InfeasibleAllocation {
                block: b,
                size,
                required,
                remaining,
            });
        }
        powers[start..start + size].fill(required);
        allocated += required * size as f64;
        start += size;
    }
    // the last block either spreads or fails the budget check above
    unreachable!("allocation loop always terminates inside the final block")
}

/// Large-`M` approximation `x(tau) = sum_l (P_l / P) 1{L P_l > R tau^2 ln 2}`.
pub fn asymptotic_x(alloc: &PowerAllocation, tau2: f64, rate: f64) -> f64 {
    let l = alloc.len() as f64;
    let threshold = rate * tau2 * LN_2;
    alloc
        .powers()
        .iter()
        .filter(|&&p| l * p > threshold)
        .map(|p| p / alloc.total())
        .sum::<f64>()
        .min(1.0)
}

/// `nu_l = 2 L P_l / (R tau^2 ln 2)`; the section counts in [`asymptotic_x`] iff `nu_l > 2`.
pub fn nu(alloc: &PowerAllocation, section: usize, tau2: f64, rate: f64) -> f64 {
    2.0 * alloc.len() as f64 * alloc.powers()[section] / (rate * tau2 * LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_pa_is_flat() {
        let a = iterative_allocation(100, 10, 2.5, 0.7, 0.0).unwrap();
        assert!(a.powers().iter().all(|&p| p == 2.5 / 100.0));
        assert!(a.is_flat());
    }

    #[test]
    fn hand_traced_example() {
        // tau0^2 = 3 -> 3 ln2 / 4 = 0.519860 per section in block 1,
        // tau1^2 = 1.960279 -> block 2 gets the even remainder 0.480140
        let a = iterative_allocation(4, 2, 2.0, 1.0, 1.0).unwrap();
        let expect = [0.519860, 0.519860, 0.480140, 0.480140];
        for (p, e) in a.powers().iter().zip(expect) {
            assert!((p - e).abs() < 1e-6, "{p} vs {e}");
        }
        let sum: f64 = a.powers().iter().sum();
        assert!((sum - 2.0).abs() < 1e-12 * 2.0);
    }

    #[test]
    fn single_block_flat_when_affordable() {
        // P >= R_PA (sigma^2 + P) ln 2 for the first comparison
        let a = iterative_allocation(8, 1, 10.0, 1.0, 1.0).unwrap();
        assert!(a.is_flat());
    }

    #[test]
    fn infeasible_rate_pa_is_an_error() {
        let err = iterative_allocation(10, 5, 1.0, 1.0, 50.0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleAllocation { block: 0, .. }));
    }

    #[test]
    fn remainder_forms_final_block() {
        assert_eq!(block_sizes(10, 3), vec![3, 3, 3, 1]);
        assert_eq!(block_sizes(12, 3), vec![4, 4, 4]);
        let a = iterative_allocation(10, 3, 4.0, 1.0, 1.2).unwrap();
        assert_eq!(a.len(), 10);
        let sum: f64 = a.powers().iter().sum();
        assert!((sum - 4.0).abs() < 1e-12 * 4.0);
    }

    #[test]
    fn asymptotic_x_examples() {
        let flat = PowerAllocation::flat(4, 1.0).unwrap();
        let r = 1.0;
        // P > R tau^2 ln2 -> 1, P < R tau^2 ln2 -> 0
        assert_eq!(asymptotic_x(&flat, 0.5 / LN_2, r), 1.0);
        assert_eq!(asymptotic_x(&flat, 2.0 / LN_2, r), 0.0);
        let two = PowerAllocation::from_powers(vec![0.4, 0.4, 0.1, 0.1]).unwrap();
        let x = asymptotic_x(&two, 1.0 / LN_2, r);
        assert!((x - 0.8).abs() < 1e-12);
    }

    #[test]
    fn nu_examples() {
        let flat = PowerAllocation::flat(4, 1.0).unwrap();
        // boundary P = R tau^2 ln 2
        let tau2 = 1.0 / LN_2;
        assert!((nu(&flat, 0, tau2, 1.0) - 2.0).abs() < 1e-12);
        let two = PowerAllocation::from_powers(vec![0.4, 0.4, 0.1, 0.1]).unwrap();
        assert!((nu(&two, 0, tau2, 1.0) - 3.2).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn feasible_allocations_are_full_and_nonincreasing(
                l in 1usize..300,
                b_frac in 0.01f64..1.0,
                p in 0.1f64..20.0,
                sigma2 in 0.05f64..5.0,
                r_frac in 0.0f64..1.2,
            ) {
                let b = ((l as f64 * b_frac).ceil() as usize).clamp(1, l);
                let cap = (1.0 + p / sigma2).log2();
                match iterative_allocation(l, b, p, sigma2, r_frac * cap) {
                    Ok(a) => {
                        let sum: f64 = a.powers().iter().sum();
                        prop_assert!((sum - p).abs() <= 1e-12 * p);
                        prop_assert!(a.powers().windows(2).all(|w| w[0] >= w[1]));
                        prop_assert!(a.powers().iter().all(|&x| x > 0.0));
                    }
                    Err(Error::InfeasibleAllocation { .. }) => {}
                    Err(e) => prop_assert!(false, "unexpected error {e}"),
                }
            }

            #[test]
            fn nu_matches_indicator(l in 1usize..50, tau2 in 0.1f64..10.0, r in 0.1f64..3.0, seed in 0u64..1000) {
                let powers: Vec<f64> = (0..l).map(|i| 0.01 + ((seed as usize * 31 + i * 17) % 97) as f64 / 97.0).collect();
                let a = PowerAllocation::from_powers(powers).unwrap();
                let x = asymptotic_x(&a, tau2, r);
                let via_nu: f64 = (0..l)
                    .filter(|&i| nu(&a, i, tau2, r) > 2.0)
                    .map(|i| a.powers()[i] / a.total())
                    .sum();
                prop_assert!((x - via_nu.min(1.0)).abs() < 1e-9);
            }
        }
    }
}
