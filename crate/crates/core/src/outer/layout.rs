//! Interleaved grouping of message sections into CRC codewords.
//!
//! The `L` information sections are split into `N_g` groups. With
//! `N = floor(L / K)` full groups, group `j < N` holds sections
//! `j, N + j, 2N + j, ...` (K of them) and the last `L mod K` sections, if
//! any, form one short trailing group. Each group gets `r` check sections.
//! Bit-lane `b` of a group (bit `b` of every section's chunk) is one CRC
//! codeword: the group's lane-`b` information bits followed by the lane-`b`
//! bits of its `r` check sections.

use serde::{Deserialize, Serialize};

use super::crc::CrcSpec;
use crate::error::{check_len, Error, Result};

/// Where the check sections go in the transmitted section order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CheckPlacement {
    /// After all information sections.
    #[default]
    End,
    /// Between the first and second half of the information sections.
    Middle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingLayout {
    info_sections: usize,
    group_size: usize,
    checks_per_group: usize,
    log2_m: usize,
    placement: CheckPlacement,
    /// Information section indices (message order) per group.
    groups: Vec<Vec<usize>>,
    /// Transmitted index of each information section.
    info_slot: Vec<usize>,
    /// Transmitted index of check section `k` of group `g`, at `g * r + k`.
    check_slot: Vec<usize>,
    /// Owning group of each transmitted section.
    slot_group: Vec<usize>,
}

impl GroupingLayout {
    pub fn new(
        info_sections: usize,
        group_size: usize,
        checks_per_group: usize,
        log2_m: usize,
        placement: CheckPlacement,
    ) -> Result<Self> {
        if info_sections == 0 || group_size == 0 || log2_m == 0 {
            return Err(Error::InvalidParameter(format!(
                "need L, K, log2 M >= 1 (L = {info_sections}, K = {group_size}, log2 M = {log2_m})"
            )));
        }
        let full = info_sections / group_size;
        let short = info_sections % group_size;
        let mut groups: Vec<Vec<usize>> = (0..full)
            .map(|j| (0..group_size).map(|i| i * full + j).collect())
            .collect();
        if short > 0 {
            groups.push((full * group_size..info_sections).collect());
        }
        let n_groups = groups.len();
        let r = checks_per_group;
        let n_checks = n_groups * r;
        let split = match placement {
            CheckPlacement::End => info_sections,
            CheckPlacement::Middle => info_sections / 2,
        };
        let info_slot: Vec<usize> = (0..info_sections)
            .map(|j| if j < split { j } else { j + n_checks })
            .collect();
        let mut check_slot = vec![0; n_checks];
        for g in 0..n_groups {
            for k in 0..r {
                check_slot[g * r + k] = split + k * n_groups + g;
            }
        }
        let mut slot_group = vec![0; info_sections + n_checks];
        for (g, members) in groups.iter().enumerate() {
            for &j in members {
                slot_group[info_slot[j]] = g;
            }
            for k in 0..r {
                slot_group[check_slot[g * r + k]] = g;
            }
        }
        Ok(Self {
            info_sections,
            group_size,
            checks_per_group,
            log2_m,
            placement,
            groups,
            info_slot,
            check_slot,
            slot_group,
        })
    }

    pub fn info_sections(&self) -> usize {
        self.info_sections
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn checks_per_group(&self) -> usize {
        self.checks_per_group
    }

    pub fn log2_m(&self) -> usize {
        self.log2_m
    }

    pub fn placement(&self) -> CheckPlacement {
        self.placement
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// `L + N_g r`.
    pub fn total_sections(&self) -> usize {
        self.info_sections + self.check_slot.len()
    }

    /// `N_g log2 M`.
    pub fn num_codewords(&self) -> usize {
        self.groups.len() * self.log2_m
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    pub fn info_slot(&self, section: usize) -> usize {
        self.info_slot[section]
    }

    pub fn check_slot(&self, group: usize, k: usize) -> usize {
        self.check_slot[group * self.checks_per_group + k]
    }

    pub fn slot_group(&self, slot: usize) -> usize {
        self.slot_group[slot]
    }

    pub fn is_check_slot(&self, slot: usize) -> bool {
        self.check_slot.contains(&slot)
    }

    /// Transmitted slots of the information sections, message order.
    pub fn info_slots(&self) -> &[usize] {
        &self.info_slot
    }

    /// Codeword `cw = g log2 M + lane`.
    pub fn codeword_group_lane(&self, cw: usize) -> (usize, usize) {
        (cw / self.log2_m, cw % self.log2_m)
    }

    /// Transmitted slots contributing to a codeword, in codeword bit order
    /// (information bits first, then checks).
    pub fn codeword_slots(&self, cw: usize) -> Vec<usize> {
        let (g, _) = self.codeword_group_lane(cw);
        self.groups[g]
            .iter()
            .map(|&j| self.info_slot[j])
            .chain((0..self.checks_per_group).map(|k| self.check_slot(g, k)))
            .collect()
    }

    /// Bit positions within a stream of `total_sections() * log2 M` bits.
    pub fn codeword_bit_indices(&self, cw: usize) -> Vec<usize> {
        let (_, lane) = self.codeword_group_lane(cw);
        self.codeword_slots(cw)
            .into_iter()
            .map(|s| s * self.log2_m + lane)
            .collect()
    }

    fn check_spec(&self, spec: &CrcSpec) -> Result<()> {
        if spec.degree() != self.checks_per_group {
            return Err(Error::InvalidParameter(format!(
                "layout has r = {} check sections but the CRC has degree {}",
                self.checks_per_group,
                spec.degree()
            )));
        }
        Ok(())
    }

    /// Systematic group encoding of `L log2 M` message bits into the
    /// `(L + N_g r) log2 M` transmitted bits.
    pub fn encode(&self, bits: &[u8], spec: &CrcSpec) -> Result<Vec<u8>> {
        check_len("message bits", self.info_sections * self.log2_m, bits.len())?;
        self.check_spec(spec)?;
        let b = self.log2_m;
        let mut out = vec![0u8; self.total_sections() * b];
        for (j, &slot) in self.info_slot.iter().enumerate() {
            out[slot * b..(slot + 1) * b].copy_from_slice(&bits[j * b..(j + 1) * b]);
        }
        let mut lane_bits = Vec::with_capacity(self.group_size);
        for (g, members) in self.groups.iter().enumerate() {
            for lane in 0..b {
                lane_bits.clear();
                lane_bits.extend(members.iter().map(|&j| bits[j * b + lane]));
                for (k, c) in spec.compute(&lane_bits).into_iter().enumerate() {
                    out[self.check_slot(g, k) * b + lane] = c;
                }
            }
        }
        Ok(out)
    }

    /// Drops the check sections from a transmitted bit stream.
    pub fn extract_info(&self, stream: &[u8]) -> Result<Vec<u8>> {
        check_len("encoded bits", self.total_sections() * self.log2_m, stream.len())?;
        let b = self.log2_m;
        Ok(self
            .info_slot
            .iter()
            .flat_map(|&s| stream[s * b..(s + 1) * b].iter().copied())
            .collect())
    }

    pub fn codeword_bits(&self, stream: &[u8], cw: usize) -> Vec<u8> {
        self.codeword_bit_indices(cw).into_iter().map(|i| stream[i]).collect()
    }
}

pub fn crc_group_encode(bits: &[u8], layout: &GroupingLayout, spec: &CrcSpec) -> Result<Vec<u8>> {
    layout.encode(bits, spec)
}
