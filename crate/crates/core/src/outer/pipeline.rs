//! AMP followed by CRC-aided list decoding, with an optional second AMP pass
//! that pins every section whose codewords all passed the CRC.

use std::io::Write;

use super::bits::{hard_bits, section_to_bit_posteriors};
use super::crc::CrcSpec;
use super::layout::GroupingLayout;
use super::list::{list_decode_codeword, CodewordStatus, ListConfig};
use crate::amp::{amp_decode, AmpConfig, AmpTrace};
use crate::error::{check_len, Result};
use crate::operators::DesignOperator;
use crate::params::position_map;
use crate::power::PowerAllocation;

#[derive(Debug, Clone, PartialEq)]
pub struct OuterCode {
    pub layout: GroupingLayout,
    pub crc: CrcSpec,
    pub list: ListConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodewordReport {
    pub index: usize,
    pub status: CodewordStatus,
    pub rank: Option<usize>,
    /// 0 for the first pass, 1 when settled after the second AMP run.
    pub round: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// Decoded transmitted bits, `(L + N_g r) log2 M`.
    pub stream: Vec<u8>,
    /// Information bits, `L log2 M`.
    pub info_bits: Vec<u8>,
    pub reports: Vec<CodewordReport>,
    /// Bitwise hard decisions of the first AMP pass, transmitted order.
    pub hard_stream: Vec<u8>,
    /// Iterations of each AMP pass.
    pub amp_iterations: Vec<usize>,
    pub pinned_sections: usize,
}

impl PipelineOutput {
    pub fn statuses(&self) -> Vec<CodewordStatus> {
        self.reports.iter().map(|r| r.status).collect()
    }

    pub fn write_diagnostics_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "codeword,status,rank,round")?;
        for r in &self.reports {
            let status = match r.status {
                CodewordStatus::Valid => "valid",
                CodewordStatus::DetectedError => "detected-error",
            };
            let rank = r.rank.map(|k| k.to_string()).unwrap_or_default();
            writeln!(w, "{},{status},{rank},{}", r.index, r.round)?;
        }
        Ok(())
    }
}

/// `P(bit = 0)` for every bit of the transmitted stream, from an AMP estimate.
pub fn stream_bit_posteriors(beta: &[f64], amplitudes: &[f64], section_size: usize) -> Result<Vec<f64>> {
    check_len("estimate", amplitudes.len() * section_size, beta.len())?;
    let mut out = Vec::new();
    let mut buf = vec![0.0; section_size];
    for (sec, &a) in beta.chunks(section_size).zip(amplitudes) {
        for (b, &v) in buf.iter_mut().zip(sec) {
            *b = v / a;
        }
        out.extend(section_to_bit_posteriors(&buf)?);
    }
    Ok(out)
}

/// Bitwise hard decisions of a plain AMP run, transmitted order.
pub fn amp_hard_bits(trace: &AmpTrace, amplitudes: &[f64]) -> Result<Vec<u8>> {
    Ok(hard_bits(&stream_bit_posteriors(
        &trace.beta,
        amplitudes,
        trace.section_size,
    )?))
}

fn decode_codewords(
    outer: &OuterCode,
    posteriors: &[f64],
    stream: &mut [u8],
    reports: &mut [CodewordReport],
    round: usize,
    only: Option<&[bool]>,
) {
    let mut post = Vec::new();
    for cw in 0..outer.layout.num_codewords() {
        if only.is_some_and(|redo| !redo[cw]) {
            continue;
        }
        let idx = outer.layout.codeword_bit_indices(cw);
        post.clear();
        post.extend(idx.iter().map(|&i| posteriors[i]));
        let out = list_decode_codeword(&post, &outer.crc, &outer.list);
        for (&i, &b) in idx.iter().zip(&out.bits) {
            stream[i] = b;
        }
        reports[cw] = CodewordReport {
            index: cw,
            status: out.status,
            rank: out.rank,
            round,
        };
    }
}

pub fn decode_pipeline(
    y: &[num_complex::Complex64],
    op: &dyn DesignOperator,
    alloc: &PowerAllocation,
    outer: &OuterCode,
    amp_config: &AmpConfig,
    amp_again: bool,
) -> Result<PipelineOutput> {
    let layout = &outer.layout;
    let log2_m = layout.log2_m();
    let m = op.section_size();
    check_len("transmitted sections", layout.total_sections(), op.sections())?;
    check_len("section size", 1 << log2_m, m)?;
    let n = op.rows() as f64;
    let amps: Vec<f64> = alloc.powers().iter().map(|p| (n * p).sqrt()).collect();

    let trace = amp_decode(y, op, alloc, amp_config)?;
    let posteriors = stream_bit_posteriors(&trace.beta, &amps, m)?;
    let hard_stream = hard_bits(&posteriors);
    let mut stream = vec![0u8; layout.total_sections() * log2_m];
    let blank = CodewordReport {
        index: 0,
        status: CodewordStatus::DetectedError,
        rank: None,
        round: 0,
    };
    let mut reports = vec![blank; layout.num_codewords()];
    decode_codewords(outer, &posteriors, &mut stream, &mut reports, 0, None);
    let mut amp_iterations = vec![trace.iterations];
    let mut pinned_sections = 0;

    let failed: Vec<bool> = reports
        .iter()
        .map(|r| r.status == CodewordStatus::DetectedError)
        .collect();
    if amp_again && failed.iter().any(|&f| f) {
        let group_ok: Vec<bool> = (0..layout.num_groups())
            .map(|g| !failed[g * log2_m..(g + 1) * log2_m].iter().any(|&f| f))
            .collect();
        let mut pinned = Vec::new();
        for slot in 0..layout.total_sections() {
            if group_ok[layout.slot_group(slot)] {
                let chunk = &stream[slot * log2_m..(slot + 1) * log2_m];
                pinned.push((slot, position_map(chunk, log2_m)?));
            }
        }
        if !pinned.is_empty() {
            pinned_sections = pinned.len();
            let config = AmpConfig {
                pinned,
                ..amp_config.clone()
            };
            let again = amp_decode(y, op, alloc, &config)?;
            amp_iterations.push(again.iterations);
            let posteriors = stream_bit_posteriors(&again.beta, &amps, m)?;
            decode_codewords(outer, &posteriors, &mut stream, &mut reports, 1, Some(&failed));
        }
    }

    Ok(PipelineOutput {
        info_bits: layout.extract_info(&stream)?,
        stream,
        reports,
        hard_stream,
        amp_iterations,
        pinned_sections,
    })
}
