//! CRC concatenation: interleaved group encoding, bit posteriors, beam list
//! decoding and the decode pipeline.

pub mod bits;
pub mod crc;
pub mod layout;
pub mod list;
pub mod metrics;
pub mod pipeline;

pub use bits::{hard_bits, section_to_bit_posteriors};
pub use crc::{crc_compute, CrcSpec};
pub use layout::{crc_group_encode, CheckPlacement, GroupingLayout};
pub use list::{list_candidates, list_decode_codeword, CodewordStatus, ListConfig, ListOutcome};
pub use metrics::{error_metrics, uncoded_metrics, ErrorMetrics};
pub use pipeline::{amp_hard_bits, decode_pipeline, stream_bit_posteriors, CodewordReport, OuterCode, PipelineOutput};
