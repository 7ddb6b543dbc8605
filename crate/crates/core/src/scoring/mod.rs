//! Diarization scoring: RTTM reading/writing and DER (missed speech,
//! false alarm, speaker confusion) with a boundary collar and optimal
//! speaker mapping.

mod der;
mod hungarian;
mod rttm;

pub use der::{der, score_corpus, DERReport, DEFAULT_COLLAR};
pub use hungarian::{max_agreement_assignment, min_cost_assignment};
pub use rttm::{emit_rttm, parse_rttm, parse_rttm_text};
