//! Exact-in-distribution Monte Carlo simulation of MIPP paths and of the
//! MIPP-driven risk surplus.
//!
//! Every random quantity is drawn from a counter-based stream addressed by
//! (master_seed, stream_id); paths are independent work units with private
//! streams, so results are bit-identical regardless of thread count or
//! scheduling. Ruin inside a Brownian segment is detected exactly through the
//! Brownian-bridge minimum law, so there is no time-stepping discretization
//! bias anywhere.

mod martingale;
mod mipp_path;
mod risk;
mod stream;

pub use martingale::{martingale_check, MartingaleKind};
pub use mipp_path::{sample_v1, simulate_mipp, Path};
pub use risk::{
    brownian_first_passage, estimate_ruin, simulate_risk, simulate_risk_traced, RiskOutcome,
    RuinEstimate, TraceEvent, TraceRow,
};
pub use stream::{PathStream, StreamSeed};
