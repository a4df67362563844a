//! Multiple-relay selection for two-hop networks with partial
//! decode-and-forward and two-level superposition coding.
//!
//! Outage is estimated by Monte Carlo over Rayleigh fading and by high-SNR
//! closed forms; the closed forms drive relay placement, power allocation
//! and the diversity predictions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diversity;
pub mod error;
pub mod netmodel;
pub mod outage;
pub mod placement;
pub mod rng;
pub mod sccode;
pub mod select;

pub use error::{Error, Result};
pub use netmodel::{
    ChannelDraw, LinkGains, NodePosition, PathLossModel, RelayId, RelayRegion, Topology,
};
pub use outage::{OutageEstimate, RelayChooser};
pub use sccode::{CodingConfig, RelayMode, ThresholdRates};
pub use select::{PowerAllocation, PowerConstraints, Selection};
