//! Secure transmit design for a MIMO wiretap channel with a malicious jammer.
//!
//! The jammer's interference at the legitimate receiver is whitened away so the
//! four-node system becomes an ordinary three-node wiretap channel. On top of
//! the equivalent channel the crate provides:
//!
//! * a target-rate design for an eavesdropper with unknown channel, built on an
//!   inverse water-filling power allocation ([`strategies::design_unknown_ecsi`]);
//! * a design for an eavesdropper with statistically known channel that maximizes
//!   the secrecy rate averaged over simulated eavesdropper channels
//!   ([`strategies::design_statistical_ecsi`]);
//! * a seeded, scheduling-independent Monte Carlo sweep harness
//!   ([`experiments::run_sweep`]) and the `wiretap` command line front end.
//!
//! All rates are in nats internally. Conversion to bits and from dB happens only
//! in [`cli`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod par;
pub mod powalloc;
pub mod rates;
pub mod strategies;
pub mod whitening;

pub use channel::{ChannelRealization, SystemConfig, TrialStream};
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use par::Execution;
pub use powalloc::{GainVector, PowerAllocation};
pub use rates::RateNats;
pub use strategies::{EcsiDistribution, InitialDimension, TransmitDesign};
pub use whitening::WhitenedChannel;
