//! Simulation core for a dual-switch low-power hybrid beamforming
//! transmitter: channel generation, power modelling, rate and efficiency
//! metrics, precoder design and Monte-Carlo sweeps.

pub mod channel;
pub mod config;
pub mod error;
pub mod hardware;
pub mod harness;
pub mod linalg;
pub mod precoding;
pub mod system;

pub use channel::{generate_channel, ChannelRealization, PathSet};
pub use config::{derive_seed, CsiMode, SystemConfig};
pub use error::{HbfError, Result};
pub use hardware::{DacResolution, PowerParams};
pub use precoding::{run_solver, Design, Metrics, SolverConfig, SolverInput, SolverKind};
pub use system::{LinkBudget, PrecoderSolution};
