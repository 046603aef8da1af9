//! End-to-end power, spectral efficiency and energy efficiency of a B5G cell
//! whose indoor users are served either through building-mounted arrays and
//! indoor access points (mmWave or LiFi) or directly by the outdoor massive
//! MIMO tier.

pub mod channel;
pub mod config;
pub mod error;
pub mod metrics;
pub mod power;
pub mod report;
pub mod scenario;

pub use config::{load_config, ConfigBundle, IapKind, Separation};
pub use error::{Error, Result};
