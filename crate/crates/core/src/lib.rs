//! Capacity bounds and Monte Carlo mutual-information estimates for
//! wireless networks with a fading interference field.

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod eta;
pub mod input;
pub mod mi;
pub mod network;
pub mod quadrature;
pub mod ratio;
pub mod rng;
pub mod stats;

pub use bounds::{applicable_bounds, BoundKind, CapacityBound};
pub use error::{Error, Result};
pub use eta::{eta_bounds, eta_squared, eta_star, EtaBounds, EtaSampler};
pub use input::{InputDistribution, InputFamily};
pub use network::{AlphaModel, AlphaSequence, Channel, NetworkConfig, Truncation};
pub use ratio::RatioLaw;
