//! Time reversal of Markov chains and quantum channels.
//!
//! The crate covers reverse-time transition matrices and the space-time inner
//! product for finite chains, the reversal of Kraus maps with respect to a
//! reference state, space-time harmonic processes, operator Jensen
//! inequalities, Umegaki and Belavkin-Staszewski relative entropies with their
//! H-theorems, and path-space weights for sequential projective measurements.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the scalar type.

pub mod battery;
pub mod channel;
pub mod classical;
pub mod error;
pub mod harmonic;
pub mod linalg;
pub mod pathspace;
pub mod random;
pub mod scalar;

pub use channel::{ChannelFlow, DensityMatrix, KrausKind, KrausMap};
pub use classical::{ChainFlow, Distribution, SpaceTimeFunction, StochasticMatrix};
pub use error::{Error, Result};
pub use harmonic::{DualChannelFlow, OperatorProcess, Orientation};
pub use linalg::{CMatrix, Hermitian, Interval, ScalarFn, SpectralDecomposition};
pub use pathspace::{PathDistribution, PathSpaceSpec, ProjectorFamily};
pub use scalar::{Real, Tolerances};

/// Crate version, recorded in report provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Hermitian64 = Hermitian<f64>;
pub type Hermitian32 = Hermitian<f32>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type KrausMap64 = KrausMap<f64>;
pub type KrausMap32 = KrausMap<f32>;
pub type ChannelFlow64 = ChannelFlow<f64>;
pub type ChannelFlow32 = ChannelFlow<f32>;
pub type StochasticMatrix64 = StochasticMatrix<f64>;
pub type StochasticMatrix32 = StochasticMatrix<f32>;
pub type Distribution64 = Distribution<f64>;
pub type Distribution32 = Distribution<f32>;
pub type ChainFlow64 = ChainFlow<f64>;
pub type ChainFlow32 = ChainFlow<f32>;
pub type OperatorProcess64 = OperatorProcess<f64>;
pub type OperatorProcess32 = OperatorProcess<f32>;
pub type DualChannelFlow64 = DualChannelFlow<f64>;
pub type DualChannelFlow32 = DualChannelFlow<f32>;
pub type ProjectorFamily64 = ProjectorFamily<f64>;
pub type ProjectorFamily32 = ProjectorFamily<f32>;
pub type PathSpaceSpec64 = PathSpaceSpec<f64>;
pub type PathSpaceSpec32 = PathSpaceSpec<f32>;
