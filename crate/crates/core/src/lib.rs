//! Spectral-truncation toolkit for linear time-invariant control systems
//! with irregular inputs.
//!
//! The crate represents a control system Σ(A, B) through finitely many
//! adjoint eigenmodes and makes the associated extension theory computable:
//!
//! - Sobolev-tower norms on the state side and H^M / dual norms on the
//!   control side ([`spectral`], [`signal`], [`input`]);
//! - generalized final states and state curves for controls given as L²
//!   densities, Dirac atoms and distributional derivatives ([`duality`]);
//! - observability/controllability duality at finite truncation, including
//!   Douglas-lemma range checks, minimum-norm controls, and the heat-wave
//!   observability-defect scan ([`observability`]);
//! - the concrete systems the experiments run on ([`models`]).
//!
//! All numerics are generic over the real scalar (`f32` or `f64`) through
//! [`scalar::Scalar`]; the concrete aliases below fix the common `f64`
//! instantiation. Every operation is a pure function of immutable inputs,
//! and reductions run in a fixed (index-ordered) summation order, so results
//! are deterministic and safe to share across threads.

pub mod duality;
pub mod error;
pub mod input;
pub mod linalg;
pub mod models;
pub mod observability;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod signal;
pub mod spectral;

pub use error::{Error, Result};

/// Complex number over `f64`.
pub type C64 = scalar::Cx<f64>;
/// Complex number over `f32`.
pub type C32 = scalar::Cx<f32>;

pub type SpectralSystem64 = spectral::SpectralSystem<f64>;
pub type TowerVector64 = spectral::TowerVector<f64>;
pub type TimeSignal64 = signal::TimeSignal<f64>;
pub type GeneralizedInput64 = input::GeneralizedInput<f64>;

pub type SpectralSystem32 = spectral::SpectralSystem<f32>;
pub type TowerVector32 = spectral::TowerVector<f32>;
pub type TimeSignal32 = signal::TimeSignal<f32>;
pub type GeneralizedInput32 = input::GeneralizedInput<f32>;
