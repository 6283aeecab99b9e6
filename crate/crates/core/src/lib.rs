//! Activity dynamics on collaboration networks.
//!
//! Users of a collaboration network lose activity at rate `λ` and regain it
//! from active neighbours through a saturating influence. In dimensionless
//! form the model has the single parameter `λ/μ`; the inactive state is
//! stable exactly when `λ/μ` exceeds the network's spectral radius κ₁.
//!
//! Modules:
//! - [`graph`]: networks and their construction from event logs
//! - [`spectral`]: κ₁ by power iteration, small dense spectra
//! - [`dynamics`]: the ODE, Euler integration, stability, fixed points
//! - [`preprocess`]: events to smoothed weekly activity
//! - [`estimate`]: least-squares fitting of `λ/μ` over sliding windows
//! - [`metrics`]: System Mass, Activity Momentum and RMSE
//! - [`synth`]: karate club and synthetic scenarios
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

// `!(x > 0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod estimate;
pub mod graph;
pub mod metrics;
pub mod preprocess;
pub mod scalar;
pub mod spectral;
pub mod synth;

pub use graph::{CollaborationNetwork, ContributionEvent, EventKind, UserId};
pub use scalar::Scalar;

pub type ActivitySeries = preprocess::ActivitySeries<f64>;
pub type DynamicsParams = dynamics::DynamicsParams<f64>;
pub type PeerInfluenceParams = dynamics::PeerInfluenceParams<f64>;
pub type SimulationTrace = dynamics::SimulationTrace<f64>;
pub type ActivityState = dynamics::ActivityState<f64>;
pub type SpectralResult = spectral::SpectralResult<f64>;
pub type EstimationConfig = estimate::EstimationConfig<f64>;
pub type ObjectiveSpec = estimate::ObjectiveSpec<f64>;
pub type RatioSeries = estimate::RatioSeries<f64>;
pub type RatioEntry = estimate::RatioEntry<f64>;
pub type FitResult = estimate::FitResult<f64>;
pub type WeeklyPrediction = estimate::WeeklyPrediction<f64>;
