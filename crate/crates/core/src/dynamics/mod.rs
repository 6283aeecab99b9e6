//! Dimensionless activity dynamics on a collaboration network.
//!
//! Each user's relative activity `x_i = a_i / a_c` evolves in dimensionless
//! time `τ = μ t` as
//!
//! ```text
//! dx_i/dτ = −(λ/μ) x_i + Σ_j A_ij · x_j / √(1 + x_j²)
//! ```
//!
//! The only free parameter is the ratio `λ/μ`. The inactive state `x = 0` is
//! attracting exactly when the ratio exceeds the adjacency spectral radius κ₁.
//! Dimensional quantities (`a`, `q`, `a_c`, `t`) appear only in the helpers
//! on [`PeerInfluenceParams`].

mod trace;

use thiserror::Error;

use crate::graph::CollaborationNetwork;
use crate::scalar::{max_abs, Scalar};

pub use trace::{ActivityState, SimulationSummary, SimulationTrace};

pub const DEFAULT_DTAU: f64 = 0.01;
pub const DEFAULT_TAU_PER_STEP: f64 = 1.0;
/// Any `|x_i|` above this halts integration as diverged.
pub const DIVERGENCE_BOUND: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid dynamics parameters: {0}")]
    InvalidParams(String),
    #[error("state has {got} entries but the network has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("at least one observation step is required")]
    NoSteps,
    #[error("activity diverged (|x| > {DIVERGENCE_BOUND:e} or non-finite) at tau = {tau}")]
    Diverged { tau: f64 },
}

/// Ratio `λ/μ` plus Euler controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsParams<T> {
    pub ratio: T,
    /// Euler step upper bound.
    pub dtau: T,
    /// Dimensionless time covered by one observation step (one week of data).
    pub tau_per_step: T,
}

impl<T: Scalar> DynamicsParams<T> {
    /// Default controls: `dtau = 0.01`, `tau_per_step = 1`.
    pub fn new(ratio: T) -> Self {
        Self {
            ratio,
            dtau: T::cast(DEFAULT_DTAU),
            tau_per_step: T::cast(DEFAULT_TAU_PER_STEP),
        }
    }

    pub fn with_ratio(self, ratio: T) -> Self {
        Self { ratio, ..self }
    }

    pub fn with_dtau(self, dtau: T) -> Self {
        Self { dtau, ..self }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::InvalidParams(msg));
        if !(self.ratio > T::zero() && self.ratio.is_finite()) {
            return bad(format!("ratio must be positive and finite, got {}", self.ratio));
        }
        if !(self.dtau > T::zero() && self.dtau.is_finite()) {
            return bad(format!("dtau must be positive, got {}", self.dtau));
        }
        if !(self.tau_per_step >= self.dtau && self.tau_per_step.is_finite()) {
            return bad(format!(
                "tau_per_step ({}) must be at least dtau ({})",
                self.tau_per_step, self.dtau
            ));
        }
        Ok(())
    }

    /// Number of Euler sub-steps per observation step, `⌈tau_per_step / dtau⌉`,
    /// with quotients within 1e-9 of an integer rounded to it.
    pub fn substeps(&self) -> usize {
        let raw = (self.tau_per_step / self.dtau).as_f64();
        let nearest = raw.round();
        let n = if (raw - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            raw.ceil()
        };
        (n as usize).max(1)
    }

    /// The actual sub-step length, `tau_per_step / substeps` (never above `dtau`).
    pub fn substep_len(&self) -> T {
        self.tau_per_step / T::of_usize(self.substeps())
    }
}

/// Saturating peer influence in dimensionless form, `x / √(1 + x²)`.
pub fn peer_influence<T: Scalar>(x: T) -> T {
    x / T::one().hypot(x)
}

/// Dimensional peer-influence parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeerInfluenceParams<T> {
    /// Peer Influence Intensity: the saturation level of `g`.
    pub q: T,
    /// Critical Activity: the soft threshold of `g`.
    pub a_c: T,
}

impl<T: Scalar> PeerInfluenceParams<T> {
    pub fn new(q: T, a_c: T) -> Result<Self, DynamicsError> {
        if !(q > T::zero() && a_c > T::zero()) {
            return Err(DynamicsError::InvalidParams(format!(
                "q and a_c must be positive, got q={q}, a_c={a_c}"
            )));
        }
        Ok(Self { q, a_c })
    }

    /// Peer Influence Growth `μ = q / a_c`.
    pub fn mu(&self) -> T {
        self.q / self.a_c
    }

    /// Dimensional influence `g(a) = q a / √(a_c² + a²)`.
    pub fn influence(&self, a: T) -> T {
        self.q * a / self.a_c.hypot(a)
    }

    pub fn relative_activity(&self, a: T) -> T {
        a / self.a_c
    }

    pub fn activity(&self, x: T) -> T {
        x * self.a_c
    }

    /// `τ = μ t`.
    pub fn dimensionless_time(&self, t: T) -> T {
        self.mu() * t
    }

    /// The model parameter `λ/μ` for a decay rate `λ`.
    pub fn ratio_for_decay(&self, lambda: T) -> T {
        lambda / self.mu()
    }
}

/// `dg/da = q a_c² / (a_c² + a²)^{3/2}`.
///
/// Written as `μ (a_c / r)³` with `r = hypot(a_c, a)`, so the value at `a = 0`
/// is exactly `μ`.
pub fn influence_growth_rate<T: Scalar>(a: T, p: &PeerInfluenceParams<T>) -> T {
    let s = p.a_c / p.a_c.hypot(a);
    p.mu() * s * s * s
}

fn check_len<T>(net: &CollaborationNetwork, x: &[T]) -> Result<(), DynamicsError> {
    if x.len() != net.node_count() {
        return Err(DynamicsError::LengthMismatch {
            expected: net.node_count(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Right-hand side `−ratio·x + A·g(x)`.
pub fn derivative<T: Scalar>(net: &CollaborationNetwork, x: &[T], ratio: T) -> Result<Vec<T>, DynamicsError> {
    check_len(net, x)?;
    let mut rhs = Rhs::new(net.node_count());
    let mut out = vec![T::zero(); x.len()];
    rhs.eval(net, x, ratio, &mut out);
    Ok(out)
}

/// Scratch space for repeated right-hand-side evaluations.
struct Rhs<T> {
    influence: Vec<T>,
}

impl<T: Scalar> Rhs<T> {
    fn new(n: usize) -> Self {
        Self {
            influence: vec![T::zero(); n],
        }
    }

    fn eval(&mut self, net: &CollaborationNetwork, x: &[T], ratio: T, out: &mut [T]) {
        for (g, &xi) in self.influence.iter_mut().zip(x) {
            *g = peer_influence(xi);
        }
        net.apply_adjacency_into(&self.influence, out);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o -= ratio * xi;
        }
    }
}

/// Explicit Euler stepper bound to one network and parameter set.
pub struct EulerStepper<'a, T> {
    net: &'a CollaborationNetwork,
    params: DynamicsParams<T>,
    h: T,
    substeps: usize,
    rhs: Rhs<T>,
    slope: Vec<T>,
    elapsed: T,
}

impl<'a, T: Scalar> EulerStepper<'a, T> {
    pub fn new(net: &'a CollaborationNetwork, params: DynamicsParams<T>) -> Result<Self, DynamicsError> {
        params.validate()?;
        let n = net.node_count();
        Ok(Self {
            net,
            params,
            h: params.substep_len(),
            substeps: params.substeps(),
            rhs: Rhs::new(n),
            slope: vec![T::zero(); n],
            elapsed: T::zero(),
        })
    }

    pub fn params(&self) -> &DynamicsParams<T> {
        &self.params
    }

    /// One Euler sub-step in place. Returns `false` if the state left the
    /// divergence bound.
    pub fn substep(&mut self, x: &mut [T]) -> bool {
        self.rhs.eval(self.net, x, self.params.ratio, &mut self.slope);
        let bound = T::cast(DIVERGENCE_BOUND);
        self.elapsed += self.h;
        let mut ok = true;
        for (xi, &s) in x.iter_mut().zip(&self.slope) {
            *xi += self.h * s;
            if !(xi.abs() <= bound) {
                ok = false;
            }
        }
        ok
    }

    /// Advances `x` by one observation step (`tau_per_step`).
    pub fn observe_step(&mut self, x: &mut [T]) -> Result<(), DynamicsError> {
        check_len(self.net, x)?;
        for _ in 0..self.substeps {
            if !self.substep(x) {
                return Err(DynamicsError::Diverged {
                    tau: self.elapsed.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Dimensionless time integrated so far.
    pub fn elapsed(&self) -> T {
        self.elapsed
    }

    /// Right-hand side at `x` as of the last call to [`substep`](Self::substep).
    pub fn last_slope(&self) -> &[T] {
        &self.slope
    }
}

/// Integrates `n_steps` observation steps from `x0`.
///
/// `states[0]` is the initial state and `states[k]` the state after `k`
/// observation steps. On divergence the trace stops at the last finite
/// observation and `diverged` is set.
pub fn euler_integrate<T: Scalar>(
    net: &CollaborationNetwork,
    x0: &[T],
    params: DynamicsParams<T>,
    n_steps: usize,
) -> Result<SimulationTrace<T>, DynamicsError> {
    check_len(net, x0)?;
    if n_steps == 0 {
        return Err(DynamicsError::NoSteps);
    }
    let mut stepper = EulerStepper::new(net, params)?;
    let mut trace = SimulationTrace::start(ActivityState {
        x: x0.to_vec(),
        tau: T::zero(),
    });
    let mut x = x0.to_vec();
    for step in 1..=n_steps {
        if stepper.observe_step(&mut x).is_err() {
            trace.diverged = true;
            break;
        }
        trace.push(ActivityState {
            x: x.clone(),
            tau: params.tau_per_step * T::of_usize(step),
        });
    }
    Ok(trace)
}

/// Stability of the inactive fixed point `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// `κ₁ < ratio`: all activity dies out.
    Stable,
    /// `κ₁ ≥ ratio`; `marginal` marks exact equality.
    Unstable { marginal: bool },
}

impl Stability {
    pub fn is_stable(self) -> bool {
        self == Self::Stable
    }
}

pub fn classify_stability<T: Scalar>(kappa1: T, ratio: T) -> Stability {
    if kappa1 < ratio {
        Stability::Stable
    } else {
        Stability::Unstable {
            marginal: kappa1 == ratio,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixedPointError {
    #[error("no active fixed point: activity decays to zero (tau = {tau})")]
    DecaysToZero { tau: f64 },
    #[error("no fixed point within tau = {max_tau} (last ‖dx/dτ‖∞ = {residual:e})")]
    Exhausted { max_tau: f64, residual: f64 },
    #[error("integration diverged at tau = {tau}")]
    Diverged { tau: f64 },
    #[error(transparent)]
    Invalid(#[from] DynamicsError),
}

/// Integrates from `x_init` until `‖dx/dτ‖∞ < tol` and returns the state, or
/// reports that the trajectory heads to zero instead.
///
/// A converged state with `‖x‖∞ ≤ 100·tol` counts as the inactive fixed point.
pub fn find_active_fixed_point<T: Scalar>(
    net: &CollaborationNetwork,
    ratio: T,
    x_init: &[T],
    tol: T,
    max_tau: T,
) -> Result<Vec<T>, FixedPointError> {
    check_len(net, x_init)?;
    if x_init.iter().any(|&v| !(v > T::zero())) {
        return Err(DynamicsError::InvalidParams("x_init must be entrywise positive".into()).into());
    }
    if !(tol > T::zero()) {
        return Err(DynamicsError::InvalidParams(format!("tol must be positive, got {tol}")).into());
    }
    let params = DynamicsParams::new(ratio);
    let mut stepper = EulerStepper::new(net, params)?;
    let h = params.substep_len();
    let zero_floor = tol * T::cast(100.0);
    let tiny = T::min_positive_value().sqrt();

    let mut x = x_init.to_vec();
    let mut tau = T::zero();
    let mut residual = T::infinity();
    while tau < max_tau {
        let ok = stepper.substep(&mut x);
        // the slope was evaluated at the pre-step state
        residual = max_abs(stepper.last_slope());
        if residual < tol {
            let magnitude = max_abs(&x);
            return if magnitude <= zero_floor {
                Err(FixedPointError::DecaysToZero { tau: tau.as_f64() })
            } else {
                Ok(x)
            };
        }
        tau += h;
        if !ok {
            return Err(FixedPointError::Diverged { tau: tau.as_f64() });
        }
        if max_abs(&x) < tiny {
            return Err(FixedPointError::DecaysToZero { tau: tau.as_f64() });
        }
    }
    Err(FixedPointError::Exhausted {
        max_tau: max_tau.as_f64(),
        residual: residual.as_f64(),
    })
}

/// Amplitude of one eigenmode of the linearised system,
/// `c0 · exp((κ_r − ratio) τ)`.
pub fn linearized_coefficient_decay<T: Scalar>(kappa_r: T, ratio: T, tau: T, c0: T) -> T {
    c0 * ((kappa_r - ratio) * tau).exp()
}
