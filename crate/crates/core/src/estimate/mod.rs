//! Least-squares estimation of the ratio `λ/μ` from weekly activity.
//!
//! Each observed week `x(k)` seeds one simulated week `x̂(k+1)`; the objective
//! compares it with the observed `x(k+1)`. The scalar ratio is fitted by
//! gradient descent with optional Newton steps, using central finite
//! differences for both derivatives and a halving line search that never
//! accepts an increase of the objective.

mod window;

use std::str::FromStr;

use thiserror::Error;

use crate::dynamics::{DynamicsError, DynamicsParams, EulerStepper};
use crate::graph::CollaborationNetwork;
use crate::preprocess::PreprocessError;
use crate::scalar::Scalar;

pub use window::{
    predict_weeks, read_ratio_csv, sliding_window_fit, write_ratio_csv, PredictionMode, RatioEntry, RatioSeries,
    WeeklyPrediction,
};

/// Iterates never go below this.
pub const MIN_RATIO: f64 = 1e-9;
/// Line-search halvings per iteration.
pub const MAX_HALVINGS: usize = 30;
/// Relative finite-difference step.
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("window has {got} weeks, at least {needed} are required")]
    WindowTooShort { got: usize, needed: usize },
    #[error("all observed activity is zero: the objective is constant and no ratio is identifiable")]
    Degenerate,
    #[error("objective is not finite at ratio {ratio} (simulation diverged); also tried {retry}")]
    NonFiniteObjective { ratio: f64, retry: f64 },
    #[error("no window converged ({windows} windows; first problem: {first_problem})")]
    NoWindowConverged { windows: usize, first_problem: String },
    #[error("invalid estimation config: {0}")]
    InvalidConfig(String),
    #[error("ratio series does not cover target week {0}")]
    MissingRatio(String),
    #[error(transparent)]
    Data(#[from] PreprocessError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// Squared error of the summed activity per transition.
    AggregateSum,
    /// Squared Euclidean norm of the per-user error per transition.
    PerUser,
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aggregate" | "aggregatesum" | "sum" => Ok(Self::AggregateSum),
            "peruser" | "per-user" | "user" => Ok(Self::PerUser),
            other => Err(format!("unknown objective {other:?} (aggregate or peruser)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveSpec<T> {
    pub kind: ObjectiveKind,
    /// Weight of the penalty `γ (κ₁ − ratio)²`.
    pub gamma: T,
}

impl<T: Scalar> Default for ObjectiveSpec<T> {
    fn default() -> Self {
        Self {
            kind: ObjectiveKind::AggregateSum,
            gamma: T::zero(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationConfig<T> {
    /// Weeks per fit window (data points, so `window_weeks − 1` transitions).
    pub window_weeks: usize,
    pub learning_rate: T,
    /// Stop once an accepted update is smaller than this.
    pub convergence_eps: T,
    pub max_iterations: usize,
    pub use_newton: bool,
    /// Starting ratio; `None` starts from κ₁.
    pub ratio_init: Option<T>,
    /// Integration controls; the ratio field is ignored.
    pub dynamics: DynamicsParams<T>,
}

impl<T: Scalar> Default for EstimationConfig<T> {
    fn default() -> Self {
        Self {
            window_weeks: 4,
            learning_rate: T::cast(1e-4),
            convergence_eps: T::cast(1e-12),
            max_iterations: 20_000,
            use_newton: true,
            ratio_init: None,
            dynamics: DynamicsParams::new(T::one()),
        }
    }
}

impl<T: Scalar> EstimationConfig<T> {
    pub fn validate(&self) -> Result<(), EstimateError> {
        let bad = |m: String| Err(EstimateError::InvalidConfig(m));
        if self.window_weeks < 2 {
            return bad(format!("window_weeks must be at least 2, got {}", self.window_weeks));
        }
        if !(self.learning_rate > T::zero()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.convergence_eps > T::zero()) {
            return bad(format!(
                "convergence eps must be positive, got {}",
                self.convergence_eps
            ));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if let Some(r) = self.ratio_init {
            if !(r > T::zero() && r.is_finite()) {
                return bad(format!("ratio_init must be positive, got {r}"));
            }
        }
        self.dynamics.validate()?;
        Ok(())
    }
}

/// Advances an observed week by one observation step at `ratio`.
pub fn simulate_one_week<T: Scalar>(
    net: &CollaborationNetwork,
    x_k: &[T],
    ratio: T,
    dynamics: &DynamicsParams<T>,
) -> Result<Vec<T>, DynamicsError> {
    let mut stepper = EulerStepper::new(net, dynamics.with_ratio(ratio))?;
    let mut x = x_k.to_vec();
    stepper.observe_step(&mut x)?;
    Ok(x)
}

/// The least-squares objective over one window of observed weeks.
///
/// `states[k]` is week `k` in network index order.
pub struct Objective<'a, T> {
    net: &'a CollaborationNetwork,
    states: &'a [Vec<T>],
    spec: ObjectiveSpec<T>,
    kappa1: T,
    dynamics: DynamicsParams<T>,
}

impl<'a, T: Scalar> Objective<'a, T> {
    pub fn new(
        net: &'a CollaborationNetwork,
        states: &'a [Vec<T>],
        spec: ObjectiveSpec<T>,
        kappa1: T,
        dynamics: DynamicsParams<T>,
    ) -> Result<Self, EstimateError> {
        if states.len() < 2 {
            return Err(EstimateError::WindowTooShort {
                got: states.len(),
                needed: 2,
            });
        }
        if let Some(bad) = states.iter().find(|s| s.len() != net.node_count()) {
            return Err(DynamicsError::LengthMismatch {
                expected: net.node_count(),
                got: bad.len(),
            }
            .into());
        }
        if spec.gamma < T::zero() {
            return Err(EstimateError::InvalidConfig(format!(
                "gamma must be >= 0, got {}",
                spec.gamma
            )));
        }
        Ok(Self {
            net,
            states,
            spec,
            kappa1,
            dynamics,
        })
    }

    pub fn transitions(&self) -> usize {
        self.states.len() - 1
    }

    /// Objective value; `+∞` if any simulated week diverges or the ratio is
    /// not positive.
    pub fn value(&self, ratio: T) -> T {
        if !(ratio > T::zero() && ratio.is_finite()) {
            return T::infinity();
        }
        let Ok(mut stepper) = EulerStepper::new(self.net, self.dynamics.with_ratio(ratio)) else {
            return T::infinity();
        };
        let mut acc = T::zero();
        let mut x = vec![T::zero(); self.net.node_count()];
        for pair in self.states.windows(2) {
            x.copy_from_slice(&pair[0]);
            if stepper.observe_step(&mut x).is_err() {
                return T::infinity();
            }
            let observed = &pair[1];
            acc += match self.spec.kind {
                ObjectiveKind::AggregateSum => {
                    let err = observed.iter().copied().sum::<T>() - x.iter().copied().sum::<T>();
                    err * err
                }
                ObjectiveKind::PerUser => observed
                    .iter()
                    .zip(&x)
                    .map(|(o, p)| {
                        let e = *o - *p;
                        e * e
                    })
                    .sum(),
            };
        }
        let mut j = acc / T::of_usize(self.transitions());
        if self.spec.gamma > T::zero() {
            let d = self.kappa1 - ratio;
            j += self.spec.gamma * d * d;
        }
        if j.is_nan() {
            T::infinity()
        } else {
            j
        }
    }

    /// `(J, J', J'')` at `ratio` by finite differences with step
    /// `1e-6 · max(1, ratio)`; one-sided near the lower domain edge.
    pub fn derivatives(&self, ratio: T) -> (T, T, T) {
        let h = T::cast(FD_STEP) * ratio.max(T::one());
        let j0 = self.value(ratio);
        let two = T::cast(2.0);
        if ratio - h > T::cast(MIN_RATIO) {
            let (jp, jm) = (self.value(ratio + h), self.value(ratio - h));
            (j0, (jp - jm) / (two * h), (jp - two * j0 + jm) / (h * h))
        } else {
            let (j1, j2) = (self.value(ratio + h), self.value(ratio + two * h));
            let g = (T::cast(-3.0) * j0 + T::cast(4.0) * j1 - j2) / (two * h);
            (j0, g, (j0 - two * j1 + j2) / (h * h))
        }
    }

    /// `−J'(ratio)`: the direction the optimizer moves the ratio.
    pub fn descent_direction(&self, ratio: T) -> T {
        -self.derivatives(ratio).1
    }
}

/// Objective value for one window; see [`Objective`].
pub fn objective<T: Scalar>(
    net: &CollaborationNetwork,
    states: &[Vec<T>],
    ratio: T,
    spec: ObjectiveSpec<T>,
    kappa1: T,
    dynamics: DynamicsParams<T>,
) -> Result<T, EstimateError> {
    Ok(Objective::new(net, states, spec, kappa1, dynamics)?.value(ratio))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub ratio: T,
    pub converged: bool,
    pub iterations: usize,
    pub final_objective: T,
    /// Objective after each accepted step, starting with the initial value.
    pub history: Vec<T>,
}

/// Fits the ratio on one window of observed weeks.
///
/// Starts at `cfg.ratio_init` (default κ₁), restarting once from `2κ₁` if the
/// objective is not finite there. Each iteration proposes a Newton step when
/// enabled and the curvature is positive, otherwise `−η J'`, and halves it up
/// to [`MAX_HALVINGS`] times until the objective does not increase. A gradient
/// step accepted at full length is doubled up to [`MAX_HALVINGS`] times while
/// the objective keeps decreasing. A failed
/// Newton search falls back to the gradient step. Iteration stops when the
/// accepted update is below `convergence_eps`, or when neither step can
/// decrease the objective (a numerical minimum, reported as converged).
pub fn fit_ratio<T: Scalar>(
    states: &[Vec<T>],
    net: &CollaborationNetwork,
    kappa1: T,
    cfg: &EstimationConfig<T>,
    spec: ObjectiveSpec<T>,
) -> Result<FitResult<T>, EstimateError> {
    cfg.validate()?;
    let obj = Objective::new(net, states, spec, kappa1, cfg.dynamics)?;
    if states.iter().all(|s| s.iter().all(|&v| v == T::zero())) {
        return Err(EstimateError::Degenerate);
    }

    let floor = T::cast(MIN_RATIO);
    let start = cfg.ratio_init.unwrap_or(kappa1).max(floor);
    let mut ratio = start;
    let mut current = obj.value(ratio);
    if !current.is_finite() {
        let retry = (T::cast(2.0) * kappa1).max(floor);
        ratio = retry;
        current = obj.value(ratio);
        if !current.is_finite() {
            return Err(EstimateError::NonFiniteObjective {
                ratio: start.as_f64(),
                retry: retry.as_f64(),
            });
        }
    }

    let mut history = vec![current];
    let mut converged = false;
    let mut iterations = 0;
    // returns the accepted point and whether the full step was taken
    let line_search = |ratio: T, current: T, step: T| -> Option<(T, T, bool)> {
        if !step.is_finite() || step == T::zero() {
            return None;
        }
        let mut s = step;
        for halving in 0..=MAX_HALVINGS {
            let candidate = (ratio + s).max(floor);
            let value = obj.value(candidate);
            if value <= current && candidate != ratio {
                return Some((candidate, value, halving == 0));
            }
            s *= T::cast(0.5);
        }
        None
    };
    // a full gradient step on a flat stretch is doubled while it keeps
    // strictly decreasing the objective
    let expand = |ratio: T, step: T, mut best: (T, T)| -> (T, T) {
        let mut s = step;
        for _ in 0..MAX_HALVINGS {
            s *= T::cast(2.0);
            let candidate = (ratio + s).max(floor);
            let value = obj.value(candidate);
            if !(value < best.1) {
                break;
            }
            best = (candidate, value);
            if candidate == floor {
                break;
            }
        }
        best
    };
    let gradient_search = |ratio: T, current: T, step: T| -> Option<(T, T)> {
        line_search(ratio, current, step).map(|(next, value, full)| {
            if full {
                expand(ratio, step, (next, value))
            } else {
                (next, value)
            }
        })
    };

    while iterations < cfg.max_iterations {
        iterations += 1;
        let (_, grad, curv) = obj.derivatives(ratio);
        let gradient_step = -cfg.learning_rate * grad;
        let accepted = if cfg.use_newton && curv > T::zero() && curv.is_finite() {
            line_search(ratio, current, -grad / curv)
                .map(|(next, value, _)| (next, value))
                .or_else(|| gradient_search(ratio, current, gradient_step))
        } else {
            gradient_search(ratio, current, gradient_step)
        };
        let Some((next, value)) = accepted else {
            converged = true;
            break;
        };
        let update = (next - ratio).abs();
        ratio = next;
        current = value;
        history.push(current);
        if update < cfg.convergence_eps {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        ratio,
        converged,
        iterations,
        final_objective: current,
        history,
    })
}
