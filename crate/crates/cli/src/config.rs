//! Flat `key = value` run configuration for `estimate`.

use std::path::Path;

use anyhow::{bail, Context, Result};
use collab_activity::estimate::ObjectiveKind;
use collab_activity::{DynamicsParams, EstimationConfig, ObjectiveSpec};

/// Values that may come from the config file or the command line. Anything
/// left unset keeps the library default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub window_weeks: Option<usize>,
    pub learning_rate: Option<f64>,
    pub convergence_eps: Option<f64>,
    pub max_iterations: Option<usize>,
    pub use_newton: Option<bool>,
    pub ratio_init: Option<f64>,
    pub dtau: Option<f64>,
    pub tau_per_step: Option<f64>,
    pub objective: Option<ObjectiveKind>,
    pub gamma: Option<f64>,
}

/// Recognised keys, with accepted aliases.
pub const KEYS: &[(&str, &[&str])] = &[
    ("window_weeks", &["T", "t_weeks"]),
    ("learning_rate", &["eta"]),
    ("convergence_eps", &["eps"]),
    ("max_iterations", &["max_iter"]),
    ("use_newton", &["newton"]),
    ("ratio_init", &[]),
    ("dtau", &[]),
    ("tau_per_step", &[]),
    ("objective", &[]),
    ("gamma", &[]),
];

fn canonical(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .find(|(name, aliases)| *name == key || aliases.contains(&key))
        .map(|(name, _)| *name)
}

impl Overrides {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key = value, got {raw:?}", i + 1);
            };
            let (key, value) = (key.trim(), value.trim().trim_matches('"'));
            out.set(key, value).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| anyhow::anyhow!("invalid value {v:?} for {key}"))
        }
        match canonical(key) {
            Some("window_weeks") => self.window_weeks = Some(num(key, value)?),
            Some("learning_rate") => self.learning_rate = Some(num(key, value)?),
            Some("convergence_eps") => self.convergence_eps = Some(num(key, value)?),
            Some("max_iterations") => self.max_iterations = Some(num(key, value)?),
            Some("use_newton") => self.use_newton = Some(num(key, value)?),
            Some("ratio_init") => self.ratio_init = Some(num(key, value)?),
            Some("dtau") => self.dtau = Some(num(key, value)?),
            Some("tau_per_step") => self.tau_per_step = Some(num(key, value)?),
            Some("objective") => self.objective = Some(value.parse().map_err(anyhow::Error::msg)?),
            Some("gamma") => self.gamma = Some(num(key, value)?),
            _ => bail!("unknown key {key:?}"),
        }
        Ok(())
    }

    /// `other` wins wherever it is set.
    pub fn merged_with(self, other: &Self) -> Self {
        Self {
            window_weeks: other.window_weeks.or(self.window_weeks),
            learning_rate: other.learning_rate.or(self.learning_rate),
            convergence_eps: other.convergence_eps.or(self.convergence_eps),
            max_iterations: other.max_iterations.or(self.max_iterations),
            use_newton: other.use_newton.or(self.use_newton),
            ratio_init: other.ratio_init.or(self.ratio_init),
            dtau: other.dtau.or(self.dtau),
            tau_per_step: other.tau_per_step.or(self.tau_per_step),
            objective: other.objective.or(self.objective),
            gamma: other.gamma.or(self.gamma),
        }
    }

    pub fn dynamics(&self) -> DynamicsParams {
        let d = DynamicsParams::new(1.0);
        DynamicsParams {
            dtau: self.dtau.unwrap_or(d.dtau),
            tau_per_step: self.tau_per_step.unwrap_or(d.tau_per_step),
            ..d
        }
    }

    pub fn estimation(&self) -> EstimationConfig {
        let d = EstimationConfig::default();
        EstimationConfig {
            window_weeks: self.window_weeks.unwrap_or(d.window_weeks),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            convergence_eps: self.convergence_eps.unwrap_or(d.convergence_eps),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            use_newton: self.use_newton.unwrap_or(d.use_newton),
            ratio_init: self.ratio_init.or(d.ratio_init),
            dynamics: self.dynamics(),
        }
    }

    pub fn objective(&self) -> ObjectiveSpec {
        let d = ObjectiveSpec::default();
        ObjectiveSpec {
            kind: self.objective.unwrap_or(d.kind),
            gamma: self.gamma.unwrap_or(d.gamma),
        }
    }
}
