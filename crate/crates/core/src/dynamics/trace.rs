use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::graph::CollaborationNetwork;
use crate::scalar::{total, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ActivityState<T> {
    /// Relative activity per user, in network index order.
    pub x: Vec<T>,
    pub tau: T,
}

/// Observed states of one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace<T> {
    pub states: Vec<ActivityState<T>>,
    /// `aggregate[k]` is the sum of `states[k].x`.
    pub aggregate: Vec<T>,
    pub diverged: bool,
    /// Observation steps at which some activity was negative.
    pub negativity_events: usize,
}

impl<T: Scalar> SimulationTrace<T> {
    pub fn start(initial: ActivityState<T>) -> Self {
        let mut trace = Self {
            states: Vec::new(),
            aggregate: Vec::new(),
            diverged: false,
            negativity_events: 0,
        };
        trace.push(initial);
        trace
    }

    pub fn push(&mut self, state: ActivityState<T>) {
        if state.x.iter().any(|&v| v < T::zero()) {
            self.negativity_events += 1;
        }
        self.aggregate.push(total(&state.x));
        self.states.push(state);
    }

    pub fn last(&self) -> &ActivityState<T> {
        self.states.last().expect("a trace always holds its initial state")
    }

    /// Writes `step,tau,aggregate_activity`.
    pub fn write_aggregate_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,tau,aggregate_activity")?;
        for (k, (state, agg)) in self.states.iter().zip(&self.aggregate).enumerate() {
            writeln!(out, "{k},{},{}", state.tau, agg)?;
        }
        out.flush()
    }

    /// Writes `step,tau,<user>...`, one column per network user.
    pub fn write_wide_csv<W: Write>(&self, net: &CollaborationNetwork, mut out: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(&mut out);
        let mut header = vec!["step".to_owned(), "tau".to_owned()];
        header.extend(net.users().iter().map(|u| u.to_string()));
        wtr.write_record(&header)?;
        for (k, state) in self.states.iter().enumerate() {
            let mut row = vec![k.to_string(), state.tau.to_string()];
            row.extend(state.x.iter().map(|v| v.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// JSON summary of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub ratio: f64,
    pub kappa1: f64,
    pub stable: bool,
    pub marginal: bool,
    pub diverged: bool,
    pub negativity_events: usize,
    pub steps: usize,
    pub final_aggregate: f64,
}
