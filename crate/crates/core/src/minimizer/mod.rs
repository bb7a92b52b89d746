//! Minimization of the phase-field energies.
//!
//! [`alternate_minimize`] alternates an exact (or projected-Newton) solve in
//! the phase field `v` with a preconditioned descent in the map, over a
//! decreasing list of `epsilon` values with warm starts. [`mm_profile_1d`]
//! solves the one-dimensional transition problem for `v` alone, and
//! [`recovery_sequence`] builds explicit competitors for a prescribed lifting.

mod alternate;
mod profile;
mod recovery;
mod ustep;
mod vstep;

pub use alternate::{alternate_minimize, EpsilonResult, MinimizeOptions, MinimizeResult, TraceRow};
pub use profile::{mm_profile_1d, MmProfile};
pub use recovery::{recovery_sequence, RecoveryOptions, RecoveryStage};
pub use ustep::{u_step_direct, u_step_lifting, UStepOptions, UStepStats};
pub use vstep::{v_objective, v_step};

use serde::{Deserialize, Serialize};

use crate::energy::Mode;
use crate::error::{Error, Result};
use crate::fields::{AngleField, CircleField};
use crate::grid::GridSpec;

/// Decreasing `epsilon` values and stopping rules for each stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    pub epsilon_list: Vec<f64>,
    pub max_outer_iters: usize,
    /// Relative change of the total energy between outer iterations.
    pub tol_energy: f64,
    /// Largest nodal change of the map and the phase field in one outer iteration.
    pub tol_step: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            epsilon_list: vec![0.1, 0.05, 0.025, 0.0125],
            max_outer_iters: 200,
            tol_energy: 1e-6,
            tol_step: 1e-8,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon_list.is_empty() {
            return Err(Error::Config("epsilon_list is empty".into()));
        }
        if self.epsilon_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Config("epsilon values must be positive".into()));
        }
        if self.epsilon_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("epsilon_list must be strictly decreasing".into()));
        }
        if !(self.tol_energy > 0.0 && self.tol_step > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::Config("max_outer_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// The map being minimized: a lifting or a circle map.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldState {
    Angle(AngleField),
    Circle(CircleField),
}

impl FieldState {
    pub fn grid(&self) -> &GridSpec {
        match self {
            FieldState::Angle(a) => a.grid(),
            FieldState::Circle(c) => c.grid(),
        }
    }

    /// Nodal values as read by the evaluators: lifting values or base angles.
    pub fn values(&self) -> &[f64] {
        match self {
            FieldState::Angle(a) => a.values(),
            FieldState::Circle(c) => c.angles(),
        }
    }

    /// The mode in which this state is naturally read.
    pub fn mode(&self) -> Mode {
        match self {
            FieldState::Angle(_) => Mode::Lifting,
            FieldState::Circle(_) => Mode::Direct,
        }
    }

    pub fn to_circle(&self) -> CircleField {
        match self {
            FieldState::Angle(a) => a.exp(),
            FieldState::Circle(c) => c.clone(),
        }
    }
}
