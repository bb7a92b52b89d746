use serde::Serialize;

use crate::energy::{evaluate, EnergyBreakdown, Mode};
use crate::error::{Error, Result};
use crate::fields::{check_grids, AngleField, CircleField, ScalarField};
use crate::minimizer::ustep::{u_step_raw, UStepOptions};
use crate::minimizer::vstep::v_step_raw;
use crate::minimizer::{FieldState, Schedule};
use crate::model::EnergyParams;

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    /// Nodes whose map values stay at their initial values.
    pub pinned: Option<Vec<bool>>,
    /// Initial phase field; `v = 1` when absent.
    pub v_init: Option<ScalarField>,
    pub u_step: UStepOptions,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            pinned: None,
            v_init: None,
            u_step: UStepOptions {
                max_iters: 5,
                ..Default::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub epsilon: f64,
    pub outer_iter: usize,
    pub bulk: f64,
    pub phase_field: f64,
    pub total: f64,
}

/// Converged state for one value of `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonResult {
    pub epsilon: f64,
    pub field: FieldState,
    pub v: ScalarField,
    pub energy: EnergyBreakdown,
    pub outer_iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub field: FieldState,
    pub v: ScalarField,
    pub energy: EnergyBreakdown,
    /// One row per outer iteration (row 0 of each stage is the warm start).
    pub trace: Vec<TraceRow>,
    pub stages: Vec<EpsilonResult>,
}

impl MinimizeResult {
    /// Largest relative energy increase between consecutive outer iterations
    /// of the same stage; zero for a monotone trace.
    pub fn worst_increase(&self) -> f64 {
        self.trace
            .windows(2)
            .filter(|w| w[0].epsilon == w[1].epsilon)
            .map(|w| (w[1].total - w[0].total) / w[0].total.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

fn row(epsilon: f64, outer_iter: usize, e: &EnergyBreakdown) -> TraceRow {
    TraceRow {
        epsilon,
        outer_iter,
        bulk: e.bulk,
        phase_field: e.phase_field,
        total: e.total,
    }
}

fn wrap_state(grid: &crate::grid::GridSpec, mode: Mode, x: Vec<f64>) -> Result<FieldState> {
    Ok(match mode {
        Mode::Lifting => FieldState::Angle(AngleField::new(*grid, x)?),
        Mode::Direct => FieldState::Circle(CircleField::from_angles(*grid, x)?),
    })
}

/// Alternating minimization over the `epsilon` schedule.
///
/// In lifting mode the initial field is read as a lifting (a circle map is
/// lifted by its base angles); in direct mode only `e^{i x}` matters. Each
/// stage alternates an exact `v` solve with a few descent iterations in the
/// map and stops when the relative energy change or the largest nodal change
/// of an outer iteration drops below the schedule tolerances.
pub fn alternate_minimize(
    init: &FieldState,
    mode: Mode,
    params: &EnergyParams,
    schedule: &Schedule,
    options: &MinimizeOptions,
) -> Result<MinimizeResult> {
    params.validate()?;
    schedule.validate()?;
    let grid = *init.grid();
    let n = grid.num_nodes();
    if let Some(p) = &options.pinned {
        if p.len() != n {
            return Err(Error::Dimension(format!("pin mask has {} entries for {n} nodes", p.len())));
        }
    }
    let fixed = options.pinned.as_deref();
    let mut x = init.values().to_vec();
    let mut v = match &options.v_init {
        Some(v0) => {
            check_grids(&grid, v0.grid())?;
            v0.values().to_vec()
        }
        None => vec![1.0; n],
    };
    let mut trace = Vec::new();
    let mut stages = Vec::new();
    for &eps in &schedule.epsilon_list {
        let p = params.with_epsilon(eps);
        let annotate = |e: Error, it: usize| e.context(format!("epsilon={eps}, outer iteration {it}"));
        let mut energy = evaluate(&grid, &x, &v, &p, mode);
        trace.push(row(eps, 0, &energy));
        let mut converged = false;
        let mut outer = 0;
        while outer < schedule.max_outer_iters {
            outer += 1;
            let v_prev = v.clone();
            v_step_raw(&grid, &x, mode, &mut v, &p, None).map_err(|e| annotate(e, outer))?;
            let stats = u_step_raw(&grid, &mut x, &v, &p, mode, fixed, &options.u_step).map_err(|e| annotate(e, outer))?;
            let next = evaluate(&grid, &x, &v, &p, mode);
            trace.push(row(eps, outer, &next));
            let dv = v.iter().zip(&v_prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let rel = (energy.total - next.total).abs() / energy.total.abs().max(f64::MIN_POSITIVE);
            energy = next;
            if rel <= schedule.tol_energy || dv.max(stats.max_change) <= schedule.tol_step {
                converged = true;
                break;
            }
        }
        stages.push(EpsilonResult {
            epsilon: eps,
            field: wrap_state(&grid, mode, x.clone())?,
            v: ScalarField::from_clamped(grid, v.clone()),
            energy,
            outer_iters: outer,
            converged,
        });
    }
    let last = stages.last().expect("schedule is nonempty");
    Ok(MinimizeResult {
        field: last.field.clone(),
        v: last.v.clone(),
        energy: last.energy,
        trace,
        stages,
    })
}
