use serde::Serialize;

use s1phase_core::lifting::{
    dipole_transport_estimate, mg_bruteforce, mg_local_search, sigma_jump_cost, LiftingProblem, LiftingSolution,
    Optimality, BRUTEFORCE_LIMIT,
};
use s1phase_core::{EnergyParams, JumpCost};

use super::KindReport;
use crate::config::{ExperimentConfig, MgMethod, MgScenario};
use crate::error::Result;
use crate::output::OutputDir;
use crate::scene::{build_scene, SceneSpec};

/// Search-space size of the exhaustive solver: one cell is gauge-fixed.
fn bruteforce_size(problem: &LiftingProblem) -> f64 {
    ((2 * problem.label_bound() + 1) as f64).powi(problem.num_cells() as i32 - 1)
}

pub fn solve(problem: &LiftingProblem, method: MgMethod, seed: u64, restarts: usize) -> Result<LiftingSolution> {
    let exhaustive = match method {
        MgMethod::Bruteforce => true,
        MgMethod::LocalSearch => false,
        MgMethod::Auto => bruteforce_size(problem) <= BRUTEFORCE_LIMIT,
    };
    if exhaustive {
        Ok(mg_bruteforce(problem)?)
    } else {
        Ok(mg_local_search(problem, seed, restarts))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LiftingRow {
    pub cell: usize,
    pub base_angle: f64,
    pub k: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MgReport {
    pub cells: usize,
    pub h: f64,
    pub objective: f64,
    /// Part of the objective carried by jumps of at least `sigma`.
    pub cut_cost: f64,
    pub optimality: Optimality,
    /// Straight-cut transport estimate (dipole only).
    pub transport: Option<f64>,
    pub length: f64,
    #[serde(skip)]
    pub rows: Vec<LiftingRow>,
}

pub fn mg_report(params: &EnergyParams, scenario: &MgScenario, seed: u64) -> Result<MgReport> {
    let h = 1.0 / scenario.cells_per_unit;
    let scene = build_scene(
        &SceneSpec {
            field: scenario.field,
            distance: scenario.distance,
            margin: scenario.margin,
            delta: scenario.delta,
            band: None,
        },
        h,
    )?;
    let jc = JumpCost::new(params)?;
    let transport = scene
        .vortices
        .as_ref()
        .map(|v| dipole_transport_estimate(v, &jc))
        .transpose()?;
    let problem = LiftingProblem::new(scene.u.clone(), jc, scenario.label_bound)?;
    let sol = solve(&problem, scenario.method, seed, scenario.restarts)?;
    let rows = scene
        .u
        .angles()
        .iter()
        .zip(sol.k.values())
        .enumerate()
        .map(|(cell, (&base_angle, &k))| LiftingRow { cell, base_angle, k })
        .collect();
    Ok(MgReport {
        cells: problem.num_cells(),
        h,
        cut_cost: sigma_jump_cost(&problem, &sol.k, scenario.sigma)?,
        objective: sol.objective,
        optimality: sol.optimality,
        transport,
        length: scene.length,
        rows,
    })
}

pub(crate) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<KindReport> {
    let rep = mg_report(&cfg.params, &cfg.scenario()?, cfg.seed)?;
    out.write_csv("lifting.csv", &rep.rows)?;
    Ok(KindReport::ok(&rep))
}
