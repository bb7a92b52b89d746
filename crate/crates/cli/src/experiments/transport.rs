use serde::Serialize;

use s1phase_core::lifting::{dipole_transport_estimate, sigma_jump_cost, LiftingProblem, Optimality};
use s1phase_core::{EnergyParams, JumpCost};

use super::{mg, KindReport};
use crate::config::{ExperimentConfig, FieldKind, MgMethod, TransportScenario};
use crate::error::Result;
use crate::output::OutputDir;
use crate::scene::{build_scene, SceneSpec};
use crate::svg::{LinePlot, Series};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransportRow {
    pub distance: f64,
    pub h: f64,
    pub cells: usize,
    pub objective: f64,
    pub cut_cost: f64,
    pub transport: f64,
    /// `cut_cost / transport`: the small jumps of the smooth part are not transported.
    pub ratio: f64,
    pub optimality: Optimality,
}

/// Minimal lifting cost of the dipole against the straight-cut transport
/// estimate, over a set of distances and grid resolutions.
pub fn transport_compare(params: &EnergyParams, scenario: &TransportScenario, seed: u64) -> Result<Vec<TransportRow>> {
    let jc = JumpCost::new(params)?;
    let mut rows = Vec::new();
    for &distance in &scenario.distances {
        for &cpu in &scenario.cells_per_unit {
            let h = 1.0 / cpu;
            let scene = build_scene(
                &SceneSpec {
                    field: FieldKind::Dipole,
                    distance,
                    margin: scenario.margin,
                    delta: 0.0,
                    band: None,
                },
                h,
            )?;
            let transport = dipole_transport_estimate(scene.vortices.as_ref().expect("dipole scene"), &jc)?;
            let problem = LiftingProblem::new(scene.u, jc.clone(), scenario.label_bound)?;
            let sol = mg::solve(&problem, MgMethod::Auto, seed, scenario.restarts)?;
            let cut_cost = sigma_jump_cost(&problem, &sol.k, scenario.sigma)?;
            rows.push(TransportRow {
                distance: scene.length,
                h,
                cells: problem.num_cells(),
                objective: sol.objective,
                cut_cost,
                transport,
                ratio: cut_cost / transport,
                optimality: sol.optimality,
            });
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct Summary {
    runs: usize,
    worst_ratio_deviation: f64,
}

pub(crate) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<KindReport> {
    let scenario: TransportScenario = cfg.scenario()?;
    let rows = transport_compare(&cfg.params, &scenario, cfg.seed)?;
    out.write_csv("transport.csv", &rows)?;
    let series = scenario
        .distances
        .iter()
        .enumerate()
        .map(|(i, &d)| Series {
            label: format!("d = {d}"),
            points: rows
                .iter()
                .skip(i * scenario.cells_per_unit.len())
                .take(scenario.cells_per_unit.len())
                .map(|r| (r.h, r.ratio))
                .collect(),
        })
        .collect();
    let plot = LinePlot {
        title: "cut cost of the minimal lifting / transport estimate".into(),
        x_label: "h".into(),
        y_label: "ratio".into(),
        log_x: true,
        series,
        references: vec![("1".into(), 1.0)],
    };
    out.write_bytes("ratio_vs_h.svg", plot.render().as_bytes())?;
    Ok(KindReport::ok(&Summary {
        runs: rows.len(),
        worst_ratio_deviation: rows.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max),
    }))
}
