use serde::Serialize;

use s1phase_core::energy::GradientProbe;
use s1phase_core::fields::make_step_map;
use s1phase_core::minimizer::{alternate_minimize, FieldState, MinimizeOptions, Schedule, TraceRow};
use s1phase_core::{AngleField, EnergyParams, GridSpec, JumpCost, Mode};

use super::{probe_gradient, GradientRow, KindReport};
use crate::config::{ExperimentConfig, Gamma1dScenario};
use crate::curve::EnergyCurve;
use crate::error::{CliError, Result};
use crate::output::OutputDir;
use crate::svg::LinePlot;

#[derive(Debug, Clone)]
pub struct GammaReport {
    pub curve: EnergyCurve,
    pub trace: Vec<TraceRow>,
    pub worst_increase: f64,
    pub gradient: Vec<GradientProbe>,
    pub grid: GridSpec,
}

/// Step grid: `grid` when given (must be 1-D with `h <= eps_min / 4`),
/// otherwise `length` split into cells of `eps_min / cells_per_epsilon`.
fn step_grid(scenario: &Gamma1dScenario, eps_min: f64, grid: Option<GridSpec>) -> Result<GridSpec> {
    match grid {
        Some(g) => {
            if g.dim() != 1 {
                return Err(CliError::Config("gamma_1d_step needs a 1-D grid".into()));
            }
            if g.h() > eps_min / 4.0 * (1.0 + 1e-12) {
                return Err(CliError::Config(format!(
                    "grid spacing {} does not resolve epsilon {eps_min} (need h <= epsilon / 4)",
                    g.h()
                )));
            }
            Ok(g)
        }
        None => {
            let cells = (scenario.length * scenario.cells_per_epsilon / eps_min).ceil() as usize;
            Ok(GridSpec::new_1d(scenario.length, cells + 1)?)
        }
    }
}

pub fn gamma_1d_step(
    params: &EnergyParams,
    schedule: &Schedule,
    scenario: &Gamma1dScenario,
    grid: Option<GridSpec>,
    seed: u64,
) -> Result<GammaReport> {
    schedule.validate()?;
    let eps_min = *schedule.epsilon_list.last().expect("validated schedule is nonempty");
    let grid = step_grid(scenario, eps_min, grid)?;
    let u = make_step_map(&grid, scenario.delta)?;
    let init = match scenario.mode {
        Mode::Lifting => FieldState::Angle(AngleField::new(grid, u.angles().to_vec())?),
        Mode::Direct => FieldState::Circle(u),
    };
    let n = grid.num_nodes();
    let mut pinned = vec![false; n];
    pinned[0] = true;
    pinned[n - 1] = true;
    let opts = MinimizeOptions {
        pinned: Some(pinned),
        ..Default::default()
    };
    let result = alternate_minimize(&init, scenario.mode, params, schedule, &opts)?;
    let jc = JumpCost::new(params)?;
    let (target_tag, z) = match scenario.mode {
        Mode::Lifting => ("g(delta)", scenario.delta),
        Mode::Direct => ("g(2 sin(delta/2))", 2.0 * (0.5 * scenario.delta).sin()),
    };
    let curve = EnergyCurve::from_stages(scenario.mode.tag(), &result.stages)?.with_target(target_tag, jc.value(z));
    let gradient = probe_gradient(
        &grid,
        result.field.values(),
        result.v.values(),
        &params.with_epsilon(eps_min),
        scenario.mode,
        opts.pinned.as_deref(),
        scenario.gradient_nodes,
        seed,
    );
    Ok(GammaReport {
        curve,
        worst_increase: result.worst_increase(),
        trace: result.trace,
        gradient,
        grid,
    })
}

#[derive(Serialize)]
struct Summary {
    mode: Mode,
    delta: f64,
    nodes: usize,
    h: f64,
    limit: Option<f64>,
    target: Option<f64>,
    relative_error: Option<f64>,
    worst_increase: f64,
    gradient_checks_passed: bool,
}

pub(crate) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<KindReport> {
    let scenario: Gamma1dScenario = cfg.scenario()?;
    let grid = cfg.grid.as_ref().map(|g| g.build()).transpose()?;
    let rep = gamma_1d_step(&cfg.params, &cfg.schedule, &scenario, grid, cfg.seed)?;
    out.write_csv("trace.csv", &rep.trace)?;
    out.write_csv("curve.csv", &rep.curve.points)?;
    let eps_min = rep.curve.points.last().map_or(0.0, |p| p.epsilon);
    let rows: Vec<GradientRow> = rep
        .gradient
        .iter()
        .map(|p| GradientRow::new(scenario.mode.tag(), eps_min, p))
        .collect();
    out.write_csv("gradient_check.csv", &rows)?;
    let mut references = Vec::new();
    if let (Some(t), Some(tag)) = (rep.curve.target, &rep.curve.target_tag) {
        references.push((tag.clone(), t));
    }
    if let Some(l) = rep.curve.limit() {
        references.push(("extrapolated".into(), l));
    }
    let plot = LinePlot {
        title: format!("1-D step, {} mode", scenario.mode),
        x_label: "epsilon".into(),
        y_label: "minimized energy".into(),
        log_x: true,
        series: vec![rep.curve.series()],
        references,
    };
    out.write_bytes("energy_vs_eps.svg", plot.render().as_bytes())?;
    Ok(KindReport::ok(&Summary {
        mode: scenario.mode,
        delta: scenario.delta,
        nodes: rep.grid.num_nodes(),
        h: rep.grid.h(),
        limit: rep.curve.limit(),
        target: rep.curve.target,
        relative_error: rep.curve.relative_error(),
        worst_increase: rep.worst_increase,
        gradient_checks_passed: rep.gradient.iter().all(|p| p.passed),
    }))
}
