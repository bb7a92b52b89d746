use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use s1phase_core::energy::GradientProbe;
use s1phase_core::extrapolate::{log_corrected, richardson, Extrapolation};
use s1phase_core::lifting::{sigma_jump_cost, LiftingProblem, Optimality};
use s1phase_core::minimizer::{alternate_minimize, FieldState, MinimizeOptions, Schedule, TraceRow};
use s1phase_core::{EnergyBreakdown, EnergyParams, JumpCost, Mode};

use super::{mg, probe_gradient, GradientRow, KindReport};
use crate::config::{DichotomyScenario, ExperimentConfig, FieldKind, MgMethod};
use crate::curve::{CurvePoint, EnergyCurve};
use crate::error::Result;
use crate::output::OutputDir;
use crate::scene::{build_scene, dipole_box, SceneSpec};
use crate::svg::{LinePlot, Series};

/// One minimization at a single `epsilon` on its own grid.
#[derive(Debug, Clone)]
pub struct DichotomyRun {
    pub mode: Mode,
    pub epsilon: f64,
    pub h: f64,
    pub nodes: usize,
    pub free_nodes: usize,
    pub energy: EnergyBreakdown,
    pub outer_iters: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    pub worst_increase: f64,
    pub gradient: Vec<GradientProbe>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapPoint {
    pub epsilon: f64,
    pub direct: f64,
    pub lifting: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftingSummary {
    pub h: f64,
    pub objective: f64,
    pub cut_cost: f64,
    pub optimality: Optimality,
}

/// Sharp references for a straight step of angle `delta` and length `L`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepBracket {
    /// `g(2 sin(delta / 2)) L`.
    pub chord: f64,
    /// `g(|delta|) L`.
    pub arc: f64,
    pub direct_limit: Option<f64>,
    /// Endpoint nearest to the extrapolated direct-mode energy.
    pub approached: Option<&'static str>,
}

#[derive(Debug, Clone)]
pub struct DichotomyReport {
    pub field: FieldKind,
    /// Vortex distance (dipole) or jump length (step), after grid rounding.
    pub length: f64,
    pub direct: EnergyCurve,
    pub lifting: EnergyCurve,
    pub gap: Vec<GapPoint>,
    /// Linear fit of the gap through its last three points.
    pub gap_extrapolation: Option<Extrapolation>,
    /// Fit of `L + a eps ln(length / eps)` through the last three gaps.
    pub gap_log_fit: Option<Extrapolation>,
    /// `g(2 pi) d` for the dipole, `0` for the smooth field.
    pub gap_target: Option<f64>,
    pub lifting_cost: Option<LiftingSummary>,
    pub transport: Option<f64>,
    pub step: Option<StepBracket>,
    pub runs: Vec<DichotomyRun>,
}

impl DichotomyReport {
    pub fn gap_limit(&self) -> Option<f64> {
        self.gap_extrapolation.map(|e| e.limit)
    }

    pub fn min_gap(&self) -> f64 {
        self.gap.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min)
    }

    /// Largest relative energy increase over all runs.
    pub fn worst_increase(&self) -> f64 {
        self.runs.iter().map(|r| r.worst_increase).fold(0.0, f64::max)
    }

    pub fn gradient_checks_passed(&self) -> bool {
        self.runs.iter().all(|r| r.gradient.iter().all(|p| p.passed))
    }

    /// Gap limit error: relative to the target when it is nonzero, relative
    /// to the direct-mode limit when the target is zero.
    pub fn gap_error(&self) -> Option<f64> {
        let (l, t) = (self.gap_limit()?, self.gap_target?);
        if t != 0.0 {
            Some((l - t) / t.abs())
        } else {
            Some(l / self.direct.limit()?.abs())
        }
    }
}

fn run_one(
    params: &EnergyParams,
    schedule: &Schedule,
    scenario: &DichotomyScenario,
    mode: Mode,
    epsilon: f64,
    seed: u64,
) -> Result<DichotomyRun> {
    let h = epsilon / scenario.cells_per_epsilon;
    let band = (scenario.band > 0.0).then_some(scenario.band * epsilon);
    let scene = build_scene(
        &SceneSpec {
            field: scenario.field,
            distance: scenario.distance,
            margin: scenario.margin,
            delta: scenario.delta,
            band,
        },
        h,
    )?;
    let init = match mode {
        Mode::Lifting => FieldState::Angle(scene.lifting.clone()),
        Mode::Direct => FieldState::Circle(scene.u.clone()),
    };
    let single = Schedule {
        epsilon_list: vec![epsilon],
        ..schedule.clone()
    };
    let opts = MinimizeOptions {
        pinned: Some(scene.pinned.clone()),
        ..Default::default()
    };
    let result = alternate_minimize(&init, mode, params, &single, &opts)?;
    let stage = &result.stages[0];
    let gradient = probe_gradient(
        &scene.grid,
        result.field.values(),
        result.v.values(),
        &params.with_epsilon(epsilon),
        mode,
        Some(&scene.pinned),
        scenario.gradient_nodes,
        seed,
    );
    Ok(DichotomyRun {
        mode,
        epsilon,
        h,
        nodes: scene.grid.num_nodes(),
        free_nodes: scene.pinned.iter().filter(|p| !**p).count(),
        energy: stage.energy,
        outer_iters: stage.outer_iters,
        converged: stage.converged,
        worst_increase: result.worst_increase(),
        trace: result.trace,
        gradient,
    })
}

fn curve(runs: &[DichotomyRun], mode: Mode) -> Result<EnergyCurve> {
    EnergyCurve::new(
        mode.tag(),
        runs.iter()
            .filter(|r| r.mode == mode)
            .map(|r| CurvePoint::new(r.epsilon, &r.energy))
            .collect(),
    )
}

fn lifting_summary(params: &EnergyParams, scenario: &DichotomyScenario, seed: u64) -> Result<LiftingSummary> {
    let h = 1.0 / scenario.mg_cells_per_unit;
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
    let problem = LiftingProblem::new(scene.u, JumpCost::new(params)?, scenario.label_bound)?;
    let sol = mg::solve(&problem, MgMethod::Auto, seed, scenario.restarts)?;
    Ok(LiftingSummary {
        h,
        cut_cost: sigma_jump_cost(&problem, &sol.k, scenario.sigma)?,
        objective: sol.objective,
        optimality: sol.optimality,
    })
}

/// Minimizes the same data in direct and lifting mode at every `epsilon` of
/// the schedule. Each `(epsilon, mode)` pair is an independent run on a grid
/// with `h = epsilon / cells_per_epsilon`; the runs execute in parallel.
pub fn dichotomy_report(
    params: &EnergyParams,
    schedule: &Schedule,
    scenario: &DichotomyScenario,
    seed: u64,
) -> Result<DichotomyReport> {
    params.validate()?;
    schedule.validate()?;
    let jobs: Vec<(Mode, f64)> = schedule
        .epsilon_list
        .iter()
        .flat_map(|&e| [(Mode::Direct, e), (Mode::Lifting, e)])
        .collect();
    let runs = jobs
        .par_iter()
        .enumerate()
        .map(|(i, &(mode, eps))| run_one(params, schedule, scenario, mode, eps, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;

    let jc = JumpCost::new(params)?;
    let length = match scenario.field {
        FieldKind::Dipole => dipole_box(scenario.distance, scenario.margin, 1.0 / scenario.mg_cells_per_unit)?.2,
        FieldKind::Step => 2.0 * scenario.margin,
        FieldKind::Smooth => 0.0,
    };
    let mut direct = curve(&runs, Mode::Direct)?;
    let lifting = curve(&runs, Mode::Lifting)?;
    let gap: Vec<GapPoint> = direct
        .points
        .iter()
        .zip(&lifting.points)
        .map(|(d, l)| GapPoint {
            epsilon: d.epsilon,
            direct: d.total,
            lifting: l.total,
            gap: l.total - d.total,
        })
        .collect();
    let eps: Vec<f64> = gap.iter().map(|g| g.epsilon).collect();
    let gaps: Vec<f64> = gap.iter().map(|g| g.gap).collect();
    let gap_extrapolation = (gap.len() >= 3).then(|| richardson(&eps, &gaps)).transpose()?;
    let gap_log_fit = (gap.len() >= 3 && length > 0.0 && scenario.field == FieldKind::Dipole)
        .then(|| log_corrected(&eps, &gaps, length))
        .transpose()?;

    let (gap_target, transport, step) = match scenario.field {
        FieldKind::Dipole => {
            let h = 1.0 / scenario.mg_cells_per_unit;
            let (_, cfg, _) = dipole_box(scenario.distance, scenario.margin, h)?;
            let t = s1phase_core::lifting::dipole_transport_estimate(&cfg, &jc)?;
            (Some(jc.value(TAU) * length), Some(t), None)
        }
        FieldKind::Smooth => (Some(0.0), None, None),
        FieldKind::Step => {
            let chord = jc.value(2.0 * (0.5 * scenario.delta).sin()) * length;
            let arc = jc.value(scenario.delta) * length;
            let reference = jc.value(scenario.metric.distance(scenario.delta)) * length;
            direct = direct.with_target(format!("g({}) L", scenario.metric.tag()), reference);
            let direct_limit = direct.limit();
            let approached = direct_limit.map(|l| if (l - chord).abs() <= (l - arc).abs() { "chord" } else { "arc" });
            (
                None,
                None,
                Some(StepBracket {
                    chord,
                    arc,
                    direct_limit,
                    approached,
                }),
            )
        }
    };
    let lifting_cost = Some(lifting_summary(params, scenario, seed)?);
    Ok(DichotomyReport {
        field: scenario.field,
        length,
        direct,
        lifting,
        gap,
        gap_extrapolation,
        gap_log_fit,
        gap_target,
        lifting_cost,
        transport,
        step,
        runs,
    })
}

#[derive(Serialize)]
struct RunRow {
    mode: Mode,
    epsilon: f64,
    h: f64,
    nodes: usize,
    free_nodes: usize,
    total: f64,
    bulk: f64,
    phase_field: f64,
    outer_iters: usize,
    converged: bool,
    worst_increase: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    field: FieldKind,
    length: f64,
    direct_limit: Option<f64>,
    lifting_limit: Option<f64>,
    gap_limit: Option<f64>,
    gap_log_limit: Option<f64>,
    gap_target: Option<f64>,
    gap_error: Option<f64>,
    min_gap: f64,
    lifting_cost: &'a Option<LiftingSummary>,
    transport: Option<f64>,
    step: &'a Option<StepBracket>,
    worst_increase: f64,
    gradient_checks_passed: bool,
}

/// Relative slack allowed when comparing the two extrapolated limits.
const ORDER_SLACK: f64 = 1e-6;

pub(crate) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<KindReport> {
    let scenario: DichotomyScenario = cfg.scenario()?;
    let rep = dichotomy_report(&cfg.params, &cfg.schedule, &scenario, cfg.seed)?;

    out.write_csv("gap.csv", &rep.gap)?;
    let rows: Vec<RunRow> = rep
        .runs
        .iter()
        .map(|r| RunRow {
            mode: r.mode,
            epsilon: r.epsilon,
            h: r.h,
            nodes: r.nodes,
            free_nodes: r.free_nodes,
            total: r.energy.total,
            bulk: r.energy.bulk,
            phase_field: r.energy.phase_field,
            outer_iters: r.outer_iters,
            converged: r.converged,
            worst_increase: r.worst_increase,
        })
        .collect();
    out.write_csv("runs.csv", &rows)?;
    for mode in [Mode::Direct, Mode::Lifting] {
        let trace: Vec<TraceRow> = rep
            .runs
            .iter()
            .filter(|r| r.mode == mode)
            .flat_map(|r| r.trace.iter().copied())
            .collect();
        out.write_csv(&format!("trace_{}.csv", mode.tag()), &trace)?;
    }
    let grads: Vec<GradientRow> = rep
        .runs
        .iter()
        .flat_map(|r| r.gradient.iter().map(|p| GradientRow::new(r.mode.tag(), r.epsilon, p)))
        .collect();
    out.write_csv("gradient_check.csv", &grads)?;

    let mut references = Vec::new();
    if let Some(t) = rep.gap_target {
        references.push(("gap target".to_string(), t));
    }
    if let Some(s) = &rep.step {
        references.push(("g(chord) L".into(), s.chord));
        references.push(("g(arc) L".into(), s.arc));
    }
    let plot = LinePlot {
        title: format!("direct vs lifting, {:?} field", rep.field).to_lowercase(),
        x_label: "epsilon".into(),
        y_label: "minimized energy".into(),
        log_x: true,
        series: vec![
            rep.direct.series(),
            rep.lifting.series(),
            Series {
                label: "gap".into(),
                points: rep.gap.iter().map(|g| (g.epsilon, g.gap)).collect(),
            },
        ],
        references,
    };
    out.write_bytes("energy_vs_eps.svg", plot.render().as_bytes())?;

    let summary = Summary {
        field: rep.field,
        length: rep.length,
        direct_limit: rep.direct.limit(),
        lifting_limit: rep.lifting.limit(),
        gap_limit: rep.gap_limit(),
        gap_log_limit: rep.gap_log_fit.map(|e| e.limit),
        gap_target: rep.gap_target,
        gap_error: rep.gap_error(),
        min_gap: rep.min_gap(),
        lifting_cost: &rep.lifting_cost,
        transport: rep.transport,
        step: &rep.step,
        worst_increase: rep.worst_increase(),
        gradient_checks_passed: rep.gradient_checks_passed(),
    };
    let mut report = KindReport::ok(&summary);
    if let (Some(d), Some(l)) = (rep.direct.limit(), rep.lifting.limit()) {
        if l < d - ORDER_SLACK * d.abs().max(1.0) {
            report.failure = Some(format!(
                "extrapolated lifting-mode energy {l} is below the direct-mode energy {d}"
            ));
        }
    }
    Ok(report)
}
