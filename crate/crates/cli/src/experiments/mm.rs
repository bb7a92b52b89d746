use serde::Serialize;

use s1phase_core::minimizer::mm_profile_1d;
use s1phase_core::{EnergyParams, JumpCost};

use super::KindReport;
use crate::config::{ExperimentConfig, MmScenario};
use crate::error::Result;
use crate::output::OutputDir;
use crate::svg::{LinePlot, Series};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileRow {
    pub node: usize,
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MmReport {
    pub t_anchor: f64,
    pub epsilon: f64,
    pub cost: f64,
    /// `2 c_W(t_anchor)`.
    pub target: f64,
    pub relative_error: f64,
    #[serde(skip)]
    pub profile: Vec<ProfileRow>,
}

pub fn mm_report(params: &EnergyParams, scenario: &MmScenario) -> Result<MmReport> {
    let p = mm_profile_1d(scenario.t_anchor, params.epsilon, params.w, scenario.interval)?;
    let target = 2.0 * JumpCost::new(params)?.cw(scenario.t_anchor);
    let h = p.profile.grid().h();
    let profile = p
        .profile
        .values()
        .iter()
        .enumerate()
        .map(|(node, &v)| ProfileRow {
            node,
            x: p.origin + node as f64 * h,
            v,
        })
        .collect();
    let relative_error = if target > 0.0 {
        (p.cost - target) / target
    } else {
        p.cost
    };
    Ok(MmReport {
        t_anchor: scenario.t_anchor,
        epsilon: params.epsilon,
        cost: p.cost,
        target,
        relative_error,
        profile,
    })
}

pub(crate) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<KindReport> {
    let rep = mm_report(&cfg.params, &cfg.scenario()?)?;
    out.write_csv("profile.csv", &rep.profile)?;
    let plot = LinePlot {
        title: format!("transition profile, t = {}, eps = {}", rep.t_anchor, rep.epsilon),
        x_label: "x".into(),
        y_label: "v".into(),
        log_x: false,
        series: vec![Series {
            label: "v".into(),
            points: rep
                .profile
                .iter()
                .step_by(rep.profile.len().div_ceil(2000).max(1))
                .map(|r| (r.x, r.v))
                .collect(),
        }],
        references: vec![],
    };
    out.write_bytes("profile.svg", plot.render().as_bytes())?;
    Ok(KindReport::ok(&rep))
}
