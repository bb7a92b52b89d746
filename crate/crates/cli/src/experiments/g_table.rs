use serde::Serialize;

use s1phase_core::JumpCost;

use super::KindReport;
use crate::config::{ExperimentConfig, GTableScenario};
use crate::error::Result;
use crate::output::OutputDir;
use crate::svg::{LinePlot, Series};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GRow {
    pub z: f64,
    pub g: f64,
    pub t_star: f64,
    pub closed_form: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GTable {
    pub rows: Vec<GRow>,
    pub g_at_2: f64,
    pub sup: f64,
    pub closed_form_tag: Option<&'static str>,
    /// Largest `|g - closed form|` over the table.
    pub max_closed_form_error: Option<f64>,
}

pub fn g_table(params: &s1phase_core::EnergyParams, scenario: &GTableScenario) -> Result<GTable> {
    let jc = JumpCost::new(params)?;
    let rows: Vec<GRow> = jc
        .tabulate(scenario.z_max, scenario.points)?
        .into_iter()
        .map(|s| GRow {
            z: s.z,
            g: s.g,
            t_star: s.t_star,
            closed_form: jc.closed_form(s.z),
        })
        .collect();
    let max_closed_form_error = jc.closed_form_tag().map(|_| {
        rows.iter()
            .filter_map(|r| r.closed_form.map(|c| (r.g - c).abs()))
            .fold(0.0, f64::max)
    });
    Ok(GTable {
        g_at_2: jc.value(2.0),
        sup: jc.sup(),
        closed_form_tag: jc.closed_form_tag(),
        max_closed_form_error,
        rows,
    })
}

#[derive(Serialize)]
struct Summary<'a> {
    points: usize,
    g_at_2: f64,
    sup: f64,
    closed_form_tag: Option<&'a str>,
    max_closed_form_error: Option<f64>,
}

pub(crate) fn run(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<KindReport> {
    let table = g_table(&cfg.params, &cfg.scenario()?)?;
    out.write_csv("g_table.csv", &table.rows)?;
    let plot = LinePlot {
        title: "effective jump cost".into(),
        x_label: "z".into(),
        y_label: "g(z), t*(z)".into(),
        log_x: false,
        series: vec![
            Series {
                label: "g".into(),
                points: table.rows.iter().map(|r| (r.z, r.g)).collect(),
            },
            Series {
                label: "t*".into(),
                points: table.rows.iter().map(|r| (r.z, r.t_star)).collect(),
            },
        ],
        references: vec![("sup g".into(), table.sup)],
    };
    out.write_bytes("g_vs_z.svg", plot.render().as_bytes())?;
    Ok(KindReport::ok(&Summary {
        points: table.rows.len(),
        g_at_2: table.g_at_2,
        sup: table.sup,
        closed_form_tag: table.closed_form_tag,
        max_closed_form_error: table.max_closed_form_error,
    }))
}
