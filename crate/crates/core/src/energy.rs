//! Discrete phase-field energies and their gradients.
//!
//! On each cell the squared gradient of a nodal field `x` is a weighted sum of
//! squared edge differences (see [`GridSpec::cell_terms`]). In lifting mode the
//! difference of two values is `a - b`; in direct mode `x` holds angles and the
//! difference is the planar chord `|e^{ia} - e^{ib}| = 2 |sin((a - b)/2)|`.
//! The discrete energy is
//!
//! ```text
//! F = sum_c vol [ psi_c f(|grad x|_eta) + eps |grad v|^2 ] + sum_i m_i W(v_i) / eps
//! ```
//!
//! with `psi_c` the mean of `psi(v)` over the cell corners and `m_i` the lumped
//! node masses.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{check_grids, principal, AngleField, CircleField, ScalarField};
use crate::grid::GridSpec;
use crate::jump_cost::JumpCost;
use crate::model::EnergyParams;

/// How the size of a jump between two circle values is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpMetric {
    /// Planar distance `|u+ - u-|`.
    Chord,
    /// Geodesic angle on the circle, in `[0, pi]`.
    Arc,
}

impl JumpMetric {
    /// Distance between two points of the circle separated by angle `delta`.
    pub fn distance(self, delta: f64) -> f64 {
        match self {
            JumpMetric::Chord => 2.0 * (0.5 * delta).sin().abs(),
            JumpMetric::Arc => principal(delta).abs(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            JumpMetric::Chord => "chord",
            JumpMetric::Arc => "arc",
        }
    }
}

impl FromStr for JumpMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chord" => Ok(JumpMetric::Chord),
            "arc" => Ok(JumpMetric::Arc),
            other => Err(Error::Config(format!("unknown jump metric {other:?} (expected chord or arc)"))),
        }
    }
}

impl fmt::Display for JumpMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Which functional domain a nodal field lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Real lifting `phi`, differences `a - b`.
    Lifting,
    /// Circle map stored as angles, chord differences.
    Direct,
}

impl Mode {
    #[inline]
    pub(crate) fn diff_sq(self, a: f64, b: f64) -> f64 {
        match self {
            Mode::Lifting => (a - b) * (a - b),
            Mode::Direct => {
                let s = (0.5 * (a - b)).sin();
                4.0 * s * s
            }
        }
    }

    /// `d/da diff_sq(a, b)`; the derivative in `b` is its negative.
    #[inline]
    pub(crate) fn diff_sq_da(self, a: f64, b: f64) -> f64 {
        match self {
            Mode::Lifting => 2.0 * (a - b),
            Mode::Direct => 2.0 * (a - b).sin(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Mode::Lifting => "lifting",
            Mode::Direct => "direct",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lifting" => Ok(Mode::Lifting),
            "direct" => Ok(Mode::Direct),
            other => Err(Error::Config(format!("unknown mode {other:?} (expected lifting or direct)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Components of an evaluated energy. `cantor` is always zero on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub bulk: f64,
    pub phase_field: f64,
    pub jump: f64,
    pub transport: f64,
    pub cantor: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(bulk: f64, phase_field: f64, jump: f64, transport: f64) -> Self {
        Self {
            bulk,
            phase_field,
            jump,
            transport,
            cantor: 0.0,
            total: bulk + phase_field + jump + transport,
        }
    }
}

impl Add for EnergyBreakdown {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        let mut out = Self::new(
            self.bulk + o.bulk,
            self.phase_field + o.phase_field,
            self.jump + o.jump,
            self.transport + o.transport,
        );
        out.cantor = self.cantor + o.cantor;
        out
    }
}

/// `sqrt(r2 + eta^2) - eta`, evaluated without cancellation.
#[inline]
pub fn smoothed_norm(r2: f64, eta: f64) -> f64 {
    if eta == 0.0 {
        r2.sqrt()
    } else {
        r2 / ((r2 + eta * eta).sqrt() + eta)
    }
}

/// Squared gradient of `x` on a cell.
#[inline]
pub(crate) fn cell_grad_sq(grid: &GridSpec, cell: usize, x: &[f64], mode: Mode) -> f64 {
    let (terms, k) = grid.cell_terms(cell);
    terms[..k].iter().map(|t| t.coef * mode.diff_sq(x[t.a], x[t.b])).sum()
}

/// Mean of `psi(v)` over the corners of a cell.
#[inline]
pub(crate) fn cell_psi(grid: &GridSpec, cell: usize, v: &[f64], params: &EnergyParams) -> f64 {
    let (nodes, k) = grid.cell_nodes(cell);
    nodes[..k].iter().map(|&n| params.psi.eval(v[n])).sum::<f64>() / k as f64
}

/// `vol * psi_c * f(|grad x|_eta)` on one cell.
pub fn bulk_cell(grid: &GridSpec, cell: usize, x: &[f64], v: &[f64], params: &EnergyParams, mode: Mode) -> f64 {
    let r2 = cell_grad_sq(grid, cell, x, mode);
    grid.cell_volume() * cell_psi(grid, cell, v, params) * params.f.eval(smoothed_norm(r2, params.eta))
}

/// `f(|grad x|_eta)` per cell.
pub fn cell_forcing(grid: &GridSpec, x: &[f64], params: &EnergyParams, mode: Mode) -> Vec<f64> {
    (0..grid.num_cells())
        .map(|c| params.f.eval(smoothed_norm(cell_grad_sq(grid, c, x, mode), params.eta)))
        .collect()
}

pub fn bulk_energy(grid: &GridSpec, x: &[f64], v: &[f64], params: &EnergyParams, mode: Mode) -> f64 {
    (0..grid.num_cells()).map(|c| bulk_cell(grid, c, x, v, params, mode)).sum()
}

/// Bulk energy and its gradient with respect to the nodal values `x`.
pub fn bulk_gradient(grid: &GridSpec, x: &[f64], v: &[f64], params: &EnergyParams, mode: Mode) -> (f64, Vec<f64>) {
    bulk_gradient_on(grid, 0..grid.num_cells(), x, v, params, mode)
}

/// [`bulk_gradient`] restricted to a set of cells.
pub(crate) fn bulk_gradient_on(
    grid: &GridSpec,
    cells: impl IntoIterator<Item = usize>,
    x: &[f64],
    v: &[f64],
    params: &EnergyParams,
    mode: Mode,
) -> (f64, Vec<f64>) {
    let vol = grid.cell_volume();
    let eta = params.eta;
    let mut grad = vec![0.0; x.len()];
    let mut energy = 0.0;
    for c in cells {
        let (terms, k) = grid.cell_terms(c);
        let r2: f64 = terms[..k].iter().map(|t| t.coef * mode.diff_sq(x[t.a], x[t.b])).sum();
        let r_eta = smoothed_norm(r2, eta);
        let w = vol * cell_psi(grid, c, v, params);
        energy += w * params.f.eval(r_eta);
        let denom = (r2 + eta * eta).sqrt();
        if denom == 0.0 || w == 0.0 {
            continue;
        }
        let a_c = w * params.f.deriv(r_eta) / (2.0 * denom);
        for t in &terms[..k] {
            let d = a_c * t.coef * mode.diff_sq_da(x[t.a], x[t.b]);
            grad[t.a] += d;
            grad[t.b] -= d;
        }
    }
    (energy, grad)
}

/// `sum_c vol eps |grad v|^2 + sum_i m_i W(v_i) / eps`.
pub fn phase_field_energy(grid: &GridSpec, v: &[f64], params: &EnergyParams) -> f64 {
    let vol = grid.cell_volume();
    let eps = params.epsilon;
    let grad: f64 = (0..grid.num_cells())
        .map(|c| vol * cell_grad_sq(grid, c, v, Mode::Lifting))
        .sum();
    let well: f64 = grid
        .node_masses()
        .iter()
        .zip(v)
        .map(|(m, &s)| m * params.w.eval(s))
        .sum();
    eps * grad + well / eps
}

/// Full discrete energy of nodal values `x` read in `mode`.
pub fn evaluate(grid: &GridSpec, x: &[f64], v: &[f64], params: &EnergyParams, mode: Mode) -> EnergyBreakdown {
    EnergyBreakdown::new(
        bulk_energy(grid, x, v, params, mode),
        phase_field_energy(grid, v, params),
        0.0,
        0.0,
    )
}

/// Phase-field energy of a lifting `phi`, with `|grad u| = |grad phi|`.
pub fn eval_f_eps_lifting(phi: &AngleField, v: &ScalarField, params: &EnergyParams) -> Result<EnergyBreakdown> {
    params.validate()?;
    check_grids(phi.grid(), v.grid())?;
    Ok(evaluate(phi.grid(), phi.values(), v.values(), params, Mode::Lifting))
}

/// Phase-field energy of a circle map through its planar gradient.
pub fn eval_f_eps_direct(u: &CircleField, v: &ScalarField, params: &EnergyParams) -> Result<EnergyBreakdown> {
    params.validate()?;
    check_grids(u.grid(), v.grid())?;
    Ok(evaluate(u.grid(), u.angles(), v.values(), params, Mode::Direct))
}

/// Energy of a map with a marked jump set, read as a sharp-interface functional.
///
/// `jumps` flags edges in [`GridSpec::edges`] order. Cells touching a jump edge
/// carry no bulk energy; every jump edge costs `g(d(u+, u-))` times its face
/// measure. With `mg_value` the jump cost is replaced by that value, reported
/// as `transport`.
pub fn eval_sharp_energy(
    u: &CircleField,
    jumps: &[bool],
    g: &JumpCost,
    metric: JumpMetric,
    mg_value: Option<f64>,
) -> Result<EnergyBreakdown> {
    let grid = u.grid();
    let edges = grid.edges();
    if jumps.len() != edges.len() {
        return Err(Error::Dimension(format!(
            "jump mask has {} entries but the grid has {} edges",
            jumps.len(),
            edges.len()
        )));
    }
    if let Some(m) = mg_value {
        if !(m >= 0.0) {
            return Err(Error::Domain(format!("m_g value must be nonnegative, got {m}")));
        }
    }
    let th = u.angles();
    let params = g.params();
    let vol = grid.cell_volume();
    let mut bulk = 0.0;
    for c in 0..grid.num_cells() {
        let (terms, k) = grid.cell_terms(c);
        if terms[..k].iter().any(|t| jumps[grid.edge_index(t.a, t.b)]) {
            continue;
        }
        let r2 = cell_grad_sq(grid, c, th, Mode::Direct);
        bulk += vol * params.f.eval(r2.sqrt());
    }
    let jump: f64 = edges
        .iter()
        .zip(jumps)
        .filter(|(_, &j)| j)
        .map(|(e, _)| g.value(metric.distance(th[e.b] - th[e.a])) * e.face)
        .sum();
    Ok(match mg_value {
        Some(m) => EnergyBreakdown::new(bulk, 0.0, 0.0, m),
        None => EnergyBreakdown::new(bulk, 0.0, jump, 0.0),
    })
}

/// Outcome of comparing the analytic bulk gradient with finite differences at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientProbe {
    pub node: usize,
    pub analytic: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
    pub passed: bool,
}

/// Centered finite-difference check of [`bulk_gradient`] at the given nodes.
///
/// Each incident cell is differenced separately with a step scaled to its own
/// gradient, `1e-4 * h * max(|grad x|, eta)`, so that cells where the smoothed
/// norm is sharply curved are not stepped across their kink.
pub fn gradient_check(
    grid: &GridSpec,
    x: &[f64],
    v: &[f64],
    params: &EnergyParams,
    mode: Mode,
    nodes: &[usize],
    rel_tol: f64,
) -> Vec<GradientProbe> {
    let (_, grad) = bulk_gradient(grid, x, v, params, mode);
    let h = grid.h();
    let incident = incident_cells(grid);
    let mut work = x.to_vec();
    nodes
        .iter()
        .map(|&node| {
            let mut fd = 0.0;
            let mut scale = 0.0;
            let mut noise = 0.0;
            for &c in &incident[node] {
                let r = cell_grad_sq(grid, c, x, mode).sqrt();
                let s = 1e-4 * h * r.max(params.eta).max(1e-300);
                let (hi, lo) = (x[node] + s, x[node] - s);
                work[node] = hi;
                let plus = bulk_cell(grid, c, &work, v, params, mode);
                work[node] = lo;
                let minus = bulk_cell(grid, c, &work, v, params, mode);
                work[node] = x[node];
                // the representable step, not the requested one
                let d = (plus - minus) / (hi - lo);
                fd += d;
                scale += d.abs();
                noise += 16.0 * f64::EPSILON * (plus.abs() + minus.abs()) / (hi - lo);
            }
            let analytic = grad[node];
            let err = (analytic - fd).abs();
            let mag = analytic.abs().max(fd.abs());
            let relative_error = if mag > 0.0 { err / mag } else { 0.0 };
            // nodes in equilibrium: the per-cell pieces cancel and only their size is meaningful;
            // below the difference quotient's own roundoff there is nothing to compare
            let passed = err <= rel_tol * mag || err <= 1e-3 * rel_tol * scale || mag <= noise;
            GradientProbe {
                node,
                analytic,
                finite_difference: fd,
                relative_error,
                passed,
            }
        })
        .collect()
}

/// Cells containing each node.
pub(crate) fn incident_cells(grid: &GridSpec) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); grid.num_nodes()];
    for c in 0..grid.num_cells() {
        let (nodes, k) = grid.cell_nodes(c);
        for &n in &nodes[..k] {
            out[n].push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_step_map, Vortex, VortexConfig};
    use crate::model::{Bulk, Psi, Well};
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn unit_square(n: usize) -> GridSpec {
        GridSpec::new_2d([1.0, 1.0], [n, n]).unwrap()
    }

    #[test]
    fn metric_tags() {
        assert_eq!("chord".parse::<JumpMetric>().unwrap(), JumpMetric::Chord);
        assert_eq!("arc".parse::<JumpMetric>().unwrap(), JumpMetric::Arc);
        assert!(matches!("geodesic".parse::<JumpMetric>(), Err(Error::Config(_))));
        assert!((JumpMetric::Chord.distance(FRAC_PI_2) - 2f64.sqrt()).abs() < 1e-15);
        assert!((JumpMetric::Arc.distance(1.5 * PI) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn smoothed_norm_is_stable() {
        assert_eq!(smoothed_norm(0.0, 1e-6), 0.0);
        assert_eq!(smoothed_norm(4.0, 0.0), 2.0);
        let r = 1e-9;
        let exact = (r * r + 1e-12f64).sqrt() - 1e-6;
        assert!((smoothed_norm(r * r, 1e-6) - exact).abs() < 1e-20);
    }

    #[test]
    fn zero_fields() {
        let g = unit_square(11);
        let p = EnergyParams::default();
        let phi = AngleField::zeros(g);
        let one = ScalarField::constant(g, 1.0).unwrap();
        assert_eq!(eval_f_eps_lifting(&phi, &one, &p).unwrap().total, 0.0);
        let zero = ScalarField::constant(g, 0.0).unwrap();
        let e = eval_f_eps_lifting(&phi, &zero, &p).unwrap();
        assert!((e.total - 1.0 / p.epsilon).abs() < 1e-12);
        assert_eq!(e.bulk, 0.0);
        let u = CircleField::constant(g, 0.0);
        assert_eq!(eval_f_eps_direct(&u, &one, &p).unwrap().total, 0.0);
    }

    #[test]
    fn linear_profile_bulk() {
        let g = GridSpec::new_1d(1.0, 101).unwrap();
        let phi = AngleField::from_fn(g, |p| p[0]);
        let v = ScalarField::constant(g, 1.0).unwrap();
        let e = eval_f_eps_lifting(&phi, &v, &EnergyParams::default()).unwrap();
        assert!((e.bulk - 1.0).abs() < 1e-2);
        assert_eq!(e.jump, 0.0);
        assert_eq!(e.transport, 0.0);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let phi = AngleField::zeros(unit_square(5));
        let v = ScalarField::constant(unit_square(6), 1.0).unwrap();
        assert!(matches!(
            eval_f_eps_lifting(&phi, &v, &EnergyParams::default()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn chain_rule_agreement() {
        let g = unit_square(129);
        let phi = AngleField::from_fn(g, |[x, y]| 1.3 * (2.0 * x).sin() + 0.7 * x * y);
        let v = ScalarField::new(g, (0..g.num_nodes()).map(|n| 0.5 + 0.4 * g.position(n)[1]).collect()).unwrap();
        let p = EnergyParams::default();
        let a = eval_f_eps_lifting(&phi, &v, &p).unwrap().total;
        let b = eval_f_eps_direct(&phi.exp(), &v, &p).unwrap().total;
        assert!((a - b).abs() < 0.02 * a);
    }

    #[test]
    fn vortex_bulk_matches_one_over_r() {
        // unit square with the singularity at the centre of the middle cell
        let n = 101;
        let g = unit_square(n);
        let p = g.cell_center(n / 2 - 1, n / 2 - 1);
        let u = crate::fields::vortex_angles(
            &g,
            &VortexConfig::new(vec![Vortex { position: p, charge: 1 }]),
        );
        let v = ScalarField::constant(g, 1.0).unwrap();
        let params = EnergyParams::default();
        let (ci, cj) = g.cell_containing(p).unwrap();
        let centre = cj * (n - 1) + ci;
        let x = u.angles();
        let bulk: f64 = (0..g.num_cells())
            .filter(|&c| c != centre)
            .map(|c| bulk_cell(&g, c, x, v.values(), &params, Mode::Direct))
            .sum();
        // midpoint-rule oracle for int |x - p|^-1 over the square minus the centre cell
        let m = 2000;
        let hq = 1.0 / m as f64;
        let hc = g.h();
        let mut oracle = 0.0;
        for j in 0..m {
            for i in 0..m {
                let (x, y) = ((i as f64 + 0.5) * hq, (j as f64 + 0.5) * hq);
                if (x - p[0]).abs() < 0.5 * hc && (y - p[1]).abs() < 0.5 * hc {
                    continue;
                }
                oracle += hq * hq / (x - p[0]).hypot(y - p[1]);
            }
        }
        assert!((bulk - oracle).abs() < 0.1 * oracle, "{bulk} vs {oracle}");
    }

    #[test]
    fn sharp_energy_examples() {
        let g1 = GridSpec::new_1d(1.0, 11).unwrap();
        let jc = JumpCost::new(&EnergyParams::default()).unwrap();
        let flat = CircleField::constant(g1, 1.0);
        let none = vec![false; g1.edges().len()];
        assert_eq!(eval_sharp_energy(&flat, &none, &jc, JumpMetric::Arc, None).unwrap().total, 0.0);

        let step = make_step_map(&g1, FRAC_PI_2).unwrap();
        let jumps: Vec<bool> = g1
            .edges()
            .iter()
            .map(|e| step.angles()[e.a] != step.angles()[e.b])
            .collect();
        let arc = eval_sharp_energy(&step, &jumps, &jc, JumpMetric::Arc, None).unwrap();
        assert!((arc.jump - TAU / (PI + 4.0)).abs() < 1e-4);
        assert_eq!(arc.bulk, 0.0);
        let chord = eval_sharp_energy(&step, &jumps, &jc, JumpMetric::Chord, None).unwrap();
        let s2 = 2f64.sqrt();
        assert!((chord.jump - 2.0 * s2 / (s2 + 2.0)).abs() < 1e-4);
        assert!(chord.jump <= arc.jump);

        let lifted = eval_sharp_energy(&step, &jumps, &jc, JumpMetric::Arc, Some(0.5)).unwrap();
        assert_eq!(lifted.jump, 0.0);
        assert_eq!(lifted.transport, 0.5);
        assert_eq!(lifted.cantor, 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = GridSpec::new_2d([1.0, 0.8], [17, 13]).unwrap();
        let x: Vec<f64> = (0..g.num_nodes())
            .map(|n| {
                let [a, b] = g.position(n);
                3.0 * (a * 2.0).sin() + b * b * 4.0
            })
            .collect();
        let v: Vec<f64> = (0..g.num_nodes()).map(|n| 0.3 + 0.6 * g.position(n)[0]).collect();
        let nodes: Vec<usize> = (0..g.num_nodes()).step_by(7).collect();
        for f in Bulk::ALL {
            let params = EnergyParams::default().with_functions(Psi::Quadratic, f, Well::QuadraticWell);
            for mode in [Mode::Lifting, Mode::Direct] {
                for probe in gradient_check(&g, &x, &v, &params, mode, &nodes, 1e-5) {
                    assert!(probe.passed, "{f} {mode} {probe:?}");
                }
            }
        }
    }

    #[test]
    fn additivity_over_column_split() {
        let g = GridSpec::new_2d([2.0, 1.0], [21, 11]).unwrap();
        let x: Vec<f64> = (0..g.num_nodes()).map(|n| (n as f64 * 0.37).sin()).collect();
        let v: Vec<f64> = (0..g.num_nodes()).map(|n| 0.5 + 0.5 * (n as f64 * 0.11).cos()).collect();
        let p = EnergyParams::default();
        let total = bulk_energy(&g, &x, &v, &p, Mode::Direct);
        let split = 7;
        let cx = g.nx() - 1;
        let (mut left, mut right) = (0.0, 0.0);
        for c in 0..g.num_cells() {
            let e = bulk_cell(&g, c, &x, &v, &p, Mode::Direct);
            if c % cx < split {
                left += e;
            } else {
                right += e;
            }
        }
        assert!((left + right - total).abs() < 1e-12 * total.abs().max(1.0));
    }
}
