//! Descent in the map for a fixed phase field.
//!
//! Each iteration solves `M d = -grad` where `M` is the weighted graph
//! Laplacian obtained by freezing the diffusivity `psi_c f'(r)/r` at the
//! current iterate (lagged diffusivity), then backtracks along `d` until the
//! Armijo condition holds. In direct mode the nodal step is capped so that
//! plaquette windings cannot change within one step.

use std::f64::consts::PI;

use crate::energy::{bulk_cell, bulk_energy, bulk_gradient_on, cell_psi, smoothed_norm, Mode};
use crate::error::{Error, Result};
use crate::fields::{check_grids, AngleField, CircleField, ScalarField};
use crate::grid::GridSpec;
use crate::linalg::{conjugate_gradient, EdgeOperator};
use crate::model::EnergyParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UStepOptions {
    pub max_iters: usize,
    /// Stop once the largest nodal update falls below this.
    pub tol_step: f64,
    /// Stop once the relative energy decrease of an iteration falls below this.
    pub tol_energy: f64,
    /// Cap on the largest nodal change per iteration in direct mode.
    pub max_direct_step: f64,
}

impl Default for UStepOptions {
    fn default() -> Self {
        Self {
            max_iters: 20,
            tol_step: 1e-8,
            tol_energy: 1e-9,
            max_direct_step: PI / 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UStepStats {
    pub iterations: usize,
    pub energy: f64,
    /// Largest nodal change accumulated over the call.
    pub max_change: f64,
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;

/// Lagged-diffusivity edge weights accumulated over `cells`, indexed by
/// [`GridSpec::edge_index`]; `touched` lists the edges that received weight.
#[allow(clippy::too_many_arguments)]
fn preconditioner_weights(
    grid: &GridSpec,
    cells: &[usize],
    x: &[f64],
    v: &[f64],
    params: &EnergyParams,
    mode: Mode,
    w: &mut [f64],
    touched: &mut Vec<usize>,
) {
    let vol = grid.cell_volume();
    let eta = params.eta;
    let floor = eta.max(1e-3);
    w.iter_mut().for_each(|x| *x = 0.0);
    touched.clear();
    for &c in cells {
        let (terms, k) = grid.cell_terms(c);
        let r2: f64 = terms[..k].iter().map(|t| t.coef * mode.diff_sq(x[t.a], x[t.b])).sum();
        let psi = cell_psi(grid, c, v, params);
        let denom = (r2 + eta * eta).sqrt().max(floor);
        let a_c = vol * psi * params.f.deriv(smoothed_norm(r2, eta)) / (2.0 * denom);
        for t in &terms[..k] {
            let e = grid.edge_index(t.a, t.b);
            if w[e] == 0.0 {
                touched.push(e);
            }
            // keep touched edges distinguishable from untouched ones
            w[e] += (2.0 * a_c * t.coef).max(f64::MIN_POSITIVE);
        }
    }
}

fn bulk_energy_on(grid: &GridSpec, cells: &[usize], x: &[f64], v: &[f64], params: &EnergyParams, mode: Mode) -> f64 {
    cells.iter().map(|&c| bulk_cell(grid, c, x, v, params, mode)).sum()
}

/// Runs up to `opts.max_iters` descent iterations on `x` in place.
///
/// Only the free nodes and the cells touching them take part; the energy of
/// the remaining cells is a constant.
pub(crate) fn u_step_raw(
    grid: &GridSpec,
    x: &mut [f64],
    v: &[f64],
    params: &EnergyParams,
    mode: Mode,
    fixed: Option<&[bool]>,
    opts: &UStepOptions,
) -> Result<UStepStats> {
    let is_fixed = |i: usize| fixed.is_some_and(|f| f[i]);
    let free: Vec<usize> = (0..x.len()).filter(|&i| !is_fixed(i)).collect();
    let mut local = vec![usize::MAX; x.len()];
    for (l, &i) in free.iter().enumerate() {
        local[i] = l;
    }
    let cells: Vec<usize> = (0..grid.num_cells())
        .filter(|&c| {
            let (nodes, k) = grid.cell_nodes(c);
            nodes[..k].iter().any(|&n| !is_fixed(n))
        })
        .collect();
    let m = free.len();
    let offset = bulk_energy(grid, x, v, params, mode) - bulk_energy_on(grid, &cells, x, v, params, mode);
    let mut energy = bulk_energy_on(grid, &cells, x, v, params, mode);
    let start: Vec<f64> = free.iter().map(|&i| x[i]).collect();
    let mut iterations = 0;
    let mut trial = x.to_vec();
    let mut weights = vec![0.0; grid.edges().len()];
    let mut touched = Vec::new();
    for _ in 0..opts.max_iters {
        if m == 0 {
            break;
        }
        let (_, full_grad) = bulk_gradient_on(grid, cells.iter().copied(), x, v, params, mode);
        let grad: Vec<f64> = free.iter().map(|&i| full_grad[i]).collect();
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Step("non-finite gradient".into()));
        }
        if grad.iter().all(|&g| g == 0.0) {
            break;
        }
        preconditioner_weights(grid, &cells, x, v, params, mode, &mut weights, &mut touched);
        let mean_w = touched.iter().map(|&e| weights[e]).sum::<f64>() / touched.len().max(1) as f64;
        let reg = 1e-8 * mean_w.max(f64::MIN_POSITIVE);
        let all_edges = grid.edges();
        let mut diag = vec![reg; m];
        let mut edges = Vec::with_capacity(touched.len());
        for &e in &touched {
            let (a, b, w) = (local[all_edges[e].a], local[all_edges[e].b], weights[e]);
            match (a != usize::MAX, b != usize::MAX) {
                (true, true) => edges.push((a, b, w)),
                (true, false) => diag[a] += w,
                (false, true) => diag[b] += w,
                _ => {}
            }
        }
        let op = EdgeOperator {
            diag,
            edges,
            fixed: None,
        };
        let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut d = vec![0.0; m];
        conjugate_gradient(&op, &rhs, &mut d, 1e-4, 200);
        let mut slope: f64 = grad.iter().zip(&d).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) {
            // fall back to the Jacobi-scaled gradient
            let diag = op.diagonal();
            for l in 0..m {
                d[l] = -grad[l] / diag[l];
            }
            slope = grad.iter().zip(&d).map(|(g, d)| g * d).sum();
            if !(slope < 0.0) {
                return Err(Error::Step(format!("no descent direction (slope {slope:e})")));
            }
        }
        let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut alpha = 1.0;
        if mode == Mode::Direct && dmax > opts.max_direct_step {
            alpha = opts.max_direct_step / dmax;
        }
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for (l, &i) in free.iter().enumerate() {
                trial[i] = x[i] + alpha * d[l];
            }
            let t = bulk_energy_on(grid, &cells, &trial, v, params, mode);
            if t.is_nan() {
                return Err(Error::Step("energy evaluated to NaN".into()));
            }
            if t <= energy + ARMIJO * alpha * slope {
                accepted = Some(t);
                break;
            }
            alpha *= 0.5;
        }
        // exhausting the halvings means the step has underflowed: treat as converged
        let Some(t) = accepted else {
            for &i in &free {
                trial[i] = x[i];
            }
            break;
        };
        for &i in &free {
            x[i] = trial[i];
        }
        iterations += 1;
        let decrease = energy - t;
        energy = t;
        if alpha * dmax <= opts.tol_step || decrease <= opts.tol_energy * (energy + offset).abs() {
            break;
        }
    }
    let max_change = free
        .iter()
        .zip(&start)
        .fold(0.0f64, |m, (&i, b)| m.max((x[i] - b).abs()));
    Ok(UStepStats {
        iterations,
        energy: energy + offset,
        max_change,
    })
}

/// Descent on a lifting with `v` fixed; `fixed` marks Dirichlet nodes.
pub fn u_step_lifting(
    phi: &AngleField,
    v: &ScalarField,
    params: &EnergyParams,
    fixed: Option<&[bool]>,
    opts: &UStepOptions,
) -> Result<(AngleField, UStepStats)> {
    params.validate()?;
    check_grids(phi.grid(), v.grid())?;
    let mut x = phi.values().to_vec();
    let stats = u_step_raw(phi.grid(), &mut x, v.values(), params, Mode::Lifting, fixed, opts)?;
    Ok((AngleField::new(*phi.grid(), x)?, stats))
}

/// Descent on the nodal angles of a circle map with `v` fixed.
pub fn u_step_direct(
    u: &CircleField,
    v: &ScalarField,
    params: &EnergyParams,
    fixed: Option<&[bool]>,
    opts: &UStepOptions,
) -> Result<(CircleField, UStepStats)> {
    params.validate()?;
    check_grids(u.grid(), v.grid())?;
    let mut x = u.angles().to_vec();
    let stats = u_step_raw(u.grid(), &mut x, v.values(), params, Mode::Direct, fixed, opts)?;
    Ok((CircleField::from_angles(*u.grid(), x)?, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_dipole_map, winding_scan, VortexConfig};
    use crate::model::{Bulk, Psi, Well};

    #[test]
    fn zero_phase_field_leaves_map_unchanged() {
        let g = GridSpec::new_1d(1.0, 11).unwrap();
        let phi = AngleField::from_fn(g, |p| (5.0 * p[0]).sin());
        let v = ScalarField::constant(g, 0.0).unwrap();
        let (out, stats) = u_step_lifting(&phi, &v, &EnergyParams::default(), None, &UStepOptions::default()).unwrap();
        assert_eq!(out, phi);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn constant_map_is_fixed_point() {
        let g = GridSpec::new_2d([1.0, 1.0], [8, 8]).unwrap();
        let u = CircleField::constant(g, 2.0);
        let v = ScalarField::constant(g, 1.0).unwrap();
        let (out, _) = u_step_direct(&u, &v, &EnergyParams::default(), None, &UStepOptions::default()).unwrap();
        assert_eq!(out, u);
    }

    #[test]
    fn pinned_ends_relax_to_linear() {
        let n = 41;
        let g = GridSpec::new_1d(1.0, n).unwrap();
        let a = 1.2;
        let phi = AngleField::from_fn(g, |p| a * p[0] + 0.3 * (9.0 * p[0]).sin() * p[0] * (1.0 - p[0]));
        let v = ScalarField::constant(g, 1.0).unwrap();
        let mut fixed = vec![false; n];
        fixed[0] = true;
        fixed[n - 1] = true;
        let p = EnergyParams::default().with_functions(Psi::Quadratic, Bulk::Area, Well::QuadraticWell);
        let opts = UStepOptions {
            max_iters: 200,
            tol_energy: 0.0,
            ..Default::default()
        };
        let (out, _) = u_step_lifting(&phi, &v, &p, Some(&fixed), &opts).unwrap();
        for (i, x) in out.values().iter().enumerate() {
            let lin = a * i as f64 / (n - 1) as f64;
            assert!((x - lin).abs() < 1e-5, "node {i}: {x} vs {lin}");
        }
    }

    #[test]
    fn energy_never_increases() {
        let g = GridSpec::new_2d([1.0, 1.0], [12, 12]).unwrap();
        let phi = AngleField::from_fn(g, |[x, y]| 3.0 * (x * 7.0).cos() * y);
        let v = ScalarField::new(g, (0..144).map(|i| 0.2 + 0.8 * ((i * 37) % 11) as f64 / 10.0).collect()).unwrap();
        let p = EnergyParams::default();
        let mut cur = phi;
        let mut last = bulk_energy(&g, cur.values(), v.values(), &p, Mode::Lifting);
        let opts = UStepOptions {
            max_iters: 1,
            ..Default::default()
        };
        for _ in 0..10 {
            let (next, stats) = u_step_lifting(&cur, &v, &p, None, &opts).unwrap();
            assert!(stats.energy <= last);
            last = stats.energy;
            cur = next;
        }
    }

    #[test]
    fn direct_steps_preserve_windings() {
        let g = GridSpec::new_2d([1.0, 1.0], [33, 33]).unwrap();
        let h = g.h();
        let cfg = VortexConfig::dipole([0.25 + h / 2.0, 0.5 + h / 2.0], [0.75 + h / 2.0, 0.5 + h / 2.0]);
        let u = make_dipole_map(&g, &cfg).unwrap();
        let before = winding_scan(&u).unwrap();
        let v = ScalarField::constant(g, 1.0).unwrap();
        let opts = UStepOptions {
            max_iters: 1,
            ..Default::default()
        };
        let (out, stats) = u_step_direct(&u, &v, &EnergyParams::default(), None, &opts).unwrap();
        assert!(stats.max_change <= opts.max_direct_step + 1e-12);
        assert_eq!(winding_scan(&out).unwrap(), before);
    }
}
