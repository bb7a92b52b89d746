//! Minimization in the phase field for a fixed map.
//!
//! With `a_i = sum_{c ∋ i} vol f_c / #corners` the `v`-objective is
//!
//! ```text
//! J(v) = sum_i a_i psi(v_i) + sum_i m_i W(v_i) / eps + eps sum_e w_e (v_a - v_b)^2
//! ```
//!
//! For `psi = t^2`, `W = (1-s)^2` it is quadratic and its minimizer solves
//! `(a_i + m_i/eps) v_i + eps (K v)_i = m_i / eps`; otherwise a projected
//! Newton iteration with a convexified Hessian is used.

use crate::energy::{cell_forcing, Mode};
use crate::error::{Error, Result};
use crate::fields::{check_grids, ScalarField};
use crate::grid::GridSpec;
use crate::linalg::{conjugate_gradient, EdgeOperator};
use crate::minimizer::FieldState;
use crate::model::{EnergyParams, Psi};

const CG_TOL: f64 = 1e-10;
const CG_MAX: usize = 10_000;

pub(crate) struct PhaseSystem {
    a: Vec<f64>,
    masses: Vec<f64>,
    stiffness: Vec<(usize, usize, f64)>,
}

impl PhaseSystem {
    pub(crate) fn new(grid: &GridSpec, forcing: &[f64]) -> Self {
        let vol = grid.cell_volume();
        let mut a = vec![0.0; grid.num_nodes()];
        for (c, &f) in forcing.iter().enumerate() {
            let (nodes, k) = grid.cell_nodes(c);
            for &n in &nodes[..k] {
                a[n] += vol * f / k as f64;
            }
        }
        Self {
            a,
            masses: grid.node_masses(),
            stiffness: grid.stiffness_edges(),
        }
    }

    pub(crate) fn objective(&self, v: &[f64], params: &EnergyParams) -> f64 {
        let eps = params.epsilon;
        let local: f64 = v
            .iter()
            .zip(&self.a)
            .zip(&self.masses)
            .map(|((&vi, a), m)| a * params.psi.eval(vi) + m * params.w.eval(vi) / eps)
            .sum();
        let grad: f64 = self.stiffness.iter().map(|&(p, q, w)| w * (v[p] - v[q]).powi(2)).sum();
        local + eps * grad
    }

    fn gradient(&self, v: &[f64], params: &EnergyParams) -> Vec<f64> {
        let eps = params.epsilon;
        let mut g: Vec<f64> = (0..v.len())
            .map(|i| self.a[i] * params.psi.deriv(v[i]) + self.masses[i] * params.w.deriv(v[i]) / eps)
            .collect();
        for &(p, q, w) in &self.stiffness {
            let d = 2.0 * eps * w * (v[p] - v[q]);
            g[p] += d;
            g[q] -= d;
        }
        g
    }

    fn stiffness_scaled(&self, eps: f64) -> Vec<(usize, usize, f64)> {
        self.stiffness.iter().map(|&(p, q, w)| (p, q, eps * w)).collect()
    }

    /// Exact minimizer for the quadratic model.
    fn solve_linear(&self, v: &mut [f64], params: &EnergyParams, fixed: Option<&[bool]>) -> Result<()> {
        let eps = params.epsilon;
        let diag: Vec<f64> = self.a.iter().zip(&self.masses).map(|(a, m)| a + m / eps).collect();
        let edges = self.stiffness_scaled(eps);
        let mut rhs: Vec<f64> = self.masses.iter().map(|m| m / eps).collect();
        if let Some(fx) = fixed {
            for &(p, q, w) in &edges {
                match (fx[p], fx[q]) {
                    (false, true) => rhs[p] += w * v[q],
                    (true, false) => rhs[q] += w * v[p],
                    _ => {}
                }
            }
            for (i, &f) in fx.iter().enumerate() {
                if f {
                    rhs[i] = v[i];
                }
            }
        }
        let op = EdgeOperator { diag, edges, fixed };
        let stats = conjugate_gradient(&op, &rhs, v, CG_TOL, CG_MAX);
        if !stats.converged {
            return Err(Error::Solver {
                iterations: stats.iterations,
                residual: stats.relative_residual,
            });
        }
        v.iter_mut().for_each(|x| *x = x.clamp(0.0, 1.0));
        Ok(())
    }

    /// Projected Newton iteration with the Hessian of `J` with negative
    /// curvature dropped, followed by a sweep that tries `v_i = 0` where `psi`
    /// jumps at the origin.
    fn solve_projected(&self, v: &mut [f64], params: &EnergyParams, fixed: Option<&[bool]>) -> Result<()> {
        let eps = params.epsilon;
        let n = v.len();
        let is_fixed = |i: usize| fixed.is_some_and(|f| f[i]);
        let edges = self.stiffness_scaled(eps);
        let mut value = self.objective(v, params);
        for _ in 0..500 {
            let mut g = self.gradient(v, params);
            let mut diag = vec![0.0; n];
            let mut frozen = vec![false; n];
            for i in 0..n {
                // nodes held at a bound by the gradient are frozen for this step
                let at_bound = (v[i] <= 0.0 && g[i] > 0.0) || (v[i] >= 1.0 && g[i] < 0.0);
                if is_fixed(i) || at_bound {
                    g[i] = 0.0;
                    frozen[i] = true;
                }
                diag[i] = self.a[i] * params.psi.second_deriv(v[i]).max(0.0)
                    + self.masses[i] * params.w.second_deriv(v[i]).max(0.0) / eps
                    + 1e-3 * self.masses[i] / eps;
            }
            let op = EdgeOperator {
                diag,
                edges: edges.clone(),
                fixed: Some(&frozen),
            };
            let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
            let mut d = vec![0.0; n];
            conjugate_gradient(&op, &rhs, &mut d, 1e-8, 2000);
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            if !(slope < 0.0) {
                break;
            }
            let mut alpha = 1.0;
            let mut trial = v.to_vec();
            let mut accepted = false;
            for _ in 0..40 {
                for i in 0..n {
                    trial[i] = (v[i] + alpha * d[i]).clamp(0.0, 1.0);
                }
                let t = self.objective(&trial, params);
                if t <= value + 1e-4 * alpha * slope {
                    accepted = true;
                    let change = value - t;
                    v.copy_from_slice(&trial);
                    value = t;
                    if change <= 1e-13 * value.abs().max(1e-300) {
                        accepted = false;
                    }
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if params.psi == Psi::JumpLinear {
            for i in 0..n {
                if is_fixed(i) || v[i] == 0.0 {
                    continue;
                }
                let old = v[i];
                v[i] = 0.0;
                let t = self.objective(v, params);
                if t < value {
                    value = t;
                } else {
                    v[i] = old;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn solve(&self, v: &mut [f64], params: &EnergyParams, fixed: Option<&[bool]>) -> Result<()> {
        if params.has_quadratic_phase() {
            self.solve_linear(v, params, fixed)
        } else {
            self.solve_projected(v, params, fixed)
        }
    }
}

/// Minimizes the energy in `v` with the map held fixed, starting from `v`.
pub fn v_step(field: &FieldState, v: &ScalarField, params: &EnergyParams) -> Result<ScalarField> {
    params.validate()?;
    check_grids(field.grid(), v.grid())?;
    let grid = field.grid();
    let forcing = cell_forcing(grid, field.values(), params, field.mode());
    let mut out = v.values().to_vec();
    PhaseSystem::new(grid, &forcing).solve(&mut out, params, None)?;
    Ok(ScalarField::from_clamped(*grid, out))
}

/// The `v`-objective `J(v)` for the map `field`.
pub fn v_objective(field: &FieldState, v: &ScalarField, params: &EnergyParams) -> Result<f64> {
    check_grids(field.grid(), v.grid())?;
    let grid = field.grid();
    let forcing = cell_forcing(grid, field.values(), params, field.mode());
    Ok(PhaseSystem::new(grid, &forcing).objective(v.values(), params))
}

/// Same as [`v_step`] on raw slices, used inside the alternating loop.
pub(crate) fn v_step_raw(
    grid: &GridSpec,
    x: &[f64],
    mode: Mode,
    v: &mut [f64],
    params: &EnergyParams,
    fixed: Option<&[bool]>,
) -> Result<()> {
    let forcing = cell_forcing(grid, x, params, mode);
    PhaseSystem::new(grid, &forcing).solve(v, params, fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::evaluate;
    use crate::fields::AngleField;
    use crate::model::{Bulk, Well};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_map_gives_v_one() {
        let g = GridSpec::new_2d([1.0, 1.0], [9, 9]).unwrap();
        let state = FieldState::Angle(AngleField::zeros(g));
        let v0 = ScalarField::constant(g, 0.3).unwrap();
        let v = v_step(&state, &v0, &EnergyParams::default()).unwrap();
        assert!(v.values().iter().all(|x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn uniform_forcing_scalar_formula() {
        // |grad phi| = c everywhere: v = (1/eps) / (c + 1/eps)
        let g = GridSpec::new_1d(1.0, 21).unwrap();
        let c = 3.0;
        for eps in [0.1, 0.01, 0.001] {
            let p = EnergyParams::default().with_epsilon(eps);
            let state = FieldState::Angle(AngleField::from_fn(g, |x| c * x[0]));
            let v = v_step(&state, &ScalarField::constant(g, 1.0).unwrap(), &p).unwrap();
            let fc = crate::energy::smoothed_norm(c * c, p.eta);
            let expect = (1.0 / eps) / (fc + 1.0 / eps);
            for x in v.values() {
                assert!((x - expect).abs() < 1e-8, "{x} vs {expect}");
            }
        }
    }

    fn check_optimality(params: EnergyParams) {
        let g = GridSpec::new_2d([1.0, 1.0], [15, 15]).unwrap();
        let phi = AngleField::from_fn(g, |[x, y]| 4.0 * (3.0 * x).sin() * y + if x > 0.5 { 2.0 } else { 0.0 });
        let state = FieldState::Angle(phi);
        let v = v_step(&state, &ScalarField::constant(g, 1.0).unwrap(), &params).unwrap();
        let base = v_objective(&state, &v, &params).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let dir: Vec<f64> = (0..g.num_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            for sign in [-1.0, 1.0] {
                let pert: Vec<f64> = v
                    .values()
                    .iter()
                    .zip(&dir)
                    .map(|(x, d)| (x + sign * 1e-3 * d / norm).clamp(0.0, 1.0))
                    .collect();
                let pv = ScalarField::new(g, pert).unwrap();
                let val = v_objective(&state, &pv, &params).unwrap();
                assert!(val >= base - 1e-8, "{params:?}: {val} < {base}");
            }
        }
    }

    #[test]
    fn optimal_against_random_perturbations() {
        check_optimality(EnergyParams::default().with_epsilon(0.05));
        check_optimality(
            EnergyParams::default()
                .with_epsilon(0.05)
                .with_functions(Psi::Linear, Bulk::Area, Well::QuarticWell),
        );
    }

    #[test]
    fn step_lowers_full_energy() {
        let g = GridSpec::new_1d(1.0, 41).unwrap();
        let p = EnergyParams::default().with_epsilon(0.05);
        let phi: Vec<f64> = (0..41).map(|i| if i < 20 { 0.0 } else { 1.5 }).collect();
        let mut v = vec![1.0; 41];
        let before = evaluate(&g, &phi, &v, &p, Mode::Lifting).total;
        v_step_raw(&g, &phi, Mode::Lifting, &mut v, &p, None).unwrap();
        let after = evaluate(&g, &phi, &v, &p, Mode::Lifting).total;
        assert!(after < before);
        assert!(v[20] < 0.9);
    }

    #[test]
    fn jump_linear_psi_can_reach_zero() {
        let g = GridSpec::new_1d(1.0, 41).unwrap();
        let p = EnergyParams::default()
            .with_epsilon(0.02)
            .with_functions(Psi::JumpLinear, Bulk::Linear, Well::QuadraticWell);
        let phi: Vec<f64> = (0..41).map(|i| if i < 20 { 0.0 } else { 100.0 }).collect();
        let mut v = vec![1.0; 41];
        v_step_raw(&g, &phi, Mode::Lifting, &mut v, &p, None).unwrap();
        assert!(v[19] == 0.0 || v[20] == 0.0);
    }
}
