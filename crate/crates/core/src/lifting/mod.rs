//! Minimal liftings of a circle map over integer shift fields.
//!
//! A node field `theta` read as piecewise constant on dual cells is lifted by
//! `phi = theta + 2 pi k`. Every grid edge then carries the jump
//! `phi(b) - phi(a)` and the lifting costs
//!
//! ```text
//! m(k) = sum_edges g(|phi(b) - phi(a)|) * face
//! ```
//!
//! The objective is invariant under `k -> k + const`. Around a plaquette of
//! nonzero winding the raw differences cannot all be small, so every lifting
//! pays for at least one large jump there.

mod bruteforce;
mod local_search;
mod normalize;
mod transport;

pub use bruteforce::{mg_bruteforce, BRUTEFORCE_LIMIT};
pub use local_search::mg_local_search;
pub use normalize::{normalize_mod_2pi, Normalized};
pub use transport::{dipole_transport_estimate, straight_cut_shifts};

use std::f64::consts::TAU;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{CircleField, ShiftField};
use crate::grid::GridSpec;
use crate::jump_cost::JumpCost;

/// An edge of the lifting problem: `dtheta = theta(b) - theta(a)` in `(-2 pi, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftEdge {
    pub a: usize,
    pub b: usize,
    pub dtheta: f64,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct LiftingProblem {
    base: CircleField,
    cost: JumpCost,
    label_bound: i64,
    edges: Vec<LiftEdge>,
    /// `table[e * (4K + 1) + dk + 2K] = g(|dtheta_e + 2 pi dk|) * length_e`.
    table: Vec<f64>,
}

impl LiftingProblem {
    pub fn new(base: CircleField, cost: JumpCost, label_bound: i64) -> Result<Self> {
        if label_bound < 1 {
            return Err(Error::Domain(format!("label bound must be at least 1, got {label_bound}")));
        }
        let th = base.angles();
        let edges: Vec<LiftEdge> = base
            .grid()
            .edges()
            .iter()
            .map(|e| LiftEdge {
                a: e.a,
                b: e.b,
                dtheta: th[e.b] - th[e.a],
                length: e.face,
            })
            .collect();
        let width = (4 * label_bound + 1) as usize;
        let mut table = vec![0.0; edges.len() * width];
        table.par_chunks_mut(width).zip(&edges).for_each(|(row, e)| {
            for (j, slot) in row.iter_mut().enumerate() {
                let dk = j as i64 - 2 * label_bound;
                *slot = raw_cost(&cost, e, dk);
            }
        });
        Ok(Self {
            base,
            cost,
            label_bound,
            edges,
            table,
        })
    }

    pub fn base(&self) -> &CircleField {
        &self.base
    }

    pub fn grid(&self) -> &GridSpec {
        self.base.grid()
    }

    pub fn cost(&self) -> &JumpCost {
        &self.cost
    }

    pub fn label_bound(&self) -> i64 {
        self.label_bound
    }

    pub fn edges(&self) -> &[LiftEdge] {
        &self.edges
    }

    pub fn num_cells(&self) -> usize {
        self.base.grid().num_nodes()
    }

    /// Cost of edge `e` when the shift increases by `dk` from `a` to `b`.
    #[inline]
    pub fn edge_cost(&self, e: usize, dk: i64) -> f64 {
        let k2 = 2 * self.label_bound;
        if (-k2..=k2).contains(&dk) {
            self.table[e * (2 * k2 + 1) as usize + (dk + k2) as usize]
        } else {
            raw_cost(&self.cost, &self.edges[e], dk)
        }
    }

    /// Shifts `k` by a constant so that it lies in `[-K, K]`, choosing the
    /// constant of least magnitude. `None` if the range of `k` exceeds `2K`.
    pub(crate) fn recenter(&self, k: &mut [i64]) -> Option<()> {
        let lo = *k.iter().min()?;
        let hi = *k.iter().max()?;
        let kb = self.label_bound;
        if hi - lo > 2 * kb {
            return None;
        }
        let c = 0i64.clamp(hi - kb, lo + kb);
        if c != 0 {
            k.iter_mut().for_each(|x| *x -= c);
        }
        Some(())
    }

    fn check_labels(&self, k: &ShiftField) -> Result<()> {
        crate::fields::check_grids(self.grid(), k.grid())?;
        if let Some((i, &x)) = k.values().iter().enumerate().find(|(_, x)| x.abs() > self.label_bound) {
            return Err(Error::Domain(format!(
                "label {x} at cell {i} exceeds the bound {}",
                self.label_bound
            )));
        }
        Ok(())
    }
}

fn raw_cost(cost: &JumpCost, e: &LiftEdge, dk: i64) -> f64 {
    let z = (e.dtheta + TAU * dk as f64).abs();
    let g = match cost.closed_form(z) {
        Some(g) => g,
        None => cost.value(z),
    };
    g * e.length
}

/// Total cost of the lifting `theta + 2 pi k`.
pub fn mg_objective(problem: &LiftingProblem, k: &ShiftField) -> Result<f64> {
    problem.check_labels(k)?;
    Ok(objective_unchecked(problem, k.values()))
}

pub(crate) fn objective_unchecked(problem: &LiftingProblem, k: &[i64]) -> f64 {
    problem
        .edges
        .iter()
        .enumerate()
        .map(|(i, e)| problem.edge_cost(i, k[e.b] - k[e.a]))
        .sum()
}

/// Cost restricted to edges whose lifted jump is at least `sigma`: the part of
/// the lifting cost carried by its large discontinuities.
pub fn sigma_jump_cost(problem: &LiftingProblem, k: &ShiftField, sigma: f64) -> Result<f64> {
    problem.check_labels(k)?;
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    let kv = k.values();
    Ok(problem
        .edges
        .iter()
        .enumerate()
        .filter(|(_, e)| {
            let jump = (e.dtheta + TAU * (kv[e.b] - kv[e.a]) as f64).abs();
            jump > 0.0 && jump >= sigma
        })
        .map(|(i, e)| problem.edge_cost(i, kv[e.b] - kv[e.a]))
        .sum::<f64>()
        + 0.0)
}

/// Marks edges whose lifted jump is at least `sigma`, in edge order.
pub fn jump_mask(problem: &LiftingProblem, k: &ShiftField, sigma: f64) -> Result<Vec<bool>> {
    problem.check_labels(k)?;
    let kv = k.values();
    Ok(problem
        .edges
        .iter()
        .map(|e| {
            let jump = (e.dtheta + TAU * (kv[e.b] - kv[e.a]) as f64).abs();
            jump > 0.0 && jump >= sigma
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimality {
    Exhaustive,
    LocalSearch,
}

impl fmt::Display for Optimality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimality::Exhaustive => "exhaustive",
            Optimality::LocalSearch => "local_search",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiftingSolution {
    pub k: ShiftField,
    pub objective: f64,
    pub optimality: Optimality,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::make_step_map;
    use crate::model::EnergyParams;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn jc() -> JumpCost {
        JumpCost::new(&EnergyParams::default()).unwrap()
    }

    fn gcf(z: f64) -> f64 {
        2.0 * z / (z + 2.0)
    }

    #[test]
    fn smooth_field_bounded_by_variation() {
        let g = GridSpec::new_2d([1.0, 1.0], [6, 6]).unwrap();
        let u = CircleField::from_angles(g, (0..36).map(|i| 0.05 * i as f64).collect()).unwrap();
        let p = LiftingProblem::new(u.clone(), jc(), 2).unwrap();
        let m = mg_objective(&p, &ShiftField::zeros(g)).unwrap();
        let tv: f64 = p.edges().iter().map(|e| e.dtheta.abs() * e.length).sum();
        assert!(m > 0.0 && m <= tv);
    }

    #[test]
    fn step_costs() {
        let g = GridSpec::new_1d(1.0, 10).unwrap();
        let u = make_step_map(&g, FRAC_PI_2).unwrap();
        let p = LiftingProblem::new(u, jc(), 2).unwrap();
        let zero = mg_objective(&p, &ShiftField::zeros(g)).unwrap();
        assert!((zero - gcf(FRAC_PI_2)).abs() < 1e-12);
        let k: Vec<i64> = (0..10).map(|i| if i < 5 { 0 } else { -1 }).collect();
        let shifted = mg_objective(&p, &ShiftField::new(g, k).unwrap()).unwrap();
        assert!((shifted - gcf(1.5 * PI)).abs() < 1e-12);
        assert!(shifted > zero);
    }

    #[test]
    fn labels_out_of_bounds() {
        let g = GridSpec::new_1d(1.0, 4).unwrap();
        let p = LiftingProblem::new(CircleField::constant(g, 0.0), jc(), 1).unwrap();
        let k = ShiftField::new(g, vec![0, 2, 0, 0]).unwrap();
        assert!(matches!(mg_objective(&p, &k), Err(Error::Domain(_))));
        assert!(LiftingProblem::new(CircleField::constant(g, 0.0), jc(), 0).is_err());
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let g = GridSpec::new_2d([1.0, 1.0], [3, 3]).unwrap();
        let u = CircleField::from_angles(g, (0..9).map(|i| 0.7 * i as f64).collect()).unwrap();
        let p = LiftingProblem::new(u, jc(), 2).unwrap();
        for (i, e) in p.edges().iter().enumerate() {
            for dk in -6..=6 {
                let z = (e.dtheta + TAU * dk as f64).abs();
                assert!((p.edge_cost(i, dk) - gcf(z) * e.length).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recenter_picks_least_shift() {
        let g = GridSpec::new_1d(1.0, 3).unwrap();
        let p = LiftingProblem::new(CircleField::constant(g, 0.0), jc(), 1).unwrap();
        let mut k = vec![1, 2, 3];
        p.recenter(&mut k).unwrap();
        assert_eq!(k, vec![-1, 0, 1]);
        let mut k = vec![0, 1, -1];
        p.recenter(&mut k).unwrap();
        assert_eq!(k, vec![0, 1, -1]);
        assert!(p.recenter(&mut [0, 3]).is_none());
    }
}
