//! Explicit competitors for a lifting with prescribed jumps.
//!
//! Around every jump edge the phase field dips to `t*(z)`, the level at which
//! `g(z) = psi(t*) z + 2 c_W(t*)` is attained, and climbs back to `1` along the
//! optimal profile `v' = sqrt(W(v)) / eps`, truncated to `1` beyond the layer
//! width. The lifting itself is kept: its jump is taken up by the single cell
//! straddling each jump edge, where `v = t*` at both ends.

use crate::energy::{eval_f_eps_lifting, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::fields::{AngleField, ScalarField};
use crate::grid::{Edge, GridSpec};
use crate::jump_cost::JumpCost;
use crate::minimizer::Schedule;
use crate::model::{EnergyParams, Well};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryOptions {
    /// Layer half-width is `layer_constant * eps * |ln eps|`.
    pub layer_constant: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self { layer_constant: 6.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryStage {
    pub epsilon: f64,
    pub phi: AngleField,
    pub v: ScalarField,
    pub energy: EnergyBreakdown,
}

/// Tabulated solution of `v' = sqrt(W(v)) / eps`, `v(0) = t`, on `[0, width]`.
struct Profile {
    step: f64,
    values: Vec<f64>,
}

impl Profile {
    fn new(t: f64, w: Well, eps: f64, width: f64) -> Self {
        let step = eps / 200.0;
        let n = (width / step).ceil() as usize + 1;
        let rhs = |v: f64| w.sqrt_eval(v.min(1.0)) / eps;
        let mut values = Vec::with_capacity(n + 1);
        let mut v = t;
        values.push(v);
        for _ in 0..n {
            let k1 = rhs(v);
            let k2 = rhs(v + 0.5 * step * k1);
            let k3 = rhs(v + 0.5 * step * k2);
            let k4 = rhs(v + step * k3);
            v = (v + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).min(1.0);
            values.push(v);
        }
        Self { step, values }
    }

    fn eval(&self, r: f64, width: f64) -> f64 {
        if r >= width {
            return 1.0;
        }
        let s = r / self.step;
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let f = s - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// Endpoints of the dual face crossed by an edge.
fn face_segment(grid: &GridSpec, e: &Edge) -> ([f64; 2], [f64; 2]) {
    let pa = grid.position(e.a);
    let pb = grid.position(e.b);
    let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
    if grid.dim() == 1 {
        return (mid, mid);
    }
    let other = 1 - e.axis;
    let half = 0.5 * grid.spacing(other);
    let mut lo = mid;
    let mut hi = mid;
    lo[other] -= half;
    hi[other] += half;
    (lo, hi)
}

fn point_segment_distance(p: [f64; 2], (a, b): ([f64; 2], [f64; 2])) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

fn segment_distance(s: ([f64; 2], [f64; 2]), t: ([f64; 2], [f64; 2])) -> f64 {
    // axis-aligned segments on a grid never cross without touching an endpoint
    point_segment_distance(s.0, t)
        .min(point_segment_distance(s.1, t))
        .min(point_segment_distance(t.0, s))
        .min(point_segment_distance(t.1, s))
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Checks that distinct connected pieces of the jump set stay `2 width` apart.
fn check_layers(faces: &[([f64; 2], [f64; 2])], width: f64, touch: f64) -> Result<()> {
    let n = faces.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = segment_distance(faces[i], faces[j]);
            dist[i * n + j] = d;
            if d <= touch {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if find(&mut parent, i) != find(&mut parent, j) && dist[i * n + j] < 2.0 * width {
                return Err(Error::LayerCollision(format!(
                    "jump pieces {:.4} apart but layers need {:.4}; use a smaller epsilon or layer constant",
                    dist[i * n + j],
                    2.0 * width
                )));
            }
        }
    }
    Ok(())
}

/// Recovery pairs `(phi, v)` for each `epsilon` of the schedule.
///
/// `jumps` flags the jump edges of `phi_target` in [`GridSpec::edges`] order.
pub fn recovery_sequence(
    phi_target: &AngleField,
    jumps: &[bool],
    params: &EnergyParams,
    schedule: &Schedule,
    options: &RecoveryOptions,
) -> Result<Vec<RecoveryStage>> {
    params.validate()?;
    schedule.validate()?;
    let grid = phi_target.grid();
    let edges = grid.edges();
    if jumps.len() != edges.len() {
        return Err(Error::Dimension(format!(
            "jump mask has {} entries but the grid has {} edges",
            jumps.len(),
            edges.len()
        )));
    }
    let jc = JumpCost::new(params)?;
    let phi = phi_target.values();
    let jump_edges: Vec<(Edge, f64)> = edges
        .iter()
        .zip(jumps)
        .filter(|(_, &j)| j)
        .map(|(e, _)| (*e, (phi[e.b] - phi[e.a]).abs()))
        .collect();
    let faces: Vec<_> = jump_edges.iter().map(|(e, _)| face_segment(grid, e)).collect();
    let t_star: Vec<f64> = jump_edges.iter().map(|&(_, z)| jc.argmin(z)).collect();
    let positions: Vec<[f64; 2]> = (0..grid.num_nodes()).map(|n| grid.position(n)).collect();

    let mut out = Vec::with_capacity(schedule.epsilon_list.len());
    for &eps in &schedule.epsilon_list {
        let p = params.with_epsilon(eps);
        let width = options.layer_constant * eps * eps.ln().abs();
        check_layers(&faces, width, 1e-9 * grid.h()).map_err(|e| e.context(format!("epsilon={eps}")))?;
        let mut profiles: Vec<(f64, Profile)> = Vec::new();
        let mut which = Vec::with_capacity(t_star.len());
        for &t in &t_star {
            let idx = match profiles.iter().position(|(s, _)| *s == t) {
                Some(i) => i,
                None => {
                    profiles.push((t, Profile::new(t, p.w, eps, width)));
                    profiles.len() - 1
                }
            };
            which.push(idx);
        }
        let mut v = vec![1.0f64; grid.num_nodes()];
        for (k, (e, _)) in jump_edges.iter().enumerate() {
            let half = 0.5 * grid.spacing(e.axis);
            let profile = &profiles[which[k]].1;
            let (lo, hi) = faces[k];
            for (node, pos) in positions.iter().enumerate() {
                // cheap reject before the exact distance
                let box_d = (lo[0] - pos[0])
                    .max(pos[0] - hi[0])
                    .max(lo[1] - pos[1])
                    .max(pos[1] - hi[1]);
                if box_d - half > width {
                    continue;
                }
                let r = (point_segment_distance(*pos, faces[k]) - half).max(0.0);
                v[node] = v[node].min(profile.eval(r, width));
            }
        }
        let v = ScalarField::from_clamped(*grid, v);
        let energy = eval_f_eps_lifting(phi_target, &v, &p)?;
        out.push(RecoveryStage {
            epsilon: eps,
            phi: phi_target.clone(),
            v,
            energy,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn step_target(n: usize, z: f64) -> (AngleField, Vec<bool>) {
        let g = GridSpec::new_1d(1.0, n).unwrap();
        let phi = AngleField::from_fn(g, |p| if p[0] < 0.5 - 1e-9 { 0.0 } else { z });
        let jumps = g.edges().iter().map(|e| phi.values()[e.a] != phi.values()[e.b]).collect();
        (phi, jumps)
    }

    #[test]
    fn no_jumps_is_bulk_only() {
        let g = GridSpec::new_1d(1.0, 51).unwrap();
        let phi = AngleField::from_fn(g, |p| 0.7 * p[0]);
        let jumps = vec![false; g.edges().len()];
        let out = recovery_sequence(&phi, &jumps, &EnergyParams::default(), &Schedule::default(), &Default::default())
            .unwrap();
        for s in out {
            assert!(s.v.values().iter().all(|&x| x == 1.0));
            assert!((s.energy.total - 0.7).abs() < 1e-5);
        }
    }

    #[test]
    fn single_jump_approaches_g() {
        let schedule = Schedule {
            epsilon_list: vec![0.01, 0.005],
            ..Default::default()
        };
        let (phi, jumps) = step_target(4001, FRAC_PI_2);
        let out = recovery_sequence(&phi, &jumps, &EnergyParams::default(), &schedule, &Default::default()).unwrap();
        let g = 2.0 * PI / (PI + 4.0);
        let last = out.last().unwrap().energy.total;
        assert!(last >= g - 1e-3 && last < 1.02 * g, "{last} vs {g}");
    }

    #[test]
    fn close_jumps_collide() {
        let g = GridSpec::new_1d(1.0, 101).unwrap();
        let phi = AngleField::from_fn(g, |p| if (0.45..0.55).contains(&p[0]) { 1.0 } else { 0.0 });
        let jumps: Vec<bool> = g.edges().iter().map(|e| phi.values()[e.a] != phi.values()[e.b]).collect();
        let schedule = Schedule {
            epsilon_list: vec![0.05],
            ..Default::default()
        };
        let err = recovery_sequence(&phi, &jumps, &EnergyParams::default(), &schedule, &Default::default()).unwrap_err();
        assert!(matches!(err.root(), Error::LayerCollision(_)));
    }
}
