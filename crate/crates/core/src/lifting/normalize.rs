//! Bookkeeping for liftings that agree modulo `2 pi`.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fields::{check_grids, principal, AngleField, ShiftField};

/// `phi = reference + 2 pi d` split into regions of constant `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub shift: ShiftField,
    /// `phi - 2 pi d`.
    pub field: AngleField,
    /// Region label per node; regions are 4-connected sets of constant shift.
    pub regions: Vec<usize>,
    pub region_shifts: Vec<i64>,
}

const TOL: f64 = 1e-9;

/// Decomposes each `phi` as `reference + 2 pi d` with `d` integer per node and
/// reports the partition on which `d` is constant.
pub fn normalize_mod_2pi(phis: &[AngleField], reference: &AngleField) -> Result<Vec<Normalized>> {
    let grid = reference.grid();
    let r = reference.values();
    phis.iter()
        .enumerate()
        .map(|(idx, phi)| {
            check_grids(grid, phi.grid())?;
            let mut d = Vec::with_capacity(r.len());
            for (node, (&p, &q)) in phi.values().iter().zip(r).enumerate() {
                let diff = p - q;
                if principal(diff).abs() > TOL * (1.0 + p.abs().max(q.abs())) {
                    return Err(Error::Consistency(format!(
                        "field {idx} does not lift the reference map at node {node} (difference {diff})"
                    )));
                }
                d.push((diff / TAU).round() as i64);
            }
            let field: Vec<f64> = phi
                .values()
                .iter()
                .zip(&d)
                .map(|(p, &k)| p - TAU * k as f64)
                .collect();
            let (regions, region_shifts) = partition(grid, &d);
            Ok(Normalized {
                shift: ShiftField::new(*grid, d)?,
                field: AngleField::new(*grid, field)?,
                regions,
                region_shifts,
            })
        })
        .collect()
}

fn partition(grid: &crate::grid::GridSpec, d: &[i64]) -> (Vec<usize>, Vec<i64>) {
    let mut label = vec![usize::MAX; d.len()];
    let mut shifts = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..d.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = shifts.len();
        shifts.push(d[start]);
        label[start] = id;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            for nb in grid.neighbors(c) {
                if label[nb] == usize::MAX && d[nb] == d[c] {
                    label[nb] = id;
                    queue.push_back(nb);
                }
            }
        }
    }
    (label, shifts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn base() -> AngleField {
        let g = GridSpec::new_2d([1.0, 1.0], [8, 6]).unwrap();
        AngleField::from_fn(g, |[x, y]| 2.0 * x - y)
    }

    #[test]
    fn global_shifts() {
        let phi = base();
        let seq: Vec<AngleField> = (0..4)
            .map(|k| AngleField::from_fn(*phi.grid(), |p| 2.0 * p[0] - p[1] + TAU * k as f64))
            .collect();
        let out = normalize_mod_2pi(&seq, &phi).unwrap();
        for (k, n) in out.iter().enumerate() {
            assert_eq!(n.region_shifts, vec![k as i64]);
            for (a, b) in n.field.values().iter().zip(phi.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn half_domain_shift() {
        let phi = base();
        let g = *phi.grid();
        let shifted = AngleField::from_fn(g, |p| 2.0 * p[0] - p[1] + if p[0] < 0.5 { 3.0 * TAU } else { 0.0 });
        let out = normalize_mod_2pi(&[shifted], &phi).unwrap();
        assert_eq!(out[0].region_shifts, vec![3, 0]);
    }

    #[test]
    fn different_base_rejected() {
        let phi = base();
        let other = AngleField::from_fn(*phi.grid(), |p| 2.0 * p[0] - p[1] + 0.1);
        assert!(matches!(normalize_mod_2pi(&[other], &phi), Err(Error::Consistency(_))));
    }
}
