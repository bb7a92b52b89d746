//! One-dimensional transition profiles of the phase field.

use crate::energy::phase_field_energy;
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::grid::GridSpec;
use crate::minimizer::vstep::PhaseSystem;
use crate::model::{EnergyParams, Psi, Well};

/// Minimizer of `int eps |v'|^2 + W(v)/eps` on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MmProfile {
    /// Left end of the interval; node `i` sits at `origin + i h`.
    pub origin: f64,
    pub profile: ScalarField,
    pub cost: f64,
}

/// Nodes per `epsilon` used to resolve the profile.
const NODES_PER_EPS: f64 = 16.0;

/// Minimizes the Modica–Mortola energy with `v = 1` at both ends of
/// `interval` and `v = t_anchor` at its midpoint.
pub fn mm_profile_1d(t_anchor: f64, epsilon: f64, w: Well, interval: [f64; 2]) -> Result<MmProfile> {
    if !(0.0..=1.0).contains(&t_anchor) {
        return Err(Error::Domain(format!("anchor value must lie in [0,1], got {t_anchor}")));
    }
    let [a, b] = interval;
    if !(b > a) {
        return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
    }
    let params = EnergyParams {
        psi: Psi::Quadratic,
        w,
        epsilon,
        ..Default::default()
    };
    params.validate()?;
    let cells = ((b - a) * NODES_PER_EPS / epsilon).ceil() as usize;
    let cells = (cells + cells % 2).max(2);
    if cells > 50_000_000 {
        return Err(Error::Size(format!("{cells} cells needed to resolve epsilon={epsilon}")));
    }
    let grid = GridSpec::new_1d(b - a, cells + 1)?;
    let mid = cells / 2;
    let mut v = vec![1.0; cells + 1];
    let mut fixed = vec![false; cells + 1];
    v[mid] = t_anchor;
    fixed[0] = true;
    fixed[mid] = true;
    fixed[cells] = true;
    let forcing = vec![0.0; grid.num_cells()];
    PhaseSystem::new(&grid, &forcing).solve(&mut v, &params, Some(&fixed))?;
    let cost = phase_field_energy(&grid, &v, &params);
    Ok(MmProfile {
        origin: a,
        profile: ScalarField::from_clamped(grid, v),
        cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_one_is_trivial() {
        let r = mm_profile_1d(1.0, 0.01, Well::QuadraticWell, [-1.0, 1.0]).unwrap();
        assert!(r.cost.abs() < 1e-12);
        assert!(r.profile.values().iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn costs_match_twice_cw() {
        for (t, expect) in [(0.0, 2.0), (0.5, 0.5)] {
            let r = mm_profile_1d(t, 1e-3, Well::QuadraticWell, [-1.0, 1.0]).unwrap();
            assert!((r.cost - expect).abs() < 0.02 * expect, "t={t}: {}", r.cost);
        }
    }

    #[test]
    fn quartic_well_profile() {
        // 2 c_W(0) = 4 int_0^1 (1 - s^2) ds = 8/3
        let r = mm_profile_1d(0.0, 1e-2, Well::QuarticWell, [-1.0, 1.0]).unwrap();
        assert!((r.cost - 8.0 / 3.0).abs() < 0.02 * 8.0 / 3.0, "{}", r.cost);
    }

    #[test]
    fn bad_anchor() {
        assert!(matches!(
            mm_profile_1d(1.5, 0.01, Well::QuadraticWell, [-1.0, 1.0]),
            Err(Error::Domain(_))
        ));
    }
}
