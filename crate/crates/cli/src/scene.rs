//! Test fields on box domains: a vortex dipole, a smooth zero-degree map and
//! a straight step, together with their initial liftings and pin masks.

use std::f64::consts::PI;

use s1phase_core::fields::{lift_field, make_dipole_map, make_step_map};
use s1phase_core::lifting::straight_cut_shifts;
use s1phase_core::{AngleField, CircleField, GridSpec, VortexConfig};

use crate::config::FieldKind;
use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct Scene {
    pub grid: GridSpec,
    pub u: CircleField,
    /// Lifting used to start lifting-mode runs.
    pub lifting: AngleField,
    /// Map values held fixed during minimization.
    pub pinned: Vec<bool>,
    /// Vortices of the dipole scene.
    pub vortices: Option<VortexConfig>,
    /// Inter-vortex distance for the dipole, jump length for the step.
    pub length: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SceneSpec {
    pub field: FieldKind,
    pub distance: f64,
    pub margin: f64,
    pub delta: f64,
    /// Free band radius around the vortex segment; `None` frees every interior node.
    pub band: Option<f64>,
}

fn steps(len: f64, h: f64, what: &str) -> Result<usize> {
    let n = (len / h).round();
    if n < 1.0 {
        return Err(CliError::Config(format!("{what} {len} is shorter than the grid spacing {h}")));
    }
    Ok(n as usize)
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

/// Box `[0, d + 2m] x [0, 2m]` with spacing `h`; the vortices sit at the
/// centers of the cells whose lower-left corners are `(m, m)` and `(m + d, m)`,
/// with `d` and `m` rounded to multiples of `h`.
pub fn dipole_box(distance: f64, margin: f64, h: f64) -> Result<(GridSpec, VortexConfig, f64)> {
    let nd = steps(distance, h, "distance")?;
    let nm = steps(margin, h, "margin")?;
    let nx = nd + 2 * nm + 1;
    let ny = 2 * nm + 1;
    let grid = GridSpec::new_2d([(nx - 1) as f64 * h, (ny - 1) as f64 * h], [nx, ny])?;
    let m = nm as f64 * h;
    let d = nd as f64 * h;
    let cfg = VortexConfig::dipole([m + 0.5 * h, m + 0.5 * h], [m + d + 0.5 * h, m + 0.5 * h]);
    Ok((grid, cfg, d))
}

pub fn build_scene(spec: &SceneSpec, h: f64) -> Result<Scene> {
    match spec.field {
        FieldKind::Dipole => {
            let (grid, cfg, d) = dipole_box(spec.distance, spec.margin, h)?;
            let u = make_dipole_map(&grid, &cfg)?;
            let lifting = lift_field(&u, &straight_cut_shifts(&u, &cfg)?)?;
            let (p, q) = (cfg.vortices[0].position, cfg.vortices[1].position);
            let pinned = (0..grid.num_nodes())
                .map(|n| {
                    let x = grid.position(n);
                    let core = [p, q]
                        .iter()
                        .any(|c| (x[0] - c[0]).abs() < h && (x[1] - c[1]).abs() < h);
                    let outside = spec.band.is_some_and(|r| segment_distance(x, p, q) > r);
                    grid.is_boundary(n) || core || outside
                })
                .collect();
            Ok(Scene {
                grid,
                u,
                lifting,
                pinned,
                vortices: Some(cfg),
                length: d,
            })
        }
        FieldKind::Smooth => {
            let nx = steps(spec.distance + 2.0 * spec.margin, h, "box width")? + 1;
            let ny = steps(2.0 * spec.margin, h, "box height")? + 1;
            let ext = [(nx - 1) as f64 * h, (ny - 1) as f64 * h];
            let grid = GridSpec::new_2d(ext, [nx, ny])?;
            let lifting = AngleField::from_fn(grid, |[x, y]| {
                1.5 * (PI * x / ext[0]).sin() * (PI * y / ext[1]).sin() + 0.5 * x
            });
            let u = lifting.exp();
            let pinned = (0..grid.num_nodes()).map(|n| grid.is_boundary(n)).collect();
            Ok(Scene {
                grid,
                u,
                lifting,
                pinned,
                vortices: None,
                length: 0.0,
            })
        }
        FieldKind::Step => {
            let nx = steps(spec.distance + 2.0 * spec.margin, h, "strip length")? + 1;
            let ny = steps(2.0 * spec.margin, h, "strip height")? + 1;
            let grid = GridSpec::new_2d([(nx - 1) as f64 * h, (ny - 1) as f64 * h], [nx, ny])?;
            let u = make_step_map(&grid, spec.delta)?;
            let lifting = AngleField::new(grid, u.angles().to_vec())?;
            let pinned = (0..grid.num_nodes())
                .map(|n| {
                    let (i, _) = grid.coords(n);
                    i == 0 || i == nx - 1
                })
                .collect();
            Ok(Scene {
                grid,
                u,
                lifting,
                pinned,
                vortices: None,
                length: grid.extents()[1],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use s1phase_core::fields::winding_scan;

    fn spec(field: FieldKind) -> SceneSpec {
        SceneSpec {
            field,
            distance: 0.5,
            margin: 0.25,
            delta: PI,
            band: Some(0.1),
        }
    }

    #[test]
    fn dipole_geometry() {
        let s = build_scene(&spec(FieldKind::Dipole), 1.0 / 40.0).unwrap();
        assert_eq!(s.grid.resolution(), &[41, 21]);
        assert!((s.length - 0.5).abs() < 1e-12);
        let w = winding_scan(&s.u).unwrap();
        assert_eq!(w, vec![((10, 10), 1), ((30, 10), -1)]);
        assert!(s.lifting.exp().angles().iter().zip(s.u.angles()).all(|(a, b)| (a - b).abs() < 1e-12));
        let free = s.pinned.iter().filter(|p| !**p).count();
        assert!(free > 0 && free < s.grid.num_nodes() / 4);
        // core corners are pinned
        assert!(s.pinned[s.grid.index(10, 10)] && s.pinned[s.grid.index(31, 11)]);
    }

    #[test]
    fn smooth_has_no_vortices() {
        let s = build_scene(&spec(FieldKind::Smooth), 1.0 / 20.0).unwrap();
        assert!(winding_scan(&s.u).unwrap().is_empty());
        assert_eq!(s.pinned.iter().filter(|p| **p).count(), 2 * 21 + 2 * 9);
    }

    #[test]
    fn step_pins_end_columns() {
        let s = build_scene(&spec(FieldKind::Step), 1.0 / 20.0).unwrap();
        assert_eq!(s.pinned.iter().filter(|p| **p).count(), 2 * 11);
        assert!((s.length - 0.5).abs() < 1e-12);
    }

    #[test]
    fn too_coarse_is_config_error() {
        assert!(matches!(dipole_box(0.5, 0.01, 0.1), Err(CliError::Config(_))));
    }
}
