use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fields::{CircleField, ShiftField, VortexConfig};
use crate::jump_cost::JumpCost;

/// Largest number of `+1` vortices accepted by the matching enumeration.
pub const MAX_PAIRS: usize = 8;

fn permutations(n: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(perm: &mut Vec<usize>, used: &mut Vec<bool>, visit: &mut impl FnMut(&[usize])) {
        if perm.len() == used.len() {
            visit(perm);
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                perm.push(i);
                rec(perm, used, visit);
                perm.pop();
                used[i] = false;
            }
        }
    }
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], visit);
}

/// Pairs of (`+1`, `-1`) positions minimizing the total distance.
fn shortest_matching(config: &VortexConfig) -> Result<Vec<([f64; 2], [f64; 2])>> {
    config.validate_balanced()?;
    let plus: Vec<[f64; 2]> = config.positives().map(|v| v.position).collect();
    let minus: Vec<[f64; 2]> = config.negatives().map(|v| v.position).collect();
    if plus.len() > MAX_PAIRS {
        return Err(Error::Size(format!(
            "{} vortex pairs exceed the matching limit {MAX_PAIRS}",
            plus.len()
        )));
    }
    let mut best = f64::INFINITY;
    let mut best_perm = Vec::new();
    permutations(plus.len(), &mut |perm| {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| dist(plus[i], minus[j])).sum();
        if total < best {
            best = total;
            best_perm = perm.to_vec();
        }
    });
    Ok(best_perm.iter().enumerate().map(|(i, &j)| (plus[i], minus[j])).collect())
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Upper bound for the minimal lifting cost of a balanced vortex
/// configuration: each `+1` vortex is joined to a `-1` vortex by a straight
/// cut carrying a jump of `2 pi`, and the matching minimizing the total cut
/// length is found by enumeration.
pub fn dipole_transport_estimate(config: &VortexConfig, g: &JumpCost) -> Result<f64> {
    let pairs = shortest_matching(config)?;
    Ok(g.value(TAU) * pairs.iter().map(|&(p, q)| dist(p, q)).sum::<f64>())
}

/// Shifts lifting `u` to `sum arg((x - p+) / (x - p-))` over the shortest
/// matching, the lifting whose jumps sit on the straight segments between
/// matched vortices. `u` must be a vortex map of `config` up to a constant.
pub fn straight_cut_shifts(u: &CircleField, config: &VortexConfig) -> Result<ShiftField> {
    let pairs = shortest_matching(config)?;
    let grid = u.grid();
    let k = (0..grid.num_nodes())
        .map(|n| {
            let [x, y] = grid.position(n);
            let phi: f64 = pairs
                .iter()
                .map(|&(p, q)| {
                    // arg of (z - p) * conj(z - q)
                    let (ax, ay, bx, by) = (x - p[0], y - p[1], x - q[0], y - q[1]);
                    (ay * bx - ax * by).atan2(ax * bx + ay * by)
                })
                .sum();
            ((phi - u.angles()[n]) / TAU).round() as i64
        })
        .collect();
    ShiftField::new(*grid, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Vortex;
    use crate::model::EnergyParams;
    use std::f64::consts::PI;

    fn jc() -> JumpCost {
        JumpCost::new(&EnergyParams::default()).unwrap()
    }

    #[test]
    fn single_pair() {
        let cfg = VortexConfig::dipole([0.25, 0.5], [0.75, 0.5]);
        let est = dipole_transport_estimate(&cfg, &jc()).unwrap();
        assert!((est - PI / (PI + 1.0)).abs() < 1e-6);
    }

    #[test]
    fn empty_config() {
        assert_eq!(dipole_transport_estimate(&VortexConfig::default(), &jc()).unwrap(), 0.0);
    }

    #[test]
    fn crossed_pairs_take_shorter_matching() {
        let v = |x: f64, y: f64, charge: i32| Vortex { position: [x, y], charge };
        // pairing (0.1,0.5)-(0.2,0.5) and (0.8,0.5)-(0.9,0.5) has length 0.2
        let cfg = VortexConfig::new(vec![v(0.1, 0.5, 1), v(0.9, 0.5, 1), v(0.8, 0.5, -1), v(0.2, 0.5, -1)]);
        let g = jc();
        let est = dipole_transport_estimate(&cfg, &g).unwrap();
        assert!((est - g.value(TAU) * 0.2).abs() < 1e-12);
    }

    #[test]
    fn straight_cut_jumps_only_across_segment() {
        use crate::fields::{lift_field, make_dipole_map};
        use crate::grid::GridSpec;
        let g = GridSpec::new_2d([1.0, 1.0], [41, 41]).unwrap();
        let h = g.h();
        let (p, q) = ([0.3 + h / 2.0, 0.5 + h / 2.0], [0.7 + h / 2.0, 0.5 + h / 2.0]);
        let cfg = VortexConfig::dipole(p, q);
        let u = make_dipole_map(&g, &cfg).unwrap();
        let phi = lift_field(&u, &straight_cut_shifts(&u, &cfg).unwrap()).unwrap();
        let vals = phi.values();
        for e in g.edges() {
            let jump = (vals[e.b] - vals[e.a]).abs();
            if jump > PI {
                // a vertical edge straddling the segment
                let (pa, pb) = (g.position(e.a), g.position(e.b));
                assert_eq!(e.axis, 1);
                assert!(pa[1] < p[1] && pb[1] > p[1] && pa[0] > p[0] && pa[0] < q[0]);
                assert!(jump < TAU);
            }
        }
        let crossing = g.edges().iter().filter(|e| (vals[e.b] - vals[e.a]).abs() > PI).count();
        assert_eq!(crossing, 16);
    }

    #[test]
    fn unbalanced_rejected() {
        let cfg = VortexConfig::new(vec![Vortex { position: [0.5, 0.5], charge: 1 }]);
        assert!(matches!(dipole_transport_estimate(&cfg, &jc()), Err(Error::Config(_))));
    }
}
