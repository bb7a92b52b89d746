//! The transition constant `c_W` and the truncated jump cost `g`.
//!
//! `c_W(t) = 2 * int_t^1 sqrt(W(s)) ds` is the cost of one half of an
//! optimal phase-field profile climbing from level `t` back to `1`, and
//!
//! ```text
//! g(z) = min_{0 <= t <= 1} psi(t) z + 2 c_W(t)
//! ```
//!
//! balances the degraded bulk cost of a jump of size `z` against the cost of
//! letting the phase field dip to `t`. `g` is bounded by `2 c_W(0)`,
//! subadditive, 1-Lipschitz and satisfies `g(z) <= z`.

use crate::error::{Error, Result};
use crate::model::{EnergyParams, Psi, Well};

/// Composite Simpson rule with `panels` (rounded up to even) subintervals.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

/// `c_W(t)` by composite quadrature with 2000 panels.
pub fn eval_cw(params: &EnergyParams, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("c_W is defined on [0,1], got t={t}")));
    }
    let w = params.w;
    Ok(2.0 * simpson(|s| w.sqrt_eval(s), t, 1.0, 2000))
}

/// `g(z)` and the phase-field level `t*(z)` attaining it.
pub fn eval_g(params: &EnergyParams, z: f64) -> Result<(f64, f64)> {
    JumpCost::new(params)?.eval(z)
}

/// One row of a tabulated jump cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpSample {
    pub z: f64,
    pub g: f64,
    pub t_star: f64,
}

/// Evaluator for `g` with `c_W` precomputed on the minimization grid.
#[derive(Debug, Clone)]
pub struct JumpCost {
    params: EnergyParams,
    t_grid: Vec<f64>,
    cw: Vec<f64>,
    closed_form_tag: Option<&'static str>,
}

const GOLDEN_ITERS: usize = 80;

impl JumpCost {
    pub fn new(params: &EnergyParams) -> Result<Self> {
        params.validate()?;
        let n = params.g_table_resolution;
        let t_grid: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
        let sub = (1000usize.div_ceil(n - 1)).max(4);
        let w = params.w;
        let mut cw = vec![0.0; n];
        for j in (0..n - 1).rev() {
            cw[j] = cw[j + 1] + 2.0 * simpson(|s| w.sqrt_eval(s), t_grid[j], t_grid[j + 1], sub);
        }
        let closed_form_tag = (params.psi == Psi::Quadratic && params.w == Well::QuadraticWell)
            .then_some("2z/(z+2)");
        Ok(Self {
            params: *params,
            t_grid,
            cw,
            closed_form_tag,
        })
    }

    pub fn params(&self) -> &EnergyParams {
        &self.params
    }

    /// Label of the analytic form of `g`, when the model admits one.
    pub fn closed_form_tag(&self) -> Option<&'static str> {
        self.closed_form_tag
    }

    /// Analytic `g(z)` for the labelled models.
    pub fn closed_form(&self, z: f64) -> Option<f64> {
        self.closed_form_tag.map(|_| 2.0 * z / (z + 2.0))
    }

    /// `c_W(t)` from the precomputed grid plus a short quadrature.
    pub fn cw(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let n = self.t_grid.len();
        let j = ((t * (n - 1) as f64).floor() as usize).min(n - 2);
        let w = self.params.w;
        self.cw[j] - 2.0 * simpson(|s| w.sqrt_eval(s), self.t_grid[j], t, 8)
    }

    /// `sup g = 2 c_W(0)`.
    pub fn sup(&self) -> f64 {
        2.0 * self.cw[0]
    }

    fn objective(&self, t: f64, z: f64) -> f64 {
        self.params.psi.eval(t) * z + 2.0 * self.cw(t)
    }

    fn golden(&self, mut a: f64, mut b: f64, z: f64) -> (f64, f64) {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (self.objective(c, z), self.objective(d, z));
        for _ in 0..GOLDEN_ITERS {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = self.objective(c, z);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = self.objective(d, z);
            }
        }
        if fc <= fd {
            (fc, c)
        } else {
            (fd, d)
        }
    }

    /// `(g(z), t*(z))`: uniform grid search over `t` followed by golden-section
    /// refinement on both halves of the bracket around the best grid point.
    /// Ties resolve to the smallest `t`.
    pub fn eval(&self, z: f64) -> Result<(f64, f64)> {
        if !(z >= 0.0) || !z.is_finite() {
            return Err(Error::Domain(format!("g is defined for finite z >= 0, got {z}")));
        }
        Ok(self.eval_unchecked(z))
    }

    fn eval_unchecked(&self, z: f64) -> (f64, f64) {
        if z == 0.0 {
            // only the phase-field term is left, and it vanishes exactly at t = 1
            return (0.0, 1.0);
        }
        let psi = self.params.psi;
        let mut best = (f64::INFINITY, 0.0, 0usize);
        for (j, (&t, &c)) in self.t_grid.iter().zip(&self.cw).enumerate() {
            let val = psi.eval(t) * z + 2.0 * c;
            if val < best.0 {
                best = (val, t, j);
            }
        }
        let n = self.t_grid.len();
        let j = best.2;
        let mut candidates = vec![(best.0, best.1)];
        if j > 0 {
            candidates.push(self.golden(self.t_grid[j - 1], self.t_grid[j], z));
        }
        if j + 1 < n {
            candidates.push(self.golden(self.t_grid[j], self.t_grid[j + 1], z));
        }
        let (mut g, mut t) = candidates[0];
        for &(gv, tv) in &candidates[1..] {
            if gv < g || (gv == g && tv < t) {
                g = gv;
                t = tv;
            }
        }
        (g.max(0.0), t)
    }

    /// `g(z)` for `z >= 0`.
    pub fn value(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        self.eval_unchecked(z.max(0.0)).0
    }

    /// `t*(z)` for `z >= 0`.
    pub fn argmin(&self, z: f64) -> f64 {
        self.eval_unchecked(z.max(0.0)).1
    }

    /// `count` uniformly spaced samples of `(z, g, t*)` on `[0, z_max]`.
    pub fn tabulate(&self, z_max: f64, count: usize) -> Result<Vec<JumpSample>> {
        if !(z_max > 0.0) || count < 2 {
            return Err(Error::Domain(format!(
                "tabulation needs z_max > 0 and at least 2 samples, got {z_max}, {count}"
            )));
        }
        Ok((0..count)
            .map(|i| {
                let z = z_max * i as f64 / (count - 1) as f64;
                let (g, t_star) = self.eval_unchecked(z);
                JumpSample { z, g, t_star }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Bulk;
    use std::f64::consts::PI;

    fn defaults() -> JumpCost {
        JumpCost::new(&EnergyParams::default()).unwrap()
    }

    #[test]
    fn cw_quadratic_well() {
        let p = EnergyParams::default();
        assert_eq!(eval_cw(&p, 1.0).unwrap(), 0.0);
        assert!((eval_cw(&p, 0.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((eval_cw(&p, 0.5).unwrap() - 0.25).abs() < 1e-6);
        assert!(eval_cw(&p, 1.5).is_err());
        assert!(eval_cw(&p, -0.1).is_err());
    }

    #[test]
    fn cw_is_nonincreasing() {
        let p = EnergyParams::default().with_functions(Psi::Linear, Bulk::Linear, Well::QuarticWell);
        let vals: Vec<f64> = (0..=50).map(|i| eval_cw(&p, i as f64 / 50.0).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn table_cw_agrees_with_direct_quadrature() {
        let jc = defaults();
        for t in [0.0, 0.123, 0.5, 0.77, 1.0] {
            let direct = eval_cw(jc.params(), t).unwrap();
            assert!((jc.cw(t) - direct).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn g_at_zero() {
        let (g, t) = defaults().eval(0.0).unwrap();
        assert_eq!(g, 0.0);
        // with no jump the phase field stays at 1
        assert_eq!(t, 1.0);
    }

    #[test]
    fn g_matches_closed_form_examples() {
        let jc = defaults();
        assert!((jc.value(2.0) - 1.0).abs() < 1e-4);
        assert!((jc.value(2.0 * PI) - 2.0 * PI / (PI + 1.0)).abs() < 1e-4);
        let (_, t) = jc.eval(2.0).unwrap();
        assert!((t - 0.5).abs() < 1e-6);
    }

    #[test]
    fn g_rejects_negative() {
        assert!(defaults().eval(-1e-9).is_err());
        assert!(defaults().eval(f64::NAN).is_err());
    }

    #[test]
    fn tabulate_rows() {
        let rows = defaults().tabulate(10.0, 11).unwrap();
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[2].z, 2.0);
        assert!((rows[2].g - 1.0).abs() < 1e-4);
        assert!(defaults().tabulate(0.0, 5).is_err());
    }

    #[test]
    fn jump_linear_psi_saturates() {
        let p = EnergyParams::default().with_functions(Psi::JumpLinear, Bulk::Linear, Well::QuadraticWell);
        let jc = JumpCost::new(&p).unwrap();
        // for large z the phase field drops to zero and the bulk term vanishes
        let (g, t) = jc.eval(100.0).unwrap();
        assert!((g - 2.0).abs() < 1e-9);
        assert_eq!(t, 0.0);
    }
}
