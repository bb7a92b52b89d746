//! Model functions entering the phase-field energy and the parameter bundle
//! that carries them.
//!
//! The energy density is `psi(v) f(|grad u|) + eps |grad v|^2 + W(v) / eps`,
//! where `psi` degrades the bulk term where the phase field drops, `f` is a
//! convex bulk integrand of linear growth and `W` is a well vanishing only at
//! `v = 1`. Each function is selected by a string tag so that experiment
//! configs can name them (`psi=quadratic`, `f=linear`, `W=quadratic_well`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degradation function `psi: [0,1] -> [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Psi {
    /// `t^2`
    Quadratic,
    /// `t`
    Linear,
    /// `(1 + t) / 2` for `t > 0` and `0` at `t = 0`; lower semicontinuous with
    /// a jump at the origin.
    JumpLinear,
}

/// Bulk integrand `f: [0, inf) -> [0, inf)` with unit recession slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bulk {
    /// `t`
    Linear,
    /// `sqrt(1 + t^2)`, the relaxed-area integrand.
    Area,
    /// `sqrt(1 + t^2) - 1`
    AreaShifted,
}

/// Phase-field well `W: [0,1] -> [0, inf)` with `W(s) = 0` iff `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Well {
    /// `(1 - s)^2`
    QuadraticWell,
    /// `(1 - s^2)^2`
    QuarticWell,
}

impl Psi {
    pub const ALL: [Psi; 3] = [Psi::Quadratic, Psi::Linear, Psi::JumpLinear];

    pub fn eval(self, t: f64) -> f64 {
        match self {
            Psi::Quadratic => t * t,
            Psi::Linear => t,
            Psi::JumpLinear => {
                if t > 0.0 {
                    0.5 * (1.0 + t)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn deriv(self, t: f64) -> f64 {
        match self {
            Psi::Quadratic => 2.0 * t,
            Psi::Linear => 1.0,
            Psi::JumpLinear => 0.5,
        }
    }

    pub fn second_deriv(self, _t: f64) -> f64 {
        match self {
            Psi::Quadratic => 2.0,
            Psi::Linear | Psi::JumpLinear => 0.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Psi::Quadratic => "quadratic",
            Psi::Linear => "linear",
            Psi::JumpLinear => "jump_linear",
        }
    }
}

impl Bulk {
    pub const ALL: [Bulk; 3] = [Bulk::Linear, Bulk::Area, Bulk::AreaShifted];

    pub fn eval(self, t: f64) -> f64 {
        match self {
            Bulk::Linear => t,
            Bulk::Area => t.hypot(1.0),
            // written to avoid cancellation for small t
            Bulk::AreaShifted => t * t / (t.hypot(1.0) + 1.0),
        }
    }

    pub fn deriv(self, t: f64) -> f64 {
        match self {
            Bulk::Linear => 1.0,
            Bulk::Area | Bulk::AreaShifted => t / t.hypot(1.0),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Bulk::Linear => "linear",
            Bulk::Area => "area",
            Bulk::AreaShifted => "area_shifted",
        }
    }
}

impl Well {
    pub const ALL: [Well; 2] = [Well::QuadraticWell, Well::QuarticWell];

    pub fn eval(self, s: f64) -> f64 {
        match self {
            Well::QuadraticWell => (1.0 - s) * (1.0 - s),
            Well::QuarticWell => {
                let a = 1.0 - s * s;
                a * a
            }
        }
    }

    pub fn sqrt_eval(self, s: f64) -> f64 {
        match self {
            Well::QuadraticWell => (1.0 - s).abs(),
            Well::QuarticWell => (1.0 - s * s).abs(),
        }
    }

    pub fn deriv(self, s: f64) -> f64 {
        match self {
            Well::QuadraticWell => -2.0 * (1.0 - s),
            Well::QuarticWell => -4.0 * s * (1.0 - s * s),
        }
    }

    pub fn second_deriv(self, s: f64) -> f64 {
        match self {
            Well::QuadraticWell => 2.0,
            Well::QuarticWell => 12.0 * s * s - 4.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Well::QuadraticWell => "quadratic_well",
            Well::QuarticWell => "quartic_well",
        }
    }
}

macro_rules! tagged {
    ($ty:ident, $what:literal) => {
        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                $ty::ALL
                    .iter()
                    .copied()
                    .find(|x| x.tag() == s)
                    .ok_or_else(|| Error::Config(format!("unknown {} tag {s:?}", $what)))
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.tag())
            }
        }
    };
}

tagged!(Psi, "psi");
tagged!(Bulk, "f");
tagged!(Well, "W");

/// The model triple `(psi, f, W)` together with the length scale `epsilon`
/// and the numerical knobs used by the evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    pub psi: Psi,
    pub f: Bulk,
    pub w: Well,
    pub epsilon: f64,
    /// Smoothing length of the gradient norm, `|x|_eta = sqrt(|x|^2 + eta^2) - eta`.
    pub eta: f64,
    /// Number of uniform `t` samples used when minimizing over the phase-field level.
    pub g_table_resolution: usize,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            psi: Psi::Quadratic,
            f: Bulk::Linear,
            w: Well::QuadraticWell,
            epsilon: 0.1,
            eta: 1e-6,
            g_table_resolution: 1024,
        }
    }
}

impl EnergyParams {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_functions(mut self, psi: Psi, f: Bulk, w: Well) -> Self {
        self.psi = psi;
        self.f = f;
        self.w = w;
        self
    }

    /// Parses a comma or whitespace separated list such as
    /// `"psi=quadratic, f=linear, W=quadratic_well"` on top of the defaults.
    pub fn from_tags(spec: &str) -> Result<Self> {
        let mut params = Self::default();
        for item in spec.split([',', ' ', ';']).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {item:?}")))?;
            match key.trim() {
                "psi" => params.psi = value.trim().parse()?,
                "f" => params.f = value.trim().parse()?,
                "W" | "w" => params.w = value.trim().parse()?,
                other => return Err(Error::Config(format!("unknown function slot {other:?}"))),
            }
        }
        Ok(params)
    }

    /// `true` when the phase-field subproblem is a linear elliptic equation.
    pub fn has_quadratic_phase(&self) -> bool {
        self.psi == Psi::Quadratic && self.w == Well::QuadraticWell
    }

    /// Checks the structural hypotheses on `psi`, `f`, `W` by sampling, plus
    /// positivity of `epsilon`.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::Domain(format!("eta must be nonnegative, got {}", self.eta)));
        }
        if self.g_table_resolution < 2 {
            return Err(Error::Config("g_table_resolution must be at least 2".into()));
        }

        const N: usize = 2000;
        let psi = self.psi;
        if psi.eval(0.0) != 0.0 || (psi.eval(1.0) - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("psi={psi} must satisfy psi(0)=0, psi(1)=1")));
        }
        let mut prev = 0.0;
        for i in 1..=N {
            let t = i as f64 / N as f64;
            let p = psi.eval(t);
            if p <= 0.0 || p < prev {
                return Err(Error::Config(format!("psi={psi} is not positive nondecreasing at t={t}")));
            }
            prev = p;
        }

        let f = self.f;
        let tol = 1e-9;
        let step = 0.01;
        let mut last = f.eval(0.0);
        for i in 1..N {
            let t = i as f64 * step;
            let (a, b, c) = (f.eval(t - step), f.eval(t), f.eval(t + step));
            if a - 2.0 * b + c < -tol {
                return Err(Error::Config(format!("f={f} is not convex near t={t}")));
            }
            if b < last - tol {
                return Err(Error::Config(format!("f={f} is not nondecreasing near t={t}")));
            }
            last = b;
        }
        let slope = f.eval(1e4) / 1e4;
        if (slope - 1.0).abs() > 0.01 {
            return Err(Error::Config(format!("f={f} has recession slope {slope}, expected 1")));
        }

        let w = self.w;
        if w.eval(1.0) != 0.0 {
            return Err(Error::Config(format!("W={w} must vanish at 1")));
        }
        let min_w = (0..=N)
            .map(|i| (1.0 - 1e-3) * i as f64 / N as f64)
            .map(|s| w.eval(s))
            .fold(f64::INFINITY, f64::min);
        if min_w <= 0.0 {
            return Err(Error::Config(format!("W={w} vanishes below s=1")));
        }
        Ok(())
    }
}
