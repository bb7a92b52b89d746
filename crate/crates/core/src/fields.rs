//! Discrete fields on a [`GridSpec`]: circle-valued maps, their real
//! liftings, phase fields and integer shift fields, together with the
//! canonical constructors (steps and vortex dipoles) and winding diagnostics.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Reduces an angle to `[0, 2 pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Principal value of an angle difference, in `(-pi, pi]`.
pub fn principal(delta: f64) -> f64 {
    let r = delta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `u: grid -> S^1` stored as base angles in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleField {
    grid: GridSpec,
    theta: Vec<f64>,
}

/// A real field per node: a lifting `phi` of a circle map, or any scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleField {
    grid: GridSpec,
    values: Vec<f64>,
}

/// Phase field `v: grid -> [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

/// Integer shifts `k` per node; `theta + 2 pi k` is a lifting of the circle
/// map the shifts decorate.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftField {
    grid: GridSpec,
    k: Vec<i64>,
}

fn check_len(grid: &GridSpec, len: usize) -> Result<()> {
    if len != grid.num_nodes() {
        return Err(Error::Dimension(format!(
            "field has {len} values but the grid has {} nodes",
            grid.num_nodes()
        )));
    }
    Ok(())
}

pub(crate) fn check_grids(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::Dimension(format!(
            "incompatible grids {:?} and {:?}",
            a.resolution(),
            b.resolution()
        )));
    }
    Ok(())
}

impl CircleField {
    /// Wraps arbitrary angles into `[0, 2 pi)`.
    pub fn from_angles(grid: GridSpec, angles: Vec<f64>) -> Result<Self> {
        check_len(&grid, angles.len())?;
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("angles must be finite".into()));
        }
        let theta = angles.into_iter().map(wrap_angle).collect();
        Ok(Self { grid, theta })
    }

    pub fn constant(grid: GridSpec, angle: f64) -> Self {
        Self {
            theta: vec![wrap_angle(angle); grid.num_nodes()],
            grid,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    /// `(cos theta, sin theta)` at a node.
    pub fn vector(&self, node: usize) -> [f64; 2] {
        let (s, c) = self.theta[node].sin_cos();
        [c, s]
    }

    /// Euclidean distance `|u(a) - u(b)|` in the plane.
    pub fn chord(&self, a: usize, b: usize) -> f64 {
        2.0 * (0.5 * (self.theta[a] - self.theta[b])).sin().abs()
    }
}

impl AngleField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.num_nodes()).map(|n| f(grid.position(n))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            values: vec![0.0; grid.num_nodes()],
            grid,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// `e^{i phi}` as a circle field.
    pub fn exp(&self) -> CircleField {
        CircleField {
            grid: self.grid,
            theta: self.values.iter().map(|&p| wrap_angle(p)).collect(),
        }
    }
}

impl ScalarField {
    /// Rejects values outside `[0, 1]` by more than `1e-12`; values within the
    /// tolerance are clamped.
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                if (-1e-12..=1.0 + 1e-12).contains(&v) {
                    Ok(v.clamp(0.0, 1.0))
                } else {
                    Err(Error::Domain(format!("phase field value {v} at node {i} is outside [0,1]")))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { grid, values })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.num_nodes()])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn from_clamped(grid: GridSpec, values: Vec<f64>) -> Self {
        Self {
            grid,
            values: values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        }
    }
}

impl ShiftField {
    pub fn new(grid: GridSpec, k: Vec<i64>) -> Result<Self> {
        check_len(&grid, k.len())?;
        Ok(Self { grid, k })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            k: vec![0; grid.num_nodes()],
            grid,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[i64] {
        &self.k
    }

    pub fn values_mut(&mut self) -> &mut [i64] {
        &mut self.k
    }
}

/// A point singularity of degree `charge` (`+1` or `-1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vortex {
    pub position: [f64; 2],
    pub charge: i32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VortexConfig {
    pub vortices: Vec<Vortex>,
}

impl VortexConfig {
    pub fn new(vortices: Vec<Vortex>) -> Self {
        Self { vortices }
    }

    /// A `+1` vortex at `plus` and a `-1` vortex at `minus`.
    pub fn dipole(plus: [f64; 2], minus: [f64; 2]) -> Self {
        Self::new(vec![
            Vortex { position: plus, charge: 1 },
            Vortex { position: minus, charge: -1 },
        ])
    }

    pub fn total_charge(&self) -> i32 {
        self.vortices.iter().map(|v| v.charge).sum()
    }

    pub fn positives(&self) -> impl Iterator<Item = &Vortex> {
        self.vortices.iter().filter(|v| v.charge > 0)
    }

    pub fn negatives(&self) -> impl Iterator<Item = &Vortex> {
        self.vortices.iter().filter(|v| v.charge < 0)
    }

    /// Checks unit charges, zero total charge and pairwise distinct positions.
    pub fn validate_balanced(&self) -> Result<()> {
        if let Some(v) = self.vortices.iter().find(|v| v.charge.abs() != 1) {
            return Err(Error::Config(format!("only unit charges are supported, got {}", v.charge)));
        }
        if self.total_charge() != 0 {
            return Err(Error::Config(format!(
                "charges must balance on a box domain, total is {}",
                self.total_charge()
            )));
        }
        for (i, a) in self.vortices.iter().enumerate() {
            for b in &self.vortices[i + 1..] {
                if a.position == b.position {
                    return Err(Error::Config(format!("two vortices share position {:?}", a.position)));
                }
            }
        }
        Ok(())
    }
}

fn require_2d(grid: &GridSpec, what: &str) -> Result<()> {
    if grid.dim() != 2 {
        return Err(Error::Dimension(format!("{what} needs a 2-D grid")));
    }
    Ok(())
}

/// `theta = 0` for `x < L/2` and `theta = delta` for `x >= L/2`.
pub fn make_step_map(grid: &GridSpec, delta: f64) -> Result<CircleField> {
    if !(delta > 0.0 && delta <= PI) {
        return Err(Error::Domain(format!("step angle must lie in (0, pi], got {delta}")));
    }
    let mid = 0.5 * grid.extents()[0];
    let theta = (0..grid.num_nodes())
        .map(|n| if grid.position(n)[0] < mid - 1e-12 * mid { 0.0 } else { delta })
        .collect();
    CircleField::from_angles(*grid, theta)
}

/// `theta(x) = sum_i q_i * arg(x - p_i)` reduced to `[0, 2 pi)`.
pub fn make_dipole_map(grid: &GridSpec, config: &VortexConfig) -> Result<CircleField> {
    require_2d(grid, "a vortex map")?;
    config.validate_balanced()?;
    let ext = grid.extents();
    for v in &config.vortices {
        let [x, y] = v.position;
        if !(x > 0.0 && y > 0.0 && x < ext[0] && y < ext[1]) {
            return Err(Error::Config(format!("vortex at {:?} is not strictly interior", v.position)));
        }
    }
    Ok(vortex_angles(grid, config))
}

/// Superposed vortex angles without the balance check.
pub(crate) fn vortex_angles(grid: &GridSpec, config: &VortexConfig) -> CircleField {
    let theta = (0..grid.num_nodes())
        .map(|n| {
            let [x, y] = grid.position(n);
            let raw: f64 = config
                .vortices
                .iter()
                .map(|v| v.charge as f64 * (y - v.position[1]).atan2(x - v.position[0]))
                .sum();
            wrap_angle(raw)
        })
        .collect();
    CircleField { grid: *grid, theta }
}

/// Winding of `u` along a closed loop of nodes (the last node connects back
/// to the first). Every principal difference must avoid `+-pi` exactly.
pub fn loop_winding(u: &CircleField, nodes: &[usize]) -> Result<i32> {
    let th = u.angles();
    let mut sum = 0.0;
    for (idx, &a) in nodes.iter().enumerate() {
        let b = nodes[(idx + 1) % nodes.len()];
        let d = principal(th[b] - th[a]);
        if d == PI {
            let (i, j) = u.grid().coords(a);
            return Err(Error::DegeneratePlaquette { i, j });
        }
        sum += d;
    }
    Ok((sum / TAU).round() as i32)
}

/// Degree of `u` around the cell with lower-left node `(i, j)`, traversed
/// counterclockwise.
pub fn plaquette_winding(u: &CircleField, cell: (usize, usize)) -> Result<i32> {
    let g = u.grid();
    require_2d(g, "plaquette winding")?;
    let (i, j) = cell;
    if i + 1 >= g.nx() || j + 1 >= g.ny() {
        return Err(Error::Domain(format!("cell ({i}, {j}) is outside the grid")));
    }
    let n00 = g.index(i, j);
    let loop_nodes = [n00, n00 + 1, n00 + 1 + g.nx(), n00 + g.nx()];
    loop_winding(u, &loop_nodes).map_err(|e| match e {
        Error::DegeneratePlaquette { .. } => Error::DegeneratePlaquette { i, j },
        other => other,
    })
}

/// Nonzero plaquette windings as `((i, j), winding)`.
pub fn winding_scan(u: &CircleField) -> Result<Vec<((usize, usize), i32)>> {
    let g = u.grid();
    require_2d(g, "winding scan")?;
    let mut out = Vec::new();
    for j in 0..g.ny() - 1 {
        for i in 0..g.nx() - 1 {
            let w = plaquette_winding(u, (i, j))?;
            if w != 0 {
                out.push(((i, j), w));
            }
        }
    }
    Ok(out)
}

/// `phi = theta + 2 pi k` nodewise.
pub fn lift_field(u: &CircleField, k: &ShiftField) -> Result<AngleField> {
    check_grids(u.grid(), k.grid())?;
    let values = u
        .angles()
        .iter()
        .zip(k.values())
        .map(|(&t, &k)| t + TAU * k as f64)
        .collect();
    Ok(AngleField { grid: *u.grid(), values })
}

/// Total face measure of edges whose jump `|phi(b) - phi(a)|` is nonzero and
/// at least `sigma`, reading `phi` as piecewise constant on dual cells.
pub fn sigma_jump_length(phi: &AngleField, sigma: f64) -> Result<f64> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be nonnegative, got {sigma}")));
    }
    let v = phi.values();
    Ok(phi
        .grid()
        .edges()
        .iter()
        .filter(|e| {
            let jump = (v[e.b] - v[e.a]).abs();
            jump > 0.0 && jump >= sigma
        })
        .map(|e| e.face)
        .sum())
}
