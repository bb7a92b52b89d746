//! Phase-field energies for circle-valued maps.
//!
//! The crate evaluates and minimizes Ambrosio–Tortorelli type energies
//! `psi(v) f(|grad u|) + eps |grad v|^2 + W(v)/eps` for maps `u` into the
//! unit circle, either directly (`u` through its planar gradient) or through
//! a real lifting `phi` with `u = e^{i phi}`. The two readings differ exactly
//! when `u` carries vortices, and the difference is priced by the truncated
//! jump cost `g` of a minimal lifting.
//!
//! * [`model`] and [`jump_cost`]: the functions `psi, f, W`, `c_W` and `g`.
//! * [`grid`] and [`fields`]: discrete maps, vortex constructors, windings.
//! * [`energy`]: discrete energies and their gradients.
//! * [`minimizer`]: alternating minimization, 1-D transition profiles and
//!   recovery sequences.
//! * [`lifting`]: the minimal-lifting problem over integer shift fields.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod extrapolate;
pub mod fields;
pub mod grid;
pub mod io;
pub mod jump_cost;
pub mod lifting;
pub mod linalg;
pub mod minimizer;
pub mod model;

pub use energy::{EnergyBreakdown, JumpMetric, Mode};
pub use error::{Error, Result};
pub use fields::{AngleField, CircleField, ScalarField, ShiftField, Vortex, VortexConfig};
pub use grid::GridSpec;
pub use jump_cost::{JumpCost, JumpSample};
pub use model::{Bulk, EnergyParams, Psi, Well};
