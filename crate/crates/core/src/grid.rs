//! Uniform box grids in one or two dimensions.
//!
//! Nodes sit at `x = i * h_x` (and `y = j * h_y`), stored row-major with the
//! x index varying fastest. A cell is the box spanned by `2^dim` neighbouring
//! nodes. When a node field is read as a piecewise-constant map each node owns
//! the dual cell around it, and the interface between two dual cells is the
//! face crossed by the grid edge joining their nodes; its measure is `1` in
//! 1-D and the perpendicular spacing in 2-D.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    extents: [f64; 2],
    resolution: [usize; 2],
}

/// A grid edge between nodes `a` and `b` (`b` is the neighbour in the
/// positive `axis` direction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
    /// Measure of the dual face crossed by the edge.
    pub face: f64,
}

/// One difference term of a cell gradient: `coef * (x[a] - x[b])^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellTerm {
    pub a: usize,
    pub b: usize,
    pub coef: f64,
}

impl GridSpec {
    pub fn new_1d(length: f64, nodes: usize) -> Result<Self> {
        Self::build(1, [length, 0.0], [nodes, 1])
    }

    pub fn new_2d(extents: [f64; 2], resolution: [usize; 2]) -> Result<Self> {
        Self::build(2, extents, resolution)
    }

    /// Grid from per-axis extents and node counts; `extents.len()` picks the dimension.
    pub fn from_parts(extents: &[f64], resolution: &[usize]) -> Result<Self> {
        match (extents, resolution) {
            ([l], [n]) => Self::new_1d(*l, *n),
            ([lx, ly], [nx, ny]) => Self::new_2d([*lx, *ly], [*nx, *ny]),
            _ => Err(Error::Dimension(format!(
                "grid needs 1 or 2 matching axes, got {} extents and {} resolutions",
                extents.len(),
                resolution.len()
            ))),
        }
    }

    fn build(dim: usize, extents: [f64; 2], resolution: [usize; 2]) -> Result<Self> {
        for axis in 0..dim {
            if resolution[axis] < 2 {
                return Err(Error::Domain(format!(
                    "resolution must be at least 2 per axis, got {} on axis {axis}",
                    resolution[axis]
                )));
            }
            if !(extents[axis] > 0.0 && extents[axis].is_finite()) {
                return Err(Error::Domain(format!(
                    "extent must be positive, got {} on axis {axis}",
                    extents[axis]
                )));
            }
        }
        Ok(Self {
            dim,
            extents,
            resolution,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents[..self.dim]
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution[..self.dim]
    }

    pub fn nx(&self) -> usize {
        self.resolution[0]
    }

    pub fn ny(&self) -> usize {
        self.resolution[1]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.extents[axis] / (self.resolution[axis] - 1) as f64
    }

    /// Smallest spacing over the axes.
    pub fn h(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        self.extents().iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub fn num_nodes(&self) -> usize {
        self.resolution[0] * self.resolution[1]
    }

    pub fn num_cells(&self) -> usize {
        match self.dim {
            1 => self.resolution[0] - 1,
            _ => (self.resolution[0] - 1) * (self.resolution[1] - 1),
        }
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.resolution[0] + i
    }

    pub fn coords(&self, node: usize) -> (usize, usize) {
        (node % self.resolution[0], node / self.resolution[0])
    }

    pub fn position(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.coords(node);
        let y = if self.dim == 2 { j as f64 * self.spacing(1) } else { 0.0 };
        [i as f64 * self.spacing(0), y]
    }

    /// Centre of the 2-D cell whose lower-left node is `(i, j)`.
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [
            (i as f64 + 0.5) * self.spacing(0),
            (j as f64 + 0.5) * self.spacing(1),
        ]
    }

    /// Lower-left node coordinates of the 2-D cell containing `p`, if inside.
    pub fn cell_containing(&self, p: [f64; 2]) -> Option<(usize, usize)> {
        let fi = p[0] / self.spacing(0);
        let fj = p[1] / self.spacing(1);
        if fi < 0.0 || fj < 0.0 {
            return None;
        }
        let (i, j) = (fi.floor() as usize, fj.floor() as usize);
        (i + 1 < self.resolution[0] && j + 1 < self.resolution[1]).then_some((i, j))
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        let (i, j) = self.coords(node);
        let nx = self.resolution[0];
        if self.dim == 1 {
            return i == 0 || i + 1 == nx;
        }
        i == 0 || j == 0 || i + 1 == nx || j + 1 == self.resolution[1]
    }

    /// Corner nodes of each cell; 2 per cell in 1-D, 4 in 2-D ordered
    /// `(i,j), (i+1,j), (i,j+1), (i+1,j+1)`.
    pub fn cell_nodes(&self, cell: usize) -> ([usize; 4], usize) {
        match self.dim {
            1 => ([cell, cell + 1, 0, 0], 2),
            _ => {
                let cx = self.resolution[0] - 1;
                let (i, j) = (cell % cx, cell / cx);
                let n00 = self.index(i, j);
                let n10 = n00 + 1;
                let n01 = n00 + self.resolution[0];
                ([n00, n10, n01, n01 + 1], 4)
            }
        }
    }

    /// Difference terms whose weighted sum of squares is the squared cell
    /// gradient. In 2-D each axis derivative averages the squares of the two
    /// parallel cell edges.
    pub fn cell_terms(&self, cell: usize) -> ([CellTerm; 4], usize) {
        let (n, _) = self.cell_nodes(cell);
        match self.dim {
            1 => {
                let h = self.spacing(0);
                let t = CellTerm {
                    a: n[0],
                    b: n[1],
                    coef: 1.0 / (h * h),
                };
                ([t; 4], 1)
            }
            _ => {
                let cx = 0.5 / self.spacing(0).powi(2);
                let cy = 0.5 / self.spacing(1).powi(2);
                (
                    [
                        CellTerm { a: n[0], b: n[1], coef: cx },
                        CellTerm { a: n[2], b: n[3], coef: cx },
                        CellTerm { a: n[0], b: n[2], coef: cy },
                        CellTerm { a: n[1], b: n[3], coef: cy },
                    ],
                    4,
                )
            }
        }
    }

    /// Lumped (trapezoid) node masses; they sum to the domain volume.
    pub fn node_masses(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.num_nodes()];
        let vol = self.cell_volume();
        for c in 0..self.num_cells() {
            let (nodes, k) = self.cell_nodes(c);
            for &n in &nodes[..k] {
                m[n] += vol / k as f64;
            }
        }
        m
    }

    /// All grid edges, x-edges first.
    pub fn edges(&self) -> Vec<Edge> {
        let (nx, ny) = (self.resolution[0], self.resolution[1]);
        let mut out = Vec::new();
        let face_x = if self.dim == 1 { 1.0 } else { self.spacing(1) };
        for j in 0..ny {
            for i in 0..nx - 1 {
                let a = self.index(i, j);
                out.push(Edge { a, b: a + 1, axis: 0, face: face_x });
            }
        }
        if self.dim == 2 {
            let face_y = self.spacing(0);
            for j in 0..ny - 1 {
                for i in 0..nx {
                    let a = self.index(i, j);
                    out.push(Edge { a, b: a + nx, axis: 1, face: face_y });
                }
            }
        }
        out
    }

    /// Position of the edge joining adjacent nodes `a` and `b` in [`GridSpec::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let nx = self.resolution[0];
        let (i, j) = self.coords(a);
        if b == a + 1 {
            j * (nx - 1) + i
        } else {
            debug_assert_eq!(b, a + nx);
            self.resolution[1] * (nx - 1) + j * nx + i
        }
    }

    /// Weights `w_e` such that `sum_cells vol * |grad x|^2 = sum_e w_e (x_a - x_b)^2`.
    pub fn stiffness_edges(&self) -> Vec<(usize, usize, f64)> {
        let mut w: Vec<(usize, usize, f64)> = self.edges().iter().map(|e| (e.a, e.b, 0.0)).collect();
        let vol = self.cell_volume();
        for c in 0..self.num_cells() {
            let (terms, k) = self.cell_terms(c);
            for t in &terms[..k] {
                w[self.edge_index(t.a, t.b)].2 += vol * t.coef;
            }
        }
        w
    }

    /// Neighbouring nodes (4-connectivity in 2-D).
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> {
        let (i, j) = self.coords(node);
        let (nx, ny) = (self.resolution[0], self.resolution[1]);
        let cands = [
            (i > 0).then(|| node - 1),
            (i + 1 < nx).then(|| node + 1),
            (j > 0).then(|| node - nx),
            (j + 1 < ny).then(|| node + nx),
        ];
        cands.into_iter().flatten()
    }

    /// Sub-grid of nodes `i0..=i1` along x (and all rows), with the same spacing.
    pub fn column_range(&self, i0: usize, i1: usize) -> Result<GridSpec> {
        if i1 <= i0 || i1 >= self.resolution[0] {
            return Err(Error::Domain(format!("invalid column range {i0}..={i1}")));
        }
        let mut g = *self;
        g.resolution[0] = i1 - i0 + 1;
        g.extents[0] = (i1 - i0) as f64 * self.spacing(0);
        Ok(g)
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self.dim == other.dim
            && self.resolution == other.resolution
            && self
                .extents
                .iter()
                .zip(&other.extents)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }
}
