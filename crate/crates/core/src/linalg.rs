//! Matrix-free symmetric positive definite systems on grid graphs and a
//! Jacobi-preconditioned conjugate gradient solver.

/// `A = diag(d) + sum_e w_e (e_a - e_b)(e_a - e_b)^T`, restricted to the free
/// nodes; fixed nodes get identity rows and their couplings are dropped (the
/// caller moves known values to the right-hand side).
#[derive(Debug, Clone)]
pub struct EdgeOperator<'a> {
    pub diag: Vec<f64>,
    pub edges: Vec<(usize, usize, f64)>,
    pub fixed: Option<&'a [bool]>,
}

impl EdgeOperator<'_> {
    fn is_fixed(&self, i: usize) -> bool {
        self.fixed.is_some_and(|f| f[i])
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, &xi), &di) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = di * xi;
        }
        for &(a, b, w) in &self.edges {
            let d = w * (x[a] - x[b]);
            y[a] += d;
            y[b] -= d;
        }
        if let Some(fixed) = self.fixed {
            // undo couplings touching fixed nodes
            for &(a, b, w) in &self.edges {
                match (fixed[a], fixed[b]) {
                    (false, true) => y[a] += w * x[b],
                    (true, false) => y[b] += w * x[a],
                    _ => {}
                }
            }
            for (i, &f) in fixed.iter().enumerate() {
                if f {
                    y[i] = x[i];
                }
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = self.diag.clone();
        for &(a, b, w) in &self.edges {
            d[a] += w;
            d[b] += w;
        }
        for (i, di) in d.iter_mut().enumerate() {
            if self.is_fixed(i) {
                *di = 1.0;
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// `|b - A x| / |b|` at exit.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients from the initial guess in `x`.
pub fn conjugate_gradient(op: &EdgeOperator<'_>, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> CgStats {
    let n = b.len();
    let inv_diag: Vec<f64> = op
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|xi| *xi = 0.0);
        return CgStats {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / b_norm;
    let mut it = 0;
    while res > rel_tol && it < max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        it += 1;
    }
    CgStats {
        iterations: it,
        relative_residual: res,
        converged: res <= rel_tol,
    }
}
