use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::ShiftField;
use crate::lifting::{objective_unchecked, LiftingProblem, LiftingSolution, Optimality};

/// Largest admissible `(2K + 1)^cells` for exhaustive search.
pub const BRUTEFORCE_LIMIT: f64 = 1e7;

struct Search<'a> {
    problem: &'a LiftingProblem,
    /// Edges from each cell to lower-numbered cells: `(edge, other, cell_is_b)`.
    back: Vec<Vec<(usize, usize, bool)>>,
    span: i64,
}

struct Best {
    value: f64,
    k: Vec<i64>,
}

impl Search<'_> {
    fn dfs(&self, cell: usize, k: &mut Vec<i64>, lo: i64, hi: i64, partial: f64, best: &mut Best) {
        if partial > best.value {
            return;
        }
        if cell == k.len() {
            if partial < best.value {
                best.value = partial;
                best.k.copy_from_slice(k);
            }
            return;
        }
        for label in (hi - self.span)..=(lo + self.span) {
            k[cell] = label;
            let mut add = 0.0;
            for &(e, other, is_b) in &self.back[cell] {
                let dk = if is_b { label - k[other] } else { k[other] - label };
                add += self.problem.edge_cost(e, dk);
            }
            self.dfs(cell + 1, k, lo.min(label), hi.max(label), partial + add, best);
        }
    }
}

/// Exact minimal lifting by enumerating all labelings with cell 0 fixed to 0
/// and label range at most `2K` (one representative per global shift).
/// Ties resolve to the lexicographically smallest gauge-fixed labeling, which
/// is then shifted into `[-K, K]`.
pub fn mg_bruteforce(problem: &LiftingProblem) -> Result<LiftingSolution> {
    let n = problem.num_cells();
    let kb = problem.label_bound();
    let space = ((2 * kb + 1) as f64).powi(n as i32);
    if !(space <= BRUTEFORCE_LIMIT) {
        return Err(Error::Size(format!(
            "(2K+1)^cells = {}^{n} exceeds the exhaustive-search limit {BRUTEFORCE_LIMIT:e}",
            2 * kb + 1
        )));
    }
    let mut back = vec![Vec::new(); n];
    for (i, e) in problem.edges().iter().enumerate() {
        let (lo, hi, hi_is_b) = if e.a < e.b { (e.a, e.b, true) } else { (e.b, e.a, false) };
        back[hi].push((i, lo, hi_is_b));
    }
    let search = Search {
        problem,
        back,
        span: 2 * kb,
    };
    let solve_from = |first: Option<i64>| -> Best {
        let mut k = vec![0i64; n];
        let mut best = Best {
            value: f64::INFINITY,
            k: vec![0; n],
        };
        match first {
            None => search.dfs(1, &mut k, 0, 0, 0.0, &mut best),
            Some(label) => {
                k[1] = label;
                let add: f64 = search.back[1]
                    .iter()
                    .map(|&(e, other, is_b)| problem.edge_cost(e, if is_b { label - k[other] } else { k[other] - label }))
                    .sum();
                search.dfs(2, &mut k, label.min(0), label.max(0), add, &mut best);
            }
        }
        best
    };
    let best = if n == 1 {
        solve_from(None)
    } else {
        // branches in increasing label order, so the first minimum is lexicographically smallest
        let branches: Vec<Best> = (-2 * kb..=2 * kb).into_par_iter().map(|l| solve_from(Some(l))).collect();
        let mut winner: Option<Best> = None;
        for b in branches {
            if winner.as_ref().is_none_or(|w| b.value < w.value) {
                winner = Some(b);
            }
        }
        winner.expect("at least one branch")
    };
    let mut k = best.k;
    problem.recenter(&mut k).expect("gauge-fixed labels have range at most 2K");
    let objective = objective_unchecked(problem, &k);
    Ok(LiftingSolution {
        k: ShiftField::new(*problem.grid(), k)?,
        objective,
        optimality: Optimality::Exhaustive,
    })
}
