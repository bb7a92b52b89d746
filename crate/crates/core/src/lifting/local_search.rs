//! Region-shift local search for minimal liftings.
//!
//! A move adds `+1` or `-1` to `k` on a connected set of cells. Candidate sets
//! are either breadth-first balls of random size around a random cell, grown
//! in random neighbour order, or
//! floods that do not cross the current large jumps (`|jump| >= pi`),
//! optionally clipped to a random axis-aligned window whose sides are often
//! placed next to existing jumps. Such floods move a whole jump curve at once.

use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::fields::{principal, ShiftField};
use crate::lifting::{objective_unchecked, LiftingProblem, LiftingSolution, Optimality};

const IMPROVEMENT: f64 = 1e-12;

struct Searcher<'a> {
    problem: &'a LiftingProblem,
    /// `(neighbour, edge, cell_is_a)` per cell.
    adj: Vec<Vec<(usize, usize, bool)>>,
    nx: usize,
    ny: usize,
}

struct Region {
    cells: Vec<usize>,
    mark: Vec<u32>,
    stamp: u32,
}

impl Region {
    fn clear(&mut self) {
        self.cells.clear();
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
    }

    fn insert(&mut self, c: usize) -> bool {
        if self.mark[c] == self.stamp {
            return false;
        }
        self.mark[c] = self.stamp;
        self.cells.push(c);
        true
    }

    fn contains(&self, c: usize) -> bool {
        self.mark[c] == self.stamp
    }
}

impl<'a> Searcher<'a> {
    fn new(problem: &'a LiftingProblem) -> Self {
        let n = problem.num_cells();
        let mut adj = vec![Vec::new(); n];
        for (i, e) in problem.edges().iter().enumerate() {
            adj[e.a].push((e.b, i, true));
            adj[e.b].push((e.a, i, false));
        }
        let g = problem.grid();
        Self {
            problem,
            adj,
            nx: g.nx(),
            ny: g.ny(),
        }
    }

    fn jump(&self, e: usize, k: &[i64]) -> f64 {
        let edge = &self.problem.edges()[e];
        edge.dtheta + TAU * (k[edge.b] - k[edge.a]) as f64
    }

    /// Breadth-first ball with neighbours visited in random order, so that
    /// the outer shell of a small ball can take any connected shape.
    fn ball(&self, seed: usize, size: usize, region: &mut Region, queue: &mut VecDeque<usize>, rng: &mut ChaCha8Rng) {
        region.clear();
        queue.clear();
        region.insert(seed);
        queue.push_back(seed);
        let mut order = Vec::with_capacity(4);
        while let Some(c) = queue.pop_front() {
            order.clear();
            order.extend(self.adj[c].iter().map(|&(nb, _, _)| nb));
            order.shuffle(rng);
            for &nb in &order {
                if region.cells.len() >= size {
                    return;
                }
                if region.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
    }

    fn flood(&self, seed: usize, window: [usize; 4], k: &[i64], region: &mut Region, queue: &mut VecDeque<usize>) {
        let inside = |c: usize| {
            let (i, j) = (c % self.nx, c / self.nx);
            i >= window[0] && i <= window[1] && j >= window[2] && j <= window[3]
        };
        region.clear();
        queue.clear();
        if !inside(seed) {
            return;
        }
        region.insert(seed);
        queue.push_back(seed);
        while let Some(c) = queue.pop_front() {
            for &(nb, e, _) in &self.adj[c] {
                if !region.contains(nb) && inside(nb) && self.jump(e, k).abs() < PI && region.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
    }

    /// Objective change from adding `s` to `k` on the region.
    fn delta(&self, region: &Region, k: &[i64], s: i64) -> f64 {
        let mut d = 0.0;
        for &c in &region.cells {
            for &(nb, e, c_is_a) in &self.adj[c] {
                if region.contains(nb) {
                    continue;
                }
                let dk = if c_is_a { k[nb] - k[c] } else { k[c] - k[nb] };
                let new = if c_is_a { dk - s } else { dk + s };
                d += self.problem.edge_cost(e, new) - self.problem.edge_cost(e, dk);
            }
        }
        d
    }

    fn random_window(&self, rng: &mut ChaCha8Rng, k: &[i64]) -> [usize; 4] {
        let jumps: Vec<usize> = (0..self.problem.edges().len())
            .filter(|&e| self.jump(e, k).abs() >= PI)
            .collect();
        let side = |rng: &mut ChaCha8Rng, extent: usize, axis: usize, upper: bool| -> usize {
            let unbounded = if upper { extent - 1 } else { 0 };
            match rng.gen_range(0..3) {
                0 => unbounded,
                1 => rng.gen_range(0..extent),
                _ if !jumps.is_empty() => {
                    let e = &self.problem.edges()[jumps[rng.gen_range(0..jumps.len())]];
                    let node = if rng.gen_bool(0.5) { e.a } else { e.b };
                    if axis == 0 {
                        node % self.nx
                    } else {
                        node / self.nx
                    }
                }
                _ => unbounded,
            }
        };
        let (a, b) = (side(rng, self.nx, 0, false), side(rng, self.nx, 0, true));
        let (c, d) = (side(rng, self.ny, 1, false), side(rng, self.ny, 1, true));
        [a.min(b), a.max(b), c.min(d), c.max(d)]
    }

    fn run(&self, mut k: Vec<i64>, rng: &mut ChaCha8Rng) -> Vec<i64> {
        let n = k.len();
        let mut region = Region {
            cells: Vec::new(),
            mark: vec![0; n],
            stamp: 0,
        };
        let mut queue = VecDeque::new();
        let patience = 2 * n;
        let mut failures = 0;
        let mut trial = k.clone();
        while failures < patience {
            let seed = rng.gen_range(0..n);
            if rng.gen_bool(0.5) {
                // log-uniform sizes: mostly small regions, occasionally large
                let size = (n as f64).powf(rng.gen::<f64>()).floor().max(1.0) as usize;
                self.ball(seed, size, &mut region, &mut queue, rng);
            } else {
                let window = self.random_window(rng, &k);
                self.flood(seed, window, &k, &mut region, &mut queue);
            }
            let mut improved = false;
            if !region.cells.is_empty() && region.cells.len() < n {
                for s in [1i64, -1] {
                    if self.delta(&region, &k, s) >= -IMPROVEMENT {
                        continue;
                    }
                    trial.copy_from_slice(&k);
                    for &c in &region.cells {
                        trial[c] += s;
                    }
                    if self.problem.recenter(&mut trial).is_some() {
                        k.copy_from_slice(&trial);
                        improved = true;
                        break;
                    }
                }
            }
            if improved {
                failures = 0;
            } else {
                failures += 1;
            }
        }
        k
    }

    /// Integrates principal differences along a breadth-first tree from cell 0.
    fn tree_lifting(&self) -> Vec<i64> {
        let n = self.problem.num_cells();
        let th = self.problem.base().angles();
        let mut phi = vec![f64::NAN; n];
        let mut queue = VecDeque::new();
        phi[0] = th[0];
        queue.push_back(0);
        while let Some(c) = queue.pop_front() {
            for &(nb, _, _) in &self.adj[c] {
                if phi[nb].is_nan() {
                    phi[nb] = phi[c] + principal(th[nb] - th[c]);
                    queue.push_back(nb);
                }
            }
        }
        let mut k: Vec<i64> = phi
            .iter()
            .zip(th)
            .map(|(p, t)| ((p - t) / TAU).round() as i64)
            .collect();
        self.clamp_into_bounds(&mut k);
        k
    }

    fn clamp_into_bounds(&self, k: &mut [i64]) {
        let kb = self.problem.label_bound();
        if self.problem.recenter(k).is_none() {
            let (lo, hi) = (*k.iter().min().unwrap(), *k.iter().max().unwrap());
            let mid = lo + (hi - lo) / 2;
            k.iter_mut().for_each(|x| *x = (*x - mid).clamp(-kb, kb));
        }
    }
}

/// Best of `restarts` independent local searches. Restart 0 starts from
/// `k = 0`, restart 1 from a tree integration of the principal angle
/// differences, the rest from uniformly random labels. Restart `r` draws from
/// stream `r` of a generator seeded with `seed`. Ties go to the lowest restart.
pub fn mg_local_search(problem: &LiftingProblem, seed: u64, restarts: usize) -> LiftingSolution {
    let searcher = Searcher::new(problem);
    let n = problem.num_cells();
    let kb = problem.label_bound();
    let results: Vec<(f64, Vec<i64>)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let start = match r {
                0 => vec![0; n],
                1 => searcher.tree_lifting(),
                _ => (0..n).map(|_| rng.gen_range(-kb..=kb)).collect(),
            };
            let k = searcher.run(start, &mut rng);
            (objective_unchecked(problem, &k), k)
        })
        .collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 < results[best].0 {
            best = i;
        }
    }
    let (objective, k) = results.into_iter().nth(best).expect("at least one restart");
    LiftingSolution {
        k: ShiftField::new(*problem.grid(), k).expect("labels sized to the grid"),
        objective,
        optimality: Optimality::LocalSearch,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{make_dipole_map, make_step_map, CircleField, VortexConfig};
    use crate::grid::GridSpec;
    use crate::jump_cost::JumpCost;
    use crate::lifting::{mg_bruteforce, mg_objective, sigma_jump_cost};
    use crate::model::EnergyParams;

    fn jc() -> JumpCost {
        JumpCost::new(&EnergyParams::default()).unwrap()
    }

    #[test]
    fn constant_field() {
        let g = GridSpec::new_2d([1.0, 1.0], [5, 5]).unwrap();
        let p = LiftingProblem::new(CircleField::constant(g, 1.0), jc(), 2).unwrap();
        let s = mg_local_search(&p, 1, 4);
        assert_eq!(s.objective, 0.0);
        assert!(s.k.values().iter().all(|&x| x == 0));
    }

    #[test]
    fn objective_is_self_consistent() {
        let g = GridSpec::new_1d(1.0, 12).unwrap();
        let p = LiftingProblem::new(make_step_map(&g, 3.0).unwrap(), jc(), 2).unwrap();
        let s = mg_local_search(&p, 3, 3);
        assert!((s.objective - mg_objective(&p, &s.k).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let g = GridSpec::new_2d([1.0, 1.0], [6, 5]).unwrap();
        let u = CircleField::from_angles(g, (0..30).map(|i| (i * i) as f64 * 0.7).collect()).unwrap();
        let p = LiftingProblem::new(u, jc(), 1).unwrap();
        assert_eq!(mg_local_search(&p, 9, 4), mg_local_search(&p, 9, 4));
    }

    #[test]
    fn matches_bruteforce_on_small_random_grid() {
        let g = GridSpec::new_2d([1.0, 1.0], [3, 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let u = CircleField::from_angles(g, (0..9).map(|_| rng.gen_range(0.0..TAU)).collect()).unwrap();
            let p = LiftingProblem::new(u, jc(), 1).unwrap();
            let exact = mg_bruteforce(&p).unwrap().objective;
            let local = mg_local_search(&p, 11, 8).objective;
            assert!((exact - local).abs() <= 1e-12, "{exact} vs {local}");
        }
    }

    #[test]
    fn dipole_cut_is_straightened() {
        let g = GridSpec::new_2d([1.5, 1.0], [25, 17]).unwrap();
        let h = g.h();
        let cfg = VortexConfig::dipole([0.5 + h / 2.0, 0.5 + h / 2.0], [1.0 + h / 2.0, 0.5 + h / 2.0]);
        let p = LiftingProblem::new(make_dipole_map(&g, &cfg).unwrap(), jc(), 2).unwrap();
        let s = mg_local_search(&p, 0, 4);
        let cut = sigma_jump_cost(&p, &s.k, PI).unwrap();
        let target = 0.5 * 2.0 * TAU / (TAU + 2.0);
        assert!((cut - target).abs() < 0.08 * target, "{cut} vs {target}");
    }
}
