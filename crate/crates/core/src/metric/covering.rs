//! Covering numbers N_r (fewest sets of diameter < r) and packing numbers
//! (largest set with pairwise distance ≥ r) of finite point sets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{MetricError, MetricSpace, Point};

/// Exact search is exponential; it is capped at this many points.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountMode {
    Exact,
    Greedy,
}

fn close_masks(space: &dyn MetricSpace, pts: &[Point], r: f64) -> Vec<u32> {
    let n = pts.len();
    (0..n)
        .map(|i| (0..n).filter(|&j| i == j || space.dist(&pts[i], &pts[j]) < r).fold(0u32, |m, j| m | (1 << j)))
        .collect()
}

fn maximal_cliques(adj: &[u32], r: u32, mut p: u32, mut x: u32, out: &mut Vec<u32>) {
    if p == 0 && x == 0 {
        out.push(r);
        return;
    }
    let pivot = (p | x).trailing_zeros() as usize;
    let mut cand = p & !(adj[pivot] & !(1 << pivot));
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        let nv = adj[v] & !(1 << v);
        maximal_cliques(adj, r | (1 << v), p & nv, x & nv, out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

fn min_cover(uncovered: u32, cliques: &[u32], memo: &mut HashMap<u32, u32>) -> u32 {
    if uncovered == 0 {
        return 0;
    }
    if let Some(&v) = memo.get(&uncovered) {
        return v;
    }
    let v = uncovered.trailing_zeros();
    let best = cliques
        .iter()
        .filter(|&&c| c & (1 << v) != 0)
        .map(|&c| 1 + min_cover(uncovered & !c, cliques, memo))
        .min()
        .unwrap_or(u32::MAX);
    memo.insert(uncovered, best);
    best
}

fn max_packing(avail: u32, adj: &[u32], best: &mut u32, size: u32) {
    if avail == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + avail.count_ones() <= *best {
        return;
    }
    let v = avail.trailing_zeros() as usize;
    let nv = adj[v] & !(1 << v);
    max_packing(avail & !(1 << v) & !nv, adj, best, size + 1);
    if avail & nv != 0 {
        max_packing(avail & !(1 << v), adj, best, size);
    }
}

fn greedy_cover(space: &dyn MetricSpace, pts: &[Point], r: f64) -> usize {
    if pts.iter().all(|p| matches!(p, Point::Real1D(_))) {
        let mut xs: Vec<&Point> = pts.iter().collect();
        xs.sort_by(|a, b| a.lex_cmp(b));
        let mut count = 0;
        let mut i = 0;
        while i < xs.len() {
            count += 1;
            let start = xs[i];
            while i < xs.len() && space.dist(start, xs[i]) < r {
                i += 1;
            }
        }
        return count;
    }
    let n = pts.len();
    let mut covered = vec![false; n];
    let grow = |seed: usize, covered: &[bool]| -> Vec<usize> {
        let mut set = vec![seed];
        for j in 0..n {
            if j != seed && !covered[j] && set.iter().all(|&k| space.dist(&pts[j], &pts[k]) < r) {
                set.push(j);
            }
        }
        set
    };
    let mut count = 0;
    while let Some(first) = covered.iter().position(|c| !c) {
        let set = if n <= 64 {
            (first..n)
                .filter(|&s| !covered[s])
                .map(|s| grow(s, &covered))
                .max_by_key(|s| s.len())
                .unwrap()
        } else {
            grow(first, &covered)
        };
        for j in set {
            covered[j] = true;
        }
        count += 1;
    }
    count
}

/// N_r of a finite point set. Greedy mode returns an upper bound (exact on
/// the line, where the left-to-right sweep is optimal).
pub fn covering_number(space: &dyn MetricSpace, pts: &[Point], r: f64, mode: CountMode) -> Result<usize, MetricError> {
    if pts.is_empty() {
        return Ok(0);
    }
    match mode {
        CountMode::Greedy => Ok(greedy_cover(space, pts, r)),
        CountMode::Exact => {
            if pts.len() > EXACT_LIMIT {
                return Err(MetricError::TooLarge { max: EXACT_LIMIT, got: pts.len() });
            }
            let adj = close_masks(space, pts, r);
            let mut cliques = Vec::new();
            let all = if pts.len() == 32 { u32::MAX } else { (1u32 << pts.len()) - 1 };
            maximal_cliques(&adj, 0, all, 0, &mut cliques);
            Ok(min_cover(all, &cliques, &mut HashMap::new()) as usize)
        }
    }
}

/// Largest r-packing. Greedy mode returns a lower bound.
pub fn packing_number(space: &dyn MetricSpace, pts: &[Point], r: f64, mode: CountMode) -> Result<usize, MetricError> {
    if pts.is_empty() {
        return Ok(0);
    }
    match mode {
        CountMode::Greedy => {
            let mut chosen: Vec<&Point> = Vec::new();
            for p in pts {
                if chosen.iter().all(|q| space.dist(p, q) >= r) {
                    chosen.push(p);
                }
            }
            Ok(chosen.len())
        }
        CountMode::Exact => {
            if pts.len() > EXACT_LIMIT {
                return Err(MetricError::TooLarge { max: EXACT_LIMIT, got: pts.len() });
            }
            let adj = close_masks(space, pts, r);
            let mut best = 0;
            max_packing((1u32 << pts.len()) - 1, &adj, &mut best, 0);
            Ok(best as usize)
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::metric::{FiniteSpace, Interval};
    use super::*;

    fn line(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::Real1D(x)).collect()
    }

    #[test]
    fn five_points_on_the_line() {
        let s = Interval::new(1.0).unwrap();
        let pts = line(&[0.0, 0.1, 0.5, 0.9, 1.0]);
        assert_eq!(covering_number(&s, &pts, 0.3, CountMode::Exact).unwrap(), 3);
        assert_eq!(covering_number(&s, &pts, 0.3, CountMode::Greedy).unwrap(), 3);
        assert_eq!(packing_number(&s, &pts, 0.3, CountMode::Exact).unwrap(), 3);
    }

    #[test]
    fn large_radius_gives_one() {
        let s = Interval::new(1.0).unwrap();
        let pts = line(&[0.0, 0.1, 0.5, 0.9, 1.0]);
        assert_eq!(covering_number(&s, &pts, 1.5, CountMode::Exact).unwrap(), 1);
        assert_eq!(packing_number(&s, &pts, 1.5, CountMode::Exact).unwrap(), 1);
        assert_eq!(packing_number(&s, &line(&[0.4]), 0.1, CountMode::Exact).unwrap(), 1);
    }

    #[test]
    fn uniform_space_needs_singletons() {
        let s = FiniteSpace::uniform(5, 1.0).unwrap();
        let pts: Vec<Point> = (0..5).map(Point::Index).collect();
        assert_eq!(covering_number(&s, &pts, 0.5, CountMode::Exact).unwrap(), 5);
    }

    #[test]
    fn exact_mode_rejects_large_inputs() {
        let s = Interval::new(1.0).unwrap();
        let pts = s.mesh(30);
        assert!(matches!(covering_number(&s, &pts, 0.1, CountMode::Exact), Err(MetricError::TooLarge { .. })));
    }
}
