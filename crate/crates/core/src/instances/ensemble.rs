//! Ensembles of statistically close instances attached to the children of
//! a ball-tree node, with exact clause checks on meshes.

use std::sync::Arc;

use super::needle::{BanditNeedle, BiasSchedule, ExpertsNeedle};
use super::{Environment, InstanceError};
use crate::metric::{Ball, BallTree, Point};

/// Float slack for comparisons between differently summed values.
const ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub name: &'static str,
    pub held: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleCheck {
    pub clauses: Vec<Clause>,
    pub points: usize,
}

impl EnsembleCheck {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.held)
    }
}

fn path_to(tree: &BallTree, u: usize) -> Vec<usize> {
    let mut path = vec![];
    let mut cur = u;
    while let Some(p) = tree.node(cur).parent {
        path.push(cur);
        cur = p;
    }
    path.reverse();
    path
}

/// Continues a lineage below `start` for `extra` levels with the first
/// child at each step.
fn continue_down(tree: &BallTree, start: usize, extra: usize) -> Vec<usize> {
    let mut out = vec![];
    let mut cur = start;
    for _ in 0..extra {
        match tree.children(cur) {
            Ok(k) if !k.is_empty() => {
                cur = k[0];
                out.push(cur);
            }
            _ => break,
        }
    }
    out
}

fn probe_points(tree: &BallTree, regions: &[Ball], mesh: usize) -> Vec<Point> {
    let space = tree.space();
    let mut pts = space.mesh(mesh);
    for b in regions {
        pts.push(b.center.clone());
        for k in 1..=8 {
            if let Some(p) = space.sample_near(&b.center, b.radius * k as f64 / 8.0) {
                pts.push(p);
            }
        }
    }
    pts
}

/// The family {F(u_1), ..., F(u_k)} for the children of node `u`, each
/// represented by a needle through u_i continued `extra` levels deeper.
#[derive(Debug)]
pub struct BanditEnsemble {
    pub base: BanditNeedle,
    pub members: Vec<BanditNeedle>,
    pub regions: Vec<Ball>,
    pub epsilon: f64,
}

pub fn bandit_ensemble(tree: Arc<BallTree>, u: usize, extra: usize) -> Result<BanditEnsemble, InstanceError> {
    let kids = tree.children(u)?;
    if kids.len() < 2 {
        return Err(InstanceError::Unexpanded(u));
    }
    let prefix = path_to(&tree, u);
    let r = tree.node(kids[0]).radius;
    let base = BanditNeedle::with_lineage(tree.clone(), prefix.clone())?;
    let mut members = vec![];
    let mut regions = vec![];
    for &k in &kids {
        let mut lin = prefix.clone();
        lin.push(k);
        lin.extend(continue_down(&tree, k, extra));
        members.push(BanditNeedle::with_lineage(tree.clone(), lin)?);
        regions.push(Ball::open(tree.node(k).center, r));
    }
    Ok(BanditEnsemble { base, members, regions, epsilon: r / 6.0 })
}

impl BanditEnsemble {
    /// Checks on `mesh` points plus probes inside each region:
    /// (i) µ_i = µ_0 on every other region, (ii) sup(µ_i, S_i) −
    /// sup(µ_0, X) ≥ ε, (iii) 0 ≤ µ_i − µ_0 ≤ 2ε on S_i.
    pub fn validate(&self, mesh: usize) -> EnsembleCheck {
        let tree = self.base.tree();
        let space = tree.space().as_ref();
        let pts = probe_points(tree, &self.regions, mesh);
        let mu0: Vec<f64> = pts.iter().map(|p| self.base.mu(p)).collect();
        let sup0 = mu0.iter().copied().fold(self.base.mu_star(), f64::max);
        let eps = self.epsilon;
        let (mut c1, mut c2, mut c3) = (true, true, true);
        let mut worst_gap = f64::INFINITY;
        let mut notes = vec![];
        for (i, (m, s)) in self.members.iter().zip(&self.regions).enumerate() {
            let mut best = f64::NEG_INFINITY;
            for (p, &v0) in pts.iter().zip(&mu0) {
                let vi = m.mu(p);
                if s.contains(space, p) {
                    best = best.max(vi);
                    let d = vi - v0;
                    if !(d >= 0.0 && d <= 2.0 * eps) {
                        c3 = false;
                        notes.push(format!("member {i}: µ_i − µ_0 = {d} at {p}"));
                    }
                } else if self.regions.iter().any(|o| o.contains(space, p)) && vi != v0 {
                    c1 = false;
                    notes.push(format!("member {i}: differs from base at {p}"));
                }
            }
            let gap = best - sup0;
            worst_gap = worst_gap.min(gap);
            if gap < eps - ROUNDING {
                c2 = false;
                notes.push(format!("member {i}: sup gap {gap} < ε = {eps}"));
            }
        }
        let detail = notes.join("; ");
        EnsembleCheck {
            clauses: vec![
                Clause { name: "agree off own region", held: c1, detail: detail.clone() },
                Clause { name: "sup gap at least epsilon", held: c2, detail: format!("worst gap {worst_gap}, ε {eps}") },
                Clause { name: "lift within [0, 2 epsilon]", held: c3, detail },
            ],
            points: pts.len(),
        }
    }
}

/// (P_0, P_1, ..., P_k) for the children of node `u` of a lineage: P_0
/// stops the lineage at u, P_i continues it through child u_i.
#[derive(Debug)]
pub struct ExpertsEnsemble {
    pub base: ExpertsNeedle,
    pub members: Vec<ExpertsNeedle>,
    pub regions: Vec<Ball>,
    pub epsilon: f64,
    /// Bias at the children's depth; the ratio bound is 2δ.
    pub delta: f64,
}

pub fn experts_ensemble(tree: Arc<BallTree>, u: usize, schedule: &BiasSchedule, extra: usize) -> Result<ExpertsEnsemble, InstanceError> {
    let kids = tree.children(u)?;
    if kids.len() < 2 {
        return Err(InstanceError::Unexpanded(u));
    }
    let prefix = path_to(&tree, u);
    let depth = prefix.len() + 1 + extra;
    let r = tree.node(kids[0]).radius;
    let delta = schedule.delta(prefix.len() + 1, r);
    let base = ExpertsNeedle::with_lineage(tree.clone(), prefix.clone(), schedule, depth)?;
    let mut members = vec![];
    let mut regions = vec![];
    for &k in &kids {
        let mut lin = prefix.clone();
        lin.push(k);
        lin.extend(continue_down(&tree, k, extra));
        members.push(ExpertsNeedle::with_lineage(tree.clone(), lin, schedule, depth)?);
        regions.push(Ball::open(tree.node(k).center, r));
    }
    Ok(ExpertsEnsemble { base, members, regions, epsilon: r * delta / 6.0, delta })
}

impl ExpertsEnsemble {
    /// (1) P_0(E)/P_i(E) ∈ (1 − 2δ, 1 + 2δ) for all events: P_0 and P_i
    /// differ only in one sign, so the extreme ratios are those of that
    /// sign's two outcomes. (ii) sup(µ_i, S_i) − sup(µ_i, X ∖ S_i) ≥ ε,
    /// with the outside supremum bounded by the ancestors' plateau value.
    pub fn validate(&self, mesh: usize) -> EnsembleCheck {
        let tree = self.base.tree();
        let space = tree.space().as_ref();
        let pts = probe_points(tree, &self.regions, mesh);
        let d = self.delta;
        let (lo, hi) = (1.0 / (1.0 + d), if d < 1.0 { 1.0 / (1.0 - d) } else { f64::INFINITY });
        let ratio_ok = lo > 1.0 - 2.0 * d && hi < 1.0 + 2.0 * d;
        let outside_bound = self.base.mu_star();
        let mut c2 = true;
        let mut worst = f64::INFINITY;
        for (m, s) in self.members.iter().zip(&self.regions) {
            let (mut inside, mut outside) = (f64::NEG_INFINITY, outside_bound);
            for p in &pts {
                let v = m.mu(p);
                if s.contains(space, p) {
                    inside = inside.max(v);
                } else {
                    outside = outside.max(v);
                }
            }
            let gap = inside - outside;
            worst = worst.min(gap);
            if gap < self.epsilon - ROUNDING {
                c2 = false;
            }
        }
        EnsembleCheck {
            clauses: vec![
                Clause { name: "likelihood ratio within 1 ± 2 delta", held: ratio_ok, detail: format!("ratios in [{lo}, {hi}], δ = {d}") },
                Clause { name: "sup gap at least epsilon", held: c2, detail: format!("worst gap {worst}, ε {}", self.epsilon) },
            ],
            points: pts.len(),
        }
    }
}
