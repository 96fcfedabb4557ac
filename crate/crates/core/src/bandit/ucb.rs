//! UCB1 over a finite arm set, and the uniform-mesh algorithms built on
//! it: NaiveAlg with doubling phases and the boundary-schedule algorithm.

use crate::algorithm::{Action, Algorithm, Event, Feedback};
use crate::metric::{greedy_net, MetricError, Point, SpaceRef};

/// UCB1 with index mean + sqrt(2 ln t / n); each arm once first.
#[derive(Debug, Clone)]
pub struct Ucb1 {
    n: Vec<u64>,
    sum: Vec<f64>,
    t: u64,
}

impl Ucb1 {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "UCB1 needs at least one arm");
        Ucb1 { n: vec![0; k], sum: vec![0.0; k], t: 0 }
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    /// Arm to pull at the next step.
    pub fn select(&self) -> usize {
        if let Some(i) = self.n.iter().position(|&n| n == 0) {
            return i;
        }
        let ln_t = ((self.t + 1) as f64).ln();
        let mut best = (0, f64::NEG_INFINITY);
        for (i, (&n, &s)) in self.n.iter().zip(&self.sum).enumerate() {
            let v = s / n as f64 + (2.0 * ln_t / n as f64).sqrt();
            if v > best.1 {
                best = (i, v);
            }
        }
        best.0
    }

    pub fn update(&mut self, arm: usize, reward: f64) {
        self.t += 1;
        self.n[arm] += 1;
        self.sum[arm] += reward;
    }

    pub fn pulls(&self) -> &[u64] {
        &self.n
    }
}

/// δ = (c·t·ln t)^{−1/(d+2)} for a phase of length t.
pub fn naive_delta(d: f64, c: f64, t: u64) -> f64 {
    let t = t as f64;
    (c * t * t.ln()).powf(-1.0 / (d + 2.0))
}

/// Mesh width and greedy mesh for one NaiveAlg phase. Errors when δ is
/// below the space's grid resolution or the mesh exceeds `cap`.
pub fn naive_alg_phase_setup(space: &SpaceRef, d: f64, c: f64, t: u64, cap: usize) -> Result<(f64, Vec<Point>), MetricError> {
    let delta = naive_delta(d, c, t);
    if delta < space.eta() {
        return Err(MetricError::Invalid(format!("mesh width {delta} below grid resolution {}", space.eta())));
    }
    Ok((delta, greedy_net(space.as_ref(), delta, cap)?))
}

/// Plays a fresh UCB1 on a fixed mesh for each phase of a schedule.
#[derive(Debug)]
struct MeshPhases {
    mesh: Vec<Point>,
    ucb: Ucb1,
    ends_at: u64,
    phase: u32,
    pending: usize,
    events: Vec<Event>,
}

impl MeshPhases {
    fn empty() -> Self {
        MeshPhases { mesh: vec![], ucb: Ucb1::new(1), ends_at: 0, phase: 0, pending: 0, events: vec![] }
    }

    fn start(&mut self, round: u64, length: u64, delta: f64, mesh: Vec<Point>) {
        self.phase += 1;
        self.events.push(Event::PhaseStart { round, phase: self.phase, length });
        self.events.push(Event::Mesh { round, delta, size: mesh.len() });
        self.ucb = Ucb1::new(mesh.len());
        self.mesh = mesh;
        self.ends_at = round + length - 1;
    }

    fn act(&mut self) -> Action {
        self.pending = self.ucb.select();
        Action::play(self.mesh[self.pending].clone())
    }
}

fn mesh_or_fallback(space: &SpaceRef, delta: f64, cap: usize, round: u64, events: &mut Vec<Event>) -> (f64, Vec<Point>) {
    let delta = if delta < space.eta() {
        events.push(Event::Note { round, message: format!("mesh width {delta} clamped to grid resolution {}", space.eta()) });
        space.eta()
    } else {
        delta
    };
    match greedy_net(space.as_ref(), delta, cap) {
        Ok(m) => (delta, m),
        Err(_) => {
            events.push(Event::Note { round, message: format!("mesh at width {delta} truncated at {cap} points") });
            (delta, space.net_points(delta, cap, None).0)
        }
    }
}

/// NaiveAlg(d): phases of length 2^i, each running UCB1 on a δ-mesh with
/// δ = (c·2^i·ln 2^i)^{−1/(d+2)}.
#[derive(Debug)]
pub struct NaiveAlg {
    space: SpaceRef,
    d: f64,
    c: f64,
    cap: usize,
    state: MeshPhases,
}

impl NaiveAlg {
    pub fn new(space: SpaceRef, d: f64, c: f64, cap: usize) -> Self {
        NaiveAlg { space, d, c, cap, state: MeshPhases::empty() }
    }
}

impl Algorithm for NaiveAlg {
    fn name(&self) -> String {
        format!("naive(d={})", self.d)
    }

    fn act(&mut self, round: u64) -> Action {
        if round > self.state.ends_at {
            let length = 1u64 << (self.state.phase + 1).min(62);
            let delta = naive_delta(self.d, self.c, length);
            let (delta, mesh) = mesh_or_fallback(&self.space, delta, self.cap, round, &mut self.state.events);
            self.state.start(round, length, delta, mesh);
        }
        self.state.act()
    }

    fn observe(&mut self, _round: u64, fb: &Feedback) {
        self.state.ucb.update(self.state.pending, fb.reward);
    }

    fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.state.events)
    }
}

/// t*_k = 2 (N_k/ε_k²) ln(N_k/ε_k²) with ε_k = 2^{−k}.
pub fn boundary_target(n_k: u64, k: u32) -> f64 {
    let x = n_k as f64 * 4f64.powi(k as i32);
    2.0 * x * x.ln()
}

/// Phase durations t_i = min(t*_i, t*_{i+1}, 2 Σ_{j<i} t_j), the last
/// clause skipped for i = 1. `counts[k−1]` is N_k for k = 1..=K+1.
pub fn boundary_schedule(counts: &[u64]) -> Vec<f64> {
    let k_max = counts.len().saturating_sub(1);
    let mut out: Vec<f64> = Vec::with_capacity(k_max);
    for i in 1..=k_max {
        let mut t = boundary_target(counts[i - 1], i as u32).min(boundary_target(counts[i], i as u32 + 1));
        if i > 1 {
            t = t.min(2.0 * out.iter().sum::<f64>());
        }
        out.push(t);
    }
    out
}

/// Phase k covers the space with balls of radius 2^{−k} (a greedy net)
/// and runs UCB1 on the centers for t_k rounds.
#[derive(Debug)]
pub struct BoundaryAlg {
    counts: Vec<u64>,
    meshes: Vec<Vec<Point>>,
    durations: Vec<u64>,
    state: MeshPhases,
}

impl BoundaryAlg {
    /// Precomputes covers for radii 2^{−1}..2^{−(phases+1)}.
    pub fn new(space: SpaceRef, phases: usize, cap: usize) -> Self {
        let mut meshes = vec![];
        let mut sink = vec![];
        for k in 1..=phases + 1 {
            meshes.push(mesh_or_fallback(&space, 0.5f64.powi(k as i32), cap, 0, &mut sink).1);
        }
        let counts: Vec<u64> = meshes.iter().map(|m| m.len() as u64).collect();
        let durations = boundary_schedule(&counts).iter().map(|&t| (t.ceil() as u64).max(1)).collect();
        meshes.pop();
        BoundaryAlg { counts, meshes, durations, state: MeshPhases::empty() }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn durations(&self) -> &[u64] {
        &self.durations
    }
}

impl Algorithm for BoundaryAlg {
    fn name(&self) -> String {
        "boundary".into()
    }

    fn act(&mut self, round: u64) -> Action {
        if round > self.state.ends_at {
            let k = self.state.phase as usize;
            let (length, mesh, delta) = if k < self.durations.len() {
                (self.durations[k], self.meshes[k].clone(), 0.5f64.powi(k as i32 + 1))
            } else {
                // Past the precomputed schedule: keep the finest mesh.
                let last = self.meshes.len() - 1;
                (u64::MAX / 2 - round, self.meshes[last].clone(), 0.5f64.powi(last as i32 + 1))
            };
            self.state.start(round, length, delta, mesh);
        }
        self.state.act()
    }

    fn observe(&mut self, _round: u64, fb: &Feedback) {
        self.state.ucb.update(self.state.pending, fb.reward);
    }

    fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.state.events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Interval;
    use std::sync::Arc;

    #[test]
    fn ucb_round_robin_then_bonus() {
        let mut u = Ucb1::new(3);
        for i in 0..3 {
            assert_eq!(u.select(), i);
            u.update(i, 0.5);
        }
        u.update(0, 0.5);
        // Equal means: the least pulled arm has the largest bonus.
        assert_eq!(u.select(), 1);
        let mut one = Ucb1::new(1);
        for _ in 0..5 {
            assert_eq!(one.select(), 0);
            one.update(0, 1.0);
        }
    }

    #[test]
    fn naive_delta_values() {
        let d = naive_delta(1.0, 1.0, 1024);
        assert!((d - (1024.0 * 1024f64.ln()).powf(-1.0 / 3.0)).abs() < 1e-15);
        assert!((d - 0.0520).abs() < 1e-4);
        assert!((naive_delta(0.0, 1.0, 64) - (64.0 * 64f64.ln()).powf(-0.5)).abs() < 1e-15);
        assert!(naive_delta(3.0, 1.0, 2) <= 1.0);
    }

    #[test]
    fn phase_setup_rejects_sub_resolution_mesh() {
        let s: SpaceRef = Arc::new(Interval::new(1.0).unwrap().with_eta(0.01));
        assert!(naive_alg_phase_setup(&s, 1.0, 1.0, 1 << 20, 1000).is_err());
        let (delta, mesh) = naive_alg_phase_setup(&s, 1.0, 1.0, 16, 1000).unwrap();
        assert!(mesh.len() as f64 <= 1.0 / delta + 1.0);
    }

    #[test]
    fn boundary_schedule_constant_counts() {
        let t = boundary_schedule(&[1, 1, 1, 1, 1]);
        assert!((t[0] - 8.0 * 4f64.ln()).abs() < 1e-12);
        assert!((t[0] - 11.09).abs() < 0.01);
        for i in 1..t.len() {
            assert!(t[i] <= 2.0 * t[..i].iter().sum::<f64>() + 1e-9);
        }
    }
}
