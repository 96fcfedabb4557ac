//! Post-hoc checks of zooming runs against the true payoffs: clean
//! phases, the badness bound, the packing property and the pull bound.

use serde::{Deserialize, Serialize};

use crate::algorithm::Event;
use crate::instances::Environment;
use crate::metric::Point;

pub const PULL_CONSTANT: f64 = 72.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseAudit {
    pub phase: u32,
    pub arms: usize,
    /// |estimate − µ| ≤ radius after every update.
    pub clean: bool,
    /// Δ(x) ≤ 3·r(x) for every played arm, radius taken at selection.
    pub badness_ok: bool,
    /// D(x, y) > min(Δ(x), Δ(y))/3 for all active pairs.
    pub packing_ok: bool,
    /// n(x) ≤ 72·i·Δ(x)^{−2} at phase end for arms with Δ(x) > 0.
    pub pulls_ok: bool,
    pub badness_violations: usize,
    pub packing_violations: usize,
    pub pull_violations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanAudit {
    pub phases: Vec<PhaseAudit>,
}

impl CleanAudit {
    pub fn clean_phases(&self) -> usize {
        self.phases.iter().filter(|p| p.clean).count()
    }

    /// Violations of the three structural properties on clean phases.
    pub fn clean_violations(&self) -> (usize, usize, usize) {
        self.phases.iter().filter(|p| p.clean).fold((0, 0, 0), |a, p| {
            (a.0 + p.badness_violations, a.1 + p.packing_violations, a.2 + p.pull_violations)
        })
    }

    /// Counts of (clean, all structural checks held) combinations:
    /// [clean∧held, clean∧failed, unclean∧held, unclean∧failed].
    pub fn cross_tab(&self) -> [usize; 4] {
        let mut t = [0; 4];
        for p in &self.phases {
            let held = p.badness_ok && p.packing_ok && p.pulls_ok;
            t[(!p.clean as usize) * 2 + (!held as usize)] += 1;
        }
        t
    }
}

struct ArmState {
    point: Point,
    gap: f64,
    n: u64,
}

fn close(phase: u32, arms: &[ArmState], env: &dyn Environment, mut audit: PhaseAudit) -> PhaseAudit {
    let space = env.space();
    for (i, a) in arms.iter().enumerate() {
        for b in &arms[i + 1..] {
            if space.dist(&a.point, &b.point) <= a.gap.min(b.gap) / 3.0 {
                audit.packing_violations += 1;
            }
        }
        if a.gap > 0.0 && a.n as f64 > PULL_CONSTANT * phase as f64 / (a.gap * a.gap) {
            audit.pull_violations += 1;
        }
    }
    audit.arms = arms.len();
    audit.badness_ok = audit.badness_violations == 0;
    audit.packing_ok = audit.packing_violations == 0;
    audit.pulls_ok = audit.pull_violations == 0;
    audit
}

/// Audits the event log of one run. Needs Update events (run the
/// algorithm with auditing on).
pub fn clean_run_audit(events: &[Event], env: &dyn Environment) -> CleanAudit {
    let mu_star = env.mu_star();
    let mut out = CleanAudit::default();
    let mut arms: Vec<ArmState> = vec![];
    let mut current: Option<PhaseAudit> = None;
    for e in events {
        match e {
            Event::PhaseStart { phase, .. } => {
                if let Some(a) = current.take() {
                    out.phases.push(close(a.phase, &arms, env, a));
                }
                arms.clear();
                current = Some(PhaseAudit {
                    phase: *phase,
                    arms: 0,
                    clean: true,
                    badness_ok: true,
                    packing_ok: true,
                    pulls_ok: true,
                    badness_violations: 0,
                    packing_violations: 0,
                    pull_violations: 0,
                });
            }
            Event::Activate { arm, point, .. } => {
                debug_assert_eq!(*arm, arms.len());
                arms.push(ArmState { point: point.clone(), gap: mu_star - env.mu(point), n: 0 });
            }
            Event::Update { arm, n, estimate, radius, pre_radius, .. } => {
                let (Some(a), Some(st)) = (current.as_mut(), arms.get_mut(*arm)) else { continue };
                st.n = *n;
                let mu = mu_star - st.gap;
                if (estimate - mu).abs() > *radius {
                    a.clean = false;
                }
                if st.gap > 3.0 * pre_radius {
                    a.badness_violations += 1;
                }
            }
            _ => {}
        }
    }
    if let Some(a) = current.take() {
        out.phases.push(close(a.phase, &arms, env, a));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{RadiusPolicy, Zooming, ZoomingConfig};
    use crate::instances::{LipschitzEnv, Noise, Payoff};
    use crate::metric::{Interval, SpaceRef};
    use crate::simulator::{run, RunOptions};
    use std::sync::Arc;

    fn env(noise: Noise) -> LipschitzEnv {
        let s: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        let p = Payoff::Cones { cones: vec![(Point::Real1D(0.3), 0.9)], floor: 0.0 };
        LipschitzEnv::new(s, p, noise, false).unwrap()
    }

    #[test]
    fn deterministic_rewards_are_always_clean() {
        let e = env(Noise::Deterministic);
        let cfg = ZoomingConfig { audit: true, ..Default::default() };
        let mut z = Zooming::plain(e.space().clone(), &cfg).unwrap();
        let tr = run(&mut z, &e, &RunOptions::new(4000, 1).with_events()).unwrap();
        let a = clean_run_audit(&tr.events, &e);
        assert_eq!(a.phases.len(), 11);
        assert_eq!(a.clean_phases(), a.phases.len());
        assert_eq!(a.clean_violations(), (0, 0, 0));
    }

    #[test]
    fn exact_estimates_with_zero_radius_stay_clean() {
        let e = env(Noise::Deterministic);
        let cfg = ZoomingConfig { audit: true, policy: RadiusPolicy::Deterministic, ..Default::default() };
        let mut z = Zooming::plain(e.space().clone(), &cfg).unwrap();
        let tr = run(&mut z, &e, &RunOptions::new(300, 1).with_events()).unwrap();
        assert_eq!(clean_run_audit(&tr.events, &e).cross_tab()[2..], [0, 0]);
    }

    #[test]
    fn a_wrong_estimate_is_flagged() {
        let e = env(Noise::Deterministic);
        let events = vec![
            Event::PhaseStart { round: 1, phase: 1, length: 2 },
            Event::Activate { round: 1, phase: 1, arm: 0, point: Point::Real1D(0.3), radius: 2.0 },
            Event::Update { round: 1, arm: 0, n: 1, estimate: 0.0, radius: 0.5, pre_radius: 2.0 },
            Event::Activate { round: 2, phase: 1, arm: 1, point: Point::Real1D(0.31), radius: 2.0 },
            Event::Update { round: 2, arm: 1, n: 1, estimate: 0.89, radius: 0.001, pre_radius: 0.001 },
        ];
        let a = clean_run_audit(&events, &e);
        assert!(!a.phases[0].clean);
        assert_eq!(a.phases[0].badness_violations, 1);
        assert_eq!(a.cross_tab(), [0, 0, 0, 1]);
    }
}
