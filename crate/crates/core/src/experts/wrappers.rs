//! Algorithms for well-ordered (or rank-decomposable) spaces built on the
//! exploration subroutines: a bandit version with doubly exponential
//! phases and an experts version that explores on free peeks.

use serde::{Deserialize, Serialize};

use super::expl::Exploration;
use crate::algorithm::{Action, Algorithm, Event, Feedback};
use crate::instances::{FeedbackMode, InstanceError};
use crate::metric::{MetricSpace, Point, SpaceRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Explorer {
    /// EXPL with the ordering oracle.
    #[default]
    Ordering,
    /// EXPL′ with per-rank covers.
    Rank,
}

fn explore(space: &dyn MetricSpace, kind: Explorer, k: usize, n: u64) -> Result<Exploration, InstanceError> {
    match kind {
        Explorer::Ordering => {
            if space.finite_points().is_none() || space.mesh(1).first().and_then(|p| space.order_key(p)).is_none() {
                return Err(InstanceError::Invalid(format!("{} declares no well-order", space.name())));
            }
            Ok(Exploration::ordering(space, k, n))
        }
        Explorer::Rank => Ok(Exploration::rank(space, k, n)?),
    }
}

/// Parameters (k, n, r) for a bandit phase of length T with exploration
/// budget g(T) = (ln T)^power.
pub fn bandit_schedule(length: u64, power: f64) -> (usize, u64, f64) {
    let lt = (length as f64).ln();
    let g = lt.powf(power);
    let k = ((g / lt).sqrt().floor() as usize).max(1);
    let n = ((k as f64 * lt).floor() as u64).max(1);
    (k, n, 4.0 * (lt / n as f64).sqrt())
}

/// g(T) = (ln T)^power.
pub fn exploration_budget(length: u64, power: f64) -> f64 {
    (length as f64).ln().powf(power)
}

pub const MAX_DOUBLY_EXPONENTIAL_PHASE: u32 = 5;

/// Phase i lasts 2^{2^i} rounds: explore, then play the result.
#[derive(Debug)]
pub struct WellOrderedBandit {
    space: SpaceRef,
    explorer: Explorer,
    power: f64,
    max_phase: u32,
    phase: u32,
    ends_at: u64,
    radius: f64,
    current: Option<Exploration>,
    exploit: Option<Point>,
    events: Vec<Event>,
}

impl WellOrderedBandit {
    pub fn new(space: SpaceRef, explorer: Explorer, power: f64, max_phase: u32) -> Result<Self, InstanceError> {
        if !(power > 1.0) {
            return Err(InstanceError::Invalid(format!("budget exponent must exceed 1 so that g(t)/ln t grows, got {power}")));
        }
        if max_phase == 0 || max_phase > MAX_DOUBLY_EXPONENTIAL_PHASE {
            return Err(InstanceError::Invalid(format!("phase cap must lie in 1..={MAX_DOUBLY_EXPONENTIAL_PHASE}")));
        }
        explore(space.as_ref(), explorer, 1, 1)?;
        Ok(WellOrderedBandit {
            space,
            explorer,
            power,
            max_phase,
            phase: 0,
            ends_at: 0,
            radius: 0.0,
            current: None,
            exploit: None,
            events: vec![],
        })
    }

    fn start_phase(&mut self, round: u64) {
        self.phase += 1;
        let length = 1u64 << (1u32 << self.phase);
        let last = self.phase >= self.max_phase;
        self.ends_at = if last { u64::MAX } else { round + length - 1 };
        self.events.push(Event::PhaseStart { round, phase: self.phase, length });
        let (k, n, r) = bandit_schedule(length, self.power);
        let e = explore(self.space.as_ref(), self.explorer, k, n).expect("checked at construction");
        if e.budget() > length {
            self.events.push(Event::Note { round, message: format!("exploration of {} rounds overruns the phase", e.budget()) });
            self.ends_at = self.ends_at.max(round + e.budget() - 1);
        }
        self.radius = r;
        self.current = Some(e);
    }
}

impl Algorithm for WellOrderedBandit {
    fn name(&self) -> String {
        format!("well-ordered-bandit({:?})", self.explorer)
    }

    fn act(&mut self, round: u64) -> Action {
        if round > self.ends_at {
            self.start_phase(round);
        }
        if let Some(x) = self.current.as_ref().and_then(|e| e.next_point()) {
            return Action::play(x.clone());
        }
        Action::play(self.exploit.clone().expect("exploration finished"))
    }

    fn observe(&mut self, round: u64, fb: &Feedback) {
        let Some(e) = self.current.as_mut() else { return };
        e.record(fb.reward);
        if e.done() {
            let out = e.finish(self.space.as_ref(), self.radius).expect("non-empty cover");
            self.events.push(Event::Explore {
                round,
                chosen: out.chosen.clone(),
                points: out.points.len(),
                pulls: out.pulls,
                losers: out.rejected_count(),
            });
            self.exploit = Some(out.chosen);
            self.current = None;
        }
    }

    fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PeekRadius {
    /// r = 4·sqrt(T^{1/4}/n).
    #[default]
    Verbatim,
    /// r = 4·sqrt(ln T / n).
    Log,
}

impl PeekRadius {
    pub fn value(self, length: u64, n: u64) -> f64 {
        let t = length as f64;
        match self {
            PeekRadius::Verbatim => 4.0 * (t.powf(0.25) / n as f64).sqrt(),
            PeekRadius::Log => 4.0 * (t.ln() / n as f64).sqrt(),
        }
    }
}

/// Phases of length T = 2^i. Explores with k = n = ⌊√T⌋ on the free
/// peeks and bets on the previous phase's result.
#[derive(Debug)]
pub struct FreePeekExperts {
    space: SpaceRef,
    explorer: Explorer,
    radius_rule: PeekRadius,
    phase: u32,
    ends_at: u64,
    radius: f64,
    current: Option<Exploration>,
    next_bet: Option<Point>,
    bet: Point,
    peeked: bool,
    events: Vec<Event>,
}

impl FreePeekExperts {
    pub fn new(space: SpaceRef, explorer: Explorer, radius_rule: PeekRadius) -> Result<Self, InstanceError> {
        explore(space.as_ref(), explorer, 1, 1)?;
        let bet = space.mesh(1).first().cloned().ok_or_else(|| InstanceError::Invalid("empty space".into()))?;
        Ok(FreePeekExperts {
            space,
            explorer,
            radius_rule,
            phase: 0,
            ends_at: 0,
            radius: 0.0,
            current: None,
            next_bet: None,
            bet,
            peeked: false,
            events: vec![],
        })
    }

    fn start_phase(&mut self, round: u64) {
        if let Some(b) = self.next_bet.take() {
            self.bet = b;
        }
        self.phase += 1;
        let length = 1u64 << self.phase.min(62);
        self.ends_at = round + length - 1;
        self.events.push(Event::PhaseStart { round, phase: self.phase, length });
        let k = (length as f64).sqrt().floor() as u64;
        let e = explore(self.space.as_ref(), self.explorer, k as usize, k).expect("checked at construction");
        self.radius = self.radius_rule.value(length, k.max(1));
        self.current = Some(e);
    }

    pub fn bet(&self) -> &Point {
        &self.bet
    }
}

impl Algorithm for FreePeekExperts {
    fn name(&self) -> String {
        format!("free-peek-experts({:?})", self.explorer)
    }

    fn feedback(&self) -> FeedbackMode {
        FeedbackMode::Double
    }

    fn act(&mut self, round: u64) -> Action {
        if round > self.ends_at {
            self.start_phase(round);
        }
        let peek = self.current.as_ref().and_then(|e| e.next_point()).cloned();
        self.peeked = peek.is_some();
        Action { play: self.bet.clone(), peeks: peek.into_iter().collect() }
    }

    fn observe(&mut self, round: u64, fb: &Feedback) {
        if !self.peeked {
            return;
        }
        let Some(e) = self.current.as_mut() else { return };
        e.record(fb.peeks[0]);
        if e.done() {
            let out = e.finish(self.space.as_ref(), self.radius).expect("non-empty cover");
            self.events.push(Event::Explore {
                round,
                chosen: out.chosen.clone(),
                points: out.points.len(),
                pulls: out.pulls,
                losers: out.rejected_count(),
            });
            self.next_bet = Some(out.chosen);
            self.current = None;
        }
    }

    fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Harmonic, Interval};
    use std::sync::Arc;

    fn harmonic() -> SpaceRef {
        Arc::new(Harmonic::new(20).unwrap())
    }

    #[test]
    fn schedule_substitution() {
        // g = ln²: k = ⌊sqrt(ln T)⌋.
        let (k, n, r) = bandit_schedule(1 << 16, 2.0);
        let lt = 65536f64.ln();
        assert_eq!(k, lt.sqrt().floor() as usize);
        assert_eq!(n, (k as f64 * lt).floor() as u64);
        assert!((r - 4.0 * (lt / n as f64).sqrt()).abs() < 1e-15);
        for i in 1..=5 {
            let t = 1u64 << (1u32 << i);
            let (k, n, _) = bandit_schedule(t, 2.0);
            assert!((k as u64 * n) as f64 <= exploration_budget(t, 2.0));
        }
    }

    #[test]
    fn needs_a_well_order() {
        let s: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        assert!(WellOrderedBandit::new(s.clone(), Explorer::Ordering, 2.0, 3).is_err());
        assert!(FreePeekExperts::new(s, Explorer::Ordering, PeekRadius::Verbatim).is_err());
        assert!(WellOrderedBandit::new(harmonic(), Explorer::Ordering, 1.0, 3).is_err());
    }

    #[test]
    fn bandit_wrapper_explores_then_commits() {
        let mut a = WellOrderedBandit::new(harmonic(), Explorer::Ordering, 2.0, 3).unwrap();
        let mut plays = vec![];
        for t in 1..=300u64 {
            let x = a.act(t);
            a.observe(t, &Feedback { reward: 0.5, peeks: vec![] });
            plays.push(x.play);
        }
        let ev = a.take_events();
        let starts: Vec<u64> = ev.iter().filter_map(|e| if let Event::PhaseStart { round, .. } = e { Some(*round) } else { None }).collect();
        assert_eq!(starts, vec![1, 5, 21]);
        // Equal payoffs: the limit point wins the ordering.
        assert_eq!(plays.last(), Some(&Point::Index(0)));
    }

    #[test]
    fn free_peek_bets_are_constant_within_phases() {
        let mut a = FreePeekExperts::new(harmonic(), Explorer::Ordering, PeekRadius::Log).unwrap();
        let mut bets = vec![];
        for t in 1..=62u64 {
            let x = a.act(t);
            assert!(x.peeks.len() <= 1);
            let peeks = x.peeks.iter().map(|p| if *p == Point::Index(0) { 0.9 } else { 0.2 }).collect();
            a.observe(t, &Feedback { reward: 0.0, peeks });
            bets.push(x.play);
        }
        let mut start = 0;
        for i in 1..=5u32 {
            let len = 1usize << i;
            assert!(bets[start..start + len].iter().all(|b| *b == bets[start]));
            start += len;
        }
        assert_eq!(bets[61], Point::Index(0));
    }
}
