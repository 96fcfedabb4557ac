//! NaiveExp: full feedback on a uniform hitting set, phases of length 2^i,
//! each phase betting on the previous phase's empirical best.

use serde::{Deserialize, Serialize};

use crate::algorithm::{Action, Algorithm, Event, Feedback};
use crate::instances::{FeedbackMode, InstanceError};
use crate::metric::{greedy_net, MetricError, Point, SpaceRef};

pub const DEFAULT_HITTING_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NaiveExpMode {
    /// δ = T^{−1/(b+2)}.
    #[default]
    Standard,
    /// δ = T^{−1/b}, for uniformly Lipschitz realizations (b ≥ 2).
    Uniform,
}

pub fn naive_exp_delta(b: f64, mode: NaiveExpMode, length: u64) -> f64 {
    let t = length as f64;
    match mode {
        NaiveExpMode::Standard => t.powf(-1.0 / (b + 2.0)),
        NaiveExpMode::Uniform => t.powf(-1.0 / b),
    }
}

/// Width and hitting set for a phase; errors when the set exceeds `cap`.
pub fn naive_exp_hitting_set(space: &SpaceRef, b: f64, mode: NaiveExpMode, length: u64, cap: usize) -> Result<(f64, Vec<Point>), MetricError> {
    let delta = naive_exp_delta(b, mode, length).max(space.eta());
    Ok((delta, greedy_net(space.as_ref(), delta, cap)?))
}

/// Index of the largest mean, lowest index on ties.
pub fn empirical_best(sums: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in sums.iter().enumerate() {
        if s > sums[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug)]
pub struct NaiveExp {
    space: SpaceRef,
    b: f64,
    mode: NaiveExpMode,
    cap: usize,
    phase: u32,
    ends_at: u64,
    hitting: Vec<Point>,
    sums: Vec<f64>,
    guess: Option<Point>,
    events: Vec<Event>,
}

impl NaiveExp {
    pub fn new(space: SpaceRef, b: f64, mode: NaiveExpMode, cap: usize) -> Result<Self, InstanceError> {
        let ok = match mode {
            NaiveExpMode::Standard => b > 0.0,
            NaiveExpMode::Uniform => b >= 2.0,
        };
        if !ok || cap == 0 {
            return Err(InstanceError::Invalid(format!("NaiveExp needs b > 0 (b ≥ 2 in uniform mode) and a positive cap, got b={b}, cap={cap}")));
        }
        Ok(NaiveExp { space, b, mode, cap, phase: 0, ends_at: 0, hitting: vec![], sums: vec![], guess: None, events: vec![] })
    }

    pub fn guess(&self) -> Option<&Point> {
        self.guess.as_ref()
    }

    fn start_phase(&mut self, round: u64) {
        if !self.hitting.is_empty() {
            self.guess = Some(self.hitting[empirical_best(&self.sums)].clone());
        }
        self.phase += 1;
        let length = 1u64 << self.phase.min(62);
        self.ends_at = round + length - 1;
        self.events.push(Event::PhaseStart { round, phase: self.phase, length });
        let (delta, hitting) = match naive_exp_hitting_set(&self.space, self.b, self.mode, length, self.cap) {
            Ok(h) => h,
            Err(_) => {
                let delta = naive_exp_delta(self.b, self.mode, length).max(self.space.eta());
                self.events.push(Event::Note { round, message: format!("hitting set at width {delta} truncated at {} points", self.cap) });
                (delta, self.space.net_points(delta, self.cap, None).0)
            }
        };
        self.events.push(Event::Mesh { round, delta, size: hitting.len() });
        self.sums = vec![0.0; hitting.len()];
        self.hitting = hitting;
        if self.guess.is_none() {
            self.guess = self.hitting.first().cloned();
        }
    }
}

impl Algorithm for NaiveExp {
    fn name(&self) -> String {
        match self.mode {
            NaiveExpMode::Standard => format!("naive-exp(b={})", self.b),
            NaiveExpMode::Uniform => format!("naive-exp-uniform(b={})", self.b),
        }
    }

    fn feedback(&self) -> FeedbackMode {
        FeedbackMode::Full
    }

    fn act(&mut self, round: u64) -> Action {
        if round > self.ends_at {
            self.start_phase(round);
        }
        let play = self.guess.clone().expect("hitting set is never empty");
        Action { play, peeks: self.hitting.clone() }
    }

    fn observe(&mut self, _round: u64, fb: &Feedback) {
        for (s, y) in self.sums.iter_mut().zip(&fb.peeks) {
            *s += y;
        }
    }

    fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Interval;
    use std::sync::Arc;

    #[test]
    fn delta_by_mode() {
        assert_eq!(naive_exp_delta(2.0, NaiveExpMode::Uniform, 4096), 1.0 / 64.0);
        assert_eq!(naive_exp_delta(2.0, NaiveExpMode::Standard, 4096), 1.0 / 8.0);
    }

    #[test]
    fn cap_error() {
        let s: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        assert!(naive_exp_hitting_set(&s, 1.0, NaiveExpMode::Standard, 1 << 15, 5).is_err());
        let (_, h) = naive_exp_hitting_set(&s, 1.0, NaiveExpMode::Standard, 1 << 15, 1000).unwrap();
        assert!(h.len() <= 40);
    }

    #[test]
    fn exact_payoffs_find_peak_on_hitting_set() {
        let s: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        let mut alg = NaiveExp::new(s, 1.0, NaiveExpMode::Standard, 1000).unwrap();
        let mut peak = None;
        for t in 1..=62u64 {
            let a = alg.act(t);
            let p = peak.get_or_insert_with(|| a.peeks[a.peeks.len() / 2].clone()).as_real().unwrap();
            let peeks = a.peeks.iter().map(|x| 1.0 - (x.as_real().unwrap() - p).abs()).collect();
            alg.observe(t, &Feedback { reward: 0.0, peeks });
        }
        // The hitting set changes each phase, but the guess is always
        // the set point nearest the peak.
        alg.act(63);
        let g = alg.guess().unwrap().as_real().unwrap();
        assert!((g - peak.unwrap().as_real().unwrap()).abs() <= naive_exp_delta(1.0, NaiveExpMode::Standard, 32));
    }

    #[test]
    fn rejects_bad_exponent() {
        let s: SpaceRef = Arc::new(Interval::new(1.0).unwrap());
        assert!(NaiveExp::new(s.clone(), 1.0, NaiveExpMode::Uniform, 10).is_err());
        assert!(NaiveExp::new(s, 0.0, NaiveExpMode::Standard, 10).is_err());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        assert_eq!(empirical_best(&[0.5, 0.7, 0.7]), 1);
        assert_eq!(empirical_best(&[0.0]), 0);
    }
}
