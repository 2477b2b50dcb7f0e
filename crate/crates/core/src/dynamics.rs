//! Double-integrator kinematics and bang-off-bang plans.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol::EPS_T;

/// Position and velocity of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub pos: f64,
    pub vel: f64,
}

impl AgentState {
    pub const fn new(pos: f64, vel: f64) -> Self {
        Self { pos, vel }
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite() && self.vel.is_finite()
    }

    /// Largest coordinate magnitude, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.pos.abs().max(self.vel.abs())
    }

    /// Componentwise distance (max norm).
    pub fn dist(&self, other: &AgentState) -> f64 {
        (self.pos - other.pos).abs().max((self.vel - other.vel).abs())
    }

    /// State after coasting for `t` with no input.
    pub fn drift(&self, t: f64) -> AgentState {
        AgentState::new(self.pos + self.vel * t, self.vel)
    }
}

/// Sign of the first thrust phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Plus,
    Minus,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Plus => 1.0,
            Polarity::Minus => -1.0,
        }
    }

    pub fn as_int(self) -> i8 {
        match self {
            Polarity::Plus => 1,
            Polarity::Minus => -1,
        }
    }

    pub fn from_int(g: i64) -> Option<Self> {
        match g {
            1 => Some(Polarity::Plus),
            -1 => Some(Polarity::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Polarity::Plus => Polarity::Minus,
            Polarity::Minus => Polarity::Plus,
        }
    }
}

/// Bang-off-bang input: 0 on [0,t0), γ on [t0,t1), 0 on [t1,t2), −γ on [t2,tf].
///
/// Plans built with [`SwitchPlan::new`] have `t0 = 0`, the classic three-phase law.
/// A positive `t0` only appears in coast-pulse-coast plans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchPlan {
    pub gamma: Polarity,
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub tf: f64,
}

impl SwitchPlan {
    pub fn new(gamma: Polarity, t1: f64, t2: f64, tf: f64) -> Result<Self> {
        Self::with_coast(gamma, 0.0, t1, t2, tf)
    }

    /// Validates `0 ≤ t0 ≤ t1 ≤ t2 ≤ tf` within [`EPS_T`] and clamps tiny violations.
    pub fn with_coast(gamma: Polarity, t0: f64, t1: f64, t2: f64, tf: f64) -> Result<Self> {
        let ts = [t0, t1, t2, tf];
        if ts.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite switch time in {ts:?}")));
        }
        let tol = EPS_T * (1.0 + tf.abs());
        if t0 < -tol || t1 < t0 - tol || t2 < t1 - tol || tf < t2 - tol {
            return Err(Error::InvalidInput(format!(
                "switch times out of order: t0={t0}, t1={t1}, t2={t2}, tf={tf}"
            )));
        }
        let tf = tf.max(0.0);
        let t0 = t0.clamp(0.0, tf);
        let t1 = t1.clamp(t0, tf);
        let t2 = t2.clamp(t1, tf);
        Ok(Self { gamma, t0, t1, t2, tf })
    }

    /// The all-off plan.
    pub fn idle(tf: f64) -> Self {
        Self { gamma: Polarity::Plus, t0: 0.0, t1: 0.0, t2: tf, tf }
    }

    /// Coast, thrust γ for `duration`, coast to `tf`.
    pub fn pulse(gamma: Polarity, start: f64, duration: f64, tf: f64) -> Result<Self> {
        Self::with_coast(gamma, start, start + duration, tf, tf)
    }

    pub fn fuel(&self) -> f64 {
        (self.t1 - self.t0) + (self.tf - self.t2)
    }

    /// The four phases as (input level, duration).
    pub fn phases(&self) -> [(f64, f64); 4] {
        let g = self.gamma.sign();
        [
            (0.0, self.t0),
            (g, self.t1 - self.t0),
            (0.0, self.t2 - self.t1),
            (-g, self.tf - self.t2),
        ]
    }

    /// Levels of the phases with positive duration, adjacent repeats merged.
    pub fn levels(&self) -> Vec<i8> {
        let mut out: Vec<i8> = Vec::with_capacity(4);
        for (u, d) in self.phases() {
            if d > EPS_T {
                let u = u as i8;
                if out.last() != Some(&u) {
                    out.push(u);
                }
            }
        }
        out
    }

    /// Input applied at time `t` (right-continuous; the last active level at `t = tf`).
    pub fn level_at(&self, t: f64) -> f64 {
        let mut start = 0.0;
        let mut last = 0.0;
        for (u, d) in self.phases() {
            if d <= 0.0 {
                continue;
            }
            if t < start + d {
                return u;
            }
            last = u;
            start += d;
        }
        last
    }

    pub fn is_idle(&self) -> bool {
        self.fuel() <= EPS_T
    }
}

/// A sampled trajectory: states at increasing times and the piecewise-constant input.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, AgentState)>,
    /// `(start time, level)` for every phase of positive duration.
    pub control: Vec<(f64, f64)>,
}

/// Exact propagation under constant input `u` for `dt`.
pub fn propagate(s: AgentState, u: f64, dt: f64) -> AgentState {
    debug_assert!(dt >= 0.0 && u.abs() <= 1.0);
    AgentState::new(s.pos + s.vel * dt + 0.5 * u * dt * dt, s.vel + u * dt)
}

/// State reached at time `t` (clamped to `[0, tf]`) under plan `p`.
pub fn state_at(x0: AgentState, p: &SwitchPlan, t: f64) -> AgentState {
    let mut s = x0;
    let mut start = 0.0;
    for (u, d) in p.phases() {
        if t <= start {
            break;
        }
        let end = start + d;
        let dt = (t.min(end) - start).max(0.0);
        if dt > 0.0 {
            s = propagate(s, u, dt);
        }
        start = end;
    }
    s
}

pub fn apply_plan(x0: AgentState, p: &SwitchPlan) -> AgentState {
    state_at(x0, p, p.tf)
}

pub fn fuel_of(p: &SwitchPlan) -> f64 {
    p.fuel()
}

/// `n` uniform samples on `[0, tf]` plus the switch instants.
pub fn sample_trajectory(x0: AgentState, p: &SwitchPlan, n: usize) -> Trajectory {
    let n = n.max(2);
    let mut times: Vec<f64> = (0..n)
        .map(|i| p.tf * (i as f64 / (n - 1) as f64))
        .collect();
    for t in [p.t0, p.t1, p.t2] {
        if t > 0.0 && t < p.tf {
            times.push(t);
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup();

    let samples = times.iter().map(|&t| (t, state_at(x0, p, t))).collect();

    let mut control: Vec<(f64, f64)> = Vec::new();
    let mut start = 0.0;
    for (u, d) in p.phases() {
        if d > 0.0 && control.last().map(|c| c.1) != Some(u) {
            control.push((start, u));
        }
        start += d;
    }
    if control.is_empty() {
        control.push((0.0, 0.0));
    }
    Trajectory { samples, control }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagate_examples() {
        assert_eq!(propagate(AgentState::new(0.0, 0.0), 0.0, 5.0), AgentState::new(0.0, 0.0));
        assert_eq!(propagate(AgentState::new(0.0, 0.0), 1.0, 2.0), AgentState::new(2.0, 2.0));
    }

    #[test]
    fn propagate_matches_euler() {
        let dt = 42.71;
        let s = propagate(AgentState::new(40.0, 64.0), -1.0, dt);
        assert_eq!(s.pos, 40.0 + 64.0 * dt - dt * dt / 2.0);
        assert_eq!(s.vel, 64.0 - dt);

        let h = 1e-4;
        let steps = (dt / h).round() as usize;
        let h = dt / steps as f64;
        let (mut x, mut v) = (40.0f64, 64.0f64);
        for _ in 0..steps {
            x += v * h - 0.5 * h * h;
            v -= h;
        }
        assert!((x - s.pos).abs() < 1e-6 * (1.0 + s.pos.abs()), "{x} vs {}", s.pos);
        assert!((v - s.vel).abs() < 1e-8);
    }

    #[test]
    fn idle_plan_is_zero_input() {
        let p = SwitchPlan::new(Polarity::Plus, 0.0, 7.0, 7.0).unwrap();
        assert_eq!(apply_plan(AgentState::new(0.0, 0.0), &p), AgentState::new(0.0, 0.0));
        assert_eq!(fuel_of(&SwitchPlan::new(Polarity::Plus, 0.0, 10.0, 10.0).unwrap()), 0.0);
        assert_eq!(p.levels(), vec![0]);
    }

    #[test]
    fn fuel_counts_both_thrust_phases() {
        let p = SwitchPlan::new(Polarity::Plus, 39.28, 89.71, 100.43).unwrap();
        assert!((fuel_of(&p) - 50.0).abs() < 0.1);
        let p = SwitchPlan::new(Polarity::Minus, 5.14, 96.73, 100.43).unwrap();
        assert!((fuel_of(&p) - 8.84).abs() < 0.1);
        assert_eq!(p.levels(), vec![-1, 0, 1]);
    }

    #[test]
    fn rejects_misordered_times() {
        assert!(SwitchPlan::new(Polarity::Plus, 2.0, 1.0, 3.0).is_err());
        assert!(SwitchPlan::new(Polarity::Plus, 0.0, 1.0, 0.5).is_err());
        assert!(SwitchPlan::new(Polarity::Plus, -1e-12, 1.0, 1.0).is_ok());
    }

    #[test]
    fn sample_trajectory_hand_composition() {
        let p = SwitchPlan::new(Polarity::Plus, 1.0, 1.0, 2.0).unwrap();
        let tr = sample_trajectory(AgentState::new(0.0, 0.0), &p, 3);
        let (t, end) = *tr.samples.last().unwrap();
        assert_eq!(t, 2.0);
        assert_eq!(end, AgentState::new(1.0, 0.0));
        assert_eq!(tr.control, vec![(0.0, 1.0), (1.0, -1.0)]);
    }

    #[test]
    fn sample_trajectory_idle() {
        let tr = sample_trajectory(AgentState::new(0.0, 0.0), &SwitchPlan::idle(1.0), 2);
        assert_eq!(
            tr.samples,
            vec![(0.0, AgentState::new(0.0, 0.0)), (1.0, AgentState::new(0.0, 0.0))]
        );
        assert_eq!(tr.control, vec![(0.0, 0.0)]);
    }

    #[test]
    fn pulse_plan() {
        let p = SwitchPlan::pulse(Polarity::Plus, 1.0, 2.0, 5.0).unwrap();
        assert_eq!(p.levels(), vec![0, 1, 0]);
        assert_eq!(p.fuel(), 2.0);
        let s = apply_plan(AgentState::new(0.0, 0.0), &p);
        // 2 units of thrust reach v = 2 at t = 3, then coast for 2.
        assert_eq!(s, AgentState::new(2.0 + 4.0, 2.0));
        assert_eq!(p.level_at(0.5), 0.0);
        assert_eq!(p.level_at(2.0), 1.0);
        assert_eq!(p.level_at(5.0), 0.0);
    }

    #[test]
    fn time_reversal_fixture() {
        let x0 = AgentState::new(3.0, -1.0);
        let p = SwitchPlan::new(Polarity::Plus, 1.5, 4.0, 6.0).unwrap();
        let x1 = apply_plan(x0, &p);
        let back = SwitchPlan::new(Polarity::Minus, p.tf - p.t2, p.tf - p.t1, p.tf).unwrap();
        let r = apply_plan(AgentState::new(x1.pos, -x1.vel), &back);
        assert!((r.pos - x0.pos).abs() < 1e-12);
        assert!((r.vel + x0.vel).abs() < 1e-12);
    }
}
