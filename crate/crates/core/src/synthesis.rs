//! Per-agent control synthesis and rendezvous verification.

use crate::attainable::{is_member, margin, membership_slack, pulse_plan, ReachSpec};
use crate::consensus::{ConsensusResult, Fleet};
use crate::dynamics::{apply_plan, AgentState, Polarity, SwitchPlan};
use crate::error::{Error, Result};
use crate::tol::{eps_g, state_tol, verify_tol_at, EPS_FUEL, EPS_T};
use crate::triplet::{recover_switchings, Sequence};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesizedControl {
    /// 1-based agent id; 0 when synthesized outside a fleet.
    pub agent_id: usize,
    pub plan: SwitchPlan,
    pub beta_eff: f64,
    pub on_boundary: bool,
}

fn ordered(t1: f64, t2: f64, tf: f64, tol: f64) -> bool {
    t1 >= -tol && t2 >= t1 - tol && t2 <= tf + tol
}

/// Plans from the boundary sequence formulas whose endpoints hit `xbar`.
fn boundary_plan(r: &ReachSpec, xbar: AgentState) -> Option<SwitchPlan> {
    let t = r.tf;
    let m = r.m();
    let w = xbar.vel - r.x0.vel;
    let (sv, sx) = membership_slack(r, &xbar);
    let tol = state_tol(xbar.scale().max(r.x0.scale()).max(t));
    let (tol_v, tol_x) = (tol.max(sv), tol.max(sx));
    let t_tol = (EPS_T * (1.0 + t)).max(sv);

    let mut tries: Vec<(Sequence, Polarity)> = vec![(Sequence::S1, Polarity::Plus), (Sequence::S3, Polarity::Minus)];
    if r.fuel_limited() && (w - m).abs() <= sv {
        tries.push((Sequence::S2, Polarity::Minus));
    }
    if r.fuel_limited() && (w + m).abs() <= sv {
        tries.push((Sequence::S4, Polarity::Plus));
    }
    for (seq, gamma) in tries {
        let Ok((t1, t2)) = recover_switchings(r.x0, xbar, t, seq, m) else {
            continue;
        };
        if !ordered(t1, t2, t, t_tol) {
            continue;
        }
        let t2 = t2.clamp(0.0, t);
        let t1 = t1.clamp(0.0, t2);
        // s2 is {0,+1}: no leading thrust, then the terminal phase carries the +1.
        let plan = match seq {
            Sequence::S1 | Sequence::S3 => SwitchPlan::new(gamma, t1, t2, t),
            Sequence::S2 | Sequence::S4 => SwitchPlan::new(gamma, 0.0, t2, t),
        };
        let Ok(plan) = plan else { continue };
        let plan = polish(r.x0, plan, xbar, r.beta);
        let end = apply_plan(r.x0, &plan);
        let hit = (end.vel - xbar.vel).abs() <= tol_v && (end.pos - xbar.pos).abs() <= tol_x;
        if plan.fuel() <= r.beta + EPS_FUEL && hit {
            return Some(plan);
        }
    }
    None
}

/// Minimum-fuel plan reaching `xbar`: the boundary curves read as quadratics in the budget,
/// then the coast-pulse-coast family.
fn min_fuel_plan(r: &ReachSpec, xbar: AgentState) -> Option<SwitchPlan> {
    let t = r.tf;
    let (x0, v0) = (r.x0.pos, r.x0.vel);
    let (x, v) = (xbar.pos, xbar.vel);
    let mut found: Vec<SwitchPlan> = Vec::new();

    for gamma in [Polarity::Plus, Polarity::Minus] {
        let g = gamma.sign();
        // mirror to the s1 form: β² − 2tβ + k = 0
        let w = g * (v - v0);
        let xr = g * (x - x0 - v * t);
        let k = w * w + 2.0 * w * t + 4.0 * xr;
        let disc = t * t - k;
        if disc < -eps_g(t * t) {
            continue;
        }
        let sd = disc.max(0.0).sqrt();
        let small = if t + sd > 0.0 { k / (t + sd) } else { 0.0 };
        for b in [small, t + sd] {
            if b < -EPS_T * (1.0 + t) {
                continue;
            }
            let b = b.max(0.0);
            let t1 = (w + b) / 2.0;
            let t2 = t - (b - w) / 2.0;
            if ordered(t1, t2, t, EPS_T * (1.0 + t)) {
                if let Ok(p) = SwitchPlan::new(gamma, t1, t2, t) {
                    found.push(p);
                }
            }
        }
    }
    found.extend(pulse_plan(r, v - v0, x - x0 - v0 * t));
    let tol = verify_tol_at(xbar.scale(), t);
    found
        .into_iter()
        .map(|p| polish(r.x0, p, xbar, r.beta))
        .filter(|p| p.fuel() <= r.beta + EPS_FUEL && apply_plan(r.x0, p).dist(&xbar) <= tol)
        .min_by(|a, b| a.fuel().total_cmp(&b.fuel()))
}

/// Newton steps on the two switch times against the exact endpoint map.
fn polish(x0: AgentState, plan: SwitchPlan, xbar: AgentState, beta: f64) -> SwitchPlan {
    let mut best = plan;
    let mut err = apply_plan(x0, &best).dist(&xbar);
    for _ in 0..4 {
        let p = best;
        let det = p.t2 - p.t1;
        if err == 0.0 || det <= EPS_T * (1.0 + p.tf) {
            break;
        }
        let end = apply_plan(x0, &p);
        let g = p.gamma.sign();
        let (ex, ev) = (g * (xbar.pos - end.pos), g * (xbar.vel - end.vel));
        // [tf - t1, tf - t2; 1, 1] (d1, d2) = (ex, ev)
        let d1 = (ex - (p.tf - p.t2) * ev) / det;
        let d2 = ev - d1;
        let Ok(q) = SwitchPlan::with_coast(p.gamma, p.t0, (p.t1 + d1).max(p.t0), (p.t2 + d2).min(p.tf), p.tf) else {
            break;
        };
        let e = apply_plan(x0, &q).dist(&xbar);
        if e >= err || q.fuel() > beta + EPS_FUEL {
            break;
        }
        best = q;
        err = e;
    }
    best
}

/// Control that brings `x0` to `xbar` at exactly `tbar` within budget `beta`.
pub fn synthesize(x0: AgentState, xbar: AgentState, tbar: f64, beta: f64) -> Result<SynthesizedControl> {
    let r = ReachSpec::new(x0, beta, tbar)?;
    let scale = xbar.scale().max(x0.scale()).max(tbar);
    let (_, slack) = membership_slack(&r, &xbar);
    let depth = margin(&r, &xbar);
    if !is_member(&r, &xbar) {
        return Err(Error::SynthesisFailed(format!(
            "target ({}, {}) lies outside the attainable set at t = {tbar} (margin {depth})",
            xbar.pos, xbar.vel
        )));
    }
    let on_boundary = depth <= slack;
    let done = |plan: SwitchPlan, beta_eff: f64| SynthesizedControl { agent_id: 0, plan, beta_eff, on_boundary };

    if tbar <= 0.0 || x0.drift(tbar).dist(&xbar) <= state_tol(scale) && xbar.vel == x0.vel {
        return Ok(done(SwitchPlan::idle(tbar.max(0.0)), 0.0));
    }
    if on_boundary {
        if let Some(p) = boundary_plan(&r, xbar) {
            return Ok(done(p, beta));
        }
    }
    let plan = min_fuel_plan(&r, xbar).ok_or_else(|| {
        Error::SynthesisFailed(format!("no admissible switching times for target ({}, {})", xbar.pos, xbar.vel))
    })?;
    let err = apply_plan(x0, &plan).dist(&xbar);
    if err > verify_tol_at(xbar.scale(), tbar) {
        return Err(Error::SynthesisFailed(format!("plan misses target by {err}")));
    }
    let beta_eff = if on_boundary { beta } else { plan.fuel() };
    Ok(done(plan, beta_eff))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentCheck {
    pub agent_id: usize,
    pub terminal_error: f64,
    pub fuel_used: f64,
    /// β − fuel used.
    pub fuel_margin: f64,
    /// Smallest gap in 0 ≤ t0 ≤ t1 ≤ t2 ≤ tf.
    pub ordering_margin: f64,
    /// |plan.tf − t̄|.
    pub horizon_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RendezvousReport {
    pub agents: Vec<AgentCheck>,
    pub max_terminal_error: f64,
    pub pass: bool,
}

/// Re-simulates every plan of a feasible result against the fleet.
pub fn verify_rendezvous(fleet: &Fleet, result: &ConsensusResult) -> RendezvousReport {
    let Some(rv) = result.rendezvous.as_ref() else {
        return RendezvousReport { agents: vec![], max_terminal_error: f64::INFINITY, pass: false };
    };
    let tol = verify_tol_at(rv.x_star.scale(), rv.t_star);
    let mut agents = Vec::with_capacity(fleet.agents.len());
    let mut pass = rv.per_agent.len() == fleet.agents.len();
    for (i, x0) in fleet.agents.iter().enumerate() {
        let Some(c) = rv.per_agent.get(i) else { break };
        let p = &c.plan;
        let terminal_error = apply_plan(*x0, p).dist(&rv.x_star);
        let fuel_used = p.fuel();
        let ordering_margin = [p.t0, p.t1 - p.t0, p.t2 - p.t1, p.tf - p.t2]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let horizon_error = (p.tf - rv.t_star).abs();
        let ok = terminal_error <= tol
            && fuel_used <= fleet.beta + EPS_FUEL
            && ordering_margin >= -EPS_T * (1.0 + p.tf)
            && horizon_error <= EPS_T * (1.0 + rv.t_star);
        pass &= ok;
        agents.push(AgentCheck {
            agent_id: i + 1,
            terminal_error,
            fuel_used,
            fuel_margin: fleet.beta - fuel_used,
            ordering_margin,
            horizon_error,
            pass: ok,
        });
    }
    let max_terminal_error = agents.iter().map(|a| a.terminal_error).fold(0.0, f64::max);
    RendezvousReport { agents, max_terminal_error, pass }
}
