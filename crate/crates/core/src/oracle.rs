//! Brute-force ground truth for small instances.
//!
//! Shares no geometry with the analytic modules: endpoints are enumerated from
//! plan parameters with their own kinematics, and sets are compared by velocity
//! station.

use crate::dynamics::AgentState;
use crate::error::{Error, Result};

/// Endpoint of the plan (γ, t1, t2, tf) from `x0`.
fn endpoint(x0: AgentState, gamma: f64, t1: f64, t2: f64, tf: f64) -> AgentState {
    let a = t1;
    let b = tf - t2;
    AgentState::new(
        x0.pos + x0.vel * tf + gamma * (a * tf - a * a / 2.0) - gamma * b * b / 2.0,
        x0.vel + gamma * (a - b),
    )
}

fn grid(tf: f64, step: f64) -> Vec<f64> {
    let n = (tf / step).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| i as f64 * step).filter(|&t| t <= tf).collect();
    if g.last().is_none_or(|&t| t < tf) {
        g.push(tf);
    }
    g
}

/// Endpoints of every gridded plan with fuel ≤ β.
pub fn oracle_reachable(x0: AgentState, beta: f64, tf: f64, grid_step: f64) -> Vec<AgentState> {
    assert!(grid_step > 0.0);
    let ts = grid(tf, grid_step);
    let mut out = Vec::new();
    for gamma in [1.0, -1.0] {
        for (i, &t1) in ts.iter().enumerate() {
            for &t2 in &ts[i..] {
                if t1 + tf - t2 <= beta + 1e-12 {
                    out.push(endpoint(x0, gamma, t1, t2, tf));
                }
            }
        }
    }
    out
}

/// Position range reachable at exactly velocity `v`, scanning the decelerating-phase length.
fn station(x0: AgentState, beta: f64, tf: f64, v: f64, step: f64) -> Option<(f64, f64)> {
    let w = v - x0.vel;
    let cap = beta.min(tf);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for gamma in [1.0, -1.0] {
        let b_min = (-gamma * w).max(0.0);
        let b_max = (cap - gamma * w) / 2.0;
        if b_max < b_min - 1e-12 {
            continue;
        }
        let b_max = b_max.max(b_min);
        let first = (b_min / step).ceil() as usize;
        let last = (b_max / step).floor() as usize;
        let mut bs: Vec<f64> = (first..=last).map(|k| k as f64 * step).collect();
        bs.push(b_min);
        bs.push(b_max);
        for b in bs {
            let a = b + gamma * w;
            let s = endpoint(x0, gamma, a, tf - b, tf);
            lo = lo.min(s.pos);
            hi = hi.max(s.pos);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Shared raster cell of all sets at `tf`, if any.
fn common_cell(agents: &[AgentState], beta: f64, tf: f64, grid_step: f64) -> Option<AgentState> {
    let m = beta.min(tf);
    let v_lo = agents.iter().map(|a| a.vel).fold(f64::NEG_INFINITY, f64::max) - m;
    let v_hi = agents.iter().map(|a| a.vel).fold(f64::INFINITY, f64::min) + m;
    if v_lo > v_hi + 1e-12 {
        return None;
    }
    let v_hi = v_hi.max(v_lo);
    let slack = grid_step * grid_step;
    let k0 = (v_lo / grid_step).ceil() as i64;
    let k1 = (v_hi / grid_step).floor() as i64;
    let mut vs: Vec<f64> = (k0..=k1).map(|k| k as f64 * grid_step).collect();
    vs.extend([v_lo, v_hi, 0.5 * (v_lo + v_hi)]);
    for v in vs {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut ok = true;
        for a in agents {
            match station(*a, beta, tf, v, grid_step) {
                Some((l, h)) => {
                    lo = lo.max(l);
                    hi = hi.min(h);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && lo <= hi + slack {
            return Some(AgentState::new(0.5 * (lo + hi), v));
        }
    }
    None
}

/// Smallest multiple of `t_step` at which all rasterized sets share a cell.
///
/// Relies on persistence (a common point at t stays common later) to binary-search the grid.
pub fn oracle_min_consensus(
    agents: &[AgentState],
    beta: f64,
    t_step: f64,
    grid_step: f64,
    horizon: f64,
) -> Result<(f64, AgentState)> {
    assert!(t_step > 0.0 && grid_step > 0.0 && !agents.is_empty());
    let probe = |k: u64| common_cell(agents, beta, k as f64 * t_step, grid_step);
    if let Some(x) = probe(0) {
        return Ok((0.0, x));
    }
    let cap = (horizon / t_step).floor() as u64;
    let (mut lo, mut hi) = (0u64, 1u64);
    loop {
        if hi > cap {
            return Err(Error::NoConsensusWithinHorizon { horizon });
        }
        if probe(hi).is_some() {
            break;
        }
        lo = hi;
        hi = if hi == cap { cap + 1 } else { (hi * 2).min(cap) };
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if probe(mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((hi as f64 * t_step, probe(hi).unwrap()))
}
