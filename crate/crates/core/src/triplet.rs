//! Minimum-time consensus of three agents.
//!
//! Pairwise contact times come from bisection on the exact overlap predicate.
//! When the latest pair's contact point is not shared by the third agent, the
//! first common point lies on all three boundaries and is found by solving the
//! boundary equations of each of the 20 sequence scenarios.

use crate::attainable::{contains, intersect, max_overlap, specs_at, ReachSpec};
use crate::dynamics::{AgentState, SwitchPlan};
use crate::error::{Error, Result};
use crate::synthesis::synthesize;
use crate::tol::{eps_g, EPS_T};

/// Switching sequence of a boundary-attaining control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sequence {
    /// {+1, 0, −1}
    S1,
    /// {0, +1}
    S2,
    /// {−1, 0, +1}
    S3,
    /// {0, −1}
    S4,
}

impl Sequence {
    pub fn levels(self) -> &'static [i8] {
        match self {
            Sequence::S1 => &[1, 0, -1],
            Sequence::S2 => &[0, 1],
            Sequence::S3 => &[-1, 0, 1],
            Sequence::S4 => &[0, -1],
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Sequence::S1 => "s1",
            Sequence::S2 => "s2",
            Sequence::S3 => "s3",
            Sequence::S4 => "s4",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "s1" => Some(Sequence::S1),
            "s2" => Some(Sequence::S2),
            "s3" => Some(Sequence::S3),
            "s4" => Some(Sequence::S4),
            _ => None,
        }
    }

    /// Matches a plan's active levels; bang-bang plans count as s1/s3.
    pub fn from_levels(levels: &[i8]) -> Option<Self> {
        match levels {
            [1, 0, -1] | [1, -1] => Some(Sequence::S1),
            [0, 1] => Some(Sequence::S2),
            [-1, 0, 1] | [-1, 1] => Some(Sequence::S3),
            [0, -1] => Some(Sequence::S4),
            _ => None,
        }
    }

    /// +1 for the upper arc (s1), −1 for the lower arc (s3).
    fn arc_sign(self) -> Option<f64> {
        match self {
            Sequence::S1 => Some(1.0),
            Sequence::S3 => Some(-1.0),
            _ => None,
        }
    }

    /// +1 for the top cap (s2), −1 for the bottom cap (s4).
    fn cap_sign(self) -> Option<f64> {
        match self {
            Sequence::S2 => Some(1.0),
            Sequence::S4 => Some(-1.0),
            _ => None,
        }
    }
}

/// Human-readable sequence label for a plan: `s1`..`s4`, `off`, or the raw levels.
pub fn plan_tag(p: &SwitchPlan) -> String {
    let levels = p.levels();
    if levels.is_empty() || levels == [0] {
        return "off".to_string();
    }
    match Sequence::from_levels(&levels) {
        Some(s) => s.tag().to_string(),
        None => levels
            .iter()
            .map(|l| match l {
                1 => "+1",
                -1 => "-1",
                _ => "0",
            })
            .collect::<Vec<_>>()
            .join(","),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub id: u8,
    pub seqs: [Sequence; 3],
}

use Sequence::{S1, S2, S3, S4};

const fn sc(id: u8, a: Sequence, b: Sequence, c: Sequence) -> Scenario {
    Scenario { id, seqs: [a, b, c] }
}

/// The 20 boundary combinations for agents (i, j, k).
pub const SCENARIOS: [Scenario; 20] = [
    sc(1, S1, S3, S1),
    sc(2, S1, S1, S3),
    sc(3, S1, S3, S3),
    sc(4, S3, S1, S1),
    sc(5, S3, S3, S1),
    sc(6, S3, S1, S3),
    sc(7, S3, S2, S3),
    sc(8, S3, S2, S1),
    sc(9, S3, S1, S2),
    sc(10, S3, S1, S4),
    sc(11, S3, S4, S1),
    sc(12, S2, S3, S1),
    sc(13, S2, S1, S3),
    sc(14, S2, S1, S1),
    sc(15, S1, S3, S2),
    sc(16, S1, S3, S4),
    sc(17, S1, S2, S3),
    sc(18, S1, S4, S3),
    sc(19, S4, S3, S1),
    sc(20, S4, S1, S3),
];

pub fn scenario(id: u8) -> Option<Scenario> {
    SCENARIOS.iter().copied().find(|s| s.id == id)
}

/// Which boundary description is active: fuel-binding (t ≥ β) or time-binding (t ≤ β).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Fuel,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub t: f64,
    pub state: AgentState,
    pub regime: Regime,
}

/// How a triplet's consensus point was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TripletCase {
    /// All three agents start at the same state.
    Coincident,
    /// Contact point of the pair `(p, q)` (indices into the triplet), shared by the third.
    PairContact(usize, usize),
    /// Common boundary point from the scenario equations.
    Scenario(u8),
    /// Bisection on the three-set overlap.
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripletSolution {
    pub t_star: f64,
    pub x_star: AgentState,
    pub scenario: Option<Scenario>,
    pub case: TripletCase,
    pub plans: [SwitchPlan; 3],
}

/// Position on an arc at velocity `v`, time `t`, velocity half-width `m`.
fn arc(x0: &AgentState, sigma: f64, v: f64, t: f64, m: f64) -> f64 {
    let w = v - x0.vel;
    x0.pos + t * (v + x0.vel) / 2.0 + sigma * (t * m / 2.0 - (m * m + w * w) / 4.0)
}

/// Residual of the boundary equation for `seq` at `(state, tf)`.
pub fn boundary_residual(x0: &AgentState, seq: Sequence, state: &AgentState, tf: f64, beta: f64) -> f64 {
    let b = beta.min(tf);
    let (x, v) = (state.pos, state.vel);
    let (xi, vi) = (x0.pos, x0.vel);
    match seq {
        Sequence::S1 => {
            x - xi - v * tf + (v + b - vi).powi(2) / 8.0 + (v - b + 2.0 * tf - vi).powi(2) / 8.0
                - tf * tf / 2.0
        }
        Sequence::S3 => {
            x - xi - v * tf - (-v + b + vi).powi(2) / 8.0 - (-v - b + 2.0 * tf + vi).powi(2) / 8.0
                + tf * tf / 2.0
        }
        Sequence::S2 => v - vi - b,
        Sequence::S4 => v - vi + b,
    }
}

/// Real roots of `a2 t² + a1 t + a0`, ascending; linear when `a2 = 0`.
fn roots(a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    if a2 == 0.0 {
        return if a1 == 0.0 { vec![] } else { vec![-a0 / a1] };
    }
    let disc = a1 * a1 - 4.0 * a2 * a0;
    if disc < 0.0 {
        let scale = (a1 * a1).max((4.0 * a2 * a0).abs());
        if disc < -1e-12 * scale {
            return vec![];
        }
    }
    let sd = disc.max(0.0).sqrt();
    let q = -0.5 * (a1 + a1.signum() * sd);
    let mut r = if q == 0.0 {
        vec![0.0]
    } else {
        vec![q / a2, a0 / q]
    };
    r.sort_by(f64::total_cmp);
    r
}

/// All positive-time common boundary points of the scenario, ascending in time.
///
/// Arc-only scenarios are solved in both regimes; cap scenarios only in the fuel regime.
pub fn scenario_solve(
    sc: &Scenario,
    xi: AgentState,
    xj: AgentState,
    xk: AgentState,
    beta: f64,
) -> Result<Vec<Candidate>> {
    let xs = [xi, xj, xk];
    let degenerate = Error::DegenerateScenario { scenario: sc.id };
    let mut out = Vec::new();

    if let Some(c) = (0..3).find(|&a| sc.seqs[a].cap_sign().is_some()) {
        let kappa = sc.seqs[c].cap_sign().unwrap();
        let v = xs[c].vel + kappa * beta;
        let others: Vec<usize> = (0..3).filter(|&a| a != c).collect();
        let (p, q) = (others[0], others[1]);
        let sp = sc.seqs[p].arc_sign().ok_or(degenerate.clone())?;
        let sq = sc.seqs[q].arc_sign().ok_or(degenerate.clone())?;
        let (xp, xq) = (xs[p], xs[q]);
        let dx = xp.pos - xq.pos;
        let dv = xp.vel - xq.vel;
        let t = if sp == sq {
            if dv == 0.0 {
                return Err(degenerate);
            }
            let c0 = (xp.vel + xq.vel) / 2.0 - 2.0 * sp * dx / dv;
            -sp * (v - c0)
        } else {
            let a = dv / 2.0 + sp * beta;
            if a == 0.0 {
                return Err(degenerate);
            }
            let ep = v - xp.vel;
            let eq = v - xq.vel;
            let b = dx - sp * beta * beta / 2.0 - sp * (ep * ep + eq * eq) / 4.0;
            -b / a
        };
        if t.is_finite() && t > 0.0 {
            let x = arc(&xp, sp, v, t, beta);
            out.push(Candidate { t, state: AgentState::new(x, v), regime: Regime::Fuel });
        }
        return Ok(out);
    }

    let sig: Vec<f64> = sc.seqs.iter().map(|s| s.arc_sign().unwrap()).collect();
    let r = (0..3)
        .find(|&a| sig.iter().filter(|&&s| s == sig[a]).count() == 1)
        .ok_or(degenerate.clone())?;
    let pair: Vec<usize> = (0..3).filter(|&a| a != r).collect();
    let (xp, xq, xr) = (xs[pair[0]], xs[pair[1]], xs[r]);
    let sp = sig[pair[0]];
    let s = sig[r];
    let dv = xp.vel - xq.vel;
    if dv == 0.0 {
        return Err(degenerate);
    }
    let c0 = (xp.vel + xq.vel) / 2.0 - 2.0 * sp * (xp.pos - xq.pos) / dv;
    let d_r = c0 - xr.vel;
    let d_p = c0 - xp.vel;
    let dx_rp = xr.pos - xp.pos;
    let dv_rp = xr.vel - xp.vel;
    let sq_sum = (d_r * d_r + d_p * d_p) / 4.0;

    let fuel = (
        -s / 2.0,
        dv_rp / 2.0 + s * beta - (d_r + d_p) / 2.0,
        dx_rp - s * beta * beta / 2.0 - s * sq_sum,
    );
    let time = (0.0, dv_rp / 2.0 - (d_r + d_p) / 2.0, dx_rp - s * sq_sum);

    for (regime, (a2, a1, a0)) in [(Regime::Fuel, fuel), (Regime::Time, time)] {
        for t in roots(a2, a1, a0) {
            if !(t.is_finite() && t > 0.0) {
                continue;
            }
            let v = c0 - sp * t;
            let m = match regime {
                Regime::Fuel => beta,
                Regime::Time => t,
            };
            let x = arc(&xp, sp, v, t, m);
            out.push(Candidate { t, state: AgentState::new(x, v), regime });
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(out)
}

/// Switch times for a boundary point reached with `seq`.
/// For s2/s4 the literal cap formulas are used (`t1 = 0`).
pub fn recover_switchings(
    x0: AgentState,
    xbar: AgentState,
    tf: f64,
    seq: Sequence,
    beta: f64,
) -> Result<(f64, f64)> {
    let w = xbar.vel - x0.vel;
    match seq {
        Sequence::S1 => Ok(((w + beta) / 2.0, (w - beta + 2.0 * tf) / 2.0)),
        Sequence::S3 => Ok(((-w + beta) / 2.0, (-w - beta + 2.0 * tf) / 2.0)),
        Sequence::S2 | Sequence::S4 => {
            let y = xbar.pos - x0.pos - tf * x0.vel;
            let rad = if seq == Sequence::S2 { y } else { -y };
            if rad < -eps_g(xbar.scale().max(x0.scale())) {
                return Err(Error::NegativeRadicand { value: rad });
            }
            Ok((0.0, tf - (2.0 * rad.max(0.0)).sqrt()))
        }
    }
}

/// Hard ceiling on bracket growth, relative to the problem scale.
const HORIZON_FACTOR: f64 = 1e12;

/// Least `t ≥ t_lo` at which all attainable sets share a point, with the deepest common point.
pub fn min_common_time(agents: &[AgentState], beta: f64, t_lo: f64) -> Result<(f64, AgentState)> {
    let scale = 1.0 + agents.iter().map(|a| a.scale()).fold(beta, f64::max);
    let cap = HORIZON_FACTOR * scale;
    let probe = |t: f64| max_overlap(&specs_at(agents, beta, t)).filter(|o| o.gap >= 0.0);

    let mut lo = t_lo.max(0.0);
    if let Some(o) = probe(lo) {
        return Ok((lo, o.point));
    }
    let mut hi = (2.0 * lo).max(1.0);
    while probe(hi).is_none() {
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            return Err(Error::Unreachable { horizon: cap });
        }
    }
    for _ in 0..400 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if probe(mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let o = probe(hi).expect("bracket upper end intersects");
    Ok((hi, o.point))
}

pub fn pair_min_time(a: AgentState, b: AgentState, beta: f64) -> Result<(f64, AgentState)> {
    let gap = (a.vel - b.vel).abs();
    if gap > 2.0 * beta {
        return Err(Error::PairInfeasible { gap, limit: 2.0 * beta });
    }
    if a == b {
        return Ok((0.0, a));
    }
    min_common_time(&[a, b], beta, 0.0)
}

fn plans_for(xs: &[AgentState; 3], t: f64, x: AgentState, beta: f64) -> Result<[SwitchPlan; 3]> {
    let mut plans = [SwitchPlan::idle(t); 3];
    for (p, x0) in plans.iter_mut().zip(xs) {
        *p = synthesize(*x0, x, t, beta)?.plan;
    }
    Ok(plans)
}

fn candidate_valid(sc: &Scenario, xs: &[AgentState; 3], c: &Candidate, beta: f64) -> bool {
    let t = c.t;
    let tol_t = EPS_T * (1.0 + t);
    let slack = eps_g(c.state.scale().max(t));
    match c.regime {
        Regime::Fuel if t < beta - tol_t => return false,
        Regime::Time if t > beta + tol_t => return false,
        _ => {}
    }
    let m = beta.min(t);
    for (x0, &seq) in xs.iter().zip(&sc.seqs) {
        let w = c.state.vel - x0.vel;
        if w.abs() > m + slack {
            return false;
        }
        match seq {
            Sequence::S1 | Sequence::S3 => {
                let Ok((t1, t2)) = recover_switchings(*x0, c.state, t, seq, m) else {
                    return false;
                };
                if t1 < -tol_t || t2 < t1 - tol_t || t2 > t + tol_t || t1 + t - t2 > beta + slack {
                    return false;
                }
            }
            Sequence::S2 | Sequence::S4 => {
                let kappa = seq.cap_sign().unwrap();
                let y = kappa * (c.state.pos - x0.pos - x0.vel * t);
                if y < m * m / 2.0 - slack || y > m * t - m * m / 2.0 + slack {
                    return false;
                }
            }
        }
        if !contains(&ReachSpec { x0: *x0, beta, tf: t }, &c.state).inside {
            return false;
        }
    }
    true
}

/// Least-time valid scenario point, ties to the lowest scenario id.
fn best_scenario(xs: &[AgentState; 3], beta: f64) -> Option<(Scenario, Candidate)> {
    let mut best: Option<(Scenario, Candidate)> = None;
    for sc in &SCENARIOS {
        let Ok(cands) = scenario_solve(sc, xs[0], xs[1], xs[2], beta) else {
            continue;
        };
        for c in cands {
            if candidate_valid(sc, xs, &c, beta) && best.is_none_or(|(_, b)| c.t < b.t) {
                best = Some((*sc, c));
            }
        }
    }
    best
}

pub fn solve_triplet(xi: AgentState, xj: AgentState, xk: AgentState, beta: f64) -> Result<TripletSolution> {
    let xs = [xi, xj, xk];
    let vmax = xs.iter().map(|a| a.vel).fold(f64::NEG_INFINITY, f64::max);
    let vmin = xs.iter().map(|a| a.vel).fold(f64::INFINITY, f64::min);
    if vmax - vmin > 2.0 * beta {
        return Err(Error::TripletInfeasible { spread: vmax - vmin, limit: 2.0 * beta });
    }

    let mut unique: Vec<AgentState> = Vec::with_capacity(3);
    for x in xs {
        if !unique.contains(&x) {
            unique.push(x);
        }
    }
    if unique.len() == 1 {
        return Ok(TripletSolution {
            t_star: 0.0,
            x_star: xi,
            scenario: None,
            case: TripletCase::Coincident,
            plans: [SwitchPlan::idle(0.0); 3],
        });
    }
    if unique.len() == 2 {
        let (t, x) = pair_min_time(unique[0], unique[1], beta)?;
        let p = xs.iter().position(|a| *a == unique[0]).unwrap();
        let q = xs.iter().position(|a| *a == unique[1]).unwrap();
        return Ok(TripletSolution {
            t_star: t,
            x_star: x,
            scenario: None,
            case: TripletCase::PairContact(p.min(q), p.max(q)),
            plans: plans_for(&xs, t, x, beta)?,
        });
    }

    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut latest: Option<(usize, usize, f64, AgentState)> = None;
    for &(p, q) in &pairs {
        let (t, x) = pair_min_time(xs[p], xs[q], beta)?;
        if latest.is_none_or(|l| t > l.2) {
            latest = Some((p, q, t, x));
        }
    }
    let (p, q, t_pq, x_pq) = latest.unwrap();
    let r = 3 - p - q;
    if contains(&ReachSpec { x0: xs[r], beta, tf: t_pq }, &x_pq).inside {
        return Ok(TripletSolution {
            t_star: t_pq,
            x_star: x_pq,
            scenario: None,
            case: TripletCase::PairContact(p, q),
            plans: plans_for(&xs, t_pq, x_pq, beta)?,
        });
    }

    if let Some((sc, c)) = best_scenario(&xs, beta) {
        let delta = 1e-7 * (1.0 + c.t);
        let earlier = c.t - delta;
        if earlier <= t_pq || !intersect(&specs_at(&xs, beta, earlier)) {
            return Ok(TripletSolution {
                t_star: c.t,
                x_star: c.state,
                scenario: Some(sc),
                case: TripletCase::Scenario(sc.id),
                plans: plans_for(&xs, c.t, c.state, beta)?,
            });
        }
    }

    let (t, x) = min_common_time(&xs, beta, t_pq)?;
    Ok(TripletSolution {
        t_star: t,
        x_star: x,
        scenario: None,
        case: TripletCase::Numeric,
        plans: plans_for(&xs, t, x, beta)?,
    })
}
