//! N-agent consensus as the latest of all triplet consensus times.

use crate::attainable::{consensus_band, feasible, is_member, margin, ReachSpec, VelocityBand};
use crate::dynamics::AgentState;
use crate::error::{Error, Result};
use crate::synthesis::{synthesize, SynthesizedControl};
use crate::triplet::{pair_min_time, solve_triplet, TripletCase};

#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    /// Agent `i` has id `i + 1`.
    pub agents: Vec<AgentState>,
    pub beta: f64,
}

impl Fleet {
    pub fn new(agents: Vec<AgentState>, beta: f64) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::InvalidInput("fleet has no agents".into()));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::InvalidInput(format!("beta must be finite and >= 0, got {beta}")));
        }
        if let Some(i) = agents.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidInput(format!("agent {} has a non-finite state", i + 1)));
        }
        Ok(Self { agents, beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveOptions {
    /// Enumerate only agents on the convex hull of the initial states.
    pub hull_prune: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rendezvous {
    pub t_star: f64,
    pub x_star: AgentState,
    /// 1-based ids of the arg-max triplet; `None` for fewer than three distinct agents.
    pub critical_triplet: Option<[usize; 3]>,
    pub case: Option<TripletCase>,
    pub per_agent: Vec<SynthesizedControl>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusResult {
    pub feasible: bool,
    pub band: VelocityBand,
    /// Present iff `feasible`.
    pub rendezvous: Option<Rendezvous>,
    pub triplets_evaluated: usize,
}

impl ConsensusResult {
    pub fn t_star(&self) -> Option<f64> {
        self.rendezvous.as_ref().map(|r| r.t_star)
    }

    pub fn x_star(&self) -> Option<AgentState> {
        self.rendezvous.as_ref().map(|r| r.x_star)
    }
}

fn cross(o: AgentState, a: AgentState, b: AgentState) -> f64 {
    (a.pos - o.pos) * (b.vel - o.vel) - (a.vel - o.vel) * (b.pos - o.pos)
}

/// 1-based ids of agents on the boundary of the convex hull of the initial states.
/// Points on hull edges, collinear ones included, are kept.
pub fn hull_filter(agents: &[AgentState]) -> Vec<usize> {
    let n = agents.len();
    if n <= 3 {
        return (1..=n).collect();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        agents[a]
            .pos
            .total_cmp(&agents[b].pos)
            .then(agents[a].vel.total_cmp(&agents[b].vel))
    });
    order.dedup_by(|a, b| agents[*a] == agents[*b]);

    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for pass in 0..2 {
        let start = hull.len();
        let it: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev())
        };
        for &i in it {
            while hull.len() >= start + 2
                && cross(agents[hull[hull.len() - 2]], agents[hull[hull.len() - 1]], agents[i]) <= 0.0
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    if hull.is_empty() {
        hull.push(order[0]);
    }

    let m = hull.len();
    let on_boundary = |p: AgentState| -> bool {
        if m == 1 {
            return p == agents[hull[0]];
        }
        (0..m).any(|e| {
            let a = agents[hull[e]];
            let b = agents[hull[(e + 1) % m]];
            cross(a, b, p) == 0.0
                && p.pos >= a.pos.min(b.pos)
                && p.pos <= a.pos.max(b.pos)
                && p.vel >= a.vel.min(b.vel)
                && p.vel <= a.vel.max(b.vel)
        })
    };
    (0..n).filter(|&i| on_boundary(agents[i])).map(|i| i + 1).collect()
}

fn binomial3(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Lexicographic triplets of `1..=n` dealt round-robin; worker `agent_id` gets its share.
pub fn partition_triplets(n: usize, agent_id: usize, workers: usize) -> Vec<[usize; 3]> {
    assert!(workers >= 1 && (1..=workers).contains(&agent_id), "need 1 <= agent_id <= workers");
    let mut out = Vec::with_capacity(binomial3(n).div_ceil(workers));
    let mut idx = 0usize;
    for i in 1..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                if idx % workers == agent_id - 1 {
                    out.push([i, j, k]);
                }
                idx += 1;
            }
        }
    }
    out
}

/// Larger time wins; equal times go to the lexicographically smaller triplet.
fn better(t: f64, tri: [usize; 3], than: &Option<(f64, [usize; 3], Best)>) -> bool {
    match than {
        None => true,
        Some((bt, btri, _)) => t > *bt || (t == *bt && tri < *btri),
    }
}

#[derive(Debug, Clone, Copy)]
struct Best {
    x: AgentState,
    case: TripletCase,
}

/// Indices (0-based) of distinct states, optionally restricted to the hull.
fn candidates(f: &Fleet, opts: SolveOptions) -> Vec<usize> {
    let mut unique: Vec<usize> = Vec::with_capacity(f.agents.len());
    for (i, a) in f.agents.iter().enumerate() {
        if !unique.iter().any(|&u| f.agents[u] == *a) {
            unique.push(i);
        }
    }
    if opts.hull_prune && unique.len() > 3 {
        let pts: Vec<AgentState> = unique.iter().map(|&i| f.agents[i]).collect();
        let kept: Vec<usize> = hull_filter(&pts).into_iter().map(|id| unique[id - 1]).collect();
        if kept.len() >= 3 {
            return kept;
        }
    }
    unique
}

type Outcome = (Option<(f64, [usize; 3], Best)>, usize, Option<([usize; 3], Error)>);

/// Solves the listed triplets (positions into `cand`), keeping the best and the first failure.
fn solve_triplets(f: &Fleet, cand: &[usize], tris: &[[usize; 3]]) -> Outcome {
    let mut best = None;
    let mut count = 0;
    for &[a, b, c] in tris {
        let ids = [cand[a - 1] + 1, cand[b - 1] + 1, cand[c - 1] + 1];
        count += 1;
        match solve_triplet(f.agents[ids[0] - 1], f.agents[ids[1] - 1], f.agents[ids[2] - 1], f.beta) {
            Ok(s) => {
                if better(s.t_star, ids, &best) {
                    best = Some((s.t_star, ids, Best { x: s.x_star, case: s.case }));
                }
            }
            Err(e) => return (best, count, Some((ids, e))),
        }
    }
    (best, count, None)
}

fn infeasible(f: &Fleet) -> ConsensusResult {
    ConsensusResult {
        feasible: false,
        band: consensus_band(&f.agents, f.beta),
        rendezvous: None,
        triplets_evaluated: 0,
    }
}

/// Helly check over the whole fleet, then per-agent synthesis.
fn finish(
    f: &Fleet,
    t: f64,
    x: AgentState,
    critical: Option<[usize; 3]>,
    case: Option<TripletCase>,
    count: usize,
) -> Result<ConsensusResult> {
    for (i, a) in f.agents.iter().enumerate() {
        let r = ReachSpec { x0: *a, beta: f.beta, tf: t };
        if !is_member(&r, &x) {
            return Err(Error::NoCommonPoint { agent: i + 1, margin: margin(&r, &x) });
        }
    }
    let mut per_agent = Vec::with_capacity(f.agents.len());
    for (i, a) in f.agents.iter().enumerate() {
        let mut c = synthesize(*a, x, t, f.beta)?;
        c.agent_id = i + 1;
        per_agent.push(c);
    }
    Ok(ConsensusResult {
        feasible: true,
        band: consensus_band(&f.agents, f.beta),
        rendezvous: Some(Rendezvous { t_star: t, x_star: x, critical_triplet: critical, case, per_agent }),
        triplets_evaluated: count,
    })
}

/// Handles fleets with fewer than three distinct states.
fn small(f: &Fleet, cand: &[usize]) -> Option<Result<ConsensusResult>> {
    match cand.len() {
        1 => Some(finish(f, 0.0, f.agents[cand[0]], None, Some(TripletCase::Coincident), 0)),
        2 => Some(
            pair_min_time(f.agents[cand[0]], f.agents[cand[1]], f.beta)
                .and_then(|(t, x)| finish(f, t, x, None, Some(TripletCase::PairContact(0, 1)), 0)),
        ),
        _ => None,
    }
}

pub fn solve_fleet(f: &Fleet, opts: SolveOptions) -> Result<ConsensusResult> {
    if !feasible(&f.agents, f.beta) {
        return Ok(infeasible(f));
    }
    let cand = candidates(f, opts);
    if let Some(r) = small(f, &cand) {
        return r;
    }
    let n = cand.len();
    let all: Vec<[usize; 3]> = partition_triplets(n, 1, 1);
    let (best, count, err) = solve_triplets(f, &cand, &all);
    if let Some((_, e)) = err {
        return Err(e);
    }
    let (t, tri, b) = best.expect("at least one triplet");
    finish(f, t, b.x, Some(tri), Some(b.case), count)
}

/// Same result as [`solve_fleet`], with the triplets dealt to `workers` threads.
pub fn solve_fleet_distributed(f: &Fleet, opts: SolveOptions, workers: usize) -> Result<ConsensusResult> {
    if !feasible(&f.agents, f.beta) {
        return Ok(infeasible(f));
    }
    let cand = candidates(f, opts);
    if let Some(r) = small(f, &cand) {
        return r;
    }
    let n = cand.len();
    let workers = workers.clamp(1, n);
    let outcomes: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = (1..=workers)
            .map(|w| {
                let cand = &cand;
                s.spawn(move || solve_triplets(f, cand, &partition_triplets(n, w, workers)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut best = None;
    let mut count = 0;
    let mut first_err: Option<([usize; 3], Error)> = None;
    for (b, c, e) in outcomes {
        count += c;
        if let Some((tri, e)) = e {
            if first_err.as_ref().is_none_or(|(t0, _)| tri < *t0) {
                first_err = Some((tri, e));
            }
        }
        if let Some((t, tri, x)) = b {
            if better(t, tri, &best) {
                best = Some((t, tri, x));
            }
        }
    }
    if let Some((_, e)) = first_err {
        return Err(e);
    }
    let (t, tri, b) = best.expect("at least one triplet");
    finish(f, t, b.x, Some(tri), Some(b.case), count)
}
