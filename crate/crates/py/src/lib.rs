//! Python bindings: `import pyfuelcon`.

use fuelcon as core;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::InvalidInput(_) | core::Error::VelocityOutOfBand { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pyclass(name = "AgentState", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct AgentState(core::AgentState);

#[pymethods]
impl AgentState {
    #[new]
    fn new(pos: f64, vel: f64) -> Self {
        AgentState(core::AgentState::new(pos, vel))
    }

    #[getter]
    fn pos(&self) -> f64 {
        self.0.pos
    }

    #[getter]
    fn vel(&self) -> f64 {
        self.0.vel
    }

    fn __repr__(&self) -> String {
        format!("AgentState(pos={}, vel={})", self.0.pos, self.0.vel)
    }
}

#[pyclass(name = "SwitchPlan", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct SwitchPlan(core::SwitchPlan);

#[pymethods]
impl SwitchPlan {
    #[new]
    #[pyo3(signature = (gamma, t1, t2, tf, t0 = 0.0))]
    fn new(gamma: i64, t1: f64, t2: f64, tf: f64, t0: f64) -> PyResult<Self> {
        let g = core::Polarity::from_int(gamma).ok_or_else(|| PyValueError::new_err("gamma must be +1 or -1"))?;
        core::SwitchPlan::with_coast(g, t0, t1, t2, tf).map(SwitchPlan).map_err(err)
    }

    #[getter]
    fn gamma(&self) -> i8 {
        self.0.gamma.as_int()
    }

    #[getter]
    fn t0(&self) -> f64 {
        self.0.t0
    }

    #[getter]
    fn t1(&self) -> f64 {
        self.0.t1
    }

    #[getter]
    fn t2(&self) -> f64 {
        self.0.t2
    }

    #[getter]
    fn tf(&self) -> f64 {
        self.0.tf
    }

    fn fuel(&self) -> f64 {
        self.0.fuel()
    }

    fn sequence(&self) -> String {
        core::triplet::plan_tag(&self.0)
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!("SwitchPlan(gamma={}, t0={}, t1={}, t2={}, tf={})", p.gamma.as_int(), p.t0, p.t1, p.t2, p.tf)
    }
}

#[pyclass(name = "SynthesizedControl", frozen, get_all, from_py_object)]
#[derive(Clone)]
struct SynthesizedControl {
    agent_id: usize,
    plan: SwitchPlan,
    beta_eff: f64,
    on_boundary: bool,
}

impl From<core::SynthesizedControl> for SynthesizedControl {
    fn from(c: core::SynthesizedControl) -> Self {
        SynthesizedControl { agent_id: c.agent_id, plan: SwitchPlan(c.plan), beta_eff: c.beta_eff, on_boundary: c.on_boundary }
    }
}

#[pyclass(name = "TripletSolution", frozen, get_all)]
struct TripletSolution {
    t_star: f64,
    x_star: AgentState,
    scenario: Option<u8>,
    case: String,
    plans: Vec<SwitchPlan>,
}

#[pyclass(name = "ConsensusResult", frozen, get_all)]
struct ConsensusResult {
    feasible: bool,
    band: (f64, f64),
    t_star: Option<f64>,
    x_star: Option<AgentState>,
    critical_triplet: Option<(usize, usize, usize)>,
    per_agent: Vec<SynthesizedControl>,
    triplets_evaluated: usize,
    verified: Option<bool>,
}

fn states(agents: Vec<(f64, f64)>) -> Vec<core::AgentState> {
    agents.into_iter().map(|(x, v)| core::AgentState::new(x, v)).collect()
}

/// Exact state after input `u` for `dt`.
#[pyfunction]
fn propagate(s: AgentState, u: f64, dt: f64) -> PyResult<AgentState> {
    if dt < 0.0 || u.abs() > 1.0 {
        return Err(PyValueError::new_err("need dt >= 0 and |u| <= 1"));
    }
    Ok(AgentState(core::propagate(s.0, u, dt)))
}

#[pyfunction]
fn apply_plan(x0: AgentState, plan: SwitchPlan) -> AgentState {
    AgentState(core::apply_plan(x0.0, &plan.0))
}

/// Sampled trajectory as a list of (t, x, v, u).
#[pyfunction]
fn sample_trajectory(x0: AgentState, plan: SwitchPlan, n: usize) -> Vec<(f64, f64, f64, f64)> {
    core::sample_trajectory(x0.0, &plan.0, n)
        .samples
        .into_iter()
        .map(|(t, s)| (t, s.pos, s.vel, plan.0.level_at(t)))
        .collect()
}

fn spec(x0: AgentState, beta: f64, tf: f64) -> PyResult<core::ReachSpec> {
    core::ReachSpec::new(x0.0, beta, tf).map_err(err)
}

#[pyfunction]
fn velocity_band(x0: AgentState, beta: f64, tf: f64) -> PyResult<(f64, f64)> {
    let b = core::velocity_band(&spec(x0, beta, tf)?);
    Ok((b.v_lo, b.v_hi))
}

#[pyfunction]
fn slice_extent(x0: AgentState, beta: f64, tf: f64, v: f64) -> PyResult<(f64, f64)> {
    let s = core::slice_extent(&spec(x0, beta, tf)?, v).map_err(err)?;
    Ok((s.x_lo, s.x_hi))
}

/// Membership with an optional witness plan.
#[pyfunction]
fn contains(x0: AgentState, beta: f64, tf: f64, target: AgentState) -> PyResult<(bool, Option<SwitchPlan>)> {
    let c = core::contains(&spec(x0, beta, tf)?, &target.0);
    Ok((c.inside, c.witness.map(SwitchPlan)))
}

#[pyfunction]
#[pyo3(signature = (x0, beta, tf, n = 64))]
fn boundary_polyline(x0: AgentState, beta: f64, tf: f64, n: usize) -> PyResult<Vec<(f64, f64)>> {
    Ok(core::boundary_polyline(&spec(x0, beta, tf)?, n).into_iter().map(|p| (p.pos, p.vel)).collect())
}

#[pyfunction]
fn consensus_band(agents: Vec<(f64, f64)>, beta: f64) -> (f64, f64) {
    let b = core::consensus_band(&states(agents), beta);
    (b.v_lo, b.v_hi)
}

#[pyfunction]
fn feasible(agents: Vec<(f64, f64)>, beta: f64) -> bool {
    core::feasible(&states(agents), beta)
}

#[pyfunction]
fn pair_min_time(a: AgentState, b: AgentState, beta: f64) -> PyResult<(f64, AgentState)> {
    let (t, x) = core::pair_min_time(a.0, b.0, beta).map_err(err)?;
    Ok((t, AgentState(x)))
}

#[pyfunction]
fn solve_triplet(xi: AgentState, xj: AgentState, xk: AgentState, beta: f64) -> PyResult<TripletSolution> {
    let s = core::solve_triplet(xi.0, xj.0, xk.0, beta).map_err(err)?;
    Ok(TripletSolution {
        t_star: s.t_star,
        x_star: AgentState(s.x_star),
        scenario: s.scenario.map(|sc| sc.id),
        case: format!("{:?}", s.case),
        plans: s.plans.iter().copied().map(SwitchPlan).collect(),
    })
}

/// Solves a fleet given as a list of (x, v) pairs.
#[pyfunction]
#[pyo3(signature = (agents, beta, hull_prune = false, workers = 1))]
fn solve_fleet(py: Python<'_>, agents: Vec<(f64, f64)>, beta: f64, hull_prune: bool, workers: usize) -> PyResult<ConsensusResult> {
    let fleet = core::Fleet::new(states(agents), beta).map_err(err)?;
    let opts = core::SolveOptions { hull_prune };
    let res = py
        .detach(|| {
            if workers > 1 {
                core::solve_fleet_distributed(&fleet, opts, workers)
            } else {
                core::solve_fleet(&fleet, opts)
            }
        })
        .map_err(err)?;
    let verified = res.feasible.then(|| core::verify_rendezvous(&fleet, &res).pass);
    let rv = res.rendezvous;
    Ok(ConsensusResult {
        feasible: res.feasible,
        band: (res.band.v_lo, res.band.v_hi),
        t_star: rv.as_ref().map(|r| r.t_star),
        x_star: rv.as_ref().map(|r| AgentState(r.x_star)),
        critical_triplet: rv.as_ref().and_then(|r| r.critical_triplet).map(|t| (t[0], t[1], t[2])),
        per_agent: rv.map(|r| r.per_agent.into_iter().map(Into::into).collect()).unwrap_or_default(),
        triplets_evaluated: res.triplets_evaluated,
        verified,
    })
}

#[pyfunction]
fn synthesize(x0: AgentState, xbar: AgentState, tbar: f64, beta: f64) -> PyResult<SynthesizedControl> {
    core::synthesize(x0.0, xbar.0, tbar, beta).map(Into::into).map_err(err)
}

/// 1-based ids of agents on the convex hull of the initial states.
#[pyfunction]
fn hull_filter(agents: Vec<(f64, f64)>) -> Vec<usize> {
    core::hull_filter(&states(agents))
}

#[pyfunction]
fn partition_triplets(n: usize, agent_id: usize, workers: usize) -> PyResult<Vec<(usize, usize, usize)>> {
    if workers == 0 || agent_id == 0 || agent_id > workers {
        return Err(PyValueError::new_err("need 1 <= agent_id <= workers"));
    }
    Ok(core::partition_triplets(n, agent_id, workers).into_iter().map(|t| (t[0], t[1], t[2])).collect())
}

#[pyfunction]
#[pyo3(signature = (agents, beta, t_step = 0.02, grid_step = 0.05, horizon = 40.0))]
fn oracle_min_consensus(agents: Vec<(f64, f64)>, beta: f64, t_step: f64, grid_step: f64, horizon: f64) -> PyResult<(f64, AgentState)> {
    if agents.is_empty() || t_step <= 0.0 || grid_step <= 0.0 {
        return Err(PyValueError::new_err("need agents and positive steps"));
    }
    let (t, x) = core::oracle_min_consensus(&states(agents), beta, t_step, grid_step, horizon).map_err(err)?;
    Ok((t, AgentState(x)))
}

#[pymodule]
fn pyfuelcon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<AgentState>()?;
    m.add_class::<SwitchPlan>()?;
    m.add_class::<SynthesizedControl>()?;
    m.add_class::<TripletSolution>()?;
    m.add_class::<ConsensusResult>()?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(apply_plan, m)?)?;
    m.add_function(wrap_pyfunction!(sample_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(velocity_band, m)?)?;
    m.add_function(wrap_pyfunction!(slice_extent, m)?)?;
    m.add_function(wrap_pyfunction!(contains, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_polyline, m)?)?;
    m.add_function(wrap_pyfunction!(consensus_band, m)?)?;
    m.add_function(wrap_pyfunction!(feasible, m)?)?;
    m.add_function(wrap_pyfunction!(pair_min_time, m)?)?;
    m.add_function(wrap_pyfunction!(solve_triplet, m)?)?;
    m.add_function(wrap_pyfunction!(solve_fleet, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(hull_filter, m)?)?;
    m.add_function(wrap_pyfunction!(partition_triplets, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_min_consensus, m)?)?;
    Ok(())
}
