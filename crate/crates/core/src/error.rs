use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("velocity {v} outside reachable band [{lo}, {hi}]")]
    VelocityOutOfBand { v: f64, lo: f64, hi: f64 },

    #[error("pair infeasible: velocity gap {gap} exceeds 2*beta = {limit}")]
    PairInfeasible { gap: f64, limit: f64 },

    #[error("triplet infeasible: velocity spread {spread} exceeds 2*beta = {limit}")]
    TripletInfeasible { spread: f64, limit: f64 },

    #[error("scenario {scenario} is degenerate for these initial states")]
    DegenerateScenario { scenario: u8 },

    #[error("negative radicand {value} in cap switching formula")]
    NegativeRadicand { value: f64 },

    #[error("no scenario candidate survived validation")]
    NoScenarioFeasible,

    #[error("attainable sets never intersect (searched up to t = {horizon})")]
    Unreachable { horizon: f64 },

    #[error("agent {agent} does not contain the consensus point (margin {margin})")]
    NoCommonPoint { agent: usize, margin: f64 },

    #[error("control synthesis failed: {0}")]
    SynthesisFailed(String),

    #[error("no consensus found within horizon {horizon}")]
    NoConsensusWithinHorizon { horizon: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
