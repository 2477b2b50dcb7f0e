//! Fleet input files and solve reports (JSON, schema version "1").

use serde::{Deserialize, Serialize};

use crate::consensus::{ConsensusResult, Fleet};
use crate::dynamics::{AgentState, Polarity, SwitchPlan};
use crate::error::{Error, Result};
use crate::synthesis::RendezvousReport;
use crate::triplet::{plan_tag, TripletCase};

pub const SCHEMA_VERSION: &str = "1";

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Locale-independent text for a number rounded to 12 significant digits.
pub fn fmt12(x: f64) -> String {
    format!("{}", round12(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub id: u64,
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetFile {
    pub schema_version: String,
    pub beta: f64,
    pub agents: Vec<AgentEntry>,
}

impl FleetFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: FleetFile = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("fleet file: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version: expected \"{SCHEMA_VERSION}\", got \"{}\"", self.schema_version));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return bad(format!("beta: must be finite and >= 0, got {}", self.beta));
        }
        if self.agents.is_empty() {
            return bad("agents: at least one agent required".into());
        }
        for (i, a) in self.agents.iter().enumerate() {
            if !a.x.is_finite() || !a.v.is_finite() {
                return bad(format!("agents[{i}]: x and v must be finite"));
            }
            if self.agents[..i].iter().any(|b| b.id == a.id) {
                return bad(format!("agents[{i}].id: duplicate id {}", a.id));
            }
        }
        Ok(())
    }

    pub fn from_fleet(f: &Fleet) -> Self {
        FleetFile {
            schema_version: SCHEMA_VERSION.into(),
            beta: f.beta,
            agents: f
                .agents
                .iter()
                .enumerate()
                .map(|(i, a)| AgentEntry { id: i as u64 + 1, x: a.pos, v: a.vel })
                .collect(),
        }
    }

    pub fn fleet(&self) -> Result<Fleet> {
        Fleet::new(self.agents.iter().map(|a| AgentState::new(a.x, a.v)).collect(), self.beta)
    }

    pub fn ids(&self) -> Vec<u64> {
        self.agents.iter().map(|a| a.id).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fleet serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub x: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEntry {
    pub v_lo: f64,
    pub v_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentReport {
    pub id: u64,
    pub sequence: String,
    pub gamma: i8,
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub tf: f64,
    pub beta_eff: f64,
    pub fuel_used: f64,
    pub on_boundary: bool,
    pub terminal_error: f64,
}

impl AgentReport {
    pub fn plan(&self) -> Result<SwitchPlan> {
        let gamma = Polarity::from_int(self.gamma.into())
            .ok_or_else(|| Error::InvalidInput(format!("agent {}: gamma must be +1 or -1", self.id)))?;
        SwitchPlan::with_coast(gamma, self.t0, self.t1, self.t2, self.tf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub solve_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: String,
    pub feasible: bool,
    pub beta: f64,
    pub band: BandEntry,
    /// (v_max − v_min) − 2β when infeasible.
    pub infeasibility_margin: Option<f64>,
    pub t_star: Option<f64>,
    pub x_star: Option<StateEntry>,
    pub critical_triplet: Option<[u64; 3]>,
    pub case: Option<String>,
    pub triplets_evaluated: usize,
    pub verified: Option<bool>,
    pub max_terminal_error: Option<f64>,
    pub per_agent: Vec<AgentReport>,
    pub timing: Timing,
}

fn case_label(c: &TripletCase, ids: &[u64; 3]) -> String {
    match c {
        TripletCase::Coincident => "coincident".into(),
        TripletCase::PairContact(p, q) => format!("pair {} {}", ids[*p], ids[*q]),
        TripletCase::Scenario(id) => format!("scenario {id}"),
        TripletCase::Numeric => "numeric".into(),
    }
}

impl ReportFile {
    /// Builds a report; every number is rounded to 12 significant digits.
    pub fn build(
        fleet: &Fleet,
        ids: &[u64],
        result: &ConsensusResult,
        check: Option<&RendezvousReport>,
        solve_ms: f64,
    ) -> Self {
        let r = round12;
        let vmax = fleet.agents.iter().map(|a| a.vel).fold(f64::NEG_INFINITY, f64::max);
        let vmin = fleet.agents.iter().map(|a| a.vel).fold(f64::INFINITY, f64::min);
        let mut rep = ReportFile {
            schema_version: SCHEMA_VERSION.into(),
            feasible: result.feasible,
            beta: r(fleet.beta),
            band: BandEntry { v_lo: r(result.band.v_lo), v_hi: r(result.band.v_hi) },
            infeasibility_margin: (!result.feasible).then(|| r(vmax - vmin - 2.0 * fleet.beta)),
            t_star: None,
            x_star: None,
            critical_triplet: None,
            case: None,
            triplets_evaluated: result.triplets_evaluated,
            verified: check.map(|c| c.pass),
            max_terminal_error: check.map(|c| r(c.max_terminal_error)),
            per_agent: vec![],
            timing: Timing { solve_ms: r(solve_ms) },
        };
        if let Some(rv) = &result.rendezvous {
            rep.t_star = Some(r(rv.t_star));
            rep.x_star = Some(StateEntry { x: r(rv.x_star.pos), v: r(rv.x_star.vel) });
            let tri = rv.critical_triplet.map(|t| t.map(|i| ids[i - 1]));
            rep.critical_triplet = tri;
            rep.case = rv.case.as_ref().map(|c| match (c, tri) {
                (TripletCase::PairContact(..), None) => "pair".to_string(),
                (_, Some(t)) => case_label(c, &t),
                (c, None) => case_label(c, &[0; 3]),
            });
            rep.per_agent = rv
                .per_agent
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let p = &c.plan;
                    let err = check.and_then(|k| k.agents.get(i)).map_or(f64::NAN, |a| a.terminal_error);
                    AgentReport {
                        id: ids[i],
                        sequence: plan_tag(p),
                        gamma: p.gamma.as_int(),
                        t0: r(p.t0),
                        t1: r(p.t1),
                        t2: r(p.t2),
                        tf: r(p.tf),
                        beta_eff: r(c.beta_eff),
                        fuel_used: r(p.fuel()),
                        on_boundary: c.on_boundary,
                        terminal_error: if err.is_finite() { r(err) } else { 0.0 },
                    }
                })
                .collect();
        }
        rep
    }

    pub fn parse(text: &str) -> Result<Self> {
        let rep: ReportFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report file: {e}")))?;
        if rep.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "report schema_version: expected \"{SCHEMA_VERSION}\", got \"{}\"",
                rep.schema_version
            )));
        }
        Ok(rep)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(3196.965555251234), 3196.96555525);
        assert_eq!(fmt12(0.1 + 0.2), "0.3");
        assert_eq!(fmt12(-1.0e-20), "-0.00000000000000000001");
        assert_eq!(fmt12(1234.5), "1234.5");
    }

    #[test]
    fn fleet_missing_beta() {
        let e = FleetFile::parse(r#"{"schema_version":"1","agents":[{"id":1,"x":0,"v":0}]}"#).unwrap_err();
        assert!(e.to_string().contains("beta"), "{e}");
    }

    #[test]
    fn fleet_duplicate_id() {
        let e = FleetFile::parse(
            r#"{"schema_version":"1","beta":1,"agents":[{"id":1,"x":0,"v":0},{"id":1,"x":1,"v":0}]}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("duplicate"), "{e}");
    }
}
