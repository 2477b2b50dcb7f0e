use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use fuelcon::io::{fmt12, FleetFile, ReportFile};
use fuelcon::synthesis::SynthesizedControl;
use fuelcon::tol::verify_tol_at;
use fuelcon::{
    boundary_polyline, consensus_band, feasible, sample_trajectory, solve_fleet, solve_fleet_distributed,
    verify_rendezvous, AgentState, ConsensusResult, Error, Fleet, ReachSpec, Rendezvous, SolveOptions,
};

const EXIT_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_INCONSISTENT: u8 = 3;

/// Minimum-time consensus for fuel-budgeted double-integrator fleets.
///
/// Set FUELCON_EPS to override the geometric slack factor (default 1e-6).
#[derive(Parser)]
#[command(name = "fuelcon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the consensus velocity band, or the infeasibility margin.
    Feasibility { fleet: PathBuf },
    /// Solve for the consensus time and point and synthesize every agent's control.
    Solve {
        fleet: PathBuf,
        /// Enumerate only agents on the convex hull of the initial states.
        #[arg(long)]
        hull_prune: bool,
        /// Number of worker threads.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit the boundary of one attainable set as a closed CSV polyline.
    Boundary {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        v: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        tf: f64,
        /// Velocity stations per arc.
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one trajectory CSV (t, x, v, u) per agent.
    Simulate {
        fleet: PathBuf,
        report: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Re-simulate a report's plans against the fleet.
    Verify { fleet: PathBuf, report: PathBuf },
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, msg: msg.into() }
    }

    fn inconsistent(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_INCONSISTENT, msg: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::VelocityOutOfBand { .. } => EXIT_INPUT,
            Error::PairInfeasible { .. } | Error::TripletInfeasible { .. } | Error::Unreachable { .. } => {
                EXIT_INFEASIBLE
            }
            _ => EXIT_INCONSISTENT,
        };
        Failure { code, msg: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_fleet(path: &Path) -> Result<(FleetFile, Fleet), Failure> {
    let file = FleetFile::parse(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let fleet = file.fleet()?;
    Ok((file, fleet))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("stdout: {e}"))),
    }
}

fn cmd_feasibility(path: &Path) -> CmdResult {
    let (_, fleet) = load_fleet(path)?;
    let band = consensus_band(&fleet.agents, fleet.beta);
    if feasible(&fleet.agents, fleet.beta) {
        println!("feasible: consensus velocity band [{}, {}]", fmt12(band.v_lo), fmt12(band.v_hi));
        Ok(0)
    } else {
        println!("infeasible: velocity spread exceeds 2*beta by {}", fmt12(band.v_lo - band.v_hi));
        Ok(EXIT_INFEASIBLE)
    }
}

fn cmd_solve(path: &Path, hull_prune: bool, workers: usize, output: Option<&Path>) -> CmdResult {
    if workers == 0 {
        return Err(Failure::input("--workers must be at least 1"));
    }
    let (file, fleet) = load_fleet(path)?;
    let opts = SolveOptions { hull_prune };
    let start = Instant::now();
    let result = if workers > 1 {
        solve_fleet_distributed(&fleet, opts, workers)?
    } else {
        solve_fleet(&fleet, opts)?
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let check = result.feasible.then(|| verify_rendezvous(&fleet, &result));
    let report = ReportFile::build(&fleet, &file.ids(), &result, check.as_ref(), ms);
    emit(output, &(report.to_json() + "\n"))?;
    if !result.feasible {
        eprintln!("infeasible: velocity spread exceeds 2*beta");
        return Ok(EXIT_INFEASIBLE);
    }
    match check {
        Some(c) if !c.pass => {
            for a in c.agents.iter().filter(|a| !a.pass) {
                eprintln!(
                    "agent {}: terminal error {}, fuel {}, ordering margin {}",
                    file.ids()[a.agent_id - 1],
                    a.terminal_error,
                    a.fuel_used,
                    a.ordering_margin
                );
            }
            Err(Failure::inconsistent("synthesized plans do not reach the consensus point"))
        }
        _ => Ok(0),
    }
}

fn cmd_boundary(x: f64, v: f64, beta: f64, tf: f64, n: usize, out: Option<&Path>) -> CmdResult {
    if n < 8 {
        return Err(Failure::input("--n must be at least 8"));
    }
    let spec = ReachSpec::new(AgentState::new(x, v), beta, tf)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Failure::input(e.to_string());
    w.write_record(["x", "v"]).map_err(io_err)?;
    for p in boundary_polyline(&spec, n) {
        w.write_record([fmt12(p.pos), fmt12(p.vel)]).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::input(e.to_string()))?;
    emit(out, &String::from_utf8(bytes).expect("ascii csv"))?;
    Ok(0)
}

/// Loads a fleet and a report and checks they describe the same agents.
fn load_pair(fleet: &Path, report: &Path) -> Result<(FleetFile, Fleet, ReportFile), Failure> {
    let (file, fleet) = load_fleet(fleet)?;
    let rep = ReportFile::parse(&read(report)?).map_err(|e| Failure::input(format!("{}: {e}", report.display())))?;
    if !rep.feasible {
        return Err(Failure { code: EXIT_INFEASIBLE, msg: "report marks the fleet infeasible".into() });
    }
    let ids: Vec<u64> = rep.per_agent.iter().map(|a| a.id).collect();
    if ids != file.ids() {
        return Err(Failure::input(format!("report agents {ids:?} do not match fleet agents {:?}", file.ids())));
    }
    if rep.t_star.is_none() || rep.x_star.is_none() {
        return Err(Failure::input("report lacks t_star or x_star"));
    }
    Ok((file, fleet, rep))
}

fn cmd_simulate(fleet: &Path, report: &Path, samples: usize, out_dir: &Path) -> CmdResult {
    let (_, fleet, rep) = load_pair(fleet, report)?;
    if samples < 2 {
        return Err(Failure::input("--samples must be at least 2"));
    }
    let xs = rep.x_star.unwrap();
    let target = AgentState::new(xs.x, xs.v);
    fs::create_dir_all(out_dir).map_err(|e| Failure::input(format!("{}: {e}", out_dir.display())))?;
    let mut worst = 0.0f64;
    for (x0, a) in fleet.agents.iter().zip(&rep.per_agent) {
        let plan = a.plan()?;
        let tr = sample_trajectory(*x0, &plan, samples);
        let path = out_dir.join(format!("agent_{}.csv", a.id));
        let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        let io_err = |e: csv::Error| Failure::input(e.to_string());
        w.write_record(["t", "x", "v", "u"]).map_err(io_err)?;
        for (t, s) in &tr.samples {
            w.write_record([fmt12(*t), fmt12(s.pos), fmt12(s.vel), fmt12(plan.level_at(*t))]).map_err(io_err)?;
        }
        w.flush().map_err(|e| Failure::input(e.to_string()))?;
        let end = tr.samples.last().unwrap().1;
        worst = worst.max(end.dist(&target));
        println!("{}", path.display());
    }
    if worst > verify_tol_at(target.scale(), rep.t_star.unwrap_or(0.0)) {
        return Err(Failure::inconsistent(format!("terminal rows miss x_star by {worst}")));
    }
    Ok(0)
}

fn cmd_verify(fleet: &Path, report: &Path) -> CmdResult {
    let (file, fleet, rep) = load_pair(fleet, report)?;
    let xs = rep.x_star.unwrap();
    let mut per_agent = Vec::with_capacity(rep.per_agent.len());
    for (i, a) in rep.per_agent.iter().enumerate() {
        per_agent.push(SynthesizedControl {
            agent_id: i + 1,
            plan: a.plan()?,
            beta_eff: a.beta_eff,
            on_boundary: a.on_boundary,
        });
    }
    let result = ConsensusResult {
        feasible: true,
        band: consensus_band(&fleet.agents, fleet.beta),
        rendezvous: Some(Rendezvous {
            t_star: rep.t_star.unwrap(),
            x_star: AgentState::new(xs.x, xs.v),
            critical_triplet: None,
            case: None,
            per_agent,
        }),
        triplets_evaluated: rep.triplets_evaluated,
    };
    let check = verify_rendezvous(&fleet, &result);
    println!("id,terminal_error,fuel_used,fuel_margin,pass");
    for a in &check.agents {
        println!(
            "{},{},{},{},{}",
            file.ids()[a.agent_id - 1],
            fmt12(a.terminal_error),
            fmt12(a.fuel_used),
            fmt12(a.fuel_margin),
            a.pass
        );
    }
    if check.pass {
        println!("pass: max terminal error {}", fmt12(check.max_terminal_error));
        Ok(0)
    } else {
        Err(Failure::inconsistent(format!("fail: max terminal error {}", fmt12(check.max_terminal_error))))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match &cli.command {
        Command::Feasibility { fleet } => cmd_feasibility(fleet),
        Command::Solve { fleet, hull_prune, workers, output } => {
            cmd_solve(fleet, *hull_prune, *workers, output.as_deref())
        }
        Command::Boundary { x, v, beta, tf, n, out } => cmd_boundary(*x, *v, *beta, *tf, *n, out.as_deref()),
        Command::Simulate { fleet, report, samples, out_dir } => cmd_simulate(fleet, report, *samples, out_dir),
        Command::Verify { fleet, report } => cmd_verify(fleet, report),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
