#![allow(dead_code)]

use fuelcon::{AgentState, Fleet};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn state(x: f64, v: f64) -> AgentState {
    AgentState::new(x, v)
}

/// The six-agent fleet with β = 50.
pub fn six_agent_fleet() -> Fleet {
    let agents = [(0.0, 0.0), (40.0, 64.0), (-500.0, 8.0), (-100.0, 10.0), (600.0, 30.0), (2900.0, 10.0)]
        .iter()
        .map(|&(x, v)| state(x, v))
        .collect();
    Fleet::new(agents, 50.0).unwrap()
}

/// Random fleet of `n` agents satisfying the velocity-spread condition.
pub fn random_feasible_fleet(r: &mut impl Rng, n: usize, pos: f64, vel: f64, beta: (f64, f64)) -> Fleet {
    loop {
        let b = r.random_range(beta.0..beta.1);
        let agents: Vec<AgentState> = (0..n)
            .map(|_| state(r.random_range(-pos..pos), r.random_range(-vel..vel)))
            .collect();
        if fuelcon::feasible(&agents, b) {
            return Fleet::new(agents, b).unwrap();
        }
    }
}

pub fn random_triplet(r: &mut impl Rng) -> ([AgentState; 3], f64) {
    let f = random_feasible_fleet(r, 3, 10.0, 10.0, (1.0, 5.0));
    ([f.agents[0], f.agents[1], f.agents[2]], f.beta)
}
