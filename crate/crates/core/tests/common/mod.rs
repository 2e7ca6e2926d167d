//! Shared helpers for the integration tests: seeded random environments and
//! random feasible mechanisms.
#![allow(dead_code)]

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use peermech::env::{Environment, SupportEntry, TypeProduct};
use peermech::fgraph::{FeasibilityGraph, GraphOracle};
use peermech::mech::{Mechanism, Mode};
use peermech::rat::{rat, rat_int, Rat};

pub fn instance_path(name: &str) -> String {
    format!("{}/tests/instances/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Full-support environment with uniform-ish random probabilities and small
/// rational values, deterministic in the seed.
pub fn random_env(shape: &[usize], seed: u64) -> Environment {
    let mut rng = StdRng::seed_from_u64(seed);
    let spaces: Vec<Vec<String>> = shape
        .iter()
        .map(|&k| (1..=k).map(|t| format!("t{t}")).collect())
        .collect();
    let profiles: Vec<Vec<usize>> = TypeProduct::full(&spaces).collect();
    let weights: Vec<i64> = profiles.iter().map(|_| rng.random_range(1..=8)).collect();
    let total: i64 = weights.iter().sum();
    let support = profiles
        .into_iter()
        .zip(weights)
        .map(|(theta, w)| SupportEntry {
            theta,
            prob: rat(w, total),
            values: (0..shape.len())
                .map(|_| rat(rng.random_range(-4..=4), 4))
                .collect(),
        })
        .collect();
    Environment::new(spaces, support).expect("random environment is well formed")
}

/// Random point of the may-withhold polytope: a random box point scaled
/// down clique by clique. Scaling only ever lowers coordinates, so cliques
/// already within capacity stay within capacity.
pub fn random_mechanism(g: &FeasibilityGraph, rng: &mut StdRng) -> Mechanism {
    let mut q: Vec<Rat> = (0..g.vertex_count())
        .map(|_| rat(rng.random_range(0..=4), 4))
        .collect();
    for (_, clique) in g.cliques() {
        let total: Rat = clique.iter().map(|&v| q[v].clone()).sum();
        if total > Rat::one() {
            for &v in &clique {
                let scaled = &q[v] / &total;
                q[v] = scaled;
            }
        }
    }
    Mechanism::new(g, Mode::MayWithhold, q).expect("scaled-down point is feasible")
}

/// Random convex combination of the n constant always-allocate mechanisms.
pub fn random_must_allocate(g: &FeasibilityGraph, rng: &mut StdRng) -> Mechanism {
    let n = g.agents();
    let raw: Vec<i64> = (0..n).map(|_| rng.random_range(0..=4)).collect();
    let total: i64 = raw.iter().sum::<i64>().max(1);
    let mut q = vec![Rat::zero(); g.vertex_count()];
    for (v, slot) in q.iter_mut().enumerate() {
        *slot = rat(raw[g.agent_of(v)], total);
    }
    // A zero draw across all agents degenerates to "agent 1 always wins".
    if raw.iter().all(|&x| x == 0) {
        for (v, slot) in q.iter_mut().enumerate() {
            *slot = if g.agent_of(v) == 0 {
                rat_int(1)
            } else {
                Rat::zero()
            };
        }
    }
    Mechanism::new(g, Mode::MustAllocate, q).expect("convex mix of constants is feasible")
}
