//! Environment generators and experiment drivers.
//!
//! Everything here produces exact-rational [`Environment`]s:
//!
//! - [`gen_group_env`]: ℓ independent copies of a three-agent environment
//!   whose peer values trace an odd 9-hole; ranking mechanisms stay optimal
//!   while every jury mechanism is capped at 2/3.
//! - [`gen_ci_env`] / [`InfoStructure`]: conditionally independent signals
//!   with per-pair kernels; types are signal tuples and conditional values
//!   are posterior means.
//! - [`gen_network_env`]: the special case where only network neighbors
//!   observe (noisy) signals.
//! - [`jury_replication_check`]: the two exchangeability cases where a jury
//!   of n fresh agents replicates the unrestricted n-agent optimum exactly.
//! - [`gen_symmetric_env`]: seeded joints symmetrized over all simultaneous
//!   permutations of values and types.
//! - [`estimate_regularity`], [`analytic_lower_bound`],
//!   [`run_scaling_experiment`]: desk-scale asymptotics for ranking
//!   mechanisms.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Environment, SupportEntry, TypeProduct};
use crate::fgraph::{FeasibilityGraph, GraphOracle};
use crate::mech::{informational_size_profile, ranks_at, utility, Mechanism, Mode, PeerCache};
use crate::rat::{fmt_rat, parse_rat, rat, rat_floor, rat_int, rat_sum, Rat};
use crate::solve::{solve_jury, solve_lp, upper_bound, SolveOptions, SolveStatus};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

/// Largest generated support; generators error beyond it.
pub const DEFAULT_SUPPORT_GUARD: usize = 200_000;

/// Largest n for the n!-averaging symmetric generator.
pub const SYMMETRIC_AGENT_GUARD: usize = 5;

// ---------------------------------------------------------------------------
// Group expansion
// ---------------------------------------------------------------------------

/// The nine support profiles of the three-agent building block (0-based).
const GROUP_SUPPORT: [[usize; 3]; 9] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [1, 1, 1],
    [2, 1, 1],
    [2, 2, 1],
    [2, 2, 2],
    [0, 2, 2],
    [0, 0, 2],
];

/// The odd 9-hole as (agent, theta_minus) pairs; the building block's peer
/// values are the indicator of membership.
const GROUP_HOLE: [(usize, [usize; 2]); 9] = [
    (0, [0, 0]),
    (1, [1, 0]),
    (2, [1, 1]),
    (0, [1, 1]),
    (1, [2, 1]),
    (2, [2, 2]),
    (0, [2, 2]),
    (1, [0, 2]),
    (2, [0, 0]),
];

fn group_value(agent: usize, theta: &[usize; 3]) -> Rat {
    let tm: Vec<usize> = (0..3).filter(|&k| k != agent).map(|k| theta[k]).collect();
    let hit = GROUP_HOLE
        .iter()
        .any(|(a, h)| *a == agent && h[..] == tm[..]);
    if hit {
        Rat::one()
    } else {
        Rat::zero()
    }
}

/// ℓ independent copies of the building block: n = 3ℓ agents with ternary
/// types, uniform support of 9^ℓ profiles, and values equal to the own-group
/// hole indicator. Group members carry consecutive labels, which the rank
/// tie-break needs for the 2/n informational-size bound.
pub fn gen_group_env(ell: usize) -> Result<Environment> {
    if ell == 0 {
        return Err(Error::invalid("need at least one group"));
    }
    let rows = 9usize
        .checked_pow(ell as u32)
        .filter(|&r| r <= DEFAULT_SUPPORT_GUARD)
        .ok_or_else(|| {
            Error::guard(format!(
                "group support 9^{ell} exceeds the bound of {DEFAULT_SUPPORT_GUARD}"
            ))
        })?;
    let n = 3 * ell;
    let type_spaces: Vec<Vec<String>> = (0..n)
        .map(|_| vec!["1".into(), "2".into(), "3".into()])
        .collect();
    let prob = rat(1, rows as i64);
    let mut support = Vec::with_capacity(rows);
    let mut odo = vec![0usize; ell];
    loop {
        let mut theta = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for &pick in &odo {
            let block = &GROUP_SUPPORT[pick];
            theta.extend_from_slice(block);
            for a in 0..3 {
                values.push(group_value(a, block));
            }
        }
        support.push(SupportEntry {
            theta,
            prob: prob.clone(),
            values,
        });
        // odometer over group picks, last group fastest
        let mut k = ell;
        loop {
            if k == 0 {
                return Environment::new(type_spaces, support);
            }
            k -= 1;
            odo[k] += 1;
            if odo[k] < 9 {
                break;
            }
            odo[k] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Conditionally independent signal structures
// ---------------------------------------------------------------------------

/// A finite value distribution: (level, probability) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueDist {
    pub levels: Vec<(Rat, Rat)>,
}

/// A signal channel: one row of signal probabilities per value level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalKernel {
    pub alphabet: Vec<String>,
    /// rows[level_index][signal_index]
    pub rows: Vec<Vec<Rat>>,
}

/// Per-agent value distributions plus a signal kernel for every ordered
/// pair (sender, observer), with optional exchangeability flags.
///
/// `exchangeable_suppliers` asserts the kernel a sender uses does not depend
/// on who observes; `exchangeable_recipients` asserts values and kernels do
/// not depend on the sender. Both are validated, not trusted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoStructure {
    values: Vec<ValueDist>,
    /// kernels[sender][observer]; None exactly on the diagonal.
    kernels: Vec<Vec<Option<SignalKernel>>>,
    exchangeable_suppliers: bool,
    exchangeable_recipients: bool,
}

fn check_dist(d: &ValueDist, who: &str) -> Result<()> {
    if d.levels.is_empty() {
        return Err(Error::invalid(format!("{who}: empty value support")));
    }
    let mut seen = BTreeMap::new();
    for (u, p) in &d.levels {
        if u.abs() > Rat::one() {
            return Err(Error::invalid(format!(
                "{who}: level {} outside [-1, 1]",
                fmt_rat(u)
            )));
        }
        if !p.is_positive() {
            return Err(Error::invalid(format!(
                "{who}: probabilities must be positive"
            )));
        }
        if seen.insert(fmt_rat(u), ()).is_some() {
            return Err(Error::invalid(format!(
                "{who}: duplicate level {}",
                fmt_rat(u)
            )));
        }
    }
    let total = rat_sum(d.levels.iter().map(|(_, p)| p));
    if !total.is_one() {
        return Err(Error::invalid(format!(
            "{who}: probabilities sum to {}",
            fmt_rat(&total)
        )));
    }
    Ok(())
}

fn check_kernel(k: &SignalKernel, n_levels: usize, who: &str) -> Result<()> {
    if k.alphabet.is_empty() {
        return Err(Error::invalid(format!("{who}: empty signal alphabet")));
    }
    let mut seen = BTreeMap::new();
    for s in &k.alphabet {
        if s.contains('|') {
            return Err(Error::invalid(format!(
                "{who}: signal name {s:?} contains '|'"
            )));
        }
        if seen.insert(s.clone(), ()).is_some() {
            return Err(Error::invalid(format!(
                "{who}: duplicate signal name {s:?}"
            )));
        }
    }
    if k.rows.len() != n_levels {
        return Err(Error::invalid(format!(
            "{who}: {} kernel rows for {} value levels",
            k.rows.len(),
            n_levels
        )));
    }
    for row in &k.rows {
        if row.len() != k.alphabet.len() {
            return Err(Error::invalid(format!("{who}: kernel row width mismatch")));
        }
        if row.iter().any(|p| p.is_negative()) {
            return Err(Error::invalid(format!("{who}: negative kernel entry")));
        }
        let total = rat_sum(row);
        if !total.is_one() {
            return Err(Error::invalid(format!(
                "{who}: kernel row sums to {}",
                fmt_rat(&total)
            )));
        }
    }
    Ok(())
}

impl InfoStructure {
    pub fn new(
        values: Vec<ValueDist>,
        kernels: Vec<Vec<Option<SignalKernel>>>,
        exchangeable_suppliers: bool,
        exchangeable_recipients: bool,
    ) -> Result<Self> {
        let m = values.len();
        if m < 2 {
            return Err(Error::invalid("need at least 2 agents"));
        }
        for (i, d) in values.iter().enumerate() {
            check_dist(d, &format!("agent {}", i + 1))?;
        }
        if kernels.len() != m || kernels.iter().any(|row| row.len() != m) {
            return Err(Error::invalid(
                "kernel table must be square in the agent count",
            ));
        }
        for (i, row) in kernels.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                match (i == j, cell) {
                    (true, Some(_)) => {
                        return Err(Error::invalid("no kernel allowed on the diagonal"))
                    }
                    (false, None) => {
                        return Err(Error::invalid(format!(
                            "missing kernel for sender {} observer {}",
                            i + 1,
                            j + 1
                        )))
                    }
                    (false, Some(k)) => {
                        check_kernel(k, values[i].levels.len(), &format!("{}->{}", i + 1, j + 1))?
                    }
                    (true, None) => {}
                }
            }
        }
        let s = InfoStructure {
            values,
            kernels,
            exchangeable_suppliers,
            exchangeable_recipients,
        };
        if exchangeable_suppliers {
            for i in 0..m {
                let mut base: Option<&SignalKernel> = None;
                for j in 0..m {
                    if let Some(k) = &s.kernels[i][j] {
                        match base {
                            None => base = Some(k),
                            Some(b) if b == k => {}
                            Some(_) => {
                                return Err(Error::invalid(format!(
                                    "exchangeable-suppliers flag, but sender {} uses \
                                     observer-dependent kernels",
                                    i + 1
                                )))
                            }
                        }
                    }
                }
            }
        }
        if exchangeable_recipients {
            if s.values.iter().any(|d| *d != s.values[0]) {
                return Err(Error::invalid(
                    "exchangeable-recipients flag, but value distributions differ",
                ));
            }
            for j in 0..m {
                let mut base: Option<&SignalKernel> = None;
                for i in 0..m {
                    if let Some(k) = &s.kernels[i][j] {
                        match base {
                            None => base = Some(k),
                            Some(b) if b == k => {}
                            Some(_) => {
                                return Err(Error::invalid(format!(
                                    "exchangeable-recipients flag, but observer {} uses \
                                     sender-dependent kernels",
                                    j + 1
                                )))
                            }
                        }
                    }
                }
            }
        }
        Ok(s)
    }

    /// One value distribution and one kernel per agent; every observer sees
    /// the same channel from a given sender.
    pub fn exchangeable_suppliers(per_agent: Vec<(ValueDist, SignalKernel)>) -> Result<Self> {
        let m = per_agent.len();
        let values: Vec<ValueDist> = per_agent.iter().map(|(d, _)| d.clone()).collect();
        let kernels = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i == j {
                            None
                        } else {
                            Some(per_agent[i].1.clone())
                        }
                    })
                    .collect()
            })
            .collect();
        InfoStructure::new(values, kernels, true, false)
    }

    /// A common value distribution and one kernel per observer; every sender
    /// is observed through the observer's channel.
    pub fn exchangeable_recipients(
        value: ValueDist,
        per_observer: Vec<SignalKernel>,
    ) -> Result<Self> {
        let m = per_observer.len();
        let values = vec![value; m];
        let kernels = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i == j {
                            None
                        } else {
                            Some(per_observer[j].clone())
                        }
                    })
                    .collect()
            })
            .collect();
        InfoStructure::new(values, kernels, false, true)
    }

    pub fn agents(&self) -> usize {
        self.values.len()
    }

    pub fn value_dist(&self, agent: usize) -> &ValueDist {
        &self.values[agent]
    }

    pub fn kernel(&self, sender: usize, observer: usize) -> &SignalKernel {
        self.kernels[sender][observer]
            .as_ref()
            .expect("no kernel on the diagonal")
    }

    pub fn is_exchangeable_suppliers(&self) -> bool {
        self.exchangeable_suppliers
    }

    pub fn is_exchangeable_recipients(&self) -> bool {
        self.exchangeable_recipients
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: StructureDto =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("structure: {e}")))?;
        let m = dto.agents;
        let values = dto
            .values
            .iter()
            .map(|v| {
                Ok(ValueDist {
                    levels: v
                        .levels
                        .iter()
                        .map(|(u, p)| Ok((parse_rat(u)?, parse_rat(p)?)))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut kernels: Vec<Vec<Option<SignalKernel>>> = vec![vec![None; m]; m];
        for e in &dto.kernels {
            let kernel = SignalKernel {
                alphabet: e.alphabet.clone(),
                rows: e
                    .rows
                    .iter()
                    .map(|r| r.iter().map(|p| parse_rat(p)).collect())
                    .collect::<Result<_>>()?,
            };
            let senders: Vec<usize> = match e.from {
                Some(f) if f >= 1 && f <= m => vec![f - 1],
                Some(f) => return Err(Error::parse(format!("kernel sender {f} out of range"))),
                None => (0..m).collect(),
            };
            let observers: Vec<usize> = match e.to {
                Some(t) if t >= 1 && t <= m => vec![t - 1],
                Some(t) => return Err(Error::parse(format!("kernel observer {t} out of range"))),
                None => (0..m).collect(),
            };
            for &i in &senders {
                for &j in &observers {
                    if i != j {
                        kernels[i][j] = Some(kernel.clone());
                    }
                }
            }
        }
        InfoStructure::new(
            values,
            kernels,
            dto.exchangeable_suppliers,
            dto.exchangeable_recipients,
        )
    }

    pub fn to_json(&self) -> String {
        let m = self.agents();
        let dto = StructureDto {
            agents: m,
            values: self
                .values
                .iter()
                .map(|d| ValueDistDto {
                    levels: d
                        .levels
                        .iter()
                        .map(|(u, p)| (fmt_rat(u), fmt_rat(p)))
                        .collect(),
                })
                .collect(),
            kernels: (0..m)
                .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let k = self.kernel(i, j);
                    KernelDto {
                        from: Some(i + 1),
                        to: Some(j + 1),
                        alphabet: k.alphabet.clone(),
                        rows: k
                            .rows
                            .iter()
                            .map(|r| r.iter().map(fmt_rat).collect())
                            .collect(),
                    }
                })
                .collect(),
            exchangeable_suppliers: self.exchangeable_suppliers,
            exchangeable_recipients: self.exchangeable_recipients,
        };
        serde_json::to_string_pretty(&dto).expect("structure serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct ValueDistDto {
    levels: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
struct KernelDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    from: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    to: Option<usize>,
    alphabet: Vec<String>,
    rows: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct StructureDto {
    agents: usize,
    values: Vec<ValueDistDto>,
    kernels: Vec<KernelDto>,
    #[serde(default)]
    exchangeable_suppliers: bool,
    #[serde(default)]
    exchangeable_recipients: bool,
}

/// How agent types encode signal tuples: agent j's type lists the signals
/// of all senders i ≠ j in ascending order, last sender fastest.
pub(crate) struct CiLayout {
    /// Per observer: alphabet size per sender slot (senders ascending, skip self).
    sizes: Vec<Vec<usize>>,
    type_sizes: Vec<usize>,
}

impl CiLayout {
    pub(crate) fn sender_slot(&self, observer: usize, sender: usize) -> usize {
        debug_assert_ne!(observer, sender);
        if sender < observer {
            sender
        } else {
            sender - 1
        }
    }

    pub(crate) fn decode(&self, observer: usize, mut type_index: usize) -> Vec<usize> {
        let sizes = &self.sizes[observer];
        let mut digits = vec![0usize; sizes.len()];
        for slot in (0..sizes.len()).rev() {
            digits[slot] = type_index % sizes[slot];
            type_index /= sizes[slot];
        }
        debug_assert_eq!(type_index, 0);
        digits
    }

    #[cfg(test)]
    pub(crate) fn encode(&self, observer: usize, digits: &[usize]) -> usize {
        let sizes = &self.sizes[observer];
        let mut idx = 0usize;
        for (slot, &d) in digits.iter().enumerate() {
            debug_assert!(d < sizes[slot]);
            idx = idx * sizes[slot] + d;
        }
        idx
    }

    pub(crate) fn type_sizes(&self) -> &[usize] {
        &self.type_sizes
    }
}

pub(crate) fn ci_layout(structure: &InfoStructure, n: usize) -> CiLayout {
    let sizes: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&i| i != j)
                .map(|i| structure.kernel(i, j).alphabet.len())
                .collect()
        })
        .collect();
    let type_sizes = sizes.iter().map(|s| s.iter().product()).collect();
    CiLayout { sizes, type_sizes }
}

/// Posterior mean of a sender's value given signals `(observer, digit)`;
/// `None` when the combination has probability zero under the marginal.
fn posterior_mean(
    structure: &InfoStructure,
    sender: usize,
    signals: &[(usize, usize)],
) -> Option<Rat> {
    let mut num = Rat::zero();
    let mut den = Rat::zero();
    for (li, (u, p)) in structure.value_dist(sender).levels.iter().enumerate() {
        let mut w = p.clone();
        for &(observer, digit) in signals {
            w *= &structure.kernel(sender, observer).rows[li][digit];
        }
        num += &w * u;
        den += w;
    }
    if den.is_zero() {
        None
    } else {
        Some(num / den)
    }
}

/// Builds the n-agent environment of an information structure: each agent's
/// type is the tuple of signals they observe, the profile probability is the
/// product of per-sender signal marginals, and conditional values are the
/// posterior means given all signals about the agent.
pub fn gen_ci_env(structure: &InfoStructure, n: usize) -> Result<Environment> {
    if n < 2 || n > structure.agents() {
        return Err(Error::invalid(format!(
            "need 2 <= n <= {} (the structure's agent count), got {n}",
            structure.agents()
        )));
    }
    let layout = ci_layout(structure, n);
    let mut total: usize = 1;
    for &s in layout.type_sizes() {
        total = total
            .checked_mul(s)
            .filter(|&t| t <= DEFAULT_SUPPORT_GUARD)
            .ok_or_else(|| {
                Error::guard(format!(
                    "signal support exceeds the bound of {DEFAULT_SUPPORT_GUARD}"
                ))
            })?;
    }

    // Type labels: signal names joined with '|'.
    let type_spaces: Vec<Vec<String>> = (0..n)
        .map(|j| {
            let senders: Vec<usize> = (0..n).filter(|&i| i != j).collect();
            (0..layout.type_sizes()[j])
                .map(|t| {
                    let digits = layout.decode(j, t);
                    senders
                        .iter()
                        .zip(&digits)
                        .map(|(&i, &d)| structure.kernel(i, j).alphabet[d].clone())
                        .collect::<Vec<_>>()
                        .join("|")
                })
                .collect()
        })
        .collect();

    let mut support = Vec::new();
    for theta in TypeProduct::of_sizes(layout.type_sizes().to_vec()) {
        let digits: Vec<Vec<usize>> = (0..n).map(|j| layout.decode(j, theta[j])).collect();
        let mut prob = Rat::one();
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            // All signals about i; slots of size 1 carry no information and
            // a probability factor of exactly 1.
            let signals: Vec<(usize, usize)> = (0..n)
                .filter(|&j| j != i)
                .filter(|&j| structure.kernel(i, j).alphabet.len() > 1)
                .map(|j| (j, digits[j][layout.sender_slot(j, i)]))
                .collect();
            let mut num = Rat::zero();
            let mut den = Rat::zero();
            for (li, (u, p)) in structure.value_dist(i).levels.iter().enumerate() {
                let mut w = p.clone();
                for &(j, digit) in &signals {
                    w *= &structure.kernel(i, j).rows[li][digit];
                }
                num += &w * u;
                den += w;
            }
            if den.is_zero() {
                prob = Rat::zero();
                break;
            }
            values.push(num / &den);
            prob *= den;
        }
        if prob.is_zero() {
            continue;
        }
        support.push(SupportEntry {
            theta,
            prob,
            values,
        });
    }
    Environment::new(type_spaces, support)
}

// ---------------------------------------------------------------------------
// Network signals
// ---------------------------------------------------------------------------

/// The mislabeling channel: reports the true level with probability
/// 1 - noise, otherwise a uniform draw over all levels.
fn noisy_channel(levels: &[Rat], noise: &Rat) -> SignalKernel {
    let l = levels.len() as i64;
    let alphabet = levels.iter().map(fmt_rat).collect();
    let uniform = noise * rat(1, l);
    let rows = (0..levels.len())
        .map(|u| {
            (0..levels.len())
                .map(|s| {
                    if s == u {
                        &uniform + (Rat::one() - noise)
                    } else {
                        uniform.clone()
                    }
                })
                .collect()
        })
        .collect();
    SignalKernel { alphabet, rows }
}

fn uninformative_kernel(n_levels: usize) -> SignalKernel {
    SignalKernel {
        alphabet: vec!["-".to_string()],
        rows: vec![vec![Rat::one()]; n_levels],
    }
}

/// Values are iid uniform over `value_levels`; each agent observes a noisy
/// signal of every network neighbor's value and nothing else. Types are the
/// signal tuples, so the support has |levels|^(2 · edges) profiles.
///
/// The construction is fully deterministic; `seed` is accepted so callers
/// can thread one seed through every generator, and is otherwise unused.
pub fn gen_network_env(
    adjacency: &[Vec<usize>],
    value_levels: &[Rat],
    noise: &Rat,
    seed: u64,
) -> Result<Environment> {
    let _ = seed;
    let n = adjacency.len();
    if n < 2 {
        return Err(Error::invalid("need at least 2 agents"));
    }
    if value_levels.is_empty() {
        return Err(Error::invalid("need at least one value level"));
    }
    if noise.is_negative() || noise > &Rat::one() {
        return Err(Error::invalid("noise must lie in [0, 1]"));
    }
    let mut adj = vec![vec![false; n]; n];
    for (i, nbrs) in adjacency.iter().enumerate() {
        for &j in nbrs {
            if j >= n {
                return Err(Error::invalid(format!("neighbor {j} out of range")));
            }
            if j == i {
                return Err(Error::invalid(format!(
                    "agent {i} listed as its own neighbor"
                )));
            }
            if adj[i][j] {
                return Err(Error::invalid(format!(
                    "duplicate neighbor {j} for agent {i}"
                )));
            }
            adj[i][j] = true;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if adj[i][j] != adj[j][i] {
                return Err(Error::invalid(format!(
                    "adjacency must be symmetric; {i} and {j} disagree"
                )));
            }
        }
    }
    let l = value_levels.len() as i64;
    let f = ValueDist {
        levels: value_levels
            .iter()
            .map(|u| (u.clone(), rat(1, l)))
            .collect(),
    };
    let channel = noisy_channel(value_levels, noise);
    let blank = uninformative_kernel(value_levels.len());
    let kernels = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        None
                    } else if adj[i][j] {
                        Some(channel.clone())
                    } else {
                        Some(blank.clone())
                    }
                })
                .collect()
        })
        .collect();
    let structure = InfoStructure::new(vec![f; n], kernels, false, false)?;
    gen_ci_env(&structure, n)
}

pub fn ring_adjacency(n: usize) -> Result<Vec<Vec<usize>>> {
    if n < 3 {
        return Err(Error::invalid("a ring needs at least 3 agents"));
    }
    Ok((0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect())
}

pub fn star_adjacency(n: usize) -> Result<Vec<Vec<usize>>> {
    if n < 2 {
        return Err(Error::invalid("a star needs at least 2 agents"));
    }
    let mut out = vec![(1..n).collect::<Vec<_>>()];
    out.extend((1..n).map(|_| vec![0]));
    Ok(out)
}

pub fn path_adjacency(n: usize) -> Result<Vec<Vec<usize>>> {
    if n < 2 {
        return Err(Error::invalid("a path needs at least 2 agents"));
    }
    Ok((0..n)
        .map(|i| {
            let mut nbrs = Vec::new();
            if i > 0 {
                nbrs.push(i - 1);
            }
            if i + 1 < n {
                nbrs.push(i + 1);
            }
            nbrs
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Jury replication under exchangeability
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplicationCase {
    /// Kernels independent of the observer: jurors n+1..2n score candidates
    /// 1..n.
    Suppliers,
    /// Values and kernels independent of the sender: jurors 1..n score
    /// candidates n+1..2n as stand-ins for themselves.
    Recipients,
}

impl ReplicationCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReplicationCase::Suppliers => "suppliers",
            ReplicationCase::Recipients => "recipients",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReplicationReport {
    pub case: ReplicationCase,
    pub n: usize,
    /// Expected value of always allocating to a highest-posterior agent in
    /// the n-agent environment (no withholding).
    pub small_bound: Rat,
    /// Utility of the replicated jury mechanism in the 2n-agent environment.
    pub replicated_utility: Rat,
    pub equal: bool,
    /// 0-based juror ids in the 2n-agent environment.
    pub jurors: Vec<usize>,
}

/// For each exchangeability flag the structure carries, builds the 2n-agent
/// jury mechanism from the proof sketch and checks that its utility equals,
/// exactly, the unrestricted optimum of the n-agent environment.
pub fn jury_replication_check(
    structure: &InfoStructure,
    n: usize,
) -> Result<Vec<ReplicationReport>> {
    let mut cases = Vec::new();
    if structure.is_exchangeable_suppliers() {
        cases.push(ReplicationCase::Suppliers);
    }
    if structure.is_exchangeable_recipients() {
        cases.push(ReplicationCase::Recipients);
    }
    if cases.is_empty() {
        return Err(Error::invalid(
            "structure carries neither exchangeability flag; nothing to replicate",
        ));
    }
    cases
        .iter()
        .map(|&case| replication_case_check(structure, n, case))
        .collect()
}

/// One exchangeability case of [`jury_replication_check`].
pub fn replication_case_check(
    structure: &InfoStructure,
    n: usize,
    case: ReplicationCase,
) -> Result<ReplicationReport> {
    match case {
        ReplicationCase::Suppliers if !structure.is_exchangeable_suppliers() => {
            return Err(Error::invalid(
                "structure is not flagged exchangeable-suppliers",
            ));
        }
        ReplicationCase::Recipients if !structure.is_exchangeable_recipients() => {
            return Err(Error::invalid(
                "structure is not flagged exchangeable-recipients",
            ));
        }
        _ => {}
    }
    if n < 2 {
        return Err(Error::invalid("need n >= 2"));
    }
    if structure.agents() < 2 * n {
        return Err(Error::invalid(format!(
            "replication at n = {n} needs a structure with at least {} agents",
            2 * n
        )));
    }

    let env_small = gen_ci_env(structure, n)?;
    let small_bound = upper_bound(&env_small, Mode::MustAllocate);

    let env_big = gen_ci_env(structure, 2 * n)?;
    let g = FeasibilityGraph::build(env_big.type_spaces().to_vec())?;
    let layout = ci_layout(structure, 2 * n);

    let (candidates, jurors): (Vec<usize>, Vec<usize>) = match case {
        ReplicationCase::Suppliers => ((0..n).collect(), (n..2 * n).collect()),
        ReplicationCase::Recipients => ((n..2 * n).collect(), (0..n).collect()),
    };

    // Which juror scores which candidate: candidate slot c skips its paired
    // juror, leaving the n-1 signals the small mechanism would use.
    let scorers: Vec<Vec<usize>> = (0..n)
        .map(|c| (0..n).filter(|&j| j != c).map(|j| jurors[j]).collect())
        .collect();

    // Winner as a function of the jurors' type indices.
    let winner_of = |juror_types: &[usize]| -> usize {
        let digits: Vec<Vec<usize>> = juror_types
            .iter()
            .zip(&jurors)
            .map(|(&t, &j)| layout.decode(j, t))
            .collect();
        let mut best: Option<(Rat, usize)> = None;
        for (slot, &cand) in candidates.iter().enumerate() {
            let signals: Vec<(usize, usize)> = scorers[slot]
                .iter()
                .map(|&obs| {
                    let pos = jurors.iter().position(|&j| j == obs).unwrap();
                    (obs, digits[pos][layout.sender_slot(obs, cand)])
                })
                .collect();
            let score = match posterior_mean(structure, cand, &signals) {
                Some(s) => s,
                // Zero-probability signal combination: only reachable off
                // the support, where any fixed choice is fine.
                None => continue,
            };
            let better = match &best {
                None => true,
                Some((b, _)) => score > *b,
            };
            if better {
                best = Some((score, cand));
            }
        }
        best.map(|(_, c)| c).unwrap_or(candidates[0])
    };

    let mut q = vec![Rat::zero(); g.vertex_count()];
    for v in 0..g.vertex_count() {
        let vert = g.vertex(v);
        if !candidates.contains(&vert.agent) {
            continue;
        }
        let juror_types: Vec<usize> = jurors
            .iter()
            .map(|&j| {
                let pos = if j < vert.agent { j } else { j - 1 };
                vert.theta_minus[pos]
            })
            .collect();
        if winner_of(&juror_types) == vert.agent {
            q[v] = Rat::one();
        }
    }
    let mech = Mechanism::new(&g, Mode::MustAllocate, q)?;
    debug_assert!(
        crate::mech::is_jury(&g, &mech).is_jury,
        "the replication mechanism must let the jurors decide everything"
    );
    let replicated_utility = utility(&env_big, &g, &mech);
    let equal = replicated_utility == small_bound;
    Ok(ReplicationReport {
        case,
        n,
        small_bound,
        replicated_utility,
        equal,
        jurors,
    })
}

// ---------------------------------------------------------------------------
// Symmetric environments
// ---------------------------------------------------------------------------

/// A symmetrized draw: the environment plus the underlying joint over
/// (value-level indices, type profile), kept for symmetry assertions.
#[derive(Debug, Clone)]
pub struct SymmetricDraw {
    pub env: Environment,
    /// (value levels per agent, types per agent) -> probability.
    pub joint: Vec<(Vec<usize>, Vec<usize>, Rat)>,
    pub value_levels: Vec<Rat>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn go(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            go(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    go(0, &mut cur, &mut out);
    out
}

/// Samples a finite joint over (values, types) and averages it over all n!
/// simultaneous permutations, so that
/// μ(u_1..u_n, θ_1..θ_n) = μ(u_ξ(1)..u_ξ(n), θ_ξ(1)..θ_ξ(n)) for every ξ.
pub fn gen_symmetric_env(n: usize, alphabet: &[String], seed: u64) -> Result<SymmetricDraw> {
    if n < 2 {
        return Err(Error::invalid("need at least 2 agents"));
    }
    if n > SYMMETRIC_AGENT_GUARD {
        return Err(Error::guard(format!(
            "symmetrization averages over n! permutations; n = {n} exceeds the bound of \
             {SYMMETRIC_AGENT_GUARD}"
        )));
    }
    if alphabet.is_empty() {
        return Err(Error::invalid("empty type alphabet"));
    }
    {
        let mut seen = BTreeMap::new();
        for t in alphabet {
            if seen.insert(t.clone(), ()).is_some() {
                return Err(Error::invalid(format!("duplicate type label {t:?}")));
            }
        }
    }
    let value_levels: Vec<Rat> = vec![rat_int(-1), rat(-1, 2), Rat::zero(), rat(1, 2), rat_int(1)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let atoms = 2 * alphabet.len().pow(n as u32);
    let mut raw: BTreeMap<(Vec<usize>, Vec<usize>), u64> = BTreeMap::new();
    let mut total: u64 = 0;
    for _ in 0..atoms {
        let u: Vec<usize> = (0..n)
            .map(|_| rng.random_range(0..value_levels.len()))
            .collect();
        let theta: Vec<usize> = (0..n)
            .map(|_| rng.random_range(0..alphabet.len()))
            .collect();
        let w = rng.random_range(1..=4u64);
        *raw.entry((u, theta)).or_insert(0) += w;
        total += w;
    }
    let perms = permutations(n);
    let scale = rat(1, (total * perms.len() as u64) as i64);
    let mut joint: BTreeMap<(Vec<usize>, Vec<usize>), Rat> = BTreeMap::new();
    for ((u, theta), w) in &raw {
        for p in &perms {
            let pu: Vec<usize> = p.iter().map(|&k| u[k]).collect();
            let pt: Vec<usize> = p.iter().map(|&k| theta[k]).collect();
            *joint.entry((pu, pt)).or_insert_with(Rat::zero) += rat_int(*w as i64) * &scale;
        }
    }

    let type_spaces: Vec<Vec<String>> = (0..n).map(|_| alphabet.to_vec()).collect();
    let mut by_theta: BTreeMap<Vec<usize>, (Rat, Vec<Rat>)> = BTreeMap::new();
    for ((u, theta), p) in &joint {
        let slot = by_theta
            .entry(theta.clone())
            .or_insert_with(|| (Rat::zero(), vec![Rat::zero(); n]));
        slot.0 += p;
        for i in 0..n {
            slot.1[i] += p * &value_levels[u[i]];
        }
    }
    let support = by_theta
        .into_iter()
        .map(|(theta, (prob, moments))| {
            let values = moments.into_iter().map(|m| m / &prob).collect();
            SupportEntry {
                theta,
                prob,
                values,
            }
        })
        .collect();
    let env = Environment::new(type_spaces, support)?;
    let joint = joint.into_iter().map(|((u, t), p)| (u, t, p)).collect();
    Ok(SymmetricDraw {
        env,
        joint,
        value_levels,
    })
}

// ---------------------------------------------------------------------------
// Regularity and the ranking lower bound
// ---------------------------------------------------------------------------

/// Per support profile: the fraction of agents whose peer value is within
/// eps of the profile's maximum, with the profile's probability.
fn regularity_fractions(env: &Environment, eps: &Rat) -> Vec<(Rat, Rat)> {
    let n = env.agents();
    let mut cache = PeerCache::new(env);
    let mut out = Vec::with_capacity(env.support().len());
    for e in env.support() {
        let peers: Vec<Rat> = (0..n)
            .map(|j| cache.peer(j, &crate::env::profile_minus(&e.theta, j)))
            .collect();
        let top = peers.iter().max().expect("at least one agent").clone();
        let near = peers.iter().filter(|u| *u + eps >= top).count();
        out.push((rat(near as i64, n as i64), e.prob.clone()));
    }
    out
}

/// μ-mass of profiles where at least an η-fraction of agents come within
/// eps of the highest peer value, for η on the grid {1/n, ..., n/n}.
pub fn estimate_regularity(env: &Environment, eps: &Rat) -> Result<Vec<(Rat, Rat)>> {
    if eps.is_negative() {
        return Err(Error::invalid("eps must be nonnegative"));
    }
    let n = env.agents();
    let fractions = regularity_fractions(env, eps);
    Ok((1..=n)
        .map(|k| {
            let eta = rat(k as i64, n as i64);
            let mass = rat_sum(fractions.iter().filter(|(f, _)| *f >= eta).map(|(_, p)| p));
            (eta, mass)
        })
        .collect())
}

/// μ-mass of profiles whose near-top fraction reaches `eta`.
pub fn regularity_mass(env: &Environment, eps: &Rat, eta: &Rat) -> Result<Rat> {
    if eps.is_negative() {
        return Err(Error::invalid("eps must be nonnegative"));
    }
    let fractions = regularity_fractions(env, eps);
    Ok(rat_sum(
        fractions.iter().filter(|(f, _)| f >= eta).map(|(_, p)| p),
    ))
}

/// Largest rank swing over deviations that keep the profile inside the
/// support.
///
/// When the support is a full type product this coincides with the maximal
/// informational size. On partial supports it is strictly smaller whenever
/// an off-support misreport pays: such a misreport kills the probability of
/// every profile the other agents' peer values condition on, so their values
/// collapse to the off-support default of 0 and the deviator's rank can jump
/// far more than their within-support influence suggests. Product
/// constructions like [`gen_group_env`] exhibit exactly this gap: a single
/// agent's off-support report zeroes the peer values of every other group,
/// while within the support agents move ranks only through the tie-break.
pub fn delta_within_support(env: &Environment) -> Rat {
    let mut cache = PeerCache::new(env);
    let mut worst = Rat::zero();
    for e in env.support() {
        let base = ranks_at(&mut cache, &e.theta);
        for i in 0..env.agents() {
            let tm = crate::env::profile_minus(&e.theta, i);
            for t in 0..env.type_count(i) {
                let alt = crate::env::profile_insert(&tm, i, t);
                if env.support_row(&alt).is_none() {
                    continue;
                }
                let r = ranks_at(&mut cache, &alt).swap_remove(i);
                let swing = (&r - &base[i]).abs();
                if swing > worst {
                    worst = swing;
                }
            }
        }
    }
    worst
}

/// The closed-form lower bound on the ranking mechanism's utility at
/// threshold p:
///
/// Σ_θ μ(θ) max(0, ū(p, θ)) - (1 - Σ_θ μ(θ) ⌊n(p - δ(θ))⌋ / (np))
///
/// where ū(p, θ) is the smallest peer value among agents ranked at or below
/// p (the term is 0 when no agent is) and δ(θ) is the informational size at
/// θ. Never exceeds the mechanism's exact utility.
pub fn analytic_lower_bound(env: &Environment, p: &Rat) -> Result<Rat> {
    if !p.is_positive() || *p >= Rat::one() {
        return Err(Error::invalid(
            "threshold p must lie strictly between 0 and 1",
        ));
    }
    let n = env.agents();
    let n_rat = rat_int(n as i64);
    let table = crate::mech::rank_table(env);
    let mut covered = Rat::zero();
    let mut floor_sum = Rat::zero();
    for row in &table.profiles {
        let eligible = row
            .ranks
            .iter()
            .zip(&row.peer_values)
            .filter(|(r, _)| *r <= p)
            .map(|(_, u)| u);
        if let Some(least) = eligible.min() {
            if least.is_positive() {
                covered += &row.prob * least;
            }
        }
        let inner = &n_rat * &(p - &row.delta);
        floor_sum += &row.prob * &Rat::from(rat_floor(&inner));
    }
    Ok(covered - Rat::one() + floor_sum / (&n_rat * p))
}

// ---------------------------------------------------------------------------
// Scaling experiments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkFamily {
    Ring,
    Star,
    Path,
}

impl NetworkFamily {
    pub fn adjacency(&self, n: usize) -> Result<Vec<Vec<usize>>> {
        match self {
            NetworkFamily::Ring => ring_adjacency(n),
            NetworkFamily::Star => star_adjacency(n),
            NetworkFamily::Path => path_adjacency(n),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            NetworkFamily::Ring => "ring",
            NetworkFamily::Star => "star",
            NetworkFamily::Path => "path",
        }
    }
}

#[derive(Debug, Clone)]
pub enum GeneratorSpec {
    /// Independent three-agent groups; n must be a multiple of 3.
    Group,
    /// Noisy signals along a network family.
    Network {
        family: NetworkFamily,
        levels: Vec<Rat>,
        noise: Rat,
    },
    /// Fully connected signals, identical channels: exchangeable in both
    /// senses.
    Ci { levels: Vec<Rat>, noise: Rat },
    /// Seeded symmetrized joints over a fixed-size type alphabet.
    Symmetric { alphabet: usize },
}

impl GeneratorSpec {
    pub fn id(&self) -> String {
        match self {
            GeneratorSpec::Group => "group".into(),
            GeneratorSpec::Network { family, .. } => format!("network-{}", family.as_str()),
            GeneratorSpec::Ci { .. } => "ci".into(),
            GeneratorSpec::Symmetric { .. } => "symmetric".into(),
        }
    }

    /// Builds the environment for one experiment cell.
    pub fn build(&self, n: usize, seed: u64) -> Result<Environment> {
        match self {
            GeneratorSpec::Group => {
                if !n.is_multiple_of(3) || n == 0 {
                    return Err(Error::invalid(format!(
                        "the group generator needs n divisible by 3, got {n}"
                    )));
                }
                gen_group_env(n / 3)
            }
            GeneratorSpec::Network {
                family,
                levels,
                noise,
            } => gen_network_env(&family.adjacency(n)?, levels, noise, seed),
            GeneratorSpec::Ci { levels, noise } => {
                if levels.is_empty() {
                    return Err(Error::invalid("need at least one value level"));
                }
                let l = levels.len() as i64;
                let f = ValueDist {
                    levels: levels.iter().map(|u| (u.clone(), rat(1, l))).collect(),
                };
                let channel = noisy_channel(levels, noise);
                let structure = InfoStructure::exchangeable_suppliers(vec![(f, channel); n])?;
                gen_ci_env(&structure, n)
            }
            GeneratorSpec::Symmetric { alphabet } => {
                let labels: Vec<String> = (0..*alphabet).map(|k| format!("t{}", k + 1)).collect();
                Ok(gen_symmetric_env(n, &labels, seed)?.env)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<Rat>,
    pub seed: u64,
    pub replications: usize,
    /// Full jury-set enumeration only while 2^n stays within this bound;
    /// otherwise the jury column is the best empty-or-single-juror value and
    /// is labeled a bound.
    pub jury_subset_guard: usize,
    /// The LP column is filled only when the graph has at most this many
    /// vertices.
    pub lp_var_guard: usize,
    pub regularity_eps: Rat,
    pub regularity_eta: Rat,
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn new(generator: GeneratorSpec, n_grid: Vec<usize>, p_grid: Vec<Rat>, seed: u64) -> Self {
        ExperimentConfig {
            generator,
            n_grid,
            p_grid,
            seed,
            replications: 1,
            jury_subset_guard: 64,
            lp_var_guard: 300,
            regularity_eps: rat(1, 100),
            regularity_eta: rat(1, 2),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct GenDto {
            kind: String,
            family: Option<NetworkFamily>,
            levels: Option<Vec<String>>,
            noise: Option<String>,
            alphabet: Option<usize>,
        }
        #[derive(Deserialize)]
        struct Dto {
            generator: GenDto,
            n_grid: Vec<usize>,
            p_grid: Vec<String>,
            seed: u64,
            replications: Option<usize>,
            jury_subset_guard: Option<usize>,
            lp_var_guard: Option<usize>,
            regularity_eps: Option<String>,
            regularity_eta: Option<String>,
            output: Option<String>,
        }
        let dto: Dto =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("config: {e}")))?;
        let levels = |o: &Option<Vec<String>>| -> Result<Vec<Rat>> {
            o.as_ref()
                .ok_or_else(|| Error::parse("generator needs `levels`"))?
                .iter()
                .map(|s| parse_rat(s))
                .collect()
        };
        let noise = |o: &Option<String>| -> Result<Rat> {
            parse_rat(
                o.as_ref()
                    .ok_or_else(|| Error::parse("generator needs `noise`"))?,
            )
        };
        let generator = match dto.generator.kind.as_str() {
            "group" => GeneratorSpec::Group,
            "network" => GeneratorSpec::Network {
                family: dto
                    .generator
                    .family
                    .ok_or_else(|| Error::parse("network generator needs `family`"))?,
                levels: levels(&dto.generator.levels)?,
                noise: noise(&dto.generator.noise)?,
            },
            "ci" => GeneratorSpec::Ci {
                levels: levels(&dto.generator.levels)?,
                noise: noise(&dto.generator.noise)?,
            },
            "symmetric" => GeneratorSpec::Symmetric {
                alphabet: dto
                    .generator
                    .alphabet
                    .ok_or_else(|| Error::parse("symmetric generator needs `alphabet`"))?,
            },
            other => return Err(Error::parse(format!("unknown generator kind {other:?}"))),
        };
        let mut config = ExperimentConfig::new(
            generator,
            dto.n_grid,
            dto.p_grid
                .iter()
                .map(|s| parse_rat(s))
                .collect::<Result<_>>()?,
            dto.seed,
        );
        if let Some(r) = dto.replications {
            config.replications = r;
        }
        if let Some(k) = dto.jury_subset_guard {
            config.jury_subset_guard = k;
        }
        if let Some(k) = dto.lp_var_guard {
            config.lp_var_guard = k;
        }
        if let Some(e) = dto.regularity_eps {
            config.regularity_eps = parse_rat(&e)?;
        }
        if let Some(e) = dto.regularity_eta {
            config.regularity_eta = parse_rat(&e)?;
        }
        config.output = dto.output;
        Ok(config)
    }
}

/// Derives one cell's seed from the experiment seed and the cell's position
/// (splitmix-style mixing; stable across runs and platforms).
fn cell_seed(seed: u64, n: usize, p_idx: usize, rep: usize) -> u64 {
    let mut x = seed
        ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (p_idx as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ (rep as u64).wrapping_mul(0x94D0_49BB_1331_11EB);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub const EXPERIMENT_CSV_HEADER: &str = "generator,n,p,seed,ranking_utility,jury_value,\
jury_is_bound,lp_value,upper_bound,max_delta,regularity_mass,analytic_lb";

fn experiment_row(config: &ExperimentConfig, n: usize, p: &Rat, seed: u64) -> Result<String> {
    let env = config.generator.build(n, seed)?;
    let g = FeasibilityGraph::build(env.type_spaces().to_vec())?;
    let ranking = crate::mech::ranking_mechanism(&env, &g, p)?;
    let ranking_utility = utility(&env, &g, &ranking);

    let full_jury = n < usize::BITS as usize && (1usize << n) <= config.jury_subset_guard;
    let (jury_value, jury_is_bound) = if full_jury {
        let report = solve_jury(&env, Mode::MayWithhold, &SolveOptions::default())?;
        if report.status != SolveStatus::Optimal {
            return Err(Error::guard(
                "jury search hit a guard inside the experiment",
            ));
        }
        (report.objective, false)
    } else {
        // Lower bound: the empty jury and every single juror.
        let mut best = crate::mech::jury_value(&env, &[], Mode::MayWithhold)?;
        for j in 0..n {
            let v = crate::mech::jury_value(&env, &[j], Mode::MayWithhold)?;
            if v > best {
                best = v;
            }
        }
        (best, true)
    };

    let lp_value = if g.vertex_count() <= config.lp_var_guard {
        let report = solve_lp(
            &crate::env::Instance::Env(env.clone()),
            Mode::MayWithhold,
            &SolveOptions::default(),
        )?;
        if report.status != SolveStatus::Optimal {
            return Err(Error::guard("LP hit a guard inside the experiment"));
        }
        Some(report.objective)
    } else {
        None
    };

    let upper = upper_bound(&env, Mode::MayWithhold);
    let info = informational_size_profile(&env);
    let mass = regularity_mass(&env, &config.regularity_eps, &config.regularity_eta)?;
    let lb = analytic_lower_bound(&env, p)?;
    assert!(
        lb <= ranking_utility,
        "the closed-form bound must stay below the exact ranking utility"
    );

    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        config.generator.id(),
        n,
        fmt_rat(p),
        seed,
        fmt_rat(&ranking_utility),
        fmt_rat(&jury_value),
        jury_is_bound,
        lp_value.as_ref().map(fmt_rat).unwrap_or_default(),
        fmt_rat(&upper),
        fmt_rat(&info.max_delta),
        fmt_rat(&mass),
        fmt_rat(&lb),
    ))
}

/// Runs every (n, p, replication) cell and returns the CSV report. Cells are
/// independent; `jobs` > 1 fans them out over threads without changing the
/// output.
pub fn run_scaling_experiment(config: &ExperimentConfig, jobs: usize) -> Result<String> {
    if config.n_grid.is_empty() || config.p_grid.is_empty() {
        return Err(Error::invalid("empty n or p grid"));
    }
    if config.replications == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    let cells: Vec<(usize, usize, usize)> = config
        .n_grid
        .iter()
        .flat_map(|&n| {
            (0..config.p_grid.len())
                .flat_map(move |pi| (0..config.replications).map(move |r| (n, pi, r)))
        })
        .collect();

    let compute = |&(n, pi, rep): &(usize, usize, usize)| -> Result<String> {
        let seed = cell_seed(config.seed, n, pi, rep);
        experiment_row(config, n, &config.p_grid[pi], seed)
    };

    let rows: Vec<Result<String>> = if jobs <= 1 || cells.len() <= 1 {
        cells.iter().map(compute).collect()
    } else {
        let workers = jobs.min(cells.len());
        let mut rows: Vec<Option<Result<String>>> = (0..cells.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers {
                let cells = &cells;
                let compute = &compute;
                handles.push(scope.spawn(move || {
                    let mut mine = Vec::new();
                    let mut i = w;
                    while i < cells.len() {
                        mine.push((i, compute(&cells[i])));
                        i += workers;
                    }
                    mine
                }));
            }
            for h in handles {
                for (i, row) in h.join().expect("experiment worker panicked") {
                    rows[i] = Some(row);
                }
            }
        });
        rows.into_iter()
            .map(|r| r.expect("every cell computed"))
            .collect()
    };

    let mut out = String::from(EXPERIMENT_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row?);
        out.push('\n');
    }
    Ok(out)
}
