//! Mechanisms on a feasibility graph and the derived diagnostics.
//!
//! A mechanism assigns each vertex (agent, others' reports) a winning
//! probability in [0, 1]; incentive compatibility is baked into the
//! representation since an agent's probability never reads their own report.
//! Feasibility is the per-profile clique constraint: the winning
//! probabilities at any full profile sum to at most 1 (exactly 1 in
//! must-allocate mode).

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::env::{profile_insert, profile_minus, Environment, TypeProduct};
use crate::fgraph::{FeasibilityGraph, GraphOracle};
use crate::rat::{fmt_rat, parse_rat, rat_int, Rat};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "may-withhold")]
    MayWithhold,
    #[serde(rename = "must-allocate")]
    MustAllocate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::MayWithhold => write!(f, "may-withhold"),
            Mode::MustAllocate => write!(f, "must-allocate"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "may-withhold" => Ok(Mode::MayWithhold),
            "must-allocate" => Ok(Mode::MustAllocate),
            other => Err(Error::parse(format!(
                "unknown mode `{other}` (expected may-withhold or must-allocate)"
            ))),
        }
    }
}

/// Winning probabilities per vertex, dense over a graph's vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mechanism {
    pub mode: Mode,
    q: Vec<Rat>,
}

impl Mechanism {
    pub fn new(g: &FeasibilityGraph, mode: Mode, q: Vec<Rat>) -> Result<Self> {
        if q.len() != g.vertex_count() {
            return Err(Error::invalid(format!(
                "mechanism has {} entries, graph has {} vertices",
                q.len(),
                g.vertex_count()
            )));
        }
        for (v, x) in q.iter().enumerate() {
            if x.is_negative() || *x > Rat::one() {
                return Err(Error::invalid(format!(
                    "probability {} at vertex {} outside [0, 1]",
                    fmt_rat(x),
                    g.format_vertex(v)
                )));
            }
        }
        Ok(Mechanism { mode, q })
    }

    pub fn zero(g: &FeasibilityGraph, mode: Mode) -> Self {
        Mechanism {
            mode,
            q: vec![Rat::zero(); g.vertex_count()],
        }
    }

    /// Indicator mechanism of a stable set (checked by `check_feasible`, not
    /// here; stability is exactly may-withhold feasibility of indicators).
    pub fn from_set(g: &FeasibilityGraph, mode: Mode, set: &[usize]) -> Self {
        let mut q = vec![Rat::zero(); g.vertex_count()];
        for &v in set {
            q[v] = Rat::one();
        }
        Mechanism { mode, q }
    }

    pub fn q(&self, v: usize) -> &Rat {
        &self.q[v]
    }

    pub fn probabilities(&self) -> &[Rat] {
        &self.q
    }

    pub fn set(&mut self, v: usize, x: Rat) {
        self.q[v] = x;
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// True when every probability is 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.q.iter().all(|x| x.is_zero() || x.is_one())
    }

    /// Vertices with strictly fractional probability.
    pub fn fractional_support(&self) -> Vec<usize> {
        (0..self.q.len())
            .filter(|&v| !self.q[v].is_zero() && !self.q[v].is_one())
            .collect()
    }

    pub fn to_json(&self, g: &FeasibilityGraph) -> String {
        let mut entries = Vec::new();
        for v in 0..self.q.len() {
            if self.q[v].is_zero() {
                continue;
            }
            let vert = g.vertex(v);
            let mut tm_labels = Vec::new();
            let mut pos = 0usize;
            for k in 0..g.agents() {
                if k == vert.agent {
                    continue;
                }
                tm_labels.push(g.labels()[k][vert.theta_minus[pos]].clone());
                pos += 1;
            }
            entries.push(MechEntryDto {
                agent: vert.agent + 1,
                theta_minus: tm_labels,
                q: fmt_rat(&self.q[v]),
            });
        }
        entries.sort_by(|a, b| (a.agent, &a.theta_minus).cmp(&(b.agent, &b.theta_minus)));
        let dto = MechDto {
            mode: self.mode,
            entries,
        };
        serde_json::to_string_pretty(&dto).expect("mechanism serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct MechDto {
    mode: Mode,
    entries: Vec<MechEntryDto>,
}

#[derive(Serialize, Deserialize)]
struct MechEntryDto {
    agent: usize,
    theta_minus: Vec<String>,
    q: String,
}

/// Parses a mechanism JSON against a graph; omitted vertices get 0.
pub fn load_mechanism(g: &FeasibilityGraph, text: &str) -> Result<Mechanism> {
    let dto: MechDto =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("mechanism json: {e}")))?;
    let mut q = vec![Rat::zero(); g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    for e in &dto.entries {
        if e.agent == 0 || e.agent > g.agents() {
            return Err(Error::invalid(format!(
                "mechanism agent {} out of range",
                e.agent
            )));
        }
        let agent = e.agent - 1;
        if e.theta_minus.len() != g.agents() - 1 {
            return Err(Error::invalid(format!(
                "mechanism entry for agent {}: {} coordinates, expected {}",
                e.agent,
                e.theta_minus.len(),
                g.agents() - 1
            )));
        }
        let mut tm = Vec::with_capacity(e.theta_minus.len());
        let mut pos = 0usize;
        for k in 0..g.agents() {
            if k == agent {
                continue;
            }
            let label = &e.theta_minus[pos];
            let t = g.labels()[k]
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| {
                    Error::invalid(format!("unknown type label `{label}` for agent {}", k + 1))
                })?;
            tm.push(t);
            pos += 1;
        }
        let v = g.vertex_index(agent, &tm);
        if seen[v] {
            return Err(Error::invalid(format!(
                "duplicate mechanism entry at {}",
                g.format_vertex(v)
            )));
        }
        seen[v] = true;
        q[v] = parse_rat(&e.q)?;
    }
    Mechanism::new(g, dto.mode, q)
}

/// First clique constraint violated by a mechanism, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub theta: Vec<usize>,
    pub total: Rat,
    pub mode: Mode,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.mode {
            Mode::MayWithhold => "exceeds",
            Mode::MustAllocate => "differs from",
        };
        write!(
            f,
            "profile {:?}: total probability {} {} 1",
            self.theta,
            fmt_rat(&self.total),
            rel
        )
    }
}

/// Checks every clique constraint; returns the first violated profile.
pub fn check_feasible(g: &FeasibilityGraph, m: &Mechanism) -> std::result::Result<(), Violation> {
    debug_assert_eq!(m.len(), g.vertex_count());
    for (theta, clique) in g.cliques() {
        let mut total = Rat::zero();
        for &v in &clique {
            total += m.q(v);
        }
        let ok = match m.mode {
            Mode::MayWithhold => total <= Rat::one(),
            Mode::MustAllocate => total.is_one(),
        };
        if !ok {
            return Err(Violation {
                theta,
                total,
                mode: m.mode,
            });
        }
    }
    Ok(())
}

/// Memoizing peer-value lookup keyed by (agent, others' reports).
pub struct PeerCache<'e> {
    env: &'e Environment,
    map: HashMap<(usize, Vec<usize>), Rat>,
}

impl<'e> PeerCache<'e> {
    pub fn new(env: &'e Environment) -> Self {
        PeerCache {
            env,
            map: HashMap::new(),
        }
    }

    pub fn peer(&mut self, agent: usize, theta_minus: &[usize]) -> Rat {
        let key = (agent, theta_minus.to_vec());
        if let Some(v) = self.map.get(&key) {
            return v.clone();
        }
        let v = self.env.peer_value(agent, theta_minus);
        self.map.insert(key, v.clone());
        v
    }
}

/// Expected principal utility of a mechanism, computed two ways and checked
/// for exact agreement:
/// 1. vertex route: sum over vertices of weight(v) * q(v);
/// 2. profile route: sum over support of mu(theta) * sum_i q_i * peer_i.
pub fn utility(env: &Environment, g: &FeasibilityGraph, m: &Mechanism) -> Rat {
    assert_eq!(
        env.type_spaces(),
        g.labels(),
        "environment and graph shapes differ"
    );
    let n = env.agents();

    let mut by_vertex = Rat::zero();
    for v in 0..g.vertex_count() {
        if m.q(v).is_zero() {
            continue;
        }
        let vert = g.vertex(v);
        by_vertex += env.weight(vert.agent, &vert.theta_minus) * m.q(v);
    }

    let mut cache = PeerCache::new(env);
    let mut by_profile = Rat::zero();
    for e in env.support() {
        let mut inner = Rat::zero();
        for i in 0..n {
            let tm = profile_minus(&e.theta, i);
            let qv = m.q(g.vertex_index(i, &tm));
            if qv.is_zero() {
                continue;
            }
            inner += qv * cache.peer(i, &tm);
        }
        by_profile += &e.prob * inner;
    }

    assert_eq!(
        by_vertex, by_profile,
        "utility routes disagree; internal inconsistency"
    );
    by_vertex
}

/// Utility against a bare weight vector (no distribution available).
pub fn utility_weights(w: &crate::env::WeightVector, g: &FeasibilityGraph, m: &Mechanism) -> Rat {
    assert_eq!(
        w.type_spaces(),
        g.labels(),
        "weights and graph shapes differ"
    );
    let mut acc = Rat::zero();
    for (agent, tm, weight) in w.entries() {
        acc += weight * m.q(g.vertex_index(*agent, tm));
    }
    acc
}

/// Ranks of all agents at a full profile. Rank of i counts, out of n, the
/// agents with strictly larger peer value plus the tied agents with index
/// at most i (1-based comparison; an agent always counts itself). The n
/// ranks at any profile are a permutation of 1/n, 2/n, ..., 1.
pub fn ranks_at(cache: &mut PeerCache<'_>, theta: &[usize]) -> Vec<Rat> {
    let n = theta.len();
    let pv: Vec<Rat> = (0..n)
        .map(|j| cache.peer(j, &profile_minus(theta, j)))
        .collect();
    (0..n)
        .map(|i| {
            let mut count = 0usize;
            for j in 0..n {
                if pv[j] > pv[i] || (pv[j] == pv[i] && i >= j) {
                    count += 1;
                }
            }
            Rat::new(count.into(), n.into())
        })
        .collect()
}

/// Worst-case rank of `agent` at `theta_minus` over their own reports.
pub fn robust_rank(cache: &mut PeerCache<'_>, agent: usize, theta_minus: &[usize]) -> Rat {
    let mut best: Option<Rat> = None;
    for t in 0..cache.env.type_count(agent) {
        let theta = profile_insert(theta_minus, agent, t);
        let r = ranks_at(cache, &theta).swap_remove(agent);
        best = Some(match best {
            Some(b) if b >= r => b,
            _ => r,
        });
    }
    best.expect("type spaces are nonempty")
}

/// Per-profile rank data for every support profile.
#[derive(Debug, Clone)]
pub struct ProfileRanks {
    pub theta: Vec<usize>,
    pub prob: Rat,
    pub peer_values: Vec<Rat>,
    pub ranks: Vec<Rat>,
    pub robust_ranks: Vec<Rat>,
    /// Informational size: largest rank swing any single agent can cause at
    /// this profile by changing only their own report.
    pub delta: Rat,
}

#[derive(Debug, Clone)]
pub struct RankTable {
    pub profiles: Vec<ProfileRanks>,
}

pub fn rank_table(env: &Environment) -> RankTable {
    let n = env.agents();
    let mut cache = PeerCache::new(env);
    let mut profiles = Vec::with_capacity(env.support().len());
    for e in env.support() {
        let theta = e.theta.clone();
        let ranks = ranks_at(&mut cache, &theta);
        let peer_values: Vec<Rat> = (0..n)
            .map(|j| cache.peer(j, &profile_minus(&theta, j)))
            .collect();
        let mut robust_ranks = Vec::with_capacity(n);
        let mut delta = Rat::zero();
        for i in 0..n {
            let tm = profile_minus(&theta, i);
            let mut robust = ranks[i].clone();
            for t in 0..env.type_count(i) {
                let alt = profile_insert(&tm, i, t);
                let r = ranks_at(&mut cache, &alt).swap_remove(i);
                let swing = (&r - &ranks[i]).abs();
                if swing > delta {
                    delta = swing;
                }
                if r > robust {
                    robust = r;
                }
            }
            robust_ranks.push(robust);
        }
        profiles.push(ProfileRanks {
            theta,
            prob: e.prob.clone(),
            peer_values,
            ranks,
            robust_ranks,
            delta,
        });
    }
    RankTable { profiles }
}

/// CSV rendering: one row per (profile, agent).
pub fn rank_table_csv(env: &Environment, table: &RankTable) -> String {
    let mut wtr = csv::WriterBuilder::new().from_writer(Vec::new());
    wtr.write_record([
        "theta",
        "agent",
        "peer_value",
        "rank",
        "robust_rank",
        "delta",
    ])
    .expect("csv write");
    for p in &table.profiles {
        let theta_s = format_profile(env, &p.theta);
        for i in 0..env.agents() {
            wtr.write_record([
                theta_s.as_str(),
                &(i + 1).to_string(),
                &fmt_rat(&p.peer_values[i]),
                &fmt_rat(&p.ranks[i]),
                &fmt_rat(&p.robust_ranks[i]),
                &fmt_rat(&p.delta),
            ])
            .expect("csv write");
        }
    }
    String::from_utf8(wtr.into_inner().expect("csv flush")).expect("csv utf8")
}

pub fn format_profile(env: &Environment, theta: &[usize]) -> String {
    let labels: Vec<&str> = theta
        .iter()
        .enumerate()
        .map(|(i, &t)| env.type_spaces()[i][t].as_str())
        .collect();
    format!("({})", labels.join(","))
}

/// Informational-size summary over the support.
#[derive(Debug, Clone)]
pub struct InfoSizeReport {
    pub per_profile: Vec<(Vec<usize>, Rat)>,
    pub max_delta: Rat,
    /// For each distinct delta value d, the probability mass of profiles
    /// with delta strictly above d (a right tail, largest cutoffs first).
    pub tail: Vec<(Rat, Rat)>,
}

pub fn informational_size_profile(env: &Environment) -> InfoSizeReport {
    let table = rank_table(env);
    let per_profile: Vec<(Vec<usize>, Rat)> = table
        .profiles
        .iter()
        .map(|p| (p.theta.clone(), p.delta.clone()))
        .collect();
    let mut max_delta = Rat::zero();
    for (_, d) in &per_profile {
        if *d > max_delta {
            max_delta = d.clone();
        }
    }
    let mut cutoffs: Vec<Rat> = per_profile.iter().map(|(_, d)| d.clone()).collect();
    cutoffs.sort();
    cutoffs.dedup();
    let tail = cutoffs
        .into_iter()
        .map(|d| {
            let mut mass = Rat::zero();
            for (p, e) in table.profiles.iter().zip(&per_profile) {
                if e.1 > d {
                    mass += &p.prob;
                }
            }
            (d, mass)
        })
        .collect();
    InfoSizeReport {
        per_profile,
        max_delta,
        tail,
    }
}

/// The rank-threshold mechanism: an agent wins probability 1/(p n) exactly
/// when their worst-case rank stays within p and their peer value is
/// nonnegative. Always may-withhold; feasible for every p in (0, 1).
pub fn ranking_mechanism(env: &Environment, g: &FeasibilityGraph, p: &Rat) -> Result<Mechanism> {
    assert_eq!(
        env.type_spaces(),
        g.labels(),
        "environment and graph shapes differ"
    );
    if !p.is_positive() || *p >= Rat::one() {
        return Err(Error::invalid(format!(
            "p must lie in (0, 1), got {}",
            fmt_rat(p)
        )));
    }
    let n = env.agents();
    let share = Rat::one() / (p * rat_int(n as i64));
    let mut cache = PeerCache::new(env);
    let mut q = vec![Rat::zero(); g.vertex_count()];
    for v in 0..g.vertex_count() {
        let vert = g.vertex(v);
        let peer = cache.peer(vert.agent, &vert.theta_minus);
        if peer.is_negative() {
            continue;
        }
        if robust_rank(&mut cache, vert.agent, &vert.theta_minus) <= *p {
            q[v] = share.clone();
        }
    }
    Mechanism::new(g, Mode::MayWithhold, q)
}

/// Allocation decision table of a jury: for each juror report vector either
/// a winning candidate or a withhold.
struct JuryDecisions {
    jurors: Vec<usize>,
    choice: HashMap<Vec<usize>, Option<usize>>,
}

fn jury_decisions(env: &Environment, jurors: &[usize], mode: Mode) -> Result<JuryDecisions> {
    let n = env.agents();
    for w in jurors.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::invalid("juror list must be strictly increasing"));
        }
    }
    if jurors.iter().any(|&j| j >= n) {
        return Err(Error::invalid("juror index out of range"));
    }
    let candidates: Vec<usize> = (0..n).filter(|i| !jurors.contains(i)).collect();
    if candidates.is_empty() && mode == Mode::MustAllocate {
        return Err(Error::invalid(
            "must-allocate jury needs at least one candidate",
        ));
    }

    // One pass over the support accumulates, per juror report vector, the
    // total mass and per-candidate weighted values.
    let mut grouped: HashMap<Vec<usize>, (Rat, Vec<Rat>)> = HashMap::new();
    for e in env.support() {
        let key: Vec<usize> = jurors.iter().map(|&j| e.theta[j]).collect();
        let slot = grouped
            .entry(key)
            .or_insert_with(|| (Rat::zero(), vec![Rat::zero(); candidates.len()]));
        slot.0 += &e.prob;
        for (ci, &c) in candidates.iter().enumerate() {
            slot.1[ci] += &e.prob * &e.values[c];
        }
    }

    let juror_sizes: Vec<usize> = jurors.iter().map(|&j| env.type_count(j)).collect();
    let mut choice = HashMap::new();
    for key in TypeProduct::of_sizes(juror_sizes) {
        let decision = match grouped.get(&key) {
            None => match mode {
                // Off-support juror reports carry no information.
                Mode::MayWithhold => None,
                Mode::MustAllocate => candidates.first().copied(),
            },
            Some((_, scores)) => {
                // Scores share the positive normalizer, so comparing the
                // weighted sums picks the candidate with the best
                // conditional value; ties go to the smallest index.
                let mut best: Option<usize> = None;
                for ci in 0..candidates.len() {
                    match best {
                        None => best = Some(ci),
                        Some(b) if scores[ci] > scores[b] => best = Some(ci),
                        _ => {}
                    }
                }
                match best {
                    None => None,
                    Some(b) => match mode {
                        // Withhold only on strictly negative value; a tie
                        // with zero still allocates.
                        Mode::MayWithhold if scores[b].is_negative() => None,
                        _ => Some(candidates[b]),
                    },
                }
            }
        };
        choice.insert(key, decision);
    }
    Ok(JuryDecisions {
        jurors: jurors.to_vec(),
        choice,
    })
}

/// The optimal jury mechanism for a fixed juror set: jurors never win, the
/// winner among the candidates maximizes the conditional expected value
/// given the jurors' reports. Deterministic and constant in every
/// candidate's own report by construction; for a fixed juror set it weakly
/// dominates every other mechanism that ignores candidates' reports.
pub fn jury_mechanism_for(
    env: &Environment,
    g: &FeasibilityGraph,
    jurors: &[usize],
    mode: Mode,
) -> Result<Mechanism> {
    assert_eq!(
        env.type_spaces(),
        g.labels(),
        "environment and graph shapes differ"
    );
    let decisions = jury_decisions(env, jurors, mode)?;
    let n = env.agents();
    let mut q = vec![Rat::zero(); g.vertex_count()];
    for c in 0..n {
        if jurors.contains(&c) {
            continue;
        }
        // Position of each juror inside c's theta_minus vector.
        let slots: Vec<usize> = decisions
            .jurors
            .iter()
            .map(|&j| if j < c { j } else { j - 1 })
            .collect();
        for tm in TypeProduct::minus(env.type_spaces(), c) {
            let key: Vec<usize> = slots.iter().map(|&s| tm[s]).collect();
            if decisions.choice.get(&key) == Some(&Some(c)) {
                q[g.vertex_index(c, &tm)] = Rat::one();
            }
        }
    }
    Mechanism::new(g, mode, q)
}

/// Expected utility of the juror set's mechanism, computed directly from
/// the decision table without materializing vertex probabilities.
pub fn jury_value(env: &Environment, jurors: &[usize], mode: Mode) -> Result<Rat> {
    let decisions = jury_decisions(env, jurors, mode)?;
    let mut total = Rat::zero();
    for e in env.support() {
        let key: Vec<usize> = jurors.iter().map(|&j| e.theta[j]).collect();
        if let Some(Some(c)) = decisions.choice.get(&key) {
            total += &e.prob * &e.values[*c];
        }
    }
    Ok(total)
}

/// Jury verdict: every agent either never wins or never influences the
/// allocation. The witness juror set collects the never-winning agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JuryVerdict {
    pub is_jury: bool,
    pub jurors: Option<Vec<usize>>,
}

pub fn is_jury(g: &FeasibilityGraph, m: &Mechanism) -> JuryVerdict {
    let n = g.agents();
    let mut wins = vec![false; n];
    for v in 0..g.vertex_count() {
        if !m.q(v).is_zero() {
            wins[g.agent_of(v)] = true;
        }
    }
    for i in 0..n {
        if !wins[i] {
            continue;
        }
        // Winner i must never influence anyone: q at every other agent's
        // vertex must be constant as i's coordinate varies.
        for j in 0..n {
            if j == i {
                continue;
            }
            let slot = if i < j { i } else { i - 1 };
            for tm in TypeProduct::minus(g.labels(), j) {
                if tm[slot] != 0 {
                    continue;
                }
                let base = m.q(g.vertex_index(j, &tm)).clone();
                let mut alt = tm.clone();
                for t in 1..g.type_sizes()[i] {
                    alt[slot] = t;
                    if *m.q(g.vertex_index(j, &alt)) != base {
                        return JuryVerdict {
                            is_jury: false,
                            jurors: None,
                        };
                    }
                }
            }
        }
    }
    let jurors = (0..n).filter(|&i| !wins[i]).collect();
    JuryVerdict {
        is_jury: true,
        jurors: Some(jurors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::SupportEntry;
    use crate::rat::rat;

    fn jury2_env() -> Environment {
        let spaces = vec![
            vec!["a".to_string(), "b".to_string()],
            vec!["L".to_string(), "H".to_string()],
        ];
        let entries = vec![
            SupportEntry {
                theta: vec![0, 0],
                prob: rat(1, 4),
                values: vec![rat_int(-1), rat_int(0)],
            },
            SupportEntry {
                theta: vec![0, 1],
                prob: rat(1, 4),
                values: vec![rat_int(1), rat_int(0)],
            },
            SupportEntry {
                theta: vec![1, 0],
                prob: rat(1, 4),
                values: vec![rat_int(-1), rat_int(0)],
            },
            SupportEntry {
                theta: vec![1, 1],
                prob: rat(1, 4),
                values: vec![rat_int(1), rat_int(0)],
            },
        ];
        Environment::new(spaces, entries).unwrap()
    }

    fn graph_of(env: &Environment) -> FeasibilityGraph {
        FeasibilityGraph::build(env.type_spaces().to_vec()).unwrap()
    }

    #[test]
    fn feasibility_checks_cliques() {
        let env = jury2_env();
        let g = graph_of(&env);
        let mut m = Mechanism::zero(&g, Mode::MayWithhold);
        assert!(check_feasible(&g, &m).is_ok());
        // Saturate one clique beyond 1.
        m.set(g.vertex_index(0, &[0]), Rat::one());
        m.set(g.vertex_index(1, &[0]), Rat::one());
        let err = check_feasible(&g, &m).unwrap_err();
        assert_eq!(err.total, rat_int(2));
        assert_eq!(err.theta, vec![0, 0]);
        // Must-allocate wants equality everywhere.
        let m = Mechanism::zero(&g, Mode::MustAllocate);
        assert!(check_feasible(&g, &m).is_err());
        let ones = Mechanism::from_set(
            &g,
            Mode::MustAllocate,
            &[g.vertex_index(0, &[0]), g.vertex_index(0, &[1])],
        );
        assert!(check_feasible(&g, &ones).is_ok());
    }

    #[test]
    fn jury_mechanism_on_binary_signal() {
        let env = jury2_env();
        let g = graph_of(&env);
        // Agent 2 as juror: allocate to agent 1 exactly on the high signal.
        let m = jury_mechanism_for(&env, &g, &[1], Mode::MayWithhold).unwrap();
        assert!(check_feasible(&g, &m).is_ok());
        assert_eq!(*m.q(g.vertex_index(0, &[1])), rat_int(1));
        assert_eq!(*m.q(g.vertex_index(0, &[0])), rat_int(0));
        assert!(m.q(g.vertex_index(1, &[0])).is_zero());
        assert_eq!(utility(&env, &g, &m), rat(1, 2));
        assert_eq!(
            jury_value(&env, &[1], Mode::MayWithhold).unwrap(),
            rat(1, 2)
        );
        let verdict = is_jury(&g, &m);
        assert!(verdict.is_jury);
        assert_eq!(verdict.jurors, Some(vec![1]));

        // Must-allocate with the same juror keeps allocating on low signals.
        let ma = jury_mechanism_for(&env, &g, &[1], Mode::MustAllocate).unwrap();
        assert!(check_feasible(&g, &ma).is_ok());
        assert_eq!(utility(&env, &g, &ma), rat_int(0));
    }

    #[test]
    fn jury_rejects_bad_arguments() {
        let env = jury2_env();
        assert!(jury_decisions(&env, &[0, 0], Mode::MayWithhold).is_err());
        assert!(jury_decisions(&env, &[5], Mode::MayWithhold).is_err());
        assert!(jury_decisions(&env, &[0, 1], Mode::MustAllocate).is_err());
        // All agents jurors is fine when withholding is allowed.
        assert!(jury_decisions(&env, &[0, 1], Mode::MayWithhold).is_ok());
    }

    #[test]
    fn ranks_are_a_permutation_with_index_tiebreak() {
        let env = jury2_env();
        let mut cache = PeerCache::new(&env);
        // At (a, H): peer values (1, 0); ranks 1/2 and 1.
        let r = ranks_at(&mut cache, &[0, 1]);
        assert_eq!(r, vec![rat(1, 2), rat_int(1)]);
        // At (a, L): peer values (-1, 0); agent 2 leads.
        let r = ranks_at(&mut cache, &[0, 0]);
        assert_eq!(r, vec![rat_int(1), rat(1, 2)]);
    }

    #[test]
    fn tied_peer_values_break_by_agent_index() {
        // Both agents uninformative: peer values all zero.
        let spaces = vec![
            vec!["a".to_string(), "b".to_string()],
            vec!["x".to_string(), "y".to_string()],
        ];
        let entries: Vec<SupportEntry> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(s, t)| SupportEntry {
                theta: vec![s, t],
                prob: rat(1, 4),
                values: vec![rat_int(0), rat_int(0)],
            })
            .collect();
        let env = Environment::new(spaces, entries).unwrap();
        let mut cache = PeerCache::new(&env);
        let r = ranks_at(&mut cache, &[0, 0]);
        // Agent 1 outranks agent 2 on the tie.
        assert_eq!(r, vec![rat(1, 2), rat_int(1)]);
    }

    #[test]
    fn rank_table_and_informational_size() {
        let env = jury2_env();
        let table = rank_table(&env);
        assert_eq!(table.profiles.len(), 4);
        for p in &table.profiles {
            // Ranks form a permutation of {1/2, 1}.
            let mut sorted = p.ranks.clone();
            sorted.sort();
            assert_eq!(sorted, vec![rat(1, 2), rat_int(1)]);
            // Robust rank dominates the realized rank.
            for i in 0..2 {
                assert!(p.robust_ranks[i] >= p.ranks[i]);
            }
            // Agent 2 swings agent-differences by 1/2 here.
            assert_eq!(p.delta, rat(1, 2));
        }
        let info = informational_size_profile(&env);
        assert_eq!(info.max_delta, rat(1, 2));
        // Tail at the max cutoff is empty.
        let last = info.tail.last().unwrap();
        assert_eq!(last.0, rat(1, 2));
        assert!(last.1.is_zero());

        let csv_text = rank_table_csv(&env, &table);
        assert!(csv_text.starts_with("theta,agent,peer_value,rank,robust_rank,delta"));
        assert!(csv_text.contains("\"(a,L)\"") || csv_text.contains("(a,L)"));
    }

    #[test]
    fn ranking_mechanism_matches_hand_computation() {
        let env = jury2_env();
        let g = graph_of(&env);
        let m = ranking_mechanism(&env, &g, &rat(1, 2)).unwrap();
        assert!(check_feasible(&g, &m).is_ok());
        // Only agent 1 at the high signal qualifies: worst-case rank 1/2,
        // peer value 1; the share is 1/(p*n) = 1.
        assert_eq!(*m.q(g.vertex_index(0, &[1])), rat_int(1));
        assert_eq!(*m.q(g.vertex_index(0, &[0])), rat_int(0));
        assert_eq!(*m.q(g.vertex_index(1, &[0])), rat_int(0));
        assert_eq!(*m.q(g.vertex_index(1, &[1])), rat_int(0));
        assert_eq!(utility(&env, &g, &m), rat(1, 2));
        assert!(ranking_mechanism(&env, &g, &rat_int(1)).is_err());
        assert!(ranking_mechanism(&env, &g, &rat_int(0)).is_err());
    }

    #[test]
    fn is_jury_detects_report_influence() {
        let env = jury2_env();
        let g = graph_of(&env);
        // Agent 1 wins and their report moves agent 2's allocation: not a jury.
        let mut m = Mechanism::zero(&g, Mode::MayWithhold);
        m.set(g.vertex_index(0, &[1]), Rat::one());
        m.set(g.vertex_index(1, &[0]), Rat::one());
        // q_2 depends on agent 1's report (wins at theta_1 = a only).
        let verdict = is_jury(&g, &m);
        assert!(!verdict.is_jury);
        // Constant mechanisms are juries with an empty juror set.
        let m = Mechanism::from_set(
            &g,
            Mode::MayWithhold,
            &[g.vertex_index(0, &[0]), g.vertex_index(0, &[1])],
        );
        let verdict = is_jury(&g, &m);
        assert!(verdict.is_jury);
        assert_eq!(verdict.jurors, Some(vec![1]));
    }

    #[test]
    fn mechanism_json_round_trip() {
        let env = jury2_env();
        let g = graph_of(&env);
        let m = jury_mechanism_for(&env, &g, &[1], Mode::MayWithhold).unwrap();
        let text = m.to_json(&g);
        let back = load_mechanism(&g, &text).unwrap();
        assert_eq!(back, m);
        // Omitted vertices default to zero.
        let sparse = r#"{"mode":"may-withhold","entries":[
            {"agent":1,"theta_minus":["H"],"q":"1/2"}
        ]}"#;
        let m = load_mechanism(&g, sparse).unwrap();
        assert_eq!(*m.q(g.vertex_index(0, &[1])), rat(1, 2));
        assert!(m.q(g.vertex_index(0, &[0])).is_zero());
        // Out-of-range probability rejected.
        let bad = r#"{"mode":"may-withhold","entries":[
            {"agent":1,"theta_minus":["H"],"q":"3/2"}
        ]}"#;
        assert!(load_mechanism(&g, bad).is_err());
    }

    #[test]
    fn utility_routes_agree_on_random_probabilities() {
        let env = jury2_env();
        let g = graph_of(&env);
        // A scattering of deterministic fractional values.
        let fracs = [rat(1, 3), rat(2, 5), rat(1, 7), rat(5, 8)];
        let q: Vec<Rat> = (0..g.vertex_count())
            .map(|v| fracs[v % fracs.len()].clone())
            .collect();
        let m = Mechanism::new(&g, Mode::MayWithhold, q).unwrap();
        // utility() itself asserts the two routes agree.
        let _ = utility(&env, &g, &m);
    }
}
