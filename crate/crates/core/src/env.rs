//! Finite environments: type spaces, a joint distribution over type profiles
//! with conditional expected values, and the derived peer-information
//! quantities (marginals, peer values, vertex weights).
//!
//! Conventions used throughout:
//! - agents are 0-based `usize` internally and 1-based in every serialized
//!   form, matching the way profiles are written in logs and vertex ids;
//! - a profile is a `Vec<usize>` of type indices, one per agent;
//! - `theta_minus` for agent i is the profile with i's coordinate removed,
//!   remaining agents in increasing agent order;
//! - the peer value of agent i at `theta_minus` is the conditional
//!   expectation of i's value given the others' reports, and is defined as 0
//!   when those reports have zero marginal probability.

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rat::{fmt_rat, parse_rat, Rat};
use crate::{Error, Result};

/// One support point of the joint distribution.
#[derive(Debug, Clone)]
pub struct SupportEntry {
    /// Type profile, one type index per agent.
    pub theta: Vec<usize>,
    /// Probability of the profile; strictly positive and all entries sum to 1.
    pub prob: Rat,
    /// Conditional expected value per agent, each in [-1, 1].
    pub values: Vec<Rat>,
}

#[derive(Debug, Clone)]
pub struct Environment {
    type_spaces: Vec<Vec<String>>,
    support: Vec<SupportEntry>,
    by_profile: HashMap<Vec<usize>, usize>,
}

/// Removes agent `i`'s coordinate from a full profile.
pub fn profile_minus(theta: &[usize], i: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(theta.len() - 1);
    for (k, &t) in theta.iter().enumerate() {
        if k != i {
            out.push(t);
        }
    }
    out
}

/// Inserts type `t` for agent `i` into a `theta_minus` vector.
pub fn profile_insert(theta_minus: &[usize], i: usize, t: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(theta_minus.len() + 1);
    out.extend_from_slice(&theta_minus[..i]);
    out.push(t);
    out.extend_from_slice(&theta_minus[i..]);
    out
}

impl Environment {
    /// Builds and validates an environment from already-indexed entries.
    pub fn new(type_spaces: Vec<Vec<String>>, support: Vec<SupportEntry>) -> Result<Self> {
        let n = type_spaces.len();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 agents, got {n}")));
        }
        for (i, space) in type_spaces.iter().enumerate() {
            if space.len() < 2 {
                return Err(Error::invalid(format!(
                    "agent {} has {} types; each type space needs at least 2",
                    i + 1,
                    space.len()
                )));
            }
            for (a, la) in space.iter().enumerate() {
                if la.is_empty() {
                    return Err(Error::invalid(format!(
                        "agent {} has an empty type label",
                        i + 1
                    )));
                }
                if space[..a].contains(la) {
                    return Err(Error::invalid(format!(
                        "agent {} has duplicate type label `{la}`",
                        i + 1
                    )));
                }
            }
        }
        if support.is_empty() {
            return Err(Error::invalid("support is empty"));
        }
        let mut by_profile = HashMap::with_capacity(support.len());
        let mut total = Rat::zero();
        for (row, e) in support.iter().enumerate() {
            if e.theta.len() != n {
                return Err(Error::invalid(format!(
                    "support row {row}: profile has {} coordinates, expected {n}",
                    e.theta.len()
                )));
            }
            for (i, &t) in e.theta.iter().enumerate() {
                if t >= type_spaces[i].len() {
                    return Err(Error::invalid(format!(
                        "support row {row}: type index {t} out of range for agent {}",
                        i + 1
                    )));
                }
            }
            if e.values.len() != n {
                return Err(Error::invalid(format!(
                    "support row {row}: {} values, expected {n}",
                    e.values.len()
                )));
            }
            for v in &e.values {
                if v.abs() > Rat::one() {
                    return Err(Error::invalid(format!(
                        "support row {row}: value {} outside [-1, 1]",
                        fmt_rat(v)
                    )));
                }
            }
            if !e.prob.is_positive() {
                return Err(Error::invalid(format!(
                    "support row {row}: probability {} is not positive",
                    fmt_rat(&e.prob)
                )));
            }
            if by_profile.insert(e.theta.clone(), row).is_some() {
                return Err(Error::invalid(format!(
                    "support row {row}: duplicate profile"
                )));
            }
            total += &e.prob;
        }
        if !total.is_one() {
            return Err(Error::invalid(format!(
                "support probabilities sum to {}, expected exactly 1",
                fmt_rat(&total)
            )));
        }
        Ok(Environment {
            type_spaces,
            support,
            by_profile,
        })
    }

    pub fn agents(&self) -> usize {
        self.type_spaces.len()
    }

    pub fn type_spaces(&self) -> &[Vec<String>] {
        &self.type_spaces
    }

    pub fn type_count(&self, agent: usize) -> usize {
        self.type_spaces[agent].len()
    }

    pub fn support(&self) -> &[SupportEntry] {
        &self.support
    }

    pub fn support_row(&self, theta: &[usize]) -> Option<&SupportEntry> {
        self.by_profile.get(theta).map(|&r| &self.support[r])
    }

    pub fn label_index(&self, agent: usize, label: &str) -> Result<usize> {
        self.type_spaces
            .get(agent)
            .ok_or_else(|| Error::invalid(format!("agent {} out of range", agent + 1)))?
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown type label `{label}` for agent {}",
                    agent + 1
                ))
            })
    }

    /// Marginal probability of the others' report vector `theta_minus`.
    pub fn marginal_minus(&self, agent: usize, theta_minus: &[usize]) -> Rat {
        let mut mass = Rat::zero();
        for t in 0..self.type_count(agent) {
            let theta = profile_insert(theta_minus, agent, t);
            if let Some(e) = self.support_row(&theta) {
                mass += &e.prob;
            }
        }
        mass
    }

    /// Peer value: expected value of agent `agent` conditional on the others
    /// reporting `theta_minus`; 0 when that event has no probability.
    pub fn peer_value(&self, agent: usize, theta_minus: &[usize]) -> Rat {
        let (mass, weighted) = self.mass_and_weight(agent, theta_minus);
        if mass.is_zero() {
            Rat::zero()
        } else {
            weighted / mass
        }
    }

    /// Vertex weight: marginal times peer value, i.e. the unnormalized sum
    /// `sum_{theta_i} mu(theta) E[u_i | theta]`.
    pub fn weight(&self, agent: usize, theta_minus: &[usize]) -> Rat {
        self.mass_and_weight(agent, theta_minus).1
    }

    fn mass_and_weight(&self, agent: usize, theta_minus: &[usize]) -> (Rat, Rat) {
        let mut mass = Rat::zero();
        let mut weighted = Rat::zero();
        for t in 0..self.type_count(agent) {
            let theta = profile_insert(theta_minus, agent, t);
            if let Some(e) = self.support_row(&theta) {
                mass += &e.prob;
                weighted += &e.prob * &e.values[agent];
            }
        }
        (mass, weighted)
    }

    /// Unconditional expected value of agent `agent`.
    pub fn expected_value(&self, agent: usize) -> Rat {
        let mut acc = Rat::zero();
        for e in &self.support {
            acc += &e.prob * &e.values[agent];
        }
        acc
    }

    /// Conditional expected value of `candidate` given the jurors' reports.
    /// `jurors` must be strictly increasing agent indices not containing the
    /// candidate, and `theta_j` lists one type index per juror.
    pub fn conditional_value(
        &self,
        candidate: usize,
        jurors: &[usize],
        theta_j: &[usize],
    ) -> Result<Rat> {
        self.check_jury_args(candidate, jurors, theta_j)?;
        let mut mass = Rat::zero();
        let mut weighted = Rat::zero();
        for e in &self.support {
            if jurors.iter().zip(theta_j).all(|(&j, &t)| e.theta[j] == t) {
                mass += &e.prob;
                weighted += &e.prob * &e.values[candidate];
            }
        }
        if mass.is_zero() {
            Ok(Rat::zero())
        } else {
            Ok(weighted / mass)
        }
    }

    fn check_jury_args(&self, candidate: usize, jurors: &[usize], theta_j: &[usize]) -> Result<()> {
        let n = self.agents();
        if candidate >= n {
            return Err(Error::invalid(format!(
                "candidate {} out of range",
                candidate + 1
            )));
        }
        if jurors.len() != theta_j.len() {
            return Err(Error::invalid("jurors and their reports differ in length"));
        }
        for w in jurors.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::invalid("juror list must be strictly increasing"));
            }
        }
        for (&j, &t) in jurors.iter().zip(theta_j) {
            if j >= n {
                return Err(Error::invalid(format!("juror {} out of range", j + 1)));
            }
            if j == candidate {
                return Err(Error::invalid(format!(
                    "agent {} cannot be both juror and candidate",
                    j + 1
                )));
            }
            if t >= self.type_count(j) {
                return Err(Error::invalid(format!(
                    "type index {t} out of range for juror {}",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// All vertex weights as a sparse weight vector (zero entries omitted).
    pub fn weight_vector(&self) -> WeightVector {
        let mut entries = Vec::new();
        let n = self.agents();
        for agent in 0..n {
            for tm in TypeProduct::minus(&self.type_spaces, agent) {
                let w = self.weight(agent, &tm);
                if !w.is_zero() {
                    entries.push((agent, tm, w));
                }
            }
        }
        WeightVector {
            type_spaces: self.type_spaces.clone(),
            entries,
        }
    }

    pub fn to_json(&self) -> String {
        let dto = EnvDto {
            agents: self.agents(),
            type_spaces: self.type_spaces.clone(),
            support: self
                .support
                .iter()
                .map(|e| SupportDto {
                    theta: e
                        .theta
                        .iter()
                        .enumerate()
                        .map(|(i, &t)| NumOrString::S(self.type_spaces[i][t].clone()))
                        .collect(),
                    prob: NumOrString::S(fmt_rat(&e.prob)),
                    values: e
                        .values
                        .iter()
                        .map(|v| NumOrString::S(fmt_rat(v)))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dto).expect("environment serialization cannot fail")
    }
}

/// Iterator over the full cartesian product of type indices, optionally with
/// one agent removed. Lexicographic order, first agent most significant.
pub struct TypeProduct {
    sizes: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl TypeProduct {
    pub fn full(type_spaces: &[Vec<String>]) -> Self {
        let sizes: Vec<usize> = type_spaces.iter().map(|s| s.len()).collect();
        Self::of_sizes(sizes)
    }

    pub fn minus(type_spaces: &[Vec<String>], agent: usize) -> Self {
        let sizes: Vec<usize> = type_spaces
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != agent)
            .map(|(_, s)| s.len())
            .collect();
        Self::of_sizes(sizes)
    }

    pub fn of_sizes(sizes: Vec<usize>) -> Self {
        let current = if sizes.contains(&0) {
            None
        } else {
            Some(vec![0; sizes.len()])
        };
        TypeProduct { sizes, current }
    }
}

impl Iterator for TypeProduct {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.as_mut()?;
        let out = cur.clone();
        // Odometer increment, last coordinate fastest.
        let mut k = cur.len();
        loop {
            if k == 0 {
                self.current = None;
                break;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < self.sizes[k] {
                break;
            }
            cur[k] = 0;
        }
        Some(out)
    }
}

/// A bare weight instance: the same graph shape as an environment but with
/// weights given directly per vertex instead of derived from a distribution.
#[derive(Debug, Clone)]
pub struct WeightVector {
    type_spaces: Vec<Vec<String>>,
    /// (agent, theta_minus, weight), zero weights omitted.
    entries: Vec<(usize, Vec<usize>, Rat)>,
}

impl WeightVector {
    pub fn new(
        type_spaces: Vec<Vec<String>>,
        entries: Vec<(usize, Vec<usize>, Rat)>,
    ) -> Result<Self> {
        let n = type_spaces.len();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 agents, got {n}")));
        }
        let mut seen = HashMap::new();
        for (agent, tm, _) in &entries {
            if *agent >= n {
                return Err(Error::invalid(format!(
                    "weight agent {} out of range",
                    agent + 1
                )));
            }
            if tm.len() != n - 1 {
                return Err(Error::invalid(format!(
                    "weight for agent {}: theta_minus has {} coordinates, expected {}",
                    agent + 1,
                    tm.len(),
                    n - 1
                )));
            }
            let mut other = (0..n).filter(|&k| k != *agent);
            for &t in tm {
                let k = other.next().unwrap();
                if t >= type_spaces[k].len() {
                    return Err(Error::invalid(format!(
                        "weight for agent {}: type index {t} out of range for agent {}",
                        agent + 1,
                        k + 1
                    )));
                }
            }
            if seen.insert((*agent, tm.clone()), ()).is_some() {
                return Err(Error::invalid(format!(
                    "duplicate weight entry for agent {}",
                    agent + 1
                )));
            }
        }
        let entries = entries
            .into_iter()
            .filter(|(_, _, w)| !w.is_zero())
            .collect();
        Ok(WeightVector {
            type_spaces,
            entries,
        })
    }

    pub fn agents(&self) -> usize {
        self.type_spaces.len()
    }

    pub fn type_spaces(&self) -> &[Vec<String>] {
        &self.type_spaces
    }

    pub fn entries(&self) -> &[(usize, Vec<usize>, Rat)] {
        &self.entries
    }

    pub fn to_json(&self) -> String {
        let mut entries = self.entries.clone();
        entries.sort();
        let dto = WeightsDto {
            agents: self.agents(),
            type_spaces: self.type_spaces.clone(),
            weights: entries
                .iter()
                .map(|(agent, tm, w)| WeightDto {
                    agent: agent + 1,
                    theta_minus: self
                        .format_theta_minus(*agent, tm)
                        .into_iter()
                        .map(NumOrString::S)
                        .collect(),
                    w: NumOrString::S(fmt_rat(w)),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dto).expect("weight serialization cannot fail")
    }

    fn format_theta_minus(&self, agent: usize, tm: &[usize]) -> Vec<String> {
        let mut out = Vec::with_capacity(tm.len());
        let mut others = (0..self.agents()).filter(|&k| k != agent);
        for &t in tm {
            let k = others.next().unwrap();
            out.push(self.type_spaces[k][t].clone());
        }
        out
    }
}

/// An input file is either a full environment or a bare weight vector.
#[derive(Debug, Clone)]
pub enum Instance {
    Env(Environment),
    Weights(WeightVector),
}

impl Instance {
    pub fn type_spaces(&self) -> &[Vec<String>] {
        match self {
            Instance::Env(e) => e.type_spaces(),
            Instance::Weights(w) => w.type_spaces(),
        }
    }

    pub fn env(&self) -> Option<&Environment> {
        match self {
            Instance::Env(e) => Some(e),
            Instance::Weights(_) => None,
        }
    }
}

// ---------------------------------------------------------------------------
// JSON wire formats
// ---------------------------------------------------------------------------

/// Accepts a rational as a string (`"1/9"`, `"0.5"`) or an exact integer.
/// Fractional JSON numbers are rejected: they would silently round.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum NumOrString {
    S(String),
    I(i64),
    F(f64),
}

impl NumOrString {
    fn to_rat(&self, what: &str) -> Result<Rat> {
        match self {
            NumOrString::S(s) => parse_rat(s),
            NumOrString::I(i) => Ok(crate::rat::rat_int(*i)),
            NumOrString::F(f) => Err(Error::parse(format!(
                "{what}: decimal JSON number {f} is inexact; write it as a string"
            ))),
        }
    }

    fn to_label(&self) -> String {
        match self {
            NumOrString::S(s) => s.clone(),
            NumOrString::I(i) => i.to_string(),
            NumOrString::F(f) => f.to_string(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EnvDto {
    agents: usize,
    type_spaces: Vec<Vec<String>>,
    support: Vec<SupportDto>,
}

#[derive(Serialize, Deserialize)]
struct SupportDto {
    theta: Vec<NumOrString>,
    prob: NumOrString,
    values: Vec<NumOrString>,
}

#[derive(Serialize, Deserialize)]
struct WeightsDto {
    agents: usize,
    type_spaces: Vec<Vec<String>>,
    weights: Vec<WeightDto>,
}

#[derive(Serialize, Deserialize)]
struct WeightDto {
    agent: usize,
    theta_minus: Vec<NumOrString>,
    w: NumOrString,
}

fn label_index_in(spaces: &[Vec<String>], agent: usize, label: &str) -> Result<usize> {
    spaces[agent]
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| {
            Error::invalid(format!(
                "unknown type label `{label}` for agent {}",
                agent + 1
            ))
        })
}

/// Parses an environment from its JSON form.
pub fn load_environment(text: &str) -> Result<Environment> {
    let dto: EnvDto =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("environment json: {e}")))?;
    if dto.agents != dto.type_spaces.len() {
        return Err(Error::invalid(format!(
            "`agents` is {} but {} type spaces given",
            dto.agents,
            dto.type_spaces.len()
        )));
    }
    let spaces = dto.type_spaces;
    let mut support = Vec::with_capacity(dto.support.len());
    for row in &dto.support {
        if row.theta.len() != spaces.len() {
            return Err(Error::invalid(format!(
                "support profile has {} coordinates, expected {}",
                row.theta.len(),
                spaces.len()
            )));
        }
        let theta = row
            .theta
            .iter()
            .enumerate()
            .map(|(i, l)| label_index_in(&spaces, i, &l.to_label()))
            .collect::<Result<Vec<_>>>()?;
        let prob = row.prob.to_rat("prob")?;
        let values = row
            .values
            .iter()
            .map(|v| v.to_rat("value"))
            .collect::<Result<Vec<_>>>()?;
        support.push(SupportEntry {
            theta,
            prob,
            values,
        });
    }
    Environment::new(spaces, support)
}

/// Parses a bare weight vector from its JSON form. Agents are 1-based on the
/// wire; missing vertices carry weight 0.
pub fn load_weights(text: &str) -> Result<WeightVector> {
    let dto: WeightsDto =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("weights json: {e}")))?;
    if dto.agents != dto.type_spaces.len() {
        return Err(Error::invalid(format!(
            "`agents` is {} but {} type spaces given",
            dto.agents,
            dto.type_spaces.len()
        )));
    }
    let spaces = dto.type_spaces;
    let n = spaces.len();
    let mut entries = Vec::with_capacity(dto.weights.len());
    for row in &dto.weights {
        if row.agent == 0 || row.agent > n {
            return Err(Error::invalid(format!(
                "weight agent {} out of range 1..={n}",
                row.agent
            )));
        }
        let agent = row.agent - 1;
        if row.theta_minus.len() != n - 1 {
            return Err(Error::invalid(format!(
                "weight for agent {}: theta_minus has {} coordinates, expected {}",
                row.agent,
                row.theta_minus.len(),
                n - 1
            )));
        }
        let others: Vec<usize> = (0..n).filter(|&k| k != agent).collect();
        let tm = row
            .theta_minus
            .iter()
            .zip(&others)
            .map(|(l, &k)| label_index_in(&spaces, k, &l.to_label()))
            .collect::<Result<Vec<_>>>()?;
        entries.push((agent, tm, row.w.to_rat("weight")?));
    }
    WeightVector::new(spaces, entries)
}

/// Loads either an environment (`support` key) or weights (`weights` key).
pub fn load_instance(text: &str) -> Result<Instance> {
    let probe: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::parse(format!("instance json: {e}")))?;
    match (probe.get("support"), probe.get("weights")) {
        (Some(_), None) => Ok(Instance::Env(load_environment(text)?)),
        (None, Some(_)) => Ok(Instance::Weights(load_weights(text)?)),
        (Some(_), Some(_)) => Err(Error::invalid("instance has both `support` and `weights`")),
        (None, None) => Err(Error::invalid(
            "instance has neither `support` nor `weights`",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    /// Two agents; agent 2's report is informative about agent 1's value:
    /// u_1 = -1 on (a, L), +1 on (a, H) style rows, agent 1 uninformative.
    pub fn binary_jury_env() -> Environment {
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

    #[test]
    fn peer_values_match_direct_summation() {
        let env = binary_jury_env();
        // theta_minus = (H) for agent 1: mass 1/2, weighted sum 1/2.
        assert_eq!(env.marginal_minus(0, &[1]), rat(1, 2));
        assert_eq!(env.peer_value(0, &[1]), rat_int(1));
        assert_eq!(env.peer_value(0, &[0]), rat_int(-1));
        assert_eq!(env.weight(0, &[1]), rat(1, 2));
        assert_eq!(env.weight(0, &[0]), rat(-1, 2));
        // Agent 2 carries no value.
        assert_eq!(env.peer_value(1, &[0]), rat_int(0));
        assert_eq!(env.peer_value(1, &[1]), rat_int(0));
    }

    #[test]
    fn peer_value_is_zero_off_support() {
        let spaces = vec![
            vec!["x".to_string(), "y".to_string()],
            vec!["x".to_string(), "y".to_string()],
        ];
        // Only diagonal profiles occur.
        let entries = vec![
            SupportEntry {
                theta: vec![0, 0],
                prob: rat(1, 2),
                values: vec![rat_int(1), rat_int(0)],
            },
            SupportEntry {
                theta: vec![1, 1],
                prob: rat(1, 2),
                values: vec![rat_int(-1), rat_int(0)],
            },
        ];
        let env = Environment::new(spaces, entries).unwrap();
        assert_eq!(env.marginal_minus(0, &[0]), rat(1, 2));
        // Every theta_minus is reachable here; restrict one agent:
        // marginal of agent 1 seeing (y) is 1/2, peer value -1.
        assert_eq!(env.peer_value(0, &[1]), rat_int(-1));
    }

    #[test]
    fn conditional_value_with_empty_jury_is_expectation() {
        let env = binary_jury_env();
        assert_eq!(env.conditional_value(0, &[], &[]).unwrap(), rat_int(0));
        assert_eq!(env.conditional_value(0, &[1], &[1]).unwrap(), rat_int(1));
        assert_eq!(env.conditional_value(0, &[1], &[0]).unwrap(), rat_int(-1));
        assert!(env.conditional_value(0, &[0], &[0]).is_err());
    }

    #[test]
    fn weight_identity_weight_equals_marginal_times_peer_value() {
        let env = binary_jury_env();
        for agent in 0..2 {
            for t in 0..2 {
                let tm = vec![t];
                let lhs = env.weight(agent, &tm);
                let rhs = env.marginal_minus(agent, &tm) * env.peer_value(agent, &tm);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let spaces = vec![
            vec!["a".to_string(), "b".to_string()],
            vec!["L".to_string(), "H".to_string()],
        ];
        // Probabilities not summing to one.
        let entries = vec![SupportEntry {
            theta: vec![0, 0],
            prob: rat(1, 2),
            values: vec![rat_int(0), rat_int(0)],
        }];
        assert!(Environment::new(spaces.clone(), entries).is_err());
        // Value out of range.
        let entries = vec![SupportEntry {
            theta: vec![0, 0],
            prob: rat_int(1),
            values: vec![rat_int(2), rat_int(0)],
        }];
        assert!(Environment::new(spaces.clone(), entries).is_err());
        // Duplicate profile.
        let entries = vec![
            SupportEntry {
                theta: vec![0, 0],
                prob: rat(1, 2),
                values: vec![rat_int(0), rat_int(0)],
            },
            SupportEntry {
                theta: vec![0, 0],
                prob: rat(1, 2),
                values: vec![rat_int(0), rat_int(0)],
            },
        ];
        assert!(Environment::new(spaces.clone(), entries).is_err());
        // Singleton type space.
        let bad_spaces = vec![
            vec!["a".to_string()],
            vec!["L".to_string(), "H".to_string()],
        ];
        let entries = vec![
            SupportEntry {
                theta: vec![0, 0],
                prob: rat(1, 2),
                values: vec![rat_int(0), rat_int(0)],
            },
            SupportEntry {
                theta: vec![0, 1],
                prob: rat(1, 2),
                values: vec![rat_int(0), rat_int(0)],
            },
        ];
        assert!(Environment::new(bad_spaces, entries).is_err());
    }

    #[test]
    fn json_round_trip() {
        let env = binary_jury_env();
        let text = env.to_json();
        let back = load_environment(&text).unwrap();
        assert_eq!(back.agents(), 2);
        assert_eq!(back.peer_value(0, &[1]), rat_int(1));
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn weight_json_round_trip_and_instance_detection() {
        let env = binary_jury_env();
        let wv = env.weight_vector();
        let text = wv.to_json();
        let back = load_weights(&text).unwrap();
        assert_eq!(back.entries().len(), wv.entries().len());
        match load_instance(&text).unwrap() {
            Instance::Weights(_) => {}
            _ => panic!("expected weights"),
        }
        match load_instance(&env.to_json()).unwrap() {
            Instance::Env(_) => {}
            _ => panic!("expected environment"),
        }
    }

    #[test]
    fn rejects_float_probability() {
        let text = r#"{
            "agents": 2,
            "type_spaces": [["a","b"],["L","H"]],
            "support": [
                {"theta": ["a","L"], "prob": 0.5, "values": ["0","0"]},
                {"theta": ["b","H"], "prob": "1/2", "values": ["0","0"]}
            ]
        }"#;
        let err = load_environment(text).unwrap_err();
        assert!(err.to_string().contains("inexact"), "{err}");
    }

    #[test]
    fn type_product_order_is_lexicographic() {
        let spaces = vec![
            vec!["a".to_string(), "b".to_string()],
            vec!["x".to_string(), "y".to_string(), "z".to_string()],
        ];
        let all: Vec<Vec<usize>> = TypeProduct::full(&spaces).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
        let minus: Vec<Vec<usize>> = TypeProduct::minus(&spaces, 0).collect();
        assert_eq!(minus, vec![vec![0], vec![1], vec![2]]);
    }
}
