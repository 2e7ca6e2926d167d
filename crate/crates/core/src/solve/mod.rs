//! Exact optimizers over the DIC polytopes: the clique-constraint LP
//! (optimal stochastic mechanism), branch-and-bound (optimal deterministic
//! mechanism), exhaustive jury optimization, and the peer-value upper
//! bound. All results are exact rationals; guard trips surface as an
//! explicit status, never as a silently truncated answer.

pub mod mwss;
pub mod simplex;

use std::time::Instant;

use num_traits::{One, Signed, Zero};

use crate::env::{profile_minus, Environment, Instance};
use crate::fgraph::{FeasibilityGraph, GraphOracle};
use crate::mech::{
    check_feasible, jury_mechanism_for, jury_value, ranking_mechanism, utility, utility_weights,
    Mechanism, Mode, PeerCache,
};
use crate::rat::{fmt_rat, Rat};
use crate::{Error, Result};

use self::mwss::BranchParams;
use self::simplex::{LinearProgram, LpStatus, Rel, Row};

pub const DEFAULT_LP_VAR_GUARD: usize = 5_000;
pub const DEFAULT_JURY_AGENT_GUARD: usize = 16;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub lp_var_guard: usize,
    pub node_guard: u64,
    pub jury_agent_guard: usize,
    /// When set, the may-withhold branch-and-bound consults a pinned LP
    /// relaxation for a tighter bound once this many nodes have been
    /// explored.
    pub lp_tighten_after: Option<u64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            lp_var_guard: DEFAULT_LP_VAR_GUARD,
            node_guard: mwss::DEFAULT_NODE_GUARD,
            jury_agent_guard: DEFAULT_JURY_AGENT_GUARD,
            lp_tighten_after: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    GuardExceeded,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::GuardExceeded => "guard-exceeded",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub pivots: u64,
    pub nodes: u64,
    /// Wall time; diagnostic only, excluded from serialized reports so
    /// identical inputs give byte-identical outputs.
    pub wall_ms: u128,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: Rat,
    pub mechanism: Mechanism,
    pub stats: SolveStats,
    /// Set by `confirm_uniqueness`; `None` means not checked.
    pub unique: Option<bool>,
    /// Best juror set (0-based agents), for jury solves.
    pub jurors: Option<Vec<usize>>,
}

impl SolveReport {
    pub fn to_json(&self, g: &FeasibilityGraph) -> String {
        let mech: serde_json::Value = serde_json::from_str(&self.mechanism.to_json(g))
            .expect("mechanism serializes to valid json");
        let value = serde_json::json!({
            "status": self.status.as_str(),
            "objective": fmt_rat(&self.objective),
            "unique": self.unique,
            "jurors": self.jurors.as_ref().map(|js| js.iter().map(|j| j + 1).collect::<Vec<_>>()),
            "stats": { "pivots": self.stats.pivots, "nodes": self.stats.nodes },
            "mechanism": mech,
        });
        serde_json::to_string_pretty(&value).expect("report serializes")
    }
}

fn graph_for(inst: &Instance) -> Result<FeasibilityGraph> {
    FeasibilityGraph::build(inst.type_spaces().to_vec())
}

/// Dense per-vertex weights of an instance.
pub fn dense_weights(inst: &Instance, g: &FeasibilityGraph) -> Vec<Rat> {
    match inst {
        Instance::Env(env) => (0..g.vertex_count())
            .map(|v| {
                let vert = g.vertex(v);
                env.weight(vert.agent, &vert.theta_minus)
            })
            .collect(),
        Instance::Weights(w) => {
            let mut dense = vec![Rat::zero(); g.vertex_count()];
            for (agent, tm, weight) in w.entries() {
                dense[g.vertex_index(*agent, tm)] = weight.clone();
            }
            dense
        }
    }
}

fn clique_lp(g: &FeasibilityGraph, mode: Mode, weights: &[Rat], extra: &[Row]) -> LinearProgram {
    let rel = match mode {
        Mode::MayWithhold => Rel::Le,
        Mode::MustAllocate => Rel::Eq,
    };
    let mut rows: Vec<Row> = g
        .cliques()
        .map(|(_, members)| Row {
            coeffs: members.into_iter().map(|v| (v, Rat::one())).collect(),
            rel,
            rhs: Rat::one(),
        })
        .collect();
    rows.extend_from_slice(extra);
    LinearProgram {
        n_vars: g.vertex_count(),
        objective: weights.to_vec(),
        rows,
    }
}

/// Objective/utility cross-check: the reported optimum must equal the
/// mechanism's utility computed independently from the instance.
fn assert_objective(inst: &Instance, g: &FeasibilityGraph, m: &Mechanism, objective: &Rat) {
    let recomputed = match inst {
        Instance::Env(env) => utility(env, g, m),
        Instance::Weights(w) => utility_weights(w, g, m),
    };
    assert_eq!(
        recomputed, *objective,
        "objective disagrees with recomputed utility"
    );
}

fn guard_report(g: &FeasibilityGraph, mode: Mode, start: Instant) -> SolveReport {
    SolveReport {
        status: SolveStatus::GuardExceeded,
        objective: Rat::zero(),
        mechanism: Mechanism::zero(g, mode),
        stats: SolveStats {
            wall_ms: start.elapsed().as_millis(),
            ..Default::default()
        },
        unique: None,
        jurors: None,
    }
}

/// Optimal stochastic DIC mechanism: maximizes the weighted winning
/// probabilities over the clique-constraint polytope. The simplex endpoint
/// is a basic solution, hence an extreme point of the polytope.
pub fn solve_lp(inst: &Instance, mode: Mode, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let g = graph_for(inst)?;
    if g.vertex_count() > opts.lp_var_guard {
        return Ok(guard_report(&g, mode, start));
    }
    let weights = dense_weights(inst, &g);
    let lp = clique_lp(&g, mode, &weights, &[]);
    let sol = simplex::solve(&lp)?;
    if sol.status == LpStatus::Infeasible {
        return Ok(SolveReport {
            status: SolveStatus::Infeasible,
            objective: Rat::zero(),
            mechanism: Mechanism::zero(&g, mode),
            stats: SolveStats {
                pivots: sol.pivots,
                wall_ms: start.elapsed().as_millis(),
                ..Default::default()
            },
            unique: None,
            jurors: None,
        });
    }
    let mechanism = Mechanism::new(&g, mode, sol.point)?;
    debug_assert!(
        check_feasible(&g, &mechanism).is_ok(),
        "LP point violates a clique row"
    );
    assert_objective(inst, &g, &mechanism, &sol.objective);
    Ok(SolveReport {
        status: SolveStatus::Optimal,
        objective: sol.objective,
        mechanism,
        stats: SolveStats {
            pivots: sol.pivots,
            nodes: 0,
            wall_ms: start.elapsed().as_millis(),
        },
        unique: None,
        jurors: None,
    })
}

/// Decides whether the LP optimum is the unique optimal point: each
/// coordinate is minimized and maximized over the optimal face (objective
/// pinned to its optimum); any coordinate with wiggle room disproves
/// uniqueness.
pub fn confirm_uniqueness(
    inst: &Instance,
    mode: Mode,
    base: &SolveReport,
    opts: &SolveOptions,
) -> Result<bool> {
    let g = graph_for(inst)?;
    if g.vertex_count() > opts.lp_var_guard {
        return Err(Error::guard(format!(
            "uniqueness probe needs {} variables, guard is {}",
            g.vertex_count(),
            opts.lp_var_guard
        )));
    }
    let weights = dense_weights(inst, &g);
    let pin = Row {
        coeffs: (0..g.vertex_count())
            .filter(|&v| !weights[v].is_zero())
            .map(|v| (v, weights[v].clone()))
            .collect(),
        rel: Rel::Eq,
        rhs: base.objective.clone(),
    };
    for v in 0..g.vertex_count() {
        let probe = |sign: i32| -> Result<Rat> {
            let mut objective = vec![Rat::zero(); g.vertex_count()];
            objective[v] = if sign > 0 { Rat::one() } else { -Rat::one() };
            let lp = LinearProgram {
                n_vars: g.vertex_count(),
                objective,
                rows: clique_lp(&g, mode, &weights, std::slice::from_ref(&pin)).rows,
            };
            let sol = simplex::solve(&lp)?;
            assert_eq!(
                sol.status,
                LpStatus::Optimal,
                "optimal face cannot be empty"
            );
            Ok(sol.objective)
        };
        let hi = probe(1)?;
        let lo = -probe(-1)?;
        if hi != lo {
            return Ok(false);
        }
        debug_assert_eq!(hi, *base.mechanism.q(v));
    }
    Ok(true)
}

/// Optimal deterministic DIC mechanism via exact branch-and-bound.
/// Bound refiner handed to the stable-set search: maps the branch state
/// (included, excluded vertices) to a valid upper bound on the remainder.
type TightenFn<'a> = Box<dyn Fn(&[usize], &[usize]) -> Rat + 'a>;

pub fn solve_deterministic(
    inst: &Instance,
    mode: Mode,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let start = Instant::now();
    let g = graph_for(inst)?;
    let weights = dense_weights(inst, &g);

    let loose: Rat = weights.iter().filter(|w| w.is_positive()).cloned().sum();
    let tighten_fn: Option<TightenFn<'_>> = if opts.lp_tighten_after.is_some() {
        let g = &g;
        let weights = &weights;
        let loose = loose.clone();
        Some(Box::new(move |included: &[usize], excluded: &[usize]| {
            let mut extra = Vec::with_capacity(included.len() + excluded.len());
            for &v in included {
                extra.push(Row {
                    coeffs: vec![(v, Rat::one())],
                    rel: Rel::Eq,
                    rhs: Rat::one(),
                });
            }
            for &v in excluded {
                extra.push(Row {
                    coeffs: vec![(v, Rat::one())],
                    rel: Rel::Eq,
                    rhs: Rat::zero(),
                });
            }
            let lp = clique_lp(g, mode, weights, &extra);
            match simplex::solve(&lp) {
                Ok(sol) if sol.status == LpStatus::Optimal => sol.objective,
                // Fall back to the loose bound on any hiccup.
                _ => loose.clone(),
            }
        }))
    } else {
        None
    };
    let params = BranchParams {
        node_guard: opts.node_guard,
        tighten_after: opts.lp_tighten_after,
        tighten: tighten_fn.as_deref(),
    };
    let out = match mode {
        Mode::MayWithhold => mwss::max_weight_stable_set(&g, &weights, &params),
        Mode::MustAllocate => mwss::best_exact_cover(&g, &weights, &params),
    };
    let mechanism = Mechanism::from_set(&g, mode, &out.set);
    if out.complete {
        debug_assert!(check_feasible(&g, &mechanism).is_ok());
    }
    assert_objective(inst, &g, &mechanism, &out.value);
    Ok(SolveReport {
        status: if out.complete {
            SolveStatus::Optimal
        } else {
            SolveStatus::GuardExceeded
        },
        objective: out.value,
        mechanism,
        stats: SolveStats {
            pivots: 0,
            nodes: out.nodes,
            wall_ms: start.elapsed().as_millis(),
        },
        unique: None,
        jurors: None,
    })
}

/// Best jury mechanism over every admissible juror set, by exhaustive
/// enumeration in (size, lexicographic) order; ties keep the earliest set.
pub fn solve_jury(env: &Environment, mode: Mode, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let n = env.agents();
    let g = FeasibilityGraph::build(env.type_spaces().to_vec())?;
    if n > opts.jury_agent_guard {
        return Ok(guard_report(&g, mode, start));
    }
    let mut subsets: Vec<Vec<usize>> = (0u32..(1u32 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut best: Option<(Rat, Vec<usize>)> = None;
    let mut evaluated = 0u64;
    for jurors in subsets {
        if mode == Mode::MustAllocate && jurors.len() == n {
            continue; // no candidate left to receive the good
        }
        let val = jury_value(env, &jurors, mode)?;
        evaluated += 1;
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, jurors));
        }
    }
    let (objective, jurors) = best.expect("the empty juror set is always admissible");
    let mechanism = jury_mechanism_for(env, &g, &jurors, mode)?;
    let inst = Instance::Env(env.clone());
    assert_objective(&inst, &g, &mechanism, &objective);
    Ok(SolveReport {
        status: SolveStatus::Optimal,
        objective,
        mechanism,
        stats: SolveStats {
            pivots: 0,
            nodes: evaluated,
            wall_ms: start.elapsed().as_millis(),
        },
        unique: None,
        jurors: Some(jurors),
    })
}

/// The peer-value upper bound on any DIC mechanism's utility: allocate
/// pointwise to the best peer value, clamped at zero when withholding is
/// allowed.
pub fn upper_bound(env: &Environment, mode: Mode) -> Rat {
    let mut cache = PeerCache::new(env);
    let mut total = Rat::zero();
    for e in env.support() {
        let mut best: Option<Rat> = None;
        for i in 0..env.agents() {
            let p = cache.peer(i, &profile_minus(&e.theta, i));
            if best.as_ref().is_none_or(|b| p > *b) {
                best = Some(p);
            }
        }
        let mut m = best.expect("environments have at least two agents");
        if mode == Mode::MayWithhold && m.is_negative() {
            m = Rat::zero();
        }
        total += &e.prob * m;
    }
    total
}

#[derive(Debug, Clone)]
pub struct GapRow {
    pub p: Rat,
    pub ranking_utility: Rat,
    pub gap_to_lp: Rat,
    pub gap_to_upper: Rat,
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub lp: Rat,
    pub jury: Rat,
    pub jurors: Vec<usize>,
    pub upper: Rat,
    pub rows: Vec<GapRow>,
}

/// Compares the rank-threshold mechanism against the exact optima
/// (may-withhold throughout, matching the mechanism's withholding rule).
pub fn optimality_gap_report(
    env: &Environment,
    p_grid: &[Rat],
    opts: &SolveOptions,
) -> Result<GapReport> {
    let g = FeasibilityGraph::build(env.type_spaces().to_vec())?;
    let inst = Instance::Env(env.clone());
    let lp = solve_lp(&inst, Mode::MayWithhold, opts)?;
    if lp.status != SolveStatus::Optimal {
        return Err(Error::guard("LP guard exceeded inside gap report"));
    }
    let jury = solve_jury(env, Mode::MayWithhold, opts)?;
    if jury.status != SolveStatus::Optimal {
        return Err(Error::guard("jury guard exceeded inside gap report"));
    }
    let upper = upper_bound(env, Mode::MayWithhold);
    let mut rows = Vec::with_capacity(p_grid.len());
    for p in p_grid {
        let m = ranking_mechanism(env, &g, p)?;
        let u = utility(env, &g, &m);
        let gap_to_lp = &lp.objective - &u;
        let gap_to_upper = &upper - &u;
        assert!(
            !gap_to_lp.is_negative(),
            "ranking mechanism is DIC-feasible, so the LP optimum dominates it"
        );
        rows.push(GapRow {
            p: p.clone(),
            ranking_utility: u,
            gap_to_lp,
            gap_to_upper,
        });
    }
    Ok(GapReport {
        lp: lp.objective,
        jury: jury.objective,
        jurors: jury.jurors.unwrap_or_default(),
        upper,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{SupportEntry, WeightVector};
    use crate::rat::{rat, rat_int};

    /// The 16-vertex instance: shapes (2,2,3), weight 1 on a 7-hole, -1 on
    /// the other nine vertices.
    pub(crate) fn seven_hole_weights() -> Instance {
        let spaces: Vec<Vec<String>> = vec![
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into()],
            vec!["0".into(), "1".into(), "2".into()],
        ];
        let g = FeasibilityGraph::build(spaces.clone()).unwrap();
        let hole = seven_hole_vertices(&g);
        let mut entries = Vec::new();
        for v in 0..g.vertex_count() {
            let vert = g.vertex(v);
            let w = if hole.contains(&v) {
                rat_int(1)
            } else {
                rat_int(-1)
            };
            entries.push((vert.agent, vert.theta_minus, w));
        }
        Instance::Weights(WeightVector::new(spaces, entries).unwrap())
    }

    pub(crate) fn seven_hole_vertices(g: &FeasibilityGraph) -> Vec<usize> {
        vec![
            g.vertex_index(0, &[0, 0]),
            g.vertex_index(1, &[1, 0]),
            g.vertex_index(2, &[1, 1]),
            g.vertex_index(0, &[1, 1]),
            g.vertex_index(2, &[0, 1]),
            g.vertex_index(1, &[0, 2]),
            g.vertex_index(2, &[0, 0]),
        ]
    }

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

    #[test]
    fn seven_hole_lp_is_half_on_hole_and_unique() {
        let inst = seven_hole_weights();
        let opts = SolveOptions::default();
        let report = solve_lp(&inst, Mode::MayWithhold, &opts).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        assert_eq!(report.objective, rat(7, 2));
        let g = FeasibilityGraph::build(inst.type_spaces().to_vec()).unwrap();
        let hole = seven_hole_vertices(&g);
        for v in 0..g.vertex_count() {
            let expected = if hole.contains(&v) {
                rat(1, 2)
            } else {
                Rat::zero()
            };
            assert_eq!(
                *report.mechanism.q(v),
                expected,
                "vertex {}",
                g.format_vertex(v)
            );
        }
        assert!(confirm_uniqueness(&inst, Mode::MayWithhold, &report, &opts).unwrap());
    }

    #[test]
    fn seven_hole_deterministic_optimum_is_three() {
        let inst = seven_hole_weights();
        let report =
            solve_deterministic(&inst, Mode::MayWithhold, &SolveOptions::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        assert_eq!(report.objective, rat_int(3));
        assert!(report.mechanism.is_deterministic());
        // Same answer with LP tightening switched on from the first node.
        let tightened = solve_deterministic(
            &inst,
            Mode::MayWithhold,
            &SolveOptions {
                lp_tighten_after: Some(0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(tightened.objective, rat_int(3));
    }

    #[test]
    fn jury_solver_finds_the_informed_juror() {
        let env = jury2_env();
        let opts = SolveOptions::default();
        let report = solve_jury(&env, Mode::MayWithhold, &opts).unwrap();
        assert_eq!(report.objective, rat(1, 2));
        assert_eq!(report.jurors, Some(vec![1]));
        assert_eq!(report.stats.nodes, 4);
        // Two-agent environments: the jury optimum equals the LP optimum.
        let inst = Instance::Env(env.clone());
        for mode in [Mode::MayWithhold, Mode::MustAllocate] {
            let lp = solve_lp(&inst, mode, &opts).unwrap();
            let jury = solve_jury(&env, mode, &opts).unwrap();
            assert_eq!(lp.objective, jury.objective, "mode {mode}");
        }
    }

    #[test]
    fn solver_ordering_invariant() {
        let env = jury2_env();
        let inst = Instance::Env(env.clone());
        let opts = SolveOptions::default();
        for mode in [Mode::MayWithhold, Mode::MustAllocate] {
            let jury = solve_jury(&env, mode, &opts).unwrap().objective;
            let det = solve_deterministic(&inst, mode, &opts).unwrap().objective;
            let lp = solve_lp(&inst, mode, &opts).unwrap().objective;
            let ub = upper_bound(&env, mode);
            assert!(
                jury <= det,
                "jury {} > det {} in {mode}",
                fmt_rat(&jury),
                fmt_rat(&det)
            );
            assert!(
                det <= lp,
                "det {} > lp {} in {mode}",
                fmt_rat(&det),
                fmt_rat(&lp)
            );
            assert!(
                lp <= ub,
                "lp {} > upper {} in {mode}",
                fmt_rat(&lp),
                fmt_rat(&ub)
            );
        }
    }

    #[test]
    fn no_peer_information_reduces_to_constants() {
        // Values constant across profiles: nothing any peer reports moves
        // the conditional values.
        let spaces = vec![
            vec!["a".to_string(), "b".to_string()],
            vec!["x".to_string(), "y".to_string()],
        ];
        let entries: Vec<SupportEntry> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(s, t)| SupportEntry {
                theta: vec![s, t],
                prob: rat(1, 4),
                values: vec![rat(1, 3), rat(-1, 4)],
            })
            .collect();
        let env = Environment::new(spaces, entries).unwrap();
        let inst = Instance::Env(env.clone());
        let lp = solve_lp(&inst, Mode::MayWithhold, &SolveOptions::default()).unwrap();
        assert_eq!(lp.objective, rat(1, 3));
        assert_eq!(upper_bound(&env, Mode::MayWithhold), rat(1, 3));
        let ma = solve_lp(&inst, Mode::MustAllocate, &SolveOptions::default()).unwrap();
        assert_eq!(ma.objective, rat(1, 3));
    }

    #[test]
    fn upper_bound_on_binary_signal() {
        let env = jury2_env();
        assert_eq!(upper_bound(&env, Mode::MayWithhold), rat(1, 2));
        assert_eq!(upper_bound(&env, Mode::MustAllocate), rat(1, 2));
    }

    #[test]
    fn guards_surface_as_status() {
        let env = jury2_env();
        let inst = Instance::Env(env.clone());
        let tiny = SolveOptions {
            lp_var_guard: 1,
            ..Default::default()
        };
        let lp = solve_lp(&inst, Mode::MayWithhold, &tiny).unwrap();
        assert_eq!(lp.status, SolveStatus::GuardExceeded);
        let tiny = SolveOptions {
            jury_agent_guard: 1,
            ..Default::default()
        };
        let jury = solve_jury(&env, Mode::MayWithhold, &tiny).unwrap();
        assert_eq!(jury.status, SolveStatus::GuardExceeded);
        let tiny = SolveOptions {
            node_guard: 1,
            ..Default::default()
        };
        let det = solve_deterministic(&inst, Mode::MayWithhold, &tiny).unwrap();
        assert_eq!(det.status, SolveStatus::GuardExceeded);
    }

    #[test]
    fn gap_report_orders_ranking_below_lp() {
        let env = jury2_env();
        let report =
            optimality_gap_report(&env, &[rat(1, 2), rat(3, 4)], &SolveOptions::default()).unwrap();
        assert_eq!(report.lp, rat(1, 2));
        assert_eq!(report.jury, rat(1, 2));
        assert_eq!(report.upper, rat(1, 2));
        // p = 1/2 reproduces the informed-juror mechanism exactly.
        assert_eq!(report.rows[0].ranking_utility, rat(1, 2));
        assert!(report.rows[0].gap_to_lp.is_zero());
        for row in &report.rows {
            assert!(!row.gap_to_upper.is_negative());
        }
    }

    #[test]
    fn report_json_shape() {
        let inst = seven_hole_weights();
        let opts = SolveOptions::default();
        let mut report = solve_lp(&inst, Mode::MayWithhold, &opts).unwrap();
        report.unique = Some(confirm_uniqueness(&inst, Mode::MayWithhold, &report, &opts).unwrap());
        let g = FeasibilityGraph::build(inst.type_spaces().to_vec()).unwrap();
        let text = report.to_json(&g);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["status"], "optimal");
        assert_eq!(v["objective"], "7/2");
        assert_eq!(v["unique"], true);
        assert!(v["stats"]["pivots"].as_u64().unwrap() > 0);
        assert_eq!(v["mechanism"]["entries"].as_array().unwrap().len(), 7);
    }
}
