//! Branch-and-bound searches for optimal deterministic mechanisms:
//! maximum-weight stable set (may-withhold) and best exact clique cover
//! (must-allocate: every type profile's clique holds exactly one chosen
//! vertex). Both are exact and deterministic; a node guard turns runaway
//! instances into an explicit incomplete outcome instead of a wrong answer.

use num_traits::{Signed, Zero};

use crate::fgraph::{FeasibilityGraph, GraphOracle};
use crate::rat::Rat;

pub const DEFAULT_NODE_GUARD: u64 = 10_000_000;

/// Extra bound consulted above a node-count threshold: given the vertices
/// included and explicitly excluded so far, returns an upper bound on the
/// total weight of any completion (e.g. a pinned LP relaxation).
pub type TightenBound<'a> = &'a dyn Fn(&[usize], &[usize]) -> Rat;

pub struct BranchParams<'a> {
    pub node_guard: u64,
    pub tighten_after: Option<u64>,
    pub tighten: Option<TightenBound<'a>>,
}

impl Default for BranchParams<'_> {
    fn default() -> Self {
        BranchParams {
            node_guard: DEFAULT_NODE_GUARD,
            tighten_after: None,
            tighten: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub set: Vec<usize>,
    pub value: Rat,
    pub nodes: u64,
    /// False when the node guard cut the search short; `set`/`value` are
    /// then best-found, not proven optimal.
    pub complete: bool,
}

/// Fixed-capacity bitset over vertex indices.
#[derive(Clone, PartialEq, Eq)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn empty(n: usize) -> Self {
        Bits {
            words: vec![0; n.div_ceil(64)],
        }
    }

    fn insert(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    fn remove(&mut self, i: usize) {
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    fn contains(&self, i: usize) -> bool {
        self.words[i >> 6] & (1 << (i & 63)) != 0
    }

    fn subtract(&mut self, other: &Bits) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
    }

    fn union_with(&mut self, other: &Bits) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some((wi << 6) | b)
            })
        })
    }
}

/// Closed neighborhoods as bitsets, one per vertex.
fn closed_neighborhoods(g: &dyn GraphOracle) -> Vec<Bits> {
    let n = g.vertex_count();
    let mut adj: Vec<Bits> = (0..n)
        .map(|v| {
            let mut b = Bits::empty(n);
            b.insert(v);
            b
        })
        .collect();
    for u in 0..n {
        for v in (u + 1)..n {
            if g.adjacent(u, v) {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
    }
    adj
}

struct MwssSearch<'a> {
    weights: &'a [Rat],
    order: Vec<usize>, // positive-weight vertices, weight descending
    adj: Vec<Bits>,
    nodes: u64,
    guard: u64,
    truncated: bool,
    best_val: Rat,
    best_set: Vec<usize>,
    tighten_after: Option<u64>,
    tighten: Option<TightenBound<'a>>,
}

impl MwssSearch<'_> {
    fn run(&mut self, cand: Bits, cur_set: &mut Vec<usize>, cur_val: Rat, excl: &mut Vec<usize>) {
        self.nodes += 1;
        if self.nodes > self.guard {
            self.truncated = true;
            return;
        }
        if cur_val > self.best_val {
            self.best_val = cur_val.clone();
            self.best_set = cur_set.clone();
        }
        // Positive-sum bound over remaining candidates.
        let mut bound = cur_val.clone();
        for v in cand.iter_ones() {
            bound += &self.weights[v];
        }
        if bound <= self.best_val {
            return;
        }
        if let (Some(after), Some(tighten)) = (self.tighten_after, self.tighten) {
            if self.nodes > after {
                let alt = tighten(cur_set, excl);
                if alt <= self.best_val {
                    return;
                }
            }
        }
        // Branch on the heaviest remaining candidate.
        let Some(&v) = self.order.iter().find(|&&v| cand.contains(v)) else {
            return;
        };
        let mut included = cand.clone();
        included.subtract(&self.adj[v]);
        cur_set.push(v);
        let val = &cur_val + &self.weights[v];
        self.run(included, cur_set, val, excl);
        cur_set.pop();
        if self.truncated {
            return;
        }
        let mut rest = cand;
        rest.remove(v);
        excl.push(v);
        self.run(rest, cur_set, cur_val, excl);
        excl.pop();
    }
}

/// Exact maximum-weight stable set. Vertices with nonpositive weight never
/// help, so the search runs on the positive-weight subgraph; the empty set
/// (value 0) is always available.
pub fn max_weight_stable_set(
    g: &dyn GraphOracle,
    weights: &[Rat],
    params: &BranchParams<'_>,
) -> SearchOutcome {
    assert_eq!(
        weights.len(),
        g.vertex_count(),
        "weight count differs from vertex count"
    );
    let n = weights.len();
    let mut order: Vec<usize> = (0..n).filter(|&v| weights[v].is_positive()).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));
    let adj = closed_neighborhoods(g);
    let mut cand = Bits::empty(n);
    for &v in &order {
        cand.insert(v);
    }
    let mut search = MwssSearch {
        weights,
        order,
        adj,
        nodes: 0,
        guard: params.node_guard,
        truncated: false,
        best_val: Rat::zero(),
        best_set: Vec::new(),
        tighten_after: params.tighten_after,
        tighten: params.tighten,
    };
    search.run(cand, &mut Vec::new(), Rat::zero(), &mut Vec::new());
    let mut set = search.best_set;
    set.sort_unstable();
    SearchOutcome {
        set,
        value: search.best_val,
        nodes: search.nodes,
        complete: !search.truncated,
    }
}

struct CoverSearch<'a> {
    weights: &'a [Rat],
    cliques: Vec<Vec<usize>>,
    vertex_cliques: Vec<Vec<usize>>,
    adj: Vec<Bits>,
    nodes: u64,
    guard: u64,
    truncated: bool,
    best_val: Rat,
    best_set: Vec<usize>,
}

impl CoverSearch<'_> {
    fn run(
        &mut self,
        cursor: usize,
        covered: &mut Vec<bool>,
        blocked: &Bits,
        cur_set: &mut Vec<usize>,
        cur_val: Rat,
    ) {
        self.nodes += 1;
        if self.nodes > self.guard {
            self.truncated = true;
            return;
        }
        let mut c = cursor;
        while c < self.cliques.len() && covered[c] {
            c += 1;
        }
        if c == self.cliques.len() {
            if cur_val > self.best_val {
                self.best_val = cur_val;
                self.best_set = cur_set.clone();
            }
            return;
        }
        // Bound: current value plus every positive weight still selectable.
        let mut bound = cur_val.clone();
        for v in 0..self.weights.len() {
            if !blocked.contains(v) && self.weights[v].is_positive() {
                bound += &self.weights[v];
            }
        }
        if bound <= self.best_val {
            return;
        }
        let members = self.cliques[c].clone();
        for v in members {
            if blocked.contains(v) {
                continue;
            }
            let mut next_blocked = blocked.clone();
            next_blocked.union_with(&self.adj[v]);
            let mut flipped = Vec::new();
            for &cc in &self.vertex_cliques[v] {
                if !covered[cc] {
                    covered[cc] = true;
                    flipped.push(cc);
                }
            }
            cur_set.push(v);
            let val = &cur_val + &self.weights[v];
            self.run(c + 1, covered, &next_blocked, cur_set, val);
            cur_set.pop();
            for cc in flipped {
                covered[cc] = false;
            }
            if self.truncated {
                return;
            }
        }
    }
}

/// Exact best must-allocate deterministic mechanism: a stable set meeting
/// every maximal clique (type profile) exactly once, of maximum weight.
/// Always feasible: selecting one agent's entire vertex class is such a
/// cover, and the best single-agent cover seeds the search.
pub fn best_exact_cover(
    g: &FeasibilityGraph,
    weights: &[Rat],
    params: &BranchParams<'_>,
) -> SearchOutcome {
    assert_eq!(
        weights.len(),
        g.vertex_count(),
        "weight count differs from vertex count"
    );
    let cliques: Vec<Vec<usize>> = g.cliques().map(|(_, members)| members).collect();
    let mut vertex_cliques = vec![Vec::new(); g.vertex_count()];
    for (c, members) in cliques.iter().enumerate() {
        for &v in members {
            vertex_cliques[v].push(c);
        }
    }
    let adj = closed_neighborhoods(g);

    // Seed with the best constant mechanism (one agent always wins).
    let mut best_set = Vec::new();
    let mut best_val: Option<Rat> = None;
    for i in 0..g.agents() {
        let class: Vec<usize> = (0..g.vertex_count())
            .filter(|&v| g.agent_of(v) == i)
            .collect();
        let val: Rat = class.iter().map(|&v| weights[v].clone()).sum();
        if best_val.as_ref().is_none_or(|b| val > *b) {
            best_val = Some(val);
            best_set = class;
        }
    }

    let mut search = CoverSearch {
        weights,
        cliques,
        vertex_cliques,
        adj,
        nodes: 0,
        guard: params.node_guard,
        truncated: false,
        best_val: best_val.expect("at least two agents"),
        best_set,
    };
    let n_cliques = search.cliques.len();
    search.run(
        0,
        &mut vec![false; n_cliques],
        &Bits::empty(g.vertex_count()),
        &mut Vec::new(),
        Rat::zero(),
    );
    let mut set = search.best_set;
    set.sort_unstable();
    SearchOutcome {
        set,
        value: search.best_val,
        nodes: search.nodes,
        complete: !search.truncated,
    }
}

/// All stable sets of a graph, exponential in general; intended for
/// small-instance oracles and tests only.
pub fn enumerate_stable_sets(g: &dyn GraphOracle) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        g: &dyn GraphOracle,
        n: usize,
        from: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(cur.clone());
        for v in from..n {
            if cur.iter().all(|&u| !g.adjacent(u, v)) {
                cur.push(v);
                rec(g, n, v + 1, cur, out);
                cur.pop();
            }
        }
    }
    rec(g, n, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgraph::DenseGraph;
    use crate::rat::{rat, rat_int};
    use num_traits::One;

    fn cycle(n: usize) -> DenseGraph {
        DenseGraph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn unit_weight_cycles() {
        for (n, alpha) in [(5usize, 2i64), (7, 3), (9, 4)] {
            let g = cycle(n);
            let w = vec![Rat::one(); n];
            let out = max_weight_stable_set(&g, &w, &BranchParams::default());
            assert!(out.complete);
            assert_eq!(out.value, rat_int(alpha));
            // Returned set is stable.
            for i in 0..out.set.len() {
                for j in (i + 1)..out.set.len() {
                    assert!(!g.adjacent(out.set[i], out.set[j]));
                }
            }
        }
    }

    #[test]
    fn weighted_cycle_prefers_heavy_vertex() {
        let g = cycle(5);
        let w = vec![rat_int(3), Rat::one(), Rat::one(), Rat::one(), Rat::one()];
        let out = max_weight_stable_set(&g, &w, &BranchParams::default());
        assert_eq!(out.value, rat_int(4));
        assert!(out.set.contains(&0));
    }

    #[test]
    fn nonpositive_weights_never_selected() {
        let g = cycle(5);
        let w = vec![rat_int(-1), rat_int(0), rat(1, 2), rat_int(-3), rat(1, 3)];
        let out = max_weight_stable_set(&g, &w, &BranchParams::default());
        assert_eq!(out.set, vec![2, 4]);
        assert_eq!(out.value, rat(5, 6));
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        // A fixed irregular graph on 9 vertices.
        let g = DenseGraph::from_edges(
            9,
            &[
                (0, 1),
                (0, 2),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 8),
                (8, 0),
                (1, 5),
                (3, 7),
            ],
        )
        .unwrap();
        let w: Vec<Rat> = (0..9).map(|v| rat(((v * 7) % 5) as i64 - 1, 3)).collect();
        let out = max_weight_stable_set(&g, &w, &BranchParams::default());
        let mut best = Rat::zero();
        for s in enumerate_stable_sets(&g) {
            let val: Rat = s.iter().map(|&v| w[v].clone()).sum();
            if val > best {
                best = val;
            }
        }
        assert_eq!(out.value, best);
    }

    #[test]
    fn node_guard_reports_incomplete() {
        let g = cycle(9);
        let w = vec![Rat::one(); 9];
        let out = max_weight_stable_set(
            &g,
            &w,
            &BranchParams {
                node_guard: 2,
                ..Default::default()
            },
        );
        assert!(!out.complete);
        assert!(out.nodes >= 2);
    }

    #[test]
    fn exact_cover_on_three_binary_agents() {
        let labels: Vec<Vec<String>> = vec![vec!["0".into(), "1".into()]; 3];
        let g = FeasibilityGraph::build(labels).unwrap();
        // Weight 1 on a single agent-1 vertex, 0 elsewhere: the constant
        // winner mechanism for agent 1 collects it.
        let mut w = vec![Rat::zero(); g.vertex_count()];
        w[g.vertex_index(0, &[0, 0])] = Rat::one();
        let out = best_exact_cover(&g, &w, &BranchParams::default());
        assert!(out.complete);
        assert_eq!(out.value, Rat::one());
        // Oracle: filter exhaustive stable sets down to exact covers.
        let cliques: Vec<Vec<usize>> = g.cliques().map(|(_, m)| m).collect();
        let mut best = None::<Rat>;
        for s in enumerate_stable_sets(&g) {
            let covers = cliques.iter().all(|c| c.iter().any(|v| s.contains(v)));
            if !covers {
                continue;
            }
            let val: Rat = s.iter().map(|&v| w[v].clone()).sum();
            if best.as_ref().is_none_or(|b| val > *b) {
                best = Some(val);
            }
        }
        assert_eq!(out.value, best.unwrap());
    }

    #[test]
    fn exact_cover_handles_negative_weights() {
        let labels: Vec<Vec<String>> = vec![vec!["0".into(), "1".into()]; 3];
        let g = FeasibilityGraph::build(labels).unwrap();
        // Everything costs -1: the best cover still exists (a constant
        // mechanism covering all 8 cliques with 4 vertices).
        let w = vec![-Rat::one(); g.vertex_count()];
        let out = best_exact_cover(&g, &w, &BranchParams::default());
        assert!(out.complete);
        assert_eq!(out.value, rat_int(-4));
        assert_eq!(out.set.len(), 4);
        let agent = g.agent_of(out.set[0]);
        assert!(out.set.iter().all(|&v| g.agent_of(v) == agent));
    }
}
