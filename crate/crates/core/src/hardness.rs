//! Reduction from maximum stable set to three-agent deterministic design.
//!
//! A source graph with vertex set V and edge set E is rewritten as a weight
//! vector for three agents with type spaces Θ_1 = E and Θ_2 = Θ_3 = V. Every
//! source edge e = vv' (v before v' in the input vertex order) contributes an
//! induced four-vertex path in the feasibility graph,
//!
//! ```text
//!   (·,v,v) -- (e,v,·) -- (e,·,v') -- (·,v',v')
//! ```
//!
//! whose vertices carry weight 1; all other vertices carry weight 0. The
//! source admits a stable set of size k̂ exactly when the reduced instance
//! admits a deterministic mechanism of value k̂ + |E|, provided every source
//! vertex lies on an edge: an isolated vertex enlarges source stable sets
//! without enlarging the gadget, so the correspondence is only claimed for
//! sources without isolated vertices (see
//! `isolated_source_vertices_break_the_correspondence`).

use std::collections::BTreeSet;

use crate::env::{Instance, WeightVector};
use crate::fgraph::{FeasibilityGraph, GraphOracle};
use crate::rat::rat_int;
use crate::{Error, Result};

/// Vertex-count bound for `verify_reduction`; both brute forces are
/// exponential in the source size.
pub const DEFAULT_SOURCE_GUARD: usize = 7;

/// A simple undirected graph given by labeled vertices and an edge list.
#[derive(Debug, Clone)]
pub struct SourceGraph {
    labels: Vec<String>,
    /// Each edge stored with the earlier vertex first (input order).
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<bool>>,
}

impl SourceGraph {
    pub fn new(labels: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::invalid("source graph needs at least one vertex"));
        }
        let mut seen = BTreeSet::new();
        let mut adj = vec![vec![false; n]; n];
        let mut ordered = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::invalid(format!(
                    "duplicate edge {}-{}",
                    labels[key.0], labels[key.1]
                )));
            }
            adj[u][v] = true;
            adj[v][u] = true;
            ordered.push(key);
        }
        Ok(SourceGraph {
            labels,
            edges: ordered,
            adj,
        })
    }

    /// Parses `u v` pairs, one edge per line; vertices are named by their
    /// tokens and ordered by first appearance. Blank lines and `#` comments
    /// are skipped.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index = std::collections::HashMap::new();
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(Error::parse(format!(
                    "line {}: expected `u v`, got {:?}",
                    lineno + 1,
                    line
                )));
            }
            let mut ids = [0usize; 2];
            for (slot, tok) in ids.iter_mut().zip(&tokens) {
                *slot = *index.entry(tok.to_string()).or_insert_with(|| {
                    labels.push(tok.to_string());
                    labels.len() - 1
                });
            }
            edges.push((ids[0], ids[1]));
        }
        if labels.is_empty() {
            return Err(Error::parse("edge list is empty"));
        }
        SourceGraph::new(labels, edges)
    }

    /// Parses `{"n": 4, "edges": [[0,1],[1,2]]}`; vertices are `0..n-1` in
    /// index order.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Dto {
            n: usize,
            edges: Vec<(usize, usize)>,
        }
        let dto: Dto =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("source graph: {e}")))?;
        let labels = (0..dto.n).map(|i| i.to_string()).collect();
        SourceGraph::new(labels, dto.edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Edges with the earlier vertex first.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u][v]
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&v| self.adj[v].iter().all(|&a| !a))
            .collect()
    }

    /// Exhaustive maximum stable set by bitmask enumeration. Only sensible
    /// for small graphs; `verify_reduction` guards the size.
    pub fn max_stable_set(&self) -> (usize, Vec<usize>) {
        let n = self.vertex_count();
        assert!(n <= 20, "bitmask enumeration limited to 20 vertices");
        let mut nbr = vec![0u32; n];
        for (u, row) in nbr.iter_mut().enumerate() {
            for v in 0..n {
                if self.adj[u][v] {
                    *row |= 1 << v;
                }
            }
        }
        let mut best = 0u32;
        for mask in 0u32..1 << n {
            if mask.count_ones() <= best.count_ones() {
                continue;
            }
            let stable = (0..n).all(|u| mask & (1 << u) == 0 || mask & nbr[u] == 0);
            if stable {
                best = mask;
            }
        }
        let set: Vec<usize> = (0..n).filter(|&u| best & (1 << u) != 0).collect();
        (set.len(), set)
    }
}

/// The four-vertex path the reduction builds for one source edge.
#[derive(Debug, Clone)]
pub struct PathGadget {
    /// Source edge (earlier vertex first).
    pub edge: (usize, usize),
    /// Feasibility-graph ids of (·,v,v) and (·,v',v').
    pub endpoints: (usize, usize),
    /// Feasibility-graph ids of (e,v,·) and (e,·,v').
    pub interior: (usize, usize),
}

/// A reduced three-agent instance together with its gadget bookkeeping.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    source: SourceGraph,
    k_hat: usize,
    graph: FeasibilityGraph,
    weights: WeightVector,
    paths: Vec<PathGadget>,
    /// Per feasibility-graph vertex: carries weight 1?
    in_gadget: Vec<bool>,
}

impl ReductionInstance {
    pub fn source(&self) -> &SourceGraph {
        &self.source
    }

    pub fn graph(&self) -> &FeasibilityGraph {
        &self.graph
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn paths(&self) -> &[PathGadget] {
        &self.paths
    }

    pub fn k_hat(&self) -> usize {
        self.k_hat
    }

    /// Target value for the reduced decision problem: k̂ + |E|.
    pub fn k(&self) -> usize {
        self.k_hat + self.source.edge_count()
    }

    /// Whether a feasibility-graph vertex carries weight 1.
    pub fn carries_weight(&self, v: usize) -> bool {
        self.in_gadget[v]
    }

    /// Total gadget weight of a vertex set.
    pub fn gadget_weight(&self, set: &[usize]) -> usize {
        set.iter().filter(|&&v| self.in_gadget[v]).count()
    }

    /// The instance in the weight-file form the solvers consume.
    pub fn to_instance(&self) -> Instance {
        Instance::Weights(self.weights.clone())
    }
}

/// Builds the reduced instance for a source graph and target k̂.
pub fn reduce(source: &SourceGraph, k_hat: usize) -> Result<ReductionInstance> {
    if source.edge_count() == 0 {
        return Err(Error::invalid(
            "reduction needs at least one source edge (the edge set is a type space)",
        ));
    }
    let edge_labels: Vec<String> = source
        .edges()
        .iter()
        .map(|&(u, v)| format!("{}-{}", source.labels[u], source.labels[v]))
        .collect();
    let labels = vec![edge_labels, source.labels.clone(), source.labels.clone()];
    let graph = FeasibilityGraph::build(labels)?;

    let mut paths = Vec::with_capacity(source.edge_count());
    let mut in_gadget = vec![false; graph.vertex_count()];
    for (ei, &(v, vp)) in source.edges().iter().enumerate() {
        let a = graph.vertex_index(0, &[v, v]);
        let b = graph.vertex_index(2, &[ei, v]);
        let c = graph.vertex_index(1, &[ei, vp]);
        let d = graph.vertex_index(0, &[vp, vp]);
        debug_assert!(graph.adjacent(a, b) && graph.adjacent(b, c) && graph.adjacent(c, d));
        debug_assert!(!graph.adjacent(a, c) && !graph.adjacent(b, d) && !graph.adjacent(a, d));
        for v in [a, b, c, d] {
            in_gadget[v] = true;
        }
        paths.push(PathGadget {
            edge: (v, vp),
            endpoints: (a, d),
            interior: (b, c),
        });
    }

    let entries = (0..graph.vertex_count())
        .filter(|&v| in_gadget[v])
        .map(|v| {
            let vert = graph.vertex(v);
            (vert.agent, vert.theta_minus.clone(), rat_int(1))
        })
        .collect();
    let weights = WeightVector::new(graph.labels().to_vec(), entries)?;

    Ok(ReductionInstance {
        source: source.clone(),
        k_hat,
        graph,
        weights,
        paths,
        in_gadget,
    })
}

/// Rewrites a stable set so that no path keeps both of its endpoints,
/// without changing its gadget weight.
///
/// Weight-0 members are dropped first (they carry nothing and would block
/// the swaps); then, while some path holds both endpoints, the later
/// endpoint is replaced by its adjacent interior vertex. Inside the gadget
/// that interior vertex touches only the other interior vertex of the same
/// path and the endpoint it replaces, so stability survives each swap.
pub fn normalize_endpoints(inst: &ReductionInstance, stable: &[usize]) -> Result<Vec<usize>> {
    let g = inst.graph();
    for &v in stable {
        if v >= g.vertex_count() {
            return Err(Error::invalid(format!("vertex id {v} out of range")));
        }
    }
    for (i, &u) in stable.iter().enumerate() {
        for &v in &stable[i + 1..] {
            if u == v || g.adjacent(u, v) {
                return Err(Error::invalid(format!(
                    "input set is not stable: {} and {}",
                    g.format_vertex(u),
                    g.format_vertex(v)
                )));
            }
        }
    }
    let mut set: BTreeSet<usize> = stable
        .iter()
        .copied()
        .filter(|&v| inst.carries_weight(v))
        .collect();
    loop {
        let violated = inst
            .paths()
            .iter()
            .find(|p| set.contains(&p.endpoints.0) && set.contains(&p.endpoints.1));
        match violated {
            None => break,
            Some(p) => {
                set.remove(&p.endpoints.1);
                set.insert(p.interior.1);
            }
        }
    }
    let out: Vec<usize> = set.into_iter().collect();
    for (i, &u) in out.iter().enumerate() {
        for &v in &out[i + 1..] {
            assert!(!g.adjacent(u, v), "endpoint swap must preserve stability");
        }
    }
    debug_assert_eq!(inst.gadget_weight(&out), inst.gadget_weight(stable));
    Ok(out)
}

/// Exact maximum independent set on an adjacency-mask graph; plain
/// branch-and-bound on the lowest undecided vertex with a cardinality bound.
fn exact_max_independent(nbr: &[u64]) -> usize {
    fn go(nbr: &[u64], avail: u64, cur: usize, best: &mut usize) {
        if cur + avail.count_ones() as usize <= *best {
            return;
        }
        if avail == 0 {
            *best = cur;
            return;
        }
        let v = avail.trailing_zeros() as usize;
        let bit = 1u64 << v;
        go(nbr, avail & !(bit | nbr[v]), cur + 1, best);
        go(nbr, avail & !bit, cur, best);
    }
    let mut best = 0;
    let all = if nbr.len() == 64 {
        u64::MAX
    } else {
        (1u64 << nbr.len()) - 1
    };
    go(nbr, all, 0, &mut best);
    best
}

/// Maximum gadget weight over all stable sets of the reduced graph.
///
/// Weight-0 vertices never change the total, so the search runs on the
/// subgraph induced by the weight-1 vertices. This is a brute force of its
/// own; it shares nothing with the solver module.
pub fn reduced_optimum(inst: &ReductionInstance) -> usize {
    let g = inst.graph();
    let members: Vec<usize> = (0..g.vertex_count())
        .filter(|&v| inst.carries_weight(v))
        .collect();
    assert!(
        members.len() <= 64,
        "gadget larger than the verification guard allows"
    );
    let mut nbr = vec![0u64; members.len()];
    for (i, &u) in members.iter().enumerate() {
        for (j, &v) in members.iter().enumerate() {
            if i != j && g.adjacent(u, v) {
                nbr[i] |= 1 << j;
            }
        }
    }
    exact_max_independent(&nbr)
}

/// Brute-forces both sides of the reduction and reports whether they agree:
/// the source has a stable set of size ≥ k̂ exactly when the reduced graph
/// has a stable set of gadget weight ≥ k̂ + |E|.
pub fn verify_reduction(source: &SourceGraph, k_hat: usize) -> Result<bool> {
    if source.vertex_count() > DEFAULT_SOURCE_GUARD {
        return Err(Error::guard(format!(
            "verification brute-forces both sides; {} source vertices exceed the bound of {}",
            source.vertex_count(),
            DEFAULT_SOURCE_GUARD
        )));
    }
    let (alpha, _) = source.max_stable_set();
    let inst = reduce(source, k_hat)?;
    let left = alpha >= k_hat;
    let right = reduced_optimum(&inst) >= inst.k();
    Ok(left == right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mech::Mode;
    use crate::rat::rat_int;
    use crate::solve::{solve_deterministic, SolveOptions, SolveStatus};

    fn triangle() -> SourceGraph {
        SourceGraph::from_edge_list("a b\nb c\na c").unwrap()
    }

    #[test]
    fn edge_list_orders_vertices_by_first_appearance() {
        let g = triangle();
        assert_eq!(g.labels(), &["a", "b", "c"]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(g.vertex_count(), 3);
        assert!(g.adjacent(0, 2) && g.adjacent(2, 0));
        assert!(g.isolated_vertices().is_empty());
    }

    #[test]
    fn json_and_validation_errors() {
        let g = SourceGraph::from_json("{\"n\": 3, \"edges\": [[0,1],[1,2]]}").unwrap();
        assert_eq!(g.labels(), &["0", "1", "2"]);
        assert_eq!(g.edge_count(), 2);
        assert!(SourceGraph::from_json("{\"n\": 2, \"edges\": [[0,2]]}").is_err());
        assert!(SourceGraph::from_edge_list("a a").is_err());
        assert!(SourceGraph::from_edge_list("a b\nb a").is_err());
        assert!(SourceGraph::from_edge_list("a\n").is_err());
        assert!(SourceGraph::from_edge_list("# only comments\n").is_err());
    }

    #[test]
    fn triangle_reduction_shape() {
        let inst = reduce(&triangle(), 1).unwrap();
        let sizes = inst.graph().type_sizes();
        assert_eq!(sizes, &[3, 3, 3]);
        assert_eq!(inst.paths().len(), 3);
        assert_eq!(inst.k(), 4);
        // Paths of distinct edges share endpoints only.
        let weight_count = (0..inst.graph().vertex_count())
            .filter(|&v| inst.carries_weight(v))
            .count();
        // 3 endpoint vertices (one per source vertex) + 2 interior per edge.
        assert_eq!(weight_count, 3 + 2 * 3);
    }

    #[test]
    fn single_edge_is_one_unit_path() {
        let g = SourceGraph::from_edge_list("u v").unwrap();
        let inst = reduce(&g, 1).unwrap();
        assert_eq!(inst.k(), 2);
        assert_eq!(inst.paths().len(), 1);
        let p = &inst.paths()[0];
        let fg = inst.graph();
        assert!(fg.adjacent(p.endpoints.0, p.interior.0));
        assert!(fg.adjacent(p.interior.0, p.interior.1));
        assert!(fg.adjacent(p.interior.1, p.endpoints.1));
        assert!(!fg.adjacent(p.endpoints.0, p.endpoints.1));
        assert_eq!(reduced_optimum(&inst), 2);
    }

    #[test]
    fn shared_endpoint_belongs_to_both_paths() {
        // Path graph a - b - c: vertex b is the later endpoint of a-b and the
        // earlier endpoint of b-c.
        let g = SourceGraph::from_edge_list("a b\nb c").unwrap();
        let inst = reduce(&g, 2).unwrap();
        assert_eq!(inst.k(), 4);
        let mid0 = inst.paths()[0].endpoints.1;
        let mid1 = inst.paths()[1].endpoints.0;
        assert_eq!(mid0, mid1);
        assert_eq!(inst.graph().vertex(mid0).theta_minus, vec![1, 1]);
    }

    #[test]
    fn empty_edge_set_is_unsupported() {
        let g = SourceGraph::new(vec!["a".into(), "b".into()], vec![]).unwrap();
        assert!(reduce(&g, 1).is_err());
    }

    #[test]
    fn verify_matches_brute_force_on_named_cases() {
        // Triangle: alpha = 1; reduced optimum 1 + 3 = 4.
        assert!(verify_reduction(&triangle(), 1).unwrap());
        // Both sides fail at 2: alpha = 1 < 2 and 4 < 5.
        assert!(verify_reduction(&triangle(), 2).unwrap());
        let inst = reduce(&triangle(), 1).unwrap();
        assert_eq!(reduced_optimum(&inst), 4);
        // 4-cycle: alpha = 2; reduced optimum 2 + 4 = 6.
        let c4 = SourceGraph::from_edge_list("a b\nb c\nc d\nd a").unwrap();
        assert!(verify_reduction(&c4, 2).unwrap());
        assert_eq!(reduced_optimum(&reduce(&c4, 2).unwrap()), 6);
        // 5-cycle across the whole k-range.
        let c5 = SourceGraph::from_edge_list("a b\nb c\nc d\nd e\ne a").unwrap();
        for k_hat in 1..=5 {
            assert!(verify_reduction(&c5, k_hat).unwrap());
        }
    }

    #[test]
    fn verify_guard_trips_past_seven_vertices() {
        let text: String = (0..8)
            .map(|i| format!("v{} v{}\n", i, (i + 1) % 8))
            .collect();
        let c8 = SourceGraph::from_edge_list(&text).unwrap();
        assert!(matches!(
            verify_reduction(&c8, 2),
            Err(Error::GuardExceeded(_))
        ));
    }

    #[test]
    fn isolated_source_vertices_break_the_correspondence() {
        // One edge plus an isolated vertex: the source reaches a stable set
        // of size 2, but the gadget never sees the isolated vertex, so the
        // reduced optimum stays at 1 + 1. The reduction is only claimed for
        // sources whose vertices all lie on edges.
        let g = SourceGraph::new(vec!["u".into(), "v".into(), "w".into()], vec![(0, 1)]).unwrap();
        assert_eq!(g.isolated_vertices(), vec![2]);
        assert_eq!(g.max_stable_set().0, 2);
        assert_eq!(reduced_optimum(&reduce(&g, 2).unwrap()), 2);
        assert!(!verify_reduction(&g, 2).unwrap());
        assert!(verify_reduction(&g, 1).unwrap());
        assert!(verify_reduction(&g, 3).unwrap());
    }

    #[test]
    fn solver_agrees_with_dedicated_brute_force() {
        let inst = reduce(&triangle(), 1).unwrap();
        let report = solve_deterministic(
            &inst.to_instance(),
            Mode::MayWithhold,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        assert_eq!(report.objective, rat_int(4));
    }

    #[test]
    fn endpoint_swap_keeps_weight_and_stability() {
        // On a single edge, take both endpoints of its path: the swap must
        // trade the later endpoint for the adjacent interior vertex.
        let g = SourceGraph::from_edge_list("u v").unwrap();
        let inst = reduce(&g, 1).unwrap();
        let p = inst.paths()[0].clone();
        let both = vec![p.endpoints.0, p.endpoints.1];
        let fixed = normalize_endpoints(&inst, &both).unwrap();
        assert_eq!(inst.gadget_weight(&fixed), 2);
        assert_eq!(fixed, {
            let mut v = vec![p.endpoints.0, p.interior.1];
            v.sort_unstable();
            v
        });
        // A weight-0 vertex is dropped, not kept: weight is what the swap
        // preserves.
        let fg = inst.graph();
        let zero = (0..fg.vertex_count())
            .find(|&v| !inst.carries_weight(v) && !fg.adjacent(v, p.endpoints.0))
            .unwrap();
        let with_zero = vec![p.endpoints.0, zero];
        let fixed = normalize_endpoints(&inst, &with_zero).unwrap();
        assert_eq!(inst.gadget_weight(&fixed), 1);
        // Non-stable input is rejected.
        assert!(normalize_endpoints(&inst, &[p.endpoints.0, p.interior.0]).is_err());
    }

    #[test]
    fn endpoint_swap_resolves_chained_paths() {
        // Path a-b-c: {(.,a,a), (.,b,b), (.,c,c)} holds both endpoints of
        // both gadget paths; two swaps later every path keeps one.
        let g = SourceGraph::from_edge_list("a b\nb c").unwrap();
        let inst = reduce(&g, 1).unwrap();
        let ends: Vec<usize> = vec![
            inst.paths()[0].endpoints.0,
            inst.paths()[0].endpoints.1,
            inst.paths()[1].endpoints.1,
        ];
        let fixed = normalize_endpoints(&inst, &ends).unwrap();
        assert_eq!(inst.gadget_weight(&fixed), 3);
        for p in inst.paths() {
            let both = fixed.contains(&p.endpoints.0) && fixed.contains(&p.endpoints.1);
            assert!(!both);
        }
    }
}
