//! The feasibility graph of a type-space shape.
//!
//! Vertices are pairs (agent i, reports of the others). Two vertices for
//! distinct agents i and j are adjacent exactly when some full type profile
//! restricts to both report vectors, i.e. when they agree on every agent
//! other than i and j. Same-agent vertices are never adjacent.
//!
//! Structure exploited throughout:
//! - type profiles correspond bijectively to maximal cliques, each of
//!   exactly n vertices (one per agent);
//! - an adjacent pair lies in a unique maximal clique (the profile gluing
//!   their report vectors);
//! - if a vertex of agent i is adjacent to two non-adjacent vertices, those
//!   two carry different types for agent i. The odd-hole search uses this as
//!   a cheap filter before the full induced-path check.
//!
//! Adjacency is computed on demand from indices; the graph is never stored
//! as an explicit matrix except for small helper graphs (`DenseGraph`).

use std::fmt::Write as _;

use crate::env::TypeProduct;
use crate::{Error, Result};

/// Minimal adjacency interface shared by the structural feasibility graph
/// and explicit helper graphs (complements, reduction sources, subgraphs).
pub trait GraphOracle {
    fn vertex_count(&self) -> usize;
    fn adjacent(&self, u: usize, v: usize) -> bool;
    fn neighbors(&self, u: usize) -> Vec<usize>;
    /// Cheap necessary condition for `a` and `b` to be non-adjacent given a
    /// common neighbor `mid`. Returning `false` certifies `a ~ b`.
    fn may_be_nonadjacent(&self, _a: usize, _mid: usize, _b: usize) -> bool {
        true
    }
}

/// A decoded vertex: the agent plus the others' type indices in agent order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub agent: usize,
    pub theta_minus: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FeasibilityGraph {
    labels: Vec<Vec<String>>,
    sizes: Vec<usize>,
    /// First vertex index per agent block.
    offsets: Vec<usize>,
    n_vertices: usize,
}

impl FeasibilityGraph {
    /// Builds the graph for the given labeled type spaces. Requires n >= 2
    /// agents; type spaces of size 1 are admitted so that reduction gadgets
    /// with a single edge type remain representable.
    pub fn build(labels: Vec<Vec<String>>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 agents, got {n}")));
        }
        let sizes: Vec<usize> = labels.iter().map(|s| s.len()).collect();
        for (i, &s) in sizes.iter().enumerate() {
            if s == 0 {
                return Err(Error::invalid(format!(
                    "agent {} has an empty type space",
                    i + 1
                )));
            }
        }
        let mut offsets = Vec::with_capacity(n);
        let mut acc = 0usize;
        for i in 0..n {
            offsets.push(acc);
            let block: usize = sizes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, &s)| s)
                .product();
            acc = acc
                .checked_add(block)
                .ok_or_else(|| Error::guard("vertex count overflows"))?;
        }
        Ok(FeasibilityGraph {
            labels,
            sizes,
            offsets,
            n_vertices: acc,
        })
    }

    pub fn agents(&self) -> usize {
        self.sizes.len()
    }

    pub fn type_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn labels(&self) -> &[Vec<String>] {
        &self.labels
    }

    pub fn edge_count(&self) -> usize {
        // Each unordered agent pair contributes one edge per full profile.
        let n = self.agents();
        let prod: usize = self.sizes.iter().product();
        n * (n - 1) / 2 * prod
    }

    pub fn agent_of(&self, v: usize) -> usize {
        debug_assert!(v < self.n_vertices);
        match self.offsets.binary_search(&v) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// Vertex index for (agent, theta_minus). Mixed-radix, last coordinate
    /// fastest, consistent with `TypeProduct::minus` iteration order.
    pub fn vertex_index(&self, agent: usize, theta_minus: &[usize]) -> usize {
        debug_assert_eq!(theta_minus.len(), self.agents() - 1);
        let mut idx = 0usize;
        let mut pos = 0usize;
        for k in 0..self.agents() {
            if k == agent {
                continue;
            }
            debug_assert!(theta_minus[pos] < self.sizes[k]);
            idx = idx * self.sizes[k] + theta_minus[pos];
            pos += 1;
        }
        self.offsets[agent] + idx
    }

    pub fn vertex(&self, v: usize) -> Vertex {
        let agent = self.agent_of(v);
        let mut rem = v - self.offsets[agent];
        let mut tm = vec![0usize; self.agents() - 1];
        let mut pos = self.agents() - 1;
        for k in (0..self.agents()).rev() {
            if k == agent {
                continue;
            }
            pos -= 1;
            tm[pos] = rem % self.sizes[k];
            rem /= self.sizes[k];
        }
        Vertex {
            agent,
            theta_minus: tm,
        }
    }

    /// Type of agent `k` recorded at vertex `v`; `None` when `v` belongs to
    /// agent `k` itself (a vertex carries no type for its own agent).
    pub fn coord(&self, v: usize, k: usize) -> Option<usize> {
        let vert = self.vertex(v);
        if vert.agent == k {
            None
        } else {
            let pos = if k < vert.agent { k } else { k - 1 };
            Some(vert.theta_minus[pos])
        }
    }

    /// The clique of a full type profile: one vertex per agent.
    pub fn clique_of_profile(&self, theta: &[usize]) -> Vec<usize> {
        debug_assert_eq!(theta.len(), self.agents());
        (0..self.agents())
            .map(|i| self.vertex_index(i, &crate::env::profile_minus(theta, i)))
            .collect()
    }

    /// The unique full profile whose clique contains the adjacent pair
    /// (u, v): the glued report vector.
    pub fn profile_of_edge(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        if !self.adjacent(u, v) {
            return Err(Error::invalid("vertices are not adjacent"));
        }
        let a = self.vertex(u);
        let n = self.agents();
        let mut theta = vec![0usize; n];
        for k in 0..n {
            theta[k] = if k == a.agent {
                self.coord(v, k)
                    .expect("adjacent vertices have distinct agents")
            } else {
                self.coord(u, k)
                    .expect("coordinate defined for k != agent(u)")
            };
        }
        Ok(theta)
    }

    /// Iterates all (profile, clique) pairs in lexicographic profile order.
    pub fn cliques(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>)> + '_ {
        TypeProduct::of_sizes(self.sizes.clone()).map(|theta| {
            let clique = self.clique_of_profile(&theta);
            (theta, clique)
        })
    }

    pub fn format_vertex(&self, v: usize) -> String {
        let vert = self.vertex(v);
        let mut parts = Vec::with_capacity(self.agents() - 1);
        let mut pos = 0usize;
        for k in 0..self.agents() {
            if k == vert.agent {
                continue;
            }
            parts.push(self.labels[k][vert.theta_minus[pos]].clone());
            pos += 1;
        }
        format!("{}:({})", vert.agent + 1, parts.join(","))
    }

    /// Parses the `format_vertex` form back into a vertex index.
    pub fn parse_vertex(&self, text: &str) -> Result<usize> {
        let (agent_s, rest) = text
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("vertex id `{text}`: expected `i:(l1,...)`")))?;
        let agent: usize = agent_s
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("vertex id `{text}`: bad agent")))?;
        if agent == 0 || agent > self.agents() {
            return Err(Error::invalid(format!(
                "vertex id `{text}`: agent out of range"
            )));
        }
        let agent = agent - 1;
        let inner = rest
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::parse(format!("vertex id `{text}`: expected `i:(l1,...)`")))?;
        let parts: Vec<&str> = if inner.is_empty() {
            vec![]
        } else {
            inner.split(',').collect()
        };
        if parts.len() != self.agents() - 1 {
            return Err(Error::invalid(format!(
                "vertex id `{text}`: {} coordinates, expected {}",
                parts.len(),
                self.agents() - 1
            )));
        }
        let mut tm = Vec::with_capacity(parts.len());
        let mut pos = 0usize;
        for k in 0..self.agents() {
            if k == agent {
                continue;
            }
            let label = parts[pos].trim();
            let t = self.labels[k]
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| {
                    Error::invalid(format!(
                        "vertex id `{text}`: unknown label `{label}` for agent {}",
                        k + 1
                    ))
                })?;
            tm.push(t);
            pos += 1;
        }
        Ok(self.vertex_index(agent, &tm))
    }
}

impl GraphOracle for FeasibilityGraph {
    fn vertex_count(&self) -> usize {
        self.n_vertices
    }

    fn adjacent(&self, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        let i = self.agent_of(u);
        let j = self.agent_of(v);
        if i == j {
            return false;
        }
        for k in 0..self.agents() {
            if k == i || k == j {
                continue;
            }
            if self.coord(u, k) != self.coord(v, k) {
                return false;
            }
        }
        true
    }

    fn neighbors(&self, u: usize) -> Vec<usize> {
        let i = self.agent_of(u);
        let n = self.agents();
        let mut out = Vec::with_capacity((n - 1) * self.sizes[i]);
        for j in 0..n {
            if j == i {
                continue;
            }
            // theta_minus for agent j: coordinates copied from u except the
            // slot for agent i, which ranges over i's whole type space.
            let mut tm = vec![0usize; n - 1];
            let mut pos = 0usize;
            let mut i_slot = 0usize;
            for k in 0..n {
                if k == j {
                    continue;
                }
                if k == i {
                    i_slot = pos;
                } else {
                    tm[pos] = self.coord(u, k).expect("k != agent(u) here");
                }
                pos += 1;
            }
            for t in 0..self.sizes[i] {
                tm[i_slot] = t;
                out.push(self.vertex_index(j, &tm));
            }
        }
        out
    }

    fn may_be_nonadjacent(&self, a: usize, mid: usize, b: usize) -> bool {
        // If a and b agree on mid's agent's type, gluing forces a ~ b.
        let m = self.agent_of(mid);
        match (self.coord(a, m), self.coord(b, m)) {
            (Some(x), Some(y)) => x != y,
            _ => true,
        }
    }
}

/// Explicit adjacency-matrix graph for complements, reduction sources and
/// other small helper graphs.
#[derive(Debug, Clone)]
pub struct DenseGraph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl DenseGraph {
    pub fn new(n: usize) -> Self {
        DenseGraph {
            n,
            adj: vec![vec![false; n]; n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = DenseGraph::new(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            g.adj[u][v] = true;
            g.adj[v][u] = true;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        self.adj[u][v] = true;
        self.adj[v][u] = true;
    }

    /// Explicit complement of any oracle graph.
    pub fn complement_of(g: &impl GraphOracle) -> Self {
        let n = g.vertex_count();
        let mut out = DenseGraph::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if !g.adjacent(u, v) {
                    out.add_edge(u, v);
                }
            }
        }
        out
    }

    /// Materializes any oracle graph (used to snapshot structural graphs).
    pub fn copy_of(g: &impl GraphOracle) -> Self {
        let n = g.vertex_count();
        let mut out = DenseGraph::new(n);
        for u in 0..n {
            for v in (u + 1)..n {
                if g.adjacent(u, v) {
                    out.add_edge(u, v);
                }
            }
        }
        out
    }

    /// Induced subgraph on `keep`; returns the mapping from new to old ids.
    pub fn induced(g: &impl GraphOracle, keep: &[usize]) -> (Self, Vec<usize>) {
        let mut out = DenseGraph::new(keep.len());
        for (a, &u) in keep.iter().enumerate() {
            for (b, &v) in keep.iter().enumerate().skip(a + 1) {
                if g.adjacent(u, v) {
                    out.add_edge(a, b);
                }
            }
        }
        (out, keep.to_vec())
    }
}

impl GraphOracle for DenseGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u][v]
    }

    fn neighbors(&self, u: usize) -> Vec<usize> {
        (0..self.n).filter(|&v| self.adj[u][v]).collect()
    }
}

/// Search mode: stop at the first hole or collect all of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HoleSearch {
    FirstOnly,
    All,
}

pub const DEFAULT_HOLE_GUARD: usize = 5_000;

/// Finds induced odd cycles of length 5..=max_len (an "odd hole" here always
/// means length at least 5). Returned cycles are canonical: smallest vertex
/// first, smaller neighbor second; each hole is reported exactly once.
///
/// DFS over induced paths rooted at the cycle's minimum vertex. A path may
/// only grow with vertices non-adjacent to everything but its tip; the
/// common-neighbor type filter rejects most non-extensions in O(1) before
/// the full scan.
pub fn find_odd_holes<G: GraphOracle>(
    g: &G,
    max_len: usize,
    mode: HoleSearch,
    guard: usize,
) -> Result<Vec<Vec<usize>>> {
    if g.vertex_count() > guard {
        return Err(Error::guard(format!(
            "hole search on {} vertices exceeds guard {guard}",
            g.vertex_count()
        )));
    }
    if max_len < 5 {
        return Ok(Vec::new());
    }
    let n = g.vertex_count();
    let mut found = Vec::new();
    let mut path = Vec::with_capacity(max_len);
    let mut in_path = vec![false; n];
    for root in 0..n {
        path.push(root);
        in_path[root] = true;
        let stop = extend(g, root, &mut path, &mut in_path, max_len, mode, &mut found);
        in_path[root] = false;
        path.pop();
        if stop {
            break;
        }
    }
    for hole in &mut found {
        debug_assert!(is_induced_odd_cycle(g, hole));
        *hole = canonical_cycle(hole);
    }
    found.sort();
    Ok(found)
}

fn extend<G: GraphOracle>(
    g: &G,
    root: usize,
    path: &mut Vec<usize>,
    in_path: &mut [bool],
    max_len: usize,
    mode: HoleSearch,
    found: &mut Vec<Vec<usize>>,
) -> bool {
    let tip = *path.last().unwrap();
    let len = path.len();
    for w in g.neighbors(tip) {
        if w <= root || in_path[w] {
            continue;
        }
        if len >= 2 && !g.may_be_nonadjacent(path[len - 2], tip, w) {
            // w would be forced adjacent to the previous vertex.
            continue;
        }
        if len >= 2 && g.adjacent(w, root) {
            // Closing edge: cycle = path + w.
            let cycle_len = len + 1;
            if cycle_len >= 5 && cycle_len % 2 == 1 && path[1] < w {
                let induced = path[1..len - 1].iter().all(|&p| !g.adjacent(w, p));
                if induced {
                    let mut cycle = path.clone();
                    cycle.push(w);
                    cycle = canonical_cycle(&cycle);
                    debug_assert!(is_induced_odd_cycle(g, &cycle));
                    found.push(cycle);
                    if mode == HoleSearch::FirstOnly {
                        return true;
                    }
                }
            }
            // Past the second slot, root neighbors cannot sit mid-path.
            continue;
        }
        if len + 2 > max_len {
            continue;
        }
        let induced = (1..len.saturating_sub(1)).all(|k| !g.adjacent(w, path[k]));
        if !induced {
            continue;
        }
        path.push(w);
        in_path[w] = true;
        let stop = extend(g, root, path, in_path, max_len, mode, found);
        in_path[w] = false;
        path.pop();
        if stop {
            return true;
        }
    }
    false
}

/// Exact validity check for a cycle reported by the search (also usable on
/// external inputs): odd length >= 5, consecutive adjacent, chords absent.
pub fn is_induced_odd_cycle<G: GraphOracle>(g: &G, cycle: &[usize]) -> bool {
    let k = cycle.len();
    if k < 5 || k.is_multiple_of(2) {
        return false;
    }
    let mut seen = std::collections::HashSet::new();
    for &v in cycle {
        if v >= g.vertex_count() || !seen.insert(v) {
            return false;
        }
    }
    for a in 0..k {
        for b in (a + 1)..k {
            let consecutive = b == a + 1 || (a == 0 && b == k - 1);
            if g.adjacent(cycle[a], cycle[b]) != consecutive {
                return false;
            }
        }
    }
    true
}

/// Rotates/reflects a cycle so the minimum vertex comes first and its
/// smaller neighbor second.
pub fn canonical_cycle(cycle: &[usize]) -> Vec<usize> {
    let k = cycle.len();
    let (min_pos, _) = cycle.iter().enumerate().min_by_key(|&(_, v)| *v).unwrap();
    let fwd = cycle[(min_pos + 1) % k];
    let bwd = cycle[(min_pos + k - 1) % k];
    let mut out = Vec::with_capacity(k);
    if fwd <= bwd {
        for s in 0..k {
            out.push(cycle[(min_pos + s) % k]);
        }
    } else {
        for s in 0..k {
            out.push(cycle[(min_pos + k - s) % k]);
        }
    }
    out
}

/// Connected components of the subgraph induced by `subset`, each sorted,
/// components ordered by smallest member.
pub fn components_of<G: GraphOracle>(g: &G, subset: &[usize]) -> Vec<Vec<usize>> {
    let mut subset: Vec<usize> = subset.to_vec();
    subset.sort_unstable();
    subset.dedup();
    let mut seen = vec![false; subset.len()];
    let mut comps = Vec::new();
    for start in 0..subset.len() {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(a) = stack.pop() {
            comp.push(subset[a]);
            for b in 0..subset.len() {
                if !seen[b] && g.adjacent(subset[a], subset[b]) {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Graphviz rendering; vertex names are the `i:(l1,...)` ids.
pub fn to_dot(g: &FeasibilityGraph) -> String {
    let mut out = String::from("graph feasibility {\n");
    for v in 0..g.vertex_count() {
        writeln!(out, "  \"{}\";", g.format_vertex(v)).unwrap();
    }
    for u in 0..g.vertex_count() {
        for v in (u + 1)..g.vertex_count() {
            if g.adjacent(u, v) {
                writeln!(
                    out,
                    "  \"{}\" -- \"{}\";",
                    g.format_vertex(u),
                    g.format_vertex(v)
                )
                .unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

/// JSON adjacency export: vertex id list plus index-pair edge list.
pub fn to_json_adjacency(g: &FeasibilityGraph) -> String {
    #[derive(serde::Serialize)]
    struct Dto {
        vertices: Vec<String>,
        edges: Vec<(usize, usize)>,
    }
    let vertices = (0..g.vertex_count()).map(|v| g.format_vertex(v)).collect();
    let mut edges = Vec::new();
    for u in 0..g.vertex_count() {
        for v in (u + 1)..g.vertex_count() {
            if g.adjacent(u, v) {
                edges.push((u, v));
            }
        }
    }
    serde_json::to_string_pretty(&Dto { vertices, edges }).expect("graph export cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(shape: &[usize]) -> Vec<Vec<String>> {
        shape
            .iter()
            .map(|&s| (0..s).map(|t| t.to_string()).collect())
            .collect()
    }

    #[test]
    fn vertex_roundtrip_and_counts() {
        let g = FeasibilityGraph::build(labels(&[2, 2, 3])).unwrap();
        assert_eq!(g.vertex_count(), 6 + 6 + 4);
        assert_eq!(g.edge_count(), 36);
        for v in 0..g.vertex_count() {
            let vert = g.vertex(v);
            assert_eq!(g.vertex_index(vert.agent, &vert.theta_minus), v);
        }
    }

    #[test]
    fn adjacency_matches_gluing_definition() {
        let g = FeasibilityGraph::build(labels(&[2, 2, 2])).unwrap();
        // Brute-force the definition: exists full profile restricting to both.
        for u in 0..g.vertex_count() {
            for v in 0..g.vertex_count() {
                let (a, b) = (g.vertex(u), g.vertex(v));
                let mut expect = false;
                if a.agent != b.agent {
                    expect = TypeProduct::full(g.labels()).any(|theta| {
                        crate::env::profile_minus(&theta, a.agent) == a.theta_minus
                            && crate::env::profile_minus(&theta, b.agent) == b.theta_minus
                    });
                }
                assert_eq!(g.adjacent(u, v), expect, "u={u} v={v}");
            }
        }
    }

    #[test]
    fn neighbors_agree_with_adjacent() {
        let g = FeasibilityGraph::build(labels(&[2, 3, 2])).unwrap();
        for u in 0..g.vertex_count() {
            let mut ns = g.neighbors(u);
            ns.sort_unstable();
            let expect: Vec<usize> = (0..g.vertex_count())
                .filter(|&v| g.adjacent(u, v))
                .collect();
            assert_eq!(ns, expect);
        }
    }

    #[test]
    fn cliques_are_maximal_and_exactly_n() {
        let g = FeasibilityGraph::build(labels(&[2, 2, 3])).unwrap();
        for (_, clique) in g.cliques() {
            assert_eq!(clique.len(), 3);
            for (a, &u) in clique.iter().enumerate() {
                for &v in &clique[a + 1..] {
                    assert!(g.adjacent(u, v));
                }
            }
            // No outside vertex extends the clique.
            for w in 0..g.vertex_count() {
                if clique.contains(&w) {
                    continue;
                }
                assert!(!clique.iter().all(|&u| g.adjacent(u, w)));
            }
        }
    }

    #[test]
    fn adjacent_pair_has_unique_maximal_clique() {
        let g = FeasibilityGraph::build(labels(&[2, 2, 3])).unwrap();
        for u in 0..g.vertex_count() {
            for v in (u + 1)..g.vertex_count() {
                if !g.adjacent(u, v) {
                    continue;
                }
                let theta = g.profile_of_edge(u, v).unwrap();
                let containing: Vec<Vec<usize>> = g
                    .cliques()
                    .filter(|(_, c)| c.contains(&u) && c.contains(&v))
                    .map(|(t, _)| t)
                    .collect();
                assert_eq!(containing, vec![theta]);
            }
        }
    }

    #[test]
    fn two_agents_is_complete_bipartite() {
        let g = FeasibilityGraph::build(labels(&[2, 3])).unwrap();
        assert_eq!(g.vertex_count(), 5);
        for u in 0..g.vertex_count() {
            for v in (u + 1)..g.vertex_count() {
                let cross = g.agent_of(u) != g.agent_of(v);
                assert_eq!(g.adjacent(u, v), cross);
            }
        }
        // Complete bipartite graphs have no holes at all.
        let holes = find_odd_holes(&g, 9, HoleSearch::All, DEFAULT_HOLE_GUARD).unwrap();
        assert!(holes.is_empty());
    }

    #[test]
    fn no_odd_5_holes_in_feasibility_graphs() {
        for shape in [vec![2, 2], vec![2, 2, 2], vec![2, 2, 3], vec![2, 3, 3]] {
            let g = FeasibilityGraph::build(labels(&shape)).unwrap();
            let mut found = find_odd_holes(&g, 5, HoleSearch::All, DEFAULT_HOLE_GUARD).unwrap();
            assert!(found.is_empty(), "shape {shape:?} has a 5-hole: {found:?}");
            // All-binary shapes have no odd holes of any length.
            if shape.iter().all(|&s| s == 2) {
                let max = g.vertex_count();
                found = find_odd_holes(&g, max, HoleSearch::All, DEFAULT_HOLE_GUARD).unwrap();
                assert!(found.is_empty(), "binary shape {shape:?} has a hole");
            }
        }
    }

    #[test]
    fn finds_the_seven_hole() {
        // Shape (2,2,3) contains an induced 7-cycle.
        let g = FeasibilityGraph::build(labels(&[2, 2, 3])).unwrap();
        let holes = find_odd_holes(&g, 7, HoleSearch::All, DEFAULT_HOLE_GUARD).unwrap();
        assert!(!holes.is_empty());
        for h in &holes {
            assert_eq!(h.len(), 7);
            assert!(is_induced_odd_cycle(&g, h));
        }
        let first = find_odd_holes(&g, 7, HoleSearch::FirstOnly, DEFAULT_HOLE_GUARD).unwrap();
        assert_eq!(first.len(), 1);
        assert_eq!(first[0], holes[0]);
    }

    #[test]
    fn hole_search_matches_naive_enumeration_on_c5_plus_apex() {
        // 5-cycle with an apex adjacent to everything: exactly one 5-hole.
        let mut g = DenseGraph::new(6);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5);
            g.add_edge(i, 5);
        }
        let holes = find_odd_holes(&g, 6, HoleSearch::All, DEFAULT_HOLE_GUARD).unwrap();
        assert_eq!(holes, vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn c7_and_its_complement() {
        let mut g = DenseGraph::new(7);
        for i in 0..7 {
            g.add_edge(i, (i + 1) % 7);
        }
        let holes = find_odd_holes(&g, 7, HoleSearch::All, DEFAULT_HOLE_GUARD).unwrap();
        assert_eq!(holes.len(), 1);
        assert_eq!(holes[0], vec![0, 1, 2, 3, 4, 5, 6]);
        // The complement of C7 contains no odd hole of length > 5 but it is
        // itself an odd antihole; no 5-hole lives inside C7 itself.
        let five = find_odd_holes(&g, 5, HoleSearch::All, DEFAULT_HOLE_GUARD).unwrap();
        assert!(five.is_empty());
    }

    #[test]
    fn canonical_cycle_normalizes_rotation_and_reflection() {
        let c = vec![4, 2, 7, 9, 3];
        let canon = canonical_cycle(&c);
        assert_eq!(canon[0], 2);
        assert!(canon[1] < *canon.last().unwrap());
        // All rotations/reflections map to the same canonical form.
        let mut variants = Vec::new();
        for r in 0..5 {
            let rot: Vec<usize> = (0..5).map(|s| c[(r + s) % 5]).collect();
            variants.push(canonical_cycle(&rot));
            let rev: Vec<usize> = rot.iter().rev().cloned().collect();
            variants.push(canonical_cycle(&rev));
        }
        assert!(variants.iter().all(|v| *v == canon));
    }

    #[test]
    fn components_respect_induced_subgraph() {
        let g = FeasibilityGraph::build(labels(&[2, 2])).unwrap();
        // 4-cycle: vertices 0,1 agent 1; 2,3 agent 2.
        let comps = components_of(&g, &[0, 1, 2, 3]);
        assert_eq!(comps.len(), 1);
        let comps = components_of(&g, &[0, 1]);
        assert_eq!(comps, vec![vec![0], vec![1]]);
    }

    #[test]
    fn guard_trips() {
        let g = FeasibilityGraph::build(labels(&[2, 2, 2])).unwrap();
        match find_odd_holes(&g, 9, HoleSearch::All, 5) {
            Err(crate::Error::GuardExceeded(_)) => {}
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn vertex_id_round_trip() {
        let g = FeasibilityGraph::build(labels(&[2, 2, 3])).unwrap();
        for v in 0..g.vertex_count() {
            let id = g.format_vertex(v);
            assert_eq!(g.parse_vertex(&id).unwrap(), v, "id {id}");
        }
        assert!(g.parse_vertex("9:(0,0)").is_err());
        assert!(g.parse_vertex("1:(0)").is_err());
        assert!(g.parse_vertex("1:(5,0)").is_err());
    }
}
