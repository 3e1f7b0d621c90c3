//! Neighborhood providers consumed by the topology passes.

/// A source of per-vertex neighbor lists.
///
/// Implementations may compute neighborhoods on demand; callers must not
/// assume anything is cached between calls.
pub trait NeighborGraph: Sync {
    type Scratch: Send;

    fn vertex_count(&self) -> usize;

    fn new_scratch(&self) -> Self::Scratch;

    /// Replaces `out` with the neighbors of `vertex`.
    fn neighbors_into(&self, vertex: usize, scratch: &mut Self::Scratch, out: &mut Vec<usize>);
}

/// A fully materialized adjacency list. Used for hand-built graphs and for
/// reference computations on small inputs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExplicitGraph {
    adjacency: Vec<Vec<usize>>,
}

impl ExplicitGraph {
    pub fn from_adjacency(mut adjacency: Vec<Vec<usize>>) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        ExplicitGraph { adjacency }
    }

    /// Undirected graph from an edge list; self loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u != v {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
        Self::from_adjacency(adjacency)
    }

    /// A path 0 - 1 - ... - (n-1).
    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Materializes every neighborhood of another graph.
    pub fn collect<G: NeighborGraph>(graph: &G) -> Self {
        let mut scratch = graph.new_scratch();
        let adjacency = (0..graph.vertex_count())
            .map(|u| {
                let mut out = Vec::new();
                graph.neighbors_into(u, &mut scratch, &mut out);
                out
            })
            .collect();
        Self::from_adjacency(adjacency)
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (u.min(v), u.max(v))))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency
            .iter()
            .enumerate()
            .all(|(u, list)| list.iter().all(|&v| self.adjacency[v].binary_search(&u).is_ok()))
    }
}

impl NeighborGraph for ExplicitGraph {
    type Scratch = ();

    fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    fn new_scratch(&self) {}

    fn neighbors_into(&self, vertex: usize, _: &mut (), out: &mut Vec<usize>) {
        out.clear();
        out.extend_from_slice(&self.adjacency[vertex]);
    }
}
