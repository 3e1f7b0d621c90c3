use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::lune::LuneTest;
use crate::dataset::SampleTable;
use crate::error::{Error, Result};
use crate::scalar::{cmp, dist2, Scalar};

pub const DEFAULT_LEAF_SIZE: usize = 32;

/// A neighbor with its squared distance. Orders by distance, then id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub id: usize,
    pub dist2: T,
}

impl<T: Scalar> Neighbor<T> {
    pub fn distance(&self) -> T {
        self.dist2.sqrt()
    }
}

impl<T: Scalar> Eq for Neighbor<T> {}

impl<T: Scalar> PartialOrd for Neighbor<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Neighbor<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp(self.dist2, other.dist2).then(self.id.cmp(&other.id))
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    start: usize,
    end: usize,
    /// Child node indices; `usize::MAX` for leaves.
    left: usize,
    right: usize,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.left == usize::MAX
    }
}

/// Exact k-d tree over the domain coordinates of a table.
///
/// Holds its own row-major copy of the points in tree order. All queries
/// are exact under Euclidean distance with ties broken by vertex id.
#[derive(Debug, Clone)]
pub struct SpatialIndex<T> {
    dims: usize,
    coords: Vec<T>,
    ids: Vec<usize>,
    slot: Vec<usize>,
    nodes: Vec<Node>,
    /// Per node: `dims` lower bounds followed by `dims` upper bounds.
    bbox: Vec<T>,
}

/// Reusable buffers for k-NN queries.
#[derive(Debug, Default)]
pub struct KnnScratch<T> {
    heap: BinaryHeap<Neighbor<T>>,
    stack: Vec<(usize, T)>,
}

/// Per-vertex key of the k-th nearest neighbor plus per-node maxima, which
/// lets the tree answer "which vertices list `u` among their k nearest"
/// without storing any reverse adjacency.
#[derive(Debug, Clone)]
pub struct ReverseRadii<T> {
    k: usize,
    kth: Vec<Neighbor<T>>,
    node_max: Vec<T>,
}

impl<T: Scalar> ReverseRadii<T> {
    pub fn k(&self) -> usize {
        self.k
    }

    /// The k-th nearest neighbor of `vertex`.
    pub fn kth(&self, vertex: usize) -> Neighbor<T> {
        self.kth[vertex]
    }

    /// Whether `u` belongs to the k nearest neighbors of `v`.
    pub fn lists(&self, v: usize, u: usize, dist2: T) -> bool {
        u != v && Neighbor { id: u, dist2 } <= self.kth[v]
    }
}

impl<T: Scalar> SpatialIndex<T> {
    pub fn build(table: &SampleTable<T>) -> Self {
        Self::with_leaf_size(table, DEFAULT_LEAF_SIZE)
    }

    pub fn with_leaf_size(table: &SampleTable<T>, leaf_size: usize) -> Self {
        Self::from_row_major(table.row_major(), table.dims(), leaf_size)
    }

    /// Builds from `n × dims` row-major coordinates.
    pub fn from_row_major(points: Vec<T>, dims: usize, leaf_size: usize) -> Self {
        assert!(dims >= 1, "index needs at least one dimension");
        let n = points.len() / dims;
        let leaf_size = leaf_size.max(1);
        let mut ids: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::with_capacity(2 * n / leaf_size + 1);
        let mut bbox = Vec::new();
        if n > 0 {
            build_node(&points, dims, leaf_size, &mut ids, 0, n, &mut nodes, &mut bbox);
        }
        let mut coords = Vec::with_capacity(points.len());
        let mut slot = vec![0; n];
        for (s, &id) in ids.iter().enumerate() {
            coords.extend_from_slice(&points[id * dims..(id + 1) * dims]);
            slot[id] = s;
        }
        SpatialIndex {
            dims,
            coords,
            ids,
            slot,
            nodes,
            bbox,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Coordinates of a vertex.
    pub fn point(&self, vertex: usize) -> &[T] {
        let s = self.slot[vertex];
        &self.coords[s * self.dims..(s + 1) * self.dims]
    }

    pub fn dist2(&self, a: usize, b: usize) -> T {
        dist2(self.point(a), self.point(b))
    }

    fn check_k(&self, k: usize) -> Result<()> {
        let n = self.len();
        if n > 1 && k >= n {
            return Err(Error::KOutOfRange { k, n });
        }
        Ok(())
    }

    /// The `k` nearest other vertices of `vertex`, ascending by distance
    /// with ties broken by ascending id.
    pub fn knn(&self, vertex: usize, k: usize) -> Result<Vec<Neighbor<T>>> {
        self.check_k(k)?;
        let mut out = Vec::new();
        self.knn_into(vertex, k, &mut KnnScratch::default(), &mut out);
        Ok(out)
    }

    /// As [`SpatialIndex::knn`] without the range check; `k` is clamped to n−1.
    pub fn knn_into(&self, vertex: usize, k: usize, scratch: &mut KnnScratch<T>, out: &mut Vec<Neighbor<T>>) {
        self.query_into(self.point(vertex), Some(vertex), k, scratch, out)
    }

    /// k nearest vertices to an arbitrary point, optionally excluding one id.
    pub fn query_into(
        &self,
        q: &[T],
        exclude: Option<usize>,
        k: usize,
        scratch: &mut KnnScratch<T>,
        out: &mut Vec<Neighbor<T>>,
    ) {
        out.clear();
        let k = k.min(self.len().saturating_sub(exclude.is_some() as usize));
        if k == 0 || self.nodes.is_empty() {
            return;
        }
        let heap = &mut scratch.heap;
        heap.clear();
        let stack = &mut scratch.stack;
        stack.clear();
        stack.push((0, self.bbox_dist2(0, q)));
        while let Some((node_idx, bound)) = stack.pop() {
            if heap.len() == k && bound > heap.peek().unwrap().dist2 {
                continue;
            }
            let node = self.nodes[node_idx];
            if node.is_leaf() {
                for s in node.start..node.end {
                    let id = self.ids[s];
                    if Some(id) == exclude {
                        continue;
                    }
                    let cand = Neighbor {
                        id,
                        dist2: dist2(q, &self.coords[s * self.dims..(s + 1) * self.dims]),
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(cand);
                    }
                }
            } else {
                let dl = self.bbox_dist2(node.left, q);
                let dr = self.bbox_dist2(node.right, q);
                // Nearer child is popped first.
                if dl <= dr {
                    stack.push((node.right, dr));
                    stack.push((node.left, dl));
                } else {
                    stack.push((node.left, dl));
                    stack.push((node.right, dr));
                }
            }
        }
        out.extend(heap.drain());
        out.sort_unstable();
    }

    /// Computes the k-th nearest neighbor key of every vertex.
    pub fn reverse_radii(&self, k: usize) -> Result<ReverseRadii<T>> {
        self.check_k(k)?;
        let n = self.len();
        let kth: Vec<Neighbor<T>> = (0..n)
            .into_par_iter()
            .map_init(
                || (KnnScratch::default(), Vec::new()),
                |(scratch, out), v| {
                    self.knn_into(v, k, scratch, out);
                    out.last().copied().unwrap_or(Neighbor {
                        id: v,
                        dist2: T::neg_infinity(),
                    })
                },
            )
            .collect();
        let mut node_max = vec![T::neg_infinity(); self.nodes.len()];
        // Children are always created after their parent.
        for idx in (0..self.nodes.len()).rev() {
            let node = self.nodes[idx];
            node_max[idx] = if node.is_leaf() {
                (node.start..node.end)
                    .map(|s| kth[self.ids[s]].dist2)
                    .fold(T::neg_infinity(), T::max)
            } else {
                node_max[node.left].max(node_max[node.right])
            };
        }
        Ok(ReverseRadii { k, kth, node_max })
    }

    /// Vertices `v ≠ u` whose k nearest neighbors include `u`, unsorted.
    pub fn reverse_knn_into(
        &self,
        u: usize,
        radii: &ReverseRadii<T>,
        stack: &mut Vec<usize>,
        out: &mut Vec<usize>,
    ) {
        out.clear();
        if self.nodes.is_empty() {
            return;
        }
        let q = self.point(u);
        stack.clear();
        stack.push(0);
        while let Some(idx) = stack.pop() {
            if self.bbox_dist2(idx, q) > radii.node_max[idx] {
                continue;
            }
            let node = self.nodes[idx];
            if node.is_leaf() {
                for s in node.start..node.end {
                    let v = self.ids[s];
                    // Same operand order as knn(v) so the keys compare exactly.
                    let d2 = dist2(&self.coords[s * self.dims..(s + 1) * self.dims], q);
                    if radii.lists(v, u, d2) {
                        out.push(v);
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
    }

    /// Whether any vertex lies in the lune currently loaded in `lune`.
    pub fn lune_has_witness(&self, lune: &LuneTest<T>, beta: T, stack: &mut Vec<usize>) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let center = lune.midpoint();
        let r2 = lune.bounding_radius2(beta);
        stack.clear();
        stack.push(0);
        while let Some(idx) = stack.pop() {
            if self.bbox_dist2(idx, center) > r2 {
                continue;
            }
            let node = self.nodes[idx];
            if node.is_leaf() {
                for s in node.start..node.end {
                    if lune.contains(&self.coords[s * self.dims..(s + 1) * self.dims]) {
                        return true;
                    }
                }
            } else {
                stack.push(node.left);
                stack.push(node.right);
            }
        }
        false
    }

    fn bbox_dist2(&self, node: usize, q: &[T]) -> T {
        let d = self.dims;
        let lo = &self.bbox[2 * d * node..2 * d * node + d];
        let hi = &self.bbox[2 * d * node + d..2 * d * (node + 1)];
        let mut acc = T::zero();
        for i in 0..d {
            let x = q[i];
            let t = if x < lo[i] {
                lo[i] - x
            } else if x > hi[i] {
                x - hi[i]
            } else {
                continue;
            };
            acc = acc + t * t;
        }
        acc
    }
}

#[allow(clippy::too_many_arguments)]
fn build_node<T: Scalar>(
    points: &[T],
    dims: usize,
    leaf_size: usize,
    ids: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
    bbox: &mut Vec<T>,
) -> usize {
    let idx = nodes.len();
    nodes.push(Node {
        start,
        end,
        left: usize::MAX,
        right: usize::MAX,
    });
    let mut lo = vec![T::infinity(); dims];
    let mut hi = vec![T::neg_infinity(); dims];
    for &id in &ids[start..end] {
        for a in 0..dims {
            let x = points[id * dims + a];
            lo[a] = lo[a].min(x);
            hi[a] = hi[a].max(x);
        }
    }
    bbox.extend_from_slice(&lo);
    bbox.extend_from_slice(&hi);
    if end - start <= leaf_size {
        return idx;
    }
    let (axis, spread) = (0..dims)
        .map(|a| (a, hi[a] - lo[a]))
        .max_by(|x, y| cmp(x.1, y.1).then(y.0.cmp(&x.0)))
        .unwrap();
    if !(spread > T::zero()) {
        // All points coincide.
        return idx;
    }
    let mid = start + (end - start) / 2;
    ids[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        cmp(points[a * dims + axis], points[b * dims + axis]).then(a.cmp(&b))
    });
    let left = build_node(points, dims, leaf_size, ids, start, mid, nodes, bbox);
    let right = build_node(points, dims, leaf_size, ids, mid, end, nodes, bbox);
    nodes[idx].left = left;
    nodes[idx].right = right;
    idx
}
