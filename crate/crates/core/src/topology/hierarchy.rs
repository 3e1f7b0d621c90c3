use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use super::labels::Segmentation;
use super::saddles::{insert_best, SaddleRecord};
use super::Order;
use crate::dataset::Range;
use crate::scalar::{cmp, Scalar};

/// One maximum cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeEvent<T> {
    pub victim: usize,
    pub survivor: usize,
    pub saddle: usize,
    /// `f(victim) − f(saddle)`.
    pub persistence: T,
}

/// Persistence-ordered sequence of maximum cancellations.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeHierarchy<T> {
    pub events: Vec<MergeEvent<T>>,
    /// Global range of the function, used to normalize persistence.
    pub f_range: Range<T>,
    /// Maxima of the base segmentation, ascending.
    pub base_maxima: Vec<usize>,
}

impl<T: Scalar> MergeHierarchy<T> {
    /// Persistence as a fraction of the function range; 0 for constant f.
    pub fn normalize(&self, persistence: T) -> T {
        let width = self.f_range.width();
        if width > T::zero() {
            persistence / width
        } else {
            T::zero()
        }
    }

    pub fn normalized_persistence(&self, event: usize) -> T {
        self.normalize(self.events[event].persistence)
    }

    /// Number of leading events applied at threshold `t`.
    pub fn applied_events(&self, t: T) -> usize {
        // Normalized persistence is non-decreasing along the sequence.
        self.events.partition_point(|e| self.normalize(e.persistence) <= t)
    }

    /// Maps every base maximum to its surviving representative at `t`.
    pub fn resolver(&self, t: T) -> Resolver {
        let mut parent = HashMap::new();
        for e in &self.events[..self.applied_events(t)] {
            parent.insert(e.victim, e.survivor);
        }
        Resolver { parent }
    }

    /// Maxima still alive at `t`, ascending.
    pub fn surviving_maxima(&self, t: T) -> Vec<usize> {
        let applied = self.applied_events(t);
        let dead: std::collections::HashSet<usize> = self.events[..applied].iter().map(|e| e.victim).collect();
        self.base_maxima.iter().copied().filter(|m| !dead.contains(m)).collect()
    }
}

/// Victim-to-survivor map for a prefix of the merge sequence.
#[derive(Debug, Clone, Default)]
pub struct Resolver {
    parent: HashMap<usize, usize>,
}

impl Resolver {
    pub fn root(&self, mut m: usize) -> usize {
        // Each victim dies once and its survivor is still alive at that
        // point, so the chain terminates.
        while let Some(&p) = self.parent.get(&m) {
            m = p;
        }
        m
    }
}

#[derive(Debug, Clone, Copy)]
struct Crossing<T> {
    value: T,
    vertex: usize,
}

impl<T: Scalar> Crossing<T> {
    fn beats(&self, other: &Self) -> bool {
        cmp(self.value, other.value).then(other.vertex.cmp(&self.vertex)).is_gt()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate<T> {
    persistence: T,
    victim: usize,
    version: u64,
}

impl<T: Scalar> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}
impl<T: Scalar> Eq for Candidate<T> {}
impl<T: Scalar> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Candidate<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp(self.persistence, other.persistence)
            .then(self.victim.cmp(&other.victim))
            .then(self.version.cmp(&other.version))
    }
}

struct Simplifier<'a, T> {
    f: &'a [T],
    order: Order<'a, T>,
    adjacency: HashMap<usize, BTreeMap<usize, Crossing<T>>>,
    version: HashMap<usize, u64>,
    heap: BinaryHeap<Reverse<Candidate<T>>>,
}

impl<T: Scalar> Simplifier<'_, T> {
    /// Best crossing from `m` into a strictly higher neighbor.
    fn best_exit(&self, m: usize) -> Option<(usize, Crossing<T>)> {
        let mut best: Option<(usize, Crossing<T>)> = None;
        for (&x, c) in self.adjacency.get(&m)? {
            if !self.order.above(x, m) {
                continue;
            }
            // BTreeMap iteration is ascending in x, so a strict win keeps
            // the lower survivor id on full ties.
            if best.as_ref().is_none_or(|(_, b)| c.beats(b)) {
                best = Some((x, *c));
            }
        }
        best
    }

    fn refresh(&mut self, m: usize) {
        let version = self.version.entry(m).or_default();
        *version += 1;
        let version = *version;
        if let Some((_, c)) = self.best_exit(m) {
            self.heap.push(Reverse(Candidate {
                persistence: self.f[m] - c.value,
                victim: m,
                version,
            }));
        }
    }
}

/// Greedy persistence simplification over the segment adjacency graph.
///
/// Repeatedly cancels the maximum with the smallest persistence among those
/// adjacent to a higher maximum (ties: lower id), merging it into the higher
/// maximum across its best saddle. Saddles of the merged segment toward each
/// third segment are the pairwise maxima of the two originals.
pub fn build_hierarchy<T: Scalar>(seg: &Segmentation, saddles: &[SaddleRecord<T>], f: &[T]) -> MergeHierarchy<T> {
    let order = Order::new(f);
    let mut adjacency: HashMap<usize, BTreeMap<usize, Crossing<T>>> =
        seg.maxima.iter().map(|&m| (m, BTreeMap::new())).collect();
    for s in saddles {
        let c = Crossing {
            value: s.value,
            vertex: s.vertex,
        };
        for (p, q) in [(s.a, s.b), (s.b, s.a)] {
            let slot = adjacency.entry(p).or_default();
            match slot.get(&q) {
                Some(cur) if !c.beats(cur) => {}
                _ => {
                    slot.insert(q, c);
                }
            }
        }
    }
    let mut sim = Simplifier {
        f,
        order,
        adjacency,
        version: HashMap::new(),
        heap: BinaryHeap::new(),
    };
    for &m in &seg.maxima {
        sim.refresh(m);
    }

    let mut events = Vec::new();
    while let Some(Reverse(cand)) = sim.heap.pop() {
        if sim.version.get(&cand.victim) != Some(&cand.version) {
            continue;
        }
        let victim = cand.victim;
        let Some((survivor, crossing)) = sim.best_exit(victim) else {
            continue;
        };
        events.push(MergeEvent {
            victim,
            survivor,
            saddle: crossing.vertex,
            persistence: cand.persistence,
        });
        sim.version.remove(&victim);
        let victim_adj = sim.adjacency.remove(&victim).unwrap_or_default();
        let mut touched = vec![survivor];
        for (x, c) in victim_adj {
            let xs = sim.adjacency.get_mut(&x).expect("adjacency is symmetric");
            xs.remove(&victim);
            if x == survivor {
                continue;
            }
            let merged = match xs.get(&survivor) {
                Some(cur) if !c.beats(cur) => *cur,
                _ => c,
            };
            xs.insert(survivor, merged);
            sim.adjacency.get_mut(&survivor).unwrap().insert(x, merged);
            touched.push(x);
        }
        for m in touched {
            sim.refresh(m);
        }
    }

    MergeHierarchy {
        events,
        f_range: Range::of(f),
        base_maxima: seg.maxima.clone(),
    }
}

/// Base segmentation with every event of normalized persistence `≤ t` applied.
pub fn segmentation_at<T: Scalar>(hierarchy: &MergeHierarchy<T>, base: &Segmentation, t: T) -> Segmentation {
    let resolver = hierarchy.resolver(t);
    let mut cache: HashMap<usize, usize> = HashMap::with_capacity(base.maxima.len());
    for &m in &base.maxima {
        cache.insert(m, resolver.root(m));
    }
    let labels = base.labels.iter().map(|l| cache[l]).collect();
    Segmentation {
        labels,
        maxima: hierarchy.surviving_maxima(t),
    }
}

/// Saddle records between the segments alive at `t`.
pub fn saddles_at<T: Scalar>(hierarchy: &MergeHierarchy<T>, saddles: &[SaddleRecord<T>], t: T) -> Vec<SaddleRecord<T>> {
    let resolver = hierarchy.resolver(t);
    let mut map = HashMap::new();
    for s in saddles {
        let (a, b) = (resolver.root(s.a), resolver.root(s.b));
        if a == b {
            continue;
        }
        insert_best(
            &mut map,
            SaddleRecord {
                a: a.min(b),
                b: a.max(b),
                ..*s
            },
        );
    }
    let mut out: Vec<_> = map.into_values().collect();
    out.sort_unstable_by_key(|r| (r.a, r.b));
    out
}

/// Surviving-maxima count as a step function of normalized persistence.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceCurve<T> {
    /// `(t, count)` at t = 0, every distinct event threshold, and t = 1.
    pub points: Vec<(T, usize)>,
}

impl<T: Scalar> PersistenceCurve<T> {
    /// Count at an arbitrary threshold.
    pub fn count_at(&self, t: T) -> usize {
        let idx = self.points.partition_point(|(x, _)| *x <= t);
        self.points[idx.saturating_sub(1)].1
    }
}

pub fn persistence_curve<T: Scalar>(hierarchy: &MergeHierarchy<T>) -> PersistenceCurve<T> {
    let base = hierarchy.base_maxima.len();
    let count_at = |t: T| base - hierarchy.applied_events(t);
    let mut points = vec![(T::zero(), count_at(T::zero()))];
    for i in 0..hierarchy.events.len() {
        let t = hierarchy.normalized_persistence(i);
        if t > points.last().unwrap().0 && t < T::one() {
            points.push((t, count_at(t)));
        }
    }
    points.push((T::one(), count_at(T::one())));
    PersistenceCurve { points }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> (Segmentation, Vec<SaddleRecord<f64>>, Vec<f64>) {
        let seg = Segmentation {
            labels: vec![1, 1, 3, 3, 3],
            maxima: vec![1, 3],
        };
        let saddles = vec![SaddleRecord {
            a: 1,
            b: 3,
            vertex: 2,
            value: 1.0,
        }];
        (seg, saddles, vec![0.0, 2.0, 1.0, 3.0, 0.0])
    }

    #[test]
    fn chain_event() {
        let (seg, saddles, f) = chain();
        let h = build_hierarchy(&seg, &saddles, &f);
        assert_eq!(
            h.events,
            vec![MergeEvent {
                victim: 1,
                survivor: 3,
                saddle: 2,
                persistence: 1.0
            }]
        );
        assert_eq!(h.f_range, Range { min: 0.0, max: 3.0 });
    }

    #[test]
    fn chain_thresholds() {
        let (seg, saddles, f) = chain();
        let h = build_hierarchy(&seg, &saddles, &f);
        assert_eq!(segmentation_at(&h, &seg, 0.0), seg);
        assert_eq!(segmentation_at(&h, &seg, 0.3).segment_count(), 2);
        let merged = segmentation_at(&h, &seg, 0.34);
        assert_eq!(merged.segment_count(), 1);
        assert_eq!(merged.labels, vec![3; 5]);
        assert_eq!(segmentation_at(&h, &seg, 1.0).maxima, vec![3]);
    }

    #[test]
    fn chain_curve() {
        let (seg, saddles, f) = chain();
        let curve = persistence_curve(&build_hierarchy(&seg, &saddles, &f));
        assert_eq!(curve.points, vec![(0.0, 2), (1.0 / 3.0, 1), (1.0, 1)]);
        assert_eq!(curve.count_at(0.2), 2);
        assert_eq!(curve.count_at(0.5), 1);
    }

    #[test]
    fn single_maximum() {
        let seg = Segmentation {
            labels: vec![0, 0],
            maxima: vec![0],
        };
        let h = build_hierarchy::<f64>(&seg, &[], &[1.0, 0.0]);
        assert!(h.events.is_empty());
        assert_eq!(persistence_curve(&h).points, vec![(0.0, 1), (1.0, 1)]);
    }

    #[test]
    fn greedy_merges_smallest_first_and_inherits_saddles() {
        // Maxima 0 (f=5), 1 (f=3), 2 (f=4); 1 touches both others.
        let f = vec![5.0, 3.0, 4.0, 2.5, 1.0];
        let seg = Segmentation {
            labels: vec![0, 1, 2, 1, 2],
            maxima: vec![0, 1, 2],
        };
        let saddles = vec![
            SaddleRecord { a: 0, b: 1, vertex: 3, value: 2.5 },
            SaddleRecord { a: 1, b: 2, vertex: 4, value: 1.0 },
        ];
        let h = build_hierarchy(&seg, &saddles, &f);
        // 1 leaves through its highest saddle into 0 (persistence 0.5); then
        // 2 reaches 0 through the inherited saddle at 1.0 (persistence 3).
        assert_eq!(h.events.len(), 2);
        assert_eq!((h.events[0].victim, h.events[0].survivor, h.events[0].saddle), (1, 0, 3));
        assert_eq!(h.events[0].persistence, 0.5);
        assert_eq!((h.events[1].victim, h.events[1].survivor, h.events[1].saddle), (2, 0, 4));
        assert_eq!(h.events[1].persistence, 3.0);
        let at = saddles_at(&h, &saddles, 0.2);
        assert_eq!(at.len(), 1);
        assert_eq!((at[0].a, at[0].b, at[0].vertex), (0, 2, 4));
    }

    #[test]
    fn plateau_maxima_merge_at_zero() {
        let f = vec![1.0, 1.0, 0.0];
        let seg = Segmentation {
            labels: vec![0, 1, 0],
            maxima: vec![0, 1],
        };
        let saddles = vec![SaddleRecord { a: 0, b: 1, vertex: 1, value: 1.0 }];
        let h = build_hierarchy(&seg, &saddles, &f);
        assert_eq!(h.events[0].victim, 1);
        assert_eq!(h.events[0].persistence, 0.0);
        assert_eq!(segmentation_at(&h, &seg, 0.0).segment_count(), 1);
    }

    #[test]
    fn disconnected_components_stay_apart() {
        let seg = Segmentation {
            labels: vec![0, 1],
            maxima: vec![0, 1],
        };
        let h = build_hierarchy::<f64>(&seg, &[], &[1.0, 2.0]);
        assert!(h.events.is_empty());
        assert_eq!(segmentation_at(&h, &seg, 1.0).segment_count(), 2);
    }
}
