//! Topological spine: a planar layout of the surviving extrema and saddles
//! with nested contour rings sized by above-level sample counts.

mod layout;

pub use layout::{layout_spine, Layout, LayoutConfig};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cubes::{contour_counts, AggregateCube, CubeLayout, SelectionQuery, SelectionResult};
use crate::dataset::SampleTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topology::{saddles_at, TopologyArtifact};

pub const DEFAULT_LEVELS_PER_EXTREMUM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpineConfig {
    pub levels_per_extremum: usize,
    /// Display radius of the largest contour. `None` uses a quarter of the
    /// layout diameter (or 1 for a single node).
    pub max_radius: Option<f64>,
    pub layout: LayoutConfig,
    /// Separates extrema whose outer contours overlap.
    pub repel: bool,
}

impl Default for SpineConfig {
    fn default() -> Self {
        SpineConfig {
            levels_per_extremum: DEFAULT_LEVELS_PER_EXTREMUM,
            max_radius: None,
            layout: LayoutConfig::default(),
            repel: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Extremum,
    Saddle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpineNode {
    /// Index into the node list.
    pub id: usize,
    pub kind: NodeKind,
    /// Source vertex id; for extrema also the segment id.
    pub vertex: usize,
    pub f: f64,
    pub xy: [f64; 2],
    #[serde(skip)]
    pub position: Vec<f64>,
}

/// Saddle node to extremum node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpineArc {
    pub saddle: usize,
    pub extremum: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpineContour {
    /// Segment id of the owning extremum.
    pub owner: usize,
    pub level: f64,
    pub count: u64,
    pub radius: f64,
    /// Selected share of `count`; 0 until shaded.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpineGraph {
    pub t: f64,
    /// Domain dimension used in the radius exponent.
    pub dims: usize,
    pub nodes: Vec<SpineNode>,
    pub arcs: Vec<SpineArc>,
    /// Grouped by owner, ascending level within an owner.
    pub contours: Vec<SpineContour>,
    pub scale: f64,
    pub stress: f64,
}

impl SpineGraph {
    pub fn extremum_node(&self, segment: usize) -> Option<&SpineNode> {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::Extremum && n.vertex == segment)
    }

    /// Contour levels per owner, ready for a selection scan.
    pub fn selection_query<T: Scalar>(&self) -> SelectionQuery<T> {
        let mut q = SelectionQuery::default();
        for c in &self.contours {
            q.levels.entry(c.owner).or_insert_with(Vec::new).push(T::of(c.level));
        }
        q
    }
}

/// Evenly spaced levels strictly between `lo` and `hi`.
pub fn contour_levels(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| lo + (hi - lo) * k as f64 / (count + 1) as f64)
        .collect()
}

/// `C^(2/d)`, the unscaled contour radius.
pub fn relative_radius(count: u64, dims: usize) -> f64 {
    (count as f64).powf(2.0 / dims.max(1) as f64)
}

/// Contours for every segment of `cubes`. `floors` gives each extremum's
/// highest adjacent saddle value; segments without one start at the lower
/// edge of their lowest occupied function bin.
pub fn build_contours<T: Scalar>(
    layout: &CubeLayout<T>,
    cubes: &BTreeMap<usize, AggregateCube>,
    f_max: &BTreeMap<usize, T>,
    floors: &BTreeMap<usize, T>,
    dims: usize,
    levels_per_extremum: usize,
) -> Vec<SpineContour> {
    let fa = layout.f_axis();
    let mut out = Vec::new();
    for (&owner, cube) in cubes {
        let hi = f_max[&owner];
        let lo = match floors.get(&owner) {
            Some(&s) => s,
            None => match cube.hist.axis(fa).iter().position(|&c| c > 0) {
                Some(b) => layout.lower_edge(fa, b),
                None => continue,
            },
        };
        if !(hi > lo) {
            continue;
        }
        let levels: Vec<T> = contour_levels(lo.as_f64(), hi.as_f64(), levels_per_extremum)
            .into_iter()
            .map(T::of)
            .collect();
        let counts = contour_counts(layout, cube, &levels);
        let mut last = None;
        for (level, count) in levels.into_iter().zip(counts) {
            // Empty rings and repeats of the ring below carry no information.
            if count == 0 || last == Some(count) {
                continue;
            }
            last = Some(count);
            out.push(SpineContour {
                owner,
                level: level.as_f64(),
                count,
                radius: relative_radius(count, dims),
                fraction: 0.0,
            });
        }
    }
    out
}

/// Assembles the spine at threshold `t` from the topology, the aggregated
/// cube of every segment alive at `t`, and the raw positions.
pub fn build_spine<T: Scalar>(
    table: &SampleTable<T>,
    f: &[T],
    topology: &TopologyArtifact<T>,
    cube_layout: &CubeLayout<T>,
    cubes: &BTreeMap<usize, AggregateCube>,
    t: T,
    config: &SpineConfig,
) -> SpineGraph {
    let h = &topology.hierarchy;
    let maxima = h.surviving_maxima(t);
    let saddles = saddles_at(h, &topology.saddles, t);
    let to_f64 = |p: Vec<T>| p.into_iter().map(Scalar::as_f64).collect::<Vec<_>>();

    let mut nodes: Vec<SpineNode> = maxima
        .iter()
        .map(|&m| (NodeKind::Extremum, m))
        .chain(saddles.iter().map(|s| (NodeKind::Saddle, s.vertex)))
        .enumerate()
        .map(|(id, (kind, vertex))| SpineNode {
            id,
            kind,
            vertex,
            f: f[vertex].as_f64(),
            xy: [0.0; 2],
            position: to_f64(table.point(vertex)),
        })
        .collect();
    let positions: Vec<Vec<f64>> = nodes.iter().map(|n| n.position.clone()).collect();
    let planar = layout_spine(&positions, config.layout);
    for (n, xy) in nodes.iter_mut().zip(&planar.xy) {
        n.xy = *xy;
    }

    let node_of: BTreeMap<usize, usize> = maxima.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut arcs = Vec::with_capacity(2 * saddles.len());
    let mut floors: BTreeMap<usize, T> = BTreeMap::new();
    for (k, s) in saddles.iter().enumerate() {
        let saddle = maxima.len() + k;
        for m in [s.a, s.b] {
            arcs.push(SpineArc {
                saddle,
                extremum: node_of[&m],
            });
            let e = floors.entry(m).or_insert(s.value);
            if s.value > *e {
                *e = s.value;
            }
        }
    }

    let f_max: BTreeMap<usize, T> = maxima.iter().map(|&m| (m, f[m])).collect();
    let alive: BTreeMap<usize, AggregateCube> = cubes
        .iter()
        .filter(|(id, _)| f_max.contains_key(id))
        .map(|(&id, c)| (id, c.clone()))
        .collect();
    let mut contours = build_contours(
        cube_layout,
        &alive,
        &f_max,
        &floors,
        table.dims(),
        config.levels_per_extremum,
    );

    let largest = contours.iter().map(|c| c.radius).fold(0.0, f64::max);
    let target = config.max_radius.unwrap_or_else(|| {
        let diameter = diameter(&planar.xy);
        if diameter > 0.0 {
            0.25 * diameter
        } else {
            1.0
        }
    });
    let scale = if largest > 0.0 { target / largest } else { 0.0 };
    for c in contours.iter_mut() {
        c.radius *= scale;
    }

    let mut graph = SpineGraph {
        t: t.as_f64(),
        dims: table.dims(),
        nodes,
        arcs,
        contours,
        scale,
        stress: planar.stress,
    };
    if config.repel {
        repel(&mut graph);
    }
    graph
}

fn diameter(xy: &[[f64; 2]]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in xy.iter().enumerate() {
        for b in &xy[i + 1..] {
            best = best.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
        }
    }
    best
}

/// Pushes apart extrema closer than the larger of their outer radii, in
/// node order, then moves each saddle by the mean shift of its extrema.
/// Presentation only; stress is not recomputed.
fn repel(graph: &mut SpineGraph) {
    let mut outer: BTreeMap<usize, f64> = BTreeMap::new();
    for c in &graph.contours {
        let r = outer.entry(c.owner).or_insert(0.0);
        *r = r.max(c.radius);
    }
    let extrema: Vec<usize> = graph
        .nodes
        .iter()
        .filter(|n| n.kind == NodeKind::Extremum)
        .map(|n| n.id)
        .collect();
    let radius = |g: &SpineGraph, id: usize| outer.get(&g.nodes[id].vertex).copied().unwrap_or(0.0);
    let before: Vec<[f64; 2]> = graph.nodes.iter().map(|n| n.xy).collect();
    const SWEEPS: usize = 64;
    for _ in 0..SWEEPS {
        let mut moved = false;
        for (a, &i) in extrema.iter().enumerate() {
            for &j in &extrema[a + 1..] {
                let need = radius(graph, i).max(radius(graph, j));
                let (p, q) = (graph.nodes[i].xy, graph.nodes[j].xy);
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                let dist = (dx * dx + dy * dy).sqrt();
                if need <= 0.0 || dist >= need * (1.0 - 1e-9) {
                    continue;
                }
                let (ux, uy) = if dist > 0.0 {
                    (dx / dist, dy / dist)
                } else {
                    // Coincident nodes separate along a direction fixed by the pair.
                    let angle = (i * 31 + j) as f64;
                    (angle.cos(), angle.sin())
                };
                let half = 0.5 * (need - dist);
                graph.nodes[i].xy = [p[0] - ux * half, p[1] - uy * half];
                graph.nodes[j].xy = [q[0] + ux * half, q[1] + uy * half];
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let mut shift: BTreeMap<usize, ([f64; 2], usize)> = BTreeMap::new();
    for arc in &graph.arcs {
        let e = arc.extremum;
        let d = [graph.nodes[e].xy[0] - before[e][0], graph.nodes[e].xy[1] - before[e][1]];
        let s = shift.entry(arc.saddle).or_insert(([0.0; 2], 0));
        s.0[0] += d[0];
        s.0[1] += d[1];
        s.1 += 1;
    }
    for (saddle, (d, n)) in shift {
        let xy = &mut graph.nodes[saddle].xy;
        xy[0] += d[0] / n as f64;
        xy[1] += d[1] / n as f64;
    }
}

/// Fills each contour's selected fraction from a scan run with
/// [`SpineGraph::selection_query`] at the same threshold.
pub fn shade_contours(graph: &mut SpineGraph, selection: &SelectionResult) -> Result<()> {
    if selection.t != graph.t {
        return Err(Error::ThresholdMismatch {
            selection: selection.t,
            contours: graph.t,
        });
    }
    let mut slot: BTreeMap<usize, usize> = BTreeMap::new();
    for c in graph.contours.iter_mut() {
        let k = slot.entry(c.owner).or_insert(0);
        let selected = selection
            .segments
            .get(&c.owner)
            .and_then(|s| s.selected_above.get(*k))
            .copied()
            .unwrap_or(0);
        *k += 1;
        c.fraction = if c.count == 0 {
            0.0
        } else {
            (selected as f64 / c.count as f64).min(1.0)
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests;
