//! Loaded artifacts plus the queries the HTTP layer exposes. Every number
//! in a payload comes straight from a core library call.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use topocube_core::cubes::{
    load_cubes, merge_cubes, pcp_pairs, segment_leaves, selection_scan, AggregateCube, AxisSource, Grid,
    SelectionCache, SelectionPredicate,
};
use topocube_core::spine::{build_spine, shade_contours, SpineConfig, SpineGraph};
use topocube_core::topology::{load_topology, persistence_curve, segmentation_at, PersistenceCurve};
use topocube_core::{cubes, Cubes, Table, Topology};

use crate::error::{Result, ServiceError};
use crate::manifest::ProjectManifest;
use crate::pipeline::load_dataset;

pub struct Session {
    pub project: PathBuf,
    pub manifest: ProjectManifest,
    pub table: Table,
    pub f: Vec<f64>,
    pub f_label: String,
    pub topology: Topology,
    pub cubes: Cubes,
    pub curve: PersistenceCurve<f64>,
    pub spine_config: SpineConfig,
    pub selection_cache: SelectionCache,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisMeta {
    pub index: usize,
    pub name: String,
    /// `domain` or `function`.
    pub kind: &'static str,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub engine_version: String,
    pub n: usize,
    pub d: usize,
    pub function: String,
    pub axes: Vec<AxisMeta>,
    pub pairs: Vec<(usize, usize)>,
    pub resolution: usize,
    pub t_base: f64,
    pub leaves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventPayload {
    pub victim: usize,
    pub survivor: usize,
    pub saddle: usize,
    pub persistence: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistencePayload {
    pub f_min: f64,
    pub f_max: f64,
    pub t_base: f64,
    pub points: Vec<CurvePoint>,
    pub events: Vec<EventPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentPayload {
    pub id: usize,
    pub count: u64,
    pub f_max: f64,
    pub leaves: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentsPayload {
    pub t: f64,
    pub total: u64,
    pub segments: Vec<SegmentPayload>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPayload {
    pub x: String,
    pub y: String,
    /// `counts[a][b]`: bin `a` of `x`, bin `b` of `y`.
    pub counts: Vec<Vec<u64>>,
}

impl GridPayload {
    fn new(layout: &cubes::CubeLayout<f64>, x: usize, y: usize, grid: &Grid) -> Self {
        GridPayload {
            x: layout.names[x].clone(),
            y: layout.names[y].clone(),
            counts: grid.rows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hist2dPayload {
    pub t: f64,
    pub segments: Vec<usize>,
    pub resolution: usize,
    pub total: u64,
    pub grid: GridPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcpPayload {
    pub t: f64,
    pub segments: Vec<usize>,
    pub resolution: usize,
    pub order: Vec<String>,
    pub grids: Vec<GridPayload>,
}

/// Body of `POST /selection`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SelectionRequest {
    pub t: f64,
    /// Closed range per axis name; absent axes are unconstrained.
    #[serde(default)]
    pub predicate: BTreeMap<String, (f64, f64)>,
    /// Active scatter pair.
    #[serde(default)]
    pub scatter: Option<(String, String)>,
    /// Segments feeding the scatter grid; all when absent.
    #[serde(default)]
    pub segments: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentSelectionPayload {
    pub id: usize,
    pub total: u64,
    pub selected: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourSelectionPayload {
    pub owner: usize,
    pub level: f64,
    pub count: u64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionPayload {
    pub t: f64,
    pub segments: Vec<SegmentSelectionPayload>,
    pub contours: Vec<ContourSelectionPayload>,
    pub scatter: Option<GridPayload>,
}

/// Scan bookkeeping reported outside the deterministic payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanInfo {
    pub millis: f64,
    pub cached: bool,
}

impl Session {
    /// Loads the dataset and both artifacts recorded in the manifest,
    /// checking every content hash.
    pub fn open(project: &Path) -> Result<Self> {
        let manifest = ProjectManifest::load(project)?;
        let topo_entry = manifest
            .topology
            .clone()
            .ok_or_else(|| ServiceError::State("no topology recorded; run `topology` first".into()))?;
        let cube_entry = manifest
            .cubes
            .clone()
            .ok_or_else(|| ServiceError::State("no cubes recorded; run `cubes` first".into()))?;
        let table = load_dataset(&manifest)?;
        let topology = load_topology::<f64>(&topo_entry.artifact.verified_path(project)?)?;
        let cubes = load_cubes::<f64>(&cube_entry.artifact.verified_path(project)?)?;
        let f = topo_entry.function.values(&table)?;
        if topology.segmentation.labels.len() != table.n_points() {
            return Err(ServiceError::State("topology does not match the dataset size".into()));
        }
        let curve = persistence_curve(&topology.hierarchy);
        Ok(Session {
            project: project.to_path_buf(),
            f_label: topo_entry.function.label(),
            manifest,
            table,
            f,
            topology,
            cubes,
            curve,
            spine_config: SpineConfig::default(),
            selection_cache: SelectionCache::new(),
        })
    }

    pub fn layout(&self) -> &cubes::CubeLayout<f64> {
        &self.cubes.layout
    }

    /// Accepts `t ∈ [t_base, 1]`.
    pub fn check_t(&self, t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return Err(ServiceError::Argument(format!("t must lie in [0, 1], got {t}")));
        }
        if t < self.cubes.t_base {
            return Err(ServiceError::Rebuild(format!(
                "t = {t} is below the cube leaf threshold {}; rebuild cubes with a lower --t-base",
                self.cubes.t_base
            )));
        }
        Ok(())
    }

    pub fn axis(&self, name: &str) -> Result<usize> {
        let layout = self.layout();
        layout
            .axis_index(name)
            .or_else(|| name.parse::<usize>().ok().filter(|&i| i < layout.n_axes()))
            .ok_or_else(|| ServiceError::NotFound(format!("unknown axis `{name}`")))
    }

    pub fn meta(&self) -> Meta {
        let layout = self.layout();
        Meta {
            engine_version: self.manifest.engine_version.clone(),
            n: self.table.n_points(),
            d: self.table.dims(),
            function: self.f_label.clone(),
            axes: (0..layout.n_axes())
                .map(|i| AxisMeta {
                    index: i,
                    name: layout.names[i].clone(),
                    kind: match layout.sources[i] {
                        AxisSource::Domain(_) => "domain",
                        AxisSource::Function => "function",
                    },
                    min: layout.bounds[i].min,
                    max: layout.bounds[i].max,
                })
                .collect(),
            pairs: layout.pairs.clone(),
            resolution: layout.resolution,
            t_base: self.cubes.t_base,
            leaves: self.cubes.leaves.len(),
        }
    }

    pub fn persistence(&self) -> PersistencePayload {
        let h = &self.topology.hierarchy;
        PersistencePayload {
            f_min: h.f_range.min,
            f_max: h.f_range.max,
            t_base: self.cubes.t_base,
            points: self
                .curve
                .points
                .iter()
                .map(|&(t, count)| CurvePoint { t, count })
                .collect(),
            events: h
                .events
                .iter()
                .enumerate()
                .map(|(i, e)| EventPayload {
                    victim: e.victim,
                    survivor: e.survivor,
                    saddle: e.saddle,
                    persistence: e.persistence,
                    t: h.normalized_persistence(i),
                })
                .collect(),
        }
    }

    /// Leaf ids per segment alive at `t`.
    fn groups(&self, t: f64) -> Result<BTreeMap<usize, Vec<usize>>> {
        self.check_t(t)?;
        Ok(segment_leaves(&self.cubes, &self.topology.hierarchy, t)?)
    }

    /// Merged cube over the chosen segments (all when `None`).
    pub fn merged(&self, t: f64, segments: Option<&[usize]>) -> Result<(Vec<usize>, AggregateCube)> {
        let groups = self.groups(t)?;
        let ids: Vec<usize> = match segments {
            Some(ids) => {
                let mut ids = ids.to_vec();
                ids.sort_unstable();
                ids.dedup();
                if let Some(bad) = ids.iter().find(|id| !groups.contains_key(id)) {
                    return Err(ServiceError::NotFound(format!("segment {bad} does not exist at t = {t}")));
                }
                ids
            }
            None => groups.keys().copied().collect(),
        };
        let leaves: Vec<_> = ids
            .iter()
            .flat_map(|id| groups[id].iter())
            .map(|&l| self.cubes.leaf(l).expect("grouped leaves exist"))
            .collect();
        Ok((ids, merge_cubes(self.layout().shape(), &leaves)?))
    }

    pub fn segments(&self, t: f64) -> Result<SegmentsPayload> {
        let groups = self.groups(t)?;
        let segments: Vec<SegmentPayload> = groups
            .into_iter()
            .map(|(id, leaves)| {
                let refs: Vec<_> = leaves.iter().map(|&l| self.cubes.leaf(l).unwrap()).collect();
                let cube = merge_cubes(self.layout().shape(), &refs)?;
                Ok(SegmentPayload {
                    id,
                    count: cube.hist.count,
                    f_max: self.f[id],
                    leaves,
                })
            })
            .collect::<Result<_>>()?;
        Ok(SegmentsPayload {
            t,
            total: segments.iter().map(|s| s.count).sum(),
            segments,
        })
    }

    pub fn spine(&self, t: f64) -> Result<SpineGraph> {
        let groups = self.groups(t)?;
        let mut cubes = BTreeMap::new();
        for (id, leaves) in groups {
            let refs: Vec<_> = leaves.iter().map(|&l| self.cubes.leaf(l).unwrap()).collect();
            cubes.insert(id, merge_cubes(self.layout().shape(), &refs)?);
        }
        Ok(build_spine(
            &self.table,
            &self.f,
            &self.topology,
            self.layout(),
            &cubes,
            t,
            &self.spine_config,
        ))
    }

    pub fn hist2d(&self, t: f64, segments: Option<&[usize]>, x: &str, y: &str) -> Result<Hist2dPayload> {
        let (xi, yi) = (self.axis(x)?, self.axis(y)?);
        if xi == yi {
            return Err(ServiceError::Argument(format!("x and y must be different axes, both are `{x}`")));
        }
        let (ids, cube) = self.merged(t, segments)?;
        let grid = cubes::hist2d(self.layout(), &cube, xi, yi)?;
        Ok(Hist2dPayload {
            t,
            segments: ids,
            resolution: self.layout().resolution,
            total: grid.total(),
            grid: GridPayload::new(self.layout(), xi, yi, &grid),
        })
    }

    pub fn pcp(&self, t: f64, segments: Option<&[usize]>, order: &[String]) -> Result<PcpPayload> {
        let axes: Vec<usize> = if order.is_empty() {
            (0..self.layout().n_axes()).collect()
        } else {
            order.iter().map(|a| self.axis(a)).collect::<Result<_>>()?
        };
        if axes.len() < 2 {
            return Err(ServiceError::Argument("order needs at least two axes".into()));
        }
        let (ids, cube) = self.merged(t, segments)?;
        let grids = pcp_pairs(self.layout(), &cube, &axes)?;
        Ok(PcpPayload {
            t,
            segments: ids,
            resolution: self.layout().resolution,
            order: axes.iter().map(|&a| self.layout().names[a].clone()).collect(),
            grids: grids
                .iter()
                .zip(axes.windows(2))
                .map(|(g, w)| GridPayload::new(self.layout(), w[0], w[1], g))
                .collect(),
        })
    }

    /// Raw-data scan for a linked selection, shading the spine contours of
    /// the same threshold.
    pub fn selection(&self, request: &SelectionRequest) -> Result<(SelectionPayload, ScanInfo)> {
        let t = request.t;
        let spine = self.spine(t)?;
        let mut predicate = SelectionPredicate::all();
        for (name, &(lo, hi)) in &request.predicate {
            if !(lo <= hi) {
                return Err(ServiceError::Argument(format!("empty or invalid range for `{name}`")));
            }
            predicate = predicate.with_range(self.axis(name)?, lo, hi);
        }
        let mut query = spine.selection_query::<f64>();
        query.scatter = match &request.scatter {
            Some((x, y)) => Some((self.axis(x)?, self.axis(y)?)),
            None => None,
        };
        let groups = self.groups(t)?;
        if let Some(ids) = &request.segments {
            if let Some(bad) = ids.iter().find(|id| !groups.contains_key(id)) {
                return Err(ServiceError::NotFound(format!("segment {bad} does not exist at t = {t}")));
            }
            let mut ids = ids.clone();
            ids.sort_unstable();
            ids.dedup();
            query.scatter_segments = Some(ids);
        }

        let started = Instant::now();
        let (result, cached) = self.selection_cache.get_or_scan(t, &predicate, &query, || {
            let seg = segmentation_at(&self.topology.hierarchy, &self.topology.segmentation, t);
            selection_scan(&self.table, &self.f, &seg, t, self.layout(), &predicate, &query)
        })?;
        let millis = started.elapsed().as_secs_f64() * 1e3;

        let mut shaded = spine;
        shade_contours(&mut shaded, &result)?;
        let payload = SelectionPayload {
            t,
            segments: result
                .segments
                .iter()
                .map(|(&id, s)| SegmentSelectionPayload {
                    id,
                    total: s.total,
                    selected: s.selected,
                    fraction: if s.total == 0 { 0.0 } else { s.selected as f64 / s.total as f64 },
                })
                .collect(),
            contours: shaded
                .contours
                .iter()
                .map(|c| ContourSelectionPayload {
                    owner: c.owner,
                    level: c.level,
                    count: c.count,
                    fraction: c.fraction,
                })
                .collect(),
            scatter: match (query.scatter, &result.scatter) {
                (Some((x, y)), Some(g)) => Some(GridPayload::new(self.layout(), x, y, g)),
                _ => None,
            },
        };
        Ok((payload, ScanInfo { millis, cached }))
    }
}

pub type SharedSession = Arc<Session>;
