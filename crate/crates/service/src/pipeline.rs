//! Offline pipeline stages. Each stage reads the manifest, writes one
//! artifact into the project directory, and records it.

use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use topocube_core::cubes::{build_cubes, leaf_threshold, save_cubes, CubeConfig};
use topocube_core::dataset::{load_table, save_packed, Format, FunctionSelector, Schema};
use topocube_core::neighbors::{
    append_knn_density, build_index, saturation_curve, EdgeStreamConfig, StreamingGraph, WitnessMode,
};
use topocube_core::topology::{compute_topology, load_topology, save_topology, segmentation_at, GradientMode};
use topocube_core::{EdgeConfig, Table};

use crate::error::{Result, ServiceError};
use crate::manifest::{
    now, sha256_file, ArtifactEntry, CubesEntry, DatasetEntry, ProjectManifest, TopologyEntry, CUBES_FILE,
    ENGINE_VERSION, TOPOLOGY_FILE,
};

pub const TABLE_FILE: &str = "table.tdc";

/// Where a table comes from and which columns play which role.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub path: PathBuf,
    pub format: Option<Format>,
    /// Empty means every column that is not a measure (CSV) or the stored
    /// roles (packed).
    pub domain: Vec<String>,
    pub measures: Vec<String>,
}

impl InputSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        InputSpec {
            path: path.into(),
            format: None,
            domain: Vec::new(),
            measures: Vec::new(),
        }
    }

    fn format(&self) -> Format {
        self.format.unwrap_or_else(|| Format::from_path(&self.path))
    }

    fn schema(&self) -> Result<Schema> {
        if self.format() == Format::PackedBinary || !self.domain.is_empty() {
            return Ok(Schema::new(self.domain.clone(), self.measures.clone()));
        }
        if self.measures.is_empty() {
            return Err(ServiceError::Argument("CSV input needs --measure".into()));
        }
        let mut header = String::new();
        std::fs::File::open(&self.path)
            .map(std::io::BufReader::new)
            .and_then(|mut r| std::io::BufRead::read_line(&mut r, &mut header))
            .map_err(|e| ServiceError::Input(format!("{}: {e}", self.path.display())))?;
        let domain: Vec<String> = header
            .split(',')
            .map(|c| c.trim().trim_matches('"').to_string())
            .filter(|c| !c.is_empty() && !self.measures.contains(c))
            .collect();
        Ok(Schema::new(domain, self.measures.clone()))
    }
}

/// Loads a table and describes it for the manifest.
pub fn load_input(spec: &InputSpec) -> Result<(Table, DatasetEntry)> {
    if !spec.path.exists() {
        return Err(ServiceError::Input(format!("input file {} does not exist", spec.path.display())));
    }
    let schema = spec.schema()?;
    let report = load_table::<f64>(&spec.path, spec.format(), &schema)?;
    if report.rejected_rows > 0 {
        info!("rejected {} rows with missing or non-finite values", report.rejected_rows);
    }
    let table = report.table;
    let path = std::fs::canonicalize(&spec.path)?;
    let schema = Schema::new(
        table.domain_names().map(str::to_string).collect::<Vec<_>>(),
        table.measure_columns().iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
    );
    let entry = DatasetEntry {
        sha256: sha256_file(&path)?,
        path,
        format: spec.format(),
        schema,
        n_points: table.n_points(),
        dims: table.dims(),
    };
    Ok((table, entry))
}

/// Reloads the manifest's dataset after checking its hash.
pub fn load_dataset(manifest: &ProjectManifest) -> Result<Table> {
    manifest.verify_dataset()?;
    let d = &manifest.dataset;
    Ok(load_table::<f64>(&d.path, d.format, &d.schema)?.table)
}

fn fresh_manifest(dataset: DatasetEntry) -> ProjectManifest {
    ProjectManifest {
        engine_version: ENGINE_VERSION.to_string(),
        created: now(),
        dataset,
        topology: None,
        cubes: None,
    }
}

/// Converts the input to a packed table inside the project, optionally
/// adding a k-NN density measure, and starts a new manifest.
pub fn ingest(spec: &InputSpec, project: &Path, density_k: Option<usize>) -> Result<ProjectManifest> {
    let (mut table, _) = load_input(spec)?;
    if let Some(k) = density_k {
        let index = build_index(&table);
        let (with, density) = append_knn_density(&index, table, k, "density")?;
        drop(index);
        let degenerate = density.degenerate.len();
        if degenerate > 0 {
            info!("{degenerate} points had zero mean neighbor distance; density set to the table maximum");
        }
        table = with;
    }
    std::fs::create_dir_all(project)?;
    let out = project.join(TABLE_FILE);
    save_packed(&table, &out)?;
    let (_, entry) = load_input(&InputSpec::new(&out))?;
    let manifest = fresh_manifest(entry);
    manifest.save(project)?;
    info!("ingested {} rows x {} dims into {}", table.n_points(), table.dims(), out.display());
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyRequest {
    /// Replaces the project's dataset when given.
    pub input: Option<InputSpec>,
    /// Defaults to the first measure column.
    pub function: Option<FunctionSelector>,
    pub edges: EdgeConfig,
    pub gradient: GradientMode,
}

/// Builds the extremum graph and hierarchy, writes `topology.tdt`.
pub fn run_topology(project: &Path, request: &TopologyRequest) -> Result<ProjectManifest> {
    let (table, mut manifest) = match &request.input {
        Some(spec) => {
            let (table, entry) = load_input(spec)?;
            let keep = ProjectManifest::load(project).ok().filter(|m| m.dataset == entry);
            (table, keep.unwrap_or_else(|| fresh_manifest(entry)))
        }
        None => {
            let manifest = ProjectManifest::load(project)?;
            (load_dataset(&manifest)?, manifest)
        }
    };
    let function = match &request.function {
        Some(f) => f.clone(),
        None => FunctionSelector::new(
            table
                .measure_columns()
                .first()
                .map(|c| c.name.clone())
                .ok_or_else(|| ServiceError::Input("table has no measure column".into()))?,
        ),
    };
    let f = function.values(&table)?;
    let index = build_index(&table);
    let graph = StreamingGraph::new(&index, request.edges)?;
    let topo = compute_topology(&graph, &table, &f, request.gradient)?;
    std::fs::create_dir_all(project)?;
    save_topology(&topo, &project.join(TOPOLOGY_FILE))?;
    info!(
        "topology: {} maxima, {} saddles, {} merge events",
        topo.segmentation.maxima.len(),
        topo.saddles.len(),
        topo.hierarchy.events.len()
    );
    let entry = TopologyEntry {
        artifact: ArtifactEntry::record(project, TOPOLOGY_FILE)?,
        function,
        edges: request.edges,
        gradient: request.gradient,
    };
    if manifest.topology.as_ref().map(|t| &t.artifact.sha256) != Some(&entry.artifact.sha256) {
        // Cubes built on another segmentation are stale.
        manifest.cubes = None;
    }
    manifest.topology = Some(entry);
    manifest.save(project)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubesRequest {
    pub config: CubeConfig,
    /// Maximum number of leaf segments when `t_base` is not given.
    pub max_leaves: usize,
    pub t_base: Option<f64>,
}

/// Bins every leaf segment at the leaf threshold, writes `cubes.tdq`.
pub fn run_cubes(project: &Path, request: &CubesRequest) -> Result<ProjectManifest> {
    let mut manifest = ProjectManifest::load(project)?;
    let topo_entry = manifest
        .topology
        .clone()
        .ok_or_else(|| ServiceError::State("no topology recorded; run `topology` first".into()))?;
    let table = load_dataset(&manifest)?;
    let topo = load_topology::<f64>(&topo_entry.artifact.verified_path(project)?)?;
    let f = topo_entry.function.values(&table)?;
    let h = &topo.hierarchy;
    let t_base = match request.t_base {
        Some(t) if (0.0..=1.0).contains(&t) => t,
        Some(t) => return Err(ServiceError::Argument(format!("--t-base must lie in [0, 1], got {t}"))),
        None => leaf_threshold(h, request.max_leaves).t,
    };
    let base = segmentation_at(h, &topo.segmentation, t_base);
    let set = build_cubes(&table, &f, &topo_entry.function.label(), &base, &request.config, t_base)?;
    save_cubes(&set, &project.join(CUBES_FILE))?;
    info!("cubes: {} leaves at t_base = {t_base}, r = {}", set.leaves.len(), request.config.resolution);
    manifest.cubes = Some(CubesEntry {
        artifact: ArtifactEntry::record(project, CUBES_FILE)?,
        config: request.config.clone(),
        t_base,
        leaves: set.leaves.len(),
    });
    manifest.save(project)?;
    Ok(manifest)
}

/// One row of the saturation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStatsRow {
    pub k: usize,
    /// `k` clamped to `n − 1`.
    pub effective_k: usize,
    pub edges: usize,
}

pub fn graph_stats(table: &Table, ks: &[usize], beta: f64, mode: WitnessMode) -> Result<Vec<GraphStatsRow>> {
    if ks.is_empty() {
        return Err(ServiceError::Argument("--k needs at least one value".into()));
    }
    let n = table.n_points();
    if n < 2 {
        return Err(ServiceError::Input("graph statistics need at least two points".into()));
    }
    let mut effective: Vec<usize> = ks.iter().map(|&k| k.clamp(1, n - 1)).collect();
    effective.sort_unstable();
    effective.dedup();
    let index = build_index(table);
    let curve = saturation_curve(&index, &effective, beta, mode)?;
    Ok(ks
        .iter()
        .map(|&k| {
            let e = k.clamp(1, n - 1);
            let edges = curve.iter().find(|p| p.k == e).map(|p| p.edges).unwrap_or(0);
            GraphStatsRow {
                k,
                effective_k: e,
                edges,
            }
        })
        .collect())
}

pub fn write_graph_stats<W: Write>(rows: &[GraphStatsRow], out: &mut W) -> Result<()> {
    writeln!(out, "k,effective_k,edges")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.k, r.effective_k, r.edges)?;
    }
    Ok(())
}

/// Edge stream settings from CLI-level values.
pub fn edge_config(k: usize, beta: f64, mode: WitnessMode, symmetrize: bool) -> EdgeConfig {
    EdgeStreamConfig::new(k)
        .with_beta(beta)
        .with_witness_mode(mode)
        .with_symmetrize(symmetrize)
}
