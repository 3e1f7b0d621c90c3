//! Command-line driver.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use topocube_core::cubes::{CubeConfig, PairSelection, DEFAULT_MAX_LEAVES, DEFAULT_RESOLUTION};
use topocube_core::dataset::{save_packed, synth_gaussian_mixture, Format, FunctionSelector};
use topocube_core::neighbors::WitnessMode;
use topocube_core::topology::GradientMode;

use crate::error::{Result, ServiceError};
use crate::oracle::run_oracle;
use crate::pipeline::{
    edge_config, graph_stats, ingest, load_input, run_cubes, run_topology, write_graph_stats, CubesRequest, InputSpec,
    TopologyRequest,
};
use crate::session::Session;

#[derive(Debug, Parser)]
#[command(name = "topocube", version, about = "Topology of sampled high-dimensional functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a table to the packed format inside a project.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "project")]
        project: PathBuf,
        /// Also add a `density` measure: inverse mean distance to k neighbors.
        #[arg(long)]
        density_k: Option<usize>,
    },
    /// Edge counts of the symmetric empty-region graph for several k.
    GraphStats {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated candidate counts.
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32, 64, 128])]
        k: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = WitnessArg::Strict)]
        witness_mode: WitnessArg,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Extremum graph and persistence hierarchy.
    Topology {
        #[command(flatten)]
        input: OptionalInput,
        #[arg(long, default_value = "project")]
        project: PathBuf,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Per-leaf histogram cubes.
    Cubes {
        #[arg(long, default_value = "project")]
        project: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        /// Maximum leaf segments; sets the leaf threshold unless --t-base is given.
        #[arg(long, default_value_t = DEFAULT_MAX_LEAVES)]
        leaves: usize,
        #[arg(long)]
        t_base: Option<f64>,
        /// Store only adjacent axis pairs plus these `a:b` pairs.
        #[arg(long, value_delimiter = ',')]
        pairs: Option<Vec<String>>,
        /// Add (i, j, f) cubes for stored domain pairs.
        #[arg(long)]
        triples: bool,
    },
    /// HTTP query service over a finished project.
    Serve {
        #[arg(long, default_value = "project")]
        project: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
    /// Brute-force cross-checks on a small input.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        function: FunctionArgs,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Write a Gaussian-mixture test table.
    Synth {
        #[arg(long, value_enum, default_value_t = Preset::TwoGaussians)]
        preset: Preset,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 2D, centers (0.25, 0.5) and (0.75, 0.5), amplitudes 1.0 and 0.6, width 0.1.
    TwoGaussians,
    /// 5D, four bumps of amplitude 1.0, 0.8, 0.6, 0.4 at far-apart cube corners.
    FourGaussians,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Domain columns (CSV); defaults to every non-measure column.
    #[arg(long, value_delimiter = ',')]
    pub domain: Vec<String>,
    /// Measure columns (CSV).
    #[arg(long, value_delimiter = ',')]
    pub measure: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OptionalInput {
    /// Dataset to analyze; the project's dataset when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_delimiter = ',')]
    pub domain: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub measure: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FunctionArgs {
    /// Measure column to analyze; the first measure when absent.
    #[arg(long)]
    pub function: Option<String>,
    /// Analyze minima by negating the function.
    #[arg(long)]
    pub negate: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = WitnessArg::Strict)]
    pub witness_mode: WitnessArg,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub symmetrize: bool,
    #[arg(long, value_enum, default_value_t = GradientArg::Slope)]
    pub gradient: GradientArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Packed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessArg {
    Strict,
    Relaxed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GradientArg {
    Slope,
    RawDifference,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Packed => Format::PackedBinary,
        }
    }
}

impl From<WitnessArg> for WitnessMode {
    fn from(w: WitnessArg) -> Self {
        match w {
            WitnessArg::Strict => WitnessMode::Strict,
            WitnessArg::Relaxed => WitnessMode::Relaxed,
        }
    }
}

impl From<GradientArg> for GradientMode {
    fn from(g: GradientArg) -> Self {
        match g {
            GradientArg::Slope => GradientMode::Slope,
            GradientArg::RawDifference => GradientMode::RawDifference,
        }
    }
}

impl InputArgs {
    fn spec(&self) -> InputSpec {
        InputSpec {
            path: self.input.clone(),
            format: self.format.map(Into::into),
            domain: self.domain.clone(),
            measures: self.measure.clone(),
        }
    }
}

impl FunctionArgs {
    fn selector(&self) -> Option<FunctionSelector> {
        match (&self.function, self.negate) {
            (Some(c), false) => Some(FunctionSelector::new(c.clone())),
            (Some(c), true) => Some(FunctionSelector::new(c.clone()).negated()),
            (None, _) => None,
        }
    }
}

impl GraphArgs {
    fn validate(&self) -> Result<()> {
        if !(self.beta >= 1.0) {
            return Err(ServiceError::Argument(format!("--beta must be >= 1, got {}", self.beta)));
        }
        if self.k == 0 {
            return Err(ServiceError::Argument("--k must be positive".into()));
        }
        Ok(())
    }
}

fn preset_table(preset: Preset, n: usize, seed: u64) -> Result<topocube_core::Table> {
    Ok(match preset {
        Preset::TwoGaussians => synth_gaussian_mixture(
            2,
            &[vec![0.25, 0.5], vec![0.75, 0.5]],
            &[1.0, 0.6],
            &[0.1, 0.1],
            n,
            seed,
        )?,
        Preset::FourGaussians => {
            let corner = |bits: [u8; 5]| bits.iter().map(|&b| if b == 1 { 0.9 } else { 0.1 }).collect::<Vec<f64>>();
            synth_gaussian_mixture(
                5,
                &[
                    corner([0, 0, 0, 0, 0]),
                    corner([1, 1, 1, 0, 0]),
                    corner([0, 0, 1, 1, 1]),
                    corner([1, 1, 0, 1, 1]),
                ],
                &[1.0, 0.8, 0.6, 0.4],
                &[0.3; 4],
                n,
                seed,
            )?
        }
    })
}

/// Runs one command. Logging and the error JSON are the caller's concern.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            input,
            project,
            density_k,
        } => {
            let m = ingest(&input.spec(), &project, density_k)?;
            println!("{}", m.dataset.path.display());
        }
        Command::GraphStats {
            input,
            k,
            beta,
            witness_mode,
            output,
        } => {
            let (table, _) = load_input(&input.spec())?;
            let rows = graph_stats(&table, &k, beta, witness_mode.into())?;
            match output {
                Some(path) => {
                    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
                    write_graph_stats(&rows, &mut file)?;
                    file.flush()?;
                }
                None => write_graph_stats(&rows, &mut std::io::stdout().lock())?,
            }
        }
        Command::Topology {
            input,
            project,
            function,
            graph,
        } => {
            graph.validate()?;
            let spec = input.input.map(|path| InputSpec {
                path,
                format: input.format.map(Into::into),
                domain: input.domain,
                measures: input.measure,
            });
            let request = TopologyRequest {
                input: spec,
                function: function.selector(),
                edges: edge_config(graph.k, graph.beta, graph.witness_mode.into(), graph.symmetrize),
                gradient: graph.gradient.into(),
            };
            run_topology(&project, &request)?;
        }
        Command::Cubes {
            project,
            resolution,
            leaves,
            t_base,
            pairs,
            triples,
        } => {
            let pairs = match pairs {
                None => PairSelection::All,
                Some(list) => PairSelection::AdjacentPlus(
                    list.iter()
                        .map(|p| {
                            p.split_once(':')
                                .map(|(a, b)| (a.to_string(), b.to_string()))
                                .ok_or_else(|| ServiceError::Argument(format!("pair `{p}` is not `a:b`")))
                        })
                        .collect::<Result<_>>()?,
                ),
            };
            let config = CubeConfig {
                resolution,
                axes: Vec::new(),
                pairs,
                include_f_triples: triples,
            };
            run_cubes(
                &project,
                &CubesRequest {
                    config,
                    max_leaves: leaves,
                    t_base,
                },
            )?;
        }
        Command::Serve { project, port, host } => {
            let session = Arc::new(Session::open(&project)?);
            info!(
                "serving {} points, {} leaves at t_base = {}",
                session.table.n_points(),
                session.cubes.leaves.len(),
                session.cubes.t_base
            );
            let runtime = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()
                .map_err(|e| ServiceError::Internal(e.to_string()))?;
            runtime.block_on(crate::api::serve(session, SocketAddr::new(host, port)))?;
        }
        Command::Oracle { input, function, graph } => {
            graph.validate()?;
            let (table, _) = load_input(&input.spec())?;
            let edges = edge_config(graph.k, graph.beta, graph.witness_mode.into(), graph.symmetrize);
            let report = run_oracle(&table, function.selector().as_ref(), edges, graph.gradient.into())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).map_err(|e| ServiceError::Internal(e.to_string()))?
            );
            if !report.passed() {
                let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                return Err(ServiceError::Oracle(format!("checks failed: {}", failed.join(", "))));
            }
        }
        Command::Synth {
            preset,
            n,
            seed,
            output,
        } => {
            let table = preset_table(preset, n, seed)?;
            save_packed(&table, &output)?;
        }
    }
    Ok(())
}

/// Peak resident set size in KiB, when the platform reports it.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find(|l| l.starts_with("VmHWM:"))?
        .split_whitespace()
        .nth(1)?
        .parse()
        .ok()
}

/// Caps the rayon pool from `TDA_THREADS`.
pub fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("TDA_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| ServiceError::Argument(format!("TDA_THREADS must be a positive integer, got `{raw}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
    }
    Ok(())
}

/// Entry point shared by the binary: runs, logs resources, reports errors.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    let outcome = configure_threads().and_then(|_| run(cli));
    info!(
        "wall_ms={:.1} peak_rss_kib={}",
        started.elapsed().as_secs_f64() * 1e3,
        peak_rss_kib().map_or("unknown".to_string(), |k| k.to_string())
    );
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.body()).unwrap_or_else(|_| e.to_string()));
            e.exit_code()
        }
    }
}
