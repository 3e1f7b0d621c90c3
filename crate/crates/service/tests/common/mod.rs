#![allow(dead_code)]

use std::path::{Path, PathBuf};

use topocube::pipeline::{edge_config, run_cubes, run_topology, CubesRequest, InputSpec, TopologyRequest};
use topocube_core::cubes::CubeConfig;
use topocube_core::dataset::{save_packed, synth_gaussian_mixture};
use topocube_core::neighbors::WitnessMode;
use topocube_core::topology::GradientMode;
use topocube_core::Table;

pub fn two_gaussians(n: usize, seed: u64) -> Table {
    synth_gaussian_mixture(
        2,
        &[vec![0.25, 0.5], vec![0.75, 0.5]],
        &[1.0, 0.6],
        &[0.1, 0.1],
        n,
        seed,
    )
    .unwrap()
}

pub fn three_bumps_3d(n: usize, seed: u64) -> Table {
    synth_gaussian_mixture(
        3,
        &[vec![0.2, 0.2, 0.5], vec![0.8, 0.3, 0.5], vec![0.5, 0.8, 0.2]],
        &[1.0, 0.75, 0.5],
        &[0.15, 0.15, 0.15],
        n,
        seed,
    )
    .unwrap()
}

/// Writes `table` into `dir` and runs topology and cubes on it.
pub fn build_project(dir: &Path, table: &Table, k: usize, config: CubeConfig, max_leaves: usize) -> PathBuf {
    let data = dir.join("data.tdc");
    save_packed(table, &data).unwrap();
    let project = dir.join("project");
    run_topology(
        &project,
        &TopologyRequest {
            input: Some(InputSpec::new(&data)),
            function: None,
            edges: edge_config(k, 1.0, WitnessMode::Strict, true),
            gradient: GradientMode::Slope,
        },
    )
    .unwrap();
    run_cubes(
        &project,
        &CubesRequest {
            config,
            max_leaves,
            t_base: None,
        },
    )
    .unwrap();
    project
}
