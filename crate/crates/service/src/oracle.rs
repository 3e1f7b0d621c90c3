//! Brute-force cross-checks of the streaming engine on small inputs.

use serde::Serialize;
use topocube_core::dataset::FunctionSelector;
use topocube_core::graph::ExplicitGraph;
use topocube_core::neighbors::{build_index, EdgeStreamConfig, StreamingGraph};
use topocube_core::reference;
use topocube_core::topology::{
    build_hierarchy, pass1_links, pass2_saddles, resolve_labels, segmentation_at, GradientMode,
};
use topocube_core::{EdgeConfig, Table};

use crate::error::{Result, ServiceError};

/// Largest input the cubic Gabriel check runs on.
pub const GABRIEL_LIMIT: usize = 1000;
/// Largest input accepted at all.
pub const ORACLE_LIMIT: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n_points: usize,
    pub dims: usize,
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> OracleCheck {
    OracleCheck {
        name,
        passed,
        detail: detail.into(),
    }
}

pub fn run_oracle(
    table: &Table,
    function: Option<&FunctionSelector>,
    edges: EdgeConfig,
    gradient: GradientMode,
) -> Result<OracleReport> {
    let n = table.n_points();
    if n > ORACLE_LIMIT {
        return Err(ServiceError::Argument(format!(
            "oracle runs on at most {ORACLE_LIMIT} points, input has {n}"
        )));
    }
    if n < 2 {
        return Err(ServiceError::Input("oracle needs at least two points".into()));
    }
    let pts = reference::points(table);
    let index = build_index(table);
    let mut checks = Vec::new();

    let spots: Vec<usize> = (0..n).step_by((n / 20).max(1)).collect();
    let k = 10.min(n - 1);
    let bad = spots
        .iter()
        .filter(|&&q| {
            let got: Vec<usize> = index.knn(q, k).map(|v| v.iter().map(|x| x.id).collect()).unwrap_or_default();
            got != reference::knn(&pts, q, k)
        })
        .count();
    checks.push(check("knn", bad == 0, format!("{} spot queries, {bad} mismatches", spots.len())));

    if n <= GABRIEL_LIMIT {
        let g = ExplicitGraph::collect(&StreamingGraph::new(&index, EdgeStreamConfig::new(n - 1))?).edges();
        let want = reference::gabriel_edges(&pts);
        checks.push(check(
            "gabriel",
            g == want,
            format!("{} streamed edges, {} reference edges", g.len(), want.len()),
        ));
    } else {
        checks.push(check("gabriel", true, format!("skipped above {GABRIEL_LIMIT} points")));
    }

    let k = edges.k.min(n - 1);
    let config = EdgeConfig { k, ..edges };
    let graph = StreamingGraph::new(&index, config)?;
    let explicit = ExplicitGraph::collect(&graph);
    let want = reference::pruned_graph(&pts, k, config.beta, config.witness_mode, config.symmetrize);
    checks.push(check(
        "pruned-graph",
        explicit == want,
        format!("k = {k}, {} edges", explicit.edges().len()),
    ));

    let function = match function {
        Some(f) => f.clone(),
        None => FunctionSelector::new(
            table
                .measure_columns()
                .first()
                .map(|c| c.name.clone())
                .ok_or_else(|| ServiceError::Input("table has no measure column".into()))?,
        ),
    };
    let f = function.values(table)?;
    let links = pass1_links(&graph, table, &f, gradient);
    if gradient == GradientMode::Slope {
        let want = reference::steepest_links(&explicit, &pts, &f);
        checks.push(check("links", links.links == want, format!("{} maxima", links.maxima().len())));
    }
    let seg = resolve_labels(&links)?;
    let naive = reference::chain_labels(&links.links);
    checks.push(check(
        "labels",
        seg.labels == naive,
        format!("{} segments", seg.maxima.len()),
    ));
    let saddles = pass2_saddles(&graph, &f, &seg);
    let want = reference::edge_list_saddles(&explicit.edges(), &f, &seg.labels);
    checks.push(check("saddles", saddles == want, format!("{} saddle records", saddles.len())));

    let h = build_hierarchy(&seg, &saddles, &f);
    let base = h.base_maxima.len();
    let ok = (0..h.events.len()).all(|i| {
        let t = h.normalized_persistence(i);
        let expected = base - (0..h.events.len()).filter(|&j| h.normalized_persistence(j) <= t).count();
        segmentation_at(&h, &seg, t).maxima.len() == expected
    });
    checks.push(check(
        "threshold-semantics",
        ok,
        format!("{} events checked", h.events.len()),
    ));

    Ok(OracleReport {
        n_points: n,
        dims: table.dims(),
        checks,
    })
}
