mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use topocube::api::router;
use topocube::Session;
use topocube_core::cubes::{aggregate_at, hist2d, merge_cubes, pcp_pairs, CubeConfig};
use topocube_core::topology::segmentation_at;

struct Fixture {
    _dir: tempfile::TempDir,
    session: Arc<Session>,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let table = common::three_bumps_3d(4000, 5);
    let project = common::build_project(dir.path(), &table, 16, CubeConfig::default().with_resolution(16), 32);
    Fixture {
        session: Arc::new(Session::open(&project).unwrap()),
        _dir: dir,
    }
}

async fn call(session: &Arc<Session>, req: Request<Body>) -> (StatusCode, Value, axum::http::HeaderMap) {
    let resp = router(session.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap(), headers)
}

async fn get(session: &Arc<Session>, uri: &str) -> (StatusCode, Value) {
    let (s, v, _) = call(session, Request::get(uri).body(Body::empty()).unwrap()).await;
    (s, v)
}

fn grid_json(g: &topocube_core::cubes::Grid) -> Value {
    json!(g.rows())
}

#[tokio::test]
async fn meta_and_curve() {
    let fx = fixture();
    let (s, meta) = get(&fx.session, "/v1/meta").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(meta["n"], 4000);
    assert_eq!(meta["d"], 3);
    assert_eq!(meta["axes"].as_array().unwrap().len(), 4);
    assert_eq!(meta["axes"][3]["kind"], "function");
    let (s, curve) = get(&fx.session, "/v1/persistence-curve").await;
    assert_eq!(s, StatusCode::OK);
    let points = curve["points"].as_array().unwrap();
    assert_eq!(points.first().unwrap()["t"], 0.0);
    assert_eq!(points.last().unwrap()["t"], 1.0);
    assert_eq!(points.last().unwrap()["count"], 1);
    let h = &fx.session.topology.hierarchy;
    assert_eq!(curve["events"].as_array().unwrap().len(), h.events.len());
}

#[tokio::test]
async fn segments_at_one_cover_everything() {
    let fx = fixture();
    let (s, v) = get(&fx.session, "/v1/segments?t=1").await;
    assert_eq!(s, StatusCode::OK);
    let segs = v["segments"].as_array().unwrap();
    assert_eq!(segs.len(), 1);
    assert_eq!(segs[0]["count"], 4000);
    assert_eq!(v["total"], 4000);
}

#[tokio::test]
async fn segments_match_library_segmentation() {
    let fx = fixture();
    let s = &fx.session;
    for t in [s.cubes.t_base, 0.05, 0.3, 0.7] {
        let (_, v) = get(s, &format!("/v1/segments?t={t}")).await;
        let seg = segmentation_at(&s.topology.hierarchy, &s.topology.segmentation, t);
        let sizes = seg.sizes();
        let got: Vec<(u64, u64)> = v["segments"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| (x["id"].as_u64().unwrap(), x["count"].as_u64().unwrap()))
            .collect();
        let want: Vec<(u64, u64)> = sizes.iter().map(|(&k, &c)| (k as u64, c as u64)).collect();
        assert_eq!(got, want, "t = {t}");
    }
}

#[tokio::test]
async fn hist2d_matches_merged_cube() {
    let fx = fixture();
    let s = &fx.session;
    let t = 0.1;
    let aggs = aggregate_at(&s.cubes, &s.topology.hierarchy, t, None).unwrap();
    let layout = s.layout();
    for (&id, agg) in &aggs {
        let (st, v) = get(s, &format!("/v1/hist2d?t={t}&segments={id}&x=x2&y=x0")).await;
        assert_eq!(st, StatusCode::OK);
        let grid = hist2d(layout, agg, 2, 0).unwrap();
        assert_eq!(v["grid"]["counts"], grid_json(&grid));
        assert_eq!(v["total"].as_u64().unwrap(), agg.hist.count);
    }
    // All segments together sum to n.
    let (_, v) = get(s, &format!("/v1/hist2d?t={t}&x=x0&y=f")).await;
    assert_eq!(v["total"], 4000);
}

#[tokio::test]
async fn pcp_matches_merge_then_pairs() {
    let fx = fixture();
    let s = &fx.session;
    let t = 0.05;
    let aggs = aggregate_at(&s.cubes, &s.topology.hierarchy, t, None).unwrap();
    let ids: Vec<usize> = aggs.keys().copied().take(2).collect();
    let refs: Vec<_> = ids.iter().flat_map(|id| aggs[id].leaves.iter()).map(|&l| s.cubes.leaf(l).unwrap()).collect();
    let merged = merge_cubes(s.layout().shape(), &refs).unwrap();
    let order = [3usize, 0, 2, 1];
    let want = pcp_pairs(s.layout(), &merged, &order).unwrap();
    let seg_param: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    let (st, v) = get(s, &format!("/v1/pcp?t={t}&segments={}&order=f,x0,x2,x1", seg_param.join(","))).await;
    assert_eq!(st, StatusCode::OK);
    let grids = v["grids"].as_array().unwrap();
    assert_eq!(grids.len(), 3);
    for (g, w) in grids.iter().zip(&want) {
        assert_eq!(g["counts"], grid_json(w));
    }
}

#[tokio::test]
async fn spine_matches_library_and_is_deterministic() {
    let fx = fixture();
    let s = &fx.session;
    let (st, a) = get(s, "/v1/spine?t=0.2").await;
    assert_eq!(st, StatusCode::OK);
    let (_, b) = get(s, "/v1/spine?t=0.2").await;
    assert_eq!(a, b);
    let direct = serde_json::to_value(s.spine(0.2).unwrap()).unwrap();
    assert_eq!(a, direct);
    let maxima = a["nodes"].as_array().unwrap().iter().filter(|n| n["kind"] == "extremum").count();
    assert_eq!(maxima, fx.session.curve.count_at(0.2));
}

#[tokio::test]
async fn selection_reports_fractions_and_scan_headers() {
    let fx = fixture();
    let s = &fx.session;
    let body = json!({"t": 0.1, "predicate": {"x0": [0.0, 0.5]}, "scatter": ["x0", "x1"]});
    let req = || {
        Request::post("/v1/selection")
            .header("content-type", "application/json")
            .header("x-request-id", "abc")
            .body(Body::from(body.to_string()))
            .unwrap()
    };
    let (st, first, h1) = call(s, req()).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(h1["x-cache"], "miss");
    assert_eq!(h1["x-request-id"], "abc");
    assert!(h1["x-scan-ms"].to_str().unwrap().parse::<f64>().is_ok());
    let (_, second, h2) = call(s, req()).await;
    assert_eq!(h2["x-cache"], "hit");
    assert_eq!(first, second);

    // Direct count of selected rows per segment.
    let seg = segmentation_at(&s.topology.hierarchy, &s.topology.segmentation, 0.1);
    let x0 = s.table.domain(0);
    for entry in first["segments"].as_array().unwrap() {
        let id = entry["id"].as_u64().unwrap() as usize;
        let rows: Vec<usize> = (0..x0.len()).filter(|&i| seg.label(i) == id).collect();
        let selected = rows.iter().filter(|&&i| (0.0..=0.5).contains(&x0[i])).count();
        assert_eq!(entry["total"].as_u64().unwrap() as usize, rows.len());
        assert_eq!(entry["selected"].as_u64().unwrap() as usize, selected);
    }
    let scatter: u64 = first["scatter"]["counts"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap().iter().map(|c| c.as_u64().unwrap()))
        .sum();
    let all_selected = x0.iter().filter(|x| (0.0..=0.5).contains(*x)).count() as u64;
    assert_eq!(scatter, all_selected);
    for c in first["contours"].as_array().unwrap() {
        let f = c["fraction"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&f));
    }
}

#[tokio::test]
async fn error_statuses() {
    let fx = fixture();
    let s = &fx.session;
    let cases = [
        ("/v1/segments?t=abc", StatusCode::BAD_REQUEST, "E_ARGUMENT"),
        ("/v1/segments?t=1.5", StatusCode::BAD_REQUEST, "E_ARGUMENT"),
        ("/v1/hist2d?t=0.5&x=x0", StatusCode::BAD_REQUEST, "E_ARGUMENT"),
        ("/v1/hist2d?t=0.5&x=x0&y=nope", StatusCode::NOT_FOUND, "E_NOT_FOUND"),
        ("/v1/hist2d?t=0.5&x=x0&y=x0", StatusCode::BAD_REQUEST, "E_ARGUMENT"),
        ("/v1/pcp?t=1&segments=999999", StatusCode::NOT_FOUND, "E_NOT_FOUND"),
        ("/v1/pcp?order=x0", StatusCode::BAD_REQUEST, "E_ARGUMENT"),
    ];
    for (uri, status, code) in cases {
        let (st, v) = get(s, uri).await;
        assert_eq!(st, status, "{uri}: {v}");
        assert_eq!(v["error"]["code"], code, "{uri}");
    }
    if s.cubes.t_base > 0.0 {
        let (st, v) = get(s, "/v1/segments?t=0").await;
        assert_eq!(st, StatusCode::CONFLICT);
        assert_eq!(v["error"]["code"], "E_REBUILD");
    }
    let (st, _, _) = call(
        s,
        Request::post("/v1/selection").body(Body::from("not json")).unwrap(),
    )
    .await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}
