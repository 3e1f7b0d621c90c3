use nalgebra::{DMatrix, SymmetricEigen};

/// Planar embedding of a point set and its residual stress.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub xy: Vec<[f64; 2]>,
    /// `Σ_{i<j} (D_ij − ‖x_i − x_j‖)²`; normalization is rigid and keeps it.
    pub stress: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutConfig {
    pub max_iterations: usize,
    /// Stop once the relative stress decrease falls below this.
    pub tolerance: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            max_iterations: 200,
            tolerance: 1e-6,
        }
    }
}

fn distance_matrix(points: &[Vec<f64>]) -> DMatrix<f64> {
    let n = points.len();
    DMatrix::from_fn(n, n, |i, j| {
        points[i]
            .iter()
            .zip(&points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    })
}

fn stress(d: &DMatrix<f64>, xy: &[[f64; 2]]) -> f64 {
    let n = xy.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let e = d[(i, j)] - planar(xy[i], xy[j]);
            s += e * e;
        }
    }
    s
}

fn planar(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Classical scaling: top two eigenpairs of the double-centered squared
/// distance matrix. Ties between equal eigenvalues fall back to index order.
fn classical_mds(d: &DMatrix<f64>) -> Vec<[f64; 2]> {
    let n = d.nrows();
    let sq = d.map(|x| x * x);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).mean()).collect();
    let all_mean = sq.mean();
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + all_mean));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut xy = vec![[0.0; 2]; n];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let scale = eig.eigenvalues[k].max(0.0).sqrt();
        for (i, p) in xy.iter_mut().enumerate() {
            p[axis] = eig.eigenvectors[(i, k)] * scale;
        }
    }
    xy
}

/// One Guttman transform of unit-weight stress majorization.
fn guttman(d: &DMatrix<f64>, xy: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = xy.len();
    let mut out = vec![[0.0; 2]; n];
    for i in 0..n {
        let mut acc = [0.0; 2];
        for j in 0..n {
            if i == j {
                continue;
            }
            let dist = planar(xy[i], xy[j]);
            let ratio = if dist > 0.0 { d[(i, j)] / dist } else { 0.0 };
            acc[0] += ratio * (xy[i][0] - xy[j][0]);
            acc[1] += ratio * (xy[i][1] - xy[j][1]);
        }
        out[i] = [acc[0] / n as f64, acc[1] / n as f64];
    }
    // The update is centered up to the centroid of the input; recenter.
    let (cx, cy) = centroid(&out);
    let (px, py) = centroid(xy);
    for p in out.iter_mut() {
        p[0] += px - cx;
        p[1] += py - cy;
    }
    out
}

fn centroid(xy: &[[f64; 2]]) -> (f64, f64) {
    let n = xy.len() as f64;
    (
        xy.iter().map(|p| p[0]).sum::<f64>() / n,
        xy.iter().map(|p| p[1]).sum::<f64>() / n,
    )
}

/// Centers, rotates the principal axis onto x and fixes reflections: the
/// first node gets a non-negative x and the first node off the x axis a
/// positive y.
fn normalize(xy: &mut [[f64; 2]]) {
    let (cx, cy) = centroid(xy);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in xy.iter_mut() {
        p[0] -= cx;
        p[1] -= cy;
        sxx += p[0] * p[0];
        sxy += p[0] * p[1];
        syy += p[1] * p[1];
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (s, c) = angle.sin_cos();
    for p in xy.iter_mut() {
        *p = [c * p[0] + s * p[1], -s * p[0] + c * p[1]];
    }
    let scale = xy.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max);
    let eps = 1e-12 * scale.max(1.0);
    if xy.first().is_some_and(|p| p[0] < -eps) {
        xy.iter_mut().for_each(|p| p[0] = -p[0]);
    }
    if xy.iter().find(|p| p[1].abs() > eps).is_some_and(|p| p[1] < 0.0) {
        xy.iter_mut().for_each(|p| p[1] = -p[1]);
    }
    for p in xy.iter_mut() {
        for v in p.iter_mut() {
            if v.abs() <= eps {
                *v = 0.0;
            }
        }
    }
}

/// Planar approximation of high-dimensional positions: classical scaling
/// refined by stress majorization, then normalized.
pub fn layout_spine(points: &[Vec<f64>], config: LayoutConfig) -> Layout {
    let n = points.len();
    if n == 0 {
        return Layout {
            xy: Vec::new(),
            stress: 0.0,
            iterations: 0,
        };
    }
    let d = distance_matrix(points);
    let mut xy = classical_mds(&d);
    let mut current = stress(&d, &xy);
    let mut iterations = 0;
    while iterations < config.max_iterations && current > 0.0 {
        let next = guttman(&d, &xy);
        let s = stress(&d, &next);
        iterations += 1;
        let improved = s < current;
        if improved {
            xy = next;
        }
        let rel = (current - s) / current;
        if improved {
            current = s;
        }
        if !improved || rel < config.tolerance {
            break;
        }
    }
    normalize(&mut xy);
    Layout {
        xy,
        stress: current,
        iterations,
    }
}
