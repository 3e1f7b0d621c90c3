use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Column, SampleTable};
use crate::error::{Error, Result};
use crate::scalar::{dist2, Scalar};

/// Sum of isotropic Gaussian bumps `Σ aᵢ·exp(−‖x−cᵢ‖²/wᵢ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture<T> {
    pub centers: Vec<Vec<T>>,
    pub amplitudes: Vec<T>,
    pub widths: Vec<T>,
}

impl<T: Scalar> GaussianMixture<T> {
    pub fn new(centers: Vec<Vec<T>>, amplitudes: Vec<T>, widths: Vec<T>) -> Result<Self> {
        if centers.is_empty() || centers.len() != amplitudes.len() || centers.len() != widths.len() {
            return Err(Error::InvalidArgument(format!(
                "mixture lists must have equal non-zero length (centers {}, amplitudes {}, widths {})",
                centers.len(),
                amplitudes.len(),
                widths.len()
            )));
        }
        let d = centers[0].len();
        if d == 0 || centers.iter().any(|c| c.len() != d) {
            return Err(Error::InvalidArgument("centers must share a non-zero dimension".into()));
        }
        if widths.iter().any(|w| !(*w > T::zero())) {
            return Err(Error::InvalidArgument("widths must be positive".into()));
        }
        Ok(GaussianMixture {
            centers,
            amplitudes,
            widths,
        })
    }

    pub fn dims(&self) -> usize {
        self.centers[0].len()
    }

    pub fn value(&self, x: &[T]) -> T {
        gaussian_mixture_value(&self.centers, &self.amplitudes, &self.widths, x)
    }
}

pub fn gaussian_mixture_value<T: Scalar>(centers: &[Vec<T>], amplitudes: &[T], widths: &[T], x: &[T]) -> T {
    let mut acc = T::zero();
    for ((c, a), w) in centers.iter().zip(amplitudes).zip(widths) {
        acc = acc + *a * (-dist2(x, c) / (*w * *w)).exp();
    }
    acc
}

/// Samples `n` points uniformly in the unit cube and evaluates the mixture.
///
/// Domain columns are `x0..x{d-1}`, the measure column is `f`. The output is
/// a pure function of the arguments.
pub fn synth_gaussian_mixture<T: Scalar>(
    d: usize,
    centers: &[Vec<T>],
    amplitudes: &[T],
    widths: &[T],
    n: usize,
    seed: u64,
) -> Result<SampleTable<T>> {
    let mixture = GaussianMixture::new(centers.to_vec(), amplitudes.to_vec(), widths.to_vec())?;
    if mixture.dims() != d {
        return Err(Error::InvalidArgument(format!(
            "centers have dimension {}, expected {d}",
            mixture.dims()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![Vec::with_capacity(n); d];
    let mut values = Vec::with_capacity(n);
    let mut x = vec![T::zero(); d];
    for _ in 0..n {
        for (axis, xi) in x.iter_mut().enumerate() {
            *xi = T::of(rng.random::<f64>());
            coords[axis].push(*xi);
        }
        values.push(mixture.value(&x));
    }
    let domain = coords
        .into_iter()
        .enumerate()
        .map(|(i, v)| Column::new(format!("x{i}"), v))
        .collect();
    SampleTable::from_columns(domain, vec![Column::new("f", values)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unimodal_fixture_has_one_high_cluster() {
        let t = synth_gaussian_mixture::<f64>(2, &[vec![0.0, 0.0]], &[1.0], &[0.3], 1000, 1).unwrap();
        let f = t.measure("f").unwrap();
        let high: Vec<usize> = (0..t.n_points()).filter(|&i| f[i] > 0.9).collect();
        assert!(!high.is_empty());
        // f > 0.9 ⇔ ‖x‖ < w·sqrt(ln(1/0.9)): a single disc around the origin.
        let radius = 0.3 * (1.0f64 / 0.9).ln().sqrt();
        for &i in &high {
            let p = t.point(i);
            assert!((p[0] * p[0] + p[1] * p[1]).sqrt() < radius + 1e-12);
        }
    }

    #[test]
    fn two_peaks_with_low_midpoint() {
        let centers = vec![vec![0.25, 0.5], vec![0.75, 0.5]];
        let amps = [1.0, 0.6];
        let widths = [0.1, 0.1];
        let m = GaussianMixture::new(centers.clone(), amps.to_vec(), widths.to_vec()).unwrap();
        let p0 = m.value(&centers[0]);
        let p1 = m.value(&centers[1]);
        let mid = m.value(&[0.5, 0.5]);
        assert!(mid < 0.01 + p0 && mid < 0.01 + p1);
        // exp(-6.25)·1.6: the midpoint is far below either peak.
        assert!((mid - 1.6 * (-6.25f64).exp()).abs() < 1e-12);
        let t = synth_gaussian_mixture(2, &centers, &amps, &widths, 10_000, 9).unwrap();
        assert_eq!(t.n_points(), 10_000);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = synth_gaussian_mixture::<f64>(3, &[vec![0.5; 3]], &[1.0], &[0.2], 500, 42).unwrap();
        let b = synth_gaussian_mixture::<f64>(3, &[vec![0.5; 3]], &[1.0], &[0.2], 500, 42).unwrap();
        assert_eq!(a, b);
        let c = synth_gaussian_mixture::<f64>(3, &[vec![0.5; 3]], &[1.0], &[0.2], 500, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn inconsistent_lists_rejected() {
        assert!(synth_gaussian_mixture::<f64>(2, &[vec![0.0, 0.0]], &[1.0, 2.0], &[0.1], 10, 0).is_err());
        assert!(synth_gaussian_mixture::<f64>(2, &[vec![0.0, 0.0]], &[1.0], &[0.0], 10, 0).is_err());
    }

    #[test]
    fn values_match_closed_form() {
        let centers = vec![vec![0.2, 0.3, 0.4], vec![0.7, 0.6, 0.5]];
        let t = synth_gaussian_mixture::<f64>(3, &centers, &[0.9, 0.4], &[0.15, 0.25], 2000, 5).unwrap();
        let f = t.measure("f").unwrap();
        for i in 0..t.n_points() {
            let p = t.point(i);
            let mut expect = 0.0;
            for (c, (a, w)) in centers.iter().zip([(0.9, 0.15), (0.4, 0.25)]) {
                let r2: f64 = p.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
                expect += a * (-r2 / (w * w)).exp();
            }
            assert!((f[i] - expect).abs() <= 4.0 * f64::EPSILON * expect.max(f64::MIN_POSITIVE));
        }
    }
}
