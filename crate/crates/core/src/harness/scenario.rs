//! Random instances in the plane.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mediator::sample_index;
use crate::metric::Point2D;

/// Side length of the square `[0, EXTENT)^2` that holds status quo, uniform
/// ideal points and mixture means.
pub const EXTENT: f64 = 200.0;
pub const MAX_COMPONENT_STD: f64 = 50.0;
pub const MAX_INIT_STD: f64 = 10.0;
pub const MAX_PEAKS: u8 = 4;

fn uniform_point<R: Rng + ?Sized>(rng: &mut R) -> Point2D {
    let x = rng.random_range(0.0..EXTENT);
    let y = rng.random_range(0.0..EXTENT);
    Point2D { x, y }
}

pub fn sample_status_quo<R: Rng + ?Sized>(rng: &mut R) -> Point2D {
    uniform_point(rng)
}

/// Flat Dirichlet weights from normalized unit-rate exponentials.
pub fn sample_dirichlet_flat<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

/// Gaussian mixture for ideal points; zero peaks means uniform on the square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmSpec {
    pub means: Vec<Point2D>,
    pub stds: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GmmSpec {
    pub fn uniform() -> Self {
        GmmSpec {
            means: Vec::new(),
            stds: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn new(means: Vec<Point2D>, stds: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let spec = GmmSpec { means, stds, weights };
        spec.validate()?;
        Ok(spec)
    }

    /// Means uniform on the square, deviations `U(0, 50)`, flat Dirichlet
    /// weights. Draws all means, then all deviations, then the weights.
    pub fn sample<R: Rng + ?Sized>(peaks: u8, rng: &mut R) -> Result<Self> {
        if peaks > MAX_PEAKS {
            return Err(Error::Config(format!("gmm_peaks must be in 0..={MAX_PEAKS}, got {peaks}")));
        }
        let g = peaks as usize;
        if g == 0 {
            return Ok(GmmSpec::uniform());
        }
        let means = (0..g).map(|_| uniform_point(rng)).collect();
        let stds = (0..g).map(|_| rng.random_range(0.0..MAX_COMPONENT_STD)).collect();
        let weights = sample_dirichlet_flat(g, rng);
        Ok(GmmSpec { means, stds, weights })
    }

    pub fn peaks(&self) -> usize {
        self.means.len()
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.means.len();
        if self.stds.len() != g || self.weights.len() != g {
            return Err(Error::Config("mixture means, deviations and weights differ in length".into()));
        }
        if self.stds.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Config("mixture deviations must be finite and >= 0".into()));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Config("mixture weights must be finite and >= 0".into()));
        }
        if g > 0 && (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("mixture weights must sum to 1".into()));
        }
        Ok(())
    }
}

/// `n` ideal points. With a mixture, each point picks a component with one
/// uniform draw, then takes two normal draws sharing that component's
/// deviation.
pub fn sample_ideal_points<R: Rng + ?Sized>(n: usize, spec: &GmmSpec, rng: &mut R) -> Vec<Point2D> {
    (0..n)
        .map(|_| {
            if spec.peaks() == 0 {
                return uniform_point(rng);
            }
            let k = sample_index(&spec.weights, rng);
            let (m, s) = (spec.means[k], spec.stds[k]);
            let zx: f64 = StandardNormal.sample(rng);
            let zy: f64 = StandardNormal.sample(rng);
            Point2D {
                x: m.x + s * zx,
                y: m.y + s * zy,
            }
        })
        .collect()
}

/// Noisy initial coalition point around `ideal`, with per-axis deviations
/// drawn from `U(0, 10)`.
pub fn perturb_init<R: Rng + ?Sized>(ideal: &Point2D, rng: &mut R) -> Point2D {
    let sx = rng.random_range(0.0..MAX_INIT_STD);
    let sy = rng.random_range(0.0..MAX_INIT_STD);
    perturb_with(ideal, sx, sy, rng)
}

pub fn perturb_with<R: Rng + ?Sized>(ideal: &Point2D, sx: f64, sy: f64, rng: &mut R) -> Point2D {
    let zx: f64 = StandardNormal.sample(rng);
    let zy: f64 = StandardNormal.sample(rng);
    Point2D {
        x: ideal.x + sx * zx,
        y: ideal.y + sy * zy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, std_dev};
    use crate::RunRng;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn status_quo_moments() {
        let mut rng = RunRng::seed_from_u64(11);
        let pts: Vec<_> = (0..10_000).map(|_| sample_status_quo(&mut rng)).collect();
        let bound = 3.0 * (EXTENT / 12f64.sqrt()) / 100.0;
        for coord in [pts.iter().map(|p| p.x).collect::<Vec<_>>(), pts.iter().map(|p| p.y).collect()] {
            assert!((mean(&coord) - 100.0).abs() < bound);
            assert!(coord.iter().all(|c| (0.0..EXTENT).contains(c)));
        }
        let a = sample_status_quo(&mut RunRng::seed_from_u64(7));
        let b = sample_status_quo(&mut RunRng::seed_from_u64(7));
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_component_collapses_to_mean() {
        let m = Point2D { x: 40.0, y: 160.0 };
        let spec = GmmSpec::new(vec![m], vec![0.0], vec![1.0]).unwrap();
        let pts = sample_ideal_points(50, &spec, &mut RunRng::seed_from_u64(1));
        assert!(pts.iter().all(|p| *p == m));
    }

    #[test]
    fn certain_component_is_always_chosen() {
        let a = Point2D { x: 10.0, y: 10.0 };
        let b = Point2D { x: 190.0, y: 190.0 };
        let spec = GmmSpec::new(vec![a, b], vec![1.0, 1.0], vec![1.0, 0.0]).unwrap();
        let pts = sample_ideal_points(500, &spec, &mut RunRng::seed_from_u64(2));
        assert!(pts.iter().all(|p| p.distance(&a) < 10.0));
    }

    #[test]
    fn uniform_ideals_stay_in_square() {
        let pts = sample_ideal_points(1000, &GmmSpec::uniform(), &mut RunRng::seed_from_u64(3));
        assert!(pts.iter().all(|p| (0.0..EXTENT).contains(&p.x) && (0.0..EXTENT).contains(&p.y)));
    }

    #[test]
    fn component_moments() {
        let m = Point2D { x: 100.0, y: 50.0 };
        let spec = GmmSpec::new(vec![m], vec![20.0], vec![1.0]).unwrap();
        let pts = sample_ideal_points(10_000, &spec, &mut RunRng::seed_from_u64(4));
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
        let se = 20.0 / 100.0;
        assert!((mean(&xs) - 100.0).abs() < 3.0 * se);
        assert!((mean(&ys) - 50.0).abs() < 3.0 * se);
        assert!((std_dev(&xs) - 20.0).abs() < 0.5);
    }

    #[test]
    fn perturbation_is_centred() {
        let ideal = Point2D { x: 30.0, y: 70.0 };
        let mut rng = RunRng::seed_from_u64(5);
        let pts: Vec<_> = (0..10_000).map(|_| perturb_init(&ideal, &mut rng)).collect();
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
        // Per-axis variance is E[s^2] = 100/3 for s ~ U(0, 10).
        let se = (100.0f64 / 3.0).sqrt() / 100.0;
        assert!((mean(&xs) - 30.0).abs() < 3.0 * se);
        assert!((mean(&ys) - 70.0).abs() < 3.0 * se);
        assert_eq!(perturb_with(&ideal, 0.0, 0.0, &mut rng), ideal);
        let a = perturb_init(&ideal, &mut RunRng::seed_from_u64(9));
        assert_eq!(a, perturb_init(&ideal, &mut RunRng::seed_from_u64(9)));
    }

    #[test]
    fn too_many_peaks_rejected() {
        assert!(GmmSpec::sample(5, &mut RunRng::seed_from_u64(0)).is_err());
    }

    proptest! {
        #[test]
        fn dirichlet_weights_sum_to_one(k in 1usize..10, seed in any::<u64>()) {
            let w = sample_dirichlet_flat(k, &mut RunRng::seed_from_u64(seed));
            prop_assert!(w.iter().all(|x| *x >= 0.0));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn sampled_specs_are_valid(peaks in 0u8..=4, seed in any::<u64>()) {
            let spec = GmmSpec::sample(peaks, &mut RunRng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(spec.peaks(), peaks as usize);
            prop_assert!(spec.validate().is_ok());
            prop_assert!(spec.stds.iter().all(|s| (0.0..MAX_COMPONENT_STD).contains(s)));
        }
    }
}
