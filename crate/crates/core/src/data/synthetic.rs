//! Two-dimensional benchmark generators.
//!
//! Point `i` belongs to class `i % C`, so classes are balanced. `noise` is the
//! standard deviation of the Gaussian jitter.
//!
//! * `blobs`: `C` isotropic Gaussians centred on a radius-5 circle.
//! * `two_moons`: two interleaving half circles.
//! * `rings`: concentric annuli with radius `1 + c` for class `c`; a class
//!   whose points do not share a mean.
//! * `smile`: a face outline, a mouth arc and two eyes, where the eyes form
//!   one class split across two separate clusters.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::rng::streams;
use crate::{Error, FeatureMatrix, Result, RngState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum SyntheticKind {
    Blobs { classes: usize },
    TwoMoons,
    Rings { classes: usize },
    Smile,
}

impl SyntheticKind {
    pub fn num_classes(self) -> usize {
        match self {
            SyntheticKind::Blobs { classes } | SyntheticKind::Rings { classes } => classes,
            SyntheticKind::TwoMoons => 2,
            SyntheticKind::Smile => 3,
        }
    }
}

pub fn make_synthetic(kind: SyntheticKind, n: usize, noise: f64, rng: RngState) -> Result<Dataset> {
    let classes = kind.num_classes();
    if classes == 0 {
        return Err(Error::InvalidInput(
            "synthetic data needs at least one class".into(),
        ));
    }
    if n < 2 * classes {
        return Err(Error::InvalidInput(format!(
            "need n >= {} for {classes} classes, got {n}",
            2 * classes
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise must be >= 0, got {noise}"
        )));
    }
    let mut rng = rng.fork(streams::SYNTHETIC).rng();
    let mut points = Array2::zeros((n, 2));
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        let (x, y) = match kind {
            SyntheticKind::Blobs { classes } => {
                let angle = PI / 2.0 + 2.0 * PI * class as f64 / classes as f64;
                (5.0 * angle.cos(), 5.0 * angle.sin())
            }
            SyntheticKind::TwoMoons => {
                let t = rng.random_range(0.0..PI);
                if class == 0 {
                    (t.cos(), t.sin())
                } else {
                    (1.0 - t.cos(), 0.5 - t.sin())
                }
            }
            SyntheticKind::Rings { .. } => {
                let t = rng.random_range(0.0..2.0 * PI);
                let r = 1.0 + class as f64 + noise * rng.sample::<f64, _>(StandardNormal);
                (r * t.cos(), r * t.sin())
            }
            SyntheticKind::Smile => match class {
                0 => {
                    let t = rng.random_range(0.0..2.0 * PI);
                    (3.5 * t.cos(), 3.5 * t.sin())
                }
                1 => {
                    let t = rng.random_range(1.15 * PI..1.85 * PI);
                    (2.0 * t.cos(), 2.0 * t.sin())
                }
                _ => {
                    let side = if (i / classes).is_multiple_of(2) {
                        -1.2
                    } else {
                        1.2
                    };
                    (side, 1.2)
                }
            },
        };
        let jitter = match kind {
            // Ring noise is radial only.
            SyntheticKind::Rings { .. } => (0.0, 0.0),
            _ => (
                noise * rng.sample::<f64, _>(StandardNormal),
                noise * rng.sample::<f64, _>(StandardNormal),
            ),
        };
        points[[i, 0]] = x + jitter.0;
        points[[i, 1]] = y + jitter.1;
        truth.push(class);
    }
    Ok(Dataset {
        features: FeatureMatrix::new(points)?,
        truth,
        class_names: (0..classes).map(|c| c.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_blobs_collapse_to_centres() {
        let d = make_synthetic(
            SyntheticKind::Blobs { classes: 3 },
            30,
            0.0,
            RngState::new(1),
        )
        .unwrap();
        for i in 0..30 {
            let c = d.truth[i];
            let first = d.features.row(c);
            assert_eq!(d.features.row(i), first);
        }
        assert_ne!(d.features.row(0), d.features.row(1));
    }

    #[test]
    fn same_seed_same_data() {
        for kind in [
            SyntheticKind::Blobs { classes: 4 },
            SyntheticKind::TwoMoons,
            SyntheticKind::Rings { classes: 2 },
            SyntheticKind::Smile,
        ] {
            let a = make_synthetic(kind, 100, 0.2, RngState::new(5)).unwrap();
            let b = make_synthetic(kind, 100, 0.2, RngState::new(5)).unwrap();
            let c = make_synthetic(kind, 100, 0.2, RngState::new(6)).unwrap();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn ring_radius_statistics_within_three_sigma() {
        let noise = 0.1;
        let n = 4000;
        let d = make_synthetic(
            SyntheticKind::Rings { classes: 2 },
            n,
            noise,
            RngState::new(3),
        )
        .unwrap();
        for class in 0..2 {
            let radii: Vec<f64> = (0..n)
                .filter(|&i| d.truth[i] == class)
                .map(|i| d.features.row(i).dot(&d.features.row(i)).sqrt())
                .collect();
            let m = radii.len() as f64;
            let mean = radii.iter().sum::<f64>() / m;
            let var = radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let target_var = noise * noise;
            // Sample variance of a normal has standard error sigma^2 sqrt(2/(m-1)).
            let se_var = target_var * (2.0 / (m - 1.0)).sqrt();
            assert!(
                (var - target_var).abs() <= 3.0 * se_var,
                "class {class}: var {var}"
            );
            let se_mean = noise / m.sqrt();
            assert!((mean - (1.0 + class as f64)).abs() <= 3.0 * se_mean);
        }
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(make_synthetic(
            SyntheticKind::Blobs { classes: 3 },
            5,
            0.1,
            RngState::new(0)
        )
        .is_err());
        assert!(make_synthetic(SyntheticKind::TwoMoons, 10, -1.0, RngState::new(0)).is_err());
    }

    #[test]
    fn smile_eyes_are_two_clusters_of_one_class() {
        let d = make_synthetic(SyntheticKind::Smile, 60, 0.0, RngState::new(0)).unwrap();
        let eyes: Vec<f64> = (0..60)
            .filter(|&i| d.truth[i] == 2)
            .map(|i| d.features.row(i)[0])
            .collect();
        assert!(eyes.iter().any(|&x| x < 0.0) && eyes.iter().any(|&x| x > 0.0));
    }
}
