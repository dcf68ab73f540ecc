//! Seeded noise models satisfying the Bernstein moment condition.

use crate::signal::StepSignal;
use crate::stats::MomentModel;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

/// Noise families; all satisfy the moment condition with the constants
/// returned by [`NoiseKind::moment_model`] (validated numerically in tests).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    Gaussian { sigma: f64 },
    Laplace { scale: f64 },
    CenteredPoisson { lambda: f64 },
    Uniform { bound: f64 },
}

impl NoiseKind {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            NoiseKind::Gaussian { sigma } => *sigma > 0.0,
            NoiseKind::Laplace { scale } => *scale > 0.0,
            NoiseKind::CenteredPoisson { lambda } => *lambda > 0.0,
            NoiseKind::Uniform { bound } => *bound > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "noise parameter must be positive: {self:?}"
            )))
        }
    }

    /// Conservative Bernstein constants per family:
    /// Gaussian `(sigma, sigma^2)`, Laplace `(b, 2 b^2)`, centered Poisson
    /// `(1, lambda)`, uniform on `[-B, B]` `(B, B^2/3)`.
    pub fn moment_model(&self) -> MomentModel {
        let (kappa, v) = match self {
            NoiseKind::Gaussian { sigma } => (*sigma, sigma * sigma),
            NoiseKind::Laplace { scale } => (*scale, 2.0 * scale * scale),
            NoiseKind::CenteredPoisson { lambda } => (1.0, *lambda),
            NoiseKind::Uniform { bound } => (*bound, bound * bound / 3.0),
        };
        MomentModel::new(kappa, v).expect("validated parameters")
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            NoiseKind::Gaussian { sigma } => Normal::new(0.0, *sigma)
                .expect("positive sigma")
                .sample(rng),
            NoiseKind::Laplace { scale } => {
                let u: f64 = rng.random::<f64>() - 0.5;
                let inner = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
                -scale * u.signum() * inner.ln()
            }
            NoiseKind::CenteredPoisson { lambda } => {
                Poisson::new(*lambda).expect("positive lambda").sample(rng) - lambda
            }
            NoiseKind::Uniform { bound } => rng.random_range(-bound..*bound),
        }
    }
}

/// A noise family plus the master seed of its replication streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl Noise {
    pub fn new(kind: NoiseKind, seed: u64) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, seed })
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Counter-based stream for one replication: the generator state is a pure
/// function of `(seed, replication)`, so replications can run in any order
/// (or in parallel) and still reproduce bit-identically.
pub(crate) fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        seed ^ replication.wrapping_mul(0x9e3779b97f4a7c15),
    ))
}

/// One noisy observation of `f`: an independent draw added to every cell,
/// drawn in cell order from the replication's own stream.
pub fn observe(f: &StepSignal, noise: &Noise, replication: u64) -> StepSignal {
    let mut rng = replication_rng(noise.seed, replication);
    let values: Vec<f64> = f
        .values()
        .iter()
        .map(|v| v + noise.kind.sample(&mut rng))
        .collect();
    StepSignal::new(values).expect("noise draws are finite")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observation_is_reproducible_and_rep_dependent() {
        let f = StepSignal::new(vec![0.0; 32]).unwrap();
        let noise = Noise::new(NoiseKind::Gaussian { sigma: 1.0 }, 7).unwrap();
        let a = observe(&f, &noise, 3);
        let b = observe(&f, &noise, 3);
        assert_eq!(a.values(), b.values());
        let c = observe(&f, &noise, 4);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn zero_scale_limit_recovers_the_signal() {
        let f = StepSignal::new(vec![1.0, 2.0, 3.0]).unwrap();
        let noise = Noise::new(NoiseKind::Gaussian { sigma: 1e-300 }, 1).unwrap();
        let y = observe(&f, &noise, 0);
        for (a, b) in y.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-200);
        }
    }

    #[test]
    fn gaussian_sample_mean_within_clt_bound() {
        let n = 10_000usize;
        let f = StepSignal::new(vec![0.0; n]).unwrap();
        let noise = Noise::new(NoiseKind::Gaussian { sigma: 1.0 }, 42).unwrap();
        let y = observe(&f, &noise, 0);
        let mean = y.values().iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(Noise::new(NoiseKind::Gaussian { sigma: 0.0 }, 1).is_err());
        assert!(Noise::new(NoiseKind::Laplace { scale: -1.0 }, 1).is_err());
        assert!(Noise::new(NoiseKind::CenteredPoisson { lambda: 0.0 }, 1).is_err());
        assert!(Noise::new(NoiseKind::Uniform { bound: 0.0 }, 1).is_err());
    }

    /// The documented `(kappa, v)` must dominate the sample moments
    /// `E|e|^m <= v m! kappa^(m-2) / 2` for m = 2..=10.
    #[test]
    fn moment_condition_holds_numerically() {
        let kinds = [
            NoiseKind::Gaussian { sigma: 1.3 },
            NoiseKind::Laplace { scale: 0.8 },
            NoiseKind::CenteredPoisson { lambda: 2.0 },
            NoiseKind::Uniform { bound: 2.5 },
        ];
        let draws = 1_000_000usize;
        for kind in kinds {
            let m = kind.moment_model();
            let mut rng = replication_rng(12345, 0);
            let samples: Vec<f64> = (0..draws).map(|_| kind.sample(&mut rng)).collect();
            for power in 2..=10u32 {
                let pows: Vec<f64> = samples.iter().map(|e| e.abs().powi(power as i32)).collect();
                let (mean, se) = crate::harness::mean_se(&pows);
                let factorial: f64 = (1..=power).map(|k| k as f64).product();
                let bound = m.v() * factorial * m.kappa().powi(power as i32 - 2) / 2.0;
                assert!(
                    mean <= bound + 3.0 * se.unwrap(),
                    "{kind:?} m={power}: sample {mean} vs bound {bound}"
                );
            }
        }
    }
}
