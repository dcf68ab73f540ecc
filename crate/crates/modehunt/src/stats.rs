//! Closed-form statistics for signature thresholding: the Bernstein-type
//! deviation bound, its inversion into the universal threshold, confidence
//! bands, mode estimators and their confidence intervals, detection bounds,
//! Gumbel extreme-value constants, and the monotone sup-norm fit.

use crate::signal::SignatureSequence;
use crate::{in_open_unit_interval, is_positive, Error, Result};

/// Bernstein moment condition on the noise: `E|e|^m <= v m! k^(m-2) / 2` for
/// all `m >= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentModel {
    kappa: f64,
    v: f64,
}

impl MomentModel {
    pub fn new(kappa: f64, v: f64) -> Result<Self> {
        if !is_positive(kappa) || !is_positive(v) {
            return Err(Error::Domain(format!(
                "moment parameters must be positive, got kappa={kappa}, v={v}"
            )));
        }
        Ok(Self { kappa, v })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

/// Centered Gaussian noise with standard deviation `sigma`; admits the
/// sharper threshold of [`tau_gauss`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    sigma: f64,
}

impl GaussianModel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !is_positive(sigma) {
            return Err(Error::Domain(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The moment condition holds with `kappa = sigma`, `v = sigma^2`.
    pub fn moment_model(&self) -> MomentModel {
        MomentModel {
            kappa: self.sigma,
            v: self.sigma * self.sigma,
        }
    }
}

/// Confidence interval for a thresholded mode count; `upper = None` encodes
/// an infinite upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeCi {
    pub lower: usize,
    pub upper: Option<usize>,
}

/// `P(max_j |s_j(Y) - s_j(f)| >= delta) <= min(1, 2 exp(-delta^2 n / (2v + 2 kappa delta)))`.
pub fn deviation_bound(delta: f64, n: usize, m: &MomentModel) -> Result<f64> {
    if !is_positive(delta) {
        return Err(Error::Domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let nf = n as f64;
    let raw = 2.0 * (-delta * delta * nf / (2.0 * m.v + 2.0 * m.kappa * delta)).exp();
    Ok(raw.min(1.0))
}

/// The universal signature threshold: the `delta` at which the deviation
/// bound equals `alpha`,
/// `tau_n(alpha) = (sqrt(L (L kappa^2 - 2 n v)) - kappa L) / n` with
/// `L = log(alpha/2) < 0`.
pub fn tau(n: usize, alpha: f64, m: &MomentModel) -> Result<f64> {
    check_alpha(alpha)?;
    let nf = n as f64;
    let l = (alpha / 2.0).ln();
    Ok(((l * (l * m.kappa * m.kappa - 2.0 * nf * m.v)).sqrt() - m.kappa * l) / nf)
}

/// Sharper Gaussian threshold `sqrt(-2 sigma^2 log(alpha/2) / n)`.
pub fn tau_gauss(n: usize, alpha: f64, g: &GaussianModel) -> Result<f64> {
    check_alpha(alpha)?;
    let nf = n as f64;
    Ok((-2.0 * g.sigma * g.sigma / nf * (alpha / 2.0).ln()).sqrt())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !in_open_unit_interval(alpha) {
        return Err(Error::Domain(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Uniform confidence band `[(s_j - tau)_+, s_j + tau]` for each stored
/// signature, plus one final interval `[0, tau]` covering the whole zero
/// tail `j >= len`.
pub fn confidence_band(s: &SignatureSequence, tau: f64) -> Result<Vec<(f64, f64)>> {
    if !is_positive(tau) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let mut band: Vec<(f64, f64)> = s
        .as_slice()
        .iter()
        .map(|&sj| ((sj - tau).max(0.0), sj + tau))
        .collect();
    band.push((0.0, tau));
    Ok(band)
}

/// Thresholded mode estimate `k_eps = max{j : s_{j-1} >= eps}`; the
/// convention `s_{-1} = inf` makes `j = 0` always admissible.
pub fn mode_estimate(s: &SignatureSequence, eps: f64) -> Result<usize> {
    if !is_positive(eps) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    Ok(s.as_slice().iter().take_while(|&&v| v >= eps).count())
}

/// Confidence interval for the thresholded mode count of the sampled signal,
/// at a caller-supplied threshold radius `tau`:
/// lower `max{j : s_j > eps + tau}` when `eps < s_0 - tau` (else 0), upper
/// `min{j : s_j < eps - tau}` when `eps > tau` (else infinite).
pub fn mode_ci_with_threshold(s: &SignatureSequence, eps: f64, tau: f64) -> Result<ModeCi> {
    if !is_positive(eps) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if !is_positive(tau) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let lower = if eps < s.at(0) - tau {
        (0..s.len())
            .rev()
            .find(|&j| s.at(j as isize) > eps + tau)
            .unwrap_or(0)
    } else {
        0
    };
    let upper = if eps > tau {
        Some(
            (0..=s.len())
                .find(|&j| s.at(j as isize) < eps - tau)
                .unwrap_or(s.len()),
        )
    } else {
        None
    };
    Ok(ModeCi { lower, upper })
}

/// [`mode_ci_with_threshold`] with `tau = tau_n(alpha)` from the moment
/// model.
pub fn mode_ci(
    s: &SignatureSequence,
    alpha: f64,
    eps: f64,
    n: usize,
    m: &MomentModel,
) -> Result<ModeCi> {
    mode_ci_with_threshold(s, eps, tau(n, alpha, m)?)
}

/// A-priori detection bound: with the smallest positive signature at least
/// `eps`, thresholding at `eps/2` recovers the exact mode count with
/// probability at least `1 - 2 exp(-eps^2 n / (8v + 4 kappa eps))`, clamped
/// to `[0, 1]`.
pub fn detection_bound(eps: f64, n: usize, m: &MomentModel) -> Result<f64> {
    if !is_positive(eps) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let nf = n as f64;
    let raw = 1.0 - 2.0 * (-eps * eps * nf / (8.0 * m.v + 4.0 * m.kappa * eps)).exp();
    Ok(raw.clamp(0.0, 1.0))
}

/// Quantization error bound for Hoelder-continuous signals:
/// `d_K(f, f_n) <= C/(gamma+1) n^(-gamma)`.
pub fn holder_bound(c: f64, gamma: f64, n: usize) -> Result<f64> {
    if !is_positive(c) || !is_positive(gamma) {
        return Err(Error::Domain(format!(
            "need C > 0 and gamma > 0, got C={c}, gamma={gamma}"
        )));
    }
    Ok(c / (gamma + 1.0) * (n as f64).powf(-gamma))
}

/// Normalizing constants of the Gumbel extreme value limit for maxima of `n`
/// standard normals:
/// `a_n = sqrt(2 log n) - (log log n / 2 + log(2 sqrt(pi))) / sqrt(2 log n)`,
/// `b_n = 1 / sqrt(2 log n)`.
pub fn gevl_constants(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    let two_log_n = 2.0 * (n as f64).ln();
    let root = two_log_n.sqrt();
    let a = root - (0.5 * (n as f64).ln().ln() + (2.0 * std::f64::consts::PI.sqrt()).ln()) / root;
    Ok((a, 1.0 / root))
}

/// Sup-norm distance from a vector to the nondecreasing cone, in closed form
/// `max_{i <= j} (x_i - x_j)_+ / 2`, via a running maximum.
pub fn monotone_sup_fit(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Domain("empty vector".into()));
    }
    let mut running_max = f64::NEG_INFINITY;
    let mut worst_drop = 0.0f64;
    for &v in x {
        running_max = running_max.max(v);
        worst_drop = worst_drop.max(running_max - v);
    }
    Ok(0.5 * worst_drop)
}

/// Plain sample variance (denominator `n - 1`). Convenience for calibrating
/// a noise model from data; the thresholds themselves take known parameters.
pub fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
}
