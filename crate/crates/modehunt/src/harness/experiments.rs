//! Monte Carlo experiments: the signature-ratio table, error-control rates,
//! and the detection comparison between Kolmogorov and sup-norm
//! thresholding.
//!
//! Replications are independent and run in parallel; every stream is keyed
//! by `(seed, replication)` and all reductions are pairwise, so reports are
//! bit-identical regardless of thread count or scheduling.

use super::noise::replication_rng;
use super::{mean_se, ExperimentReport, RepRow, ReportRecord};
use crate::harness::{generate_signal, observe, Noise, NoiseKind, TestSignal};
use crate::kolmsig::kolmogorov_signatures;
use crate::persistence::persistence_signatures;
use crate::signal::{mode_count, StepSignal};
use crate::stats::{detection_bound, mode_estimate, tau_gauss, GaussianModel};
use crate::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::Instant;

/// Ratio of consecutive empirical signatures `s_{k-1}(Y) / s_k(Y)`: how
/// separable the k-th mode is from the noise floor.
pub fn delta_ratio(y: &StepSignal, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    let s = kolmogorov_signatures(y);
    let denom = s.at(k as isize);
    if denom <= 0.0 {
        return Err(Error::UndefinedRatio(format!(
            "s_{k} vanishes: the signal has at most {k} modes"
        )));
    }
    Ok(s.at(k as isize - 1) / denom)
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z ^ (z >> 31)
}

fn record(
    experiment: &str,
    n: usize,
    reps: usize,
    seed: u64,
    metrics: Vec<(&str, f64, Option<f64>)>,
    wall_ms: f64,
) -> ReportRecord {
    let mut ms = BTreeMap::new();
    let mut ses = BTreeMap::new();
    for (name, value, se) in metrics {
        ms.insert(name.to_string(), value);
        ses.insert(name.to_string(), se);
    }
    ReportRecord {
        experiment: experiment.to_string(),
        n,
        reps,
        seed,
        metrics: ms,
        se: ses,
        wall_ms,
    }
}

/// Signature-ratio table: mean `s_{k-1}(Y)/s_k(Y)` for the blocks signal
/// (`k = 5`, `sigma = sqrt(n)/16`) and the bumps signal (`k = 11`,
/// `sigma = sqrt(n)/256`) under Gaussian noise.
#[derive(Debug, Clone)]
pub struct Table1Config {
    pub ns: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            ns: vec![256, 1024, 4096, 16384, 65536],
            reps: 1000,
            seed: 1,
        }
    }
}

pub fn run_table1(cfg: &Table1Config) -> Result<ExperimentReport> {
    if cfg.reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let sqrt_n = (n as f64).sqrt();
        let cases = [
            (
                "table1-blocks",
                TestSignal::Blocks,
                sqrt_n / 16.0,
                5usize,
                0u64,
            ),
            ("table1-bumps", TestSignal::Bumps, sqrt_n / 256.0, 11, 1),
        ];
        for (name, kind, sigma, k, tag) in cases {
            let started = Instant::now();
            let f = generate_signal(&kind, n)?;
            let noise = Noise::new(
                NoiseKind::Gaussian { sigma },
                derive_seed(cfg.seed, tag ^ ((n as u64) << 8)),
            )?;
            let deltas: Vec<f64> = (0..cfg.reps)
                .into_par_iter()
                .map(|rep| {
                    let y = observe(&f, &noise, rep as u64);
                    delta_ratio(&y, k).expect("continuous noise keeps s_k positive")
                })
                .collect();
            let (mean, se) = mean_se(&deltas);
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            records.push(record(
                name,
                n,
                cfg.reps,
                cfg.seed,
                vec![("mean_delta", mean, se), ("sigma", sigma, None)],
                wall_ms,
            ));
            rows.extend(deltas.iter().enumerate().map(|(rep, &v)| RepRow {
                experiment: name.to_string(),
                n,
                rep,
                metric: "delta".to_string(),
                value: v,
            }));
        }
    }
    Ok(ExperimentReport { records, rows })
}

/// Over-/underestimation rates of the thresholded mode estimate and the
/// coverage of the uniform signature band, on the blocks signal with known
/// Gaussian noise.
#[derive(Debug, Clone)]
pub struct ErrorControlConfig {
    pub n: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for ErrorControlConfig {
    fn default() -> Self {
        Self {
            n: 1024,
            sigma: 1.0,
            alpha: 0.1,
            reps: 2000,
            seed: 2,
        }
    }
}

pub fn run_error_control(cfg: &ErrorControlConfig) -> Result<ExperimentReport> {
    if cfg.reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    let started = Instant::now();
    let f = generate_signal(&TestSignal::Blocks, cfg.n)?;
    let k = mode_count(&f);
    let s_f = kolmogorov_signatures(&f);
    let gauss = GaussianModel::new(cfg.sigma)?;
    let tau = tau_gauss(cfg.n, cfg.alpha, &gauss)?;
    let k_two_tau = mode_estimate(&s_f, 2.0 * tau)?;
    let noise = Noise::new(
        NoiseKind::Gaussian { sigma: cfg.sigma },
        derive_seed(cfg.seed, 2),
    )?;

    struct Rep {
        k_hat: usize,
        over: bool,
        under: bool,
        covered: bool,
    }
    let outcomes: Vec<Rep> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let y = observe(&f, &noise, rep as u64);
            let s_y = kolmogorov_signatures(&y);
            let k_hat = mode_estimate(&s_y, tau).expect("tau > 0");
            let depth = s_y.len().max(s_f.len());
            let covered = (0..depth as isize).all(|j| (s_y.at(j) - s_f.at(j)).abs() <= tau);
            Rep {
                k_hat,
                over: k_hat > k,
                under: k_hat < k_two_tau,
                covered,
            }
        })
        .collect();

    let ind = |sel: &dyn Fn(&Rep) -> bool| -> Vec<f64> {
        outcomes.iter().map(|r| sel(r) as u8 as f64).collect()
    };
    let (over_rate, over_se) = mean_se(&ind(&|r| r.over));
    let (under_rate, under_se) = mean_se(&ind(&|r| r.under));
    let (coverage, coverage_se) = mean_se(&ind(&|r| r.covered));
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let rows = outcomes
        .iter()
        .enumerate()
        .map(|(rep, r)| RepRow {
            experiment: "error-control".to_string(),
            n: cfg.n,
            rep,
            metric: "k_hat".to_string(),
            value: r.k_hat as f64,
        })
        .collect();
    let records = vec![record(
        "error-control",
        cfg.n,
        cfg.reps,
        cfg.seed,
        vec![
            ("overestimation_rate", over_rate, over_se),
            ("underestimation_rate", under_rate, under_se),
            ("band_coverage", coverage, coverage_se),
            ("tau", tau, None),
            ("mode_count", k as f64, None),
            ("k_two_tau", k_two_tau as f64, None),
            ("alpha", cfg.alpha, None),
        ],
        wall_ms,
    )];
    Ok(ExperimentReport { records, rows })
}

/// Detection of the single plateau mode by Kolmogorov thresholding, against
/// the a-priori exponential bound.
///
/// The bound's hypothesis requires the threshold parameter to sit below the
/// signal's own smallest positive signature `s_0(f) = height/9`, so the
/// experiment evaluates both that valid instantiation (`epsilon = s_0(f)`,
/// threshold `s_0/2`) and the nominal one (`epsilon = height`, threshold
/// `height/2`) for comparison.
#[derive(Debug, Clone)]
pub struct PlateauDetectionConfig {
    pub n: usize,
    pub height: f64,
    pub sigma: f64,
    pub reps: usize,
    pub seed: u64,
}

impl Default for PlateauDetectionConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            height: 0.5,
            sigma: 1.0,
            reps: 2000,
            seed: 3,
        }
    }
}

pub fn run_plateau_detection(cfg: &PlateauDetectionConfig) -> Result<ExperimentReport> {
    if cfg.reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    let started = Instant::now();
    let f = generate_signal(&TestSignal::Plateau { height: cfg.height }, cfg.n)?;
    let s0 = kolmogorov_signatures(&f).at(0);
    let noise = Noise::new(
        NoiseKind::Gaussian { sigma: cfg.sigma },
        derive_seed(cfg.seed, 3),
    )?;
    let model = noise.kind.moment_model();
    let bound_valid = detection_bound(s0, cfg.n, &model)?;
    let bound_nominal = detection_bound(cfg.height, cfg.n, &model)?;

    let hits: Vec<(f64, f64)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let y = observe(&f, &noise, rep as u64);
            let s_y = kolmogorov_signatures(&y);
            let valid = mode_estimate(&s_y, s0 / 2.0).expect("positive threshold") == 1;
            let nominal = mode_estimate(&s_y, cfg.height / 2.0).expect("positive threshold") == 1;
            (valid as u8 as f64, nominal as u8 as f64)
        })
        .collect();
    let valid: Vec<f64> = hits.iter().map(|h| h.0).collect();
    let nominal: Vec<f64> = hits.iter().map(|h| h.1).collect();
    let (rate_valid, se_valid) = mean_se(&valid);
    let (rate_nominal, se_nominal) = mean_se(&nominal);
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;

    let rows = valid
        .iter()
        .enumerate()
        .map(|(rep, &v)| RepRow {
            experiment: "plateau-detection".to_string(),
            n: cfg.n,
            rep,
            metric: "detected_valid_threshold".to_string(),
            value: v,
        })
        .collect();
    let records = vec![record(
        "plateau-detection",
        cfg.n,
        cfg.reps,
        cfg.seed,
        vec![
            ("rate_valid_threshold", rate_valid, se_valid),
            ("rate_nominal_threshold", rate_nominal, se_nominal),
            ("bound_valid", bound_valid, None),
            ("bound_nominal", bound_nominal, None),
            ("s0", s0, None),
            ("height", cfg.height, None),
        ],
        wall_ms,
    )];
    Ok(ExperimentReport { records, rows })
}

/// Limitation experiments: spike signals where Kolmogorov thresholding loses
/// power as `n` grows, and shrinking plateaus where it keeps power while no
/// sup-norm threshold does.
#[derive(Debug, Clone)]
pub struct DetectionConfig {
    pub ns: Vec<usize>,
    /// Spike height factor: `(1 + spike_excess) * sqrt(2 log n)`.
    pub spike_excess: f64,
    /// Level for the spike-side threshold `tau_n(alpha)`.
    pub alpha: f64,
    /// Plateau heights follow `coeff * n^(-1/3)`.
    pub plateau_coeff: f64,
    pub sigma: f64,
    pub reps: usize,
    pub seed: u64,
    /// Size of the logarithmic threshold grid searched for the sup-norm
    /// method.
    pub sup_grid: usize,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            ns: (8..=16).map(|p| 1usize << p).collect(),
            spike_excess: 30.0,
            alpha: 0.1,
            plateau_coeff: 4.0,
            sigma: 1.0,
            reps: 500,
            seed: 4,
            sup_grid: 200,
        }
    }
}

pub fn run_detection_comparison(cfg: &DetectionConfig) -> Result<ExperimentReport> {
    if cfg.reps == 0 {
        return Err(Error::Domain("need at least one replication".into()));
    }
    if cfg.ns.is_empty() {
        return Err(Error::Domain("need at least one grid size".into()));
    }
    let gauss = GaussianModel::new(cfg.sigma)?;
    let mut records = Vec::new();
    let mut rows = Vec::new();

    // Spike side: a mode too narrow for an averaged norm. The spike position
    // is drawn fresh each replication; detection means estimating at least
    // one mode at the universal threshold.
    let mut spike_rates = Vec::new();
    for &n in &cfg.ns {
        let started = Instant::now();
        let tau = tau_gauss(n, cfg.alpha, &gauss)?;
        let noise = Noise::new(
            NoiseKind::Gaussian { sigma: cfg.sigma },
            derive_seed(cfg.seed, 0x5b1ce ^ ((n as u64) << 4)),
        )?;
        let position_seed = derive_seed(cfg.seed, 0x705 ^ ((n as u64) << 4));
        let detected: Vec<f64> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let cell = replication_rng(position_seed, rep as u64).random_range(0..n);
                let f = generate_signal(
                    &TestSignal::Spike {
                        excess: cfg.spike_excess,
                        cell,
                    },
                    n,
                )
                .expect("valid spike");
                let y = observe(&f, &noise, rep as u64);
                let hit = mode_estimate(&kolmogorov_signatures(&y), tau).expect("tau > 0") >= 1;
                hit as u8 as f64
            })
            .collect();
        let (rate, se) = mean_se(&detected);
        spike_rates.push(rate);
        records.push(record(
            "detection-spike",
            n,
            cfg.reps,
            cfg.seed,
            vec![("detection_rate", rate, se), ("tau", tau, None)],
            started.elapsed().as_secs_f64() * 1e3,
        ));
        rows.extend(detected.iter().enumerate().map(|(rep, &v)| RepRow {
            experiment: "detection-spike".to_string(),
            n,
            rep,
            metric: "detected".to_string(),
            value: v,
        }));
    }

    // Plateau side: Kolmogorov thresholding at half the signal's own
    // signature versus the best sup-norm threshold found by an oracle grid
    // search (which makes the sup-norm side as strong as possible).
    let mut kolm_rates = Vec::new();
    let mut sup_rates = Vec::new();
    for &n in &cfg.ns {
        let started = Instant::now();
        let height = cfg.plateau_coeff * (n as f64).powf(-1.0 / 3.0);
        let f = generate_signal(&TestSignal::Plateau { height }, n)?;
        let s0 = kolmogorov_signatures(&f).at(0);
        let noise = Noise::new(
            NoiseKind::Gaussian { sigma: cfg.sigma },
            derive_seed(cfg.seed, 0x9a7ea ^ ((n as u64) << 4)),
        )?;
        let per_rep: Vec<(f64, f64, f64, f64)> = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let y = observe(&f, &noise, rep as u64);
                let s_y = kolmogorov_signatures(&y);
                let valid = mode_estimate(&s_y, s0 / 2.0).expect("positive") == 1;
                let nominal = mode_estimate(&s_y, height / 2.0).expect("positive") == 1;
                let sup = persistence_signatures(&y);
                (
                    valid as u8 as f64,
                    nominal as u8 as f64,
                    sup.at(0),
                    sup.at(1),
                )
            })
            .collect();
        let kolm: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
        let kolm_nominal: Vec<f64> = per_rep.iter().map(|r| r.1).collect();
        let (kolm_rate, kolm_se) = mean_se(&kolm);
        let (nominal_rate, nominal_se) = mean_se(&kolm_nominal);

        // Oracle search: success means exactly one sup-norm signature above
        // the threshold, i.e. s_1(Y) < q <= s_0(Y).
        let tops: Vec<(f64, f64)> = per_rep.iter().map(|r| (r.2, r.3)).collect();
        let q_lo = tops
            .iter()
            .map(|t| t.0)
            .fold(f64::INFINITY, f64::min)
            .max(1e-9)
            * 0.5;
        let q_hi = tops.iter().map(|t| t.0).fold(0.0f64, f64::max) * 1.0001 + 1e-9;
        let grid = cfg.sup_grid.max(2);
        let mut best = (0.0f64, q_lo);
        for i in 0..grid {
            let q = q_lo * (q_hi / q_lo).powf(i as f64 / (grid - 1) as f64);
            let hits = tops
                .iter()
                .filter(|(s0i, s1i)| *s1i < q && q <= *s0i)
                .count();
            let rate = hits as f64 / cfg.reps as f64;
            if rate > best.0 {
                best = (rate, q);
            }
        }
        let sup_se = (best.0 * (1.0 - best.0) / cfg.reps as f64).sqrt();
        kolm_rates.push(kolm_rate);
        sup_rates.push(best.0);
        records.push(record(
            "detection-plateau",
            n,
            cfg.reps,
            cfg.seed,
            vec![
                ("kolm_rate", kolm_rate, kolm_se),
                ("kolm_rate_nominal_threshold", nominal_rate, nominal_se),
                ("sup_rate_best", best.0, Some(sup_se)),
                ("best_q", best.1, None),
                ("s0", s0, None),
                ("height", height, None),
            ],
            started.elapsed().as_secs_f64() * 1e3,
        ));
        rows.extend(per_rep.iter().enumerate().map(|(rep, r)| RepRow {
            experiment: "detection-plateau".to_string(),
            n,
            rep,
            metric: "detected_valid_threshold".to_string(),
            value: r.0,
        }));
    }

    let margin = kolm_rates.last().unwrap() - sup_rates.last().unwrap();
    records.push(record(
        "detection-summary",
        *cfg.ns.last().unwrap(),
        cfg.reps,
        cfg.seed,
        vec![
            ("spike_spearman", spearman_against_index(&spike_rates), None),
            ("kolm_minus_sup_at_largest_n", margin, None),
        ],
        0.0,
    ));
    Ok(ExperimentReport { records, rows })
}

/// Spearman rank correlation of a sequence against its index order, with
/// average ranks for ties.
pub(crate) fn spearman_against_index(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ranks.iter().sum::<f64>() / n as f64;
    let cov: f64 = xs
        .iter()
        .zip(&ranks)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let vx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let vy: f64 = ranks.iter().map(|y| (y - my) * (y - my)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
