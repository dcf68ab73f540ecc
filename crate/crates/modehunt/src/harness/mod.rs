//! Signal generators, seeded noise models, and Monte Carlo experiments:
//! signature-ratio tables, over-/underestimation and band-coverage checks,
//! and the detection comparison between Kolmogorov and sup-norm
//! thresholding.

mod experiments;
mod noise;
mod signals;

pub use experiments::{
    delta_ratio, run_detection_comparison, run_error_control, run_plateau_detection, run_table1,
    DetectionConfig, ErrorControlConfig, PlateauDetectionConfig, Table1Config,
};
pub use noise::{observe, Noise, NoiseKind};
pub use signals::{generate_signal, TestSignal};

use serde::Serialize;
use std::collections::BTreeMap;

/// One aggregated result line of an experiment: metric means with their
/// Monte Carlo standard errors (absent for single-replication runs).
#[derive(Debug, Clone, Serialize)]
pub struct ReportRecord {
    pub experiment: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub se: BTreeMap<String, Option<f64>>,
    pub wall_ms: f64,
}

impl ReportRecord {
    pub fn metric(&self, name: &str) -> f64 {
        self.metrics[name]
    }

    pub fn se_of(&self, name: &str) -> f64 {
        self.se.get(name).copied().flatten().unwrap_or(0.0)
    }
}

/// One per-replication measurement, for CSV export.
#[derive(Debug, Clone, Serialize)]
pub struct RepRow {
    pub experiment: String,
    pub n: usize,
    pub rep: usize,
    pub metric: String,
    pub value: f64,
}

/// Full experiment output: aggregated records plus raw per-replication rows.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub records: Vec<ReportRecord>,
    pub rows: Vec<RepRow>,
}

impl ExperimentReport {
    pub fn record(&self, experiment: &str, n: usize) -> Option<&ReportRecord> {
        self.records
            .iter()
            .find(|r| r.experiment == experiment && r.n == n)
    }
}

/// Sum by pairwise recursion: the reduction order is fixed by the data
/// layout, so results do not depend on thread scheduling.
pub(crate) fn pairwise_sum(x: &[f64]) -> f64 {
    match x.len() {
        0 => 0.0,
        1 => x[0],
        2 => x[0] + x[1],
        len => {
            let (a, b) = x.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Mean and standard error of the mean; the SE is `None` for fewer than two
/// replications.
pub(crate) fn mean_se(x: &[f64]) -> (f64, Option<f64>) {
    let n = x.len();
    let mean = pairwise_sum(x) / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let sq: Vec<f64> = x.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, Some((var / n as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_sequential() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64) * 0.1).collect();
        assert!((pairwise_sum(&x) - 49950.0).abs() < 1e-9);
    }

    #[test]
    fn mean_se_basics() {
        let (m, se) = mean_se(&[2.0]);
        assert_eq!(m, 2.0);
        assert!(se.is_none());
        let (m, se) = mean_se(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se.unwrap() - 1.0).abs() < 1e-12);
    }
}
