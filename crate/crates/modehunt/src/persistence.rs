//! Zero-dimensional sublevel-set persistence of step signals and the
//! sup-norm signatures derived from it.
//!
//! Components of the sublevel sets are born at local-minimum runs and die at
//! interior local-maximum runs, the younger of the merging pair first (elder
//! rule). Halving the finite persistence values gives the sup-norm
//! counterpart of the Kolmogorov signatures: the distance from the signal to
//! the functions with at most `k` modes, measured in the sup norm.

use crate::signal::{runs, SignatureSequence, StepSignal};
use crate::{is_positive, Error, Result};

/// A finite persistence pair of the sublevel filtration: a component born at
/// a local-minimum value and killed at a merging local-maximum value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

/// Union-find over runs with the elder rule: roots carry the birth value and
/// a birth-order stamp so ties between equal birth values resolve to the
/// earlier (leftmost-processed) component.
struct Components {
    parent: Vec<usize>,
    birth: Vec<(f64, usize)>,
}

impl Components {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// All finite persistence pairs of the sublevel-set filtration. The
/// global-minimum component never dies and is excluded.
pub fn persistence_pairs(f: &StepSignal) -> Vec<PersistencePair> {
    let run_list = runs(f);
    let m = run_list.len();
    // Activation order: by value ascending, ties leftmost first.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        run_list[a]
            .0
            .total_cmp(&run_list[b].0)
            .then_with(|| a.cmp(&b))
    });

    let mut uf = Components {
        parent: (0..m).collect(),
        birth: vec![(f64::INFINITY, usize::MAX); m],
    };
    let mut active = vec![false; m];
    let mut pairs = Vec::new();
    for (stamp, &r) in order.iter().enumerate() {
        let value = run_list[r].0;
        let left = (r > 0 && active[r - 1]).then(|| uf.find(r - 1));
        let right = (r + 1 < m && active[r + 1]).then(|| uf.find(r + 1));
        match (left, right) {
            (None, None) => {
                uf.birth[r] = (value, stamp);
            }
            (Some(c), None) | (None, Some(c)) => {
                uf.parent[r] = c;
            }
            (Some(a), Some(b)) => {
                // Interior local maximum: the younger component dies here.
                let (elder, younger) = if uf.birth[a] <= uf.birth[b] {
                    (a, b)
                } else {
                    (b, a)
                };
                pairs.push(PersistencePair {
                    birth: uf.birth[younger].0,
                    death: value,
                });
                uf.parent[younger] = elder;
                uf.parent[r] = elder;
            }
        }
        active[r] = true;
    }
    pairs.sort_by(|a, b| b.persistence().total_cmp(&a.persistence()));
    pairs
}

/// Sup-norm signatures: half the descending finite persistence values.
pub fn persistence_signatures(f: &StepSignal) -> SignatureSequence {
    let halves: Vec<f64> = persistence_pairs(f)
        .iter()
        .map(|p| 0.5 * p.persistence())
        .collect();
    SignatureSequence::new(halves).expect("persistences are positive and sorted")
}

/// Thresholded mode estimate from sup-norm signatures: the largest `j` with
/// `s_{j-1,inf} >= q`.
pub fn sup_mode_estimate(f: &StepSignal, q: f64) -> Result<usize> {
    if !is_positive(q) {
        return Err(Error::Domain(format!(
            "threshold must be positive, got {q}"
        )));
    }
    Ok(persistence_signatures(f)
        .as_slice()
        .iter()
        .take_while(|&&s| s >= q)
        .count())
}
