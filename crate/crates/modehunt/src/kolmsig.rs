//! The merge sweep: all Kolmogorov signatures of a step signal in
//! `O(n log n)`.
//!
//! The taut-string derivative at radius `alpha` is constant on a partition of
//! `[0, 1]` that coarsens as `alpha` grows: adjacent intervals coalesce at
//! explicit merge radii determined by their lengths and masses alone. The
//! sweep maintains the intervals in a doubly linked list and the candidate
//! merge radii in a priority queue; whenever the merging pair removes a mode
//! (a maximal interval absorbed by a minimal or boundary one), the radius is
//! one of the signatures. Emitted radii come out in increasing order, so the
//! reversed list is the descending signature sequence.

use crate::signal::{runs, SignatureSequence, StepSignal};
use std::cmp::Ordering;

/// How an interval of the taut-string derivative sits between its neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// Value strictly between the neighboring values.
    Regular,
    /// Value strictly above both neighbors.
    Maximal,
    /// Value strictly below both neighbors.
    Minimal,
    /// Contains `t = 0`.
    BoundaryLeft,
    /// Contains `t = 1`.
    BoundaryRight,
    /// The single interval spanning all of `[0, 1]`.
    Global,
}

impl Classification {
    fn is_critical(self) -> bool {
        matches!(self, Classification::Maximal | Classification::Minimal)
    }

    fn is_boundary(self) -> bool {
        matches!(
            self,
            Classification::BoundaryLeft | Classification::BoundaryRight
        )
    }
}

/// Classifies an interval by its value relative to its neighbors' values.
/// `None` stands for a missing neighbor (the interval touches the domain
/// boundary); boundary intervals are classified structurally, before values
/// are compared.
pub fn classify(value: f64, left_value: Option<f64>, right_value: Option<f64>) -> Classification {
    match (left_value, right_value) {
        (None, None) => Classification::Global,
        (None, Some(_)) => Classification::BoundaryLeft,
        (Some(_), None) => Classification::BoundaryRight,
        (Some(l), Some(r)) => {
            if value > l && value > r {
                Classification::Maximal
            } else if value < l && value < r {
                Classification::Minimal
            } else {
                Classification::Regular
            }
        }
    }
}

/// Sentinel for a missing neighbor link.
const NONE: u32 = u32::MAX;

/// A maximal constant interval of the taut-string derivative.
///
/// Lengths are kept as exact cell counts and masses as sums of raw cell
/// values; merge radii divide by `n` once, which keeps small-integer inputs
/// exact. The mass is taken from the original antiderivative and is constant
/// under merges. The layout is kept at 32 bytes: the sweep touches millions
/// of nodes on large inputs and is memory-bound.
#[derive(Debug, Clone)]
struct IntervalNode {
    /// Sum of the original cell values over the covered cells.
    mass: f64,
    /// First cell covered.
    start: u32,
    /// Number of cells covered.
    cells: u32,
    prev: u32,
    next: u32,
    alive: bool,
    class: Classification,
    /// Is the jump at the left edge increasing? Jump directions persist
    /// between merge events, so classification never needs current values.
    /// 0 = down, 1 = up, 2 = no neighbor.
    left_up: u8,
    right_up: u8,
}

impl IntervalNode {
    fn reclassify(&mut self) {
        self.class = match (self.prev != NONE, self.next != NONE) {
            (false, false) => Classification::Global,
            (false, true) => Classification::BoundaryLeft,
            (true, false) => Classification::BoundaryRight,
            (true, true) => match (self.left_up, self.right_up) {
                (1, 0) => Classification::Maximal,
                (0, 1) => Classification::Minimal,
                _ => Classification::Regular,
            },
        };
    }
}

/// The radius at which two adjacent intervals coalesce, from equating their
/// taut-string values. `None` for regular–regular pairs, whose values do not
/// move with the radius.
///
/// Lengths enter as cell counts and masses as raw sums; the single final
/// division by `denominator * n` restores the unit scale.
fn merge_value(left: &IntervalNode, right: &IntervalNode, n: f64) -> Option<f64> {
    use Classification::*;
    let li = left.cells as f64;
    let lj = right.cells as f64;
    let denominator = match (left.class, right.class) {
        (Regular, Regular) => return None,
        (a, b) if a.is_critical() && b.is_critical() => 2.0 * (li + lj),
        (a, Regular) if a.is_critical() => 2.0 * lj,
        (Regular, b) if b.is_critical() => 2.0 * li,
        (a, b) if a.is_critical() && b.is_boundary() => li + 2.0 * lj,
        (a, b) if a.is_boundary() && b.is_critical() => 2.0 * li + lj,
        (a, Regular) if a.is_boundary() => lj,
        (Regular, b) if b.is_boundary() => li,
        (a, b) if a.is_boundary() && b.is_boundary() => li + lj,
        // Global nodes never form pairs.
        _ => unreachable!("impossible adjacency {:?}/{:?}", left.class, right.class),
    };
    Some((li * right.mass - lj * left.mass).abs() / (denominator * n))
}

/// Does merging this pair reduce the mode count? Only the disappearance of a
/// maximal interval into a minimal or boundary one removes a mode.
fn merge_emits(a: Classification, b: Classification) -> bool {
    use Classification::*;
    matches!((a, b), (Maximal, Minimal) | (Minimal, Maximal))
        || (a == Maximal && b.is_boundary())
        || (a.is_boundary() && b == Maximal)
}

/// Priority-queue entry: a candidate radius for the pair at whose left the
/// given node sits. Ties resolve by leftmost position (`position` is the
/// left node's first cell, which merges never change).
///
/// Entries carry no validity stamp: a pop is valid exactly when the radius
/// recomputed for the pair currently at this slot matches bit for bit. The
/// radius is a pure function of the pair's lengths, masses and classes, so
/// a match identifies a live pair, and a stale entry whose value happens to
/// coincide with the current pair's radius commits a merge that is due at
/// this radius anyway. 16 bytes per entry: on large inputs the queue is the
/// sweep's biggest working set.
#[derive(Debug, Clone, Copy)]
struct MergeCandidate {
    value: f64,
    position: u32,
    left: u32,
}

impl MergeCandidate {
    fn key(&self) -> (f64, u32) {
        (self.value, self.position)
    }

    fn le(&self, other: &Self) -> bool {
        match self.value.total_cmp(&other.value) {
            Ordering::Less => true,
            Ordering::Equal => self.position <= other.position,
            Ordering::Greater => false,
        }
    }
}

/// Four-ary min-heap on (value, position): shallower than a binary heap, so
/// large queues touch fewer cache lines per operation.
#[derive(Default)]
struct CandidateHeap {
    items: Vec<MergeCandidate>,
}

impl CandidateHeap {
    fn with_capacity(capacity: usize) -> Self {
        Self {
            items: Vec::with_capacity(capacity),
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }

    fn peek(&self) -> Option<&MergeCandidate> {
        self.items.first()
    }

    fn push(&mut self, c: MergeCandidate) {
        self.items.push(c);
        let mut i = self.items.len() - 1;
        while i > 0 {
            let parent = (i - 1) / 4;
            if self.items[i].le(&self.items[parent]) {
                self.items.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn pop(&mut self) -> Option<MergeCandidate> {
        if self.items.is_empty() {
            return None;
        }
        let top = self.items.swap_remove(0);
        let len = self.items.len();
        let mut i = 0;
        loop {
            let first = 4 * i + 1;
            if first >= len {
                break;
            }
            let mut smallest = first;
            for child in first + 1..(first + 4).min(len) {
                if self.items[child].le(&self.items[smallest]) {
                    smallest = child;
                }
            }
            if self.items[smallest].le(&self.items[i]) {
                self.items.swap(i, smallest);
                i = smallest;
            } else {
                break;
            }
        }
        Some(top)
    }

    fn rebuild(&mut self, keep: impl Fn(&MergeCandidate) -> bool) {
        self.items.retain(|c| keep(c));
        // Bottom-up heapify.
        for i in (0..self.items.len() / 4 + 1).rev() {
            let mut parent = i;
            loop {
                let first = 4 * parent + 1;
                if first >= self.items.len() {
                    break;
                }
                let mut smallest = first;
                for child in first + 1..(first + 4).min(self.items.len()) {
                    if self.items[child].le(&self.items[smallest]) {
                        smallest = child;
                    }
                }
                if self.items[smallest].le(&self.items[parent]) {
                    self.items.swap(parent, smallest);
                    parent = smallest;
                } else {
                    break;
                }
            }
        }
    }
}

/// Candidate sources for the sweep. The initial candidates (one per
/// adjacent pair) are sorted once and consumed by a linear cursor; only the
/// candidates generated by merges go through the heap. The split keeps the
/// bulk of the traffic sequential in memory.
struct Sweep {
    nodes: Vec<IntervalNode>,
    initial: Vec<MergeCandidate>,
    cursor: usize,
    queue: CandidateHeap,
    /// Queue length right after the last stale purge.
    purge_floor: usize,
    n: f64,
}

impl Sweep {
    fn make_candidate(&self, left: u32, right: u32) -> Option<MergeCandidate> {
        let (l, r) = (&self.nodes[left as usize], &self.nodes[right as usize]);
        merge_value(l, r, self.n).map(|value| MergeCandidate {
            value,
            position: l.start,
            left,
        })
    }

    fn push_candidate(&mut self, left: u32, right: u32) {
        if let Some(c) = self.make_candidate(left, right) {
            // Stale entries linger under lazy invalidation; once they can
            // account for half the queue, filter and re-heapify. Each purge
            // requires the queue to have doubled since the last one, so the
            // total cost stays linear in the number of pushes.
            if self.queue.len() > 2 * self.purge_floor + 1024 {
                let (nodes, n) = (&self.nodes, self.n);
                self.queue.rebuild(|c| !stale(nodes, n, c));
                self.purge_floor = self.queue.len();
            }
            self.queue.push(c);
        }
    }

    /// Smallest remaining candidate in (value, position) order, across the
    /// sorted initial run and the heap of regenerated ones.
    fn pop_candidate(&mut self) -> Option<MergeCandidate> {
        let take_initial = match (self.initial.get(self.cursor), self.queue.peek()) {
            (Some(a), Some(b)) => a.le(b),
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => return None,
        };
        if take_initial {
            self.cursor += 1;
            Some(self.initial[self.cursor - 1])
        } else {
            self.queue.pop()
        }
    }
}

/// A candidate is stale unless the pair currently at its slot reproduces its
/// radius exactly (dead slots and regular-regular pairs produce no radius).
fn stale(nodes: &[IntervalNode], n: f64, c: &MergeCandidate) -> bool {
    let l = &nodes[c.left as usize];
    if !l.alive || l.next == NONE {
        return true;
    }
    merge_value(l, &nodes[l.next as usize], n) != Some(c.value)
}

/// Computes the descending sequence of strictly positive Kolmogorov
/// signatures of `f`. The number of entries equals the mode count.
pub fn kolmogorov_signatures(f: &StepSignal) -> SignatureSequence {
    // Initial intervals: plateaus of the input, which are the constant
    // intervals of the taut-string derivative at radius zero.
    let run_list = runs(f);
    if run_list.len() <= 1 {
        return SignatureSequence::empty();
    }
    let n = f.n() as f64;
    let mut nodes: Vec<IntervalNode> = Vec::with_capacity(run_list.len());
    let mut start = 0u32;
    let last = run_list.len() - 1;
    for (i, &(value, cells)) in run_list.iter().enumerate() {
        let left_value = (i > 0).then(|| run_list[i - 1].0);
        let right_value = (i < last).then(|| run_list[i + 1].0);
        nodes.push(IntervalNode {
            mass: value * cells as f64,
            start,
            cells: cells as u32,
            prev: if i > 0 { (i - 1) as u32 } else { NONE },
            next: if i < last { (i + 1) as u32 } else { NONE },
            alive: true,
            class: classify(value, left_value, right_value),
            left_up: left_value.map_or(2, |l| (l < value) as u8),
            right_up: right_value.map_or(2, |r| (value < r) as u8),
        });
        start += cells as u32;
    }

    let mut sweep = Sweep {
        nodes,
        initial: Vec::with_capacity(last),
        cursor: 0,
        queue: CandidateHeap::with_capacity(run_list.len() / 2 + 64),
        purge_floor: 0,
        n,
    };
    for left in 0..last as u32 {
        if let Some(c) = sweep.make_candidate(left, left + 1) {
            sweep.initial.push(c);
        }
    }
    sweep
        .initial
        .sort_unstable_by(|a, b| a.key().partial_cmp(&b.key()).unwrap());

    let mut emitted: Vec<f64> = Vec::new();
    while let Some(candidate) = sweep.pop_candidate() {
        if stale(&sweep.nodes, sweep.n, &candidate) {
            continue;
        }
        let li = candidate.left as usize;
        let ri = sweep.nodes[li].next as usize;
        if merge_emits(sweep.nodes[li].class, sweep.nodes[ri].class) {
            // Merge values are popped in non-decreasing order; equal emitted
            // signatures are allowed, so clamp away rounding jitter only.
            let alpha = match emitted.last() {
                Some(&last) if candidate.value < last => last,
                _ => candidate.value,
            };
            emitted.push(alpha);
        }
        // Splice: the left slot absorbs the right node.
        let right = &mut sweep.nodes[ri];
        right.alive = false;
        let (right_cells, right_mass) = (right.cells, right.mass);
        let (right_up, right_next) = (right.right_up, right.next);
        let left = &mut sweep.nodes[li];
        left.cells += right_cells;
        left.mass += right_mass;
        left.right_up = right_up;
        left.next = right_next;
        left.reclassify();
        let prev = left.prev;
        let next = left.next;
        if prev != NONE {
            sweep.push_candidate(prev, candidate.left);
        }
        if next != NONE {
            sweep.nodes[next as usize].prev = candidate.left;
            sweep.push_candidate(candidate.left, next);
        }
    }

    emitted.reverse();
    SignatureSequence::new(emitted).expect("sweep emits positive non-increasing radii")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{kolmogorov_distance, mode_count};
    use crate::tautstring::{min_modes_in_ball, signature_oracle};

    fn sig(values: &[f64]) -> StepSignal {
        StepSignal::new(values.to_vec()).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(2.0, Some(0.0), Some(1.0)), Classification::Maximal);
        assert_eq!(
            classify(1.5, Some(0.25), Some(2.5)),
            Classification::Regular
        );
        assert_eq!(classify(0.5, None, Some(1.0)), Classification::BoundaryLeft);
        assert_eq!(
            classify(0.5, Some(1.0), None),
            Classification::BoundaryRight
        );
        assert_eq!(classify(0.5, None, None), Classification::Global);
        assert_eq!(classify(0.0, Some(1.0), Some(2.0)), Classification::Minimal);
    }

    fn node(cells: u32, mass: f64, class: Classification) -> IntervalNode {
        IntervalNode {
            mass,
            start: 0,
            cells,
            prev: NONE,
            next: NONE,
            alive: true,
            class,
            left_up: 2,
            right_up: 2,
        }
    }

    #[test]
    fn merge_value_formulas() {
        use Classification::*;
        // Boundary (|I|=1 cell, mass 0) against the maximal bump (mass 1)
        // on a 3-cell grid: the pair coalesces at 1/9.
        let m = merge_value(&node(1, 0.0, BoundaryLeft), &node(1, 1.0, Maximal), 3.0);
        assert!((m.unwrap() - 1.0 / 9.0).abs() < 1e-16);
        // Adjacent critical intervals with equal averages merge immediately.
        let m = merge_value(&node(2, 1.0, Maximal), &node(4, 2.0, Minimal), 5.0);
        assert_eq!(m.unwrap(), 0.0);
        // Maximal (mass 2) and minimal (mass 1) single cells on a 5-cell
        // grid: |1*1 - 1*2| / (2*(1+1)*5) = 0.05.
        let m = merge_value(&node(1, 2.0, Maximal), &node(1, 1.0, Minimal), 5.0);
        assert!((m.unwrap() - 0.05).abs() < 1e-16);
        // Regular pairs never produce candidates.
        assert!(merge_value(&node(1, 1.0, Regular), &node(1, 2.0, Regular), 3.0).is_none());
        // Orientation: the critical interval's mass enters unscaled against
        // a regular neighbor, so the denominator is twice the regular
        // length. Trace values from the five-cell example at the 0.15 event.
        let m = merge_value(&node(2, 3.0, Regular), &node(1, 3.0, Maximal), 5.0);
        assert!((m.unwrap() - 0.15).abs() < 1e-16);
    }

    #[test]
    fn single_bump_signature() {
        let s = kolmogorov_signatures(&sig(&[0.0, 1.0, 0.0]));
        assert_eq!(s.len(), 1);
        assert!((s.at(0) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn modeless_signals_give_empty_sequences() {
        assert!(kolmogorov_signatures(&sig(&[2.0, 2.0, 2.0])).is_empty());
        assert!(kolmogorov_signatures(&sig(&[0.0, 1.0, 2.0])).is_empty());
        assert!(kolmogorov_signatures(&sig(&[7.0])).is_empty());
        assert!(kolmogorov_signatures(&sig(&[1.0, 0.0, 1.0])).is_empty());
    }

    #[test]
    fn two_mode_trace() {
        // Events: min/max merge at 0.05 emits s_1, max/regular at 0.15 emits
        // nothing, boundary/max at 0.24 emits s_0.
        let s = kolmogorov_signatures(&sig(&[0.0, 2.0, 1.0, 3.0, 0.0]));
        assert_eq!(s.len(), 2);
        assert!((s.at(0) - 0.24).abs() < 1e-15);
        assert!((s.at(1) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn signatures_invariant_under_grid_refinement() {
        let vals = [0.0, 1.0, 1.0, 0.0, 2.0, 0.0];
        let doubled: Vec<f64> = vals.iter().flat_map(|&v| [v, v]).collect();
        let a = kolmogorov_signatures(&sig(&vals));
        let b = kolmogorov_signatures(&sig(&doubled));
        assert_eq!(a.len(), b.len());
        for k in 0..a.len() as isize {
            assert!((a.at(k) - b.at(k)).abs() < 1e-15);
        }
    }

    fn lcg(state: &mut u64) -> u32 {
        *state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*state >> 33) as u32
    }

    #[test]
    fn matches_bisection_oracle_on_random_signals() {
        let mut state = 2024u64;
        for trial in 0..200 {
            let n = 1 + (lcg(&mut state) % 12) as usize;
            let vals: Vec<f64> = (0..n).map(|_| (lcg(&mut state) % 6) as f64).collect();
            let f = sig(&vals);
            let s = kolmogorov_signatures(&f);
            assert_eq!(s.len(), mode_count(&f), "length mismatch on {vals:?}");
            for k in 0..s.len() {
                let oracle = signature_oracle(&f, k, 1e-10).unwrap();
                assert!(
                    (s.at(k as isize) - oracle).abs() < 1e-9,
                    "trial {trial}, s_{k}: sweep {} vs oracle {} on {vals:?}",
                    s.at(k as isize),
                    oracle
                );
            }
        }
    }

    #[test]
    fn signature_count_tracks_min_modes_along_the_sweep() {
        // Just above each emitted radius the ball admits exactly as many
        // modes as signatures remain above it.
        let mut state = 77u64;
        for _ in 0..40 {
            let n = 2 + (lcg(&mut state) % 9) as usize;
            let vals: Vec<f64> = (0..n).map(|_| (lcg(&mut state) % 5) as f64).collect();
            let f = sig(&vals);
            let s = kolmogorov_signatures(&f);
            for k in 0..s.len() {
                let alpha = s.at(k as isize) * (1.0 + 1e-9) + 1e-12;
                assert!(
                    min_modes_in_ball(&f, alpha).unwrap() <= k,
                    "ball at s_{k}+eps should admit <= {k} modes for {vals:?}"
                );
            }
        }
    }

    /// The sweep anchors the string at both ends of the antiderivative, so
    /// its signatures are 1-Lipschitz with respect to the tied-down modulus
    /// `sup_t |(F-G)(t) - t (F-G)(1)|` (and hence 2-Lipschitz in d_K);
    /// equal-mass pairs are 1-Lipschitz in d_K itself.
    #[test]
    fn stability_under_perturbation() {
        let tied_down = |f: &StepSignal, g: &StepSignal| -> f64 {
            let bf = crate::signal::antiderivative(f);
            let bg = crate::signal::antiderivative(g);
            let n = f.n();
            let drift = bf.points()[n] - bg.points()[n];
            (0..=n)
                .map(|i| (bf.points()[i] - bg.points()[i] - drift * i as f64 / n as f64).abs())
                .fold(0.0f64, f64::max)
        };
        let mut state = 5u64;
        for _ in 0..300 {
            let n = 1 + (lcg(&mut state) % 10) as usize;
            let vals: Vec<f64> = (0..n).map(|_| (lcg(&mut state) % 7) as f64).collect();
            let pert: Vec<f64> = vals
                .iter()
                .map(|v| v + (lcg(&mut state) % 200) as f64 / 100.0 - 1.0)
                .collect();
            let f = sig(&vals);
            let g = sig(&pert);
            let d = kolmogorov_distance(&f, &g);
            let b = tied_down(&f, &g);
            let sf = kolmogorov_signatures(&f);
            let sg = kolmogorov_signatures(&g);
            for k in 0..sf.len().max(sg.len()) as isize {
                let diff = (sf.at(k) - sg.at(k)).abs();
                assert!(diff <= b + 1e-12, "tied-down stability violated at k={k}");
                assert!(diff <= 2.0 * d + 1e-12, "2 d_K stability violated at k={k}");
            }
        }
    }

    #[test]
    fn equal_mass_pairs_are_stable_in_kolmogorov_distance() {
        let mut state = 13u64;
        for _ in 0..300 {
            let n = 2 + (lcg(&mut state) % 9) as usize;
            let vals: Vec<f64> = (0..n).map(|_| (lcg(&mut state) % 7) as f64).collect();
            // Mass-preserving perturbation: move weight between two cells.
            let mut pert = vals.clone();
            let i = (lcg(&mut state) as usize) % n;
            let j = (lcg(&mut state) as usize) % n;
            let eps = (lcg(&mut state) % 100) as f64 / 50.0;
            pert[i] += eps;
            pert[j] -= eps;
            let f = sig(&vals);
            let g = sig(&pert);
            let d = kolmogorov_distance(&f, &g);
            let sf = kolmogorov_signatures(&f);
            let sg = kolmogorov_signatures(&g);
            for k in 0..sf.len().max(sg.len()) as isize {
                assert!(
                    (sf.at(k) - sg.at(k)).abs() <= d + 1e-12,
                    "equal-mass stability violated at k={k}"
                );
            }
        }
    }
}
