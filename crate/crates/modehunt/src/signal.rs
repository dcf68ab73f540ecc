//! Step signals on equipartitions of `[0, 1]`, their antiderivatives, the
//! Kolmogorov and sup distances, and exact mode counting.

use crate::{Error, Result};

/// A piecewise-constant function on the equipartition of `[0, 1]` into `n`
/// cells; value `i` holds on `[i/n, (i+1)/n)`.
///
/// The cell values fully determine the function: jump-point values are never
/// stored, so every `StepSignal` is the canonical representative of its class
/// of a.e.-identical functions, which is the representative with the fewest
/// modes.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSignal {
    values: Vec<f64>,
}

impl StepSignal {
    /// Builds a signal from cell values. Fails on an empty vector or any
    /// non-finite value.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSignal("need at least one cell".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "non-finite value {} at cell {i}",
                values[i]
            )));
        }
        Ok(Self { values })
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// The antiderivative of a step signal, stored at the grid breakpoints
/// `t_i = i/n`; continuous piecewise linear with `F(0) = 0`.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    points: Vec<f64>,
}

impl Antiderivative {
    /// Values `F(i/n)` for `i = 0..=n`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of cells of the underlying signal.
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    /// Evaluates `F` at the rational point `num/den` of `[0, 1]` by linear
    /// interpolation. Integer cell lookup keeps breakpoints exact.
    fn eval_frac(&self, num: u64, den: u64, values: &[f64]) -> f64 {
        let n = self.n() as u64;
        let scaled = num * n;
        let cell = (scaled / den).min(n - 1);
        let rem = scaled - cell * den;
        if rem == 0 && num * n == cell * den {
            return self.points[cell as usize];
        }
        self.points[cell as usize] + values[cell as usize] * (rem as f64 / (den * n) as f64)
    }
}

/// Exact cumulative sums of `values[i] / n`, compensated so that relative
/// error stays near machine precision for n up to 10^6.
pub fn antiderivative(f: &StepSignal) -> Antiderivative {
    let n = f.n() as f64;
    let mut points = Vec::with_capacity(f.n() + 1);
    points.push(0.0);
    // Neumaier summation over the raw values; divide once per breakpoint.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in f.values() {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
        points.push((sum + comp) / n);
    }
    Antiderivative { points }
}

/// Walks the union grid of two signals, calling `at_break` at every interior
/// union breakpoint (as a fraction over the merged grid) and `on_cell` with
/// the pair of values holding on each union cell.
fn walk_union_grid(
    f: &StepSignal,
    g: &StepSignal,
    mut on_cell: impl FnMut(f64, f64),
    mut at_break: impl FnMut(u64, u64),
) {
    let n = f.n() as u64;
    let m = g.n() as u64;
    let (mut i, mut j) = (0u64, 0u64);
    loop {
        on_cell(f.values()[i as usize], g.values()[j as usize]);
        // Compare cell right endpoints (i+1)/n and (j+1)/m exactly.
        let a = (i + 1) * m;
        let b = (j + 1) * n;
        if a <= b {
            i += 1;
        }
        if b <= a {
            j += 1;
        }
        if i == n || j == m {
            break;
        }
        at_break(a.min(b), n * m);
    }
}

/// Kolmogorov distance: the sup distance of the two antiderivatives.
///
/// Both antiderivatives are piecewise linear, so the maximum of `|F - G|` is
/// attained at a breakpoint of the union grid; those are evaluated exactly.
pub fn kolmogorov_distance(f: &StepSignal, g: &StepSignal) -> f64 {
    let big_f = antiderivative(f);
    let big_g = antiderivative(g);
    let mut best = (big_f.points()[f.n()] - big_g.points()[g.n()]).abs();
    walk_union_grid(
        f,
        g,
        |_, _| {},
        |num, den| {
            let d = (big_f.eval_frac(num, den, f.values()) - big_g.eval_frac(num, den, g.values()))
                .abs();
            if d > best {
                best = d;
            }
        },
    );
    best
}

/// Sup distance of two step signals, compared cell by cell on the union grid.
pub fn sup_distance(f: &StepSignal, g: &StepSignal) -> f64 {
    let mut best = 0.0f64;
    walk_union_grid(
        f,
        g,
        |a, b| {
            let d = (a - b).abs();
            if d > best {
                best = d;
            }
        },
        |_, _| {},
    );
    best
}

/// Coalesces adjacent equal cell values into runs; returns `(value, cells)`
/// per run. Exact comparison: ties are plateaus by construction.
pub(crate) fn runs(f: &StepSignal) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in f.values() {
        match out.last_mut() {
            Some((rv, len)) if *rv == v => *len += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Number of modes: inner runs strictly greater than both neighboring runs.
///
/// This realizes the supremum over finite partitions of the per-partition
/// mode count; the first and last run are never counted.
pub fn mode_count(f: &StepSignal) -> usize {
    let r = runs(f);
    r.windows(3)
        .filter(|w| w[1].0 > w[0].0 && w[1].0 > w[2].0)
        .count()
}

/// A finite descending sequence of strictly positive signatures, implicitly
/// padded with zeros, with the convention `s_{-1} = +inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureSequence {
    positives: Vec<f64>,
}

impl SignatureSequence {
    /// Validates positivity and monotonicity.
    pub fn new(positives: Vec<f64>) -> Result<Self> {
        for w in positives.windows(2) {
            if w[1] > w[0] {
                return Err(Error::InvalidSignal(format!(
                    "signatures must be non-increasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        if positives
            .iter()
            .any(|&s| !crate::is_positive(s) || !s.is_finite())
        {
            return Err(Error::InvalidSignal(
                "signatures must be strictly positive and finite".into(),
            ));
        }
        Ok(Self { positives })
    }

    pub fn empty() -> Self {
        Self {
            positives: Vec::new(),
        }
    }

    /// `s_k`: stored value for `k < len`, `0` beyond, `+inf` for `k = -1`.
    pub fn at(&self, k: isize) -> f64 {
        if k < 0 {
            return f64::INFINITY;
        }
        self.positives.get(k as usize).copied().unwrap_or(0.0)
    }

    /// Number of strictly positive signatures.
    pub fn len(&self) -> usize {
        self.positives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.positives
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(values: &[f64]) -> StepSignal {
        StepSignal::new(values.to_vec()).unwrap()
    }

    #[test]
    fn rejects_invalid_signals() {
        assert!(StepSignal::new(vec![]).is_err());
        assert!(StepSignal::new(vec![0.0, f64::NAN]).is_err());
        assert!(StepSignal::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn antiderivative_direct_integration() {
        let f = antiderivative(&sig(&[0.0, 1.0, 0.0]));
        let expect = [0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0];
        for (a, b) in f.points().iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }

        let z = antiderivative(&sig(&[0.0; 7]));
        assert!(z.points().iter().all(|&p| p == 0.0));

        let one = antiderivative(&sig(&[2.0]));
        assert_eq!(one.points(), &[0.0, 2.0]);
    }

    #[test]
    fn kolmogorov_distance_examples() {
        let f = sig(&[0.0, 1.0, 0.0]);
        assert_eq!(kolmogorov_distance(&f, &f), 0.0);

        let g = sig(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        // |F - G| at breakpoints: [0, 1/9, 1/9, 0].
        assert!((kolmogorov_distance(&f, &g) - 1.0 / 9.0).abs() < 1e-15);

        let h = sig(&[1.0, 1.0]);
        let zero = sig(&[0.0]);
        assert!((kolmogorov_distance(&h, &zero) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_distance_mixed_grids() {
        // Same function on refined grid must be at distance zero.
        let f = sig(&[1.0, 3.0]);
        let f2 = sig(&[1.0, 1.0, 3.0, 3.0]);
        assert_eq!(kolmogorov_distance(&f, &f2), 0.0);
    }

    #[test]
    fn sup_distance_examples() {
        let f = sig(&[0.0, 1.0, 0.0]);
        assert_eq!(sup_distance(&f, &f), 0.0);
        assert_eq!(sup_distance(&f, &sig(&[0.0, 0.0, 0.0])), 1.0);
        // Union grid of n=2 and n=3 has breakpoints at 1/3, 1/2, 2/3.
        let a = sig(&[1.0, 3.0]);
        let b = sig(&[2.0, 2.0, 2.0]);
        assert_eq!(sup_distance(&a, &b), 1.0);
    }

    #[test]
    fn mode_count_examples() {
        assert_eq!(mode_count(&sig(&[5.0, 5.0, 5.0])), 0);
        assert_eq!(mode_count(&sig(&[0.0, 2.0, 2.0, 0.0])), 1);
        assert_eq!(mode_count(&sig(&[0.0, 2.0, 1.0, 3.0, 0.0])), 2);
        assert_eq!(mode_count(&sig(&[0.0, 1.0, 2.0])), 0);
        assert_eq!(mode_count(&sig(&[1.0])), 0);
        // Boundary maxima are not inner modes.
        assert_eq!(mode_count(&sig(&[3.0, 0.0, 1.0])), 0);
    }

    /// Brute-force `sup_P M(f, P)` over all partitions whose interior points
    /// are cell midpoints. The function value at a midpoint is the cell value;
    /// at the domain endpoints it is the first/last cell value.
    fn mode_count_bruteforce(f: &StepSignal) -> usize {
        let n = f.n();
        let vals = f.values();
        let mut best = 0usize;
        for mask in 0u32..(1 << n) {
            // Partition: 0, selected midpoints, 1.
            let mut pts: Vec<f64> = vec![vals[0]];
            for (i, v) in vals.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    pts.push(*v);
                }
            }
            pts.push(vals[n - 1]);
            let count = pts
                .windows(3)
                .filter(|w| w[1] > w[0] && w[1] > w[2])
                .count();
            best = best.max(count);
        }
        best
    }

    #[test]
    fn mode_count_matches_partition_supremum() {
        // All signals with n <= 8 would be 4^8 * 256 masks; sample
        // exhaustively for n <= 4 and pseudo-randomly for n in 5..=8.
        for n in 1..=4usize {
            let states = 4u32.pow(n as u32);
            for code in 0..states {
                let mut c = code;
                let mut vals = Vec::with_capacity(n);
                for _ in 0..n {
                    vals.push((c % 4) as f64);
                    c /= 4;
                }
                let f = sig(&vals);
                assert_eq!(
                    mode_count(&f),
                    mode_count_bruteforce(&f),
                    "mismatch at {vals:?}"
                );
            }
        }
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 33) as u32
        };
        for _ in 0..500 {
            let n = 5 + (next() % 4) as usize;
            let vals: Vec<f64> = (0..n).map(|_| (next() % 4) as f64).collect();
            let f = sig(&vals);
            assert_eq!(
                mode_count(&f),
                mode_count_bruteforce(&f),
                "mismatch at {vals:?}"
            );
        }
    }

    #[test]
    fn mode_count_invariant_under_refinement() {
        let cases: [&[f64]; 4] = [
            &[0.0, 2.0, 1.0, 3.0, 0.0],
            &[1.0, 1.0, 0.0],
            &[0.0, 2.0, 2.0, 0.0],
            &[4.0],
        ];
        for vals in cases {
            let f = sig(vals);
            let doubled: Vec<f64> = vals.iter().flat_map(|&v| [v, v]).collect();
            assert_eq!(mode_count(&f), mode_count(&sig(&doubled)));
        }
    }

    #[test]
    fn signature_sequence_accessors() {
        let s = SignatureSequence::new(vec![0.24, 0.05]).unwrap();
        assert_eq!(s.at(0), 0.24);
        assert_eq!(s.at(5), 0.0);
        assert_eq!(s.at(-1), f64::INFINITY);
        assert!(SignatureSequence::new(vec![0.1, 0.2]).is_err());
        assert!(SignatureSequence::new(vec![0.0]).is_err());
    }
}
