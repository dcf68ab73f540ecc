//! Taut strings through the tube of radius `alpha` around the antiderivative.
//!
//! The taut string is the shortest path from `(0, F(0))` to `(1, F(1))` that
//! stays within `[F - alpha, F + alpha]` at every grid breakpoint. Its
//! derivative has the minimal number of modes among all functions at
//! Kolmogorov distance at most `alpha` from the input, which makes
//! [`signature_oracle`] an independent verification path for the merge-sweep
//! signatures in [`crate::kolmsig`].

use crate::signal::{mode_count, StepSignal};
use crate::{is_nonnegative, is_positive, Error, Result};

/// The tube of radius `alpha` around an antiderivative. Top `F + alpha` and
/// bottom `F - alpha` are implied, never stored.
#[derive(Debug, Clone)]
pub struct Tube {
    /// Antiderivative values at breakpoints, scaled by `n` (so slopes over
    /// one cell are the cell values themselves).
    scaled: Vec<f64>,
    radius: f64,
    n: usize,
}

impl Tube {
    pub fn new(f: &StepSignal, radius: f64) -> Result<Self> {
        if !is_nonnegative(radius) {
            return Err(Error::Domain(format!(
                "tube radius must be nonnegative, got {radius}"
            )));
        }
        let n = f.n();
        let mut scaled = Vec::with_capacity(n + 1);
        scaled.push(0.0);
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
            scaled.push(sum + comp);
        }
        Ok(Self { scaled, radius, n })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// A continuous piecewise-linear path through the tube, pinned to the
/// antiderivative at both domain endpoints. Knots sit at grid breakpoints.
#[derive(Debug, Clone)]
pub struct TautString {
    /// Knot abscissae in `[0, 1]`.
    knots: Vec<f64>,
    /// Path values at the knots.
    values: Vec<f64>,
    /// Knot abscissae as cell indices, kept for exact derivative extraction.
    cells: Vec<usize>,
    /// Path values scaled by `n` (same scaling as [`Tube`]).
    scaled: Vec<f64>,
    n: usize,
}

impl TautString {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Derivative as a step signal on the original grid. Knots lie on grid
    /// breakpoints, so each cell carries a single slope.
    pub fn derivative(&self) -> StepSignal {
        let mut out = Vec::with_capacity(self.n);
        for w in 0..self.cells.len() - 1 {
            let (x0, x1) = (self.cells[w], self.cells[w + 1]);
            let slope = (self.scaled[w + 1] - self.scaled[w]) / (x1 - x0) as f64;
            out.resize(x1, slope);
        }
        StepSignal::new(out).expect("taut string slopes are finite")
    }
}

/// Chain comparison by cross product: is slope(p0, p1) < slope(p1, p2)?
/// Arguments must satisfy p0.x < p1.x < p2.x.
fn slope_lt(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> bool {
    (p1.1 - p0.1) * (p2.0 - p1.0) < (p2.1 - p1.1) * (p1.0 - p0.0)
}

/// Chain comparison by cross product: is slope(p0, p1) <= slope(p1, p2)?
fn slope_le(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> bool {
    (p1.1 - p0.1) * (p2.0 - p1.0) <= (p2.1 - p1.1) * (p1.0 - p0.0)
}

/// Ray comparison from a common anchor: is slope(a, p) < slope(a, q)?
/// Requires p.x > a.x and q.x > a.x; p and q may be in either x order.
fn ray_lt(a: (f64, f64), p: (f64, f64), q: (f64, f64)) -> bool {
    (p.1 - a.1) * (q.0 - a.0) < (q.1 - a.1) * (p.0 - a.0)
}

/// Funnel state for the corridor walk: committed knots, the current apex, and
/// the convex/concave hulls of the upper/lower wall points seen since the
/// apex.
struct Funnel {
    committed: Vec<(f64, f64)>,
    apex: (f64, f64),
    upper: std::collections::VecDeque<(f64, f64)>,
    lower: std::collections::VecDeque<(f64, f64)>,
}

impl Funnel {
    fn new(start: (f64, f64)) -> Self {
        Self {
            committed: vec![start],
            apex: start,
            upper: Default::default(),
            lower: Default::default(),
        }
    }

    fn commit(&mut self, p: (f64, f64)) {
        self.committed.push(p);
        self.apex = p;
    }

    /// Inserts the next upper-wall point. The upper hull is the greatest
    /// convex minorant of the upper constraints: slopes along it are
    /// non-decreasing. If the new constraint undercuts the ray from the apex
    /// to the first lower-hull point, the string is pushed onto the bottom of
    /// the tube there and those contacts become knots.
    fn push_upper(&mut self, q: (f64, f64)) {
        while self.upper.len() >= 2 {
            let b = self.upper[self.upper.len() - 1];
            let pb = self.upper[self.upper.len() - 2];
            if !slope_lt(pb, b, q) {
                self.upper.pop_back();
            } else {
                break;
            }
        }
        if self.upper.len() == 1 && !slope_lt(self.apex, self.upper[0], q) {
            self.upper.pop_back();
        }
        if self.upper.is_empty() {
            while let Some(&l0) = self.lower.front() {
                if ray_lt(self.apex, q, l0) {
                    // hi < lo: bend downward at the bottom contact.
                    self.lower.pop_front();
                    self.commit(l0);
                } else {
                    break;
                }
            }
        }
        self.upper.push_back(q);
    }

    /// Mirror image of [`Self::push_upper`] for the bottom wall: the lower
    /// hull is the least concave majorant (slopes non-increasing), and a new
    /// bottom constraint may force top contacts to become knots.
    fn push_lower(&mut self, q: (f64, f64)) {
        while self.lower.len() >= 2 {
            let b = self.lower[self.lower.len() - 1];
            let pb = self.lower[self.lower.len() - 2];
            if slope_le(pb, b, q) {
                self.lower.pop_back();
            } else {
                break;
            }
        }
        if self.lower.len() == 1 && slope_le(self.apex, self.lower[0], q) {
            self.lower.pop_back();
        }
        if self.lower.is_empty() {
            while let Some(&u0) = self.upper.front() {
                if ray_lt(self.apex, u0, q) {
                    // lo > hi: bend upward at the top contact.
                    self.upper.pop_front();
                    self.commit(u0);
                } else {
                    break;
                }
            }
        }
        self.lower.push_back(q);
    }

    /// Routes the path to the fixed right endpoint and returns the knots.
    fn finish(mut self, end: (f64, f64)) -> Vec<(f64, f64)> {
        loop {
            // Constraints at or behind the apex are already resolved.
            while matches!(self.upper.front(), Some(u) if u.0 <= self.apex.0) {
                self.upper.pop_front();
            }
            while matches!(self.lower.front(), Some(l) if l.0 <= self.apex.0) {
                self.lower.pop_front();
            }
            if matches!(self.upper.front(), Some(&u0) if ray_lt(self.apex, u0, end)) {
                let u0 = self.upper.pop_front().unwrap();
                self.commit(u0);
                continue;
            }
            if matches!(self.lower.front(), Some(&l0) if ray_lt(self.apex, end, l0)) {
                let l0 = self.lower.pop_front().unwrap();
                self.commit(l0);
                continue;
            }
            break;
        }
        self.commit(end);
        self.committed
    }
}

/// Computes the taut string through the tube of radius `alpha` around the
/// antiderivative of `f`, in a single left-to-right pass.
pub fn taut_string(f: &StepSignal, alpha: f64) -> Result<TautString> {
    let tube = Tube::new(f, alpha)?;
    let n = tube.n;
    let nf = n as f64;
    if alpha == 0.0 {
        // Degenerate tube: the string is the antiderivative itself.
        let cells: Vec<usize> = (0..=n).collect();
        return Ok(TautString {
            knots: cells.iter().map(|&i| i as f64 / nf).collect(),
            values: tube.scaled.iter().map(|&y| y / nf).collect(),
            cells,
            scaled: tube.scaled,
            n,
        });
    }
    // Work in scaled coordinates: x in cells, y multiplied by n.
    let scaled_radius = alpha * nf;
    let mut funnel = Funnel::new((0.0, 0.0));
    for i in 1..n {
        let y = tube.scaled[i];
        funnel.push_upper((i as f64, y + scaled_radius));
        funnel.push_lower((i as f64, y - scaled_radius));
    }
    let knots = funnel.finish((nf, tube.scaled[n]));
    let cells: Vec<usize> = knots.iter().map(|&(x, _)| x.round() as usize).collect();
    let scaled: Vec<f64> = knots.iter().map(|&(_, y)| y).collect();
    Ok(TautString {
        knots: cells.iter().map(|&i| i as f64 / nf).collect(),
        values: scaled.iter().map(|&y| y / nf).collect(),
        cells,
        scaled,
        n,
    })
}

/// Derivative of the taut string as a step signal on the original grid.
pub fn taut_derivative(f: &StepSignal, alpha: f64) -> Result<StepSignal> {
    if alpha == 0.0 {
        return Ok(f.clone());
    }
    Ok(taut_string(f, alpha)?.derivative())
}

/// The smallest mode count attainable within the closed Kolmogorov ball of
/// radius `alpha` around `f`: the mode count of the taut-string derivative.
pub fn min_modes_in_ball(f: &StepSignal, alpha: f64) -> Result<usize> {
    Ok(mode_count(&taut_derivative(f, alpha)?))
}

/// Bisection oracle for the `k`-th Kolmogorov signature: the smallest radius
/// whose ball contains a function with at most `k` modes, to absolute
/// tolerance `tol`.
///
/// This is the reference path used to validate the merge sweep; it never
/// looks at merge values.
pub fn signature_oracle(f: &StepSignal, k: usize, tol: f64) -> Result<f64> {
    if !is_positive(tol) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if mode_count(f) <= k {
        return Ok(0.0);
    }
    // Bracket: the constant running at the mean slope has zero modes, so its
    // distance bounds every signature from above.
    let tube = Tube::new(f, 0.0)?;
    let n = tube.n as f64;
    let total = tube.scaled[tube.n];
    let mut hi = tube
        .scaled
        .iter()
        .enumerate()
        .map(|(i, &y)| (y - total * i as f64 / n).abs())
        .fold(0.0f64, f64::max)
        / n;
    let mut lo = 0.0f64;
    for _ in 0..4 {
        if min_modes_in_ball(f, hi)? <= k {
            break;
        }
        // Floating-point slack at the exact chord radius; widen slightly.
        hi = hi * (1.0 + 1e-12) + 1e-300;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if min_modes_in_ball(f, mid)? <= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
