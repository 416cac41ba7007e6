use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Continuous piecewise-linear function on `[0, inf)`.
///
/// `slopes[0]` applies on `[0, breakpoints[0])`, `slopes[i]` on
/// `[breakpoints[i-1], breakpoints[i])` and the last slope on the unbounded
/// final piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    value_at_zero: f64,
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub slope: f64,
}

impl PiecewiseLinear {
    pub fn new(value_at_zero: f64, breakpoints: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::Config(format!(
                "piecewise-linear function needs {} slopes for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                slopes.len()
            )));
        }
        let increasing = breakpoints.windows(2).all(|w| w[0] < w[1]);
        let positive = breakpoints.first().is_none_or(|&b| b > 0.0);
        if !increasing || !positive || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config(
                "breakpoints must be finite, positive and strictly increasing".into(),
            ));
        }
        if !value_at_zero.is_finite() || slopes.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("non-finite slope or intercept".into()));
        }
        Ok(Self {
            value_at_zero,
            breakpoints,
            slopes,
        })
    }

    /// `f(x) = slope * x`.
    pub fn linear(slope: f64) -> Self {
        Self {
            value_at_zero: 0.0,
            breakpoints: Vec::new(),
            slopes: vec![slope],
        }
    }

    /// `f(x) = min(x, cap)`.
    pub fn capped_identity(cap: f64) -> Result<Self> {
        Self::new(0.0, vec![cap], vec![1.0, 0.0])
    }

    /// Random function with `pieces - 1` breakpoints drawn uniformly from
    /// `(0, range)` and slopes uniform on `[-2, 2]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, pieces: usize, range: f64) -> Self {
        let pieces = pieces.max(1);
        let mut breakpoints: Vec<f64> = (1..pieces)
            .map(|_| rng.random_range(f64::EPSILON..range))
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        let slopes = (0..=breakpoints.len())
            .map(|_| rng.random_range(-2.0..=2.0))
            .collect();
        Self {
            value_at_zero: rng.random_range(-1.0..=1.0),
            breakpoints,
            slopes,
        }
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        let starts = std::iter::once(0.0).chain(self.breakpoints.iter().copied());
        let ends = self
            .breakpoints
            .iter()
            .copied()
            .chain(std::iter::once(f64::INFINITY));
        starts
            .zip(ends)
            .zip(self.slopes.iter().copied())
            .map(|((start, end), slope)| Segment { start, end, slope })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.value_at_zero + self.slopes[0] * x;
        }
        let mut acc = CompensatedSum::new();
        acc.add(self.value_at_zero);
        for seg in self.segments() {
            if x <= seg.start {
                break;
            }
            acc.add(seg.slope * (x.min(seg.end) - seg.start));
        }
        acc.value()
    }

    /// Right derivative at `x`.
    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.breakpoints.partition_point(|&b| b <= x);
        self.slopes[i]
    }

    /// `E f'(a + b U)` for `U ~ Uniform(0,1)`, computed by integrating the
    /// slopes over `[a, a + b]`.
    pub fn mean_derivative_on(&self, a: f64, b: f64) -> f64 {
        if b <= 0.0 {
            return self.derivative(a);
        }
        let (lo, hi) = (a, a + b);
        let mut acc = CompensatedSum::new();
        for seg in self.segments() {
            let overlap = hi.min(seg.end) - lo.max(seg.start);
            if overlap > 0.0 {
                acc.add(seg.slope * overlap);
            }
        }
        acc.value() / b
    }
}
