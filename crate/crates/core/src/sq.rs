//! Stochastic (dithered) quantization onto a finite level grid.
//!
//! A value `x` between two adjacent levels `l_i <= x < l_{i+1}` is sent as
//! index `i` with probability `(l_{i+1} - x) / (l_{i+1} - l_i)` and as
//! `i + 1` otherwise, so the decoded level is an unbiased estimate of `x`.
//! A value sitting exactly on a level is sent as that level.
//!
//! Indices are zero-based on the wire: level `levels[j]` has index `j`.

use alloc::vec::Vec;

use crate::math;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SqError {
    #[error("value {value} outside grid range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("level index {index} out of range for a grid of {len} levels")]
    BadIndex { index: usize, len: usize },
    #[error("invalid grid: {0}")]
    BadRange(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelGrid {
    levels: Vec<f64>,
}

impl LevelGrid {
    /// Builds a grid from strictly increasing finite levels, at least two.
    pub fn new(levels: Vec<f64>) -> Result<Self, SqError> {
        if levels.len() < 2 {
            return Err(SqError::BadRange("need at least two levels"));
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return Err(SqError::BadRange("levels must be finite"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SqError::BadRange("levels must be strictly increasing"));
        }
        Ok(Self { levels })
    }

    /// `2^bits` equally spaced levels from `lo` to `hi` inclusive.
    pub fn uniform(lo: f64, hi: f64, bits: u32) -> Result<Self, SqError> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(SqError::BadRange("need finite lo < hi"));
        }
        if bits == 0 || bits > 24 {
            return Err(SqError::BadRange("bits must be in 1..=24"));
        }
        let m = 1usize << bits;
        let step = (hi - lo) / (m - 1) as f64;
        let mut levels: Vec<f64> = (0..m).map(|j| lo + step * j as f64).collect();
        levels[m - 1] = hi;
        Self::new(levels)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lo(&self) -> f64 {
        self.levels[0]
    }

    pub fn hi(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }

    /// Bits needed to address every level: `ceil(log2(m))`.
    pub fn index_width(&self) -> u32 {
        usize::BITS - (self.levels.len() - 1).leading_zeros()
    }

    pub fn max_spacing(&self) -> f64 {
        self.levels
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Clamps `x` into the grid range.
    pub fn clip(&self, x: f64) -> f64 {
        x.clamp(self.lo(), self.hi())
    }

    /// Index of the lower bracketing level, never the last one.
    fn lower_index(&self, x: f64) -> usize {
        let m = self.levels.len();
        let above = self.levels.partition_point(|&l| l <= x);
        above.saturating_sub(1).min(m - 2)
    }
}

/// Encodes `x` to a level index.
pub fn encode(x: f64, grid: &LevelGrid, rng: &mut RngStream) -> Result<usize, SqError> {
    if x.is_nan() || x < grid.lo() || x > grid.hi() {
        return Err(SqError::OutOfRange {
            value: x,
            lo: grid.lo(),
            hi: grid.hi(),
        });
    }
    let i = grid.lower_index(x);
    let (lo, hi) = (grid.levels[i], grid.levels[i + 1]);
    let p_upper = (x - lo) / (hi - lo);
    Ok(if rng.bernoulli(p_upper) { i + 1 } else { i })
}

pub fn decode(index: usize, grid: &LevelGrid) -> Result<f64, SqError> {
    grid.levels
        .get(index)
        .copied()
        .ok_or(SqError::BadIndex {
            index,
            len: grid.len(),
        })
}

/// Stochastic rounding on the integer grid: returns `whole` or `whole + 1`,
/// the latter with probability `frac` (`0 <= frac < 1`).
///
/// Splitting the input into integer and fractional parts keeps the
/// rounding exact for inputs far from zero.
#[inline]
pub fn round_split(whole: i64, frac: f64, rng: &mut RngStream) -> i64 {
    debug_assert!((0.0..1.0).contains(&frac), "frac = {frac}");
    if frac > 0.0 && rng.bernoulli(frac) {
        whole + 1
    } else {
        whole
    }
}

/// Splits a finite `x` into `(floor(x), x - floor(x))`.
#[inline]
pub fn split(x: f64) -> (f64, f64) {
    let whole = math::floor(x);
    let mut frac = x - whole;
    // x - floor(x) can round up to 1.0 for tiny negative x.
    if frac >= 1.0 {
        frac = 0.0;
        return (whole + 1.0, frac);
    }
    (whole, frac)
}
