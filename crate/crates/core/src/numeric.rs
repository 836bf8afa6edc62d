//! Small numerical utilities: compensated summation and deterministic
//! parallel reductions.
//!
//! All reductions in this crate that feed reported values use Neumaier's
//! variant of Kahan summation and a fixed tile order, so results are
//! bit-identical across runs and thread counts.

use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Accumulator::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Complex accumulator built from two real accumulators.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexAccumulator {
    re: Accumulator,
    im: Accumulator,
}

impl ComplexAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.total(), self.im.total())
    }
}

/// Tile size for the deterministic parallel sums below.  Chosen large enough
/// that per-tile overhead is negligible and small enough to keep all cores
/// busy on the grids this crate produces.
const TILE: usize = 4096;

/// Deterministic parallel compensated sum of `f(i)` over `0..n`.
///
/// Tiles of fixed size are summed independently (in parallel) and the tile
/// totals are then combined sequentially in tile order, so the result does
/// not depend on the number of worker threads.
pub fn par_sum_complex<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let tiles = n.div_ceil(TILE);
    let partials: Vec<Complex64> = (0..tiles)
        .into_par_iter()
        .map(|tile| {
            let lo = tile * TILE;
            let hi = usize::min(lo + TILE, n);
            let mut acc = ComplexAccumulator::new();
            for i in lo..hi {
                acc.add(f(i));
            }
            acc.total()
        })
        .collect();
    let mut acc = ComplexAccumulator::new();
    for p in partials {
        acc.add(p);
    }
    acc.total()
}

/// Deterministic parallel compensated sum of a real-valued term function.
pub fn par_sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let tiles = n.div_ceil(TILE);
    let partials: Vec<f64> = (0..tiles)
        .into_par_iter()
        .map(|tile| {
            let lo = tile * TILE;
            let hi = usize::min(lo + TILE, n);
            let mut acc = Accumulator::new();
            for i in lo..hi {
                acc.add(f(i));
            }
            acc.total()
        })
        .collect();
    let mut acc = Accumulator::new();
    for p in partials {
        acc.add(p);
    }
    acc.total()
}

/// `count` points log-spaced between `a` and `b` inclusive (both positive).
pub fn logspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0 && count >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..count)
        .map(|i| {
            let s = i as f64 / (count - 1) as f64;
            (la + s * (lb - la)).exp()
        })
        .collect()
}

/// `count` points linearly spaced between `a` and `b` inclusive.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Least-squares slope of `y` against `x` (both same length, len >= 2).
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = sum(x.iter().copied()) / n;
    let my = sum(y.iter().copied()) / n;
    let sxy = sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = sum(x.iter().map(|a| (a - mx) * (a - mx)));
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancellation() {
        // 1 + 1e100 - 1e100 + 1 = 2; naive summation loses the ones.
        let vals = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(vals), 2.0);
    }

    #[test]
    fn par_sum_is_deterministic_and_accurate() {
        let n: usize = 100_000;
        let f = |i: usize| ((i as f64) * 0.37).sin();
        // The guarantee is thread-count independence: the parallel sum must
        // equal the same tiled reduction run sequentially.  Against a plain
        // compensated sum it only agrees to rounding.
        let mut acc = Accumulator::new();
        for tile in 0..n.div_ceil(TILE) {
            let mut t = Accumulator::new();
            for i in tile * TILE..usize::min((tile + 1) * TILE, n) {
                t.add(f(i));
            }
            acc.add(t.total());
        }
        let par = par_sum(n, f);
        assert_eq!(par, acc.total());
        let seq = sum((0..n).map(f));
        assert!((par - seq).abs() <= 1e-12 * seq.abs().max(1.0));
    }

    #[test]
    fn logspace_endpoints() {
        let g = logspace(1e-3, 1e3, 7);
        assert!((g[0] - 1e-3).abs() < 1e-18);
        assert!((g[6] - 1e3).abs() < 1e-12);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_of_line() {
        let x = linspace(0.0, 1.0, 11);
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t - 0.5).collect();
        assert!((ls_slope(&x, &y) - 3.0).abs() < 1e-12);
    }
}
