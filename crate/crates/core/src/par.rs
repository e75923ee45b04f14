//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature every helper runs on the ambient rayon pool;
//! without it the same code path runs on the calling thread. Reductions are
//! always performed over fixed-size chunks combined in index order, so results
//! do not depend on how work was scheduled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used by deterministic reductions.
const CHUNK: usize = 2048;

/// Evaluates `f` at every index in `0..n`, collecting results in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fills `out` with `f(i)` for every position.
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
    }
}

/// Applies `f` to consecutive row chunks of a row-major buffer.
pub fn for_each_row<F>(buf: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        buf.par_chunks_mut(width).enumerate().for_each(|(i, r)| f(i, r));
    }
    #[cfg(not(feature = "parallel"))]
    {
        buf.chunks_mut(width).enumerate().for_each(|(i, r)| f(i, r));
    }
}

/// Sum of `f(i)` over `0..n` with a schedule-independent reduction order.
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials = map_range(n_chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    });
    partials.into_iter().sum()
}

/// Schedule-independent sum of a slice.
pub fn sum(xs: &[f64]) -> f64 {
    sum_range(xs.len(), |i| xs[i])
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Fixed-point scale of [`FixedSum`]: 2^100.
const FIXED_SCALE: f64 = 1_267_650_600_228_229_401_496_703_205_376.0;

/// Exact, order-independent accumulator for reals of magnitude below 2^26.
///
/// Each term is rounded once to a multiple of 2^-100 and accumulated as an
/// integer, so any summation order gives the same bits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FixedSum(i128);

impl FixedSum {
    pub fn add(&mut self, x: f64) {
        debug_assert!(x.abs() < 67_108_864.0, "term {x} out of fixed-point range");
        self.0 += (x * FIXED_SCALE).round() as i128;
    }

    pub fn merge(self, other: FixedSum) -> FixedSum {
        FixedSum(self.0 + other.0)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / FIXED_SCALE
    }
}

/// Order-independent sum of `f(i)` over `0..n`; see [`FixedSum`].
pub fn exact_sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials = map_range(n_chunks, |c| {
        let mut acc = FixedSum::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            acc.add(f(i));
        }
        acc
    });
    partials.into_iter().fold(FixedSum::default(), FixedSum::merge).value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_range_matches_sequential_chunks() {
        let xs: Vec<f64> = (0..10_000).map(|i| (i as f64).sin()).collect();
        let expected: f64 = xs.chunks(CHUNK).map(|c| c.iter().sum::<f64>()).sum();
        assert_eq!(sum(&xs), expected);
    }

    #[test]
    fn pairwise_sum_small_and_large() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
        let xs = vec![0.1; 1000];
        assert!((pairwise_sum(&xs) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_sum_is_order_independent() {
        let xs: Vec<f64> = (0..5000).map(|i| ((i * 7919) % 1000) as f64 * 1e-3 + 1e-9 * i as f64).collect();
        let fwd = exact_sum_range(xs.len(), |i| xs[i]);
        let rev = exact_sum_range(xs.len(), |i| xs[xs.len() - 1 - i]);
        assert_eq!(fwd.to_bits(), rev.to_bits());
        assert!((fwd - xs.iter().sum::<f64>()).abs() < 1e-9);
        assert_eq!(FIXED_SCALE, 2f64.powi(100));
    }

    #[test]
    fn map_range_preserves_order() {
        assert_eq!(map_range(5, |i| i * i), vec![0, 1, 4, 9, 16]);
    }
}
