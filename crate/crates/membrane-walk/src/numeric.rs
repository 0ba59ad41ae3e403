//! Small numeric helpers shared by the oracles and the statistics kit.

/// Neumaier-compensated accumulator.
///
/// The renewal recursion and the covariance reductions accumulate up to
/// `10^10` terms; plain summation would not meet the `1e-10` identity
/// tolerance used by the oracle self-checks.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum of a slice, independent of its length.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Fixed chunk width used for order-stable parallel reductions. Both the
/// parallel and the sequential path fold per-chunk partial sums in chunk
/// order, so the result does not depend on the worker count.
pub const REDUCE_CHUNK: usize = 4096;

/// Closed interval `[lo, hi]` carrying a rigorously bracketed quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn exact(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted bracket: [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        let expected = 1.0 + 1e-10;
        assert!((acc.value() - expected).abs() < 1e-13);
    }

    #[test]
    fn bracket_midpoint() {
        let b = Bracket::new(0.25, 0.75);
        assert_eq!(b.mid(), 0.5);
        assert!(b.contains(0.3));
        assert!(!b.contains(0.9));
    }
}
