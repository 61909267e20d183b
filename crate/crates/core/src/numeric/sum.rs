//! Compensated (Kahan) summation.
//!
//! Row-wise log-likelihood sums must not depend on evaluation order beyond
//! 1e-9, so accumulation always goes through a compensated accumulator
//! instead of a bare `+=` loop.

/// Kahan-Babuska compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum(values: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        acc.add(1e100);
        acc.add(1.0);
        acc.add(-1e100);
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn order_insensitive_within_1e9() {
        let values: Vec<f64> = (0..10_000).map(|i| ((i * 37) % 101) as f64 * 1e-3 - 0.05).collect();
        let forward = kahan_sum(&values);
        let mut rev = values.clone();
        rev.reverse();
        let backward = kahan_sum(&rev);
        assert!((forward - backward).abs() < 1e-9);
    }
}
