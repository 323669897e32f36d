//! Neumaier (improved Kahan) summation.
//!
//! Every inequality chain is accumulated through [`NeumaierSum`] so that slack
//! values near equality cases reflect the mathematics rather than the order of
//! additions.

use std::ops::AddAssign;

#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.s + value;
        if self.s.abs() >= value.abs() {
            self.c += (self.s - t) + value;
        } else {
            self.c += (value - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of an iterator of values.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<NeumaierSum>().value()
}

/// Compensated dot product `Σ a_i b_i`.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    sum(a.iter().zip(b).map(|(x, y)| x * y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        let v = [1e100, 1.0, -1e100];
        assert_eq!(sum(v), 1.0);
        let naive: f64 = v.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn tenths() {
        let s = sum(std::iter::repeat_n(0.1, 10));
        assert_eq!(s, 1.0);
    }

    #[test]
    fn dot_product() {
        assert_eq!(dot(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 32.0);
        assert_eq!(dot(&[], &[]), 0.0);
    }
}
