use serde::{Deserialize, Serialize};

/// Mixed absolute/relative tolerance: a value `v` measured against terms of
/// magnitude `scale` is accepted as nonnegative when `v >= -(abs + rel * scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub fn allowance(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }

    pub fn accepts(&self, slack: f64, scale: f64) -> bool {
        slack >= -self.allowance(scale)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-9, 1e-9)
    }
}
