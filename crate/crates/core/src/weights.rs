//! Weight tuples, increasing rearrangements and bound factors.
//!
//! Notation: `A_j = Σ_{i<=j} a_i` are prefix sums, `Ā_k = A_n − A_{k−1}` suffix
//! sums. A Jensen-Steffensen tuple satisfies `0 <= A_j <= A_n` for all `j`
//! with `A_n > 0`; individual weights may be negative.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum;

/// Slack admitted on prefix-sum conditions to absorb round-off at the boundary.
pub const PREFIX_SLACK: f64 = 1e-12;
/// Relative slack on `Σ a_i = 1` for normalized modes.
pub const TOTAL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Nonnegative, summing to 1.
    Simplex,
    /// `0 <= A_j <= A_n`, `A_n > 0`.
    Steffensen,
    /// `0 <= A_j <= 1`, `A_n = 1`.
    SteffensenNormalized,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Simplex => "simplex",
            WeightMode::Steffensen => "steffensen",
            WeightMode::SteffensenNormalized => "steffensen_normalized",
        })
    }
}

/// A validated weight tuple with cached prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTuple {
    values: Vec<f64>,
    mode: WeightMode,
    prefix: Vec<f64>,
}

fn invalid(index: usize, reason: impl Into<String>) -> Error {
    Error::InvalidWeights {
        index,
        reason: reason.into(),
    }
}

fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut acc = sum::NeumaierSum::new();
    values
        .iter()
        .map(|&v| {
            acc += v;
            acc.value()
        })
        .collect()
}

/// Validates `values` against `mode`. Errors name the first violated index (1-based).
pub fn validate(values: &[f64], mode: WeightMode) -> Result<WeightTuple> {
    WeightTuple::new(values.to_vec(), mode)
}

impl WeightTuple {
    pub fn new(values: Vec<f64>, mode: WeightMode) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid(0, "weight tuple is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(i + 1, "weight is not finite"));
        }
        let prefix = prefix_sums(&values);
        let total = prefix[prefix.len() - 1];
        match mode {
            WeightMode::Simplex => {
                if let Some(i) = values.iter().position(|&v| v < 0.0) {
                    return Err(invalid(i + 1, format!("negative weight {}", values[i])));
                }
                if (total - 1.0).abs() > TOTAL_SLACK {
                    return Err(invalid(
                        values.len(),
                        format!("weights sum to {total}, not 1"),
                    ));
                }
            }
            WeightMode::Steffensen => {
                if total <= 0.0 {
                    return Err(invalid(
                        values.len(),
                        format!("total A_n = {total} must be > 0"),
                    ));
                }
                check_prefixes(&prefix, total)?;
            }
            WeightMode::SteffensenNormalized => {
                if (total - 1.0).abs() > TOTAL_SLACK {
                    return Err(invalid(
                        values.len(),
                        format!("weights sum to {total}, not 1"),
                    ));
                }
                check_prefixes(&prefix, 1.0)?;
            }
        }
        Ok(WeightTuple {
            values,
            mode,
            prefix,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `A_1, …, A_n`.
    pub fn prefix_sums(&self) -> &[f64] {
        &self.prefix
    }

    /// `A_n`.
    pub fn total(&self) -> f64 {
        self.prefix[self.prefix.len() - 1]
    }

    /// `Ā_k = Σ_{i>=k} a_i` for `k = 1..n` (index `k−1`), summed directly.
    pub fn suffix_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        let mut acc = sum::NeumaierSum::new();
        for i in (0..self.values.len()).rev() {
            acc += self.values[i];
            out[i] = acc.value();
        }
        out
    }

    fn permuted(&self, perm: &[usize]) -> WeightTuple {
        let values: Vec<f64> = perm.iter().map(|&i| self.values[i]).collect();
        WeightTuple {
            prefix: prefix_sums(&values),
            values,
            mode: self.mode,
        }
    }
}

fn check_prefixes(prefix: &[f64], upper: f64) -> Result<()> {
    for (j, &a) in prefix.iter().enumerate() {
        if a < -PREFIX_SLACK {
            return Err(invalid(j + 1, format!("prefix sum A_{} = {a} < 0", j + 1)));
        }
        if a > upper + PREFIX_SLACK {
            return Err(invalid(
                j + 1,
                format!("prefix sum A_{} = {a} exceeds total {upper}", j + 1),
            ));
        }
    }
    Ok(())
}

/// Increasing rearrangement of `x` with the same permutation applied to `p` and `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangedPair {
    pub sorted_x: Vec<f64>,
    /// `permutation[i]` is the original index of the `i`-th smallest entry.
    pub permutation: Vec<usize>,
    pub p_bar: WeightTuple,
    pub q_bar: WeightTuple,
}

impl RearrangedPair {
    /// Applies the inverse permutation to `sorted`, recovering the original order.
    pub fn restore(&self, sorted: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sorted.len()];
        for (pos, &orig) in self.permutation.iter().enumerate() {
            out[orig] = sorted[pos];
        }
        out
    }
}

/// Stable sort permutation of `x` (ties keep their original order).
pub fn sort_permutation(x: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    perm
}

pub fn rearrange(x: &[f64], p: &WeightTuple, q: &WeightTuple) -> Result<RearrangedPair> {
    check_len(x.len(), p.len())?;
    check_len(x.len(), q.len())?;
    let permutation = sort_permutation(x);
    Ok(RearrangedPair {
        sorted_x: permutation.iter().map(|&i| x[i]).collect(),
        p_bar: p.permuted(&permutation),
        q_bar: q.permuted(&permutation),
        permutation,
    })
}

/// Sorts `x` and validates the permuted `p`, `q` in sorted order, where
/// conditions such as the Steffensen prefix bounds are meant to hold.
pub fn rearrange_raw(
    x: &[f64],
    p: &[f64],
    q: &[f64],
    p_mode: WeightMode,
    q_mode: WeightMode,
) -> Result<RearrangedPair> {
    check_len(x.len(), p.len())?;
    check_len(x.len(), q.len())?;
    let permutation = sort_permutation(x);
    let pick = |v: &[f64]| permutation.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    Ok(RearrangedPair {
        sorted_x: pick(x),
        p_bar: WeightTuple::new(pick(p), p_mode)?,
        q_bar: WeightTuple::new(pick(q), q_mode)?,
        permutation,
    })
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// `m = min p_i/q_i`, `M = max p_i/q_i`.
pub fn dragomir_factors(p: &WeightTuple, q: &WeightTuple) -> Result<(f64, f64)> {
    check_len(p.len(), q.len())?;
    let mut m = f64::INFINITY;
    let mut big_m = f64::NEG_INFINITY;
    for (i, (&pi, &qi)) in p.values().iter().zip(q.values()).enumerate() {
        if qi <= 0.0 {
            return Err(Error::ZeroDenominator { index: i + 1 });
        }
        let r = pi / qi;
        m = m.min(r);
        big_m = big_m.max(r);
    }
    Ok((m, big_m))
}

/// `m* = min_i {m_i, m̄_i}`, `M* = max_i {m_i, m̄_i}` with
/// `m_i = P̄_i / Q̄_i` (prefix ratios) and `m̄_i` the matching suffix ratios.
pub fn star_factors(pair: &RearrangedPair) -> Result<(f64, f64)> {
    let n = pair.q_bar.len();
    let qp = pair.q_bar.prefix_sums();
    for (i, &v) in qp.iter().enumerate().take(n - 1) {
        if v <= 0.0 || v >= 1.0 {
            return Err(Error::DegenerateQ {
                index: i + 1,
                value: v,
            });
        }
    }
    // exact prefix and suffix sums of p̄ lie in [0, P_n]
    let total = pair.p_bar.total();
    let pp: Vec<f64> = pair
        .p_bar
        .prefix_sums()
        .iter()
        .map(|v| v.clamp(0.0, total))
        .collect();
    let ps: Vec<f64> = pair
        .p_bar
        .suffix_sums()
        .iter()
        .map(|v| v.clamp(0.0, total))
        .collect();
    let qs = pair.q_bar.suffix_sums();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        for r in [pp[i] / qp[i], ps[i] / qs[i]] {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok((lo, hi))
}

/// All four factors for one `(x, p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundFactors {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub m_star: f64,
    #[serde(rename = "M_star")]
    pub big_m_star: f64,
}

impl BoundFactors {
    pub fn compute(x: &[f64], p: &WeightTuple, q: &WeightTuple) -> Result<Self> {
        let (m, big_m) = dragomir_factors(p, q)?;
        let (m_star, big_m_star) = star_factors(&rearrange(x, p, q)?)?;
        Ok(BoundFactors {
            m,
            big_m,
            m_star,
            big_m_star,
        })
    }
}

/// `x̄ = Σ a_i x_i / A_n`. When the weights force `x̄` into `[min x, max x]`
/// (simplex weights, or Steffensen weights on monotone `x`) the rounded
/// result is clamped there.
pub fn mean(x: &[f64], a: &WeightTuple) -> Result<f64> {
    check_len(a.len(), x.len())?;
    let v = sum::dot(a.values(), x) / a.total();
    let monotone = x.windows(2).all(|w| w[0] <= w[1]) || x.windows(2).all(|w| w[0] >= w[1]);
    if a.mode() == WeightMode::Simplex || monotone {
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Ok(v.clamp(lo, hi));
    }
    Ok(v)
}
