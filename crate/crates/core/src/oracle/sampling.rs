//! Random draws used by the instance generator.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::convexity::FunctionSpec;

/// Dirichlet(1) draw: strictly positive, sums to 1 up to rounding.
pub fn simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-3)
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

/// Differences of a prefix path `0 = S_0, S_1, …, S_{n−1} ∈ [lo, hi], S_n = total`.
pub fn path_weights(path: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    path.iter()
        .map(|&s| {
            let w = s - prev;
            prev = s;
            w
        })
        .collect()
}

/// Prefix path for a Jensen-Steffensen tuple with total `total`; interior
/// prefixes are drawn from `[lo·total, hi·total]`.
pub fn steffensen_path<R: Rng>(rng: &mut R, n: usize, total: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut path: Vec<f64> = (0..n.saturating_sub(1))
        .map(|_| {
            let u = match rng.gen_range(0..10) {
                0 => lo,
                1 => hi,
                _ => rng.gen_range(lo..=hi),
            };
            u * total
        })
        .collect();
    path.push(total);
    path
}

pub fn steffensen<R: Rng>(rng: &mut R, n: usize, total: f64) -> Vec<f64> {
    path_weights(&steffensen_path(rng, n, total, 0.0, 1.0))
}

/// Normalized Jensen-Steffensen weights whose interior prefixes stay in `[0.01, 0.99]`.
pub fn interior_steffensen<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    path_weights(&steffensen_path(rng, n, 1.0, 0.01, 0.99))
}

/// A catalog function. `nonnegative` forces a domain inside `[0, ∞)`;
/// `strong` restricts to specs whose modulus is `c·d²`.
pub fn catalog_spec<R: Rng>(rng: &mut R, nonnegative: bool, strong: bool) -> FunctionSpec {
    let b = rng.gen_range(1.0..=10.0);
    let (lo, hi) = if nonnegative || rng.gen_bool(0.5) {
        (0.0, b)
    } else {
        (-0.5 * b, 0.5 * b)
    };
    let c = rng.gen_range(0.1..=2.0);
    if strong {
        return match rng.gen_range(0..4) {
            0 if lo >= 0.0 => FunctionSpec::power(2, lo, hi).unwrap(),
            1 => FunctionSpec::combo(vec![
                (
                    rng.gen_range(0.1..=2.0),
                    FunctionSpec::strong_quadratic(c, lo, hi).unwrap(),
                ),
                (
                    rng.gen_range(0.1..=2.0),
                    FunctionSpec::strong_quadratic(1.0, lo, hi).unwrap(),
                ),
            ])
            .unwrap(),
            _ => FunctionSpec::strong_quadratic(c, lo, hi).unwrap(),
        };
    }
    let roll = rng.gen_range(0..20);
    if roll < 12 {
        FunctionSpec::power(rng.gen_range(2..=5), 0.0, b).unwrap()
    } else if roll < 17 {
        FunctionSpec::strong_quadratic(c, lo, hi).unwrap()
    } else {
        let atoms = [
            FunctionSpec::power(rng.gen_range(2..=5), 0.0, b).unwrap(),
            FunctionSpec::strong_quadratic(c, 0.0, b).unwrap(),
            FunctionSpec::power(rng.gen_range(2..=5), 0.0, b).unwrap(),
        ];
        let k = rng.gen_range(0..3);
        FunctionSpec::combo(vec![
            (rng.gen_range(0.1..=2.0), atoms[k].clone()),
            (rng.gen_range(0.1..=2.0), atoms[(k + 1) % 3].clone()),
        ])
        .unwrap()
    }
}

/// Points in `[lo, hi]`; sometimes snapped to a coarse grid so ties occur.
pub fn points<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let snap = rng.gen_bool(0.15);
    (0..n)
        .map(|_| {
            let v = rng.gen_range(lo..=hi);
            if snap {
                let step = (hi - lo) / 4.0;
                (lo + ((v - lo) / step).round() * step).clamp(lo, hi)
            } else {
                v
            }
        })
        .collect()
}

/// λ-tuple in `[0, 1]^n` with occasional exact endpoints.
pub fn lambda<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.gen_range(0..10) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen::<f64>(),
        })
        .collect()
}

pub fn permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{validate, WeightMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..12 {
            validate(&simplex(&mut rng, n), WeightMode::Simplex).unwrap();
            validate(&steffensen(&mut rng, n, 1.7), WeightMode::Steffensen).unwrap();
            let q = interior_steffensen(&mut rng, n);
            let t = validate(&q, WeightMode::SteffensenNormalized).unwrap();
            assert!(t.prefix_sums()[..n - 1].iter().all(|&v| v > 0.0 && v < 1.0));
            let spec = catalog_spec(&mut rng, true, false);
            assert!(spec.domain().lo >= 0.0);
            let strong = catalog_spec(&mut rng, false, true);
            assert!(strong.strong_constant().is_some());
        }
    }
}
