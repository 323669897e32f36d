//! Straight-line re-evaluation of every chain with plain left-to-right sums,
//! written from the formulas without sharing code with the bounds module.

use crate::bounds::{Instance, Relation, TheoremId};
use crate::convexity::{ConvexityClass, FunctionSpec, SubgradientChoice};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chain {
    pub relation: Relation,
    pub lhs: f64,
    pub mid: Option<f64>,
    pub rhs: f64,
}

impl Chain {
    pub fn slack(&self) -> f64 {
        let vals: Vec<f64> = match self.mid {
            Some(m) => vec![self.lhs, m, self.rhs],
            None => vec![self.lhs, self.rhs],
        };
        vals.windows(2)
            .map(|w| match self.relation {
                Relation::Le => w[1] - w[0],
                Relation::Ge => w[0] - w[1],
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn get<'a>(v: &'a Option<Vec<f64>>, name: &str) -> Result<&'a [f64]> {
    v.as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("instance has no `{name}` field")))
}

fn plain_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

fn jensen(f: &FunctionSpec, x: &[f64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        s += p[i] * f.value(x[i]);
    }
    s - f.value(plain_dot(p, x))
}

fn star(x: &[f64], p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64, f64) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).unwrap());
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let ps: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
    let qs: Vec<f64> = idx.iter().map(|&i| q[i]).collect();
    let n = x.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let pre_p: f64 = ps[..=i].iter().sum();
        let pre_q: f64 = qs[..=i].iter().sum();
        let suf_p: f64 = ps[i..].iter().sum();
        let suf_q: f64 = qs[i..].iter().sum();
        for r in [pre_p / pre_q, suf_p / suf_q] {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (xs, ps, qs, lo, hi)
}

fn ratio_bounds(p: &[f64], q: &[f64]) -> (f64, f64) {
    let ratios: Vec<f64> = p.iter().zip(q).map(|(a, b)| a / b).collect();
    (
        ratios.iter().copied().fold(f64::INFINITY, f64::min),
        ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}

#[allow(clippy::too_many_arguments)]
fn refinement(
    f: &FunctionSpec,
    g: &dyn Fn(f64) -> f64,
    x: &[f64],
    p: &[f64],
    q: &[f64],
    factor: f64,
    lower: bool,
) -> Chain {
    let px = plain_dot(p, x);
    let qx = plain_dot(q, x);
    let lhs = jensen(f, x, p) - factor * jensen(f, x, q);
    let mut rhs = 0.0;
    if lower {
        rhs += factor * g((qx - px).abs());
        for i in 0..x.len() {
            rhs += (p[i] - factor * q[i]) * g((x[i] - px).abs());
        }
    } else {
        rhs -= g((px - qx).abs());
        for i in 0..x.len() {
            rhs -= (factor * q[i] - p[i]) * g((x[i] - qx).abs());
        }
    }
    Chain {
        relation: if lower { Relation::Ge } else { Relation::Le },
        lhs,
        mid: None,
        rhs,
    }
}

/// Recomputes the chain of `theorem` on `inst`. Hypotheses are assumed to have
/// been checked already.
pub fn recompute(inst: &Instance, theorem: TheoremId) -> Result<Chain> {
    use TheoremId::*;
    let f = &inst.function;
    let x = &inst.x;
    let n = x.len();
    match theorem {
        Thm3 | Thm5 => {
            let (p, q) = (get(&inst.p, "p")?, get(&inst.q, "q")?);
            let (m, big_m) = if theorem == Thm3 {
                ratio_bounds(p, q)
            } else {
                let (_, _, _, lo, hi) = star(x, p, q);
                (lo, hi)
            };
            let (jp, jq) = (jensen(f, x, p), jensen(f, x, q));
            Ok(Chain {
                relation: Relation::Ge,
                lhs: big_m * jq,
                mid: Some(jp),
                rhs: m * jq,
            })
        }
        Thm4Lower | Thm4Upper => {
            let (p, q) = (get(&inst.p, "p")?, get(&inst.q, "q")?);
            let (m, big_m) = ratio_bounds(p, q);
            let lower = theorem == Thm4Lower;
            let factor = if lower { m } else { big_m };
            Ok(refinement(f, &|d| f.value(d), x, p, q, factor, lower))
        }
        Thm19Lower | Thm19Upper | Thm20Lower | Thm20Upper => {
            let (p, q) = (get(&inst.p, "p")?, get(&inst.q, "q")?);
            let (xs, ps, qs, lo, hi) = star(x, p, q);
            let lower = matches!(theorem, Thm19Lower | Thm20Lower);
            let factor = if lower { lo } else { hi };
            let g: Box<dyn Fn(f64) -> f64> = if matches!(theorem, Thm19Lower | Thm19Upper) {
                Box::new(|d| f.value(d))
            } else {
                Box::new(|d| f.modulus_value(d))
            };
            Ok(refinement(f, g.as_ref(), &xs, &ps, &qs, factor, lower))
        }
        Thm6 | Thm6Convex => {
            let a = get(&inst.a, "a")?;
            let an: f64 = a.iter().sum();
            let xbar = plain_dot(a, x) / an;
            let c = inst.c.unwrap_or(xbar);
            let mut phi_sum = 0.0;
            let mut f_sum = 0.0;
            for i in 0..n {
                phi_sum += a[i] * f.modulus_value((x[i] - c).abs());
                f_sum += a[i] * f.value(x[i]);
            }
            let (phi_mean, f_mean) = (phi_sum / an, f_sum / an);
            let tangent = f.value(c) + f.derivative(c) * (xbar - c);
            Ok(if theorem == Thm6 {
                Chain {
                    relation: Relation::Le,
                    lhs: tangent + phi_mean,
                    mid: None,
                    rhs: f_mean,
                }
            } else {
                Chain {
                    relation: Relation::Ge,
                    lhs: f_mean - tangent,
                    mid: Some(phi_mean),
                    rhs: 0.0,
                }
            })
        }
        _ => template(inst, theorem),
    }
}

fn template(inst: &Instance, theorem: TheoremId) -> Result<Chain> {
    use crate::bounds::Template;
    let (shape, scaled) = theorem.template().expect("template theorem");
    let class = theorem.class().expect("template theorems name a class");
    let f = &inst.function;
    let x = &inst.x;
    let n = x.len();
    let a = get(&inst.a, "a")?;
    let lambda: Vec<f64> = if scaled {
        get(&inst.lambda, "lambda")?.to_vec()
    } else {
        vec![0.0; n]
    };
    let scale = inst.error_scale.unwrap_or(1.0);
    let sigma = if class == ConvexityClass::PhiConvex {
        -1.0
    } else {
        1.0
    };
    let g = |d: f64| match class {
        ConvexityClass::Superquadratic => f.value(d),
        ConvexityClass::PhiConvex => scale * f.modulus_value(d),
        _ => f.modulus_value(d),
    };
    let phi = |u: f64| match &inst.subgradient {
        SubgradientChoice::Derivative => f.derivative(u),
        SubgradientChoice::Custom(t) => t.eval(u).unwrap_or(f64::NAN),
    };
    let an: f64 = a.iter().sum();
    let xbar = plain_dot(a, x) / an;
    match shape {
        Template::Sandwich => {
            let (mut sa, mut sb, mut upper) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let l = lambda[i];
                let xh = (1.0 - l) * xbar + l * x[i];
                let big_a =
                    f.value(x[i]) - f.value(xh) - sigma * g((1.0 - l) * (xbar - x[i]).abs());
                let big_b = (1.0 - l) * phi(xh) * (x[i] - xbar);
                sa += a[i] * big_a.abs();
                sb += a[i] * big_b.abs();
                upper += a[i] * (big_a - big_b);
            }
            Ok(Chain {
                relation: Relation::Le,
                lhs: 0.0,
                mid: Some((sa / an - sb / an).abs()),
                rhs: upper / an,
            })
        }
        Template::TangentUpper => {
            let sign = if theorem == TheoremId::Thm13Printed {
                -sigma
            } else {
                sigma
            };
            let (mut lhs, mut rhs) = (0.0, 0.0);
            for i in 0..n {
                let l = lambda[i];
                let xh = (1.0 - l) * xbar + l * x[i];
                lhs += a[i] * (f.value(x[i]) - f.value(xh));
                rhs += a[i]
                    * ((1.0 - l) * phi(x[i]) * (x[i] - xbar)
                        - sign * g((1.0 - l) * (xbar - x[i]).abs()));
            }
            Ok(Chain {
                relation: Relation::Le,
                lhs: lhs / an,
                mid: None,
                rhs: rhs / an,
            })
        }
    }
}
