use super::{check, sampling, CheckOutcome, Counterexample};
use crate::bounds::{Instance, TheoremId};
use crate::tolerance::Tolerance;
use crate::weights::sort_permutation;

/// How a theorem's weights must be rebuilt when a point is dropped.
#[derive(Clone, Copy, PartialEq)]
enum Family {
    Simplex,
    Path { normalized: bool },
}

fn family(theorem: TheoremId) -> Family {
    use TheoremId::*;
    match theorem {
        Thm6 | Thm6Convex => Family::Path { normalized: false },
        Thm5 | Thm19Lower | Thm19Upper | Thm20Lower | Thm20Upper => {
            Family::Path { normalized: true }
        }
        _ => Family::Simplex,
    }
}

fn without(v: &[f64], i: usize) -> Vec<f64> {
    v.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &x)| x)
        .collect()
}

fn renormalized(v: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = v.iter().sum();
    (total > 0.0).then(|| v.iter().map(|w| w / total).collect())
}

fn prefix_path(w: &[f64], normalized: bool) -> Vec<f64> {
    let mut acc = 0.0;
    let mut path: Vec<f64> = w
        .iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect();
    if normalized {
        *path.last_mut().unwrap() = 1.0;
    }
    path
}

/// Drops point `i`; its weight merges into the next point along the prefix
/// path (the last point merges into its predecessor).
fn drop_from_path(w: &[f64], i: usize, normalized: bool) -> Vec<f64> {
    let path = prefix_path(w, normalized);
    let cut = if i + 1 < path.len() {
        i
    } else {
        path.len() - 2
    };
    sampling::path_weights(&without(&path, cut))
}

fn drop_weights(v: &[f64], i: usize, fam: Family) -> Option<Vec<f64>> {
    match fam {
        Family::Simplex => renormalized(without(v, i)),
        Family::Path { normalized } => Some(drop_from_path(v, i, normalized)),
    }
}

fn sorted_copy(inst: &Instance) -> Instance {
    let perm = sort_permutation(&inst.x);
    let apply = |v: &Option<Vec<f64>>| v.as_ref().map(|v| perm.iter().map(|&i| v[i]).collect());
    let mut out = inst.clone();
    out.x = perm.iter().map(|&i| inst.x[i]).collect();
    out.a = apply(&inst.a);
    out.p = apply(&inst.p);
    out.q = apply(&inst.q);
    out.lambda = apply(&inst.lambda);
    out
}

fn drop_point(inst: &Instance, theorem: TheoremId, i: usize) -> Option<Instance> {
    let fam = family(theorem);
    let base = if theorem == TheoremId::Thm5 {
        sorted_copy(inst)
    } else {
        inst.clone()
    };
    let mut out = base.clone();
    out.x = without(&base.x, i);
    out.lambda = base.lambda.as_ref().map(|l| without(l, i));
    for (slot, src) in [
        (&mut out.a, &base.a),
        (&mut out.p, &base.p),
        (&mut out.q, &base.q),
    ] {
        if let Some(v) = src {
            *slot = Some(drop_weights(v, i, fam)?);
        }
    }
    Some(out)
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

fn rounded_weights(v: &[f64], fam: Family, interior: bool) -> Option<Vec<f64>> {
    match fam {
        Family::Simplex => {
            let head: Vec<f64> = v[..v.len() - 1].iter().map(|&w| round_to(w, 2)).collect();
            let last = round_to(1.0 - head.iter().sum::<f64>(), 2);
            let mut out = head;
            out.push(last);
            out.iter().all(|&w| w > 0.0).then_some(out)
        }
        Family::Path { normalized } => {
            let mut path = prefix_path(v, normalized);
            let n = path.len();
            let total = path[n - 1];
            for s in &mut path[..n - 1] {
                *s = round_to(*s, 2).clamp(0.0, total);
                if interior && (*s <= 0.0 || *s >= 1.0) {
                    return None;
                }
            }
            Some(sampling::path_weights(&path))
        }
    }
}

/// Candidate simplifications that round one group of values.
fn roundings(inst: &Instance, theorem: TheoremId) -> Vec<Instance> {
    let fam = family(theorem);
    let dom = inst.function.domain();
    let mut out = Vec::new();

    let mut c = inst.clone();
    c.x = inst
        .x
        .iter()
        .map(|&v| round_to(v, 2).clamp(dom.lo, dom.hi))
        .collect();
    out.push(c);

    if let Some(l) = &inst.lambda {
        let mut c = inst.clone();
        c.lambda = Some(l.iter().map(|&v| round_to(v, 2)).collect());
        out.push(c);
    }
    if let Some(v) = inst.c {
        let mut c = inst.clone();
        c.c = Some(round_to(v, 2).clamp(dom.lo, dom.hi));
        out.push(c);
    }
    if let Some(s) = inst.error_scale {
        let mut c = inst.clone();
        c.error_scale = Some(round_to(s, 1));
        out.push(c);
    }
    for which in 0..3 {
        let mut c = inst.clone();
        let (slot, interior) = match which {
            0 => (&mut c.a, false),
            1 => (&mut c.p, false),
            _ => (&mut c.q, fam != Family::Simplex),
        };
        if let Some(v) = slot.as_ref() {
            if let Some(r) = rounded_weights(v, fam, interior) {
                *slot = Some(r);
                out.push(c);
            }
        }
    }
    out
}

fn confirmed(inst: &Instance, theorem: TheoremId, tol: Tolerance) -> Option<Counterexample> {
    match check(inst, theorem, tol) {
        Ok(CheckOutcome::Violation(c)) => Some(*c),
        _ => None,
    }
}

const MAX_STEPS: usize = 200;

/// Greedily drops points (down to two) and rounds values while the violation
/// stays confirmed. Every accepted step is re-checked from scratch.
pub fn shrink(cex: Counterexample, tol: Tolerance) -> Counterexample {
    let theorem = cex.theorem;
    let mut best = cex;
    let mut steps = best.shrink_steps;
    'outer: while steps < MAX_STEPS {
        let n = best.instance.x.len();
        if n > 2 {
            for i in 0..n {
                if let Some(cand) = drop_point(&best.instance, theorem, i) {
                    if let Some(c) = confirmed(&cand, theorem, tol) {
                        best = c;
                        steps += 1;
                        continue 'outer;
                    }
                }
            }
        }
        for cand in roundings(&best.instance, theorem) {
            if cand == best.instance {
                continue;
            }
            if let Some(c) = confirmed(&cand, theorem, tol) {
                best = c;
                steps += 1;
                continue 'outer;
            }
        }
        break;
    }
    best.shrink_steps = steps;
    best
}

#[cfg(test)]
pub(super) fn drop_path_for_tests(w: &[f64], i: usize) -> Vec<f64> {
    drop_from_path(w, i, false)
}
