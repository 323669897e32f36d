//! Inequality chains evaluated as explicit left, middle and right values.

mod instance;
mod report;

pub use instance::Instance;
pub use report::{fmt_f64, BoundReport, Relation, Template, Term, TheoremId};

use instance::weights_as;
use report::ReportBuilder;

use serde::{Deserialize, Serialize};

use crate::convexity::{ConvexityClass, FunctionSpec, TangentForm};
use crate::error::{Error, Result};
use crate::sum::{self, NeumaierSum};
use crate::tolerance::Tolerance;
use crate::weights::{
    check_len, dragomir_factors, mean, rearrange_raw, star_factors, RearrangedPair, WeightMode,
    WeightTuple, PREFIX_SLACK,
};

/// Which side of a two-sided functional bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

fn check_points(spec: &FunctionSpec, x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("x is empty".into()));
    }
    let dom = spec.domain();
    x.iter().try_for_each(|&v| dom.check(v))
}

fn require_sorted(x: &[f64]) -> Result<()> {
    match x.windows(2).position(|w| w[1] < w[0]) {
        Some(i) => Err(Error::UnsortedInput { index: i + 2 }),
        None => Ok(()),
    }
}

/// `J_n(f, x, p) = Σ p_i f(x_i) − f(Σ p_i x_i)`.
pub fn jensen_functional(spec: &FunctionSpec, x: &[f64], p: &WeightTuple) -> Result<f64> {
    check_len(p.len(), x.len())?;
    check_points(spec, x)?;
    Ok(jensen_unchecked(spec, x, p.values()))
}

fn jensen_unchecked(spec: &FunctionSpec, x: &[f64], p: &[f64]) -> f64 {
    let centre = sum::dot(p, x);
    let mut acc: NeumaierSum = p.iter().zip(x).map(|(&w, &v)| w * spec.value(v)).collect();
    acc += -spec.value(centre);
    acc.value()
}

/// `D(y) = f(y) − f(z) − f′(z)(y−z) − Φ(|y−z|)`.
pub fn d_function(spec: &FunctionSpec, z: f64, y: f64) -> Result<f64> {
    let dom = spec.domain();
    dom.check(z)?;
    dom.check(y)?;
    Ok(spec.tangent_excess(z, y - z))
}

struct SteffensenParts {
    an: f64,
    c: f64,
    fc: f64,
    tangent: f64,
    phi_sum: f64,
    f_mean: f64,
}

fn steffensen_parts(
    inst: &Instance,
    b: &mut ReportBuilder,
) -> Result<(SteffensenParts, WeightTuple)> {
    let spec = &inst.function;
    let a = inst.a_weights(WeightMode::Steffensen)?;
    check_len(a.len(), inst.x.len())?;
    check_points(spec, &inst.x)?;
    require_sorted(&inst.x)?;
    spec.require_class(ConvexityClass::UniformlyConvex)?;
    let x = &inst.x;
    let an = a.total();
    let xbar = mean(x, &a)?;
    let c = inst.c.unwrap_or(xbar);
    spec.domain().check(c)?;

    let phi: Vec<f64> = x
        .iter()
        .map(|&v| spec.modulus_value((v - c).abs()))
        .collect();
    let fx: Vec<f64> = x.iter().map(|&v| spec.value(v)).collect();
    let phi_sum = sum::dot(a.values(), &phi) / an;
    let f_mean = sum::dot(a.values(), &fx) / an;
    let fc = spec.value(c);
    let tangent = spec.derivative(c) * (xbar - c);

    b.term("A_n", an);
    b.term("xbar", xbar);
    b.term("c", c);
    b.term("f(c)", fc);
    b.term("f'(c)*(xbar-c)", tangent);
    b.indexed("f(x)", &fx);
    b.indexed("Phi(|x-c|)", &phi);
    b.term("Phi_sum", phi_sum);
    b.term("f_mean", f_mean);
    let parts = SteffensenParts {
        an,
        c,
        fc,
        tangent,
        phi_sum,
        f_mean,
    };
    Ok((parts, a))
}

/// `f(c) + f′(c)(x̄−c) + (1/A_n)Σ a_i Φ(|x_i−c|) <= (1/A_n)Σ a_i f(x_i)` for
/// Jensen-Steffensen `a` and sorted `x`; `c` defaults to `x̄`.
pub fn steffensen_refined_bound(inst: &Instance, tol: Tolerance) -> Result<BoundReport> {
    let mut b = ReportBuilder::new(TheoremId::Thm6, Relation::Le);
    let (s, _) = steffensen_parts(inst, &mut b)?;
    let lhs = sum::sum([s.fc, s.tangent, s.phi_sum]);
    Ok(b.finish(lhs, None, s.f_mean, tol))
}

/// `gap >= (1/A_n)Σ a_i Φ(|x_i−c|) >= 0` where
/// `gap = (1/A_n)Σ a_i f(x_i) − f(c) − f′(c)(x̄−c)`.
///
/// The report also carries the summation-by-parts split of the Φ-sum
/// (`abel[..]` terms) and notes when `c` lies outside `[x_1, x_n]`.
pub fn steffensen_convex_phi_bound(inst: &Instance, tol: Tolerance) -> Result<BoundReport> {
    let mut b = ReportBuilder::new(TheoremId::Thm6Convex, Relation::Ge);
    let (s, a) = steffensen_parts(inst, &mut b)?;
    let x = &inst.x;
    let gap = sum::sum([s.f_mean, -s.fc, -s.tangent]);
    let (k, pieces) = abel_decomposition(&inst.function, x, &a, s.c);
    b.term("abel_k", k as f64);
    for (name, v) in &pieces {
        b.term(format!("abel[{name}]"), *v / s.an);
    }
    if s.c < x[0] || s.c > x[x.len() - 1] {
        b.note("c lies outside [x_1, x_n]; Phi_sum >= 0 is established only for x_1 <= c <= x_n");
    }
    Ok(b.finish(gap, Some(s.phi_sum), 0.0, tol))
}

/// Splits `Σ a_i Φ(|x_i − c|)` by summation by parts around `c`, with
/// `k = #{i : x_i <= c}`:
///
/// `Σ_{i<k} A_i (Φ(c−x_i) − Φ(c−x_{i+1})) + A_k Φ(c−x_k)
///  + Ā_{k+1} Φ(x_{k+1}−c) + Σ_{i>k+1} Ā_i (Φ(x_i−c) − Φ(x_{i−1}−c))`.
///
/// Returns `k` and the named pieces; their sum equals the direct sum.
pub fn abel_decomposition(
    spec: &FunctionSpec,
    x: &[f64],
    a: &WeightTuple,
    c: f64,
) -> (usize, Vec<(String, f64)>) {
    let n = x.len();
    let k = x.iter().take_while(|&&v| v <= c).count();
    let pre = a.prefix_sums();
    let suf = a.suffix_sums();
    let phi = |d: f64| spec.modulus_value(d);
    let mut out = Vec::with_capacity(n);
    // 1-based i ↦ index i-1
    for i in 1..k {
        let v = pre[i - 1] * (phi(c - x[i - 1]) - phi(c - x[i]));
        out.push((format!("A_{i}"), v));
    }
    if k >= 1 {
        out.push((format!("A_{k}"), pre[k - 1] * phi(c - x[k - 1])));
    }
    if k < n {
        out.push((format!("Abar_{}", k + 1), suf[k] * phi(x[k] - c)));
    }
    for i in (k + 2)..=n {
        let v = suf[i - 1] * (phi(x[i - 1] - c) - phi(x[i - 2] - c));
        out.push((format!("Abar_{i}"), v));
    }
    (k, out)
}

fn template_lambda(inst: &Instance, scaled: bool) -> Result<Vec<f64>> {
    if scaled {
        Ok(inst.lambda_values()?.to_vec())
    } else {
        Ok(vec![0.0; inst.x.len()])
    }
}

struct TemplateInputs<'a> {
    form: TangentForm<'a>,
    a: WeightTuple,
    xbar: f64,
    xhat: Vec<f64>,
    lambda: Vec<f64>,
}

fn template_inputs<'a>(
    inst: &'a Instance,
    theorem: TheoremId,
    lambda: Vec<f64>,
) -> Result<TemplateInputs<'a>> {
    let class = inst
        .class_for(theorem)?
        .expect("template theorems name a class");
    let form = TangentForm::new(&inst.function, class, &inst.subgradient, inst.error_scale())?;
    let a = inst.a_weights(WeightMode::Simplex)?;
    check_len(a.len(), inst.x.len())?;
    check_points(&inst.function, &inst.x)?;
    let xbar = mean(&inst.x, &a)?;
    let xhat = inst
        .x
        .iter()
        .zip(&lambda)
        .map(|(&v, &l)| (1.0 - l) * xbar + l * v)
        .collect();
    Ok(TemplateInputs {
        form,
        a,
        xbar,
        xhat,
        lambda,
    })
}

fn record_template(b: &mut ReportBuilder, t: &TemplateInputs, fx: &[f64], fh: &[f64], g: &[f64]) {
    b.term("A_n", t.a.total());
    b.term("xbar", t.xbar);
    b.term("sigma", t.form.sigma());
    b.indexed("xhat", &t.xhat);
    b.indexed("f(x)", fx);
    b.indexed("f(xhat)", fh);
    b.indexed("G", g);
}

#[allow(clippy::needless_range_loop)]
fn sandwich_report(
    inst: &Instance,
    theorem: TheoremId,
    lambda: Vec<f64>,
    tol: Tolerance,
) -> Result<BoundReport> {
    let t = template_inputs(inst, theorem, lambda)?;
    let spec = &inst.function;
    let sigma = t.form.sigma();
    let a = t.a.values();
    let an = t.a.total();
    let n = inst.x.len();
    let mut fx = Vec::with_capacity(n);
    let mut fh = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut tangent = Vec::with_capacity(n);
    let mut abs_a = NeumaierSum::new();
    let mut abs_b = NeumaierSum::new();
    let mut upper = NeumaierSum::new();
    for i in 0..n {
        let (xi, xh, l) = (inst.x[i], t.xhat[i], t.lambda[i]);
        let fi = spec.value(xi);
        let fhi = spec.value(xh);
        let gi = t.form.g((1.0 - l) * (t.xbar - xi).abs());
        let bi = (1.0 - l) * t.form.phi(xh)? * (xi - t.xbar);
        let ai = sum::sum([fi, -fhi, -sigma * gi]);
        abs_a += a[i] * ai.abs();
        abs_b += a[i] * bi.abs();
        for v in [fi, -fhi, -bi, -sigma * gi] {
            upper += a[i] * v;
        }
        fx.push(fi);
        fh.push(fhi);
        g.push(gi);
        tangent.push(bi);
    }
    let mut b = ReportBuilder::new(theorem, Relation::Le);
    record_template(&mut b, &t, &fx, &fh, &g);
    b.indexed("tangent", &tangent);
    let sa = b.term("sum_a|A|", abs_a.value() / an);
    let sb = b.term("sum_a|B|", abs_b.value() / an);
    let mid = (sa - sb).abs();
    Ok(b.finish(0.0, Some(mid), upper.value() / an, tol))
}

/// With `flip`, the G-sum enters with the opposite sign to the one implied by
/// the class's tangent inequality.
#[allow(clippy::needless_range_loop)]
fn tangent_report(
    inst: &Instance,
    theorem: TheoremId,
    lambda: Vec<f64>,
    flip: bool,
    tol: Tolerance,
) -> Result<BoundReport> {
    let t = template_inputs(inst, theorem, lambda)?;
    let spec = &inst.function;
    let sigma = if flip {
        -t.form.sigma()
    } else {
        t.form.sigma()
    };
    let a = t.a.values();
    let an = t.a.total();
    let n = inst.x.len();
    let (mut fx, mut fh, mut g, mut tangent) = (vec![], vec![], vec![], vec![]);
    let mut lhs = NeumaierSum::new();
    let mut rhs = NeumaierSum::new();
    for i in 0..n {
        let (xi, xh, l) = (inst.x[i], t.xhat[i], t.lambda[i]);
        let fi = spec.value(xi);
        let fhi = spec.value(xh);
        let gi = t.form.g((1.0 - l) * (t.xbar - xi).abs());
        let ti = (1.0 - l) * t.form.phi(xi)? * (xi - t.xbar);
        lhs += a[i] * fi;
        lhs += -(a[i] * fhi);
        rhs += a[i] * ti;
        rhs += -sigma * (a[i] * gi);
        fx.push(fi);
        fh.push(fhi);
        g.push(gi);
        tangent.push(ti);
    }
    let mut b = ReportBuilder::new(theorem, Relation::Le);
    record_template(&mut b, &t, &fx, &fh, &g);
    b.indexed("tangent", &tangent);
    if flip {
        b.note("G-sum sign flipped relative to the class's tangent inequality");
    }
    Ok(b.finish(lhs.value() / an, None, rhs.value() / an, tol))
}

fn template_id(class: Option<ConvexityClass>, ids: [Option<TheoremId>; 4]) -> Result<TheoremId> {
    let class =
        class.ok_or_else(|| Error::InvalidArgument("instance has no `class` field".into()))?;
    let idx = match class {
        ConvexityClass::UniformlyConvex => 0,
        ConvexityClass::PhiConvex => 1,
        ConvexityClass::Superquadratic => 2,
        ConvexityClass::StronglyConvex => 3,
    };
    ids[idx].ok_or_else(|| Error::UnsupportedClass {
        class,
        reason: "no unscaled chain is stated for this class".into(),
    })
}

/// `0 <= |Σa|f(x_i) − f(x̄) − σG| − Σa|φ(x̄)||x̄−x_i|| / A_n <= upper` for the
/// instance's declared class.
pub fn sandwich_chain(inst: &Instance, tol: Tolerance) -> Result<BoundReport> {
    use TheoremId::*;
    let id = template_id(inst.class, [Some(Thm7), Some(Thm11), Some(Thm15), None])?;
    sandwich_report(inst, id, template_lambda(inst, false)?, tol)
}

/// λ-scaled chain with `x̂_i = (1−λ_i)x̄ + λ_i x_i`.
pub fn lambda_sandwich(inst: &Instance, tol: Tolerance) -> Result<BoundReport> {
    use TheoremId::*;
    let id = template_id(
        inst.class,
        [Some(Thm8), Some(Thm12), Some(Thm16), Some(Thm1Sandwich)],
    )?;
    sandwich_report(inst, id, template_lambda(inst, true)?, tol)
}

/// `(1/A_n)Σ a_i f(x_i) − f(x̄) <= (1/A_n)Σ a_i φ(x_i)(x_i−x̄) − σ(1/A_n)Σ a_i G(|x̄−x_i|)`.
pub fn tangent_upper_bound(inst: &Instance, tol: Tolerance) -> Result<BoundReport> {
    use TheoremId::*;
    let id = template_id(inst.class, [Some(Thm9), Some(Thm13), Some(Thm17), None])?;
    tangent_report(inst, id, template_lambda(inst, false)?, false, tol)
}

pub fn lambda_tangent_upper(inst: &Instance, tol: Tolerance) -> Result<BoundReport> {
    use TheoremId::*;
    let id = template_id(
        inst.class,
        [Some(Thm10), Some(Thm14), Some(Thm18), Some(Thm1Upper)],
    )?;
    tangent_report(inst, id, template_lambda(inst, true)?, false, tol)
}

fn simplex_pair(p: &[f64], q: &[f64]) -> Result<(WeightTuple, WeightTuple)> {
    Ok((
        weights_as("p", p, WeightMode::Simplex)?,
        weights_as("q", q, WeightMode::Simplex)?,
    ))
}

#[allow(clippy::too_many_arguments)]
fn factor_chain(
    theorem: TheoremId,
    spec: &FunctionSpec,
    x: &[f64],
    p: &[f64],
    q: &[f64],
    (m, big_m): (f64, f64),
    names: [&str; 2],
    tol: Tolerance,
) -> BoundReport {
    let jp = jensen_unchecked(spec, x, p);
    let jq = jensen_unchecked(spec, x, q);
    let mut b = ReportBuilder::new(theorem, Relation::Ge);
    b.term(names[0], m);
    b.term(names[1], big_m);
    b.term("J_p", jp);
    b.term("J_q", jq);
    b.indexed(
        "f(x)",
        &x.iter().map(|&v| spec.value(v)).collect::<Vec<_>>(),
    );
    b.finish(big_m * jq, Some(jp), m * jq, tol)
}

/// `M·J(q) >= J(p) >= m·J(q)` with the pointwise ratio factors.
pub fn dragomir_sandwich(
    spec: &FunctionSpec,
    x: &[f64],
    p: &[f64],
    q: &[f64],
    tol: Tolerance,
) -> Result<BoundReport> {
    let (pt, qt) = simplex_pair(p, q)?;
    check_len(x.len(), p.len())?;
    check_points(spec, x)?;
    let factors = dragomir_factors(&pt, &qt)?;
    Ok(factor_chain(
        TheoremId::Thm3,
        spec,
        x,
        p,
        q,
        factors,
        ["m", "M"],
        tol,
    ))
}

fn star_pair(x: &[f64], p: &[f64], q: &[f64]) -> Result<RearrangedPair> {
    let pair = rearrange_raw(
        x,
        p,
        q,
        WeightMode::SteffensenNormalized,
        WeightMode::SteffensenNormalized,
    )
    .map_err(|e| match e {
        Error::InvalidWeights { .. } => Error::HypothesisViolated(format!(
            "after increasing rearrangement, p and q must be normalized \
             Jensen-Steffensen coefficients (0 <= P_j <= 1, P_n = 1): {e}"
        )),
        other => other,
    })?;
    Ok(pair)
}

/// `M*·J(q) >= J(p) >= m*·J(q)` with the prefix/suffix ratio factors of the
/// increasing rearrangement.
pub fn star_sandwich(
    spec: &FunctionSpec,
    x: &[f64],
    p: &[f64],
    q: &[f64],
    tol: Tolerance,
) -> Result<BoundReport> {
    check_points(spec, x)?;
    let pair = star_pair(x, p, q)?;
    let factors = star_factors(&pair)?;
    Ok(factor_chain(
        TheoremId::Thm5,
        spec,
        &pair.sorted_x,
        pair.p_bar.values(),
        pair.q_bar.values(),
        factors,
        ["m_star", "M_star"],
        tol,
    ))
}

#[derive(Clone, Copy)]
enum Refiner {
    SelfValue,
    Modulus,
}

impl Refiner {
    fn apply(self, spec: &FunctionSpec, d: f64) -> f64 {
        match self {
            Refiner::SelfValue => spec.value(d),
            Refiner::Modulus => spec.modulus_value(d),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn refinement_report(
    theorem: TheoremId,
    spec: &FunctionSpec,
    x: &[f64],
    p: &[f64],
    q: &[f64],
    factor: f64,
    side: Side,
    refiner: Refiner,
    factor_name: &str,
    tol: Tolerance,
) -> BoundReport {
    let g = |d: f64| refiner.apply(spec, d);
    let jp = jensen_unchecked(spec, x, p);
    let jq = jensen_unchecked(spec, x, q);
    let px = sum::dot(p, x);
    let qx = sum::dot(q, x);
    let mut b = ReportBuilder::new(
        theorem,
        match side {
            Side::Lower => Relation::Ge,
            Side::Upper => Relation::Le,
        },
    );
    b.term(factor_name, factor);
    b.term("J_p", jp);
    b.term("J_q", jq);
    b.term("sum_p_x", px);
    b.term("sum_q_x", qx);
    b.indexed(
        "f(x)",
        &x.iter().map(|&v| spec.value(v)).collect::<Vec<_>>(),
    );
    let lhs = sum::sum([jp, -factor * jq]);
    let (pieces, head) = match side {
        Side::Lower => {
            let pieces: Vec<f64> = (0..x.len())
                .map(|i| (p[i] - factor * q[i]) * g((x[i] - px).abs()))
                .collect();
            (pieces, factor * g((qx - px).abs()))
        }
        Side::Upper => {
            let pieces: Vec<f64> = (0..x.len())
                .map(|i| -(factor * q[i] - p[i]) * g((x[i] - qx).abs()))
                .collect();
            (pieces, -g((px - qx).abs()))
        }
    };
    b.indexed("refinement", &pieces);
    b.term("refinement_head", head);
    let mut acc: NeumaierSum = pieces.iter().copied().collect();
    acc += head;
    let rhs = b.term("refinement_total", acc.value());
    b.term("unrefined_bound", factor * jq);
    b.finish(lhs, None, rhs, tol)
}

/// `J(p) − m·J(q) >= m·f(|Σ(q−p)x|) + Σ(p_i − m q_i) f(|x_i − Σpx|)` (lower)
/// and `J(p) − M·J(q) <= −Σ(M q_i − p_i) f(|x_i − Σqx|) − f(|Σ(p−q)x|)`
/// (upper), for superquadratic `f` and simplex `p`, `q` with `q > 0`.
pub fn dragomir_refinement(
    spec: &FunctionSpec,
    x: &[f64],
    p: &[f64],
    q: &[f64],
    side: Side,
    tol: Tolerance,
) -> Result<BoundReport> {
    spec.require_class(ConvexityClass::Superquadratic)?;
    let (pt, qt) = simplex_pair(p, q)?;
    check_len(x.len(), p.len())?;
    check_points(spec, x)?;
    let (m, big_m) = dragomir_factors(&pt, &qt)?;
    let (id, factor, name) = match side {
        Side::Lower => (TheoremId::Thm4Lower, m, "m"),
        Side::Upper => (TheoremId::Thm4Upper, big_m, "M"),
    };
    Ok(refinement_report(
        id,
        spec,
        x,
        p,
        q,
        factor,
        side,
        Refiner::SelfValue,
        name,
        tol,
    ))
}

/// Refinement of the star-factor bounds for sorted `x`: with `G = f` for a
/// superquadratic `f` (whose derivative is superadditive) or `G = Φ` for a
/// uniformly convex `f`,
///
/// lower: `J(p) − m*·J(q) >= m*·G(|Σ(q−p)x|) + Σ(p_i − m* q_i) G(|x_i − Σpx|)`,
/// upper: `J(p) − M*·J(q) <= −Σ(M* q_i − p_i) G(|x_i − Σqx|) − G(|Σ(p−q)x|)`.
pub fn functional_refinement(
    spec: &FunctionSpec,
    x: &[f64],
    p: &[f64],
    q: &[f64],
    class: ConvexityClass,
    side: Side,
    tol: Tolerance,
) -> Result<BoundReport> {
    let refiner = match class {
        ConvexityClass::Superquadratic => Refiner::SelfValue,
        ConvexityClass::UniformlyConvex => Refiner::Modulus,
        other => {
            return Err(Error::UnsupportedClass {
                class: other,
                reason: "the functional refinement is stated for superquadratic and uniformly convex functions".into(),
            })
        }
    };
    spec.require_class(class)?;
    check_points(spec, x)?;
    require_sorted(x)?;
    let pair = star_pair(x, p, q)?;
    let (m_star, big_m_star) = star_factors(&pair)?;
    let id = match (class, side) {
        (ConvexityClass::Superquadratic, Side::Lower) => TheoremId::Thm19Lower,
        (ConvexityClass::Superquadratic, Side::Upper) => TheoremId::Thm19Upper,
        (_, Side::Lower) => TheoremId::Thm20Lower,
        (_, Side::Upper) => TheoremId::Thm20Upper,
    };
    let (factor, name) = match side {
        Side::Lower => (m_star, "m_star"),
        Side::Upper => (big_m_star, "M_star"),
    };
    Ok(refinement_report(
        id, spec, x, p, q, factor, side, refiner, name, tol,
    ))
}

/// Sorted `(n+1)`-tuple and weights built from `(x, p, q)` and a ratio factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    pub points: Vec<f64>,
    pub weights: WeightTuple,
    /// 1-based position of the inserted point.
    pub insertion_index: usize,
}

/// Lower (`factor = m*`): inserts `Σ q_j x_j` with weight `m*`, other weights
/// `p_i − m* q_i`. Upper (`factor = M*`): inserts `Σ p_j x_j` with weight
/// `1/M*`, other weights `q_i − p_i/M*`. The point is placed before the first
/// `x_k` it does not exceed.
pub fn extend_tuple(x: &[f64], p: &[f64], q: &[f64], factor: f64, side: Side) -> Result<Extension> {
    let n = x.len();
    check_len(n, p.len())?;
    check_len(n, q.len())?;
    require_sorted(x)?;
    let (u, v, c) = match side {
        Side::Lower if factor.is_finite() && factor >= 0.0 => (p, q, factor),
        Side::Upper if factor.is_finite() && factor > 0.0 => (q, p, 1.0 / factor),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "factor {factor} is not admissible for the {side:?} construction"
            )))
        }
    };
    let t = sum::dot(v, x);
    if !t.is_finite() {
        return Err(Error::NoInsertionPoint { value: t });
    }
    let k = x.iter().position(|&xi| t <= xi).unwrap_or(n);
    let mut points = Vec::with_capacity(n + 1);
    points.extend_from_slice(&x[..k]);
    points.push(t);
    points.extend_from_slice(&x[k..]);

    let mut uu = NeumaierSum::new();
    let mut vv = NeumaierSum::new();
    let mut path = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let s = if j == n {
            1.0
        } else if j < k {
            uu += u[j];
            vv += v[j];
            uu.value() - c * vv.value()
        } else {
            let before = uu.value() - c * vv.value();
            uu += u[j];
            vv += v[j];
            before + c
        };
        if !(-PREFIX_SLACK..=1.0 + PREFIX_SLACK).contains(&s) {
            return Err(Error::HypothesisViolated(format!(
                "factor {factor} gives prefix sum {s} at j={} outside [0, 1]",
                j + 1
            )));
        }
        path.push(s.clamp(0.0, 1.0));
    }
    // Differencing against the running sum keeps sequential prefix sums on the path.
    let mut running = 0.0;
    let weights: Vec<f64> = path
        .iter()
        .map(|&s| {
            let w = s - running;
            running += w;
            w
        })
        .collect();
    Ok(Extension {
        points,
        weights: WeightTuple::new(weights, WeightMode::SteffensenNormalized)?,
        insertion_index: k + 1,
    })
}

/// Evaluates `theorem` on `inst`, checking its hypotheses first.
pub fn evaluate(inst: &Instance, theorem: TheoremId, tol: Tolerance) -> Result<BoundReport> {
    use TheoremId::*;
    let class = inst.class_for(theorem)?;
    let spec = &inst.function;
    if let Some((template, scaled)) = theorem.template() {
        let lambda = template_lambda(inst, scaled)?;
        return match template {
            Template::Sandwich => sandwich_report(inst, theorem, lambda, tol),
            Template::TangentUpper => {
                tangent_report(inst, theorem, lambda, theorem == Thm13Printed, tol)
            }
        };
    }
    match theorem {
        Thm3 => dragomir_sandwich(spec, &inst.x, inst.p_values()?, inst.q_values()?, tol),
        Thm4Lower | Thm4Upper => {
            let side = if theorem == Thm4Lower {
                Side::Lower
            } else {
                Side::Upper
            };
            dragomir_refinement(spec, &inst.x, inst.p_values()?, inst.q_values()?, side, tol)
        }
        Thm5 => star_sandwich(spec, &inst.x, inst.p_values()?, inst.q_values()?, tol),
        Thm6 => steffensen_refined_bound(inst, tol),
        Thm6Convex => steffensen_convex_phi_bound(inst, tol),
        Thm19Lower | Thm19Upper | Thm20Lower | Thm20Upper => {
            let side = if matches!(theorem, Thm19Lower | Thm20Lower) {
                Side::Lower
            } else {
                Side::Upper
            };
            functional_refinement(
                spec,
                &inst.x,
                inst.p_values()?,
                inst.q_values()?,
                class.expect("refinements name a class"),
                side,
                tol,
            )
        }
        _ => unreachable!("template theorems handled above"),
    }
}
