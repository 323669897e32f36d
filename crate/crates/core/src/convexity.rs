//! Function catalog and class certification.
//!
//! A [`FunctionSpec`] is one of a small set of closed-form functions on a
//! closed interval, each with a known derivative and a known modulus `Φ`:
//!
//! | kind | f(x) | Φ(d) |
//! |------|------|------|
//! | `Power(n)` on `[a, b]`, `a >= 0` | `x^n` | `d^n` |
//! | `StrongQuadratic(c)` | `c x²` | `c d²` |
//! | nonnegative combination | `Σ k_j f_j` | `Σ k_j Φ_j` |
//!
//! Class membership is declared by [`FunctionSpec::class_tags`] and can be
//! checked numerically with [`certify_class`], which samples the defining
//! inequality of the class on a uniform grid (endpoints included).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum;
use crate::tolerance::Tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClass {
    UniformlyConvex,
    StronglyConvex,
    PhiConvex,
    Superquadratic,
}

impl ConvexityClass {
    pub const ALL: [ConvexityClass; 4] = [
        ConvexityClass::UniformlyConvex,
        ConvexityClass::StronglyConvex,
        ConvexityClass::PhiConvex,
        ConvexityClass::Superquadratic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConvexityClass::UniformlyConvex => "uniformly_convex",
            ConvexityClass::StronglyConvex => "strongly_convex",
            ConvexityClass::PhiConvex => "phi_convex",
            ConvexityClass::Superquadratic => "superquadratic",
        }
    }
}

impl fmt::Display for ConvexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConvexityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConvexityClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown class `{s}`")))
    }
}

/// Closed interval `[lo, hi]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval { lo: v[0], hi: v[1] }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidSpec(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                value: x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// `density` equally spaced points from `lo` to `hi` inclusive.
    pub fn grid(&self, density: usize) -> Vec<f64> {
        uniform_grid(self.lo, self.hi, density)
    }
}

pub fn uniform_grid(lo: f64, hi: f64, density: usize) -> Vec<f64> {
    match density {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = (density - 1) as f64;
            (0..density)
                .map(|k| {
                    if k == density - 1 {
                        hi
                    } else {
                        lo + (hi - lo) * (k as f64 / last)
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionKind {
    Power { n: u32 },
    StrongQuadratic { c: f64 },
    Combo(Vec<ComboTerm>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComboTerm {
    pub coeff: f64,
    pub atom: FunctionSpec,
}

/// A catalog function on a closed interval together with its modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct FunctionSpec {
    kind: FunctionKind,
    domain: Interval,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawSpec {
    Power { n: u32, domain: [f64; 2] },
    StrongQuadratic { c: f64, domain: [f64; 2] },
    Combo { terms: Vec<RawTerm> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coeff: f64,
    atom: RawSpec,
}

impl TryFrom<RawSpec> for FunctionSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        match raw {
            RawSpec::Power { n, domain } => FunctionSpec::power(n, domain[0], domain[1]),
            RawSpec::StrongQuadratic { c, domain } => {
                FunctionSpec::strong_quadratic(c, domain[0], domain[1])
            }
            RawSpec::Combo { terms } => {
                let terms = terms
                    .into_iter()
                    .map(|t| Ok((t.coeff, FunctionSpec::try_from(t.atom)?)))
                    .collect::<Result<Vec<_>>>()?;
                FunctionSpec::combo(terms)
            }
        }
    }
}

impl From<FunctionSpec> for RawSpec {
    fn from(spec: FunctionSpec) -> Self {
        let domain = [spec.domain.lo, spec.domain.hi];
        match spec.kind {
            FunctionKind::Power { n } => RawSpec::Power { n, domain },
            FunctionKind::StrongQuadratic { c } => RawSpec::StrongQuadratic { c, domain },
            FunctionKind::Combo(terms) => RawSpec::Combo {
                terms: terms
                    .into_iter()
                    .map(|t| RawTerm {
                        coeff: t.coeff,
                        atom: t.atom.into(),
                    })
                    .collect(),
            },
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}

impl FunctionSpec {
    /// `x^n` on `[lo, hi]`; requires `n >= 2` and `lo >= 0`.
    pub fn power(n: u32, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpec(format!(
                "power exponent must be >= 2, got {n}"
            )));
        }
        let domain = Interval::new(lo, hi)?;
        if lo < 0.0 {
            return Err(Error::InvalidSpec(format!(
                "power functions are catalogued on [0, b] only, got lower end {lo}"
            )));
        }
        Ok(FunctionSpec {
            kind: FunctionKind::Power { n },
            domain,
        })
    }

    /// `c x²` on `[lo, hi]`; requires `c > 0`.
    pub fn strong_quadratic(c: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "strong-quadratic constant must be > 0, got {c}"
            )));
        }
        Ok(FunctionSpec {
            kind: FunctionKind::StrongQuadratic { c },
            domain: Interval::new(lo, hi)?,
        })
    }

    /// Nonnegative combination `Σ k_j f_j`. The domain is the intersection of
    /// the atom domains; at least one coefficient must be positive.
    pub fn combo(terms: Vec<(f64, FunctionSpec)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidSpec(
                "combination needs at least one term".into(),
            ));
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut any_positive = false;
        for (k, atom) in &terms {
            if !(k.is_finite() && *k >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "combination coefficient must be >= 0, got {k}"
                )));
            }
            any_positive |= *k > 0.0;
            lo = lo.max(atom.domain.lo);
            hi = hi.min(atom.domain.hi);
        }
        if !any_positive {
            return Err(Error::InvalidSpec(
                "combination needs a positive coefficient".into(),
            ));
        }
        if lo > hi {
            return Err(Error::InvalidSpec("atom domains do not intersect".into()));
        }
        Ok(FunctionSpec {
            kind: FunctionKind::Combo(
                terms
                    .into_iter()
                    .map(|(coeff, atom)| ComboTerm { coeff, atom })
                    .collect(),
            ),
            domain: Interval { lo, hi },
        })
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// Same function restricted (or extended) to another interval.
    pub fn with_domain(&self, lo: f64, hi: f64) -> Result<Self> {
        match &self.kind {
            FunctionKind::Power { n } => FunctionSpec::power(*n, lo, hi),
            FunctionKind::StrongQuadratic { c } => FunctionSpec::strong_quadratic(*c, lo, hi),
            FunctionKind::Combo(terms) => FunctionSpec::combo(
                terms
                    .iter()
                    .map(|t| Ok((t.coeff, t.atom.with_domain(lo, hi)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    /// f(x), without a domain check.
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            FunctionKind::Power { n } => x.powi(*n as i32),
            FunctionKind::StrongQuadratic { c } => c * x * x,
            FunctionKind::Combo(terms) => sum::sum(terms.iter().map(|t| t.coeff * t.atom.value(x))),
        }
    }

    /// f′(x), without a domain check.
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.kind {
            FunctionKind::Power { n } => f64::from(*n) * x.powi(*n as i32 - 1),
            FunctionKind::StrongQuadratic { c } => 2.0 * c * x,
            FunctionKind::Combo(terms) => {
                sum::sum(terms.iter().map(|t| t.coeff * t.atom.derivative(x)))
            }
        }
    }

    /// Φ(d), without a range check.
    pub fn modulus_value(&self, d: f64) -> f64 {
        match &self.kind {
            FunctionKind::Power { n } => d.powi(*n as i32),
            FunctionKind::StrongQuadratic { c } => c * d * d,
            FunctionKind::Combo(terms) => {
                sum::sum(terms.iter().map(|t| t.coeff * t.atom.modulus_value(d)))
            }
        }
    }

    /// Φ′(d), without a range check.
    pub fn modulus_derivative(&self, d: f64) -> f64 {
        match &self.kind {
            FunctionKind::Power { n } => f64::from(*n) * d.powi(*n as i32 - 1),
            FunctionKind::StrongQuadratic { c } => 2.0 * c * d,
            FunctionKind::Combo(terms) => {
                sum::sum(terms.iter().map(|t| t.coeff * t.atom.modulus_derivative(d)))
            }
        }
    }

    /// `f(z+h) − f(z) − f′(z) h − Φ(|h|)`, expanded so that no large terms
    /// cancel. For `x^n` this is `Σ_{k=2}^{n−1} C(n,k) z^{n−k} h^k` plus
    /// `2h^n` when `n` is odd and `h < 0`.
    pub fn tangent_excess(&self, z: f64, h: f64) -> f64 {
        match &self.kind {
            FunctionKind::Power { n } => {
                let n = *n;
                let mut acc = sum::NeumaierSum::new();
                for k in 2..n {
                    acc += binomial(n, k) * z.powi((n - k) as i32) * h.powi(k as i32);
                }
                if n % 2 == 1 && h < 0.0 {
                    acc += 2.0 * h.powi(n as i32);
                }
                acc.value()
            }
            FunctionKind::StrongQuadratic { .. } => 0.0,
            FunctionKind::Combo(terms) => {
                sum::sum(terms.iter().map(|t| t.coeff * t.atom.tangent_excess(z, h)))
            }
        }
    }

    /// f(x) with a domain check.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.domain.check(x)?;
        Ok(self.value(x))
    }

    /// f′(x) with a domain check.
    pub fn evaluate_derivative(&self, x: f64) -> Result<f64> {
        self.domain.check(x)?;
        Ok(self.derivative(x))
    }

    /// Φ(d) for `0 <= d <= b − a`.
    pub fn modulus(&self, d: f64) -> Result<f64> {
        if !(0.0..=self.domain.width()).contains(&d) {
            return Err(Error::Domain {
                value: d,
                lo: 0.0,
                hi: self.domain.width(),
            });
        }
        Ok(self.modulus_value(d))
    }

    /// `Some(c)` when the modulus is exactly `c d²`.
    pub fn strong_constant(&self) -> Option<f64> {
        match &self.kind {
            FunctionKind::Power { n: 2 } => Some(1.0),
            FunctionKind::Power { .. } => None,
            FunctionKind::StrongQuadratic { c } => Some(*c),
            FunctionKind::Combo(terms) => {
                let mut c = 0.0;
                for t in terms {
                    c += t.coeff * t.atom.strong_constant()?;
                }
                Some(c)
            }
        }
    }

    /// Classes this function provably belongs to, with its own modulus.
    ///
    /// Every catalog function is uniformly convex with its modulus and, being
    /// convex, Φ-convex for any nonnegative error function. Strong convexity
    /// needs a modulus of the form `c d²`; superquadracity needs a domain in
    /// `[0, ∞)`.
    pub fn class_tags(&self) -> BTreeSet<ConvexityClass> {
        let mut tags = BTreeSet::new();
        tags.insert(ConvexityClass::UniformlyConvex);
        tags.insert(ConvexityClass::PhiConvex);
        if self.strong_constant().is_some() {
            tags.insert(ConvexityClass::StronglyConvex);
        }
        if self.domain.lo >= 0.0 {
            tags.insert(ConvexityClass::Superquadratic);
        }
        tags
    }

    pub fn require_class(&self, class: ConvexityClass) -> Result<()> {
        if self.class_tags().contains(&class) {
            return Ok(());
        }
        let reason = match class {
            ConvexityClass::StronglyConvex => "modulus is not of the form c·d²".to_string(),
            ConvexityClass::Superquadratic => {
                format!("domain lower end {} is negative", self.domain.lo)
            }
            _ => "not a member".to_string(),
        };
        Err(Error::UnsupportedClass { class, reason })
    }
}

/// Piecewise-linear subgradient table `u -> φ(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct SubgradientTable {
    points: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for SubgradientTable {
    type Error = Error;

    fn try_from(points: Vec<(f64, f64)>) -> Result<Self> {
        SubgradientTable::new(points)
    }
}

impl From<SubgradientTable> for Vec<(f64, f64)> {
    fn from(t: SubgradientTable) -> Self {
        t.points
    }
}

impl SubgradientTable {
    /// Points must be finite with strictly increasing abscissae.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty subgradient table".into()));
        }
        if points.iter().any(|(u, v)| !u.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite subgradient table entry".into(),
            ));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument(
                "subgradient table abscissae must be strictly increasing".into(),
            ));
        }
        Ok(SubgradientTable { points })
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if u < first.0 || u > last.0 {
            return Err(Error::Domain {
                value: u,
                lo: first.0,
                hi: last.0,
            });
        }
        let idx = self.points.partition_point(|p| p.0 < u);
        let (u1, v1) = self.points[idx];
        if u1 == u || idx == 0 {
            return Ok(v1);
        }
        let (u0, v0) = self.points[idx - 1];
        Ok(v0 + (v1 - v0) * (u - u0) / (u1 - u0))
    }
}

/// Which function plays φ in the tangent inequality.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubgradientChoice {
    #[default]
    #[serde(with = "derivative_tag")]
    Derivative,
    Custom(SubgradientTable),
}

mod derivative_tag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("derivative")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s == "derivative" {
            Ok(())
        } else {
            Err(serde::de::Error::custom(format!(
                "expected \"derivative\", got {s:?}"
            )))
        }
    }
}

/// The penalty term `G` of the tangent inequality
/// `f(x) − f(u) ≥ φ(u)(x−u) + σ·G(|x−u|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    /// `G = scale · Φ`.
    Modulus { scale: f64 },
    /// `G = f` (superquadratic case).
    SelfValue,
}

/// Tangent inequality of one class, bound to a function and a subgradient.
#[derive(Debug, Clone)]
pub struct TangentForm<'a> {
    spec: &'a FunctionSpec,
    class: ConvexityClass,
    subgradient: &'a SubgradientChoice,
    sigma: f64,
    penalty: Penalty,
}

impl<'a> TangentForm<'a> {
    /// `error_scale` multiplies Φ for the Φ-convex class and is ignored otherwise.
    pub fn new(
        spec: &'a FunctionSpec,
        class: ConvexityClass,
        subgradient: &'a SubgradientChoice,
        error_scale: f64,
    ) -> Result<Self> {
        spec.require_class(class)?;
        let (sigma, penalty) = match class {
            ConvexityClass::UniformlyConvex | ConvexityClass::StronglyConvex => {
                (1.0, Penalty::Modulus { scale: 1.0 })
            }
            ConvexityClass::Superquadratic => (1.0, Penalty::SelfValue),
            ConvexityClass::PhiConvex => {
                if !(error_scale.is_finite() && error_scale >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "error scale must be >= 0, got {error_scale}"
                    )));
                }
                (-1.0, Penalty::Modulus { scale: error_scale })
            }
        };
        Ok(TangentForm {
            spec,
            class,
            subgradient,
            sigma,
            penalty,
        })
    }

    pub fn spec(&self) -> &FunctionSpec {
        self.spec
    }

    pub fn class(&self) -> ConvexityClass {
        self.class
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn penalty(&self) -> Penalty {
        self.penalty
    }

    /// φ(u).
    pub fn phi(&self, u: f64) -> Result<f64> {
        match self.subgradient {
            SubgradientChoice::Derivative => Ok(self.spec.derivative(u)),
            SubgradientChoice::Custom(table) => table.eval(u),
        }
    }

    /// G(d).
    pub fn g(&self, d: f64) -> f64 {
        match self.penalty {
            Penalty::Modulus { scale } => scale * self.spec.modulus_value(d),
            Penalty::SelfValue => self.spec.value(d),
        }
    }

    /// `f(x) − f(u) − φ(u)(x−u) − σ·G(|x−u|)`.
    pub fn slack(&self, x: f64, u: f64) -> Result<f64> {
        let dom = self.spec.domain();
        dom.check(x)?;
        dom.check(u)?;
        let phi = self.phi(u)?;
        Ok(sum::sum([
            self.spec.value(x),
            -self.spec.value(u),
            -phi * (x - u),
            -self.sigma * self.g((x - u).abs()),
        ]))
    }
}

/// `f(x) − f(u) − φ(u)(x−u) − σ·G(|x−u|)` with φ = f′ and the class's (σ, G).
pub fn tangent_slack(spec: &FunctionSpec, class: ConvexityClass, x: f64, u: f64) -> Result<f64> {
    TangentForm::new(spec, class, &SubgradientChoice::Derivative, 1.0)?.slack(x, u)
}

/// Result of a grid certification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    /// What was checked, e.g. `uniformly_convex` or `h_superadditive`.
    pub check: String,
    pub samples: usize,
    pub min_slack: f64,
    /// Grid point attaining `min_slack`: `(x, y, t)`, `(x, y)` or `(x, y)`.
    pub worst: Vec<f64>,
    pub tolerance: Tolerance,
    pub passed: bool,
}

struct Tracker {
    samples: usize,
    min_slack: f64,
    worst: Vec<f64>,
    passed: bool,
    tol: Tolerance,
}

impl Tracker {
    fn new(tol: Tolerance) -> Self {
        Tracker {
            samples: 0,
            min_slack: f64::INFINITY,
            worst: Vec::new(),
            passed: true,
            tol,
        }
    }

    fn record(&mut self, slack: f64, scale: f64, point: &[f64]) {
        self.samples += 1;
        if !self.tol.accepts(slack, scale) || slack.is_nan() {
            self.passed = false;
        }
        if slack < self.min_slack || self.worst.is_empty() {
            self.min_slack = slack;
            self.worst = point.to_vec();
        }
    }

    fn finish(self, check: &str) -> CertReport {
        CertReport {
            check: check.to_string(),
            samples: self.samples,
            min_slack: self.min_slack,
            worst: self.worst,
            tolerance: self.tol,
            passed: self.passed,
        }
    }
}

fn check_density(grid_density: usize) -> Result<()> {
    if grid_density < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid density must be >= 2, got {grid_density}"
        )));
    }
    Ok(())
}

/// Samples the defining inequality of `class` over a uniform grid.
///
/// Uniform/strong convexity and Φ-convexity are sampled on `(x, y, t)`
/// triples with `t ∈ [0, 1]`; superquadracity on `(x, y)` pairs with
/// `C_x = f′(x)`.
pub fn certify_class(
    spec: &FunctionSpec,
    class: ConvexityClass,
    grid_density: usize,
    tol: Tolerance,
) -> Result<CertReport> {
    check_density(grid_density)?;
    let pts = spec.domain().grid(grid_density);
    let ts = uniform_grid(0.0, 1.0, grid_density);
    let mut tr = Tracker::new(tol);
    match class {
        ConvexityClass::UniformlyConvex | ConvexityClass::StronglyConvex => {
            if class == ConvexityClass::StronglyConvex && spec.strong_constant().is_none() {
                return Err(Error::UnsupportedClass {
                    class,
                    reason: "modulus is not of the form c·d²".into(),
                });
            }
            for &x in &pts {
                for &y in &pts {
                    for &t in &ts {
                        let terms = [
                            t * spec.value(x),
                            (1.0 - t) * spec.value(y),
                            -spec.value(t * x + (1.0 - t) * y),
                            -t * (1.0 - t) * spec.modulus_value((x - y).abs()),
                        ];
                        let scale = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        tr.record(sum::sum(terms), scale, &[x, y, t]);
                    }
                }
            }
        }
        ConvexityClass::PhiConvex => {
            for &x in &pts {
                for &y in &pts {
                    let d = (x - y).abs();
                    for &t in &ts {
                        let terms = [
                            t * spec.value(x),
                            (1.0 - t) * spec.value(y),
                            t * spec.modulus_value((1.0 - t) * d),
                            (1.0 - t) * spec.modulus_value(t * d),
                            -spec.value(t * x + (1.0 - t) * y),
                        ];
                        let scale = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        tr.record(sum::sum(terms), scale, &[x, y, t]);
                    }
                }
            }
        }
        ConvexityClass::Superquadratic => {
            if spec.domain().lo < 0.0 {
                return Err(Error::UnsupportedClass {
                    class,
                    reason: "superquadracity is defined on [0, ∞)".into(),
                });
            }
            for &x in &pts {
                for &y in &pts {
                    let terms = [
                        spec.value(y),
                        -spec.value(x),
                        -spec.derivative(x) * (y - x),
                        -spec.value((y - x).abs()),
                    ];
                    let scale = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    tr.record(sum::sum(terms), scale, &[x, y]);
                }
            }
        }
    }
    Ok(tr.finish(class.as_str()))
}

/// Checks `g(y) − g(x) >= H(y − x)` on all grid pairs `x <= y`.
pub fn certify_h_superadditive<G, H>(
    g: G,
    h: H,
    domain: Interval,
    grid_density: usize,
    tol: Tolerance,
) -> Result<CertReport>
where
    G: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    check_density(grid_density)?;
    let pts = domain.grid(grid_density);
    let mut tr = Tracker::new(tol);
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i..] {
            let (gy, gx, hd) = (g(y), g(x), h(y - x));
            let scale = gy.abs().max(gx.abs()).max(hd.abs());
            tr.record(gy - gx - hd, scale, &[x, y]);
        }
    }
    Ok(tr.finish("h_superadditive"))
}

/// Certifies that f′ is `(scale·Φ)′`-superadditive on the domain of `spec`.
pub fn certify_derivative_superadditive(
    spec: &FunctionSpec,
    phi_scale: f64,
    grid_density: usize,
    tol: Tolerance,
) -> Result<CertReport> {
    certify_h_superadditive(
        |x| spec.derivative(x),
        |d| phi_scale * spec.modulus_derivative(d),
        spec.domain(),
        grid_density,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pow(n: u32, lo: f64, hi: f64) -> FunctionSpec {
        FunctionSpec::power(n, lo, hi).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(pow(2, 0.0, 10.0).evaluate(3.0).unwrap(), 9.0);
        assert_eq!(
            FunctionSpec::strong_quadratic(1.0, -2.0, 2.0)
                .unwrap()
                .evaluate(0.0)
                .unwrap(),
            0.0
        );
        assert_eq!(pow(3, 0.0, 4.0).evaluate(2.0).unwrap(), 8.0);
    }

    #[test]
    fn evaluate_outside_domain() {
        let e = pow(2, 0.0, 1.0).evaluate(1.5).unwrap_err();
        assert!(matches!(e, Error::Domain { .. }));
    }

    #[test]
    fn modulus_examples() {
        assert_eq!(pow(2, 0.0, 4.0).modulus(0.0).unwrap(), 0.0);
        assert_eq!(pow(3, 0.0, 4.0).modulus(2.0).unwrap(), 8.0);
        let sq = FunctionSpec::strong_quadratic(2.0, -2.0, 2.0).unwrap();
        assert_eq!(sq.modulus(3.0).unwrap(), 18.0);
        assert!(sq.modulus(-0.1).is_err());
        assert!(sq.modulus(4.5).is_err());
    }

    #[test]
    fn bad_specs() {
        assert!(FunctionSpec::power(1, 0.0, 1.0).is_err());
        assert!(FunctionSpec::power(3, -1.0, 1.0).is_err());
        assert!(FunctionSpec::strong_quadratic(0.0, 0.0, 1.0).is_err());
        assert!(FunctionSpec::strong_quadratic(1.0, 2.0, 1.0).is_err());
        assert!(FunctionSpec::combo(vec![]).is_err());
        assert!(FunctionSpec::combo(vec![(-1.0, pow(2, 0.0, 1.0))]).is_err());
        assert!(FunctionSpec::combo(vec![(0.0, pow(2, 0.0, 1.0))]).is_err());
        assert!(
            FunctionSpec::combo(vec![(1.0, pow(2, 0.0, 1.0)), (1.0, pow(3, 2.0, 3.0))]).is_err()
        );
    }

    #[test]
    fn tags() {
        use ConvexityClass::*;
        let t = pow(3, 0.0, 4.0).class_tags();
        assert!(t.contains(&UniformlyConvex) && t.contains(&Superquadratic));
        assert!(!t.contains(&StronglyConvex));
        let sq = FunctionSpec::strong_quadratic(1.0, -2.0, 2.0).unwrap();
        assert!(sq.class_tags().contains(&StronglyConvex));
        assert!(!sq.class_tags().contains(&Superquadratic));
        let combo =
            FunctionSpec::combo(vec![(0.5, pow(2, 0.0, 3.0)), (2.0, pow(3, 0.0, 4.0))]).unwrap();
        assert_eq!(combo.domain(), Interval { lo: 0.0, hi: 3.0 });
        assert!(combo.class_tags().contains(&Superquadratic));
        assert!(!combo.class_tags().contains(&StronglyConvex));
        let strong = FunctionSpec::combo(vec![
            (0.5, FunctionSpec::strong_quadratic(2.0, -1.0, 1.0).unwrap()),
            (3.0, pow(2, 0.0, 1.0)),
        ])
        .unwrap();
        assert_eq!(strong.strong_constant(), Some(4.0));
    }

    #[test]
    fn combo_modulus_is_combination() {
        let combo =
            FunctionSpec::combo(vec![(0.5, pow(2, 0.0, 3.0)), (2.0, pow(3, 0.0, 4.0))]).unwrap();
        assert_eq!(combo.modulus(2.0).unwrap(), 0.5 * 4.0 + 2.0 * 8.0);
        assert_eq!(combo.evaluate(1.0).unwrap(), 2.5);
        assert_eq!(combo.derivative(1.0), 0.5 * 2.0 + 2.0 * 3.0);
    }

    #[test]
    fn tangent_excess_matches_direct_formula() {
        for n in 2..=6u32 {
            let s = pow(n, 0.0, 10.0);
            for &(z, y) in &[(1.0, 2.0), (3.0, 0.5), (0.0, 4.0), (2.5, 2.5), (7.0, 1.0)] {
                let direct = s.value(y)
                    - s.value(z)
                    - s.derivative(z) * (y - z)
                    - s.modulus_value((y - z).abs());
                let stable = s.tangent_excess(z, y - z);
                assert!(
                    (direct - stable).abs() <= 1e-9 * (1.0 + direct.abs()),
                    "n={n} z={z} y={y}"
                );
            }
        }
        assert_eq!(pow(3, 0.0, 4.0).tangent_excess(1.0, 1.0), 3.0);
    }

    #[test]
    fn tangent_slack_examples() {
        use ConvexityClass::*;
        let p2 = pow(2, 0.0, 10.0);
        assert_eq!(tangent_slack(&p2, Superquadratic, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(tangent_slack(&p2, Superquadratic, 3.0, 1.0).unwrap(), 0.0);
        assert_eq!(
            tangent_slack(&pow(3, 0.0, 4.0), UniformlyConvex, 2.0, 1.0).unwrap(),
            3.0
        );
        let sq = FunctionSpec::strong_quadratic(1.0, -2.0, 2.0).unwrap();
        assert!(matches!(
            tangent_slack(&sq, Superquadratic, 1.0, 0.0),
            Err(Error::UnsupportedClass { .. })
        ));
    }

    #[test]
    fn custom_subgradient_table() {
        let t = SubgradientTable::new(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 6.0)]).unwrap();
        assert_eq!(t.eval(0.5).unwrap(), 1.0);
        assert_eq!(t.eval(3.0).unwrap(), 6.0);
        assert_eq!(t.eval(0.0).unwrap(), 0.0);
        assert!(t.eval(3.5).is_err());
        assert!(SubgradientTable::new(vec![(1.0, 0.0), (1.0, 1.0)]).is_err());

        let spec = pow(2, 0.0, 3.0);
        let custom = SubgradientChoice::Custom(t);
        let form = TangentForm::new(&spec, ConvexityClass::Superquadratic, &custom, 1.0).unwrap();
        assert_eq!(form.slack(3.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn certify_examples() {
        let tol = Tolerance::new(1e-12, 1e-12);
        let r = certify_class(&pow(2, 0.0, 4.0), ConvexityClass::UniformlyConvex, 20, tol).unwrap();
        assert!(r.passed);
        assert!(r.min_slack.abs() <= 1e-12);
        assert_eq!(r.samples, 20 * 20 * 20);

        let r = certify_class(&pow(3, 0.0, 4.0), ConvexityClass::Superquadratic, 20, tol).unwrap();
        assert!(r.passed);

        let r = certify_class(&pow(3, 0.0, 4.0), ConvexityClass::UniformlyConvex, 20, tol).unwrap();
        assert!(r.passed);
        assert!(r.min_slack > -1e-12, "{}", r.min_slack);

        assert!(certify_class(&pow(3, 0.0, 4.0), ConvexityClass::StronglyConvex, 20, tol).is_err());
        assert!(certify_class(&pow(3, 0.0, 4.0), ConvexityClass::UniformlyConvex, 1, tol).is_err());
    }

    #[test]
    fn h_superadditive_fails_for_oversized_h() {
        // 2(y−x) < 10(y−x) whenever y > x.
        let spec = pow(2, 0.0, 1.0);
        let r = certify_h_superadditive(
            |x| 2.0 * x,
            |d| 10.0 * d,
            spec.domain(),
            10,
            Tolerance::default(),
        )
        .unwrap();
        assert!(!r.passed);
        assert!(r.min_slack < 0.0);
    }

    #[test]
    fn h_superadditive_examples() {
        let tol = Tolerance::new(1e-12, 1e-12);
        let p2 = pow(2, 0.0, 10.0);
        let r = certify_derivative_superadditive(&p2, 1.0, 30, tol).unwrap();
        assert!(r.passed);
        assert_eq!(r.min_slack, 0.0);
        let p3 = pow(3, 0.0, 4.0);
        assert!(
            certify_derivative_superadditive(&p3, 1.0, 30, tol)
                .unwrap()
                .passed
        );
        assert!(
            !certify_derivative_superadditive(&p3, 10.0, 30, tol)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn json_encoding() {
        let s: FunctionSpec =
            serde_json::from_str(r#"{"kind":"power","n":3,"domain":[0,4]}"#).unwrap();
        assert_eq!(s, pow(3, 0.0, 4.0));
        let s: FunctionSpec =
            serde_json::from_str(r#"{"kind":"strong_quadratic","c":1.0,"domain":[-2,2]}"#).unwrap();
        assert_eq!(s.strong_constant(), Some(1.0));
        let s: FunctionSpec = serde_json::from_str(
            r#"{"kind":"combo","terms":[{"coeff":0.5,"atom":{"kind":"power","n":2,"domain":[0,3]}}]}"#,
        )
        .unwrap();
        assert_eq!(s.evaluate(2.0).unwrap(), 2.0);
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<FunctionSpec>(&back).unwrap(), s);

        assert!(serde_json::from_str::<FunctionSpec>(
            r#"{"kind":"power","n":3,"domain":[0,4],"x":1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<FunctionSpec>(
            r#"{"kind":"combo","terms":[{"coeff":0.5,"atom":{"kind":"power","n":2,"domain":[0,3]},"w":1}]}"#
        )
        .is_err());
        assert!(
            serde_json::from_str::<FunctionSpec>(r#"{"kind":"power","n":1,"domain":[0,4]}"#)
                .is_err()
        );
    }

    #[test]
    fn subgradient_json() {
        let d: SubgradientChoice = serde_json::from_str(r#""derivative""#).unwrap();
        assert_eq!(d, SubgradientChoice::Derivative);
        let c: SubgradientChoice = serde_json::from_str("[[0,1],[2,3]]").unwrap();
        assert!(matches!(c, SubgradientChoice::Custom(_)));
        assert_eq!(
            serde_json::to_string(&SubgradientChoice::Derivative).unwrap(),
            r#""derivative""#
        );
        assert!(serde_json::from_str::<SubgradientChoice>(r#""other""#).is_err());
    }
}
