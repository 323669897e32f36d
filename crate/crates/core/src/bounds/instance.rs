use serde::{Deserialize, Serialize};

use super::report::TheoremId;
use crate::convexity::{ConvexityClass, FunctionSpec, SubgradientChoice};
use crate::error::{Error, Result};
use crate::weights::{WeightMode, WeightTuple};

fn is_derivative(s: &SubgradientChoice) -> bool {
    matches!(s, SubgradientChoice::Derivative)
}

/// One set of inputs for an inequality chain.
///
/// Fields that a theorem does not use are ignored by it; `a` drives the
/// single-tuple theorems and `(p, q)` the paired ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub function: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<ConvexityClass>,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Multiplier on Φ when Φ serves as the error function of a Φ-convex bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "is_derivative")]
    pub subgradient: SubgradientChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremId>,
}

fn describe(mode: WeightMode) -> &'static str {
    match mode {
        WeightMode::Simplex => "simplex weights (a_i >= 0, sum 1)",
        WeightMode::Steffensen => "Jensen-Steffensen coefficients (0 <= A_j <= A_n, A_n > 0)",
        WeightMode::SteffensenNormalized => {
            "normalized Jensen-Steffensen coefficients (0 <= A_j <= 1, A_n = 1)"
        }
    }
}

/// Validates `values` in `mode`, reporting a failure as a violated hypothesis.
pub(crate) fn weights_as(name: &str, values: &[f64], mode: WeightMode) -> Result<WeightTuple> {
    WeightTuple::new(values.to_vec(), mode).map_err(|e| match e {
        Error::InvalidWeights { .. } => {
            Error::HypothesisViolated(format!("{name} must be {}: {e}", describe(mode)))
        }
        other => other,
    })
}

impl Instance {
    /// Bare instance with only `function` and `x` set.
    pub fn new(function: FunctionSpec, x: Vec<f64>) -> Self {
        Instance {
            function,
            class: None,
            x,
            a: None,
            p: None,
            q: None,
            lambda: None,
            c: None,
            error_scale: None,
            subgradient: SubgradientChoice::Derivative,
            theorem: None,
        }
    }

    pub fn with_a(mut self, a: Vec<f64>) -> Self {
        self.a = Some(a);
        self
    }

    pub fn with_pq(mut self, p: Vec<f64>, q: Vec<f64>) -> Self {
        self.p = Some(p);
        self.q = Some(q);
        self
    }

    pub fn with_class(mut self, class: ConvexityClass) -> Self {
        self.class = Some(class);
        self
    }

    pub fn with_lambda(mut self, lambda: Vec<f64>) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!(
                "instance JSON, line {} column {}: {e}",
                e.line(),
                e.column()
            ))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn error_scale(&self) -> f64 {
        self.error_scale.unwrap_or(1.0)
    }

    fn field<'a>(&self, v: &'a Option<Vec<f64>>, name: &str) -> Result<&'a [f64]> {
        v.as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("instance has no `{name}` field")))
    }

    pub fn a_weights(&self, mode: WeightMode) -> Result<WeightTuple> {
        weights_as("a", self.field(&self.a, "a")?, mode)
    }

    pub fn p_values(&self) -> Result<&[f64]> {
        self.field(&self.p, "p")
    }

    pub fn q_values(&self) -> Result<&[f64]> {
        self.field(&self.q, "q")
    }

    /// The λ-tuple, checked to lie in `[0, 1]^n`.
    pub fn lambda_values(&self) -> Result<&[f64]> {
        let lambda = self.field(&self.lambda, "lambda")?;
        if lambda.len() != self.x.len() {
            return Err(Error::LengthMismatch {
                expected: self.x.len(),
                found: lambda.len(),
            });
        }
        for (i, &l) in lambda.iter().enumerate() {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::BadLambda {
                    index: i + 1,
                    value: l,
                });
            }
        }
        Ok(lambda)
    }

    /// Resolves the class used for `theorem`: the theorem's own class, which a
    /// declared `class` must agree with.
    pub fn class_for(&self, theorem: TheoremId) -> Result<Option<ConvexityClass>> {
        match (theorem.class(), self.class) {
            (Some(t), Some(declared)) if t != declared => Err(Error::HypothesisViolated(format!(
                "{theorem} is stated for {t} functions but the instance declares {declared}"
            ))),
            (t, _) => Ok(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_shape() {
        let text = r#"{"function":{"kind":"power","n":2,"domain":[0,1]},
            "class":"superquadratic","x":[0,1],"p":[0.25,0.75],"q":[0.5,0.5],
            "theorem":"thm19_lower"}"#;
        let inst = Instance::from_json(text).unwrap();
        assert_eq!(inst.theorem, Some(TheoremId::Thm19Lower));
        assert_eq!(inst.class, Some(ConvexityClass::Superquadratic));
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn parse_errors_locate_the_field() {
        let text = "{\"function\":{\"kind\":\"power\",\"n\":2,\"domain\":[0,1]},\n\"x\":[0,1],\n\"lamda\":[0,0]}";
        let err = Instance::from_json(text).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("lamda"), "{err}");
    }

    #[test]
    fn steffensen_failure_names_condition() {
        let inst = Instance::new(FunctionSpec::power(2, 0.0, 4.0).unwrap(), vec![1.0, 2.0])
            .with_a(vec![-1.0, 2.0]);
        let err = inst.a_weights(WeightMode::Steffensen).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolated(_)));
        assert!(err.to_string().contains("0 <= A_j <= A_n"));
    }

    #[test]
    fn lambda_range_checked() {
        let inst = Instance::new(FunctionSpec::power(2, 0.0, 4.0).unwrap(), vec![1.0, 2.0])
            .with_lambda(vec![0.5, 1.5]);
        assert_eq!(
            inst.lambda_values().unwrap_err(),
            Error::BadLambda {
                index: 2,
                value: 1.5
            }
        );
    }
}
