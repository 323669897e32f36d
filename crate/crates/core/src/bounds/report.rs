use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::convexity::ConvexityClass;
use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

/// Identifies one inequality chain.
///
/// `Thm13Printed` is the sign variant of `Thm13` whose error term enters with a
/// minus sign; it is not part of [`TheoremId::ALL`] and is evaluated as a
/// diagnostic next to `Thm13`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    #[serde(rename = "thm1_sandwich")]
    Thm1Sandwich,
    #[serde(rename = "thm1_upper")]
    Thm1Upper,
    Thm3,
    #[serde(rename = "thm4_lower")]
    Thm4Lower,
    #[serde(rename = "thm4_upper")]
    Thm4Upper,
    Thm5,
    Thm6,
    #[serde(rename = "thm6_convex")]
    Thm6Convex,
    Thm7,
    Thm8,
    Thm9,
    Thm10,
    Thm11,
    Thm12,
    Thm13,
    #[serde(rename = "thm13_printed")]
    Thm13Printed,
    Thm14,
    Thm15,
    Thm16,
    Thm17,
    Thm18,
    #[serde(rename = "thm19_lower")]
    Thm19Lower,
    #[serde(rename = "thm19_upper")]
    Thm19Upper,
    #[serde(rename = "thm20_lower")]
    Thm20Lower,
    #[serde(rename = "thm20_upper")]
    Thm20Upper,
}

/// Shape of the tangent-inequality template a theorem instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    /// Three-level chain `0 <= middle <= upper`.
    Sandwich,
    /// `mean f(x) − mean f(x̂) <= tangent sum ∓ G sum`.
    TangentUpper,
}

impl TheoremId {
    /// Every theorem id checked by a default fuzz campaign.
    pub const ALL: [TheoremId; 24] = [
        TheoremId::Thm1Sandwich,
        TheoremId::Thm1Upper,
        TheoremId::Thm3,
        TheoremId::Thm4Lower,
        TheoremId::Thm4Upper,
        TheoremId::Thm5,
        TheoremId::Thm6,
        TheoremId::Thm6Convex,
        TheoremId::Thm7,
        TheoremId::Thm8,
        TheoremId::Thm9,
        TheoremId::Thm10,
        TheoremId::Thm11,
        TheoremId::Thm12,
        TheoremId::Thm13,
        TheoremId::Thm14,
        TheoremId::Thm15,
        TheoremId::Thm16,
        TheoremId::Thm17,
        TheoremId::Thm18,
        TheoremId::Thm19Lower,
        TheoremId::Thm19Upper,
        TheoremId::Thm20Lower,
        TheoremId::Thm20Upper,
    ];

    pub fn as_str(&self) -> &'static str {
        use TheoremId::*;
        match self {
            Thm1Sandwich => "thm1_sandwich",
            Thm1Upper => "thm1_upper",
            Thm3 => "thm3",
            Thm4Lower => "thm4_lower",
            Thm4Upper => "thm4_upper",
            Thm5 => "thm5",
            Thm6 => "thm6",
            Thm6Convex => "thm6_convex",
            Thm7 => "thm7",
            Thm8 => "thm8",
            Thm9 => "thm9",
            Thm10 => "thm10",
            Thm11 => "thm11",
            Thm12 => "thm12",
            Thm13 => "thm13",
            Thm13Printed => "thm13_printed",
            Thm14 => "thm14",
            Thm15 => "thm15",
            Thm16 => "thm16",
            Thm17 => "thm17",
            Thm18 => "thm18",
            Thm19Lower => "thm19_lower",
            Thm19Upper => "thm19_upper",
            Thm20Lower => "thm20_lower",
            Thm20Upper => "thm20_upper",
        }
    }

    /// Convexity class the theorem is stated for, if it names one.
    pub fn class(&self) -> Option<ConvexityClass> {
        use ConvexityClass::*;
        use TheoremId::*;
        match self {
            Thm1Sandwich | Thm1Upper => Some(StronglyConvex),
            Thm7 | Thm8 | Thm9 | Thm10 | Thm6 | Thm6Convex | Thm20Lower | Thm20Upper => {
                Some(UniformlyConvex)
            }
            Thm11 | Thm12 | Thm13 | Thm13Printed | Thm14 => Some(PhiConvex),
            Thm15 | Thm16 | Thm17 | Thm18 | Thm4Lower | Thm4Upper | Thm19Lower | Thm19Upper => {
                Some(Superquadratic)
            }
            Thm3 | Thm5 => None,
        }
    }

    /// Template shape and whether the chain is λ-parameterized.
    pub fn template(&self) -> Option<(Template, bool)> {
        use TheoremId::*;
        match self {
            Thm7 | Thm11 | Thm15 => Some((Template::Sandwich, false)),
            Thm8 | Thm12 | Thm16 | Thm1Sandwich => Some((Template::Sandwich, true)),
            Thm9 | Thm13 | Thm13Printed | Thm17 => Some((Template::TangentUpper, false)),
            Thm10 | Thm14 | Thm18 | Thm1Upper => Some((Template::TangentUpper, true)),
            _ => None,
        }
    }

    pub fn is_lambda(&self) -> bool {
        matches!(self.template(), Some((_, true)))
    }

    /// The unscaled counterpart of a λ-theorem.
    pub fn unscaled(&self) -> Option<TheoremId> {
        use TheoremId::*;
        match self {
            Thm8 => Some(Thm7),
            Thm10 => Some(Thm9),
            Thm12 => Some(Thm11),
            Thm14 => Some(Thm13),
            Thm16 => Some(Thm15),
            Thm18 => Some(Thm17),
            // Theorem 1 is the strongly convex case of Theorems 8 and 10.
            Thm1Sandwich => Some(Thm7),
            Thm1Upper => Some(Thm9),
            _ => None,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .iter()
            .chain(std::iter::once(&TheoremId::Thm13Printed))
            .find(|t| t.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown theorem id `{s}`")))
    }
}

/// Direction of the chain: `lhs <= mid <= rhs` or `lhs >= mid >= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

/// Values of one inequality chain, its slack, and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub relation: Relation,
    pub lhs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid: Option<f64>,
    pub rhs: f64,
    /// Smallest margin over the inequalities in the chain (negative = violated).
    pub slack: f64,
    /// Largest magnitude among the chain values and summands.
    pub scale: f64,
    /// `tol_abs + tol_rel · scale`.
    pub allowance: f64,
    pub pass: bool,
    pub terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    /// Margins of each inequality in the chain, in order.
    pub fn margins(&self) -> Vec<f64> {
        margins(self.relation, self.lhs, self.mid, self.rhs)
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    /// One row per value: `theorem,term,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theorem,term,value\n");
        let mut row = |name: &str, value: String| {
            out.push_str(&format!("{},{},{}\n", self.theorem, name, value));
        };
        row("relation", format!("{:?}", self.relation).to_lowercase());
        row("lhs", fmt_f64(self.lhs));
        if let Some(mid) = self.mid {
            row("mid", fmt_f64(mid));
        }
        row("rhs", fmt_f64(self.rhs));
        row("slack", fmt_f64(self.slack));
        row("scale", fmt_f64(self.scale));
        row("allowance", fmt_f64(self.allowance));
        row("pass", self.pass.to_string());
        for t in &self.terms {
            row(&format!("term:{}", t.name), fmt_f64(t.value));
        }
        for n in &self.notes {
            row("note", csv_quote(n));
        }
        out
    }

    /// Inverse of [`BoundReport::to_csv`]; lines starting with `#` are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut theorem = None;
        let mut relation = None;
        let (mut lhs, mut mid, mut rhs) = (None, None, None);
        let (mut slack, mut scale, mut allowance, mut pass) = (None, None, None, None);
        let mut terms = Vec::new();
        let mut notes = Vec::new();
        let parse = |v: &str, line: usize| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {line}: bad number `{v}`: {e}")))
        };
        for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
            if line.starts_with('#') || line.trim().is_empty() || line == "theorem,term,value" {
                continue;
            }
            let mut parts = line.splitn(3, ',');
            let (Some(th), Some(name), Some(value)) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(Error::Parse(format!("line {lineno}: expected 3 fields")));
            };
            theorem = Some(th.parse::<TheoremId>()?);
            let value = csv_unquote(value)
                .ok_or_else(|| Error::Parse(format!("line {lineno}: unterminated quoted field")))?;
            let value = value.as_str();
            match name {
                "relation" => {
                    relation = Some(match value {
                        "le" => Relation::Le,
                        "ge" => Relation::Ge,
                        _ => return Err(Error::Parse(format!("line {lineno}: bad relation"))),
                    })
                }
                "lhs" => lhs = Some(parse(value, lineno)?),
                "mid" => mid = Some(parse(value, lineno)?),
                "rhs" => rhs = Some(parse(value, lineno)?),
                "slack" => slack = Some(parse(value, lineno)?),
                "scale" => scale = Some(parse(value, lineno)?),
                "allowance" => allowance = Some(parse(value, lineno)?),
                "pass" => pass = Some(value == "true"),
                "note" => notes.push(value.to_string()),
                other => match other.strip_prefix("term:") {
                    Some(t) => terms.push(Term {
                        name: t.to_string(),
                        value: parse(value, lineno)?,
                    }),
                    None => {
                        return Err(Error::Parse(format!(
                            "line {lineno}: unknown row `{other}`"
                        )))
                    }
                },
            }
        }
        let missing = |what: &str| Error::Parse(format!("csv report is missing `{what}`"));
        Ok(BoundReport {
            theorem: theorem.ok_or_else(|| missing("theorem"))?,
            relation: relation.ok_or_else(|| missing("relation"))?,
            lhs: lhs.ok_or_else(|| missing("lhs"))?,
            mid,
            rhs: rhs.ok_or_else(|| missing("rhs"))?,
            slack: slack.ok_or_else(|| missing("slack"))?,
            scale: scale.ok_or_else(|| missing("scale"))?,
            allowance: allowance.ok_or_else(|| missing("allowance"))?,
            pass: pass.ok_or_else(|| missing("pass"))?,
            terms,
            notes,
        })
    }
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub(crate) fn margins(relation: Relation, lhs: f64, mid: Option<f64>, rhs: f64) -> Vec<f64> {
    let chain: Vec<f64> = match mid {
        Some(m) => vec![lhs, m, rhs],
        None => vec![lhs, rhs],
    };
    chain
        .windows(2)
        .map(|w| match relation {
            Relation::Le => w[1] - w[0],
            Relation::Ge => w[0] - w[1],
        })
        .collect()
}

/// Collects named summands while a chain is evaluated.
#[derive(Debug)]
pub(crate) struct ReportBuilder {
    theorem: TheoremId,
    relation: Relation,
    terms: Vec<Term>,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn new(theorem: TheoremId, relation: Relation) -> Self {
        ReportBuilder {
            theorem,
            relation,
            terms: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn term(&mut self, name: impl Into<String>, value: f64) -> f64 {
        self.terms.push(Term {
            name: name.into(),
            value,
        });
        value
    }

    /// Records `values[i]` as `name[i+1]`.
    pub fn indexed(&mut self, name: &str, values: &[f64]) {
        for (i, &v) in values.iter().enumerate() {
            self.term(format!("{name}[{}]", i + 1), v);
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn finish(self, lhs: f64, mid: Option<f64>, rhs: f64, tol: Tolerance) -> BoundReport {
        let scale = self
            .terms
            .iter()
            .map(|t| t.value.abs())
            .chain([lhs.abs(), rhs.abs(), mid.unwrap_or(0.0).abs()])
            .fold(0.0f64, f64::max);
        let slack = margins(self.relation, lhs, mid, rhs)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let allowance = tol.allowance(scale);
        BoundReport {
            theorem: self.theorem,
            relation: self.relation,
            lhs,
            mid,
            rhs,
            slack,
            scale,
            allowance,
            pass: slack >= -allowance,
            terms: self.terms,
            notes: self.notes,
        }
    }
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_unquote(s: &str) -> Option<String> {
    match s.strip_prefix('"') {
        Some(inner) => Some(inner.strip_suffix('"')?.replace("\"\"", "\"")),
        None => Some(s.to_string()),
    }
}
