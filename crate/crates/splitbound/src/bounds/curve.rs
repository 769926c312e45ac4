use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// The `t`-dependence of a single term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// `exp(-(t / scale)^alpha)`
    Weibull { scale: f64, alpha: f64 },
    /// `exp(-weight t^2 / (var + lin t))`
    Bernstein { weight: f64, var: f64, lin: f64 },
    /// `exp(-exponent)`, independent of `t`.
    Constant { exponent: f64 },
}

impl Shape {
    /// A term whose scale vanishes is 1 at `t = 0` and 0 afterwards.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Shape::Weibull { scale, alpha } => {
                if t <= 0.0 {
                    1.0
                } else if scale <= 0.0 {
                    0.0
                } else {
                    (-(t / scale).powf(alpha)).exp()
                }
            }
            Shape::Bernstein { weight, var, lin } => {
                if t <= 0.0 {
                    1.0
                } else {
                    let den = var + lin * t;
                    if den <= 0.0 {
                        0.0
                    } else {
                        (-weight * t * t / den).exp()
                    }
                }
            }
            Shape::Constant { exponent } => (-exponent).exp(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub prefactor: f64,
    pub shape: Shape,
}

impl Term {
    pub fn new(label: &str, prefactor: f64, shape: Shape) -> Self {
        Term { label: label.to_string(), prefactor, shape }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let v = self.shape.eval(t);
        if v == 0.0 {
            0.0
        } else {
            self.prefactor * v
        }
    }
}

/// A tail bound as a sum of explicit terms, clamped to `[0, 1]`.
///
/// `deviation_scale` records how the argument relates to the deviation being
/// bounded: a curve with scale 3 bounds `P(|S| > 3t)` at argument `t`, and
/// [`TailBoundCurve::at_deviation`] converts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundCurve {
    pub family: String,
    pub terms: Vec<Term>,
    pub params: BTreeMap<String, f64>,
    pub valid_from: f64,
    pub deviation_scale: f64,
}

impl TailBoundCurve {
    pub fn new(family: &str, params: BTreeMap<String, f64>) -> Self {
        TailBoundCurve { family: family.to_string(), terms: Vec::new(), params, valid_from: 0.0, deviation_scale: 1.0 }
    }

    pub(crate) fn term(mut self, label: &str, prefactor: f64, shape: Shape) -> Self {
        self.terms.push(Term::new(label, prefactor, shape));
        self
    }

    pub fn raw(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    pub fn term_values(&self, t: f64) -> Vec<f64> {
        self.terms.iter().map(|term| term.eval(t)).collect()
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        if t < self.valid_from {
            1.0
        } else {
            self.raw(t).min(1.0)
        }
    }

    /// Bound on the probability that the deviation exceeds `u`.
    pub fn at_deviation(&self, u: f64) -> f64 {
        self.evaluate(u / self.deviation_scale)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.terms.iter().map(|t| t.label.as_str()).collect()
    }

    /// Rows `t, total, term_1, ...` indexed by deviation.
    pub fn to_csv(&self, deviations: &[f64]) -> String {
        let mut out = String::from("t,total");
        for label in self.labels() {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for &u in deviations {
            let t = u / self.deviation_scale;
            let _ = write!(out, "{u},{}", self.evaluate(t));
            for v in self.term_values(t) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Writes `<stem>.csv` and the `<stem>.json` sidecar.
    pub fn export(&self, dir: &Path, stem: &str, deviations: &[f64]) -> std::io::Result<()> {
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv(deviations))?;
        let json = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(format!("{stem}.json")), json)
    }
}
