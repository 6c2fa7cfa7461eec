//! Interaction functions `f: ℝ₊ → ℝ` through which neighbors' actions enter an
//! agent's marginal payoff.
//!
//! Every function is represented as `f(x) = offset + scale · g(x)` where `g` is a
//! base shape (linear, `ln(1+x)`, `ln(1+cx)/c`, or a user-supplied
//! [`CustomInteraction`]). The affine wrapper is what makes normalization exact:
//! `(f − f(0)) / α` is again of the same form.
//!
//! Arguments below zero (iterates that picked up rounding noise) are clamped to
//! zero before evaluation.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Number of sample points used by [`InteractionFunction::audit`].
pub const AUDIT_SAMPLES: usize = 10_000;
/// Right end of the audit interval `[0, AUDIT_UPPER]`.
pub const AUDIT_UPPER: f64 = 100.0;

/// A user-supplied interaction shape.
///
/// Implementors declare their own constants; [`InteractionFunction::audit`]
/// samples the declared derivatives to flag inconsistent declarations.
pub trait CustomInteraction: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn eval(&self, x: f64) -> f64;
    fn deriv(&self, x: f64) -> f64;
    fn second_deriv(&self, x: f64) -> f64;
    /// Lipschitz constant on `ℝ₊`.
    fn lipschitz(&self) -> f64;
    /// `M` with `f″(x) ≥ −M` on `ℝ₊`, if known.
    fn curvature(&self) -> Option<f64>;
}

#[derive(Clone, Debug)]
pub enum InteractionKind {
    /// `g(x) = x`
    Linear,
    /// `g(x) = ln(1 + x)`
    Log1p,
    /// `g(x) = ln(1 + c·x) / c`
    ScaledLog {
        c: f64,
    },
    Custom(Arc<dyn CustomInteraction>),
}

impl InteractionKind {
    fn eval(&self, x: f64) -> f64 {
        match self {
            InteractionKind::Linear => x,
            InteractionKind::Log1p => x.ln_1p(),
            InteractionKind::ScaledLog { c } => (c * x).ln_1p() / c,
            InteractionKind::Custom(f) => f.eval(x),
        }
    }

    fn deriv(&self, x: f64) -> f64 {
        match self {
            InteractionKind::Linear => 1.0,
            InteractionKind::Log1p => 1.0 / (1.0 + x),
            InteractionKind::ScaledLog { c } => 1.0 / (1.0 + c * x),
            InteractionKind::Custom(f) => f.deriv(x),
        }
    }

    fn second_deriv(&self, x: f64) -> f64 {
        match self {
            InteractionKind::Linear => 0.0,
            InteractionKind::Log1p => -1.0 / ((1.0 + x) * (1.0 + x)),
            InteractionKind::ScaledLog { c } => {
                let d = 1.0 + c * x;
                -c / (d * d)
            }
            InteractionKind::Custom(f) => f.second_deriv(x),
        }
    }

    fn lipschitz(&self) -> f64 {
        match self {
            InteractionKind::Linear | InteractionKind::Log1p | InteractionKind::ScaledLog { .. } => 1.0,
            InteractionKind::Custom(f) => f.lipschitz(),
        }
    }

    fn curvature(&self) -> Option<f64> {
        match self {
            InteractionKind::Linear => Some(0.0),
            InteractionKind::Log1p => Some(1.0),
            InteractionKind::ScaledLog { c } => Some(*c),
            InteractionKind::Custom(f) => f.curvature(),
        }
    }

    fn is_builtin(&self) -> bool {
        !matches!(self, InteractionKind::Custom(_))
    }

    fn same_as(&self, other: &InteractionKind) -> bool {
        match (self, other) {
            (InteractionKind::Linear, InteractionKind::Linear) => true,
            (InteractionKind::Log1p, InteractionKind::Log1p) => true,
            (InteractionKind::ScaledLog { c: a }, InteractionKind::ScaledLog { c: b }) => a == b,
            (InteractionKind::Custom(a), InteractionKind::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    fn label(&self) -> String {
        match self {
            InteractionKind::Linear => "linear".into(),
            InteractionKind::Log1p => "log1p".into(),
            InteractionKind::ScaledLog { c } => format!("scaled_log(c={c})"),
            InteractionKind::Custom(f) => format!("custom({})", f.name()),
        }
    }
}

/// An interaction function `f(x) = offset + scale · g(x)` with declared constants.
#[derive(Clone, Debug)]
pub struct InteractionFunction {
    kind: InteractionKind,
    scale: f64,
    offset: f64,
}

impl PartialEq for InteractionFunction {
    fn eq(&self, other: &Self) -> bool {
        self.kind.same_as(&other.kind) && self.scale == other.scale && self.offset == other.offset
    }
}

impl InteractionFunction {
    /// `f(x) = x`.
    pub fn linear() -> Self {
        Self::from_kind(InteractionKind::Linear)
    }

    /// `f(x) = ln(1 + x)`.
    pub fn log1p() -> Self {
        Self::from_kind(InteractionKind::Log1p)
    }

    /// `f(x) = ln(1 + c·x) / c`; `c = 10` gives `0.1·ln(1 + 10x)`.
    pub fn scaled_log(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!("scaled_log requires c > 0, got {c}")));
        }
        Ok(Self::from_kind(InteractionKind::ScaledLog { c }))
    }

    pub fn custom(f: Arc<dyn CustomInteraction>) -> Self {
        Self::from_kind(InteractionKind::Custom(f))
    }

    fn from_kind(kind: InteractionKind) -> Self {
        Self {
            kind,
            scale: 1.0,
            offset: 0.0,
        }
    }

    /// Returns `offset + scale · f` for `scale > 0`.
    pub fn affine(self, scale: f64, offset: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) || !offset.is_finite() {
            return Err(Error::Domain(format!(
                "affine transform requires finite scale > 0 and finite offset, got scale={scale}, offset={offset}"
            )));
        }
        Ok(Self {
            kind: self.kind,
            scale: self.scale * scale,
            offset: self.offset * scale + offset,
        })
    }

    pub fn kind(&self) -> &InteractionKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn label(&self) -> String {
        let base = self.kind.label();
        if self.scale == 1.0 && self.offset == 0.0 {
            base
        } else {
            format!("{} + {}·{}", self.offset, self.scale, base)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.offset + self.scale * self.kind.eval(x.max(0.0))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.scale * self.kind.deriv(x.max(0.0))
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        self.scale * self.kind.second_deriv(x.max(0.0))
    }

    /// Concavity gap `h(x) = f(x) − f′(x)·x`.
    pub fn concavity_gap(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        self.eval(x) - self.deriv(x) * x
    }

    /// Lipschitz constant `α`.
    pub fn lipschitz_alpha(&self) -> f64 {
        self.scale * self.kind.lipschitz()
    }

    /// Curvature bound `M` (`f″ ≥ −M`), if declared.
    pub fn curvature_m(&self) -> Option<f64> {
        self.kind.curvature().map(|m| self.scale * m)
    }

    /// `(f − f(0)) / α`.
    pub fn normalized(&self) -> Self {
        let alpha = self.lipschitz_alpha();
        let base0 = self.kind.eval(0.0);
        Self {
            kind: self.kind.clone(),
            scale: self.scale / alpha,
            offset: -self.scale * base0 / alpha,
        }
    }

    /// `f(0) = 0`, `α = 1`, and for custom shapes a passing [`audit`](Self::audit)
    /// of monotonicity, concavity and `f(x) ≤ x`.
    pub fn is_normalized(&self) -> bool {
        const TOL: f64 = 1e-12;
        if self.eval(0.0).abs() > TOL || (self.lipschitz_alpha() - 1.0).abs() > TOL {
            return false;
        }
        if self.kind.is_builtin() {
            return true;
        }
        let audit = self.audit();
        audit.consistent() && audit.nondecreasing && audit.concave && audit.below_identity
    }

    /// Strict concavity as used by the strict-gap results: a positive declared
    /// curvature bound and `f″ < 0` at every sample of `(0, upper]`.
    pub fn is_strictly_concave(&self, upper: f64) -> bool {
        match self.curvature_m() {
            Some(m) if m > 0.0 => {}
            _ => return false,
        }
        let upper = if upper.is_finite() && upper > 0.0 { upper } else { 1.0 };
        (1..=64).all(|k| self.second_deriv(upper * k as f64 / 64.0) < 0.0)
    }

    /// Samples `f` on `[0, 100]` and checks the declared constants against it.
    pub fn audit(&self) -> AuditReport {
        let alpha = self.lipschitz_alpha();
        let m = self.curvature_m();
        let step = AUDIT_UPPER / (AUDIT_SAMPLES - 1) as f64;
        let mut report = AuditReport {
            samples: AUDIT_SAMPLES,
            declared_alpha: alpha,
            declared_m: m,
            max_abs_deriv: 0.0,
            max_secant_slope: 0.0,
            min_second_deriv: f64::INFINITY,
            max_deriv_mismatch: 0.0,
            lipschitz_ok: true,
            curvature_ok: true,
            nondecreasing: true,
            concave: true,
            below_identity: true,
        };
        let slack = |v: f64| 1e-9 * v.abs().max(1.0);
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..AUDIT_SAMPLES {
            let x = k as f64 * step;
            let fx = self.eval(x);
            let d1 = self.deriv(x);
            let d2 = self.second_deriv(x);
            report.max_abs_deriv = report.max_abs_deriv.max(d1.abs());
            report.min_second_deriv = report.min_second_deriv.min(d2);
            if d1 < -1e-12 {
                report.nondecreasing = false;
            }
            if d2 > 1e-12 {
                report.concave = false;
            }
            if fx > x + 1e-12 {
                report.below_identity = false;
            }
            if let Some((px, pf)) = prev {
                report.max_secant_slope = report.max_secant_slope.max((fx - pf).abs() / (x - px));
            }
            prev = Some((x, fx));
            let h = 1e-5 * x.max(1.0);
            let lo = (x - h).max(0.0);
            let fd = (self.eval(x + h) - self.eval(lo)) / (x + h - lo);
            let mismatch = (fd - d1).abs() / (1.0 + d1.abs());
            report.max_deriv_mismatch = report.max_deriv_mismatch.max(mismatch);
        }
        report.lipschitz_ok =
            report.max_abs_deriv <= alpha + slack(alpha) && report.max_secant_slope <= alpha + slack(alpha);
        report.curvature_ok = match m {
            Some(m) => report.min_second_deriv >= -m - slack(m),
            None => true,
        };
        report
    }
}

/// Outcome of sampling an interaction function against its declared constants.
#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub samples: usize,
    pub declared_alpha: f64,
    pub declared_m: Option<f64>,
    pub max_abs_deriv: f64,
    pub max_secant_slope: f64,
    pub min_second_deriv: f64,
    /// Largest relative gap between the declared `f′` and a difference quotient.
    pub max_deriv_mismatch: f64,
    pub lipschitz_ok: bool,
    pub curvature_ok: bool,
    pub nondecreasing: bool,
    pub concave: bool,
    pub below_identity: bool,
}

impl AuditReport {
    /// Declared constants agree with the samples.
    pub fn consistent(&self) -> bool {
        self.lipschitz_ok && self.curvature_ok && self.max_deriv_mismatch < 1e-4
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct InteractionParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(default = "one")]
    scale: f64,
    #[serde(default)]
    offset: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for InteractionParams {
    fn default() -> Self {
        Self {
            c: None,
            scale: 1.0,
            offset: 0.0,
        }
    }
}

/// On-disk form: `{"kind": "log1p", "params": {"scale": 1, "offset": 0}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct InteractionDoc {
    kind: String,
    #[serde(default)]
    params: InteractionParams,
}

impl TryFrom<InteractionDoc> for InteractionFunction {
    type Error = Error;

    fn try_from(doc: InteractionDoc) -> Result<Self> {
        let base = match doc.kind.as_str() {
            "linear" => InteractionFunction::linear(),
            "log1p" => InteractionFunction::log1p(),
            "scaled_log" => {
                let c = doc
                    .params
                    .c
                    .ok_or_else(|| Error::Domain("scaled_log requires params.c".into()))?;
                InteractionFunction::scaled_log(c)?
            }
            other => return Err(Error::Domain(format!("unknown interaction kind {other:?}"))),
        };
        if doc.params.c.is_some() && doc.kind != "scaled_log" {
            return Err(Error::Domain(format!(
                "params.c is only valid for scaled_log, not {}",
                doc.kind
            )));
        }
        base.affine(doc.params.scale, doc.params.offset)
    }
}

impl Serialize for InteractionFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (kind, c) = match &self.kind {
            InteractionKind::Linear => ("linear", None),
            InteractionKind::Log1p => ("log1p", None),
            InteractionKind::ScaledLog { c } => ("scaled_log", Some(*c)),
            InteractionKind::Custom(f) => {
                return Err(serde::ser::Error::custom(format!(
                    "custom interaction function {} has no on-disk form",
                    f.name()
                )))
            }
        };
        InteractionDoc {
            kind: kind.to_string(),
            params: InteractionParams {
                c,
                scale: self.scale,
                offset: self.offset,
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for InteractionFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = InteractionDoc::deserialize(deserializer)?;
        InteractionFunction::try_from(doc).map_err(serde::de::Error::custom)
    }
}
