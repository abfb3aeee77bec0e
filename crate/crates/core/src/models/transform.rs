//! Logarithmic change of variables `y(s) = ±ln(x(t)/κ)` with the time
//! change `s = Λ⁻¹∫₀ᵗ λ`, which brings a generalized logistic equation to
//! canonical form `y'(s) = ±Λ·g(s, 𝓚(s, ±y_s))` with equilibrium 0 and
//! unit maximal delay.

use std::sync::Arc;

use serde::Serialize;

use super::{CoefficientFn, Model, Nonlinearity, Reader, VerdictRoute};
use crate::calculus::SmoothScalarMap;
use crate::error::{Error, Result};
use crate::integrator::Prehistory;
use crate::numeric::solve_increasing;

/// `s(t) = Λ⁻¹∫₀ᵗ λ` and its inverse.
#[derive(Debug, Clone)]
pub struct TimeMap {
    growth: CoefficientFn,
    lambda_cap: f64,
}

impl TimeMap {
    pub fn new(growth: CoefficientFn, lambda_cap: f64) -> Self {
        Self { growth, lambda_cap }
    }

    pub fn lambda_cap(&self) -> f64 {
        self.lambda_cap
    }

    pub fn s_of_t(&self, t: f64) -> f64 {
        match self.growth.as_constant() {
            Some(rate) => rate * t / self.lambda_cap,
            None => self.growth.integral(0.0, t) / self.lambda_cap,
        }
    }

    pub fn t_of_s(&self, s: f64) -> f64 {
        match self.growth.as_constant() {
            Some(rate) => s * self.lambda_cap / rate,
            None => solve_increasing(
                |t| self.s_of_t(t),
                |t| self.growth.eval(t) / self.lambda_cap,
                s,
                s * self.lambda_cap / self.growth.eval(0.0),
            ),
        }
    }

    /// Transformed delay `Λ⁻¹∫_{t−delay}^t λ`.
    pub fn sigma(&self, t: f64, delay: f64) -> f64 {
        match self.growth.as_constant() {
            Some(rate) => rate * delay / self.lambda_cap,
            None => self.growth.integral(t - delay, t) / self.lambda_cap,
        }
    }
}

/// Provenance of a transformed model.
#[derive(Debug, Clone, Serialize)]
pub struct TransformMeta {
    /// `"ln x"` or `"-ln x"`.
    pub coordinate: String,
    pub sign: f64,
    pub lambda_cap: f64,
    pub source_family: String,
    pub source_equilibrium: f64,
}

#[derive(Debug)]
pub(crate) struct TransformData {
    time_map: TimeMap,
    sign: f64,
    kappa: f64,
    source_span: f64,
}

/// `+1` (`y = ln x`) when the envelope curvature is at least `1/2` in the
/// logarithmic coordinate, `−1` (`z = −ln x`) otherwise.
pub fn transform_sign(model: &Model) -> Result<f64> {
    match model.meta.route {
        VerdictRoute::Apl => {
            let b = model
                .meta
                .b
                .ok_or_else(|| Error::Precondition("envelope curvature b is missing".into()))?;
            Ok(if b >= 0.5 { 1.0 } else { -1.0 })
        }
        VerdictRoute::FoodLimited => {
            let nu0 = model.meta.nu0.unwrap_or(0.0);
            Ok(if nu0 >= 1.0 { 1.0 } else { -1.0 })
        }
        _ => Err(Error::Precondition(format!(
            "{} is not a generalized logistic model",
            model.family()
        ))),
    }
}

/// Canonical form of a generalized logistic model. `Λ` is taken from the
/// model metadata (see [`super::GleSpec::lambda_cap`]).
pub fn log_transform(model: &Model) -> Result<Model> {
    let spec = model
        .gle()
        .ok_or_else(|| Error::Precondition(format!("{} has no positive equilibrium to transform", model.family())))?;
    let kappa = spec.equilibrium();
    if !(kappa > 0.0) {
        return Err(Error::Precondition("equilibrium must be positive".into()));
    }
    if matches!(spec.reader, Reader::Custom { .. }) {
        return Err(Error::Precondition("custom readers cannot be transformed".into()));
    }
    let sign = transform_sign(model)?;
    let lambda_cap = model.meta.lambda_cap;
    let time_map = TimeMap::new(spec.growth.clone(), lambda_cap);
    let base_delay = match (spec.growth.as_constant(), spec.reader.base_delay()) {
        (Some(rate), Some(delay)) => Some(rate * delay / lambda_cap),
        _ => None,
    };

    let data = Arc::new(TransformData {
        time_map: time_map.clone(),
        sign,
        kappa,
        source_span: model.span,
    });
    let spec = Arc::new(spec.clone());
    let rhs_spec = Arc::clone(&spec);
    let rhs = move |s: f64, view: &crate::integrator::HistoryView<'_>| -> Result<f64> {
        let t = time_map.t_of_s(s);
        let u = match &rhs_spec.reader {
            Reader::PointDelay { delay, .. } => {
                let sigma = time_map.sigma(t, delay.eval(t));
                (sign * view.lookback(sigma)?).exp()
            }
            Reader::MaxWindow { h0 } => {
                let sigma = time_map.sigma(t, *h0);
                if sign > 0.0 {
                    view.max_over(s - sigma, s)?.exp()
                } else {
                    (-view.min_over(s - sigma, s)?).exp()
                }
            }
            Reader::Proportional { mu, .. } => {
                let sigma = s - time_map.s_of_t(mu * t);
                (sign * view.lookback(sigma)?).exp()
            }
            Reader::Custom { .. } => unreachable!("rejected above"),
        };
        Ok(sign * lambda_cap * rhs_spec.nonlinearity.eval(t, u)?)
    };

    let scalar = match &spec.nonlinearity {
        Nonlinearity::FoodLimited { l, .. } => {
            let log_map = SmoothScalarMap::food_limited_log(*l, model.meta.nu0.unwrap_or(0.0));
            Some(if sign > 0.0 { log_map } else { log_map.reflected() })
        }
        Nonlinearity::Rational { .. } => None,
    };

    let mut meta = model.meta.clone();
    meta.family = format!("canonical {}", model.family());
    meta.transform = Some(TransformMeta {
        coordinate: if sign > 0.0 { "ln x" } else { "-ln x" }.to_owned(),
        sign,
        lambda_cap,
        source_family: model.family().to_owned(),
        source_equilibrium: kappa,
    });
    Ok(Model {
        rhs: Arc::new(rhs),
        span: 1.0,
        equilibrium: 0.0,
        domain_low: f64::NEG_INFINITY,
        base_delay,
        meta,
        scalar,
        gle: None,
        transform: Some(data),
    })
}

impl Model {
    pub fn time_map(&self) -> Option<&TimeMap> {
        self.transform.as_ref().map(|d| &d.time_map)
    }

    /// Maps a positive history of the source model to the transformed
    /// coordinate. Source times before `−span` reuse the oldest value.
    pub fn transform_prehistory(&self, source: &Prehistory) -> Result<Prehistory> {
        let data = self
            .transform
            .clone()
            .ok_or_else(|| Error::Precondition(format!("{} is not a transformed model", self.family())))?;
        if !(source.min_value() > 0.0) {
            return Err(Error::Precondition("the source history must be positive".into()));
        }
        let source = source.clone();
        let span = self.span;
        Ok(Prehistory::function(span, move |s| {
            let t = data.time_map.t_of_s(s).max(-data.source_span);
            data.sign * (source.value(t) / data.kappa).ln()
        }))
    }

    /// `(s, y) ↦ (t, x)`.
    pub fn to_original(&self, s: f64, y: f64) -> Result<(f64, f64)> {
        let data = self
            .transform
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("{} is not a transformed model", self.family())))?;
        Ok((data.time_map.t_of_s(s), data.kappa * (data.sign * y).exp()))
    }
}

/// `r₁(x) = aΛx/(1 + (b − ½)x)` and `r₂(x) = aΛx/(1 + (½ − b)x)`.
pub fn eval_r1_r2(a: f64, b: f64, lambda_cap: f64, x: f64) -> Result<(f64, f64)> {
    let one = |c: f64, what: &'static str| -> Result<f64> {
        let den = 1.0 + c * x;
        if den > 0.0 {
            Ok(a * lambda_cap * x / den)
        } else {
            Err(Error::Domain {
                what,
                x,
                boundary: -1.0 / c,
            })
        }
    };
    Ok((one(b - 0.5, "r1")?, one(0.5 - b, "r2")?))
}
