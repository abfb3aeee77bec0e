//! Catalog of delay models: the Wright equation, linear and logistic
//! equations with variable delay, the food-limited population model, its
//! variant with maxima, and a generalized logistic equation
//! `x' = λ(t)·x·f(t, 𝓛(t, x_t))` with a rational nonlinearity.
//!
//! Population models keep their natural state `N > 0` and equilibrium
//! `κ`; [`log_transform`] maps them to canonical form with equilibrium 0
//! and unit maximal delay.

mod coefficient;
mod config;
mod transform;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use coefficient::{CoefficientFn, Window, DEFAULT_SAMPLES};
pub use config::{HistorySpec, ModelConfig};
pub use transform::{eval_r1_r2, log_transform, transform_sign, TimeMap, TransformMeta};

use crate::bounds::RationalBound;
use crate::calculus::{ConditionId, ConditionReport, SmoothScalarMap, Tally, Witness};
use crate::error::{Error, Result};
use crate::integrator::{HistoryView, Prehistory};
use crate::numeric::linspace;

pub type RhsFn = Arc<dyn Fn(f64, &HistoryView<'_>) -> Result<f64> + Send + Sync>;
pub type ReaderFn = Arc<dyn Fn(f64, &HistoryView<'_>) -> Result<f64> + Send + Sync>;

/// Which stability result applies to a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictRoute {
    /// `x' = f(t, x_t)` with unit delay and envelope `(a, b)`.
    Main,
    /// Generalized logistic equation with envelope `(a, b)` and delay
    /// measure `Λ`.
    Apl,
    /// Food-limited equation with exponent `l`, `ν₀ = inf ν` and `Λ`.
    FoodLimited,
    Unsupported,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelMeta {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Delay measure `Λ`; 1 for models already normalized to unit delay.
    pub lambda_cap: f64,
    pub h3_holds: bool,
    pub route: VerdictRoute,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
}

impl ModelMeta {
    fn new(family: &str, route: VerdictRoute) -> Self {
        Self {
            family: family.to_owned(),
            params: BTreeMap::new(),
            a: None,
            b: None,
            lambda_cap: 1.0,
            h3_holds: true,
            route,
            window: None,
            samples: None,
            l: None,
            nu0: None,
            transform: None,
            claim: None,
        }
    }

    fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }
}

/// How the delayed state `𝓛(t, x_t)` is read from the history.
#[derive(Clone)]
pub enum Reader {
    /// `x(t − h(t))` with `0 < h(t) ≤ h_max`.
    PointDelay { delay: CoefficientFn, h_max: f64 },
    /// `x(μt)`, supported on `t ≤ horizon` where the effective delay
    /// `(1 − μ)t` stays inside the stored span.
    Proportional { mu: f64, horizon: f64 },
    /// `max_{[t − h0, t]} x`.
    MaxWindow { h0: f64 },
    Custom { label: String, span: f64, f: ReaderFn },
}

impl fmt::Debug for Reader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reader::PointDelay { delay, h_max } => write!(f, "PointDelay({delay:?}, h_max = {h_max})"),
            Reader::Proportional { mu, horizon } => write!(f, "Proportional(mu = {mu}, horizon = {horizon})"),
            Reader::MaxWindow { h0 } => write!(f, "MaxWindow(h0 = {h0})"),
            Reader::Custom { label, span, .. } => write!(f, "Custom({label}, span = {span})"),
        }
    }
}

impl Reader {
    pub fn span(&self) -> f64 {
        match self {
            Reader::PointDelay { h_max, .. } => *h_max,
            Reader::Proportional { mu, horizon } => (1.0 - mu) * horizon,
            Reader::MaxWindow { h0 } => *h0,
            Reader::Custom { span, .. } => *span,
        }
    }

    /// Constant delay the step must divide, if any.
    pub fn base_delay(&self) -> Option<f64> {
        match self {
            Reader::PointDelay { delay, h_max } => delay.as_constant().filter(|h| h == h_max),
            Reader::MaxWindow { h0 } => Some(*h0),
            _ => None,
        }
    }

    /// Length of the history the reader looks at, at time `t`.
    pub fn effective_delay(&self, t: f64) -> f64 {
        match self {
            Reader::PointDelay { delay, .. } => delay.eval(t),
            Reader::Proportional { mu, .. } => (1.0 - mu) * t.max(0.0),
            Reader::MaxWindow { h0 } => *h0,
            Reader::Custom { span, .. } => *span,
        }
    }

    pub fn read(&self, t: f64, view: &HistoryView<'_>) -> Result<f64> {
        match self {
            Reader::PointDelay { delay, .. } => view.lookback(delay.eval(t)),
            Reader::Proportional { mu, .. } => view.value_at(mu * t),
            Reader::MaxWindow { h0 } => view.max_over(t - h0, t),
            Reader::Custom { f, .. } => f(t, view),
        }
    }
}

/// The nonlinearity `f` of a generalized logistic equation, normalized so
/// that the positive equilibrium is `u = 1`.
#[derive(Debug, Clone)]
pub enum Nonlinearity {
    /// `(k − L^l)/(k + ν(t)L^l)`, evaluated as `(1 − u^l)/(1 + ν(t)u^l)`
    /// with `u = L/k^{1/l}`.
    FoodLimited { k: f64, l: f64, nu: CoefficientFn },
    /// `r(u − 1)` for a rational envelope `r`.
    Rational { bound: RationalBound },
}

impl Nonlinearity {
    pub fn equilibrium(&self) -> f64 {
        match self {
            Nonlinearity::FoodLimited { k, l, .. } => k.powf(1.0 / l),
            Nonlinearity::Rational { .. } => 1.0,
        }
    }

    /// `f(t, u)` at the normalized delayed state `u`.
    pub fn eval(&self, t: f64, u: f64) -> Result<f64> {
        match self {
            Nonlinearity::FoodLimited { l, nu, .. } => {
                if !(u > 0.0) {
                    return Err(Error::Domain {
                        what: "food-limited delayed state",
                        x: u,
                        boundary: 0.0,
                    });
                }
                let p = if *l == 1.0 { u } else { u.powf(*l) };
                Ok((1.0 - p) / (1.0 + nu.eval(t) * p))
            }
            Nonlinearity::Rational { bound } => bound.eval(u - 1.0),
        }
    }
}

/// `x' = λ(t)·x·f(t, 𝓛(t, x_t))`.
#[derive(Debug, Clone)]
pub struct GleSpec {
    pub growth: CoefficientFn,
    pub nonlinearity: Nonlinearity,
    pub reader: Reader,
}

impl GleSpec {
    pub fn equilibrium(&self) -> f64 {
        self.nonlinearity.equilibrium()
    }

    fn rhs(&self, t: f64, view: &HistoryView<'_>) -> Result<f64> {
        let kappa = self.equilibrium();
        let n = view.current();
        let delayed = self.reader.read(t, view)?;
        let f = self.nonlinearity.eval(t, delayed / kappa)?;
        Ok(self.growth.eval(t) * n * f)
    }

    /// `Λ = sup_{t ∈ window} ∫_{t − h(t)}^t λ`, sampled at `n` times; exact
    /// when both the growth rate and the delay are constant.
    pub fn lambda_cap(&self, window: &Window, n: usize) -> f64 {
        if let (Some(rate), Some(delay)) = (self.growth.as_constant(), self.reader.base_delay()) {
            return rate * delay;
        }
        linspace(window.start, window.end(), n.max(2))
            .into_iter()
            .map(|t| self.growth.integral(t - self.reader.effective_delay(t), t))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A delay functional `f(t, x_t)` together with its metadata.
#[derive(Clone)]
pub struct Model {
    rhs: RhsFn,
    /// Maximal delay.
    pub span: f64,
    pub equilibrium: f64,
    /// Trajectories must stay strictly above this value.
    pub domain_low: f64,
    /// Constant delay that the step must divide, if any.
    pub base_delay: Option<f64>,
    pub meta: ModelMeta,
    scalar: Option<SmoothScalarMap>,
    gle: Option<Arc<GleSpec>>,
    transform: Option<Arc<transform::TransformData>>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("span", &self.span)
            .field("equilibrium", &self.equilibrium)
            .field("domain_low", &self.domain_low)
            .field("base_delay", &self.base_delay)
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        })
    }
}

/// Rejects delays outside `(0, h_max]` on `n` samples of `[0, 10·h_max]`.
fn validate_delay(delay: &CoefficientFn, h_max: f64) -> Result<()> {
    positive("h_max", h_max)?;
    for t in linspace(0.0, 10.0 * h_max, DEFAULT_SAMPLES) {
        let h = delay.eval(t);
        if !(h > 0.0 && h <= h_max * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter {
                name: "h(t)",
                value: h,
                reason: "delay samples must lie in (0, h_max]",
            });
        }
    }
    Ok(())
}

impl Model {
    /// A user-supplied functional. Custom models carry no envelope and do
    /// not declare the divergence hypothesis.
    pub fn custom(
        label: &str,
        span: f64,
        domain_low: f64,
        rhs: impl Fn(f64, &HistoryView<'_>) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        let mut meta = ModelMeta::new(label, VerdictRoute::Unsupported);
        meta.h3_holds = false;
        Self {
            rhs: Arc::new(rhs),
            span,
            equilibrium: 0.0,
            domain_low,
            base_delay: None,
            meta,
            scalar: None,
            gle: None,
            transform: None,
        }
    }

    pub fn with_base_delay(mut self, delay: f64) -> Self {
        self.base_delay = Some(delay);
        self
    }

    pub fn with_equilibrium(mut self, equilibrium: f64) -> Self {
        self.equilibrium = equilibrium;
        self
    }

    /// Declares whether the divergence hypothesis holds.
    pub fn with_h3(mut self, holds: bool) -> Self {
        self.meta.h3_holds = holds;
        self
    }

    /// Attaches an envelope and the unit-delay verdict route.
    pub fn with_envelope(mut self, bound: RationalBound) -> Self {
        self.meta.a = Some(bound.a());
        self.meta.b = Some(bound.b());
        self.meta.route = VerdictRoute::Main;
        self
    }

    pub fn rhs(&self, t: f64, view: &HistoryView<'_>) -> Result<f64> {
        (self.rhs)(t, view)
    }

    pub fn family(&self) -> &str {
        &self.meta.family
    }

    /// The scalar nonlinearity whose envelope fit gives `meta.a`.
    pub fn scalar_nonlinearity(&self) -> Option<&SmoothScalarMap> {
        self.scalar.as_ref()
    }

    pub fn gle(&self) -> Option<&GleSpec> {
        self.gle.as_deref()
    }

    /// The fitted envelope recorded in the metadata.
    pub fn envelope(&self) -> Option<RationalBound> {
        match (self.meta.a, self.meta.b) {
            (Some(a), Some(b)) => RationalBound::new(a, b).ok(),
            _ => None,
        }
    }

    /// `x' = p(e^{−x(t−1)} − 1)`.
    pub fn make_wright(p: f64) -> Result<Self> {
        positive("p", p)?;
        let scalar = SmoothScalarMap::wright(p);
        let mut meta = ModelMeta::new("wright", VerdictRoute::Main).param("p", p);
        meta.a = Some(-p);
        meta.b = Some(0.5);
        Ok(Self {
            rhs: Arc::new(move |_, view| Ok(p * (-view.lookback(1.0)?).exp_m1())),
            span: 1.0,
            equilibrium: 0.0,
            domain_low: f64::NEG_INFINITY,
            base_delay: Some(1.0),
            meta,
            scalar: Some(scalar),
            gle: None,
            transform: None,
        })
    }

    /// `x' = −p·x(t − h(t))`. After rescaling time by `h_max` the envelope
    /// is linear with slope `−p·h_max`.
    pub fn make_linear_variable_delay(p: f64, delay: CoefficientFn, h_max: f64) -> Result<Self> {
        positive("p", p)?;
        validate_delay(&delay, h_max)?;
        let a = -p * h_max;
        let mut meta = ModelMeta::new("linear", VerdictRoute::Main)
            .param("p", p)
            .param("h_max", h_max);
        meta.a = Some(a);
        meta.b = Some(0.0);
        let base_delay = delay.as_constant().filter(|&h| h == h_max);
        Ok(Self {
            rhs: Arc::new(move |t, view| Ok(-p * view.lookback(delay.eval(t))?)),
            span: h_max,
            equilibrium: 0.0,
            domain_low: f64::NEG_INFINITY,
            base_delay,
            meta,
            scalar: Some(SmoothScalarMap::linear(a)),
            gle: None,
            transform: None,
        })
    }

    fn from_gle(spec: GleSpec, family: &str, route: VerdictRoute, window: Option<Window>) -> Result<Self> {
        let span = spec.reader.span();
        positive("span", span)?;
        let window = window.unwrap_or_else(|| Window::default_for(span));
        let lambda_cap = spec.lambda_cap(&window, DEFAULT_SAMPLES);
        let mut meta = ModelMeta::new(family, route);
        meta.lambda_cap = lambda_cap;
        meta.window = Some(window);
        meta.samples = Some(DEFAULT_SAMPLES);
        let equilibrium = spec.equilibrium();
        let base_delay = spec.reader.base_delay();
        let spec = Arc::new(spec);
        let rhs_spec = Arc::clone(&spec);
        Ok(Self {
            rhs: Arc::new(move |t, view| rhs_spec.rhs(t, view)),
            span,
            equilibrium,
            domain_low: 0.0,
            base_delay,
            meta,
            scalar: None,
            gle: Some(spec),
            transform: None,
        })
    }

    /// `x' = p·x(t)·(1 − x(t − h(t)))`. The delay measure is `Λ = p·h_max`,
    /// an upper bound for `sup ∫_{t−h(t)}^t p` since `h ≤ h_max`.
    pub fn make_logistic_vd(p: f64, delay: CoefficientFn, h_max: f64) -> Result<Self> {
        positive("p", p)?;
        validate_delay(&delay, h_max)?;
        let spec = GleSpec {
            growth: CoefficientFn::constant(p),
            nonlinearity: Nonlinearity::FoodLimited {
                k: 1.0,
                l: 1.0,
                nu: CoefficientFn::constant(0.0),
            },
            reader: Reader::PointDelay { delay, h_max },
        };
        let mut model = Self::from_gle(spec, "logistic", VerdictRoute::Apl, None)?;
        model.meta = model.meta.param("p", p).param("h_max", h_max);
        model.meta.a = Some(-1.0);
        model.meta.b = Some(0.0);
        model.meta.lambda_cap = p * h_max;
        model.meta.claim = Some("positive solutions converge to 1 when p·h_max ≤ 3/2".into());
        model.scalar = Some(SmoothScalarMap::linear(-1.0));
        Ok(model)
    }

    /// `N' = λ(t)·N·(k − N^l(t − h(t)))/(k + ν(t)·N^l(t − h(t)))`.
    pub fn make_food_limited(
        k: f64,
        l: f64,
        growth: CoefficientFn,
        nu: CoefficientFn,
        delay: CoefficientFn,
        h_max: f64,
        window: Option<Window>,
    ) -> Result<Self> {
        validate_delay(&delay, h_max)?;
        Self::food_limited_with_reader(k, l, growth, nu, Reader::PointDelay { delay, h_max }, "food_limited", window)
    }

    fn food_limited_with_reader(
        k: f64,
        l: f64,
        growth: CoefficientFn,
        nu: CoefficientFn,
        reader: Reader,
        family: &str,
        window: Option<Window>,
    ) -> Result<Self> {
        positive("k", k)?;
        positive("l", l)?;
        let window = window.unwrap_or_else(|| Window::default_for(reader.span()));
        let nu0 = nu.sampled_inf(window.start, window.end(), DEFAULT_SAMPLES);
        if nu0 < 0.0 {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: nu0,
                reason: "must be nonnegative",
            });
        }
        let rate_inf = growth.sampled_inf(window.start, window.end(), DEFAULT_SAMPLES);
        positive("lambda", rate_inf)?;
        let spec = GleSpec {
            growth,
            nonlinearity: Nonlinearity::FoodLimited { k, l, nu },
            reader,
        };
        let mut model = Self::from_gle(spec, family, VerdictRoute::FoodLimited, Some(window))?;
        model.meta = model.meta.param("k", k).param("l", l);
        model.meta.a = Some(-l / (1.0 + nu0));
        model.meta.l = Some(l);
        model.meta.nu0 = Some(nu0);
        model.scalar = Some(SmoothScalarMap::food_limited(l, nu0));
        Ok(model)
    }

    /// Replaces the delayed read of `base` with `max_{[t−h0, t]} N`.
    pub fn make_maxima_model(base: MaximaBase, h0: f64) -> Result<Self> {
        positive("h0", h0)?;
        let reader = Reader::MaxWindow { h0 };
        let mut model = match base {
            MaximaBase::Logistic { p } => {
                positive("p", p)?;
                let spec = GleSpec {
                    growth: CoefficientFn::constant(p),
                    nonlinearity: Nonlinearity::FoodLimited {
                        k: 1.0,
                        l: 1.0,
                        nu: CoefficientFn::constant(0.0),
                    },
                    reader,
                };
                let mut m = Self::from_gle(spec, "maxima", VerdictRoute::Apl, None)?;
                m.meta = m.meta.param("p", p);
                m.meta.a = Some(-1.0);
                m.meta.b = Some(0.0);
                m.scalar = Some(SmoothScalarMap::linear(-1.0));
                m
            }
            MaximaBase::FoodLimited { k, l, growth, nu } => {
                Self::food_limited_with_reader(k, l, growth, nu, reader, "maxima", None)?
            }
        };
        model.meta = model.meta.param("h0", h0);
        Ok(model)
    }

    /// Generalized logistic equation with nonlinearity `f(t, u) = r(u − 1)`.
    pub fn make_gle_rational(
        bound: RationalBound,
        growth: CoefficientFn,
        reader: Reader,
        window: Option<Window>,
    ) -> Result<Self> {
        let spec = GleSpec {
            growth,
            nonlinearity: Nonlinearity::Rational { bound },
            reader,
        };
        let mut model = Self::from_gle(spec, "gle_rational", VerdictRoute::Apl, window)?;
        model.meta.a = Some(bound.a());
        model.meta.b = Some(bound.b());
        model.scalar = Some(SmoothScalarMap::mobius(bound));
        Ok(model)
    }

    /// `x' = c·x(t − τ)`; unstable for `c > 0`.
    pub fn make_toy_linear(c: f64, tau: f64) -> Result<Self> {
        positive("tau", tau)?;
        let mut meta = ModelMeta::new("toy", VerdictRoute::Unsupported)
            .param("c", c)
            .param("tau", tau);
        meta.h3_holds = false;
        Ok(Self {
            rhs: Arc::new(move |_, view| Ok(c * view.lookback(tau)?)),
            span: tau,
            equilibrium: 0.0,
            domain_low: f64::NEG_INFINITY,
            base_delay: Some(tau),
            meta,
            scalar: None,
            gle: None,
            transform: None,
        })
    }
}

/// Base equations for [`Model::make_maxima_model`].
#[derive(Debug, Clone)]
pub enum MaximaBase {
    Logistic { p: f64 },
    FoodLimited {
        k: f64,
        l: f64,
        growth: CoefficientFn,
        nu: CoefficientFn,
    },
}

/// Checks `min φ ≤ 𝓛(t, φ) ≤ max φ` for the reader of a generalized
/// logistic model on `n` random positive histories.
pub fn check_reader_bracket(model: &Model, n: usize, seed: u64) -> Result<ConditionReport> {
    let spec = model
        .gle()
        .ok_or_else(|| Error::Precondition(format!("{} has no delayed-state reader", model.family())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kappa = spec.equilibrium();
    let mut lower = Tally::new(ConditionId::ReaderBracket, false);
    let mut upper = Tally::new(ConditionId::ReaderBracket, false);
    let window = model.meta.window.unwrap_or_else(|| Window::default_for(model.span));
    for _ in 0..n {
        let pre = Prehistory::random(model.span, 8, 0.1 * kappa, 2.0 * kappa, &mut rng);
        let t = window.start + rand::Rng::gen_range(&mut rng, 0.0..=window.width);
        let view = HistoryView::from_prehistory(&pre, t);
        let value = spec.reader.read(t, &view)?;
        let knots: Vec<(f64, f64)> = pre.knots().map(<[_]>::to_vec).unwrap_or_default();
        let (lo, hi) = (view.min_all(), view.max_all());
        lower.record(Witness {
            x: value,
            lhs: lo,
            rhs: value,
            t: Some(t),
            history: Some(knots.clone()),
        });
        upper.record(Witness {
            x: value,
            lhs: value,
            rhs: hi,
            t: Some(t),
            history: Some(knots),
        });
    }
    let low = lower.finish(n, None);
    let high = upper.finish(n, None);
    let mut witnesses = low.witnesses;
    witnesses.extend(high.witnesses);
    let holds = low.holds && high.holds;
    Ok(ConditionReport {
        condition_id: ConditionId::ReaderBracket,
        holds,
        grid_size: n,
        witnesses,
        outcome: if holds {
            crate::calculus::Outcome::Holds
        } else {
            crate::calculus::Outcome::Violated
        },
        skipped: 0,
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{fit_rational_bound, EnvelopeFit};
    use crate::integrator::{integrate, tail_metrics};

    fn fitted_a(model: &Model) -> f64 {
        match fit_rational_bound(model.scalar_nonlinearity().unwrap()).unwrap() {
            EnvelopeFit::Bound(b) => b.a(),
            EnvelopeFit::Reflect { a, .. } => a,
        }
    }

    #[test]
    fn wright_examples() {
        let m = Model::make_wright(1.5).unwrap();
        assert_eq!((m.meta.a, m.meta.b), (Some(-1.5), Some(0.5)));
        let zero = Prehistory::constant(1.0, 0.0);
        assert_eq!(m.rhs(0.0, &HistoryView::from_prehistory(&zero, 0.0)).unwrap(), 0.0);
        let one = Prehistory::constant(1.0, 1.0);
        let v = Model::make_wright(1.0)
            .unwrap()
            .rhs(0.0, &HistoryView::from_prehistory(&one, 0.0))
            .unwrap();
        assert!((v - ((-1f64).exp() - 1.0)).abs() < 1e-15);
        assert!(Model::make_wright(0.0).is_err());
    }

    #[test]
    fn linear_variable_delay_meta() {
        let m = Model::make_linear_variable_delay(1.0, CoefficientFn::constant(1.0), 1.0).unwrap();
        assert_eq!((m.meta.a, m.meta.b), (Some(-1.0), Some(0.0)));
        assert!(Model::make_linear_variable_delay(1.0, CoefficientFn::constant(2.0), 1.0).is_err());
    }

    #[test]
    fn food_limited_equilibria() {
        let m = Model::make_food_limited(
            8.0,
            3.0,
            CoefficientFn::constant(1.0),
            CoefficientFn::constant(0.0),
            CoefficientFn::constant(1.0),
            1.0,
            None,
        )
        .unwrap();
        assert!((m.equilibrium - 2.0).abs() < 1e-15);
        let pre = Prehistory::constant(1.0, m.equilibrium);
        let traj = integrate(&m, &pre, 10.0, 0.01).unwrap();
        assert!(traj.values().iter().all(|v| v.to_bits() == m.equilibrium.to_bits()));
    }

    #[test]
    fn food_limited_certificate_inputs() {
        let m = Model::make_food_limited(
            1.0,
            1.0,
            CoefficientFn::constant(1.0),
            CoefficientFn::constant(0.0),
            CoefficientFn::constant(1.5),
            1.5,
            None,
        )
        .unwrap();
        assert_eq!(m.equilibrium, 1.0);
        assert_eq!(m.meta.lambda_cap, 1.5);
        assert_eq!(m.meta.nu0, Some(0.0));
    }

    #[test]
    fn lambda_cap_for_constant_coefficients() {
        let spec = GleSpec {
            growth: CoefficientFn::constant(0.7),
            nonlinearity: Nonlinearity::Rational {
                bound: RationalBound::new(-1.0, 1.0).unwrap(),
            },
            reader: Reader::PointDelay {
                delay: CoefficientFn::constant(2.0),
                h_max: 2.0,
            },
        };
        assert_eq!(spec.lambda_cap(&Window::default_for(2.0), 1000), 1.4);
    }

    #[test]
    fn maxima_reads() {
        let m = Model::make_maxima_model(MaximaBase::Logistic { p: 1.0 }, 1.5).unwrap();
        let flat = Prehistory::constant(1.5, 0.7);
        let view = HistoryView::from_prehistory(&flat, 0.0);
        assert!((m.rhs(0.0, &view).unwrap() - 0.7 * 0.3).abs() < 1e-15);
        let rising = Prehistory::piecewise_linear(vec![(-1.5, 0.2), (0.0, 0.9)]).unwrap();
        let view = HistoryView::from_prehistory(&rising, 0.0);
        assert_eq!(m.gle().unwrap().reader.read(0.0, &view).unwrap(), 0.9);
    }

    #[test]
    fn catalog_slopes_match_fits() {
        let models = [
            Model::make_wright(1.3).unwrap(),
            Model::make_linear_variable_delay(0.8, CoefficientFn::constant(1.2), 1.2).unwrap(),
            Model::make_logistic_vd(1.0, CoefficientFn::constant(1.5), 1.5).unwrap(),
            Model::make_food_limited(
                1.0,
                2.0,
                CoefficientFn::constant(1.0),
                CoefficientFn::constant(0.5),
                CoefficientFn::constant(1.0),
                1.0,
                None,
            )
            .unwrap(),
        ];
        for m in &models {
            assert!((m.meta.a.unwrap() - fitted_a(m)).abs() < 1e-12, "{}", m.family());
        }
    }

    #[test]
    fn logistic_converges_under_stable_verdict() {
        let m = Model::make_logistic_vd(1.0, CoefficientFn::constant(1.0), 1.0).unwrap();
        let traj = integrate(&m, &Prehistory::constant(1.0, 0.5), 200.0, 0.01).unwrap();
        assert!(tail_metrics(&traj, 1.0, 0.25).unwrap().sup_dev < 1e-3);
    }

    #[test]
    fn readers_respect_bracket() {
        let m = Model::make_maxima_model(MaximaBase::Logistic { p: 1.0 }, 1.5).unwrap();
        assert!(check_reader_bracket(&m, 200, 3).unwrap().holds);
        let delay = CoefficientFn::custom("h", |t: f64| 0.75 * (1.0 + t.sin().powi(2)));
        let m = Model::make_logistic_vd(1.0, delay, 1.5).unwrap();
        assert!(check_reader_bracket(&m, 200, 4).unwrap().holds);

        let outside = GleSpec {
            growth: CoefficientFn::constant(1.0),
            nonlinearity: Nonlinearity::Rational {
                bound: RationalBound::new(-1.0, 0.0).unwrap(),
            },
            reader: Reader::Custom {
                label: "twice the present".into(),
                span: 1.0,
                f: Arc::new(|_, v| Ok(2.0 * v.current())),
            },
        };
        let m = Model::from_gle(outside, "custom", VerdictRoute::Unsupported, None).unwrap();
        let report = check_reader_bracket(&m, 50, 5).unwrap();
        assert!(!report.holds);
        assert!(!report.witnesses.is_empty());
    }
}
