//! Scalar nonlinearities `f: ℝ → ℝ` with derivatives up to order three,
//! the Schwarz derivative, rational-envelope fitting, and grid checks of
//! the envelope and of the sign / critical-point / Schwarzian conditions.
//!
//! Checks over grids are evidence at the declared resolution; a
//! [`ConditionReport`] records the resolution together with every
//! counterexample it found (up to [`MAX_WITNESSES`]).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::bounds::RationalBound;
use crate::error::{Error, Result};
use crate::numeric::linspace;

/// Points with `|f'(x)|` at or below this value are skipped by the
/// Schwarzian check and rejected by [`schwarz_derivative`].
pub const CRITICAL_GUARD: f64 = 1e-12;

/// Absolute slack separating "equal" from "violated" in weak inequalities.
pub const VIOLATION_MARGIN: f64 = 1e-12;

/// Reports keep at most this many witnesses.
pub const MAX_WITNESSES: usize = 64;

const FD_STEP_1: f64 = 1e-5;
const FD_STEP_2: f64 = 1e-4;
const FD_STEP_3: f64 = 1e-3;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A `C³` scalar map. Derivatives without an analytic form fall back to
/// central finite differences.
#[derive(Clone)]
pub struct SmoothScalarMap {
    label: String,
    eval: ScalarFn,
    derivs: [Option<ScalarFn>; 3],
    domain_low: f64,
}

impl fmt::Debug for SmoothScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothScalarMap")
            .field("label", &self.label)
            .field("analytic", &self.derivs.iter().map(Option::is_some).collect::<Vec<_>>())
            .field("domain_low", &self.domain_low)
            .finish()
    }
}

impl SmoothScalarMap {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(f),
            derivs: [None, None, None],
            domain_low: f64::NEG_INFINITY,
        }
    }

    pub fn with_derivatives(
        mut self,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.derivs = [Some(Arc::new(d1)), Some(Arc::new(d2)), Some(Arc::new(d3))];
        self
    }

    /// Open lower end of the domain.
    pub fn with_domain_low(mut self, low: f64) -> Self {
        self.domain_low = low;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain_low(&self) -> f64 {
        self.domain_low
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivs.iter().all(Option::is_some)
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn deriv1(&self, x: f64) -> f64 {
        match &self.derivs[0] {
            Some(d) => d(x),
            None => self.fd_deriv1(x),
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        match &self.derivs[1] {
            Some(d) => d(x),
            None => self.fd_deriv2(x),
        }
    }

    pub fn deriv3(&self, x: f64) -> f64 {
        match &self.derivs[2] {
            Some(d) => d(x),
            None => self.fd_deriv3(x),
        }
    }

    pub fn fd_deriv1(&self, x: f64) -> f64 {
        let h = FD_STEP_1 * x.abs().max(1.0);
        (self.value(x + h) - self.value(x - h)) / (2.0 * h)
    }

    pub fn fd_deriv2(&self, x: f64) -> f64 {
        let h = FD_STEP_2 * x.abs().max(1.0);
        (self.value(x + h) - 2.0 * self.value(x) + self.value(x - h)) / (h * h)
    }

    pub fn fd_deriv3(&self, x: f64) -> f64 {
        let h = FD_STEP_3 * x.abs().max(1.0);
        let f = |k: f64| self.value(x + k * h);
        (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h * h * h)
    }

    /// `x ↦ c·f(x)`.
    pub fn scaled(&self, c: f64) -> Self {
        let base = self.clone();
        let d = |k: usize| {
            let base = self.clone();
            move |x: f64| {
                c * match k {
                    0 => base.deriv1(x),
                    1 => base.deriv2(x),
                    _ => base.deriv3(x),
                }
            }
        };
        Self::new(format!("{c}*{}", self.label), move |x| c * base.value(x))
            .with_derivatives(d(0), d(1), d(2))
            .with_domain_low(self.domain_low)
    }

    /// `y ↦ −f(−y)`, the nonlinearity seen by `y = −x`.
    pub fn reflected(&self) -> Self {
        let (f0, f1, f2, f3) = (self.clone(), self.clone(), self.clone(), self.clone());
        Self::new(format!("reflected {}", self.label), move |y| {
            if -y > f0.domain_low {
                -f0.value(-y)
            } else {
                f64::NAN
            }
        })
        .with_derivatives(
            move |y| f1.deriv1(-y),
            move |y| -f2.deriv2(-y),
            move |y| f3.deriv3(-y),
        )
        // The reflected map lives on (-∞, -low), unbounded below.
    }

    /// `p(e^{−x} − 1)`.
    pub fn wright(p: f64) -> Self {
        Self::new(format!("wright p={p}"), move |x| p * (-x).exp_m1())
            .with_derivatives(
                move |x| -p * (-x).exp(),
                move |x| p * (-x).exp(),
                move |x| -p * (-x).exp(),
            )
    }

    /// `x ↦ ax`.
    pub fn linear(a: f64) -> Self {
        Self::new(format!("linear a={a}"), move |x| a * x)
            .with_derivatives(move |_| a, |_| 0.0, |_| 0.0)
    }

    /// The envelope `r(x) = ax/(1 + bx)` itself.
    pub fn mobius(bound: RationalBound) -> Self {
        let (a, b) = (bound.a(), bound.b());
        Self::new(format!("r a={a} b={b}"), move |x| a * x / (1.0 + b * x))
            .with_derivatives(
                move |x| a / (1.0 + b * x).powi(2),
                move |x| -2.0 * a * b / (1.0 + b * x).powi(3),
                move |x| 6.0 * a * b * b / (1.0 + b * x).powi(4),
            )
            .with_domain_low(bound.domain_low())
    }

    /// `(1 − (1+x)^l) / (1 + ν₀(1+x)^l)` on `x > −1`: the decreasing
    /// envelope of the food-limited nonlinearity.
    pub fn food_limited(l: f64, nu0: f64) -> Self {
        let q = move |u: f64| (1.0 - u) / (1.0 + nu0 * u);
        let q1 = move |u: f64| -(1.0 + nu0) / (1.0 + nu0 * u).powi(2);
        let q2 = move |u: f64| 2.0 * nu0 * (1.0 + nu0) / (1.0 + nu0 * u).powi(3);
        let q3 = move |u: f64| -6.0 * nu0 * nu0 * (1.0 + nu0) / (1.0 + nu0 * u).powi(4);
        let u = move |x: f64| (1.0 + x).powf(l);
        let u1 = move |x: f64| l * (1.0 + x).powf(l - 1.0);
        let u2 = move |x: f64| l * (l - 1.0) * (1.0 + x).powf(l - 2.0);
        let u3 = move |x: f64| l * (l - 1.0) * (l - 2.0) * (1.0 + x).powf(l - 3.0);
        Self::new(format!("food-limited l={l} nu0={nu0}"), move |x| q(u(x)))
            .with_derivatives(
                move |x| q1(u(x)) * u1(x),
                move |x| q2(u(x)) * u1(x).powi(2) + q1(u(x)) * u2(x),
                move |x| {
                    let (v, v1, v2, v3) = (u(x), u1(x), u2(x), u3(x));
                    q3(v) * v1.powi(3) + 3.0 * q2(v) * v1 * v2 + q1(v) * v3
                },
            )
            .with_domain_low(-1.0)
    }

    /// `(1 − e^{lx}) / (1 + ν₀ e^{lx})`: the food-limited envelope seen in
    /// logarithmic coordinates, `r̃(eˣ − 1)`.
    pub fn food_limited_log(l: f64, nu0: f64) -> Self {
        let q = move |u: f64| (1.0 - u) / (1.0 + nu0 * u);
        let q1 = move |u: f64| -(1.0 + nu0) / (1.0 + nu0 * u).powi(2);
        let q2 = move |u: f64| 2.0 * nu0 * (1.0 + nu0) / (1.0 + nu0 * u).powi(3);
        let q3 = move |u: f64| -6.0 * nu0 * nu0 * (1.0 + nu0) / (1.0 + nu0 * u).powi(4);
        let u = move |x: f64| (l * x).exp();
        Self::new(format!("food-limited log l={l} nu0={nu0}"), move |x| q(u(x)))
            .with_derivatives(
                move |x| q1(u(x)) * l * u(x),
                move |x| {
                    let v = u(x);
                    q2(v) * (l * v).powi(2) + q1(v) * l * l * v
                },
                move |x| {
                    let v = u(x);
                    q3(v) * (l * v).powi(3) + 3.0 * q2(v) * (l * v) * (l * l * v) + q1(v) * l.powi(3) * v
                },
            )
    }
}

/// `Sf(x) = f'''(x)/f'(x) − (3/2)(f''(x)/f'(x))²`.
pub fn schwarz_derivative(f: &SmoothScalarMap, x: f64) -> Result<f64> {
    let d1 = f.deriv1(x);
    if !(d1.abs() > CRITICAL_GUARD) {
        return Err(Error::CriticalPoint { x, slope: d1 });
    }
    let ratio = f.deriv2(x) / d1;
    Ok(f.deriv3(x) / d1 - 1.5 * ratio * ratio)
}

/// Outcome of [`fit_rational_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeFit {
    Bound(RationalBound),
    /// `f''(0)` has the wrong sign for `b ≥ 0`; refit `y ↦ −f(−y)`
    /// (see [`SmoothScalarMap::reflected`]), whose curvature is `−raw_b`.
    Reflect { a: f64, raw_b: f64 },
}

/// Fits `a = f'(0)`, `b = −f''(0)/(2f'(0))`.
pub fn fit_rational_bound(f: &SmoothScalarMap) -> Result<EnvelopeFit> {
    let f0 = f.value(0.0);
    if f0.abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "{}: f(0) = {f0} is not zero",
            f.label()
        )));
    }
    let a = f.deriv1(0.0);
    if !(a < 0.0) {
        return Err(Error::NegativeFeedback { slope: a });
    }
    let raw_b = -f.deriv2(0.0) / (2.0 * a);
    if raw_b < 0.0 {
        return Ok(EnvelopeFit::Reflect { a, raw_b });
    }
    // -0.0 from f''(0) = 0 is normalized to 0.
    Ok(EnvelopeFit::Bound(RationalBound::new(a, raw_b.max(0.0))?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionId {
    A1,
    A2,
    A3,
    #[serde(rename = "GY-lower")]
    GyLower,
    #[serde(rename = "GY-upper")]
    GyUpper,
    #[serde(rename = "envelope")]
    Envelope,
    /// `min φ ≤ 𝓛(t, φ) ≤ max φ` for a user-supplied reader.
    #[serde(rename = "reader-bracket")]
    ReaderBracket,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Holds,
    /// Both sides coincide at every evaluated point.
    DegenerateEqual,
    Violated,
}

/// A counterexample (or, for degenerate reports, a sample point). The
/// intended relation is `lhs ≤ rhs` for weak inequalities and `lhs < rhs`
/// for strict ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Knots `(s, φ(s))` of a piecewise-linear history, `s ∈ [−span, 0]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<(f64, f64)>>,
}

impl Witness {
    pub fn point(x: f64, lhs: f64, rhs: f64) -> Self {
        Self {
            x,
            lhs,
            rhs,
            t: None,
            history: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition_id: ConditionId,
    pub holds: bool,
    pub grid_size: usize,
    pub witnesses: Vec<Witness>,
    pub outcome: Outcome,
    /// Points excluded from the check (critical-point guard, domain).
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Accumulates `lhs ≤ rhs` comparisons (or `lhs < rhs` when `strict`).
pub(crate) struct Tally {
    id: ConditionId,
    strict: bool,
    checked: usize,
    equal: usize,
    violations: usize,
    skipped: usize,
    witnesses: Vec<Witness>,
    first_equal: Option<Witness>,
}

impl Tally {
    pub(crate) fn new(id: ConditionId, strict: bool) -> Self {
        Self {
            id,
            strict,
            checked: 0,
            equal: 0,
            violations: 0,
            skipped: 0,
            witnesses: Vec::new(),
            first_equal: None,
        }
    }

    pub(crate) fn skip(&mut self) {
        self.skipped += 1;
    }

    pub(crate) fn record(&mut self, w: Witness) {
        self.checked += 1;
        let gap = w.lhs - w.rhs;
        let equal = gap.abs() <= VIOLATION_MARGIN;
        let violated = gap > VIOLATION_MARGIN || gap.is_nan() || (self.strict && equal);
        if equal {
            self.equal += 1;
            if self.first_equal.is_none() {
                self.first_equal = Some(w.clone());
            }
        }
        if violated {
            self.violations += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w);
            }
        }
    }

    pub(crate) fn finish(self, grid_size: usize, note: Option<String>) -> ConditionReport {
        let degenerate = self.checked > 0 && self.equal == self.checked;
        let outcome = if degenerate {
            Outcome::DegenerateEqual
        } else if self.violations > 0 {
            Outcome::Violated
        } else {
            Outcome::Holds
        };
        let holds = self.violations == 0;
        let mut witnesses = self.witnesses;
        if degenerate && witnesses.is_empty() {
            witnesses.extend(self.first_equal);
        }
        ConditionReport {
            condition_id: self.id,
            holds,
            grid_size,
            witnesses,
            outcome,
            skipped: self.skipped,
            note,
        }
    }
}

/// Grid check of the envelope: `f(x) ≤ r(x)` on the negative side and
/// `r(x) ≤ f(x)` on `(0, x_max]`, with `n` points per side.
pub fn check_envelope(
    f: &SmoothScalarMap,
    bound: &RationalBound,
    x_max: f64,
    n: usize,
) -> Result<ConditionReport> {
    if n < 2 {
        return Err(Error::Precondition(format!("envelope check needs n >= 2, got {n}")));
    }
    if !(x_max > 0.0) {
        return Err(Error::Precondition(format!("x_max must be positive, got {x_max}")));
    }
    let lo = f.domain_low().max(bound.domain_low()).max(-x_max);
    let mut tally = Tally::new(ConditionId::Envelope, false);
    for k in 1..=n {
        let x = lo * (1.0 - k as f64 / (n + 1) as f64);
        let r = bound.eval(x)?;
        tally.record(Witness::point(x, f.value(x), r));
    }
    for k in 1..=n {
        let x = x_max * k as f64 / n as f64;
        let r = bound.eval(x)?;
        tally.record(Witness::point(x, r, f.value(x)));
    }
    Ok(tally.finish(2 * n, None))
}

/// Grid evidence for the sign condition, the single-critical-point /
/// lower-boundedness condition and negativity of the Schwarzian on
/// `x_range`, in that order.
pub fn check_a_conditions(
    f: &SmoothScalarMap,
    x_range: (f64, f64),
    n: usize,
) -> Result<Vec<ConditionReport>> {
    let (lo, hi) = x_range;
    if n < 100 {
        return Err(Error::Precondition(format!("grid resolution must be >= 100, got {n}")));
    }
    if !(lo < hi) {
        return Err(Error::Precondition(format!("empty range [{lo}, {hi}]")));
    }
    let grid = linspace(lo.max(f.domain_low()), hi, n);

    // (A1): x f(x) < 0 away from zero, and f'(0) < 0. Strict sign test, no
    // margin: near zero x f(x) is tiny but still has the right sign.
    let mut sign_violations = Vec::new();
    for &x in &grid {
        if x == 0.0 {
            continue;
        }
        let product = x * f.value(x);
        if !(product < 0.0) {
            sign_violations.push(Witness::point(x, product, 0.0));
        }
    }
    let slope0 = f.deriv1(0.0);
    if !(slope0 < 0.0) {
        sign_violations.push(Witness::point(0.0, slope0, 0.0));
    }
    let a1 = if sign_violations.is_empty() {
        ConditionReport {
            condition_id: ConditionId::A1,
            holds: true,
            grid_size: grid.len(),
            witnesses: Vec::new(),
            outcome: Outcome::Holds,
            skipped: 0,
            note: None,
        }
    } else {
        let count = sign_violations.len();
        sign_violations.truncate(MAX_WITNESSES);
        ConditionReport {
            condition_id: ConditionId::A1,
            holds: false,
            grid_size: grid.len(),
            witnesses: sign_violations,
            outcome: Outcome::Violated,
            skipped: 0,
            note: Some(format!("{count} grid points violate x f(x) < 0")),
        }
    };

    // (A2): sign changes of f' between strictly signed neighbours.
    let mut changes = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for &x in &grid {
        let d = f.deriv1(x);
        if d == 0.0 || d.is_nan() {
            continue;
        }
        if let Some((px, pd)) = last {
            if pd.signum() != d.signum() {
                changes.push(Witness::point(0.5 * (px + x), pd, d));
            }
        }
        last = Some((x, d));
    }
    let bounded_note = lower_bound_probe(f, lo.max(f.domain_low()), hi);
    let a2_holds = changes.len() <= 1;
    let a2 = ConditionReport {
        condition_id: ConditionId::A2,
        holds: a2_holds,
        grid_size: grid.len(),
        witnesses: if a2_holds { Vec::new() } else { changes.into_iter().take(MAX_WITNESSES).collect() },
        outcome: if a2_holds { Outcome::Holds } else { Outcome::Violated },
        skipped: 0,
        note: bounded_note,
    };

    // (A3): Sf < 0 wherever |f'| clears the guard.
    let mut schwarz = Tally::new(ConditionId::A3, true);
    for &x in &grid {
        match schwarz_derivative(f, x) {
            Ok(s) => schwarz.record(Witness::point(x, s, 0.0)),
            Err(_) => schwarz.skip(),
        }
    }
    let a3 = schwarz.finish(grid.len(), None);

    Ok(vec![a1, a2, a3])
}

/// Probes `f` at geometrically growing distances beyond the range ends.
/// Returns a note when the probed values keep dropping without settling,
/// which a finite grid cannot distinguish from unboundedness.
fn lower_bound_probe(f: &SmoothScalarMap, lo: f64, hi: f64) -> Option<String> {
    let mut flagged = Vec::new();
    for (end, dir) in [(hi, 1.0), (lo, -1.0)] {
        if !end.is_finite() {
            continue;
        }
        let base = end.abs().max(1.0);
        let probes: Vec<f64> = (0..8)
            .map(|k| end + dir * base * (2f64.powi(k) - 1.0))
            .filter(|&x| x > f.domain_low())
            .map(|x| f.value(x))
            .collect();
        let drops: Vec<f64> = probes.windows(2).map(|w| w[0] - w[1]).collect();
        let settling = drops
            .windows(2)
            .all(|w| w[1] <= 0.0 || w[1] <= 0.5 * w[0].max(0.0));
        if !settling {
            flagged.push(if dir > 0.0 { "right" } else { "left" });
        }
    }
    (!flagged.is_empty()).then(|| {
        format!(
            "lower boundedness inconclusive: f keeps decreasing beyond the {} end of the range",
            flagged.join(" and ")
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn schwarzian_of_wright_is_minus_half() {
        for p in [0.3, 1.0, 1.5] {
            let f = SmoothScalarMap::wright(p);
            for x in [-2.0, -0.3, 0.0, 1.0, 4.0] {
                assert_abs_diff_eq!(schwarz_derivative(&f, x).unwrap(), -0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn schwarzian_of_mobius_vanishes() {
        let r = SmoothScalarMap::mobius(RationalBound::new(-1.3, 0.7).unwrap());
        for x in [-1.2, -0.5, 0.0, 2.0, 30.0] {
            assert!(schwarz_derivative(&r, x).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn schwarzian_of_negative_cube() {
        let f = SmoothScalarMap::new("-x^3", |x| -x * x * x)
            .with_derivatives(|x| -3.0 * x * x, |x| -6.0 * x, |_| -6.0);
        assert_abs_diff_eq!(schwarz_derivative(&f, 1.0).unwrap(), -4.0, epsilon = 1e-15);
        assert!(matches!(
            schwarz_derivative(&f, 0.0),
            Err(Error::CriticalPoint { .. })
        ));
    }

    #[test]
    fn schwarzian_is_invariant_under_scaling() {
        let f = SmoothScalarMap::wright(1.2);
        for c in [-3.0, 0.5, 7.0] {
            let g = f.scaled(c);
            for x in [-1.0, 0.5, 2.0] {
                let diff = schwarz_derivative(&g, x).unwrap() - schwarz_derivative(&f, x).unwrap();
                assert!(diff.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn finite_differences_track_analytic_derivatives() {
        let p = 1.5;
        let analytic = SmoothScalarMap::wright(p);
        let numeric = SmoothScalarMap::new("wright fd", move |x| p * (-x).exp_m1());
        for x in linspace(-2.0, 5.0, 71) {
            let rel = |num: f64, exact: f64| ((num - exact) / exact).abs();
            assert!(rel(numeric.deriv1(x), analytic.deriv1(x)) < 1e-5, "x = {x}");
            assert!(rel(numeric.deriv2(x), analytic.deriv2(x)) < 1e-5, "x = {x}");
            assert!(rel(numeric.deriv3(x), analytic.deriv3(x)) < 1e-4, "x = {x}");
        }
    }

    #[test]
    fn fit_examples() {
        match fit_rational_bound(&SmoothScalarMap::wright(1.5)).unwrap() {
            EnvelopeFit::Bound(b) => {
                assert_abs_diff_eq!(b.a(), -1.5, epsilon = 1e-15);
                assert_abs_diff_eq!(b.b(), 0.5, epsilon = 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        match fit_rational_bound(&SmoothScalarMap::linear(-0.7)).unwrap() {
            EnvelopeFit::Bound(b) => assert_eq!((b.a(), b.b()), (-0.7, 0.0)),
            other => panic!("unexpected {other:?}"),
        }
        let quad = SmoothScalarMap::new("-x-x^2", |x| -x - x * x)
            .with_derivatives(|x| -1.0 - 2.0 * x, |_| -2.0, |_| 0.0);
        assert_eq!(
            fit_rational_bound(&quad).unwrap(),
            EnvelopeFit::Reflect { a: -1.0, raw_b: -1.0 }
        );
        match fit_rational_bound(&quad.reflected()).unwrap() {
            EnvelopeFit::Bound(b) => assert_eq!((b.a(), b.b()), (-1.0, 1.0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fit_rejects_positive_feedback() {
        assert!(matches!(
            fit_rational_bound(&SmoothScalarMap::linear(0.5)),
            Err(Error::NegativeFeedback { .. })
        ));
    }

    #[test]
    fn envelope_examples() {
        let f = SmoothScalarMap::wright(1.5);
        let bound = RationalBound::new(-1.5, 0.5).unwrap();
        let report = check_envelope(&f, &bound, 10.0, 1000).unwrap();
        assert!(report.holds);
        assert_eq!(report.outcome, Outcome::Holds);
        assert_eq!(report.grid_size, 2000);

        let own = check_envelope(&SmoothScalarMap::mobius(bound), &bound, 10.0, 100).unwrap();
        assert!(own.holds);
        assert_eq!(own.outcome, Outcome::DegenerateEqual);

        let lin = RationalBound::new(-0.8, 0.0).unwrap();
        let same = check_envelope(&SmoothScalarMap::linear(-0.8), &lin, 5.0, 100).unwrap();
        assert_eq!(same.outcome, Outcome::DegenerateEqual);
    }

    #[test]
    fn envelope_violation_has_witnesses() {
        // A steeper linear map crosses below r on the positive side.
        let bound = RationalBound::new(-1.0, 0.0).unwrap();
        let report = check_envelope(&SmoothScalarMap::linear(-2.0), &bound, 5.0, 50).unwrap();
        assert!(!report.holds);
        assert!(!report.witnesses.is_empty());
        for w in &report.witnesses {
            assert!(w.lhs - w.rhs > VIOLATION_MARGIN);
        }
    }

    #[test]
    fn a_conditions_for_wright() {
        let reports = check_a_conditions(&SmoothScalarMap::wright(1.0), (-5.0, 20.0), 1000).unwrap();
        assert!(reports.iter().all(|r| r.holds), "{reports:?}");
        assert!(reports[1].note.is_none());
    }

    #[test]
    fn a_conditions_for_negative_identity() {
        let reports = check_a_conditions(&SmoothScalarMap::linear(-1.0), (-5.0, 20.0), 1000).unwrap();
        assert!(reports[0].holds);
        assert!(reports[1].holds);
        assert!(reports[1].note.is_some(), "unbounded below should be flagged");
        assert!(!reports[2].holds);
        assert_eq!(reports[2].outcome, Outcome::DegenerateEqual);
    }

    #[test]
    fn a_conditions_for_identity() {
        let reports = check_a_conditions(&SmoothScalarMap::linear(1.0), (-1.0, 1.0), 101).unwrap();
        assert!(!reports[0].holds);
        assert!(reports[0].witnesses.iter().any(|w| w.x == -1.0));
        for w in &reports[0].witnesses {
            assert!(w.lhs >= 0.0);
        }
    }

    #[test]
    fn a_conditions_count_extra_critical_points() {
        let f = SmoothScalarMap::new("-x cos x", |x| -x * x.cos());
        let reports = check_a_conditions(&f, (-10.0, 10.0), 2000).unwrap();
        assert!(!reports[1].holds);
        assert!(reports[1].witnesses.len() > 1);
    }

    #[test]
    fn report_json_shape() {
        let bound = RationalBound::new(-1.0, 0.0).unwrap();
        let report = check_envelope(&SmoothScalarMap::linear(-2.0), &bound, 1.0, 2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["condition_id"], "envelope");
        assert_eq!(v["holds"], false);
        assert_eq!(v["grid_size"], 4);
        assert!(v["witnesses"][0]["x"].is_number());
        assert!(v["witnesses"][0]["lhs"].is_number());
        assert!(v["witnesses"][0]["rhs"].is_number());
    }
}
