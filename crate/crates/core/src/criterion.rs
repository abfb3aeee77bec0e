//! Stability verdicts from envelope parameters, sampled verification of the
//! functional sandwich `r(M(φ)) ≤ f(t, φ) ≤ r(−M(−φ))`, and the m–M
//! iteration that bounds the limit superior of oscillating solutions.
//!
//! Verdict comparisons against `3/2` are exact (zero tolerance). Callers
//! who want robustness round their inputs first.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::RationalBound;
use crate::calculus::{ConditionId, ConditionReport, Tally, Witness};
use crate::error::{Error, Result};
use crate::integrator::{HistoryView, Prehistory};
use crate::models::{Model, VerdictRoute, Window};

pub const THREE_HALVES: f64 = 1.5;

/// The m–M iteration stops once the upper bound drops below this value.
pub const DECAY_FLOOR: f64 = 1e-8;

/// Knots per random history in [`verify_gy_functional`].
pub const HISTORY_KNOTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    GloballyStable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theorem {
    /// Unit-delay equation with envelope `(a, b)`.
    #[serde(rename = "main")]
    Main,
    /// Generalized logistic equation with delay measure `Λ`.
    #[serde(rename = "apl")]
    Apl,
    /// Food-limited equation.
    #[serde(rename = "flm")]
    FoodLimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub a: f64,
    pub b: Option<f64>,
    pub lambda: f64,
    pub strict_needed: bool,
    /// `3/2 − |a|Λ`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub status: Status,
    pub theorem: Option<Theorem>,
    pub certificate: Certificate,
    pub reason: String,
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        self.status == Status::GloballyStable
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdicts serialize")
    }
}

fn verdict(theorem: Theorem, certificate: Certificate, stable_reason: String, fail_reason: String) -> StabilityVerdict {
    let holds = if certificate.strict_needed {
        certificate.margin > 0.0
    } else {
        certificate.margin >= 0.0
    };
    StabilityVerdict {
        status: if holds {
            Status::GloballyStable
        } else {
            Status::Inconclusive
        },
        theorem: Some(theorem),
        certificate,
        reason: if holds { stable_reason } else { fail_reason },
    }
}

fn relation(strict: bool) -> &'static str {
    if strict {
        "<"
    } else {
        "≤"
    }
}

/// Unit-delay verdict: stable iff `b > 0, |a| ≤ 3/2` or `b = 0, |a| < 3/2`.
pub fn decide_theorem_main(a: f64, b: f64) -> Result<StabilityVerdict> {
    RationalBound::new(a, b)?;
    let strict = b == 0.0;
    let certificate = Certificate {
        a,
        b: Some(b),
        lambda: 1.0,
        strict_needed: strict,
        margin: THREE_HALVES - a.abs(),
    };
    let rel = relation(strict);
    let fail = if strict && a.abs() == THREE_HALVES {
        "b = 0 needs |a| < 3/2; at |a| = 3/2 the constant is sharp and a nontrivial periodic solution exists"
            .to_owned()
    } else {
        format!("|a| = {} exceeds 3/2", a.abs())
    };
    Ok(verdict(
        Theorem::Main,
        certificate,
        format!("|a| = {} {rel} 3/2 with b = {b}", a.abs()),
        fail,
    ))
}

/// Generalized logistic verdict: stable iff `|a|Λ ≤ 3/2`, strictly when
/// `b = 1/2`.
pub fn decide_theorem_apl(a: f64, b: f64, lambda: f64) -> Result<StabilityVerdict> {
    RationalBound::new(a, b)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            reason: "delay measure must be positive",
        });
    }
    let strict = b == 0.5;
    let value = a.abs() * lambda;
    let certificate = Certificate {
        a,
        b: Some(b),
        lambda,
        strict_needed: strict,
        margin: THREE_HALVES - value,
    };
    let rel = relation(strict);
    Ok(verdict(
        Theorem::Apl,
        certificate,
        format!("|a|Λ = {value} {rel} 3/2 with b = {b}"),
        if strict && value == THREE_HALVES {
            "b = 1/2 needs |a|Λ < 3/2 strictly".to_owned()
        } else {
            format!("|a|Λ = {value} exceeds 3/2")
        },
    ))
}

/// Food-limited verdict: stable iff `lΛ/(1 + ν₀) ≤ 3/2`, strictly when
/// `ν₀ = 1`. The certificate slope is `a = −l/(1 + ν₀)`.
pub fn decide_food_limited(l: f64, nu0: f64, lambda: f64) -> Result<StabilityVerdict> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "l",
            value: l,
            reason: "exponent must be positive",
        });
    }
    if !(nu0 >= 0.0 && nu0.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "nu0",
            value: nu0,
            reason: "must be nonnegative",
        });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            value: lambda,
            reason: "delay measure must be positive",
        });
    }
    let strict = nu0 == 1.0;
    let a = -l / (1.0 + nu0);
    let value = l * lambda / (1.0 + nu0);
    let certificate = Certificate {
        a,
        b: None,
        lambda,
        strict_needed: strict,
        margin: THREE_HALVES - value,
    };
    let rel = relation(strict);
    Ok(verdict(
        Theorem::FoodLimited,
        certificate,
        format!("lΛ/(1 + ν₀) = {value} {rel} 3/2 with ν₀ = {nu0}; positive solutions converge to k^(1/l)"),
        if strict && value == THREE_HALVES {
            "ν₀ = 1 needs lΛ/(1 + ν₀) < 3/2 strictly".to_owned()
        } else {
            format!("lΛ/(1 + ν₀) = {value} exceeds 3/2")
        },
    ))
}

/// The verdict for a catalog model, dispatched on its route.
pub fn assess(model: &Model) -> Result<StabilityVerdict> {
    let meta = &model.meta;
    let inconclusive = |reason: String| StabilityVerdict {
        status: Status::Inconclusive,
        theorem: None,
        certificate: Certificate {
            a: meta.a.unwrap_or(f64::NAN),
            b: meta.b,
            lambda: meta.lambda_cap,
            strict_needed: false,
            margin: meta.a.map_or(f64::NAN, |a| THREE_HALVES - a.abs() * meta.lambda_cap),
        },
        reason,
    };
    if !meta.h3_holds {
        return Ok(inconclusive(format!(
            "{}: the divergence hypothesis is not declared",
            meta.family
        )));
    }
    let missing = |what: &str| Error::Precondition(format!("{} metadata lacks {what}", meta.family));
    match meta.route {
        VerdictRoute::Main => decide_theorem_main(meta.a.ok_or_else(|| missing("a"))?, meta.b.ok_or_else(|| missing("b"))?),
        VerdictRoute::Apl => decide_theorem_apl(
            meta.a.ok_or_else(|| missing("a"))?,
            meta.b.ok_or_else(|| missing("b"))?,
            meta.lambda_cap,
        ),
        VerdictRoute::FoodLimited => decide_food_limited(
            meta.l.ok_or_else(|| missing("l"))?,
            meta.nu0.ok_or_else(|| missing("nu0"))?,
            meta.lambda_cap,
        ),
        VerdictRoute::Unsupported => Ok(inconclusive(format!("{}: no envelope is known", meta.family))),
    }
}

/// Sampled check of both sides of the functional sandwich.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GyReport {
    pub lower: ConditionReport,
    pub upper: ConditionReport,
}

impl GyReport {
    pub fn holds(&self) -> bool {
        self.lower.holds && self.upper.holds
    }

    pub fn witnesses(&self) -> impl Iterator<Item = (&ConditionReport, &Witness)> {
        [&self.lower, &self.upper]
            .into_iter()
            .flat_map(|r| r.witnesses.iter().map(move |w| (r, w)))
    }
}

/// Value range of the random histories: `[max(0.9·(−1/b), −5), 5]`.
pub fn history_range(bound: &RationalBound) -> (f64, f64) {
    ((0.9 * bound.domain_low()).max(-5.0), 5.0)
}

/// Checks `r(M(φ)) ≤ f(t, φ)` on `n_samples` seeded random histories and
/// `f(t, φ) ≤ r(−M(−φ))` on those with `min φ > −1/b`. Witnesses carry the
/// sample time and the history knots.
pub fn verify_gy_functional(model: &Model, bound: &RationalBound, n_samples: usize, seed: u64) -> Result<GyReport> {
    if model.equilibrium != 0.0 {
        return Err(Error::Precondition(format!(
            "{} has equilibrium {}; transform it to canonical form first",
            model.family(),
            model.equilibrium
        )));
    }
    let (lo, hi) = history_range(bound);
    let window = model.meta.window.unwrap_or_else(|| Window::default_for(model.span));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lower = Tally::new(ConditionId::GyLower, false);
    let mut upper = Tally::new(ConditionId::GyUpper, false);
    for _ in 0..n_samples {
        let pre = Prehistory::random(model.span, HISTORY_KNOTS, lo, hi, &mut rng);
        let t = window.start + rng.gen_range(0.0..=window.width);
        let view = HistoryView::from_prehistory(&pre, t);
        let value = match model.rhs(t, &view) {
            Ok(v) => v,
            Err(Error::Domain { .. }) => {
                lower.skip();
                upper.skip();
                continue;
            }
            Err(e) => return Err(e),
        };
        let knots = pre.knots().map(<[_]>::to_vec);
        let yorke = view.max_all().max(0.0);
        lower.record(Witness {
            x: yorke,
            lhs: bound.eval(yorke)?,
            rhs: value,
            t: Some(t),
            history: knots.clone(),
        });
        let least = view.min_all();
        if bound.contains(least) {
            let x = least.min(0.0);
            upper.record(Witness {
                x,
                lhs: value,
                rhs: bound.eval(x)?,
                t: Some(t),
                history: knots,
            });
        } else {
            upper.skip();
        }
    }
    Ok(GyReport {
        lower: lower.finish(n_samples, None),
        upper: upper.finish(n_samples, Some("checked only where min φ > −1/b".into())),
    })
}

/// Largest `|f(t, φ)|` seen over `n_samples` random histories with values
/// in `[q, q + 10]`: sampled evidence for boundedness on histories bounded
/// below, not a proof.
pub fn sample_boundedness(model: &Model, q: f64, n_samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let window = model.meta.window.unwrap_or_else(|| Window::default_for(model.span));
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let pre = Prehistory::random(model.span, HISTORY_KNOTS, q, q + 10.0, &mut rng);
        let t = window.start + rng.gen_range(0.0..=window.width);
        worst = worst.max(model.rhs(t, &HistoryView::from_prehistory(&pre, t))?.abs());
    }
    Ok(worst)
}

/// The composed map used to bound `M_{k+1}` from `M_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MmMap {
    /// `m = r(−r(M)/2)`, `M' = r(m)`, i.e. `M' = λ(M)`.
    Lambda,
    /// `m = D(M)`, `M' = A(m)`, dominated by `R∘R(M)`.
    SharpenedRr,
    /// `m = R(M)`, `M' = R(m)`.
    Rr,
    /// `b = 0`: `M' = (a + 1/2)²M` or `M' = |a|³M/2`.
    LinearChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmStep {
    pub k: usize,
    /// `M_k`.
    pub upper: f64,
    /// The lower bound `m_k` derived from `M_k`.
    pub lower: f64,
    /// `R∘R(M_k)` where the sharpened map is used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MmOutcome {
    /// `M` fell below [`DECAY_FLOOR`] with strict decrease at every step.
    Decayed,
    /// Step `k` failed to decrease `M`.
    NonContracting { k: usize },
    /// `max_iter` steps decreased `M` without reaching the floor.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmTrace {
    pub map: MmMap,
    /// Contraction factor of the linear chain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    pub steps: Vec<MmStep>,
    /// The bound after the last step.
    pub final_upper: f64,
    pub outcome: MmOutcome,
}

impl MmTrace {
    pub fn uppers(&self) -> Vec<f64> {
        self.steps
            .iter()
            .map(|s| s.upper)
            .chain(std::iter::once(self.final_upper))
            .collect()
    }
}

/// Iterates the m–M bounds from `M₀`. Curvature `b > 0` is handled in the
/// normalized variable `bx` and reported in the original scale.
pub fn mm_iteration(bound: &RationalBound, m0: f64, max_iter: usize) -> Result<MmTrace> {
    if !(m0 > 0.0 && m0.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "M0",
            value: m0,
            reason: "must be positive",
        });
    }
    let a = bound.a();
    let (norm, scale) = bound.normalized();
    let (map, factor) = if bound.b() == 0.0 {
        let factor = if a > -1.0 { a.abs().powi(3) / 2.0 } else { (a + 0.5).powi(2) };
        (MmMap::LinearChain, Some(factor))
    } else if a >= -1.25 {
        (MmMap::Lambda, None)
    } else if a >= -1.5 {
        (MmMap::SharpenedRr, None)
    } else {
        (MmMap::Rr, None)
    };

    // One step in the normalized variable: (m_k, M_{k+1}, envelope).
    let step = |m: f64| -> Result<(f64, f64, Option<f64>)> {
        Ok(match map {
            MmMap::LinearChain => {
                if a > -1.0 {
                    let lower = -a * a * m / 2.0;
                    (lower, a * lower, None)
                } else {
                    let lower = (a + 0.5) * m;
                    (lower, (a + 0.5) * lower, None)
                }
            }
            MmMap::Lambda => {
                let lower = norm.eval(-norm.eval(m)? / 2.0)?;
                (lower, norm.eval(lower)?, None)
            }
            MmMap::SharpenedRr => {
                let lower = norm.bound_d(m)?.value;
                (lower, norm.bound_a(lower)?, Some(norm.rr_map(m)?))
            }
            MmMap::Rr => {
                let lower = norm.bound_r(m)?;
                (lower, norm.bound_r(lower)?, None)
            }
        })
    };

    let mut steps = Vec::new();
    let mut current = m0 * scale;
    let mut outcome = MmOutcome::Exhausted;
    for k in 0..max_iter {
        let (lower, next, envelope) = step(current)?;
        steps.push(MmStep {
            k,
            upper: current / scale,
            lower: lower / scale,
            envelope: envelope.map(|e| e / scale),
        });
        if !(next < current) {
            outcome = MmOutcome::NonContracting { k };
            current = next;
            break;
        }
        current = next;
        if current < DECAY_FLOOR * scale {
            outcome = MmOutcome::Decayed;
            break;
        }
    }
    Ok(MmTrace {
        map,
        factor,
        steps,
        final_upper: current / scale,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Outcome;

    #[test]
    fn main_examples() {
        let v = decide_theorem_main(-1.5, 1.0).unwrap();
        assert_eq!((v.status, v.theorem), (Status::GloballyStable, Some(Theorem::Main)));
        assert_eq!(decide_theorem_main(-1.5, 0.0).unwrap().status, Status::Inconclusive);
        assert!(decide_theorem_main(-1.2, 0.0).unwrap().is_stable());
        assert!(decide_theorem_main(0.1, 1.0).is_err());
        assert!(decide_theorem_main(-1.0, -0.5).is_err());
    }

    #[test]
    fn apl_examples() {
        assert!(decide_theorem_apl(-1.0, 1.0, 1.5).unwrap().is_stable());
        assert_eq!(decide_theorem_apl(-1.0, 0.5, 1.5).unwrap().status, Status::Inconclusive);
        let v = decide_theorem_apl(-1.0, 0.5, 1.4).unwrap();
        assert_eq!((v.status, v.theorem), (Status::GloballyStable, Some(Theorem::Apl)));
        assert!(decide_theorem_apl(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn food_limited_examples() {
        let v = decide_food_limited(1.0, 0.0, 1.5).unwrap();
        assert_eq!((v.status, v.theorem), (Status::GloballyStable, Some(Theorem::FoodLimited)));
        assert_eq!(v.certificate.a, -1.0);
        assert_eq!(decide_food_limited(2.0, 1.0, 1.5).unwrap().status, Status::Inconclusive);
        assert!(decide_food_limited(3.0, 2.0, 1.5).unwrap().is_stable());
        assert!(decide_food_limited(0.0, 2.0, 1.5).is_err());
    }

    #[test]
    fn verdict_json_shape() {
        let v: serde_json::Value = serde_json::from_str(&decide_theorem_apl(-1.0, 0.5, 1.4).unwrap().to_json()).unwrap();
        assert_eq!(v["status"], "GloballyStable");
        assert_eq!(v["theorem"], "apl");
        assert_eq!(v["certificate"]["strict_needed"], true);
        assert!((v["certificate"]["margin"].as_f64().unwrap() - 0.1).abs() < 1e-12);
        assert!(v["reason"].is_string());
    }

    #[test]
    fn assess_follows_routes() {
        assert!(assess(&Model::make_wright(1.5).unwrap()).unwrap().is_stable());
        let undeclared = Model::make_wright(1.0).unwrap().with_h3(false);
        assert_eq!(assess(&undeclared).unwrap().status, Status::Inconclusive);
        let toy = Model::make_toy_linear(1.0, 1.0).unwrap();
        assert_eq!(assess(&toy).unwrap().theorem, None);
    }

    #[test]
    fn gy_holds_for_wright() {
        let model = Model::make_wright(1.5).unwrap();
        let bound = RationalBound::new(-1.5, 0.5).unwrap();
        let report = verify_gy_functional(&model, &bound, 1000, 1).unwrap();
        assert!(report.holds(), "{report:?}");
    }

    #[test]
    fn gy_degenerate_and_violated() {
        let a = -1.2;
        let bound = RationalBound::new(a, 0.0).unwrap();
        let yorke = Model::custom("a M(φ)", 1.0, f64::NEG_INFINITY, move |_, h| Ok(a * h.max_all().max(0.0)));
        let report = verify_gy_functional(&yorke, &bound, 500, 2).unwrap();
        assert!(report.lower.holds);
        assert_eq!(report.lower.outcome, Outcome::DegenerateEqual);

        let doubled = Model::custom("2a M(φ)", 1.0, f64::NEG_INFINITY, move |_, h| Ok(2.0 * a * h.max_all().max(0.0)));
        let report = verify_gy_functional(&doubled, &bound, 500, 2).unwrap();
        assert!(!report.lower.holds);
        for w in &report.lower.witnesses {
            assert!(w.x > 0.0);
            assert!(w.lhs - w.rhs > 1e-12);
        }
    }

    #[test]
    fn mm_examples() {
        let bound = RationalBound::new(-1.0, 1.0).unwrap();
        let trace = mm_iteration(&bound, 10.0, 10_000).unwrap();
        assert_eq!(trace.map, MmMap::Lambda);
        assert_eq!(trace.outcome, MmOutcome::Decayed);
        assert!(trace.uppers().windows(2).all(|w| w[1] < w[0]));

        let edge = RationalBound::new(-1.5, 1.0).unwrap();
        let trace = mm_iteration(&edge, 0.4, 200).unwrap();
        assert_eq!(trace.map, MmMap::SharpenedRr);
        for s in &trace.steps {
            assert!(s.envelope.unwrap() <= s.upper * (1.0 + 1e-12));
        }
        assert!(trace.uppers().windows(2).all(|w| w[1] <= w[0]));

        let linear = RationalBound::new(-1.5, 0.0).unwrap();
        let trace = mm_iteration(&linear, 1.0, 100).unwrap();
        assert_eq!(trace.factor, Some(1.0));
        assert_eq!(trace.outcome, MmOutcome::NonContracting { k: 0 });
    }

    #[test]
    fn mm_rescales_general_curvature() {
        let unit = mm_iteration(&RationalBound::new(-1.1, 1.0).unwrap(), 2.0, 50).unwrap();
        let scaled = mm_iteration(&RationalBound::new(-1.1, 4.0).unwrap(), 0.5, 50).unwrap();
        for (u, s) in unit.steps.iter().zip(&scaled.steps) {
            assert!((u.upper / 4.0 - s.upper).abs() < 1e-15 * u.upper.max(1.0));
        }
    }
}
