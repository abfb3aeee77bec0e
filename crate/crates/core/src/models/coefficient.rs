//! Time-dependent coefficients: growth rates `λ(t)`, `ν(t)` and delays
//! `h(t)`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numeric::{linspace, trapezoid};

/// Sample count for sampled suprema, infima and the trapezoid rule.
pub const DEFAULT_SAMPLES: usize = 1000;

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientFn {
    Constant {
        value: f64,
    },
    /// `mean + amplitude·sin(omega·t + phase)`.
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Rises linearly from `low` to `high` over each period.
    Sawtooth {
        low: f64,
        high: f64,
        period: f64,
    },
    #[serde(skip)]
    Custom {
        label: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for CoefficientFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientFn::Constant { value } => write!(f, "Constant({value})"),
            CoefficientFn::Sinusoidal {
                mean,
                amplitude,
                omega,
                phase,
            } => write!(f, "Sinusoidal({mean} + {amplitude} sin({omega} t + {phase}))"),
            CoefficientFn::Sawtooth { low, high, period } => {
                write!(f, "Sawtooth({low}..{high} / {period})")
            }
            CoefficientFn::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl CoefficientFn {
    pub fn constant(value: f64) -> Self {
        CoefficientFn::Constant { value }
    }

    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CoefficientFn::Custom {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            CoefficientFn::Constant { value } => Some(*value),
            _ => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            CoefficientFn::Constant { value } => *value,
            CoefficientFn::Sinusoidal {
                mean,
                amplitude,
                omega,
                phase,
            } => mean + amplitude * (omega * t + phase).sin(),
            CoefficientFn::Sawtooth { low, high, period } => {
                low + (high - low) * (t / period).rem_euclid(1.0)
            }
            CoefficientFn::Custom { f, .. } => f(t),
        }
    }

    /// `∫ₐᵇ c(t) dt`, in closed form for constant and sinusoidal
    /// coefficients and by the trapezoid rule otherwise.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            CoefficientFn::Constant { value } => value * (b - a),
            CoefficientFn::Sinusoidal {
                mean,
                amplitude,
                omega,
                phase,
            } if *omega != 0.0 => {
                mean * (b - a) - amplitude / omega * ((omega * b + phase).cos() - (omega * a + phase).cos())
            }
            _ => trapezoid(|t| self.eval(t), a, b, DEFAULT_SAMPLES),
        }
    }

    /// Supremum over `[lo, hi]`: exact for constants, sampled at `n` points
    /// otherwise.
    pub fn sampled_sup(&self, lo: f64, hi: f64, n: usize) -> f64 {
        match self {
            CoefficientFn::Constant { value } => *value,
            CoefficientFn::Sinusoidal {
                mean, amplitude, omega, ..
            } if *omega != 0.0 && hi - lo >= TAU / omega.abs() => mean + amplitude.abs(),
            _ => linspace(lo, hi, n.max(2))
                .into_iter()
                .map(|t| self.eval(t))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Infimum over `[lo, hi]`, with the same policy as [`Self::sampled_sup`].
    pub fn sampled_inf(&self, lo: f64, hi: f64, n: usize) -> f64 {
        match self {
            CoefficientFn::Constant { value } => *value,
            CoefficientFn::Sinusoidal {
                mean, amplitude, omega, ..
            } if *omega != 0.0 && hi - lo >= TAU / omega.abs() => mean - amplitude.abs(),
            _ => linspace(lo, hi, n.max(2))
                .into_iter()
                .map(|t| self.eval(t))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// Time window `[T, T + W]` over which suprema and infima are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    #[serde(rename = "T")]
    pub start: f64,
    #[serde(rename = "W")]
    pub width: f64,
}

impl Window {
    /// `T = 0`, `W = 10·span`.
    pub fn default_for(span: f64) -> Self {
        Self {
            start: 0.0,
            width: 10.0 * span,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_integrals_match_quadrature() {
        let s = CoefficientFn::Sinusoidal {
            mean: 1.0,
            amplitude: 0.4,
            omega: 2.0,
            phase: 0.3,
        };
        let exact = s.integral(-1.0, 3.5);
        let numeric = trapezoid(|t| s.eval(t), -1.0, 3.5, 200_001);
        assert!((exact - numeric).abs() < 1e-9);
        assert_eq!(CoefficientFn::constant(2.0).integral(1.0, 2.5), 3.0);
    }

    #[test]
    fn sawtooth_wraps() {
        let saw = CoefficientFn::Sawtooth {
            low: 1.0,
            high: 2.0,
            period: 4.0,
        };
        assert_eq!(saw.eval(0.0), 1.0);
        assert_eq!(saw.eval(2.0), 1.5);
        assert_eq!(saw.eval(5.0), 1.25);
        assert!(saw.sampled_sup(0.0, 20.0, 10_000) < 2.0);
        assert_eq!(saw.sampled_inf(0.0, 20.0, 10_000), 1.0);
    }

    #[test]
    fn serde_round_trip_of_builtins() {
        let text = r#"{"kind":"sinusoidal","mean":1.125,"amplitude":0.375,"omega":2.0}"#;
        let c: CoefficientFn = serde_json::from_str(text).unwrap();
        assert_eq!(c.sampled_sup(0.0, 10.0, 10), 1.5);
        let back = serde_json::to_string(&c).unwrap();
        assert!(back.contains("\"kind\":\"sinusoidal\""));
    }
}
