//! JSON model configurations: `{family, params, window, h3_holds, history}`.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{CoefficientFn, MaximaBase, Model, Reader, Window};
use crate::bounds::RationalBound;
use crate::error::{Error, Result};
use crate::integrator::Prehistory;

/// Initial history specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HistorySpec {
    Constant {
        value: f64,
    },
    /// Knots `[s, value]` from `−span` to `0`.
    Knots {
        knots: Vec<(f64, f64)>,
    },
    Random {
        lo: f64,
        hi: f64,
        seed: u64,
        #[serde(default = "default_knots")]
        knots: usize,
    },
}

fn default_knots() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub family: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h3_holds: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<HistorySpec>,
}

#[derive(Deserialize)]
struct DelayParams {
    h: Option<f64>,
    delay: Option<CoefficientFn>,
    h_max: Option<f64>,
}

impl DelayParams {
    fn resolve(self) -> Result<(CoefficientFn, f64)> {
        match (self.h, self.delay, self.h_max) {
            (Some(h), None, h_max) => Ok((CoefficientFn::constant(h), h_max.unwrap_or(h))),
            (None, Some(delay), Some(h_max)) => Ok((delay, h_max)),
            (None, Some(_), None) => Err(Error::Config("a variable delay needs h_max".into())),
            (None, None, _) => Err(Error::Config("missing delay: give h or delay + h_max".into())),
            (Some(_), Some(_), _) => Err(Error::Config("give either h or delay, not both".into())),
        }
    }
}

#[derive(Deserialize)]
struct WrightParams {
    p: f64,
}

#[derive(Deserialize)]
struct RateDelayParams {
    p: f64,
    #[serde(flatten)]
    delay: DelayParams,
}

fn one() -> CoefficientFn {
    CoefficientFn::constant(1.0)
}

fn zero() -> CoefficientFn {
    CoefficientFn::constant(0.0)
}

#[derive(Deserialize)]
struct FoodLimitedParams {
    k: f64,
    l: f64,
    #[serde(default = "one")]
    growth: CoefficientFn,
    #[serde(default = "zero")]
    nu: CoefficientFn,
    #[serde(flatten)]
    delay: DelayParams,
}

#[derive(Deserialize)]
#[serde(tag = "base", rename_all = "snake_case")]
enum MaximaParams {
    Logistic {
        p: f64,
        h0: f64,
    },
    FoodLimited {
        k: f64,
        l: f64,
        #[serde(default = "one")]
        growth: CoefficientFn,
        #[serde(default = "zero")]
        nu: CoefficientFn,
        h0: f64,
    },
}

#[derive(Deserialize)]
struct GleRationalParams {
    a: f64,
    b: f64,
    #[serde(default = "one")]
    growth: CoefficientFn,
    #[serde(flatten)]
    delay: DelayParams,
}

#[derive(Deserialize)]
struct ToyParams {
    c: f64,
    tau: f64,
}

fn params<T: DeserializeOwned>(family: &str, map: &Map<String, Value>) -> Result<T> {
    serde_json::from_value(Value::Object(map.clone()))
        .map_err(|e| Error::Config(format!("{family} params: {e}")))
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn build(&self) -> Result<Model> {
        let family = self.family.as_str();
        let p = &self.params;
        let mut model = match family {
            "wright" => Model::make_wright(params::<WrightParams>(family, p)?.p)?,
            "linear" => {
                let q: RateDelayParams = params(family, p)?;
                let (delay, h_max) = q.delay.resolve()?;
                Model::make_linear_variable_delay(q.p, delay, h_max)?
            }
            "logistic" => {
                let q: RateDelayParams = params(family, p)?;
                let (delay, h_max) = q.delay.resolve()?;
                Model::make_logistic_vd(q.p, delay, h_max)?
            }
            "food_limited" => {
                let q: FoodLimitedParams = params(family, p)?;
                let (delay, h_max) = q.delay.resolve()?;
                Model::make_food_limited(q.k, q.l, q.growth, q.nu, delay, h_max, self.window)?
            }
            "maxima" => match params::<MaximaParams>(family, p)? {
                MaximaParams::Logistic { p, h0 } => Model::make_maxima_model(MaximaBase::Logistic { p }, h0)?,
                MaximaParams::FoodLimited { k, l, growth, nu, h0 } => {
                    Model::make_maxima_model(MaximaBase::FoodLimited { k, l, growth, nu }, h0)?
                }
            },
            "gle_rational" => {
                let q: GleRationalParams = params(family, p)?;
                let (delay, h_max) = q.delay.resolve()?;
                Model::make_gle_rational(
                    RationalBound::new(q.a, q.b)?,
                    q.growth,
                    Reader::PointDelay { delay, h_max },
                    self.window,
                )?
            }
            "toy" => {
                let q: ToyParams = params(family, p)?;
                Model::make_toy_linear(q.c, q.tau)?
            }
            other => return Err(Error::Config(format!("unknown model family {other:?}"))),
        };
        if let Some(h3) = self.h3_holds {
            model.meta.h3_holds = h3;
        }
        Ok(model)
    }

    /// The configured history, or the constant `equilibrium + 0.5`.
    pub fn initial_history(&self, model: &Model) -> Result<Prehistory> {
        history_for(self.history.as_ref(), model)
    }
}

pub(crate) fn history_for(spec: Option<&HistorySpec>, model: &Model) -> Result<Prehistory> {
    Ok(match spec {
        None => Prehistory::constant(model.span, model.equilibrium + 0.5),
        Some(HistorySpec::Constant { value }) => Prehistory::constant(model.span, *value),
        Some(HistorySpec::Knots { knots }) => Prehistory::piecewise_linear(knots.clone())?,
        Some(HistorySpec::Random { lo, hi, seed, knots }) => {
            if !(lo <= hi) {
                return Err(Error::Config(format!("empty history range [{lo}, {hi}]")));
            }
            Prehistory::random(model.span, *knots, *lo, *hi, &mut ChaCha8Rng::seed_from_u64(*seed))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_family() {
        let cases = [
            r#"{"family":"wright","params":{"p":1.4}}"#,
            r#"{"family":"linear","params":{"p":1.0,"h":1.0}}"#,
            r#"{"family":"logistic","params":{"p":1.0,"delay":{"kind":"sinusoidal","mean":1.125,"amplitude":0.375,"omega":2.0},"h_max":1.5}}"#,
            r#"{"family":"food_limited","params":{"k":1,"l":1,"h":1.5},"window":{"T":0,"W":15}}"#,
            r#"{"family":"maxima","params":{"base":"food_limited","k":1,"l":1,"h0":1.5}}"#,
            r#"{"family":"gle_rational","params":{"a":-1.2,"b":0.8,"h":1.0}}"#,
            r#"{"family":"toy","params":{"c":2.0,"tau":1.0}}"#,
        ];
        for text in cases {
            let cfg = ModelConfig::from_json(text).unwrap();
            cfg.build().unwrap_or_else(|e| panic!("{text}: {e}"));
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ModelConfig::from_json("{").is_err());
        let unknown = ModelConfig::from_json(r#"{"family":"nope"}"#).unwrap();
        assert!(matches!(unknown.build(), Err(Error::Config(_))));
        let missing = ModelConfig::from_json(r#"{"family":"wright","params":{}}"#).unwrap();
        assert!(matches!(missing.build(), Err(Error::Config(_))));
    }

    #[test]
    fn h3_override_and_history() {
        let cfg = ModelConfig::from_json(
            r#"{"family":"wright","params":{"p":1.0},"h3_holds":false,"history":{"kind":"random","lo":-0.5,"hi":2,"seed":9}}"#,
        )
        .unwrap();
        let model = cfg.build().unwrap();
        assert!(!model.meta.h3_holds);
        let pre = cfg.initial_history(&model).unwrap();
        assert_eq!(pre.knots().unwrap().len(), 8);
    }
}
