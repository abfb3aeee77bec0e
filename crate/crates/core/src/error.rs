use thiserror::Error;

use crate::integrator::EventKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: argument {x} is outside the domain (boundary at {boundary})")]
    Domain {
        what: &'static str,
        x: f64,
        boundary: f64,
    },

    #[error("no-crossing: r(x) = -x has no positive solution for a = {a}, b = {b}")]
    NoCrossing { a: f64, b: f64 },

    #[error("critical point: |f'({x})| = {slope:e} is inside the guard")]
    CriticalPoint { x: f64, slope: f64 },

    #[error("negative feedback violated: f'(0) = {slope}")]
    NegativeFeedback { slope: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("history query at t = {t} is outside the stored span [{lo}, {hi}]")]
    Range { t: f64, lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("tail window contaminated by a {kind} event at t = {t}")]
    TailContaminated { kind: EventKind, t: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
