//! Parameter sweeps: a grid of model parameters, seeded random histories per
//! cell, and the fraction of trials that settle near the equilibrium.

use std::io::{self, Write};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::default_step;
use crate::criterion::{assess, Status, Theorem};
use crate::error::{Error, Result};
use crate::integrator::{integrate, tail_metrics, Prehistory};
use crate::models::{Model, ModelConfig};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.1;
/// Default horizon in units of the model span.
pub const DEFAULT_SPANS: f64 = 400.0;
pub const TRIAL_KNOTS: usize = 8;

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_tail() -> f64 {
    DEFAULT_TAIL_FRACTION
}

/// One swept parameter: `steps` evenly spaced values over `range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: String,
    pub range: (f64, f64),
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        crate::numeric::linspace(self.range.0, self.range.1, self.steps)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub model_family: String,
    /// Parameters shared by every cell; axis values override them.
    #[serde(default)]
    pub base_params: Map<String, Value>,
    pub axis1: Axis,
    #[serde(default)]
    pub axis2: Option<Axis>,
    pub trials_per_cell: usize,
    pub seed: u64,
    /// Defaults to `400·span` per cell.
    #[serde(default)]
    pub t_end: Option<f64>,
    /// Defaults to the largest step ≤ 0.01 dividing the delay.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_tol")]
    pub convergence_tol: f64,
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
    /// Value range of the random histories; see [`default_history_range`].
    #[serde(default)]
    pub history_range: Option<(f64, f64)>,
}

/// One grid point. `index` fixes the random stream of its trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub values: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub params: Vec<f64>,
    pub trials: usize,
    pub converged: usize,
    pub events: usize,
    pub fraction: f64,
    pub verdict: Option<Status>,
    pub theorem: Option<Theorem>,
    pub error: Option<String>,
}

/// `[d + 0.1(x* − d), x* + 2(x* − d)]` for a finite domain bound `d`,
/// otherwise `[x* − 1, x* + 2]`.
pub fn default_history_range(model: &Model) -> (f64, f64) {
    let eq = model.equilibrium;
    if model.domain_low.is_finite() {
        let gap = eq - model.domain_low;
        (model.domain_low + 0.1 * gap, eq + 2.0 * gap)
    } else {
        (eq - 1.0, eq + 2.0)
    }
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("sweep spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for axis in std::iter::once(&self.axis1).chain(&self.axis2) {
            if axis.steps < 2 {
                return Err(Error::Config(format!("axis {} needs at least 2 steps", axis.param)));
            }
            if !(axis.range.0.is_finite() && axis.range.1.is_finite()) {
                return Err(Error::Config(format!("axis {} has a non-finite range", axis.param)));
            }
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Config("convergence_tol must be positive".into()));
        }
        if self.trials_per_cell == 0 {
            return Err(Error::Config("trials_per_cell must be positive".into()));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return Err(Error::Config("tail_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn axes(&self) -> Vec<&Axis> {
        std::iter::once(&self.axis1).chain(&self.axis2).collect()
    }

    /// Row-major expansion, `axis1` outermost.
    pub fn cells(&self) -> Vec<Cell> {
        let first = self.axis1.values();
        let second = self.axis2.as_ref().map(|a| (a.param.clone(), a.values()));
        let mut cells = Vec::new();
        for &u in &first {
            let head = (self.axis1.param.clone(), u);
            match &second {
                None => cells.push(vec![head.clone()]),
                Some((name, vs)) => {
                    for &v in vs {
                        cells.push(vec![head.clone(), (name.clone(), v)]);
                    }
                }
            }
        }
        cells
            .into_iter()
            .enumerate()
            .map(|(index, values)| Cell { index, values })
            .collect()
    }

    fn config_for(&self, cell: &Cell) -> ModelConfig {
        let mut params = self.base_params.clone();
        for (name, v) in &cell.values {
            params.insert(name.clone(), Value::from(*v));
        }
        ModelConfig {
            family: self.model_family.clone(),
            params,
            window: None,
            h3_holds: None,
            history: None,
        }
    }

    fn run_cell(&self, cell: &Cell) -> SweepRow {
        let mut row = SweepRow {
            params: cell.values.iter().map(|(_, v)| *v).collect(),
            trials: self.trials_per_cell,
            converged: 0,
            events: 0,
            fraction: 0.0,
            verdict: None,
            theorem: None,
            error: None,
        };
        if let Err(e) = self.fill_cell(cell, &mut row) {
            row.error = Some(e.to_string());
        }
        row
    }

    fn fill_cell(&self, cell: &Cell, row: &mut SweepRow) -> Result<()> {
        let model = self.config_for(cell).build()?;
        let verdict = assess(&model)?;
        row.verdict = Some(verdict.status);
        row.theorem = verdict.theorem;
        let dt = match self.dt {
            Some(dt) => dt,
            None => default_step(&model),
        };
        let t_end = self.t_end.unwrap_or(DEFAULT_SPANS * model.span);
        let (lo, hi) = self.history_range.unwrap_or_else(|| default_history_range(&model));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(cell.index as u64);
        for _ in 0..self.trials_per_cell {
            let pre = Prehistory::random(model.span, TRIAL_KNOTS, lo, hi, &mut rng);
            let traj = integrate(&model, &pre, t_end, dt)?;
            if !traj.events().is_empty() {
                row.events += 1;
                continue;
            }
            if tail_metrics(&traj, model.equilibrium, self.tail_fraction)?.sup_dev < self.convergence_tol {
                row.converged += 1;
            }
        }
        row.fraction = row.converged as f64 / self.trials_per_cell as f64;
        Ok(())
    }

    /// Runs every cell in parallel; rows come back in cell order.
    pub fn run(&self) -> Vec<SweepRow> {
        self.cells().par_iter().map(|c| self.run_cell(c)).collect()
    }

    pub fn header(&self) -> String {
        let mut cols: Vec<&str> = self.axes().iter().map(|a| a.param.as_str()).collect();
        cols.extend(["trials", "converged", "events", "fraction", "verdict", "theorem", "error"]);
        cols.join(",")
    }

    pub fn write_csv<W: Write>(&self, rows: &[SweepRow], mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header())?;
        for row in rows {
            for p in &row.params {
                write!(w, "{p},")?;
            }
            let verdict = row.verdict.map(|s| format!("{s:?}")).unwrap_or_default();
            let theorem = row
                .theorem
                .map(|t| serde_json::to_value(t).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default())
                .unwrap_or_default();
            let error = row.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            writeln!(
                w,
                "{},{},{},{},{verdict},{theorem},{error}",
                row.trials, row.converged, row.events, row.fraction
            )?;
        }
        Ok(())
    }
}
