//! Fixed-step method-of-steps integration of `x'(t) = f(t, x_t)`.
//!
//! The right-hand side reads delayed values only through a [`HistoryView`],
//! which interpolates the already computed nodes with cubic Hermite pieces.
//! Runge-Kutta stages that need values newer than the last node (delays
//! shorter than a step, or max-over-window reads that include the present)
//! see a quadratic "head" through the last node, its slope, and the stage
//! value.
//!
//! Right-hand sides are assumed piecewise continuous in `t`; measurable
//! coefficients are not supported.

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::Model;

/// `|x|` above this halts integration with a [`EventKind::Blowup`] event.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// Relative slack for lookups that fall just outside the stored span.
pub const CLAMP_SLACK: f64 = 1e-9;

/// Number of sample points used for window extremes of a
/// [`Prehistory::Function`].
pub const PREHISTORY_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Blowup,
    DomainViolation,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Blowup => "blowup",
            EventKind::DomainViolation => "domain_violation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub value: f64,
}

/// Initial data on `s ∈ [−span, 0]`.
#[derive(Clone)]
pub enum Prehistory {
    Constant { span: f64, value: f64 },
    /// Knots `(s, φ(s))` with strictly increasing `s`, from `−span` to `0`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    Function {
        span: f64,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for Prehistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prehistory::Constant { span, value } => f
                .debug_struct("Constant")
                .field("span", span)
                .field("value", value)
                .finish(),
            Prehistory::PiecewiseLinear { knots } => {
                f.debug_struct("PiecewiseLinear").field("knots", knots).finish()
            }
            Prehistory::Function { span, .. } => {
                f.debug_struct("Function").field("span", span).finish_non_exhaustive()
            }
        }
    }
}

impl Prehistory {
    pub fn constant(span: f64, value: f64) -> Self {
        Prehistory::Constant { span, value }
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::Precondition("a piecewise-linear history needs two knots".into()));
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::Precondition("history knots must be strictly increasing".into()));
        }
        let last = knots[knots.len() - 1].0;
        if last != 0.0 || knots[0].0 >= 0.0 {
            return Err(Error::Precondition(format!(
                "history knots must run from a negative time to 0, got [{}, {last}]",
                knots[0].0
            )));
        }
        Ok(Prehistory::PiecewiseLinear { knots })
    }

    pub fn function(span: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Prehistory::Function {
            span,
            f: Arc::new(f),
        }
    }

    /// Piecewise-linear history with `n_knots` equally spaced knots and
    /// values uniform in `[lo, hi]`.
    pub fn random<R: Rng + ?Sized>(span: f64, n_knots: usize, lo: f64, hi: f64, rng: &mut R) -> Self {
        let n = n_knots.max(2);
        let knots = (0..n)
            .map(|k| {
                let s = if k == n - 1 {
                    0.0
                } else {
                    -span + span * k as f64 / (n - 1) as f64
                };
                (s, rng.gen_range(lo..=hi))
            })
            .collect();
        Prehistory::PiecewiseLinear { knots }
    }

    pub fn span(&self) -> f64 {
        match self {
            Prehistory::Constant { span, .. } | Prehistory::Function { span, .. } => *span,
            Prehistory::PiecewiseLinear { knots } => -knots[0].0,
        }
    }

    pub fn knots(&self) -> Option<&[(f64, f64)]> {
        match self {
            Prehistory::PiecewiseLinear { knots } => Some(knots),
            _ => None,
        }
    }

    /// `φ(s)`; `s` is clamped into `[−span, 0]`.
    pub fn value(&self, s: f64) -> f64 {
        let s = s.clamp(-self.span(), 0.0);
        match self {
            Prehistory::Constant { value, .. } => *value,
            Prehistory::Function { f, .. } => f(s),
            Prehistory::PiecewiseLinear { knots } => {
                let i = knots.partition_point(|k| k.0 <= s);
                if i == 0 {
                    return knots[0].1;
                }
                if i == knots.len() {
                    return knots[knots.len() - 1].1;
                }
                let (s0, v0) = knots[i - 1];
                let (s1, v1) = knots[i];
                v0 + (v1 - v0) * (s - s0) / (s1 - s0)
            }
        }
    }

    /// `max sign·φ` over `[lo, hi] ⊆ [−span, 0]`.
    fn extreme(&self, lo: f64, hi: f64, sign: f64) -> f64 {
        match self {
            Prehistory::Constant { value, .. } => sign * value,
            Prehistory::PiecewiseLinear { knots } => knots
                .iter()
                .filter(|k| k.0 > lo && k.0 < hi)
                .map(|k| sign * k.1)
                .fold(sign * self.value(lo), f64::max)
                .max(sign * self.value(hi)),
            Prehistory::Function { .. } => (0..=PREHISTORY_SAMPLES)
                .map(|k| lo + (hi - lo) * k as f64 / PREHISTORY_SAMPLES as f64)
                .map(|s| sign * self.value(s))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn min_value(&self) -> f64 {
        -self.extreme(-self.span(), 0.0, -1.0)
    }

    pub fn max_value(&self) -> f64 {
        self.extreme(-self.span(), 0.0, 1.0)
    }
}

/// Nodes on the uniform grid `tᵢ = i·dt` with values, slopes and cached
/// per-segment extremes.
#[derive(Debug, Clone)]
struct Nodes {
    dt: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
    seg_max: Vec<f64>,
    seg_min: Vec<f64>,
}

impl Nodes {
    fn new(dt: f64, x0: f64, d0: f64) -> Self {
        Self {
            dt,
            values: vec![x0],
            derivs: vec![d0],
            seg_max: Vec::new(),
            seg_min: Vec::new(),
        }
    }

    fn last(&self) -> usize {
        self.values.len() - 1
    }

    fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    fn push(&mut self, x: f64, d: f64) {
        self.values.push(x);
        self.derivs.push(d);
        let i = self.values.len() - 2;
        self.seg_max.push(self.segment_extreme(i, 0.0, 1.0, 1.0));
        self.seg_min.push(-self.segment_extreme(i, 0.0, 1.0, -1.0));
    }

    /// Hermite cubic on segment `i` at local coordinate `θ ∈ [0, 1]`.
    fn hermite(&self, i: usize, theta: f64) -> f64 {
        let (x0, x1) = (self.values[i], self.values[i + 1]);
        if theta >= 1.0 {
            return x1;
        }
        let (d0, d1) = (self.derivs[i], self.derivs[i + 1]);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        x0 + (x1 - x0) * (3.0 * t2 - 2.0 * t3)
            + self.dt * (d0 * (theta - 2.0 * t2 + t3) + d1 * (t3 - t2))
    }

    /// `max sign·p(θ)` over `θ ∈ [θa, θb]` on segment `i`, exact for the
    /// cubic via the roots of its derivative.
    fn segment_extreme(&self, i: usize, ta: f64, tb: f64, sign: f64) -> f64 {
        let (x0, x1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.dt * self.derivs[i], self.dt * self.derivs[i + 1]);
        let dx = x1 - x0;
        let mut best = (sign * self.hermite(i, ta)).max(sign * self.hermite(i, tb));
        // p'(θ) = c2 θ² + c1 θ + c0
        let c2 = -6.0 * dx + 3.0 * d0 + 3.0 * d1;
        let c1 = 6.0 * dx - 4.0 * d0 - 2.0 * d1;
        let c0 = d0;
        for theta in quadratic_roots(c2, c1, c0) {
            if theta > ta && theta < tb {
                best = best.max(sign * self.hermite(i, theta));
            }
        }
        best
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-14 * scale {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Quadratic continuation `x₀ + d₀τ + qτ²` from the last node to a stage.
#[derive(Debug, Clone, Copy)]
struct Head {
    t0: f64,
    x0: f64,
    d0: f64,
    q: f64,
    t1: f64,
    x1: f64,
}

impl Head {
    fn new(t0: f64, x0: f64, d0: f64, t1: f64, x1: f64) -> Self {
        let tau = t1 - t0;
        Self {
            t0,
            x0,
            d0,
            q: (x1 - x0 - d0 * tau) / (tau * tau),
            t1,
            x1,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        if t >= self.t1 {
            return self.x1;
        }
        let tau = t - self.t0;
        self.x0 + tau * (self.d0 + self.q * tau)
    }

    fn extreme(&self, lo: f64, hi: f64, sign: f64) -> f64 {
        let mut best = (sign * self.eval(lo)).max(sign * self.eval(hi));
        if self.q != 0.0 {
            let vertex = self.t0 - self.d0 / (2.0 * self.q);
            if vertex > lo && vertex < hi {
                best = best.max(sign * self.eval(vertex));
            }
        }
        best
    }
}

/// Read-only access to a solution segment `x(u)`, `u ∈ [t_now − span, t_now]`.
#[derive(Debug, Clone, Copy)]
pub struct HistoryView<'a> {
    pre: &'a Prehistory,
    nodes: Option<&'a Nodes>,
    head: Option<Head>,
    origin: f64,
    t_now: f64,
    span: f64,
}

impl<'a> HistoryView<'a> {
    /// The history `u ↦ φ(u − t_now)` on `[t_now − span, t_now]`.
    pub fn from_prehistory(pre: &'a Prehistory, t_now: f64) -> Self {
        Self {
            pre,
            nodes: None,
            head: None,
            origin: t_now,
            t_now,
            span: pre.span(),
        }
    }

    pub fn t_now(&self) -> f64 {
        self.t_now
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn current(&self) -> f64 {
        self.eval(self.t_now)
    }

    fn slack(&self) -> f64 {
        CLAMP_SLACK * self.t_now.abs().max(self.span).max(1.0)
    }

    fn clamp(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.t_now - self.span, self.t_now);
        let slack = self.slack();
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::Range { t, lo, hi });
        }
        Ok(t.clamp(lo, hi))
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.eval(self.clamp(t)?))
    }

    /// `x(t_now − delay)`.
    pub fn lookback(&self, delay: f64) -> Result<f64> {
        self.value_at(self.t_now - delay)
    }

    fn eval(&self, t: f64) -> f64 {
        let nodes = match self.nodes {
            Some(n) if t >= self.origin => n,
            _ => return self.pre.value(t - self.origin),
        };
        let last = nodes.last();
        if t > nodes.time(last) {
            if let Some(head) = &self.head {
                return head.eval(t);
            }
            return nodes.values[last];
        }
        if last == 0 {
            return nodes.values[0];
        }
        let i = ((t / nodes.dt).floor() as usize).min(last - 1);
        nodes.hermite(i, (t - nodes.time(i)) / nodes.dt)
    }

    pub fn max_over(&self, lo: f64, hi: f64) -> Result<f64> {
        self.extreme(lo, hi, 1.0)
    }

    pub fn min_over(&self, lo: f64, hi: f64) -> Result<f64> {
        self.extreme(lo, hi, -1.0).map(|v| -v)
    }

    /// Maximum over the whole view.
    pub fn max_all(&self) -> f64 {
        self.extreme(self.t_now - self.span, self.t_now, 1.0)
            .expect("full window is in range")
    }

    /// Minimum over the whole view.
    pub fn min_all(&self) -> f64 {
        -self
            .extreme(self.t_now - self.span, self.t_now, -1.0)
            .expect("full window is in range")
    }

    fn extreme(&self, lo: f64, hi: f64, sign: f64) -> Result<f64> {
        if lo > hi {
            return Err(Error::Precondition(format!("empty window [{lo}, {hi}]")));
        }
        let (lo, hi) = (self.clamp(lo)?, self.clamp(hi)?);
        let mut best = f64::NEG_INFINITY;
        let nodes = match self.nodes {
            Some(n) => n,
            None => return Ok(self.pre.extreme(lo - self.origin, hi - self.origin, sign)),
        };
        if lo < self.origin {
            best = best.max(self.pre.extreme(lo - self.origin, hi.min(self.origin) - self.origin, sign));
        }
        let last = nodes.last();
        let t_last = nodes.time(last);
        let (a, b) = (lo.max(self.origin), hi.min(t_last));
        if a <= b {
            if last == 0 {
                best = best.max(sign * nodes.values[0]);
            } else {
                let dt = nodes.dt;
                let i0 = ((a / dt).floor() as usize).min(last - 1);
                let i1 = ((b / dt).ceil() as usize).clamp(i0 + 1, last);
                for i in i0..i1 {
                    let (ti, tj) = (nodes.time(i), nodes.time(i + 1));
                    if ti >= a && tj <= b {
                        best = best.max(if sign > 0.0 { nodes.seg_max[i] } else { -nodes.seg_min[i] });
                    } else {
                        let ta = ((a - ti) / dt).clamp(0.0, 1.0);
                        let tb = ((b - ti) / dt).clamp(0.0, 1.0);
                        best = best.max(nodes.segment_extreme(i, ta, tb, sign));
                    }
                }
            }
        }
        if hi > t_last {
            if let Some(head) = &self.head {
                best = best.max(head.extreme(lo.max(t_last), hi, sign));
            }
        }
        Ok(best)
    }
}

/// `M = max{0, max_{[lo, hi]} x}`.
pub fn yorke_max(view: &HistoryView<'_>, lo: f64, hi: f64) -> Result<f64> {
    Ok(view.max_over(lo, hi)?.max(0.0))
}

/// A computed solution on the grid `tᵢ = i·dt`, `t ∈ [0, t_last]`, with
/// its initial history.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pre: Prehistory,
    nodes: Nodes,
    times: Vec<f64>,
    events: Vec<Event>,
}

impl Trajectory {
    /// Builds a trajectory from node values and slopes; the history before
    /// `t = 0` is the constant `values[0]`.
    pub fn from_samples(dt: f64, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != derivs.len() {
            return Err(Error::Precondition("values and derivs must be equally long and non-empty".into()));
        }
        let mut nodes = Nodes::new(dt, values[0], derivs[0]);
        for (x, d) in values.into_iter().zip(derivs).skip(1) {
            nodes.push(x, d);
        }
        let times = (0..nodes.values.len()).map(|i| nodes.time(i)).collect();
        Ok(Self {
            pre: Prehistory::constant(dt, nodes.values[0]),
            nodes,
            times,
            events: Vec::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.nodes.dt
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.nodes.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.nodes.derivs
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn prehistory(&self) -> &Prehistory {
        &self.pre
    }

    pub fn t_last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// The solution segment ending at `t_now ≤ t_last`, reaching back over
    /// the full stored history.
    pub fn view(&self, t_now: f64) -> Result<HistoryView<'_>> {
        if !(t_now <= self.t_last() + CLAMP_SLACK * self.t_last().max(1.0)) {
            return Err(Error::Range {
                t: t_now,
                lo: -self.pre.span(),
                hi: self.t_last(),
            });
        }
        let t_now = t_now.min(self.t_last());
        Ok(HistoryView {
            pre: &self.pre,
            nodes: Some(&self.nodes),
            head: None,
            origin: 0.0,
            t_now,
            span: t_now + self.pre.span(),
        })
    }

    /// Dense value on `[−span, t_last]`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        self.view(self.t_last())?.value_at(t)
    }

    pub fn max_over(&self, lo: f64, hi: f64) -> Result<f64> {
        self.view(self.t_last())?.max_over(lo, hi)
    }

    pub fn min_over(&self, lo: f64, hi: f64) -> Result<f64> {
        self.view(self.t_last())?.min_over(lo, hi)
    }

    /// `n ≥ 2` evenly spaced dense samples on `[0, t_last]`.
    pub fn resample(&self, n: usize) -> Vec<(f64, f64)> {
        let view = self.view(self.t_last()).expect("t_last is in range");
        crate::numeric::linspace(0.0, self.t_last(), n.max(2))
            .into_iter()
            .map(|t| (t, view.eval(t)))
            .collect()
    }

    /// CSV `t,x` at the grid nodes (or at `resample` dense points), followed
    /// by one `#event,<kind>,<t>` row per event.
    pub fn write_csv<W: Write>(&self, mut w: W, resample: Option<usize>) -> io::Result<()> {
        writeln!(w, "t,x")?;
        match resample {
            Some(n) => {
                for (t, x) in self.resample(n) {
                    writeln!(w, "{t},{x}")?;
                }
            }
            None => {
                for (t, x) in self.times.iter().zip(&self.nodes.values) {
                    writeln!(w, "{t},{x}")?;
                }
            }
        }
        for e in &self.events {
            writeln!(w, "#event,{},{}", e.kind, e.t)?;
        }
        Ok(())
    }
}

/// Deviation statistics over the final part of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailMetrics {
    pub sup_dev: f64,
    /// Estimate of `limsup (x − equilibrium)`.
    #[serde(rename = "M_est")]
    pub upper: f64,
    /// Estimate of `liminf (x − equilibrium)`.
    #[serde(rename = "m_est")]
    pub lower: f64,
    pub t_start: f64,
    pub t_end: f64,
}

/// Dense extremes of `x − equilibrium` over the last `tail_fraction` of
/// `[0, t_last]`.
pub fn tail_metrics(traj: &Trajectory, equilibrium: f64, tail_fraction: f64) -> Result<TailMetrics> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "tail_fraction",
            value: tail_fraction,
            reason: "must lie in (0, 1)",
        });
    }
    if let Some(e) = traj.events.first() {
        return Err(Error::TailContaminated { kind: e.kind, t: e.t });
    }
    let t_end = traj.t_last();
    let t_start = t_end * (1.0 - tail_fraction);
    let upper = traj.max_over(t_start, t_end)? - equilibrium;
    let lower = traj.min_over(t_start, t_end)? - equilibrium;
    Ok(TailMetrics {
        sup_dev: upper.abs().max(lower.abs()),
        upper,
        lower,
        t_start,
        t_end,
    })
}

enum Stage {
    Value(f64),
    Halt(Event),
}

fn classify(model: &Model, t: f64, x: f64) -> Option<Event> {
    if !x.is_finite() || x.abs() > BLOWUP_THRESHOLD {
        Some(Event {
            t,
            kind: EventKind::Blowup,
            value: x,
        })
    } else if x <= model.domain_low {
        Some(Event {
            t,
            kind: EventKind::DomainViolation,
            value: x,
        })
    } else {
        None
    }
}

fn evaluate(model: &Model, t: f64, view: &HistoryView<'_>) -> Result<Stage> {
    match model.rhs(t, view) {
        Ok(v) if v.is_finite() => Ok(Stage::Value(v)),
        Ok(v) => Ok(Stage::Halt(Event {
            t,
            kind: EventKind::Blowup,
            value: v,
        })),
        Err(Error::Domain { x, .. }) => Ok(Stage::Halt(Event {
            t,
            kind: EventKind::DomainViolation,
            value: x,
        })),
        Err(e) => Err(e),
    }
}

/// Checks the step preconditions: `dt ≤ span/10`, and `dt` divides the
/// base delay when the model has one.
pub fn validate_step(model: &Model, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "must be positive",
        });
    }
    if dt > model.span / 10.0 * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "dt = {dt} exceeds span/10 = {}",
            model.span / 10.0
        )));
    }
    if let Some(delay) = model.base_delay {
        let k = delay / dt;
        if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
            return Err(Error::Precondition(format!(
                "dt = {dt} does not divide the delay {delay}"
            )));
        }
    }
    Ok(())
}

/// Integrates `model` from `init` over `[0, t_end]` with classical RK4.
/// Blow-up and domain exits halt integration; the partial trajectory is
/// returned with the event recorded.
pub fn integrate(model: &Model, init: &Prehistory, t_end: f64, dt: f64) -> Result<Trajectory> {
    validate_step(model, dt)?;
    if !(t_end >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end,
            reason: "must be nonnegative",
        });
    }
    if init.span() < model.span * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "initial history covers {} but the model needs {}",
            init.span(),
            model.span
        )));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let span = model.span;
    let x0 = init.value(0.0);

    let mut events = Vec::new();
    let mut nodes = Nodes::new(dt, x0, 0.0);
    macro_rules! stage_view {
        ($nodes:expr, $head:expr, $t:expr) => {
            HistoryView {
                pre: init,
                nodes: Some($nodes),
                head: $head,
                origin: 0.0,
                t_now: $t,
                span,
            }
        };
    }

    if let Some(e) = classify(model, 0.0, x0) {
        events.push(e);
    } else {
        match evaluate(model, 0.0, &stage_view!(&nodes, None, 0.0))? {
            Stage::Value(d) => nodes.derivs[0] = d,
            Stage::Halt(e) => events.push(e),
        }
    }

    'steps: for n in 0..steps {
        if !events.is_empty() {
            break;
        }
        let t_n = nodes.time(n);
        let x_n = nodes.values[n];
        let d_n = nodes.derivs[n];
        let t_next = nodes.time(n + 1);
        let mut k = [d_n, 0.0, 0.0, 0.0];
        for (j, c) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
            let t_s = if c == 1.0 { t_next } else { t_n + c * dt };
            let x_s = x_n + c * dt * k[j - 1];
            if let Some(e) = classify(model, t_s, x_s) {
                events.push(e);
                break 'steps;
            }
            let head = Head::new(t_n, x_n, d_n, t_s, x_s);
            match evaluate(model, t_s, &stage_view!(&nodes, Some(head), t_s))? {
                Stage::Value(v) => k[j] = v,
                Stage::Halt(e) => {
                    events.push(e);
                    break 'steps;
                }
            }
        }
        let x_next = x_n + dt / 6.0 * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3]);
        if let Some(e) = classify(model, t_next, x_next) {
            events.push(e);
            break;
        }
        let head = Head::new(t_n, x_n, d_n, t_next, x_next);
        match evaluate(model, t_next, &stage_view!(&nodes, Some(head), t_next))? {
            Stage::Value(d) => nodes.push(x_next, d),
            Stage::Halt(e) => {
                events.push(e);
                break;
            }
        }
    }

    let times = (0..nodes.values.len()).map(|i| nodes.time(i)).collect();
    Ok(Trajectory {
        pre: init.clone(),
        nodes,
        times,
        events,
    })
}
