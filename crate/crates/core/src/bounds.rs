//! The rational envelope `r(x) = ax/(1 + bx)` and the bound functions
//! built from it.
//!
//! With `r` fixed, an oscillating solution's limit superior `M` and limit
//! inferior `m` satisfy `m ≥ D(M)`, `m ≥ r(−r(M)/2)` and `M ≤ r(m)`, where
//!
//! * `A(x) = x + r(x) + (1/r(x)) ∫ₓ⁰ r(t) dt`,
//! * `B(x) = (1/r(x)) ∫_{−r(x)}⁰ r(s) ds`,
//! * `D(x) = A(x)` while `r(x) < −x` and `B(x)` afterwards (`x ≥ 0`),
//! * `R(x) = A'(0)² x / (A'(0) − A''(0) x / 2)`, the Möbius map sharing
//!   the second-order jet of `A` at zero.
//!
//! `A` and `B` have removable singularities at zero. The closed forms used
//! here are rearranged so that no `0/0` appears: with `u = bx` and
//! `h(u) = (u − ln(1 + u))/u`,
//! `A(x) = (u + au/(1+u) − (1+u) h(u)) / b` and `B(x) = a h(−b r(x)) / b`.
//! A quadrature path evaluates the defining integrals directly and is kept
//! for cross-checking.

use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, linspace, SIMPSON_TOL};

/// Below this radius the quadrature path returns the first-order Taylor
/// value instead of dividing two vanishing quantities.
pub const SINGULARITY_RADIUS: f64 = 1e-6;

/// Envelope parameters `a < 0`, `b ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalBound {
    a: f64,
    b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    A,
    B,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::A => f.write_str("A"),
            Branch::B => f.write_str("B"),
        }
    }
}

/// Value of `D` together with the branch that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DValue {
    pub value: f64,
    pub branch: Branch,
}

/// Constants derived from `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "A_prime_0")]
    pub a_prime0: f64,
    #[serde(rename = "A_second_0")]
    pub a_second0: f64,
    #[serde(rename = "B_prime_0")]
    pub b_prime0: f64,
    /// `None` when `R` is linear (`A''(0) = 0`) and its domain is the line.
    pub nu: Option<f64>,
    pub x2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x2_reason: Option<String>,
    /// `R` is only meaningful for `a < −1`.
    pub r_outside_hypothesis: bool,
}

/// `(u − ln(1 + u)) / u`, continuous through `u = 0`.
fn log_excess_ratio(u: f64) -> f64 {
    if u.abs() < 0.1 {
        // Σ_{k≥2} (−1)^k u^{k−1} / k, summed from the small end.
        const TERMS: usize = 24;
        let mut powers = [0.0; TERMS];
        let mut p = u;
        for slot in powers.iter_mut() {
            *slot = p;
            p *= u;
        }
        let mut sum = 0.0;
        for k in (0..TERMS).rev() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * powers[k] / (k + 2) as f64;
        }
        sum
    } else {
        (u - u.ln_1p()) / u
    }
}

impl RationalBound {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a < 0.0) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: a,
                reason: "envelope slope must be finite and negative",
            });
        }
        if !(b.is_finite() && b >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "b",
                value: b,
                reason: "envelope curvature must be finite and nonnegative",
            });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Left end of the domain: `−1/b` for `b > 0`, `−∞` otherwise.
    pub fn domain_low(&self) -> f64 {
        if self.b > 0.0 {
            -1.0 / self.b
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.domain_low()
    }

    /// The same slope with `b` rescaled to 1, and the scale `b` that maps
    /// `x` to the normalized variable `bx`. For `b = 0` this is the
    /// identity with scale 1.
    pub fn normalized(&self) -> (Self, f64) {
        if self.b > 0.0 {
            (Self { a: self.a, b: 1.0 }, self.b)
        } else {
            (*self, 1.0)
        }
    }

    fn check(&self, what: &'static str, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                what,
                x,
                boundary: self.domain_low(),
            })
        }
    }

    /// `r(x) = ax/(1 + bx)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check("r", x)?;
        Ok(self.a * x / (1.0 + self.b * x))
    }

    pub fn a_prime0(&self) -> f64 {
        self.a + 0.5
    }

    /// `A''(0) = −b(2a + 1/3)`; at `b = 1` this is `−(2a + 1/3)`.
    pub fn a_second0(&self) -> f64 {
        -self.b * (2.0 * self.a + 1.0 / 3.0)
    }

    pub fn b_prime0(&self) -> f64 {
        -self.a * self.a / 2.0
    }

    /// Left end `ν = 2A'(0)/A''(0)` of the domain of `R`; `−∞` when `R` is
    /// linear.
    pub fn nu(&self) -> f64 {
        let second = self.a_second0();
        if second == 0.0 {
            f64::NEG_INFINITY
        } else {
            2.0 * self.a_prime0() / second
        }
    }

    /// The positive solution `x₂ = −(1 + a)/b` of `r(x) = −x`.
    pub fn x2(&self) -> Result<f64> {
        if self.b > 0.0 && self.a < -1.0 {
            Ok(-(1.0 + self.a) / self.b)
        } else {
            Err(Error::NoCrossing {
                a: self.a,
                b: self.b,
            })
        }
    }

    pub fn derived_constants(&self) -> DerivedConstants {
        let nu = self.nu();
        let (x2, x2_reason) = match self.x2() {
            Ok(v) => (Some(v), None),
            Err(_) => (None, Some("no-crossing".to_owned())),
        };
        DerivedConstants {
            a: self.a,
            b: self.b,
            a_prime0: self.a_prime0(),
            a_second0: self.a_second0(),
            b_prime0: self.b_prime0(),
            nu: nu.is_finite().then_some(nu),
            x2,
            x2_reason,
            r_outside_hypothesis: self.a >= -1.0,
        }
    }

    /// `A(x)` from its closed form.
    pub fn bound_a(&self, x: f64) -> Result<f64> {
        self.check("A", x)?;
        if self.b == 0.0 {
            return Ok(self.a_prime0() * x);
        }
        let u = self.b * x;
        let a1 = u + self.a * u / (1.0 + u) - (1.0 + u) * log_excess_ratio(u);
        Ok(a1 / self.b)
    }

    /// `A(x)` with `∫ₓ⁰ r` evaluated by adaptive Simpson quadrature.
    pub fn bound_a_quadrature(&self, x: f64) -> Result<f64> {
        self.check("A", x)?;
        if x.abs() < SINGULARITY_RADIUS {
            return Ok(self.a_prime0() * x);
        }
        let rx = self.a * x / (1.0 + self.b * x);
        let tol = SIMPSON_TOL * rx.abs().min(1.0);
        let integral = adaptive_simpson(|t| self.a * t / (1.0 + self.b * t), x, 0.0, tol);
        Ok(x + rx + integral / rx)
    }

    fn inner_limit(&self, x: f64) -> Result<f64> {
        let rx = self.eval(x)?;
        if !self.contains(-rx) {
            return Err(Error::Domain {
                what: "B (inner limit -r(x))",
                x,
                boundary: self.domain_low(),
            });
        }
        Ok(rx)
    }

    /// `B(x)` from its closed form. Requires `−r(x)` inside the domain,
    /// which is automatic for `x ≥ 0`.
    pub fn bound_b(&self, x: f64) -> Result<f64> {
        let rx = self.inner_limit(x)?;
        if self.b == 0.0 {
            return Ok(self.b_prime0() * x);
        }
        Ok(self.a * log_excess_ratio(-self.b * rx) / self.b)
    }

    /// `B(x)` with `∫_{−r(x)}⁰ r` evaluated by adaptive Simpson quadrature.
    pub fn bound_b_quadrature(&self, x: f64) -> Result<f64> {
        let rx = self.inner_limit(x)?;
        if x.abs() < SINGULARITY_RADIUS {
            return Ok(self.b_prime0() * x);
        }
        let tol = SIMPSON_TOL * rx.abs().min(1.0);
        let integral = adaptive_simpson(|s| self.a * s / (1.0 + self.b * s), -rx, 0.0, tol);
        Ok(integral / rx)
    }

    /// `D(x)` for `x ≥ 0`.
    pub fn bound_d(&self, x: f64) -> Result<DValue> {
        if !(x >= 0.0) {
            return Err(Error::Domain {
                what: "D",
                x,
                boundary: 0.0,
            });
        }
        if self.eval(x)? < -x {
            Ok(DValue {
                value: self.bound_a(x)?,
                branch: Branch::A,
            })
        } else {
            Ok(DValue {
                value: self.bound_b(x)?,
                branch: Branch::B,
            })
        }
    }

    /// `R(x)` on `(ν, ∞)`. Evaluates for any `a`; only `a < −1` is
    /// covered by the comparison lemmas (see
    /// [`DerivedConstants::r_outside_hypothesis`]).
    pub fn bound_r(&self, x: f64) -> Result<f64> {
        let first = self.a_prime0();
        let second = self.a_second0();
        if second == 0.0 {
            return Ok(first * x);
        }
        let nu = self.nu();
        if !(x > nu) {
            return Err(Error::Domain {
                what: "R",
                x,
                boundary: nu,
            });
        }
        Ok(first * first * x / (first - 0.5 * second * x))
    }

    /// `R∘R(x)`, evaluated through the composed Möbius coefficients so that
    /// the identity case `A'(0) = −1` is reproduced exactly.
    pub fn rr_map(&self, x: f64) -> Result<f64> {
        let first = self.a_prime0();
        let second = self.a_second0();
        let alpha = first * first;
        if second == 0.0 {
            return Ok(alpha * x);
        }
        let inner = self.bound_r(x)?;
        let nu = self.nu();
        if !(inner > nu) {
            return Err(Error::Domain {
                what: "R∘R (inner value R(x))",
                x: inner,
                boundary: nu,
            });
        }
        let beta = first;
        let gamma = -0.5 * second;
        Ok(alpha * alpha * x / (beta * beta + gamma * (alpha + beta) * x))
    }

    /// `λ(M) = r(r(−r(M)/2))` for `M ≥ 0`.
    pub fn lambda_map(&self, m: f64) -> Result<f64> {
        if !(m >= 0.0) {
            return Err(Error::Domain {
                what: "lambda",
                x: m,
                boundary: 0.0,
            });
        }
        let first = self.eval(m)?;
        let second = self.eval(-first / 2.0)?;
        self.eval(second)
    }
}

/// One row of a [`BoundTable`]. Cells are `None` where the function is
/// undefined; `reason` collects the domain errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub x: f64,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    #[serde(rename = "D")]
    pub d: Option<f64>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub branch: Option<Branch>,
    pub reason: Option<String>,
}

/// Tabulation of `A, B, D, R` over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct BoundTable {
    pub bound: RationalBound,
    pub constants: DerivedConstants,
    pub rows: Vec<BoundRow>,
}

pub const BOUND_TABLE_HEADER: &str = "x,A,B,D,R,branch,reason";

impl BoundTable {
    /// Tabulates over `grid`; the grid is sorted and deduplicated.
    pub fn build(bound: RationalBound, grid: impl IntoIterator<Item = f64>) -> Self {
        let mut xs: Vec<f64> = grid.into_iter().filter(|x| !x.is_nan()).collect();
        xs.sort_by(|p, q| p.total_cmp(q));
        xs.dedup();
        let rows = xs.into_iter().map(|x| Self::row(&bound, x)).collect();
        Self {
            bound,
            constants: bound.derived_constants(),
            rows,
        }
    }

    /// `n` evenly spaced points on `[x_lo, x_max]` plus `0`, where `x_lo`
    /// stays 1% inside the pole for `b > 0` and is `−x_max` otherwise.
    pub fn default_grid(bound: &RationalBound, x_max: f64, n: usize) -> Vec<f64> {
        let lo = if bound.b() > 0.0 {
            (0.99 * bound.domain_low()).max(-x_max)
        } else {
            -x_max
        };
        let mut grid = linspace(lo, x_max, n);
        grid.push(0.0);
        grid
    }

    fn row(bound: &RationalBound, x: f64) -> BoundRow {
        let mut reasons = Vec::new();
        let mut keep = |res: Result<f64>| match res {
            Ok(v) => Some(v),
            Err(e) => {
                reasons.push(e.to_string());
                None
            }
        };
        let a = keep(bound.bound_a(x));
        let b = keep(bound.bound_b(x));
        let r = keep(bound.bound_r(x));
        let (d, branch) = match bound.bound_d(x) {
            Ok(v) => (Some(v.value), Some(v.branch)),
            Err(e) => {
                reasons.push(e.to_string());
                (None, None)
            }
        };
        BoundRow {
            x,
            a,
            b,
            d,
            r,
            branch,
            reason: (!reasons.is_empty()).then(|| reasons.join("; ")),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        // Prints signed zeros as `0`.
        fn num(x: f64) -> String {
            if x == 0.0 { "0".to_owned() } else { x.to_string() }
        }
        fn cell(v: Option<f64>) -> String {
            v.map(num).unwrap_or_default()
        }
        writeln!(w, "{BOUND_TABLE_HEADER}")?;
        for row in &self.rows {
            let reason = row
                .reason
                .as_deref()
                .map(|s| format!("\"{}\"", s.replace('"', "\"\"")))
                .unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                num(row.x),
                cell(row.a),
                cell(row.b),
                cell(row.d),
                cell(row.r),
                row.branch.map(|b| b.to_string()).unwrap_or_default(),
                reason
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bound(a: f64, b: f64) -> RationalBound {
        RationalBound::new(a, b).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(RationalBound::new(0.0, 1.0).is_err());
        assert!(RationalBound::new(1.0, 1.0).is_err());
        assert!(RationalBound::new(-1.0, -0.1).is_err());
        assert!(RationalBound::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn r_examples() {
        assert_eq!(bound(-1.0, 1.0).eval(0.0).unwrap(), 0.0);
        assert_eq!(bound(-1.5, 1.0).eval(1.0).unwrap(), -0.75);
        assert_eq!(bound(-1.5, 0.0).eval(2.0).unwrap(), -3.0);
    }

    #[test]
    fn r_reports_the_pole() {
        match bound(-1.5, 2.0).eval(-0.5) {
            Err(Error::Domain { boundary, .. }) => assert_eq!(boundary, -0.5),
            other => panic!("expected domain error, got {other:?}"),
        }
        assert!(bound(-1.5, 0.0).eval(-1e6).is_ok());
    }

    #[test]
    fn a_examples() {
        assert_eq!(bound(-1.5, 1.0).bound_a(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bound(-1.5, 0.0).bound_a(2.0).unwrap(), -2.0, epsilon = 1e-15);
        let h = 1e-5;
        let bd = bound(-1.5, 1.0);
        let slope = (bd.bound_a(h).unwrap() - bd.bound_a(-h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(slope, -1.0, epsilon = 1e-6);
    }

    #[test]
    fn b_examples() {
        assert_eq!(bound(-1.5, 1.0).bound_b(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bound(-1.5, 0.0).bound_b(1.0).unwrap(), -1.125, epsilon = 1e-15);
        let h = 1e-5;
        let bd = bound(-1.5, 1.0);
        let slope = (bd.bound_b(h).unwrap() - bd.bound_b(-h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(slope, -1.125, epsilon = 1e-6);
    }

    #[test]
    fn b_rejects_inner_limit_outside_domain() {
        // r(-0.5) = 1.5 for a = -1.5, b = 1, so -r(x) = -1.5 < -1.
        assert!(matches!(
            bound(-1.5, 1.0).bound_b(-0.5),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn d_branches() {
        let bd = bound(-1.5, 1.0);
        assert_eq!(bd.bound_d(0.0).unwrap().value, 0.0);
        let near = bd.bound_d(0.1).unwrap();
        assert_eq!(near.branch, Branch::A);
        assert!(bd.eval(0.1).unwrap() < -0.1);
        let far = bd.bound_d(1.0).unwrap();
        assert_eq!(far.branch, Branch::B);
        assert!(bd.bound_d(-0.1).is_err());
    }

    #[test]
    fn r_function_examples() {
        let bd = bound(-1.5, 1.0);
        assert_eq!(bd.bound_r(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(bd.nu(), -0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(bd.bound_r(1.0).unwrap(), -3.0 / 7.0, epsilon = 1e-15);
        assert!(bd.bound_r(-0.75).is_err());
        assert!(bd.bound_r(-0.8).is_err());
    }

    #[test]
    fn r_function_slope_matches_a_slope() {
        let bd = bound(-1.3, 1.0);
        let h = 1e-6;
        let slope = (bd.bound_r(h).unwrap() - bd.bound_r(-h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(slope, bd.a_prime0(), epsilon = 1e-8);
    }

    #[test]
    fn x2_examples() {
        assert_abs_diff_eq!(bound(-1.5, 1.0).x2().unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(bound(-2.0, 1.0).x2().unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(
            bound(-1.5, 0.0).x2(),
            Err(Error::NoCrossing { .. })
        ));
        assert!(bound(-0.9, 1.0).x2().is_err());
    }

    #[test]
    fn x2_is_where_a_meets_b() {
        for a in [-1.1, -1.25, -1.5] {
            let bd = bound(a, 1.0);
            let x2 = bd.x2().unwrap();
            assert_abs_diff_eq!(bd.eval(x2).unwrap(), -x2, epsilon = 1e-15);
            assert!((bd.bound_a(x2).unwrap() - bd.bound_b(x2).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(bound(-1.0, 1.0).lambda_map(0.0).unwrap(), 0.0);
        // Composed by hand: r(1) = -0.625, r(0.3125) = -0.297619..., r(that) = 0.529661...
        assert_abs_diff_eq!(
            bound(-1.25, 1.0).lambda_map(1.0).unwrap(),
            0.529_661_016_949_152_5,
            epsilon = 1e-12
        );
        let h = 1e-7;
        let slope = bound(-1.0, 1.0).lambda_map(h).unwrap() / h;
        assert_abs_diff_eq!(slope, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn rr_map_is_identity_at_the_boundary_slope() {
        let bd = bound(-1.5, 1.0);
        for m in [1e-3, 0.1, 0.3, 0.49] {
            assert_eq!(bd.rr_map(m).unwrap(), m);
        }
    }

    #[test]
    fn rr_map_matches_direct_composition() {
        let bd = bound(-1.4, 1.0);
        for m in [1e-3, 0.1, 0.3] {
            let direct = bd.bound_r(bd.bound_r(m).unwrap()).unwrap();
            assert_abs_diff_eq!(bd.rr_map(m).unwrap(), direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn derived_constants_at_the_boundary_slope() {
        let c = bound(-1.5, 1.0).derived_constants();
        assert_eq!(c.a_prime0, -1.0);
        assert_abs_diff_eq!(c.a_second0, 8.0 / 3.0, epsilon = 1e-15);
        assert_eq!(c.b_prime0, -1.125);
        assert_abs_diff_eq!(c.nu.unwrap(), -0.75, epsilon = 1e-15);
        assert_eq!(c.x2, Some(0.5));
        assert!(!c.r_outside_hypothesis);
        let linear = bound(-1.0, 0.0).derived_constants();
        assert_eq!(linear.x2, None);
        assert_eq!(linear.x2_reason.as_deref(), Some("no-crossing"));
        assert!(linear.r_outside_hypothesis);
    }

    #[test]
    fn nu_lies_inside_the_pole() {
        for a in [-0.6, -1.0, -1.5, -3.0] {
            let nu = bound(a, 1.0).nu();
            assert!(nu > -1.0 && nu < 0.0, "a = {a}: nu = {nu}");
        }
    }

    #[test]
    fn table_has_zero_row_and_empty_r_left_of_nu() {
        let bd = bound(-1.5, 1.0);
        let table = BoundTable::build(bd, BoundTable::default_grid(&bd, 2.0, 41));
        let zero = table.rows.iter().find(|r| r.x == 0.0).unwrap();
        assert_eq!(
            (zero.a, zero.b, zero.d, zero.r),
            (Some(0.0), Some(0.0), Some(0.0), Some(0.0))
        );
        for row in &table.rows {
            assert_eq!(row.r.is_none(), row.x <= bd.nu(), "x = {}", row.x);
        }
        assert!(table.rows.windows(2).all(|w| w[0].x < w[1].x));
        let mut csv = Vec::new();
        table.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("x,A,B,D,R,branch,reason\n"));
        assert!(text.contains("\n0,0,0,0,0,B,\n"));
    }
}
