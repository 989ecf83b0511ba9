//! Lotka–Volterra predator–prey systems with a competition–cooperation term
//! in the predator equation:
//!
//! ```text
//! x' = x (a − b y)
//! y' = y (−c + d x + f(y; λ)),     x, y > 0.
//! ```
//!
//! The positive equilibrium sits at `y* = a/b`, `x* = (c − f(a/b; λ))/d`, so
//! `y*` does not move with λ and the Hopf point is simply the zero of
//! `∂f/∂y(a/b; λ)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Evaluator `(y, λ) -> value` for a user supplied interaction term.
pub type TermFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Errors raised by the planar model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LvError {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("state ({x}, {y}) is outside the open positive quadrant")]
    OutsideQuadrant { x: f64, y: f64 },
    #[error(
        "extinction condition c > f(a/b; λ) violated at λ = {lambda}: c = {c}, f(a/b; λ) = {f_value}"
    )]
    Extinction { lambda: f64, c: f64, f_value: f64 },
    #[error("∂f/∂y(a/b; λ) does not change sign on [{lo}, {hi}] (values {g_lo}, {g_hi})")]
    NotBracketed { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
}

/// The competition–cooperation term `f(y; λ)`.
#[derive(Clone)]
pub enum InteractionTerm {
    /// `f = arctan y − λ y`
    ArctanLinear,
    /// `f = y − λ y²`
    QuadLogistic,
    /// `f = y² − λ y³`
    CubicLogistic,
    /// User supplied term. Without a derivative, `∂f/∂y` falls back to a
    /// central difference with step `1e-6·max(1, |y|)`.
    Custom {
        name: String,
        value: TermFn,
        derivative: Option<TermFn>,
    },
}

impl fmt::Debug for InteractionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "InteractionTerm({})", self.name())
    }
}

impl InteractionTerm {
    pub fn custom<F>(name: impl Into<String>, value: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        InteractionTerm::Custom {
            name: name.into(),
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn custom_with_derivative<F, G>(name: impl Into<String>, value: F, derivative: G) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        InteractionTerm::Custom {
            name: name.into(),
            value: Arc::new(value),
            derivative: Some(Arc::new(derivative)),
        }
    }

    /// Parses the catalog spelling of a built-in term.
    pub fn from_kind(kind: &str) -> Option<Self> {
        match kind {
            "arctan_linear" => Some(InteractionTerm::ArctanLinear),
            "quad_logistic" => Some(InteractionTerm::QuadLogistic),
            "cubic_logistic" => Some(InteractionTerm::CubicLogistic),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            InteractionTerm::ArctanLinear => "arctan_linear",
            InteractionTerm::QuadLogistic => "quad_logistic",
            InteractionTerm::CubicLogistic => "cubic_logistic",
            InteractionTerm::Custom { name, .. } => name,
        }
    }

    pub fn value(&self, y: f64, lambda: f64) -> f64 {
        match self {
            InteractionTerm::ArctanLinear => y.atan() - lambda * y,
            InteractionTerm::QuadLogistic => y - lambda * y * y,
            InteractionTerm::CubicLogistic => y * y - lambda * y * y * y,
            InteractionTerm::Custom { value, .. } => value(y, lambda),
        }
    }

    /// `∂f/∂y` at `(y, λ)`.
    pub fn derivative(&self, y: f64, lambda: f64) -> f64 {
        match self {
            InteractionTerm::ArctanLinear => 1.0 / (1.0 + y * y) - lambda,
            InteractionTerm::QuadLogistic => 1.0 - 2.0 * lambda * y,
            InteractionTerm::CubicLogistic => 2.0 * y - 3.0 * lambda * y * y,
            InteractionTerm::Custom {
                derivative: Some(d),
                ..
            } => d(y, lambda),
            InteractionTerm::Custom {
                value,
                derivative: None,
                ..
            } => {
                let h = 1e-6 * y.abs().max(1.0);
                (value(y + h, lambda) - value(y - h, lambda)) / (2.0 * h)
            }
        }
    }

    /// True when `derivative` uses the finite-difference fallback.
    pub fn uses_fallback_derivative(&self) -> bool {
        matches!(
            self,
            InteractionTerm::Custom {
                derivative: None,
                ..
            }
        )
    }
}

/// Linear stability class of the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    /// `∂f/∂y(y*; λ) = 0`: purely imaginary eigenvalues.
    Neutral,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumInfo {
    pub lambda: f64,
    pub x_star: f64,
    pub y_star: f64,
    /// Row-major Jacobian of the vector field at the equilibrium.
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
    /// `∂f/∂y(y*; λ)`; its sign decides stability.
    pub term_slope: f64,
    pub stability: Stability,
}

impl EquilibriumInfo {
    pub fn trace(&self) -> f64 {
        self.jacobian[0][0] + self.jacobian[1][1]
    }

    pub fn det(&self) -> f64 {
        self.jacobian[0][0] * self.jacobian[1][1] - self.jacobian[0][1] * self.jacobian[1][0]
    }

    /// Equilibrium in logarithmic coordinates `(ln x*, ln y*)`.
    pub fn log_coords(&self) -> [f64; 2] {
        [self.x_star.ln(), self.y_star.ln()]
    }
}

/// Roots of `μ² − tr·μ + det`.
pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    let half = Complex64::new(tr / 2.0, 0.0);
    [half + disc, half - disc]
}

/// A Lotka–Volterra system with positive rates and a predator interaction term.
#[derive(Debug, Clone)]
pub struct LvSystem {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    term: InteractionTerm,
}

impl LvSystem {
    pub fn new(a: f64, b: f64, c: f64, d: f64, term: InteractionTerm) -> Result<Self, LvError> {
        for (name, value) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(LvError::NonPositiveParameter { name, value });
            }
        }
        Ok(Self { a, b, c, d, term })
    }

    /// The `a = b = c = d = 1` system used throughout the examples.
    pub fn unit(term: InteractionTerm) -> Self {
        Self::new(1.0, 1.0, 1.0, 1.0, term).expect("unit rates are positive")
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn term(&self) -> &InteractionTerm {
        &self.term
    }

    /// `y* = a/b`, independent of λ.
    pub fn y_star(&self) -> f64 {
        self.a / self.b
    }

    pub fn eval_rhs(&self, x: f64, y: f64, lambda: f64) -> Result<(f64, f64), LvError> {
        if !(x > 0.0 && y > 0.0) {
            return Err(LvError::OutsideQuadrant { x, y });
        }
        Ok((
            x * (self.a - self.b * y),
            y * (-self.c + self.d * x + self.term.value(y, lambda)),
        ))
    }

    /// Vector field in `(u, v) = (ln x, ln y)`; defined on the whole plane.
    pub fn eval_rhs_log(&self, u: f64, v: f64, lambda: f64) -> (f64, f64) {
        let y = v.exp();
        (
            self.a - self.b * y,
            -self.c + self.d * u.exp() + self.term.value(y, lambda),
        )
    }

    /// Closure form of [`eval_rhs_log`](Self::eval_rhs_log) for the integrator.
    pub fn log_field(&self, lambda: f64) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
        move |_t, s, ds| {
            let (du, dv) = self.eval_rhs_log(s[0], s[1], lambda);
            ds[0] = du;
            ds[1] = dv;
        }
    }

    /// Analytic Jacobian of [`eval_rhs`](Self::eval_rhs) at any point.
    pub fn jacobian(&self, x: f64, y: f64, lambda: f64) -> [[f64; 2]; 2] {
        let f = self.term.value(y, lambda);
        let fy = self.term.derivative(y, lambda);
        [
            [self.a - self.b * y, -self.b * x],
            [self.d * y, -self.c + self.d * x + f + y * fy],
        ]
    }

    /// Checks `c > f(a/b; λ)`.
    pub fn check_extinction(&self, lambda: f64) -> Result<(), LvError> {
        let f_value = self.term.value(self.y_star(), lambda);
        if self.c > f_value {
            Ok(())
        } else {
            Err(LvError::Extinction {
                lambda,
                c: self.c,
                f_value,
            })
        }
    }

    pub fn equilibrium(&self, lambda: f64) -> Result<EquilibriumInfo, LvError> {
        self.check_extinction(lambda)?;
        let y_star = self.y_star();
        let x_star = (self.c - self.term.value(y_star, lambda)) / self.d;
        let slope = self.term.derivative(y_star, lambda);
        let jacobian = [[0.0, -self.b * x_star], [self.d * y_star, y_star * slope]];
        let stability = if slope < 0.0 {
            Stability::Stable
        } else if slope > 0.0 {
            Stability::Unstable
        } else {
            Stability::Neutral
        };
        Ok(EquilibriumInfo {
            lambda,
            x_star,
            y_star,
            jacobian,
            eigenvalues: eigenvalues_2x2(&jacobian),
            term_slope: slope,
            stability,
        })
    }

    /// Bisection for the zero of `∂f/∂y(a/b; λ)` on `[lo, hi]`, stopping once
    /// the bracket is narrower than `tol`.
    pub fn hopf_locate(&self, lo: f64, hi: f64, tol: f64) -> Result<f64, LvError> {
        let y_star = self.y_star();
        let g = |l: f64| self.term.derivative(y_star, l);
        let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
        let (mut g_lo, g_hi) = (g(lo), g(hi));
        if g_lo == 0.0 {
            return Ok(lo);
        }
        if g_hi == 0.0 {
            return Ok(hi);
        }
        if g_lo.signum() == g_hi.signum() || g_lo.is_nan() || g_hi.is_nan() {
            return Err(LvError::NotBracketed {
                lo,
                hi,
                g_lo,
                g_hi,
            });
        }
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let g_mid = g(mid);
            if g_mid == 0.0 {
                return Ok(mid);
            }
            if g_mid.signum() == g_lo.signum() {
                lo = mid;
                g_lo = g_mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `V = (x − x* ln x) d + (y − y* ln y) b`.
    pub fn lyapunov_function(&self, x: f64, y: f64, lambda: f64) -> Result<f64, LvError> {
        let eq = self.equilibrium(lambda)?;
        Ok((x - eq.x_star * x.ln()) * self.d + (y - eq.y_star * y.ln()) * self.b)
    }

    /// Rate of change of the Lyapunov function along trajectories,
    /// `b (y − y*)(f(y; λ) − f(y*; λ))`. It does not depend on `x`.
    pub fn lyapunov_rate(&self, lambda: f64, y: f64) -> Result<f64, LvError> {
        if !(y > 0.0) {
            return Err(LvError::OutsideQuadrant { x: f64::NAN, y });
        }
        let y_star = self.y_star();
        Ok(self.b
            * (y - y_star)
            * (self.term.value(y, lambda) - self.term.value(y_star, lambda)))
    }

    pub fn check_proposition_conditions(&self, y_grid: &[f64]) -> ConditionReport {
        let y_star = self.y_star();
        let slope_at_zero = self.term.derivative(y_star, 0.0);
        let slope_at_one = self.term.derivative(y_star, 1.0);

        let mut first_violation = None;
        if slope_at_zero.is_nan() || slope_at_zero <= 0.0 {
            first_violation.get_or_insert(Violation::new("slope_at_zero", y_star));
        }
        if slope_at_one.is_nan() || slope_at_one >= 0.0 {
            first_violation.get_or_insert(Violation::new("slope_at_one", y_star));
        }

        let mut min_rate_at_zero = f64::INFINITY;
        let mut max_rate_at_one = f64::NEG_INFINITY;
        let mut rate_zero_ok = true;
        let mut rate_one_ok = true;
        let mut probes = 0usize;
        for &y in y_grid {
            if !(y > 0.0) || (y - y_star).abs() <= 1e-12 * y_star {
                continue;
            }
            probes += 1;
            // Both rates are finite for y > 0.
            let r0 = self.lyapunov_rate(0.0, y).unwrap_or(f64::NAN);
            let r1 = self.lyapunov_rate(1.0, y).unwrap_or(f64::NAN);
            min_rate_at_zero = min_rate_at_zero.min(r0);
            max_rate_at_one = max_rate_at_one.max(r1);
            if !(r0 > 0.0) {
                if rate_zero_ok {
                    first_violation.get_or_insert(Violation::new("rate_at_zero", y));
                }
                rate_zero_ok = false;
            }
            if !(r1 < 0.0) {
                if rate_one_ok {
                    first_violation.get_or_insert(Violation::new("rate_at_one", y));
                }
                rate_one_ok = false;
            }
        }

        ConditionReport {
            unstable_at_zero: slope_at_zero > 0.0,
            stable_at_one: slope_at_one < 0.0,
            lyapunov_increasing_at_zero: rate_zero_ok && probes > 0,
            lyapunov_decreasing_at_one: rate_one_ok && probes > 0,
            slope_at_zero,
            slope_at_one,
            min_rate_at_zero,
            max_rate_at_one,
            extinction_ok_at_zero: self.check_extinction(0.0).is_ok(),
            extinction_ok_at_one: self.check_extinction(1.0).is_ok(),
            derivative_fallback: self.term.uses_fallback_derivative(),
            probes,
            first_violation,
        }
    }
}

/// 200 logarithmically spaced probes on `[1e-2, 1e2]·y*`, minus `y*` itself.
pub fn default_probe_grid(y_star: f64) -> Vec<f64> {
    logspace(1e-2 * y_star, 1e2 * y_star, 200)
        .into_iter()
        .filter(|y| (y - y_star).abs() > 1e-12 * y_star)
        .collect()
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub condition: &'static str,
    pub y: f64,
}

impl Violation {
    fn new(condition: &'static str, y: f64) -> Self {
        Self { condition, y }
    }
}

/// Outcome of the sign checks that make λ = 0 and λ = 1 bracket a branch of
/// cycles: the equilibrium flips from unstable to stable and the Lyapunov
/// rate has a fixed sign at both ends.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    /// `∂f/∂y(y*; 0) > 0`
    pub unstable_at_zero: bool,
    /// `∂f/∂y(y*; 1) < 0`
    pub stable_at_one: bool,
    /// Lyapunov rate positive at every probe for λ = 0.
    pub lyapunov_increasing_at_zero: bool,
    /// Lyapunov rate negative at every probe for λ = 1.
    pub lyapunov_decreasing_at_one: bool,
    pub slope_at_zero: f64,
    pub slope_at_one: f64,
    pub min_rate_at_zero: f64,
    pub max_rate_at_one: f64,
    pub extinction_ok_at_zero: bool,
    pub extinction_ok_at_one: bool,
    pub derivative_fallback: bool,
    pub probes: usize,
    pub first_violation: Option<Violation>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.unstable_at_zero
            && self.stable_at_one
            && self.lyapunov_increasing_at_zero
            && self.lyapunov_decreasing_at_one
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn catalog() -> Vec<LvSystem> {
        vec![
            LvSystem::unit(InteractionTerm::ArctanLinear),
            LvSystem::unit(InteractionTerm::QuadLogistic),
            LvSystem::new(2.0, 1.0, 1.0, 1.0, InteractionTerm::QuadLogistic).unwrap(),
            LvSystem::new(2.0, 1.0, 5.0, 1.0, InteractionTerm::CubicLogistic).unwrap(),
            LvSystem::new(1.5, 0.7, 2.0, 0.3, InteractionTerm::ArctanLinear).unwrap(),
        ]
    }

    #[test]
    fn rhs_examples() {
        let s = LvSystem::unit(InteractionTerm::ArctanLinear);
        let (dx, dy) = s.eval_rhs(1.0, 1.0, 0.0).unwrap();
        assert_eq!(dx, 0.0);
        assert!((dy - 0.7853981634).abs() < 1e-10);

        let q = LvSystem::unit(InteractionTerm::QuadLogistic);
        let (dx, dy) = q.eval_rhs(2.0, 2.0, 0.5).unwrap();
        assert!((dx + 2.0).abs() < 1e-15 && (dy - 2.0).abs() < 1e-15);

        assert!(matches!(
            s.eval_rhs(0.0, 1.0, 0.5),
            Err(LvError::OutsideQuadrant { .. })
        ));
        assert!(s.eval_rhs(1.0, -1.0, 0.5).is_err());

        let (du, dv) = s.eval_rhs_log(0.0, 0.0, 0.0);
        assert_eq!(du, 0.0);
        assert!((dv - 0.7853981634).abs() < 1e-10);
    }

    #[test]
    fn rejects_nonpositive_rates() {
        let err = LvSystem::new(1.0, 0.0, 1.0, 1.0, InteractionTerm::ArctanLinear).unwrap_err();
        assert_eq!(
            err,
            LvError::NonPositiveParameter {
                name: "b",
                value: 0.0
            }
        );
    }

    #[test]
    fn equilibrium_examples() {
        let s = LvSystem::unit(InteractionTerm::ArctanLinear);
        let eq = s.equilibrium(0.0).unwrap();
        assert!((eq.x_star - (1.0 - PI / 4.0)).abs() < 1e-15);
        assert_eq!(eq.y_star, 1.0);
        assert!((eq.x_star - 0.2146018366).abs() < 1e-10);

        let eq = s.equilibrium(0.5).unwrap();
        assert_eq!(eq.trace(), 0.0);
        assert_eq!(eq.stability, Stability::Neutral);
        for mu in eq.eigenvalues {
            assert_eq!(mu.re, 0.0);
            assert!((mu.im.abs() - eq.det().sqrt()).abs() < 1e-15);
        }

        let s = LvSystem::new(2.0, 1.0, 1.0, 1.0, InteractionTerm::QuadLogistic).unwrap();
        let eq = s.equilibrium(1.0).unwrap();
        assert_eq!(eq.y_star, 2.0);
        assert_eq!(eq.x_star, 3.0);
    }

    #[test]
    fn extinction_condition_is_enforced() {
        // f(1; 0) = 1 = c for the unit quad-logistic system.
        let s = LvSystem::unit(InteractionTerm::QuadLogistic);
        let err = s.equilibrium(0.0).unwrap_err();
        assert!(matches!(err, LvError::Extinction { .. }));
        assert!(err.to_string().contains("extinction"));
        assert!(s.equilibrium(0.1).is_ok());
    }

    #[test]
    fn hopf_examples() {
        let s = LvSystem::unit(InteractionTerm::ArctanLinear);
        assert!((s.hopf_locate(0.0, 1.0, 1e-12).unwrap() - 0.5).abs() < 1e-12);
        let s = LvSystem::unit(InteractionTerm::QuadLogistic);
        assert!((s.hopf_locate(0.0, 1.0, 1e-12).unwrap() - 0.5).abs() < 1e-12);
        let s = LvSystem::new(2.0, 1.0, 5.0, 1.0, InteractionTerm::CubicLogistic).unwrap();
        let l = s.hopf_locate(0.0, 1.0, 1e-12).unwrap();
        assert!((l - 1.0 / 3.0).abs() < 1e-12);
        let eq = s.equilibrium(l).unwrap();
        assert!(eq.trace().abs() < 1e-10);
        assert!(eq.eigenvalues[0].re.abs() < 1e-10);
    }

    #[test]
    fn hopf_requires_bracket() {
        let s = LvSystem::unit(InteractionTerm::ArctanLinear);
        assert!(matches!(
            s.hopf_locate(0.6, 1.0, 1e-12),
            Err(LvError::NotBracketed { .. })
        ));
    }

    #[test]
    fn lyapunov_rate_examples() {
        let s = LvSystem::unit(InteractionTerm::ArctanLinear);
        assert_eq!(s.lyapunov_rate(0.3, 1.0).unwrap(), 0.0);
        let r = s.lyapunov_rate(0.0, 2.0).unwrap();
        assert!((r - (2f64.atan() - PI / 4.0)).abs() < 1e-15);
        assert!((r - 0.3217505544).abs() < 1e-10);
        let r = s.lyapunov_rate(1.0, 2.0).unwrap();
        assert!((r + 0.6782494456).abs() < 1e-10);
    }

    #[test]
    fn lyapunov_rate_is_derivative_along_flow() {
        // dV/dt = ∇V · (x', y') must equal the closed-form rate.
        let s = LvSystem::new(1.5, 0.7, 2.0, 0.3, InteractionTerm::ArctanLinear).unwrap();
        let lambda = 0.3;
        let eq = s.equilibrium(lambda).unwrap();
        for &(x, y) in &[(0.4, 1.1), (3.0, 0.2), (1.0, 5.0)] {
            let (dx, dy) = s.eval_rhs(x, y, lambda).unwrap();
            let grad = (s.d() * (1.0 - eq.x_star / x), s.b() * (1.0 - eq.y_star / y));
            let rate = grad.0 * dx + grad.1 * dy;
            let closed = s.lyapunov_rate(lambda, y).unwrap();
            assert!((rate - closed).abs() < 1e-12 * (1.0 + closed.abs()));
        }
    }

    #[test]
    fn conditions_for_catalog_terms() {
        let s = LvSystem::unit(InteractionTerm::ArctanLinear);
        let report = s.check_proposition_conditions(&default_probe_grid(s.y_star()));
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.probes, 200);
        assert!(report.first_violation.is_none());
        assert!(report.min_rate_at_zero > 0.0 && report.max_rate_at_one < 0.0);

        let q = LvSystem::unit(InteractionTerm::QuadLogistic);
        let report = q.check_proposition_conditions(&default_probe_grid(1.0));
        assert!(report.unstable_at_zero && report.stable_at_one);
        assert!(report.lyapunov_increasing_at_zero);
        assert!(!report.extinction_ok_at_zero);
    }

    #[test]
    fn degenerate_term_fails_instability_check() {
        let s = LvSystem::unit(InteractionTerm::custom("zero", |_, _| 0.0));
        let report = s.check_proposition_conditions(&default_probe_grid(1.0));
        assert!(!report.unstable_at_zero);
        assert!(report.derivative_fallback);
        assert_eq!(report.first_violation.unwrap().condition, "slope_at_zero");
    }

    #[test]
    fn equilibrium_residual_over_catalog() {
        for s in catalog() {
            for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let Ok(eq) = s.equilibrium(lambda) else {
                    continue;
                };
                let (dx, dy) = s.eval_rhs(eq.x_star, eq.y_star, lambda).unwrap();
                assert!(dx.hypot(dy) <= 1e-13, "{:?} λ={lambda}", s.term());
                let (du, dv) = s.eval_rhs_log(eq.x_star.ln(), eq.y_star.ln(), lambda);
                assert!(du.hypot(dv) <= 1e-13);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let h = 1e-6;
        for s in catalog() {
            for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let Ok(eq) = s.equilibrium(lambda) else {
                    continue;
                };
                let (x, y) = (eq.x_star, eq.y_star);
                let fd_col = |dx: f64, dy: f64| {
                    let p = s.eval_rhs(x + dx, y + dy, lambda).unwrap();
                    let m = s.eval_rhs(x - dx, y - dy, lambda).unwrap();
                    ((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h))
                };
                let cx = fd_col(h, 0.0);
                let cy = fd_col(0.0, h);
                let j = eq.jacobian;
                let fd = [[cx.0, cy.0], [cx.1, cy.1]];
                for r in 0..2 {
                    for c in 0..2 {
                        assert!((j[r][c] - fd[r][c]).abs() <= 1e-5);
                    }
                }
                let general = s.jacobian(x, y, lambda);
                for r in 0..2 {
                    for c in 0..2 {
                        assert!((j[r][c] - general[r][c]).abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn stability_dichotomy() {
        for s in catalog() {
            for i in 0..=20 {
                let lambda = i as f64 / 20.0;
                let Ok(eq) = s.equilibrium(lambda) else {
                    continue;
                };
                if eq.term_slope == 0.0 {
                    continue;
                }
                let max_re = eq.eigenvalues[0].re.max(eq.eigenvalues[1].re);
                assert_eq!(max_re.signum(), eq.term_slope.signum());
                assert!(eq.det() > 0.0);
                assert!((eq.trace() - eq.y_star * eq.term_slope).abs() < 1e-14);
                assert!((eq.det() - s.b() * s.d() * eq.x_star * eq.y_star).abs() < 1e-13);
            }
        }
    }

    fn term_strategy() -> impl Strategy<Value = InteractionTerm> {
        prop_oneof![
            Just(InteractionTerm::ArctanLinear),
            Just(InteractionTerm::QuadLogistic),
            Just(InteractionTerm::CubicLogistic),
        ]
    }

    proptest! {
        #[test]
        fn term_derivative_matches_central_difference(
            term in term_strategy(), y in 0.05f64..20.0, lambda in 0.0f64..1.0
        ) {
            let h = 1e-5 * y.max(1.0);
            let fd = (term.value(y + h, lambda) - term.value(y - h, lambda)) / (2.0 * h);
            let an = term.derivative(y, lambda);
            let scale = an.abs().max(term.value(y, lambda).abs() / y).max(1e-3);
            prop_assert!((fd - an).abs() <= 1e-6 * scale, "fd {fd} analytic {an}");
        }

        #[test]
        fn log_rhs_is_chain_rule_image(
            term in term_strategy(), u in -3.0f64..3.0, v in -3.0f64..3.0, lambda in 0.0f64..1.0
        ) {
            let s = LvSystem::new(1.3, 0.8, 2.5, 0.6, term).unwrap();
            let (x, y) = (u.exp(), v.exp());
            let (dx, dy) = s.eval_rhs(x, y, lambda).unwrap();
            let (du, dv) = s.eval_rhs_log(u, v, lambda);
            prop_assert!((du - dx / x).abs() <= 1e-14 * (1.0 + du.abs()));
            prop_assert!((dv - dy / y).abs() <= 1e-14 * (1.0 + dv.abs()));
        }

        #[test]
        fn lyapunov_rate_factorization(y in 0.01f64..100.0, lambda in 0.0f64..1.0) {
            let s = LvSystem::new(2.0, 0.5, 3.0, 1.0, InteractionTerm::ArctanLinear).unwrap();
            let t = s.term();
            let direct = 0.5 * (y - 4.0) * (t.value(y, lambda) - t.value(4.0, lambda));
            prop_assert_eq!(s.lyapunov_rate(lambda, y).unwrap(), direct);
        }
    }
}
