use std::fmt;
use std::sync::Arc;

use serde::Serialize;

/// Scalar nonlinearity `f(x; λ)` with declared global Lipschitz constants
/// `|f(x₁; λ) − f(x₂; λ)| ≤ k|x₁ − x₂|` and `|f(x; λ₁) − f(x; λ₂)| ≤ l|x||λ₁ − λ₂|`.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    k_lip: f64,
    l_lip: f64,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("k_lip", &self.k_lip)
            .field("l_lip", &self.l_lip)
            .finish()
    }
}

impl Nonlinearity {
    pub fn new<F>(name: impl Into<String>, k_lip: f64, l_lip: f64, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            f: Arc::new(f),
            k_lip,
            l_lip,
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", 0.0, 0.0, |_, _| 0.0)
    }

    /// `f = ε x`
    pub fn linear(eps: f64) -> Self {
        Self::new(format!("linear(eps={eps})"), eps.abs(), 0.0, move |x, _| eps * x)
    }

    /// `f = ε x³ / (1 + x²)`; the slope of `x³/(1 + x²)` peaks at 9/8.
    pub fn saturating_cubic(eps: f64) -> Self {
        Self::new(
            format!("saturating_cubic(eps={eps})"),
            1.125 * eps.abs(),
            0.0,
            move |x, _| eps * x * x * x / (1.0 + x * x),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k_lip(&self) -> f64 {
        self.k_lip
    }

    pub fn l_lip(&self) -> f64 {
        self.l_lip
    }

    #[inline]
    pub fn eval(&self, x: f64, lambda: f64) -> f64 {
        (self.f)(x, lambda)
    }

    /// Spot-checks `f(0; λ) = 0` and the declared constants on a
    /// deterministic probe lattice over `|x| ≤ x_max`, `λ ∈ [λ_lo, λ_hi]`.
    pub fn check_lipschitz(&self, x_max: f64, lambda_lo: f64, lambda_hi: f64) -> LipschitzReport {
        const NX: usize = 41;
        const NL: usize = 9;
        let xs: Vec<f64> = (0..NX)
            .map(|i| -x_max + 2.0 * x_max * i as f64 / (NX - 1) as f64)
            .collect();
        let ls: Vec<f64> = (0..NL)
            .map(|j| lambda_lo + (lambda_hi - lambda_lo) * j as f64 / (NL - 1) as f64)
            .collect();
        let mut zero_max = 0.0f64;
        let mut k_obs = 0.0f64;
        let mut l_obs = 0.0f64;
        for &l in &ls {
            zero_max = zero_max.max(self.eval(0.0, l).abs());
            for (i, &x1) in xs.iter().enumerate() {
                for &x2 in &xs[i + 1..] {
                    let q = (self.eval(x1, l) - self.eval(x2, l)).abs() / (x1 - x2).abs();
                    k_obs = k_obs.max(q);
                }
            }
        }
        for &x in &xs {
            if x == 0.0 {
                continue;
            }
            for (j, &l1) in ls.iter().enumerate() {
                for &l2 in &ls[j + 1..] {
                    let q = (self.eval(x, l1) - self.eval(x, l2)).abs() / (x.abs() * (l1 - l2).abs());
                    l_obs = l_obs.max(q);
                }
            }
        }
        let slack = 1e-12;
        LipschitzReport {
            vanishes_at_zero: zero_max == 0.0,
            k_declared: self.k_lip,
            k_observed: k_obs,
            k_ok: k_obs <= self.k_lip * (1.0 + slack) + slack,
            l_declared: self.l_lip,
            l_observed: l_obs,
            l_ok: l_obs <= self.l_lip * (1.0 + slack) + slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub vanishes_at_zero: bool,
    pub k_declared: f64,
    pub k_observed: f64,
    pub k_ok: bool,
    pub l_declared: f64,
    pub l_observed: f64,
    pub l_ok: bool,
}
