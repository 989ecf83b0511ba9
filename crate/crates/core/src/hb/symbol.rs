use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::HbError;

/// A coefficient `a_k(λ)` together with its derivative.
#[derive(Clone)]
pub enum Coefficient {
    /// Polynomial in λ, lowest power first.
    Poly(Vec<f64>),
    /// Evaluator returning `(a_k(λ), a_k'(λ))`.
    Custom(Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Poly(c) => write!(f, "Poly({c:?})"),
            Coefficient::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Coefficient::Poly(vec![c])
    }

    pub fn eval(&self, lambda: f64) -> (f64, f64) {
        match self {
            Coefficient::Poly(c) => {
                let mut v = 0.0;
                let mut d = 0.0;
                for &ck in c.iter().rev() {
                    d = d * lambda + v;
                    v = v * lambda + ck;
                }
                (v, d)
            }
            Coefficient::Custom(f) => f(lambda),
        }
    }
}

/// `L(p; λ)` and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValue {
    pub value: Complex64,
    pub d_p: Complex64,
    pub d_lambda: Complex64,
}

/// Monic symbol `L(p; λ) = p^ℓ + Σ_{k<ℓ} a_k(λ) p^k`.
#[derive(Debug, Clone)]
pub struct SymbolPolynomial {
    coeffs: Vec<Coefficient>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub w: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl SymbolPolynomial {
    /// `coeffs[k]` is `a_k`; the degree is `coeffs.len()`.
    pub fn new(coeffs: Vec<Coefficient>) -> Result<Self, HbError> {
        if coeffs.len() < 2 {
            return Err(HbError::DegreeTooLow(coeffs.len()));
        }
        Ok(Self { coeffs })
    }

    /// Symbol with polynomial-in-λ coefficients, `poly[k][j]` multiplying
    /// `λ^j p^k`.
    pub fn from_polynomials(poly: Vec<Vec<f64>>) -> Result<Self, HbError> {
        Self::new(poly.into_iter().map(Coefficient::Poly).collect())
    }

    /// `p² + λ p + 1`, with root `(w₀, λ₀) = (1, 0)`.
    pub fn damped_oscillator() -> Self {
        Self::from_polynomials(vec![vec![1.0], vec![0.0, 1.0]]).expect("degree two")
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficient(&self, k: usize) -> &Coefficient {
        &self.coeffs[k]
    }

    /// `(a_k(λ), a_k'(λ))` for `k < ℓ`.
    pub fn coefficients_at(&self, lambda: f64) -> Vec<(f64, f64)> {
        self.coeffs.iter().map(|c| c.eval(lambda)).collect()
    }

    /// Horner evaluation of `L`, `∂L/∂p` and `∂L/∂λ`.
    pub fn eval(&self, p: Complex64, lambda: f64) -> SymbolValue {
        let mut value = Complex64::new(1.0, 0.0);
        let mut d_p = Complex64::new(0.0, 0.0);
        let mut d_lambda = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            let (a, da) = c.eval(lambda);
            d_p = d_p * p + value;
            value = value * p + a;
            d_lambda = d_lambda * p + da;
        }
        SymbolValue {
            value,
            d_p,
            d_lambda,
        }
    }

    /// `L(p; λ)` alone.
    pub fn value(&self, p: Complex64, lambda: f64) -> Complex64 {
        self.eval(p, lambda).value
    }

    /// `L(wi; λ)`.
    pub fn on_axis(&self, w: f64, lambda: f64) -> Complex64 {
        self.value(Complex64::new(0.0, w), lambda)
    }

    /// `J(w, λ) = [[Re L_λ, −Im L_p], [Im L_λ, Re L_p]]` at `p = wi`, and its
    /// determinant. The columns are derivatives of `(Re L, Im L)(wi; λ)` with
    /// respect to λ and w.
    pub fn j_matrix(&self, w: f64, lambda: f64) -> ([[f64; 2]; 2], f64) {
        let s = self.eval(Complex64::new(0.0, w), lambda);
        let j = [
            [s.d_lambda.re, -s.d_p.im],
            [s.d_lambda.im, s.d_p.re],
        ];
        (j, j[0][0] * j[1][1] - j[0][1] * j[1][0])
    }

    /// Damped Newton for `L(wi; λ) = u + iv`.
    pub fn solve_uv(&self, u: f64, v: f64, seed: (f64, f64), tol: f64) -> Result<NewtonOutcome, HbError> {
        const MAX_ITER: usize = 100;
        let target = Complex64::new(u, v);
        let (mut w, mut lambda) = seed;
        let mut res = (self.on_axis(w, lambda) - target).norm();
        for it in 0..=MAX_ITER {
            if res <= tol {
                return Ok(NewtonOutcome {
                    w,
                    lambda,
                    iterations: it,
                    residual: res,
                });
            }
            if it == MAX_ITER {
                break;
            }
            let f = self.on_axis(w, lambda) - target;
            let (j, det) = self.j_matrix(w, lambda);
            if det.abs() < 1e-12 {
                return Err(HbError::Degenerate { w, lambda, det });
            }
            // J · (dλ, dw) = −F
            let d_lambda = (-f.re * j[1][1] + f.im * j[0][1]) / det;
            let d_w = (-f.im * j[0][0] + f.re * j[1][0]) / det;
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let (wn, ln) = (w + t * d_w, lambda + t * d_lambda);
                let rn = (self.on_axis(wn, ln) - target).norm();
                if rn < res {
                    w = wn;
                    lambda = ln;
                    res = rn;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                // Stagnation at roundoff level counts as convergence.
                let scale = 1.0 + w.abs().powi(self.degree() as i32) + target.norm();
                if res <= tol.max(64.0 * f64::EPSILON * scale) {
                    return Ok(NewtonOutcome {
                        w,
                        lambda,
                        iterations: it + 1,
                        residual: res,
                    });
                }
                return Err(HbError::NotConverged {
                    iterations: it + 1,
                    w,
                    lambda,
                    residual: res,
                });
            }
        }
        Err(HbError::NotConverged {
            iterations: MAX_ITER,
            w,
            lambda,
            residual: res,
        })
    }

    /// The root `(w₀, λ₀)` of `L(wi; λ) = 0` nearest the seed.
    pub fn find_root(&self, seed: (f64, f64), tol: f64) -> Result<NewtonOutcome, HbError> {
        self.solve_uv(0.0, 0.0, seed, tol)
    }

    /// Inverts `(w, λ) ↦ (Re L(wi; λ), Im L(wi; λ))`.
    pub fn uv_to_wlambda(&self, u: f64, v: f64, seed: (f64, f64)) -> Result<(f64, f64), HbError> {
        self.solve_uv(u, v, seed, 1e-13).map(|o| (o.w, o.lambda))
    }
}
