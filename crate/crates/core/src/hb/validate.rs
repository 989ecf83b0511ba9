//! Independent checks of a converged branch point.

use std::f64::consts::PI;

use serde::Serialize;

use super::operator::{HarmonicBalance, HbBranchPoint};
use super::spectral::{apply_symbol, Spectral, TrigPoly};
use super::HbError;
use crate::ode::{integrate, OdeOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub m_check: usize,
    /// `max_j |L(w d/dt; λ) x − f(x; λ)|` on the check grid.
    pub spectral_residual: f64,
    /// `|X(T) − X(0)| / |X(0)|` for the order-ℓ system over one period.
    pub time_domain_mismatch: f64,
    /// `T = 2π / w`.
    pub period: f64,
    /// Initial derivatives `X(0), X'(0), ..., X^(ℓ−1)(0)`.
    pub initial_state: Vec<f64>,
    pub final_state: Vec<f64>,
}

/// Fourier coefficients of `x_r`, first harmonic included.
fn full_coefficients(hb: &HarmonicBalance, point: &HbBranchPoint) -> Result<TrigPoly, HbError> {
    let h = point.h(hb.poly(), hb.config().resonance_guard)?;
    let mut x = h.scaled(point.r).to_trig();
    x.sin[0] = point.r / PI.sqrt();
    Ok(x)
}

/// `d^k/dt^k x` at `t = 0`.
fn derivative_at_zero(x: &TrigPoly, k: usize) -> f64 {
    let mut s = if k == 0 { x.c0 } else { 0.0 };
    for (i, (a, b)) in x.cos.iter().zip(&x.sin).enumerate() {
        let nk = ((i + 1) as f64).powi(k as i32);
        s += nk
            * match k % 4 {
                0 => *a,
                1 => *b,
                2 => -a,
                _ => -b,
            };
    }
    s
}

pub fn validate_solution(hb: &HarmonicBalance, point: &HbBranchPoint, m_check: usize) -> Result<ValidationReport, HbError> {
    let poly = hb.poly();
    let nl = hb.nonlinearity();
    let (w, lambda) = (point.w, point.lambda);
    let x = full_coefficients(hb, point)?;
    let spectral = Spectral::new(x.degree(), m_check)?;

    // Spectral residual: mode-wise action of L, first harmonic handled apart.
    let mut lx = apply_symbol(poly, w, lambda, &super::spectral::QCoeffs::from_trig(&x)).to_trig();
    let l1 = poly.on_axis(w, lambda);
    let (a1, b1) = (x.cos[0], x.sin[0]);
    let c1 = num_complex::Complex64::new(a1, -b1) * l1;
    lx.cos[0] = c1.re;
    lx.sin[0] = -c1.im;
    let x_grid = spectral.synthesize(&x);
    let lx_grid = spectral.synthesize(&lx);
    let spectral_residual = x_grid
        .iter()
        .zip(&lx_grid)
        .map(|(&xj, &lj)| (lj - nl.eval(xj, lambda)).abs())
        .fold(0.0, f64::max);

    // Time domain: X(τ) = x(wτ) solves L(d/dτ; λ) X = f(X; λ).
    let ell = poly.degree();
    let a: Vec<f64> = poly.coefficients_at(lambda).into_iter().map(|c| c.0).collect();
    let initial_state: Vec<f64> = (0..ell)
        .map(|k| w.powi(k as i32) * derivative_at_zero(&x, k))
        .collect();
    let rhs = |_t: f64, s: &[f64], ds: &mut [f64]| {
        ds[..ell - 1].copy_from_slice(&s[1..ell]);
        let lower: f64 = a.iter().zip(s).map(|(ak, sk)| ak * sk).sum();
        ds[ell - 1] = nl.eval(s[0], lambda) - lower;
    };
    let period = 2.0 * PI / w;
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        blowup_norm: f64::MAX,
        ..OdeOptions::default()
    };
    let (time_domain_mismatch, final_state) = match integrate(rhs, &initial_state, period, opts) {
        Ok(traj) => {
            let end = traj.final_state().to_vec();
            let diff = end
                .iter()
                .zip(&initial_state)
                .map(|(e, s)| (e - s) * (e - s))
                .sum::<f64>()
                .sqrt();
            let scale = initial_state.iter().map(|s| s * s).sum::<f64>().sqrt();
            (diff / scale.max(f64::MIN_POSITIVE), end)
        }
        Err(_) => (f64::INFINITY, Vec::new()),
    };

    Ok(ValidationReport {
        m_check,
        spectral_residual,
        time_domain_mismatch,
        period,
        initial_state,
        final_state,
    })
}
