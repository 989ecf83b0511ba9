use std::f64::consts::PI;

use serde::Serialize;

use super::nonlinearity::Nonlinearity;
use super::spectral::{solve_q, QCoeffs, Spectral, TripleState};
use super::symbol::SymbolPolynomial;
use super::HbError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct HbConfig {
    /// Highest harmonic kept.
    pub n_harmonics: usize,
    /// Collocation grid size.
    pub grid: usize,
    /// Radius of the ball `‖(u, v, y)‖ ≤ q`.
    pub q: f64,
    /// Picard stopping tolerance in the triple norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest admissible `|L(nwi; λ)|` for `n ≠ ±1`.
    pub resonance_guard: f64,
}

impl Default for HbConfig {
    fn default() -> Self {
        Self {
            n_harmonics: 32,
            grid: 128,
            q: 0.5,
            tol: 1e-12,
            max_iter: 1000,
            resonance_guard: 1e-12,
        }
    }
}

/// Result of one application of `A_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageOfAr {
    pub state: TripleState,
    /// `(w, λ)` decoded from the input `(u, v)`.
    pub w: f64,
    pub lambda: f64,
}

/// A converged point `(r, λ(r), w(r), x_r)` of the branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HbBranchPoint {
    pub r: f64,
    pub lambda: f64,
    pub w: f64,
    pub triple: TripleState,
    /// `max_j |x_r(t_j)|` over the collocation grid.
    pub sup_norm_x: f64,
    /// Final Picard increment.
    pub residual: f64,
    /// Largest ratio of successive increments over the last three steps.
    pub contraction_estimate: f64,
    pub iterations: usize,
}

impl HbBranchPoint {
    pub fn contraction_flagged(&self) -> bool {
        self.contraction_estimate >= 1.0
    }

    /// `h = L(w d/dt; λ)⁻¹ y`, the non-first-harmonic part of `x_r / r`.
    pub fn h(&self, poly: &SymbolPolynomial, guard: f64) -> Result<QCoeffs, HbError> {
        solve_q(poly, self.w, self.lambda, &self.triple.y, guard)
    }
}

/// Converged sweep over an increasing grid of amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub points: Vec<HbBranchPoint>,
    /// `max |λ(r_{i+1}) − λ(r_i)| / (r_{i+1} − r_i)`.
    pub lambda_lipschitz: f64,
    /// Same quotient for `w(r)`.
    pub w_lipschitz: f64,
}

impl Sweep {
    fn from_points(points: Vec<HbBranchPoint>) -> Self {
        let quotient = |get: fn(&HbBranchPoint) -> f64| {
            points
                .windows(2)
                .map(|p| (get(&p[1]) - get(&p[0])).abs() / (p[1].r - p[0].r))
                .fold(0.0, f64::max)
        };
        let lambda_lipschitz = quotient(|p| p.lambda);
        let w_lipschitz = quotient(|p| p.w);
        Self {
            points,
            lambda_lipschitz,
            w_lipschitz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("sweep failed at r = {r}: {source}")]
pub struct SweepFailure {
    pub r: f64,
    pub partial: Sweep,
    pub source: HbError,
}

/// The operator `A_r` for one symbol and nonlinearity.
#[derive(Debug, Clone)]
pub struct HarmonicBalance {
    poly: SymbolPolynomial,
    nl: Nonlinearity,
    config: HbConfig,
    spectral: Spectral,
}

impl HarmonicBalance {
    pub fn new(poly: SymbolPolynomial, nl: Nonlinearity, config: HbConfig) -> Result<Self, HbError> {
        if !(config.tol > 0.0 && config.q > 0.0 && config.resonance_guard > 0.0) {
            return Err(HbError::InvalidConfig(
                "tolerance, ball radius and resonance guard must be positive".into(),
            ));
        }
        let spectral = Spectral::new(config.n_harmonics, config.grid)?;
        Ok(Self {
            poly,
            nl,
            config,
            spectral,
        })
    }

    pub fn poly(&self) -> &SymbolPolynomial {
        &self.poly
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }

    pub fn config(&self) -> &HbConfig {
        &self.config
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn zero_state(&self) -> TripleState {
        TripleState::zeros(self.config.n_harmonics)
    }

    /// One application of `A_r`. `seed` starts the Newton solve for `(w, λ)`.
    pub fn apply(&self, r: f64, state: &TripleState, seed: (f64, f64)) -> Result<ImageOfAr, HbError> {
        let norm = state.norm();
        if norm > self.config.q {
            return Err(HbError::OutOfBall {
                norm,
                q: self.config.q,
            });
        }
        let (w, lambda) = self.poly.uv_to_wlambda(state.u, state.v, seed)?;
        if !(w > 0.0) {
            return Err(HbError::NonPositiveFrequency { w });
        }
        let h = solve_q(&self.poly, w, lambda, &state.y, self.config.resonance_guard)?;
        let (x, _) = self.spectral.synth_x(r, &h);
        let fx: Vec<f64> = x.iter().map(|&xj| self.nl.eval(xj, lambda)).collect();
        let coeffs = self.spectral.analyze(&fx);
        // ⟨f, π^{-1/2} sin t⟩ = √π · (sin-1 coefficient); likewise for cos.
        let sqrt_pi = PI.sqrt();
        let mut y = QCoeffs::from_trig(&coeffs);
        y = y.scaled(1.0 / r);
        Ok(ImageOfAr {
            state: TripleState {
                u: sqrt_pi * coeffs.sin[0] / r,
                v: sqrt_pi * coeffs.cos[0] / r,
                y,
            },
            w,
            lambda,
        })
    }

    /// Picard iteration `z ← A_r(z)` from `init`.
    pub fn fixed_point(&self, r: f64, init: &TripleState, seed: (f64, f64)) -> Result<HbBranchPoint, HbError> {
        let mut z = init.clone();
        let mut seed = seed;
        let mut increments: Vec<f64> = Vec::new();
        let mut iterations = 0;
        loop {
            if iterations >= self.config.max_iter {
                return Err(HbError::NonContraction {
                    iterations,
                    estimate: contraction_estimate(&increments),
                    residual: increments.last().copied().unwrap_or(f64::NAN),
                });
            }
            iterations += 1;
            let image = self.apply(r, &z, seed)?;
            seed = (image.w, image.lambda);
            let delta = image.state.distance(&z);
            increments.push(delta);
            z = image.state;
            if delta <= self.config.tol {
                break;
            }
        }
        let norm = z.norm();
        if norm > self.config.q {
            return Err(HbError::OutOfBall {
                norm,
                q: self.config.q,
            });
        }
        let (w, lambda) = self.poly.uv_to_wlambda(z.u, z.v, seed)?;
        let h = solve_q(&self.poly, w, lambda, &z.y, self.config.resonance_guard)?;
        let (_, sup_norm_x) = self.spectral.synth_x(r, &h);
        Ok(HbBranchPoint {
            r,
            lambda,
            w,
            triple: z,
            sup_norm_x,
            residual: *increments.last().expect("at least one step"),
            contraction_estimate: contraction_estimate(&increments),
            iterations,
        })
    }

    /// Warm-started fixed points along `r_grid`. `seed` should be the root
    /// `(w₀, λ₀)` of `L(wi; λ) = 0`.
    pub fn sweep(&self, r_grid: &[f64], seed: (f64, f64)) -> Result<Sweep, SweepFailure> {
        let mut points: Vec<HbBranchPoint> = Vec::with_capacity(r_grid.len());
        let mut init = self.zero_state();
        let mut seed = seed;
        for &r in r_grid {
            match self.fixed_point(r, &init, seed) {
                Ok(p) => {
                    init = p.triple.clone();
                    seed = (p.w, p.lambda);
                    points.push(p);
                }
                Err(source) => {
                    return Err(SweepFailure {
                        r,
                        partial: Sweep::from_points(points),
                        source,
                    })
                }
            }
        }
        Ok(Sweep::from_points(points))
    }
}

fn contraction_estimate(increments: &[f64]) -> f64 {
    let ratios: Vec<f64> = increments
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    ratios.iter().rev().take(3).copied().fold(0.0, f64::max)
}

/// `n` points spaced geometrically from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::lv::logspace(lo, hi, n)
}

/// Inserts the geometric midpoint between every pair of neighbours.
pub fn dyadic_refine(grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * grid.len());
    for pair in grid.windows(2) {
        out.push(pair[0]);
        out.push((pair[0] * pair[1]).sqrt());
    }
    out.extend(grid.last());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(nl: Nonlinearity) -> HarmonicBalance {
        HarmonicBalance::new(SymbolPolynomial::damped_oscillator(), nl, HbConfig::default()).unwrap()
    }

    #[test]
    fn zero_nonlinearity_maps_to_origin() {
        let hb = oscillator(Nonlinearity::zero());
        let mut z = hb.zero_state();
        z.u = 0.1;
        z.y.cos[3] = 0.05;
        let img = hb.apply(2.0, &z, (1.0, 0.0)).unwrap();
        assert_eq!(img.state, hb.zero_state());

        let p = hb.fixed_point(0.7, &hb.zero_state(), (1.0, 0.0)).unwrap();
        assert_eq!(p.iterations, 1);
        assert_eq!((p.w, p.lambda), (1.0, 0.0));
        assert_eq!(p.contraction_estimate, 0.0);
        assert!((p.sup_norm_x - 0.7 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn linear_nonlinearity_shifts_u_by_eps() {
        let eps = 0.01;
        let hb = oscillator(Nonlinearity::linear(eps));
        let img = hb.apply(0.8, &hb.zero_state(), (1.0, 0.0)).unwrap();
        assert!((img.state.u - eps).abs() < 1e-15);
        assert!(img.state.v.abs() < 1e-15);
        assert!(img.state.y.l2_norm() < 1e-15);

        let p = hb.fixed_point(0.8, &hb.zero_state(), (1.0, 0.0)).unwrap();
        assert!((p.w - (1.0 - eps).sqrt()).abs() < 1e-13);
        assert!(p.lambda.abs() < 1e-13);
    }

    #[test]
    fn first_image_matches_quadrature_oracle() {
        // u' = r⁻¹ ∫ f(r π^{-1/2} sin t) π^{-1/2} sin t dt by the composite
        // trapezoid rule on 4096 points, independent of the FFT path.
        let eps = 0.05;
        let r = 1.7;
        let hb = oscillator(Nonlinearity::saturating_cubic(eps));
        let img = hb.apply(r, &hb.zero_state(), (1.0, 0.0)).unwrap();
        let m = 4096;
        let c = 1.0 / PI.sqrt();
        let (mut su, mut sv) = (0.0, 0.0);
        for j in 0..m {
            let t = 2.0 * PI * j as f64 / m as f64;
            let x = r * c * t.sin();
            let f = eps * x * x * x / (1.0 + x * x);
            su += f * c * t.sin();
            sv += f * c * t.cos();
        }
        let du = su * 2.0 * PI / m as f64 / r;
        let dv = sv * 2.0 * PI / m as f64 / r;
        assert!((img.state.u - du).abs() < 1e-14, "{} vs {du}", img.state.u);
        assert!((img.state.v - dv).abs() < 1e-14);
    }

    #[test]
    fn first_harmonic_of_identity_is_one() {
        let hb = oscillator(Nonlinearity::new("id", 1.0, 0.0, |x, _| x));
        let img = hb.apply(3.0, &hb.zero_state(), (1.0, 0.0)).unwrap();
        assert!((img.state.u - 1.0).abs() < 1e-14);
        assert!(img.state.v.abs() < 1e-14);
    }

    #[test]
    fn out_of_ball_is_rejected() {
        let hb = oscillator(Nonlinearity::zero());
        let mut z = hb.zero_state();
        z.u = 0.6;
        assert!(matches!(hb.apply(1.0, &z, (1.0, 0.0)), Err(HbError::OutOfBall { .. })));
    }

    #[test]
    fn phase_is_fixed_by_sin_coefficient() {
        let hb = oscillator(Nonlinearity::saturating_cubic(0.05));
        let p = hb.fixed_point(2.0, &hb.zero_state(), (1.0, 0.0)).unwrap();
        let h = p.h(hb.poly(), 1e-12).unwrap();
        let mut full = h.to_trig();
        full.sin[0] = 1.0 / PI.sqrt();
        let x = hb.spectral().synthesize(&full);
        let coeffs = hb.spectral().analyze(&x);
        assert!((coeffs.sin[0] - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!(coeffs.cos[0].abs() < 1e-15);
    }

    #[test]
    fn dyadic_refinement_doubles_intervals() {
        let g = geometric_grid(1e-3, 1e3, 61);
        assert_eq!(g.len(), 61);
        assert!((g[30] - 1.0).abs() < 1e-12);
        let fine = dyadic_refine(&g);
        assert_eq!(fine.len(), 121);
        assert_eq!(fine[2], g[1]);
        assert!((fine[1] / g[0] - 10f64.powf(0.05)).abs() < 1e-12);
    }

    #[test]
    fn contraction_estimate_uses_last_three_ratios() {
        let inc = [1.0, 0.5, 0.1, 0.05, 0.04];
        assert!((contraction_estimate(&inc) - 0.8).abs() < 1e-15);
        assert_eq!(contraction_estimate(&[0.3]), 0.0);
    }
}
