//! Truncated Fourier representations on `[0, 2π)` and the mode-wise action
//! of `L(w d/dt; λ)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::symbol::SymbolPolynomial;
use super::HbError;

/// Real trigonometric polynomial `c0 + Σ_{n=1}^{N} (cos[n-1] cos nt + sin[n-1] sin nt)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigPoly {
    pub c0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn zeros(n: usize) -> Self {
        Self {
            c0: 0.0,
            cos: vec![0.0; n],
            sin: vec![0.0; n],
        }
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    /// Value at `t`, summed directly.
    pub fn eval(&self, t: f64) -> f64 {
        let mut s = self.c0;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let n = (k + 1) as f64;
            s += a * (n * t).cos() + b * (n * t).sin();
        }
        s
    }

    /// `∫₀^{2π} p² dt`.
    pub fn l2_norm_sq(&self) -> f64 {
        2.0 * PI * self.c0 * self.c0
            + PI * self
                .cos
                .iter()
                .zip(&self.sin)
                .map(|(a, b)| a * a + b * b)
                .sum::<f64>()
    }
}

/// Coefficients of a function in `Q𝕃²`: the constant mode and harmonics
/// `n = 2..=N`. There is no slot for `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QCoeffs {
    pub c0: f64,
    /// `cos[k]` multiplies `cos((k + 2) t)`.
    pub cos: Vec<f64>,
    /// `sin[k]` multiplies `sin((k + 2) t)`.
    pub sin: Vec<f64>,
}

impl QCoeffs {
    /// Zero element with harmonics up to `n_max`.
    pub fn zeros(n_max: usize) -> Self {
        let len = n_max.saturating_sub(1);
        Self {
            c0: 0.0,
            cos: vec![0.0; len],
            sin: vec![0.0; len],
        }
    }

    pub fn n_max(&self) -> usize {
        self.cos.len() + 1
    }

    pub fn l2_norm_sq(&self) -> f64 {
        2.0 * PI * self.c0 * self.c0
            + PI * self
                .cos
                .iter()
                .zip(&self.sin)
                .map(|(a, b)| a * a + b * b)
                .sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            c0: self.c0 * s,
            cos: self.cos.iter().map(|v| v * s).collect(),
            sin: self.sin.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            c0: self.c0 - other.c0,
            cos: self.cos.iter().zip(&other.cos).map(|(a, b)| a - b).collect(),
            sin: self.sin.iter().zip(&other.sin).map(|(a, b)| a - b).collect(),
        }
    }

    /// Embeds into a trigonometric polynomial with a zero first harmonic.
    pub fn to_trig(&self) -> TrigPoly {
        let mut p = TrigPoly::zeros(self.n_max());
        p.c0 = self.c0;
        p.cos[1..].copy_from_slice(&self.cos);
        p.sin[1..].copy_from_slice(&self.sin);
        p
    }

    /// Drops the first harmonic of `p`.
    pub fn from_trig(p: &TrigPoly) -> Self {
        Self {
            c0: p.c0,
            cos: p.cos.get(1..).unwrap_or_default().to_vec(),
            sin: p.sin.get(1..).unwrap_or_default().to_vec(),
        }
    }
}

/// Element `(u, v, y)` of `ℝ × ℝ × Q𝕃²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleState {
    pub u: f64,
    pub v: f64,
    pub y: QCoeffs,
}

impl TripleState {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            u: 0.0,
            v: 0.0,
            y: QCoeffs::zeros(n_max),
        }
    }

    /// `√(u² + v² + ‖y‖²_{L²})`
    pub fn norm(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.y.l2_norm_sq()).sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        TripleState {
            u: self.u - other.u,
            v: self.v - other.v,
            y: self.y.sub(&other.y),
        }
        .norm()
    }
}

/// FFT plans for an `M`-point grid `t_j = 2πj/M` carrying harmonics up to `N`.
#[derive(Clone)]
pub struct Spectral {
    n: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).field("m", &self.m).finish()
    }
}

impl Spectral {
    /// Requires `M ≥ 2N + 2` so that every represented mode is resolved.
    pub fn new(n: usize, m: usize) -> Result<Self, HbError> {
        if n < 1 || m < 2 * n + 2 {
            return Err(HbError::InvalidConfig(format!(
                "grid of {m} points cannot carry {n} harmonics (need M ≥ 2N + 2)"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }

    pub fn harmonics(&self) -> usize {
        self.n
    }

    pub fn grid_len(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.m).map(|j| 2.0 * PI * j as f64 / self.m as f64).collect()
    }

    /// Trigonometric interpolation coefficients up to degree `N`.
    pub fn analyze(&self, samples: &[f64]) -> TrigPoly {
        assert_eq!(samples.len(), self.m);
        let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.m as f64;
        let mut p = TrigPoly::zeros(self.n);
        p.c0 = buf[0].re * scale;
        for k in 1..=self.n {
            let c = buf[k] * scale;
            p.cos[k - 1] = 2.0 * c.re;
            p.sin[k - 1] = -2.0 * c.im;
        }
        p
    }

    /// Samples of `p` on the grid. Modes above `N` are ignored.
    pub fn synthesize(&self, p: &TrigPoly) -> Vec<f64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m];
        buf[0] = Complex64::new(p.c0, 0.0);
        for k in 1..=self.n.min(p.degree()) {
            let c = Complex64::new(p.cos[k - 1], -p.sin[k - 1]) * 0.5;
            buf[k] += c;
            buf[self.m - k] += c.conj();
        }
        self.inverse.process(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Trapezoid-rule `∫₀^{2π} s² dt` of grid samples.
    pub fn grid_l2_norm_sq(&self, samples: &[f64]) -> f64 {
        2.0 * PI / self.m as f64 * samples.iter().map(|s| s * s).sum::<f64>()
    }

    /// `x_j = r (π^{-1/2} sin t_j + h(t_j))` and `max_j |x_j|`.
    pub fn synth_x(&self, r: f64, h: &QCoeffs) -> (Vec<f64>, f64) {
        let mut p = h.to_trig();
        p.sin[0] = 1.0 / PI.sqrt();
        let x: Vec<f64> = self.synthesize(&p).into_iter().map(|v| r * v).collect();
        let sup = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (x, sup)
    }
}

/// Solves `L(w d/dt; λ) h = y` on `Q𝕃²`, one complex mode at a time.
pub fn solve_q(poly: &SymbolPolynomial, w: f64, lambda: f64, y: &QCoeffs, guard: f64) -> Result<QCoeffs, HbError> {
    let mut h = QCoeffs::zeros(y.n_max());
    let l0 = poly.value(Complex64::new(0.0, 0.0), lambda);
    if l0.norm() < guard {
        return Err(HbError::Resonance {
            n: 0,
            w,
            lambda,
            modulus: l0.norm(),
        });
    }
    h.c0 = y.c0 / l0.re;
    for k in 0..y.cos.len() {
        let n = k + 2;
        let ln = poly.value(Complex64::new(0.0, n as f64 * w), lambda);
        if ln.norm() < guard {
            return Err(HbError::Resonance {
                n,
                w,
                lambda,
                modulus: ln.norm(),
            });
        }
        // a cos nt + b sin nt = Re[(a − ib) e^{int}]
        let c = Complex64::new(y.cos[k], -y.sin[k]) / ln;
        h.cos[k] = c.re;
        h.sin[k] = -c.im;
    }
    Ok(h)
}

/// Applies `L(w d/dt; λ)` mode-wise to an element of `Q𝕃²`.
pub fn apply_symbol(poly: &SymbolPolynomial, w: f64, lambda: f64, h: &QCoeffs) -> QCoeffs {
    let mut y = QCoeffs::zeros(h.n_max());
    y.c0 = poly.value(Complex64::new(0.0, 0.0), lambda).re * h.c0;
    for k in 0..h.cos.len() {
        let ln = poly.value(Complex64::new(0.0, (k + 2) as f64 * w), lambda);
        let c = Complex64::new(h.cos[k], -h.sin[k]) * ln;
        y.cos[k] = c.re;
        y.sin[k] = -c.im;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solve_q_examples() {
        let l = SymbolPolynomial::damped_oscillator();
        let mut y = QCoeffs::zeros(4);
        y.cos[0] = 1.0;
        let h = solve_q(&l, 1.0, 0.0, &y, 1e-12).unwrap();
        assert!((h.cos[0] + 1.0 / 3.0).abs() < 1e-16);
        assert!(h.sin.iter().all(|&v| v == 0.0));

        let h = solve_q(&l, 1.0, 0.0, &QCoeffs::zeros(4), 1e-12).unwrap();
        assert_eq!(h, QCoeffs::zeros(4));

        let mut y = QCoeffs::zeros(4);
        y.c0 = 1.0;
        let h = solve_q(&l, 1.3, 0.37, &y, 1e-12).unwrap();
        assert_eq!(h.c0, 1.0);
    }

    #[test]
    fn resonance_is_named() {
        // w = 1/2 puts the second harmonic on the root of p² + 1.
        let l = SymbolPolynomial::damped_oscillator();
        let err = solve_q(&l, 0.5, 0.0, &QCoeffs::zeros(4), 1e-12).unwrap_err();
        assert!(matches!(err, HbError::Resonance { n: 2, .. }));
    }

    #[test]
    fn synth_examples() {
        let s = Spectral::new(8, 64).unwrap();
        let (x, sup) = s.synth_x(PI.sqrt(), &QCoeffs::zeros(8));
        for (xj, t) in x.iter().zip(s.grid()) {
            assert!((xj - t.sin()).abs() < 1e-15);
        }
        assert!((sup - 1.0).abs() < 1e-15);

        let (x, sup) = s.synth_x(0.0, &QCoeffs::zeros(8));
        assert!(x.iter().all(|&v| v == 0.0) && sup == 0.0);

        let mut h = QCoeffs::zeros(8);
        h.cos[0] = 0.1;
        let (x, _) = s.synth_x(1.0, &h);
        // t = π/2 is grid point 16 of 64.
        assert!((x[16] - 0.4641895835).abs() < 1e-10);
        assert!((x[16] - (1.0 / PI.sqrt() - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn grid_size_is_checked() {
        assert!(Spectral::new(8, 17).is_err());
        assert!(Spectral::new(8, 18).is_ok());
    }

    #[test]
    fn q_embedding_has_no_first_harmonic() {
        let mut h = QCoeffs::zeros(5);
        h.cos[2] = 0.3;
        h.sin[0] = -1.0;
        let p = h.to_trig();
        assert_eq!((p.cos[0], p.sin[0]), (0.0, 0.0));
        assert_eq!(QCoeffs::from_trig(&p), h);
    }

    fn qcoeffs(n: usize) -> impl Strategy<Value = QCoeffs> {
        (
            -1.0f64..1.0,
            proptest::collection::vec(-1.0f64..1.0, n - 1),
            proptest::collection::vec(-1.0f64..1.0, n - 1),
        )
            .prop_map(|(c0, cos, sin)| QCoeffs { c0, cos, sin })
    }

    proptest! {
        #[test]
        fn symbol_inverts_solve_q(y in qcoeffs(16), w in 0.8f64..1.2, lambda in -0.4f64..0.4) {
            let l = SymbolPolynomial::damped_oscillator();
            let h = solve_q(&l, w, lambda, &y, 1e-12).unwrap();
            let back = apply_symbol(&l, w, lambda, &h);
            prop_assert!((back.c0 - y.c0).abs() <= 1e-13);
            for k in 0..y.cos.len() {
                prop_assert!((back.cos[k] - y.cos[k]).abs() <= 1e-13);
                prop_assert!((back.sin[k] - y.sin[k]).abs() <= 1e-13);
            }
        }

        #[test]
        fn parseval_on_grid(y in qcoeffs(16), a1 in -1.0f64..1.0, b1 in -1.0f64..1.0) {
            let s = Spectral::new(16, 64).unwrap();
            let mut p = y.to_trig();
            p.cos[0] = a1;
            p.sin[0] = b1;
            let samples = s.synthesize(&p);
            let grid = s.grid_l2_norm_sq(&samples);
            prop_assert!((grid - p.l2_norm_sq()).abs() <= 1e-13 * p.l2_norm_sq().max(1.0));
            // Analysis recovers the coefficients.
            let q = s.analyze(&samples);
            prop_assert!((q.c0 - p.c0).abs() < 1e-14);
            for k in 0..16 {
                prop_assert!((q.cos[k] - p.cos[k]).abs() < 1e-14);
                prop_assert!((q.sin[k] - p.sin[k]).abs() < 1e-14);
            }
        }

        #[test]
        fn synthesis_matches_direct_sum(y in qcoeffs(6), t_idx in 0usize..32) {
            let s = Spectral::new(6, 32).unwrap();
            let p = y.to_trig();
            let samples = s.synthesize(&p);
            let t = 2.0 * PI * t_idx as f64 / 32.0;
            prop_assert!((samples[t_idx] - p.eval(t)).abs() < 1e-13);
        }
    }
}
