//! Adaptive Dormand–Prince 5(4) integration with PI step-size control and
//! cubic Hermite dense output.
//!
//! Vector fields are plain closures `(t, y, dy)` writing the derivative into
//! `dy`. States are slices so the same integrator serves planar systems and
//! the order-ℓ systems built for harmonic-balance validation.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("tolerances must be positive (rtol = {rtol}, atol = {atol})")]
    InvalidTolerance { rtol: f64, atol: f64 },
    /// Step size fell below `1e-14·|t_end|`; the flow is stiff or escaping.
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },
    /// State norm exceeded the blow-up threshold or became non-finite.
    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64, state: Vec<f64> },
    #[error("maximum number of steps exceeded at t = {t}")]
    MaxSteps { t: f64, state: Vec<f64> },
}

impl OdeError {
    /// Last state reached before the failure, when there is one.
    pub fn last_state(&self) -> Option<&[f64]> {
        match self {
            OdeError::StepUnderflow { state, .. }
            | OdeError::BlowUp { state, .. }
            | OdeError::MaxSteps { state, .. } => Some(state),
            OdeError::InvalidTolerance { .. } => None,
        }
    }

    /// Underflow and overflow both mean the trajectory is running away.
    pub fn is_blowup(&self) -> bool {
        matches!(
            self,
            OdeError::StepUnderflow { .. } | OdeError::BlowUp { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the vector field when `None`.
    pub h_init: Option<f64>,
    pub max_steps: usize,
    /// Euclidean state norm treated as escape to infinity.
    pub blowup_norm: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            max_steps: 2_000_000,
            blowup_norm: 1e8,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Scratch space for one Dormand–Prince step.
#[derive(Debug, Clone)]
struct Stages {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl Stages {
    fn new(dim: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
        }
    }
}

/// One DP5 step of size `h` from `(t, y)` with `f0 = rhs(t, y)`. Writes the
/// 5th-order solution to `y1`, its derivative to `f1` and the embedded error
/// vector to `err`.
fn dp5_step<F>(
    rhs: &mut F,
    st: &mut Stages,
    t: f64,
    y: &[f64],
    f0: &[f64],
    h: f64,
    y1: &mut [f64],
    f1: &mut [f64],
    err: &mut [f64],
) where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let [_, k2, k3, k4, k5, k6, _] = &mut st.k;
    let tmp = &mut st.tmp;
    for i in 0..n {
        tmp[i] = y[i] + h * A21 * f0[i];
    }
    rhs(t + C2 * h, tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + h * (A31 * f0[i] + A32 * k2[i]);
    }
    rhs(t + C3 * h, tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + h * (A41 * f0[i] + A42 * k2[i] + A43 * k3[i]);
    }
    rhs(t + C4 * h, tmp, k4);
    for i in 0..n {
        tmp[i] = y[i] + h * (A51 * f0[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    rhs(t + C5 * h, tmp, k5);
    for i in 0..n {
        tmp[i] =
            y[i] + h * (A61 * f0[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    rhs(t + h, tmp, k6);
    for i in 0..n {
        y1[i] = y[i] + h * (A71 * f0[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    rhs(t + h, y1, f1);
    for i in 0..n {
        err[i] = h
            * (E1 * f0[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * f1[i]);
    }
}

/// Cubic Hermite interpolation on an accepted step.
pub fn hermite(t0: f64, y0: &[f64], f0: &[f64], t1: f64, y1: &[f64], f1: &[f64], t: f64, out: &mut [f64]) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    for i in 0..out.len() {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// An accepted step, with everything needed for dense output.
#[derive(Debug, Clone)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    pub f0: Vec<f64>,
    pub f1: Vec<f64>,
    pub error: f64,
}

impl Step {
    pub fn interpolate(&self, t: f64, out: &mut [f64]) {
        hermite(self.t0, &self.y0, &self.f0, self.t1, &self.y1, &self.f1, t, out);
    }
}

/// Step-by-step driver used by [`integrate`] and by event location.
pub struct Stepper<F> {
    rhs: F,
    opts: OdeOptions,
    t: f64,
    t_end: f64,
    y: Vec<f64>,
    f: Vec<f64>,
    h: f64,
    err_old: f64,
    steps: usize,
    stages: Stages,
    y1: Vec<f64>,
    f1: Vec<f64>,
    err: Vec<f64>,
}

impl<F> Stepper<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(mut rhs: F, t0: f64, y0: &[f64], t_end: f64, opts: OdeOptions) -> Result<Self, OdeError> {
        if !(opts.rtol > 0.0 && opts.atol > 0.0) {
            return Err(OdeError::InvalidTolerance {
                rtol: opts.rtol,
                atol: opts.atol,
            });
        }
        let n = y0.len();
        let mut f = vec![0.0; n];
        rhs(t0, y0, &mut f);
        let mut stepper = Self {
            rhs,
            opts,
            t: t0,
            t_end,
            y: y0.to_vec(),
            f,
            h: 0.0,
            err_old: 1e-4,
            steps: 0,
            stages: Stages::new(n),
            y1: vec![0.0; n],
            f1: vec![0.0; n],
            err: vec![0.0; n],
        };
        stepper.h = match opts.h_init {
            Some(h) => h,
            None => stepper.initial_step(),
        };
        Ok(stepper)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        &self.y
    }

    pub fn derivative(&self) -> &[f64] {
        &self.f
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.opts.atol + self.opts.rtol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self) -> f64 {
        let n = self.y.len();
        let span = (self.t_end - self.t).abs();
        if n == 0 || span == 0.0 {
            return span;
        }
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..n {
            let sc = self.scale(self.y[i], self.y[i]);
            d0 += (self.y[i] / sc).powi(2);
            d1 += (self.f[i] / sc).powi(2);
        }
        let (d0, d1) = ((d0 / n as f64).sqrt(), (d1 / n as f64).sqrt());
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let ytmp: Vec<f64> = (0..n).map(|i| self.y[i] + h0 * self.f[i]).collect();
        let mut f1 = vec![0.0; n];
        (self.rhs)(self.t + h0, &ytmp, &mut f1);
        let mut d2 = 0.0;
        for i in 0..n {
            let sc = self.scale(self.y[i], self.y[i]);
            d2 += ((f1[i] - self.f[i]) / sc).powi(2);
        }
        let d2 = (d2 / n as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        let h = (100.0 * h0).min(h1).min(span);
        if h.is_finite() && h > 0.0 {
            h
        } else {
            1e-6_f64.min(span)
        }
    }

    /// Re-integrates `step` from its left end to `t` with a single DP5 step,
    /// which is more accurate than the Hermite interpolant.
    pub fn state_within(&mut self, step: &Step, t: f64) -> Vec<f64> {
        let n = step.y0.len();
        let (mut y, mut f, mut e) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        if t == step.t0 {
            return step.y0.clone();
        }
        dp5_step(
            &mut self.rhs,
            &mut self.stages,
            step.t0,
            &step.y0,
            &step.f0,
            t - step.t0,
            &mut y,
            &mut f,
            &mut e,
        );
        y
    }

    /// Advances by one accepted step, or returns `None` once `t_end` is reached.
    pub fn step(&mut self) -> Result<Option<Step>, OdeError> {
        const SAFE: f64 = 0.9;
        const FAC_MIN: f64 = 0.2;
        const FAC_MAX: f64 = 10.0;
        const BETA: f64 = 0.04;
        const EXPO: f64 = 0.2 - BETA * 0.75;

        let remaining = self.t_end - self.t;
        if remaining <= 0.0 {
            return Ok(None);
        }
        let h_min = 1e-14 * self.t_end.abs().max(self.t.abs());
        let n = self.y.len();
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(OdeError::MaxSteps {
                    t: self.t,
                    state: self.y.clone(),
                });
            }
            let mut h = self.h.min(remaining);
            // Avoid leaving a sliver at the end of the interval.
            if remaining - h < 1e-10 * h {
                h = remaining;
            }
            if h < h_min && h < remaining {
                return Err(OdeError::StepUnderflow {
                    t: self.t,
                    h,
                    state: self.y.clone(),
                });
            }
            self.steps += 1;
            dp5_step(
                &mut self.rhs,
                &mut self.stages,
                self.t,
                &self.y,
                &self.f,
                h,
                &mut self.y1,
                &mut self.f1,
                &mut self.err,
            );
            let mut acc = 0.0;
            for i in 0..n {
                let sc = self.scale(self.y[i], self.y1[i]);
                acc += (self.err[i] / sc).powi(2);
            }
            let mut err = (acc / n.max(1) as f64).sqrt();
            if !err.is_finite() || self.f1.iter().any(|v| !v.is_finite()) {
                err = f64::INFINITY;
            }
            let fac11 = err.powf(EXPO);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.err_old = err.max(1e-4);
                let t0 = self.t;
                let t1 = if h == remaining { self.t_end } else { self.t + h };
                let step = Step {
                    t0,
                    t1,
                    y0: self.y.clone(),
                    y1: self.y1.clone(),
                    f0: self.f.clone(),
                    f1: self.f1.clone(),
                    error: err,
                };
                self.t = t1;
                std::mem::swap(&mut self.y, &mut self.y1);
                std::mem::swap(&mut self.f, &mut self.f1);
                self.h = h / fac;
                let norm = norm2(&self.y);
                if !(norm <= self.opts.blowup_norm) {
                    return Err(OdeError::BlowUp {
                        t: self.t,
                        state: self.y.clone(),
                    });
                }
                return Ok(Some(step));
            }
            let shrink = if err.is_finite() {
                (fac11 / SAFE).min(1.0 / FAC_MIN)
            } else {
                10.0
            };
            self.h = h / shrink;
            if self.h < h_min {
                return Err(OdeError::StepUnderflow {
                    t: self.t,
                    h: self.h,
                    state: self.y.clone(),
                });
            }
        }
    }
}

/// Integrates `rhs` from `t = 0` to `t_end`, keeping every accepted step.
pub fn integrate<F>(rhs: F, state0: &[f64], t_end: f64, opts: OdeOptions) -> Result<Trajectory, OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut stepper = Stepper::new(rhs, 0.0, state0, t_end, opts)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![state0.to_vec()],
        derivatives: vec![stepper.derivative().to_vec()],
        errors: Vec::new(),
    };
    while let Some(step) = stepper.step()? {
        traj.times.push(step.t1);
        traj.states.push(step.y1);
        traj.derivatives.push(step.f1);
        traj.errors.push(step.error);
    }
    Ok(traj)
}

/// Accepted steps of an integration. `errors[i]` is the scaled error estimate
/// of the step ending at `times[i + 1]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
    pub errors: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Dense output at `t` within the integration interval.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let dim = self.states[0].len();
        let mut out = vec![0.0; dim];
        let i = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k if k >= self.times.len() => self.times.len().saturating_sub(2),
            k => k - 1,
        };
        if self.times.len() == 1 {
            out.copy_from_slice(&self.states[0]);
            return out;
        }
        hermite(
            self.times[i],
            &self.states[i],
            &self.derivatives[i],
            self.times[i + 1],
            &self.states[i + 1],
            &self.derivatives[i + 1],
            t,
            &mut out,
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rotation(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[1];
        dy[1] = y[0];
    }

    #[test]
    fn harmonic_oscillator_closes() {
        let opts = OdeOptions::with_tolerances(1e-10, 1e-10);
        let traj = integrate(rotation, &[1.0, 0.0], 2.0 * PI, opts).unwrap();
        let y = traj.final_state();
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
        assert_eq!(*traj.times.last().unwrap(), 2.0 * PI);

        let traj = integrate(rotation, &[1.0, 0.0], PI, opts).unwrap();
        let y = traj.final_state();
        assert!((y[0] + 1.0).abs() < 1e-8 && y[1].abs() < 1e-8);
    }

    #[test]
    fn trajectory_invariants() {
        let traj = integrate(rotation, &[1.0, 0.0], 10.0, OdeOptions::default()).unwrap();
        assert_eq!(traj.times.len(), traj.states.len());
        assert_eq!(traj.errors.len(), traj.times.len() - 1);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert!(traj.errors.iter().all(|&e| e <= 1.0));
        // Dense output against the exact rotation.
        for k in 0..50 {
            let t = 10.0 * k as f64 / 50.0;
            let y = traj.interpolate(t);
            assert!((y[0] - t.cos()).abs() < 1e-7 && (y[1] - t.sin()).abs() < 1e-7);
        }
    }

    #[test]
    fn fixed_step_order_is_five() {
        // Halving a fixed step must shrink the global error by about 2^5.
        let run = |n: usize| {
            let h = 2.0 * PI / n as f64;
            let mut st = Stages::new(2);
            let mut rhs = rotation;
            let mut y = vec![1.0, 0.0];
            let mut f = vec![0.0, 1.0];
            let (mut y1, mut f1, mut e) = (vec![0.0; 2], vec![0.0; 2], vec![0.0; 2]);
            for i in 0..n {
                dp5_step(&mut rhs, &mut st, i as f64 * h, &y, &f, h, &mut y1, &mut f1, &mut e);
                std::mem::swap(&mut y, &mut y1);
                std::mem::swap(&mut f, &mut f1);
            }
            (y[0] - 1.0).hypot(y[1])
        };
        let (e1, e2) = (run(20), run(40));
        assert!(e1 / e2 >= 16.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let err = |tol: f64| {
            let t = integrate(rotation, &[1.0, 0.0], 2.0 * PI, OdeOptions::with_tolerances(tol, tol)).unwrap();
            let y = t.final_state();
            (y[0] - 1.0).hypot(y[1])
        };
        let coarse = err(1e-6);
        let fine = err(1e-6 / 32.0);
        assert!(fine < coarse / 4.0, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn equilibrium_stays_put() {
        use crate::lv::{InteractionTerm, LvSystem};
        let sys = LvSystem::unit(InteractionTerm::ArctanLinear);
        let eq = sys.equilibrium(0.5).unwrap().log_coords();
        let traj = integrate(sys.log_field(0.5), &eq, 50.0, OdeOptions::default()).unwrap();
        let y = traj.final_state();
        assert!((y[0] - eq[0]).abs() < 1e-12 && (y[1] - eq[1]).abs() < 1e-12);
    }

    #[test]
    fn finite_time_blowup_is_reported() {
        // y' = y² from y(0) = 1 escapes at t = 1.
        let err = integrate(|_, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0], &[1.0], 2.0, OdeOptions::default())
            .unwrap_err();
        assert!(err.is_blowup(), "{err:?}");
        assert!(err.last_state().unwrap()[0] > 1.0);
    }

    #[test]
    fn rejects_bad_tolerances() {
        let e = integrate(rotation, &[1.0, 0.0], 1.0, OdeOptions::with_tolerances(0.0, 1e-9)).unwrap_err();
        assert!(matches!(e, OdeError::InvalidTolerance { .. }));
    }
}
