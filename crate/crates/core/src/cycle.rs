//! Poincaré return maps and periodic-orbit detection for planar flows.
//!
//! A [`Section`] is the line `state[index] = level`, crossed in a chosen
//! direction. Points on it are addressed by an offset along the other
//! coordinate, measured from `origin`; offset zero is the centre the cycles
//! surround (the equilibrium for Lotka–Volterra systems).

use serde::Serialize;
use thiserror::Error;

use crate::lv::EquilibriumInfo;
use crate::ode::{OdeError, OdeOptions, Stepper};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("no return to the section within t = {t_max}")]
    NoReturn { t_max: f64 },
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("secant iteration did not converge after {iterations} steps (offset {offset}, displacement {displacement})")]
    NotFound {
        iterations: usize,
        offset: f64,
        displacement: f64,
    },
}

impl CycleError {
    pub fn is_blowup(&self) -> bool {
        matches!(self, CycleError::Integration(e) if e.is_blowup())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `state[index]` increases through `level`.
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Section {
    pub index: usize,
    pub level: f64,
    pub direction: Direction,
    pub origin: f64,
}

impl Section {
    pub fn new(index: usize, level: f64, direction: Direction, origin: f64) -> Self {
        assert!(index < 2, "planar section index must be 0 or 1");
        Self {
            index,
            level,
            direction,
            origin,
        }
    }

    /// Section `v = ln y*` crossed upwards, which happens at `u > ln x*`.
    /// Offsets are `u − ln x*`.
    pub fn lotka_volterra(eq: &EquilibriumInfo) -> Self {
        let [u, v] = eq.log_coords();
        Self::new(1, v, Direction::Positive, u)
    }

    pub fn point(&self, offset: f64) -> [f64; 2] {
        let mut p = [0.0; 2];
        p[self.index] = self.level;
        p[1 - self.index] = self.origin + offset;
        p
    }

    pub fn center(&self) -> [f64; 2] {
        self.point(0.0)
    }

    pub fn offset_of(&self, state: &[f64]) -> f64 {
        state[1 - self.index] - self.origin
    }

    fn signed(&self, state: &[f64]) -> f64 {
        let g = state[self.index] - self.level;
        match self.direction {
            Direction::Positive => g,
            Direction::Negative => -g,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOptions {
    pub ode: OdeOptions,
    /// Longest time to wait for a return.
    pub t_max: f64,
    /// Converged when `|displacement| ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::with_tolerances(1e-10, 1e-12),
            t_max: 1e4,
            tol: 1e-8,
            max_iter: 40,
        }
    }
}

/// One revolution from a section point back to the section.
#[derive(Debug, Clone)]
struct Revolution {
    state: [f64; 2],
    time: f64,
    /// `(t, state)` at accepted steps plus interior Hermite points.
    samples: Vec<(f64, [f64; 2])>,
}

const INTERIOR_SAMPLES: usize = 3;

fn revolve<F>(rhs: &F, section: &Section, start: [f64; 2], t_max: f64, opts: OdeOptions, keep: bool) -> Result<Revolution, CycleError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let mut stepper = Stepper::new(|t: f64, y: &[f64], dy: &mut [f64]| rhs(t, y, dy), 0.0, &start, t_max, opts)?;
    let mut samples = Vec::new();
    if keep {
        samples.push((0.0, start));
    }
    let mut buf = [0.0; 2];
    while let Some(step) = stepper.step()? {
        let g0 = section.signed(&step.y0);
        let g1 = section.signed(&step.y1);
        if g0 < 0.0 && g1 >= 0.0 {
            // Bisection on the Hermite interpolant, then a direct step to
            // the crossing time with a Newton polish on the exact state.
            let (mut lo, mut hi) = (step.t0, step.t1);
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                step.interpolate(mid, &mut buf);
                if section.signed(&buf) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut t_cross = 0.5 * (lo + hi);
            let mut y = stepper.state_within(&step, t_cross);
            for _ in 0..2 {
                let mut dy = [0.0; 2];
                rhs(t_cross, &y, &mut dy);
                let rate = dy[section.index];
                if rate == 0.0 {
                    break;
                }
                let dt = -(y[section.index] - section.level) / rate;
                if dt.abs() > step.t1 - step.t0 {
                    break;
                }
                t_cross += dt;
                y = stepper.state_within(&step, t_cross);
            }
            let mut state = [y[0], y[1]];
            state[section.index] = section.level;
            if keep {
                for k in 1..=INTERIOR_SAMPLES {
                    let t = step.t0 + (t_cross - step.t0) * k as f64 / (INTERIOR_SAMPLES + 1) as f64;
                    step.interpolate(t, &mut buf);
                    samples.push((t, buf));
                }
                samples.push((t_cross, state));
            }
            return Ok(Revolution {
                state,
                time: t_cross,
                samples,
            });
        }
        if keep {
            for k in 1..=INTERIOR_SAMPLES {
                let t = step.t0 + (step.t1 - step.t0) * k as f64 / (INTERIOR_SAMPLES + 1) as f64;
                step.interpolate(t, &mut buf);
                samples.push((t, buf));
            }
            samples.push((step.t1, [step.y1[0], step.y1[1]]));
        }
    }
    Err(CycleError::NoReturn { t_max })
}

/// Integrates from `state` (on the section) until the next crossing in the
/// section's direction. Returns the crossing state and the elapsed time.
pub fn poincare_return<F>(rhs: &F, section: &Section, state: [f64; 2], t_max: f64, opts: OdeOptions) -> Result<([f64; 2], f64), CycleError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let r = revolve(rhs, section, state, t_max, opts, false)?;
    Ok((r.state, r.time))
}

/// `P(s) − s` for the section point at offset `s`.
pub fn displacement<F>(rhs: &F, section: &Section, offset: f64, opts: &CycleOptions) -> Result<f64, CycleError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let (state, _) = poincare_return(rhs, section, section.point(offset), opts.t_max, opts.ode)?;
    Ok(section.offset_of(&state) - offset)
}

/// A periodic orbit located on a section.
#[derive(Debug, Clone, Serialize)]
pub struct Cycle {
    pub lambda: f64,
    pub period: f64,
    /// Fixed point of the return map, on the section.
    pub anchor: [f64; 2],
    /// Section offset of the anchor.
    pub offset: f64,
    /// Largest Euclidean distance from the section centre over one period.
    pub amplitude: f64,
    /// Secant estimate of the return-map derivative; `|·| < 1` means the
    /// cycle attracts.
    pub return_derivative: f64,
    pub displacement: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub samples: Vec<(f64, [f64; 2])>,
}

impl Cycle {
    pub fn is_stable(&self) -> bool {
        self.return_derivative.abs() < 1.0
    }
}

/// Secant iteration on the displacement `P(s) − s`, started at `guess`.
pub fn find_cycle<F>(rhs: &F, lambda: f64, section: &Section, guess: f64, opts: &CycleOptions) -> Result<Cycle, CycleError>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let sign = if guess < 0.0 { -1.0 } else { 1.0 };
    if guess == 0.0 {
        return Err(CycleError::NotFound {
            iterations: 0,
            offset: 0.0,
            displacement: 0.0,
        });
    }
    let mut s0 = guess;
    let mut d0 = displacement(rhs, section, s0, opts)?;
    let mut slope = f64::NAN;
    let mut iterations = 0;
    if d0.abs() > opts.tol {
        // Secant on d(s)/s, which drops the trivial root at the section origin.
        let mut s1 = guess + sign * (1e-4 * guess.abs()).max(1e-7);
        let mut d1 = displacement(rhs, section, s1, opts)?;
        loop {
            iterations += 1;
            let (g0, g1) = (d0 / s0, d1 / s1);
            let g_slope = (g1 - g0) / (s1 - s0);
            slope = g1 + s1 * g_slope;
            if d1.abs() <= opts.tol {
                s0 = s1;
                d0 = d1;
                break;
            }
            if iterations >= opts.max_iter || g_slope == 0.0 || !g_slope.is_finite() {
                return Err(CycleError::NotFound {
                    iterations,
                    offset: s1,
                    displacement: d1,
                });
            }
            let mut s2 = s1 - g1 / g_slope;
            if s2 * sign <= 0.0 {
                s2 = 0.5 * s1;
            }
            s0 = s1;
            d0 = d1;
            s1 = s2;
            d1 = displacement(rhs, section, s1, opts)?;
        }
    }
    if !slope.is_finite() {
        // Converged on the first evaluation; probe the slope once.
        let h = (1e-4 * s0.abs()).max(1e-7) * sign;
        let dh = displacement(rhs, section, s0 + h, opts)?;
        slope = (dh - d0) / h;
    }

    let anchor = section.point(s0);
    let rev = revolve(rhs, section, anchor, opts.t_max, opts.ode, true)?;
    let center = section.center();
    let amplitude = rev
        .samples
        .iter()
        .map(|(_, p)| (p[0] - center[0]).hypot(p[1] - center[1]))
        .fold(0.0, f64::max);
    Ok(Cycle {
        lambda,
        period: rev.time,
        anchor,
        offset: s0,
        amplitude,
        return_derivative: 1.0 + slope,
        displacement: d0,
        iterations,
        samples: rev.samples,
    })
}
