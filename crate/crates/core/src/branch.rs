//! Continuation of the Lotka–Volterra cycle branch in λ.
//!
//! Starting from a cycle near the Hopf point, λ is marched towards
//! `lambda_stop` with warm-started secant solves. Steps are halved when the
//! solve fails or when amplitude or period jump by more than the allowed
//! ratio, so the recorded amplitudes climb through every scale on their way to
//! the cap.

use serde::Serialize;
use thiserror::Error;

use crate::cycle::{displacement, find_cycle, Cycle, CycleError, CycleOptions, Section};
use crate::lv::{LvError, LvSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BranchError {
    #[error("no cycle found at λ = {lambda}: {reason}; start closer to the Hopf point{}", hint(*.lambda_hopf))]
    Seed {
        lambda: f64,
        lambda_hopf: Option<f64>,
        reason: String,
    },
    #[error(transparent)]
    Model(#[from] LvError),
    #[error("step sizes must be positive (step0 = {step0}, min_step = {min_step})")]
    InvalidStep { step0: f64, min_step: f64 },
}

fn hint(lambda_hopf: Option<f64>) -> String {
    match lambda_hopf {
        Some(l) => format!(" λ_H = {l}"),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchOptions {
    pub step0: f64,
    pub min_step: f64,
    /// Log-coordinate amplitude treated as infinity.
    pub amplitude_cap: f64,
    /// Largest accepted growth (or shrink) factor of amplitude per step.
    pub max_amplitude_ratio: f64,
    /// Largest accepted relative change of the period per step.
    pub max_period_change: f64,
    pub max_points: usize,
    pub cycle: CycleOptions,
    /// Offsets scanned for a sign change of the displacement when seeding.
    pub seed_offsets: Vec<f64>,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            step0: 0.01,
            min_step: 1e-6,
            amplitude_cap: 50.0,
            max_amplitude_ratio: 1.5,
            max_period_change: 0.5,
            max_points: 20_000,
            cycle: CycleOptions::default(),
            seed_offsets: crate::lv::logspace(1e-3, 20.0, 44),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub amplitude: f64,
    pub period: f64,
    /// Anchor in log coordinates `(u, v)`.
    pub anchor: [f64; 2],
    pub return_derivative: f64,
}

impl From<&Cycle> for BranchPoint {
    fn from(c: &Cycle) -> Self {
        Self {
            lambda: c.lambda,
            amplitude: c.amplitude,
            period: c.period,
            anchor: c.anchor,
            return_derivative: c.return_derivative,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// The amplitude reached the cap at `lambda`.
    BlewUp { lambda: f64 },
    ReachedLambdaBound,
    Stalled { reason: String },
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::BlewUp { lambda } => write!(f, "BlewUp(lambda={lambda:.16e})"),
            Verdict::ReachedLambdaBound => write!(f, "ReachedLambdaBound"),
            Verdict::Stalled { reason } => write!(f, "Stalled({reason})"),
        }
    }
}

/// Least-squares fit `amplitude ≈ C·√|λ − λ_H|` over the first branch points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfFit {
    pub coefficient: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanarBranch {
    pub points: Vec<BranchPoint>,
    pub verdict: Verdict,
    pub amplitude_cap: f64,
    pub lambda_hopf: Option<f64>,
    /// Whether the seed cycle attracts (empirical stability probe).
    pub seed_stable: bool,
    pub hopf_fit: Option<HopfFit>,
    pub warnings: Vec<String>,
}

impl PlanarBranch {
    /// `(λ, amplitude)` pairs in branch order.
    pub fn amplitude_profile(&self) -> Vec<(f64, f64)> {
        amplitude_profile(&self.points)
    }

    /// For each threshold `A`, whether some point has amplitude in `[A, 2A]`.
    pub fn meets_thresholds(&self, thresholds: &[f64]) -> Vec<(f64, bool)> {
        thresholds
            .iter()
            .map(|&a| {
                (
                    a,
                    self.points
                        .iter()
                        .any(|p| p.amplitude >= a && p.amplitude <= 2.0 * a),
                )
            })
            .collect()
    }
}

pub fn amplitude_profile(points: &[BranchPoint]) -> Vec<(f64, f64)> {
    points.iter().map(|p| (p.lambda, p.amplitude)).collect()
}

fn hopf_side_bracket(sys: &LvSystem, start: f64, stop: f64) -> Option<f64> {
    let (lo, hi) = if stop < start {
        (start, start.max(1.0))
    } else {
        (start.min(0.0), start)
    };
    if hi <= lo {
        return None;
    }
    sys.hopf_locate(lo, hi, 1e-12).ok()
}

fn hopf_fit(points: &[BranchPoint], lambda_hopf: f64) -> Option<HopfFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .take(5)
        .map(|p| ((p.lambda - lambda_hopf).abs().sqrt(), p.amplitude))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let sxx: f64 = pts.iter().map(|(s, _)| s * s).sum();
    let sxy: f64 = pts.iter().map(|(s, a)| s * a).sum();
    let c = sxy / sxx;
    let mean = pts.iter().map(|(_, a)| a).sum::<f64>() / pts.len() as f64;
    let ss_res: f64 = pts.iter().map(|(s, a)| (a - c * s).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|(_, a)| (a - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(HopfFit {
        coefficient: c,
        r_squared,
        points: pts.len(),
    })
}

/// Finds the first cycle at `lambda` by scanning section offsets for a sign
/// change of the displacement and polishing with the secant solver.
pub fn seed_cycle(sys: &LvSystem, lambda: f64, opts: &BranchOptions) -> Result<Cycle, String> {
    let eq = sys.equilibrium(lambda).map_err(|e| e.to_string())?;
    let section = Section::lotka_volterra(&eq);
    let rhs = sys.log_field(lambda);
    let mut prev: Option<(f64, f64)> = None;
    for &s in &opts.seed_offsets {
        let d = match displacement(&rhs, &section, s, &opts.cycle) {
            Ok(d) => d,
            Err(_) => break,
        };
        if let Some((s0, d0)) = prev {
            if d0.signum() != d.signum() {
                let guess = s0 - d0 * (s - s0) / (d - d0);
                return find_cycle(&rhs, lambda, &section, guess, &opts.cycle).map_err(|e| e.to_string());
            }
        }
        prev = Some((s, d));
    }
    Err("the displacement keeps one sign over the scanned offsets".to_string())
}

pub fn continue_planar(
    sys: &LvSystem,
    lambda_start: f64,
    lambda_stop: f64,
    opts: &BranchOptions,
) -> Result<PlanarBranch, BranchError> {
    if !(opts.step0 > 0.0 && opts.min_step > 0.0) {
        return Err(BranchError::InvalidStep {
            step0: opts.step0,
            min_step: opts.min_step,
        });
    }
    let lambda_hopf = hopf_side_bracket(sys, lambda_start, lambda_stop);
    let seed = seed_cycle(sys, lambda_start, opts).map_err(|reason| BranchError::Seed {
        lambda: lambda_start,
        lambda_hopf,
        reason,
    })?;

    let dir = if lambda_stop < lambda_start { -1.0 } else { 1.0 };
    let mut points = vec![BranchPoint::from(&seed)];
    let mut offsets = vec![seed.offset];
    let mut steps_taken: Vec<f64> = Vec::new();
    let mut h = opts.step0;
    let mut last_failure = String::new();

    let verdict = loop {
        let last = points.last().expect("seeded");
        if last.amplitude >= opts.amplitude_cap {
            break Verdict::BlewUp {
                lambda: last.lambda,
            };
        }
        if last.lambda == lambda_stop {
            break Verdict::ReachedLambdaBound;
        }
        if points.len() >= opts.max_points {
            break Verdict::Stalled {
                reason: format!("point budget of {} exhausted", opts.max_points),
            };
        }
        if h < opts.min_step {
            break Verdict::Stalled {
                reason: format!(
                    "step fell below {} at λ = {}: {}",
                    opts.min_step, last.lambda, last_failure
                ),
            };
        }

        let mut lambda = last.lambda + dir * h;
        if (lambda - lambda_stop) * dir >= 0.0 {
            lambda = lambda_stop;
        }
        let step = (lambda - last.lambda).abs();
        let eq = match sys.equilibrium(lambda) {
            Ok(eq) => eq,
            Err(e) => {
                last_failure = e.to_string();
                h *= 0.5;
                continue;
            }
        };
        let section = Section::lotka_volterra(&eq);
        let prev = *offsets.last().expect("seeded");
        let guess = match (offsets.len(), steps_taken.last()) {
            (n, Some(&h_prev)) if n >= 2 => {
                let extrapolated = prev + (prev - offsets[n - 2]) * step / h_prev;
                if extrapolated > 0.0 {
                    extrapolated
                } else {
                    prev
                }
            }
            _ => prev,
        };
        let rhs = sys.log_field(lambda);
        match find_cycle(&rhs, lambda, &section, guess, &opts.cycle) {
            Ok(c) => {
                let amp_ratio = c.amplitude / last.amplitude;
                let period_change = (c.period - last.period).abs() / last.period;
                let r = opts.max_amplitude_ratio;
                if amp_ratio > r || amp_ratio < 1.0 / r || period_change >= opts.max_period_change {
                    last_failure = format!(
                        "amplitude ratio {amp_ratio:.3}, period change {period_change:.3}"
                    );
                    h *= 0.5;
                    continue;
                }
                points.push(BranchPoint::from(&c));
                offsets.push(c.offset);
                steps_taken.push(step);
                if step >= h {
                    h = (2.0 * h).min(opts.step0);
                }
            }
            Err(e) => {
                last_failure = match &e {
                    CycleError::Integration(_) if e.is_blowup() => format!("trajectory escaped: {e}"),
                    _ => e.to_string(),
                };
                h *= 0.5;
            }
        }
    };

    let mut warnings = Vec::new();
    let fit = lambda_hopf.and_then(|lh| hopf_fit(&points, lh));
    if let Some(f) = &fit {
        if f.r_squared < 0.95 {
            warnings.push(format!(
                "square-root Hopf scaling fits the first {} points with R² = {:.4}",
                f.points, f.r_squared
            ));
        }
    }
    Ok(PlanarBranch {
        points,
        verdict,
        amplitude_cap: opts.amplitude_cap,
        lambda_hopf,
        seed_stable: seed.is_stable(),
        hopf_fit: fit,
        warnings,
    })
}
