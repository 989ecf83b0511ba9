//! Command-line surface. [`RunConfig`] is both the clap parser and the
//! record echoed into every JSON summary.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "blowup", version, about = "Cycle branches from Hopf points to infinity")]
pub struct RunConfig {
    /// Directory for CSV, JSON and SVG artifacts.
    #[arg(long, global = true, env = "BLOWUP_OUT", default_value = "blowup-out")]
    pub out: PathBuf,
    /// Also write an SVG chart where the command has one.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Locate the Hopf point of a Lotka–Volterra system.
    LvHopf(LvHopfArgs),
    /// Check the sign conditions at λ = 0 and λ = 1.
    LvCheck(SystemArgs),
    /// Integrate one trajectory.
    LvSimulate(LvSimulateArgs),
    /// Continue the cycle branch in λ.
    LvBranch(LvBranchArgs),
    /// Solve L(wi; λ) = 0.
    HbRoot(HbRootArgs),
    /// Grid diagnostics for the sublevel set |L(wi; λ)| ≤ q.
    HbCheck(HbCheckArgs),
    /// Sweep the harmonic-balance branch over r.
    HbBranch(HbBranchArgs),
    /// Solve at one r and cross-check the solution.
    HbValidate(HbValidateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::LvHopf(_) => "lv-hopf",
            Command::LvCheck(_) => "lv-check",
            Command::LvSimulate(_) => "lv-simulate",
            Command::LvBranch(_) => "lv-branch",
            Command::HbRoot(_) => "hb-root",
            Command::HbCheck(_) => "hb-check",
            Command::HbBranch(_) => "hb-branch",
            Command::HbValidate(_) => "hb-validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SystemArgs {
    /// System catalog file.
    #[arg(long)]
    pub system: PathBuf,
    /// Catalog section; may be omitted when the catalog holds one system.
    #[arg(long)]
    pub entry: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LvHopfArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Bracket for the bisection in λ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub hi: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LvSimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long)]
    pub x0: f64,
    #[arg(long)]
    pub y0: f64,
    #[arg(long, default_value_t = 50.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LvBranchArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long = "from", allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long = "to", allow_negative_numbers = true)]
    pub to: f64,
    /// Log-coordinate amplitude treated as infinity.
    #[arg(long, default_value_t = 50.0)]
    pub cap: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub min_step: f64,
    /// Secant tolerance on the return-map displacement.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HbRootArgs {
    /// Symbol file.
    #[arg(long)]
    pub symbol: PathBuf,
    /// Newton seed `w,λ`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
    pub seed: Vec<f64>,
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HbCheckArgs {
    #[arg(long)]
    pub symbol: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Search box `w_min,w_max,λ_min,λ_max`.
    #[arg(long = "box", value_delimiter = ',', allow_hyphen_values = true, default_value = "0.5,1.5,-0.6,0.6")]
    pub search_box: Vec<f64>,
    #[arg(long, default_value_t = 16)]
    pub harmonics: usize,
    /// Grid nodes per axis.
    #[arg(long, default_value_t = 201)]
    pub density: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HbNumerics {
    #[arg(long, default_value_t = 32)]
    pub harmonics: usize,
    /// Collocation grid size M.
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Picard tolerance in the triple norm.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Seed `w,λ` for the root of L(wi; λ) = 0.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
    pub seed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HbBranchArgs {
    #[arg(long)]
    pub symbol: PathBuf,
    #[command(flatten)]
    pub numerics: HbNumerics,
    #[arg(long, default_value_t = 1e-3)]
    pub r_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub r_max: f64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    /// Repeat the sweep on the dyadically refined grid and compare quotients.
    #[arg(long)]
    pub refine: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HbValidateArgs {
    #[arg(long)]
    pub symbol: PathBuf,
    #[command(flatten)]
    pub numerics: HbNumerics,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Grid size for the residual check.
    #[arg(long, default_value_t = 512)]
    pub m_check: usize,
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("--{name} must be positive, got {v}"))
    }
}

fn pair(name: &str, v: &[f64]) -> Result<(), String> {
    if v.len() == 2 && v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(format!("--{name} takes two comma-separated numbers"))
    }
}

impl HbNumerics {
    fn validate(&self) -> Result<(), String> {
        positive("tol", self.tol)?;
        positive("q", self.q)?;
        pair("seed", &self.seed)?;
        if self.harmonics < 4 {
            return Err(format!("--harmonics must be at least 4, got {}", self.harmonics));
        }
        if self.grid < 2 * self.harmonics + 2 {
            return Err(format!(
                "--grid must be at least 2·harmonics + 2 = {}, got {}",
                2 * self.harmonics + 2,
                self.grid
            ));
        }
        if self.max_iter == 0 {
            return Err("--max-iter must be positive".into());
        }
        Ok(())
    }
}

impl RunConfig {
    /// Checks the invariants clap cannot express.
    pub fn validate(&self) -> Result<(), String> {
        match &self.command {
            Command::LvHopf(a) => {
                positive("tol", a.tol)?;
                if !(a.lo < a.hi) {
                    return Err("--lo must be below --hi".into());
                }
            }
            Command::LvCheck(_) => {}
            Command::LvSimulate(a) => {
                positive("rtol", a.rtol)?;
                positive("atol", a.atol)?;
                positive("t-end", a.t_end)?;
                positive("x0", a.x0)?;
                positive("y0", a.y0)?;
            }
            Command::LvBranch(a) => {
                positive("cap", a.cap)?;
                positive("step", a.step)?;
                positive("min-step", a.min_step)?;
                positive("tol", a.tol)?;
                if a.from == a.to || !a.from.is_finite() || !a.to.is_finite() {
                    return Err("--from and --to must be distinct finite values".into());
                }
            }
            Command::HbRoot(a) => {
                positive("tol", a.tol)?;
                pair("seed", &a.seed)?;
            }
            Command::HbCheck(a) => {
                positive("q", a.q)?;
                if a.search_box.len() != 4 || a.search_box[0] >= a.search_box[1] || a.search_box[2] >= a.search_box[3] {
                    return Err("--box takes w_min,w_max,λ_min,λ_max with each pair ordered".into());
                }
                if a.harmonics < 4 {
                    return Err(format!("--harmonics must be at least 4, got {}", a.harmonics));
                }
                if a.density < 3 {
                    return Err("--density must be at least 3".into());
                }
            }
            Command::HbBranch(a) => {
                a.numerics.validate()?;
                positive("r-min", a.r_min)?;
                if !(a.r_min < a.r_max) || a.points < 2 {
                    return Err("need r_min < r_max and at least 2 points".into());
                }
            }
            Command::HbValidate(a) => {
                a.numerics.validate()?;
                positive("r", a.r)?;
                if a.m_check < 2 * a.numerics.harmonics + 2 {
                    return Err("--m-check must be at least 2·harmonics + 2".into());
                }
            }
        }
        Ok(())
    }
}
