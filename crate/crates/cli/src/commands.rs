use std::path::Path;

use blowup::config::{self as files, ConfigError, SymbolFile};
use blowup::hb::{
    check_theorem_conditions, dyadic_refine, geometric_grid, validate_solution, HarmonicBalance, HbConfig, SearchBox,
    SymbolPolynomial,
};
use blowup::lv::{default_probe_grid, LvSystem};
use blowup::table;
use blowup::{continue_planar, integrate, BranchOptions, OdeOptions};
use serde_json::{json, Value};

use crate::config::*;
use crate::svg::{emit_svg, Axes};
use crate::{Failure, Output};

fn usage(e: ConfigError) -> Failure {
    Failure::Usage(e.to_string())
}

pub(crate) fn dispatch(cfg: &RunConfig) -> Result<Output, Failure> {
    let out = Outputs {
        dir: &cfg.out,
        svg: cfg.svg,
        written: Vec::new(),
    };
    match &cfg.command {
        Command::LvHopf(a) => lv_hopf(a, out),
        Command::LvCheck(a) => lv_check(a, out),
        Command::LvSimulate(a) => lv_simulate(a, out),
        Command::LvBranch(a) => lv_branch(a, out),
        Command::HbRoot(a) => hb_root(a, out),
        Command::HbCheck(a) => hb_check(a, out),
        Command::HbBranch(a) => hb_branch(a, out),
        Command::HbValidate(a) => hb_validate(a, out),
    }
}

struct Outputs<'a> {
    dir: &'a Path,
    svg: bool,
    written: Vec<String>,
}

impl Outputs<'_> {
    fn text(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        std::fs::write(self.dir.join(name), body)
            .map_err(|e| Failure::Domain(format!("cannot write {name}: {e}")))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn chart(&mut self, name: &str, series: &[(f64, f64)], axes: Axes) -> Result<(), Failure> {
        if !self.svg {
            return Ok(());
        }
        emit_svg(series, &axes, &self.dir.join(name))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(self, result: Value) -> Result<Output, Failure> {
        Ok(Output {
            result,
            artifacts: self.written,
        })
    }
}

fn load_system(a: &SystemArgs) -> Result<(String, LvSystem, Value), Failure> {
    let cat = files::parse_catalog(&files::read_to_string(&a.system).map_err(usage)?).map_err(usage)?;
    let (name, entry) = files::select_system(&cat, a.entry.as_deref()).map_err(usage)?;
    let sys = entry.build().map_err(usage)?;
    let echo = json!({ "name": name, "a": entry.a, "b": entry.b, "c": entry.c, "d": entry.d, "term": entry.term });
    Ok((name.to_string(), sys, echo))
}

fn load_symbol(path: &Path) -> Result<(SymbolFile, SymbolPolynomial), Failure> {
    let file = files::parse_symbol(&files::read_to_string(path).map_err(usage)?).map_err(usage)?;
    let poly = file.symbol().map_err(usage)?;
    Ok((file, poly))
}

fn harmonic_balance(path: &Path, n: &HbNumerics) -> Result<(SymbolFile, HarmonicBalance, (f64, f64)), Failure> {
    let (file, poly) = load_symbol(path)?;
    let nl = file
        .nonlinearity
        .as_ref()
        .ok_or_else(|| Failure::Usage(format!("{} has no [nonlinearity] section", path.display())))?
        .build()
        .map_err(usage)?;
    let config = HbConfig {
        n_harmonics: n.harmonics,
        grid: n.grid,
        q: n.q,
        tol: n.tol,
        max_iter: n.max_iter,
        ..HbConfig::default()
    };
    let root = poly.find_root((n.seed[0], n.seed[1]), 1e-13)?;
    let hb = HarmonicBalance::new(poly, nl, config)?;
    Ok((file, hb, (root.w, root.lambda)))
}

fn lv_hopf(a: &LvHopfArgs, out: Outputs) -> Result<Output, Failure> {
    let (_, sys, system) = load_system(&a.system)?;
    let lambda_h = sys.hopf_locate(a.lo, a.hi, a.tol)?;
    let eq = sys.equilibrium(lambda_h)?;
    out.finish(json!({
        "system": system,
        "lambda_h": lambda_h,
        "equilibrium": eq,
        "term_slope_below": sys.term().derivative(sys.y_star(), a.lo),
        "term_slope_above": sys.term().derivative(sys.y_star(), a.hi),
    }))
}

fn lv_check(a: &SystemArgs, out: Outputs) -> Result<Output, Failure> {
    let (_, sys, system) = load_system(a)?;
    let report = sys.check_proposition_conditions(&default_probe_grid(sys.y_star()));
    out.finish(json!({
        "system": system,
        "all_pass": report.all_pass(),
        "report": report,
    }))
}

fn lv_simulate(a: &LvSimulateArgs, mut out: Outputs) -> Result<Output, Failure> {
    let (_, sys, system) = load_system(&a.system)?;
    sys.check_extinction(a.lambda)?;
    let opts = OdeOptions::with_tolerances(a.rtol, a.atol);
    let traj = integrate(sys.log_field(a.lambda), &[a.x0.ln(), a.y0.ln()], a.t_end, opts)?;
    let mut csv = String::from("t,x,y\n");
    let mut phase = Vec::with_capacity(traj.len());
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let (x, y) = (s[0].exp(), s[1].exp());
        phase.push((x, y));
        csv.push_str(&format!("{},{},{}\n", table::num(*t), table::num(x), table::num(y)));
    }
    out.text("lv-simulate.csv", &csv)?;
    out.chart(
        "lv-simulate.svg",
        &phase,
        Axes {
            x_label: "prey x",
            y_label: "predator y",
            log_x: true,
            log_y: true,
        },
    )?;
    let end = traj.final_state();
    out.finish(json!({
        "system": system,
        "lambda": a.lambda,
        "steps": traj.len() - 1,
        "final": { "t": traj.times.last(), "x": end[0].exp(), "y": end[1].exp() },
    }))
}

fn lv_branch(a: &LvBranchArgs, mut out: Outputs) -> Result<Output, Failure> {
    let (_, sys, system) = load_system(&a.system)?;
    let mut opts = BranchOptions {
        step0: a.step,
        min_step: a.min_step,
        amplitude_cap: a.cap,
        ..BranchOptions::default()
    };
    opts.cycle.tol = a.tol;
    let branch = continue_planar(&sys, a.from, a.to, &opts)?;
    out.text("lv-branch.csv", &table::planar_branch_csv(&branch))?;
    out.chart(
        "lv-branch.svg",
        &branch.amplitude_profile(),
        Axes {
            x_label: "lambda",
            y_label: "amplitude (log coordinates)",
            log_x: false,
            log_y: true,
        },
    )?;
    let mut ladder = vec![0.1, 1.0, 10.0];
    if a.cap > 10.0 {
        ladder.push(a.cap);
    }
    let thresholds: Vec<Value> = branch
        .meets_thresholds(&ladder)
        .into_iter()
        .map(|(t, met)| json!({ "amplitude": t, "met": met }))
        .collect();
    let last = branch.points.last().expect("branch holds its seed");
    out.finish(json!({
        "system": system,
        "verdict": branch.verdict,
        "verdict_text": branch.verdict.to_string(),
        "points": branch.points.len(),
        "lambda_hopf": branch.lambda_hopf,
        "seed_stable": branch.seed_stable,
        "hopf_fit": branch.hopf_fit,
        "thresholds": thresholds,
        "first": branch.points[0],
        "last": last,
        "warnings": branch.warnings,
    }))
}

fn hb_root(a: &HbRootArgs, out: Outputs) -> Result<Output, Failure> {
    let (file, poly) = load_symbol(&a.symbol)?;
    let root = poly.find_root((a.seed[0], a.seed[1]), a.tol)?;
    let (j, det) = poly.j_matrix(root.w, root.lambda);
    out.finish(json!({
        "degree": file.degree(),
        "coefficients": file.coefficients,
        "w0": root.w,
        "lambda0": root.lambda,
        "iterations": root.iterations,
        "residual": root.residual,
        "j": j,
        "det_j": det,
    }))
}

fn hb_check(a: &HbCheckArgs, out: Outputs) -> Result<Output, Failure> {
    let (file, poly) = load_symbol(&a.symbol)?;
    let b = &a.search_box;
    let search_box = SearchBox::new((b[0], b[1]), (b[2], b[3]));
    let report = check_theorem_conditions(&poly, a.q, &search_box, a.harmonics, a.density)?;
    out.finish(json!({
        "coefficients": file.coefficients,
        "all_pass": report.all_pass(),
        "checks": {
            "domain": report.domain_ok(),
            "unique_root": report.root_ok(),
            "jacobian": report.jacobian_ok(),
            "non_resonance": report.resonance_ok(),
        },
        "report": report,
    }))
}

fn sweep_summary(points: &[blowup::hb::HbBranchPoint]) -> Value {
    let increasing = points.windows(2).all(|p| p[1].sup_norm_x > p[0].sup_norm_x);
    let (first, last) = (points.first(), points.last());
    let decades = match (first, last) {
        (Some(f), Some(l)) => (l.sup_norm_x / f.sup_norm_x).log10(),
        _ => 0.0,
    };
    let ratio = |p: &blowup::hb::HbBranchPoint| p.sup_norm_x / (p.r / std::f64::consts::PI.sqrt());
    let max_contraction = points.iter().map(|p| p.contraction_estimate).fold(0.0, f64::max);
    json!({
        "sup_norm_increasing": increasing,
        "sup_norm_decades": decades,
        "sup_norm_ratio_first": first.map(ratio),
        "sup_norm_ratio_last": last.map(ratio),
        "max_contraction_estimate": max_contraction,
        "flagged_points": points.iter().filter(|p| p.contraction_flagged()).count(),
    })
}

fn hb_branch(a: &HbBranchArgs, mut out: Outputs) -> Result<Output, Failure> {
    let (file, hb, root) = harmonic_balance(&a.symbol, &a.numerics)?;
    let grid = geometric_grid(a.r_min, a.r_max, a.points);
    let sweep = match hb.sweep(&grid, root) {
        Ok(s) => s,
        Err(fail) => {
            out.text("hb-branch.csv", &table::hb_branch_csv(&fail.partial.points))?;
            return Err(Failure::Domain(format!(
                "{fail} ({} points converged before the failure)",
                fail.partial.points.len()
            )));
        }
    };
    out.text("hb-branch.csv", &table::hb_branch_csv(&sweep.points))?;
    let series: Vec<(f64, f64)> = sweep.points.iter().map(|p| (p.r, p.sup_norm_x)).collect();
    out.chart(
        "hb-branch.svg",
        &series,
        Axes {
            x_label: "r",
            y_label: "sup |x_r|",
            log_x: true,
            log_y: true,
        },
    )?;
    let refined = if a.refine {
        let fine = hb.sweep(&dyadic_refine(&grid), root).map_err(|f| Failure::Domain(f.to_string()))?;
        Some(json!({
            "points": fine.points.len(),
            "lambda_lipschitz": fine.lambda_lipschitz,
            "w_lipschitz": fine.w_lipschitz,
        }))
    } else {
        None
    };
    let first = &sweep.points[0];
    out.finish(json!({
        "coefficients": file.coefficients,
        "nonlinearity": file.nonlinearity,
        "root": { "w0": root.0, "lambda0": root.1 },
        "points": sweep.points.len(),
        "lambda_lipschitz": sweep.lambda_lipschitz,
        "w_lipschitz": sweep.w_lipschitz,
        "refined": refined,
        "small_r": { "r": first.r, "lambda_offset": first.lambda - root.1, "w_offset": first.w - root.0 },
        "shape": sweep_summary(&sweep.points),
    }))
}

fn hb_validate(a: &HbValidateArgs, out: Outputs) -> Result<Output, Failure> {
    let (file, hb, root) = harmonic_balance(&a.symbol, &a.numerics)?;
    let point = hb.fixed_point(a.r, &hb.zero_state(), root)?;
    let report = validate_solution(&hb, &point, a.m_check)?;
    out.finish(json!({
        "coefficients": file.coefficients,
        "nonlinearity": file.nonlinearity,
        "root": { "w0": root.0, "lambda0": root.1 },
        "point": {
            "r": point.r,
            "lambda": point.lambda,
            "w": point.w,
            "sup_norm_x": point.sup_norm_x,
            "residual": point.residual,
            "contraction_estimate": point.contraction_estimate,
            "iterations": point.iterations,
        },
        "validation": {
            "m_check": report.m_check,
            "spectral_residual": report.spectral_residual,
            "time_domain_mismatch": report.time_domain_mismatch,
            "period": report.period,
        },
    }))
}
