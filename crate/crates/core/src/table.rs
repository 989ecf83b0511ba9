//! CSV rendering with 16 significant digits and fixed column order.

use std::fmt::Write;

use crate::branch::PlanarBranch;
use crate::cycle::Cycle;
use crate::hb::HbBranchPoint;
use crate::ode::Trajectory;

/// 16 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.15e}")
}

fn row(out: &mut String, cells: &[f64]) {
    let line: Vec<String> = cells.iter().map(|&c| num(c)).collect();
    out.push_str(&line.join(","));
    out.push('\n');
}

pub fn trajectory_csv(traj: &Trajectory, labels: &[&str]) -> String {
    let mut out = String::from("t");
    for l in labels {
        write!(out, ",{l}").unwrap();
    }
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut cells = vec![*t];
        cells.extend_from_slice(s);
        row(&mut out, &cells);
    }
    out
}

pub fn cycle_csv(cycle: &Cycle) -> String {
    let mut out = String::from("t,u,v\n");
    for (t, p) in &cycle.samples {
        row(&mut out, &[*t, p[0], p[1]]);
    }
    out
}

pub fn planar_branch_csv(branch: &PlanarBranch) -> String {
    let mut out = String::from("lambda,amplitude,period,anchor_u,anchor_v\n");
    for p in &branch.points {
        row(&mut out, &[p.lambda, p.amplitude, p.period, p.anchor[0], p.anchor[1]]);
    }
    writeln!(out, "# verdict: {}", branch.verdict).unwrap();
    out
}

pub fn hb_branch_csv(points: &[HbBranchPoint]) -> String {
    let mut out = String::from("r,lambda,w,sup_norm_x,residual,contraction_estimate,iterations\n");
    for p in points {
        let cells = [p.r, p.lambda, p.w, p.sup_norm_x, p.residual, p.contraction_estimate];
        let line: Vec<String> = cells.iter().map(|&c| num(c)).collect();
        writeln!(out, "{},{}", line.join(","), p.iterations).unwrap();
    }
    out
}
