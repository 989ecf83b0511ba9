//! Grid diagnostics for the sublevel set `D_q = {(w, λ) : |L(wi; λ)| ≤ q}`.
//!
//! These are heuristics on a finite grid, not proofs: connectivity is
//! 4-neighbour connectivity of grid nodes and the reported minima are taken
//! over nodes only.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::symbol::SymbolPolynomial;
use super::HbError;

/// Rectangle in the `(w, λ)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub w_min: f64,
    pub w_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl SearchBox {
    pub fn new(w: (f64, f64), lambda: (f64, f64)) -> Self {
        Self {
            w_min: w.0,
            w_max: w.1,
            lambda_min: lambda.0,
            lambda_max: lambda.1,
        }
    }

    fn is_valid(&self) -> bool {
        self.w_min < self.w_max && self.lambda_min < self.lambda_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub q: f64,
    pub harmonics: usize,
    /// Nodes per axis.
    pub grid_density: usize,
    pub nodes_inside: usize,
    /// `min |L| − q` over the box boundary; positive when `D_q` stays clear of it.
    pub boundary_margin: f64,
    pub components: usize,
    /// Components of the complement that do not reach the boundary.
    pub holes: usize,
    /// Refined roots of `L(wi; λ) = 0` inside `D_q`.
    pub roots: Vec<(f64, f64)>,
    /// Smallest `|L(wi; λ)|` over `D_q` nodes more than two cells from every root.
    pub root_isolation: f64,
    pub min_det_j: f64,
    /// `min |L(nwi; λ)|` over `D_q` and `n ∈ {0, 2, ..., N}`.
    pub min_resonance: f64,
    pub worst_n: usize,
    pub worst_point: (f64, f64),
}

impl TheoremReport {
    pub fn domain_ok(&self) -> bool {
        self.boundary_margin > 0.0 && self.components == 1 && self.holes == 0
    }

    pub fn root_ok(&self) -> bool {
        self.roots.len() == 1
    }

    pub fn jacobian_ok(&self) -> bool {
        self.min_det_j > 1e-12
    }

    pub fn resonance_ok(&self) -> bool {
        self.min_resonance > 1e-12
    }

    pub fn all_pass(&self) -> bool {
        self.domain_ok() && self.root_ok() && self.jacobian_ok() && self.resonance_ok()
    }
}

struct Grid {
    n: usize,
    w: Vec<f64>,
    lambda: Vec<f64>,
    inside: Vec<bool>,
}

impl Grid {
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    fn neighbours(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (k % self.n, k / self.n);
        let n = self.n;
        [
            (i > 0).then(|| k - 1),
            (i + 1 < n).then(|| k + 1),
            (j > 0).then(|| k - n),
            (j + 1 < n).then(|| k + n),
        ]
        .into_iter()
        .flatten()
    }

    fn on_boundary(&self, k: usize) -> bool {
        let (i, j) = (k % self.n, k / self.n);
        i == 0 || j == 0 || i + 1 == self.n || j + 1 == self.n
    }

    /// Labels 4-connected components of nodes with `mask[k] == want`.
    fn components(&self, want: bool) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.inside.len()];
        let mut out = Vec::new();
        for start in 0..self.inside.len() {
            if seen[start] || self.inside[start] != want {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(k) = queue.pop_front() {
                for nb in self.neighbours(k) {
                    if !seen[nb] && self.inside[nb] == want {
                        seen[nb] = true;
                        comp.push(nb);
                        queue.push_back(nb);
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}

pub fn check_theorem_conditions(
    poly: &SymbolPolynomial,
    q: f64,
    search_box: &SearchBox,
    harmonics: usize,
    grid_density: usize,
) -> Result<TheoremReport, HbError> {
    if !(q > 0.0) || !search_box.is_valid() || grid_density < 3 {
        return Err(HbError::InvalidConfig(
            "need q > 0, a non-empty box and at least 3 nodes per axis".into(),
        ));
    }
    let n = grid_density;
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let ws = axis(search_box.w_min, search_box.w_max);
    let ls = axis(search_box.lambda_min, search_box.lambda_max);

    let mut values = Vec::with_capacity(n * n);
    for &l in &ls {
        for &w in &ws {
            values.push(poly.on_axis(w, l));
        }
    }
    let grid = Grid {
        n,
        inside: values.iter().map(|z| z.norm() <= q).collect(),
        w: ws,
        lambda: ls,
    };
    let at = |k: usize| (grid.w[k % n], grid.lambda[k / n]);

    let boundary_margin = (0..n * n)
        .filter(|&k| grid.on_boundary(k))
        .map(|k| values[k].norm() - q)
        .fold(f64::INFINITY, f64::min);
    if boundary_margin <= 0.0 {
        return Err(HbError::InconclusiveBox {
            q,
            margin: boundary_margin,
        });
    }

    let components = grid.components(true).len();
    let holes = grid
        .components(false)
        .iter()
        .filter(|c| !c.iter().any(|&k| grid.on_boundary(k)))
        .count();

    // Root cells: both Re L and Im L change sign over the cell corners.
    let mut roots: Vec<(f64, f64)> = Vec::new();
    let dw = grid.w[1] - grid.w[0];
    let dl = grid.lambda[1] - grid.lambda[0];
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let corners = [
                grid.idx(i, j),
                grid.idx(i + 1, j),
                grid.idx(i, j + 1),
                grid.idx(i + 1, j + 1),
            ];
            let straddles = |part: fn(&num_complex::Complex64) -> f64| {
                let vals = corners.map(|k| part(&values[k]));
                vals.iter().any(|&v| v <= 0.0) && vals.iter().any(|&v| v >= 0.0)
            };
            if !(straddles(|z| z.re) && straddles(|z| z.im)) {
                continue;
            }
            let seed = (grid.w[i] + 0.5 * dw, grid.lambda[j] + 0.5 * dl);
            let Ok(root) = poly.find_root(seed, 1e-13) else {
                continue;
            };
            let r = (root.w, root.lambda);
            let in_box = r.0 >= search_box.w_min
                && r.0 <= search_box.w_max
                && r.1 >= search_box.lambda_min
                && r.1 <= search_box.lambda_max;
            let fresh = roots
                .iter()
                .all(|p| (p.0 - r.0).abs() > 1e-8 || (p.1 - r.1).abs() > 1e-8);
            if in_box && fresh {
                roots.push(r);
            }
        }
    }

    let mut root_isolation = f64::INFINITY;
    let mut min_det_j = f64::INFINITY;
    let mut min_resonance = f64::INFINITY;
    let mut worst_n = 0;
    let mut worst_point = (f64::NAN, f64::NAN);
    let mut nodes_inside = 0;
    for k in (0..n * n).filter(|&k| grid.inside[k]) {
        nodes_inside += 1;
        let (w, l) = at(k);
        let far = roots
            .iter()
            .all(|r| (r.0 - w).abs() > 2.0 * dw || (r.1 - l).abs() > 2.0 * dl);
        if far {
            root_isolation = root_isolation.min(values[k].norm());
        }
        min_det_j = min_det_j.min(poly.j_matrix(w, l).1.abs());
        for m in std::iter::once(0).chain(2..=harmonics) {
            let modulus = poly.on_axis(m as f64 * w, l).norm();
            if modulus < min_resonance {
                min_resonance = modulus;
                worst_n = m;
                worst_point = (w, l);
            }
        }
    }

    Ok(TheoremReport {
        q,
        harmonics,
        grid_density,
        nodes_inside,
        boundary_margin,
        components,
        holes,
        roots,
        root_isolation,
        min_det_j,
        min_resonance,
        worst_n,
        worst_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator() -> SymbolPolynomial {
        SymbolPolynomial::damped_oscillator()
    }

    #[test]
    fn oscillator_on_wide_box_passes() {
        let b = SearchBox::new((0.5, 1.5), (-0.6, 0.6));
        let rep = check_theorem_conditions(&oscillator(), 0.5, &b, 16, 201).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        assert_eq!(rep.roots.len(), 1);
        assert!((rep.roots[0].0 - 1.0).abs() < 1e-12);
        assert!(rep.roots[0].1.abs() < 1e-12);
        // det J = 2w² + λ²... at least 2·(1/2) on D_q
        assert!(rep.min_det_j > 0.9);
        assert!(rep.min_resonance > 0.9);
        assert_eq!(rep.worst_n, 0);
        assert_eq!(rep.components, 1);
        assert_eq!(rep.holes, 0);
    }

    #[test]
    fn narrow_lambda_window_cuts_the_sublevel_set() {
        // D_0.5 reaches |λ| = √(2 − √3) ≈ 0.5176.
        let b = SearchBox::new((0.5, 1.5), (-0.5, 0.5));
        let err = check_theorem_conditions(&oscillator(), 0.5, &b, 16, 201).unwrap_err();
        assert!(matches!(err, HbError::InconclusiveBox { .. }));
    }

    #[test]
    fn huge_q_is_inconclusive() {
        let b = SearchBox::new((0.5, 1.5), (-0.6, 0.6));
        let err = check_theorem_conditions(&oscillator(), 1e6, &b, 16, 101).unwrap_err();
        assert!(matches!(err, HbError::InconclusiveBox { .. }));
    }

    #[test]
    fn constant_term_four_clears_n_zero() {
        let poly = SymbolPolynomial::from_polynomials(vec![vec![4.0], vec![0.0, 1.0]]).unwrap();
        let b = SearchBox::new((1.5, 2.5), (-1.0, 1.0));
        let rep = check_theorem_conditions(&poly, 0.5, &b, 8, 201).unwrap();
        assert!(rep.all_pass(), "{rep:?}");
        assert!((rep.roots[0].0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_constant_term_is_a_resonance() {
        // L = p² + (λ − 1)p + λ has its root at (1, 1) and L(0; λ) = λ.
        let poly = SymbolPolynomial::from_polynomials(vec![vec![0.0, 1.0], vec![-1.0, 1.0]]).unwrap();
        let b = SearchBox::new((-2.0, 2.0), (-2.0, 3.0));
        let rep = check_theorem_conditions(&poly, 0.6, &b, 8, 201).unwrap();
        assert_eq!(rep.worst_n, 0);
        assert!(rep.min_resonance < 1e-12, "{rep:?}");
        assert!(!rep.resonance_ok());
        assert!(!rep.all_pass());
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let b = SearchBox::new((1.0, 1.0), (0.0, 1.0));
        assert!(check_theorem_conditions(&oscillator(), 0.5, &b, 4, 50).is_err());
    }
}
