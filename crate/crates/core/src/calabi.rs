//! The Calabi invariant `V(phi, a) = (1 / int omega) int f_(phi, a) omega` and
//! checks of its algebraic laws.

use serde::{Deserialize, Serialize};

use crate::action::{normalize_with, ActionFunction, ActionOptions, BoundaryMean};
use crate::disc_map::DiscMap;
use crate::error::{Error, Result};
use crate::numerics::quadrature::GaussRule;

pub const DEFAULT_GRID: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalabiResult {
    pub value: f64,
    /// `|V(n_r, n_theta) - V(n_r/2, n_theta/2)|`.
    pub error_estimate: f64,
    pub grid: (usize, usize),
    pub a: f64,
    pub boundary: BoundaryMean,
    pub warnings: Vec<String>,
}

/// Gauss-Legendre radii and weights on `[0, r_max]`, with separate panels
/// between the map's radial breakpoints. Nodes are shared out by length.
pub fn radial_nodes(map: &DiscMap, n_r: usize) -> Vec<(f64, f64)> {
    let r_max = map.r_max();
    let mut cuts = vec![0.0];
    cuts.extend(map.radial_breakpoints());
    cuts.push(r_max);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        let k = ((n_r as f64 * len / r_max).ceil() as usize).max(8);
        out.extend(GaussRule::new(k).mapped(w[0], w[1]));
    }
    out
}

/// `(1 / (pi r_max^2)) int f r dr dtheta` on the given grid, for an already
/// normalised action.
pub fn disc_average(f: &ActionFunction, n_r: usize, n_theta: usize) -> Result<f64> {
    let map = f.map();
    let nodes = radial_nodes(map, n_r);
    let radii: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let grid = f.sample_grid(&radii, n_theta)?;
    let mut acc = 0.0;
    for (&(r, w), row) in nodes.iter().zip(&grid.values) {
        acc += w * r * row.iter().sum::<f64>() / row.len() as f64;
    }
    let r_max = map.r_max();
    Ok(2.0 * acc / (r_max * r_max))
}

/// `V(phi, a)` on an `n_r x n_theta` grid (Gauss-Legendre in `r`, trapezoid in `theta`).
pub fn calabi_invariant(map: &DiscMap, a: f64, n_r: usize, n_theta: usize) -> Result<CalabiResult> {
    let f = normalize_with(map, 0.0, &ActionOptions::default())?;
    calabi_of_action(&f, a, n_r, n_theta)
}

/// `V(phi, a)` from an action normalised at any level; the level shift is applied analytically.
pub fn calabi_of_action(f: &ActionFunction, a: f64, n_r: usize, n_theta: usize) -> Result<CalabiResult> {
    if n_r < 8 || n_theta < 8 {
        return Err(Error::InvalidParameter(format!(
            "Calabi grid must be at least 8 x 8 (got {n_r} x {n_theta})"
        )));
    }
    if !f.map().is_disc_map() {
        return Err(Error::InvalidParameter(
            "the Calabi invariant needs a map of the whole disc".into(),
        ));
    }
    let f0 = f.at_level(0.0);
    let fine = disc_average(&f0, n_r, n_theta)?;
    let coarse = disc_average(&f0, (n_r / 2).max(8), (n_theta / 2).max(8))?;
    Ok(CalabiResult {
        value: fine + a,
        error_estimate: (fine - coarse).abs(),
        grid: (n_r, n_theta),
        a,
        boundary: *f.boundary(),
        warnings: f.warnings(),
    })
}

/// Outcome of a law check `|lhs - rhs| <= tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    pub law: String,
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
    pub tol: f64,
    pub pass: bool,
}

impl LawReport {
    fn new(law: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let defect = (lhs - rhs).abs();
        Self {
            law: law.into(),
            lhs,
            rhs,
            defect,
            tol,
            pass: defect <= tol,
        }
    }
}

/// `|V(phi^n, 0) - n V(phi, 0)| <= tol`.
pub fn check_power_law(map: &DiscMap, n: usize, tol: f64, grid: (usize, usize)) -> Result<LawReport> {
    if n < 2 {
        return Err(Error::InvalidParameter("power law needs n >= 2".into()));
    }
    let base = calabi_invariant(map, 0.0, grid.0, grid.1)?.value;
    let pow = calabi_invariant(&map.iterate(n)?, 0.0, grid.0, grid.1)?.value;
    Ok(LawReport::new(format!("V(phi^{n}) = {n} V(phi)"), pow, n as f64 * base, tol))
}

/// `|V(psi^-1 phi psi, 0) - V(phi, 0)| <= tol`.
pub fn check_conjugacy_invariance(
    map: &DiscMap,
    psi: &DiscMap,
    tol: f64,
    grid: (usize, usize),
) -> Result<LawReport> {
    let base = calabi_invariant(map, 0.0, grid.0, grid.1)?.value;
    let conj = calabi_invariant(&map.conjugate(psi)?, 0.0, grid.0, grid.1)?.value;
    Ok(LawReport::new("V(psi^-1 phi psi) = V(phi)", conj, base, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub values: Vec<f64>,
    pub limit: f64,
    pub gaps: Vec<f64>,
    /// Gaps never grow by more than `tol` from one term to the next.
    pub monotone: bool,
    pub final_gap: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Calabi invariants of a sequence approaching `limit`: gaps must be
/// nonincreasing (within `tol`) and the last gap at most `tol`.
pub fn check_c1_continuity(
    maps: &[DiscMap],
    limit: &DiscMap,
    tol: f64,
    grid: (usize, usize),
) -> Result<ContinuityReport> {
    let values = maps
        .iter()
        .map(|m| Ok(calabi_invariant(m, 0.0, grid.0, grid.1)?.value))
        .collect::<Result<Vec<_>>>()?;
    let limit = calabi_invariant(limit, 0.0, grid.0, grid.1)?.value;
    Ok(continuity_from_values(values, limit, tol))
}

pub fn continuity_from_values(values: Vec<f64>, limit: f64, tol: f64) -> ContinuityReport {
    let gaps: Vec<f64> = values.iter().map(|v| (v - limit).abs()).collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + tol);
    let final_gap = gaps.last().copied().unwrap_or(0.0);
    ContinuityReport {
        values,
        limit,
        gaps,
        monotone,
        final_gap,
        tol,
        pass: monotone && final_gap <= tol,
    }
}
