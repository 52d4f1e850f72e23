//! Periodic points, mean actions, Birkhoff averages, and the mean-action
//! inequality and Calabi-identity checkers built on them.

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{normalize_with, ActionFunction, ActionOptions};
use crate::calabi::{calabi_of_action, CalabiResult};
use crate::disc_map::{DiscMap, PolarPoint, RotationEstimate};
use crate::error::{Error, Result};

pub const ORBIT_TOL: f64 = 1e-10;
pub const DEDUP_EPS: f64 = 1e-6;
/// Radius gap under which orbits of a continuum (invariant circle) are merged.
pub const CIRCLE_GAP: f64 = 1e-4;
const ACTION_MATCH: f64 = 1e-6;
const SOLVE_TARGET: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub points: Vec<PolarPoint>,
    /// Minimal period.
    pub period: usize,
    /// `max |phi(p_i) - p_(i+1)|` around the cycle (Cartesian).
    pub residual: f64,
    pub mean_action: f64,
    /// Level `a` of the action used for `mean_action`.
    pub level: f64,
    /// Number of distinct orbits merged into this representative.
    pub cluster_size: usize,
}

impl PeriodicOrbit {
    pub fn radius_range(&self) -> (f64, f64) {
        self.points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.r), hi.max(p.r)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub d_max: usize,
    /// `(n_r, n_theta)` polar seed grid; the origin is always added.
    pub seed_grid: (usize, usize),
    pub orbit_tol: f64,
    pub dedup_eps: f64,
    pub max_iter: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            d_max: 10,
            seed_grid: (16, 8),
            orbit_tol: ORBIT_TOL,
            dedup_eps: DEDUP_EPS,
            max_iter: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub seeds: usize,
    pub attempts: usize,
    pub converged: usize,
    pub not_converged: usize,
    pub non_minimal: usize,
    pub duplicates: usize,
    pub merged_on_circles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSearch {
    pub orbits: Vec<PeriodicOrbit>,
    pub diagnostics: SearchDiagnostics,
}

impl OrbitSearch {
    /// Orbit with the smallest mean action.
    pub fn inf_mean_action(&self) -> Option<&PeriodicOrbit> {
        self.orbits
            .iter()
            .min_by(|a, b| a.mean_action.total_cmp(&b.mean_action))
    }
}

fn iterate_with_jacobian(map: &DiscMap, d: usize, z: Vector2<f64>) -> Result<(Vector2<f64>, Matrix2<f64>)> {
    let mut q = z;
    let mut jac = Matrix2::identity();
    for _ in 0..d {
        let (next, j) = map.eval_with_jacobian(q)?;
        jac = j * jac;
        q = next;
    }
    Ok((q, jac))
}

fn iterate_point(map: &DiscMap, d: usize, z: Vector2<f64>) -> Result<Vector2<f64>> {
    (0..d).try_fold(z, |q, _| map.eval_cartesian(q))
}

fn project(map: &DiscMap, z: Vector2<f64>) -> Vector2<f64> {
    let r = z.norm();
    if r > map.r_max() {
        z * (map.r_max() / r)
    } else if r < map.r_lo() {
        if r == 0.0 {
            Vector2::new(map.r_lo(), 0.0)
        } else {
            z * (map.r_lo() / r)
        }
    } else {
        z
    }
}

/// Levenberg-Marquardt on `phi^d(z) - z`, kept inside the domain by radial projection.
fn solve_periodic(map: &DiscMap, d: usize, seed: Vector2<f64>, max_iter: usize) -> Result<Option<Vector2<f64>>> {
    let mut z = project(map, seed);
    let (img, jac) = iterate_with_jacobian(map, d, z)?;
    let mut f = img - z;
    let mut a = jac - Matrix2::identity();
    let mut norm = f.norm();
    let mut mu = 1e-6;
    for _ in 0..max_iter {
        if norm <= SOLVE_TARGET {
            return Ok(Some(z));
        }
        let h = a.transpose() * a;
        let g = a.transpose() * f;
        let scale = h.trace().max(1e-300);
        let Some(step) = (h + Matrix2::identity() * (mu * scale)).lu().solve(&(-g)) else {
            mu *= 10.0;
            continue;
        };
        let cand = project(map, z + step);
        let (ci, cj) = iterate_with_jacobian(map, d, cand)?;
        let cf = ci - cand;
        let cn = cf.norm();
        if cn < norm {
            z = cand;
            f = cf;
            a = cj - Matrix2::identity();
            norm = cn;
            mu = (mu * 0.1).max(1e-15);
        } else {
            mu *= 10.0;
            if mu > 1e10 {
                break;
            }
        }
    }
    Ok((norm <= SOLVE_TARGET).then_some(z))
}

fn proper_divisors(d: usize) -> impl Iterator<Item = usize> {
    (1..d).filter(move |k| d.is_multiple_of(*k))
}

/// Arithmetic mean of `f` over the orbit points.
pub fn mean_action(points: &[PolarPoint], f: &ActionFunction) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty orbit".into()));
    }
    let mut acc = 0.0;
    for &p in points {
        acc += f.eval(p)?;
    }
    Ok(acc / points.len() as f64)
}

/// Seeds on a polar grid plus the origin (or the inner radius of an annulus).
pub fn seed_points(map: &DiscMap, grid: (usize, usize)) -> Vec<Vector2<f64>> {
    let (n_r, n_t) = grid;
    let (lo, hi) = (map.r_lo(), map.r_max());
    let mut seeds = vec![Vector2::new(lo, 0.0)];
    for i in 0..n_r {
        let r = lo + (hi - lo) * (i + 1) as f64 / n_r as f64;
        for j in 0..n_t {
            // Staggered rows avoid seeds lining up along rays.
            let t = std::f64::consts::TAU * (j as f64 + 0.5 * (i % 2) as f64) / n_t as f64;
            seeds.push(PolarPoint::new(r, t).to_cartesian());
        }
    }
    seeds
}

/// Newton search for periodic points of every period `d <= d_max`.
///
/// Converged points are filtered to minimal period, deduplicated modulo
/// cyclic shifts, and points on a common invariant circle (same period,
/// radii within [`CIRCLE_GAP`], mean actions within `1e-6`) are reported by
/// one representative.
pub fn find_periodic_points(map: &DiscMap, f: &ActionFunction, opts: &SearchOptions) -> Result<OrbitSearch> {
    if opts.d_max == 0 {
        return Err(Error::InvalidParameter("d_max must be at least 1".into()));
    }
    if !(opts.orbit_tol > 0.0 && opts.dedup_eps > 0.0) {
        return Err(Error::InvalidParameter("orbit tolerances must be positive".into()));
    }
    let seeds = seed_points(map, opts.seed_grid);
    let mut diag = SearchDiagnostics {
        seeds: seeds.len(),
        ..Default::default()
    };
    let mut distinct: Vec<PeriodicOrbit> = Vec::new();
    for d in 1..=opts.d_max {
        let found: Vec<Option<Vector2<f64>>> = seeds
            .par_iter()
            .map(|&s| solve_periodic(map, d, s, opts.max_iter).ok().flatten())
            .collect();
        diag.attempts += seeds.len();
        for z in found {
            let Some(z) = z else {
                diag.not_converged += 1;
                continue;
            };
            diag.converged += 1;
            if distinct
                .iter()
                .filter(|o| o.period == d)
                .any(|o| o.points.iter().any(|p| (p.to_cartesian() - z).norm() < opts.dedup_eps))
            {
                diag.duplicates += 1;
                continue;
            }
            let mut minimal = true;
            for k in proper_divisors(d) {
                if (iterate_point(map, k, z)? - z).norm() <= opts.orbit_tol {
                    minimal = false;
                    break;
                }
            }
            if !minimal {
                diag.non_minimal += 1;
                continue;
            }
            let mut cart = vec![z];
            for _ in 1..d {
                let next = map.eval_cartesian(*cart.last().expect("nonempty"))?;
                cart.push(next);
            }
            let closing = map.eval_cartesian(cart[d - 1])?;
            let residual = (closing - z).norm();
            if residual > opts.orbit_tol {
                diag.not_converged += 1;
                continue;
            }
            let points: Vec<PolarPoint> = cart
                .iter()
                .map(|&c| {
                    let mut p = PolarPoint::from_cartesian(c);
                    p.r = p.r.min(map.r_max());
                    p
                })
                .collect();
            let mean = mean_action(&points, f)?;
            distinct.push(PeriodicOrbit {
                points,
                period: d,
                residual,
                mean_action: mean,
                level: f.level(),
                cluster_size: 1,
            });
        }
    }
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    for o in distinct {
        let (lo, hi) = o.radius_range();
        if let Some(rep) = orbits.iter_mut().find(|rep| {
            let (rlo, rhi) = rep.radius_range();
            rep.period == o.period
                && (rlo - lo).abs() <= CIRCLE_GAP
                && (rhi - hi).abs() <= CIRCLE_GAP
                && (rep.mean_action - o.mean_action).abs() <= ACTION_MATCH
        }) {
            rep.cluster_size += 1;
            diag.merged_on_circles += 1;
        } else {
            orbits.push(o);
        }
    }
    Ok(OrbitSearch {
        orbits,
        diagnostics: diag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffEstimate {
    pub estimate: f64,
    /// `|average over n - average over n/2|`.
    pub diagnostic: f64,
}

/// Cesaro average of `f` along the orbit of `x`.
pub fn birkhoff_mean_action(map: &DiscMap, f: &ActionFunction, x: PolarPoint, n: usize) -> Result<BirkhoffEstimate> {
    if n < 100 {
        return Err(Error::InvalidParameter("Birkhoff averages need n >= 100".into()));
    }
    let mut p = x;
    let mut acc = 0.0;
    let mut half = 0.0;
    for i in 0..n {
        acc += f.eval(p)?;
        if i + 1 == n / 2 {
            half = acc / (n / 2) as f64;
        }
        p = map.eval(p)?;
        p.r = p.r.min(map.r_max());
    }
    let estimate = acc / n as f64;
    Ok(BirkhoffEstimate {
        estimate,
        diagnostic: (estimate - half).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub search: SearchOptions,
    pub grid: (usize, usize),
    pub action: ActionOptions,
    /// Tolerance of the Calabi-identity gaps.
    pub identity_tol: f64,
    /// Boundary iterates for a numerically estimated rotation number.
    pub rotation_samples: usize,
    pub rotation_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            search: SearchOptions::default(),
            grid: (crate::calabi::DEFAULT_GRID, crate::calabi::DEFAULT_GRID),
            action: ActionOptions::default(),
            identity_tol: 1e-5,
            rotation_samples: 100_000,
            rotation_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum BoundaryClass {
    RigidRotation { theta0: f64 },
    NonRigid { rotation_number: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HutchingsReport {
    pub boundary: BoundaryClass,
    /// Set when the boundary is not a rigid rotation: results lie outside the theorem's hypotheses.
    pub exploratory: bool,
    pub calabi: CalabiResult,
    /// `V(phi, 0) < 0`.
    pub hypothesis_met: bool,
    pub orbits_found: usize,
    pub inf_mean_action: Option<f64>,
    pub inf_orbit: Option<PeriodicOrbit>,
    /// `inf mean action <= V(phi, 0)`; `None` when the hypothesis fails.
    pub conclusion_met: Option<bool>,
    /// `V(phi, 0) - inf mean action`.
    pub margin: Option<f64>,
    pub verdict: String,
    pub hints: Vec<String>,
    pub diagnostics: Option<SearchDiagnostics>,
}

fn classify_boundary(map: &DiscMap, opts: &VerifyOptions) -> Result<(BoundaryClass, RotationEstimate)> {
    let rot = map.boundary_rotation_number(opts.rotation_samples, opts.rotation_tol)?;
    let class = match map.detect_rigid_boundary(1e-10)? {
        Some(theta0) => BoundaryClass::RigidRotation { theta0 },
        None => BoundaryClass::NonRigid {
            rotation_number: rot.value,
        },
    };
    Ok((class, rot))
}

/// Check `V(phi, 0) < 0  =>  inf { A_(phi,0)(x) : x periodic } <= V(phi, 0)` on the orbits found.
///
/// The result is one-sided: more orbits can only lower the infimum, so a
/// failed conclusion is reported as a candidate rather than a violation.
pub fn check_hutchings_inequality(map: &DiscMap, opts: &VerifyOptions) -> Result<HutchingsReport> {
    let (boundary, _) = classify_boundary(map, opts)?;
    let exploratory = matches!(boundary, BoundaryClass::NonRigid { .. });
    let mut hints = Vec::new();
    if exploratory {
        hints.push(
            "boundary is not a rigid rotation: results are exploratory; if the boundary map is smoothly \
             conjugate to a rotation, conjugate the map so that it rotates the boundary rigidly \
             (both sides of the inequality are conjugacy invariant)"
                .to_string(),
        );
    }
    let f = normalize_with(map, 0.0, &opts.action)?;
    let calabi = calabi_of_action(&f, 0.0, opts.grid.0, opts.grid.1)?;
    let hypothesis_met = calabi.value < 0.0;
    if !hypothesis_met {
        if calabi.value > 0.0 {
            hints.push(
                "V(phi, 0) > 0: test the inverse map, whose Calabi invariant is -V(phi, 0)".to_string(),
            );
        }
        return Ok(HutchingsReport {
            boundary,
            exploratory,
            calabi,
            hypothesis_met,
            orbits_found: 0,
            inf_mean_action: None,
            inf_orbit: None,
            conclusion_met: None,
            margin: None,
            verdict: "hypothesis not met: V(phi, 0) >= 0, no conclusion claimed".to_string(),
            hints,
            diagnostics: None,
        });
    }
    let search = find_periodic_points(map, &f, &opts.search)?;
    let inf = search.inf_mean_action().cloned();
    let inf_value = inf.as_ref().map(|o| o.mean_action);
    let conclusion = inf_value.map(|v| v <= calabi.value);
    let margin = inf_value.map(|v| calabi.value - v);
    let verdict = match conclusion {
        Some(true) => "conclusion holds: inf mean action <= V(phi, 0)".to_string(),
        _ => "counterexample candidate: increase d_max and resolution before drawing conclusions".to_string(),
    };
    Ok(HutchingsReport {
        boundary,
        exploratory,
        calabi,
        hypothesis_met,
        orbits_found: search.orbits.len(),
        inf_mean_action: inf_value,
        inf_orbit: inf,
        conclusion_met: Some(conclusion.unwrap_or(false)),
        margin,
        verdict,
        hints,
        diagnostics: Some(search.diagnostics),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalabiIdentityReport {
    pub rotation: RotationEstimate,
    pub orbits_found: usize,
    /// A single periodic orbit (a fixed point) was found up to `d_max`.
    pub applicable: bool,
    pub reason: String,
    /// `V(phi, rho)`.
    pub calabi_at_rho: f64,
    pub calabi_gap: Option<f64>,
    pub fixed_point: Option<PolarPoint>,
    /// `f_(phi, rho)` at the fixed point.
    pub fixed_point_action: Option<f64>,
    pub action_gap: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

/// For a map with a unique periodic point up to `d_max`, compare `V(phi, rho)`
/// and the action of the fixed point with the boundary rotation number `rho`.
pub fn check_calabi_identity(map: &DiscMap, opts: &VerifyOptions) -> Result<CalabiIdentityReport> {
    let (_, rotation) = classify_boundary(map, opts)?;
    let rho = rotation.value;
    let f = normalize_with(map, rho, &opts.action)?;
    let calabi = calabi_of_action(&f, rho, opts.grid.0, opts.grid.1)?;
    let search = find_periodic_points(map, &f, &opts.search)?;
    let unique = search.orbits.len() == 1 && search.orbits[0].period == 1;
    if !unique {
        return Ok(CalabiIdentityReport {
            rotation,
            orbits_found: search.orbits.len(),
            applicable: false,
            reason: format!(
                "identity not applicable: {} periodic orbits found up to period {}",
                search.orbits.len(),
                opts.search.d_max
            ),
            calabi_at_rho: calabi.value,
            calabi_gap: None,
            fixed_point: None,
            fixed_point_action: None,
            action_gap: None,
            tol: opts.identity_tol,
            pass: false,
        });
    }
    let orbit = &search.orbits[0];
    let calabi_gap = (calabi.value - rho).abs();
    let action_gap = (orbit.mean_action - rho).abs();
    Ok(CalabiIdentityReport {
        rotation,
        orbits_found: 1,
        applicable: true,
        reason: "unique fixed point found".to_string(),
        calabi_at_rho: calabi.value,
        calabi_gap: Some(calabi_gap),
        fixed_point: Some(orbit.points[0]),
        fixed_point_action: Some(orbit.mean_action),
        action_gap: Some(action_gap),
        tol: opts.identity_tol,
        pass: calabi_gap <= opts.identity_tol && action_gap <= opts.identity_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::normalize;
    use crate::fields::RadialPolynomial;
    use std::f64::consts::PI;

    fn twist03() -> DiscMap {
        DiscMap::twist(RadialPolynomial::monomial(0.3, 2))
    }

    #[test]
    fn irrational_rotation_has_only_the_origin() {
        let m = DiscMap::rigid((5f64.sqrt() - 1.0) / 2.0);
        let f = normalize(&m, 0.0).unwrap();
        let opts = SearchOptions {
            d_max: 5,
            seed_grid: (4, 4),
            ..Default::default()
        };
        let s = find_periodic_points(&m, &f, &opts).unwrap();
        assert_eq!(s.orbits.len(), 1);
        assert!(s.orbits[0].points[0].r < 1e-12);
    }

    #[test]
    fn twist_origin_mean_action() {
        let m = twist03();
        let f = normalize(&m, 0.0).unwrap();
        let a = mean_action(&[PolarPoint::new(0.0, 0.0)], &f).unwrap();
        assert!((a + 0.15 * PI).abs() < 1e-12);
    }

    #[test]
    fn rational_rotation_boundary_orbit() {
        let m = DiscMap::rigid(0.25);
        let f = normalize(&m, 0.25).unwrap();
        let pts: Vec<PolarPoint> = (0..4).map(|k| PolarPoint::new(1.0, k as f64 * PI / 2.0)).collect();
        assert_eq!(mean_action(&pts, &f).unwrap(), 0.25);
    }

    #[test]
    fn birkhoff_on_fixed_point() {
        let m = twist03();
        let f = normalize(&m, 0.0).unwrap();
        let b = birkhoff_mean_action(&m, &f, PolarPoint::new(0.0, 0.0), 200).unwrap();
        assert!((b.estimate + 0.15 * PI).abs() < 1e-12 && b.diagnostic < 1e-14);
        assert!(birkhoff_mean_action(&m, &f, PolarPoint::new(0.0, 0.0), 10).is_err());
    }

    #[test]
    fn zero_period_bound_rejected() {
        let m = twist03();
        let f = normalize(&m, 0.0).unwrap();
        let opts = SearchOptions {
            d_max: 0,
            ..Default::default()
        };
        assert!(find_periodic_points(&m, &f, &opts).is_err());
    }
}
