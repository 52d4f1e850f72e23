//! Action functions: primitives `f` of `phi^* beta - beta`, `beta = (r^2/2) dtheta`,
//! normalised so that the asymptotic mean action on the boundary equals a level `a`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disc_map::{DiscMap, MapKind, PolarPoint};
use crate::error::{Error, Result};
use crate::numerics::fourier::TrigInterpolant;
use crate::numerics::quadrature::adaptive;
use crate::numerics::rational::as_rational;
use crate::numerics::wrap_angle;

/// Absolute tolerance per path segment.
pub const PATH_TOL: f64 = 1e-10;
/// Boundary tolerance for maps whose boundary restriction is a rigid rotation.
pub const BD_TOL_EXACT: f64 = 1e-8;
/// Boundary tolerance for Birkhoff-averaged boundaries.
pub const BD_TOL_BIRKHOFF: f64 = 1e-4;
pub const RATIONAL_MAX_DEN: u64 = 1_000_000;
pub const RATIONAL_TOL: f64 = 1e-14;
/// Samples used to tabulate the raw action on the boundary.
const BOUNDARY_TABLE: usize = 64;

/// The 1-form `phi^* beta - beta` at a point, in the `(dr, dtheta)` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovectorSample {
    pub dr: f64,
    pub dtheta: f64,
    pub at: PolarPoint,
}

/// `phi^* beta - beta` at `p`.
///
/// Computed as `(X dY - Y dX)/2 - beta` from the Cartesian image and
/// Jacobian, which stays regular at the origin and does not depend on the lift.
pub fn pullback_defect(map: &DiscMap, p: PolarPoint) -> Result<CovectorSample> {
    let (dr, dtheta) = match map.kind() {
        MapKind::Rigid { .. } => {
            map.eval(p)?;
            (0.0, 0.0)
        }
        MapKind::Twist { g } => {
            map.eval(p)?;
            (PI * p.r * p.r * g.derivative(p.r), 0.0)
        }
        _ => {
            let (q, j) = map.eval_polar_with_jacobian(p)?;
            let w = q.to_cartesian();
            let wx = 0.5 * (w.x * j[(1, 0)] - w.y * j[(0, 0)]);
            let wy = 0.5 * (w.x * j[(1, 1)] - w.y * j[(0, 1)]);
            let (s, c) = p.theta.sin_cos();
            (wx * c + wy * s, p.r * (wy * c - wx * s) - 0.5 * p.r * p.r)
        }
    };
    Ok(CovectorSample { dr, dtheta, at: p })
}

/// Integral of `phi^* beta - beta` along the polygonal path (linear in `(r, theta)`
/// between consecutive vertices).
pub fn line_integral(map: &DiscMap, vertices: &[PolarPoint], tol: f64) -> Result<f64> {
    let mut acc = 0.0;
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (dr, dt) = (b.r - a.r, b.theta - a.theta);
        acc += adaptive(
            |t| {
                let c = pullback_defect(map, PolarPoint::new(a.r + t * dr, a.theta + t * dt))?;
                Ok(c.dr * dr + c.dtheta * dt)
            },
            0.0,
            1.0,
            tol,
        )?;
    }
    Ok(acc)
}

fn radial_segment(map: &DiscMap, from: f64, to: f64, theta: f64, tol: f64) -> Result<f64> {
    let mut cuts = vec![from];
    let (lo, hi) = (from.min(to), from.max(to));
    let mut bps: Vec<f64> = map
        .radial_breakpoints()
        .into_iter()
        .filter(|&b| b > lo && b < hi)
        .collect();
    if from > to {
        bps.reverse();
    }
    cuts.extend(bps);
    cuts.push(to);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        acc += adaptive(
            |s| Ok(pullback_defect(map, PolarPoint::new(s, theta))?.dr),
            w[0],
            w[1],
            tol,
        )?;
    }
    Ok(acc)
}

/// `f(p) - f(anchor)`: the integral along the radial segment from `anchor` to
/// `(p.r, anchor.theta)` followed by the arc at radius `p.r` to `p.theta`
/// (taken the short way round; `f` is `2 pi`-periodic).
pub fn action_raw(map: &DiscMap, p: PolarPoint, anchor: PolarPoint) -> Result<f64> {
    action_raw_tol(map, p, anchor, PATH_TOL)
}

pub fn action_raw_tol(map: &DiscMap, p: PolarPoint, anchor: PolarPoint, tol: f64) -> Result<f64> {
    let radial = radial_segment(map, anchor.r, p.r, anchor.theta, tol)?;
    if p.r == 0.0 {
        return Ok(radial);
    }
    let end = anchor.theta + wrap_angle(p.theta - anchor.theta);
    let angular = adaptive(
        |t| Ok(pullback_defect(map, PolarPoint::new(p.r, t))?.dtheta),
        anchor.theta,
        end,
        tol,
    )?;
    Ok(radial + angular)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BoundaryMethod {
    /// Average over the `q` points of a rational rigid rotation orbit.
    RationalOrbit { q: u64 },
    /// Trapezoid rule against Lebesgue measure (irrational rigid rotation).
    Trapezoid { n: usize },
    /// Birkhoff average along one boundary orbit.
    Birkhoff { n: usize },
}

/// Boundary asymptotic mean of a raw action, with its convergence diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMean {
    pub value: f64,
    /// Estimate from half the samples (Birkhoff) or equal to `value`.
    pub half_value: f64,
    pub method: BoundaryMethod,
    pub tolerance: f64,
    pub converged: bool,
}

/// Asymptotic mean of `raw` along the boundary.
pub fn boundary_mean<F>(map: &DiscMap, raw: F, n: usize) -> Result<BoundaryMean>
where
    F: Fn(PolarPoint) -> Result<f64>,
{
    let r_max = map.r_max();
    // One table of the raw action on the boundary serves every method.
    let table: Vec<f64> = (0..BOUNDARY_TABLE)
        .map(|j| raw(PolarPoint::new(r_max, TAU * j as f64 / BOUNDARY_TABLE as f64)))
        .collect::<Result<_>>()?;
    let interp = TrigInterpolant::from_samples(&table);
    if let Some(theta0) = map.detect_rigid_boundary(1e-10)? {
        let (method, nodes) = match as_rational(theta0, RATIONAL_MAX_DEN, RATIONAL_TOL) {
            Some((_, q)) if q as usize <= n.max(1) => (BoundaryMethod::RationalOrbit { q }, q as usize),
            _ => (BoundaryMethod::Trapezoid { n: n.max(1) }, n.max(1)),
        };
        // The rational orbit of (r_max, 0) visits the q-th roots of unity.
        let value = (0..nodes)
            .map(|j| interp.eval(TAU * j as f64 / nodes as f64))
            .sum::<f64>()
            / nodes as f64;
        return Ok(BoundaryMean {
            value,
            half_value: value,
            method,
            tolerance: BD_TOL_EXACT,
            converged: true,
        });
    }
    let n = n.max(2);
    let mut p = PolarPoint::new(r_max, 0.0);
    let mut acc = 0.0;
    let mut half = f64::NAN;
    for i in 0..n {
        acc += interp.eval(p.theta);
        if i + 1 == n / 2 {
            half = acc / (n / 2) as f64;
        }
        p = map.eval(p)?;
        p.r = r_max;
    }
    let value = acc / n as f64;
    Ok(BoundaryMean {
        value,
        half_value: half,
        method: BoundaryMethod::Birkhoff { n },
        tolerance: BD_TOL_BIRKHOFF,
        converged: (value - half).abs() <= BD_TOL_BIRKHOFF,
    })
}

/// Knobs for [`normalize_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionOptions {
    pub path_tol: f64,
    /// Boundary orbit length / trapezoid nodes.
    pub boundary_samples: usize,
}

impl Default for ActionOptions {
    fn default() -> Self {
        Self {
            path_tol: PATH_TOL,
            boundary_samples: 10_000,
        }
    }
}

/// `f_(phi, a)`: the action whose boundary asymptotic mean equals `a`.
#[derive(Debug, Clone)]
pub struct ActionFunction {
    map: DiscMap,
    a: f64,
    /// `f(anchor)`.
    base_value: f64,
    anchor: PolarPoint,
    boundary: BoundaryMean,
    path_tol: f64,
}

/// Values of an action on a polar grid `radii x {2 pi j / n_theta}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGrid {
    pub radii: Vec<f64>,
    pub n_theta: usize,
    /// `values[i][j] = f(radii[i], 2 pi j / n_theta)`.
    pub values: Vec<Vec<f64>>,
}

pub fn normalize(map: &DiscMap, a: f64) -> Result<ActionFunction> {
    normalize_with(map, a, &ActionOptions::default())
}

pub fn normalize_with(map: &DiscMap, a: f64, opts: &ActionOptions) -> Result<ActionFunction> {
    if !(opts.path_tol > 0.0) {
        return Err(Error::InvalidParameter("path_tol must be positive".into()));
    }
    let anchor = PolarPoint::new(map.r_max(), 0.0);
    let boundary = boundary_mean(
        map,
        |p| action_raw_tol(map, p, anchor, opts.path_tol),
        opts.boundary_samples,
    )?;
    Ok(ActionFunction {
        map: map.clone(),
        a,
        base_value: a - boundary.value,
        anchor,
        boundary,
        path_tol: opts.path_tol,
    })
}

impl ActionFunction {
    pub fn eval(&self, p: PolarPoint) -> Result<f64> {
        Ok(self.base_value + self.raw(p)?)
    }

    /// `f(p) - f(anchor)`.
    pub fn raw(&self, p: PolarPoint) -> Result<f64> {
        action_raw_tol(&self.map, p, self.anchor, self.path_tol)
    }

    pub fn map(&self) -> &DiscMap {
        &self.map
    }

    pub fn level(&self) -> f64 {
        self.a
    }

    pub fn base_value(&self) -> f64 {
        self.base_value
    }

    pub fn anchor(&self) -> PolarPoint {
        self.anchor
    }

    pub fn boundary(&self) -> &BoundaryMean {
        &self.boundary
    }

    /// Non-convergence warnings from the boundary average.
    pub fn warnings(&self) -> Vec<String> {
        if self.boundary.converged {
            Vec::new()
        } else {
            vec![format!(
                "boundary mean action not converged: {} ({} from half the orbit)",
                self.boundary.value, self.boundary.half_value
            )]
        }
    }

    /// `f_(phi, a')`, obtained by shifting the constant.
    pub fn at_level(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.base_value = self.base_value + (a - self.a);
        out.a = a;
        out
    }

    /// Values on a polar grid. The radial profile along `theta = 0` is built
    /// from adaptive segments between consecutive radii; each circle is
    /// filled by integrating the trigonometric interpolant of the angular
    /// component of `phi^* beta - beta`.
    pub fn sample_grid(&self, radii: &[f64], n_theta: usize) -> Result<ActionGrid> {
        let radial = self.radial_profile(radii)?;
        let values = radii
            .par_iter()
            .zip(&radial)
            .map(|(&r, &f0)| {
                let thetas = (0..n_theta).map(|j| TAU * j as f64 / n_theta as f64);
                if r == 0.0 {
                    return Ok(vec![f0; n_theta]);
                }
                let samples: Vec<f64> = thetas
                    .clone()
                    .map(|t| Ok(pullback_defect(&self.map, PolarPoint::new(r, t))?.dtheta))
                    .collect::<Result<_>>()?;
                let ip = TrigInterpolant::from_samples(&samples);
                Ok(thetas.map(|t| f0 + ip.mean() * t + ip.antiderivative(t)).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(ActionGrid {
            radii: radii.to_vec(),
            n_theta,
            values,
        })
    }

    /// `f(r, 0)` for each radius.
    pub fn radial_profile(&self, radii: &[f64]) -> Result<Vec<f64>> {
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&i, &j| radii[j].total_cmp(&radii[i]));
        let mut out = vec![0.0; radii.len()];
        let mut prev = self.anchor.r;
        let mut acc = self.base_value;
        for i in order {
            acc += radial_segment(&self.map, prev, radii[i], 0.0, self.path_tol)?;
            prev = radii[i];
            out[i] = acc;
        }
        Ok(out)
    }
}
