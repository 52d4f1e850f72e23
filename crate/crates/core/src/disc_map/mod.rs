//! Area-preserving maps of closed discs in lifted polar coordinates.
//!
//! Every map has a lifted polar evaluator `(r, theta) -> (R, Theta)` that
//! commutes with the deck transformation `theta -> theta + 2 pi`, and a
//! Cartesian evaluator used near the origin and for Jacobians.

pub mod hamiltonian;

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::RadialPolynomial;
use crate::generating::{self, GeneratingFunction};
use crate::numerics::wrap_angle;

pub use hamiltonian::{Hamiltonian, HamiltonianFlow, Scheme};

/// Below this radius the Cartesian chart is authoritative.
pub const ORIGIN_CUTOFF: f64 = 1e-3;
/// Relative finite-difference step.
pub const H_FD: f64 = 1e-5;
pub const DEFAULT_STEPS: usize = 200;

/// Radial slack for domain checks; absorbs boundary drift of numerical flows.
pub(crate) const DOMAIN_SLACK: f64 = 1e-9;
const INV_TOL: f64 = 1e-12;
const INV_MAX_ITER: usize = 50;

/// A point `(r, theta)` on the universal cover of the punctured disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }

    pub fn from_cartesian(z: Vector2<f64>) -> Self {
        Self {
            r: z.norm(),
            theta: z.y.atan2(z.x),
        }
    }

    pub fn to_cartesian(self) -> Vector2<f64> {
        let (s, c) = self.theta.sin_cos();
        Vector2::new(self.r * c, self.r * s)
    }

    /// Same point of the disc (angles may differ by multiples of `2 pi`).
    pub fn ambient_eq(&self, other: &PolarPoint, tol: f64) -> bool {
        if (self.r - other.r).abs() > tol {
            return false;
        }
        self.r.max(other.r) <= tol || (self.r * wrap_angle(self.theta - other.theta)).abs() <= tol
    }
}

#[derive(Debug, Clone)]
pub enum MapKind {
    Rigid {
        theta0: f64,
    },
    /// `(r, theta) -> (r, theta + 2 pi g(r))`.
    Twist {
        g: RadialPolynomial,
    },
    Hamiltonian(Arc<HamiltonianFlow>),
    Generating(GeneratingFunction),
    /// `psi^-1 o map o psi`.
    Conjugated {
        map: Arc<DiscMap>,
        psi: Arc<DiscMap>,
        psi_inv: Arc<DiscMap>,
    },
    Iterate {
        map: Arc<DiscMap>,
        n: usize,
    },
    /// The same map on the smaller disc `r <= r_max`.
    Restriction {
        map: Arc<DiscMap>,
    },
    /// `inner` on `r <= radius`, `outer` beyond.
    Glued {
        inner: Arc<DiscMap>,
        outer: Arc<DiscMap>,
        radius: f64,
    },
    /// Inverse evaluated by damped Newton iteration.
    Inverse {
        map: Arc<DiscMap>,
    },
}

/// An area-preserving diffeomorphism of the disc (or annulus) of outer radius `r_max`.
///
/// Cloning is cheap; composite kinds share their components.
#[derive(Debug, Clone)]
pub struct DiscMap {
    kind: MapKind,
    r_lo: f64,
    r_max: f64,
}

/// Outcome of [`DiscMap::check_area_preservation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub max_defect: f64,
    pub worst_point: PolarPoint,
    pub pass: bool,
}

/// Outcome of [`DiscMap::boundary_rotation_number`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub value: f64,
    /// Estimate from the first half of the orbit (equal to `value` when analytic).
    pub half_value: f64,
    pub analytic: bool,
    pub converged: bool,
}

fn polar_basis(theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (c, s)
}

/// Convert a Cartesian Jacobian at `p` (image `q`) into the polar Jacobian
/// `d(R, Theta)/d(r, theta)`.
pub fn polar_from_cartesian(j: &Matrix2<f64>, p: PolarPoint, q: PolarPoint) -> Result<Matrix2<f64>> {
    if q.r == 0.0 {
        return Err(Error::Domain {
            r: p.r,
            theta: p.theta,
            r_max: f64::NAN,
        });
    }
    let (c, s) = polar_basis(p.theta);
    let (cc, ss) = polar_basis(q.theta);
    let b_in = Matrix2::new(c, -p.r * s, s, p.r * c);
    let a_out = Matrix2::new(cc, ss, -ss / q.r, cc / q.r);
    Ok(a_out * j * b_in)
}

impl DiscMap {
    fn with_kind(kind: MapKind, r_lo: f64, r_max: f64) -> Self {
        Self { kind, r_lo, r_max }
    }

    pub fn rigid(theta0: f64) -> Self {
        Self::rigid_on(theta0, 1.0)
    }

    pub fn rigid_on(theta0: f64, r_max: f64) -> Self {
        Self::with_kind(MapKind::Rigid { theta0 }, 0.0, r_max)
    }

    pub fn identity() -> Self {
        Self::rigid(0.0)
    }

    pub fn twist(g: RadialPolynomial) -> Self {
        Self::with_kind(MapKind::Twist { g }, 0.0, 1.0)
    }

    pub fn twist_on(g: RadialPolynomial, r_max: f64) -> Self {
        Self::with_kind(MapKind::Twist { g }, 0.0, r_max)
    }

    /// Time-one map of `h` with the default fourth-order scheme.
    pub fn hamiltonian_time_one(h: Hamiltonian, steps: usize) -> Result<Self> {
        Self::hamiltonian_with(h, steps, Scheme::TripleJump, 1.0)
    }

    pub fn hamiltonian_with(h: Hamiltonian, steps: usize, scheme: Scheme, r_max: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("steps must be >= 1".into()));
        }
        h.validate()?;
        let var = h.circle_variation(r_max);
        if var > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "Hamiltonian varies by {var:e} on the boundary circle; the boundary would not be invariant"
            )));
        }
        let flow = HamiltonianFlow::new(h, steps, scheme);
        Ok(Self::with_kind(MapKind::Hamiltonian(Arc::new(flow)), 0.0, r_max))
    }

    pub(crate) fn generating(w: GeneratingFunction) -> Self {
        let (lo, hi) = w.domain();
        Self::with_kind(MapKind::Generating(w), lo, hi)
    }

    /// `map^n`.
    pub fn iterate(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("iterate needs n >= 1".into()));
        }
        Ok(Self::with_kind(
            MapKind::Iterate {
                map: Arc::new(self.clone()),
                n,
            },
            self.r_lo,
            self.r_max,
        ))
    }

    /// `psi^-1 o self o psi`.
    pub fn conjugate(&self, psi: &DiscMap) -> Result<Self> {
        if (psi.r_max - self.r_max).abs() > DOMAIN_SLACK || psi.r_lo > self.r_lo {
            return Err(Error::Consistency(
                "conjugacy must be defined on the same disc".into(),
            ));
        }
        Ok(Self::with_kind(
            MapKind::Conjugated {
                map: Arc::new(self.clone()),
                psi: Arc::new(psi.clone()),
                psi_inv: Arc::new(psi.inverse()),
            },
            self.r_lo,
            self.r_max,
        ))
    }

    /// Closed-form inverse where the kind admits one, Newton inversion otherwise.
    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            MapKind::Rigid { theta0 } => MapKind::Rigid { theta0: -theta0 },
            MapKind::Twist { g } => MapKind::Twist { g: g.scaled(-1.0) },
            MapKind::Hamiltonian(flow) => MapKind::Hamiltonian(Arc::new(flow.reversed())),
            MapKind::Conjugated { map, psi, psi_inv } => MapKind::Conjugated {
                map: Arc::new(map.inverse()),
                psi: psi.clone(),
                psi_inv: psi_inv.clone(),
            },
            MapKind::Iterate { map, n } => MapKind::Iterate {
                map: Arc::new(map.inverse()),
                n: *n,
            },
            MapKind::Restriction { map } => MapKind::Restriction {
                map: Arc::new(map.inverse()),
            },
            MapKind::Inverse { map } => return (**map).clone(),
            MapKind::Generating(_) | MapKind::Glued { .. } => MapKind::Inverse {
                map: Arc::new(self.clone()),
            },
        };
        Self::with_kind(kind, self.r_lo, self.r_max)
    }

    /// The same map on the disc of radius `radius <= r_max`.
    pub fn restrict(&self, radius: f64) -> Result<Self> {
        if radius > self.r_max + DOMAIN_SLACK || radius <= self.r_lo {
            return Err(Error::InvalidParameter(format!(
                "restriction radius {radius} outside ({}, {}]",
                self.r_lo, self.r_max
            )));
        }
        Ok(Self::with_kind(
            MapKind::Restriction {
                map: Arc::new(self.clone()),
            },
            self.r_lo,
            radius,
        ))
    }

    /// `inner` on `r <= radius`, `outer` on `radius < r <= outer.r_max`.
    pub fn glue(inner: &DiscMap, outer: &DiscMap, radius: f64) -> Result<Self> {
        if (inner.r_max - radius).abs() > DOMAIN_SLACK || outer.r_lo > radius + DOMAIN_SLACK {
            return Err(Error::Consistency(format!(
                "cannot glue at r = {radius}: inner covers up to {}, outer starts at {}",
                inner.r_max, outer.r_lo
            )));
        }
        Ok(Self::with_kind(
            MapKind::Glued {
                inner: Arc::new(inner.clone()),
                outer: Arc::new(outer.clone()),
                radius,
            },
            inner.r_lo,
            outer.r_max,
        ))
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MapKind::Rigid { .. } => "rigid",
            MapKind::Twist { .. } => "twist",
            MapKind::Hamiltonian(_) => "hamiltonian",
            MapKind::Generating(_) => "generating",
            MapKind::Conjugated { .. } => "conjugated",
            MapKind::Iterate { .. } => "iterate",
            MapKind::Restriction { .. } => "restriction",
            MapKind::Glued { .. } => "glued",
            MapKind::Inverse { .. } => "inverse",
        }
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Inner radius of the domain (0 for disc maps, positive for annulus maps).
    pub fn r_lo(&self) -> f64 {
        self.r_lo
    }

    pub fn is_disc_map(&self) -> bool {
        self.r_lo == 0.0
    }

    /// Boundary rotation parameter `theta0` when it is known in closed form.
    ///
    /// For Hamiltonian maps this is the rotation of the exact flow; the
    /// discrete time-one map follows it up to the integration error.
    pub fn theta0(&self) -> Option<f64> {
        self.theta0_at(self.r_max)
    }

    fn theta0_at(&self, radius: f64) -> Option<f64> {
        match &self.kind {
            MapKind::Rigid { theta0 } => Some(*theta0),
            MapKind::Twist { g } => Some(g.value(radius)),
            MapKind::Hamiltonian(flow) => flow.exact_circle_rotation(radius),
            MapKind::Iterate { map, n } => map.theta0_at(radius).map(|t| t * *n as f64),
            MapKind::Inverse { map } => map.theta0_at(radius).map(|t| -t),
            MapKind::Conjugated { map, psi, .. } => {
                psi.theta0_at(radius)?;
                map.theta0_at(radius)
            }
            MapKind::Restriction { map } => map.theta0_at(radius),
            MapKind::Glued {
                inner,
                outer,
                radius: glue,
            } => {
                if radius <= *glue {
                    inner.theta0_at(radius)
                } else {
                    outer.theta0_at(radius)
                }
            }
            MapKind::Generating(_) => None,
        }
    }

    /// Radii where the map is only finitely smooth (glue interfaces); quadrature splits there.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.kind {
            MapKind::Glued {
                inner,
                outer,
                radius,
            } => {
                let mut v = inner.radial_breakpoints();
                v.push(*radius);
                v.extend(outer.radial_breakpoints());
                v
            }
            MapKind::Restriction { map }
            | MapKind::Iterate { map, .. }
            | MapKind::Inverse { map } => map.radial_breakpoints(),
            MapKind::Conjugated { map, psi, .. } => {
                let mut v = map.radial_breakpoints();
                v.extend(psi.radial_breakpoints());
                v
            }
            MapKind::Generating(w) => w.breakpoints(),
            _ => Vec::new(),
        };
        out.retain(|&r| r > self.r_lo && r < self.r_max);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    fn check_domain(&self, r: f64, theta: f64) -> Result<()> {
        if !(r >= self.r_lo - DOMAIN_SLACK && r <= self.r_max + DOMAIN_SLACK) || !theta.is_finite() {
            return Err(Error::Domain {
                r,
                theta,
                r_max: self.r_max,
            });
        }
        Ok(())
    }

    /// Evaluate in lifted polar coordinates.
    pub fn eval(&self, p: PolarPoint) -> Result<PolarPoint> {
        self.check_domain(p.r, p.theta)?;
        match &self.kind {
            MapKind::Rigid { theta0 } => Ok(PolarPoint::new(p.r, p.theta + TAU * theta0)),
            MapKind::Twist { g } => Ok(PolarPoint::new(p.r, p.theta + TAU * g.value(p.r))),
            MapKind::Hamiltonian(flow) => {
                let s = flow.advance(p.to_cartesian(), p.theta, false)?;
                Ok(PolarPoint::new(s.end.norm(), s.angle))
            }
            MapKind::Generating(w) => generating::solve_map_point(w, p),
            MapKind::Conjugated { map, psi, psi_inv } => {
                let p1 = psi.eval(p)?;
                let p2 = map.eval(p1)?;
                psi_inv.eval(p2)
            }
            MapKind::Iterate { map, n } => (0..*n).try_fold(p, |q, _| map.eval(q)),
            MapKind::Restriction { map } => map.eval(p),
            MapKind::Glued {
                inner,
                outer,
                radius,
            } => {
                if p.r <= *radius {
                    inner.eval(p)
                } else {
                    outer.eval(p)
                }
            }
            MapKind::Inverse { map } => {
                let q = newton_inverse(map, p.to_cartesian())?;
                let base = PolarPoint::from_cartesian(q);
                let fwd = map.eval(base)?;
                let shift = ((p.theta - fwd.theta) / TAU).round();
                Ok(PolarPoint::new(base.r, base.theta + TAU * shift))
            }
        }
    }

    /// Evaluate in Cartesian coordinates.
    pub fn eval_cartesian(&self, z: Vector2<f64>) -> Result<Vector2<f64>> {
        let r = z.norm();
        self.check_domain(r, 0.0)?;
        match &self.kind {
            MapKind::Rigid { theta0 } => Ok(rotation(TAU * theta0) * z),
            MapKind::Twist { g } => Ok(rotation(TAU * g.value(r)) * z),
            MapKind::Hamiltonian(flow) => Ok(flow.advance(z, z.y.atan2(z.x), false)?.end),
            MapKind::Generating(_) => Ok(self.eval(PolarPoint::from_cartesian(z))?.to_cartesian()),
            MapKind::Conjugated { map, psi, psi_inv } => {
                psi_inv.eval_cartesian(map.eval_cartesian(psi.eval_cartesian(z)?)?)
            }
            MapKind::Iterate { map, n } => (0..*n).try_fold(z, |q, _| map.eval_cartesian(q)),
            MapKind::Restriction { map } => map.eval_cartesian(z),
            MapKind::Glued {
                inner,
                outer,
                radius,
            } => {
                if r <= *radius {
                    inner.eval_cartesian(z)
                } else {
                    outer.eval_cartesian(z)
                }
            }
            MapKind::Inverse { map } => newton_inverse(map, z),
        }
    }

    /// Image and Cartesian Jacobian at `z`.
    pub fn eval_with_jacobian(&self, z: Vector2<f64>) -> Result<(Vector2<f64>, Matrix2<f64>)> {
        let (q, j) = self.eval_polar_with_jacobian(PolarPoint::from_cartesian(z))?;
        Ok((q.to_cartesian(), j))
    }

    /// Lifted image of `p` together with the Cartesian Jacobian there.
    pub fn eval_polar_with_jacobian(&self, p: PolarPoint) -> Result<(PolarPoint, Matrix2<f64>)> {
        self.check_domain(p.r, p.theta)?;
        match &self.kind {
            MapKind::Rigid { theta0 } => {
                Ok((PolarPoint::new(p.r, p.theta + TAU * theta0), rotation(TAU * theta0)))
            }
            MapKind::Twist { g } => {
                let alpha = TAU * g.value(p.r);
                let q = PolarPoint::new(p.r, p.theta + alpha);
                // D(z e^{i alpha(|z|)}) = Rot(alpha) + alpha'(r) (i w) (z/r)^T with w the image
                let img = q.to_cartesian();
                let (c, s) = polar_basis(p.theta);
                let da = TAU * g.derivative(p.r);
                let extra = Vector2::new(-img.y, img.x) * Vector2::new(c, s).transpose() * da;
                Ok((q, rotation(alpha) + extra))
            }
            MapKind::Hamiltonian(flow) => {
                let s = flow.advance(p.to_cartesian(), p.theta, true)?;
                let j = s.jacobian.expect("tangent requested");
                Ok((PolarPoint::new(s.end.norm(), s.angle), j))
            }
            MapKind::Generating(_) => {
                let q = self.eval(p)?;
                Ok((q, self.fd_jacobian(p)?))
            }
            MapKind::Conjugated { map, psi, psi_inv } => {
                let (p1, j1) = psi.eval_polar_with_jacobian(p)?;
                let (p2, j2) = map.eval_polar_with_jacobian(p1)?;
                let (p3, j3) = psi_inv.eval_polar_with_jacobian(p2)?;
                Ok((p3, j3 * j2 * j1))
            }
            MapKind::Iterate { map, n } => {
                let mut q = p;
                let mut jac = Matrix2::identity();
                for _ in 0..*n {
                    let (next, j) = map.eval_polar_with_jacobian(q)?;
                    jac = j * jac;
                    q = next;
                }
                Ok((q, jac))
            }
            MapKind::Restriction { map } => map.eval_polar_with_jacobian(p),
            MapKind::Glued {
                inner,
                outer,
                radius,
            } => {
                if p.r <= *radius {
                    inner.eval_polar_with_jacobian(p)
                } else {
                    outer.eval_polar_with_jacobian(p)
                }
            }
            MapKind::Inverse { map } => {
                let q = self.eval(p)?;
                let (_, j) = map.eval_polar_with_jacobian(q)?;
                let inv = j.try_inverse().ok_or(Error::Inversion {
                    x: p.to_cartesian().x,
                    y: p.to_cartesian().y,
                    residual: f64::NAN,
                    iterations: 0,
                })?;
                Ok((q, inv))
            }
        }
    }

    /// Cartesian Jacobian by finite differences.
    ///
    /// Differences are taken in `(r, theta)` (one-sided in `r` at the edges
    /// of the domain) except within a few steps of the origin, where central
    /// Cartesian differences are used.
    pub fn fd_jacobian(&self, p: PolarPoint) -> Result<Matrix2<f64>> {
        let h = H_FD * self.r_max.max(1.0);
        if p.r < 4.0 * h && self.r_lo == 0.0 {
            let z = p.to_cartesian();
            let mut jac = Matrix2::zeros();
            for axis in 0..2 {
                let mut e = Vector2::zeros();
                e[axis] = h;
                let col = (self.eval_cartesian(z + e)? - self.eval_cartesian(z - e)?) / (2.0 * h);
                jac.set_column(axis, &col);
            }
            return Ok(jac);
        }
        let f = |r: f64, t: f64| -> Result<Vector2<f64>> {
            let q = self.eval(PolarPoint::new(r, t))?;
            Ok(Vector2::new(q.r, q.theta))
        };
        let d_theta = (f(p.r, p.theta + h)? - f(p.r, p.theta - h)?) / (2.0 * h);
        let d_r = if p.r - h >= self.r_lo - DOMAIN_SLACK && p.r + h <= self.r_max + DOMAIN_SLACK {
            (f(p.r + h, p.theta)? - f(p.r - h, p.theta)?) / (2.0 * h)
        } else if p.r - 2.0 * h >= self.r_lo - DOMAIN_SLACK {
            (3.0 * f(p.r, p.theta)? - 4.0 * f(p.r - h, p.theta)? + f(p.r - 2.0 * h, p.theta)?)
                / (2.0 * h)
        } else {
            (-3.0 * f(p.r, p.theta)? + 4.0 * f(p.r + h, p.theta)? - f(p.r + 2.0 * h, p.theta)?)
                / (2.0 * h)
        };
        let polar = Matrix2::new(d_r.x, d_theta.x, d_r.y, d_theta.y);
        let q = self.eval(p)?;
        // J_cart = B(q) J_polar B(p)^{-1}, B(p) = d(x, y)/d(r, theta)
        let (c, s) = polar_basis(p.theta);
        let (cc, ss) = polar_basis(q.theta);
        let b_out = Matrix2::new(cc, -q.r * ss, ss, q.r * cc);
        let b_in_inv = Matrix2::new(c, s, -s / p.r, c / p.r);
        Ok(b_out * polar * b_in_inv)
    }

    /// Cartesian Jacobian.
    pub fn cartesian_jacobian(&self, z: Vector2<f64>) -> Result<Matrix2<f64>> {
        Ok(self.eval_with_jacobian(z)?.1)
    }

    /// Jacobian `d(R, Theta)/d(r, theta)` of the lifted polar map.
    pub fn jacobian(&self, p: PolarPoint) -> Result<Matrix2<f64>> {
        self.check_domain(p.r, p.theta)?;
        match &self.kind {
            MapKind::Rigid { .. } => Ok(Matrix2::identity()),
            MapKind::Twist { g } => Ok(Matrix2::new(1.0, 0.0, TAU * g.derivative(p.r), 1.0)),
            _ => {
                if p.r == 0.0 {
                    return Err(Error::Domain {
                        r: 0.0,
                        theta: p.theta,
                        r_max: self.r_max,
                    });
                }
                let (q, j) = self.eval_polar_with_jacobian(p)?;
                polar_from_cartesian(&j, p, q)
            }
        }
    }

    /// Max of `|R det D - r| / r` over a polar grid (the defect of `Omega = r dr ^ dtheta`).
    pub fn check_area_preservation(&self, n_r: usize, n_theta: usize, tol: f64) -> Result<AreaReport> {
        if n_r < 4 || n_theta < 4 {
            return Err(Error::InvalidParameter("area check needs grids of at least 4x4".into()));
        }
        let mut worst = AreaReport {
            max_defect: 0.0,
            worst_point: PolarPoint::new(self.r_max, 0.0),
            pass: true,
        };
        let span = self.r_max - self.r_lo;
        for i in 0..n_r {
            let r = self.r_lo + span * (i + 1) as f64 / n_r as f64;
            for j in 0..n_theta {
                let p = PolarPoint::new(r, TAU * j as f64 / n_theta as f64);
                let d = self.jacobian(p)?;
                let img = self.eval(p)?;
                let defect = (img.r * d.determinant() - r).abs() / r;
                if defect > worst.max_defect || defect.is_nan() {
                    worst.max_defect = defect;
                    worst.worst_point = p;
                }
            }
        }
        worst.pass = worst.max_defect <= tol;
        Ok(worst)
    }

    /// Boundary rotation number. Closed form for kinds whose boundary
    /// rotation is known; otherwise the mean lifted displacement of `n`
    /// boundary iterates, compared against the estimate from `n / 2`.
    pub fn boundary_rotation_number(&self, n: usize, rot_tol: f64) -> Result<RotationEstimate> {
        if let Some(t) = self.theta0() {
            return Ok(RotationEstimate {
                value: t,
                half_value: t,
                analytic: true,
                converged: true,
            });
        }
        if let Some(t) = self.detect_rigid_boundary(1e-10)? {
            return Ok(RotationEstimate {
                value: t,
                half_value: t,
                analytic: false,
                converged: true,
            });
        }
        let n = n.max(2);
        let start = PolarPoint::new(self.r_max, 0.0);
        let mut p = start;
        let mut half = f64::NAN;
        for i in 1..=n {
            p = self.eval(p)?;
            p.r = self.r_max;
            if i == n / 2 {
                half = (p.theta - start.theta) / (TAU * i as f64);
            }
        }
        let value = (p.theta - start.theta) / (TAU * n as f64);
        Ok(RotationEstimate {
            value,
            half_value: half,
            analytic: false,
            converged: (value - half).abs() <= rot_tol,
        })
    }

    /// `Some(theta0)` if the boundary circle is moved by a rigid rotation
    /// (displacement constant within `tol` over 32 sample angles).
    pub fn detect_rigid_boundary(&self, tol: f64) -> Result<Option<f64>> {
        if let Some(t) = self.theta0() {
            return Ok(Some(t));
        }
        let n = 32;
        let mut disp = Vec::with_capacity(n);
        for j in 0..n {
            let th = TAU * j as f64 / n as f64;
            let q = self.eval(PolarPoint::new(self.r_max, th))?;
            if (q.r - self.r_max).abs() > tol {
                return Ok(None);
            }
            disp.push(q.theta - th);
        }
        let mean = disp.iter().sum::<f64>() / n as f64;
        let spread = disp.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max);
        Ok((spread <= tol).then_some(mean / TAU))
    }

    /// Largest `|R - r_max|` over boundary samples.
    pub fn boundary_drift(&self, n: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let q = self.eval(PolarPoint::new(self.r_max, TAU * j as f64 / n as f64))?;
            worst = worst.max((q.r - self.r_max).abs());
        }
        Ok(worst)
    }
}

pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Solve `map(q) = y` by damped Newton iteration seeded at `y`.
fn newton_inverse(map: &DiscMap, y: Vector2<f64>) -> Result<Vector2<f64>> {
    let clamp = |q: Vector2<f64>| {
        let r = q.norm();
        if r > map.r_max {
            q * (map.r_max / r)
        } else if r < map.r_lo {
            if r == 0.0 {
                Vector2::new(map.r_lo, 0.0)
            } else {
                q * (map.r_lo / r)
            }
        } else {
            q
        }
    };
    let mut q = clamp(y);
    let (mut img, mut jac) = map.eval_with_jacobian(q)?;
    let mut res = (img - y).norm();
    for it in 0..INV_MAX_ITER {
        if res <= INV_TOL {
            return Ok(q);
        }
        let step = jac.lu().solve(&(img - y)).ok_or(Error::Inversion {
            x: y.x,
            y: y.y,
            residual: res,
            iterations: it,
        })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cand = clamp(q - step * t);
            let (ci, cj) = map.eval_with_jacobian(cand)?;
            let cr = (ci - y).norm();
            if cr < res {
                q = cand;
                img = ci;
                jac = cj;
                res = cr;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res <= INV_TOL {
        Ok(q)
    } else {
        Err(Error::Inversion {
            x: y.x,
            y: y.y,
            residual: res,
            iterations: INV_MAX_ITER,
        })
    }
}

/// The lifted angle change `Theta - theta` at a point, continuous along paths avoiding the origin.
pub fn angular_displacement(map: &DiscMap, p: PolarPoint) -> Result<f64> {
    Ok(map.eval(p)?.theta - p.theta)
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn is<T: Send + Sync>() {}
    is::<DiscMap>();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Trig, TrigTerm};
    use std::f64::consts::PI;

    fn twist03() -> DiscMap {
        DiscMap::twist(RadialPolynomial::monomial(0.3, 2))
    }

    fn bump_psi() -> DiscMap {
        DiscMap::hamiltonian_time_one(
            Hamiltonian::Bump {
                center: [0.3, 0.1],
                radius: 0.45,
                amplitude: 0.05,
            },
            DEFAULT_STEPS,
        )
        .unwrap()
    }

    #[test]
    fn rigid_quarter_turn() {
        let q = DiscMap::rigid(0.25).eval(PolarPoint::new(0.5, 0.0)).unwrap();
        assert_eq!(q.r, 0.5);
        assert!((q.theta - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn twist_boundary_point() {
        let q = twist03().eval(PolarPoint::new(1.0, 1.0)).unwrap();
        assert_eq!(q.r, 1.0);
        assert!((q.theta - (1.0 + 0.6 * PI)).abs() < 1e-14);
    }

    #[test]
    fn outside_domain_is_an_error() {
        let err = twist03().eval(PolarPoint::new(1.1, 0.0));
        assert!(matches!(err, Err(Error::Domain { .. })));
        assert!(twist03().eval_cartesian(Vector2::new(0.0, -1.5)).is_err());
    }

    #[test]
    fn deck_equivariance_for_all_kinds() {
        let maps = vec![
            DiscMap::rigid(0.37),
            twist03(),
            bump_psi(),
            twist03().conjugate(&bump_psi()).unwrap(),
            twist03().iterate(3).unwrap(),
        ];
        for m in maps {
            for &(r, th) in &[(0.2, 0.3), (0.7, -2.0), (1.0, 4.0), (0.0015, 1.0)] {
                let a = m.eval(PolarPoint::new(r, th)).unwrap();
                let b = m.eval(PolarPoint::new(r, th + TAU)).unwrap();
                assert!((b.r - a.r).abs() < 1e-12, "{}", m.kind_name());
                assert!((b.theta - a.theta - TAU).abs() < 1e-10, "{}", m.kind_name());
            }
        }
    }

    #[test]
    fn polar_and_cartesian_agree() {
        let m = twist03().conjugate(&bump_psi()).unwrap();
        for &(r, th) in &[(0.1, 0.3), (0.5, 2.0), (0.95, -1.0)] {
            let p = PolarPoint::new(r, th);
            let q = m.eval(p).unwrap().to_cartesian();
            let z = m.eval_cartesian(p.to_cartesian()).unwrap();
            assert!((q - z).norm() < 1e-12);
        }
    }

    #[test]
    fn rigid_and_twist_polar_jacobians() {
        let p = PolarPoint::new(0.6, 1.1);
        assert_eq!(DiscMap::rigid(0.4).jacobian(p).unwrap(), Matrix2::identity());
        let j = twist03().jacobian(p).unwrap();
        assert_eq!(j, Matrix2::new(1.0, 0.0, TAU * 0.6 * 0.6, 1.0));
    }

    #[test]
    fn converted_jacobian_matches_analytic_twist() {
        let m = twist03();
        let p = PolarPoint::new(0.6, 1.1);
        let (img, j) = m.eval_with_jacobian(p.to_cartesian()).unwrap();
        let conv = polar_from_cartesian(&j, p, PolarPoint::from_cartesian(img)).unwrap();
        assert!((conv - m.jacobian(p).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn hamiltonian_jacobian_matches_finite_differences() {
        let m = DiscMap::hamiltonian_time_one(
            Hamiltonian::TrigPoly {
                terms: vec![
                    TrigTerm::new(0.1, 1, 1, Trig::Cos),
                    TrigTerm::new(-0.1, 3, 1, Trig::Cos),
                ],
            },
            DEFAULT_STEPS,
        )
        .unwrap();
        for &(x, y) in &[(0.2, 0.1), (-0.5, 0.4), (0.0, -0.8)] {
            let z = Vector2::new(x, y);
            let analytic = m.cartesian_jacobian(z).unwrap();
            let fd = m.fd_jacobian(PolarPoint::from_cartesian(z)).unwrap();
            assert!((analytic - fd).abs().max() < 1e-6);
        }
    }

    #[test]
    fn area_preservation_reports() {
        let r = DiscMap::rigid(0.25).check_area_preservation(32, 32, 1e-12).unwrap();
        assert_eq!(r.max_defect, 0.0);
        let t = twist03().check_area_preservation(32, 32, 1e-12).unwrap();
        assert!(t.pass && t.max_defect <= 1e-12);
        let h = DiscMap::hamiltonian_time_one(
            Hamiltonian::TrigPoly {
                terms: vec![
                    TrigTerm::new(0.1, 1, 1, Trig::Cos),
                    TrigTerm::new(-0.1, 3, 1, Trig::Cos),
                ],
            },
            DEFAULT_STEPS,
        )
        .unwrap();
        let rep = h.check_area_preservation(16, 16, 1e-8).unwrap();
        assert!(rep.pass, "defect {}", rep.max_defect);
        assert!(DiscMap::rigid(0.1).check_area_preservation(3, 8, 1e-8).is_err());
    }

    #[test]
    fn hamiltonian_zero_and_rotation() {
        let id = DiscMap::hamiltonian_time_one(Hamiltonian::zero(), 10).unwrap();
        let p = PolarPoint::new(0.4, 0.7);
        assert_eq!(id.eval(p).unwrap(), p);
        let c = 0.9;
        let rot = DiscMap::hamiltonian_time_one(
            Hamiltonian::TrigPoly {
                terms: vec![TrigTerm::new(0.5 * c, 2, 0, Trig::Cos)],
            },
            DEFAULT_STEPS,
        )
        .unwrap();
        let q = rot.eval(p).unwrap();
        assert!((q.r - 0.4).abs() < 1e-14);
        assert!((q.theta - (0.7 + c)).abs() < 1e-9);
    }

    #[test]
    fn ring_bump_is_identity_outside_support() {
        let m = DiscMap::hamiltonian_time_one(
            Hamiltonian::Ring {
                inner: 0.2,
                outer: 0.8,
                amplitude: 0.2,
            },
            DEFAULT_STEPS,
        )
        .unwrap();
        for &r in &[0.05, 0.19, 0.81, 0.99] {
            let p = PolarPoint::new(r, 0.4);
            let q = m.eval(p).unwrap();
            assert!((q.r - r).abs() < 1e-15 && (q.theta - 0.4).abs() < 1e-15);
        }
        let moved = m.eval(PolarPoint::new(0.5, 0.4)).unwrap();
        assert!((moved.theta - 0.4).abs() > 1e-3);
    }

    #[test]
    fn non_constant_boundary_hamiltonian_rejected() {
        let h = Hamiltonian::TrigPoly {
            terms: vec![TrigTerm::new(0.1, 1, 1, Trig::Cos)],
        };
        assert!(DiscMap::hamiltonian_time_one(h, 10).is_err());
    }

    #[test]
    fn iterates_compose() {
        let m = twist03().conjugate(&bump_psi()).unwrap();
        let p = PolarPoint::new(0.45, 0.8);
        let a = m.iterate(5).unwrap().eval(p).unwrap();
        let b = m.iterate(2).unwrap().eval(m.iterate(3).unwrap().eval(p).unwrap()).unwrap();
        assert!((a.r - b.r).abs() < 1e-10 && (a.theta - b.theta).abs() < 1e-10);
        let r2 = DiscMap::rigid(0.25).iterate(2).unwrap();
        let q = r2.eval(PolarPoint::new(0.3, 0.0)).unwrap();
        assert!((q.theta - PI).abs() < 1e-15);
        assert_eq!(r2.theta0(), Some(0.5));
    }

    #[test]
    fn conjugation_round_trip() {
        let psi = bump_psi();
        let m = twist03();
        let back = m.conjugate(&psi).unwrap().conjugate(&psi.inverse()).unwrap();
        for &(r, th) in &[(0.3, 0.1), (0.6, 2.5), (0.9, -1.0)] {
            let p = PolarPoint::new(r, th);
            let a = m.eval(p).unwrap();
            let b = back.eval(p).unwrap();
            assert!((a.r - b.r).abs() < 1e-8 && (a.theta - b.theta).abs() < 1e-8);
        }
    }

    #[test]
    fn newton_inverse_of_generic_map() {
        let m = twist03().conjugate(&bump_psi()).unwrap();
        let inv = DiscMap::with_kind(MapKind::Inverse { map: Arc::new(m.clone()) }, 0.0, 1.0);
        let p = PolarPoint::new(0.55, 2.0);
        let q = m.eval(p).unwrap();
        let back = inv.eval(q).unwrap();
        assert!((back.r - p.r).abs() < 1e-10);
        assert!((back.theta - p.theta).abs() < 1e-10);
    }

    #[test]
    fn rotation_numbers() {
        assert_eq!(DiscMap::rigid(0.25).boundary_rotation_number(10, 1e-6).unwrap().value, 0.25);
        assert!((twist03().boundary_rotation_number(10, 1e-6).unwrap().value - 0.3).abs() < 1e-15);
    }
}
