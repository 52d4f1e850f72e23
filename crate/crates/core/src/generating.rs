//! Generating functions `W(R, theta)` of annulus maps in the mixed
//! coordinates `(R, theta)`, where `(R, Theta)` is the image of `(r, theta)`.
//!
//! `W` is a potential of `lambda = ((R^2 - r^2)/2) dtheta + R (theta - Theta) dR`,
//! so `D1 W = R (theta - Theta)` and `D2 W = (R^2 - r^2)/2`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::Vector2;

use crate::action::pullback_defect;
use crate::disc_map::{DiscMap, PolarPoint, DOMAIN_SLACK};
use crate::error::{Error, Result};
use crate::fields::TrigTerm;
use crate::numerics::fourier::TrigInterpolant;
use crate::numerics::quadrature::adaptive;
use crate::numerics::smooth::transition;
use crate::numerics::wrap_angle;

/// Absolute tolerance for each segment of the `lambda` line integral.
pub const LAMBDA_TOL: f64 = 1e-10;
const ROOT_TOL: f64 = 1e-14;
const ROOT_MAX_ITER: usize = 100;
const CONSISTENCY_TOL: f64 = 1e-6;
/// Endpoint residuals this small count as roots: a root that far outside the
/// domain comes from roundoff or flow error at a glued edge.
const SIGN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum GeneratingKind {
    /// `sum c R^k cos/sin(m theta)`.
    Polynomial { terms: Vec<TrigTerm> },
    /// Potential of `lambda` for a given map, by line integration.
    FromMap { map: Arc<DiscMap> },
    /// `inner` for `R < 1`, `-pi theta0 R^2` from `R = 1` on; the two agree at `R = 1` to the matching tolerance.
    Extended {
        inner: Arc<GeneratingFunction>,
        theta0: f64,
    },
    /// Smooth blend of the second-order continuation of `inner` past `R = 1`
    /// into `-pi theta0 R^2`, across the collar `[1, 1 + 1/(n+1)]`.
    Smoothed {
        inner: Arc<GeneratingFunction>,
        theta0: f64,
        n: usize,
        /// `D11 W(1, theta)` of the inner function.
        kappa: TrigInterpolant,
    },
}

/// A generating function on `r_lo <= R <= r_hi` (all angles).
#[derive(Debug, Clone)]
pub struct GeneratingFunction {
    kind: GeneratingKind,
    r_lo: f64,
    r_hi: f64,
    anchor_constant: f64,
}

/// Values of the rigid generator `-pi theta0 R^2` and its `R`-derivative.
fn rigid_generator(theta0: f64, r: f64) -> (f64, f64) {
    (-PI * theta0 * r * r, -TAU * theta0 * r)
}

impl GeneratingFunction {
    pub fn polynomial(terms: Vec<TrigTerm>, r_lo: f64, r_hi: f64) -> Result<Self> {
        if !(r_lo >= 0.0 && r_hi > r_lo) {
            return Err(Error::InvalidParameter(format!("bad radial interval [{r_lo}, {r_hi}]")));
        }
        Ok(Self {
            kind: GeneratingKind::Polynomial { terms },
            r_lo,
            r_hi,
            anchor_constant: 0.0,
        })
    }

    /// `-pi theta0 R^2`, the generator of the rotation by `2 pi theta0`.
    pub fn rigid(theta0: f64, r_lo: f64, r_hi: f64) -> Result<Self> {
        Self::polynomial(
            vec![TrigTerm::new(-PI * theta0, 2, 0, crate::fields::Trig::Cos)],
            r_lo,
            r_hi,
        )
    }

    pub(crate) fn extended(inner: &GeneratingFunction, theta0: f64) -> Self {
        Self {
            kind: GeneratingKind::Extended {
                inner: Arc::new(inner.clone()),
                theta0,
            },
            r_lo: inner.r_lo,
            r_hi: 2.0,
            anchor_constant: 0.0,
        }
    }

    pub(crate) fn smoothed(inner: &GeneratingFunction, theta0: f64, n: usize, kappa: TrigInterpolant) -> Self {
        Self {
            kind: GeneratingKind::Smoothed {
                inner: Arc::new(inner.clone()),
                theta0,
                n,
                kappa,
            },
            r_lo: inner.r_lo,
            r_hi: 2.0,
            anchor_constant: 0.0,
        }
    }

    pub fn kind(&self) -> &GeneratingKind {
        &self.kind
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.r_lo, self.r_hi)
    }

    pub fn anchor_constant(&self) -> f64 {
        self.anchor_constant
    }

    /// The same function with a different additive constant.
    pub fn with_anchor(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.anchor_constant = c;
        out
    }

    /// The same function restricted to a smaller radial interval.
    pub fn with_domain(&self, r_lo: f64, r_hi: f64) -> Self {
        let mut out = self.clone();
        out.r_lo = r_lo;
        out.r_hi = r_hi;
        out
    }

    /// Map the function was built from, if any.
    pub fn source_map(&self) -> Option<&DiscMap> {
        match &self.kind {
            GeneratingKind::FromMap { map } => Some(map),
            GeneratingKind::Extended { inner, .. } | GeneratingKind::Smoothed { inner, .. } => {
                inner.source_map()
            }
            GeneratingKind::Polynomial { .. } => None,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            GeneratingKind::Extended { .. } => vec![1.0],
            GeneratingKind::Smoothed { n, .. } => vec![1.0, 1.0 + 1.0 / (*n as f64 + 1.0)],
            _ => Vec::new(),
        }
    }

    /// End of the blending collar, for smoothed functions.
    pub fn collar_end(&self) -> Option<f64> {
        match &self.kind {
            GeneratingKind::Smoothed { n, .. } => Some(1.0 + 1.0 / (*n as f64 + 1.0)),
            _ => None,
        }
    }

    pub fn value(&self, big_r: f64, theta: f64) -> Result<f64> {
        Ok(self.anchor_constant + self.raw_value(big_r, theta)?)
    }

    /// `(D1 W, D2 W)` at `(R, theta)`.
    pub fn gradient(&self, big_r: f64, theta: f64) -> Result<(f64, f64)> {
        match &self.kind {
            GeneratingKind::Polynomial { terms } => Ok(terms.iter().fold((0.0, 0.0), |acc, t| {
                let g = t.grad_polar(big_r, theta);
                (acc.0 + g.0, acc.1 + g.1)
            })),
            GeneratingKind::FromMap { map } => {
                let (r, q) = preimage_radius(map, big_r, theta)?;
                Ok((big_r * (theta - q.theta), 0.5 * (big_r * big_r - r * r)))
            }
            GeneratingKind::Extended { inner, theta0 } => {
                if big_r < 1.0 {
                    inner.gradient(big_r, theta)
                } else {
                    Ok((rigid_generator(*theta0, big_r).1, 0.0))
                }
            }
            GeneratingKind::Smoothed { inner, .. } if big_r < 1.0 => inner.gradient(big_r, theta),
            GeneratingKind::Smoothed { .. } => {
                let (_, d1, d2) = self.smoothed_jet(big_r, theta)?;
                Ok((d1, d2))
            }
        }
    }

    pub fn d1(&self, big_r: f64, theta: f64) -> Result<f64> {
        Ok(self.gradient(big_r, theta)?.0)
    }

    pub fn d2(&self, big_r: f64, theta: f64) -> Result<f64> {
        Ok(self.gradient(big_r, theta)?.1)
    }

    fn raw_value(&self, big_r: f64, theta: f64) -> Result<f64> {
        match &self.kind {
            GeneratingKind::Polynomial { terms } => {
                Ok(terms.iter().map(|t| t.value_polar(big_r, theta)).sum())
            }
            GeneratingKind::FromMap { map } => lambda_potential(map, self.r_hi, big_r, theta),
            GeneratingKind::Extended { inner, theta0 } => {
                if big_r < 1.0 {
                    inner.value(big_r, theta)
                } else {
                    Ok(rigid_generator(*theta0, big_r).0)
                }
            }
            GeneratingKind::Smoothed { .. } => Ok(self.smoothed_jet(big_r, theta)?.0),
        }
    }

    /// `(W, D1 W, D2 W)` of a smoothed function.
    fn smoothed_jet(&self, big_r: f64, theta: f64) -> Result<(f64, f64, f64)> {
        let GeneratingKind::Smoothed {
            inner,
            theta0,
            n,
            kappa,
        } = &self.kind
        else {
            unreachable!("smoothed_jet on a non-smoothed function")
        };
        if big_r < 1.0 {
            let (d1, d2) = inner.gradient(big_r, theta)?;
            return Ok((inner.value(big_r, theta)?, d1, d2));
        }
        let delta = 1.0 / (*n as f64 + 1.0);
        let t = big_r - 1.0;
        let (v, v1) = rigid_generator(*theta0, big_r);
        if t >= delta {
            return Ok((v, v1, 0.0));
        }
        let k = kappa.eval(theta);
        let e = -PI * theta0 - TAU * theta0 * t + 0.5 * k * t * t;
        let e1 = -TAU * theta0 + k * t;
        let e2 = 0.5 * kappa.derivative(theta) * t * t;
        let chi = transition(t / delta);
        let chi1 = chi.d1 / delta;
        let w = chi.v * v + (1.0 - chi.v) * e;
        let w1 = chi.v * v1 + (1.0 - chi.v) * e1 + chi1 * (v - e);
        let w2 = (1.0 - chi.v) * e2;
        Ok((w, w1, w2))
    }

    /// `D12 W` of a smoothed function on its collar (zero beyond it), in closed form.
    pub(crate) fn collar_d12(&self, big_r: f64, theta: f64) -> Option<f64> {
        let GeneratingKind::Smoothed { n, kappa, .. } = &self.kind else {
            return None;
        };
        let delta = 1.0 / (*n as f64 + 1.0);
        let t = big_r - 1.0;
        if !(0.0..delta).contains(&t) {
            return Some(0.0);
        }
        let dk = kappa.derivative(theta);
        let chi = transition(t / delta);
        Some(-chi.d1 / delta * 0.5 * dk * t * t + (1.0 - chi.v) * dk * t)
    }

    /// `D11 W(1, theta)` seen from inside `R <= 1`.
    pub fn d11_at_unit_circle(&self, theta: f64) -> Result<f64> {
        match &self.kind {
            GeneratingKind::FromMap { map } => {
                // d/dR [R (theta - Theta)] = (theta - Theta) - R Theta_r / R_r
                let p = PolarPoint::new(1.0, theta);
                let (q, j) = map.eval_polar_with_jacobian(p)?;
                let jp = crate::disc_map::polar_from_cartesian(&j, p, q)?;
                Ok((theta - q.theta) - jp[(1, 0)] / jp[(0, 0)])
            }
            _ => {
                let h = 1e-4;
                let d = |r: f64| self.d1(r, theta);
                Ok((3.0 * d(1.0)? - 4.0 * d(1.0 - h)? + d(1.0 - 2.0 * h)?) / (2.0 * h))
            }
        }
    }
}

/// Solve `R(r, theta) = big_r` for `r` by Newton iteration safeguarded by bisection.
fn preimage_radius(map: &DiscMap, big_r: f64, theta: f64) -> Result<(f64, PolarPoint)> {
    // The bracket reaches into the domain slack so that radii lost to
    // boundary drift of a numerical flow still have a preimage.
    let (mut lo, mut hi) = (map.r_lo(), map.r_max() + 0.5 * DOMAIN_SLACK);
    let mut r = big_r.clamp(lo, hi);
    let fail = |reason: String| Error::GeneratingSolve {
        r: big_r,
        theta,
        reason,
    };
    let mut last = None;
    for _ in 0..ROOT_MAX_ITER {
        let p = PolarPoint::new(r, theta);
        let (q, j) = map.eval_polar_with_jacobian(p)?;
        let g = q.r - big_r;
        last = Some((r, q, g));
        if g.abs() <= ROOT_TOL * big_r.max(1.0) {
            return Ok((r, q));
        }
        if g > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let (s, c) = p.theta.sin_cos();
        let slope = if q.r > 0.0 {
            (q.to_cartesian() / q.r).dot(&(j * Vector2::new(c, s)))
        } else {
            f64::NAN
        };
        let newton = r - g / slope;
        r = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    match last {
        Some((r, q, g)) if g.abs() <= 1e-11 => Ok((r, q)),
        Some((_, _, g)) => Err(fail(format!(
            "no preimage radius in [{}, {}] (residual {g:e})",
            map.r_lo(),
            map.r_max()
        ))),
        None => Err(fail("no iterations".into())),
    }
}

/// `lambda` in `(R, theta)` coordinates.
fn lambda(map: &DiscMap, big_r: f64, theta: f64) -> Result<(f64, f64)> {
    let (r, q) = preimage_radius(map, big_r, theta)?;
    Ok((big_r * (theta - q.theta), 0.5 * (big_r * big_r - r * r)))
}

/// Line integral of `lambda` from `(r_anchor, 0)` radially to `(R, 0)`, then
/// along the circle of radius `R` to `theta` (reduced to `(-pi, pi]`).
fn lambda_potential(map: &DiscMap, r_anchor: f64, big_r: f64, theta: f64) -> Result<f64> {
    let radial = adaptive(|s| Ok(lambda(map, s, 0.0)?.0), r_anchor, big_r, LAMBDA_TOL)?;
    let t = wrap_angle(theta);
    let angular = adaptive(|u| Ok(lambda(map, big_r, u)?.1), 0.0, t, LAMBDA_TOL)?;
    Ok(radial + angular)
}

/// Generating function of `map` on the annulus `r_lo <= r <= r_hi`, with `W(r_hi, 0) = 0`.
///
/// Fails with [`Error::TwistCondition`] if `dR/dr` is not positive on a 16 x 32 grid.
pub fn generating_from_map(map: &DiscMap, r_lo: f64, r_hi: f64) -> Result<GeneratingFunction> {
    if !(r_lo >= map.r_lo() && r_hi <= map.r_max() + 1e-12 && r_hi > r_lo) {
        return Err(Error::InvalidParameter(format!(
            "annulus [{r_lo}, {r_hi}] not inside the map domain [{}, {}]",
            map.r_lo(),
            map.r_max()
        )));
    }
    let (nr, nt) = (16, 32);
    let mut worst = (f64::INFINITY, 0.0, 0.0);
    for i in 0..nr {
        let r = r_lo + (r_hi - r_lo) * i as f64 / (nr - 1) as f64;
        if r == 0.0 {
            continue;
        }
        for j in 0..nt {
            let th = TAU * j as f64 / nt as f64;
            let d = map.jacobian(PolarPoint::new(r, th))?[(0, 0)];
            if d < worst.0 {
                worst = (d, r, th);
            }
        }
    }
    if !(worst.0 > 0.0) {
        return Err(Error::TwistCondition {
            r: worst.1,
            theta: worst.2,
            value: worst.0,
        });
    }
    Ok(GeneratingFunction {
        kind: GeneratingKind::FromMap {
            map: Arc::new(map.clone()),
        },
        r_lo,
        r_hi,
        anchor_constant: 0.0,
    })
}

/// The map generated by `w`: `D2 W(R, theta) = (R^2 - r^2)/2` solved for `R`,
/// then `Theta = theta - D1 W(R, theta) / R`.
pub fn map_from_generating(w: &GeneratingFunction) -> DiscMap {
    DiscMap::generating(w.clone())
}

pub(crate) fn solve_map_point(w: &GeneratingFunction, p: PolarPoint) -> Result<PolarPoint> {
    let (r_lo, r_hi) = w.domain();
    let fail = |reason: String| Error::GeneratingSolve {
        r: p.r,
        theta: p.theta,
        reason,
    };
    let f = |big_r: f64| -> Result<f64> { Ok(w.d2(big_r, p.theta)? - 0.5 * (big_r * big_r - p.r * p.r)) };
    let (mut lo, mut hi) = (r_lo, r_hi);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo < -SIGN_SLACK || f_hi > SIGN_SLACK {
        return Err(fail(format!(
            "D2 W - (R^2 - r^2)/2 does not change sign on [{r_lo}, {r_hi}] ({f_lo:e}, {f_hi:e})"
        )));
    }
    let big_r = if f_lo <= 0.0 {
        lo
    } else if f_hi >= 0.0 {
        hi
    } else {
        let mut x = p.r.clamp(lo, hi);
        let mut found = None;
        for _ in 0..ROOT_MAX_ITER {
            let fx = f(x)?;
            if fx.abs() <= ROOT_TOL * x.max(1.0) {
                found = Some(x);
                break;
            }
            if fx > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let h = 1e-7 * x.max(1.0);
            let slope = (f((x + h).min(r_hi))? - f((x - h).max(r_lo))?) / ((x + h).min(r_hi) - (x - h).max(r_lo));
            let newton = x - fx / slope;
            x = if slope < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi.max(1.0) {
                found = Some(x);
                break;
            }
        }
        found.ok_or_else(|| fail("root iteration did not converge".into()))?
    };
    if big_r <= 0.0 {
        return Ok(PolarPoint::new(0.0, p.theta));
    }
    let d1 = w.d1(big_r, p.theta)?;
    Ok(PolarPoint::new(big_r, p.theta - d1 / big_r))
}

/// The action `Sigma = W(R, theta) + R^2 (Theta - theta) / 2` of a map with generating function `W`.
#[derive(Debug, Clone)]
pub struct GeneratingAction {
    w: GeneratingFunction,
    map: DiscMap,
}

impl GeneratingAction {
    pub fn eval(&self, p: PolarPoint) -> Result<f64> {
        let q = self.map.eval(p)?;
        Ok(self.w.value(q.r, p.theta)? + 0.5 * q.r * q.r * (q.theta - p.theta))
    }

    pub fn generating_function(&self) -> &GeneratingFunction {
        &self.w
    }

    pub fn map(&self) -> &DiscMap {
        &self.map
    }

    /// Largest componentwise gap between `d Sigma` (five-point differences)
    /// and the pullback defect of the map, over the given points.
    pub fn differential_gap(&self, points: &[PolarPoint]) -> Result<f64> {
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        for &p in points {
            let stencil = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
                Ok((f(-2.0 * h)? - 8.0 * f(-h)? + 8.0 * f(h)? - f(2.0 * h)?) / (12.0 * h))
            };
            let d_r = stencil(&|s| self.eval(PolarPoint::new(p.r + s, p.theta)))?;
            let d_t = stencil(&|s| self.eval(PolarPoint::new(p.r, p.theta + s)))?;
            let c = pullback_defect(&self.map, p)?;
            worst = worst.max((d_r - c.dr).abs()).max((d_t - c.dtheta).abs());
        }
        Ok(worst)
    }
}

/// `Sigma` for `map`, checked against the pullback defect at interior points of `w`'s annulus.
pub fn action_from_generating(w: &GeneratingFunction, map: &DiscMap) -> Result<GeneratingAction> {
    let act = GeneratingAction {
        w: w.clone(),
        map: map.clone(),
    };
    let (lo, hi) = w.domain();
    let pts: Vec<PolarPoint> = [(0.35, 0.4), (0.65, 2.5)]
        .iter()
        .map(|&(s, th)| PolarPoint::new(lo + s * (hi - lo), th))
        .collect();
    let gap = act.differential_gap(&pts)?;
    if !(gap <= CONSISTENCY_TOL) {
        return Err(Error::Consistency(format!(
            "d Sigma differs from the pullback defect by {gap:e}; W does not generate this map"
        )));
    }
    Ok(act)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{RadialPolynomial, Trig};

    fn twist03() -> DiscMap {
        DiscMap::twist(RadialPolynomial::monomial(0.3, 2))
    }

    #[test]
    fn rigid_generator_gives_rotation() {
        let theta0 = 0.17;
        let w = GeneratingFunction::rigid(theta0, 0.5, 1.0).unwrap();
        let m = map_from_generating(&w);
        let q = m.eval(PolarPoint::new(0.7, 0.3)).unwrap();
        assert!((q.r - 0.7).abs() < 1e-14);
        assert!((q.theta - 0.3 - TAU * theta0).abs() < 1e-13);
    }

    #[test]
    fn generating_function_of_rigid_rotation() {
        let theta0 = 0.23;
        let w = generating_from_map(&DiscMap::rigid(theta0), 0.5, 1.0).unwrap();
        for &(big_r, th) in &[(0.5, 0.0), (0.8, 1.3), (0.95, -2.0)] {
            let exact = -PI * theta0 * (big_r * big_r - 1.0);
            assert!((w.value(big_r, th).unwrap() - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn generating_function_of_twist() {
        let w = generating_from_map(&twist03(), 0.5, 1.0).unwrap();
        for &(big_r, th) in &[(0.5f64, 0.0), (0.7, 2.0), (0.9, -1.0)] {
            let exact = -0.15 * PI * (big_r.powi(4) - 1.0);
            assert!((w.value(big_r, th).unwrap() - exact).abs() < 1e-9);
            assert!(w.d2(big_r, th).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn twist_round_trip() {
        let m = twist03();
        let w = generating_from_map(&m, 0.5, 1.0).unwrap();
        let back = map_from_generating(&w);
        for &(r, th) in &[(0.55, 0.1), (0.75, 3.0), (0.99, -0.5)] {
            let p = PolarPoint::new(r, th);
            let a = m.eval(p).unwrap();
            let b = back.eval(p).unwrap();
            assert!((a.r - b.r).abs() < 1e-8 && (a.theta - b.theta).abs() < 1e-8);
        }
    }

    #[test]
    fn twist_sigma_matches_closed_form_action() {
        let m = twist03();
        let w = generating_from_map(&m, 0.5, 1.0).unwrap().with_anchor(-0.3 * PI);
        let sigma = action_from_generating(&w, &m).unwrap();
        for &(r, th) in &[(0.5f64, 0.2), (0.8, 1.0), (1.0, 5.0)] {
            let exact = -0.15 * PI * (1.0 - r.powi(4));
            assert!((sigma.eval(PolarPoint::new(r, th)).unwrap() - exact).abs() < 1e-9);
        }
    }

    #[test]
    fn inconsistent_pair_is_rejected() {
        let w = GeneratingFunction::rigid(0.1, 0.5, 1.0).unwrap();
        assert!(matches!(
            action_from_generating(&w, &twist03()),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn polynomial_mixed_partials_agree() {
        let w = GeneratingFunction::polynomial(
            vec![
                TrigTerm::new(-0.4, 2, 0, Trig::Cos),
                TrigTerm::new(0.01, 3, 1, Trig::Sin),
            ],
            0.5,
            1.0,
        )
        .unwrap();
        let (big_r, th, h) = (0.8, 0.7, 1e-5);
        let d12 = (w.d1(big_r, th + h).unwrap() - w.d1(big_r, th - h).unwrap()) / (2.0 * h);
        let d21 = (w.d2(big_r + h, th).unwrap() - w.d2(big_r - h, th).unwrap()) / (2.0 * h);
        assert!((d12 - d21).abs() < 1e-6);
    }

    #[test]
    fn twist_condition_violation_is_reported() {
        // A fold: R decreases with r somewhere on the annulus.
        let fold = DiscMap::hamiltonian_time_one(
            crate::disc_map::Hamiltonian::TrigPoly {
                terms: vec![
                    TrigTerm::new(3.0, 3, 1, Trig::Cos),
                    TrigTerm::new(-3.0, 5, 1, Trig::Cos),
                ],
            },
            100,
        )
        .unwrap();
        assert!(matches!(
            generating_from_map(&fold, 0.3, 1.0),
            Err(Error::TwistCondition { .. })
        ));
    }

    #[test]
    fn lambda_has_no_period_on_circles() {
        let w = generating_from_map(&twist03(), 0.5, 1.0).unwrap();
        let GeneratingKind::FromMap { map } = w.kind() else { unreachable!() };
        let loop_integral = adaptive(|u| Ok(lambda(map, 0.7, u)?.1), 0.0, TAU, 1e-12).unwrap();
        assert!(loop_integral.abs() < 1e-12);
    }
}
