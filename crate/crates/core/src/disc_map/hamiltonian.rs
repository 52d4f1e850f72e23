//! Planar Hamiltonians and their time-one maps.
//!
//! The flow convention is `x' = -dH/dy, y' = dH/dx`, so `H = c r^2 / 2`
//! generates the counter-clockwise rotation by angle `c t`.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Jet2, TrigTerm};
use crate::numerics::{smooth, wrap_angle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Hamiltonian {
    /// Finite sum of smooth trigonometric monomials `c r^k cos/sin(m theta)`.
    TrigPoly { terms: Vec<TrigTerm> },
    /// `amplitude * bump(|z - center|^2 / radius^2)`, compactly supported.
    Bump {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
    },
    /// Radial bump supported in `inner < r < outer`.
    Ring {
        inner: f64,
        outer: f64,
        amplitude: f64,
    },
    /// `inner * chi(r)` with `chi = 0` on `r <= delta` and `chi = 1` on `r >= 2 delta`.
    CutOff {
        inner: Box<Hamiltonian>,
        delta: f64,
    },
    Sum { parts: Vec<Hamiltonian> },
}

impl Hamiltonian {
    pub fn zero() -> Self {
        Hamiltonian::TrigPoly { terms: Vec::new() }
    }

    pub fn jet(&self, z: Vector2<f64>) -> Jet2 {
        match self {
            Hamiltonian::TrigPoly { terms } => terms
                .iter()
                .fold(Jet2::zero(), |acc, t| acc + t.jet_cartesian(z)),
            Hamiltonian::Bump {
                center,
                radius,
                amplitude,
            } => {
                let d = z - Vector2::new(center[0], center[1]);
                let r2 = radius * radius;
                let b = smooth::bump(d.norm_squared() / r2);
                Jet2::of_squared_distance(
                    d,
                    amplitude * b.v,
                    amplitude * b.d1 / r2,
                    amplitude * b.d2 / (r2 * r2),
                )
            }
            Hamiltonian::Ring {
                inner,
                outer,
                amplitude,
            } => {
                let w = smooth::window(z.norm_squared(), inner * inner, outer * outer);
                Jet2::of_squared_distance(z, amplitude * w.v, amplitude * w.d1, amplitude * w.d2)
            }
            Hamiltonian::CutOff { inner, delta } => {
                let d2 = delta * delta;
                let span = 3.0 * d2;
                let t = smooth::transition((z.norm_squared() - d2) / span);
                let chi = Jet2::of_squared_distance(z, t.v, t.d1 / span, t.d2 / (span * span));
                inner.jet(z) * chi
            }
            Hamiltonian::Sum { parts } => parts
                .iter()
                .fold(Jet2::zero(), |acc, h| acc + h.jet(z)),
        }
    }

    pub fn value(&self, z: Vector2<f64>) -> f64 {
        self.jet(z).v
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hamiltonian::TrigPoly { terms } => {
                if let Some(t) = terms.iter().find(|t| !t.is_smooth()) {
                    return Err(Error::InvalidParameter(format!(
                        "term r^{} trig({} theta) is not smooth at the origin (need k >= m and k - m even)",
                        t.k, t.m
                    )));
                }
                Ok(())
            }
            Hamiltonian::Bump { radius, .. } if *radius <= 0.0 => {
                Err(Error::InvalidParameter("bump radius must be positive".into()))
            }
            Hamiltonian::Ring { inner, outer, .. } if !(0.0 <= *inner && inner < outer) => Err(
                Error::InvalidParameter("ring needs 0 <= inner < outer".into()),
            ),
            Hamiltonian::CutOff { inner, delta } => {
                if *delta <= 0.0 {
                    return Err(Error::InvalidParameter("cutoff delta must be positive".into()));
                }
                inner.validate()
            }
            Hamiltonian::Sum { parts } => parts.iter().try_for_each(Hamiltonian::validate),
            _ => Ok(()),
        }
    }

    /// Largest deviation of `H` from its mean on the circle of radius `r`.
    pub fn circle_variation(&self, r: f64) -> f64 {
        let n = 64;
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / n as f64;
                self.value(Vector2::new(r * t.cos(), r * t.sin()))
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max)
    }

    /// `dH/dr` on the circle of radius `r` when it is constant there (within `1e-12`).
    pub fn constant_radial_derivative(&self, r: f64) -> Option<f64> {
        let n = 64;
        let vals: Vec<f64> = (0..n)
            .map(|j| {
                let (s, c) = (std::f64::consts::TAU * j as f64 / n as f64).sin_cos();
                self.jet(Vector2::new(r * c, r * s)).grad.dot(&Vector2::new(c, s))
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let spread = vals.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        (spread <= 1e-12).then_some(mean)
    }
}

/// Time-stepping scheme for the time-one map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Implicit midpoint rule (second order, symplectic, symmetric).
    Midpoint,
    /// Triple-jump composition of the midpoint rule (fourth order).
    TripleJump,
}

impl Scheme {
    fn substeps(self) -> &'static [f64] {
        const TJ: [f64; 3] = {
            // 1 / (2 - 2^(1/3)) and -2^(1/3) / (2 - 2^(1/3))
            let g1 = 1.351_207_191_959_657_8;
            let g2 = -1.702_414_383_919_315_3;
            [g1, g2, g1]
        };
        match self {
            Scheme::Midpoint => &[1.0],
            Scheme::TripleJump => &TJ,
        }
    }
}

/// Result of integrating the flow from one point.
#[derive(Debug, Clone, Copy)]
pub struct FlowSample {
    pub end: Vector2<f64>,
    /// Lifted polar angle of `end`, continued from the starting angle.
    pub angle: f64,
    pub jacobian: Option<Matrix2<f64>>,
}

/// Fixed-step discrete flow of a Hamiltonian over time `time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianFlow {
    pub hamiltonian: Hamiltonian,
    pub steps: usize,
    pub time: f64,
    pub scheme: Scheme,
}

const SOLVE_TOL: f64 = 1e-15;
const SOLVE_MAX_ITER: usize = 30;

#[inline]
fn rot90(v: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

impl HamiltonianFlow {
    pub fn new(hamiltonian: Hamiltonian, steps: usize, scheme: Scheme) -> Self {
        Self {
            hamiltonian,
            steps,
            time: 1.0,
            scheme,
        }
    }

    /// The flow run backwards; by symmetry of the scheme this is the exact
    /// inverse of the discrete map (up to the implicit-solve tolerance).
    pub fn reversed(&self) -> Self {
        Self {
            time: -self.time,
            ..self.clone()
        }
    }

    /// Rotation (in turns) of the circle of radius `r` under the exact flow,
    /// when `H` and `dH/dr` are both constant on that circle.
    pub fn exact_circle_rotation(&self, r: f64) -> Option<f64> {
        if r <= 0.0 || self.hamiltonian.circle_variation(r) > 1e-12 {
            return None;
        }
        let dh = self.hamiltonian.constant_radial_derivative(r)?;
        Some(dh * self.time / (r * std::f64::consts::TAU))
    }

    pub fn vector_field(&self, z: Vector2<f64>) -> Vector2<f64> {
        rot90(self.hamiltonian.jet(z).grad)
    }

    /// One implicit-midpoint step of size `h`; returns the new point and the
    /// derivative of the step map.
    fn midpoint_step(
        &self,
        z: Vector2<f64>,
        h: f64,
        want_tangent: bool,
        step: usize,
    ) -> Result<(Vector2<f64>, Option<Matrix2<f64>>)> {
        let j = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let mut w = z + h * self.vector_field(z);
        let mut residual = f64::INFINITY;
        let mut jet = self.hamiltonian.jet(0.5 * (z + w));
        for _ in 0..SOLVE_MAX_ITER {
            let g = w - z - h * rot90(jet.grad);
            residual = g.norm();
            let dg = Matrix2::identity() - (0.5 * h) * j * jet.hess;
            let delta = dg
                .lu()
                .solve(&g)
                .ok_or(Error::Integration {
                    step,
                    steps: self.steps,
                    residual,
                })?;
            w -= delta;
            jet = self.hamiltonian.jet(0.5 * (z + w));
            if delta.norm() <= SOLVE_TOL * (1.0 + w.norm()) {
                residual = (w - z - h * rot90(jet.grad)).norm();
                break;
            }
        }
        if !(residual <= 1e-12) {
            return Err(Error::Integration {
                step,
                steps: self.steps,
                residual,
            });
        }
        let tangent = if want_tangent {
            let a = (0.5 * h) * j * jet.hess;
            let lhs = Matrix2::identity() - a;
            let rhs = Matrix2::identity() + a;
            Some(lhs.try_inverse().ok_or(Error::Integration {
                step,
                steps: self.steps,
                residual,
            })? * rhs)
        } else {
            None
        };
        Ok((w, tangent))
    }

    /// Integrate from `z0`; `start_angle` seeds the lifted angle of `z0`.
    pub fn advance(
        &self,
        z0: Vector2<f64>,
        start_angle: f64,
        want_tangent: bool,
    ) -> Result<FlowSample> {
        let h = self.time / self.steps as f64;
        let mut z = z0;
        let mut angle = start_angle;
        let mut jac = Matrix2::identity();
        for step in 0..self.steps {
            for &gamma in self.scheme.substeps() {
                let (w, t) = self.midpoint_step(z, gamma * h, want_tangent, step)?;
                if w.norm_squared() > 0.0 {
                    angle += wrap_angle(w.y.atan2(w.x) - angle);
                }
                if let Some(t) = t {
                    jac = t * jac;
                }
                z = w;
            }
        }
        Ok(FlowSample {
            end: z,
            angle,
            jacobian: want_tangent.then_some(jac),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Trig;

    fn rotation_generator(c: f64) -> Hamiltonian {
        // c r^2 / 2
        Hamiltonian::TrigPoly {
            terms: vec![TrigTerm::new(0.5 * c, 2, 0, Trig::Cos)],
        }
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let flow = HamiltonianFlow::new(Hamiltonian::zero(), 10, Scheme::Midpoint);
        let z = Vector2::new(0.3, -0.4);
        let s = flow.advance(z, -0.9272952180016122, true).unwrap();
        assert_eq!(s.end, z);
        assert_eq!(s.jacobian.unwrap(), Matrix2::identity());
    }

    #[test]
    fn rotation_generator_rotates() {
        let c = 1.3;
        let flow = HamiltonianFlow::new(rotation_generator(c), 200, Scheme::TripleJump);
        let z = Vector2::new(0.6, 0.0);
        let s = flow.advance(z, 0.0, false).unwrap();
        assert!((s.angle - c).abs() < 1e-9, "angle {}", s.angle);
        assert!((s.end.norm() - 0.6).abs() < 1e-14);
    }

    #[test]
    fn reversed_flow_inverts() {
        let h = Hamiltonian::Sum {
            parts: vec![
                Hamiltonian::Bump {
                    center: [0.2, 0.1],
                    radius: 0.5,
                    amplitude: 0.08,
                },
                rotation_generator(0.4),
            ],
        };
        let flow = HamiltonianFlow::new(h, 50, Scheme::Midpoint);
        let back = flow.reversed();
        let z = Vector2::new(0.25, -0.15);
        let fwd = flow.advance(z, z.y.atan2(z.x), false).unwrap();
        let ret = back.advance(fwd.end, fwd.angle, false).unwrap();
        assert!((ret.end - z).norm() < 1e-14);
        assert!((ret.angle - z.y.atan2(z.x)).abs() < 1e-13);
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let h = Hamiltonian::Bump {
            center: [0.1, 0.0],
            radius: 0.6,
            amplitude: 0.1,
        };
        let flow = HamiltonianFlow::new(h, 100, Scheme::Midpoint);
        let z = Vector2::new(0.2, 0.15);
        let j = flow.advance(z, 0.0, true).unwrap().jacobian.unwrap();
        let eps = 1e-6;
        for axis in 0..2 {
            let mut e = Vector2::zeros();
            e[axis] = eps;
            let p = flow.advance(z + e, 0.0, false).unwrap().end;
            let m = flow.advance(z - e, 0.0, false).unwrap().end;
            let col = (p - m) / (2.0 * eps);
            assert!((j.column(axis) - col).norm() < 1e-8);
        }
        assert!((j.determinant() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_smooth_terms() {
        let h = Hamiltonian::TrigPoly {
            terms: vec![TrigTerm::new(1.0, 2, 1, Trig::Cos)],
        };
        assert!(h.validate().is_err());
    }

    #[test]
    fn cutoff_vanishes_near_origin() {
        let h = Hamiltonian::CutOff {
            inner: Box::new(rotation_generator(1.0)),
            delta: 0.1,
        };
        let jet = h.jet(Vector2::new(0.05, 0.05));
        assert_eq!(jet.v, 0.0);
        assert_eq!(jet.grad, Vector2::zeros());
        let far = h.jet(Vector2::new(0.5, 0.0));
        assert!((far.v - 0.125).abs() < 1e-15);
    }
}
