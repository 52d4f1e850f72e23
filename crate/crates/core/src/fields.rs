//! Closed-form scalar fields: radial polynomials `g(r)` and trigonometric
//! monomials `c r^k cos(m theta)` / `c r^k sin(m theta)`.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `g(r) = sum_k coeffs[k] r^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPolynomial {
    pub coeffs: Vec<f64>,
}

impl RadialPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// `c * r^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * r + k as f64 * c)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        Self {
            coeffs: (0..n)
                .map(|i| get(&self.coeffs, i) - get(&other.coeffs, i))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Cos,
    Sin,
}

/// `coef * r^k * cos(m theta)` or `coef * r^k * sin(m theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub coef: f64,
    pub k: u32,
    pub m: u32,
    pub trig: Trig,
}

/// Value, gradient and Hessian of a planar scalar field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub grad: Vector2<f64>,
    pub hess: Matrix2<f64>,
}

impl std::ops::Add for Jet2 {
    type Output = Jet2;

    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            grad: self.grad + o.grad,
            hess: self.hess + o.hess,
        }
    }
}

/// Product rule.
impl std::ops::Mul for Jet2 {
    type Output = Jet2;

    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            grad: self.grad * o.v + o.grad * self.v,
            hess: self.hess * o.v
                + o.hess * self.v
                + self.grad * o.grad.transpose()
                + o.grad * self.grad.transpose(),
        }
    }
}

impl Jet2 {
    pub fn zero() -> Self {
        Self {
            v: 0.0,
            grad: Vector2::zeros(),
            hess: Matrix2::zeros(),
        }
    }

    /// Jet of `F(s)` with `s = |z - c|^2`, given `F, F', F''` at `s`.
    pub fn of_squared_distance(d: Vector2<f64>, f: f64, f1: f64, f2: f64) -> Jet2 {
        Jet2 {
            v: f,
            grad: d * (2.0 * f1),
            hess: Matrix2::identity() * (2.0 * f1) + d * d.transpose() * (4.0 * f2),
        }
    }
}

impl TrigTerm {
    pub fn new(coef: f64, k: u32, m: u32, trig: Trig) -> Self {
        Self { coef, k, m, trig }
    }

    /// Smooth at the origin as a function of `(x, y)`.
    pub fn is_smooth(&self) -> bool {
        (self.k >= self.m && (self.k - self.m).is_multiple_of(2)) || (self.m == 0 && self.k.is_multiple_of(2))
    }

    fn angular(&self, theta: f64) -> (f64, f64, f64) {
        let m = self.m as f64;
        let (s, c) = (m * theta).sin_cos();
        match self.trig {
            Trig::Cos => (c, -m * s, -m * m * c),
            Trig::Sin => (s, m * c, -m * m * s),
        }
    }

    fn radial(&self, r: f64) -> (f64, f64, f64) {
        let k = self.k as i32;
        let p = |e: i32| if e < 0 { 0.0 } else { r.powi(e) };
        let kf = k as f64;
        (p(k), kf * p(k - 1), kf * (kf - 1.0) * p(k - 2))
    }

    /// Value in polar coordinates.
    pub fn value_polar(&self, r: f64, theta: f64) -> f64 {
        self.coef * self.radial(r).0 * self.angular(theta).0
    }

    /// `(d/dr, d/dtheta)`.
    pub fn grad_polar(&self, r: f64, theta: f64) -> (f64, f64) {
        let (rv, r1, _) = self.radial(r);
        let (av, a1, _) = self.angular(theta);
        (self.coef * r1 * av, self.coef * rv * a1)
    }

    /// `(d2/dr2, d2/drdtheta, d2/dtheta2)`.
    pub fn hess_polar(&self, r: f64, theta: f64) -> (f64, f64, f64) {
        let (rv, r1, r2) = self.radial(r);
        let (av, a1, a2) = self.angular(theta);
        (self.coef * r2 * av, self.coef * r1 * a1, self.coef * rv * a2)
    }

    /// Cartesian jet, written as `coef * s^j * Re/Im(z^m)` with `s = |z|^2`.
    /// Only meaningful for smooth terms.
    pub fn jet_cartesian(&self, z: Vector2<f64>) -> Jet2 {
        debug_assert!(self.is_smooth());
        let j = (self.k - self.m) / 2;
        let s = z.norm_squared();
        let jf = j as f64;
        let sp = |e: i32| if e < 0 { 0.0 } else { s.powi(e) };
        let j_i = j as i32;
        let radial = Jet2 {
            v: sp(j_i),
            grad: z * (2.0 * jf * sp(j_i - 1)),
            hess: Matrix2::identity() * (2.0 * jf * sp(j_i - 1))
                + z * z.transpose() * (4.0 * jf * (jf - 1.0) * sp(j_i - 2)),
        };
        let w = Complex64::new(z.x, z.y);
        let m = self.m as i32;
        let mf = m as f64;
        let zp = |e: i32| {
            if e < 0 {
                Complex64::new(0.0, 0.0)
            } else {
                w.powi(e)
            }
        };
        let i = Complex64::new(0.0, 1.0);
        let p = zp(m);
        let p1 = zp(m - 1) * mf;
        let p2 = zp(m - 2) * (mf * (mf - 1.0));
        // d/dx = p1, d/dy = i p1; d2/dx2 = p2, d2/dxdy = i p2, d2/dy2 = -p2
        let part = |c: Complex64| match self.trig {
            Trig::Cos => c.re,
            Trig::Sin => c.im,
        };
        let angular = Jet2 {
            v: part(p),
            grad: Vector2::new(part(p1), part(i * p1)),
            hess: Matrix2::new(part(p2), part(i * p2), part(i * p2), part(-p2)),
        };
        let jet = radial * angular;
        Jet2 {
            v: self.coef * jet.v,
            grad: jet.grad * self.coef,
            hess: jet.hess * self.coef,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_horner() {
        let g = RadialPolynomial::new(vec![1.0, -2.0, 0.5]);
        assert_eq!(g.value(2.0), 1.0 - 4.0 + 2.0);
        assert_eq!(g.derivative(2.0), -2.0 + 2.0);
        assert_eq!(RadialPolynomial::monomial(0.3, 2).value(2.0), 1.2);
    }

    #[test]
    fn cartesian_jet_matches_polar_value() {
        let terms = [
            TrigTerm::new(0.7, 3, 1, Trig::Cos),
            TrigTerm::new(-1.1, 4, 2, Trig::Sin),
            TrigTerm::new(0.2, 4, 0, Trig::Cos),
            TrigTerm::new(1.3, 5, 3, Trig::Cos),
        ];
        let z: Vector2<f64> = Vector2::new(0.31, -0.52);
        let (r, th) = (z.norm(), z.y.atan2(z.x));
        let h = 1e-6;
        for t in terms {
            assert!(t.is_smooth());
            let jet = t.jet_cartesian(z);
            assert!((jet.v - t.value_polar(r, th)).abs() < 1e-14);
            for axis in 0..2 {
                let mut e = Vector2::zeros();
                e[axis] = h;
                let gp = t.jet_cartesian(z + e);
                let gm = t.jet_cartesian(z - e);
                let d = (gp.v - gm.v) / (2.0 * h);
                assert!((jet.grad[axis] - d).abs() < 1e-8);
                let dg = (gp.grad - gm.grad) / (2.0 * h);
                for row in 0..2 {
                    assert!((jet.hess[(row, axis)] - dg[row]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn smoothness_rule() {
        assert!(!TrigTerm::new(1.0, 2, 1, Trig::Cos).is_smooth());
        assert!(TrigTerm::new(1.0, 1, 1, Trig::Cos).is_smooth());
        assert!(!TrigTerm::new(1.0, 1, 0, Trig::Cos).is_smooth());
    }
}
