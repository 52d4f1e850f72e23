#![allow(dead_code)]

use std::f64::consts::PI;

use calabi_core::{DiscMap, Hamiltonian, RadialPolynomial, Trig, TrigTerm};

pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// `(r, theta) -> (r, theta + 2 pi 0.3 r^2)`.
pub fn twist03() -> DiscMap {
    DiscMap::twist(RadialPolynomial::monomial(0.3, 2))
}

/// Time-one map of `0.15 pi r^4 + 0.05 (1 - r^2)^2 r^2 cos 2theta`: the twist
/// above plus a perturbation that vanishes to second order on the boundary.
pub fn perturbed_twist() -> DiscMap {
    let terms = vec![
        TrigTerm::new(0.15 * PI, 4, 0, Trig::Cos),
        TrigTerm::new(0.05, 2, 2, Trig::Cos),
        TrigTerm::new(-0.1, 4, 2, Trig::Cos),
        TrigTerm::new(0.05, 6, 2, Trig::Cos),
    ];
    DiscMap::hamiltonian_time_one(Hamiltonian::TrigPoly { terms }, 200).unwrap()
}

/// Time-one map of `0.3 (1 - r^2)^2 (x + 0.5 y)`, which fixes the boundary pointwise.
pub fn boundary_fixing_conjugator() -> DiscMap {
    let a = 0.3;
    let mut terms = Vec::new();
    for (c, t) in [(1.0, Trig::Cos), (0.5, Trig::Sin)] {
        terms.push(TrigTerm::new(a * c, 1, 1, t));
        terms.push(TrigTerm::new(-2.0 * a * c, 3, 1, t));
        terms.push(TrigTerm::new(a * c, 5, 1, t));
    }
    DiscMap::hamiltonian_time_one(Hamiltonian::TrigPoly { terms }, 200).unwrap()
}

/// `f_(phi, 0)` of `twist03`.
pub fn twist03_action(r: f64) -> f64 {
    -0.15 * PI * (1.0 - r.powi(4))
}
