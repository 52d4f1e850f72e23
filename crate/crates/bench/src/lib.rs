//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use calabi_core::{DiscMap, Hamiltonian, RadialPolynomial, Scheme, Trig, TrigTerm};

/// `(r, theta) -> (r, theta + 2 pi 0.3 r^2)`.
pub fn twist() -> DiscMap {
    DiscMap::twist(RadialPolynomial::monomial(0.3, 2))
}

/// Time-one map of `0.15 pi r^4 + 0.05 (1 - r^2)^2 r^2 cos 2theta`.
pub fn perturbed_twist(steps: usize, scheme: Scheme) -> DiscMap {
    let terms = vec![
        TrigTerm::new(0.15 * PI, 4, 0, Trig::Cos),
        TrigTerm::new(0.05, 2, 2, Trig::Cos),
        TrigTerm::new(-0.1, 4, 2, Trig::Cos),
        TrigTerm::new(0.05, 6, 2, Trig::Cos),
    ];
    DiscMap::hamiltonian_with(Hamiltonian::TrigPoly { terms }, steps, scheme, 1.0).expect("valid Hamiltonian")
}
