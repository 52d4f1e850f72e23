//! Worked cases for the checkers and the extension pipeline.

mod common;

use std::f64::consts::PI;

use calabi_core::extension::{
    boundary_generating, calabi_sandwich, extend_generating, sandwich_report, smooth_stage, stage_reference,
    verify_stage_bounds, DEFAULT_EPS,
};
use calabi_core::orbits::{check_calabi_identity, check_hutchings_inequality, BoundaryClass, VerifyOptions};
use calabi_core::{calabi_invariant, DiscMap, Error, Hamiltonian, PolarPoint, RadialPolynomial};

use common::*;

fn quick() -> VerifyOptions {
    let mut o = VerifyOptions {
        grid: (32, 32),
        ..Default::default()
    };
    o.search.d_max = 4;
    o.search.seed_grid = (4, 4);
    o
}

#[test]
fn rigid_rotation_fails_the_hypothesis() {
    let r = check_hutchings_inequality(&DiscMap::rigid(0.3), &quick()).unwrap();
    assert!(!r.hypothesis_met);
    assert_eq!(r.conclusion_met, None);
    assert!(r.hints.is_empty());
}

#[test]
fn inverse_twist_gets_the_inverse_map_hint() {
    let r = check_hutchings_inequality(&twist03().inverse(), &quick()).unwrap();
    assert!(!r.hypothesis_met);
    assert!((r.calabi.value - 0.1 * PI).abs() < 1e-6);
    assert!(r.hints.iter().any(|h| h.contains("inverse")));
}

#[test]
fn non_rigid_boundary_is_exploratory() {
    use calabi_core::{Trig, TrigTerm};
    // H is constant on the boundary but dH/dr is not, so the boundary is invariant yet not rigidly rotated.
    let h = Hamiltonian::TrigPoly {
        terms: vec![
            TrigTerm::new(0.5, 2, 0, Trig::Cos),
            TrigTerm::new(0.05, 1, 1, Trig::Cos),
            TrigTerm::new(-0.05, 3, 1, Trig::Cos),
        ],
    };
    let m = DiscMap::hamiltonian_time_one(h, 40).unwrap();
    let mut opts = quick();
    opts.grid = (16, 16);
    opts.search.d_max = 1;
    opts.rotation_samples = 1000;
    opts.rotation_tol = 1e-2;
    opts.action.boundary_samples = 1000;
    let r = check_hutchings_inequality(&m, &opts).unwrap();
    assert!(matches!(r.boundary, BoundaryClass::NonRigid { .. }));
    assert!(r.exploratory && r.hints.iter().any(|h| h.contains("exploratory")));
}

#[test]
fn twist_is_not_a_pseudo_rotation() {
    let r = check_calabi_identity(&twist03(), &quick()).unwrap();
    assert!(!r.applicable && !r.pass);
    assert!(r.reason.contains("not applicable"));
}

#[test]
fn bump_conjugation_keeps_the_calabi_invariant() {
    let psi = DiscMap::hamiltonian_time_one(
        Hamiltonian::Bump {
            center: [0.2, 0.1],
            radius: 0.5,
            amplitude: 0.05,
        },
        200,
    )
    .unwrap();
    let conj = twist03().conjugate(&psi).unwrap();
    let v = calabi_invariant(&conj, 0.0, 128, 128).unwrap();
    assert!((v.value + 0.1 * PI).abs() < 1e-4, "{v:?}");
}

#[test]
fn compact_hamiltonian_sign_oracle() {
    // V(phi_H, 0) = -(2/pi) int H omega for compactly supported H.
    let (c, rad, amp) = ([0.0, 0.0], 0.6, 0.1);
    let m = DiscMap::hamiltonian_time_one(
        Hamiltonian::Bump {
            center: c,
            radius: rad,
            amplitude: amp,
        },
        100,
    )
    .unwrap();
    let h = Hamiltonian::Bump {
        center: c,
        radius: rad,
        amplitude: amp,
    };
    let rule = calabi_core::numerics::quadrature::GaussRule::new(200);
    let mut int = 0.0;
    for (r, w) in rule.mapped(0.0, rad) {
        int += w * r * h.value(PolarPoint::new(r, 0.0).to_cartesian()) * 2.0 * PI;
    }
    let v = calabi_invariant(&m, 0.0, 64, 64).unwrap().value;
    assert!((v + 2.0 / PI * int).abs() < 1e-6, "{v} vs {}", -2.0 / PI * int);
}

#[test]
fn rigid_extension_collapses() {
    let theta0 = 0.15;
    let m = DiscMap::rigid(theta0);
    let w_hat = extend_generating(&boundary_generating(&m, DEFAULT_EPS).unwrap(), theta0).unwrap();
    let stage = smooth_stage(&w_hat, 2).unwrap();
    let b = verify_stage_bounds(&stage, &stage_reference(&w_hat).unwrap(), None).unwrap();
    assert_eq!(b.certified_k, None);
    let s = calabi_sandwich(&stage, 0.0, b.certified_k, (16, 16)).unwrap();
    assert!(s.restricted_calabi.abs() < 1e-10 && s.contained);
}

#[test]
fn extended_twist_preserves_area_and_vanishes_in_tail() {
    let w_hat = extend_generating(&boundary_generating(&twist03(), DEFAULT_EPS).unwrap(), 0.3).unwrap();
    let stage = smooth_stage(&w_hat, 4).unwrap();
    let rep = stage.phi_n().check_area_preservation(12, 16, 1e-8).unwrap();
    assert!(rep.pass, "{rep:?}");
    for &(r, th) in &[(1.25, 0.0), (1.6, 2.0), (2.0, 4.0)] {
        assert!(stage.sigma(PolarPoint::new(r, th)).unwrap().abs() < 1e-10);
    }
    // Glued action is continuous across the unit circle.
    assert!(stage.interface_gap(32).unwrap() < 1e-8);
}

#[test]
fn sandwich_gap_shrinks_to_1e3_at_stage_32() {
    let m = twist03();
    let w_hat = extend_generating(&boundary_generating(&m, DEFAULT_EPS).unwrap(), 0.3).unwrap();
    let base = calabi_invariant(&m, 0.0, 32, 32).unwrap().value;
    let reference = stage_reference(&w_hat).unwrap();
    let mut last = f64::INFINITY;
    for n in [8, 32] {
        let stage = smooth_stage(&w_hat, n).unwrap();
        let k = verify_stage_bounds(&stage, &reference, None).unwrap().certified_k;
        let s = sandwich_report(&stage, base, k, (32, 32)).unwrap();
        assert!(s.contained && s.gap < last);
        last = s.gap;
    }
    assert!(last <= 1e-3, "gap {last}");
}

#[test]
fn non_rigid_boundary_has_no_extension() {
    let m = DiscMap::twist(RadialPolynomial::monomial(0.3, 2)).restrict(0.9).unwrap();
    assert!(boundary_generating(&m, 0.2).is_err());
    let w = boundary_generating(&twist03(), 0.2).unwrap();
    assert!(matches!(extend_generating(&w, 0.31), Err(Error::Anchoring { .. })));
}

#[test]
fn strongly_nonradial_boundary_needs_a_milder_blend() {
    use calabi_core::{Trig, TrigTerm};
    // (1 - r^2)^2 r^8 cos 8theta keeps the boundary rigid but makes D11 W(1, theta) oscillate.
    let c = 1.5;
    let h = Hamiltonian::TrigPoly {
        terms: vec![
            TrigTerm::new(0.15 * PI, 4, 0, Trig::Cos),
            TrigTerm::new(c, 8, 8, Trig::Cos),
            TrigTerm::new(-2.0 * c, 10, 8, Trig::Cos),
            TrigTerm::new(c, 12, 8, Trig::Cos),
        ],
    };
    let m = DiscMap::hamiltonian_time_one(h, 400).unwrap();
    let w_hat = extend_generating(&boundary_generating(&m, DEFAULT_EPS).unwrap(), 0.3).unwrap();
    match smooth_stage(&w_hat, 1) {
        Err(Error::Stage { n: 1, source }) => assert!(matches!(*source, Error::TwistCondition { .. })),
        other => panic!("expected a stage failure, got {:?}", other.map(|s| s.n)),
    }
    assert!(smooth_stage(&w_hat, 4).is_ok());
}
