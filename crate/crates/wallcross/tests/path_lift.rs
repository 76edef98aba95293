use std::f64::consts::PI;

use num_complex::Complex64;
use wallcross::flat_geometry::QuadraticDifferential;
use wallcross::path_lift::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn a0() -> QuadraticDifferential {
    QuadraticDifferential::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap()
}

fn a1() -> QuadraticDifferential {
    QuadraticDifferential::new(vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap()
}

/// Half-ellipse `center + e^{i rot} (a cos phi + i b sin phi)`, `phi` from `-pi/2` to `pi/2`.
fn arc(center: Complex64, a: f64, b: f64, rot: f64, n: usize) -> Vec<Complex64> {
    let r = Complex64::from_polar(1.0, rot);
    (0..=n)
        .map(|k| {
            let phi = -PI / 2.0 + PI * k as f64 / n as f64;
            center + r * c(a * phi.cos(), b * phi.sin())
        })
        .collect()
}

fn segment(p: Complex64, q: Complex64, n: usize) -> Vec<Complex64> {
    (0..=n).map(|k| p + (q - p) * (k as f64 / n as f64)).collect()
}

#[test]
fn path_without_crossings_has_two_trivial_lifts() {
    let q = a0();
    let f = lift_path(&q, &segment(c(1.0, 0.5), c(2.0, 0.7), 4), 0.0, 10.0).unwrap();
    assert_eq!(f.len(), 2);
    assert!(f.terms.iter().all(|t| t.class.base == PathBase::Trivial));
}

#[test]
fn one_crossing_adds_one_elementary_detour() {
    let q = a0();
    // crosses the separatrix along the positive real axis at x = 1
    let f = lift_path(&q, &segment(c(1.0, -0.5), c(1.0, 0.5), 7), 0.0, 10.0).unwrap();
    assert_eq!(f.len(), 3);
    let detours: Vec<_> = f.terms.iter().filter(|t| t.class.base != PathBase::Trivial).collect();
    assert_eq!(detours.len(), 1);
    // charge: 2 Z(r) = 4/3 for the ray from 0 to 1, plus the path pieces on
    // either side taken on opposite sheets
    let d = &detours[0].class;
    assert_ne!(d.start.sheet, d.end.sheet);
    let f32 = |z: Complex64| z.powf(1.5) * (2.0 / 3.0);
    let pieces = (f32(c(1.0, 0.0)) - f32(c(1.0, -0.5))) - (f32(c(1.0, 0.5)) - f32(c(1.0, 0.0)));
    let expected = [c(4.0 / 3.0, 0.0) + pieces, c(4.0 / 3.0, 0.0) - pieces];
    assert!(expected.iter().any(|e| (d.charge - e).norm() < 1e-9), "{}", d.charge);
}

#[test]
fn homotopy_over_a_trajectory() {
    let q = a0();
    // both arcs join (1.5, 0.5) to (2.5, 0.5); the deep one dips across the positive real axis twice
    let shallow = arc(c(2.0, 0.5), 0.2, 0.5, -PI / 2.0, 40);
    let deep = arc(c(2.0, 0.5), 1.0, 0.5, -PI / 2.0, 40);
    let fs = lift_path(&q, &shallow, 0.0, 12.0).unwrap();
    let fd = lift_path(&q, &deep, 0.0, 12.0).unwrap();
    assert_eq!(fs.len(), 2);
    assert!(fd.equals(&fs), "{}\n{}", fd.render(), fs.render());
}

#[test]
fn homotopy_across_a_zero() {
    let q = a0();
    // both arcs join (-0.5, -1) to (-0.5, 1) with the same end tangents;
    // the shallow one stays left of the zero and crosses the separatrices at
    // angles 2pi/3 and 4pi/3, the wide one passes right of it
    let left = arc(c(-0.5, 0.0), 0.3, 1.0, 0.0, 80);
    let right = arc(c(-0.5, 0.0), 1.5, 1.0, 0.0, 80);
    for theta in [0.0, 0.4, -0.7] {
        let fl = lift_path(&q, &left, theta, 12.0).unwrap();
        let fr = lift_path(&q, &right, theta, 12.0).unwrap();
        assert!(fl.equals(&fr), "theta={theta}\n{}\n{}", fl.render(), fr.render());
    }
}

#[test]
fn crossing_the_end_of_a_truncated_trajectory() {
    let q = a0();
    // with flat length 2 the real separatrix ends at x = 3^(2/3) ~ 2.08
    let opts = LiftOptions { cap: Some(2.0), allow_active: false };
    let before = arc(c(1.5, 0.0), 0.3, 0.5, 0.0, 40);
    let beyond = arc(c(1.5, 0.0), 0.9, 0.5, 0.0, 40);
    let fb = lift_path_with(&q, &before, 0.0, 20.0, &opts).unwrap();
    let fe = lift_path_with(&q, &beyond, 0.0, 20.0, &opts).unwrap();
    let diff = fb.minus(&fe);
    assert_eq!(diff.len(), 1, "{}", diff.render());
    assert!(matches!(diff.terms[0].class.base, PathBase::Geometric { detours: 1 }));
}

#[test]
fn composition_of_a_split_path() {
    let q = a1();
    let theta = 1.0;
    let full = segment(c(0.2, -1.5), c(0.2, 1.5), 30);
    let (p1, p2) = (full[..=13].to_vec(), full[13..].to_vec());
    let f = lift_path(&q, &full, theta, 20.0).unwrap();
    assert!(f.len() > 2, "{}", f.render());
    let level = f.terms.iter().filter(|t| t.class.base != PathBase::Trivial).map(|t| t.class.charge.norm()).fold(0.0, f64::max);
    let level = 5.0 * level.max(1.0);
    let f = lift_path(&q, &full, theta, level).unwrap();
    let g = compose_lifts(&lift_path(&q, &p1, theta, level).unwrap(), &lift_path(&q, &p2, theta, level).unwrap());
    assert!(g.equals(&f), "{}\n{}", g.render(), f.render());
}

#[test]
fn lifts_are_tame() {
    let q = a1();
    for theta in [0.3, 1.0, 2.5] {
        let f = lift_path(&q, &segment(c(0.2, -1.5), c(0.4, 1.5), 30), theta, 15.0).unwrap();
        assert!(f.is_tame(theta - PI / 2.0, theta + PI / 2.0));
        assert!(f.terms.iter().all(|t| t.class.charge.norm() < 15.0));
    }
}

#[test]
fn limit_check_on_the_a1_saddle() {
    let q = a1();
    let level = 4.0 * PI;
    let straight = segment(c(0.0, -0.5), c(0.0, 0.5), 15);
    let curved = arc(c(-0.1, 0.0), 0.6, 0.7, 0.0, 31);
    for path in [&straight, &curved] {
        for eps in [1e-2, 1e-3] {
            let r = limit_check(&q, PI / 2.0, path, eps, level).unwrap();
            assert!(r.plus && r.minus, "{eps}: {r:?}");
        }
    }
}

#[test]
fn one_sided_limits_differ_across_the_wall() {
    let q = a1();
    let path = segment(c(0.0, -0.5), c(0.0, 0.5), 15);
    let plus = lift_path(&q, &path, PI / 2.0 + 1e-3, 4.0 * PI).unwrap();
    let minus = lift_path(&q, &path, PI / 2.0 - 1e-3, 4.0 * PI).unwrap();
    assert!(!plus.equals(&minus));
    let m = model_from_geometry(&q, PI / 2.0, &path, 4.0 * PI).unwrap();
    assert!((m.core_charge - c(0.0, PI)).norm() < 1e-9);
}

#[test]
fn saddle_free_limits_agree_with_the_phase_itself() {
    let q = a1();
    let path = segment(c(0.0, -0.5), c(0.0, 0.5), 15);
    let r = limit_check(&q, 1.0, &path, 1e-3, 4.0 * PI).unwrap();
    assert!(r.plus && r.minus);
}

#[test]
fn active_phase_is_refused() {
    let q = a1();
    let path = segment(c(0.0, -0.5), c(0.0, 0.5), 15);
    assert!(matches!(lift_path(&q, &path, PI / 2.0, 4.0 * PI), Err(LiftError::ActivePhase(_))));
}

#[test]
fn tangential_crossing_is_rejected() {
    let q = a0();
    // runs along the separatrix on the positive real axis
    let path = segment(c(0.5, 0.0), c(1.5, 1e-9), 3);
    assert!(lift_path(&q, &path, 0.0, 10.0).is_err());
}
