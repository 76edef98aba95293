//! Classification of active rays into the rank-one types the toolkit can certify.

use num_complex::Complex64;
use serde::Serialize;

use super::{integrate_trajectory, IntegrationOptions, QuadraticDifferential, SaddleConnection, Terminus, TrajectoryStart};
use crate::lattice_algebra::angle_distance;

/// Result of [`classify_ray`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum RayClassification {
    /// A single saddle connection between distinct zeros.
    Case1,
    /// A family of closed trajectories with the given core period.
    Case4a { core_period: Complex64 },
    /// Anything not certified as rank one.
    Unknown(String),
}

/// A ring domain of closed trajectories.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingDomain {
    pub core_period: Complex64,
    pub boundary_connections: Vec<usize>,
    pub degenerate: bool,
}

/// Flat cylinder obtained by gluing the two vertical sides of a rectangle:
/// points `w` and `w + core` are identified and `0 < Im(w / core * |core|) < height`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GluedCylinder {
    pub core: Complex64,
    pub height: f64,
}

fn commensurable(a: Complex64, b: Complex64) -> bool {
    let r = a / b;
    if r.im.abs() > 1e-6 * r.norm() {
        return false;
    }
    let x = r.re.abs();
    (1..=12).any(|d| {
        let n = (x * d as f64).round();
        n >= 1.0 && (x * d as f64 - n).abs() < 1e-6 * d as f64
    })
}

/// Classifies the active ray at `phase` with the given connections.
pub fn classify_ray(
    q: &QuadraticDifferential,
    phase: f64,
    connections: &[SaddleConnection],
    cap: f64,
) -> RayClassification {
    if connections.is_empty() {
        return RayClassification::Unknown("no connections".into());
    }
    for c in connections {
        let d = angle_distance(c.charge.arg(), phase).min(angle_distance(c.charge.arg() + std::f64::consts::PI, phase));
        if d > 1e-6 {
            return RayClassification::Unknown(format!("connection phase {} differs from ray phase", c.charge.arg()));
        }
    }
    for i in 0..connections.len() {
        for j in i + 1..connections.len() {
            if !commensurable(connections[i].charge, connections[j].charge) {
                return RayClassification::Unknown("connections have independent central charges".into());
            }
        }
    }
    if connections.len() == 1 && connections[0].start_zero != connections[0].end_zero {
        return RayClassification::Case1;
    }
    if let Some(core) = first_return(q, phase, &connections[0], cap) {
        return RayClassification::Case4a { core_period: core };
    }
    RayClassification::Unknown("several connections without a certified ring domain".into())
}

/// Looks for a closed trajectory next to a connection by following the
/// trajectory through a point slightly off its midpoint.
fn first_return(q: &QuadraticDifferential, phase: f64, c: &SaddleConnection, cap: f64) -> Option<Complex64> {
    let mid = c.path.get(c.path.len() / 2).copied()?;
    let prev = c.path.get(c.path.len() / 2 - 1).copied()?;
    let normal = (mid - prev) * Complex64::i();
    let offset = 1e-3 * q.min_zero_distance();
    for side in [1.0, -1.0] {
        let start = mid + normal / normal.norm() * (offset * side);
        let branch = Complex64::from_polar(1.0, phase) / (mid - prev);
        let t = integrate_trajectory(
            q,
            TrajectoryStart::Point { z: start, branch },
            phase,
            cap.max(1.0),
            &IntegrationOptions::default(),
        )
        .ok()?;
        if t.terminus != Terminus::LengthCapped {
            continue;
        }
        let close = t.points.iter().zip(&t.arclength).skip(10).find(|(p, _)| (*p - start).norm() < 0.5 * offset);
        if let Some((_, s)) = close {
            return Some(Complex64::from_polar(*s, phase));
        }
    }
    None
}

/// First-return test on a glued cylinder: a trajectory closes up exactly when
/// its phase is parallel to the core.
pub fn classify_cylinder(cyl: &GluedCylinder, phase: f64, cap: f64) -> RayClassification {
    let rel = phase - cyl.core.arg();
    let sin = rel.sin();
    if sin.abs() > 1e-9 {
        let exit = cyl.height / sin.abs();
        return RayClassification::Unknown(format!("trajectory leaves the cylinder after flat length {exit}"));
    }
    if cyl.core.norm() > cap {
        return RayClassification::Unknown("core longer than the cap".into());
    }
    let core = if rel.cos() > 0.0 { cyl.core } else { -cyl.core };
    RayClassification::Case4a { core_period: core }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conn(z: Complex64) -> SaddleConnection {
        SaddleConnection {
            start_zero: 0,
            end_zero: 1,
            phase: z.arg(),
            charge: z,
            hat_charge: z * 2.0,
            lattice_class: None,
            path: vec![Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    #[test]
    fn single_connection_is_case_one() {
        let q = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let c = conn(Complex64::new(0.0, 1.5707963267948966));
        assert_eq!(classify_ray(&q, c.phase, &[c.clone()], 5.0), RayClassification::Case1);
    }

    #[test]
    fn independent_charges_are_unknown() {
        let q = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let a = conn(Complex64::new(0.0, 1.0));
        let b = conn(Complex64::new(0.0, std::f64::consts::SQRT_2));
        assert!(matches!(classify_ray(&q, a.phase, &[a, b], 5.0), RayClassification::Unknown(_)));
    }

    #[test]
    fn cylinder_fixture_reports_core() {
        let cyl = GluedCylinder { core: Complex64::new(0.0, 2.5), height: 1.0 };
        assert_eq!(
            classify_cylinder(&cyl, std::f64::consts::FRAC_PI_2, 10.0),
            RayClassification::Case4a { core_period: Complex64::new(0.0, 2.5) }
        );
        assert!(matches!(classify_cylinder(&cyl, 0.3, 10.0), RayClassification::Unknown(_)));
    }
}
