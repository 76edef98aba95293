//! Trajectories of fixed phase: `dz/ds = e^{i theta} / sqrt(P(z))`, with `s`
//! the flat arclength, integrated by an adaptive Dormand–Prince 5(4) pair and
//! continuous branch tracking of `sqrt(P)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{GeometryError, QuadraticDifferential};

/// How a trajectory ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Terminus {
    HitZero(usize),
    Escaped,
    LengthCapped,
}

/// Where a trajectory starts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrajectoryStart {
    /// A regular point with the branch of `sqrt(P)` closest to `branch`.
    Point { z: Complex64, branch: Complex64 },
    /// Separatrix `ray` (0..3) emanating from zero `zero`.
    Separatrix { zero: usize, ray: usize },
}

/// Numerical knobs for [`integrate_trajectory`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationOptions {
    /// Local error tolerance per step.
    pub tol: f64,
    /// Radius of the hit disc around zeros; defaults to the differential's.
    pub hit_radius: Option<f64>,
    /// Escape radius; defaults to the differential's.
    pub escape_radius: Option<f64>,
    /// Step budget before giving up.
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions { tol: 1e-10, hit_radius: None, escape_radius: None, max_steps: 200_000 }
    }
}

/// A computed trajectory, sampled at the accepted integrator steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySegment {
    pub points: Vec<Complex64>,
    /// Flat length from the start (the zero, for separatrices) to each point.
    pub arclength: Vec<f64>,
    /// Branch of `sqrt(P)` at each point; `lambda * dz` points along `e^{i phase}`.
    pub lambdas: Vec<Complex64>,
    pub origin: Option<(usize, usize)>,
    pub phase: f64,
    pub terminus: Terminus,
}

impl TrajectorySegment {
    pub fn length(&self) -> f64 {
        *self.arclength.last().unwrap_or(&0.0)
    }

    pub fn end(&self) -> Complex64 {
        *self.points.last().expect("trajectory has points")
    }
}

/// Start point, branch and flat length of separatrix `ray` from `zero`.
///
/// Uses the local model `w = (2/3) sqrt(a) u^{3/2}`, `a = P'(z0)`, at a tiny offset.
pub fn separatrix_start(
    q: &QuadraticDifferential,
    zero: usize,
    ray: usize,
    theta: f64,
) -> (Complex64, Complex64, f64) {
    let z0 = q.zeros()[zero];
    let a = q.derivative(z0);
    let r0 = 1e-5 * q.min_zero_distance().min(1.0);
    let phi = 2.0 / 3.0 * (theta - a.arg() / 2.0) + 2.0 * PI * ray as f64 / 3.0;
    let u0 = Complex64::from_polar(r0, phi);
    let z = z0 + u0;
    let target = Complex64::from_polar(1.0, theta) / u0;
    let lam = q.sqrt_near(z, target);
    let s0 = 2.0 / 3.0 * lam.norm() * r0;
    (z, lam, s0)
}

/// Index of the asymptotic direction at infinity reached by a trajectory of
/// phase `theta` ending at `z_end`.
pub fn escape_index(q: &QuadraticDifferential, theta: f64, z_end: Complex64) -> usize {
    let m = q.asymptotic_directions() as f64;
    let step = 2.0 * PI / m;
    let k = ((z_end.arg() - q.asymptotic_base_angle(theta)) / step).round() as i64;
    k.rem_euclid(m as i64) as usize
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates a trajectory of phase `theta` up to flat length `cap`.
pub fn integrate_trajectory(
    q: &QuadraticDifferential,
    start: TrajectoryStart,
    theta: f64,
    cap: f64,
    opts: &IntegrationOptions,
) -> Result<TrajectorySegment, GeometryError> {
    if cap <= 0.0 {
        return Err(GeometryError::InvalidInput(format!("cap must be positive, got {cap}")));
    }
    let hit_radius = opts.hit_radius.unwrap_or_else(|| q.hit_radius());
    let escape = opts.escape_radius.unwrap_or_else(|| q.escape_radius());
    let dir = Complex64::from_polar(1.0, theta);
    let (z, lam, s, origin) = match start {
        TrajectoryStart::Point { z, branch } => {
            if let Some((_, d)) = q.nearest_zero(z) {
                if d < hit_radius {
                    return Err(GeometryError::PathThroughZero(z));
                }
            }
            (z, q.sqrt_near(z, branch), 0.0, None)
        }
        TrajectoryStart::Separatrix { zero, ray } => {
            if zero >= q.zeros().len() || ray > 2 {
                return Err(GeometryError::InvalidInput(format!("no separatrix ({zero}, {ray})")));
            }
            let (z, lam, s0) = separatrix_start(q, zero, ray, theta);
            let zs = vec![q.zeros()[zero], z];
            let seg = TrajectorySegment {
                points: zs,
                arclength: vec![0.0, s0],
                lambdas: vec![Complex64::new(0.0, 0.0), lam],
                origin: Some((zero, ray)),
                phase: theta,
                terminus: Terminus::LengthCapped,
            };
            return continue_trajectory(q, seg, z, lam, s0, dir, cap, hit_radius, escape, opts);
        }
    };
    let seg = TrajectorySegment {
        points: vec![z],
        arclength: vec![s],
        lambdas: vec![lam],
        origin,
        phase: theta,
        terminus: Terminus::LengthCapped,
    };
    if s >= cap {
        return Ok(seg);
    }
    continue_trajectory(q, seg, z, lam, s, dir, cap, hit_radius, escape, opts)
}

#[allow(clippy::too_many_arguments)]
fn continue_trajectory(
    q: &QuadraticDifferential,
    mut seg: TrajectorySegment,
    mut z: Complex64,
    mut lam: Complex64,
    mut s: f64,
    dir: Complex64,
    cap: f64,
    hit_radius: f64,
    escape: f64,
    opts: &IntegrationOptions,
) -> Result<TrajectorySegment, GeometryError> {
    let origin_zero = seg.origin.map(|o| o.0);
    let zeros = q.zeros().to_vec();
    let step_limit = |z: Complex64, lam: Complex64| -> f64 {
        let d = zeros.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min);
        let room = d.min(1.0 + z.norm());
        0.2 * room * lam.norm()
    };
    let mut h = step_limit(z, lam).min(cap - s).max(1e-300);
    let mut steps = 0usize;
    while s < cap {
        steps += 1;
        if steps > opts.max_steps {
            return Err(GeometryError::StepCollapse(z));
        }
        h = h.min(step_limit(z, lam)).min(cap - s);
        if h <= 1e-15 * s.max(1e-12) {
            return Err(GeometryError::StepCollapse(z));
        }
        let mut k = [Complex64::new(0.0, 0.0); 7];
        let mut lam_stage = lam;
        for i in 0..7 {
            let mut zi = z;
            for j in 0..i {
                zi += k[j] * (A[i][j] * h);
            }
            lam_stage = q.sqrt_near(zi, lam_stage);
            if lam_stage.norm() == 0.0 {
                return Err(GeometryError::BranchAmbiguity(zi));
            }
            k[i] = dir / lam_stage;
        }
        let mut z5 = z;
        let mut z4 = z;
        for i in 0..7 {
            z5 += k[i] * (B5[i] * h);
            z4 += k[i] * (B4[i] * h);
        }
        let err = (z5 - z4).norm() / (1.0 + z.norm());
        let lam_new = q.sqrt_near(z5, lam);
        // reject steps that jump branches
        let branch_jump = (lam_new - lam).norm() > 0.5 * lam.norm().max(lam_new.norm());
        if err > opts.tol || branch_jump {
            let factor = if branch_jump { 0.25 } else { (0.9 * (opts.tol / err).powf(0.2)).max(0.1) };
            h *= factor;
            continue;
        }
        z = z5;
        lam = lam_new;
        s += h;
        seg.points.push(z);
        seg.arclength.push(s);
        seg.lambdas.push(lam);
        for (j, w) in zeros.iter().enumerate() {
            if Some(j) == origin_zero {
                continue;
            }
            if (z - w).norm() < hit_radius {
                seg.terminus = Terminus::HitZero(j);
                return Ok(seg);
            }
        }
        if z.norm() > escape {
            seg.terminus = Terminus::Escaped;
            return Ok(seg);
        }
        let grow = if err > 0.0 { (0.9 * (opts.tol / err).powf(0.2)).clamp(0.2, 5.0) } else { 5.0 };
        h *= grow;
    }
    seg.terminus = Terminus::LengthCapped;
    Ok(seg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_plane_gives_straight_segment() {
        let q = QuadraticDifferential::from_real(&[1.0]).unwrap();
        let start = TrajectoryStart::Point { z: Complex64::new(0.0, 0.0), branch: Complex64::new(1.0, 0.0) };
        let t = integrate_trajectory(&q, start, 0.0, 1.0, &IntegrationOptions::default()).unwrap();
        assert_eq!(t.terminus, Terminus::LengthCapped);
        assert!((t.end() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((t.length() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cube_root_separatrix_has_closed_form_length() {
        let q = QuadraticDifferential::from_real(&[0.0, 1.0]).unwrap();
        let start = TrajectoryStart::Separatrix { zero: 0, ray: 0 };
        let t = integrate_trajectory(&q, start, 0.0, 3.0, &IntegrationOptions::default()).unwrap();
        let r = t.end().norm();
        assert!((2.0 / 3.0 * r.powf(1.5) - t.length()).abs() < 1e-7, "{} vs {}", r, t.length());
        assert!(t.end().arg().abs() < 1e-6);
    }

    #[test]
    fn a1_separatrix_hits_other_zero() {
        let q = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let theta = PI / 2.0;
        let zero = q.zeros().iter().position(|z| z.re > 0.0).unwrap();
        let mut found = false;
        for ray in 0..3 {
            let t = integrate_trajectory(&q, TrajectoryStart::Separatrix { zero, ray }, theta, 10.0, &IntegrationOptions::default())
                .unwrap();
            if let Terminus::HitZero(_) = t.terminus {
                found = true;
                assert!((t.length() - PI / 2.0).abs() < 1e-3);
            }
        }
        assert!(found);
    }
}
