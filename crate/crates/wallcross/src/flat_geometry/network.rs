//! Truncated spectral networks `W_{theta, L}` and their crossings with paths.

use num_complex::Complex64;
use serde::Serialize;

use super::{integrate_trajectory, GeometryError, IntegrationOptions, QuadraticDifferential, Terminus, TrajectorySegment, TrajectoryStart};

/// Orientation class of a network segment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// Outgoing from the zero: `lambda dz` along `e^{i theta}` moving away.
    Plus,
    /// Incoming to the zero: on the opposite sheet, `lambda dz` along `e^{i theta}` moving in.
    Minus,
}

/// One separatrix of the network on one sheet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkSegment {
    pub trajectory: TrajectorySegment,
    pub orientation: Orientation,
    /// True if the separatrix ends on a higher-indexed zero; each saddle
    /// trajectory is flagged once.
    pub saddle: bool,
}

/// Transverse intersection of a user path with a network separatrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Crossing {
    /// Position along the path: segment index plus fraction in `[0, 1)`.
    pub path_param: f64,
    pub point: Complex64,
    /// Index of the separatrix among the `Plus` segments.
    pub separatrix: usize,
    /// Flat distance from the zero to the crossing point.
    pub arclength: f64,
    /// Branch of `sqrt(P)` on the `Plus` sheet at the crossing.
    pub lambda: Complex64,
    /// Sine of the angle between path and separatrix.
    pub transversality: f64,
}

/// The critical trajectories of phase `theta` up to flat length `cap`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralNetwork {
    pub phase: f64,
    pub cap: f64,
    pub zeros: Vec<Complex64>,
    pub segments: Vec<NetworkSegment>,
    /// Separatrices that failed to integrate, as `(zero, ray, message)`.
    pub failures: Vec<(usize, usize, String)>,
}

impl SpectralNetwork {
    /// The outgoing separatrices, one per `(zero, ray)`.
    pub fn plus_segments(&self) -> impl Iterator<Item = &NetworkSegment> {
        self.segments.iter().filter(|s| s.orientation == Orientation::Plus)
    }

    pub fn saddle_segments(&self) -> impl Iterator<Item = &NetworkSegment> {
        self.plus_segments().filter(|s| s.saddle)
    }

    /// All transverse crossings of `path` with the network, ordered along the path.
    pub fn crossings(&self, path: &[Complex64]) -> Vec<Crossing> {
        let mut out = Vec::new();
        for (si, seg) in self.plus_segments().enumerate() {
            let t = &seg.trajectory;
            for k in 0..t.points.len().saturating_sub(1) {
                let (c0, c1) = (t.points[k], t.points[k + 1]);
                for i in 0..path.len().saturating_sub(1) {
                    let (p0, p1) = (path[i], path[i + 1]);
                    if let Some((u, v)) = segment_intersection(p0, p1, c0, c1) {
                        let dp = p1 - p0;
                        let dc = c1 - c0;
                        let sin = (dp.conj() * dc).im / (dp.norm() * dc.norm());
                        let lam = t.lambdas[k] + (t.lambdas[k + 1] - t.lambdas[k]) * v;
                        let lam = if k == 0 { t.lambdas[1] } else { lam };
                        out.push(Crossing {
                            path_param: i as f64 + u,
                            point: p0 + dp * u,
                            separatrix: si,
                            arclength: t.arclength[k] + (t.arclength[k + 1] - t.arclength[k]) * v,
                            lambda: lam,
                            transversality: sin,
                        });
                    }
                }
            }
        }
        out.sort_by(|a, b| a.path_param.total_cmp(&b.path_param).then(a.separatrix.cmp(&b.separatrix)));
        out
    }
}

/// Intersection parameters `(u, v)` of segments `p0p1` and `c0c1`, half-open in `u` and `v`.
pub(crate) fn segment_intersection(p0: Complex64, p1: Complex64, c0: Complex64, c1: Complex64) -> Option<(f64, f64)> {
    let d1 = p1 - p0;
    let d2 = c1 - c0;
    let denom = (d1.conj() * d2).im;
    if denom.abs() < 1e-300 {
        return None;
    }
    let w = c0 - p0;
    let u = (w.conj() * d2).im / denom;
    let v = (w.conj() * d1).im / denom;
    if (0.0..1.0).contains(&u) && (0.0..1.0).contains(&v) {
        Some((u, v))
    } else {
        None
    }
}

/// Grows all separatrices of phase `theta` up to flat length `cap`, in both
/// orientation classes.
pub fn build_network(q: &QuadraticDifferential, theta: f64, cap: f64) -> Result<SpectralNetwork, GeometryError> {
    build_network_with(q, theta, cap, &IntegrationOptions::default())
}

pub(crate) fn build_network_with(
    q: &QuadraticDifferential,
    theta: f64,
    cap: f64,
    opts: &IntegrationOptions,
) -> Result<SpectralNetwork, GeometryError> {
    if cap <= 0.0 {
        return Err(GeometryError::InvalidInput(format!("cap must be positive, got {cap}")));
    }
    let mut plus = Vec::new();
    let mut failures = Vec::new();
    for zero in 0..q.zeros().len() {
        for ray in 0..3 {
            match integrate_trajectory(q, TrajectoryStart::Separatrix { zero, ray }, theta, cap, opts) {
                Ok(t) => {
                    // each saddle connection is reported once, from its lower-indexed zero
                    let saddle = matches!(t.terminus, Terminus::HitZero(j) if j > zero);
                    plus.push(NetworkSegment { trajectory: t, orientation: Orientation::Plus, saddle });
                }
                Err(e) => failures.push((zero, ray, e.to_string())),
            }
        }
    }
    let minus: Vec<NetworkSegment> = plus
        .iter()
        .map(|s| {
            let mut t = s.trajectory.clone();
            for l in t.lambdas.iter_mut() {
                *l = -*l;
            }
            NetworkSegment { trajectory: t, orientation: Orientation::Minus, saddle: s.saddle }
        })
        .collect();
    let mut segments = plus;
    segments.extend(minus);
    Ok(SpectralNetwork { phase: theta, cap, zeros: q.zeros().to_vec(), segments, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_zero_network_escapes() {
        let q = QuadraticDifferential::from_real(&[0.0, 1.0]).unwrap();
        let n = build_network(&q, 0.3, 50.0).unwrap();
        assert_eq!(n.plus_segments().count(), 3);
        assert_eq!(n.segments.iter().filter(|s| s.orientation == Orientation::Minus).count(), 3);
        assert!(n.plus_segments().all(|s| s.trajectory.terminus == Terminus::Escaped));
    }

    #[test]
    fn a1_network_has_saddle_only_at_vertical_phase() {
        let q = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let n = build_network(&q, PI / 2.0, 10.0).unwrap();
        assert_eq!(n.saddle_segments().count(), 1);
        let n0 = build_network(&q, 0.0, 10.0).unwrap();
        assert_eq!(n0.saddle_segments().count(), 0);
    }

    #[test]
    fn crossing_of_straight_lines() {
        let r = segment_intersection(
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
        )
        .unwrap();
        assert!((r.0 - 0.5).abs() < 1e-15 && (r.1 - 0.5).abs() < 1e-15);
    }
}
