//! Active-ray detection by a phase sweep over a sector.
//!
//! Each separatrix carries a discrete invariant (the asymptotic direction it
//! escapes into, or the zero it hits). It can only change where the
//! separatrix runs into a zero, i.e. at a saddle connection. Changes between
//! grid samples are bisected, and the connection's period is then computed
//! by quadrature along the near-critical trajectory.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    escape_index, integrate_trajectory, period_with_end, GeometryError, IntegrationOptions, PeriodOptions,
    QuadraticDifferential, Terminus, TrajectoryStart,
};
use crate::lattice_algebra::{LatticeVector, Sector};

/// Options for [`scan_active_rays`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    /// Initial number of phase samples across the sector.
    pub samples: usize,
    /// Target width of bisected phase intervals.
    pub tol_phase: f64,
    pub integration: IntegrationOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { samples: 720, tol_phase: 1e-12, integration: IntegrationOptions::default() }
    }
}

/// A saddle connection found by the scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaddleConnection {
    pub start_zero: usize,
    pub end_zero: usize,
    pub phase: f64,
    /// Period of `sqrt(q)` along the connection, on the sheet where it has phase `phase`.
    pub charge: Complex64,
    /// Period of the hat-homology lift (twice `charge`).
    pub hat_charge: Complex64,
    pub lattice_class: Option<LatticeVector>,
    /// Polyline from `start_zero` to `end_zero`.
    pub path: Vec<Complex64>,
}

/// An active phase with its connections.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActiveRay {
    pub phase: f64,
    pub connections: Vec<SaddleConnection>,
}

/// A phase interval where the invariant could not be resolved.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnresolvedPhase {
    pub lo: f64,
    pub hi: f64,
    pub reason: String,
}

/// Outcome of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Default)]
pub struct ScanResult {
    /// Active rays with every connection satisfying `|hat charge| <= cap`.
    pub rays: Vec<ActiveRay>,
    /// Connections that were detected but exceed the cap.
    pub beyond_cap: Vec<SaddleConnection>,
    pub unresolved: Vec<UnresolvedPhase>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Invariant {
    Escape(usize),
    Hit(usize),
    Failed,
}

fn invariant(q: &QuadraticDifferential, zero: usize, ray: usize, theta: f64, opts: &IntegrationOptions) -> Invariant {
    match integrate_trajectory(q, TrajectoryStart::Separatrix { zero, ray }, theta, 1e12, opts) {
        Ok(t) => match t.terminus {
            Terminus::Escaped => Invariant::Escape(escape_index(q, theta, t.end())),
            Terminus::HitZero(j) => Invariant::Hit(j),
            Terminus::LengthCapped => Invariant::Failed,
        },
        Err(_) => Invariant::Failed,
    }
}

/// Sweeps the sector for saddle connections with `|hat charge| <= cap`.
pub fn scan_active_rays(
    q: &QuadraticDifferential,
    sector: &Sector,
    cap: f64,
    tol_phase: f64,
) -> Result<ScanResult, GeometryError> {
    let opts = ScanOptions { tol_phase, ..ScanOptions::default() };
    scan_with_options(q, sector, cap, &opts)
}

/// [`scan_active_rays`] with explicit options.
pub fn scan_with_options(
    q: &QuadraticDifferential,
    sector: &Sector,
    cap: f64,
    opts: &ScanOptions,
) -> Result<ScanResult, GeometryError> {
    sector.validate().map_err(|e| GeometryError::InvalidInput(e.to_string()))?;
    if cap <= 0.0 {
        return Err(GeometryError::InvalidInput(format!("cap must be positive, got {cap}")));
    }
    let nz = q.zeros().len();
    if nz < 2 {
        return Ok(ScanResult::default());
    }
    let n = opts.samples.max(2);
    let (lo, hi) = (sector.theta_lo, sector.theta_hi);
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let seps: Vec<(usize, usize)> = (0..nz).flat_map(|z| (0..3).map(move |r| (z, r))).collect();
    let table: Vec<Vec<Invariant>> = grid
        .par_iter()
        .map(|&th| seps.iter().map(|&(z, r)| invariant(q, z, r, th, &opts.integration)).collect())
        .collect();

    // collect phase events (separatrix, theta) by bisection
    let mut events: Vec<(usize, f64)> = Vec::new();
    let mut unresolved = Vec::new();
    let mut jobs: Vec<(usize, f64, f64, Invariant, Invariant)> = Vec::new();
    for (si, _) in seps.iter().enumerate() {
        for i in 0..n {
            let inv = table[i][si];
            if let Invariant::Hit(_) = inv {
                events.push((si, grid[i]));
            }
            if inv == Invariant::Failed {
                unresolved.push(UnresolvedPhase { lo: grid[i], hi: grid[i], reason: "separatrix integration failed".into() });
            }
            if i + 1 < n {
                let next = table[i + 1][si];
                let is_event = |x: Invariant| matches!(x, Invariant::Escape(_));
                if inv != next && is_event(inv) && is_event(next) {
                    jobs.push((si, grid[i], grid[i + 1], inv, next));
                }
            }
        }
    }
    let results: Vec<(Vec<(usize, f64)>, Vec<UnresolvedPhase>)> = jobs
        .par_iter()
        .map(|&(si, a, b, ia, ib)| {
            let (z, r) = seps[si];
            bisect(q, z, r, si, a, b, ia, ib, opts, 0)
        })
        .collect();
    for (ev, un) in results {
        events.extend(ev);
        unresolved.extend(un);
    }

    // turn events into connections
    let conns: Vec<Result<SaddleConnection, GeometryError>> = events
        .par_iter()
        .map(|&(si, th)| {
            let (z, r) = seps[si];
            connection_at(q, z, r, th, &opts.integration)
        })
        .collect();
    let mut found: Vec<SaddleConnection> = Vec::new();
    for c in conns {
        match c {
            Ok(c) => {
                if !sector.contains_phase(c.phase) {
                    continue;
                }
                let dup = found.iter().any(|f| {
                    let same_pair = (f.start_zero == c.start_zero && f.end_zero == c.end_zero)
                        || (f.start_zero == c.end_zero && f.end_zero == c.start_zero);
                    same_pair && (f.charge - c.charge).norm() < 1e-6 * (1.0 + c.charge.norm())
                });
                if !dup {
                    found.push(c);
                }
            }
            Err(e) => unresolved.push(UnresolvedPhase { lo, hi, reason: format!("connection refinement failed: {e}") }),
        }
    }
    found.sort_by(|a, b| sector.relative(a.phase).total_cmp(&sector.relative(b.phase)));
    let (inside, beyond): (Vec<_>, Vec<_>) = found.into_iter().partition(|c| c.hat_charge.norm() <= cap);
    let mut rays: Vec<ActiveRay> = Vec::new();
    for c in inside {
        match rays.last_mut() {
            Some(r) if (sector.relative(r.phase) - sector.relative(c.phase)).abs() < 1e-7 => r.connections.push(c),
            _ => rays.push(ActiveRay { phase: c.phase, connections: vec![c] }),
        }
    }
    Ok(ScanResult { rays, beyond_cap: beyond, unresolved })
}

#[allow(clippy::too_many_arguments)]
fn bisect(
    q: &QuadraticDifferential,
    zero: usize,
    ray: usize,
    si: usize,
    mut a: f64,
    mut b: f64,
    ia: Invariant,
    ib: Invariant,
    opts: &ScanOptions,
    depth: usize,
) -> (Vec<(usize, f64)>, Vec<UnresolvedPhase>) {
    let mut events = Vec::new();
    let mut unresolved = Vec::new();
    while b - a > opts.tol_phase {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let im = invariant(q, zero, ray, m, &opts.integration);
        match im {
            Invariant::Hit(_) => {
                events.push((si, m));
                return (events, unresolved);
            }
            Invariant::Failed => {
                unresolved.push(UnresolvedPhase { lo: a, hi: b, reason: "integration failed during bisection".into() });
                return (events, unresolved);
            }
            x if x == ia => a = m,
            x if x == ib => b = m,
            _ => {
                // a third value: two events inside the interval
                if depth > 8 {
                    unresolved.push(UnresolvedPhase { lo: a, hi: b, reason: "invariant flickers".into() });
                    return (events, unresolved);
                }
                let (e1, u1) = bisect(q, zero, ray, si, a, m, ia, im, opts, depth + 1);
                let (e2, u2) = bisect(q, zero, ray, si, m, b, im, ib, opts, depth + 1);
                events.extend(e1);
                events.extend(e2);
                unresolved.extend(u1);
                unresolved.extend(u2);
                return (events, unresolved);
            }
        }
    }
    events.push((si, 0.5 * (a + b)));
    (events, unresolved)
}

/// Integrates the separatrix at `theta` and closes it up at the zero it
/// passes closest to; the period is computed by quadrature.
fn connection_at(
    q: &QuadraticDifferential,
    zero: usize,
    ray: usize,
    theta: f64,
    opts: &IntegrationOptions,
) -> Result<SaddleConnection, GeometryError> {
    let t = integrate_trajectory(q, TrajectoryStart::Separatrix { zero, ray }, theta, 1e12, opts)?;
    let mut best: Option<(usize, usize, f64)> = None;
    for (j, w) in q.zeros().iter().enumerate() {
        if j == zero {
            continue;
        }
        for (k, p) in t.points.iter().enumerate() {
            let d = (p - w).norm();
            if best.is_none_or(|b| d < b.2) {
                best = Some((j, k, d));
            }
        }
    }
    let (j, k, d) = best.ok_or_else(|| GeometryError::InvalidInput("no partner zero".into()))?;
    if d > 1e-2 * q.min_zero_distance() {
        return Err(GeometryError::InvalidInput(format!("separatrix misses zero {j} by {d}")));
    }
    let mut path: Vec<Complex64> = t.points[..=k].to_vec();
    path.push(q.zeros()[j]);
    let (charge, _) = period_with_end(q, &path, t.lambdas[1], &PeriodOptions::default())?;
    Ok(SaddleConnection {
        start_zero: zero,
        end_zero: j,
        phase: normalize_like(charge.arg(), theta),
        charge,
        hat_charge: charge * 2.0,
        lattice_class: None,
        path,
    })
}

/// Representative of `angle` modulo `2 pi` closest to `reference`.
fn normalize_like(angle: f64, reference: f64) -> f64 {
    let k = ((reference - angle) / (2.0 * PI)).round();
    angle + 2.0 * PI * k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a1_has_one_active_ray() {
        let q = QuadraticDifferential::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let s = Sector::new(PI / 4.0, 3.0 * PI / 4.0).unwrap();
        let opts = ScanOptions { samples: 90, ..ScanOptions::default() };
        let r = scan_with_options(&q, &s, 5.0, &opts).unwrap();
        assert_eq!(r.rays.len(), 1);
        let c = &r.rays[0].connections[0];
        assert!((r.rays[0].phase - PI / 2.0).abs() < 1e-8);
        assert!((c.charge.norm() - PI / 2.0).abs() < 1e-6);
        assert!((c.hat_charge - Complex64::new(0.0, PI)).norm() < 1e-6);
    }

    #[test]
    fn single_zero_has_empty_spectrum() {
        let q = QuadraticDifferential::from_real(&[0.0, 1.0]).unwrap();
        let s = Sector::new(0.1, 2.0).unwrap();
        assert!(scan_active_rays(&q, &s, 10.0, 1e-12).unwrap().rays.is_empty());
    }
}
