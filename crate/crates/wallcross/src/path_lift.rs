//! Homological path lifting `F(p, theta)`: trivial lifts plus detours along
//! the spectral network, the one-sided lifts `F^±` of rank-one local models,
//! composition of lifts and the wall identity `F^+ = K F^-`.
//!
//! Signs are kept in a normal form. A lifted path in the unit tangent bundle
//! is determined, up to homology on the surface, by its turning number
//! measured against the framing given by `lambda`. Modulo the winding
//! relation (a full fibre turn equals `-1`), every class carries the sign
//! `(-1)^k`, where `2 pi k` is the turning of the path minus the principal
//! angle between its end directions. Local models store their terms as
//! `x^n B` with `x = [gamma_0]` and a base class `B`, exactly as the detour
//! families are listed for each rank-one configuration.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flat_geometry::{
    build_network, period_with_end, Crossing, GeometryError, PeriodOptions, QuadraticDifferential, Terminus,
};
use crate::homology::{bps_cycle, HomologyError, RayKind};
use crate::lattice_algebra::{below_level, binomial_prefactor, BpsRay, Coeff, LatticeVector};

/// Two charges closer than this belong to the same class.
pub const CHARGE_MATCH_TOL: f64 = 1e-6;
/// Crossings with `|sin(angle)|` below this are rejected as tangential.
pub const TANGENCY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error("path meets the network tangentially at {0}")]
    Tangential(Complex64),
    #[error("phase {0} has a saddle connection below the truncation")]
    ActivePhase(f64),
    #[error("invalid local model: {0}")]
    InvalidModel(String),
    #[error("ray does not match the local model: {0}")]
    RayMismatch(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
}

/// Endpoint of a lifted path: a point of the base and one of its two preimages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub point: i64,
    pub sheet: u8,
}

/// Identifier of a base point given by its coordinates.
pub fn point_id(z: Complex64) -> i64 {
    let a = (z.re * 1e9).round() as i64;
    let b = (z.im * 1e9).round() as i64;
    a.wrapping_mul(1_000_000_007).wrapping_add(b)
}

/// Path class skeleton of a term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PathBase {
    /// A trivial lift of the path.
    Trivial,
    /// The shortest detour at the crossing point on the start sheet.
    Shortest,
    /// The short detour into the toral end.
    ToralShort,
    /// The long detour around the torus handle.
    ToralLong,
    /// A detour path found on the spectral network, with its number of elementary detours.
    Geometric { detours: u32 },
    /// A concatenation of unlike bases.
    Composite,
}

/// A signed path class.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignedPathClass {
    pub start: Endpoint,
    pub end: Endpoint,
    pub base: PathBase,
    /// Multiples of auxiliary closed classes; for local models the power of `[gamma_0]`.
    pub hclass: LatticeVector,
    pub sign: i8,
    pub charge: Complex64,
}

impl SignedPathClass {
    /// Homology classes agree when endpoints, auxiliary classes and charges
    /// agree; the base only records how a representative was found.
    fn same_class(&self, other: &SignedPathClass) -> bool {
        self.start == other.start
            && self.end == other.end
            && self.hclass == other.hclass
            && (self.charge - other.charge).norm() < CHARGE_MATCH_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftTerm {
    pub class: SignedPathClass,
    #[serde(serialize_with = "coeff_as_string")]
    pub coeff: Coeff,
}

fn coeff_as_string<S: serde::Serializer>(c: &Coeff, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

/// Truncated formal sum of signed path classes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftElement {
    pub terms: Vec<LiftTerm>,
    pub truncation_level: f64,
    pub translate: Complex64,
}

impl LiftElement {
    pub fn new(truncation_level: f64, translate: Complex64) -> Self {
        LiftElement { terms: Vec::new(), truncation_level, translate }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff * class`, moving the class sign into the coefficient and
    /// dropping terms at or above the truncation level.
    pub fn add(&mut self, class: SignedPathClass, coeff: Coeff) {
        if !below_level(class.charge.norm(), self.truncation_level) || coeff.is_zero() {
            return;
        }
        let mut class = class;
        let coeff = if class.sign < 0 { -coeff } else { coeff };
        class.sign = 1;
        if let Some(pos) = self.terms.iter().position(|t| t.class.same_class(&class)) {
            let c = &self.terms[pos].coeff + &coeff;
            if c.is_zero() {
                self.terms.remove(pos);
            } else {
                self.terms[pos].coeff = c;
            }
        } else {
            self.terms.push(LiftTerm { class, coeff });
        }
    }

    /// The terms from sheet `i` to sheet `j` (sheets of the endpoints).
    pub fn component(&self, i: u8, j: u8) -> LiftElement {
        let mut out = LiftElement::new(self.truncation_level, self.translate);
        out.terms = self.terms.iter().filter(|t| t.class.start.sheet == i && t.class.end.sheet == j).cloned().collect();
        out
    }

    /// `self - other`, term by term.
    pub fn minus(&self, other: &LiftElement) -> LiftElement {
        let mut out = self.clone();
        out.truncation_level = self.truncation_level.max(other.truncation_level);
        for t in &other.terms {
            out.add(t.class.clone(), -t.coeff.clone());
        }
        out
    }

    /// Exact equality of term sets and coefficients.
    pub fn equals(&self, other: &LiftElement) -> bool {
        self.minus(other).is_empty()
    }

    /// Whether every charge lies in `translate + cone(theta_lo, theta_hi)`.
    pub fn is_tame(&self, theta_lo: f64, theta_hi: f64) -> bool {
        self.terms.iter().all(|t| {
            let w = t.class.charge - self.translate;
            if w.norm() < 1e-12 {
                return true;
            }
            let a = (w.arg() - theta_lo).rem_euclid(2.0 * PI);
            a <= (theta_hi - theta_lo) + 1e-9
        })
    }

    /// Terms sorted deterministically.
    pub fn sorted(&self) -> Vec<LiftTerm> {
        let mut v = self.terms.clone();
        v.sort_by(|a, b| {
            (a.class.start, a.class.end, &a.class.base, &a.class.hclass)
                .cmp(&(b.class.start, b.class.end, &b.class.base, &b.class.hclass))
                .then(a.class.charge.re.total_cmp(&b.class.charge.re))
                .then(a.class.charge.im.total_cmp(&b.class.charge.im))
        });
        v
    }

    /// One line per term: `start -> end base hclass charge coeff`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for t in self.sorted() {
            s += &format!(
                "({},{}) -> ({},{}) {:?} {} Z={:.12e}{:+.12e}i coeff={}\n",
                t.class.start.point,
                t.class.start.sheet,
                t.class.end.point,
                t.class.end.sheet,
                t.class.base,
                t.class.hclass,
                t.class.charge.re,
                t.class.charge.im,
                t.coeff
            );
        }
        s
    }
}

fn combine_base(a: &PathBase, b: &PathBase) -> PathBase {
    match (a, b) {
        (PathBase::Trivial, x) | (x, PathBase::Trivial) => x.clone(),
        (PathBase::Geometric { detours: m }, PathBase::Geometric { detours: n }) => PathBase::Geometric { detours: m + n },
        _ => PathBase::Composite,
    }
}

fn combine_class(a: &LatticeVector, b: &LatticeVector) -> LatticeVector {
    if a.rank() == 0 {
        b.clone()
    } else if b.rank() == 0 || a.rank() != b.rank() {
        a.clone()
    } else {
        a + b
    }
}

/// Concatenation: every term of `a` followed by every composable term of `b`.
/// Incomposable pairs contribute zero.
pub fn compose_lifts(a: &LiftElement, b: &LiftElement) -> LiftElement {
    let mut out = LiftElement::new(a.truncation_level.min(b.truncation_level), a.translate + b.translate);
    for ta in &a.terms {
        for tb in &b.terms {
            if ta.class.end != tb.class.start {
                continue;
            }
            let class = SignedPathClass {
                start: ta.class.start,
                end: tb.class.end,
                base: combine_base(&ta.class.base, &tb.class.base),
                hclass: combine_class(&ta.class.hclass, &tb.class.hclass),
                sign: ta.class.sign * tb.class.sign,
                charge: ta.class.charge + tb.class.charge,
            };
            out.add(class, &ta.coeff * &tb.coeff);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// geometric lifts

/// Principal value in `(-pi, pi]`.
fn pv(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// The preimage label of `lambda` over `z`: sheet 1 is the principal square root.
fn sheet_label(q: &QuadraticDifferential, z: Complex64, lambda: Complex64) -> u8 {
    let r = q.eval(z).sqrt();
    if (lambda - r).norm_sqr() <= (lambda + r).norm_sqr() {
        1
    } else {
        2
    }
}

/// Options for [`lift_path_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct LiftOptions {
    /// Flat length of the network separatrices; by default half of
    /// truncation plus path length.
    pub cap: Option<f64>,
    /// Allow saddle trajectories in the network (used by the one-sided limits).
    pub allow_active: bool,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { cap: None, allow_active: false }
    }
}

/// A crossing of the path with `W^-`, in path coordinates.
#[derive(Clone, Debug)]
struct PathCrossing {
    t: f64,
    /// Sheet (relative to the continued branch) on which the point lies in `W^-`.
    sheet: i8,
    /// Flat distance from the zero.
    s: f64,
    /// `int lambda dz` along the separatrix from the zero to the crossing.
    sep_period: Complex64,
    /// Period of the continued branch from the path start.
    z_cont: Complex64,
    /// Continued branch at the crossing.
    lambda: Complex64,
    /// Direction of the path at the crossing.
    dir: Complex64,
    zero_hit: bool,
}

/// Precomputed data of a polyline path.
struct PathData {
    points: Vec<Complex64>,
    lam: Vec<Complex64>,
    z_cum: Vec<Complex64>,
    turning: f64,
    flat_length: f64,
}

fn path_data(q: &QuadraticDifferential, path: &[Complex64]) -> Result<PathData, LiftError> {
    if path.len() < 2 {
        return Err(LiftError::InvalidPath("need at least two points".into()));
    }
    for w in path.windows(2) {
        if (w[1] - w[0]).norm() == 0.0 {
            return Err(LiftError::InvalidPath("repeated point".into()));
        }
        for z0 in q.zeros() {
            let d = w[1] - w[0];
            let u = ((z0 - w[0]) * d.conj()).re / d.norm_sqr();
            let p = w[0] + d * u.clamp(0.0, 1.0);
            if (p - z0).norm() < 1e-9 * (1.0 + z0.norm()) {
                return Err(GeometryError::PathThroughZero(*z0).into());
            }
        }
    }
    let mut lam = vec![q.eval(path[0]).sqrt()];
    let mut z_cum = vec![Complex64::zero()];
    let mut turning = 0.0;
    let mut flat_length = 0.0;
    for i in 0..path.len() - 1 {
        let (a, b) = (path[i], path[i + 1]);
        let d = b - a;
        let (v, lb) = period_with_end(q, &[a, b], lam[i], &PeriodOptions::default())?;
        // turning of arg(lambda) along the segment, tracked continuously
        let mut n = 64usize;
        loop {
            let mut ok = true;
            let mut acc = 0.0;
            let mut len = 0.0;
            let mut prev = lam[i];
            for k in 1..=n {
                let z = a + d * (k as f64 / n as f64);
                let l = q.sqrt_near(z, prev);
                let step = pv(l.arg() - prev.arg());
                if step.abs() > 0.3 {
                    ok = false;
                    break;
                }
                acc += step;
                len += 0.5 * (l.norm() + prev.norm()) * d.norm() / n as f64;
                prev = l;
            }
            if ok {
                if (prev - lb).norm() > 1e-6 * (1.0 + lb.norm()) {
                    return Err(GeometryError::BranchAmbiguity(b).into());
                }
                turning += acc;
                flat_length += len;
                break;
            }
            n *= 4;
            if n > 1 << 16 {
                return Err(GeometryError::BranchAmbiguity(a).into());
            }
        }
        if i + 2 < path.len() {
            let d2 = path[i + 2] - b;
            turning += pv(d2.arg() - d.arg());
        }
        lam.push(lb);
        z_cum.push(z_cum[i] + v);
    }
    Ok(PathData { points: path.to_vec(), lam, z_cum, turning, flat_length })
}

impl PathData {
    fn direction(&self, seg: usize) -> Complex64 {
        let d = self.points[seg + 1] - self.points[seg];
        d / d.norm()
    }

    /// Continued period and branch at `seg + u`.
    fn at(&self, q: &QuadraticDifferential, seg: usize, u: f64) -> Result<(Complex64, Complex64), LiftError> {
        let a = self.points[seg];
        let p = a + (self.points[seg + 1] - a) * u;
        if u == 0.0 {
            return Ok((self.z_cum[seg], self.lam[seg]));
        }
        let (v, l) = period_with_end(q, &[a, p], self.lam[seg], &PeriodOptions::default())?;
        Ok((self.z_cum[seg] + v, l))
    }
}

fn path_crossings(
    q: &QuadraticDifferential,
    data: &PathData,
    theta: f64,
    cap: f64,
    allow_active: bool,
) -> Result<Vec<PathCrossing>, LiftError> {
    let net = build_network(q, theta, cap)?;
    if let Some((z, _, msg)) = net.failures.first() {
        return Err(LiftError::Inconclusive(format!("separatrix of zero {z} failed: {msg}")));
    }
    if !allow_active && net.plus_segments().any(|s| matches!(s.trajectory.terminus, Terminus::HitZero(_))) {
        return Err(LiftError::ActivePhase(theta));
    }
    let segs: Vec<_> = net.plus_segments().collect();
    let mut out = Vec::new();
    for c in net.crossings(&data.points) {
        let Crossing { path_param, point, separatrix, arclength, lambda, transversality } = c;
        if transversality.abs() < TANGENCY_TOL {
            return Err(LiftError::Tangential(point));
        }
        let seg = (path_param.floor() as usize).min(data.points.len() - 2);
        let u = path_param - seg as f64;
        let (z_cont, lam) = data.at(q, seg, u)?;
        // the separatrix is W^- on the sheet where lambda is opposite to its outgoing branch
        let sheet = if (lam + lambda).norm() < (lam - lambda).norm() { 1 } else { -1 };
        let traj = &segs[separatrix].trajectory;
        let k = traj.arclength.partition_point(|&a| a <= arclength).clamp(1, traj.points.len() - 1);
        let mut pts = traj.points[..k].to_vec();
        pts.push(point);
        let (sep_period, _) = period_with_end(q, &pts, traj.lambdas[1], &PeriodOptions::default())?;
        out.push(PathCrossing {
            t: path_param,
            sheet,
            s: arclength,
            sep_period,
            z_cont,
            lambda: lam,
            dir: data.direction(seg),
            zero_hit: matches!(segs[separatrix].trajectory.terminus, Terminus::HitZero(_)),
        });
    }
    Ok(out)
}

/// Turning of one elementary detour: into the zero, once around it, and back on the other sheet.
fn detour_turning(theta: f64, alpha: f64) -> f64 {
    pv(theta - alpha) + 2.0 * PI + pv(alpha + PI - theta)
}

struct LiftContext<'a> {
    q: &'a QuadraticDifferential,
    data: &'a PathData,
    crossings: &'a [PathCrossing],
    theta: f64,
    level: f64,
    start_point: i64,
    end_point: i64,
}

impl LiftContext<'_> {
    fn term(&self, s0: i8, chosen: &[usize]) -> Result<SignedPathClass, LiftError> {
        let d = self.data;
        let n_last = d.points.len() - 1;
        let mut charge = Complex64::zero();
        let mut sheet = s0 as f64;
        let mut z_prev = Complex64::zero();
        let mut tau = d.turning;
        for &k in chosen {
            let c = &self.crossings[k];
            charge += (c.z_cont - z_prev) * sheet + c.sep_period * 2.0;
            let alpha = (c.lambda * sheet * c.dir).arg();
            tau += detour_turning(self.theta, alpha);
            z_prev = c.z_cont;
            sheet = -sheet;
        }
        charge += (d.z_cum[n_last] - z_prev) * sheet;
        let lam0 = d.lam[0] * s0 as f64;
        let lam1 = d.lam[n_last] * sheet;
        let a_start = (lam0 * d.direction(0)).arg();
        let a_end = (lam1 * d.direction(n_last - 1)).arg();
        let rho = tau - (a_end - a_start);
        let k = (rho / (2.0 * PI)).round();
        if (rho - 2.0 * PI * k).abs() > 1e-3 {
            return Err(LiftError::Inconclusive(format!("turning defect {rho}")));
        }
        let sign = if (k as i64).rem_euclid(2) == 0 { 1 } else { -1 };
        let base = if chosen.is_empty() {
            PathBase::Trivial
        } else {
            PathBase::Geometric { detours: chosen.len() as u32 }
        };
        Ok(SignedPathClass {
            start: Endpoint { point: self.start_point, sheet: sheet_label(self.q, d.points[0], lam0) },
            end: Endpoint { point: self.end_point, sheet: sheet_label(self.q, d.points[n_last], lam1) },
            base,
            hclass: LatticeVector(vec![]),
            sign,
            charge,
        })
    }

    fn enumerate(
        &self,
        s0: i8,
        sheet: i8,
        next: usize,
        detour_len: f64,
        chosen: &mut Vec<usize>,
        out: &mut LiftElement,
    ) -> Result<(), LiftError> {
        let class = self.term(s0, chosen)?;
        out.add(class, Coeff::one());
        for k in next..self.crossings.len() {
            let c = &self.crossings[k];
            if c.sheet != sheet {
                continue;
            }
            let len = detour_len + 2.0 * c.s;
            if len - self.data.flat_length * 1.1 - 1e-9 >= self.level {
                continue;
            }
            chosen.push(k);
            self.enumerate(s0, -sheet, k + 1, len, chosen, out)?;
            chosen.pop();
        }
        Ok(())
    }
}

/// `F(p, theta)` truncated at `level`: trivial lifts and all detour terms.
pub fn lift_path(
    q: &QuadraticDifferential,
    path: &[Complex64],
    phase: f64,
    level: f64,
) -> Result<LiftElement, LiftError> {
    lift_path_with(q, path, phase, level, &LiftOptions::default())
}

pub fn lift_path_with(
    q: &QuadraticDifferential,
    path: &[Complex64],
    phase: f64,
    level: f64,
    opts: &LiftOptions,
) -> Result<LiftElement, LiftError> {
    if level <= 0.0 {
        return Err(LiftError::InvalidPath(format!("truncation must be positive, got {level}")));
    }
    let data = path_data(q, path)?;
    let cap = opts.cap.unwrap_or(0.5 * (level + 1.1 * data.flat_length) + 1e-6);
    let crossings = path_crossings(q, &data, phase, cap, opts.allow_active)?;
    lift_from_crossings(q, &data, &crossings, phase, level)
}

fn lift_from_crossings(
    q: &QuadraticDifferential,
    data: &PathData,
    crossings: &[PathCrossing],
    phase: f64,
    level: f64,
) -> Result<LiftElement, LiftError> {
    let ctx = LiftContext {
        q,
        data,
        crossings,
        theta: phase,
        level,
        start_point: point_id(data.points[0]),
        end_point: point_id(*data.points.last().unwrap()),
    };
    let translate = -Complex64::new(data.flat_length, 0.0) * Complex64::from_polar(1.0, phase);
    let mut out = LiftElement::new(level, translate);
    for s0 in [1i8, -1] {
        ctx.enumerate(s0, s0, 0, 0.0, &mut Vec::new(), &mut out)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// local models

/// Rank-one configuration of a local model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// One saddle connection between distinct zeros.
    SingleSaddle,
    /// Ring domain bounded by a closed saddle trajectory on each side.
    Cylinder,
    /// Ring domain with a toral end.
    ToralEnd,
    /// Degenerate ring domain; `toral` selects the variant with a toral end.
    DegenerateRing { toral: bool },
}

/// Position of the crossing of the test path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingType {
    /// A ray not adjacent to the saddle configuration.
    Generic,
    /// Incoming trajectory at angle `pi` to the saddle connection.
    AnglePi,
    /// Incoming trajectory at angle `2 pi` to the saddle connection.
    AngleTwoPi,
    /// On the (closed) saddle connection bounding the ring domain, or the single saddle.
    OnSaddle,
    /// On a critical trajectory ending on the ring domain boundary.
    Ray,
    /// On a saddle connection between the ring domain and the toral end.
    ToralSaddle,
    /// On an infinite ray inside the toral end.
    TorusRay,
}

/// Side of the wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

/// Endpoint identifiers and sheet labels used when a model is compared with geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEndpoints {
    pub start_point: i64,
    pub end_point: i64,
    /// Labels of model sheets 1 and 2 at the start.
    pub start_labels: [u8; 2],
    /// Labels of model sheets 1 and 2 at the end.
    pub end_labels: [u8; 2],
    /// Signs of the geometric classes identified with `P1, P2, D1, D2`.
    #[serde(default = "unit_signs")]
    pub base_signs: [i8; 4],
}

fn unit_signs() -> [i8; 4] {
    [1; 4]
}

impl Default for ModelEndpoints {
    fn default() -> Self {
        ModelEndpoints { start_point: 0, end_point: 1, start_labels: [1, 2], end_labels: [1, 2], base_signs: unit_signs() }
    }
}

/// Algebraic model of a path fragment crossing the network once near a rank-one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    pub kind: ModelKind,
    pub crossing: CrossingType,
    /// `Z(gamma_0)`.
    pub core_charge: Complex64,
    /// `Z` of the trivial lift on sheet 1.
    pub path_charge: Complex64,
    /// `Z` of the shortest detour starting on sheet 1.
    pub detour_charge: Complex64,
    /// `Z` of the shortest detour starting on sheet 2 (crossings on a saddle).
    pub detour_charge_2: Complex64,
    #[serde(default)]
    pub endpoints: ModelEndpoints,
}

/// Coefficient pattern of a detour family `sum_n c(n) x^n B`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Pattern {
    /// `B`.
    One,
    /// `B - x^k B`: shortest detour plus the long one.
    OneMinus(u64),
    /// `sum_n x^{k n} B`: a family of core twists.
    Geometric(u64),
    /// `sum_n (-x)^n B`: short and long twist families at a toral end.
    Alternating,
}

impl Pattern {
    fn coeff(self, n: u64) -> i64 {
        match self {
            Pattern::One => (n == 0) as i64,
            Pattern::OneMinus(k) => {
                if n == 0 {
                    1
                } else if n == k {
                    -1
                } else {
                    0
                }
            }
            Pattern::Geometric(k) => (n % k == 0) as i64,
            Pattern::Alternating => {
                if n % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

/// A family of terms in one component.
#[derive(Clone, Copy, Debug)]
struct Family {
    start: u8,
    end: u8,
    base: PathBase2,
    pattern: Pattern,
}

/// Bases of local models (sheets are part of the component).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PathBase2 {
    Trivial,
    Shortest,
    ToralShort,
    ToralLong,
}

impl PathBase2 {
    fn base(self) -> PathBase {
        match self {
            PathBase2::Trivial => PathBase::Trivial,
            PathBase2::Shortest => PathBase::Shortest,
            PathBase2::ToralShort => PathBase::ToralShort,
            PathBase2::ToralLong => PathBase::ToralLong,
        }
    }
}

const fn fam(start: u8, end: u8, base: PathBase2, pattern: Pattern) -> Family {
    Family { start, end, base, pattern }
}

impl LocalModel {
    /// Model with the default charges used by the fixtures.
    pub fn fixture(kind: ModelKind, crossing: CrossingType) -> Result<Self, LiftError> {
        let m = LocalModel {
            kind,
            crossing,
            core_charge: Complex64::new(1.0, 0.0),
            path_charge: Complex64::new(0.05, 0.3),
            detour_charge: Complex64::new(0.45, 0.0),
            detour_charge_2: Complex64::new(0.55, 0.0),
            endpoints: ModelEndpoints::default(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), LiftError> {
        use CrossingType::*;
        let ok = match self.kind {
            ModelKind::SingleSaddle => matches!(self.crossing, Generic | AnglePi | AngleTwoPi | OnSaddle),
            ModelKind::Cylinder | ModelKind::DegenerateRing { toral: false } => matches!(self.crossing, Generic | Ray | OnSaddle),
            ModelKind::ToralEnd => matches!(self.crossing, Generic | Ray | OnSaddle | ToralSaddle | TorusRay),
            ModelKind::DegenerateRing { toral: true } => matches!(self.crossing, Generic | ToralSaddle | TorusRay),
        };
        if !ok {
            return Err(LiftError::InvalidModel(format!("{:?} has no crossing {:?}", self.kind, self.crossing)));
        }
        if self.core_charge.norm() <= 0.0 {
            return Err(LiftError::InvalidModel("core charge must be nonzero".into()));
        }
        Ok(())
    }

    /// Charges of the toral-end saddle classes `(gamma_0, gamma_1, gamma_2)`.
    pub fn toral_charges(&self) -> (Complex64, Complex64, Complex64) {
        (self.core_charge, self.core_charge, self.core_charge * 2.0)
    }

    /// Expected BPS ray, in the auxiliary lattice spanned by `gamma_0, gamma_1, gamma_2`.
    pub fn bps_ray(&self, phase: f64) -> Result<BpsRay, LiftError> {
        let g = |i| LatticeVector::unit(3, i);
        let kind = match self.kind {
            ModelKind::SingleSaddle => RayKind::Case1 { gamma0: g(0) },
            ModelKind::Cylinder => RayKind::Case4a { gamma0: g(0), top: g(1), bottom: g(2) },
            ModelKind::DegenerateRing { toral: false } => RayKind::Case3a { gamma0: g(0), bottom: g(2) },
            ModelKind::DegenerateRing { toral: true } => RayKind::Case3b { gamma0: g(0), gamma1: g(1) },
            ModelKind::ToralEnd => RayKind::Case4b { gamma0: g(0), gamma1: g(1), gamma2: g(2) },
        };
        Ok(bps_cycle(&kind, phase)?)
    }

    /// Power of `x` carried by one twist around the ring domain core.
    fn core_step(&self) -> u64 {
        match self.kind {
            ModelKind::ToralEnd => 2,
            _ => 1,
        }
    }

    fn families(&self, side: Side) -> Vec<Family> {
        use CrossingType::*;
        use PathBase2::*;
        use Pattern::*;
        let plus = side == Side::Plus;
        let pick = |p: Pattern, m: Pattern| if plus { p } else { m };
        let trivial = [fam(1, 1, Trivial, One), fam(2, 2, Trivial, One)];
        let mut out: Vec<Family> = Vec::new();
        match (self.kind, self.crossing) {
            (_, Generic) => {
                out.extend(trivial);
                out.push(fam(1, 2, Shortest, One));
            }
            (ModelKind::SingleSaddle, AnglePi) => {
                out.extend(trivial);
                out.push(fam(1, 2, Shortest, pick(OneMinus(1), One)));
            }
            (ModelKind::SingleSaddle, AngleTwoPi) => {
                out.extend(trivial);
                out.push(fam(1, 2, Shortest, pick(One, OneMinus(1))));
            }
            (ModelKind::SingleSaddle, OnSaddle) => {
                out.push(fam(1, 2, Shortest, One));
                out.push(fam(2, 1, Shortest, One));
                // British double detour on sheet 1, American on sheet 2
                out.push(fam(1, 1, Trivial, pick(One, OneMinus(1))));
                out.push(fam(2, 2, Trivial, pick(OneMinus(1), One)));
            }
            (_, Ray) => {
                out.extend(trivial);
                out.push(fam(1, 2, Shortest, OneMinus(self.core_step())));
            }
            (_, OnSaddle) => {
                let k = self.core_step();
                out.push(fam(1, 2, Shortest, pick(One, Geometric(k))));
                out.push(fam(2, 1, Shortest, pick(Geometric(k), One)));
                out.push(fam(1, 1, Trivial, pick(Geometric(k), One)));
                out.push(fam(2, 2, Trivial, pick(One, Geometric(k))));
            }
            (_, ToralSaddle) => {
                out.push(fam(1, 2, Shortest, pick(One, Alternating)));
                out.push(fam(2, 1, Shortest, pick(Alternating, One)));
                out.push(fam(1, 1, Trivial, pick(Alternating, One)));
                out.push(fam(2, 2, Trivial, pick(One, Alternating)));
            }
            (_, TorusRay) => {
                out.extend(trivial);
                out.push(fam(1, 2, ToralShort, One));
                out.push(fam(1, 2, ToralLong, One));
            }
            (_, AnglePi) | (_, AngleTwoPi) => unreachable!("validated"),
        }
        out
    }

    /// Intersection numbers `<L(m gamma_0), B>` of a base in a component with
    /// each BPS cycle of the ray, in content order.
    fn intersections(&self, start: u8, end: u8, base: PathBase2) -> Vec<i64> {
        use CrossingType::*;
        let n_entries = match self.kind {
            ModelKind::ToralEnd | ModelKind::DegenerateRing { toral: true } => 2,
            _ => 1,
        };
        let mut out = vec![0i64; n_entries];
        // sign of the intersection for (P1, P2, D1, D2)
        let pattern = |s: [i64; 4]| -> i64 {
            match (start, end, base) {
                (1, 1, PathBase2::Trivial) => s[0],
                (2, 2, PathBase2::Trivial) => s[1],
                (1, 2, PathBase2::Shortest) => s[2],
                (2, 1, PathBase2::Shortest) => s[3],
                _ => 0,
            }
        };
        match (self.kind, self.crossing) {
            (ModelKind::SingleSaddle, AnglePi) => out[0] = pattern([0, 0, 1, 0]),
            (ModelKind::SingleSaddle, AngleTwoPi) => out[0] = pattern([0, 0, -1, 0]),
            (ModelKind::SingleSaddle, OnSaddle) => out[0] = pattern([-1, 1, 0, 0]),
            (ModelKind::Cylinder, OnSaddle) | (ModelKind::DegenerateRing { toral: false }, OnSaddle) => {
                out[0] = pattern([-1, 1, 1, -1])
            }
            (ModelKind::ToralEnd, OnSaddle) => out[1] = pattern([-1, 1, 1, -1]),
            (_, ToralSaddle) => {
                out[0] = pattern([1, -1, -1, 1]);
                out[1] = pattern([-1, 1, 1, -1]);
            }
            _ => {}
        }
        out
    }

    fn base_charge(&self, start: u8, _end: u8, base: PathBase2) -> Complex64 {
        match (base, start) {
            (PathBase2::Trivial, 1) => self.path_charge,
            (PathBase2::Trivial, _) => -self.path_charge,
            (PathBase2::Shortest, 1) => self.detour_charge,
            (PathBase2::Shortest, _) => self.detour_charge_2,
            (PathBase2::ToralShort, _) => self.detour_charge,
            (PathBase2::ToralLong, _) => self.detour_charge + self.core_charge,
        }
    }

    fn class(&self, start: u8, end: u8, base: PathBase2, n: u64) -> SignedPathClass {
        let e = &self.endpoints;
        SignedPathClass {
            start: Endpoint { point: e.start_point, sheet: e.start_labels[start as usize - 1] },
            end: Endpoint { point: e.end_point, sheet: e.end_labels[end as usize - 1] },
            base: base.base(),
            hclass: LatticeVector(vec![n as i64]),
            sign: 1,
            charge: self.base_charge(start, end, base) + self.core_charge * n as f64,
        }
    }

    /// Model sheets `(i, j)` of a term.
    fn model_sheets(&self, class: &SignedPathClass) -> (u8, u8) {
        let e = &self.endpoints;
        let i = if class.start.sheet == e.start_labels[0] { 1 } else { 2 };
        let j = if class.end.sheet == e.end_labels[0] { 1 } else { 2 };
        (i, j)
    }

    /// Sign taking a model term `x^n B` to the geometric normal form: the sign
    /// of the geometric class identified with `B` times `CORE_SIGN^n`.
    pub fn geometric_sign(&self, class: &SignedPathClass) -> i64 {
        let (i, _) = self.model_sheets(class);
        let idx = match (&class.base, i) {
            (PathBase::Trivial, 1) => 0,
            (PathBase::Trivial, _) => 1,
            (_, 1) => 2,
            (_, _) => 3,
        };
        let n = class.hclass.0.first().copied().unwrap_or(0);
        let mut sign = self.endpoints.base_signs[idx] as i64;
        if n.rem_euclid(2) == 1 {
            sign *= CORE_SIGN;
        }
        sign
    }

    /// Largest power of `x` that can stay below `level` on a base of charge `zb`.
    fn max_power(&self, zb: Complex64, level: f64) -> u64 {
        ((level + zb.norm()) / self.core_charge.norm()).ceil() as u64 + 1
    }
}

/// `F^±` of a local model, truncated at `level`.
pub fn lift_one_sided(model: &LocalModel, side: Side, level: f64) -> Result<LiftElement, LiftError> {
    model.validate()?;
    let mut out = LiftElement::new(level, model.path_charge.min_by_norm(-model.path_charge));
    for f in model.families(side) {
        let zb = model.base_charge(f.start, f.end, f.base);
        for n in 0..=model.max_power(zb, level) {
            let c = f.pattern.coeff(n);
            if c != 0 {
                out.add(model.class(f.start, f.end, f.base, n), Coeff::from_integer(c.into()));
            }
        }
    }
    Ok(out)
}

trait MinByNorm {
    fn min_by_norm(self, other: Self) -> Self;
}

impl MinByNorm for Complex64 {
    fn min_by_norm(self, other: Self) -> Self {
        if self.re <= other.re {
            self
        } else {
            other
        }
    }
}

/// Orientation of each ray entry relative to the model's expected BPS cycles:
/// `+1` if equal, `-1` if negated.
fn ray_orientation(model: &LocalModel, ray: &BpsRay) -> Result<Vec<i64>, LiftError> {
    let expected = model.bps_ray(ray.phase)?;
    if expected.content.len() != ray.content.len() {
        return Err(LiftError::RayMismatch(format!(
            "expected {} entries, got {}",
            expected.content.len(),
            ray.content.len()
        )));
    }
    let mut out = Vec::new();
    for (e, r) in expected.content.iter().zip(&ray.content) {
        if e.vector != r.vector {
            return Err(LiftError::RayMismatch(format!("vector {} vs {}", r.vector, e.vector)));
        }
        if e.cycle == r.cycle && e.omega == r.omega {
            out.push(1);
        } else if e.cycle == -&r.cycle && e.omega == -r.omega {
            out.push(-1);
        } else {
            return Err(LiftError::RayMismatch(format!("cycle {} vs {}", r.cycle, e.cycle)));
        }
    }
    Ok(out)
}

/// Applies the BPS automorphism of `ray` to a model lift: each term `x^n B`
/// is multiplied by `prod_e (1 - x^{m_e})^{sigma_e <L_e, B>}`.
pub fn apply_bps_automorphism(
    model: &LocalModel,
    ray: &BpsRay,
    element: &LiftElement,
) -> Result<LiftElement, LiftError> {
    let orient = ray_orientation(model, ray)?;
    let level = element.truncation_level;
    let mut out = LiftElement::new(level, element.translate);
    let multiples: Vec<u64> = ray.content.iter().map(|e| e.vector.0[0].unsigned_abs()).collect();
    for t in &element.terms {
        let base = match t.class.base {
            PathBase::Trivial => PathBase2::Trivial,
            PathBase::Shortest => PathBase2::Shortest,
            PathBase::ToralShort => PathBase2::ToralShort,
            PathBase::ToralLong => PathBase2::ToralLong,
            _ => return Err(LiftError::InvalidModel("geometric term in a model lift".into())),
        };
        let (start, end) = model.model_sheets(&t.class);
        let iota = model.intersections(start, end, base);
        let parts: Vec<(u64, i64)> = multiples.iter().zip(&iota).zip(&orient).map(|((m, i), s)| (*m, i * s)).collect();
        let n0 = t.class.hclass.0[0] as u64;
        let nmax = model.max_power(model.base_charge(start, end, base), level) as usize;
        let pref = binomial_prefactor(&parts, nmax);
        for (j, c) in pref.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let class = model.class(start, end, base, n0 + j as u64);
            out.add(class, &t.coeff * Coeff::from_integer(c.clone()));
        }
    }
    Ok(out)
}

/// Every built-in local model fixture: each model kind with each crossing type it admits.
pub fn model_fixtures() -> Vec<LocalModel> {
    use CrossingType::*;
    let kinds = [
        (ModelKind::SingleSaddle, vec![Generic, AnglePi, AngleTwoPi, OnSaddle]),
        (ModelKind::Cylinder, vec![Generic, Ray, OnSaddle]),
        (ModelKind::ToralEnd, vec![Generic, Ray, OnSaddle, ToralSaddle, TorusRay]),
        (ModelKind::DegenerateRing { toral: false }, vec![Generic, Ray, OnSaddle]),
        (ModelKind::DegenerateRing { toral: true }, vec![Generic, ToralSaddle, TorusRay]),
    ];
    kinds
        .into_iter()
        .flat_map(|(k, cs)| cs.into_iter().map(move |c| LocalModel::fixture(k, c).expect("built-in fixture is valid")))
        .collect()
}

/// Component-wise result of a wall identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WallCheck {
    pub components: Vec<((u8, u8), bool)>,
    pub passed: bool,
}

/// Checks `F^+ = K F^-` for a model (or `F^- = K^{-1} F^+` if the ray is the
/// inverse of the model's BPS ray), component by component.
pub fn wall_identity_components(model: &LocalModel, ray: &BpsRay, level: f64) -> Result<WallCheck, LiftError> {
    let orient = ray_orientation(model, ray)?;
    let forward = orient.iter().all(|&s| s == 1);
    if !forward && !orient.iter().all(|&s| s == -1) {
        return Err(LiftError::RayMismatch("mixed orientations".into()));
    }
    let plus = lift_one_sided(model, Side::Plus, level)?;
    let minus = lift_one_sided(model, Side::Minus, level)?;
    let (from, to) = if forward { (&minus, &plus) } else { (&plus, &minus) };
    let image = apply_bps_automorphism(model, ray, from)?;
    let mut components = Vec::new();
    for (i, j) in [(1u8, 1u8), (1, 2), (2, 1), (2, 2)] {
        let e = &model.endpoints;
        let (a, b) = (e.start_labels[i as usize - 1], e.end_labels[j as usize - 1]);
        let ok = image.component(a, b).equals(&to.component(a, b));
        components.push(((i, j), ok));
    }
    let passed = image.equals(to);
    Ok(WallCheck { components, passed })
}

/// `true` iff the BPS automorphism of `ray` maps `F^-` to `F^+` exactly below `level`.
pub fn wall_identity_check(model: &LocalModel, ray: &BpsRay, level: f64) -> Result<bool, LiftError> {
    Ok(wall_identity_components(model, ray, level)?.passed)
}

// ---------------------------------------------------------------------------
// one-sided limits

/// Outcome of comparing a geometric lift with a model lift.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitReport {
    pub plus: bool,
    pub minus: bool,
    pub matched_terms: usize,
}

/// Sign relating `x = [gamma_0]` in the model normal form to the framing
/// lift of the core loop used by the geometric normal form.
pub const CORE_SIGN: i64 = -1;

/// Matches the terms of a geometric lift with those of a model lift by
/// endpoints and charge; `None` if the term sets differ, an error if a
/// charge window holds two candidates.
fn match_lifts(geo: &LiftElement, model: &LiftElement, convert: Option<&LocalModel>) -> Result<Option<usize>, LiftError> {
    if geo.len() != model.len() {
        return Ok(None);
    }
    let mut used = vec![false; model.len()];
    for g in &geo.terms {
        let cands: Vec<usize> = model
            .terms
            .iter()
            .enumerate()
            .filter(|(_, m)| {
                m.class.start == g.class.start
                    && m.class.end == g.class.end
                    && (m.class.charge - g.class.charge).norm() < CHARGE_MATCH_TOL
            })
            .map(|(i, _)| i)
            .collect();
        match cands.len() {
            0 => return Ok(None),
            1 => {
                let i = cands[0];
                let m = &model.terms[i];
                let expected = if let Some(lm) = convert {
                    &m.coeff * Coeff::from_integer(lm.geometric_sign(&m.class).into())
                } else {
                    m.coeff.clone()
                };
                if used[i] || expected != g.coeff {
                    return Ok(None);
                }
                used[i] = true;
            }
            _ => return Err(LiftError::Inconclusive("two classes inside the charge window".into())),
        }
    }
    Ok(Some(geo.len()))
}

/// The local model of a path crossing the network of an active phase once on
/// a saddle connection between distinct zeros, with charges taken from the
/// geometry.
pub fn model_from_geometry(
    q: &QuadraticDifferential,
    phase: f64,
    path: &[Complex64],
    level: f64,
) -> Result<LocalModel, LiftError> {
    let data = path_data(q, path)?;
    let cap = 0.5 * (level + 1.1 * data.flat_length) + 1e-6;
    let crossings = path_crossings(q, &data, phase, cap, true)?;
    let on_saddle: Vec<&PathCrossing> = crossings.iter().filter(|c| c.zero_hit).collect();
    if crossings.len() != 2 || on_saddle.len() != 2 || (on_saddle[0].t - on_saddle[1].t).abs() > 1e-6 {
        return Err(LiftError::Inconclusive(format!(
            "path must cross exactly one saddle connection and nothing else ({} crossings)",
            crossings.len()
        )));
    }
    let e = Complex64::from_polar(1.0, phase);
    let n_last = data.points.len() - 1;
    let total = data.z_cum[n_last];
    let c0 = on_saddle[0];
    // intersection of the saddle class (oriented along e^{i phase}) with the continued lift
    let v = e / c0.lambda;
    let iota_cont = (v.conj() * c0.dir).im.signum() as i64;
    // model sheet 1 is the lift with intersection -1
    let s1: f64 = if iota_cont == -1 { 1.0 } else { -1.0 };
    let detour = |c: &PathCrossing| {
        let sh = c.sheet as f64;
        c.z_cont * sh + c.sep_period * 2.0 - (total - c.z_cont) * sh
    };
    let k1 = crossings
        .iter()
        .position(|c| c.sheet as f64 == s1)
        .ok_or_else(|| LiftError::Inconclusive("no crossing on sheet 1".into()))?;
    let k2 = crossings
        .iter()
        .position(|c| c.sheet as f64 == -s1)
        .ok_or_else(|| LiftError::Inconclusive("no crossing on sheet 2".into()))?;
    let (y1, y2) = (&crossings[k1], &crossings[k2]);
    // the base classes P1, P2, D1, D2 as geometric classes at the wall
    let ctx = LiftContext {
        q,
        data: &data,
        crossings: &crossings,
        theta: phase,
        level,
        start_point: point_id(data.points[0]),
        end_point: point_id(data.points[n_last]),
    };
    let sh1 = s1 as i8;
    let base_signs = [
        ctx.term(sh1, &[])?.sign,
        ctx.term(-sh1, &[])?.sign,
        ctx.term(sh1, &[k1])?.sign,
        ctx.term(-sh1, &[k2])?.sign,
    ];
    let lab = |z: Complex64, l: Complex64| sheet_label(q, z, l);
    let endpoints = ModelEndpoints {
        start_point: point_id(data.points[0]),
        end_point: point_id(data.points[n_last]),
        start_labels: [lab(data.points[0], data.lam[0] * s1), lab(data.points[0], -data.lam[0] * s1)],
        end_labels: [lab(data.points[n_last], data.lam[n_last] * s1), lab(data.points[n_last], -data.lam[n_last] * s1)],
        base_signs,
    };
    Ok(LocalModel {
        kind: ModelKind::SingleSaddle,
        crossing: CrossingType::OnSaddle,
        core_charge: (y1.sep_period + y2.sep_period) * 2.0,
        path_charge: total * s1,
        detour_charge: detour(y1),
        detour_charge_2: detour(y2),
        endpoints,
    })
}

/// Compares `F(p, theta_0 ± eps)` with the one-sided model lifts at `theta_0`.
///
/// If `theta_0` has no saddle below the truncation, both sides are compared
/// with `F(p, theta_0)` instead.
pub fn limit_check(
    q: &QuadraticDifferential,
    model_phase: f64,
    path: &[Complex64],
    eps: f64,
    level: f64,
) -> Result<LimitReport, LiftError> {
    let plus_geo = lift_path(q, path, model_phase + eps, level)?;
    let minus_geo = lift_path(q, path, model_phase - eps, level)?;
    let (plus_ref, minus_ref, model) = match lift_path(q, path, model_phase, level) {
        Ok(f) => (f.clone(), f, None),
        Err(LiftError::ActivePhase(_)) => {
            let model = model_from_geometry(q, model_phase, path, level)?;
            (lift_one_sided(&model, Side::Plus, level)?, lift_one_sided(&model, Side::Minus, level)?, Some(model))
        }
        Err(e) => return Err(e),
    };
    let p = match_lifts(&plus_geo, &plus_ref, model.as_ref())?;
    let m = match_lifts(&minus_geo, &minus_ref, model.as_ref())?;
    Ok(LimitReport { plus: p.is_some(), minus: m.is_some(), matched_terms: p.unwrap_or(0) + m.unwrap_or(0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_models() -> Vec<LocalModel> {
        model_fixtures()
    }

    #[test]
    fn every_model_satisfies_the_wall_identity() {
        for m in all_models() {
            let ray = m.bps_ray(0.0).unwrap();
            let r = wall_identity_components(&m, &ray, 7.3).unwrap();
            assert!(r.passed, "{:?} {:?}: {:?}", m.kind, m.crossing, r.components);
        }
    }

    #[test]
    fn inverse_ray_maps_plus_back_to_minus() {
        for m in all_models() {
            let ray = m.bps_ray(0.0).unwrap().inverse();
            assert!(wall_identity_check(&m, &ray, 7.3).unwrap(), "{:?} {:?}", m.kind, m.crossing);
        }
    }

    #[test]
    fn cylinder_twists_reach_five_orders() {
        let m = LocalModel::fixture(ModelKind::Cylinder, CrossingType::OnSaddle).unwrap();
        let minus = lift_one_sided(&m, Side::Minus, 6.3).unwrap();
        let twists = minus.component(1, 2).len();
        assert!(twists >= 6, "{twists}");
    }

    #[test]
    fn corrupted_intersection_breaks_the_identity() {
        let m = LocalModel::fixture(ModelKind::SingleSaddle, CrossingType::AnglePi).unwrap();
        let mut ray = m.bps_ray(0.0).unwrap();
        ray.content[0].omega = 2;
        assert!(wall_identity_check(&m, &ray, 5.0).is_err());
        let m2 = LocalModel::fixture(ModelKind::SingleSaddle, CrossingType::AngleTwoPi).unwrap();
        let plus = lift_one_sided(&m2, Side::Plus, 5.0).unwrap();
        let minus = lift_one_sided(&m2, Side::Minus, 5.0).unwrap();
        assert!(!plus.equals(&minus));
    }

    #[test]
    fn toral_charges_satisfy_the_relation() {
        let m = LocalModel::fixture(ModelKind::ToralEnd, CrossingType::ToralSaddle).unwrap();
        let (g0, g1, g2) = m.toral_charges();
        assert_eq!(g2, g1 * 2.0);
        assert_eq!(g1, g0);
    }

    #[test]
    fn incomposable_pairs_give_zero() {
        let m = LocalModel::fixture(ModelKind::SingleSaddle, CrossingType::Generic).unwrap();
        let a = lift_one_sided(&m, Side::Plus, 5.0).unwrap();
        // endpoint ids 0 -> 1; composing with itself needs 1 -> 0
        assert!(compose_lifts(&a, &a).is_empty());
    }

    #[test]
    fn pv_wraps_into_half_open_interval() {
        assert!((pv(3.0 * PI) - PI).abs() < 1e-12);
        assert!((pv(-PI) - PI).abs() < 1e-12);
        assert!((pv(0.5) - 0.5).abs() < 1e-12);
    }
}
