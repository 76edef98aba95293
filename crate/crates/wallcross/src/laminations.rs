//! A0-lamination coordinates on triangulated ciliated discs, closed-form
//! lifts of the elementary laminations into the twisted torus algebra, and
//! the iteration approximating a generator by polynomials in those lifts.
//!
//! Laminations are stored combinatorially: a side number `n~_e` per edge
//! (half the number of marked points on it), the arc counts inside each
//! triangle, and the weights of the peripheral curves around cilia and holes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::homology::{HatBasis, HomologyError, Triangulation};
use crate::lattice_algebra::{twist_sign, AlgebraError, ChargeLattice, Coeff, LatticeVector, TwistedSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaminationError {
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("coordinate vector has {got} entries, triangulation has {expected} interior edges")]
    WrongLength { expected: usize, got: usize },
    #[error("weighted crossing count {count} on edge {edge} is odd")]
    HalfInteger { edge: usize, count: i64 },
    #[error("inconsistent lamination: {0}")]
    Inconsistent(String),
    #[error("edge {0} is not an interior edge")]
    NotInterior(usize),
    #[error("hat charges must lie in the upper half plane; edge {0} has {1}")]
    NotNormalized(usize, Complex64),
    #[error("defect term of positive degree {0} > 1")]
    PositiveDegree(i64),
    #[error("approximation did not terminate after {0} steps")]
    NoConvergence(usize),
    #[error("invalid hole data: {0}")]
    InvalidHoles(String),
}

/// Triangulated disc with cilia at the polygon vertices; vertices listed in
/// `holes` are treated as holes (closed peripheral curves).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiliatedSurface {
    pub triangulation: Triangulation,
    pub holes: Vec<usize>,
}

impl CiliatedSurface {
    pub fn disc(triangulation: Triangulation) -> Self {
        CiliatedSurface { triangulation, holes: Vec::new() }
    }

    /// Number of cilia on the boundary.
    pub fn cilia(&self) -> usize {
        self.triangulation.n_vertices - self.holes.len()
    }
}

/// Integer coordinates on the interior edges, in basis order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCoordinates {
    pub values: Vec<i64>,
}

/// Combinatorial A0-lamination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lamination {
    /// Half the number of marked points on each edge (all edges, edge order).
    pub side_numbers: Vec<i64>,
    /// Per triangle, `arcs[i]` joins side `i` and side `i + 1 (mod 3)`,
    /// where side `i` is the edge `v_i v_{i+1}`.
    pub arcs: Vec<[u64; 3]>,
    /// Peripheral curves `(vertex, weight)` around cilia and holes.
    pub peripheral: Vec<(usize, i64)>,
    pub shift: i64,
}

fn triangle_inequalities(t: &Triangulation, side: &[i64]) -> bool {
    t.triangle_edges.iter().all(|te| {
        let n = [side[te[0]], side[te[1]], side[te[2]]];
        (0..3).all(|i| {
            let (a, b, c) = (n[i], n[(i + 1) % 3], n[(i + 2) % 3]);
            c >= 0 && (a - b).abs() <= c && c <= a + b
        })
    })
}

fn side_numbers(t: &Triangulation, n: &EdgeCoordinates, shift: i64) -> Vec<i64> {
    let mut side = vec![shift; t.edges.len()];
    for (k, &e) in t.interior.iter().enumerate() {
        side[e] = n.values[k] + shift;
    }
    side
}

/// The smallest shift `s >= 0` for which the shifted side numbers satisfy
/// all triangle inequalities.
pub fn minimal_shift(n: &EdgeCoordinates, t: &Triangulation) -> Result<i64, LaminationError> {
    if n.values.len() != t.interior.len() {
        return Err(LaminationError::WrongLength { expected: t.interior.len(), got: n.values.len() });
    }
    let bound: i64 = n.values.iter().map(|v| v.abs()).sum::<i64>() * 2 + 1;
    (0..=bound)
        .find(|&s| triangle_inequalities(t, &side_numbers(t, n, s)))
        .ok_or_else(|| LaminationError::Inconsistent("no feasible shift".into()))
}

/// The lamination with coordinates `n`, built with the minimal shift.
pub fn lamination_from_coordinates(n: &EdgeCoordinates, t: &Triangulation) -> Result<Lamination, LaminationError> {
    let s = minimal_shift(n, t)?;
    lamination_with_shift(n, t, s)
}

/// The lamination with coordinates `n` built with shift `s`: `2 (n_e + s)`
/// points per edge, the non-crossing arc system in each triangle and a
/// peripheral curve of weight `-s` around every cilium and hole.
pub fn lamination_with_shift(n: &EdgeCoordinates, t: &Triangulation, s: i64) -> Result<Lamination, LaminationError> {
    if n.values.len() != t.interior.len() {
        return Err(LaminationError::WrongLength { expected: t.interior.len(), got: n.values.len() });
    }
    let side = side_numbers(t, n, s);
    if !triangle_inequalities(t, &side) {
        return Err(LaminationError::Inconsistent(format!("shift {s} violates a triangle inequality")));
    }
    // with 2 n~ points per side, sides i and i+1 are joined by n~_i + n~_{i+1} - n~_{i+2} arcs
    let arcs = t
        .triangle_edges
        .iter()
        .map(|te| {
            let m = [side[te[0]], side[te[1]], side[te[2]]];
            let mut a = [0u64; 3];
            for i in 0..3 {
                a[i] = (m[i] + m[(i + 1) % 3] - m[(i + 2) % 3]) as u64;
            }
            a
        })
        .collect();
    let peripheral = if s == 0 { Vec::new() } else { (0..t.n_vertices).map(|v| (v, -s)).collect() };
    Ok(Lamination { side_numbers: side, arcs, peripheral, shift: s })
}

/// Half the weighted number of intersections with each interior edge.
pub fn coordinates_from_lamination(lam: &Lamination, t: &Triangulation) -> Result<EdgeCoordinates, LaminationError> {
    if lam.arcs.len() != t.triangles.len() {
        return Err(LaminationError::Inconsistent("arc table does not match the triangulation".into()));
    }
    // points on each edge as seen from each adjacent triangle
    let mut points: Vec<Option<i64>> = vec![None; t.edges.len()];
    for (tri, te) in t.triangle_edges.iter().enumerate() {
        let a = lam.arcs[tri];
        for i in 0..3 {
            let p = (a[i] + a[(i + 2) % 3]) as i64;
            match points[te[i]] {
                None => points[te[i]] = Some(p),
                Some(q) if q == p => {}
                Some(q) => {
                    return Err(LaminationError::Inconsistent(format!(
                        "edge {} has {q} and {p} points on its two sides",
                        te[i]
                    )))
                }
            }
        }
    }
    let mut weight_at = vec![0i64; t.n_vertices];
    for &(v, w) in &lam.peripheral {
        if v >= t.n_vertices {
            return Err(LaminationError::Inconsistent(format!("peripheral curve around missing vertex {v}")));
        }
        weight_at[v] += w;
    }
    let mut values = Vec::with_capacity(t.interior.len());
    for &e in &t.interior {
        let (a, b) = t.edges[e];
        let count = points[e].unwrap_or(0) + weight_at[a] + weight_at[b];
        if count.rem_euclid(2) != 0 {
            return Err(LaminationError::HalfInteger { edge: e, count });
        }
        values.push(count / 2);
    }
    Ok(EdgeCoordinates { values })
}

// ---------------------------------------------------------------------------
// lifts

/// Hole configuration of the quadrilateral around the lifted edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoleVariant {
    /// One outer vertex is a hole (positive sign).
    OneOuter,
    /// Both outer vertices are holes (positive sign).
    BothOuter,
    /// One inner vertex is a hole (negative sign).
    OneInner,
    /// Both inner vertices are holes (negative sign); `c` is the base point flag in `{0, 1}`.
    BothInner { c: u8 },
}

impl HoleVariant {
    pub fn sign(self) -> i64 {
        match self {
            HoleVariant::OneOuter | HoleVariant::BothOuter => 1,
            HoleVariant::OneInner | HoleVariant::BothInner { .. } => -1,
        }
    }

    pub fn loops(self) -> usize {
        match self {
            HoleVariant::OneOuter | HoleVariant::OneInner => 1,
            HoleVariant::BothOuter | HoleVariant::BothInner { .. } => 2,
        }
    }
}

/// Charge lattice of the hat basis extended by `extra` hole-loop classes of
/// zero charge that pair trivially with everything.
pub fn extended_lattice(t: &Triangulation, basis: &HatBasis, extra: usize) -> Result<ChargeLattice, LaminationError> {
    let r = basis.rank();
    let p = t.pairing();
    let mut pairing = vec![vec![0i64; r + extra]; r + extra];
    for i in 0..r {
        for j in 0..r {
            pairing[i][j] = p[i][j];
        }
    }
    let mut z = basis.edge_charge.clone();
    z.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(extra));
    Ok(ChargeLattice::new(pairing, z)?)
}

/// Small polynomial algebra on top of [`TwistedSeries`] without truncation.
struct Poly<'a> {
    lat: &'a ChargeLattice,
    rank: usize,
}

impl<'a> Poly<'a> {
    fn mono(&self, v: &LatticeVector) -> TwistedSeries {
        TwistedSeries::monomial(v.clone(), Coeff::one(), f64::INFINITY)
    }

    fn one(&self) -> TwistedSeries {
        TwistedSeries::one(self.rank, f64::INFINITY)
    }

    fn add(&self, a: &TwistedSeries, b: &TwistedSeries) -> TwistedSeries {
        let mut out = a.clone();
        for (v, c) in b.terms() {
            out.add_term(v.clone(), c.clone());
        }
        out
    }

    fn mul(&self, a: &TwistedSeries, b: &TwistedSeries) -> TwistedSeries {
        let mut out = TwistedSeries::zero(self.rank, f64::INFINITY);
        for (v, c) in a.terms() {
            for (w, d) in b.terms() {
                let mut coeff = c * d;
                if twist_sign(self.lat, v, w) < 0 {
                    coeff = -coeff;
                }
                out.add_term(v + w, coeff);
            }
        }
        out
    }

    /// `1 + [v]`.
    fn one_plus(&self, v: &LatticeVector) -> TwistedSeries {
        self.add(&self.one(), &self.mono(v))
    }

    /// Prefix products `prod_{m <= i} [-gamma_{fan_m}]` for `i = 1..len`.
    fn prefix_products(&self, fan: &[LatticeVector]) -> Vec<TwistedSeries> {
        let mut out = Vec::new();
        let mut acc = self.one();
        for v in fan {
            acc = self.mul(&acc, &self.mono(&-v));
            out.push(acc.clone());
        }
        out
    }
}

fn fan_vectors(basis: &HatBasis, fan: &[usize], rank: usize) -> Result<Vec<LatticeVector>, LaminationError> {
    fan.iter()
        .map(|&e| {
            let v = basis.vector(e).ok_or(LaminationError::NotInterior(e))?;
            let mut w = v.0;
            w.resize(rank, 0);
            Ok(LatticeVector(w))
        })
        .collect()
}

fn sum_all(p: &Poly, items: impl IntoIterator<Item = TwistedSeries>) -> TwistedSeries {
    items.into_iter().fold(TwistedSeries::zero(p.rank, f64::INFINITY), |acc, x| p.add(&acc, &x))
}

/// Closed-form lift of the elementary lamination `L_{sign e0}` (half of its
/// path lift), as an untruncated finite polynomial. Hole variants extend the
/// lattice by one or two zero-charge loop classes `epsilon_i` (the last
/// coordinates); the sheet involution acts on them by `-1`.
pub fn lift_lamination_exact(
    e0: usize,
    sign: i64,
    t: &Triangulation,
    basis: &HatBasis,
    holes: Option<HoleVariant>,
) -> Result<(TwistedSeries, ChargeLattice), LaminationError> {
    if !t.is_interior(e0) {
        return Err(LaminationError::NotInterior(e0));
    }
    if sign != 1 && sign != -1 {
        return Err(LaminationError::Inconsistent(format!("sign must be +-1, got {sign}")));
    }
    if let Some(h) = holes {
        if h.sign() != sign {
            return Err(LaminationError::InvalidHoles(format!("{h:?} needs sign {}", h.sign())));
        }
        if let HoleVariant::BothInner { c } = h {
            if c > 1 {
                return Err(LaminationError::InvalidHoles(format!("base point flag must be 0 or 1, got {c}")));
            }
        }
    }
    let extra = holes.map_or(0, |h| h.loops());
    let lat = extended_lattice(t, basis, extra)?;
    let rank = lat.rank();
    let p = Poly { lat: &lat, rank };
    let fans = t.fans(e0)?;
    let g0 = fan_vectors(basis, &[e0], rank)?.remove(0);
    let eps: Vec<LatticeVector> = (0..extra).map(|i| LatticeVector::unit(rank, basis.rank() + i)).collect();
    let (first, second) = if sign > 0 { (&fans.e, &fans.f) } else { (&fans.g, &fans.h) };
    let pa = p.prefix_products(&fan_vectors(basis, first, rank)?);
    let pb = p.prefix_products(&fan_vectors(basis, second, rank)?);
    let double = |coef: &TwistedSeries| -> TwistedSeries {
        sum_all(&p, pa.iter().flat_map(|a| pb.iter().map(|b| p.mul(coef, &p.mul(a, b)))))
    };
    let single = |coef: &TwistedSeries, prods: &[TwistedSeries]| -> TwistedSeries {
        sum_all(&p, prods.iter().map(|x| p.mul(coef, x)))
    };
    let inv0 = -&g0;
    let out = match holes {
        None if sign > 0 => {
            // [g0] + sum (1+[g0]) E_i + sum (1+[g0]) F_j + sum [g0](1+[g0]^{-1})^2 E_i F_j
            let c1 = p.one_plus(&g0);
            let sq = p.mul(&p.one_plus(&inv0), &p.one_plus(&inv0));
            let c2 = p.mul(&p.mono(&g0), &sq);
            sum_all(&p, [p.mono(&g0), single(&c1, &pa), single(&c1, &pb), double(&c2)])
        }
        None => {
            // [g0]^{-1} (1 + sum G_i + sum H_j + sum G_i H_j)
            let m = p.mono(&inv0);
            sum_all(&p, [m.clone(), single(&m, &pa), single(&m, &pb), double(&m)])
        }
        Some(HoleVariant::OneOuter) => {
            let e = &eps[0];
            let c0 = p.mono(&(&g0 + e));
            let ce = p.add(&p.mul(&p.mono(e), &p.one_plus(&g0)), &p.mul(&p.mono(&-e), &p.one_plus(&inv0)));
            let cf = p.mul(&p.mono(e), &p.one_plus(&g0));
            let sq = p.mul(&p.one_plus(&inv0), &p.one_plus(&inv0));
            let cd = p.mul(&p.mono(&(&g0 + e)), &sq);
            sum_all(&p, [c0, single(&ce, &pa), single(&cf, &pb), double(&cd)])
        }
        Some(HoleVariant::BothOuter) => {
            let (e1, e2) = (&eps[0], &eps[1]);
            let s12 = e1 + e2;
            let c0 = p.mono(&(&g0 + &s12));
            let ce = p.add(&c0, &p.mono(&(&-e1 + e2)));
            let cf = p.mul(&p.mono(&s12), &p.one_plus(&g0));
            sum_all(&p, [c0.clone(), single(&ce, &pa), single(&cf, &pb), double(&cf)])
        }
        Some(HoleVariant::OneInner) => {
            let e = &eps[0];
            let m = p.mono(&(&inv0 + e));
            let ch = p.add(&m, &p.mono(&-e));
            sum_all(&p, [m.clone(), single(&m, &pa), single(&ch, &pb), double(&m)])
        }
        Some(HoleVariant::BothInner { c }) => {
            let s12 = &eps[0] + &eps[1];
            let cc = crate::lattice_algebra::coeff(i64::from(c));
            let m = p.mono(&(&inv0 + &s12));
            let mut cg = p.mono(&s12).scaled(&cc);
            cg = p.add(&cg, &m);
            sum_all(&p, [m.clone(), single(&cg, &pa), single(&m.scaled(&cc), &pb), double(&m.scaled(&cc))])
        }
    };
    Ok((out, lat))
}

/// [`lift_lamination_exact`] truncated at `level`.
pub fn lift_lamination(
    e0: usize,
    sign: i64,
    t: &Triangulation,
    basis: &HatBasis,
    level: f64,
    holes: Option<HoleVariant>,
) -> Result<TwistedSeries, LaminationError> {
    let (s, lat) = lift_lamination_exact(e0, sign, t, basis, holes)?;
    Ok(s.truncated(&lat, level))
}

// ---------------------------------------------------------------------------
// approximation

/// Result of [`approximate_generator`].
#[derive(Clone, Debug, PartialEq)]
pub struct Approximation {
    /// The stabilized series, truncated at the level.
    pub series: TwistedSeries,
    /// Number of iteration steps (1 if the first lift is already exact).
    pub steps: usize,
    /// `min(-Im Z)` over the defect below the level after each step;
    /// `+inf` once the defect vanishes.
    pub defect_depths: Vec<f64>,
}

fn depth(lat: &ChargeLattice, v: &LatticeVector) -> f64 {
    -lat.z(v).im
}

/// Total degree and positive degree of a monomial in the basis generators.
fn degrees(v: &LatticeVector) -> (i64, i64) {
    (v.0.iter().map(|x| x.abs()).sum(), v.0.iter().filter(|&&x| x > 0).sum())
}

/// Product with terms of depth at least `cap` removed.
fn mul_pruned(lat: &ChargeLattice, a: &TwistedSeries, b: &TwistedSeries, cap: f64) -> TwistedSeries {
    let mut out = TwistedSeries::zero(a.rank(), f64::INFINITY);
    for (v, c) in a.terms() {
        for (w, d) in b.terms() {
            let s = v + w;
            if depth(lat, &s) >= cap {
                continue;
            }
            let mut coeff = c * d;
            if twist_sign(lat, v, w) < 0 {
                coeff = -coeff;
            }
            out.add_term(s, coeff);
        }
    }
    out
}

/// Approximates `[gamma_{e0}]^{sign}` below `level` by polynomials in the
/// lamination lifts: each step rewrites every defect monomial below the level
/// as a product of generators and adds the same product of their lifts.
///
/// Every correction term of a lift lies at least `min Im Z` deeper than the
/// generator it replaces, so after `n` steps the defect has depth at least
/// `(n - 1) min Im Z - max Im Z`.
pub fn approximate_generator(
    e0: usize,
    sign: i64,
    t: &Triangulation,
    basis: &HatBasis,
    level: f64,
) -> Result<Approximation, LaminationError> {
    for (k, z) in basis.edge_charge.iter().enumerate() {
        if z.im <= 0.0 {
            return Err(LaminationError::NotNormalized(basis.edges[k], *z));
        }
    }
    let lat = basis.lattice(t)?;
    let rank = lat.rank();
    let max_im = basis.edge_charge.iter().map(|z| z.im).fold(0.0, f64::max);
    let min_im = basis.edge_charge.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    // a product containing at most one positive generator has depth at least the sum of
    // its factors' depths minus max Im Z, so deeper partial products never come back below the level
    let cap = level + max_im + 1e-9;
    let mut lifts: BTreeMap<(usize, i64), TwistedSeries> = BTreeMap::new();
    for (k, &e) in basis.edges.iter().enumerate() {
        for s in [1i64, -1] {
            let (l, _) = lift_lamination_exact(e, s, t, basis, None)?;
            lifts.insert((k, s), l);
        }
    }
    let k0 = basis.edges.iter().position(|&e| e == e0).ok_or(LaminationError::NotInterior(e0))?;
    let target = TwistedSeries::monomial(LatticeVector::unit(rank, k0).scale(sign), Coeff::one(), f64::INFINITY);
    let mut approx = lifts[&(k0, sign)].clone();
    let mut steps = 1usize;
    let mut depths = Vec::new();
    let max_steps = 10 + (4.0 * (level + 2.0 * max_im) / min_im) as usize;
    loop {
        let mut defect = target.clone();
        for (v, c) in approx.terms() {
            defect.add_term(v.clone(), -c.clone());
        }
        let defect = defect.truncated(&lat, level);
        if defect.is_empty() {
            depths.push(f64::INFINITY);
            break;
        }
        depths.push(defect.terms().keys().map(|v| depth(&lat, v)).fold(f64::INFINITY, f64::min));
        if steps >= max_steps {
            return Err(LaminationError::NoConvergence(steps));
        }
        for (v, c) in defect.terms() {
            let (d, pos) = degrees(v);
            if pos > 1 {
                return Err(LaminationError::PositiveDegree(pos));
            }
            if d == 0 {
                return Err(LaminationError::Inconsistent("constant term in the defect".into()));
            }
            // [v] = sigma * prod of generator monomials; substitute the lifts
            let mut mono = TwistedSeries::one(rank, f64::INFINITY);
            let mut prod = TwistedSeries::one(rank, f64::INFINITY);
            for (k, &x) in v.0.iter().enumerate() {
                let s = x.signum();
                for _ in 0..x.abs() {
                    let g = TwistedSeries::monomial(LatticeVector::unit(rank, k).scale(s), Coeff::one(), f64::INFINITY);
                    mono = mul_pruned(&lat, &mono, &g, f64::INFINITY);
                    prod = mul_pruned(&lat, &prod, &lifts[&(k, s)], cap);
                }
            }
            let sigma = mono.coeff(v);
            debug_assert!(sigma == Coeff::one() || sigma == -Coeff::one());
            let factor = c * &sigma;
            for (w, e) in prod.terms() {
                approx.add_term(w.clone(), e * &factor);
            }
        }
        steps += 1;
    }
    let series = approx.truncated(&lat, level);
    Ok(Approximation { series, steps, defect_depths: depths })
}

/// Smallest `n` with `(n - 1) min Im Z - max Im Z >= level`.
pub fn linear_step_bound(basis: &HatBasis, level: f64) -> usize {
    let max_im = basis.edge_charge.iter().map(|z| z.im).fold(0.0, f64::max);
    let min_im = basis.edge_charge.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    ((level + max_im) / min_im).ceil() as usize + 1
}

/// Whether every monomial lies strictly below the real axis.
pub fn supported_in_lower_half_plane(s: &TwistedSeries, lat: &ChargeLattice) -> bool {
    s.terms().keys().all(|v| lat.z(v).im < 0.0)
}
