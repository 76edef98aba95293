//! Exact arithmetic on a charge lattice: the twisted torus algebra, BPS
//! automorphisms and their phase-ordered products.
//!
//! Coefficients are exact rationals. Central charges are floating point and
//! only enter through truncation thresholds and phase ordering.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact coefficient type used by every formal sum in the crate.
pub type Coeff = BigRational;

/// Slack used when deciding the strict inequality `|Z(v)| < L`.
pub const TRUNCATION_TOL: f64 = 1e-9;

/// Tolerance for comparing a vector's phase with the phase of its ray.
pub const PHASE_MATCH_TOL: f64 = 1e-6;

/// Two rays closer than this in phase are merged into one.
pub const PHASE_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("pairing matrix is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("pairing matrix shape does not match {0} central charges")]
    ShapeMismatch(usize),
    #[error("lattice rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("truncation levels differ: {0} vs {1}")]
    LevelMismatch(f64, f64),
    #[error("truncation level must be positive, got {0}")]
    NonPositiveLevel(f64),
    #[error("invalid sector: {0}")]
    InvalidSector(String),
    #[error("ray at phase {0} lies outside the sector")]
    RayOutsideSector(f64),
    #[error("term {0} lies outside the admissible translated cone")]
    SupportCone(String),
    #[error("invalid BPS ray: {0}")]
    InvalidRay(String),
    #[error("ray phases are not monotone in the application order")]
    NotMonotone,
}

/// Integer vector in the charge lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![0; rank])
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        LatticeVector(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, k: i64) -> Self {
        LatticeVector(self.0.iter().map(|c| c * k).collect())
    }

    /// Sum of absolute coordinates.
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    /// Sum of the positive coordinates.
    pub fn positive_degree(&self) -> i64 {
        self.0.iter().filter(|&&c| c > 0).sum()
    }

    /// The primitive vector on the same ray together with the multiple.
    pub fn primitive(&self) -> (LatticeVector, i64) {
        let g = self.0.iter().fold(0i64, |g, &c| g.gcd(&c));
        if g == 0 {
            return (self.clone(), 0);
        }
        (LatticeVector(self.0.iter().map(|c| c / g).collect()), g)
    }

    /// Returns `k` with `self = k * base`, if such an integer exists.
    pub fn multiple_of(&self, base: &LatticeVector) -> Option<i64> {
        let idx = base.0.iter().position(|&c| c != 0)?;
        if self.0[idx] % base.0[idx] != 0 {
            return None;
        }
        let k = self.0[idx] / base.0[idx];
        if base.scale(k) == *self {
            Some(k)
        } else {
            None
        }
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector(self.0.iter().map(|c| -c).collect())
    }
}

/// Lattice with an antisymmetric integer pairing and a central charge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeLattice {
    rank: usize,
    pairing: Vec<Vec<i64>>,
    central_charge: Vec<Complex64>,
}

impl ChargeLattice {
    pub fn new(pairing: Vec<Vec<i64>>, central_charge: Vec<Complex64>) -> Result<Self, AlgebraError> {
        let rank = central_charge.len();
        if pairing.len() != rank || pairing.iter().any(|row| row.len() != rank) {
            return Err(AlgebraError::ShapeMismatch(rank));
        }
        for i in 0..rank {
            for j in 0..rank {
                if pairing[i][j] != -pairing[j][i] {
                    return Err(AlgebraError::NotAntisymmetric(i, j));
                }
            }
        }
        Ok(ChargeLattice { rank, pairing, central_charge })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn pairing_matrix(&self) -> &[Vec<i64>] {
        &self.pairing
    }

    pub fn central_charges(&self) -> &[Complex64] {
        &self.central_charge
    }

    /// Same pairing with a different central charge.
    pub fn with_central_charge(&self, central_charge: Vec<Complex64>) -> Result<Self, AlgebraError> {
        ChargeLattice::new(self.pairing.clone(), central_charge)
    }

    pub fn unit(&self, i: usize) -> LatticeVector {
        LatticeVector::unit(self.rank, i)
    }

    /// The pairing `<v, w>`.
    pub fn pair(&self, v: &LatticeVector, w: &LatticeVector) -> i64 {
        let mut s = 0;
        for (i, vi) in v.0.iter().enumerate() {
            if *vi == 0 {
                continue;
            }
            for (j, wj) in w.0.iter().enumerate() {
                s += vi * self.pairing[i][j] * wj;
            }
        }
        s
    }

    /// Central charge of an integer vector.
    pub fn z(&self, v: &LatticeVector) -> Complex64 {
        v.0.iter()
            .zip(&self.central_charge)
            .fold(Complex64::new(0.0, 0.0), |acc, (c, z)| acc + z * (*c as f64))
    }

    pub fn norm(&self, v: &LatticeVector) -> f64 {
        self.z(v).norm()
    }

    fn check_rank(&self, v: &LatticeVector) -> Result<(), AlgebraError> {
        if v.rank() != self.rank {
            return Err(AlgebraError::RankMismatch(v.rank(), self.rank));
        }
        Ok(())
    }
}

/// Sign of the twisted product `[v][w] = (-1)^<v,w> [v+w]`.
pub fn twist_sign(lat: &ChargeLattice, v: &LatticeVector, w: &LatticeVector) -> i64 {
    if lat.pair(v, w).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// True when `norm` survives truncation at `level`.
pub fn below_level(norm: f64, level: f64) -> bool {
    norm < level - TRUNCATION_TOL
}

fn levels_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Truncated element of the twisted torus algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedSeries {
    rank: usize,
    level: f64,
    terms: BTreeMap<LatticeVector, Coeff>,
}

impl TwistedSeries {
    pub fn zero(rank: usize, level: f64) -> Self {
        TwistedSeries { rank, level, terms: BTreeMap::new() }
    }

    /// The unit `[0]`, kept only if the level is positive.
    pub fn one(rank: usize, level: f64) -> Self {
        Self::monomial(LatticeVector::zero(rank), Coeff::one(), level)
    }

    /// `c [v]` without a truncation check.
    pub fn monomial(v: LatticeVector, c: Coeff, level: f64) -> Self {
        let rank = v.rank();
        let mut s = Self::zero(rank, level);
        s.add_term(v, c);
        s
    }

    pub fn from_terms<I>(rank: usize, level: f64, terms: I) -> Self
    where
        I: IntoIterator<Item = (LatticeVector, Coeff)>,
    {
        let mut s = Self::zero(rank, level);
        for (v, c) in terms {
            s.add_term(v, c);
        }
        s
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn terms(&self) -> &BTreeMap<LatticeVector, Coeff> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, v: &LatticeVector) -> Coeff {
        self.terms.get(v).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Adds `c [v]`, removing the entry if it cancels.
    pub fn add_term(&mut self, v: LatticeVector, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(v).or_insert_with(Coeff::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    /// Sum of two series, truncated to the smaller level.
    pub fn plus(&self, other: &TwistedSeries, lat: &ChargeLattice) -> TwistedSeries {
        let level = self.level.min(other.level);
        let mut out = self.clone();
        out.level = level;
        for (v, c) in &other.terms {
            out.add_term(v.clone(), c.clone());
        }
        out.truncated(lat, level)
    }

    pub fn minus(&self, other: &TwistedSeries, lat: &ChargeLattice) -> TwistedSeries {
        self.plus(&other.scaled(&-Coeff::one()), lat)
    }

    pub fn scaled(&self, c: &Coeff) -> TwistedSeries {
        let mut out = Self::zero(self.rank, self.level);
        for (v, d) in &self.terms {
            out.add_term(v.clone(), d * c);
        }
        out
    }

    /// Minimum of `|Z|` over the support; `+inf` for the zero series.
    pub fn height(&self, lat: &ChargeLattice) -> f64 {
        self.terms.keys().map(|v| lat.norm(v)).fold(f64::INFINITY, f64::min)
    }

    /// Drops every term with `|Z| >= level`; the new level is `min(old, level)`.
    pub fn truncated(&self, lat: &ChargeLattice, level: f64) -> TwistedSeries {
        let level = self.level.min(level);
        let terms = self
            .terms
            .iter()
            .filter(|(v, _)| below_level(lat.norm(v), level))
            .map(|(v, c)| (v.clone(), c.clone()))
            .collect();
        TwistedSeries { rank: self.rank, level, terms }
    }

    /// Same terms at a new nominal level, without filtering.
    pub fn with_level(mut self, level: f64) -> TwistedSeries {
        self.level = level;
        self
    }

    /// Terms rendered as `coeff [v]` for reports and diffs.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self.terms.iter().map(|(v, c)| format!("{c}*[{v}]")).collect();
        parts.join(" + ")
    }
}

/// Drops all terms of `a` with `|Z| >= level`.
pub fn truncate_height(a: &TwistedSeries, level: f64, lat: &ChargeLattice) -> TwistedSeries {
    a.truncated(lat, level)
}

/// Product in the twisted torus algebra, retruncated at the shared level.
pub fn twisted_multiply(
    a: &TwistedSeries,
    b: &TwistedSeries,
    lat: &ChargeLattice,
) -> Result<TwistedSeries, AlgebraError> {
    if a.rank != b.rank {
        return Err(AlgebraError::RankMismatch(a.rank, b.rank));
    }
    if a.rank != lat.rank() {
        return Err(AlgebraError::RankMismatch(a.rank, lat.rank()));
    }
    if !levels_match(a.level, b.level) {
        return Err(AlgebraError::LevelMismatch(a.level, b.level));
    }
    Ok(multiply_at(a, b, lat, a.level))
}

/// Twisted product truncated at an explicit level; no level compatibility check.
pub(crate) fn multiply_at(a: &TwistedSeries, b: &TwistedSeries, lat: &ChargeLattice, level: f64) -> TwistedSeries {
    let mut out = TwistedSeries::zero(a.rank, level);
    for (v, c) in &a.terms {
        for (w, d) in &b.terms {
            let s = v + w;
            if !below_level(lat.norm(&s), level) {
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

/// One `(vector, Omega, BPS cycle)` entry of a ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpsEntry {
    pub vector: LatticeVector,
    pub omega: i64,
    pub cycle: LatticeVector,
}

/// Active ray with its BPS content.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpsRay {
    pub phase: f64,
    pub content: Vec<BpsEntry>,
}

impl BpsRay {
    pub fn new(phase: f64, content: Vec<BpsEntry>) -> Result<Self, AlgebraError> {
        let ray = BpsRay { phase, content };
        ray.primitive_multiples()?;
        Ok(ray)
    }

    /// Ray with one entry whose cycle is `omega * vector`.
    pub fn single(phase: f64, vector: LatticeVector, omega: i64) -> Result<Self, AlgebraError> {
        let cycle = vector.scale(omega);
        BpsRay::new(phase, vec![BpsEntry { vector, omega, cycle }])
    }

    /// The primitive vector of the ray and the multiple of each entry.
    pub fn primitive_multiples(&self) -> Result<(LatticeVector, Vec<i64>), AlgebraError> {
        let first = self
            .content
            .first()
            .ok_or_else(|| AlgebraError::InvalidRay("empty content".into()))?;
        let (prim, _) = first.vector.primitive();
        if prim.is_zero() {
            return Err(AlgebraError::InvalidRay("zero vector in content".into()));
        }
        let mut ks = Vec::with_capacity(self.content.len());
        for e in &self.content {
            if e.vector.rank() != prim.rank() || e.cycle.rank() != prim.rank() {
                return Err(AlgebraError::InvalidRay("rank mismatch in content".into()));
            }
            match e.vector.multiple_of(&prim) {
                Some(k) if k > 0 => ks.push(k),
                _ => {
                    return Err(AlgebraError::InvalidRay(format!(
                        "{} is not a positive multiple of {}",
                        e.vector, prim
                    )))
                }
            }
        }
        Ok((prim, ks))
    }

    /// Checks that every vector has phase equal to the ray phase.
    pub fn check_phases(&self, lat: &ChargeLattice) -> Result<(), AlgebraError> {
        for e in &self.content {
            let z = lat.z(&e.vector);
            if z.norm() == 0.0 {
                return Err(AlgebraError::InvalidRay(format!("{} has zero central charge", e.vector)));
            }
            if angle_distance(z.arg(), self.phase) > PHASE_MATCH_TOL {
                return Err(AlgebraError::InvalidRay(format!(
                    "{} has phase {} but the ray sits at {}",
                    e.vector,
                    z.arg(),
                    self.phase
                )));
            }
        }
        Ok(())
    }

    /// Ray with every Omega and cycle negated; its automorphism is the inverse.
    pub fn inverse(&self) -> BpsRay {
        BpsRay {
            phase: self.phase,
            content: self
                .content
                .iter()
                .map(|e| BpsEntry { vector: e.vector.clone(), omega: -e.omega, cycle: -&e.cycle })
                .collect(),
        }
    }

    /// Smallest `|Z|` over the content.
    pub fn min_norm(&self, lat: &ChargeLattice) -> f64 {
        self.content.iter().map(|e| lat.norm(&e.vector)).fold(f64::INFINITY, f64::min)
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Coefficients of `prod_j (1 - x^{k_j})^{m_j}` up to degree `n_max`.
pub fn binomial_prefactor(parts: &[(u64, i64)], n_max: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::zero(); n_max + 1];
    acc[0] = BigInt::one();
    for &(k, m) in parts {
        if m == 0 || k == 0 {
            continue;
        }
        let k = k as usize;
        let factor = one_minus_power(k, m, n_max);
        let mut next = vec![BigInt::zero(); n_max + 1];
        for (i, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, f) in factor.iter().enumerate() {
                if i + j > n_max {
                    break;
                }
                if !f.is_zero() {
                    next[i + j] += a * f;
                }
            }
        }
        acc = next;
    }
    acc
}

/// `(1 - x^k)^m` truncated at degree `n_max`, any integer `m`.
fn one_minus_power(k: usize, m: i64, n_max: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n_max + 1];
    let mut i = 0usize;
    while i * k <= n_max {
        let c = if m >= 0 {
            if i as i64 > m {
                break;
            }
            let b = binomial(m as u64, i as u64);
            if i % 2 == 1 {
                -b
            } else {
                b
            }
        } else {
            binomial((-m) as u64 + i as u64 - 1, i as u64)
        };
        out[i * k] = c;
        i += 1;
    }
    out
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Applies `prod_j (1 - [k_j g])^{m_j}` to `c [alpha]` for a primitive `g`
/// isotropic against itself, keeping terms with `|Z| < level`.
pub fn apply_ray_prefactor(
    prim: &LatticeVector,
    parts: &[(u64, i64)],
    alpha: &LatticeVector,
    coeff: &Coeff,
    level: f64,
    lat: &ChargeLattice,
    out: &mut TwistedSeries,
) {
    let zp = lat.norm(prim);
    if zp <= 0.0 {
        return;
    }
    let za = lat.norm(alpha);
    let n_max = ((level + za) / zp).floor() as usize + 1;
    let pre = binomial_prefactor(parts, n_max);
    let odd = lat.pair(prim, alpha).rem_euclid(2) == 1;
    for (n, c) in pre.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let v = alpha + &prim.scale(n as i64);
        if !below_level(lat.norm(&v), level) {
            continue;
        }
        let mut term = coeff * Coeff::from_integer(c.clone());
        if odd && n % 2 == 1 {
            term = -term;
        }
        out.add_term(v, term);
    }
}

/// `K([alpha]) = prod (1 - [g])^{Omega(g) <g, alpha>} [alpha]`, truncated at `level`.
pub fn k_apply(
    ray: &BpsRay,
    alpha: &LatticeVector,
    level: f64,
    lat: &ChargeLattice,
) -> Result<TwistedSeries, AlgebraError> {
    if level <= 0.0 {
        return Err(AlgebraError::NonPositiveLevel(level));
    }
    lat.check_rank(alpha)?;
    let (prim, ks) = ray.primitive_multiples()?;
    lat.check_rank(&prim)?;
    let parts: Vec<(u64, i64)> = ray
        .content
        .iter()
        .zip(&ks)
        .map(|(e, &k)| (k as u64, e.omega * lat.pair(&e.vector, alpha)))
        .collect();
    let mut out = TwistedSeries::zero(lat.rank(), level);
    apply_ray_prefactor(&prim, &parts, alpha, &Coeff::one(), level, lat, &mut out);
    Ok(out)
}

/// Linear extension of [`k_apply`] to a series.
pub fn k_apply_series(
    ray: &BpsRay,
    s: &TwistedSeries,
    level: f64,
    lat: &ChargeLattice,
) -> Result<TwistedSeries, AlgebraError> {
    if level <= 0.0 {
        return Err(AlgebraError::NonPositiveLevel(level));
    }
    let (prim, ks) = ray.primitive_multiples()?;
    lat.check_rank(&prim)?;
    let mut out = TwistedSeries::zero(lat.rank(), level);
    for (alpha, c) in s.terms() {
        let parts: Vec<(u64, i64)> = ray
            .content
            .iter()
            .zip(&ks)
            .map(|(e, &k)| (k as u64, e.omega * lat.pair(&e.vector, alpha)))
            .collect();
        apply_ray_prefactor(&prim, &parts, alpha, c, level, lat, &mut out);
    }
    Ok(out)
}

/// Checks [`k_apply`] against the exponential of the derivation induced by
/// the Donaldson-Thomas series `-sum Omega(g) sum_n [n g] / n^2`.
pub fn dt_exp_check(ray: &BpsRay, alpha: &LatticeVector, level: f64, lat: &ChargeLattice) -> bool {
    let Ok(expected) = k_apply(ray, alpha, level, lat) else {
        return false;
    };
    let t = lat.norm(alpha);
    let work = level + 2.0 * t;
    let dt_level = work + t;
    let mut dt: Vec<(LatticeVector, Coeff)> = Vec::new();
    for e in &ray.content {
        let zn = lat.norm(&e.vector);
        if zn <= 0.0 {
            return false;
        }
        let mut n = 1i64;
        while below_level(zn * n as f64, dt_level) {
            let c = Coeff::new(BigInt::from(-e.omega), BigInt::from(n * n));
            dt.push((e.vector.scale(n), c));
            n += 1;
        }
    }
    let derive = |s: &TwistedSeries| -> TwistedSeries {
        let mut out = TwistedSeries::zero(lat.rank(), work);
        for (b, cb) in s.terms() {
            for (w, dw) in &dt {
                let p = lat.pair(w, b);
                if p == 0 {
                    continue;
                }
                let v = w + b;
                if !below_level(lat.norm(&v), work) {
                    continue;
                }
                let mut c = cb * dw * Coeff::from_integer(BigInt::from(p));
                if twist_sign(lat, w, b) < 0 {
                    c = -c;
                }
                out.add_term(v, c);
            }
        }
        out
    };
    let mut total = TwistedSeries::monomial(alpha.clone(), Coeff::one(), work);
    let mut term = total.clone();
    let mut k = 1i64;
    loop {
        term = derive(&term).scaled(&Coeff::new(BigInt::one(), BigInt::from(k)));
        if term.is_empty() {
            break;
        }
        for (v, c) in term.terms() {
            total.add_term(v.clone(), c.clone());
        }
        k += 1;
        if k > 10_000 {
            return false;
        }
    }
    let got = total.truncated(lat, level);
    got.terms() == expected.terms()
}

/// Acute sector of directions, with an optional translate and support cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub translate: Complex64,
    pub support_cone: Option<(f64, f64)>,
}

impl Sector {
    pub fn new(theta_lo: f64, theta_hi: f64) -> Result<Self, AlgebraError> {
        let s = Sector { theta_lo, theta_hi, translate: Complex64::new(0.0, 0.0), support_cone: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_support_cone(
        mut self,
        translate: Complex64,
        lo: f64,
        hi: f64,
    ) -> Result<Self, AlgebraError> {
        self.translate = translate;
        self.support_cone = Some((lo, hi));
        self.validate()?;
        Ok(self)
    }

    pub fn opening(&self) -> f64 {
        self.theta_hi - self.theta_lo
    }

    pub fn validate(&self) -> Result<(), AlgebraError> {
        let w = self.opening();
        if !(w > 0.0 && w < PI) {
            return Err(AlgebraError::InvalidSector(format!("opening {w} is not in (0, pi)")));
        }
        if let Some((lo, hi)) = self.support_cone {
            let w2 = hi - lo;
            if !(w2 >= 0.0 && w2 < PI) {
                return Err(AlgebraError::InvalidSector(format!("support cone opening {w2} is not in [0, pi)")));
            }
            if arcs_meet(self.theta_lo + PI, w, lo, w2) {
                return Err(AlgebraError::InvalidSector(
                    "support cone meets the opposite of the sector".into(),
                ));
            }
        }
        Ok(())
    }

    /// Position of `theta` measured counterclockwise from `theta_lo`.
    pub fn relative(&self, theta: f64) -> f64 {
        let r = (theta - self.theta_lo).rem_euclid(2.0 * PI);
        if r > 2.0 * PI - 1e-12 {
            r - 2.0 * PI
        } else {
            r
        }
    }

    pub fn contains_phase(&self, theta: f64) -> bool {
        let r = self.relative(theta);
        r >= -1e-12 && r <= self.opening() + 1e-12
    }

    /// Whether `z` lies in the translated support cone (true if none is set).
    pub fn support_contains(&self, z: Complex64) -> bool {
        let Some((lo, hi)) = self.support_cone else {
            return true;
        };
        let d = z - self.translate;
        if d.norm() <= 1e-12 {
            return true;
        }
        let r = (d.arg() - lo).rem_euclid(2.0 * PI);
        r <= hi - lo + 1e-12 || r >= 2.0 * PI - 1e-12
    }
}

fn arcs_meet(a: f64, wa: f64, b: f64, wb: f64) -> bool {
    let d1 = (b - a).rem_euclid(2.0 * PI);
    let d2 = (a - b).rem_euclid(2.0 * PI);
    d1 <= wa || d2 <= wb
}

/// Order in which the rays of a word act.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApplicationOrder {
    /// The ray nearest `theta_lo` acts first.
    Ccw,
    /// The ray nearest `theta_hi` acts first.
    Cw,
}

impl std::str::FromStr for ApplicationOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ccw" => Ok(ApplicationOrder::Ccw),
            "cw" => Ok(ApplicationOrder::Cw),
            other => Err(format!("unknown order '{other}', expected cw or ccw")),
        }
    }
}

impl fmt::Display for ApplicationOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApplicationOrder::Ccw => write!(f, "ccw"),
            ApplicationOrder::Cw => write!(f, "cw"),
        }
    }
}

/// Phase-ordered product of BPS automorphisms. `rays[0]` acts first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutomorphismWord {
    pub rays: Vec<BpsRay>,
    pub order: ApplicationOrder,
    pub sector: Option<Sector>,
}

impl AutomorphismWord {
    /// Word from rays already listed in application order.
    pub fn new(rays: Vec<BpsRay>, order: ApplicationOrder, sector: Option<Sector>) -> Result<Self, AlgebraError> {
        let w = AutomorphismWord { rays, order, sector };
        w.check_monotone()?;
        Ok(w)
    }

    /// Word from rays in any order: merges equal phases and sorts.
    pub fn from_unordered(
        rays: Vec<BpsRay>,
        order: ApplicationOrder,
        sector: Option<Sector>,
    ) -> Result<Self, AlgebraError> {
        let rel = |t: f64| match &sector {
            Some(s) => s.relative(t),
            None => t,
        };
        let mut rays = rays;
        rays.sort_by(|a, b| rel(a.phase).total_cmp(&rel(b.phase)));
        let mut merged: Vec<BpsRay> = Vec::new();
        for r in rays {
            match merged.last_mut() {
                Some(last) if (rel(last.phase) - rel(r.phase)).abs() < PHASE_MERGE_TOL => {
                    for e in r.content {
                        if let Some(x) = last.content.iter_mut().find(|x| x.vector == e.vector) {
                            x.omega += e.omega;
                            x.cycle = &x.cycle + &e.cycle;
                        } else {
                            last.content.push(e);
                        }
                    }
                    last.content.retain(|e| e.omega != 0 || !e.cycle.is_zero());
                }
                _ => merged.push(r),
            }
        }
        merged.retain(|r| !r.content.is_empty());
        if order == ApplicationOrder::Cw {
            merged.reverse();
        }
        AutomorphismWord::new(merged, order, sector)
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    fn relative(&self, t: f64) -> f64 {
        match &self.sector {
            Some(s) => s.relative(t),
            None => t,
        }
    }

    fn check_monotone(&self) -> Result<(), AlgebraError> {
        for pair in self.rays.windows(2) {
            let a = self.relative(pair[0].phase);
            let b = self.relative(pair[1].phase);
            let ok = match self.order {
                ApplicationOrder::Ccw => b >= a - PHASE_MERGE_TOL,
                ApplicationOrder::Cw => b <= a + PHASE_MERGE_TOL,
            };
            if !ok {
                return Err(AlgebraError::NotMonotone);
            }
        }
        Ok(())
    }

    /// Angular width of the smallest arc holding all ray phases.
    fn spread(&self) -> f64 {
        if let Some(s) = &self.sector {
            return s.opening();
        }
        let mut ph: Vec<f64> = self.rays.iter().map(|r| r.phase.rem_euclid(2.0 * PI)).collect();
        if ph.len() < 2 {
            return 0.0;
        }
        ph.sort_by(f64::total_cmp);
        let mut gap = 2.0 * PI - (ph[ph.len() - 1] - ph[0]);
        for w in ph.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        2.0 * PI - gap
    }
}

/// Applies the word to `target`, ray by ray in application order, exact below `level`.
///
/// Each monomial is pushed through the word at an enlarged working level so
/// that intermediate truncations cannot lose terms that later fall below
/// `level`; rays too long to matter are skipped.
pub fn s_delta_apply(
    word: &AutomorphismWord,
    target: &TwistedSeries,
    level: f64,
    lat: &ChargeLattice,
) -> Result<TwistedSeries, AlgebraError> {
    if level <= 0.0 {
        return Err(AlgebraError::NonPositiveLevel(level));
    }
    if target.rank() != lat.rank() {
        return Err(AlgebraError::RankMismatch(target.rank(), lat.rank()));
    }
    if let Some(sector) = &word.sector {
        sector.validate()?;
        for r in &word.rays {
            if !sector.contains_phase(r.phase) {
                return Err(AlgebraError::RayOutsideSector(r.phase));
            }
        }
        for v in target.terms().keys() {
            if !sector.support_contains(lat.z(v)) {
                return Err(AlgebraError::SupportCone(v.to_string()));
            }
        }
    }
    word.check_monotone()?;
    let spread = word.spread();
    if spread >= PI {
        return Err(AlgebraError::InvalidSector(format!("ray phases span {spread} >= pi")));
    }
    let c = (spread / 2.0).cos();
    let mut out = TwistedSeries::zero(lat.rank(), level);
    for (alpha, coeff) in target.terms() {
        let t = lat.norm(alpha);
        let relevant = (level + t) / c;
        let work = relevant + t;
        let mut cur = TwistedSeries::monomial(alpha.clone(), coeff.clone(), work);
        for ray in &word.rays {
            if ray.min_norm(lat) >= relevant {
                continue;
            }
            cur = k_apply_series(ray, &cur, work, lat)?;
        }
        for (v, d) in cur.truncated(lat, level).terms() {
            out.add_term(v.clone(), d.clone());
        }
    }
    Ok(out)
}

/// First generator on which two words disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct WordDifference {
    pub generator: LatticeVector,
    pub vector: LatticeVector,
    pub left: Coeff,
    pub right: Coeff,
}

/// Compares two words on every `[e_i]` and `[-e_i]`; `None` means equal.
pub fn word_difference(
    w1: &AutomorphismWord,
    w2: &AutomorphismWord,
    level: f64,
    lat: &ChargeLattice,
) -> Result<Option<WordDifference>, AlgebraError> {
    for i in 0..lat.rank() {
        for sign in [1i64, -1] {
            let g = lat.unit(i).scale(sign);
            let target = TwistedSeries::monomial(g.clone(), Coeff::one(), level);
            let a = s_delta_apply(w1, &target, level, lat)?;
            let b = s_delta_apply(w2, &target, level, lat)?;
            if a.terms() != b.terms() {
                let mut keys: Vec<&LatticeVector> = a.terms().keys().chain(b.terms().keys()).collect();
                keys.sort_by(|x, y| lat.norm(x).total_cmp(&lat.norm(y)).then_with(|| x.cmp(y)));
                for v in keys {
                    let (l, r) = (a.coeff(v), b.coeff(v));
                    if l != r {
                        return Ok(Some(WordDifference { generator: g, vector: v.clone(), left: l, right: r }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// True iff both words agree on all generators and their inverses below `level`.
pub fn word_equal(w1: &AutomorphismWord, w2: &AutomorphismWord, level: f64, lat: &ChargeLattice) -> bool {
    matches!(word_difference(w1, w2, level, lat), Ok(None))
}

/// Rational coefficient from an integer.
pub fn coeff(n: i64) -> Coeff {
    Coeff::from_integer(BigInt::from(n))
}

/// Rational coefficient `n / d`.
pub fn ratio(n: i64, d: i64) -> Coeff {
    Coeff::new(BigInt::from(n), BigInt::from(d))
}

/// Rounds a coefficient to `f64` for display.
pub fn coeff_to_f64(c: &Coeff) -> f64 {
    c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN)
}

/// Sign helper used by callers that work with `i64` signs.
pub fn sign_coeff(s: i64) -> Coeff {
    if s.is_negative() {
        -Coeff::one()
    } else {
        Coeff::one()
    }
}
