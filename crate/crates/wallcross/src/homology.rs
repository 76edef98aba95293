//! Combinatorial triangulations of polygons, the hat-homology basis of a
//! saddle-free differential, the intersection pairing, lattice classes of
//! saddle connections and BPS cycles.
//!
//! Polygon vertices are numbered `0..n` counterclockwise. For a polynomial
//! differential of degree `d` they are the `d + 2` asymptotic directions at
//! infinity, every zero spans one triangle and every horizontal strip is an
//! interior edge.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flat_geometry::{
    escape_index, integrate_trajectory, period_with_end, GeometryError, IntegrationOptions, PeriodOptions,
    QuadraticDifferential, RayClassification, SaddleConnection, Terminus, TrajectorySegment, TrajectoryStart,
};
use crate::lattice_algebra::{AlgebraError, BpsEntry, BpsRay, ChargeLattice, LatticeVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomologyError {
    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("edge {0} is not an interior edge")]
    NotInterior(usize),
    #[error("saddle connection could not be classified: residual {0}")]
    Unclassified(f64),
    #[error("ambiguous lattice class: {0} candidates")]
    Ambiguous(usize),
    #[error("not rank-one certified: {0}")]
    NotCertified(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Triangulation of a polygon with counterclockwise numbered vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triangulation {
    pub n_vertices: usize,
    /// Edges as sorted vertex pairs.
    pub edges: Vec<(usize, usize)>,
    /// Triangles as counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Edge indices of each triangle, in the order `v0v1, v1v2, v2v0`.
    pub triangle_edges: Vec<[usize; 3]>,
    /// Interior edges, in basis order.
    pub interior: Vec<usize>,
}

/// Edge sequences around the quadrilateral of an interior edge.
///
/// With quadrilateral vertices `v0..v3` counterclockwise and the edge equal
/// to `v1v3`: `e` turns clockwise around `v0` starting at `v0v1`, `f` around
/// `v2` from `v2v3`, `g` around `v3` from `v3v0` and `h` around `v1` from
/// `v1v2`. Each sequence stops before the first boundary edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFans {
    pub quad: [usize; 4],
    pub e: Vec<usize>,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    pub h: Vec<usize>,
}

impl Triangulation {
    /// Builds a triangulation of the `n`-gon from its triangles.
    pub fn from_triangles(n_vertices: usize, triangles: Vec<[usize; 3]>) -> Result<Self, HomologyError> {
        if n_vertices < 3 {
            return Err(HomologyError::InvalidTriangulation("need at least three vertices".into()));
        }
        if triangles.len() != n_vertices - 2 {
            return Err(HomologyError::InvalidTriangulation(format!(
                "{} triangles for a {}-gon",
                triangles.len(),
                n_vertices
            )));
        }
        let mut edge_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut tris = Vec::new();
        let mut tri_edges = Vec::new();
        let mut uses: Vec<usize> = Vec::new();
        for t in triangles {
            let mut t = t;
            t.sort_unstable();
            if t[0] == t[1] || t[1] == t[2] || t[2] >= n_vertices {
                return Err(HomologyError::InvalidTriangulation(format!("bad triangle {t:?}")));
            }
            let mut te = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    uses.push(0);
                    edges.len() - 1
                });
                uses[id] += 1;
                te[k] = id;
            }
            tris.push(t);
            tri_edges.push(te);
        }
        let mut interior = Vec::new();
        for (id, &(a, b)) in edges.iter().enumerate() {
            let side = b == a + 1 || (a == 0 && b == n_vertices - 1);
            match (side, uses[id]) {
                (true, 1) => {}
                (false, 2) => interior.push(id),
                _ => {
                    return Err(HomologyError::InvalidTriangulation(format!(
                        "edge ({a},{b}) lies in {} triangles",
                        uses[id]
                    )))
                }
            }
        }
        if edges.len() != 2 * n_vertices - 3 {
            return Err(HomologyError::InvalidTriangulation("polygon sides missing".into()));
        }
        // crossing diagonals would make the count above fail or overlap; check planarity
        for &i in &interior {
            for &j in &interior {
                if i < j && diagonals_cross(edges[i], edges[j]) {
                    return Err(HomologyError::InvalidTriangulation("crossing diagonals".into()));
                }
            }
        }
        Ok(Triangulation { n_vertices, edges, triangles: tris, triangle_edges: tri_edges, interior })
    }

    /// Uniformly random-ish triangulation of the `n`-gon by recursive splitting.
    pub fn random_polygon<R: Rng>(n_vertices: usize, rng: &mut R) -> Self {
        fn split<R: Rng>(poly: &[usize], rng: &mut R, out: &mut Vec<[usize; 3]>) {
            if poly.len() < 3 {
                return;
            }
            if poly.len() == 3 {
                out.push([poly[0], poly[1], poly[2]]);
                return;
            }
            // triangle on the edge poly[0]..poly[last]
            let k = rng.gen_range(1..poly.len() - 1);
            out.push([poly[0], poly[k], poly[poly.len() - 1]]);
            split(&poly[..=k], rng, out);
            split(&poly[k..], rng, out);
        }
        let poly: Vec<usize> = (0..n_vertices).collect();
        let mut tris = Vec::new();
        split(&poly, rng, &mut tris);
        Triangulation::from_triangles(n_vertices, tris).expect("recursive split is a triangulation")
    }

    pub fn rank(&self) -> usize {
        self.interior.len()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.iter().position(|&e| e == key)
    }

    pub fn is_interior(&self, e: usize) -> bool {
        self.interior.contains(&e)
    }

    /// Position of an interior edge in the basis.
    pub fn basis_index(&self, e: usize) -> Option<usize> {
        self.interior.iter().position(|&x| x == e)
    }

    /// Intersection pairing on the interior edges, in basis order.
    pub fn pairing(&self) -> Vec<Vec<i64>> {
        let r = self.rank();
        let mut m = vec![vec![0i64; r]; r];
        for te in &self.triangle_edges {
            for k in 0..3 {
                let (e, f) = (te[k], te[(k + 1) % 3]);
                if let (Some(i), Some(j)) = (self.basis_index(e), self.basis_index(f)) {
                    m[i][j] += 1;
                    m[j][i] -= 1;
                }
            }
        }
        m
    }

    /// Third vertex `x` of the triangle `(v, x, w)` with counterclockwise orientation.
    fn ccw_apex(&self, v: usize, w: usize) -> Option<usize> {
        for t in &self.triangles {
            for k in 0..3 {
                if t[k] == v && t[(k + 2) % 3] == w {
                    return Some(t[(k + 1) % 3]);
                }
            }
        }
        None
    }

    /// The quadrilateral `v0..v3` of an interior edge, with the edge equal to `v1v3`.
    pub fn quad(&self, e: usize) -> Result<[usize; 4], HomologyError> {
        if !self.is_interior(e) {
            return Err(HomologyError::NotInterior(e));
        }
        let (a, b) = self.edges[e];
        // triangles (a, b, x) and (b, a, y) are ccw, so the quad ccw is (x, a, y, b)
        let x = self.apex_after(a, b).ok_or(HomologyError::NotInterior(e))?;
        let y = self.apex_after(b, a).ok_or(HomologyError::NotInterior(e))?;
        Ok([x, a, y, b])
    }

    /// Third vertex of the counterclockwise triangle `(u, w, x)`.
    fn apex_after(&self, u: usize, w: usize) -> Option<usize> {
        for t in &self.triangles {
            for k in 0..3 {
                if t[k] == u && t[(k + 1) % 3] == w {
                    return Some(t[(k + 2) % 3]);
                }
            }
        }
        None
    }

    /// Interior edges met turning clockwise around `v`, starting with `vw`.
    fn clockwise_fan(&self, v: usize, w: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = w;
        loop {
            let Some(id) = self.edge_index(v, cur) else { break };
            if !self.is_interior(id) {
                break;
            }
            out.push(id);
            match self.ccw_apex(v, cur) {
                Some(x) => cur = x,
                None => break,
            }
            if out.len() > self.edges.len() {
                break;
            }
        }
        out
    }

    /// The four edge fans around an interior edge.
    pub fn fans(&self, e: usize) -> Result<EdgeFans, HomologyError> {
        let q = self.quad(e)?;
        let [v0, v1, v2, v3] = q;
        Ok(EdgeFans {
            quad: q,
            e: self.clockwise_fan(v0, v1),
            f: self.clockwise_fan(v2, v3),
            g: self.clockwise_fan(v3, v0),
            h: self.clockwise_fan(v1, v2),
        })
    }
}

fn diagonals_cross(a: (usize, usize), b: (usize, usize)) -> bool {
    let inside = |x: usize, (p, q): (usize, usize)| p < x && x < q;
    let shared = a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1;
    !shared && (inside(b.0, a) != inside(b.1, a))
}

/// Standard basis of the hat-homology lattice indexed by interior edges.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HatBasis {
    /// Interior edge ids in basis order.
    pub edges: Vec<usize>,
    /// `Z` of each basis class, in basis order.
    pub edge_charge: Vec<Complex64>,
}

impl HatBasis {
    pub fn rank(&self) -> usize {
        self.edges.len()
    }

    pub fn vector(&self, edge: usize) -> Option<LatticeVector> {
        let i = self.edges.iter().position(|&e| e == edge)?;
        Some(LatticeVector::unit(self.rank(), i))
    }

    /// Charge lattice with the triangulation's pairing.
    pub fn lattice(&self, t: &Triangulation) -> Result<ChargeLattice, HomologyError> {
        Ok(ChargeLattice::new(t.pairing(), self.edge_charge.clone())?)
    }
}

fn separatrix_long(q: &QuadraticDifferential, zero: usize, ray: usize, theta: f64, cap: f64) -> Result<TrajectorySegment, HomologyError> {
    let t = integrate_trajectory(q, TrajectoryStart::Separatrix { zero, ray }, theta, cap, &IntegrationOptions::default())?;
    match t.terminus {
        Terminus::Escaped => Ok(t),
        Terminus::HitZero(_) => Err(GeometryError::ActivePhase(theta).into()),
        Terminus::LengthCapped => Err(GeometryError::CapTooSmall(zero).into()),
    }
}

/// Triangulation and hat basis of a saddle-free phase.
///
/// Each class is oriented so that `Im(e^{-i theta} Z) > 0`.
pub fn triangulation_from_network(
    q: &QuadraticDifferential,
    theta: f64,
    cap: f64,
) -> Result<(Triangulation, HatBasis), HomologyError> {
    let nz = q.zeros().len();
    let m = q.asymptotic_directions();
    let mut seps = Vec::with_capacity(nz);
    let mut triangles = Vec::with_capacity(nz);
    for zero in 0..nz {
        let mut rays = Vec::new();
        let mut tri = [0usize; 3];
        for ray in 0..3 {
            let t = separatrix_long(q, zero, ray, theta, cap)?;
            tri[ray] = escape_index(q, theta, t.end());
            rays.push(t);
        }
        seps.push(rays);
        triangles.push(tri);
    }
    if nz == 0 {
        let t = Triangulation { n_vertices: m, edges: vec![], triangles: vec![], triangle_edges: vec![], interior: vec![] };
        return Ok((t, HatBasis { edges: vec![], edge_charge: vec![] }));
    }
    let tri = Triangulation::from_triangles(m, triangles.clone())?;
    let mut charges = Vec::new();
    for &e in &tri.interior {
        let (i, j) = tri.edges[e];
        let owners: Vec<usize> = (0..nz).filter(|&z| triangles[z].contains(&i) && triangles[z].contains(&j)).collect();
        if owners.len() != 2 {
            return Err(HomologyError::InvalidTriangulation(format!("edge {e} has {} owners", owners.len())));
        }
        let (a, b) = (owners[0], owners[1]);
        let ra = triangles[a].iter().position(|&x| x == i).unwrap();
        let rb = triangles[b].iter().position(|&x| x == i).unwrap();
        let ta = &seps[a][ra];
        let tb = &seps[b][rb];
        let mut path: Vec<Complex64> = ta.points.clone();
        path.extend(tb.points.iter().rev());
        let (z, _) = period_with_end(q, &path, ta.lambdas[1], &PeriodOptions::default())?;
        let mut hat = z * 2.0;
        if (hat * Complex64::from_polar(1.0, -theta)).im < 0.0 {
            hat = -hat;
        }
        charges.push(hat);
    }
    let basis = HatBasis { edges: tri.interior.clone(), edge_charge: charges };
    Ok((tri, basis))
}

/// Pairing matrix of a triangulation (alias of [`Triangulation::pairing`]).
pub fn pairing_from_triangulation(t: &Triangulation) -> Vec<Vec<i64>> {
    t.pairing()
}

/// Integer vector `n` with `hat_charge ~ sum n_e Z(e)`, within `tol * (1 + |hat_charge|)`.
pub fn class_from_charge(hat_charge: Complex64, basis: &HatBasis, tol: f64) -> Result<LatticeVector, HomologyError> {
    let r = basis.rank();
    let zs = &basis.edge_charge;
    let thresh = tol * (1.0 + hat_charge.norm());
    let residual = |n: &[i64]| -> f64 {
        let s: Complex64 = n.iter().zip(zs).map(|(c, z)| z * (*c as f64)).sum();
        (s - hat_charge).norm()
    };
    let mut candidates: Vec<Vec<i64>> = Vec::new();
    match r {
        0 => return Err(HomologyError::Unclassified(hat_charge.norm())),
        1 => {
            let x = hat_charge / zs[0];
            candidates.push(vec![x.re.round() as i64]);
        }
        2 => {
            let det = zs[0].re * zs[1].im - zs[0].im * zs[1].re;
            if det.abs() < 1e-14 {
                return Err(HomologyError::Ambiguous(0));
            }
            let a = (hat_charge.re * zs[1].im - hat_charge.im * zs[1].re) / det;
            let b = (zs[0].re * hat_charge.im - zs[0].im * hat_charge.re) / det;
            let (a0, b0) = (a.round() as i64, b.round() as i64);
            for da in -1..=1 {
                for db in -1..=1 {
                    candidates.push(vec![a0 + da, b0 + db]);
                }
            }
        }
        _ => {
            let bound = 3i64;
            let mut cur = vec![-bound; r];
            loop {
                candidates.push(cur.clone());
                let mut k = 0;
                while k < r {
                    cur[k] += 1;
                    if cur[k] <= bound {
                        break;
                    }
                    cur[k] = -bound;
                    k += 1;
                }
                if k == r {
                    break;
                }
            }
        }
    }
    let ok: Vec<&Vec<i64>> = candidates.iter().filter(|n| residual(n) < thresh).collect();
    match ok.len() {
        0 => {
            let best = candidates.iter().map(|n| residual(n)).fold(f64::INFINITY, f64::min);
            Err(HomologyError::Unclassified(best))
        }
        1 => Ok(LatticeVector(ok[0].clone())),
        k => Err(HomologyError::Ambiguous(k)),
    }
}

/// Lattice class of a saddle connection from its hat charge.
pub fn class_from_periods(sc: &SaddleConnection, basis: &HatBasis, tol: f64) -> Result<LatticeVector, HomologyError> {
    class_from_charge(sc.hat_charge, basis, tol)
}

/// Rank-one ray types with the lattice data their BPS cycles need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RayKind {
    /// Single saddle connection of class `gamma0`.
    Case1 { gamma0: LatticeVector },
    /// Ring domain with core `gamma0` and boundary classes `top`, `bottom`.
    Case4a { gamma0: LatticeVector, top: LatticeVector, bottom: LatticeVector },
    /// Degenerate ring domain.
    Case3a { gamma0: LatticeVector, bottom: LatticeVector },
    /// Degenerate ring domain with a toral end.
    Case3b { gamma0: LatticeVector, gamma1: LatticeVector },
    /// Ring domain with a toral end.
    Case4b { gamma0: LatticeVector, gamma1: LatticeVector, gamma2: LatticeVector },
}

fn entry(vector: LatticeVector, omega: i64, cycle: LatticeVector) -> BpsEntry {
    BpsEntry { vector, omega, cycle }
}

/// BPS content of a rank-one ray.
pub fn bps_cycle(kind: &RayKind, phase: f64) -> Result<BpsRay, HomologyError> {
    let content = match kind {
        RayKind::Case1 { gamma0 } => vec![entry(gamma0.clone(), 1, gamma0.clone())],
        RayKind::Case4a { gamma0, top, bottom } => vec![entry(gamma0.clone(), -2, -&(top + bottom))],
        RayKind::Case3a { gamma0, bottom } => vec![entry(gamma0.clone(), -1, -bottom)],
        RayKind::Case3b { gamma0, gamma1 } => {
            let s = gamma0 + gamma1;
            vec![entry(gamma0.clone(), 2, s.clone()), entry(gamma0.scale(2), -1, -&s)]
        }
        RayKind::Case4b { gamma0, gamma1, gamma2 } => {
            let s = gamma0 + gamma1;
            vec![entry(gamma0.clone(), 2, s.clone()), entry(gamma0.scale(2), -2, -&(&s + gamma2))]
        }
    };
    Ok(BpsRay::new(phase, content)?)
}

/// BPS ray of a geometrically classified active ray; refuses uncertified rays.
pub fn bps_cycle_from_classification(
    class: &RayClassification,
    connections: &[SaddleConnection],
    phase: f64,
) -> Result<BpsRay, HomologyError> {
    match class {
        RayClassification::Case1 => {
            let c = connections.first().ok_or_else(|| HomologyError::NotCertified("no connection".into()))?;
            let g = c
                .lattice_class
                .clone()
                .ok_or_else(|| HomologyError::NotCertified("connection has no lattice class".into()))?;
            bps_cycle(&RayKind::Case1 { gamma0: g }, phase)
        }
        RayClassification::Case4a { .. } => Err(HomologyError::NotCertified(
            "ring domain boundary classes must be supplied explicitly".into(),
        )),
        RayClassification::Unknown(why) => Err(HomologyError::NotCertified(why.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn hexagon() -> Triangulation {
        // fan from vertex 0
        Triangulation::from_triangles(6, vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5]]).unwrap()
    }

    #[test]
    fn fan_triangulation_has_expected_edges() {
        let t = hexagon();
        assert_eq!(t.rank(), 3);
        assert_eq!(t.edges.len(), 9);
    }

    #[test]
    fn pairing_of_adjacent_edges_is_unit() {
        let t = hexagon();
        let p = t.pairing();
        for i in 0..3 {
            assert_eq!(p[i][i], 0);
        }
        let d02 = t.basis_index(t.edge_index(0, 2).unwrap()).unwrap();
        let d03 = t.basis_index(t.edge_index(0, 3).unwrap()).unwrap();
        let d04 = t.basis_index(t.edge_index(0, 4).unwrap()).unwrap();
        assert_eq!(p[d02][d03].abs(), 1);
        assert_eq!(p[d02][d04], 0);
        // around the fan vertex all consecutive diagonals pair the same way
        assert_eq!(p[d02][d03], p[d03][d04]);
    }

    #[test]
    fn rejects_crossing_diagonals() {
        assert!(Triangulation::from_triangles(4, vec![[0, 1, 2], [1, 2, 3]]).is_err());
    }

    #[test]
    fn quad_and_fans_match_figure_layout() {
        let t = hexagon();
        let e = t.edge_index(0, 3).unwrap();
        let q = t.quad(e).unwrap();
        // edge v1v3 is (0,3)
        assert!((q[1] == 0 && q[3] == 3) || (q[1] == 3 && q[3] == 0));
        let f = t.fans(e).unwrap();
        let all: Vec<usize> = f.e.iter().chain(&f.f).chain(&f.g).chain(&f.h).copied().collect();
        assert!(all.iter().all(|x| t.is_interior(*x)));
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn random_triangulations_are_valid() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for n in 3..12 {
            let t = Triangulation::random_polygon(n, &mut rng);
            assert_eq!(t.rank(), n - 3);
        }
    }

    #[test]
    fn class_from_charge_inverts_sums() {
        let b = HatBasis { edges: vec![0, 1], edge_charge: vec![Complex64::new(1.0, 1.0), Complex64::new(-0.5, 2.0)] };
        let z = b.edge_charge[0] + b.edge_charge[1];
        assert_eq!(class_from_charge(z, &b, 1e-6).unwrap(), LatticeVector(vec![1, 1]));
        assert_eq!(class_from_charge(b.edge_charge[0], &b, 1e-6).unwrap(), LatticeVector(vec![1, 0]));
        assert!(class_from_charge(z * 1.1, &b, 1e-6).is_err());
    }

    #[test]
    fn bps_content_matches_ray_types() {
        let g0 = LatticeVector(vec![1, 0, 0]);
        let g1 = LatticeVector(vec![0, 1, 0]);
        let g2 = LatticeVector(vec![0, 0, 1]);
        let r = bps_cycle(&RayKind::Case1 { gamma0: g0.clone() }, 0.3).unwrap();
        assert_eq!(r.content[0].omega, 1);
        let r = bps_cycle(&RayKind::Case4a { gamma0: g0.clone(), top: g1.clone(), bottom: g2.clone() }, 0.3).unwrap();
        assert_eq!(r.content[0].omega, -2);
        assert_eq!(r.content[0].cycle, LatticeVector(vec![0, -1, -1]));
        let r = bps_cycle(&RayKind::Case4b { gamma0: g0.clone(), gamma1: g1, gamma2: g2 }, 0.3).unwrap();
        let omegas: Vec<i64> = r.content.iter().map(|e| e.omega).collect();
        assert_eq!(omegas, vec![2, -2]);
        assert_eq!(r.content[1].vector, g0.scale(2));
    }
}
