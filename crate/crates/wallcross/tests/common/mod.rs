#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use wallcross::lattice_algebra::{
    coeff, k_apply_series, twisted_multiply, BpsRay, ChargeLattice, Coeff, LatticeVector, TwistedSeries,
};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Half-ellipse `center + e^{i rot} (a cos phi + i b sin phi)`, `phi` from `-pi/2` to `pi/2`.
pub fn arc(center: Complex64, a: f64, b: f64, rot: f64, n: usize) -> Vec<Complex64> {
    let r = Complex64::from_polar(1.0, rot);
    (0..=n)
        .map(|k| {
            let phi = -PI / 2.0 + PI * k as f64 / n as f64;
            center + r * c(a * phi.cos(), b * phi.sin())
        })
        .collect()
}

pub fn segment(p: Complex64, q: Complex64, n: usize) -> Vec<Complex64> {
    (0..=n).map(|k| p + (q - p) * (k as f64 / n as f64)).collect()
}

/// Random data for one round of the algebra laws. All charges lie in the
/// acute cone of phases `[0.2, 1.3]` and all vectors have non-negative
/// entries, so `|Z|` grows under addition and truncation is a morphism.
pub struct LawCase {
    pub lat: ChargeLattice,
    pub pairing: Vec<Vec<i64>>,
    pub a: TwistedSeries,
    pub b: TwistedSeries,
    pub d: TwistedSeries,
    pub ray: BpsRay,
    pub level: f64,
}

fn random_vector<R: Rng>(rng: &mut R, rank: usize, allow_zero: bool) -> LatticeVector {
    loop {
        let v = LatticeVector((0..rank).map(|_| rng.gen_range(0..=2)).collect());
        if allow_zero || !v.is_zero() {
            return v;
        }
    }
}

fn random_series<R: Rng>(rng: &mut R, rank: usize) -> TwistedSeries {
    let mut s = TwistedSeries::zero(rank, f64::INFINITY);
    for _ in 0..rng.gen_range(1..=4) {
        let k = rng.gen_range(-3..=3);
        if k != 0 {
            s.add_term(random_vector(rng, rank, true), coeff(k));
        }
    }
    s
}

pub fn law_case(seed: u64) -> LawCase {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let rank = rng.gen_range(2..=4);
    let mut pairing = vec![vec![0i64; rank]; rank];
    for i in 0..rank {
        for j in i + 1..rank {
            let x = rng.gen_range(-2..=2);
            pairing[i][j] = x;
            pairing[j][i] = -x;
        }
    }
    let charges = (0..rank).map(|_| Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.2..1.3))).collect();
    let lat = ChargeLattice::new(pairing.clone(), charges).unwrap();
    let g = random_vector(&mut rng, rank, false).primitive().0;
    let omega = [1, -2, 2, -1][rng.gen_range(0..4)];
    let ray = BpsRay::single(lat.z(&g).arg(), g, omega).unwrap();
    let level = rng.gen_range(2.0..6.0);
    let a = random_series(&mut rng, rank);
    let b = random_series(&mut rng, rank);
    let d = random_series(&mut rng, rank);
    LawCase { lat, pairing, a, b, d, ray, level }
}

fn at(s: &TwistedSeries, lat: &ChargeLattice, level: f64) -> TwistedSeries {
    s.clone().with_level(f64::INFINITY).truncated(lat, level)
}

fn mul(x: &TwistedSeries, y: &TwistedSeries, lat: &ChargeLattice) -> TwistedSeries {
    twisted_multiply(x, y, lat).unwrap()
}

/// Twisted-product sign rule, associativity, truncation morphism, K
/// multiplicativity and `K^{-1} K = id`, all exact.
pub fn check_laws(case: &LawCase) -> Result<(), String> {
    let lat = &case.lat;
    let l = case.level;
    // sign rule on monomials, with the pairing evaluated from the raw matrix
    for v in case.a.terms().keys() {
        for w in case.b.terms().keys() {
            let mut p = 0i64;
            for i in 0..v.rank() {
                for j in 0..w.rank() {
                    p += v.0[i] * case.pairing[i][j] * w.0[j];
                }
            }
            let big = 1e9;
            let prod = mul(
                &TwistedSeries::monomial(v.clone(), coeff(1), big),
                &TwistedSeries::monomial(w.clone(), coeff(1), big),
                lat,
            );
            let expected = TwistedSeries::monomial(v + w, coeff(if p % 2 == 0 { 1 } else { -1 }), big);
            if prod != expected {
                return Err(format!("sign rule fails for {v} * {w}"));
            }
        }
    }
    let (a, b, d) = (at(&case.a, lat, l), at(&case.b, lat, l), at(&case.d, lat, l));
    // associativity
    if mul(&mul(&a, &b, lat), &d, lat) != mul(&a, &mul(&b, &d, lat), lat) {
        return Err("associativity fails".into());
    }
    // truncation is a morphism on the cone
    let big = 4.0 * l + 10.0;
    let full = mul(&at(&case.a, lat, big), &at(&case.b, lat, big), lat);
    if at(&full, lat, l).terms() != mul(&a, &b, lat).terms() {
        return Err("truncation is not multiplicative".into());
    }
    // K is multiplicative
    let k = |s: &TwistedSeries| k_apply_series(&case.ray, s, l, lat).unwrap();
    if k(&mul(&a, &b, lat)).terms() != mul(&k(&a), &k(&b), lat).terms() {
        return Err("K is not multiplicative".into());
    }
    // K^{-1} K = id
    let back = k_apply_series(&case.ray.inverse(), &k(&a), l, lat).unwrap();
    if back.terms() != a.terms() {
        return Err("K^-1 K is not the identity".into());
    }
    Ok(())
}

pub fn one() -> Coeff {
    coeff(1)
}
