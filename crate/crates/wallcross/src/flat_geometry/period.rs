//! Periods `int sqrt(P) dz` along polylines, with continuous branch tracking
//! and a `z = z0 + h sigma^2` substitution at endpoints that sit on zeros.

use num_complex::Complex64;

use super::{GeometryError, QuadraticDifferential};

/// Options for [`period`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodOptions {
    /// Relative tolerance per quadrature panel.
    pub tol: f64,
    /// Maximal bisection depth of the adaptive rule.
    pub max_depth: usize,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        PeriodOptions { tol: 1e-13, max_depth: 40 }
    }
}

// 10-point Gauss–Legendre rule on [-1, 1]
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn nodes() -> [(f64, f64); 10] {
    let mut out = [(0.0, 0.0); 10];
    for i in 0..5 {
        out[4 - i] = (-GL_X[i], GL_W[i]);
        out[5 + i] = (GL_X[i], GL_W[i]);
    }
    out
}

/// Gauss–Legendre on `[t0, t1]` with branch continuation in order of `t`.
/// Returns the integral, the branch at `t1`, and whether the branch moved smoothly.
fn gl_panel<F>(f: &F, t0: f64, t1: f64, br0: Complex64) -> (Complex64, Complex64, bool)
where
    F: Fn(f64, Complex64) -> (Complex64, Complex64),
{
    let mid = 0.5 * (t0 + t1);
    let half = 0.5 * (t1 - t0);
    let mut br = br0;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut smooth = true;
    for (x, w) in nodes() {
        let (v, b) = f(mid + half * x, br);
        if (b - br).norm() > 0.5 * b.norm().max(br.norm()) {
            smooth = false;
        }
        br = b;
        acc += v * w;
    }
    let (_, b_end) = f(t1, br);
    if (b_end - br).norm() > 0.5 * b_end.norm().max(br.norm()) {
        smooth = false;
    }
    (acc * half, b_end, smooth)
}

fn adaptive<F>(
    f: &F,
    t0: f64,
    t1: f64,
    br0: Complex64,
    tol: f64,
    depth: usize,
) -> Result<(Complex64, Complex64), GeometryError>
where
    F: Fn(f64, Complex64) -> (Complex64, Complex64),
{
    let (whole, br_whole, smooth_whole) = gl_panel(f, t0, t1, br0);
    let tm = 0.5 * (t0 + t1);
    let (left, br_mid, smooth_l) = gl_panel(f, t0, tm, br0);
    let (right, br_end, smooth_r) = gl_panel(f, tm, t1, br_mid);
    let ok = smooth_whole && smooth_l && smooth_r && (br_whole - br_end).norm() <= 1e-6 * br_end.norm().max(1e-300);
    if ok && (whole - (left + right)).norm() <= tol * (1.0 + (left + right).norm()) {
        return Ok((left + right, br_end));
    }
    if depth == 0 {
        if ok {
            return Ok((left + right, br_end));
        }
        let (z, _) = f(tm, br_mid);
        return Err(GeometryError::BranchAmbiguity(z));
    }
    let (a, b1) = adaptive(f, t0, tm, br0, tol, depth - 1)?;
    let (b, b2) = adaptive(f, tm, t1, b1, tol, depth - 1)?;
    Ok((a + b, b2))
}

fn zero_at(q: &QuadraticDifferential, z: Complex64) -> Option<Complex64> {
    q.zeros().iter().copied().find(|w| (z - w).norm() <= 1e-12 * (1.0 + w.norm()))
}

fn regular_segment(
    q: &QuadraticDifferential,
    a: Complex64,
    b: Complex64,
    lam_a: Complex64,
    opts: &PeriodOptions,
) -> Result<(Complex64, Complex64), GeometryError> {
    let d = b - a;
    let f = |t: f64, r: Complex64| {
        let lam = q.sqrt_near(a + d * t, r);
        (lam * d, lam)
    };
    adaptive(&f, 0.0, 1.0, lam_a, opts.tol, opts.max_depth)
}

/// Segment `a -> b` where `b` is a zero; `lam_a` is the branch at `a`.
fn into_zero(
    q: &QuadraticDifferential,
    a: Complex64,
    b: Complex64,
    lam_a: Complex64,
    opts: &PeriodOptions,
) -> Result<Complex64, GeometryError> {
    let h = a - b;
    let f = |s: f64, r: Complex64| {
        let z = b + h * (s * s);
        let g = if s == 0.0 { near_root(q.derivative(b) * h, r) } else { near_root(q.eval(z) / (s * s), r) };
        (g * h * (2.0 * s * s), g)
    };
    let (v, _) = adaptive(&f, 1.0, 0.0, lam_a, opts.tol, opts.max_depth)?;
    Ok(v)
}

/// Segment `a -> b` where `a` is a zero; the branch of `sqrt(P) / sigma` at
/// the zero is the one closest to `seed`.
fn out_of_zero(
    q: &QuadraticDifferential,
    a: Complex64,
    b: Complex64,
    seed: Complex64,
    opts: &PeriodOptions,
) -> Result<(Complex64, Complex64), GeometryError> {
    let h = b - a;
    let g0 = near_root(q.derivative(a) * h, seed);
    let f = |s: f64, r: Complex64| {
        let z = a + h * (s * s);
        let g = if s == 0.0 { near_root(q.derivative(a) * h, r) } else { near_root(q.eval(z) / (s * s), r) };
        (g * h * (2.0 * s * s), g)
    };
    adaptive(&f, 0.0, 1.0, g0, opts.tol, opts.max_depth)
}

fn near_root(w: Complex64, reference: Complex64) -> Complex64 {
    let r = w.sqrt();
    if (r - reference).norm_sqr() <= (r + reference).norm_sqr() {
        r
    } else {
        -r
    }
}

/// `int_path sqrt(P) dz` together with the branch of `sqrt(P)` at the end.
///
/// `branch_seed` picks the branch at the first point (or, if the path starts
/// at a zero, the branch along the first segment). The end branch is zero if
/// the path ends at a zero.
pub fn period_with_end(
    q: &QuadraticDifferential,
    path: &[Complex64],
    branch_seed: Complex64,
    opts: &PeriodOptions,
) -> Result<(Complex64, Complex64), GeometryError> {
    if path.len() < 2 {
        return Ok((Complex64::new(0.0, 0.0), q.sqrt_near(path.first().copied().unwrap_or_default(), branch_seed)));
    }
    let n = path.len();
    for (i, p) in path.iter().enumerate() {
        if i != 0 && i != n - 1 {
            if let Some((_, d)) = q.nearest_zero(*p) {
                if d <= 1e-12 * (1.0 + p.norm()) {
                    return Err(GeometryError::PathThroughZero(*p));
                }
            }
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut start = 0;
    let mut lam;
    if let Some(z0) = zero_at(q, path[0]) {
        let b = path[1];
        if n == 2 && zero_at(q, b).is_some() {
            let m = 0.5 * (z0 + b);
            let (v1, lm) = out_of_zero(q, z0, m, branch_seed, opts)?;
            let v2 = into_zero(q, m, zero_at(q, b).unwrap(), lm, opts)?;
            return Ok((v1 + v2, Complex64::new(0.0, 0.0)));
        }
        let (v, lb) = out_of_zero(q, z0, b, branch_seed, opts)?;
        total += v;
        lam = lb;
        start = 1;
    } else {
        lam = q.sqrt_near(path[0], branch_seed);
    }
    for i in start..n - 1 {
        let a = path[i];
        let b = path[i + 1];
        if i + 1 == n - 1 {
            if let Some(zb) = zero_at(q, b) {
                total += into_zero(q, a, zb, lam, opts)?;
                return Ok((total, Complex64::new(0.0, 0.0)));
            }
        }
        let (v, lb) = regular_segment(q, a, b, lam, opts)?;
        total += v;
        lam = lb;
    }
    Ok((total, lam))
}

/// `int_path sqrt(P) dz` with branch chosen by `branch_seed` at the start.
pub fn period(q: &QuadraticDifferential, path: &[Complex64], branch_seed: Complex64) -> Result<Complex64, GeometryError> {
    period_with_end(q, path, branch_seed, &PeriodOptions::default()).map(|(v, _)| v)
}
