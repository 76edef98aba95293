//! Polynomial roots by the Aberth–Ehrlich iteration with Newton polishing.

use num_complex::Complex64;

use super::GeometryError;

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of the polynomial with ascending coefficients `coeffs`.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, GeometryError> {
    let n = coeffs.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    // Cauchy bound for the initial circle
    let bound = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let radius = bound.min(1e6) * 0.5 + 0.1;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    let mut converged = false;
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += 1.0 / (z[i] - z[j]);
                }
            }
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            max_step = max_step.max(w.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    for r in z.iter_mut() {
        for _ in 0..5 {
            let (p, dp) = horner(&monic, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            *r -= step;
            if step.norm() < 1e-17 * (1.0 + r.norm()) {
                break;
            }
        }
    }
    if !converged {
        let ok = z.iter().all(|r| horner(&monic, *r).0.norm() < 1e-8 * (1.0 + r.norm().powi(n as i32)));
        if !ok {
            return Err(GeometryError::RootsNotConverged);
        }
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_roots_of_unity() {
        let c = vec![Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let r = polynomial_roots(&c).unwrap();
        assert_eq!(r.len(), 3);
        for z in r {
            assert!((z * z * z - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn finds_real_roots() {
        let c: Vec<Complex64> = [-1.0, 0.0, 1.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let r = polynomial_roots(&c).unwrap();
        assert!((r[0] + 1.0).norm() < 1e-14 && (r[1] - 1.0).norm() < 1e-14);
    }
}
