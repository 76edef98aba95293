//! Acceptance suite: runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{arc, c, segment};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use wallcross::cli::{analyze_surface, run_verify_wcf, RunConfig};
use wallcross::flat_geometry::{QuadraticDifferential, ScanOptions};
use wallcross::homology::{HatBasis, Triangulation};
use wallcross::laminations::{
    approximate_generator, coordinates_from_lamination, lamination_from_coordinates, linear_step_bound,
    EdgeCoordinates,
};
use wallcross::lattice_algebra::{
    coeff, dt_exp_check, word_equal, ApplicationOrder, AutomorphismWord, BpsEntry, BpsRay, ChargeLattice,
    LatticeVector, Sector, TwistedSeries,
};
use wallcross::path_lift::{
    lift_one_sided, lift_path, lift_path_with, limit_check, model_fixtures, wall_identity_components, CrossingType,
    LiftOptions, LocalModel, ModelKind, PathBase, Side,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn v(x: &[i64]) -> LatticeVector {
    LatticeVector(x.to_vec())
}

/// 1. Pentagon identity on the rank-2 lattice with unit pairing.
fn pentagon() -> Outcome {
    let start = Instant::now();
    let z1 = Complex64::from_polar(1.0, 0.4 * PI);
    let z2 = Complex64::from_polar(1.0, 0.6 * PI);
    let lat = ChargeLattice::new(vec![vec![0, 1], vec![-1, 0]], vec![z1, z2]).unwrap();
    let level = 8.0 * z1.norm().max(z2.norm());
    let ray = |x: &[i64], phase: f64| BpsRay::single(phase, v(x), 1).unwrap();
    // K_{g1} K_{g2} on one side, K_{g2} K_{g1+g2} K_{g1} on the other
    let left = vec![ray(&[1, 0], 0.4 * PI), ray(&[0, 1], 0.6 * PI)];
    let right = vec![ray(&[0, 1], 0.4 * PI), ray(&[1, 1], 0.5 * PI), ray(&[1, 0], 0.6 * PI)];
    let order = ApplicationOrder::Cw;
    let w1 = AutomorphismWord::from_unordered(left, order, None).unwrap();
    let w2 = AutomorphismWord::from_unordered(right, order, None).unwrap();
    ensure(word_equal(&w1, &w2, level, &lat), "words differ")?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("L = {level}, {:?}", start.elapsed()))
}

/// 2. A1 spectrum in the sector (pi/4, 3pi/4).
fn a1_geometry() -> Outcome {
    let start = Instant::now();
    let surface = wallcross::cli::SurfaceSpec { coeffs: vec![[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]] };
    let sector = Sector::new(PI / 4.0, 3.0 * PI / 4.0).unwrap();
    let side = analyze_surface(&surface, &sector, 10.0, &ScanOptions::default(), 1e-6).map_err(|e| e.to_string())?;
    ensure(side.entries.len() == 1, format!("{} active rays", side.entries.len()))?;
    let e = &side.entries[0];
    ensure((e.phase - PI / 2.0).abs() < 1e-9, format!("phase {}", e.phase))?;
    ensure((e.abs_z - PI / 2.0).abs() < 1e-6, format!("|Z| = {}", e.abs_z))?;
    ensure((e.hat_charge - c(0.0, PI)).norm() < 1e-6, format!("hat charge {}", e.hat_charge))?;
    ensure(e.omega == Some(1) && e.class == Some(v(&[1])), "class or Omega")?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("|Z| = {:.12}, {:?}", e.abs_z, start.elapsed()))
}

const A2_CONFIG: &str = r#"
schema = "wallcross-config/1"
sector = [0.3, 1.3]
truncation_factor = 6.0
cap = 100.0
order = "cw"

[tolerances]
charge = 1e-6
samples = 360

[family]
base = [[0.0, 0.0], [-3.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
index = 0
direction = [0.0, 1.0]
range = [1.0, 3.0]
points = 11
"#;

/// 3. A2 wall crossing at an automatically detected wall.
fn a2_wall_crossing() -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig::from_toml(A2_CONFIG).map_err(|e| e.to_string())?;
    let report = run_verify_wcf(&cfg).map_err(|e| e.to_string())?;
    ensure(report.status() == Some("PASS"), format!("status {:?}: {}", report.status(), report.body["difference"]))?;
    let sides = &report.body["sides"];
    let n0 = sides[0]["rays"].as_array().map_or(0, Vec::len);
    let n1 = sides[1]["rays"].as_array().map_or(0, Vec::len);
    ensure(n0 != n1, "sides have the same number of rays")?;
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "wall between t = {} and {}, {n0} vs {n1} rays, L = {}, {:?}",
        sides[0]["parameter"],
        sides[1]["parameter"],
        report.body["truncation"],
        start.elapsed()
    ))
}

/// 4. Wall identities in all local models.
fn wall_identities() -> Outcome {
    let mut count = 0;
    for m in model_fixtures() {
        let ray = m.bps_ray(0.0).map_err(|e| e.to_string())?;
        let r = wall_identity_components(&m, &ray, 7.3).map_err(|e| e.to_string())?;
        ensure(r.passed, format!("{:?} {:?}: {:?}", m.kind, m.crossing, r.components))?;
        if m.kind == ModelKind::Cylinder {
            ensure(r.components.len() == 4 && r.components.iter().all(|(_, ok)| *ok), "cylinder components")?;
        }
        count += 1;
    }
    let cyl = LocalModel::fixture(ModelKind::Cylinder, CrossingType::OnSaddle).map_err(|e| e.to_string())?;
    let twists = lift_one_sided(&cyl, Side::Minus, 6.3).map_err(|e| e.to_string())?.component(1, 2).len();
    ensure(twists >= 6, format!("only {twists} twist terms"))?;
    Ok(format!("{count} models, {twists} cylinder twist terms"))
}

/// 5. One-sided limits at the A1 saddle phase.
fn one_sided_limits() -> Outcome {
    let q = QuadraticDifferential::new(vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let level = 4.0 * PI;
    let path = segment(c(0.0, -0.5), c(0.0, 0.5), 15);
    let mut matched = 0;
    for eps in [1e-2, 1e-3] {
        let r = limit_check(&q, PI / 2.0, &path, eps, level).map_err(|e| e.to_string())?;
        ensure(r.plus && r.minus, format!("eps = {eps}: {r:?}"))?;
        matched += r.matched_terms;
    }
    Ok(format!("{matched} terms matched"))
}

/// 6. Homotopy invariance across a zero and a trajectory, and the jump at a trajectory end.
fn homotopy() -> Outcome {
    let q = QuadraticDifferential::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let left = arc(c(-0.5, 0.0), 0.3, 1.0, 0.0, 80);
    let right = arc(c(-0.5, 0.0), 1.5, 1.0, 0.0, 80);
    for theta in [0.0, 0.4, -0.7] {
        let fl = lift_path(&q, &left, theta, 12.0).map_err(|e| e.to_string())?;
        let fr = lift_path(&q, &right, theta, 12.0).map_err(|e| e.to_string())?;
        ensure(fl.equals(&fr), format!("across the zero at theta = {theta}"))?;
    }
    let shallow = arc(c(2.0, 0.5), 0.2, 0.5, -PI / 2.0, 40);
    let deep = arc(c(2.0, 0.5), 1.0, 0.5, -PI / 2.0, 40);
    let fs = lift_path(&q, &shallow, 0.0, 12.0).map_err(|e| e.to_string())?;
    let fd = lift_path(&q, &deep, 0.0, 12.0).map_err(|e| e.to_string())?;
    ensure(fs.equals(&fd), "across the trajectory")?;
    let opts = LiftOptions { cap: Some(2.0), allow_active: false };
    let before = lift_path_with(&q, &arc(c(1.5, 0.0), 0.3, 0.5, 0.0, 40), 0.0, 20.0, &opts).map_err(|e| e.to_string())?;
    let beyond = lift_path_with(&q, &arc(c(1.5, 0.0), 0.9, 0.5, 0.0, 40), 0.0, 20.0, &opts).map_err(|e| e.to_string())?;
    let diff = before.minus(&beyond);
    ensure(diff.len() == 1, format!("end crossing changes {} terms", diff.len()))?;
    ensure(matches!(diff.terms[0].class.base, PathBase::Geometric { detours: 1 }), "jump is not one detour")?;
    Ok("zero x3 phases, trajectory, truncated end".into())
}

/// 7. Coordinates of the lamination built from coordinates.
fn fg_roundtrip() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(20240501);
    let mut max_edges = 0;
    for _ in 0..1000 {
        let t = Triangulation::random_polygon(rng.gen_range(4..=11), &mut rng);
        max_edges = max_edges.max(t.interior.len());
        let n = EdgeCoordinates { values: (0..t.interior.len()).map(|_| rng.gen_range(-5..=5)).collect() };
        let lam = lamination_from_coordinates(&n, &t).map_err(|e| e.to_string())?;
        let back = coordinates_from_lamination(&lam, &t).map_err(|e| e.to_string())?;
        ensure(back == n, format!("{:?} -> {:?} on {:?}", n.values, back.values, t.triangles))?;
    }
    ensure(max_edges <= 8, "too many interior edges")?;
    Ok(format!("1000 tuples, up to {max_edges} interior edges"))
}

/// 8. Approximation of generators by lamination lifts.
fn approximation() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(8);
    let mut triangulations =
        vec![Triangulation::from_triangles(6, vec![[0, 1, 5], [1, 4, 5], [1, 2, 4], [2, 3, 4]]).unwrap()];
    for _ in 0..4 {
        triangulations.push(Triangulation::random_polygon(rng.gen_range(5..=8), &mut rng));
    }
    let mut runs = 0;
    let mut max_steps = 0;
    for t in triangulations {
        let basis = HatBasis {
            edges: t.interior.clone(),
            edge_charge: t.interior.iter().map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(0.4..1.6))).collect(),
        };
        let lat = basis.lattice(&t).unwrap();
        let min_im = basis.edge_charge.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        let level = 3.0 * min_im;
        let bound = linear_step_bound(&basis, level);
        for &e in &t.interior {
            for sign in [1, -1] {
                let a = approximate_generator(e, sign, &t, &basis, level).map_err(|e| e.to_string())?;
                let target = TwistedSeries::monomial(basis.vector(e).unwrap().scale(sign), coeff(1), level).truncated(&lat, level);
                ensure(a.series.terms() == target.terms(), format!("edge {e} sign {sign}: {}", a.series.render()))?;
                ensure(a.defect_depths.last() == Some(&f64::INFINITY), "defect did not clear the level")?;
                ensure(a.steps <= bound, format!("{} steps > bound {bound}", a.steps))?;
                runs += 1;
                max_steps = max_steps.max(a.steps);
            }
        }
    }
    Ok(format!("{runs} runs, at most {max_steps} steps"))
}

/// 9. BPS automorphisms agree with the exponential of the DT series.
fn dt_exponential() -> Outcome {
    let g = v(&[1, 0]);
    let zg = c(0.0, 1.0);
    let lat = ChargeLattice::new(vec![vec![0, 1], vec![-1, 0]], vec![zg, c(1.0, 1.0)]).unwrap();
    let level = 8.0 * zg.norm();
    let entry = |vector: LatticeVector, omega: i64| BpsEntry { cycle: vector.scale(omega), vector, omega };
    let rays = [
        ("+1", BpsRay::new(PI / 2.0, vec![entry(g.clone(), 1)]).unwrap()),
        ("-2", BpsRay::new(PI / 2.0, vec![entry(g.clone(), -2)]).unwrap()),
        ("(+2,-1)", BpsRay::new(PI / 2.0, vec![entry(g.clone(), 2), entry(g.scale(2), -1)]).unwrap()),
    ];
    for (name, ray) in &rays {
        for alpha in [v(&[0, 1]), v(&[1, 1]), v(&[0, 2]), v(&[-1, 1])] {
            ensure(dt_exp_check(ray, &alpha, level, &lat), format!("Omega {name}, alpha {alpha}"))?;
        }
    }
    Ok("3 ray contents x 4 targets".into())
}

/// 10. Randomized algebra laws.
fn algebra_laws() -> Outcome {
    for seed in 0..500u64 {
        common::check_laws(&common::law_case(seed)).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok("500 cases".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("pentagon identity", pentagon),
        ("A1 geometry", a1_geometry),
        ("A2 wall crossing", a2_wall_crossing),
        ("wall identities in local models", wall_identities),
        ("one-sided limits", one_sided_limits),
        ("homotopy invariance", homotopy),
        ("FG roundtrip", fg_roundtrip),
        ("approximation by lamination lifts", approximation),
        ("DT exponential", dt_exponential),
        ("algebra laws", algebra_laws),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
