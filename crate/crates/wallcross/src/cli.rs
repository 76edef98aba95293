//! Batch commands behind the `wallcross` binary: configuration parsing,
//! spectrum scans, wall-crossing verification, network plots and the
//! lamination tools. Every command returns a [`Report`] with a stable schema
//! and an exit code; the binary only handles argument parsing and I/O.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::flat_geometry::{
    build_network, classify_ray, scan_with_options, GeometryError, QuadraticDifferential, RayClassification,
    ScanOptions, ScanResult,
};
use crate::homology::{class_from_charge, triangulation_from_network, HatBasis, HomologyError, Triangulation};
use crate::laminations::{approximate_generator, coordinates_from_lamination, lamination_from_coordinates, EdgeCoordinates};
use crate::lattice_algebra::{
    word_difference, ApplicationOrder, AutomorphismWord, BpsRay, ChargeLattice, LatticeVector, Sector,
};
use crate::path_lift::{model_fixtures, wall_identity_components};

pub const CONFIG_SCHEMA: &str = "wallcross-config/1";
pub const REPORT_SCHEMA: &str = "wallcross-report/1";

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CAP: i32 = 3;
    pub const UNRESOLVED: i32 = 4;
    pub const UNCERTIFIED: i32 = 5;
    pub const IO: i32 = 6;
    pub const INTERNAL: i32 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cap error: {0}")]
    Cap(String),
    #[error("unresolved phase interval: {0}")]
    Unresolved(String),
    #[error("not rank-one certified: {0}")]
    Uncertified(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Cap(_) => exit::CAP,
            CliError::Unresolved(_) => exit::UNRESOLVED,
            CliError::Uncertified(_) => exit::UNCERTIFIED,
            CliError::Io(_) => exit::IO,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::CapTooSmall(_) => CliError::Cap(e.to_string()),
            GeometryError::InvalidInput(_) => CliError::Config(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<HomologyError> for CliError {
    fn from(e: HomologyError) -> Self {
        match e {
            HomologyError::Geometry(g) => g.into(),
            HomologyError::NotCertified(why) => CliError::Uncertified(why),
            other => CliError::Internal(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// configuration

/// Polynomial `P(z)` of `q = P(z) dz^2`, coefficients `[re, im]` in ascending powers.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub coeffs: Vec<[f64; 2]>,
}

impl SurfaceSpec {
    pub fn differential(&self) -> Result<QuadraticDifferential, CliError> {
        Ok(QuadraticDifferential::new(self.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect())?)
    }
}

/// One-parameter family `P_c = base + c * direction * z^index`, `c` on a real grid.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub base: Vec<[f64; 2]>,
    pub index: usize,
    pub direction: [f64; 2],
    /// `[first, last]` grid values.
    pub range: [f64; 2],
    pub points: usize,
}

impl FamilySpec {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points.max(2);
        (0..n).map(|k| self.range[0] + (self.range[1] - self.range[0]) * k as f64 / (n - 1) as f64).collect()
    }

    pub fn surface(&self, c: f64) -> SurfaceSpec {
        let mut coeffs = self.base.clone();
        if coeffs.len() <= self.index {
            coeffs.resize(self.index + 1, [0.0, 0.0]);
        }
        coeffs[self.index][0] += c * self.direction[0];
        coeffs[self.index][1] += c * self.direction[1];
        SurfaceSpec { coeffs }
    }
}

/// A ray of a fixture word.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RaySpec {
    pub class: Vec<i64>,
    #[serde(default = "one")]
    pub omega: i64,
    /// Phase of the ray; defaults to `arg Z(class)`.
    pub phase: Option<f64>,
}

fn one() -> i64 {
    1
}

/// Two words on an explicit lattice.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FixtureSpec {
    pub pairing: Vec<Vec<i64>>,
    pub charges: Vec<[f64; 2]>,
    pub left: Vec<RaySpec>,
    pub right: Vec<RaySpec>,
}

/// Triangulated polygon for the lamination commands.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LaminationSpec {
    pub n_vertices: usize,
    pub triangles: Vec<[usize; 3]>,
    /// Coordinates on the interior edges in basis order (`fg`).
    pub values: Option<Vec<i64>>,
    /// Central charges of the interior edges in basis order (`approx`).
    pub charges: Option<Vec<[f64; 2]>>,
    /// Interior edge given by its two vertices (`approx`).
    pub edge: Option<[usize; 2]>,
    #[serde(default = "one")]
    pub sign: i64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_charge_tol")]
    pub charge: f64,
    #[serde(default = "default_phase_tol")]
    pub phase: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_charge_tol() -> f64 {
    1e-6
}
fn default_phase_tol() -> f64 {
    1e-12
}
fn default_samples() -> usize {
    720
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { charge: default_charge_tol(), phase: default_phase_tol(), samples: default_samples() }
    }
}

/// Parsed run configuration (TOML).
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: Option<String>,
    pub surface: Option<SurfaceSpec>,
    /// Second surface for `verify-wcf`.
    pub compare: Option<SurfaceSpec>,
    pub family: Option<FamilySpec>,
    pub fixture: Option<FixtureSpec>,
    pub lamination: Option<LaminationSpec>,
    /// `[theta_lo, theta_hi]`.
    pub sector: Option<[f64; 2]>,
    pub truncation: Option<f64>,
    /// `L = factor * min |Z|` over the basis when no truncation is given.
    pub truncation_factor: Option<f64>,
    pub cap: Option<f64>,
    pub phase: Option<f64>,
    pub order: Option<ApplicationOrder>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(s) = &self.schema {
            if s != CONFIG_SCHEMA {
                return Err(CliError::Config(format!("unsupported schema '{s}', expected '{CONFIG_SCHEMA}'")));
            }
        }
        let subjects = [self.surface.is_some(), self.family.is_some(), self.fixture.is_some(), self.lamination.is_some()];
        if subjects.iter().filter(|&&b| b).count() != 1 {
            return Err(CliError::Config(
                "exactly one of [surface], [family], [fixture], [lamination] must be present".into(),
            ));
        }
        if self.compare.is_some() && self.surface.is_none() {
            return Err(CliError::Config("[compare] requires [surface]".into()));
        }
        if let Some(l) = self.truncation {
            if !(l > 0.0) {
                return Err(CliError::Config(format!("truncation must be positive, got {l}")));
            }
        }
        if let Some(f) = self.truncation_factor {
            if !(f > 0.0) {
                return Err(CliError::Config(format!("truncation_factor must be positive, got {f}")));
            }
        }
        Ok(())
    }

    fn sector(&self) -> Result<Sector, CliError> {
        let [lo, hi] = self.sector.ok_or_else(|| CliError::Config("missing sector".into()))?;
        Sector::new(lo, hi).map_err(|e| CliError::Config(e.to_string()))
    }

    fn order(&self) -> ApplicationOrder {
        self.order.unwrap_or(ApplicationOrder::Cw)
    }

    fn scan_options(&self) -> ScanOptions {
        ScanOptions { samples: self.tolerances.samples, tol_phase: self.tolerances.phase, ..ScanOptions::default() }
    }
}

// ---------------------------------------------------------------------------
// reports

/// Command output: a JSON document plus the exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub body: Value,
    pub exit_code: i32,
}

impl Report {
    fn new(command: &str, fields: Value, exit_code: i32) -> Self {
        let mut body = json!({ "schema": REPORT_SCHEMA, "command": command });
        if let (Value::Object(m), Value::Object(f)) = (&mut body, fields) {
            m.extend(f);
        }
        Report { body, exit_code }
    }

    pub fn status(&self) -> Option<&str> {
        self.body.get("status").and_then(Value::as_str)
    }

    /// Pretty-printed JSON with fixed field order.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.body).expect("report serializes");
        s.push('\n');
        s
    }
}

/// `x` rounded to 12 significant digits.
pub fn sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn cplx(z: Complex64) -> Value {
    json!([sig(z.re), sig(z.im)])
}

fn classification_name(c: &RayClassification) -> String {
    match c {
        RayClassification::Case1 => "case1".into(),
        RayClassification::Case4a { .. } => "case4a".into(),
        RayClassification::Unknown(why) => format!("unknown: {why}"),
    }
}

// ---------------------------------------------------------------------------
// spectra

/// Triangulation basis and certified BPS rays of one surface.
#[derive(Clone, Debug)]
pub struct SurfaceSide {
    pub coeffs: Vec<[f64; 2]>,
    pub triangulation: Triangulation,
    pub basis: HatBasis,
    pub scan: ScanResult,
    pub rays: Vec<BpsRay>,
    /// Per active ray: phase, classification and the class of each connection.
    pub entries: Vec<SpectrumEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumEntry {
    pub phase: f64,
    pub abs_z: f64,
    pub charge: Complex64,
    pub hat_charge: Complex64,
    pub class: Option<LatticeVector>,
    pub classification: String,
    pub omega: Option<i64>,
}

impl SurfaceSide {
    /// Sorted `(class, omega)` content; `None` if a ray is not certified.
    pub fn fingerprint(&self) -> Option<Vec<(Vec<i64>, i64)>> {
        let mut out = Vec::new();
        for e in &self.entries {
            out.push((e.class.as_ref()?.0.clone(), e.omega?));
        }
        out.sort();
        Some(out)
    }

    fn entries_json(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|e| {
                    json!({
                        "phase": sig(e.phase),
                        "abs_z": sig(e.abs_z),
                        "charge": cplx(e.charge),
                        "hat_charge": cplx(e.hat_charge),
                        "class": e.class.as_ref().map(|v| v.0.clone()),
                        "classification": e.classification,
                        "omega": e.omega,
                    })
                })
                .collect(),
        )
    }
}

/// Scans a surface, classifies every active ray and expresses its class in
/// the hat basis of the saddle-free phase `theta_lo`.
pub fn analyze_surface(
    surface: &SurfaceSpec,
    sector: &Sector,
    cap: f64,
    opts: &ScanOptions,
    charge_tol: f64,
) -> Result<SurfaceSide, CliError> {
    let q = surface.differential()?;
    let (triangulation, basis) = triangulation_from_network(&q, sector.theta_lo, 1e9)?;
    let scan = scan_with_options(&q, sector, cap, opts)?;
    let mut rays = Vec::new();
    let mut entries = Vec::new();
    for ray in &scan.rays {
        let class = classify_ray(&q, ray.phase, &ray.connections, cap);
        for c in &ray.connections {
            let mut hat = c.hat_charge;
            if (hat * Complex64::from_polar(1.0, -sector.theta_lo)).im < 0.0 {
                hat = -hat;
            }
            let v = class_from_charge(hat, &basis, charge_tol).ok();
            let omega = match class {
                RayClassification::Case1 => Some(1),
                _ => None,
            };
            if let (Some(v), Some(o)) = (&v, omega) {
                rays.push(BpsRay::single(ray.phase, v.clone(), o).map_err(|e| CliError::Internal(e.to_string()))?);
            }
            entries.push(SpectrumEntry {
                phase: ray.phase,
                abs_z: c.charge.norm(),
                charge: c.charge,
                hat_charge: hat,
                class: v,
                classification: classification_name(&class),
                omega,
            });
        }
    }
    Ok(SurfaceSide { coeffs: surface.coeffs.clone(), triangulation, basis, scan, rays, entries })
}

fn default_cap(cfg: &RunConfig) -> f64 {
    cfg.cap.or(cfg.truncation).unwrap_or(100.0)
}

/// `spectrum`: active rays in the sector with their classes and Omega.
pub fn run_spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let surface = cfg.surface.as_ref().ok_or_else(|| CliError::Config("spectrum needs [surface]".into()))?;
    let sector = cfg.sector()?;
    let cap = default_cap(cfg);
    let side = analyze_surface(surface, &sector, cap, &cfg.scan_options(), cfg.tolerances.charge)?;
    let beyond: Vec<Value> = side
        .scan
        .beyond_cap
        .iter()
        .map(|c| json!({ "phase": sig(c.phase), "hat_charge": cplx(c.hat_charge) }))
        .collect();
    let unresolved: Vec<Value> =
        side.scan.unresolved.iter().map(|u| json!({ "lo": sig(u.lo), "hi": sig(u.hi), "reason": u.reason })).collect();
    let (code, status) = if !unresolved.is_empty() {
        (exit::UNRESOLVED, "UNRESOLVED")
    } else if !beyond.is_empty() {
        (exit::CAP, "CAP_EXCEEDED")
    } else {
        (exit::OK, "OK")
    };
    Ok(Report::new(
        "spectrum",
        json!({
            "status": status,
            "surface": surface.coeffs,
            "sector": [sig(sector.theta_lo), sig(sector.theta_hi)],
            "cap": sig(cap),
            "basis_charges": side.basis.edge_charge.iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
            "rays": side.entries_json(),
            "beyond_cap": beyond,
            "unresolved": unresolved,
        }),
        code,
    ))
}

// ---------------------------------------------------------------------------
// wall-crossing verification

/// Outcome of comparing the words of two sides.
#[derive(Clone, Debug, PartialEq)]
pub struct WcfOutcome {
    pub passed: bool,
    pub truncation: f64,
    pub difference: Option<Value>,
}

/// Compares the ordered products of two ray lists at `level` on `lat`.
pub fn compare_words(
    left: Vec<BpsRay>,
    right: Vec<BpsRay>,
    order: ApplicationOrder,
    level: f64,
    lat: &ChargeLattice,
) -> Result<WcfOutcome, CliError> {
    let w1 = AutomorphismWord::from_unordered(left, order, None).map_err(|e| CliError::Internal(e.to_string()))?;
    let w2 = AutomorphismWord::from_unordered(right, order, None).map_err(|e| CliError::Internal(e.to_string()))?;
    let d = word_difference(&w1, &w2, level, lat).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(WcfOutcome {
        passed: d.is_none(),
        truncation: level,
        difference: d.map(|d| {
            json!({
                "generator": d.generator.0,
                "term": d.vector.0,
                "left": d.left.to_string(),
                "right": d.right.to_string(),
            })
        }),
    })
}

fn require_certified(side: &SurfaceSide, label: &str) -> Result<(), CliError> {
    if let Some(e) = side.entries.iter().find(|e| e.omega.is_none() || e.class.is_none()) {
        return Err(CliError::Uncertified(format!(
            "{label}: ray at phase {:.12} is {}",
            e.phase, e.classification
        )));
    }
    if let Some(u) = side.scan.unresolved.first() {
        return Err(CliError::Unresolved(format!("{label}: [{}, {}] {}", u.lo, u.hi, u.reason)));
    }
    Ok(())
}

/// Verifies the wall-crossing identity between two surfaces sharing a triangulation.
pub fn verify_surfaces(
    a: &SurfaceSide,
    b: &SurfaceSide,
    cfg: &RunConfig,
) -> Result<(WcfOutcome, ChargeLattice), CliError> {
    require_certified(a, "first surface")?;
    require_certified(b, "second surface")?;
    if a.triangulation.edges != b.triangulation.edges || a.triangulation.triangles != b.triangulation.triangles {
        return Err(CliError::Config("the two surfaces have different triangulations at theta_lo".into()));
    }
    let lat = a.basis.lattice(&a.triangulation)?;
    let min_z = a.basis.edge_charge.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let level = cfg.truncation.unwrap_or_else(|| cfg.truncation_factor.unwrap_or(6.0) * min_z);
    let out = compare_words(a.rays.clone(), b.rays.clone(), cfg.order(), level, &lat)?;
    Ok((out, lat))
}

/// Result of the automated wall search on a family.
#[derive(Clone, Debug)]
pub struct WallSearch {
    pub grid: Vec<f64>,
    pub fingerprints: Vec<Option<Vec<(Vec<i64>, i64)>>>,
    /// Indices `(k, k + 1)` of the first adjacent pair with different spectra.
    pub wall: Option<(usize, usize)>,
    pub sides: Vec<Result<SurfaceSide, String>>,
}

/// Scans the family on its grid and returns the first adjacent pair whose
/// certified spectra differ while the triangulation at `theta_lo` agrees.
pub fn find_wall(family: &FamilySpec, sector: &Sector, cap: f64, opts: &ScanOptions, charge_tol: f64) -> WallSearch {
    let grid = family.grid();
    let sides: Vec<Result<SurfaceSide, String>> = grid
        .par_iter()
        .map(|&c| analyze_surface(&family.surface(c), sector, cap, opts, charge_tol).map_err(|e| e.to_string()))
        .collect();
    let fingerprints: Vec<_> = sides
        .iter()
        .map(|s| s.as_ref().ok().filter(|s| s.scan.unresolved.is_empty()).and_then(SurfaceSide::fingerprint))
        .collect();
    let mut wall = None;
    for k in 0..grid.len().saturating_sub(1) {
        let (Some(f1), Some(f2)) = (&fingerprints[k], &fingerprints[k + 1]) else { continue };
        let (Ok(s1), Ok(s2)) = (&sides[k], &sides[k + 1]) else { continue };
        if f1 != f2 && s1.triangulation.edges == s2.triangulation.edges && s1.triangulation.triangles == s2.triangulation.triangles {
            wall = Some((k, k + 1));
            break;
        }
    }
    WallSearch { grid, fingerprints, wall, sides }
}

fn rays_from_specs(specs: &[RaySpec], lat: &ChargeLattice) -> Result<Vec<BpsRay>, CliError> {
    specs
        .iter()
        .map(|r| {
            if r.class.len() != lat.rank() {
                return Err(CliError::Config(format!("class {:?} does not have rank {}", r.class, lat.rank())));
            }
            let v = LatticeVector(r.class.clone());
            let phase = r.phase.unwrap_or_else(|| lat.z(&v).arg());
            BpsRay::single(phase, v, r.omega).map_err(|e| CliError::Config(e.to_string()))
        })
        .collect()
}

fn side_json(side: &SurfaceSide, param: Option<f64>) -> Value {
    json!({
        "parameter": param.map(sig),
        "surface": side.coeffs,
        "rays": side.entries_json(),
    })
}

/// `verify-wcf`: fixture words, a surface pair, or an automatically located wall in a family.
pub fn run_verify_wcf(cfg: &RunConfig) -> Result<Report, CliError> {
    let order = cfg.order();
    if let Some(fx) = &cfg.fixture {
        let charges = fx.charges.iter().map(|c| Complex64::new(c[0], c[1])).collect();
        let lat = ChargeLattice::new(fx.pairing.clone(), charges).map_err(|e| CliError::Config(e.to_string()))?;
        let level = match (cfg.truncation, cfg.truncation_factor) {
            (Some(l), _) => l,
            (None, f) => f.unwrap_or(8.0) * fx.charges.iter().map(|c| Complex64::new(c[0], c[1]).norm()).fold(0.0, f64::max),
        };
        let out = compare_words(rays_from_specs(&fx.left, &lat)?, rays_from_specs(&fx.right, &lat)?, order, level, &lat)?;
        return Ok(wcf_report(&out, order, json!({ "mode": "fixture" })));
    }
    let sector = cfg.sector()?;
    let cap = default_cap(cfg);
    let opts = cfg.scan_options();
    if let Some(fam) = &cfg.family {
        let search = find_wall(fam, &sector, cap, &opts, cfg.tolerances.charge);
        let grid: Vec<Value> = search
            .grid
            .iter()
            .zip(&search.fingerprints)
            .map(|(c, f)| json!({ "parameter": sig(*c), "spectrum": f }))
            .collect();
        let Some((i, j)) = search.wall else {
            return Ok(Report::new(
                "verify-wcf",
                json!({ "status": "NO_WALL", "order": order.to_string(), "grid": grid }),
                exit::FAIL,
            ));
        };
        let a = search.sides[i].as_ref().map_err(|e| CliError::Internal(e.clone()))?;
        let b = search.sides[j].as_ref().map_err(|e| CliError::Internal(e.clone()))?;
        let (out, _) = verify_surfaces(a, b, cfg)?;
        let extra = json!({
            "mode": "family",
            "grid": grid,
            "sides": [side_json(a, Some(search.grid[i])), side_json(b, Some(search.grid[j]))],
        });
        return Ok(wcf_report(&out, order, extra));
    }
    let s1 = cfg.surface.as_ref().ok_or_else(|| CliError::Config("verify-wcf needs [fixture], [family] or [surface]".into()))?;
    let s2 = cfg.compare.as_ref().ok_or_else(|| CliError::Config("verify-wcf with [surface] needs [compare]".into()))?;
    let a = analyze_surface(s1, &sector, cap, &opts, cfg.tolerances.charge)?;
    let b = analyze_surface(s2, &sector, cap, &opts, cfg.tolerances.charge)?;
    let (out, _) = verify_surfaces(&a, &b, cfg)?;
    Ok(wcf_report(&out, order, json!({ "mode": "surfaces", "sides": [side_json(&a, None), side_json(&b, None)] })))
}

fn wcf_report(out: &WcfOutcome, order: ApplicationOrder, extra: Value) -> Report {
    let mut fields = json!({
        "status": if out.passed { "PASS" } else { "FAIL" },
        "order": order.to_string(),
        "truncation": sig(out.truncation),
        "difference": out.difference,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut fields, extra) {
        m.extend(e);
    }
    Report::new("verify-wcf", fields, if out.passed { exit::OK } else { exit::FAIL })
}

/// `verify-wall`: the wall identity on every built-in local model.
pub fn run_verify_wall(cfg: &RunConfig) -> Result<Report, CliError> {
    let level = cfg.truncation.unwrap_or(7.3);
    let mut all = true;
    let mut rows = Vec::new();
    for m in model_fixtures() {
        let ray = m.bps_ray(0.0).map_err(|e| CliError::Internal(e.to_string()))?;
        let r = wall_identity_components(&m, &ray, level).map_err(|e| CliError::Internal(e.to_string()))?;
        all &= r.passed;
        rows.push(json!({
            "kind": m.kind,
            "crossing": m.crossing,
            "passed": r.passed,
            "components": r.components.iter().map(|((i, j), ok)| json!([i, j, ok])).collect::<Vec<_>>(),
        }));
    }
    Ok(Report::new(
        "verify-wall",
        json!({ "status": if all { "PASS" } else { "FAIL" }, "truncation": sig(level), "models": rows }),
        if all { exit::OK } else { exit::FAIL },
    ))
}

/// Names of the report-producing commands, as used on the command line.
pub const COMMANDS: [&str; 6] = ["spectrum", "verify-wcf", "verify-wall", "network-svg", "fg", "approx"];

/// Dispatches a command by name. `network-svg` writes its plot to `svg_out`
/// (default `network.svg`).
pub fn run_command(command: &str, cfg: &RunConfig, svg_out: Option<&std::path::Path>) -> Result<Report, CliError> {
    match command {
        "spectrum" => run_spectrum(cfg),
        "verify-wcf" => run_verify_wcf(cfg),
        "verify-wall" => run_verify_wall(cfg),
        "network-svg" => {
            let default = std::path::PathBuf::from(cfg.output.clone().unwrap_or_else(|| "network.svg".into()));
            run_network_svg(cfg, svg_out.unwrap_or(&default))
        }
        "fg" => run_fg(cfg),
        "approx" => run_approx(cfg),
        other => Err(CliError::Config(format!("unknown command '{other}', expected one of {COMMANDS:?}"))),
    }
}

// ---------------------------------------------------------------------------
// network plots

/// SVG drawing of the truncated network at `phase`; returns the document and the saddle count.
pub fn network_svg(q: &QuadraticDifferential, phase: f64, cap: f64) -> Result<(String, usize), CliError> {
    let zeros = q.zeros().to_vec();
    let net = if cap > 0.0 { Some(build_network(q, phase, cap)?) } else { None };
    let extent = zeros.iter().map(|z| z.re.abs().max(z.im.abs())).fold(1.0, f64::max);
    let half = 1.5 * extent + 0.5;
    let size = 600.0;
    let scale = size / (2.0 * half);
    let px = |z: Complex64| ((z.re + half) * scale, (half - z.im) * scale);
    let poly = |pts: &[Complex64]| -> String {
        let mut s = String::new();
        for (k, p) in pts.iter().enumerate() {
            let (x, y) = px(*p);
            let _ = write!(s, "{}{:.3},{:.3}", if k == 0 { "" } else { " " }, x, y);
        }
        s
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(svg, "<title>spectral network, phase {:.12}, cap {:.12}</title>", sig(phase), sig(cap));
    let _ = writeln!(svg, "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>");
    let mut saddles = 0;
    if let Some(net) = &net {
        for seg in net.plus_segments() {
            let _ = writeln!(
                svg,
                "<polyline class=\"w-plus\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"{}\"/>",
                poly(&seg.trajectory.points)
            );
        }
        for seg in net.segments.iter().filter(|s| s.orientation == crate::flat_geometry::Orientation::Minus) {
            let _ = writeln!(
                svg,
                "<polyline class=\"w-minus\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1\" stroke-dasharray=\"4 3\" points=\"{}\"/>",
                poly(&seg.trajectory.points)
            );
        }
        for seg in net.saddle_segments() {
            saddles += 1;
            let _ = writeln!(
                svg,
                "<polyline class=\"saddle\" fill=\"none\" stroke=\"#f39c12\" stroke-width=\"4\" points=\"{}\"/>",
                poly(&seg.trajectory.points)
            );
        }
    }
    for z in &zeros {
        let (x, y) = px(*z);
        let _ = writeln!(svg, "<circle class=\"zero\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"4\" fill=\"black\"/>");
    }
    svg.push_str("</svg>\n");
    Ok((svg, saddles))
}

/// `network-svg`: writes the plot to `out` and reports what was drawn.
pub fn run_network_svg(cfg: &RunConfig, out: &std::path::Path) -> Result<Report, CliError> {
    let surface = cfg.surface.as_ref().ok_or_else(|| CliError::Config("network-svg needs [surface]".into()))?;
    let phase = cfg.phase.ok_or_else(|| CliError::Config("network-svg needs phase".into()))?;
    let cap = cfg.cap.unwrap_or(10.0);
    if cap < 0.0 {
        return Err(CliError::Config(format!("cap must be non-negative, got {cap}")));
    }
    let q = surface.differential()?;
    let (svg, saddles) = network_svg(&q, phase, cap)?;
    std::fs::write(out, &svg).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    Ok(Report::new(
        "network-svg",
        json!({
            "status": "OK",
            "phase": sig(phase),
            "cap": sig(cap),
            "zeros": q.zeros().iter().map(|z| cplx(*z)).collect::<Vec<_>>(),
            "saddle_polylines": saddles,
            "svg": out.display().to_string(),
        }),
        exit::OK,
    ))
}

// ---------------------------------------------------------------------------
// laminations

fn lamination_spec(cfg: &RunConfig) -> Result<(&LaminationSpec, Triangulation), CliError> {
    let spec = cfg.lamination.as_ref().ok_or_else(|| CliError::Config("command needs [lamination]".into()))?;
    let t = Triangulation::from_triangles(spec.n_vertices, spec.triangles.clone())?;
    Ok((spec, t))
}

/// `fg`: lamination of the given coordinates and the coordinates read back from it.
pub fn run_fg(cfg: &RunConfig) -> Result<Report, CliError> {
    let (spec, t) = lamination_spec(cfg)?;
    let values = spec.values.clone().ok_or_else(|| CliError::Config("fg needs lamination.values".into()))?;
    let c = EdgeCoordinates { values };
    let lam = lamination_from_coordinates(&c, &t).map_err(|e| CliError::Config(e.to_string()))?;
    let back = coordinates_from_lamination(&lam, &t).map_err(|e| CliError::Internal(e.to_string()))?;
    let ok = back == c;
    Ok(Report::new(
        "fg",
        json!({
            "status": if ok { "PASS" } else { "FAIL" },
            "interior_edges": t.interior.iter().map(|&e| t.edges[e]).collect::<Vec<_>>(),
            "coordinates": c.values,
            "shift": lam.shift,
            "side_numbers": lam.side_numbers,
            "arcs": lam.arcs,
            "peripheral": lam.peripheral,
            "roundtrip": back.values,
        }),
        if ok { exit::OK } else { exit::FAIL },
    ))
}

/// `approx`: approximates a generator by polynomials in lamination lifts.
pub fn run_approx(cfg: &RunConfig) -> Result<Report, CliError> {
    let (spec, t) = lamination_spec(cfg)?;
    let charges = spec.charges.clone().ok_or_else(|| CliError::Config("approx needs lamination.charges".into()))?;
    if charges.len() != t.interior.len() {
        return Err(CliError::Config(format!("{} charges for {} interior edges", charges.len(), t.interior.len())));
    }
    let basis = HatBasis { edges: t.interior.clone(), edge_charge: charges.iter().map(|c| Complex64::new(c[0], c[1])).collect() };
    let [a, b] = spec.edge.ok_or_else(|| CliError::Config("approx needs lamination.edge".into()))?;
    let e0 = t.edge_index(a, b).ok_or_else(|| CliError::Config(format!("no edge {a}-{b}")))?;
    let min_im = basis.edge_charge.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    let level = cfg.truncation.unwrap_or_else(|| cfg.truncation_factor.unwrap_or(3.0) * min_im);
    let r = approximate_generator(e0, spec.sign, &t, &basis, level).map_err(|e| CliError::Config(e.to_string()))?;
    let bound = crate::laminations::linear_step_bound(&basis, level);
    let lat = basis.lattice(&t)?;
    let target = crate::lattice_algebra::TwistedSeries::monomial(
        basis.vector(e0).expect("interior edge").scale(spec.sign),
        crate::lattice_algebra::coeff(1),
        level,
    )
    .truncated(&lat, level);
    let ok = r.series.terms() == target.terms() && r.steps <= bound;
    Ok(Report::new(
        "approx",
        json!({
            "status": if ok { "PASS" } else { "FAIL" },
            "edge": [a, b],
            "sign": spec.sign,
            "truncation": sig(level),
            "steps": r.steps,
            "step_bound": bound,
            "defect_depths": r.defect_depths.iter().map(|d| if d.is_finite() { json!(sig(*d)) } else { json!("inf") }).collect::<Vec<_>>(),
            "series": r.series.render(),
        }),
        if ok { exit::OK } else { exit::FAIL },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(std::f64::consts::PI), 3.14159265359);
        assert_eq!(sig(0.0), 0.0);
        assert_eq!(sig(-1.0e-20 / 3.0), -3.33333333333e-21);
    }

    #[test]
    fn config_needs_exactly_one_subject() {
        assert!(RunConfig::from_toml("truncation = 3.0").is_err());
        let both = "[surface]\ncoeffs = [[1.0, 0.0]]\n[lamination]\nn_vertices = 4\ntriangles = [[0,1,2],[0,2,3]]\n";
        assert!(RunConfig::from_toml(both).is_err());
        assert!(RunConfig::from_toml("schema = \"other/9\"\n[surface]\ncoeffs = [[1.0, 0.0]]").is_err());
        let ok = RunConfig::from_toml("schema = \"wallcross-config/1\"\norder = \"ccw\"\n[surface]\ncoeffs = [[1.0, 0.0]]").unwrap();
        assert_eq!(ok.order(), ApplicationOrder::Ccw);
    }

    #[test]
    fn fg_report_roundtrips() {
        let cfg = RunConfig::from_toml(
            "[lamination]\nn_vertices = 5\ntriangles = [[0,1,2],[0,2,3],[0,3,4]]\nvalues = [3, -2]\n",
        )
        .unwrap();
        let r = run_fg(&cfg).unwrap();
        assert_eq!(r.status(), Some("PASS"));
        assert_eq!(r.body["roundtrip"], json!([3, -2]));
    }
}
