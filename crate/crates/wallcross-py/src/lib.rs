//! Python bindings: every command of the `wallcross` binary, driven by a TOML
//! configuration string and returning the JSON report.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use wallcross::cli::{self, CliError, RunConfig};
use wallcross::lattice_algebra::ApplicationOrder;

fn to_py(e: CliError) -> PyErr {
    match e {
        CliError::Config(_) => PyValueError::new_err(e.to_string()),
        CliError::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn config(config_toml: &str, truncation: Option<f64>, order: Option<&str>) -> Result<RunConfig, CliError> {
    let empty = config_toml.trim().is_empty();
    let mut cfg = if empty { RunConfig::default() } else { RunConfig::from_toml(config_toml)? };
    if truncation.is_some() {
        cfg.truncation = truncation;
    }
    if let Some(o) = order {
        cfg.order = Some(match o {
            "cw" => ApplicationOrder::Cw,
            "ccw" => ApplicationOrder::Ccw,
            other => return Err(CliError::Config(format!("unknown order '{other}', expected 'cw' or 'ccw'"))),
        });
    }
    // an empty configuration is only meaningful for `verify-wall`
    if !empty {
        cfg.validate()?;
    }
    Ok(cfg)
}

/// Runs `command` on a TOML configuration and returns `(exit_code, report_json)`.
///
/// A failed check is not an exception: it is reported with a non-zero exit
/// code. Invalid configurations raise `ValueError`; cap, certification and
/// internal errors raise `RuntimeError`.
#[pyfunction]
#[pyo3(signature = (command, config_toml = "", truncation = None, order = None, svg_out = None))]
fn run(
    py: Python<'_>,
    command: &str,
    config_toml: &str,
    truncation: Option<f64>,
    order: Option<&str>,
    svg_out: Option<std::path::PathBuf>,
) -> PyResult<(i32, String)> {
    let cfg = config(config_toml, truncation, order).map_err(to_py)?;
    let command = command.to_owned();
    let report = py.detach(move || cli::run_command(&command, &cfg, svg_out.as_deref())).map_err(to_py)?;
    Ok((report.exit_code, report.render()))
}

/// SVG drawing of the truncated spectral network of the polynomial with
/// complex coefficients `coeffs` (constant term first), at `phase`, drawn up
/// to `cap`. Returns `(svg, saddle_count)`.
#[pyfunction]
#[pyo3(signature = (coeffs, phase, cap = 10.0))]
fn network_svg(py: Python<'_>, coeffs: Vec<(f64, f64)>, phase: f64, cap: f64) -> PyResult<(String, usize)> {
    let spec = cli::SurfaceSpec { coeffs: coeffs.into_iter().map(|(re, im)| [re, im]).collect() };
    py.detach(move || {
        let q = spec.differential()?;
        cli::network_svg(&q, phase, cap)
    })
    .map_err(to_py)
}

#[pymodule]
fn wallcross_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(network_svg, m)?)?;
    m.add("COMMANDS", cli::COMMANDS.to_vec())?;
    m.add("REPORT_SCHEMA", cli::REPORT_SCHEMA)?;
    Ok(())
}
