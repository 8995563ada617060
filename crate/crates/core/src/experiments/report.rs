//! On-disk layout of a scenario report.
//!
//! ```text
//! <dir>/report.json
//! <dir>/err_curve.csv                 point, sweep_value, frequency_hz, iterations, step_norm, converged, err
//! <dir>/profile_f<MHz>.csv            x, reference, reconstructed   (single-point runs)
//! <dir>/point<k>/profile_f<MHz>.csv   same, one directory per sweep point
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentError, PointReport, ScenarioReport};
use crate::forward::wavenumber;
use crate::inverse::FrequencyOutcome;
use crate::surface::{segment_count, Profile, SplineBasis, SurfaceModel};

pub const REPORT_FILE: &str = "report.json";
pub const ERR_CURVE_FILE: &str = "err_curve.csv";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Csv {
        path: path.display().to_string(),
        source,
    }
}

/// "600" for whole megahertz, "612.5" otherwise.
pub fn mhz_label(frequency: f64) -> String {
    let mhz = frequency / 1e6;
    if (mhz - mhz.round()).abs() < 1e-9 {
        format!("{}", mhz.round() as i64)
    } else {
        format!("{}", (mhz * 1e3).round() / 1e3)
    }
}

/// Writes report.json, err_curve.csv and the profile CSVs into `dir`,
/// which must exist.
pub fn write_report_bundle(
    report: &ScenarioReport,
    dir: &Path,
    reference: Option<&dyn Profile>,
) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut written = Vec::new();

    let path = dir.join(REPORT_FILE);
    let text = serde_json::to_string_pretty(report).map_err(|source| ExperimentError::Json {
        path: path.display().to_string(),
        source,
    })?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    written.push(path);

    let path = dir.join(ERR_CURVE_FILE);
    write_err_curve(report, &path)?;
    written.push(path);

    let cfg = &report.config;
    let basis = SplineBasis::new(cfg.inverse.spline_count, cfg.inverse.spline_order, cfg.domain_length)?;
    let nested = report.points.len() > 1;
    for point in &report.points {
        let target = if nested {
            let d = dir.join(format!("point{:02}", point.index));
            fs::create_dir_all(&d).map_err(io_err(&d))?;
            d
        } else {
            dir.to_path_buf()
        };
        for outcome in &point.outcomes {
            let path = target.join(format!("profile_f{}.csv", mhz_label(outcome.frequency)));
            write_profile(report, outcome, &basis, reference, &path)?;
            written.push(path);
        }
        if let Some(single) = &point.single_frequency {
            let path = target.join(format!("profile_single_f{}.csv", mhz_label(single.frequency)));
            write_profile(report, &single.outcome, &basis, reference, &path)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn write_err_curve(report: &ScenarioReport, path: &Path) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["point", "sweep_value", "frequency_hz", "iterations", "step_norm", "converged", "err"])
        .map_err(csv_err(path))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut row = |p: &PointReport, o: &FrequencyOutcome| {
        w.write_record([
            p.index.to_string(),
            opt(p.sweep_value),
            o.frequency.to_string(),
            o.iterations.to_string(),
            o.final_step_norm.to_string(),
            o.converged.to_string(),
            opt(o.err),
        ])
    };
    for p in &report.points {
        for o in &p.outcomes {
            row(p, o).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Profiles on the midpoint grid of the inversion mesh at that frequency.
fn write_profile(
    report: &ScenarioReport,
    outcome: &FrequencyOutcome,
    basis: &SplineBasis,
    reference: Option<&dyn Profile>,
    path: &Path,
) -> Result<(), ExperimentError> {
    let cfg = &report.config;
    let model = SurfaceModel::new(basis.clone(), outcome.coeffs.clone())?;
    let k2 = wavenumber(&cfg.lower, outcome.frequency)?;
    let n = segment_count(cfg.domain_length, cfg.inverse.mesh_width(k2));
    let w = cfg.domain_length / n as f64;
    let mut out = csv::Writer::from_path(path).map_err(csv_err(path))?;
    out.write_record(["x", "reference", "reconstructed"]).map_err(csv_err(path))?;
    for i in 0..n {
        let x = -cfg.domain_length / 2.0 + (i as f64 + 0.5) * w;
        let r = reference.map(|p| p.height(x).to_string()).unwrap_or_default();
        out.write_record([x.to_string(), r, (model.eval(x) + 0.0).to_string()])
            .map_err(csv_err(path))?;
    }
    out.flush().map_err(io_err(path))?;
    Ok(())
}

/// Loads report.json from a report directory.
pub fn read_report(dir: &Path) -> Result<ScenarioReport, ExperimentError> {
    let path = dir.join(REPORT_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|source| ExperimentError::Json {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn megahertz_labels() {
        assert_eq!(mhz_label(600e6), "600");
        assert_eq!(mhz_label(612.5e6), "612.5");
        assert_eq!(mhz_label(325e6 + 10.0 * 25e6), "575");
    }
}
