use std::fs;
use std::path::{Path, PathBuf};

use radshoot_core::{StructureReport, Trajectory};
use serde::Serialize;

use crate::error::CliError;

/// Floats in CSV output carry 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "u", "du", "w", "dw"])?;
    for s in &traj.samples {
        w.write_record([num(s.r), num(s.u), num(s.du), num(s.w), num(s.dw)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_structure_csv(path: &Path, report: &StructureReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "alpha",
        "label",
        "decay_exponent",
        "crossing_radius",
        "energy",
    ])?;
    for c in &report.grid {
        w.write_record([
            num(c.alpha),
            c.label.as_str().to_string(),
            opt(c.decay_exponent),
            opt(c.crossing_radius),
            opt(c.energy),
        ])?;
    }
    w.flush()?;
    Ok(())
}
