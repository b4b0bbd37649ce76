use crate::run::CliError;
use std::path::Path;
use udg_core::core_geom::{Point, PointSet};

/// Read a point set from CSV ("x,y" per line, optional header) or JSON
/// (list of [x, y] pairs), auto-detected. NaN/∞ coordinates are rejected.
pub fn read_points(path: &Path) -> Result<PointSet, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", path.display())))?;
    parse_points(&text)
}

pub fn parse_points(text: &str) -> Result<PointSet, CliError> {
    let trimmed = text.trim_start();
    let pts = if trimmed.starts_with('[') {
        let raw: Vec<[f64; 2]> = serde_json::from_str(trimmed)
            .map_err(|e| CliError::BadInput(format!("invalid JSON point list: {e}")))?;
        raw.into_iter().map(|[x, y]| Point::new(x, y)).collect()
    } else {
        let mut pts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split(',').map(str::trim);
            let (a, b) = (it.next().unwrap_or(""), it.next().unwrap_or(""));
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) if it.next().is_none() => pts.push(Point::new(x, y)),
                // a single non-numeric leading line is treated as the header
                _ if lineno == 0 && pts.is_empty() => continue,
                _ => {
                    return Err(CliError::BadInput(format!(
                        "line {}: expected 'x,y', got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        pts
    };
    if pts.is_empty() {
        return Err(CliError::BadInput("empty point set".into()));
    }
    if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(CliError::BadInput("non-finite coordinate".into()));
    }
    Ok(PointSet::new(pts))
}

/// Lossless CSV serialization (shortest round-trip float formatting).
pub fn points_to_csv(ps: &PointSet) -> String {
    let mut out = String::from("x,y\n");
    for p in &ps.pts {
        out.push_str(&format!("{},{}\n", p.x, p.y));
    }
    out
}

pub fn points_to_json(ps: &PointSet) -> String {
    let raw: Vec<[f64; 2]> = ps.pts.iter().map(|p| [p.x, p.y]).collect();
    serde_json::to_string(&raw).expect("points serialize")
}
