//! Input readers. Every parse failure names the file, 1-based line and the
//! rule that was violated.

use std::fs;
use std::path::Path;

use crate::error::{CceError, Result};
use crate::similarity::{PointSet, RouteNetwork, SimilarityMatrix};

fn parse_error(path: &Path, line: usize, rule: impl Into<String>) -> CceError {
    CceError::Parse {
        path: path.to_path_buf(),
        line,
        rule: rule.into(),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// CSV records with their 1-based line numbers.
fn csv_records(path: &Path, text: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, format!("malformed CSV: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        out.push((line, record.iter().map(str::to_string).collect()));
    }
    if out.is_empty() {
        return Err(parse_error(path, 1, "file contains no data"));
    }
    Ok(out)
}

fn parse_number(path: &Path, line: usize, col: usize, field: &str) -> Result<f64> {
    let x: f64 = field
        .parse()
        .map_err(|_| parse_error(path, line, format!("column {}: {field:?} is not a number", col + 1)))?;
    if !x.is_finite() {
        return Err(parse_error(path, line, format!("column {}: value is not finite", col + 1)));
    }
    Ok(x)
}

/// Parsed point CSV: the point set plus optional column names.
#[derive(Debug, Clone)]
pub struct PointTable {
    pub points: PointSet,
    pub columns: Option<Vec<String>>,
}

/// Reads one point per row. A first row with non-numeric content is taken as
/// the header. With `id_column` the first field of every row is an
/// identifier.
pub fn read_points_csv(path: impl AsRef<Path>, id_column: bool) -> Result<PointTable> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_points_csv(path, &text, id_column)
}

pub fn parse_points_csv(path: &Path, text: &str, id_column: bool) -> Result<PointTable> {
    let mut records = csv_records(path, text)?;
    let skip = usize::from(id_column);
    let is_header = records[0].1.iter().skip(skip).any(|f| f.parse::<f64>().is_err());
    let columns = if is_header {
        Some(records.remove(0).1)
    } else {
        None
    };
    if records.is_empty() {
        return Err(parse_error(path, 2, "no point rows after the header"));
    }
    let expected = records[0].1.len();
    if expected <= skip {
        return Err(parse_error(path, records[0].0, "row has no coordinate columns"));
    }
    let mut coords = Vec::with_capacity(records.len());
    let mut ids = Vec::with_capacity(records.len());
    for (line, fields) in &records {
        if fields.len() != expected {
            return Err(parse_error(
                path,
                *line,
                format!("expected {expected} fields, found {}", fields.len()),
            ));
        }
        if id_column {
            ids.push(fields[0].clone());
        }
        let row = fields
            .iter()
            .enumerate()
            .skip(skip)
            .map(|(c, f)| parse_number(path, *line, c, f))
            .collect::<Result<Vec<_>>>()?;
        coords.push(row);
    }
    let points = if id_column {
        PointSet::with_ids(coords, ids)
    } else {
        PointSet::new(coords)
    }
    .map_err(|e| parse_error(path, 0, e.to_string()))?;
    Ok(PointTable { points, columns })
}

/// Reads `n` rows of `n` comma-separated numbers.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<SimilarityMatrix> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_matrix_csv(path, &text)
}

pub fn parse_matrix_csv(path: &Path, text: &str) -> Result<SimilarityMatrix> {
    let records = csv_records(path, text)?;
    let n = records.len();
    let mut rows = Vec::with_capacity(n);
    for (line, fields) in &records {
        if fields.len() != n {
            return Err(parse_error(
                path,
                *line,
                format!("row has {} entries but the matrix has {n} rows", fields.len()),
            ));
        }
        rows.push(
            fields
                .iter()
                .enumerate()
                .map(|(c, f)| parse_number(path, *line, c, f))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    SimilarityMatrix::from_matrix(&rows, None).map_err(|e| match e {
        CceError::Validation { row, .. } => parse_error(path, records[row].0, e.to_string()),
        other => other,
    })
}

/// Reads one route per line as comma-separated station names in stop order.
/// Blank lines and lines starting with `#` are skipped. Stations are indexed
/// in order of first appearance.
pub fn read_routes(path: impl AsRef<Path>) -> Result<RouteNetwork> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_routes(path, &text)
}

pub fn parse_routes(path: &Path, text: &str) -> Result<RouteNetwork> {
    let mut routes = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let stops: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if stops.iter().any(String::is_empty) {
            return Err(parse_error(path, idx + 1, "empty station name"));
        }
        if stops.len() < 2 {
            return Err(parse_error(path, idx + 1, "a route needs at least 2 stations"));
        }
        if let Some(dup) = stops.iter().enumerate().find(|(i, s)| stops[..*i].contains(s)) {
            return Err(parse_error(path, idx + 1, format!("station {:?} repeats within the route", dup.1)));
        }
        routes.push(stops);
    }
    if routes.is_empty() {
        return Err(parse_error(path, 1, "file contains no routes"));
    }
    RouteNetwork::from_routes(routes).map_err(|e| parse_error(path, 0, e.to_string()))
}
