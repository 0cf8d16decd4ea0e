//! CSV ingestion and export, label files and flat `key=value` configs.
//!
//! Regular data use the wide layout: one row per curve, header row holding
//! the grid times (an optional leading `id` column carries curve ids).
//! Irregular and fragmented data use the long layout `curve_id,time,value`.
//! Times outside `[0, 1]` are mapped affinely onto `[0, 1]`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{build_dataset, Curve, FunctionalDataset, Grid, Partition, Record, Regime};

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("cannot parse {what} `{s}` as a number")))
}

/// Affine map of `[min, max]` onto `[0, 1]`, or the identity when every
/// time already lies in `[0, 1]`.
fn unit_map(times: &[f64]) -> Result<impl Fn(f64) -> f64> {
    let (lo, hi) = times.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Parse("no finite observation times".into()));
    }
    let (shift, span) = if lo >= 0.0 && hi <= 1.0 { (0.0, 1.0) } else { (lo, hi - lo) };
    Ok(move |t: f64| ((t - shift) / span).clamp(0.0, 1.0))
}

/// Reads a wide-layout dataset.
pub fn read_wide<R: Read>(reader: R) -> Result<FunctionalDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let has_id = header.get(0).is_some_and(|h| h.parse::<f64>().is_err());
    let skip = usize::from(has_id);
    let raw_times = header.iter().skip(skip).map(|h| parse_f64(h, "grid time")).collect::<Result<Vec<_>>>()?;
    let map = unit_map(&raw_times)?;
    let grid = Grid::new(raw_times.iter().map(|&t| map(t)).collect())?;

    let mut ids = Vec::new();
    let mut curves = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let id = if has_id { rec.get(0).unwrap_or_default().to_string() } else { row.to_string() };
        let values = rec
            .iter()
            .skip(skip)
            .map(|v| parse_f64(v, "value"))
            .collect::<Result<Vec<_>>>()?;
        curves.push(Curve::new(grid.clone(), values).map_err(|e| match e {
            Error::InvalidCurve(m) => Error::InvalidCurve(format!("row {id}: {m}")),
            other => other,
        })?);
        ids.push(id);
    }
    FunctionalDataset::with_ids(ids, curves, Regime::Regular)
}

/// Reads a long-layout dataset; the regime is inferred unless `fragmented`.
pub fn read_long<R: Read>(reader: R, fragmented: bool) -> Result<FunctionalDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut raw = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("expected 3 columns, got {}", rec.len())));
        }
        // optional header line
        if raw.is_empty() && rec[1].parse::<f64>().is_err() {
            continue;
        }
        raw.push((rec[0].to_string(), parse_f64(&rec[1], "time")?, parse_f64(&rec[2], "value")?));
    }
    let times: Vec<f64> = raw.iter().map(|r| r.1).collect();
    let map = unit_map(&times)?;
    let records: Vec<Record> = raw.into_iter().map(|(c, t, v)| Record::new(c, map(t), v)).collect();
    build_dataset(&records, fragmented)
}

/// Reads a dataset from a file: wide layout for `Regular`, long otherwise.
pub fn read_dataset(path: &Path, regime: Regime) -> Result<FunctionalDataset> {
    let file = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match regime {
        Regime::Regular => read_wide(file),
        Regime::Irregular => {
            let data = read_long(file, false)?;
            data.with_regime(Regime::Irregular)
        }
        Regime::Fragmented => read_long(file, true),
    }
}

pub fn write_wide<W: Write>(data: &FunctionalDataset, writer: W) -> Result<()> {
    let grid = data
        .common_grid()
        .ok_or_else(|| Error::InvalidDataset("wide layout needs regular data".into()))?;
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend(grid.points().iter().map(|t| t.to_string()));
    w.write_record(&header)?;
    for (id, c) in data.ids().iter().zip(data.curves()) {
        let mut row = vec![id.clone()];
        row.extend(c.values().iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_long<W: Write>(data: &FunctionalDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["curve_id", "time", "value"])?;
    for (id, c) in data.ids().iter().zip(data.curves()) {
        for (t, v) in c.times().iter().zip(c.values()) {
            w.write_record([id.as_str(), &t.to_string(), &v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a dataset in the layout matching its regime.
pub fn write_dataset(data: &FunctionalDataset, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let buf = std::io::BufWriter::new(file);
    match data.regime() {
        Regime::Regular => write_wide(data, buf),
        _ => write_long(data, buf),
    }
}

/// Reads labels: one per line, or `curve_id,label` pairs. A first line
/// that names columns is skipped when the file has two columns.
pub fn read_labels<R: Read>(reader: R) -> Result<Partition> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut labels = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        match rec.len() {
            1 => labels.push(rec[0].to_string()),
            2 => {
                if line == 0 && rec[0] == *"curve_id" {
                    continue;
                }
                labels.push(rec[1].to_string());
            }
            n => return Err(Error::Parse(format!("label line {} has {n} columns", line + 1))),
        }
    }
    if labels.is_empty() {
        return Err(Error::Parse("label file is empty".into()));
    }
    Ok(Partition::from_labels(&labels))
}

pub fn read_labels_file(path: &Path) -> Result<Partition> {
    let file = fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_labels(file)
}

/// Writes `curve_id,cluster` rows with 1-based cluster numbers.
pub fn write_labels<W: Write>(ids: &[String], p: &Partition, writer: W) -> Result<()> {
    if ids.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: ids.len(),
        });
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["curve_id", "cluster"])?;
    for (id, l) in ids.iter().zip(p.labels_one_based()) {
        w.write_record([id.as_str(), &l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
        let key = k.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", no + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", no + 1)));
        }
    }
    Ok(out)
}
