//! CSV persistence for run series and aggregates.
//!
//! Run files have columns `step,resource,alive,mean_energy,gatherers,deaths`
//! followed by one `choice_<threshold>` column per threshold (6 + K columns).
//!
//! Aggregate files have `step`, then `<field>_mean,<field>_std` for
//! `resource`, `alive`, `mean_energy`, `gatherers`, `deaths` and every
//! `choice_<threshold>`, then `surviving` (fraction of runs with a living
//! agent). Reals are written in shortest round-trip form, so reading a file
//! back reproduces the written values exactly.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::series::{AggregateRecord, AggregateSeries, Stat, StepRecord, TimeSeries};
use crate::error::{Error, Result};

const SERIES_FIXED: [&str; 6] = ["step", "resource", "alive", "mean_energy", "gatherers", "deaths"];
const AGG_FIELDS: [&str; 5] = ["resource", "alive", "mean_energy", "gatherers", "deaths"];

fn choice_column(threshold: f64) -> String {
    format!("choice_{threshold}")
}

pub fn series_header(thresholds: &[f64]) -> Vec<String> {
    SERIES_FIXED
        .iter()
        .map(|s| s.to_string())
        .chain(thresholds.iter().map(|&t| choice_column(t)))
        .collect()
}

pub fn aggregate_header(thresholds: &[f64]) -> Vec<String> {
    let mut h = vec!["step".to_string()];
    let fields = AGG_FIELDS
        .iter()
        .map(|s| s.to_string())
        .chain(thresholds.iter().map(|&t| choice_column(t)));
    for f in fields {
        h.push(format!("{f}_mean"));
        h.push(format!("{f}_std"));
    }
    h.push("surviving".to_string());
    h
}

fn csv_err(source: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Malformed {
        path: source.to_string(),
        line,
        msg: e.to_string(),
    }
}

pub fn write_series_to<W: Write>(series: &TimeSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(series_header(&series.thresholds))
        .map_err(|e| csv_err("<output>", e))?;
    for r in &series.records {
        let mut row = vec![
            r.step.to_string(),
            r.resource.to_string(),
            r.alive.to_string(),
            r.mean_energy.to_string(),
            r.gatherers.to_string(),
            r.deaths.to_string(),
        ];
        row.extend(r.choice_counts.iter().map(|c| c.to_string()));
        w.write_record(&row).map_err(|e| csv_err("<output>", e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series(series: &TimeSeries, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_series_to(series, std::io::BufWriter::new(file))
}

pub fn write_aggregate_to<W: Write>(agg: &AggregateSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(aggregate_header(&agg.thresholds))
        .map_err(|e| csv_err("<output>", e))?;
    for r in &agg.records {
        let mut row = vec![r.step.to_string()];
        let stats = [r.resource, r.alive, r.mean_energy, r.gatherers, r.deaths]
            .into_iter()
            .chain(r.choice_counts.iter().copied());
        for s in stats {
            row.push(s.mean.to_string());
            row.push(s.std.to_string());
        }
        row.push(r.surviving.to_string());
        w.write_record(&row).map_err(|e| csv_err("<output>", e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate(agg: &AggregateSeries, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_aggregate_to(agg, std::io::BufWriter::new(file))
}

/// Recovers thresholds from `choice_<threshold>` column names.
fn thresholds_from(
    header: &csv::StringRecord,
    source: &str,
    columns: impl Iterator<Item = String>,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for name in columns {
        let raw = name.strip_prefix("choice_").ok_or_else(|| Error::Malformed {
            path: source.to_string(),
            line: 1,
            msg: format!("unexpected column `{name}` in header {header:?}"),
        })?;
        out.push(raw.parse::<f64>().map_err(|_| Error::Malformed {
            path: source.to_string(),
            line: 1,
            msg: format!("bad threshold in column `{name}`"),
        })?);
    }
    Ok(out)
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, name: &str, source: &str) -> Result<T> {
    let line = rec.position().map_or(0, |p| p.line());
    let raw = rec.get(i).ok_or_else(|| Error::Malformed {
        path: source.to_string(),
        line,
        msg: format!("missing column `{name}`"),
    })?;
    raw.parse().map_err(|_| Error::Malformed {
        path: source.to_string(),
        line,
        msg: format!("cannot parse `{raw}` in column `{name}`"),
    })
}

fn check_header(got: &csv::StringRecord, expected: &[String], source: &str) -> Result<()> {
    if got.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Malformed {
            path: source.to_string(),
            line: 1,
            msg: format!("header {got:?} does not match expected {expected:?}"),
        });
    }
    Ok(())
}

pub fn read_series_from<R: Read>(input: R, source: &str) -> Result<TimeSeries> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| csv_err(source, e))?.clone();
    if header.len() < SERIES_FIXED.len() {
        return Err(Error::Malformed {
            path: source.to_string(),
            line: 1,
            msg: format!("expected at least {} columns", SERIES_FIXED.len()),
        });
    }
    let thresholds = thresholds_from(
        &header,
        source,
        header.iter().skip(SERIES_FIXED.len()).map(String::from),
    )?;
    let names = series_header(&thresholds);
    check_header(&header, &names, source)?;
    let mut series = TimeSeries::new(thresholds);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(source, e))?;
        let f = |i: usize| names[i].as_str();
        series.records.push(StepRecord {
            step: field(&rec, 0, f(0), source)?,
            resource: field(&rec, 1, f(1), source)?,
            alive: field(&rec, 2, f(2), source)?,
            mean_energy: field(&rec, 3, f(3), source)?,
            gatherers: field(&rec, 4, f(4), source)?,
            deaths: field(&rec, 5, f(5), source)?,
            choice_counts: (6..names.len())
                .map(|i| field(&rec, i, f(i), source))
                .collect::<Result<_>>()?,
        });
    }
    Ok(series)
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let file = std::fs::File::open(path)?;
    read_series_from(file, &path.display().to_string())
}

pub fn read_aggregate_from<R: Read>(input: R, source: &str) -> Result<AggregateSeries> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| csv_err(source, e))?.clone();
    let fixed = 1 + 2 * AGG_FIELDS.len();
    if header.len() < fixed + 1 || !(header.len() - fixed - 1).is_multiple_of(2) {
        return Err(Error::Malformed {
            path: source.to_string(),
            line: 1,
            msg: format!("unexpected aggregate column count {}", header.len()),
        });
    }
    let choice_cols = header
        .iter()
        .skip(fixed)
        .take(header.len() - fixed - 1)
        .step_by(2)
        .map(|c| c.strip_suffix("_mean").unwrap_or(c).to_string());
    let thresholds = thresholds_from(&header, source, choice_cols)?;
    let names = aggregate_header(&thresholds);
    check_header(&header, &names, source)?;
    let k = thresholds.len();
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(source, e))?;
        let stat = |slot: usize| -> Result<Stat> {
            let i = 1 + 2 * slot;
            Ok(Stat {
                mean: field(&rec, i, &names[i], source)?,
                std: field(&rec, i + 1, &names[i + 1], source)?,
            })
        };
        records.push(AggregateRecord {
            step: field(&rec, 0, "step", source)?,
            resource: stat(0)?,
            alive: stat(1)?,
            mean_energy: stat(2)?,
            gatherers: stat(3)?,
            deaths: stat(4)?,
            choice_counts: (0..k).map(|c| stat(5 + c)).collect::<Result<_>>()?,
            surviving: field(&rec, names.len() - 1, "surviving", source)?,
        });
    }
    Ok(AggregateSeries { thresholds, records })
}

pub fn read_aggregate(path: &Path) -> Result<AggregateSeries> {
    let file = std::fs::File::open(path)?;
    read_aggregate_from(file, &path.display().to_string())
}
