//! CSV ingest and export of scenario datasets.
//!
//! One header row, an ISO-8601 timestamp column on a gap-free UTC hourly
//! grid, and one numeric column per series. Which column feeds which series
//! is given by a [`Schema`]. Rows with a missing or non-numeric value in any
//! mapped column are rejected, not imputed.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use gridcast_core::series::SeriesError;
use gridcast_core::{BuildingId, ScenarioDataset, TimeSeries};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: bad timestamp `{value}`")]
    BadTimestamp { row: usize, value: String },
    #[error("row {row}: timestamp {value} is not on a whole hour")]
    OffGrid { row: usize, value: String },
    #[error("row {row}: timestamps are not increasing")]
    NonMonotone { row: usize },
    #[error("row {row}: gap in hourly grid ({hours} h after the previous row)")]
    Gap { row: usize, hours: i64 },
    #[error("row {row} rejected: column `{column}` holds `{value}`")]
    RejectedRow {
        row: usize,
        column: String,
        value: String,
    },
    #[error("no data rows")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Column names for each series. Load columns are keyed by building id;
/// when none are given, every `load_<id>` column is read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schema {
    pub timestamp: String,
    pub loads: BTreeMap<u32, String>,
    pub solar: String,
    pub price: String,
    pub carbon: String,
    pub covariates: Vec<String>,
}

impl Default for Schema {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            loads: BTreeMap::new(),
            solar: "solar".into(),
            price: "price".into(),
            carbon: "carbon".into(),
            covariates: Vec::new(),
        }
    }
}

impl Schema {
    /// Default column names for every series of `ds`: `load_<id>` for
    /// loads and the covariate names as they are.
    pub fn for_dataset(ds: &ScenarioDataset) -> Self {
        Self {
            loads: ds
                .building_ids()
                .map(|id| (id.0, format!("load_{id}")))
                .collect(),
            covariates: ds.covariates().keys().cloned().collect(),
            ..Self::default()
        }
    }
}

/// Parses an ISO-8601 timestamp. Offsets are honoured; naive values are
/// taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc());
        }
    }
    None
}

pub fn format_timestamp(hour: i64) -> String {
    DateTime::from_timestamp(hour * 3600, 0)
        .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| hour.to_string())
}

pub fn read_dataset<R: Read>(reader: R, schema: &Schema) -> Result<ScenarioDataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };
    let ts_col = find(&schema.timestamp)?;
    let detected: BTreeMap<u32, String>;
    let loads = if schema.loads.is_empty() {
        detected = header
            .iter()
            .filter_map(|h| Some((h.strip_prefix("load_")?.parse().ok()?, h.to_string())))
            .collect();
        &detected
    } else {
        &schema.loads
    };
    let mut names: Vec<&str> = loads.values().map(String::as_str).collect();
    names.extend([
        schema.solar.as_str(),
        schema.price.as_str(),
        schema.carbon.as_str(),
    ]);
    names.extend(schema.covariates.iter().map(String::as_str));
    let cols: Vec<usize> = names.iter().map(|n| find(n)).collect::<Result<_, _>>()?;

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); cols.len()];
    let mut start: Option<i64> = None;
    let mut prev: Option<i64> = None;
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let raw = record.get(ts_col).unwrap_or("");
        let ts = parse_timestamp(raw).ok_or_else(|| DatasetError::BadTimestamp {
            row,
            value: raw.to_string(),
        })?;
        let secs = ts.timestamp();
        if secs.rem_euclid(3600) != 0 {
            return Err(DatasetError::OffGrid {
                row,
                value: raw.to_string(),
            });
        }
        let hour = secs.div_euclid(3600);
        if let Some(p) = prev {
            if hour <= p {
                return Err(DatasetError::NonMonotone { row });
            }
            if hour != p + 1 {
                return Err(DatasetError::Gap {
                    row,
                    hours: hour - p,
                });
            }
        }
        start.get_or_insert(hour);
        prev = Some(hour);
        for (k, &c) in cols.iter().enumerate() {
            let cell = record.get(c).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => columns[k].push(v),
                _ => {
                    return Err(DatasetError::RejectedRow {
                        row,
                        column: names[k].to_string(),
                        value: cell.to_string(),
                    })
                }
            }
        }
    }
    let start = start.ok_or(DatasetError::Empty)?;
    let mut it = columns.into_iter();
    let mut buildings = BTreeMap::new();
    for id in loads.keys() {
        buildings.insert(
            BuildingId(*id),
            TimeSeries::hourly(start, it.next().unwrap())?,
        );
    }
    let solar = TimeSeries::hourly(start, it.next().unwrap())?;
    let price = TimeSeries::hourly(start, it.next().unwrap())?;
    let carbon = TimeSeries::hourly(start, it.next().unwrap())?;
    let mut covariates = BTreeMap::new();
    for name in &schema.covariates {
        covariates.insert(name.clone(), TimeSeries::hourly(start, it.next().unwrap())?);
    }
    Ok(ScenarioDataset::new(
        buildings, solar, price, carbon, covariates,
    )?)
}

pub fn load_dataset(path: &Path, schema: &Schema) -> Result<ScenarioDataset, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_dataset(std::io::BufReader::new(file), schema)
}

/// Writes `ds` with the columns named by `schema`, in schema order: loads,
/// solar, price, carbon, covariates. Series missing from `ds` are an error.
pub fn write_dataset<W: Write>(
    writer: W,
    ds: &ScenarioDataset,
    schema: &Schema,
) -> Result<(), DatasetError> {
    let mut series: Vec<&[f64]> = Vec::new();
    let mut header = vec![schema.timestamp.clone()];
    for (id, name) in &schema.loads {
        series.push(ds.load(BuildingId(*id))?.values());
        header.push(name.clone());
    }
    for (name, s) in [
        (&schema.solar, ds.solar()),
        (&schema.price, ds.price()),
        (&schema.carbon, ds.carbon()),
    ] {
        series.push(s.values());
        header.push(name.clone());
    }
    for name in &schema.covariates {
        let s = ds
            .covariates()
            .get(name)
            .ok_or_else(|| DatasetError::MissingColumn(name.clone()))?;
        series.push(s.values());
        header.push(name.clone());
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&header)?;
    let step = ds.step_hours() as i64;
    for t in 0..ds.len() {
        let mut rec = vec![format_timestamp(ds.start_hour() + t as i64 * step)];
        rec.extend(series.iter().map(|s| s[t].to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| DatasetError::Io {
        path: "<dataset>".into(),
        source,
    })?;
    Ok(())
}
