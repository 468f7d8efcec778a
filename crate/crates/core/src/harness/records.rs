//! Curve records and their CSV form (`x,series,value,units`).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Units string marking a sweep point that could not be computed.
pub const FAILED_UNITS: &str = "failed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub x: f64,
    pub series: String,
    pub value: f64,
    pub units: String,
}

impl CurveRecord {
    pub fn new(x: f64, series: impl Into<String>, value: f64, units: impl Into<String>) -> Self {
        Self {
            x,
            series: series.into(),
            value,
            units: units.into(),
        }
    }

    pub fn failed(x: f64, series: impl Into<String>) -> Self {
        Self::new(x, series, 0.0, FAILED_UNITS)
    }

    pub fn is_failed(&self) -> bool {
        self.units == FAILED_UNITS
    }
}

/// Sorts by `(series, x)`; stable, so equal keys keep their input order.
pub fn sort_records(records: &mut [CurveRecord]) {
    records.sort_by(|a, b| a.series.cmp(&b.series).then(a.x.total_cmp(&b.x)));
}

/// Writes the CSV to any sink. Numbers use the shortest round-trip decimal form.
pub fn write_csv<W: Write>(records: &[CurveRecord], sink: W) -> std::result::Result<(), csv::Error> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["x", "series", "value", "units"])?;
    for r in &sorted {
        w.write_record([r.x.to_string(), r.series.clone(), r.value.to_string(), r.units.clone()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[CurveRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(records, std::io::BufWriter::new(file)).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv<R: Read>(source: R) -> std::result::Result<Vec<CurveRecord>, csv::Error> {
    csv::Reader::from_reader(source).deserialize().collect()
}

pub fn parse_csv(path: &Path) -> Result<Vec<CurveRecord>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}
