use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Column, SampleTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"TDC1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    PackedBinary,
}

impl Format {
    /// Guesses from the file extension: `.csv` is CSV, anything else packed.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::PackedBinary,
        }
    }
}

/// Column roles. For packed files an empty schema accepts the roles
/// stored in the file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub domain: Vec<String>,
    pub measures: Vec<String>,
}

impl Schema {
    pub fn new<S: Into<String>>(
        domain: impl IntoIterator<Item = S>,
        measures: impl IntoIterator<Item = S>,
    ) -> Self {
        Schema {
            domain: domain.into_iter().map(Into::into).collect(),
            measures: measures.into_iter().map(Into::into).collect(),
        }
    }

    fn is_empty(&self) -> bool {
        self.domain.is_empty() && self.measures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LoadReport<T> {
    pub table: SampleTable<T>,
    /// Rows dropped because they held NaN, infinities or unparsable cells.
    pub rejected_rows: usize,
}

pub fn load_table<T: Scalar>(path: &Path, format: Format, schema: &Schema) -> Result<LoadReport<T>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    match format {
        Format::Csv => load_csv(path, schema),
        Format::PackedBinary => {
            let table = read_packed(&mut BufReader::new(File::open(path)?))?;
            if !schema.is_empty() {
                let domain: Vec<_> = table.domain_names().collect();
                let measures: Vec<_> = table.measure_columns().iter().map(|c| c.name.as_str()).collect();
                if domain != schema.domain || measures != schema.measures {
                    return Err(Error::Schema(format!(
                        "file holds domain {domain:?} / measures {measures:?}, schema asks for {:?} / {:?}",
                        schema.domain, schema.measures
                    )));
                }
            }
            Ok(LoadReport {
                table,
                rejected_rows: 0,
            })
        }
    }
}

fn load_csv<T: Scalar>(path: &Path, schema: &Schema) -> Result<LoadReport<T>> {
    if schema.domain.is_empty() || schema.measures.is_empty() {
        return Err(Error::Schema(
            "CSV ingestion needs at least one domain and one measure column".into(),
        ));
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header = reader.headers()?.clone();
    let locate = |name: &String| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in CSV header")))
    };
    let wanted: Vec<usize> = schema
        .domain
        .iter()
        .chain(&schema.measures)
        .map(locate)
        .collect::<Result<_>>()?;

    let mut columns: Vec<Vec<T>> = vec![Vec::new(); wanted.len()];
    let mut row_buf = Vec::with_capacity(wanted.len());
    let mut rejected = 0usize;
    for record in reader.records() {
        let record = record?;
        row_buf.clear();
        let mut ok = true;
        for &c in &wanted {
            match record.get(c).and_then(|s| s.parse::<f64>().ok()) {
                Some(v) if v.is_finite() => row_buf.push(T::of(v)),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && row_buf.iter().all(|v| v.is_finite()) {
            for (col, v) in columns.iter_mut().zip(&row_buf) {
                col.push(*v);
            }
        } else {
            rejected += 1;
        }
    }
    if columns[0].is_empty() {
        return Err(Error::AllRowsRejected(rejected));
    }
    let mut columns = columns.into_iter();
    let domain = schema
        .domain
        .iter()
        .map(|n| Column::new(n.clone(), columns.next().unwrap()))
        .collect();
    let measures = schema
        .measures
        .iter()
        .map(|n| Column::new(n.clone(), columns.next().unwrap()))
        .collect();
    Ok(LoadReport {
        table: SampleTable::from_columns(domain, measures)?,
        rejected_rows: rejected,
    })
}

/// Writes the table in the packed `TDC1` layout.
pub fn write_packed<T: Scalar, W: Write>(table: &SampleTable<T>, out: &mut W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(table.n_points() as u64).to_le_bytes())?;
    out.write_all(&(table.dims() as u32).to_le_bytes())?;
    out.write_all(&(table.measure_columns().len() as u32).to_le_bytes())?;
    let columns = || table.domain_columns().iter().chain(table.measure_columns());
    for c in columns() {
        out.write_all(&(c.name.len() as u32).to_le_bytes())?;
        out.write_all(c.name.as_bytes())?;
    }
    for c in columns() {
        for v in &c.values {
            out.write_all(&v.as_f64().to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn save_packed<T: Scalar>(table: &SampleTable<T>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_packed(table, &mut out)?;
    out.flush()?;
    Ok(())
}

fn read_exact<const N: usize, R: Read>(input: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    input
        .read_exact(&mut buf)
        .map_err(|e| Error::format("TDC1", format!("truncated: {e}")))?;
    Ok(buf)
}

pub fn read_packed<T: Scalar, R: Read>(input: &mut R) -> Result<SampleTable<T>> {
    if &read_exact::<4, _>(input)? != MAGIC {
        return Err(Error::format("TDC1", "bad magic"));
    }
    let n = u64::from_le_bytes(read_exact(input)?) as usize;
    let d = u32::from_le_bytes(read_exact(input)?) as usize;
    let m = u32::from_le_bytes(read_exact(input)?) as usize;
    let mut names = Vec::with_capacity(d + m);
    for _ in 0..d + m {
        let len = u32::from_le_bytes(read_exact(input)?) as usize;
        let mut raw = vec![0u8; len];
        input
            .read_exact(&mut raw)
            .map_err(|e| Error::format("TDC1", format!("truncated name: {e}")))?;
        names.push(String::from_utf8(raw).map_err(|_| Error::format("TDC1", "column name is not UTF-8"))?);
    }
    let mut bytes = vec![0u8; n * 8];
    let mut columns = Vec::with_capacity(d + m);
    for name in names {
        input
            .read_exact(&mut bytes)
            .map_err(|e| Error::format("TDC1", format!("truncated column `{name}`: {e}")))?;
        let values = bytes
            .chunks_exact(8)
            .map(|b| T::of(f64::from_le_bytes(b.try_into().unwrap())))
            .collect();
        columns.push(Column::new(name, values));
    }
    let measures = columns.split_off(d);
    SampleTable::from_columns(columns, measures)
}
