//! CSV ingestion and serialization.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`, so `1.50` is saved as `1.5`. Missing cells are written as a
//! single configurable token (default `NaN`).

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::dataset::{IncompleteDataset, IngestConfig, VariableColumn, VariableKind};
use crate::error::{Error, Result};

pub const DEFAULT_WRITE_TOKEN: &str = "NaN";

pub fn load_csv(path: impl AsRef<Path>, config: &IngestConfig) -> Result<IncompleteDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    read_csv(file, name, config)
}

pub fn read_csv<R: Read>(
    reader: R,
    name: impl Into<String>,
    config: &IngestConfig,
) -> Result<IncompleteDataset> {
    config.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(config.delimiter as u8)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut records = rdr.records();
    let mut names: Option<Vec<String>> = None;
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut width: Option<usize> = None;

    if config.header {
        if let Some(first) = records.next() {
            let first = first?;
            names = Some(first.iter().map(|s| s.trim().to_string()).collect());
            width = Some(first.len());
        }
    }

    for record in records {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                row,
                expected,
                found: record.len(),
            });
        }
        if cells.is_empty() {
            cells = vec![Vec::new(); expected];
        }
        for (col, field) in cells.iter_mut().zip(record.iter()) {
            col.push(field.to_string());
        }
    }

    let width = width.unwrap_or(0);
    let names =
        names.unwrap_or_else(|| (1..=width).map(|i| format!("V{i}")).collect::<Vec<_>>());
    if cells.is_empty() {
        cells = vec![Vec::new(); width];
    }

    for var in config.kind_overrides.keys() {
        if !names.iter().any(|n| n == var) {
            return Err(Error::InvalidConfig(format!(
                "kind override for unknown variable `{var}`"
            )));
        }
    }

    let mut columns = Vec::with_capacity(width);
    for (name, raw) in names.into_iter().zip(cells) {
        columns.push(build_column(name, raw, config)?);
    }
    IncompleteDataset::new(name, columns)
}

fn build_column(name: String, raw: Vec<String>, config: &IngestConfig) -> Result<VariableColumn> {
    let trimmed: Vec<Option<&str>> = raw
        .iter()
        .map(|cell| (!config.is_missing_token(cell)).then(|| cell.trim()))
        .collect();
    let parsed: Vec<Option<Option<f64>>> = trimmed
        .iter()
        .map(|c| c.map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite())))
        .collect();

    let kind = match config.kind_overrides.get(&name) {
        Some(kind) => *kind,
        None if parsed.iter().flatten().all(Option::is_some) => VariableKind::Numerical,
        None => VariableKind::Categorical,
    };

    match kind {
        VariableKind::Numerical => {
            let mut values = Vec::with_capacity(parsed.len());
            for (item, (p, t)) in parsed.into_iter().zip(&trimmed).enumerate() {
                match p {
                    None => values.push(None),
                    Some(Some(x)) => values.push(Some(x)),
                    Some(None) => {
                        return Err(Error::NotNumeric {
                            variable: name,
                            item,
                            value: t.unwrap_or_default().to_string(),
                        })
                    }
                }
            }
            VariableColumn::numerical(name, values)
        }
        VariableKind::Categorical => Ok(VariableColumn::categorical(
            name,
            trimmed.into_iter().map(|c| c.map(str::to_string)).collect(),
        )),
    }
}

pub fn save_csv(
    dataset: &IncompleteDataset,
    path: impl AsRef<Path>,
    missing_token: &str,
) -> Result<()> {
    let file = File::create(path.as_ref())?;
    write_csv(dataset, std::io::BufWriter::new(file), missing_token)
}

pub fn write_csv<W: Write>(dataset: &IncompleteDataset, writer: W, missing_token: &str) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(writer);
    wtr.write_record(dataset.variables().iter().map(|v| v.name()))?;
    let mut row = Vec::with_capacity(dataset.variable_count());
    for item in 0..dataset.item_count() {
        row.clear();
        for v in dataset.variables() {
            row.push(match v.cell(item) {
                crate::dataset::Cell::Number(x) => x.to_string(),
                crate::dataset::Cell::Label(s) => s.to_string(),
                crate::dataset::Cell::Missing => missing_token.to_string(),
            });
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn to_csv_string(dataset: &IncompleteDataset, missing_token: &str) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(dataset, &mut buf, missing_token)?;
    String::from_utf8(buf).map_err(|e| Error::Csv(e.to_string()))
}
