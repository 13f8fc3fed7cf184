//! Raw CSV ingestion and the transaction/identity join.
//!
//! CSV contract: comma-separated, first row is the header, UTF-8, an empty
//! cell means missing. Column types are inferred after loading: a column is
//! numeric when every non-missing cell parses as a float, categorical
//! otherwise.

use std::io::Read;
use std::path::Path;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub const JOIN_KEY: &str = "TransactionID";

/// One typed cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Cat(String),
    Missing,
}

/// A rectangular table of typed cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl RawTable {
    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let (columns, grid) = read_string_grid(reader)?;
        Ok(infer_types(columns, grid))
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Writes the table back out in the same CSV contract.
    pub fn write_csv<W: std::io::Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    Cell::Num(v) => format!("{v}"),
                    Cell::Cat(s) => s.clone(),
                    Cell::Missing => String::new(),
                })
                .collect();
            writeln!(writer, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

fn read_string_grid<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(map_csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut grid = Vec::new();
    for record in csv_reader.records() {
        let record = record.map_err(map_csv_error)?;
        grid.push(record.iter().map(str::to_string).collect());
    }
    Ok((headers, grid))
}

fn map_csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    Error::MalformedCsv {
        line,
        message: err.to_string(),
    }
}

fn infer_types(columns: Vec<String>, grid: Vec<Vec<String>>) -> RawTable {
    let n_cols = columns.len();
    let mut numeric = vec![true; n_cols];
    for row in &grid {
        for (j, cell) in row.iter().enumerate() {
            if !cell.is_empty() && cell.trim().parse::<f64>().is_err() {
                numeric[j] = false;
            }
        }
    }
    let rows = grid
        .into_iter()
        .map(|row| {
            row.into_iter()
                .enumerate()
                .map(|(j, cell)| {
                    if cell.is_empty() {
                        Cell::Missing
                    } else if numeric[j] {
                        Cell::Num(cell.trim().parse().expect("checked numeric"))
                    } else {
                        Cell::Cat(cell)
                    }
                })
                .collect()
        })
        .collect();
    RawTable { columns, rows }
}

/// Loads the transaction table and left-joins the identity table on
/// `TransactionID` when given. Transactions with no identity match keep
/// missing cells for the identity columns.
pub fn load_and_join(transactions: &Path, identity: Option<&Path>) -> Result<RawTable> {
    let tx_file = std::fs::File::open(transactions)?;
    let (tx_cols, tx_grid) = read_string_grid(tx_file)?;
    let Some(id_path) = identity else {
        return Ok(infer_types(tx_cols, tx_grid));
    };

    let id_file = std::fs::File::open(id_path)?;
    let (id_cols, id_grid) = read_string_grid(id_file)?;

    let tx_key = tx_cols
        .iter()
        .position(|c| c == JOIN_KEY)
        .ok_or_else(|| Error::MissingColumn(JOIN_KEY.to_string()))?;
    let id_key = id_cols
        .iter()
        .position(|c| c == JOIN_KEY)
        .ok_or_else(|| Error::MissingColumn(JOIN_KEY.to_string()))?;

    let mut by_key: HashMap<&str, &Vec<String>> = HashMap::new();
    for row in &id_grid {
        if by_key.insert(row[id_key].as_str(), row).is_some() {
            return Err(Error::DuplicateJoinKey(row[id_key].clone()));
        }
    }

    let extra_cols: Vec<usize> = (0..id_cols.len()).filter(|&j| j != id_key).collect();
    let mut columns = tx_cols;
    columns.extend(extra_cols.iter().map(|&j| id_cols[j].clone()));

    let rows = tx_grid
        .into_iter()
        .map(|mut row| {
            match by_key.get(row[tx_key].as_str()) {
                Some(id_row) => row.extend(extra_cols.iter().map(|&j| id_row[j].clone())),
                None => row.extend(extra_cols.iter().map(|_| String::new())),
            }
            row
        })
        .collect();
    Ok(infer_types(columns, rows))
}
