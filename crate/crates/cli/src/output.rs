//! CSV and gnuplot column output.

use std::cmp::Ordering;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::experiment::{PlacementRow, ResultRow, ResultsTable};

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("nothing to write: the results table is empty")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub const RATE_HEADER: [&str; 14] = [
    "kind", "algorithm", "m", "snr_db", "k", "beta_relay", "p1", "p2", "ci95_p1", "ci95_p2", "rate_nats",
    "rate_bits", "trials", "seed",
];

pub const PLACEMENT_HEADER: [&str; 9] = ["kind", "algorithm", "m", "point", "a", "b", "rate_nats", "rate_bits", "seed"];

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (a, b) => a.is_some().cmp(&b.is_some()),
    }
}

/// Lexicographic order on the key columns.
pub fn row_order(a: &ResultRow, b: &ResultRow) -> Ordering {
    a.kind
        .label()
        .cmp(b.kind.label())
        .then_with(|| a.algorithm.cmp(&b.algorithm))
        .then(a.m.cmp(&b.m))
        .then(cmp_opt(a.snr_db, b.snr_db))
        .then(cmp_opt(a.k, b.k))
        .then(cmp_opt(a.beta_relay, b.beta_relay))
}

pub fn placement_order(a: &PlacementRow, b: &PlacementRow) -> Ordering {
    a.algorithm.cmp(&b.algorithm).then(a.m.cmp(&b.m)).then(a.point.cmp(&b.point))
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn rate_record(r: &ResultRow) -> Vec<String> {
    vec![
        r.kind.label().to_string(),
        r.algorithm.clone(),
        r.m.to_string(),
        opt(r.snr_db),
        opt(r.k),
        opt(r.beta_relay),
        num(r.p1),
        num(r.p2),
        opt(r.ci95_p1),
        opt(r.ci95_p2),
        num(r.rate_nats),
        num(r.rate_bits()),
        opt(r.trials),
        opt(r.seed),
    ]
}

fn placement_record(r: &PlacementRow) -> Vec<String> {
    vec![
        "place".to_string(),
        r.algorithm.clone(),
        r.m.to_string(),
        r.point.to_string(),
        num(r.a),
        num(r.b),
        num(r.rate_nats),
        num(r.rate_nats / std::f64::consts::LN_2),
        opt(r.seed),
    ]
}

fn records(table: &ResultsTable) -> (Vec<&'static str>, Vec<Vec<String>>) {
    match table {
        ResultsTable::Rates(rows) => {
            let mut rows: Vec<&ResultRow> = rows.iter().collect();
            rows.sort_by(|a, b| row_order(a, b));
            (RATE_HEADER.to_vec(), rows.into_iter().map(rate_record).collect())
        }
        ResultsTable::Placement(rows) => {
            let mut rows: Vec<&PlacementRow> = rows.iter().collect();
            rows.sort_by(|a, b| placement_order(a, b));
            (PLACEMENT_HEADER.to_vec(), rows.into_iter().map(placement_record).collect())
        }
    }
}

/// Writes `table` as CSV with a header row, rows in key order.
pub fn write_csv<W: Write>(table: &ResultsTable, out: W) -> Result<(), OutputError> {
    if table.is_empty() {
        return Err(OutputError::Empty);
    }
    let (header, rows) = records(table);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes `table` as whitespace-separated columns; missing cells are `NaN`.
pub fn write_columns<W: Write>(table: &ResultsTable, mut out: W) -> Result<(), OutputError> {
    if table.is_empty() {
        return Err(OutputError::Empty);
    }
    let io_err = |source| OutputError::Io {
        path: "<columns>".into(),
        source,
    };
    let (header, rows) = records(table);
    writeln!(out, "# {}", header.join(" ")).map_err(io_err)?;
    for r in rows {
        let cells: Vec<&str> = r.iter().map(|c| if c.is_empty() { "NaN" } else { c.as_str() }).collect();
        writeln!(out, "{}", cells.join(" ")).map_err(io_err)?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, OutputError> {
    File::create(path).map(BufWriter::new).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_results(table: &ResultsTable, path: &Path) -> Result<(), OutputError> {
    if table.is_empty() {
        return Err(OutputError::Empty);
    }
    write_csv(table, create(path)?)
}

pub fn write_plot_data(table: &ResultsTable, path: &Path) -> Result<(), OutputError> {
    if table.is_empty() {
        return Err(OutputError::Empty);
    }
    let mut w = create(path)?;
    write_columns(table, &mut w)?;
    w.flush().map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}
