//! CSV readers and writers for datasets, truths, result tables, paths and
//! price panels.

use std::io::{Read, Write};

use chrono::NaiveDate;
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::experiments::{BenchResult, PathResult, PriceTable, VariableClass};
use crate::model::{Dataset, TruthInfo};

/// Writes `y` followed by one column per predictor.
pub fn write_dataset<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["y".to_string()];
    header.extend(data.names().iter().cloned());
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(data.p() + 1);
    for i in 0..data.n() {
        row.clear();
        row.push(fmt(data.y()[i]));
        row.extend(data.x().row(i).iter().map(|&v| fmt(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset with a `y` column; every other column is a predictor.
pub fn read_dataset<R: Read>(input: R) -> Result<Dataset> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let y_col = header
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::invalid("dataset csv has no `y` column"))?;
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != y_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let p = names.len();
    let mut y = Vec::new();
    let mut x = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (i, cell) in rec.iter().enumerate() {
            let v = parse_cell(cell, line, &header[i])?;
            if i == y_col {
                y.push(v);
            } else {
                x.push(v);
            }
        }
    }
    let n = y.len();
    let x = Array2::from_shape_vec((n, p), x).map_err(|e| Error::dims(e.to_string()))?;
    Dataset::with_names(x, Array1::from(y), names)
}

/// `variable,beta` for every coefficient.
pub fn write_truth<W: Write>(truth: &TruthInfo, names: &[String], out: W) -> Result<()> {
    if names.len() != truth.p() {
        return Err(Error::dims("one name per coefficient"));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variable", "beta"])?;
    for (name, &b) in names.iter().zip(truth.beta()) {
        w.write_record([name.as_str(), &fmt(b)])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per method: `method,l2,l1,NZ,FPR,TPR` with `mean (sd)` cells,
/// followed by a `# failures` footer line per method with failed replications.
pub fn write_bench_table<W: Write>(result: &BenchResult, mut out: W) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["method", "l2", "l1", "NZ", "FPR", "TPR"])?;
        for row in &result.rows {
            let cells = match &row.summary {
                Some(s) => s.cells().to_vec(),
                None => vec!["NA".to_string(); 5],
            };
            let mut rec = vec![row.method.name().to_string()];
            rec.extend(cells);
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    for row in &result.rows {
        if !row.failures.is_empty() {
            writeln!(out, "# failures {}: {}", row.method.name(), row.failures.len())?;
        }
    }
    Ok(())
}

/// Long format: `lambda,variable,value,class`, one row per grid point and
/// variable (zeros included).
pub fn write_path<W: Write>(path: &PathResult, names: &[String], support: &[usize], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "variable", "value", "class"])?;
    for pt in &path.points {
        if pt.coefs.len() != names.len() {
            return Err(Error::dims("one name per coefficient"));
        }
        let lambda = fmt(pt.lambda);
        for (j, &v) in pt.coefs.values().iter().enumerate() {
            w.write_record([lambda.as_str(), &names[j], &fmt(v), VariableClass::of(j, support).name()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `date,index,<tickers...>` with ISO-8601 dates.
pub fn write_prices<W: Write>(table: &PriceTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["date".to_string(), "index".to_string()];
    header.extend(table.tickers().iter().cloned());
    w.write_record(&header)?;
    for t in 0..table.days() {
        let mut rec = vec![table.dates()[t].format("%Y-%m-%d").to_string(), fmt(table.index()[t])];
        rec.extend(table.prices().row(t).iter().map(|&v| fmt(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_prices<R: Read>(input: R) -> Result<PriceTable> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.get(0) != Some("date") {
        return Err(Error::invalid("price csv must start with a `date` column"));
    }
    let index_col = header
        .iter()
        .position(|h| h == "index")
        .ok_or_else(|| Error::invalid("price csv has no `index` column"))?;
    let tickers: Vec<String> = header
        .iter()
        .enumerate()
        .skip(1)
        .filter(|&(i, _)| i != index_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let (mut dates, mut index, mut prices) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
            .map_err(|e| Error::invalid(format!("row {}: bad date `{}`: {e}", line + 1, &rec[0])))?;
        dates.push(date);
        for (i, cell) in rec.iter().enumerate().skip(1) {
            let v = parse_cell(cell, line, &header[i])?;
            if i == index_col {
                index.push(v);
            } else {
                prices.push(v);
            }
        }
    }
    let prices = Array2::from_shape_vec((dates.len(), tickers.len()), prices).map_err(|e| Error::dims(e.to_string()))?;
    PriceTable::new(dates, Array1::from(index), prices, tickers)
}

fn parse_cell(cell: &str, line: usize, column: &str) -> Result<f64> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Err(Error::invalid(format!("row {}: missing value in column `{column}`", line + 1)));
    }
    cell.parse::<f64>()
        .map_err(|e| Error::invalid(format!("row {}: column `{column}`: {e}", line + 1)))
}

// shortest representation that round-trips
fn fmt(v: f64) -> String {
    format!("{v:?}")
}
