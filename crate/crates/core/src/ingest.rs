//! Price files to non-overlapping multi-day log returns.
//!
//! Two CSV layouts are accepted and told apart by the header:
//! long (`date,ticker,close[,volume]`, ticker column may also be called
//! `symbol` or `name`) and wide (`date,T1,T2,…`). Tickers with any missing
//! price are dropped rather than imputed.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{arg, Error, Result};

/// Trading days per "biweekly" return.
pub const DEFAULT_PERIOD: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    pub tickers: Vec<String>,
    /// Strictly increasing.
    pub dates: Vec<String>,
    /// dates × tickers, all strictly positive.
    pub prices: DMatrix<f64>,
    /// dates × tickers when the source had a volume column.
    pub volumes: Option<DMatrix<f64>>,
}

impl PriceTable {
    /// Restricts to `tickers`, in the given order.
    pub fn select(&self, tickers: &[String]) -> Result<PriceTable> {
        let idx: Vec<usize> = tickers
            .iter()
            .map(|t| {
                self.tickers
                    .iter()
                    .position(|s| s == t)
                    .ok_or_else(|| arg("tickers", format!("unknown ticker `{t}`")))
            })
            .collect::<Result<_>>()?;
        Ok(PriceTable {
            tickers: tickers.to_vec(),
            dates: self.dates.clone(),
            prices: self.prices.select_columns(&idx),
            volumes: self.volumes.as_ref().map(|v| v.select_columns(&idx)),
        })
    }
}

/// A parsed table and the tickers removed for missing prices.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPrices {
    pub table: PriceTable,
    pub dropped: Vec<String>,
}

pub fn load_prices(path: &Path) -> Result<LoadedPrices> {
    parse_prices(std::fs::File::open(path)?)
}

pub fn parse_prices<R: Read>(reader: R) -> Result<LoadedPrices> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_ascii_lowercase).collect();
    if header.first().map(String::as_str) != Some("date") {
        return Err(Error::Parse { line: 1, reason: "first column must be `date`".into() });
    }
    let ticker_col = header.iter().position(|h| matches!(h.as_str(), "ticker" | "symbol" | "name"));
    let close_col = header.iter().position(|h| h == "close");
    let cells = match (ticker_col, close_col) {
        (Some(t), Some(c)) => read_long(&mut rdr, t, c, header.iter().position(|h| h == "volume"))?,
        _ => read_wide(&mut rdr)?,
    };
    assemble(cells)
}

struct Cells {
    tickers: Vec<String>,
    dates: Vec<String>,
    /// (date, ticker) → (price, volume)
    values: BTreeMap<(usize, usize), (f64, Option<f64>)>,
    has_volume: bool,
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn parse_price(field: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::Parse { line, reason: format!("{what} `{field}` is not a number") })?;
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Parse { line, reason: format!("{what} {v} must be positive and finite") });
    }
    Ok(v)
}

fn read_long<R: Read>(
    rdr: &mut csv::Reader<R>,
    ticker_col: usize,
    close_col: usize,
    volume_col: Option<usize>,
) -> Result<Cells> {
    let mut raw = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        let field = |i: usize| record.get(i).unwrap_or("");
        let (date, ticker, close) = (field(0), field(ticker_col), field(close_col));
        if date.is_empty() || ticker.is_empty() {
            return Err(Error::Parse { line, reason: "missing date or ticker".into() });
        }
        if close.is_empty() {
            continue; // a missing price: the ticker is dropped later
        }
        let price = parse_price(close, line, "close")?;
        let volume = match volume_col.map(field) {
            Some(v) if !v.is_empty() => Some(
                v.parse::<f64>()
                    .map_err(|_| Error::Parse { line, reason: format!("volume `{v}` is not a number") })?,
            ),
            _ => None,
        };
        raw.push((date.to_string(), ticker.to_string(), price, volume, line));
    }
    let dates: Vec<String> = raw.iter().map(|r| r.0.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let tickers: Vec<String> = raw.iter().map(|r| r.1.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut values = BTreeMap::new();
    for (date, ticker, price, volume, line) in raw {
        let key = (
            dates.binary_search(&date).expect("collected above"),
            tickers.binary_search(&ticker).expect("collected above"),
        );
        if values.insert(key, (price, volume)).is_some() {
            return Err(Error::Parse { line, reason: format!("duplicate row for {ticker} on {date}") });
        }
    }
    Ok(Cells { tickers, dates, values, has_volume: volume_col.is_some() })
}

fn read_wide<R: Read>(rdr: &mut csv::Reader<R>) -> Result<Cells> {
    let tickers: Vec<String> = rdr.headers()?.iter().skip(1).map(str::to_string).collect();
    if tickers.is_empty() {
        return Err(Error::Parse { line: 1, reason: "no ticker columns".into() });
    }
    let mut dates: Vec<String> = Vec::new();
    let mut values = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = line_of(&record);
        if record.len() != tickers.len() + 1 {
            return Err(Error::Parse {
                line,
                reason: format!("expected {} fields, found {}", tickers.len() + 1, record.len()),
            });
        }
        let date = record[0].to_string();
        if let Some(prev) = dates.last() {
            if *prev >= date {
                return Err(Error::Parse { line, reason: format!("date {date} does not follow {prev}") });
            }
        }
        let d = dates.len();
        for (t, field) in record.iter().skip(1).enumerate() {
            if !field.is_empty() {
                values.insert((d, t), (parse_price(field, line, "price")?, None));
            }
        }
        dates.push(date);
    }
    Ok(Cells { tickers, dates, values, has_volume: false })
}

fn assemble(cells: Cells) -> Result<LoadedPrices> {
    let Cells { tickers, dates, values, has_volume } = cells;
    let complete: Vec<usize> = (0..tickers.len())
        .filter(|&t| (0..dates.len()).all(|d| values.contains_key(&(d, t))))
        .collect();
    let dropped: Vec<String> = (0..tickers.len())
        .filter(|t| !complete.contains(t))
        .map(|t| tickers[t].clone())
        .collect();
    if !dropped.is_empty() {
        log::warn!("dropped {} ticker(s) with missing prices: {}", dropped.len(), dropped.join(", "));
    }
    if complete.is_empty() || dates.is_empty() {
        return Err(Error::Insufficient("price table is empty after dropping incomplete tickers".into()));
    }
    let prices = DMatrix::from_fn(dates.len(), complete.len(), |d, j| values[&(d, complete[j])].0);
    let volumes = has_volume.then(|| {
        DMatrix::from_fn(dates.len(), complete.len(), |d, j| {
            values[&(d, complete[j])].1.unwrap_or(f64::NAN)
        })
    });
    Ok(LoadedPrices {
        table: PriceTable {
            tickers: complete.iter().map(|&t| tickers[t].clone()).collect(),
            dates,
            prices,
            volumes,
        },
        dropped,
    })
}

/// Log returns over non-overlapping windows.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    pub tickers: Vec<String>,
    pub period: usize,
    /// n × p.
    pub values: DMatrix<f64>,
}

impl ReturnMatrix {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }
}

/// `r_t = ln(P[(t+1)·period] / P[t·period])` for `t < ⌊(#dates − 1)/period⌋`.
pub fn to_log_returns(table: &PriceTable, period: usize) -> Result<ReturnMatrix> {
    if period == 0 {
        return Err(arg("period", "period must be at least 1 trading day"));
    }
    let days = table.dates.len();
    let n = days.saturating_sub(1) / period;
    if n < 2 {
        return Err(Error::Insufficient(format!(
            "{days} trading days give {n} return(s) at period {period}; need at least 2"
        )));
    }
    let values = DMatrix::from_fn(n, table.tickers.len(), |t, j| {
        (table.prices[((t + 1) * period, j)] / table.prices[(t * period, j)]).ln()
    });
    Ok(ReturnMatrix { tickers: table.tickers.clone(), period, values })
}

/// The `top` tickers by mean volume, descending; ties broken by symbol.
pub fn rank_by_volume(table: &PriceTable, top: usize) -> Result<Vec<String>> {
    let volumes = table
        .volumes
        .as_ref()
        .ok_or_else(|| arg("volume", "the price file has no volume column"))?;
    let mut ranked: Vec<(f64, &String)> = table
        .tickers
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let col = volumes.column(j);
            let seen: Vec<f64> = col.iter().copied().filter(|v| v.is_finite()).collect();
            let mean = if seen.is_empty() { 0.0 } else { seen.iter().sum::<f64>() / seen.len() as f64 };
            (mean, t)
        })
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(ranked.into_iter().take(top).map(|(_, t)| t.clone()).collect())
}

/// Reads a numeric matrix; a first row that does not parse as numbers is
/// taken as column names.
pub fn load_matrix_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    parse_matrix_csv(std::fs::File::open(path)?)
}

pub fn parse_matrix_csv<R: Read>(reader: R) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut names = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = line_of(&record);
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => {
                if let Some(first) = rows.first() {
                    if row.len() != first.len() {
                        return Err(Error::Parse {
                            line,
                            reason: format!("expected {} values, found {}", first.len(), row.len()),
                        });
                    }
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parse { line, reason: "non-finite value".into() });
                }
                rows.push(row);
            }
            Err(_) if i == 0 => names = record.iter().map(str::to_string).collect(),
            Err(e) => return Err(Error::Parse { line, reason: e.to_string() }),
        }
    }
    let p = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || p == 0 {
        return Err(Error::Insufficient("matrix file has no data rows".into()));
    }
    if !names.is_empty() && names.len() != p {
        return Err(Error::Parse { line: 1, reason: format!("{} names for {p} columns", names.len()) });
    }
    if names.is_empty() {
        names = (1..=p).map(|j| format!("x{j}")).collect();
    }
    Ok((names, DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j])))
}

/// Writes a header row and full-precision values.
pub fn write_matrix_csv<W: Write>(names: &[String], data: &DMatrix<f64>, out: W) -> Result<()> {
    if names.len() != data.ncols() {
        return Err(Error::Dimension(format!("{} names for {} columns", names.len(), data.ncols())));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(names)?;
    for row in data.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
