//! CSV and JSON reports.
//!
//! Reals are printed with 12 significant digits in `%g` style; a JSON report
//! is an array of objects with the same field names as the CSV columns.

use std::io::Write;

use serde_json::{Map, Value};

use crate::bound::LowerBoundSolution;
use crate::cycles::SimpleCycle;
use crate::dmdp::Dmdp;
use crate::error::{Error, Result};
use crate::sim::SimulationTable;

pub const CYCLES_HEADER: [&str; 4] = ["cycle_id", "length", "gain", "edges"];
pub const BOUND_HEADER: [&str; 4] = ["cycle_id", "information_number", "rate", "contribution"];
pub const SIMULATION_HEADER: [&str; 4] = ["T", "seed", "expected_regret", "ratio"];

const SIG_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Parameter(format!(
                "unknown format `{other}` (csv|json)"
            ))),
        }
    }
}

/// `x` with 12 significant digits, `%g` style: fixed notation for exponents
/// in `[-4, 12)`, scientific otherwise, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            sign,
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// A report: header plus rows of cells. Cells hold both the CSV text and
/// the JSON value so the two renderings cannot drift apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    header: Vec<&'static str>,
    rows: Vec<Vec<(String, Value)>>,
}

fn real(x: f64) -> (String, Value) {
    (fmt_sig(x), num(x))
}

fn int(x: u64) -> (String, Value) {
    (x.to_string(), Value::from(x))
}

fn text(s: impl Into<String>) -> (String, Value) {
    let s = s.into();
    (s.clone(), Value::String(s))
}

fn blank() -> (String, Value) {
    (String::new(), Value::Null)
}

impl Report {
    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV text of row `i`'s cells.
    pub fn row(&self, i: usize) -> Vec<&str> {
        self.rows[i].iter().map(|(s, _)| s.as_str()).collect()
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|(s, _)| s.as_str()))
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(k, (_, v))| (k.to_string(), v.clone()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        out.write_all(s.as_bytes())
            .map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// One row per cycle; ids are 1-based positions in `cycles`.
pub fn cycles_report(dmdp: &Dmdp, cycles: &[SimpleCycle]) -> Report {
    let rows = cycles
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                int(i as u64 + 1),
                int(c.len() as u64),
                real(c.gain()),
                text(c.label(dmdp)),
            ]
        })
        .collect();
    Report {
        header: CYCLES_HEADER.to_vec(),
        rows,
    }
}

/// One row per suboptimal cycle, then `total,,,C`. Cycle ids refer to
/// positions in `cycles`, the set the solution was computed from.
/// Cycles no confusing model can make optimal get an infinite information
/// number and zero rate.
pub fn bound_report(solution: &LowerBoundSolution, cycles: &[SimpleCycle]) -> Report {
    let position = |c: &SimpleCycle| {
        cycles
            .iter()
            .position(|x| x == c)
            .expect("cycle from the solved set")
    };
    let mut keyed: Vec<(usize, Vec<(String, Value)>)> = Vec::new();
    for cb in &solution.per_cycle {
        let i = position(&cb.cycle);
        keyed.push((
            i,
            vec![
                int(i as u64 + 1),
                real(cb.information_number),
                real(cb.rate),
                real(cb.contribution),
            ],
        ));
    }
    for c in &solution.unconstrained {
        let i = position(c);
        keyed.push((
            i,
            vec![
                int(i as u64 + 1),
                (fmt_sig(f64::INFINITY), Value::Null),
                real(0.0),
                real(0.0),
            ],
        ));
    }
    keyed.sort_by_key(|(k, _)| *k);
    let mut rows: Vec<_> = keyed.into_iter().map(|(_, r)| r).collect();
    rows.push(vec![
        text("total"),
        blank(),
        blank(),
        real(solution.constant),
    ]);
    Report {
        header: BOUND_HEADER.to_vec(),
        rows,
    }
}

/// One row per `(T, seed)`, then `mean` and `std` rows per horizon. The
/// ratio column is blank without a positive constant.
pub fn simulation_report(table: &SimulationTable) -> Report {
    let opt = |x: Option<f64>| x.map_or_else(blank, real);
    let mut rows = Vec::new();
    for agg in &table.aggregates {
        for r in table.rows.iter().filter(|r| r.horizon == agg.horizon) {
            rows.push(vec![
                int(r.horizon),
                int(r.seed),
                real(r.expected_regret),
                opt(r.ratio),
            ]);
        }
        rows.push(vec![
            int(agg.horizon),
            text("mean"),
            real(agg.mean_regret),
            opt(agg.mean_ratio),
        ]);
        rows.push(vec![
            int(agg.horizon),
            text("std"),
            real(agg.std_regret),
            opt(agg.std_ratio),
        ]);
    }
    Report {
        header: SIMULATION_HEADER.to_vec(),
        rows,
    }
}
