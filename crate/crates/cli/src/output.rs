use std::io::{self, Write};

use serde::Serialize;

use crate::args::Format;

/// `x` to `digits` significant digits, in fixed notation when that is
/// compact and scientific otherwise, without trailing zeros.
pub fn fmt_sig(x: f64, digits: u32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (digits - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: u32) -> f64 {
    fmt_sig(x, digits).parse().unwrap_or(x)
}

/// A cell value: integers, parameters and flags verbatim, probabilities
/// rounded to the requested precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Prob(f64),
    Bool(bool),
    Text(&'static str),
    Null(Option<()>),
}

impl Cell {
    pub fn prob(x: Option<f64>, digits: u32) -> Cell {
        match x {
            Some(x) => Cell::Prob(round_sig(x, digits)),
            None => Cell::Null(None),
        }
    }

    fn csv(&self, digits: u32) -> String {
        match *self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => x.to_string(),
            Cell::Prob(x) => fmt_sig(x, digits),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.to_string(),
            Cell::Null(_) => String::new(),
        }
    }
}

/// Rows sharing one ordered set of columns.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub digits: u32,
}

impl Table {
    pub fn new(columns: Vec<&'static str>, digits: u32) -> Self {
        Self { columns, rows: Vec::new(), digits }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|c| c.csv(self.digits)))?;
        }
        out.flush()
    }

    /// A flat array of objects whose keys follow the column order.
    pub fn write_json<W: Write>(&self, mut w: W) -> io::Result<()> {
        let objects: Vec<Object<'_>> = self.rows.iter().map(|r| Object { columns: &self.columns, cells: r }).collect();
        serde_json::to_writer_pretty(&mut w, &objects)?;
        writeln!(w)
    }

    pub fn write<W: Write>(&self, format: Format, w: W) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_json(w),
        }
    }
}

struct Object<'a> {
    columns: &'a [&'static str],
    cells: &'a [Cell],
}

impl Serialize for Object<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (k, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}
