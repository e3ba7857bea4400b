//! Plain CSV tables: header row, `.` decimals, LF line endings.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back gives bit-identical values.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = r.headers().map_err(parse_err)?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()).map_err(parse_err))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    }
}

fn parse_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn float(v: f64) -> String {
    v.to_string()
}

pub fn parse_float(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

pub fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not an integer: `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact_and_uses_lf() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![float(0.1 + 0.2), float(-1e-300)]);
        t.push(vec![float(f64::MIN_POSITIVE), float(12345.678)]);
        let text = t.to_csv();
        assert!(!text.contains('\r'));
        assert!(text.starts_with("a,b\n"));
        let back = Table::from_csv(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(parse_float(&back.rows[0][0]).unwrap(), 0.1 + 0.2);
        assert_eq!(back.column("b").unwrap(), 1);
        assert!(back.column("c").is_err());
    }
}
