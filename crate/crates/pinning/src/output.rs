//! File emission: CSV with a hash comment line, JSON envelopes, binary
//! field dumps.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// 17 significant digits in scientific notation; non-finite values become
/// empty cells.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            _ => Value::Null,
        }
    }
}

/// A header plus rows, written as CSV or as a JSON array of objects.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, hash: &str) -> String {
        let mut out = format!("# config_sha256={hash}\n{}\n", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj = self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.to_json())).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Writes into a single output directory; file names are plain names.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, hash: String) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_owned(), hash, written: Vec::new() })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn path(&self, name: &str) -> PathBuf {
        assert!(!name.contains('/') && !name.contains('\\') && name != ".." && !name.is_empty());
        self.root.join(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, bytes)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_csv(&mut self, name: &str, table: &Table) -> io::Result<PathBuf> {
        let text = table.to_csv(&self.hash);
        self.write_bytes(name, text.as_bytes())
    }

    /// `{"config_sha256": …, <key>: <payload>}`, pretty-printed.
    pub fn write_json(&mut self, name: &str, key: &str, payload: &impl Serialize) -> io::Result<PathBuf> {
        let payload = serde_json::to_value(payload).map_err(io::Error::other)?;
        let mut map = serde_json::Map::new();
        map.insert("config_sha256".into(), Value::String(self.hash.clone()));
        map.insert(key.into(), payload);
        let mut text = serde_json::to_string_pretty(&Value::Object(map)).map_err(io::Error::other)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_table(&mut self, stem: &str, table: &Table, json: bool) -> io::Result<PathBuf> {
        if json {
            self.write_json(&format!("{stem}.json"), "rows", &table.to_json_rows())
        } else {
            self.write_csv(&format!("{stem}.csv"), table)
        }
    }
}

/// Interleaved little-endian `(re, im)` 64-bit floats.
pub fn encode_field(psi: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * psi.len());
    for z in psi {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Option<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(16) {
        return None;
    }
    Some(
        bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_at_seventeen_digits() {
        for x in [1.033875474998695, -0.1, 6.02214076e23, 5e-324, f64::MAX] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(f64::NAN), "");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![1.5.into(), Cell::Empty, "MOTT_BH".into()]);
        t.push(vec![Cell::Int(3), None.into(), "x;y".into()]);
        assert_eq!(t.to_csv("ab"), "# config_sha256=ab\na,b,c\n1.5000000000000000e0,,MOTT_BH\n3,,x;y\n");
        assert_eq!(t.to_json_rows()[0]["b"], Value::Null);
    }

    #[test]
    fn field_dump_round_trips() {
        let psi = vec![Complex64::new(1.0, -2.5), Complex64::new(f64::MIN_POSITIVE, 3.0)];
        let bytes = encode_field(&psi);
        assert_eq!(bytes.len(), 32);
        assert_eq!(&bytes[..8], &1.0f64.to_le_bytes());
        assert_eq!(decode_field(&bytes).unwrap(), psi);
        assert!(decode_field(&bytes[..5]).is_none());
    }
}
