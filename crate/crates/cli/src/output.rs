use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use num_bigint::BigUint;
use serde_json::{json, Map, Value};

use hamming_ent::entropy::EntropyResult;
use hamming_ent::figures::format_sig12;
use hamming_ent::model::SingleParticleSpectrum;
use hamming_ent::LevelSet;

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Flag(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => format_sig12(*x),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // non-finite numbers have no JSON form
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or_else(|| Value::String(format_sig12(*x)), Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Flag(b) => Value::Bool(*b),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Degeneracies up to 10^18 are written exactly; larger ones only as log10.
fn degeneracy_json(d: &BigUint) -> Value {
    if *d <= BigUint::from(10u64.pow(18)) {
        Value::String(d.to_string())
    } else {
        Value::Null
    }
}

pub struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

impl Sink {
    pub fn new(path: Option<PathBuf>, format: Option<Format>) -> Self {
        let inferred = path
            .as_ref()
            .and_then(|p| p.extension())
            .filter(|e| e.eq_ignore_ascii_case("json"))
            .map(|_| Format::Json);
        Self {
            format: format.or(inferred).unwrap_or(Format::Csv),
            path,
        }
    }

    fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn write_json(&self, value: &Value) -> io::Result<()> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()
    }

    pub fn write_table(&self, table: &Table) -> io::Result<()> {
        match self.format {
            Format::Json => self.write_json(&table.to_json()),
            Format::Csv => {
                let mut csv = csv::Writer::from_writer(self.writer()?);
                csv.write_record(&table.columns)?;
                for row in &table.rows {
                    csv.write_record(row.iter().map(Cell::text))?;
                }
                csv.flush()
            }
        }
    }

    pub fn write_entropy(&self, r: &EntropyResult, bits: bool) -> io::Result<()> {
        let (value, unit) = if bits {
            (r.entropy / std::f64::consts::LN_2, "bits")
        } else {
            (r.entropy, "nats")
        };
        match self.format {
            Format::Csv => {
                let mut t = Table::new(&["d", "q", "subsystem", "fermi_sea", "method", "S", "unit"]);
                t.push(vec![
                    f64::from(r.d).into(),
                    f64::from(r.q).into(),
                    r.subsystem.clone().into(),
                    r.fermi_sea.clone().into(),
                    r.method.as_str().to_string().into(),
                    value.into(),
                    unit.to_string().into(),
                ]);
                self.write_table(&t)
            }
            Format::Json => {
                let spectrum: Vec<Value> = r
                    .spectrum
                    .entries()
                    .iter()
                    .map(|e| {
                        json!({
                            "lambda": e.lambda,
                            "log10_degeneracy": e.log10_degeneracy(),
                            "degeneracy": degeneracy_json(&e.degeneracy),
                        })
                    })
                    .collect();
                let mut doc = json!({
                    "metadata": {
                        "d": r.d,
                        "q": r.q,
                        "subsystem": r.subsystem,
                        "fermi_sea": r.fermi_sea,
                        "method": r.method,
                    },
                    "spectrum": spectrum,
                    "entropy_nats": r.entropy,
                });
                if bits {
                    doc["entropy_bits"] = json!(value);
                }
                self.write_json(&doc)
            }
        }
    }

    pub fn write_levels(&self, s: &SingleParticleSpectrum, sea: &LevelSet) -> io::Result<()> {
        let mut t = Table::new(&["k", "omega", "energy", "degeneracy", "log10_degeneracy", "occupied"]);
        for k in 0..s.omega.len() {
            let deg = &s.degeneracy[k];
            let log10 = hamming_ent::special::big_ln(deg) / std::f64::consts::LN_10;
            t.push(vec![
                (k as f64).into(),
                (s.omega[k] as f64).into(),
                s.energy[k].into(),
                deg.to_string().into(),
                log10.into(),
                sea.contains(k as u32).into(),
            ]);
        }
        self.write_table(&t)
    }
}
