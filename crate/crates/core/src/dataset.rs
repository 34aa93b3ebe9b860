//! Dataset rows and their CSV form.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write/read cycle is lossless.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{design_columns, DesignVector, Material, N_CATEGORICAL, N_CONTINUOUS};
use crate::performance::{PerformanceRecord, Target, TipAngle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimStatus {
    Ok,
    Failed,
}

impl SimStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SimStatus::Ok => "ok",
            SimStatus::Failed => "failed",
        }
    }
}

/// A generated design, before simulation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignRow {
    pub design_id: u64,
    pub sobol_index: u64,
    pub design: DesignVector,
}

/// A simulated design. `performance` is `None` exactly when the run failed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetRow {
    pub design_id: u64,
    pub sobol_index: u64,
    pub design: DesignVector,
    pub performance: Option<PerformanceRecord>,
}

impl DatasetRow {
    pub fn status(&self) -> SimStatus {
        if self.performance.is_some() {
            SimStatus::Ok
        } else {
            SimStatus::Failed
        }
    }

    /// Performance with every target present and finite.
    pub fn complete(&self) -> Option<&PerformanceRecord> {
        self.performance
            .as_ref()
            .filter(|p| Target::ALL.iter().all(|&t| p.get(t).is_some_and(f64::is_finite)))
    }
}

fn design_header() -> Vec<&'static str> {
    let mut h = vec!["design_id", "sobol_index"];
    h.extend(design_columns());
    h
}

pub fn dataset_header() -> Vec<&'static str> {
    let mut h = design_header();
    h.extend(Target::ALL.iter().map(|t| t.column()));
    h.extend(["tip_status", "sim_status"]);
    h
}

fn push_design(out: &mut Vec<String>, id: u64, sobol: u64, d: &DesignVector) {
    out.push(id.to_string());
    out.push(sobol.to_string());
    out.extend(d.continuous().iter().map(f64::to_string));
    out.extend(d.materials().iter().map(|m| m.name().to_string()));
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

pub fn write_designs(path: &Path, rows: &[DesignRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(design_header()).map_err(|e| Error::csv(path, e))?;
    let mut rec = Vec::with_capacity(2 + N_CONTINUOUS + N_CATEGORICAL);
    for r in rows {
        rec.clear();
        push_design(&mut rec, r.design_id, r.sobol_index, &r.design);
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_dataset(path: &Path, rows: &[DatasetRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(dataset_header()).map_err(|e| Error::csv(path, e))?;
    let mut rec = Vec::new();
    for r in rows {
        rec.clear();
        push_design(&mut rec, r.design_id, r.sobol_index, &r.design);
        match &r.performance {
            Some(p) => {
                for t in &Target::ALL[..Target::COUNT - 1] {
                    rec.push(p.get(*t).map(|v| v.to_string()).unwrap_or_default());
                }
                match p.theta {
                    Some(TipAngle::Degrees(d)) => rec.extend([d.to_string(), "tips".into()]),
                    Some(TipAngle::NoTip) => rec.extend([String::new(), "no_tip".into()]),
                    None => rec.extend([String::new(), String::new()]),
                }
            }
            None => rec.extend(std::iter::repeat_n(String::new(), Target::COUNT + 1)),
        }
        rec.push(r.status().as_str().into());
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct Columns {
    index: Vec<usize>,
}

impl Columns {
    fn resolve(path: &Path, header: &csv::StringRecord, wanted: &[&str]) -> Result<Self> {
        let index = wanted
            .iter()
            .map(|w| {
                header.iter().position(|h| h.trim() == *w).ok_or_else(|| Error::Parse {
                    path: path.into(),
                    row: 0,
                    message: format!("missing column `{w}`"),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Columns { index })
    }

    fn get<'r>(&self, rec: &'r csv::StringRecord, i: usize) -> &'r str {
        rec.get(self.index[i]).unwrap_or("").trim()
    }
}

fn parse_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        row,
        message: message.into(),
    }
}

fn parse_f64(path: &Path, row: usize, col: &str, s: &str) -> Result<f64> {
    s.parse().map_err(|_| parse_err(path, row, format!("column `{col}`: `{s}` is not a number")))
}

fn parse_u64(path: &Path, row: usize, col: &str, s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| parse_err(path, row, format!("column `{col}`: `{s}` is not an unsigned integer")))
}

fn read_design(path: &Path, row: usize, cols: &Columns, rec: &csv::StringRecord) -> Result<DesignRow> {
    let names = design_header();
    let design_id = parse_u64(path, row, names[0], cols.get(rec, 0))?;
    let sobol_index = parse_u64(path, row, names[1], cols.get(rec, 1))?;
    let mut values = [0.0; N_CONTINUOUS];
    for (i, v) in values.iter_mut().enumerate() {
        *v = parse_f64(path, row, names[2 + i], cols.get(rec, 2 + i))?;
    }
    let mut mats = [Material::Aluminum; N_CATEGORICAL];
    for (i, m) in mats.iter_mut().enumerate() {
        let s = cols.get(rec, 2 + N_CONTINUOUS + i);
        *m = s.parse().map_err(|_| parse_err(path, row, format!("unknown material `{s}`")))?;
    }
    Ok(DesignRow {
        design_id,
        sobol_index,
        design: DesignVector::from_parts(&values, mats),
    })
}

fn reader(path: &Path) -> Result<(csv::Reader<std::fs::File>, csv::StringRecord)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    Ok((r, header))
}

pub fn read_designs(path: &Path) -> Result<Vec<DesignRow>> {
    let (mut r, header) = reader(path)?;
    let cols = Columns::resolve(path, &header, &design_header())?;
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            read_design(path, i + 1, &cols, &rec)
        })
        .collect()
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRow>> {
    let (mut r, header) = reader(path)?;
    let wanted = dataset_header();
    let cols = Columns::resolve(path, &header, &wanted)?;
    let base = 2 + N_CONTINUOUS + N_CATEGORICAL;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let d = read_design(path, row, &cols, &rec)?;
        let status = cols.get(&rec, wanted.len() - 1);
        let performance = match status {
            "ok" => {
                let mut v = [0.0; Target::COUNT];
                for (k, slot) in v.iter_mut().enumerate().take(Target::COUNT - 1) {
                    *slot = parse_f64(path, row, wanted[base + k], cols.get(&rec, base + k))?;
                }
                let mut p = PerformanceRecord::from_values(&v);
                let theta = cols.get(&rec, base + Target::COUNT - 1);
                p.theta = match cols.get(&rec, base + Target::COUNT) {
                    "tips" => Some(TipAngle::Degrees(parse_f64(path, row, "theta_deg", theta)?)),
                    "no_tip" => Some(TipAngle::NoTip),
                    "" => None,
                    other => return Err(parse_err(path, row, format!("unknown tip_status `{other}`"))),
                };
                Some(p)
            }
            "failed" => None,
            other => return Err(parse_err(path, row, format!("unknown sim_status `{other}`"))),
        };
        rows.push(DatasetRow {
            design_id: d.design_id,
            sobol_index: d.sobol_index,
            design: d.design,
            performance,
        });
    }
    Ok(rows)
}
