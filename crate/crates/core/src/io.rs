//! CSV and JSON formats.
//!
//! Observations: `id,time,status`. Intervals: `id,left,right`, with `right`
//! possibly `inf`. Infinite values serialize as the string `"inf"` in JSON.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{CensoredInterval, ObservationRecord, TimeFrame};
use crate::npmle::{GriddedDensity, StepEstimate, SupportInterval, SurvivalCurve};

pub const OBSERVATIONS_HEADER: [&str; 3] = ["id", "time", "status"];
pub const INTERVALS_HEADER: [&str; 3] = ["id", "left", "right"];

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("unrecognised CSV header `{0}`; expected `id,time,status` or `id,left,right`")]
    UnknownHeader(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serde adapter writing infinities as `"inf"` / `"-inf"`.
pub mod inf_float {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    struct FloatOrInf;

    impl<'de> Visitor<'de> for FloatOrInf {
        type Value = f64;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a number or \"inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            super::parse_float(v).ok_or_else(|| E::custom(format!("invalid number `{v}`")))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        d.deserialize_any(FloatOrInf)
    }
}

/// Parse a decimal, accepting `inf`, `+inf`, `Inf` and `infinity`.
pub fn parse_float(s: &str) -> Option<f64> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        "nan" => None,
        _ => t.parse().ok(),
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Observations,
    Intervals,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CsvInput {
    Observations(Vec<ObservationRecord>),
    Intervals(Vec<(String, CensoredInterval)>),
}

fn detect(header: &csv::StringRecord) -> Result<CsvKind, IoError> {
    let fields: Vec<&str> = header.iter().map(str::trim).collect();
    if fields == OBSERVATIONS_HEADER {
        Ok(CsvKind::Observations)
    } else if fields == INTERVALS_HEADER {
        Ok(CsvKind::Intervals)
    } else {
        Err(IoError::UnknownHeader(fields.join(",")))
    }
}

fn field(rec: &csv::StringRecord, i: usize, line: u64) -> Result<&str, IoError> {
    rec.get(i).ok_or_else(|| IoError::Parse {
        line,
        message: format!("missing column {}", i + 1),
    })
}

fn number(s: &str, name: &str, line: u64) -> Result<f64, IoError> {
    parse_float(s).ok_or_else(|| IoError::Parse {
        line,
        message: format!("invalid {name} `{s}`"),
    })
}

/// Read either CSV kind, chosen by an exact header match.
pub fn read_csv<R: Read>(reader: R) -> Result<CsvInput, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let kind = detect(rdr.headers()?)?;
    let mut obs = Vec::new();
    let mut ivs = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // header is line 1
        let line = rec.position().map_or(row as u64 + 2, |p| p.line());
        if rec.len() != 3 {
            return Err(IoError::Parse {
                line,
                message: format!("expected 3 columns, found {}", rec.len()),
            });
        }
        let id = field(&rec, 0, line)?.trim().to_string();
        match kind {
            CsvKind::Observations => {
                let time = number(field(&rec, 1, line)?, "time", line)?;
                if !time.is_finite() || time < 0.0 {
                    return Err(IoError::Parse {
                        line,
                        message: format!("time must be finite and non-negative, got {time}"),
                    });
                }
                let status = match field(&rec, 2, line)?.trim() {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(IoError::Parse {
                            line,
                            message: format!("status must be 0 or 1, got `{other}`"),
                        })
                    }
                };
                obs.push(ObservationRecord::new(id, time, status));
            }
            CsvKind::Intervals => {
                let left = number(field(&rec, 1, line)?, "left", line)?;
                let right = number(field(&rec, 2, line)?, "right", line)?;
                let iv = CensoredInterval::new(left, right).map_err(|e| IoError::Parse {
                    line,
                    message: e.to_string(),
                })?;
                ivs.push((id, iv));
            }
        }
    }
    Ok(match kind {
        CsvKind::Observations => CsvInput::Observations(obs),
        CsvKind::Intervals => CsvInput::Intervals(ivs),
    })
}

pub fn write_observations<W: Write>(w: W, records: &[ObservationRecord]) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(OBSERVATIONS_HEADER)?;
    for r in records {
        wtr.write_record([r.id.clone(), format_float(r.time), r.status.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_intervals<W: Write>(w: W, rows: &[(String, CensoredInterval)]) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(INTERVALS_HEADER)?;
    for (id, iv) in rows {
        for _ in 0..iv.multiplicity {
            wtr.write_record([id.clone(), format_float(iv.left), format_float(iv.right)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// JSON form of a raw step fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFitJson {
    pub support: Vec<SupportInterval>,
    pub masses: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub frame: TimeFrame,
}

impl From<&StepEstimate> for StepFitJson {
    fn from(est: &StepEstimate) -> Self {
        Self {
            support: est.support.clone(),
            masses: est.masses.clone(),
            converged: est.converged,
            iterations: est.iterations,
            frame: est.frame,
        }
    }
}

impl StepFitJson {
    pub fn into_estimate(self) -> StepEstimate {
        StepEstimate {
            support: self.support,
            masses: self.masses,
            frame: self.frame,
            converged: self.converged,
            iterations: self.iterations,
            all_censored: false,
        }
    }
}

/// Either fit file written by `sise fit`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FitFile {
    Gridded(GriddedDensity),
    Step(StepFitJson),
}

// Serialize support intervals as `[left, right]` pairs.
impl Serialize for SupportInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        struct Inf(f64);
        impl Serialize for Inf {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                inf_float::serialize(&self.0, s)
            }
        }
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&Inf(self.left))?;
        t.serialize_element(&Inf(self.right))?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for SupportInterval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Inf(#[serde(with = "inf_float")] f64);
        let (l, r) = <(Inf, Inf)>::deserialize(d)?;
        Ok(SupportInterval {
            left: l.0,
            right: r.0,
        })
    }
}

/// `tau,density,survival` rows at the bin starts.
pub fn write_curve<W: Write>(w: W, g: &GriddedDensity, s: &SurvivalCurve) -> Result<(), IoError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["tau", "density", "survival"])?;
    for (j, v) in g.values.iter().enumerate() {
        wtr.write_record([format_float(g.edge(j)), format_float(*v), format_float(s.values[j])])?;
    }
    wtr.write_record([
        format_float(g.grid_end()),
        format_float(0.0),
        format_float(s.values[g.len()]),
    ])?;
    wtr.flush()?;
    Ok(())
}

/// Display helper for a float that may be infinite.
pub struct Num(pub f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_float(self.0))
    }
}
