//! Reading and writing semantic traces as CSV or JSON.
//!
//! CSV carries frames only: one header line with the fourteen component
//! names, then one row per frame. The frame rate defaults to
//! [`DEFAULT_FPS`] and the key pose is the first row.
//!
//! JSON carries everything:
//! `{"fps": 25, "key": {"id": [..], "alb": [..], "illum": [..], "exp": [..], "pose": [14]}, "frames": [[14], ...]}`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::semantics::{KeyFrameSemantics, SemanticTrace, SemanticVector, COMPONENT_NAMES, SEMANTIC_DIM};

pub const DEFAULT_FPS: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Json,
    Csv,
}

impl TraceFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(TraceFormat::Json),
            "csv" => Some(TraceFormat::Csv),
            _ => None,
        }
    }
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(TraceFormat::Json),
            "csv" => Ok(TraceFormat::Csv),
            other => Err(Error::Config(format!("unknown trace format `{other}`"))),
        }
    }
}

pub fn load_trace(path: impl AsRef<Path>, format: TraceFormat) -> Result<SemanticTrace> {
    let file = fs::File::open(path)?;
    match format {
        TraceFormat::Csv => read_csv(file),
        TraceFormat::Json => read_json(file),
    }
}

pub fn export_trace(trace: &SemanticTrace, path: impl AsRef<Path>, format: TraceFormat) -> Result<()> {
    let mut file = fs::File::create(path)?;
    match format {
        TraceFormat::Csv => write_csv(trace, &mut file),
        TraceFormat::Json => write_json(trace, &mut file),
    }
}

pub fn read_csv<R: Read>(reader: R) -> Result<SemanticTrace> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(None, "header", e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != COMPONENT_NAMES {
        return Err(Error::parse(
            None,
            "header",
            format!("expected `{}`", COMPONENT_NAMES.join(",")),
        ));
    }
    let mut frames = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::parse(Some(row), "", e.to_string()))?;
        if record.len() != SEMANTIC_DIM {
            return Err(Error::validation(
                row,
                "frame",
                format!("expected {SEMANTIC_DIM} columns, found {}", record.len()),
            ));
        }
        let mut flat = [0.0; SEMANTIC_DIM];
        for (i, field) in record.iter().enumerate() {
            flat[i] = field
                .parse::<f64>()
                .map_err(|e| Error::parse(Some(row), COMPONENT_NAMES[i], format!("`{field}`: {e}")))?;
        }
        frames.push(SemanticVector::try_from_slice(&flat, row)?);
    }
    let pose = frames
        .first()
        .copied()
        .ok_or_else(|| Error::validation(0, "frames", "trace has no frames"))?;
    SemanticTrace::new(DEFAULT_FPS, KeyFrameSemantics::neutral(pose), frames)
}

pub fn write_csv<W: Write>(trace: &SemanticTrace, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.into());
    wtr.write_record(COMPONENT_NAMES).map_err(io)?;
    for frame in &trace.frames {
        // Display for f64 is the shortest representation that round-trips.
        wtr.write_record(frame.flatten().iter().map(|v| v.to_string()))
            .map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_json<R: Read>(reader: R) -> Result<SemanticTrace> {
    let doc: Value =
        serde_json::from_reader(reader).map_err(|e| Error::parse(None, "json", e.to_string()))?;
    trace_from_json(&doc)
}

pub fn trace_from_json(doc: &Value) -> Result<SemanticTrace> {
    let fps = match doc.get("fps") {
        None => DEFAULT_FPS,
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::parse(None, "fps", "expected a number"))?,
    };
    let frames_json = doc
        .get("frames")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(None, "frames", "expected an array of frames"))?;
    let mut frames = Vec::with_capacity(frames_json.len());
    for (i, f) in frames_json.iter().enumerate() {
        let values = number_array(f, Some(i), "frame")?;
        frames.push(SemanticVector::try_from_slice(&values, i)?);
    }
    let first = frames
        .first()
        .copied()
        .ok_or_else(|| Error::validation(0, "frames", "trace has no frames"))?;
    let key = match doc.get("key") {
        None => KeyFrameSemantics::neutral(first),
        Some(k) => {
            let (mut key, pose) = key_from_json(k)?;
            key.pose = pose.unwrap_or(first);
            key
        }
    };
    SemanticTrace::new(fps, key, frames)
}

/// Parses a key object. A missing `pose` yields `None` for the pose so the
/// caller decides (a trace uses its first frame).
pub fn key_from_json(k: &Value) -> Result<(KeyFrameSemantics, Option<SemanticVector>)> {
    if !k.is_object() {
        return Err(Error::parse(None, "key", "expected an object"));
    }
    let coeffs = |name: &str| -> Result<Vec<f64>> {
        match k.get(name) {
            None => Ok(Vec::new()),
            Some(v) => number_array(v, None, &format!("key.{name}")),
        }
    };
    let pose = match k.get("pose") {
        None => None,
        Some(p) => Some(SemanticVector::try_from_slice(
            &number_array(p, None, "key.pose")?,
            0,
        )?),
    };
    let key = KeyFrameSemantics {
        id_coeffs: coeffs("id")?,
        alb_coeffs: coeffs("alb")?,
        illum_coeffs: coeffs("illum")?,
        exp_coeffs: coeffs("exp")?,
        pose: pose.unwrap_or_default(),
    };
    key.validate()?;
    Ok((key, pose))
}

fn number_array(v: &Value, frame: Option<usize>, field: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::parse(frame, field, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(j, x)| {
            x.as_f64().ok_or_else(|| {
                let name = if field == "frame" && j < SEMANTIC_DIM {
                    COMPONENT_NAMES[j].to_string()
                } else {
                    format!("{field}[{j}]")
                };
                Error::parse(frame, name, format!("expected a number, found `{x}`"))
            })
        })
        .collect()
}

pub fn key_to_json(key: &KeyFrameSemantics) -> Value {
    json!({
        "id": key.id_coeffs,
        "alb": key.alb_coeffs,
        "illum": key.illum_coeffs,
        "exp": key.exp_coeffs,
        "pose": key.pose.flatten().to_vec(),
    })
}

pub fn trace_to_json(trace: &SemanticTrace) -> Value {
    json!({
        "fps": trace.fps,
        "key": key_to_json(&trace.key),
        "frames": trace.frames.iter().map(|f| f.flatten().to_vec()).collect::<Vec<_>>(),
    })
}

pub fn write_json<W: Write>(trace: &SemanticTrace, mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, &trace_to_json(trace)).map_err(|e| Error::Io(e.into()))?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Parses a standalone key object (the `key` member of the JSON trace form).
pub fn read_key_json<R: Read>(reader: R) -> Result<KeyFrameSemantics> {
    let doc: Value =
        serde_json::from_reader(reader).map_err(|e| Error::parse(None, "json", e.to_string()))?;
    match key_from_json(&doc)? {
        (key, Some(_)) => Ok(key),
        (_, None) => Err(Error::parse(None, "key.pose", "missing pose")),
    }
}
