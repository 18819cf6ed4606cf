use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Schedule, SweepResult, SweepRow, TOOL_VERSION};
use crate::evolve::{EvolutionTrace, RunOptions, Scheme};
use crate::numerics::ComplexVector;
use crate::sqr::{GateSpec, PulseConfig, QubitState};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    /// Format implied by a `.csv` or `.json` extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        Format::parse(path.extension()?.to_str()?)
    }
}

/// Run context stored next to exported data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub tool_version: String,
    pub scheme: Scheme,
    pub gate: GateSpec,
    pub cfg: PulseConfig,
    pub psi0: QubitState,
    pub options: RunOptions,
}

impl Metadata {
    pub fn new(
        scheme: Scheme,
        gate: &GateSpec,
        cfg: &PulseConfig,
        psi0: &QubitState,
        options: &RunOptions,
    ) -> Self {
        Self {
            tool: "sqrcd".into(),
            tool_version: TOOL_VERSION.into(),
            scheme,
            gate: gate.clone(),
            cfg: cfg.clone(),
            psi0: *psi0,
            options: options.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub metadata: Metadata,
    pub trace: EvolutionTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ScheduleRecord {
    metadata: Metadata,
    schedule: Schedule,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

fn format_err(path: &Path, message: impl std::fmt::Display) -> HarnessError {
    HarnessError::Format { path: path.display().to_string(), message: message.to_string() }
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn open(path: &Path) -> Result<BufReader<File>, HarnessError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn finish<W: Write>(mut w: W, path: &Path) -> Result<(), HarnessError> {
    w.flush().map_err(io_err(path))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn num(x: f64) -> String {
    // shortest representation that parses back to the same double
    format!("{x:?}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn trace_header(dim: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=dim).map(|i| format!("p{i}")));
    for i in 1..=dim {
        h.push(format!("re_psi{i}"));
        h.push(format!("im_psi{i}"));
    }
    h
}

/// CSV with columns `t, p1..pN, re_psi1, im_psi1, .., re_psiN, im_psiN`.
pub fn trace_csv<W: Write>(trace: &EvolutionTrace, w: W) -> Result<(), csv::Error> {
    let dim = trace.dim();
    let mut out = csv_writer(w);
    out.write_record(trace_header(dim))?;
    for (k, t) in trace.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(trace.populations.iter().map(|p| num(p[k])));
        for z in trace.states[k].as_slice() {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trace(
    trace: &EvolutionTrace,
    metadata: &Metadata,
    path: &Path,
    format: Format,
) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    match format {
        Format::Csv => trace_csv(trace, &mut w).map_err(|e| format_err(path, e))?,
        Format::Json => {
            let rec = TraceRecord { metadata: metadata.clone(), trace: trace.clone() };
            serde_json::to_writer_pretty(&mut w, &rec).map_err(|e| format_err(path, e))?;
            writeln!(w).map_err(io_err(path))?;
        }
    }
    finish(w, path)
}

/// Columns of a trace CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTable {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub states: Vec<ComplexVector>,
}

fn parse_field(path: &Path, line: usize, field: &str) -> Result<f64, HarnessError> {
    field
        .trim()
        .parse()
        .map_err(|_| format_err(path, format!("line {line}: '{field}' is not a number")))
}

fn read_numeric_csv<R: Read>(
    r: R,
    path: &Path,
) -> Result<(Vec<String>, Vec<Vec<f64>>), HarnessError> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> =
        rd.headers().map_err(|e| format_err(path, e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| format_err(path, e))?;
        rows.push(rec.iter().map(|f| parse_field(path, k + 2, f)).collect::<Result<_, _>>()?);
    }
    Ok((header, rows))
}

pub fn read_trace_csv(path: &Path) -> Result<TraceTable, HarnessError> {
    let (header, rows) = read_numeric_csv(open(path)?, path)?;
    if header.len() < 4 || (header.len() - 1) % 3 != 0 {
        return Err(format_err(path, "not a trace table"));
    }
    let dim = (header.len() - 1) / 3;
    if header != trace_header(dim) {
        return Err(format_err(path, "unexpected trace columns"));
    }
    let mut table = TraceTable {
        times: Vec::with_capacity(rows.len()),
        populations: vec![Vec::with_capacity(rows.len()); dim],
        states: Vec::with_capacity(rows.len()),
    };
    for row in rows {
        table.times.push(row[0]);
        for (i, p) in table.populations.iter_mut().enumerate() {
            p.push(row[1 + i]);
        }
        let amps: Vec<C64> =
            (0..dim).map(|i| C64::new(row[1 + dim + 2 * i], row[2 + dim + 2 * i])).collect();
        table.states.push(ComplexVector::new(amps));
    }
    Ok(table)
}

pub fn read_trace_json(path: &Path) -> Result<TraceRecord, HarnessError> {
    serde_json::from_reader(open(path)?).map_err(|e| format_err(path, e))
}

const SWEEP_HEADER: [&str; 5] = ["omega0", "gate", "scheme", "fidelity_bare", "fidelity_shortcut"];

/// CSV with columns `omega0, gate, scheme, fidelity_bare, fidelity_shortcut`;
/// failed points leave the fidelity empty.
pub fn sweep_csv<W: Write>(sweep: &SweepResult, w: W) -> Result<(), csv::Error> {
    let mut out = csv_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for r in &sweep.rows {
        out.write_record([
            num(r.omega0),
            r.gate.clone(),
            r.scheme.name().to_string(),
            opt_num(r.fidelity_bare),
            opt_num(r.fidelity_shortcut),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty-printed JSON of a sweep, newline-terminated.
pub fn sweep_json<W: Write>(sweep: &SweepResult, mut w: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, sweep)?;
    writeln!(w)
}

pub fn write_sweep(sweep: &SweepResult, path: &Path, format: Format) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    match format {
        Format::Csv => sweep_csv(sweep, &mut w).map_err(|e| format_err(path, e))?,
        Format::Json => sweep_json(sweep, &mut w).map_err(io_err(path))?,
    }
    finish(w, path)
}

pub fn read_sweep_json(path: &Path) -> Result<SweepResult, HarnessError> {
    serde_json::from_reader(open(path)?).map_err(|e| format_err(path, e))
}

/// Rows of a sweep CSV; the `error` field is not stored there.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>, HarnessError> {
    let mut rd = csv::Reader::from_reader(open(path)?);
    let header = rd.headers().map_err(|e| format_err(path, e))?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(format_err(path, "unexpected sweep columns"));
    }
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| format_err(path, e))?;
        let line = k + 2;
        let opt = |f: &str| -> Result<Option<f64>, HarnessError> {
            if f.trim().is_empty() {
                Ok(None)
            } else {
                parse_field(path, line, f).map(Some)
            }
        };
        let scheme = Scheme::parse(&rec[2])
            .ok_or_else(|| format_err(path, format!("line {line}: unknown scheme '{}'", &rec[2])))?;
        rows.push(SweepRow {
            omega0: parse_field(path, line, &rec[0])?,
            gate: rec[1].to_string(),
            scheme,
            fidelity_bare: opt(&rec[3])?,
            fidelity_shortcut: opt(&rec[4])?,
            error: None,
        });
    }
    Ok(rows)
}

/// CSV with `t`, magnitude and phase per channel, and `d1..d3` for SC2.
pub fn schedule_csv<W: Write>(schedule: &Schedule, w: W) -> Result<(), csv::Error> {
    let mut out = csv_writer(w);
    out.write_record(schedule.column_names())?;
    for (k, t) in schedule.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        for z in &schedule.values[k] {
            row.push(num(z.norm()));
            row.push(num(if z.norm() == 0.0 { 0.0 } else { z.arg() }));
        }
        if schedule.detunings {
            row.extend(schedule.detuning_values[k].iter().map(|d| num(*d)));
        }
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_schedule(
    schedule: &Schedule,
    metadata: &Metadata,
    path: &Path,
    format: Format,
) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    match format {
        Format::Csv => schedule_csv(schedule, &mut w).map_err(|e| format_err(path, e))?,
        Format::Json => {
            let rec = ScheduleRecord { metadata: metadata.clone(), schedule: schedule.clone() };
            serde_json::to_writer_pretty(&mut w, &rec).map_err(|e| format_err(path, e))?;
            writeln!(w).map_err(io_err(path))?;
        }
    }
    finish(w, path)
}

/// Header and numeric rows of a schedule CSV.
pub fn read_schedule_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), HarnessError> {
    read_numeric_csv(open(path)?, path)
}
