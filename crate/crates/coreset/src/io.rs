//! CSV and JSON formats.
//!
//! * Points CSV: one point per row, comma separated, optional header line
//!   (detected when the first row does not parse as numbers).
//! * Weighted CSV: the same with the weight as the last column, plus a
//!   sidecar `<file>.meta.json` holding `{"origin_n": n}`.
//! * JSON documents for divergence specs, models, fit reports and
//!   sensitivity tables.
//!
//! Floats are written in shortest round-trip form, so reloading a file
//! reproduces the values bit for bit.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use coreset_core::{
    DivergenceKind, DivergenceSpec, FitReport, HardModel, Matrix, MixtureTruth, PointSet,
    SensitivityTable, SoftModel, WeightedPointSet,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parsed numeric rows plus the line number of each.
fn parse_rows(path: &Path, reader: impl Read) -> Result<(Vec<Vec<f64>>, Vec<u64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut lines = Vec::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => {
                if let Some(width) = rows.first().map(Vec::len) {
                    if row.len() != width {
                        return Err(Error::Parse {
                            path: path.to_path_buf(),
                            line,
                            message: format!("expected {width} columns, found {}", row.len()),
                        });
                    }
                }
                if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        message: format!("non-finite value {v}"),
                    });
                }
                rows.push(row);
                lines.push(line);
            }
            Err(_) if first => {}
            Err(e) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("non-numeric cell: {e}"),
                })
            }
        }
        first = false;
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok((rows, lines))
}

/// Reads a points CSV from any reader; `path` is used in error messages.
pub fn read_points(path: &Path, reader: impl Read) -> Result<PointSet> {
    let (rows, _) = parse_rows(path, reader)?;
    Ok(PointSet::from_rows(&rows)?)
}

pub fn load_points(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_points(path, f)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn write_rows<'a>(
    path: &Path,
    rows: impl Iterator<Item = (&'a [f64], Option<f64>)>,
) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(f));
    let mut record: Vec<String> = Vec::new();
    for (row, weight) in rows {
        record.clear();
        record.extend(row.iter().map(|v| fmt_f64(*v)));
        if let Some(wt) = weight {
            record.push(fmt_f64(wt));
        }
        w.write_record(&record).map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn save_points(ps: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    write_rows(path.as_ref(), ps.rows().map(|r| (r, None)))
}

/// Sidecar path for a weighted CSV: `<file>.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    origin_n: usize,
}

pub fn save_weighted(ws: &WeightedPointSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_rows(
        path,
        ws.points().rows().zip(ws.weights()).map(|(r, w)| (r, Some(*w))),
    )?;
    write_json(
        &Sidecar {
            origin_n: ws.origin_n(),
        },
        sidecar_path(path),
    )
}

pub fn load_weighted(path: impl AsRef<Path>) -> Result<WeightedPointSet> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let (rows, lines) = parse_rows(path, f)?;
    let width = rows[0].len();
    if width < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: lines[0],
            message: "weighted rows need at least one coordinate and a weight".into(),
        });
    }
    let mut data = Vec::with_capacity(rows.len() * (width - 1));
    let mut weights = Vec::with_capacity(rows.len());
    for (row, line) in rows.iter().zip(&lines) {
        let w = row[width - 1];
        if !(w > 0.0) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                message: format!("weight must be positive, got {w}"),
            });
        }
        data.extend_from_slice(&row[..width - 1]);
        weights.push(w);
    }
    let sidecar = sidecar_path(path);
    let origin_n = if sidecar.exists() {
        read_json::<Sidecar>(&sidecar)?.origin_n
    } else {
        log::warn!(
            "{}: sidecar {} missing; origin_n defaults to {}",
            path.display(),
            sidecar.display(),
            weights.len()
        );
        weights.len()
    };
    let points = PointSet::new(width - 1, data)?;
    Ok(WeightedPointSet::new(points, weights, origin_n)?)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(f)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Serialized form of a divergence spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecJson {
    pub kind: String,
    pub dim: usize,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(rename = "A", default)]
    pub a: Option<Vec<Vec<f64>>>,
}

impl SpecJson {
    pub fn to_spec(&self) -> Result<DivergenceSpec> {
        let kind = DivergenceKind::from_name(&self.kind)
            .ok_or_else(|| {
            coreset_core::Error::InvalidSpec(format!("unknown divergence kind {:?}", self.kind))
        })?;
        let matrix = self.a.as_deref().map(Matrix::from_rows).transpose()?;
        Ok(DivergenceSpec::new(
            kind, self.dim, self.lambda, self.nu, self.alpha, matrix,
        )?)
    }

    pub fn from_spec(spec: &DivergenceSpec) -> Self {
        let (lambda, nu) = match spec.domain() {
            coreset_core::Domain::Box { low, high } => (Some(low), Some(high)),
            coreset_core::Domain::Unbounded => (None, None),
        };
        SpecJson {
            kind: spec.kind().name().to_owned(),
            dim: spec.dim(),
            lambda,
            nu,
            alpha: spec.alpha(),
            a: spec.matrix().map(Matrix::to_rows),
        }
    }
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<DivergenceSpec> {
    read_json::<SpecJson>(path)?.to_spec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardModelJson {
    pub k: usize,
    pub centers: Vec<Vec<f64>>,
}

impl HardModelJson {
    pub fn from_model(m: &HardModel) -> Self {
        Self {
            k: m.k(),
            centers: m.centers().rows().map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn to_model(&self) -> Result<HardModel> {
        check_k(self.k, self.centers.len())?;
        Ok(HardModel::new(PointSet::from_rows(&self.centers)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftModelJson {
    pub k: usize,
    pub weights: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
}

impl SoftModelJson {
    pub fn from_model(m: &SoftModel) -> Self {
        Self {
            k: m.k(),
            weights: m.weights(),
            centers: m.centers().rows().map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn to_model(&self) -> Result<SoftModel> {
        check_k(self.k, self.centers.len())?;
        Ok(SoftModel::new(&self.weights, PointSet::from_rows(&self.centers)?)?)
    }
}

fn check_k(k: usize, rows: usize) -> Result<()> {
    if k != rows {
        return Err(Error::Data(format!("model declares k = {k} but has {rows} centers")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReportJson {
    pub iterations: usize,
    pub cost_trace: Vec<f64>,
    pub converged: bool,
    pub reseed_events: usize,
    pub reseed_steps: Vec<usize>,
}

impl From<&FitReport> for FitReportJson {
    fn from(r: &FitReport) -> Self {
        Self {
            iterations: r.iterations,
            cost_trace: r.cost_trace.clone(),
            converged: r.converged,
            reseed_events: r.reseed_events,
            reseed_steps: r.reseed_steps.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityJson {
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub alpha: f64,
    pub c_phi: f64,
    pub zero_cost: bool,
}

impl From<&SensitivityTable> for SensitivityJson {
    fn from(t: &SensitivityTable) -> Self {
        Self {
            s: t.s.clone(),
            p: t.p.clone(),
            alpha: t.alpha,
            c_phi: t.c_phi,
            zero_cost: t.zero_cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthJson {
    pub component_weights: Vec<f64>,
    pub component_params: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
}

impl From<&MixtureTruth> for TruthJson {
    fn from(t: &MixtureTruth) -> Self {
        Self {
            component_weights: t.component_weights.clone(),
            component_params: t.component_params.rows().map(<[f64]>::to_vec).collect(),
            assignment: t.assignment.clone(),
        }
    }
}
