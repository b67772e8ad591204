//! Convergence CSVs and the campaign summary JSON.
//!
//! CSV header: `run,algorithm,eval,best_f,f,x1,...,xd`. Floats are written
//! as the shortest decimal that parses back to the same `f64`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{Algorithm, Entry, RunRecord};
use crate::error::{Error, Result};

/// The contents of one convergence CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRun {
    pub run: usize,
    pub algorithm: Algorithm,
    pub entries: Vec<Entry>,
}

impl CsvRun {
    pub fn from_record(run: usize, record: &RunRecord) -> Self {
        Self {
            run,
            algorithm: record.algorithm,
            entries: record.entries.clone(),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.entries.first().map(|e| e.x.len())
    }

    pub fn best_curve(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.best_f).collect()
    }

    pub fn final_best(&self) -> Option<f64> {
        self.entries.last().map(|e| e.best_f)
    }

    pub fn to_csv_bytes(&self, dim: usize) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["run", "algorithm", "eval", "best_f", "f"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend((1..=dim).map(|i| format!("x{i}")));
        w.write_record(&header).map_err(csv_err)?;
        for e in &self.entries {
            if e.x.len() != dim {
                return Err(Error::invalid("entry dimension differs from header"));
            }
            let mut row = vec![
                self.run.to_string(),
                self.algorithm.to_string(),
                e.eval.to_string(),
                e.best_f.to_string(),
                e.f.to_string(),
            ];
            row.extend(e.x.iter().map(|v| v.to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.into_inner()
            .map_err(|e| Error::invalid(format!("csv buffer: {e}")))
    }

    pub fn parse(path: &Path, bytes: &[u8]) -> Result<Self> {
        let fmt = |m: String| Error::format(path, m);
        let mut r = csv::Reader::from_reader(bytes);
        let header = r.headers().map_err(|e| fmt(e.to_string()))?.clone();
        let fixed = ["run", "algorithm", "eval", "best_f", "f"];
        if header.len() < fixed.len() || header.iter().zip(fixed).any(|(h, f)| h != f) {
            return Err(fmt("unexpected header".into()));
        }
        let dim = header.len() - fixed.len();
        for (k, h) in header.iter().skip(fixed.len()).enumerate() {
            if h != format!("x{}", k + 1) {
                return Err(fmt(format!("unexpected column '{h}'")));
            }
        }
        let mut run = None;
        let mut algorithm = None;
        let mut entries = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| fmt(e.to_string()))?;
            let field = |i: usize| rec.get(i).unwrap_or_default();
            let num = |i: usize| -> Result<f64> {
                field(i)
                    .parse::<f64>()
                    .map_err(|_| fmt(format!("row {}: bad number '{}'", line + 1, field(i))))
            };
            let this_run: usize = field(0)
                .parse()
                .map_err(|_| fmt(format!("row {}: bad run index", line + 1)))?;
            let this_algo: Algorithm = field(1).parse()?;
            if *run.get_or_insert(this_run) != this_run
                || *algorithm.get_or_insert(this_algo) != this_algo
            {
                return Err(fmt("file mixes runs or algorithms".into()));
            }
            let eval: usize = field(2)
                .parse()
                .map_err(|_| fmt(format!("row {}: bad eval index", line + 1)))?;
            let x = (0..dim)
                .map(|k| num(fixed.len() + k))
                .collect::<Result<Vec<f64>>>()?;
            entries.push(Entry {
                eval,
                x,
                f: num(4)?,
                best_f: num(3)?,
            });
        }
        match (run, algorithm) {
            (Some(run), Some(algorithm)) => Ok(Self {
                run,
                algorithm,
                entries,
            }),
            _ => Err(fmt("no data rows".into())),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &bytes)
    }

    pub fn write(&self, path: &Path, dim: usize) -> Result<()> {
        write_atomic(path, &self.to_csv_bytes(dim)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("csv: {e}"))
}

/// File name of the CSV for `(algorithm, run)`.
pub fn csv_file_name(algorithm: Algorithm, run: usize) -> String {
    format!("{}_run{:03}.csv", algorithm.as_str(), run)
}

/// Write `bytes` to a temporary sibling and rename it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// All convergence CSVs in `dir`, sorted by file name.
pub fn read_csv_dir(dir: &Path) -> Result<Vec<CsvRun>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "csv")
                && !p
                    .file_name()
                    .is_some_and(|n| n.to_string_lossy().starts_with('.'))
        })
        .collect();
    paths.sort();
    paths.iter().map(|p| CsvRun::read(p)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Error::invalid(format!("json: {e}")))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))
}
