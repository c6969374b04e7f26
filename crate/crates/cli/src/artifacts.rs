//! Experiment context: typed parameter access and atomic artifact writes.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::failure::Failure;

pub struct Ctx {
    pub module: String,
    pub experiment: String,
    pub seed: u64,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub params: BTreeMap<String, String>,
    pub artifacts: Vec<PathBuf>,
}

impl Ctx {
    fn raw(&self, key: &str) -> &str {
        self.params.get(key).map(String::as_str).expect("parameters are filled from the schema")
    }

    pub fn f64(&self, key: &str) -> Result<f64, Failure> {
        let v = self.raw(key);
        v.parse().map_err(|_| Failure::Validation(format!("parameter `{key}` = `{v}` is not a number")))
    }

    pub fn usize(&self, key: &str) -> Result<usize, Failure> {
        let v = self.raw(key);
        v.parse().map_err(|_| Failure::Validation(format!("parameter `{key}` = `{v}` is not a nonnegative integer")))
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>, Failure> {
        let v = self.raw(key);
        v.split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::Validation(format!("parameter `{key}` = `{v}` is not a comma-separated integer list")))
    }

    pub fn choice<'a>(&self, key: &str, options: &[&'a str]) -> Result<&'a str, Failure> {
        let v = self.raw(key);
        options
            .iter()
            .find(|o| **o == v)
            .copied()
            .ok_or_else(|| Failure::Validation(format!("parameter `{key}` = `{v}` is not one of {options:?}")))
    }

    pub fn header(&self) -> String {
        format!("bolab {} {} seed={}", self.module, self.experiment, self.seed)
    }

    fn path(&self, name: &str, ext: &str) -> PathBuf {
        self.out_dir.join(format!("{}-{}-{}.{}", self.module, self.experiment, name, ext))
    }

    /// Writes a CSV whose first line is a `#` comment naming the run.
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), Failure> {
        let mut buf = format!("# {}\n", self.header()).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let io = |e: csv::Error| Failure::Io(e.to_string());
            w.write_record(columns).map_err(io)?;
            for r in rows {
                w.write_record(r.iter().map(|x| x.to_string())).map_err(io)?;
            }
            w.flush()?;
        }
        let path = self.path(name, "csv");
        write_atomic(&path, &buf)?;
        self.artifacts.push(path);
        Ok(())
    }

    /// Writes `{"comment": <header>, "result": value}`. JSON has no comment
    /// syntax, so the header is the first member.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let doc = serde_json::json!({ "comment": self.header(), "result": value });
        let path = self.path(name, "json");
        write_atomic(&path, &to_pretty(&doc)?)?;
        self.artifacts.push(path);
        Ok(())
    }
}

pub fn to_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

/// Writes through a temporary file in the same directory and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Failure::Io(format!("cannot create a file in {}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Failure::Io(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}
