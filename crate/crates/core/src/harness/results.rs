use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 6] = ["swept_var", "value", "metric", "std_err", "n_trials", "flags"];
pub const CSV_FILE: &str = "result.csv";
pub const JSON_FILE: &str = "config.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Ber,
    Capacity,
    Energy,
}

/// One row of a result table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub swept_var: f64,
    pub value: f64,
    pub metric: String,
    pub std_err: f64,
    pub n_trials: u64,
    /// `;`-separated annotations such as `low-confidence` or `loop_m=100`.
    pub flags: String,
}

/// Everything a run leaves behind except the table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMeta {
    pub schema_version: u32,
    pub kind: RunKind,
    pub swept: String,
    pub version: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub config: SimConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub meta: RunMeta,
    pub records: Vec<Record>,
}

impl RunResult {
    pub fn new(kind: RunKind, swept: &str, config: &SimConfig, records: Vec<Record>) -> Self {
        Self {
            meta: RunMeta {
                schema_version: SCHEMA_VERSION,
                kind,
                swept: swept.to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: config.seed,
                wall_time_s: 0.0,
                config: config.clone(),
            },
            records,
        }
    }

    /// Rows whose metric equals `metric`, in table order.
    pub fn series<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.metric == metric)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.into_inner()
            .map_err(|e| Error::Schema(format!("CSV buffer: {e}")))
    }
}

/// Writes `<dir>/result.csv` and `<dir>/config.json`, creating `dir` if needed.
pub fn write_results(result: &RunResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(CSV_FILE);
    std::fs::write(&csv_path, result.to_csv()?).map_err(|e| Error::io(&csv_path, e))?;
    let json_path = dir.join(JSON_FILE);
    let mut json = serde_json::to_string_pretty(&result.meta)?;
    json.push('\n');
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
    Ok(())
}

pub fn read_results(dir: &Path) -> Result<RunResult> {
    let json_path = dir.join(JSON_FILE);
    let text = std::fs::read_to_string(&json_path).map_err(|e| Error::io(&json_path, e))?;
    let raw: serde_json::Value = serde_json::from_str(&text)?;
    let found = raw
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Schema("missing schema_version".into()))?;
    if found != SCHEMA_VERSION as u64 {
        return Err(Error::SchemaVersion {
            expected: SCHEMA_VERSION,
            found: found as u32,
        });
    }
    let meta: RunMeta = serde_json::from_value(raw)?;

    let csv_path = dir.join(CSV_FILE);
    let bytes = std::fs::read(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Schema(format!(
            "unexpected CSV header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let records = rdr.deserialize().collect::<std::result::Result<Vec<Record>, _>>()?;
    Ok(RunResult { meta, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunResult {
        RunResult::new(
            RunKind::Ber,
            "loop_m",
            &SimConfig::default(),
            vec![
                Record {
                    swept_var: 100.0,
                    value: 0.1 + 0.2,
                    metric: "ber/sosd1".into(),
                    std_err: 1e-7,
                    n_trials: 32,
                    flags: "errors=3;low-confidence".into(),
                },
                Record {
                    swept_var: 200.0,
                    value: 0.0,
                    metric: "ber/sosd2".into(),
                    std_err: 0.0,
                    n_trials: 64,
                    flags: String::new(),
                },
            ],
        )
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        write_results(&r, dir.path()).unwrap();
        assert_eq!(read_results(dir.path()).unwrap(), r);
        let text = std::fs::read_to_string(dir.path().join(CSV_FILE)).unwrap();
        assert!(text.starts_with("swept_var,value,metric,std_err,n_trials,flags\n"));
    }

    #[test]
    fn schema_version_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = sample();
        r.meta.schema_version = 9;
        write_results(&r, dir.path()).unwrap();
        assert!(matches!(
            read_results(dir.path()),
            Err(Error::SchemaVersion { expected: 1, found: 9 })
        ));
    }
}
