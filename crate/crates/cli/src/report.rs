use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Inconclusive,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Inconclusive => 2,
            Status::Error => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool_version: &'static str,
    pub seed: u64,
    pub precision: i64,
    pub n_max: usize,
    pub ramification_cap: i64,
    pub root_iterations: usize,
    pub degree_budget: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorInfo {
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub source: String,
    /// Canonical text of the parsed family, absent when parsing failed.
    pub family: Option<String>,
    pub degree: Option<usize>,
    pub metadata: Metadata,
    pub status: Status,
    pub payload: Value,
    pub warnings: Vec<String>,
    pub error: Option<ErrorInfo>,
}

/// Writes `text` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, text: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    {
        let mut f = fs::File::create(tmp)?;
        f.write_all(text)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}
