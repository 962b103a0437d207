use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use crate::error::{config_err, CliError, CliResult};

/// Optional JSON config file carrying defaults for the common flags;
/// explicit flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub root: Option<PathBuf>,
    pub split: Option<PathBuf>,
    pub model: Option<String>,
    pub params: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> CliResult<ConfigFile> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let bytes = std::fs::read(p)
                    .map_err(|e| config_err(format!("reading config {}: {e}", p.display())))?;
                serde_json::from_slice(&bytes)
                    .map_err(|e| config_err(format!("parsing config {}: {e}", p.display())))
            }
        }
    }
}

pub fn require<T>(flag: Option<T>, fallback: Option<T>, name: &str) -> CliResult<T> {
    flag.or(fallback)
        .ok_or_else(|| config_err(format!("missing required {name}")))
}

pub fn require_dir(path: &Path, what: &str) -> CliResult<()> {
    if !path.is_dir() {
        return Err(config_err(format!(
            "{what} {} is not a directory",
            path.display()
        )));
    }
    Ok(())
}

pub fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if !path.is_file() {
        return Err(config_err(format!(
            "{what} {} does not exist",
            path.display()
        )));
    }
    Ok(())
}

pub fn parse_date(s: &str) -> Result<NaiveDate, String> {
    s.parse()
        .map_err(|e| format!("invalid date {s:?} (expected YYYY-MM-DD): {e}"))
}

/// Year selection: a single year, an inclusive `A:B` range, or a comma
/// list.
#[derive(Clone, Debug)]
pub struct Years(pub Vec<i32>);

pub fn parse_years(s: &str) -> Result<Years, String> {
    let parse_one = |p: &str| {
        p.trim()
            .parse::<i32>()
            .map_err(|e| format!("bad year {p:?}: {e}"))
    };
    if let Some((a, b)) = s.split_once(':') {
        let (a, b) = (parse_one(a)?, parse_one(b)?);
        if b < a {
            return Err(format!("year range {s:?} is reversed"));
        }
        Ok(Years((a..=b).collect()))
    } else {
        Ok(Years(
            s.split(',').map(parse_one).collect::<Result<_, _>>()?,
        ))
    }
}

/// FNV-1a over a file's bytes, used as the dataset/provenance hash.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a:{hash:016x}")
}

pub fn hash_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Data(format!("reading {}: {e}", path.display())))?;
    Ok(fnv1a_hex(&bytes))
}

pub fn dataset_hash(root: &Path) -> CliResult<String> {
    hash_file(&root.join(meltkit_core::series::MANIFEST_FILE))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Data(format!("serializing {}: {e}", path.display())))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Data(format!("writing {}: {e}", path.display())))?;
    Ok(())
}
