use std::fs;
use std::path::PathBuf;

use super::{ConstantsError, ConstantsTable, Tolerances};

pub const CACHE_ENV: &str = "NNLS_CONSTANTS_DIR";
pub const CACHE_FILE: &str = "constants.json";

/// Directory named by `NNLS_CONSTANTS_DIR`, if set.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

fn lookup(tables: &[ConstantsTable<f64>], n: usize, exps: &[f64], tol: &Tolerances<f64>) -> Option<ConstantsTable<f64>> {
    tables.iter().find_map(|t| {
        if t.n != n || t.tolerances != *tol {
            return None;
        }
        let gn = exps
            .iter()
            .map(|s| t.gn.iter().find(|e| e.s.to_bits() == s.to_bits()).cloned())
            .collect::<Option<Vec<_>>>()?;
        Some(ConstantsTable { gn, ..t.clone() })
    })
}

/// Table keyed by (N, exponents, tolerances), read from and written to `constants.json` in the
/// cache directory when one is configured; computed directly otherwise.
pub fn cached_table(n: usize, exps: &[f64], tol: &Tolerances<f64>) -> Result<ConstantsTable<f64>, ConstantsError> {
    let Some(dir) = cache_dir() else {
        return ConstantsTable::compute(n, exps, tol);
    };
    let path = dir.join(CACHE_FILE);
    let mut tables: Vec<ConstantsTable<f64>> = match fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text).map_err(|e| ConstantsError::Cache(format!("{}: {e}", path.display())))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(ConstantsError::Cache(format!("{}: {e}", path.display()))),
    };
    if let Some(t) = lookup(&tables, n, exps, tol) {
        return Ok(t);
    }
    let table = ConstantsTable::compute(n, exps, tol)?;
    tables.push(table.clone());
    fs::create_dir_all(&dir).map_err(|e| ConstantsError::Cache(e.to_string()))?;
    let text = serde_json::to_string_pretty(&tables).map_err(|e| ConstantsError::Cache(e.to_string()))?;
    fs::write(&path, text).map_err(|e| ConstantsError::Cache(format!("{}: {e}", path.display())))?;
    Ok(table)
}
