//! Text formats: tabulated profiles, task CSVs, and the metadata-prefixed result CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mmdf_core::nystrom::RegressionTask;
use mmdf_core::PointSet;

use crate::error::{CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn input_err(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Two columns `t, phi(t)` separated by commas or whitespace; `#` comments and a
/// non-numeric first line are skipped.
pub fn read_profile_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = read(path)?;
    let (mut t, mut v) = (Vec::new(), Vec::new());
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = split_fields(line);
        let parsed: Option<Vec<f64>> = fields.iter().map(|f| f.parse().ok()).collect();
        match parsed {
            Some(p) if p.len() == 2 => {
                t.push(p[0]);
                v.push(p[1]);
                seen_data = true;
            }
            None if !seen_data && t.is_empty() => continue,
            _ => return Err(input_err(path, i + 1, format!("expected two numbers, found `{line}`"))),
        }
    }
    if t.is_empty() {
        return Err(input_err(path, 0, "no data rows"));
    }
    Ok((t, v))
}

/// Header row, then `d` feature columns and the target in the last column.
pub fn read_task(path: &Path) -> Result<RegressionTask> {
    let text = read(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (_, header) = lines.next().ok_or_else(|| input_err(path, 0, "empty task file"))?;
    let cols = header.split(',').count();
    if cols < 2 {
        return Err(input_err(path, 1, "need at least one feature column and a target column"));
    }
    if header.split(',').all(|f| f.trim().parse::<f64>().is_ok()) {
        return Err(input_err(path, 1, "header row required"));
    }
    let dim = cols - 1;
    let (mut coords, mut targets) = (Vec::new(), Vec::new());
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols {
            return Err(input_err(path, i + 1, format!("expected {cols} columns, found {}", fields.len())));
        }
        for (j, f) in fields.iter().enumerate() {
            let v: f64 = f
                .parse()
                .map_err(|_| input_err(path, i + 1, format!("not a number: `{f}`")))?;
            if j < dim {
                if !(0.0..=1.0).contains(&v) {
                    return Err(input_err(path, i + 1, format!("feature {v} outside [0, 1]")));
                }
                coords.push(v);
            } else {
                targets.push(v);
            }
        }
    }
    if targets.is_empty() {
        return Err(input_err(path, 0, "no data rows"));
    }
    let inputs = PointSet::new(dim, coords)?;
    Ok(RegressionTask::new(inputs, targets)?)
}

/// A result table preceded by `#` metadata lines.
#[derive(Debug, Clone)]
pub struct Table {
    meta: Vec<(String, String)>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(command: &str, seed: Option<u64>, config_hash: &str, header: &[&str]) -> Self {
        let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        Self {
            meta: vec![
                ("command".into(), command.into()),
                ("seed".into(), seed),
                ("config_hash".into(), config_hash.into()),
                ("version".into(), VERSION.into()),
            ],
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(name);
        std::fs::write(&path, self.render()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Shortest round-trip formatting, exponential for very small or large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// A result CSV read back: metadata, header and string cells.
#[derive(Debug, Clone)]
pub struct ParsedCsv {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub fn read_result_csv(path: &Path) -> Result<ParsedCsv> {
    let text = read(path)?;
    let mut meta = Vec::new();
    let mut header = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(m) = line.strip_prefix('#') {
            if let Some((k, v)) = m.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        match &header {
            None => header = Some(fields),
            Some(h) if h.len() != fields.len() => {
                return Err(input_err(path, i + 1, format!("expected {} columns, found {}", h.len(), fields.len())))
            }
            Some(_) => rows.push(fields),
        }
    }
    let header = header.ok_or_else(|| input_err(path, 0, "no header row"))?;
    Ok(ParsedCsv { meta, header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let mut t = Table::new("demo", Some(7), "abc", &["a", "b"]);
        t.meta("note", "x");
        t.push(vec![num(0.1), opt_num(None)]);
        assert_eq!(num(1e-8), "1e-8");
        assert_eq!(num(-1.25e-17), "-1.25e-17");
        assert_eq!(num(0.001), "0.001");
        assert_eq!(
            t.render(),
            "# command=demo\n# seed=7\n# config_hash=abc\n# version=0.1.0\n# note=x\na,b\n0.1,\n"
        );
    }

    #[test]
    fn numbers_round_trip() {
        for v in [1e-300, 0.1 + 0.2, -3.25, 12345.678] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn profile_table_accepts_header_and_separators() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.txt");
        std::fs::write(&p, "t phi\n# c\n0, 1\n0.5 0.5\n1\t0.25\n").unwrap();
        let (t, v) = read_profile_table(&p).unwrap();
        assert_eq!(t, vec![0.0, 0.5, 1.0]);
        assert_eq!(v, vec![1.0, 0.5, 0.25]);
        std::fs::write(&p, "0 1\n0.5\n").unwrap();
        assert!(read_profile_table(&p).unwrap_err().to_string().contains(":2"));
    }

    #[test]
    fn task_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, "x1,x2,y\n0.1,0.2,3\n0.5,0.5,-1\n").unwrap();
        let t = read_task(&p).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.inputs.dim(), 2);
        assert_eq!(t.targets, vec![3.0, -1.0]);
        std::fs::write(&p, "0.1,3\n").unwrap();
        assert!(read_task(&p).is_err());
        std::fs::write(&p, "x,y\n0.1,3,4\n").unwrap();
        assert!(read_task(&p).unwrap_err().to_string().contains(":2"));
    }
}
