use std::fmt::Display;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// One benchmark result: identifying fields followed by ordered metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub suite: String,
    pub dataset: String,
    pub tuples: usize,
    pub profile: String,
    /// Parallel runs are reported but never used for comparisons.
    pub parallel: bool,
    fields: Vec<(String, String)>,
}

impl BenchReport {
    pub fn new(suite: &str, dataset: &str, tuples: usize, profile: &str) -> Self {
        BenchReport {
            suite: suite.into(),
            dataset: dataset.into(),
            tuples,
            profile: profile.into(),
            parallel: false,
            fields: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        let value = value.to_string();
        match self.fields.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.fields.push((key.into(), value)),
        }
    }

    /// Formats a float metric with fixed precision.
    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, format!("{value:.4}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    /// All records: identity fields first, then metrics in insertion order.
    pub fn records(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("suite".to_string(), self.suite.clone()),
            ("dataset".to_string(), self.dataset.clone()),
            ("tuples".to_string(), self.tuples.to_string()),
            ("profile".to_string(), self.profile.clone()),
            ("parallel".to_string(), self.parallel.to_string()),
        ];
        out.extend(self.fields.iter().cloned());
        out
    }

    /// One `key=value` line per record.
    pub fn to_lines(&self) -> String {
        self.records().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Aligned two-column table for terminals.
    pub fn to_table(&self) -> String {
        let records = self.records();
        let width = records.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        records.into_iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
    }
}

/// Writes reports as CSV; the header is the union of keys in first-seen order.
pub fn write_csv(reports: &[BenchReport], path: &Path) -> Result<()> {
    let mut keys: Vec<String> = Vec::new();
    for r in reports {
        for (k, _) in r.records() {
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&keys).map_err(csv_err)?;
    for r in reports {
        let rec = r.records();
        let row: Vec<&str> = keys
            .iter()
            .map(|k| rec.iter().find(|(rk, _)| rk == k).map(|(_, v)| v.as_str()).unwrap_or(""))
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::error::Error::Format(format!("{other:?}")),
    }
}

/// Flushes `lines` to stdout in one write.
pub fn print_lines(lines: &str) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(lines.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_and_csv() {
        let mut r = BenchReport::new("encrypt", "covid19", 341, "desk-16");
        r.push("group_size", 7);
        r.push_f64("speedup", 2.5);
        r.push("group_size", 8);
        let lines = r.to_lines();
        assert!(lines.starts_with("suite=encrypt\n"));
        assert!(lines.contains("group_size=8\n"));
        assert!(lines.contains("speedup=2.5000\n"));
        assert_eq!(r.get_f64("speedup"), Some(2.5));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut r2 = r.clone();
        r2.push("extra", "x");
        write_csv(&[r, r2], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "suite,dataset,tuples,profile,parallel,group_size,speedup,extra");
        assert!(lines.next().unwrap().ends_with(",8,2.5000,"));
    }
}
