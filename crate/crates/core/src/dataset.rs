//! Single-column numeric datasets: CSV loading with optional rescaling, plus seeded
//! generators shaped like the bundled benchmark workloads.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// The bundled 341-row sample (`data/covid19_sample.csv`).
pub const COVID_SAMPLE_CSV: &str = include_str!("../data/covid19_sample.csv");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub name: String,
    pub values: Vec<u64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values reduced mod `t` so any dataset fits the plaintext space.
    pub fn reduced(&self, t: u64) -> Dataset {
        Dataset { name: self.name.clone(), values: self.values.iter().map(|v| v % t).collect() }
    }
}

/// Multiplicative rescaling `k/d`, applied with floor rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scale {
    pub num: u64,
    pub den: u64,
}

impl Scale {
    pub const IDENTITY: Scale = Scale { num: 1, den: 1 };

    pub fn apply_int(&self, v: u64) -> u64 {
        (v as u128 * self.num as u128 / self.den as u128) as u64
    }

    pub fn apply_f64(&self, v: f64) -> f64 {
        (v * self.num as f64 / self.den as f64).floor()
    }
}

impl Default for Scale {
    fn default() -> Self {
        Scale::IDENTITY
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("scale `{s}` must look like k/d or k"));
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        if num == 0 || den == 0 {
            return Err(bad());
        }
        Ok(Scale { num, den })
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// How values at or above `t` are treated on load.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Overflow {
    Reject,
    ReduceModT,
}

/// Parses a single numeric column. A first row that is not a number is taken as a header.
/// Rows are reported 1-based as they appear in the file.
pub fn parse_csv_column(text: &str, scale: Scale, t: u64, overflow: Overflow) -> Result<Vec<u64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Ingest { row, reason: e.to_string() })?;
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 1 {
            return Err(Error::Ingest { row, reason: format!("expected 1 column, found {}", fields.len()) });
        }
        let raw = fields[0];
        let value = match parse_value(raw, scale) {
            Some(v) => v,
            None if idx == 0 => continue,
            None => {
                return Err(Error::Ingest { row, reason: format!("`{raw}` is not a non-negative number") })
            }
        };
        let value = if value >= t {
            match overflow {
                Overflow::ReduceModT => value % t,
                Overflow::Reject => {
                    return Err(Error::Ingest {
                        row,
                        reason: format!(
                            "value {value} is not below the plaintext modulus {t} (use --reduce-mod-t to wrap)"
                        ),
                    })
                }
            }
        } else {
            value
        };
        out.push(value);
    }
    Ok(out)
}

fn parse_value(raw: &str, scale: Scale) -> Option<u64> {
    if let Ok(v) = raw.parse::<u64>() {
        return Some(scale.apply_int(v));
    }
    let f: f64 = raw.parse().ok()?;
    if !f.is_finite() || f < 0.0 {
        return None;
    }
    let scaled = scale.apply_f64(f);
    (scaled < u64::MAX as f64).then_some(scaled as u64)
}

pub fn load_csv(path: &Path, scale: Scale, t: u64, overflow: Overflow) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Dataset { name, values: parse_csv_column(&text, scale, t, overflow)? })
}

/// The bundled covid-like sample, values in `[0, 100000)`.
pub fn covid_sample() -> Dataset {
    let values = parse_csv_column(COVID_SAMPLE_CSV, Scale::IDENTITY, u64::MAX, Overflow::Reject)
        .expect("bundled sample parses");
    Dataset { name: "covid19".into(), values }
}

/// 341 values in `[0, 100000)` following two smooth waves.
pub fn covid_like(seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let values = (0..341)
        .map(|d| {
            let x = d as f64;
            let wave = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * x / 170.0).cos());
            let second = (-((x - 280.0) / 35.0).powi(2)).exp();
            let v = 4000.0 + 52000.0 * wave + 38000.0 * second + rng.gen_range(-5000.0..5000.0);
            v.clamp(0.0, 99_999.0) as u64
        })
        .collect();
    Dataset { name: "covid19-synthetic".into(), values }
}

/// 34,424 uniform values in `[0, 10000)`.
pub fn hg38_like(seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let values = (0..34_424).map(|_| rng.gen_range(0..10_000)).collect();
    Dataset { name: "hg38-synthetic".into(), values }
}

/// 1,086 values in `[0, 2^31)`, log-uniformly spread like trade volumes.
pub fn bitcoin_like(seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let values = (0..1_086)
        .map(|_| {
            let e: f64 = rng.gen_range(10.0..31.0);
            (e.exp2() as u64).min((1 << 31) - 1)
        })
        .collect();
    Dataset { name: "bitcoin-synthetic".into(), values }
}

/// Looks up a dataset by name: `covid19` (bundled), `hg38`, `bitcoin`, or a CSV path.
pub fn resolve(name: &str, seed: u64, scale: Scale, t: u64, overflow: Overflow) -> Result<Dataset> {
    let apply = |d: Dataset| -> Result<Dataset> {
        let mut values = Vec::with_capacity(d.len());
        for (i, &v) in d.values.iter().enumerate() {
            let v = scale.apply_int(v);
            let v = match (v >= t, overflow) {
                (false, _) => v,
                (true, Overflow::ReduceModT) => v % t,
                (true, Overflow::Reject) => {
                    return Err(Error::Ingest {
                        row: i + 1,
                        reason: format!("value {v} is not below the plaintext modulus {t}"),
                    })
                }
            };
            values.push(v);
        }
        Ok(Dataset { name: d.name, values })
    };
    match name {
        "covid19" => apply(covid_sample()),
        "hg38" => apply(hg38_like(seed)),
        "bitcoin" => apply(bitcoin_like(seed)),
        path => load_csv(Path::new(path), scale, t, overflow),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sample_shape() {
        let d = covid_sample();
        assert_eq!(d.len(), 341);
        assert!(d.values.iter().all(|&v| v < 100_000));
    }

    #[test]
    fn generators_match_their_ranges() {
        let h = hg38_like(1);
        assert_eq!(h.len(), 34_424);
        assert!(h.values.iter().all(|&v| v < 10_000));
        let b = bitcoin_like(1);
        assert_eq!(b.len(), 1_086);
        assert!(b.values.iter().all(|&v| v < 1 << 31));
        assert_eq!(covid_like(3), covid_like(3));
        assert_eq!(covid_like(3).len(), 341);
    }

    #[test]
    fn csv_parsing() {
        let t = 65537;
        let text = "value\n1\n 2 \n\n3.9\n";
        assert_eq!(parse_csv_column(text, Scale::IDENTITY, t, Overflow::Reject).unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_csv_column("", Scale::IDENTITY, t, Overflow::Reject).unwrap(), Vec::<u64>::new());
        let err = parse_csv_column("1\n70000\n", Scale::IDENTITY, t, Overflow::Reject).unwrap_err();
        assert!(matches!(err, Error::Ingest { row: 2, .. }));
        assert_eq!(
            parse_csv_column("1\n70000\n", Scale::IDENTITY, t, Overflow::ReduceModT).unwrap(),
            vec![1, 70000 - t]
        );
        assert!(matches!(parse_csv_column("1,2\n", Scale::IDENTITY, t, Overflow::Reject), Err(Error::Ingest { row: 1, .. })));
        assert!(matches!(parse_csv_column("1\nabc\n", Scale::IDENTITY, t, Overflow::Reject), Err(Error::Ingest { row: 2, .. })));
        let s: Scale = "1/24".parse().unwrap();
        assert_eq!(parse_csv_column("48\n50\n", s, t, Overflow::Reject).unwrap(), vec![2, 2]);
    }

    #[test]
    fn scale_parsing() {
        assert_eq!("1/24".parse::<Scale>().unwrap(), Scale { num: 1, den: 24 });
        assert_eq!("3".parse::<Scale>().unwrap(), Scale { num: 3, den: 1 });
        assert!("0/1".parse::<Scale>().is_err());
        assert!("x".parse::<Scale>().is_err());
    }

    #[test]
    fn bitcoin_needs_reduction_at_default_modulus() {
        let s: Scale = "1/24".parse().unwrap();
        assert!(resolve("bitcoin", 1, s, 65537, Overflow::Reject).is_err());
        assert!(resolve("bitcoin", 1, s, 65537, Overflow::ReduceModT).is_ok());
    }
}
