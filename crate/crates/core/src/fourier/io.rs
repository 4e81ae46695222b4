//! Text serialisation: CSV tables with an optional `# config_sha256=` line,
//! and the JSON field envelope.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexField;
use crate::error::{Error, Result};

pub const CONVENTION: &str = "normalized-1/2pi";
const HASH_PREFIX: &str = "# config_sha256=";

/// Shortest round-trip text for a float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

/// Renders a CSV table. When `hash` is given it is written as a leading
/// comment line.
pub fn csv_table(hash: Option<&str>, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = Vec::new();
    if let Some(h) = hash {
        out.extend_from_slice(format!("{HASH_PREFIX}{h}\n").as_bytes());
    }
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
        w.write_record(header).expect("writing to memory");
        for r in rows {
            w.write_record(r).expect("writing to memory");
        }
        w.flush().expect("writing to memory");
    }
    String::from_utf8(out).expect("CSV output is UTF-8")
}

/// Parses a CSV table, skipping comment lines; returns the header and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header =
        r.headers().map_err(|e| Error::Config(format!("csv header: {e}")))?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Config(format!("csv row: {e}")))?;
        rows.push(rec.iter().map(|s| s.trim().to_owned()).collect());
    }
    Ok((header, rows))
}

/// Config hash recorded in a CSV comment line, if any.
pub fn csv_hash(text: &str) -> Option<&str> {
    text.lines().next().and_then(|l| l.strip_prefix(HASH_PREFIX))
}

pub fn field_to_csv(f: &ComplexField, hash: Option<&str>) -> String {
    let rows: Vec<Vec<String>> = f.modes().map(|(k, c)| vec![k.to_string(), fmt_f64(c.re), fmt_f64(c.im)]).collect();
    csv_table(hash, &["n", "re", "im"], &rows)
}

/// Reads `(n, re, im)` rows; absent modes are zero and the bandwidth is the
/// largest `|n|` present.
pub fn field_from_csv(text: &str) -> Result<ComplexField> {
    let (header, rows) = parse_csv(text)?;
    if header != ["n", "re", "im"] {
        return Err(Error::Config(format!("expected columns n,re,im, got {header:?}")));
    }
    let mut entries = Vec::with_capacity(rows.len());
    for r in &rows {
        let bad = || Error::Config(format!("bad field row {r:?}"));
        if r.len() != 3 {
            return Err(bad());
        }
        let n: i64 = r[0].parse().map_err(|_| bad())?;
        let re: f64 = r[1].parse().map_err(|_| bad())?;
        let im: f64 = r[2].parse().map_err(|_| bad())?;
        entries.push((n, Complex64::new(re, im)));
    }
    let bw = entries.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
    let mut f = ComplexField::zeros(bw);
    for (n, c) in entries {
        f.set(n, c);
    }
    Ok(f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldEnvelope {
    pub bandwidth: usize,
    pub convention: String,
    /// `[re, im]` pairs for modes `-bandwidth..=bandwidth`.
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&ComplexField> for FieldEnvelope {
    fn from(f: &ComplexField) -> Self {
        Self {
            bandwidth: f.bandwidth(),
            convention: CONVENTION.to_owned(),
            coeffs: f.coeffs().iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<FieldEnvelope> for ComplexField {
    type Error = Error;
    fn try_from(e: FieldEnvelope) -> Result<Self> {
        if e.convention != CONVENTION {
            return Err(Error::Config(format!("unknown Fourier convention {:?}", e.convention)));
        }
        ComplexField::from_coeffs(e.bandwidth, e.coeffs.iter().map(|[a, b]| Complex64::new(*a, *b)).collect())
    }
}

pub fn field_to_json(f: &ComplexField) -> String {
    serde_json::to_string_pretty(&FieldEnvelope::from(f)).expect("envelope serialises")
}

pub fn field_from_json(text: &str) -> Result<ComplexField> {
    let env: FieldEnvelope = serde_json::from_str(text)?;
    env.try_into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComplexField {
        ComplexField::from_fn(3, |k| Complex64::new(k as f64 * 0.1, 1.0 / (1.0 + k as f64 * k as f64)))
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let f = sample();
        let text = field_to_csv(&f, Some("abc"));
        assert!(text.starts_with("# config_sha256=abc\nn,re,im\n"));
        assert_eq!(csv_hash(&text), Some("abc"));
        assert_eq!(field_from_csv(&text).unwrap(), f);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let f = sample();
        let text = field_to_json(&f);
        assert!(text.contains("\"convention\": \"normalized-1/2pi\""));
        assert_eq!(field_from_json(&text).unwrap(), f);
    }

    #[test]
    fn wrong_convention_is_rejected() {
        let text = field_to_json(&sample()).replace("normalized-1/2pi", "unitary");
        assert!(field_from_json(&text).is_err());
    }
}
