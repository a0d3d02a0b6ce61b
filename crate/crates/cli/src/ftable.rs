//! Two-column weight tables.
//!
//! Each non-comment line holds `n f(n)` separated by whitespace or a comma.
//! `n` must run 1, 2, 3, ... without gaps. Past the last row, `f` keeps the
//! last listed value. Text after `#` is ignored.

use std::path::Path;

use gcs_core::ladder::{LadderSpec, Weight, ROOT_EPS};

use crate::error::{CliError, CliResult};

pub fn parse_table(text: &str, origin: &str) -> CliResult<Vec<f64>> {
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let err = |msg: String| CliError::Validation(format!("{origin}:{}: {msg}", lineno + 1));
        if fields.len() != 2 {
            return Err(err(format!("expected two columns, found {}", fields.len())));
        }
        let n: usize = fields[0].parse().map_err(|_| err(format!("bad index '{}'", fields[0])))?;
        let f: f64 = fields[1].parse().map_err(|_| err(format!("bad value '{}'", fields[1])))?;
        if n != values.len() + 1 {
            return Err(err(format!("expected n = {}, found {n}", values.len() + 1)));
        }
        if !f.is_finite() {
            return Err(err(format!("f({n}) is not finite")));
        }
        values.push(f);
    }
    match values.last() {
        None => Err(CliError::Validation(format!("{origin}: table has no rows"))),
        Some(v) if v.abs() < ROOT_EPS => Err(CliError::Validation(format!(
            "{origin}: last value is zero, which would repeat as infinitely many roots"
        ))),
        Some(_) => Ok(values),
    }
}

pub fn read_table(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_table(&text, &path.display().to_string())
}

/// Oscillator ladder with the tabulated weight; roots are the zero entries.
pub fn ladder_from_table(values: Vec<f64>) -> CliResult<LadderSpec> {
    let roots = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() < ROOT_EPS)
        .map(|(i, _)| i + 1)
        .collect();
    Ok(LadderSpec::oscillator_with(Weight::Table(values), roots)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_extends() {
        let t = parse_table("# weights\n1 0.5\n2, 0.0 # root\n\n3 2\n", "t").unwrap();
        assert_eq!(t, vec![0.5, 0.0, 2.0]);
        let spec = ladder_from_table(t).unwrap();
        assert_eq!(spec.roots(), &[2]);
        assert_eq!(spec.f(100), 2.0);
    }

    #[test]
    fn rejects_gaps_and_bad_rows() {
        let e = parse_table("1 1\n3 1\n", "w.txt").unwrap_err().to_string();
        assert!(e.contains("w.txt:2"), "{e}");
        assert!(parse_table("1 1 1\n", "t").is_err());
        assert!(parse_table("1 x\n", "t").is_err());
        assert!(parse_table("# only comments\n", "t").is_err());
        assert!(parse_table("1 1\n2 0\n", "t").is_err());
    }
}
