//! Flag-value parsers. Failures here are usage errors (exit code 2).

use std::fmt;

use acg_core::asymptotics::DoubleVector;
use acg_core::{EdgeType, Margins};

#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn split_sides(text: &str, flag: &str) -> anyhow::Result<(String, String)> {
    let mut parts = text.split(':');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => Ok((a.trim().to_owned(), b.trim().to_owned())),
        _ => Err(usage(format!(
            "{flag}: expected `minus:plus`, got {text:?}"
        ))),
    }
}

fn list<T: std::str::FromStr>(text: &str, flag: &str) -> anyhow::Result<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| usage(format!("{flag}: cannot parse {t:?}")))
        })
        .collect()
}

/// `1,2:1,2` → `e⁻ = (1, 2)`, `e⁺ = (1, 2)`.
pub fn margins(text: &str) -> anyhow::Result<Margins> {
    let (m, p) = split_sides(text, "--margins")?;
    let (m, p) = (list::<u64>(&m, "--margins")?, list::<u64>(&p, "--margins")?);
    Margins::from_counts(&m, &p).map_err(|e| usage(format!("--margins: {e}")))
}

/// `0.2,0.8:0.5,0.5` → `(x⁻, x⁺)`.
pub fn double_vector(text: &str) -> anyhow::Result<DoubleVector> {
    let (m, p) = split_sides(text, "--x")?;
    let (m, p) = (list::<f64>(&m, "--x")?, list::<f64>(&p, "--x")?);
    DoubleVector::new(m, p).map_err(|e| usage(format!("--x: {e}")))
}

/// `k,j`.
pub fn edge_type(text: &str) -> anyhow::Result<EdgeType> {
    match list::<usize>(text, "--type")?.as_slice() {
        &[k, j] => Ok(EdgeType::new(k, j)),
        _ => Err(usage(format!("--type: expected `k,j`, got {text:?}"))),
    }
}

/// `k,j;k,j;...`.
pub fn edge_types(text: &str) -> anyhow::Result<Vec<EdgeType>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(edge_type)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_margins() {
        let m = margins("1,2:1,2").unwrap();
        assert_eq!(m.minus, vec![0, 1, 2]);
        assert_eq!(m.plus, vec![0, 1, 2]);
        assert!(margins("1,2").is_err());
        assert!(margins("1,2:1").is_err());
        assert!(margins("1,x:1,2").is_err());
    }

    #[test]
    fn parses_types() {
        assert_eq!(edge_type("2,1").unwrap(), EdgeType::new(2, 1));
        assert!(edge_type("2").is_err());
        let ts = edge_types("2,2;1,2").unwrap();
        assert_eq!(ts, vec![EdgeType::new(2, 2), EdgeType::new(1, 2)]);
    }

    #[test]
    fn usage_errors_are_tagged() {
        let e = margins("oops").unwrap_err();
        assert!(e.downcast_ref::<UsageError>().is_some());
    }
}
