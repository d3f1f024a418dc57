use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Alternative, Domain, DomainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleSource {
    QueryAnswer,
    FileImport,
}

/// An observed strict preference: `better` was chosen over `worse`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComparisonExample {
    pub better: Alternative,
    pub worse: Alternative,
    pub source: ExampleSource,
}

impl ComparisonExample {
    /// Fails when both sides are the same alternative.
    pub fn new(better: Alternative, worse: Alternative, source: ExampleSource) -> Result<Self, DomainError> {
        if better == worse {
            return Err(DomainError::IdenticalSides);
        }
        Ok(Self { better, worse, source })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowError {
    /// 1-based line number in the source text.
    pub line: usize,
    pub message: String,
}

impl RowError {
    pub(crate) fn summary(rows: &[RowError]) -> String {
        rows.iter()
            .take(5)
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn parse_side(domain: &Domain, side: &str) -> Result<Alternative, String> {
    let names: Vec<&str> = side.split(',').map(str::trim).collect();
    if names.len() != domain.len() {
        return Err(format!("expected {} values, found {}", domain.len(), names.len()));
    }
    let values = names
        .iter()
        .enumerate()
        .map(|(a, name)| {
            domain
                .attribute(a)
                .value_index(name)
                .ok_or_else(|| format!("unknown value {name:?} for attribute {:?}", domain.attribute_name(a)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Alternative::from_raw(values))
}

/// Parses an example table. Each data row reads `v1,v2,... > w1,w2,...`
/// with values in attribute declaration order; the left side is preferred.
/// Blank lines and lines starting with `#` are skipped. All row errors are
/// collected before failing.
pub fn parse_examples(text: &str, domain: &Domain) -> Result<Vec<ComparisonExample>, DomainError> {
    let mut examples = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = (|| {
            let mut parts = line.split('>');
            let (left, right) = match (parts.next(), parts.next(), parts.next()) {
                (Some(l), Some(r), None) => (l, r),
                _ => return Err("expected exactly one '>' separator".to_string()),
            };
            let better = parse_side(domain, left)?;
            let worse = parse_side(domain, right)?;
            if better == worse {
                return Err("both sides are the same alternative".to_string());
            }
            Ok(ComparisonExample {
                better,
                worse,
                source: ExampleSource::FileImport,
            })
        })();
        match row {
            Ok(ex) => examples.push(ex),
            Err(message) => errors.push(RowError { line: i + 1, message }),
        }
    }
    if errors.is_empty() {
        Ok(examples)
    } else {
        Err(DomainError::Rows(errors))
    }
}

/// Inverse of [`parse_examples`].
pub fn write_examples(examples: &[ComparisonExample], domain: &Domain) -> String {
    let mut out = String::new();
    for ex in examples {
        out.push_str(&ex.better.names(domain).join(","));
        out.push_str(" > ");
        out.push_str(&ex.worse.names(domain).join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn honda_sedan_row() {
        let d = car();
        let ex = parse_examples("s,h,l,a > s,f,l,a\n", &d).unwrap();
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].better, alt(&d, &[("B", "s"), ("M", "h"), ("P", "l"), ("T", "a")]));
        assert_eq!(ex[0].worse, alt(&d, &[("B", "s"), ("M", "f"), ("P", "l"), ("T", "a")]));
        assert_eq!(ex[0].source, ExampleSource::FileImport);
    }

    #[test]
    fn empty_table() {
        assert!(parse_examples("", &car()).unwrap().is_empty());
        assert!(parse_examples("# header\n\n", &car()).unwrap().is_empty());
    }

    #[test]
    fn collects_row_errors_with_line_numbers() {
        let d = car();
        let text = "s,h,l,a > s,h,l,a\nv,h,l,a > r,h,l,a\ns,h,l > s,f,l,a\ns,h,l,a s,f,l,a\n";
        match parse_examples(text, &d) {
            Err(DomainError::Rows(rows)) => {
                let lines: Vec<usize> = rows.iter().map(|r| r.line).collect();
                assert_eq!(lines, vec![1, 3, 4]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates_are_kept_and_round_trip() {
        let d = car();
        let text = "s,h,l,a > s,f,l,a\ns,h,l,a > s,f,l,a\nv,f,g,m > r,h,d,a\n";
        let ex = parse_examples(text, &d).unwrap();
        assert_eq!(ex.len(), 3);
        assert_eq!(write_examples(&ex, &d), text);
    }
}
