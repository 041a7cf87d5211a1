//! CSV report artifacts. Numbers are written with Rust's shortest
//! round-trip formatting, which does not depend on the locale.

use std::path::Path;

use crate::bayes::{PosteriorDistribution, PosteriorEntry, PosteriorKind};
use crate::error::{Error, Result};
use crate::gibbs::{convergence_trace, SampleHistogram};
use crate::space::AttackAssignment;

/// Rows under a fixed header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(&self.header)
            .expect("writing to memory cannot fail");
        for row in &self.rows {
            writer
                .write_record(row)
                .expect("writing to memory cannot fail");
        }
        String::from_utf8(writer.into_inner().expect("flush to memory")).expect("utf-8 input")
    }
}

pub fn save_table(path: impl AsRef<Path>, table: &Table) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}

/// `assignment,probability`, one row per listed assignment.
pub fn posterior_table(post: &PosteriorDistribution) -> Table {
    let mut table = Table::new(["assignment", "probability"]);
    for (att, p) in post.iter() {
        table.push([att.to_bitstring(), p.to_string()]);
    }
    table
}

pub fn save_posterior(path: impl AsRef<Path>, post: &PosteriorDistribution) -> Result<()> {
    save_table(path, &posterior_table(post))
}

/// Reads a posterior CSV back. Probabilities are renormalized only in the
/// sense that their logarithms are stored; they are not rescaled.
pub fn parse_posterior(text: &str, kind: PosteriorKind) -> Result<PosteriorDistribution> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(0, 0, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != ["assignment", "probability"] {
        return Err(Error::Schema(
            "posterior header must be `assignment,probability`".into(),
        ));
    }
    let mut entries = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, 0, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let assignment = AttackAssignment::parse_bitstring(record[0].trim())
            .map_err(|e| Error::parse(line, 1, e.to_string()))?;
        if *width.get_or_insert(assignment.len()) != assignment.len() {
            return Err(Error::parse(
                line,
                1,
                "assignment length differs from earlier rows",
            ));
        }
        let p: f64 = record[1]
            .trim()
            .parse()
            .ok()
            .filter(|p: &f64| (0.0..=1.0).contains(p))
            .ok_or_else(|| {
                Error::parse(line, 2, format!("invalid probability `{}`", &record[1]))
            })?;
        entries.push(PosteriorEntry {
            assignment,
            log_prob: p.ln(),
        });
    }
    Ok(PosteriorDistribution::new(kind, entries))
}

pub fn load_posterior(path: impl AsRef<Path>) -> Result<PosteriorDistribution> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_posterior(&text, PosteriorKind::Exact)
}

/// `assignment,count,probability`.
pub fn histogram_table(hist: &SampleHistogram) -> Table {
    let mut table = Table::new(["assignment", "count", "probability"]);
    for (att, &c) in hist.counts() {
        table.push([
            att.to_bitstring(),
            c.to_string(),
            hist.probability(att).to_string(),
        ]);
    }
    table
}

/// `iteration,distinct_count`, iterations numbered from 1.
pub fn trace_table(hist: &SampleHistogram) -> Table {
    let mut table = Table::new(["iteration", "distinct_count"]);
    for (i, c) in convergence_trace(hist).into_iter().enumerate() {
        table.push([(i + 1).to_string(), c.to_string()]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(["a", "b"]);
        t.push(["x,y", "1"]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",1\n");
    }

    #[test]
    fn posterior_roundtrip() {
        let entries = vec![
            PosteriorEntry {
                assignment: AttackAssignment::parse_bitstring("01").unwrap(),
                log_prob: 0.3f64.ln(),
            },
            PosteriorEntry {
                assignment: AttackAssignment::parse_bitstring("11").unwrap(),
                log_prob: 0.7f64.ln(),
            },
        ];
        let post = PosteriorDistribution::new(PosteriorKind::Exact, entries);
        let back = parse_posterior(&posterior_table(&post).to_csv(), PosteriorKind::Exact).unwrap();
        for (a, p) in post.iter() {
            assert!((back.probability(a) - p).abs() < 1e-15);
        }
        assert!(parse_posterior("assignment,probability\n01,2\n", PosteriorKind::Exact).is_err());
        assert!(
            parse_posterior("assignment,probability\n01,1\n1,0\n", PosteriorKind::Exact).is_err()
        );
        assert!(parse_posterior("a,b\n", PosteriorKind::Exact).is_err());
    }
}
