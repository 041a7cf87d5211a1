//! Vote matrices and observation lists.
//!
//! A votes CSV has a header row whose first cell names the participant
//! column and whose remaining cells are argument names. Each following row
//! is one participant: an identifier, then `1` (agree), `0` (disagree) or an
//! empty cell (no vote) per argument.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::af::{ArgSet, ArgumentNames};
use crate::error::{Error, Result};
use crate::space::{merge_observations, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vote {
    Agree,
    Disagree,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteMatrix {
    pub participants: Vec<String>,
    pub arguments: ArgumentNames,
    /// `cells[participant][argument]`.
    pub cells: Vec<Vec<Vote>>,
}

/// How a participant's row becomes observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    /// The set of agreed arguments, labelled 1.
    RowAsSet,
    /// Each voted cell as a singleton labelled with the vote.
    CellAsSingleton,
}

/// What to do with disagree cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeCells {
    /// Each disagree cell yields a singleton observation labelled 0.
    IncludeAsLabel0,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservationConvention {
    pub mode: ObservationMode,
    pub negatives: NegativeCells,
}

impl Default for ObservationConvention {
    fn default() -> Self {
        ObservationConvention {
            mode: ObservationMode::RowAsSet,
            negatives: NegativeCells::Ignore,
        }
    }
}

/// `row-as-set` or `cell-as-singleton`, optionally followed by
/// `:include` or `:ignore` for disagree cells. Without a suffix,
/// `row-as-set` ignores them and `cell-as-singleton` includes them.
impl FromStr for ObservationConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mode, neg) = match s.trim().split_once(':') {
            Some((m, n)) => (m, Some(n)),
            None => (s.trim(), None),
        };
        let mode = match mode {
            "row-as-set" => ObservationMode::RowAsSet,
            "cell-as-singleton" => ObservationMode::CellAsSingleton,
            other => return Err(Error::input(format!("unknown convention `{other}`"))),
        };
        let negatives = match (neg, mode) {
            (Some("include"), _) => NegativeCells::IncludeAsLabel0,
            (Some("ignore"), _) => NegativeCells::Ignore,
            (Some(other), _) => {
                return Err(Error::input(format!(
                    "unknown negative-cell handling `{other}`"
                )))
            }
            (None, ObservationMode::RowAsSet) => NegativeCells::Ignore,
            (None, ObservationMode::CellAsSingleton) => NegativeCells::IncludeAsLabel0,
        };
        Ok(ObservationConvention { mode, negatives })
    }
}

impl fmt::Display for ObservationConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            ObservationMode::RowAsSet => "row-as-set",
            ObservationMode::CellAsSingleton => "cell-as-singleton",
        };
        let neg = match self.negatives {
            NegativeCells::IncludeAsLabel0 => "include",
            NegativeCells::Ignore => "ignore",
        };
        write!(f, "{mode}:{neg}")
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, 0, e.to_string())
}

impl VoteMatrix {
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(csv_error)?.clone();
        if header.len() < 2 {
            return Err(Error::Schema(
                "votes header needs a participant column and at least one argument".into(),
            ));
        }
        let arguments = ArgumentNames::new(
            header
                .iter()
                .skip(1)
                .map(|h| h.trim().to_string())
                .collect(),
        )?;
        let mut participants = Vec::new();
        let mut cells = Vec::new();
        for record in reader.records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let id = record.get(0).unwrap_or("").trim().to_string();
            if id.is_empty() {
                return Err(Error::parse(line, 1, "empty participant identifier"));
            }
            if participants.contains(&id) {
                return Err(Error::parse(
                    line,
                    1,
                    format!("duplicate participant `{id}`"),
                ));
            }
            let row = record
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, cell)| match cell.trim() {
                    "1" => Ok(Vote::Agree),
                    "0" => Ok(Vote::Disagree),
                    "" => Ok(Vote::Missing),
                    other => Err(Error::parse(
                        line,
                        j + 2,
                        format!("invalid vote `{other}` (expected 1, 0 or empty)"),
                    )),
                })
                .collect::<Result<Vec<_>>>()?;
            participants.push(id);
            cells.push(row);
        }
        Ok(VoteMatrix {
            participants,
            arguments,
            cells,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("participant");
        for name in self.arguments.as_slice() {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (id, row) in self.participants.iter().zip(&self.cells) {
            out.push_str(id);
            for v in row {
                out.push(',');
                out.push_str(match v {
                    Vote::Agree => "1",
                    Vote::Disagree => "0",
                    Vote::Missing => "",
                });
            }
            out.push('\n');
        }
        out
    }

    /// Reorders columns to `names`. Columns absent from the matrix become
    /// missing votes; a matrix column not in `names` is a schema error.
    pub fn align_to(&self, names: &ArgumentNames) -> Result<VoteMatrix> {
        let mut source = Vec::with_capacity(names.len());
        for name in self.arguments.as_slice() {
            if names.index(name).is_none() {
                return Err(Error::Schema(format!("unknown argument name `{name}`")));
            }
        }
        for name in names.as_slice() {
            source.push(self.arguments.index(name));
        }
        let cells = self
            .cells
            .iter()
            .map(|row| {
                source
                    .iter()
                    .map(|s| s.map_or(Vote::Missing, |j| row[j]))
                    .collect()
            })
            .collect();
        Ok(VoteMatrix {
            participants: self.participants.clone(),
            arguments: names.clone(),
            cells,
        })
    }

    /// Observations under `convention`, with duplicates merged by weight.
    /// Rows without any vote contribute nothing.
    pub fn observations(&self, convention: ObservationConvention) -> Vec<Observation> {
        let mut out = Vec::new();
        for row in &self.cells {
            if row.iter().all(|v| *v == Vote::Missing) {
                continue;
            }
            let agreed = ArgSet::from_indices(
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| **v == Vote::Agree)
                    .map(|(j, _)| j),
            );
            match convention.mode {
                ObservationMode::RowAsSet => out.push(Observation::accepted(agreed)),
                ObservationMode::CellAsSingleton => out.extend(
                    agreed
                        .iter()
                        .map(|j| Observation::accepted(ArgSet::singleton(j))),
                ),
            }
            if convention.negatives == NegativeCells::IncludeAsLabel0 {
                out.extend(
                    row.iter()
                        .enumerate()
                        .filter(|(_, v)| **v == Vote::Disagree)
                        .map(|(j, _)| Observation::new(ArgSet::singleton(j), false)),
                );
            }
        }
        merge_observations(out)
    }

    /// Agreed-argument sets, one per participant with at least one vote.
    pub fn rows_as_sets(&self) -> Vec<ArgSet> {
        self.cells
            .iter()
            .filter(|row| row.iter().any(|v| *v != Vote::Missing))
            .map(|row| {
                ArgSet::from_indices(
                    row.iter()
                        .enumerate()
                        .filter(|(_, v)| **v == Vote::Agree)
                        .map(|(j, _)| j),
                )
            })
            .collect()
    }
}

pub fn load_votes(
    path: impl AsRef<Path>,
    convention: ObservationConvention,
) -> Result<(ArgumentNames, Vec<Observation>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let matrix = VoteMatrix::parse_csv(&text)?;
    let obs = matrix.observations(convention);
    Ok((matrix.arguments, obs))
}

/// Parses an observation CSV with columns `subset,label[,weight]`. Subsets
/// list argument names separated by `;`; the empty set is an empty cell,
/// `{}` or `∅`.
pub fn parse_observations(text: &str, names: &ArgumentNames) -> Result<Vec<Observation>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let with_weight = match header.as_slice() {
        [s, l] if s == "subset" && l == "label" => false,
        [s, l, w] if s == "subset" && l == "label" && w == "weight" => true,
        _ => {
            return Err(Error::Schema(
                "observation header must be `subset,label` or `subset,label,weight`".into(),
            ))
        }
    };
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let mut subset = ArgSet::EMPTY;
        let cell = record[0].trim();
        let members = if matches!(cell, "{}" | "∅") {
            ""
        } else {
            cell
        };
        for name in members.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let i = names
                .index(name)
                .ok_or_else(|| Error::parse(line, 1, format!("unknown argument name `{name}`")))?;
            subset.insert(i);
        }
        let label = match record[1].trim() {
            "1" => true,
            "0" => false,
            other => return Err(Error::parse(line, 2, format!("invalid label `{other}`"))),
        };
        let weight = if with_weight {
            match record[2].trim().parse::<u32>() {
                Ok(w) if w >= 1 => w,
                _ => {
                    return Err(Error::parse(
                        line,
                        3,
                        format!("invalid weight `{}`", record[2].trim()),
                    ))
                }
            }
        } else {
            1
        };
        out.push(Observation::weighted(subset, label, weight));
    }
    Ok(merge_observations(out))
}

pub fn observations_to_csv(obs: &[Observation], names: &ArgumentNames) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut write = |row: [&str; 3]| {
        writer
            .write_record(row)
            .expect("writing to memory cannot fail")
    };
    write(["subset", "label", "weight"]);
    for o in obs {
        let members: Vec<&str> = o.subset.iter().map(|i| names.name(i)).collect();
        let subset = if members.is_empty() {
            "{}".to_string()
        } else {
            members.join(";")
        };
        let label = if o.label { "1" } else { "0" };
        write([&subset, label, &o.weight.to_string()]);
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("utf-8 input")
}
