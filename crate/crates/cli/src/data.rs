//! Long-format opinion-score CSV: one `subject,condition,score` row per rating.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use qstat::GroupSample;
use thiserror::Error;

pub const HEADER: [&str; 3] = ["subject", "condition", "score"];

/// Rows are numbered from 1 starting at the first data row; `line` is the
/// physical line in the file (the header is line 1).
#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}")]
    Io { path: String, source: std::io::Error },
    #[error("file is empty")]
    Empty,
    #[error("expected header `subject,condition,score`, found `{0}`")]
    Header(String),
    #[error("row {row} (line {line}): expected 3 fields, found {found}")]
    Fields { row: usize, line: u64, found: usize },
    #[error("row {row} (line {line}), column `score`: cannot parse `{value}` as a finite number")]
    Score { row: usize, line: u64, value: String },
    #[error("row {row} (line {line}), column `{column}`: empty value")]
    Blank { row: usize, line: u64, column: &'static str },
    #[error(
        "row {row} (line {line}): duplicate record for subject `{subject}`, condition `{condition}` \
         (first seen at row {first_row})"
    )]
    Duplicate { row: usize, line: u64, first_row: usize, subject: String, condition: String },
    #[error("row {row}: {source}")]
    Csv { row: usize, source: csv::Error },
    #[error("no data rows after the header")]
    NoData,
    #[error("unknown condition `{id}`; available: {available}")]
    UnknownCondition { id: String, available: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub subject: String,
    pub condition: String,
    pub score: f64,
}

/// Validated ratings: no duplicate (subject, condition) pairs, finite
/// scores, at least one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionDataset {
    pub records: Vec<Record>,
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<OpinionDataset, DataError> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    read_csv(file)
}

pub fn read_csv<R: Read>(input: R) -> Result<OpinionDataset, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let header = rdr.headers().map_err(|source| DataError::Csv { row: 0, source })?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(DataError::Empty);
    }
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(DataError::Header(header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut records = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|source| DataError::Csv { row, source })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(DataError::Fields { row, line, found: rec.len() });
        }
        let field = |j: usize, column: &'static str| {
            let v = rec[j].trim();
            if v.is_empty() {
                Err(DataError::Blank { row, line, column })
            } else {
                Ok(v.to_string())
            }
        };
        let subject = field(0, "subject")?;
        let condition = field(1, "condition")?;
        let raw = field(2, "score")?;
        let score = raw
            .parse::<f64>()
            .ok()
            .filter(|s| s.is_finite())
            .ok_or(DataError::Score { row, line, value: raw })?;
        if let Some(&first_row) = seen.get(&(subject.clone(), condition.clone())) {
            return Err(DataError::Duplicate { row, line, first_row, subject, condition });
        }
        seen.insert((subject.clone(), condition.clone()), row);
        records.push(Record { subject, condition, score });
    }
    if records.is_empty() {
        return Err(DataError::NoData);
    }
    Ok(OpinionDataset { records })
}

impl OpinionDataset {
    /// Condition ids in order of first appearance.
    pub fn conditions(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.condition.as_str()) {
                out.push(&r.condition);
            }
        }
        out
    }

    /// One group per condition, scores in file order.
    pub fn groups(&self) -> Vec<GroupSample> {
        self.conditions().into_iter().map(|c| self.group_unchecked(c)).collect()
    }

    fn group_unchecked(&self, id: &str) -> GroupSample {
        let scores = self.records.iter().filter(|r| r.condition == id).map(|r| r.score).collect();
        GroupSample::new(id, scores).expect("validated on load")
    }

    pub fn group(&self, id: &str) -> Result<GroupSample, DataError> {
        if self.records.iter().any(|r| r.condition == id) {
            Ok(self.group_unchecked(id))
        } else {
            Err(DataError::UnknownCondition { id: id.into(), available: self.conditions().join(", ") })
        }
    }

    /// The listed conditions, or all of them when `ids` is empty.
    pub fn select(&self, ids: &[String]) -> Result<Vec<GroupSample>, DataError> {
        if ids.is_empty() {
            Ok(self.groups())
        } else {
            ids.iter().map(|id| self.group(id)).collect()
        }
    }
}

/// Write groups in long format with subjects `s1, s2, …` by position.
/// Scores use the shortest representation that parses back exactly.
pub fn write_groups_csv<W: Write>(groups: &[GroupSample], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for g in groups {
        for (i, s) in g.scores.iter().enumerate() {
            w.write_record([format!("s{}", i + 1), g.id.clone(), s.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
