//! Dataset manifests: CSV files with header `path,label,subject`.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const HEADER: [&str; 3] = ["path", "label", "subject"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Normal,
    Pneumonia,
    Covid19,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [
        ClassLabel::Normal,
        ClassLabel::Pneumonia,
        ClassLabel::Covid19,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Normal => "normal",
            ClassLabel::Pneumonia => "pneumonia",
            ClassLabel::Covid19 => "covid19",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ClassLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown label {s:?} (expected normal, pneumonia or covid19)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: ClassLabel,
    pub subject: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses manifest text. Row numbers in errors are 1-based file lines,
    /// so the first data row is row 2.
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());

        let header = reader.headers().map_err(|e| Error::Manifest {
            row: 1,
            message: e.to_string(),
        })?;
        if header.iter().collect::<Vec<_>>() != HEADER {
            return Err(Error::Manifest {
                row: 1,
                message: format!(
                    "header must be `path,label,subject`, found `{}`",
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }

        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (i, record) in reader.records().enumerate() {
            let fallback_row = i + 2;
            let record = record.map_err(|e| Error::Manifest {
                row: e.position().map_or(fallback_row, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let row = record
                .position()
                .map_or(fallback_row, |p| p.line() as usize);
            let bad = |message: String| Error::Manifest { row, message };

            if record.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", record.len())));
            }
            let path = &record[0];
            if path.is_empty() {
                return Err(bad("empty path".into()));
            }
            let label = record[1].parse::<ClassLabel>().map_err(bad)?;
            let subject = &record[2];
            if subject.is_empty() {
                return Err(bad("empty subject identifier".into()));
            }
            if !seen.insert(path.to_owned()) {
                return Err(bad(format!("duplicate path {path:?}")));
            }
            entries.push(ManifestEntry {
                path: PathBuf::from(path),
                label,
                subject: subject.to_owned(),
            });
        }
        Ok(Self { entries })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("path,label,subject\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.path.display(), e.label, e.subject));
        }
        out
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Manifest::parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_valid_rows() {
        let m = Manifest::parse(
            "path,label,subject\na.png,normal,s1\nb.png,pneumonia,s2\nc.png,covid19,s3\n",
        )
        .unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.entries[2].label, ClassLabel::Covid19);
        assert_eq!(m.entries[1].subject, "s2");
    }

    #[test]
    fn unknown_label_names_row() {
        let err = Manifest::parse("path,label,subject\na.png,flu,s1\n").unwrap_err();
        match err {
            Error::Manifest { row, message } => {
                assert_eq!(row, 2);
                assert!(message.contains("flu"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty() {
        assert!(Manifest::parse("path,label,subject\n").unwrap().is_empty());
    }

    #[test]
    fn duplicate_path_and_empty_subject() {
        let dup = Manifest::parse("path,label,subject\na.png,normal,s1\na.png,normal,s2\n");
        assert!(matches!(dup, Err(Error::Manifest { row: 3, .. })));
        let empty = Manifest::parse("path,label,subject\na.png,normal,\n");
        assert!(matches!(empty, Err(Error::Manifest { row: 2, .. })));
    }

    #[test]
    fn malformed_row_and_header() {
        let short = Manifest::parse("path,label,subject\na.png,normal\n");
        assert!(matches!(short, Err(Error::Manifest { row: 2, .. })));
        let header = Manifest::parse("file,label,subject\n");
        assert!(matches!(header, Err(Error::Manifest { row: 1, .. })));
    }

    #[test]
    fn csv_round_trip() {
        let text = "path,label,subject\nx/a.png,normal,p1\nx/b.png,covid19,p2\n";
        let m = Manifest::parse(text).unwrap();
        assert_eq!(m.to_csv(), text);
    }
}
