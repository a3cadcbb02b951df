//! JSONL datasets: one graph pair per line, optionally with ground truth.
//!
//! ```json
//! {"g1": {"labels": ["A"], "edges": []}, "g2": {"n": 2, "edges": [[0, 1]]}, "ged": 2}
//! ```
//!
//! `mappings` are matchings from the smaller graph into the larger one (from
//! `g1` when sizes are equal). Each must induce a path of length `ged`, or at
//! most `ged` when the line is marked `approximate`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{canonicalize_pair, Graph, GraphPair};
use crate::path::{ep_gen, EditPath, NodeMatching};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetLine {
    pub g1: Graph,
    pub g2: Graph,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ged: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mappings: Option<Vec<NodeMatching>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_id: Option<String>,
    /// `ged` is an upper bound rather than the exact distance.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub approximate: bool,
    /// Edit sequence that produced `g2` from `g1`, in `g1`'s frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edits: Option<EditPath>,
}

impl DatasetLine {
    pub fn new(g1: Graph, g2: Graph) -> Self {
        DatasetLine {
            g1,
            g2,
            ged: None,
            mappings: None,
            query_id: None,
            approximate: false,
            edits: None,
        }
    }

    /// The canonical pair carrying this line's ground truth.
    pub fn pair(&self) -> GraphPair {
        let mut pair = canonicalize_pair(self.g1.clone(), self.g2.clone());
        pair.ground_truth_ged = self.ged;
        pair.ground_truth_matchings = self.mappings.clone();
        pair
    }

    /// Checks that every mapping is a valid injection whose induced path
    /// agrees with `ged`.
    pub fn validate(&self) -> Result<(), String> {
        let Some(mappings) = &self.mappings else {
            return Ok(());
        };
        let pair = self.pair();
        for (idx, m) in mappings.iter().enumerate() {
            let len = ep_gen(&pair, m)
                .map_err(|e| format!("mapping {idx}: {e}"))?
                .len() as u64;
            match self.ged {
                Some(ged) if len > ged || (!self.approximate && len != ged) => {
                    return Err(format!("mapping {idx} induces {len} edits, ged is {ged}"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

pub fn parse_dataset(reader: impl BufRead) -> Result<Vec<DatasetLine>, DatasetError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let no = idx + 1;
        let parsed: DatasetLine = serde_json::from_str(&line).map_err(|e| DatasetError::Line {
            line: no,
            message: e.to_string(),
        })?;
        parsed
            .validate()
            .map_err(|message| DatasetError::Line { line: no, message })?;
        out.push(parsed);
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<DatasetLine>, DatasetError> {
    parse_dataset(BufReader::new(File::open(path)?))
}

pub fn write_dataset(mut w: impl Write, lines: &[DatasetLine]) -> io::Result<()> {
    for line in lines {
        serde_json::to_writer(&mut w, line)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_dataset(path: impl AsRef<Path>, lines: &[DatasetLine]) -> io::Result<()> {
    write_dataset(BufWriter::new(File::create(path)?), lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Label;

    fn sample() -> Vec<DatasetLine> {
        let g1 = Graph::new(vec![Label::new("A"), Label::new("B")], &[(0, 1)]).unwrap();
        let g2 = Graph::new(vec![Label::new("A")], &[])
            .unwrap()
            .with_id("small");
        let mut a = DatasetLine::new(g1.clone(), g2);
        a.ged = Some(2);
        a.mappings = Some(vec![NodeMatching::new(vec![0])]);
        a.query_id = Some("q0".into());
        let b = DatasetLine::new(g1.clone(), g1);
        vec![a, b]
    }

    #[test]
    fn empty_input() {
        assert!(parse_dataset(&b""[..]).unwrap().is_empty());
    }

    #[test]
    fn round_trip() {
        let lines = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        save_dataset(&path, &lines).unwrap();
        assert_eq!(load_dataset(&path).unwrap(), lines);
    }

    #[test]
    fn unlabeled_short_form() {
        let text = r#"{"g1": {"n": 2, "edges": [[0, 1]]}, "g2": {"n": 3, "edges": []}, "ged": 2}"#;
        let lines = parse_dataset(text.as_bytes()).unwrap();
        assert_eq!(lines[0].g2.node_count(), 3);
        assert_eq!(lines[0].ged, Some(2));
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let good = serde_json::to_string(&sample()[1]).unwrap();
        let bad_len = r#"{"g1": {"n": 2, "edges": []}, "g2": {"n": 2, "edges": []}, "ged": 0, "mappings": [[0]]}"#;
        let text = format!("{good}\n\n{bad_len}\n");
        match parse_dataset(text.as_bytes()) {
            Err(DatasetError::Line { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("mapping 0"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let wrong_ged = r#"{"g1": {"n": 1, "edges": []}, "g2": {"n": 1, "edges": []}, "ged": 3, "mappings": [[0]]}"#;
        assert!(matches!(
            parse_dataset(wrong_ged.as_bytes()),
            Err(DatasetError::Line { line: 1, .. })
        ));
        assert!(matches!(
            parse_dataset(&b"{not json"[..]),
            Err(DatasetError::Line { line: 1, .. })
        ));
    }
}
