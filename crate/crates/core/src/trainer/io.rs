use std::collections::BTreeSet;

use super::marks::RawMark;
use super::TrainError;
use crate::feedback::FeatureFrame;

/// Reads `rater,cue,start_ms,end_ms` lines. A header line starting with
/// `rater` and `#` comment lines are skipped.
pub fn parse_label_file(text: &str) -> Result<Vec<RawMark>, TrainError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut marks = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| TrainError::LabelFile {
            line: i + 1,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        let bad = |message: String| TrainError::LabelFile { line, message };
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", record.len())));
        }
        if record[0].eq_ignore_ascii_case("rater") {
            continue;
        }
        let cue = record[1].parse().map_err(bad)?;
        let start_ms = record[2]
            .parse()
            .map_err(|_| bad(format!("bad start {:?}", &record[2])))?;
        let end_ms = record[3]
            .parse()
            .map_err(|_| bad(format!("bad end {:?}", &record[3])))?;
        marks.push(RawMark {
            rater: record[0].to_string(),
            cue,
            start_ms,
            end_ms,
        });
    }
    Ok(marks)
}

pub fn raters_in(marks: &[RawMark]) -> BTreeSet<String> {
    marks.iter().map(|m| m.rater.clone()).collect()
}

/// Reads one JSON frame record per line; blank lines are skipped.
pub fn parse_frame_file(text: &str) -> Result<Vec<FeatureFrame>, TrainError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| TrainError::FrameFile {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn write_frame_file(frames: &[FeatureFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        out.push_str(&serde_json::to_string(f).expect("frames serialize"));
        out.push('\n');
    }
    out
}
