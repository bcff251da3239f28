//! The designer-ramp corpus: a line-oriented text file.
//!
//! ```text
//! # comment
//! cb-blues-5,colorbrewer,sequential,#EFF3FF;#BDD7E7;#6BAED6;#3182BD;#08519C
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use rampforge_core::colorspace::{parse_hex, srgb_to_lab, SrgbColor};
use rampforge_core::curve::{RampKind, RampSource, RawRamp};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate id {id:?} (first defined on line {first})")]
    DuplicateId { id: String, first: usize, line: usize },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Line {
    Comment(String),
    Ramp(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub ramps: Vec<RawRamp>,
    /// The colors as written, for lossless re-serialization.
    pub srgb: Vec<Vec<SrgbColor>>,
    /// Hex SHA-256 of the canonical text.
    pub fingerprint: String,
    lines: Vec<Line>,
}

/// Canonical form: lines trimmed, blank lines dropped, hex digits
/// uppercased, LF line endings with a trailing newline.
pub fn canonicalize(text: &str) -> String {
    let mut out = String::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            out.push_str(line);
        } else {
            out.push_str(&canonical_data_line(line));
        }
        out.push('\n');
    }
    out
}

fn canonical_data_line(line: &str) -> String {
    let fields: Vec<&str> = line.splitn(4, ',').map(str::trim).collect();
    if fields.len() < 4 {
        return line.to_string();
    }
    let colors: Vec<String> = fields[3].split(';').map(|h| h.trim().to_ascii_uppercase()).collect();
    format!("{},{},{},{}", fields[0], fields[1], fields[2], colors.join(";"))
}

pub fn fingerprint(canonical: &str) -> String {
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}

fn parse_line(line: &str, lineno: usize) -> Result<(RawRamp, Vec<SrgbColor>), CorpusError> {
    let err = |message: String| CorpusError::Parse { line: lineno, message };
    let fields: Vec<&str> = line.splitn(4, ',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(err(format!(
            "expected 4 comma-separated fields (id,source,kind,colors), found {}",
            fields.len()
        )));
    }
    let id = fields[0];
    if id.is_empty() {
        return Err(err("empty id".into()));
    }
    let source: RampSource = fields[1]
        .parse()
        .map_err(|_| err(format!("unknown source {:?}", fields[1])))?;
    let kind: RampKind = fields[2]
        .parse()
        .map_err(|_| err(format!("unknown kind {:?}", fields[2])))?;
    let srgb = fields[3]
        .split(';')
        .map(|h| parse_hex(h.trim()).map_err(|e| err(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if srgb.len() < 2 {
        return Err(err(format!("ramp {id:?} has {} color(s); at least 2 are required", srgb.len())));
    }
    let ramp = RawRamp {
        id: id.to_string(),
        source,
        kind,
        colors: srgb.iter().map(|c| srgb_to_lab(*c)).collect(),
    };
    Ok((ramp, srgb))
}

impl Corpus {
    pub fn parse(text: &str) -> Result<Corpus, CorpusError> {
        let mut ramps = Vec::new();
        let mut srgb = Vec::new();
        let mut lines = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('#') {
                lines.push(Line::Comment(line.to_string()));
                continue;
            }
            let (ramp, colors) = parse_line(line, lineno)?;
            if let Some(&first) = seen.get(&ramp.id) {
                return Err(CorpusError::DuplicateId {
                    id: ramp.id,
                    first,
                    line: lineno,
                });
            }
            seen.insert(ramp.id.clone(), lineno);
            lines.push(Line::Ramp(ramps.len()));
            ramps.push(ramp);
            srgb.push(colors);
        }
        Ok(Corpus {
            fingerprint: fingerprint(&canonicalize(text)),
            ramps,
            srgb,
            lines,
        })
    }

    pub fn load(path: &Path) -> Result<Corpus, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Corpus::parse(&text)
    }

    /// Serializes back to the canonical text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            match line {
                Line::Comment(c) => out.push_str(c),
                Line::Ramp(i) => {
                    let r = &self.ramps[*i];
                    let hex: Vec<String> = self.srgb[*i].iter().map(|c| c.to_string()).collect();
                    out.push_str(&format!("{},{},{},{}", r.id, r.source, r.kind, hex.join(";")));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn stats(&self) -> CorpusStats {
        corpus_stats(&self.ramps)
    }
}

pub fn parse_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    Corpus::load(path)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub total: usize,
    pub sequential: usize,
    pub diverging: usize,
    /// Every known source, including those with no ramps.
    pub by_source: BTreeMap<RampSource, usize>,
    pub length_histogram: BTreeMap<usize, usize>,
    /// 0 for an empty corpus.
    pub min_length: usize,
    pub max_length: usize,
}

pub fn corpus_stats(ramps: &[RawRamp]) -> CorpusStats {
    let mut by_source: BTreeMap<RampSource, usize> = RampSource::ALL.iter().map(|s| (*s, 0)).collect();
    let mut length_histogram = BTreeMap::new();
    let mut sequential = 0;
    for r in ramps {
        *by_source.entry(r.source).or_default() += 1;
        *length_histogram.entry(r.colors.len()).or_default() += 1;
        if r.kind == RampKind::Sequential {
            sequential += 1;
        }
    }
    CorpusStats {
        total: ramps.len(),
        sequential,
        diverging: ramps.len() - sequential,
        by_source,
        min_length: length_histogram.keys().next().copied().unwrap_or(0),
        max_length: length_histogram.keys().next_back().copied().unwrap_or(0),
        length_histogram,
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total: {}", self.total)?;
        writeln!(f, "sequential: {}", self.sequential)?;
        writeln!(f, "diverging: {}", self.diverging)?;
        for (s, n) in &self.by_source {
            writeln!(f, "source {s}: {n}")?;
        }
        writeln!(f, "length min: {}", self.min_length)?;
        writeln!(f, "length max: {}", self.max_length)?;
        for (len, n) in &self.length_histogram {
            writeln!(f, "length {len}: {n}")?;
        }
        Ok(())
    }
}
