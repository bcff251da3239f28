//! Model book files (JSON).

use std::path::Path;

use rampforge_core::clustering::Method;
use rampforge_core::colorspace::LabColor;
use rampforge_core::modelbook::{ModelBook, ModelError, RampModel, MODELBOOK_VERSION};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BookError {
    #[error("malformed model book at byte {offset} (line {line}, column {column}): {message}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported model book version {found} (expected {MODELBOOK_VERSION})")]
    Version { found: String },
    #[error("model book schema error: {0}")]
    Schema(String),
    #[error("invalid model book: {0}")]
    Invalid(#[from] ModelError),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BookDto {
    version: u32,
    corpus_fingerprint: String,
    diverging_angle_degrees: f64,
    diverging_rotation_limit_degrees: f64,
    models: Vec<ModelDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDto {
    id: String,
    method: String,
    cluster_size: usize,
    member_ids: Vec<String>,
    l_profile: [f64; 9],
    shape: [[f64; 3]; 9],
}

impl From<&ModelBook> for BookDto {
    fn from(b: &ModelBook) -> Self {
        BookDto {
            version: b.version,
            corpus_fingerprint: b.corpus_fingerprint.clone(),
            diverging_angle_degrees: b.diverging_angle_degrees,
            diverging_rotation_limit_degrees: b.diverging_rotation_limit_degrees,
            models: b
                .models
                .iter()
                .map(|m| ModelDto {
                    id: m.id.clone(),
                    method: m.method.as_str().to_string(),
                    cluster_size: m.cluster_size,
                    member_ids: m.member_ids.clone(),
                    l_profile: m.l_profile,
                    shape: m.shape.map(LabColor::to_array),
                })
                .collect(),
        }
    }
}

impl TryFrom<BookDto> for ModelBook {
    type Error = BookError;

    fn try_from(d: BookDto) -> Result<Self, BookError> {
        let models = d
            .models
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                let method: Method = m.method.parse().map_err(|_| {
                    BookError::Schema(format!("models[{i}].method: unknown method {:?}", m.method))
                })?;
                Ok(RampModel {
                    id: m.id,
                    method,
                    shape: m.shape.map(LabColor::from_array),
                    l_profile: m.l_profile,
                    cluster_size: m.cluster_size,
                    member_ids: m.member_ids,
                })
            })
            .collect::<Result<Vec<_>, BookError>>()?;
        let book = ModelBook {
            version: d.version,
            corpus_fingerprint: d.corpus_fingerprint,
            models,
            diverging_angle_degrees: d.diverging_angle_degrees,
            diverging_rotation_limit_degrees: d.diverging_rotation_limit_degrees,
        };
        book.validate()?;
        Ok(book)
    }
}

/// Pretty-printed JSON. Numbers use the shortest representation that
/// parses back to the same `f64`.
pub fn to_json(book: &ModelBook) -> String {
    let mut s = serde_json::to_string_pretty(&BookDto::from(book)).expect("model book serializes");
    s.push('\n');
    s
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

pub fn from_json(text: &str) -> Result<ModelBook, BookError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| BookError::Syntax {
        offset: byte_offset(text, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match value.get("version") {
        Some(v) if v.as_u64() == Some(u64::from(MODELBOOK_VERSION)) => {}
        Some(v) => return Err(BookError::Version { found: v.to_string() }),
        None => return Err(BookError::Schema("missing field `version`".into())),
    }
    let dto: BookDto = serde_json::from_value(value).map_err(|e| BookError::Schema(e.to_string()))?;
    ModelBook::try_from(dto)
}

pub fn save_modelbook(book: &ModelBook, path: &Path) -> Result<(), BookError> {
    std::fs::write(path, to_json(book)).map_err(|source| BookError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_modelbook(path: &Path) -> Result<ModelBook, BookError> {
    let text = std::fs::read_to_string(path).map_err(|source| BookError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_json(&text)
}
