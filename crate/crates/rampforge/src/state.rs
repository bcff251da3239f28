//! Ramp state files: everything needed to rebuild a generated ramp from a
//! model book by replaying its seed and edit stack.

use std::path::Path;

use rampforge_core::colorspace::{parse_hex, srgb_to_lab};
use rampforge_core::curve::AffineEdit;
use rampforge_core::generator::{
    apply_user_edit, gamut_fit, seed_diverging, seed_sequential, DivergeOptions, GamutMode, GamutStatus,
    GenError, GeneratedKind, GeneratedRamp, RotationPolicy,
};
use rampforge_core::modelbook::ModelBook;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STATE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("unknown model {0:?}")]
    UnknownModel(String),
    #[error("bad seed color: {0}")]
    BadSeed(String),
    #[error("unsupported ramp kind {0:?} (expected sequential or diverging)")]
    BadKind(String),
    #[error("unsupported state version {0}")]
    Version(u32),
    #[error("edit {0} of the stack leaves the gamut; the state is inconsistent with this model book")]
    Inconsistent(usize),
    #[error(transparent)]
    Generate(#[from] GenError),
    #[error("malformed state: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EditDto {
    pub translate_l: f64,
    pub translate_a: f64,
    pub translate_b: f64,
    pub rotate_ab_degrees: f64,
    pub scale: f64,
    pub reflect: bool,
}

impl Default for EditDto {
    fn default() -> Self {
        AffineEdit::IDENTITY.into()
    }
}

impl From<AffineEdit> for EditDto {
    fn from(e: AffineEdit) -> Self {
        EditDto {
            translate_l: e.translate_l,
            translate_a: e.translate_a,
            translate_b: e.translate_b,
            rotate_ab_degrees: e.rotate_ab_degrees,
            scale: e.scale,
            reflect: e.reflect,
        }
    }
}

impl From<EditDto> for AffineEdit {
    fn from(d: EditDto) -> Self {
        AffineEdit {
            translate_l: d.translate_l,
            translate_a: d.translate_a,
            translate_b: d.translate_b,
            rotate_ab_degrees: d.rotate_ab_degrees,
            scale: d.scale,
            reflect: d.reflect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampState {
    pub version: u32,
    pub model_id: String,
    pub seed_hex: String,
    /// `sequential` or `diverging`.
    pub kind: String,
    #[serde(default)]
    pub arm_rotation_degrees: f64,
    /// Overrides the book's diverging angle.
    #[serde(default)]
    pub angle_degrees: Option<f64>,
    /// `strict` or `clip`.
    pub gamut: String,
    #[serde(default)]
    pub edits: Vec<EditDto>,
}

impl RampState {
    pub fn new(model_id: &str, seed_hex: &str, kind: GeneratedKind, gamut: GamutMode) -> Self {
        RampState {
            version: STATE_VERSION,
            model_id: model_id.to_string(),
            seed_hex: seed_hex.to_ascii_uppercase(),
            kind: kind.as_str().to_string(),
            arm_rotation_degrees: 0.0,
            angle_degrees: None,
            gamut: match gamut {
                GamutMode::Strict => "strict",
                GamutMode::Clip => "clip",
            }
            .to_string(),
            edits: Vec::new(),
        }
    }

    pub fn gamut_mode(&self) -> Result<GamutMode, StateError> {
        self.gamut
            .parse()
            .map_err(|_| StateError::BadSeed(format!("unknown gamut mode {:?}", self.gamut)))
    }

    /// Seeds, fits to the gamut and replays every edit.
    pub fn replay(&self, book: &ModelBook) -> Result<GeneratedRamp, StateError> {
        if self.version != STATE_VERSION {
            return Err(StateError::Version(self.version));
        }
        let model = book
            .model(&self.model_id)
            .ok_or_else(|| StateError::UnknownModel(self.model_id.clone()))?;
        let seed = srgb_to_lab(parse_hex(&self.seed_hex).map_err(|e| StateError::BadSeed(e.to_string()))?);
        let ramp = match self.kind.parse::<GeneratedKind>() {
            Ok(GeneratedKind::Sequential) => seed_sequential(model, seed)?,
            Ok(GeneratedKind::Diverging) => {
                let mut opts = DivergeOptions::from_book(book, RotationPolicy::Reject);
                if let Some(a) = self.angle_degrees {
                    opts.angle_degrees = a;
                }
                seed_diverging(model, seed, self.arm_rotation_degrees, &opts)?
            }
            _ => return Err(StateError::BadKind(self.kind.clone())),
        };
        let mut ramp = gamut_fit(&ramp, self.gamut_mode()?)?;
        for (i, e) in self.edits.iter().enumerate() {
            ramp = apply_user_edit(&ramp, &AffineEdit::from(*e))?;
            if ramp.gamut_status == GamutStatus::Reverted {
                return Err(StateError::Inconsistent(i));
            }
        }
        Ok(ramp)
    }

    /// Applies one more edit. Returns the new state (unchanged if the edit
    /// was reverted) and the resulting ramp.
    pub fn transform(&self, book: &ModelBook, edit: AffineEdit) -> Result<(RampState, GeneratedRamp), StateError> {
        let ramp = self.replay(book)?;
        let next = apply_user_edit(&ramp, &edit)?;
        let mut state = self.clone();
        if next.gamut_status != GamutStatus::Reverted && !edit.is_identity() {
            state.edits.push(edit.into());
        }
        Ok((state, next))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("state serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<RampState, StateError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<RampState, StateError> {
        let text = std::fs::read_to_string(path).map_err(|source| StateError::Io {
            path: path.display().to_string(),
            source,
        })?;
        RampState::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), StateError> {
        std::fs::write(path, self.to_json()).map_err(|source| StateError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
