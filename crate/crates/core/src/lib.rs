//! Design mining for color ramps.
//!
//! Designer ramps are normalized to nine-point curves in CIELAB
//! ([`curve`]), described by structural features ([`features`]), grouped by
//! two clustering methods ([`clustering`]) and averaged into representative
//! models ([`modelbook`]). A model plus one seed color yields a new
//! sequential or diverging ramp ([`generator`]).
//!
//! The crate is `no_std` and needs only `alloc`; file formats, the CLI and
//! the HTTP service live in the `rampforge` crate.
#![no_std]

extern crate alloc;

pub mod clustering;
pub mod colorspace;
pub mod curve;
pub mod features;
pub mod generator;
pub mod linalg;
pub mod modelbook;

pub use colorspace::{delta_e, in_gamut, lab_to_srgb, parse_hex, srgb_to_lab, LabColor, SrgbColor};
pub use curve::{AffineEdit, RampCurve, RampKind, RampSource, RawRamp, CONTROL_POINTS};
pub use generator::{GamutMode, GamutStatus, GeneratedKind, GeneratedRamp};
pub use modelbook::{ModelBook, RampModel};
