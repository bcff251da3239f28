//! Text formats for generated ramps.

use std::fmt::Write as _;
use std::str::FromStr;

use rampforge_core::colorspace::{lab_to_srgb, lab_to_srgb_clamped, LabColor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Hex,
    Lab,
    Css,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hex" => Ok(Format::Hex),
            "lab" => Ok(Format::Lab),
            "css" => Ok(Format::Css),
            _ => Err(format!("unknown format {s:?} (expected hex, lab or css)")),
        }
    }
}

/// `#RRGGBB`, clamping channels of colors outside the gamut.
pub fn hex(c: LabColor) -> String {
    lab_to_srgb(c).unwrap_or_else(|_| lab_to_srgb_clamped(c)).to_string()
}

/// Fixed four-decimal rendering without a negative zero.
pub fn fixed4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

fn percent(i: usize, n: usize) -> String {
    let p = if n < 2 { 0.0 } else { 100.0 * i as f64 / (n - 1) as f64 };
    let s = format!("{p:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}%")
}

pub fn format_colors(colors: &[LabColor], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Hex => {
            for c in colors {
                out.push_str(&hex(*c));
                out.push('\n');
            }
        }
        Format::Lab => {
            for c in colors {
                let _ = writeln!(out, "{},{},{}", fixed4(c.l), fixed4(c.a), fixed4(c.b));
            }
        }
        Format::Css => {
            let stops: Vec<String> = colors
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{} {}", hex(*c), percent(i, colors.len())))
                .collect();
            let _ = writeln!(out, "linear-gradient(to right, {})", stops.join(", "));
        }
    }
    out
}
