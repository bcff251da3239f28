mod support;

use rampforge_core::colorspace::{delta_e, in_gamut, lab_to_srgb, parse_hex, srgb_to_lab, LabColor, SrgbColor};
use rand::Rng;

fn round_trips(c: SrgbColor) -> bool {
    lab_to_srgb(srgb_to_lab(c)) == Ok(c)
}

#[test]
fn lattice_round_trip() {
    let steps: Vec<u8> = (0..32).map(|i| (i * 255 / 31) as u8).collect();
    for &r in &steps {
        for &g in &steps {
            for &b in &steps {
                let c = SrgbColor::new(r, g, b);
                assert!(round_trips(c), "{c} does not survive LAB");
            }
        }
    }
}

#[test]
fn random_round_trip() {
    let mut r = support::rng(7);
    for _ in 0..100_000 {
        let c = SrgbColor::new(r.gen(), r.gen(), r.gen());
        assert!(round_trips(c), "{c} does not survive LAB");
    }
}

// Published D65 values (Lindbloom's calculator, 2-degree observer).
#[test]
fn reference_values() {
    let cases = [
        ("#FFFFFF", 100.0, 0.0, 0.0),
        ("#000000", 0.0, 0.0, 0.0),
        ("#FF0000", 53.2408, 80.0925, 67.2032),
        ("#00FF00", 87.7347, -86.1827, 83.1793),
        ("#0000FF", 32.2970, 79.1875, -107.8602),
        ("#808080", 53.5850, 0.0, 0.0),
    ];
    for (hex, l, a, b) in cases {
        let lab = srgb_to_lab(parse_hex(hex).unwrap());
        assert!(
            delta_e(lab, LabColor::new(l, a, b)) < 2e-3,
            "{hex}: got {lab:?}"
        );
    }
}

#[test]
fn gamut_edges() {
    assert!(in_gamut(LabColor::new(100.0, 0.0, 0.0)));
    assert!(in_gamut(LabColor::new(0.0, 0.0, 0.0)));
    assert!(!in_gamut(LabColor::new(101.0, 0.0, 0.0)));
    assert!(!in_gamut(LabColor::new(50.0, 120.0, 0.0)));
    assert!(!in_gamut(LabColor::new(f64::NAN, 0.0, 0.0)));
}
