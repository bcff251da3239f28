mod support;

use std::time::Instant;

use rampforge_core::colorspace::{delta_e, in_gamut, parse_hex, srgb_to_lab, LabColor};
use rampforge_core::curve::{collapse_duplicates, fit_and_resample, RawRamp, Spline, CONTROL_POINTS};
use rand::Rng;

fn sample_corpus() -> Vec<RawRamp> {
    let text = include_str!("../../rampforge/data/sample_corpus.txt");
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let colors = f[3].split(';').map(|h| srgb_to_lab(parse_hex(h).unwrap())).collect();
            support::raw(f[0], colors)
        })
        .collect()
}

fn random_ramp(r: &mut impl Rng, i: usize) -> RawRamp {
    let n = r.gen_range(5..=13);
    let mut colors = Vec::new();
    while colors.len() < n {
        let l = 5.0 + 90.0 * colors.len() as f64 / (n - 1) as f64;
        let c = LabColor::new(l, r.gen_range(-40.0..40.0), r.gen_range(-40.0..40.0));
        if in_gamut(c) {
            colors.push(c);
        }
    }
    support::raw(&format!("r{i}"), colors)
}

/// Arc-length position of each control point along a densely sampled copy
/// of the fitted spline.
fn arc_positions(ramp: &RawRamp, points: &[LabColor]) -> Vec<f64> {
    let spline = Spline::fit(&collapse_duplicates(&ramp.colors));
    const N: usize = 200_000;
    let dense: Vec<LabColor> = (0..=N).map(|j| spline.eval(spline.domain() * j as f64 / N as f64)).collect();
    let mut cum = vec![0.0];
    for w in dense.windows(2) {
        cum.push(cum.last().unwrap() + delta_e(w[0], w[1]));
    }
    points
        .iter()
        .map(|p| {
            let (j, _) = dense
                .iter()
                .enumerate()
                .map(|(j, q)| (j, delta_e(*p, *q)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            cum[j]
        })
        .collect()
}

fn assert_uniform(ramp: &RawRamp) {
    let c = fit_and_resample(ramp).unwrap();
    assert_eq!(c.points.len(), CONTROL_POINTS);
    let s = arc_positions(ramp, &c.points);
    let gaps: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    for g in &gaps {
        assert!((g - mean).abs() <= 0.01 * mean, "{}: gaps {gaps:?}", ramp.id);
    }
}

#[test]
fn sample_corpus_spacing_is_uniform() {
    let ramps = sample_corpus();
    assert!(ramps.len() > 30);
    for r in &ramps {
        assert_uniform(r);
    }
}

#[test]
fn random_ramp_spacing_is_uniform() {
    let mut r = support::rng(11);
    for i in 0..40 {
        assert_uniform(&random_ramp(&mut r, i));
    }
}

#[test]
fn straight_line_is_evenly_divided() {
    let colors: Vec<LabColor> = (0..5).map(|i| LabColor::new(20.0 + 15.0 * i as f64, 0.0, 0.0)).collect();
    let c = fit_and_resample(&support::raw("line", colors)).unwrap();
    for (k, p) in c.points.iter().enumerate() {
        assert!((p.l - (20.0 + k as f64 * 60.0 / 8.0)).abs() < 1e-6, "{k}: {p:?}");
        assert!(p.a.abs() < 1e-9 && p.b.abs() < 1e-9);
    }
}

#[test]
fn spline_interpolates_its_knots() {
    let mut r = support::rng(5);
    for i in 0..20 {
        let ramp = random_ramp(&mut r, i);
        let spline = Spline::fit(&ramp.colors);
        let mut t = 0.0;
        for (j, c) in ramp.colors.iter().enumerate() {
            if j > 0 {
                t += delta_e(ramp.colors[j - 1], *c);
            }
            assert!(delta_e(spline.eval(t), *c) < 1e-9);
        }
    }
}

#[test]
fn corpus_scale_runtime() {
    let mut r = support::rng(3);
    let ramps: Vec<RawRamp> = (0..222).map(|i| random_ramp(&mut r, i)).collect();
    let t = Instant::now();
    for ramp in &ramps {
        fit_and_resample(ramp).unwrap();
    }
    assert!(t.elapsed().as_secs_f64() < 5.0);
}
