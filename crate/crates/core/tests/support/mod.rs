//! Independent reference implementations and synthetic data shared by the
//! integration tests. Nothing here calls into the code under test except
//! for plain data types.

#![allow(dead_code)]

use rampforge_core::colorspace::{in_gamut, LabColor};
use rampforge_core::curve::{RampCurve, RampKind, RampSource, RawRamp, CONTROL_POINTS};
use rampforge_core::modelbook::RampModel;
use rampforge_core::clustering::Method;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn dist(p: LabColor, q: LabColor) -> f64 {
    ((p.l - q.l).powi(2) + (p.a - q.a).powi(2) + (p.b - q.b).powi(2)).sqrt()
}

/// Random-walk curve with increasing lightness and wandering chroma.
pub fn random_curve(r: &mut impl Rng) -> RampCurve {
    let mut p = LabColor::new(r.gen_range(5.0..30.0), r.gen_range(-30.0..30.0), r.gen_range(-30.0..30.0));
    let mut pts = [p; CONTROL_POINTS];
    for slot in pts.iter_mut().skip(1) {
        p = LabColor::new(
            p.l + r.gen_range(2.0..9.0),
            p.a + r.gen_range(-12.0..12.0),
            p.b + r.gen_range(-12.0..12.0),
        );
        *slot = p;
    }
    RampCurve::new(pts)
}

/// A random proper rotation matrix (via a random unit quaternion).
pub fn random_rotation(r: &mut impl Rng) -> [[f64; 3]; 3] {
    let mut q: [f64; 4] = [0.0; 4];
    loop {
        for v in q.iter_mut() {
            *v = r.gen_range(-1.0..1.0);
        }
        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            q.iter_mut().for_each(|v| *v /= n);
            break;
        }
    }
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn rotate(c: &RampCurve, m: &[[f64; 3]; 3], t: [f64; 3]) -> RampCurve {
    RampCurve::new(c.points.map(|p| {
        let v = [p.l, p.a, p.b];
        let row = |r: [f64; 3]| r[0] * v[0] + r[1] * v[1] + r[2] * v[2];
        LabColor::new(row(m[0]) + t[0], row(m[1]) + t[1], row(m[2]) + t[2])
    }))
}

/// Tightness by the literal definition: average over ordered pairs of
/// distinct curves of the summed point-to-point distances.
pub fn tightness_oracle(curves: &[RampCurve]) -> f64 {
    let n = curves.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for x in 0..CONTROL_POINTS {
                total += dist(curves[i].points[x], curves[j].points[x]);
            }
        }
    }
    total / (n * (n - 1)) as f64
}

/// Counts interior strict extrema per channel by comparing each value with
/// both neighbours.
pub fn extrema_oracle(c: &RampCurve) -> u32 {
    let mut n = 0;
    for ch in 0..3 {
        let v: Vec<f64> = c.points.iter().map(|p| [p.l, p.a, p.b][ch]).collect();
        for i in 1..v.len() - 1 {
            let peak = v[i] > v[i - 1] && v[i] > v[i + 1];
            let valley = v[i] < v[i - 1] && v[i] < v[i + 1];
            if peak || valley {
                n += 1;
            }
        }
    }
    n
}

/// Turning angle at each interior point, from the law of cosines.
pub fn turning_angles_oracle(c: &RampCurve) -> Vec<f64> {
    (1..CONTROL_POINTS - 1)
        .map(|i| {
            let (a, b, c) = (c.points[i - 1], c.points[i], c.points[i + 1]);
            let (ab, bc, ac) = (dist(a, b), dist(b, c), dist(a, c));
            // Interior angle at b, turned into the deflection angle.
            let cos_b = ((ab * ab + bc * bc - ac * ac) / (2.0 * ab * bc)).clamp(-1.0, 1.0);
            std::f64::consts::PI - cos_b.acos()
        })
        .collect()
}

/// All set partitions of `0..n` into exactly `k` non-empty blocks, as
/// restricted growth strings.
pub fn partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(i: usize, n: usize, k: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            if max == k {
                out.push(cur.clone());
            }
            return;
        }
        // Prune: not enough positions left to open the missing blocks.
        if k - max > n - i {
            return;
        }
        for b in 0..=max.min(k - 1) {
            cur.push(b);
            go(i + 1, n, k, max.max(b + 1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Within-cluster sum of squared distances to the block means.
pub fn sse(rows: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let d = rows[0].len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (r, &l) in rows.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(r) {
            *s += v;
        }
    }
    rows.iter()
        .zip(labels)
        .map(|(r, &l)| {
            r.iter()
                .zip(&sums[l])
                .map(|(v, s)| (v - s / counts[l] as f64).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Canonical relabelling (first appearance order) for comparing partitions.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Largest in-gamut chroma along a hue at fixed L*, by a fine linear scan.
pub fn chroma_scan(l: f64, hue: f64, step: f64) -> f64 {
    let mut best = 0.0;
    let mut c = 0.0;
    while c <= 200.0 {
        if in_gamut(LabColor::new(l, c * hue.cos(), c * hue.sin())) {
            best = c;
        } else {
            break;
        }
        c += step;
    }
    best
}

/// A curve family: a straight line of the given length and hue with a
/// bend of the given strength, plus small per-member jitter.
pub fn family_member(r: &mut impl Rng, length: f64, hue: f64, bend: f64, jitter: f64) -> RampCurve {
    let mut noise = || if jitter > 0.0 { r.gen_range(-jitter..jitter) } else { 0.0 };
    RampCurve::new(std::array::from_fn(|i| {
        let t = i as f64 / 8.0;
        let along = length * t;
        let off = bend * (std::f64::consts::PI * t).sin();
        LabColor::new(
            15.0 + along * 0.8 + noise(),
            along * 0.6 * hue.cos() - off * hue.sin() + noise(),
            along * 0.6 * hue.sin() + off * hue.cos() + noise(),
        )
    }))
}

/// `per` members of each of the given `(length, hue, bend)` families.
pub fn families(seed: u64, shapes: &[(f64, f64, f64)], per: usize, jitter: f64) -> (Vec<RampCurve>, Vec<usize>) {
    let mut r = rng(seed);
    let mut curves = Vec::new();
    let mut truth = Vec::new();
    for (f, &(len, hue, bend)) in shapes.iter().enumerate() {
        for _ in 0..per {
            curves.push(family_member(&mut r, len, hue, bend, jitter));
            truth.push(f);
        }
    }
    (curves, truth)
}

pub fn raw(id: &str, colors: Vec<LabColor>) -> RawRamp {
    RawRamp {
        id: id.into(),
        source: RampSource::Other,
        kind: RampKind::Sequential,
        colors,
    }
}

/// A model with a gentle, in-gamut-friendly shape and a monotone profile.
pub fn random_model(r: &mut impl Rng, id: &str) -> RampModel {
    let l0 = r.gen_range(15.0..40.0);
    let dl = r.gen_range(3.0..6.0);
    let hue: f64 = r.gen_range(0.0..std::f64::consts::TAU);
    let bend = r.gen_range(-8.0..8.0);
    let shape = std::array::from_fn(|i| {
        let t = i as f64 - 4.0;
        LabColor::new(
            l0 + dl * i as f64,
            2.0 * t * hue.cos() - bend * (t / 4.0).powi(2) * hue.sin(),
            2.0 * t * hue.sin() + bend * (t / 4.0).powi(2) * hue.cos(),
        )
    });
    RampModel {
        id: id.into(),
        method: Method::KMeans,
        l_profile: std::array::from_fn(|i: usize| shape[i].l),
        shape,
        cluster_size: 2,
        member_ids: vec!["a".into(), "b".into()],
    }
}

/// Model with `l_profile = 10, 20, ..., 90`.
pub fn uniform_model() -> RampModel {
    let shape = std::array::from_fn(|i| {
        let t = i as f64;
        LabColor::new(10.0 + 10.0 * t, 3.0 * t - 12.0, 8.0 - 2.0 * t)
    });
    RampModel {
        id: "uniform".into(),
        method: Method::KMeans,
        shape,
        l_profile: std::array::from_fn(|i| 10.0 + 10.0 * i as f64),
        cluster_size: 2,
        member_ids: vec!["a".into(), "b".into()],
    }
}

/// CIE76 distance matrix of a color list.
pub fn delta_matrix(colors: &[LabColor]) -> Vec<f64> {
    colors
        .iter()
        .flat_map(|p| colors.iter().map(move |q| dist(*p, *q)))
        .collect()
}
