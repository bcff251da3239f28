//! Fixed-size linear algebra used by alignment, sphere fitting and the
//! elastic metric.

use alloc::vec::Vec;

use libm::{cos, fabs, sin, sqrt};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    sqrt(dot(a, a))
}

pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn transpose(m: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = m[j][i];
        }
    }
    out
}

pub fn det(m: &Mat3) -> f64 {
    dot(m[0], cross(m[1], m[2]))
}

/// Rotation by `angle` radians about the unit vector `axis` (Rodrigues).
pub fn axis_angle(axis: Vec3, angle: f64) -> Mat3 {
    let (s, c) = (sin(angle), cos(angle));
    let t = 1.0 - c;
    let [x, y, z] = axis;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

/// The minimal-angle rotation taking the direction of `from` onto the
/// direction of `to`. Both must be non-zero.
pub fn rotation_between(from: Vec3, to: Vec3) -> Mat3 {
    let f = scale(from, 1.0 / norm(from));
    let t = scale(to, 1.0 / norm(to));
    let c = dot(f, t).clamp(-1.0, 1.0);
    let axis = cross(f, t);
    let s = norm(axis);
    if s > 1e-12 {
        return axis_angle(scale(axis, 1.0 / s), libm::atan2(s, c));
    }
    if c > 0.0 {
        return IDENTITY;
    }
    // Antiparallel: half turn about any axis perpendicular to `f`.
    let helper = if fabs(f[0]) < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let perp = cross(f, helper);
    axis_angle(scale(perp, 1.0 / norm(perp)), core::f64::consts::PI)
}

/// Solves the dense `n x n` system `a x = b` for several right-hand sides by
/// Gaussian elimination with partial pivoting. `a` is row-major. Returns
/// `None` when a pivot falls below `tol` relative to the largest entry.
pub fn solve_dense<const R: usize>(
    mut a: Vec<f64>,
    mut b: Vec<[f64; R]>,
    n: usize,
    tol: f64,
) -> Option<Vec<[f64; R]>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(fabs(*v)));
    if scale == 0.0 {
        return None;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| fabs(a[i * n + col]).total_cmp(&fabs(a[j * n + col])))
            .unwrap_or(col);
        if fabs(a[pivot * n + col]) <= tol * scale {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        let p = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            for r in 0..R {
                b[row][r] -= f * b[col][r];
            }
        }
    }
    for col in (0..n).rev() {
        for r in 0..R {
            let mut acc = b[col][r];
            for k in col + 1..n {
                acc -= a[col * n + k] * b[k][r];
            }
            b[col][r] = acc / a[col * n + col];
        }
    }
    Some(b)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues and the matching eigenvectors (as columns of the
/// second array, i.e. `vectors[row][k]` belongs to `values[k]`).
pub fn jacobi_eigen<const N: usize>(m: &[[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = *m;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..N {
            diag += a[i][i] * a[i][i];
            for j in i + 1..N {
                off += a[i][j] * a[i][j];
            }
        }
        if off == 0.0 || off <= 1e-32 * diag {
            break;
        }
        for p in 0..N {
            for q in p + 1..N {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (fabs(theta) + sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                // A <- J^T A J with J the (p, q) plane rotation.
                for k in 0..N {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    (core::array::from_fn(|i| a[i][i]), v)
}

/// The proper rotation `R` minimising `sum |dst_k - R src_k|^2` (Horn's
/// quaternion method). Point sets are used as given, without centring.
pub fn optimal_rotation(src: &[Vec3], dst: &[Vec3]) -> Mat3 {
    let mut s = [[0.0; 3]; 3];
    for (x, y) in src.iter().zip(dst) {
        for a in 0..3 {
            for b in 0..3 {
                s[a][b] += x[a] * y[b];
            }
        }
    }
    let [[sxx, sxy, sxz], [syx, syy, syz], [szx, szy, szz]] = s;
    let n = [
        [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
        [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
        [szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy],
        [sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz],
    ];
    let (values, vectors) = jacobi_eigen(&n);
    let best = (0..4)
        .max_by(|&i, &j| values[i].total_cmp(&values[j]).then(j.cmp(&i)))
        .unwrap_or(0);
    let q: [f64; 4] = core::array::from_fn(|r| vectors[r][best]);
    let qn = sqrt(q.iter().map(|v| v * v).sum::<f64>());
    let [w, x, y, z] = q.map(|v| v / qn);
    [
        [w * w + x * x - y * y - z * z, 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), w * w - x * x + y * y - z * z, 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), w * w - x * x - y * y + z * z],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_between_maps_direction() {
        let cases = [
            ([1.0, 2.0, 3.0], [0.0, 0.0, 1.0]),
            ([1.0, 0.0, 0.0], [-2.0, 0.0, 0.0]),
            ([0.0, 1.0, 0.0], [0.0, 5.0, 0.0]),
            ([0.3, -0.4, 0.1], [-0.3, 0.4, -0.1]),
        ];
        for (from, to) in cases {
            let r = rotation_between(from, to);
            let mapped = mat_vec(&r, from);
            let want = scale(to, norm(from) / norm(to));
            for k in 0..3 {
                assert!((mapped[k] - want[k]).abs() < 1e-12, "{from:?} -> {to:?}");
            }
            assert!((det(&r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_solve_matches_known_solution() {
        let a = alloc::vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let b = alloc::vec![[8.0], [-11.0], [-3.0]];
        let x = solve_dense(a, b, 3, 1e-14).unwrap();
        for (got, want) in x.iter().zip([2.0, 3.0, -1.0]) {
            assert!((got[0] - want).abs() < 1e-12);
        }
        assert!(solve_dense(alloc::vec![1.0, 2.0, 2.0, 4.0], alloc::vec![[1.0], [2.0]], 2, 1e-12)
            .is_none());
    }

    #[test]
    fn jacobi_diagonalises() {
        let m = [[4.0, 1.0, -2.0], [1.0, 2.0, 0.5], [-2.0, 0.5, 3.0]];
        let (vals, vecs) = jacobi_eigen(&m);
        for k in 0..3 {
            let v = [vecs[0][k], vecs[1][k], vecs[2][k]];
            let mv = mat_vec(&m, v);
            for r in 0..3 {
                assert!((mv[r] - vals[k] * v[r]).abs() < 1e-12);
            }
        }
        assert!((vals.iter().sum::<f64>() - 9.0).abs() < 1e-12);
    }

    #[test]
    fn horn_recovers_rotation() {
        let r = axis_angle([0.0, 0.6, 0.8], 2.1);
        let src: Vec<Vec3> = (0..8)
            .map(|i| {
                let t = i as f64;
                [t, (t * 0.7).sin() * 3.0, 1.0 - t * t * 0.1]
            })
            .collect();
        let dst: Vec<Vec3> = src.iter().map(|p| mat_vec(&r, *p)).collect();
        let got = optimal_rotation(&src, &dst);
        for i in 0..3 {
            for j in 0..3 {
                assert!((got[i][j] - r[i][j]).abs() < 1e-12);
            }
        }
        assert!((det(&got) - 1.0).abs() < 1e-12);
    }
}
