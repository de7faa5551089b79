//! Deterministic direction samples on the unit sphere.

use std::f64::consts::PI;

/// Fibonacci lattice of `n` points; `offset` rotates the lattice about the
/// z axis so that two lattices with different offsets share no points.
pub fn fibonacci(n: usize, offset: f64) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64 + offset;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// `+e1, -e1, +e2, -e2, +e3, -e3`.
pub fn axes() -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(6);
    for k in 0..3 {
        for s in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[k] = s;
            out.push(v);
        }
    }
    out
}

/// `count` equally spaced unit vectors on the great circle orthogonal to `normal`.
/// Empty when `normal` vanishes.
pub fn great_circle(normal: [f64; 3], count: usize) -> Vec<[f64; 3]> {
    let Some((e1, e2)) = orthonormal_complement(normal) else {
        return Vec::new();
    };
    (0..count)
        .map(|k| {
            let t = PI * k as f64 / count as f64;
            let (s, c) = t.sin_cos();
            [
                c * e1[0] + s * e2[0],
                c * e1[1] + s * e2[1],
                c * e1[2] + s * e2[2],
            ]
        })
        .collect()
}

/// Two orthonormal vectors spanning the plane orthogonal to `v`, built from
/// the standard basis vectors with the largest residual after projection.
pub fn orthonormal_complement(v: [f64; 3]) -> Option<([f64; 3], [f64; 3])> {
    let nv = norm(v);
    if nv == 0.0 {
        return None;
    }
    let n = scale(v, 1.0 / nv);
    let mut cand: Vec<[f64; 3]> = (0..3)
        .map(|k| {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            let d = dot(e, n);
            [e[0] - d * n[0], e[1] - d * n[1], e[2] - d * n[2]]
        })
        .collect();
    // stable: ties keep the lower axis first
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| norm(cand[b]).partial_cmp(&norm(cand[a])).unwrap().then(a.cmp(&b)));
    let (i, j) = if order[0] < order[1] {
        (order[0], order[1])
    } else {
        (order[1], order[0])
    };
    let e1 = scale(cand[i], 1.0 / norm(cand[i]));
    let w = cand.swap_remove(j);
    let d = dot(w, e1);
    let w = [w[0] - d * e1[0], w[1] - d * e1[1], w[2] - d * e1[2]];
    let e2 = scale(w, 1.0 / norm(w));
    Some((e1, e2))
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fibonacci_points_are_unit_and_distinct() {
        let pts = fibonacci(200, 0.0);
        assert_eq!(pts.len(), 200);
        for p in &pts {
            assert!((norm(*p) - 1.0).abs() < 1e-14);
        }
        let shifted = fibonacci(200, 0.5);
        for (a, b) in pts.iter().zip(&shifted) {
            assert!(norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]]) > 1e-3);
        }
    }

    #[test]
    fn complement_of_axis_keeps_axis_order() {
        let (e1, e2) = orthonormal_complement([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(e1, [1.0, 0.0, 0.0]);
        assert_eq!(e2, [0.0, 1.0, 0.0]);
        let (e1, e2) = orthonormal_complement([0.0, 1.0, 0.0]).unwrap();
        assert_eq!(e1, [1.0, 0.0, 0.0]);
        assert_eq!(e2, [0.0, 0.0, 1.0]);
        assert!(orthonormal_complement([0.0; 3]).is_none());
    }

    #[test]
    fn great_circle_is_orthogonal() {
        let n = [0.3, -0.4, 0.8];
        for v in great_circle(n, 9) {
            assert!(dot(v, n).abs() < 1e-15);
            assert!((norm(v) - 1.0).abs() < 1e-15);
        }
    }
}
