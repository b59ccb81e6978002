//! Small fixed-size vector/matrix helpers and quaternion math.
//!
//! Vectors are plain arrays, matrices are row-major nested arrays.
//! Quaternions use (w, x, y, z) component order.

use crate::real::Real;

pub type Vec2<T> = [T; 2];
pub type Vec3<T> = [T; 3];
pub type Vec4<T> = [T; 4];
/// Row-major 3x3 matrix.
pub type Mat3<T> = [[T; 3]; 3];
/// Row-major 2x2 matrix.
pub type Mat2<T> = [[T; 2]; 2];

pub fn add3<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3<T: Real>(a: Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot3<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3<T: Real>(a: Vec3<T>) -> T {
    dot3(a, a).sqrt()
}

pub fn norm4<T: Real>(a: Vec4<T>) -> T {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]).sqrt()
}

pub fn normalize4<T: Real>(a: Vec4<T>) -> Vec4<T> {
    let n = norm4(a);
    [a[0] / n, a[1] / n, a[2] / n, a[3] / n]
}

pub fn mat3_transpose<T: Real>(m: &Mat3<T>) -> Mat3<T> {
    [
        [m[0][0], m[1][0], m[2][0]],
        [m[0][1], m[1][1], m[2][1]],
        [m[0][2], m[1][2], m[2][2]],
    ]
}

pub fn mat3_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn mat3_mul_vec<T: Real>(m: &Mat3<T>, v: Vec3<T>) -> Vec3<T> {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Multiplies by the transpose without materializing it.
pub fn mat3_tmul_vec<T: Real>(m: &Mat3<T>, v: Vec3<T>) -> Vec3<T> {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

pub fn mat2_det<T: Real>(m: &Mat2<T>) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Inverse of a 2x2 matrix. Returns `None` when the determinant vanishes.
pub fn mat2_inverse<T: Real>(m: &Mat2<T>) -> Option<Mat2<T>> {
    let det = mat2_det(m);
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    let inv = T::one() / det;
    Some([
        [m[1][1] * inv, -m[0][1] * inv],
        [-m[1][0] * inv, m[0][0] * inv],
    ])
}

/// Rotation matrix of a unit quaternion (w, x, y, z).
pub fn quat_to_mat3<T: Real>(q: Vec4<T>) -> Mat3<T> {
    let [w, x, y, z] = q;
    let two = T::of(2.0);
    [
        [
            T::one() - two * (y * y + z * z),
            two * (x * y - w * z),
            two * (x * z + w * y),
        ],
        [
            two * (x * y + w * z),
            T::one() - two * (x * x + z * z),
            two * (y * z - w * x),
        ],
        [
            two * (x * z - w * y),
            two * (y * z + w * x),
            T::one() - two * (x * x + y * y),
        ],
    ]
}

/// Pullback of `quat_to_mat3` at a unit quaternion: given dL/dR, returns
/// dL/dq for the unit quaternion (before any normalization chain).
pub fn quat_to_mat3_backward<T: Real>(q: Vec4<T>, d_r: &Mat3<T>) -> Vec4<T> {
    let [w, x, y, z] = q;
    let two = T::of(2.0);
    let four = T::of(4.0);
    let g = d_r;

    let dw = g[0][1] * (-two * z)
        + g[0][2] * (two * y)
        + g[1][0] * (two * z)
        + g[1][2] * (-two * x)
        + g[2][0] * (-two * y)
        + g[2][1] * (two * x);
    let dx = g[0][1] * (two * y)
        + g[0][2] * (two * z)
        + g[1][0] * (two * y)
        + g[1][1] * (-four * x)
        + g[1][2] * (-two * w)
        + g[2][0] * (two * z)
        + g[2][1] * (two * w)
        + g[2][2] * (-four * x);
    let dy = g[0][0] * (-four * y)
        + g[0][1] * (two * x)
        + g[0][2] * (two * w)
        + g[1][0] * (two * x)
        + g[1][2] * (two * z)
        + g[2][0] * (-two * w)
        + g[2][1] * (two * z)
        + g[2][2] * (-four * y);
    let dz = g[0][0] * (-four * z)
        + g[0][1] * (-two * w)
        + g[0][2] * (two * x)
        + g[1][0] * (two * w)
        + g[1][1] * (-four * z)
        + g[1][2] * (two * y)
        + g[2][0] * (two * x)
        + g[2][1] * (two * y);

    [dw, dx, dy, dz]
}

/// Projects a gradient through quaternion normalization q_hat = q / |q|.
///
/// `grad` is dL/dq_hat evaluated at the unit quaternion `q_hat`; `raw_norm`
/// is |q| of the raw quaternion being differentiated.
pub fn quat_normalize_backward<T: Real>(q_hat: Vec4<T>, grad: Vec4<T>, raw_norm: T) -> Vec4<T> {
    let dot = q_hat[0] * grad[0] + q_hat[1] * grad[1] + q_hat[2] * grad[2] + q_hat[3] * grad[3];
    [
        (grad[0] - q_hat[0] * dot) / raw_norm,
        (grad[1] - q_hat[1] * dot) / raw_norm,
        (grad[2] - q_hat[2] * dot) / raw_norm,
        (grad[3] - q_hat[3] * dot) / raw_norm,
    ]
}

/// Rotation by `angle` radians about an arbitrary unit axis (Rodrigues).
pub fn axis_angle_to_mat3<T: Real>(axis: Vec3<T>, angle: T) -> Mat3<T> {
    let (s, c) = angle.sin_cos();
    let t = T::one() - c;
    let [x, y, z] = axis;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quat_identity_is_identity_matrix() {
        let r = quat_to_mat3::<f64>([1.0, 0.0, 0.0, 0.0]);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(r[i][j], expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn quat_z_rotation_maps_x_to_y() {
        // 90 degrees about z: q = (cos45, 0, 0, sin45)
        let h = std::f64::consts::FRAC_PI_4;
        let r = quat_to_mat3([h.cos(), 0.0, 0.0, h.sin()]);
        let v = mat3_mul_vec(&r, [1.0, 0.0, 0.0]);
        assert_relative_eq!(v[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(v[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(v[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn quat_backward_matches_finite_differences() {
        let q_raw = [0.9, -0.3, 0.2, 0.4];
        let d_r: Mat3<f64> = [[0.3, -1.2, 0.7], [0.1, 0.5, -0.4], [-0.9, 0.2, 1.1]];
        let loss = |q: Vec4<f64>| -> f64 {
            let qh = normalize4(q);
            let r = quat_to_mat3(qh);
            let mut l = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    l += d_r[i][j] * r[i][j];
                }
            }
            l
        };
        let qh = normalize4(q_raw);
        let g_unit = quat_to_mat3_backward(qh, &d_r);
        let g_raw = quat_normalize_backward(qh, g_unit, norm4(q_raw));
        let h = 1e-6;
        for k in 0..4 {
            let mut qp = q_raw;
            let mut qm = q_raw;
            qp[k] += h;
            qm[k] -= h;
            let fd = (loss(qp) - loss(qm)) / (2.0 * h);
            assert_relative_eq!(g_raw[k], fd, max_relative = 1e-7);
        }
    }

    #[test]
    fn mat2_inverse_round_trip() {
        let m: Mat2<f64> = [[2.0, 0.5], [0.3, 1.5]];
        let inv = mat2_inverse(&m).unwrap();
        let id00 = m[0][0] * inv[0][0] + m[0][1] * inv[1][0];
        let id01 = m[0][0] * inv[0][1] + m[0][1] * inv[1][1];
        assert_relative_eq!(id00, 1.0, epsilon = 1e-15);
        assert_relative_eq!(id01, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn axis_angle_about_y() {
        let r = axis_angle_to_mat3([0.0, 1.0, 0.0], std::f64::consts::FRAC_PI_2);
        let v = mat3_mul_vec(&r, [0.0, 0.0, 1.0]);
        assert_relative_eq!(v[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(v[2], 0.0, epsilon = 1e-15);
    }
}
