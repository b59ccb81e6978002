//! Pinhole camera with a rigid world-from-camera pose.
//!
//! Conventions: the camera looks down +z in its own frame, pixel (ix, iy)
//! is sampled at continuous coordinates (ix + 0.5, iy + 0.5), and ray
//! directions are scaled so their z component is 1. With that scaling a
//! splat at depth d along a ray sits at z-distance d from the camera, and
//! lift/project round-trips are linear in d.

use crate::error::{Error, Result};
use crate::math::{add3, mat3_mul_vec, mat3_tmul_vec, sub3, Mat3, Vec2, Vec3};
use crate::real::Real;

pub const ROTATION_ORTHONORMAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Camera<T> {
    pub fx: T,
    pub fy: T,
    pub cx: T,
    pub cy: T,
    pub width: usize,
    pub height: usize,
    /// Rotation block of the world-from-camera transform.
    pub rotation: Mat3<T>,
    /// Translation block of the world-from-camera transform (camera origin
    /// expressed in world coordinates).
    pub translation: Vec3<T>,
}

impl<T: Real> Camera<T> {
    pub fn new(
        fx: T,
        fy: T,
        cx: T,
        cy: T,
        width: usize,
        height: usize,
        rotation: Mat3<T>,
        translation: Vec3<T>,
    ) -> Result<Self> {
        let cam = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            rotation,
            translation,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Identity-pose camera at the world origin.
    pub fn facing_z(fx: T, fy: T, cx: T, cy: T, width: usize, height: usize) -> Result<Self> {
        let eye = [
            [T::one(), T::zero(), T::zero()],
            [T::zero(), T::one(), T::zero()],
            [T::zero(), T::zero(), T::one()],
        ];
        Self::new(fx, fy, cx, cy, width, height, eye, [T::zero(); 3])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > T::zero() && self.fy > T::zero()) {
            return Err(Error::InvalidCamera(format!(
                "focal lengths must be positive (fx = {}, fy = {})",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidCamera("zero image dimension".into()));
        }
        for v in self
            .rotation
            .iter()
            .flatten()
            .chain(self.translation.iter())
        {
            if !v.is_finite() {
                return Err(Error::InvalidCamera("non-finite pose entry".into()));
            }
        }
        // R^T R = I within tolerance.
        let tol = T::of(ROTATION_ORTHONORMAL_TOL);
        for i in 0..3 {
            for j in 0..3 {
                let col_i = [self.rotation[0][i], self.rotation[1][i], self.rotation[2][i]];
                let col_j = [self.rotation[0][j], self.rotation[1][j], self.rotation[2][j]];
                let dot = crate::math::dot3(col_i, col_j);
                let expect = if i == j { T::one() } else { T::zero() };
                if (dot - expect).abs() > tol {
                    return Err(Error::InvalidCamera(format!(
                        "rotation not orthonormal: (R^T R)[{i}][{j}] = {dot}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Camera-frame ray through a continuous pixel coordinate, scaled so
    /// the z component is 1.
    pub fn ray_direction(&self, px: Vec2<T>) -> Result<Vec3<T>> {
        let w = T::of(self.width as f64);
        let h = T::of(self.height as f64);
        if !(px[0] >= T::zero() && px[0] <= w && px[1] >= T::zero() && px[1] <= h) {
            return Err(Error::OutOfBounds {
                x: px[0].to_f64(),
                y: px[1].to_f64(),
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.ray_direction_unchecked(px))
    }

    pub(crate) fn ray_direction_unchecked(&self, px: Vec2<T>) -> Vec3<T> {
        [(px[0] - self.cx) / self.fx, (px[1] - self.cy) / self.fy, T::one()]
    }

    /// Continuous sample position of pixel (ix, iy).
    pub fn pixel_center(&self, ix: usize, iy: usize) -> Vec2<T> {
        let half = T::of(0.5);
        [T::of(ix as f64) + half, T::of(iy as f64) + half]
    }

    /// Projects a camera-frame point onto the image plane. The point must
    /// have positive depth.
    pub fn project_view(&self, p: Vec3<T>) -> Option<Vec2<T>> {
        if p[2] <= T::zero() {
            return None;
        }
        Some([
            self.fx * p[0] / p[2] + self.cx,
            self.fy * p[1] / p[2] + self.cy,
        ])
    }

    /// World point to camera frame.
    pub fn world_to_view(&self, p: Vec3<T>) -> Vec3<T> {
        mat3_tmul_vec(&self.rotation, sub3(p, self.translation))
    }

    /// Camera-frame point to world.
    pub fn view_to_world(&self, p: Vec3<T>) -> Vec3<T> {
        add3(mat3_mul_vec(&self.rotation, p), self.translation)
    }

    /// World-to-view rotation (transpose of the pose rotation).
    pub fn view_rotation(&self) -> Mat3<T> {
        crate::math::mat3_transpose(&self.rotation)
    }

    pub fn cast<U: Real>(&self) -> Camera<U> {
        let r = &self.rotation;
        Camera {
            fx: U::of(self.fx.to_f64()),
            fy: U::of(self.fy.to_f64()),
            cx: U::of(self.cx.to_f64()),
            cy: U::of(self.cy.to_f64()),
            width: self.width,
            height: self.height,
            rotation: [
                [U::of(r[0][0].to_f64()), U::of(r[0][1].to_f64()), U::of(r[0][2].to_f64())],
                [U::of(r[1][0].to_f64()), U::of(r[1][1].to_f64()), U::of(r[1][2].to_f64())],
                [U::of(r[2][0].to_f64()), U::of(r[2][1].to_f64()), U::of(r[2][2].to_f64())],
            ],
            translation: [
                U::of(self.translation[0].to_f64()),
                U::of(self.translation[1].to_f64()),
                U::of(self.translation[2].to_f64()),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn test_camera() -> Camera<f64> {
        Camera::facing_z(40.0, 44.0, 16.0, 12.0, 32, 24).unwrap()
    }

    #[test]
    fn ray_at_principal_point_is_optical_axis() {
        let cam = test_camera();
        let r = cam.ray_direction([16.0, 12.0]).unwrap();
        assert_eq!(r, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn ray_one_focal_length_off_axis() {
        let cam = test_camera();
        let r = cam.ray_direction([16.0 + 40.0, 12.0]).unwrap();
        assert_eq!(r, [1.0, 0.0, 1.0]);
    }

    #[test]
    fn out_of_bounds_pixel_rejected() {
        let cam = test_camera();
        assert!(cam.ray_direction([-0.1, 5.0]).is_err());
        assert!(cam.ray_direction([5.0, 24.5]).is_err());
    }

    #[test]
    fn project_ray_round_trip_over_random_pixels() {
        // Back-projection oracle: px == project(ray * d) for any d > 0.
        let cam = test_camera();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let px = [rng.gen_range(0.0..32.0), rng.gen_range(0.0..24.0)];
            let d = rng.gen_range(0.05..50.0);
            let ray = cam.ray_direction(px).unwrap();
            let p = crate::math::scale3(ray, d);
            let back = cam.project_view(p).unwrap();
            assert_relative_eq!(back[0], px[0], epsilon = 1e-9);
            assert_relative_eq!(back[1], px[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn round_trip_at_depth_extremes() {
        let cam = test_camera();
        for d in [0.1, 1.0, 100.0] {
            let px = [3.25, 17.75];
            let ray = cam.ray_direction(px).unwrap();
            let back = cam.project_view(crate::math::scale3(ray, d)).unwrap();
            assert!((back[0] - px[0]).abs() < 1e-6 && (back[1] - px[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn non_orthonormal_rotation_rejected() {
        let mut rot = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        rot[0][0] = 1.1;
        assert!(Camera::new(10.0, 10.0, 5.0, 5.0, 10, 10, rot, [0.0; 3]).is_err());
    }

    #[test]
    fn world_view_round_trip() {
        let angle = 0.35_f64;
        let rot = crate::math::axis_angle_to_mat3([0.0, 1.0, 0.0], angle);
        let cam = Camera::new(10.0, 10.0, 5.0, 5.0, 10, 10, rot, [1.0, -2.0, 0.5]).unwrap();
        let p = [0.3, 0.7, 2.0];
        let back = cam.view_to_world(cam.world_to_view(p));
        for k in 0..3 {
            assert_relative_eq!(back[k], p[k], epsilon = 1e-12);
        }
    }
}
