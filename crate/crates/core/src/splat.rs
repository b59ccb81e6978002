//! Scene representation: anisotropic 3D Gaussians over a 2D background,
//! plus the pixel-aligned raw-parameter grid they are generated from.

use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::math::{add3, mat3_mul, mat3_transpose, norm4, normalize4, quat_to_mat3, Mat3, Vec3, Vec4};
use crate::real::Real;

/// Unit-norm tolerance for quaternions supplied from outside (files,
/// hand-built scenes). Normalized activations land far inside this.
pub const QUAT_UNIT_TOL: f64 = 1e-5;

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

pub fn sigmoid<T: Real>(x: T) -> T {
    // Split by sign to stay stable for large |x|.
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub fn logit<T: Real>(y: T) -> T {
    (y / (T::one() - y)).ln()
}

pub fn softplus<T: Real>(x: T) -> T {
    // ln(1 + e^x) = max(x, 0) + ln(1 + e^-|x|)
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

pub fn softplus_inverse<T: Real>(y: T) -> T {
    // x = ln(e^y - 1) = y + ln(1 - e^-y)
    y + (-(-y).exp()).ln_1p()
}

/// Derivative of softplus, i.e. the logistic function.
pub fn softplus_derivative<T: Real>(x: T) -> T {
    sigmoid(x)
}

// ---------------------------------------------------------------------------
// SplatSet
// ---------------------------------------------------------------------------

/// One Gaussian primitive. The rotation is a unit quaternion (w, x, y, z),
/// scale entries are standard deviations along the local axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splat<T> {
    pub position: Vec3<T>,
    pub rotation: Vec4<T>,
    pub scale: Vec3<T>,
    pub opacity: T,
    pub color: [T; 3],
}

/// Flat collection of splats plus an optional predicted 2D background.
#[derive(Debug, Clone, PartialEq)]
pub struct SplatSet<T> {
    pub splats: Vec<Splat<T>>,
    pub background: Option<Image<T>>,
}

impl<T: Real> SplatSet<T> {
    pub fn new(splats: Vec<Splat<T>>, background: Option<Image<T>>) -> Result<Self> {
        let set = Self { splats, background };
        set.validate()?;
        Ok(set)
    }

    pub fn empty_with_background(background: Image<T>) -> Self {
        Self {
            splats: Vec::new(),
            background: Some(background),
        }
    }

    pub fn len(&self) -> usize {
        self.splats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splats.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::of(QUAT_UNIT_TOL);
        for (i, s) in self.splats.iter().enumerate() {
            let finite = s.position.iter().all(|v| v.is_finite())
                && s.rotation.iter().all(|v| v.is_finite())
                && s.scale.iter().all(|v| v.is_finite())
                && s.opacity.is_finite()
                && s.color.iter().all(|v| v.is_finite());
            if !finite {
                return Err(Error::Validation(format!("splat {i} has non-finite values")));
            }
            if (norm4(s.rotation) - T::one()).abs() > tol {
                return Err(Error::Validation(format!(
                    "splat {i} quaternion norm {} deviates from 1 beyond {QUAT_UNIT_TOL}",
                    norm4(s.rotation)
                )));
            }
            if !(s.scale.iter().all(|&v| v > T::zero())) {
                return Err(Error::Validation(format!("splat {i} has non-positive scale")));
            }
            if !(s.opacity > T::zero() && s.opacity < T::one()) {
                return Err(Error::Validation(format!(
                    "splat {i} opacity {} outside (0, 1)",
                    s.opacity
                )));
            }
        }
        if let Some(bg) = &self.background {
            if !bg.is_finite() {
                return Err(Error::Validation("background has non-finite values".into()));
            }
        }
        Ok(())
    }

    /// Mean splat position, the default pivot for orbit sampling.
    pub fn mean_position(&self) -> Vec3<T> {
        if self.splats.is_empty() {
            return [T::zero(); 3];
        }
        let mut sum = [T::zero(); 3];
        for s in &self.splats {
            sum = add3(sum, s.position);
        }
        crate::math::scale3(sum, T::one() / T::of(self.splats.len() as f64))
    }

    pub fn cast<U: Real>(&self) -> SplatSet<U> {
        SplatSet {
            splats: self
                .splats
                .iter()
                .map(|s| Splat {
                    position: [
                        U::of(s.position[0].to_f64()),
                        U::of(s.position[1].to_f64()),
                        U::of(s.position[2].to_f64()),
                    ],
                    rotation: [
                        U::of(s.rotation[0].to_f64()),
                        U::of(s.rotation[1].to_f64()),
                        U::of(s.rotation[2].to_f64()),
                        U::of(s.rotation[3].to_f64()),
                    ],
                    scale: [
                        U::of(s.scale[0].to_f64()),
                        U::of(s.scale[1].to_f64()),
                        U::of(s.scale[2].to_f64()),
                    ],
                    opacity: U::of(s.opacity.to_f64()),
                    color: [
                        U::of(s.color[0].to_f64()),
                        U::of(s.color[1].to_f64()),
                        U::of(s.color[2].to_f64()),
                    ],
                })
                .collect(),
            background: self.background.as_ref().map(|bg| bg.cast()),
        }
    }
}

/// Covariance of a splat: R diag(s)^2 R^T. Symmetric and PSD by
/// construction; the determinant equals (s0 s1 s2)^2.
pub fn covariance<T: Real>(rotation: Vec4<T>, scale: Vec3<T>) -> Result<Mat3<T>> {
    if (norm4(rotation) - T::one()).abs() > T::of(QUAT_UNIT_TOL) {
        return Err(Error::Validation(format!(
            "covariance: quaternion norm {} deviates from 1",
            norm4(rotation)
        )));
    }
    if !scale.iter().all(|&v| v > T::zero()) {
        return Err(Error::Validation("covariance: non-positive scale".into()));
    }
    Ok(covariance_unchecked(rotation, scale))
}

pub(crate) fn covariance_unchecked<T: Real>(rotation: Vec4<T>, scale: Vec3<T>) -> Mat3<T> {
    let r = quat_to_mat3(rotation);
    let mut rs = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            rs[i][j] = r[i][j] * scale[j] * scale[j];
        }
    }
    mat3_mul(&rs, &mat3_transpose(&r))
}

// ---------------------------------------------------------------------------
// PixelSplatGrid
// ---------------------------------------------------------------------------

/// Raw per-pixel splat parameters, one splat per source-image pixel.
///
/// Activations applied by [`lift_grid`]: sigmoid for opacity and color,
/// exp for scale, softplus for depth, L2 normalization for the rotation
/// quaternion. The static offset and background are used directly.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSplatGrid<T> {
    width: usize,
    height: usize,
    pub opacity_raw: Vec<T>,
    /// 3 per pixel (log-scale).
    pub scale_raw: Vec<T>,
    pub depth_raw: Vec<T>,
    /// 3 per pixel, meters.
    pub static_offset: Vec<T>,
    /// 4 per pixel (w, x, y, z), unnormalized.
    pub rotation_raw: Vec<T>,
    /// 3 per pixel (logit-color).
    pub color_raw: Vec<T>,
    pub background: Image<T>,
}

impl<T: Real> PixelSplatGrid<T> {
    pub fn new(width: usize, height: usize, background: Image<T>) -> Result<Self> {
        if background.width() != width || background.height() != height {
            return Err(Error::ShapeMismatch {
                context: "PixelSplatGrid::new",
                expected: format!("{width}x{height} background"),
                actual: format!("{}x{} background", background.width(), background.height()),
            });
        }
        let n = width * height;
        let mut rotation_raw = vec![T::zero(); 4 * n];
        for q in rotation_raw.chunks_exact_mut(4) {
            q[0] = T::one();
        }
        Ok(Self {
            width,
            height,
            opacity_raw: vec![T::zero(); n],
            scale_raw: vec![T::zero(); 3 * n],
            depth_raw: vec![T::zero(); n],
            static_offset: vec![T::zero(); 3 * n],
            rotation_raw,
            color_raw: vec![T::zero(); 3 * n],
            background,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }
}

/// Lifts raw per-pixel parameters to world-space splats: each pixel's
/// splat sits at `ray * depth + offset` in the camera frame and is carried
/// to world space by the camera pose. Splat order is row-major pixel
/// order, so splat k maps to pixel (k mod W, k div W).
pub fn lift_grid<T: Real>(grid: &PixelSplatGrid<T>, camera: &Camera<T>) -> Result<SplatSet<T>> {
    if grid.width() != camera.width || grid.height() != camera.height {
        return Err(Error::ShapeMismatch {
            context: "lift_grid",
            expected: format!("{}x{} grid", camera.width, camera.height),
            actual: format!("{}x{} grid", grid.width(), grid.height()),
        });
    }
    let mut splats = Vec::with_capacity(grid.pixel_count());
    for iy in 0..grid.height() {
        for ix in 0..grid.width() {
            let k = iy * grid.width() + ix;
            let ray = camera.ray_direction_unchecked(camera.pixel_center(ix, iy));
            let depth = softplus(grid.depth_raw[k]);
            let offset = [
                grid.static_offset[3 * k],
                grid.static_offset[3 * k + 1],
                grid.static_offset[3 * k + 2],
            ];
            let view_pos = add3(crate::math::scale3(ray, depth), offset);
            let position = camera.view_to_world(view_pos);
            let rotation = normalize4([
                grid.rotation_raw[4 * k],
                grid.rotation_raw[4 * k + 1],
                grid.rotation_raw[4 * k + 2],
                grid.rotation_raw[4 * k + 3],
            ]);
            let scale = [
                grid.scale_raw[3 * k].exp(),
                grid.scale_raw[3 * k + 1].exp(),
                grid.scale_raw[3 * k + 2].exp(),
            ];
            splats.push(Splat {
                position,
                rotation,
                scale,
                opacity: sigmoid(grid.opacity_raw[k]),
                color: [
                    sigmoid(grid.color_raw[3 * k]),
                    sigmoid(grid.color_raw[3 * k + 1]),
                    sigmoid(grid.color_raw[3 * k + 2]),
                ],
            });
        }
    }
    Ok(SplatSet {
        splats,
        background: Some(grid.background.clone()),
    })
}
