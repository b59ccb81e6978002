//! Perspective projection of 3D Gaussians to screen-space 2D Gaussians
//! via the first-order (EWA) approximation.

use crate::camera::Camera;
use crate::math::{mat2_inverse, mat3_mul, mat3_transpose, Mat2, Vec2};
use crate::real::Real;
use crate::splat::{covariance_unchecked, SplatSet};

use super::{CUTOFF_MAHALANOBIS_SQ, LOW_PASS, TILE_SIZE, Z_NEAR};

/// A splat after projection to screen space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSplat<T> {
    /// Screen-space mean in continuous pixel coordinates.
    pub mean2d: Vec2<T>,
    /// Screen-space covariance (pixels^2), low-pass regularized.
    pub cov2d: Mat2<T>,
    /// Camera-frame z of the splat center.
    pub view_depth: T,
    pub opacity: T,
    pub color: [T; 3],
    /// Index into the source SplatSet.
    pub source: u32,
}

/// Result of projecting a whole SplatSet.
#[derive(Debug, Clone)]
pub struct Projection<T> {
    pub splats: Vec<ProjectedSplat<T>>,
    /// Number of splats dropped by the near-plane cull.
    pub culled: usize,
}

/// Projects every splat with positive view depth; splats with
/// `z <= Z_NEAR` are culled silently (the count is reported).
pub fn project<T: Real>(splats: &SplatSet<T>, camera: &Camera<T>) -> Projection<T> {
    let z_near = T::of(Z_NEAR);
    let low_pass = T::of(LOW_PASS);
    let view_rot = camera.view_rotation();
    let mut out = Vec::with_capacity(splats.len());
    let mut culled = 0usize;
    for (i, s) in splats.splats.iter().enumerate() {
        let pv = camera.world_to_view(s.position);
        let z = pv[2];
        if z <= z_near {
            culled += 1;
            continue;
        }
        let mean2d = [
            camera.fx * pv[0] / z + camera.cx,
            camera.fy * pv[1] / z + camera.cy,
        ];
        let cov_world = covariance_unchecked(s.rotation, s.scale);
        let cov_view = mat3_mul(&mat3_mul(&view_rot, &cov_world), &mat3_transpose(&view_rot));
        // J is the Jacobian of the pinhole projection at the splat center.
        let zz = z * z;
        let j00 = camera.fx / z;
        let j02 = -camera.fx * pv[0] / zz;
        let j11 = camera.fy / z;
        let j12 = -camera.fy * pv[1] / zz;
        // cov2d = J cov_view J^T with J = [[j00, 0, j02], [0, j11, j12]].
        let a = [
            [
                j00 * cov_view[0][0] + j02 * cov_view[2][0],
                j00 * cov_view[0][1] + j02 * cov_view[2][1],
                j00 * cov_view[0][2] + j02 * cov_view[2][2],
            ],
            [
                j11 * cov_view[1][0] + j12 * cov_view[2][0],
                j11 * cov_view[1][1] + j12 * cov_view[2][1],
                j11 * cov_view[1][2] + j12 * cov_view[2][2],
            ],
        ];
        let cov2d = [
            [a[0][0] * j00 + a[0][2] * j02 + low_pass, a[0][1] * j11 + a[0][2] * j12],
            [a[1][0] * j00 + a[1][2] * j02, a[1][1] * j11 + a[1][2] * j12 + low_pass],
        ];
        out.push(ProjectedSplat {
            mean2d,
            cov2d,
            view_depth: z,
            opacity: s.opacity,
            color: s.color,
            source: i as u32,
        });
    }
    Projection {
        splats: out,
        culled,
    }
}

/// Projected splat plus the derived quantities both render paths share:
/// the inverse covariance and the conservative pixel bounds of the
/// 3-sigma footprint.
#[derive(Debug, Clone)]
pub(crate) struct PreparedSplat<T> {
    pub proj: ProjectedSplat<T>,
    pub conic: Mat2<T>,
    pub x_lo: usize,
    pub x_hi: usize,
    pub y_lo: usize,
    pub y_hi: usize,
    /// False when the footprint misses the image entirely.
    pub on_screen: bool,
}

#[derive(Debug)]
pub(crate) struct Prepared<T> {
    pub splats: Vec<PreparedSplat<T>>,
    /// Tile bins: indices into `splats`, sorted by (view_depth, source).
    pub bins: Vec<Vec<u32>>,
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub culled: usize,
}

impl<T: Real> Prepared<T> {
    pub fn tile_pixel_range(&self, tile: usize, width: usize, height: usize) -> (usize, usize, usize, usize) {
        let tx = tile % self.tiles_x;
        let ty = tile / self.tiles_x;
        let x0 = tx * TILE_SIZE;
        let y0 = ty * TILE_SIZE;
        (x0, y0, (x0 + TILE_SIZE).min(width), (y0 + TILE_SIZE).min(height))
    }
}

pub(crate) fn prepare<T: Real>(splats: &SplatSet<T>, camera: &Camera<T>) -> Prepared<T> {
    let projection = project(splats, camera);
    let width = camera.width;
    let height = camera.height;
    let tiles_x = width.div_ceil(TILE_SIZE);
    let tiles_y = height.div_ceil(TILE_SIZE);
    let three = T::of(3.0);

    let prepared: Vec<PreparedSplat<T>> = projection
        .splats
        .into_iter()
        .map(|proj| {
            // The conic is the inverse 2D covariance; the low-pass term keeps
            // the determinant strictly positive.
            let conic = mat2_inverse(&proj.cov2d).expect("low-pass keeps cov2d invertible");
            // Exact axis-aligned bounds of the 3-sigma ellipse, padded by a
            // pixel to absorb rounding in the center-offset test.
            let rx = three * proj.cov2d[0][0].sqrt();
            let ry = three * proj.cov2d[1][1].sqrt();
            let x_lo_f = (proj.mean2d[0] - rx - T::of(0.5)).floor().to_f64();
            let x_hi_f = (proj.mean2d[0] + rx - T::of(0.5)).ceil().to_f64();
            let y_lo_f = (proj.mean2d[1] - ry - T::of(0.5)).floor().to_f64();
            let y_hi_f = (proj.mean2d[1] + ry - T::of(0.5)).ceil().to_f64();
            let on_screen = x_hi_f >= 0.0
                && y_hi_f >= 0.0
                && x_lo_f < width as f64
                && y_lo_f < height as f64;
            let clamp = |v: f64, hi: usize| -> usize {
                if v < 0.0 {
                    0
                } else if v >= hi as f64 {
                    hi - 1
                } else {
                    v as usize
                }
            };
            PreparedSplat {
                x_lo: clamp(x_lo_f, width),
                x_hi: clamp(x_hi_f, width),
                y_lo: clamp(y_lo_f, height),
                y_hi: clamp(y_hi_f, height),
                on_screen,
                proj,
                conic,
            }
        })
        .collect();

    let mut bins: Vec<Vec<u32>> = vec![Vec::new(); tiles_x * tiles_y];
    for (idx, ps) in prepared.iter().enumerate() {
        if !ps.on_screen {
            continue;
        }
        for ty in ps.y_lo / TILE_SIZE..=ps.y_hi / TILE_SIZE {
            for tx in ps.x_lo / TILE_SIZE..=ps.x_hi / TILE_SIZE {
                bins[ty * tiles_x + tx].push(idx as u32);
            }
        }
    }
    for bin in &mut bins {
        bin.sort_by(|&a, &b| {
            let sa = &prepared[a as usize].proj;
            let sb = &prepared[b as usize].proj;
            sa.view_depth
                .partial_cmp(&sb.view_depth)
                .expect("finite view depth")
                .then(sa.source.cmp(&sb.source))
        });
    }

    Prepared {
        splats: prepared,
        bins,
        tiles_x,
        tiles_y,
        culled: projection.culled,
    }
}

/// Gaussian falloff at pixel offset (dx, dy) from the splat mean, or
/// `None` when the sample lies outside the 3-sigma footprint. Both render
/// paths must use this exact rule so they agree fragment-for-fragment.
#[inline]
pub(crate) fn gaussian_weight<T: Real>(conic: &Mat2<T>, dx: T, dy: T) -> Option<T> {
    let q = conic[0][0] * dx * dx + T::of(2.0) * conic[0][1] * dx * dy + conic[1][1] * dy * dy;
    if q > T::of(CUTOFF_MAHALANOBIS_SQ) {
        return None;
    }
    Some((-q * T::of(0.5)).exp())
}

/// Squared Mahalanobis distance of a pixel offset under the conic.
#[inline]
pub(crate) fn mahalanobis_sq<T: Real>(conic: &Mat2<T>, dx: T, dy: T) -> T {
    conic[0][0] * dx * dx + T::of(2.0) * conic[0][1] * dx * dy + conic[1][1] * dy * dy
}
