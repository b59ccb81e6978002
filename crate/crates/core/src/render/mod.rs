//! Forward rendering: EWA projection of 3D Gaussians to screen space,
//! tile binning, depth sorting, and front-to-back alpha compositing over a
//! background image.
//!
//! `render` is the production tiled path; `render_brute_force` is the
//! O(N*H*W) oracle with no tiling or binning. Both build on the same
//! projection and per-pixel compositing primitives, so the cross-check
//! exercises the binning, sorting, and parallel assembly machinery.

mod composite;
mod forward;
mod project;

pub use composite::{composite_pixel, CompositeResult, Fragment};
pub use forward::{render, render_brute_force};
pub use project::{project, ProjectedSplat, Projection};

pub(crate) use forward::fragment_flags;
pub(crate) use project::prepare;

use crate::error::{Error, Result};
use crate::image::{Image, ScalarImage};
use crate::real::Real;
use crate::splat::SplatSet;

/// Side length of the square screen tiles used for binning.
pub const TILE_SIZE: usize = 16;
/// Upper clamp on per-fragment alpha; keeps transmittance strictly
/// positive so gradients stay finite.
pub const ALPHA_MAX: f64 = 0.999;
/// Near-plane depth below which splats are culled.
pub const Z_NEAR: f64 = 0.01;
/// Low-pass regularization added to both diagonal entries of the
/// projected 2D covariance, in pixels^2.
pub const LOW_PASS: f64 = 0.3;
/// Gaussians are evaluated out to 3 sigma: fragments with squared
/// Mahalanobis distance above this are dropped (in both render paths).
pub const CUTOFF_MAHALANOBIS_SQ: f64 = 9.0;
/// Floor on accumulated alpha when normalizing the expected-depth map.
pub const DEPTH_ALPHA_EPS: f64 = 1e-8;

/// How the pixels not fully covered by splats are filled.
#[derive(Debug, Clone, PartialEq)]
pub enum BackgroundMode<T> {
    /// Alpha-blend over the SplatSet's own predicted background image.
    Predicted,
    /// Alpha-blend over a constant color.
    Solid([T; 3]),
}

/// Output of a render call.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput<T> {
    pub color: Image<T>,
    /// Accumulated splat opacity per pixel, in [0, 1].
    pub alpha: ScalarImage<T>,
    /// Alpha-weighted expected depth, normalized by accumulated alpha.
    pub depth: ScalarImage<T>,
}

pub(crate) fn resolve_background<'a, T: Real>(
    splats: &'a SplatSet<T>,
    camera_width: usize,
    camera_height: usize,
    mode: &BackgroundMode<T>,
) -> Result<BackgroundRef<'a, T>> {
    match mode {
        BackgroundMode::Solid(rgb) => Ok(BackgroundRef::Solid(*rgb)),
        BackgroundMode::Predicted => {
            let bg = splats.background.as_ref().ok_or_else(|| {
                Error::Background("SplatSet carries no background image".into())
            })?;
            if bg.width() != camera_width || bg.height() != camera_height {
                return Err(Error::Background(format!(
                    "background {}x{} does not match render target {}x{}",
                    bg.width(),
                    bg.height(),
                    camera_width,
                    camera_height
                )));
            }
            Ok(BackgroundRef::Image(bg))
        }
    }
}

pub(crate) enum BackgroundRef<'a, T> {
    Solid([T; 3]),
    Image(&'a Image<T>),
}

impl<T: Real> BackgroundRef<'_, T> {
    pub(crate) fn pixel(&self, x: usize, y: usize) -> [T; 3] {
        match self {
            BackgroundRef::Solid(rgb) => *rgb,
            BackgroundRef::Image(img) => img.pixel(x, y),
        }
    }
}
