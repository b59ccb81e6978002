//! Differentiable Gaussian-splat engine: pixel-aligned splat scenes,
//! a tiled CPU rasterizer with an analytic backward pass, audio/time
//! conditioned splat offsets, Karras-schedule Euler denoising with a
//! one-sided score-distillation loss, and a two-stage per-scene fitter.

pub mod camera;
pub mod error;
pub mod image;
pub mod math;
pub mod real;
pub mod render;
pub mod splat;

pub use camera::Camera;
pub use error::{Error, Result};
pub use image::{Image, ScalarImage};
pub use real::Real;
pub use render::{render, render_brute_force, BackgroundMode, RenderOutput};
pub use splat::{covariance, lift_grid, PixelSplatGrid, Splat, SplatSet};
