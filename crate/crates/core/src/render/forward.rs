//! Tiled forward rasterizer and its brute-force oracle twin.

use rayon::prelude::*;

use crate::camera::Camera;
use crate::error::Result;
use crate::image::{Image, ScalarImage};
use crate::real::Real;
use crate::splat::SplatSet;

use super::composite::{composite_pixel, Fragment};
use super::project::{gaussian_weight, mahalanobis_sq, prepare, Prepared};
use super::{resolve_background, BackgroundMode, BackgroundRef, RenderOutput, ALPHA_MAX, CUTOFF_MAHALANOBIS_SQ, TILE_SIZE};

/// Renders the scene with tile binning and per-tile depth sorting. Rows
/// are processed in parallel; the output is identical for any worker
/// count because every pixel is a pure function of the prepared scene.
pub fn render<T: Real>(
    splats: &SplatSet<T>,
    camera: &Camera<T>,
    mode: &BackgroundMode<T>,
) -> Result<RenderOutput<T>> {
    let background = resolve_background(splats, camera.width, camera.height, mode)?;
    let prepared = prepare(splats, camera);
    let width = camera.width;
    let height = camera.height;

    let mut color = Image::zeros(width, height);
    let mut alpha = ScalarImage::zeros(width, height);
    let mut depth = ScalarImage::zeros(width, height);

    let color_rows = color.data_mut().par_chunks_mut(width * 3);
    let alpha_rows = alpha.data_mut().par_chunks_mut(width);
    let depth_rows = depth.data_mut().par_chunks_mut(width);

    color_rows
        .zip(alpha_rows.zip(depth_rows))
        .enumerate()
        .for_each(|(iy, (color_row, (alpha_row, depth_row)))| {
            let tile_row = iy / TILE_SIZE;
            let py = T::of(iy as f64) + T::of(0.5);
            let mut fragments: Vec<Fragment<T>> = Vec::new();
            for ix in 0..width {
                let tile = tile_row * prepared.tiles_x + ix / TILE_SIZE;
                let px = T::of(ix as f64) + T::of(0.5);
                fragments.clear();
                for &si in &prepared.bins[tile] {
                    let ps = &prepared.splats[si as usize];
                    let dx = px - ps.proj.mean2d[0];
                    let dy = py - ps.proj.mean2d[1];
                    if let Some(weight) = gaussian_weight(&ps.conic, dx, dy) {
                        fragments.push(Fragment {
                            opacity: ps.proj.opacity,
                            weight,
                            color: ps.proj.color,
                            view_depth: ps.proj.view_depth,
                        });
                    }
                }
                let out = composite_pixel(&fragments, background.pixel(ix, iy));
                color_row[ix * 3] = out.color[0];
                color_row[ix * 3 + 1] = out.color[1];
                color_row[ix * 3 + 2] = out.color[2];
                alpha_row[ix] = out.alpha;
                depth_row[ix] = out.depth;
            }
        });

    Ok(RenderOutput {
        color,
        alpha,
        depth,
    })
}

/// Oracle renderer: every projected splat is evaluated at every pixel,
/// single-threaded, with the same sort key and fragment rule as the tiled
/// path. No tiling, no binning, no culling beyond the near plane.
pub fn render_brute_force<T: Real>(
    splats: &SplatSet<T>,
    camera: &Camera<T>,
    mode: &BackgroundMode<T>,
) -> Result<RenderOutput<T>> {
    let background = resolve_background(splats, camera.width, camera.height, mode)?;
    let projection = super::project(splats, camera);
    let width = camera.width;
    let height = camera.height;

    // Global order by (view_depth, source index); per pixel the surviving
    // fragments inherit this order.
    let mut order: Vec<usize> = (0..projection.splats.len()).collect();
    order.sort_by(|&a, &b| {
        let sa = &projection.splats[a];
        let sb = &projection.splats[b];
        sa.view_depth
            .partial_cmp(&sb.view_depth)
            .expect("finite view depth")
            .then(sa.source.cmp(&sb.source))
    });
    let conics: Vec<_> = projection
        .splats
        .iter()
        .map(|ps| crate::math::mat2_inverse(&ps.cov2d).expect("low-pass keeps cov2d invertible"))
        .collect();

    let mut color = Image::zeros(width, height);
    let mut alpha = ScalarImage::zeros(width, height);
    let mut depth = ScalarImage::zeros(width, height);
    let mut fragments: Vec<Fragment<T>> = Vec::new();

    for iy in 0..height {
        let py = T::of(iy as f64) + T::of(0.5);
        for ix in 0..width {
            let px = T::of(ix as f64) + T::of(0.5);
            fragments.clear();
            for &si in &order {
                let ps = &projection.splats[si];
                let dx = px - ps.mean2d[0];
                let dy = py - ps.mean2d[1];
                if let Some(weight) = gaussian_weight(&conics[si], dx, dy) {
                    fragments.push(Fragment {
                        opacity: ps.opacity,
                        weight,
                        color: ps.color,
                        view_depth: ps.view_depth,
                    });
                }
            }
            let out = composite_pixel(&fragments, background.pixel(ix, iy));
            color.set_pixel(ix, iy, out.color);
            alpha.set(ix, iy, out.alpha);
            depth.set(ix, iy, out.depth);
        }
    }

    Ok(RenderOutput {
        color,
        alpha,
        depth,
    })
}

/// Per-splat discontinuity flags used by the finite-difference checker to
/// exclude coordinates sitting on a clamp or footprint boundary.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct SplatFlags {
    /// Some fragment's raw alpha is within the margin of ALPHA_MAX.
    pub near_alpha_clamp: bool,
    /// Some fragment's squared Mahalanobis distance is within the margin
    /// of the 3-sigma cutoff.
    pub near_cutoff: bool,
    /// The view depth is within the margin of the near plane.
    pub near_z_cull: bool,
}

pub(crate) fn fragment_flags<T: Real>(
    splats: &SplatSet<T>,
    camera: &Camera<T>,
    margin: f64,
) -> Vec<SplatFlags> {
    let prepared: Prepared<T> = prepare(splats, camera);
    let mut flags = vec![SplatFlags::default(); splats.len()];
    let m = T::of(margin);
    let cutoff = T::of(CUTOFF_MAHALANOBIS_SQ);
    let alpha_max = T::of(ALPHA_MAX);
    let z_near = T::of(super::Z_NEAR);

    for (i, s) in splats.splats.iter().enumerate() {
        let pv = camera.world_to_view(s.position);
        if (pv[2] - z_near).abs() < m {
            flags[i].near_z_cull = true;
        }
    }
    for ps in &prepared.splats {
        if !ps.on_screen {
            continue;
        }
        let f = &mut flags[ps.proj.source as usize];
        for iy in ps.y_lo..=ps.y_hi {
            let py = T::of(iy as f64) + T::of(0.5);
            for ix in ps.x_lo..=ps.x_hi {
                let px = T::of(ix as f64) + T::of(0.5);
                let dx = px - ps.proj.mean2d[0];
                let dy = py - ps.proj.mean2d[1];
                let q = mahalanobis_sq(&ps.conic, dx, dy);
                if (q - cutoff).abs() < m {
                    f.near_cutoff = true;
                }
                if q <= cutoff {
                    let alpha = ps.proj.opacity * (-q * T::of(0.5)).exp();
                    if (alpha - alpha_max).abs() < m || alpha > alpha_max {
                        f.near_alpha_clamp = true;
                    }
                }
            }
        }
    }
    flags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splat::Splat;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cam() -> Camera<f64> {
        Camera::facing_z(30.0, 30.0, 16.0, 16.0, 32, 32).unwrap()
    }

    pub(crate) fn random_scene(seed: u64, n: usize, with_bg: bool) -> SplatSet<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let splats = (0..n)
            .map(|_| Splat {
                position: [
                    rng.gen_range(-0.6..0.6),
                    rng.gen_range(-0.6..0.6),
                    rng.gen_range(1.2..3.5),
                ],
                rotation: crate::math::normalize4([
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]),
                scale: [
                    rng.gen_range(0.02..0.15),
                    rng.gen_range(0.02..0.15),
                    rng.gen_range(0.02..0.15),
                ],
                opacity: rng.gen_range(0.05..0.95),
                color: [rng.gen(), rng.gen(), rng.gen()],
            })
            .collect();
        let bg = with_bg.then(|| {
            Image::from_fn(32, 32, |x, y| {
                [
                    x as f64 / 32.0,
                    y as f64 / 32.0,
                    ((x + y) % 7) as f64 / 7.0,
                ]
            })
        });
        SplatSet::new(splats, bg).unwrap()
    }

    #[test]
    fn empty_scene_shows_predicted_background() {
        let bg = Image::from_fn(32, 32, |x, y| [x as f64 / 32.0, y as f64 / 32.0, 0.25]);
        let set = SplatSet::empty_with_background(bg.clone());
        let out = render(&set, &cam(), &BackgroundMode::Predicted).unwrap();
        assert_eq!(out.color, bg);
        assert!(out.alpha.data().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn missing_background_in_predicted_mode_errors() {
        let set = SplatSet::new(vec![], None).unwrap();
        assert!(render(&set, &cam(), &BackgroundMode::Predicted).is_err());
    }

    #[test]
    fn background_resolution_mismatch_errors() {
        let set = SplatSet::empty_with_background(Image::zeros(16, 16));
        assert!(render(&set, &cam(), &BackgroundMode::Predicted).is_err());
    }

    #[test]
    fn large_opaque_splat_dominates_center_pixel() {
        let splat = Splat {
            position: [0.0, 0.0, 2.0],
            rotation: [1.0, 0.0, 0.0, 0.0],
            scale: [0.5; 3],
            opacity: 0.9999,
            color: [0.8, 0.1, 0.3],
        };
        let set = SplatSet::new(vec![splat], None).unwrap();
        let out = render(&set, &cam(), &BackgroundMode::Solid([0.0; 3])).unwrap();
        // Principal point (16, 16) lies between pixels 15 and 16; both are
        // within a fraction of a pixel of the mean of a huge splat.
        let px = out.color.pixel(16, 16);
        assert_relative_eq!(px[0], 0.8, epsilon = 1e-3);
        assert_relative_eq!(px[1], 0.1, epsilon = 1e-3);
        assert_relative_eq!(px[2], 0.3, epsilon = 1e-3);
    }

    #[test]
    fn tiled_matches_brute_force_bitwise_f64() {
        for seed in 0..5u64 {
            let set = random_scene(seed, 64, true);
            let camera = cam();
            for mode in [BackgroundMode::Predicted, BackgroundMode::Solid([0.9, 0.2, 0.4])] {
                let a = render(&set, &camera, &mode).unwrap();
                let b = render_brute_force(&set, &camera, &mode).unwrap();
                assert_eq!(a.color, b.color);
                assert_eq!(a.alpha, b.alpha);
                assert_eq!(a.depth, b.depth);
            }
        }
    }

    #[test]
    fn render_is_deterministic_across_thread_counts() {
        let set = random_scene(3, 96, true);
        let camera = cam();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap();
        let a = single.install(|| render(&set, &camera, &BackgroundMode::Predicted).unwrap());
        let b = many.install(|| render(&set, &camera, &BackgroundMode::Predicted).unwrap());
        assert_eq!(a.color, b.color);
        assert_eq!(a.alpha, b.alpha);
        assert_eq!(a.depth, b.depth);
    }

    #[test]
    fn adding_a_splat_never_decreases_alpha() {
        let base = random_scene(17, 32, true);
        let mut grown = base.clone();
        grown.splats.push(Splat {
            position: [0.1, -0.2, 2.0],
            rotation: [1.0, 0.0, 0.0, 0.0],
            scale: [0.2; 3],
            opacity: 0.7,
            color: [0.2, 0.9, 0.1],
        });
        let camera = cam();
        let a = render(&base, &camera, &BackgroundMode::Predicted).unwrap();
        let b = render(&grown, &camera, &BackgroundMode::Predicted).unwrap();
        for (pa, pb) in a.alpha.data().iter().zip(b.alpha.data()) {
            assert!(pb >= pa);
        }
    }

    #[test]
    fn view_consistency_across_bearings() {
        // One isotropic splat at the origin, viewed from the same distance
        // along two different bearings; peak intensity must match.
        let splat = Splat {
            position: [0.0, 0.0, 0.0],
            rotation: [1.0, 0.0, 0.0, 0.0],
            scale: [0.05; 3],
            opacity: 0.8,
            color: [1.0, 1.0, 1.0],
        };
        let set = SplatSet::new(vec![splat], None).unwrap();
        let d = 2.0;
        let cam_a = Camera::new(
            40.0,
            40.0,
            16.0,
            16.0,
            32,
            32,
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            [0.0, 0.0, -d],
        )
        .unwrap();
        // Bearing rotated 40 degrees about y, still looking at the splat.
        let ang = 40.0_f64.to_radians();
        let rot = crate::math::axis_angle_to_mat3([0.0, 1.0, 0.0], ang);
        let pos = [-d * ang.sin(), 0.0, -d * ang.cos()];
        let cam_b = Camera::new(40.0, 40.0, 16.0, 16.0, 32, 32, rot, pos).unwrap();
        let peak = |out: &RenderOutput<f64>| {
            out.color
                .data()
                .iter()
                .cloned()
                .fold(0.0f64, f64::max)
        };
        let a = render(&set, &cam_a, &BackgroundMode::Solid([0.0; 3])).unwrap();
        let b = render(&set, &cam_b, &BackgroundMode::Solid([0.0; 3])).unwrap();
        assert_relative_eq!(peak(&a), peak(&b), epsilon = 1e-3);
    }

    #[test]
    fn depth_map_reports_splat_depth_where_opaque() {
        let splat = Splat {
            position: [0.0, 0.0, 2.0],
            rotation: [1.0, 0.0, 0.0, 0.0],
            scale: [0.6; 3],
            opacity: 0.9999,
            color: [1.0; 3],
        };
        let set = SplatSet::new(vec![splat], None).unwrap();
        let out = render(&set, &cam(), &BackgroundMode::Solid([0.0; 3])).unwrap();
        let d = out.depth.get(16, 16);
        assert_relative_eq!(d, 2.0, max_relative = 1e-6);
    }
}
