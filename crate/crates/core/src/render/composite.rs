//! Front-to-back alpha compositing of depth-sorted fragments over a
//! background color.

use crate::real::Real;

use super::{ALPHA_MAX, DEPTH_ALPHA_EPS};

/// One splat sample covering a pixel. `weight` is the Gaussian falloff at
/// the pixel center; the effective alpha is `opacity * weight`, clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fragment<T> {
    pub opacity: T,
    pub weight: T,
    pub color: [T; 3],
    pub view_depth: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeResult<T> {
    pub color: [T; 3],
    /// Accumulated splat opacity, 1 - final transmittance.
    pub alpha: T,
    /// Alpha-weighted expected depth, normalized by max(alpha, eps).
    pub depth: T,
    /// Transmittance remaining after all fragments.
    pub transmittance: T,
    /// Sum of per-fragment compositing weights alpha_i * T_i. Together
    /// with the final transmittance this must equal 1.
    pub weight_sum: T,
}

/// Composites fragments front to back:
/// `C = sum_i c_i a_i T_i + B * T_final` with `T_i = prod_{j<i} (1 - a_j)`
/// and `a_i = clamp(opacity_i * weight_i, 0, ALPHA_MAX)`.
///
/// Fragments must be sorted ascending by view depth (ties broken by
/// source index by the caller); this is checked in debug builds only.
pub fn composite_pixel<T: Real>(fragments: &[Fragment<T>], background: [T; 3]) -> CompositeResult<T> {
    #[cfg(debug_assertions)]
    for pair in fragments.windows(2) {
        debug_assert!(
            pair[0].view_depth <= pair[1].view_depth,
            "fragments must be depth-sorted"
        );
    }

    let alpha_max = T::of(ALPHA_MAX);
    let mut transmittance = T::one();
    let mut color = [T::zero(); 3];
    let mut depth_accum = T::zero();
    let mut weight_sum = T::zero();

    for f in fragments {
        let alpha = (f.opacity * f.weight).max(T::zero()).min(alpha_max);
        let w = alpha * transmittance;
        color[0] += f.color[0] * w;
        color[1] += f.color[1] * w;
        color[2] += f.color[2] * w;
        depth_accum += f.view_depth * w;
        weight_sum += w;
        transmittance *= T::one() - alpha;
    }

    let alpha = T::one() - transmittance;
    color[0] += background[0] * transmittance;
    color[1] += background[1] * transmittance;
    color[2] += background[2] * transmittance;
    let depth = depth_accum / alpha.max(T::of(DEPTH_ALPHA_EPS));

    CompositeResult {
        color,
        alpha,
        depth,
        transmittance,
        weight_sum,
    }
}
