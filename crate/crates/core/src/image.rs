//! RGB image and single-channel map containers, row-major.

use crate::error::{Error, Result};
use crate::real::Real;

/// RGB image with values nominally in [0, 1], stored row-major, 3 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> Image<T> {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::zero(); width * height * 3],
        }
    }

    /// Builds an image with a constant color.
    pub fn solid(width: usize, height: usize, rgb: [T; 3]) -> Self {
        let mut img = Self::zeros(width, height);
        for px in img.data.chunks_exact_mut(3) {
            px.copy_from_slice(&rgb);
        }
        img
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::ShapeMismatch {
                context: "Image::from_vec",
                expected: format!("{} values", width * height * 3),
                actual: format!("{} values", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [T; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> [T; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [T; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Mean squared error over all pixels and channels.
    pub fn mse(&self, other: &Self) -> Result<T> {
        if !self.same_shape(other) {
            return Err(Error::ShapeMismatch {
                context: "Image::mse",
                expected: format!("{}x{}", self.width, self.height),
                actual: format!("{}x{}", other.width, other.height),
            });
        }
        let n = T::of(self.data.len() as f64);
        let sum: T = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        Ok(sum / n)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Converts the sample type, widening or narrowing through f64.
    pub fn cast<U: Real>(&self) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| U::of(v.to_f64())).collect(),
        }
    }
}

/// Single-channel map with the same layout conventions as [`Image`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarImage<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Real> ScalarImage<T> {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::zero(); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: T) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_bad_length() {
        assert!(Image::<f64>::from_vec(2, 2, vec![0.0; 11]).is_err());
        assert!(Image::<f64>::from_vec(2, 2, vec![0.0; 12]).is_ok());
    }

    #[test]
    fn pixel_indexing_is_row_major() {
        let img = Image::from_fn(3, 2, |x, y| [x as f64, y as f64, 0.0]);
        assert_eq!(img.pixel(2, 1), [2.0, 1.0, 0.0]);
        assert_eq!(img.data()[(1 * 3 + 2) * 3], 2.0);
    }

    #[test]
    fn mse_of_constant_offset() {
        let a = Image::<f64>::solid(4, 4, [0.5, 0.5, 0.5]);
        let b = Image::<f64>::solid(4, 4, [0.6, 0.6, 0.6]);
        let mse = a.mse(&b).unwrap();
        assert!((mse - 0.01).abs() < 1e-12);
    }
}
