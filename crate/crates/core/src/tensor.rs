//! Dense video tensors and convolution window geometry.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Shape of a [`VideoTensor`]: (frames, height, width, channels).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub t: usize,
    pub h: usize,
    pub w: usize,
    pub c: usize,
}

impl Shape {
    pub fn new(t: usize, h: usize, w: usize, c: usize) -> Self {
        Shape { t, h, w, c }
    }

    pub fn len(&self) -> usize {
        self.t * self.h * self.w * self.c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}x{}", self.t, self.h, self.w, self.c)
    }
}

/// Dense rank-4 array in row-major (t, h, w, c) order.
///
/// Carries stimuli (luminance in [0, 1]) and inter-layer activations
/// (unbounded). Samples are `f64`; every operation in this crate
/// accumulates in 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoTensor {
    shape: Shape,
    data: Vec<f64>,
}

impl VideoTensor {
    /// Wraps existing data; the length must match the shape exactly.
    pub fn from_data(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::contract(format!(
                "VideoTensor data length {} does not match shape {} ({} samples)",
                data.len(),
                shape,
                shape.len()
            )));
        }
        Ok(VideoTensor { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        VideoTensor {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn filled(shape: Shape, value: f64) -> Self {
        VideoTensor {
            shape,
            data: vec![value; shape.len()],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, t: usize, h: usize, w: usize, c: usize) -> usize {
        ((t * self.shape.h + h) * self.shape.w + w) * self.shape.c + c
    }

    #[inline]
    pub fn get(&self, t: usize, h: usize, w: usize, c: usize) -> f64 {
        self.data[self.index(t, h, w, c)]
    }

    #[inline]
    pub fn set(&mut self, t: usize, h: usize, w: usize, c: usize, value: f64) {
        let i = self.index(t, h, w, c);
        self.data[i] = value;
    }

    /// Contiguous frame slice at time `t` (h*w*c samples).
    pub fn frame(&self, t: usize) -> &[f64] {
        let fl = self.shape.h * self.shape.w * self.shape.c;
        &self.data[t * fl..(t + 1) * fl]
    }

    /// New tensor containing frames `[start, start + len)`.
    pub fn temporal_slice(&self, start: usize, len: usize) -> VideoTensor {
        assert!(start + len <= self.shape.t, "temporal slice out of range");
        let fl = self.shape.h * self.shape.w * self.shape.c;
        VideoTensor {
            shape: Shape::new(len, self.shape.h, self.shape.w, self.shape.c),
            data: self.data[start * fl..(start + len) * fl].to_vec(),
        }
    }

    /// Index of the first non-finite sample, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|x| !x.is_finite())
    }

    /// Errors if the tensor holds NaN or infinity.
    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if let Some(i) = self.first_non_finite() {
            let c = i % self.shape.c;
            let rest = i / self.shape.c;
            let w = rest % self.shape.w;
            let rest = rest / self.shape.w;
            let h = rest % self.shape.h;
            let t = rest / self.shape.h;
            return Err(Error::numeric(format!(
                "{context}: non-finite sample at (t={t}, h={h}, w={w}, c={c})"
            )));
        }
        Ok(())
    }
}

/// Spatiotemporal convolution window: `n_t` frames by `n_s` x `n_s` pixels.
///
/// Stride is fixed at 1 and only valid (no-padding) convolution is
/// supported; both are deliberate non-features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Temporal kernel extent in frames.
    pub n_t: usize,
    /// Spatial kernel edge in pixels (square window).
    pub n_s: usize,
}

impl WindowSpec {
    pub fn new(n_t: usize, n_s: usize) -> Result<Self> {
        if n_t < 1 || n_s < 1 {
            return Err(Error::config(format!(
                "window extents must be at least 1 (got n_t={n_t}, n_s={n_s})"
            )));
        }
        Ok(WindowSpec { n_t, n_s })
    }

    /// Window volume n = n_t * n_s^2.
    pub fn volume(&self) -> usize {
        self.n_t * self.n_s * self.n_s
    }

    /// Output shape of a valid convolution over `input` with `out_channels`.
    pub fn output_shape(&self, input: Shape, out_channels: usize) -> Result<Shape> {
        if input.t < self.n_t || input.h < self.n_s || input.w < self.n_s {
            return Err(Error::config(format!(
                "input {} smaller than window {}x{}x{}",
                input, self.n_t, self.n_s, self.n_s
            )));
        }
        Ok(Shape::new(
            input.t - self.n_t + 1,
            input.h - self.n_s + 1,
            input.w - self.n_s + 1,
            out_channels,
        ))
    }
}
