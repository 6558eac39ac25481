//! Higher-order spatiotemporal convolution and the neural response
//! prediction pipeline built around it.
//!
//! The crate is organized around a single idea: extending 3D convolution
//! with learnable multiplicative interactions between window samples
//! (a quadratic, Volterra-style term), and measuring what that buys for
//! predicting retinal ganglion cell responses to geometric stimuli.
//!
//! Modules:
//! - [`tensor`]: dense video tensors and convolution window geometry.
//! - [`op`]: standard and higher-order 3D convolution, forward and backward,
//!   plus monomial counting, order scaling, and the tied-weights rank check.
//! - [`nn`]: a small layer stack (conv blocks, dense head), Poisson loss,
//!   AdamW, plateau scheduling, and the training loop.
//! - [`stimulus`]: checkerboard videos under sampled homographies and the
//!   dataset container format.
//! - [`retina`]: synthetic ground-truth cells, Poisson spike sampling, and
//!   split-half bootstrap reliability.
//! - [`readout`]: frozen-feature extraction and linear (ridge) decoding of
//!   homography parameters.
//! - [`sta`]: spike-triggered averaging and separable receptive field
//!   decomposition.

pub mod error;
pub mod linalg;
pub mod nn;
pub mod op;
pub mod readout;
pub mod retina;
pub mod rng;
pub mod sta;
pub mod stimulus;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{Shape, VideoTensor, WindowSpec};
