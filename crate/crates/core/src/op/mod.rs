//! Standard and higher-order 3D convolution.
//!
//! The higher-order operator extends linear spatiotemporal filtering with
//! learnable multiplicative interactions: each output sample adds a
//! quadratic (and optionally cubic) form over the flattened window patch,
//! with independent weights per interaction pair. Pairwise weights are
//! stored upper-triangular-inclusive — the product x_i*x_j is counted
//! once — which halves the parameter count with identical expressivity.
//!
//! Accumulation order within each output element is fixed, so results are
//! independent of any parallel schedule built on top of these routines.

mod oracle;
mod rank;

pub use oracle::hoconv_oracle;
pub use rank::{quadratic_form_rank, tied_weights_rank_check};

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{Shape, VideoTensor, WindowSpec};
use rand::Rng;

/// Number of monomials of degree at most `p` in `n` variables:
/// binomial(n + p, p), computed with exact integer arithmetic.
pub fn count_monomials(n: u64, p: u64) -> Result<u64> {
    if n < 1 {
        return Err(Error::contract("count_monomials requires n >= 1"));
    }
    // r = prod_{i=1..p} (n + i) / i, divided as we go so every
    // intermediate is an exact integer (binomial prefix property).
    let mut r: u128 = 1;
    for i in 1..=p {
        let factor = (n as u128)
            .checked_add(i as u128)
            .ok_or_else(|| Error::Overflow("count_monomials: n + i".into()))?;
        r = r
            .checked_mul(factor)
            .ok_or_else(|| Error::Overflow(format!("count_monomials({n}, {p})")))?;
        r /= i as u128;
    }
    u64::try_from(r).map_err(|_| Error::Overflow(format!("count_monomials({n}, {p}) exceeds u64")))
}

/// Scaling factor 1/sqrt(n_V) applied to kernel terms of order `p` >= 2,
/// balancing their contribution against the linear term.
pub fn scale_factor(n: u64, p: u64) -> Result<f64> {
    if p < 2 {
        return Err(Error::contract(format!(
            "scale_factor applies to orders >= 2 (got p = {p}); order-1 kernels are never scaled"
        )));
    }
    Ok(1.0 / (count_monomials(n, p)? as f64).sqrt())
}

/// Number of unordered pairs (i <= j) over `m` variables.
pub fn pair_count(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Number of unordered triples (i <= j <= k) over `m` variables.
pub fn triple_count(m: usize) -> usize {
    m * (m + 1) * (m + 2) / 6
}

/// Flat index of pair (i, j), i <= j, in lexicographic upper-triangular order.
#[inline]
pub fn pair_index(i: usize, j: usize, m: usize) -> usize {
    debug_assert!(i <= j && j < m);
    i * m - i * (i - 1) / 2 + (j - i)
}

/// Per-output-channel weights for one convolution layer: bias, linear
/// term, and (for order >= 2) pairwise and optionally triple interaction
/// terms over the flattened window patch.
///
/// Patch flattening order is (temporal offset, row, column, channel),
/// row-major. `scale2`/`scale3` are derived from the window and never
/// stored stale: they are recomputed whenever a bank is constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct HoKernelBank {
    order: u8,
    out_channels: usize,
    window: WindowSpec,
    in_channels: usize,
    /// One bias per output channel.
    pub bias: Vec<f64>,
    /// Linear weights, `out_channels * m` with m = window volume * in_channels.
    pub w1: Vec<f64>,
    /// Pairwise weights, `out_channels * pair_count(m)`; present iff order >= 2.
    pub w2: Option<Vec<f64>>,
    /// Triple weights, `out_channels * triple_count(m)`; present iff order >= 3.
    pub w3: Option<Vec<f64>>,
    scale2: f64,
    scale3: f64,
}

impl HoKernelBank {
    /// Zero-initialized bank. `order` must be 1, 2, or 3.
    pub fn zeroed(
        order: u8,
        out_channels: usize,
        window: WindowSpec,
        in_channels: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::config(format!(
                "kernel order must be 1, 2, or 3 (got {order})"
            )));
        }
        if out_channels == 0 || in_channels == 0 {
            return Err(Error::config("kernel bank needs at least one channel"));
        }
        let m = window.volume() * in_channels;
        let scale2 = if order >= 2 {
            scale_factor(m as u64, 2)?
        } else {
            0.0
        };
        let scale3 = if order >= 3 {
            scale_factor(m as u64, 3)?
        } else {
            0.0
        };
        Ok(HoKernelBank {
            order,
            out_channels,
            window,
            in_channels,
            bias: vec![0.0; out_channels],
            w1: vec![0.0; out_channels * m],
            w2: (order >= 2).then(|| vec![0.0; out_channels * pair_count(m)]),
            w3: (order >= 3).then(|| vec![0.0; out_channels * triple_count(m)]),
            scale2,
            scale3,
        })
    }

    /// Randomly initialized bank: w1 uniform in ±sqrt(1/m); higher-order
    /// terms from the same distribution shrunk by 0.1 so the layer starts
    /// near its linear regime. Each parameter class draws from its own
    /// derived stream, so enabling order 2 does not change the w1 draws.
    pub fn random(
        order: u8,
        out_channels: usize,
        window: WindowSpec,
        in_channels: usize,
        seed: u64,
        label: &str,
    ) -> Result<Self> {
        let mut bank = Self::zeroed(order, out_channels, window, in_channels)?;
        let m = bank.patch_len();
        let half_width = (1.0 / m as f64).sqrt();
        let mut rng1 = rng::labeled(seed, &format!("{label}.w1"));
        for w in bank.w1.iter_mut() {
            *w = rng1.random_range(-half_width..half_width);
        }
        if let Some(w2) = bank.w2.as_mut() {
            let mut rng2 = rng::labeled(seed, &format!("{label}.w2"));
            for w in w2.iter_mut() {
                *w = 0.1 * rng2.random_range(-half_width..half_width);
            }
        }
        if let Some(w3) = bank.w3.as_mut() {
            let mut rng3 = rng::labeled(seed, &format!("{label}.w3"));
            for w in w3.iter_mut() {
                *w = 0.1 * rng3.random_range(-half_width..half_width);
            }
        }
        Ok(bank)
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn window(&self) -> WindowSpec {
        self.window
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    /// Flattened patch length m = n_t * n_s^2 * in_channels.
    pub fn patch_len(&self) -> usize {
        self.window.volume() * self.in_channels
    }

    /// Scaling applied to the order-2 contribution (0 when order < 2).
    pub fn scale2(&self) -> f64 {
        self.scale2
    }

    /// Scaling applied to the order-3 contribution (0 when order < 3).
    pub fn scale3(&self) -> f64 {
        self.scale3
    }

    /// Total learnable parameter count across output channels.
    pub fn parameter_count(&self) -> usize {
        self.bias.len()
            + self.w1.len()
            + self.w2.as_ref().map_or(0, |w| w.len())
            + self.w3.as_ref().map_or(0, |w| w.len())
    }

    fn validate_against(&self, input: Shape, window: WindowSpec) -> Result<()> {
        if window != self.window {
            return Err(Error::config(format!(
                "window {}x{} does not match kernel window {}x{}",
                window.n_t, window.n_s, self.window.n_t, self.window.n_s
            )));
        }
        if input.c != self.in_channels {
            return Err(Error::config(format!(
                "input has {} channels but kernel expects {}",
                input.c, self.in_channels
            )));
        }
        let m = self.patch_len();
        if self.w1.len() != self.out_channels * m {
            return Err(Error::config(format!(
                "w1 length {} does not match out_channels * window volume {} ({}x{})",
                self.w1.len(),
                self.out_channels * m,
                self.out_channels,
                m
            )));
        }
        if let Some(w2) = &self.w2 {
            if w2.len() != self.out_channels * pair_count(m) {
                return Err(Error::config(format!(
                    "w2 length {} does not match out_channels * pair count {}",
                    w2.len(),
                    self.out_channels * pair_count(m)
                )));
            }
        }
        if let Some(w3) = &self.w3 {
            if w3.len() != self.out_channels * triple_count(m) {
                return Err(Error::config(format!(
                    "w3 length {} does not match out_channels * triple count {}",
                    w3.len(),
                    self.out_channels * triple_count(m)
                )));
            }
        }
        Ok(())
    }
}

/// Gradients with the same shapes as a [`HoKernelBank`]'s parameters.
#[derive(Debug, Clone)]
pub struct KernelGrads {
    pub bias: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Option<Vec<f64>>,
    pub w3: Option<Vec<f64>>,
}

impl KernelGrads {
    pub fn zeroed_like(bank: &HoKernelBank) -> Self {
        KernelGrads {
            bias: vec![0.0; bank.bias.len()],
            w1: vec![0.0; bank.w1.len()],
            w2: bank.w2.as_ref().map(|w| vec![0.0; w.len()]),
            w3: bank.w3.as_ref().map(|w| vec![0.0; w.len()]),
        }
    }
}

/// Copies the flattened window patch at output position (t, l, m) into
/// `patch`, in (temporal, row, column, channel) order.
#[inline]
fn gather_patch(input: &VideoTensor, window: WindowSpec, t: usize, l: usize, m: usize, patch: &mut [f64]) {
    let shape = input.shape();
    let row_len = window.n_s * shape.c;
    let data = input.data();
    let mut out = 0;
    for r in 0..window.n_t {
        for i in 0..window.n_s {
            let start = input.index(t + r, l + i, m, 0);
            patch[out..out + row_len].copy_from_slice(&data[start..start + row_len]);
            out += row_len;
        }
    }
}

/// Standard (order-1) valid 3D convolution: out = b + w1 . patch.
pub fn conv3d_forward(
    input: &VideoTensor,
    kernels: &HoKernelBank,
    window: WindowSpec,
) -> Result<VideoTensor> {
    if kernels.order() != 1 {
        return Err(Error::contract(format!(
            "conv3d_forward requires an order-1 kernel bank (got order {})",
            kernels.order()
        )));
    }
    hoconv3d_forward(input, kernels, window)
}

/// Higher-order valid 3D convolution.
///
/// Each output sample is
/// `b_c + sum_i w1_c[i] x[i] + scale2 * sum_{i<=j} w2_c[i,j] x[i] x[j]`
/// (plus the analogous scale3 triple term when present), where x is the
/// flattened window patch at that position. Accepts order-1 banks too,
/// in which case it reduces to the standard convolution bitwise — the
/// linear accumulation path is shared.
pub fn hoconv3d_forward(
    input: &VideoTensor,
    kernels: &HoKernelBank,
    window: WindowSpec,
) -> Result<VideoTensor> {
    let in_shape = input.shape();
    kernels.validate_against(in_shape, window)?;
    let out_shape = window.output_shape(in_shape, kernels.out_channels())?;
    let mut out = VideoTensor::zeros(out_shape);

    let m = kernels.patch_len();
    let n_pairs = pair_count(m);
    let mut patch = vec![0.0f64; m];
    let mut prods = vec![0.0f64; n_pairs];
    let scale2 = kernels.scale2();
    let scale3 = kernels.scale3();
    let quad = kernels.w2.as_deref();
    let cubic = kernels.w3.as_deref();

    for t in 0..out_shape.t {
        for l in 0..out_shape.h {
            for mm in 0..out_shape.w {
                gather_patch(input, window, t, l, mm, &mut patch);
                if quad.is_some() {
                    let mut k = 0;
                    for i in 0..m {
                        let xi = patch[i];
                        for xj in &patch[i..m] {
                            prods[k] = xi * xj;
                            k += 1;
                        }
                    }
                }
                let base = out.index(t, l, mm, 0);
                let out_data = out.data_mut();
                for c in 0..kernels.out_channels() {
                    let mut acc = kernels.bias[c];
                    let w1c = &kernels.w1[c * m..(c + 1) * m];
                    for i in 0..m {
                        acc += w1c[i] * patch[i];
                    }
                    if let Some(w2) = quad {
                        let w2c = &w2[c * n_pairs..(c + 1) * n_pairs];
                        let mut q = 0.0;
                        for k in 0..n_pairs {
                            q += w2c[k] * prods[k];
                        }
                        acc += scale2 * q;
                    }
                    if let Some(w3) = cubic {
                        let w3c = &w3[c * triple_count(m)..(c + 1) * triple_count(m)];
                        let mut cu = 0.0;
                        let mut idx = 0;
                        for i in 0..m {
                            let xi = patch[i];
                            for j in i..m {
                                let xij = xi * patch[j];
                                for xk in &patch[j..m] {
                                    cu += w3c[idx] * xij * xk;
                                    idx += 1;
                                }
                            }
                        }
                        acc += scale3 * cu;
                    }
                    out_data[base + c] = acc;
                }
            }
        }
    }
    out.ensure_finite("hoconv3d_forward")?;
    Ok(out)
}

/// Gradients of [`hoconv3d_forward`] with respect to the input and every
/// kernel parameter class, given the upstream gradient at the output.
pub fn hoconv3d_backward(
    input: &VideoTensor,
    kernels: &HoKernelBank,
    window: WindowSpec,
    upstream: &VideoTensor,
) -> Result<(VideoTensor, KernelGrads)> {
    let in_shape = input.shape();
    kernels.validate_against(in_shape, window)?;
    let out_shape = window.output_shape(in_shape, kernels.out_channels())?;
    if upstream.shape() != out_shape {
        return Err(Error::contract(format!(
            "upstream gradient shape {} does not match output shape {}",
            upstream.shape(),
            out_shape
        )));
    }

    let m = kernels.patch_len();
    let n_pairs = pair_count(m);
    let n_triples = triple_count(m);
    let c_out = kernels.out_channels();
    let scale2 = kernels.scale2();
    let scale3 = kernels.scale3();
    let quad = kernels.w2.as_deref();
    let cubic = kernels.w3.as_deref();

    let mut grads = KernelGrads::zeroed_like(kernels);
    let mut grad_input = VideoTensor::zeros(in_shape);
    let mut patch = vec![0.0f64; m];
    let mut prods = vec![0.0f64; n_pairs];
    let mut gpatch = vec![0.0f64; m];

    for t in 0..out_shape.t {
        for l in 0..out_shape.h {
            for mm in 0..out_shape.w {
                gather_patch(input, window, t, l, mm, &mut patch);
                gpatch.fill(0.0);
                if quad.is_some() || cubic.is_some() {
                    let mut k = 0;
                    for i in 0..m {
                        let xi = patch[i];
                        for xj in &patch[i..m] {
                            prods[k] = xi * xj;
                            k += 1;
                        }
                    }
                }
                let ubase = upstream.index(t, l, mm, 0);
                let udata = upstream.data();
                // Linear term and bias, per channel.
                for c in 0..c_out {
                    let g = udata[ubase + c];
                    grads.bias[c] += g;
                    let w1c = &kernels.w1[c * m..(c + 1) * m];
                    let gw1c = &mut grads.w1[c * m..(c + 1) * m];
                    for i in 0..m {
                        gw1c[i] += g * patch[i];
                        gpatch[i] += g * w1c[i];
                    }
                }
                // Quadratic term: weight grads per channel, then the
                // channel-summed pair gradient back to the patch.
                if let Some(w2) = quad {
                    let gw2 = grads.w2.as_mut().unwrap();
                    for c in 0..c_out {
                        let g = udata[ubase + c] * scale2;
                        let gw2c = &mut gw2[c * n_pairs..(c + 1) * n_pairs];
                        for k in 0..n_pairs {
                            gw2c[k] += g * prods[k];
                        }
                    }
                    let mut k = 0;
                    for i in 0..m {
                        for j in i..m {
                            let mut gw = 0.0;
                            for c in 0..c_out {
                                gw += udata[ubase + c] * w2[c * n_pairs + k];
                            }
                            let gw = gw * scale2;
                            // For i == j both statements hit the same slot,
                            // yielding the required factor of 2.
                            gpatch[i] += gw * patch[j];
                            gpatch[j] += gw * patch[i];
                            k += 1;
                        }
                    }
                }
                if let Some(w3) = cubic {
                    let gw3 = grads.w3.as_mut().unwrap();
                    for c in 0..c_out {
                        let g = udata[ubase + c] * scale3;
                        let gw3c = &mut gw3[c * n_triples..(c + 1) * n_triples];
                        let mut idx = 0;
                        for i in 0..m {
                            let xi = patch[i];
                            for j in i..m {
                                let xij = xi * patch[j];
                                for xk in &patch[j..m] {
                                    gw3c[idx] += g * xij * xk;
                                    idx += 1;
                                }
                            }
                        }
                    }
                    let mut idx = 0;
                    for i in 0..m {
                        for j in i..m {
                            for k in j..m {
                                let mut gw = 0.0;
                                for c in 0..c_out {
                                    gw += udata[ubase + c] * w3[c * n_triples + idx];
                                }
                                let gw = gw * scale3;
                                gpatch[i] += gw * patch[j] * patch[k];
                                gpatch[j] += gw * patch[i] * patch[k];
                                gpatch[k] += gw * patch[i] * patch[j];
                                idx += 1;
                            }
                        }
                    }
                }
                // Scatter the patch gradient back into input coordinates.
                {
                    let row_len = window.n_s * in_shape.c;
                    let gdata = grad_input.data_mut();
                    let mut src = 0;
                    for r in 0..window.n_t {
                        for i in 0..window.n_s {
                            let start = ((t + r) * in_shape.h + (l + i)) * in_shape.w * in_shape.c
                                + mm * in_shape.c;
                            for d in 0..row_len {
                                gdata[start + d] += gpatch[src + d];
                            }
                            src += row_len;
                        }
                    }
                }
            }
        }
    }
    Ok((grad_input, grads))
}

#[cfg(test)]
mod tests;
