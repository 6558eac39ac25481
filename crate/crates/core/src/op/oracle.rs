//! Reference implementation of the higher-order convolution.
//!
//! Deliberately naive: nested loops straight off the operator definition,
//! no patch buffers, no product reuse, no layout tricks. The fast path in
//! `op` is tested against this, never the other way around.

use crate::error::{Error, Result};
use crate::tensor::{VideoTensor, WindowSpec};

use super::HoKernelBank;

/// Same contract as [`super::hoconv3d_forward`], computed independently.
pub fn hoconv_oracle(
    input: &VideoTensor,
    kernels: &HoKernelBank,
    window: WindowSpec,
) -> Result<VideoTensor> {
    let in_shape = input.shape();
    if input.shape().c != kernels.in_channels() || window != kernels.window() {
        return Err(Error::config(
            "oracle: kernel bank does not match input/window",
        ));
    }
    let out_shape = window.output_shape(in_shape, kernels.out_channels())?;
    let mut out = VideoTensor::zeros(out_shape);

    let n_t = window.n_t;
    let n_s = window.n_s;
    let cin = in_shape.c;
    let m = n_t * n_s * n_s * cin;

    // Flat patch offset -> (dt, dh, dw, dc), in storage order.
    let offset = |flat: usize| -> (usize, usize, usize, usize) {
        let dc = flat % cin;
        let rest = flat / cin;
        let dw = rest % n_s;
        let rest = rest / n_s;
        let dh = rest % n_s;
        let dt = rest / n_s;
        (dt, dh, dw, dc)
    };

    for t in 0..out_shape.t {
        for l in 0..out_shape.h {
            for mm in 0..out_shape.w {
                for c in 0..kernels.out_channels() {
                    let mut acc = kernels.bias[c];
                    for flat in 0..m {
                        let (dt, dh, dw, dc) = offset(flat);
                        acc += kernels.w1[c * m + flat] * input.get(t + dt, l + dh, mm + dw, dc);
                    }
                    if let Some(w2) = &kernels.w2 {
                        let pairs = super::pair_count(m);
                        let mut k = 0;
                        let mut quad = 0.0;
                        for a in 0..m {
                            let (dt, dh, dw, dc) = offset(a);
                            let xa = input.get(t + dt, l + dh, mm + dw, dc);
                            for b in a..m {
                                let (et, eh, ew, ec) = offset(b);
                                let xb = input.get(t + et, l + eh, mm + ew, ec);
                                quad += w2[c * pairs + k] * xa * xb;
                                k += 1;
                            }
                        }
                        acc += kernels.scale2() * quad;
                    }
                    if let Some(w3) = &kernels.w3 {
                        let triples = super::triple_count(m);
                        let mut idx = 0;
                        let mut cubic = 0.0;
                        for a in 0..m {
                            let (dt, dh, dw, dc) = offset(a);
                            let xa = input.get(t + dt, l + dh, mm + dw, dc);
                            for b in a..m {
                                let (et, eh, ew, ec) = offset(b);
                                let xb = input.get(t + et, l + eh, mm + ew, ec);
                                for d in b..m {
                                    let (ft, fh, fw, fc) = offset(d);
                                    let xd = input.get(t + ft, l + fh, mm + fw, fc);
                                    cubic += w3[c * triples + idx] * xa * xb * xd;
                                    idx += 1;
                                }
                            }
                        }
                        acc += kernels.scale3() * cubic;
                    }
                    out.set(t, l, mm, c, acc);
                }
            }
        }
    }
    out.ensure_finite("hoconv_oracle")?;
    Ok(out)
}
