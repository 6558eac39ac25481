use super::*;
use crate::rng;
use rand::Rng;

/// Enumeration oracle: counts exponent vectors (e_1..e_n) with sum <= p.
fn enumerate_monomials(n: u64, p: u64) -> u64 {
    fn rec(vars_left: u64, budget: u64) -> u64 {
        if vars_left == 0 {
            return 1;
        }
        (0..=budget).map(|e| rec(vars_left - 1, budget - e)).sum()
    }
    rec(n, p)
}

fn random_tensor(shape: Shape, seed: u64, lo: f64, hi: f64) -> VideoTensor {
    let mut r = rng::seeded(seed);
    let data = (0..shape.len()).map(|_| r.random_range(lo..hi)).collect();
    VideoTensor::from_data(shape, data).unwrap()
}

fn random_bank(order: u8, out_c: usize, window: WindowSpec, in_c: usize, seed: u64) -> HoKernelBank {
    HoKernelBank::random(order, out_c, window, in_c, seed, "test").unwrap()
}

fn max_rel_dev(a: &VideoTensor, b: &VideoTensor) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs() / (y.abs() + 1e-12))
        .fold(0.0, f64::max)
}

#[test]
fn count_monomials_two_pixels_order_two_is_six() {
    assert_eq!(count_monomials(2, 2).unwrap(), 6);
}

#[test]
fn count_monomials_order_zero_is_one() {
    for n in [1, 4, 27, 100] {
        assert_eq!(count_monomials(n, 0).unwrap(), 1);
    }
}

#[test]
fn count_monomials_27_2_matches_enumeration() {
    assert_eq!(enumerate_monomials(27, 2), 406);
    assert_eq!(count_monomials(27, 2).unwrap(), 406);
}

#[test]
fn count_law_matches_enumeration_up_to_n10_p3() {
    for n in 1..=10u64 {
        for p in 0..=3u64 {
            assert_eq!(
                count_monomials(n, p).unwrap(),
                enumerate_monomials(n, p),
                "count_monomials({n}, {p})"
            );
        }
    }
}

#[test]
fn count_monomials_overflow_is_an_error() {
    let err = count_monomials(u64::MAX - 1, 3).unwrap_err();
    assert!(matches!(err, Error::Overflow(_)));
}

#[test]
fn scale_factor_examples() {
    assert!((scale_factor(2, 2).unwrap() - 1.0 / 6.0f64.sqrt()).abs() < 1e-12);
    assert!((scale_factor(27, 2).unwrap() - 1.0 / 406.0f64.sqrt()).abs() < 1e-12);
    assert!((scale_factor(1, 2).unwrap() - 1.0 / 3.0f64.sqrt()).abs() < 1e-12);
    assert!((scale_factor(2, 2).unwrap() - 0.408248).abs() < 1e-6);
    assert!((scale_factor(27, 2).unwrap() - 0.049629).abs() < 1e-6);
    assert!((scale_factor(1, 2).unwrap() - 0.577350).abs() < 1e-6);
}

#[test]
fn scale_factor_rejects_low_orders() {
    assert!(matches!(scale_factor(5, 1), Err(Error::Contract(_))));
    assert!(matches!(scale_factor(5, 0), Err(Error::Contract(_))));
}

#[test]
fn pair_index_is_lexicographic() {
    let m = 7;
    let mut k = 0;
    for i in 0..m {
        for j in i..m {
            assert_eq!(pair_index(i, j, m), k);
            k += 1;
        }
    }
    assert_eq!(k, pair_count(m));
}

#[test]
fn conv3d_zero_input_passes_bias_through() {
    let window = WindowSpec::new(2, 2).unwrap();
    let mut bank = HoKernelBank::zeroed(1, 3, window, 1).unwrap();
    bank.bias = vec![0.5; 3];
    let input = VideoTensor::zeros(Shape::new(4, 5, 5, 1));
    let out = conv3d_forward(&input, &bank, window).unwrap();
    assert_eq!(out.shape(), Shape::new(3, 4, 4, 3));
    assert!(out.data().iter().all(|&v| v == 0.5));
}

#[test]
fn conv3d_identity_kernel_is_center_crop() {
    // 1x3x3 window with a single 1 at its spatial center, zero bias.
    let window = WindowSpec::new(1, 3).unwrap();
    let mut bank = HoKernelBank::zeroed(1, 1, window, 1).unwrap();
    bank.w1[4] = 1.0; // (dt=0, dh=1, dw=1)
    let input = random_tensor(Shape::new(2, 5, 6, 1), 11, 0.0, 1.0);
    let out = conv3d_forward(&input, &bank, window).unwrap();
    for t in 0..2 {
        for h in 0..3 {
            for w in 0..4 {
                assert_eq!(out.get(t, h, w, 0), input.get(t, h + 1, w + 1, 0));
            }
        }
    }
}

#[test]
fn conv3d_matches_quadruple_loop_reference() {
    let window = WindowSpec::new(1, 2).unwrap();
    let bank = random_bank(1, 1, window, 1, 21);
    let input = random_tensor(Shape::new(1, 4, 4, 1), 22, -1.0, 1.0);
    let out = conv3d_forward(&input, &bank, window).unwrap();
    // Hand-rolled reference: quadruple loop in the patch storage order.
    for l in 0..3 {
        for m in 0..3 {
            let mut acc = bank.bias[0];
            let mut flat = 0;
            for dt in 0..1 {
                for dh in 0..2 {
                    for dw in 0..2 {
                        acc += bank.w1[flat] * input.get(dt, l + dh, m + dw, 0);
                        flat += 1;
                    }
                }
            }
            let got = out.get(0, l, m, 0);
            assert!((got - acc).abs() / (acc.abs() + 1e-12) < 1e-12);
        }
    }
}

#[test]
fn hoconv_with_zero_w2_reduces_to_conv3d_exactly() {
    let window = WindowSpec::new(2, 3).unwrap();
    let linear = random_bank(1, 2, window, 1, 31);
    let mut hybrid = HoKernelBank::zeroed(2, 2, window, 1).unwrap();
    hybrid.bias.copy_from_slice(&linear.bias);
    hybrid.w1.copy_from_slice(&linear.w1);
    let input = random_tensor(Shape::new(4, 6, 6, 1), 32, 0.0, 1.0);
    let a = conv3d_forward(&input, &linear, window).unwrap();
    let b = hoconv3d_forward(&input, &hybrid, window).unwrap();
    for (x, y) in a.data().iter().zip(b.data()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn hoconv_pure_quadratic_scales_with_alpha_squared() {
    let window = WindowSpec::new(2, 2).unwrap();
    let mut bank = random_bank(2, 2, window, 1, 41);
    bank.w1.fill(0.0);
    bank.bias.fill(0.0);
    let input = random_tensor(Shape::new(3, 4, 4, 1), 42, -1.0, 1.0);
    let alpha = 1.7;
    let mut scaled = input.clone();
    for v in scaled.data_mut() {
        *v *= alpha;
    }
    let base = hoconv3d_forward(&input, &bank, window).unwrap();
    let out = hoconv3d_forward(&scaled, &bank, window).unwrap();
    for (x, y) in base.data().iter().zip(out.data()) {
        let expect = alpha * alpha * x;
        assert!((y - expect).abs() / (expect.abs() + 1e-12) < 1e-10);
    }
}

#[test]
fn hoconv_matches_oracle_on_random_instance() {
    let window = WindowSpec::new(2, 3).unwrap();
    let bank = random_bank(2, 1, window, 1, 51);
    let input = random_tensor(Shape::new(3, 5, 5, 1), 52, -1.0, 1.0);
    let fast = hoconv3d_forward(&input, &bank, window).unwrap();
    let slow = hoconv_oracle(&input, &bank, window).unwrap();
    assert!(max_rel_dev(&fast, &slow) < 1e-10);
}

#[test]
fn hoconv_matches_oracle_with_order_three() {
    let window = WindowSpec::new(2, 2).unwrap();
    let bank = random_bank(3, 2, window, 1, 53);
    let input = random_tensor(Shape::new(3, 4, 4, 1), 54, -1.0, 1.0);
    let fast = hoconv3d_forward(&input, &bank, window).unwrap();
    let slow = hoconv_oracle(&input, &bank, window).unwrap();
    assert!(max_rel_dev(&fast, &slow) < 1e-10);
}

#[test]
fn hoconv_matches_oracle_multichannel() {
    let window = WindowSpec::new(2, 2).unwrap();
    let bank = random_bank(2, 3, window, 2, 55);
    let input = random_tensor(Shape::new(3, 4, 5, 2), 56, -1.0, 1.0);
    let fast = hoconv3d_forward(&input, &bank, window).unwrap();
    let slow = hoconv_oracle(&input, &bank, window).unwrap();
    assert!(max_rel_dev(&fast, &slow) < 1e-10);
}

#[test]
fn oracle_single_pixel_closed_form() {
    // 1x1x1 window on a 1x1x1 video: output = a*v + scale2 * q * v^2.
    let window = WindowSpec::new(1, 1).unwrap();
    let mut bank = HoKernelBank::zeroed(2, 1, window, 1).unwrap();
    let (a, q, v) = (0.8, -1.3, 0.6);
    bank.w1[0] = a;
    bank.w2.as_mut().unwrap()[0] = q;
    let input = VideoTensor::from_data(Shape::new(1, 1, 1, 1), vec![v]).unwrap();
    let out = hoconv_oracle(&input, &bank, window).unwrap();
    let expect = a * v + bank.scale2() * q * v * v;
    assert!((out.get(0, 0, 0, 0) - expect).abs() < 1e-14);
    // scale2 here is 1/sqrt(3): monomials {1, x, x^2}.
    assert!((bank.scale2() - 1.0 / 3.0f64.sqrt()).abs() < 1e-14);
}

#[test]
fn oracle_zero_kernels_yield_constant_bias() {
    let window = WindowSpec::new(1, 2).unwrap();
    let mut bank = HoKernelBank::zeroed(2, 1, window, 1).unwrap();
    bank.bias[0] = -2.25;
    let input = random_tensor(Shape::new(2, 3, 3, 1), 61, 0.0, 1.0);
    let out = hoconv_oracle(&input, &bank, window).unwrap();
    assert!(out.data().iter().all(|&v| v == -2.25));
}

#[test]
fn w2_fold_symmetry_leaves_forward_unchanged() {
    // A dense asymmetric pairwise specification folded two ways — (i,j)
    // and its transpose — must give the same upper-triangular kernel
    // output.
    let window = WindowSpec::new(1, 2).unwrap();
    let m = window.volume();
    let mut dense = vec![0.0f64; m * m];
    let mut r = rng::seeded(71);
    for v in dense.iter_mut() {
        *v = r.random_range(-1.0..1.0);
    }
    let fold = |d: &[f64]| -> Vec<f64> {
        let mut w2 = vec![0.0; pair_count(m)];
        for i in 0..m {
            for j in i..m {
                w2[pair_index(i, j, m)] = if i == j {
                    d[i * m + i]
                } else {
                    d[i * m + j] + d[j * m + i]
                };
            }
        }
        w2
    };
    let transpose = |d: &[f64]| -> Vec<f64> {
        let mut t = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                t[j * m + i] = d[i * m + j];
            }
        }
        t
    };
    let mut bank_a = HoKernelBank::zeroed(2, 1, window, 1).unwrap();
    bank_a.w2 = Some(fold(&dense));
    let mut bank_b = HoKernelBank::zeroed(2, 1, window, 1).unwrap();
    bank_b.w2 = Some(fold(&transpose(&dense)));
    let input = random_tensor(Shape::new(2, 4, 4, 1), 72, -1.0, 1.0);
    let a = hoconv3d_forward(&input, &bank_a, window).unwrap();
    let b = hoconv3d_forward(&input, &bank_b, window).unwrap();
    assert!(max_rel_dev(&a, &b) < 1e-12);
}

#[test]
fn backward_zero_upstream_gives_zero_grads() {
    let window = WindowSpec::new(2, 2).unwrap();
    let bank = random_bank(2, 2, window, 1, 81);
    let input = random_tensor(Shape::new(3, 4, 4, 1), 82, -1.0, 1.0);
    let out_shape = window.output_shape(input.shape(), 2).unwrap();
    let upstream = VideoTensor::zeros(out_shape);
    let (gin, grads) = hoconv3d_backward(&input, &bank, window, &upstream).unwrap();
    assert!(gin.data().iter().all(|&v| v == 0.0));
    assert!(grads.bias.iter().all(|&v| v == 0.0));
    assert!(grads.w1.iter().all(|&v| v == 0.0));
    assert!(grads.w2.unwrap().iter().all(|&v| v == 0.0));
}

/// Scalar objective for finite differences: sum(output * probe).
fn probed_loss(input: &VideoTensor, bank: &HoKernelBank, window: WindowSpec, probe: &VideoTensor) -> f64 {
    let out = hoconv3d_forward(input, bank, window).unwrap();
    out.data().iter().zip(probe.data()).map(|(a, b)| a * b).sum()
}

#[test]
fn backward_matches_central_finite_differences() {
    let window = WindowSpec::new(2, 2).unwrap();
    let order = 2;
    let bank = random_bank(order, 2, window, 1, 91);
    let input = random_tensor(Shape::new(2, 4, 4, 1), 92, -1.0, 1.0);
    let out_shape = window.output_shape(input.shape(), 2).unwrap();
    let probe = random_tensor(out_shape, 93, -1.0, 1.0);

    let (gin, grads) = hoconv3d_backward(&input, &bank, window, &probe).unwrap();
    let h = 1e-5;
    let tol = 1e-4;
    let check = |expect: f64, got: f64, what: &str| {
        let denom = expect.abs().max(got.abs()).max(1e-6);
        assert!(
            (expect - got).abs() / denom < tol,
            "{what}: fd {expect} vs analytic {got}"
        );
    };

    // Input gradient.
    for i in 0..input.shape().len() {
        let mut plus = input.clone();
        plus.data_mut()[i] += h;
        let mut minus = input.clone();
        minus.data_mut()[i] -= h;
        let fd = (probed_loss(&plus, &bank, window, &probe)
            - probed_loss(&minus, &bank, window, &probe))
            / (2.0 * h);
        check(fd, gin.data()[i], &format!("input[{i}]"));
    }
    // Bias.
    for c in 0..bank.bias.len() {
        let mut plus = bank.clone();
        plus.bias[c] += h;
        let mut minus = bank.clone();
        minus.bias[c] -= h;
        let fd = (probed_loss(&input, &plus, window, &probe)
            - probed_loss(&input, &minus, window, &probe))
            / (2.0 * h);
        check(fd, grads.bias[c], &format!("bias[{c}]"));
    }
    // w1.
    for i in (0..bank.w1.len()).step_by(3) {
        let mut plus = bank.clone();
        plus.w1[i] += h;
        let mut minus = bank.clone();
        minus.w1[i] -= h;
        let fd = (probed_loss(&input, &plus, window, &probe)
            - probed_loss(&input, &minus, window, &probe))
            / (2.0 * h);
        check(fd, grads.w1[i], &format!("w1[{i}]"));
    }
    // w2.
    let gw2 = grads.w2.as_ref().unwrap();
    for i in (0..gw2.len()).step_by(7) {
        let mut plus = bank.clone();
        plus.w2.as_mut().unwrap()[i] += h;
        let mut minus = bank.clone();
        minus.w2.as_mut().unwrap()[i] -= h;
        let fd = (probed_loss(&input, &plus, window, &probe)
            - probed_loss(&input, &minus, window, &probe))
            / (2.0 * h);
        check(fd, gw2[i], &format!("w2[{i}]"));
    }
}

#[test]
fn backward_order3_matches_finite_differences_spot_check() {
    let window = WindowSpec::new(1, 2).unwrap();
    let bank = random_bank(3, 1, window, 1, 95);
    let input = random_tensor(Shape::new(1, 3, 3, 1), 96, -1.0, 1.0);
    let out_shape = window.output_shape(input.shape(), 1).unwrap();
    let probe = random_tensor(out_shape, 97, -1.0, 1.0);
    let (gin, grads) = hoconv3d_backward(&input, &bank, window, &probe).unwrap();
    let h = 1e-5;
    for i in 0..input.shape().len() {
        let mut plus = input.clone();
        plus.data_mut()[i] += h;
        let mut minus = input.clone();
        minus.data_mut()[i] -= h;
        let fd = (probed_loss(&plus, &bank, window, &probe)
            - probed_loss(&minus, &bank, window, &probe))
            / (2.0 * h);
        let denom = fd.abs().max(gin.data()[i].abs()).max(1e-6);
        assert!((fd - gin.data()[i]).abs() / denom < 1e-4);
    }
    let gw3 = grads.w3.as_ref().unwrap();
    for i in (0..gw3.len()).step_by(5) {
        let mut plus = bank.clone();
        plus.w3.as_mut().unwrap()[i] += h;
        let mut minus = bank.clone();
        minus.w3.as_mut().unwrap()[i] -= h;
        let fd = (probed_loss(&input, &plus, window, &probe)
            - probed_loss(&input, &minus, window, &probe))
            / (2.0 * h);
        let denom = fd.abs().max(gw3[i].abs()).max(1e-6);
        assert!((fd - gw3[i]).abs() / denom < 1e-4);
    }
}

#[test]
fn backward_with_zero_w2_matches_order1_backward() {
    let window = WindowSpec::new(2, 2).unwrap();
    let linear = random_bank(1, 2, window, 1, 101);
    let mut hybrid = HoKernelBank::zeroed(2, 2, window, 1).unwrap();
    hybrid.bias.copy_from_slice(&linear.bias);
    hybrid.w1.copy_from_slice(&linear.w1);
    let input = random_tensor(Shape::new(3, 4, 4, 1), 102, -1.0, 1.0);
    let out_shape = window.output_shape(input.shape(), 2).unwrap();
    let upstream = random_tensor(out_shape, 103, -1.0, 1.0);
    let (gin_a, _) = hoconv3d_backward(&input, &linear, window, &upstream).unwrap();
    let (gin_b, _) = hoconv3d_backward(&input, &hybrid, window, &upstream).unwrap();
    for (x, y) in gin_a.data().iter().zip(gin_b.data()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn backward_rejects_mismatched_upstream() {
    let window = WindowSpec::new(1, 2).unwrap();
    let bank = random_bank(2, 1, window, 1, 111);
    let input = random_tensor(Shape::new(2, 3, 3, 1), 112, 0.0, 1.0);
    let upstream = VideoTensor::zeros(Shape::new(1, 1, 1, 1));
    let err = hoconv3d_backward(&input, &bank, window, &upstream).unwrap_err();
    assert!(matches!(err, Error::Contract(_)));
}

#[test]
fn forward_reports_nonfinite_output_index() {
    let window = WindowSpec::new(1, 1).unwrap();
    let mut bank = HoKernelBank::zeroed(2, 1, window, 1).unwrap();
    bank.w1[0] = f64::MAX;
    bank.w2.as_mut().unwrap()[0] = f64::MAX;
    let input = VideoTensor::from_data(Shape::new(1, 1, 1, 1), vec![f64::MAX]).unwrap();
    let err = hoconv3d_forward(&input, &bank, window).unwrap_err();
    assert!(matches!(err, Error::Numeric(_)));
}

#[test]
fn tied_weights_rank_examples() {
    assert_eq!(tied_weights_rank_check(&[1.0, 2.0], 0.3), 1);
    assert_eq!(tied_weights_rank_check(&[1.0, 2.0], 0.0), 0);
    let mut r = rng::seeded(121);
    let w: Vec<f64> = (0..9).map(|_| r.random_range(-1.0..1.0)).collect();
    assert_eq!(tied_weights_rank_check(&w, 0.7), 1);
    // A free symmetric 9x9 pairwise matrix is full rank with probability 1.
    let mut w2 = vec![0.0; pair_count(9)];
    for v in w2.iter_mut() {
        *v = r.random_range(-1.0..1.0);
    }
    assert_eq!(quadratic_form_rank(&w2, 9), 9);
}

#[test]
fn scale2_tracks_window_volume() {
    let b1 = HoKernelBank::zeroed(2, 1, WindowSpec::new(3, 3).unwrap(), 1).unwrap();
    assert!((b1.scale2() - scale_factor(27, 2).unwrap()).abs() < 1e-15);
    let b2 = HoKernelBank::zeroed(2, 1, WindowSpec::new(3, 3).unwrap(), 2).unwrap();
    assert!((b2.scale2() - scale_factor(54, 2).unwrap()).abs() < 1e-15);
}

#[test]
fn oracle_equivalence_over_random_small_instances() {
    // Trimmed inline version of the acceptance sweep.
    let mut r = rng::seeded(131);
    for trial in 0..25 {
        let n_t = r.random_range(1..=3usize);
        let n_s = r.random_range(1..=3usize);
        let window = WindowSpec::new(n_t, n_s).unwrap();
        let cin = r.random_range(1..=2usize);
        let cout = r.random_range(1..=2usize);
        let t = r.random_range(n_t..=4usize);
        let h = r.random_range(n_s..=6usize);
        let w = r.random_range(n_s..=6usize);
        let order = if trial % 3 == 0 { 3 } else { 2 };
        let bank = random_bank(order, cout, window, cin, 1000 + trial as u64);
        let input = random_tensor(Shape::new(t, h, w, cin), 2000 + trial as u64, -1.0, 1.0);
        let fast = hoconv3d_forward(&input, &bank, window).unwrap();
        let slow = hoconv_oracle(&input, &bank, window).unwrap();
        assert!(
            max_rel_dev(&fast, &slow) < 1e-10,
            "trial {trial}: fast/oracle deviation"
        );
    }
}
