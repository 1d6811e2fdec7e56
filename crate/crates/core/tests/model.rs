mod common;

use proptest::prelude::*;
use spinsim_core::fastsum::{sum_dense, DenseMatrix, Workspace};
use spinsim_core::model::{rate_function, DenseModel, Link, NormKind, RateModel};
use spinsim_core::{GaussConv1D, IsingKac2D, SpinState};

fn dense_tanh_model(n: usize, seed: u64) -> DenseModel<f64> {
    let w: Vec<f64> = common::uniforms(seed, n * n).iter().map(|u| 2.0 * u - 1.0).collect();
    DenseModel::new(
        DenseMatrix::new(n, w).unwrap(),
        Link::TanhIsing {
            sign: 1.0,
            gain: 1.5,
            field: 0.2,
        },
        Link::LinearWithFloor {
            scale: -0.5,
            offset: 1.0,
            floor: 0.05,
        },
    )
    .unwrap()
}

#[test]
fn zero_state_has_zero_potentials() {
    let m = GaussConv1D::new(100, 10.0, 1.0).unwrap();
    let v = m.potentials(&vec![0.0; 100], &mut Workspace::new()).unwrap();
    assert!(v.iter().all(|&x| x == 0.0));
}

#[test]
fn dense_potentials_match_double_loop() {
    let n = 8;
    let w: Vec<f64> = common::uniforms(1, n * n);
    let bits: Vec<bool> = common::uniforms(2, n).iter().map(|&u| u < 0.5).collect();
    let x = SpinState::from_bools(bits).to_real::<f64>();
    let model = DenseModel::new(
        DenseMatrix::new(n, w.clone()).unwrap(),
        Link::linear(1.0),
        Link::Constant(1.0),
    )
    .unwrap();
    let v = model.potentials(&x, &mut Workspace::new()).unwrap();
    for i in 0..n {
        let mut want = 0.0;
        for j in 0..n {
            want += w[i * n + j] * x[j];
        }
        assert!((v[i] - want).abs() < 1e-12);
    }
}

#[test]
fn potentials_reject_wrong_length() {
    let m = GaussConv1D::new(10, 2.0, 1.0).unwrap();
    assert!(matches!(
        m.potentials(&[0.0; 9], &mut Workspace::new()),
        Err(spinsim_core::Error::Config(_))
    ));
}

#[test]
fn gauss_all_ones_interior_rate_is_two() {
    let n = 2000;
    let m = GaussConv1D::new(n, 20.0, 1.0).unwrap();
    let up = m.rates_up(&vec![1.0; n], &mut Workspace::new()).unwrap();
    // interior sites see the full kernel mass; the sum differs from the
    // integral by O(1/n)
    assert!((up[n / 2] - 2.0).abs() < 1e-2, "{}", up[n / 2]);
    let nc = m.norm_constants();
    let max_up = up.iter().copied().fold(0.0, f64::max);
    assert!((nc.q_inf - max_up.max(1.0)).abs() < 1e-12);
    assert!((nc.q_inf - 2.0).abs() < 1e-2);
    assert_eq!(nc.kind, NormKind::Exact);
}

#[test]
fn zero_rate_model_has_zero_norms() {
    let m = common::constant_model(5, 0.0, 0.0);
    let nc = m.norm_constants();
    for v in [
        nc.q_inf,
        nc.dstar_q_1,
        nc.d_q_1,
        nc.dstar_q_inf,
        nc.dstar_q_21,
        nc.gamma_n,
        nc.big_gamma_n,
    ] {
        assert_eq!(v, 0.0);
    }
}

#[test]
fn ising_norms_are_bounded() {
    let m = IsingKac2D::with_a_scale(16, 1.0, 40.0, false).unwrap();
    let nc = m.norm_constants();
    assert!(nc.q_inf <= 1.0);
    assert!(nc.dstar_q_1 <= nc.d_q_1);
    assert!(nc.gamma_n > 0.0 && nc.big_gamma_n > 0.0);
    assert_eq!(nc.kind, NormKind::UpperBound);
}

#[test]
fn rate_function_selects_direction() {
    let n = 30;
    let m = GaussConv1D::new(n, 5.0, 1.0).unwrap();
    let ones = SpinState::ones(n);
    for i in 0..n {
        assert_eq!(rate_function::<f64, _>(&m, &ones, i).unwrap(), 1.0);
    }
    let mut eta = SpinState::zeros(n);
    eta.set(3, true);
    let x = eta.to_real::<f64>();
    let mut ws = Workspace::new();
    let up = m.rates_up(&x, &mut ws).unwrap();
    assert_eq!(rate_function::<f64, _>(&m, &eta, 4).unwrap(), up[4]);
    assert_eq!(rate_function::<f64, _>(&m, &eta, 3).unwrap(), 1.0);
    assert!(rate_function::<f64, _>(&m, &eta, n).is_err());
}

fn check_jacobian<M: RateModel<f64>>(model: &M, seed: u64) {
    let n = model.size();
    let mut ws = Workspace::new();
    for pair in 0..10 {
        let u = common::uniforms(seed * 100 + pair, 2 * n);
        let x: Vec<f64> = u[..n].iter().map(|v| 0.05 + 0.9 * v).collect();
        let w: Vec<f64> = u[n..].iter().map(|v| 2.0 * v - 1.0).collect();
        let jt = model.jacobian_transpose_apply(&x, &w, false, &mut ws).unwrap();
        let j = model.jacobian_apply(&x, &w, false, &mut ws).unwrap();
        let h = 1e-6;
        // full finite-difference Jacobian, column k = ∂_k drift
        let mut cols = Vec::with_capacity(n);
        for k in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let dp = model.drift(&xp, &mut ws).unwrap();
            let dm = model.drift(&xm, &mut ws).unwrap();
            cols.push(dp.iter().zip(&dm).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
        }
        let scale = jt.iter().chain(&j).fold(1e-3f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            let fd_t: f64 = (0..n).map(|k| cols[i][k] * w[k]).sum();
            let fd: f64 = (0..n).map(|k| cols[k][i] * w[k]).sum();
            assert!(
                (fd_t - jt[i]).abs() / scale < 1e-5,
                "transpose site {i}: {fd_t} vs {}",
                jt[i]
            );
            assert!((fd - j[i]).abs() / scale < 1e-5, "direct site {i}: {fd} vs {}", j[i]);
        }
    }
}

#[test]
fn jacobians_match_finite_differences() {
    check_jacobian(&GaussConv1D::new(64, 6.0, 1.0).unwrap(), 1);
    check_jacobian(&IsingKac2D::new(6, 2.0, 1.5, false).unwrap(), 2);
    check_jacobian(&IsingKac2D::new(5, 1.0, 0.5, true).unwrap(), 3);
    check_jacobian(&dense_tanh_model(12, 9), 4);
}

#[test]
fn off_diagonal_jacobian_drops_own_site_terms() {
    let model = dense_tanh_model(6, 3);
    let n = 6;
    let mut ws = Workspace::new();
    let x = vec![0.3; n];
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let full = model.jacobian_transpose_apply(&x, &e, false, &mut ws).unwrap();
        let off = model.jacobian_transpose_apply(&x, &e, true, &mut ws).unwrap();
        let direct_off = model.jacobian_apply(&x, &e, true, &mut ws).unwrap();
        // column k of J*ᵀ is row k of J*, whose (k, k) entry vanishes
        assert!(off[k].abs() < 1e-15);
        assert!(direct_off[k].abs() < 1e-15);
        for i in 0..n {
            if i != k {
                assert!((full[i] - off[i]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn fft_potentials_match_dense_oracle() {
    for &periodic in &[false, true] {
        for &n in &[64usize, 1000, 4096] {
            let m = spinsim_core::model::GaussConv1DModel::with_boundary(n, 20.0, 1.0, periodic).unwrap();
            let x: Vec<f64> = common::uniforms(n as u64, n);
            let v = m.potentials(&x, &mut Workspace::new()).unwrap();
            let mut w = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    w.push(m.weight(i, j));
                }
            }
            let want = sum_dense(&w, &x).unwrap();
            let err = v.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "n={n} periodic={periodic}: {err}");
        }
    }
}

#[test]
fn f32_models_agree_with_f64() {
    let m32 = spinsim_core::model::GaussConv1DModel::<f32>::new(128, 10.0, 1.0).unwrap();
    let m64 = GaussConv1D::new(128, 10.0, 1.0).unwrap();
    let x: Vec<f64> = common::uniforms(5, 128);
    let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
    let a = m64.drift(&x, &mut Workspace::new()).unwrap();
    let b = m32.drift(&x32, &mut Workspace::new()).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p - *q as f64).abs() < 1e-5);
    }
}

#[test]
fn drift_combines_rates() {
    let m = IsingKac2D::new(7, 1.0, 2.0, false).unwrap();
    let x: Vec<f64> = common::uniforms(11, 49);
    let mut ws = Workspace::new();
    let up = m.rates_up(&x, &mut ws).unwrap();
    let down = m.rates_down(&x, &mut ws).unwrap();
    let d = m.drift(&x, &mut ws).unwrap();
    for i in 0..49 {
        assert!((d[i] - ((1.0 - x[i]) * up[i] - x[i] * down[i])).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rates_are_nonnegative(xs in prop::collection::vec(0.0f64..=1.0, 36)) {
        let mut ws = Workspace::new();
        let ising = IsingKac2D::new(6, 3.0, 1.0, false).unwrap();
        let gauss = GaussConv1D::new(36, 4.0, 1.0).unwrap();
        let dense = dense_tanh_model(36, 7);
        for m in [&ising as &dyn RateModel<f64>, &gauss, &dense] {
            let up = m.rates_up(&xs, &mut ws).unwrap();
            let down = m.rates_down(&xs, &mut ws).unwrap();
            prop_assert!(up.iter().chain(&down).all(|&r| r >= 0.0));
        }
        let up = ising.rates_up(&xs, &mut ws).unwrap();
        let down = ising.rates_down(&xs, &mut ws).unwrap();
        for i in 0..36 {
            prop_assert!((up[i] + down[i] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gauss_rates_are_linear(
        xs in prop::collection::vec(0.0f64..=1.0, 50),
        ys in prop::collection::vec(0.0f64..=1.0, 50),
        alpha in 0.0f64..=1.0,
    ) {
        let m = GaussConv1D::new(50, 8.0, 1.0).unwrap();
        let mut ws = Workspace::new();
        let mix: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
        let a = m.rates_up(&mix, &mut ws).unwrap();
        let b = m.rates_up(&xs, &mut ws).unwrap();
        let c = m.rates_up(&ys, &mut ws).unwrap();
        for i in 0..50 {
            prop_assert!((a[i] - (alpha * b[i] + (1.0 - alpha) * c[i])).abs() < 1e-12);
        }
    }
}
