use proptest::prelude::*;

use diagssm::conv::{causal_conv_fft, recurrent_scan, Signal};
use diagssm::discretize::{discretize_at, discretize_bilinear, discretize_diag, discretize_zoh, Rule};
use diagssm::eigen::{hermitian_eigendecompose, DEFAULT_TOL};
use diagssm::hippo::{hippo_d_spectrum, make_hippo_legs, make_hippo_normal};
use diagssm::init::{
    collapse_spectrum, expand_spectrum, init_c, init_inv, init_inv2, init_lin, init_quad, init_real, InitKind,
    Pairing, RealPartMode, RealPartParam,
};
use diagssm::kernel::{dss_softmax_kernel, vandermonde_kernel, vandermonde_kernel_streaming};
use diagssm::linalg::Matrix;
use diagssm::oracle::{dense_kernel_complex, state_space_transform};
use diagssm::{DenseSpec, DiagonalSpec, C64};

fn spec_strategy() -> impl Strategy<Value = DiagonalSpec> {
    (0..InitKind::ALL.len(), 2usize..=32, any::<u64>(), -6.9f64..-2.3).prop_map(|(k, half, seed, log_dt)| {
        let spec = InitKind::ALL[k].build(2 * half, seed).unwrap();
        let c = init_c(spec.len(), seed.wrapping_add(1));
        spec.with_c(c).unwrap().with_log_dt(log_dt)
    })
}

fn rule_strategy() -> impl Strategy<Value = Rule> {
    prop_oneof![Just(Rule::Bilinear), Just(Rule::Zoh)]
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn spectrum_real_parts_and_pairs() {
    for n in [2, 16, 64, 256] {
        let s = hippo_d_spectrum(n).unwrap();
        assert!(s.max_real_deviation(-0.5) <= 1e-8, "N={n}");
        assert!(s.pairing_defect() <= 1e-10, "N={n}");
        assert!(s.eigenvalues.windows(2).all(|w| w[0].im >= w[1].im));
    }
}

#[test]
fn deterministic_inits_are_monotone() {
    let n = 64;
    let im = |s: DiagonalSpec| s.a.iter().map(|z| z.im).collect::<Vec<_>>();
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let inc = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    assert!(dec(&im(init_inv(n).unwrap())));
    assert!(dec(&im(init_inv2(n).unwrap())));
    assert!(inc(&im(init_lin(n).unwrap())));
    assert!(inc(&im(init_quad(n).unwrap())));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn legs_is_normal_minus_low_rank(n in 1usize..=64) {
        let (legs, p) = make_hippo_legs(n).unwrap();
        let normal = make_hippo_normal(n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let lhs = normal.a[(i, j)].re - p.p[i] * p.p[j];
                prop_assert!((lhs - legs.a[(i, j)].re).abs() <= 1e-12 * (1.0 + legs.a[(i, j)].re.abs()));
            }
        }
    }

    #[test]
    fn eigenvectors_are_unitary(n in 1usize..=12, seed in any::<u64>()) {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut h = Matrix::<C64>::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = C64::new(next(), 0.0);
            for j in 0..i {
                let z = C64::new(next(), next());
                h[(i, j)] = z;
                h[(j, i)] = z.conj();
            }
        }
        let e = hermitian_eigendecompose(&h, DEFAULT_TOL).unwrap();
        let gram = e.vectors.conj_transpose().matmul(&e.vectors);
        prop_assert!(gram.sub(&Matrix::identity(n)).max_abs() <= 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rules_differ_at_third_order(im in 0.0f64..20.0) {
        let a = C64::new(-0.5, im);
        let one = C64::new(1.0, 0.0);
        let constant = |dt: f64| {
            let bl = discretize_bilinear(&[a], &[one], dt).unwrap().a_bar[0];
            let zo = discretize_zoh(&[a], &[one], dt).unwrap().a_bar[0];
            (bl - zo).norm() / dt.powi(3)
        };
        let c: Vec<f64> = [1e-2, 1e-3, 1e-4].into_iter().map(constant).collect();
        let mean = c.iter().sum::<f64>() / 3.0;
        for v in &c {
            prop_assert!((v / mean - 1.0).abs() < 0.1, "{c:?}");
        }
    }

    #[test]
    fn discretization_preserves_stability(
        re in -1e3f64..-1e-9,
        im in -1e3f64..1e3,
        log_dt in -4.0f64..0.0,
        rule in rule_strategy(),
    ) {
        let d = discretize_diag(&[C64::new(re, im)], &[C64::new(1.0, 0.0)], rule, 10f64.powf(log_dt)).unwrap();
        prop_assert!(d.a_bar[0].norm() < 1.0);
    }

    #[test]
    fn zoh_input_map_limit(
        re in -10.0f64..0.0,
        im in -10.0f64..10.0,
        frac in 1e-6f64..1.0,
        b_re in -1.0f64..1.0,
        b_im in -1.0f64..1.0,
    ) {
        let a = C64::new(re, im);
        prop_assume!(a.norm() > 1e-6);
        let b = C64::new(b_re, b_im);
        let dt = 0.1 * frac / a.norm();
        let d = discretize_zoh(&[a], &[b], dt).unwrap();
        let lhs = (d.b_bar[0] - b * dt).norm();
        prop_assert!(lhs <= (a * b).norm() * dt * dt * (1.0 + 1e-12));
    }

    #[test]
    fn real_part_round_trip(log_mag in -6.0f64..4.0) {
        let re = -(10f64.powf(log_mag));
        let p = RealPartParam::from_effective(RealPartMode::Exp, &[re]).unwrap();
        let back = p.effective()[0];
        prop_assert!(((back - re) / re).abs() <= 1e-14);
    }

    #[test]
    fn real_spectra_expand_to_themselves(n in 1usize..40) {
        let spec = init_real(n).unwrap();
        let full = expand_spectrum(&spec.a, spec.pairing);
        prop_assert_eq!(collapse_spectrum(&full, Pairing::Real), spec.a);
    }

    #[test]
    fn streaming_matches_materialized(spec in spec_strategy(), l in 1usize..3000, rule in rule_strategy()) {
        let disc = discretize_at(&spec, rule, spec.dt()).unwrap();
        let a = vandermonde_kernel(&spec, &disc, l).unwrap();
        let b = vandermonde_kernel_streaming(&spec, &disc, l).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn kernel_is_scan_impulse(spec in spec_strategy(), l in 1usize..512, rule in rule_strategy()) {
        let disc = discretize_at(&spec, rule, spec.dt()).unwrap();
        let k = vandermonde_kernel(&spec, &disc, l).unwrap();
        let (y, _) = recurrent_scan(&disc, spec.c.as_ref().unwrap(), &Signal::impulse(l)).unwrap();
        let diff = k.values.iter().zip(y.channel(0)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(diff <= 1e-10 * max_abs(&k.values));
    }

    #[test]
    fn fft_conv_is_causal(u in prop::collection::vec(-1.0f64..1.0, 2..200), pos in any::<prop::sample::Index>()) {
        let l = u.len();
        let k: Vec<f64> = (0..l).map(|j| (0.9f64).powi(j as i32) * ((j as f64) * 0.3).cos()).collect();
        let base = causal_conv_fft(&u, &k).unwrap();
        let j = pos.index(l);
        let mut v = u.clone();
        v[j] += 0.5;
        let y = causal_conv_fft(&v, &k).unwrap();
        for i in 0..j {
            prop_assert!((y[i] - base[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn fft_conv_is_linear(
        pair in (2usize..300).prop_flat_map(|l| (
            prop::collection::vec(-1.0f64..1.0, l),
            prop::collection::vec(-1.0f64..1.0, l),
            prop::collection::vec(-1.0f64..1.0, l),
        )),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let (u, v, k) = pair;
        let mix: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
        let lhs = causal_conv_fft(&mix, &k).unwrap();
        let cu = causal_conv_fft(&u, &k).unwrap();
        let cv = causal_conv_fft(&v, &k).unwrap();
        for i in 0..u.len() {
            prop_assert!((lhs[i] - (alpha * cu[i] + beta * cv[i])).abs() <= 1e-10);
        }
    }

    #[test]
    fn softmax_depends_on_length(seed in any::<u64>(), half in 2usize..16) {
        let spec = init_lin(2 * half).unwrap().with_c(init_c(half, seed)).unwrap();
        let disc = discretize_at(&spec, Rule::Zoh, 0.01).unwrap();
        let long = dss_softmax_kernel(&spec, &disc, 512).unwrap();
        let short = dss_softmax_kernel(&spec, &disc, 256).unwrap();
        let diff = long.values[..256].iter().zip(&short.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(diff > 1e-6);
    }

    #[test]
    fn transform_preserves_kernel(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
        c in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        let (legs, _) = make_hippo_legs(8).unwrap();
        let spec = legs.with_c(c.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap();
        let v = Matrix::from_fn(8, 8, |i, j| {
            let (re, im) = entries[i * 8 + j];
            let noise = C64::new(re, im) * 0.25;
            if i == j { noise + 1.0 } else { noise }
        });
        let cond = v.norm_one() * v.inverse().unwrap().norm_one();
        prop_assume!(cond < 100.0);
        let t: DenseSpec = state_space_transform(&spec, &v).unwrap();
        let a = dense_kernel_complex(&spec, Rule::Bilinear, 0.05, 64).unwrap();
        let b = dense_kernel_complex(&t, Rule::Bilinear, 0.05, 64).unwrap();
        let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() <= 1e-8 * cond * scale);
        }
    }
}
