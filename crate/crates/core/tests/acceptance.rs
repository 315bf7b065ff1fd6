//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use diagssm::bench::bench_grid;
use diagssm::conv::{fft_causal_conv, recurrent_scan, Signal};
use diagssm::discretize::{discretize_at, discretize_diag, Rule};
use diagssm::fft::{fft, ifft};
use diagssm::hippo::{hippo_d_decomposition, make_hippo_legs, make_hippo_normal, Spectrum};
use diagssm::init::{init_c, init_log_dt, init_lin, InitKind, RealPartMode, RealPartParam};
use diagssm::kernel::{
    dss_softmax_kernel, envelope_bound, linspace, softmax_row_sums, vandermonde_kernel, weights,
};
use diagssm::linalg::Matrix;
use diagssm::memtrack::CountingAlloc;
use diagssm::oracle::{
    conjecture_from_spectrum, dense_kernel, diagonal_spec_from_dense, legendre_gram,
    mean_divergence, state_space_transform, theorem_legsd_convergence,
};
use diagssm::{DenseSpec, DiagonalSpec, C64};

#[global_allocator]
static GLOBAL: CountingAlloc = CountingAlloc;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / max_abs(b).max(f64::MIN_POSITIVE)
}

/// Random spec from any initialization family, with random C and timescale.
fn random_spec(rng: &mut ChaCha8Rng) -> DiagonalSpec {
    let kind = InitKind::ALL[rng.random_range(0..InitKind::ALL.len())];
    let n = 2 * rng.random_range(2..=32);
    let seed = rng.random();
    let spec = kind.build(n, seed).unwrap();
    let c = init_c(spec.len(), seed ^ 0x5eed);
    let log_dt = init_log_dt(1e-3, 1e-1, seed).unwrap();
    spec.with_c(c).unwrap().with_log_dt(log_dt)
}

fn c1_kernel_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let spec = random_spec(&mut rng);
        let l = rng.random_range(16..=1024);
        let rule = if case % 2 == 0 { Rule::Bilinear } else { Rule::Zoh };
        let disc = discretize_at(&spec, rule, spec.dt()).unwrap();
        let k = vandermonde_kernel(&spec, &disc, l).unwrap();
        let (y, _) = recurrent_scan(&disc, spec.c.as_ref().unwrap(), &Signal::impulse(l)).unwrap();
        worst = worst.max(rel_err(&k.values, y.channel(0)));
    }
    outcome(worst <= 1e-10, format!("50 specs, max relative error {worst:.2e} (limit 1e-10)"))
}

fn c2_diagonalization() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [4, 8, 16] {
        let normal = make_hippo_normal(n).unwrap();
        let (legs, _) = make_hippo_legs(n).unwrap();
        let c: Vec<C64> = (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0)).collect();
        let spec = DenseSpec::new(normal.a, legs.b, Some(c)).unwrap();
        let (_, v) = hippo_d_decomposition(n).unwrap();
        let diag = diagonal_spec_from_dense(&state_space_transform(&spec, &v).unwrap(), 1e-8).unwrap();
        for rule in [Rule::Bilinear, Rule::Zoh] {
            let dense = dense_kernel(&spec, rule, 0.01, 256).unwrap();
            let disc = discretize_at(&diag, rule, 0.01).unwrap();
            let k = vandermonde_kernel(&diag, &disc, 256).unwrap();
            let scale = max_abs(&dense.values).max(1.0);
            let diff = dense.values.iter().zip(&k.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            worst = worst.max(diff / scale);
        }
    }
    outcome(worst <= 1e-8, format!("N in {{4,8,16}}, both rules, max error {worst:.2e} (limit 1e-8)"))
}

fn c3_theorem() -> Outcome {
    let r = theorem_legsd_convergence(&[64, 256, 1024], 3.0, 512, 5, true).unwrap();
    let ratio = r.reduction();
    let zoh = r.zoh_errors.clone().unwrap_or_default();
    let zoh_bounded = zoh.iter().all(|e| e.is_finite());
    outcome(
        r.strictly_decreasing && ratio <= 0.1 && zoh_bounded,
        format!(
            "sup errors {:?}, N=1024/N=64 ratio {ratio:.2e} (limit 0.1); zoh errors {:?}",
            r.errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>(),
            zoh.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>(),
        ),
    )
}

/// Real parts of the eigenvalues and of the Rayleigh quotients `v^H A v`
/// taken against the dense matrix, plus the eigenpair residual.
fn real_part_check(n: usize, spectrum: &Spectrum, v: &Matrix<C64>) -> (f64, f64, f64) {
    let a = make_hippo_normal(n).unwrap().a;
    let av = a.matmul(v);
    let mut rayleigh: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for (k, &lambda) in spectrum.eigenvalues.iter().enumerate() {
        let q: C64 = (0..n).map(|i| v[(i, k)].conj() * av[(i, k)]).sum();
        rayleigh = rayleigh.max((q.re + 0.5).abs());
        for i in 0..n {
            residual = residual.max((av[(i, k)] - lambda * v[(i, k)]).norm());
        }
    }
    (spectrum.max_real_deviation(-0.5), rayleigh, residual / a.max_abs())
}

fn c4_proposition(big: &(Spectrum, Matrix<C64>)) -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for n in [2, 16, 64, 256, 1024] {
        let owned;
        let (s, v) = if n == 1024 {
            (&big.0, &big.1)
        } else {
            owned = hippo_d_decomposition(n).unwrap();
            (&owned.0, &owned.1)
        };
        let (a, b, c) = real_part_check(n, s, v);
        worst = (worst.0.max(a), worst.1.max(b), worst.2.max(c));
    }
    outcome(
        worst.0 <= 1e-8 && worst.1 <= 1e-8 && worst.2 <= 1e-8,
        format!(
            "max |Re(lambda)+1/2| {:.2e}, max |Re(v^H A v)+1/2| {:.2e}, relative residual {:.2e} (limit 1e-8)",
            worst.0, worst.1, worst.2
        ),
    )
}

fn c5_conjecture(big: &(Spectrum, Matrix<C64>)) -> Outcome {
    let r = conjecture_from_spectrum(&big.0).unwrap();
    let in_band = (0.4..=0.65).contains(&r.offset);
    let inverse_law = r.band_ratio < 4.0;
    outcome(
        in_band && inverse_law,
        format!(
            "N=1024: Im0 - N^2/pi = {:.6} (band [0.4, 0.65]; pi/6 = {:.6}); k*Im_k middle-half ratio {:.3} (limit 4)",
            r.offset,
            PI / 6.0,
            r.band_ratio
        ),
    )
}

fn c6_orthonormality() -> Outcome {
    let g = legendre_gram(11, 32);
    let mut worst: f64 = 0.0;
    for (n, row) in g.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            worst = worst.max((v - if n == m { 1.0 } else { 0.0 }).abs());
        }
    }
    outcome(worst <= 1e-8, format!("n, m <= 10, max |G - I| {worst:.2e} (limit 1e-8)"))
}

fn c7_streaming() -> Outcome {
    let r = bench_grid(&[64, 256, 1024], &[1 << 10, 1 << 14], Rule::Bilinear, 0).unwrap();
    let aux = |n, l| {
        r.points
            .iter()
            .find(|p| p.n == n && p.l == l)
            .map(|p| p.streaming_aux_bytes as f64)
            .unwrap()
    };
    let ratio = aux(1024, 1 << 14) / aux(64, 1 << 10);
    outcome(
        r.tracking && r.all_identical && r.streaming_exponent < 0.2 && ratio < 10.0,
        format!(
            "byte-identical CSV: {}; streaming exponent {:.3} (limit 0.2, materialized {:.3}); aux ratio {ratio:.2} (limit 10)",
            r.all_identical, r.streaming_exponent, r.materialized_exponent
        ),
    )
}

fn c8_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let spec = random_spec(&mut rng);
        let l = rng.random_range(16..=1024);
        let rule = if case % 2 == 0 { Rule::Bilinear } else { Rule::Zoh };
        let disc = discretize_at(&spec, rule, spec.dt()).unwrap();
        let k = vandermonde_kernel(&spec, &disc, l).unwrap();
        let u = Signal::mono((0..l).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).unwrap();
        let y_fft = fft_causal_conv(&u, &k).unwrap();
        let (y_scan, _) = recurrent_scan(&disc, spec.c.as_ref().unwrap(), &u).unwrap();
        worst = worst.max(rel_err(y_fft.channel(0), y_scan.channel(0)));
    }
    let mut round_trip: f64 = 0.0;
    for n in [12, 1000, 4096, 1 << 20] {
        let x: Vec<C64> = (0..n).map(|_| C64::new(rng.random(), rng.random())).collect();
        let back = ifft(&fft(&x));
        let scale = x.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let err = x.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        round_trip = round_trip.max(err / scale);
    }
    outcome(
        worst <= 1e-8 && round_trip <= 1e-12,
        format!("50 pairs, max relative error {worst:.2e} (limit 1e-8); fft round trip {round_trip:.2e} (limit 1e-12)"),
    )
}

fn c9_stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut max_radius: f64 = 0.0;
    for _ in 0..10_000 {
        let raw = rng.random::<f64>() * 16.0 - 9.0;
        let re = RealPartParam { mode: RealPartMode::Exp, raw: vec![raw] }.effective()[0];
        let a = C64::new(re, (rng.random::<f64>() - 0.5) * 2e3);
        let dt = 10f64.powf(-4.0 + 4.0 * rng.random::<f64>());
        for rule in [Rule::Bilinear, Rule::Zoh] {
            let d = discretize_diag(&[a], &[C64::new(1.0, 0.0)], rule, dt).unwrap();
            max_radius = max_radius.max(d.a_bar[0].norm());
        }
    }
    let mut envelope_ok = true;
    let mut decays = true;
    for _ in 0..10 {
        let spec = random_spec(&mut rng);
        spec.check_real_parts(RealPartMode::Exp).unwrap();
        let disc = discretize_at(&spec, Rule::Zoh, spec.dt()).unwrap();
        let l = 2048;
        let k = vandermonde_kernel(&spec, &disc, l).unwrap();
        let w = weights(&spec, &disc).unwrap();
        let rho = disc.spectral_radius();
        let total: f64 = w.iter().map(|z| z.norm()).sum::<f64>() * disc.pairing.factor();
        let env = envelope_bound(&spec, &disc, l).unwrap();
        for (j, v) in k.values.iter().enumerate() {
            let geometric = total * rho.powi(j as i32);
            envelope_ok &= v.abs() <= env[j] * (1.0 + 1e-10) && env[j] <= geometric * (1.0 + 1e-10);
        }
        decays &= rho < 1.0 && env[l - 1] < env[0];
    }
    outcome(
        max_radius < 1.0 && envelope_ok && decays,
        format!("10^4 draws, max |A_bar| = {max_radius:.12}; envelope bound holds: {envelope_ok}; decays: {decays}"),
    )
}

fn c10_perturbation() -> Outcome {
    let t = linspace(0.0, 3.0, 512);
    let seeds = [0, 1, 2];
    let sigmas = [0.0, 0.3, 0.4, 0.5];
    let means: Vec<f64> = sigmas
        .iter()
        .map(|&s| mean_divergence(s, &seeds, 64, &t).unwrap())
        .collect();
    let factor = means[3] / means[0];
    let monotone = means[1..].windows(2).all(|w| w[1] >= w[0]);
    outcome(
        factor > 10.0 && monotone,
        format!(
            "mean divergence sigma=0/0.3/0.4/0.5: {:.3}/{:.3}/{:.3}/{:.3}; sigma=0.5 factor {factor:.2} (limit > 10); monotone: {monotone}",
            means[0], means[1], means[2], means[3]
        ),
    )
}

fn c11_softmax() -> Outcome {
    let spec = init_lin(32).unwrap().with_c(init_c(16, 11)).unwrap();
    let disc = discretize_at(&spec, Rule::Zoh, 0.01).unwrap();
    let l = 512;
    let k = dss_softmax_kernel(&spec, &disc, l).unwrap();
    let sums = softmax_row_sums(&disc.a_bar, l).unwrap();
    let rescaled: Vec<C64> = spec.c.as_ref().unwrap().iter().zip(&sums).map(|(c, s)| c / s).collect();
    let via = vandermonde_kernel(&spec.clone().with_c(rescaled).unwrap(), &disc, l).unwrap();
    let identity = k.values.iter().zip(&via.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let short = dss_softmax_kernel(&spec, &disc, 256).unwrap();
    let prefix = k.values[..256]
        .iter()
        .zip(&short.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    outcome(
        identity <= 1e-10 && prefix > 1e-6,
        format!("identity error {identity:.2e} (limit 1e-10); L=512 vs L=256 prefix difference {prefix:.2e} (needs > 1e-6)"),
    )
}

fn run(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f));
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    println!(
        "[{}] criterion {id:>2} {name}: {detail} ({secs:.1}s)",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn main() {
    println!("running 11 acceptance criteria");
    let mut results = vec![
        run(1, "kernel-oracle equivalence", c1_kernel_oracle),
        run(2, "diagonalization equivalence", c2_diagonalization),
        run(3, "LegS-D basis convergence", c3_theorem),
    ];
    let start = Instant::now();
    let big = hippo_d_decomposition(1024).expect("N=1024 decomposition");
    println!("(N=1024 eigendecomposition shared by criteria 4 and 5: {:.1}s)", start.elapsed().as_secs_f64());
    results.push(run(4, "real parts -1/2", || c4_proposition(&big)));
    results.push(run(5, "max-imaginary conjecture", || c5_conjecture(&big)));
    results.push(run(6, "Legendre orthonormality", c6_orthonormality));
    results.push(run(7, "streaming kernel", c7_streaming));
    results.push(run(8, "convolution duality", c8_duality));
    results.push(run(9, "stability", c9_stability));
    results.push(run(10, "perturbation sensitivity", c10_perturbation));
    results.push(run(11, "softmax normalization", c11_softmax));
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
