//! Self-checks behind `diagssm verify`. Each probe computes one quantity two
//! ways (or against a closed form) and reports the discrepancy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use diagssm::bench::bench_grid;
use diagssm::conv::{fft_causal_conv, recurrent_scan, Signal};
use diagssm::discretize::{discretize_at, discretize_diag};
use diagssm::hippo::{hippo_d_decomposition, make_hippo_legs, make_hippo_normal};
use diagssm::init::{init_c, init_lin, init_log_dt};
use diagssm::kernel::{dss_softmax_kernel, linspace, softmax_row_sums, vandermonde_kernel};
use diagssm::oracle::{
    conjecture_from_spectrum, dense_kernel, diagonal_spec_from_dense, legendre_gram, mean_divergence,
    state_space_transform, theorem_legsd_convergence,
};
use diagssm::{DenseSpec, DiagonalSpec, InitKind, RealPartMode, RealPartParam, Rule, C64};

#[derive(Clone, Debug, Serialize)]
pub struct ProbeResult {
    pub probe: String,
    pub params: Value,
    pub metrics: Value,
    pub pass: bool,
    /// Reported but not counted towards the exit status.
    pub informational: bool,
}

fn result(probe: &str, params: Value, metrics: Value, pass: bool) -> ProbeResult {
    ProbeResult {
        probe: probe.into(),
        params,
        metrics,
        pass,
        informational: false,
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    diff / max_abs(b).max(f64::MIN_POSITIVE)
}

fn random_spec(rng: &mut ChaCha8Rng) -> diagssm::Result<DiagonalSpec> {
    let kind = InitKind::ALL[rng.random_range(0..InitKind::ALL.len())];
    let seed = rng.random();
    let spec = kind.build(2 * rng.random_range(2..=32), seed)?;
    let c = init_c(spec.len(), seed ^ 1);
    Ok(spec.with_c(c)?.with_log_dt(init_log_dt(1e-3, 1e-1, seed)?))
}

fn kernel_vs_scan(cases: usize, seed: u64) -> diagssm::Result<ProbeResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let spec = random_spec(&mut rng)?;
        let l = rng.random_range(16..=1024);
        let rule = if case % 2 == 0 { Rule::Bilinear } else { Rule::Zoh };
        let disc = discretize_at(&spec, rule, spec.dt())?;
        let k = vandermonde_kernel(&spec, &disc, l)?;
        let (y, _) = recurrent_scan(&disc, spec.c_or_err()?, &Signal::impulse(l))?;
        worst = worst.max(rel_err(&k.values, y.channel(0)));
    }
    Ok(result(
        "kernel_vs_scan",
        json!({ "cases": cases, "tol": 1e-10 }),
        json!({ "max_rel_err": worst }),
        worst <= 1e-10,
    ))
}

fn diag_vs_dense(ns: &[usize], seed: u64) -> diagssm::Result<ProbeResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for &n in ns {
        let normal = make_hippo_normal(n)?;
        let c: Vec<C64> = (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0)).collect();
        let spec = DenseSpec::new(normal.a, normal.b, Some(c))?;
        let (_, v) = hippo_d_decomposition(n)?;
        let diag = diagonal_spec_from_dense(&state_space_transform(&spec, &v)?, 1e-8)?;
        for rule in [Rule::Bilinear, Rule::Zoh] {
            let dense = dense_kernel(&spec, rule, 0.01, 256)?;
            let k = vandermonde_kernel(&diag, &discretize_at(&diag, rule, 0.01)?, 256)?;
            let diff = dense.values.iter().zip(&k.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            worst = worst.max(diff / max_abs(&dense.values).max(1.0));
        }
    }
    Ok(result(
        "diag_vs_dense",
        json!({ "n": ns, "l": 256, "dt": 0.01, "tol": 1e-8 }),
        json!({ "max_err": worst }),
        worst <= 1e-8,
    ))
}

fn theorem(ns: &[usize], points: usize, require_ratio: bool) -> diagssm::Result<ProbeResult> {
    let r = theorem_legsd_convergence(ns, 3.0, points, 5, false)?;
    let ratio = r.reduction();
    let pass = r.strictly_decreasing && (!require_ratio || ratio <= 0.1);
    Ok(result(
        "legsd_convergence",
        json!({ "n": ns, "t_end": 3.0, "points": points, "rows": 5 }),
        json!({ "sup_errors": r.errors, "ratio": ratio, "strictly_decreasing": r.strictly_decreasing }),
        pass,
    ))
}

fn normal_real_parts(n: usize) -> diagssm::Result<ProbeResult> {
    let (spectrum, v) = hippo_d_decomposition(n)?;
    let a = make_hippo_normal(n)?.a;
    let av = a.matmul(&v);
    let mut rayleigh: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for (k, &lambda) in spectrum.eigenvalues.iter().enumerate() {
        let q: C64 = (0..n).map(|i| v[(i, k)].conj() * av[(i, k)]).sum();
        rayleigh = rayleigh.max((q.re + 0.5).abs());
        for i in 0..n {
            residual = residual.max((av[(i, k)] - lambda * v[(i, k)]).norm());
        }
    }
    let residual = residual / a.max_abs();
    let deviation = spectrum.max_real_deviation(-0.5);
    Ok(result(
        "normal_real_parts",
        json!({ "n": n, "tol": 1e-8 }),
        json!({ "max_real_deviation": deviation, "max_rayleigh_deviation": rayleigh, "rel_residual": residual }),
        deviation <= 1e-8 && rayleigh <= 1e-8 && residual <= 1e-8,
    ))
}

fn conjecture(n: usize) -> diagssm::Result<ProbeResult> {
    let (spectrum, _) = hippo_d_decomposition(n)?;
    let r = conjecture_from_spectrum(&spectrum)?;
    let pass = (0.4..=0.65).contains(&r.offset) && r.band_ratio < 4.0;
    Ok(ProbeResult {
        informational: true,
        ..result(
            "max_frequency_offset",
            json!({ "n": n, "offset_band": [0.4, 0.65], "band_ratio_limit": 4.0 }),
            json!({ "max_imag": r.max_imag, "offset": r.offset, "band_ratio": r.band_ratio }),
            pass,
        )
    })
}

fn orthonormality() -> ProbeResult {
    let g = legendre_gram(11, 32);
    let mut worst: f64 = 0.0;
    for (n, row) in g.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            worst = worst.max((v - if n == m { 1.0 } else { 0.0 }).abs());
        }
    }
    result(
        "legendre_orthonormality",
        json!({ "rows": 11, "quadrature_points": 32, "tol": 1e-8 }),
        json!({ "max_gram_err": worst }),
        worst <= 1e-8,
    )
}

fn streaming(ns: &[usize], ls: &[usize], seed: u64) -> diagssm::Result<ProbeResult> {
    let r = bench_grid(ns, ls, Rule::Bilinear, seed)?;
    Ok(result(
        "streaming_memory",
        json!({ "n": ns, "l": ls, "exponent_limit": 0.2 }),
        json!({
            "tracking": r.tracking,
            "identical_csv": r.all_identical,
            "streaming_exponent": r.streaming_exponent,
            "materialized_exponent": r.materialized_exponent,
        }),
        r.tracking && r.all_identical && r.streaming_exponent < 0.2,
    ))
}

fn fft_vs_scan(cases: usize, seed: u64) -> diagssm::Result<ProbeResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let spec = random_spec(&mut rng)?;
        let l = rng.random_range(16..=1024);
        let rule = if case % 2 == 0 { Rule::Bilinear } else { Rule::Zoh };
        let disc = discretize_at(&spec, rule, spec.dt())?;
        let k = vandermonde_kernel(&spec, &disc, l)?;
        let u = Signal::mono((0..l).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())?;
        let y_fft = fft_causal_conv(&u, &k)?;
        let (y_scan, _) = recurrent_scan(&disc, spec.c_or_err()?, &u)?;
        worst = worst.max(rel_err(y_fft.channel(0), y_scan.channel(0)));
    }
    Ok(result(
        "fft_vs_scan",
        json!({ "cases": cases, "tol": 1e-8 }),
        json!({ "max_rel_err": worst }),
        worst <= 1e-8,
    ))
}

fn stability(draws: usize, seed: u64) -> diagssm::Result<ProbeResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_radius: f64 = 0.0;
    for _ in 0..draws {
        let raw = rng.random::<f64>() * 16.0 - 9.0;
        let re = RealPartParam { mode: RealPartMode::Exp, raw: vec![raw] }.effective()[0];
        let a = C64::new(re, (rng.random::<f64>() - 0.5) * 2e3);
        let dt = 10f64.powf(-4.0 + 4.0 * rng.random::<f64>());
        for rule in [Rule::Bilinear, Rule::Zoh] {
            let d = discretize_diag(&[a], &[C64::new(1.0, 0.0)], rule, dt)?;
            max_radius = max_radius.max(d.a_bar[0].norm());
        }
    }
    Ok(result(
        "discrete_stability",
        json!({ "draws": draws, "mode": "exp" }),
        json!({ "max_abs_a_bar": max_radius }),
        max_radius < 1.0,
    ))
}

fn perturbation(n: usize, seed: u64) -> diagssm::Result<ProbeResult> {
    let t = linspace(0.0, 3.0, 512);
    let seeds = [seed, seed.wrapping_add(1), seed.wrapping_add(2)];
    let sigmas = [0.0, 0.3, 0.4, 0.5];
    let means = sigmas
        .iter()
        .map(|&s| mean_divergence(s, &seeds, n, &t))
        .collect::<diagssm::Result<Vec<f64>>>()?;
    let factor = means[3] / means[0];
    let monotone = means[1..].windows(2).all(|w| w[1] >= w[0]);
    Ok(ProbeResult {
        informational: true,
        ..result(
            "low_rank_perturbation",
            json!({ "n": n, "sigma": sigmas, "seeds": seeds, "t_end": 3.0, "points": 512 }),
            json!({ "mean_divergence": means, "factor": factor, "monotone": monotone }),
            factor > 10.0 && monotone,
        )
    })
}

fn softmax(seed: u64) -> diagssm::Result<ProbeResult> {
    let spec = init_lin(32)?.with_c(init_c(16, seed))?;
    let disc = discretize_at(&spec, Rule::Zoh, 0.01)?;
    let k = dss_softmax_kernel(&spec, &disc, 512)?;
    let sums = softmax_row_sums(&disc.a_bar, 512)?;
    let rescaled: Vec<C64> = spec.c_or_err()?.iter().zip(&sums).map(|(c, s)| c / s).collect();
    let via = vandermonde_kernel(&spec.clone().with_c(rescaled)?, &disc, 512)?;
    let identity = k.values.iter().zip(&via.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let short = dss_softmax_kernel(&spec, &disc, 256)?;
    let prefix = k.values[..256].iter().zip(&short.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(result(
        "softmax_identity",
        json!({ "n": 32, "l": [256, 512], "dt": 0.01 }),
        json!({ "identity_err": identity, "prefix_diff": prefix }),
        identity <= 1e-10 && prefix > 1e-6,
    ))
}

fn legs_structure(n: usize) -> diagssm::Result<ProbeResult> {
    let (legs, p) = make_hippo_legs(n)?;
    let normal = make_hippo_normal(n)?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let skew = normal.a[(i, j)].re + normal.a[(j, i)].re + if i == j { 1.0 } else { 0.0 };
            let low_rank = normal.a[(i, j)].re - p.p[i] * p.p[j] - legs.a[(i, j)].re;
            worst = worst.max(skew.abs()).max(low_rank.abs());
        }
    }
    Ok(result(
        "normal_plus_low_rank",
        json!({ "n": n }),
        json!({ "max_err": worst }),
        worst <= 1e-12 * n as f64,
    ))
}

pub fn run_probes(quick: bool, seed: u64) -> diagssm::Result<Vec<ProbeResult>> {
    let (cases, draws) = if quick { (10, 1000) } else { (50, 10_000) };
    Ok(vec![
        legs_structure(if quick { 32 } else { 256 })?,
        kernel_vs_scan(cases, seed)?,
        diag_vs_dense(if quick { &[4, 8] } else { &[4, 8, 16] }, seed)?,
        if quick { theorem(&[16, 64], 256, false)? } else { theorem(&[64, 256, 1024], 512, true)? },
        normal_real_parts(if quick { 64 } else { 256 })?,
        conjecture(if quick { 256 } else { 1024 })?,
        orthonormality(),
        if quick { streaming(&[16, 64], &[256, 4096], seed)? } else { streaming(&[64, 256, 1024], &[1024, 16384], seed)? },
        fft_vs_scan(cases, seed)?,
        stability(draws, seed)?,
        perturbation(if quick { 32 } else { 64 }, seed)?,
        softmax(seed)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_probes_pass() {
        assert!(orthonormality().pass);
        assert!(legs_structure(16).unwrap().pass);
        assert!(kernel_vs_scan(4, 3).unwrap().pass);
        assert!(fft_vs_scan(4, 3).unwrap().pass);
        assert!(stability(200, 3).unwrap().pass);
        assert!(softmax(3).unwrap().pass);
        assert!(normal_real_parts(16).unwrap().pass);
    }

    #[test]
    fn conjecture_is_informational() {
        let r = conjecture(64).unwrap();
        assert!(r.informational);
        assert!(r.metrics["offset"].as_f64().unwrap() < 0.0);
    }
}
