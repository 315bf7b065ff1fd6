use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::Serialize;

use diagssm::bench::bench_grid;
use diagssm::conv::{causal_conv_fft, recurrent_scan, Signal};
use diagssm::discretize::discretize;
use diagssm::hippo::make_hippo_normal;
use diagssm::io::{
    fmt_f64, kernel_meta, read_series_csv, write_basis_csv, write_series_csv, write_spectra_csv, Meta,
};
use diagssm::kernel::{dss_softmax_kernel, linspace, sample_basis, sample_basis_dense, vandermonde_kernel,
    vandermonde_kernel_streaming};
use diagssm::oracle::{fout_truncation_basis, legendre_table, legs_basis};
use diagssm::{BasisTable, DenseSpec, InitKind, Kernel, Rule, C64};

use crate::config::{DiscArg, Format, ModelArgs, OutputArgs, RunConfig, SeedArgs, UsageError};
use crate::output::{emit, json_bytes};
use crate::probes::{run_probes, ProbeResult};

#[derive(Args, Debug)]
pub struct KernelCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Kernel length.
    #[arg(long = "L", short = 'l', default_value_t = 1024)]
    pub l: usize,
    /// Use the fixed-memory streaming evaluator.
    #[arg(long)]
    pub streaming: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisSystem {
    /// Diagonal system from --init with B = 1, one row per stored mode.
    Diag,
    /// Dense HiPPO-LegS.
    Legs,
    /// Normal part A + P P^T with B / 2.
    Normal,
    /// Normal part with the unscaled B.
    NormalUnscaled,
    /// Truncated Fourier system A_n = 2 pi i n.
    Fout,
    /// Closed form L_n(exp(-t)) exp(-t).
    Legendre,
}

#[derive(Args, Debug)]
pub struct BasisCmd {
    #[arg(long, value_enum, default_value_t = BasisSystem::Normal)]
    pub system: BasisSystem,
    #[arg(long, default_value = "legsd")]
    pub init: String,
    #[arg(long = "N", short = 'n', default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 3.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    /// Keep only the first rows.
    #[arg(long)]
    pub rows: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SpectrumCmd {
    #[arg(long, default_value = "legsd")]
    pub init: String,
    #[arg(long = "N", short = 'n', default_value_t = 64)]
    pub n: usize,
    /// Emit legsd, inv, inv2, quad and lin together.
    #[arg(long)]
    pub all: bool,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConvMode {
    Fft,
    Scan,
}

#[derive(Args, Debug)]
pub struct ConvCmd {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Input signal as an `l,value` CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ConvMode::Fft)]
    pub mode: ConvMode,
    /// Precomputed kernel CSV; only valid with --mode fft.
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyCmd {
    /// Smaller sizes for a fast smoke run.
    #[arg(long)]
    pub quick: bool,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchCmd {
    #[arg(long, value_delimiter = ',', default_values_t = vec![64, 256, 1024])]
    pub ns: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1024, 16384])]
    pub ls: Vec<usize>,
    #[arg(long, value_enum, default_value_t = DiscArg::Bilinear)]
    pub disc: DiscArg,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Exit status of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_init(s: &str) -> anyhow::Result<InitKind> {
    s.parse::<InitKind>().map_err(|e| usage(e.to_string()))
}

fn series_bytes(meta: &Meta, values: &[f64], format: Format) -> anyhow::Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_series_csv(&mut buf, meta, values)?;
            Ok(buf)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Series<'a> {
                meta: serde_json::Map<String, serde_json::Value>,
                values: &'a [f64],
            }
            let meta = meta.iter().map(|(k, v)| (k.clone(), v.clone().into())).collect();
            json_bytes(&Series { meta, values })
        }
    }
}

pub fn compute_kernel(cfg: &RunConfig, l: usize, streaming: bool) -> anyhow::Result<Kernel> {
    if l == 0 {
        return Err(usage("--L must be positive"));
    }
    let spec = cfg.build_spec()?;
    let disc = discretize(&spec, cfg.rule)?;
    let kernel = if cfg.softmax {
        dss_softmax_kernel(&spec, &disc, l)?
    } else if streaming {
        vandermonde_kernel_streaming(&spec, &disc, l)?
    } else {
        vandermonde_kernel(&spec, &disc, l)?
    };
    Ok(kernel)
}

pub fn kernel(cmd: &KernelCmd) -> anyhow::Result<Status> {
    let cfg = RunConfig::resolve(&cmd.model)?;
    let k = compute_kernel(&cfg, cmd.l, cmd.streaming)?;
    let mut meta = kernel_meta(&k);
    meta.extend(cfg.meta());
    emit(cmd.out.output.as_deref(), &series_bytes(&meta, &k.values, cmd.out.format)?)?;
    Ok(Status::Ok)
}

pub fn compute_basis(cmd: &BasisCmd) -> anyhow::Result<BasisTable> {
    if cmd.n == 0 {
        return Err(usage("--N must be positive"));
    }
    if cmd.points == 0 || !(cmd.t_end > 0.0 && cmd.t_end.is_finite()) {
        return Err(usage("need --points >= 1 and a positive --t-end"));
    }
    let t = linspace(0.0, cmd.t_end, cmd.points);
    let table = match cmd.system {
        BasisSystem::Diag => sample_basis(&parse_init(&cmd.init)?.build(cmd.n, cmd.seed.seed)?, &t)?,
        BasisSystem::Legs => legs_basis(cmd.n, &t)?,
        BasisSystem::Normal | BasisSystem::NormalUnscaled => {
            let normal = make_hippo_normal(cmd.n)?;
            let scale = if cmd.system == BasisSystem::Normal { 0.5 } else { 1.0 };
            let b = normal.b.iter().map(|z| z * scale).collect();
            sample_basis_dense(&DenseSpec::new(normal.a, b, None)?, &t)?
        }
        BasisSystem::Fout => fout_truncation_basis(cmd.n, &t)?,
        BasisSystem::Legendre => legendre_table(cmd.n, &t),
    };
    Ok(match cmd.rows {
        Some(r) => table.truncate_rows(r),
        None => table,
    })
}

pub fn basis(cmd: &BasisCmd) -> anyhow::Result<Status> {
    let table = compute_basis(cmd)?;
    let system = cmd.system.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let meta: Meta = vec![
        ("system".into(), system),
        ("n".into(), cmd.n.to_string()),
        ("t_end".into(), fmt_f64(cmd.t_end)),
        ("points".into(), cmd.points.to_string()),
        ("rows".into(), table.rows().to_string()),
        ("max_imag".into(), fmt_f64(table.max_imag())),
    ];
    let bytes = match cmd.out.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_basis_csv(&mut buf, &meta, &table)?;
            buf
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                system: &'a str,
                t: &'a [f64],
                rows: Vec<Vec<f64>>,
            }
            let rows = table.values.iter().map(|r| r.iter().map(|z| z.re).collect()).collect();
            json_bytes(&Out { system: &meta[0].1, t: &table.t_grid, rows })?
        }
    };
    emit(cmd.out.output.as_deref(), &bytes)?;
    Ok(Status::Ok)
}

pub fn compute_spectra(cmd: &SpectrumCmd) -> anyhow::Result<Vec<(String, Vec<C64>)>> {
    let kinds = if cmd.all {
        vec![InitKind::Legsd, InitKind::Inv, InitKind::Inv2, InitKind::Quad, InitKind::Lin]
    } else {
        vec![parse_init(&cmd.init)?]
    };
    kinds
        .into_iter()
        .map(|k| Ok((k.to_string(), k.build(cmd.n, cmd.seed.seed)?.a)))
        .collect()
}

pub fn spectrum(cmd: &SpectrumCmd) -> anyhow::Result<Status> {
    let spectra = compute_spectra(cmd)?;
    let bytes = match cmd.out.format {
        Format::Csv => {
            let meta: Meta = vec![("n".into(), cmd.n.to_string()), ("half".into(), "true".into())];
            let mut buf = Vec::new();
            write_spectra_csv(&mut buf, &meta, &spectra)?;
            buf
        }
        Format::Json => {
            let list: Vec<serde_json::Value> = spectra
                .iter()
                .map(|(k, v)| {
                    let values: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
                    serde_json::json!({ "init": k, "eigenvalues": values })
                })
                .collect();
            json_bytes(&list)?
        }
    };
    emit(cmd.out.output.as_deref(), &bytes)?;
    Ok(Status::Ok)
}

fn read_series(path: &PathBuf) -> anyhow::Result<(Meta, Vec<f64>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_series_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn conv(cmd: &ConvCmd) -> anyhow::Result<Status> {
    let cfg = RunConfig::resolve(&cmd.model)?;
    if cmd.kernel.is_some() && cmd.mode == ConvMode::Scan {
        return Err(usage("--kernel only applies to --mode fft; a scan needs the state space model"));
    }
    if cmd.mode == ConvMode::Scan && cfg.softmax {
        return Err(usage("--softmax kernels have no recurrent form here; use --mode fft"));
    }
    let (_, u) = read_series(&cmd.input)?;
    let l = u.len();
    let (y, source) = match cmd.mode {
        ConvMode::Fft => {
            let (k, source) = match &cmd.kernel {
                Some(path) => {
                    let (_, k) = read_series(path)?;
                    if k.len() < l {
                        bail!("kernel has {} taps but the input has {l} samples", k.len());
                    }
                    (k[..l].to_vec(), path.display().to_string())
                }
                None => (compute_kernel(&cfg, l, false)?.values, "model".to_string()),
            };
            (causal_conv_fft(&u, &k)?, source)
        }
        ConvMode::Scan => {
            let spec = cfg.build_spec()?;
            let disc = discretize(&spec, cfg.rule)?;
            let (y, _) = recurrent_scan(&disc, spec.c_or_err()?, &Signal::mono(u)?)?;
            (y.into_channels().remove(0), "model".to_string())
        }
    };
    let mode = if cmd.mode == ConvMode::Fft { "fft" } else { "scan" };
    let mut meta: Meta = vec![
        ("mode".into(), mode.into()),
        ("kernel".into(), source),
        ("init".into(), cfg.init.to_string()),
        ("rule".into(), cfg.rule.to_string()),
        ("n".into(), cfg.n.to_string()),
        ("len".into(), l.to_string()),
    ];
    meta.extend(cfg.meta());
    emit(cmd.out.output.as_deref(), &series_bytes(&meta, &y, cmd.out.format)?)?;
    Ok(Status::Ok)
}

pub fn verify(cmd: &VerifyCmd) -> anyhow::Result<Status> {
    let results: Vec<ProbeResult> = run_probes(cmd.quick, cmd.seed.seed)?;
    for r in &results {
        let tag = if r.pass { "PASS" } else { "FAIL" };
        let note = if r.informational { " (informational)" } else { "" };
        eprintln!("[{tag}] {}{note}", r.probe);
    }
    emit(cmd.output.as_deref(), &json_bytes(&results)?)?;
    let failed = results.iter().any(|r| !r.pass && !r.informational);
    Ok(if failed { Status::CheckFailed } else { Status::Ok })
}

pub fn bench(cmd: &BenchCmd) -> anyhow::Result<Status> {
    if cmd.ns.is_empty() || cmd.ls.is_empty() || cmd.ns.iter().chain(&cmd.ls).any(|&v| v == 0) {
        return Err(usage("--ns and --ls need positive sizes"));
    }
    if cmd.ns.iter().any(|n| n % 2 == 1) {
        return Err(usage("--ns sizes must be even"));
    }
    if cmd.ns.len() * cmd.ls.len() < 2 {
        return Err(usage("need at least two (N, L) points to fit an exponent"));
    }
    let report = bench_grid(&cmd.ns, &cmd.ls, Rule::from(cmd.disc), cmd.seed.seed)?;
    emit(cmd.output.as_deref(), &json_bytes(&report)?)?;
    let ok = report.tracking && report.all_identical && report.streaming_exponent < 0.2;
    Ok(if ok { Status::Ok } else { Status::CheckFailed })
}
