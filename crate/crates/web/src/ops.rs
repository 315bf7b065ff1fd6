use diagssm::discretize::discretize_at;
use diagssm::hippo::make_hippo_normal;
use diagssm::init::init_c;
use diagssm::kernel::{dss_softmax_kernel, linspace, sample_basis_dense, vandermonde_kernel};
use diagssm::oracle::{fout_truncation_basis, legendre_table, legs_basis};
use diagssm::{DenseSpec, InitKind, Rule};

/// Largest state size the page accepts; dense bases cost `O(N^3)`.
pub const MAX_N: usize = 512;
pub const MAX_L: usize = 1 << 16;
pub const MAX_POINTS: usize = 4096;

type Result<T> = std::result::Result<T, String>;

fn check(name: &str, v: usize, max: usize) -> Result<()> {
    if v == 0 || v > max {
        return Err(format!("{name} must be in 1..={max}, got {v}"));
    }
    Ok(())
}

pub fn kernel(init: &str, n: usize, l: usize, dt: f64, rule: &str, softmax: bool, seed: u64) -> Result<Vec<f64>> {
    check("N", n, MAX_N)?;
    check("L", l, MAX_L)?;
    let kind: InitKind = init.parse().map_err(|e: diagssm::Error| e.to_string())?;
    let rule: Rule = rule.parse().map_err(|e: diagssm::Error| e.to_string())?;
    if softmax && rule != Rule::Zoh {
        return Err("softmax normalization requires the ZOH rule".into());
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(format!("dt must be positive, got {dt}"));
    }
    let spec = kind.build(n, seed).map_err(|e| e.to_string())?;
    let len = spec.len();
    let spec = spec.with_c(init_c(len, seed)).map_err(|e| e.to_string())?.with_log_dt(dt.ln());
    let disc = discretize_at(&spec, rule, dt).map_err(|e| e.to_string())?;
    let k = if softmax {
        dss_softmax_kernel(&spec, &disc, l)
    } else {
        vandermonde_kernel(&spec, &disc, l)
    };
    k.map(|k| k.values).map_err(|e| e.to_string())
}

pub fn spectrum(init: &str, n: usize, seed: u64) -> Result<Vec<f64>> {
    check("N", n, MAX_N)?;
    let kind: InitKind = init.parse().map_err(|e: diagssm::Error| e.to_string())?;
    let spec = kind.build(n, seed).map_err(|e| e.to_string())?;
    Ok(spec.a.iter().flat_map(|z| [z.re, z.im]).collect())
}

pub fn basis(system: &str, n: usize, rows: usize, t_end: f64, points: usize) -> Result<Vec<f64>> {
    check("N", n, MAX_N)?;
    check("points", points, MAX_POINTS)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(format!("t_end must be positive, got {t_end}"));
    }
    let t = linspace(0.0, t_end, points);
    let table = match system {
        "legs" => legs_basis(n, &t),
        "normal" => make_hippo_normal(n).and_then(|s| {
            let b = s.b.iter().map(|z| z * 0.5).collect();
            sample_basis_dense(&DenseSpec::new(s.a, b, None)?, &t)
        }),
        "fout" => fout_truncation_basis(n, &t),
        "legendre" => Ok(legendre_table(n, &t)),
        other => return Err(format!("unknown system `{other}`")),
    }
    .map_err(|e| e.to_string())?;
    let table = table.truncate_rows(rows.max(1));
    Ok(table.values.iter().flat_map(|row| row.iter().map(|z| z.re)).collect())
}
