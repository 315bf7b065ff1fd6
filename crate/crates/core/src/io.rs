//! CSV exchange format: `# key=value` metadata lines, a column header, then
//! rows. Floats are written with 17 significant digits.

use std::io::Write;

use crate::kernel::{BasisTable, Kernel};
use crate::{Error, Result, C64};

pub type Meta = Vec<(String, String)>;

/// Lossless decimal form of a double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn kernel_meta(kernel: &Kernel) -> Meta {
    let m = &kernel.meta;
    vec![
        ("init".into(), m.init.clone()),
        ("rule".into(), m.rule.to_string()),
        ("n".into(), m.n.to_string()),
        ("dt".into(), fmt_f64(m.dt)),
        ("len".into(), kernel.len().to_string()),
    ]
}

fn write_meta<W: Write>(w: &mut W, meta: &[(String, String)]) -> Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// `l,value` series.
pub fn write_series_csv<W: Write>(mut w: W, meta: &[(String, String)], values: &[f64]) -> Result<()> {
    write_meta(&mut w, meta)?;
    let mut out = writer(w);
    out.write_record(["l", "value"])?;
    for (l, v) in values.iter().enumerate() {
        out.write_record([l.to_string(), fmt_f64(*v)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_kernel_csv<W: Write>(w: W, kernel: &Kernel) -> Result<()> {
    write_series_csv(w, &kernel_meta(kernel), &kernel.values)
}

pub fn kernel_to_csv(kernel: &Kernel) -> String {
    let mut buf = Vec::new();
    write_kernel_csv(&mut buf, kernel).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn split_meta(text: &str) -> (Meta, String) {
    let mut meta = Vec::new();
    let mut body = String::with_capacity(text.len());
    for line in text.lines() {
        match line.strip_prefix('#') {
            Some(rest) => {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
            None if line.trim().is_empty() => {}
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    (meta, body)
}

/// Reads an `l,value` series; indices must run 0, 1, 2, ...
pub fn read_series_csv(text: &str) -> Result<(Meta, Vec<f64>)> {
    let (meta, body) = split_meta(text);
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let header = rdr.headers()?.clone();
    if header.len() != 2 || &header[0] != "l" || &header[1] != "value" {
        return Err(Error::Parse(format!("expected header `l,value`, got `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let l: usize = rec[0]
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad index `{}`", &rec[0])))?;
        if l != row {
            return Err(Error::Parse(format!("row {row}: index {l} out of sequence")));
        }
        let v: f64 = rec[1]
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad value `{}`", &rec[1])))?;
        if !v.is_finite() {
            return Err(Error::NonFinite(row));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok((meta, values))
}

/// Long format `n,t,value` with the real part of each sample.
pub fn write_basis_csv<W: Write>(mut w: W, meta: &[(String, String)], table: &BasisTable) -> Result<()> {
    write_meta(&mut w, meta)?;
    let mut out = writer(w);
    out.write_record(["n", "t", "value"])?;
    for (n, row) in table.values.iter().enumerate() {
        for (t, z) in table.t_grid.iter().zip(row) {
            out.write_record([n.to_string(), fmt_f64(*t), fmt_f64(z.re)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `init,index,re,im` rows for one or more labelled spectra.
pub fn write_spectra_csv<W: Write>(
    mut w: W,
    meta: &[(String, String)],
    spectra: &[(String, Vec<C64>)],
) -> Result<()> {
    write_meta(&mut w, meta)?;
    let mut out = writer(w);
    out.write_record(["init", "index", "re", "im"])?;
    for (name, values) in spectra {
        for (i, z) in values.iter().enumerate() {
            out.write_record([name.clone(), i.to_string(), fmt_f64(z.re), fmt_f64(z.im)])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Rule;
    use crate::kernel::KernelMeta;

    fn sample_kernel() -> Kernel {
        Kernel {
            values: vec![1.0, -0.1, 1.0 / 3.0, 2.5e-300, std::f64::consts::PI],
            meta: KernelMeta {
                init: "lin".into(),
                rule: Rule::Zoh,
                n: 4,
                dt: 0.001,
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let k = sample_kernel();
        let text = kernel_to_csv(&k);
        let (meta, values) = read_series_csv(&text).unwrap();
        assert_eq!(values, k.values);
        assert!(meta.contains(&("rule".into(), "zoh".into())));
        assert!(meta.contains(&("init".into(), "lin".into())));
    }

    #[test]
    fn layout() {
        let text = kernel_to_csv(&sample_kernel());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# init=lin");
        assert_eq!(lines[5], "l,value");
        assert_eq!(lines[6], "0,1.0000000000000000e0");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_series_csv("x,y\n0,1\n").is_err());
        assert!(read_series_csv("l,value\n1,1\n").is_err());
        assert!(read_series_csv("l,value\n0,abc\n").is_err());
        assert!(read_series_csv("l,value\n0,inf\n").is_err());
        assert_eq!(read_series_csv("l,value\n").unwrap_err(), Error::EmptySequence);
    }

    #[test]
    fn basis_long_format() {
        let table = BasisTable {
            t_grid: vec![0.0, 1.0],
            values: vec![vec![C64::new(1.0, 0.0), C64::new(0.5, 0.2)]],
        };
        let mut buf = Vec::new();
        write_basis_csv(&mut buf, &[], &table).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().starts_with("0,1.0000000000000000e0,5.0"));
    }
}
