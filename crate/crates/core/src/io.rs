//! CSV and JSON persistence.
//!
//! Every CSV file starts with `# key=value` comment lines echoing the
//! configuration, followed by a header row. Reals are written with Rust's
//! shortest round-trip formatting, so files are byte-stable across runs.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{CoefficientSet, Estimate};
use crate::harness::{RateStudy, ReplicationRecord, SummaryEntry};
use crate::model::DesignSample;
use crate::selection::SelectionResult;
use crate::wavelet::ScalingTable;

/// Opens `path` for writing, creating parent directories.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Writes comment lines, a header and rows of pre-formatted fields.
pub fn write_table<W: Write>(
    mut out: W,
    comments: &[String],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sample<W: Write>(out: W, comments: &[String], sample: &DesignSample) -> Result<()> {
    let rows = sample
        .x
        .iter()
        .zip(&sample.y)
        .map(|(x, y)| vec![fmt(*x), fmt(*y)]);
    write_table(out, comments, &["x", "y"], rows)
}

/// Reads an `x,y` CSV, skipping `#` comments; the result is X-sorted.
pub fn read_sample<R: Read>(input: R) -> Result<DesignSample> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing `{name}` column")))
    };
    let (ix, iy) = (col("x")?, col("y")?);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            let field = record.get(i).unwrap_or("");
            field
                .parse()
                .map_err(|_| Error::Parse(format!("row {}: `{field}` is not a number", line + 1)))
        };
        x.push(parse(ix)?);
        y.push(parse(iy)?);
    }
    DesignSample::from_pairs(x, y, None)
}

pub fn read_sample_file(path: &Path) -> Result<DesignSample> {
    let file = File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    read_sample(file)
}

/// Grid estimates; `truth` adds an `r` column.
pub fn write_estimates<W: Write>(
    out: W,
    comments: &[String],
    linear: &Estimate,
    nonlinear: Option<&Estimate>,
    truth: Option<&dyn Fn(f64) -> f64>,
) -> Result<()> {
    let mut header = vec!["x", "r_hat_linear"];
    if nonlinear.is_some() {
        header.push("r_hat_nonlinear");
    }
    if truth.is_some() {
        header.push("r");
    }
    let rows = linear.grid().enumerate().map(|(i, x)| {
        let mut row = vec![fmt(x), fmt(linear.values[i])];
        if let Some(est) = nonlinear {
            row.push(fmt(est.values[i]));
        }
        if let Some(r) = truth {
            row.push(fmt(r(x)));
        }
        row
    });
    write_table(out, comments, &header, rows)
}

/// Rows `(level, index, value, kind, kept)`; scaling coefficients are
/// always kept, details when `kept` says so.
pub fn write_coefficients<W: Write>(
    out: W,
    comments: &[String],
    coeffs: &CoefficientSet,
    kept: impl Fn(f64) -> bool,
) -> Result<()> {
    let alpha = coeffs.alpha.iter().enumerate().map(|(k, a)| {
        vec![
            coeffs.j_star.to_string(),
            k.to_string(),
            fmt(*a),
            "alpha".into(),
            "1".into(),
        ]
    });
    let beta = coeffs.betas().map(|(j, k, b)| {
        let flag = if kept(b) { "1" } else { "0" };
        vec![
            j.to_string(),
            k.to_string(),
            fmt(b),
            "beta".into(),
            flag.into(),
        ]
    });
    write_table(
        out,
        comments,
        &["level", "index", "value", "kind", "kept"],
        alpha.chain(beta).collect::<Vec<_>>(),
    )
}

pub fn write_score_curve<W: Write>(
    out: W,
    comments: &[String],
    sel: &SelectionResult,
) -> Result<()> {
    let p = sel.plateau;
    let rows = sel
        .score_curve
        .iter()
        .enumerate()
        .map(|(i, (param, score))| {
            let on_min = i >= p.first && i < p.first + p.len;
            vec![
                fmt(*param),
                fmt(*score),
                if on_min { "1" } else { "0" }.into(),
            ]
        });
    write_table(out, comments, &["parameter", "cv_score", "is_min"], rows)
}

pub const RECORD_COLUMNS: [&str; 15] = [
    "replication_index",
    "seed",
    "mse_lin_2fcv",
    "mse_lin_oracle",
    "mse_non_2fcv",
    "mse_non_oracle",
    "jstar_2fcv",
    "jstar_oracle",
    "threshold_2fcv",
    "threshold_oracle",
    "kept_detail_count",
    "ise_lin_2fcv",
    "ise_lin_oracle",
    "ise_non_2fcv",
    "ise_non_oracle",
];

pub fn write_records<W: Write>(
    out: W,
    comments: &[String],
    records: &[ReplicationRecord],
) -> Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.replication_index.to_string(),
            r.seed.to_string(),
            fmt(r.mse_lin_2fcv),
            fmt(r.mse_lin_oracle),
            fmt(r.mse_non_2fcv),
            fmt(r.mse_non_oracle),
            r.jstar_2fcv.to_string(),
            r.jstar_oracle.to_string(),
            fmt(r.threshold_2fcv),
            fmt(r.threshold_oracle),
            r.kept_detail_count.to_string(),
            fmt(r.ise_lin_2fcv),
            fmt(r.ise_lin_oracle),
            fmt(r.ise_non_2fcv),
            fmt(r.ise_non_oracle),
        ]
    });
    write_table(out, comments, &RECORD_COLUMNS, rows)
}

/// Reads a records CSV written by [`write_records`].
pub fn read_records<R: Read>(input: R) -> Result<Vec<ReplicationRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut out = Vec::new();
    for record in reader.records() {
        let r = record?;
        let f = |i: usize| -> Result<f64> {
            let s = r.get(i).unwrap_or("");
            s.parse()
                .map_err(|_| Error::Parse(format!("`{s}` is not a number")))
        };
        let u = |i: usize| -> Result<u64> {
            let s = r.get(i).unwrap_or("");
            s.parse()
                .map_err(|_| Error::Parse(format!("`{s}` is not an integer")))
        };
        out.push(ReplicationRecord {
            replication_index: u(0)?,
            seed: u(1)?,
            mse_lin_2fcv: f(2)?,
            mse_lin_oracle: f(3)?,
            mse_non_2fcv: f(4)?,
            mse_non_oracle: f(5)?,
            jstar_2fcv: u(6)? as usize,
            jstar_oracle: u(7)? as usize,
            threshold_2fcv: f(8)?,
            threshold_oracle: f(9)?,
            kept_detail_count: u(10)? as usize,
            ise_lin_2fcv: f(11)?,
            ise_lin_oracle: f(12)?,
            ise_non_2fcv: f(13)?,
            ise_non_oracle: f(14)?,
        });
    }
    Ok(out)
}

pub fn write_summary_json<W: Write>(mut out: W, entries: &[SummaryEntry]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, entries)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_rate<W: Write>(out: W, comments: &[String], study: &RateStudy) -> Result<()> {
    let mut comments = comments.to_vec();
    comments.push(format!("slope={}", study.slope));
    comments.push(format!("slope_se={}", study.slope_se));
    if let Some(e) = study.theoretical_exponent {
        comments.push(format!("theoretical_exponent={e}"));
    }
    let rows = study.rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            r.j_star.map(|j| j.to_string()).unwrap_or_default(),
            fmt(r.mise),
            fmt(r.mise_se),
            fmt(r.mean_mse),
            fmt(study.slope),
        ]
    });
    write_table(
        out,
        &comments,
        &["n", "jstar", "mise", "mise_se", "mean_mse", "slope"],
        rows,
    )
}

pub fn write_scaling_table<W: Write>(
    out: W,
    comments: &[String],
    table: &ScalingTable,
) -> Result<()> {
    let rows = table
        .values_phi()
        .iter()
        .zip(table.values_psi())
        .enumerate()
        .map(|(i, (p, s))| vec![fmt(table.grid_x(i)), fmt(*p), fmt(*s)]);
    write_table(out, comments, &["grid_x", "phi", "psi"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_roundtrip() {
        let s = DesignSample::from_pairs(vec![0.5, 0.1, 0.9], vec![1.0, -2.5, 1e-7], None).unwrap();
        let mut buf = Vec::new();
        write_sample(&mut buf, &["function=blip\nn=3".into()], &s).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# function=blip\n# n=3\nx,y\n0.1,-2.5\n"));
        let back = read_sample(buf.as_slice()).unwrap();
        assert_eq!(back.x, s.x);
        assert_eq!(back.y, s.y);
    }

    #[test]
    fn malformed_sample() {
        assert!(matches!(
            read_sample("x,z\n0.1,2\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            read_sample("x,y\n0.1,abc\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(read_sample("x,y\n1.5,1\n".as_bytes()).is_err());
    }

    #[test]
    fn records_roundtrip() {
        let r = ReplicationRecord {
            replication_index: 3,
            seed: u64::MAX,
            mse_lin_2fcv: 0.1,
            mse_lin_oracle: 0.05,
            mse_non_2fcv: 0.2,
            mse_non_oracle: 0.01,
            jstar_2fcv: 4,
            jstar_oracle: 5,
            threshold_2fcv: f64::INFINITY,
            threshold_oracle: 0.03,
            kept_detail_count: 0,
            ise_lin_2fcv: 1.0,
            ise_lin_oracle: 2.0,
            ise_non_2fcv: 3.0,
            ise_non_oracle: 4.0,
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &[], std::slice::from_ref(&r)).unwrap();
        assert_eq!(read_records(buf.as_slice()).unwrap(), vec![r]);
    }
}
