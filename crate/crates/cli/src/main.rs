mod args;
mod config_file;

use std::ffi::OsString;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use wavereg::estimator::{
    basis_quadrature, estimate_coefficients, linear_estimate, nonlinear_estimate, t_n,
    CoefficientSet, QUADRATURE_POINTS,
};
use wavereg::harness::{mse, rate_study, run_monte_carlo, Experiment, JStarRule, RateStudyConfig};
use wavereg::io;
use wavereg::model::{generate_sample, TestFunction};
use wavereg::selection::{select_jstar, select_threshold};
use wavereg::wavelet::{BasisKind, WaveletBasis};
use wavereg::{Error, Result};

use args::{
    Cli, Command, EstimateArgs, McArgs, Method, RateArgs, RuleArg, SimulateArgs, TableArgs,
    ThresholdArg,
};

const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Csv(e) if e.is_io_error() => EXIT_IO,
        Error::Numerical(_) | Error::Degenerate(_) => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let argv = match config_file::splice(raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, config_file::ConfigError::Io(_)) {
                EXIT_IO
            } else {
                EXIT_VALIDATION
            };
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Estimate(a) => estimate(&a),
        Command::Mc(a) => monte_carlo(&a),
        Command::Rate(a) => rate(&a),
        Command::Table(a) => table(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn header(echo: Vec<String>) -> Vec<String> {
    let mut out = vec![format!("wavereg {}", env!("CARGO_PKG_VERSION"))];
    out.extend(echo);
    out
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let model = a.model.model(a.n)?;
    let sample = generate_sample(&model)?;
    let mut comments = header(a.echo());
    comments.push(format!("ties_broken={}", sample.ties_broken));
    io::write_sample(io::create(&a.output)?, &comments, &sample)?;
    println!("wrote {} points to {}", sample.len(), a.output.display());
    Ok(())
}

/// `(level, index, value, kind)` of the true coefficients of `r`, by quadrature.
fn write_true_coefficients(
    path: &Path,
    comments: &[String],
    coeffs: &CoefficientSet,
    basis: &WaveletBasis,
    f: TestFunction,
) -> Result<()> {
    let q =
        |kind, level, k| basis_quadrature(basis, kind, level, k, QUADRATURE_POINTS, |x| f.eval(x));
    let mut rows = Vec::new();
    for k in 0..coeffs.alpha.len() {
        let v = q(BasisKind::Phi, coeffs.j_star, k);
        rows.push(vec![
            coeffs.j_star.to_string(),
            k.to_string(),
            format!("{v}"),
            "alpha".into(),
        ]);
    }
    for (level, shift, _) in coeffs.betas() {
        let v = q(BasisKind::Psi, level, shift);
        rows.push(vec![
            level.to_string(),
            shift.to_string(),
            format!("{v}"),
            "beta".into(),
        ]);
    }
    io::write_table(
        io::create(path)?,
        comments,
        &["level", "index", "value", "kind"],
        rows,
    )
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let (sample, truth) = match &a.input {
        Some(path) => {
            let sample = io::read_sample_file(path)?;
            (sample, None)
        }
        None => {
            let model = a.model.model(a.n)?;
            (generate_sample(&model)?, Some(model.function))
        }
    };
    let n = sample.len();
    let model = a.model.model(n)?;
    let basis = a.estimator.basis()?;
    let mut cfg = a.estimator.config(&model);
    let comments = header(a.echo());
    let out = &a.out_dir;

    let j_star = match a.estimator.jstar {
        Some(j) => j,
        None => {
            let sel = select_jstar(&sample, &cfg, &basis, a.estimator.plateau)?;
            io::write_score_curve(io::create(&out.join("jstar_scores.csv"))?, &comments, &sel)?;
            sel.chosen_jstar
        }
    };
    cfg.j_star = j_star;
    cfg.validate(n)?;
    let coeffs = estimate_coefficients(&sample, &cfg, &basis)?;
    let linear = linear_estimate(&coeffs, &basis)?;

    let nonlinear = match a.method {
        Method::Linear => None,
        Method::Nonlinear => {
            let lambda = match a.threshold {
                ThresholdArg::Explicit(v) => v,
                ThresholdArg::Universal => cfg.kappa * t_n(n),
                ThresholdArg::Cv => {
                    let sel = select_threshold(&sample, j_star, &cfg, &basis, a.estimator.plateau)?;
                    io::write_score_curve(
                        io::create(&out.join("threshold_scores.csv"))?,
                        &comments,
                        &sel,
                    )?;
                    sel.chosen_threshold.unwrap_or(0.0)
                }
            };
            Some(nonlinear_estimate(&coeffs, lambda, &basis)?)
        }
    };

    let r = truth.map(|f| move |x: f64| f.eval(x));
    let r_dyn = r.as_ref().map(|f| f as &dyn Fn(f64) -> f64);
    io::write_estimates(
        io::create(&out.join("estimate.csv"))?,
        &comments,
        &linear,
        nonlinear.as_ref(),
        r_dyn,
    )?;
    let kept = |b: f64| nonlinear.as_ref().is_none_or(|e| e.is_kept(b));
    io::write_coefficients(
        io::create(&out.join("coefficients.csv"))?,
        &comments,
        &coeffs,
        kept,
    )?;

    println!("n={n}");
    println!("jstar={j_star}");
    if let Some(est) = &nonlinear {
        println!("threshold={}", est.threshold.unwrap_or(0.0));
        println!(
            "kept_details={}/{}",
            est.kept_detail_count(),
            coeffs.detail_count()
        );
    }
    if let Some(f) = truth {
        write_true_coefficients(
            &out.join("true_coefficients.csv"),
            &comments,
            &coeffs,
            &basis,
            f,
        )?;
        let target: Vec<f64> = sample.x.iter().map(|x| f.eval(*x)).collect();
        println!("mse_linear={}", mse(&linear, &target, &sample.x)?);
        if let Some(est) = &nonlinear {
            println!("mse_nonlinear={}", mse(est, &target, &sample.x)?);
        }
    }
    Ok(())
}

fn monte_carlo(a: &McArgs) -> Result<()> {
    let model = a.model.model(a.n)?;
    let basis = a.estimator.basis()?;
    let estimator = a.estimator.config(&model);
    let mut exp = Experiment::new(model, estimator, basis);
    exp.plateau = a.estimator.plateau;
    let result = run_monte_carlo(&exp, a.replications)?;

    let comments = header(a.echo());
    let out = &a.out_dir;
    io::write_records(
        io::create(&out.join("records.csv"))?,
        &comments,
        &result.records,
    )?;
    io::write_summary_json(io::create(&out.join("summary.json"))?, &result.summary)?;

    let groups: Vec<(String, _)> = [
        "mse_lin_2fcv",
        "mse_lin_oracle",
        "mse_non_2fcv",
        "mse_non_oracle",
    ]
    .iter()
    .filter_map(|m| {
        result
            .metric(m)
            .map(|s| (m.trim_start_matches("mse_").to_string(), *s))
    })
    .collect();
    let title = format!(
        "{} n={} σ²={} N={}",
        model.function.name(),
        model.n,
        model.sigma2,
        a.replications
    );
    let svg = wavereg::svg::boxplot(&title, "MSE", &groups);
    std::fs::write(out.join("boxplot.svg"), svg)?;

    for entry in &result.summary {
        println!(
            "{} median={} iqr={}",
            entry.method,
            entry.summary.median,
            entry.summary.iqr()
        );
    }
    Ok(())
}

fn rate(a: &RateArgs) -> Result<()> {
    let model = a.model.model(a.n_list.first().copied().unwrap_or(0))?;
    let basis = a.estimator.basis()?;
    let estimator = a.estimator.config(&model);
    let rule = match a.rule {
        RuleArg::Theorem => JStarRule::Theorem { s_prime: a.s_prime },
        RuleArg::Cv => JStarRule::TwoFoldCv,
        RuleArg::Fixed => JStarRule::Fixed(
            a.estimator
                .jstar
                .ok_or_else(|| Error::Config("--rule fixed requires --jstar".into()))?,
        ),
    };
    let cfg = RateStudyConfig {
        replications: a.replications,
        rule,
        theoretical_exponent: Some(-2.0 * a.s_prime / (2.0 * a.s_prime + 1.0)),
    };
    let study = rate_study(&cfg, &a.n_list, &model, &estimator, &basis)?;

    let comments = header(a.echo());
    io::write_rate(io::create(&a.out_dir.join("rate.csv"))?, &comments, &study)?;
    let title = format!("{}: ln MISE vs ln n", model.function.name());
    std::fs::write(
        a.out_dir.join("rate.svg"),
        wavereg::svg::rate_plot(&title, &study),
    )?;

    for row in &study.rows {
        println!("n={} mise={} se={}", row.n, row.mise, row.mise_se);
    }
    println!("slope={}", study.slope);
    println!("slope_se={}", study.slope_se);
    Ok(())
}

fn table(a: &TableArgs) -> Result<()> {
    let basis = WaveletBasis::new(a.vanishing_moments, a.depth)?;
    io::write_scaling_table(io::create(&a.output)?, &header(a.echo()), basis.table())?;
    println!(
        "wrote {} grid points to {}",
        basis.table().values_phi().len(),
        a.output.display()
    );
    Ok(())
}
