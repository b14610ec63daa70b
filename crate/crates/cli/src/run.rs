//! Executes a parsed command line.

use log::warn;
use serde_json::{Map, Value};

use fdiv_core::closed_form::{
    chi2_neyman, chi2_pearson, chi2_symmetric, chi_k_lambda_with_limit, kl_bregman,
};
use fdiv_core::estimators::{
    mc_fdiv, oracle_fdiv_with, EstimateResult, OracleOptions, GAUSSIAN_ORACLE_MAX_DIM,
};
use fdiv_core::generator::{make_generator, Generator};
use fdiv_core::taylor::{
    kl_series, second_order_approx, taylor_fdiv, taylor_fdiv_auto, taylor_fdiv_bounded,
    SeriesStatus, SeriesTrace,
};
use fdiv_core::{DivergenceResult, Family, Method, NaturalParam};

use crate::args::{
    Chi2Args, ChikArgs, Command, FamilyKind, FdivArgs, FdivMethod, GeneratorArgs, KlArgs,
    KlMethod, McArgs, OracleArgs, PairArgs, SamplingArgs, Side,
};
use crate::error::CliError;
use crate::report::Report;

/// What a command produced. A report can come with an error, e.g. a series
/// that did not converge still has its partial sums worth printing.
#[derive(Debug)]
pub struct Outcome {
    pub report: Option<Report>,
    pub error: Option<CliError>,
}

impl Outcome {
    fn done(report: Report) -> Self {
        Self { report: Some(report), error: None }
    }

    fn failed(error: CliError) -> Self {
        Self { report: None, error: Some(error) }
    }
}

pub fn run(command: &Command) -> Outcome {
    let result = match command {
        Command::Chi2(a) => chi2(a).map(Outcome::done),
        Command::Chik(a) => chik(a).map(Outcome::done),
        Command::Fdiv(a) => fdiv(a),
        Command::Kl(a) => kl(a).map(Outcome::done),
        Command::Mc(a) => mc(a).map(Outcome::done),
        Command::Oracle(a) => oracle(a).map(Outcome::done),
        Command::PaperRepro(_) => {
            return Outcome::failed(CliError::BadArguments("paper-repro is run through repro::run".into()))
        }
    };
    result.unwrap_or_else(Outcome::failed)
}

struct Pair {
    family: Family,
    theta1: NaturalParam,
    theta2: NaturalParam,
    params: Map<String, Value>,
}

fn num(v: f64) -> Value {
    Value::from(v)
}

fn resolve_pair(args: &PairArgs) -> Result<Pair, CliError> {
    let mut params = Map::new();
    let bad = |m: &str| CliError::BadArguments(m.to_string());
    let (family, theta1, theta2) = match args.family {
        FamilyKind::Poisson => {
            if args.mu1.is_some() || args.mu2.is_some() {
                return Err(bad("--mu1/--mu2 apply to the gaussian family; use --l1/--l2"));
            }
            let (Some(l1), Some(l2)) = (args.l1, args.l2) else {
                return Err(bad("poisson needs both --l1 and --l2"));
            };
            let family = fdiv_core::family::make_poisson();
            params.insert("family".into(), Value::from("poisson"));
            params.insert("l1".into(), num(l1));
            params.insert("l2".into(), num(l2));
            let t1 = family.natural_from_rate(l1)?;
            let t2 = family.natural_from_rate(l2)?;
            (family, t1, t2)
        }
        FamilyKind::Gaussian => {
            if args.l1.is_some() || args.l2.is_some() {
                return Err(bad("--l1/--l2 apply to the poisson family; use --mu1/--mu2"));
            }
            let (Some(mu1), Some(mu2)) = (&args.mu1, &args.mu2) else {
                return Err(bad("gaussian needs both --mu1 and --mu2"));
            };
            if mu1.len() != mu2.len() {
                return Err(bad(&format!(
                    "--mu1 has {} coordinates but --mu2 has {}",
                    mu1.len(),
                    mu2.len()
                )));
            }
            let family = fdiv_core::family::make_iso_gaussian(mu1.len())?;
            params.insert("family".into(), Value::from("gaussian"));
            params.insert("mu1".into(), Value::from(mu1.clone()));
            params.insert("mu2".into(), Value::from(mu2.clone()));
            let t1 = family.natural_from_mean(mu1)?;
            let t2 = family.natural_from_mean(mu2)?;
            (family, t1, t2)
        }
    };
    Ok(Pair { family, theta1, theta2, params })
}

fn resolve_generator(args: &GeneratorArgs, params: &mut Map<String, Value>) -> Result<Generator, CliError> {
    let param = match (args.alpha, args.vajda_k) {
        (Some(_), Some(_)) => {
            return Err(CliError::BadArguments("--alpha and --vajda-k are mutually exclusive".into()))
        }
        (Some(a), None) => {
            params.insert("alpha".into(), num(a));
            Some(a)
        }
        (None, Some(k)) => {
            params.insert("vajda-k".into(), Value::from(k));
            Some(f64::from(k))
        }
        (None, None) => None,
    };
    params.insert("generator".into(), Value::from(args.generator.clone()));
    Ok(make_generator(&args.generator, param)?)
}

fn echo_sampling(s: &SamplingArgs, params: &mut Map<String, Value>) {
    params.insert("n".into(), Value::from(s.n as u64));
    params.insert("seed".into(), Value::from(s.seed));
}

fn base(command: &str, pair: &Pair, method: &str, value: f64) -> Report {
    Report {
        command: command.into(),
        family: pair.family.name().into(),
        params: pair.params.clone(),
        method: method.into(),
        value,
        ..Default::default()
    }
}

fn closed(command: &str, pair: &Pair, r: DivergenceResult) -> Report {
    Report { log_exponent: r.log1p_form, bound: r.bound, ..base(command, pair, r.method.as_str(), r.value) }
}

fn with_trace(mut report: Report, trace: SeriesTrace) -> Report {
    report.truncation_order = Some(trace.truncation_order);
    report.bound = trace.remainder_bound;
    report.trace = Some(trace.partial_sums);
    report.terms = Some(trace.terms);
    report
}

fn with_estimate(mut report: Report, e: EstimateResult) -> Report {
    report.std_error = e.std_error;
    report.tail_mass_dropped = e.tail_mass_dropped;
    report.n = Some(e.n);
    report
}

fn chi2(a: &Chi2Args) -> Result<Report, CliError> {
    let mut pair = resolve_pair(&a.pair)?;
    let (side, r) = match a.side {
        Side::Pearson => ("pearson", chi2_pearson(&pair.family, &pair.theta1, &pair.theta2)?),
        Side::Neyman => ("neyman", chi2_neyman(&pair.family, &pair.theta1, &pair.theta2)?),
        Side::Symmetric => ("symmetric", chi2_symmetric(&pair.family, &pair.theta1, &pair.theta2)?),
    };
    pair.params.insert("side".into(), Value::from(side));
    Ok(closed("chi2", &pair, r))
}

fn chik(a: &ChikArgs) -> Result<Report, CliError> {
    let mut pair = resolve_pair(&a.pair)?;
    pair.params.insert("k".into(), Value::from(a.k as u64));
    pair.params.insert("lambda".into(), num(a.lambda));
    pair.params.insert("k-max".into(), Value::from(a.k_max as u64));
    let value = chi_k_lambda_with_limit(&pair.family, &pair.theta1, &pair.theta2, a.k, a.lambda, a.k_max)?;
    Ok(base("chik", &pair, Method::ClosedForm.as_str(), value))
}

fn monte_carlo(command: &str, generator: &Generator, pair: &Pair, n: usize, seed: u64) -> Result<Report, CliError> {
    let e = mc_fdiv(generator, &pair.family, &pair.theta1, &pair.theta2, n, seed)?;
    let mut report = with_estimate(base(command, pair, Method::MonteCarlo.as_str(), e.value), e);
    report.seed = Some(seed);
    if e.skipped > 0 {
        report.diagnostic = Some(format!("{} summands skipped after underflow", e.skipped));
    }
    Ok(report)
}

/// Brute force, falling back to Monte Carlo where quadrature is out of reach.
fn brute_force(
    command: &str,
    generator: &Generator,
    pair: &mut Pair,
    options: OracleOptions,
    n: usize,
    seed: u64,
) -> Result<Report, CliError> {
    if let Family::IsoGaussian { dim } = pair.family {
        if dim > GAUSSIAN_ORACLE_MAX_DIM {
            let note = format!(
                "quadrature supports dimension <= {GAUSSIAN_ORACLE_MAX_DIM}, got {dim}; fell back to Monte Carlo"
            );
            warn!("{note}");
            pair.params.insert("n".into(), Value::from(n as u64));
            pair.params.insert("seed".into(), Value::from(seed));
            let mut report = monte_carlo(command, generator, pair, n, seed)?;
            report.diagnostic = Some(note);
            return Ok(report);
        }
    }
    let e = oracle_fdiv_with(generator, &pair.family, &pair.theta1, &pair.theta2, &options)?;
    Ok(with_estimate(base(command, pair, Method::Oracle.as_str(), e.value), e))
}

fn fdiv(a: &FdivArgs) -> Result<Outcome, CliError> {
    let mut pair = resolve_pair(&a.pair)?;
    let generator = resolve_generator(&a.generator, &mut pair.params)?;
    let (f, t1, t2) = (&pair.family, &pair.theta1, &pair.theta2);
    let method = match a.method {
        FdivMethod::Taylor => "taylor",
        FdivMethod::TaylorAuto => "taylor-auto",
        FdivMethod::SecondOrder => "second-order",
        FdivMethod::Oracle => "oracle",
        FdivMethod::Mc => "mc",
    };
    let mut params = pair.params.clone();
    params.insert("method".into(), Value::from(method));
    let outcome = match a.method {
        FdivMethod::Taylor => {
            params.insert("s".into(), Value::from(a.s as u64));
            params.insert("center".into(), num(a.center));
            let (r, trace) = match (a.ratio_min, a.ratio_max) {
                (Some(m), Some(big_m)) => {
                    params.insert("ratio-min".into(), num(m));
                    params.insert("ratio-max".into(), num(big_m));
                    taylor_fdiv_bounded(&generator, f, t1, t2, a.center, a.s, m, big_m)?
                }
                _ => taylor_fdiv(&generator, f, t1, t2, a.center, a.s)?,
            };
            Outcome::done(with_trace(closed("fdiv", &pair, r), trace))
        }
        FdivMethod::TaylorAuto => {
            params.insert("center".into(), num(a.center));
            params.insert("tol".into(), num(a.tol));
            params.insert("s-max".into(), Value::from(a.s_max as u64));
            let auto = taylor_fdiv_auto(&generator, f, t1, t2, a.center, a.tol, a.s_max)?;
            let status = match auto.status {
                SeriesStatus::Converged => "converged",
                SeriesStatus::MaxOrderReached => "max_order_reached",
                SeriesStatus::Diverging => "diverging",
            };
            let mut report = with_trace(closed("fdiv", &pair, auto.result), auto.trace);
            report.status = Some(status.into());
            report.diagnostic = auto.diagnostic.clone();
            let error = (auto.status != SeriesStatus::Converged).then(|| {
                CliError::NonConvergence(auto.diagnostic.unwrap_or_else(|| format!("series {status}")))
            });
            Outcome { report: Some(report), error }
        }
        FdivMethod::SecondOrder => {
            Outcome::done(closed("fdiv", &pair, second_order_approx(&generator, f, t1, t2)?))
        }
        FdivMethod::Oracle => {
            let report = brute_force("fdiv", &generator, &mut pair, OracleOptions::default(), a.sampling.n, a.sampling.seed)?;
            // the fallback may have added n and seed
            for (k, v) in &report.params {
                params.entry(k.clone()).or_insert_with(|| v.clone());
            }
            Outcome::done(report)
        }
        FdivMethod::Mc => {
            echo_sampling(&a.sampling, &mut params);
            Outcome::done(monte_carlo("fdiv", &generator, &pair, a.sampling.n, a.sampling.seed)?)
        }
    };
    Ok(set_params(outcome, params))
}

fn set_params(mut outcome: Outcome, params: Map<String, Value>) -> Outcome {
    if let Some(r) = outcome.report.as_mut() {
        r.params = params;
    }
    outcome
}

fn kl(a: &KlArgs) -> Result<Report, CliError> {
    let mut pair = resolve_pair(&a.pair)?;
    let (f, t1, t2) = (&pair.family, &pair.theta1, &pair.theta2);
    let mut params = pair.params.clone();
    let report = match a.method {
        KlMethod::Bregman => {
            params.insert("method".into(), Value::from("bregman"));
            closed("kl", &pair, kl_bregman(f, t1, t2)?)
        }
        KlMethod::Series => {
            params.insert("method".into(), Value::from("series"));
            params.insert("s".into(), Value::from(a.s as u64));
            let (r, trace) = kl_series(f, t1, t2, a.s)?;
            with_trace(closed("kl", &pair, r), trace)
        }
        KlMethod::Taylor => {
            params.insert("method".into(), Value::from("taylor"));
            params.insert("s".into(), Value::from(a.s as u64));
            params.insert("center".into(), num(a.center));
            let (r, trace) = taylor_fdiv(&Generator::Kl, f, t1, t2, a.center, a.s)?;
            with_trace(closed("kl", &pair, r), trace)
        }
        KlMethod::Mc => {
            params.insert("method".into(), Value::from("mc"));
            echo_sampling(&a.sampling, &mut params);
            monte_carlo("kl", &Generator::Kl, &pair, a.sampling.n, a.sampling.seed)?
        }
        KlMethod::Oracle => {
            params.insert("method".into(), Value::from("oracle"));
            let report = brute_force("kl", &Generator::Kl, &mut pair, OracleOptions::default(), a.sampling.n, a.sampling.seed)?;
            for (k, v) in &report.params {
                params.entry(k.clone()).or_insert_with(|| v.clone());
            }
            report
        }
    };
    Ok(Report { params, ..report })
}

fn mc(a: &McArgs) -> Result<Report, CliError> {
    let mut pair = resolve_pair(&a.pair)?;
    let generator = resolve_generator(&a.generator, &mut pair.params)?;
    echo_sampling(&a.sampling, &mut pair.params);
    monte_carlo("mc", &generator, &pair, a.sampling.n, a.sampling.seed)
}

fn oracle(a: &OracleArgs) -> Result<Report, CliError> {
    let mut pair = resolve_pair(&a.pair)?;
    let generator = resolve_generator(&a.generator, &mut pair.params)?;
    if let Some(x) = a.x_max {
        pair.params.insert("x-max".into(), Value::from(x));
    }
    pair.params.insert("quad-tol".into(), num(a.quad_tol));
    if !(a.quad_tol.is_finite() && a.quad_tol > 0.0) {
        return Err(CliError::BadArguments(format!("--quad-tol must be positive, got {}", a.quad_tol)));
    }
    let options = OracleOptions { x_max: a.x_max, quad_tol: a.quad_tol };
    brute_force("oracle", &generator, &mut pair, options, a.n, a.seed)
}
