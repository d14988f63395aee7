//! Command-line front end: wires denominator specs, weight models, and grids
//! to the library and emits CSV/JSON reports with CI-friendly exit codes.
//!
//! Exit codes: 0 = all checks pass, 1 = usage or numeric error, 2 =
//! certification failure (class membership or an infinite bound), 3 = a
//! CRITICAL verdict (a measured ratio exceeded its certified bound).

use clap::{Args, Parser, Subcommand, ValueEnum};
use l2ext::bergman::{self, SweepCase};
use l2ext::certify::{self, RProfile, WeightModel};
use l2ext::constants::{self, BoundMode};
use l2ext::denom::DenominatorSpec;
use l2ext::error::Error;
use l2ext::expr::ExprAst;
use l2ext::search;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

/// Default delta grid used by `auto`, refined by the generic optimizer.
const AUTO_DELTAS: [f64; 6] = [0.25, 0.5, 1.0, std::f64::consts::SQRT_2, 2.0, 4.0];

#[derive(Parser)]
#[command(
    name = "l2ext",
    version,
    about = "Certify denominator classes and verify weighted L2 extension bounds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Report format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Fn1,
    Fn2,
    Fn3,
    Fn4,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Minimize the generic 4(K + (1+delta)/delta C) bound.
    Generic,
    /// Minimize the family closed form.
    AsPrinted,
}

/// Denominator selection: a built-in family or an expression for g(x).
#[derive(Args, Clone)]
struct SpecArgs {
    /// Built-in family.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Expression for g(x); free identifiers become parameters.
    #[arg(long)]
    g: Option<String>,
    /// Parameter binding for --g, repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// Shape parameter for fn1/fn3/fn4.
    #[arg(long)]
    s: Option<f64>,
    /// Logarithm depth for fn4.
    #[arg(long = "N")]
    n: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check class membership over a delta grid and emit certificates.
    CheckClass {
        #[command(flatten)]
        spec: SpecArgs,
        /// Single delta or `auto` for the default grid plus optimizer.
        #[arg(long, default_value = "auto")]
        delta: String,
        /// Optional disk weight kappa ("0", "r2", or poly coefficients
        /// "c0,c1,..."): attaches a curvature-defect check.
        #[arg(long)]
        kappa: Option<String>,
        /// Radial damping R: zero, const:<v>, or radial:<csv-file>.
        #[arg(long = "R")]
        r_profile: Option<String>,
        /// Twist offset for the defect check.
        #[arg(long, default_value_t = 1.5)]
        gamma: f64,
        /// Regularization for the defect check.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Polar grid resolution for the defect check.
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Sample G, h, h', h'' on a logarithmic grid.
    TwistTable {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        delta: f64,
        /// Number of sample points on [1, 1e4].
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// Evaluate the extension bound at one delta (or the best automatic one).
    Constant {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value = "auto")]
        delta: String,
    },
    /// Minimize the bound over delta.
    OptimizeDelta {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Generic)]
        mode: ModeArg,
    },
    /// Reproduce the family constants table.
    Reproduce,
    /// Measure the minimal disk extension ratio against its bound.
    VerifyDisk {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        delta: f64,
        /// Radial kappa: "0", "r2", or poly coefficients "c0,c1,...".
        #[arg(long, default_value = "0")]
        kappa: String,
        /// Radial damping R: zero, const:<v>, or radial:<csv-file>.
        #[arg(long = "R", default_value = "zero")]
        r_profile: String,
        /// Override the quadrature budget added to the bound.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Measure the minimal bidisk extension ratio against its bound.
    VerifyBidisk {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        delta: f64,
        /// Bidisk kappa: "0", "r2" (unit quadratic form), or "a,b,c".
        #[arg(long, default_value = "0")]
        kappa: String,
        /// Radial damping R: zero, const:<v>, or radial:<csv-file>.
        #[arg(long = "R", default_value = "zero")]
        r_profile: String,
        /// Extension degree in each variable.
        #[arg(long, default_value_t = 4)]
        degree: usize,
        /// Data polynomial coefficients "c0,c1,...".
        #[arg(long = "f", default_value = "1")]
        data: String,
        /// Override the quadrature budget added to the bound.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the standard verification battery (or one spec against it).
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// Single delta or `auto` for {1, sqrt 2}.
        #[arg(long, default_value = "auto")]
        delta: String,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        /// Override the quadrature budget added to the bound.
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// CLI failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn certification(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure { code: 1, message: err.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    #[cfg(feature = "parallel")]
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

impl SpecArgs {
    fn build(&self) -> CliResult<DenominatorSpec> {
        match (&self.family, &self.g) {
            (Some(_), Some(_)) => {
                Err(Failure::usage("pass exactly one of --family and --g"))
            }
            (Some(family), None) => {
                let need_s = || {
                    self.s.ok_or_else(|| Failure::usage("this family requires --s"))
                };
                let spec = match family {
                    FamilyArg::Fn1 => DenominatorSpec::fn1(need_s()?)?,
                    FamilyArg::Fn2 => DenominatorSpec::fn2(),
                    FamilyArg::Fn3 => DenominatorSpec::fn3(need_s()?)?,
                    FamilyArg::Fn4 => {
                        let n = self.n.ok_or_else(|| Failure::usage("fn4 requires --N"))?;
                        DenominatorSpec::fn4(need_s()?, n)?
                    }
                };
                Ok(spec)
            }
            (None, Some(src)) => {
                let ast = ExprAst::parse(src)?;
                let mut params = BTreeMap::new();
                for binding in &self.params {
                    let (key, value) = binding
                        .split_once('=')
                        .ok_or_else(|| Failure::usage(format!("--param wants k=v, got `{binding}`")))?;
                    let value: f64 = value
                        .parse()
                        .map_err(|_| Failure::usage(format!("--param value `{value}` is not a number")))?;
                    params.insert(key.trim().to_string(), value);
                }
                Ok(DenominatorSpec::expr(ast, params)?)
            }
            (None, None) => Err(Failure::usage("pass --family or --g")),
        }
    }
}

fn parse_delta_or_auto(text: &str) -> CliResult<Option<f64>> {
    if text.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    let delta: f64 = text
        .parse()
        .map_err(|_| Failure::usage(format!("--delta wants a number or `auto`, got `{text}`")))?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Failure::usage("--delta must be positive and finite"));
    }
    Ok(Some(delta))
}

fn auto_deltas(spec: &DenominatorSpec) -> Vec<f64> {
    let mut deltas = AUTO_DELTAS.to_vec();
    if let Ok((refined, _)) = constants::optimal_delta(spec, BoundMode::Generic) {
        if refined.is_finite() {
            deltas.push(refined);
        }
    }
    deltas
}

fn parse_coeff_list(text: &str, flag: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("{flag}: `{part}` is not a number")))
        })
        .collect()
}

fn parse_disk_kappa(text: &str) -> CliResult<Vec<f64>> {
    match text {
        "0" => Ok(Vec::new()),
        "r2" => Ok(vec![0.0, 1.0]),
        other => parse_coeff_list(other, "--kappa"),
    }
}

fn parse_r_profile(text: &str) -> CliResult<RProfile> {
    if text == "zero" {
        return Ok(RProfile::Zero);
    }
    if let Some(value) = text.strip_prefix("const:") {
        let v: f64 = value
            .parse()
            .map_err(|_| Failure::usage(format!("--R const wants a number, got `{value}`")))?;
        return Ok(RProfile::Const(v));
    }
    if let Some(path) = text.strip_prefix("radial:") {
        let raw = std::fs::read_to_string(path)
            .map_err(|err| Failure::usage(format!("--R radial: cannot read {path}: {err}")))?;
        let mut table = Vec::new();
        for (lineno, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((r, v)) = line.split_once(',') else {
                return Err(Failure::usage(format!("{path}:{}: want `r,R`", lineno + 1)));
            };
            match (r.trim().parse::<f64>(), v.trim().parse::<f64>()) {
                (Ok(r), Ok(v)) => table.push((r, v)),
                // Tolerate one header line.
                _ if lineno == 0 => continue,
                _ => {
                    return Err(Failure::usage(format!("{path}:{}: want numbers", lineno + 1)))
                }
            }
        }
        return Ok(RProfile::radial(table)?);
    }
    Err(Failure::usage(format!(
        "--R wants zero, const:<v>, or radial:<file>, got `{text}`"
    )))
}

fn parse_bidisk_weight(kappa: &str, r_profile: RProfile) -> CliResult<WeightModel> {
    match kappa {
        "0" => Ok(WeightModel::bidisk_separable(Vec::new(), Vec::new(), r_profile)),
        "r2" => Ok(WeightModel::bidisk_quadform(1.0, 1.0, 0.0, r_profile)?),
        other => {
            let coeffs = parse_coeff_list(other, "--kappa")?;
            if coeffs.len() != 3 {
                return Err(Failure::usage("bidisk --kappa wants \"a,b,c\""));
            }
            Ok(WeightModel::bidisk_quadform(coeffs[0], coeffs[1], coeffs[2], r_profile)?)
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|err| Failure::usage(format!("cannot write {}: {err}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

/// Re-price verdicts when --tol overrides the built-in quadrature budget.
fn apply_tol(report: &mut bergman::SweepReport, tol: Option<f64>) -> CliResult<()> {
    let Some(tol) = tol else { return Ok(()) };
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::usage("--tol must be positive and finite"));
    }
    for verdict in &mut report.verdicts {
        verdict.quad_error = tol;
        verdict.margin = verdict.bound + tol - verdict.ratio;
        verdict.critical = verdict.ratio > verdict.bound + tol;
    }
    Ok(())
}

fn finish_sweep(mut report: bergman::SweepReport, cli_format: Format, out: &Option<PathBuf>, tol: Option<f64>) -> CliResult<u8> {
    apply_tol(&mut report, tol)?;
    let text = match cli_format {
        Format::Csv => report.to_csv(),
        Format::Json => to_json(&report),
    };
    emit(&text, out)?;
    Ok(if report.criticals() > 0 { 3 } else { 0 })
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.cmd {
        Cmd::CheckClass { spec, delta, kappa, r_profile, gamma, eps, grid } => {
            let spec = spec.build()?;
            let deltas = match parse_delta_or_auto(&delta)? {
                Some(d) => vec![d],
                None => auto_deltas(&spec),
            };
            let mut report = certify::check_class(&spec, &deltas)?;
            let mut berg_pass = true;
            if kappa.is_some() || r_profile.is_some() {
                let weight = WeightModel::disk(
                    parse_disk_kappa(kappa.as_deref().unwrap_or("0"))?,
                    parse_r_profile(r_profile.as_deref().unwrap_or("zero"))?,
                );
                let berg = certify::check_berg(&spec, &weight, &[gamma], &[eps], grid)?;
                berg_pass = berg.pass;
                report.certificates = report
                    .certificates
                    .into_iter()
                    .map(|cert| cert.with_berg(berg.clone()))
                    .collect();
            }
            let text = match cli.format {
                Format::Csv => {
                    let mut out =
                        String::from("delta,C,K,witness_x,bound,ode_max_residual,h_ok,berg_ok\n");
                    for cert in &report.certificates {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{},{}",
                            cert.delta,
                            cert.c,
                            cert.k,
                            cert.witness_x,
                            cert.bound,
                            cert.ode_max_residual,
                            cert.h_conditions.iter().all(|&ok| ok),
                            cert.berg.pass
                        );
                    }
                    out
                }
                Format::Json => to_json(&report),
            };
            emit(&text, &cli.out)?;
            if let Some(violation) = &report.violation {
                return Err(Failure::certification(format!("not in class: {violation:?}")));
            }
            if report.best.is_none() {
                return Err(Failure::certification("no delta produced a finite bound"));
            }
            if !berg_pass {
                return Err(Failure::certification("curvature defect is not subharmonic"));
            }
            Ok(0)
        }
        Cmd::TwistTable { spec, delta, grid } => {
            let spec = spec.build()?;
            if grid < 2 {
                return Err(Failure::usage("--grid must be at least 2"));
            }
            let xs = search::log_grid(1.0, 1e4, grid);
            let samples = l2ext::denom::h_delta_samples(&spec, delta, &xs)?;
            let text = match cli.format {
                Format::Csv => samples.to_csv(),
                Format::Json => to_json(&json!({
                    "spec": spec.spec_id(),
                    "delta": delta,
                    "x": samples.xs,
                    "G": samples.g_big,
                    "h": samples.h,
                    "hp": samples.hp,
                    "hpp": samples.hpp,
                })),
            };
            emit(&text, &cli.out)?;
            Ok(0)
        }
        Cmd::Constant { spec, delta } => {
            let spec = spec.build()?;
            let bound = match parse_delta_or_auto(&delta)? {
                Some(d) => constants::extension_bound(&spec, d)?,
                None => auto_deltas(&spec)
                    .iter()
                    .filter_map(|&d| constants::extension_bound(&spec, d).ok())
                    .filter(|b| b.generic_bound.is_finite())
                    .min_by(|a, b| a.generic_bound.total_cmp(&b.generic_bound))
                    .ok_or_else(|| {
                        Failure::certification("no delta produced a finite bound")
                    })?,
            };
            let text = match cli.format {
                Format::Csv => {
                    let mut out = String::from(
                        "spec,delta,K,C,generic_bound,as_printed_bound,norm_description\n",
                    );
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{}",
                        csv_field(&bound.spec_id),
                        bound.delta,
                        bound.k,
                        bound.c,
                        bound.generic_bound,
                        bound
                            .as_printed_bound
                            .map(|v| v.to_string())
                            .unwrap_or_default(),
                        csv_field(&bound.norm_description)
                    );
                    out
                }
                Format::Json => to_json(&bound),
            };
            emit(&text, &cli.out)?;
            if !bound.generic_bound.is_finite() {
                return Err(Failure::certification("bound is infinite at this delta"));
            }
            Ok(0)
        }
        Cmd::OptimizeDelta { spec, mode } => {
            let spec = spec.build()?;
            let (mode, label) = match mode {
                ModeArg::Generic => (BoundMode::Generic, "generic"),
                ModeArg::AsPrinted => (BoundMode::AsPrinted, "as_printed"),
            };
            let (delta_star, value) = constants::optimal_delta(&spec, mode)?;
            let text = match cli.format {
                Format::Csv => format!(
                    "spec,mode,delta_star,value\n{},{label},{delta_star},{value}\n",
                    csv_field(&spec.spec_id())
                ),
                Format::Json => to_json(&json!({
                    "spec": spec.spec_id(),
                    "mode": label,
                    "delta_star": delta_star,
                    "value": value,
                })),
            };
            emit(&text, &cli.out)?;
            Ok(0)
        }
        Cmd::Reproduce => {
            let report = constants::reproduce_report()?;
            let text = match cli.format {
                Format::Csv => report.to_csv(),
                Format::Json => to_json(&report),
            };
            emit(&text, &cli.out)?;
            Ok(0)
        }
        Cmd::VerifyDisk { spec, delta, kappa, r_profile, tol } => {
            let spec = spec.build()?.normalize()?;
            let weight =
                WeightModel::disk(parse_disk_kappa(&kappa)?, parse_r_profile(&r_profile)?);
            let cases = [SweepCase { spec, weight, data: vec![1.0], delta }];
            let report = bergman::sweep_verify(&cases, 0)?;
            finish_sweep(report, cli.format, &cli.out, tol)
        }
        Cmd::VerifyBidisk { spec, delta, kappa, r_profile, degree, data, tol } => {
            let spec = spec.build()?.normalize()?;
            let weight = parse_bidisk_weight(&kappa, parse_r_profile(&r_profile)?)?;
            let data = parse_coeff_list(&data, "--f")?;
            let cases = [SweepCase { spec, weight, data, delta }];
            let report = bergman::sweep_verify(&cases, degree)?;
            finish_sweep(report, cli.format, &cli.out, tol)
        }
        Cmd::Sweep { spec, delta, degree, tol } => {
            let mut cases = if spec.family.is_some() || spec.g.is_some() {
                bergman::battery_for_spec(&spec.build()?.normalize()?)
            } else {
                bergman::default_battery()
            };
            if let Some(d) = parse_delta_or_auto(&delta)? {
                for case in &mut cases {
                    case.delta = d;
                }
                // The battery pairs each configuration with two deltas;
                // keep one row per configuration after the override.
                let mut seen = std::collections::BTreeSet::new();
                cases.retain(|case| {
                    seen.insert((
                        case.spec.spec_id(),
                        case.weight.weight_id(),
                        case.data.iter().map(|c| c.to_bits()).collect::<Vec<_>>(),
                    ))
                });
            }
            let report = bergman::sweep_verify(&cases, degree)?;
            finish_sweep(report, cli.format, &cli.out, tol)
        }
    }
}
