//! Command-line front end: group data, Fourier coefficients, meromorphy
//! certificates and verification suites.

// Guards of the form `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
mod output;
mod spec;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polar_maass::arith::{self, Cusp};
use polar_maass::pairing::{meromorphy_certificate, CertificateParams};
use polar_maass::poincarebasis::{assemble, PrincipalPartSpec};
use polar_maass::{Precision, C64};
use serde::Serialize;

use error::CliError;
use output::{coeff_rows, matrix_label, render_coeffs, render_json, Format, Metadata};
use spec::SpecJson;

const THREADS_ENV: &str = "POLAR_MAASS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "polar-maass", version, about = "Polar harmonic Maass forms on Gamma0(N)")]
struct Cli {
    /// Worker threads (default: $POLAR_MAASS_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cusps, widths, index, c_N and genus of Gamma0(N).
    Group {
        #[arg(long = "N")]
        level: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fourier coefficients at infinity of the form with a given principal part.
    Coeffs(CoeffsArgs),
    /// Meromorphy certificate of a principal-part specification.
    Certify(CertifyArgs),
    /// Run an invariant suite: kloosterman, continuation, basis, pairing or all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = PrecisionArg::Double)]
        precision: PrecisionArg,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CoeffsArgs {
    /// JSON principal-part specification.
    #[arg(long, conflicts_with_all = ["level", "cusp", "index"])]
    spec: Option<PathBuf>,
    /// Level of a single Maass-Poincare series (with --cusp and --index).
    #[arg(long = "N")]
    level: Option<u64>,
    #[arg(long, default_value = "inf")]
    cusp: Option<String>,
    /// Negative principal-part index of the single series.
    #[arg(long, allow_hyphen_values = true)]
    index: Option<i64>,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Largest Fourier index.
    #[arg(long, default_value_t = 10)]
    j_max: u64,
    /// Kloosterman modulus cutoff.
    #[arg(long, default_value_t = 2000)]
    c_max: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 2000)]
    c_max: u64,
    #[arg(long, default_value_t = 400)]
    n_cut: usize,
    #[arg(long, default_value_t = 1e-10)]
    residual_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    antihol_tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
enum PrecisionArg {
    Double,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

/// Everything that determines a command's output (thread count excluded).
#[derive(Debug, Serialize)]
struct JobConfig<'a> {
    command: &'a str,
    level: Option<u64>,
    precision: Option<PrecisionArg>,
    c_max: Option<u64>,
    j_max: Option<u64>,
    tolerance: Option<f64>,
    seed: Option<u64>,
    input: Option<&'a str>,
    input_sha256: Option<String>,
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads(cli.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::InvalidConfig(format!("{THREADS_ENV}='{v}' is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::InvalidConfig("thread count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::InvalidConfig(e.to_string()))?;
    }
    Ok(())
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Group { level, out } => cmd_group(level, &out),
        Command::Coeffs(args) => cmd_coeffs(&args),
        Command::Certify(args) => cmd_certify(&args),
        Command::Verify { suite, seed, precision, out } => cmd_verify(&suite, seed, precision, &out),
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_output_path(path: Option<&Path>) -> Result<(), CliError> {
    if let Some(dir) = path.and_then(|p| p.parent()).filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(CliError::InvalidConfig(format!("output directory {} does not exist", dir.display())));
        }
    }
    Ok(())
}

fn sha256_text(text: &str) -> String {
    output::config_hash(&text)
}

#[derive(Serialize)]
struct CuspRow {
    cusp: String,
    alpha: i64,
    gamma: u64,
    width: u64,
    scaling_matrix: String,
}

fn cmd_group(level: u64, out: &OutputArgs) -> Result<u8, CliError> {
    check_output_path(out.output.as_deref())?;
    let data = arith::group_data(level).map_err(|e| match e {
        arith::ArithError::LevelTooLarge(n) => CliError::UnsupportedLevel(n),
        e => CliError::Arith(e),
    })?;
    let config = JobConfig {
        command: "group",
        level: Some(level),
        precision: None,
        c_max: None,
        j_max: None,
        tolerance: None,
        seed: None,
        input: None,
        input_sha256: None,
        format: out.format,
    };
    let mut meta = Metadata::new("group", &config);
    meta.push("level", &level.to_string());
    meta.push("mu", &data.index.to_string());
    let (p, q) = data.c_n_fraction;
    meta.push("c_N", &if q == 1 { p.to_string() } else { format!("{p}/{q}") });
    meta.push("genus", &data.genus.to_string());
    meta.push("dim_S2", &data.dim_s2.to_string());
    let elliptic: Vec<String> = data.elliptic.iter().map(|e| format!("{} (order {})", e.tau, e.order)).collect();
    meta.push("elliptic_points", &elliptic.join("; "));
    let rows: Vec<CuspRow> = data
        .cusps
        .iter()
        .map(|c| CuspRow {
            cusp: c.label(),
            alpha: c.alpha,
            gamma: c.gamma,
            width: c.width,
            scaling_matrix: matrix_label(&c.expansion_matrix()),
        })
        .collect();
    let text = match out.format {
        Format::Csv => {
            let mut s = meta.csv_header();
            s.push_str("cusp,alpha,gamma,width,scaling_matrix\n");
            for r in &rows {
                s.push_str(&format!("{},{},{},{},\"{}\"\n", r.cusp, r.alpha, r.gamma, r.width, r.scaling_matrix));
            }
            s
        }
        Format::Json => render_json(&meta, "cusps", &rows),
    };
    emit(&text, out.output.as_deref())?;
    Ok(0)
}

fn load_spec(path: &Path) -> Result<(String, PrincipalPartSpec), CliError> {
    let text = read_input(path)?;
    let spec = SpecJson::parse(&text)?.to_spec()?;
    Ok((text, spec))
}

fn cmd_coeffs(args: &CoeffsArgs) -> Result<u8, CliError> {
    check_output_path(args.out.output.as_deref())?;
    if args.j_max == 0 || args.c_max == 0 {
        return Err(CliError::InvalidConfig("cutoffs must be at least 1".into()));
    }
    let (spec, input_text) = match (&args.spec, args.level, args.index) {
        (Some(path), _, _) => {
            let (text, spec) = load_spec(path)?;
            (spec, Some(text))
        }
        (None, Some(level), Some(index)) => {
            if level == 0 || level > arith::MAX_LEVEL {
                return Err(CliError::UnsupportedLevel(level));
            }
            let cusp = Cusp::parse(level, args.cusp.as_deref().unwrap_or("inf"))?;
            let mut spec = PrincipalPartSpec::new(level, args.k);
            spec.add_cusp_term(cusp, index, C64::new(1.0, 0.0));
            spec.validate()?;
            (spec, None)
        }
        _ => return Err(CliError::InvalidConfig("give --spec FILE or --N with --index".into())),
    };
    let path_label = args.spec.as_ref().map(|p| p.display().to_string());
    let config = JobConfig {
        command: "coeffs",
        level: Some(spec.level),
        precision: Some(PrecisionArg::Double),
        c_max: Some(args.c_max),
        j_max: Some(args.j_max),
        tolerance: None,
        seed: None,
        input: path_label.as_deref(),
        input_sha256: input_text.as_deref().map(sha256_text),
        format: args.out.format,
    };
    // spec-free jobs hash the single-series flags instead
    let single = (args.spec.is_none()).then(|| (args.cusp.clone(), args.index, args.k));
    let mut meta = Metadata::new("coeffs", &(&config, &single));

    let ex = assemble(&spec, args.j_max, args.c_max)?;
    meta.push("level", &spec.level.to_string());
    meta.push("weight", &spec.weight().to_string());
    meta.push(
        "expansion_cusp",
        &format!("inf, width 1, scaling {}", matrix_label(&Cusp::infinity(spec.level).expansion_matrix())),
    );
    meta.push("c_max", &args.c_max.to_string());
    meta.push("j_max", &args.j_max.to_string());
    meta.push("valid_for_im_z_above", &output::fmt_f64(ex.min_height));
    for (cusp, _) in &spec.cusp_parts {
        meta.push(
            &format!("scaling_matrix[{}]", cusp.label()),
            &format!("{} (width {})", matrix_label(&cusp.expansion_matrix()), cusp.width),
        );
    }
    for part in &spec.elliptic_parts {
        meta.push(&format!("pole[{}]", part.tau), &format!("stabiliser order {}", part.omega));
    }
    if spec.is_empty() {
        meta.push("note", "empty principal part");
    }
    let text = render_coeffs(&meta, &coeff_rows(&ex), args.out.format);
    emit(&text, args.out.output.as_deref())?;
    Ok(0)
}

fn cmd_certify(args: &CertifyArgs) -> Result<u8, CliError> {
    check_output_path(args.output.as_deref())?;
    if args.c_max < 2 || args.n_cut == 0 || !(args.residual_tol > 0.0) || !(args.antihol_tol > 0.0) {
        return Err(CliError::InvalidConfig("c_max >= 2, n_cut >= 1 and positive tolerances required".into()));
    }
    let (text, spec) = load_spec(&args.spec)?;
    let params = CertificateParams {
        c_max: args.c_max,
        n_cut: args.n_cut,
        residual_tol: args.residual_tol,
        antihol_tol: args.antihol_tol,
        ..CertificateParams::default()
    };
    let path_label = args.spec.display().to_string();
    let config = JobConfig {
        command: "certify",
        level: Some(spec.level),
        precision: Some(PrecisionArg::Double),
        c_max: Some(args.c_max),
        j_max: Some(params.j_max),
        tolerance: Some(args.residual_tol),
        seed: None,
        input: Some(&path_label),
        input_sha256: Some(sha256_text(&text)),
        format: Format::Json,
    };
    let mut meta = Metadata::new("certify", &(&config, args.n_cut, args.antihol_tol));
    meta.push("level", &spec.level.to_string());
    meta.push("c_max", &args.c_max.to_string());
    meta.push("n_cut", &args.n_cut.to_string());
    let cert = meromorphy_certificate(&spec, &params).map_err(|e| match e {
        polar_maass::pairing::PairingError::UnsupportedLevel(n) => CliError::UnsupportedLevel(n),
        e => CliError::Pairing(e),
    })?;
    meta.push("result", if cert.pass { "PASS" } else { "FAIL" });
    emit(&render_json(&meta, "certificate", &cert), args.output.as_deref())?;
    Ok(if cert.pass { 0 } else { 1 })
}

fn cmd_verify(suite: &str, seed: u64, precision: PrecisionArg, out: &OutputArgs) -> Result<u8, CliError> {
    check_output_path(out.output.as_deref())?;
    let suites = verify::select(suite)?;
    let config = JobConfig {
        command: "verify",
        level: None,
        precision: Some(precision),
        c_max: None,
        j_max: None,
        tolerance: None,
        seed: Some(seed),
        input: Some(suite),
        input_sha256: None,
        format: out.format,
    };
    let mut meta = Metadata::new("verify", &config);
    meta.push("suite", suite);
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(verify::run_suite(s, seed, precision.into())?);
    }
    let pass = checks.iter().all(|c| c.pass);
    meta.push("result", if pass { "PASS" } else { "FAIL" });
    let text = match out.format {
        Format::Csv => verify::render_csv(&meta, &checks),
        Format::Json => render_json(&meta, "checks", &checks),
    };
    emit(&text, out.output.as_deref())?;
    Ok(if pass { 0 } else { 1 })
}
