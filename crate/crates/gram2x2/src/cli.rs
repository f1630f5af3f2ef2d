//! Command-line front end: point evaluation of the densities and CDFs, a
//! Monte Carlo self-check suite, and the CSV artifacts behind the
//! rate-vs-SNR sweep and the fractional-loss table.
//!
//! Exit codes: 0 ok, 1 self-check failure, 2 usage, 3 domain error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use gram2x2::dist::{
    cdf_max, cdf_max_small_x, cdf_min, cdf_min_small_x, eig_pdf_general, eig_pdf_normalization,
    eig_pdf_partial, matrix_pdf, perturb_distinct,
};
use gram2x2::gram::{EigenPair, GramMatrix2};
use gram2x2::mc::{
    derive_seed, ks_statistic, ks_statistic_two_sample, ks_threshold_one_sample,
    ks_threshold_two_sample, sample_eigs, sample_map, zf_snr, EmpiricalCdf, SampleConfig,
};
use gram2x2::outage::{fig1_sweep, fractional_loss, snr_db_to_rho, LossMode, OutageConfig};
use gram2x2::profile::{PartialProfile, ProfileClass, VarianceProfile};
use gram2x2::quad::QuadratureConfig;
use gram2x2::Error;

#[derive(Parser, Debug)]
#[command(
    name = "gram2x2",
    version,
    about = "Spectral statistics of 2x2 Gram matrices with per-entry variance profiles"
)]
pub struct Cli {
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Evaluate a density.
    Pdf {
        #[command(subcommand)]
        which: PdfCmd,
    },
    /// Evaluate an extreme-eigenvalue CDF (three-parameter profiles).
    Cdf {
        #[command(subcommand)]
        which: CdfCmd,
    },
    /// Run the Monte Carlo self-check suite against the analytic laws.
    Validate(ValidateArgs),
    /// Outage rate vs SNR: empirical rate and the analytic lower bounds.
    Fig1(Fig1Args),
    /// Fractional-loss table over the interference variance phi3.
    Table1(Table1Args),
}

#[derive(Subcommand, Debug)]
pub enum PdfCmd {
    /// Density of the Gram matrix at a Hermitian PSD point.
    Matrix {
        /// Row-major variance profile phi11,phi12,phi21,phi22.
        #[arg(long, value_parser = parse_list::<4>, value_name = "P11,P12,P21,P22")]
        phi: [f64; 4],
        /// Evaluation point w1,w2,re(w3),im(w3).
        #[arg(long, value_parser = parse_list::<4>, allow_hyphen_values = true, value_name = "W1,W2,W3RE,W3IM")]
        w: [f64; 4],
    },
    /// Joint density of the ordered eigenvalues.
    Eig {
        /// Row-major variance profile phi11,phi12,phi21,phi22.
        #[arg(long, value_parser = parse_list::<4>, value_name = "P11,P12,P21,P22")]
        phi: [f64; 4],
        /// Larger eigenvalue.
        #[arg(long, allow_hyphen_values = true)]
        l1: f64,
        /// Smaller eigenvalue.
        #[arg(long, allow_hyphen_values = true)]
        l2: f64,
        /// Evaluation route; `partial` needs a profile with one flat row.
        #[arg(long, value_enum, default_value_t = EigMethod::General)]
        method: EigMethod,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EigMethod {
    General,
    Partial,
}

#[derive(Subcommand, Debug)]
pub enum CdfCmd {
    /// CDF of the smaller eigenvalue.
    Min(CdfArgs),
    /// CDF of the larger eigenvalue.
    Max(CdfArgs),
}

#[derive(Args, Debug)]
pub struct CdfArgs {
    /// Three-parameter profile: asymmetric-row variances, then the flat one.
    #[arg(long = "phi3profile", value_parser = parse_list::<3>, value_name = "PHI1,PHI2,PHI3")]
    pub phi3profile: [f64; 3],
    /// Evaluation point (>= 0).
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    /// Also print the small-x expansion value.
    #[arg(long)]
    pub expansion: bool,
    /// Nudge phi3 off coincidences with phi1/phi2 instead of erroring.
    #[arg(long)]
    pub auto_perturb: bool,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Row-major variance profile phi11,phi12,phi21,phi22.
    #[arg(long, value_parser = parse_list::<4>, value_name = "P11,P12,P21,P22")]
    pub phi: [f64; 4],
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Test hook: evaluate the closed-form CDFs with this phi3 instead of
    /// the profile's own, so the KS checks must lose.
    #[arg(long, hide = true, allow_hyphen_values = true)]
    pub inject_wrong_phi3: Option<f64>,
}

#[derive(Args, Debug)]
pub struct Fig1Args {
    /// Row-major variance profile phi11,phi12,phi21,phi22.
    #[arg(long, value_parser = parse_list::<4>, default_value = "0.01,0.99,1.5,1.5", value_name = "P11,P12,P21,P22")]
    pub phi: [f64; 4],
    /// Outage levels in (0, 1).
    #[arg(long, value_parser = parse_float_list, default_value = "0.01,0.1,0.5", value_name = "E1,E2,...")]
    pub eps: FloatList,
    /// SNR grid in dB, START:STOP:STEP inclusive (or a single value).
    #[arg(long = "snr-db", value_parser = parse_snr_grid, default_value = "0:30:1", allow_hyphen_values = true, value_name = "GRID")]
    pub snr_db: SnrGrid,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct Table1Args {
    /// Transmit SNR in dB.
    #[arg(long = "snr-db", default_value_t = 30.0, allow_hyphen_values = true)]
    pub snr_db: f64,
    /// Outage level in (0, 1).
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct FloatList(pub Vec<f64>);

#[derive(Clone, Debug)]
pub struct SnrGrid(pub Vec<f64>);

/// phi3 rows of the fractional-loss table.
pub const TABLE1_PHI3: [f64; 8] = [0.01, 0.5, 1.0, 1.2, 1.4, 1.6, 1.8, 1.95];

fn parse_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!(
            "expected {N} comma-separated numbers, got {}",
            parts.len()
        ));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid number {part:?}"))?;
    }
    Ok(out)
}

fn parse_float_list(s: &str) -> Result<FloatList, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        out.push(
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number {part:?}"))?,
        );
    }
    if out.is_empty() {
        return Err("expected at least one number".into());
    }
    Ok(FloatList(out))
}

fn parse_snr_grid(s: &str) -> Result<SnrGrid, String> {
    if !s.contains(':') {
        let v = s
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("invalid number {s:?}"))?;
        return Ok(SnrGrid(vec![v]));
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("SNR grid must be START:STOP:STEP".into());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number {p:?}"))
        })
        .collect::<Result<_, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !step.is_finite() || step <= 0.0 {
        return Err(format!("grid step must be positive, got {step}"));
    }
    if !start.is_finite() || !stop.is_finite() || start > stop {
        return Err(format!("grid needs START <= STOP, got {start} > {stop}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return Err(format!("grid has {n} points; cap is 100000"));
    }
    Ok(SnrGrid((0..n).map(|i| start + step * i as f64).collect()))
}

/// 15-significant-digit shortest decimal; plain notation in the readable
/// range, scientific outside it.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.14e}").parse().unwrap();
    let mag = rounded.abs();
    if (1e-4..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

fn json_num(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_else(|| "null".to_string())
}

struct Outcome {
    text: String,
    failed: bool,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return 2;
    }
    match dispatch(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, &out.text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 3;
                }
            } else {
                print!("{}", out.text);
            }
            i32::from(out.failed)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// GRAM2X2_THREADS caps the worker pool; unset means the library default.
fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("GRAM2X2_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| format!("GRAM2X2_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(cli: &Cli) -> gram2x2::Result<Outcome> {
    let done = |text: String| Outcome { text, failed: false };
    match &cli.cmd {
        Cmd::Pdf { which } => cmd_pdf(which, cli.format).map(done),
        Cmd::Cdf { which } => cmd_cdf(which, cli.format).map(done),
        Cmd::Validate(a) => cmd_validate(a, cli.format),
        Cmd::Fig1(a) => cmd_fig1(a, cli.format).map(done),
        Cmd::Table1(a) => cmd_table1(a, cli.format).map(done),
    }
}

fn profile_from(phi: &[f64; 4]) -> gram2x2::Result<VarianceProfile> {
    VarianceProfile::new(phi[0], phi[1], phi[2], phi[3])
}

fn single_record(cols: &[(&str, f64)], fmt: Format) -> String {
    match fmt {
        Format::Csv => {
            let header: Vec<&str> = cols.iter().map(|(n, _)| *n).collect();
            let row: Vec<String> = cols.iter().map(|&(_, v)| fmt_num(v)).collect();
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
        Format::Json => {
            let fields: Vec<String> = cols
                .iter()
                .map(|&(n, v)| format!("\"{n}\": {}", json_num(Some(v))))
                .collect();
            format!("{{{}}}\n", fields.join(", "))
        }
    }
}

fn cmd_pdf(which: &PdfCmd, fmt: Format) -> gram2x2::Result<String> {
    let value = match which {
        PdfCmd::Matrix { phi, w } => {
            let p = profile_from(phi)?;
            let wm = GramMatrix2::new(w[0], w[1], Complex64::new(w[2], w[3]))?;
            matrix_pdf(&p, &wm)
        }
        PdfCmd::Eig {
            phi,
            l1,
            l2,
            method,
        } => {
            let p = profile_from(phi)?;
            let e = EigenPair::new(*l1, *l2)?;
            match method {
                EigMethod::General => eig_pdf_general(&p, &e, &QuadratureConfig::default())?,
                EigMethod::Partial => {
                    let ProfileClass::PartiallyAsymmetric { partial, .. } = p.classify() else {
                        return Err(Error::DegenerateParameters {
                            what: "partial route needs a profile with exactly one flat row"
                                .into(),
                        });
                    };
                    eig_pdf_partial(&partial, &e)?
                }
            }
        }
    };
    Ok(single_record(&[("value", value)], fmt))
}

fn cmd_cdf(which: &CdfCmd, fmt: Format) -> gram2x2::Result<String> {
    let (args, is_min) = match which {
        CdfCmd::Min(a) => (a, true),
        CdfCmd::Max(a) => (a, false),
    };
    let t = args.phi3profile;
    let mut pp = PartialProfile::new(t[0], t[1], t[2])?;
    if args.auto_perturb {
        pp = perturb_distinct(&pp);
    }
    let value = match if is_min {
        cdf_min(&pp, args.x)
    } else {
        cdf_max(&pp, args.x)
    } {
        Err(Error::DegenerateParameters { what }) if pp.check_phi12_distinct().is_ok() => {
            return Err(Error::DegenerateParameters {
                what: format!("{what}; rerun with --auto-perturb to nudge phi3 off it"),
            });
        }
        other => other?,
    };
    let mut cols = vec![("value", value)];
    if args.expansion {
        let e = if is_min {
            cdf_min_small_x(&pp, args.x)
        } else {
            cdf_max_small_x(&pp, args.x)
        };
        cols.push(("expansion", e));
    }
    Ok(single_record(&cols, fmt))
}

struct CheckRow {
    name: &'static str,
    statistic: f64,
    threshold: f64,
}

impl CheckRow {
    fn pass(&self) -> bool {
        self.statistic <= self.threshold
    }
}

fn cmd_validate(a: &ValidateArgs, fmt: Format) -> gram2x2::Result<Outcome> {
    let p = profile_from(&a.phi)?;
    let c = SampleConfig::new(a.samples, a.seed)?;
    let mut rows = Vec::new();

    let mass = eig_pdf_normalization(&p, &QuadratureConfig::default())?;
    rows.push(CheckRow {
        name: "eig_pdf_normalization",
        statistic: (mass - 1.0).abs(),
        threshold: 1e-6,
    });

    let eigs = sample_eigs(&p, &c);

    // closed-form CDF checks exist only for the one-flat-row class
    let partial = match p.classify() {
        ProfileClass::PartiallyAsymmetric { partial, .. } => {
            let pp = perturb_distinct(&partial);
            pp.check_all_distinct().ok().map(|_| pp)
        }
        _ => None,
    };
    if let Some(found) = partial {
        let pp = match a.inject_wrong_phi3 {
            Some(phi3) => {
                let injected = PartialProfile::new(found.phi1(), found.phi2(), phi3)?;
                injected.check_all_distinct()?;
                injected
            }
            None => found,
        };
        let mins = EmpiricalCdf::new(eigs.iter().map(|e| e.min()).collect())?;
        let maxs = EmpiricalCdf::new(eigs.iter().map(|e| e.max()).collect())?;
        let thr = ks_threshold_one_sample(a.samples);
        rows.push(CheckRow {
            name: "lambda_min_ks",
            statistic: ks_statistic(&mins, |x| cdf_min(&pp, x).expect("x >= 0")),
            threshold: thr,
        });
        rows.push(CheckRow {
            name: "lambda_max_ks",
            statistic: ks_statistic(&maxs, |x| cdf_max(&pp, x).expect("x >= 0")),
            threshold: thr,
        });
    }

    // the eigenvalue law must not see a transpose of the profile
    let ct = SampleConfig::new(a.samples, derive_seed(a.seed, 1))?;
    let eigs_t = sample_eigs(&p.transpose(), &ct);
    let base = EmpiricalCdf::new(eigs.iter().map(|e| e.min()).collect())?;
    let transposed = EmpiricalCdf::new(eigs_t.iter().map(|e| e.min()).collect())?;
    rows.push(CheckRow {
        name: "transpose_two_sample_ks",
        statistic: ks_statistic_two_sample(&base, &transposed),
        threshold: ks_threshold_two_sample(a.samples),
    });

    // per-user ZF SNR (unit rho) never falls below the smaller eigenvalue
    let cz = SampleConfig::new(a.samples, derive_seed(a.seed, 2))?;
    let violations: usize = sample_map(&p, &cz, |h| {
        let w = GramMatrix2::from_channel(h);
        let lmin = w.eigenvalues().map(|e| e.min()).unwrap_or(0.0);
        let m = match zf_snr(h, 1.0) {
            Ok((s1, s2)) => s1.min(s2),
            Err(_) => 0.0,
        };
        usize::from(m < lmin - 1e-9)
    })
    .into_iter()
    .sum();
    rows.push(CheckRow {
        name: "zf_bound_violations",
        statistic: violations as f64,
        threshold: 0.0,
    });

    let failed = rows.iter().any(|r| !r.pass());
    let text = match fmt {
        Format::Csv => {
            let mut out = String::from("check_name,statistic,threshold,result\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    r.name,
                    fmt_num(r.statistic),
                    fmt_num(r.threshold),
                    if r.pass() { "PASS" } else { "FAIL" }
                ));
            }
            out
        }
        Format::Json => {
            let items: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "{{\"check_name\": \"{}\", \"statistic\": {}, \"threshold\": {}, \"result\": \"{}\"}}",
                        r.name,
                        fmt_num(r.statistic),
                        fmt_num(r.threshold),
                        if r.pass() { "PASS" } else { "FAIL" }
                    )
                })
                .collect();
            format!("[\n  {}\n]\n", items.join(",\n  "))
        }
    };
    Ok(Outcome { text, failed })
}

fn cmd_fig1(a: &Fig1Args, fmt: Format) -> gram2x2::Result<String> {
    let p = profile_from(&a.phi)?;
    let c = SampleConfig::new(a.samples, a.seed)?;
    let rows = fig1_sweep(&p, &a.eps.0, &a.snr_db.0, &c)?;
    Ok(match fmt {
        Format::Csv => {
            let mut out = String::from("eps,snr_db,r_emp,r_check,r_tilde\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_num(r.eps),
                    fmt_num(r.snr_db),
                    fmt_num(r.r_emp),
                    fmt_opt(r.r_check),
                    fmt_opt(r.r_tilde)
                ));
            }
            out
        }
        Format::Json => {
            let items: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "{{\"eps\": {}, \"snr_db\": {}, \"r_emp\": {}, \"r_check\": {}, \"r_tilde\": {}}}",
                        fmt_num(r.eps),
                        fmt_num(r.snr_db),
                        fmt_num(r.r_emp),
                        json_num(r.r_check),
                        json_num(r.r_tilde)
                    )
                })
                .collect();
            format!("[\n  {}\n]\n", items.join(",\n  "))
        }
    })
}

fn cmd_table1(a: &Table1Args, fmt: Format) -> gram2x2::Result<String> {
    let rho = snr_db_to_rho(a.snr_db);
    let mut rows = Vec::new();
    for (idx, &phi3) in TABLE1_PHI3.iter().enumerate() {
        let o = OutageConfig::new(rho, a.eps, a.samples, derive_seed(a.seed, idx as u64))?;
        let fl_emp = fractional_loss(phi3, &o, LossMode::Empirical)?;
        let fl_tilde = fractional_loss(phi3, &o, LossMode::Analytic)?;
        rows.push((phi3, fl_emp, fl_tilde));
    }
    Ok(match fmt {
        Format::Csv => {
            let mut out = String::from("phi3,fl_emp,fl_tilde\n");
            for &(phi3, fl_emp, fl_tilde) in &rows {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_num(phi3),
                    fmt_num(fl_emp),
                    fmt_num(fl_tilde)
                ));
            }
            out
        }
        Format::Json => {
            let items: Vec<String> = rows
                .iter()
                .map(|&(phi3, fl_emp, fl_tilde)| {
                    format!(
                        "{{\"phi3\": {}, \"fl_emp\": {}, \"fl_tilde\": {}}}",
                        fmt_num(phi3),
                        fmt_num(fl_emp),
                        fmt_num(fl_tilde)
                    )
                })
                .collect();
            format!("[\n  {}\n]\n", items.join(",\n  "))
        }
    })
}
