//! Command-line front end: CSV output for single points, SNR sweeps and
//! coding-gain tables, plus the verification suite.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::asymptotic::{asym_scenario, coding_gain};
use crate::error::{OutageError, Result};
use crate::exact::outage_exact;
use crate::model::{ChannelScenario, EigenSpectrum, Method, Model, OutageResult, SystemConfig};
use crate::monte_carlo::estimate_outage_sweep;
use crate::verify::{run_suite, VerifyOptions, GROUPS};

pub const THREADS_ENV: &str = "MIMO_OUTAGE_THREADS";
pub const FAULT_ENV: &str = "MIMO_OUTAGE_INJECT_FAULT";

const DEFAULT_SAMPLES: u64 = 1_000_000;
const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "mimo-outage",
    version,
    about = "Outage probability of Kronecker-correlated Rayleigh MIMO channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact outage probability at one operating point.
    Exact(ExactArgs),
    /// Outage versus SNR for one or more methods.
    Sweep(SweepArgs),
    /// Coding gain C(R) over a rate grid for several array sizes.
    Gain(GainArgs),
    /// Run the property suite; exits 1 if any check fails.
    Verify(VerifyArgs),
}

/// Scenario flags shared by `exact` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// JSON file with the same keys as these flags (snake_case); flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ind, semi-rx, semi-tx or full; inferred from the spectra when omitted.
    #[arg(long)]
    pub model: Option<Model>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    /// Target rate R in bits/s/Hz.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Transmit correlation eigenvalues, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t_eigs: Option<Vec<f64>>,
    /// Receive correlation eigenvalues, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub r_eigs: Option<Vec<f64>>,
    /// Input covariance eigenvalues (power per transmit eigenmode).
    #[arg(long, value_delimiter = ',')]
    pub x_eigs: Option<Vec<f64>>,
    /// Rescale correlation spectra to trace n instead of rejecting them.
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// SNR range a:b:step in dB, inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Comma-separated subset of exact, asym, mc.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GainArgs {
    /// Array sizes as NtxNr, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<String>,
    /// Rate range a:b:step in bits/s/Hz, inclusive.
    #[arg(long)]
    pub rate: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated check groups to run.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<String>>,
    /// Monte Carlo samples for the oracle group.
    #[arg(long, default_value_t = 200_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// One JSON record per check instead of text lines.
    #[arg(long)]
    pub json: bool,
}

/// Config-file schema. Keys mirror the scenario flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<String>,
    pub n_t: Option<usize>,
    pub n_r: Option<usize>,
    pub rate: Option<f64>,
    pub snr_db: Option<serde_json::Value>,
    pub t_eigs: Option<Vec<f64>>,
    pub r_eigs: Option<Vec<f64>>,
    pub x_eigs: Option<Vec<f64>>,
    pub renormalize: Option<bool>,
    pub methods: Option<Vec<String>>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| OutageError::InvalidConfig(format!("config file: {e}")))
    }

    fn load(path: &Option<PathBuf>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    OutageError::InvalidConfig(format!("cannot read {}: {e}", p.display()))
                })?;
                Self::parse(&text)
            }
        }
    }
}

/// Parses `a:b:step` (or a single value) into an inclusive grid.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || OutageError::InvalidConfig(format!("bad range '{spec}', expected a:b:step"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, step) = match parts[..] {
        [a] => (a, a, 1.0),
        [a, b, step] => (a, b, step),
        _ => return Err(bad()),
    };
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(OutageError::InvalidConfig(format!("empty range '{spec}'")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| a + k as f64 * step).collect())
}

fn spectrum(values: &Option<Vec<f64>>, n: usize, renormalize: bool) -> Result<EigenSpectrum> {
    match values {
        None => Ok(EigenSpectrum::identity(n)),
        Some(v) if renormalize => EigenSpectrum::renormalized(v),
        Some(v) => EigenSpectrum::new(v),
    }
}

/// A fully resolved scenario: flags over config file over defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: ChannelScenario,
    pub n_t: usize,
    pub n_r: usize,
    pub rate: f64,
}

impl ScenarioArgs {
    pub fn resolve(&self, file: &ConfigFile) -> Result<Resolved> {
        let t_eigs = self.t_eigs.clone().or_else(|| file.t_eigs.clone());
        let r_eigs = self.r_eigs.clone().or_else(|| file.r_eigs.clone());
        let x_eigs = self.x_eigs.clone().or_else(|| file.x_eigs.clone());
        let renormalize = self.renormalize || file.renormalize.unwrap_or(false);
        let missing = |what: &str| OutageError::InvalidConfig(format!("missing {what}"));
        let n_t = self
            .nt
            .or(file.n_t)
            .or(t_eigs.as_ref().map(Vec::len))
            .ok_or_else(|| missing("--nt"))?;
        let n_r = self
            .nr
            .or(file.n_r)
            .or(r_eigs.as_ref().map(Vec::len))
            .ok_or_else(|| missing("--nr"))?;
        let rate = self.rate.or(file.rate).ok_or_else(|| missing("--rate"))?;
        let t = spectrum(&t_eigs, n_t, renormalize)?;
        let r = spectrum(&r_eigs, n_r, renormalize)?;
        let file_model = file.model.as_deref().map(str::parse::<Model>).transpose()?;
        let model = self
            .model
            .or(file_model)
            .unwrap_or_else(|| Model::from_identity_flags(t.is_identity(), r.is_identity()));
        let mut scenario = ChannelScenario {
            model,
            t_spectrum: t,
            r_spectrum: r,
            x_spectrum: EigenSpectrum::identity(n_t),
        };
        if let Some(x) = &x_eigs {
            scenario = scenario.with_power_allocation(EigenSpectrum::power_allocation(x)?);
        }
        // Validate once up front so errors surface before any work.
        crate::model::validate_scenario(&scenario, &SystemConfig::new(n_t, n_r, rate, 0.0)?)?;
        Ok(Resolved {
            scenario,
            n_t,
            n_r,
            rate,
        })
    }
}

const CSV_HEADER: &str = "model,n_t,n_r,rate,snr_db,probability,err_estimate,method";

/// Shortest round-trip form; scientific outside [1e−4, 1e6).
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_row(model: Model, cfg: &SystemConfig, probability: f64, err: f64, method: Method) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        model,
        cfg.n_t(),
        cfg.n_r(),
        fmt_num(cfg.rate()),
        fmt_num(cfg.snr_db()),
        fmt_num(probability),
        fmt_num(err),
        method
    )
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(",")
}

fn metadata(command: &str, r: &Resolved) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# mimo-outage {} {command}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# t_eigs={}", fmt_list(r.scenario.t_spectrum.values()));
    let _ = writeln!(s, "# r_eigs={}", fmt_list(r.scenario.r_spectrum.values()));
    let _ = writeln!(s, "# x_eigs={}", fmt_list(r.scenario.x_spectrum.values()));
    s
}

fn warn(res: &OutageResult, cfg: &SystemConfig) {
    if !res.converged {
        eprintln!(
            "warning: {} dB: quadrature did not reach tolerance (err {:e})",
            cfg.snr_db(),
            res.err_estimate
        );
    }
    if res.clamp_violation && res.method == Method::Exact {
        eprintln!(
            "warning: {} dB: raw value {:e} outside [0, 1] beyond its error",
            cfg.snr_db(),
            res.raw_value
        );
    }
    if res.below_floor {
        eprintln!(
            "warning: {} dB: probability below the numerical floor; prefer the asymptote",
            cfg.snr_db()
        );
    }
}

fn cmd_exact(args: &ExactArgs) -> Result<String> {
    let file = ConfigFile::load(&args.scenario.config)?;
    let r = args.scenario.resolve(&file)?;
    let snr = match (args.snr_db, &file.snr_db) {
        (Some(s), _) => s,
        (None, Some(serde_json::Value::Number(n))) => n.as_f64().unwrap_or(f64::NAN),
        _ => return Err(OutageError::InvalidConfig("missing --snr-db".into())),
    };
    let cfg = SystemConfig::new(r.n_t, r.n_r, r.rate, snr)?;
    let res = outage_exact(&r.scenario, &cfg)?;
    warn(&res, &cfg);
    let mut out = metadata("exact", &r);
    let _ = writeln!(out, "{CSV_HEADER}");
    let _ = writeln!(
        out,
        "{}",
        csv_row(
            r.scenario.model,
            &cfg,
            res.probability,
            res.err_estimate,
            Method::Exact
        )
    );
    Ok(out)
}

fn cmd_sweep(args: &SweepArgs) -> Result<String> {
    let file = ConfigFile::load(&args.scenario.config)?;
    let r = args.scenario.resolve(&file)?;
    let range = match (&args.snr_db, &file.snr_db) {
        (Some(s), _) => s.clone(),
        (None, Some(serde_json::Value::String(s))) => s.clone(),
        (None, Some(serde_json::Value::Number(n))) => n.to_string(),
        _ => return Err(OutageError::InvalidConfig("missing --snr-db".into())),
    };
    let snrs = parse_range(&range)?;
    let methods: Vec<Method> = match (&args.methods, &file.methods) {
        (Some(m), _) => m.clone(),
        (None, Some(m)) => m.iter().map(|s| s.parse()).collect::<Result<_>>()?,
        _ => vec![Method::Exact, Method::Asymptotic],
    };
    if methods.is_empty() {
        return Err(OutageError::InvalidConfig("no methods selected".into()));
    }
    let samples = args.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
    let seed = args.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let cfgs: Vec<SystemConfig> = snrs
        .iter()
        .map(|&s| SystemConfig::new(r.n_t, r.n_r, r.rate, s))
        .collect::<Result<_>>()?;

    let exact: Option<Vec<OutageResult>> = if methods.contains(&Method::Exact) {
        Some(
            cfgs.par_iter()
                .map(|c| outage_exact(&r.scenario, c))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    let asym: Option<Vec<OutageResult>> = if methods.contains(&Method::Asymptotic) {
        Some(
            cfgs.iter()
                .map(|c| asym_scenario(&r.scenario, c))
                .collect::<Result<_>>()?,
        )
    } else {
        None
    };
    let mc = if methods.contains(&Method::MonteCarlo) {
        Some(estimate_outage_sweep(&r.scenario, &cfgs, samples, seed)?)
    } else {
        None
    };

    let mut out = metadata("sweep", &r);
    if mc.is_some() {
        let _ = writeln!(out, "# samples={samples} seed={seed}");
    }
    let _ = writeln!(out, "{CSV_HEADER}");
    let model = r.scenario.model;
    for (i, cfg) in cfgs.iter().enumerate() {
        for m in &methods {
            let row = match m {
                Method::Exact => {
                    let e = &exact.as_ref().expect("computed")[i];
                    warn(e, cfg);
                    csv_row(model, cfg, e.probability, e.err_estimate, *m)
                }
                Method::Asymptotic => {
                    // The asymptote is reported unclamped; it may exceed 1 at low SNR.
                    let a = &asym.as_ref().expect("computed")[i];
                    csv_row(model, cfg, a.raw_value, a.err_estimate, *m)
                }
                Method::MonteCarlo => {
                    let e = &mc.as_ref().expect("computed")[i];
                    csv_row(model, cfg, e.p_hat, e.std_err, *m)
                }
            };
            let _ = writeln!(out, "{row}");
        }
    }
    Ok(out)
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let bad = || OutageError::InvalidConfig(format!("bad dims '{s}', expected NtxNr"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn cmd_gain(args: &GainArgs) -> Result<String> {
    let dims: Vec<(usize, usize)> = args
        .dims
        .iter()
        .map(|d| parse_dims(d))
        .collect::<Result<_>>()?;
    let rates = parse_range(&args.rate)?;
    let mut out = format!("# mimo-outage {} gain\n", env!("CARGO_PKG_VERSION"));
    out.push_str("rate");
    for (a, b) in &dims {
        let _ = write!(out, ",c_{a}x{b}");
    }
    out.push('\n');
    for &rate in &rates {
        let _ = write!(out, "{}", fmt_num(rate));
        for &(a, b) in &dims {
            let _ = write!(
                out,
                ",{}",
                fmt_num(coding_gain(&SystemConfig::new(a, b, rate, 0.0)?)?)
            );
        }
        out.push('\n');
    }
    Ok(out)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(String, bool)> {
    let only = args.only.clone().unwrap_or_default();
    if let Some(bad) = only.iter().find(|g| !GROUPS.contains(&g.as_str())) {
        return Err(OutageError::InvalidConfig(format!(
            "unknown check group '{bad}' (groups: {})",
            GROUPS.join(",")
        )));
    }
    let opts = VerifyOptions {
        only,
        inject_fault: std::env::var(FAULT_ENV).ok().filter(|s| !s.is_empty()),
        mc_samples: args.samples,
        seed: args.seed,
    };
    let records = run_suite(&opts)?;
    let mut out = String::new();
    for r in &records {
        if args.json {
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string(r).expect("records serialize")
            );
        } else {
            let _ = writeln!(
                out,
                "{} {}: {}",
                if r.passed { "PASS" } else { "FAIL" },
                r.name,
                r.detail
            );
        }
    }
    let passed = records.iter().filter(|r| r.passed).count();
    if !args.json {
        let _ = writeln!(out, "{passed}/{} checks passed", records.len());
    }
    Ok((out, passed == records.len()))
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Runs a parsed command, returning the process exit code: 0 on success, 1
/// when verification fails, 2 on invalid input.
pub fn run(cli: Cli) -> ExitCode {
    configure_threads();
    let result = match &cli.command {
        Command::Exact(a) => cmd_exact(a).map(|s| (s, true, None)),
        Command::Sweep(a) => cmd_sweep(a).map(|s| (s, true, a.output.clone())),
        Command::Gain(a) => cmd_gain(a).map(|s| (s, true, None)),
        Command::Verify(a) => cmd_verify(a).map(|(s, ok)| (s, ok, None)),
    };
    match result {
        Ok((text, ok, path)) => {
            if let Some(p) = path {
                if let Err(e) = fs::write(&p, &text) {
                    eprintln!("error: cannot write {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:30:10").unwrap(), vec![0.0, 10.0, 20.0, 30.0]);
        assert_eq!(parse_range("-5:5:5").unwrap(), vec![-5.0, 0.0, 5.0]);
        assert_eq!(parse_range("2").unwrap(), vec![2.0]);
        assert_eq!(parse_range("0.5:1.5:0.25").unwrap().len(), 5);
        assert!(parse_range("5:0:1").is_err());
        assert!(parse_range("0:5:0").is_err());
        assert!(parse_range("a:b:c").is_err());
        assert!(parse_range("0:1").is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-5.0), "-5");
        assert_eq!(fmt_num(8.5e-10), "8.5e-10");
        assert_eq!(fmt_num(2e7), "2e7");
    }

    #[test]
    fn dims() {
        assert_eq!(parse_dims("3x2").unwrap(), (3, 2));
        assert!(parse_dims("3by2").is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(ConfigFile::parse(r#"{"n_t": 2, "n_r": 2, "rate": 1}"#).is_ok());
        assert!(ConfigFile::parse(r#"{"n_t": 2, "nope": 1}"#).is_err());
        let c = ConfigFile::parse(r#"{"model": "semi-rx", "r_eigs": [1.5, 0.5]}"#).unwrap();
        assert_eq!(c.model.as_deref(), Some("semi-rx"));
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse(r#"{"n_t": 2, "n_r": 2, "rate": 1}"#).unwrap();
        let args = ScenarioArgs {
            config: None,
            model: None,
            nt: Some(3),
            nr: None,
            rate: None,
            t_eigs: None,
            r_eigs: None,
            x_eigs: None,
            renormalize: false,
        };
        let r = args.resolve(&file).unwrap();
        assert_eq!((r.n_t, r.n_r, r.rate), (3, 2, 1.0));
        assert_eq!(r.scenario.model, Model::Independent);
    }
}
