//! Domain types shared by every evaluator: system configuration, eigenvalue
//! spectra, channel scenarios and outage results.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{OutageError, Result};

const TRACE_RTOL: f64 = 1e-9;
const GAP_RTOL: f64 = 1e-9;

/// Antenna counts, target rate and transmit SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    n_t: usize,
    n_r: usize,
    rate: f64,
    snr_db: f64,
    rho: f64,
}

impl SystemConfig {
    /// Builds a configuration from an SNR in dB.
    pub fn new(n_t: usize, n_r: usize, rate: f64, snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(OutageError::InvalidConfig(format!(
                "snr_db must be finite, got {snr_db}"
            )));
        }
        Self::build(n_t, n_r, rate, snr_db, 10f64.powf(snr_db / 10.0))
    }

    /// Builds a configuration from a linear SNR.
    pub fn from_linear(n_t: usize, n_r: usize, rate: f64, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(OutageError::InvalidConfig(format!(
                "rho must be positive, got {rho}"
            )));
        }
        Self::build(n_t, n_r, rate, 10.0 * rho.log10(), rho)
    }

    fn build(n_t: usize, n_r: usize, rate: f64, snr_db: f64, rho: f64) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(OutageError::InvalidConfig(
                "antenna counts must be at least 1".into(),
            ));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(OutageError::InvalidConfig(format!(
                "rate must be positive, got {rate}"
            )));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(OutageError::InvalidConfig(format!(
                "snr {snr_db} dB is out of range"
            )));
        }
        Ok(Self {
            n_t,
            n_r,
            rate,
            snr_db,
            rho,
        })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Target rate R in bits/s/Hz.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    /// Linear transmit SNR ρ.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// τ = |N_t − N_r| − 1.
    pub fn tau(&self) -> i64 {
        (self.n_t as i64 - self.n_r as i64).abs() - 1
    }

    /// min(N_t, N_r).
    pub fn n_min(&self) -> usize {
        self.n_t.min(self.n_r)
    }

    pub fn n_max(&self) -> usize {
        self.n_t.max(self.n_r)
    }

    /// The outage threshold 2^R on G.
    pub fn threshold(&self) -> f64 {
        self.rate.exp2()
    }

    pub fn with_snr_db(&self, snr_db: f64) -> Result<Self> {
        Self::new(self.n_t, self.n_r, self.rate, snr_db)
    }

    pub fn with_rate(&self, rate: f64) -> Result<Self> {
        Self::build(self.n_t, self.n_r, rate, self.snr_db, self.rho)
    }

    /// Same configuration with the antenna counts exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n_t: self.n_r,
            n_r: self.n_t,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SpectrumKind {
    Identity,
    Correlation,
    Effective,
    Allocation,
}

/// Eigenvalues of a correlation or input-covariance matrix.
///
/// Correlation spectra are sorted descending, trace-normalized and strictly
/// distinct. Identity is an explicit flag. Effective spectra (products with a
/// power allocation) skip the trace check, and allocation spectra keep the
/// caller's order and may repeat values.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
    kind: SpectrumKind,
}

fn check_positive(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(OutageError::DimensionMismatch("empty spectrum".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(OutageError::NonDistinctSpectrum { min_gap: *v });
    }
    Ok(())
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

impl EigenSpectrum {
    pub fn identity(n: usize) -> Self {
        Self {
            values: vec![1.0; n],
            kind: SpectrumKind::Identity,
        }
    }

    /// A trace-normalized correlation spectrum. Values are sorted descending;
    /// all-ones input becomes the identity spectrum.
    pub fn new(values: &[f64]) -> Result<Self> {
        check_positive(values)?;
        if values.iter().all(|v| *v == 1.0) {
            return Ok(Self::identity(values.len()));
        }
        let n = values.len() as f64;
        let trace: f64 = values.iter().sum();
        if ((trace - n) / n).abs() > TRACE_RTOL {
            return Err(OutageError::TraceViolation { trace, expected: n });
        }
        let spec = Self {
            values: sorted_desc(values),
            kind: SpectrumKind::Correlation,
        };
        spec.check_distinct()?;
        Ok(spec)
    }

    /// Rescales to trace n before validating.
    pub fn renormalized(values: &[f64]) -> Result<Self> {
        check_positive(values)?;
        let n = values.len() as f64;
        let trace: f64 = values.iter().sum();
        let scaled: Vec<f64> = values.iter().map(|v| v * n / trace).collect();
        Self::new(&scaled)
    }

    /// An effective spectrum with no trace constraint, e.g. the eigenvalues
    /// of R_t^{1/2} R_x R_t^{1/2}. Distinctness is checked by the evaluators
    /// that need it.
    pub fn effective(values: &[f64]) -> Result<Self> {
        check_positive(values)?;
        if values.iter().all(|v| *v == 1.0) {
            return Ok(Self::identity(values.len()));
        }
        Ok(Self {
            values: sorted_desc(values),
            kind: SpectrumKind::Effective,
        })
    }

    /// Input covariance eigenvalues (power per transmit antenna), in antenna
    /// order. Repeated values are allowed; the total must not exceed n.
    pub fn power_allocation(values: &[f64]) -> Result<Self> {
        check_positive(values)?;
        if values.iter().all(|v| *v == 1.0) {
            return Ok(Self::identity(values.len()));
        }
        let n = values.len() as f64;
        let trace: f64 = values.iter().sum();
        if trace > n * (1.0 + TRACE_RTOL) {
            return Err(OutageError::TraceViolation { trace, expected: n });
        }
        Ok(Self {
            values: values.to_vec(),
            kind: SpectrumKind::Allocation,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.kind == SpectrumKind::Identity
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    /// det(R) = ∏ values.
    pub fn det(&self) -> f64 {
        self.values.iter().product()
    }

    /// Reciprocal eigenvalues, i.e. the spectrum of R^{-1}.
    pub fn reciprocals(&self) -> Vec<f64> {
        self.values.iter().map(|v| 1.0 / v).collect()
    }

    /// Fails unless consecutive sorted values differ by more than 1e-9·n.
    pub fn check_distinct(&self) -> Result<()> {
        let sorted = sorted_desc(&self.values);
        let floor = GAP_RTOL * self.values.len() as f64;
        let min_gap = sorted
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min);
        if min_gap <= floor {
            return Err(OutageError::NonDistinctSpectrum { min_gap });
        }
        Ok(())
    }
}

/// Correlation model tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Independent,
    SemiRx,
    SemiTx,
    Full,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Independent => "ind",
            Model::SemiRx => "semi-rx",
            Model::SemiTx => "semi-tx",
            Model::Full => "full",
        }
    }

    pub(crate) fn from_identity_flags(t_identity: bool, r_identity: bool) -> Self {
        match (t_identity, r_identity) {
            (true, true) => Model::Independent,
            (true, false) => Model::SemiRx,
            (false, true) => Model::SemiTx,
            (false, false) => Model::Full,
        }
    }

    fn allows(&self, actual: Model) -> bool {
        match self {
            Model::Full => true,
            Model::SemiRx => matches!(actual, Model::SemiRx | Model::Independent),
            Model::SemiTx => matches!(actual, Model::SemiTx | Model::Independent),
            Model::Independent => actual == Model::Independent,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = OutageError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ind" | "independent" => Ok(Model::Independent),
            "semi" | "semi-rx" | "semirx" => Ok(Model::SemiRx),
            "semi-tx" | "semitx" => Ok(Model::SemiTx),
            "full" => Ok(Model::Full),
            other => Err(OutageError::InvalidConfig(format!(
                "unknown model '{other}'"
            ))),
        }
    }
}

/// Correlation model with its transmit, receive and input-covariance spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScenario {
    pub model: Model,
    pub t_spectrum: EigenSpectrum,
    pub r_spectrum: EigenSpectrum,
    pub x_spectrum: EigenSpectrum,
}

impl ChannelScenario {
    pub fn independent(n_t: usize, n_r: usize) -> Self {
        Self {
            model: Model::Independent,
            t_spectrum: EigenSpectrum::identity(n_t),
            r_spectrum: EigenSpectrum::identity(n_r),
            x_spectrum: EigenSpectrum::identity(n_t),
        }
    }

    pub fn semi_rx(n_t: usize, r: EigenSpectrum) -> Self {
        Self {
            model: Model::SemiRx,
            t_spectrum: EigenSpectrum::identity(n_t),
            r_spectrum: r,
            x_spectrum: EigenSpectrum::identity(n_t),
        }
    }

    pub fn semi_tx(t: EigenSpectrum, n_r: usize) -> Self {
        let n_t = t.len();
        Self {
            model: Model::SemiTx,
            t_spectrum: t,
            r_spectrum: EigenSpectrum::identity(n_r),
            x_spectrum: EigenSpectrum::identity(n_t),
        }
    }

    pub fn full(t: EigenSpectrum, r: EigenSpectrum) -> Self {
        let n_t = t.len();
        Self {
            model: Model::Full,
            t_spectrum: t,
            r_spectrum: r,
            x_spectrum: EigenSpectrum::identity(n_t),
        }
    }

    pub fn with_power_allocation(mut self, x: EigenSpectrum) -> Self {
        self.x_spectrum = x;
        self
    }

    pub fn n_t(&self) -> usize {
        self.t_spectrum.len()
    }

    pub fn n_r(&self) -> usize {
        self.r_spectrum.len()
    }

    /// Model implied by which spectra are identity.
    pub fn implied_model(&self) -> Model {
        Model::from_identity_flags(self.t_spectrum.is_identity(), self.r_spectrum.is_identity())
    }

    /// Replaces the transmit spectrum by the elementwise product with the
    /// power allocation (diagonal-aligned, i.e. commuting R_t and R_x) and
    /// resets the allocation to identity.
    pub fn fold_power_allocation(&self) -> Self {
        if self.x_spectrum.is_identity() {
            return self.clone();
        }
        let t = self.t_spectrum.values();
        let x = self.x_spectrum.values();
        let prod: Vec<f64> = t.iter().zip(x).map(|(a, b)| a * b).collect();
        let t_eff =
            EigenSpectrum::effective(&prod).expect("product of positive spectra is positive");
        let mut out = Self {
            model: self.model,
            t_spectrum: t_eff,
            r_spectrum: self.r_spectrum.clone(),
            x_spectrum: EigenSpectrum::identity(t.len()),
        };
        out.model = out.implied_model();
        out
    }

    fn swapped(&self) -> Self {
        let model = match self.model {
            Model::SemiRx => Model::SemiTx,
            Model::SemiTx => Model::SemiRx,
            m => m,
        };
        Self {
            model,
            t_spectrum: self.r_spectrum.clone(),
            r_spectrum: self.t_spectrum.clone(),
            x_spectrum: EigenSpectrum::identity(self.r_spectrum.len()),
        }
    }
}

/// Checks dimensions and spectra against `cfg` and downgrades the model tag
/// to match the identity flags (e.g. Full with two identity spectra becomes
/// Independent). A tag that claims fewer correlated sides than the spectra
/// carry is an error.
pub fn validate_scenario(
    scenario: &ChannelScenario,
    cfg: &SystemConfig,
) -> Result<ChannelScenario> {
    if scenario.t_spectrum.len() != cfg.n_t() {
        return Err(OutageError::DimensionMismatch(format!(
            "t spectrum has {} values, n_t = {}",
            scenario.t_spectrum.len(),
            cfg.n_t()
        )));
    }
    if scenario.r_spectrum.len() != cfg.n_r() {
        return Err(OutageError::DimensionMismatch(format!(
            "r spectrum has {} values, n_r = {}",
            scenario.r_spectrum.len(),
            cfg.n_r()
        )));
    }
    if scenario.x_spectrum.len() != cfg.n_t() {
        return Err(OutageError::DimensionMismatch(format!(
            "x spectrum has {} values, n_t = {}",
            scenario.x_spectrum.len(),
            cfg.n_t()
        )));
    }
    let x_trace = scenario.x_spectrum.trace();
    if x_trace > cfg.n_t() as f64 * (1.0 + TRACE_RTOL) {
        return Err(OutageError::TraceViolation {
            trace: x_trace,
            expected: cfg.n_t() as f64,
        });
    }
    let actual = scenario.implied_model();
    if !scenario.model.allows(actual) {
        return Err(OutageError::WrongModel(format!(
            "tag {} but spectra imply {}",
            scenario.model, actual
        )));
    }
    let mut out = scenario.clone();
    out.model = actual;
    Ok(out)
}

/// Folds any power allocation into the transmit spectrum, then swaps the
/// transmit and receive sides when the evaluator needs it: Independent and
/// Full are brought to n_t ≥ n_r, and SemiTx always becomes SemiRx. The
/// outage probability is unchanged because HH^H and H^H H share their
/// nonzero eigenvalues.
pub fn interchange_normalize(
    scenario: &ChannelScenario,
    cfg: &SystemConfig,
) -> (ChannelScenario, SystemConfig) {
    let folded = scenario.fold_power_allocation();
    let swap = match folded.model {
        Model::Independent | Model::Full => cfg.n_t() < cfg.n_r(),
        Model::SemiTx => true,
        Model::SemiRx => false,
    };
    if swap {
        (folded.swapped(), cfg.swapped())
    } else {
        (folded, *cfg)
    }
}

/// How an outage value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Exact,
    Asymptotic,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Asymptotic => "asym",
            Method::MonteCarlo => "mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = OutageError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "asym" | "asymptotic" => Ok(Method::Asymptotic),
            "mc" | "monte-carlo" => Ok(Method::MonteCarlo),
            other => Err(OutageError::InvalidConfig(format!(
                "unknown method '{other}'"
            ))),
        }
    }
}

/// Probabilities below this are flagged as under the numerical floor of the
/// exact evaluators.
pub const NUMERICAL_FLOOR: f64 = 1e-13;

/// An outage probability with its provenance and error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageResult {
    pub probability: f64,
    pub method: Method,
    pub err_estimate: f64,
    pub raw_value: f64,
    /// False when a quadrature hit its refinement cap.
    pub converged: bool,
    /// Raw value left [0, 1] by more than the error estimate.
    pub clamp_violation: bool,
    pub below_floor: bool,
}

impl OutageResult {
    pub fn from_raw(raw_value: f64, err_estimate: f64, method: Method, converged: bool) -> Self {
        let err_estimate = err_estimate.abs();
        let probability = raw_value.clamp(0.0, 1.0);
        let clamp_violation = (raw_value - probability).abs() > err_estimate;
        let below_floor = method == Method::Exact && probability < NUMERICAL_FLOOR;
        Self {
            probability,
            method,
            err_estimate,
            raw_value,
            converged,
            clamp_violation,
            below_floor,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(nt: usize, nr: usize) -> SystemConfig {
        SystemConfig::new(nt, nr, 2.0, 10.0).unwrap()
    }

    #[test]
    fn derived_quantities() {
        let c = cfg(3, 3);
        assert_eq!(c.tau(), -1);
        assert_eq!(c.n_min(), 3);
        let c = cfg(2, 5);
        assert_eq!(c.tau(), 2);
        assert_eq!(c.n_min(), 2);
        assert!((c.rho() - 10.0).abs() < 1e-12);
        let c = SystemConfig::from_linear(1, 1, 1.0, 1.0).unwrap();
        assert_eq!(c.snr_db(), 0.0);
        assert_eq!(c.rho(), 1.0);
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(SystemConfig::new(0, 1, 1.0, 0.0).is_err());
        assert!(SystemConfig::new(1, 1, 0.0, 0.0).is_err());
        assert!(SystemConfig::new(1, 1, -1.0, 0.0).is_err());
        assert!(SystemConfig::new(1, 1, 1.0, f64::NAN).is_err());
        assert!(SystemConfig::from_linear(1, 1, 1.0, 0.0).is_err());
    }

    #[test]
    fn spectrum_rules() {
        let s = EigenSpectrum::new(&[0.1, 2.7, 0.2]).unwrap();
        assert_eq!(s.values(), &[2.7, 0.2, 0.1]);
        assert!(!s.is_identity());
        assert!(EigenSpectrum::new(&[1.0, 1.0, 1.0]).unwrap().is_identity());
        assert!(matches!(
            EigenSpectrum::new(&[1.5, 1.5, 0.0]),
            Err(OutageError::NonDistinctSpectrum { .. })
        ));
        assert!(matches!(
            EigenSpectrum::new(&[2.0, 0.5, 0.4]),
            Err(OutageError::TraceViolation { .. })
        ));
        assert!(matches!(
            EigenSpectrum::new(&[1.5, 0.75, 0.75]),
            Err(OutageError::NonDistinctSpectrum { .. })
        ));
        let r = EigenSpectrum::renormalized(&[3.0, 2.0, 1.0]).unwrap();
        assert!((r.trace() - 3.0).abs() < 1e-12);
        assert!((r.values()[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn power_allocation_keeps_order_and_repeats() {
        let x = EigenSpectrum::power_allocation(&[2.6, 0.2, 0.2]).unwrap();
        assert_eq!(x.values(), &[2.6, 0.2, 0.2]);
        assert!(EigenSpectrum::power_allocation(&[0.5, 0.5, 0.5]).is_ok());
        assert!(EigenSpectrum::power_allocation(&[2.0, 2.0, 0.5]).is_err());
    }

    #[test]
    fn validate_downgrades_identity_spectra() {
        let c = cfg(3, 3);
        let sc = ChannelScenario::full(
            EigenSpectrum::identity(3),
            EigenSpectrum::new(&[1.0, 1.0, 1.0]).unwrap(),
        );
        assert_eq!(
            validate_scenario(&sc, &c).unwrap().model,
            Model::Independent
        );
        let r = EigenSpectrum::new(&[2.7, 0.2, 0.1]).unwrap();
        let sc = ChannelScenario::semi_rx(3, r.clone());
        assert_eq!(validate_scenario(&sc, &c).unwrap().model, Model::SemiRx);
        let mut bad = ChannelScenario::semi_rx(3, r);
        bad.model = Model::Independent;
        assert!(validate_scenario(&bad, &c).is_err());
        assert!(matches!(
            validate_scenario(&ChannelScenario::independent(3, 2), &c),
            Err(OutageError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn validate_is_idempotent() {
        let c = cfg(3, 2);
        let sc = ChannelScenario::full(
            EigenSpectrum::new(&[1.3, 1.0, 0.7]).unwrap(),
            EigenSpectrum::identity(2),
        );
        let once = validate_scenario(&sc, &c).unwrap();
        let twice = validate_scenario(&once, &c).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.model, Model::SemiTx);
    }

    #[test]
    fn interchange_rules() {
        let c = cfg(2, 3);
        let (sc, c2) = interchange_normalize(&ChannelScenario::independent(2, 3), &c);
        assert_eq!((c2.n_t(), c2.n_r()), (3, 2));
        assert_eq!(sc.model, Model::Independent);

        let c = cfg(3, 3);
        let full = ChannelScenario::full(
            EigenSpectrum::new(&[2.3, 0.5, 0.2]).unwrap(),
            EigenSpectrum::new(&[2.7, 0.2, 0.1]).unwrap(),
        );
        let (sc, c2) = interchange_normalize(&full, &c);
        assert_eq!(sc, full);
        assert_eq!(c2, c);

        let c = cfg(3, 2);
        let tx = ChannelScenario::semi_tx(EigenSpectrum::new(&[1.5, 1.0, 0.5]).unwrap(), 2);
        let (sc, c2) = interchange_normalize(&tx, &c);
        assert_eq!(sc.model, Model::SemiRx);
        assert_eq!((c2.n_t(), c2.n_r()), (2, 3));
        assert_eq!(sc.r_spectrum.values(), &[1.5, 1.0, 0.5]);
    }

    #[test]
    fn folding_power_allocation() {
        let sc = ChannelScenario::full(
            EigenSpectrum::new(&[1.3, 1.0, 0.7]).unwrap(),
            EigenSpectrum::new(&[1.5, 1.0, 0.5]).unwrap(),
        )
        .with_power_allocation(EigenSpectrum::power_allocation(&[2.6, 0.2, 0.2]).unwrap());
        let f = sc.fold_power_allocation();
        let v = f.t_spectrum.values();
        assert!(
            (v[0] - 3.38).abs() < 1e-12
                && (v[1] - 0.2).abs() < 1e-12
                && (v[2] - 0.14).abs() < 1e-12
        );
        assert!(f.x_spectrum.is_identity());
        let ind = ChannelScenario::independent(3, 3)
            .with_power_allocation(EigenSpectrum::power_allocation(&[2.0, 0.5, 0.5]).unwrap());
        assert_eq!(ind.fold_power_allocation().model, Model::SemiTx);
    }

    #[test]
    fn outage_result_clamping() {
        let r = OutageResult::from_raw(-1e-15, 1e-14, Method::Exact, true);
        assert_eq!(r.probability, 0.0);
        assert!(!r.clamp_violation);
        assert!(r.below_floor);
        let r = OutageResult::from_raw(-1e-3, 1e-14, Method::Exact, true);
        assert!(r.clamp_violation);
        let r = OutageResult::from_raw(0.25, 0.0, Method::MonteCarlo, true);
        assert_eq!(r.probability, 0.25);
        assert!(!r.below_floor);
    }

    #[test]
    fn model_parsing() {
        for m in [
            Model::Independent,
            Model::SemiRx,
            Model::SemiTx,
            Model::Full,
        ] {
            assert_eq!(m.as_str().parse::<Model>().unwrap(), m);
        }
        assert!("bogus".parse::<Model>().is_err());
    }
}
