//! High-SNR outage asymptotes p ≈ P·S·(Cρ)^{−d} and their pieces: diversity
//! order d, coding gain C, correlation factor S and power-allocation
//! factor P.

use crate::error::{OutageError, Result};
use crate::exact::Side;
use crate::model::{
    validate_scenario, ChannelScenario, EigenSpectrum, Method, Model, OutageResult, SystemConfig,
};
use crate::residue::{g0_permutation_sum, g_n_full};

fn normalized(cfg: &SystemConfig) -> SystemConfig {
    if cfg.n_t() < cfg.n_r() {
        cfg.swapped()
    } else {
        *cfg
    }
}

fn asym_result(raw: f64) -> OutageResult {
    // Kernels are evaluated in double-double; the error is final rounding.
    OutageResult::from_raw(
        raw,
        4.0 * f64::EPSILON * raw.abs(),
        Method::Asymptotic,
        true,
    )
}

/// d = N_t·N_r.
pub fn diversity_order(cfg: &SystemConfig) -> u32 {
    (cfg.n_t() * cfg.n_r()) as u32
}

/// g_0(2^R) through the closed-form kernel of the full-correlated model.
pub fn g0(cfg: &SystemConfig) -> Result<f64> {
    let cfg = normalized(cfg);
    let zeros = vec![0; cfg.n_r()];
    Ok(g_n_full(&zeros, &cfg)?
        .evaluate_dd(cfg.threshold())
        .to_f64())
}

/// C(R) = g_0(2^R)^{−1/(N_t N_r)}.
pub fn coding_gain(cfg: &SystemConfig) -> Result<f64> {
    Ok(g0(cfg)?.powf(-1.0 / diversity_order(cfg) as f64))
}

/// S = det(R_r)^{−N_t}·det(R_t)^{−N_r}.
pub fn spatial_correlation_factor(
    t: &EigenSpectrum,
    r: &EigenSpectrum,
    cfg: &SystemConfig,
) -> Result<f64> {
    if t.len() != cfg.n_t() {
        return Err(OutageError::LengthMismatch(t.len(), cfg.n_t()));
    }
    if r.len() != cfg.n_r() {
        return Err(OutageError::LengthMismatch(r.len(), cfg.n_r()));
    }
    Ok(r.det().powi(-(cfg.n_t() as i32)) * t.det().powi(-(cfg.n_r() as i32)))
}

/// P(R_x) and its arithmetic–geometric mean lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFactor {
    /// det(R_x)^{−N_r}.
    pub value: f64,
    /// (tr(R_x)/N_t)^{−N_t N_r}; equals 1 when the power budget is used in full.
    pub am_gm_bound: f64,
}

/// P(R_x) = det(R_x)^{−N_r}, with det(R_x) ≤ (tr/N_t)^{N_t} giving the bound.
pub fn power_allocation_factor(x: &EigenSpectrum, cfg: &SystemConfig) -> Result<PowerFactor> {
    if x.len() != cfg.n_t() {
        return Err(OutageError::LengthMismatch(x.len(), cfg.n_t()));
    }
    let nr = cfg.n_r() as i32;
    let mean = x.trace() / cfg.n_t() as f64;
    Ok(PowerFactor {
        value: x.det().powi(-nr),
        am_gm_bound: mean.powi(-(cfg.n_t() as i32) * nr),
    })
}

/// ρ^{−N_tN_r}·Σ_σ sgn(σ)∏_i Γ(τ+i+σ_i)·g_σ(2^R) / ∏_i (N_r−i)!(N_t−i)!.
pub fn asym_independent(cfg: &SystemConfig) -> Result<OutageResult> {
    let cfg = normalized(cfg);
    let g = g0_permutation_sum(&cfg, cfg.threshold())?;
    Ok(asym_result(
        cfg.rho().powi(-(diversity_order(&cfg) as i32)) * g,
    ))
}

/// The independent asymptote scaled by det(R)^{−N}, where R is the
/// correlated side and N the antenna count of the other side. Identity
/// spectra are accepted.
pub fn asym_semi(cfg: &SystemConfig, spectrum: &EigenSpectrum, side: Side) -> Result<OutageResult> {
    let (own, other) = match side {
        Side::Rx => (cfg.n_r(), cfg.n_t()),
        Side::Tx => (cfg.n_t(), cfg.n_r()),
    };
    if spectrum.len() != own {
        return Err(OutageError::LengthMismatch(spectrum.len(), own));
    }
    let base = asym_independent(cfg)?;
    Ok(asym_result(
        spectrum.det().powi(-(other as i32)) * base.raw_value,
    ))
}

/// ρ^{−N_tN_r}·S·g_0(2^R) with g_0 from the full-correlated kernel.
/// Identity spectra are accepted.
pub fn asym_full(cfg: &SystemConfig, t: &EigenSpectrum, r: &EigenSpectrum) -> Result<OutageResult> {
    let s = spatial_correlation_factor(t, r, cfg)?;
    let g = g0(cfg)?;
    Ok(asym_result(
        cfg.rho().powi(-(diversity_order(cfg) as i32)) * s * g,
    ))
}

/// The factors of the unified asymptote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoteDecomposition {
    pub diversity_order: u32,
    pub coding_gain: f64,
    pub correlation_factor: f64,
    pub power_factor: f64,
    /// power_factor·correlation_factor·(coding_gain·ρ)^{−diversity_order}.
    pub probability: f64,
    /// S and P were not separable and correlation_factor carries both
    /// (power_factor is then 1).
    pub merged: bool,
}

impl AsymptoteDecomposition {
    fn assemble(
        cfg: &SystemConfig,
        correlation_factor: f64,
        power_factor: f64,
        merged: bool,
    ) -> Result<Self> {
        let d = diversity_order(cfg);
        let coding_gain = coding_gain(cfg)?;
        let probability =
            power_factor * correlation_factor * (coding_gain * cfg.rho()).powi(-(d as i32));
        Ok(Self {
            diversity_order: d,
            coding_gain,
            correlation_factor,
            power_factor,
            probability,
            merged,
        })
    }

    pub fn as_result(&self) -> OutageResult {
        asym_result(self.probability)
    }
}

/// Decomposition for a scenario whose power allocation is diagonal in the
/// transmit eigenbasis (the spectra interface): det(R_t^{1/2}R_xR_t^{1/2})
/// = det(R_t)·det(R_x), so S and P separate.
pub fn unified_asymptote(
    scenario: &ChannelScenario,
    cfg: &SystemConfig,
) -> Result<AsymptoteDecomposition> {
    let v = validate_scenario(scenario, cfg)?;
    let s = spatial_correlation_factor(&v.t_spectrum, &v.r_spectrum, cfg)?;
    let p = power_allocation_factor(&v.x_spectrum, cfg)?.value;
    AsymptoteDecomposition::assemble(cfg, s, p, false)
}

/// Decomposition from an effective transmit spectrum (eigenvalues of
/// R_t^{1/2}R_xR_t^{1/2} for general, possibly non-commuting, matrices).
/// S and P are reported merged.
pub fn unified_asymptote_effective(
    t_effective: &EigenSpectrum,
    r: &EigenSpectrum,
    cfg: &SystemConfig,
) -> Result<AsymptoteDecomposition> {
    let s = spatial_correlation_factor(t_effective, r, cfg)?;
    AsymptoteDecomposition::assemble(cfg, s, 1.0, true)
}

/// Asymptote for a validated scenario, routed by its model tag.
pub fn asym_scenario(scenario: &ChannelScenario, cfg: &SystemConfig) -> Result<OutageResult> {
    let v = validate_scenario(scenario, cfg)?;
    if !v.x_spectrum.is_identity() {
        return Ok(unified_asymptote(&v, cfg)?.as_result());
    }
    match v.model {
        Model::Independent => asym_independent(cfg),
        Model::SemiRx => asym_semi(cfg, &v.r_spectrum, Side::Rx),
        Model::SemiTx => asym_semi(cfg, &v.t_spectrum, Side::Tx),
        Model::Full => asym_full(cfg, &v.t_spectrum, &v.r_spectrum),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(nt: usize, nr: usize, rate: f64, snr_db: f64) -> SystemConfig {
        SystemConfig::new(nt, nr, rate, snr_db).unwrap()
    }

    fn sp(v: &[f64]) -> EigenSpectrum {
        EigenSpectrum::new(v).unwrap()
    }

    #[test]
    fn siso_and_miso_asymptotes() {
        let c = cfg(1, 1, 1.0, 20.0);
        assert!((asym_independent(&c).unwrap().raw_value - 0.01).abs() < 1e-16);
        let c = cfg(2, 1, 1.0, 20.0);
        assert!((asym_independent(&c).unwrap().raw_value - 5e-5).abs() < 1e-19);
        let c = cfg(1, 2, 1.0, 20.0);
        assert!((asym_independent(&c).unwrap().raw_value - 5e-5).abs() < 1e-19);
    }

    #[test]
    fn semi_factorises() {
        let c = cfg(3, 3, 2.0, 10.0);
        let r = sp(&[2.7, 0.2, 0.1]);
        let ind = asym_independent(&c).unwrap().raw_value;
        let semi = asym_semi(&c, &r, Side::Rx).unwrap().raw_value;
        let want = ind * (2.7f64 * 0.2 * 0.1).powi(-3);
        assert!((semi / want - 1.0).abs() < 1e-14);
        let id = asym_semi(&c, &EigenSpectrum::identity(3), Side::Rx)
            .unwrap()
            .raw_value;
        assert_eq!(id, ind);
    }

    #[test]
    fn factors() {
        let c = cfg(1, 1, 1.0, 0.0);
        assert!((coding_gain(&c).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(diversity_order(&cfg(3, 2, 1.0, 0.0)), 6);
        let c = cfg(3, 3, 2.0, 0.0);
        let s = spatial_correlation_factor(&sp(&[2.3, 0.5, 0.2]), &EigenSpectrum::identity(3), &c)
            .unwrap();
        assert!((s - 0.23f64.powi(-3)).abs() < 1e-10);
        assert!((s - 82.189).abs() < 1e-3);
        let x = EigenSpectrum::power_allocation(&[2.9, 0.07, 0.03]).unwrap();
        let p = power_allocation_factor(&x, &c).unwrap();
        assert!((p.value - 0.00609f64.powi(-3)).abs() < 1e-6 * p.value);
        assert!((p.am_gm_bound - 1.0).abs() < 1e-12);
        let one = power_allocation_factor(&EigenSpectrum::identity(3), &c).unwrap();
        assert_eq!(one.value, 1.0);
    }

    #[test]
    fn coding_gain_trends() {
        let gains: Vec<f64> = [0.5, 1.0, 2.0, 4.0]
            .iter()
            .map(|&r| coding_gain(&cfg(2, 2, r, 0.0)).unwrap())
            .collect();
        assert!(gains.windows(2).all(|w| w[1] < w[0]), "{gains:?}");
        let by_dims: Vec<f64> = [(1, 1), (2, 2), (3, 3)]
            .iter()
            .map(|&(a, b)| coding_gain(&cfg(a, b, 2.0, 0.0)).unwrap())
            .collect();
        assert!(by_dims.windows(2).all(|w| w[1] > w[0]), "{by_dims:?}");
    }

    #[test]
    fn full_with_identity_spectra_matches_independent() {
        for (nt, nr) in [(1, 1), (2, 2), (3, 2), (2, 3)] {
            let c = cfg(nt, nr, 2.0, 20.0);
            let a = asym_full(
                &c,
                &EigenSpectrum::identity(nt),
                &EigenSpectrum::identity(nr),
            )
            .unwrap()
            .raw_value;
            let b = asym_independent(&c).unwrap().raw_value;
            assert!((a / b - 1.0).abs() < 1e-12, "({nt},{nr}) {a} {b}");
        }
    }

    #[test]
    fn assembly_identity() {
        let t = sp(&[1.3, 1.0, 0.7]);
        let r = sp(&[1.5, 1.0, 0.5]);
        let x = EigenSpectrum::power_allocation(&[2.6, 0.2, 0.2]).unwrap();
        let c = cfg(3, 3, 3.0, 20.0);
        let sc = ChannelScenario::full(t.clone(), r.clone()).with_power_allocation(x);
        let d = unified_asymptote(&sc, &c).unwrap();
        let again = d.power_factor
            * d.correlation_factor
            * (d.coding_gain * c.rho()).powi(-(d.diversity_order as i32));
        assert_eq!(d.probability.to_bits(), again.to_bits());
        assert_eq!(d.diversity_order, 9);
        let plain = unified_asymptote(&ChannelScenario::full(t.clone(), r.clone()), &c).unwrap();
        assert_eq!(plain.power_factor, 1.0);
        let direct = asym_full(&c, &t, &r).unwrap().raw_value;
        assert!((plain.probability / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_decomposition_is_trivial() {
        let c = cfg(3, 2, 2.0, 30.0);
        let d = unified_asymptote(&ChannelScenario::independent(3, 2), &c).unwrap();
        assert_eq!(
            (d.diversity_order, d.correlation_factor, d.power_factor),
            (6, 1.0, 1.0)
        );
        assert!(!d.merged);
    }
}
