//! Exact outage probabilities: Mellin transforms φ(s) = E[G^{s−1}] of
//! G = det(I + ρHH^H) for each correlation model, inverted numerically.

use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;

use crate::dd::{Accumulator, KahanSum};
use crate::error::{OutageError, Result};
use crate::mellin::{
    choose_contour, inverse_mellin_cdf, ContourPurpose, MellinContour, MellinOptions,
};
use crate::model::{
    interchange_normalize, validate_scenario, ChannelScenario, EigenSpectrum, Method, Model,
    OutageResult, SystemConfig,
};
use crate::permutations::PermutationTable;
use crate::special::{factorial, tricomi_psi};

/// Which side carries the correlation in the semi-correlated model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Rx,
    Tx,
}

/// Knobs for the exact evaluators.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactOptions {
    pub mellin: MellinOptions,
    /// Overrides the default contour.
    pub contour: Option<MellinContour>,
    pub accumulator: Accumulator,
}

/// Δ(v) = ∏_{i<j} (v_j − v_i).
pub fn vandermonde(v: &[f64]) -> f64 {
    let mut d = 1.0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            d *= v[j] - v[i];
        }
    }
    d
}

/// Σ_σ sgn(σ) ∏_i m[i][σ_i] with terms summed in decreasing magnitude.
fn permutation_sum(m: &[Vec<Complex64>], table: &PermutationTable, acc: Accumulator) -> Complex64 {
    let mut terms: Vec<Complex64> = table
        .iter()
        .map(|(sigma, sign)| {
            let mut p = Complex64::new(sign as f64, 0.0);
            for (i, &j) in sigma.iter().enumerate() {
                p *= m[i][j];
            }
            p
        })
        .collect();
    match acc {
        Accumulator::Compensated => {
            terms.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
            let re: KahanSum = terms.iter().map(|t| t.re).collect();
            let im: KahanSum = terms.iter().map(|t| t.im).collect();
            Complex64::new(re.total(), im.total())
        }
        Accumulator::DoubleDouble => {
            let mut re: Vec<f64> = terms.iter().map(|t| t.re).collect();
            let mut im: Vec<f64> = terms.iter().map(|t| t.im).collect();
            Complex64::new(
                crate::dd::signed_sum(&mut re, Accumulator::DoubleDouble),
                crate::dd::signed_sum(&mut im, Accumulator::DoubleDouble),
            )
        }
    }
}

/// The Mellin transform φ(s) = E[G^{s−1}] of one normalized scenario.
#[derive(Debug, Clone)]
pub enum MomentFunction {
    /// N_t ≥ N_r, both sides uncorrelated.
    Independent {
        cfg: SystemConfig,
        table: PermutationTable,
        prefactor: f64,
    },
    /// Receive-side correlation, N_t ≥ N_r.
    SemiGe {
        cfg: SystemConfig,
        r: Vec<f64>,
        table: PermutationTable,
        prefactor: f64,
    },
    /// Receive-side correlation, N_t < N_r.
    SemiLt {
        cfg: SystemConfig,
        r: Vec<f64>,
        table: PermutationTable,
        prefactor: f64,
    },
    /// Both sides correlated, N_t ≥ N_r.
    Full {
        cfg: SystemConfig,
        a: Vec<f64>,
        b: Vec<f64>,
        table: PermutationTable,
        prefactor: f64,
    },
}

impl MomentFunction {
    pub fn independent(cfg: &SystemConfig) -> Result<Self> {
        if cfg.n_t() < cfg.n_r() {
            return Err(OutageError::InvalidConfig(
                "independent moments need n_t >= n_r".into(),
            ));
        }
        let (nt, nr) = (cfg.n_t(), cfg.n_r());
        let norm: f64 = (1..=nr)
            .map(|i| factorial(nr - i) * factorial(nt - i))
            .product();
        let prefactor = cfg.rho().powi(-((nt * nr) as i32)) / norm;
        Ok(Self::Independent {
            cfg: *cfg,
            table: PermutationTable::new(nr)?,
            prefactor,
        })
    }

    /// Receive-side correlation with eigenvalues `r` (length N_r).
    pub fn semi(cfg: &SystemConfig, r: &EigenSpectrum) -> Result<Self> {
        if r.is_identity() {
            return Err(OutageError::WrongModel(
                "semi-correlated evaluator given an identity spectrum".into(),
            ));
        }
        if r.len() != cfg.n_r() {
            return Err(OutageError::DimensionMismatch(format!(
                "r has {} values, n_r = {}",
                r.len(),
                cfg.n_r()
            )));
        }
        r.check_distinct()?;
        let (nt, nr) = (cfg.n_t() as i32, cfg.n_r() as i32);
        let rv = r.values().to_vec();
        let rho = cfg.rho();
        if nt >= nr {
            let sign = if (nr * (nr - 1) / 2) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let rho_pow = rho.powi(-(nr * (nr + 1) / 2) - (nt - nr) * nr);
            let det_r: f64 = rv.iter().product();
            let inv: Vec<f64> = rv.iter().map(|x| 1.0 / x).collect();
            let fact: f64 = (1..=nr).map(|j| factorial((nt - j) as usize)).product();
            let gammas: f64 = (1..=nr)
                .map(|i| factorial((nt - nr + i - 1) as usize))
                .product();
            let prefactor = sign * rho_pow * gammas / (det_r.powi(nt) * vandermonde(&inv) * fact);
            Ok(Self::SemiGe {
                cfg: *cfg,
                r: rv,
                table: PermutationTable::new(nr as usize)?,
                prefactor,
            })
        } else {
            let sign = if (nt * (nr - nt)) % 2 == 0 { 1.0 } else { -1.0 };
            let prefactor = sign * rho.powi(-(nt * (nt + 1) / 2)) / vandermonde(&rv);
            Ok(Self::SemiLt {
                cfg: *cfg,
                r: rv,
                table: PermutationTable::new(nr as usize)?,
                prefactor,
            })
        }
    }

    /// Both sides correlated; N_t ≥ N_r.
    pub fn full(cfg: &SystemConfig, t: &EigenSpectrum, r: &EigenSpectrum) -> Result<Self> {
        if t.is_identity() || r.is_identity() {
            return Err(OutageError::WrongModel(
                "full-correlated evaluator given an identity spectrum".into(),
            ));
        }
        if cfg.n_t() < cfg.n_r() {
            return Err(OutageError::InvalidConfig(
                "full moments need n_t >= n_r; normalize first".into(),
            ));
        }
        if t.len() != cfg.n_t() || r.len() != cfg.n_r() {
            return Err(OutageError::DimensionMismatch(
                "spectrum lengths do not match antenna counts".into(),
            ));
        }
        t.check_distinct()?;
        r.check_distinct()?;
        let (nt, nr) = (cfg.n_t() as i32, cfg.n_r() as i32);
        let a = r.reciprocals();
        let b = t.reciprocals();
        let sign = if (nr * (nt - nr)) % 2 == 0 { 1.0 } else { -1.0 };
        let pa: f64 = a.iter().map(|x| x.powi(nr)).product();
        let pb: f64 = b.iter().map(|x| x.powi(nr)).product();
        let prefactor = sign * cfg.rho().powi(-(nr * (nr + 1) / 2)) * pa * pb
            / (vandermonde(&a) * vandermonde(&b));
        Ok(Self::Full {
            cfg: *cfg,
            a,
            b,
            table: PermutationTable::new(nt as usize)?,
            prefactor,
        })
    }

    /// Builds the moment function for a validated, interchange-normalized
    /// scenario.
    pub fn for_scenario(scenario: &ChannelScenario, cfg: &SystemConfig) -> Result<Self> {
        match scenario.model {
            Model::Independent => Self::independent(cfg),
            Model::SemiRx => Self::semi(cfg, &scenario.r_spectrum),
            Model::SemiTx => Err(OutageError::WrongModel(
                "semi-tx must be interchanged first".into(),
            )),
            Model::Full => Self::full(cfg, &scenario.t_spectrum, &scenario.r_spectrum),
        }
    }

    pub fn cfg(&self) -> &SystemConfig {
        match self {
            Self::Independent { cfg, .. }
            | Self::SemiGe { cfg, .. }
            | Self::SemiLt { cfg, .. }
            | Self::Full { cfg, .. } => cfg,
        }
    }

    /// φ(s), with a flag that is false if any Ψ quadrature hit its budget.
    pub fn eval(&self, s: Complex64, acc: Accumulator) -> Result<(Complex64, bool)> {
        let mut ok = true;
        let mut psi = |a: f64, b: Complex64, z: f64| -> Result<Complex64> {
            let p = tricomi_psi(a, b, z)?;
            ok &= p.converged;
            Ok(p.value)
        };
        let value = match self {
            Self::Independent {
                cfg,
                table,
                prefactor,
            } => {
                let nr = cfg.n_r();
                let tau = cfg.tau();
                let z = 1.0 / cfg.rho();
                // m = τ+i+σ_i takes the values τ+2 … τ+2N_r.
                let mut by_m = Vec::with_capacity(2 * nr - 1);
                for m in (tau + 2)..=(tau + 2 * nr as i64) {
                    let mf = m as f64;
                    by_m.push(factorial((m - 1) as usize) * psi(mf, s + mf, z)?);
                }
                let mat: Vec<Vec<Complex64>> = (0..nr)
                    .map(|i| (0..nr).map(|j| by_m[i + j]).collect())
                    .collect();
                permutation_sum(&mat, table, acc) * *prefactor
            }
            Self::SemiGe {
                cfg,
                r,
                table,
                prefactor,
            } => {
                let (nt, nr) = (cfg.n_t(), cfg.n_r());
                let rho = cfg.rho();
                let mut mat = vec![vec![Complex64::new(0.0, 0.0); nr]; nr];
                for (i, row) in mat.iter_mut().enumerate() {
                    let a = (nt - nr + i + 1) as f64;
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = psi(a, s + a, 1.0 / (rho * r[j]))?;
                    }
                }
                permutation_sum(&mat, table, acc) * *prefactor
            }
            Self::SemiLt {
                cfg,
                r,
                table,
                prefactor,
            } => {
                let (nt, nr) = (cfg.n_t(), cfg.n_r());
                let rho = cfg.rho();
                let mut mat = vec![vec![Complex64::new(0.0, 0.0); nr]; nr];
                for (i, row) in mat.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = if i < nt {
                            let a = (i + 1) as f64;
                            psi(a, s + a, 1.0 / (rho * r[j]))? * r[j].powi((nr - nt) as i32 - 1)
                        } else {
                            Complex64::new(r[j].powi((i - nt) as i32), 0.0)
                        };
                    }
                }
                permutation_sum(&mat, table, acc) * *prefactor
            }
            Self::Full {
                cfg,
                a,
                b,
                table,
                prefactor,
            } => {
                let (nt, nr) = (cfg.n_t(), cfg.n_r());
                let rho = cfg.rho();
                let mut mat = vec![vec![Complex64::new(0.0, 0.0); nt]; nt];
                for (i, row) in mat.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = if i < nr {
                            psi(1.0, s + nr as f64, a[i] * b[j] / rho)?
                        } else {
                            Complex64::new(b[j].powi((nt - i - 1) as i32), 0.0)
                        };
                    }
                }
                // ∏_{i=2}^{N_r} (s+i−2)^{i−1}
                let mut d = Complex64::new(1.0, 0.0);
                for i in 2..=nr {
                    d *= (s + (i as f64 - 2.0)).powi(i as i32 - 1);
                }
                permutation_sum(&mat, table, acc) * *prefactor / d
            }
        };
        Ok((value, ok))
    }

    /// Half-integer c ≤ −0.5 minimising the Chernoff bound x^{−c}·φ(c+1) on
    /// P(G < x). G ≥ 1, so φ is finite on the whole left half-plane; on this
    /// line the integrand is smallest relative to the result, which keeps
    /// cancellation down for small probabilities. The bound is log-convex in
    /// c, so the walk stops at the first increase.
    pub fn chernoff_abscissa(&self, x: f64, acc: Accumulator) -> f64 {
        let bound = |c: f64| {
            self.eval(Complex64::new(c + 1.0, 0.0), acc)
                .ok()
                .map(|(v, _)| v.re * x.powf(-c))
                .filter(|b| b.is_finite() && *b > 0.0)
        };
        let mut best_c = -0.5;
        let Some(mut best) = bound(best_c) else {
            return best_c;
        };
        for k in 1..=40 {
            let c = -0.5 - k as f64;
            match bound(c) {
                Some(b) if b < best => {
                    best = b;
                    best_c = c;
                }
                _ => break,
            }
        }
        best_c
    }

    /// Exact outage probability P(G < 2^R).
    pub fn outage(&self, opts: &ExactOptions) -> Result<OutageResult> {
        let cfg = self.cfg();
        let x = cfg.threshold();
        if x <= 1.0 {
            return Ok(OutageResult::from_raw(0.0, 0.0, Method::Exact, true));
        }
        let contour = opts.contour.unwrap_or_else(|| MellinContour {
            c: self.chernoff_abscissa(x, opts.accumulator),
            ..choose_contour(Model::Independent, cfg, ContourPurpose::Exact)
        });
        if !(contour.c < 0.0 && contour.c.fract() != 0.0) {
            return Err(OutageError::InvalidConfig(format!(
                "contour abscissa {} must be negative and not an integer",
                contour.c
            )));
        }
        let all_ok = AtomicBool::new(true);
        let phi = |s: Complex64| match self.eval(s, opts.accumulator) {
            Ok((v, ok)) => {
                if !ok {
                    all_ok.store(false, Ordering::Relaxed);
                }
                v
            }
            Err(_) => {
                all_ok.store(false, Ordering::Relaxed);
                Complex64::new(f64::NAN, f64::NAN)
            }
        };
        let r = inverse_mellin_cdf(&phi, x, &contour, &opts.mellin);
        if !r.value.is_finite() {
            return Err(OutageError::InvalidConfig(
                "moment function evaluation failed on the contour".into(),
            ));
        }
        let converged = r.converged && all_ok.load(Ordering::Relaxed);
        Ok(OutageResult::from_raw(
            r.value,
            r.err,
            Method::Exact,
            converged,
        ))
    }
}

/// φ_ind(s) for N_t ≥ N_r.
pub fn phi_independent(s: Complex64, cfg: &SystemConfig) -> Result<Complex64> {
    Ok(MomentFunction::independent(cfg)?
        .eval(s, Accumulator::default())?
        .0)
}

/// φ_semi(s) with receive-side spectrum `r`; the branch follows N_t ≥ N_r.
pub fn phi_semi(s: Complex64, cfg: &SystemConfig, r: &EigenSpectrum) -> Result<Complex64> {
    Ok(MomentFunction::semi(cfg, r)?
        .eval(s, Accumulator::default())?
        .0)
}

/// φ_full(s) for N_t ≥ N_r.
pub fn phi_full(
    s: Complex64,
    cfg: &SystemConfig,
    t: &EigenSpectrum,
    r: &EigenSpectrum,
) -> Result<Complex64> {
    Ok(MomentFunction::full(cfg, t, r)?
        .eval(s, Accumulator::default())?
        .0)
}

/// Exact outage probability with no correlation. Any antenna ordering.
pub fn outage_independent(cfg: &SystemConfig) -> Result<OutageResult> {
    outage_independent_with(cfg, &ExactOptions::default())
}

pub fn outage_independent_with(cfg: &SystemConfig, opts: &ExactOptions) -> Result<OutageResult> {
    let cfg = if cfg.n_t() < cfg.n_r() {
        cfg.swapped()
    } else {
        *cfg
    };
    MomentFunction::independent(&cfg)?.outage(opts)
}

/// Exact outage probability with one correlated side. `spectrum` has
/// length N_r for `Side::Rx` and N_t for `Side::Tx`.
pub fn outage_semi(
    cfg: &SystemConfig,
    spectrum: &EigenSpectrum,
    side: Side,
) -> Result<OutageResult> {
    outage_semi_with(cfg, spectrum, side, &ExactOptions::default())
}

pub fn outage_semi_with(
    cfg: &SystemConfig,
    spectrum: &EigenSpectrum,
    side: Side,
    opts: &ExactOptions,
) -> Result<OutageResult> {
    let cfg = match side {
        Side::Rx => *cfg,
        Side::Tx => cfg.swapped(),
    };
    MomentFunction::semi(&cfg, spectrum)?.outage(opts)
}

/// Exact outage probability with both sides correlated.
pub fn outage_full(
    cfg: &SystemConfig,
    t: &EigenSpectrum,
    r: &EigenSpectrum,
) -> Result<OutageResult> {
    outage_full_with(cfg, t, r, &ExactOptions::default())
}

pub fn outage_full_with(
    cfg: &SystemConfig,
    t: &EigenSpectrum,
    r: &EigenSpectrum,
    opts: &ExactOptions,
) -> Result<OutageResult> {
    if cfg.n_t() < cfg.n_r() {
        MomentFunction::full(&cfg.swapped(), r, t)?.outage(opts)
    } else {
        MomentFunction::full(cfg, t, r)?.outage(opts)
    }
}

/// Validates, folds the power allocation, normalizes and evaluates.
pub fn outage_exact(scenario: &ChannelScenario, cfg: &SystemConfig) -> Result<OutageResult> {
    outage_exact_with(scenario, cfg, &ExactOptions::default())
}

pub fn outage_exact_with(
    scenario: &ChannelScenario,
    cfg: &SystemConfig,
    opts: &ExactOptions,
) -> Result<OutageResult> {
    let valid = validate_scenario(scenario, cfg)?;
    let (norm, ncfg) = interchange_normalize(&valid, cfg);
    MomentFunction::for_scenario(&norm, &ncfg)?.outage(opts)
}

/// φ(1) for a scenario; equals 1 for every valid model.
pub fn moment_self_test(scenario: &ChannelScenario, cfg: &SystemConfig) -> Result<f64> {
    let valid = validate_scenario(scenario, cfg)?;
    let (norm, ncfg) = interchange_normalize(&valid, cfg);
    let m = MomentFunction::for_scenario(&norm, &ncfg)?;
    let (v, _) = m.eval(Complex64::new(1.0, 0.0), Accumulator::default())?;
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn independent_normalization_and_mean() {
        for (nt, nr) in [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 2)] {
            let cfg = SystemConfig::new(nt, nr, 1.0, 7.0).unwrap();
            let v = phi_independent(c1(), &cfg).unwrap();
            assert!(
                (v.re - 1.0).abs() < 1e-10 && v.im.abs() < 1e-12,
                "({nt},{nr}) {v}"
            );
        }
        let cfg = SystemConfig::from_linear(1, 1, 1.0, 3.0).unwrap();
        let v = phi_independent(Complex64::new(2.0, 0.0), &cfg).unwrap();
        assert!((v.re - 4.0).abs() < 1e-11);
    }

    #[test]
    fn semi_normalization() {
        let r3 = EigenSpectrum::new(&[2.7, 0.2, 0.1]).unwrap();
        let r2 = EigenSpectrum::new(&[1.5, 0.5]).unwrap();
        for (nt, r) in [(3, &r3), (2, &r3), (1, &r3), (3, &r2), (2, &r2), (4, &r2)] {
            let cfg = SystemConfig::new(nt, r.len(), 1.0, 5.0).unwrap();
            let v = phi_semi(c1(), &cfg, r).unwrap();
            assert!((v.re - 1.0).abs() < 1e-9, "nt={nt} nr={}: {v}", r.len());
        }
    }

    #[test]
    fn full_normalization() {
        let t = EigenSpectrum::new(&[1.3, 1.0, 0.7]).unwrap();
        let r2 = EigenSpectrum::new(&[1.5, 0.5]).unwrap();
        let r3 = EigenSpectrum::new(&[2.7, 0.2, 0.1]).unwrap();
        for r in [&r2, &r3] {
            let cfg = SystemConfig::new(3, r.len(), 1.0, 5.0).unwrap();
            let v = phi_full(c1(), &cfg, &t, r).unwrap();
            assert!((v.re - 1.0).abs() < 1e-8, "nr={}: {v}", r.len());
        }
    }

    #[test]
    fn siso_closed_form() {
        let cfg = SystemConfig::new(1, 1, 1.0, 0.0).unwrap();
        let p = outage_independent(&cfg).unwrap();
        assert!(
            (p.probability - (1.0 - (-1.0f64).exp())).abs() < 1e-9,
            "{p:?}"
        );
        let cfg = SystemConfig::new(2, 1, 1.0, 0.0).unwrap();
        let p = outage_independent(&cfg).unwrap();
        assert!(
            (p.probability - (1.0 - 2.0 * (-1.0f64).exp())).abs() < 1e-9,
            "{p:?}"
        );
    }

    #[test]
    fn routing_rejects_identity() {
        let cfg = SystemConfig::new(2, 2, 1.0, 0.0).unwrap();
        assert!(matches!(
            outage_semi(&cfg, &EigenSpectrum::identity(2), Side::Rx),
            Err(OutageError::WrongModel(_))
        ));
        let t = EigenSpectrum::new(&[1.5, 0.5]).unwrap();
        assert!(outage_full(&cfg, &t, &EigenSpectrum::identity(2)).is_err());
    }

    #[test]
    fn vandermonde_sign() {
        assert_eq!(vandermonde(&[1.0, 2.0, 4.0]), 1.0 * 3.0 * 2.0);
        assert_eq!(vandermonde(&[2.0, 1.0]), -1.0);
    }
}
