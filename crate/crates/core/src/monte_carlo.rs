//! Monte Carlo oracle: Kronecker-correlated Rayleigh channel draws, mutual
//! information and empirical outage with binomial standard errors.
//!
//! Sample `i` of a run with seed `s` draws from ChaCha8 seeded with `s` on
//! stream `i`, so estimates do not depend on how samples are split across
//! threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{OutageError, Result};
use crate::model::{validate_scenario, ChannelScenario, EigenSpectrum, SystemConfig};

/// Empirical outage probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    /// √(p̂(1−p̂)/n).
    pub std_err: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub outages: u64,
}

impl McEstimate {
    fn new(outages: u64, n_samples: u64, seed: u64) -> Self {
        let p_hat = outages as f64 / n_samples as f64;
        let std_err = (p_hat * (1.0 - p_hat) / n_samples as f64).sqrt();
        Self {
            p_hat,
            std_err,
            n_samples,
            seed,
            outages,
        }
    }

    /// |p̂ − p| ≤ k·σ, with σ the larger of the empirical standard error and
    /// the one implied by p itself (so p̂ = 0 is still testable).
    pub fn agrees_with(&self, p: f64, k: f64) -> bool {
        let null = (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / self.n_samples as f64).sqrt();
        (self.p_hat - p).abs() <= k * self.std_err.max(null)
    }
}

/// The generator for one sample.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// H = diag(√r)·H_w·diag(√t), H_w with i.i.d. CN(0, 1) entries. Diagonal
/// correlation matrices lose nothing: the law of HH^H depends on the spectra
/// only.
pub fn sample_channel<R: Rng + ?Sized>(
    scenario: &ChannelScenario,
    rng: &mut R,
) -> DMatrix<Complex64> {
    let sr: Vec<f64> = scenario
        .r_spectrum
        .values()
        .iter()
        .map(|v| v.sqrt())
        .collect();
    let st: Vec<f64> = scenario
        .t_spectrum
        .values()
        .iter()
        .map(|v| v.sqrt())
        .collect();
    let mut h = DMatrix::zeros(sr.len(), st.len());
    for i in 0..sr.len() {
        for j in 0..st.len() {
            h[(i, j)] = cn(rng) * (sr[i] * st[j]);
        }
    }
    h
}

/// log₂ det(I + A) for Hermitian positive semi-definite A (n×n, row-major),
/// by Cholesky of I + A; `a` is overwritten.
fn log2_det_identity_plus(a: &mut [Complex64], n: usize) -> f64 {
    for i in 0..n {
        a[i * n + i] += 1.0;
    }
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        let l = d.sqrt();
        a[j * n + j] = Complex64::new(l, 0.0);
        log_det += 2.0 * l.ln();
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k].conj();
            }
            a[i * n + j] = v / l;
        }
    }
    log_det / std::f64::consts::LN_2
}

/// log₂ det(I + ρ·H·diag(x)·H^H), through the smaller Gram matrix.
pub fn mutual_information(h: &DMatrix<Complex64>, rho: f64, x: &[f64]) -> Result<f64> {
    let (nr, nt) = h.shape();
    if x.len() != nt {
        return Err(OutageError::LengthMismatch(x.len(), nt));
    }
    let mut gram = Vec::new();
    Ok(mi_into(nr, nt, |i, j| h[(i, j)], rho, x, &mut gram))
}

fn mi_into<F: Fn(usize, usize) -> Complex64>(
    nr: usize,
    nt: usize,
    h: F,
    rho: f64,
    x: &[f64],
    gram: &mut Vec<Complex64>,
) -> f64 {
    let n = nr.min(nt);
    gram.clear();
    gram.resize(n * n, Complex64::new(0.0, 0.0));
    if nr <= nt {
        // ρ·H X H^H.
        for i in 0..nr {
            for k in 0..=i {
                let mut v = Complex64::new(0.0, 0.0);
                for (j, &xj) in x.iter().enumerate().take(nt) {
                    v += h(i, j) * h(k, j).conj() * xj;
                }
                gram[i * n + k] = v * rho;
            }
        }
    } else {
        // ρ·X^{1/2} H^H H X^{1/2}, same nonzero spectrum.
        for i in 0..nt {
            for k in 0..=i {
                let mut v = Complex64::new(0.0, 0.0);
                for j in 0..nr {
                    v += h(j, i).conj() * h(j, k);
                }
                gram[i * n + k] = v * (rho * (x[i] * x[k]).sqrt());
            }
        }
    }
    log2_det_identity_plus(gram, n)
}

const CHUNK: u64 = 4096;

/// Outage counts at several SNRs from one set of channel draws.
fn count_outages(
    scenario: &ChannelScenario,
    cfgs: &[SystemConfig],
    n_samples: u64,
    seed: u64,
) -> Vec<u64> {
    let sr: Vec<f64> = scenario
        .r_spectrum
        .values()
        .iter()
        .map(|v| v.sqrt())
        .collect();
    let st: Vec<f64> = scenario
        .t_spectrum
        .values()
        .iter()
        .map(|v| v.sqrt())
        .collect();
    let x = scenario.x_spectrum.values().to_vec();
    let (nr, nt) = (sr.len(), st.len());
    let chunks = n_samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; cfgs.len()];
            let mut h = vec![Complex64::new(0.0, 0.0); nr * nt];
            let mut gram = Vec::new();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let mut rng = sample_rng(seed, idx);
                for i in 0..nr {
                    for j in 0..nt {
                        h[i * nt + j] = cn(&mut rng) * (sr[i] * st[j]);
                    }
                }
                for (count, cfg) in counts.iter_mut().zip(cfgs) {
                    let mi = mi_into(nr, nt, |i, j| h[i * nt + j], cfg.rho(), &x, &mut gram);
                    if mi < cfg.rate() {
                        *count += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; cfgs.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Fraction of draws with log₂ det(I + ρHR_xH^H) < R. The power allocation
/// is taken diagonal in the transmit eigenbasis, aligned with the
/// descending transmit spectrum.
pub fn estimate_outage(
    scenario: &ChannelScenario,
    cfg: &SystemConfig,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    Ok(estimate_outage_sweep(scenario, std::slice::from_ref(cfg), n_samples, seed)?[0])
}

/// [`estimate_outage`] at several configurations sharing the antenna counts,
/// reusing one set of draws. Each entry equals the single-point estimate
/// with the same seed.
pub fn estimate_outage_sweep(
    scenario: &ChannelScenario,
    cfgs: &[SystemConfig],
    n_samples: u64,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    if n_samples == 0 {
        return Err(OutageError::ZeroSamples);
    }
    let Some(first) = cfgs.first() else {
        return Ok(Vec::new());
    };
    let v = validate_scenario(scenario, first)?;
    for c in cfgs {
        if (c.n_t(), c.n_r()) != (first.n_t(), first.n_r()) {
            return Err(OutageError::DimensionMismatch(
                "sweep configurations differ in antenna counts".into(),
            ));
        }
    }
    let counts = count_outages(&v, cfgs, n_samples, seed);
    Ok(counts
        .into_iter()
        .map(|k| McEstimate::new(k, n_samples, seed))
        .collect())
}

fn hermitian_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|v| Complex64::new(v.max(0.0).sqrt(), 0.0)),
    );
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Outage estimate for explicit Hermitian correlation matrices,
/// H = R_r^{1/2}·H_w·R_t^{1/2}, with an identity power allocation.
pub fn estimate_outage_matrices(
    r_t: &DMatrix<Complex64>,
    r_r: &DMatrix<Complex64>,
    cfg: &SystemConfig,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(OutageError::ZeroSamples);
    }
    if r_t.shape() != (cfg.n_t(), cfg.n_t()) || r_r.shape() != (cfg.n_r(), cfg.n_r()) {
        return Err(OutageError::DimensionMismatch(
            "correlation matrix shapes do not match cfg".into(),
        ));
    }
    let (st, sr) = (hermitian_sqrt(r_t), hermitian_sqrt(r_r));
    let (nt, nr) = (cfg.n_t(), cfg.n_r());
    let ones = vec![1.0; nt];
    let chunks = n_samples.div_ceil(CHUNK);
    let outages: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut count = 0u64;
            let mut gram = Vec::new();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let mut rng = sample_rng(seed, idx);
                let hw = DMatrix::from_fn(nr, nt, |_, _| cn(&mut rng));
                let h = &sr * hw * &st;
                if mi_into(nr, nt, |i, j| h[(i, j)], cfg.rho(), &ones, &mut gram) < cfg.rate() {
                    count += 1;
                }
            }
            count
        })
        .sum();
    Ok(McEstimate::new(outages, n_samples, seed))
}

/// Eigenvalues of R_t^{1/2}·R_x·R_t^{1/2} for spectra that share an
/// eigenbasis (elementwise product, re-sorted).
pub fn effective_tx_spectrum(t: &EigenSpectrum, x: &EigenSpectrum) -> Result<EigenSpectrum> {
    if t.len() != x.len() {
        return Err(OutageError::DimensionMismatch(format!(
            "t has {} values, x has {}",
            t.len(),
            x.len()
        )));
    }
    let prod: Vec<f64> = t
        .values()
        .iter()
        .zip(x.values())
        .map(|(a, b)| a * b)
        .collect();
    EigenSpectrum::effective(&prod)
}

/// Eigenvalues of R_t^{1/2}·R_x·R_t^{1/2} for general Hermitian matrices.
pub fn effective_tx_correlation(
    r_t: &DMatrix<Complex64>,
    r_x: &DMatrix<Complex64>,
) -> Result<EigenSpectrum> {
    if !r_t.is_square() || r_t.shape() != r_x.shape() {
        return Err(OutageError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            r_t.shape(),
            r_x.shape()
        )));
    }
    let s = hermitian_sqrt(r_t);
    let m = &s * r_x * &s;
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let vals: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    EigenSpectrum::effective(&vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(nt: usize, nr: usize, rate: f64, snr_db: f64) -> SystemConfig {
        SystemConfig::new(nt, nr, rate, snr_db).unwrap()
    }

    #[test]
    fn mutual_information_anchors() {
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert!((mutual_information(&id, 1.0, &[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-14);
        let zero = DMatrix::<Complex64>::zeros(2, 3);
        assert_eq!(mutual_information(&zero, 10.0, &[1.0; 3]).unwrap(), 0.0);
        assert!(mutual_information(&zero, 10.0, &[1.0; 2]).is_err());
    }

    #[test]
    fn mutual_information_matches_eigenvalues() {
        let sc = ChannelScenario::independent(3, 2);
        let mut rng = sample_rng(3, 0);
        for _ in 0..20 {
            let h = sample_channel(&sc, &mut rng);
            let g = &h * h.adjoint();
            let lam = g.symmetric_eigen().eigenvalues;
            let want: f64 = lam.iter().map(|l| (1.0 + 4.0 * l).log2()).sum();
            let got = mutual_information(&h, 4.0, &[1.0; 3]).unwrap();
            assert!((got - want).abs() < 1e-12);
            // Same value through the transposed (wider) orientation.
            let ht = h.adjoint();
            assert!((mutual_information(&ht, 4.0, &[1.0; 2]).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn power_allocation_enters_gram() {
        let sc = ChannelScenario::independent(2, 3);
        let mut rng = sample_rng(5, 1);
        let h = sample_channel(&sc, &mut rng);
        let x = [1.6f64, 0.4];
        let hx = DMatrix::from_fn(3, 2, |i, j| h[(i, j)] * x[j].sqrt());
        let lam = (&hx * hx.adjoint()).symmetric_eigen().eigenvalues;
        let want: f64 = lam
            .iter()
            .map(|l: &f64| (1.0 + 2.0 * l.max(0.0)).log2())
            .sum();
        assert!((mutual_information(&h, 2.0, &x).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_channel() {
        let sc = ChannelScenario::independent(2, 2);
        let a = sample_channel(&sc, &mut sample_rng(9, 42));
        let b = sample_channel(&sc, &mut sample_rng(9, 42));
        let c = sample_channel(&sc, &mut sample_rng(9, 43));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn component_variance_and_trace() {
        let t = EigenSpectrum::new(&[1.5, 0.5]).unwrap();
        let r = EigenSpectrum::new(&[1.3, 1.0, 0.7]).unwrap();
        let sc = ChannelScenario::full(t, r);
        let n = 100_000;
        let (mut tr, mut tr2) = (0.0, 0.0);
        for i in 0..n {
            let h = sample_channel(&sc, &mut sample_rng(1, i));
            let v: f64 = h.iter().map(|z| z.norm_sqr()).sum();
            tr += v;
            tr2 += v * v;
        }
        let mean = tr / n as f64;
        let sd = ((tr2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 6.0).abs() < 4.0 * sd, "{mean} ± {sd}");

        let sc = ChannelScenario::independent(1, 1);
        let mut rng = sample_rng(2, 0);
        let m = 200_000;
        let s2: f64 = (0..m)
            .map(|_| sample_channel(&sc, &mut rng)[(0, 0)].re.powi(2))
            .sum::<f64>()
            / m as f64;
        // Var of the squared component of N(0, 1/2) is 2·(1/2)² = 1/2.
        let sd = (0.5f64 / m as f64).sqrt();
        assert!((s2 - 0.5).abs() < 4.0 * sd, "{s2}");
    }

    #[test]
    fn siso_outage_within_three_sigma() {
        let c = cfg(1, 1, 1.0, 0.0);
        let e = estimate_outage(&ChannelScenario::independent(1, 1), &c, 200_000, 11).unwrap();
        let p = 1.0 - (-1.0f64).exp();
        assert!(e.agrees_with(p, 3.0), "{e:?}");
        assert_eq!(e.std_err, (e.p_hat * (1.0 - e.p_hat) / 200_000.0).sqrt());
    }

    #[test]
    fn zero_samples_rejected() {
        let c = cfg(1, 1, 1.0, 0.0);
        assert_eq!(
            estimate_outage(&ChannelScenario::independent(1, 1), &c, 0, 1),
            Err(OutageError::ZeroSamples)
        );
    }

    #[test]
    fn sweep_matches_single_points() {
        let sc = ChannelScenario::independent(2, 2);
        let cfgs: Vec<_> = [0.0, 5.0].iter().map(|&s| cfg(2, 2, 2.0, s)).collect();
        let sweep = estimate_outage_sweep(&sc, &cfgs, 10_000, 4).unwrap();
        for (c, e) in cfgs.iter().zip(&sweep) {
            assert_eq!(*e, estimate_outage(&sc, c, 10_000, 4).unwrap());
        }
    }

    #[test]
    fn thread_count_does_not_change_estimate() {
        let sc = ChannelScenario::independent(2, 2);
        let c = cfg(2, 2, 2.0, 5.0);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let a = one.install(|| estimate_outage(&sc, &c, 20_000, 8).unwrap());
        let b = three.install(|| estimate_outage(&sc, &c, 20_000, 8).unwrap());
        assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
    }

    #[test]
    fn effective_spectra() {
        let t = EigenSpectrum::new(&[1.3, 1.0, 0.7]).unwrap();
        let x = EigenSpectrum::power_allocation(&[2.6, 0.2, 0.2]).unwrap();
        let e = effective_tx_spectrum(&t, &x).unwrap();
        let want = [3.38, 0.2, 0.14];
        for (a, b) in e.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            effective_tx_spectrum(&t, &EigenSpectrum::identity(3))
                .unwrap()
                .values(),
            t.values()
        );
        assert!(effective_tx_spectrum(&t, &EigenSpectrum::identity(2)).is_err());

        let rt = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.3, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.7, 0.0),
        ]));
        let rx = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(2.6, 0.0),
            Complex64::new(0.2, 0.0),
            Complex64::new(0.2, 0.0),
        ]));
        let m = effective_tx_correlation(&rt, &rx).unwrap();
        for (a, b) in m.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
