//! Structural checks: majorization, the double-permutation reduction,
//! convexity of the rate kernel and the special-case embeddings of the
//! full-correlated asymptote.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotic::{asym_full, asym_independent, asym_semi};
use crate::error::{OutageError, Result};
use crate::exact::Side;
use crate::model::{EigenSpectrum, SystemConfig};
use crate::permutations::PermutationTable;

/// One named pass/fail outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

fn descending(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// True iff v1 ≺ v2: every prefix sum of v1 (sorted descending) is at most
/// the matching prefix sum of v2, and the totals agree within 1e−9.
pub fn majorizes(v1: &[f64], v2: &[f64]) -> Result<bool> {
    if v1.len() != v2.len() {
        return Err(OutageError::LengthMismatch(v1.len(), v2.len()));
    }
    let (a, b) = (descending(v1), descending(v2));
    let tol = 1e-9 * b.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    let (mut sa, mut sb) = (0.0, 0.0);
    for k in 0..a.len() {
        sa += a[k];
        sb += b[k];
        if k + 1 < a.len() && sa > sb + tol {
            return Ok(false);
        }
    }
    Ok((sa - sb).abs() <= tol)
}

/// Σ_{σ₁,σ₂} sgn σ₁ sgn σ₂ η(σ₁, σ₂) against n!·Σ_σ sgn σ η(id, σ),
/// exactly. Holds whenever η is invariant under applying one permutation to
/// both arguments.
pub fn lemma1_identity<F>(n: usize, eta: F) -> Result<bool>
where
    F: Fn(&[usize], &[usize]) -> BigRational,
{
    let table = PermutationTable::new(n)?;
    let signed = |acc: &mut BigRational, term: BigRational, sign: i8| {
        if sign > 0 {
            *acc += term;
        } else {
            *acc -= term;
        }
    };
    let mut double = BigRational::zero();
    for (p, sp) in table.iter() {
        for (q, sq) in table.iter() {
            signed(&mut double, eta(p, q), sp * sq);
        }
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut single = BigRational::zero();
    for (q, sq) in table.iter() {
        signed(&mut single, eta(&identity, q), sq);
    }
    let nfact: BigInt = (1..=n as u64).map(BigInt::from).product();
    Ok(double == single * BigRational::from_integer(nfact))
}

/// [`lemma1_identity`] for the product form η(σ₁, σ₂) = ∏_i h(σ₁(i), σ₂(i)).
pub fn lemma1_holds(h: &[Vec<BigRational>]) -> Result<bool> {
    lemma1_identity(h.len(), |p, q| {
        p.iter()
            .zip(q)
            .fold(BigRational::one(), |acc, (&i, &j)| acc * &h[i][j])
    })
}

/// Runs [`lemma1_holds`] on `trials` random rational n×n matrices h.
pub fn lemma1_reduction_check(n: usize, trials: usize, seed: u64) -> Result<CheckRecord> {
    if n == 0 || n > 4 {
        return Err(OutageError::InvalidConfig(format!(
            "lemma1 check supports 1 <= n <= 4, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let h: Vec<Vec<BigRational>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let num: i64 = rng.random_range(-50..=50);
                        let den: i64 = rng.random_range(1..=20);
                        BigRational::new(BigInt::from(num), BigInt::from(den))
                    })
                    .collect()
            })
            .collect();
        if !lemma1_holds(&h)? {
            failures += 1;
        }
    }
    Ok(CheckRecord::new(
        format!("lemma1 n={n}"),
        failures == 0,
        format!(
            "{} of {trials} random product-form trials exact",
            trials - failures
        ),
    ))
}

/// First and second differences of a kernel on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub min_first_difference: f64,
    /// Smallest second divided difference, scaled by the largest |f|.
    pub min_second_difference: f64,
    pub increasing: bool,
    pub convex: bool,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.increasing && self.convex
    }
}

/// Checks f(r_{k+1}) > f(r_k) and that second divided differences are at
/// least −1e−9 relative to the largest |f| on the grid (increasing grid).
pub fn convexity_scan<F: Fn(f64) -> f64>(kernel: F, grid: &[f64]) -> Result<ConvexityReport> {
    if grid.len() < 3 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OutageError::InvalidConfig(
            "convexity scan needs at least 3 increasing grid points".into(),
        ));
    }
    let f: Vec<f64> = grid.iter().map(|&r| kernel(r)).collect();
    let scale = f
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let min_first = f
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let mut min_second = f64::INFINITY;
    for k in 1..grid.len() - 1 {
        let (h0, h1) = (grid[k] - grid[k - 1], grid[k + 1] - grid[k]);
        let d = 2.0 * ((f[k + 1] - f[k]) / h1 - (f[k] - f[k - 1]) / h0) / (h0 + h1);
        min_second = min_second.min(d * h0 * h1 / scale);
    }
    Ok(ConvexityReport {
        min_first_difference: min_first,
        min_second_difference: min_second,
        increasing: min_first > 0.0,
        convex: min_second >= -1e-9,
    })
}

/// A fixed distinct, trace-normalized spectrum of length n ≥ 2.
fn probe_spectrum(n: usize) -> EigenSpectrum {
    let vals: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.6 * ((n - 1) as f64 / 2.0 - i as f64) / n as f64)
        .collect();
    EigenSpectrum::new(&vals).expect("probe spectrum is valid")
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// asym_full with identity spectra against asym_independent, and with one
/// identity side against asym_semi, to 1e−9 relative.
pub fn special_case_embedding_check(cfg: &SystemConfig) -> Result<Vec<CheckRecord>> {
    let (nt, nr) = (cfg.n_t(), cfg.n_r());
    let tag = format!("({nt},{nr}) R={}", cfg.rate());
    let mut out = Vec::new();
    let ind = asym_independent(cfg)?.raw_value;
    let full = asym_full(
        cfg,
        &EigenSpectrum::identity(nt),
        &EigenSpectrum::identity(nr),
    )?
    .raw_value;
    let gap = rel_gap(full, ind);
    out.push(CheckRecord::new(
        format!("embedding independent {tag}"),
        gap <= 1e-9,
        format!("relative gap {gap:.2e}"),
    ));
    if nr >= 2 {
        let r = probe_spectrum(nr);
        let semi = asym_semi(cfg, &r, Side::Rx)?.raw_value;
        let full = asym_full(cfg, &EigenSpectrum::identity(nt), &r)?.raw_value;
        let gap = rel_gap(full, semi);
        out.push(CheckRecord::new(
            format!("embedding semi-rx {tag}"),
            gap <= 1e-9,
            format!("relative gap {gap:.2e}"),
        ));
    }
    if nt >= 2 {
        let t = probe_spectrum(nt);
        let semi = asym_semi(cfg, &t, Side::Tx)?.raw_value;
        let full = asym_full(cfg, &t, &EigenSpectrum::identity(nr))?.raw_value;
        let gap = rel_gap(full, semi);
        out.push(CheckRecord::new(
            format!("embedding semi-tx {tag}"),
            gap <= 1e-9,
            format!("relative gap {gap:.2e}"),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotic::g0;

    #[test]
    fn majorization_chain() {
        let (t1, t2, t3) = ([1.0, 1.0, 1.0], [2.3, 0.5, 0.2], [2.7, 0.2, 0.1]);
        assert!(majorizes(&t1, &t2).unwrap());
        assert!(majorizes(&t2, &t3).unwrap());
        assert!(majorizes(&t1, &t3).unwrap());
        assert!(!majorizes(&t3, &t2).unwrap());
        assert!(majorizes(&t2, &t2).unwrap());
        assert!(!majorizes(&[1.0, 1.0], &[1.5, 1.0]).unwrap());
        assert!(matches!(
            majorizes(&t1, &[2.0, 1.0]),
            Err(OutageError::LengthMismatch(3, 2))
        ));
    }

    #[test]
    fn lemma1_small_cases() {
        for n in 1..=3 {
            let r = lemma1_reduction_check(n, 20, n as u64).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert!(lemma1_reduction_check(5, 1, 0).is_err());
    }

    #[test]
    fn lemma1_rejects_order_sensitive_eta() {
        // η = 1 only at (id, id): not invariant under joint relabelling.
        let eta = |p: &[usize], q: &[usize]| {
            let id = p.iter().enumerate().all(|(i, &v)| i == v)
                && q.iter().enumerate().all(|(i, &v)| i == v);
            BigRational::from_integer(BigInt::from(id as i32))
        };
        assert!(lemma1_identity(1, eta).unwrap());
        assert!(!lemma1_identity(2, eta).unwrap());
        assert!(!lemma1_identity(3, eta).unwrap());
    }

    #[test]
    fn convexity_of_rate_kernels() {
        let grid: Vec<f64> = (1..=24).map(|k| 0.25 * k as f64).collect();
        let siso = convexity_scan(|r| 2f64.powf(r) - 1.0, &grid).unwrap();
        assert!(siso.passed());
        for (nt, nr) in [(2, 2), (3, 2), (3, 3)] {
            let rep = convexity_scan(
                |r| g0(&SystemConfig::new(nt, nr, r, 0.0).unwrap()).unwrap(),
                &grid,
            )
            .unwrap();
            assert!(rep.passed(), "({nt},{nr}) {rep:?}");
        }
        let concave = convexity_scan(|r| r.sqrt(), &grid).unwrap();
        assert!(concave.increasing && !concave.convex);
        let decreasing = convexity_scan(|r| -r, &grid).unwrap();
        assert!(!decreasing.increasing);
    }

    #[test]
    fn embeddings() {
        for (nt, nr) in [(1, 1), (2, 2), (3, 2), (2, 3)] {
            let cfg = SystemConfig::new(nt, nr, 2.0, 10.0).unwrap();
            for rec in special_case_embedding_check(&cfg).unwrap() {
                assert!(rec.passed, "{rec:?}");
            }
        }
    }
}
