//! Closed forms of the asymptotic kernels as sums of residues at integer
//! poles, built in exact rational arithmetic.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::dd::{Dd, DdSum};
use crate::error::{OutageError, Result};
use crate::model::SystemConfig;
use crate::permutations::PermutationTable;
use crate::special::factorial;

/// coeff·x^t·(ln x)^k, with the coefficient held as a double-double.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueTerm {
    pub t: u32,
    pub k: u32,
    pub coeff: f64,
    pub coeff_lo: f64,
}

/// Σ coeff·x^t·(ln x)^k. Produced by [`from_poles`], [`g_sigma`] and
/// [`g_n_full`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResiduePolynomial {
    pub terms: Vec<ResidueTerm>,
}

/// Pole multiset: pole position → multiplicity.
pub type Poles = BTreeMap<i64, u32>;

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn rational_to_dd(r: &BigRational) -> (f64, f64) {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    let rest = r - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
    (hi, rest.to_f64().unwrap_or(0.0))
}

/// Taylor coefficients c_0..c_{m−1} of ∏_{q≠p} (s−q)^{−m_q} around s = p.
fn local_coefficients(poles: &Poles, p: i64, m: u32) -> Vec<BigRational> {
    let len = m as usize;
    let mut acc = vec![BigRational::zero(); len];
    acc[0] = BigRational::one();
    for (&q, &mq) in poles {
        if q == p {
            continue;
        }
        // (d+h)^{−mq} = Σ_j (−1)^j C(mq+j−1, j) d^{−mq−j} h^j with d = p − q.
        let d = BigRational::from_integer(BigInt::from(p - q));
        let mut series = Vec::with_capacity(len);
        let mut dpow = num_traits::pow(d.clone(), mq as usize).recip();
        for j in 0..len {
            let mut c =
                BigRational::from_integer(binomial(mq as u64 + j as u64 - 1, j as u64)) * &dpow;
            if j % 2 == 1 {
                c = -c;
            }
            series.push(c);
            dpow /= &d;
        }
        let mut next = vec![BigRational::zero(); len];
        for (i, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in series.iter().enumerate().take(len - i) {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    acc
}

/// (1/2πi)∮ x^s / ∏_q (s−q)^{m_q} ds around all poles, as a residue sum.
/// Poles must be non-negative.
pub fn from_poles(poles: &Poles) -> Result<ResiduePolynomial> {
    if poles.is_empty() {
        return Err(OutageError::EmptyPoleSet);
    }
    let mut terms = Vec::new();
    for (&p, &m) in poles {
        if p < 0 {
            return Err(OutageError::InvalidConfig(format!("negative pole {p}")));
        }
        let c = local_coefficients(poles, p, m);
        // Residue of e^{sy}·f(s)/(s−p)^m at p: e^{py} Σ_k y^k/k! c_{m−1−k}.
        let mut kfact = BigInt::one();
        for k in 0..m {
            if k > 0 {
                kfact *= BigInt::from(k);
            }
            let coeff = &c[(m - 1 - k) as usize] / BigRational::from_integer(kfact.clone());
            if coeff.is_zero() {
                continue;
            }
            let (hi, lo) = rational_to_dd(&coeff);
            terms.push(ResidueTerm {
                t: p as u32,
                k,
                coeff: hi,
                coeff_lo: lo,
            });
        }
    }
    Ok(ResiduePolynomial { terms })
}

impl ResiduePolynomial {
    /// Value of the contour integral at x: the residue sum for x ≥ 1 and
    /// zero for x < 1, where the contour closes to the right.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.evaluate_dd(x).to_f64()
    }

    pub fn evaluate_dd(&self, x: f64) -> Dd {
        if x < 1.0 || self.terms.is_empty() {
            return Dd::ZERO;
        }
        let ln_x = Dd::ln(x);
        let xd = Dd::from(x);
        let mut sum = DdSum::default();
        for term in &self.terms {
            let c = Dd::new(term.coeff, term.coeff_lo);
            sum.add_dd(c * xd.powi(term.t) * ln_x.powi(term.k));
        }
        sum.value()
    }

    /// Largest pole position.
    pub fn max_pole(&self) -> u32 {
        self.terms.iter().map(|t| t.t).max().unwrap_or(0)
    }
}

type KernelCache = Mutex<HashMap<Vec<(i64, u32)>, Arc<ResiduePolynomial>>>;

fn cache() -> &'static KernelCache {
    static CACHE: OnceLock<KernelCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(poles: &Poles) -> Result<Arc<ResiduePolynomial>> {
    let key: Vec<(i64, u32)> = poles.iter().map(|(p, m)| (*p, *m)).collect();
    if let Some(hit) = cache().lock().expect("kernel cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let poly = Arc::new(from_poles(poles)?);
    cache()
        .lock()
        .expect("kernel cache poisoned")
        .insert(key, poly.clone());
    Ok(poly)
}

/// Pole multiset of 1/(s ∏_i ∏_{t=1}^{m_i} (s−t)).
pub fn sigma_poles(sigma: &[usize], tau: i64) -> Result<Poles> {
    let mut poles = Poles::new();
    poles.insert(0, 1);
    for (i, &si) in sigma.iter().enumerate() {
        let m = tau + (i as i64 + 1) + (si as i64 + 1);
        if m < 1 {
            return Err(OutageError::EmptyPoleSet);
        }
        for t in 1..=m {
            *poles.entry(t).or_insert(0) += 1;
        }
    }
    Ok(poles)
}

/// The kernel (1/2πi)∮ x^s / (s ∏_{i=1}^{N} ∏_{t=1}^{τ+i+σ_i} (s−t)) ds for a
/// permutation σ of {0, …, N−1} (so σ_i + 1 is the one-based image of i+1).
pub fn g_sigma(sigma: &[usize], tau: i64) -> Result<Arc<ResiduePolynomial>> {
    if tau < -1 {
        return Err(OutageError::EmptyPoleSet);
    }
    cached(&sigma_poles(sigma, tau)?)
}

/// Pole multiset of x^s/s · ∏_i Γ(s−N_t−i−n_i+1)/Γ(s−i+1): simple pole at 0
/// and, for each i, one pole at each of i, …, N_t+i+n_i−1.
pub fn full_poles(n: &[usize], n_t: usize) -> Poles {
    let mut poles = Poles::new();
    poles.insert(0, 1);
    for (idx, &ni) in n.iter().enumerate() {
        let i = idx as i64 + 1;
        for t in i..=(n_t as i64 + i + ni as i64 - 1) {
            *poles.entry(t).or_insert(0) += 1;
        }
    }
    poles
}

/// g_n(x) = (1/2πi)∮ x^s/s · ∏_{i=1}^{N_r} Γ(s−N_t−i−n_i+1)/Γ(s−i+1) ds,
/// for N_t ≥ N_r.
pub fn g_n_full(n: &[usize], cfg: &SystemConfig) -> Result<Arc<ResiduePolynomial>> {
    if cfg.n_t() < cfg.n_r() {
        return Err(OutageError::InvalidConfig(
            "g_n_full needs n_t >= n_r; normalize first".into(),
        ));
    }
    if n.len() != cfg.n_r() {
        return Err(OutageError::LengthMismatch(n.len(), cfg.n_r()));
    }
    cached(&full_poles(n, cfg.n_t()))
}

/// g_0 at x through the permutation form
/// Σ_σ sgn(σ) ∏_i Γ(τ+i+σ_i)·g_σ(x) / ∏_i (N_r−i)!(N_t−i)!, for N_t ≥ N_r.
pub fn g0_permutation_sum(cfg: &SystemConfig, x: f64) -> Result<f64> {
    if cfg.n_t() < cfg.n_r() {
        return Err(OutageError::InvalidConfig(
            "needs n_t >= n_r; normalize first".into(),
        ));
    }
    let tau = cfg.tau();
    let table = PermutationTable::new(cfg.n_r())?;
    let mut sum = DdSum::default();
    for (sigma, sign) in table.iter() {
        let gammas: f64 = sigma
            .iter()
            .enumerate()
            .map(|(i, &s)| factorial((tau + i as i64 + s as i64 + 1) as usize))
            .product();
        let g = g_sigma(sigma, tau)?.evaluate_dd(x);
        sum.add_dd(g * Dd::from(gammas * sign as f64));
    }
    let norm: f64 = (1..=cfg.n_r())
        .map(|i| factorial(cfg.n_r() - i) * factorial(cfg.n_t() - i))
        .product();
    Ok(sum.total() / norm)
}

/// The permutation route to g_0(R), evaluated at x = 2^R.
pub fn g0_via_permutation_identity(cfg: &SystemConfig) -> Result<f64> {
    g0_permutation_sum(cfg, cfg.threshold())
}

/// Exact rational coefficient list, for tests and debugging dumps.
pub fn exact_terms(poles: &Poles) -> Vec<(i64, u32, BigRational)> {
    let mut out = Vec::new();
    for (&p, &m) in poles {
        let c = local_coefficients(poles, p, m);
        let mut kfact = BigInt::one();
        for k in 0..m {
            if k > 0 {
                kfact *= BigInt::from(k);
            }
            let coeff = &c[(m - 1 - k) as usize] / BigRational::from_integer(kfact.clone());
            if !coeff.is_zero() {
                out.push((p, k, coeff));
            }
        }
    }
    out
}

/// Sum of |coeff| over all terms, a scale for cancellation at x near 1.
pub fn coefficient_mass(poly: &ResiduePolynomial) -> f64 {
    poly.terms.iter().map(|t| t.coeff.abs()).sum()
}
