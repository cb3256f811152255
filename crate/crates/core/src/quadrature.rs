//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands on finite
//! intervals, plus Gauss–Legendre nodes for fixed-order reference rules.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;

// 21-point Kronrod abscissae and weights with the embedded 10-point Gauss
// rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of one Gauss–Kronrod rule on one panel.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: Complex64,
    pub err: f64,
    /// ∫|f|, used as a cancellation-aware noise floor.
    pub l1: f64,
}

fn rule_from_values(a: f64, b: f64, fv: &[Complex64; 21]) -> Panel {
    let half = 0.5 * (b - a);
    let fc = fv[0];
    let mut resk = fc * WGK[10];
    let mut resg = Complex64::new(0.0, 0.0);
    let mut resabs = fc.norm() * WGK[10];
    for j in 0..10 {
        let (f1, f2) = (fv[1 + 2 * j], fv[2 + 2 * j]);
        resk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[10] * (fc - reskh).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[1 + 2 * j] - reskh).norm() + (fv[2 + 2 * j] - reskh).norm());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Panel {
        a,
        b,
        value,
        err,
        l1: resabs,
    }
}

fn nodes(a: f64, b: f64) -> [f64; 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [c; 21];
    for j in 0..10 {
        x[1 + 2 * j] = c - h * XGK[j];
        x[2 + 2 * j] = c + h * XGK[j];
    }
    x
}

/// Applies the 21-point Kronrod rule (with its 10-point Gauss error
/// estimate) to `f` on `[a, b]`.
pub fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let x = nodes(a, b);
    let mut fv = [Complex64::new(0.0, 0.0); 21];
    for (v, xi) in fv.iter_mut().zip(x.iter()) {
        *v = f(*xi);
    }
    rule_from_values(a, b, &fv)
}

/// Same rule, with the 21 node evaluations farmed out to the rayon pool.
/// Values are collected in node order so the result does not depend on the
/// number of workers.
pub fn gk21_par<F: Fn(f64) -> Complex64 + Sync>(f: &F, a: f64, b: f64) -> Panel {
    let x = nodes(a, b);
    let vals: Vec<Complex64> = x.par_iter().map(|xi| f(*xi)).collect();
    let mut fv = [Complex64::new(0.0, 0.0); 21];
    fv.copy_from_slice(&vals);
    rule_from_values(a, b, &fv)
}

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Stop once the error is below this multiple of ∫|f|; cancellation
    /// makes anything smaller unreachable in double precision.
    pub noise_rel: f64,
    pub max_panels: usize,
    pub parallel: bool,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            noise_rel: 2e-14,
            max_panels: 4000,
            parallel: false,
        }
    }
}

/// Output of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub err: f64,
    pub l1: f64,
    pub converged: bool,
    pub panels: usize,
}

struct Ranked(Panel);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.0.err == other.0.err
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .err
            .total_cmp(&other.0.err)
            .then(other.0.a.total_cmp(&self.0.a))
    }
}

fn sum_panels<'a, I: Iterator<Item = &'a Panel>>(it: I) -> (Complex64, f64, f64) {
    // Compensated sums; the panel order is deterministic (sorted by left end).
    let mut panels: Vec<&Panel> = it.collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut re = crate::dd::KahanSum::default();
    let mut im = crate::dd::KahanSum::default();
    let (mut err, mut l1) = (0.0, 0.0);
    for p in panels {
        re.add(p.value.re);
        im.add(p.value.im);
        err += p.err;
        l1 += p.l1;
    }
    (Complex64::new(re.total(), im.total()), err, l1)
}

/// Globally adaptive bisection over the given breakpoints (at least two,
/// increasing). The panel with the largest error is split until the total
/// error meets `max(abs_tol, rel_tol·|I|, noise_rel·∫|f|)` or the panel
/// budget runs out.
pub fn integrate<F: Fn(f64) -> Complex64 + Sync>(
    f: &F,
    breaks: &[f64],
    opts: &QuadOptions,
) -> QuadResult {
    assert!(breaks.len() >= 2, "need at least one interval");
    let rule = |a: f64, b: f64| {
        if opts.parallel {
            gk21_par(f, a, b)
        } else {
            gk21(f, a, b)
        }
    };
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        heap.push(Ranked(rule(w[0], w[1])));
    }
    loop {
        let (value, err, l1) = sum_panels(heap.iter().map(|r| &r.0));
        let target = opts
            .abs_tol
            .max(opts.rel_tol * value.norm())
            .max(opts.noise_rel * l1);
        let panels = heap.len();
        if err <= target || panels >= opts.max_panels {
            return QuadResult {
                value,
                err,
                l1,
                converged: err <= target,
                panels,
            };
        }
        let worst = heap.pop().expect("heap is never empty").0;
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at double resolution; keep it and give up.
            heap.push(Ranked(worst));
            let (value, err, l1) = sum_panels(heap.iter().map(|r| &r.0));
            return QuadResult {
                value,
                err,
                l1,
                converged: false,
                panels,
            };
        }
        heap.push(Ranked(rule(worst.a, mid)));
        heap.push(Ranked(rule(mid, worst.b)));
    }
}

/// `n` equal panels on `[a, b]` as a breakpoint list.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * i as f64 / n as f64
            }
        })
        .collect()
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Composite Gauss–Legendre on `panels` equal pieces of `[a, b]`.
pub fn composite_gl<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> Complex64 {
    let (x, w) = gauss_legendre(order);
    let mut acc = Complex64::new(0.0, 0.0);
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let c = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc += f(c + 0.5 * h * xi) * (wi * 0.5 * h);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn gk21_is_exact_for_polynomials() {
        let p = gk21(&|x: f64| c(x.powi(30) - 3.0 * x.powi(7)), 0.0, 1.0);
        assert!((p.value.re - (1.0 / 31.0 - 3.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(
            &|x: f64| c(x.sqrt().recip()),
            &[0.0, 1.0],
            &QuadOptions::default(),
        );
        assert!(r.converged);
        assert!((r.value.re - 2.0).abs() < 1e-10, "{:?}", r);
    }

    #[test]
    fn adaptive_complex_oscillatory() {
        let f = |x: f64| Complex64::new(0.0, 40.0 * x).exp();
        let r = integrate(&f, &[0.0, 3.0], &QuadOptions::default());
        let exact = (Complex64::new(0.0, 120.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!((r.value - exact).norm() < 1e-12);
        assert!(r.err < 1e-10);
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let f = |x: f64| Complex64::new((3.0 * x).sin() * (-x).exp(), x.cos());
        let opts = QuadOptions::default();
        let a = integrate(&f, &[0.0, 1.0, 7.0], &opts);
        let b = integrate(
            &f,
            &[0.0, 1.0, 7.0],
            &QuadOptions {
                parallel: true,
                ..opts
            },
        );
        assert_eq!(a.value, b.value);
        assert_eq!(a.err, b.err);
    }

    #[test]
    fn gauss_legendre_weights() {
        for n in [1, 2, 5, 16, 31] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
            let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            if n >= 2 {
                assert!((m2 - 2.0 / 3.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn composite_gl_integrates_exp() {
        let v = composite_gl(&|x: f64| c(x.exp()), 0.0, 2.0, 4, 10);
        assert!((v.re - (2f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let f = |x: f64| c((1.0 / x.max(1e-300)).sin());
        let r = integrate(
            &f,
            &[0.0, 1.0],
            &QuadOptions {
                max_panels: 8,
                ..Default::default()
            },
        );
        assert!(!r.converged);
    }
}
