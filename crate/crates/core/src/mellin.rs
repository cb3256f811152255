//! Vertical-line contour quadrature for inverse Mellin transforms and
//! Mellin–Barnes integrals with real-symmetric integrands.

use num_complex::Complex64;

use crate::model::{Model, SystemConfig};
use crate::quadrature::{integrate, uniform_breaks, QuadOptions};

/// Integration line Re s = c, initial truncation height and initial number
/// of head panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinContour {
    pub c: f64,
    pub half_height: f64,
    /// Panels on [0, half_height] before adaptive refinement; even.
    pub nodes: usize,
}

impl Default for MellinContour {
    fn default() -> Self {
        Self {
            c: -0.5,
            half_height: 40.0,
            nodes: 16,
        }
    }
}

/// Which integral the contour is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourPurpose {
    /// The outage CDF, integrated at c = −0.5.
    Exact,
    /// The asymptotic residue kernels, integrated right of all their poles.
    AsymptoticCheck,
}

/// Picks the contour for a model. For CDF evaluation any c < 0 off the
/// integers is valid; −0.5 is the default starting line. The residue
/// kernels have poles at 0, 1, …, N_t+N_r−1, so their line sits half a unit
/// to the right of the largest one.
pub fn choose_contour(model: Model, cfg: &SystemConfig, purpose: ContourPurpose) -> MellinContour {
    let _ = model;
    match purpose {
        ContourPurpose::Exact => MellinContour::default(),
        ContourPurpose::AsymptoticCheck => MellinContour {
            c: (cfg.n_t() + cfg.n_r()) as f64 - 1.0 + 0.5,
            half_height: 40.0,
            nodes: 16,
        },
    }
}

/// Tolerances and limits for the line integrals.
#[derive(Debug, Clone, Copy)]
pub struct MellinOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap for the explicitly integrated height before the tail.
    pub max_half_height: f64,
    pub max_tail_segments: usize,
    pub parallel: bool,
}

impl Default for MellinOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_half_height: 5120.0,
            max_tail_segments: 120,
            parallel: false,
        }
    }
}

/// Value of a line integral with its error bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct MellinResult {
    pub value: f64,
    pub err: f64,
    pub converged: bool,
    /// Head height used by the accepted round.
    pub half_height: f64,
    /// Reported error after each round; non-increasing.
    pub round_errors: Vec<f64>,
}

/// (1/2π)∫ f(c+it) dt over the whole line for an integrand with
/// f(conj s) = conj f(s), i.e. (1/π)∫₀^∞ Re f(c+it) dt.
///
/// `omega` is the angular frequency of the oscillating factor (ln x for
/// x^{±s}); it sets the period used to cut the tail into half-cycles.
/// The head [0, T] is integrated adaptively. The tail is summed cycle by
/// cycle and extrapolated with Wynn's ε-algorithm, since Mellin integrands
/// of outage CDFs only decay like a power of t. T doubles until the error
/// estimate meets the tolerance or T reaches the cap.
pub fn line_integral<F>(
    f: &F,
    omega: f64,
    contour: &MellinContour,
    opts: &MellinOptions,
) -> MellinResult
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let c = contour.c;
    let g = |t: f64| Complex64::new(f(Complex64::new(c, t)).re, 0.0);
    let head_opts = QuadOptions {
        rel_tol: 0.05 * opts.rel_tol,
        abs_tol: 0.05 * opts.abs_tol * std::f64::consts::PI,
        noise_rel: 2e-14,
        max_panels: 4000,
        parallel: opts.parallel,
    };
    let mut t_head = contour.half_height;
    let nodes = contour.nodes.max(2) + contour.nodes % 2;
    let first = integrate(&g, &uniform_breaks(0.0, t_head, nodes), &head_opts);
    let (mut head, mut head_err, mut head_ok) = (first.value.re, first.err, first.converged);

    let mut best: Option<(f64, f64, bool, f64)> = None;
    let mut round_errors = Vec::new();
    loop {
        let scale = head.abs().max(opts.abs_tol);
        let tail = tail_sum(&g, t_head, omega.abs(), scale, opts);
        let value = (head + tail.value) / std::f64::consts::PI;
        let err = (head_err + tail.err) / std::f64::consts::PI;
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        let ok = head_ok && tail.converged && err <= target;
        let better = best.as_ref().is_none_or(|b| err < b.1);
        if better {
            best = Some((value, err, ok, t_head));
        }
        round_errors.push(best.as_ref().map(|b| b.1).unwrap_or(err));
        // Doubling T no longer helps once the error sits at the noise floor.
        let n = round_errors.len();
        let stalled = n >= 3 && round_errors[n - 1] > 0.5 * round_errors[n - 3];
        if ok || stalled || 2.0 * t_head > opts.max_half_height {
            break;
        }
        let panels = (nodes / 2).max(2);
        let more = integrate(
            &g,
            &uniform_breaks(t_head, 2.0 * t_head, panels),
            &head_opts,
        );
        head += more.value.re;
        head_err += more.err;
        head_ok &= more.converged;
        t_head *= 2.0;
    }
    let (value, err, converged, half_height) = best.expect("at least one round");
    MellinResult {
        value,
        err,
        converged,
        half_height,
        round_errors,
    }
}

/// F(x) = (1/2πi)∫ x^{−s}/(−s)·φ(s+1) ds along Re s = c < 0, where φ(s) is
/// the Mellin transform E[X^{s−1}] of a positive random variable X. Returns
/// P(X < x).
pub fn inverse_mellin_cdf<F>(
    phi_at: &F,
    x: f64,
    contour: &MellinContour,
    opts: &MellinOptions,
) -> MellinResult
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    assert!(x > 0.0, "inverse_mellin_cdf needs x > 0");
    assert!(contour.c < 0.0, "contour must lie left of the origin");
    let ln_x = x.ln();
    let kernel = |s: Complex64| (-s * ln_x).exp() / (-s) * phi_at(s + 1.0);
    line_integral(&kernel, ln_x, contour, opts)
}

/// Largest relative defect |f(conj s) − conj f(s)| / |f(s)| over the given
/// heights on the line Re s = c.
pub fn conjugate_symmetry_defect<F: Fn(Complex64) -> Complex64>(
    f: &F,
    c: f64,
    heights: &[f64],
) -> f64 {
    heights
        .iter()
        .map(|&t| {
            let s = Complex64::new(c, t);
            let a = f(s);
            let b = f(s.conj());
            (b - a.conj()).norm() / a.norm().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

struct Tail {
    value: f64,
    err: f64,
    converged: bool,
}

fn segment<G: Fn(f64) -> Complex64 + Sync>(
    g: &G,
    a: f64,
    b: f64,
    abs_tol: f64,
    parallel: bool,
) -> (f64, f64, bool) {
    let o = QuadOptions {
        rel_tol: 1e-12,
        abs_tol,
        noise_rel: 2e-14,
        max_panels: 400,
        parallel,
    };
    let r = integrate(g, &[a, b], &o);
    (r.value.re, r.err, r.converged)
}

/// ∫_T^∞ g. Geometric segments while the oscillation period is longer than
/// the segment, then half-period cycles, each partial-sum sequence
/// extrapolated with Wynn's ε-algorithm.
fn tail_sum<G: Fn(f64) -> Complex64 + Sync>(
    g: &G,
    t0: f64,
    omega: f64,
    scale: f64,
    opts: &MellinOptions,
) -> Tail {
    let target = (opts.abs_tol * std::f64::consts::PI).max(opts.rel_tol * scale);
    let seg_tol = 1e-3 * target;
    let period = if omega > 0.0 {
        std::f64::consts::PI / omega
    } else {
        f64::INFINITY
    };
    let mut fixed = 0.0;
    let mut fixed_err = 0.0;
    let mut all_ok = true;
    let mut pos = t0;

    // Geometric phase.
    if period > t0 {
        let mut sums = Vec::new();
        let mut acc = 0.0;
        let mut estimates = Vec::new();
        while 2.0 * pos - pos <= period && sums.len() < opts.max_tail_segments {
            let (v, e, ok) = segment(g, pos, 2.0 * pos, seg_tol, opts.parallel);
            acc += v;
            fixed_err += e;
            all_ok &= ok;
            sums.push(acc);
            pos *= 2.0;
            estimates.push(wynn_epsilon(&sums));
            if let Some(err) = settled(&estimates) {
                if err < target {
                    return Tail {
                        value: fixed + *estimates.last().unwrap(),
                        err: err + fixed_err,
                        converged: all_ok,
                    };
                }
            }
            if v.abs() < 1e-3 * target && sums.len() >= 3 {
                return Tail {
                    value: fixed + acc,
                    err: fixed_err + v.abs(),
                    converged: all_ok,
                };
            }
        }
        fixed = acc;
    }

    // Cycle phase.
    let mut sums = Vec::new();
    let mut acc = 0.0;
    let mut estimates = Vec::new();
    let mut last_err = f64::INFINITY;
    while sums.len() < opts.max_tail_segments {
        let (v, e, ok) = segment(g, pos, pos + period, seg_tol, opts.parallel);
        acc += v;
        fixed_err += e;
        all_ok &= ok;
        sums.push(acc);
        pos += period;
        estimates.push(wynn_epsilon(&sums));
        if let Some(err) = settled(&estimates) {
            last_err = err;
            if err < target {
                break;
            }
        }
    }
    let est = estimates.last().copied().unwrap_or(0.0);
    Tail {
        value: fixed + est,
        err: last_err + fixed_err,
        converged: all_ok && last_err < target,
    }
}

/// Error estimate from the last three extrapolated values, once there are
/// enough of them.
fn settled(estimates: &[f64]) -> Option<f64> {
    let n = estimates.len();
    if n < 4 {
        return None;
    }
    let e = &estimates[n - 3..];
    Some((e[2] - e[1]).abs() + (e[2] - e[0]).abs())
}

/// Wynn's ε-algorithm on a sequence of partial sums; returns the entry in
/// the deepest even column built from the last (at most 31) sums.
pub fn wynn_epsilon(sums: &[f64]) -> f64 {
    let start = sums.len().saturating_sub(31);
    let s = &sums[start..];
    let n = s.len();
    if n == 0 {
        return 0.0;
    }
    if n < 3 {
        return s[n - 1];
    }
    // prev = column k−1, cur = column k; column k has n − k entries.
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            if d == 0.0 || !d.is_finite() {
                // Exact convergence in this column.
                return if k % 2 == 0 { cur[j + 1] } else { best };
            }
            next.push(prev[j + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            let v = *cur.last().unwrap();
            if v.is_finite() {
                best = v;
            } else {
                break;
            }
        }
    }
    best
}
