//! Complex log-gamma, Pochhammer symbols, Tricomi's Ψ with a complex second
//! argument, and the Ξ factor built on it.

use num_complex::Complex64;

use crate::error::{OutageError, Result};
use crate::quadrature::{integrate, QuadOptions};

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_C: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn lanczos(z: Complex64) -> Complex64 {
    // ln Γ(z) for Re z ≥ 0.5.
    let z = z - 1.0;
    let mut a = c64(LANCZOS_C[0]);
    for (k, ck) in LANCZOS_C.iter().enumerate().skip(1) {
        a += *ck / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + HALF_LN_2PI + a.ln()
}

/// ln sin(πz), stable for large |Im z|. The branch is fixed only modulo 2πi.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let ipz = Complex64::new(0.0, std::f64::consts::PI) * z;
    if z.im.abs() < 10.0 {
        return (z * std::f64::consts::PI).sin().ln();
    }
    // sin(πz) = (i/2)·e^{−ipz}(1 − e^{2ipz}) for Im z > 0, mirrored below.
    let ln_half_i = Complex64::new(-std::f64::consts::LN_2, std::f64::consts::FRAC_PI_2);
    if z.im > 0.0 {
        -ipz + (c64(1.0) - (ipz * 2.0).exp()).ln() + ln_half_i
    } else {
        ipz + (c64(1.0) - (-ipz * 2.0).exp()).ln() + ln_half_i.conj()
    }
}

/// Principal branch of ln Γ(z).
///
/// For −60 < Re z < 0.5 the upward recurrence keeps the principal branch;
/// further left the reflection formula is used and the imaginary part is
/// only determined modulo 2π.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(OutageError::InvalidConfig(format!(
            "ln_gamma of non-finite {z}"
        )));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(OutageError::PoleAtNonpositiveInteger(z.re));
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    if z.re > -60.0 {
        let n = (0.5 - z.re).ceil() as usize;
        let mut acc = lanczos(z + n as f64);
        for k in 0..n {
            acc -= (z + k as f64).ln();
        }
        return Ok(acc);
    }
    let ln_pi = std::f64::consts::PI.ln();
    Ok(c64(ln_pi) - ln_sin_pi(z) - lanczos(c64(1.0) - z))
}

/// Γ(z) = exp(ln Γ(z)).
pub fn gamma(z: Complex64) -> Result<Complex64> {
    ln_gamma(z).map(|l| l.exp())
}

/// ln Γ(x) for real x > 0.
pub fn ln_gamma_real(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma_real needs x > 0");
    lanczos(c64(x)).re
}

/// n! as a float; exact for n ≤ 22.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Rising factorial (x)_n.
pub fn pochhammer(x: Complex64, n: usize) -> Complex64 {
    (0..n).fold(c64(1.0), |acc, k| acc * (x + k as f64))
}

/// e^v − 1 without cancellation near v = 0.
pub fn expm1(v: Complex64) -> Complex64 {
    let em1 = v.re.exp_m1();
    let (s, c) = v.im.sin_cos();
    let half = (0.5 * v.im).sin();
    Complex64::new(em1 * c - 2.0 * half * half, v.re.exp() * s)
}

/// Value of a quadrature-backed special function with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub value: Complex64,
    pub err: f64,
    /// False when the quadrature hit its panel budget.
    pub converged: bool,
}

const PSI_OPTS: QuadOptions = QuadOptions {
    rel_tol: 1e-12,
    abs_tol: 0.0,
    noise_rel: 2e-14,
    max_panels: 600,
    parallel: false,
};

/// Tricomi's confluent hypergeometric function Ψ(a, b; z) = U(a, b, z) for
/// real a > 0, complex b and real z > 0, from
///
/// Ψ(a,b;z) = 1/Γ(a) ∫₀^∞ e^{−zt} t^{a−1} (1+t)^{b−a−1} dt.
///
/// With t = e^v − 1 the integrand becomes
/// exp(−z·expm1(v) + (a−1)·ln expm1(v) + (b−a)v). When Im b ≠ 0 the path is
/// bent to run up the imaginary axis to iθ (sign θ = sign Im b) and then
/// parallel to the real axis, which turns the e^{i·Im(b)·v} oscillation into
/// exponential decay.
pub fn tricomi_psi(a: f64, b: Complex64, z: f64) -> Result<PsiValue> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(OutageError::InvalidConfig(format!(
            "tricomi_psi needs a > 0, got {a}"
        )));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(OutageError::InvalidConfig(format!(
            "tricomi_psi needs z > 0, got {z}"
        )));
    }
    if !(b.re.is_finite() && b.im.is_finite()) {
        return Err(OutageError::InvalidConfig(format!(
            "tricomi_psi needs finite b, got {b}"
        )));
    }
    let beta = b - a;
    let lg_a = ln_gamma_real(a);
    let log_integrand = move |v: Complex64| -> Complex64 {
        let e = expm1(v);
        let mut l = -z * e + beta * v - lg_a;
        if a != 1.0 {
            l += (a - 1.0) * e.ln();
        }
        l
    };

    let theta = if beta.im == 0.0 {
        0.0
    } else {
        beta.im.signum() * (2.0 / z).sqrt().min(1.2)
    };

    let mut value = c64(0.0);
    let mut err = 0.0;
    let mut converged = true;
    let mut vertical_scale = 0.0;

    if theta != 0.0 {
        // Vertical leg v = iθw, w ∈ [0, w_max].
        let lam = beta.im.abs() * theta.abs();
        let w_max = ((60.0 + 2.0 * (a - 1.0).max(0.0)) / lam).min(1.0);
        let leg = |w: f64| {
            let v = Complex64::new(0.0, theta * w);
            log_integrand(v).exp() * Complex64::new(0.0, theta)
        };
        let breaks: Vec<f64> = [0.0, 1.0 / 64.0, 1.0 / 16.0, 0.25, 1.0]
            .iter()
            .map(|f| f * w_max)
            .collect();
        let r = integrate(&leg, &breaks, &PSI_OPTS);
        value += r.value;
        err += r.err;
        converged &= r.converged;
        vertical_scale = r.l1;
        if w_max < 1.0 {
            // Remaining vertical stretch and horizontal leg are below e^{−60}
            // of the leg's mass; bound them by the endpoint magnitude.
            let tail = leg(w_max).norm() * theta.abs() * (1.0 - w_max) + leg(w_max).norm() * 40.0;
            return Ok(PsiValue {
                value,
                err: err + tail,
                converged,
            });
        }
    }

    // Horizontal leg v = u + iθ, u ∈ [0, U].
    let at = |u: f64| log_integrand(Complex64::new(u, theta));
    let (upper, bound) = horizontal_extent(&at, z);
    if theta != 0.0 && bound < 1e-16 * vertical_scale {
        return Ok(PsiValue {
            value,
            err: err + bound,
            converged,
        });
    }
    let leg = |u: f64| at(u).exp();
    let mut breaks = vec![0.0];
    breaks.extend([1.0 / 32.0, 0.25, 1.0].iter().map(|f| f * upper));
    // Accuracy is judged against the whole value, not this leg alone.
    let opts = QuadOptions {
        abs_tol: 0.1 * PSI_OPTS.rel_tol * value.norm(),
        ..PSI_OPTS
    };
    let r = integrate(&leg, &breaks, &opts);
    value += r.value;
    err += r.err;
    converged &= r.converged;
    Ok(PsiValue {
        value,
        err,
        converged,
    })
}

/// Scans the horizontal leg for the point past its peak where the log
/// magnitude has fallen 40 below the peak. Returns that abscissa and a
/// rough bound on ∫|integrand|.
fn horizontal_extent<F: Fn(f64) -> Complex64>(at: &F, z: f64) -> (f64, f64) {
    let mut h = (2.0 / z).min(0.25);
    let mut u: f64 = 0.0;
    let mut peak = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    let mut mass = 0.0;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    loop {
        let lm = at(u.max(1e-300)).re;
        samples.push((u, lm));
        peak = peak.max(lm);
        if lm < peak - 40.0 && lm < prev || u > 1e3 {
            break;
        }
        prev = lm;
        u += h;
        h *= 1.2;
    }
    for w in samples.windows(2) {
        let (u0, l0) = w[0];
        let (u1, l1) = w[1];
        mass += (u1 - u0) * l0.max(l1).exp();
    }
    (u, mass)
}

/// Ξ(a, α, A, φ)(s) = A^{φ+a+αs−1}·Ψ(φ, φ+a+αs; A) for A > 0. The A = 0
/// case is only defined for α = −1, φ = 1, where it equals Γ(a − s).
pub fn xi(a: f64, alpha: f64, big_a: f64, phi: f64, s: Complex64) -> Result<PsiValue> {
    if big_a == 0.0 {
        if alpha != -1.0 || phi != 1.0 {
            return Err(OutageError::InvalidDegenerateParameters);
        }
        let g = gamma(c64(a) - s)?;
        return Ok(PsiValue {
            value: g,
            err: 1e-14 * g.norm(),
            converged: true,
        });
    }
    if big_a < 0.0 {
        return Err(OutageError::InvalidConfig(format!(
            "Xi needs A ≥ 0, got {big_a}"
        )));
    }
    let b = s * alpha + (phi + a);
    let psi = tricomi_psi(phi, b, big_a)?;
    let pre = ((b - 1.0) * big_a.ln()).exp();
    Ok(PsiValue {
        value: pre * psi.value,
        err: pre.norm() * psi.err,
        converged: psi.converged,
    })
}
