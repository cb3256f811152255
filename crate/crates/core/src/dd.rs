//! Compensated and double-double summation.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        for x in iter {
            k.add(x);
        }
        k
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum hi + lo with |lo| ≤ ulp(hi)/2, about 32 significant digits.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = Dd::ONE;
        let mut base = self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// Natural log of a positive double, accurate to double-double precision.
    pub fn ln(x: f64) -> Self {
        assert!(x > 0.0 && x.is_finite(), "ln of non-positive value");
        // x = m·2^e with m in [1/√2, √2), then ln m = 2·atanh((m−1)/(m+1)).
        let bits = x.to_bits();
        let mut e = ((bits >> 52) & 0x7ff) as i64 - 1023;
        let mut m = f64::from_bits((bits & !(0x7ff << 52)) | (1023 << 52));
        if e == -1023 {
            // Subnormal input.
            let y = x * 2f64.powi(64);
            return Dd::ln(y) - Dd::LN2 * Dd::from(64.0);
        }
        if m > std::f64::consts::SQRT_2 {
            m *= 0.5;
            e += 1;
        }
        let u = (Dd::from(m) - Dd::ONE) / (Dd::from(m) + Dd::ONE);
        let u2 = u * u;
        let mut term = u;
        let mut series = Dd::ZERO;
        let mut k = 1.0;
        loop {
            let t = term / Dd::from(k);
            series = series + t;
            if t.hi.abs() < 1e-34 * series.hi.abs().max(1e-300) || k > 200.0 {
                break;
            }
            term = term * u2;
            k += 2.0;
        }
        series * Dd::from(2.0) + Dd::LN2 * Dd::from(e as f64)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        Dd::new(q1, q2) + Dd::from(q3)
    }
}

/// Running double-double sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct DdSum(Dd);

impl DdSum {
    pub fn add(&mut self, x: f64) {
        self.0 = self.0 + Dd::from(x);
    }

    pub fn add_dd(&mut self, x: Dd) {
        self.0 = self.0 + x;
    }

    pub fn value(&self) -> Dd {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.to_f64()
    }
}

/// Which accumulator a signed permutation sum uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Accumulator {
    /// Terms sorted by decreasing magnitude, then Neumaier-summed.
    #[default]
    Compensated,
    /// Double-double accumulation; slower, for badly cancelling sums.
    DoubleDouble,
}

/// Sums `terms` with the chosen accumulator. Compensated summation sorts by
/// decreasing magnitude first.
pub fn signed_sum(terms: &mut [f64], acc: Accumulator) -> f64 {
    match acc {
        Accumulator::Compensated => {
            terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
            terms.iter().copied().collect::<KahanSum>().total()
        }
        Accumulator::DoubleDouble => {
            let mut s = DdSum::default();
            for t in terms.iter() {
                s.add(*t);
            }
            s.total()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::default();
        k.add(1.0);
        for _ in 0..1000 {
            k.add(1e-16);
        }
        k.add(-1.0);
        assert!((k.total() - 1e-13).abs() < 1e-25, "{}", k.total());
    }

    #[test]
    fn dd_arithmetic() {
        let third = Dd::ONE / Dd::from(3.0);
        let back = third * Dd::from(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        let x = Dd::from(1.0 + 2f64.powi(-40));
        let sq = x * x - Dd::ONE;
        // (1+ε)² − 1 = 2ε + ε², with ε² far below double resolution of 1.
        let eps = 2f64.powi(-40);
        assert_eq!(sq.hi, 2.0 * eps + eps * eps);
        assert_eq!(Dd::from(1.5).powi(3).to_f64(), 3.375);
    }

    #[test]
    fn dd_ln_matches_std() {
        for x in [1e-300, 0.3, 1.0, 1.4, 2.0, 10.0, 1e200, 5e-320] {
            let l = Dd::ln(x);
            assert!(
                (l.to_f64() - x.ln()).abs() <= 2.0 * f64::EPSILON * x.ln().abs().max(1e-300),
                "{x}"
            );
        }
        assert_eq!(Dd::ln(1.0).to_f64(), 0.0);
        // ln 2 to double-double precision.
        let d = Dd::ln(2.0) - Dd::LN2;
        assert!(d.to_f64().abs() < 1e-31);
        // ln(1+2^-30) = 2^-30 − 2^-61 + 2^-92/3 − …
        let e = 2f64.powi(-30);
        let v = Dd::ln(1.0 + e) - Dd::from(e) + Dd::from(e * e / 2.0);
        assert!((v.to_f64() - (e * e * e / 3.0 - e * e * e * e / 4.0)).abs() < 1e-39);
    }

    #[test]
    fn signed_sum_modes_agree_on_benign_input() {
        let mut t = vec![3.0, -1.0, 0.5, 1e-20];
        let mut u = t.clone();
        assert_eq!(signed_sum(&mut t, Accumulator::Compensated), 2.5);
        assert_eq!(signed_sum(&mut u, Accumulator::DoubleDouble), 2.5);
    }

    #[test]
    fn double_double_survives_cancellation() {
        let mut t = vec![1e17, 1.0, -1e17, 1.0];
        assert_eq!(signed_sum(&mut t, Accumulator::DoubleDouble), 2.0);
    }
}
