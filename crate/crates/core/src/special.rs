//! Scalar special functions used by the entropy closed forms and the baselines.
//!
//! Everything here is pure and deterministic. `erf`/`erfc` are a port of the
//! FreeBSD `s_erf.c` rational approximations so results do not depend on the
//! platform libm.

// The coefficients are kept exactly as published.
#![allow(clippy::excessive_precision)]

use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("{func}: argument out of domain ({detail})")]
    OutOfDomain { func: &'static str, detail: String },
}

fn domain(func: &'static str, detail: String) -> DomainError {
    DomainError::OutOfDomain { func, detail }
}

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self, DomainError> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(domain("Probability::new", format!("{value} not in [0, 1]")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = DomainError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

// s_erf.c coefficients (Sun Microsystems, 1993).
const ERX: f64 = 8.45062911510467529297e-01;
const EFX: f64 = 1.28379167095512586316e-01;
const EFX8: f64 = 1.02703333676410069053e+00;
const PP0: f64 = 1.28379167095512558561e-01;
const PP1: f64 = -3.25042107247001499370e-01;
const PP2: f64 = -2.84817495755985104766e-02;
const PP3: f64 = -5.77027029648944159157e-03;
const PP4: f64 = -2.37630166566501626084e-05;
const QQ1: f64 = 3.97917223959155352819e-01;
const QQ2: f64 = 6.50222499887672944485e-02;
const QQ3: f64 = 5.08130628187576562776e-03;
const QQ4: f64 = 1.32494738004321644526e-04;
const QQ5: f64 = -3.96022827877536812320e-06;
const PA0: f64 = -2.36211856075265944077e-03;
const PA1: f64 = 4.14856118683748331666e-01;
const PA2: f64 = -3.72207876035701323847e-01;
const PA3: f64 = 3.18346619901161753674e-01;
const PA4: f64 = -1.10894694282396677476e-01;
const PA5: f64 = 3.54783043256182359371e-02;
const PA6: f64 = -2.16637559486879084300e-03;
const QA1: f64 = 1.06420880400844228286e-01;
const QA2: f64 = 5.40397917702171048937e-01;
const QA3: f64 = 7.18286544141962662868e-02;
const QA4: f64 = 1.26171219808761642112e-01;
const QA5: f64 = 1.36370839120290507362e-02;
const QA6: f64 = 1.19844998467991074170e-02;
const RA0: f64 = -9.86494403484714822705e-03;
const RA1: f64 = -6.93858572707181764372e-01;
const RA2: f64 = -1.05586262253232909814e+01;
const RA3: f64 = -6.23753324503260060396e+01;
const RA4: f64 = -1.62396669462573470355e+02;
const RA5: f64 = -1.84605092906711035994e+02;
const RA6: f64 = -8.12874355063065934246e+01;
const RA7: f64 = -9.81432934416914548592e+00;
const SA1: f64 = 1.96512716674392571292e+01;
const SA2: f64 = 1.37657754143519042600e+02;
const SA3: f64 = 4.34565877475229228821e+02;
const SA4: f64 = 6.45387271733267880336e+02;
const SA5: f64 = 4.29008140027567833386e+02;
const SA6: f64 = 1.08635005541779435134e+02;
const SA7: f64 = 6.57024977031928170135e+00;
const SA8: f64 = -6.04244152148580987438e-02;
const RB0: f64 = -9.86494292470009928597e-03;
const RB1: f64 = -7.99283237680523006574e-01;
const RB2: f64 = -1.77579549177547519889e+01;
const RB3: f64 = -1.60636384855821916062e+02;
const RB4: f64 = -6.37566443368389627722e+02;
const RB5: f64 = -1.02509513161107724954e+03;
const RB6: f64 = -4.83519191608651397019e+02;
const SB1: f64 = 3.03380607434824582924e+01;
const SB2: f64 = 3.25792512996573918826e+02;
const SB3: f64 = 1.53672958608443695994e+03;
const SB4: f64 = 3.19985821950859553908e+03;
const SB5: f64 = 2.55305040643316442583e+03;
const SB6: f64 = 4.74528541206955367215e+02;
const SB7: f64 = -2.24409524465858183362e+01;

const VERY_TINY: f64 = 2.848094538889218e-306;
const TINY: f64 = 1.3877787807814457e-17; // 2^-56
const SMALL: f64 = 3.725290298461914e-9; // 2^-28

#[inline]
fn erf_small_ratio(z: f64) -> f64 {
    let r = PP0 + z * (PP1 + z * (PP2 + z * (PP3 + z * PP4)));
    let s = 1.0 + z * (QQ1 + z * (QQ2 + z * (QQ3 + z * (QQ4 + z * QQ5))));
    r / s
}

#[inline]
fn erf_mid_ratio(s: f64) -> (f64, f64) {
    let p = PA0 + s * (PA1 + s * (PA2 + s * (PA3 + s * (PA4 + s * (PA5 + s * PA6)))));
    let q = 1.0 + s * (QA1 + s * (QA2 + s * (QA3 + s * (QA4 + s * (QA5 + s * QA6)))));
    (p, q)
}

/// `erfc(x) * x` for `1.25 <= x < 28`, computed as `exp(-x^2 - 0.5625 + R/S)`.
#[inline]
fn erfc_tail_scaled(x: f64) -> f64 {
    let s = 1.0 / (x * x);
    let (r, ss) = if x < 1.0 / 0.35 {
        (
            RA0 + s * (RA1 + s * (RA2 + s * (RA3 + s * (RA4 + s * (RA5 + s * (RA6 + s * RA7)))))),
            1.0 + s
                * (SA1
                    + s * (SA2 + s * (SA3 + s * (SA4 + s * (SA5 + s * (SA6 + s * (SA7 + s * SA8))))))),
        )
    } else {
        (
            RB0 + s * (RB1 + s * (RB2 + s * (RB3 + s * (RB4 + s * (RB5 + s * RB6))))),
            1.0 + s * (SB1 + s * (SB2 + s * (SB3 + s * (SB4 + s * (SB5 + s * (SB6 + s * SB7)))))),
        )
    };
    // z keeps the high 32 bits of x so that z*z is exact
    let z = f64::from_bits(x.to_bits() & 0xffff_ffff_0000_0000);
    (-z * z - 0.5625).exp() * ((z - x) * (z + x) + r / ss).exp()
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let value = if ax < 0.84375 {
        if ax < SMALL {
            if ax < VERY_TINY {
                0.125 * (8.0 * ax + EFX8 * ax)
            } else {
                ax + EFX * ax
            }
        } else {
            ax + ax * erf_small_ratio(ax * ax)
        }
    } else if ax < 1.25 {
        let (p, q) = erf_mid_ratio(ax - 1.0);
        ERX + p / q
    } else if ax >= 6.0 {
        1.0
    } else {
        1.0 - erfc_tail_scaled(ax) / ax
    };
    if x < 0.0 {
        -value
    } else {
        value
    }
}

/// Complementary error function, accurate in the far right tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let neg = x < 0.0;
    if ax < 0.84375 {
        let t = if ax < TINY {
            ax
        } else {
            let y = erf_small_ratio(ax * ax);
            if ax < 0.25 {
                ax + ax * y
            } else {
                0.5 + (ax * y + (ax - 0.5))
            }
        };
        return if neg { 1.0 + t } else { 1.0 - t };
    }
    if ax < 1.25 {
        let (p, q) = erf_mid_ratio(ax - 1.0);
        return if neg { 1.0 + ERX + p / q } else { 1.0 - ERX - p / q };
    }
    if ax < 28.0 {
        if neg && ax > 6.0 {
            return 2.0;
        }
        let r = erfc_tail_scaled(ax) / ax;
        return if neg { 2.0 - r } else { r };
    }
    if neg {
        2.0
    } else {
        0.0
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (std::f64::consts::PI * x).sin();
        return (std::f64::consts::PI / s).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64, DomainError> {
    if x > 0.0 && x.is_finite() {
        Ok(ln_gamma_unchecked(x))
    } else {
        Err(domain("log_gamma", format!("x = {x} must be positive and finite")))
    }
}

const LN_FACT_TABLE: usize = 1 << 18;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..LN_FACT_TABLE)
            .map(|k| if k < 2 { 0.0 } else { ln_gamma_unchecked(k as f64 + 1.0) })
            .collect()
    })
}

#[inline]
fn ln_gamma_fast(x: f64) -> f64 {
    if x.fract() == 0.0 && x >= 1.0 && x < LN_FACT_TABLE as f64 {
        ln_factorials()[x as usize - 1]
    } else {
        ln_gamma_unchecked(x)
    }
}

/// `ln B(a, b)`; integer arguments go through a cached log-factorial table.
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma_fast(a) + ln_gamma_fast(b) - ln_gamma_fast(a + b)
}

const CF_EPS: f64 = 1e-16;
const CF_FPMIN: f64 = 1e-300;

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_FPMIN {
        d = CF_FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    let max_iter = 200 + 10 * (a.max(b).sqrt() as usize);
    for m in 1..=max_iter {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_FPMIN {
            d = CF_FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_FPMIN {
            c = CF_FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_FPMIN {
            d = CF_FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_FPMIN {
            c = CF_FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Both sides of the regularized incomplete beta split at `x`, plus the
/// factor `x^a (1-x)^b / B(a, b)` that links neighbouring parameters:
///
/// `I_x(a+1, b) = I_x(a, b) - front / a` and `I_x(a, b+1) = I_x(a, b) + front / b`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BetaSplit {
    pub lower: f64,
    pub upper: f64,
    pub front: f64,
}

pub(crate) fn beta_split(x: f64, a: f64, b: f64) -> BetaSplit {
    if x <= 0.0 {
        return BetaSplit { lower: 0.0, upper: 1.0, front: 0.0 };
    }
    if x >= 1.0 {
        return BetaSplit { lower: 1.0, upper: 0.0, front: 0.0 };
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        let lower = (front * beta_cf(a, b, x) / a).min(1.0);
        BetaSplit { lower, upper: 1.0 - lower, front }
    } else {
        let upper = (front * beta_cf(b, a, 1.0 - x) / b).min(1.0);
        BetaSplit { lower: 1.0 - upper, upper, front }
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64, DomainError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("reg_inc_beta", format!("x = {x} not in [0, 1]")));
    }
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(domain("reg_inc_beta", format!("a = {a}, b = {b} must be positive")));
    }
    Ok(beta_split(x, a, b).lower)
}

/// `x ln(x / y)` with the `0 ln 0 = 0` convention.
#[inline]
pub(crate) fn xlogy_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

/// Bernoulli KL divergence without domain checks; `+inf` when `q` sits on a
/// boundary that `p` does not.
#[inline]
pub(crate) fn kl_bernoulli_unchecked(p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    xlogy_ratio(p, q) + xlogy_ratio(1.0 - p, 1.0 - q)
}

/// Kullback-Leibler divergence between Bernoulli(p) and Bernoulli(q).
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64, DomainError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("kl_bernoulli", format!("p = {p} not in [0, 1]")));
    }
    if p == q {
        return Ok(0.0);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(domain("kl_bernoulli", format!("q = {q} not in (0, 1)")));
    }
    Ok(kl_bernoulli_unchecked(p, q).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn erf_values() {
        assert_eq!(erf(0.0), 0.0);
        assert_eq!(erfc(0.0), 1.0);
        assert_relative_eq!(erf(1.0), 0.842_700_792_949_714_9, max_relative = 1e-15);
        assert_relative_eq!(erf(1.0), 0.8427007929, epsilon = 1e-10);
        assert_eq!(erf(f64::INFINITY), 1.0);
        assert_eq!(erfc(f64::NEG_INFINITY), 2.0);
        assert_relative_eq!(erfc(10.0), 2.088_487_583_762_544_7e-45, max_relative = 1e-13);
    }

    #[test]
    fn erf_is_odd() {
        for i in 0..2000 {
            let x = i as f64 * 0.004;
            assert_eq!(erf(-x), -erf(x));
        }
    }

    #[test]
    fn erfc_complements_erf() {
        for i in -600..=600 {
            let x = i as f64 * 0.01;
            assert!((erfc(x) - (1.0 - erf(x))).abs() <= 1e-14, "x = {x}");
        }
    }

    #[test]
    fn log_gamma_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(log_gamma(5.0).unwrap(), 3.1780538303, epsilon = 1e-10);
        assert_relative_eq!(log_gamma(0.5).unwrap(), 0.5723649429, epsilon = 1e-10);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn table_matches_lanczos() {
        for k in [1.0, 2.0, 3.0, 10.0, 171.0, 5000.0, 200_000.0] {
            assert_relative_eq!(ln_gamma_fast(k), ln_gamma_unchecked(k), max_relative = 1e-15);
        }
    }

    #[test]
    fn reg_inc_beta_values() {
        assert_relative_eq!(reg_inc_beta(0.5, 1.0, 1.0).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(reg_inc_beta(0.3, 1.0, 2.0).unwrap(), 0.51, max_relative = 1e-13);
        assert!((reg_inc_beta(0.575871, 6.0, 5.0).unwrap() - 0.571_580_777_6).abs() < 1e-9);
        assert_eq!(reg_inc_beta(0.0, 3.0, 4.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(1.0, 3.0, 4.0).unwrap(), 1.0);
        assert!(reg_inc_beta(1.5, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 0.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 1.0, -2.0).is_err());
    }

    #[test]
    fn reg_inc_beta_symmetry() {
        for &(a, b) in &[(0.5, 0.5), (1.0, 3.0), (6.0, 5.0), (40.5, 2.25), (300.0, 900.0)] {
            for i in 0..=50 {
                let x = i as f64 / 50.0;
                let lhs = reg_inc_beta(x, a, b).unwrap() + reg_inc_beta(1.0 - x, b, a).unwrap();
                assert!((lhs - 1.0).abs() <= 1e-12, "a={a} b={b} x={x}");
            }
        }
    }

    #[test]
    fn beta_neighbour_recurrences() {
        for &(x, a, b) in &[(0.3, 4.0, 7.0), (0.8, 20.0, 3.0), (0.55, 100.0, 90.0), (0.9, 5.0, 60.0)] {
            let base = beta_split(x, a, b);
            let up_a = beta_split(x, a + 1.0, b);
            let up_b = beta_split(x, a, b + 1.0);
            assert_relative_eq!(base.lower - base.front / a, up_a.lower, epsilon = 1e-12);
            assert_relative_eq!(base.lower + base.front / b, up_b.lower, epsilon = 1e-12);
        }
    }

    #[test]
    fn kl_values() {
        assert_eq!(kl_bernoulli(0.5, 0.5).unwrap(), 0.0);
        assert_relative_eq!(kl_bernoulli(0.1, 0.3).unwrap(), 0.1163218, epsilon = 1e-7);
        assert_relative_eq!(kl_bernoulli(1.0, 0.5).unwrap(), std::f64::consts::LN_2, max_relative = 1e-15);
        assert_eq!(kl_bernoulli(0.0, 0.0).unwrap(), 0.0);
        assert!(kl_bernoulli(0.3, 0.0).is_err());
        assert!(kl_bernoulli(0.3, 1.0).is_err());
        assert!(kl_bernoulli(1.2, 0.5).is_err());
    }

    #[test]
    fn probability_newtype() {
        assert!(Probability::new(0.0).is_ok());
        assert!(Probability::new(1.0).is_ok());
        assert!(Probability::new(-0.1).is_err());
        assert!(Probability::try_from(f64::NAN).is_err());
    }
}
