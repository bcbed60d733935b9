//! Model parameters, coefficient family, frequency cutoff and region geometry.
//!
//! The weighted Hardy space over the punctured disc carrying the Poincare
//! weight `|log|z|^2|^p` has the orthonormal monomial family with
//!
//! ```text
//! (c_l)^2 = l^(p-1) / (2 pi (p-2)!),   l >= 1,
//! ```
//!
//! everything downstream (kernel series, block splits, certificates) is built
//! from `ln (c_l)^2`. The low/high frequency cutoff is
//! `delta_p = floor((p-2) / (2 |ln r|))` and the radial analysis splits the
//! disc into three regimes: an inner neighbourhood of the puncture
//! `(0, 2 e^-p)`, a middle annulus `(e^-p, b e^(-p^gamma))` and the outer
//! annulus `[b e^(-p^gamma), 1)`.

use crate::error::{Error, Result};
use crate::special::{ln_gamma, LN_2PI};
use serde::{Deserialize, Serialize};

/// Upper bound for the model radius: 1/(4e).
pub const MAX_MODEL_RADIUS: f64 = 0.25 / std::f64::consts::E;

/// Default model radius e^-3; makes the cutoff and the bound constants
/// simple expressions.
pub fn default_radius() -> f64 {
    (-3.0f64).exp()
}

/// Parameters of the punctured-disc model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Tensor power, >= 2.
    pub p: u32,
    /// Model radius, 0 < r < 1/(4e).
    pub r: f64,
    /// Outer-region constant, 0 < b < 1.
    pub b: f64,
    /// Region exponent, 0 < gamma < 1/2.
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(p: u32, r: f64, b: f64, gamma: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
        }
        if !(r > 0.0 && r < MAX_MODEL_RADIUS) {
            return Err(Error::InvalidParameter(format!(
                "r must lie in (0, 1/(4e)) = (0, {MAX_MODEL_RADIUS:.6}), got {r}"
            )));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParameter(format!("b must lie in (0, 1), got {b}")));
        }
        if !(gamma > 0.0 && gamma < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1/2), got {gamma}"
            )));
        }
        Ok(ModelParams { p, r, b, gamma })
    }

    /// Default radius/region constants (r = e^-3, b = 0.5, gamma = 0.25).
    pub fn with_defaults(p: u32) -> Result<Self> {
        Self::new(p, default_radius(), 0.5, 0.25)
    }

    /// Same constants, different tensor power.
    pub fn at_power(&self, p: u32) -> Result<Self> {
        Self::new(p, self.r, self.b, self.gamma)
    }

    pub fn delta_p(&self) -> u32 {
        delta_p(self.p, self.r).expect("validated parameters")
    }

    pub fn lemma_constants(&self) -> Lemma2Constants {
        lemma2_constants(self.r).expect("validated parameters")
    }

    pub fn regions(&self) -> Result<RegionPartition> {
        region_partition(self.p, self.b, self.gamma)
    }
}

/// ln((c_l)^2) = (p-1) ln l - ln(2 pi) - ln (p-2)!.
///
/// Exact to a few ulps of the log value. The normalisation
/// `ln(2 pi) + ln Gamma(p-1)` is grouped into a single constant so that
/// differences at fixed p telescope cleanly:
/// `log_coeff_sq(p, m) - log_coeff_sq(p, m-1) = (p-1)(ln m - ln(m-1))`
/// holds to better than 1e-12 absolute across the desk-scale range.
pub fn log_coeff_sq(p: u32, l: u64) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
    }
    if l < 1 {
        return Err(Error::InvalidParameter("l must be >= 1".into()));
    }
    let norm = LN_2PI + ln_gamma((p - 1) as f64);
    Ok((p - 1) as f64 * (l as f64).ln() - norm)
}

/// The low/high frequency cutoff floor((p-2) / (2 |ln r|)).
///
/// Quotients within 1e-9 of an integer snap to it, so that inputs meant to
/// hit the boundary exactly (r = e^-3 and p-2 divisible by 6, say) are not
/// thrown to the wrong side by the rounding of `ln`.
pub fn delta_p(p: u32, r: f64) -> Result<u32> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
    }
    if !(r > 0.0 && r < MAX_MODEL_RADIUS) {
        return Err(Error::InvalidParameter(format!("r out of (0, 1/(4e)): {r}")));
    }
    let q = (p - 2) as f64 / (2.0 * r.ln().abs());
    let nearest = q.round();
    let floor = if (q - nearest).abs() < 1e-9 { nearest } else { q.floor() };
    Ok(floor as u32)
}

/// The constants of the coefficient-tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Constants {
    /// alpha' = 1 / (4 |ln r|).
    pub alpha_prime: f64,
    /// A' = 1 / (2 alpha') = 2 |ln r|.
    pub a_prime: f64,
    /// c' = r e^(2|ln r|) |ln((2r)^2)|^(2|ln r|). May overflow to +inf for
    /// very small r; `ln_c_prime` is always finite.
    pub c_prime: f64,
    /// ln c', computed directly in log space.
    pub ln_c_prime: f64,
}

impl Lemma2Constants {
    /// Radius bound c' p^(-A') of the tail estimates, as a natural log.
    pub fn ln_radius_bound(&self, p: u32) -> f64 {
        self.ln_c_prime - self.a_prime * (p as f64).ln()
    }
}

/// Computes alpha', A' and c' from the model radius.
pub fn lemma2_constants(r: f64) -> Result<Lemma2Constants> {
    if !(r > 0.0 && r < MAX_MODEL_RADIUS) {
        return Err(Error::InvalidParameter(format!("r out of (0, 1/(4e)): {r}")));
    }
    let lr = r.ln().abs();
    let alpha_prime = 1.0 / (4.0 * lr);
    let a_prime = 2.0 * lr;
    // |ln((2r)^2)| = 2 |ln(2r)|; positive since 2r < 1/(2e) < 1.
    let ln_log2r_sq = (2.0 * (2.0 * r).ln().abs()).ln();
    let ln_c_prime = r.ln() + 2.0 * lr + 2.0 * lr * ln_log2r_sq;
    Ok(Lemma2Constants {
        alpha_prime,
        a_prime,
        c_prime: ln_c_prime.exp(),
        ln_c_prime,
    })
}

/// A radial interval inside the unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RadialInterval {
    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    /// The interval in the variable t = |ln(radius^2)| = -2 ln(radius).
    /// Radii map to t decreasingly: (lo, hi) -> (t_of(hi), t_of(lo)).
    pub fn t_range(&self) -> (f64, f64) {
        (-2.0 * self.hi.ln(), -2.0 * self.lo.ln())
    }
}

/// The three radial regimes for given (p, b, gamma).
///
/// Inner and middle overlap on (e^-p, 2 e^-p), so their union covers the
/// whole punctured neighbourhood (0, b e^(-p^gamma)); middle and outer share
/// the endpoint b e^(-p^gamma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPartition {
    /// (0, 2 e^-p)
    pub inner: RadialInterval,
    /// (e^-p, b e^(-p^gamma))
    pub middle: RadialInterval,
    /// [b e^(-p^gamma), 1)
    pub outer: RadialInterval,
}

/// Builds the radial regions. Rejects p large enough that e^-p underflows
/// (p > 700); sweeps at that scale work in t directly.
pub fn region_partition(p: u32, b: f64, gamma: f64) -> Result<RegionPartition> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
    }
    if p > 700 {
        return Err(Error::InvalidParameter(format!(
            "p = {p} too large for radial representation (e^-p underflows)"
        )));
    }
    if !(b > 0.0 && b < 1.0) || !(gamma > 0.0 && gamma < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < b < 1 and 0 < gamma < 1/2, got b={b}, gamma={gamma}"
        )));
    }
    let e_mp = (-(p as f64)).exp();
    let split = b * (-((p as f64).powf(gamma))).exp();
    Ok(RegionPartition {
        inner: RadialInterval { lo: 0.0, hi: 2.0 * e_mp },
        middle: RadialInterval { lo: e_mp, hi: split },
        outer: RadialInterval { lo: split, hi: 1.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coeff_base_cases() {
        // p = 2: (c_l)^2 = l / (2 pi).
        let want = (1.0f64 / (2.0 * std::f64::consts::PI)).ln();
        assert!((log_coeff_sq(2, 1).unwrap() - want).abs() < 1e-14);
        let want5 = (5.0f64).ln() - LN_2PI;
        assert!((log_coeff_sq(2, 5).unwrap() - want5).abs() < 1e-14);
    }

    #[test]
    fn coeff_exact_integer_oracle() {
        // (c_3^(10))^2 = 3^9 / (2 pi 8!): 3^9 = 19683 and 8! = 40320 exactly.
        let want = (19683.0f64).ln() - LN_2PI - (40320.0f64).ln();
        let got = log_coeff_sq(10, 3).unwrap();
        assert!((got - want).abs() <= 1e-14 * want.abs(), "got {got} want {want}");
    }

    #[test]
    fn coeff_ratio_step() {
        for p in [2u32, 7, 33, 120, 500] {
            let d = log_coeff_sq(p, 2).unwrap() - log_coeff_sq(p, 1).unwrap();
            let want = (p - 1) as f64 * std::f64::consts::LN_2;
            assert!((d - want).abs() < 1e-12, "p={p}: {d} vs {want}");
        }
    }

    #[test]
    fn coeff_domain_errors() {
        assert!(log_coeff_sq(1, 1).is_err());
        assert!(log_coeff_sq(5, 0).is_err());
    }

    #[test]
    fn cutoff_examples() {
        let r = default_radius();
        assert_eq!(delta_p(2, r).unwrap(), 0);
        assert_eq!(delta_p(20, r).unwrap(), 3);
        // p = 22, r = 0.05: floor(20 / (2 ln 20)) = floor(3.338) = 3.
        assert_eq!(delta_p(22, 0.05).unwrap(), 3);
        assert!(delta_p(20, 0.5).is_err());
        assert!(delta_p(1, r).is_err());
    }

    #[test]
    fn lemma_constants_at_default_radius() {
        let c = lemma2_constants(default_radius()).unwrap();
        assert!((c.alpha_prime - 1.0 / 12.0).abs() < 1e-15);
        assert!((c.a_prime - 6.0).abs() < 1e-12);
        // c' = e^3 (6 - ln 4)^6, by direct arithmetic.
        let want = 3.0f64.exp() * (6.0 - 4.0f64.ln()).powi(6);
        assert!((c.c_prime - want).abs() < 1e-9 * want, "{} vs {want}", c.c_prime);
        assert!((c.ln_c_prime - want.ln()).abs() < 1e-12);
        // A' alpha' = 1/2 to machine precision.
        assert!((c.a_prime * c.alpha_prime - 0.5).abs() < 1e-15);
    }

    #[test]
    fn region_examples() {
        let reg = region_partition(100, 0.5, 0.25).unwrap();
        let want = 0.5 * (-(100.0f64.powf(0.25))).exp();
        assert!((reg.outer.lo - want).abs() < 1e-18);
        assert_eq!(reg.middle.hi, reg.outer.lo);

        let reg2 = region_partition(2, 0.5, 0.25).unwrap();
        assert_eq!(reg2.inner.lo, 0.0);
        assert!((reg2.inner.hi - 2.0 * (-2.0f64).exp()).abs() < 1e-16);
        // inner.hi / middle.lo = 2 always.
        assert!((reg2.inner.hi / reg2.middle.lo - 2.0).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1, 0.01, 0.5, 0.25).is_err());
        assert!(ModelParams::new(5, 0.2, 0.5, 0.25).is_err());
        assert!(ModelParams::new(5, 0.01, 1.0, 0.25).is_err());
        assert!(ModelParams::new(5, 0.01, 0.5, 0.5).is_err());
        assert!(ModelParams::with_defaults(2).is_ok());
    }

    proptest! {
        // Floor characterisation: 2 d |ln r| <= p-2 < 2 (d+1) |ln r|,
        // up to the snapping window on the left edge.
        #[test]
        fn cutoff_floor_characterisation(p in 2u32..600, r in 1e-8f64..0.0919) {
            let d = delta_p(p, r).unwrap() as f64;
            let lr = r.ln().abs();
            let lhs = 2.0 * d * lr;
            let rhs = 2.0 * (d + 1.0) * lr;
            let pm2 = (p - 2) as f64;
            prop_assert!(lhs <= pm2 + 1e-6 * lr.max(1.0));
            prop_assert!(pm2 < rhs + 1e-6 * lr.max(1.0));
        }

        #[test]
        fn coeff_recurrence_spot(p in 2u32..500, m in 2u64..10_000) {
            let lhs = log_coeff_sq(p, m).unwrap() - log_coeff_sq(p, m - 1).unwrap();
            let rhs = (p - 1) as f64 * ((m as f64).ln() - ((m - 1) as f64).ln());
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn lemma_constants_half_identity(r in 1e-6f64..0.0919) {
            let c = lemma2_constants(r).unwrap();
            prop_assert!((c.a_prime * c.alpha_prime - 0.5).abs() <= f64::EPSILON);
            prop_assert!(c.c_prime > 0.0);
        }
    }
}
