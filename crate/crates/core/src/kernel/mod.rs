//! Series evaluation for the punctured-disc kernel.
//!
//! Everything here reduces to weighted power sums of the index l,
//!
//! ```text
//! S_k = sum_{l >= 1} l^k (c_l)^2 s^l,   k = 0, 1, 2,   s = |z|^2,
//! ```
//!
//! with log-weights `(p-1) ln l + l ln s - ln(2 pi (p-2)!)`, which are
//! concave in l and peak at `l* = (p-1)/t`, `t = |ln s|`. The kernel
//! function is `B_p = t^p S_0`, and the Fubini-Study/Poincare quotient is
//!
//! ```text
//! Q = t^2 (S0 S2 - S1^2) / (2 pi p S0^2) = t^2 V / (2 pi p),
//! ```
//!
//! where V is the variance of the normalized weight distribution. The
//! numerator `S0 S2 - S1^2` is never formed by subtraction: near the
//! plateau that difference sits ~p relative digits below the products, so
//! it is always computed as `S0^2 V` with V from a two-pass centered
//! accumulation on weights normalized by their block maximum.

mod certificates;

pub use certificates::{certificate_eval, CertificateId};

use crate::error::{Error, Result};
use crate::logval::SignedLogValue;
use crate::model::{delta_p, ModelParams};
use crate::special::{ln_gamma, LN_2PI};
use serde::{Deserialize, Serialize};

/// Default truncation depth: terms more than this many nats below the
/// block maximum are dropped.
pub const DEFAULT_TOL_NATS: f64 = 40.0;

/// Hard cap on the number of summed terms per block.
pub const DEFAULT_TERM_CAP: u64 = 10_000_000;

/// Weighted power sums S0, S1, S2 plus the derived mean and centered
/// variance of the weight distribution.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentTriple {
    pub s0: SignedLogValue,
    pub s1: SignedLogValue,
    pub s2: SignedLogValue,
    /// mu = S1/S0, in ordinary f64 (always O(term window)).
    pub mean: f64,
    /// V = S2/S0 - mu^2 >= 0, computed by centered accumulation.
    pub variance: f64,
    pub terms_used: u64,
    pub peak_index: u64,
}

/// The four blocks of the double series split at delta_p.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitQuadruple {
    pub i1: SignedLogValue,
    pub i2: SignedLogValue,
    pub i3: SignedLogValue,
    pub i4: SignedLogValue,
    pub delta: u32,
}

impl SplitQuadruple {
    /// I1 + I2 + I3 + I4; equals S0 S2 - S1^2.
    pub fn total(&self) -> SignedLogValue {
        self.i1 + self.i2 + self.i3 + self.i4
    }
}

/// A sample of the Fubini-Study/Poincare quotient at one radius.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FsQuotientSample {
    pub radius: f64,
    /// t = |ln(radius^2)|.
    pub t: f64,
    /// Q = t^2 V / (2 pi p), nonnegative.
    pub quotient: SignedLogValue,
    /// B_p = t^p S0.
    pub bergman: SignedLogValue,
}

// ---------------------------------------------------------------------------
// Block summation machinery.

/// Log-weight of index l (without the p-normalisation constant).
#[inline]
fn ln_weight_raw(pm1: f64, ln_s: f64, l: f64) -> f64 {
    pm1 * l.ln() + l * ln_s
}

struct BlockMoments {
    s0: SignedLogValue,
    s1: SignedLogValue,
    s2: SignedLogValue,
    mean: f64,
    variance: f64,
    terms: u64,
    peak: u64,
}

impl BlockMoments {
    fn empty() -> Self {
        BlockMoments {
            s0: SignedLogValue::ZERO,
            s1: SignedLogValue::ZERO,
            s2: SignedLogValue::ZERO,
            mean: 0.0,
            variance: 0.0,
            terms: 0,
            peak: 0,
        }
    }
}

/// Sums l^k (c_l)^2 s^l for l in [lo, hi] with per-block normalisation.
///
/// `tol_nats = None` sums the whole range (used for the finite low block);
/// otherwise the summation window is the contiguous set of indices whose
/// log-weight stays within `tol_nats` (+ margin) of the block maximum. The
/// weight is concave in l, so the window edges are found by bisection.
fn block_moments(
    p: u32,
    ln_s: f64,
    lo: u64,
    hi: u64,
    tol_nats: Option<f64>,
    cap: u64,
) -> Result<BlockMoments> {
    if lo > hi {
        return Ok(BlockMoments::empty());
    }
    let pm1 = (p - 1) as f64;
    let f = |l: u64| ln_weight_raw(pm1, ln_s, l as f64);

    // Peak of the concave log-weight, clamped to the block.
    let l_star = -pm1 / ln_s;
    let l_pk = {
        let c = (l_star.floor() as i64).clamp(lo as i64, hi as i64) as u64;
        let c1 = (c + 1).min(hi);
        if f(c1) > f(c) {
            c1
        } else {
            c
        }
    };
    let m_raw = f(l_pk);

    let (a, b) = match tol_nats {
        None => (lo, hi),
        Some(tol) => {
            let target = m_raw - (tol + 5.0);
            // Largest index on the rising side still below target.
            let a = if f(lo) >= target {
                lo
            } else {
                // f increasing on [lo, l_pk]: find first l with f(l) >= target.
                let (mut bad, mut good) = (lo, l_pk);
                while good - bad > 1 {
                    let mid = bad + (good - bad) / 2;
                    if f(mid) >= target {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                good
            };
            let b = if f(hi) >= target {
                hi
            } else {
                // f decreasing on [l_pk, hi]: find last l with f(l) >= target.
                let (mut good, mut bad) = (l_pk, hi);
                while bad - good > 1 {
                    let mid = good + (bad - good) / 2;
                    if f(mid) >= target {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                good
            };
            (a, b)
        }
    };

    if b - a + 1 > cap {
        return Err(Error::TruncationFailure {
            p,
            t: -ln_s,
            cap: cap as usize,
        });
    }
    if tol_nats.is_some() && b == hi && hi >= cap {
        return Err(Error::TruncationFailure {
            p,
            t: -ln_s,
            cap: cap as usize,
        });
    }

    // Pass 1: normalized sums for S0, S1, S2 and the mean.
    let (mut x0, mut x1, mut x2) = (0.0f64, 0.0f64, 0.0f64);
    let mut peak = a;
    let mut peak_w = f64::NEG_INFINITY;
    for l in a..=b {
        let w = (f(l) - m_raw).exp();
        let lf = l as f64;
        x0 += w;
        x1 += w * lf;
        x2 += w * lf * lf;
        if w > peak_w {
            peak_w = w;
            peak = l;
        }
    }
    let mean = x1 / x0;

    // Pass 2: centered second moment for the variance.
    let mut cvar = 0.0f64;
    for l in a..=b {
        let w = (f(l) - m_raw).exp();
        let d = l as f64 - mean;
        cvar += w * d * d;
    }
    let variance = cvar / x0;

    let norm = LN_2PI + ln_gamma((p - 1) as f64);
    let m_full = m_raw - norm;
    Ok(BlockMoments {
        s0: SignedLogValue::from_ln(m_full + x0.ln()),
        s1: SignedLogValue::from_ln(m_full + x1.ln()),
        s2: SignedLogValue::from_ln(m_full + x2.ln()),
        mean,
        variance,
        terms: b - a + 1,
        peak,
    })
}

fn validate_tol(tol_nats: f64) -> Result<()> {
    if !(tol_nats > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol_nats must be positive, got {tol_nats}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Public operations.

/// S0, S1, S2 at s = |z|^2 in (0, 1).
pub fn moments(p: u32, s: f64, tol_nats: f64) -> Result<MomentTriple> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s must lie in (0, 1), got {s}")));
    }
    moments_ln_s(p, s.ln(), tol_nats)
}

/// Log-s entry point for radii too small to square in f64.
pub fn moments_ln_s(p: u32, ln_s: f64, tol_nats: f64) -> Result<MomentTriple> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
    }
    if !(ln_s < 0.0) {
        return Err(Error::InvalidParameter(format!("ln s must be negative, got {ln_s}")));
    }
    validate_tol(tol_nats)?;
    let bm = block_moments(p, ln_s, 1, DEFAULT_TERM_CAP, Some(tol_nats), DEFAULT_TERM_CAP)?;
    Ok(MomentTriple {
        s0: bm.s0,
        s1: bm.s1,
        s2: bm.s2,
        mean: bm.mean,
        variance: bm.variance,
        terms_used: bm.terms,
        peak_index: bm.peak,
    })
}

/// The kernel function B_p(z) = t^p S0, t = |ln(radius^2)|.
pub fn bergman_density(p: u32, radius: f64) -> Result<SignedLogValue> {
    check_radius(radius)?;
    bergman_density_ln_radius(p, radius.ln())
}

/// Log-radius entry point for inner-region work.
pub fn bergman_density_ln_radius(p: u32, ln_radius: f64) -> Result<SignedLogValue> {
    let t = -2.0 * ln_radius;
    let m = moments_ln_s(p, -t, DEFAULT_TOL_NATS)?;
    Ok(SignedLogValue::from_ln(p as f64 * t.ln() + m.s0.ln_abs()))
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must lie in (0, 1), got {radius}"
        )));
    }
    Ok(())
}

/// The quotient of the induced Fubini-Study form by p times the Poincare
/// form, evaluated on the diagonal at |z| = radius.
pub fn fs_quotient(p: u32, radius: f64) -> Result<FsQuotientSample> {
    check_radius(radius)?;
    fs_quotient_ln_radius(p, radius.ln())
}

/// Log-radius entry point for inner-region work.
pub fn fs_quotient_ln_radius(p: u32, ln_radius: f64) -> Result<FsQuotientSample> {
    if !(ln_radius < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ln radius must be negative, got {ln_radius}"
        )));
    }
    let t = -2.0 * ln_radius;
    let m = moments_ln_s(p, -t, DEFAULT_TOL_NATS)?;
    let ln_q = 2.0 * t.ln() + m.variance.ln() - (2.0 * std::f64::consts::PI * p as f64).ln();
    let quotient = if m.variance == 0.0 {
        SignedLogValue::ZERO
    } else {
        SignedLogValue::from_ln(ln_q)
    };
    Ok(FsQuotientSample {
        radius: ln_radius.exp(),
        t,
        quotient,
        bergman: SignedLogValue::from_ln(p as f64 * t.ln() + m.s0.ln_abs()),
    })
}

/// Splits the double series at delta_p into the four blocks
/// I1 (low/low), I2 (low/high), I3 (high/low), I4 (high/high).
///
/// The diagonal blocks are variance forms of their partial moments
/// (I1 = (S0<=)^2 V<=, I4 = (S0>)^2 V>), hence nonnegative by
/// construction; the cross blocks are products of partial moments with the
/// one subtraction done in signed log arithmetic.
pub fn i_split(p: u32, radius: f64, r: f64) -> Result<SplitQuadruple> {
    check_radius(radius)?;
    i_split_ln_radius(p, radius.ln(), r)
}

/// Log-radius entry point.
pub fn i_split_ln_radius(p: u32, ln_radius: f64, r: f64) -> Result<SplitQuadruple> {
    let delta = delta_p(p, r)?;
    let ln_s = 2.0 * ln_radius;
    if !(ln_s < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ln radius must be negative, got {ln_radius}"
        )));
    }

    let low = if delta >= 1 {
        block_moments(p, ln_s, 1, delta as u64, None, DEFAULT_TERM_CAP)?
    } else {
        BlockMoments::empty()
    };
    let high = block_moments(
        p,
        ln_s,
        delta as u64 + 1,
        DEFAULT_TERM_CAP,
        Some(DEFAULT_TOL_NATS),
        DEFAULT_TERM_CAP,
    )?;

    let var_form = |bm: &BlockMoments| -> SignedLogValue {
        if bm.terms == 0 || bm.variance == 0.0 {
            SignedLogValue::ZERO
        } else {
            SignedLogValue::from_ln(2.0 * bm.s0.ln_abs() + bm.variance.ln())
        }
    };
    let i1 = var_form(&low);
    let i4 = var_form(&high);
    let i2 = low.s2 * high.s0 - low.s1 * high.s1;
    let i3 = high.s2 * low.s0 - high.s1 * low.s1;
    Ok(SplitQuadruple { i1, i2, i3, i4, delta })
}

/// The deviation B_p(z) - (p-1)/(2 pi), signed.
///
/// On the outer region this difference is superpolynomially small and a
/// direct subtraction drowns in the roundoff of B_p itself, so for p >= 6
/// it is evaluated through the dual (Poisson-summed) form of the series:
///
/// ```text
/// B_p - (p-1)/(2 pi) = (p-1)/pi * sum_{k>=1} Re (1 + 2 pi i k / t)^(-p),
/// ```
///
/// an exact identity whose terms decay like ((2 pi k / t)^2 + 1)^(-p/2).
/// For p < 6 the dual series converges too slowly and the deviation is
/// large enough for the direct subtraction, which is used instead. The two
/// routes are cross-checked against each other in the oracle tests.
pub fn plateau_error(p: u32, radius: f64) -> Result<SignedLogValue> {
    check_radius(radius)?;
    plateau_error_at_t(p, -2.0 * radius.ln())
}

/// t-space entry point for the plateau deviation.
pub fn plateau_error_at_t(p: u32, t: f64) -> Result<SignedLogValue> {
    if p >= 6 {
        plateau_error_dual(p, t)
    } else {
        plateau_error_direct(p, t)
    }
}

/// Dual-series route; accurate at any magnitude, converges for p >= 4.
pub fn plateau_error_dual(p: u32, t: f64) -> Result<SignedLogValue> {
    if p < 4 {
        return Err(Error::InvalidParameter(format!(
            "dual plateau series needs p >= 4, got {p}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let pf = p as f64;
    let ln_mod = |k: f64| -> f64 {
        let u = 2.0 * std::f64::consts::PI * k / t;
        -0.5 * pf * (u * u).ln_1p()
    };
    let ln_scale = ln_mod(1.0);
    let mut acc = 0.0f64;
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        let lm = ln_mod(kf);
        let rel = lm - ln_scale;
        if rel < -60.0 {
            break;
        }
        let u = 2.0 * std::f64::consts::PI * kf / t;
        let phase = pf * u.atan();
        acc += rel.exp() * phase.cos();
        k += 1;
        if k > 5_000_000 {
            // Tail bound via the integral comparison: remainder below the
            // truncation threshold for every p >= 4 long before this.
            break;
        }
    }
    let prefactor = SignedLogValue::from_ln((pf - 1.0).ln() - crate::special::LN_PI + ln_scale);
    Ok(SignedLogValue::from_f64(acc) * prefactor)
}

/// Direct-subtraction route; only meaningful while the deviation is well
/// above the roundoff of B_p (small p or small t).
pub fn plateau_error_direct(p: u32, t: f64) -> Result<SignedLogValue> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
    }
    let m = moments_ln_s(p, -t, 60.0)?;
    let b = SignedLogValue::from_ln(p as f64 * t.ln() + m.s0.ln_abs());
    let plateau = SignedLogValue::from_f64((p as f64 - 1.0) / (2.0 * std::f64::consts::PI));
    Ok(b - plateau)
}
