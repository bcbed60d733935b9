//! Numerical certificates for the inequality chain behind the block bounds.
//!
//! Each certificate evaluates LHS/RHS of one inequality with every
//! unspecified constant set to 1 and returns the ratio as a signed
//! log-space value. A certificate "passes" when the ratio stays bounded as
//! p grows over the sampled points; for the inequalities that hold with
//! constant 1 pointwise (EQ30, EQ0038, EQ38, EQ43, EQ45) the measured
//! ratio is at most 1 everywhere in their stated region.

use super::{block_moments, i_split_ln_radius, moments_ln_s, DEFAULT_TERM_CAP, DEFAULT_TOL_NATS};
use crate::error::{Error, Result};
use crate::logval::SignedLogValue;
use crate::model::{lemma2_constants, log_coeff_sq, ModelParams};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Identifiers of the certified inequalities.
///
/// * `EQ30`   - single-term lower bound: (c_1)^2 s < beta.
/// * `EQ0038` - shifted-coefficient sum: sum_{l=2..delta} (c_l)^2 s^(l-1)
///   <= 2^(p-1) beta.
/// * `EQ38`   - first off-diagonal block term: sum_{m=2..delta} (m-1)
///   (c_1 c_m)^2 s^(1+m) <= p 2^(p-1) s beta^2.
/// * `EQ43`   - low-block bound |I1| <= p^2 beta^2.
/// * `EQ45`   - middle-region bound t^2 |I1| / beta^2 <= 4 p^4.
/// * `EQ48`   - coefficient tail bound c_s <= sqrt(p) (2r)^(-s)
///   |ln((2r)^2)|^(-p/2).
/// * `EQ52`   - tail-versus-kernel bound
///   |ln((2r)^2)|^(-p/2) (|z|/2r)^(delta - tau + 1)
///   <= p^(-1/2) 2^(-alpha' p) beta^(1/2) on |z| <= c' p^(-A').
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CertificateId {
    #[serde(rename = "EQ30")]
    Eq30,
    #[serde(rename = "EQ0038")]
    Eq0038,
    #[serde(rename = "EQ38")]
    Eq38,
    #[serde(rename = "EQ43")]
    Eq43,
    #[serde(rename = "EQ45")]
    Eq45,
    #[serde(rename = "EQ48")]
    Eq48,
    #[serde(rename = "EQ52")]
    Eq52,
}

impl CertificateId {
    pub const ALL: [CertificateId; 7] = [
        CertificateId::Eq30,
        CertificateId::Eq0038,
        CertificateId::Eq38,
        CertificateId::Eq43,
        CertificateId::Eq45,
        CertificateId::Eq48,
        CertificateId::Eq52,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CertificateId::Eq30 => "EQ30",
            CertificateId::Eq0038 => "EQ0038",
            CertificateId::Eq38 => "EQ38",
            CertificateId::Eq43 => "EQ43",
            CertificateId::Eq45 => "EQ45",
            CertificateId::Eq48 => "EQ48",
            CertificateId::Eq52 => "EQ52",
        }
    }
}

impl std::fmt::Display for CertificateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CertificateId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EQ30" => Ok(CertificateId::Eq30),
            "EQ0038" => Ok(CertificateId::Eq0038),
            "EQ38" => Ok(CertificateId::Eq38),
            "EQ43" => Ok(CertificateId::Eq43),
            "EQ45" => Ok(CertificateId::Eq45),
            "EQ48" => Ok(CertificateId::Eq48),
            "EQ52" => Ok(CertificateId::Eq52),
            other => Err(Error::InvalidParameter(format!(
                "unknown certificate id {other:?}"
            ))),
        }
    }
}

/// Evaluates the LHS/RHS ratio of the identified inequality at one point.
///
/// `radius` is the evaluation radius |z| (ignored by EQ48); `tau` is the
/// shift of EQ52 and doubles as the coefficient index s of EQ48. Region
/// preconditions (EQ45 middle annulus, EQ52 radius bound) are enforced and
/// violations reported as errors.
pub fn certificate_eval(
    id: CertificateId,
    params: &ModelParams,
    radius: f64,
    tau: u32,
) -> Result<SignedLogValue> {
    let p = params.p;
    let pf = p as f64;
    match id {
        CertificateId::Eq30 => {
            let ln_s = radius_to_ln_s(radius)?;
            let m = moments_ln_s(p, ln_s, DEFAULT_TOL_NATS)?;
            let lhs = log_coeff_sq(p, 1)? + ln_s;
            Ok(SignedLogValue::from_ln(lhs - m.s0.ln_abs()))
        }
        CertificateId::Eq0038 => {
            let ln_s = radius_to_ln_s(radius)?;
            let delta = params.delta_p();
            if delta < 2 {
                return Ok(SignedLogValue::ZERO);
            }
            let blk = block_moments(p, ln_s, 2, delta as u64, None, DEFAULT_TERM_CAP)?;
            let m = moments_ln_s(p, ln_s, DEFAULT_TOL_NATS)?;
            let lhs = blk.s0.ln_abs() - ln_s;
            let rhs = (pf - 1.0) * LN_2 + m.s0.ln_abs();
            Ok(SignedLogValue::from_ln(lhs - rhs))
        }
        CertificateId::Eq38 => {
            let ln_s = radius_to_ln_s(radius)?;
            let delta = params.delta_p();
            if delta < 2 {
                return Ok(SignedLogValue::ZERO);
            }
            let blk = block_moments(p, ln_s, 2, delta as u64, None, DEFAULT_TERM_CAP)?;
            let m = moments_ln_s(p, ln_s, DEFAULT_TOL_NATS)?;
            // sum (m-1) a_m s^m = S1 - S0 over the block; positive since m >= 2.
            let weighted = blk.s1 - blk.s0;
            let lhs = log_coeff_sq(p, 1)? + ln_s + weighted.ln_abs();
            let rhs = pf.ln() + (pf - 1.0) * LN_2 + ln_s + 2.0 * m.s0.ln_abs();
            Ok(SignedLogValue::from_ln(lhs - rhs))
        }
        CertificateId::Eq43 => {
            let ln_s = radius_to_ln_s(radius)?;
            let sq = i_split_ln_radius(p, ln_s / 2.0, params.r)?;
            let m = moments_ln_s(p, ln_s, DEFAULT_TOL_NATS)?;
            if sq.i1.is_zero() {
                return Ok(SignedLogValue::ZERO);
            }
            let ratio = sq.i1.ln_abs() - 2.0 * pf.ln() - 2.0 * m.s0.ln_abs();
            Ok(SignedLogValue::from_ln(ratio))
        }
        CertificateId::Eq45 => {
            let ln_s = radius_to_ln_s(radius)?;
            let t = -ln_s;
            let t_outer = 2.0 * pf.powf(params.gamma) + 2.0 * params.b.ln().abs();
            if !(t < 2.0 * pf && t > t_outer) {
                return Err(Error::RegionPrecondition {
                    what: "EQ45".into(),
                    detail: format!(
                        "radius {radius} outside the middle annulus (e^-p, b e^(-p^gamma)) for p={p}"
                    ),
                });
            }
            let sq = i_split_ln_radius(p, ln_s / 2.0, params.r)?;
            let m = moments_ln_s(p, ln_s, DEFAULT_TOL_NATS)?;
            if sq.i1.is_zero() {
                return Ok(SignedLogValue::ZERO);
            }
            let ratio = 2.0 * t.ln() + sq.i1.ln_abs()
                - 2.0 * m.s0.ln_abs()
                - (4.0f64.ln() + 4.0 * pf.ln());
            Ok(SignedLogValue::from_ln(ratio))
        }
        CertificateId::Eq48 => {
            let s_index = tau as u64;
            if s_index < 1 {
                return Err(Error::InvalidParameter(
                    "EQ48 needs a coefficient index >= 1 (passed via tau)".into(),
                ));
            }
            let ln_2r = (2.0 * params.r).ln();
            let ln_log2r_sq = (2.0 * ln_2r.abs()).ln();
            let ratio = 0.5 * log_coeff_sq(p, s_index)?
                + s_index as f64 * ln_2r
                + 0.5 * pf * ln_log2r_sq
                - 0.5 * pf.ln();
            Ok(SignedLogValue::from_ln(ratio))
        }
        CertificateId::Eq52 => {
            let ln_radius = radius_to_ln_s(radius)? / 2.0;
            let lem = lemma2_constants(params.r)?;
            if ln_radius > lem.ln_radius_bound(p) {
                return Err(Error::RegionPrecondition {
                    what: "EQ52".into(),
                    detail: format!(
                        "radius {radius} exceeds the bound c' p^(-A') = {:.3e} for p={p}",
                        lem.ln_radius_bound(p).exp()
                    ),
                });
            }
            let delta = params.delta_p();
            let ln_2r = (2.0 * params.r).ln();
            let ln_log2r_sq = (2.0 * ln_2r.abs()).ln();
            let expo = delta as f64 - tau as f64 + 1.0;
            let m = moments_ln_s(p, 2.0 * ln_radius, DEFAULT_TOL_NATS)?;
            let lhs = -0.5 * pf * ln_log2r_sq + expo * (ln_radius - ln_2r);
            let rhs = -0.5 * pf.ln() - lem.alpha_prime * pf * LN_2 + 0.5 * m.s0.ln_abs();
            Ok(SignedLogValue::from_ln(lhs - rhs))
        }
    }
}

fn radius_to_ln_s(radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must lie in (0, 1), got {radius}"
        )));
    }
    Ok(2.0 * radius.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: u32) -> ModelParams {
        ModelParams::with_defaults(p).unwrap()
    }

    #[test]
    fn eq30_strictly_below_one() {
        for p in [2u32, 5, 20, 100] {
            for radius in [0.001, 0.05, 0.3, 0.7, 0.95] {
                let ratio = certificate_eval(CertificateId::Eq30, &params(p), radius, 0).unwrap();
                assert_eq!(ratio.sign(), 1);
                assert!(ratio.ln_abs() < 0.0, "p={p} radius={radius}");
            }
        }
    }

    #[test]
    fn eq0038_and_eq38_bounded_by_one() {
        for p in [14u32, 30, 80, 200] {
            for radius in [1e-6, 1e-3, 0.05, 0.4, 0.9] {
                for id in [CertificateId::Eq0038, CertificateId::Eq38] {
                    let ratio = certificate_eval(id, &params(p), radius, 0).unwrap();
                    assert!(
                        ratio.ln_abs() <= 1e-12,
                        "{id} p={p} radius={radius}: ln ratio {}",
                        ratio.ln_abs()
                    );
                }
            }
        }
    }

    #[test]
    fn eq0038_degenerate_block_is_zero() {
        // delta_p < 2 for p <= 13 at the default radius.
        let ratio = certificate_eval(CertificateId::Eq0038, &params(5), 0.3, 0).unwrap();
        assert!(ratio.is_zero());
    }

    #[test]
    fn eq45_region_precondition() {
        let err = certificate_eval(CertificateId::Eq45, &params(40), 0.9, 0);
        assert!(matches!(err, Err(Error::RegionPrecondition { .. })));
    }

    #[test]
    fn eq52_region_precondition_and_value() {
        let p = params(60);
        let err = certificate_eval(CertificateId::Eq52, &p, 0.5, 1);
        assert!(matches!(err, Err(Error::RegionPrecondition { .. })));
        let bound = lemma2_constants(p.r).unwrap().ln_radius_bound(60).exp();
        let ratio = certificate_eval(CertificateId::Eq52, &p, bound * 0.5, 1).unwrap();
        assert!(ratio.ln_abs().is_finite());
    }

    #[test]
    fn eq48_finite_at_extremes() {
        for (p, s) in [(2u32, 1u32), (2, 200), (200, 1), (200, 200), (60, 13)] {
            let ratio = certificate_eval(CertificateId::Eq48, &params(p), 0.5, s).unwrap();
            assert!(ratio.ln_abs().is_finite(), "p={p} s={s}");
        }
    }

    #[test]
    fn id_round_trip() {
        for id in CertificateId::ALL {
            let parsed: CertificateId = id.as_str().parse().unwrap();
            assert_eq!(parsed, id);
        }
        assert!("EQ99".parse::<CertificateId>().is_err());
    }
}
