//! Independent oracles: quadrature for the coefficient norms, explicit
//! double-loop block sums, a finite-difference route to the quotient, and
//! exact big-integer factorial logs.
//!
//! Nothing here reuses the kernel's block-summation machinery; agreement
//! between this module and the kernel is what the verification suite
//! checks.

use crate::error::{Error, Result};
use crate::logval::SignedLogValue;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

// 16-point Gauss-Legendre rule on [-1, 1] (positive abscissae half).
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_8,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

/// Quadrature configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: QuadratureScheme,
    /// Tolerance on the peak-scaled integral (the integrand is normalised
    /// by its maximum before integrating, so this acts as a relative
    /// tolerance on the result).
    pub abs_tol: f64,
    /// Recursion depth (adaptive scheme) or panel doublings (fixed-rule
    /// scheme).
    pub max_subdivisions: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureScheme {
    /// Recursive adaptive Simpson in the t variable.
    AdaptiveInterval,
    /// Composite Gauss-Legendre panels on the exponentially weighted
    /// integrand after u = l t.
    GaussLaguerreClass,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: QuadratureScheme::AdaptiveInterval,
            abs_tol: 1e-10,
            max_subdivisions: 48,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(Error::InvalidParameter(
                "quadrature spec needs abs_tol > 0 and max_subdivisions >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Squared norm of the monomial z^l in the weighted space, by numerical
/// integration of
///
/// ```text
/// ||z^l||^2 = 4 pi Int_0^1 r^(2l-1) (-2 ln r)^(p-2) dr
///           = 2 pi Int_0^inf t^(p-2) e^(-l t) dt
/// ```
///
/// after t = -ln r^2, which removes the endpoint singularity. The closed
/// form is 2 pi (p-2)! / l^(p-1).
pub fn norm_by_quadrature(p: u32, l: u64, spec: &QuadratureSpec) -> Result<f64> {
    if p < 2 || l < 1 {
        return Err(Error::InvalidParameter(format!(
            "norm_by_quadrature needs p >= 2 and l >= 1, got p={p}, l={l}"
        )));
    }
    spec.validate()?;
    let ln_radial = ln_radial_integral(p, l as f64, spec)?;
    Ok((crate::special::LN_2PI + ln_radial).exp())
}

/// ln of Int_0^inf t^(p-2) e^(-lam t) dt for real lam > 0.
fn ln_radial_integral(p: u32, lam: f64, spec: &QuadratureSpec) -> Result<f64> {
    let n = (p - 2) as f64;
    match spec.scheme {
        QuadratureScheme::AdaptiveInterval => {
            // Peak of t^n e^(-lam t) at t* = n / lam (t* = 0 for p = 2).
            let t_star = n / lam;
            let ln_peak = if n > 0.0 { n * (t_star.ln() - 1.0) } else { 0.0 };
            let g_ln = |t: f64| -> f64 {
                if t <= 0.0 {
                    if n > 0.0 {
                        f64::NEG_INFINITY
                    } else {
                        0.0
                    }
                } else {
                    n * t.ln() - lam * t - ln_peak
                }
            };
            let mut hi = t_star.max(1.0 / lam);
            while g_ln(hi) > -50.0 {
                hi += (t_star.sqrt() / lam.sqrt()).max(1.0 / lam);
            }
            let g = |t: f64| g_ln(t).exp();
            let rough = simpson(&g, 0.0, hi);
            let eps = spec.abs_tol * rough.abs().max(1e-3);
            let integral = adaptive_simpson(&g, 0.0, hi, eps, spec.max_subdivisions, spec)?;
            Ok(ln_peak + integral.ln())
        }
        QuadratureScheme::GaussLaguerreClass => {
            // u = lam t: lam^(1-p) Int u^n e^-u du.
            let u_star = n.max(0.0);
            let ln_peak = if n > 0.0 { n * (u_star.ln() - 1.0) } else { 0.0 };
            let g = |u: f64| -> f64 {
                if u <= 0.0 && n > 0.0 {
                    0.0
                } else if n > 0.0 {
                    (n * u.ln() - u - ln_peak).exp()
                } else {
                    (-u).exp()
                }
            };
            let mut hi = u_star.max(1.0);
            while (if n > 0.0 { n * hi.ln() - hi - ln_peak } else { -hi }) > -50.0 {
                hi += n.sqrt().max(1.0);
            }
            let mut panels = 8usize;
            let mut last = gl_composite(&g, 0.0, hi, panels);
            let mut converged = None;
            for _ in 0..spec.max_subdivisions {
                panels *= 2;
                let next = gl_composite(&g, 0.0, hi, panels);
                if (next - last).abs() <= spec.abs_tol * next.abs().max(1e-3) {
                    converged = Some(next);
                    break;
                }
                last = next;
            }
            let integral = converged.ok_or(Error::QuadratureNonConvergence {
                tol: spec.abs_tol,
                max_subdivisions: spec.max_subdivisions,
            })?;
            Ok(ln_peak + integral.ln() - (p - 1) as f64 * lam.ln())
        }
    }
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    eps: f64,
    depth: u32,
    spec: &QuadratureSpec,
) -> Result<f64> {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        let diff = left + right - whole;
        if diff.abs() <= 15.0 * eps {
            return Ok(left + right + diff / 15.0);
        }
        if depth == 0 {
            return Err(Error::QuadratureNonConvergence {
                tol: eps,
                max_subdivisions: 0,
            });
        }
        Ok(recurse(f, a, m, left, 0.5 * eps, depth - 1)?
            + recurse(f, m, b, right, 0.5 * eps, depth - 1)?)
    }
    let whole = simpson(f, a, b);
    recurse(f, a, b, whole, eps, depth).map_err(|_| Error::QuadratureNonConvergence {
        tol: spec.abs_tol,
        max_subdivisions: spec.max_subdivisions,
    })
}

fn gl_composite(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let lo = a + i as f64 * h;
        let c = lo + 0.5 * h;
        let half = 0.5 * h;
        for j in 0..8 {
            acc += GL16_W[j] * half * (f(c - half * GL16_X[j]) + f(c + half * GL16_X[j]));
        }
    }
    acc
}

/// Modulus of the numerically integrated inner product of z^l and z^m.
///
/// The angular factor is a trapezoid sum over the circle (exact up to
/// roundoff for l != m), the radial factor reuses the norm quadrature at
/// lam = (l+m)/2. Diagonal calls reproduce the norm.
pub fn orthogonality_check(p: u32, l: u64, m: u64, spec: &QuadratureSpec) -> Result<f64> {
    if p < 2 || l < 1 || m < 1 {
        return Err(Error::InvalidParameter(
            "orthogonality_check needs p >= 2, l >= 1, m >= 1".into(),
        ));
    }
    spec.validate()?;
    let k = 256usize;
    let dphase = (l as f64 - m as f64) * std::f64::consts::TAU / k as f64;
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for j in 0..k {
        let a = dphase * j as f64;
        re += a.cos();
        im += a.sin();
    }
    let angular = (re * re + im * im).sqrt() * std::f64::consts::TAU / k as f64;
    let ln_radial = ln_radial_integral(p, 0.5 * (l + m) as f64, spec)?;
    Ok(angular * ln_radial.exp())
}

/// Explicit O(L^2) evaluation of the four blocks of the double series
/// sum l (l-m) (c_l)^2 (c_m)^2 s^(l+m), split at `delta`, with both index
/// ranges truncated at L.
pub fn brute_double_sum(p: u32, s: f64, cap: u64, delta: u32) -> Result<crate::kernel::SplitQuadruple> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s must lie in (0,1), got {s}")));
    }
    if cap > 5000 {
        return Err(Error::InvalidParameter(format!(
            "brute_double_sum caps at L = 5000, got {cap}"
        )));
    }
    if u64::from(delta) > cap {
        return Err(Error::InvalidParameter(format!(
            "need L >= delta, got L={cap}, delta={delta}"
        )));
    }
    let ln_s = s.ln();
    let lw: Vec<f64> = (1..=cap)
        .map(|l| crate::model::log_coeff_sq(p, l).map(|c| c + l as f64 * ln_s))
        .collect::<Result<_>>()?;
    let m_ln = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|&x| (x - m_ln).exp()).collect();

    let mut blocks = [0.0f64; 4]; // [low/low, low/high, high/low, high/high]
    let d = delta as u64;
    for l in 1..=cap {
        for m in 1..=cap {
            let term = l as f64 * (l as f64 - m as f64) * w[(l - 1) as usize] * w[(m - 1) as usize];
            let idx = match (l <= d, m <= d) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (false, false) => 3,
            };
            blocks[idx] += term;
        }
    }
    let scale = SignedLogValue::from_ln(2.0 * m_ln);
    Ok(crate::kernel::SplitQuadruple {
        i1: SignedLogValue::from_f64(blocks[0]) * scale,
        i2: SignedLogValue::from_f64(blocks[1]) * scale,
        i3: SignedLogValue::from_f64(blocks[2]) * scale,
        i4: SignedLogValue::from_f64(blocks[3]) * scale,
        delta,
    })
}

/// Log of the kernel function up to a p-dependent additive constant,
/// summed naively (single upward pass, running-maximum scaling). Used by
/// the finite-difference oracle; deliberately unrelated to the kernel
/// module's windowed summation.
fn log_bergman_unnormalised(p: u32, s: f64) -> f64 {
    let t = -s.ln();
    let pm1 = (p - 1) as f64;
    let l_star = pm1 / t;
    let ln_s = s.ln();
    let mut m_seen = f64::NEG_INFINITY;
    let mut terms: Vec<f64> = Vec::new();
    let mut l = 1u64;
    loop {
        let lw = pm1 * (l as f64).ln() + l as f64 * ln_s;
        if lw > m_seen {
            m_seen = lw;
        }
        terms.push(lw);
        if (l as f64) > l_star && lw < m_seen - 45.0 {
            break;
        }
        l += 1;
    }
    let acc: f64 = terms.iter().map(|&lw| (lw - m_seen).exp()).sum();
    p as f64 * t.ln() + m_seen + acc.ln()
}

/// Five-point finite-difference evaluation of the quotient at z = x + iy:
///
/// ```text
/// Q_fd = 1/(2 pi) + s (ln s)^2 Lap5(log B_p) / (8 pi p),  s = x^2 + y^2,
/// ```
///
/// with `Lap5` the standard 5-point Laplacian of step h. Agrees with the
/// moment-based quotient to O(h^2).
pub fn fd_quotient(p: u32, x: f64, y: f64, h: f64) -> Result<f64> {
    fd_quotient_of(|xx, yy| Ok(log_bergman_unnormalised(p, xx * xx + yy * yy)), p, x, y, h)
}

/// Same stencil applied to an arbitrary log-kernel function; used to check
/// degenerate cases (e.g. a single-term kernel, whose curvature form
/// cancels the Poincare term exactly).
pub fn fd_quotient_of(
    log_b: impl Fn(f64, f64) -> Result<f64>,
    p: u32,
    x: f64,
    y: f64,
    h: f64,
) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let s = x * x + y * y;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "point must lie in the punctured disc, |z|^2 = {s}"
        )));
    }
    for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
        let ss = (x + dx) * (x + dx) + (y + dy) * (y + dy);
        if !(ss > 0.0 && ss < 1.0) {
            return Err(Error::StencilOutOfDomain(format!(
                "stencil point at offset ({dx}, {dy}) leaves the punctured disc"
            )));
        }
    }
    let f0 = log_b(x, y)?;
    let fe = log_b(x + h, y)?;
    let fw = log_b(x - h, y)?;
    let fn_ = log_b(x, y + h)?;
    let fs = log_b(x, y - h)?;
    let lap = (fe + fw + fn_ + fs - 4.0 * f0) / (h * h);
    let ln_s = s.ln();
    Ok(1.0 / std::f64::consts::TAU + s * ln_s * ln_s * lap / (8.0 * std::f64::consts::PI * p as f64))
}

/// ln n! from the exact big integer.
pub fn ln_factorial(n: u64) -> f64 {
    let mut f = BigUint::from(1u32);
    for k in 2..=n {
        f *= k;
    }
    ln_biguint(&f)
}

/// High-accuracy natural log of a big natural number: the top 64 bits plus
/// the bit-length offset.
pub fn ln_biguint(n: &BigUint) -> f64 {
    assert!(*n > BigUint::from(0u32), "ln of zero");
    let bits = n.bits();
    if bits <= 64 {
        let v: u64 = n.try_into().expect("fits in u64");
        return (v as f64).ln();
    }
    let shift = bits - 64;
    let top: u64 = (n >> shift).try_into().expect("64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Normalised Stirling ratio p^p / p! * sqrt(2 pi p) e^-p, evaluated in
/// log space against the exact factorial. Tends to 1 - 1/(12p) + O(p^-2).
pub fn lgamma_stirling_check(p: u64) -> f64 {
    assert!(p >= 1);
    let pf = p as f64;
    (pf * pf.ln() - ln_factorial(p) + 0.5 * (crate::special::LN_2PI + pf.ln()) - pf).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel;
    use std::f64::consts::TAU;

    fn both_specs() -> [QuadratureSpec; 2] {
        [
            QuadratureSpec::default(),
            QuadratureSpec {
                scheme: QuadratureScheme::GaussLaguerreClass,
                ..QuadratureSpec::default()
            },
        ]
    }

    #[test]
    fn norm_elementary_cases() {
        for spec in both_specs() {
            // p = 2, l = 1: the integrand reduces to 4 pi r, norm 2 pi.
            let n21 = norm_by_quadrature(2, 1, &spec).unwrap();
            assert!((n21 - TAU).abs() < 1e-9 * TAU, "{n21}");
            // p = 3, l = 1: 2 pi 1!/1.
            let n31 = norm_by_quadrature(3, 1, &spec).unwrap();
            assert!((n31 - TAU).abs() < 1e-9 * TAU, "{n31}");
        }
    }

    #[test]
    fn norm_big_integer_case() {
        // p = 10, l = 7: 2 pi 8! / 7^9, both factors exact integers.
        let want = TAU * 40320.0 / 40_353_607.0;
        for spec in both_specs() {
            let got = norm_by_quadrature(10, 7, &spec).unwrap();
            assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn norm_matches_closed_form_sample() {
        let spec = QuadratureSpec::default();
        for &(p, l) in &[(2u32, 200u64), (17, 5), (35, 120), (60, 1), (60, 200)] {
            let got = norm_by_quadrature(p, l, &spec).unwrap();
            let want_ln =
                crate::special::LN_2PI + ln_factorial(p as u64 - 2) - (p - 1) as f64 * (l as f64).ln();
            let rel = (got.ln() - want_ln).abs();
            assert!(rel < 1e-8, "p={p} l={l}: ln-rel {rel}");
        }
    }

    #[test]
    fn orthogonality_vanishes_off_diagonal() {
        let spec = QuadratureSpec::default();
        assert!(orthogonality_check(2, 1, 2, &spec).unwrap() < 1e-12);
        assert!(orthogonality_check(5, 3, 4, &spec).unwrap() < 1e-12);
    }

    #[test]
    fn orthogonality_diagonal_is_norm() {
        let spec = QuadratureSpec::default();
        let diag = orthogonality_check(2, 2, 2, &spec).unwrap();
        let norm = norm_by_quadrature(2, 2, &spec).unwrap();
        assert!((diag - norm).abs() < 1e-9 * norm);
    }

    #[test]
    fn brute_empty_low_block() {
        let sq = brute_double_sum(2, 0.5, 50, 0).unwrap();
        assert!(sq.i1.is_zero());
        assert!(sq.i2.is_zero());
        assert!(sq.i3.is_zero());
        assert_eq!(sq.i4.sign(), 1);
    }

    #[test]
    fn brute_three_by_three_hand_loop() {
        // p = 3: a_l = l^2 / (2 pi); all nine terms by hand at s = 0.25.
        let s: f64 = 0.25;
        let a = |l: f64| l * l / TAU;
        let mut hand = 0.0;
        for l in 1..=3u32 {
            for m in 1..=3u32 {
                let (lf, mf) = (l as f64, m as f64);
                hand += lf * (lf - mf) * a(lf) * a(mf) * s.powi((l + m) as i32);
            }
        }
        let sq = brute_double_sum(3, s, 3, 3).unwrap();
        // delta = 3 puts everything in the low/low block.
        assert!((sq.i1.to_f64() - hand).abs() < 1e-15 * hand.abs().max(1e-10));
        assert!(sq.i2.is_zero() && sq.i3.is_zero() && sq.i4.is_zero());
    }

    #[test]
    fn brute_blocks_partition_the_lattice() {
        // Blockwise sums add up to S0 S2 - S1^2 over the same truncation.
        let (p, s, cap, delta) = (5u32, 0.2f64, 80u64, 4u32);
        let sq = brute_double_sum(p, s, cap, delta).unwrap();
        let a = |l: u64| (crate::model::log_coeff_sq(p, l).unwrap() + l as f64 * s.ln()).exp();
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for l in 1..=cap {
            let w = a(l);
            s0 += w;
            s1 += w * l as f64;
            s2 += w * (l * l) as f64;
        }
        let want = s0 * s2 - s1 * s1;
        let got = sq.total().to_f64();
        assert!((got - want).abs() < 1e-9 * want.abs(), "{got} vs {want}");
    }

    #[test]
    fn fd_matches_kernel_quotient() {
        // Richardson pair at the documented reference point.
        let p = 20u32;
        let (x, y) = (0.3f64, 0.0f64);
        let q_ref = kernel::fs_quotient(p, 0.3).unwrap().quotient.to_f64();
        let e1 = (fd_quotient(p, x, y, 1e-3).unwrap() - q_ref).abs();
        let e2 = (fd_quotient(p, x, y, 5e-4).unwrap() - q_ref).abs();
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "Richardson ratio {ratio}");
    }

    #[test]
    fn fd_rotation_invariance() {
        let p = 20u32;
        let (r, arg) = (0.3f64, 1.1f64);
        let radial = fd_quotient(p, r, 0.0, 1e-3).unwrap();
        let rotated = fd_quotient(p, r * arg.cos(), r * arg.sin(), 1e-3).unwrap();
        assert!((radial - rotated).abs() < 1e-9, "{radial} vs {rotated}");
    }

    #[test]
    fn fd_single_term_kernel_gives_zero() {
        // With only the l = 1 term, log B = p ln t + ln s + const and the
        // curvature form cancels the Poincare form exactly.
        let p = 12u32;
        let single = |x: f64, y: f64| -> crate::error::Result<f64> {
            let s = x * x + y * y;
            let t = -s.ln();
            Ok(p as f64 * t.ln() + s.ln())
        };
        let q = fd_quotient_of(single, p, 0.4, 0.1, 1e-4).unwrap();
        assert!(q.abs() < 1e-7, "{q}");
    }

    #[test]
    fn fd_stencil_domain_errors() {
        assert!(matches!(
            fd_quotient(5, 1e-9, 0.0, 1e-3),
            Err(Error::InvalidParameter(_)) | Err(Error::StencilOutOfDomain(_))
        ));
        assert!(matches!(
            fd_quotient(5, 0.999, 0.0, 1e-2),
            Err(Error::StencilOutOfDomain(_))
        ));
    }

    #[test]
    fn stirling_ratio_tends_to_one() {
        // p = 1: ratio is sqrt(2 pi)/e exactly.
        let want1 = (TAU).sqrt() / std::f64::consts::E;
        assert!((lgamma_stirling_check(1) - want1).abs() < 1e-12);
        // p = 10: 1 + c/10 with |c| <= 0.1 (c ~ -1/12).
        let r10 = lgamma_stirling_check(10);
        assert!(((r10 - 1.0) * 10.0).abs() <= 0.1, "{r10}");
        // p = 1000: within 1e-4 of 1.
        assert!((lgamma_stirling_check(1000) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn ln_gamma_agrees_with_exact_factorials() {
        // The library log-gamma against the big-integer oracle.
        for n in [1u64, 2, 5, 20, 99, 170, 400] {
            let got = crate::special::ln_gamma(n as f64 + 1.0);
            let want = ln_factorial(n);
            assert!((got - want).abs() <= 1e-14 + 8.0 * f64::EPSILON * want.abs());
        }
    }

    #[test]
    fn quadrature_rejects_bad_spec() {
        let bad = QuadratureSpec {
            abs_tol: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(norm_by_quadrature(3, 1, &bad).is_err());
    }
}
