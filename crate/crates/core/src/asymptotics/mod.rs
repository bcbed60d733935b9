//! Region sweeps, suprema and growth-exponent fits.
//!
//! A sweep evaluates one quantity (the quotient, the plateau deviation, a
//! block bound or a certificate ratio) on a log-uniform grid in
//! t = |ln(radius^2)| over one radial regime, polishes every grid-local
//! maximum by golden-section search, and fits the per-power suprema either
//! as a power law (ln sup against ln p) or as a stretched exponential
//! (ln sup against p^(1-2 gamma)).

pub mod verify;

use crate::error::{Error, Result};
use crate::kernel::{self, CertificateId};
use crate::logval::SignedLogValue;
use crate::model::ModelParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// What a sweep measures at each (p, t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    /// Q(p, radius), the Fubini-Study/Poincare quotient.
    #[serde(rename = "FS_QUOTIENT")]
    FsQuotient,
    /// |B_p - (p-1)/(2 pi)|.
    #[serde(rename = "PLATEAU_ERROR")]
    PlateauError,
    /// t^2 I1 / beta^2 over the inner regime.
    #[serde(rename = "LEMMA_I1_INNER")]
    LemmaI1Inner,
    /// t^2 I1 / beta^2 over the middle regime.
    #[serde(rename = "LEMMA_I1_MIDDLE")]
    LemmaI1Middle,
    /// t^2 |I2| / beta^2 over the tail-bound regime.
    #[serde(rename = "LEMMA_I2")]
    LemmaI2,
    /// t^2 |I3| / beta^2 over the tail-bound regime.
    #[serde(rename = "LEMMA_I3")]
    LemmaI3,
    /// t^2 |I4| / beta^2 over the tail-bound regime.
    #[serde(rename = "LEMMA_I4")]
    LemmaI4,
    /// A certificate ratio.
    #[serde(rename = "CERT")]
    Cert(CertificateId),
}

impl Quantity {
    pub fn name(&self) -> String {
        match self {
            Quantity::FsQuotient => "FS_QUOTIENT".into(),
            Quantity::PlateauError => "PLATEAU_ERROR".into(),
            Quantity::LemmaI1Inner => "LEMMA_I1_INNER".into(),
            Quantity::LemmaI1Middle => "LEMMA_I1_MIDDLE".into(),
            Quantity::LemmaI2 => "LEMMA_I2".into(),
            Quantity::LemmaI3 => "LEMMA_I3".into(),
            Quantity::LemmaI4 => "LEMMA_I4".into(),
            Quantity::Cert(id) => format!("CERT({id})"),
        }
    }

    /// The radial regime the quantity is naturally swept over.
    pub fn default_region(&self) -> Region {
        match self {
            Quantity::FsQuotient => Region::Puncture,
            Quantity::PlateauError => Region::Outer,
            Quantity::LemmaI1Inner => Region::Inner,
            Quantity::LemmaI1Middle => Region::Middle,
            Quantity::LemmaI2 | Quantity::LemmaI3 | Quantity::LemmaI4 => Region::LemmaTail,
            Quantity::Cert(CertificateId::Eq45) => Region::Middle,
            Quantity::Cert(CertificateId::Eq52) => Region::LemmaTail,
            Quantity::Cert(_) => Region::Puncture,
        }
    }

    /// Exponential-mode quantities decay superpolynomially and are fitted
    /// against p^(1-2 gamma); the rest against ln p.
    pub fn exponential_fit(&self) -> bool {
        matches!(
            self,
            Quantity::PlateauError
                | Quantity::LemmaI1Inner
                | Quantity::LemmaI1Middle
                | Quantity::LemmaI2
                | Quantity::LemmaI3
                | Quantity::LemmaI4
        )
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase();
        Ok(match up.as_str() {
            "FS_QUOTIENT" => Quantity::FsQuotient,
            "PLATEAU_ERROR" => Quantity::PlateauError,
            "LEMMA_I1_INNER" => Quantity::LemmaI1Inner,
            "LEMMA_I1_MIDDLE" => Quantity::LemmaI1Middle,
            "LEMMA_I2" => Quantity::LemmaI2,
            "LEMMA_I3" => Quantity::LemmaI3,
            "LEMMA_I4" => Quantity::LemmaI4,
            other => {
                if let Some(id) = other.strip_prefix("CERT(").and_then(|x| x.strip_suffix(')')) {
                    Quantity::Cert(id.parse()?)
                } else {
                    return Err(Error::InvalidParameter(format!("unknown quantity {s:?}")));
                }
            }
        })
    }
}

/// Radial regimes for sweeps. `Puncture` is the union of inner and middle
/// (the whole neighbourhood (0, b e^(-p^gamma))); `LemmaTail` additionally
/// caps the radius at c' p^(-A'), where the coefficient tail bounds hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Inner,
    Middle,
    Outer,
    Puncture,
    LemmaTail,
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::Inner => "inner",
            Region::Middle => "middle",
            Region::Outer => "outer",
            Region::Puncture => "puncture",
            Region::LemmaTail => "lemma-tail",
        }
    }
}

impl std::str::FromStr for Region {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inner" => Ok(Region::Inner),
            "middle" => Ok(Region::Middle),
            "outer" => Ok(Region::Outer),
            "puncture" => Ok(Region::Puncture),
            "lemma-tail" | "lemma_tail" | "lemma" => Ok(Region::LemmaTail),
            other => Err(Error::InvalidParameter(format!("unknown region {other:?}"))),
        }
    }
}

/// t-interval of a region under the given parameters.
///
/// Radius bounds map to t = -2 ln(radius) reversed; unbounded-inward
/// regions are capped a few decades past the point where every swept
/// quantity is monotonically decaying.
pub fn region_t_range(params: &ModelParams, region: Region) -> Result<(f64, f64)> {
    let pf = params.p as f64;
    let t_split = 2.0 * pf.powf(params.gamma) + 2.0 * params.b.ln().abs();
    let (lo, hi) = match region {
        Region::Inner => {
            let lo = 2.0 * (pf - LN_2);
            (lo, 3.0 * lo)
        }
        Region::Middle => (t_split, 2.0 * pf),
        Region::Outer => ((t_split * 1e-3).max(0.02), t_split),
        Region::Puncture => (t_split, 4.0 * pf),
        Region::LemmaTail => {
            let lem = params.lemma_constants();
            let lo = t_split.max(-2.0 * lem.ln_radius_bound(params.p));
            (lo, (4.0 * pf).max(2.0 * lo))
        }
    };
    if !(lo < hi) {
        return Err(Error::EmptyRegion(format!(
            "region {} is empty for p={}, b={}, gamma={} (t-range [{lo}, {hi}])",
            region.name(),
            params.p,
            params.b,
            params.gamma
        )));
    }
    Ok((lo, hi))
}

/// Evaluates a quantity at one t (absolute value for sup purposes).
pub fn eval_quantity(quantity: Quantity, params: &ModelParams, t: f64) -> Result<SignedLogValue> {
    let p = params.p;
    match quantity {
        Quantity::FsQuotient => Ok(kernel::fs_quotient_ln_radius(p, -t / 2.0)?.quotient),
        Quantity::PlateauError => Ok(kernel::plateau_error_at_t(p, t)?.abs()),
        Quantity::LemmaI1Inner | Quantity::LemmaI1Middle => lemma_block(params, t, 1),
        Quantity::LemmaI2 => lemma_block(params, t, 2),
        Quantity::LemmaI3 => lemma_block(params, t, 3),
        Quantity::LemmaI4 => lemma_block(params, t, 4),
        Quantity::Cert(id) => {
            let radius = (-t / 2.0).exp();
            if radius == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "t = {t} too deep for a radius-based certificate"
                )));
            }
            let tau = 1;
            Ok(kernel::certificate_eval(id, params, radius, tau)?.abs())
        }
    }
}

/// t^2 |I_j| / beta^2 for block j.
fn lemma_block(params: &ModelParams, t: f64, block: u8) -> Result<SignedLogValue> {
    let sq = kernel::i_split_ln_radius(params.p, -t / 2.0, params.r)?;
    let m = kernel::moments_ln_s(params.p, -t, kernel::DEFAULT_TOL_NATS)?;
    let ij = match block {
        1 => sq.i1,
        2 => sq.i2,
        3 => sq.i3,
        _ => sq.i4,
    };
    if ij.is_zero() {
        return Ok(SignedLogValue::ZERO);
    }
    Ok(SignedLogValue::from_ln(
        2.0 * t.ln() + ij.ln_abs() - 2.0 * m.s0.ln_abs(),
    ))
}

/// Result of a supremum scan: the largest magnitude seen and its location.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScanResult {
    pub sup: SignedLogValue,
    pub argmax_t: f64,
}

/// Scans a quantity over a region: log-uniform coarse grid of n points,
/// then golden-section polish around every coarse local maximum. The
/// polish step makes the reported supremum insensitive to the grid
/// resolution even for peaks whose width is O(1) in t while the region
/// spans O(p).
pub fn scan_sup(
    params: &ModelParams,
    region: Region,
    n: usize,
    quantity: Quantity,
) -> Result<ScanResult> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 grid points, got {n}")));
    }
    let (t_lo, t_hi) = region_t_range(params, region)?;
    // Radius-based certificate evaluations flush to zero past t ~ 1418.
    let t_hi = if matches!(quantity, Quantity::Cert(_)) {
        t_hi.min(1400.0_f64.max(t_lo * 1.5))
    } else {
        t_hi
    };
    let (ln_lo, ln_hi) = (t_lo.ln(), t_hi.ln());
    let step = (ln_hi - ln_lo) / (n - 1) as f64;

    let eval_ln = |ln_t: f64| -> Result<f64> {
        Ok(eval_quantity(quantity, params, ln_t.exp())?.abs().ln_abs())
    };

    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        vals.push(eval_ln(ln_lo + step * i as f64)?);
    }

    let mut best_ln_t = ln_lo;
    let mut best = f64::NEG_INFINITY;
    let mut consider = |lt: f64, v: f64, best: &mut f64, best_ln_t: &mut f64| {
        if v > *best {
            *best = v;
            *best_ln_t = lt;
        }
    };

    // Coarse winners and golden-section polish around each local maximum.
    const GOLD: f64 = 0.618_033_988_749_894_8;
    for i in 0..n {
        let is_local_max = (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == n || vals[i] >= vals[i + 1]);
        let lt_i = ln_lo + step * i as f64;
        consider(lt_i, vals[i], &mut best, &mut best_ln_t);
        if !is_local_max || vals[i] == f64::NEG_INFINITY {
            continue;
        }
        let mut a = (lt_i - step).max(ln_lo);
        let mut b = (lt_i + step).min(ln_hi);
        let mut x1 = b - GOLD * (b - a);
        let mut x2 = a + GOLD * (b - a);
        let mut f1 = eval_ln(x1)?;
        let mut f2 = eval_ln(x2)?;
        for _ in 0..48 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + GOLD * (b - a);
                f2 = eval_ln(x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - GOLD * (b - a);
                f1 = eval_ln(x1)?;
            }
        }
        let (lt, v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
        consider(lt, v, &mut best, &mut best_ln_t);
    }

    Ok(ScanResult {
        sup: SignedLogValue::from_ln(best),
        argmax_t: best_ln_t.exp(),
    })
}

/// Per-power entry of a sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PerPowerEntry {
    pub p: u32,
    pub sup: SignedLogValue,
    pub argmax_t: f64,
}

/// Sweep configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub p_values: Vec<u32>,
    pub samples_per_region: usize,
    pub model: ModelParams,
    pub quantity: Quantity,
    /// Region override; defaults to the quantity's natural region.
    pub region: Option<Region>,
}

impl SweepConfig {
    pub fn new(p_values: Vec<u32>, model: ModelParams, quantity: Quantity) -> Result<Self> {
        let cfg = SweepConfig {
            p_values,
            samples_per_region: 96,
            model,
            quantity,
            region: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p_values.is_empty() {
            return Err(Error::InvalidParameter("p_values must be nonempty".into()));
        }
        if !self.p_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "p_values must be strictly increasing".into(),
            ));
        }
        if self.p_values[0] < 2 {
            return Err(Error::InvalidParameter("p_values must all be >= 2".into()));
        }
        if self.samples_per_region < 16 {
            return Err(Error::InvalidParameter(
                "samples_per_region must be >= 16".into(),
            ));
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        self.region.unwrap_or_else(|| self.quantity.default_region())
    }
}

/// Sweep outcome: per-power suprema plus the growth fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthReport {
    pub quantity: String,
    pub region: String,
    pub per_p: Vec<PerPowerEntry>,
    /// Slope of ln(sup) against ln(p) (power-law mode) or against
    /// p^(1-2 gamma) (exponential mode).
    pub fit_slope: f64,
    pub fit_intercept: f64,
    /// RMS of the fit errors.
    pub fit_residual: f64,
    /// Decay rate for exponential-mode fits (= -fit_slope); absent in
    /// power-law mode.
    pub fitted_epsilon: Option<f64>,
}

/// Runs scan_sup for every p in the config and fits the growth law.
pub fn sweep(config: &SweepConfig) -> Result<GrowthReport> {
    config.validate()?;
    let region = config.region();
    let mut per_p = Vec::with_capacity(config.p_values.len());
    for &p in &config.p_values {
        let params = config.model.at_power(p)?;
        let scan = scan_sup(&params, region, config.samples_per_region, config.quantity)?;
        per_p.push(PerPowerEntry {
            p,
            sup: scan.sup,
            argmax_t: scan.argmax_t,
        });
    }
    let exponential = config.quantity.exponential_fit();
    let points: Vec<(f64, f64)> = per_p
        .iter()
        .map(|e| {
            let x = if exponential {
                (e.p as f64).powf(1.0 - 2.0 * config.model.gamma)
            } else {
                (e.p as f64).ln()
            };
            (x, e.sup.ln_abs())
        })
        .collect();
    if points.iter().any(|&(_, y)| y == f64::NEG_INFINITY) {
        return Err(Error::DegenerateFit(
            "a swept supremum is exactly zero; no growth law to fit".into(),
        ));
    }
    let (fit_slope, fit_intercept, fit_residual) = if points.len() >= 3 {
        fit_exponent(&points)?
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(GrowthReport {
        quantity: config.quantity.name(),
        region: region.name().into(),
        per_p,
        fit_slope,
        fit_intercept,
        fit_residual,
        fitted_epsilon: exponential.then_some(-fit_slope),
    })
}

/// Ordinary least squares on (x, y); returns (slope, intercept, RMS
/// residual). Requires at least 3 points with strictly increasing x.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if !points.windows(2).all(|w| w[0].0 < w[1].0) {
        return Err(Error::DegenerateFit("x values must be strictly increasing".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum();
    Ok((slope, intercept, (ss / n).sqrt()))
}
