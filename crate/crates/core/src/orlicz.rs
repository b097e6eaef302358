//! Orlicz functions, Luxemburg norms and the Sawyer growth condition.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{
    integrate_monotone, IntegralEstimate, MonotoneFunction, NumericsError,
};

/// Probe range for the norm bracket is `[2^-60, 2^60]`.
const PROBE_EXPONENT: i32 = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrliczError {
    #[error("Luxemburg norm is infinite: no probe k in [2^-60, 2^60] gives ∫Φ(f/k) ≤ 1")]
    NormInfinite,
    #[error("invalid Orlicz parameters: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Growth function Φ; logarithms are natural.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum OrliczFunction {
    /// `|t|^p`
    Power { p: f64 },
    /// `|t| log(|t| + 1)^β`
    LLogBeta { beta: f64 },
    /// `|t|^s log(|t| + 1)^p`
    CompositePower { s: f64, p: f64 },
}

impl OrliczFunction {
    pub fn power(p: f64) -> Result<Self, OrliczError> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(OrliczError::InvalidParameter(format!("power exponent must be ≥ 1, got {p}")));
        }
        Ok(Self::Power { p })
    }

    pub fn llog(beta: f64) -> Result<Self, OrliczError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(OrliczError::InvalidParameter(format!("β must be > 0, got {beta}")));
        }
        Ok(Self::LLogBeta { beta })
    }

    pub fn composite(s: f64, p: f64) -> Result<Self, OrliczError> {
        if !(s >= 1.0 && s.is_finite() && p > 0.0 && p.is_finite()) {
            return Err(OrliczError::InvalidParameter(format!("need s ≥ 1 and p > 0, got s={s}, p={p}")));
        }
        Ok(Self::CompositePower { s, p })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        if a == 0.0 {
            return 0.0;
        }
        match *self {
            Self::Power { p } => a.powf(p),
            Self::LLogBeta { beta } => a * a.ln_1p().powf(beta),
            Self::CompositePower { s, p } => a.powf(s) * a.ln_1p().powf(p),
        }
    }

    /// Whether the family member is convex on `[0, ∞)`. Small-β members are
    /// admitted as growth gauges but are not treated as convex.
    pub fn is_convex(&self) -> bool {
        match *self {
            Self::Power { p } => p >= 1.0,
            Self::LLogBeta { beta } => beta >= 1.0,
            Self::CompositePower { s, p } => s >= 1.0 && p >= 1.0,
        }
    }
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { p } => write!(f, "power:{p}"),
            Self::LLogBeta { beta } => write!(f, "llog:{beta}"),
            Self::CompositePower { s, p } => write!(f, "composite:{s},{p}"),
        }
    }
}

impl FromStr for OrliczFunction {
    type Err = OrliczError;

    /// `power:p`, `llog:β` or `composite:s,p`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || OrliczError::InvalidParameter(format!("unrecognised Orlicz function '{text}' (expected power:p, llog:beta or composite:s,p)"));
        let (family, args) = text.trim().split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match (family, nums.as_slice()) {
            ("power", [p]) => Self::power(*p),
            ("llog", [b]) => Self::llog(*b),
            ("composite", [s, p]) => Self::composite(*s, *p),
            _ => Err(bad()),
        }
    }
}

pub fn phi_eval(phi: &OrliczFunction, t: f64) -> f64 {
    phi.eval(t)
}

/// `x ↦ Φ(f(x)/k)`.
pub fn phi_of(phi: &OrliczFunction, f: &MonotoneFunction, k: f64) -> MonotoneFunction {
    let phi = *phi;
    let mut g = f.compose(format!("{phi}∘({})/{k}", f.label()), move |v| phi.eval(v / k), phi.is_convex());
    if let (OrliczFunction::Power { p }, true) = (phi, f.has_analytic_tail()) {
        // power of an x^{-c} is again a power law, keep a closed tail when one applies
        if let Some(c) = f.label().strip_prefix("power:").and_then(|c| c.parse::<f64>().ok()) {
            let e = c * p;
            if e < 1.0 {
                let kp = k.powf(p);
                g = g.with_tail_mass(move |h: f64| h.powf(1.0 - e) / (1.0 - e) / kp);
            }
        }
    }
    g
}

/// `∫_0^1 Φ(f(x)) dx`.
pub fn membership_integral(phi: &OrliczFunction, f: &MonotoneFunction, tol: f64) -> Result<IntegralEstimate, OrliczError> {
    Ok(integrate_monotone(&phi_of(phi, f, 1.0), 0.0, 1.0, tol)?)
}

/// Whether `∫Φ(f/k) > 1`, integrating only as finely as the decision needs.
fn modular_exceeds_one(phi: &OrliczFunction, f: &MonotoneFunction, k: f64, quad_tol: f64) -> Result<bool, NumericsError> {
    let g = phi_of(phi, f, k);
    let mut t = 1e-2f64.max(quad_tol);
    loop {
        let est = match integrate_monotone(&g, 0.0, 1.0, t) {
            Ok(est) => est,
            Err(NumericsError::NonIntegrableDetected { .. }) => return Ok(true),
            Err(e) => return Err(e),
        };
        if est.lower_bound > 1.0 {
            return Ok(true);
        }
        if est.upper_bound <= 1.0 {
            return Ok(false);
        }
        if t <= quad_tol {
            return Ok(est.value > 1.0);
        }
        t = (0.5 * (est.value - 1.0).abs()).min(0.1 * t).max(quad_tol);
    }
}

/// `inf{k > 0 : ∫Φ(f/k) ≤ 1}` to relative tolerance `tol`.
pub fn luxemburg_norm(phi: &OrliczFunction, f: &MonotoneFunction, tol: f64) -> Result<f64, OrliczError> {
    if !(tol > 0.0) {
        return Err(OrliczError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    // the modular has slope about -p at the root, so this keeps k within tol
    let quad_tol = (tol * 0.1).max(1e-13);
    if f.eval(f64::MIN_POSITIVE) == 0.0 && f.eval(1.0 - f64::EPSILON) == 0.0 {
        return Ok(0.0);
    }
    let above = |k: f64| modular_exceeds_one(phi, f, k, quad_tol);

    let (mut lo, mut hi) = (None, None);
    if !above(1.0)? {
        hi = Some(1.0);
        for j in 1..=PROBE_EXPONENT {
            let k = 2f64.powi(-j);
            if above(k)? {
                lo = Some(k);
                break;
            }
            hi = Some(k);
        }
    } else {
        lo = Some(1.0);
        for j in 1..=PROBE_EXPONENT {
            let k = 2f64.powi(j);
            if !above(k)? {
                hi = Some(k);
                break;
            }
            lo = Some(k);
        }
    }
    let mut hi = hi.ok_or(OrliczError::NormInfinite)?;
    let Some(mut lo) = lo else {
        return Ok(hi);
    };
    while hi - lo > tol * lo {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SawyerCheckReport {
    #[serde(rename = "C")]
    pub c: f64,
    pub p_exponent: f64,
    pub violations: Vec<(f64, f64)>,
    pub max_ratio: f64,
    pub points_checked: usize,
    /// Grid points dropped for failing `y ≥ 1, x ≥ 1/y`.
    pub filtered_out: Vec<(f64, f64)>,
}

/// Checks `Φ(xy) ≤ C Φ(y)^p Φ(x)` on the admissible part of `grid`.
pub fn sawyer_growth_check(phi: &OrliczFunction, c: f64, p: f64, grid: &[(f64, f64)]) -> SawyerCheckReport {
    let mut report = SawyerCheckReport {
        c,
        p_exponent: p,
        violations: Vec::new(),
        max_ratio: 0.0,
        points_checked: 0,
        filtered_out: Vec::new(),
    };
    for &(x, y) in grid {
        if !(y >= 1.0 && x >= 1.0 / y) {
            report.filtered_out.push((x, y));
            continue;
        }
        report.points_checked += 1;
        let lhs = phi.eval(x * y);
        let base = phi.eval(y).powf(p) * phi.eval(x);
        let ratio = lhs / base;
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
        }
        if lhs > c * base * (1.0 + 1e-12) {
            report.violations.push((x, y));
        }
    }
    report
}

/// Log-spaced square grid on `[lo, hi]^2`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    let pts: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                lo
            } else {
                (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect();
    pts.iter().flat_map(|&x| pts.iter().map(move |&y| (x, y))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn evaluation_examples() {
        assert_eq!(OrliczFunction::power(2.0).unwrap().eval(3.0), 9.0);
        let l = OrliczFunction::llog(1.0).unwrap();
        assert_eq!(l.eval(0.0), 0.0);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(l.eval(e - 1.0), e - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn parsing() {
        assert_eq!("power:2".parse::<OrliczFunction>().unwrap(), OrliczFunction::Power { p: 2.0 });
        assert_eq!("llog:0.5".parse::<OrliczFunction>().unwrap(), OrliczFunction::LLogBeta { beta: 0.5 });
        assert_eq!(
            "composite:2,1".parse::<OrliczFunction>().unwrap(),
            OrliczFunction::CompositePower { s: 2.0, p: 1.0 }
        );
        assert!("power:0.5".parse::<OrliczFunction>().is_err());
        assert!("cube".parse::<OrliczFunction>().is_err());
    }

    #[test]
    fn norm_examples() {
        let p2 = OrliczFunction::power(2.0).unwrap();
        assert_eq!(luxemburg_norm(&p2, &MonotoneFunction::constant(0.0), 1e-8).unwrap(), 0.0);
        let c = luxemburg_norm(&p2, &MonotoneFunction::constant(3.5), 1e-9).unwrap();
        assert_relative_eq!(c, 3.5, max_relative = 1e-8);
        let q = luxemburg_norm(&p2, &MonotoneFunction::power(0.25), 1e-8).unwrap();
        assert_relative_eq!(q, 2f64.sqrt(), max_relative = 1e-7);
    }

    #[test]
    fn tiny_and_huge_norms() {
        let p1 = OrliczFunction::power(1.0).unwrap();
        let n = luxemburg_norm(&p1, &MonotoneFunction::constant(1e-5), 1e-8).unwrap();
        assert_relative_eq!(n, 1e-5, max_relative = 1e-7);
        let n = luxemburg_norm(&p1, &MonotoneFunction::constant(1e5), 1e-8).unwrap();
        assert_relative_eq!(n, 1e5, max_relative = 1e-7);
    }

    #[test]
    fn non_integrable_norm_is_infinite() {
        let p2 = OrliczFunction::power(2.0).unwrap();
        let err = luxemburg_norm(&p2, &MonotoneFunction::power(0.5), 1e-6).unwrap_err();
        assert_eq!(err, OrliczError::NormInfinite);
    }

    #[test]
    fn membership_examples() {
        let l = OrliczFunction::llog(1.0).unwrap();
        let est = membership_integral(&l, &MonotoneFunction::constant(1.0), 1e-9).unwrap();
        assert_abs_diff_eq!(est.value, 2f64.ln(), epsilon = 1e-9);
        let p1 = OrliczFunction::power(1.0).unwrap();
        let est = membership_integral(&p1, &MonotoneFunction::power(0.5), 1e-6).unwrap();
        assert_abs_diff_eq!(est.value, 2.0, epsilon = 1e-6);
        let p2 = OrliczFunction::power(2.0).unwrap();
        let err = membership_integral(&p2, &MonotoneFunction::power(0.5), 1e-6).unwrap_err();
        assert!(matches!(err, OrliczError::Numerics(NumericsError::NonIntegrableDetected { .. })), "{err:?}");
    }

    #[test]
    fn sawyer_examples() {
        let p2 = OrliczFunction::power(2.0).unwrap();
        let r = sawyer_growth_check(&p2, 1.0, 1.0, &[(3.0, 2.0), (0.1, 1.0)]);
        assert!(r.violations.is_empty());
        assert_eq!(r.filtered_out, vec![(0.1, 1.0)]);
        assert_abs_diff_eq!(r.max_ratio, 1.0, epsilon = 1e-12);
        let r = sawyer_growth_check(&p2, 1.0, 0.5, &[(1.0, 2.0)]);
        assert_eq!(r.violations, vec![(1.0, 2.0)]);
        let l = OrliczFunction::llog(1.0).unwrap();
        let r = sawyer_growth_check(&l, 4.0, 2.0, &log_grid(1.0, 1e4, 40));
        assert!(r.violations.is_empty(), "{:?}", &r.violations[..r.violations.len().min(5)]);
        assert!(r.max_ratio > 0.0 && r.max_ratio <= 4.0);
        let empty = sawyer_growth_check(&l, 1.0, 1.0, &[]);
        assert_eq!(empty.max_ratio, 0.0);
    }

    proptest::proptest! {
        #[test]
        fn phi_is_even_and_nondecreasing(t in 0.0f64..1e6, u in 0.0f64..1e6, beta in 0.1f64..3.0) {
            for phi in [OrliczFunction::Power { p: 1.0 + beta }, OrliczFunction::LLogBeta { beta }, OrliczFunction::CompositePower { s: 1.0 + beta, p: beta }] {
                proptest::prop_assert_eq!(phi.eval(t), phi.eval(-t));
                let (a, b) = if t <= u { (t, u) } else { (u, t) };
                proptest::prop_assert!(phi.eval(a) <= phi.eval(b));
            }
        }

        #[test]
        fn phi_is_superlinear(beta in 0.1f64..3.0) {
            for phi in [OrliczFunction::Power { p: 1.0 + beta }, OrliczFunction::LLogBeta { beta }, OrliczFunction::CompositePower { s: 1.0, p: beta }] {
                let r: Vec<f64> = [1e2, 1e4, 1e6].iter().map(|&t| phi.eval(t) / t).collect();
                proptest::prop_assert!(r[0] < r[1] && r[1] < r[2]);
            }
        }
    }
}
