//! Bracketed quadrature and bisection for monotone functions on (0, 1).
//!
//! Every integral in the crate goes through [`integrate_monotone`]. On a
//! panel `[u, v]` a monotone function satisfies
//!
//! ```text
//! min(f(u), f(v)) (v - u)  <=  ∫_u^v f  <=  max(f(u), f(v)) (v - u)
//! ```
//!
//! and if the function is additionally declared convex the midpoint and
//! trapezoid rules tighten this to `h f(m) <= ∫ <= h (f(u) + f(v)) / 2`.
//! A singularity at the left endpoint is approached with geometric panels
//! `[a + 2^-j W, a + 2^-j+1 W]`; the remaining tail is closed either by
//! the finite value `f(a)`, by an analytic tail mass supplied with the
//! function, or by a ratio comparison on the panel upper bounds.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
pub const DEFAULT_BISECT_TOL: f64 = 1e-10;
pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e9;
pub const DEFAULT_MAX_PANELS: usize = 1_000_000;

/// Consecutive geometric halvings with non-decaying panel bounds after which
/// the singular tail is declared divergent.
const STALL_HALVINGS: usize = 32;
/// Relative resolution limit for bracket widths.
const ROUNDOFF_FLOOR: f64 = 1e-13;
/// Geometric depth used before handing over to an analytic tail mass.
const ANALYTIC_TAIL_DEPTH: i32 = 30;
const MAX_GEOMETRIC_DEPTH: i32 = 1_060;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("integrand is not integrable: lower bound {lower_bound:e} exceeds cap or the singular tail does not decay")]
    NonIntegrableDetected { lower_bound: f64 },
    #[error("tolerance {tol:e} not reached within {panels} panels (bracket width {width:e})")]
    ToleranceNotReached { tol: f64, width: f64, panels: usize },
    #[error("monotonicity violated near x = {at}")]
    NotMonotoneDetected { at: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A nonnegative monotone function on (0, 1), zero to the right of its
/// support endpoint.
#[derive(Clone)]
pub struct MonotoneFunction {
    label: String,
    evaluator: Evaluator,
    decreasing: bool,
    convex: bool,
    support_right: f64,
    tail_mass: Option<Evaluator>,
}

impl fmt::Debug for MonotoneFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneFunction")
            .field("label", &self.label)
            .field("decreasing", &self.decreasing)
            .field("convex", &self.convex)
            .field("support_right", &self.support_right)
            .field("analytic_tail", &self.tail_mass.is_some())
            .finish()
    }
}

impl MonotoneFunction {
    /// A monotone decreasing function with full support.
    pub fn decreasing<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            evaluator: Arc::new(f),
            decreasing: true,
            convex: false,
            support_right: 1.0,
            tail_mass: None,
        }
    }

    /// A monotone nondecreasing function (used for diagnostics such as f(x) = x).
    pub fn increasing<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            decreasing: false,
            ..Self::decreasing(label, f)
        }
    }

    /// Declares the function convex on its support, enabling midpoint/trapezoid brackets.
    pub fn with_convexity(mut self, convex: bool) -> Self {
        self.convex = convex;
        self
    }

    pub fn with_support(mut self, right: f64) -> Self {
        self.support_right = right;
        self
    }

    /// Supplies `h -> ∫_0^h f` for use on the innermost singular tail.
    pub fn with_tail_mass<F>(mut self, tail: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.tail_mass = Some(Arc::new(tail));
        self
    }

    /// f ≡ c.
    pub fn constant(c: f64) -> Self {
        Self::decreasing(format!("const:{c}"), move |_| c).with_convexity(true)
    }

    /// f(x) = x^{-c} for c ≥ 0.
    pub fn power(c: f64) -> Self {
        let f = Self::decreasing(format!("power:{c}"), move |x: f64| x.powf(-c)).with_convexity(true);
        if c < 1.0 {
            f.with_tail_mass(move |h: f64| h.powf(1.0 - c) / (1.0 - c))
        } else {
            f
        }
    }

    /// f(x) = 1 - x.
    pub fn one_minus_x() -> Self {
        Self::decreasing("oneminusx", |x: f64| 1.0 - x).with_convexity(true)
    }

    /// f(x) = x, nondecreasing.
    pub fn identity() -> Self {
        Self::increasing("identity", |x: f64| x).with_convexity(true)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_decreasing(&self) -> bool {
        self.decreasing
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn support_right(&self) -> f64 {
        self.support_right
    }

    pub fn has_analytic_tail(&self) -> bool {
        self.tail_mass.is_some()
    }

    /// Evaluates the function; zero beyond the support endpoint.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x > self.support_right {
            0.0
        } else {
            (self.evaluator)(x)
        }
    }

    /// `∫_0^h f` when an analytic tail is available.
    pub fn tail_mass(&self, h: f64) -> Option<f64> {
        self.tail_mass.as_ref().map(|t| t(h.min(self.support_right)))
    }

    /// The function `x -> g(f(x))` for a nondecreasing outer `g` with `g(0) = 0`.
    /// Convexity is kept only when the caller vouches that `g` is convex.
    pub fn compose<G>(&self, label: impl Into<String>, g: G, outer_convex: bool) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inner = self.evaluator.clone();
        let support = self.support_right;
        Self {
            label: label.into(),
            evaluator: Arc::new(move |x| {
                if x > support {
                    0.0
                } else {
                    g(inner(x))
                }
            }),
            decreasing: self.decreasing,
            convex: self.convex && outer_convex,
            support_right: self.support_right,
            tail_mass: None,
        }
    }

    /// `c · f`, keeping the analytic tail.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.evaluator.clone();
        let tail = self.tail_mass.clone();
        let mut out = Self {
            label: format!("{}*{}", c, self.label),
            evaluator: Arc::new(move |x| c * inner(x)),
            decreasing: self.decreasing,
            convex: self.convex,
            support_right: self.support_right,
            tail_mass: None,
        };
        if let Some(t) = tail {
            out.tail_mass = Some(Arc::new(move |h| c * t(h)));
        }
        if c < 0.0 {
            out.decreasing = !out.decreasing;
            out.convex = false;
        }
        out
    }
}

/// Bracketed integral.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl IntegralEstimate {
    pub fn width(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrationOptions {
    pub divergence_cap: f64,
    pub max_panels: usize,
    /// Also accept a bracket no wider than this fraction of the initial
    /// lower bound.
    pub rel_tol: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
            max_panels: DEFAULT_MAX_PANELS,
            rel_tol: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    u: f64,
    v: f64,
    fu: f64,
    fm: f64,
    fv: f64,
    lower: f64,
    upper: f64,
    value: f64,
}

impl Panel {
    fn new(f: &MonotoneFunction, u: f64, v: f64, fu: f64, fv: f64) -> Self {
        let m = 0.5 * (u + v);
        let fm = f.eval(m);
        Self::with_mid(f.convex, u, v, fu, fm, fv)
    }

    fn with_mid(convex: bool, u: f64, v: f64, fu: f64, fm: f64, fv: f64) -> Self {
        let h = v - u;
        let (lo, hi) = if fu <= fv { (fu, fv) } else { (fv, fu) };
        let mut lower = lo * h;
        let mut upper = hi * h;
        if convex {
            lower = lower.max(fm * h);
            upper = upper.min(0.5 * (fu + fv) * h);
        }
        let simpson = h * (fu + 4.0 * fm + fv) / 6.0;
        let value = simpson.clamp(lower, upper.max(lower));
        Self {
            u,
            v,
            fu,
            fm,
            fv,
            lower,
            upper: upper.max(lower),
            value,
        }
    }

    fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn split(&self, f: &MonotoneFunction) -> (Panel, Panel) {
        let m = 0.5 * (self.u + self.v);
        let left = Panel::new(f, self.u, m, self.fu, self.fm);
        let right = Panel::new(f, m, self.v, self.fm, self.fv);
        (left, right)
    }
}

struct ByWidth(Panel);

impl PartialEq for ByWidth {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ByWidth {}
impl PartialOrd for ByWidth {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByWidth {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.width().total_cmp(&other.0.width())
    }
}

struct Tail {
    lower: f64,
    upper: f64,
    value: f64,
}

/// Integrates a monotone function over `[a, b] ⊆ [0, 1]` with default caps.
pub fn integrate_monotone(f: &MonotoneFunction, a: f64, b: f64, tol: f64) -> Result<IntegralEstimate> {
    integrate_monotone_with(f, a, b, tol, &IntegrationOptions::default())
}

pub fn integrate_monotone_with(
    f: &MonotoneFunction,
    a: f64,
    b: f64,
    tol: f64,
    opts: &IntegrationOptions,
) -> Result<IntegralEstimate> {
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "integration bounds must satisfy 0 <= a < b <= 1, got [{a}, {b}]"
        )));
    }
    if !(tol > 0.0) {
        return Err(NumericsError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let b = b.min(f.support_right);
    if b <= a {
        return Ok(IntegralEstimate {
            value: 0.0,
            lower_bound: 0.0,
            upper_bound: 0.0,
        });
    }

    let fa = f.eval(a);
    let fb = f.eval(b);
    let mut panels: Vec<Panel> = Vec::new();
    let tail = if fa.is_finite() {
        panels.push(Panel::new(f, a, b, fa, fb));
        None
    } else {
        Some(singular_panels(f, a, b, tol, opts, &mut panels)?)
    };
    let (tail_lower, tail_upper, tail_value) = match &tail {
        Some(t) => (t.lower, t.upper, t.value),
        None => (0.0, 0.0, 0.0),
    };
    let initial_lower = tail_lower + panels.iter().map(|p| p.lower).sum::<f64>();
    let tol = tol.max(opts.rel_tol * initial_lower);
    // f64 summation of many panel bounds cannot resolve below this
    let roundoff = ROUNDOFF_FLOOR * (tail_upper + panels.iter().map(|p| p.upper).sum::<f64>());
    let budget = tol - (tail_upper - tail_lower) + roundoff;

    let mut count = panels.len();
    let mut width: f64 = panels.iter().map(Panel::width).sum();
    let mut heap: BinaryHeap<ByWidth> = panels.into_iter().map(ByWidth).collect();
    while width > budget {
        if count + 1 > opts.max_panels {
            return Err(NumericsError::ToleranceNotReached {
                tol,
                width: width + tail_upper - tail_lower,
                panels: count,
            });
        }
        let Some(ByWidth(worst)) = heap.pop() else { break };
        let (l, r) = worst.split(f);
        if l.v <= l.u || r.v <= r.u {
            // panel below floating-point resolution
            return Err(NumericsError::ToleranceNotReached {
                tol,
                width: width + tail_upper - tail_lower,
                panels: count,
            });
        }
        width += l.width() + r.width() - worst.width();
        count += 1;
        heap.push(ByWidth(l));
        heap.push(ByWidth(r));
        if count % 4096 == 0 {
            width = heap.iter().map(|p| p.0.width()).sum();
            let lower: f64 = heap.iter().map(|p| p.0.lower).sum::<f64>() + tail_lower;
            if lower > opts.divergence_cap {
                return Err(NumericsError::NonIntegrableDetected { lower_bound: lower });
            }
        }
    }

    let mut lower = tail_lower;
    let mut upper = tail_upper;
    let mut value = tail_value;
    for p in heap.iter() {
        lower += p.0.lower;
        upper += p.0.upper;
        value += p.0.value;
    }
    if lower > opts.divergence_cap {
        return Err(NumericsError::NonIntegrableDetected { lower_bound: lower });
    }
    if upper - lower > tol * (1.0 + 1e-3) + roundoff {
        return Err(NumericsError::ToleranceNotReached {
            tol,
            width: upper - lower,
            panels: count,
        });
    }
    Ok(IntegralEstimate {
        value: value.clamp(lower, upper),
        lower_bound: lower,
        upper_bound: upper,
    })
}

/// Lays down geometric panels toward a singular left endpoint and bounds the tail.
fn singular_panels(
    f: &MonotoneFunction,
    a: f64,
    b: f64,
    tol: f64,
    opts: &IntegrationOptions,
    panels: &mut Vec<Panel>,
) -> Result<Tail> {
    let w = b - a;
    let point = |j: i32| a + w * 2f64.powi(-j);

    if a == 0.0 && f.tail_mass.is_some() {
        let mut right = b;
        let mut f_right = f.eval(b);
        for j in 1..=ANALYTIC_TAIL_DEPTH {
            let left = point(j);
            let f_left = f.eval(left);
            panels.push(Panel::new(f, left, right, f_left, f_right));
            right = left;
            f_right = f_left;
        }
        let t = f.tail_mass(right).unwrap_or(0.0);
        return Ok(Tail {
            lower: t,
            upper: t,
            value: t,
        });
    }

    let mut right = b;
    let mut f_right = f.eval(b);
    let mut uppers: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut lower_sum = 0.0;
    let mut stalled = 0usize;
    for j in 1..=MAX_GEOMETRIC_DEPTH {
        let left = point(j);
        if left <= a || left >= right {
            break;
        }
        let f_left = f.eval(left);
        if !f_left.is_finite() {
            break;
        }
        let panel = Panel::new(f, left, right, f_left, f_right);
        lower_sum += panel.lower;
        if lower_sum > opts.divergence_cap {
            return Err(NumericsError::NonIntegrableDetected { lower_bound: lower_sum });
        }
        let upper = f_left.max(f_right) * (right - left);
        if let Some(&prev) = uppers.last() {
            // roundoff in the integrand can hide an exactly flat sequence
            if upper >= prev * (1.0 - 1e-6) {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        if stalled >= STALL_HALVINGS {
            return Err(NumericsError::NonIntegrableDetected { lower_bound: lower_sum });
        }
        uppers.push(upper);
        values.push(panel.value);
        panels.push(panel);
        right = left;
        f_right = f_left;

        let n = uppers.len();
        if n >= 4 {
            let rho = (n - 3..n)
                .map(|i| uppers[i] / uppers[i - 1])
                .fold(0.0f64, f64::max);
            if rho < 0.99 {
                let tail_upper = uppers[n - 1] * rho / (1.0 - rho);
                if tail_upper <= 0.5 * tol {
                    let tail_lower = f_left * left;
                    let rv = (values[n - 1] / values[n - 2]).clamp(0.0, rho);
                    let tail_value = (values[n - 1] * rv / (1.0 - rv)).clamp(tail_lower, tail_upper.max(tail_lower));
                    return Ok(Tail {
                        lower: tail_lower.min(tail_upper),
                        upper: tail_upper.max(tail_lower),
                        value: tail_value,
                    });
                }
            }
        }
    }
    Err(NumericsError::ToleranceNotReached {
        tol,
        width: f64::INFINITY,
        panels: panels.len(),
    })
}

/// `(1/L) ∫_0^L f`, integrated to absolute tolerance `tol · L`.
pub fn prefix_average(f: &MonotoneFunction, len: f64, tol: f64) -> Result<f64> {
    if !(len > 0.0 && len <= 1.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "prefix length must lie in (0, 1], got {len}"
        )));
    }
    let est = integrate_monotone(f, 0.0, len, tol * len)?;
    Ok(est.value / len)
}

/// Prefix integrals `∫_0^L f` that reuse earlier evaluations. A new `L` is
/// reached from the nearest known point in `[L/2, L)`, with a tolerance
/// proportional to the added length, so bracket widths stay within
/// `avg_tol · L / 2` along any chain of queries; without such a point the
/// integral starts again from 0.
pub struct PrefixIntegrals<'a> {
    f: &'a MonotoneFunction,
    opts: IntegrationOptions,
    known: Vec<(f64, IntegralEstimate)>,
}

impl<'a> PrefixIntegrals<'a> {
    /// Each integration also accepts a bracket within `rel_tol` of its value.
    pub fn new(f: &'a MonotoneFunction, rel_tol: f64) -> Self {
        Self {
            f,
            opts: IntegrationOptions {
                rel_tol,
                ..Default::default()
            },
            known: Vec::new(),
        }
    }

    /// `(1/L) ∫_0^L f` to absolute tolerance `avg_tol`, or the relative one.
    pub fn average(&mut self, len: f64, avg_tol: f64) -> Result<f64> {
        if !(len > 0.0 && len <= 1.0) {
            return Err(NumericsError::InvalidArgument(format!(
                "prefix length must lie in (0, 1], got {len}"
            )));
        }
        let pos = self.known.partition_point(|(l, _)| *l <= len);
        if pos > 0 && self.known[pos - 1].0 == len {
            return Ok(self.known[pos - 1].1.value / len);
        }
        let base = pos.checked_sub(1).map(|j| self.known[j]).filter(|(l, _)| *l >= 0.5 * len);
        let est = if let Some((base_len, base)) = base {
            let piece = integrate_monotone_with(self.f, base_len, len, 0.5 * avg_tol * (len - base_len), &self.opts)?;
            IntegralEstimate {
                value: base.value + piece.value,
                lower_bound: base.lower_bound + piece.lower_bound,
                upper_bound: base.upper_bound + piece.upper_bound,
            }
        } else {
            integrate_monotone_with(self.f, 0.0, len, 0.5 * avg_tol * len, &self.opts)?
        };
        self.known.insert(pos, (len, est));
        Ok(est.value / len)
    }
}

/// Locates `x` with `g(x) = target` for monotone `g` on `[lo, hi]` to interval
/// width `tol`. Returns `hi` when `g` stays strictly above the target and `lo`
/// when it stays strictly below.
pub fn bisect_monotone<G>(mut g: G, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "bisection needs lo <= hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})"
        )));
    }
    let g_lo = g(lo)?;
    let g_hi = g(hi)?;
    if g_lo > target && g_hi > target {
        return Ok(hi);
    }
    if g_lo < target && g_hi < target {
        return Ok(lo);
    }
    if g_lo == target {
        return Ok(lo);
    }
    if g_hi == target {
        return Ok(hi);
    }
    let increasing = g_hi > g_lo;
    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (g_lo, g_hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        let slack = tol * ga.abs().max(gb.abs()).max(1.0);
        let (min, max) = if ga <= gb { (ga, gb) } else { (gb, ga) };
        if gm < min - slack || gm > max + slack {
            return Err(NumericsError::NotMonotoneDetected { at: m });
        }
        if (gm < target) == increasing {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
    }
    Ok(0.5 * (a + b))
}
