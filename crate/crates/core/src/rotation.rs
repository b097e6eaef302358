//! Circle rotation `T x = x + α mod 1` in 128-bit fixed point.
//!
//! A [`CirclePoint`] stores `floor(x · 2^128)`, so addition modulo one is
//! plain wrapping `u128` arithmetic and `n·α mod 1` is a single wrapping
//! multiply. Irrational presets are 128-bit truncations; they are
//! technically rational with period around `2^128`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::numerics::MonotoneFunction;

/// floor(((√5 − 1)/2) · 2^128)
pub const GOLDEN_BITS: u128 = 0x9e37_79b9_7f4a_7c15_f39c_c060_5ced_c834;
/// floor((√2 − 1) · 2^128)
pub const SQRT2_BITS: u128 = 0x6a09_e667_f3bc_c908_b2fb_1366_ea95_7d3e;

/// Offset used when an orbit point lands exactly on the singularity at 0.
pub const SINGULARITY_DODGE: f64 = 7.888609052210118e-31; // 2^-100

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;
pub const DECIMAL_DIGITS: usize = 40;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RotationError {
    #[error("unrecognised rotation descriptor '{0}' (expected golden, sqrt2, rational:p/q or bits:<hex>)")]
    BadDescriptor(String),
    #[error("bad decimal circle point '{0}'")]
    BadDecimal(String),
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CirclePoint(pub u128);

impl CirclePoint {
    pub const ZERO: CirclePoint = CirclePoint(0);

    /// Nearest fixed-point value to `x mod 1`.
    pub fn from_f64(x: f64) -> Self {
        let frac = x - x.floor();
        let scaled = (frac * TWO_POW_128).round();
        if scaled >= TWO_POW_128 {
            CirclePoint(0)
        } else {
            CirclePoint(scaled as u128)
        }
    }

    /// floor((num mod den)/den · 2^128), exact.
    pub fn from_ratio(num: u64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        CirclePoint(fraction_bits((num % den) as u128, den as u128))
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / TWO_POW_128
    }

    #[inline]
    pub fn add(self, other: CirclePoint) -> CirclePoint {
        CirclePoint(self.0.wrapping_add(other.0))
    }

    #[inline]
    pub fn sub(self, other: CirclePoint) -> CirclePoint {
        CirclePoint(self.0.wrapping_sub(other.0))
    }

    #[inline]
    pub fn neg(self) -> CirclePoint {
        CirclePoint(self.0.wrapping_neg())
    }

    /// Decimal string with [`DECIMAL_DIGITS`] significant digits, rounded.
    pub fn to_decimal(self) -> String {
        fraction_to_decimal(&BigUint::from(self.0), DECIMAL_DIGITS)
    }

    /// Parses a decimal in `[0, 1]`; `1` wraps to `0`.
    pub fn from_decimal(text: &str) -> Result<Self, RotationError> {
        let scaled = decimal_to_scaled(text)?;
        let modulus = BigUint::one() << 128;
        let reduced: BigUint = scaled % &modulus;
        Ok(CirclePoint(reduced.to_u128().unwrap_or(0)))
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CirclePoint({:#034x} ≈ {:.12})", self.0, self.to_f64())
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl Serialize for CirclePoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_decimal())
    }
}

impl<'de> Deserialize<'de> for CirclePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        CirclePoint::from_decimal(&text).map_err(serde::de::Error::custom)
    }
}

/// floor(r · 2^128 / q) for r < q, q ≤ 2^64.
fn fraction_bits(r: u128, q: u128) -> u128 {
    debug_assert!(r < q);
    if q == 1 {
        return 0;
    }
    // 2^128 = big_q · q + big_r
    let mut big_q = u128::MAX / q;
    let mut big_r = u128::MAX % q + 1;
    if big_r == q {
        big_q += 1;
        big_r = 0;
    }
    r * big_q + (r * big_r) / q
}

fn fraction_to_decimal(numerator: &BigUint, digits: usize) -> String {
    if numerator.is_zero() {
        return "0".to_string();
    }
    let ten = BigUint::from(10u32);
    let threshold = ten.pow(digits as u32 - 1);
    let half = BigUint::one() << 127;
    let mut k = digits;
    loop {
        let n: BigUint = (numerator * ten.pow(k as u32) + &half) >> 128;
        if n >= threshold || k > 200 {
            let s = n.to_str_radix(10);
            if s.len() > k {
                return "1".to_string();
            }
            let padded = format!("{}{}", "0".repeat(k - s.len()), s);
            let trimmed = padded.trim_end_matches('0');
            return format!("0.{trimmed}");
        }
        k += 1;
    }
}

/// Rounds a nonnegative decimal string to `value · 2^128` as an integer.
fn decimal_to_scaled(text: &str) -> Result<BigUint, RotationError> {
    let bad = || RotationError::BadDecimal(text.to_string());
    let t = text.trim();
    let (int_part, frac_part) = match t.split_once('.') {
        Some((i, f)) => (i, f),
        None => (t, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let n = if all_digits.is_empty() {
        BigUint::zero()
    } else {
        BigUint::parse_bytes(all_digits.as_bytes(), 10).ok_or_else(bad)?
    };
    let denom = BigUint::from(10u32).pow(frac_part.len() as u32);
    let scaled = ((n << 128) + (&denom >> 1)) / denom;
    Ok(scaled)
}

/// Rotation number descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaDescriptor {
    GoldenRatio,
    SqrtTwoFrac,
    Rational { num: u64, den: u64 },
    ExplicitBits(u128),
}

impl FromStr for AlphaDescriptor {
    type Err = RotationError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let t = text.trim();
        let bad = || RotationError::BadDescriptor(text.to_string());
        match t {
            "golden" => return Ok(AlphaDescriptor::GoldenRatio),
            "sqrt2" => return Ok(AlphaDescriptor::SqrtTwoFrac),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix("rational:") {
            let (p, q) = rest.split_once('/').ok_or_else(bad)?;
            let num: u64 = p.trim().parse().map_err(|_| bad())?;
            let den: u64 = q.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(AlphaDescriptor::Rational { num, den });
        }
        if let Some(hex) = t.strip_prefix("bits:") {
            let hex = hex.trim().trim_start_matches("0x").replace('_', "");
            if hex.is_empty() || hex.len() > 32 {
                return Err(bad());
            }
            let bits = u128::from_str_radix(&hex, 16).map_err(|_| bad())?;
            return Ok(AlphaDescriptor::ExplicitBits(bits));
        }
        Err(bad())
    }
}

impl fmt::Display for AlphaDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaDescriptor::GoldenRatio => f.write_str("golden"),
            AlphaDescriptor::SqrtTwoFrac => f.write_str("sqrt2"),
            AlphaDescriptor::Rational { num, den } => write!(f, "rational:{num}/{den}"),
            AlphaDescriptor::ExplicitBits(b) => write!(f, "bits:{b:032x}"),
        }
    }
}

/// Rotation by α on the circle.
///
/// Rational descriptors keep `n·p mod q` exactly, so orbits are periodic
/// with period dividing `q`; for non-dyadic `q` the composition law then
/// holds only up to one unit in the last place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RotationSystem {
    alpha: CirclePoint,
    descriptor: AlphaDescriptor,
}

impl RotationSystem {
    pub fn new(descriptor: AlphaDescriptor) -> Self {
        let alpha = match descriptor {
            AlphaDescriptor::GoldenRatio => CirclePoint(GOLDEN_BITS),
            AlphaDescriptor::SqrtTwoFrac => CirclePoint(SQRT2_BITS),
            AlphaDescriptor::Rational { num, den } => CirclePoint::from_ratio(num, den),
            AlphaDescriptor::ExplicitBits(b) => CirclePoint(b),
        };
        Self { alpha, descriptor }
    }

    pub fn golden() -> Self {
        Self::new(AlphaDescriptor::GoldenRatio)
    }

    pub fn sqrt2() -> Self {
        Self::new(AlphaDescriptor::SqrtTwoFrac)
    }

    pub fn rational(num: u64, den: u64) -> Self {
        Self::new(AlphaDescriptor::Rational { num, den })
    }

    pub fn parse(text: &str) -> Result<Self, RotationError> {
        Ok(Self::new(text.parse()?))
    }

    pub fn alpha(&self) -> CirclePoint {
        self.alpha
    }

    pub fn descriptor(&self) -> AlphaDescriptor {
        self.descriptor
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.descriptor, AlphaDescriptor::Rational { .. })
    }

    /// `n·α mod 1`.
    #[inline]
    pub fn shift(&self, n: u64) -> CirclePoint {
        match self.descriptor {
            AlphaDescriptor::Rational { num, den } => {
                let r = (num as u128 % den as u128) * (n as u128 % den as u128) % den as u128;
                CirclePoint(fraction_bits(r, den as u128))
            }
            _ => CirclePoint(self.alpha.0.wrapping_mul(n as u128)),
        }
    }

    /// `T^n x`.
    #[inline]
    pub fn orbit_point(&self, x: CirclePoint, n: u64) -> CirclePoint {
        x.add(self.shift(n))
    }

    /// `T^{-n} x`.
    #[inline]
    pub fn preimage(&self, x: CirclePoint, n: u64) -> CirclePoint {
        x.sub(self.shift(n))
    }

    /// Iterator over `T^n x, T^{n+1} x, …`.
    pub fn orbit_from(&self, x: CirclePoint, n: u64) -> Orbit {
        let state = match self.descriptor {
            AlphaDescriptor::Rational { num, den } => OrbitState::Rational {
                residue: (num as u128 % den as u128) * (n as u128 % den as u128) % den as u128,
                step: num as u128 % den as u128,
                den: den as u128,
            },
            _ => OrbitState::Additive {
                point: self.orbit_point(x, n),
                alpha: self.alpha,
            },
        };
        Orbit { base: x, n, state }
    }

    /// Smallest `n ∈ [n_min, n_max]` with `T^n x ∈ arc`, by linear scan.
    pub fn first_entry_time(&self, x: CirclePoint, arc: &CircleArc, n_min: u64, n_max: u64) -> Option<u64> {
        if n_min > n_max {
            return None;
        }
        self.orbit_from(x, n_min)
            .take_while(|(n, _)| *n <= n_max)
            .find(|(_, p)| arc.contains(*p))
            .map(|(n, _)| n)
    }

    /// Fraction of `n ∈ [0, N)` with `T^n x ∈ arc`.
    pub fn interval_visit_fraction(&self, x: CirclePoint, arc: &CircleArc, count: u64) -> f64 {
        if count == 0 {
            return 0.0;
        }
        let hits = self
            .orbit_from(x, 0)
            .take(count as usize)
            .filter(|(_, p)| arc.contains(*p))
            .count();
        hits as f64 / count as f64
    }

    /// `(1/N) Σ f(T^{n_k} x)` over the given times.
    pub fn ergodic_average(&self, f: &MonotoneFunction, seq: &[u64], x: CirclePoint) -> f64 {
        if seq.is_empty() {
            return 0.0;
        }
        let sum: f64 = seq.iter().map(|&n| eval_at(f, self.orbit_point(x, n))).sum();
        sum / seq.len() as f64
    }
}

/// `f` at a circle point, dodging the singularity at 0.
#[inline]
pub fn eval_at(f: &MonotoneFunction, p: CirclePoint) -> f64 {
    let x = p.to_f64();
    if x == 0.0 {
        let v = f.eval(0.0);
        if v.is_finite() {
            return v;
        }
        log::debug!("orbit point at 0 for {}; evaluating at 2^-100", f.label());
        return f.eval(SINGULARITY_DODGE);
    }
    f.eval(x)
}

#[derive(Debug, Clone)]
enum OrbitState {
    Additive { point: CirclePoint, alpha: CirclePoint },
    Rational { residue: u128, step: u128, den: u128 },
}

/// Successive orbit points paired with their times.
#[derive(Debug, Clone)]
pub struct Orbit {
    base: CirclePoint,
    n: u64,
    state: OrbitState,
}

impl Iterator for Orbit {
    type Item = (u64, CirclePoint);

    #[inline]
    fn next(&mut self) -> Option<Self::Item> {
        let n = self.n;
        let point = match &mut self.state {
            OrbitState::Additive { point, alpha } => {
                let p = *point;
                *point = p.add(*alpha);
                p
            }
            OrbitState::Rational { residue, step, den } => {
                let p = self.base.add(CirclePoint(fraction_bits(*residue, *den)));
                *residue = (*residue + *step) % *den;
                p
            }
        };
        self.n = n.checked_add(1)?;
        Some((n, point))
    }
}

/// Arc length: a fraction below one, or the whole circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcLength {
    Partial(u128),
    Full,
}

/// Half-open arc `[start, start + length)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleArc {
    pub start: CirclePoint,
    pub length: ArcLength,
}

impl CircleArc {
    pub fn new(start: CirclePoint, length: u128) -> Self {
        Self {
            start,
            length: ArcLength::Partial(length),
        }
    }

    pub fn full() -> Self {
        Self {
            start: CirclePoint::ZERO,
            length: ArcLength::Full,
        }
    }

    pub fn empty() -> Self {
        Self::new(CirclePoint::ZERO, 0)
    }

    /// `[start, start + len)` from doubles; `len ≥ 1` gives the full circle.
    pub fn from_f64(start: f64, len: f64) -> Self {
        if len >= 1.0 {
            return Self::full();
        }
        let l = CirclePoint::from_f64(len.max(0.0)).0;
        Self::new(CirclePoint::from_f64(start), l)
    }

    /// `[a, b)` going counterclockwise from `a`; empty when `a == b`.
    pub fn between(a: CirclePoint, b: CirclePoint) -> Self {
        Self::new(a, b.sub(a).0)
    }

    pub fn is_full(&self) -> bool {
        self.length == ArcLength::Full
    }

    pub fn is_empty(&self) -> bool {
        self.length == ArcLength::Partial(0)
    }

    #[inline]
    pub fn contains(&self, x: CirclePoint) -> bool {
        match self.length {
            ArcLength::Full => true,
            ArcLength::Partial(l) => x.sub(self.start).0 < l,
        }
    }

    pub fn measure(&self) -> f64 {
        match self.length {
            ArcLength::Full => 1.0,
            ArcLength::Partial(l) => l as f64 / TWO_POW_128,
        }
    }

    /// Exclusive right endpoint (equals `start` for the full circle).
    pub fn end(&self) -> CirclePoint {
        match self.length {
            ArcLength::Full => self.start,
            ArcLength::Partial(l) => CirclePoint(self.start.0.wrapping_add(l)),
        }
    }

    /// Image under rotation by `shift`.
    pub fn translate(&self, shift: CirclePoint) -> Self {
        Self {
            start: self.start.add(shift),
            length: self.length,
        }
    }

    /// Removes `margin` from both ends; empty when nothing remains.
    pub fn shrink(&self, margin: u128) -> Self {
        match self.length {
            ArcLength::Full => {
                if margin == 0 {
                    *self
                } else {
                    // 2^128 − 2·margin
                    let l = 0u128.wrapping_sub(margin).saturating_sub(margin);
                    Self::new(CirclePoint(self.start.0.wrapping_add(margin)), l)
                }
            }
            ArcLength::Partial(l) => {
                let cut = margin.saturating_mul(2);
                if l <= cut || margin.checked_mul(2).is_none() {
                    Self::empty()
                } else {
                    Self::new(CirclePoint(self.start.0.wrapping_add(margin)), l - cut)
                }
            }
        }
    }

    /// Inclusive `u128` intervals covering the arc.
    pub fn intervals(&self) -> Vec<(u128, u128)> {
        match self.length {
            ArcLength::Full => vec![(0, u128::MAX)],
            ArcLength::Partial(0) => vec![],
            ArcLength::Partial(l) => {
                let s = self.start.0;
                match s.checked_add(l - 1) {
                    Some(e) => vec![(s, e)],
                    None => vec![(s, u128::MAX), (0, s.wrapping_add(l - 1))],
                }
            }
        }
    }

    pub fn intersects(&self, other: &CircleArc) -> bool {
        let a = self.intervals();
        let b = other.intervals();
        a.iter()
            .any(|&(l1, h1)| b.iter().any(|&(l2, h2)| l1 <= h2 && l2 <= h1))
    }

    pub fn to_record(&self) -> ArcRecord {
        ArcRecord {
            start: self.start.to_decimal(),
            length: match self.length {
                ArcLength::Full => "1".to_string(),
                ArcLength::Partial(l) => CirclePoint(l).to_decimal(),
            },
        }
    }
}

/// Decimal-string form of an arc.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub start: String,
    pub length: String,
}

impl ArcRecord {
    pub fn to_arc(&self) -> Result<CircleArc, RotationError> {
        let start = CirclePoint::from_decimal(&self.start)?;
        let scaled = decimal_to_scaled(&self.length)?;
        if scaled >= (BigUint::one() << 128) {
            return Ok(CircleArc {
                start,
                length: ArcLength::Full,
            });
        }
        Ok(CircleArc::new(start, scaled.to_u128().unwrap_or(0)))
    }
}

impl Serialize for CircleArc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

/// Sorted, merged inclusive intervals of a union of arcs.
pub fn merged_intervals(arcs: &[CircleArc]) -> Vec<(u128, u128)> {
    let mut iv: Vec<(u128, u128)> = arcs.iter().flat_map(|a| a.intervals()).collect();
    iv.sort_unstable();
    let mut out: Vec<(u128, u128)> = Vec::with_capacity(iv.len());
    for (lo, hi) in iv {
        if let Some(last) = out.last_mut() {
            if last.1 == u128::MAX || lo <= last.1 + 1 {
                last.1 = last.1.max(hi);
                continue;
            }
        }
        out.push((lo, hi));
    }
    out
}

fn intervals_measure(iv: &[(u128, u128)]) -> f64 {
    iv.iter().map(|&(lo, hi)| ((hi - lo) as f64 + 1.0) / TWO_POW_128).sum()
}

fn intersect_intervals(a: &[(u128, u128)], b: &[(u128, u128)]) -> Vec<(u128, u128)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Lebesgue measure of a union of arcs.
pub fn union_measure(arcs: &[CircleArc]) -> f64 {
    intervals_measure(&merged_intervals(arcs))
}

/// Measure of the symmetric difference of two unions of arcs.
pub fn symmetric_difference_measure(a: &[CircleArc], b: &[CircleArc]) -> f64 {
    let ma = merged_intervals(a);
    let mb = merged_intervals(b);
    let inter = intervals_measure(&intersect_intervals(&ma, &mb));
    (intervals_measure(&ma) - inter) + (intervals_measure(&mb) - inter)
}

/// True when no two arcs share a point.
pub fn pairwise_disjoint(arcs: &[CircleArc]) -> bool {
    let mut iv: Vec<(u128, u128)> = arcs.iter().flat_map(|a| a.intervals()).collect();
    iv.sort_unstable();
    iv.windows(2).all(|w| w[0].1 < w[1].0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn half_rotation_has_period_two() {
        let sys = RotationSystem::rational(1, 2);
        assert_eq!(sys.orbit_point(CirclePoint::ZERO, 3).to_f64(), 0.5);
        assert_eq!(sys.orbit_point(CirclePoint::ZERO, 4), CirclePoint::ZERO);
    }

    #[test]
    fn rational_orbits_are_periodic() {
        let sys = RotationSystem::rational(3, 7);
        let x = CirclePoint::from_f64(0.123);
        for n in 0..50 {
            assert_eq!(sys.orbit_point(x, n), sys.orbit_point(x, n + 7));
        }
        let iterated: Vec<_> = sys.orbit_from(x, 5).take(20).map(|(_, p)| p).collect();
        let direct: Vec<_> = (5..25).map(|n| sys.orbit_point(x, n)).collect();
        assert_eq!(iterated, direct);
    }

    #[test]
    fn golden_thirteenth_iterate() {
        let p = RotationSystem::golden().orbit_point(CirclePoint::ZERO, 13);
        assert_abs_diff_eq!(p.to_f64(), 0.034441853748633, epsilon = 1e-12);
    }

    #[test]
    fn zero_steps_is_identity() {
        let x = CirclePoint(0xdead_beef_u128 << 90);
        assert_eq!(RotationSystem::sqrt2().orbit_point(x, 0), x);
    }

    #[test]
    fn descriptors_round_trip() {
        for text in ["golden", "sqrt2", "rational:2/5", "bits:0000000000000000000000000000abcd"] {
            let d: AlphaDescriptor = text.parse().unwrap();
            assert_eq!(d.to_string(), text);
        }
        assert!("rational:1/0".parse::<AlphaDescriptor>().is_err());
        assert!("pi".parse::<AlphaDescriptor>().is_err());
        assert_eq!(RotationSystem::parse("bits:9e3779b97f4a7c15f39cc0605cedc834").unwrap().alpha(), CirclePoint(GOLDEN_BITS));
    }

    #[test]
    fn entry_times() {
        let half = RotationSystem::rational(1, 2);
        let arc = CircleArc::from_f64(0.4, 0.2);
        assert_eq!(half.first_entry_time(CirclePoint::ZERO, &arc, 0, 100), Some(1));
        let miss = CircleArc::from_f64(0.1, 0.1);
        assert_eq!(half.first_entry_time(CirclePoint::ZERO, &miss, 0, 100), None);
        let golden = RotationSystem::golden();
        let near_zero = CircleArc::from_f64(0.0, 0.05);
        assert_eq!(golden.first_entry_time(CirclePoint::ZERO, &near_zero, 1, 100), Some(13));
    }

    #[test]
    fn visit_fractions() {
        let half = RotationSystem::rational(1, 2);
        assert_eq!(half.interval_visit_fraction(CirclePoint::ZERO, &CircleArc::from_f64(0.6, 0.3), 10_000), 0.0);
        assert_eq!(half.interval_visit_fraction(CirclePoint::ZERO, &CircleArc::full(), 10), 1.0);
        let frac = RotationSystem::golden().interval_visit_fraction(CirclePoint::ZERO, &CircleArc::from_f64(0.3, 0.25), 100_000);
        assert_abs_diff_eq!(frac, 0.25, epsilon = 5e-3);
    }

    #[test]
    fn averages() {
        let one = MonotoneFunction::constant(1.0);
        let g = RotationSystem::golden();
        assert_eq!(g.ergodic_average(&one, &[3, 8, 99], CirclePoint::from_f64(0.2)), 1.0);
        let id = MonotoneFunction::identity();
        let half = RotationSystem::rational(1, 2);
        assert_eq!(half.ergodic_average(&id, &[0, 1], CirclePoint::ZERO), 0.25);
    }

    #[test]
    fn singularity_is_dodged() {
        let f = MonotoneFunction::power(0.5);
        let v = RotationSystem::golden().ergodic_average(&f, &[0], CirclePoint::ZERO);
        assert!(v.is_finite() && v > 1e14);
    }

    #[test]
    fn decimal_round_trip() {
        let p = CirclePoint(GOLDEN_BITS);
        let s = p.to_decimal();
        assert!(s.starts_with("0.6180339887498948482045868343656381177"), "{s}");
        let back = CirclePoint::from_decimal(&s).unwrap();
        assert!(back.0.abs_diff(p.0) < 1u128 << 4);
        assert_eq!(CirclePoint::from_decimal("0.5").unwrap(), CirclePoint(1u128 << 127));
        assert_eq!(CirclePoint::from_decimal("1").unwrap(), CirclePoint::ZERO);
        assert_eq!(CirclePoint::ZERO.to_decimal(), "0");
        assert!(CirclePoint::from_decimal("0.x").is_err());
        let tiny = CirclePoint(12345);
        let back = CirclePoint::from_decimal(&tiny.to_decimal()).unwrap();
        assert_eq!(back, tiny);
    }

    #[test]
    fn arc_records_round_trip() {
        let arc = CircleArc::from_f64(0.9, 0.3);
        let rec = arc.to_record();
        let back = rec.to_arc().unwrap();
        assert_eq!(back.start, arc.start);
        assert_eq!(CircleArc::full().to_record().to_arc().unwrap().length, ArcLength::Full);
    }

    #[test]
    fn arc_membership_wraps() {
        let arc = CircleArc::from_f64(0.9, 0.2);
        assert!(arc.contains(CirclePoint::from_f64(0.95)));
        assert!(arc.contains(CirclePoint::from_f64(0.05)));
        assert!(!arc.contains(CirclePoint::from_f64(0.15)));
        assert!(!arc.contains(arc.end()));
        assert!(arc.contains(arc.start));
        assert_abs_diff_eq!(arc.measure(), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn union_and_symmetric_difference() {
        let a = CircleArc::from_f64(0.9, 0.2);
        let b = CircleArc::from_f64(0.0, 0.5);
        assert_abs_diff_eq!(union_measure(&[a, b]), 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(symmetric_difference_measure(&[a], &[b]), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(union_measure(&[CircleArc::full(), a]), 1.0, epsilon = 1e-15);
        assert!(!pairwise_disjoint(&[a, b]));
        let c = CircleArc::between(CirclePoint::from_f64(0.5), CirclePoint::from_f64(0.9));
        assert!(pairwise_disjoint(&[a, c]));
        assert!(pairwise_disjoint(&[b, c]));
        assert!(a.intersects(&b) && !a.intersects(&c));
    }

    #[test]
    fn shrink_trims_both_ends() {
        let arc = CircleArc::from_f64(0.2, 0.4);
        let m = CirclePoint::from_f64(0.1).0;
        let s = arc.shrink(m);
        assert_abs_diff_eq!(s.measure(), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.start.to_f64(), 0.3, epsilon = 1e-12);
        assert!(arc.shrink(CirclePoint::from_f64(0.3).0).is_empty());
        assert_abs_diff_eq!(CircleArc::full().shrink(m).measure(), 0.8, epsilon = 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn golden_composition_is_exact(x in proptest::num::u128::ANY, m in 0u64..1 << 62, n in 0u64..1 << 62) {
            let sys = RotationSystem::golden();
            let x = CirclePoint(x);
            proptest::prop_assert_eq!(sys.orbit_point(x, m + n), sys.orbit_point(sys.orbit_point(x, m), n));
        }

        #[test]
        fn preimage_inverts(x in proptest::num::u128::ANY, n in proptest::num::u64::ANY) {
            let sys = RotationSystem::sqrt2();
            let x = CirclePoint(x);
            proptest::prop_assert_eq!(sys.preimage(sys.orbit_point(x, n), n), x);
        }

        #[test]
        fn translation_preserves_length(start in 0.0f64..1.0, len in 0.0f64..1.0, n in 0u64..1_000_000) {
            let sys = RotationSystem::golden();
            let arc = CircleArc::from_f64(start, len);
            let moved = arc.translate(sys.shift(n).neg());
            proptest::prop_assert_eq!(moved.length, arc.length);
        }
    }
}
