//! Perturbed block sequences: blocks of consecutive integers `B_k` with
//! arbitrary finite sets `D_k` inserted between consecutive blocks.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::numerics::MonotoneFunction;
use crate::orlicz::OrliczFunction;
use crate::rotation::{eval_at, CirclePoint, RotationSystem};

/// Ratio bound used by the ratio test.
const RATIO_CERTIFICATE: f64 = 0.9;
/// Exponent of the `Σ k^{-q}` comparison certificate.
const COMPARISON_EXPONENT: f64 = 1.1;
/// Relative slack when testing monotone trends on sampled tails.
const TREND_SLACK: f64 = 1e-9;
pub const DEFAULT_REINHOLD_BOUND: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlockSeqError {
    #[error("invalid block sequence: {0}")]
    Invalid(String),
    #[error("no sequence elements ≤ {0}")]
    EmptyPrefix(u64),
    #[error("integer overflow while summing {0}")]
    Overflow(&'static str),
    #[error("cannot parse sequence text: {0}")]
    Parse(String),
    #[error("generator: {0}")]
    Generator(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

pub type Result<T> = std::result::Result<T, BlockSeqError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub start: u64,
    pub len: u64,
}

impl Block {
    pub fn end(&self) -> u64 {
        self.start + self.len - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct PerturbedBlockSequence {
    blocks: Vec<Block>,
    perturbations: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountingProfile {
    pub n: u64,
    pub b_n: u64,
    pub c_n: u64,
}

impl PerturbedBlockSequence {
    /// Validates block ordering and that each `D_k` sits strictly between
    /// `B_k` and `B_{k+1}`. Missing trailing `D_k` are taken empty.
    pub fn new(blocks: Vec<Block>, mut perturbations: Vec<Vec<u64>>) -> Result<Self> {
        if perturbations.len() > blocks.len() {
            return Err(BlockSeqError::Invalid(format!(
                "{} perturbation sets for {} blocks",
                perturbations.len(),
                blocks.len()
            )));
        }
        perturbations.resize(blocks.len(), Vec::new());
        let mut seq = Self::default();
        for (b, d) in blocks.into_iter().zip(perturbations) {
            seq.push_stage(b, d)?;
        }
        Ok(seq)
    }

    /// Appends `B_k` and `D_k`, enforcing the ordering invariants.
    pub fn push_stage(&mut self, block: Block, d: Vec<u64>) -> Result<()> {
        let k = self.blocks.len() + 1;
        if block.len == 0 {
            return Err(BlockSeqError::Invalid(format!("block {k} has zero length")));
        }
        block
            .start
            .checked_add(block.len - 1)
            .ok_or(BlockSeqError::Overflow("block end"))?;
        if let Some(prev) = self.max_element() {
            if block.start <= prev {
                return Err(BlockSeqError::Invalid(format!(
                    "block {k} starts at {} but the previous stage reaches {prev}",
                    block.start
                )));
            }
        }
        if !d.windows(2).all(|w| w[0] < w[1]) {
            return Err(BlockSeqError::Invalid(format!("D_{k} is not strictly increasing")));
        }
        if let Some(&first) = d.first() {
            if first <= block.end() {
                return Err(BlockSeqError::Invalid(format!(
                    "D_{k} element {first} does not lie after block {k} (ends at {})",
                    block.end()
                )));
            }
        }
        self.blocks.push(block);
        self.perturbations.push(d);
        Ok(())
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn perturbations(&self) -> &[Vec<u64>] {
        &self.perturbations
    }

    pub fn stages(&self) -> usize {
        self.blocks.len()
    }

    pub fn l(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.len).collect()
    }

    pub fn d(&self) -> Vec<u64> {
        self.perturbations.iter().map(|d| d.len() as u64).collect()
    }

    pub fn max_element(&self) -> Option<u64> {
        let last = self.blocks.last()?;
        Some(self.perturbations.last().and_then(|d| d.last().copied()).unwrap_or(last.end()))
    }

    pub fn total_len(&self) -> u64 {
        self.blocks.iter().map(|b| b.len).sum::<u64>() + self.perturbations.iter().map(|d| d.len() as u64).sum::<u64>()
    }

    /// Iterates all elements in increasing order, tagged `true` for block members.
    pub fn iter(&self) -> impl Iterator<Item = (u64, bool)> + '_ {
        self.blocks
            .iter()
            .zip(&self.perturbations)
            .flat_map(|(b, d)| (b.start..=b.end()).map(|n| (n, true)).chain(d.iter().map(|&n| (n, false))))
    }

    /// Elements `≤ n` with the counts `b_n` (block members) and `c_n`.
    pub fn elements_upto(&self, n: u64) -> (Vec<u64>, CountingProfile) {
        let mut out = Vec::new();
        let mut profile = CountingProfile { n, b_n: 0, c_n: 0 };
        for (m, in_block) in self.iter().take_while(|&(m, _)| m <= n) {
            out.push(m);
            if in_block {
                profile.b_n += 1;
            } else {
                profile.c_n += 1;
            }
        }
        (out, profile)
    }

    /// Lays out blocks of the given sizes, placing `D_k` at every second
    /// integer after `B_k` and starting `B_{k+1}` two past the last element.
    pub fn from_sizes(l: &[u64], d: &[u64], first_start: u64) -> Result<Self> {
        if l.len() != d.len() {
            return Err(BlockSeqError::Invalid("l and d lengths differ".into()));
        }
        let mut seq = Self::default();
        let mut start = first_start;
        for (&lk, &dk) in l.iter().zip(d) {
            let block = Block { start, len: lk };
            let end = start.checked_add(lk.saturating_sub(1)).ok_or(BlockSeqError::Overflow("layout"))?;
            let dset: Vec<u64> = (1..=dk)
                .map(|j| end.checked_add(2 * j).ok_or(BlockSeqError::Overflow("layout")))
                .collect::<Result<_>>()?;
            let last = dset.last().copied().unwrap_or(end);
            seq.push_stage(block, dset)?;
            start = last.checked_add(2).ok_or(BlockSeqError::Overflow("layout"))?;
        }
        Ok(seq)
    }
}

impl fmt::Display for PerturbedBlockSequence {
    /// `B:start,len; D:{a,b}; B:start,len; …`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (b, d) in self.blocks.iter().zip(&self.perturbations) {
            parts.push(format!("B:{},{}", b.start, b.len));
            if !d.is_empty() {
                let items: Vec<String> = d.iter().map(u64::to_string).collect();
                parts.push(format!("D:{{{}}}", items.join(",")));
            }
        }
        f.write_str(&parts.join("; "))
    }
}

impl FromStr for PerturbedBlockSequence {
    type Err = BlockSeqError;

    fn from_str(text: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut perts: Vec<Vec<u64>> = Vec::new();
        for raw in text.split(';') {
            let item = raw.trim();
            if item.is_empty() {
                continue;
            }
            let parse_u64 = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| BlockSeqError::Parse(format!("bad integer '{}' in '{item}'", s.trim())))
            };
            if let Some(rest) = item.strip_prefix("B:") {
                let (s, l) = rest
                    .split_once(',')
                    .ok_or_else(|| BlockSeqError::Parse(format!("block needs 'start,len': '{item}'")))?;
                blocks.push(Block {
                    start: parse_u64(s)?,
                    len: parse_u64(l)?,
                });
                perts.push(Vec::new());
            } else if let Some(rest) = item.strip_prefix("D:") {
                let inner = rest
                    .trim()
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| BlockSeqError::Parse(format!("perturbation needs braces: '{item}'")))?;
                let slot = perts
                    .last_mut()
                    .ok_or_else(|| BlockSeqError::Parse("D before any block".into()))?;
                if !slot.is_empty() {
                    return Err(BlockSeqError::Parse(format!("two D sets after one block: '{item}'")));
                }
                for s in inner.split(',').filter(|s| !s.trim().is_empty()) {
                    slot.push(parse_u64(s)?);
                }
            } else {
                return Err(BlockSeqError::Parse(format!("expected 'B:' or 'D:' item, got '{item}'")));
            }
        }
        Self::new(blocks, perts)
    }
}

/// Evaluates size generators for `k = 1..=K`. The `d` expression may refer to `l_k`.
pub fn generate_sizes(l_expr: &str, d_expr: &str, k_max: usize, extra: &HashMap<String, f64>) -> Result<(Vec<u64>, Vec<u64>)> {
    let le = Expr::parse(l_expr)?;
    let de = Expr::parse(d_expr)?;
    let mut vars = extra.clone();
    let mut l = Vec::with_capacity(k_max);
    let mut d = Vec::with_capacity(k_max);
    let to_int = |v: f64, what: &str, k: usize| -> Result<u64> {
        let r = v.round();
        if !v.is_finite() || v < 0.0 || (v - r).abs() > 1e-9 * r.abs().max(1.0) || r >= 1.8e19 {
            return Err(BlockSeqError::Generator(format!("{what} at k={k} is {v}, not a nonnegative integer")));
        }
        Ok(r as u64)
    };
    for k in 1..=k_max {
        vars.insert("k".into(), k as f64);
        let lk = to_int(le.eval(&vars)?, "l_k", k)?;
        if lk == 0 {
            return Err(BlockSeqError::Generator(format!("l_k at k={k} is 0")));
        }
        vars.insert("l_k".into(), lk as f64);
        let dk = to_int(de.eval(&vars)?, "d_k", k)?;
        l.push(lk);
        d.push(dk);
    }
    Ok((l, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageDecomposition {
    pub b_n: u64,
    pub c_n: u64,
    pub w_b: f64,
    pub a_b: f64,
    pub w_d: f64,
    pub a_d: f64,
    pub a_total: f64,
}

/// Splits the prefix average into its block and perturbation parts.
pub fn decompose_average(
    seq: &PerturbedBlockSequence,
    sys: &RotationSystem,
    f: &MonotoneFunction,
    x: CirclePoint,
    n: u64,
) -> Result<AverageDecomposition> {
    let mut sum_b = 0.0;
    let mut sum_d = 0.0;
    let (mut b_n, mut c_n) = (0u64, 0u64);
    for (m, in_block) in seq.iter().take_while(|&(m, _)| m <= n) {
        let v = eval_at(f, sys.orbit_point(x, m));
        if in_block {
            sum_b += v;
            b_n += 1;
        } else {
            sum_d += v;
            c_n += 1;
        }
    }
    let total = b_n + c_n;
    if total == 0 {
        return Err(BlockSeqError::EmptyPrefix(n));
    }
    let a_b = if b_n > 0 { sum_b / b_n as f64 } else { 0.0 };
    let a_d = if c_n > 0 { sum_d / c_n as f64 } else { 0.0 };
    let w_b = b_n as f64 / total as f64;
    let w_d = c_n as f64 / total as f64;
    Ok(AverageDecomposition {
        b_n,
        c_n,
        w_b,
        a_b,
        w_d,
        a_d,
        a_total: (sum_b + sum_d) / total as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Convergent,
    Divergent,
    Undetermined,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    /// Index of the first term.
    pub first_index: u64,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub classification: Classification,
    pub rationale: String,
}

impl CriterionReport {
    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + TREND_SLACK))
}

fn nondecreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0] * (1.0 - TREND_SLACK))
}

/// Classifies `Σ t_k` from sampled terms, indices starting at `first_index`.
///
/// Only certificates on the last half of the sample decide: a ratio bound
/// `≤ 0.9`, a nonincreasing `k^{1.1} t_k` (comparison with a convergent
/// p-series), or `t_k ≥ 1/k` with nondecreasing `k t_k` (comparison with the
/// harmonic series). Anything else is undetermined.
pub fn classify_series(terms: &[f64], first_index: u64) -> CriterionReport {
    let mut partial = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for &t in terms {
        acc += t;
        partial.push(acc);
    }
    let n = terms.len();
    let tail_start = n / 2;
    let tail = &terms[tail_start..];
    let idx = |i: usize| (first_index + (tail_start + i) as u64) as f64;

    let (classification, rationale) = if n < 4 {
        (Classification::Undetermined, format!("only {n} terms"))
    } else if tail.iter().all(|&t| t == 0.0) {
        (Classification::Convergent, "all tail terms vanish".to_string())
    } else if tail.iter().all(|&t| t > 0.0 && t.is_finite()) {
        let ratio_sup = tail.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);
        let scaled_cmp: Vec<f64> = tail.iter().enumerate().map(|(i, &t)| idx(i).powf(COMPARISON_EXPONENT) * t).collect();
        let harmonic: Vec<f64> = tail.iter().enumerate().map(|(i, &t)| idx(i) * t).collect();
        if ratio_sup <= RATIO_CERTIFICATE {
            (
                Classification::Convergent,
                format!("ratio test: sup t_(k+1)/t_k = {ratio_sup:.6} ≤ {RATIO_CERTIFICATE} on the last {} terms", tail.len()),
            )
        } else if nonincreasing(&scaled_cmp) {
            (
                Classification::Convergent,
                format!("comparison: k^{COMPARISON_EXPONENT} t_k nonincreasing on the last {} terms", tail.len()),
            )
        } else if harmonic.iter().all(|&h| h >= 1.0) && nondecreasing(&harmonic) {
            (
                Classification::Divergent,
                format!("comparison: t_k ≥ 1/k with k t_k nondecreasing on the last {} terms", tail.len()),
            )
        } else {
            (
                Classification::Undetermined,
                format!("no certificate (sup ratio {ratio_sup:.6})"),
            )
        }
    } else {
        (Classification::Undetermined, "tail mixes zero, negative or non-finite terms".to_string())
    };
    CriterionReport {
        first_index,
        terms: terms.to_vec(),
        partial_sums: partial,
        classification,
        rationale,
    }
}

fn check_lengths(l: &[u64], d: &[u64], k: usize) -> Result<()> {
    if l.len() < k || d.len() < k {
        return Err(BlockSeqError::Invalid(format!(
            "need at least K={k} entries (l has {}, d has {})",
            l.len(),
            d.len()
        )));
    }
    if l[..k].iter().any(|&x| x == 0) {
        return Err(BlockSeqError::Invalid("block lengths must be ≥ 1".into()));
    }
    Ok(())
}

fn prefix_sums(v: &[u64], what: &'static str) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0u64;
    for &x in v {
        acc = acc.checked_add(x).ok_or(BlockSeqError::Overflow(what))?;
        out.push(acc);
    }
    Ok(out)
}

/// `Σ_k 1/Φ((l_1+⋯+l_k)/(d_1+⋯+d_k))` for `k ≤ K`; a zero perturbation total gives a zero term.
pub fn perturbation_criterion(phi: &OrliczFunction, l: &[u64], d: &[u64], k: usize) -> Result<CriterionReport> {
    check_lengths(l, d, k)?;
    let sl = prefix_sums(&l[..k], "Σl")?;
    let sd = prefix_sums(&d[..k], "Σd")?;
    let terms: Vec<f64> = sl
        .iter()
        .zip(&sd)
        .map(|(&a, &b)| if b == 0 { 0.0 } else { 1.0 / phi.eval(a as f64 / b as f64) })
        .collect();
    Ok(classify_series(&terms, 1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropositionReport {
    pub cond_growth: bool,
    /// First `k` with `l_1+⋯+l_k > C l_{k+1}`.
    pub growth_failure: Option<usize>,
    pub c_ratios: Vec<f64>,
    pub sum1: CriterionReport,
    pub sum2: CriterionReport,
}

/// Growth condition `Σ_{j≤k} l_j ≤ C l_{k+1}` plus the series in `1/Φ(l_{k+1}/l_k)`
/// and `1/Φ(1/c_k)` with `c_k = d_k/l_k`.
pub fn proposition_conditions(phi: &OrliczFunction, l: &[u64], d: &[u64], c: f64, k: usize) -> Result<PropositionReport> {
    check_lengths(l, d, k)?;
    let sl = prefix_sums(&l[..k], "Σl")?;
    let growth_failure = (0..k.saturating_sub(1)).find(|&i| sl[i] as f64 > c * l[i + 1] as f64).map(|i| i + 1);
    let c_ratios: Vec<f64> = (0..k).map(|i| d[i] as f64 / l[i] as f64).collect();
    let t1: Vec<f64> = (0..k.saturating_sub(1))
        .map(|i| 1.0 / phi.eval(l[i + 1] as f64 / l[i] as f64))
        .collect();
    let t2: Vec<f64> = c_ratios
        .iter()
        .map(|&ck| if ck == 0.0 { 0.0 } else { 1.0 / phi.eval(1.0 / ck) })
        .collect();
    Ok(PropositionReport {
        cond_growth: growth_failure.is_none(),
        growth_failure,
        c_ratios,
        sum1: classify_series(&t1, 1),
        sum2: classify_series(&t2, 1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReinholdReport {
    pub numerators: Vec<u64>,
    pub denominators: Vec<u64>,
    pub ratios: Vec<f64>,
    pub bound: f64,
    pub bounded: bool,
    pub limit_zero: bool,
}

/// `r_k = (d_1+⋯+d_k)/(l_1+⋯+l_k)` with a boundedness flag and a tail test for `r_k → 0`.
pub fn reinhold_ratio(l: &[u64], d: &[u64], k: usize, bound: f64) -> Result<ReinholdReport> {
    check_lengths(l, d, k)?;
    let sl = prefix_sums(&l[..k], "Σl")?;
    let sd = prefix_sums(&d[..k], "Σd")?;
    let ratios: Vec<f64> = sd.iter().zip(&sl).map(|(&a, &b)| a as f64 / b as f64).collect();
    let bounded = ratios.iter().all(|&r| r <= bound);
    let limit_zero = if k < 4 {
        false
    } else {
        let half = k / 2;
        let tail = &ratios[half - 1..];
        let decreasing = tail.windows(2).all(|w| w[1] <= w[0]);
        decreasing && ratios[k - 1] <= ratios[half - 1] / 2.0
    };
    Ok(ReinholdReport {
        numerators: sd,
        denominators: sl,
        ratios,
        bound,
        bounded,
        limit_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example() -> PerturbedBlockSequence {
        "B:1,3; D:{5}; B:10,6".parse().unwrap()
    }

    #[test]
    fn counting() {
        let s = example();
        let (e, p) = s.elements_upto(12);
        assert_eq!(e, vec![1, 2, 3, 5, 10, 11, 12]);
        assert_eq!((p.b_n, p.c_n), (6, 1));
        let (e, p) = s.elements_upto(0);
        assert!(e.is_empty());
        assert_eq!((p.b_n, p.c_n), (0, 0));
        let (_, p) = s.elements_upto(100);
        assert_eq!((p.b_n, p.c_n), (9, 1));
    }

    #[test]
    fn text_form_round_trips() {
        let s = example();
        assert_eq!(s.to_string(), "B:1,3; D:{5}; B:10,6");
        assert_eq!(s.to_string().parse::<PerturbedBlockSequence>().unwrap(), s);
    }

    #[test]
    fn invalid_sequences_rejected() {
        assert!("B:1,3; D:{3}".parse::<PerturbedBlockSequence>().is_err());
        assert!("B:1,3; D:{5}; B:5,2".parse::<PerturbedBlockSequence>().is_err());
        assert!("B:1,0".parse::<PerturbedBlockSequence>().is_err());
        assert!("D:{1}".parse::<PerturbedBlockSequence>().is_err());
        assert!("B:1,3; D:{7,6}".parse::<PerturbedBlockSequence>().is_err());
        assert!("X:1".parse::<PerturbedBlockSequence>().is_err());
    }

    #[test]
    fn decomposition_examples() {
        let s = example();
        let sys = RotationSystem::golden();
        let one = MonotoneFunction::constant(1.0);
        let r = decompose_average(&s, &sys, &one, CirclePoint::ZERO, 5).unwrap();
        assert_eq!((r.w_b, r.w_d, r.a_total), (0.75, 0.25, 1.0));
        let r = decompose_average(&s, &sys, &one, CirclePoint::ZERO, 3).unwrap();
        assert_eq!((r.w_b, r.a_total), (1.0, r.a_b));
        let id = MonotoneFunction::identity();
        let r = decompose_average(&s, &sys, &id, CirclePoint::ZERO, 12).unwrap();
        assert_abs_diff_eq!(r.a_total, r.w_b * r.a_b + r.w_d * r.a_d, epsilon = 1e-12);
        assert!(matches!(
            decompose_average(&s, &sys, &id, CirclePoint::ZERO, 0),
            Err(BlockSeqError::EmptyPrefix(0))
        ));
    }

    #[test]
    fn criterion_examples() {
        let l: Vec<u64> = (1..=30).map(|k| 1u64 << k).collect();
        let d = vec![2u64; 30];
        let r = perturbation_criterion(&OrliczFunction::Power { p: 2.0 }, &l, &d, 30).unwrap();
        assert_eq!(r.classification, Classification::Convergent, "{}", r.rationale);
        let k5 = 5.0f64;
        assert_abs_diff_eq!(r.terms[4], (2.0 * k5 / (2f64.powi(6) - 2.0)).powi(2), epsilon = 1e-15);

        let l: Vec<u64> = (1..=30).collect();
        let r = perturbation_criterion(&OrliczFunction::Power { p: 1.0 }, &l, &l, 30).unwrap();
        assert_eq!(r.classification, Classification::Divergent, "{}", r.rationale);
        assert!(r.terms.iter().all(|&t| t == 1.0));

        let r = perturbation_criterion(&OrliczFunction::Power { p: 2.0 }, &l, &vec![0; 30], 30).unwrap();
        assert_eq!(r.classification, Classification::Convergent);
        assert_eq!(r.total(), 0.0);
    }

    #[test]
    fn proposition_examples() {
        let l: Vec<u64> = (1..=30).map(|k| 1u64 << k).collect();
        let d: Vec<u64> = (1..=30u64).map(|k| (1u64 << k) / (k * k)).collect();
        let r = proposition_conditions(&OrliczFunction::Power { p: 2.0 }, &l, &d, 2.0, 30).unwrap();
        assert!(r.cond_growth);
        assert_eq!(r.sum2.classification, Classification::Convergent, "{}", r.sum2.rationale);

        let ones = vec![1u64; 10];
        let r = proposition_conditions(&OrliczFunction::Power { p: 2.0 }, &ones, &ones, 1.0, 10).unwrap();
        assert!(!r.cond_growth);
        assert_eq!(r.growth_failure, Some(2));
        assert_eq!(r.sum2.classification, Classification::Divergent);
    }

    #[test]
    fn reinhold_examples() {
        let l: Vec<u64> = (1..=30).map(|k| 1u64 << k).collect();
        let r = reinhold_ratio(&l, &vec![1; 30], 30, DEFAULT_REINHOLD_BOUND).unwrap();
        assert!(r.bounded && r.limit_zero);
        assert_abs_diff_eq!(r.ratios[9], 10.0 / (2f64.powi(11) - 2.0), epsilon = 1e-15);

        let same: Vec<u64> = (1..=30).collect();
        let r = reinhold_ratio(&same, &same, 30, DEFAULT_REINHOLD_BOUND).unwrap();
        assert!(r.bounded && !r.limit_zero);

        let r = reinhold_ratio(&vec![1; 30], &same, 30, DEFAULT_REINHOLD_BOUND).unwrap();
        assert!(!r.bounded && !r.limit_zero);
        assert_eq!(r.ratios[29], 15.5);
    }

    #[test]
    fn generators() {
        let (l, d) = generate_sizes("2^k", "floor(l_k / k^2)", 10, &HashMap::new()).unwrap();
        assert_eq!(l[9], 1024);
        assert_eq!(d[9], 10);
        assert!(generate_sizes("k/3", "0", 5, &HashMap::new()).is_err());
        assert!(generate_sizes("0", "0", 5, &HashMap::new()).is_err());
        let s = PerturbedBlockSequence::from_sizes(&l, &d, 1).unwrap();
        assert_eq!(s.l(), l);
        assert_eq!(s.d(), d);
    }

    #[test]
    fn overflow_is_checked() {
        let l = vec![u64::MAX, u64::MAX];
        assert!(matches!(
            perturbation_criterion(&OrliczFunction::Power { p: 1.0 }, &l, &[1, 1], 2),
            Err(BlockSeqError::Overflow(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn counts_are_consistent(sizes in proptest::collection::vec((1u64..20, 0u64..5), 1..8), n in 0u64..300) {
            let l: Vec<u64> = sizes.iter().map(|s| s.0).collect();
            let d: Vec<u64> = sizes.iter().map(|s| s.1).collect();
            let seq = PerturbedBlockSequence::from_sizes(&l, &d, 1).unwrap();
            let (elems, p) = seq.elements_upto(n);
            proptest::prop_assert_eq!(p.b_n + p.c_n, elems.len() as u64);
            proptest::prop_assert!(elems.windows(2).all(|w| w[0] < w[1]));
            let (_, q) = seq.elements_upto(n + 1);
            proptest::prop_assert!(q.b_n >= p.b_n && q.c_n >= p.c_n);
        }
    }
}
