//! Inductive construction of a perturbed block sequence along which
//! averages of a singular decreasing `f` become large on a moving arc, and
//! the explicit family
//!
//! `g_s(x) = (LL + 1) / ((x/2) · L^{s+1} · LL^{s+1})` on `(0, ε_s]`,
//! `L = ln(2/x)`, `LL = ln L`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::blockseq::{classify_series, Block, BlockSeqError, Classification, CriterionReport, PerturbedBlockSequence};
use crate::levelset::{construct_witness, m_lambda, LevelSetError, WitnessParams};
use crate::numerics::MonotoneFunction;
use crate::rotation::{eval_at, ArcLength, CircleArc, CirclePoint, RotationSystem};

/// First stage index; natural logs give `ln ln 16 > 0`.
pub const K0: usize = 16;
/// Constant in the stage inequality `lhs ≥ C · (d_k / total) · (s_k / 2)`.
pub const STAGE_CONSTANT: f64 = 0.25;
pub const EPS_GRID_POINTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DivergenceError {
    #[error("g_s is defined for x > 0, got {0}")]
    Domain(f64),
    #[error("no ε in the ladder makes g_s monotone for s = {0}")]
    NoValidEps(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("a_{k} = 0, the schedule is degenerate")]
    ScheduleDegenerate { k: usize },
    #[error("stage {stage} failed: {reason}")]
    StageFailed { stage: usize, reason: String },
    #[error("schedule ends at stage {last}, stage {stage} requested")]
    ScheduleExhausted { stage: usize, last: usize },
    #[error(transparent)]
    LevelSet(#[from] LevelSetError),
    #[error(transparent)]
    BlockSeq(#[from] BlockSeqError),
}

pub type Result<T> = std::result::Result<T, DivergenceError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GsFunction {
    pub s: f64,
    pub eps_s: f64,
}

fn gs_formula(s: f64, x: f64) -> f64 {
    let l = (2.0 / x).ln();
    let ll = l.ln();
    (ll + 1.0) / (0.5 * x * (l * ll).powf(s + 1.0))
}

/// `∫_0^x g_s = (2/s) (L · LL)^{-s}`.
fn gs_mass(s: f64, x: f64) -> f64 {
    let l = (2.0 / x).ln();
    2.0 / s * (l * l.ln()).powf(-s)
}

impl GsFunction {
    /// `g_s` with `ε_s` from [`choose_eps_s`].
    pub fn new(s: f64) -> Result<Self> {
        Ok(Self { s, eps_s: choose_eps_s(s)? })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        gs_eval(self, x)
    }

    /// `∫_0^x g_s`, constant beyond `ε_s`.
    pub fn mass_below(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gs_mass(self.s, x.min(self.eps_s))
        }
    }

    /// As a [`MonotoneFunction`] with support `(0, ε_s]` and its closed-form
    /// tail. Convexity is taken from a grid check.
    pub fn to_monotone(&self) -> MonotoneFunction {
        let s = self.s;
        let convex = convex_on_grid(s, self.eps_s);
        MonotoneFunction::decreasing(format!("gs:{s}"), move |x| {
            if x <= 0.0 {
                f64::INFINITY
            } else {
                gs_formula(s, x)
            }
        })
        .with_support(self.eps_s)
        .with_convexity(convex)
        .with_tail_mass(move |h| if h <= 0.0 { 0.0 } else { gs_mass(s, h) })
    }
}

pub fn gs_eval(g: &GsFunction, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(DivergenceError::Domain(x));
    }
    Ok(if x > g.eps_s { 0.0 } else { gs_formula(g.s, x) })
}

fn eps_ladder() -> Vec<f64> {
    let mut out = vec![2.0 * (-std::f64::consts::E).exp()];
    out.extend((1..=6).map(|j| 10f64.powi(-j)));
    out
}

/// Largest ladder value for which `ln ln(2/ε) > 0` and `g_s` is
/// nonincreasing on a uniform grid of `(0, ε]`.
pub fn choose_eps_s(s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(DivergenceError::InvalidArgument(format!("s must be > 0, got {s}")));
    }
    'ladder: for eps in eps_ladder() {
        if !((2.0 / eps).ln().ln() > 0.0) {
            continue;
        }
        let mut prev = f64::INFINITY;
        for i in 1..=EPS_GRID_POINTS {
            let x = eps * i as f64 / EPS_GRID_POINTS as f64;
            let v = gs_formula(s, x);
            if !(v.is_finite() && v > 0.0 && v <= prev) {
                continue 'ladder;
            }
            prev = v;
        }
        return Ok(eps);
    }
    Err(DivergenceError::NoValidEps(s))
}

fn convex_on_grid(s: f64, eps: f64) -> bool {
    // geometric grid towards the singularity, uniform near ε
    let n = EPS_GRID_POINTS;
    let geo = (0..n).map(|i| eps * 1e-12f64.powf(1.0 - i as f64 / (n - 1) as f64));
    let uni = (1..=n).map(|i| eps * i as f64 / n as f64);
    let mut xs: Vec<f64> = geo.chain(uni).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.windows(3).all(|w| {
        let (a, b, c) = (gs_formula(s, w[0]), gs_formula(s, w[1]), gs_formula(s, w[2]));
        // value at the middle lies below the chord
        let t = (w[1] - w[0]) / (w[2] - w[0]);
        b <= a + t * (c - a) + 1e-9 * a.abs()
    })
}

/// `s_k = k / ((ln k)^{s-1} (ln ln k)^s)`.
pub fn s_k(s: f64, k: usize) -> f64 {
    let lk = (k as f64).ln();
    k as f64 / (lk.powf(s - 1.0) * lk.ln().powf(s))
}

/// `c_k = ln ln k / s_k`.
pub fn c_k(s: f64, k: usize) -> f64 {
    (k as f64).ln().ln() / s_k(s, k)
}

/// Levels, arc lengths and arcs for stages `k0..=K`.
///
/// `p_points[i] = p_{k0+i}` and `j_arcs[i] = J_{k0+i-1} = [p_{k0+i-1}, p_{k0+i}]`
/// with `p_{k0-1} = 0`, so stage `k` targets `j_arcs[k - k0]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceSchedule {
    pub k0: usize,
    pub s: Vec<f64>,
    pub c: Vec<f64>,
    pub a: Vec<f64>,
    pub p_points: Vec<CirclePoint>,
    pub j_arcs: Vec<CircleArc>,
    pub delta: Vec<f64>,
}

fn arc_from(start: CirclePoint, len: f64) -> CircleArc {
    if len >= 1.0 {
        CircleArc {
            start,
            length: ArcLength::Full,
        }
    } else {
        CircleArc::new(start, CirclePoint::from_f64(len).0)
    }
}

impl DivergenceSchedule {
    /// Fills `a_k = M_{s_k/2}(f)` and the derived points and arcs for given
    /// levels `s_k` (and companion `c_k`) starting at stage `k0`.
    pub fn from_levels(k0: usize, s: Vec<f64>, c: Vec<f64>, f: &MonotoneFunction, tol: f64) -> Result<Self> {
        if s.is_empty() || s.len() != c.len() {
            return Err(DivergenceError::InvalidArgument(format!(
                "need matching nonempty level lists, got {} and {}",
                s.len(),
                c.len()
            )));
        }
        let a = s
            .iter()
            .map(|&sk| m_lambda(f, sk / 2.0, tol))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let mut p = CirclePoint::ZERO;
        let mut p_points = Vec::with_capacity(a.len());
        let mut j_arcs = Vec::with_capacity(a.len());
        for &ak in &a {
            j_arcs.push(arc_from(p, ak));
            p = p.add(CirclePoint::from_f64(ak));
            p_points.push(p);
        }
        let delta = (0..a.len()).map(|i| a.get(i + 1).copied().unwrap_or(a[i]) / 10.0).collect();
        Ok(Self {
            k0,
            s,
            c,
            a,
            p_points,
            j_arcs,
            delta,
        })
    }

    pub fn last_stage(&self) -> usize {
        self.k0 + self.a.len() - 1
    }

    fn index(&self, k: usize) -> Result<usize> {
        if k < self.k0 || k > self.last_stage() {
            return Err(DivergenceError::ScheduleExhausted {
                stage: k,
                last: self.last_stage(),
            });
        }
        Ok(k - self.k0)
    }

    /// `(J_{k-1})_{δ_k}`: the arc stage `k` works on.
    pub fn target_arc(&self, k: usize) -> Result<CircleArc> {
        let i = self.index(k)?;
        Ok(self.j_arcs[i].shrink(CirclePoint::from_f64(self.delta[i]).0))
    }
}

/// Schedule for `g_s`-type levels `s_k`, `c_k` over `k0..=K`.
pub fn schedule_from_example(s: f64, k_max: usize, f: &MonotoneFunction, tol: f64) -> Result<DivergenceSchedule> {
    if !(s > 0.0) {
        return Err(DivergenceError::InvalidArgument(format!("s must be > 0, got {s}")));
    }
    if k_max < K0 {
        return Err(DivergenceError::InvalidArgument(format!("K must be ≥ {K0}, got {k_max}")));
    }
    let ks = K0..=k_max;
    let levels: Vec<f64> = ks.clone().map(|k| s_k(s, k)).collect();
    let c: Vec<f64> = ks.map(|k| c_k(s, k)).collect();
    let sched = DivergenceSchedule::from_levels(K0, levels, c, f, tol)?;
    if let Some(i) = sched.a.iter().position(|&a| a == 0.0) {
        return Err(DivergenceError::ScheduleDegenerate { k: K0 + i });
    }
    Ok(sched)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreconditionReport {
    pub sum_a: f64,
    pub partial_sums: Vec<f64>,
    /// `a_k ≥ 1/(k ln k)` at every computed `k`.
    pub comparison_holds: bool,
    pub first_violation: Option<usize>,
    pub diverging_evidence: bool,
}

/// Partial sums of `a_k` and the pointwise comparison with `1/(k ln k)`,
/// whose series diverges.
pub fn divergence_precondition_check(schedule: &DivergenceSchedule, k_max: usize) -> PreconditionReport {
    let last = k_max.min(schedule.last_stage());
    let mut acc = 0.0;
    let mut partial_sums = Vec::new();
    let mut first_violation = None;
    for k in schedule.k0..=last {
        let a = schedule.a[k - schedule.k0];
        acc += a;
        partial_sums.push(acc);
        let kf = k as f64;
        if first_violation.is_none() && a < 1.0 / (kf * kf.ln()) {
            first_violation = Some(k);
        }
    }
    let comparison_holds = first_violation.is_none() && !partial_sums.is_empty();
    PreconditionReport {
        sum_a: acc,
        partial_sums,
        comparison_holds,
        first_violation,
        diverging_evidence: comparison_holds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstructionOptions {
    pub max_total_elements: u64,
    pub max_scan: u64,
    /// Cap on certification cells per witness.
    pub max_cells: usize,
    pub beta_prox: f64,
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for ConstructionOptions {
    fn default() -> Self {
        Self {
            max_total_elements: 10_000_000,
            max_scan: 100_000_000,
            max_cells: 256,
            beta_prox: 1e-3,
            sample_count: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub k: usize,
    pub l_k: u64,
    pub d_k: u64,
    /// Smallest full average over the sampled points.
    pub lower_bound_lhs: f64,
    pub lower_bound_rhs: f64,
    pub sample_points_checked: usize,
    pub passed: bool,
    /// Smallest `(1/d_k) Σ_{u ∈ D_k} f(T^u x)` over the samples.
    pub min_perturbation_average: f64,
    pub d_over_l: f64,
    pub d_over_total: f64,
    /// `|(J_{k-1})_{δ_k}|` and the part of it where the `D_k` witness is
    /// certified at `s_k/8`; filled by the construction.
    pub target_measure: f64,
    pub witness_certified_measure: f64,
    /// Certified lower bound of the `D_k` average on the certified arc.
    pub witness_certified_min: f64,
}

/// Smallest `l ≥ l_min` with `round(c·l)` even and at least 2.
fn admissible_length(l_min: u64, c: f64) -> u64 {
    let mut l = l_min.max(1);
    loop {
        let d = (c * l as f64).round() as u64;
        if d >= 2 && d % 2 == 0 {
            return l;
        }
        l += 1;
    }
}

/// Builds stages `k0..=K`: `B_k` follows everything before it with the
/// smallest `l_k` satisfying `l_k ≥ k·l_{k-1}`, `l_k > ` the previous maximum
/// and `d_k = round(c_k l_k)` even, and `D_k` is a witness of exactly `d_k`
/// times at level `s_k/4` on `(J_{k-1})_{δ_k}`, searched after the end of
/// `B_k`. The witness certificate is reported, not required.
pub fn construct_divergent_sequence(
    sys: &RotationSystem,
    f: &MonotoneFunction,
    schedule: &DivergenceSchedule,
    k_max: usize,
    opts: &ConstructionOptions,
) -> Result<(PerturbedBlockSequence, Vec<StageReport>)> {
    schedule.index(k_max)?;
    let mut seq = PerturbedBlockSequence::default();
    let mut reports = Vec::new();
    let mut total = 0u64;
    for k in schedule.k0..=k_max {
        let i = k - schedule.k0;
        let (s, c, delta) = (schedule.s[i], schedule.c[i], schedule.delta[i]);
        let arc = schedule.target_arc(k)?;
        let m = arc.measure();
        let fail = |reason: String| DivergenceError::StageFailed { stage: k, reason };
        if m == 0.0 {
            return Err(fail("target arc is empty".into()));
        }
        let prev_max = seq.max_element().unwrap_or(0);
        let l_prev = seq.blocks().last().map_or(0, |b| b.len);
        let l = admissible_length((k as u64).saturating_mul(l_prev).max(prev_max + 1), c);
        let d = (c * l as f64).round() as u64;
        if total + l + d > opts.max_total_elements {
            return Err(fail(format!(
                "element budget {} exceeded: stage needs l_k = {l}, d_k = {d} on top of {total}",
                opts.max_total_elements
            )));
        }
        let block = Block {
            start: prev_max + 1,
            len: l,
        };
        // certified threshold λ/2 = s_k/8 is the per-term share of the stage rhs
        let lambda = s / 4.0;
        let params = WitnessParams {
            delta,
            epsilon: (m / 10.0).min(1e-3),
            // the size is fixed by d_k, not by a Riemann slack
            eta: f64::INFINITY,
            beta_prox: opts.beta_prox,
            n_start: block.end() + 1,
            min_r: d / 2,
            max_scan: opts.max_scan,
            max_cells: opts.max_cells,
        };
        let witness = construct_witness(sys, f, lambda, &arc, &params).map_err(|e| fail(e.to_string()))?;
        debug_assert_eq!(witness.subsequence.len() as u64, d);
        log::info!(
            "stage {k}: l = {l}, d = {d}, witness certified on {} of {m}, scan ended at {}",
            witness.certified_measure,
            witness.scan_end
        );
        total += l + d;
        let certified_measure = witness.certified_measure;
        let min_cert = witness.min_average_on_arc;
        seq.push_stage(block, witness.subsequence)?;
        let seed = opts.seed.wrapping_add(k as u64);
        let mut report = stage_inequality_check(&seq, sys, f, schedule, k, opts.sample_count, seed)?;
        report.witness_certified_measure = certified_measure;
        report.witness_certified_min = min_cert;
        report.target_measure = m;
        reports.push(report);
    }
    Ok((seq, reports))
}

/// Uniform point of `arc`.
fn sample_in(arc: &CircleArc, rng: &mut ChaCha8Rng) -> CirclePoint {
    let r: u128 = rng.gen();
    match arc.length {
        ArcLength::Full => CirclePoint(r),
        ArcLength::Partial(l) => CirclePoint(arc.start.0.wrapping_add(r % l)),
    }
}

/// Checks `lhs ≥ (1/4)(d_k/total)(s_k/2)` at `sample_count` seeded points of
/// `(J_{k-1})_{δ_k}`, where `lhs` averages `f(T^u x)` over every element of
/// stages up to `k`.
pub fn stage_inequality_check(
    seq: &PerturbedBlockSequence,
    sys: &RotationSystem,
    f: &MonotoneFunction,
    schedule: &DivergenceSchedule,
    k: usize,
    sample_count: usize,
    seed: u64,
) -> Result<StageReport> {
    let i = schedule.index(k)?;
    if i >= seq.stages() {
        return Err(DivergenceError::InvalidArgument(format!(
            "stage {k} is not constructed ({} stages present)",
            seq.stages()
        )));
    }
    let arc = schedule.target_arc(k)?;
    if arc.is_empty() {
        return Err(DivergenceError::InvalidArgument(format!("target arc of stage {k} is empty")));
    }
    let blocks = &seq.blocks()[..=i];
    let perts = &seq.perturbations()[..=i];
    let total: u64 = blocks.iter().map(|b| b.len).sum::<u64>() + perts.iter().map(|d| d.len() as u64).sum::<u64>();
    let l_k = blocks[i].len;
    let d_k = perts[i].len() as u64;
    let rhs = STAGE_CONSTANT * (d_k as f64 / total as f64) * (schedule.s[i] / 2.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_lhs = f64::INFINITY;
    let mut min_pert = f64::INFINITY;
    let mut passed = true;
    for _ in 0..sample_count {
        let x = sample_in(&arc, &mut rng);
        let mut sum = 0.0;
        for (b, d) in blocks.iter().zip(perts) {
            sum += sys
                .orbit_from(x, b.start)
                .take(b.len as usize)
                .map(|(_, p)| eval_at(f, p))
                .sum::<f64>();
            sum += d.iter().map(|&u| eval_at(f, sys.orbit_point(x, u))).sum::<f64>();
        }
        let pert: f64 = perts[i].iter().map(|&u| eval_at(f, sys.orbit_point(x, u))).sum();
        let lhs = sum / total as f64;
        passed &= lhs >= rhs;
        min_lhs = min_lhs.min(lhs);
        if d_k > 0 {
            min_pert = min_pert.min(pert / d_k as f64);
        }
    }
    Ok(StageReport {
        k,
        l_k,
        d_k,
        lower_bound_lhs: min_lhs,
        lower_bound_rhs: rhs,
        sample_points_checked: sample_count,
        passed: passed && sample_count > 0,
        min_perturbation_average: if d_k > 0 { min_pert } else { 0.0 },
        d_over_l: d_k as f64 / l_k as f64,
        d_over_total: d_k as f64 / total as f64,
        target_measure: arc.measure(),
        witness_certified_measure: 0.0,
        witness_certified_min: 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    InSpace,
    NotInSpace,
}

/// Whether `g_s ∈ L Log^p L`: for `s ≤ 1` exactly when `s > p`, for `s > 1`
/// exactly when `s ≥ p`.
pub fn membership_exponent_classifier(s: f64, p: f64) -> Result<Membership> {
    if !(s > 0.0 && p >= 0.0) {
        return Err(DivergenceError::InvalidArgument(format!("need s > 0 and p ≥ 0, got s={s}, p={p}")));
    }
    let inside = if s <= 1.0 { s > p } else { s >= p };
    Ok(if inside {
        Membership::InSpace
    } else {
        Membership::NotInSpace
    })
}

/// Terms `(ln ln k)^{s+2} / (k (ln k)^{p+1-s})` for `k = 16..=K`, classified
/// by the exponent of `ln k`: the series converges iff `p + 1 - s > 1`.
pub fn example_criterion_series(s: f64, p: f64, k_max: usize) -> Result<CriterionReport> {
    if k_max < K0 {
        return Err(DivergenceError::InvalidArgument(format!("K must be ≥ {K0}, got {k_max}")));
    }
    let q = p + 1.0 - s;
    let terms: Vec<f64> = (K0..=k_max)
        .map(|k| {
            let lk = (k as f64).ln();
            lk.ln().powf(s + 2.0) / (k as f64 * lk.powf(q))
        })
        .collect();
    let mut report = classify_series(&terms, K0 as u64);
    let (class, why) = if q > 1.0 {
        (Classification::Convergent, format!("log exponent {q} > 1: integral test converges"))
    } else {
        (
            Classification::Divergent,
            format!("log exponent {q} ≤ 1: the loglog factor cannot restore convergence"),
        )
    };
    report.rationale = format!("{why}; tail test on partial sums said {}", report.classification);
    report.classification = class;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn gs_values() {
        let g = GsFunction::new(1.0).unwrap();
        assert_eq!(g.eval(0.5).unwrap(), 0.0);
        // direct evaluation: L = ln 200, LL = ln L
        let l = 200f64.ln();
        let ll = l.ln();
        let expected = (ll + 1.0) / (0.005 * l * l * ll * ll);
        assert_relative_eq!(g.eval(0.01).unwrap(), expected, max_relative = 1e-14);
        assert!(matches!(g.eval(0.0), Err(DivergenceError::Domain(_))));
        assert!(matches!(g.eval(-1.0), Err(DivergenceError::Domain(_))));
    }

    #[test]
    fn eps_choice() {
        let top = 2.0 * (-std::f64::consts::E).exp();
        for s in [0.5, 1.0, 2.0, 4.0] {
            let eps = choose_eps_s(s).unwrap();
            assert!(eps <= top);
            assert!((2.0 / eps).ln().ln() > 0.0);
        }
        assert!(choose_eps_s(0.0).is_err());
    }

    #[test]
    fn closed_form_mass_matches_quadrature() {
        let g = GsFunction::new(0.5).unwrap();
        let plain = MonotoneFunction::decreasing("gs-plain", move |x| gs_formula(0.5, x)).with_convexity(true);
        for x in [1e-3, 1e-2, 0.1] {
            // ∫_0^x = ∫_0^y + ∫_y^x with y far below x
            let y = x * 1e-6;
            let rest = crate::numerics::integrate_monotone(&plain, y, x, 1e-9).unwrap();
            assert_relative_eq!(g.mass_below(x), g.mass_below(y) + rest.value, max_relative = 1e-7);
        }
    }

    #[test]
    fn levels() {
        let l = 100f64.ln().ln();
        assert_relative_eq!(s_k(1.0, 100), 100.0 / l, max_relative = 1e-14);
        assert_relative_eq!(c_k(1.0, 100), l * l / 100.0, max_relative = 1e-14);
        assert!((s_k(1.0, 100) - 65.481).abs() < 1e-3);
        assert!((c_k(1.0, 100) - 0.023323).abs() < 1e-6);
    }

    #[test]
    fn inverse_root_schedule_is_summable() {
        let f = MonotoneFunction::power(0.5);
        let ks: Vec<usize> = (K0..=100).collect();
        let levels = ks.iter().map(|&k| k as f64).collect();
        let c = vec![0.1; ks.len()];
        let sched = DivergenceSchedule::from_levels(K0, levels, c, &f, 1e-8).unwrap();
        for (&k, &a) in ks.iter().zip(&sched.a) {
            assert_abs_diff_eq!(a, 16.0 / (k * k) as f64, epsilon = 2e-8);
        }
        // 16/k² drops below 1/(k ln k) once k > 16 ln k
        let rep = divergence_precondition_check(&sched, 100);
        assert!(!rep.diverging_evidence);
        assert_eq!(rep.first_violation, Some(68));
    }

    #[test]
    fn bounded_function_gives_zero_lengths() {
        let f = MonotoneFunction::constant(1.0);
        let levels: Vec<f64> = (K0..=20).map(|k| s_k(0.5, k)).collect();
        let c: Vec<f64> = (K0..=20).map(|k| c_k(0.5, k)).collect();
        let sched = DivergenceSchedule::from_levels(K0, levels, c, &f, 1e-10).unwrap();
        assert!(sched.a.iter().all(|&a| a == 0.0));
        assert!(!divergence_precondition_check(&sched, 20).diverging_evidence);
        assert_eq!(
            schedule_from_example(0.5, 20, &f, 1e-10).unwrap_err(),
            DivergenceError::ScheduleDegenerate { k: 16 }
        );
    }

    #[test]
    fn j_arcs_chain() {
        let f = GsFunction::new(0.5).unwrap().to_monotone();
        let sched = schedule_from_example(0.5, 24, &f, 1e-7).unwrap();
        assert_eq!(sched.j_arcs[0].start, CirclePoint::ZERO);
        for i in 0..sched.a.len() {
            assert_eq!(sched.j_arcs[i].end(), sched.p_points[i]);
            assert!((sched.j_arcs[i].measure() - sched.a[i]).abs() < 1e-15);
        }
        assert!(sched.target_arc(15).is_err());
        assert!(matches!(
            sched.target_arc(25),
            Err(DivergenceError::ScheduleExhausted { stage: 25, last: 24 })
        ));
    }

    fn gs_setup(k_max: usize) -> (RotationSystem, MonotoneFunction, DivergenceSchedule) {
        let f = GsFunction::new(0.5).unwrap().to_monotone();
        let sched = schedule_from_example(0.5, k_max, &f, 1e-8).unwrap();
        (RotationSystem::golden(), f, sched)
    }

    #[test]
    fn first_stages_pass() {
        let (sys, f, sched) = gs_setup(17);
        let opts = ConstructionOptions::default();
        let (seq, reps) = construct_divergent_sequence(&sys, &f, &sched, 17, &opts).unwrap();
        assert_eq!(seq.stages(), 2);
        assert!(reps.iter().all(|r| r.passed));
        let (l, d) = (seq.l(), seq.d());
        assert!(l[1] >= 17 * l[0]);
        assert!(seq.blocks()[1].start > *seq.perturbations()[0].last().unwrap());
        for (i, k) in (16..=17).enumerate() {
            assert!((d[i] as f64 - c_k(0.5, k) * l[i] as f64).abs() <= 0.5);
        }
        // fresh samples agree
        for k in 16..=17 {
            let again = stage_inequality_check(&seq, &sys, &f, &sched, k, 100, 12345).unwrap();
            assert!(again.passed);
        }
    }

    #[test]
    fn element_budget() {
        let (sys, f, sched) = gs_setup(16);
        let opts = ConstructionOptions {
            max_total_elements: 10,
            ..Default::default()
        };
        let err = construct_divergent_sequence(&sys, &f, &sched, 16, &opts).unwrap_err();
        assert!(matches!(err, DivergenceError::StageFailed { stage: 16, .. }));
        assert!(matches!(
            construct_divergent_sequence(&sys, &f, &sched, 17, &opts),
            Err(DivergenceError::ScheduleExhausted { stage: 17, last: 16 })
        ));
    }

    #[test]
    fn sabotaged_stage_fails() {
        let (sys, f, sched) = gs_setup(16);
        let arc = sched.target_arc(16).unwrap();
        // times moving the whole target arc into the zero set of g_s
        let dead = CircleArc::from_f64(0.2, 0.6 - arc.measure());
        let mut times = Vec::new();
        let mut n = 1;
        while times.len() < 101 {
            n = sys.first_entry_time(arc.start, &dead, n, u64::MAX).unwrap();
            times.push(n);
            n += 1;
        }
        let block = Block { start: times[0], len: 1 };
        let seq = PerturbedBlockSequence::new(vec![block], vec![times[1..].to_vec()]).unwrap();
        let rep = stage_inequality_check(&seq, &sys, &f, &sched, 16, 100, 0).unwrap();
        assert_eq!(rep.lower_bound_lhs, 0.0);
        assert!(!rep.passed);
    }

    #[test]
    fn classifiers_agree() {
        // where the series converges, g_s is outside the space and never a target
        for s in [0.5, 1.0, 1.5, 2.0] {
            for p in [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5] {
                let conv = example_criterion_series(s, p, 2000).unwrap().classification == Classification::Convergent;
                assert_eq!(conv, p > s);
                if conv {
                    assert_eq!(membership_exponent_classifier(s, p).unwrap(), Membership::NotInSpace);
                }
            }
        }
    }

    #[test]
    fn level_identity() {
        for k in (K0..100_000).step_by(997) {
            let ll = (k as f64).ln().ln();
            assert_relative_eq!(c_k(0.5, k) * s_k(0.5, k), ll, max_relative = 1e-12);
        }
    }

    #[test]
    fn admissible_lengths() {
        let l = admissible_length(10, 0.1);
        assert_eq!(l, 15);
        let l = admissible_length(100, 0.0332);
        let d = (0.0332 * l as f64).round() as u64;
        assert!(d % 2 == 0 && d >= 2 && l >= 100);
    }

    #[test]
    fn membership_rule() {
        assert_eq!(membership_exponent_classifier(2.0, 1.0).unwrap(), Membership::InSpace);
        assert_eq!(membership_exponent_classifier(2.0, 2.0).unwrap(), Membership::InSpace);
        assert_eq!(membership_exponent_classifier(0.5, 0.5).unwrap(), Membership::NotInSpace);
        assert_eq!(membership_exponent_classifier(1.0, 0.5).unwrap(), Membership::InSpace);
        assert!(membership_exponent_classifier(-1.0, 0.5).is_err());
    }

    #[test]
    fn criterion_series_examples() {
        let r = example_criterion_series(0.5, 1.0, 10_000).unwrap();
        assert_eq!(r.classification, Classification::Convergent);
        assert_eq!(example_criterion_series(1.0, 1.0, 10_000).unwrap().classification, Classification::Divergent);
        assert_eq!(example_criterion_series(2.0, 1.0, 10_000).unwrap().classification, Classification::Divergent);
        assert!(example_criterion_series(1.0, 1.0, 10).is_err());
    }
}
