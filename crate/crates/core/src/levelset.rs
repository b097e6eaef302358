//! Level sets `B_λ = {x : A_N f(x) ≥ λ}` of finite subsequence averages,
//! their decomposition into arcs `S_k`, the quantity `M_λ`, and the finite
//! witness construction.
//!
//! Level sets are computed on a uniform grid of `G` cells. Away from the
//! breakpoints `-n_k α` every term `f(T^{n_k} y)` is monotone in `y`, so the
//! three samples (both endpoints and the midpoint) bracket the cell. Cells
//! holding a breakpoint are never counted as inner; they are outer when a
//! per-term upper bound reaches `λ`.

use serde::Serialize;
use thiserror::Error;

use crate::numerics::{bisect_monotone, prefix_average, MonotoneFunction, NumericsError, PrefixIntegrals};
use crate::orlicz::{phi_of, OrliczError, OrliczFunction};
use crate::rotation::{
    eval_at, pairwise_disjoint, symmetric_difference_measure, union_measure, ArcLength, CircleArc, CirclePoint,
    RotationSystem,
};

pub const MIN_GRID_CELLS: usize = 1_000;
pub const DEFAULT_M_LAMBDA_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SCAN: u64 = 100_000_000;
pub const DEFAULT_MAX_CERT_CELLS: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelSetError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("level set is empty; every a_k is 0")]
    DegenerateLevelSet { a_values: Vec<f64> },
    #[error("no witness: {0}")]
    NoWitness(String),
    #[error("entry-time budget exceeded: {filled} of {needed} targets hit after scanning {scanned} times")]
    EntryTimeBudgetExceeded { filled: usize, needed: usize, scanned: u64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
}

pub type Result<T> = std::result::Result<T, LevelSetError>;

/// Bits of `i · 2^128 / cells`, rounded down; `i = cells` wraps to 0.
fn grid_point(i: usize, cells: usize) -> u128 {
    split_point(None, i, cells)
}

/// Offset of the `i`-th of `cells` equal parts of a length (`None` = whole circle).
fn split_point(len: Option<u128>, i: usize, cells: usize) -> u128 {
    let c = cells as u128;
    let i = i as u128;
    let (q, r) = match len {
        Some(l) => (l / c, l % c),
        None => {
            let mut q = u128::MAX / c;
            let mut r = u128::MAX % c + 1;
            if r == c {
                q += 1;
                r = 0;
            }
            (q, r)
        }
    };
    q.wrapping_mul(i).wrapping_add(r * i / c)
}

/// Cached averages of `f` along one finite sequence on a uniform grid.
#[derive(Debug, Clone)]
pub struct AverageGrid {
    cells: usize,
    n_terms: usize,
    /// Average at the left endpoint of each cell.
    left: Vec<f64>,
    /// Average at each cell midpoint.
    mid: Vec<f64>,
    /// Cells whose images cross 0 under some `T^{n_k}`, with an upper bound there.
    broken: Vec<(usize, f64)>,
}

impl AverageGrid {
    pub fn new(sys: &RotationSystem, f: &MonotoneFunction, seq: &[u64], cells: usize) -> Result<Self> {
        if cells < MIN_GRID_CELLS {
            return Err(LevelSetError::InvalidArgument(format!(
                "grid_cells must be ≥ {MIN_GRID_CELLS}, got {cells}"
            )));
        }
        if seq.is_empty() {
            return Err(LevelSetError::InvalidArgument("sequence must be nonempty".into()));
        }
        let shifts: Vec<CirclePoint> = seq.iter().map(|&n| sys.shift(n)).collect();
        let mut left = vec![0.0; cells];
        let mut mid = vec![0.0; cells];
        for s in &shifts {
            for i in 0..cells {
                let u = grid_point(i, cells);
                let v = grid_point(i + 1, cells);
                let m = u.wrapping_add(v.wrapping_sub(u) / 2);
                left[i] += eval_at(f, CirclePoint(u).add(*s));
                mid[i] += eval_at(f, CirclePoint(m).add(*s));
            }
        }
        let inv = 1.0 / seq.len() as f64;
        left.iter_mut().chain(mid.iter_mut()).for_each(|v| *v *= inv);

        let mut broken_cells: Vec<usize> = shifts.iter().map(|s| breakpoint_cell(s.neg().0, cells)).collect();
        broken_cells.sort_unstable();
        broken_cells.dedup();
        let f0 = f.eval(0.0);
        let f1 = f.eval(1.0);
        let broken = broken_cells
            .into_iter()
            .map(|i| {
                let u = grid_point(i, cells);
                let h = grid_point(i + 1, cells).wrapping_sub(u);
                let mut upper = 0.0;
                for s in &shifts {
                    let pu = u.wrapping_add(s.0);
                    let a = eval_at(f, CirclePoint(pu));
                    let b = eval_at(f, CirclePoint(pu.wrapping_add(h)));
                    upper += if pu.checked_add(h).is_none() {
                        a.max(b).max(f0).max(f1)
                    } else {
                        a.max(b)
                    };
                }
                (i, upper * inv)
            })
            .collect();
        Ok(Self {
            cells,
            n_terms: seq.len(),
            left,
            mid,
            broken,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// Pointwise maximum of several grids of equal size; breakpoints are pooled.
    pub fn pointwise_max(grids: &[AverageGrid]) -> Result<AverageGrid> {
        let first = grids
            .first()
            .ok_or_else(|| LevelSetError::InvalidArgument("empty sequence family".into()))?;
        let mut out = first.clone();
        for g in &grids[1..] {
            if g.cells != out.cells {
                return Err(LevelSetError::InvalidArgument("grid sizes differ".into()));
            }
            for i in 0..out.cells {
                out.left[i] = out.left[i].max(g.left[i]);
                out.mid[i] = out.mid[i].max(g.mid[i]);
            }
            out.n_terms = out.n_terms.max(g.n_terms);
        }
        // a broken cell's bound must dominate every member's value there
        let mut broken: Vec<(usize, f64)> = grids.iter().flat_map(|g| g.broken.iter().copied()).collect();
        broken.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
        broken.dedup_by_key(|b| b.0);
        for (i, up) in broken.iter_mut() {
            for g in grids {
                let own = g.broken.iter().find(|b| b.0 == *i).map(|b| b.1);
                let v = own.unwrap_or_else(|| g.left[*i].max(g.left[(*i + 1) % g.cells]));
                *up = up.max(v);
            }
        }
        out.broken = broken;
        Ok(out)
    }

    /// Cell classification at level `λ`: `(inner, outer)` flags.
    fn classify(&self, lambda: f64) -> (Vec<bool>, Vec<bool>) {
        let g = self.cells;
        let mut inner = vec![false; g];
        let mut outer = vec![false; g];
        for i in 0..g {
            let a = self.left[i] >= lambda;
            let m = self.mid[i] >= lambda;
            let b = self.left[(i + 1) % g] >= lambda;
            inner[i] = a && m && b;
            outer[i] = a || m || b;
        }
        for &(i, upper) in &self.broken {
            inner[i] = false;
            outer[i] = outer[i] || upper >= lambda;
        }
        (inner, outer)
    }

    pub fn level_set(&self, lambda: f64) -> LevelSet {
        let (inner, outer) = self.classify(lambda);
        let g = self.cells as f64;
        let n_inner = inner.iter().filter(|&&b| b).count();
        let n_outer = outer.iter().filter(|&&b| b).count();
        LevelSet {
            lambda,
            arcs: runs_to_arcs(&outer, self.cells),
            inner_measure: n_inner as f64 / g,
            outer_measure: n_outer as f64 / g,
            grid_cells: self.cells,
            n_terms: self.n_terms,
        }
    }

    /// Sample points (bits, value) in grid order: left endpoint then midpoint.
    fn samples(&self) -> impl Iterator<Item = (u128, f64)> + '_ {
        (0..self.cells).flat_map(move |i| {
            let u = grid_point(i, self.cells);
            let v = grid_point(i + 1, self.cells);
            let m = u.wrapping_add(v.wrapping_sub(u) / 2);
            [(u, self.left[i]), (m, self.mid[i])]
        })
    }
}

/// Cell whose half-open interior `(u, v]` contains the breakpoint `b`.
fn breakpoint_cell(b: u128, cells: usize) -> usize {
    let step = grid_point(1, cells);
    let mut c = ((b / step) as usize).min(cells - 1);
    while c + 1 < cells && grid_point(c + 1, cells) <= b {
        c += 1;
    }
    while c > 0 && grid_point(c, cells) > b {
        c -= 1;
    }
    if grid_point(c, cells) == b {
        (c + cells - 1) % cells
    } else {
        c
    }
}

/// Maximal runs of flagged cells as arcs, merged across the wrap.
fn runs_to_arcs(flags: &[bool], cells: usize) -> Vec<CircleArc> {
    if flags.iter().all(|&b| b) {
        return vec![CircleArc::full()];
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < cells {
        if flags[i] {
            let s = i;
            while i < cells && flags[i] {
                i += 1;
            }
            runs.push((s, i));
        } else {
            i += 1;
        }
    }
    if runs.len() >= 2 && runs[0].0 == 0 && runs.last().map(|r| r.1) == Some(cells) {
        let first = runs.remove(0);
        let last = runs.last_mut().unwrap();
        last.1 = cells + first.1;
    }
    runs.into_iter()
        .map(|(s, e)| {
            let a = grid_point(s, cells);
            let b = grid_point(e % cells, cells);
            CircleArc::between(CirclePoint(a), CirclePoint(b))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSet {
    pub lambda: f64,
    pub arcs: Vec<CircleArc>,
    pub inner_measure: f64,
    pub outer_measure: f64,
    pub grid_cells: usize,
    pub n_terms: usize,
}

impl LevelSet {
    /// `2 (N + arcs) / G`.
    pub fn resolution_slack(&self) -> f64 {
        2.0 * (self.n_terms + self.arcs.len()) as f64 / self.grid_cells as f64
    }
}

pub fn compute_level_set(
    sys: &RotationSystem,
    f: &MonotoneFunction,
    seq: &[u64],
    lambda: f64,
    grid_cells: usize,
) -> Result<LevelSet> {
    Ok(AverageGrid::new(sys, f, seq, grid_cells)?.level_set(lambda))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub a_values: Vec<f64>,
    pub s_arcs: Vec<CircleArc>,
    pub union_measure: f64,
    pub symdiff_vs_levelset: f64,
    pub levelset_outer: f64,
    pub disjoint: bool,
}

/// Splits `B_λ` by which term's orbit point is closest to 0 from above.
///
/// For a sample `y ∈ B_λ` whose minimal coordinate is `T^{n_k} y`, moving
/// `y` backwards lowers every coordinate by the same amount without
/// wrapping, so the whole arc `T^{-n_k}[0, T^{n_k} y]` stays in `B_λ` with
/// the same minimiser. Hence `S_k = T^{-n_k}[0, a_k]` with `a_k` the largest
/// such coordinate, and distinct `S_k` are disjoint.
pub fn decompose_level_set(
    sys: &RotationSystem,
    f: &MonotoneFunction,
    seq: &[u64],
    lambda: f64,
    grid_cells: usize,
) -> Result<DecompositionResult> {
    let grid = AverageGrid::new(sys, f, seq, grid_cells)?;
    decompose_on_grid(sys, &grid, seq, lambda)
}

pub fn decompose_on_grid(sys: &RotationSystem, grid: &AverageGrid, seq: &[u64], lambda: f64) -> Result<DecompositionResult> {
    let shifts: Vec<u128> = seq.iter().map(|&n| sys.shift(n).0).collect();
    let mut best: Vec<Option<u128>> = vec![None; seq.len()];
    for (y, value) in grid.samples() {
        if value < lambda {
            continue;
        }
        let (k, x) = shifts
            .iter()
            .enumerate()
            .map(|(k, s)| (k, y.wrapping_add(*s)))
            .min_by_key(|&(k, x)| (x, k))
            .expect("nonempty sequence");
        best[k] = Some(best[k].map_or(x, |b| b.max(x)));
    }
    if best.iter().all(Option::is_none) {
        return Err(LevelSetError::DegenerateLevelSet {
            a_values: vec![0.0; seq.len()],
        });
    }
    let a_values: Vec<f64> = best.iter().map(|b| b.map_or(0.0, |x| CirclePoint(x).to_f64())).collect();
    let s_arcs: Vec<CircleArc> = best
        .iter()
        .zip(&shifts)
        .map(|(b, s)| match b {
            Some(x) => match x.checked_add(1) {
                Some(len) => CircleArc::new(CirclePoint(s.wrapping_neg()), len),
                None => CircleArc::full(),
            },
            None => CircleArc::empty(),
        })
        .collect();
    let level = grid.level_set(lambda);
    Ok(DecompositionResult {
        union_measure: union_measure(&s_arcs),
        symdiff_vs_levelset: symmetric_difference_measure(&s_arcs, &level.arcs),
        levelset_outer: level.outer_measure,
        disjoint: pairwise_disjoint(&s_arcs),
        a_values,
        s_arcs,
    })
}

/// `sup{L : (1/L)∫_0^L f > λ}`, with 0 for an empty set.
pub fn m_lambda(f: &MonotoneFunction, lambda: f64, tol: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(LevelSetError::InvalidArgument(format!("λ must be > 0, got {lambda}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(LevelSetError::InvalidArgument(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    // averages are resolved about as finely as L itself
    let rel = (10.0 * tol).clamp(1e-9, 1e-3);
    let qtol = lambda.max(1.0) * rel;
    let mut prefix = PrefixIntegrals::new(f, rel);
    let mut avg = |l: f64| prefix.average(l, qtol);
    if avg(1.0)? > lambda {
        return Ok(1.0);
    }
    if avg(tol)? <= lambda {
        return Ok(0.0);
    }
    Ok(bisect_monotone(avg, lambda, tol, 1.0, tol)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakBoundCheck {
    pub measure_outer: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub slack: f64,
    pub holds: bool,
}

pub fn verify_weak_bound(
    sys: &RotationSystem,
    f: &MonotoneFunction,
    seq: &[u64],
    lambda: f64,
    grid_cells: usize,
) -> Result<WeakBoundCheck> {
    let level = compute_level_set(sys, f, seq, lambda, grid_cells)?;
    let m = m_lambda(f, lambda, DEFAULT_M_LAMBDA_TOL)?;
    Ok(weak_bound_from(&level, m))
}

pub fn weak_bound_from(level: &LevelSet, m: f64) -> WeakBoundCheck {
    let slack = level.resolution_slack();
    WeakBoundCheck {
        measure_outer: level.outer_measure,
        m,
        slack,
        holds: level.outer_measure <= m + slack,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessParams {
    pub delta: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub beta_prox: f64,
    pub n_start: u64,
    /// Lower bound on `r`, the number of partition pieces.
    pub min_r: u64,
    pub max_scan: u64,
    /// Cap on certification cells; the cell width is `max(β/2, |I|/max_cells)`.
    pub max_cells: usize,
}

impl Default for WitnessParams {
    fn default() -> Self {
        Self {
            delta: 0.1,
            epsilon: 1e-3,
            eta: 1e-2,
            beta_prox: 1e-3,
            n_start: 1,
            min_r: 1,
            max_scan: DEFAULT_MAX_SCAN,
            max_cells: DEFAULT_MAX_CERT_CELLS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessResult {
    pub subsequence: Vec<u64>,
    pub r_k: u64,
    pub epsilon: f64,
    pub eta: f64,
    pub beta: f64,
    pub certified_arc: CircleArc,
    pub certified_measure: f64,
    pub min_average_on_arc: f64,
    pub cells: usize,
    /// Last time examined by the entry-time scan.
    pub scan_end: u64,
}

impl WitnessResult {
    pub fn target_measure(&self, m: f64, delta: f64) -> f64 {
        m - delta
    }
}

/// Lower bounds of the subsequence average on `cells` equal pieces of `arc`.
///
/// On a piece `[u, v)` each term is at least `f(T^n v)` unless its image
/// passes through 0, in which case `f(1)` is used.
pub fn certify_witness(
    sys: &RotationSystem,
    f: &MonotoneFunction,
    subsequence: &[u64],
    arc: &CircleArc,
    cells: usize,
) -> Vec<f64> {
    if subsequence.is_empty() || cells == 0 || arc.is_empty() {
        return Vec::new();
    }
    let len = match arc.length {
        ArcLength::Full => None,
        ArcLength::Partial(l) => Some(l),
    };
    let f1 = f.eval(1.0);
    let shifts: Vec<u128> = subsequence.iter().map(|&n| sys.shift(n).0).collect();
    let inv = 1.0 / subsequence.len() as f64;
    (0..cells)
        .map(|i| {
            let u = arc.start.0.wrapping_add(split_point(len, i, cells));
            let v = arc.start.0.wrapping_add(split_point(len, i + 1, cells));
            let h = v.wrapping_sub(u);
            let sum: f64 = shifts
                .iter()
                .map(|s| {
                    let pu = u.wrapping_add(*s);
                    match pu.checked_add(h) {
                        Some(pv) if pv != 0 => eval_at(f, CirclePoint(pv)),
                        _ => f1,
                    }
                })
                .sum();
            sum * inv
        })
        .collect()
}

/// Builds a finite subsequence whose average is at least `λ/2` on most of `arc`.
///
/// `[ε, M]` (`M = |I|`) is cut into `r` pieces `I_j = [a_j, b_j]`, `I_1`
/// rightmost. Times are found by one forward scan from `n_start`: `r` of them
/// move the right end of `I` into `[b_j - β', b_j)` and `r` move the point
/// `ε` into `I` into `[a_j, a_j + β')`, where `β' = min(β, |I_j|)`. The
/// result is then certified on cells of width `β/2`.
pub fn construct_witness(
    sys: &RotationSystem,
    f: &MonotoneFunction,
    lambda: f64,
    arc: &CircleArc,
    params: &WitnessParams,
) -> Result<WitnessResult> {
    let WitnessParams {
        epsilon,
        eta,
        beta_prox,
        ..
    } = *params;
    if !f.is_decreasing() {
        return Err(LevelSetError::InvalidArgument("witness construction needs a decreasing function".into()));
    }
    if !(lambda > 0.0 && eta > 0.0 && beta_prox > 0.0 && epsilon > 0.0) {
        return Err(LevelSetError::InvalidArgument(format!(
            "need λ, η, β, ε > 0 (λ={lambda}, η={eta}, β={beta_prox}, ε={epsilon})"
        )));
    }
    let m = arc.measure();
    if m == 0.0 {
        return Err(LevelSetError::NoWitness("target arc is empty".into()));
    }
    if epsilon >= m {
        return Err(LevelSetError::InvalidArgument(format!("ε = {epsilon} must be below |I| = {m}")));
    }
    // only compared against λ/2 + η
    let avg = prefix_average(f, m, 1e-6 * lambda.max(1.0))?;
    if lambda / 2.0 > avg + eta {
        return Err(LevelSetError::NoWitness(format!(
            "λ/2 = {} exceeds the mean of f over [0, {m}] ({avg}) plus η",
            lambda / 2.0
        )));
    }

    let spread = (f.eval(epsilon) - f.eval(m)).max(0.0) * (m - epsilon);
    let r_riemann = (spread / eta).ceil();
    let r_f = r_riemann.max(params.min_r as f64).max(1.0);
    if r_f > params.max_scan as f64 {
        return Err(LevelSetError::EntryTimeBudgetExceeded {
            filled: 0,
            needed: (2.0 * r_f) as usize,
            scanned: 0,
        });
    }
    let r = r_f as usize;
    let w = (m - epsilon) / r as f64;
    let bp = beta_prox.min(w);

    let anchor = arc.end(); // right end of I; equals the start for the whole circle
    let gap = CirclePoint::from_f64(m - epsilon);
    let mut fam1: Vec<Option<u64>> = vec![None; r];
    let mut fam2: Vec<Option<u64>> = vec![None; r];
    let mut filled = 0usize;
    let needed = 2 * r;
    let end = params.n_start.saturating_add(params.max_scan);
    let mut scan_end = params.n_start;
    for (n, p) in sys.orbit_from(anchor, params.n_start) {
        if n > end {
            break;
        }
        scan_end = n;
        let pf = p.to_f64();
        // T^n(right end) ∈ [b_j - β', b_j) with b_j = M - (j-1)w
        let u = m - pf;
        if u > 0.0 {
            let j = (u / w).ceil() as usize;
            if j >= 1 && j <= r && u - (j - 1) as f64 * w <= bp && fam1[j - 1].is_none() {
                fam1[j - 1] = Some(n);
                filled += 1;
                if filled == needed {
                    break;
                }
                continue;
            }
        }
        // T^n(left end + ε) ∈ [a_j, a_j + β') with a_j = M - jw
        let q = p.sub(gap).to_f64();
        let v = m - q;
        if v > 0.0 {
            let j = (v / w).ceil() as usize;
            if j >= 1 && j <= r && (j as f64 * w - v) < bp && fam2[j - 1].is_none() {
                fam2[j - 1] = Some(n);
                filled += 1;
                if filled == needed {
                    break;
                }
            }
        }
    }
    if filled < needed {
        return Err(LevelSetError::EntryTimeBudgetExceeded {
            filled,
            needed,
            scanned: scan_end - params.n_start + 1,
        });
    }
    let mut subsequence: Vec<u64> = fam1.into_iter().chain(fam2).flatten().collect();
    subsequence.sort_unstable();

    let cells = ((m / (beta_prox / 2.0)).ceil() as usize).clamp(1, params.max_cells.max(1));
    let bounds = certify_witness(sys, f, &subsequence, arc, cells);
    let threshold = lambda / 2.0;
    let good: Vec<bool> = bounds.iter().map(|&b| b >= threshold).collect();
    let (certified_arc, min_avg) = best_run(arc, &good, &bounds, cells);
    Ok(WitnessResult {
        subsequence,
        r_k: r as u64,
        epsilon,
        eta,
        beta: beta_prox,
        certified_measure: certified_arc.measure(),
        certified_arc,
        min_average_on_arc: min_avg,
        cells,
        scan_end,
    })
}

/// Longest run of good cells inside `arc` (wrapping only for the full circle).
fn best_run(arc: &CircleArc, good: &[bool], bounds: &[f64], cells: usize) -> (CircleArc, f64) {
    let len = match arc.length {
        ArcLength::Full => None,
        ArcLength::Partial(l) => Some(l),
    };
    if good.iter().all(|&g| g) {
        let min = bounds.iter().copied().fold(f64::INFINITY, f64::min);
        return (*arc, min);
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < cells {
        if good[i] {
            let s = i;
            while i < cells && good[i] {
                i += 1;
            }
            runs.push((s, i));
        } else {
            i += 1;
        }
    }
    if arc.is_full() && runs.len() >= 2 && runs[0].0 == 0 && runs.last().unwrap().1 == cells {
        let first = runs.remove(0);
        runs.last_mut().unwrap().1 = cells + first.1;
    }
    let Some(&(s, e)) = runs.iter().max_by_key(|&&(s, e)| (e - s, std::cmp::Reverse(s))) else {
        return (CircleArc::new(arc.start, 0), 0.0);
    };
    let a = arc.start.0.wrapping_add(split_point(len, s, cells));
    let b = arc.start.0.wrapping_add(split_point(len, e % cells, cells));
    let b = if e == cells { arc.end().0 } else { b };
    let min = (s..e).map(|i| bounds[i % cells]).fold(f64::INFINITY, f64::min);
    (CircleArc::between(CirclePoint(a), CirclePoint(b)), min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakScanRow {
    pub lambda: f64,
    pub measure: f64,
    pub integral: f64,
    pub empirical_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakScanReport {
    pub rows: Vec<WeakScanRow>,
    pub max_c: f64,
}

/// Empirical constant in `μ{T* f ≥ λ} ≤ C ∫Φ(f/λ)`, with `T*` the maximum over the family.
pub fn weak_phi_inequality_scan(
    sys: &RotationSystem,
    f: &MonotoneFunction,
    phi: &OrliczFunction,
    seq_family: &[Vec<u64>],
    lambdas: &[f64],
    grid_cells: usize,
) -> Result<WeakScanReport> {
    let grids: Vec<AverageGrid> = seq_family
        .iter()
        .map(|s| AverageGrid::new(sys, f, s, grid_cells))
        .collect::<Result<_>>()?;
    let grid = AverageGrid::pointwise_max(&grids)?;
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(LevelSetError::InvalidArgument(format!("λ must be > 0, got {lambda}")));
        }
        let measure = grid.level_set(lambda).outer_measure;
        let integral = match crate::numerics::integrate_monotone(&phi_of(phi, f, lambda), 0.0, 1.0, 1e-9) {
            Ok(est) => est.value,
            Err(NumericsError::NonIntegrableDetected { .. }) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        let empirical_c = if measure == 0.0 || integral.is_infinite() {
            0.0
        } else {
            measure / integral
        };
        rows.push(WeakScanRow {
            lambda,
            measure,
            integral,
            empirical_c,
        });
    }
    let max_c = rows.iter().map(|r| r.empirical_c).fold(0.0, f64::max);
    Ok(WeakScanReport { rows, max_c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sqrt_inv() -> MonotoneFunction {
        MonotoneFunction::power(0.5)
    }

    #[test]
    fn trivial_level_sets() {
        let sys = RotationSystem::golden();
        let full = compute_level_set(&sys, &sqrt_inv(), &[1, 2, 3], 0.0, 2000).unwrap();
        assert_eq!(full.outer_measure, 1.0);
        assert_eq!(full.arcs, vec![CircleArc::full()]);
        let empty = compute_level_set(&sys, &MonotoneFunction::one_minus_x(), &[1, 2], 2.0, 2000).unwrap();
        assert_eq!(empty.outer_measure, 0.0);
        assert!(empty.arcs.is_empty());
        assert!(compute_level_set(&sys, &sqrt_inv(), &[1], 1.0, 10).is_err());
    }

    #[test]
    fn single_term_level_set_is_preimage_arc() {
        let sys = RotationSystem::golden();
        let ls = compute_level_set(&sys, &sqrt_inv(), &[7], 2.0, 10_000).unwrap();
        assert_eq!(ls.arcs.len(), 1);
        assert_abs_diff_eq!(ls.outer_measure, 0.25, epsilon = 3e-4);
        assert!(ls.inner_measure <= ls.outer_measure);
        let expected_start = sys.shift(7).neg();
        assert!(ls.arcs[0].start.sub(expected_start).0.min(expected_start.sub(ls.arcs[0].start).0) < grid_point(1, 10_000));
    }

    #[test]
    fn decomposition_single_term() {
        let sys = RotationSystem::golden();
        let d = decompose_level_set(&sys, &sqrt_inv(), &[3], 2.0, 10_000).unwrap();
        assert_eq!(d.s_arcs.len(), 1);
        assert!(d.symdiff_vs_levelset <= 2.0 / 10_000.0, "{}", d.symdiff_vs_levelset);
        let z = decompose_level_set(&sys, &sqrt_inv(), &[3, 5], 0.0, 10_000).unwrap();
        assert_abs_diff_eq!(z.union_measure, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn decomposition_two_terms() {
        let sys = RotationSystem::golden();
        let g = 100_000;
        let d = decompose_level_set(&sys, &sqrt_inv(), &[1, 4], 1.5, g).unwrap();
        assert!(d.disjoint);
        assert!(pairwise_disjoint(&d.s_arcs));
        let ls = compute_level_set(&sys, &sqrt_inv(), &[1, 4], 1.5, g).unwrap();
        assert!(d.symdiff_vs_levelset <= 10.0 * (2 + ls.arcs.len()) as f64 / g as f64, "{}", d.symdiff_vs_levelset);
    }

    #[test]
    fn degenerate_decomposition() {
        let sys = RotationSystem::golden();
        let err = decompose_level_set(&sys, &MonotoneFunction::constant(1.0), &[1, 2], 2.0, 1000).unwrap_err();
        assert_eq!(err, LevelSetError::DegenerateLevelSet { a_values: vec![0.0, 0.0] });
    }

    #[test]
    fn m_lambda_examples() {
        assert_abs_diff_eq!(m_lambda(&sqrt_inv(), 4.0, 1e-10).unwrap(), 0.25, epsilon = 1e-9);
        assert_eq!(m_lambda(&sqrt_inv(), 1.0, 1e-10).unwrap(), 1.0);
        assert_eq!(m_lambda(&MonotoneFunction::constant(1.0), 2.0, 1e-10).unwrap(), 0.0);
        assert!(m_lambda(&sqrt_inv(), -1.0, 1e-10).is_err());
    }

    #[test]
    fn weak_bound_examples() {
        let sys = RotationSystem::golden();
        let w = verify_weak_bound(&sys, &sqrt_inv(), &[0], 4.0, 10_000).unwrap();
        assert!(w.holds);
        assert_abs_diff_eq!(w.measure_outer, 1.0 / 16.0, epsilon = 3e-4);
        assert_abs_diff_eq!(w.m, 0.25, epsilon = 1e-9);
        let w = verify_weak_bound(&sys, &sqrt_inv(), &[0], 0.1, 10_000).unwrap();
        assert!(w.holds && w.measure_outer == 1.0 && w.m == 1.0);
        let w = verify_weak_bound(&sys, &MonotoneFunction::constant(1.0), &[0, 1], 2.0, 1000).unwrap();
        assert!(w.holds && w.measure_outer == 0.0 && w.m == 0.0);
    }

    #[test]
    fn witness_constant_function() {
        let sys = RotationSystem::golden();
        let arc = CircleArc::from_f64(0.2, 0.3);
        let w = construct_witness(&sys, &MonotoneFunction::constant(1.0), 1.0, &arc, &WitnessParams::default()).unwrap();
        assert_eq!(w.r_k, 1);
        assert_eq!(w.subsequence.len(), 2);
        assert_eq!(w.min_average_on_arc, 1.0);
        assert_eq!(w.certified_arc, arc);
    }

    #[test]
    fn witness_for_inverse_root() {
        let sys = RotationSystem::golden();
        let f = sqrt_inv();
        let arc = CircleArc::full();
        for n_start in [1, 10_000] {
            let params = WitnessParams {
                n_start,
                ..Default::default()
            };
            let w = construct_witness(&sys, &f, 2.0, &arc, &params).unwrap();
            assert!(w.certified_measure >= w.target_measure(1.0, 0.1), "{}", w.certified_measure);
            assert!(w.min_average_on_arc >= 1.0);
            assert!(w.subsequence.iter().all(|&n| n >= n_start));
            let finer = certify_witness(&sys, &f, &w.subsequence, &w.certified_arc, 2 * w.cells);
            assert!(finer.iter().all(|&b| b >= 1.0 - 1e-9));
        }
    }

    #[test]
    fn witness_bounded_function_fails() {
        let sys = RotationSystem::golden();
        let err = construct_witness(&sys, &MonotoneFunction::one_minus_x(), 3.0, &CircleArc::full(), &WitnessParams::default()).unwrap_err();
        assert!(matches!(err, LevelSetError::NoWitness(_)));
    }

    #[test]
    fn witness_scan_budget() {
        let sys = RotationSystem::golden();
        let params = WitnessParams {
            max_scan: 10,
            ..Default::default()
        };
        let err = construct_witness(&sys, &sqrt_inv(), 2.0, &CircleArc::full(), &params).unwrap_err();
        assert!(matches!(err, LevelSetError::EntryTimeBudgetExceeded { .. }));
    }

    #[test]
    fn weak_scan_examples() {
        let sys = RotationSystem::golden();
        let p1 = OrliczFunction::Power { p: 1.0 };
        let r = weak_phi_inequality_scan(&sys, &MonotoneFunction::constant(0.0), &p1, &[vec![0, 1]], &[0.5, 1.0], 1000).unwrap();
        assert!(r.rows.iter().all(|row| row.measure == 0.0 && row.empirical_c == 0.0));
        let r = weak_phi_inequality_scan(&sys, &sqrt_inv(), &p1, &[vec![0]], &[4.0], 100_000).unwrap();
        assert_abs_diff_eq!(r.rows[0].measure, 1.0 / 16.0, epsilon = 1e-4);
        assert_abs_diff_eq!(r.rows[0].integral, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(r.rows[0].empirical_c, 0.125, epsilon = 1e-3);
    }

    #[test]
    fn grid_points_partition_circle() {
        assert_eq!(grid_point(0, 1000), 0);
        assert_eq!(grid_point(1000, 1000), 0);
        assert!(grid_point(999, 1000) > grid_point(998, 1000));
        assert_eq!(split_point(Some(100), 3, 10), 30);
        assert_eq!(breakpoint_cell(grid_point(5, 1000), 1000), 4);
        assert_eq!(breakpoint_cell(grid_point(5, 1000) + 1, 1000), 5);
        assert_eq!(breakpoint_cell(0, 1000), 999);
    }
}
