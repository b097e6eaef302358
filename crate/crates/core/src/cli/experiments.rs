use std::collections::HashMap;

use serde_json::{json, Value};

use crate::blockseq::{generate_sizes, perturbation_criterion, reinhold_ratio};
use crate::divergence::{
    construct_divergent_sequence, divergence_precondition_check, example_criterion_series, membership_exponent_classifier,
    schedule_from_example, ConstructionOptions,
};
use crate::levelset::{
    compute_level_set, construct_witness, decompose_level_set, m_lambda, weak_bound_from, weak_phi_inequality_scan,
    WitnessParams,
};
use crate::orlicz::{luxemburg_norm, membership_integral, OrliczFunction};
use crate::rotation::{eval_at, CircleArc, CirclePoint};

use super::config::{parse_sequence, Experiment, RunConfig};

/// Everything one run produces besides the wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub result: Value,
    /// Extra files written next to the CSV: `(name, contents)`.
    pub extra: Vec<(String, String)>,
}

impl Outcome {
    fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
            result: Value::Null,
            extra: Vec::new(),
        }
    }
}

/// A failure inside the mathematics, named by its error variant.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputeError {
    pub name: String,
    pub message: String,
}

impl std::fmt::Display for ComputeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.name, self.message)
    }
}

fn compute_err<E: std::fmt::Debug + std::fmt::Display>(e: E) -> ComputeError {
    // transparent wrappers report the innermost variant
    const WRAPPERS: [&str; 5] = ["Numerics", "Orlicz", "LevelSet", "BlockSeq", "Expr"];
    let dbg = format!("{e:?}");
    let name = dbg
        .split(|c: char| !c.is_alphanumeric() && c != '_')
        .filter(|s| !s.is_empty())
        .find(|s| !WRAPPERS.contains(s))
        .unwrap_or("Error")
        .to_string();
    ComputeError {
        name,
        message: e.to_string(),
    }
}

fn g(x: f64) -> String {
    format!("{x:e}")
}

fn phi(cfg: &RunConfig) -> OrliczFunction {
    cfg.text("phi").parse().expect("validated Orlicz function")
}

/// `rows` indices spread evenly over `0..n`, always including the last.
fn thin(n: usize, rows: usize) -> Vec<usize> {
    if n <= rows {
        return (0..n).collect();
    }
    let mut out: Vec<usize> = (1..=rows).map(|j| j * n / rows - 1).collect();
    out.dedup();
    out
}

pub fn run_experiment(cfg: &RunConfig) -> Result<Outcome, ComputeError> {
    let f = cfg.function.build().map_err(|m| ComputeError {
        name: "InvalidFunction".into(),
        message: m,
    })?;
    let sys = cfg.system();
    match cfg.experiment {
        Experiment::Norm => {
            let phi = phi(cfg);
            let tol = cfg.num("tol");
            let norm = luxemburg_norm(&phi, &f, tol).map_err(compute_err)?;
            let integral = membership_integral(&phi, &f, tol.max(1e-12)).map_err(compute_err)?;
            let mut out = Outcome::new(vec!["phi", "function", "norm", "integral_lower", "integral_upper"]);
            out.rows.push(vec![
                phi.to_string(),
                cfg.function.to_string(),
                g(norm),
                g(integral.lower_bound),
                g(integral.upper_bound),
            ]);
            out.result = json!({ "norm": norm, "membership_integral": integral });
            Ok(out)
        }
        Experiment::Average => {
            let seq = parse_sequence(cfg.text("seq")).expect("validated sequence");
            let x = CirclePoint::from_decimal(cfg.text("x")).expect("validated point");
            let keep = thin(seq.len(), cfg.int("rows") as usize);
            let mut out = Outcome::new(vec!["n_terms", "time", "average"]);
            let mut sum = 0.0;
            let mut next = keep.iter().peekable();
            for (i, &n) in seq.iter().enumerate() {
                sum += eval_at(&f, sys.orbit_point(x, n));
                if next.peek() == Some(&&i) {
                    next.next();
                    out.rows.push(vec![(i + 1).to_string(), n.to_string(), g(sum / (i + 1) as f64)]);
                }
            }
            out.result = json!({ "n_terms": seq.len(), "final_average": sum / seq.len() as f64 });
            Ok(out)
        }
        Experiment::Levelset => {
            let seq = parse_sequence(cfg.text("seq")).expect("validated sequence");
            let lambda = cfg.num("lambda");
            let level = compute_level_set(&sys, &f, &seq, lambda, cfg.int("grid_cells") as usize).map_err(compute_err)?;
            let m = m_lambda(&f, lambda, cfg.num("tol")).map_err(compute_err)?;
            let bound = weak_bound_from(&level, m);
            let mut out = Outcome::new(vec!["index", "start", "length"]);
            for (i, a) in level.arcs.iter().enumerate() {
                out.rows.push(vec![i.to_string(), g(a.start.to_f64()), g(a.measure())]);
            }
            out.result = json!({
                "lambda": lambda,
                "n_terms": level.n_terms,
                "arcs": level.arcs.len(),
                "inner_measure": level.inner_measure,
                "outer_measure": level.outer_measure,
                "grid_cells": level.grid_cells,
                "weak_bound": bound,
            });
            Ok(out)
        }
        Experiment::Witness => {
            let start = CirclePoint::from_decimal(cfg.text("arc_start")).expect("validated point");
            let len = cfg.num("arc_length");
            let arc = if len >= 1.0 {
                CircleArc::full().translate(start)
            } else {
                CircleArc::new(start, CirclePoint::from_f64(len).0)
            };
            let params = WitnessParams {
                delta: cfg.num("delta"),
                epsilon: cfg.num("epsilon"),
                eta: cfg.num("eta"),
                beta_prox: cfg.num("beta_prox"),
                n_start: cfg.int("n_start"),
                min_r: cfg.int("min_r"),
                max_scan: cfg.int("max_scan"),
                max_cells: cfg.int("max_cells") as usize,
            };
            let w = construct_witness(&sys, &f, cfg.num("lambda"), &arc, &params).map_err(compute_err)?;
            let target = w.target_measure(arc.measure(), params.delta);
            let mut out = Outcome::new(vec!["index", "time"]);
            for (i, n) in w.subsequence.iter().enumerate() {
                out.rows.push(vec![i.to_string(), n.to_string()]);
            }
            out.result = json!({
                "terms": w.subsequence.len(),
                "r_k": w.r_k,
                "epsilon": w.epsilon,
                "eta": w.eta,
                "beta": w.beta,
                "certified_arc": w.certified_arc,
                "certified_measure": w.certified_measure,
                "target_measure": target,
                "meets_target": w.certified_measure >= target,
                "min_average_on_arc": w.min_average_on_arc,
                "cells": w.cells,
                "scan_end": w.scan_end,
            });
            Ok(out)
        }
        Experiment::Decompose => {
            let seq = parse_sequence(cfg.text("seq")).expect("validated sequence");
            let d = decompose_level_set(&sys, &f, &seq, cfg.num("lambda"), cfg.int("grid_cells") as usize)
                .map_err(compute_err)?;
            let mut out = Outcome::new(vec!["k", "n_k", "a_k", "s_start", "s_length"]);
            for (k, ((n, a), s)) in seq.iter().zip(&d.a_values).zip(&d.s_arcs).enumerate() {
                out.rows.push(vec![(k + 1).to_string(), n.to_string(), g(*a), g(s.start.to_f64()), g(s.measure())]);
            }
            out.result = json!({
                "union_measure": d.union_measure,
                "levelset_outer": d.levelset_outer,
                "symdiff_vs_levelset": d.symdiff_vs_levelset,
                "disjoint": d.disjoint,
            });
            Ok(out)
        }
        Experiment::Criterion => {
            let phi = phi(cfg);
            let k = cfg.int("K") as usize;
            let (l, d) = generate_sizes(cfg.text("l"), cfg.text("d"), k, &HashMap::new()).map_err(compute_err)?;
            let crit = perturbation_criterion(&phi, &l, &d, k).map_err(compute_err)?;
            let rein = reinhold_ratio(&l, &d, k, cfg.num("bound")).map_err(compute_err)?;
            let mut out = Outcome::new(vec!["k", "l_k", "d_k", "term", "partial_sum", "reinhold_ratio"]);
            for i in 0..k {
                out.rows.push(vec![
                    (i + 1).to_string(),
                    l[i].to_string(),
                    d[i].to_string(),
                    g(crit.terms[i]),
                    g(crit.partial_sums[i]),
                    g(rein.ratios[i]),
                ]);
            }
            out.result = json!({
                "classification": crit.classification,
                "rationale": crit.rationale,
                "total": crit.total(),
                "reinhold": { "bound": rein.bound, "bounded": rein.bounded, "limit_zero": rein.limit_zero },
            });
            Ok(out)
        }
        Experiment::Construct => {
            let k = cfg.int("K") as usize;
            let sched = schedule_from_example(cfg.num("s"), k, &f, cfg.num("tol")).map_err(compute_err)?;
            let pre = divergence_precondition_check(&sched, k);
            let opts = ConstructionOptions {
                max_total_elements: cfg.int("max_total_elements"),
                max_scan: cfg.int("max_scan"),
                max_cells: cfg.int("max_cells") as usize,
                beta_prox: cfg.num("beta_prox"),
                sample_count: cfg.int("sample_count") as usize,
                seed: cfg.seed(),
            };
            let (seq, reports) = construct_divergent_sequence(&sys, &f, &sched, k, &opts).map_err(compute_err)?;
            let mut out = Outcome::new(vec![
                "k",
                "l_k",
                "d_k",
                "s_k",
                "c_k",
                "a_k",
                "lhs_min",
                "rhs",
                "passed",
                "witness_certified_measure",
                "target_measure",
            ]);
            for r in &reports {
                let i = r.k - sched.k0;
                out.rows.push(vec![
                    r.k.to_string(),
                    r.l_k.to_string(),
                    r.d_k.to_string(),
                    g(sched.s[i]),
                    g(sched.c[i]),
                    g(sched.a[i]),
                    g(r.lower_bound_lhs),
                    g(r.lower_bound_rhs),
                    r.passed.to_string(),
                    g(r.witness_certified_measure),
                    g(r.target_measure),
                ]);
            }
            out.result = json!({
                "stages": reports.len(),
                "all_passed": reports.iter().all(|r| r.passed),
                "total_elements": seq.total_len(),
                "max_element": seq.max_element(),
                "precondition": { "sum_a": pre.sum_a, "comparison_holds": pre.comparison_holds, "first_violation": pre.first_violation },
                "sequence_file": "construct_sequence.txt",
            });
            out.extra.push(("construct_sequence.txt".into(), format!("{seq}\n")));
            Ok(out)
        }
        Experiment::ExampleSeries => {
            let (s, p) = (cfg.num("s"), cfg.num("p"));
            let rep = example_criterion_series(s, p, cfg.int("K") as usize).map_err(compute_err)?;
            let member = membership_exponent_classifier(s, p).map_err(compute_err)?;
            let mut out = Outcome::new(vec!["k", "term", "partial_sum"]);
            for i in thin(rep.terms.len(), cfg.int("rows") as usize) {
                out.rows.push(vec![
                    (rep.first_index + i as u64).to_string(),
                    g(rep.terms[i]),
                    g(rep.partial_sums[i]),
                ]);
            }
            out.result = json!({
                "classification": rep.classification,
                "rationale": rep.rationale,
                "membership": member,
                "total": rep.total(),
            });
            Ok(out)
        }
        Experiment::WeakScan => {
            let phi = phi(cfg);
            let n = cfg.int("N");
            let family: Vec<Vec<u64>> = (1..=n).map(|m| (1..=m).collect()).collect();
            let (lo, hi, count) = (cfg.num("lambda_min"), cfg.num("lambda_max"), cfg.int("lambda_count") as usize);
            let lambdas: Vec<f64> = (0..count)
                .map(|i| {
                    if count == 1 {
                        lo
                    } else {
                        lo * (hi / lo).powf(i as f64 / (count - 1) as f64)
                    }
                })
                .collect();
            let rep = weak_phi_inequality_scan(&sys, &f, &phi, &family, &lambdas, cfg.int("grid_cells") as usize)
                .map_err(compute_err)?;
            let mut out = Outcome::new(vec!["lambda", "measure", "integral", "empirical_c"]);
            for r in &rep.rows {
                out.rows.push(vec![g(r.lambda), g(r.measure), g(r.integral), g(r.empirical_c)]);
            }
            out.result = json!({ "max_c": rep.max_c, "family_size": n });
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_keeps_last() {
        assert_eq!(thin(3, 10), vec![0, 1, 2]);
        assert_eq!(thin(10, 3), vec![2, 5, 9]);
    }

    #[test]
    fn error_names_unwrap_transparent_variants() {
        use crate::numerics::NumericsError;
        let e = crate::divergence::DivergenceError::LevelSet(crate::levelset::LevelSetError::Numerics(
            NumericsError::NotMonotoneDetected { at: 0.5 },
        ));
        assert_eq!(compute_err(e).name, "NotMonotoneDetected");
    }
}
