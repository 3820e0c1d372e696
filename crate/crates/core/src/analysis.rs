//! Structural quantities of an instance: optimal arms, the candidate set,
//! the confusion sets, gaps and separations, and the regret-bound constants
//! that follow from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ParameterSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// No parameter can be confused with the true one: regret stays bounded.
    BoundedRegret,
    /// Some confusion parameter exists: regret grows logarithmically.
    LogarithmicRegret,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::BoundedRegret => "bounded",
            Regime::LogarithmicRegret => "logarithmic",
        }
    }
}

/// Optimal arm of parameter `index`, ties broken towards the smallest arm.
pub fn best_arm(params: &ParameterSet, index: usize) -> Result<usize> {
    let means = &params.parameter(index)?.means;
    Ok(argmax_min_index(means, params.tie_epsilon()))
}

fn argmax_min_index(means: &[f64], eps: f64) -> usize {
    let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    means.iter().position(|&m| m >= top - eps).expect("means are nonempty")
}

fn has_unique_best(means: &[f64], eps: f64) -> bool {
    let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    means.iter().filter(|&&m| m >= top - eps).count() == 1
}

/// Optimal arm of every parameter.
pub fn best_arms(params: &ParameterSet) -> Vec<usize> {
    let eps = params.tie_epsilon();
    params
        .parameters()
        .iter()
        .map(|p| argmax_min_index(&p.means, eps))
        .collect()
}

/// Sorted, deduplicated set of optimal arms over the whole parameter set.
pub fn candidate_arms(params: &ParameterSet) -> Vec<usize> {
    let mut arms = best_arms(params);
    arms.sort_unstable();
    arms.dedup();
    arms
}

/// Gap of every arm (not only the candidates) under parameter `truth`.
pub fn arm_gaps(params: &ParameterSet, truth: usize) -> Vec<f64> {
    let means = params.means(truth);
    let best = means[argmax_min_index(means, params.tie_epsilon())];
    means.iter().map(|m| best - m).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub true_parameter: usize,
    pub best_arm_per_parameter: Vec<usize>,
    pub candidate_arms: Vec<usize>,
    pub true_best_arm: usize,
    pub confusion_parameters: Vec<usize>,
    pub confusion_arms: Vec<usize>,
    /// Gap of each candidate arm.
    pub gaps: BTreeMap<usize, f64>,
    /// Separation of each confusion arm.
    pub separations: BTreeMap<usize, f64>,
    /// Distance between the true and each parameter's mean at the true best arm.
    pub alpha1: Vec<f64>,
    /// Parameters whose maximizer is not unique under the tie tolerance.
    pub non_unique_best: Vec<usize>,
    pub regime: Regime,
}

impl StructuralReport {
    pub fn gap(&self, arm: usize) -> f64 {
        self.gaps.get(&arm).copied().unwrap_or(0.0)
    }

    pub fn is_confusion_arm(&self, arm: usize) -> bool {
        self.confusion_arms.binary_search(&arm).is_ok()
    }
}

/// Computes the structural report of `params` with true parameter `truth`.
pub fn analyze(params: &ParameterSet, truth: usize) -> Result<StructuralReport> {
    params.parameter(truth)?;
    let eps = params.tie_epsilon();
    let best = best_arms(params);
    let candidates = candidate_arms(params);
    let star = best[truth];
    let true_means = params.means(truth);

    let alpha1: Vec<f64> = params
        .parameters()
        .iter()
        .map(|p| (true_means[star] - p.means[star]).abs())
        .collect();

    let confusion_parameters: Vec<usize> = (0..params.len())
        .filter(|&j| best[j] != star && params.means_equal(true_means[star], params.mean(star, j)))
        .collect();

    let mut separations: BTreeMap<usize, f64> = BTreeMap::new();
    for &j in &confusion_parameters {
        let arm = best[j];
        let d = (true_means[arm] - params.mean(arm, j)).abs();
        separations.entry(arm).and_modify(|b| *b = b.min(d)).or_insert(d);
    }
    let confusion_arms: Vec<usize> = separations.keys().copied().collect();

    let gaps = candidates
        .iter()
        .map(|&arm| (arm, true_means[star] - true_means[arm]))
        .collect();

    let non_unique_best = params
        .parameters()
        .iter()
        .enumerate()
        .filter(|(_, p)| !has_unique_best(&p.means, eps))
        .map(|(j, _)| j)
        .collect();

    let regime = if confusion_parameters.is_empty() {
        Regime::BoundedRegret
    } else {
        Regime::LogarithmicRegret
    };

    Ok(StructuralReport {
        true_parameter: truth,
        best_arm_per_parameter: best,
        candidate_arms: candidates,
        true_best_arm: star,
        confusion_parameters,
        confusion_arms,
        gaps,
        separations,
        alpha1,
        non_unique_best,
        regime,
    })
}

/// Smallest integer `k >= 3` with `k > ceil(12 ln k / alpha^2)`.
pub fn k_threshold(alpha: f64) -> Result<u64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "k threshold needs a positive finite alpha, got {alpha}"
        )));
    }
    let c = 12.0 / (alpha * alpha);
    let holds = |k: u64| (k as f64) > (c * (k as f64).ln()).ceil();

    if c <= 3.0 {
        return Ok((3..).find(|&k| holds(k)).expect("unbounded scan"));
    }
    // For c > 3 no k in [3, c] qualifies, and k - ceil(c ln k) is
    // nondecreasing for k >= c, so the qualifying set is a ray above c.
    if c > 1e17 {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha} is too small for a representable k threshold"
        )));
    }
    let mut lo = c.floor() as u64;
    let mut hi = lo.max(3) * 2;
    while !holds(hi) {
        lo = hi;
        hi *= 2;
    }
    // invariant: !holds(lo), holds(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `max(3, ceil(144 / alpha^4))`. The ceiling ignores relative excess below
/// 1e-12 so that decimal inputs such as 0.2 give the exact integer.
pub fn e_threshold(alpha: f64) -> f64 {
    let x = 144.0 / alpha.powi(4);
    (x - x * 1e-12).ceil().max(3.0)
}

/// Partial sum of `2|A| k / (k - ceil(12 ln k / alpha^2))^5` for
/// `k = k_threshold(alpha) ..= last`.
pub fn episode_tail_sum(alpha: f64, candidate_count: usize, last: u64) -> Result<f64> {
    let start = k_threshold(alpha)?;
    let c = 12.0 / (alpha * alpha);
    let a = candidate_count as f64;
    Ok((start..=last)
        .map(|k| {
            let kf = k as f64;
            let m = kf - (c * kf.ln()).ceil();
            2.0 * a * kf / m.powi(5)
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub arm: usize,
    pub parameter: usize,
    pub alpha1: f64,
    pub k: u64,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub regime: Regime,
    pub candidate_count: usize,
    /// `k_i(theta)` and `E_i(theta)` for every arm with a `C_i` bound and
    /// every eligible parameter optimal at that arm.
    pub thresholds: Vec<ThresholdEntry>,
    /// Closed-form bound on the expected pulls of each non-confusion
    /// suboptimal candidate arm.
    pub pull_bounds: BTreeMap<usize, f64>,
    pub d1: f64,
    pub d2: f64,
    pub log_coefficient: f64,
}

/// Regret-bound constants for an analyzed instance.
pub fn constants(report: &StructuralReport, params: &ParameterSet) -> Result<ConstantsReport> {
    if report.best_arm_per_parameter.len() != params.len() {
        return Err(Error::InvalidArgument(format!(
            "report covers {} parameters but the set has {}",
            report.best_arm_per_parameter.len(),
            params.len()
        )));
    }
    let a = report.candidate_arms.len() as f64;
    let mut thresholds = Vec::new();
    let mut pull_bounds = BTreeMap::new();

    for &arm in &report.candidate_arms {
        if arm == report.true_best_arm || report.is_confusion_arm(arm) {
            continue;
        }
        let mut best_inner = f64::INFINITY;
        for (j, &b) in report.best_arm_per_parameter.iter().enumerate() {
            if b != arm || report.confusion_parameters.contains(&j) {
                continue;
            }
            let alpha = report.alpha1[j];
            let k = k_threshold(alpha)?;
            let e = e_threshold(alpha);
            thresholds.push(ThresholdEntry {
                arm,
                parameter: j,
                alpha1: alpha,
                k,
                e,
            });
            let inner = 2.0 * e * (e + 1.0) * a + 4.0 * a * alpha.powi(10);
            best_inner = best_inner.min(inner);
        }
        debug_assert!(best_inner.is_finite());
        pull_bounds.insert(arm, 1.0 + 4.0 * a + best_inner);
    }

    let bound = |arm: usize| pull_bounds.get(&arm).copied().unwrap_or(0.0);
    let d1 = a * report
        .candidate_arms
        .iter()
        .map(|&i| report.gap(i) * bound(i))
        .fold(0.0, f64::max);
    let d2 = a * report
        .candidate_arms
        .iter()
        .map(|&i| report.gap(i) * (2.0 + bound(i) + 4.0 * a))
        .fold(0.0, f64::max);
    let log_coefficient = 12.0
        * report
            .separations
            .iter()
            .fold(0.0, |acc, (&i, &beta)| acc + report.gap(i) / (beta * beta));

    Ok(ConstantsReport {
        regime: report.regime,
        candidate_count: report.candidate_arms.len(),
        thresholds,
        pull_bounds,
        d1,
        d2,
        log_coefficient,
    })
}

/// Upper bound on expected regret at horizon `horizon`.
pub fn regret_upper_bound(constants: &ConstantsReport, horizon: u64) -> f64 {
    match constants.regime {
        Regime::BoundedRegret => constants.d1,
        Regime::LogarithmicRegret => constants.d2 + constants.log_coefficient * (horizon.max(1) as f64).ln(),
    }
}
