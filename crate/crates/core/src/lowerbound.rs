//! The asymptotic lower-bound constant: the smallest, over exploration
//! allocations `h` on the simplex of suboptimal candidate arms, of the worst
//! ratio, over confusion parameters, between the allocation's regret rate
//! and its information rate `sum_u h_u KL_u(truth || theta)`.
//!
//! The value is found by bisection on the ratio `t`: `t` is feasible when
//! some `h` makes `sum_u h_u (gap_u - t KL_u(theta)) <= 0` for every
//! confusion parameter, a finite matrix game solved exactly per step.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::StructuralReport;
use crate::error::{Error, Result};
use crate::game::solve_min_max;
use crate::model::{DiscreteDistribution, ParameterSet, RewardFamily};

pub const DEFAULT_RESOLUTION: f64 = 1e-6;

/// `KL(Bernoulli(p) || Bernoulli(q))` with `0 ln 0 = 0`; infinite when `p`
/// puts mass where `q` puts none.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    fn term(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    }
    (term(p, q) + term(1.0 - p, 1.0 - q)).max(0.0)
}

/// Finite-support KL divergence; support points are matched exactly.
pub fn discrete_kl(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let mass = |d: &DiscreteDistribution, x: f64| -> f64 {
        d.support
            .iter()
            .zip(&d.probs)
            .filter(|(s, _)| **s == x)
            .map(|(_, pr)| pr)
            .sum()
    };
    let mut points: Vec<f64> = p.support.clone();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
        .into_iter()
        .map(|x| {
            let (a, b) = (mass(p, x), mass(q, x));
            if a == 0.0 {
                0.0
            } else if b == 0.0 {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
        .sum::<f64>()
        .max(0.0)
}

/// Divergence of arm `arm`'s law under `truth` from its law under `other`.
pub fn arm_kl(params: &ParameterSet, arm: usize, truth: usize, other: usize) -> f64 {
    match params.reward_family() {
        RewardFamily::Bernoulli => bernoulli_kl(params.mean(arm, truth), params.mean(arm, other)),
        RewardFamily::DiscreteBounded { .. } => discrete_kl(
            params.discrete(arm, truth).expect("discrete family"),
            params.discrete(arm, other).expect("discrete family"),
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlEntry {
    pub arm: usize,
    pub parameter: usize,
    pub divergence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundResult {
    pub value: f64,
    /// Weight on each suboptimal candidate arm.
    pub allocation: BTreeMap<usize, f64>,
    pub kl_table: Vec<KlEntry>,
    pub resolution: f64,
    /// Confusion parameters ruled out at any positive weight on an arm with
    /// infinite divergence; they never bind.
    pub dropped_parameters: Vec<usize>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxRatio {
    pub value: f64,
    pub allocation: Vec<f64>,
    /// Rows with an infinite entry, excluded from the max.
    pub dropped_rows: Vec<usize>,
    pub bisection_steps: u32,
}

fn ratio(gaps: &[f64], row: &[f64], h: &[f64]) -> f64 {
    let num: f64 = h.iter().zip(gaps).map(|(w, g)| w * g).sum();
    let den: f64 = h.iter().zip(row).map(|(w, d)| w * d).sum();
    if num <= 0.0 {
        0.0
    } else if den <= 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Worst ratio over `rows` for allocation `h`.
pub fn max_ratio(gaps: &[f64], rows: &[Vec<f64>], h: &[f64]) -> f64 {
    rows.iter().map(|row| ratio(gaps, row, h)).fold(0.0, f64::max)
}

/// `min_h max_row (h . gaps) / (h . row)` over the simplex, to within
/// `resolution`. `divergences[row][u]` must be nonnegative; every row needs a
/// positive entry.
pub fn minmax_ratio(gaps: &[f64], divergences: &[Vec<f64>], resolution: f64) -> Result<MinMaxRatio> {
    let m = gaps.len();
    if m == 0 {
        return Err(Error::InvalidArgument("no exploration arms".into()));
    }
    if resolution.is_nan() || resolution <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    if let Some(i) = divergences.iter().position(|r| r.iter().all(|&d| d == 0.0)) {
        return Err(Error::Indistinguishable(format!("row {i}")));
    }
    let uniform = vec![1.0 / m as f64; m];
    let (dropped_rows, rows): (Vec<usize>, Vec<Vec<f64>>) = {
        let mut dropped = Vec::new();
        let mut kept = Vec::new();
        for (i, r) in divergences.iter().enumerate() {
            if r.iter().any(|d| d.is_infinite()) {
                dropped.push(i);
            } else {
                kept.push(r.clone());
            }
        }
        (dropped, kept)
    };
    if rows.is_empty() {
        return Ok(MinMaxRatio {
            value: 0.0,
            allocation: uniform,
            dropped_rows,
            bisection_steps: 0,
        });
    }

    let feasible = |t: f64| -> Option<Vec<f64>> {
        let payoff: Vec<Vec<f64>> = (0..m)
            .map(|u| rows.iter().map(|r| gaps[u] - t * r[u]).collect())
            .collect();
        let sol = solve_min_max(&payoff);
        let tol = 1e-12 * payoff.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
        (sol.value <= tol).then_some(sol.strategy)
    };

    if let Some(h) = feasible(0.0) {
        return Ok(MinMaxRatio {
            value: max_ratio(gaps, &rows, &h),
            allocation: h,
            dropped_rows,
            bisection_steps: 0,
        });
    }

    // vertex bracket, widened to the uniform allocation's ratio which is
    // always attainable
    let vertex = rows
        .iter()
        .map(|r| {
            (0..m)
                .filter(|&u| r[u] > 0.0)
                .map(|u| gaps[u] / r[u])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        + 1.0;
    let mut hi = vertex.max(max_ratio(gaps, &rows, &uniform));
    let mut best = loop {
        if let Some(h) = feasible(hi) {
            break h;
        }
        hi *= 2.0;
    };
    let mut lo = 0.0;
    let mut steps = 0;
    while hi - lo >= resolution {
        let mid = 0.5 * (lo + hi);
        match feasible(mid) {
            Some(h) => {
                hi = mid;
                best = h;
            }
            None => lo = mid,
        }
        steps += 1;
    }
    Ok(MinMaxRatio {
        value: max_ratio(gaps, &rows, &best).min(hi),
        allocation: best,
        dropped_rows,
        bisection_steps: steps,
    })
}

/// Lower-bound constant for `params` with the truth analysed in `report`.
pub fn lower_bound(params: &ParameterSet, report: &StructuralReport, resolution: f64) -> Result<LowerBoundResult> {
    let truth = report.true_parameter;
    let arms: Vec<usize> = report
        .candidate_arms
        .iter()
        .copied()
        .filter(|&a| a != report.true_best_arm)
        .collect();
    let uniform =
        |arms: &[usize]| -> BTreeMap<usize, f64> { arms.iter().map(|&a| (a, 1.0 / arms.len() as f64)).collect() };

    if report.confusion_parameters.is_empty() {
        return Ok(LowerBoundResult {
            value: 0.0,
            allocation: uniform(&arms),
            kl_table: Vec::new(),
            resolution,
            dropped_parameters: Vec::new(),
            warning: None,
        });
    }
    if arms.is_empty() {
        return Ok(LowerBoundResult {
            value: 0.0,
            allocation: BTreeMap::new(),
            kl_table: Vec::new(),
            resolution,
            dropped_parameters: Vec::new(),
            warning: Some("no suboptimal candidate arm; the bound is vacuous".into()),
        });
    }

    let mut kl_table = Vec::new();
    let mut rows = Vec::with_capacity(report.confusion_parameters.len());
    for &j in &report.confusion_parameters {
        let row: Vec<f64> = arms.iter().map(|&u| arm_kl(params, u, truth, j)).collect();
        if row.iter().all(|&d| d == 0.0) {
            return Err(Error::Indistinguishable(params.parameters()[j].name.clone()));
        }
        kl_table.extend(arms.iter().zip(&row).map(|(&arm, &divergence)| KlEntry {
            arm,
            parameter: j,
            divergence,
        }));
        rows.push(row);
    }
    let gaps: Vec<f64> = arms.iter().map(|&u| report.gap(u)).collect();
    let solved = minmax_ratio(&gaps, &rows, resolution)?;
    Ok(LowerBoundResult {
        value: solved.value,
        allocation: arms.iter().copied().zip(solved.allocation).collect(),
        kl_table,
        resolution,
        dropped_parameters: solved
            .dropped_rows
            .iter()
            .map(|&i| report.confusion_parameters[i])
            .collect(),
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bernoulli_kl_examples() {
        assert_eq!(bernoulli_kl(0.3, 0.3), 0.0);
        assert_abs_diff_eq!(bernoulli_kl(0.2, 0.9), 1.362737753988614, epsilon = 1e-12);
        assert_abs_diff_eq!(bernoulli_kl(0.5, 0.25), 0.14384103622589042, epsilon = 1e-12);
        assert_eq!(bernoulli_kl(0.0, 0.0), 0.0);
        assert_eq!(bernoulli_kl(1.0, 1.0), 0.0);
        assert_eq!(bernoulli_kl(0.5, 0.0), f64::INFINITY);
        assert_eq!(bernoulli_kl(0.5, 1.0), f64::INFINITY);
        assert!(bernoulli_kl(0.0, 0.5).is_finite());
    }

    #[test]
    fn discrete_kl_matches_bernoulli() {
        let d = |p: f64| DiscreteDistribution {
            support: vec![0.0, 1.0],
            probs: vec![1.0 - p, p],
        };
        assert_abs_diff_eq!(discrete_kl(&d(0.2), &d(0.9)), bernoulli_kl(0.2, 0.9), epsilon = 1e-12);
        let narrow = DiscreteDistribution {
            support: vec![0.5],
            probs: vec![1.0],
        };
        assert_eq!(discrete_kl(&d(0.2), &narrow), f64::INFINITY);
    }

    #[test]
    fn two_arm_value() {
        let set = ParameterSet::from_means(&[vec![0.9, 0.5], vec![0.2, 0.5]]).unwrap();
        let r = analyze(&set, 1).unwrap();
        let lb = lower_bound(&set, &r, 1e-9).unwrap();
        assert_abs_diff_eq!(lb.value, 0.3 / bernoulli_kl(0.2, 0.9), epsilon = 1e-6);
        assert_abs_diff_eq!(lb.value, 0.2202, epsilon = 1e-3);
        assert_eq!(lb.allocation.get(&0), Some(&1.0));
    }

    #[test]
    fn bounded_instance_has_zero_value() {
        let set = ParameterSet::from_means(&[vec![0.9, 0.5], vec![0.2, 0.5]]).unwrap();
        let r = analyze(&set, 0).unwrap();
        let lb = lower_bound(&set, &r, 1e-6).unwrap();
        assert_eq!(lb.value, 0.0);
        assert!(lb.kl_table.is_empty());
    }

    #[test]
    fn indistinguishable_parameter() {
        let gaps = [0.1, 0.2];
        let err = minmax_ratio(&gaps, &[vec![0.5, 0.0], vec![0.0, 0.0]], 1e-6).unwrap_err();
        assert!(matches!(err, Error::Indistinguishable(_)));
    }

    #[test]
    fn infinite_divergence_rows_never_bind() {
        let gaps = [0.1, 0.2];
        let r = minmax_ratio(&gaps, &[vec![f64::INFINITY, 0.0], vec![0.0, 0.5]], 1e-9).unwrap();
        assert_eq!(r.dropped_rows, vec![0]);
        // only the second row binds: all weight on arm 1 gives 0.2 / 0.5
        assert_abs_diff_eq!(r.value, 0.4, epsilon = 1e-6);
    }

    #[test]
    fn mixed_allocation_beats_vertices() {
        // each row is informative on a different arm, so the optimum mixes
        let gaps = [1.0, 1.0];
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = minmax_ratio(&gaps, &rows, 1e-9).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.allocation[0], 0.5, epsilon = 1e-6);
    }

    #[test]
    fn zero_gap_arm_gives_zero() {
        let r = minmax_ratio(&[0.0, 0.3], &[vec![0.2, 0.4]], 1e-6).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn bracket_halves_to_resolution() {
        let gaps = [0.3, 0.1, 0.2];
        let rows = vec![vec![0.5, 0.1, 0.2], vec![0.05, 0.4, 0.3]];
        let coarse = minmax_ratio(&gaps, &rows, 1e-2).unwrap();
        let fine = minmax_ratio(&gaps, &rows, 1e-5).unwrap();
        assert!(fine.bisection_steps > coarse.bisection_steps);
        assert!((coarse.value - fine.value).abs() < 1e-2);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn problem() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
            (1usize..4, 1usize..5).prop_flat_map(|(m, n)| {
                (
                    prop::collection::vec(0.01f64..1.0, m),
                    prop::collection::vec(prop::collection::vec(0.01f64..2.0, m), n),
                )
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn scaling_divergences_scales_value((gaps, rows) in problem(), c in 0.2f64..5.0) {
                let base = minmax_ratio(&gaps, &rows, 1e-8).unwrap();
                let scaled_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|d| d * c).collect()).collect();
                let scaled = minmax_ratio(&gaps, &scaled_rows, 1e-8).unwrap();
                prop_assert!((scaled.value - base.value / c).abs() < 1e-6 * (1.0 + base.value));
            }

            #[test]
            fn allocation_attains_value((gaps, rows) in problem()) {
                let r = minmax_ratio(&gaps, &rows, 1e-7).unwrap();
                prop_assert!(r.value >= 0.0);
                prop_assert!((r.allocation.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(r.allocation.iter().all(|&h| h >= -1e-12));
                prop_assert!((max_ratio(&gaps, &rows, &r.allocation) - r.value).abs() < 1e-6);
            }

            #[test]
            fn feasibility_is_monotone((gaps, rows) in problem(), t1 in 0.0f64..5.0, t2 in 0.0f64..5.0) {
                let m = gaps.len();
                let value_at = |t: f64| {
                    let payoff: Vec<Vec<f64>> = (0..m).map(|u| rows.iter().map(|r| gaps[u] - t * r[u]).collect()).collect();
                    solve_min_max(&payoff).value
                };
                let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                prop_assert!(value_at(hi) <= value_at(lo) + 1e-9);
            }
        }
    }
}
