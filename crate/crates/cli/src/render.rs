//! Human and JSON views of the library reports. Arms are printed 1-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fpbandit::analysis::{ConstantsReport, StructuralReport};
use fpbandit::lowerbound::LowerBoundResult;
use fpbandit::model::ParameterSet;
use serde::Serialize;

fn label(arm: usize) -> usize {
    arm + 1
}

fn arm_set(arms: &[usize]) -> String {
    let parts: Vec<String> = arms.iter().map(|&a| label(a).to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

fn name_set(params: &ParameterSet, indices: &[usize], limit: usize) -> String {
    let mut parts: Vec<String> = indices
        .iter()
        .take(limit)
        .map(|&j| params.parameters()[j].name.clone())
        .collect();
    if indices.len() > limit {
        parts.push(format!("... ({} total)", indices.len()));
    }
    format!("{{{}}}", parts.join(", "))
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Serialize)]
pub struct ParameterView {
    pub name: String,
    pub means: Vec<f64>,
    pub best_arm: usize,
    pub alpha1: f64,
    pub unique_best: bool,
}

#[derive(Debug, Serialize)]
pub struct ThresholdView {
    pub arm: usize,
    pub parameter: String,
    pub alpha1: f64,
    pub k: u64,
    pub e: f64,
}

#[derive(Debug, Serialize)]
pub struct ConstantsView {
    pub pull_bounds: BTreeMap<usize, f64>,
    pub thresholds: Vec<ThresholdView>,
    pub d1: f64,
    pub d2: f64,
    pub log_coefficient: f64,
    pub horizon: u64,
    pub regret_upper_bound: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalysisView {
    pub arms: usize,
    pub reward_family: &'static str,
    pub tie_epsilon: f64,
    pub true_parameter: String,
    pub regime: &'static str,
    pub candidate_arms: Vec<usize>,
    pub true_best_arm: usize,
    pub confusion_parameters: Vec<String>,
    pub confusion_arms: Vec<usize>,
    pub gaps: BTreeMap<usize, f64>,
    pub separations: BTreeMap<usize, f64>,
    pub non_unique_best: Vec<String>,
    pub parameters: Vec<ParameterView>,
    pub constants: ConstantsView,
}

pub fn constants_view(params: &ParameterSet, constants: &ConstantsReport, horizon: u64) -> ConstantsView {
    ConstantsView {
        pull_bounds: constants.pull_bounds.iter().map(|(&a, &c)| (label(a), c)).collect(),
        thresholds: constants
            .thresholds
            .iter()
            .map(|t| ThresholdView {
                arm: label(t.arm),
                parameter: params.parameters()[t.parameter].name.clone(),
                alpha1: t.alpha1,
                k: t.k,
                e: t.e,
            })
            .collect(),
        d1: constants.d1,
        d2: constants.d2,
        log_coefficient: constants.log_coefficient,
        horizon,
        regret_upper_bound: fpbandit::analysis::regret_upper_bound(constants, horizon),
    }
}

pub fn analysis_view(
    params: &ParameterSet,
    report: &StructuralReport,
    constants: &ConstantsReport,
    horizon: u64,
) -> AnalysisView {
    let names = |idx: &[usize]| -> Vec<String> { idx.iter().map(|&j| params.parameters()[j].name.clone()).collect() };
    AnalysisView {
        arms: params.arm_count(),
        reward_family: params.reward_family().name(),
        tie_epsilon: params.tie_epsilon(),
        true_parameter: params.parameters()[report.true_parameter].name.clone(),
        regime: report.regime.label(),
        candidate_arms: report.candidate_arms.iter().map(|&a| label(a)).collect(),
        true_best_arm: label(report.true_best_arm),
        confusion_parameters: names(&report.confusion_parameters),
        confusion_arms: report.confusion_arms.iter().map(|&a| label(a)).collect(),
        gaps: report.gaps.iter().map(|(&a, &g)| (label(a), g)).collect(),
        separations: report.separations.iter().map(|(&a, &b)| (label(a), b)).collect(),
        non_unique_best: names(&report.non_unique_best),
        parameters: params
            .parameters()
            .iter()
            .enumerate()
            .map(|(j, p)| ParameterView {
                name: p.name.clone(),
                means: p.means.clone(),
                best_arm: label(report.best_arm_per_parameter[j]),
                alpha1: report.alpha1[j],
                unique_best: !report.non_unique_best.contains(&j),
            })
            .collect(),
        constants: constants_view(params, constants, horizon),
    }
}

pub fn analysis_table(params: &ParameterSet, report: &StructuralReport, constants: &ConstantsReport) -> String {
    let mut s = String::new();
    let truth = &params.parameters()[report.true_parameter];
    let _ = writeln!(
        s,
        "instance: {} arms, {} parameters, {} rewards, tie epsilon {}",
        params.arm_count(),
        params.len(),
        params.reward_family().name(),
        params.tie_epsilon()
    );
    let _ = writeln!(s, "true parameter: {} {:?}", truth.name, truth.means);
    let _ = writeln!(s, "regime: {}", report.regime.label());
    let _ = writeln!(s, "candidate arms A = {}", arm_set(&report.candidate_arms));
    let _ = writeln!(s, "true best arm = {}", label(report.true_best_arm));
    let _ = writeln!(
        s,
        "confusion parameters B = {}",
        name_set(params, &report.confusion_parameters, 12)
    );
    let _ = writeln!(s, "confusion arms C = {}", arm_set(&report.confusion_arms));
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:>5}  {:>10}  {:>10}  {:>14}",
        "arm", "gap", "separation", "pull bound"
    );
    for &arm in &report.candidate_arms {
        let sep = report
            .separations
            .get(&arm)
            .map_or("-".to_string(), |b| format!("{b:.6}"));
        let bound = constants
            .pull_bounds
            .get(&arm)
            .map_or("-".to_string(), |c| format!("{c:.6e}"));
        let _ = writeln!(
            s,
            "{:>5}  {:>10.6}  {:>10}  {:>14}",
            label(arm),
            report.gap(arm),
            sep,
            bound
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "D1 = {:.6e}", constants.d1);
    let _ = writeln!(s, "D2 = {:.6e}", constants.d2);
    let _ = writeln!(s, "log coefficient = {:.6}", constants.log_coefficient);
    if !report.non_unique_best.is_empty() {
        let _ = writeln!(
            s,
            "note: {} parameters have a non-unique best arm (ties go to the smallest arm): {}",
            report.non_unique_best.len(),
            name_set(params, &report.non_unique_best, 6)
        );
    }
    s
}

pub fn constants_table(view: &ConstantsView) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "D1 = {:.6e}", view.d1);
    let _ = writeln!(s, "D2 = {:.6e}", view.d2);
    let _ = writeln!(s, "log coefficient = {:.6}", view.log_coefficient);
    let _ = writeln!(
        s,
        "regret upper bound at T = {}: {:.6e}",
        view.horizon, view.regret_upper_bound
    );
    for (arm, c) in &view.pull_bounds {
        let _ = writeln!(s, "pull bound C_{arm} = {c:.6e}");
    }
    if !view.thresholds.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:>5}  {:<12}  {:>10}  {:>10}  {:>12}",
            "arm", "parameter", "alpha1", "k", "E"
        );
        for t in &view.thresholds {
            let _ = writeln!(
                s,
                "{:>5}  {:<12}  {:>10.6}  {:>10}  {:>12}",
                t.arm, t.parameter, t.alpha1, t.k, t.e
            );
        }
    }
    s
}

#[derive(Debug, Serialize)]
pub struct KlView {
    pub arm: usize,
    pub parameter: String,
    /// `null` when infinite.
    pub divergence: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LowerBoundView {
    pub true_parameter: String,
    pub value: f64,
    pub allocation: BTreeMap<usize, f64>,
    pub kl_table: Vec<KlView>,
    pub resolution: f64,
    pub upper_log_coefficient: f64,
    /// `value / upper_log_coefficient`; `null` when the coefficient is zero.
    pub ratio_to_upper_coefficient: Option<f64>,
    pub dropped_parameters: Vec<String>,
    pub warning: Option<String>,
}

pub fn lower_bound_view(
    params: &ParameterSet,
    report: &StructuralReport,
    result: &LowerBoundResult,
    coefficient: f64,
) -> LowerBoundView {
    LowerBoundView {
        true_parameter: params.parameters()[report.true_parameter].name.clone(),
        value: result.value,
        allocation: result.allocation.iter().map(|(&a, &h)| (label(a), h)).collect(),
        kl_table: result
            .kl_table
            .iter()
            .map(|e| KlView {
                arm: label(e.arm),
                parameter: params.parameters()[e.parameter].name.clone(),
                divergence: finite(e.divergence),
            })
            .collect(),
        resolution: result.resolution,
        upper_log_coefficient: coefficient,
        ratio_to_upper_coefficient: (coefficient > 0.0).then(|| result.value / coefficient),
        dropped_parameters: result
            .dropped_parameters
            .iter()
            .map(|&j| params.parameters()[j].name.clone())
            .collect(),
        warning: result.warning.clone(),
    }
}
