//! Shared helpers for integration tests: random instances on a coarse grid
//! and a deliberately naive FP-UCB used as a reference.

#![allow(dead_code)]

use fpbandit::model::{Environment, ParameterSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Grid value `k / 20`, so equal grid points are bitwise equal.
pub fn grid(k: u32) -> f64 {
    f64::from(k) / 20.0
}

/// One parameter's means, each in `{0.05, ..., 0.95}`. With `unique_best`
/// the maximum is attained by exactly one arm.
pub fn random_means<R: Rng>(rng: &mut R, arms: usize, unique_best: bool) -> Vec<f64> {
    loop {
        let means: Vec<f64> = (0..arms).map(|_| grid(rng.random_range(1..=19))).collect();
        let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !unique_best || means.iter().filter(|&&m| m == top).count() == 1 {
            return means;
        }
    }
}

/// A random Bernoulli instance with 2..=`max_arms` arms and
/// 2..=`max_params` parameters, plus a random true parameter index.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_arms: usize,
    max_params: usize,
    unique_best: bool,
) -> (ParameterSet, usize) {
    let arms = rng.random_range(2..=max_arms);
    let count = rng.random_range(2..=max_params);
    let means: Vec<Vec<f64>> = (0..count).map(|_| random_means(rng, arms, unique_best)).collect();
    let truth = rng.random_range(0..count);
    (ParameterSet::from_means(&means).expect("grid means are valid"), truth)
}

fn first_argmax(means: &[f64]) -> usize {
    let mut best = 0;
    for (i, &m) in means.iter().enumerate() {
        if m > means[best] {
            best = i;
        }
    }
    best
}

/// Naive FP-UCB: keeps every observed reward and recomputes each empirical
/// mean from the full history. Rewards come from the same generator the
/// simulation engine uses for run seed `seed`, one draw per step.
pub fn reference_fpucb_actions(env: &Environment, horizon: u64, seed: u64) -> Vec<usize> {
    let params = env.params();
    let optimal: Vec<usize> = (0..params.len()).map(|j| first_argmax(params.means(j))).collect();
    let mut candidates = optimal.clone();
    candidates.sort_unstable();
    candidates.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let mut history: Vec<Vec<f64>> = vec![Vec::new(); params.arm_count()];
    let mut actions = Vec::new();
    let mut play = |arm: usize, history: &mut Vec<Vec<f64>>, actions: &mut Vec<usize>| {
        if (actions.len() as u64) < horizon {
            history[arm].push(env.sample_reward(arm, &mut rng).expect("arm in range"));
            actions.push(arm);
        }
    };

    for &arm in &candidates {
        play(arm, &mut history, &mut actions);
    }
    let mut episode = 1u64;
    while (actions.len() as u64) < horizon {
        let mut set: Vec<usize> = Vec::new();
        for (j, &best) in optimal.iter().enumerate() {
            let consistent = candidates.iter().all(|&i| {
                let n = history[i].len() as f64;
                let mean = history[i].iter().sum::<f64>() / n;
                (mean - params.mean(i, j)).abs() <= (3.0 * (episode as f64).ln() / n).sqrt()
            });
            if consistent && !set.contains(&best) {
                set.push(best);
            }
        }
        if set.is_empty() {
            set = candidates.clone();
        }
        set.sort_unstable();
        for arm in set {
            play(arm, &mut history, &mut actions);
        }
        episode += 1;
    }
    actions
}

/// `min_h max_row (h . gaps) / (h . row)` by brute force over the simplex
/// grid with spacing `1 / steps`; supports up to three coordinates.
pub fn grid_minmax(gaps: &[f64], rows: &[Vec<f64>], steps: u32) -> f64 {
    let worst = |h: &[f64]| -> f64 {
        let num: f64 = h.iter().zip(gaps).map(|(w, g)| w * g).sum();
        rows.iter()
            .map(|row| {
                if row.iter().any(|d| d.is_infinite()) {
                    return 0.0;
                }
                let den: f64 = h.iter().zip(row).map(|(w, d)| w * d).sum();
                if num <= 0.0 {
                    0.0
                } else if den <= 0.0 {
                    f64::INFINITY
                } else {
                    num / den
                }
            })
            .fold(0.0, f64::max)
    };
    let s = f64::from(steps);
    let mut best = f64::INFINITY;
    match gaps.len() {
        1 => best = worst(&[1.0]),
        2 => {
            for a in 0..=steps {
                let x = f64::from(a) / s;
                best = best.min(worst(&[x, 1.0 - x]));
            }
        }
        3 => {
            for a in 0..=steps {
                for b in 0..=steps - a {
                    let x = f64::from(a) / s;
                    let y = f64::from(b) / s;
                    best = best.min(worst(&[x, y, (1.0 - x - y).max(0.0)]));
                }
            }
        }
        n => panic!("grid search supports at most 3 coordinates, got {n}"),
    }
    best
}
