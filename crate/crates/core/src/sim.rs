//! Seeded Monte-Carlo runs recording cumulative pseudo-regret, and batch
//! aggregation across runs.
//!
//! Seeding: run `r` of policy `p` uses `split_seed(base_seed, r, p.stream_id())`,
//! a SplitMix64 mix of the three inputs. That seed keys a ChaCha8 generator;
//! stream 0 drives rewards and stream 1 drives the policy's own randomness.
//! Runs therefore do not depend on scheduling order or on which other
//! policies are in the batch.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::arm_gaps;
use crate::error::{Error, Result};
use crate::model::Environment;
use crate::policies::PolicyKind;

const REWARD_STREAM: u64 = 0;
const POLICY_STREAM: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of one (run, policy) pair from the batch seed.
pub fn split_seed(base_seed: u64, run: u64, policy: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ run) ^ policy.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

/// Times at which regret is recorded: every step up to `dense_until`, then
/// `per_decade` geometrically spaced points per factor of ten. The horizon
/// is always included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSchedule {
    pub dense_until: u64,
    pub per_decade: u32,
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        Self {
            dense_until: 1000,
            per_decade: 100,
        }
    }
}

impl CheckpointSchedule {
    pub fn every_step() -> Self {
        Self {
            dense_until: u64::MAX,
            per_decade: 1,
        }
    }

    pub fn times(&self, horizon: u64) -> Vec<u64> {
        let mut out: Vec<u64> = (1..=horizon.min(self.dense_until)).collect();
        if horizon > self.dense_until {
            let ratio = 10f64.powf(1.0 / self.per_decade.max(1) as f64);
            let mut t = self.dense_until.max(1);
            let mut x = t as f64;
            while t < horizon {
                x *= ratio;
                t = (x.round() as u64).max(t + 1).min(horizon);
                out.push(t);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub schedule: CheckpointSchedule,
    pub record_actions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub policy: PolicyKind,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    /// Cumulative pseudo-regret at each checkpoint.
    pub cumulative_regret: Vec<f64>,
    pub pull_counts_final: Vec<u64>,
    pub episode_count: Option<u64>,
    pub actions: Option<Vec<usize>>,
}

impl Trajectory {
    pub fn final_regret(&self) -> f64 {
        *self.cumulative_regret.last().expect("horizon is positive")
    }

    /// Regret at time `t`, if `t` is a checkpoint.
    pub fn regret_at(&self, t: u64) -> Option<f64> {
        self.checkpoints
            .binary_search(&t)
            .ok()
            .map(|i| self.cumulative_regret[i])
    }
}

fn regret_from_counts(gaps: &[f64], counts: &[u64]) -> f64 {
    gaps.iter().zip(counts).map(|(g, &n)| g * n as f64).sum()
}

pub fn run_trajectory(env: &Environment, policy: PolicyKind, horizon: u64, seed: u64) -> Result<Trajectory> {
    run_trajectory_with(env, policy, horizon, seed, &RunOptions::default())
}

pub fn run_trajectory_with(
    env: &Environment,
    policy: PolicyKind,
    horizon: u64,
    seed: u64,
    options: &RunOptions,
) -> Result<Trajectory> {
    let params = env.params();
    let arms = params.arm_count();
    if horizon < arms as u64 {
        return Err(Error::HorizonTooShort { horizon, arms });
    }
    let gaps = arm_gaps(params, env.true_parameter());
    let checkpoints = options.schedule.times(horizon);

    let mut reward_rng = ChaCha8Rng::seed_from_u64(seed);
    reward_rng.set_stream(REWARD_STREAM);
    let mut policy_rng = ChaCha8Rng::seed_from_u64(seed);
    policy_rng.set_stream(POLICY_STREAM);

    let mut learner = policy.build(params, horizon);
    let mut counts = vec![0u64; arms];
    let mut regret = Vec::with_capacity(checkpoints.len());
    let mut actions = options.record_actions.then(|| Vec::with_capacity(horizon as usize));
    let mut next = checkpoints.iter().copied().peekable();

    for t in 1..=horizon {
        let arm = learner.select(&mut policy_rng);
        let reward = env.sample_unchecked(arm, &mut reward_rng);
        learner.observe(arm, reward, &mut policy_rng);
        counts[arm] += 1;
        if let Some(a) = actions.as_mut() {
            a.push(arm);
        }
        if next.peek() == Some(&t) {
            next.next();
            regret.push(regret_from_counts(&gaps, &counts));
        }
    }

    Ok(Trajectory {
        policy,
        horizon,
        checkpoints,
        cumulative_regret: regret,
        pull_counts_final: counts,
        episode_count: learner.episode_count(),
        actions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCurve {
    pub policy: PolicyKind,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub final_regrets: Vec<f64>,
    pub mean_pull_counts: Vec<f64>,
    pub mean_episode_count: Option<f64>,
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl PolicyCurve {
    pub fn final_mean(&self) -> f64 {
        *self.mean.last().expect("nonempty curve")
    }

    pub fn final_std(&self) -> f64 {
        *self.std.last().expect("nonempty curve")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub horizon: u64,
    pub runs: u64,
    pub base_seed: u64,
    pub checkpoints: Vec<u64>,
    pub curves: Vec<PolicyCurve>,
}

impl BatchResult {
    pub fn curve(&self, policy: PolicyKind) -> Option<&PolicyCurve> {
        self.curves.iter().find(|c| c.policy == policy)
    }

    /// Index of checkpoint `t`, if recorded.
    pub fn checkpoint_index(&self, t: u64) -> Option<usize> {
        self.checkpoints.binary_search(&t).ok()
    }
}

/// Mean and sample standard deviation (zero for a single run), reduced in
/// run order.
fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_batch(
    env: &Environment,
    policies: &[PolicyKind],
    horizon: u64,
    runs: u64,
    base_seed: u64,
) -> Result<BatchResult> {
    run_batch_with(env, policies, horizon, runs, base_seed, CheckpointSchedule::default())
}

/// Runs every policy `runs` times. Runs execute on the current rayon pool;
/// results do not depend on the pool size.
pub fn run_batch_with(
    env: &Environment,
    policies: &[PolicyKind],
    horizon: u64,
    runs: u64,
    base_seed: u64,
    schedule: CheckpointSchedule,
) -> Result<BatchResult> {
    if runs == 0 {
        return Err(Error::InvalidArgument("run count must be at least 1".into()));
    }
    let options = RunOptions {
        schedule,
        record_actions: false,
    };
    let checkpoints = schedule.times(horizon);
    let mut curves = Vec::with_capacity(policies.len());
    for &policy in policies {
        let started = Instant::now();
        let trajectories = (0..runs)
            .into_par_iter()
            .map(|r| {
                let seed = split_seed(base_seed, r, policy.stream_id());
                run_trajectory_with(env, policy, horizon, seed, &options)
            })
            .collect::<Result<Vec<_>>>()?;
        let wall_clock_secs = started.elapsed().as_secs_f64();

        let (mean, std) = (0..checkpoints.len())
            .map(|i| mean_std(trajectories.iter().map(move |tr| tr.cumulative_regret[i])))
            .unzip();
        let arms = env.arm_count();
        let mean_pull_counts = (0..arms)
            .map(|a| {
                trajectories
                    .iter()
                    .map(|tr| tr.pull_counts_final[a] as f64)
                    .sum::<f64>()
                    / runs as f64
            })
            .collect();
        let mean_episode_count = trajectories[0].episode_count.map(|_| {
            trajectories
                .iter()
                .map(|tr| tr.episode_count.unwrap_or(0) as f64)
                .sum::<f64>()
                / runs as f64
        });
        curves.push(PolicyCurve {
            policy,
            mean,
            std,
            final_regrets: trajectories.iter().map(Trajectory::final_regret).collect(),
            mean_pull_counts,
            mean_episode_count,
            wall_clock_secs,
        });
    }
    Ok(BatchResult {
        horizon,
        runs,
        base_seed,
        checkpoints,
        curves,
    })
}

/// `regret(t) / ln t` at every checkpoint with `t >= 2`.
pub fn scaled_regret(checkpoints: &[u64], regret: &[f64]) -> Vec<(u64, f64)> {
    checkpoints
        .iter()
        .zip(regret)
        .filter(|(&t, _)| t >= 2)
        .map(|(&t, &r)| (t, r / (t as f64).ln()))
        .collect()
}

/// One row per (policy, checkpoint): `policy,t,mean_regret,std_regret`.
pub fn write_csv<W: Write>(result: &BatchResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("CSV write failed: {e}"));
    w.write_record(["policy", "t", "mean_regret", "std_regret"])
        .map_err(io)?;
    for curve in &result.curves {
        for (i, t) in result.checkpoints.iter().enumerate() {
            w.write_record([
                curve.policy.name().to_string(),
                t.to_string(),
                curve.mean[i].to_string(),
                curve.std[i].to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("CSV write failed: {e}")))?;
    Ok(())
}

/// One row per (policy, checkpoint >= 2): `policy,t,scaled_mean_regret`.
pub fn write_scaled_csv<W: Write>(result: &BatchResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("CSV write failed: {e}"));
    w.write_record(["policy", "t", "scaled_mean_regret"]).map_err(io)?;
    for curve in &result.curves {
        for (t, v) in scaled_regret(&result.checkpoints, &curve.mean) {
            w.write_record([curve.policy.name().to_string(), t.to_string(), v.to_string()])
                .map_err(io)?;
        }
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("CSV write failed: {e}")))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    pub final_mean_regret: f64,
    pub final_std_regret: f64,
    pub scaled_final_regret: f64,
    pub mean_pull_counts: Vec<f64>,
    pub mean_episode_count: Option<f64>,
    pub wall_clock_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub horizon: u64,
    pub runs: u64,
    pub base_seed: u64,
    pub policies: Vec<PolicySummary>,
}

impl BatchSummary {
    pub fn from_result(result: &BatchResult) -> Self {
        let ln_t = (result.horizon.max(2) as f64).ln();
        Self {
            horizon: result.horizon,
            runs: result.runs,
            base_seed: result.base_seed,
            policies: result
                .curves
                .iter()
                .map(|c| PolicySummary {
                    policy: c.policy,
                    final_mean_regret: c.final_mean(),
                    final_std_regret: c.final_std(),
                    scaled_final_regret: c.final_mean() / ln_t,
                    mean_pull_counts: c.mean_pull_counts.clone(),
                    mean_episode_count: c.mean_episode_count,
                    wall_clock_secs: c.wall_clock_secs,
                })
                .collect(),
        }
    }
}
