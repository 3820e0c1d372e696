//! Sequential arm-selection policies: FP-UCB over a known finite parameter
//! set, and the uninformed UCB1 and Beta-Bernoulli Thompson baselines.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::analysis::{best_arms, candidate_arms};
use crate::error::{Error, Result};
use crate::model::ParameterSet;

/// A policy chooses an arm, then observes that arm's reward.
pub trait Policy: Send {
    fn kind(&self) -> PolicyKind;

    fn select(&mut self, rng: &mut dyn rand::RngCore) -> usize;

    fn observe(&mut self, arm: usize, reward: f64, rng: &mut dyn rand::RngCore);

    fn pull_counts(&self) -> &[u64];

    /// Completed or started episodes, for episodic policies.
    fn episode_count(&self) -> Option<u64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "fp-ucb")]
    FpUcb,
    #[serde(rename = "ucb1")]
    Ucb1,
    #[serde(rename = "thompson")]
    Thompson,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 3] = [PolicyKind::FpUcb, PolicyKind::Ucb1, PolicyKind::Thompson];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::FpUcb => "fp-ucb",
            PolicyKind::Ucb1 => "ucb1",
            PolicyKind::Thompson => "thompson",
        }
    }

    /// Stable index used for seed derivation; never reorder.
    pub fn stream_id(self) -> u64 {
        match self {
            PolicyKind::FpUcb => 0,
            PolicyKind::Ucb1 => 1,
            PolicyKind::Thompson => 2,
        }
    }

    pub fn build(self, params: &ParameterSet, horizon: u64) -> Box<dyn Policy> {
        match self {
            PolicyKind::FpUcb => Box::new(FpUcb::new(params, horizon)),
            PolicyKind::Ucb1 => Box::new(Ucb1::new(params.arm_count())),
            PolicyKind::Thompson => Box::new(Thompson::new(params.arm_count())),
        }
    }

    /// Pulls needed before the policy leaves its initialization phase.
    pub fn warmup(self, params: &ParameterSet) -> usize {
        match self {
            PolicyKind::FpUcb => candidate_arms(params).len(),
            PolicyKind::Ucb1 | PolicyKind::Thompson => params.arm_count(),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fp-ucb" | "fpucb" => Ok(PolicyKind::FpUcb),
            "ucb1" | "ucb" => Ok(PolicyKind::Ucb1),
            "thompson" | "ts" => Ok(PolicyKind::Thompson),
            _ => Err(Error::UnknownPolicy(s.to_string())),
        }
    }
}

/// Parses a comma-separated policy list, keeping the first occurrence of each.
pub fn parse_policy_list(s: &str) -> Result<Vec<PolicyKind>> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let kind: PolicyKind = part.parse()?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(Error::UnknownPolicy(s.to_string()));
    }
    Ok(out)
}

pub fn empirical_mean(reward_sum: f64, count: u64) -> Result<f64> {
    if count == 0 {
        return Err(Error::InvalidArgument("empirical mean of zero samples".into()));
    }
    Ok(reward_sum / count as f64)
}

/// Optimal arms of all parameters consistent with the empirical means of
/// every candidate arm at radius `sqrt(3 ln k / n_i)`. Sorted, deduplicated,
/// possibly empty.
pub fn fpucb_episode_set(
    params: &ParameterSet,
    candidates: &[usize],
    pull_counts: &[u64],
    reward_sums: &[f64],
    episode: u64,
) -> Result<Vec<usize>> {
    if episode == 0 {
        return Err(Error::InvalidArgument("episodes are numbered from 1".into()));
    }
    if let Some(&arm) = candidates.iter().find(|&&a| pull_counts[a] == 0) {
        return Err(Error::UnpulledArm(arm));
    }
    let log_k = (episode as f64).ln();
    let best = best_arms(params);
    let mut out: Vec<usize> = (0..params.len())
        .filter(|&j| {
            candidates.iter().all(|&i| {
                let n = pull_counts[i];
                let radius = (3.0 * log_k / n as f64).sqrt();
                (reward_sums[i] / n as f64 - params.mean(i, j)).abs() <= radius
            })
        })
        .map(|j| best[j])
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// FP-UCB: plays each candidate arm once, then runs episodes. Episode `k`
/// collects the optimal arms of every parameter consistent with the current
/// empirical means and plays each once in ascending order, or plays all
/// candidates when no parameter is consistent.
#[derive(Debug, Clone)]
pub struct FpUcb {
    candidates: Vec<usize>,
    /// Per parameter: optimal arm.
    best: Vec<usize>,
    /// `table[j * |A| + c]`: mean of candidate `c` under parameter `j`.
    table: Vec<f64>,
    pull_counts: Vec<u64>,
    reward_sums: Vec<f64>,
    /// Next episode number `k`.
    episode: u64,
    episode_start: u64,
    pending: VecDeque<usize>,
    steps: u64,
    horizon: u64,
    last_arm: Option<usize>,
    episode_log: Option<Vec<EpisodeRecord>>,
    radius: Vec<f64>,
    in_set: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    /// Steps completed before the episode's first play (`t_k`).
    pub start: u64,
    pub size: usize,
    pub fallback: bool,
}

impl FpUcb {
    pub fn new(params: &ParameterSet, horizon: u64) -> Self {
        let candidates = candidate_arms(params);
        let best = best_arms(params);
        let table = params
            .parameters()
            .iter()
            .flat_map(|p| candidates.iter().map(move |&i| p.means[i]))
            .collect();
        let arms = params.arm_count();
        Self {
            radius: vec![0.0; candidates.len()],
            candidates,
            best,
            table,
            pull_counts: vec![0; arms],
            reward_sums: vec![0.0; arms],
            episode: 1,
            episode_start: 0,
            pending: VecDeque::new(),
            steps: 0,
            horizon,
            last_arm: None,
            episode_log: None,
            in_set: vec![false; arms],
        }
    }

    /// Keeps a record of every episode boundary.
    pub fn with_episode_log(mut self) -> Self {
        self.episode_log = Some(Vec::new());
        self
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn reward_sums(&self) -> &[f64] {
        &self.reward_sums
    }

    /// Episodes computed so far (`K_T` once the horizon is reached).
    pub fn episodes(&self) -> u64 {
        self.episode - 1
    }

    pub fn current_episode_start(&self) -> u64 {
        self.episode_start
    }

    pub fn pending(&self) -> impl Iterator<Item = usize> + '_ {
        self.pending.iter().copied()
    }

    pub fn episode_log(&self) -> Option<&[EpisodeRecord]> {
        self.episode_log.as_deref()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Feeds the reward of the previous arm (absent at the first step) and
    /// returns the arm to play next.
    pub fn step(&mut self, last_reward: Option<f64>) -> Result<usize> {
        match (self.last_arm.take(), last_reward) {
            (Some(arm), Some(r)) => self.record(arm, r),
            (None, None) => {}
            (Some(_), None) => return Err(Error::InvalidArgument("missing reward for the previous arm".into())),
            (None, Some(_)) => return Err(Error::InvalidArgument("reward given before any arm was played".into())),
        }
        if self.steps >= self.horizon {
            return Err(Error::HorizonExceeded(self.horizon));
        }
        let arm = self.next_arm();
        self.last_arm = Some(arm);
        Ok(arm)
    }

    /// The episode set `A_k` for episode number `episode` under the current
    /// statistics.
    pub fn episode_set(&mut self, episode: u64) -> Result<Vec<usize>> {
        if let Some(&arm) = self.candidates.iter().find(|&&a| self.pull_counts[a] == 0) {
            return Err(Error::UnpulledArm(arm));
        }
        if episode == 0 {
            return Err(Error::InvalidArgument("episodes are numbered from 1".into()));
        }
        self.fill_episode_set(episode);
        Ok(self.collect_episode_set())
    }

    /// Replaces the sufficient statistics; intended for tests and replays.
    pub fn set_statistics(&mut self, pull_counts: &[u64], reward_sums: &[f64]) {
        self.pull_counts.copy_from_slice(pull_counts);
        self.reward_sums.copy_from_slice(reward_sums);
    }

    fn record(&mut self, arm: usize, reward: f64) {
        self.pull_counts[arm] += 1;
        self.reward_sums[arm] += reward;
        self.steps += 1;
    }

    fn fill_episode_set(&mut self, episode: u64) {
        let log_k = (episode as f64).ln();
        for (c, &i) in self.candidates.iter().enumerate() {
            let n = self.pull_counts[i] as f64;
            self.radius[c] = (3.0 * log_k / n).sqrt();
        }
        self.in_set.iter_mut().for_each(|b| *b = false);
        let width = self.candidates.len();
        for (j, row) in self.table.chunks_exact(width).enumerate() {
            if self.in_set[self.best[j]] {
                continue;
            }
            let consistent = self.candidates.iter().enumerate().all(|(c, &i)| {
                let mean = self.reward_sums[i] / self.pull_counts[i] as f64;
                (mean - row[c]).abs() <= self.radius[c]
            });
            if consistent {
                self.in_set[self.best[j]] = true;
            }
        }
    }

    fn collect_episode_set(&self) -> Vec<usize> {
        self.in_set
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect()
    }

    fn next_arm(&mut self) -> usize {
        let init = self.candidates.len() as u64;
        if self.steps < init {
            return self.candidates[self.steps as usize];
        }
        if self.pending.is_empty() {
            self.episode_start = self.steps;
            self.fill_episode_set(self.episode);
            let before = self.pending.len();
            self.pending
                .extend(self.in_set.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i));
            let fallback = self.pending.len() == before;
            if fallback {
                self.pending.extend(self.candidates.iter().copied());
            }
            if let Some(log) = &mut self.episode_log {
                log.push(EpisodeRecord {
                    episode: self.episode,
                    start: self.episode_start,
                    size: self.pending.len(),
                    fallback,
                });
            }
            self.episode += 1;
        }
        self.pending.pop_front().expect("episode queue is nonempty")
    }
}

impl Policy for FpUcb {
    fn kind(&self) -> PolicyKind {
        PolicyKind::FpUcb
    }

    fn select(&mut self, _rng: &mut dyn rand::RngCore) -> usize {
        let arm = self.next_arm();
        self.last_arm = Some(arm);
        arm
    }

    fn observe(&mut self, arm: usize, reward: f64, _rng: &mut dyn rand::RngCore) {
        self.last_arm = None;
        self.record(arm, reward);
    }

    fn pull_counts(&self) -> &[u64] {
        &self.pull_counts
    }

    fn episode_count(&self) -> Option<u64> {
        Some(self.episodes())
    }
}

/// UCB1 over all arms.
#[derive(Debug, Clone)]
pub struct Ucb1 {
    pull_counts: Vec<u64>,
    reward_sums: Vec<f64>,
    total: u64,
}

impl Ucb1 {
    pub fn new(arms: usize) -> Self {
        Self {
            pull_counts: vec![0; arms],
            reward_sums: vec![0.0; arms],
            total: 0,
        }
    }

    pub fn from_statistics(pull_counts: Vec<u64>, reward_sums: Vec<f64>) -> Self {
        let total = pull_counts.iter().sum();
        Self {
            pull_counts,
            reward_sums,
            total,
        }
    }

    /// `mean_i + sqrt(2 ln t / n_i)`.
    pub fn index(&self, arm: usize, t: u64) -> f64 {
        let n = self.pull_counts[arm] as f64;
        self.reward_sums[arm] / n + (2.0 * (t as f64).ln() / n).sqrt()
    }

    /// Highest-index arm at time `t`, smallest arm on ties.
    pub fn select_at(&self, t: u64) -> Result<usize> {
        let arms = self.pull_counts.len();
        if t < arms as u64 {
            return Err(Error::InvalidArgument(format!("UCB1 needs t >= {arms}, got {t}")));
        }
        if let Some(arm) = self.pull_counts.iter().position(|&n| n == 0) {
            return Err(Error::UnpulledArm(arm));
        }
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for arm in 0..arms {
            let v = self.index(arm, t);
            if v > best_index {
                best = arm;
                best_index = v;
            }
        }
        Ok(best)
    }
}

impl Policy for Ucb1 {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Ucb1
    }

    fn select(&mut self, _rng: &mut dyn rand::RngCore) -> usize {
        if let Some(arm) = self.pull_counts.iter().position(|&n| n == 0) {
            return arm;
        }
        self.select_at(self.total).expect("all arms initialized")
    }

    fn observe(&mut self, arm: usize, reward: f64, _rng: &mut dyn rand::RngCore) {
        self.pull_counts[arm] += 1;
        self.reward_sums[arm] += reward;
        self.total += 1;
    }

    fn pull_counts(&self) -> &[u64] {
        &self.pull_counts
    }
}

/// Thompson sampling with independent Beta(1, 1) priors. Rewards strictly
/// inside (0, 1) are binarized by a Bernoulli draw with that mean before the
/// conjugate update.
#[derive(Debug, Clone)]
pub struct Thompson {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    pull_counts: Vec<u64>,
}

impl Thompson {
    pub fn new(arms: usize) -> Self {
        Self {
            alpha: vec![1.0; arms],
            beta: vec![1.0; arms],
            pull_counts: vec![0; arms],
        }
    }

    pub fn with_posteriors(alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        let arms = alpha.len();
        assert_eq!(arms, beta.len());
        Self {
            alpha,
            beta,
            pull_counts: vec![0; arms],
        }
    }

    pub fn posterior(&self, arm: usize) -> (f64, f64) {
        (self.alpha[arm], self.beta[arm])
    }

    /// Conjugate update with a binary reward.
    pub fn update(&mut self, arm: usize, success: bool) {
        if success {
            self.alpha[arm] += 1.0;
        } else {
            self.beta[arm] += 1.0;
        }
        self.pull_counts[arm] += 1;
    }

    pub fn select_with<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut best = 0;
        let mut best_draw = f64::NEG_INFINITY;
        for arm in 0..self.alpha.len() {
            let draw = Beta::new(self.alpha[arm], self.beta[arm])
                .expect("posterior parameters are positive")
                .sample(rng);
            if draw > best_draw {
                best = arm;
                best_draw = draw;
            }
        }
        best
    }
}

impl Policy for Thompson {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Thompson
    }

    fn select(&mut self, rng: &mut dyn rand::RngCore) -> usize {
        self.select_with(rng)
    }

    fn observe(&mut self, arm: usize, reward: f64, rng: &mut dyn rand::RngCore) {
        let success = if reward >= 1.0 {
            true
        } else if reward <= 0.0 {
            false
        } else {
            rng.random::<f64>() < reward
        };
        self.update(arm, success);
    }

    fn pull_counts(&self) -> &[u64] {
        &self.pull_counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_arm() -> ParameterSet {
        ParameterSet::from_means(&[vec![0.9, 0.5], vec![0.2, 0.5]]).unwrap()
    }

    #[test]
    fn empirical_mean_examples() {
        assert_eq!(empirical_mean(3.0, 4).unwrap(), 0.75);
        assert_eq!(empirical_mean(0.0, 7).unwrap(), 0.0);
        assert_eq!(empirical_mean(5.0, 5).unwrap(), 1.0);
        assert!(empirical_mean(1.0, 0).is_err());
    }

    #[test]
    fn episode_set_examples() {
        let set = two_arm();
        // radius sqrt(3 ln 100 / 50) = 0.52565
        let a = fpucb_episode_set(&set, &[0, 1], &[50, 50], &[45.0, 25.0], 100).unwrap();
        assert_eq!(a, vec![0]);
        let b = fpucb_episode_set(&set, &[0, 1], &[50, 50], &[27.5, 25.0], 100).unwrap();
        assert_eq!(b, vec![0, 1]);
        let c = fpucb_episode_set(&set, &[0, 1], &[3, 3], &[2.0, 1.0], 1).unwrap();
        assert!(c.is_empty());
        assert!(matches!(
            fpucb_episode_set(&set, &[0, 1], &[0, 3], &[0.0, 1.0], 5),
            Err(Error::UnpulledArm(0))
        ));
    }

    #[test]
    fn stateful_episode_set_matches_free_function() {
        let set = two_arm();
        let mut p = FpUcb::new(&set, 1000);
        p.set_statistics(&[50, 50], &[27.5, 25.0]);
        assert_eq!(p.episode_set(100).unwrap(), vec![0, 1]);
        p.set_statistics(&[50, 50], &[45.0, 25.0]);
        assert_eq!(p.episode_set(100).unwrap(), vec![0]);
        p.set_statistics(&[0, 50], &[0.0, 25.0]);
        assert!(p.episode_set(100).is_err());
    }

    #[test]
    fn initialization_plays_candidates_in_order() {
        let set = ParameterSet::from_means(&[
            vec![0.1, 0.2, 0.9, 0.3],
            vec![0.8, 0.2, 0.1, 0.3],
            vec![0.1, 0.2, 0.3, 0.35],
        ])
        .unwrap();
        let mut p = FpUcb::new(&set, 10);
        assert_eq!(p.candidates(), &[0, 2, 3]);
        assert_eq!(p.step(None).unwrap(), 0);
        assert_eq!(p.step(Some(1.0)).unwrap(), 2);
        assert_eq!(p.step(Some(0.0)).unwrap(), 3);
    }

    #[test]
    fn singleton_candidate_set() {
        let set = ParameterSet::from_means(&[vec![0.1, 0.7, 0.2], vec![0.3, 0.9, 0.2]]).unwrap();
        let mut p = FpUcb::new(&set, 50);
        let mut reward = None;
        for _ in 0..50 {
            assert_eq!(p.step(reward).unwrap(), 1);
            reward = Some(1.0);
        }
        assert!(matches!(p.step(reward), Err(Error::HorizonExceeded(50))));
    }

    #[test]
    fn first_episode_falls_back_without_exact_match() {
        let set = two_arm();
        let mut p = FpUcb::new(&set, 10).with_episode_log();
        p.step(None).unwrap();
        p.step(Some(1.0)).unwrap();
        // means (1.0, 0.0) match neither parameter at radius 0
        let arm = p.step(Some(0.0)).unwrap();
        assert_eq!(arm, 0);
        let log = p.episode_log().unwrap();
        assert_eq!(log.len(), 1);
        assert!(log[0].fallback);
        assert_eq!(log[0].size, 2);
        assert_eq!(log[0].start, 2);
    }

    #[test]
    fn truth_is_consistent_with_exact_means() {
        let set =
            ParameterSet::from_means(&[vec![0.5, 0.25, 0.75], vec![0.5, 0.5, 0.25], vec![0.25, 1.0, 0.5]]).unwrap();
        let mut p = FpUcb::new(&set, 100);
        for truth in 0..set.len() {
            let counts = [4u64, 4, 4];
            let sums: Vec<f64> = set.means(truth).iter().map(|m| m * 4.0).collect();
            p.set_statistics(&counts, &sums);
            let star = crate::analysis::best_arm(&set, truth).unwrap();
            for k in 2..20 {
                assert!(p.episode_set(k).unwrap().contains(&star));
            }
        }
    }

    #[test]
    fn ucb1_examples() {
        let u = Ucb1::from_statistics(vec![10, 10], vec![9.0, 5.0]);
        assert_abs_diff_eq!(u.index(0, 100), 0.9 + 0.9597, epsilon = 1e-4);
        assert_eq!(u.select_at(100).unwrap(), 0);
        let u = Ucb1::from_statistics(vec![1, 100], vec![0.0, 60.0]);
        assert_abs_diff_eq!(u.index(0, 101), 3.0381, epsilon = 1e-4);
        assert_abs_diff_eq!(u.index(1, 101), 0.9038, epsilon = 1e-4);
        assert_eq!(u.select_at(101).unwrap(), 0);
        let u = Ucb1::from_statistics(vec![5, 20], vec![2.5, 10.0]);
        assert_eq!(u.select_at(25).unwrap(), 0);
        assert!(u.select_at(1).is_err());
    }

    #[test]
    fn ucb1_initializes_every_arm() {
        let mut u = Ucb1::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for expected in 0..3 {
            let arm = u.select(&mut rng);
            assert_eq!(arm, expected);
            u.observe(arm, 0.0, &mut rng);
        }
    }

    #[test]
    fn thompson_uniform_priors_are_symmetric() {
        let t = Thompson::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let first = (0..n).filter(|_| t.select_with(&mut rng) == 0).count();
        let frac = first as f64 / n as f64;
        // 4 sigma at p = 1/2
        assert!((frac - 0.5).abs() < 4.0 * (0.25f64 / n as f64).sqrt(), "{frac}");
    }

    #[test]
    fn thompson_confident_posterior() {
        let t = Thompson::with_posteriors(vec![1000.0, 1.0], vec![1.0, 1000.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let first = (0..n).filter(|_| t.select_with(&mut rng) == 0).count();
        assert!(first as f64 / n as f64 > 0.999);
    }

    #[test]
    fn thompson_conjugate_update() {
        let mut t = Thompson::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        t.observe(0, 1.0, &mut rng);
        assert_eq!(t.posterior(0), (2.0, 1.0));
        t.observe(1, 0.0, &mut rng);
        assert_eq!(t.posterior(1), (1.0, 2.0));
        t.observe(1, 0.5, &mut rng);
        let (a, b) = t.posterior(1);
        assert_eq!(a + b, 4.0);
        assert_eq!(t.pull_counts(), &[1, 2]);
    }

    #[test]
    fn policy_names_round_trip() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        }
        assert!(matches!("epsilon".parse::<PolicyKind>(), Err(Error::UnknownPolicy(_))));
        assert_eq!(
            parse_policy_list("fp-ucb,ucb1,fp-ucb").unwrap(),
            vec![PolicyKind::FpUcb, PolicyKind::Ucb1]
        );
        assert!(parse_policy_list("").is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
            (2usize..5).prop_flat_map(|arms| {
                (
                    prop::collection::vec(
                        prop::collection::vec((0u8..=20).prop_map(|v| v as f64 * 0.05), arms),
                        1..6,
                    ),
                    0usize..6,
                )
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn fpucb_bookkeeping((means, truth) in instance(), seed in any::<u64>(), horizon in 1u64..400) {
                let set = ParameterSet::from_means(&means).unwrap();
                let truth = truth % set.len();
                let env = crate::model::Environment::new(set.clone(), truth, seed).unwrap();
                let mut rng = env.rng();
                let mut p = FpUcb::new(&set, horizon).with_episode_log();
                let a = p.candidates().to_vec();
                let mut reward = None;
                let mut plays = Vec::new();
                for _ in 0..horizon {
                    let arm = p.step(reward).unwrap();
                    prop_assert!(a.contains(&arm));
                    plays.push(arm);
                    reward = Some(env.sample_reward(arm, &mut rng).unwrap());
                }
                p.observe(*plays.last().unwrap(), reward.unwrap(), &mut rng);
                prop_assert_eq!(p.pull_counts().iter().sum::<u64>(), horizon);

                let log = p.episode_log().unwrap();
                prop_assert!(log.len() as u64 <= horizon);
                // episodes tile the post-initialization steps, the last one possibly truncated
                let init = (a.len() as u64).min(horizon);
                let mut cursor = init;
                for (idx, rec) in log.iter().enumerate() {
                    prop_assert_eq!(rec.episode, idx as u64 + 1);
                    prop_assert_eq!(rec.start, cursor);
                    let played = &plays[rec.start as usize..(rec.start as usize + rec.size).min(horizon as usize)];
                    let mut sorted = played.to_vec();
                    sorted.sort_unstable();
                    sorted.dedup();
                    prop_assert_eq!(sorted.len(), played.len());
                    prop_assert!(played.windows(2).all(|w| w[0] < w[1]));
                    if rec.fallback {
                        prop_assert_eq!(rec.size, a.len());
                    }
                    cursor += rec.size as u64;
                }
                prop_assert!(cursor >= horizon);
                if let Some(last) = log.last() {
                    prop_assert!(last.start < horizon);
                }
            }
        }
    }
}
