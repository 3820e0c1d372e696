//! Bandit instances: a finite parameter set over `L` arms, the reward family
//! tying each (arm, parameter) pair to a distribution on `[0, 1]`, and the
//! environment that samples rewards under the true parameter.
//!
//! Arms are indexed from 0 throughout the library.

mod instance;

pub use instance::{Instance, TrueParameterSpec};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for probability sums and declared-mean consistency.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub means: Vec<f64>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, means: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            means,
        }
    }
}

/// A finite distribution on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.support.is_empty() {
            return Err("empty support".into());
        }
        if self.support.len() != self.probs.len() {
            return Err(format!(
                "support has {} points but {} probabilities",
                self.support.len(),
                self.probs.len()
            ));
        }
        if let Some(x) = self.support.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(format!("support point {x} outside [0, 1]"));
        }
        if let Some(p) = self.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(format!("probability {p} outside [0, 1]"));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
            return Err(format!("probabilities sum to {total}"));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, p) in self.support.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *x;
            }
        }
        // rounding left the cumulative sum just below 1
        let last = self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0);
        self.support[last]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardFamily {
    Bernoulli,
    /// `distributions[parameter][arm]`.
    DiscreteBounded {
        distributions: Vec<Vec<DiscreteDistribution>>,
    },
}

impl RewardFamily {
    pub fn name(&self) -> &'static str {
        match self {
            RewardFamily::Bernoulli => "bernoulli",
            RewardFamily::DiscreteBounded { .. } => "discrete",
        }
    }
}

/// Default tie tolerance for exact decimal input.
pub const EXACT_TIE_EPSILON: f64 = 0.0;
/// Suggested tie tolerance for means produced by arithmetic.
pub const COMPUTED_TIE_EPSILON: f64 = 1e-9;

/// The finite hypothesis class: every parameter fixes the mean (and law) of
/// every arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    arm_count: usize,
    parameters: Vec<Parameter>,
    reward_family: RewardFamily,
    tie_epsilon: f64,
}

impl ParameterSet {
    pub fn new(
        arm_count: usize,
        parameters: Vec<Parameter>,
        reward_family: RewardFamily,
        tie_epsilon: f64,
    ) -> Result<Self> {
        if arm_count < 2 {
            return Err(Error::TooFewArms(arm_count));
        }
        if parameters.is_empty() {
            return Err(Error::EmptyParameterSet);
        }
        if !tie_epsilon.is_finite() || tie_epsilon < 0.0 {
            return Err(Error::InvalidTieEpsilon(tie_epsilon));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &parameters {
            if !seen.insert(p.name.as_str()) {
                return Err(Error::DuplicateName(p.name.clone()));
            }
            check_means(&p.name, &p.means, arm_count)?;
        }
        if let RewardFamily::DiscreteBounded { distributions } = &reward_family {
            if distributions.len() != parameters.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} distribution rows for {} parameters",
                    distributions.len(),
                    parameters.len()
                )));
            }
            for (p, row) in parameters.iter().zip(distributions) {
                if row.len() != arm_count {
                    return Err(Error::WrongLength {
                        name: p.name.clone(),
                        got: row.len(),
                        expected: arm_count,
                    });
                }
                for (arm, (dist, mean)) in row.iter().zip(&p.means).enumerate() {
                    dist.validate().map_err(|reason| Error::InvalidDistribution {
                        name: p.name.clone(),
                        arm,
                        reason,
                    })?;
                    let m = dist.mean();
                    if (m - mean).abs() > DISTRIBUTION_TOLERANCE {
                        return Err(Error::InvalidDistribution {
                            name: p.name.clone(),
                            arm,
                            reason: format!("distribution mean {m} differs from declared mean {mean}"),
                        });
                    }
                }
            }
        }
        Ok(Self {
            arm_count,
            parameters,
            reward_family,
            tie_epsilon,
        })
    }

    /// Bernoulli parameter set with exact tie tolerance.
    pub fn bernoulli(arm_count: usize, parameters: Vec<Parameter>) -> Result<Self> {
        Self::new(arm_count, parameters, RewardFamily::Bernoulli, EXACT_TIE_EPSILON)
    }

    /// Bernoulli parameter set from bare mean vectors, named `theta1`, `theta2`, ...
    pub fn from_means(means: &[Vec<f64>]) -> Result<Self> {
        let arm_count = means.first().map_or(0, Vec::len);
        let parameters = means
            .iter()
            .enumerate()
            .map(|(j, m)| Parameter::new(format!("theta{}", j + 1), m.clone()))
            .collect();
        Self::bernoulli(arm_count, parameters)
    }

    pub fn with_tie_epsilon(mut self, tie_epsilon: f64) -> Result<Self> {
        if !tie_epsilon.is_finite() || tie_epsilon < 0.0 {
            return Err(Error::InvalidTieEpsilon(tie_epsilon));
        }
        self.tie_epsilon = tie_epsilon;
        Ok(self)
    }

    pub fn arm_count(&self) -> usize {
        self.arm_count
    }

    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn parameter(&self, index: usize) -> Result<&Parameter> {
        self.parameters.get(index).ok_or(Error::ParameterOutOfRange {
            index,
            count: self.parameters.len(),
        })
    }

    pub fn means(&self, index: usize) -> &[f64] {
        &self.parameters[index].means
    }

    pub fn mean(&self, arm: usize, index: usize) -> f64 {
        self.parameters[index].means[arm]
    }

    pub fn reward_family(&self) -> &RewardFamily {
        &self.reward_family
    }

    pub fn tie_epsilon(&self) -> f64 {
        self.tie_epsilon
    }

    /// Mean equality under the set's tie tolerance.
    pub fn means_equal(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tie_epsilon
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.parameters
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    /// First parameter whose means match `means` under the tie tolerance.
    pub fn index_of_means(&self, means: &[f64]) -> Result<usize> {
        self.parameters
            .iter()
            .position(|p| {
                p.means.len() == means.len() && p.means.iter().zip(means).all(|(a, b)| self.means_equal(*a, *b))
            })
            .ok_or_else(|| Error::UnknownParameter(format!("{means:?}")))
    }

    pub(crate) fn discrete(&self, arm: usize, index: usize) -> Option<&DiscreteDistribution> {
        match &self.reward_family {
            RewardFamily::Bernoulli => None,
            RewardFamily::DiscreteBounded { distributions } => Some(&distributions[index][arm]),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, arm: usize, index: usize, rng: &mut R) -> f64 {
        match &self.reward_family {
            RewardFamily::Bernoulli => {
                let u: f64 = rng.random();
                if u < self.parameters[index].means[arm] {
                    1.0
                } else {
                    0.0
                }
            }
            RewardFamily::DiscreteBounded { distributions } => distributions[index][arm].sample(rng),
        }
    }
}

fn check_means(name: &str, means: &[f64], arm_count: usize) -> Result<()> {
    if means.len() != arm_count {
        return Err(Error::WrongLength {
            name: name.to_string(),
            got: means.len(),
            expected: arm_count,
        });
    }
    if let Some((arm, &value)) = means.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::MeanOutOfRange {
            name: name.to_string(),
            arm,
            value,
        });
    }
    Ok(())
}

/// How to enumerate a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParameterGenerator {
    Explicit {
        list: Vec<Parameter>,
    },
    /// All orderings of `base`, in lexicographic order of the position
    /// permutation.
    Permutations {
        base: Vec<f64>,
    },
    /// `values^arms`, first arm varying slowest.
    Product {
        values: Vec<f64>,
        arms: usize,
    },
}

impl ParameterGenerator {
    pub fn arm_count(&self) -> usize {
        match self {
            ParameterGenerator::Explicit { list } => list.first().map_or(0, |p| p.means.len()),
            ParameterGenerator::Permutations { base } => base.len(),
            ParameterGenerator::Product { arms, .. } => *arms,
        }
    }

    /// Enumerates the generator into named parameters.
    pub fn enumerate(&self) -> Result<Vec<Parameter>> {
        match self {
            ParameterGenerator::Explicit { list } => Ok(list.clone()),
            ParameterGenerator::Permutations { base } => {
                if base.is_empty() {
                    return Err(Error::EmptyValueSet);
                }
                let n = base.len();
                Ok((0..n)
                    .permutations(n)
                    .enumerate()
                    .map(|(j, order)| Parameter::new(format!("perm_{j:03}"), order.iter().map(|&i| base[i]).collect()))
                    .collect())
            }
            ParameterGenerator::Product { values, arms } => {
                if values.is_empty() {
                    return Err(Error::EmptyValueSet);
                }
                if *arms == 0 {
                    return Err(Error::TooFewArms(0));
                }
                Ok(std::iter::repeat_n(values.iter().copied(), *arms)
                    .multi_cartesian_product()
                    .enumerate()
                    .map(|(j, means)| Parameter::new(format!("prod_{j:04}"), means))
                    .collect())
            }
        }
    }
}

/// Enumerates `generator` into a Bernoulli parameter set.
pub fn build_parameter_set(generator: &ParameterGenerator) -> Result<ParameterSet> {
    let arm_count = generator.arm_count();
    let parameters = generator.enumerate()?;
    ParameterSet::bernoulli(arm_count, parameters)
}

/// A parameter set with a designated true parameter and a reward seed.
#[derive(Debug, Clone)]
pub struct Environment {
    params: ParameterSet,
    true_parameter: usize,
    rng_seed: u64,
}

impl Environment {
    pub fn new(params: ParameterSet, true_parameter: usize, rng_seed: u64) -> Result<Self> {
        params.parameter(true_parameter)?;
        Ok(Self {
            params,
            true_parameter,
            rng_seed,
        })
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn true_parameter(&self) -> usize {
        self.true_parameter
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn arm_count(&self) -> usize {
        self.params.arm_count
    }

    pub fn true_means(&self) -> &[f64] {
        self.params.means(self.true_parameter)
    }

    /// Fresh reward stream for this environment's seed.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.rng_seed)
    }

    /// One draw from arm `arm` under the true parameter.
    pub fn sample_reward<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Result<f64> {
        if arm >= self.params.arm_count {
            return Err(Error::ArmOutOfRange {
                arm,
                arms: self.params.arm_count,
            });
        }
        Ok(self.params.draw(arm, self.true_parameter, rng))
    }

    pub(crate) fn sample_unchecked<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        self.params.draw(arm, self.true_parameter, rng)
    }
}
