//! JSON instance files.
//!
//! ```json
//! { "arms": 2, "reward_family": "bernoulli",
//!   "parameters": {"type": "explicit", "list": [{"name": "theta1", "means": [0.9, 0.5]},
//!                                               {"name": "theta2", "means": [0.2, 0.5]}]},
//!   "true_parameter": "theta1", "tie_epsilon": 0.0 }
//! ```
//!
//! `parameters` may also be `{"type": "permutations", "base": [...]}` or
//! `{"type": "product", "values": [...], "arms": 4}`. `true_parameter` is a
//! parameter name or a means vector. The `discrete` family requires an
//! explicit list whose entries carry one `{"support", "probs"}` object per arm
//! under `distributions`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DiscreteDistribution, Parameter, ParameterGenerator, ParameterSet, RewardFamily};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrueParameterSpec {
    Name(String),
    Means(Vec<f64>),
}

impl TrueParameterSpec {
    pub fn resolve(&self, params: &ParameterSet) -> Result<usize> {
        match self {
            TrueParameterSpec::Name(name) => params.index_of(name),
            TrueParameterSpec::Means(means) => params.index_of_means(means),
        }
    }
}

impl std::str::FromStr for TrueParameterSpec {
    type Err = Error;

    /// A parameter name, or a bracketed means vector such as `[0.4,0.3,0.2,0.2]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('[') {
            Ok(TrueParameterSpec::Means(serde_json::from_str(s)?))
        } else {
            Ok(TrueParameterSpec::Name(s.to_string()))
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FamilyName {
    Bernoulli,
    #[serde(alias = "discrete_bounded")]
    Discrete,
}

#[derive(Debug, Deserialize)]
struct RawParameter {
    name: String,
    means: Vec<f64>,
    #[serde(default)]
    distributions: Option<Vec<DiscreteDistribution>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RawGenerator {
    Explicit { list: Vec<RawParameter> },
    Permutations { base: Vec<f64> },
    Product { values: Vec<f64>, arms: usize },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    arms: usize,
    reward_family: FamilyName,
    parameters: RawGenerator,
    #[serde(default)]
    true_parameter: Option<TrueParameterSpec>,
    #[serde(default)]
    tie_epsilon: Option<f64>,
}

/// A parsed instance file.
#[derive(Debug, Clone)]
pub struct Instance {
    pub params: ParameterSet,
    pub true_parameter: Option<usize>,
}

impl Instance {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text)?;
        raw.build()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// The true parameter index, with `spec` taking precedence over the file.
    pub fn resolve_true(&self, spec: Option<&TrueParameterSpec>) -> Result<usize> {
        match (spec, self.true_parameter) {
            (Some(spec), _) => spec.resolve(&self.params),
            (None, Some(index)) => Ok(index),
            (None, None) => Err(Error::InvalidArgument(
                "no true parameter given in the instance file or on the command line".into(),
            )),
        }
    }
}

impl RawInstance {
    fn build(self) -> Result<Instance> {
        let tie_epsilon = self.tie_epsilon.unwrap_or(super::EXACT_TIE_EPSILON);
        let (parameters, distributions) = match self.parameters {
            RawGenerator::Explicit { list } => {
                let mut params = Vec::with_capacity(list.len());
                let mut dists = Vec::with_capacity(list.len());
                for p in list {
                    dists.push(p.distributions);
                    params.push(Parameter::new(p.name, p.means));
                }
                (params, Some(dists))
            }
            RawGenerator::Permutations { base } => (ParameterGenerator::Permutations { base }.enumerate()?, None),
            RawGenerator::Product { values, arms } => {
                if arms != self.arms {
                    return Err(Error::InvalidArgument(format!(
                        "product generator spans {arms} arms but the instance declares {}",
                        self.arms
                    )));
                }
                (ParameterGenerator::Product { values, arms }.enumerate()?, None)
            }
        };
        let family = match self.reward_family {
            FamilyName::Bernoulli => RewardFamily::Bernoulli,
            FamilyName::Discrete => {
                let rows = distributions
                    .ok_or_else(|| {
                        Error::InvalidArgument("the discrete family requires an explicit parameter list".into())
                    })?
                    .into_iter()
                    .zip(&parameters)
                    .map(|(row, p)| {
                        row.ok_or_else(|| Error::InvalidDistribution {
                            name: p.name.clone(),
                            arm: 0,
                            reason: "missing `distributions`".into(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                RewardFamily::DiscreteBounded { distributions: rows }
            }
        };
        let params = ParameterSet::new(self.arms, parameters, family, tie_epsilon)?;
        let true_parameter = self.true_parameter.map(|spec| spec.resolve(&params)).transpose()?;
        Ok(Instance { params, true_parameter })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_ARM: &str = r#"{ "arms": 2, "reward_family": "bernoulli",
      "parameters": {"type": "explicit", "list": [{"name":"theta1","means":[0.9,0.5]},{"name":"theta2","means":[0.2,0.5]}]},
      "true_parameter": "theta1", "tie_epsilon": 0.0 }"#;

    #[test]
    fn parses_two_arm_instance() {
        let inst = Instance::from_json_str(TWO_ARM).unwrap();
        assert_eq!(inst.params.len(), 2);
        assert_eq!(inst.true_parameter, Some(0));
        let other = TrueParameterSpec::Name("theta2".into());
        assert_eq!(inst.resolve_true(Some(&other)).unwrap(), 1);
    }

    #[test]
    fn parses_product_with_means_true_parameter() {
        let text = r#"{"arms": 4, "reward_family": "bernoulli",
            "parameters": {"type": "product", "values": [0.6, 0.4, 0.3, 0.2], "arms": 4},
            "true_parameter": [0.4, 0.3, 0.2, 0.2]}"#;
        let inst = Instance::from_json_str(text).unwrap();
        assert_eq!(inst.params.len(), 256);
        assert_eq!(inst.true_parameter, Some(111));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = Instance::from_json_str("{\n  \"arms\": 2,\n  oops\n}").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_instance_is_classified() {
        let text = r#"{"arms": 2, "reward_family": "bernoulli",
            "parameters": {"type": "explicit", "list": [{"name":"a","means":[0.9,1.5]}]}}"#;
        let err = Instance::from_json_str(text).unwrap_err();
        assert!(err.is_invalid_instance(), "{err}");
    }

    #[test]
    fn unknown_true_parameter() {
        let text = TWO_ARM.replace("\"theta1\", \"tie", "\"nope\", \"tie");
        assert!(matches!(
            Instance::from_json_str(&text),
            Err(Error::UnknownParameter(_))
        ));
    }

    #[test]
    fn discrete_family_from_file() {
        let text = r#"{"arms": 2, "reward_family": "discrete",
            "parameters": {"type": "explicit", "list": [
              {"name": "a", "means": [0.5, 0.2],
               "distributions": [{"support": [0.0, 1.0], "probs": [0.5, 0.5]},
                                 {"support": [0.2], "probs": [1.0]}]}]},
            "true_parameter": "a"}"#;
        let inst = Instance::from_json_str(text).unwrap();
        assert_eq!(inst.params.reward_family().name(), "discrete");
    }

    #[test]
    fn true_parameter_from_cli_string() {
        let spec: TrueParameterSpec = "[0.2, 0.5]".parse().unwrap();
        assert_eq!(spec, TrueParameterSpec::Means(vec![0.2, 0.5]));
        let spec: TrueParameterSpec = "theta2".parse().unwrap();
        assert_eq!(spec, TrueParameterSpec::Name("theta2".into()));
    }
}
