//! JSON schemas for the CLI: joint distributions, function tables,
//! bound-checker function lists and atom-tuple sets.

use crate::bounds::BoundFunction;
use crate::error::{Error, Result};
use crate::functions::ProductFunction;
use crate::hypergraph::AtomSet;
use crate::spaces::{FiniteSpace, JointDistribution};
use serde::{Deserialize, Serialize};

/// `{"atoms": [...], "probs": [...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub atoms: Vec<String>,
    pub probs: Vec<f64>,
}

impl SpaceSpec {
    pub fn to_space(&self) -> Result<FiniteSpace> {
        FiniteSpace::new(self.atoms.clone(), self.probs.clone())
    }

    pub fn from_space(space: &FiniteSpace) -> Self {
        Self {
            atoms: space.atoms().to_vec(),
            probs: space.probs().to_vec(),
        }
    }
}

/// `{"components": [space...], "tensor": [...row-major...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointSpec {
    pub components: Vec<SpaceSpec>,
    pub tensor: Vec<f64>,
}

impl JointSpec {
    pub fn to_joint(&self) -> Result<JointDistribution> {
        let components = self
            .components
            .iter()
            .map(SpaceSpec::to_space)
            .collect::<Result<Vec<_>>>()?;
        JointDistribution::new(components, self.tensor.clone())
    }

    pub fn from_joint(joint: &JointDistribution) -> Self {
        Self {
            components: joint.components().iter().map(SpaceSpec::from_space).collect(),
            tensor: joint.tensor().to_vec(),
        }
    }
}

/// `{"domain": [space...], "values": [...row-major...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub domain: Vec<SpaceSpec>,
    pub values: Vec<f64>,
}

impl FunctionSpec {
    pub fn to_function(&self) -> Result<ProductFunction> {
        let domain = self
            .domain
            .iter()
            .map(SpaceSpec::to_space)
            .collect::<Result<Vec<_>>>()?;
        ProductFunction::new(domain, self.values.clone())
    }

    pub fn from_function(f: &ProductFunction) -> Self {
        Self {
            domain: f.domain().iter().map(SpaceSpec::from_space).collect(),
            values: f.values().to_vec(),
        }
    }
}

/// A list of function tables (`{"functions": [...]}`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionListSpec {
    pub functions: Vec<FunctionSpec>,
}

/// One function for the bound checker: either an exact table or a
/// threshold indicator over integer atom scores.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundFunctionSpec {
    Table { domain: Vec<SpaceSpec>, values: Vec<f64> },
    Threshold {
        scores: Vec<Vec<i64>>,
        #[serde(default)]
        bias: i64,
    },
}

impl BoundFunctionSpec {
    pub fn to_bound_function(&self) -> Result<BoundFunction> {
        match self {
            BoundFunctionSpec::Table { domain, values } => {
                let spec = FunctionSpec {
                    domain: domain.clone(),
                    values: values.clone(),
                };
                Ok(BoundFunction::Table(spec.to_function()?))
            }
            BoundFunctionSpec::Threshold { scores, bias } => Ok(BoundFunction::Threshold {
                scores: scores.clone(),
                bias: *bias,
            }),
        }
    }
}

/// Joint sequence for `check-bound`: one joint per coordinate, or a
/// single joint with `replicate` set to the coordinate count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointListSpec {
    pub joints: Vec<JointSpec>,
    #[serde(default)]
    pub replicate: Option<usize>,
}

impl JointListSpec {
    pub fn to_joints(&self) -> Result<Vec<JointDistribution>> {
        let mut joints = self
            .joints
            .iter()
            .map(JointSpec::to_joint)
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = self.replicate {
            if joints.len() != 1 {
                return Err(Error::InvalidParameter(
                    "replicate requires exactly one joint".into(),
                ));
            }
            joints = vec![joints.remove(0); n.max(1)];
        }
        Ok(joints)
    }
}

/// Function list for `check-bound`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundFunctionListSpec {
    pub functions: Vec<BoundFunctionSpec>,
}

impl BoundFunctionListSpec {
    pub fn to_functions(&self) -> Result<Vec<BoundFunction>> {
        self.functions
            .iter()
            .map(BoundFunctionSpec::to_bound_function)
            .collect()
    }
}

/// Sets over `Ω^n` as sorted flat atom-tuple indices:
/// `{"m": 3, "n": 2, "sets": [[0,1,4], ...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetsSpec {
    pub m: usize,
    pub n: usize,
    pub sets: Vec<Vec<usize>>,
}

impl SetsSpec {
    pub fn to_sets(&self) -> Result<Vec<AtomSet>> {
        self.sets
            .iter()
            .map(|idx| AtomSet::from_indices(self.m, self.n, idx))
            .collect()
    }
}

/// Formats a float with 17 significant digits (round-trip exact).
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_round_trip() {
        let joint = crate::social_choice::vote_sample_joint(0.25).unwrap();
        let spec = JointSpec::from_joint(&joint);
        let text = serde_json::to_string(&spec).unwrap();
        let parsed: JointSpec = serde_json::from_str(&text).unwrap();
        let back = parsed.to_joint().unwrap();
        assert_eq!(back.tensor(), joint.tensor());
    }

    #[test]
    fn bad_tensor_is_rejected_as_validation_error() {
        let spec = JointSpec {
            components: vec![SpaceSpec {
                atoms: vec!["a".into(), "b".into()],
                probs: vec![0.5, 0.5],
            }],
            tensor: vec![0.9, 0.2],
        };
        assert!(spec.to_joint().is_err());
    }

    #[test]
    fn csv_floats_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 2.5e-17, 123456.789] {
            let s = csv_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x);
        }
    }
}
