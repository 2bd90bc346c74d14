//! JSON configuration for code instances and experiments.
//!
//! A [`CodeConfig`] either describes how to build an instance (seeds for the
//! sync string and inner-code search) or, once materialized, carries the
//! built sync string and inner generator so that loading skips the search.

use serde::{Deserialize, Serialize};

use crate::binaryinsdel::{inner_search, CheckMode, Certification, InnerCode, InnerCodeRecord, InnerParams, SearchBudget};
use crate::channel::StrategyParams;
use crate::error::{Error, Result};
use crate::gf::{Field, FieldKind, FieldSpec};
use crate::syncstring::{generate_sync, SyncString};

fn two() -> u64 {
    2
}

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub kind: FieldKind,
    #[serde(default = "two")]
    pub characteristic: u64,
    #[serde(default = "one")]
    pub degree: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u32>,
}

impl FieldConfig {
    pub fn binary(degree: u32) -> Self {
        FieldConfig { kind: FieldKind::BinaryExtension, characteristic: 2, degree, modulus: None }
    }

    pub fn build(&self) -> Result<Field> {
        Field::new(self.kind, self.characteristic, self.degree, self.modulus)
    }

    pub fn from_spec(spec: &FieldSpec) -> Self {
        FieldConfig {
            kind: spec.kind,
            characteristic: spec.characteristic as u64,
            degree: spec.degree,
            modulus: spec.modulus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncConfig {
    pub epsilon: f64,
    /// Defaults to every nonzero field element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<u32>,
    #[serde(default)]
    pub seed: u64,
    /// Set by materialization; verified again on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<Vec<u32>>,
}

impl SyncConfig {
    pub fn build(&self, n: usize, field: &Field) -> Result<SyncString> {
        let alphabet = self.alphabet.unwrap_or(field.order() - 1);
        match &self.symbols {
            Some(symbols) => {
                if symbols.len() != n {
                    return Err(Error::LengthMismatch { expected: n, actual: symbols.len() });
                }
                let mut s = SyncString::from_symbols(symbols.clone(), self.epsilon, alphabet)?;
                s.seed = Some(self.seed);
                Ok(s)
            }
            None => generate_sync(n, self.epsilon, alphabet, self.seed),
        }
    }
}

fn exhaustive() -> CheckMode {
    CheckMode::Exhaustive
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InnerConfig {
    pub m: usize,
    pub k_in: usize,
    pub delta_in: f64,
    pub rho: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "exhaustive")]
    pub verify: CheckMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attempts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Set by materialization: row-major 0/1 generator and its certificate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<Certification>,
}

impl InnerConfig {
    pub fn params(&self) -> Result<InnerParams> {
        InnerParams::new(self.m, self.k_in, self.delta_in, self.rho)
    }

    pub fn build(&self) -> Result<InnerCode> {
        match &self.generator {
            Some(g) => InnerCode::from_record(&InnerCodeRecord {
                m: self.m,
                k_in: self.k_in,
                delta_in: self.delta_in,
                rho: self.rho,
                generator: g.clone(),
                certification: self.certification.unwrap_or(Certification {
                    property1: CheckMode::Unchecked,
                    property2: CheckMode::Unchecked,
                }),
                seed: Some(self.seed),
            }),
            None => {
                let mut budget = SearchBudget { threads: self.threads, ..Default::default() };
                if let Some(a) = self.attempts {
                    budget.attempts = a;
                }
                inner_search(self.params()?, self.seed, self.verify, budget)
            }
        }
    }

    pub fn materialized(&self, code: &InnerCode) -> Self {
        let rec = code.record();
        InnerConfig { generator: Some(rec.generator), certification: Some(rec.certification), ..self.clone() }
    }
}

/// Everything needed to build one code instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    /// Registry name: `half`, `full` or `binary`.
    pub family: String,
    /// Defaults to GF(2^8), or GF(2^k_in) for the binary family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldConfig>,
    /// Outer length in base-code symbols.
    pub n: usize,
    /// Insdel fraction; the outer δ for the binary family.
    pub delta: f64,
    pub epsilon: f64,
    pub sync: SyncConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<InnerConfig>,
}

impl CodeConfig {
    pub fn field(&self) -> Result<Field> {
        match (&self.field, &self.inner) {
            (Some(f), _) => f.build(),
            (None, Some(inner)) if self.family == "binary" => Field::binary(inner.k_in as u32),
            (None, _) => Field::binary(8),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedBudget {
    /// The instance's proven budget.
    Guarantee,
    /// The larger budget the decoding argument charges, where one is
    /// reported separately; otherwise the same as `guarantee`.
    Proof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Budget {
    Ops(usize),
    Named(NamedBudget),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    pub strategy: String,
    pub budget: Budget,
    #[serde(default)]
    pub params: StrategyParams,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageDist {
    #[default]
    Uniform,
    Zero,
    /// Uniform among messages with at least one nonzero symbol.
    Nonzero,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub budget: Vec<Budget>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeConfig,
    pub adversary: AdversaryConfig,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub messages: MessageDist,
    #[serde(default)]
    pub sweep: Sweep,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_forms() {
        assert_eq!(serde_json::from_str::<Budget>("3").unwrap(), Budget::Ops(3));
        assert_eq!(serde_json::from_str::<Budget>("\"guarantee\"").unwrap(), Budget::Named(NamedBudget::Guarantee));
        assert!(serde_json::from_str::<Budget>("\"most\"").is_err());
    }

    #[test]
    fn minimal_experiment_parses() {
        let cfg = ExperimentConfig::from_json(
            r#"{"code": {"family": "half", "n": 16, "delta": 0.2, "epsilon": 0.02,
                         "sync": {"epsilon": 0.5, "seed": 1}},
                "adversary": {"strategy": "random", "budget": "guarantee"},
                "trials": 10, "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.messages, MessageDist::Uniform);
        assert_eq!(cfg.code.field().unwrap().order(), 256);
        assert!(cfg.sweep.n.is_empty());
    }

    #[test]
    fn unknown_fields_rejected() {
        let r = CodeConfig::from_json(
            r#"{"family": "half", "n": 16, "delta": 0.2, "epsilon": 0.02, "sync": {"epsilon": 0.5}, "colour": 1}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn binary_field_follows_inner_dimension() {
        let cfg = CodeConfig::from_json(
            r#"{"family": "binary", "n": 16, "delta": 0.6, "epsilon": 0.02, "sync": {"epsilon": 0.5},
                "inner": {"m": 64, "k_in": 4, "delta_in": 0.125, "rho": 0.015625}}"#,
        )
        .unwrap();
        assert_eq!(cfg.field().unwrap().order(), 16);
    }
}
