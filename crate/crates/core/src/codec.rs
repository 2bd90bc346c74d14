//! Common interface over the three code families and a name-keyed registry
//! that builds them from a [`CodeConfig`].

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::binaryinsdel::{BinaryCode, InnerCode};
use crate::channel::{corrupt, trial, AdversaryScript, StrategyParams, StrategyRegistry, Symbol, TrialReport};
use crate::config::{CodeConfig, FieldConfig, MessageDist};
use crate::error::{Error, Result};
use crate::fulllinear::FullLinearCode;
use crate::gf::{Fe, Field};
use crate::halflinear::{HalfLinearCode, Pair};
use crate::syncstring::SyncString;

/// A code family seen by the channel harness.
pub trait Codec: Send + Sync {
    type Symbol: Symbol;

    fn family(&self) -> &'static str;
    fn field(&self) -> &Field;
    fn sync(&self) -> &SyncString;
    fn message_len(&self) -> usize;
    /// Transmitted length in channel symbols.
    fn block_len(&self) -> usize;
    fn rate(&self) -> Ratio<u64>;
    fn guaranteed_budget(&self) -> usize;
    fn proof_budget(&self) -> usize {
        self.guaranteed_budget()
    }
    /// True when the guarantee only covers deletions.
    fn deletions_only(&self) -> bool {
        false
    }
    /// Strategy knobs matched to this instance's buffer geometry.
    fn strategy_defaults(&self) -> StrategyParams {
        StrategyParams::default()
    }
    fn encode(&self, msg: &[Fe]) -> Result<Vec<Self::Symbol>>;
    fn candidate_list(&self, y: &[Self::Symbol]) -> Vec<(Fe, Fe)>;
    fn decode(&self, y: &[Self::Symbol]) -> Result<Vec<Fe>>;
    fn random_symbol(&self, rng: &mut ChaCha8Rng) -> Self::Symbol;
    fn inner(&self) -> Option<&InnerCode> {
        None
    }
}

fn random_fe(f: &Field, rng: &mut ChaCha8Rng) -> Fe {
    Fe(rng.gen_range(0..f.order()))
}

impl Codec for HalfLinearCode {
    type Symbol = Pair;

    fn family(&self) -> &'static str {
        "half"
    }

    fn field(&self) -> &Field {
        HalfLinearCode::field(self)
    }

    fn sync(&self) -> &SyncString {
        HalfLinearCode::sync(self)
    }

    fn message_len(&self) -> usize {
        self.dimension()
    }

    fn block_len(&self) -> usize {
        self.len()
    }

    fn rate(&self) -> Ratio<u64> {
        HalfLinearCode::rate(self)
    }

    fn guaranteed_budget(&self) -> usize {
        HalfLinearCode::guaranteed_budget(self)
    }

    fn encode(&self, msg: &[Fe]) -> Result<Vec<Pair>> {
        HalfLinearCode::encode(self, msg)
    }

    fn candidate_list(&self, y: &[Pair]) -> Vec<(Fe, Fe)> {
        HalfLinearCode::candidate_list(self, y)
    }

    fn decode(&self, y: &[Pair]) -> Result<Vec<Fe>> {
        HalfLinearCode::decode(self, y)
    }

    fn random_symbol(&self, rng: &mut ChaCha8Rng) -> Pair {
        let f = HalfLinearCode::field(self);
        Pair(random_fe(f, rng), random_fe(f, rng))
    }
}

impl Codec for FullLinearCode {
    type Symbol = Fe;

    fn family(&self) -> &'static str {
        "full"
    }

    fn field(&self) -> &Field {
        FullLinearCode::field(self)
    }

    fn sync(&self) -> &SyncString {
        FullLinearCode::sync(self)
    }

    fn message_len(&self) -> usize {
        self.dimension()
    }

    fn block_len(&self) -> usize {
        FullLinearCode::block_len(self)
    }

    fn rate(&self) -> Ratio<u64> {
        FullLinearCode::rate(self)
    }

    fn guaranteed_budget(&self) -> usize {
        FullLinearCode::guaranteed_budget(self)
    }

    fn proof_budget(&self) -> usize {
        FullLinearCode::proof_budget(self)
    }

    fn strategy_defaults(&self) -> StrategyParams {
        StrategyParams { min_run: Some(2), keep: Some(1), target_run: Some(2), max_run: Some(2), ..Default::default() }
    }

    fn encode(&self, msg: &[Fe]) -> Result<Vec<Fe>> {
        FullLinearCode::encode(self, msg)
    }

    fn candidate_list(&self, y: &[Fe]) -> Vec<(Fe, Fe)> {
        FullLinearCode::candidate_list(self, y)
    }

    fn decode(&self, y: &[Fe]) -> Result<Vec<Fe>> {
        FullLinearCode::decode(self, y)
    }

    fn random_symbol(&self, rng: &mut ChaCha8Rng) -> Fe {
        random_fe(FullLinearCode::field(self), rng)
    }
}

impl Codec for BinaryCode {
    type Symbol = u8;

    fn family(&self) -> &'static str {
        "binary"
    }

    fn field(&self) -> &Field {
        self.outer().field()
    }

    fn sync(&self) -> &SyncString {
        self.outer().sync()
    }

    fn message_len(&self) -> usize {
        self.dimension()
    }

    fn block_len(&self) -> usize {
        BinaryCode::block_len(self)
    }

    fn rate(&self) -> Ratio<u64> {
        BinaryCode::rate(self)
    }

    fn guaranteed_budget(&self) -> usize {
        BinaryCode::guaranteed_budget(self)
    }

    fn deletions_only(&self) -> bool {
        true
    }

    /// Buffer attacks shrink inner buffers below `w` and grow codeword
    /// zero runs up to `w`.
    fn strategy_defaults(&self) -> StrategyParams {
        let w = self.inner().params().window;
        StrategyParams {
            deletions_only: true,
            min_run: Some(w),
            keep: Some(w - 1),
            target_run: Some(w),
            max_run: None,
        }
    }

    fn encode(&self, msg: &[Fe]) -> Result<Vec<u8>> {
        BinaryCode::encode(self, msg)
    }

    fn candidate_list(&self, y: &[u8]) -> Vec<(Fe, Fe)> {
        BinaryCode::candidate_list(self, y)
    }

    fn decode(&self, y: &[u8]) -> Result<Vec<Fe>> {
        BinaryCode::decode(self, y)
    }

    fn random_symbol(&self, rng: &mut ChaCha8Rng) -> u8 {
        rng.gen_range(0..2)
    }

    fn inner(&self) -> Option<&InnerCode> {
        Some(BinaryCode::inner(self))
    }
}

/// Result of one JSON-level corruption.
#[derive(Clone, Debug, Serialize)]
pub struct CorruptionJson {
    pub word: Value,
    pub ops_used: usize,
    pub log: Value,
    pub degraded: bool,
}

/// Object-safe view of a built instance, used by the CLI and experiments.
pub trait DynCodec: Send + Sync {
    fn family(&self) -> &'static str;
    /// The materialized configuration; rebuilding from it skips all
    /// randomized construction.
    fn config(&self) -> &CodeConfig;
    fn field(&self) -> &Field;
    fn message_len(&self) -> usize;
    fn block_len(&self) -> usize;
    fn rate(&self) -> Ratio<u64>;
    fn guaranteed_budget(&self) -> usize;
    fn proof_budget(&self) -> usize;
    fn deletions_only(&self) -> bool;
    fn strategy_names(&self) -> Vec<&'static str>;
    fn encode_json(&self, msg: &[Fe]) -> Result<Value>;
    fn decode_json(&self, y: &Value) -> Result<Vec<Fe>>;
    fn candidates_json(&self, y: &Value) -> Result<Vec<(Fe, Fe)>>;
    fn corrupt_json(&self, y: &Value, script: &AdversaryScript) -> Result<CorruptionJson>;
    fn run_trials(&self, dist: MessageDist, script: &AdversaryScript, trials: usize, seed: u64) -> Result<TrialReport>;
    fn summary(&self) -> Value;
}

/// A codec together with its materialized config and strategy registry.
pub struct Instance<C: Codec> {
    config: CodeConfig,
    code: C,
    strategies: StrategyRegistry<C::Symbol>,
}

impl<C: Codec> Instance<C> {
    pub fn new(config: CodeConfig, code: C) -> Self {
        Instance { config, code, strategies: StrategyRegistry::standard() }
    }

    pub fn code(&self) -> &C {
        &self.code
    }

    /// Fills strategy knobs the caller left unset from the instance
    /// defaults and forces deletions when the guarantee needs it.
    pub fn script(&self, script: &AdversaryScript) -> AdversaryScript {
        let d = self.code.strategy_defaults();
        let p = &script.params;
        AdversaryScript {
            params: StrategyParams {
                deletions_only: p.deletions_only || self.code.deletions_only(),
                min_run: p.min_run.or(d.min_run),
                keep: p.keep.or(d.keep),
                target_run: p.target_run.or(d.target_run),
                max_run: p.max_run.or(d.max_run),
            },
            ..script.clone()
        }
    }
}

impl<C: Codec> DynCodec for Instance<C> {
    fn family(&self) -> &'static str {
        self.code.family()
    }

    fn config(&self) -> &CodeConfig {
        &self.config
    }

    fn field(&self) -> &Field {
        self.code.field()
    }

    fn message_len(&self) -> usize {
        self.code.message_len()
    }

    fn block_len(&self) -> usize {
        self.code.block_len()
    }

    fn rate(&self) -> Ratio<u64> {
        self.code.rate()
    }

    fn guaranteed_budget(&self) -> usize {
        self.code.guaranteed_budget()
    }

    fn proof_budget(&self) -> usize {
        self.code.proof_budget()
    }

    fn deletions_only(&self) -> bool {
        self.code.deletions_only()
    }

    fn strategy_names(&self) -> Vec<&'static str> {
        self.strategies.names()
    }

    fn encode_json(&self, msg: &[Fe]) -> Result<Value> {
        let f = self.code.field();
        if let Some(x) = msg.iter().find(|x| x.0 >= f.order()) {
            return Err(Error::ElementOutOfRange { value: x.0 as u64, order: f.order() });
        }
        Ok(C::Symbol::word_to_json(&self.code.encode(msg)?))
    }

    fn decode_json(&self, y: &Value) -> Result<Vec<Fe>> {
        let word = self.parse_word(y)?;
        self.code.decode(&word)
    }

    fn candidates_json(&self, y: &Value) -> Result<Vec<(Fe, Fe)>> {
        Ok(self.code.candidate_list(&self.parse_word(y)?))
    }

    fn corrupt_json(&self, y: &Value, script: &AdversaryScript) -> Result<CorruptionJson> {
        let word = self.parse_word(y)?;
        let source = |rng: &mut ChaCha8Rng| self.code.random_symbol(rng);
        let c = corrupt(&word, &self.script(script), &self.strategies, &source)?;
        Ok(CorruptionJson {
            word: C::Symbol::word_to_json(&c.word),
            ops_used: c.ops_used,
            log: serde_json::to_value(&c.log)?,
            degraded: c.degraded,
        })
    }

    fn run_trials(&self, dist: MessageDist, script: &AdversaryScript, trials: usize, seed: u64) -> Result<TrialReport> {
        trial(&self.code, dist, &self.script(script), &self.strategies, trials, seed)
    }

    fn summary(&self) -> Value {
        let mut v = json!({
            "family": self.family(),
            "field_order": self.field().order(),
            "n": self.config.n,
            "k": self.message_len(),
            "block_len": self.block_len(),
            "rate": self.rate().to_string(),
            "guaranteed_budget": self.guaranteed_budget(),
            "proof_budget": self.proof_budget(),
            "deletions_only": self.deletions_only(),
        });
        if let Some(inner) = self.code.inner() {
            v["inner"] = serde_json::to_value(inner.record()).expect("record serializes");
        }
        v
    }
}

impl<C: Codec> Instance<C> {
    fn parse_word(&self, y: &Value) -> Result<Vec<C::Symbol>> {
        C::Symbol::word_from_json(y)
    }
}

pub type CodecFactory = fn(&CodeConfig) -> Result<Box<dyn DynCodec>>;

/// Code families by name.
pub struct CodecRegistry {
    map: BTreeMap<String, CodecFactory>,
}

impl CodecRegistry {
    pub fn empty() -> Self {
        CodecRegistry { map: BTreeMap::new() }
    }

    /// `half`, `full` and `binary`.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register("half", build_half);
        r.register("full", build_full);
        r.register("binary", build_binary);
        r
    }

    pub fn register(&mut self, name: &str, f: CodecFactory) {
        self.map.insert(name.to_string(), f);
    }

    pub fn names(&self) -> Vec<&str> {
        self.map.keys().map(String::as_str).collect()
    }

    pub fn build(&self, cfg: &CodeConfig) -> Result<Box<dyn DynCodec>> {
        let f = self
            .map
            .get(&cfg.family)
            .ok_or_else(|| Error::UnknownName { kind: "code family", name: cfg.family.clone() })?;
        f(cfg)
    }
}

fn materialize(cfg: &CodeConfig, field: &Field, sync: &SyncString) -> CodeConfig {
    let mut out = cfg.clone();
    out.field = Some(FieldConfig::from_spec(field.spec()));
    out.sync.symbols = Some(sync.symbols.clone());
    out.sync.alphabet = Some(sync.alphabet);
    out
}

fn build_half(cfg: &CodeConfig) -> Result<Box<dyn DynCodec>> {
    let field = cfg.field()?;
    let sync = cfg.sync.build(cfg.n, &field)?;
    let code = HalfLinearCode::with_reed_solomon(field.clone(), sync.clone(), cfg.delta, cfg.epsilon)?;
    Ok(Box::new(Instance::new(materialize(cfg, &field, &sync), code)))
}

fn build_full(cfg: &CodeConfig) -> Result<Box<dyn DynCodec>> {
    let field = cfg.field()?;
    let sync = cfg.sync.build(cfg.n, &field)?;
    let code = FullLinearCode::with_reed_solomon(field.clone(), sync.clone(), cfg.delta, cfg.epsilon)?;
    Ok(Box::new(Instance::new(materialize(cfg, &field, &sync), code)))
}

fn build_binary(cfg: &CodeConfig) -> Result<Box<dyn DynCodec>> {
    let inner_cfg = cfg.inner.as_ref().ok_or_else(|| Error::params("binary family needs an inner code"))?;
    let field = cfg.field()?;
    let sync = cfg.sync.build(cfg.n, &field)?;
    let inner = inner_cfg.build()?;
    let outer = HalfLinearCode::with_reed_solomon(field.clone(), sync.clone(), cfg.delta, cfg.epsilon)?;
    let code = BinaryCode::new(outer, inner)?;
    let mut m = materialize(cfg, &field, &sync);
    m.inner = Some(inner_cfg.materialized(code.inner()));
    Ok(Box::new(Instance::new(m, code)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_cfg() -> CodeConfig {
        CodeConfig::from_json(
            r#"{"family": "half", "n": 16, "delta": 0.2, "epsilon": 0.02, "sync": {"epsilon": 0.5, "seed": 1}}"#,
        )
        .unwrap()
    }

    #[test]
    fn registry_builds_and_materializes() {
        let reg = CodecRegistry::standard();
        assert_eq!(reg.names(), vec!["binary", "full", "half"]);
        let inst = reg.build(&half_cfg()).unwrap();
        assert_eq!(inst.message_len(), 5);
        let again = reg.build(inst.config()).unwrap();
        assert_eq!(again.config(), inst.config());
        let msg: Vec<Fe> = (1..=5).map(Fe).collect();
        assert_eq!(inst.encode_json(&msg).unwrap(), again.encode_json(&msg).unwrap());
    }

    #[test]
    fn unknown_family() {
        let mut cfg = half_cfg();
        cfg.family = "quarter".into();
        assert!(matches!(
            CodecRegistry::standard().build(&cfg),
            Err(Error::UnknownName { kind: "code family", .. })
        ));
    }

    #[test]
    fn json_roundtrip_through_channel() {
        let inst = CodecRegistry::standard().build(&half_cfg()).unwrap();
        let msg: Vec<Fe> = vec![Fe(9), Fe(0), Fe(200), Fe(1), Fe(77)];
        let y = inst.encode_json(&msg).unwrap();
        let script = AdversaryScript { strategy: "random".into(), budget: 3, seed: 5, params: Default::default() };
        let c = inst.corrupt_json(&y, &script).unwrap();
        assert_eq!(c.ops_used, 3);
        assert_eq!(inst.decode_json(&c.word).unwrap(), msg);
        assert!(inst.encode_json(&[Fe(256); 5]).is_err());
    }
}
