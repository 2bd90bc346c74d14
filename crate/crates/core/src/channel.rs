//! Adversarial insdel channel.
//!
//! Strategies apply edits to a [`Tape`] that enforces an operation budget
//! and logs every edit. Strategies are registered by name in a
//! [`StrategyRegistry`] and picked at runtime. A strategy that finds nothing
//! to attack (no zero runs, no nonzero symbols) falls back to random edits
//! and flags the run as degraded.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::codec::Codec;
use crate::config::MessageDist;
use crate::error::{Error, Result};
use crate::gf::Fe;
use crate::halflinear::Pair;

/// A channel symbol. Zero symbols are what buffers are made of.
pub trait Symbol: Clone + PartialEq + Debug + Send + Sync + Serialize + DeserializeOwned + 'static {
    fn is_zero(&self) -> bool;

    fn word_to_json(word: &[Self]) -> serde_json::Value {
        serde_json::to_value(word).expect("symbols serialize")
    }

    fn word_from_json(v: &serde_json::Value) -> Result<Vec<Self>> {
        Ok(serde_json::from_value(v.clone())?)
    }
}

impl Symbol for Fe {
    fn is_zero(&self) -> bool {
        Fe::is_zero(*self)
    }
}

impl Symbol for Pair {
    fn is_zero(&self) -> bool {
        Pair::is_zero(self)
    }
}

/// Bits travel as `0`/`1` strings.
impl Symbol for u8 {
    fn is_zero(&self) -> bool {
        *self == 0
    }

    fn word_to_json(word: &[Self]) -> serde_json::Value {
        serde_json::Value::String(bits_to_string(word))
    }

    fn word_from_json(v: &serde_json::Value) -> Result<Vec<Self>> {
        match v {
            serde_json::Value::String(s) => bits_from_string(s),
            _ => Err(Error::Format("binary words are 0/1 strings".into())),
        }
    }
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

pub fn bits_from_string(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Format(format!("unexpected {c:?} in bit string"))),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Ins,
    Del,
}

/// One logged edit. `pos` indexes the word as it was just before the edit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Symbol")]
pub struct OpRecord<S> {
    pub pos: usize,
    pub op: OpKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<S>,
}

/// Re-applies a log to the original word.
pub fn replay<S: Symbol>(word: &[S], log: &[OpRecord<S>]) -> Result<Vec<S>> {
    let mut w = word.to_vec();
    for r in log {
        match (r.op, &r.symbol) {
            (OpKind::Del, _) if r.pos < w.len() => {
                w.remove(r.pos);
            }
            (OpKind::Ins, Some(s)) if r.pos <= w.len() => w.insert(r.pos, s.clone()),
            _ => return Err(Error::Format(format!("log entry {r:?} does not apply"))),
        }
    }
    Ok(w)
}

/// Knobs shared by the scripted strategies. Unused ones are ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyParams {
    pub deletions_only: bool,
    /// buffer-delete: zero runs at least this long are targeted (default 2).
    pub min_run: Option<usize>,
    /// buffer-delete: length a targeted run is cut down to (default
    /// `min_run - 1`).
    pub keep: Option<usize>,
    /// fake-buffer: zero-run length to grow towards (default 4).
    pub target_run: Option<usize>,
    /// block-merge: longest separating run worth deleting.
    pub max_run: Option<usize>,
}

/// Everything needed to replay one corruption.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryScript {
    pub strategy: String,
    pub budget: usize,
    pub seed: u64,
    #[serde(default)]
    pub params: StrategyParams,
}

/// Budgeted, logged view of the word under attack.
pub struct Tape<'a, S: Symbol> {
    word: Vec<S>,
    log: Vec<OpRecord<S>>,
    limit: usize,
    rng: ChaCha8Rng,
    source: &'a (dyn Fn(&mut ChaCha8Rng) -> S + Sync),
    params: StrategyParams,
    degraded: bool,
}

impl<'a, S: Symbol> Tape<'a, S> {
    pub fn new(
        word: Vec<S>,
        budget: usize,
        seed: u64,
        params: StrategyParams,
        source: &'a (dyn Fn(&mut ChaCha8Rng) -> S + Sync),
    ) -> Self {
        Tape {
            word,
            log: Vec::new(),
            limit: budget,
            rng: ChaCha8Rng::seed_from_u64(seed),
            source,
            params,
            degraded: false,
        }
    }

    pub fn word(&self) -> &[S] {
        &self.word
    }

    pub fn used(&self) -> usize {
        self.log.len()
    }

    pub fn remaining(&self) -> usize {
        self.limit.saturating_sub(self.log.len())
    }

    pub fn params(&self) -> &StrategyParams {
        &self.params
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn random_symbol(&mut self) -> S {
        (self.source)(&mut self.rng)
    }

    pub fn delete(&mut self, pos: usize) -> bool {
        if self.remaining() == 0 || pos >= self.word.len() {
            return false;
        }
        self.word.remove(pos);
        self.log.push(OpRecord { pos, op: OpKind::Del, symbol: None });
        true
    }

    pub fn insert(&mut self, pos: usize, s: S) -> bool {
        if self.remaining() == 0 || self.params.deletions_only || pos > self.word.len() {
            return false;
        }
        self.word.insert(pos, s.clone());
        self.log.push(OpRecord { pos, op: OpKind::Ins, symbol: Some(s) });
        true
    }

    /// Runs `f` with at most `budget` of the remaining operations.
    pub fn with_budget(&mut self, budget: usize, f: impl FnOnce(&mut Self)) {
        let saved = self.limit;
        self.limit = self.used() + budget.min(self.remaining());
        f(self);
        self.limit = saved;
    }

    /// Marks the run degraded and spends what is left on random edits.
    pub fn degrade(&mut self) {
        self.degraded = true;
        Random.apply(self);
    }

    pub fn finish(self) -> Corruption<S> {
        Corruption { ops_used: self.log.len(), word: self.word, log: self.log, degraded: self.degraded }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Symbol")]
pub struct Corruption<S> {
    pub word: Vec<S>,
    pub ops_used: usize,
    pub log: Vec<OpRecord<S>>,
    pub degraded: bool,
}

pub trait Strategy<S: Symbol>: Send + Sync {
    fn name(&self) -> &'static str;
    fn apply(&self, tape: &mut Tape<'_, S>);
}

/// Strategies by name.
pub struct StrategyRegistry<S: Symbol> {
    map: BTreeMap<&'static str, Arc<dyn Strategy<S>>>,
}

impl<S: Symbol> StrategyRegistry<S> {
    pub fn empty() -> Self {
        StrategyRegistry { map: BTreeMap::new() }
    }

    pub fn register(&mut self, s: Arc<dyn Strategy<S>>) {
        self.map.insert(s.name(), s);
    }

    /// random, zero-pair-exploit, block-merge, buffer-delete, fake-buffer
    /// and composite (a random mix of the others).
    pub fn standard() -> Self {
        let mut r = Self::empty();
        let parts: Vec<Arc<dyn Strategy<S>>> = vec![
            Arc::new(Random),
            Arc::new(ZeroPairExploit),
            Arc::new(BlockMerge),
            Arc::new(BufferDelete),
            Arc::new(FakeBuffer),
        ];
        for p in &parts {
            r.register(p.clone());
        }
        r.register(Arc::new(Composite { parts }));
        r
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Strategy<S>>> {
        self.map
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownName { kind: "strategy", name: name.to_string() })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.map.keys().copied().collect()
    }
}

/// Applies `script` to `word`. Deterministic in the script.
pub fn corrupt<S: Symbol>(
    word: &[S],
    script: &AdversaryScript,
    registry: &StrategyRegistry<S>,
    source: &(dyn Fn(&mut ChaCha8Rng) -> S + Sync),
) -> Result<Corruption<S>> {
    let strategy = registry.get(&script.strategy)?;
    let mut tape = Tape::new(word.to_vec(), script.budget, script.seed, script.params.clone(), source);
    strategy.apply(&mut tape);
    Ok(tape.finish())
}

/// Uniform insertions and deletions, half and half.
pub struct Random;

impl<S: Symbol> Strategy<S> for Random {
    fn name(&self) -> &'static str {
        "random"
    }

    fn apply(&self, tape: &mut Tape<'_, S>) {
        while tape.remaining() > 0 {
            let len = tape.word().len();
            let delete = tape.params().deletions_only || (len > 0 && tape.rng().gen_bool(0.5));
            if delete {
                if len == 0 {
                    break;
                }
                let pos = tape.rng().gen_range(0..len);
                tape.delete(pos);
            } else {
                let pos = tape.rng().gen_range(0..=len);
                let s = tape.random_symbol();
                tape.insert(pos, s);
            }
        }
    }
}

fn nonzero_positions<S: Symbol>(w: &[S]) -> Vec<usize> {
    w.iter().enumerate().filter(|(_, s)| !s.is_zero()).map(|(i, _)| i).collect()
}

/// Spends the whole budget on nonzero symbols: deletes them, or moves
/// copies of genuine symbols to other places so that their position
/// information lies.
pub struct ZeroPairExploit;

impl<S: Symbol> Strategy<S> for ZeroPairExploit {
    fn name(&self) -> &'static str {
        "zero-pair-exploit"
    }

    fn apply(&self, tape: &mut Tape<'_, S>) {
        if nonzero_positions(tape.word()).is_empty() {
            return tape.degrade();
        }
        while tape.remaining() > 0 {
            let nz = nonzero_positions(tape.word());
            if nz.is_empty() {
                break;
            }
            let &src = nz.choose(tape.rng()).expect("nonempty");
            let copy = !tape.params().deletions_only && tape.rng().gen_bool(0.5);
            if copy {
                let len = tape.word().len();
                let pos = tape.rng().gen_range(0..=len);
                let s = tape.word()[src].clone();
                tape.insert(pos, s);
            } else {
                tape.delete(src);
            }
        }
    }
}

/// Maximal zero runs with a nonzero symbol on both sides.
fn interior_zero_runs<S: Symbol>(w: &[S]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < w.len() {
        if w[i].is_zero() {
            let start = i;
            while i < w.len() && w[i].is_zero() {
                i += 1;
            }
            if start > 0 && i < w.len() {
                out.push((start, i - start));
            }
        } else {
            i += 1;
        }
    }
    out
}

fn zero_runs_all<S: Symbol>(w: &[S]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < w.len() {
        if w[i].is_zero() {
            let start = i;
            while i < w.len() && w[i].is_zero() {
                i += 1;
            }
            out.push((start, i - start));
        } else {
            i += 1;
        }
    }
    out
}

/// Deletes whole separating zero runs so neighbouring blocks fuse.
pub struct BlockMerge;

impl<S: Symbol> Strategy<S> for BlockMerge {
    fn name(&self) -> &'static str {
        "block-merge"
    }

    fn apply(&self, tape: &mut Tape<'_, S>) {
        let max_run = tape.params().max_run.unwrap_or(usize::MAX);
        let mut acted = false;
        loop {
            let budget = tape.remaining();
            let runs: Vec<_> = interior_zero_runs(tape.word())
                .into_iter()
                .filter(|&(_, len)| len <= budget && len <= max_run)
                .collect();
            let Some(&(start, len)) = runs.choose(tape.rng()) else {
                break;
            };
            for _ in 0..len {
                tape.delete(start);
            }
            acted = true;
        }
        if !acted {
            tape.degrade();
        }
    }
}

/// Shortens long zero runs (buffers) to `keep` zeros.
pub struct BufferDelete;

impl<S: Symbol> Strategy<S> for BufferDelete {
    fn name(&self) -> &'static str {
        "buffer-delete"
    }

    fn apply(&self, tape: &mut Tape<'_, S>) {
        let min_run = tape.params().min_run.unwrap_or(2).max(1);
        let keep = tape.params().keep.unwrap_or(min_run - 1).min(min_run - 1);
        let mut acted = false;
        loop {
            let budget = tape.remaining();
            let runs: Vec<_> = zero_runs_all(tape.word())
                .into_iter()
                .filter(|&(_, len)| len >= min_run && len - keep <= budget)
                .collect();
            let Some(&(start, len)) = runs.choose(tape.rng()) else {
                break;
            };
            for _ in 0..len - keep {
                tape.delete(start);
            }
            acted = true;
        }
        if !acted {
            tape.degrade();
        }
    }
}

/// Deletes the nonzero symbols next to a zero run until the run reaches
/// `target_run`, faking a buffer. Always grows the run that is cheapest to
/// complete.
pub struct FakeBuffer;

impl FakeBuffer {
    /// Nonzero deletions needed to grow the run at `(start, len)` to
    /// `target` by eating to the right (or left).
    fn cost<S: Symbol>(w: &[S], start: usize, len: usize, target: usize, right: bool) -> Option<usize> {
        let mut have = len;
        let mut cost = 0;
        let mut idx: isize = if right { (start + len) as isize } else { start as isize - 1 };
        while have < target {
            if idx < 0 || idx as usize >= w.len() {
                return None;
            }
            if w[idx as usize].is_zero() {
                have += 1;
            } else {
                cost += 1;
            }
            idx += if right { 1 } else { -1 };
        }
        Some(cost)
    }
}

impl<S: Symbol> Strategy<S> for FakeBuffer {
    fn name(&self) -> &'static str {
        "fake-buffer"
    }

    fn apply(&self, tape: &mut Tape<'_, S>) {
        let target = tape.params().target_run.unwrap_or(4).max(1);
        let mut acted = false;
        while tape.remaining() > 0 {
            let w = tape.word();
            let mut best: Option<(usize, usize, usize, bool)> = None;
            for (start, len) in zero_runs_all(w) {
                if len >= target {
                    continue;
                }
                for right in [true, false] {
                    if let Some(c) = Self::cost(w, start, len, target, right) {
                        if c > 0 && best.is_none_or(|b| c < b.0) {
                            best = Some((c, start, len, right));
                        }
                    }
                }
            }
            let Some((_, start, len, right)) = best else {
                break;
            };
            // Eat one nonzero neighbour at a time; runs merge as we go.
            let mut have = len;
            let mut start = start;
            while have < target && tape.remaining() > 0 {
                let next = if right { start + have } else { start.wrapping_sub(1) };
                let Some(s) = tape.word().get(next) else { break };
                if s.is_zero() {
                    have += 1;
                    if !right {
                        start -= 1;
                    }
                } else {
                    tape.delete(next);
                    acted = true;
                    if !right {
                        start -= 1;
                    }
                }
            }
        }
        if !acted {
            tape.degrade();
        }
    }
}

/// Splits the budget into random chunks and hands each to a random
/// strategy.
pub struct Composite<S: Symbol> {
    parts: Vec<Arc<dyn Strategy<S>>>,
}

impl<S: Symbol> Strategy<S> for Composite<S> {
    fn name(&self) -> &'static str {
        "composite"
    }

    fn apply(&self, tape: &mut Tape<'_, S>) {
        for _ in 0..8 {
            let remaining = tape.remaining();
            if remaining == 0 {
                break;
            }
            let chunk = tape.rng().gen_range(1..=remaining);
            let part = self.parts.choose(tape.rng()).expect("parts").clone();
            tape.with_budget(chunk, |t| part.apply(t));
        }
        if tape.remaining() > 0 {
            Random.apply(tape);
        }
    }
}

/// Everything needed to reproduce and diagnose one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub trial: usize,
    /// Seeds the message and the adversary; see [`run_trial`].
    pub seed: u64,
    pub strategy: String,
    pub budget: usize,
    pub message: Vec<Fe>,
    pub ops_used: usize,
    pub degraded: bool,
    pub op_log: serde_json::Value,
    pub candidate_list: Vec<(Fe, Fe)>,
    pub decoded: Option<Vec<Fe>>,
    pub error: Option<String>,
}

impl Transcript {
    pub fn success(&self) -> bool {
        self.decoded.as_ref() == Some(&self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: usize,
    pub successes: usize,
    pub degraded: usize,
    pub ops_total: usize,
    pub failures: Vec<Transcript>,
}

impl TrialReport {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            1.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

pub fn sample_message<C: Codec>(code: &C, dist: MessageDist, rng: &mut ChaCha8Rng) -> Vec<Fe> {
    let q = code.field().order();
    let k = code.message_len();
    match dist {
        MessageDist::Zero => vec![Fe::ZERO; k],
        MessageDist::Uniform => (0..k).map(|_| Fe(rng.gen_range(0..q))).collect(),
        MessageDist::Nonzero => loop {
            let m: Vec<Fe> = (0..k).map(|_| Fe(rng.gen_range(0..q))).collect();
            if m.iter().any(|x| !x.is_zero()) {
                break m;
            }
        },
    }
}

/// One encode, corrupt, decode round, fully determined by `seed`.
pub fn run_trial<C: Codec>(
    code: &C,
    dist: MessageDist,
    script: &AdversaryScript,
    registry: &StrategyRegistry<C::Symbol>,
    trial: usize,
    seed: u64,
) -> Result<Transcript> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let message = sample_message(code, dist, &mut rng);
    let script = AdversaryScript { seed: rng.next_u64(), ..script.clone() };
    let word = code.encode(&message)?;
    let source = |r: &mut ChaCha8Rng| code.random_symbol(r);
    let c = corrupt(&word, &script, registry, &source)?;
    let (decoded, error) = match code.decode(&c.word) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(Transcript {
        trial,
        seed,
        strategy: script.strategy.clone(),
        budget: script.budget,
        message,
        ops_used: c.ops_used,
        degraded: c.degraded,
        op_log: serde_json::to_value(&c.log)?,
        candidate_list: code.candidate_list(&c.word),
        decoded,
        error,
    })
}

/// Runs `trials` independent rounds in parallel. Trial `t` uses the seed
/// drawn from stream `t` of a ChaCha generator keyed by `seed`, so results
/// do not depend on scheduling. Failing rounds keep their transcripts.
pub fn trial<C: Codec>(
    code: &C,
    dist: MessageDist,
    script: &AdversaryScript,
    registry: &StrategyRegistry<C::Symbol>,
    trials: usize,
    seed: u64,
) -> Result<TrialReport> {
    registry.get(&script.strategy)?;
    let transcripts: Vec<Transcript> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(code, dist, script, registry, t, trial_seed(seed, t)))
        .collect::<Result<_>>()?;
    let mut report = TrialReport { trials, ..Default::default() };
    for tr in transcripts {
        report.ops_total += tr.ops_used;
        report.degraded += tr.degraded as usize;
        if tr.success() {
            report.successes += 1;
        } else {
            report.failures.push(tr);
        }
    }
    Ok(report)
}

pub fn trial_seed(master: u64, t: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(t as u64);
    rng.next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<u8> {
        bits_from_string(s).unwrap()
    }

    fn coin(rng: &mut ChaCha8Rng) -> u8 {
        rng.gen_range(0..2)
    }

    fn run(word: &[u8], strategy: &str, budget: usize, params: StrategyParams) -> Corruption<u8> {
        let script = AdversaryScript { strategy: strategy.into(), budget, seed: 7, params };
        corrupt(word, &script, &StrategyRegistry::standard(), &coin).unwrap()
    }

    #[test]
    fn budget_is_respected_and_log_replays() {
        let word = bits("1101000110100111");
        for name in StrategyRegistry::<u8>::standard().names() {
            for budget in [0, 1, 3, 9] {
                let c = run(&word, name, budget, StrategyParams::default());
                assert!(c.ops_used <= budget, "{name}");
                assert_eq!(c.ops_used, c.log.len());
                assert_eq!(replay(&word, &c.log).unwrap(), c.word, "{name}");
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let word = bits("1101000110100111");
        let a = run(&word, "composite", 6, StrategyParams::default());
        let b = run(&word, "composite", 6, StrategyParams::default());
        assert_eq!(a, b);
    }

    #[test]
    fn deletions_only_never_inserts() {
        let word = bits("1101000110100111");
        let params = StrategyParams { deletions_only: true, ..Default::default() };
        for name in StrategyRegistry::<u8>::standard().names() {
            let c = run(&word, name, 6, params.clone());
            assert!(c.log.iter().all(|r| r.op == OpKind::Del), "{name}");
        }
    }

    #[test]
    fn block_merge_fuses_blocks() {
        let c = run(&bits("11001100111"), "block-merge", 4, StrategyParams::default());
        assert_eq!(c.word, bits("1111111"));
        assert!(!c.degraded);
    }

    #[test]
    fn buffer_delete_trims_runs() {
        let params = StrategyParams { min_run: Some(4), keep: Some(1), ..Default::default() };
        let c = run(&bits("1000001"), "buffer-delete", 10, params);
        assert_eq!(c.word, bits("101"));
    }

    #[test]
    fn fake_buffer_grows_cheapest_run() {
        let params = StrategyParams { target_run: Some(4), ..Default::default() };
        let c = run(&bits("1110010011"), "fake-buffer", 1, params);
        assert_eq!(c.word, bits("111000011"));
        assert_eq!(c.ops_used, 1);
    }

    #[test]
    fn inapplicable_strategy_degrades() {
        let c = run(&bits("1111"), "block-merge", 2, StrategyParams::default());
        assert!(c.degraded);
        assert_eq!(c.ops_used, 2);
    }

    #[test]
    fn unknown_strategy_is_an_error() {
        let script = AdversaryScript { strategy: "nope".into(), budget: 1, seed: 0, params: Default::default() };
        assert!(corrupt(&[1u8], &script, &StrategyRegistry::standard(), &coin).is_err());
    }

    #[test]
    fn op_record_json() {
        let r: OpRecord<u8> = OpRecord { pos: 3, op: OpKind::Del, symbol: None };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"pos":3,"op":"del"}"#);
        let w = u8::word_to_json(&[1, 0, 1]);
        assert_eq!(w, serde_json::json!("101"));
        assert_eq!(u8::word_from_json(&w).unwrap(), vec![1, 0, 1]);
    }
}
