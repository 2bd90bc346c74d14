//! Parameter sweeps over (n, budget) producing CSV rows.

use std::time::Instant;

use crate::channel::{AdversaryScript, Transcript};
use crate::codec::{CodecRegistry, DynCodec};
use crate::config::{Budget, ExperimentConfig, NamedBudget};
use crate::error::Result;

/// First line of every results file. Bump the version when columns change.
pub const CSV_VERSION_LINE: &str = "# linsdel-experiment v1";
pub const CSV_HEADER: &str = "family,n,delta,budget,trials,success_rate,rate,wall_ms";

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub family: String,
    pub n: usize,
    pub delta: f64,
    pub budget: usize,
    pub trials: usize,
    pub success_rate: f64,
    pub rate: f64,
    pub wall_ms: u128,
    /// Budget within the instance guarantee (and, for deletion-only
    /// guarantees, the adversary restricted to deletions).
    pub guaranteed: bool,
}

impl Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{}",
            self.family, self.n, self.delta, self.budget, self.trials, self.success_rate, self.rate, self.wall_ms
        )
    }

    pub fn violates_guarantee(&self) -> bool {
        self.guaranteed && self.success_rate < 1.0
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<Row>,
    pub failures: Vec<Transcript>,
}

impl ExperimentOutput {
    pub fn violation(&self) -> bool {
        self.rows.iter().any(Row::violates_guarantee)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{CSV_VERSION_LINE}\n{CSV_HEADER}\n");
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }
}

pub fn resolve_budget(b: Budget, code: &dyn DynCodec) -> usize {
    match b {
        Budget::Ops(k) => k,
        Budget::Named(NamedBudget::Guarantee) => code.guaranteed_budget(),
        Budget::Named(NamedBudget::Proof) => code.proof_budget(),
    }
}

/// Runs every (n, budget) point of the sweep. With `timing` off the
/// `wall_ms` column is zero so that output is byte-identical across runs.
pub fn run_experiment(cfg: &ExperimentConfig, registry: &CodecRegistry, timing: bool) -> Result<ExperimentOutput> {
    let ns = if cfg.sweep.n.is_empty() { vec![cfg.code.n] } else { cfg.sweep.n.clone() };
    let budgets = if cfg.sweep.budget.is_empty() { vec![cfg.adversary.budget] } else { cfg.sweep.budget.clone() };
    let mut out = ExperimentOutput::default();
    for &n in &ns {
        let mut code_cfg = cfg.code.clone();
        if n != code_cfg.n {
            code_cfg.n = n;
            code_cfg.sync.symbols = None;
        }
        let code = registry.build(&code_cfg)?;
        for &b in &budgets {
            let budget = resolve_budget(b, code.as_ref());
            let script = AdversaryScript {
                strategy: cfg.adversary.strategy.clone(),
                budget,
                seed: 0,
                params: cfg.adversary.params.clone(),
            };
            let start = Instant::now();
            let report = code.run_trials(cfg.messages, &script, cfg.trials, cfg.seed)?;
            let wall_ms = if timing { start.elapsed().as_millis() } else { 0 };
            let rate = code.rate();
            out.rows.push(Row {
                family: code.family().to_string(),
                n,
                delta: cfg.code.delta,
                budget,
                trials: report.trials,
                success_rate: report.success_rate(),
                rate: *rate.numer() as f64 / *rate.denom() as f64,
                wall_ms,
                guaranteed: budget <= code.guaranteed_budget(),
            });
            out.failures.extend(report.failures);
        }
    }
    Ok(out)
}
