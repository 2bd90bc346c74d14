//! `linsdel`: build code instances, push words through the adversarial
//! channel, certify inner codes and run experiment sweeps.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when a run
//! inside an instance's guarantee fails to decode or a certificate check
//! finds a counterexample.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use linear_insdel::binaryinsdel::{CheckMode, InnerCode};
use linear_insdel::channel::{AdversaryScript, StrategyParams};
use linear_insdel::config::{CodeConfig, ExperimentConfig, InnerConfig};
use linear_insdel::experiment::run_experiment;
use linear_insdel::syncstring::generate_sync;
use linear_insdel::{CodecRegistry, DynCodec, Fe};

#[derive(Parser)]
#[command(name = "linsdel", version, about = "Linear insertion/deletion codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a code instance from a config and write it fully materialized.
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a message (JSON array of field elements).
    Encode {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        message: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a scripted adversary to an encoded word.
    Corrupt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        strategy: String,
        /// Operation count, or `guarantee` / `proof`.
        #[arg(long)]
        budget: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Strategy knobs as a JSON object.
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a (possibly corrupted) word.
    Decode {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search for or re-check an inner code and write its certificate.
    CertifyInner {
        /// Inner code config; if it carries a generator that matrix is
        /// checked, otherwise one is searched for.
        #[arg(long)]
        config: PathBuf,
        /// Property 1 mode: exhaustive, sampled or unchecked.
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate and verify a synchronization string.
    SyncGen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        alphabet: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment sweep and write CSV.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write failing-trial transcripts as JSON lines.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        /// Write 0 in the wall_ms column so output is reproducible.
        #[arg(long)]
        no_timing: bool,
    },
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    Violation(String),
}

fn read_json(path: &Path) -> Result<Value> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("parsing {}", path.display()))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Box<dyn DynCodec>> {
    let cfg: CodeConfig = serde_json::from_value(read_json(path)?).context("instance file")?;
    Ok(CodecRegistry::standard().build(&cfg)?)
}

/// Accepts either a bare word or an object with a `word` field.
fn word_of(v: Value) -> Value {
    match v {
        Value::Object(mut m) if m.contains_key("word") => m.remove("word").expect("checked"),
        other => other,
    }
}

fn parse_budget(s: &str, code: &dyn DynCodec) -> Result<usize> {
    match s {
        "guarantee" => Ok(code.guaranteed_budget()),
        "proof" => Ok(code.proof_budget()),
        _ => s.parse().with_context(|| format!("budget `{s}` is neither a count nor guarantee/proof")),
    }
}

fn parse_mode(mode: &str, samples: usize) -> Result<CheckMode> {
    Ok(match mode {
        "exhaustive" => CheckMode::Exhaustive,
        "sampled" => CheckMode::Sampled { samples },
        "unchecked" => CheckMode::Unchecked,
        _ => bail!("unknown mode `{mode}`"),
    })
}

fn run(cmd: Cmd) -> Result<Status> {
    match cmd {
        Cmd::Build { config, out } => {
            let cfg: CodeConfig = serde_json::from_value(read_json(&config)?).context("code config")?;
            let code = CodecRegistry::standard().build(&cfg)?;
            write_json(&out, &serde_json::to_value(code.config())?)?;
            println!("{}", code.summary());
        }
        Cmd::Encode { instance, message, out } => {
            let code = load_instance(&instance)?;
            let msg: Vec<Fe> = serde_json::from_value(word_of(read_json(&message)?)).context("message")?;
            let word = code.encode_json(&msg)?;
            write_json(&out, &json!({ "message": msg, "word": word }))?;
        }
        Cmd::Corrupt { instance, input, strategy, budget, seed, params, out } => {
            let code = load_instance(&instance)?;
            let params: StrategyParams = match params {
                Some(p) => serde_json::from_str(&p).context("--params")?,
                None => StrategyParams::default(),
            };
            let script = AdversaryScript { strategy, budget: parse_budget(&budget, code.as_ref())?, seed, params };
            let c = code.corrupt_json(&word_of(read_json(&input)?), &script)?;
            write_json(&out, &json!({ "script": script, "word": c.word, "ops_used": c.ops_used, "log": c.log, "degraded": c.degraded }))?;
        }
        Cmd::Decode { instance, input, out } => {
            let code = load_instance(&instance)?;
            let word = word_of(read_json(&input)?);
            let candidates = code.candidates_json(&word)?;
            let msg = code.decode_json(&word)?;
            write_json(&out, &json!({ "message": msg, "candidate_list": candidates }))?;
        }
        Cmd::CertifyInner { config, mode, samples, threads, out } => {
            let mut cfg: InnerConfig = serde_json::from_value(read_json(&config)?).context("inner config")?;
            let mode = parse_mode(&mode, samples)?;
            cfg.verify = mode;
            cfg.threads = threads.or(cfg.threads);
            let code: InnerCode = match &cfg.generator {
                None => cfg.build()?,
                Some(_) => {
                    let mut unchecked = cfg.clone();
                    unchecked.certification = None;
                    unchecked.build()?
                }
            };
            let p2 = code.check_property2();
            let p1 = code.check_property1(mode, cfg.seed, cfg.threads);
            let record = code.record();
            let counterexample = match (&p2, &p1) {
                (Err(c), _) | (Ok(()), Err(c)) => Some(c.clone()),
                _ => None,
            };
            let mut cert_cfg = cfg.materialized(&code);
            if let (Ok(()), Ok(p1_mode)) = (&p2, &p1) {
                cert_cfg.certification = Some(linear_insdel::binaryinsdel::Certification {
                    property1: *p1_mode,
                    property2: CheckMode::Exhaustive,
                });
            }
            write_json(
                &out,
                &json!({
                    "inner": cert_cfg,
                    "generator": record.generator,
                    "window": code.params().window,
                    "rho_m": code.params().rho_m,
                    "min_substring_len": code.params().min_substring_len(),
                    "property1": p1.as_ref().map(|m| json!(m)).unwrap_or(Value::Null),
                    "property2_ok": p2.is_ok(),
                    "counterexample": counterexample,
                }),
            )?;
            if let Some(c) = counterexample {
                return Ok(Status::Violation(format!("certification failed: {c}")));
            }
        }
        Cmd::SyncGen { n, epsilon, alphabet, seed, out } => {
            let s = generate_sync(n, epsilon, alphabet, seed)?;
            write_json(&out, &serde_json::to_value(&s)?)?;
        }
        Cmd::Experiment { config, out, transcripts, no_timing } => {
            let cfg: ExperimentConfig = serde_json::from_value(read_json(&config)?).context("experiment config")?;
            let result = run_experiment(&cfg, &CodecRegistry::standard(), !no_timing)?;
            fs::write(&out, result.to_csv()).with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = transcripts {
                let mut f = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
                for t in &result.failures {
                    writeln!(f, "{}", serde_json::to_string(t)?)?;
                }
            }
            if result.violation() {
                let bad: Vec<String> =
                    result.rows.iter().filter(|r| r.violates_guarantee()).map(|r| r.csv()).collect();
                return Ok(Status::Violation(format!("guarantee violated at: {}", bad.join("; "))));
            }
        }
    }
    Ok(Status::Ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation(msg)) => {
            eprintln!("linsdel: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("linsdel: {e:#}");
            ExitCode::from(1)
        }
    }
}
