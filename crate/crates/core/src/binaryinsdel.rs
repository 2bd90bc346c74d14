//! Binary linear code against deletions, by concatenating the pair code
//! with a short binary inner code.
//!
//! Every outer symbol `(σ_i, S_i σ_i)` becomes
//! `Inner(σ_i) 0^{2w} Inner(S_i σ_i)` and consecutive outer symbols are
//! separated by `0^{5w}`, where `w = ⌈δ_in m⌉`. The inner code is certified
//! for two properties:
//!
//! 1. substrings of length at least `m - 2w + ρm` of two distinct
//!    codewords have LCS below `min(len) - ρm`;
//! 2. every length-`w` window of a nonzero codeword holds at least `ρm + 1`
//!    ones.
//!
//! Property 2 keeps codeword-internal zero runs shorter than any buffer, so
//! the decoder can find buffers by run length alone.

use std::fmt;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::Fe;
use crate::halflinear::{HalfLinearCode, Pair};

/// Integer geometry of an inner code.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerParams {
    pub m: usize,
    pub k_in: usize,
    pub delta_in: f64,
    pub rho: f64,
    /// `⌈δ_in m⌉`: Property 2 window, and the unit of all buffer lengths.
    pub window: usize,
    /// `⌊ρ m⌋`.
    pub rho_m: usize,
}

impl InnerParams {
    pub fn new(m: usize, k_in: usize, delta_in: f64, rho: f64) -> Result<Self> {
        if !(1..=16).contains(&k_in) {
            return Err(Error::params(format!("k_in must lie in 1..=16, got {k_in}")));
        }
        if !(delta_in > 0.0 && delta_in < 0.5) || rho < 0.0 {
            return Err(Error::params("need 0 < δ_in < 1/2 and ρ >= 0"));
        }
        let window = (delta_in * m as f64 - 1e-9).ceil() as usize;
        let rho_m = (rho * m as f64 + 1e-9).floor() as usize;
        if window == 0 || window > m {
            return Err(Error::params(format!("window ⌈δ_in m⌉ = {window} must lie in 1..={m}")));
        }
        if rho_m + 1 > window {
            return Err(Error::params(format!(
                "infeasible: ρm + 1 = {} ones cannot fit in a window of δ_in m = {window} bits",
                rho_m + 1
            )));
        }
        Ok(InnerParams { m, k_in, delta_in, rho, window, rho_m })
    }

    /// Shortest substring length Property 1 constrains: `m - 2w + ρm`.
    pub fn min_substring_len(&self) -> usize {
        (self.m + self.rho_m).saturating_sub(2 * self.window).max(1)
    }

    pub fn inner_buffer(&self) -> usize {
        2 * self.window
    }

    pub fn outer_buffer(&self) -> usize {
        5 * self.window
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: usize },
    Unchecked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certification {
    pub property1: CheckMode,
    pub property2: CheckMode,
}

/// A failed property check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "property")]
pub enum Counterexample {
    /// Window `[start, start + w)` of the codeword of `message` has too few
    /// ones.
    Window { message: u32, start: usize, ones: usize },
    Lcs {
        a: u32,
        b: u32,
        start_a: usize,
        len_a: usize,
        start_b: usize,
        len_b: usize,
        lcs: usize,
    },
    Rank,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Counterexample::Window { message, start, ones } => {
                write!(f, "codeword {message} has {ones} ones in the window at {start}")
            }
            Counterexample::Lcs { a, b, start_a, len_a, start_b, len_b, lcs } => write!(
                f,
                "codewords {a}, {b}: substrings [{start_a}; {len_a}] and [{start_b}; {len_b}] share an LCS of {lcs}"
            ),
            Counterexample::Rank => write!(f, "generator matrix is rank deficient"),
        }
    }
}

/// Binary linear `[m, k_in]` code given by an `m x k_in` generator matrix.
#[derive(Clone, Debug)]
pub struct InnerCode {
    params: InnerParams,
    /// Row `i` as a `k_in`-bit mask; bit `k_in - 1 - j` is entry `(i, j)`.
    rows: Vec<u32>,
    codewords: Vec<Vec<u8>>,
    certification: Certification,
    seed: Option<u64>,
}

/// JSON form of an [`InnerCode`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerCodeRecord {
    pub m: usize,
    pub k_in: usize,
    pub delta_in: f64,
    pub rho: f64,
    /// Row-major 0/1 string of length `m * k_in`.
    pub generator: String,
    pub certification: Certification,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[inline]
fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

impl InnerCode {
    /// Builds the code from generator rows without certifying anything
    /// beyond rank.
    pub fn from_rows(params: InnerParams, rows: Vec<u32>) -> Result<Self> {
        if rows.len() != params.m {
            return Err(Error::LengthMismatch { expected: params.m, actual: rows.len() });
        }
        if rows.iter().any(|&r| r >> params.k_in != 0) {
            return Err(Error::params("generator row wider than k_in"));
        }
        let codewords: Vec<Vec<u8>> = (0..1u32 << params.k_in)
            .map(|v| rows.iter().map(|&r| parity(r & v)).collect())
            .collect();
        if codewords.iter().skip(1).any(|c| c.iter().all(|&b| b == 0)) {
            return Err(Error::params(Counterexample::Rank.to_string()));
        }
        let unchecked = Certification { property1: CheckMode::Unchecked, property2: CheckMode::Unchecked };
        Ok(InnerCode { params, rows, codewords, certification: unchecked, seed: None })
    }

    pub fn from_record(rec: &InnerCodeRecord) -> Result<Self> {
        let params = InnerParams::new(rec.m, rec.k_in, rec.delta_in, rec.rho)?;
        let bits: Vec<u8> = rec
            .generator
            .bytes()
            .map(|b| match b {
                b'0' => Ok(0),
                b'1' => Ok(1),
                _ => Err(Error::Format(format!("generator contains {:?}", b as char))),
            })
            .collect::<Result<_>>()?;
        if bits.len() != rec.m * rec.k_in {
            return Err(Error::LengthMismatch { expected: rec.m * rec.k_in, actual: bits.len() });
        }
        let rows = bits.chunks(rec.k_in).map(|c| c.iter().fold(0u32, |acc, &b| acc << 1 | b as u32)).collect();
        let mut code = Self::from_rows(params, rows)?;
        // Property 2 is cheap, so it is always re-established on load.
        if rec.certification.property2 != CheckMode::Unchecked {
            code.check_property2().map_err(|c| Error::params(c.to_string()))?;
        }
        code.certification = rec.certification;
        code.seed = rec.seed;
        Ok(code)
    }

    pub fn record(&self) -> InnerCodeRecord {
        let generator = self
            .rows
            .iter()
            .flat_map(|&r| (0..self.params.k_in).rev().map(move |j| if r >> j & 1 == 1 { '1' } else { '0' }))
            .collect();
        InnerCodeRecord {
            m: self.params.m,
            k_in: self.params.k_in,
            delta_in: self.params.delta_in,
            rho: self.params.rho,
            generator,
            certification: self.certification,
            seed: self.seed,
        }
    }

    pub fn params(&self) -> &InnerParams {
        &self.params
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn certification(&self) -> Certification {
        self.certification
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn codeword(&self, message: u32) -> &[u8] {
        &self.codewords[message as usize]
    }

    pub fn codewords(&self) -> &[Vec<u8>] {
        &self.codewords
    }

    /// `Gv` over GF(2); `bits` is the message, most significant bit first.
    pub fn encode(&self, bits: &[u8]) -> Result<Vec<u8>> {
        if bits.len() != self.params.k_in {
            return Err(Error::LengthMismatch { expected: self.params.k_in, actual: bits.len() });
        }
        let v = bits.iter().fold(0u32, |acc, &b| acc << 1 | (b & 1) as u32);
        Ok(self.codewords[v as usize].clone())
    }

    /// The unique codeword containing `received` as a subsequence, as a
    /// message integer; `None` when zero or several codewords qualify.
    /// A codeword that produced `received` by deletions is always among the
    /// candidates, so a returned message is never wrong.
    pub fn decode_message(&self, received: &[u8]) -> Option<u32> {
        let mut found = None;
        for (v, c) in self.codewords.iter().enumerate() {
            if is_subsequence(received, c) {
                if found.is_some() {
                    return None;
                }
                found = Some(v as u32);
            }
        }
        found
    }

    pub fn decode(&self, received: &[u8]) -> Option<Vec<u8>> {
        let k = self.params.k_in;
        self.decode_message(received).map(|v| (0..k).rev().map(|j| (v >> j & 1) as u8).collect())
    }

    /// Exhaustive Property 2: sliding-window popcount on every nonzero
    /// codeword.
    pub fn check_property2(&self) -> std::result::Result<(), Counterexample> {
        let w = self.params.window;
        let need = self.params.rho_m + 1;
        for (v, c) in self.codewords.iter().enumerate().skip(1) {
            let mut ones: usize = c[..w].iter().map(|&b| b as usize).sum();
            for start in 0..=c.len() - w {
                if start > 0 {
                    ones = ones + c[start + w - 1] as usize - c[start - 1] as usize;
                }
                if ones < need {
                    return Err(Counterexample::Window { message: v as u32, start, ones });
                }
            }
        }
        Ok(())
    }

    /// Property 1. Exhaustive mode covers every unordered pair of distinct
    /// codewords and every pair of start offsets; one LCS table per start
    /// pair covers every pair of end offsets. Sampled mode draws
    /// `(pair, start, start)` triples.
    pub fn check_property1(
        &self,
        mode: CheckMode,
        seed: u64,
        threads: Option<usize>,
    ) -> std::result::Result<CheckMode, Counterexample> {
        let q = self.codewords.len() as u32;
        let span = self.params.m - self.params.min_substring_len() + 1;
        let run = || match mode {
            CheckMode::Unchecked => Ok(CheckMode::Unchecked),
            CheckMode::Exhaustive => {
                let pairs: Vec<(u32, u32)> = (0..q).flat_map(|a| (a + 1..q).map(move |b| (a, b))).collect();
                match pairs.par_iter().find_map_first(|&(a, b)| {
                    (0..span)
                        .flat_map(|sa| (0..span).map(move |sb| (sa, sb)))
                        .find_map(|(sa, sb)| self.property1_from(a, b, sa, sb))
                }) {
                    Some(c) => Err(c),
                    None => Ok(CheckMode::Exhaustive),
                }
            }
            CheckMode::Sampled { samples } => {
                let found = (0..samples).into_par_iter().find_map_first(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    let a = rng.gen_range(0..q);
                    let mut b = rng.gen_range(0..q - 1);
                    if b >= a {
                        b += 1;
                    }
                    self.property1_from(a, b, rng.gen_range(0..span), rng.gen_range(0..span))
                });
                match found {
                    Some(c) => Err(c),
                    None => Ok(mode),
                }
            }
        };
        match threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .expect("thread pool")
                .install(run),
            None => run(),
        }
    }

    fn property1_from(&self, a: u32, b: u32, sa: usize, sb: usize) -> Option<Counterexample> {
        let x = &self.codewords[a as usize][sa..];
        let y = &self.codewords[b as usize][sb..];
        let min_len = self.params.min_substring_len();
        let rho_m = self.params.rho_m;
        let w = y.len() + 1;
        let mut table = vec![0u16; (x.len() + 1) * w];
        for i in 1..=x.len() {
            for j in 1..=y.len() {
                table[i * w + j] = if x[i - 1] == y[j - 1] {
                    table[(i - 1) * w + j - 1] + 1
                } else {
                    table[(i - 1) * w + j].max(table[i * w + j - 1])
                };
            }
        }
        for la in min_len..=x.len() {
            for lb in min_len..=y.len() {
                let l = table[la * w + lb] as usize;
                if l + rho_m >= la.min(lb) {
                    return Some(Counterexample::Lcs {
                        a,
                        b,
                        start_a: sa,
                        len_a: la,
                        start_b: sb,
                        len_b: lb,
                        lcs: l,
                    });
                }
            }
        }
        None
    }
}

fn is_subsequence(needle: &[u8], hay: &[u8]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|x| it.any(|y| y == x))
}

/// Search limits for [`inner_search`].
#[derive(Clone, Copy, Debug)]
pub struct SearchBudget {
    pub attempts: usize,
    pub nodes_per_attempt: usize,
    pub threads: Option<usize>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { attempts: 64, nodes_per_attempt: 200_000, threads: None }
    }
}

/// Seeded randomized search for a certified inner code.
///
/// Each attempt draws generator rows one at a time in random order,
/// backtracking whenever the window that just completed violates
/// Property 2 for some nonzero message. A completed matrix is then checked
/// for Property 1 under `mode`; failures move on to the next attempt.
pub fn inner_search(params: InnerParams, seed: u64, mode: CheckMode, budget: SearchBudget) -> Result<InnerCode> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget.attempts {
        let attempt_seed = master.next_u64();
        let Some(rows) = window_dfs(&params, attempt_seed, budget.nodes_per_attempt) else {
            continue;
        };
        let mut code = match InnerCode::from_rows(params, rows) {
            Ok(c) => c,
            Err(_) => continue,
        };
        if code.check_property2().is_err() {
            continue;
        }
        match code.check_property1(mode, attempt_seed, budget.threads) {
            Ok(p1) => {
                code.certification = Certification { property1: p1, property2: CheckMode::Exhaustive };
                code.seed = Some(seed);
                return Ok(code);
            }
            Err(_) => continue,
        }
    }
    Err(Error::SearchExhausted { attempts: budget.attempts })
}

fn window_dfs(params: &InnerParams, seed: u64, node_budget: usize) -> Option<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = params.k_in;
    let w = params.window;
    let need = params.rho_m + 1;
    let nonzero: Vec<u32> = (1..1u32 << k).collect();
    let window_ok = |rows: &[u32]| -> bool {
        if rows.len() < w {
            return true;
        }
        let win = &rows[rows.len() - w..];
        nonzero.iter().all(|&v| win.iter().filter(|&&r| parity(r & v) == 1).count() >= need)
    };
    let mut rows: Vec<u32> = Vec::with_capacity(params.m);
    let mut stack: Vec<(Vec<u32>, usize)> = Vec::with_capacity(params.m);
    let mut fresh = || {
        let mut c = nonzero.clone();
        c.shuffle(&mut rng);
        c
    };
    stack.push((fresh(), 0));
    let mut nodes = 0;
    while let Some((cands, next)) = stack.last_mut() {
        if *next >= cands.len() {
            stack.pop();
            rows.pop();
            continue;
        }
        let r = cands[*next];
        *next += 1;
        nodes += 1;
        if nodes > node_budget {
            return None;
        }
        rows.push(r);
        if window_ok(&rows) {
            if rows.len() == params.m {
                return Some(rows);
            }
            stack.push((fresh(), 0));
        } else {
            rows.pop();
        }
    }
    None
}

/// The concatenated binary code.
#[derive(Clone, Debug)]
pub struct BinaryCode {
    outer: HalfLinearCode,
    inner: InnerCode,
}

impl BinaryCode {
    pub fn new(outer: HalfLinearCode, inner: InnerCode) -> Result<Self> {
        let f = outer.field();
        if !f.is_binary() {
            return Err(Error::NotBinaryField);
        }
        if f.degree() as usize != inner.params().k_in {
            return Err(Error::params(format!(
                "inner dimension k_in = {} must equal log2 q = {}",
                inner.params().k_in,
                f.degree()
            )));
        }
        if !f.degree().is_multiple_of(2) {
            return Err(Error::params("outer field must have square order 2^(2e)"));
        }
        Ok(BinaryCode { outer, inner })
    }

    pub fn outer(&self) -> &HalfLinearCode {
        &self.outer
    }

    pub fn inner(&self) -> &InnerCode {
        &self.inner
    }

    pub fn dimension(&self) -> usize {
        self.outer.dimension()
    }

    /// `2mn + 2wn + 5w(n - 1)` bits.
    pub fn block_len(&self) -> usize {
        let p = self.inner.params();
        let n = self.outer.len();
        2 * p.m * n + p.inner_buffer() * n + p.outer_buffer() * (n - 1)
    }

    /// `k log q / block_len`.
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new((self.dimension() * self.inner.params().k_in) as u64, self.block_len() as u64)
    }

    /// `R_in R_out / (2 + 7 δ_in)` with `R_in = k_in / m`, `R_out = k / 2n`
    /// and `δ_in = w / m`.
    pub fn rate_bound(&self) -> Ratio<u64> {
        let p = self.inner.params();
        let r_in = Ratio::new(p.k_in as u64, p.m as u64);
        let r_out = self.outer.rate();
        let delta_in = Ratio::new(p.window as u64, p.m as u64);
        r_in * r_out / (Ratio::from_integer(2) + Ratio::from_integer(7) * delta_in)
    }

    /// `⌊ρm · δ_out · n⌋` deletions.
    pub fn guaranteed_budget(&self) -> usize {
        let p = self.inner.params();
        (p.rho_m as f64 * self.outer.delta() * self.outer.len() as f64 + 1e-9).floor() as usize
    }

    pub fn encode(&self, msg: &[Fe]) -> Result<Vec<u8>> {
        let sigma = self.outer.encode(msg)?;
        let p = *self.inner.params();
        let mut out = Vec::with_capacity(self.block_len());
        for (i, Pair(a, b)) in sigma.iter().enumerate() {
            if i > 0 {
                out.extend(std::iter::repeat_n(0u8, p.outer_buffer()));
            }
            out.extend_from_slice(self.inner.codeword(a.value()));
            out.extend(std::iter::repeat_n(0u8, p.inner_buffer()));
            out.extend_from_slice(self.inner.codeword(b.value()));
        }
        Ok(out)
    }

    /// Outer symbols recovered from `y` by buffer identification and inner
    /// decoding, in received order.
    pub fn received_pairs(&self, y: &[u8]) -> Vec<Pair> {
        let p = self.inner.params();
        let (w, m) = (p.window, p.m);
        let mut pairs = Vec::new();
        for segment in split_on_zero_runs(y, |len| len >= 4 * w) {
            let seg = trim_zeros(segment);
            if seg.is_empty() {
                continue;
            }
            let inner_buffers: Vec<(usize, usize)> =
                zero_runs(seg).filter(|&(_, len)| len >= w && len < 4 * w).collect();
            let [(start, len)] = inner_buffers[..] else {
                continue;
            };
            let (c, c2) = (&seg[..start], &seg[start + len..]);
            let fits = |x: &[u8]| x.len() + 2 * w > m && x.len() <= m;
            if !fits(c) || !fits(c2) {
                continue;
            }
            if let (Some(a), Some(b)) = (self.inner.decode_message(c), self.inner.decode_message(c2)) {
                pairs.push(Pair(Fe(a), Fe(b)));
            }
        }
        pairs
    }

    pub fn candidate_list(&self, y: &[u8]) -> Vec<(Fe, Fe)> {
        self.outer.candidate_list(&self.received_pairs(y))
    }

    pub fn decode(&self, y: &[u8]) -> Result<Vec<Fe>> {
        if y.iter().all(|&b| b == 0) {
            return Ok(vec![Fe::ZERO; self.dimension()]);
        }
        self.outer.decode(&self.received_pairs(y))
    }
}

/// Inner geometry of the asymptotic construction: `δ_in = 1/6`, `ρ = 1/17`
/// and `R_in = δ_in / 16`, so `m = 96 k_in`. Far too long to certify
/// Property 1 exhaustively; use sampled checking.
pub fn asymptotic_inner_params(k_in: usize) -> Result<InnerParams> {
    InnerParams::new(96 * k_in, k_in, 1.0 / 6.0, 1.0 / 17.0)
}

/// Rate bound and deletion fraction of the asymptotic construction for
/// an outer code with parameters `(δ_out, ε_out)`, in exact arithmetic:
/// `R_in R_out / (2 + 7 δ_in)` with `R_out = (1 - δ_out)/4 - ε_out`, and
/// `δ = δ_out ρ / (2 + 7 δ_in)`.
pub fn asymptotic_tradeoff(delta_out: Ratio<i128>, eps_out: Ratio<i128>) -> (Ratio<i128>, Ratio<i128>) {
    let delta_in = Ratio::new(1, 6);
    let rho = Ratio::new(1, 17);
    let r_in = delta_in / 16;
    let r_out = (Ratio::from_integer(1) - delta_out) / 4 - eps_out;
    let spread = Ratio::from_integer(2) + delta_in * 7;
    (r_in * r_out / spread, delta_out * rho / spread)
}

/// Maximal zero runs of `s` as `(start, len)`.
pub fn zero_runs(s: &[u8]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let mut i = 0;
    std::iter::from_fn(move || {
        while i < s.len() && s[i] != 0 {
            i += 1;
        }
        if i >= s.len() {
            return None;
        }
        let start = i;
        while i < s.len() && s[i] == 0 {
            i += 1;
        }
        Some((start, i - start))
    })
}

fn split_on_zero_runs(s: &[u8], is_separator: impl Fn(usize) -> bool) -> Vec<&[u8]> {
    let mut out = Vec::new();
    let mut from = 0;
    for (start, len) in zero_runs(s) {
        if is_separator(len) {
            out.push(&s[from..start]);
            from = start + len;
        }
    }
    out.push(&s[from..]);
    out
}

fn trim_zeros(s: &[u8]) -> &[u8] {
    let start = s.iter().position(|&b| b != 0).unwrap_or(s.len());
    let end = s.iter().rposition(|&b| b != 0).map_or(start, |e| e + 1);
    &s[start..end]
}
