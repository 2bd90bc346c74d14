//! Pair code over `GF(q) x GF(q)`, linear over `GF(q)`.
//!
//! A base codeword `c` is sent as `((c_1, S_1 c_1), ..., (c_n, S_n c_n))`
//! where `S` is a synchronization string of nonzero field elements. Each
//! received pair `(a, b)` with `b != 0` yields the indexed entry
//! `(b / a, a) = (S_i, c_i)`; zero pairs carry no position information and
//! are dropped.

use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::basecode::{BaseCode, ReedSolomon};
use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::syncstring::{cid_decode, SyncString};

/// One symbol of the pair code. Serializes as a two-element array.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pair(pub Fe, pub Fe);

impl Pair {
    pub fn is_zero(&self) -> bool {
        self.0.is_zero() && self.1.is_zero()
    }
}

/// Relative distance the base code needs for the pair code:
/// `(1 + δ + 13ε) / 2`.
pub fn half_target_distance(delta: f64, epsilon: f64) -> f64 {
    (1.0 + delta + 13.0 * epsilon) / 2.0
}

/// Smallest distance `d` with `d >= relative * n`, tolerant of float noise
/// in the product.
pub fn required_distance(relative: f64, n: usize) -> usize {
    ((relative * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Largest RS dimension whose distance `n - k + 1` meets `relative * n`.
pub fn derive_dimension(n: usize, relative: f64) -> Result<usize> {
    let d = required_distance(relative, n);
    if d == 0 || d > n {
        return Err(Error::params(format!(
            "base distance {relative} * n = {d} is not achievable at n = {n}"
        )));
    }
    Ok(n + 1 - d)
}

pub(crate) fn check_fraction(name: &str, v: f64, hi: f64) -> Result<()> {
    if v > 0.0 && v < hi {
        Ok(())
    } else {
        Err(Error::params(format!("{name} must lie in (0, {hi}), got {v}")))
    }
}

#[derive(Clone, Debug)]
pub struct HalfLinearCode {
    base: Arc<dyn BaseCode>,
    sync: SyncString,
    sync_fe: Vec<Fe>,
    delta: f64,
    epsilon: f64,
}

impl HalfLinearCode {
    /// Wraps an existing base code. Checks the distance requirement and the
    /// sync string shape.
    pub fn new(base: Arc<dyn BaseCode>, sync: SyncString, delta: f64, epsilon: f64) -> Result<Self> {
        check_fraction("delta", delta, 1.0)?;
        check_fraction("epsilon", epsilon, 1.0)?;
        let n = base.len();
        if sync.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: sync.len() });
        }
        let target = half_target_distance(delta, epsilon);
        let need = required_distance(target, n);
        if base.min_distance() < need {
            return Err(Error::params(format!(
                "base distance {} < δ_C·n = {need} with δ_C = (1 + δ + 13ε)/2 = {target}",
                base.min_distance()
            )));
        }
        let sync_fe = sync.field_symbols(base.field())?;
        Ok(HalfLinearCode { base, sync, sync_fe, delta, epsilon })
    }

    /// Reed-Solomon base code with the largest admissible dimension.
    /// Rejects parameters where that dimension misses `k/n > 1 - δ_C - ε`.
    pub fn with_reed_solomon(field: Field, sync: SyncString, delta: f64, epsilon: f64) -> Result<Self> {
        check_fraction("delta", delta, 1.0)?;
        check_fraction("epsilon", epsilon, 1.0)?;
        let n = sync.len();
        let target = half_target_distance(delta, epsilon);
        let k = derive_dimension(n, target)?;
        if (k as f64) / (n as f64) <= 1.0 - target - epsilon {
            return Err(Error::params(format!(
                "base rate k/n = {k}/{n} violates R_C > 1 - δ_C - ε = {}",
                1.0 - target - epsilon
            )));
        }
        let rs = ReedSolomon::new(field, n, k)?;
        Self::new(Arc::new(rs), sync, delta, epsilon)
    }

    pub fn field(&self) -> &Field {
        self.base.field()
    }

    pub fn base(&self) -> &Arc<dyn BaseCode> {
        &self.base
    }

    pub fn sync(&self) -> &SyncString {
        &self.sync
    }

    pub fn sync_symbols(&self) -> &[Fe] {
        &self.sync_fe
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.len() == 0
    }

    pub fn dimension(&self) -> usize {
        self.base.dimension()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn target_distance(&self) -> f64 {
        half_target_distance(self.delta, self.epsilon)
    }

    /// `k / (2n)`: `k` symbols of `GF(q)` against `n` symbols of `GF(q)^2`.
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.dimension() as u64, 2 * self.len() as u64)
    }

    /// Number of insdel operations the decoder is guaranteed to absorb.
    pub fn guaranteed_budget(&self) -> usize {
        (self.delta * self.len() as f64 + 1e-9).floor() as usize
    }

    pub fn encode(&self, msg: &[Fe]) -> Result<Vec<Pair>> {
        let c = self.base.encode(msg)?;
        let f = self.field();
        Ok(c.iter().zip(&self.sync_fe).map(|(&ci, &si)| Pair(ci, f.mul(si, ci))).collect())
    }

    /// Indexed entries recovered from a received word. Pairs with `b = 0`
    /// are skipped; so are pairs with `a = 0 != b`, which only arise from
    /// corruption and have no defined index.
    pub fn candidate_list(&self, y: &[Pair]) -> Vec<(Fe, Fe)> {
        let f = self.field();
        y.iter()
            .filter(|p| !p.1.is_zero() && !p.0.is_zero())
            .map(|&Pair(a, b)| (f.div(b, a).expect("a is nonzero"), a))
            .collect()
    }

    pub fn decode(&self, y: &[Pair]) -> Result<Vec<Fe>> {
        self.decode_list(&self.candidate_list(y))
    }

    pub(crate) fn decode_list(&self, list: &[(Fe, Fe)]) -> Result<Vec<Fe>> {
        if list.is_empty() {
            return Ok(vec![Fe::ZERO; self.dimension()]);
        }
        cid_decode(list, &self.sync_fe, self.base.as_ref())
    }
}
