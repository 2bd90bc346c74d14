//! Flattened, fully `GF(q)`-linear variant of the pair code.
//!
//! Each pair is written as two consecutive field symbols and adjacent pairs
//! are separated by two zeros:
//! `c_1, S_1 c_1, 0, 0, c_2, S_2 c_2, 0, 0, ..., c_n, S_n c_n`.
//! Decoding splits the received word on zero runs and keeps only the
//! zero-free blocks of length exactly two.

use std::sync::Arc;

use num_rational::Ratio;

use crate::basecode::{BaseCode, ReedSolomon};
use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::halflinear::{check_fraction, derive_dimension, required_distance};
use crate::syncstring::{cid_decode, SyncString};

/// `(1 + 4δ + 13ε) / 2`.
pub fn full_target_distance(delta: f64, epsilon: f64) -> f64 {
    (1.0 + 4.0 * delta + 13.0 * epsilon) / 2.0
}

/// Maximal zero-free substrings of `y`, in order.
pub fn parse_blocks(y: &[Fe]) -> Vec<&[Fe]> {
    y.split(|x| x.is_zero()).filter(|b| !b.is_empty()).collect()
}

#[derive(Clone, Debug)]
pub struct FullLinearCode {
    base: Arc<dyn BaseCode>,
    sync: SyncString,
    sync_fe: Vec<Fe>,
    delta: f64,
    epsilon: f64,
}

impl FullLinearCode {
    pub fn new(base: Arc<dyn BaseCode>, sync: SyncString, delta: f64, epsilon: f64) -> Result<Self> {
        check_fraction("delta", delta, 0.25)?;
        check_fraction("epsilon", epsilon, 1.0)?;
        let target = full_target_distance(delta, epsilon);
        if target >= 1.0 {
            return Err(Error::params(format!(
                "δ_C = (1 + 4δ + 13ε)/2 = {target} must be < 1"
            )));
        }
        let n = base.len();
        if sync.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: sync.len() });
        }
        let need = required_distance(target, n);
        if base.min_distance() < need {
            return Err(Error::params(format!(
                "base distance {} < δ_C·n = {need} with δ_C = (1 + 4δ + 13ε)/2 = {target}",
                base.min_distance()
            )));
        }
        let sync_fe = sync.field_symbols(base.field())?;
        Ok(FullLinearCode { base, sync, sync_fe, delta, epsilon })
    }

    pub fn with_reed_solomon(field: Field, sync: SyncString, delta: f64, epsilon: f64) -> Result<Self> {
        check_fraction("delta", delta, 0.25)?;
        check_fraction("epsilon", epsilon, 1.0)?;
        let n = sync.len();
        let target = full_target_distance(delta, epsilon);
        if target >= 1.0 {
            return Err(Error::params(format!(
                "δ_C = (1 + 4δ + 13ε)/2 = {target} must be < 1"
            )));
        }
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

    /// Number of base symbols `n`; the flat word has `4n - 2` symbols.
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.len() == 0
    }

    pub fn block_len(&self) -> usize {
        4 * self.len() - 2
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
        full_target_distance(self.delta, self.epsilon)
    }

    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(self.dimension() as u64, self.block_len() as u64)
    }

    /// `⌊δ n⌋`. The decoding argument also charges up to `δ (4n - 2)`; that
    /// larger figure is [`Self::proof_budget`].
    pub fn guaranteed_budget(&self) -> usize {
        (self.delta * self.len() as f64 + 1e-9).floor() as usize
    }

    pub fn proof_budget(&self) -> usize {
        (self.delta * self.block_len() as f64 + 1e-9).floor() as usize
    }

    pub fn encode(&self, msg: &[Fe]) -> Result<Vec<Fe>> {
        let c = self.base.encode(msg)?;
        let f = self.field();
        let mut out = Vec::with_capacity(self.block_len());
        for (i, (&ci, &si)) in c.iter().zip(&self.sync_fe).enumerate() {
            if i > 0 {
                out.extend([Fe::ZERO, Fe::ZERO]);
            }
            out.push(ci);
            out.push(f.mul(si, ci));
        }
        Ok(out)
    }

    /// Length-two blocks `(a, b)` mapped to `(b / a, a)`. Both symbols of a
    /// block are nonzero by construction of [`parse_blocks`].
    pub fn candidate_list(&self, y: &[Fe]) -> Vec<(Fe, Fe)> {
        let f = self.field();
        parse_blocks(y)
            .into_iter()
            .filter(|b| b.len() == 2)
            .map(|b| (f.div(b[1], b[0]).expect("block symbols are nonzero"), b[0]))
            .collect()
    }

    pub fn decode(&self, y: &[Fe]) -> Result<Vec<Fe>> {
        self.decode_list(&self.candidate_list(y))
    }

    pub(crate) fn decode_list(&self, list: &[(Fe, Fe)]) -> Result<Vec<Fe>> {
        if list.is_empty() {
            return Ok(vec![Fe::ZERO; self.dimension()]);
        }
        cid_decode(list, &self.sync_fe, self.base.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basecode::GeneratorCode;

    fn tiny() -> FullLinearCode {
        let f = Field::prime(7).unwrap();
        let base = GeneratorCode::new(f, vec![vec![Fe(1); 3]], 1 << 10).unwrap();
        let sync = SyncString::distinct(3, 0.5).unwrap();
        FullLinearCode::new(Arc::new(base), sync, 0.1, 0.01).unwrap()
    }

    #[test]
    fn encode_example() {
        let code = tiny();
        let cw = code.encode(&[Fe(2)]).unwrap();
        assert_eq!(cw, [2, 2, 0, 0, 2, 4, 0, 0, 2, 6].map(Fe).to_vec());
        assert_eq!(code.encode(&[Fe(0)]).unwrap(), vec![Fe(0); 10]);
    }

    #[test]
    fn parse_examples() {
        let y = [2, 2, 0, 0, 2, 4].map(Fe);
        assert_eq!(parse_blocks(&y), vec![&[Fe(2), Fe(2)][..], &[Fe(2), Fe(4)][..]]);
        assert!(parse_blocks(&[Fe(0); 7]).is_empty());
        let y = [1, 0, 1, 1, 1, 0, 0, 2].map(Fe);
        let blocks = parse_blocks(&y);
        assert_eq!(blocks.iter().map(|b| b.len()).collect::<Vec<_>>(), vec![1, 3, 1]);
    }

    #[test]
    fn decodes_clean_and_zero() {
        let code = tiny();
        assert_eq!(code.decode(&code.encode(&[Fe(3)]).unwrap()).unwrap(), vec![Fe(3)]);
        assert_eq!(code.decode(&[Fe(0); 10]).unwrap(), vec![Fe(0)]);
    }

    #[test]
    fn rejects_large_delta() {
        let f = Field::binary(8).unwrap();
        let sync = SyncString::distinct(16, 0.5).unwrap();
        let err = FullLinearCode::with_reed_solomon(f, sync, 0.3, 0.01).unwrap_err();
        assert!(err.to_string().contains("delta"));
    }

    #[test]
    fn rs_instance_parameters() {
        let f = Field::binary(8).unwrap();
        let sync = SyncString::distinct(16, 0.5).unwrap();
        let code = FullLinearCode::with_reed_solomon(f, sync, 0.15, 0.01).unwrap();
        assert_eq!(code.block_len(), 62);
        assert_eq!(code.dimension(), 3);
        assert_eq!(code.rate(), Ratio::new(3, 62));
        assert_eq!(code.guaranteed_budget(), 2);
        assert_eq!(code.proof_budget(), 9);
    }
}
