//! Errors-and-erasures linear base codes.
//!
//! Constructions only rely on the [`BaseCode`] contract: encode `k` symbols
//! into `n`, and recover the message from a word with `d` wrong symbols and
//! `e` erasures whenever `2d + e <= d_min - 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Fe, Field};

/// A length-`n` word in which some positions may be erased.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PositionedWord(pub Vec<Option<Fe>>);

impl PositionedWord {
    pub fn clean(word: &[Fe]) -> Self {
        PositionedWord(word.iter().copied().map(Some).collect())
    }

    pub fn erased(n: usize) -> Self {
        PositionedWord(vec![None; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn erasures(&self) -> usize {
        self.0.iter().filter(|x| x.is_none()).count()
    }

    /// Number of non-erased positions disagreeing with `codeword`.
    pub fn disagreements(&self, codeword: &[Fe]) -> usize {
        self.0
            .iter()
            .zip(codeword)
            .filter(|(r, c)| matches!(r, Some(x) if x != *c))
            .count()
    }

    /// `2 * wrong + erased` against `codeword`.
    pub fn half_errors(&self, codeword: &[Fe]) -> usize {
        2 * self.disagreements(codeword) + self.erasures()
    }
}

pub trait BaseCode: Send + Sync + fmt::Debug {
    fn field(&self) -> &Field;
    /// Block length `n`.
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Dimension `k`.
    fn dimension(&self) -> usize;
    fn min_distance(&self) -> usize;
    fn encode(&self, msg: &[Fe]) -> Result<Vec<Fe>>;
    fn decode_errors_erasures(&self, word: &PositionedWord) -> Result<Vec<Fe>>;
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

/// Evaluation-style Reed-Solomon code: the message is the coefficient
/// vector of a polynomial of degree `< k`, the codeword its values at `n`
/// distinct points.
#[derive(Clone, Debug)]
pub struct ReedSolomon {
    field: Field,
    k: usize,
    points: Vec<Fe>,
}

impl ReedSolomon {
    /// Uses the points `1, 2, ..., n` (as integer representatives), or the
    /// whole field when `n = q`.
    pub fn new(field: Field, n: usize, k: usize) -> Result<Self> {
        let first = u64::from(n as u64 != field.order() as u64);
        let points = (first..first + n as u64).map(|v| field.elem(v)).collect::<Result<Vec<_>>>().map_err(|_| {
            Error::params(format!("n = {n} exceeds q = {}", field.order()))
        })?;
        Self::with_points(field, k, points)
    }

    pub fn with_points(field: Field, k: usize, points: Vec<Fe>) -> Result<Self> {
        let n = points.len();
        if k == 0 || k > n {
            return Err(Error::params(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
        }
        if n as u64 > field.order() as u64 {
            return Err(Error::params(format!("n = {n} exceeds q = {}", field.order())));
        }
        let mut sorted = points.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != n || sorted.last().unwrap().0 >= field.order() {
            return Err(Error::params("evaluation points must be distinct field elements"));
        }
        Ok(ReedSolomon { field, k, points })
    }

    pub fn points(&self) -> &[Fe] {
        &self.points
    }
}

impl BaseCode for ReedSolomon {
    fn field(&self) -> &Field {
        &self.field
    }

    fn len(&self) -> usize {
        self.points.len()
    }

    fn dimension(&self) -> usize {
        self.k
    }

    fn min_distance(&self) -> usize {
        self.points.len() - self.k + 1
    }

    fn encode(&self, msg: &[Fe]) -> Result<Vec<Fe>> {
        check_len(self.k, msg.len())?;
        Ok(self.points.iter().map(|&x| self.field.eval_poly(msg, x)).collect())
    }

    /// Berlekamp-Welch on the non-erased coordinates. With `n'` surviving
    /// positions the decoder corrects up to `(n' - k) / 2` errors, which is
    /// exactly the `2d + e <= n - k` budget.
    fn decode_errors_erasures(&self, word: &PositionedWord) -> Result<Vec<Fe>> {
        check_len(self.len(), word.len())?;
        let f = &self.field;
        let known: Vec<(Fe, Fe)> = self
            .points
            .iter()
            .zip(&word.0)
            .filter_map(|(&x, y)| y.map(|y| (x, y)))
            .collect();
        let k = self.k;
        if known.len() < k {
            return Err(Error::decode(format!(
                "{} surviving positions cannot determine {k} message symbols",
                known.len()
            )));
        }
        let max_err = (known.len() - k) / 2;
        // Unknowns: e_0..e_{t-1} (E monic of degree t), then q_0..q_{k+t-1}.
        // Row per point: Q(x) - y (e_0 + ... + e_{t-1} x^{t-1}) = y x^t.
        let cols = max_err + k + max_err;
        let mut rows = Vec::with_capacity(known.len());
        for &(x, y) in &known {
            let mut row = Vec::with_capacity(cols + 1);
            let mut xp = Fe::ONE;
            for _ in 0..max_err {
                row.push(f.neg(f.mul(y, xp)));
                xp = f.mul(xp, x);
            }
            let xt = xp;
            let mut xp = Fe::ONE;
            for _ in 0..k + max_err {
                row.push(xp);
                xp = f.mul(xp, x);
            }
            row.push(f.mul(y, xt));
            rows.push(row);
        }
        let sol = solve_linear(f, rows, cols).ok_or_else(|| Error::decode("no consistent error locator"))?;
        let mut locator = sol[..max_err].to_vec();
        locator.push(Fe::ONE);
        let numerator = sol[max_err..].to_vec();
        let (quot, rem) = poly_divmod(f, &numerator, &locator);
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::decode("error locator does not divide the interpolant"));
        }
        if quot.iter().skip(k).any(|c| !c.is_zero()) {
            return Err(Error::decode("decoded polynomial has degree >= k"));
        }
        let mut msg = quot;
        msg.resize(k, Fe::ZERO);
        let codeword = self.encode(&msg)?;
        let d = word.disagreements(&codeword);
        if 2 * d + word.erasures() > self.len() - k {
            return Err(Error::decode("candidate is outside the errors-and-erasures radius"));
        }
        Ok(msg)
    }
}

/// Gaussian elimination over `f`. `rows` are augmented rows of width
/// `cols + 1`. Returns one solution (free variables set to zero) or `None`
/// if the system is inconsistent.
pub(crate) fn solve_linear(f: &Field, mut rows: Vec<Vec<Fe>>, cols: usize) -> Option<Vec<Fe>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = f.inv(rows[r][c]).expect("pivot is nonzero");
        for v in rows[r].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let factor = row[c];
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = f.sub(*v, f.mul(factor, pv));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    if rows[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut sol = vec![Fe::ZERO; cols];
    for (i, &c) in pivots.iter().enumerate() {
        sol[c] = rows[i][cols];
    }
    Some(sol)
}

/// Polynomial long division; `divisor` must have a nonzero leading
/// coefficient.
pub(crate) fn poly_divmod(f: &Field, num: &[Fe], divisor: &[Fe]) -> (Vec<Fe>, Vec<Fe>) {
    let dd = divisor.len() - 1;
    let lead_inv = f.inv(divisor[dd]).expect("divisor has nonzero leading coefficient");
    let mut rem = num.to_vec();
    if rem.len() <= dd {
        return (vec![], rem);
    }
    let mut quot = vec![Fe::ZERO; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = f.mul(rem[i + dd], lead_inv);
        quot[i] = c;
        if !c.is_zero() {
            for (j, &d) in divisor.iter().enumerate() {
                rem[i + j] = f.sub(rem[i + j], f.mul(c, d));
            }
        }
    }
    rem.truncate(dd);
    (quot, rem)
}

/// A linear code given by a `k x n` generator matrix, decoded by exhaustive
/// nearest-codeword search. Meant for tiny parameters.
#[derive(Clone, Debug)]
pub struct GeneratorCode {
    field: Field,
    rows: Vec<Vec<Fe>>,
    distance: usize,
    cap: u128,
}

impl GeneratorCode {
    pub fn new(field: Field, rows: Vec<Vec<Fe>>, cap: u128) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if k == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::params("generator rows must be nonempty and of equal length"));
        }
        let mut code = GeneratorCode { field, rows, distance: 0, cap };
        let size = (code.field.order() as u128).saturating_pow(k as u32);
        if size > cap {
            return Err(Error::EnumerationCap { size, cap });
        }
        let mut d = usize::MAX;
        for msg in messages(&code.field, k).skip(1) {
            let w = code.encode(&msg)?.iter().filter(|c| !c.is_zero()).count();
            d = d.min(w);
        }
        if d == 0 {
            return Err(Error::params("generator matrix is not of full rank"));
        }
        code.distance = d;
        Ok(code)
    }

    /// The `[q + 1, k]` doubly extended Reed-Solomon code: evaluations at
    /// every field element plus the leading coefficient. MDS.
    pub fn doubly_extended_rs(field: Field, k: usize) -> Result<Self> {
        let mut rows = Vec::with_capacity(k);
        for i in 0..k {
            let mut row: Vec<Fe> = field.elements().map(|a| field.pow(a, i as u64)).collect();
            row.push(if i + 1 == k { Fe::ONE } else { Fe::ZERO });
            rows.push(row);
        }
        Self::new(field, rows, 1 << 24)
    }
}

fn messages(f: &Field, k: usize) -> impl Iterator<Item = Vec<Fe>> + '_ {
    let q = f.order() as u128;
    let total = q.pow(k as u32);
    (0..total).map(move |mut idx| {
        (0..k)
            .map(|_| {
                let v = (idx % q) as u32;
                idx /= q;
                Fe(v)
            })
            .collect()
    })
}

impl BaseCode for GeneratorCode {
    fn field(&self) -> &Field {
        &self.field
    }

    fn len(&self) -> usize {
        self.rows[0].len()
    }

    fn dimension(&self) -> usize {
        self.rows.len()
    }

    fn min_distance(&self) -> usize {
        self.distance
    }

    fn encode(&self, msg: &[Fe]) -> Result<Vec<Fe>> {
        check_len(self.dimension(), msg.len())?;
        let f = &self.field;
        let mut out = vec![Fe::ZERO; self.len()];
        for (&m, row) in msg.iter().zip(&self.rows) {
            if !m.is_zero() {
                for (o, &g) in out.iter_mut().zip(row) {
                    *o = f.add(*o, f.mul(m, g));
                }
            }
        }
        Ok(out)
    }

    fn decode_errors_erasures(&self, word: &PositionedWord) -> Result<Vec<Fe>> {
        check_len(self.len(), word.len())?;
        let msg = brute_force_decode(self, word, self.cap)?;
        let d = word.disagreements(&self.encode(&msg)?);
        if 2 * d + word.erasures() >= self.distance {
            return Err(Error::decode("nearest codeword is outside the unique decoding radius"));
        }
        Ok(msg)
    }
}

/// Nearest-codeword decoding by enumerating all `q^k` messages, counting
/// disagreements on non-erased positions only. Ties are failures.
pub fn brute_force_decode(code: &dyn BaseCode, word: &PositionedWord, cap: u128) -> Result<Vec<Fe>> {
    check_len(code.len(), word.len())?;
    let f = code.field();
    let k = code.dimension();
    let size = (f.order() as u128).saturating_pow(k as u32);
    if size > cap {
        return Err(Error::EnumerationCap { size, cap });
    }
    let mut best: Option<(usize, Vec<Fe>)> = None;
    let mut tied = false;
    for msg in messages(f, k) {
        let d = word.disagreements(&code.encode(&msg)?);
        match &best {
            Some((bd, _)) if d > *bd => {}
            Some((bd, _)) if d == *bd => tied = true,
            _ => {
                best = Some((d, msg));
                tied = false;
            }
        }
    }
    if tied {
        return Err(Error::Tie);
    }
    Ok(best.expect("at least one message").1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf7_code() -> ReedSolomon {
        ReedSolomon::new(Field::prime(7).unwrap(), 6, 2).unwrap()
    }

    #[test]
    fn encode_example() {
        let rs = gf7_code();
        let cw = rs.encode(&[Fe(1), Fe(2)]).unwrap();
        assert_eq!(cw, [3, 5, 0, 2, 4, 6].map(Fe).to_vec());
        assert_eq!(rs.encode(&[Fe(0), Fe(0)]).unwrap(), vec![Fe(0); 6]);
        assert!(matches!(rs.encode(&[Fe(1)]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn full_dimension_is_bijective() {
        let f = Field::prime(5).unwrap();
        let rs = ReedSolomon::new(f.clone(), 3, 3).unwrap();
        let mut seen = std::collections::HashSet::new();
        for msg in messages(&f, 3) {
            let cw = rs.encode(&msg).unwrap();
            assert_eq!(rs.decode_errors_erasures(&PositionedWord::clean(&cw)).unwrap(), msg);
            assert!(seen.insert(cw));
        }
        assert_eq!(seen.len(), 125);
    }

    #[test]
    fn error_plus_erasure_example() {
        let rs = gf7_code();
        let msg = vec![Fe(1), Fe(2)];
        let cw = rs.encode(&msg).unwrap();
        let mut w = PositionedWord::clean(&cw);
        w.0[1] = Some(Fe(0));
        w.0[4] = None;
        assert_eq!(w.half_errors(&cw), 3);
        assert_eq!(rs.decode_errors_erasures(&w).unwrap(), msg);
        assert_eq!(brute_force_decode(&rs, &w, 1000).unwrap(), msg);
    }

    #[test]
    fn all_erased_fails() {
        let rs = gf7_code();
        assert!(matches!(
            rs.decode_errors_erasures(&PositionedWord::erased(6)),
            Err(Error::DecodeFailure(_))
        ));
    }

    #[test]
    fn rejects_bad_shapes() {
        let f = Field::prime(7).unwrap();
        assert!(ReedSolomon::new(f.clone(), 8, 2).is_err());
        assert!(ReedSolomon::new(f.clone(), 4, 5).is_err());
        let full = ReedSolomon::new(f.clone(), 7, 2).unwrap();
        assert_eq!(full.points()[0], Fe(0));
        let msg = [Fe(3), Fe(5)];
        let mut w = PositionedWord(full.encode(&msg).unwrap().into_iter().map(Some).collect());
        w.0[0] = Some(Fe(1));
        w.0[4] = None;
        assert_eq!(full.decode_errors_erasures(&w).unwrap(), msg);
        assert!(ReedSolomon::with_points(f, 2, vec![Fe(1), Fe(1), Fe(2)]).is_err());
    }

    #[test]
    fn brute_force_tie() {
        // Repetition code of length 2: one disagreement each way.
        let f = Field::prime(2).unwrap();
        let code = GeneratorCode::new(f, vec![vec![Fe(1), Fe(1)]], 16).unwrap();
        let w = PositionedWord(vec![Some(Fe(0)), Some(Fe(1))]);
        assert_eq!(brute_force_decode(&code, &w, 16), Err(Error::Tie));
        assert_eq!(brute_force_decode(&code, &w, 1), Err(Error::EnumerationCap { size: 2, cap: 1 }));
    }

    #[test]
    fn single_errors_match_oracle_gf5() {
        let f = Field::prime(5).unwrap();
        let rs = ReedSolomon::new(f.clone(), 4, 2).unwrap();
        for msg in messages(&f, 2) {
            let cw = rs.encode(&msg).unwrap();
            for pos in 0..4 {
                for delta in 1..5 {
                    let mut w = PositionedWord::clean(&cw);
                    w.0[pos] = Some(f.add(cw[pos], Fe(delta)));
                    let bw = rs.decode_errors_erasures(&w).unwrap();
                    assert_eq!(bw, msg);
                    assert_eq!(brute_force_decode(&rs, &w, 100).unwrap(), bw);
                }
            }
        }
    }

    #[test]
    fn doubly_extended_rs_is_mds() {
        let f = Field::binary(2).unwrap();
        let code = GeneratorCode::doubly_extended_rs(f, 2).unwrap();
        assert_eq!(code.len(), 5);
        assert_eq!(code.min_distance(), 4);
        let msg = vec![Fe(2), Fe(3)];
        let mut w = PositionedWord::clean(&code.encode(&msg).unwrap());
        w.0[0] = None;
        w.0[3] = Some(Fe(0));
        assert_eq!(code.decode_errors_erasures(&w).unwrap(), msg);
    }

    #[test]
    fn divmod_roundtrip() {
        let f = Field::prime(7).unwrap();
        let a = [3, 0, 5, 1, 2].map(Fe);
        let b = [1, 4, 1].map(Fe);
        let (q, r) = poly_divmod(&f, &a, &b);
        // a == q*b + r
        let mut prod = vec![Fe(0); q.len() + b.len() - 1];
        for (i, &x) in q.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = f.add(prod[i + j], f.mul(x, y));
            }
        }
        for (i, &x) in r.iter().enumerate() {
            prod[i] = f.add(prod[i], x);
        }
        assert_eq!(prod, a.to_vec());
    }
}
