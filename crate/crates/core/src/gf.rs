//! Finite fields GF(p) and GF(2^e).
//!
//! Elements are plain integers in `[0, q)`. For prime fields that integer is
//! the residue mod p; for binary extension fields it is the coefficient
//! vector of the element in the polynomial basis, bit `i` holding the
//! coefficient of `x^i`. A [`Field`] is a cheap, immutable handle that owns
//! the log/antilog tables used for multiplication.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ORDER: u64 = 1 << 20;

/// A field element, stored as its canonical integer representative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Prime,
    BinaryExtension,
}

/// Serializable description of a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub characteristic: u32,
    pub degree: u32,
    /// Modulus polynomial including the leading term; binary extensions only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u32>,
    pub order: u32,
}

struct Tables {
    spec: FieldSpec,
    // exp has length 2(q-1) so that exp[log a + log b] needs no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Handle to a finite field. Cloning shares the underlying tables.
#[derive(Clone)]
pub struct Field(Arc<Tables>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.spec.kind {
            FieldKind::Prime => write!(f, "GF({})", self.order()),
            FieldKind::BinaryExtension => {
                write!(f, "GF(2^{}; {:#b})", self.degree(), self.0.spec.modulus.unwrap_or(0))
            }
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn poly_degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

fn poly_mod(mut a: u64, m: u64) -> u64 {
    let dm = poly_degree(m);
    while a != 0 && poly_degree(a) >= dm {
        a ^= m << (poly_degree(a) - dm);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree at most half the degree of `poly`.
pub fn is_irreducible_gf2(poly: u64) -> bool {
    let d = poly_degree(poly);
    if d < 1 {
        return false;
    }
    if d == 1 {
        return true;
    }
    for div in 2u64..(1u64 << (d / 2 + 1)) {
        if poly_degree(div) > d / 2 {
            break;
        }
        if poly_mod(poly, div) == 0 {
            return false;
        }
    }
    true
}

/// The numerically smallest irreducible polynomial of degree `e` over GF(2).
pub fn default_modulus(e: u32) -> Result<u32> {
    if e == 0 || e > 20 {
        return Err(Error::InvalidDegree(e));
    }
    let lo = 1u64 << e;
    (lo..lo << 1)
        .find(|&p| is_irreducible_gf2(p))
        .map(|p| p as u32)
        .ok_or(Error::InvalidDegree(e))
}

impl Field {
    /// Builds a field from its description. `modulus` is only consulted for
    /// binary extensions; when absent the smallest irreducible is used.
    pub fn new(kind: FieldKind, p: u64, e: u32, modulus: Option<u32>) -> Result<Field> {
        if e < 1 {
            return Err(Error::InvalidDegree(e));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        match kind {
            FieldKind::Prime => {
                if e != 1 {
                    return Err(Error::params("prime fields have extension degree 1"));
                }
                if p > MAX_ORDER {
                    return Err(Error::FieldTooLarge(p));
                }
                let spec = FieldSpec {
                    kind,
                    characteristic: p as u32,
                    degree: 1,
                    modulus: None,
                    order: p as u32,
                };
                Ok(Self::with_tables(spec, |a, b| (a as u64 * b as u64 % p) as u32))
            }
            FieldKind::BinaryExtension => {
                if p != 2 {
                    return Err(Error::params("binary extension fields have characteristic 2"));
                }
                if e > 20 {
                    return Err(Error::FieldTooLarge(1u64 << e.min(63)));
                }
                let modulus = match modulus {
                    Some(m) => m,
                    None => default_modulus(e)?,
                };
                if poly_degree(modulus as u64) != e as i32 || !is_irreducible_gf2(modulus as u64) {
                    return Err(Error::ReducibleModulus { modulus: modulus as u64, degree: e });
                }
                let spec = FieldSpec {
                    kind,
                    characteristic: 2,
                    degree: e,
                    modulus: Some(modulus),
                    order: 1 << e,
                };
                Ok(Self::with_tables(spec, move |a, b| clmul_mod(a, b, modulus)))
            }
        }
    }

    pub fn prime(p: u64) -> Result<Field> {
        Self::new(FieldKind::Prime, p, 1, None)
    }

    pub fn binary(e: u32) -> Result<Field> {
        Self::new(FieldKind::BinaryExtension, 2, e, None)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Field> {
        let f = Self::new(spec.kind, spec.characteristic as u64, spec.degree, spec.modulus)?;
        if f.order() != spec.order {
            return Err(Error::params(format!(
                "order {} does not match {}^{}",
                spec.order, spec.characteristic, spec.degree
            )));
        }
        Ok(f)
    }

    fn with_tables(spec: FieldSpec, slow_mul: impl Fn(u32, u32) -> u32) -> Field {
        let q = spec.order;
        let n = q - 1;
        // Find a generator of the multiplicative group by brute force.
        let mut exp = vec![0u32; 2 * n as usize];
        let mut log = vec![0u32; q as usize];
        'outer: for g in 2..q.max(3) {
            let mut x = 1u32;
            for i in 0..n {
                if i > 0 && x == 1 {
                    continue 'outer;
                }
                exp[i as usize] = x;
                x = slow_mul(x, g);
            }
            if x == 1 {
                break;
            }
        }
        if q == 2 {
            exp[0] = 1;
        }
        for i in 0..n as usize {
            exp[i + n as usize] = exp[i];
            log[exp[i] as usize] = i as u32;
        }
        Field(Arc::new(Tables { spec, exp, log }))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn kind(&self) -> FieldKind {
        self.0.spec.kind
    }

    pub fn order(&self) -> u32 {
        self.0.spec.order
    }

    pub fn characteristic(&self) -> u32 {
        self.0.spec.characteristic
    }

    pub fn degree(&self) -> u32 {
        self.0.spec.degree
    }

    pub fn is_binary(&self) -> bool {
        self.0.spec.kind == FieldKind::BinaryExtension
    }

    pub fn elem(&self, value: u64) -> Result<Fe> {
        if value < self.order() as u64 {
            Ok(Fe(value as u32))
        } else {
            Err(Error::ElementOutOfRange { value, order: self.order() })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order()).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match self.0.spec.kind {
            FieldKind::BinaryExtension => Fe(a.0 ^ b.0),
            FieldKind::Prime => {
                let s = a.0 + b.0;
                let p = self.0.spec.order;
                Fe(if s >= p { s - p } else { s })
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        match self.0.spec.kind {
            FieldKind::BinaryExtension => a,
            FieldKind::Prime => {
                if a.0 == 0 {
                    a
                } else {
                    Fe(self.0.spec.order - a.0)
                }
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let t = &self.0;
        Fe(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let t = &self.0;
        let n = t.spec.order - 1;
        Ok(Fe(t.exp[((n - t.log[a.0 as usize]) % n) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let t = &self.0;
        let n = (t.spec.order - 1) as u64;
        Fe(t.exp[((t.log[a.0 as usize] as u64 * (e % n)) % n) as usize])
    }

    /// Coefficient bits of a binary-extension element, most significant
    /// coefficient first. Field addition is bitwise XOR of these vectors.
    pub fn elem_to_bits(&self, a: Fe) -> Result<Vec<u8>> {
        if !self.is_binary() {
            return Err(Error::NotBinaryField);
        }
        let e = self.degree();
        Ok((0..e).rev().map(|i| ((a.0 >> i) & 1) as u8).collect())
    }

    pub fn bits_to_elem(&self, bits: &[u8]) -> Result<Fe> {
        if !self.is_binary() {
            return Err(Error::NotBinaryField);
        }
        let e = self.degree() as usize;
        if bits.len() != e {
            return Err(Error::LengthMismatch { expected: e, actual: bits.len() });
        }
        let mut v = 0u32;
        for &b in bits {
            if b > 1 {
                return Err(Error::Format(format!("bit value {b}")));
            }
            v = (v << 1) | b as u32;
        }
        Ok(Fe(v))
    }

    /// Evaluates the polynomial with coefficients `coeffs` (constant term
    /// first) at `x`.
    pub fn eval_poly(&self, coeffs: &[Fe], x: Fe) -> Fe {
        coeffs.iter().rev().fold(Fe::ZERO, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

fn clmul_mod(a: u32, b: u32, modulus: u32) -> u32 {
    let mut acc = 0u64;
    for i in 0..32 {
        if (b >> i) & 1 == 1 {
            acc ^= (a as u64) << i;
        }
    }
    poly_mod(acc, modulus as u64) as u32
}
