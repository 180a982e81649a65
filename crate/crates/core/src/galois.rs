//! Arithmetic in GF(p^m) for small prime powers.
//!
//! Elements are stored in the polynomial basis over GF(p). Externally an
//! element is identified by its *index*: the base-p digits of the index are
//! the polynomial coefficients, least significant digit first. The constant
//! polynomials `0..p` therefore coincide with the prime subfield.
//!
//! Multiplication goes through log/exp tables built from the smallest
//! primitive element, so every field is limited to `q <= 2^16`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GaloisError {
    #[error("characteristic {0} is not prime")]
    NonPrimeP(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("modulus {0:?} is not a monic irreducible polynomial of degree {1}")]
    ReducibleModulus(Vec<u32>, u32),
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge(u64),
    #[error("division by zero")]
    DivideByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("value {0} is not an element of a field of order {1}")]
    OutOfRange(u64, u32),
    #[error("operation requires characteristic 2, field has characteristic {0}")]
    OddCharacteristic(u32),
}

/// Serializable description of a field: characteristic, degree and modulus
/// (coefficients low to high, monic).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

struct FieldInner {
    spec: FieldSpec,
    q: u32,
    primitive: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Handle to a finite field. Cloning is cheap.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p(), self.m())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // p is prime, so a^(p-2) is the inverse.
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

fn trim(poly: &mut Vec<u32>) {
    while poly.len() > 1 && *poly.last().unwrap() == 0 {
        poly.pop();
    }
}

/// Remainder of `num` modulo `den` over GF(p). `den` must have a nonzero
/// leading coefficient.
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut rem = num.to_vec();
    trim(&mut rem);
    let dd = den.len() - 1;
    let lead_inv = inv_mod_p(den[dd], p);
    while rem.len() > dd && !(rem.len() == 1 && rem[0] == 0) {
        let shift = rem.len() - 1 - dd;
        let factor = rem[rem.len() - 1] as u64 * lead_inv as u64 % p as u64;
        for (i, &d) in den.iter().enumerate() {
            let sub = factor * d as u64 % p as u64;
            rem[shift + i] = ((rem[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
        }
        trim(&mut rem);
        if rem.len() <= dd {
            break;
        }
    }
    rem
}

fn digits(mut value: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = value % p;
        value /= p;
    }
    out
}

fn undigits(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Monic irreducibility by trial division with every monic polynomial of
/// degree `1..=m/2`.
fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let m = modulus.len() - 1;
    if m == 0 || modulus[m] != 1 {
        return false;
    }
    for deg in 1..=m / 2 {
        let count = (p as u64).pow(deg as u32);
        for low in 0..count {
            let mut cand = digits(low as u32, p, deg);
            cand.push(1);
            let r = poly_rem(modulus, &cand, p);
            if r.iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// Builds GF(p^m). Without an explicit modulus, the monic irreducible of
    /// degree `m` with the smallest lower-coefficient index is used.
    pub fn new(p: u32, m: u32, modulus: Option<Vec<u32>>) -> Result<Self, GaloisError> {
        if !is_prime(p) {
            return Err(GaloisError::NonPrimeP(p));
        }
        if m == 0 {
            return Err(GaloisError::ZeroDegree);
        }
        let q64 = (p as u64).checked_pow(m).unwrap_or(u64::MAX);
        if q64 > MAX_ORDER {
            return Err(GaloisError::TooLarge(q64));
        }
        let q = q64 as u32;
        let modulus = match modulus {
            Some(poly) => {
                if poly.len() != m as usize + 1
                    || poly.iter().any(|&c| c >= p)
                    || !is_irreducible(&poly, p)
                {
                    return Err(GaloisError::ReducibleModulus(poly, m));
                }
                poly
            }
            None => {
                let count = (p as u64).pow(m);
                (0..count)
                    .map(|low| {
                        let mut poly = digits(low as u32, p, m as usize);
                        poly.push(1);
                        poly
                    })
                    .find(|poly| is_irreducible(poly, p))
                    .expect("an irreducible polynomial exists in every degree")
            }
        };
        let spec = FieldSpec { p, m, modulus };
        let (primitive, exp, log) = build_tables(&spec, q);
        Ok(Field(Arc::new(FieldInner {
            spec,
            q,
            primitive,
            exp,
            log,
        })))
    }

    /// Prime field GF(p).
    pub fn prime(p: u32) -> Result<Self, GaloisError> {
        Self::new(p, 1, None)
    }

    /// Builds the field of order `q`, factoring `q` as a prime power.
    pub fn of_order(q: u32) -> Result<Self, GaloisError> {
        if q < 2 {
            return Err(GaloisError::NonPrimeP(q));
        }
        let p = (2..=q).find(|d| q.is_multiple_of(*d)).unwrap();
        let mut rest = q;
        let mut m = 0;
        while rest.is_multiple_of(p) {
            rest /= p;
            m += 1;
        }
        if rest != 1 {
            return Err(GaloisError::NonPrimeP(q));
        }
        Self::new(p, m, None)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self, GaloisError> {
        Self::new(spec.p, spec.m, Some(spec.modulus.clone()))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn p(&self) -> u32 {
        self.0.spec.p
    }

    pub fn m(&self) -> u32 {
        self.0.spec.m
    }

    /// Field order.
    pub fn order(&self) -> u32 {
        self.0.q
    }

    pub fn is_char2(&self) -> bool {
        self.p() == 2
    }

    /// Smallest index generating the multiplicative group.
    pub fn primitive(&self) -> u32 {
        self.0.primitive
    }

    pub fn contains(&self, x: u32) -> bool {
        x < self.0.q
    }

    pub fn elem(&self, value: u32) -> Result<FieldElement, GaloisError> {
        if !self.contains(value) {
            return Err(GaloisError::OutOfRange(value as u64, self.order()));
        }
        Ok(FieldElement {
            field: self.clone(),
            value,
        })
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.0.q
    }

    /// Polynomial-basis coefficients of `x`.
    pub fn coeffs(&self, x: u32) -> Vec<u32> {
        digits(x, self.p(), self.m() as usize)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> u32 {
        undigits(coeffs, self.p())
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let p = self.p();
        if self.m() == 1 {
            let s = a + b;
            if s >= p {
                s - p
            } else {
                s
            }
        } else if p == 2 {
            a ^ b
        } else {
            let (mut a, mut b) = (a, b);
            let mut out = 0;
            let mut place = 1;
            while a > 0 || b > 0 {
                out += ((a % p + b % p) % p) * place;
                a /= p;
                b /= p;
                place *= p;
            }
            out
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let p = self.p();
        if p == 2 {
            a
        } else if self.m() == 1 {
            if a == 0 {
                0
            } else {
                p - a
            }
        } else {
            let mut a = a;
            let mut out = 0;
            let mut place = 1;
            while a > 0 {
                out += ((p - a % p) % p) * place;
                a /= p;
                place *= p;
            }
            out
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let inner = &*self.0;
        let n = inner.q - 1;
        let e = inner.log[a as usize] + inner.log[b as usize];
        inner.exp[(if e >= n { e - n } else { e }) as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32, GaloisError> {
        if a == 0 {
            return Err(GaloisError::DivideByZero);
        }
        let inner = &*self.0;
        let n = inner.q - 1;
        let l = inner.log[a as usize];
        Ok(inner.exp[((n - l) % n) as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, GaloisError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`; `0^0 = 1`.
    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let inner = &*self.0;
        let n = (inner.q - 1) as u64;
        let l = inner.log[a as usize] as u64;
        inner.exp[((l * (e % n)) % n) as usize]
    }

    /// Discrete log base the primitive element. `None` for zero.
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.0.log[a as usize])
    }

    /// Absolute trace to GF(p): `sum_{i<m} x^(p^i)`.
    pub fn trace(&self, x: u32) -> u32 {
        let p = self.p() as u64;
        let mut acc = 0;
        let mut power = 1u64;
        for _ in 0..self.m() {
            acc = self.add(acc, self.pow(x, power));
            power *= p;
        }
        debug_assert!(acc < self.p(), "trace left the prime subfield");
        acc
    }

    /// Square root in characteristic 2, `x^(2^(m-1))`.
    pub fn sqrt_char2(&self, x: u32) -> Result<u32, GaloisError> {
        if !self.is_char2() {
            return Err(GaloisError::OddCharacteristic(self.p()));
        }
        Ok(self.pow(x, 1u64 << (self.m() - 1)))
    }

    pub fn is_square(&self, x: u32) -> bool {
        x == 0 || self.is_char2() || self.0.log[x as usize].is_multiple_of(2)
    }

    /// A square root of `x` if one exists. In odd characteristic the root
    /// with the smaller index is returned.
    pub fn sqrt(&self, x: u32) -> Option<u32> {
        if x == 0 {
            return Some(0);
        }
        if self.is_char2() {
            return self.sqrt_char2(x).ok();
        }
        let l = self.0.log[x as usize];
        if !l.is_multiple_of(2) {
            return None;
        }
        let r = self.0.exp[(l / 2) as usize];
        Some(r.min(self.neg(r)))
    }

    /// Uniform element, drawn digit by digit in base `p`.
    pub fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let p = self.p();
        (0..self.m()).fold((0, 1), |(acc, place), _| (acc + rng.gen_range(0..p) * place, place * p)).0
    }

    /// The primitive element, which is a non-square in odd characteristic.
    pub fn non_square(&self) -> Option<u32> {
        (!self.is_char2()).then(|| self.0.exp[1])
    }
}

fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let mut prod = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    let mut r = poly_rem(&prod, modulus, p);
    r.resize(modulus.len() - 1, 0);
    r
}

fn build_tables(spec: &FieldSpec, q: u32) -> (u32, Vec<u32>, Vec<u32>) {
    let p = spec.p;
    let m = spec.m as usize;
    let order = q - 1;
    let mul = |a: u32, b: u32| -> u32 {
        undigits(
            &poly_mulmod(&digits(a, p, m), &digits(b, p, m), &spec.modulus, p),
            p,
        )
    };
    let candidates = if q == 2 { 1..2 } else { 2..q };
    for g in candidates {
        let mut exp = Vec::with_capacity(order as usize);
        let mut x = 1u32;
        let mut generates = true;
        for i in 0..order {
            if i > 0 && x == 1 {
                generates = false;
                break;
            }
            exp.push(x);
            x = mul(x, g);
        }
        if generates && x == 1 {
            let mut log = vec![0u32; q as usize];
            for (i, &e) in exp.iter().enumerate() {
                log[e as usize] = i as u32;
            }
            return (g, exp, log);
        }
    }
    unreachable!("multiplicative group of a finite field is cyclic")
}

/// Operation selector for [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Inv,
    Pow(u64),
}

/// A field element bundled with its field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: u32,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{:?}", self.value, self.field)
    }
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Integer index (base-p digit encoding).
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn coeffs(&self) -> Vec<u32> {
        self.field.coeffs(self.value)
    }

    fn same(&self, other: &Self) -> Result<(), GaloisError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(GaloisError::FieldMismatch)
        }
    }

    fn with(&self, value: u32) -> Self {
        FieldElement {
            field: self.field.clone(),
            value,
        }
    }

    pub fn trace(&self) -> u32 {
        self.field.trace(self.value)
    }

    pub fn sqrt_char2(&self) -> Result<Self, GaloisError> {
        Ok(self.with(self.field.sqrt_char2(self.value)?))
    }
}

/// Applies `op` to `a` (and `b` for the binary operations).
pub fn arith(
    a: &FieldElement,
    b: Option<&FieldElement>,
    op: FieldOp,
) -> Result<FieldElement, GaloisError> {
    let f = &a.field;
    let rhs = |b: Option<&FieldElement>| -> Result<u32, GaloisError> {
        let b = b.ok_or(GaloisError::FieldMismatch)?;
        a.same(b)?;
        Ok(b.value)
    };
    let value = match op {
        FieldOp::Add => f.add(a.value, rhs(b)?),
        FieldOp::Sub => f.sub(a.value, rhs(b)?),
        FieldOp::Mul => f.mul(a.value, rhs(b)?),
        FieldOp::Div => f.div(a.value, rhs(b)?)?,
        FieldOp::Neg => f.neg(a.value),
        FieldOp::Inv => f.inv(a.value)?,
        FieldOp::Pow(e) => f.pow(a.value, e),
    };
    Ok(a.with(value))
}
