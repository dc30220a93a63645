//! Exact arithmetic in cyclotomic fields Q(ζ_N), N even, with a complex
//! floating mirror.
//!
//! Elements are stored sparsely in the power basis of Q[x]/Φ_N(x) with an
//! integer numerator vector over a common positive denominator. Binary
//! operations on elements of different conductors lift both operands to the
//! lcm first, so mixing is always correct; drivers fix one conductor up
//! front through [`conductor_scope`] to avoid repeated lifting.

use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Q = BigRational;

/// Rational from a pair of machine integers.
pub fn q(a: i64, b: i64) -> Q {
    Q::new(BigInt::from(a), BigInt::from(b))
}

pub fn qi(a: i64) -> Q {
    Q::from_integer(BigInt::from(a))
}

/// Parses "a" or "a/b".
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                None
            } else {
                Some(Q::new(a, b))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// Floor of a rational as i64.
pub fn q_floor(x: &Q) -> i64 {
    x.floor().to_integer().to_i64().expect("floor out of range")
}

pub fn q_is_int(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn q_to_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}

/// Reduces x into [0, m).
pub fn q_mod(x: &Q, m: i64) -> Q {
    let mq = qi(m);
    let k = (x / &mq).floor();
    x - k * mq
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ScalarError {
    #[error("conductor mismatch: e^(pi i {r}) is not in Q(zeta_{n})")]
    ConductorMismatch { r: String, n: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("expected an even positive conductor, got {0}")]
    BadConductor(u32),
}

/// e^{πi r} with r reduced into [0, 2).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootExp(#[serde(with = "q_serde")] Q);

impl RootExp {
    pub fn new(r: Q) -> Self {
        RootExp(q_mod(&r, 2))
    }
    pub fn r(&self) -> &Q {
        &self.0
    }
    pub fn mul(&self, o: &RootExp) -> RootExp {
        RootExp::new(&self.0 + &o.0)
    }
    pub fn inv(&self) -> RootExp {
        RootExp::new(-&self.0)
    }
    pub fn pow(&self, k: i64) -> RootExp {
        RootExp::new(&self.0 * qi(k))
    }
    /// Smallest even conductor containing this root of unity.
    pub fn min_conductor(&self) -> u32 {
        let d = self.0.denom().to_u32().expect("conductor too large");
        // ζ_N^{rN/2}: need N*r/2 integral, i.e. 2d | N*numer; N = 2d suffices.
        let n = 2 * d;
        n.max(2)
    }
    pub fn to_cyc(&self) -> CycScalar {
        CycScalar::root(&self.0)
    }
    pub fn approx(&self) -> Complex64 {
        let t = std::f64::consts::PI * q_to_f64(&self.0);
        Complex64::new(t.cos(), t.sin())
    }
}

mod q_serde {
    use super::*;
    use serde::{Deserializer, Serializer};
    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).ok_or_else(|| serde::de::Error::custom("bad rational"))
    }
}

struct Field {
    phi: usize,
    /// Nonzero coefficients of Φ_N below the leading term, as (power, coeff).
    tail: Vec<(usize, i64)>,
}

fn fields() -> &'static Mutex<HashMap<u32, Arc<Field>>> {
    static F: OnceLock<Mutex<HashMap<u32, Arc<Field>>>> = OnceLock::new();
    F.get_or_init(|| Mutex::new(HashMap::new()))
}

fn polys() -> &'static Mutex<HashMap<u32, Arc<Vec<i64>>>> {
    static P: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    P.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients of Φ_n, low degree first, by dividing x^n − 1 by Φ_d for
/// every proper divisor d.
pub fn cyclotomic_poly(n: u32) -> Arc<Vec<i64>> {
    if let Some(p) = polys().lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut num = vec![0i128; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let den = cyclotomic_poly(d);
            num = exact_div(&num, &den);
        }
    }
    let out: Vec<i64> = num.iter().map(|&c| c as i64).collect();
    let arc = Arc::new(out);
    polys().lock().unwrap().insert(n, arc.clone());
    arc
}

fn exact_div(num: &[i128], den: &[i64]) -> Vec<i128> {
    let dd = den.len() - 1;
    let nd = num.len() - 1;
    let mut rem = num.to_vec();
    let mut quo = vec![0i128; nd - dd + 1];
    for k in (0..=nd - dd).rev() {
        let c = rem[k + dd];
        quo[k] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[k + j] -= c * dj as i128;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quo
}

fn field(n: u32) -> Arc<Field> {
    if let Some(f) = fields().lock().unwrap().get(&n) {
        return f.clone();
    }
    let poly = cyclotomic_poly(n);
    let phi = poly.len() - 1;
    let tail = poly[..phi]
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| (k, c))
        .collect();
    let f = Arc::new(Field { phi, tail });
    fields().lock().unwrap().insert(n, f.clone());
    f
}

pub fn euler_phi(n: u32) -> usize {
    field(n).phi
}

pub fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

thread_local! {
    static SCOPE: Cell<u32> = const { Cell::new(2) };
}

/// Guard that makes every root created on this thread live in at least
/// Q(ζ_n) until dropped.
pub struct ConductorScope {
    prev: u32,
}

pub fn conductor_scope(n: u32) -> ConductorScope {
    let prev = SCOPE.with(|s| s.get());
    SCOPE.with(|s| s.set(lcm(prev, n.max(2))));
    ConductorScope { prev }
}

impl Drop for ConductorScope {
    fn drop(&mut self) {
        SCOPE.with(|s| s.set(self.prev));
    }
}

/// Working conductor for a computation at level p whose rational inputs
/// have the given denominators: lcm(4p·d²), which covers q^{w}, q^{w w'/2}
/// and the Fock phases e^{−πi c c'/2p}.
pub fn conductor_for(p: u32, inputs: &[Q]) -> u32 {
    let mut n = 4 * p;
    for x in inputs {
        let d = x.denom().to_u32().expect("denominator too large");
        n = lcm(n, 4 * p * d * d);
    }
    n
}

/// An element Σ c_k ζ_N^k / den of Q(ζ_N).
#[derive(Clone)]
pub struct CycScalar {
    n: u32,
    terms: Vec<(u32, BigInt)>,
    den: BigInt,
}

impl CycScalar {
    pub fn zero() -> Self {
        CycScalar { n: 2, terms: Vec::new(), den: BigInt::one() }
    }
    pub fn one() -> Self {
        Self::from_q(&Q::one())
    }
    pub fn from_i64(k: i64) -> Self {
        Self::from_q(&qi(k))
    }
    pub fn from_q(x: &Q) -> Self {
        let n = SCOPE.with(|s| s.get());
        if x.is_zero() {
            return CycScalar { n, terms: Vec::new(), den: BigInt::one() };
        }
        CycScalar { n, terms: vec![(0, x.numer().clone())], den: x.denom().clone() }
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    /// e^{πi r} in the smallest even conductor containing it (joined with
    /// the active scope).
    pub fn root(r: &Q) -> Self {
        let re = RootExp::new(r.clone());
        let n = lcm(re.min_conductor(), SCOPE.with(|s| s.get()));
        embed_rootexp(re.r(), n).expect("conductor chosen to fit")
    }

    /// q^x = e^{πi x/p}.
    pub fn qpow(x: &Q, p: u32) -> Self {
        Self::root(&(x / qi(p as i64)))
    }

    fn monomial(n: u32, k: u32) -> Self {
        let f = field(n);
        let mut acc = vec![BigInt::zero(); n as usize];
        acc[(k % n) as usize] = BigInt::one();
        Self::from_dense(n, &f, acc, BigInt::one())
    }

    fn from_dense(n: u32, f: &Field, mut acc: Vec<BigInt>, den: BigInt) -> Self {
        reduce_in_place(f, &mut acc);
        let terms: Vec<(u32, BigInt)> = acc
            .into_iter()
            .take(f.phi)
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u32, c))
            .collect();
        let mut s = CycScalar { n, terms, den };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if self.terms.is_empty() {
            self.den = BigInt::one();
            return;
        }
        if self.den.is_negative() {
            self.den = -self.den.clone();
            for t in &mut self.terms {
                t.1 = -t.1.clone();
            }
        }
        let mut g = self.den.clone();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                return;
            }
        }
        if !g.is_one() {
            self.den /= &g;
            for t in &mut self.terms {
                t.1 /= &g;
            }
        }
    }

    /// Re-expresses the element in Q(ζ_m), m a multiple of the conductor.
    pub fn lift(&self, m: u32) -> Self {
        assert!(m % self.n == 0, "lift target must be a multiple");
        if m == self.n || self.terms.is_empty() {
            let mut s = self.clone();
            s.n = m;
            return s;
        }
        let f = field(m);
        let step = m / self.n;
        let mut acc = vec![BigInt::zero(); m as usize];
        for (k, c) in &self.terms {
            acc[((k * step) % m) as usize] += c;
        }
        Self::from_dense(m, &f, acc, self.den.clone())
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        let m = lcm(a.n, b.n);
        (a.lift(m), b.lift(m))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1 == self.den
    }

    /// Rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(0, c)] => Some(Q::new(c.clone(), self.den.clone())),
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.addsub(o, false)
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.addsub(o, true)
    }

    fn addsub(&self, o: &Self, negate: bool) -> Self {
        if o.terms.is_empty() {
            return self.clone();
        }
        if self.terms.is_empty() {
            return if negate { o.neg() } else { o.clone() };
        }
        if self.n != o.n {
            let (a, b) = Self::common(self, o);
            return a.addsub(&b, negate);
        }
        let den = &self.den * &o.den / self.den.gcd(&o.den);
        let fa = &den / &self.den;
        let fb = &den / &o.den;
        let mut out: Vec<(u32, BigInt)> = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < o.terms.len() {
            let ka = self.terms.get(i).map(|t| t.0).unwrap_or(u32::MAX);
            let kb = o.terms.get(j).map(|t| t.0).unwrap_or(u32::MAX);
            if ka < kb {
                out.push((ka, &self.terms[i].1 * &fa));
                i += 1;
            } else if kb < ka {
                let v = &o.terms[j].1 * &fb;
                out.push((kb, if negate { -v } else { v }));
                j += 1;
            } else {
                let v = &o.terms[j].1 * &fb;
                let s = &self.terms[i].1 * &fa + if negate { -v } else { v };
                if !s.is_zero() {
                    out.push((ka, s));
                }
                i += 1;
                j += 1;
            }
        }
        let mut s = CycScalar { n: self.n, terms: out, den };
        s.normalize();
        s
    }

    pub fn neg(&self) -> Self {
        CycScalar {
            n: self.n,
            terms: self.terms.iter().map(|(k, c)| (*k, -c.clone())).collect(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.terms.is_empty() || o.terms.is_empty() {
            return Self::zero();
        }
        if self.n != o.n {
            let (a, b) = Self::common(self, o);
            return a.mul(&b);
        }
        if let Some(r) = o.as_rational() {
            return self.scale(&r);
        }
        if let Some(r) = self.as_rational() {
            return o.scale(&r);
        }
        let f = field(self.n);
        let mut acc = vec![BigInt::zero(); 2 * f.phi];
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                acc[(ka + kb) as usize] += ca * cb;
            }
        }
        Self::from_dense(self.n, &f, acc, &self.den * &o.den)
    }

    pub fn scale(&self, r: &Q) -> Self {
        if r.is_zero() || self.terms.is_empty() {
            return Self::zero();
        }
        let mut s = CycScalar {
            n: self.n,
            terms: self.terms.iter().map(|(k, c)| (*k, c * r.numer())).collect(),
            den: &self.den * r.denom(),
        };
        s.normalize();
        s
    }

    pub fn pow(&self, k: i64) -> Self {
        if k < 0 {
            return self.inv().expect("inverse of zero").pow(-k);
        }
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Complex conjugation ζ ↦ ζ^{−1}.
    pub fn conj(&self) -> Self {
        if self.terms.is_empty() {
            return self.clone();
        }
        let f = field(self.n);
        let n = self.n as usize;
        let mut acc = vec![BigInt::zero(); n];
        for (k, c) in &self.terms {
            acc[(n - *k as usize) % n] += c;
        }
        Self::from_dense(self.n, &f, acc, self.den.clone())
    }

    pub fn inv(&self) -> Option<Self> {
        if self.terms.is_empty() {
            return None;
        }
        if self.terms.len() == 1 {
            let (k, c) = &self.terms[0];
            let mono = Self::monomial(self.n, (self.n - *k) % self.n);
            return Some(mono.scale(&Q::new(self.den.clone(), c.clone())));
        }
        let f = field(self.n);
        let poly = cyclotomic_poly(self.n);
        let mut a = vec![Q::zero(); f.phi];
        for (k, c) in &self.terms {
            a[*k as usize] = Q::new(c.clone(), self.den.clone());
        }
        let m: Vec<Q> = poly.iter().map(|&c| qi(c)).collect();
        let inv = poly_inverse_mod(&a, &m)?;
        let den = inv.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut acc = vec![BigInt::zero(); f.phi.max(1)];
        for (k, c) in inv.iter().enumerate() {
            acc[k] = (c * Q::from_integer(den.clone())).to_integer();
        }
        Some(Self::from_dense(self.n, &f, acc, den))
    }

    pub fn div(&self, o: &Self) -> Result<Self, ScalarError> {
        let i = o.inv().ok_or(ScalarError::DivisionByZero)?;
        Ok(self.mul(&i))
    }

    pub fn approx(&self) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        let d = self.den.to_f64().unwrap_or(f64::NAN);
        for (k, c) in &self.terms {
            let t = 2.0 * std::f64::consts::PI * (*k as f64) / (self.n as f64);
            z += Complex64::new(t.cos(), t.sin()) * (c.to_f64().unwrap_or(f64::NAN) / d);
        }
        z
    }

    /// Rational coefficients in the power basis of the conductor.
    pub fn coeffs(&self) -> Vec<Q> {
        let phi = euler_phi(self.n);
        let mut v = vec![Q::zero(); phi];
        for (k, c) in &self.terms {
            v[*k as usize] = Q::new(c.clone(), self.den.clone());
        }
        v
    }

    pub fn to_json(&self) -> ScalarJson {
        let z = self.approx();
        ScalarJson {
            conductor: self.n,
            coeffs: self.coeffs().iter().map(fmt_q).collect(),
            approx: [z.re, z.im],
        }
    }

    pub fn from_json(j: &ScalarJson) -> Result<Self, ScalarError> {
        if j.conductor == 0 || j.conductor % 2 == 1 {
            return Err(ScalarError::BadConductor(j.conductor));
        }
        let f = field(j.conductor);
        let vals: Vec<Q> = j.coeffs.iter().map(|s| parse_q(s).unwrap_or_else(Q::zero)).collect();
        let den = vals.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut acc = vec![BigInt::zero(); (j.conductor as usize).max(vals.len())];
        for (k, c) in vals.iter().enumerate() {
            acc[k] = (c * Q::from_integer(den.clone())).to_integer();
        }
        Ok(Self::from_dense(j.conductor, &f, acc, den))
    }
}

fn reduce_in_place(f: &Field, acc: &mut [BigInt]) {
    let n = f.phi;
    for k in (n..acc.len()).rev() {
        if acc[k].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut acc[k]);
        let base = k - n;
        for &(j, t) in &f.tail {
            acc[base + j] -= &c * t;
        }
    }
}

fn poly_trim(p: &mut Vec<Q>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_divrem(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![], r);
    }
    let lead = b[db].clone();
    let mut quo = vec![Q::zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let c = &r[r.len() - 1] / &lead;
        for (j, bj) in b.iter().enumerate() {
            let t = &c * bj;
            r[k + j] -= t;
        }
        quo[k] = c;
        r.pop();
        poly_trim(&mut r);
    }
    (quo, r)
}

fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    poly_trim(&mut out);
    out
}

/// Inverse of a modulo m over Q by the extended Euclidean algorithm.
fn poly_inverse_mod(a: &[Q], m: &[Q]) -> Option<Vec<Q>> {
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    poly_trim(&mut r1);
    let mut s0: Vec<Q> = vec![];
    let mut s1: Vec<Q> = vec![Q::one()];
    while !r1.is_empty() {
        let (quo, rem) = poly_divrem(&r0, &r1);
        let s2 = poly_sub(&s0, &poly_mul(&quo, &s1));
        r0 = std::mem::replace(&mut r1, rem);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = r0[0].clone();
    let (_, s) = poly_divrem(&s0, m);
    let mut out: Vec<Q> = s.iter().map(|x| x / &c).collect();
    if out.is_empty() {
        out.push(Q::zero());
    }
    Some(out)
}

impl PartialEq for CycScalar {
    fn eq(&self, o: &Self) -> bool {
        if self.terms.is_empty() || o.terms.is_empty() {
            return self.terms.is_empty() && o.terms.is_empty();
        }
        if self.n == o.n {
            return self.den == o.den && self.terms == o.terms;
        }
        let m = lcm(self.n, o.n);
        let a = self.lift(m);
        let b = o.lift(m);
        a.den == b.den && a.terms == b.terms
    }
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let coef = fmt_q(&Q::new(c.clone(), self.den.clone()));
                if *k == 0 {
                    coef
                } else {
                    format!("({})z{}^{}", coef, self.n, k)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// JSON form of a cyclotomic scalar.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScalarJson {
    pub conductor: u32,
    pub coeffs: Vec<String>,
    pub approx: [f64; 2],
}

/// e^{πi r} as ζ_N^{rN/2}.
pub fn embed_rootexp(r: &Q, n: u32) -> Result<CycScalar, ScalarError> {
    if n == 0 || n % 2 == 1 {
        return Err(ScalarError::BadConductor(n));
    }
    let e = r * qi(n as i64) / qi(2);
    if !e.is_integer() {
        return Err(ScalarError::ConductorMismatch { r: fmt_q(r), n });
    }
    let k = e.to_integer().mod_floor(&BigInt::from(n)).to_u32().unwrap();
    Ok(CycScalar::monomial(n, k))
}

/// {x} = q^x − q^{−x} with q = e^{πi/p}.
pub fn qbrace(x: &Q, p: u32) -> CycScalar {
    CycScalar::qpow(x, p).sub(&CycScalar::qpow(&-x, p))
}

/// [x] = {x}/{1}.
pub fn qint(x: &Q, p: u32) -> CycScalar {
    qbrace(x, p).div(&qbrace(&Q::one(), p)).expect("{1} is nonzero for p >= 2")
}

/// {n}! = {1}{2}…{n}.
pub fn qbrace_factorial(n: u32, p: u32) -> CycScalar {
    (1..=n).fold(CycScalar::one(), |acc, k| acc.mul(&qbrace(&qi(k as i64), p)))
}

/// Field interface shared by the exact and floating backends, so the
/// module and ribbon code runs on either.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_q(x: &Q) -> Self;
    /// e^{πi r}.
    fn root(r: &Q) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    fn conj(&self) -> Self;
    fn approx(&self) -> Complex64;

    fn from_i64(k: i64) -> Self {
        Self::from_q(&qi(k))
    }
    fn qpow(x: &Q, p: u32) -> Self {
        Self::root(&(x / qi(p as i64)))
    }
    fn qbrace(x: &Q, p: u32) -> Self {
        Self::qpow(x, p).sub(&Self::qpow(&-x, p))
    }
    fn qint(x: &Q, p: u32) -> Self {
        Self::qbrace(x, p).mul(&Self::qbrace(&Q::one(), p).inv().expect("{1} != 0"))
    }
    fn is_one(&self) -> bool {
        self.sub(&Self::one()).is_zero()
    }
    /// Rough cost of dividing by this value; elimination prefers cheap pivots.
    fn weight(&self) -> usize {
        1
    }
}

impl Scalar for CycScalar {
    fn zero() -> Self {
        CycScalar::zero()
    }
    fn one() -> Self {
        CycScalar::one()
    }
    fn from_q(x: &Q) -> Self {
        CycScalar::from_q(x)
    }
    fn root(r: &Q) -> Self {
        CycScalar::root(r)
    }
    fn add(&self, o: &Self) -> Self {
        CycScalar::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        CycScalar::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        CycScalar::mul(self, o)
    }
    fn neg(&self) -> Self {
        CycScalar::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        CycScalar::inv(self)
    }
    fn is_zero(&self) -> bool {
        CycScalar::is_zero(self)
    }
    fn conj(&self) -> Self {
        CycScalar::conj(self)
    }
    fn approx(&self) -> Complex64 {
        CycScalar::approx(self)
    }
    fn weight(&self) -> usize {
        self.terms.len()
    }
}

/// Absolute tolerance of the floating backend.
pub const FLOAT_TOL: f64 = 1e-10;

/// Complex double mirror of [`CycScalar`]. Equality and zero tests use
/// [`FLOAT_TOL`] relative to max(1, |z|).
#[derive(Debug, Clone, Copy)]
pub struct FloatScalar(pub Complex64);

impl PartialEq for FloatScalar {
    fn eq(&self, o: &Self) -> bool {
        let scale = 1f64.max(self.0.norm()).max(o.0.norm());
        (self.0 - o.0).norm() <= FLOAT_TOL * scale
    }
}

impl Scalar for FloatScalar {
    fn zero() -> Self {
        FloatScalar(Complex64::new(0.0, 0.0))
    }
    fn one() -> Self {
        FloatScalar(Complex64::new(1.0, 0.0))
    }
    fn from_q(x: &Q) -> Self {
        FloatScalar(Complex64::new(q_to_f64(x), 0.0))
    }
    fn root(r: &Q) -> Self {
        FloatScalar(RootExp::new(r.clone()).approx())
    }
    fn add(&self, o: &Self) -> Self {
        FloatScalar(self.0 + o.0)
    }
    fn sub(&self, o: &Self) -> Self {
        FloatScalar(self.0 - o.0)
    }
    fn mul(&self, o: &Self) -> Self {
        FloatScalar(self.0 * o.0)
    }
    fn neg(&self) -> Self {
        FloatScalar(-self.0)
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(FloatScalar(self.0.inv()))
        }
    }
    fn is_zero(&self) -> bool {
        self.0.norm() <= 1e-9
    }
    fn conj(&self) -> Self {
        FloatScalar(self.0.conj())
    }
    fn approx(&self) -> Complex64 {
        self.0
    }
}

impl std::ops::Add for &CycScalar {
    type Output = CycScalar;
    fn add(self, o: &CycScalar) -> CycScalar {
        CycScalar::add(self, o)
    }
}
impl std::ops::Sub for &CycScalar {
    type Output = CycScalar;
    fn sub(self, o: &CycScalar) -> CycScalar {
        CycScalar::sub(self, o)
    }
}
impl std::ops::Mul for &CycScalar {
    type Output = CycScalar;
    fn mul(self, o: &CycScalar) -> CycScalar {
        CycScalar::mul(self, o)
    }
}
impl std::ops::Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        CycScalar::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_small() {
        assert_eq!(*cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(*cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(euler_phi(320), 128);
    }

    #[test]
    fn embed_examples() {
        assert!(embed_rootexp(&qi(0), 2).unwrap().is_one());
        assert_eq!(embed_rootexp(&qi(1), 2).unwrap(), CycScalar::from_i64(-1));
        let z = embed_rootexp(&q(1, 3), 6).unwrap();
        assert_eq!(z.pow(3), CycScalar::from_i64(-1));
        assert!(matches!(
            embed_rootexp(&q(1, 3), 4),
            Err(ScalarError::ConductorMismatch { .. })
        ));
    }

    #[test]
    fn brackets() {
        for p in 2..7 {
            assert!(qbrace(&qi(p as i64), p).is_zero());
            assert!(qint(&qi(1), p).is_one());
            assert!(qint(&qi(p as i64), p).is_zero());
        }
        let z4 = embed_rootexp(&q(1, 2), 4).unwrap();
        assert_eq!(qbrace(&qi(1), 2), z4.add(&z4));
        assert!(qint(&qi(2), 3).is_one());
    }

    #[test]
    fn inverse_and_conj() {
        let _g = conductor_scope(40);
        let a = CycScalar::root(&q(1, 20)).add(&CycScalar::from_i64(3));
        let b = a.inv().unwrap();
        assert!(a.mul(&b).is_one());
        assert_eq!(a.conj().conj(), a);
        let r = CycScalar::root(&q(3, 10));
        assert_eq!(r.conj(), CycScalar::root(&q(-3, 10)));
        assert_eq!(qbrace(&q(1, 2), 3).conj(), qbrace(&q(1, 2), 3).neg());
    }

    #[test]
    fn float_mirror() {
        let a = CycScalar::root(&q(1, 8)).add(&CycScalar::from_i64(2));
        let b = qbrace(&q(3, 4), 5);
        let prod = a.mul(&b).approx();
        let fprod = a.approx() * b.approx();
        assert!((prod - fprod).norm() < 1e-12 * fprod.norm().max(1.0));
    }

    #[test]
    fn json_roundtrip() {
        let a = CycScalar::root(&q(1, 6)).scale(&q(-2, 3)).add(&CycScalar::from_i64(1));
        let j = a.to_json();
        assert_eq!(CycScalar::from_json(&j).unwrap(), a);
    }
}
