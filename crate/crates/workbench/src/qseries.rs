//! Truncated bivariate series in q (rational exponents with a fixed
//! denominator) and x (integer exponents), infinite products of factors
//! (1 − x^b q^e), and the characters built from them.
//!
//! Every series stored here has q-exponents ≥ 0. Monomial prefactors,
//! phases and the fractional x-powers live in a [`Ledger`], so truncation
//! at q^D is exact under multiplication.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::report::CheckReport;
use crate::scalars::{fmt_q, q, q_floor, q_mod, qi, Q};

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("exponent {0} has denominator not dividing {1}")]
    Denominator(String, i64),
    #[error("series are truncated with incompatible data")]
    Mismatch,
    #[error("factor (1 - x^{0} q^{1}) in a denominator vanishes identically")]
    Pole(i64, String),
    #[error("empty series")]
    Empty,
    #[error("the Δ^(1/2) product is not a perfect square")]
    NotSquare,
    #[error("the root-system formula needs p >= 3, got {0}")]
    Unsupported(u32),
}

/// γ q^a x^b with γ = e^{πi·phase}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ledger {
    #[serde(serialize_with = "ser_q")]
    pub phase: Q,
    #[serde(serialize_with = "ser_q")]
    pub qshift: Q,
    #[serde(serialize_with = "ser_q")]
    pub xshift: Q,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

impl Default for Ledger {
    fn default() -> Self {
        Ledger { phase: Q::zero(), qshift: Q::zero(), xshift: Q::zero() }
    }
}

impl Ledger {
    pub fn mul(&self, o: &Ledger) -> Ledger {
        Ledger {
            phase: q_mod(&(&self.phase + &o.phase), 2),
            qshift: &self.qshift + &o.qshift,
            xshift: &self.xshift + &o.xshift,
        }
    }

    pub fn pow(&self, k: i64) -> Ledger {
        Ledger {
            phase: q_mod(&(&self.phase * qi(k)), 2),
            qshift: &self.qshift * qi(k),
            xshift: &self.xshift * qi(k),
        }
    }
}

/// Truncated series Σ c q^{n/d} x^m, n/d ≤ cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct PSeries {
    pub d: i64,
    /// cutoff in units of 1/d
    pub cutoff: i64,
    pub terms: BTreeMap<(i64, i64), Q>,
    /// set when a 1/(1−x) expansion had to be cut at |x-exponent| ≤ bound
    pub xbound: Option<i64>,
}

impl PSeries {
    pub fn zero(d: i64, cutoff: &Q) -> Result<Self, SeriesError> {
        Ok(PSeries { d, cutoff: to_units(cutoff, d)?, terms: BTreeMap::new(), xbound: None })
    }

    pub fn one(d: i64, cutoff: &Q) -> Result<Self, SeriesError> {
        let mut s = Self::zero(d, cutoff)?;
        s.terms.insert((0, 0), Q::one());
        Ok(s)
    }

    pub fn cutoff_q(&self) -> Q {
        q(self.cutoff, self.d)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, qe: &Q, xe: i64) -> Q {
        to_units(qe, self.d).ok().and_then(|n| self.terms.get(&(n, xe)).cloned()).unwrap_or_else(Q::zero)
    }

    fn add_term(&mut self, n: i64, m: i64, c: Q) {
        if n > self.cutoff || c.is_zero() {
            return;
        }
        if let Some(b) = self.xbound {
            if m.abs() > b {
                return;
            }
        }
        let e = self.terms.entry((n, m)).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(n, m));
        }
    }

    fn compatible(&self, o: &PSeries) -> Result<(), SeriesError> {
        (self.d == o.d).then_some(()).ok_or(SeriesError::Mismatch)
    }

    fn join_bounds(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) | (None, x) => x,
        }
    }

    pub fn add(&self, o: &PSeries) -> Result<PSeries, SeriesError> {
        self.compatible(o)?;
        let mut out = PSeries {
            d: self.d,
            cutoff: self.cutoff.min(o.cutoff),
            terms: BTreeMap::new(),
            xbound: Self::join_bounds(self.xbound, o.xbound),
        };
        for ((n, m), c) in self.terms.iter().chain(o.terms.iter()) {
            out.add_term(*n, *m, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Q) -> PSeries {
        let mut out = PSeries { terms: BTreeMap::new(), ..self.clone() };
        for (k, v) in &self.terms {
            out.add_term(k.0, k.1, v * c);
        }
        out
    }

    pub fn neg(&self) -> PSeries {
        self.scale(&-Q::one())
    }

    pub fn mul(&self, o: &PSeries) -> Result<PSeries, SeriesError> {
        self.compatible(o)?;
        let mut out = PSeries {
            d: self.d,
            cutoff: self.cutoff.min(o.cutoff),
            terms: BTreeMap::new(),
            xbound: Self::join_bounds(self.xbound, o.xbound),
        };
        for ((n1, m1), c1) in &self.terms {
            if *n1 > out.cutoff {
                break;
            }
            for ((n2, m2), c2) in &o.terms {
                if n1 + n2 > out.cutoff {
                    break;
                }
                out.add_term(n1 + n2, m1 + m2, c1 * c2);
            }
        }
        Ok(out)
    }

    /// Multiplies by the monomial q^{n/d} x^m, n ≥ 0.
    pub fn shift(&self, n: i64, m: i64) -> PSeries {
        let mut out = PSeries { terms: BTreeMap::new(), ..self.clone() };
        for ((a, b), c) in &self.terms {
            out.add_term(a + n, b + m, c.clone());
        }
        out
    }

    /// Multiplies by (1 − x^b q^{n/d}).
    fn mul_factor(&self, b: i64, n: i64) -> PSeries {
        let mut out = self.clone();
        for ((a, m), c) in &self.terms {
            out.add_term(a + n, m + b, -c.clone());
        }
        out
    }

    /// Divides by (1 − x^b q^{n/d}) with n > 0, or n = 0 and b > 0 under the
    /// convention 1/(1−x) = Σ x^r, cut at |x-exponent| ≤ xbound.
    fn div_factor(&self, b: i64, n: i64, xbound: i64) -> Result<PSeries, SeriesError> {
        if n < 0 || (n == 0 && b <= 0) {
            return Err(SeriesError::Pole(b, fmt_q(&q(n, self.d))));
        }
        let mut out = PSeries { terms: BTreeMap::new(), ..self.clone() };
        if n == 0 {
            out.xbound = Self::join_bounds(out.xbound, Some(xbound));
        }
        // T = S + x^b q^n T; new terms always sort after the one producing
        // them, so popping the smallest pending key is a valid order.
        let bound = out.xbound;
        let mut pending = self.terms.clone();
        while let Some(((a, m), c)) = pending.pop_first() {
            let (na, nm) = (a + n, m + b);
            if na <= out.cutoff && bound.map_or(true, |xb| nm.abs() <= xb) {
                let e = pending.entry((na, nm)).or_insert_with(Q::zero);
                *e += &c;
            }
            out.add_term(a, m, c);
        }
        Ok(out)
    }

    pub fn truncate(&self, cutoff: &Q) -> Result<PSeries, SeriesError> {
        let c = to_units(cutoff, self.d)?.min(self.cutoff);
        let mut out = PSeries { cutoff: c, terms: BTreeMap::new(), ..self.clone() };
        for (k, v) in &self.terms {
            out.add_term(k.0, k.1, v.clone());
        }
        Ok(out)
    }

    /// Lexicographically smallest (q, x) term.
    pub fn leading(&self) -> Option<((i64, i64), &Q)> {
        self.terms.iter().next().map(|(k, v)| (*k, v))
    }

    /// Lines "q^{a} x^{b} : c" sorted by (a, b).
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for ((n, m), c) in &self.terms {
            let _ = writeln!(s, "q^{{{}}} x^{{{}}} : {}", fmt_q(&q(*n, self.d)), m, fmt_q(c));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|((n, m), c)| json!([fmt_q(&q(*n, self.d)), m, fmt_q(c)]))
            .collect();
        json!({"d": self.d, "cutoff": fmt_q(&self.cutoff_q()), "xbound": self.xbound, "terms": terms})
    }
}

fn to_units(x: &Q, d: i64) -> Result<i64, SeriesError> {
    let y = x * qi(d);
    if !y.is_integer() {
        return Err(SeriesError::Denominator(fmt_q(x), d));
    }
    i64::try_from(y.to_integer()).map_err(|_| SeriesError::Denominator(fmt_q(x), d))
}

/// lcm(24, 4p, 2).
pub fn default_denominator(p: u32) -> i64 {
    24i64.lcm(&(4 * p as i64)).lcm(&2)
}

/// A series together with its monomial prefactor.
#[derive(Debug, Clone)]
pub struct Character {
    pub ledger: Ledger,
    pub series: PSeries,
}

impl Character {
    pub fn add(&self, o: &Character) -> Result<Character, SeriesError> {
        if self.ledger != o.ledger {
            return Err(SeriesError::Mismatch);
        }
        Ok(Character { ledger: self.ledger.clone(), series: self.series.add(&o.series)? })
    }

    pub fn dump(&self) -> String {
        format!(
            "# phase e^(pi i {}) qshift {} xshift {}\n{}",
            fmt_q(&self.ledger.phase),
            fmt_q(&self.ledger.qshift),
            fmt_q(&self.ledger.xshift),
            self.series.dump()
        )
    }
}

/// A formal product ledger · Π (1 − x^b q^e)^{m}.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProductForm {
    pub ledger: Ledger,
    pub factors: BTreeMap<(i64, Q), i64>,
    /// a factor (1 − 1) occurs in the numerator
    pub vanishes: bool,
}

impl ProductForm {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn monomial(ledger: Ledger) -> Self {
        ProductForm { ledger, ..Default::default() }
    }

    /// (1 − x^b q^e)^m, normalized so the stored exponent is positive
    /// (or zero with b > 0):
    /// 1 − X = −X(1 − X⁻¹).
    pub fn factor(b: i64, e: Q, m: i64) -> Self {
        let mut out = Self::one();
        out.push(b, e, m);
        out
    }

    fn push(&mut self, b: i64, e: Q, m: i64) {
        if m == 0 {
            return;
        }
        if b == 0 && e.is_zero() {
            if m > 0 {
                self.vanishes = true;
            } else {
                // recorded as a pole; expansion fails on it
                *self.factors.entry((0, e)).or_default() += m;
            }
            return;
        }
        let (b, e) = if e.is_negative() || (e.is_zero() && b < 0) {
            self.ledger = self.ledger.mul(&Ledger { phase: qi(m), qshift: &e * qi(m), xshift: qi(b * m) });
            (-b, -e)
        } else {
            (b, e)
        };
        let slot = self.factors.entry((b, e.clone())).or_default();
        *slot += m;
        if *slot == 0 {
            self.factors.remove(&(b, e));
        }
    }

    pub fn mul(&self, o: &ProductForm) -> ProductForm {
        let mut out = self.clone();
        out.ledger = out.ledger.mul(&o.ledger);
        out.vanishes |= o.vanishes;
        for ((b, e), m) in &o.factors {
            let slot = out.factors.entry((*b, e.clone())).or_default();
            *slot += m;
            if *slot == 0 {
                out.factors.remove(&(*b, e.clone()));
            }
        }
        out
    }

    pub fn pow(&self, k: i64) -> ProductForm {
        ProductForm {
            ledger: self.ledger.pow(k),
            factors: self.factors.iter().map(|(f, m)| (f.clone(), m * k)).filter(|(_, m)| *m != 0).collect(),
            vanishes: self.vanishes && k > 0,
        }
    }

    /// The square root of a product with even multiplicities.
    pub fn sqrt(&self) -> Result<ProductForm, SeriesError> {
        if self.vanishes || self.factors.values().any(|m| m % 2 != 0) {
            return Err(SeriesError::NotSquare);
        }
        Ok(ProductForm {
            ledger: Ledger {
                phase: &self.ledger.phase / qi(2),
                qshift: &self.ledger.qshift / qi(2),
                xshift: &self.ledger.xshift / qi(2),
            },
            factors: self.factors.iter().map(|(f, m)| (f.clone(), m / 2)).collect(),
            vanishes: false,
        })
    }

    /// Expands the factors to order q^cutoff.
    pub fn expand(&self, d: i64, cutoff: &Q, xbound: i64) -> Result<Character, SeriesError> {
        let mut s = PSeries::one(d, cutoff)?;
        if self.vanishes {
            s.terms.clear();
            return Ok(Character { ledger: self.ledger.clone(), series: s });
        }
        for ((b, e), m) in &self.factors {
            let n = to_units(e, d)?;
            if n > s.cutoff {
                continue;
            }
            for _ in 0..m.abs() {
                s = if *m > 0 { s.mul_factor(*b, n) } else { s.div_factor(*b, n, xbound)? };
            }
        }
        Ok(Character { ledger: self.ledger.clone(), series: s })
    }

    /// Factors with exponent ≤ bound, as (b, e, multiplicity).
    pub fn summary(&self, bound: &Q) -> Vec<Value> {
        self.factors
            .iter()
            .filter(|((_, e), _)| e <= bound)
            .map(|((b, e), m)| json!([b, fmt_q(e), m]))
            .collect()
    }
}

/// Π_{k≥1} (1 − x^b q^{step·k + offset})^m over the exponents ≤ cutoff,
/// including every non-positive one.
fn family(b: i64, step: &Q, offset: &Q, m: i64, cutoff: &Q) -> ProductForm {
    let mut out = ProductForm::one();
    let mut k = 1;
    loop {
        let e = step * qi(k) + offset;
        if e.abs() > *cutoff && e.is_positive() {
            break;
        }
        out.push(b, e, m);
        k += 1;
    }
    out
}

/// η(mτ) = q^{m/24} Π (1 − q^{mk}).
pub fn eta_factor(m: i64, cutoff: &Q) -> ProductForm {
    let mut out = family(0, &qi(m), &Q::zero(), 1, cutoff);
    out.ledger.qshift += q(m, 24);
    out
}

/// ϑ11(mτ, z) with e^{2πiz} = u = x^b q^a:
/// −i Q^{1/12} u^{−1/2} η(mτ) Π_{k≥1} (1 − u⁻¹Q^k)(1 − uQ^{k−1}), Q = q^m.
pub fn theta11(m: i64, b: i64, a: &Q, cutoff: &Q) -> ProductForm {
    let pre = ProductForm::monomial(Ledger { phase: q(-1, 2), qshift: q(m, 12) - a / qi(2), xshift: q(-b, 2) });
    let mq = qi(m);
    // the factors carry exponents shifted by ±a, so widen the range
    let wide = cutoff + a.abs();
    let f1 = family(-b, &mq, &-a, 1, &wide);
    let f2 = family(b, &mq, &(a - &mq), 1, &wide);
    pre.mul(&eta_factor(m, cutoff)).mul(&f1).mul(&f2)
}

/// ϑ01(mτ, z) = Π_{k≥1} (1 − u⁻¹Q^{k−1/2})(1 − Q^k)(1 − uQ^{k−1/2}).
pub fn theta01(m: i64, b: i64, a: &Q, cutoff: &Q) -> ProductForm {
    let mq = qi(m);
    let half = q(m, 2);
    let wide = cutoff + a.abs();
    family(-b, &mq, &(-a - &half), 1, &wide)
        .mul(&family(0, &mq, &Q::zero(), 1, cutoff))
        .mul(&family(b, &mq, &(a - &half), 1, &wide))
}

/// Drops factors whose exponent exceeds the cutoff; they do not affect
/// the expansion.
fn prune(f: ProductForm, cutoff: &Q) -> ProductForm {
    ProductForm { factors: f.factors.into_iter().filter(|((_, e), _)| e <= cutoff).collect(), ..f }
}

/// η(pτ)²/η(τ)² Π_{k≥0} (1−q^{pk+1})(1−q^{p(k+1)−1}) over the four
/// factors (1 − x^{±1} q^{p(k+1/2)±1/2}).
pub fn char_bp_product_form(p: u32, cutoff: &Q) -> ProductForm {
    let pq = qi(p as i64);
    let mut f = eta_factor(p as i64, cutoff).pow(2).mul(&eta_factor(1, cutoff).pow(-2));
    // k ≥ 0 written as k' = k+1 ≥ 1
    f = f.mul(&family(0, &pq, &(qi(1) - &pq), 1, cutoff));
    f = f.mul(&family(0, &pq, &qi(-1), 1, cutoff));
    for b in [1, -1] {
        for s in [q(1, 2), q(-1, 2)] {
            f = f.mul(&family(b, &pq, &(-&pq / qi(2) + &s), -1, cutoff));
        }
    }
    prune(f, cutoff)
}

pub fn char_bp_product(p: u32, cutoff: &Q) -> Result<Character, SeriesError> {
    char_bp_product_form(p, cutoff).expand(default_denominator(p), cutoff, xbound_for(cutoff))
}

fn xbound_for(cutoff: &Q) -> i64 {
    4 * q_floor(cutoff) + 8
}

/// Positive roots α_{i,j} = α_i + … + α_j of sl_n with their H- and
/// K-evaluations. α(K) is recorded as the coefficient of v.
#[derive(Debug, Clone, Serialize)]
pub struct RootDatum {
    pub n: u32,
    pub roots: Vec<(u32, u32)>,
    #[serde(serialize_with = "ser_qs")]
    pub h: Vec<Q>,
    pub k: Vec<i64>,
    /// Δ₊⁰ as indices into roots
    pub delta0: Vec<usize>,
    /// Δ^{1/2} as (index, sign)
    pub delta_half: Vec<(usize, i64)>,
}

fn ser_qs<S: serde::Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&fmt_q(x))?;
    }
    seq.end()
}

impl RootDatum {
    /// n = p − 1.
    pub fn new(p: u32) -> Result<Self, SeriesError> {
        if p < 3 {
            return Err(SeriesError::Unsupported(p));
        }
        let n = p - 1;
        let mut roots = Vec::new();
        let (mut h, mut k) = (Vec::new(), Vec::new());
        for i in 1..n {
            for j in i..n {
                roots.push((i, j));
                if j < n - 1 {
                    h.push(qi((j - i + 1) as i64));
                    k.push(0);
                } else {
                    h.push(q(n as i64, 2) - qi(i as i64));
                    k.push(1);
                }
            }
        }
        let find = |i: u32| roots.iter().position(|&r| r == (i, n - 1)).expect("root present");
        let (delta0, delta_half) = if n % 2 == 0 {
            (vec![find(n / 2)], vec![])
        } else {
            (vec![], vec![(find((n - 1) / 2), 1), (find((n + 1) / 2), -1)])
        };
        let rd = RootDatum { n, roots, h, k, delta0, delta_half };
        debug_assert!(rd.delta0.iter().all(|&r| rd.h[r].is_zero()));
        debug_assert!(rd.delta_half.iter().all(|&(r, s)| rd.h[r].clone() * qi(s) == q(1, 2)));
        Ok(rd)
    }
}

/// The reduction character assembled from the root datum:
/// (−i)^{p(p+1)/2} q^{(p²−1)(p−2)/24} η(pτ)^{−p²/2+5p/2−3} / η(τ)^{p−3}
/// · Π_{Δ₊} ϑ11(pτ, α(K−τH)) / [Π_{Δ₊⁰} ϑ11(τ, α(K)) · (Π_{Δ^{1/2}} ϑ01(τ, β(K)))^{1/2}].
pub fn char_kw_form(p: u32, cutoff: &Q) -> Result<ProductForm, SeriesError> {
    let rd = RootDatum::new(p)?;
    let pi = p as i64;
    let mut f = ProductForm::monomial(Ledger {
        phase: q(-pi * (pi + 1), 4),
        qshift: q((pi * pi - 1) * (pi - 2), 24),
        xshift: Q::zero(),
    });
    assert!((pi * (5 - pi)) % 2 == 0);
    f = f.mul(&eta_factor(pi, cutoff).pow(pi * (5 - pi) / 2 - 3));
    f = f.mul(&eta_factor(1, cutoff).pow(-(pi - 3)));
    // α(K − τH): u = x^{α(K)} q^{−α(H)}
    for r in 0..rd.roots.len() {
        f = f.mul(&theta11(pi, rd.k[r], &-rd.h[r].clone(), cutoff));
    }
    for &r in &rd.delta0 {
        f = f.mul(&theta11(1, rd.k[r], &Q::zero(), cutoff).pow(-1));
    }
    if !rd.delta_half.is_empty() {
        let mut prod = ProductForm::one();
        for &(r, s) in &rd.delta_half {
            prod = prod.mul(&theta01(1, s * rd.k[r], &Q::zero(), cutoff));
        }
        f = f.mul(&prod.sqrt()?.pow(-1));
    }
    Ok(prune(f, cutoff))
}

pub fn char_kw(p: u32, cutoff: &Q) -> Result<Character, SeriesError> {
    char_kw_form(p, cutoff)?.expand(default_denominator(p), cutoff, xbound_for(cutoff))
}

/// ch[σ^{s'}(W_s)] = q^{s'²/4p − s'²/2} x^{s'/p − 2s'} / η(τ)² ·
/// Σ_n [ q^{pt₋²}/(1 − x q^{pt₋ + s'/2}) − q^{pt₊²}/(1 − x q^{pt₊ + s'/2}) ],
/// t∓ = n + 1/2 ∓ s/2p.
pub fn char_sigma_w(s: i64, sp: i64, p: u32, cutoff: &Q) -> Result<Character, SeriesError> {
    let pi = p as i64;
    let d = default_denominator(p);
    let xb = xbound_for(cutoff);
    let eta = eta_factor(1, cutoff).pow(-2);
    let ledger = Ledger {
        phase: Q::zero(),
        qshift: q(sp * sp, 4 * pi) - q(sp * sp, 2) + &eta.ledger.qshift,
        xshift: q(sp, pi) - qi(2 * sp),
    };
    let eta_series = ProductForm { ledger: Ledger::default(), ..eta }.expand(d, cutoff, xb)?.series;
    let mut sum = PSeries::zero(d, cutoff)?;
    let nmax = (q_floor(cutoff) as f64 / pi as f64).sqrt().ceil() as i64 + 3;
    for n in -nmax..=nmax {
        for (sign, t) in [(1, qi(n) + q(1, 2) - q(s, 2 * pi)), (-1, qi(n) + q(1, 2) + q(s, 2 * pi))] {
            let a = qi(pi) * &t * &t;
            let e = qi(pi) * &t + q(sp, 2);
            let mut term = PSeries::one(d, cutoff)?;
            if e.is_negative() {
                // 1/(1−X) = −X⁻¹/(1−X⁻¹)
                let shifted = &a - &e;
                if shifted > *cutoff {
                    continue;
                }
                term = term.shift(to_units(&shifted, d)?, -1).neg().div_factor(-1, to_units(&-e, d)?, xb)?;
            } else {
                if a > *cutoff {
                    continue;
                }
                term = term.shift(to_units(&a, d)?, 0).div_factor(1, to_units(&e, d)?, xb)?;
            }
            sum = sum.add(&term.scale(&qi(sign)))?;
        }
    }
    Ok(Character { ledger, series: sum.mul(&eta_series)? })
}

#[derive(Debug, Clone, Serialize)]
pub struct Equivalence {
    pub equivalent: bool,
    /// γ = sign · e^{πi·phase} · |ratio|
    #[serde(serialize_with = "ser_q")]
    pub gamma_phase: Q,
    #[serde(serialize_with = "ser_q")]
    pub gamma_ratio: Q,
    #[serde(serialize_with = "ser_q")]
    pub a: Q,
    #[serde(serialize_with = "ser_q")]
    pub b: Q,
    #[serde(serialize_with = "ser_q")]
    pub compared_to: Q,
    pub terms_compared: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<(String, i64)>,
}

/// Decides A = γ q^a x^b B: both series are normalized to leading term 1 at
/// (0, 0) and compared up to the shorter safe cutoff.
pub fn equiv_check(a: &Character, b: &Character) -> Result<Equivalence, SeriesError> {
    a.series.compatible(&b.series)?;
    let ((na, ma), ca) = a.series.leading().ok_or(SeriesError::Empty)?;
    let ((nb, mb), cb) = b.series.leading().ok_or(SeriesError::Empty)?;
    let d = a.series.d;
    let cut = (a.series.cutoff - na).min(b.series.cutoff - nb);
    let xb = PSeries::join_bounds(a.series.xbound, b.series.xbound);
    let norm = |s: &PSeries, n0: i64, m0: i64, c0: &Q| -> BTreeMap<(i64, i64), Q> {
        s.terms
            .iter()
            .filter(|((n, m), _)| n - n0 <= cut && xb.map_or(true, |x| (m - m0).abs() <= x / 2))
            .map(|((n, m), c)| ((n - n0, m - m0), c / c0))
            .collect()
    };
    let ta = norm(&a.series, na, ma, ca);
    let tb = norm(&b.series, nb, mb, cb);
    let keys: std::collections::BTreeSet<_> = ta.keys().chain(tb.keys()).cloned().collect();
    let mut mismatches = 0;
    let mut first = None;
    for k in &keys {
        if ta.get(k) != tb.get(k) {
            mismatches += 1;
            if first.is_none() {
                first = Some((fmt_q(&q(k.0, d)), k.1));
            }
        }
    }
    Ok(Equivalence {
        equivalent: mismatches == 0,
        gamma_phase: q_mod(&(&a.ledger.phase - &b.ledger.phase), 2),
        gamma_ratio: ca / cb,
        a: &a.ledger.qshift + q(na, d) - &b.ledger.qshift - q(nb, d),
        b: &a.ledger.xshift + qi(ma) - &b.ledger.xshift - qi(mb),
        compared_to: q(cut, d),
        terms_compared: keys.len(),
        mismatches,
        first_mismatch: first,
    })
}

/// char_kw against char_bp_product at cutoff D.
pub fn check_qh_identity(p: u32, cutoff: &Q) -> Result<(CheckReport, Equivalence), SeriesError> {
    let kw = char_kw(p, cutoff)?;
    let bp = char_bp_product(p, cutoff)?;
    let e = equiv_check(&kw, &bp)?;
    let mut rep = CheckReport::new(format!("qh character identity p={p}"));
    rep.record(e.equivalent, || json!({"first_mismatch": e.first_mismatch, "mismatches": e.mismatches}));
    rep.record(e.terms_compared > 0, || json!({"terms_compared": 0}));
    Ok((rep, e))
}

/// ch[σ^{s'}(W_0)] = 0 and ch[σ^{s'}(W_s)] + ch[σ^{s'}(W_{−s})] = 0 for
/// 0 ≤ s' < p, 1 ≤ s < p, with the W_s themselves nonzero.
pub fn check_sigma_relations(p: u32, cutoff: &Q) -> Result<CheckReport, SeriesError> {
    let pi = p as i64;
    let cases: Vec<(i64, i64)> = (0..pi).flat_map(|sp| (0..pi).map(move |s| (s, sp))).collect();
    let rows: Vec<Result<(bool, i64, i64), SeriesError>> = cases
        .par_iter()
        .map(|&(s, sp)| {
            let a = char_sigma_w(s, sp, p, cutoff)?;
            if s == 0 {
                return Ok((a.series.is_zero(), s, sp));
            }
            let b = char_sigma_w(-s, sp, p, cutoff)?;
            Ok((!a.series.is_zero() && a.add(&b)?.series.is_zero(), s, sp))
        })
        .collect();
    let mut rep = CheckReport::new(format!("sigma relations p={p}"));
    for r in rows {
        let (ok, s, sp) = r?;
        rep.record(ok, || json!({"s": s, "sp": sp}));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_euler(n: usize) -> Vec<i64> {
        let mut c = vec![0i64; n + 1];
        c[0] = 1;
        for k in 1..=n {
            for j in (k..=n).rev() {
                c[j] -= c[j - k];
            }
        }
        c
    }

    #[test]
    fn eta_pentagonal() {
        let d = 24;
        let e = eta_factor(1, &qi(12)).expand(d, &qi(12), 8).unwrap();
        assert_eq!(e.ledger.qshift, q(1, 24));
        let want = dense_euler(12);
        for (k, w) in want.iter().enumerate() {
            assert_eq!(e.series.coeff(&qi(k as i64), 0), qi(*w));
        }
        // pentagonal signs
        for k in [1, 2, 5, 7, 12] {
            assert!(want[k] != 0);
        }
        assert_eq!(eta_factor(3, &qi(5)).ledger.qshift, q(1, 8));
    }

    #[test]
    fn eta_ratio_leading() {
        for p in 2..6i64 {
            let f = eta_factor(p, &qi(4)).pow(2).mul(&eta_factor(1, &qi(4)).pow(-2));
            assert_eq!(f.ledger.qshift, q(p - 1, 12));
        }
    }

    #[test]
    fn theta11_vanishes_on_lattice() {
        let t = theta11(1, 0, &qi(1), &qi(6));
        assert!(t.vanishes);
        assert!(t.expand(24, &qi(6), 8).unwrap().series.is_zero());
        let t = theta11(3, 1, &q(1, 2), &qi(6));
        let pre = Ledger { phase: q(3, 2), qshift: q(3, 12) - q(1, 4) + q(3, 24), xshift: q(-1, 2) };
        // the k = 1 factor (1 − x q^{1/2}) keeps its exponent
        assert_eq!(t.ledger, pre);
    }

    #[test]
    fn theta01_oracle() {
        let th = theta01(1, 0, &Q::zero(), &qi(8)).expand(24, &qi(8), 8).unwrap();
        // brute force in units of q^{1/2}
        let n = 16usize;
        let mut c = vec![0i64; n + 1];
        c[0] = 1;
        let mul = |c: &mut Vec<i64>, k: usize| {
            for j in (k..=n).rev() {
                c[j] -= c[j - k];
            }
        };
        for k in 1..=8 {
            mul(&mut c, 2 * k - 1);
            mul(&mut c, 2 * k - 1);
            mul(&mut c, 2 * k);
        }
        for (j, w) in c.iter().enumerate() {
            assert_eq!(th.series.coeff(&q(j as i64, 2), 0), qi(*w));
        }
    }

    #[test]
    fn bp_product_shape() {
        for p in 2..6u32 {
            let ch = char_bp_product(p, &qi(6)).unwrap();
            assert_eq!(ch.series.leading(), Some(((0, 0), &Q::one())));
            if p == 2 {
                for ((n, m), c) in &ch.series.terms {
                    assert_eq!(ch.series.terms.get(&(*n, -*m)), Some(c));
                }
            }
        }
    }

    #[test]
    fn kw_matches_product() {
        for p in 3..=5u32 {
            let a = char_kw(p, &qi(6)).unwrap();
            let b = char_bp_product(p, &qi(6)).unwrap();
            let eq = equiv_check(&a, &b).unwrap();
            assert!(eq.equivalent, "p={} {:?}", p, eq);
        }
    }

    #[test]
    fn equiv_trivial() {
        let a = char_bp_product(3, &qi(5)).unwrap();
        let e = equiv_check(&a, &a).unwrap();
        assert!(e.equivalent && e.a.is_zero() && e.b.is_zero() && e.gamma_ratio.is_one());
        let mut b = a.clone();
        b.ledger.qshift += q(1, 2);
        let e = equiv_check(&a, &b).unwrap();
        assert!(e.equivalent);
        assert_eq!(e.a, q(-1, 2));
    }

    #[test]
    fn sigma_relations() {
        for p in 2..=3u32 {
            for sp in 0..p as i64 {
                assert!(char_sigma_w(0, sp, p, &qi(6)).unwrap().series.is_zero());
                for s in 1..p as i64 {
                    let a = char_sigma_w(s, sp, p, &qi(6)).unwrap();
                    let b = char_sigma_w(-s, sp, p, &qi(6)).unwrap();
                    assert!(!a.series.is_zero());
                    assert!(a.add(&b).unwrap().series.is_zero());
                }
            }
        }
    }

    #[test]
    fn w1_is_bp() {
        for p in 2..=4u32 {
            let a = char_sigma_w(1, 0, p, &qi(6)).unwrap();
            let b = char_bp_product(p, &qi(6)).unwrap();
            let e = equiv_check(&a, &b).unwrap();
            assert!(e.equivalent, "p={} {:?}", p, e);
        }
    }

    #[test]
    fn kw_d10() {
        for p in 3..=5u32 {
            let a = char_kw(p, &qi(10)).unwrap();
            let b = char_bp_product(p, &qi(10)).unwrap();
            let e = equiv_check(&a, &b).unwrap();
            assert!(e.equivalent);
            assert!(e.b.is_zero());
        }
    }
}
