//! Heisenberg Fock lines, Deligne products with weight modules, the
//! simple-current algebra object and the induced labels in its local
//! module category.
//!
//! A Fock line F_γ is stored through its charge c = 2λ_pγ with
//! λ_p² = −p/2, so γ1γ2 = −c1c2/(2p) and every phase is a root of unity.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::qmodules::{ModLabel, WeightModule};
use crate::report::CheckReport;
use crate::ribbon;
use crate::scalars::{conductor_for, conductor_scope, fmt_q, parse_q, q, q_floor, q_is_int, qi, CycScalar, Scalar, Q};

#[derive(Debug, Error, PartialEq)]
pub enum DeligneError {
    #[error("module {0} is not in the catalogue")]
    NotCatalogue(String),
    #[error("{0} does not lift: monodromy with the simple current is not 1")]
    LiftViolation(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FockLine {
    #[serde(serialize_with = "ser_q")]
    pub c: Q,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

impl FockLine {
    pub fn new(c: Q) -> Self {
        FockLine { c }
    }

    /// The charge of F_{kλ_p}: 2λ_p·kλ_p = −kp.
    pub fn current(k: i64, p: u32) -> Self {
        FockLine { c: qi(-k * p as i64) }
    }

    /// e^{πiγ1γ2} = e^{−πi c1c2/(2p)}.
    pub fn braiding<S: Scalar>(&self, o: &FockLine, p: u32) -> S {
        S::root(&(-(&self.c * &o.c) / qi(2 * p as i64)))
    }

    /// e^{πiγ²} = e^{−πi c²/(2p)}.
    pub fn twist<S: Scalar>(&self, p: u32) -> S {
        S::root(&(-(&self.c * &self.c) / qi(2 * p as i64)))
    }

    /// e^{2πiγ1γ2} = q^{−c1c2}.
    pub fn hopf<S: Scalar>(&self, o: &FockLine, p: u32) -> S {
        S::qpow(&-(&self.c * &o.c), p)
    }
}

/// F_γ ⊠ X.
#[derive(Debug, Clone)]
pub struct DObject<S> {
    pub fock: FockLine,
    pub wm: WeightModule<S>,
}

impl<S: Scalar> DObject<S> {
    pub fn new(c: Q, wm: WeightModule<S>) -> Self {
        DObject { fock: FockLine::new(c), wm }
    }

    pub fn p(&self) -> u32 {
        self.wm.p
    }

    /// F_{kλ_p} ⊠ C_{kp}, the k-th power of the simple current.
    pub fn current(k: i64, p: u32) -> Self {
        DObject { fock: FockLine::current(k, p), wm: WeightModule::one_dim(k, p) }
    }

    pub fn tensor(&self, o: &Self) -> Self {
        DObject {
            fock: FockLine::new(&self.fock.c + &o.fock.c),
            wm: self.wm.tensor(&o.wm).expect("same p"),
        }
    }

    /// Hopf link of Deligne products: Fock factor times module factor.
    pub fn hopf(&self, o: &Self) -> S {
        self.fock.hopf::<S>(&o.fock, self.p()).mul(&ribbon::hopf_link(&self.wm, &o.wm))
    }
}

/// Catalogue data of a weight module, read off its label.
#[derive(Debug, Clone, PartialEq)]
pub enum Catalogue {
    V(Q),
    S { i: u32, ell: i64 },
    P { i: u32, ell: i64 },
}

pub fn catalogue<S: Scalar>(wm: &WeightModule<S>) -> Result<Catalogue, DeligneError> {
    match &wm.label {
        ModLabel::Typical { alpha } => Ok(Catalogue::V(parse_q(alpha).expect("label holds a rational"))),
        ModLabel::Simple { n, ell } if *n + 1 == wm.p => Ok(Catalogue::V(qi(*ell * wm.p as i64))),
        ModLabel::Simple { n, ell } => Ok(Catalogue::S { i: *n, ell: *ell }),
        ModLabel::OneDim { ell } => Ok(Catalogue::S { i: 0, ell: *ell }),
        ModLabel::Projective { i, ell } => Ok(Catalogue::P { i: *i, ell: *ell }),
        other => Err(DeligneError::NotCatalogue(other.to_string())),
    }
}

/// The monodromy of F_{λ_p} ⊠ C_p with D, computed from the R-matrix and
/// the Fock braiding. Returns (is it exactly 1, its scalar). The module part
/// is checked to be scalar on the whole of C_p ⊗ X.
pub fn lifts<S: Scalar>(d: &DObject<S>) -> Result<(bool, S), DeligneError> {
    catalogue(&d.wm)?;
    let p = d.p();
    let a = DObject::<S>::current(1, p);
    let mono = ribbon::monodromy(&a.wm, &d.wm);
    let fock = a.fock.hopf::<S>(&d.fock, p);
    let s = mono.get(0, 0).clone();
    if !mono.is_scalar(&s) {
        return Err(DeligneError::NotCatalogue(format!("non-scalar monodromy on {}", d.wm.label)));
    }
    let total = s.mul(&fock);
    Ok((total.is_one(), total))
}

/// The parity form of the lifting criterion.
pub fn lifts_parity(cat: &Catalogue, c: &Q, p: u32) -> bool {
    let x = match cat {
        Catalogue::V(a) => a + qi(p as i64 - 1) + c,
        Catalogue::S { i, ell } | Catalogue::P { i, ell } => qi(*i as i64 + *ell * p as i64) + c,
    };
    q_is_int(&x) && x.to_integer() % num_bigint::BigInt::from(2) == num_bigint::BigInt::from(0)
}

/// Label of an induced object in the local module category.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ExtLabel {
    EV {
        #[serde(serialize_with = "ser_q")]
        c: Q,
        #[serde(serialize_with = "ser_q")]
        alpha: Q,
    },
    ES {
        #[serde(serialize_with = "ser_q")]
        c: Q,
        i: u32,
        ell: i64,
    },
    QV {
        #[serde(serialize_with = "ser_q")]
        c: Q,
        #[serde(serialize_with = "ser_q")]
        alpha: Q,
    },
    QP {
        #[serde(serialize_with = "ser_q")]
        c: Q,
        i: u32,
        ell: i64,
    },
}

impl fmt::Display for ExtLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtLabel::EV { c, alpha } => write!(f, "EV(c={},a={})", fmt_q(c), fmt_q(alpha)),
            ExtLabel::QV { c, alpha } => write!(f, "QV(c={},a={})", fmt_q(c), fmt_q(alpha)),
            ExtLabel::ES { c, i, ell } => write!(f, "ES(c={},i={},l={})", fmt_q(c), i, ell),
            ExtLabel::QP { c, i, ell } => write!(f, "QP(c={},i={},l={})", fmt_q(c), i, ell),
        }
    }
}

impl ExtLabel {
    pub fn charge(&self) -> &Q {
        match self {
            ExtLabel::EV { c, .. } | ExtLabel::ES { c, .. } | ExtLabel::QV { c, .. } | ExtLabel::QP { c, .. } => c,
        }
    }

    pub fn is_simple(&self) -> bool {
        matches!(self, ExtLabel::EV { .. } | ExtLabel::ES { .. })
    }

    pub fn is_projective(&self) -> bool {
        matches!(self, ExtLabel::QP { .. })
    }

    /// Label of F_c ⊠ X from catalogue data, before canonicalization.
    pub fn from_catalogue(c: Q, cat: &Catalogue, p: u32) -> Self {
        match cat {
            Catalogue::V(a) if WeightModule::<crate::CycScalar>::alpha_is_typical(a, p) => {
                ExtLabel::EV { c, alpha: a.clone() }
            }
            Catalogue::V(a) => ExtLabel::QV { c, alpha: a.clone() },
            Catalogue::S { i, ell } => ExtLabel::ES { c, i: *i, ell: *ell },
            Catalogue::P { i, ell } => ExtLabel::QP { c, i: *i, ell: *ell },
        }
    }

    /// The underlying Deligne product F_c ⊠ X.
    pub fn to_dobject<S: Scalar>(&self, p: u32) -> DObject<S> {
        match self {
            ExtLabel::EV { c, alpha } | ExtLabel::QV { c, alpha } => {
                DObject::new(c.clone(), WeightModule::typical(alpha, p))
            }
            ExtLabel::ES { c, i, ell } => DObject::new(c.clone(), WeightModule::simple(*i, *ell, p).expect("i < p")),
            ExtLabel::QP { c, i, ell } => {
                DObject::new(c.clone(), WeightModule::projective(*i, *ell, p).expect("i <= p-2"))
            }
        }
    }

    /// Shift by the k-th power of the simple current.
    pub fn shift(&self, k: i64, p: u32) -> Self {
        let kp = qi(k * p as i64);
        match self {
            ExtLabel::EV { c, alpha } => ExtLabel::EV { c: c - &kp, alpha: alpha + &kp },
            ExtLabel::QV { c, alpha } => ExtLabel::QV { c: c - &kp, alpha: alpha + &kp },
            ExtLabel::ES { c, i, ell } => ExtLabel::ES { c: c - &kp, i: *i, ell: ell + k },
            ExtLabel::QP { c, i, ell } => ExtLabel::QP { c: c - &kp, i: *i, ell: ell + k },
        }
    }

    /// Parity data of the lifting criterion in charge coordinates.
    pub fn satisfies_parity(&self, p: u32) -> bool {
        match self {
            ExtLabel::EV { c, alpha } | ExtLabel::QV { c, alpha } => {
                lifts_parity(&Catalogue::V(alpha.clone()), c, p)
            }
            ExtLabel::ES { c, i, ell } | ExtLabel::QP { c, i, ell } => {
                lifts_parity(&Catalogue::S { i: *i, ell: *ell }, c, p)
            }
        }
    }
}

/// The shift k taking a label to its canonical representative.
fn canonical_shift(l: &ExtLabel, p: u32) -> i64 {
    match l {
        ExtLabel::ES { ell, .. } | ExtLabel::QP { ell, .. } => -ell,
        ExtLabel::EV { alpha, .. } | ExtLabel::QV { alpha, .. } => q_floor(&(-alpha / qi(p as i64))) + 1,
    }
}

/// Canonical representative: ES/QP with ℓ = 0, EV/QV with α ∈ (0, p].
pub fn canonicalize(l: &ExtLabel, p: u32) -> ExtLabel {
    l.shift(canonical_shift(l, p), p)
}

/// Canonical form together with the Z/2 parity of the shift used, which
/// distinguishes the two even-p classes identified only under even shifts.
pub fn canonicalize_with_parity(l: &ExtLabel, p: u32) -> (ExtLabel, u8) {
    let k = canonical_shift(l, p);
    (l.shift(k, p), k.rem_euclid(2) as u8)
}

/// Induces F_c ⊠ X, failing if the object is not local.
pub fn induce<S: Scalar>(d: &DObject<S>) -> Result<ExtLabel, DeligneError> {
    let cat = catalogue(&d.wm)?;
    let (ok, _) = lifts(d)?;
    if !ok {
        return Err(DeligneError::LiftViolation(format!("F({}) x {}", fmt_q(&d.fock.c), d.wm.label)));
    }
    Ok(canonicalize(&ExtLabel::from_catalogue(d.fock.c.clone(), &cat, d.p()), d.p()))
}

/// (ν, ℓ) = (2α/p, (c+α)/2) for a typical label.
pub fn nu_ell(l: &ExtLabel, p: u32) -> Option<(Q, Q)> {
    match l {
        ExtLabel::EV { c, alpha } => Some((qi(2) * alpha / qi(p as i64), (c + alpha) / qi(2))),
        _ => None,
    }
}

/// (s, s') = (i+1, −c−pℓ) for an atypical simple label.
pub fn atypical_ss(l: &ExtLabel, p: u32) -> Option<(i64, Q)> {
    match l {
        ExtLabel::ES { c, i, ell } => Some((*i as i64 + 1, -c - qi(p as i64 * ell))),
        _ => None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraReport {
    pub p: u32,
    pub braiding_failures: Vec<(i64, i64)>,
    pub twist_failures: Vec<i64>,
}

/// Commutativity of the simple-current line and triviality of its twist.
pub fn algebra_object_check<S: Scalar>(p: u32, kmax: i64) -> AlgebraReport {
    let mut braiding_failures = Vec::new();
    let mut twist_failures = Vec::new();
    for k in -kmax..=kmax {
        let a = DObject::<S>::current(k, p);
        for m in -kmax..=kmax {
            let b = DObject::<S>::current(m, p);
            let br = ribbon::braiding(&a.wm, &b.wm).get(0, 0).mul(&a.fock.braiding::<S>(&b.fock, p));
            if !br.is_one() {
                braiding_failures.push((k, m));
            }
        }
        let th = ribbon::twist(&a.wm).expect("invertible").get(0, 0).mul(&a.fock.twist::<S>(p));
        if !th.is_one() {
            twist_failures.push(k);
        }
    }
    AlgebraReport { p, braiding_failures, twist_failures }
}

/// Catalogue entries of the lifting grid: V_α for non-integer α of
/// denominator ≤ den_bound and for integer α in [−p, p], S_i ⊗ C_{ℓp} with
/// |ℓ| ≤ 2 and P_i ⊗ C_{ℓp} with |ℓ| ≤ 1.
pub fn lifting_catalogue(p: u32, den_bound: i64) -> Vec<Catalogue> {
    let pi = p as i64;
    let mut out: Vec<Catalogue> = ribbon::typical_alphas(den_bound).into_iter().map(Catalogue::V).collect();
    out.extend((-pi..=pi).map(|a| Catalogue::V(qi(a))));
    for ell in -2..=2 {
        out.extend((0..p - 1).map(|i| Catalogue::S { i, ell }));
    }
    for ell in -1..=1 {
        out.extend((0..p - 1).map(|i| Catalogue::P { i, ell }));
    }
    out
}

fn catalogue_module(cat: &Catalogue, p: u32) -> WeightModule<CycScalar> {
    match cat {
        Catalogue::V(a) => WeightModule::typical(a, p),
        Catalogue::S { i, ell } => WeightModule::simple(*i, *ell, p).expect("i < p"),
        Catalogue::P { i, ell } => WeightModule::projective(*i, *ell, p).expect("i ≤ p−2"),
    }
}

/// Charges tried against a catalogue entry: the parity-satisfying c0 and
/// shifts of it by ±1, ±2, 1/2 and 1/4.
fn grid_charges(cat: &Catalogue, p: u32) -> Vec<Q> {
    let c0 = match cat {
        Catalogue::V(a) => -(a + qi(p as i64 - 1)),
        Catalogue::S { i, ell } | Catalogue::P { i, ell } => qi(-(*i as i64) - ell * p as i64),
    };
    [qi(0), qi(1), qi(2), qi(-1), qi(-2), q(1, 2), q(1, 4)].into_iter().map(|s| &c0 + s).collect()
}

/// lifts() from the monodromy against the parity formula on the grid.
pub fn check_lifting_grid(p: u32, den_bound: i64) -> CheckReport {
    let cats = lifting_catalogue(p, den_bound);
    let rows: Vec<Vec<(bool, serde_json::Value)>> = cats
        .par_iter()
        .map(|cat| {
            let charges = grid_charges(cat, p);
            let mut inputs = charges.clone();
            if let Catalogue::V(a) = cat {
                inputs.push(a.clone());
            }
            let _g = conductor_scope(conductor_for(p, &inputs));
            let wm = catalogue_module(cat, p);
            charges
                .into_iter()
                .map(|c| {
                    let parity = lifts_parity(cat, &c, p);
                    let d = DObject::new(c.clone(), wm.clone());
                    match lifts(&d) {
                        Ok((l, s)) => (
                            l == parity,
                            json!({"module": wm.label.to_string(), "c": fmt_q(&c), "lifts": l, "parity": parity, "monodromy": format!("{}", s.approx())}),
                        ),
                        Err(e) => (false, json!({"module": wm.label.to_string(), "c": fmt_q(&c), "error": e.to_string()})),
                    }
                })
                .collect()
        })
        .collect();
    let mut rep = CheckReport::new(format!("lifting grid p={p}"));
    let mut lifting = 0usize;
    for (ok, w) in rows.into_iter().flatten() {
        if w["lifts"] == json!(true) {
            lifting += 1;
        }
        rep.record(ok, || w);
    }
    let total = rep.total;
    rep.with_details(json!({"objects": total, "lifting": lifting}))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::CycScalar as C;

    #[test]
    fn lift_examples() {
        let d = DObject::new(q(1, 2), WeightModule::<C>::typical(&q(1, 2), 2));
        assert!(lifts(&d).unwrap().0);
        let d = DObject::new(qi(1), WeightModule::<C>::typical(&q(1, 2), 2));
        assert!(!lifts(&d).unwrap().0);
        for p in 2..=5 {
            let d = DObject::new(qi(0), WeightModule::<C>::simple(0, 0, p).unwrap());
            assert!(lifts(&d).unwrap().0);
            assert_eq!(induce(&d).unwrap(), ExtLabel::ES { c: qi(0), i: 0, ell: 0 });
        }
    }

    #[test]
    fn canonical_forms() {
        let p = 3;
        let l = ExtLabel::ES { c: qi(-3), i: 0, ell: 1 };
        assert_eq!(canonicalize(&l, p), ExtLabel::ES { c: qi(0), i: 0, ell: 0 });
        let v = ExtLabel::EV { c: q(1, 2), alpha: q(1, 2) };
        let w = v.shift(-2, p);
        assert_eq!(canonicalize(&w, p), v);
        assert_eq!(canonicalize(&ExtLabel::EV { c: qi(1), alpha: qi(0) }, p), ExtLabel::EV { c: qi(-2), alpha: qi(3) });
    }

    #[test]
    fn nu_ell_example() {
        let (nu, ell) = nu_ell(&ExtLabel::EV { c: q(1, 2), alpha: q(1, 2) }, 2).unwrap();
        assert_eq!((nu, ell), (q(1, 2), q(1, 2)));
        assert_eq!(atypical_ss(&ExtLabel::ES { c: qi(0), i: 0, ell: 0 }, 3), Some((1, qi(0))));
    }

    #[test]
    fn algebra_object() {
        for p in [3u32, 5] {
            let r = algebra_object_check::<C>(p, 3);
            assert!(r.braiding_failures.is_empty() && r.twist_failures.is_empty());
        }
        let r = algebra_object_check::<C>(2, 2);
        assert!(r.braiding_failures.is_empty());
        assert_eq!(r.twist_failures, vec![-1, 1]);
    }

    #[test]
    fn lifting_grid_small() {
        let r = check_lifting_grid(2, 4);
        assert!(r.passed(), "{:?}", r.witness);
        assert!(r.total >= 200);
    }
}
