//! R-matrix, braiding, monodromy, twist and the quantum trace on weight
//! modules, plus open and closed Hopf links.

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::qmodules::{ModLabel, WeightModule};
use crate::report::CheckReport;
use crate::scalars::{conductor_for, conductor_scope, fmt_q, q, q_is_int, parse_q, qi, CycScalar, Scalar, Q};

#[derive(Debug, Error)]
pub enum RibbonError {
    #[error("twist operator is singular on {0}")]
    SingularTwist(String),
}

/// {1}^{2n}/{n}! · q^{n(n−1)/2}
fn r_coef<S: Scalar>(n: u32, p: u32) -> S {
    let b1 = S::qbrace(&qi(1), p);
    let mut num = S::one();
    let mut fact = S::one();
    for k in 1..=n {
        num = num.mul(&b1).mul(&b1);
        fact = fact.mul(&S::qbrace(&qi(k as i64), p));
    }
    num.mul(&fact.inv().expect("{n} != 0 below p"))
        .mul(&S::qpow(&qi((n * n.saturating_sub(1) / 2) as i64), p))
}

/// Permutation M⊗N → N⊗M on the Kronecker basis.
pub fn flip<S: Scalar>(dm: usize, dn: usize) -> Matrix<S> {
    let mut t = Matrix::zeros(dm * dn, dm * dn);
    for a in 0..dm {
        for b in 0..dn {
            t.set(b * dm + a, a * dn + b, S::one());
        }
    }
    t
}

/// R acting on M⊗N: q^{H⊗H/2} Σ_n c_n E^n ⊗ F^n (terms n ≥ p vanish).
pub fn r_matrix<S: Scalar>(m: &WeightModule<S>, n: &WeightModule<S>) -> Matrix<S> {
    let p = m.p;
    let dm = m.dim();
    let dn = n.dim();
    let mut sum = Matrix::identity(dm * dn);
    let mut en = Matrix::identity(dm);
    let mut fnn = Matrix::identity(dn);
    for k in 1..p {
        en = en.mul(&m.e);
        fnn = fnn.mul(&n.f);
        if en.is_zero() || fnn.is_zero() {
            break;
        }
        sum = sum.add(&en.kron(&fnn).scale(&r_coef::<S>(k, p)));
    }
    let half = qi(1) / qi(2);
    let mut d = Vec::with_capacity(dm * dn);
    for a in &m.weights {
        for b in &n.weights {
            d.push(S::qpow(&(a * b * &half), p));
        }
    }
    // left-multiply by the diagonal
    let mut out = sum;
    for i in 0..out.rows {
        if d[i].is_one() {
            continue;
        }
        for j in 0..out.cols {
            let x = out.get(i, j);
            if !x.is_zero() {
                let v = x.mul(&d[i]);
                out.set(i, j, v);
            }
        }
    }
    out
}

/// c_{M,N} = τ∘R : M⊗N → N⊗M.
pub fn braiding<S: Scalar>(m: &WeightModule<S>, n: &WeightModule<S>) -> Matrix<S> {
    flip::<S>(m.dim(), n.dim()).mul(&r_matrix(m, n))
}

/// c_{N,M}∘c_{M,N} on M⊗N.
pub fn monodromy<S: Scalar>(m: &WeightModule<S>, n: &WeightModule<S>) -> Matrix<S> {
    braiding(n, m).mul(&braiding(m, n))
}

/// θ̃ = K^{p−1} Σ_n c_n S(F)^n q^{−H²/2} E^n with S(F) = −KF.
pub fn twist_tilde<S: Scalar>(m: &WeightModule<S>) -> Matrix<S> {
    let p = m.p;
    let d = m.dim();
    let half = qi(1) / qi(2);
    let qh = Matrix::diag(&m.weights.iter().map(|w| S::qpow(&-(w * w * &half), p)).collect::<Vec<_>>());
    let sf = m.k_matrix().mul(&m.f).neg();
    let mut sum = qh.clone();
    let mut en = Matrix::identity(d);
    let mut sfn = Matrix::identity(d);
    for k in 1..p {
        en = en.mul(&m.e);
        sfn = sfn.mul(&sf);
        if en.is_zero() || sfn.is_zero() {
            break;
        }
        sum = sum.add(&sfn.mul(&qh).mul(&en).scale(&r_coef::<S>(k, p)));
    }
    m.k_power(p as i64 - 1).mul(&sum)
}

/// θ_M = θ̃^{−1}.
pub fn twist<S: Scalar>(m: &WeightModule<S>) -> Result<Matrix<S>, RibbonError> {
    twist_tilde(m).inverse().ok_or_else(|| RibbonError::SingularTwist(m.label.to_string()))
}

/// tr(K^{1−p} f).
pub fn qtrace<S: Scalar>(m: &WeightModule<S>, f: &Matrix<S>) -> S {
    let mut acc = S::zero();
    for (i, w) in m.weights.iter().enumerate() {
        let x = f.get(i, i);
        if !x.is_zero() {
            acc = acc.add(&x.mul(&S::qpow(&(w * qi(1 - m.p as i64)), m.p)));
        }
    }
    acc
}

pub fn qdim<S: Scalar>(m: &WeightModule<S>) -> S {
    qtrace(m, &Matrix::identity(m.dim()))
}

/// Partial quantum trace over V of the monodromy on V⊗W.
pub fn open_hopf<S: Scalar>(v: &WeightModule<S>, w: &WeightModule<S>) -> Matrix<S> {
    let mono = monodromy(v, w);
    partial_qtrace_first(v, w.dim(), &mono)
}

/// Partial trace over the first factor of an endomorphism of V⊗W. This is
/// a left trace, so it uses the inverse pivot K^{p−1}.
pub fn partial_qtrace_first<S: Scalar>(v: &WeightModule<S>, dw: usize, x: &Matrix<S>) -> Matrix<S> {
    let mut out: Matrix<S> = Matrix::zeros(dw, dw);
    for (i, wt) in v.weights.iter().enumerate() {
        let piv = S::qpow(&(wt * qi(v.p as i64 - 1)), v.p);
        for b1 in 0..dw {
            for b in 0..dw {
                let e = x.get(i * dw + b1, i * dw + b);
                if !e.is_zero() {
                    let nv = out.get(b1, b).add(&e.mul(&piv));
                    out.set(b1, b, nv);
                }
            }
        }
    }
    out
}

/// Closed Hopf link. The quantum trace vanishes on the projective ideal,
/// so for typical W the loop is closed with the modified trace instead.
pub fn hopf_link<S: Scalar>(v: &WeightModule<S>, w: &WeightModule<S>) -> S {
    let oh = open_hopf(v, w);
    match typical_alpha(w) {
        Some(a) => modified_trace(&a, w.p, &oh),
        None => qtrace(w, &oh),
    }
}

fn typical_alpha<S: Scalar>(w: &WeightModule<S>) -> Option<Q> {
    match &w.label {
        ModLabel::Typical { alpha } => {
            let a = parse_q(alpha)?;
            WeightModule::<S>::alpha_is_typical(&a, w.p).then_some(a)
        }
        _ => None,
    }
}

/// d(V_α) = (−1)^{p−1} ∏_{j=1}^{p−1} {j}/{α+j}.
pub fn modified_dim<S: Scalar>(alpha: &Q, p: u32) -> S {
    let mut acc = S::from_i64(if p % 2 == 1 { 1 } else { -1 });
    for j in 1..p as i64 {
        let den = S::qbrace(&(alpha + qi(j)), p).inv().expect("typical alpha");
        acc = acc.mul(&S::qbrace(&qi(j), p)).mul(&den);
    }
    acc
}

/// Modified trace on the simple projective V_α: d(V_α)·tr(f)/p.
pub fn modified_trace<S: Scalar>(alpha: &Q, p: u32, f: &Matrix<S>) -> S {
    modified_dim::<S>(alpha, p).mul(&f.trace()).mul(&S::from_i64(p as i64).inv().unwrap())
}

/// Ψ_γ applied to a weight multiset: Σ_s q^{γ s}.
pub fn psi<S: Scalar>(gamma: &Q, weights: &[Q], p: u32) -> S {
    weights.iter().fold(S::zero(), |acc, s| acc.add(&S::qpow(&(gamma * s), p)))
}

/// Non-integer α with denominator ≤ den_bound and |α| < 2, by denominator.
pub fn typical_alphas(den_bound: i64) -> Vec<Q> {
    let mut out = Vec::new();
    for d in 2..=den_bound.max(2) {
        for k in -2 * d + 1..2 * d {
            let a = q(k, d);
            if !q_is_int(&a) && *a.denom() == num_bigint::BigInt::from(d) {
                out.push(a);
            }
        }
    }
    out
}

/// α-pairs for the closed-form check: each α paired with a partner a few
/// steps along the list, so mixed denominators appear.
pub fn hopf_pairs(den_bound: i64) -> Vec<(Q, Q)> {
    let l = typical_alphas(den_bound);
    let n = l.len();
    (0..n).map(|i| (l[i].clone(), l[(7 * i + 3) % n].clone())).collect()
}

/// hopf_link(V_α1, V_α2) = (−1)^{p−1} p q^{α1α2} and
/// hopf_link(S_0, V_α) = (−1)^{p−1} p {α}/{pα}, both from the matrix trace.
pub fn check_hopf_closed_forms(p: u32, den_bound: i64) -> CheckReport {
    let sign = if p % 2 == 1 { 1 } else { -1 };
    let pairs = hopf_pairs(den_bound);
    let vv: Vec<_> = pairs
        .par_iter()
        .map(|(a1, a2)| {
            let _g = conductor_scope(conductor_for(p, &[a1.clone(), a2.clone()]));
            let h: CycScalar = hopf_link(&WeightModule::typical(a1, p), &WeightModule::typical(a2, p));
            let want = CycScalar::qpow(&(a1 * a2), p).mul(&CycScalar::from_i64(sign * p as i64));
            (h == want, a1.clone(), a2.clone(), h.approx(), want.approx())
        })
        .collect();
    let alphas = typical_alphas(den_bound);
    let sv: Vec<_> = alphas
        .par_iter()
        .map(|a| {
            let _g = conductor_scope(conductor_for(p, &[a.clone()]));
            let w = WeightModule::typical(a, p);
            let h: CycScalar = hopf_link(&WeightModule::simple(0, 0, p).expect("S_0"), &w);
            let den = CycScalar::qbrace(&(a * qi(p as i64)), p);
            let want = den
                .inv()
                .map(|d| CycScalar::qbrace(a, p).mul(&d).mul(&CycScalar::from_i64(sign * p as i64)));
            (want.as_ref() == Some(&h), a.clone(), h.approx(), want.map(|w| w.approx()))
        })
        .collect();
    let mut rep = CheckReport::new(format!("hopf closed forms p={p}"));
    for (ok, a1, a2, h, w) in vv {
        rep.record(ok, || json!({"pair": [fmt_q(&a1), fmt_q(&a2)], "got": format!("{h}"), "want": format!("{w}")}));
    }
    for (ok, a, h, w) in sv {
        rep.record(ok, || json!({"S0 x V": fmt_q(&a), "got": format!("{h}"), "want": format!("{w:?}")}));
    }
    rep.with_details(json!({"vv_pairs": pairs.len(), "s0_alphas": alphas.len()}))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{qbrace, CycScalar as C};

    type M = WeightModule<C>;

    fn is_module_map(src: &M, dst: &M, x: &Matrix<C>) -> bool {
        src.is_intertwiner(dst, x)
    }

    #[test]
    fn braiding_is_module_map() {
        for p in 2..=3u32 {
            let _g = conductor_scope(8 * p);
            let mods = vec![
                M::simple(1, 0, p).unwrap(),
                M::simple(p - 1, 1, p).unwrap(),
                M::typical(&q(1, 2), p),
                M::typical(&qi(1), p),
            ];
            for a in &mods {
                for b in &mods {
                    let c = braiding(a, b);
                    let ab = a.tensor(b).unwrap();
                    let ba = b.tensor(a).unwrap();
                    assert!(is_module_map(&ab, &ba, &c), "p={p} {} {}", a.label, b.label);
                }
            }
        }
    }

    #[test]
    fn unit_and_shift() {
        let p = 3;
        let v = M::typical(&q(1, 2), p);
        let u = M::unit(p);
        assert_eq!(r_matrix(&u, &v), Matrix::identity(p as usize));
        let cp = M::one_dim(1, p);
        let mono = monodromy(&cp, &v);
        let expect = C::qpow(&(qi(p as i64) * (q(1, 2) + qi(p as i64 - 1))), p);
        assert!(mono.is_scalar(&expect));
    }

    #[test]
    fn twists_and_dims() {
        for p in 2..=4u32 {
            let _g = conductor_scope(16 * p);
            let a = q(1, 2);
            let v = M::typical(&a, p);
            let lam = &a + qi(p as i64 - 1);
            let th = twist(&v).unwrap();
            let exp = &lam * &lam / qi(2) - qi(p as i64 - 1) * &lam;
            assert!(th.is_scalar(&C::qpow(&exp, p)));
            assert!(qdim(&v).is_zero());
            for j in 0..p {
                for ell in -1..=1i64 {
                    let s = M::simple(j, ell, p).unwrap();
                    let sign = if ((1 - p as i64) * ell + j as i64).rem_euclid(2) == 0 { 1 } else { -1 };
                    let exp = crate::scalars::qint(&qi(j as i64 + 1), p).scale(&qi(sign));
                    assert_eq!(qdim(&s), exp);
                }
            }
        }
    }

    #[test]
    fn modified_dim_is_ambidextrous() {
        // d(α)·qdim(S_1) = d(α+1) + d(α−1) from V_α ⊗ S_1 = V_{α+1} ⊕ V_{α−1}
        for p in 2..=5u32 {
            let a = q(1, 3);
            let lhs = modified_dim::<C>(&a, p).mul(&qdim(&M::simple(1, 0, p).unwrap()));
            let rhs = modified_dim::<C>(&(&a + qi(1)), p).add(&modified_dim::<C>(&(&a - qi(1)), p));
            assert_eq!(lhs, rhs, "p={p}");
        }
    }

    #[test]
    fn balancing() {
        let p = 2;
        let _g = conductor_scope(32);
        let a = M::typical(&q(1, 2), p);
        let b = M::simple(1, 0, p).unwrap();
        let ab = a.tensor(&b).unwrap();
        let lhs = twist(&ab).unwrap();
        let rhs = monodromy(&a, &b).mul(&twist(&a).unwrap().kron(&twist(&b).unwrap()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn hopf_closed_forms() {
        for p in 2..=3u32 {
            let _g = conductor_scope(64 * p);
            let a1 = q(1, 2);
            let a2 = q(1, 4);
            let h = hopf_link(&M::typical(&a1, p), &M::typical(&a2, p));
            let sign = if p % 2 == 1 { 1 } else { -1 };
            assert_eq!(h, C::qpow(&(&a1 * &a2), p).scale(&qi(sign * p as i64)));
            let w = M::typical(&a2, p);
            assert!(qtrace(&w, &open_hopf(&M::unit(p), &w)).is_zero());
            let hs = hopf_link(&M::simple(0, 0, p).unwrap(), &w);
            let expect = qbrace(&a2, p)
                .div(&qbrace(&(&a2 * qi(p as i64)), p))
                .unwrap()
                .scale(&qi(sign * p as i64));
            assert_eq!(hs, expect);
        }
    }

    #[test]
    fn closed_form_driver() {
        for p in 2..=5u32 {
            let r = check_hopf_closed_forms(p, 4);
            assert!(r.passed(), "{:?}", r.witness);
            assert!(r.total >= 30);
        }
    }
}
