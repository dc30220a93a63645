//! The semisimplified Grothendieck ring of the local modules.
//!
//! A class [c, i, ℓ] stands for F_c ⊠ (S_i ⊗ C_{ℓp}) with c the Fock charge.
//! The relations used are
//!   [c, i, ℓ] = [c−p, i, ℓ+1]           (simple current; not for the even part ring)
//!   [c, p−2−j, ℓ] = −[c, j, ℓ+1]        (typicals are negligible)
//!   [c, p−1, ℓ] = 0
//! so every class reduces to ± a basis element with ℓ = 0.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::report::CheckReport;

#[derive(Debug, Error, PartialEq)]
pub enum GringError {
    #[error("[{0},{1},{2}] violates the lifting parity")]
    Parity(i64, u32, i64),
    #[error("the even-part ring needs even p, got {0}")]
    NotEven(u32),
}

/// Which ring: the full local ring, or (even p only) the ring of the even
/// part, where only shifts by twice the simple current are identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flavor {
    Local,
    Even0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GBasisElem {
    /// charge, reduced mod 2p
    pub c: i64,
    pub i: u32,
}

pub type GElem = Vec<i64>;

#[derive(Debug, Clone)]
pub struct GRing {
    pub p: u32,
    pub flavor: Flavor,
    pub basis: Vec<GBasisElem>,
    index: HashMap<GBasisElem, usize>,
}

fn cgp_range(i: u32, j: u32, p: u32) -> Vec<u32> {
    let lo = i.abs_diff(j);
    let hi = if i + j < p { i + j } else { (2 * p).saturating_sub(4 + i + j) };
    if (2 * p) < 4 + i + j && i + j >= p {
        return vec![];
    }
    (lo..=hi).step_by(2).collect()
}

impl GRing {
    /// Minimal generating set of the local ring, in a fixed order.
    pub fn new(p: u32) -> Self {
        let pi = p as i64;
        let mut basis = Vec::new();
        if p % 2 == 1 {
            for c in (0..2 * pi).step_by(2) {
                for i in (0..p.saturating_sub(2)).step_by(2) {
                    basis.push(GBasisElem { c, i });
                }
            }
        } else {
            for c in 0..pi {
                for i in 0..p - 1 {
                    if (i as i64 - c) % 2 == 0 {
                        basis.push(GBasisElem { c, i });
                    }
                }
            }
        }
        Self::from_basis(p, Flavor::Local, basis)
    }

    /// The ring of the even part for even p.
    pub fn even0(p: u32) -> Result<Self, GringError> {
        if p % 2 == 1 {
            return Err(GringError::NotEven(p));
        }
        let mut basis = Vec::new();
        for c in 0..2 * p as i64 {
            for i in 0..p - 1 {
                if (i as i64 - c) % 2 == 0 {
                    basis.push(GBasisElem { c, i });
                }
            }
        }
        Ok(Self::from_basis(p, Flavor::Even0, basis))
    }

    fn from_basis(p: u32, flavor: Flavor, basis: Vec<GBasisElem>) -> Self {
        let index = basis.iter().enumerate().map(|(k, b)| (*b, k)).collect();
        GRing { p, flavor, basis, index }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn index_of(&self, b: &GBasisElem) -> Option<usize> {
        self.index.get(b).copied()
    }

    /// Display form [c, i, ℓ] with the charge in the representative range.
    pub fn display(&self, b: &GBasisElem) -> (i64, u32, i64) {
        let p = self.p as i64;
        match self.flavor {
            Flavor::Local if b.c >= p => (b.c - p, b.i, 1),
            Flavor::Local => (b.c, b.i, 0),
            Flavor::Even0 if b.c >= p => (b.c - 2 * p, b.i, 0),
            Flavor::Even0 => (b.c, b.i, 0),
        }
    }

    /// Reduces [c, i, ℓ] to (sign, basis index), or None for a zero class.
    pub fn reduce(&self, c: i64, i: u32, ell: i64) -> Result<Option<(i64, usize)>, GringError> {
        let p = self.p as i64;
        if (c + i as i64 + ell * p).rem_euclid(2) != 0 || i >= self.p {
            return Err(GringError::Parity(c, i, ell));
        }
        if i as i64 == p - 1 {
            return Ok(None);
        }
        let (mut c, mut ell) = (c, ell);
        if self.flavor == Flavor::Local {
            c += ell * p;
            ell = 0;
        }
        let mut sign = 1;
        let mut i = i;
        if ell.rem_euclid(2) == 1 {
            i = self.p - 2 - i;
            sign = -1;
        }
        let b = GBasisElem { c: c.rem_euclid(2 * p), i };
        if let Some(k) = self.index_of(&b) {
            return Ok(Some((sign, k)));
        }
        // only the local ring needs the reflection on ℓ = 0 representatives
        let r = GBasisElem { c: (c + p).rem_euclid(2 * p), i: self.p - 2 - i };
        let k = self.index_of(&r).expect("reflection lands in the basis");
        Ok(Some((-sign, k)))
    }

    pub fn basis_vector(&self, k: usize) -> GElem {
        let mut v = vec![0; self.len()];
        v[k] = 1;
        v
    }

    /// The class of [c, i, ℓ] as a coefficient vector.
    pub fn class(&self, c: i64, i: u32, ell: i64) -> Result<GElem, GringError> {
        let mut v = vec![0; self.len()];
        if let Some((s, k)) = self.reduce(c, i, ell)? {
            v[k] += s;
        }
        Ok(v)
    }

    /// Product of two basis elements.
    pub fn mul_basis(&self, a: usize, b: usize) -> GElem {
        let x = self.basis[a];
        let y = self.basis[b];
        let mut v = vec![0; self.len()];
        for l in cgp_range(x.i, y.i, self.p) {
            if let Some((s, k)) = self.reduce(x.c + y.c, l, 0).expect("products keep parity") {
                v[k] += s;
            }
        }
        v
    }

    pub fn multiply(&self, a: &GElem, b: &GElem) -> GElem {
        let mut out = vec![0; self.len()];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                for (k, z) in self.mul_basis(i, j).into_iter().enumerate() {
                    out[k] += x * y * z;
                }
            }
        }
        out
    }

    /// N[a][b][k]: coefficient of basis k in the product of a and b.
    pub fn structure_constants(&self) -> Vec<Vec<Vec<i64>>> {
        (0..self.len()).map(|a| (0..self.len()).map(|b| self.mul_basis(a, b)).collect()).collect()
    }

    pub fn unit(&self) -> GElem {
        self.class(0, 0, 0).expect("unit has parity")
    }
}

/// Atypical index (s, s').
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AtypIndex {
    pub s: i64,
    pub sp: i64,
}

impl fmt::Display for AtypIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.s, self.sp)
    }
}

/// Λ_p = {0 < s ≤ p−1, 0 ≤ s' ≤ p−1, s+s'+1 even}, ordered by (s', s).
pub fn lambda_p(p: u32) -> Vec<AtypIndex> {
    let p = p as i64;
    let mut out = Vec::new();
    for sp in 0..p {
        for s in 1..p {
            if (s + sp + 1) % 2 == 0 {
                out.push(AtypIndex { s, sp });
            }
        }
    }
    out
}

/// Λ̃_p = {(s, s'−p)}.
pub fn lambda_tilde_p(p: u32) -> Vec<AtypIndex> {
    lambda_p(p).into_iter().map(|a| AtypIndex { s: a.s, sp: a.sp - p as i64 }).collect()
}

impl GRing {
    /// Odd p: the Λ_p index of a basis element and the sign relating the
    /// class of F_{−s'} ⊠ S_{s−1} to it.
    pub fn to_lambda(&self, k: usize) -> (AtypIndex, i64) {
        let p = self.p as i64;
        let b = self.basis[k];
        let t = (-b.c).rem_euclid(2 * p);
        match self.flavor {
            Flavor::Local if t < p => (AtypIndex { s: b.i as i64 + 1, sp: t }, 1),
            Flavor::Local => (AtypIndex { s: p - 1 - b.i as i64, sp: t - p }, -1),
            Flavor::Even0 if t < p => (AtypIndex { s: b.i as i64 + 1, sp: t }, 1),
            Flavor::Even0 => (AtypIndex { s: b.i as i64 + 1, sp: t - 2 * p }, 1),
        }
    }

    /// Class of the object indexed by (s, s'): F_{−s'} ⊠ S_{s−1}.
    pub fn lambda_class(&self, a: &AtypIndex) -> GElem {
        self.class(-a.sp, (a.s - 1) as u32, 0).expect("Λ indices satisfy the parity")
    }
}

/// Associativity, commutativity and the unit on all basis triples.
pub fn check_ring_axioms(g: &GRing) -> CheckReport {
    let mut rep = CheckReport::new(format!("ring axioms p={} {:?}", g.p, g.flavor));
    let n = g.len();
    let u = g.unit();
    for a in 0..n {
        let ea = g.basis_vector(a);
        rep.record(g.multiply(&u, &ea) == ea, || json!({"unit": a}));
        for b in 0..n {
            let ab = g.mul_basis(a, b);
            rep.record(ab == g.mul_basis(b, a), || json!({"commutativity": [a, b]}));
            for c in 0..n {
                let ec = g.basis_vector(c);
                let l = g.multiply(&ab, &ec);
                let r = g.multiply(&ea, &g.mul_basis(b, c));
                rep.record(l == r, || json!({"associativity": [a, b, c]}));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_sizes() {
        assert_eq!(GRing::new(3).len(), 3);
        assert_eq!(GRing::new(5).len(), 10);
        assert_eq!(GRing::new(2).len(), 1);
        assert_eq!(GRing::new(4).len(), 6);
        assert_eq!(GRing::even0(2).unwrap().len(), 2);
        assert_eq!(GRing::even0(4).unwrap().len(), 12);
        assert!(GRing::even0(3).is_err());
        for p in [3u32, 5, 7] {
            assert_eq!(lambda_p(p).len() as u32, p * (p - 1) / 2);
        }
    }

    #[test]
    fn reflection_is_involutive() {
        for p in 2..=6u32 {
            let g = GRing::new(p);
            for c in -2 * p as i64..2 * p as i64 {
                for i in 1..p {
                    for ell in -2..=2 {
                        if (c + ell * p as i64 + (p - 1 - i) as i64) % 2 != 0 {
                            continue;
                        }
                        let a = g.class(c, p - 1 - i, ell).unwrap();
                        let b = g.class(c, i - 1, ell + 1).unwrap();
                        assert_eq!(a, b.iter().map(|x| -x).collect::<Vec<_>>());
                    }
                }
            }
        }
    }

    #[test]
    fn p3_product() {
        let g = GRing::new(3);
        let a = g.lambda_class(&AtypIndex { s: 2, sp: 1 });
        let prod = g.multiply(&a, &a);
        assert_eq!(prod, g.lambda_class(&AtypIndex { s: 1, sp: 2 }));
        let u = g.unit();
        assert_eq!(g.multiply(&u, &a), a);
    }

    #[test]
    fn positivity() {
        for p in [3u32, 5, 7] {
            let g = GRing::new(p);
            assert!(g.structure_constants().iter().flatten().flatten().all(|&x| x >= 0));
        }
        for p in [2u32, 4, 6] {
            let g = GRing::even0(p).unwrap();
            assert!(g.structure_constants().iter().flatten().flatten().all(|&x| x >= 0));
        }
    }

    #[test]
    fn axioms() {
        for p in 2..=5u32 {
            assert!(check_ring_axioms(&GRing::new(p)).passed());
        }
        assert!(check_ring_axioms(&GRing::even0(4).unwrap()).passed());
    }
}
