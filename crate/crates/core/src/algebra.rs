//! Cartesian-basis structure constants of so(n), sl(n,R) and su(n).
//!
//! `M_ab` (a<b) span the rotations, `T_ab` (a<=b) the shears. All
//! coefficients are complex so the factors of `i` stay explicit.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, zeros, CMat, C64, I, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    M,
    T,
}

/// A canonical generator label: `M_ab` with a<b or `T_ab` with a<=b (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorIndex {
    pub kind: Kind,
    pub a: usize,
    pub b: usize,
}

impl GeneratorIndex {
    /// Canonical form of `X_ab` with its sign; `None` for `M_aa = 0`.
    pub fn canonical(kind: Kind, a: usize, b: usize) -> Option<(f64, Self)> {
        match kind {
            Kind::M if a == b => None,
            Kind::M if a > b => Some((-1.0, Self { kind, a: b, b: a })),
            Kind::T if a > b => Some((1.0, Self { kind, a: b, b: a })),
            _ => Some((1.0, Self { kind, a, b })),
        }
    }
}

impl fmt::Display for GeneratorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            Kind::M => "M",
            Kind::T => "T",
        };
        write!(f, "{k}_{}{}", self.a, self.b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algebra {
    Sl,
    Su,
}

/// A linear combination of canonical generators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommutatorExpansion {
    pub terms: Vec<(C64, GeneratorIndex)>,
}

impl CommutatorExpansion {
    fn from_raw(raw: &[(C64, Kind, usize, usize)]) -> Self {
        let mut acc: BTreeMap<GeneratorIndex, C64> = BTreeMap::new();
        for &(coef, kind, a, b) in raw {
            if let Some((sign, idx)) = GeneratorIndex::canonical(kind, a, b) {
                *acc.entry(idx).or_insert(ZERO) += coef * sign;
            }
        }
        Self {
            terms: acc
                .into_iter()
                .filter(|(_, v)| v.norm() > 1e-15)
                .map(|(k, v)| (v, k))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            terms: self.terms.iter().map(|&(v, k)| (v * s, k)).collect(),
        }
    }

    /// Evaluate with matrices supplied for each canonical generator.
    pub fn evaluate<F>(&self, dim: usize, mut matrix_of: F) -> CMat
    where
        F: FnMut(GeneratorIndex) -> CMat,
    {
        let mut out = zeros(dim, dim);
        for &(coef, idx) in &self.terms {
            out += matrix_of(idx) * coef;
        }
        out
    }
}

impl fmt::Display for CommutatorExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(v, k)| format!("({:+}{:+}i) {k}", v.re, v.im))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

fn check(n: usize, idx: &[usize]) -> Result<()> {
    for pair in idx.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == 0 || b == 0 || a > n || b > n {
            return Err(Error::IndexOutOfRange { a, b, n });
        }
    }
    Ok(())
}

fn d(x: usize, y: usize) -> f64 {
    if x == y {
        1.0
    } else {
        0.0
    }
}

/// `[M_ab, M_cd] = i(δ_ac M_bd + δ_ad M_cb − δ_bc M_ad − δ_bd M_ca)`.
pub fn commutator_mm(n: usize, a: usize, b: usize, cc: usize, dd: usize) -> Result<CommutatorExpansion> {
    check(n, &[a, b, cc, dd])?;
    Ok(CommutatorExpansion::from_raw(&[
        (I * d(a, cc), Kind::M, b, dd),
        (I * d(a, dd), Kind::M, cc, b),
        (-I * d(b, cc), Kind::M, a, dd),
        (-I * d(b, dd), Kind::M, cc, a),
    ]))
}

/// `[M_ab, T_cd] = i(δ_ac T_bd + δ_ad T_cb − δ_bc T_ad − δ_bd T_ca)`.
pub fn commutator_mt(n: usize, a: usize, b: usize, cc: usize, dd: usize) -> Result<CommutatorExpansion> {
    check(n, &[a, b, cc, dd])?;
    Ok(CommutatorExpansion::from_raw(&[
        (I * d(a, cc), Kind::T, b, dd),
        (I * d(a, dd), Kind::T, cc, b),
        (-I * d(b, cc), Kind::T, a, dd),
        (-I * d(b, dd), Kind::T, cc, a),
    ]))
}

/// `[T_ab, T_cd] = i(δ_ac M_db + δ_ad M_cb + δ_bc M_da + δ_bd M_ca)` for sl(n,R);
/// the su(n) shears `T^su = i T` give the opposite overall sign.
pub fn commutator_tt(
    n: usize,
    a: usize,
    b: usize,
    cc: usize,
    dd: usize,
    algebra: Algebra,
) -> Result<CommutatorExpansion> {
    check(n, &[a, b, cc, dd])?;
    let s = match algebra {
        Algebra::Sl => I,
        Algebra::Su => -I,
    };
    Ok(CommutatorExpansion::from_raw(&[
        (s * d(a, cc), Kind::M, dd, b),
        (s * d(a, dd), Kind::M, cc, b),
        (s * d(b, cc), Kind::M, dd, a),
        (s * d(b, dd), Kind::M, cc, a),
    ]))
}

/// `[T_ab, M_cd] = -[M_cd, T_ab]`.
pub fn commutator_tm(n: usize, a: usize, b: usize, cc: usize, dd: usize) -> Result<CommutatorExpansion> {
    Ok(commutator_mt(n, cc, dd, a, b)?.scale(c(-1.0)))
}

/// Canonical antisymmetric pairs `(a,b)`, a<b, 1-based, row-major order.
pub fn m_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n)
        .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
        .collect()
}

/// Canonical symmetric pairs `(a,b)`, a<=b.
pub fn t_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n).flat_map(|a| (a..=n).map(move |b| (a, b))).collect()
}

/// Position of `M_ab` (a<b) in [`m_pairs`].
pub fn m_pair_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b <= n);
    // pairs before row a: Σ_{r<a} (n - r)
    (a - 1) * n - (a - 1) * a / 2 + (b - a - 1)
}

/// Defining n×n matrices: `M_ab = -i(E_ab - E_ba)`.
pub fn defining_m(n: usize, a: usize, b: usize) -> CMat {
    let mut m = zeros(n, n);
    if a != b {
        m[(a - 1, b - 1)] = -I;
        m[(b - 1, a - 1)] = I;
    }
    m
}

/// Defining n×n shear: sl gives `T_ab = i(E_ab + E_ba) − (2iδ_ab/n)·1`,
/// su gives `i` times that.
pub fn defining_t(n: usize, a: usize, b: usize, algebra: Algebra) -> CMat {
    let mut m = zeros(n, n);
    m[(a - 1, b - 1)] += I;
    m[(b - 1, a - 1)] += I;
    if a == b {
        for k in 0..n {
            m[(k, k)] -= I * (2.0 / n as f64);
        }
    }
    match algebra {
        Algebra::Sl => m,
        Algebra::Su => m * I,
    }
}

/// `½ Σ_{a,b} M_ab M_ab` from canonical-order generators.
pub fn casimir2(n: usize, gens: &[CMat]) -> Result<CMat> {
    let pairs = m_pairs(n);
    if gens.len() != pairs.len() {
        return Err(Error::Dimension(format!(
            "so({n}) needs {} generators, got {}",
            pairs.len(),
            gens.len()
        )));
    }
    let dim = gens[0].nrows();
    let mut out = zeros(dim, dim);
    for g in gens {
        if g.nrows() != dim || g.ncols() != dim {
            return Err(Error::Dimension("generator shapes differ".into()));
        }
        out += g * g;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs_diff};

    fn m_of(n: usize) -> impl Fn(GeneratorIndex) -> CMat {
        move |g| match g.kind {
            Kind::M => defining_m(n, g.a, g.b),
            Kind::T => defining_t(n, g.a, g.b, Algebra::Sl),
        }
    }

    #[test]
    fn mm_examples() {
        let e = commutator_mm(3, 1, 2, 2, 3).unwrap();
        assert_eq!(e.terms.len(), 1);
        assert_eq!(e.terms[0].1, GeneratorIndex { kind: Kind::M, a: 1, b: 3 });
        assert!((e.terms[0].0 - (-I)).norm() < 1e-15);
        assert!(commutator_mm(4, 1, 2, 3, 4).unwrap().is_zero());
        assert!(commutator_mm(3, 1, 2, 1, 2).unwrap().is_zero());
        assert!(commutator_mm(3, 1, 4, 1, 2).is_err());
    }

    #[test]
    fn mt_examples() {
        let e = commutator_mt(3, 1, 2, 2, 2).unwrap();
        assert_eq!(e.terms, vec![(I * -2.0, GeneratorIndex { kind: Kind::T, a: 1, b: 2 })]);
        assert!(commutator_mt(4, 1, 2, 3, 4).unwrap().is_zero());
        let e = commutator_mt(3, 1, 2, 1, 1).unwrap();
        assert_eq!(e.terms, vec![(I * 2.0, GeneratorIndex { kind: Kind::T, a: 1, b: 2 })]);
    }

    #[test]
    fn tt_examples() {
        let e = commutator_tt(3, 1, 2, 2, 3, Algebra::Sl).unwrap();
        assert_eq!(e.terms, vec![(-I, GeneratorIndex { kind: Kind::M, a: 1, b: 3 })]);
        assert!(commutator_tt(3, 1, 1, 2, 2, Algebra::Sl).unwrap().is_zero());
        assert!(commutator_tt(3, 1, 2, 1, 2, Algebra::Sl).unwrap().is_zero());
    }

    #[test]
    fn pair_index_matches_enumeration() {
        for n in 2..=6 {
            for (k, (a, b)) in m_pairs(n).into_iter().enumerate() {
                assert_eq!(m_pair_index(n, a, b), k);
            }
        }
    }

    #[test]
    fn defining_rep_reproduces_all_tables() {
        for n in 2..=5 {
            let f = m_of(n);
            for (a, b) in m_pairs(n) {
                for (cc, dd) in m_pairs(n) {
                    let lhs = commutator(&defining_m(n, a, b), &defining_m(n, cc, dd));
                    let rhs = commutator_mm(n, a, b, cc, dd).unwrap().evaluate(n, &f);
                    assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
                }
                for (cc, dd) in t_pairs(n) {
                    let lhs = commutator(&defining_m(n, a, b), &defining_t(n, cc, dd, Algebra::Sl));
                    let rhs = commutator_mt(n, a, b, cc, dd).unwrap().evaluate(n, &f);
                    assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
                }
            }
            for (a, b) in t_pairs(n) {
                for (cc, dd) in t_pairs(n) {
                    for alg in [Algebra::Sl, Algebra::Su] {
                        let lhs = commutator(&defining_t(n, a, b, alg), &defining_t(n, cc, dd, alg));
                        let rhs = commutator_tt(n, a, b, cc, dd, alg).unwrap().evaluate(n, &f);
                        assert!(max_abs_diff(&lhs, &rhs) < 1e-12, "n={n} T{a}{b} T{cc}{dd} {alg:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn casimir_of_vector_reps() {
        for n in [3usize, 5] {
            let gens: Vec<CMat> = m_pairs(n).iter().map(|&(a, b)| defining_m(n, a, b)).collect();
            let c2 = casimir2(n, &gens).unwrap();
            let expect = CMat::identity(n, n) * c((n - 1) as f64);
            assert!(max_abs_diff(&c2, &expect) < 1e-12);
        }
    }
}
