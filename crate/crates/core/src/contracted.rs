//! The contracted algebra `r ⊎ so(n)` on the truncated natural basis
//! `|J; k m⟩` of L²(Spin(n)).
//!
//! Operators are stored per `(J', J)` block as sums of Kronecker terms
//! `k ⊗ m`, with `k` acting on the left label and `m` on the right label.
//! Right rotations `M` act on `m` as `ρ_J(M)`, left rotations `K` act on `k`
//! as `−ρ_J(M)ᵀ`, and `U` couples `J → J'` through the symmetric rank-2 rep.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::clebsch::{cartesian_map, cartesian_matrix, cg_tables, decompose_product, CGTable, Cartesian};
use crate::error::{Error, Result};
use crate::irreps::{build_rep, RepMatrices};
use crate::labels::{fmt_twice, ChainLabel, HighestWeight};
use crate::linalg::{c, eye, zeros, CMat, CVec, C64};

#[derive(Debug)]
pub struct NaturalBasis {
    n: usize,
    cutoff_twice: i32,
    spinorial: bool,
    irreps: Vec<Arc<RepMatrices>>,
    offsets: Vec<usize>,
    dim: usize,
}

impl NaturalBasis {
    /// All irreps with first label ≤ cutoff (doubled) in one spinor sector.
    pub fn new(n: usize, cutoff_twice: i32, spinorial: bool) -> Result<Arc<Self>> {
        if !(3..=6).contains(&n) {
            return Err(Error::Unsupported(format!("n = {n} outside 3..=6")));
        }
        if spinorial && n > 4 {
            return Err(Error::Unsupported(format!("spinorial basis for n = {n}")));
        }
        let labels = HighestWeight::enumerate(n, cutoff_twice, spinorial);
        if labels.is_empty() {
            return Err(Error::InvalidWeight(format!(
                "cutoff {} admits no {} irreps",
                fmt_twice(cutoff_twice),
                if spinorial { "spinorial" } else { "tensorial" }
            )));
        }
        let irreps = labels
            .par_iter()
            .map(build_rep)
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(irreps.len());
        let mut dim = 0;
        for r in &irreps {
            offsets.push(dim);
            dim += r.dim() * r.dim();
        }
        Ok(Arc::new(Self {
            n,
            cutoff_twice,
            spinorial,
            irreps,
            offsets,
            dim,
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff_twice(&self) -> i32 {
        self.cutoff_twice
    }

    pub fn spinorial(&self) -> bool {
        self.spinorial
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn irreps(&self) -> &[Arc<RepMatrices>] {
        &self.irreps
    }

    pub fn irrep(&self, j: usize) -> &RepMatrices {
        &self.irreps[j]
    }

    pub fn offset(&self, j: usize) -> usize {
        self.offsets[j]
    }

    pub fn position(&self, hw: &HighestWeight) -> Option<usize> {
        self.irreps.iter().position(|r| r.hw() == hw)
    }

    pub fn index(&self, j: usize, k: usize, m: usize) -> usize {
        let d = self.irreps[j].dim();
        self.offsets[j] + k * d + m
    }

    /// Inverse of [`index`](Self::index).
    pub fn locate(&self, idx: usize) -> (usize, usize, usize) {
        let j = self.offsets.partition_point(|&o| o <= idx) - 1;
        let d = self.irreps[j].dim();
        let r = idx - self.offsets[j];
        (j, r / d, r % d)
    }

    /// Ordered `(J, k, m)` labels of every basis vector.
    pub fn vectors(&self) -> Vec<(HighestWeight, ChainLabel, ChainLabel)> {
        let mut out = Vec::with_capacity(self.dim);
        for r in &self.irreps {
            for k in r.labels() {
                for m in r.labels() {
                    out.push((r.hw().clone(), k.clone(), m.clone()));
                }
            }
        }
        out
    }

    /// Irreps whose first label is at most `Λ − 2·depth`.
    pub fn interior_irreps(&self, depth: usize) -> Vec<usize> {
        let bound = self.cutoff_twice - 4 * depth as i32;
        (0..self.irreps.len())
            .filter(|&j| self.irreps[j].hw().first_twice() <= bound)
            .collect()
    }

    /// Basis indices of interior states; an empty interior is an error.
    pub fn interior_projector(&self, depth: usize) -> Result<Vec<usize>> {
        let js = self.interior_irreps(depth);
        if js.is_empty() {
            return Err(Error::EmptyInterior {
                cutoff: fmt_twice(self.cutoff_twice),
                depth,
            });
        }
        let mut out = Vec::new();
        for j in js {
            let d = self.irreps[j].dim();
            out.extend(self.offsets[j]..self.offsets[j] + d * d);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct KronTerm {
    pub k: CMat,
    pub m: CMat,
}

/// Block-sparse operator; key `(row irrep, column irrep)`.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    basis: Arc<NaturalBasis>,
    pub blocks: BTreeMap<(usize, usize), Vec<KronTerm>>,
}

impl BlockOperator {
    pub fn zero(basis: &Arc<NaturalBasis>) -> Self {
        Self {
            basis: basis.clone(),
            blocks: BTreeMap::new(),
        }
    }

    pub fn basis(&self) -> &Arc<NaturalBasis> {
        &self.basis
    }

    pub fn push(&mut self, row: usize, col: usize, k: CMat, m: CMat) {
        self.blocks.entry((row, col)).or_default().push(KronTerm { k, m });
    }

    pub fn scale(&self, z: C64) -> Self {
        let mut out = self.clone();
        for terms in out.blocks.values_mut() {
            for t in terms {
                t.k *= z;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (key, terms) in &other.blocks {
            out.blocks.entry(*key).or_default().extend(terms.iter().cloned());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(c(-1.0)))
    }

    /// Merge Kronecker terms that share an identical `m` factor.
    pub fn compress(mut self) -> Self {
        for terms in self.blocks.values_mut() {
            let mut merged: Vec<KronTerm> = Vec::with_capacity(terms.len());
            for t in terms.drain(..) {
                match merged.iter_mut().find(|u| u.m == t.m) {
                    Some(u) => u.k += &t.k,
                    None => merged.push(t),
                }
            }
            *terms = merged;
        }
        self
    }

    /// `self · other`, keeping only result columns in `cols` when given.
    pub fn compose_on(&self, other: &Self, cols: Option<&[usize]>) -> Self {
        let mut by_row: BTreeMap<usize, Vec<(usize, &Vec<KronTerm>)>> = BTreeMap::new();
        for (&(r, l), terms) in &self.blocks {
            by_row.entry(l).or_default().push((r, terms));
        }
        let keys: Vec<(usize, usize)> = other
            .blocks
            .keys()
            .filter(|(_, cc)| cols.is_none_or(|s| s.contains(cc)))
            .copied()
            .collect();
        let parts: Vec<((usize, usize), Vec<KronTerm>)> = keys
            .par_iter()
            .flat_map_iter(|&(l, col)| {
                let right = &other.blocks[&(l, col)];
                by_row
                    .get(&l)
                    .map(|v| v.as_slice())
                    .unwrap_or(&[])
                    .iter()
                    .map(move |&(r, left)| {
                        let mut terms = Vec::with_capacity(left.len() * right.len());
                        for a in left {
                            for b in right {
                                terms.push(KronTerm {
                                    k: &a.k * &b.k,
                                    m: &a.m * &b.m,
                                });
                            }
                        }
                        ((r, col), terms)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut out = Self::zero(&self.basis);
        for (key, terms) in parts {
            out.blocks.entry(key).or_default().extend(terms);
        }
        out.compress()
    }

    pub fn compose(&self, other: &Self) -> Self {
        self.compose_on(other, None)
    }

    pub fn commutator_on(&self, other: &Self, cols: Option<&[usize]>) -> Self {
        self.compose_on(other, cols).sub(&other.compose_on(self, cols))
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.compose(other).add(&other.compose(self))
    }

    /// Dense `(d_r²) × (d_c²)` block.
    pub fn block_dense(&self, row: usize, col: usize) -> CMat {
        let dr = self.basis.irrep(row).dim();
        let dc = self.basis.irrep(col).dim();
        let mut out = zeros(dr * dr, dc * dc);
        let Some(terms) = self.blocks.get(&(row, col)) else {
            return out;
        };
        if terms.len() == 1 {
            return terms[0].k.kronecker(&terms[0].m);
        }
        // Σ_t k_t[k',k] m_t[m',m] as one product indexed ((k',k), (m',m))
        let nt = terms.len();
        let mut kk = zeros(dr * dc, nt);
        let mut mm = zeros(nt, dr * dc);
        for (t, term) in terms.iter().enumerate() {
            for (p, &z) in term.k.iter().enumerate() {
                kk[(p, t)] = z;
            }
            for (p, &z) in term.m.iter().enumerate() {
                mm[(t, p)] = z;
            }
        }
        let prod = kk * mm;
        // column-major flattening: p = k' + dr·k
        for k in 0..dc {
            for kp in 0..dr {
                let p = kp + dr * k;
                for m in 0..dc {
                    for mp in 0..dr {
                        out[(kp * dr + mp, k * dc + m)] = prod[(p, mp + dr * m)];
                    }
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> CMat {
        let d = self.basis.dim();
        let mut out = zeros(d, d);
        for &(r, col) in self.blocks.keys() {
            let b = self.block_dense(r, col);
            out.view_mut((self.basis.offset(r), self.basis.offset(col)), b.shape())
                .copy_from(&b);
        }
        out
    }

    /// Largest entry modulus over columns in the given irreps, with its
    /// `(row, col)` basis indices.
    pub fn max_abs_on(&self, cols: Option<&[usize]>) -> (f64, Option<(usize, usize)>) {
        self.max_abs_where(cols, &|_| true)
    }

    /// As [`max_abs_on`](Self::max_abs_on), further restricted to basis
    /// columns accepted by `keep`. Blocks are never densified whole.
    pub fn max_abs_where(
        &self,
        cols: Option<&[usize]>,
        keep: &(dyn Fn(usize) -> bool + Sync),
    ) -> (f64, Option<(usize, usize)>) {
        let keys: Vec<(usize, usize)> = self
            .blocks
            .keys()
            .filter(|(_, cc)| cols.is_none_or(|s| s.contains(cc)))
            .copied()
            .collect();
        keys.par_iter()
            .map(|&(r, col)| self.block_max_abs(r, col, keep))
            .reduce(|| (0.0, None), |a, b| if b.0 > a.0 { b } else { a })
    }

    fn block_max_abs(&self, r: usize, col: usize, keep: &(dyn Fn(usize) -> bool + Sync)) -> (f64, Option<(usize, usize)>) {
        let terms = &self.blocks[&(r, col)];
        let dr = self.basis.irrep(r).dim();
        let dc = self.basis.irrep(col).dim();
        let (ro, co) = (self.basis.offset(r), self.basis.offset(col));
        let nt = terms.len();
        // row t holds m_t flattened as (m', m) ↦ m'·dc + m
        let mut mflat = zeros(nt, dr * dc);
        for (t, term) in terms.iter().enumerate() {
            for mp in 0..dr {
                for m in 0..dc {
                    mflat[(t, mp * dc + m)] = term.m[(mp, m)];
                }
            }
        }
        let mut best = (0.0, None);
        let mut kcol = zeros(dr, nt);
        for k in 0..dc {
            let wanted: Vec<usize> = (0..dc).filter(|&m| keep(co + k * dc + m)).collect();
            if wanted.is_empty() {
                continue;
            }
            for (t, term) in terms.iter().enumerate() {
                kcol.set_column(t, &term.k.column(k));
            }
            let prod = &kcol * &mflat;
            for kp in 0..dr {
                for mp in 0..dr {
                    for &m in &wanted {
                        let v = prod[(kp, mp * dc + m)].norm();
                        if v > best.0 {
                            best = (v, Some((ro + kp * dr + mp, co + k * dc + m)));
                        }
                    }
                }
            }
        }
        best
    }

    /// Sparse `(row, col, value)` triplets above `tol`, row-major order.
    pub fn triplets(&self, tol: f64) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for &(r, col) in self.blocks.keys() {
            let b = self.block_dense(r, col);
            for i in 0..b.nrows() {
                for j in 0..b.ncols() {
                    let z = b[(i, j)];
                    if z.norm() > tol {
                        out.push((self.basis.offset(r) + i, self.basis.offset(col) + j, z));
                    }
                }
            }
        }
        out.sort_by_key(|&(i, j, _)| (i, j));
        out
    }

    /// Apply `k ↦ f_row · k · f_colᵀ`-style maps to the left factors.
    pub fn map_k<F>(&self, f: F) -> Self
    where
        F: Fn(usize, usize, &CMat) -> CMat,
    {
        let mut out = self.clone();
        for (&(r, col), terms) in out.blocks.iter_mut() {
            for t in terms {
                t.k = f(r, col, &t.k);
            }
        }
        out
    }
}

/// Right rotation `M_ab`: `1 ⊗ ρ_J(M_ab)` on each diagonal block.
pub fn m_right(basis: &Arc<NaturalBasis>, a: usize, b: usize) -> BlockOperator {
    let mut op = BlockOperator::zero(basis);
    for (j, r) in basis.irreps().iter().enumerate() {
        op.push(j, j, eye(r.dim()), r.generator(a, b));
    }
    op
}

/// Left rotation `K_ab`: `−ρ_J(M_ab)ᵀ ⊗ 1` on each diagonal block.
pub fn k_left(basis: &Arc<NaturalBasis>, a: usize, b: usize) -> BlockOperator {
    let mut op = BlockOperator::zero(basis);
    for (j, r) in basis.irreps().iter().enumerate() {
        op.push(j, j, -r.generator(a, b).transpose(), eye(r.dim()));
    }
    op
}

/// `C₂(so(c))` of the left action, diagonal in the chain basis.
pub fn casimir_left(basis: &Arc<NaturalBasis>, level: usize) -> BlockOperator {
    let mut op = BlockOperator::zero(basis);
    for (j, r) in basis.irreps().iter().enumerate() {
        op.push(j, j, level_diag(r, level), eye(r.dim()));
    }
    op
}

/// `C₂(so(n))` of the right action.
pub fn casimir_right(basis: &Arc<NaturalBasis>) -> BlockOperator {
    let mut op = BlockOperator::zero(basis);
    for (j, r) in basis.irreps().iter().enumerate() {
        op.push(j, j, eye(r.dim()), eye(r.dim()) * c(r.hw().casimir2()));
    }
    op
}

/// Diagonal of level-`c` Casimir values over the chain labels of `r`.
pub fn level_diag(r: &RepMatrices, level: usize) -> CMat {
    let vals = r.labels().iter().map(|l| {
        if level == 2 {
            let m = l.m_twice() as f64 / 2.0;
            c(m * m)
        } else {
            c(l.level(level).casimir2())
        }
    });
    CMat::from_diagonal(&CVec::from_iterator(r.dim(), vals))
}

/// Chain coordinates of the tensor `P⁰_ab = (E_ab + E_ba)/2 − δ_ab 1/n`.
pub fn tensor_coords(n: usize, a: usize, b: usize) -> Result<CVec> {
    let map = cartesian_map(n, Cartesian::Symmetric)?;
    let mut x = cartesian_matrix(n, Cartesian::Symmetric, a, b)?;
    if a != b {
        x *= c(std::f64::consts::FRAC_1_SQRT_2);
    }
    Ok(map.to_chain(&x))
}

/// The `v` and `|u|` of `U_ab = |u| D_{v(ab)}`.
#[derive(Clone, Debug)]
pub struct UOperatorSpec {
    pub v: CVec,
    pub norm: f64,
}

impl UOperatorSpec {
    pub fn new(v: CVec, norm: f64) -> Result<Self> {
        let l = v.norm();
        if l == 0.0 || norm <= 0.0 {
            return Err(Error::InvalidWeight("U spec needs nonzero v and |u| > 0".into()));
        }
        Ok(Self { v: v / c(l), norm })
    }

    /// `v` along the `(nn)` Cartesian tensor, `|u| = 1`.
    pub fn default_for(n: usize) -> Result<Self> {
        Self::new(tensor_coords(n, n, n)?, 1.0)
    }
}

/// Coupling data for a `J → J'` block of `U`.
#[derive(Clone, Debug)]
pub struct Coupling {
    pub col: usize,
    pub row: usize,
    pub tables: Arc<Vec<CGTable>>,
    /// `√(dim J / dim J')`.
    pub ratio: f64,
}

impl Coupling {
    /// Reduced matrix `G_γ(η)[m', m] = Σ_w η_w conj(V_γ[(m, w), m'])`.
    pub fn g(&self, gamma: usize, eta: &CVec) -> CMat {
        let v = &self.tables[gamma].matrix;
        let (d1, d2, d3) = self.tables[gamma].dims();
        let mut out = zeros(d3, d1);
        for m in 0..d1 {
            let blk = v.rows(m * d2, d2);
            out.set_column(m, &(blk.adjoint() * eta));
        }
        out
    }
}

/// Every `J → J'` coupling through the symmetric rank-2 rep inside the basis.
pub fn couplings(basis: &Arc<NaturalBasis>) -> Result<Vec<Coupling>> {
    couplings_through(basis, &HighestWeight::symmetric(basis.n()))
}

/// Every `J → J'` coupling through the irrep `tensor` inside the basis.
pub fn couplings_through(basis: &Arc<NaturalBasis>, tensor: &HighestWeight) -> Result<Vec<Coupling>> {
    let per_col: Vec<Vec<Coupling>> = (0..basis.irreps().len())
        .into_par_iter()
        .map(|j| {
            let hw = basis.irrep(j).hw();
            let mut out = Vec::new();
            for (hp, _) in decompose_product(hw, tensor)? {
                if let Some(jp) = basis.position(&hp) {
                    out.push(Coupling {
                        col: j,
                        row: jp,
                        tables: cg_tables(hw, tensor, &hp)?,
                        ratio: (hw.dim() as f64 / hp.dim() as f64).sqrt(),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_col.into_iter().flatten().collect())
}

/// Multiplication by `D_{xy}(g) = tr(x† g·y)` on Cartesian rank-2 tensors,
/// summed over the irreducible pieces of the tensor space.
pub fn d_cartesian(basis: &Arc<NaturalBasis>, kind: Cartesian, x: &CMat, y: &CMat) -> Result<BlockOperator> {
    let map = cartesian_map(basis.n(), kind)?;
    let (xi, eta) = (map.to_chain(x), map.to_chain(y));
    let mut op = BlockOperator::zero(basis);
    for (i, (hw, off)) in map.irreps.iter().enumerate() {
        let end = map.irreps.get(i + 1).map_or(map.dim(), |p| p.1);
        let len = end - off;
        let cps = couplings_through(basis, hw)?;
        let part = u_general(basis, &cps, &xi.rows(*off, len).into_owned(), &eta.rows(*off, len).into_owned(), 1.0);
        op = op.add(&part);
    }
    Ok(op)
}

/// `U` with upper vector `ξ` and lower vector `η` (chain coordinates):
/// `⟨J'k'm'|U|Jkm⟩ = scale √(dJ/dJ') Σ_γ conj(G_γ(ξ))[k',k] G_γ(η)[m',m]`.
pub fn u_general(
    basis: &Arc<NaturalBasis>,
    couplings: &[Coupling],
    xi: &CVec,
    eta: &CVec,
    scale: f64,
) -> BlockOperator {
    let mut op = BlockOperator::zero(basis);
    for cp in couplings {
        for g in 0..cp.tables.len() {
            let k = cp.g(g, xi).map(|z| z.conj()) * c(scale * cp.ratio);
            op.push(cp.row, cp.col, k, cp.g(g, eta));
        }
    }
    op
}

/// `U_ab` for a given spec.
pub fn u_op(basis: &Arc<NaturalBasis>, couplings: &[Coupling], spec: &UOperatorSpec, a: usize, b: usize) -> Result<BlockOperator> {
    Ok(u_general(basis, couplings, &spec.v, &tensor_coords(basis.n(), a, b)?, spec.norm))
}

/// `U^{(cd)}_{ab} = D_{(cd)(ab)}`.
pub fn u_tensor(basis: &Arc<NaturalBasis>, couplings: &[Coupling], cd: (usize, usize), ab: (usize, usize)) -> Result<BlockOperator> {
    let n = basis.n();
    Ok(u_general(
        basis,
        couplings,
        &tensor_coords(n, cd.0, cd.1)?,
        &tensor_coords(n, ab.0, ab.1)?,
        1.0,
    ))
}

/// Basis indices kept by [`NaturalBasis::interior_projector`].
pub fn interior_projector(basis: &NaturalBasis, depth: usize) -> Result<Vec<usize>> {
    basis.interior_projector(depth)
}
