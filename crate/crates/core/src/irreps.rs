//! so(n) irreps as Hermitian generator matrices in the chain basis
//! Spin(n) ⊃ Spin(n-1) ⊃ … ⊃ Spin(2).
//!
//! n = 3 uses the Condon–Shortley matrices, n = 4 the factorization
//! so(4) ≅ su(2) ⊕ su(2), and n ≥ 5 the top component of `μ ⊗ vector`
//! generated from its highest-weight vector. Every rep is then brought to
//! the chain basis and phase-fixed by the same procedure.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::algebra::{defining_m, m_pair_index, m_pairs};
use crate::error::{Error, Result};
use crate::labels::{ChainLabel, HighestWeight};
use crate::linalg::{
    c, clusters, eigh, gram_schmidt, kron, select_columns, zeros, CMat, CVec, C64, I, ONE, ZERO,
};

const CLUSTER_TOL: f64 = 1e-6;
const RANK_TOL: f64 = 1e-8;
const PHASE_TOL: f64 = 1e-7;

/// A weight (doubled eigenvalues of `M_12, M_34, …`) with its unit vector.
pub type WeightVector = (Vec<i32>, CVec);

#[derive(Debug)]
pub struct RepMatrices {
    hw: HighestWeight,
    labels: Vec<ChainLabel>,
    gens: Vec<CMat>,
    weights: OnceLock<Vec<WeightVector>>,
}

impl RepMatrices {
    pub fn hw(&self) -> &HighestWeight {
        &self.hw
    }

    pub fn n(&self) -> usize {
        self.hw.n()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[ChainLabel] {
        &self.labels
    }

    /// Generators `M_ab`, a<b, in [`m_pairs`] order.
    pub fn generators(&self) -> &[CMat] {
        &self.gens
    }

    /// `M_ab` for any a,b (antisymmetric, zero on the diagonal).
    pub fn generator(&self, a: usize, b: usize) -> CMat {
        let n = self.n();
        match a.cmp(&b) {
            std::cmp::Ordering::Less => self.gens[m_pair_index(n, a, b)].clone(),
            std::cmp::Ordering::Greater => -self.gens[m_pair_index(n, b, a)].clone(),
            std::cmp::Ordering::Equal => zeros(self.dim(), self.dim()),
        }
    }

    /// `Σ_{a<b≤c} M_ab²`.
    pub fn casimir_level(&self, c: usize) -> CMat {
        level_casimir(self.n(), &self.gens, c)
    }

    pub fn casimir(&self) -> CMat {
        self.casimir_level(self.n())
    }

    /// Weight vectors, ordered by descending weight (lexicographic).
    pub fn weight_basis(&self) -> &[WeightVector] {
        self.weights.get_or_init(|| weight_basis(self.n(), &self.gens))
    }

    /// Raising operators, one per positive root.
    pub fn raising(&self) -> Vec<CMat> {
        roots(self.n())
            .iter()
            .map(|(x, y)| ladder(self.n(), &self.gens, x, y))
            .collect()
    }

    pub fn lowering(&self) -> Vec<CMat> {
        self.raising().iter().map(|m| m.adjoint()).collect()
    }
}

pub fn dim_irrep(hw: &HighestWeight) -> usize {
    hw.dim()
}

pub fn branch(hw: &HighestWeight) -> Result<Vec<HighestWeight>> {
    hw.branch()
}

pub fn chain_casimirs(label: &ChainLabel) -> Result<Vec<f64>> {
    label.casimirs()
}

fn level_casimir(n: usize, gens: &[CMat], c: usize) -> CMat {
    let d = gens[0].nrows();
    let mut out = zeros(d, d);
    for (k, (_, b)) in m_pairs(n).into_iter().enumerate() {
        if b <= c {
            out += &gens[k] * &gens[k];
        }
    }
    out
}

fn gen(n: usize, gens: &[CMat], a: usize, b: usize) -> CMat {
    if a < b {
        gens[m_pair_index(n, a, b)].clone()
    } else {
        -gens[m_pair_index(n, b, a)].clone()
    }
}

/// `M_12 M_34 − M_13 M_24 + M_14 M_23`, which separates so(4) labels `[λ₁, ±λ₂]`.
fn pfaffian4(n: usize, gens: &[CMat]) -> CMat {
    let g = |a, b| gen(n, gens, a, b);
    g(1, 2) * g(3, 4) - g(1, 3) * g(2, 4) + g(1, 4) * g(2, 3)
}

/// Positive roots as pairs `(x, y)` with ladder operator `Σ_{a<b} (x_a y_b − x_b y_a) M_ab`.
fn roots(n: usize) -> Vec<(Vec<C64>, Vec<C64>)> {
    let r = n / 2;
    let f = |i: usize, s: f64| {
        let mut v = vec![ZERO; n];
        v[2 * i] = c(std::f64::consts::FRAC_1_SQRT_2);
        v[2 * i + 1] = I * (s * std::f64::consts::FRAC_1_SQRT_2);
        v
    };
    let mut out = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            out.push((f(i, 1.0), f(j, -1.0)));
            out.push((f(i, 1.0), f(j, 1.0)));
        }
        if n % 2 == 1 {
            let mut e = vec![ZERO; n];
            e[n - 1] = ONE;
            out.push((f(i, 1.0), e));
        }
    }
    out
}

fn ladder(n: usize, gens: &[CMat], x: &[C64], y: &[C64]) -> CMat {
    let d = gens[0].nrows();
    let mut out = zeros(d, d);
    for (k, (a, b)) in m_pairs(n).into_iter().enumerate() {
        let coef = x[a - 1] * y[b - 1] - x[b - 1] * y[a - 1];
        if coef.norm() > 0.0 {
            out += &gens[k] * coef;
        }
    }
    out
}

/// Simultaneous eigenvectors of the Cartan generators, descending weight.
fn weight_basis(n: usize, gens: &[CMat]) -> Vec<WeightVector> {
    let d = gens[0].nrows();
    let r = n / 2;
    let mut groups: Vec<(Vec<i32>, CMat)> = vec![(Vec::new(), CMat::identity(d, d))];
    for i in 0..r {
        let h = gen(n, gens, 2 * i + 1, 2 * i + 2);
        let mut next = Vec::new();
        for (w, q) in groups {
            let (vals, vecs) = eigh(&(q.adjoint() * &h * &q));
            let mut parts: Vec<_> = clusters(&vals, CLUSTER_TOL)
                .into_iter()
                .map(|(v, idx)| {
                    let mut w2 = w.clone();
                    w2.push((2.0 * v).round() as i32);
                    (w2, &q * select_columns(&vecs, &idx))
                })
                .collect();
            parts.reverse();
            next.extend(parts);
        }
        groups = next;
    }
    let mut out = Vec::with_capacity(d);
    for (w, q) in groups {
        for j in 0..q.ncols() {
            out.push((w.clone(), q.column(j).into_owned()));
        }
    }
    out
}

/// Chain-adapted orthonormal basis of the representation carried by `gens`
/// (irreducible with highest weight `hw`), in lexicographic label order.
fn chain_basis(hw: &HighestWeight, gens: &[CMat]) -> Result<(Vec<ChainLabel>, CMat)> {
    let n = hw.n();
    let d = gens[0].nrows();
    let mut groups: Vec<(Vec<HighestWeight>, CMat)> =
        vec![(vec![hw.clone()], CMat::identity(d, d))];
    for lvl in (2..n).rev() {
        let op = if lvl == 2 {
            gen(n, gens, 1, 2)
        } else {
            level_casimir(n, gens, lvl)
        };
        let p4 = (lvl == 4 && n > 4).then(|| pfaffian4(n, gens));
        let mut next = Vec::new();
        for (prefix, q) in groups {
            let parent = prefix.last().unwrap();
            let cands = parent.branch()?;
            let value = |h: &HighestWeight| {
                if lvl == 2 {
                    h.twice()[0] as f64 / 2.0
                } else {
                    h.casimir2()
                }
            };
            let (vals, vecs) = eigh(&(q.adjoint() * &op * &q));
            let mut found: Vec<(HighestWeight, CMat)> = Vec::new();
            for (v, idx) in clusters(&vals, CLUSTER_TOL) {
                let sub = &q * select_columns(&vecs, &idx);
                let matching: Vec<&HighestWeight> =
                    cands.iter().filter(|h| (value(h) - v).abs() < 1e-6).collect();
                match (matching.len(), &p4) {
                    (1, _) => found.push((matching[0].clone(), sub)),
                    (m, Some(p)) if m > 1 => {
                        let (pv, pvec) = eigh(&(sub.adjoint() * p * &sub));
                        for (pval, pidx) in clusters(&pv, CLUSTER_TOL) {
                            let hit: Vec<&&HighestWeight> = matching
                                .iter()
                                .filter(|h| (h.pfaffian4().unwrap() - pval).abs() < 1e-6)
                                .collect();
                            if hit.len() != 1 {
                                return Err(Error::Projection(format!(
                                    "so(4) pfaffian {pval} unmatched under {parent}"
                                )));
                            }
                            found.push(((*hit[0]).clone(), &sub * select_columns(&pvec, &pidx)));
                        }
                    }
                    (0, _) => {
                        return Err(Error::Projection(format!(
                            "level-{lvl} eigenvalue {v} not among branches of {parent}"
                        )))
                    }
                    _ => {
                        return Err(Error::Unsupported(format!(
                            "colliding level-{lvl} Casimirs under {parent}"
                        )))
                    }
                }
            }
            for cand in cands {
                let pos = found.iter().position(|(h, _)| *h == cand).ok_or_else(|| {
                    Error::Projection(format!("branch {cand} of {parent} missing"))
                })?;
                let (h, sub) = found.swap_remove(pos);
                if sub.ncols() != h.dim() {
                    return Err(Error::Projection(format!(
                        "block {h} has size {} (expected {})",
                        sub.ncols(),
                        h.dim()
                    )));
                }
                let mut p = prefix.clone();
                p.push(h);
                next.push((p, sub));
            }
        }
        groups = next;
    }
    let mut w = zeros(d, d);
    let mut labels = Vec::with_capacity(d);
    for (k, (levels, q)) in groups.into_iter().enumerate() {
        w.set_column(k, &q.column(0));
        labels.push(ChainLabel { levels });
    }
    fix_phases(n, gens, &labels, &mut w);
    Ok((labels, w))
}

/// Rigid phases per level: within each Spin(c+1) multiplet, the first
/// sizable element of `M_{c,c+1}` linking an already fixed Spin(c)
/// multiplet to a new one is made real positive.
fn fix_phases(n: usize, gens: &[CMat], labels: &[ChainLabel], w: &mut CMat) {
    let d = labels.len();
    for lvl in 2..n {
        let m = gen(n, gens, lvl, lvl + 1);
        let mm = w.adjoint() * &m * &*w;
        let scale = mm.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        // key of the Spin(c+1) family and of the Spin(c) sub-multiplet
        let fam = |i: usize| &labels[i].levels[..n - lvl];
        let sub = |i: usize| &labels[i].levels[..n - lvl + 1];
        let mut start = 0;
        while start < d {
            let mut end = start;
            while end < d && fam(end) == fam(start) {
                end += 1;
            }
            let mut subs: Vec<(usize, usize)> = Vec::new();
            let mut s = start;
            while s < end {
                let mut e = s;
                while e < end && sub(e) == sub(s) {
                    e += 1;
                }
                subs.push((s, e));
                s = e;
            }
            let mut phase = vec![None::<C64>; subs.len()];
            phase[0] = Some(ONE);
            let mut order = vec![0usize];
            let mut head = 0;
            while head < order.len() {
                let a = order[head];
                head += 1;
                for b in 0..subs.len() {
                    if phase[b].is_some() {
                        continue;
                    }
                    let pa = phase[a].unwrap();
                    'search: for x in subs[a].0..subs[a].1 {
                        for y in subs[b].0..subs[b].1 {
                            let z = mm[(x, y)];
                            if z.norm() > PHASE_TOL * scale {
                                // element becomes conj(pa) z pb
                                let t = pa.conj() * z;
                                phase[b] = Some(t.conj() / t.norm());
                                order.push(b);
                                break 'search;
                            }
                        }
                    }
                }
            }
            for (k, &(s, e)) in subs.iter().enumerate() {
                let p = phase[k].unwrap_or(ONE);
                for j in s..e {
                    let col = w.column(j) * p;
                    w.set_column(j, &col);
                }
            }
            start = end;
        }
    }
}

fn finish(hw: &HighestWeight, gens: Vec<CMat>) -> Result<RepMatrices> {
    let (labels, w) = chain_basis(hw, &gens)?;
    let gens = gens.iter().map(|g| w.adjoint() * g * &w).collect();
    Ok(RepMatrices {
        hw: hw.clone(),
        labels,
        gens,
        weights: OnceLock::new(),
    })
}

/// Condon–Shortley spin-j matrices `(J_x, J_y, J_z)`, basis m ascending.
pub fn spin_matrices(twice_j: i32) -> (CMat, CMat, CMat) {
    let d = (twice_j + 1) as usize;
    let j = twice_j as f64 / 2.0;
    let mut jz = zeros(d, d);
    let mut jp = zeros(d, d);
    for k in 0..d {
        let m = -j + k as f64;
        jz[(k, k)] = c(m);
        if k + 1 < d {
            jp[(k + 1, k)] = c((j * (j + 1.0) - m * (m + 1.0)).sqrt());
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * c(0.5);
    let jy = (&jp - &jm) * C64::new(0.0, -0.5);
    (jx, jy, jz)
}

fn build_so3(hw: &HighestWeight) -> RepMatrices {
    let (jx, jy, jz) = spin_matrices(hw.twice()[0]);
    // m_pairs(3) = (1,2), (1,3), (2,3)
    RepMatrices {
        hw: hw.clone(),
        labels: hw.chain_labels(),
        gens: vec![jz, -jy, jx],
        weights: OnceLock::new(),
    }
}

fn build_so4(hw: &HighestWeight) -> Result<RepMatrices> {
    let t = hw.twice();
    let (ta, tb) = (t[0] + t[1], t[0] - t[1]);
    let (ax, ay, az) = spin_matrices(ta / 2);
    let (bx, by, bz) = spin_matrices(tb / 2);
    let ia = CMat::identity(ax.nrows(), ax.nrows());
    let ib = CMat::identity(bx.nrows(), bx.nrows());
    let a = [kron(&ax, &ib), kron(&ay, &ib), kron(&az, &ib)];
    let b = [kron(&ia, &bx), kron(&ia, &by), kron(&ia, &bz)];
    let l: Vec<CMat> = (0..3).map(|i| &a[i] + &b[i]).collect();
    let nn: Vec<CMat> = (0..3).map(|i| &a[i] - &b[i]).collect();
    // M23 = L1, M31 = L2, M12 = L3, M_i4 = N_i
    let gens = vec![
        l[2].clone(),
        -l[1].clone(),
        nn[0].clone(),
        l[0].clone(),
        nn[1].clone(),
        nn[2].clone(),
    ];
    finish(hw, gens)
}

/// Top component of `μ ⊗ vector`, with `μ` one box smaller than `hw`.
fn build_tensor(hw: &HighestWeight) -> Result<RepMatrices> {
    let n = hw.n();
    let t = hw.twice().to_vec();
    if hw.is_trivial() {
        return Ok(RepMatrices {
            hw: hw.clone(),
            labels: hw.chain_labels(),
            gens: vec![zeros(1, 1); m_pairs(n).len()],
            weights: OnceLock::new(),
        });
    }
    let mut mu = t.clone();
    let j = t.iter().rposition(|&x| x != 0).unwrap();
    mu[j] -= 2 * t[j].signum();
    let mu = HighestWeight::from_twice(n, mu)?;
    let base = build_rep(&mu)?;
    let dm = base.dim();
    let dp = dm * n;
    let im = CMat::identity(dm, dm);
    let iv = CMat::identity(n, n);
    let prod: Vec<CMat> = m_pairs(n)
        .iter()
        .zip(base.generators())
        .map(|(&(a, b), g)| kron(g, &iv) + kron(&im, &defining_m(n, a, b)))
        .collect();

    // weight-λ vectors of the product from the factor weight bases
    let vec_weights = weight_basis(n, &m_pairs(n).iter().map(|&(a, b)| defining_m(n, a, b)).collect::<Vec<_>>());
    let mut cand: Vec<CVec> = Vec::new();
    for (w1, v1) in base.weight_basis() {
        for (w2, v2) in &vec_weights {
            if w1.iter().zip(w2).map(|(x, y)| x + y).eq(t.iter().copied()) {
                cand.push(v1.kronecker(v2));
            }
        }
    }
    if cand.is_empty() {
        return Err(Error::Projection(format!("no weight {hw} in {mu} x vector")));
    }
    let mut q = zeros(dp, cand.len());
    for (k, v) in cand.iter().enumerate() {
        q.set_column(k, v);
    }
    let raise = roots(n)
        .iter()
        .map(|(x, y)| ladder(n, &prod, x, y) * &q)
        .collect::<Vec<_>>();
    let mut stacked = zeros(dp * raise.len(), q.ncols());
    for (k, r) in raise.iter().enumerate() {
        stacked.view_mut((k * dp, 0), (dp, q.ncols())).copy_from(r);
    }
    let ns = crate::linalg::null_space(&stacked, RANK_TOL);
    if ns.ncols() != 1 {
        return Err(Error::Projection(format!(
            "{} highest-weight vectors for {hw} in {mu} x vector",
            ns.ncols()
        )));
    }
    let top = &q * ns.column(0);

    let lower: Vec<CMat> = roots(n)
        .iter()
        .map(|(x, y)| ladder(n, &prod, x, y).adjoint())
        .collect();
    let target = hw.dim();
    let basis = span_by_lowering(&top, &lower, target)?;
    let gens = prod.iter().map(|g| basis.adjoint() * g * &basis).collect();
    finish(hw, gens)
}

/// Orthonormal basis of the span of `start` under repeated lowering.
pub(crate) fn span_by_lowering(start: &CVec, lower: &[CMat], target: usize) -> Result<CMat> {
    let dp = start.len();
    let mut cols: Vec<CVec> = vec![start.normalize()];
    let mut head = 0;
    while head < cols.len() && cols.len() < target {
        let v = cols[head].clone();
        head += 1;
        for l in lower {
            let mut w = l * &v;
            let n0 = w.norm();
            if n0 < 1e-12 {
                continue;
            }
            for _ in 0..2 {
                for q in &cols {
                    let p = q.dotc(&w);
                    w -= q * p;
                }
            }
            if w.norm() > 1e-8 * n0 {
                cols.push(w.normalize());
                if cols.len() == target {
                    break;
                }
            }
        }
    }
    if cols.len() != target {
        return Err(Error::Projection(format!(
            "lowering generated {} states, expected {target}",
            cols.len()
        )));
    }
    let mut m = zeros(dp, target);
    for (k, v) in cols.iter().enumerate() {
        m.set_column(k, v);
    }
    Ok(gram_schmidt(&m))
}

fn construct(hw: &HighestWeight) -> Result<RepMatrices> {
    let n = hw.n();
    if hw.is_spinorial() && n > 4 {
        return Err(Error::Unsupported(format!("spinor {hw} for n > 4")));
    }
    if n > 6 {
        return Err(Error::Unsupported(format!("n = {n} > 6")));
    }
    match n {
        2 => Ok(RepMatrices {
            hw: hw.clone(),
            labels: hw.chain_labels(),
            gens: vec![CMat::from_element(1, 1, c(hw.twice()[0] as f64 / 2.0))],
            weights: OnceLock::new(),
        }),
        3 => Ok(build_so3(hw)),
        4 => build_so4(hw),
        _ => build_tensor(hw),
    }
}

fn cache() -> &'static Mutex<HashMap<HighestWeight, Arc<RepMatrices>>> {
    static CACHE: OnceLock<Mutex<HashMap<HighestWeight, Arc<RepMatrices>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized construction; concurrent duplicate builds keep the first result.
pub fn build_rep(hw: &HighestWeight) -> Result<Arc<RepMatrices>> {
    if let Some(r) = cache().lock().unwrap().get(hw) {
        return Ok(r.clone());
    }
    let rep = Arc::new(construct(hw)?);
    Ok(cache()
        .lock()
        .unwrap()
        .entry(hw.clone())
        .or_insert(rep)
        .clone())
}

/// Split a (small, dense) representation into irreps. Returns, for each
/// highest-weight vector in ascending label order, the label and the
/// chain-basis frame (columns in the input coordinates). Frames of repeated
/// labels follow the canonical basis of the highest-weight space.
pub fn decompose_dense(n: usize, gens: &[CMat]) -> Result<Vec<(HighestWeight, CMat)>> {
    let d = gens[0].nrows();
    let wb = weight_basis(n, gens);
    let raise: Vec<CMat> = roots(n).iter().map(|(x, y)| ladder(n, gens, x, y)).collect();
    let lower: Vec<CMat> = raise.iter().map(|m| m.adjoint()).collect();
    let mut weights: Vec<Vec<i32>> = wb.iter().map(|(w, _)| w.clone()).collect();
    weights.dedup();
    let mut out = Vec::new();
    let mut covered = 0;
    for w in weights {
        let Ok(hw) = HighestWeight::from_twice(n, w.clone()) else {
            continue;
        };
        let cols: Vec<&CVec> = wb.iter().filter(|(x, _)| *x == w).map(|(_, v)| v).collect();
        let mut q = zeros(d, cols.len());
        for (k, v) in cols.iter().enumerate() {
            q.set_column(k, v);
        }
        let mut stacked = zeros(d * raise.len().max(1), q.ncols());
        for (k, r) in raise.iter().enumerate() {
            stacked.view_mut((k * d, 0), (d, q.ncols())).copy_from(&(r * &q));
        }
        let ns = crate::linalg::null_space(&stacked, RANK_TOL);
        let tops = crate::linalg::canonical_basis(&(&q * ns));
        for j in 0..tops.ncols() {
            let span = span_by_lowering(&tops.column(j).into_owned(), &lower, hw.dim())?;
            let sub: Vec<CMat> = gens.iter().map(|g| span.adjoint() * g * &span).collect();
            let (_, w) = chain_basis(&hw, &sub)?;
            covered += hw.dim();
            out.push((hw.clone(), span * w));
        }
    }
    if covered != d {
        return Err(Error::Projection(format!("decomposition covers {covered} of {d} states")));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Rebuild an so(4) irrep by the tensor route instead of su(2) ⊕ su(2).
pub fn build_so4_by_tensor(hw: &HighestWeight) -> Result<RepMatrices> {
    if hw.n() != 4 || hw.is_spinorial() {
        return Err(Error::Unsupported(format!("{hw} is not a tensorial so(4) irrep")));
    }
    build_tensor(hw)
}

/// Re-run chain diagonalization and phase fixing on arbitrary-basis generators.
pub fn rechain(hw: &HighestWeight, gens: Vec<CMat>) -> Result<RepMatrices> {
    finish(hw, gens)
}
