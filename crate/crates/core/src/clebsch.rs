//! Tensor-product decomposition and Clebsch–Gordan intertwiners in the chain basis.
//!
//! A coupling `hw1 ⊗ hw2 ⊃ γ·hw3` is stored as the isometry
//! `V_γ : V(hw3) → V(hw1) ⊗ V(hw2)`, rows indexed by `i1·d2 + i2`, so that
//! `C(m1, m2; m3, γ) = V_γ[(m1, m2), m3]`.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::algebra::{defining_m, m_pairs};
use crate::error::{Error, Result};
use crate::irreps::{build_rep, decompose_dense, RepMatrices};
use crate::labels::{ChainLabel, HighestWeight};
use crate::linalg::{c, canonical_basis, null_space, zeros, CMat, CVec, C64, ONE};

/// Environment variable naming a directory for persisted CG tables.
pub const CACHE_ENV: &str = "SLREP_CACHE_DIR";

const RANK_TOL: f64 = 1e-8;
const PHASE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct CGTable {
    pub hw1: HighestWeight,
    pub hw2: HighestWeight,
    pub hw3: HighestWeight,
    /// 1-based outer-multiplicity index.
    pub gamma: usize,
    /// `(d1·d2) × d3` isometry.
    pub matrix: CMat,
}

impl CGTable {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.hw1.dim(), self.hw2.dim(), self.hw3.dim())
    }

    pub fn coefficient(&self, i1: usize, i2: usize, i3: usize) -> C64 {
        self.matrix[(i1 * self.hw2.dim() + i2, i3)]
    }

    /// Coefficient looked up by chain labels; zero if a label is foreign.
    pub fn coefficient_by_labels(&self, l1: &ChainLabel, l2: &ChainLabel, l3: &ChainLabel) -> C64 {
        let pos = |hw: &HighestWeight, l: &ChainLabel| hw.chain_labels().iter().position(|x| x == l);
        match (pos(&self.hw1, l1), pos(&self.hw2, l2), pos(&self.hw3, l3)) {
            (Some(a), Some(b), Some(c3)) => self.coefficient(a, b, c3),
            _ => C64::new(0.0, 0.0),
        }
    }

    /// Nonzero entries `(i1, i2, i3, value)` above `tol` in index order.
    pub fn entries(&self, tol: f64) -> Vec<(usize, usize, usize, C64)> {
        let (d1, d2, d3) = self.dims();
        let mut out = Vec::new();
        for i1 in 0..d1 {
            for i2 in 0..d2 {
                for i3 in 0..d3 {
                    let z = self.matrix[(i1 * d2 + i2, i3)];
                    if z.norm() > tol {
                        out.push((i1, i2, i3, z));
                    }
                }
            }
        }
        out
    }
}

/// Product operators in matrix form: a product vector is a `d1 × d2`
/// matrix `X` and `A ⊗ 1 + 1 ⊗ B` acts as `A X + X Bᵀ`.
struct Product {
    r1: Arc<RepMatrices>,
    r2: Arc<RepMatrices>,
}

impl Product {
    fn new(hw1: &HighestWeight, hw2: &HighestWeight) -> Result<Self> {
        if hw1.n() != hw2.n() {
            return Err(Error::Dimension(format!("{hw1} and {hw2} live in different so(n)")));
        }
        Ok(Self {
            r1: build_rep(hw1)?,
            r2: build_rep(hw2)?,
        })
    }

    fn d(&self) -> (usize, usize) {
        (self.r1.dim(), self.r2.dim())
    }

    fn act(a: &CMat, b: &CMat, x: &CVec, d1: usize, d2: usize) -> CVec {
        let xm = unvec(x, d1, d2);
        vec_of(&(a * &xm + &xm * b.transpose()))
    }

    /// Orthonormal (canonical) highest-weight vectors of weight `w`.
    fn highest_vectors(&self, w: &[i32]) -> CMat {
        let (d1, d2) = self.d();
        let mut cand: Vec<CVec> = Vec::new();
        for (w1, u) in self.r1.weight_basis() {
            for (w2, v) in self.r2.weight_basis() {
                if w1.iter().zip(w2).map(|(a, b)| a + b).eq(w.iter().copied()) {
                    cand.push(u.kronecker(v));
                }
            }
        }
        if cand.is_empty() {
            return zeros(d1 * d2, 0);
        }
        let rs1 = self.r1.raising();
        let rs2 = self.r2.raising();
        let dp = d1 * d2;
        let mut stacked = zeros(dp * rs1.len().max(1), cand.len());
        for (k, (a, b)) in rs1.iter().zip(&rs2).enumerate() {
            for (j, x) in cand.iter().enumerate() {
                stacked
                    .view_mut((k * dp, j), (dp, 1))
                    .copy_from(&Self::act(a, b, x, d1, d2));
            }
        }
        let ns = null_space(&stacked, RANK_TOL);
        let mut q = zeros(dp, cand.len());
        for (j, x) in cand.iter().enumerate() {
            q.set_column(j, x);
        }
        canonical_basis(&(q * ns))
    }

    /// Dominant weights present in the product, ascending.
    fn dominant_weights(&self) -> Vec<HighestWeight> {
        let n = self.r1.n();
        let mut ws: Vec<HighestWeight> = Vec::new();
        for (w1, _) in self.r1.weight_basis() {
            for (w2, _) in self.r2.weight_basis() {
                let w: Vec<i32> = w1.iter().zip(w2).map(|(a, b)| a + b).collect();
                if let Ok(h) = HighestWeight::from_twice(n, w) {
                    ws.push(h);
                }
            }
        }
        ws.sort();
        ws.dedup();
        ws
    }

    /// Intertwiner `V(hw3) → product` sending the highest-weight vector of
    /// `r3` to `top`. Both sides are generated by the same lowering words
    /// with the same Gram–Schmidt coefficients.
    fn intertwiner(&self, r3: &RepMatrices, top: &CVec) -> Result<CMat> {
        let (d1, d2) = self.d();
        let d3 = r3.dim();
        let low3 = r3.lowering();
        let low1 = self.r1.lowering();
        let low2 = self.r2.lowering();
        let s0 = r3.weight_basis()[0].1.clone();
        let mut ss: Vec<CVec> = vec![s0];
        let mut ts: Vec<CVec> = vec![top.clone()];
        let mut head = 0;
        while head < ss.len() && ss.len() < d3 {
            let (s, t) = (ss[head].clone(), ts[head].clone());
            head += 1;
            for k in 0..low3.len() {
                let mut s2 = &low3[k] * &s;
                let mut t2 = Self::act(&low1[k], &low2[k], &t, d1, d2);
                let n0 = s2.norm();
                if n0 < 1e-12 {
                    continue;
                }
                for _ in 0..2 {
                    for (q, tq) in ss.iter().zip(&ts) {
                        let p = q.dotc(&s2);
                        s2 -= q * p;
                        t2 -= tq * p;
                    }
                }
                let nr = s2.norm();
                if nr > 1e-8 * n0 {
                    ss.push(s2 / c(nr));
                    ts.push(t2 / c(nr));
                    if ss.len() == d3 {
                        break;
                    }
                }
            }
        }
        if ss.len() != d3 {
            return Err(Error::Projection(format!(
                "lowering reached {} of {d3} states of {}",
                ss.len(),
                r3.hw()
            )));
        }
        let mut v = zeros(d1 * d2, d3);
        for (s, t) in ss.iter().zip(&ts) {
            v += t * s.adjoint();
        }
        Ok(v)
    }
}

fn unvec(x: &CVec, d1: usize, d2: usize) -> CMat {
    CMat::from_row_slice(d1, d2, x.as_slice())
}

fn vec_of(m: &CMat) -> CVec {
    CVec::from_iterator(m.len(), m.transpose().iter().copied())
}

/// Isotypic content of `hw1 ⊗ hw2`, ascending labels.
pub fn decompose_product(hw1: &HighestWeight, hw2: &HighestWeight) -> Result<Vec<(HighestWeight, usize)>> {
    let p = Product::new(hw1, hw2)?;
    let mut out = Vec::new();
    let mut total = 0;
    for h in p.dominant_weights() {
        let m = p.highest_vectors(h.twice()).ncols();
        if m > 0 {
            total += m * h.dim();
            out.push((h, m));
        }
    }
    let (d1, d2) = p.d();
    if total != d1 * d2 {
        return Err(Error::Projection(format!(
            "{hw1} x {hw2}: decomposition covers {total} of {}",
            d1 * d2
        )));
    }
    Ok(out)
}

fn compute_tables(hw1: &HighestWeight, hw2: &HighestWeight, hw3: &HighestWeight) -> Result<Vec<CGTable>> {
    let p = Product::new(hw1, hw2)?;
    let r3 = build_rep(hw3)?;
    let tops = p.highest_vectors(hw3.twice());
    let mut out = Vec::with_capacity(tops.ncols());
    for g in 0..tops.ncols() {
        let mut v = p.intertwiner(&r3, &tops.column(g).into_owned())?;
        fix_global_phase(&mut v);
        out.push(CGTable {
            hw1: hw1.clone(),
            hw2: hw2.clone(),
            hw3: hw3.clone(),
            gamma: g + 1,
            matrix: v,
        });
    }
    Ok(out)
}

/// Make the entry with the smallest `(m1, m2, m3)` real positive.
fn fix_global_phase(v: &mut CMat) {
    let scale = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    for r in 0..v.nrows() {
        for col in 0..v.ncols() {
            let z = v[(r, col)];
            if z.norm() > PHASE_TOL.max(1e-8 * scale) {
                *v *= z.conj() / z.norm();
                return;
            }
        }
    }
}

type Key = (HighestWeight, HighestWeight, HighestWeight);

fn memo() -> &'static Mutex<HashMap<Key, Arc<Vec<CGTable>>>> {
    static M: OnceLock<Mutex<HashMap<Key, Arc<Vec<CGTable>>>>> = OnceLock::new();
    M.get_or_init(|| Mutex::new(HashMap::new()))
}

fn disk_path(key: &Key) -> Option<PathBuf> {
    let dir = std::env::var_os(CACHE_ENV)?;
    let tag = |h: &HighestWeight| {
        h.twice()
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join("_")
    };
    Some(PathBuf::from(dir).join(format!(
        "cg_v1_n{}_{}__{}__{}.json",
        key.0.n(),
        tag(&key.0),
        tag(&key.1),
        tag(&key.2)
    )))
}

#[derive(Serialize, Deserialize)]
struct DiskTables {
    tables: Vec<crate::io::CgTableJson>,
}

fn load_disk(key: &Key) -> Option<Vec<CGTable>> {
    let path = disk_path(key)?;
    let text = std::fs::read_to_string(path).ok()?;
    let disk: DiskTables = serde_json::from_str(&text).ok()?;
    disk.tables.iter().map(|t| t.to_table().ok()).collect()
}

fn store_disk(key: &Key, tables: &[CGTable]) {
    let Some(path) = disk_path(key) else { return };
    let disk = DiskTables {
        tables: tables.iter().map(crate::io::CgTableJson::from_table).collect(),
    };
    if let Some(dir) = path.parent() {
        let _ = std::fs::create_dir_all(dir);
    }
    if let Ok(text) = serde_json::to_string(&disk) {
        // write-then-rename so concurrent readers never see a partial file
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        if std::fs::write(&tmp, text).is_ok() {
            let _ = std::fs::rename(&tmp, &path);
        }
    }
}

/// All multiplicity copies of `hw3` in `hw1 ⊗ hw2` (possibly empty), memoized.
pub fn cg_tables(hw1: &HighestWeight, hw2: &HighestWeight, hw3: &HighestWeight) -> Result<Arc<Vec<CGTable>>> {
    let key = (hw1.clone(), hw2.clone(), hw3.clone());
    if let Some(t) = memo().lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let tables = match load_disk(&key) {
        Some(t) => t,
        None => {
            let t = compute_tables(hw1, hw2, hw3)?;
            store_disk(&key, &t);
            t
        }
    };
    Ok(memo()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| Arc::new(tables))
        .clone())
}

/// Replace the in-process tables for a coupling. Later lookups in this
/// process see `tables`; the disk cache is untouched.
pub fn override_tables(hw1: &HighestWeight, hw2: &HighestWeight, hw3: &HighestWeight, tables: Vec<CGTable>) {
    let key = (hw1.clone(), hw2.clone(), hw3.clone());
    memo().lock().unwrap().insert(key, Arc::new(tables));
}

/// One coupling table; `gamma` is 1-based.
pub fn cg_table(hw1: &HighestWeight, hw2: &HighestWeight, hw3: &HighestWeight, gamma: usize) -> Result<CGTable> {
    let all = cg_tables(hw1, hw2, hw3)?;
    if gamma == 0 || gamma > all.len() {
        return Err(Error::NotContained {
            hw1: hw1.to_string(),
            hw2: hw2.to_string(),
            hw3: hw3.to_string(),
            gamma,
        });
    }
    Ok(all[gamma - 1].clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cartesian {
    Adjoint,
    Symmetric,
}

/// Chain-basis frame of a Cartesian rank-2 tensor space: each chain vector
/// is an n×n matrix, with inner product `tr(X† Y)`.
#[derive(Debug)]
pub struct CartesianMap {
    pub n: usize,
    pub kind: Cartesian,
    /// Irreps in ascending order with their chain-vector offsets.
    pub irreps: Vec<(HighestWeight, usize)>,
    pub frame: Vec<CMat>,
}

impl CartesianMap {
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// Chain coordinates `⟨e_v | X⟩` of an n×n matrix.
    pub fn to_chain(&self, x: &CMat) -> CVec {
        CVec::from_iterator(
            self.frame.len(),
            self.frame.iter().map(|e| e.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum()),
        )
    }
}

/// `(adjoint labels, symmetric label)`; the adjoint of so(4) is reducible.
pub fn adjoint_and_symmetric_reps(n: usize) -> (Vec<HighestWeight>, HighestWeight) {
    let adj = match n {
        3 => vec![HighestWeight::vector(3)],
        4 => vec![
            HighestWeight::from_twice(4, vec![2, -2]).unwrap(),
            HighestWeight::from_twice(4, vec![2, 2]).unwrap(),
        ],
        _ => {
            let mut t = vec![0; n / 2];
            t[0] = 2;
            t[1] = 2;
            vec![HighestWeight::from_twice(n, t).unwrap()]
        }
    };
    (adj, HighestWeight::symmetric(n))
}

/// Unit-norm Cartesian basis matrices: antisymmetric `(E_ab − E_ba)/√2`,
/// symmetric `(E_ab + E_ba)/√2` off the diagonal and `E_aa − 1/n` on it.
pub fn cartesian_matrix(n: usize, kind: Cartesian, a: usize, b: usize) -> Result<CMat> {
    if a == 0 || b == 0 || a > n || b > n {
        return Err(Error::IndexOutOfRange { a, b, n });
    }
    let mut m = zeros(n, n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        Cartesian::Adjoint => {
            if a != b {
                m[(a - 1, b - 1)] = c(s);
                m[(b - 1, a - 1)] = c(-s);
            }
        }
        Cartesian::Symmetric if a == b => {
            m[(a - 1, a - 1)] = ONE;
            for k in 0..n {
                m[(k, k)] -= c(1.0 / n as f64);
            }
        }
        Cartesian::Symmetric => {
            m[(a - 1, b - 1)] = c(s);
            m[(b - 1, a - 1)] = c(s);
        }
    }
    Ok(m)
}

fn cartesian_space(n: usize, kind: Cartesian) -> Vec<CMat> {
    let mut out = Vec::new();
    match kind {
        Cartesian::Adjoint => {
            for (a, b) in m_pairs(n) {
                out.push(cartesian_matrix(n, kind, a, b).unwrap());
            }
        }
        Cartesian::Symmetric => {
            for (a, b) in m_pairs(n) {
                out.push(cartesian_matrix(n, kind, a, b).unwrap());
            }
            // orthonormal traceless diagonals: (E_11 + … + E_kk − k E_{k+1,k+1}) / √(k(k+1))
            for k in 1..n {
                let mut m = zeros(n, n);
                for i in 0..k {
                    m[(i, i)] = ONE;
                }
                m[(k, k)] = c(-(k as f64));
                out.push(m / c(((k * (k + 1)) as f64).sqrt()));
            }
        }
    }
    out
}

fn build_cartesian(n: usize, kind: Cartesian) -> Result<CartesianMap> {
    let space = cartesian_space(n, kind);
    let dim = space.len();
    let inner = |x: &CMat, y: &CMat| -> C64 { x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum() };
    let gens: Vec<CMat> = m_pairs(n)
        .iter()
        .map(|&(a, b)| {
            let m = defining_m(n, a, b);
            let mut g = zeros(dim, dim);
            for (j, x) in space.iter().enumerate() {
                let y = &m * x - x * &m;
                for (i, e) in space.iter().enumerate() {
                    g[(i, j)] = inner(e, &y);
                }
            }
            g
        })
        .collect();
    let parts = decompose_dense(n, &gens)?;
    let probes: Vec<CMat> = match kind {
        Cartesian::Symmetric => std::iter::once(cartesian_matrix(n, kind, n, n)?)
            .chain(m_pairs(n).iter().map(|&(a, b)| cartesian_matrix(n, kind, a, b).unwrap()))
            .collect(),
        Cartesian::Adjoint => m_pairs(n)
            .iter()
            .map(|&(a, b)| cartesian_matrix(n, kind, a, b).unwrap())
            .collect(),
    };
    let mut irreps = Vec::new();
    let mut frame = Vec::new();
    for (hw, w) in parts {
        irreps.push((hw, frame.len()));
        let mut block: Vec<CMat> = (0..w.ncols())
            .map(|j| {
                let mut m = zeros(n, n);
                for (i, e) in space.iter().enumerate() {
                    m += e * w[(i, j)];
                }
                m
            })
            .collect();
        // global phase: first sizable component of the first probe with weight in this block
        'probe: for p in &probes {
            for e in &block {
                let z = inner(e, p);
                if z.norm() > 1e-9 {
                    let ph = z / z.norm();
                    for e in block.iter_mut() {
                        *e *= ph;
                    }
                    break 'probe;
                }
            }
        }
        frame.append(&mut block);
    }
    Ok(CartesianMap { n, kind, irreps, frame })
}

/// Memoized Cartesian frame for `(n, kind)`.
pub fn cartesian_map(n: usize, kind: Cartesian) -> Result<Arc<CartesianMap>> {
    static M: OnceLock<Mutex<HashMap<(usize, Cartesian), Arc<CartesianMap>>>> = OnceLock::new();
    let memo = M.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(m) = memo.lock().unwrap().get(&(n, kind)) {
        return Ok(m.clone());
    }
    let built = Arc::new(build_cartesian(n, kind)?);
    Ok(memo.lock().unwrap().entry((n, kind)).or_insert(built).clone())
}

/// Chain-basis amplitudes of the unit Cartesian vector `|(ab)⟩`.
pub fn cartesian_to_chain(n: usize, kind: Cartesian, a: usize, b: usize) -> Result<CVec> {
    let x = cartesian_matrix(n, kind, a, b)?;
    Ok(cartesian_map(n, kind)?.to_chain(&x))
}
