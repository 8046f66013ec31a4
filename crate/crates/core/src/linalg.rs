//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    // symmetrize to suppress round-off asymmetry
    let h = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Group sorted eigenvalues into clusters whose spread is below `tol`.
/// Returns `(mean value, column indices)`.
pub fn clusters(vals: &[f64], tol: f64) -> Vec<(f64, Vec<usize>)> {
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match out.last_mut() {
            Some((_, idx)) if (v - vals[*idx.last().unwrap()]).abs() < tol => idx.push(i),
            _ => out.push((v, vec![i])),
        }
    }
    for (mean, idx) in out.iter_mut() {
        *mean = idx.iter().map(|&i| vals[i]).sum::<f64>() / idx.len() as f64;
    }
    out
}

pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    let mut out = zeros(m.nrows(), cols.len());
    for (k, &j) in cols.iter().enumerate() {
        out.set_column(k, &m.column(j));
    }
    out
}

/// Orthonormal basis of the null space of `a` (columns). Singular values
/// below `rel_tol` times the largest (floored at 1, since callers pass
/// O(1)-scaled operators) are treated as zero.
pub fn null_space(a: &CMat, rel_tol: f64) -> CMat {
    let cols = a.ncols();
    if cols == 0 {
        return zeros(0, 0);
    }
    // pad so that V is square
    let rows = a.nrows().max(cols);
    let mut m = zeros(rows, cols);
    m.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let top = svd.singular_values.iter().fold(0.0f64, |x, &y| x.max(y));
    let cut = rel_tol * top.max(1.0);
    let keep: Vec<usize> = (0..cols).filter(|&i| svd.singular_values[i] <= cut).collect();
    let mut out = zeros(cols, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &vt.row(i).adjoint());
    }
    canonical_basis(&out)
}

/// Make an orthonormal basis of a subspace independent of the input basis:
/// reduce to column-echelon form on greedily chosen pivot rows, then
/// Gram-Schmidt in pivot order.
pub fn canonical_basis(q: &CMat) -> CMat {
    let k = q.ncols();
    if k <= 1 {
        let mut out = q.clone();
        if k == 1 {
            fix_phase_first(&mut out, 0, 1e-9);
        }
        return out;
    }
    let mut m = q.clone();
    let rows = m.nrows();
    let mut col = 0;
    let mut r = 0;
    while col < k && r < rows {
        // pick the largest pivot in row r among remaining columns
        let (mut best, mut bj) = (0.0, col);
        for j in col..k {
            let v = m[(r, j)].norm();
            if v > best {
                best = v;
                bj = j;
            }
        }
        if best < 1e-7 {
            r += 1;
            continue;
        }
        m.swap_columns(col, bj);
        let p = m[(r, col)];
        let pc = m.column(col) / p;
        m.set_column(col, &pc);
        for j in 0..k {
            if j != col {
                let f = m[(r, j)];
                let upd = m.column(j) - &pc * f;
                m.set_column(j, &upd);
            }
        }
        col += 1;
        r += 1;
    }
    gram_schmidt(&m)
}

/// Modified Gram-Schmidt (two passes) on the columns.
pub fn gram_schmidt(m: &CMat) -> CMat {
    let mut out = m.clone();
    for j in 0..out.ncols() {
        for _ in 0..2 {
            for i in 0..j {
                let qi = out.column(i).into_owned();
                let proj = qi.dotc(&out.column(j));
                let upd = out.column(j) - qi * proj;
                out.set_column(j, &upd);
            }
        }
        let nrm = out.column(j).norm();
        let upd = out.column(j) / c(nrm);
        out.set_column(j, &upd);
    }
    out
}

/// Rotate column `j` so that its first entry with modulus above `tol`
/// is real positive.
pub fn fix_phase_first(m: &mut CMat, j: usize, tol: f64) {
    let scale = m.column(j).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if scale == 0.0 {
        return;
    }
    if let Some(z) = m.column(j).iter().find(|z| z.norm() > tol * scale).copied() {
        let ph = z.conj() / z.norm();
        let upd = m.column(j) * ph;
        m.set_column(j, &upd);
    }
}

/// Kronecker product with the left factor as the major index.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Matrix exponential `exp(i t H)` of a Hermitian `H`.
pub fn expi_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| C64::from_polar(1.0, v * t)),
    ));
    &vecs * d * vecs.adjoint()
}
