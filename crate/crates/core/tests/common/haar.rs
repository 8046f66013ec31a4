//! Matrix elements of the multiplication operator `D^S_{xi eta}(g)` between
//! natural-basis functions, integrated numerically over Spin(3).
//!
//! g = exp(i a M12) exp(i b M13) exp(i c M12) with a in [0, 2pi), c in
//! [0, 4pi) (the double cover), Haar measure sin(b) da db dc / 16pi^2.
//! The integrands are trigonometric polynomials in a and c, so the trapezoid
//! rule is exact; b uses Gauss-Legendre.

use gauss_quad::GaussLegendre;
use num_complex::Complex64 as C64;
use slrep_core::contracted::NaturalBasis;
use slrep_core::irreps::RepMatrices;
use slrep_core::linalg::{c, eigh, CMat, CVec};
use std::f64::consts::PI;

pub const PERIODIC_POINTS: usize = 24;
pub const LEGENDRE_POINTS: usize = 48;

struct Exponentials {
    v12: (Vec<f64>, CMat),
    v13: (Vec<f64>, CMat),
}

fn expi(e: &(Vec<f64>, CMat), t: f64) -> CMat {
    let (vals, vecs) = e;
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let ph = C64::from_polar(1.0, v * t);
        for x in scaled.column_mut(j).iter_mut() {
            *x *= ph;
        }
    }
    scaled * vecs.adjoint()
}

impl Exponentials {
    fn new(r: &RepMatrices) -> Self {
        Self { v12: eigh(&r.generator(1, 2)), v13: eigh(&r.generator(1, 3)) }
    }

    fn at(&self, a: f64, b: f64, cc: f64) -> CMat {
        expi(&self.v12, a) * expi(&self.v13, b) * expi(&self.v12, cc)
    }
}

/// `<row| D^S_{xi eta} |col>` for every requested (row, col) pair.
pub fn matrix_elements(
    basis: &NaturalBasis,
    s: &RepMatrices,
    xi: &CVec,
    eta: &CVec,
    pairs: &[(usize, usize)],
) -> Vec<C64> {
    assert_eq!(basis.n(), 3);
    let exps: Vec<Exponentials> = basis.irreps().iter().map(|r| Exponentials::new(r)).collect();
    let es = Exponentials::new(s);
    let located: Vec<_> = pairs.iter().map(|&(r, col)| (basis.locate(r), basis.locate(col))).collect();
    let gl = GaussLegendre::new(LEGENDRE_POINTS.try_into().unwrap());
    let step = 2.0 * PI / PERIODIC_POINTS as f64;
    let mut acc = vec![C64::new(0.0, 0.0); pairs.len()];
    for &(x, w) in gl.as_node_weight_pairs() {
        let b = 0.5 * PI * (x + 1.0);
        let wb = 0.5 * PI * w * b.sin();
        for ia in 0..PERIODIC_POINTS {
            for ic in 0..2 * PERIODIC_POINTS {
                let (a, cc) = (ia as f64 * step, ic as f64 * step);
                let rho: Vec<CMat> = exps.iter().map(|e| e.at(a, b, cc)).collect();
                let d = (xi.adjoint() * es.at(a, b, cc) * eta)[(0, 0)];
                for (slot, &((j1, k1, m1), (j0, k0, m0))) in acc.iter_mut().zip(&located) {
                    let dims = (basis.irrep(j1).dim() as f64 * basis.irrep(j0).dim() as f64).sqrt();
                    *slot += rho[j1][(k1, m1)].conj() * d * rho[j0][(k0, m0)] * c(dims * wb);
                }
            }
        }
    }
    let norm = step * step / (16.0 * PI * PI);
    acc.into_iter().map(|z| z * norm).collect()
}
