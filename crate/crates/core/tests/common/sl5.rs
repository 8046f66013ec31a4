//! Independent evaluation of the displayed sl(5,R) component formula.
//!
//! The display is written in su(2)+su(2) labels of so(4). The symmetric
//! tensor states |mu1,mu2> are built here from scratch by the adjoint action
//! of the two su(2) factors on 5x5 matrices; nothing is shared with the
//! library's chain construction except the final Cartesian-to-chain map.

use num_complex::Complex64 as C64;
use slrep_core::algebra::defining_m;
use slrep_core::clebsch::{cartesian_map, Cartesian};
use slrep_core::decontract::{ShearContext, ShearKernel, SigmaLabels, SigmaVariant};
use slrep_core::linalg::{c, eye, max_abs_diff, null_space, zeros, CMat, I};

/// Axis order under which the display's su(2)+su(2) split lines up with the
/// library chain. The display fixes the split only up to orientation of the
/// so(4) factor, and the chain orientation corresponds to x3 <-> x4.
pub const AXES: [usize; 5] = [1, 2, 4, 3, 5];

#[derive(Clone, Copy, Debug)]
pub struct DisplayParams {
    pub sigma1: C64,
    pub sigma2: C64,
    pub delta1: C64,
    pub delta2: C64,
}

fn ad(m: &CMat, x: &CMat) -> CMat {
    m * x - x * m
}

struct Su2Pair {
    a: [CMat; 3],
    b: [CMat; 3],
}

fn su2_pair() -> Su2Pair {
    let mm = |i: usize, j: usize| defining_m(5, AXES[i - 1], AXES[j - 1]);
    let h = c(0.5);
    Su2Pair {
        a: [(mm(2, 3) + mm(1, 4)) * h, (mm(3, 1) + mm(2, 4)) * h, (mm(1, 2) + mm(3, 4)) * h],
        b: [(mm(2, 3) - mm(1, 4)) * h, (mm(3, 1) - mm(2, 4)) * h, (mm(1, 2) - mm(3, 4)) * h],
    }
}

/// Traceless symmetric states in the order (1,1), (1,-1), (-1,1), (-1,-1),
/// the so(4) scalar (0,0) inside the 4x4 block, and the so(4)-scalar
/// diag(-1,-1,-1,-1,4)/sqrt(20).
pub fn states() -> Vec<CMat> {
    let p = su2_pair();
    let raise = |s: &[CMat; 3]| &s[0] + &s[1] * I;
    let lower = |s: &[CMat; 3]| &s[0] - &s[1] * I;
    let (ap, bp, am, bm) = (raise(&p.a), raise(&p.b), lower(&p.a), lower(&p.b));

    // highest (1,1) state: symmetric on the first four axes
    let mut space = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            let mut x = zeros(5, 5);
            x[(AXES[i] - 1, AXES[j] - 1)] = c(1.0);
            x[(AXES[j] - 1, AXES[i] - 1)] = c(1.0);
            space.push(x);
        }
    }
    let mut sys = zeros(100, space.len());
    for (k, x) in space.iter().enumerate() {
        let eqs = [ad(&ap, x), ad(&bp, x), ad(&p.a[2], x) - x, ad(&p.b[2], x) - x];
        for (q, y) in eqs.iter().enumerate() {
            for (r, z) in y.iter().enumerate() {
                sys[(25 * q + r, k)] = *z;
            }
        }
    }
    let ns = null_space(&sys, 1e-10);
    assert_eq!(ns.ncols(), 1, "highest state of (1,1) is unique");
    let mut hw = zeros(5, 5);
    for (k, x) in space.iter().enumerate() {
        hw += x * ns[(k, 0)];
    }
    hw /= c(hw.norm());

    let mut out = Vec::new();
    for (m1, m2) in [(1, 1), (1, -1), (-1, 1), (-1, -1), (0, 0)] {
        let mut y = hw.clone();
        for _ in 0..(1 - m1) {
            y = ad(&am, &y);
        }
        for _ in 0..(1 - m2) {
            y = ad(&bm, &y);
        }
        y /= c(y.norm());
        assert!(max_abs_diff(&ad(&p.a[2], &y), &(&y * c(m1 as f64))) < 1e-12);
        assert!(max_abs_diff(&ad(&p.b[2], &y), &(&y * c(m2 as f64))) < 1e-12);
        out.push(y);
    }
    let mut s = eye(5) * c(-1.0);
    s[(4, 4)] = c(4.0);
    out.push(s / c(20f64.sqrt()));
    out
}

/// Kernel of the displayed expression with the given parameters.
pub fn display_kernel(ctx: &ShearContext, p: DisplayParams) -> ShearKernel {
    let map = cartesian_map(5, Cartesian::Symmetric).unwrap();
    let ups: Vec<ShearKernel> = states()
        .iter()
        .map(|x| ctx.vector_kernel(&map.to_chain(x), 1.0).unwrap())
        .collect();
    let (u11, u1m, um1, umm, u00, us) = (&ups[0], &ups[1], &ups[2], &ups[3], &ups[4], &ups[5]);
    let ax = |i: usize| AXES[i - 1];
    let parts = ctx
        .slots()
        .iter()
        .enumerate()
        .map(|(i, &(ci, _))| {
            let cp = &ctx.couplings[ci];
            let (r, j) = (cp.row, cp.col);
            let k12 = ctx.kappa(j, ax(1), ax(2));
            let k34 = ctx.kappa(j, ax(3), ax(4));
            let k10 = (k12 + k34) * c(0.5);
            let k01 = (k12 - k34) * c(0.5);
            let id = eye(k10.nrows());
            let comm = |u: &CMat, level: usize| ctx.level_casimir(r, level) * u - u * ctx.level_casimir(j, level);
            let first = &us.parts[i] * p.sigma1 + comm(&us.parts[i], 5) * (I * c(0.2f64.sqrt()));
            let bracket = &u00.parts[i] * p.sigma2 + comm(&u00.parts[i], 4) * c(0.5)
                - &u1m.parts[i] * (&id * p.delta1 + &k10 - &k01)
                - &um1.parts[i] * (&id * p.delta1 - &k10 + &k01)
                + &u11.parts[i] * (&id * p.delta2 + &k10 + &k01)
                + &umm.parts[i] * (&id * p.delta2 - &k10 - &k01);
            first + bracket * I
        })
        .collect();
    ShearKernel { parts }
}

/// Labels sigma_2..sigma_5 of the general formula (anticommutator form)
/// reproducing the display. Obtained by a linear fit on the n=5, cutoff 3
/// basis; the fit residual there is 2e-13.
pub fn general_sigmas(p: DisplayParams) -> SigmaLabels {
    let h = |x: f64| c(x);
    let base = [h(-2.0), h(0.0), h(-2.0), h(-1.0)];
    let s1 = [h(0.0), h(0.0), h(0.0), -I * c(5f64.sqrt() / 2.0)];
    let s2 = [h(0.0), h(1.0), h(1.0), h(0.5)];
    let d1 = [h(0.0), h(1.0), h(-1.0), h(0.0)];
    let d2 = [h(-2.0), h(-1.0), h(-1.0), h(-1.0)];
    let values = (0..4)
        .map(|k| base[k] + s1[k] * p.sigma1 + s2[k] * p.sigma2 + d1[k] * p.delta1 + d2[k] * p.delta2)
        .collect();
    SigmaLabels::new(SigmaVariant::Sigma, values)
}
