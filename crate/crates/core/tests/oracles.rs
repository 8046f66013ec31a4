mod common;

use common::{haar, sl5};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slrep_core::contracted::{couplings, u_general, NaturalBasis};
use slrep_core::decontract::{Form, ShearContext};
use slrep_core::irreps::build_rep;
use slrep_core::labels::HighestWeight;
use slrep_core::linalg::{c, CVec};

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> CVec {
    let v = CVec::from_fn(d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let nrm = v.norm();
    v / c(nrm)
}

#[test]
fn haar_quadrature_reproduces_cg_product_spinorial() {
    let basis = NaturalBasis::new(3, 3, true).unwrap();
    let s = build_rep(&HighestWeight::symmetric(3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let xi = unit_vector(&mut rng, s.dim());
    let eta = unit_vector(&mut rng, s.dim());
    let op = u_general(&basis, &couplings(&basis).unwrap(), &xi, &eta, 1.0).to_dense();
    let pairs: Vec<(usize, usize)> = (0..basis.dim()).flat_map(|r| (0..basis.dim()).map(move |q| (r, q))).collect();
    let quad = haar::matrix_elements(&basis, &s, &xi, &eta, &pairs);
    let worst = pairs.iter().zip(&quad).map(|(&(r, q), z)| (op[(r, q)] - z).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn sl5_display_matches_on_larger_basis() {
    let ctx = ShearContext::new(NaturalBasis::new(5, 6, false).unwrap()).unwrap();
    let p = sl5::DisplayParams {
        sigma1: C64::new(0.3, -0.7),
        sigma2: C64::new(-1.1, 0.4),
        delta1: C64::new(0.8, 0.25),
        delta2: C64::new(-0.35, -1.3),
    };
    let display = sl5::display_kernel(&ctx, p);
    let general = ctx.kernel(&sl5::general_sigmas(p), Form::Anticommutator).unwrap();
    let diff = display.sub(&general).max_abs();
    assert!(diff < 1e-9, "{diff:e}");
}
