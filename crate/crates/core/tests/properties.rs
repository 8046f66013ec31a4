use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slrep_core::algebra::{
    commutator_mm, commutator_mt, commutator_tm, commutator_tt, defining_m, defining_t, m_pairs, t_pairs, Algebra,
    CommutatorExpansion, GeneratorIndex, Kind,
};
use slrep_core::clebsch::{cg_tables, decompose_product};
use slrep_core::contracted::{couplings, k_left, m_right, u_op, NaturalBasis, UOperatorSpec};
use slrep_core::decontract::{sigma_convert, Form, ShearContext, SigmaLabels, SigmaVariant};
use slrep_core::irreps::{build_rep, dim_irrep};
use slrep_core::labels::HighestWeight;
use slrep_core::linalg::{eye, kron, max_abs, max_abs_diff, CMat, C64};
use slrep_core::verify::{check_closure, closure_residual};

fn algebra() -> impl Strategy<Value = Algebra> {
    prop_oneof![Just(Algebra::Sl), Just(Algebra::Su)]
}

fn bracket(n: usize, x: GeneratorIndex, y: GeneratorIndex, alg: Algebra) -> CommutatorExpansion {
    let (a, b, c, d) = (x.a, x.b, y.a, y.b);
    match (x.kind, y.kind) {
        (Kind::M, Kind::M) => commutator_mm(n, a, b, c, d),
        (Kind::M, Kind::T) => commutator_mt(n, a, b, c, d),
        (Kind::T, Kind::M) => commutator_tm(n, a, b, c, d),
        (Kind::T, Kind::T) => commutator_tt(n, a, b, c, d, alg),
    }
    .unwrap()
}

fn generators(n: usize) -> Vec<GeneratorIndex> {
    let ms = m_pairs(n).into_iter().map(|(a, b)| GeneratorIndex { kind: Kind::M, a, b });
    let ts = t_pairs(n).into_iter().map(|(a, b)| GeneratorIndex { kind: Kind::T, a, b });
    ms.chain(ts).collect()
}

fn defining(n: usize, g: GeneratorIndex, alg: Algebra) -> CMat {
    match g.kind {
        Kind::M => defining_m(n, g.a, g.b),
        Kind::T => defining_t(n, g.a, g.b, alg),
    }
}

fn generator_strategy() -> impl Strategy<Value = (usize, GeneratorIndex, GeneratorIndex, GeneratorIndex)> {
    (3usize..=6).prop_flat_map(|n| {
        let g = generators(n);
        let k = g.len();
        (Just(n), 0..k, 0..k, 0..k).prop_map(move |(n, i, j, l)| (n, g[i], g[j], g[l]))
    })
}

fn small_irrep(max_dim: usize) -> impl Strategy<Value = HighestWeight> {
    let mut all = Vec::new();
    for n in 3..=6 {
        for spin in [false, true] {
            if spin && n > 4 {
                continue;
            }
            all.extend(HighestWeight::enumerate(n, 6, spin).into_iter().filter(|h| h.dim() <= max_dim));
        }
    }
    proptest::sample::select(all)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn commutators_are_antisymmetric((n, x, y, _) in generator_strategy(), alg in algebra()) {
        let xy = bracket(n, x, y, alg);
        let yx = bracket(n, y, x, alg).scale(C64::new(-1.0, 0.0));
        prop_assert_eq!(xy.terms.len(), yx.terms.len());
        for ((u, g), (v, h)) in xy.terms.iter().zip(&yx.terms) {
            prop_assert_eq!(g, h);
            prop_assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn expansions_match_defining_matrices((n, x, y, _) in generator_strategy(), alg in algebra()) {
        let (mx, my) = (defining(n, x, alg), defining(n, y, alg));
        let direct = &mx * &my - &my * &mx;
        let expanded = bracket(n, x, y, alg).evaluate(n, |g| defining(n, g, alg));
        prop_assert!(max_abs_diff(&direct, &expanded) < 1e-12);
    }

    #[test]
    fn jacobi_identity((n, x, y, z) in generator_strategy(), alg in algebra()) {
        let mut acc: BTreeMap<GeneratorIndex, C64> = BTreeMap::new();
        for (p, q, r) in [(x, y, z), (y, z, x), (z, x, y)] {
            for &(coef, g) in &bracket(n, p, q, alg).terms {
                for &(c2, h) in &bracket(n, g, r, alg).terms {
                    *acc.entry(h).or_default() += coef * c2;
                }
            }
        }
        let worst = acc.values().fold(0.0f64, |w, v| w.max(v.norm()));
        prop_assert!(worst < 1e-12, "{worst:e}");
    }

    #[test]
    fn dimension_is_sum_over_branching(hw in small_irrep(200)) {
        let total: usize = hw.branch().unwrap().iter().map(dim_irrep).sum();
        prop_assert_eq!(dim_irrep(&hw), total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn representations_close_and_chain_casimirs_agree(hw in small_irrep(40)) {
        let n = hw.n();
        let r = build_rep(&hw).unwrap();
        let d = r.dim();
        for (a, b) in m_pairs(n) {
            for (c, e) in m_pairs(n) {
                let (x, y) = (r.generator(a, b), r.generator(c, e));
                let rhs = commutator_mm(n, a, b, c, e).unwrap().evaluate(d, |g| r.generator(g.a, g.b));
                prop_assert!(max_abs_diff(&(&x * &y - &y * &x), &rhs) < 1e-10);
            }
        }
        for level in 2..=n {
            let cas = r.casimir_level(level);
            for (i, label) in r.labels().iter().enumerate() {
                let expect = label.casimirs().unwrap()[level - 2];
                prop_assert!((cas[(i, i)].re - expect).abs() < 1e-9);
            }
            let diag = CMat::from_diagonal(&cas.diagonal());
            prop_assert!(max_abs_diff(&cas, &diag) < 1e-9);
        }
        prop_assert!(max_abs_diff(&r.casimir(), &(eye(d) * C64::new(hw.casimir2(), 0.0))) < 1e-10);
    }

    #[test]
    fn cg_tables_are_unitary_equivariant_intertwiners(hw in small_irrep(30), sym in any::<bool>()) {
        let n = hw.n();
        let other = if sym { HighestWeight::symmetric(n) } else { HighestWeight::vector(n) };
        let (r1, r2) = (build_rep(&hw).unwrap(), build_rep(&other).unwrap());
        let (d1, d2) = (r1.dim(), r2.dim());
        let mut stacked: Vec<CMat> = Vec::new();
        for (h3, mult) in decompose_product(&hw, &other).unwrap() {
            let r3 = build_rep(&h3).unwrap();
            let tables = cg_tables(&hw, &other, &h3).unwrap();
            prop_assert_eq!(tables.len(), mult);
            for t in tables.iter() {
                for (a, b) in m_pairs(n) {
                    let prod = kron(&r1.generator(a, b), &eye(d2)) + kron(&eye(d1), &r2.generator(a, b));
                    prop_assert!(max_abs_diff(&(&prod * &t.matrix), &(&t.matrix * r3.generator(a, b))) < 1e-9);
                }
            }
            for (i, s) in tables.iter().enumerate() {
                for u in tables.iter().skip(i + 1) {
                    prop_assert!(max_abs(&(s.matrix.adjoint() * &u.matrix)) < 1e-10);
                }
            }
            stacked.extend(tables.iter().map(|t| t.matrix.clone()));
        }
        let mut completeness = CMat::zeros(d1 * d2, d1 * d2);
        for v in &stacked {
            completeness += v * v.adjoint();
        }
        prop_assert!(max_abs_diff(&completeness, &eye(d1 * d2)) < 1e-10);
    }

    #[test]
    fn basis_indexing_is_a_bijection(n in 3usize..=5, half in 0i32..3, spin in any::<bool>()) {
        let spin = spin && n <= 4;
        let cut = 2 * half + spin as i32;
        let basis = NaturalBasis::new(n, cut, spin).unwrap();
        let vecs = basis.vectors();
        prop_assert_eq!(vecs.len(), basis.dim());
        for idx in 0..basis.dim() {
            let (j, k, m) = basis.locate(idx);
            prop_assert_eq!(basis.index(j, k, m), idx);
            let r = basis.irrep(j);
            prop_assert_eq!(&vecs[idx].0, r.hw());
            prop_assert_eq!(&vecs[idx].1, &r.labels()[k]);
            prop_assert_eq!(&vecs[idx].2, &r.labels()[m]);
        }
        let mut sorted = vecs.clone();
        sorted.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        prop_assert_eq!(sorted, vecs);
    }

    #[test]
    fn u_respects_selection_rule(n in 3usize..=4, half in 1i32..3, spin in any::<bool>(), ab in 0usize..6) {
        let basis = NaturalBasis::new(n, 2 * half + spin as i32, spin).unwrap();
        let sym = HighestWeight::symmetric(n);
        let blocks = basis.irreps().len();
        let mut allowed = vec![vec![false; blocks]; blocks];
        for (jc, row) in allowed.iter_mut().enumerate() {
            for (h, _) in decompose_product(basis.irrep(jc).hw(), &sym).unwrap() {
                if let Some(jr) = (0..blocks).find(|&j| basis.irrep(j).hw() == &h) {
                    row[jr] = true;
                }
            }
        }
        let cps = couplings(&basis).unwrap();
        let (a, b) = t_pairs(n)[ab % t_pairs(n).len()];
        let u = u_op(&basis, &cps, &UOperatorSpec::default_for(n).unwrap(), a, b).unwrap().to_dense();
        for row in 0..basis.dim() {
            for col in 0..basis.dim() {
                let (jr, _, _) = basis.locate(row);
                let (jc, _, _) = basis.locate(col);
                if !allowed[jc][jr] {
                    prop_assert!(u[(row, col)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn left_and_right_actions_commute(n in 3usize..=4, half in 0i32..3, spin in any::<bool>()) {
        let basis = NaturalBasis::new(n, 2 * half + spin as i32, spin).unwrap();
        for (a, b) in m_pairs(n) {
            for (c, d) in m_pairs(n) {
                let r = k_left(&basis, a, b).commutator_on(&m_right(&basis, c, d), None).max_abs_on(None).0;
                prop_assert!(r < 1e-12);
            }
        }
    }

    #[test]
    fn sigma_conversions_round_trip(n in 3usize..=6, seed in any::<u64>(), from in 0usize..3, to in 0usize..3) {
        let variants = [SigmaVariant::Sigma, SigmaVariant::SigmaPrime, SigmaVariant::SigmaTilde];
        let s = SigmaLabels::random(n, variants[from], seed);
        let there = sigma_convert(&s, variants[to]).unwrap();
        prop_assert_eq!(there.variant, variants[to]);
        let back = sigma_convert(&there, variants[from]).unwrap();
        for (x, y) in s.values.iter().zip(&back.values) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn closure_for_random_sigma(seed in any::<u64>(), spin in any::<bool>(), alg in algebra()) {
        let cut = if spin { 7 } else { 8 };
        let s = SigmaLabels::random(3, SigmaVariant::SigmaTilde, seed);
        let r = check_closure(3, cut, spin, &s, 1e-9, alg).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn generators_transform_as_tensors(seed in any::<u64>(), n in 3usize..=4) {
        let basis = NaturalBasis::new(n, 4, false).unwrap();
        let ctx = ShearContext::new(basis.clone()).unwrap();
        let s = SigmaLabels::random(n, SigmaVariant::Sigma, seed);
        let kernel = ctx.kernel(&s, Form::Casimir).unwrap();
        let tp = t_pairs(n);
        let ts: Vec<_> = tp.iter().map(|&(a, b)| ctx.at(&kernel, a, b).unwrap()).collect();
        for (a, b) in m_pairs(n) {
            let m = m_right(&basis, a, b);
            for (j, &(c, d)) in tp.iter().enumerate() {
                let mut rhs = slrep_core::contracted::BlockOperator::zero(&basis);
                for &(z, g) in &commutator_mt(n, a, b, c, d).unwrap().terms {
                    rhs = rhs.add(&ts[tp.iter().position(|&p| p == (g.a, g.b)).unwrap()].scale(z));
                }
                let r = m.commutator_on(&ts[j], None).sub(&rhs).max_abs_on(None).0;
                prop_assert!(r < 1e-10, "{r:e}");
            }
        }
    }

    #[test]
    fn components_commute_crosswise(seed in any::<u64>(), n in 3usize..=4) {
        let basis = NaturalBasis::new(n, 6, false).unwrap();
        let inner = basis.interior_irreps(1);
        let ctx = ShearContext::new(basis).unwrap();
        let s = SigmaLabels::random(n, SigmaVariant::Sigma, seed);
        let tp = t_pairs(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in 2..=n {
            for d in 2..=n {
                if c == d {
                    continue;
                }
                let kc = ctx.component_kernel(c, s.get(c), Form::Casimir).unwrap();
                let kd = ctx.component_kernel(d, s.get(d), Form::Casimir).unwrap();
                let (i, j) = (rng.gen_range(0..tp.len()), rng.gen_range(0..tp.len()));
                let (ab, ab2) = (tp[i], tp[j]);
                let lhs = ctx.at(&kc, ab.0, ab.1).unwrap().commutator_on(&ctx.at(&kd, ab2.0, ab2.1).unwrap(), Some(&inner));
                let rhs = ctx.at(&kc, ab2.0, ab2.1).unwrap().commutator_on(&ctx.at(&kd, ab.0, ab.1).unwrap(), Some(&inner));
                let r = lhs.sub(&rhs).max_abs_on(Some(&inner)).0;
                prop_assert!(r < 1e-9, "c={c} d={d} {ab:?} {ab2:?}: {r:e}");
            }
        }
    }

    #[test]
    fn left_rotations_preserve_closure(seed in any::<u64>(), theta in -3.0f64..3.0, pair in 0usize..3) {
        let basis = NaturalBasis::new(3, 8, false).unwrap();
        let ctx = ShearContext::new(basis.clone()).unwrap();
        let s = SigmaLabels::random(3, SigmaVariant::Sigma, seed);
        let (a, b) = m_pairs(3)[pair];
        let kernel = ctx.rotate_left(&ctx.kernel(&s, Form::Casimir).unwrap(), a, b, theta);
        let ts: Vec<_> = t_pairs(3).iter().map(|&(p, q)| ctx.at(&kernel, p, q).unwrap()).collect();
        let (r, _) = closure_residual(&basis, &ts, Algebra::Sl, &|_| true).unwrap();
        prop_assert!(r < 1e-9, "{r:e}");
    }

    #[test]
    fn reports_are_deterministic(seed in any::<u64>()) {
        let s = SigmaLabels::random(3, SigmaVariant::SigmaTilde, seed);
        let a = check_closure(3, 6, false, &s, 1e-9, Algebra::Sl).unwrap();
        let b = check_closure(3, 6, false, &s, 1e-9, Algebra::Sl).unwrap();
        prop_assert_eq!(a.json_line(), b.json_line());
    }
}
