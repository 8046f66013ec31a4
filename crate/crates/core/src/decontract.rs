//! Shear generators `T_ab` of sl(n,ℝ) rebuilt from the contracted algebra:
//! the original single-term formula and the generalized formula in its
//! anticommutator, shifted and Casimir forms, plus the closed form of the
//! matrix elements.
//!
//! Every operator here has the shape `Σ_γ k_γ ⊗ G_γ(η_ab)` on each `J → J'`
//! block, where only the right factor depends on `(ab)`. A [`ShearKernel`]
//! stores the left factors.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clebsch::{cartesian_map, Cartesian};
use crate::contracted::{couplings, level_diag, tensor_coords, BlockOperator, Coupling, NaturalBasis, UOperatorSpec};
use crate::error::{Error, Result};
use crate::linalg::{c, zeros, CMat, CVec, C64, I};

/// Prefactor of `Σ_{d<c} {K_cd, U^{(cd)}}` that makes the anticommutator
/// form equal to `(i/2)[C₂(so(c)_K), U^{(cc)}]` with `K` the left action.
pub const ANTICOMMUTATOR_PREFACTOR: f64 = -1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SigmaVariant {
    /// Anticommutator and Casimir forms.
    Sigma,
    /// Shifted form with `K` to the right.
    SigmaPrime,
    /// Closed form of the matrix elements.
    SigmaTilde,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    Anticommutator,
    Shifted,
    Casimir,
}

impl Form {
    pub fn variant(self) -> SigmaVariant {
        match self {
            Form::Anticommutator | Form::Casimir => SigmaVariant::Sigma,
            Form::Shifted => SigmaVariant::SigmaPrime,
        }
    }
}

/// `values[i]` belongs to `c = i + 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaLabels {
    pub variant: SigmaVariant,
    pub values: Vec<C64>,
}

impl SigmaLabels {
    pub fn new(variant: SigmaVariant, values: Vec<C64>) -> Self {
        Self { variant, values }
    }

    pub fn zeros(n: usize, variant: SigmaVariant) -> Self {
        Self::new(variant, vec![C64::new(0.0, 0.0); n - 1])
    }

    /// Uniform in the square `[-2, 2] × [-2, 2]`.
    pub fn random(n: usize, variant: SigmaVariant, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n - 1)
            .map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        Self::new(variant, values)
    }

    pub fn n(&self) -> usize {
        self.values.len() + 1
    }

    pub fn get(&self, c: usize) -> C64 {
        self.values[c - 2]
    }

    fn check(&self, n: usize, variant: SigmaVariant) -> Result<()> {
        if self.variant != variant {
            return Err(Error::SigmaMismatch {
                given: format!("{:?}", self.variant),
                form: format!("{variant:?}"),
            });
        }
        if self.values.len() != n - 1 {
            return Err(Error::Dimension(format!("{} sigma values for n = {n}", self.values.len())));
        }
        Ok(())
    }
}

/// Lower-triangular map `σ_c = σ̃_c + Σ_{d<c} σ̃_d / d`, rows and columns
/// indexed from `c = 2`.
pub fn tilde_to_sigma_matrix(n: usize) -> Vec<Vec<Rational64>> {
    (2..=n)
        .map(|cc| {
            (2..=n)
                .map(|d| match d.cmp(&cc) {
                    std::cmp::Ordering::Less => Rational64::new(1, d as i64),
                    std::cmp::Ordering::Equal => Rational64::from_integer(1),
                    std::cmp::Ordering::Greater => Rational64::from_integer(0),
                })
                .collect()
        })
        .collect()
}

pub fn tilde_to_sigma_exact(tilde: &[Rational64]) -> Vec<Rational64> {
    let m = tilde_to_sigma_matrix(tilde.len() + 1);
    m.iter()
        .map(|row| row.iter().zip(tilde).map(|(a, b)| a * b).sum())
        .collect()
}

fn rational_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `σ′_c − σ_c` for each `c`, solved once per `n` on a small probe basis.
pub fn sigma_prime_offsets(n: usize) -> Result<Vec<C64>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<C64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&n) {
        return Ok(v.clone());
    }
    let ctx = ShearContext::new(NaturalBasis::new(n, 4, false)?)?;
    let zero = SigmaLabels::zeros(n, SigmaVariant::Sigma);
    let diff = ctx
        .kernel(&zero, Form::Anticommutator)?
        .sub(&ctx.kernel(&SigmaLabels::zeros(n, SigmaVariant::SigmaPrime), Form::Shifted)?);
    let cols: Vec<ShearKernel> = (2..=n).map(|cc| Ok(ctx.tensor_kernel(cc, cc)?.scale(I))).collect::<Result<_>>()?;
    let b = diff.flatten();
    let mut a = zeros(b.len(), n - 1);
    for (j, k) in cols.iter().enumerate() {
        a.set_column(j, &k.flatten());
    }
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::Projection(e.to_string()))?;
    let fit = (&a * &x - &b).camax();
    if fit > 1e-9 {
        return Err(Error::Projection(format!("σ′ offsets do not fit the probe (residual {fit:e})")));
    }
    // T_anti(σ) = T_shift(σ′) with σ′ = σ + x
    let v: Vec<C64> = x.iter().copied().collect();
    cache.lock().unwrap().insert(n, v.clone());
    Ok(v)
}

pub fn sigma_convert(s: &SigmaLabels, to: SigmaVariant) -> Result<SigmaLabels> {
    use SigmaVariant::*;
    let n = s.n();
    let vals = &s.values;
    let out = match (s.variant, to) {
        (a, b) if a == b => vals.clone(),
        (SigmaTilde, Sigma) => {
            let m = tilde_to_sigma_matrix(n);
            m.iter()
                .map(|row| row.iter().zip(vals).map(|(r, v)| v * rational_to_f64(*r)).sum())
                .collect()
        }
        (Sigma, SigmaTilde) => {
            let mut t: Vec<C64> = Vec::with_capacity(n - 1);
            for v in vals {
                let acc: C64 = t.iter().enumerate().map(|(j, x)| x / (j + 2) as f64).sum();
                t.push(v - acc);
            }
            t
        }
        (Sigma, SigmaPrime) => {
            let off = sigma_prime_offsets(n)?;
            vals.iter().zip(&off).map(|(v, o)| v + o).collect()
        }
        (SigmaPrime, Sigma) => {
            let off = sigma_prime_offsets(n)?;
            vals.iter().zip(&off).map(|(v, o)| v - o).collect()
        }
        (SigmaTilde, SigmaPrime) => return sigma_convert(&sigma_convert(s, Sigma)?, SigmaPrime),
        (SigmaPrime, SigmaTilde) => return sigma_convert(&sigma_convert(s, Sigma)?, SigmaTilde),
        _ => unreachable!(),
    };
    Ok(SigmaLabels::new(to, out))
}

/// Chain vector of the Spin(c−1)-invariant tensor
/// `diag(−1, …, −1, c−1, 0, …, 0) / √(c(c−1))`.
pub fn special_vector(n: usize, cc: usize) -> Result<CVec> {
    if !(2..=n).contains(&cc) {
        return Err(Error::IndexOutOfRange { a: cc, b: cc, n });
    }
    let mut x = zeros(n, n);
    for a in 0..cc - 1 {
        x[(a, a)] = c(-1.0);
    }
    x[(cc - 1, cc - 1)] = c(cc as f64 - 1.0);
    let x = x / c(((cc * (cc - 1)) as f64).sqrt());
    Ok(cartesian_map(n, Cartesian::Symmetric)?.to_chain(&x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginalFormulaParams {
    pub sigma: C64,
    pub alpha: f64,
}

/// Basis plus its symmetric rank-2 couplings.
pub struct ShearContext {
    pub basis: Arc<NaturalBasis>,
    pub couplings: Vec<Coupling>,
    slots: Vec<(usize, usize)>,
    diags: Vec<Vec<CMat>>,
    left: HashMap<(usize, usize, usize), CMat>,
}

/// Left factors `k_γ` of `Σ_γ k_γ ⊗ G_γ(η)`, one per `(coupling, γ)`.
#[derive(Clone, Debug)]
pub struct ShearKernel {
    pub parts: Vec<CMat>,
}

impl ShearKernel {
    pub fn add(&self, o: &Self) -> Self {
        Self {
            parts: self.parts.iter().zip(&o.parts).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(c(-1.0)))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            parts: self.parts.iter().map(|a| a * z).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.parts.iter().map(|a| a.camax()).fold(0.0, f64::max)
    }

    fn flatten(&self) -> CVec {
        CVec::from_iterator(
            self.parts.iter().map(|p| p.len()).sum(),
            self.parts.iter().flat_map(|p| p.iter().copied()),
        )
    }
}

impl ShearContext {
    pub fn new(basis: Arc<NaturalBasis>) -> Result<Self> {
        let cps = couplings(&basis)?;
        let slots = cps
            .iter()
            .enumerate()
            .flat_map(|(i, cp)| (0..cp.tables.len()).map(move |g| (i, g)))
            .collect();
        let n = basis.n();
        let diags = basis
            .irreps()
            .iter()
            .map(|r| (0..=n).map(|lv| if lv < 2 { zeros(0, 0) } else { level_diag(r, lv) }).collect())
            .collect();
        let mut left = HashMap::new();
        for (j, r) in basis.irreps().iter().enumerate() {
            for a in 1..=n {
                for b in 1..=n {
                    if a != b {
                        left.insert((j, a, b), -r.generator(a, b).transpose());
                    }
                }
            }
        }
        Ok(Self {
            basis,
            couplings: cps,
            slots,
            diags,
            left,
        })
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    /// `(coupling, γ)` for each kernel part.
    pub fn slots(&self) -> &[(usize, usize)] {
        &self.slots
    }

    /// `K_ab` on the left label of irrep `j`: `−ρ_J(M_ab)ᵀ`.
    pub fn kappa(&self, j: usize, a: usize, b: usize) -> &CMat {
        &self.left[&(j, a, b)]
    }

    /// Diagonal `C₂(so(c))` over the chain labels of irrep `j`.
    pub fn level_casimir(&self, j: usize, cc: usize) -> &CMat {
        &self.diags[j][cc]
    }

    fn build<F>(&self, f: F) -> Result<ShearKernel>
    where
        F: Fn(&Coupling, usize) -> Result<CMat> + Sync,
    {
        let parts = self
            .slots
            .par_iter()
            .map(|&(i, g)| f(&self.couplings[i], g))
            .collect::<Result<_>>()?;
        Ok(ShearKernel { parts })
    }

    /// `√(dJ/dJ') conj(G_γ(ξ))`.
    fn upper(cp: &Coupling, g: usize, xi: &CVec) -> CMat {
        cp.g(g, xi).map(|z| z.conj()) * c(cp.ratio)
    }

    /// Kernel of `U^{(cd)}`.
    pub fn tensor_kernel(&self, cc: usize, d: usize) -> Result<ShearKernel> {
        let xi = tensor_coords(self.n(), cc, d)?;
        self.build(|cp, g| Ok(Self::upper(cp, g, &xi)))
    }

    /// Kernel of `U` with an arbitrary upper vector and scale.
    pub fn vector_kernel(&self, xi: &CVec, scale: f64) -> Result<ShearKernel> {
        self.build(|cp, g| Ok(Self::upper(cp, g, xi) * c(scale)))
    }

    /// `T^{[c]}` in the given form.
    pub fn component_kernel(&self, cc: usize, sigma: C64, form: Form) -> Result<ShearKernel> {
        let n = self.n();
        if !(2..=n).contains(&cc) {
            return Err(Error::IndexOutOfRange { a: cc, b: cc, n });
        }
        let xcc = tensor_coords(n, cc, cc)?;
        let xs: Vec<CVec> = (1..cc).map(|d| tensor_coords(n, cc, d)).collect::<Result<_>>()?;
        let lam = c(ANTICOMMUTATOR_PREFACTOR);
        self.build(|cp, g| {
            let kcc = Self::upper(cp, g, &xcc);
            let mut k = &kcc * (I * sigma);
            match form {
                Form::Casimir => {
                    let (dr, dc) = (&self.diags[cp.row][cc], &self.diags[cp.col][cc]);
                    k += (dr * &kcc - &kcc * dc) * (I * 0.5);
                }
                Form::Anticommutator => {
                    for (i, xi) in xs.iter().enumerate() {
                        let kcd = Self::upper(cp, g, xi);
                        let d = i + 1;
                        k += (self.kappa(cp.row, cc, d) * &kcd + &kcd * self.kappa(cp.col, cc, d)) * lam;
                    }
                }
                Form::Shifted => {
                    for (i, xi) in xs.iter().enumerate() {
                        let kcd = Self::upper(cp, g, xi);
                        k += &kcd * self.kappa(cp.col, cc, i + 1) * (lam * 2.0);
                    }
                }
            }
            Ok(k)
        })
    }

    /// `Σ_c T^{[c]}`.
    pub fn kernel(&self, sigmas: &SigmaLabels, form: Form) -> Result<ShearKernel> {
        sigmas.check(self.n(), form.variant())?;
        let mut acc: Option<ShearKernel> = None;
        for cc in 2..=self.n() {
            let k = self.component_kernel(cc, sigmas.get(cc), form)?;
            acc = Some(match acc {
                Some(a) => a.add(&k),
                None => k,
            });
        }
        Ok(acc.expect("n ≥ 3"))
    }

    /// `Σ_c √((c−1)/c) [(i/2)(C₂(so(c))_{k'} − C₂(so(c))_k) + i σ̃_c] C(J k; s_c | J' k')`.
    pub fn matrix_element_kernel(&self, sigmas: &SigmaLabels) -> Result<ShearKernel> {
        let n = self.n();
        sigmas.check(n, SigmaVariant::SigmaTilde)?;
        let sv: Vec<CVec> = (2..=n).map(|cc| special_vector(n, cc)).collect::<Result<_>>()?;
        self.build(|cp, g| {
            let mut k = zeros(self.basis.irrep(cp.row).dim(), self.basis.irrep(cp.col).dim());
            for cc in 2..=n {
                let ks = Self::upper(cp, g, &sv[cc - 2]);
                let (dr, dc) = (&self.diags[cp.row][cc], &self.diags[cp.col][cc]);
                let w = ((cc as f64 - 1.0) / cc as f64).sqrt();
                k += ((dr * &ks - &ks * dc) * (I * 0.5) + &ks * (I * sigmas.get(cc))) * c(w);
            }
            Ok(k)
        })
    }

    /// `iα[C₂(so(n)), U] + σU` with `U = |u| D_{v(ab)}`.
    pub fn original_kernel(&self, params: &OriginalFormulaParams, spec: &UOperatorSpec) -> Result<ShearKernel> {
        self.build(|cp, g| {
            let k = Self::upper(cp, g, &spec.v) * c(spec.norm);
            let dc2 = self.basis.irrep(cp.row).hw().casimir2() - self.basis.irrep(cp.col).hw().casimir2();
            Ok(k * (I * (params.alpha * dc2) + params.sigma))
        })
    }

    /// Operator `Σ_γ k_γ ⊗ G_γ(η)`.
    pub fn apply(&self, kernel: &ShearKernel, eta: &CVec) -> BlockOperator {
        let mut op = BlockOperator::zero(&self.basis);
        for (k, &(i, g)) in kernel.parts.iter().zip(&self.slots) {
            let cp = &self.couplings[i];
            op.push(cp.row, cp.col, k.clone(), cp.g(g, eta));
        }
        op
    }

    /// Operator with lower index `(ab)`.
    pub fn at(&self, kernel: &ShearKernel, a: usize, b: usize) -> Result<BlockOperator> {
        Ok(self.apply(kernel, &tensor_coords(self.n(), a, b)?))
    }

    /// Conjugate by a left rotation `exp(iθK_ab)`.
    pub fn rotate_left(&self, kernel: &ShearKernel, a: usize, b: usize, theta: f64) -> ShearKernel {
        let rots: Vec<CMat> = (0..self.basis.irreps().len())
            .map(|j| crate::linalg::expi_hermitian(self.kappa(j, a, b), theta))
            .collect();
        ShearKernel {
            parts: kernel
                .parts
                .iter()
                .zip(&self.slots)
                .map(|(k, &(i, _))| {
                    let cp = &self.couplings[i];
                    &rots[cp.row] * k * rots[cp.col].adjoint()
                })
                .collect(),
        }
    }
}

pub fn t_original(ctx: &ShearContext, params: &OriginalFormulaParams, spec: &UOperatorSpec, a: usize, b: usize) -> Result<BlockOperator> {
    ctx.at(&ctx.original_kernel(params, spec)?, a, b)
}

pub fn t_component(ctx: &ShearContext, cc: usize, sigma: C64, a: usize, b: usize, form: Form) -> Result<BlockOperator> {
    ctx.at(&ctx.component_kernel(cc, sigma, form)?, a, b)
}

pub fn t_generalized(ctx: &ShearContext, sigmas: &SigmaLabels, a: usize, b: usize, form: Form) -> Result<BlockOperator> {
    ctx.at(&ctx.kernel(sigmas, form)?, a, b)
}

/// Matrix elements for a lower index `w` given as a chain vector.
pub fn t_matrix_elements(ctx: &ShearContext, sigmas: &SigmaLabels, w: &CVec) -> Result<BlockOperator> {
    Ok(ctx.apply(&ctx.matrix_element_kernel(sigmas)?, w))
}

pub fn t_su_variant(ctx: &ShearContext, sigmas: &SigmaLabels, a: usize, b: usize, form: Form) -> Result<BlockOperator> {
    Ok(t_generalized(ctx, sigmas, a, b, form)?.scale(I))
}
