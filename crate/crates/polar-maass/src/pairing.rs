//! Cusp forms, the pairing of cusp forms with polar harmonic forms through
//! principal parts, and meromorphy certificates.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::cusp_form_elliptic_coeffs;
use crate::arith::{self, ArithError, Cusp, Mat2};
use crate::numeric::{e, ComplexSum, C64};
use crate::poincarebasis::{
    d_operator, omega, y_form_coeffs, BasisError, FourierExpansion, PrincipalPartSpec, TermSum,
};
use crate::specialfn::{eta, eta_product_coeffs};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairingError {
    #[error("no cusp form data shipped for level {0}")]
    UnsupportedLevel(u64),
    #[error("weight 2 - 2k with k = {0} is not supported here")]
    UnsupportedWeight(u32),
    #[error("missing expansion: {0}")]
    MissingExpansion(String),
    #[error("sample budget {samples} below the minimum {min}")]
    BudgetTooSmall { samples: usize, min: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

type Result<T> = std::result::Result<T, PairingError>;

/// A weight `2k` cusp form on Gamma0(N) given by its Fourier coefficients
/// at every cusp and, optionally, as an eta quotient.
///
/// At a cusp with expansion matrix `L` and width `l`,
/// `(g|L)(w) = j(L, w)^{-2k} g(L w) = sum_{n >= 1} a(n) e(n w / l)`,
/// stored with `coeffs[n] = a(n)` (`coeffs[0] = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspFormData {
    pub name: String,
    pub level: u64,
    pub weight: u32,
    pub expansions: Vec<(Cusp, Vec<C64>)>,
    /// `(delta, r)` factors of `prod eta(delta z)^r`, empty if not an eta quotient.
    pub eta_factors: Vec<(u64, i32)>,
}

impl CuspFormData {
    /// Coefficients at `cusp`.
    pub fn coeffs(&self, cusp: &Cusp) -> Option<&[C64]> {
        self.expansions.iter().find(|(c, _)| c == cusp).map(|(_, v)| v.as_slice())
    }

    /// Coefficients at infinity.
    pub fn q_coeffs(&self) -> &[C64] {
        self.coeffs(&Cusp::infinity(self.level)).unwrap_or(&[])
    }

    /// Coefficient `a(n)` at `cusp` (zero beyond the stored range).
    pub fn coeff(&self, cusp: &Cusp, n: i64) -> Result<C64> {
        let c = self
            .coeffs(cusp)
            .ok_or_else(|| PairingError::MissingExpansion(format!("{} at cusp {}", self.name, cusp.label())))?;
        Ok(if n < 0 { C64::default() } else { c.get(n as usize).copied().unwrap_or_default() })
    }

    /// `(g|M)(w)` for `M` in SL2(Z), from the expansion at the cusp `M infinity`.
    pub fn slash(&self, m: &Mat2, w: C64) -> Result<C64> {
        for (cusp, coeffs) in &self.expansions {
            let l = cusp.expansion_matrix();
            let li = l.inverse();
            for t in 0..cusp.width as i64 {
                let a = m.mul(&Mat2::translation(-t)).mul(&li);
                if a.in_gamma0(self.level) {
                    let u = (w + t as f64) / cusp.width as f64;
                    return Ok(q_series(coeffs, u));
                }
            }
        }
        Err(PairingError::MissingExpansion(format!("{} at the cusp {m} infinity", self.name)))
    }

    /// `g(z)`: as an eta quotient when available, otherwise from the
    /// expansion at the cusp nearest to `z`.
    pub fn evaluate(&self, z: C64) -> Result<C64> {
        if !self.eta_factors.is_empty() {
            return Ok(self.eta_factors.iter().map(|&(d, r)| eta(z * d as f64).powi(r)).product());
        }
        let (w, b) = arith::reduce_to_fundamental_domain(z);
        Ok(b.j(w).powi(self.weight as i32) * self.slash(&b, w)?)
    }

    /// Elliptic coefficients `a_{g,tau}(n)`, `0 <= n <= n_max`: the Taylor
    /// coefficients of `g(z) (z - conj tau)^{2k}` in `X_tau(z)`.
    pub fn elliptic_coeffs(&self, tau: C64, n_max: usize) -> Vec<C64> {
        cusp_form_elliptic_coeffs(self.q_coeffs(), tau, self.weight / 2, n_max)
    }
}

/// `sum_n coeffs[n] e(n u)`, stopping once the terms are negligible.
fn q_series(coeffs: &[C64], u: C64) -> C64 {
    let q = e(u);
    let mut qn = C64::new(1.0, 0.0);
    let mut acc = ComplexSum::new();
    for &a in coeffs {
        acc.add(a * qn);
        qn *= q;
        if qn.norm() < 1e-300 {
            break;
        }
    }
    acc.value()
}

/// The normalised newform `eta(z)^2 eta(11 z)^2` spanning S_2(Gamma0(11)),
/// with `n_cut` coefficients at each cusp.  At the cusp 0 the coefficients
/// follow from `g(-1/(11 z)) = -11 z^2 g(z)`: for `L = (alpha beta; 1 delta)`,
/// `(g|L)(w) = -(1/11) g((w + delta)/11)`.
pub fn cusp_form_11(n_cut: usize) -> CuspFormData {
    let level = 11u64;
    let factors = vec![(1u64, 2i32), (11, 2)];
    // the eta quotient is q * prod(...), so shift by one
    let raw = eta_product_coeffs(&factors, n_cut.saturating_sub(1));
    let mut a = vec![C64::default(); n_cut + 1];
    for (i, &v) in raw.iter().enumerate() {
        a[i + 1] = C64::new(v as f64, 0.0);
    }
    let inf = Cusp::infinity(level);
    let zero = Cusp::parse(level, "0").expect("cusp 0");
    let delta = zero.expansion_matrix().d as f64;
    let at_zero: Vec<C64> = a
        .iter()
        .enumerate()
        .map(|(n, &v)| -v * e(C64::new(n as f64 * delta / level as f64, 0.0)) / level as f64)
        .collect();
    CuspFormData {
        name: "eta(z)^2 eta(11z)^2".into(),
        level,
        weight: 2,
        expansions: vec![(inf, a), (zero, at_zero)],
        eta_factors: factors,
    }
}

/// A basis of S_2(Gamma0(N)) for the shipped levels (1 and 11).
pub fn weight_two_basis(level: u64, n_cut: usize) -> Result<Vec<CuspFormData>> {
    match level {
        1 => Ok(Vec::new()),
        11 => Ok(vec![cusp_form_11(n_cut)]),
        _ => Err(PairingError::UnsupportedLevel(level)),
    }
}

/// The weight 2 cusp form `xi_0 F` from weight 0 expansions of `F` at every
/// cusp: `xi_0 (b e(-n conj(w)/l)) = -4 pi (n/l) conj(b) e(n w/l)`.
pub fn xi_image(level: u64, expansions: &[FourierExpansion]) -> Result<CuspFormData> {
    let mut out = Vec::new();
    for ex in expansions {
        if ex.weight != 0 {
            return Err(PairingError::InvalidInput(format!("expected weight 0, got {}", ex.weight)));
        }
        let l = ex.width() as f64;
        let n_max = ex.antiholomorphic.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0) as usize;
        let coeffs: Vec<C64> =
            (0..=n_max).map(|n| -4.0 * PI * (n as f64 / l) * ex.antihol(-(n as i64)).conj()).collect();
        out.push((ex.cusp.clone(), coeffs));
    }
    Ok(CuspFormData { name: "xi_0 image".into(), level, weight: 2, expansions: out, eta_factors: Vec::new() })
}

/// Individual contributions to the principal part condition.
fn condition_terms(spec: &PrincipalPartSpec, g: &CuspFormData) -> Result<Vec<C64>> {
    if spec.k != g.weight / 2 {
        return Err(PairingError::InvalidInput(format!(
            "spec weight 2 - 2k with k = {} does not pair with weight {}",
            spec.k, g.weight
        )));
    }
    let mut terms = Vec::new();
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    for (cusp, parts) in &spec.cusp_parts {
        let l = cusp.width as f64;
        for (&n, &a) in parts {
            terms.push(a * g.coeff(cusp, -n)? * l / two_pi_i);
        }
    }
    for part in &spec.elliptic_parts {
        let Some(n_max) = part.terms.keys().map(|&n| (-n - 1) as usize).max() else {
            continue;
        };
        let ag = g.elliptic_coeffs(part.tau, n_max);
        let den = C64::new(0.0, 2.0 * part.tau.im * part.omega as f64);
        for (&n, &b) in &part.terms {
            terms.push(b * ag[(-n - 1) as usize] / den);
        }
    }
    Ok(terms)
}

/// Left-hand side of the principal part condition for `g`:
/// `sum_rho l_rho/(2 pi i) sum_{n>0} a_rho(-n) a_{g,rho}(n)`
/// `+ sum_tau (2 i v_tau omega_tau)^{-1} sum_{n>0} b_tau(-n) a_{g,tau}(n-1)`.
/// The width factor accounts for expansions in `e(n w / l)`.
pub fn principal_part_condition(spec: &PrincipalPartSpec, g: &CuspFormData) -> Result<C64> {
    spec.validate()?;
    Ok(condition_terms(spec, g)?.into_iter().sum())
}

/// The pairing `{g, F}` of `g` with the form `F` of principal parts `spec`,
/// `(2 pi i / mu_N)` times [`principal_part_condition`].
pub fn bruinier_funke_pairing(spec: &PrincipalPartSpec, g: &CuspFormData) -> Result<C64> {
    let mu = arith::index_mu(spec.level) as f64;
    Ok(C64::new(0.0, 2.0 * PI / mu) * principal_part_condition(spec, g)?)
}

/// Coefficient `lambda` with `spec_fixed + lambda spec_free` satisfying the
/// principal part condition for `g`.
pub fn balance_coefficient(
    spec_fixed: &PrincipalPartSpec,
    spec_free: &PrincipalPartSpec,
    g: &CuspFormData,
) -> Result<C64> {
    let free = principal_part_condition(spec_free, g)?;
    if free.norm() == 0.0 {
        return Err(PairingError::InvalidInput("the free spec does not pair with g".into()));
    }
    Ok(-principal_part_condition(spec_fixed, g)? / free)
}

/// Simple poles at `tau1` (coefficient 1) and `tau2` (coefficient `lambda`
/// solving the condition for `g`).
pub fn two_pole_spec(level: u64, tau1: C64, tau2: C64, g: &CuspFormData) -> Result<PrincipalPartSpec> {
    let mut fixed = PrincipalPartSpec::new(level, 1);
    fixed.add_elliptic_term(tau1, -1, C64::new(1.0, 0.0));
    let mut free = PrincipalPartSpec::new(level, 1);
    free.add_elliptic_term(tau2, -1, C64::new(1.0, 0.0));
    let lambda = balance_coefficient(&fixed, &free, g)?;
    let mut spec = fixed;
    spec.add_elliptic_term(tau2, -1, lambda);
    spec.validate()?;
    Ok(spec)
}

/// Cutoffs and tolerances of [`meromorphy_certificate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateParams {
    pub j_max: u64,
    pub c_max: u64,
    /// Coefficients kept per cusp form.
    pub n_cut: usize,
    /// Relative tolerance of the principal part condition.
    pub residual_tol: f64,
    /// Relative tolerance for vanishing antiholomorphic coefficients.
    pub antihol_tol: f64,
}

impl Default for CertificateParams {
    fn default() -> Self {
        CertificateParams { j_max: 5, c_max: 2000, n_cut: 400, residual_tol: 1e-10, antihol_tol: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisResidual {
    pub form: String,
    pub residual: C64,
    /// Sum of the moduli of the individual contributions.
    pub scale: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntiholCheck {
    pub n: i64,
    pub value: C64,
    /// Sum over the pieces of the spec of `|coefficient| |piece's coefficient|`.
    pub scale: f64,
    /// Change of `value` when the modulus cutoff is halved; a truncation
    /// estimate for the slowly convergent Kloosterman series.
    pub truncation: f64,
    pub ratio: f64,
    pub vanishes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub level: u64,
    pub residuals: Vec<BasisResidual>,
    pub condition_pass: bool,
    /// Antiholomorphic coefficients at infinity, `None` when the expansion of
    /// cusp-pole pieces is not available (cusp terms at a level with cusp forms).
    pub antihol: Option<Vec<AntiholCheck>>,
    pub antihol_pass: Option<bool>,
    pub pass: bool,
}

/// Decides whether the form with principal parts `spec` is meromorphic by the
/// principal part condition against a basis of cusp forms, and independently
/// checks the antiholomorphic coefficients `1..=5` at infinity of the
/// assembled form.
pub fn meromorphy_certificate(spec: &PrincipalPartSpec, params: &CertificateParams) -> Result<Certificate> {
    spec.validate()?;
    if spec.k != 1 {
        return Err(PairingError::UnsupportedWeight(spec.k));
    }
    let basis = weight_two_basis(spec.level, params.n_cut)?;
    let mut residuals = Vec::new();
    for g in &basis {
        let terms = condition_terms(spec, g)?;
        let residual: C64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.norm()).sum();
        residuals.push(BasisResidual {
            form: g.name.clone(),
            residual,
            scale,
            pass: residual.norm() <= params.residual_tol * scale,
        });
    }
    let condition_pass = residuals.iter().all(|r| r.pass);

    let has_cusp_terms = spec.cusp_parts.iter().any(|(_, t)| !t.is_empty());
    let antihol = if has_cusp_terms && !basis.is_empty() { None } else { Some(antihol_checks(spec, params)?) };
    let antihol_pass = antihol.as_ref().map(|v| v.iter().all(|c| c.vanishes));
    Ok(Certificate {
        level: spec.level,
        residuals,
        condition_pass,
        antihol_pass,
        pass: condition_pass && antihol_pass.unwrap_or(true),
        antihol,
    })
}

const CHECKED_MODES: i64 = 5;

fn antihol_checks(spec: &PrincipalPartSpec, params: &CertificateParams) -> Result<Vec<AntiholCheck>> {
    let j_max = params.j_max.max(CHECKED_MODES as u64);
    let modes = CHECKED_MODES as usize;
    let mut value = vec![C64::default(); modes];
    let mut coarse = vec![C64::default(); modes];
    let mut scale = vec![0.0; modes];
    // cusp pieces have no antiholomorphic part at levels without cusp forms
    for part in &spec.elliptic_parts {
        for (&m, &b) in &part.terms {
            let y = y_form_coeffs(spec.level, part.tau, m, j_max, params.c_max)?;
            let y_half = y_form_coeffs(spec.level, part.tau, m, j_max, (params.c_max / 2).max(1))?;
            for n in 1..=CHECKED_MODES {
                let i = (n - 1) as usize;
                value[i] += b * y.antihol(-n);
                coarse[i] += b * y_half.antihol(-n);
                scale[i] += b.norm() * y.antihol(-n).norm();
            }
        }
    }
    Ok((1..=CHECKED_MODES)
        .map(|n| {
            let i = (n - 1) as usize;
            let ratio = if scale[i] > 0.0 { value[i].norm() / scale[i] } else { 0.0 };
            let truncation = (value[i] - coarse[i]).norm();
            AntiholCheck {
                n,
                value: value[i],
                scale: scale[i],
                truncation,
                ratio,
                vanishes: value[i].norm() <= params.antihol_tol * scale[i] + 3.0 * truncation,
            }
        })
        .collect())
}

/// Closed-form `n`-th antiholomorphic coefficient at infinity of the
/// identity term in the expansion of `Y_{0,m,N}(tau0, .)`; a size reference
/// for the full coefficient.
pub fn y_form_identity_antihol(level: u64, tau0: C64, m: i64, n: i64) -> C64 {
    let order = (-m - 1) as usize;
    let w = omega(level, tau0) as f64;
    let factorial: f64 = (1..=order).map(|i| i as f64).product();
    let ts = TermSum::single(C64::new(2.0 * PI, 0.0), 2, n, tau0);
    let d = d_operator(&ts, tau0, order).expect("shared base point").evaluate(tau0);
    -d / (2.0 * tau0.im * w * factorial)
}

/// `(g, h) = mu_N^{-1} int_{Gamma0(N) \ H} g(z) conj(h(z)) y^{2k} dx dy / y^2`
/// by jittered stratified sampling on the translates `R F` of the standard
/// fundamental domain `F` by right coset representatives `R`.  On `F` the
/// variables `x` and `t = 1/y` turn the measure into `dx dt`; each translate
/// gets a `side x side` grid with `side^2 = samples_per_coset` and one
/// uniformly jittered point per cell drawn from a ChaCha generator seeded
/// with `seed`.
pub fn petersson_inner_numeric(g: &CuspFormData, h: &CuspFormData, samples_per_coset: usize, seed: u64) -> Result<C64> {
    if g.level != h.level || g.weight != h.weight {
        return Err(PairingError::InvalidInput("forms of different level or weight".into()));
    }
    const MIN: usize = 64;
    if samples_per_coset < MIN {
        return Err(PairingError::BudgetTooSmall { samples: samples_per_coset, min: MIN });
    }
    let side = (samples_per_coset as f64).sqrt().floor() as usize;
    let reps = arith::coset_representatives(g.level);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter: Vec<(f64, f64)> = (0..reps.len() * side * side).map(|_| (rng.random(), rng.random())).collect();
    let k2 = g.weight as i32;
    let per_coset: Vec<Result<C64>> = reps
        .par_iter()
        .enumerate()
        .map(|(r, rep)| {
            let mut acc = ComplexSum::new();
            for i in 0..side {
                for j in 0..side {
                    let (jx, ju) = jitter[(r * side + i) * side + j];
                    let x = -0.5 + (i as f64 + jx) / side as f64;
                    let u = (j as f64 + ju) / side as f64;
                    let t_max = 1.0 / (1.0 - x * x).sqrt();
                    let t = u * t_max;
                    if t <= 0.0 {
                        continue;
                    }
                    let z = C64::new(x, 1.0 / t);
                    let val = g.slash(rep, z)? * h.slash(rep, z)?.conj() * z.im.powi(k2);
                    acc.add(val * t_max);
                }
            }
            Ok(acc.value() / (side * side) as f64)
        })
        .collect();
    let mut total = ComplexSum::new();
    for v in per_coset {
        total.add(v?);
    }
    Ok(total.value() / arith::index_mu(g.level) as f64)
}
