//! The two-variable Poincare series `P_{N,s}(frak_z, z)` of weight 2 in
//! `frak_z` and weight 0 in `z`, its analytic continuation to `s = 0` (which
//! defines `y Psi_2`), and the general-`s` pieces used for cross-validation.
//!
//! The series is split into the translations (`sum1`), the matrices with
//! `c >= 1` paired with the rational counterterm at `a/c` (`sum2`), and the
//! counterterms themselves (`sum3`), whose double Poisson summation produces
//! Kloosterman zeta functions.

use std::f64::consts::PI;

use num_complex::ComplexFloat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError};
use crate::kloosterman::{
    grid_sums, ramanujan_zeta, totient_zeta, unit_pairs, GridSums, ModulusRestriction, ZetaValue,
};
use crate::numeric::{cot_pi, e, lattice_sum, taylor_coefficients, ComplexSum, Precision, C64, I};
use crate::specialfn::{gamma, zeta};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("evaluation too close to a pole: {0}")]
    PoleHit(String),
    #[error("Re s = {0} is outside the region of absolute convergence")]
    ConvergenceRegion(f64),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

type Result<T> = std::result::Result<T, ContinuationError>;

/// Cutoffs for evaluating `y Psi_2` and its pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiEvalParams {
    pub level: u64,
    /// Largest modulus in the matrix sums (`sum2`, direct series).
    pub c_max: u64,
    /// Largest modulus in the Kloosterman zeta values of `sum3`.
    pub zeta_c_max: u64,
    /// Larger modulus cutoff for the few entries with `|m| <= 2`, `|n| <= 3`,
    /// which dominate the truncation error of `sum3` (0 disables).
    #[serde(default)]
    pub zeta_refine_c_max: u64,
    /// Fourier index cutoff in `z`.
    pub n_max: usize,
    /// Fourier index cutoff in `frak_z`.
    pub m_max: usize,
    /// Radius of the directly summed window of translations; the rest of each
    /// translation sum is an Euler-Maclaurin tail.
    pub k_max: u64,
    pub tol: f64,
    pub precision: Precision,
}

impl PsiEvalParams {
    pub fn new(level: u64) -> Self {
        PsiEvalParams {
            level,
            c_max: 200,
            zeta_c_max: 2000,
            zeta_refine_c_max: 8000,
            n_max: 12,
            m_max: 12,
            k_max: 10,
            tol: 1e-12,
            precision: Precision::Double,
        }
    }

    /// Fourier cutoffs so that `e^{-2 pi h cutoff} < tol` for the given minimal heights.
    pub fn for_heights(level: u64, min_frak_z2: f64, min_y: f64) -> Self {
        let mut p = PsiEvalParams::new(level);
        p.m_max = fourier_cutoff(min_frak_z2, p.tol);
        p.n_max = fourier_cutoff(min_y, p.tol);
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.level == 0 || self.level > arith::MAX_LEVEL {
            return Err(ContinuationError::InvalidParams(format!("level {}", self.level)));
        }
        if self.c_max == 0 || self.zeta_c_max == 0 || self.n_max == 0 || self.m_max == 0 || self.k_max == 0 {
            return Err(ContinuationError::InvalidParams("all cutoffs must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(ContinuationError::InvalidParams("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Smallest cutoff `n` with `n e^{-2 pi h n} < tol` (at least 2).
pub fn fourier_cutoff(height: f64, tol: f64) -> usize {
    let mut n = 2usize;
    while (n as f64) * (-2.0 * PI * height * n as f64).exp() * 250.0 > tol && n < 100_000 {
        n += 1;
    }
    n
}

/// The pole variable `frak_z` and the modular variable `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub frak_z: C64,
    pub z: C64,
}

impl PointPair {
    pub fn new(frak_z: C64, z: C64) -> Result<Self> {
        if !(frak_z.im > 0.0) || !(z.im > 0.0) {
            return Err(ContinuationError::DomainError("both points must lie in the upper half-plane".into()));
        }
        Ok(PointPair { frak_z, z })
    }

    /// Fails with `PoleHit` when `M frak_z` comes within `10 tol` of `z` for
    /// some `M` in Gamma0(N) (distance measured after reduction to the
    /// standard fundamental domain).
    pub fn check_separation(&self, level: u64, tol: f64) -> Result<()> {
        if let Some(m) = arith::points_equivalent(level, self.frak_z, self.z, 10.0 * tol) {
            return Err(ContinuationError::PoleHit(format!(
                "{} maps {} onto {} within {:e}",
                m,
                self.frak_z,
                self.z,
                10.0 * tol
            )));
        }
        Ok(())
    }
}

/// `phi_s(frak_z, z) = y^{1+s} (frak_z - z)^{-1} (frak_z - conj z)^{-1} |frak_z - conj z|^{-2s}`.
/// `frak_z` may be real.
pub fn phi_s(frak_z: C64, z: C64, s: C64) -> Result<C64> {
    let d1 = frak_z - z;
    let d2 = frak_z - z.conj();
    if d1.norm() < 1e-300 || d2.norm() < 1e-300 {
        return Err(ContinuationError::PoleHit(format!("phi_s at frak_z = {frak_z}, z = {z}")));
    }
    Ok(phi_unchecked(frak_z, z, s))
}

#[inline]
fn phi_unchecked(w: C64, z: C64, s: C64) -> C64 {
    let d2 = w - z.conj();
    let y = z.im;
    let pref = if s == C64::new(0.0, 0.0) { C64::new(y, 0.0) } else { y.powc(1.0 + s) * (d2.norm_sqr()).powc(-s) };
    pref / ((w - z) * d2)
}

/// `C(w) = cot pi (w - z) - cot pi (w - conj z)`.
#[inline]
fn cot_pair(w: C64, z: C64) -> C64 {
    cot_pi(w - z) - cot_pi(w - z.conj())
}

/// The translation part at `s = 0`:
/// `-i sum_n [(frak_z + n - z)^{-1} - (frak_z + n - conj z)^{-1}] = -i pi [cot pi(frak_z - z) - cot pi(frak_z - conj z)]`.
pub fn sum1_s0(pair: &PointPair) -> Result<C64> {
    let d = pair.frak_z - pair.z;
    if (d - d.re.round()).norm() < 1e-13 {
        return Err(ContinuationError::PoleHit(format!("frak_z - z = {d} is an integer")));
    }
    Ok(-I * PI * cot_pair(pair.frak_z, pair.z))
}

const TAYLOR_SAMPLES: usize = 64;
const TAYLOR_TERMS: usize = 26;

/// Contribution of one class `(c, d0)` (with `a0 d0 = 1 mod c`) to `sum2` at `s = 0`:
/// `-i pi sum_r [C(x - 1/(c^2 v)) - C(x)] / (c^2 v^2)`, `x = a0/c`, `v = frak_z + d0/c + r`.
fn sum2_class_s0(c: u64, d0: u64, a0: u64, pair: &PointPair, k_max: u64) -> C64 {
    let z = pair.z;
    let cf = c as f64;
    let x = C64::new(a0 as f64 / cf, 0.0);
    let u = pair.frak_z + d0 as f64 / cf;
    let c2 = cf * cf;
    if c2 * z.im * pair.frak_z.im >= 8.0 {
        // Expand C around x in powers of 1/(c^2 v) and sum over r in closed form.
        // successive terms shrink roughly by 4 / (c^2 y frak_z2)
        let ratio = c2 * z.im * pair.frak_z.im / 4.0;
        let terms = ((40.0 / ratio.ln()).ceil() as usize + 2).min(TAYLOR_TERMS);
        let a = taylor_coefficients(&|w| cot_pair(w, z), x, 0.5 * z.im, TAYLOR_SAMPLES, terms);
        let b = taylor_coefficients(&|w| PI * cot_pi(w), u, 0.5 * pair.frak_z.im, TAYLOR_SAMPLES, terms + 2);
        let mut acc = ComplexSum::new();
        let mut cpow = 1.0 / c2;
        for (k, ak) in a.iter().enumerate().skip(1) {
            cpow /= c2;
            let n = k + 2;
            // Z_n(u) = sum_r (u + r)^{-n} = (-1)^{n-1} b_{n-1}
            let zn = if n % 2 == 1 { b[n - 1] } else { -b[n - 1] };
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let term = sign * ak * cpow * zn;
            acc.add(term);
            if k > 3 && term.norm() < 1e-18 * acc.value().norm() {
                break;
            }
        }
        return -I * PI * acc.value();
    }
    let cx = cot_pair(x, z);
    let f = |r: f64| {
        let v = u + r;
        (cot_pair(x - 1.0 / (c2 * v), z) - cx) / (c2 * v * v)
    };
    let radius = (k_max as f64).max(4.0 / (c2 * z.im));
    -I * PI * lattice_sum(&f, -u.re, radius)
}

/// Moduli `c = N, 2N, ..., c_max`.
fn moduli(level: u64, c_max: u64) -> Vec<u64> {
    (1..=c_max / level).map(|k| k * level).collect()
}

/// Sum over moduli of per-modulus values, computed in parallel and
/// accumulated in ascending order.
fn ordered_modulus_sum(cs: &[u64], f: impl Fn(u64) -> C64 + Sync) -> C64 {
    let parts: Vec<C64> = cs.par_iter().map(|&c| f(c)).collect();
    let mut acc = ComplexSum::new();
    for p in parts {
        acc.add(p);
    }
    acc.value()
}

/// The paired matrix part at `s = 0`:
/// `-i sum_{c >= 1, N | c} [ ((M frak_z - z)(a/c - z))^{-1} - ((M frak_z - conj z)(a/c - conj z))^{-1} ] / (c j(M, frak_z)^3)`.
/// Translates of `a` are summed with the cotangent; translates of `d` by a
/// direct window plus Euler-Maclaurin tails, or in closed form when `c` is large.
pub fn sum2_s0(level: u64, pair: &PointPair, params: &PsiEvalParams) -> Result<C64> {
    params.validate()?;
    pair.check_separation(level, params.tol)?;
    let cs = moduli(level, params.c_max);
    Ok(ordered_modulus_sum(&cs, |c| {
        let mut acc = ComplexSum::new();
        for (d0, a0) in unit_pairs(c) {
            acc.add(sum2_class_s0(c, d0, a0, pair, params.k_max));
        }
        acc.value()
    }))
}

/// Kloosterman zeta values `S(m, n) = sum_{N | c <= C} K(m, n; c) c^{-2-2s}` on
/// `1 <= m <= m_max`, `|n| <= n_max` (and for general `s` also `m <= 0`).
/// Entries with small indices may be summed to a larger cutoff.
#[derive(Clone, Debug)]
pub struct KloostermanTable {
    pub level: u64,
    pub s: C64,
    pub m_range: (i64, i64),
    pub n_max: i64,
    sums: GridSums,
    refined: Option<GridSums>,
    /// Closed-form values for the rows or columns with a zero index.
    zero_index: Vec<(i64, i64, C64)>,
}

impl KloostermanTable {
    pub fn new(
        level: u64,
        s: C64,
        m_range: (i64, i64),
        n_max: i64,
        c_max: u64,
        refine_c_max: u64,
        precision: Precision,
    ) -> Result<Self> {
        let expo = -2.0 - 2.0 * s;
        let w = move |c: u64, _: i64, _: i64| (c as f64).powc(expo);
        let restriction = ModulusRestriction::Classical { level };
        let decay = 2.0 + 2.0 * s.re;
        let sums = grid_sums(restriction, c_max, m_range, (-n_max, n_max), &w, decay, precision)?;
        let refined = if refine_c_max > c_max {
            let rm = (m_range.0.max(-2), m_range.1.min(2));
            let rn = n_max.min(3);
            Some(grid_sums(restriction, refine_c_max, rm, (-rn, rn), &w, decay, precision)?)
        } else {
            None
        };
        let mut zero_index = Vec::new();
        let sz = 2.0 + 2.0 * s;
        for m in m_range.0..=m_range.1 {
            if m != 0 {
                zero_index.push((m, 0, ramanujan_zeta(level, m, sz)));
            } else {
                for n in -n_max..=n_max {
                    if n != 0 {
                        zero_index.push((0, n, ramanujan_zeta(level, n, sz)));
                    }
                }
            }
        }
        Ok(KloostermanTable { level, s, m_range, n_max, sums, refined, zero_index })
    }

    pub fn get(&self, m: i64, n: i64) -> C64 {
        if m == 0 || n == 0 {
            if let Some(&(_, _, v)) = self.zero_index.iter().find(|&&(a, b, _)| a == m && b == n) {
                return v;
            }
        }
        self.entry(m, n).value
    }

    fn entry(&self, m: i64, n: i64) -> ZetaValue {
        match &self.refined {
            Some(r) if r.contains(m, n) => r.get(m, n),
            _ => self.sums.get(m, n),
        }
    }

    /// Weil-bound tail estimate of an entry.
    pub fn tail(&self, m: i64, n: i64) -> f64 {
        if m == 0 || n == 0 {
            0.0
        } else {
            self.entry(m, n).tail
        }
    }
}

/// Evaluator for `y Psi_2` at `s = 0` that caches the Kloosterman table of `sum3`.
#[derive(Clone, Debug)]
pub struct PsiEvaluator {
    pub params: PsiEvalParams,
    table: KloostermanTable,
}

impl PsiEvaluator {
    pub fn new(params: PsiEvalParams) -> Result<Self> {
        params.validate()?;
        let table = KloostermanTable::new(
            params.level,
            C64::new(0.0, 0.0),
            (1, params.m_max as i64),
            params.n_max as i64,
            params.zeta_c_max,
            params.zeta_refine_c_max,
            params.precision,
        )?;
        Ok(PsiEvaluator { params, table })
    }

    pub fn level(&self) -> u64 {
        self.params.level
    }

    pub fn table(&self) -> &KloostermanTable {
        &self.table
    }

    pub fn sum1(&self, pair: &PointPair) -> Result<C64> {
        sum1_s0(pair)
    }

    pub fn sum2(&self, pair: &PointPair) -> Result<C64> {
        sum2_s0(self.params.level, pair, &self.params)
    }

    /// `c_N/frak_z2 - 8 pi^3 sum_{m >= 1} m e(m frak_z) [sum_{n <= 0} S(m,n) e(-n z) + sum_{n >= 1} S(m,n) e(-n conj z)]`.
    pub fn sum3(&self, pair: &PointPair) -> C64 {
        self.sum3_without_constant(pair) + arith::c_n(self.params.level) / pair.frak_z.im
    }

    /// `sum3` without the `c_N/frak_z2` term (holomorphic in `frak_z`).
    pub fn sum3_without_constant(&self, pair: &PointPair) -> C64 {
        let (fz, z) = (pair.frak_z, pair.z);
        let nmax = self.params.n_max as i64;
        let zn: Vec<C64> =
            (-nmax..=nmax).map(|n| if n <= 0 { e(-(n as f64) * z) } else { e(-(n as f64) * z.conj()) }).collect();
        let mut outer = ComplexSum::new();
        for m in 1..=self.params.m_max as i64 {
            let mut inner = ComplexSum::new();
            for n in -nmax..=nmax {
                inner.add(self.table.get(m, n) * zn[(n + nmax) as usize]);
            }
            outer.add(m as f64 * e(m as f64 * fz) * inner.value());
        }
        -8.0 * PI.powi(3) * outer.value()
    }

    /// Fails with `InvalidParams` when the Fourier cutoffs are too small for
    /// the heights of `pair`.
    pub fn check_heights(&self, pair: &PointPair) -> Result<()> {
        let need_m = fourier_cutoff(pair.frak_z.im, self.params.tol);
        let need_n = fourier_cutoff(pair.z.im, self.params.tol);
        if need_m > self.params.m_max || need_n > self.params.n_max {
            return Err(ContinuationError::InvalidParams(format!(
                "point pair needs m_max >= {need_m} and n_max >= {need_n}, have {} and {}",
                self.params.m_max, self.params.n_max
            )));
        }
        Ok(())
    }

    /// `y Psi_2(frak_z, z) = sum1 + sum2 + sum3` at `s = 0`.
    pub fn y_psi2(&self, pair: &PointPair) -> Result<C64> {
        self.check_heights(pair)?;
        Ok(self.sum1(pair)? + self.sum2(pair)? + self.sum3(pair))
    }

    /// Estimate of the truncation error of `sum3` at the given point.
    pub fn sum3_tail(&self, pair: &PointPair) -> f64 {
        let (fz2, y) = (pair.frak_z.im, pair.z.im);
        let nmax = self.params.n_max as i64;
        let mut t = 0.0;
        for m in 1..=self.params.m_max as i64 {
            for n in -nmax..=nmax {
                t += m as f64 * (-2.0 * PI * (m as f64 * fz2 + n.abs() as f64 * y)).exp() * self.table.tail(m, n);
            }
        }
        let mm = self.params.m_max as f64 + 1.0;
        8.0 * PI.powi(3) * (t + mm * (-2.0 * PI * mm * fz2).exp())
    }
}

/// `sum3` at `s = 0` (builds a fresh Kloosterman table).
pub fn sum3_s0(level: u64, pair: &PointPair, params: &PsiEvalParams) -> Result<C64> {
    let mut p = params.clone();
    p.level = level;
    Ok(PsiEvaluator::new(p)?.sum3(pair))
}

/// `y Psi_{2,N}(frak_z, z)` (builds a fresh Kloosterman table).
pub fn y_psi2(level: u64, pair: &PointPair, params: &PsiEvalParams) -> Result<C64> {
    let mut p = params.clone();
    p.level = level;
    PsiEvaluator::new(p)?.y_psi2(pair)
}

/// `g_n(w1, w2) = int_R (w1 + t)^{-1} (w2 + t)^{-1} e^{-2 pi i n t} dt` by residues.
pub fn g_n(n: i64, w1: C64, w2: C64) -> Result<C64> {
    if w1.im == 0.0 {
        return Err(ContinuationError::DomainError("w1 must not be real".into()));
    }
    if !(w2.im > 0.0) {
        return Err(ContinuationError::DomainError("w2 must lie in the upper half-plane".into()));
    }
    let nf = n as f64;
    let two_pi_i = 2.0 * PI * I;
    Ok(if n <= 0 {
        if w1.im > 0.0 {
            C64::new(0.0, 0.0)
        } else {
            two_pi_i / (w2 - w1) * e(nf * w1)
        }
    } else if w1.im < 0.0 {
        two_pi_i / (w2 - w1) * e(nf * w2)
    } else if (w1 - w2).norm() > 1e-12 * w1.norm() {
        two_pi_i / (w2 - w1) * (e(nf * w2) - e(nf * w1))
    } else {
        -4.0 * PI * PI * nf * e(nf * w1)
    })
}

/// `lim s zeta(2s+1)` aware evaluation of `s zeta(2s+1)`.
fn s_zeta_2s1(s: C64) -> C64 {
    if s.norm() < 1e-7 {
        // 1/2 + gamma_E s + O(s^2)
        0.5 + 0.577_215_664_901_532_9 * s
    } else {
        s * zeta(2.0 * s + 1.0)
    }
}

/// `int_R phi_s(t, z) dt = y^{-s} sqrt(pi) Gamma(1/2 + s) / Gamma(1 + s)`.
pub fn phi_integral(s: C64, y: f64) -> C64 {
    y.powc(-s) * PI.sqrt() * gamma(0.5 + s) / gamma(1.0 + s)
}

/// `int_R (frak_z + w)^{-2-s} (conj frak_z + w)^{-s} dw = -sqrt(pi)/(1+s) Gamma(1/2+s)/Gamma(1+s) s frak_z2^{-1-2s}`.
pub fn w_integral_zero(s: C64, frak_z2: f64) -> C64 {
    -PI.sqrt() / (1.0 + s) * gamma(0.5 + s) / gamma(1.0 + s) * s * frak_z2.powc(-1.0 - 2.0 * s)
}

/// The `m = n = 0` term of the continued `sum3`:
/// `-(2 sqrt(pi)/(1+s)) Gamma(1/2+s)/Gamma(1+s) frak_z2^{-1-2s} s zeta(2s+1)/zeta(2s+2)
///  phi(N) N^{-2-2s} prod_{p | N} (1 - p^{-2-2s})^{-1} int phi_s(t, z) dt`.
/// At `s = 0` it equals `c_N / frak_z2`.
pub fn zeta_term(level: u64, s: C64, pair: &PointPair) -> C64 {
    let fz2 = pair.frak_z.im;
    let mut euler = C64::new(1.0, 0.0);
    for (p, _) in arith::factorize(level) {
        euler /= 1.0 - (p as f64).powc(-2.0 - 2.0 * s);
    }
    let n_part = arith::totient(level) as f64 * (level as f64).powc(-2.0 - 2.0 * s) * euler;
    -2.0 * PI.sqrt() / (1.0 + s) * gamma(0.5 + s) / gamma(1.0 + s) * fz2.powc(-1.0 - 2.0 * s) * s_zeta_2s1(s)
        / zeta(2.0 * s + 2.0)
        * n_part
        * phi_integral(s, pair.z.im)
}

/// Oscillatory integral `int_R f(t) e^{-2 pi i n t} dt` for `f` analytic in the
/// strip `|Im t| < h` around the real axis and decaying like `|t|^{-p}`, `p > 1`.
/// The path is moved to `Im t = -sgn(n) h/2`; panels of width `1/|n|`
/// cover `|t - center| <= t_max` and the two tails use integration by parts.
fn fourier_integral(f: &(dyn Fn(C64) -> C64 + Sync), n: i64, h: f64, center: f64, t_max: f64) -> C64 {
    assert!(n != 0);
    let shift = -(n.signum() as f64) * 0.5 * h;
    let omega = 2.0 * PI * n as f64;
    let damp = (omega * shift).exp(); // |e^{-i omega (t + i shift)}| = e^{omega shift}
    let g = |t: f64| f(C64::new(t, shift)) * damp;
    let width = 1.0 / n.unsigned_abs() as f64;
    let lo = center - t_max;
    let panels = (2.0 * t_max / width).ceil() as usize;
    let width = 2.0 * t_max / panels as f64;
    let rule = crate::numeric::gauss_legendre(16);
    let parts: Vec<C64> = (0..panels)
        .into_par_iter()
        .map(|p| {
            let a = lo + p as f64 * width;
            let mut acc = ComplexSum::new();
            for &(xg, wg) in rule.iter() {
                let t = a + 0.5 * width * (xg + 1.0);
                let (sn, cs) = (-omega * t).sin_cos();
                acc.add(g(t) * C64::new(cs, sn) * (0.5 * width * wg));
            }
            acc.value()
        })
        .collect();
    let mut acc = ComplexSum::new();
    for p in parts {
        acc.add(p);
    }
    // tails: +-e^{-i omega A} sum_k g^(k)(A) / (i omega)^{k+1}
    let iw = I * omega;
    let tail = |a: f64, sign: f64| {
        let hd = 0.5;
        let g0 = g(a);
        let g1 = (g(a + hd) - g(a - hd)) / (2.0 * hd);
        let g2 = (g(a + hd) - 2.0 * g0 + g(a - hd)) / (hd * hd);
        let ph = C64::new((omega * a).cos(), -(omega * a).sin());
        sign * ph * (g0 / iw + g1 / (iw * iw) + g2 / (iw * iw * iw))
    };
    acc.add(tail(center + t_max, 1.0));
    acc.add(tail(lo, -1.0));
    acc.value()
}

/// `I_n = int_R phi_s(t, z) e^{-2 pi i n t} dt`.
pub fn phi_fourier(n: i64, s: C64, z: C64) -> C64 {
    if n == 0 {
        return phi_integral(s, z.im);
    }
    if s == C64::new(0.0, 0.0) {
        // y g_n(-z, -conj z) = pi e(-n z) (n <= 0) or pi e(-n conj z) (n > 0)
        return if n < 0 { PI * e(-(n as f64) * z) } else { PI * e(-(n as f64) * z.conj()) };
    }
    let y = z.im;
    let f = |t: C64| y.powc(1.0 + s) * (t - z).powc(-1.0 - s) * (t - z.conj()).powc(-1.0 - s);
    fourier_integral(&f, n, y, z.re, 400.0 + 4.0 * z.norm())
}

/// `J_m = int_R (frak_z + w)^{-2-s} (conj frak_z + w)^{-s} e^{-2 pi i m w} dw`.
pub fn w_fourier(m: i64, s: C64, frak_z: C64) -> C64 {
    if m == 0 {
        return w_integral_zero(s, frak_z.im);
    }
    if s == C64::new(0.0, 0.0) {
        return if m < 0 { C64::new(0.0, 0.0) } else { -4.0 * PI * PI * m as f64 * e(m as f64 * frak_z) };
    }
    let f = |w: C64| (frak_z + w).powc(-2.0 - s) * (frak_z.conj() + w).powc(-s);
    fourier_integral(&f, m, frak_z.im, -frak_z.re, 400.0 + 4.0 * frak_z.norm())
}

fn check_region(s: C64) -> Result<()> {
    if s.re <= -0.25 {
        return Err(ContinuationError::ConvergenceRegion(s.re));
    }
    Ok(())
}

/// `sum1` for general `s`: `2 sum_n phi_s(frak_z + n, z)`.
pub fn sum1_s(pair: &PointPair, s: C64, params: &PsiEvalParams) -> Result<C64> {
    check_region(s)?;
    let d = pair.frak_z - pair.z;
    if (d - d.re.round()).norm() < 1e-13 {
        return Err(ContinuationError::PoleHit(format!("frak_z - z = {d} is an integer")));
    }
    let f = |t: f64| phi_unchecked(pair.frak_z + t, pair.z, s);
    Ok(2.0 * lattice_sum(&f, pair.z.re - pair.frak_z.re, (4 * params.k_max) as f64))
}

/// Translation sum `sum_k [phi_s(p + k, z) - phi_s(q + k, z)]` (or of the
/// first term only when `q` is `None`).
pub fn translation_sum(p: C64, q: Option<C64>, z: C64, s: C64, k_max: u64) -> C64 {
    let f = |k: f64| {
        let mut v = phi_unchecked(p + k, z, s);
        if let Some(q) = q {
            v -= phi_unchecked(q + k, z, s);
        }
        v
    };
    lattice_sum(&f, z.re - p.re, k_max as f64)
}

/// Interpolant of the periodic translation sum `T(a) = sum_k phi_s(a + k, z)` on
/// the strip `0 <= Im a <= height`: a Fourier series in `Re a` whose
/// coefficients are Chebyshev expansions in `Im a`.  `T` is real-analytic
/// for `|Im a| < y`, so both expansions converge geometrically once
/// `height <= y/2`.
struct TranslationInterp {
    height: f64,
    modes: i64,
    cheb: usize,
    /// `coeffs[(n + modes) * cheb + j]`
    coeffs: Vec<C64>,
}

impl TranslationInterp {
    fn new(z: C64, s: C64, k_max: u64) -> Self {
        let height = 0.5 * z.im;
        let modes = ((36.0 / (2.0 * PI * (z.im - height))).ceil() as i64).max(4);
        let samples = (2 * modes + 2) as usize;
        let cheb = 24usize;
        let mut coeffs = vec![C64::new(0.0, 0.0); (2 * modes + 1) as usize * cheb];
        let roots: Vec<C64> = (0..samples).map(|j| crate::numeric::e_real(j as f64 / samples as f64)).collect();
        let mut per_node = vec![vec![C64::new(0.0, 0.0); (2 * modes + 1) as usize]; cheb];
        for (j, row) in per_node.iter_mut().enumerate() {
            let t = (PI * (j as f64 + 0.5) / cheb as f64).cos();
            let a2 = 0.5 * height * (1.0 + t);
            let vals: Vec<C64> = (0..samples)
                .map(|k| translation_sum(C64::new(k as f64 / samples as f64, a2), None, z, s, k_max))
                .collect();
            for n in -modes..=modes {
                let mut acc = ComplexSum::new();
                for (k, &v) in vals.iter().enumerate() {
                    let idx = ((samples as i64 - (n * k as i64).rem_euclid(samples as i64)) % samples as i64) as usize;
                    acc.add(v * roots[idx]);
                }
                row[(n + modes) as usize] = acc.value() / samples as f64;
            }
        }
        for n in 0..(2 * modes + 1) as usize {
            for l in 0..cheb {
                let mut acc = ComplexSum::new();
                for (j, row) in per_node.iter().enumerate() {
                    acc.add(row[n] * (PI * l as f64 * (j as f64 + 0.5) / cheb as f64).cos());
                }
                let scale = if l == 0 { 1.0 } else { 2.0 } / cheb as f64;
                coeffs[n * cheb + l] = acc.value() * scale;
            }
        }
        TranslationInterp { height, modes, cheb, coeffs }
    }

    fn covers(&self, a: C64) -> bool {
        a.im >= 0.0 && a.im <= self.height
    }

    fn eval(&self, a: C64) -> C64 {
        let t = 2.0 * a.im / self.height - 1.0;
        let mut tj = [0.0f64; 32];
        tj[0] = 1.0;
        tj[1] = t;
        for j in 2..self.cheb {
            tj[j] = 2.0 * t * tj[j - 1] - tj[j - 2];
        }
        let w = crate::numeric::e_real(a.re);
        let mut ph = crate::numeric::e_real(-(self.modes as f64) * a.re);
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..(2 * self.modes + 1) as usize {
            let row = &self.coeffs[n * self.cheb..(n + 1) * self.cheb];
            let mut v = C64::new(0.0, 0.0);
            for (c, &p) in row.iter().zip(tj.iter()) {
                v += c * p;
            }
            acc += v * ph;
            ph *= w;
        }
        acc
    }
}

/// Matrix sum over `c >= 1`, `N | c <= c_max` of
/// `2 [phi_s(M frak_z, z) - phi_s(a/c, z)] / (j^2 |j|^{2s})` (`paired = true`) or of
/// `2 phi_s(M frak_z, z) / (j^2 |j|^{2s})` (`paired = false`), each summed over
/// all translates of `a`.
fn matrix_sum(level: u64, pair: &PointPair, s: C64, params: &PsiEvalParams, paired: bool) -> C64 {
    let cs = moduli(level, params.c_max);
    let z = pair.z;
    let interp = TranslationInterp::new(z, s, params.k_max);
    let trans = |a: C64| {
        if interp.covers(a) {
            interp.eval(a)
        } else {
            translation_sum(a, None, z, s, params.k_max)
        }
    };
    ordered_modulus_sum(&cs, |c| {
        let cf = c as f64;
        let c2 = cf * cf;
        let cpow = cf.powc(-2.0 - 2.0 * s);
        let mut acc = ComplexSum::new();
        for (d0, a0) in unit_pairs(c) {
            let x = C64::new(a0 as f64 / cf, 0.0);
            let tx = if paired { trans(x) } else { C64::new(0.0, 0.0) };
            let u = pair.frak_z + d0 as f64 / cf;
            let f = |r: f64| {
                let v = u + r;
                let a = x - 1.0 / (c2 * v);
                (trans(a) - tx) * cpow / (v * v * v.norm_sqr().powc(s))
            };
            let radius = (params.k_max as f64).max(4.0 / (c2 * z.im));
            acc.add(lattice_sum(&f, -u.re, radius));
        }
        2.0 * acc.value()
    })
}

/// `sum2` for general `s` (absolutely convergent for `Re s > -1/2`).
pub fn sum2_s(level: u64, pair: &PointPair, s: C64, params: &PsiEvalParams) -> Result<C64> {
    check_region(s)?;
    params.validate()?;
    pair.check_separation(level, params.tol)?;
    Ok(matrix_sum(level, pair, s, params, true))
}

/// Continued `sum3` for general `s`:
/// `2 sum_{(m,n) != (0,0)} I_n J_m S_s(m, n) + zeta_term`.
pub fn sum3_s(level: u64, pair: &PointPair, s: C64, params: &PsiEvalParams) -> Result<C64> {
    check_region(s)?;
    params.validate()?;
    let (mm, nm) = (params.m_max as i64, params.n_max as i64);
    let table =
        KloostermanTable::new(level, s, (-mm, mm), nm, params.zeta_c_max, params.zeta_refine_c_max, params.precision)?;
    let ins: Vec<C64> = (-nm..=nm).map(|n| phi_fourier(n, s, pair.z)).collect();
    let jms: Vec<C64> = (-mm..=mm).map(|m| w_fourier(m, s, pair.frak_z)).collect();
    let mut acc = ComplexSum::new();
    for m in -mm..=mm {
        let jm = jms[(m + mm) as usize];
        for n in -nm..=nm {
            if m == 0 && n == 0 {
                continue;
            }
            acc.add(ins[(n + nm) as usize] * jm * table.get(m, n));
        }
    }
    Ok(2.0 * acc.value() + zeta_term(level, s, pair))
}

/// Continued representation `sum1_s + sum2_s + sum3_s`.
pub fn continued_poincare(level: u64, s: C64, pair: &PointPair, params: &PsiEvalParams) -> Result<C64> {
    Ok(sum1_s(pair, s, params)? + sum2_s(level, pair, s, params)? + sum3_s(level, pair, s, params)?)
}

/// Truncated value of the defining series together with a tail indicator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectValue {
    pub value: C64,
    /// Size of the mean modulus-tail correction that was added.
    pub tail: f64,
}

/// The defining series `sum_{M in Gamma0(N)} phi_s(M frak_z, z) / (j^2 |j|^{2s})` for
/// `Re s > 0`, over moduli `c <= c_max`.  Translation sums are complete
/// (Euler-Maclaurin tails); the mean of the omitted moduli,
/// `2 I_0 J_0 sum_{N | c > c_max} phi(c) c^{-2-2s}`, is added in closed form.
pub fn direct_poincare(level: u64, s: C64, pair: &PointPair, params: &PsiEvalParams) -> Result<DirectValue> {
    if s.re <= 0.0 {
        return Err(ContinuationError::ConvergenceRegion(s.re));
    }
    params.validate()?;
    pair.check_separation(level, params.tol)?;
    let translations = sum1_s(pair, s, params)?;
    let matrices = matrix_sum(level, pair, s, params, false);
    let mut partial = ComplexSum::new();
    for c in moduli(level, params.c_max) {
        partial.add(arith::totient(c) as f64 * (c as f64).powc(-2.0 - 2.0 * s));
    }
    let rest = totient_zeta(level, 2.0 + 2.0 * s) - partial.value();
    let tail = 2.0 * phi_integral(s, pair.z.im) * w_integral_zero(s, pair.frak_z.im) * rest;
    Ok(DirectValue { value: translations + matrices + tail, tail: tail.norm() })
}

/// Sum over `r` of `(u + r)^{-n}` for `n >= 2`, used by tests as an oracle.
#[cfg(test)]
fn hurwitz_lattice(u: C64, n: i32) -> C64 {
    let f = |r: f64| (u + r).powi(-n);
    lattice_sum(&f, -u.re, 2000.0)
}
