//! Fourier coefficients of the basis forms: Maass-Poincare series attached to
//! cusps, the forms `Y_{0,m,N}(tau0, .)` with a prescribed pole at `tau0`, and
//! linear combinations of them fixed by a principal-part specification.
//!
//! The forms with poles in the upper half-plane are obtained from the cusp
//! expansions of `y Psi_2(frak_z, z)`, whose coefficients are exponential
//! series in `frak_z`.  Petersson's derivative in the variable
//! `X = (frak_z - tau0)/(frak_z - conj tau0)` acts on these series in closed
//! form through [`TermSum`] and [`d_operator`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, ArithError, Cusp};
use crate::continuation::ContinuationError;
use crate::kloosterman::{grid_sums, ramanujan_zeta, GridSums, ModulusRestriction};
use crate::numeric::{e, lattice_sum, ComplexSum, Precision, C64};
use crate::specialfn::{bessel_i, bessel_i_scaled, bessel_j1, e2_hat, incomplete_gamma_int_scaled};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("index m = {m} is not divisible by the stabiliser order {omega}")]
    CongruenceViolation { m: i64, omega: u32 },
    #[error("term base point does not match the expansion point")]
    BasePointMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid principal-part specification: {0}")]
    InvalidSpec(String),
    #[error("evaluation too close to a pole: {0}")]
    PoleHit(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Continuation(#[from] ContinuationError),
}

type Result<T> = std::result::Result<T, BasisError>;

/// Fourier expansion of a weight-`kappa` form at a cusp, in the local
/// variable `w` with `F(L w)` expanded in `e(w / width)`, `L` the cusp's
/// expansion matrix.
///
/// `holomorphic[n]` multiplies `e(n w / width)`; `antiholomorphic[n]`
/// (`n < 0`) multiplies `Gamma(1 - kappa, 4 pi |n| Im w / width) e(n w / width)`,
/// which for `kappa = 0` is `e(n conj(w) / width)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierExpansion {
    pub cusp: Cusp,
    pub weight: i64,
    pub holomorphic: BTreeMap<i64, C64>,
    pub antiholomorphic: BTreeMap<i64, C64>,
    /// Estimated truncation error per holomorphic coefficient.
    pub holomorphic_tails: BTreeMap<i64, f64>,
    /// Estimated truncation error per antiholomorphic coefficient.
    pub antiholomorphic_tails: BTreeMap<i64, f64>,
    /// Modulus cutoff of the Kloosterman series (0 when none were needed).
    pub c_max: u64,
    /// Largest index kept on each side.
    pub j_max: u64,
    /// The expansion converges for `Im w > min_height` (0: everywhere).
    pub min_height: f64,
}

impl FourierExpansion {
    pub fn zero(cusp: Cusp, weight: i64) -> Self {
        FourierExpansion {
            cusp,
            weight,
            holomorphic: BTreeMap::new(),
            antiholomorphic: BTreeMap::new(),
            holomorphic_tails: BTreeMap::new(),
            antiholomorphic_tails: BTreeMap::new(),
            c_max: 0,
            j_max: 0,
            min_height: 0.0,
        }
    }

    pub fn width(&self) -> u64 {
        self.cusp.width
    }

    /// Holomorphic coefficients with negative index.
    pub fn principal_part(&self) -> BTreeMap<i64, C64> {
        self.holomorphic.range(..0).map(|(&n, &v)| (n, v)).collect()
    }

    pub fn hol(&self, n: i64) -> C64 {
        self.holomorphic.get(&n).copied().unwrap_or_default()
    }

    pub fn antihol(&self, n: i64) -> C64 {
        self.antiholomorphic.get(&n).copied().unwrap_or_default()
    }

    /// Sums the expansion at the local variable `w`.
    pub fn evaluate(&self, w: C64) -> C64 {
        let l = self.width() as f64;
        let s = (1 - self.weight) as u32;
        let mut acc = ComplexSum::new();
        for (&n, &a) in &self.holomorphic {
            acc.add(a * e(w * (n as f64 / l)));
        }
        for (&n, &b) in &self.antiholomorphic {
            // Gamma(s, x) |e(n w / l)| = e^x Gamma(s, x) e^{-x/2}, kept finite for large x
            let x = 4.0 * PI * (n.unsigned_abs() as f64) * w.im / l;
            let phase = e(C64::new(n as f64 * w.re / l, 0.0));
            acc.add(b * incomplete_gamma_int_scaled(s, x) * (-0.5 * x).exp() * phase);
        }
        acc.value()
    }

    /// `self += coef * other`.  Both expansions must sit at the same cusp
    /// with the same weight; metadata becomes the more restrictive of the two.
    pub fn add_scaled(&mut self, other: &FourierExpansion, coef: C64) -> Result<()> {
        if self.cusp != other.cusp || self.weight != other.weight {
            return Err(BasisError::InvalidInput("expansions at different cusps or weights".into()));
        }
        let scale = coef.norm();
        for (&n, &v) in &other.holomorphic {
            *self.holomorphic.entry(n).or_default() += coef * v;
        }
        for (&n, &v) in &other.antiholomorphic {
            *self.antiholomorphic.entry(n).or_default() += coef * v;
        }
        for (&n, &t) in &other.holomorphic_tails {
            *self.holomorphic_tails.entry(n).or_default() += scale * t;
        }
        for (&n, &t) in &other.antiholomorphic_tails {
            *self.antiholomorphic_tails.entry(n).or_default() += scale * t;
        }
        if other.c_max > 0 {
            self.c_max = if self.c_max == 0 { other.c_max } else { self.c_max.min(other.c_max) };
        }
        if self.j_max == 0 {
            self.j_max = other.j_max;
        } else if other.j_max > 0 {
            self.j_max = self.j_max.min(other.j_max);
        }
        self.min_height = self.min_height.max(other.min_height);
        Ok(())
    }
}

/// One term `coeff (frak_z - conj(base))^power e(freq frak_z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: C64,
    pub power: u32,
    /// Frequency in `frak_z`; negative values occur in the translation part
    /// of the expansions.
    pub freq: i64,
    pub base: C64,
}

/// A finite sum of [`Term`]s.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TermSum {
    pub terms: Vec<Term>,
}

impl TermSum {
    pub fn new() -> Self {
        TermSum { terms: Vec::new() }
    }

    pub fn single(coeff: C64, power: u32, freq: i64, base: C64) -> Self {
        TermSum { terms: vec![Term { coeff, power, freq, base }] }
    }

    pub fn push(&mut self, coeff: C64, power: u32, freq: i64, base: C64) {
        self.terms.push(Term { coeff, power, freq, base });
    }

    pub fn evaluate(&self, frak_z: C64) -> C64 {
        compensated(
            self.terms.iter().map(|t| t.coeff * (frak_z - t.base.conj()).powu(t.power) * e(frak_z * t.freq as f64)),
        )
    }
}

fn compensated(values: impl Iterator<Item = C64>) -> C64 {
    let mut acc = ComplexSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `D^order` with `D = (frak_z - conj tau0)^2 / (2 i Im tau0) d/dfrak_z`,
/// which is the derivative in `X = (frak_z - tau0)/(frak_z - conj tau0)`:
/// `D[c (frak_z - conj tau0)^p e(m frak_z)] = c/(2 i v0) [p (frak_z - conj tau0)^{p+1} + 2 pi i m (frak_z - conj tau0)^{p+2}] e(m frak_z)`.
pub fn d_operator(ts: &TermSum, tau0: C64, order: usize) -> Result<TermSum> {
    let tol = 1e-12 * tau0.norm().max(1.0);
    if ts.terms.iter().any(|t| (t.base - tau0).norm() > tol) {
        return Err(BasisError::BasePointMismatch);
    }
    let mut current: BTreeMap<(i64, u32), C64> = BTreeMap::new();
    for t in &ts.terms {
        *current.entry((t.freq, t.power)).or_default() += t.coeff;
    }
    let inv = 1.0 / C64::new(0.0, 2.0 * tau0.im);
    for _ in 0..order {
        let mut next: BTreeMap<(i64, u32), C64> = BTreeMap::new();
        for (&(m, p), &c) in &current {
            if p > 0 {
                *next.entry((m, p + 1)).or_default() += c * inv * p as f64;
            }
            if m != 0 {
                *next.entry((m, p + 2)).or_default() += c * inv * C64::new(0.0, 2.0 * PI * m as f64);
            }
        }
        current = next;
    }
    Ok(TermSum {
        terms: current.into_iter().map(|((freq, power), coeff)| Term { coeff, power, freq, base: tau0 }).collect(),
    })
}

/// `D^order [(frak_z - conj tau0)^2 e(m frak_z)]` evaluated at `frak_z = tau0`.
fn petersson_weight(tau0: C64, order: usize, m: i64) -> C64 {
    let ts = TermSum::single(C64::new(1.0, 0.0), 2, m, tau0);
    d_operator(&ts, tau0, order).expect("shared base point").evaluate(tau0)
}

/// Which part of a cusp expansion an index belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Constant,
    Holomorphic,
    Antiholomorphic,
}

/// Smallest modulus times `sqrt(width)` entering the Bessel arguments at `cusp`.
fn min_modulus_scale(cusp: &Cusp) -> f64 {
    let (_, gamma) = cusp.kloosterman_params();
    gamma as f64 * (cusp.width as f64).sqrt()
}

/// Frequency cutoff in `frak_z` for one `z`-mode: past the peak of the
/// magnitude bound, the first frequency whose bound is `1e-17` below the peak
/// (and below `1e-17` absolutely when the peak is small).
fn frequency_cutoff(side: Side, n: u64, v0: f64, scale: f64, order: usize) -> i64 {
    let k = order as f64;
    let mut peak = f64::NEG_INFINITY;
    let mut prev = f64::INFINITY;
    for m in 1..=MAX_FREQ {
        let mf = m as f64;
        let growth = match side {
            Side::Constant => 2.0 * mf.ln(),
            Side::Holomorphic => {
                let x = 4.0 * PI * (mf * n as f64).sqrt() / scale;
                bessel_i_scaled(1, x).ln() + x
            }
            Side::Antiholomorphic => 0.0,
        };
        let poly = k * (2.0 + 2.0 * k + 4.0 * PI * mf * v0).ln();
        let b = 5.0 + 1.5 * mf.ln() + growth + poly - 2.0 * PI * mf * v0;
        peak = peak.max(b);
        if m > 2 && b < prev && b < peak.max(0.0) + (1e-17f64).ln() {
            return m;
        }
        prev = b;
    }
    MAX_FREQ
}

const MAX_FREQ: i64 = 4000;

/// Exponential series `sum_f coeff_f e(f frak_z)` for one `z`-mode, with a
/// bound on its truncation error (coefficient tails weighted by `|e(f frak_z)|`
/// are added by the consumer).
#[derive(Clone, Debug, Default)]
struct ModeSeries {
    terms: BTreeMap<i64, C64>,
    /// Per-frequency error estimate of the coefficient.
    tails: BTreeMap<i64, f64>,
}

impl ModeSeries {
    fn add(&mut self, f: i64, c: C64, tail: f64) {
        *self.terms.entry(f).or_default() += c;
        *self.tails.entry(f).or_default() += tail;
    }

    fn max_freq(&self) -> i64 {
        self.terms.keys().next_back().copied().unwrap_or(0)
    }
}

/// Coefficient series of `G(frak_z, z) = y Psi_2(frak_z, z) + (pi/3) c_N E2hat(frak_z)`
/// at a cusp, as functions of `frak_z` (the `c_N / Im frak_z` terms cancel).
struct GExpansion {
    hol: BTreeMap<u64, ModeSeries>,
    antihol: BTreeMap<u64, ModeSeries>,
}

fn restriction_for(level: u64, cusp: &Cusp) -> ModulusRestriction {
    if cusp.infinity {
        ModulusRestriction::Classical { level }
    } else {
        let (alpha, gamma) = cusp.kloosterman_params();
        ModulusRestriction::Cusp { level, alpha, gamma }
    }
}

/// The cusp expansion of `G` in the variable of `cusp`:
///
/// * index 0: `2 pi delta - 2 pi/mu - (8 pi^3/l) sum_m m S(m) e(m frak_z) + (48 pi/mu) sum_m sigma(m) e(m frak_z)`
///   with `S(m) = sum_c K_{alpha,gamma}(m, 0; c)/c^2`;
/// * holomorphic index `n >= 1`: `2 pi delta e(-n frak_z) - 4 pi^2 (l n)^{-1/2} sum_m m^{1/2} e(m frak_z) sum_c K(m, -n; c)/c I_1(4 pi sqrt(mn/l)/c)`;
/// * antiholomorphic index `n >= 1` (multiplying `e(-n conj(z)/l)`): the same
///   with `K(m, n; c)`, `J_1`, and `2 pi delta e(n frak_z)`.
///
/// `delta` is 1 at infinity and 0 elsewhere.
fn g_expansion(level: u64, cusp: &Cusp, v0: f64, order: usize, j_max: u64, c_max: u64) -> Result<GExpansion> {
    let l = cusp.width as f64;
    let mu = arith::index_mu(level) as f64;
    let scale = min_modulus_scale(cusp);
    let restriction = restriction_for(level, cusp);
    let delta = if cusp.infinity { 1.0 } else { 0.0 };

    let mut columns: Vec<(Side, u64)> = vec![(Side::Constant, 0)];
    for n in 1..=j_max {
        columns.push((Side::Holomorphic, n));
        columns.push((Side::Antiholomorphic, n));
    }
    let cutoffs: Vec<i64> = columns.iter().map(|&(side, n)| frequency_cutoff(side, n, v0, scale, order)).collect();

    let sums: Vec<Option<GridSums>> = columns
        .iter()
        .zip(cutoffs.iter())
        .map(|(&(side, n), &m_hi)| -> Result<Option<GridSums>> {
            if side == Side::Constant && cusp.infinity {
                return Ok(None);
            }
            let idx = match side {
                Side::Constant => 0,
                Side::Holomorphic => -(n as i64),
                Side::Antiholomorphic => n as i64,
            };
            let weight = move |c: u64, m: i64, _: i64| -> C64 {
                let cf = c as f64;
                let x = 4.0 * PI * ((m as f64) * n as f64 / l).sqrt() / cf;
                C64::new(
                    match side {
                        Side::Constant => 1.0 / (cf * cf),
                        Side::Holomorphic => bessel_i(1, x) / cf,
                        Side::Antiholomorphic => bessel_j1(x) / cf,
                    },
                    0.0,
                )
            };
            Ok(Some(grid_sums(restriction, c_max, (1, m_hi), (idx, idx), &weight, 2.0, Precision::Double)?))
        })
        .collect::<Result<_>>()?;

    let mut hol = BTreeMap::new();
    let mut antihol = BTreeMap::new();
    for ((&(side, n), &m_hi), grid) in columns.iter().zip(cutoffs.iter()).zip(sums.iter()) {
        let mut series = ModeSeries::default();
        match side {
            Side::Constant => {
                series.add(0, C64::new(2.0 * PI * delta - 2.0 * PI / mu, 0.0), 0.0);
                for m in 1..=m_hi {
                    let (s, tail) = match grid {
                        None => (ramanujan_zeta(level, m, C64::new(2.0, 0.0)), 0.0),
                        Some(g) => {
                            let v = g.get(m, 0);
                            (v.value, v.tail)
                        }
                    };
                    let mf = m as f64;
                    let coef = -8.0 * PI.powi(3) / l * mf * s + 48.0 * PI / mu * arith::sigma1(m as u64) as f64;
                    series.add(m, coef, 8.0 * PI.powi(3) / l * mf * tail);
                }
                hol.insert(0, series);
            }
            Side::Holomorphic | Side::Antiholomorphic => {
                let g = grid.as_ref().expect("Bessel columns are tabulated");
                let idx = if side == Side::Holomorphic { -(n as i64) } else { n as i64 };
                if cusp.infinity {
                    series.add(idx, C64::new(2.0 * PI, 0.0), 0.0);
                }
                let pre = -4.0 * PI * PI / (l * n as f64).sqrt();
                for m in 1..=m_hi {
                    let v = g.get(m, idx);
                    let sm = (m as f64).sqrt();
                    series.add(m, pre * sm * v.value, pre.abs() * sm * v.tail);
                }
                if side == Side::Holomorphic {
                    hol.insert(n, series);
                } else {
                    antihol.insert(n, series);
                }
            }
        }
    }
    Ok(GExpansion { hol, antihol })
}

fn check_cusp_level(level: u64, cusp: &Cusp) -> Result<()> {
    if cusp.level != level {
        return Err(BasisError::InvalidInput(format!(
            "cusp {} belongs to level {}, not {level}",
            cusp.label(),
            cusp.level
        )));
    }
    Ok(())
}

/// Fourier expansion of `z -> y Psi_2(frak_z, z)` at `cusp` (the function
/// `w -> Im(L w) Psi_2(frak_z, L w)`), valid for `Im w > Im frak_z + 1/Im frak_z`.
pub fn psi2_cusp_expansion(level: u64, frak_z: C64, cusp: &Cusp, j_max: u64, c_max: u64) -> Result<FourierExpansion> {
    check_cusp_level(level, cusp)?;
    if !(frak_z.im > 0.0) {
        return Err(BasisError::InvalidInput("frak_z must lie in the upper half-plane".into()));
    }
    let v0 = frak_z.im;
    let g = g_expansion(level, cusp, v0, 0, j_max, c_max)?;
    let mut out = FourierExpansion::zero(cusp.clone(), 0);
    out.c_max = c_max;
    out.j_max = j_max;
    out.min_height = v0 + 1.0 / v0;
    let eval = |s: &ModeSeries| -> (C64, f64) {
        let v = compensated(s.terms.iter().map(|(&f, &c)| c * e(frak_z * f as f64)));
        let t: f64 = s.tails.iter().map(|(&f, &t)| t * (-2.0 * PI * f as f64 * v0).exp()).sum();
        (v, t)
    };
    let e2_term = PI / 3.0 * arith::c_n(level) * e2_hat(frak_z);
    for (&n, s) in &g.hol {
        let (mut v, t) = eval(s);
        if n == 0 {
            v -= e2_term;
        }
        out.holomorphic.insert(n as i64, v);
        out.holomorphic_tails.insert(n as i64, t);
    }
    for (&n, s) in &g.antihol {
        let (v, t) = eval(s);
        out.antiholomorphic.insert(-(n as i64), v);
        out.antiholomorphic_tails.insert(-(n as i64), t);
    }
    Ok(out)
}

/// Order of the stabiliser of `tau0` in Gamma0(N) modulo `+-I`.
pub fn omega(level: u64, tau0: C64) -> u32 {
    arith::stabilizer_order(level, tau0, 1e-9)
}

/// Fourier expansion at infinity of `Y_{0,m,N}(tau0, .)` (see [`y_form_coeffs_at_cusp`]).
pub fn y_form_coeffs(level: u64, tau0: C64, m: i64, j_max: u64, c_max: u64) -> Result<FourierExpansion> {
    y_form_coeffs_at_cusp(level, tau0, m, &Cusp::infinity(level), j_max, c_max)
}

/// Fourier expansion at `cusp` of
/// `Y_{0,m,N}(tau0, z) = -1/(2 v0 omega (-m-1)!) D^{-m-1}[(frak_z - conj tau0)^2 G(frak_z, z)]` at `frak_z = tau0`,
/// with `G = y Psi_2 + (pi/3) c_N E2hat` and `D` as in [`d_operator`].
/// Its only pole modulo Gamma0(N) is `X_{tau0}(z)^m` at `tau0`.
pub fn y_form_coeffs_at_cusp(
    level: u64,
    tau0: C64,
    m: i64,
    cusp: &Cusp,
    j_max: u64,
    c_max: u64,
) -> Result<FourierExpansion> {
    check_cusp_level(level, cusp)?;
    if !(tau0.im > 0.0) {
        return Err(BasisError::InvalidInput("tau0 must lie in the upper half-plane".into()));
    }
    if m >= 0 {
        return Err(BasisError::InvalidInput(format!("pole order index m = {m} must be negative")));
    }
    let w = omega(level, tau0);
    if m.rem_euclid(w as i64) != 0 {
        return Err(BasisError::CongruenceViolation { m, omega: w });
    }
    let order = (-m - 1) as usize;
    let v0 = tau0.im;
    let g = g_expansion(level, cusp, v0, order, j_max, c_max)?;

    let f_lo = -(j_max as i64);
    let f_hi = g.hol.values().chain(g.antihol.values()).map(|s| s.max_freq()).max().unwrap_or(0);
    let weights: Vec<C64> = (f_lo..=f_hi).into_par_iter().map(|f| petersson_weight(tau0, order, f)).collect();
    let factorial: f64 = (1..=order).map(|i| i as f64).product();
    let pre = -1.0 / (2.0 * v0 * w as f64 * factorial);
    let apply = |s: &ModeSeries| -> (C64, f64) {
        let v = compensated(s.terms.iter().map(|(&f, &c)| c * weights[(f - f_lo) as usize]));
        let t: f64 = s.tails.iter().map(|(&f, &t)| t * weights[(f - f_lo) as usize].norm()).sum();
        (pre * v, pre.abs() * t)
    };

    let mut out = FourierExpansion::zero(cusp.clone(), 0);
    out.c_max = c_max;
    out.j_max = j_max;
    out.min_height = v0 + 1.0 / v0;
    for (&n, s) in &g.hol {
        let (v, t) = apply(s);
        out.holomorphic.insert(n as i64, v);
        out.holomorphic_tails.insert(n as i64, t);
    }
    for (&n, s) in &g.antihol {
        let (v, t) = apply(s);
        out.antiholomorphic.insert(-(n as i64), v);
        out.antiholomorphic_tails.insert(-(n as i64), t);
    }
    Ok(out)
}

/// Meromorphic part at infinity of the Maass-Poincare series of weight
/// `kappa` with principal part `e(n w / l)` at `cusp`:
/// `delta e(n z) + (2 pi)^{2-kappa} l^{kappa-1} |n|^{1-kappa}/(1-kappa)! sum_c K(n,0;c)/c^{2-kappa}`
/// `+ 2 pi (|n|/l)^{(1-kappa)/2} sum_{j >= 1} j^{(kappa-1)/2} sum_c K(n,j;c)/c I_{1-kappa}(4 pi sqrt(|n| j / l)/c) e(j z)`,
/// with `K = K_{alpha,gamma}` of the cusp (classical sums over `N | c` at infinity).
/// The antiholomorphic part is not computed and left empty.
pub fn maass_poincare_coeffs(
    level: u64,
    cusp: &Cusp,
    n: i64,
    kappa: i64,
    j_max: u64,
    c_max: u64,
) -> Result<FourierExpansion> {
    check_cusp_level(level, cusp)?;
    if n >= 0 {
        return Err(BasisError::InvalidInput(format!("principal index n = {n} must be negative")));
    }
    if kappa > 0 || kappa % 2 != 0 {
        return Err(BasisError::InvalidInput(format!("weight {kappa} must be even and non-positive")));
    }
    let l = cusp.width as f64;
    let nu = (1 - kappa) as u32;
    let na = n.unsigned_abs() as f64;
    let fact: f64 = (1..=nu).map(|i| i as f64).product();
    let restriction = restriction_for(level, cusp);
    let weight = move |c: u64, j: i64, _: i64| -> C64 {
        let cf = c as f64;
        if j == 0 {
            C64::new(cf.powi(kappa as i32 - 2), 0.0)
        } else {
            C64::new(bessel_i(nu, 4.0 * PI * (na * j as f64 / l).sqrt() / cf) / cf, 0.0)
        }
    };
    let grid =
        grid_sums(restriction, c_max, (0, j_max as i64), (n, n), &weight, 2.0 - kappa as f64, Precision::Double)?;

    let mut out = FourierExpansion::zero(Cusp::infinity(level), kappa);
    out.c_max = c_max;
    out.j_max = j_max;
    if cusp.infinity {
        out.holomorphic.insert(n, C64::new(1.0, 0.0));
        out.holomorphic_tails.insert(n, 0.0);
    }
    let const_pre = (2.0 * PI).powi(2 - kappa as i32) * l.powi(kappa as i32 - 1) * na.powi(1 - kappa as i32) / fact;
    let (s0, t0) = if cusp.infinity {
        (ramanujan_zeta(level, n, C64::new((2 - kappa) as f64, 0.0)), 0.0)
    } else {
        let v = grid.get(0, n);
        (v.value, v.tail)
    };
    out.holomorphic.insert(0, const_pre * s0);
    out.holomorphic_tails.insert(0, const_pre * t0);
    let pre = 2.0 * PI * (na / l).powf(0.5 * (1 - kappa) as f64);
    for j in 1..=j_max as i64 {
        let v = grid.get(j, n);
        let f = pre * (j as f64).powf(0.5 * (kappa - 1) as f64);
        out.holomorphic.insert(j, f * v.value);
        out.holomorphic_tails.insert(j, f * v.tail);
    }
    Ok(out)
}

/// Principal parts at points of the upper half-plane: `terms[n]` multiplies
/// `X_tau(z)^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticPart {
    pub tau: C64,
    pub omega: u32,
    pub terms: BTreeMap<i64, C64>,
}

/// Prescribed singular data of a weight `2 - 2k` form: coefficients
/// `a_rho(n)` of `e(n w / l)` at cusps and `b_tau(n)` of `X_tau^n` at points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipalPartSpec {
    pub level: u64,
    pub k: u32,
    pub cusp_parts: Vec<(Cusp, BTreeMap<i64, C64>)>,
    pub elliptic_parts: Vec<EllipticPart>,
}

impl PrincipalPartSpec {
    pub fn new(level: u64, k: u32) -> Self {
        PrincipalPartSpec { level, k, cusp_parts: Vec::new(), elliptic_parts: Vec::new() }
    }

    pub fn weight(&self) -> i64 {
        2 - 2 * self.k as i64
    }

    pub fn add_cusp_term(&mut self, cusp: Cusp, n: i64, coeff: C64) {
        match self.cusp_parts.iter_mut().find(|(c, _)| *c == cusp) {
            Some((_, terms)) => *terms.entry(n).or_default() += coeff,
            None => self.cusp_parts.push((cusp, BTreeMap::from([(n, coeff)]))),
        }
    }

    /// Adds `coeff X_tau^n`; points already present (up to Gamma0(N)) are
    /// matched by exact coordinates only, so pass the same representative.
    pub fn add_elliptic_term(&mut self, tau: C64, n: i64, coeff: C64) {
        match self.elliptic_parts.iter_mut().find(|p| p.tau == tau) {
            Some(p) => *p.terms.entry(n).or_default() += coeff,
            None => self.elliptic_parts.push(EllipticPart {
                tau,
                omega: omega(self.level, tau),
                terms: BTreeMap::from([(n, coeff)]),
            }),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cusp_parts.iter().all(|(_, t)| t.is_empty()) && self.elliptic_parts.iter().all(|p| p.terms.is_empty())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BasisError::InvalidSpec(msg));
        if self.level == 0 || self.level > arith::MAX_LEVEL {
            return bad(format!("level {}", self.level));
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        for (i, (cusp, terms)) in self.cusp_parts.iter().enumerate() {
            if cusp.level != self.level {
                return bad(format!("cusp {} has level {}", cusp.label(), cusp.level));
            }
            if self.cusp_parts[..i].iter().any(|(c, _)| c == cusp) {
                return bad(format!("cusp {} listed twice", cusp.label()));
            }
            if let Some((&n, _)) = terms.iter().find(|(&n, _)| n >= 0) {
                return bad(format!("cusp index {n} must be negative"));
            }
        }
        for (i, p) in self.elliptic_parts.iter().enumerate() {
            if !(p.tau.im > 0.0) {
                return bad(format!("point {} is not in the upper half-plane", p.tau));
            }
            let w = omega(self.level, p.tau);
            if w != p.omega {
                return bad(format!("point {} has stabiliser order {w}, not {}", p.tau, p.omega));
            }
            for &n in p.terms.keys() {
                if n >= 0 {
                    return bad(format!("elliptic index {n} must be negative"));
                }
                if (n - (self.k as i64 - 1)).rem_euclid(w as i64) != 0 {
                    return bad(format!("index {n} at {} violates n = k-1 (mod {w})", p.tau));
                }
            }
            for q in &self.elliptic_parts[..i] {
                if arith::points_equivalent(self.level, p.tau, q.tau, 1e-9).is_some() {
                    return bad(format!("points {} and {} are Gamma0(N)-equivalent", q.tau, p.tau));
                }
            }
        }
        Ok(())
    }
}

/// Fourier expansion at infinity of
/// `sum a_rho(n) P^rho_{kappa,n,N} + sum b_tau(n) Y_{0,n,N}(tau, .)`.
/// Pole terms need `k = 1`.
pub fn assemble(spec: &PrincipalPartSpec, j_max: u64, c_max: u64) -> Result<FourierExpansion> {
    spec.validate()?;
    let kappa = spec.weight();
    let has_poles = spec.elliptic_parts.iter().any(|p| !p.terms.is_empty());
    if has_poles && spec.k != 1 {
        return Err(BasisError::InvalidSpec("poles in the upper half-plane are supported for k = 1 only".into()));
    }
    let mut out = FourierExpansion::zero(Cusp::infinity(spec.level), kappa);
    out.j_max = j_max;
    for (cusp, terms) in &spec.cusp_parts {
        for (&n, &a) in terms {
            let p = maass_poincare_coeffs(spec.level, cusp, n, kappa, j_max, c_max)?;
            out.add_scaled(&p, a)?;
        }
    }
    for part in &spec.elliptic_parts {
        for (&n, &b) in &part.terms {
            let y = y_form_coeffs(spec.level, part.tau, n, j_max, c_max)?;
            out.add_scaled(&y, b)?;
        }
    }
    Ok(out)
}

/// Cutoffs of the absolutely convergent weight `2k` series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Psi2kCutoffs {
    /// Largest lower-left entry `c` summed.
    pub c_max: u64,
    /// Directly summed window of each translation sum; the rest is an
    /// Euler-Maclaurin tail.
    pub window: u64,
}

impl Default for Psi2kCutoffs {
    fn default() -> Self {
        Psi2kCutoffs { c_max: 60, window: 8 }
    }
}

/// `Psi_{2k,N}(frak_z, z) = sum_{M in Gamma0(N)} j(M, frak_z)^{-2k} (M frak_z - conj z)^{1-2k} (M frak_z - z)^{-1}`
/// for `k >= 2`, summed over `+-M` and truncated at `c <= c_max`.  For each
/// `c` and residue `d0 (mod c)` the sums over `d = d0 + c t` and over the
/// translations of `M frak_z` are done as lattice sums.
pub fn psi2k_direct(level: u64, k: u32, frak_z: C64, z: C64, cutoffs: &Psi2kCutoffs) -> Result<C64> {
    if k < 2 {
        return Err(BasisError::InvalidInput(format!("k = {k}: the series converges absolutely only for k >= 2")));
    }
    if !(frak_z.im > 0.0) || !(z.im > 0.0) {
        return Err(BasisError::InvalidInput("both points must lie in the upper half-plane".into()));
    }
    if let Some(m) = arith::points_equivalent(level, frak_z, z, 1e-9) {
        return Err(BasisError::PoleHit(format!("{m} maps {frak_z} onto {z}")));
    }
    let p = 1 - 2 * k as i32;
    let window = cutoffs.window as f64;
    let translations = |w: C64| -> C64 {
        let f = |b: f64| {
            let u = w + b;
            (u - z.conj()).powi(p) / (u - z)
        };
        lattice_sum(&f, z.re - w.re, window)
    };
    let per_c: Vec<C64> = (1..=cutoffs.c_max / level)
        .into_par_iter()
        .map(|i| {
            let c = i * level;
            let ci = c as i64;
            let mut acc = ComplexSum::new();
            for d0 in 0..ci {
                if arith::gcd(d0, ci) != 1 {
                    continue;
                }
                let a0 = arith::mod_inverse(d0, c).unwrap_or(0) as f64;
                let cf = c as f64;
                let g = |t: f64| {
                    let j = frak_z * cf + d0 as f64 + cf * t;
                    j.powi(-2 * k as i32) * translations(a0 / cf - 1.0 / (cf * j))
                };
                acc.add(lattice_sum(&g, -(frak_z.re * cf + d0 as f64) / cf, window));
            }
            acc.value()
        })
        .collect();
    let mut total = ComplexSum::new();
    total.add(translations(frak_z));
    for v in per_c {
        total.add(v);
    }
    Ok(2.0 * total.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluate_antiholomorphic_terms_stay_finite() {
        let mut ex = FourierExpansion::zero(Cusp::infinity(1), 0);
        ex.antiholomorphic.insert(-2, c(0.5, -0.25));
        let w = c(0.3, 0.7);
        let x = 4.0 * PI * 2.0 * w.im;
        let expected = c(0.5, -0.25) * crate::specialfn::incomplete_gamma_int(1, x) * e(w * -2.0);
        assert!((ex.evaluate(w) - expected).norm() < 1e-14 * expected.norm());

        ex.antiholomorphic.insert(-60, c(1.0, 0.0));
        let v = ex.evaluate(c(0.3, 3.2));
        assert!(v.re.is_finite() && v.im.is_finite());
    }

    #[test]
    fn d_operator_order_zero_is_identity() {
        let tau0 = c(0.2, 1.1);
        let mut ts = TermSum::new();
        ts.push(c(1.0, 2.0), 2, 3, tau0);
        ts.push(c(-0.5, 0.0), 0, -1, tau0);
        let out = d_operator(&ts, tau0, 0).unwrap();
        let w = c(0.3, 0.8);
        assert!((out.evaluate(w) - ts.evaluate(w)).norm() < 1e-14);
    }

    #[test]
    fn d_operator_kills_constants() {
        let tau0 = c(0.0, 1.0);
        let out = d_operator(&TermSum::single(c(1.0, 0.0), 0, 0, tau0), tau0, 1).unwrap();
        assert!(out.terms.iter().all(|t| t.coeff.norm() == 0.0));
        assert_eq!(out.evaluate(c(0.4, 0.7)), c(0.0, 0.0));
    }

    #[test]
    fn d_operator_single_exponential() {
        let tau0 = c(0.0, 1.0);
        let out = d_operator(&TermSum::single(c(1.0, 0.0), 0, 1, tau0), tau0, 1).unwrap();
        for w in [c(0.1, 0.9), c(-0.3, 1.4)] {
            let want = PI * (w + c(0.0, 1.0)).powi(2) * e(w);
            assert!((out.evaluate(w) - want).norm() < 1e-13);
        }
        // derivative in X = (frak_z - tau0)/(frak_z - conj tau0) at X = 0
        let frak = |x: C64| (tau0 - tau0.conj() * x) / (1.0 - x);
        let h = 1e-4;
        let fd = (e(frak(c(h, 0.0))) - e(frak(c(-h, 0.0)))) / (2.0 * h);
        assert!((out.evaluate(tau0) - fd).norm() < 1e-6);
    }

    #[test]
    fn d_operator_matches_x_derivatives() {
        let tau0 = c(0.15, 0.9);
        let mut ts = TermSum::new();
        ts.push(c(0.7, -0.2), 2, 1, tau0);
        ts.push(c(1.3, 0.4), 2, -1, tau0);
        ts.push(c(-0.4, 0.1), 3, 2, tau0);
        let frak = |x: C64| (tau0 - tau0.conj() * x) / (1.0 - x);
        let f = |x: C64| ts.evaluate(frak(x));
        let h = 1e-3;
        let d1 = d_operator(&ts, tau0, 1).unwrap().evaluate(tau0);
        let fx = |t: f64| f(c(t, 0.0));
        let fd1 = (8.0 * (fx(h) - fx(-h)) - (fx(2.0 * h) - fx(-2.0 * h))) / (12.0 * h);
        assert!((d1 - fd1).norm() < 1e-6 * d1.norm().max(1.0));
        let d2 = d_operator(&ts, tau0, 2).unwrap().evaluate(tau0);
        let fd2 = (16.0 * (fx(h) + fx(-h)) - (fx(2.0 * h) + fx(-2.0 * h)) - 30.0 * fx(0.0)) / (12.0 * h * h);
        assert!((d2 - fd2).norm() < 1e-5 * d2.norm().max(1.0));
    }

    #[test]
    fn d_operator_rejects_foreign_base_points() {
        let ts = TermSum::single(c(1.0, 0.0), 0, 1, c(0.0, 1.0));
        assert_eq!(d_operator(&ts, c(0.0, 2.0), 1), Err(BasisError::BasePointMismatch));
    }

    #[test]
    fn elliptic_point_rejects_odd_index() {
        let r = y_form_coeffs(1, c(0.0, 1.0), -1, 3, 50);
        assert_eq!(r.unwrap_err(), BasisError::CongruenceViolation { m: -1, omega: 2 });
        let rho = c(-0.5, 3f64.sqrt() / 2.0);
        assert!(matches!(y_form_coeffs(1, rho, -2, 3, 50), Err(BasisError::CongruenceViolation { m: -2, omega: 3 })));
    }

    #[test]
    fn empty_spec_assembles_to_zero() {
        let spec = PrincipalPartSpec::new(11, 1);
        let f = assemble(&spec, 5, 100).unwrap();
        assert!(f.holomorphic.is_empty() && f.antiholomorphic.is_empty());
    }

    #[test]
    fn single_cusp_term_matches_poincare_series() {
        let mut spec = PrincipalPartSpec::new(1, 1);
        spec.add_cusp_term(Cusp::infinity(1), -1, c(1.0, 0.0));
        let f = assemble(&spec, 4, 300).unwrap();
        let p = maass_poincare_coeffs(1, &Cusp::infinity(1), -1, 0, 4, 300).unwrap();
        assert_eq!(f.holomorphic, p.holomorphic);
    }

    #[test]
    fn level_one_poincare_constant_term() {
        let p = maass_poincare_coeffs(1, &Cusp::infinity(1), -1, 0, 1, 10).unwrap();
        assert!((p.hol(0) - c(24.0, 0.0)).norm() < 1e-12);
        assert_eq!(p.hol(-1), c(1.0, 0.0));
    }

    #[test]
    fn spec_validation() {
        let mut spec = PrincipalPartSpec::new(1, 1);
        spec.add_elliptic_term(c(0.0, 1.0), -1, c(1.0, 0.0));
        assert!(matches!(spec.validate(), Err(BasisError::InvalidSpec(_))));
        let mut spec = PrincipalPartSpec::new(11, 1);
        spec.add_elliptic_term(c(0.1, 0.9), -1, c(1.0, 0.0));
        spec.add_elliptic_term(c(1.1, 0.9), -1, c(1.0, 0.0));
        assert!(matches!(spec.validate(), Err(BasisError::InvalidSpec(_))));
        let mut spec = PrincipalPartSpec::new(11, 1);
        spec.add_elliptic_term(c(0.1, 0.9), -1, c(1.0, 0.0));
        spec.add_elliptic_term(c(0.3, 1.2), -2, c(1.0, 0.0));
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn direct_series_symmetries() {
        let cut = Psi2kCutoffs::default();
        let (fz, z) = (c(0.21, 1.05), c(-0.17, 0.83));
        let base = psi2k_direct(1, 2, fz, z, &cut).unwrap();
        let shifted = psi2k_direct(1, 2, fz + 1.0, z, &cut).unwrap();
        assert!((base - shifted).norm() < 1e-8 * base.norm(), "{base} {shifted}");
        let s = crate::arith::Mat2::S;
        let moved = psi2k_direct(1, 2, s.apply(fz), z, &cut).unwrap();
        let want = s.j(fz).powi(4) * base;
        assert!((moved - want).norm() < 1e-5 * base.norm(), "{moved} {want}");
        let finer = Psi2kCutoffs { c_max: 2 * cut.c_max, window: cut.window };
        let refined = psi2k_direct(1, 2, fz, z, &finer).unwrap();
        assert!((refined - base).norm() < 1e-5 * base.norm(), "{refined} {base}");
        assert!(matches!(psi2k_direct(1, 2, fz, s.apply(fz), &cut), Err(BasisError::PoleHit(_))));
        assert!(matches!(psi2k_direct(1, 1, fz, z, &cut), Err(BasisError::InvalidInput(_))));
    }
}
