//! Pointwise analysis of forms given as evaluators: expansions around points
//! of the upper half-plane, numerical `xi` and Laplace operators, contour
//! residues and modularity residuals.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::Mat2;
use crate::numeric::{ComplexSum, C64};
use crate::poincarebasis::{d_operator, TermSum};
use crate::specialfn::{incomplete_beta, SpecialFnError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("two-radius system is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("finite-difference step {h} too large at height {y}")]
    StepTooLarge { h: f64, y: f64 },
    #[error("contour passes through or near a pole: {0}")]
    ContourHitsPole(String),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

type Result<T> = std::result::Result<T, AnalysisError>;

/// A pointwise evaluator of a function on the upper half-plane.
pub type Evaluator<'a> = &'a (dyn Fn(C64) -> C64 + Sync);

/// `X_frak_z(z) = (z - frak_z)/(z - conj frak_z)`.
pub fn xmap(frak_z: C64, z: C64) -> Result<C64> {
    let den = z - frak_z.conj();
    if den.norm() == 0.0 {
        return Err(AnalysisError::DomainError(format!("z = conj({frak_z})")));
    }
    Ok((z - frak_z) / den)
}

/// Inverse of [`xmap`]: the point `z` with `X_frak_z(z) = x`.
pub fn xmap_inverse(frak_z: C64, x: C64) -> C64 {
    (frak_z - frak_z.conj() * x) / (1.0 - x)
}

/// Expansion of a weight `2 - 2k` harmonic function around `center`:
/// `(z - conj c)^{2k-2} [sum a_n X^n + sum_{n <= -1} b_n beta(r^2; -n, 2k-1) X^n]`
/// with `X = X_center(z)`, `r = |X|`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticExpansion {
    pub center: C64,
    pub weight: i64,
    pub omega: u32,
    pub a: BTreeMap<i64, C64>,
    pub b: BTreeMap<i64, C64>,
    /// Outer sampling radius in the `X` variable.
    pub radius: f64,
    /// Largest relative mismatch between the two radii for `0 <= n <= 3`;
    /// large values indicate terms outside the ansatz.
    pub consistency_residual: f64,
}

impl EllipticExpansion {
    fn k(&self) -> i64 {
        (2 - self.weight) / 2
    }

    pub fn evaluate(&self, z: C64) -> Result<C64> {
        let x = xmap(self.center, z)?;
        let k = self.k();
        let r2 = x.norm_sqr();
        let mut acc = ComplexSum::new();
        for (&n, &a) in &self.a {
            acc.add(a * x.powi(n as i32));
        }
        for (&n, &b) in &self.b {
            acc.add(b * incomplete_beta(r2, -n as f64, (2 * k - 1) as f64)? * x.powi(n as i32));
        }
        Ok((z - self.center.conj()).powi(2 * k as i32 - 2) * acc.value())
    }
}

/// Angular Fourier coefficients `c_n` of `F(z) (z - conj c)^{2-2k}` on the
/// circle `|X| = rho`, for `n` in `lo..=hi`.
fn angular_coeffs(f: Evaluator, center: C64, k: i64, rho: f64, samples: usize, lo: i64, hi: i64) -> Result<Vec<C64>> {
    let values: Vec<C64> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
            let x = C64::from_polar(rho, theta);
            let z = xmap_inverse(center, x);
            f(z) * (z - center.conj()).powi(2 - 2 * k as i32)
        })
        .collect();
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(AnalysisError::ContourHitsPole(format!("non-finite value {v} on |X| = {rho}")));
    }
    Ok((lo..=hi)
        .map(|n| {
            let mut acc = ComplexSum::new();
            for (j, v) in values.iter().enumerate() {
                let theta =
                    2.0 * std::f64::consts::PI * (n * j as i64).rem_euclid(samples as i64) as f64 / samples as f64;
                acc.add(v * C64::from_polar(1.0, -theta));
            }
            acc.value() / samples as f64
        })
        .collect())
}

/// Coefficients `a_n`, `b_n` (`lo <= n <= hi`) of the expansion of `f`
/// around `center` (see [`EllipticExpansion`]), from angular Fourier analysis
/// on the circles `|X| = r` and `|X| = r/2`.  For `n <= -1` the two radii
/// separate `a_n` from `b_n`; for `n >= 0` only `a_n` is present.
/// `samples` equally spaced angles are used per circle.
#[allow(clippy::too_many_arguments)]
pub fn elliptic_coeffs(
    f: Evaluator,
    center: C64,
    k: i64,
    omega: u32,
    n_range: (i64, i64),
    r: f64,
    samples: usize,
) -> Result<EllipticExpansion> {
    if !(r > 0.0 && r < 1.0) {
        return Err(AnalysisError::DomainError(format!("radius {r} must lie in (0, 1)")));
    }
    if !(center.im > 0.0) {
        return Err(AnalysisError::DomainError(format!("center {center} must lie in the upper half-plane")));
    }
    let (lo, hi) = n_range;
    let hi_c = hi.max(3);
    let r2 = 0.5 * r;
    let c1 = angular_coeffs(f, center, k, r, samples, lo, hi_c)?;
    let c2 = angular_coeffs(f, center, k, r2, samples, lo, hi_c)?;
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    let mut residual: f64 = 0.0;
    // coefficients below this size are noise and not compared
    let floor = 1e-9 * c1.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let bparam = (2 * k - 1) as f64;
    for (i, n) in (lo..=hi_c).enumerate() {
        if n <= -1 {
            let p1 = r.powi(n as i32);
            let p2 = r2.powi(n as i32);
            let q1 = incomplete_beta(r * r, -n as f64, bparam)? * p1;
            let q2 = incomplete_beta(r2 * r2, -n as f64, bparam)? * p2;
            // column-normalised condition number of [[p1, q1], [p2, q2]]
            let (na, nb) = ((p1 * p1 + p2 * p2).sqrt(), (q1 * q1 + q2 * q2).sqrt());
            let m = [[p1 / na, q1 / nb], [p2 / na, q2 / nb]];
            let cond = condition_2x2(m);
            if cond > 1e6 {
                return Err(AnalysisError::IllConditioned(cond));
            }
            let det = p1 * q2 - p2 * q1;
            a.insert(n, (c1[i] * q2 - c2[i] * q1) / det);
            b.insert(n, (p1 * c2[i] - p2 * c1[i]) / det);
        } else {
            let an = c1[i] / r.powi(n as i32);
            if n <= 3 {
                let alt = c2[i] / r2.powi(n as i32);
                let scale = an.norm().max(alt.norm()).max(floor);
                residual = residual.max((an - alt).norm() / scale);
            }
            if n <= hi {
                a.insert(n, an);
            }
        }
    }
    Ok(EllipticExpansion { center, weight: 2 - 2 * k, omega, a, b, radius: r, consistency_residual: residual })
}

/// 2-norm condition number of a real 2x2 matrix.
fn condition_2x2(m: [[f64; 2]; 2]) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let fro2 = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    if det == 0.0 {
        return f64::INFINITY;
    }
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let smax = ((fro2 + disc) / 2.0).sqrt();
    let smin = ((fro2 - disc) / 2.0).max(0.0).sqrt();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Coefficients `a_g(n)`, `0 <= n <= n_max`, of
/// `g(z) (z - conj frak_z)^{2k} = sum_n a_g(n) X_frak_z(z)^n` for a
/// holomorphic `g(z) = sum_m q_coeffs[m] e(m z)`, by iterating the exact
/// derivative in `X` on the q-series.
pub fn cusp_form_elliptic_coeffs(q_coeffs: &[C64], frak_z: C64, k: u32, n_max: usize) -> Vec<C64> {
    let mut ts = TermSum::new();
    for (m, &c) in q_coeffs.iter().enumerate() {
        if c != C64::new(0.0, 0.0) {
            ts.push(c, 2 * k, m as i64, frak_z);
        }
    }
    let mut out = Vec::with_capacity(n_max + 1);
    let mut current = ts;
    let mut fact = 1.0;
    for n in 0..=n_max {
        if n > 0 {
            current = d_operator(&current, frak_z, 1).expect("shared base point");
            fact *= n as f64;
        }
        out.push(current.evaluate(frak_z) / fact);
    }
    out
}

fn check_step(z: C64, h: f64) -> Result<()> {
    if !(h > 0.0) || 4.0 * h >= z.im {
        return Err(AnalysisError::StepTooLarge { h, y: z.im });
    }
    Ok(())
}

/// Default finite-difference step `1e-3 min(1, y)`.
pub fn default_step(z: C64) -> f64 {
    1e-3 * z.im.min(1.0)
}

/// `d/d conj(z) = (d_x + i d_y)/2` by central differences with one
/// Richardson step (`h` and `h/2`).
fn dbar(f: Evaluator, z: C64, h: f64) -> C64 {
    let central = |h: f64| {
        let dx = (f(z + h) - f(z - h)) / (2.0 * h);
        let dy = (f(z + C64::new(0.0, h)) - f(z - C64::new(0.0, h))) / (2.0 * h);
        0.5 * (dx + C64::new(0.0, 1.0) * dy)
    };
    (4.0 * central(0.5 * h) - central(h)) / 3.0
}

/// `xi_kappa F = 2 i y^kappa conj(dF/d conj(z))`.
pub fn xi_numeric(f: Evaluator, kappa: i64, z: C64, h: f64) -> Result<C64> {
    check_step(z, h)?;
    Ok(C64::new(0.0, 2.0) * z.im.powi(kappa as i32) * dbar(f, z, h).conj())
}

/// `Delta_kappa F = -y^2 (F_xx + F_yy) + i kappa y (F_x + i F_y)` with the
/// nine-point Laplacian stencil and one Richardson step.
pub fn laplacian_numeric(f: Evaluator, kappa: i64, z: C64, h: f64) -> Result<C64> {
    check_step(z, h)?;
    let i = C64::new(0.0, 1.0);
    let apply = |h: f64| {
        let at = |dx: f64, dy: f64| f(z + C64::new(dx, dy));
        let c = at(0.0, 0.0);
        let (e, w, n, s) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
        let corners = at(h, h) + at(-h, h) + at(h, -h) + at(-h, -h);
        let lap = (4.0 * (e + w + n + s) + corners - 20.0 * c) / (6.0 * h * h);
        let fx = (e - w) / (2.0 * h);
        let fy = (n - s) / (2.0 * h);
        -z.im * z.im * lap + i * (kappa as f64) * z.im * (fx + i * fy)
    };
    Ok((4.0 * apply(0.5 * h) - apply(h)) / 3.0)
}

/// `(2 pi i)^{-1} \oint F(w) dw` over the circle `|w - z0| = radius` by the
/// trapezoidal rule (see [`contour_coefficient`]).
pub fn residue_in_zhbar(f: Evaluator, z0: C64, radius: f64) -> Result<C64> {
    contour_coefficient(f, z0, radius, -1)
}

/// Laurent coefficient of `(w - z0)^n` of `F` around `z0`:
/// `(2 pi i)^{-1} \oint F(w) (w - z0)^{-n-1} dw` by the trapezoidal rule,
/// starting with 32 nodes and doubling until two successive values agree to
/// `1e-9` relative to the mean of `|F| radius^{-n}` (at most 2048 nodes).
/// The circle must not enclose other singularities.
pub fn contour_coefficient(f: Evaluator, z0: C64, radius: f64, n: i64) -> Result<C64> {
    if !(radius > 0.0) {
        return Err(AnalysisError::DomainError(format!("radius {radius} must be positive")));
    }
    let sample = |count: usize| -> Result<(C64, f64)> {
        let values: Vec<C64> = (0..count)
            .into_par_iter()
            .map(|j| {
                let u = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / count as f64);
                f(z0 + radius * u) * u.powi(-n as i32)
            })
            .collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(AnalysisError::ContourHitsPole(format!("non-finite value {v}")));
        }
        let mut acc = ComplexSum::new();
        let mut size = 0.0;
        for v in values {
            acc.add(v);
            size += v.norm();
        }
        let scale = radius.powi(-n as i32) / count as f64;
        Ok((acc.value() * scale, size * scale))
    };
    let mut count = 32;
    let (mut prev, _) = sample(count)?;
    while count < 2048 {
        count *= 2;
        let (next, size) = sample(count)?;
        if (next - prev).norm() <= 1e-9 * size {
            return Ok(next);
        }
        prev = next;
    }
    Ok(prev)
}

/// `|F(M z) - j(M, z)^kappa F(z)|`.
pub fn modularity_residual(f: Evaluator, kappa: i64, m: &Mat2, z: C64) -> f64 {
    (f(m.apply(z)) - m.j(z).powi(kappa as i32) * f(z)).norm()
}
