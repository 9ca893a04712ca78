//! Classical and cusp-attached Kloosterman sums, and weighted sums of them
//! over the modulus.
//!
//! Long modulus sums are evaluated on grids of index pairs: for every modulus
//! the units and their inverses are tabulated once and each grid entry is
//! reached by incremental index arithmetic into a cosine table.  Moduli are
//! processed in fixed blocks; block partial sums are reduced in ascending
//! order, so results do not depend on the number of worker threads.

use std::f64::consts::PI;

use num_complex::ComplexFloat;
use rayon::prelude::*;

use crate::arith::{self, cusp_width, ell_splits, gcd, mod_inverse, totient, ArithError};
use crate::numeric::{Accumulator, NeumaierSum, Precision, C64};
use crate::specialfn::zeta;

/// Units modulo `c` paired with their inverses (batch inversion through
/// prefix products, so only one extended-gcd inversion per modulus).
pub(crate) fn unit_pairs(c: u64) -> Vec<(u64, u64)> {
    if c == 1 {
        return vec![(0, 0)];
    }
    let mut is_unit = vec![true; c as usize];
    is_unit[0] = false;
    for (p, _) in arith::factorize(c) {
        let mut k = p;
        while k < c {
            is_unit[k as usize] = false;
            k += p;
        }
    }
    let units: Vec<u64> = (1..c).filter(|&d| is_unit[d as usize]).collect();
    let cc = c as u128;
    let mut prefix = Vec::with_capacity(units.len());
    let mut acc = 1u128;
    for &d in &units {
        acc = acc * d as u128 % cc;
        prefix.push(acc as u64);
    }
    let mut inv = mod_inverse(acc as i64, c).expect("product of units is a unit") as u128;
    let mut out = vec![(0, 0); units.len()];
    for i in (0..units.len()).rev() {
        let before = if i == 0 { 1 } else { prefix[i - 1] as u128 };
        out[i] = (units[i], (inv * before % cc) as u64);
        inv = inv * units[i] as u128 % cc;
    }
    out
}

fn cos_table(c: u64) -> Vec<f64> {
    (0..c).map(|k| (2.0 * PI * k as f64 / c as f64).cos()).collect()
}

/// Classical Kloosterman sum `K(m, n; c) = sum_{a d = 1 (c)} e((n a + m d)/c)`.
pub fn kloosterman(m: i64, n: i64, c: u64) -> f64 {
    assert!(c >= 1, "modulus must be positive");
    let ci = c as i64;
    let (mr, nr) = (m.rem_euclid(ci) as u128, n.rem_euclid(ci) as u128);
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for (d, a) in unit_pairs(c) {
        let k = ((nr * a as u128 + mr * d as u128) % c as u128) as f64;
        let (s, co) = (2.0 * PI * k / c as f64).sin_cos();
        re.add(co);
        im.add(s);
    }
    let (re, im) = (re.value(), im.value());
    assert!(im.abs() < 1e-10, "classical Kloosterman sum has imaginary part {im}");
    re
}

fn check_cusp(level: u64, alpha: i64, gamma: u64) -> Result<(), ArithError> {
    if gamma == 0 || !level.is_multiple_of(gamma) {
        return Err(ArithError::InvalidCuspData(format!("{gamma} does not divide {level}")));
    }
    if gcd(alpha, gamma as i64) != 1 {
        return Err(ArithError::InvalidCuspData(format!("gcd({alpha}, {gamma}) != 1")));
    }
    if gcd(alpha, level as i64) != 1 {
        return Err(ArithError::InvalidCuspData(format!("numerator {alpha} must be coprime to the level {level}")));
    }
    Ok(())
}

/// Cusp Kloosterman sum `K_{alpha,gamma}(n, j; c)` by direct enumeration:
/// `d` runs over units mod `c`, `a = d^{-1} + k c` for `0 <= k < l`, subject to
/// `c = -a alpha gamma (mod N)`, with phase `e_{l c}(n l d + j a)`.
pub fn cusp_kloosterman(level: u64, alpha: i64, gamma: u64, n: i64, j: i64, c: u64) -> Result<C64, ArithError> {
    check_cusp(level, alpha, gamma)?;
    let l = cusp_width(level, gamma);
    let modulus = (l * c) as i128;
    let ni = level as i128;
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for (d, dbar) in unit_pairs(c) {
        for k in 0..l {
            let a = dbar as i128 + (k * c) as i128;
            if (c as i128 + a * alpha as i128 * gamma as i128).rem_euclid(ni) != 0 {
                continue;
            }
            let idx = (n as i128 * l as i128 * d as i128 + j as i128 * a).rem_euclid(modulus);
            let (s, co) = (2.0 * PI * idx as f64 / modulus as f64).sin_cos();
            re.add(co);
            im.add(s);
        }
    }
    Ok(C64::new(re.value(), im.value()))
}

/// Precomputed data for rewriting cusp sums through classical sums.
#[derive(Clone, Debug)]
struct CuspRewrite {
    l1: u64,
    l2: u64,
    n1: u64,
    gamma: u64,
    /// `[l2 alpha]_{N1}`
    inv_l2_alpha: u64,
    /// `[l1 gamma alpha]_{l2}`
    inv_l1_gamma_alpha: u64,
}

impl CuspRewrite {
    fn new(level: u64, alpha: i64, gamma: u64) -> Result<Self, ArithError> {
        check_cusp(level, alpha, gamma)?;
        let l = cusp_width(level, gamma);
        let s = ell_splits(l, gamma, level)?;
        let inv_l2_alpha = mod_inverse(s.l2 as i64 * alpha, s.n1)?;
        let inv_l1_gamma_alpha = mod_inverse((s.l1 * gamma) as i64 * alpha, s.l2)?;
        Ok(CuspRewrite { l1: s.l1, l2: s.l2, n1: s.n1, gamma, inv_l2_alpha, inv_l1_gamma_alpha })
    }

    /// `false` when the level congruence has no solutions for this modulus.
    fn admissible(&self, c: u64) -> bool {
        c.is_multiple_of(self.gamma) && gcd(self.l2 as i64, c as i64) == 1
    }
}

/// `K_{alpha,gamma}(m, n; c)` through classical sums:
/// `(1/N1) e_{l2}(-[l1 gamma alpha]_{l2} n) sum_{r mod N1} e_{N1}(r [l2 alpha]_{N1} c/gamma)
///  K(l1 [l2]_{l1 c} m, n + l1 c r / N1; l1 c)`.
/// When `gamma` does not divide `c`, or `l2` shares a factor with `c`, the level
/// congruence is unsolvable and the sum is zero.
pub fn cusp_kloosterman_via_classical(
    level: u64,
    alpha: i64,
    gamma: u64,
    m: i64,
    n: i64,
    c: u64,
) -> Result<C64, ArithError> {
    let rw = CuspRewrite::new(level, alpha, gamma)?;
    if !rw.admissible(c) {
        return Ok(C64::new(0.0, 0.0));
    }
    let big_c = rw.l1 * c;
    let inv_l2 = mod_inverse(rw.l2 as i64, big_c)? as i64;
    let step = (big_c / rw.n1) as i64;
    let mut total = C64::new(0.0, 0.0);
    for r in 0..rw.n1 {
        let ph = phase(r as i64 * rw.inv_l2_alpha as i64 * (c / rw.gamma) as i64, rw.n1);
        let k = kloosterman(
            (rw.l1 as i64 * inv_l2 % big_c as i64) * m.rem_euclid(big_c as i64) % big_c as i64,
            n + step * r as i64,
            big_c,
        );
        total += ph * k;
    }
    Ok(total * phase(-(rw.inv_l1_gamma_alpha as i64) * n, rw.l2) / rw.n1 as f64)
}

/// `e(k / q)`.
fn phase(k: i64, q: u64) -> C64 {
    let r = k.rem_euclid(q as i64) as f64 / q as f64;
    let (s, c) = (2.0 * PI * r).sin_cos();
    C64::new(c, s)
}

/// Closed form of `K_{alpha,gamma}(0, 0; c)`: zero unless `gcd(c, N) = gamma`,
/// then `(A1/N1) phi(A2 c / gamma)`.
pub fn cusp_kloosterman_zero(level: u64, alpha: i64, gamma: u64, c: u64) -> Result<f64, ArithError> {
    check_cusp(level, alpha, gamma)?;
    if arith::gcd_u(c, level) != gamma {
        return Ok(0.0);
    }
    let s = ell_splits(cusp_width(level, gamma), gamma, level)?;
    Ok(s.a1 as f64 / s.n1 as f64 * totient(s.a2 * c / gamma) as f64)
}

/// Value of a modulus sum together with a heuristic bound on the omitted tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaValue {
    pub value: C64,
    /// Weil-bound tail heuristic; `f64::INFINITY` when nothing was summed.
    pub tail: f64,
}

/// Which moduli contribute, and which Kloosterman sum is attached to them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModulusRestriction {
    /// Classical sums over `c` with `N | c`.
    Classical { level: u64 },
    /// Cusp sums `K_{alpha,gamma}` over all `c >= 1`.
    Cusp { level: u64, alpha: i64, gamma: u64 },
}

/// A rectangular grid `m in m_range`, `n in n_range` of weighted modulus sums.
#[derive(Clone, Debug)]
pub struct GridSums {
    pub m_lo: i64,
    pub m_hi: i64,
    pub n_lo: i64,
    pub n_hi: i64,
    pub c_max: u64,
    values: Vec<ZetaValue>,
}

impl GridSums {
    pub fn get(&self, m: i64, n: i64) -> ZetaValue {
        assert!(
            (self.m_lo..=self.m_hi).contains(&m) && (self.n_lo..=self.n_hi).contains(&n),
            "({m}, {n}) outside the tabulated grid"
        );
        let width = (self.n_hi - self.n_lo + 1) as usize;
        self.values[(m - self.m_lo) as usize * width + (n - self.n_lo) as usize]
    }

    pub fn contains(&self, m: i64, n: i64) -> bool {
        (self.m_lo..=self.m_hi).contains(&m) && (self.n_lo..=self.n_hi).contains(&n)
    }
}

/// Classical sums `K(m0 + i dm, n0 + j dn; c)` for `i < rows`, `j < cols`,
/// written row-major into `out`.
#[allow(clippy::too_many_arguments)]
fn linear_grid_kernel(
    c: u64,
    units: &[(u64, u64)],
    costab: &[f64],
    m0: i64,
    dm: i64,
    rows: usize,
    n0: i64,
    dn: i64,
    cols: usize,
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let ci = c as i64;
    let (m0, dm, n0, dn) =
        (m0.rem_euclid(ci) as u64, dm.rem_euclid(ci) as u64, n0.rem_euclid(ci) as u64, dn.rem_euclid(ci) as u64);
    for &(d, dbar) in units {
        let step_m = dm * d % c;
        let step_n = dn * dbar % c;
        let mut row_start = (m0 * d + n0 * dbar) % c;
        for i in 0..rows {
            let row = &mut out[i * cols..(i + 1) * cols];
            let mut idx = row_start;
            for v in row.iter_mut() {
                *v += costab[idx as usize];
                idx += step_n;
                if idx >= c {
                    idx -= c;
                }
            }
            row_start += step_m;
            if row_start >= c {
                row_start -= c;
            }
        }
    }
}

const BLOCK: usize = 32;

/// Weighted modulus sums `sum_{c <= c_max} K(m, n; c) w(c, m, n)` for every
/// `(m, n)` in the grid.  `decay` is the exponent `p` with `|w| ~ c^{-p}`,
/// used only for the tail heuristic.
#[allow(clippy::too_many_arguments)]
pub fn grid_sums(
    restriction: ModulusRestriction,
    c_max: u64,
    m_range: (i64, i64),
    n_range: (i64, i64),
    weight: &(dyn Fn(u64, i64, i64) -> C64 + Sync),
    decay: f64,
    precision: Precision,
) -> Result<GridSums, ArithError> {
    let (m_lo, m_hi) = m_range;
    let (n_lo, n_hi) = n_range;
    assert!(m_lo <= m_hi && n_lo <= n_hi, "empty grid");
    let rows = (m_hi - m_lo + 1) as usize;
    let cols = (n_hi - n_lo + 1) as usize;
    let (step, rewrite) = match restriction {
        ModulusRestriction::Classical { level } => (level, None),
        ModulusRestriction::Cusp { level, alpha, gamma } => (1, Some(CuspRewrite::new(level, alpha, gamma)?)),
    };
    let moduli: Vec<u64> = (1..=c_max / step).map(|k| k * step).collect();
    let blocks: Vec<&[u64]> = moduli.chunks(BLOCK).collect();

    let block_sums: Vec<Vec<(f64, f64)>> = blocks
        .par_iter()
        .map(|block| {
            let mut acc_re = vec![NeumaierSum::new(); rows * cols];
            let mut acc_im = vec![NeumaierSum::new(); rows * cols];
            let mut kvals = vec![0.0; rows * cols];
            let mut kc = vec![C64::new(0.0, 0.0); rows * cols];
            for &c in block.iter() {
                match &rewrite {
                    None => {
                        let units = unit_pairs(c);
                        let costab = cos_table(c);
                        linear_grid_kernel(c, &units, &costab, m_lo, 1, rows, n_lo, 1, cols, &mut kvals);
                        for (slot, &k) in kc.iter_mut().zip(kvals.iter()) {
                            *slot = C64::new(k, 0.0);
                        }
                    }
                    Some(rw) => {
                        if !rw.admissible(c) {
                            continue;
                        }
                        cusp_grid(rw, c, m_lo, rows, n_lo, cols, &mut kvals, &mut kc);
                    }
                }
                for i in 0..rows {
                    let m = m_lo + i as i64;
                    for j in 0..cols {
                        let n = n_lo + j as i64;
                        let k = kc[i * cols + j];
                        if k.re == 0.0 && k.im == 0.0 {
                            continue;
                        }
                        let t = k * weight(c, m, n);
                        acc_re[i * cols + j].add(t.re);
                        acc_im[i * cols + j].add(t.im);
                    }
                }
            }
            acc_re.iter().zip(acc_im.iter()).map(|(r, i)| (r.value(), i.value())).collect()
        })
        .collect();

    let mut values = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let m = m_lo + i as i64;
        for j in 0..cols {
            let n = n_lo + j as i64;
            let mut re = Accumulator::new(precision);
            let mut im = Accumulator::new(precision);
            for b in block_sums.iter() {
                re.add(b[i * cols + j].0);
                im.add(b[i * cols + j].1);
            }
            let tail = if moduli.is_empty() {
                f64::INFINITY
            } else {
                weil_tail(c_max, step, weight(c_max.max(1), m, n).norm(), decay, gcd(m, n).max(1))
            };
            values.push(ZetaValue { value: C64::new(re.value(), im.value()), tail });
        }
    }
    Ok(GridSums { m_lo, m_hi, n_lo, n_hi, c_max, values })
}

/// Cusp sums on a grid for one admissible modulus, via the classical rewrite.
#[allow(clippy::too_many_arguments)]
fn cusp_grid(
    rw: &CuspRewrite,
    c: u64,
    m_lo: i64,
    rows: usize,
    n_lo: i64,
    cols: usize,
    scratch: &mut [f64],
    out: &mut [C64],
) {
    let big_c = rw.l1 * c;
    let units = unit_pairs(big_c);
    let costab = cos_table(big_c);
    let inv_l2 = mod_inverse(rw.l2 as i64, big_c).expect("l2 coprime to l1 c") as i64;
    let mfac = (rw.l1 as i64 * inv_l2) % big_c as i64;
    let step = (big_c / rw.n1) as i64;
    out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    for r in 0..rw.n1 {
        let ph = phase(r as i64 * rw.inv_l2_alpha as i64 * (c / rw.gamma) as i64, rw.n1);
        linear_grid_kernel(
            big_c,
            &units,
            &costab,
            mfac * m_lo.rem_euclid(big_c as i64) % big_c as i64,
            mfac,
            rows,
            n_lo + step * r as i64,
            1,
            cols,
            scratch,
        );
        for (o, &k) in out.iter_mut().zip(scratch.iter()) {
            *o += ph * k;
        }
    }
    for j in 0..cols {
        let n = n_lo + j as i64;
        let ph = phase(-(rw.inv_l1_gamma_alpha as i64) * n, rw.l2) / rw.n1 as f64;
        for i in 0..rows {
            out[i * cols + j] *= ph;
        }
    }
}

/// Tail heuristic `8 sum_{c > C, step | c} c^{0.35} sqrt(c) sqrt(g) |w(c)|`
/// with `|w(c)| = |w(C)| (c/C)^{-p}`; infinite when `p <= 1.85`.
fn weil_tail(c_max: u64, step: u64, w_at_cmax: f64, decay: f64, g: i64) -> f64 {
    if decay <= 1.85 {
        return f64::INFINITY;
    }
    let c = c_max as f64;
    8.0 * (g as f64).sqrt() * w_at_cmax * c.powf(1.85) / ((decay - 1.85) * step as f64)
}

/// `sum_{c <= c_max} K(m, n; c) c^{-s}` over the moduli selected by
/// `restriction`, ascending in `c` with compensated accumulation.
pub fn kloosterman_zeta(
    m: i64,
    n: i64,
    restriction: ModulusRestriction,
    s: f64,
    c_max: u64,
) -> Result<ZetaValue, ArithError> {
    if c_max == 0 {
        return Ok(ZetaValue { value: C64::new(0.0, 0.0), tail: f64::INFINITY });
    }
    let w = move |c: u64, _: i64, _: i64| C64::new((c as f64).powf(-s), 0.0);
    let g = grid_sums(restriction, c_max, (m, m), (n, n), &w, s, Precision::Double)?;
    Ok(g.get(m, n))
}

/// Ramanujan-sum series `sum_{N | c} K(m, 0; c) c^{-s}` for `m != 0` in
/// closed form: `sum_{d | m} d^{1-s} mu(L) L^{-s} prod_{p | L} (1 - p^{-s})^{-1} / zeta(s)`
/// with `L = N / gcd(N, d)`.  Requires `Re s > 1`.
pub fn ramanujan_zeta(level: u64, m: i64, s: C64) -> C64 {
    assert!(m != 0, "closed form needs m != 0");
    let inv_zeta = 1.0 / zeta(s);
    let mut total = C64::new(0.0, 0.0);
    for d in arith::divisors(m.unsigned_abs()) {
        let l = level / arith::gcd_u(level, d);
        let mu = arith::moebius(l);
        if mu == 0 {
            continue;
        }
        let mut euler = C64::new(1.0, 0.0);
        for (p, _) in arith::factorize(l) {
            euler /= C64::new(1.0, 0.0) - (p as f64).powc(-s);
        }
        total += (d as f64).powc(C64::new(1.0, 0.0) - s) * mu as f64 * (l as f64).powc(-s) * euler;
    }
    total * inv_zeta
}

/// `sum_{N | c} phi(c) c^{-s} = zeta(s-1)/zeta(s) * phi(N) N^{-s} prod_{p | N} (1 - p^{-s})^{-1}`.
pub fn totient_zeta(level: u64, s: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    let mut euler = one;
    for (p, _) in arith::factorize(level) {
        euler /= one - (p as f64).powc(-s);
    }
    zeta(s - one) / zeta(s) * totient(level) as f64 * (level as f64).powc(-s) * euler
}
