//! Elementary number theory and the group data of Gamma0(N): index,
//! cusps with widths and scaling matrices, elliptic points, genus, and
//! equivalence tests for cusps and for points of the upper half-plane.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::C64;

/// Largest level accepted by [`group_data`].
pub const MAX_LEVEL: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("{a} is not invertible modulo {m}")]
    NotInvertible { a: i64, m: u64 },
    #[error("level {0} exceeds the supported bound {MAX_LEVEL}")]
    LevelTooLarge(u64),
    #[error("invalid cusp data: {0}")]
    InvalidCuspData(String),
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_u(a: u64, b: u64) -> u64 {
    gcd(a as i64, b as i64) as u64
}

/// Prime factorisation by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Divisors of `n` in ascending order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn totient(n: u64) -> u64 {
    assert!(n >= 1, "totient of 0");
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn moebius(n: u64) -> i32 {
    assert!(n >= 1, "moebius of 0");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn sigma1(n: u64) -> u64 {
    assert!(n >= 1, "sigma of 0");
    factorize(n).iter().map(|&(p, e)| (p.pow(e + 1) - 1) / (p - 1)).product()
}

/// Number of divisors.
pub fn num_divisors(n: u64) -> u64 {
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Inverse of `a` modulo `m` in `[0, m)`; `m = 1` gives 0.
pub fn mod_inverse(a: i64, m: u64) -> Result<u64, ArithError> {
    if m == 1 {
        return Ok(0);
    }
    let m_i = m as i64;
    let (mut r0, mut r1) = (a.rem_euclid(m_i), m_i);
    let (mut s0, mut s1) = (1i64, 0i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(ArithError::NotInvertible { a, m });
    }
    Ok(s0.rem_euclid(m_i) as u64)
}

/// Index of Gamma0(N) in SL2(Z): N prod_{p|N} (1 + 1/p).
pub fn index_mu(n: u64) -> u64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p + 1))
}

/// Integer 2x2 matrix `(a b; c d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1, b: 0, c: 0, d: 1 };
    pub const S: Mat2 = Mat2 { a: 0, b: -1, c: 1, d: 0 };
    pub const T: Mat2 = Mat2 { a: 1, b: 1, c: 0, d: 1 };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> Mat2 {
        Mat2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn translation(n: i64) -> Mat2 {
        Mat2::new(1, n, 0, 1)
    }

    /// Moebius action on the upper half-plane.
    pub fn apply(&self, z: C64) -> C64 {
        (z * self.a as f64 + self.b as f64) / (z * self.c as f64 + self.d as f64)
    }

    /// Automorphy factor `j(M, z) = cz + d`.
    pub fn j(&self, z: C64) -> C64 {
        z * self.c as f64 + self.d as f64
    }

    pub fn in_gamma0(&self, n: u64) -> bool {
        self.det() == 1 && self.c.rem_euclid(n as i64) == 0
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}; {} {}]", self.a, self.b, self.c, self.d)
    }
}

/// A point of P^1(Q), used as input to [`cusp_equivalent`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CuspPoint {
    Infinity,
    Rational(i64, i64),
}

impl CuspPoint {
    /// Coprime pair `(a, c)` with `c >= 0`; infinity is `(1, 0)`.
    pub fn reduced(&self) -> (i64, i64) {
        match *self {
            CuspPoint::Infinity => (1, 0),
            CuspPoint::Rational(p, q) => {
                assert!(q != 0, "zero denominator");
                let g = gcd(p, q);
                let (p, q) = (p / g, q / g);
                if q < 0 {
                    (-p, -q)
                } else {
                    (p, q)
                }
            }
        }
    }
}

/// Gamma0(N)-equivalence of two cusps: (a', c') ~ (a, c) iff there is a
/// unit y mod N with c' = y c (mod N) and y a' = a (mod gcd(c, N)).
pub fn cusp_equivalent(n: u64, p1: CuspPoint, p2: CuspPoint) -> bool {
    let (a, c) = p1.reduced();
    let (a2, c2) = p2.reduced();
    let ni = n as i64;
    let g = gcd(c, ni);
    (0..ni).any(|y| gcd(y, ni) == 1 && (c2 - y * c).rem_euclid(ni) == 0 && (y * a2 - a).rem_euclid(g) == 0)
}

/// A cusp of Gamma0(N) in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cusp {
    pub level: u64,
    /// `true` for the cusp at infinity, which is kept as its own variant.
    pub infinity: bool,
    /// Canonical numerator (1 for infinity).
    pub alpha: i64,
    /// Canonical denominator dividing N (N for infinity).
    pub gamma: u64,
    pub width: u64,
    /// Determinant-one matrix with first column (alpha, gamma); identity for infinity.
    pub scaling: Mat2,
}

impl Cusp {
    pub fn infinity(level: u64) -> Cusp {
        Cusp { level, infinity: true, alpha: 1, gamma: level, width: 1, scaling: Mat2::IDENTITY }
    }

    /// Cusp `alpha/gamma` with `gamma | N`, `gamma < N`; the numerator is
    /// normalised to the canonical representative.
    pub fn finite(level: u64, alpha: i64, gamma: u64) -> Result<Cusp, ArithError> {
        if gamma == 0 || !level.is_multiple_of(gamma) {
            return Err(ArithError::InvalidCuspData(format!("{gamma} does not divide {level}")));
        }
        if gcd(alpha, gamma as i64) != 1 {
            return Err(ArithError::InvalidCuspData(format!("gcd({alpha}, {gamma}) != 1")));
        }
        if gamma == level {
            return Ok(Cusp::infinity(level));
        }
        let g = gcd_u(gamma, level / gamma) as i64;
        let u = alpha.rem_euclid(g);
        let gi = gamma as i64;
        let mut a = u;
        while gcd(a, gi) != 1 {
            a += g;
        }
        let width = cusp_width(level, gamma);
        let delta = mod_inverse(a, gamma)? as i64;
        let beta = (a * delta - 1) / gi;
        Ok(Cusp { level, infinity: false, alpha: a, gamma, width, scaling: Mat2::new(a, beta, gi, delta) })
    }

    pub fn point(&self) -> CuspPoint {
        if self.infinity {
            CuspPoint::Infinity
        } else {
            CuspPoint::Rational(self.alpha, self.gamma as i64)
        }
    }

    /// `(alpha, gamma)` entering the cusp Kloosterman sums: alpha is taken
    /// coprime to N and congruent to the canonical numerator modulo
    /// gcd(gamma, N/gamma), so it names the same cusp.  Infinity uses (1, N).
    pub fn kloosterman_params(&self) -> (i64, u64) {
        if self.infinity {
            return (1, self.level);
        }
        let n = self.level as i64;
        let g = gcd_u(self.gamma, self.level / self.gamma) as i64;
        let mut a = self.alpha.rem_euclid(g);
        if a == 0 {
            a = g;
        }
        while gcd(a, n) != 1 {
            a += g;
        }
        (a, self.gamma)
    }

    /// Matrix `L = (alpha beta; gamma delta)` with alpha from
    /// [`Cusp::kloosterman_params`] and `alpha delta = 1 (mod N)`.  Fourier
    /// expansions at this cusp are expansions of `F(L z)` in `e(z / width)`.
    pub fn expansion_matrix(&self) -> Mat2 {
        if self.infinity {
            return Mat2::IDENTITY;
        }
        let (a, g) = self.kloosterman_params();
        let n = self.level;
        let delta = mod_inverse(a, n).expect("alpha coprime to N") as i64;
        let delta = if n == 1 { 1 } else { delta };
        let beta = (a * delta - 1) / g as i64;
        Mat2::new(a, beta, g as i64, delta)
    }

    /// Short label: "inf", "0", "1/2", ...
    pub fn label(&self) -> String {
        if self.infinity {
            "inf".to_string()
        } else if self.gamma == 1 {
            format!("{}", self.alpha)
        } else {
            format!("{}/{}", self.alpha, self.gamma)
        }
    }

    /// Parses "inf" or "a/c" (or an integer) into the canonical cusp of level N
    /// that it is equivalent to.
    pub fn parse(level: u64, s: &str) -> Result<Cusp, ArithError> {
        let t = s.trim();
        let point = if t.eq_ignore_ascii_case("inf") || t == "∞" {
            CuspPoint::Infinity
        } else {
            let (p, q) = match t.split_once('/') {
                Some((p, q)) => (p.trim().parse::<i64>(), q.trim().parse::<i64>()),
                None => (t.parse::<i64>(), Ok(1)),
            };
            match (p, q) {
                (Ok(p), Ok(q)) if q != 0 => CuspPoint::Rational(p, q),
                _ => return Err(ArithError::InvalidCuspData(format!("cannot parse cusp '{s}'"))),
            }
        };
        cusps(level)
            .into_iter()
            .find(|c| cusp_equivalent(level, c.point(), point))
            .ok_or_else(|| ArithError::InvalidCuspData(format!("no cusp equivalent to '{s}'")))
    }
}

/// Width (N/gamma)/gcd(N/gamma, gamma) of a cusp with denominator gamma.
pub fn cusp_width(level: u64, gamma: u64) -> u64 {
    let q = level / gamma;
    q / gcd_u(q, gamma)
}

/// Complete list of inequivalent cusps: infinity first, then by
/// denominator and numerator.
pub fn cusps(level: u64) -> Vec<Cusp> {
    let mut out = vec![Cusp::infinity(level)];
    for c in divisors(level) {
        if c == level {
            continue;
        }
        let g = gcd_u(c, level / c) as i64;
        for u in 0..g {
            if gcd(u, g) != 1 {
                continue;
            }
            let mut a = u;
            while gcd(a, c as i64) != 1 {
                a += g;
            }
            out.push(Cusp::finite(level, a, c).expect("valid canonical cusp"));
        }
    }
    out
}

/// The splitting data of a cusp: l = l1 l2 with l1 | gamma^inf and
/// gcd(l2, gamma) = 1, N/gamma = N1 l2, and l1 gamma = A1 A2 with
/// A1 | N1^inf and gcd(A2, N1) = 1 (A1 = 1 when N1 = 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EllSplits {
    pub l1: u64,
    pub l2: u64,
    pub n1: u64,
    pub a1: u64,
    pub a2: u64,
}

/// Largest divisor of `x` supported on the primes of `base`.
fn supported_part(x: u64, base: u64) -> u64 {
    let mut part = 1;
    let mut rest = x;
    for (p, _) in factorize(base) {
        while rest.is_multiple_of(p) {
            rest /= p;
            part *= p;
        }
    }
    part
}

pub fn ell_splits(l: u64, gamma: u64, level: u64) -> Result<EllSplits, ArithError> {
    if gamma == 0 || !level.is_multiple_of(gamma) {
        return Err(ArithError::InvalidCuspData(format!("{gamma} does not divide {level}")));
    }
    let l1 = supported_part(l, gamma);
    let l2 = l / l1;
    let q = level / gamma;
    if !q.is_multiple_of(l2) {
        return Err(ArithError::InvalidCuspData(format!("width part {l2} does not divide {q}")));
    }
    let n1 = q / l2;
    let (a1, a2) = if n1 == 1 {
        (1, l1 * gamma)
    } else {
        let a1 = supported_part(l1 * gamma, n1);
        (a1, l1 * gamma / a1)
    };
    Ok(EllSplits { l1, l2, n1, a1, a2 })
}

/// Reduction to the standard fundamental domain of SL2(Z):
/// returns `(w, A)` with `z = A w`, `|Re w| <= 1/2`, `|w| >= 1`.
pub fn reduce_to_fundamental_domain(z: C64) -> (C64, Mat2) {
    let mut w = z;
    let mut a = Mat2::IDENTITY;
    for _ in 0..10_000 {
        let n = (w.re + 0.5).floor() as i64;
        if n != 0 {
            w -= n as f64;
            a = a.mul(&Mat2::translation(n));
        }
        if w.norm_sqr() < 1.0 - 1e-15 {
            w = -1.0 / w;
            a = a.mul(&Mat2::S.inverse());
        } else {
            break;
        }
    }
    (w, a)
}

/// Small determinant-one matrices used to match boundary points and find
/// stabilisers in the fundamental domain.
fn small_matrices() -> &'static [Mat2] {
    use std::sync::OnceLock;
    static LIST: OnceLock<Vec<Mat2>> = OnceLock::new();
    LIST.get_or_init(|| {
        let mut v = Vec::new();
        for a in -2..=2 {
            for b in -2..=2 {
                for c in -2..=2 {
                    for d in -2..=2 {
                        let m = Mat2::new(a, b, c, d);
                        if m.det() == 1 {
                            v.push(m);
                        }
                    }
                }
            }
        }
        v
    })
}

/// Some `M` in Gamma0(N) with `M z = w` (within `tol`), if one exists.
pub fn points_equivalent(level: u64, z: C64, w: C64, tol: f64) -> Option<Mat2> {
    let (zf, a) = reduce_to_fundamental_domain(z);
    let (wf, b) = reduce_to_fundamental_domain(w);
    // w = B wf, z = A zf; want M with M z = w, i.e. M = B E A^{-1} with E zf = wf.
    for e in small_matrices() {
        if (e.apply(zf) - wf).norm() < tol {
            let m = b.mul(e).mul(&a.inverse());
            if m.in_gamma0(level) {
                return Some(m);
            }
        }
    }
    None
}

/// Order of the stabiliser of `z` in Gamma0(N) modulo +-I (1, 2 or 3).
pub fn stabilizer_order(level: u64, z: C64, tol: f64) -> u32 {
    let (zf, a) = reduce_to_fundamental_domain(z);
    let mut order = 1;
    for e in small_matrices() {
        let tr = e.a + e.d;
        if tr.abs() >= 2 {
            continue;
        }
        if (e.apply(zf) - zf).norm() < tol {
            let m = a.mul(e).mul(&a.inverse());
            if m.in_gamma0(level) {
                order = order.max(if tr == 0 { 2 } else { 3 });
            }
        }
    }
    order
}

/// An elliptic point class of Gamma0(N).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticPoint {
    pub tau: C64,
    pub order: u32,
}

/// Elliptic classes by searching fixed points of elliptic matrices
/// `(a b; c d)` in Gamma0(N) with `|trace| <= 1` and `c <= 10 N`.
pub fn elliptic_points(level: u64) -> Vec<EllipticPoint> {
    let n = level as i64;
    let mut found: Vec<EllipticPoint> = Vec::new();
    for c in (1..=10).map(|k| k * n) {
        for a in 0..c {
            for tr in [0i64, 1, -1] {
                let d = tr - a;
                let ad1 = a * d - 1;
                if ad1 % c != 0 {
                    continue;
                }
                // fixed point of z -> (az+b)/(cz+d): c z^2 + (d-a) z - b = 0
                let disc = (tr * tr - 4) as f64;
                let tau = C64::new((a - d) as f64 / (2 * c) as f64, (-disc).sqrt() / (2 * c) as f64);
                let order = if tr == 0 { 2 } else { 3 };
                if !found.iter().any(|p| p.order == order && points_equivalent(level, p.tau, tau, 1e-9).is_some()) {
                    found.push(EllipticPoint { tau, order });
                }
            }
        }
    }
    found.sort_by(|p, q| (p.order, p.tau.re, p.tau.im).partial_cmp(&(q.order, q.tau.re, q.tau.im)).unwrap());
    found
}

/// Right coset representatives of Gamma0(N) in SL2(Z), one per point
/// `(c : d)` of P^1(Z/N).
pub fn coset_representatives(level: u64) -> Vec<Mat2> {
    let n = level as i64;
    let mut reps = Vec::new();
    let mut seen: Vec<(i64, i64)> = Vec::new();
    for c in 0..n.max(1) {
        for d in 0..n.max(1) {
            if gcd(gcd(c, d), n) != 1 {
                continue;
            }
            // normalise (c : d) by scaling with units mod N
            let key = (0..n.max(1))
                .filter(|&u| gcd(u, n) == 1)
                .map(|u| ((u * c).rem_euclid(n.max(1)), (u * d).rem_euclid(n.max(1))))
                .min()
                .unwrap_or((0, 0));
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            reps.push(lift_bottom_row(c, d, n));
        }
    }
    reps
}

/// A matrix in SL2(Z) whose bottom row is congruent to `(c, d)` mod N.
fn lift_bottom_row(c: i64, d: i64, n: i64) -> Mat2 {
    if n == 1 {
        return Mat2::IDENTITY;
    }
    let cc = if c == 0 { n } else { c };
    let mut dd = d;
    while gcd(cc, dd) != 1 {
        dd += n;
    }
    let (g, x, y) = ext_gcd(cc, dd);
    debug_assert_eq!(g, 1);
    // x c + y d = 1, so (y, -x; c, d) has determinant one
    Mat2::new(y, -x, cc, dd)
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Group-theoretic data of Gamma0(N).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupData {
    pub level: u64,
    pub index: u64,
    pub cusps: Vec<Cusp>,
    /// c_N = -6 / mu_N as a reduced fraction (numerator, denominator).
    pub c_n_fraction: (i64, u64),
    pub elliptic: Vec<EllipticPoint>,
    pub genus: u64,
    pub dim_s2: u64,
}

impl GroupData {
    pub fn c_n(&self) -> f64 {
        self.c_n_fraction.0 as f64 / self.c_n_fraction.1 as f64
    }
}

/// c_N = -6 / mu_N.
pub fn c_n(level: u64) -> f64 {
    -6.0 / index_mu(level) as f64
}

pub fn group_data(level: u64) -> Result<GroupData, ArithError> {
    if level == 0 {
        return Err(ArithError::InvalidCuspData("level 0".into()));
    }
    if level > MAX_LEVEL {
        return Err(ArithError::LevelTooLarge(level));
    }
    let mu = index_mu(level);
    let cusps = cusps(level);
    let elliptic = elliptic_points(level);
    let nu2 = elliptic.iter().filter(|p| p.order == 2).count() as i64;
    let nu3 = elliptic.iter().filter(|p| p.order == 3).count() as i64;
    // 12 g = 12 + mu - 3 nu2 - 4 nu3 - 6 nu_inf
    let twelve_g = 12 + mu as i64 - 3 * nu2 - 4 * nu3 - 6 * cusps.len() as i64;
    debug_assert!(twelve_g >= 0 && twelve_g % 12 == 0);
    let genus = (twelve_g / 12) as u64;
    let g = gcd(6, mu as i64);
    Ok(GroupData { level, index: mu, cusps, c_n_fraction: (-6 / g, mu / g as u64), elliptic, genus, dim_s2: genus })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_functions() {
        assert_eq!(totient(1), 1);
        assert_eq!(totient(12), 4);
        assert_eq!(totient(11), 10);
        assert_eq!(moebius(1), 1);
        assert_eq!(moebius(4), 0);
        assert_eq!(moebius(30), -1);
        assert_eq!(sigma1(1), 1);
        assert_eq!(sigma1(6), 12);
        assert_eq!(sigma1(11), 12);
        assert_eq!(mod_inverse(3, 7), Ok(5));
        assert_eq!(mod_inverse(1, 1), Ok(0));
        assert!(matches!(mod_inverse(2, 4), Err(ArithError::NotInvertible { .. })));
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn small_levels() {
        let g1 = group_data(1).unwrap();
        assert_eq!((g1.index, g1.cusps.len(), g1.genus), (1, 1, 0));
        assert_eq!(g1.c_n(), -6.0);
        assert_eq!(g1.elliptic.len(), 2);
        let g11 = group_data(11).unwrap();
        assert_eq!((g11.index, g11.cusps.len(), g11.genus, g11.dim_s2), (12, 2, 1, 1));
        assert_eq!(g11.c_n_fraction, (-1, 2));
        let g4 = group_data(4).unwrap();
        let labels: Vec<_> = g4.cusps.iter().map(|c| (c.label(), c.width)).collect();
        assert_eq!(labels, vec![("inf".into(), 1), ("0".into(), 4), ("1/2".into(), 1)]);
        assert!(matches!(group_data(10_001), Err(ArithError::LevelTooLarge(_))));
    }

    #[test]
    fn scaling_matrices() {
        for n in 1..=30 {
            for c in cusps(n) {
                assert_eq!(c.scaling.det(), 1);
                let l = c.expansion_matrix();
                assert_eq!(l.det(), 1);
                if !c.infinity {
                    assert_eq!((c.scaling.a, c.scaling.c), (c.alpha, c.gamma as i64));
                    assert!(cusp_equivalent(n, c.point(), CuspPoint::Rational(l.a, l.c)));
                    assert_eq!((l.a * l.d).rem_euclid(n as i64), 1 % n as i64);
                }
            }
        }
        let c0 = Cusp::parse(11, "0").unwrap();
        assert_eq!(c0.expansion_matrix(), Mat2::new(1, 0, 1, 1));
    }

    #[test]
    fn cusp_equivalence_examples() {
        assert!(cusp_equivalent(1, CuspPoint::Rational(0, 1), CuspPoint::Infinity));
        assert!(!cusp_equivalent(11, CuspPoint::Rational(0, 1), CuspPoint::Infinity));
        assert!(cusp_equivalent(4, CuspPoint::Rational(1, 2), CuspPoint::Rational(3, 2)));
    }

    #[test]
    fn ell_splits_examples() {
        let s = ell_splits(4, 2, 8).unwrap();
        assert_eq!((s.l1, s.l2, s.n1, s.a1, s.a2), (4, 1, 4, 8, 1));
        let s = ell_splits(3, 4, 12).unwrap();
        assert_eq!((s.l1, s.l2, s.n1, s.a1, s.a2), (1, 3, 1, 1, 4));
        let s = ell_splits(1, 7, 7).unwrap();
        assert_eq!((s.l1, s.l2, s.n1, s.a1, s.a2), (1, 1, 1, 1, 7));
        assert!(ell_splits(1, 3, 8).is_err());
    }

    #[test]
    fn reduction_and_stabilisers() {
        let z = C64::new(0.3, 0.01);
        let (w, a) = reduce_to_fundamental_domain(z);
        assert!(w.re.abs() <= 0.5 + 1e-12 && w.norm() >= 1.0 - 1e-12);
        assert!((a.apply(w) - z).norm() < 1e-9);
        assert_eq!(stabilizer_order(1, C64::new(0.0, 1.0), 1e-9), 2);
        assert_eq!(stabilizer_order(1, C64::new(-0.5, 3f64.sqrt() / 2.0), 1e-9), 3);
        assert_eq!(stabilizer_order(11, C64::new(0.0, 1.0), 1e-9), 1);
        assert_eq!(stabilizer_order(2, C64::new(0.5, 0.5), 1e-9), 2);
    }
}
