//! Shared numerical plumbing: compensated accumulators, quadrature rules,
//! lattice sums with Euler-Maclaurin tails, and a few complex helpers.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Arithmetic used for long modulus sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    /// Double-double accumulation of the partial sums.
    Extended,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Neumaier-compensated sum of real numbers.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Double-double accumulator (hi + lo carries roughly 32 digits).
#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleDoubleSum {
    hi: f64,
    lo: f64,
}

impl DoubleDoubleSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        let e = e + self.lo;
        let (hi, lo) = two_sum(s, e);
        self.hi = hi;
        self.lo = lo;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Real accumulator whose arithmetic is chosen by [`Precision`].
#[derive(Clone, Copy, Debug)]
pub enum Accumulator {
    Double(NeumaierSum),
    Extended(DoubleDoubleSum),
}

impl Accumulator {
    pub fn new(p: Precision) -> Self {
        match p {
            Precision::Double => Accumulator::Double(NeumaierSum::default()),
            Precision::Extended => Accumulator::Extended(DoubleDoubleSum::default()),
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        match self {
            Accumulator::Double(s) => s.add(x),
            Accumulator::Extended(s) => s.add(x),
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Accumulator::Double(s) => s.value(),
            Accumulator::Extended(s) => s.value(),
        }
    }
}

/// Compensated complex sum (componentwise Neumaier).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Sums `values` in the given order with compensation.
pub fn compensated_sum(values: impl IntoIterator<Item = C64>) -> C64 {
    let mut acc = ComplexSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `e^{2 pi i x}`.
#[inline]
pub fn e(x: C64) -> C64 {
    (2.0 * PI * I * x).exp()
}

/// `e^{2 pi i t}` for real `t`.
#[inline]
pub fn e_real(t: f64) -> C64 {
    let (s, c) = (2.0 * PI * t).sin_cos();
    C64::new(c, s)
}

/// `cot(pi w)` evaluated through the exponential with negative real part,
/// so it stays accurate far from the real axis.
pub fn cot_pi(w: C64) -> C64 {
    if w.im >= 0.0 {
        let q = (2.0 * PI * I * w).exp();
        I * (q + 1.0) / (q - 1.0)
    } else {
        let q = (-2.0 * PI * I * w).exp();
        -I * (q + 1.0) / (q - 1.0)
    }
}

type NodeCache = Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<NodeCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(compute_gauss_legendre(n))).clone()
}

fn compute_gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Composite Gauss-Legendre rule with `panels` equal panels of `order` nodes.
pub fn integrate_gl(f: impl Fn(f64) -> C64, a: f64, b: f64, panels: usize, order: usize) -> C64 {
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = ComplexSum::new();
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for &(x, w) in rule.iter() {
            acc.add(f(mid + 0.5 * h * x) * (0.5 * h * w));
        }
    }
    acc.value()
}

/// Double-exponential (tanh-sinh) quadrature on a finite interval.
/// Endpoint singularities of algebraic type are handled; the integrand is
/// never evaluated at the endpoints themselves.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let r = 0.5 * (b - a);
    if r == 0.0 {
        return 0.0;
    }
    let tmax = 4.5;
    let mut h = 0.5;
    let eval = |t: f64| -> f64 {
        let u = 0.5 * PI * t.sinh();
        let ch = u.cosh();
        let x = u.tanh();
        let w = 0.5 * PI * t.cosh() / (ch * ch);
        // distance to the nearer endpoint, computed without cancellation
        let d = r / (u.abs().exp() * ch);
        let xv = if x >= 0.0 { b - d } else { a + d };
        if xv <= a || xv >= b || w == 0.0 {
            return 0.0;
        }
        f(xv) * w
    };
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h * r;
    for _level in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let cur = sum * h * r;
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) || (cur - prev).abs() < 1e-300 {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Complex-valued tanh-sinh on the whole real line (sinh-sinh map).
pub fn sinh_sinh(f: impl Fn(f64) -> C64, scale: f64, tol: f64) -> C64 {
    let tmax = 4.0;
    let mut h = 0.25;
    let eval = |t: f64| -> C64 {
        let u = 0.5 * PI * t.sinh();
        let x = scale * u.sinh();
        let w = scale * 0.5 * PI * t.cosh() * u.cosh();
        let v = f(x);
        if v.norm() == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            v * w
        }
    };
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h;
    for _ in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let cur = sum * h;
        if (cur - prev).norm() <= tol * cur.norm().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `sum_{k >= start} f(k)` for an integrand that is smooth on
/// `[start - 1/2, inf)` and decays at least like `t^{-1-eps}`.
/// Uses the midpoint Euler-Maclaurin formula: the integral from
/// `start - 1/2` (after the substitution `t = a/u^4`) plus `f'/24` minus
/// `7 f'''/5760` plus `31 f^(5)/967680`, derivatives by central differences.
pub fn em_tail(f: &dyn Fn(f64) -> C64, start: f64) -> C64 {
    let a = start - 0.5;
    let rule = gauss_legendre(40);
    let mut acc = ComplexSum::new();
    // t = a / u^4, u in (0, 1]: dt = 4a u^{-5} du.  Power-law tails become
    // u^{4p - 5}, smooth enough for Gauss-Legendre also for non-integer p.
    for &(x, w) in rule.iter() {
        let u = 0.5 * (x + 1.0);
        let u2 = u * u;
        let t = a / (u2 * u2);
        acc.add(f(t) * (0.5 * w * 4.0 * a / (u2 * u2 * u)));
    }
    let integral = acc.value();
    let h1 = 0.003 * a.max(1.0);
    let d1 = (f(a - 2.0 * h1) - 8.0 * f(a - h1) + 8.0 * f(a + h1) - f(a + 2.0 * h1)) / (12.0 * h1);
    let h3 = 0.003 * a.max(1.0);
    let d3 = (f(a + 2.0 * h3) - 2.0 * f(a + h3) + 2.0 * f(a - h3) - f(a - 2.0 * h3)) / (2.0 * h3.powi(3));
    let h5 = 0.02 * a.max(1.0);
    let d5 = (f(a + 3.0 * h5) - 4.0 * f(a + 2.0 * h5) + 5.0 * f(a + h5) - 5.0 * f(a - h5) + 4.0 * f(a - 2.0 * h5)
        - f(a - 3.0 * h5))
        / (2.0 * h5.powi(5));
    integral + d1 / 24.0 - d3 * (7.0 / 5760.0) + d5 * (31.0 / 967680.0)
}

/// `sum_{k in Z} f(k)`: terms with `|k - center| <= radius` are added
/// directly, the two tails use [`em_tail`].  `f` must decay at least like
/// `|t|^{-1-eps}` and be smooth beyond the direct window.
pub fn lattice_sum(f: &dyn Fn(f64) -> C64, center: f64, radius: f64) -> C64 {
    let lo = (center - radius).floor() as i64;
    let hi = (center + radius).ceil() as i64;
    let mut acc = ComplexSum::new();
    for k in lo..=hi {
        acc.add(f(k as f64));
    }
    let right = em_tail(f, (hi + 1) as f64);
    let g = |t: f64| f(-t);
    let left = em_tail(&g, (-(lo - 1)) as f64);
    acc.add(right);
    acc.add(left);
    acc.value()
}

/// Taylor coefficients `f^(k)(center)/k!` for `k < count`, from `samples`
/// equispaced values on the circle `|w - center| = radius` (discrete Cauchy
/// integral).  `f` must be analytic on a disk somewhat larger than the circle.
pub fn taylor_coefficients(f: &dyn Fn(C64) -> C64, center: C64, radius: f64, samples: usize, count: usize) -> Vec<C64> {
    assert!(count <= samples, "need at least as many samples as coefficients");
    let roots: Vec<C64> = (0..samples).map(|j| e_real(j as f64 / samples as f64)).collect();
    let values: Vec<C64> = roots.iter().map(|&r| f(center + radius * r)).collect();
    let mut out = Vec::with_capacity(count);
    let mut scale = 1.0 / samples as f64;
    for k in 0..count {
        let mut acc = C64::new(0.0, 0.0);
        for (j, &v) in values.iter().enumerate() {
            acc += v * roots[(samples - (j * k) % samples) % samples];
        }
        out.push(acc * scale);
        scale /= radius;
    }
    out
}
