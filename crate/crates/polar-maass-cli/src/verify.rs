//! Invariant suites run by `verify`.

use polar_maass::analysis::laplacian_numeric;
use polar_maass::arith::{self, ell_splits, num_divisors, Cusp, Mat2};
use polar_maass::continuation::{continued_poincare, direct_poincare, PointPair, PsiEvalParams, PsiEvaluator};
use polar_maass::kloosterman::{cusp_kloosterman, cusp_kloosterman_via_classical, cusp_kloosterman_zero, totient_zeta};
use polar_maass::pairing::{
    bruinier_funke_pairing, meromorphy_certificate, petersson_inner_numeric, weight_two_basis, xi_image,
    CertificateParams,
};
use polar_maass::poincarebasis::{
    assemble, maass_poincare_coeffs, psi2_cusp_expansion, y_form_coeffs, y_form_coeffs_at_cusp, BasisError,
    PrincipalPartSpec,
};
use polar_maass::{Precision, C64};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{fmt_f64, Metadata};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Kloosterman,
    Continuation,
    Basis,
    Pairing,
}

pub fn select(name: &str) -> Result<Vec<Suite>, CliError> {
    Ok(match name {
        "kloosterman" => vec![Suite::Kloosterman],
        "continuation" => vec![Suite::Continuation],
        "basis" => vec![Suite::Basis],
        "pairing" => vec![Suite::Pairing],
        "all" => vec![Suite::Kloosterman, Suite::Continuation, Suite::Basis, Suite::Pairing],
        other => return Err(CliError::UnknownSuite(other.to_string())),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    /// Observed error (absolute or relative as named).
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(suite: &'static str, name: impl Into<String>, value: f64, tolerance: f64) -> Check {
    Check { suite, name: name.into(), value, tolerance, pass: value <= tolerance }
}

pub fn render_csv(meta: &Metadata, checks: &[Check]) -> String {
    let mut out = meta.csv_header();
    out.push_str("suite,invariant,value,tolerance,pass\n");
    for c in checks {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            c.suite,
            c.name,
            fmt_f64(c.value),
            fmt_f64(c.tolerance),
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}

pub fn run_suite(suite: Suite, seed: u64, precision: Precision) -> Result<Vec<Check>, CliError> {
    match suite {
        Suite::Kloosterman => kloosterman_suite(),
        Suite::Continuation => continuation_suite(precision),
        Suite::Basis => basis_suite(),
        Suite::Pairing => pairing_suite(seed),
    }
}

/// Running maximum that keeps a NaN once seen, so a failed evaluation cannot pass.
fn worst_of(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn kloosterman_suite() -> Result<Vec<Check>, CliError> {
    const S: &str = "kloosterman";
    let (mut rewrite, mut weil, mut conj, mut zero) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for level in 1..=12u64 {
        for cusp in arith::cusps(level) {
            let (alpha, gamma) = cusp.kloosterman_params();
            let l1 = ell_splits(cusp.width, gamma, level)?.l1;
            for c in 1..=40u64 {
                for m in -3..=3i64 {
                    for n in -3..=3i64 {
                        let direct = cusp_kloosterman(level, alpha, gamma, m, n, c)?;
                        let via = cusp_kloosterman_via_classical(level, alpha, gamma, m, n, c)?;
                        rewrite = worst_of(rewrite, (direct - via).norm());
                        let g = arith::gcd(m, c as i64) as f64;
                        let bound =
                            l1 as f64 * num_divisors(l1 * c) as f64 * (g * c as f64).sqrt() * (1.0 + 1e-12) + 1e-9;
                        weil = worst_of(weil, direct.norm() / bound);
                        let neg = cusp_kloosterman(level, alpha, gamma, -m, -n, c)?;
                        conj = worst_of(conj, (direct.conj() - neg).norm());
                    }
                }
                let k0 = cusp_kloosterman(level, alpha, gamma, 0, 0, c)?;
                zero = worst_of(zero, (k0 - cusp_kloosterman_zero(level, alpha, gamma, c)?).norm());
            }
        }
    }
    let mut out = vec![
        check(S, "direct_vs_classical_rewrite", rewrite, 1e-10),
        check(S, "weil_bound_ratio", weil, 1.0),
        check(S, "conjugation_symmetry", conj, 1e-10),
        check(S, "zero_frequency_closed_form", zero, 1e-9),
    ];
    for level in [1u64, 4, 6, 11, 12] {
        let closed = totient_zeta(level, c64(4.0, 0.0));
        let c_max = 200_000u64;
        let mut partial = 0.0;
        for c in (level..=c_max).step_by(level as usize) {
            partial += arith::totient(c) as f64 / (c as f64).powi(4);
        }
        // tail of sum phi(c)/c^4 over N | c beyond c_max is below 1/(2 N c_max^2)
        let tail = 1.0 / (2.0 * level as f64 * (c_max as f64).powi(2));
        let rel = ((closed.re - partial).abs() - tail).max(0.0) / closed.re;
        out.push(check(S, format!("totient_zeta_N{level}"), rel, 1e-6));
    }
    Ok(out)
}

fn continuation_suite(precision: Precision) -> Result<Vec<Check>, CliError> {
    const S: &str = "continuation";
    let mut out = Vec::new();

    let mut p1 = PsiEvalParams::for_heights(1, 0.8, 0.8);
    p1.precision = precision;
    let ev1 = PsiEvaluator::new(p1)?;
    let rho = c64(-0.5, 3f64.sqrt() / 2.0);
    let z = c64(0.2, 1.3);
    let at_i = ev1.y_psi2(&PointPair::new(c64(0.0, 1.0), z)?)?;
    let at_rho = ev1.y_psi2(&PointPair::new(rho, z)?)?;
    out.push(check(S, "elliptic_vanishing_i", at_i.norm(), 1e-6));
    out.push(check(S, "elliptic_vanishing_rho", at_rho.norm(), 1e-6));

    let mut p11 = PsiEvalParams::for_heights(11, 0.5, 0.08);
    p11.precision = precision;
    let ev = PsiEvaluator::new(p11)?;
    let fz = c64(0.13, 0.9);
    let f = |w: C64| ev.y_psi2(&PointPair::new(fz, w).expect("upper half-plane")).expect("pole-free point");
    let gens = [Mat2::new(1, 1, 0, 1), Mat2::new(7, -2, 11, -3), Mat2::new(1, 0, 11, 1)];
    for m in gens {
        let z = if m.c == 0 { c64(0.2, 0.7) } else { c64(-(m.d as f64) / 11.0 + 0.01, 0.095) };
        let r = (f(m.apply(z)) - f(z)).norm();
        out.push(check(S, format!("modularity_N11_{}_{}_{}_{}", m.a, m.b, m.c, m.d), r, 1e-3));
    }
    let lap = laplacian_numeric(&f, 0, c64(0.3, 0.7), 3e-3)?;
    out.push(check(S, "harmonicity_N11", lap.norm(), 1e-5));

    let mut ps = PsiEvalParams::for_heights(1, 0.8, 0.7);
    ps.precision = precision;
    let pair = PointPair::new(c64(0.13, 0.9), c64(-0.31, 1.2))?;
    let s = c64(0.25, 0.0);
    let direct = direct_poincare(1, s, &pair, &ps)?;
    let cont = continued_poincare(1, s, &pair, &ps)?;
    out.push(check(S, "direct_vs_continued_s0.25", (direct.value - cont).norm(), 1e-4));
    Ok(out)
}

fn basis_suite() -> Result<Vec<Check>, CliError> {
    const S: &str = "basis";
    let mut out = Vec::new();
    let inf = Cusp::infinity(1);
    let p = maass_poincare_coeffs(1, &inf, -1, 0, 2, 2000)?;
    out.push(check(S, "j_coefficient_1", (p.hol(1).re - 196884.0).abs(), 5.0));
    out.push(check(S, "j_coefficient_2", (p.hol(2).re - 21493760.0).abs(), 5.0));

    let rejected = matches!(y_form_coeffs(1, c64(0.0, 1.0), -1, 2, 50), Err(BasisError::CongruenceViolation { .. }));
    out.push(check(S, "congruence_filter", if rejected { 0.0 } else { 1.0 }, 0.0));

    for level in [1u64, 11] {
        let fz = c64(0.13, 0.9);
        let ex = psi2_cusp_expansion(level, fz, &Cusp::infinity(level), 30, 400)?;
        let ev = PsiEvaluator::new(PsiEvalParams::for_heights(level, 0.9, 2.0))?;
        let w = c64(0.27, 2.4);
        let direct = ev.y_psi2(&PointPair::new(fz, w)?)?;
        out.push(check(S, format!("expansion_vs_pointwise_N{level}"), (ex.evaluate(w) - direct).norm(), 1e-5));
    }

    let tau = c64(0.1, 0.8);
    let mut a = PrincipalPartSpec::new(11, 1);
    a.add_elliptic_term(tau, -1, c64(1.0, 0.5));
    let mut b = PrincipalPartSpec::new(11, 1);
    b.add_cusp_term(Cusp::infinity(11), -1, c64(-2.0, 0.0));
    let mut sum = a.clone();
    sum.add_cusp_term(Cusp::infinity(11), -1, c64(-2.0, 0.0));
    let (ea, eb, es) = (assemble(&a, 4, 100)?, assemble(&b, 4, 100)?, assemble(&sum, 4, 100)?);
    let scale = (-1..=4).map(|n| ea.hol(n).norm().max(eb.hol(n).norm())).fold(1.0, f64::max);
    let lin = (-1..=4).map(|n| (es.hol(n) - ea.hol(n) - eb.hol(n)).norm()).fold(0.0, f64::max) / scale;
    out.push(check(S, "linearity_relative", lin, 1e-12));
    Ok(out)
}

fn pairing_suite(seed: u64) -> Result<Vec<Check>, CliError> {
    const S: &str = "pairing";
    let mut out = Vec::new();
    let params = CertificateParams { c_max: 1000, ..CertificateParams::default() };
    let g = &weight_two_basis(11, params.n_cut)?[0];

    let (t1, t2) = (c64(0.1, 0.8), c64(-0.27, 0.55));
    let two = polar_maass::pairing::two_pole_spec(11, t1, t2, g)?;
    let cert = meromorphy_certificate(&two, &params)?;
    out.push(check(S, "two_pole_certificate_passes", if cert.pass { 0.0 } else { 1.0 }, 0.0));
    let mut one = PrincipalPartSpec::new(11, 1);
    one.add_elliptic_term(t1, -1, c64(1.0, 0.0));
    let cert = meromorphy_certificate(&one, &params)?;
    let fails = !cert.condition_pass && cert.antihol_pass == Some(false);
    out.push(check(S, "single_pole_certificate_fails", if fails { 0.0 } else { 1.0 }, 0.0));

    let mut level_one = PrincipalPartSpec::new(1, 1);
    level_one.add_cusp_term(Cusp::infinity(1), -1, c64(1.0, 0.0));
    let cert = meromorphy_certificate(&level_one, &params)?;
    out.push(check(S, "level_one_certificate_passes", if cert.pass { 0.0 } else { 1.0 }, 0.0));

    let tau = c64(0.17, 0.61);
    let inf = y_form_coeffs(11, tau, -1, 15, 1000)?;
    let zero = y_form_coeffs_at_cusp(11, tau, -1, &Cusp::parse(11, "0")?, 60, 1000)?;
    let xi = xi_image(11, &[inf, zero])?;
    let mut spec = PrincipalPartSpec::new(11, 1);
    spec.add_elliptic_term(tau, -1, c64(1.0, 0.0));
    let bf = bruinier_funke_pairing(&spec, g)?;
    let numeric = petersson_inner_numeric(g, &xi, 1024, seed)?;
    out.push(check(S, "pairing_vs_petersson_relative", (bf - numeric).norm() / bf.norm(), 5e-2));
    Ok(out)
}
