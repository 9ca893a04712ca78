use polar_maass::arith::Cusp;
use polar_maass::continuation::{PointPair, PsiEvalParams, PsiEvaluator};
use polar_maass::poincarebasis::psi2_cusp_expansion;
use polar_maass::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// At the width-11 cusp the Kloosterman series converge slowly in the
/// modulus cutoff, so the agreement is a few units in 1e-6.
#[test]
fn expansion_at_cusp_zero_matches_pointwise() {
    let fz = c(0.13, 0.9);
    let cusp = Cusp::parse(11, "0").unwrap();
    let ev = PsiEvaluator::new(PsiEvalParams::for_heights(11, 0.9, 0.15)).unwrap();
    let ex = psi2_cusp_expansion(11, fz, &cusp, 30, 400).unwrap();
    let l = cusp.expansion_matrix();
    for w in [c(0.1, 2.1), c(-0.33, 2.6), c(0.47, 3.2)] {
        assert!(w.im > ex.min_height);
        let direct = ev.y_psi2(&PointPair::new(fz, l.apply(w)).unwrap()).unwrap();
        let err = (ex.evaluate(w) - direct).norm();
        assert!(err < 2e-5, "w = {w}: {err:e}");
    }
}

#[test]
fn high_index_expansion_evaluates_finitely() {
    let fz = c(0.13, 0.9);
    let cusp = Cusp::parse(11, "0").unwrap();
    let ex = psi2_cusp_expansion(11, fz, &cusp, 60, 400).unwrap();
    for w in [c(0.47, 3.2), c(0.0, 8.0)] {
        let v = ex.evaluate(w);
        assert!(v.re.is_finite() && v.im.is_finite(), "w = {w}: {v}");
    }
}
