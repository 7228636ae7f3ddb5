//! Oracle checks of the three-dimensional construction against its defining
//! integral.
//!
//! For a 3-dimensional D-vine the copula value is
//! `int_0^{u2} C(F(u1 | z), F(u3 | z)) dz` with tree-1 conditionals `F`; the
//! integrand is closed form, so quadrature and differentiation of it give
//! implementation-independent references for the Monte Carlo value and the
//! density recursion.

use plcc::dist_copulas::DistCopulaFamily;
use plcc::levy_copulas::LevyCopulaFamily;
use plcc::vine::{Plcc, VineSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn clayton(theta: f64) -> LevyCopulaFamily<f64> {
    LevyCopulaFamily::clayton(theta).unwrap()
}

fn gauss(rho: f64) -> DistCopulaFamily<f64> {
    DistCopulaFamily::gaussian(rho).unwrap()
}

/// Integrand of the defining integral: `C(F(u1 | z), F(u3 | z))`.
fn coupling(
    edge12: &LevyCopulaFamily<f64>,
    edge23: &LevyCopulaFamily<f64>,
    top: &DistCopulaFamily<f64>,
    z: f64,
    u1: f64,
    u3: f64,
) -> f64 {
    let f1 = edge12.conditional(z, u1).unwrap();
    let f3 = edge23.conditional(z, u3).unwrap();
    top.cdf(f1, f3).unwrap()
}

/// Simpson quadrature of the coupling over `z in [lo, hi]`.
#[allow(clippy::too_many_arguments)]
fn trivariate_value_quadrature(
    edge12: &LevyCopulaFamily<f64>,
    edge23: &LevyCopulaFamily<f64>,
    top: &DistCopulaFamily<f64>,
    lo: f64,
    hi: f64,
    u1: f64,
    u3: f64,
    panels: usize,
) -> f64 {
    let n = 2 * panels;
    let h = (hi - lo) / n as f64;
    let g = |z: f64| coupling(edge12, edge23, top, z.max(1e-300), u1, u3);
    let mut acc = g(lo) + g(hi);
    for i in 1..n {
        acc += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn three_dim_density_matches_derivative_of_defining_integral() {
    // f(u1, u2, u3) = d^2/du1 du3 [ C(F(u1 | u2), F(u3 | u2)) ], closed form
    // up to a mixed finite difference of smooth bivariate pieces.
    let edge12 = clayton(1.5);
    let edge23 = clayton(5.0);
    let top = gauss(0.6);
    let spec = VineSpec::d_vine(vec![0, 1, 2], vec![edge12, edge23], vec![vec![top]]).unwrap();
    let plcc = Plcc::new(&spec).unwrap();

    // Points where the density carries enough mass for a four-point stencil
    // of the absolute-precision coupling to see it; far anti-diagonal
    // corners with strong dependence push the density below 1e-16 and leave
    // the stencil without signal.
    for &(u1, u2, u3) in &[
        (1.0, 1.0, 1.0),
        (0.4, 2.0, 1.3),
        (5.0, 0.8, 0.2),
        (0.2, 0.5, 1.4),
    ] {
        let h1 = u1 * 1e-4;
        let h3 = u3 * 1e-4;
        let g = |a: f64, b: f64| coupling(&edge12, &edge23, &top, u2, a, b);
        let fd = (g(u1 + h1, u3 + h3) - g(u1 + h1, u3 - h3) - g(u1 - h1, u3 + h3)
            + g(u1 - h1, u3 - h3))
            / (4.0 * h1 * h3);
        let got = plcc.log_density(&[u1, u2, u3]).unwrap().exp();
        assert!(
            ((fd - got) / got).abs() < 1e-4,
            "u=({u1},{u2},{u3}): oracle={fd}, density={got}"
        );
    }
}

#[test]
fn three_dim_value_mc_matches_quadrature() {
    let edge12 = clayton(1.5);
    let edge23 = clayton(5.0);
    let top = gauss(0.6);
    let spec = VineSpec::d_vine(vec![0, 1, 2], vec![edge12, edge23], vec![vec![top]]).unwrap();
    let plcc = Plcc::new(&spec).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(2718);

    for &(u1, u2, u3) in &[(1.0, 1.0, 1.0), (30.0, 10.0, 50.0), (2.0, 40.0, 0.5)] {
        let oracle = trivariate_value_quadrature(&edge12, &edge23, &top, 0.0, u2, u1, u3, 4000);
        let est = plcc.value_mc(&[u1, u2, u3], 400_000, &mut rng).unwrap();
        assert!(
            (est.estimate - oracle).abs() < 3.0 * est.std_error.max(1e-9),
            "u=({u1},{u2},{u3}): mc={} se={} oracle={oracle}",
            est.estimate,
            est.std_error
        );
    }
}

#[test]
fn cvine_infinite_root_matches_quadrature_margin() {
    // For a 3-dimensional C-vine rooted at dimension 0, the (1, 2) margin is
    // int_0^inf C(F(u1 | z), F(u2 | z)) dz; the Monte Carlo evaluator reaches
    // it through the anchored-at-second-position chain.
    let edge01 = clayton(1.0);
    let edge02 = clayton(2.0);
    let top = gauss(-0.2);
    let spec = VineSpec::c_vine(vec![0, 1, 2], vec![edge01, edge02], vec![vec![top]]).unwrap();
    let plcc = Plcc::new(&spec).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(31415);

    for &(u1, u2) in &[(1.0, 1.0), (8.0, 2.5)] {
        // The integrand decays like z^(-(theta+1)); truncating at Z = 1e5
        // leaves less than 1e-8 of the mass for these arguments.
        let oracle = trivariate_value_quadrature(&edge01, &edge02, &top, 0.0, 1e5, u1, u2, 400_000);
        let est = plcc
            .value_mc(&[f64::INFINITY, u1, u2], 400_000, &mut rng)
            .unwrap();
        assert!(
            (est.estimate - oracle).abs() < 3.0 * est.std_error.max(1e-9),
            "u=({u1},{u2}): mc={} se={} oracle={oracle}",
            est.estimate,
            est.std_error
        );
    }
}

#[test]
fn conditional_cdf_matches_derivative_of_quadrature() {
    // F(u3 | u1, u2) equals the u1-derivative of the defining integral's
    // integrand ratio: dC(F1, F3)/dF1 with F at z = u2... verified directly
    // through a finite difference of the trivariate value in (u1, u2).
    // d^2/du1 du2 value = f(u3-section); instead compare against
    // d/du1 g(u2; u1, u3) / d/du1 g(u2; u1, inf).
    let edge12 = clayton(1.0);
    let edge23 = clayton(1.0);
    let top = gauss(0.8);
    let spec = VineSpec::d_vine(vec![0, 1, 2], vec![edge12, edge23], vec![vec![top]]).unwrap();
    let plcc = Plcc::new(&spec).unwrap();

    let (u1, u2, u3) = (1.0, 1.0, 1.0);
    let h = 1e-5;
    let g = |a: f64, b: f64| coupling(&edge12, &edge23, &top, u2, a, b);
    // dC(F1(z), F3(z))/dF1 * f1-density factors cancel in the ratio.
    let num = (g(u1 + h, u3) - g(u1 - h, u3)) / (2.0 * h);
    let den = (edge12.conditional(u2, u1 + h).unwrap() - edge12.conditional(u2, u1 - h).unwrap())
        / (2.0 * h);
    let oracle = num / den;
    let got = plcc.cond_cdf(&[u1, u2], u3).unwrap();
    assert!((got - oracle).abs() < 1e-6, "cond={got}, oracle={oracle}");
}
