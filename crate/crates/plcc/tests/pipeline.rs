//! Statistical behaviour of the estimation pipeline on simulated data.

use plcc::dist_copulas::DistCopulaFamily;
use plcc::estimate::{fit_tree1_edge, pair_loglik, sequential_fit, FitOptions};
use plcc::levy_copulas::LevyCopulaFamily;
use plcc::marginals::{tail_integral, StableParams};
use plcc::optim::golden_section_max;
use plcc::simulate::{choose_truncation, observe, simulate_series};
use plcc::study::replicate_seed;
use plcc::vine::{Plcc, VineSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn margins(d: usize) -> Vec<StableParams<f64>> {
    vec![StableParams::new(0.5, 1.0).unwrap(); d]
}

fn clayton(theta: f64) -> LevyCopulaFamily<f64> {
    LevyCopulaFamily::clayton(theta).unwrap()
}

fn pair_observations(
    plcc: &Plcc<f64>,
    m: &[StableParams<f64>],
    eps: f64,
    seed: u64,
) -> Vec<(f64, f64)> {
    let tau = choose_truncation(m, eps, 10.0).unwrap();
    let series = simulate_series(plcc, m, 1.0, tau, seed).unwrap();
    observe(&series, eps, &[0, 1])
        .unwrap()
        .events(&series)
        .map(|ev| (ev.sizes[0], ev.sizes[1]))
        .collect()
}

#[test]
fn score_at_truth_has_zero_mean() {
    // Averaged finite-difference gradients of the pair log-likelihood at the
    // true parameter over 200 replicates lie within 3 standard errors of 0.
    let theta = 5.0;
    let spec = VineSpec::d_vine(vec![0, 1], vec![clayton(theta)], vec![]).unwrap();
    let plcc = Plcc::new(&spec).unwrap();
    let m = margins(2);
    let eps = 1e-4;
    let step = 1e-4;
    let mut scores = Vec::with_capacity(200);
    for rep in 0..200u64 {
        let obs = pair_observations(&plcc, &m, eps, replicate_seed(77, rep as usize));
        let up = pair_loglik(&clayton(theta + step), (&m[0], &m[1]), &obs, eps, 1.0).unwrap();
        let down = pair_loglik(&clayton(theta - step), (&m[0], &m[1]), &obs, eps, 1.0).unwrap();
        scores.push((up - down) / (2.0 * step));
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(
        mean.abs() < 3.0 * se,
        "mean score {mean} with standard error {se}"
    );
}

#[test]
fn mc_normalizer_reproduces_closed_form_fit() {
    // Replacing the exact bivariate copula value in the tree-1 likelihood by
    // a smooth Monte Carlo estimate with common random numbers moves the
    // maximizer by less than 1e-3.
    let theta = 5.0;
    let spec = VineSpec::d_vine(vec![0, 1], vec![clayton(theta)], vec![]).unwrap();
    let plcc = Plcc::new(&spec).unwrap();
    let m = margins(2);
    let eps = 1e-4;
    let obs = pair_observations(&plcc, &m, eps, 99);
    assert!(obs.len() > 40);

    let options = FitOptions::default();
    let exact = fit_tree1_edge(&clayton(1.0), (&m[0], &m[1]), &obs, eps, 1.0, &options)
        .unwrap()
        .family
        .param();

    // Smooth Monte Carlo normalizer: U(eps) times the mean over fixed anchor
    // draws of the conditional distribution at the threshold rate. The
    // maximizer drifts like 1/sqrt(M), so a large fixed budget stands in for
    // the M -> infinity limit.
    let rate = tail_integral(&m[0], eps).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(1234);
    let anchors: Vec<f64> = (0..1_500_000)
        .map(|_| rate * rng.random::<f64>().max(1e-15))
        .collect();
    let gammas: Vec<(f64, f64)> = obs
        .iter()
        .map(|&(x1, x2)| {
            (
                tail_integral(&m[0], x1).unwrap(),
                tail_integral(&m[1], x2).unwrap(),
            )
        })
        .collect();
    let marginal_terms: f64 = obs
        .iter()
        .map(|&(x1, x2)| {
            plcc::marginals::log_levy_density(&m[0], x1).unwrap()
                + plcc::marginals::log_levy_density(&m[1], x2).unwrap()
        })
        .sum();
    let objective = |th: f64| {
        let cand = clayton(th);
        let lambda = rate
            * anchors
                .iter()
                .map(|&a| cand.conditional(a, rate).unwrap())
                .sum::<f64>()
            / anchors.len() as f64;
        let dens: f64 = gammas
            .iter()
            .map(|&(g1, g2)| cand.log_density(g1, g2).unwrap())
            .sum();
        -lambda + dens + marginal_terms
    };
    let (mc_theta, _) = golden_section_max(objective, 1e-3, 50.0, 1e-7, 300);
    assert!(
        (mc_theta - exact).abs() < 1e-3,
        "closed-form fit {exact} vs Monte Carlo normalizer fit {mc_theta}"
    );
}

#[test]
fn independence_data_yields_near_zero_correlations() {
    // Simulate from a construction whose higher trees are independence
    // copulas, then fit a Gaussian skeleton: fitted correlations must sit
    // near zero.
    let d = 3;
    let sim_spec = VineSpec::d_vine(
        vec![0, 1, 2],
        vec![clayton(2.0), clayton(2.0)],
        vec![vec![DistCopulaFamily::Independence]],
    )
    .unwrap();
    let fit_spec = VineSpec::d_vine(
        vec![0, 1, 2],
        vec![clayton(2.0), clayton(2.0)],
        vec![vec![DistCopulaFamily::gaussian(0.5).unwrap()]],
    )
    .unwrap();
    let plcc = Plcc::new(&sim_spec).unwrap();
    let m = margins(d);
    let eps = 1e-5;
    let tau = choose_truncation(&m, eps, 10.0).unwrap();
    let series = simulate_series(&plcc, &m, 1.0, tau, 4242).unwrap();
    let options = FitOptions {
        mc_samples: 20_000,
        mc_seed: 7,
        ..FitOptions::default()
    };
    let report = sequential_fit(&series, &fit_spec, eps, &options).unwrap();
    let record = &report.higher()[0][0];
    assert!(record.fitted);
    let rho = record.param.unwrap();
    // ~200 co-jumps; 3 standard errors of a correlation is about 0.21.
    assert!(rho.abs() < 0.25, "rho={rho} on independent data");
}

#[test]
fn observation_counts_are_nested_across_trees() {
    let spec: VineSpec<f64> = plcc::study::Scenario::M.vine_spec();
    let plcc = Plcc::new(&spec).unwrap();
    let m = margins(5);
    let eps = 1e-4;
    let tau = choose_truncation(&m, eps, 10.0).unwrap();
    let series = simulate_series(&plcc, &m, 1.0, tau, 31).unwrap();
    let options = FitOptions {
        mc_samples: 5_000,
        mc_seed: 3,
        ..FitOptions::default()
    };
    let report = sequential_fit(&series, &spec, eps, &options).unwrap();
    // D-vine: the sub-vine of tree t edge e spans positions e..=e+t, so its
    // count can never exceed the counts of the two tree-(t-1) edges nested
    // inside that span.
    for t in 2..5 {
        for e in 0..5 - t {
            let hi = report.trees[t - 1][e].count;
            assert!(hi <= report.trees[t - 2][e].count);
            assert!(hi <= report.trees[t - 2][e + 1].count);
        }
    }
    // Marginal counts dominate tree-1 counts.
    for e in 0..4 {
        assert!(report.trees[0][e].count <= report.marginals[e].count);
        assert!(report.trees[0][e].count <= report.marginals[e + 1].count);
    }
}

#[test]
fn lower_threshold_reduces_rmse_single_pair() {
    // Tenfold more co-jumps must shrink the estimation spread; checked on
    // the bivariate edge over 60 replicates per threshold.
    let theta = 2.0;
    let spec = VineSpec::d_vine(vec![0, 1], vec![clayton(theta)], vec![]).unwrap();
    let plcc = Plcc::new(&spec).unwrap();
    let m = margins(2);
    let options = FitOptions::default();
    let mut rmse = Vec::new();
    for &eps in &[1e-4, 1e-6] {
        let mut sq = 0.0;
        let mut n = 0usize;
        for rep in 0..60u64 {
            let obs = pair_observations(&plcc, &m, eps, replicate_seed(5150, rep as usize));
            if obs.len() < 2 {
                continue;
            }
            let fit =
                fit_tree1_edge(&clayton(1.0), (&m[0], &m[1]), &obs, eps, 1.0, &options).unwrap();
            sq += (fit.family.param() - theta).powi(2);
            n += 1;
        }
        rmse.push((sq / n as f64).sqrt());
    }
    assert!(
        rmse[1] < rmse[0],
        "rmse at 1e-6 ({}) should be below rmse at 1e-4 ({})",
        rmse[1],
        rmse[0]
    );
}
