//! Threshold-observation likelihoods and sequential maximum likelihood.
//!
//! Estimation proceeds tree by tree: marginal parameters first (closed form),
//! then each tree-1 Lévy copula from pairwise co-jumps, then each higher
//! distributional copula from co-jumps in all involved dimensions, with every
//! previously fitted parameter frozen. Each higher-edge likelihood needs the
//! copula value of its sub-vine as a normalizing constant; that value is
//! estimated by Monte Carlo with common random numbers per edge, and the
//! final conditional factor is evaluated in closed form rather than sampled
//! so the likelihood surface stays smooth in the candidate parameter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::dist_copulas::{norm_quantile, DistCopulaFamily};
use crate::error::{Error, Result};
use crate::levy_copulas::LevyCopulaFamily;
use crate::marginals::{fit_marginal, log_levy_density, tail_integral, StableParams};
use crate::optim::golden_section_max;
use crate::real::Real;
use crate::simulate::{observe, JumpSeries};
use crate::vine::{Plcc, VineKind, VineSpec};

/// Knobs of the sequential fit.
#[derive(Debug, Clone)]
pub struct FitOptions<R> {
    /// Base Monte Carlo budget of the higher-tree normalizer.
    pub mc_samples: usize,
    /// Times the budget may be doubled when the normalizer standard error
    /// exceeds 1% of its value.
    pub mc_max_doublings: u32,
    /// Seed of the per-edge common-random-number streams.
    pub mc_seed: u64,
    /// Search interval of the Clayton dependence parameter.
    pub theta_bounds: (R, R),
    /// Search interval of the Gaussian correlation.
    pub rho_bounds: (R, R),
    /// Absolute tolerance of the scalar searches.
    pub tol: R,
}

impl<R: Real> Default for FitOptions<R> {
    fn default() -> Self {
        FitOptions {
            mc_samples: 100_000,
            mc_max_doublings: 3,
            mc_seed: 0,
            theta_bounds: (R::of(1e-3), R::of(50.0)),
            rho_bounds: (R::of(-0.999), R::of(0.999)),
            tol: R::of(1e-6),
        }
    }
}

/// Fitted marginal entry of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub struct MarginalRecord<R> {
    pub alpha: Option<R>,
    pub beta: Option<R>,
    pub clamped: bool,
    pub count: usize,
    pub loglik: Option<R>,
    pub fitted: bool,
}

/// Monte Carlo normalizer attached to a higher-tree edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub struct NormalizerRecord<R> {
    pub estimate: R,
    pub std_error: R,
    pub samples: usize,
    /// True when the standard error still exceeded 1% of the value after all
    /// allowed budget doublings.
    pub flagged: bool,
}

/// Fitted edge entry of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub struct EdgeRecord<R> {
    pub family: String,
    pub param: Option<R>,
    pub count: usize,
    pub loglik: Option<R>,
    pub fitted: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub normalizer: Option<NormalizerRecord<R>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Sequential estimation result; `trees[0]` holds the tree-1 edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub struct EstimationReport<R> {
    pub marginals: Vec<MarginalRecord<R>>,
    pub trees: Vec<Vec<EdgeRecord<R>>>,
    pub epsilon: R,
    pub horizon: R,
    pub seed: u64,
}

impl<R: Real> EstimationReport<R> {
    pub fn tree1(&self) -> &[EdgeRecord<R>] {
        &self.trees[0]
    }

    pub fn higher(&self) -> &[Vec<EdgeRecord<R>>] {
        &self.trees[1..]
    }
}

/// Compound Poisson log-likelihood of pairwise co-jumps under a tree-1 edge.
///
/// `-T * C(U1(eps), U2(eps))` plus, per observation, the two marginal jump
/// log densities and the copula log density at the tail coordinates. With no
/// observations the normalizer term alone is returned.
pub fn pair_loglik<R: Real>(
    edge: &LevyCopulaFamily<R>,
    margins: (&StableParams<R>, &StableParams<R>),
    obs: &[(R, R)],
    eps: R,
    horizon: R,
) -> Result<R> {
    let rate1 = tail_integral(margins.0, eps)?;
    let rate2 = tail_integral(margins.1, eps)?;
    let mut acc = -horizon * edge.value(rate1, rate2)?;
    for &(x1, x2) in obs {
        acc = acc + log_levy_density(margins.0, x1)? + log_levy_density(margins.1, x2)?;
        let g1 = tail_integral(margins.0, x1)?;
        let g2 = tail_integral(margins.1, x2)?;
        acc = acc + edge.log_density(g1, g2)?;
    }
    Ok(acc)
}

/// Result of a tree-1 edge fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree1Fit<R> {
    pub family: LevyCopulaFamily<R>,
    pub loglik: R,
}

/// Maximizes [`pair_loglik`] over the family parameter.
pub fn fit_tree1_edge<R: Real>(
    family: &LevyCopulaFamily<R>,
    margins: (&StableParams<R>, &StableParams<R>),
    obs: &[(R, R)],
    eps: R,
    horizon: R,
    options: &FitOptions<R>,
) -> Result<Tree1Fit<R>> {
    if obs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "tree-1 edge fit needs at least 2 co-jumps, got {}",
            obs.len()
        )));
    }
    let rate1 = tail_integral(margins.0, eps)?;
    let rate2 = tail_integral(margins.1, eps)?;
    // Parameter-free parts precomputed once.
    let mut marginal_terms = R::zero();
    let gammas: Vec<(R, R)> = obs
        .iter()
        .map(|&(x1, x2)| -> Result<(R, R)> {
            marginal_terms = marginal_terms
                + log_levy_density(margins.0, x1)?
                + log_levy_density(margins.1, x2)?;
            Ok((tail_integral(margins.0, x1)?, tail_integral(margins.1, x2)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let objective = |theta: R| {
        let cand = family.with_param(theta).expect("theta inside bounds");
        let mut acc = -horizon * cand.value(rate1, rate2).expect("positive rates");
        for &(g1, g2) in &gammas {
            acc = acc + cand.log_density(g1, g2).expect("positive tail coordinates");
        }
        acc + marginal_terms
    };
    let (lo, hi) = options.theta_bounds;
    let (theta_hat, loglik) = golden_section_max(objective, lo, hi, options.tol, 300);
    Ok(Tree1Fit {
        family: family.with_param(theta_hat)?,
        loglik,
    })
}

/// Log-likelihood of co-jumps in all dimensions of an `m`-dimensional
/// sub-vine, with the copula value (normalizer) estimated by Monte Carlo.
///
/// `sub` must be fully parameterized; `margins` and the observation vectors
/// are indexed by the sub-vine's dimension labels.
pub fn higher_loglik<R: Real, G: Rng + ?Sized>(
    sub: &VineSpec<R>,
    margins: &[StableParams<R>],
    obs: &[Vec<R>],
    eps: R,
    horizon: R,
    mc_samples: usize,
    rng: &mut G,
) -> Result<R> {
    let m = sub.dim();
    if margins.len() != m {
        return Err(Error::domain(
            "higher_loglik",
            format!("{} margins for a {m}-dimensional sub-vine", margins.len()),
        ));
    }
    let plcc = Plcc::new(sub)?;
    let rates: Vec<R> = margins
        .iter()
        .map(|p| tail_integral(p, eps))
        .collect::<Result<Vec<_>>>()?;
    let normalizer = plcc.value_mc(&rates, mc_samples, rng)?;
    let mut acc = -horizon * normalizer.estimate;
    let mut gamma = vec![R::zero(); m];
    for row in obs {
        if row.len() != m {
            return Err(Error::domain(
                "higher_loglik",
                format!("observation has {} coordinates, expected {m}", row.len()),
            ));
        }
        for (k, (&x, p)) in row.iter().zip(margins).enumerate() {
            acc = acc + log_levy_density(p, x)?;
            gamma[k] = tail_integral(p, x)?;
        }
        acc = acc + plcc.log_density(&gamma)?;
    }
    Ok(acc)
}

/// Per-edge cached quantities that do not depend on the candidate top
/// parameter: the frozen part of the data term and, per Monte Carlo sample,
/// the closed-form conditional arguments of the final factor.
struct TopEdgeCache<R> {
    /// Sum over observations of marginal terms plus all frozen density
    /// factors (the top factor excluded).
    frozen_data: R,
    /// Per observation, normal quantiles of the two top-factor arguments.
    obs_args: Vec<(R, R)>,
    /// Monte Carlo anchor: the box bound of position 0.
    anchor: R,
    /// Per kept sample, normal quantiles of the top `h` arguments.
    mc_args: Vec<(R, R)>,
    /// Total Monte Carlo draws (kept plus discarded).
    mc_total: usize,
}

impl<R: Real> TopEdgeCache<R> {
    /// Builds the cache for a sub-vine whose lower edges are frozen.
    ///
    /// `frozen` must carry an Independence top edge so that its log density
    /// is exactly the sum of the frozen factors.
    fn build(
        frozen: &Plcc<R>,
        margins: &[StableParams<R>],
        obs: &[Vec<R>],
        eps: R,
        mc_samples: usize,
        rng: &mut ChaCha12Rng,
    ) -> Result<Self> {
        let m = frozen.dim();
        let rates_by_dim: Vec<R> = margins
            .iter()
            .map(|p| tail_integral(p, eps))
            .collect::<Result<Vec<_>>>()?;
        // Positions and dimension labels coincide for sub-vines.
        let rates_by_pos: Vec<R> = frozen.order().iter().map(|&k| rates_by_dim[k]).collect();

        let mut frozen_data = R::zero();
        let mut obs_args = Vec::with_capacity(obs.len());
        let mut gamma = vec![R::zero(); m];
        for row in obs {
            for (k, (&x, p)) in row.iter().zip(margins).enumerate() {
                frozen_data = frozen_data + log_levy_density(p, x)?;
                gamma[k] = tail_integral(p, x)?;
            }
            frozen_data = frozen_data + frozen.log_density(&gamma)?;
            let by_pos: Vec<R> = frozen.order().iter().map(|&k| gamma[k]).collect();
            let (a, b) = frozen.top_h_args(&by_pos[..m - 1], by_pos[m - 1])?;
            obs_args.push((norm_quantile(open_unit(a))?, norm_quantile(open_unit(b))?));
        }

        let anchor = rates_by_pos[0];
        let mut mc_args = Vec::new();
        let mut point: Vec<R> = Vec::with_capacity(m - 1);
        for _ in 0..mc_samples {
            point.clear();
            point.push(anchor * draw_open01(rng));
            let mut inside = true;
            for j in 1..m - 1 {
                let w = draw_open01(rng);
                let g = frozen.cond_cdf_inv(&point[..j], w)?;
                if !(g <= rates_by_pos[j]) {
                    inside = false;
                    break;
                }
                point.push(g);
            }
            if inside {
                let (a, b) = frozen.top_h_args(&point, rates_by_pos[m - 1])?;
                mc_args.push((norm_quantile(open_unit(a))?, norm_quantile(open_unit(b))?));
            }
        }
        Ok(TopEdgeCache {
            frozen_data,
            obs_args,
            anchor,
            mc_args,
            mc_total: mc_samples,
        })
    }

    /// Normalizer estimate and standard error under a candidate top family.
    fn normalizer(&self, top: &DistCopulaFamily<R>) -> (R, R) {
        let mut sum = R::zero();
        let mut sumsq = R::zero();
        for &(qa, qb) in &self.mc_args {
            let y = top_h_from_quantiles(top, qa, qb);
            sum = sum + y;
            sumsq = sumsq + y * y;
        }
        let n = R::from_usize(self.mc_total).expect("sample count fits scalar");
        let mean = sum / n;
        let var = (sumsq / n - mean * mean).max(R::zero());
        (self.anchor * mean, self.anchor * (var / n).sqrt())
    }

    /// Full log-likelihood under a candidate top family.
    fn loglik(&self, top: &DistCopulaFamily<R>, horizon: R) -> R {
        let (normalizer, _) = self.normalizer(top);
        let mut acc = -horizon * normalizer + self.frozen_data;
        for &(qa, qb) in &self.obs_args {
            acc = acc + top_log_density_from_quantiles(top, qa, qb);
        }
        acc
    }
}

/// `h(b | a)` of the top family from precomputed normal quantiles.
fn top_h_from_quantiles<R: Real>(top: &DistCopulaFamily<R>, qa: R, qb: R) -> R {
    match top {
        DistCopulaFamily::Independence => crate::dist_copulas::norm_cdf(qb),
        DistCopulaFamily::Gaussian(p) => {
            let denom = (R::one() - p.rho * p.rho).sqrt();
            crate::dist_copulas::norm_cdf((qb - p.rho * qa) / denom)
        }
    }
}

/// Log copula density of the top family from precomputed normal quantiles.
fn top_log_density_from_quantiles<R: Real>(top: &DistCopulaFamily<R>, qa: R, qb: R) -> R {
    match top {
        DistCopulaFamily::Independence => R::zero(),
        DistCopulaFamily::Gaussian(p) => {
            let rho = p.rho;
            let det = R::one() - rho * rho;
            -det.ln() * R::half()
                - (rho * rho * (qa * qa + qb * qb) - R::two() * rho * qa * qb) / (R::two() * det)
        }
    }
}

use crate::real::clamp_open_unit as open_unit;

fn draw_open01<R: Real, G: Rng + ?Sized>(rng: &mut G) -> R {
    open_unit(R::of(rng.random::<f64>()))
}

/// Sequential (tree-by-tree) maximum likelihood fit of all parameters from
/// threshold observations.
///
/// The skeleton fixes the vine kind, the order and the family of every edge;
/// its parameter values are ignored. Unfittable pieces (too few co-jumps,
/// unfitted prerequisites) are marked in the report and the pipeline
/// continues elsewhere.
pub fn sequential_fit<R: Real>(
    series: &JumpSeries<R>,
    skeleton: &VineSpec<R>,
    eps: R,
    options: &FitOptions<R>,
) -> Result<EstimationReport<R>> {
    if let Err(violations) = skeleton.validate() {
        return Err(Error::InvalidVine(violations));
    }
    if !(eps > R::zero()) {
        return Err(Error::domain(
            "sequential_fit",
            format!("eps must be > 0, got {eps}"),
        ));
    }
    let d = skeleton.dim();
    let horizon = series.horizon;
    for ev in &series.events {
        if ev.sizes.len() != d {
            return Err(Error::domain(
                "sequential_fit",
                format!(
                    "event has {} sizes, vine has {d} dimensions",
                    ev.sizes.len()
                ),
            ));
        }
    }

    // Stage 1: marginals from dimension-wise observations.
    let mut marginal_params: Vec<Option<StableParams<R>>> = vec![None; d];
    let mut marginal_records = Vec::with_capacity(d);
    for k in 0..d {
        let obs = observe(series, eps, &[k])?;
        let sizes: Vec<R> = obs.events(series).map(|ev| ev.sizes[k]).collect();
        match fit_marginal(&sizes, horizon, eps) {
            Ok(fit) => {
                marginal_params[k] = Some(fit.params);
                marginal_records.push(MarginalRecord {
                    alpha: Some(fit.params.alpha),
                    beta: Some(fit.params.beta),
                    clamped: fit.clamped,
                    count: sizes.len(),
                    loglik: Some(fit.loglik),
                    fitted: true,
                });
            }
            Err(_) => marginal_records.push(MarginalRecord {
                alpha: None,
                beta: None,
                clamped: false,
                count: sizes.len(),
                loglik: None,
                fitted: false,
            }),
        }
    }

    let mut fitted_spec = skeleton.clone();
    let mut trees: Vec<Vec<EdgeRecord<R>>> = Vec::with_capacity(d - 1);
    let mut edge_fitted: Vec<Vec<bool>> = Vec::with_capacity(d - 1);

    // Stage 2: tree-1 edges from pairwise co-jumps.
    let mut tree1_records = Vec::with_capacity(d - 1);
    let mut tree1_fitted = Vec::with_capacity(d - 1);
    for e in 0..d - 1 {
        let (dim_a, dim_b) = tree1_pair(skeleton, e);
        // Validation admits only Clayton tree-1 edges; the skeleton's
        // parameter value is just the search seed and is ignored.
        let init = skeleton.tree1[e]
            .param()
            .expect("tree-1 edges carry a parameter");
        let family = LevyCopulaFamily::clayton(init)?;
        let obs_idx = observe(series, eps, &[dim_a, dim_b])?;
        let pairs: Vec<(R, R)> = obs_idx
            .events(series)
            .map(|ev| (ev.sizes[dim_a], ev.sizes[dim_b]))
            .collect();
        let count = pairs.len();
        match (&marginal_params[dim_a], &marginal_params[dim_b]) {
            (Some(pa), Some(pb)) => {
                match fit_tree1_edge(&family, (pa, pb), &pairs, eps, horizon, options) {
                    Ok(fit) => {
                        fitted_spec.set_tree1_param(e, fit.family.param());
                        tree1_records.push(EdgeRecord {
                            family: skeleton.tree1[e].kind_name().to_string(),
                            param: Some(fit.family.param()),
                            count,
                            loglik: Some(fit.loglik),
                            fitted: true,
                            normalizer: None,
                            note: None,
                        });
                        tree1_fitted.push(true);
                    }
                    Err(err) => {
                        tree1_records.push(unfitted_edge(
                            skeleton.tree1[e].kind_name(),
                            count,
                            err.to_string(),
                        ));
                        tree1_fitted.push(false);
                    }
                }
            }
            _ => {
                tree1_records.push(unfitted_edge(
                    skeleton.tree1[e].kind_name(),
                    count,
                    "marginal parameters of the pair are unfitted".to_string(),
                ));
                tree1_fitted.push(false);
            }
        }
    }
    trees.push(tree1_records);
    edge_fitted.push(tree1_fitted);

    // Stage 3: higher trees, each edge with all lower parameters frozen.
    for tree in 2..d {
        let mut records = Vec::with_capacity(d - tree);
        let mut fitted_flags = Vec::with_capacity(d - tree);
        for e in 0..d - tree {
            let fam_name = fitted_spec.higher_trees[tree - 2][e].family.kind_name();
            let (sub, dims) = fitted_spec.sub_vine(tree, e)?;
            let prereqs_ok = dims.iter().all(|&k| marginal_params[k].is_some())
                && prerequisite_edges(skeleton.kind, tree, e)
                    .into_iter()
                    .all(|(t, idx)| edge_fitted[t - 1][idx]);
            if !prereqs_ok {
                records.push(unfitted_edge(
                    fam_name,
                    0,
                    "an unfitted prerequisite blocks this edge".to_string(),
                ));
                fitted_flags.push(false);
                continue;
            }
            let obs_idx = observe(series, eps, &dims)?;
            let obs: Vec<Vec<R>> = obs_idx
                .events(series)
                .map(|ev| dims.iter().map(|&k| ev.sizes[k]).collect())
                .collect();
            let count = obs.len();
            if count < 2 {
                records.push(unfitted_edge(
                    fam_name,
                    count,
                    format!("needs at least 2 co-jumps in dimensions {dims:?}, got {count}"),
                ));
                fitted_flags.push(false);
                continue;
            }
            let sub_margins: Vec<StableParams<R>> = dims
                .iter()
                .map(|&k| marginal_params[k].expect("checked above"))
                .collect();
            let candidate_family = &skeleton.higher_trees[tree - 2][e].family;
            let mut rng = ChaCha12Rng::seed_from_u64(options.mc_seed);
            rng.set_stream(((tree as u64) << 32) | e as u64);
            match fit_higher_edge(
                &sub,
                &sub_margins,
                &obs,
                eps,
                horizon,
                candidate_family.param().is_some(),
                options,
                &mut rng,
            ) {
                Ok(fit) => {
                    if let Some(rho) = fit.param {
                        fitted_spec.set_higher_param(tree, e, rho);
                    }
                    records.push(EdgeRecord {
                        family: fam_name.to_string(),
                        param: fit.param,
                        count,
                        loglik: Some(fit.loglik),
                        fitted: true,
                        normalizer: Some(fit.normalizer),
                        note: None,
                    });
                    fitted_flags.push(true);
                }
                Err(err) => {
                    records.push(unfitted_edge(fam_name, count, err.to_string()));
                    fitted_flags.push(false);
                }
            }
        }
        trees.push(records);
        edge_fitted.push(fitted_flags);
    }

    Ok(EstimationReport {
        marginals: marginal_records,
        trees,
        epsilon: eps,
        horizon,
        seed: options.mc_seed,
    })
}

struct HigherFit<R> {
    param: Option<R>,
    loglik: R,
    normalizer: NormalizerRecord<R>,
}

#[allow(clippy::too_many_arguments)]
fn fit_higher_edge<R: Real>(
    sub: &VineSpec<R>,
    margins: &[StableParams<R>],
    obs: &[Vec<R>],
    eps: R,
    horizon: R,
    has_param: bool,
    options: &FitOptions<R>,
    rng: &mut ChaCha12Rng,
) -> Result<HigherFit<R>> {
    let frozen = Plcc::new(sub)?.with_top_edge(DistCopulaFamily::Independence);
    let mut samples = options.mc_samples.max(1);
    let mut doublings = 0u32;
    loop {
        let mut stream = rng.clone();
        let cache = TopEdgeCache::build(&frozen, margins, obs, eps, samples, &mut stream)?;
        let (best_top, loglik) = if has_param {
            let (lo, hi) = options.rho_bounds;
            let (rho_hat, ll) = golden_section_max(
                |rho| {
                    let top = DistCopulaFamily::gaussian(rho).expect("rho inside bounds");
                    cache.loglik(&top, horizon)
                },
                lo,
                hi,
                options.tol,
                300,
            );
            (DistCopulaFamily::gaussian(rho_hat)?, ll)
        } else {
            let top = DistCopulaFamily::Independence;
            let ll = cache.loglik(&top, horizon);
            (top, ll)
        };
        let (estimate, std_error) = cache.normalizer(&best_top);
        let precise = std_error <= R::of(0.01) * estimate.abs();
        if precise || doublings >= options.mc_max_doublings {
            return Ok(HigherFit {
                param: best_top.param(),
                loglik,
                normalizer: NormalizerRecord {
                    estimate,
                    std_error,
                    samples,
                    flagged: !precise,
                },
            });
        }
        samples *= 2;
        doublings += 1;
    }
}

fn unfitted_edge<R>(family: &str, count: usize, note: String) -> EdgeRecord<R> {
    EdgeRecord {
        family: family.to_string(),
        param: None,
        count,
        loglik: None,
        fitted: false,
        normalizer: None,
        note: Some(note),
    }
}

/// Dimension labels coupled by tree-1 edge `e`.
fn tree1_pair<R: Real>(spec: &VineSpec<R>, e: usize) -> (usize, usize) {
    match spec.kind {
        VineKind::DVine => (spec.order[e], spec.order[e + 1]),
        VineKind::CVine => (spec.order[0], spec.order[e + 1]),
    }
}

/// Parent edge indices `(tree, edge)` a higher edge depends on, excluding
/// the edge itself: every lower edge of its sub-vine.
fn prerequisite_edges(kind: VineKind, tree: usize, e: usize) -> Vec<(usize, usize)> {
    let mut deps = Vec::new();
    match kind {
        VineKind::DVine => {
            for idx in e..e + tree {
                deps.push((1, idx));
            }
            for s in 2..tree {
                for idx in e..=e + tree - s {
                    deps.push((s, idx));
                }
            }
        }
        VineKind::CVine => {
            for p in 1..tree {
                deps.push((1, p - 1));
            }
            deps.push((1, tree + e - 1));
            for s in 2..tree {
                for idx in 0..tree - s {
                    deps.push((s, idx));
                }
                deps.push((s, tree + e - s));
            }
        }
    }
    deps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{choose_truncation, simulate_series};

    fn margins2() -> (StableParams<f64>, StableParams<f64>) {
        (
            StableParams::new(0.5, 1.0).unwrap(),
            StableParams::new(0.5, 1.0).unwrap(),
        )
    }

    fn clayton(theta: f64) -> LevyCopulaFamily<f64> {
        LevyCopulaFamily::clayton(theta).unwrap()
    }

    #[test]
    fn pair_loglik_normalizer_only() {
        let (ma, mb) = margins2();
        let ll = pair_loglik(&clayton(5.0), (&ma, &mb), &[], 1e-6, 1.0).unwrap();
        let lambda = clayton(5.0).value(1000.0, 1000.0).unwrap();
        assert!((ll + lambda).abs() < 1e-9);
        assert!((ll + 870.550_563_296_124).abs() < 1e-8);
    }

    #[test]
    fn pair_loglik_single_observation_composes() {
        let (ma, mb) = margins2();
        let ll = pair_loglik(&clayton(1.0), (&ma, &mb), &[(1.0, 1.0)], 1e-4, 1.0).unwrap();
        // Normalizer C(100, 100) = 50; tail coordinates U(1) = 1 each;
        // marginal log densities ln(0.5) each; copula log density ln(0.25).
        let expected = -50.0 + 2.0 * 0.5f64.ln() + 0.25f64.ln();
        assert!(
            (ll - expected).abs() < 1e-12,
            "ll={ll}, expected={expected}"
        );
    }

    #[test]
    fn pair_loglik_prefers_truth_over_gross_misfit() {
        let (ma, mb) = margins2();
        let spec = VineSpec::d_vine(vec![0, 1], vec![clayton(5.0)], vec![]).unwrap();
        let plcc = Plcc::new(&spec).unwrap();
        let m = vec![ma, mb];
        let tau = choose_truncation(&m, 1e-4, 10.0).unwrap();
        let series = simulate_series(&plcc, &m, 1.0, tau, 314).unwrap();
        let obs: Vec<(f64, f64)> = observe(&series, 1e-4, &[0, 1])
            .unwrap()
            .events(&series)
            .map(|ev| (ev.sizes[0], ev.sizes[1]))
            .collect();
        assert!(obs.len() > 30);
        let at_truth = pair_loglik(&clayton(5.0), (&ma, &mb), &obs, 1e-4, 1.0).unwrap();
        let at_tenth = pair_loglik(&clayton(0.5), (&ma, &mb), &obs, 1e-4, 1.0).unwrap();
        assert!(at_truth > at_tenth);
    }

    #[test]
    fn fit_tree1_edge_recovers_truth_within_table_spread() {
        let (ma, mb) = margins2();
        let spec = VineSpec::d_vine(vec![0, 1], vec![clayton(5.0)], vec![]).unwrap();
        let plcc = Plcc::new(&spec).unwrap();
        let m = vec![ma, mb];
        let eps = 1e-6;
        let tau = choose_truncation(&m, eps, 10.0).unwrap();
        let series = simulate_series(&plcc, &m, 1.0, tau, 2024).unwrap();
        let obs: Vec<(f64, f64)> = observe(&series, eps, &[0, 1])
            .unwrap()
            .events(&series)
            .map(|ev| (ev.sizes[0], ev.sizes[1]))
            .collect();
        // Fit with margins estimated from the same data, as the pipeline does.
        let sizes0: Vec<f64> = observe(&series, eps, &[0])
            .unwrap()
            .events(&series)
            .map(|ev| ev.sizes[0])
            .collect();
        let sizes1: Vec<f64> = observe(&series, eps, &[1])
            .unwrap()
            .events(&series)
            .map(|ev| ev.sizes[1])
            .collect();
        let pa = fit_marginal(&sizes0, 1.0, eps).unwrap().params;
        let pb = fit_marginal(&sizes1, 1.0, eps).unwrap().params;
        let fit = fit_tree1_edge(
            &clayton(1.0),
            (&pa, &pb),
            &obs,
            eps,
            1.0,
            &FitOptions::default(),
        )
        .unwrap();
        let theta = fit.family.param();
        // One replicate: within three reported RMSEs of the truth.
        assert!((theta - 5.0).abs() < 3.0 * 0.233, "theta={theta}");
    }

    #[test]
    fn fit_tree1_edge_needs_two_cojumps() {
        let (ma, mb) = margins2();
        let err = fit_tree1_edge(
            &clayton(1.0),
            (&ma, &mb),
            &[(1.0, 2.0)],
            1e-4,
            1.0,
            &FitOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }

    #[test]
    fn cached_data_term_matches_direct_density_sum() {
        use crate::dist_copulas::DistCopulaFamily;
        // d = 3 sub-vine with a Gaussian candidate: the cached evaluator must
        // reproduce frozen + top factor exactly.
        let sub = VineSpec::d_vine(
            vec![0, 1, 2],
            vec![clayton(2.0), clayton(3.0)],
            vec![vec![DistCopulaFamily::gaussian(0.4).unwrap()]],
        )
        .unwrap();
        let margins = vec![StableParams::new(0.5, 1.0).unwrap(); 3];
        let obs = vec![
            vec![0.01, 0.02, 0.015],
            vec![0.5, 0.003, 0.2],
            vec![0.004, 0.004, 0.004],
        ];
        let eps = 1e-3;
        let frozen = Plcc::new(&sub)
            .unwrap()
            .with_top_edge(DistCopulaFamily::Independence);
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let cache = TopEdgeCache::build(&frozen, &margins, &obs, eps, 10, &mut rng).unwrap();
        for &rho in &[-0.5, 0.0, 0.4, 0.9] {
            let top = DistCopulaFamily::gaussian(rho).unwrap();
            let mut expected = 0.0;
            let candidate = {
                let mut s = sub.clone();
                s.set_higher_param(2, 0, rho);
                Plcc::new(&s).unwrap()
            };
            for row in &obs {
                let gamma: Vec<f64> = row
                    .iter()
                    .zip(&margins)
                    .map(|(&x, p)| tail_integral(p, x).unwrap())
                    .collect();
                for (&x, p) in row.iter().zip(&margins) {
                    expected += log_levy_density(p, x).unwrap();
                }
                expected += candidate.log_density(&gamma).unwrap();
            }
            let got = cache.frozen_data
                + cache
                    .obs_args
                    .iter()
                    .map(|&(qa, qb)| top_log_density_from_quantiles(&top, qa, qb))
                    .sum::<f64>();
            assert!(
                (got - expected).abs() < 1e-9,
                "rho={rho}: got={got}, expected={expected}"
            );
        }
    }

    #[test]
    fn cached_normalizer_is_deterministic_and_sane() {
        use crate::dist_copulas::DistCopulaFamily;
        let sub = VineSpec::d_vine(
            vec![0, 1, 2],
            vec![clayton(5.0), clayton(5.0)],
            vec![vec![DistCopulaFamily::gaussian(0.8).unwrap()]],
        )
        .unwrap();
        let margins = vec![StableParams::new(0.5, 1.0).unwrap(); 3];
        let frozen = Plcc::new(&sub)
            .unwrap()
            .with_top_edge(DistCopulaFamily::Independence);
        let build = || {
            let mut rng = ChaCha12Rng::seed_from_u64(55);
            TopEdgeCache::build(&frozen, &margins, &[], 1e-6, 50_000, &mut rng).unwrap()
        };
        let cache = build();
        let cache2 = build();
        let top = DistCopulaFamily::gaussian(0.8).unwrap();
        assert_eq!(cache.normalizer(&top), cache2.normalizer(&top));
        // Against the plain-indicator Monte Carlo value of the same vine.
        let plcc = Plcc::new(&sub).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let direct = plcc
            .value_mc(&[1000.0, 1000.0, 1000.0], 200_000, &mut rng)
            .unwrap();
        let (est, se) = cache.normalizer(&top);
        let gap = (est - direct.estimate).abs();
        let band = 3.0 * (se * se + direct.std_error * direct.std_error).sqrt();
        assert!(
            gap < band,
            "est={est} direct={} band={band}",
            direct.estimate
        );
    }

    #[test]
    fn higher_loglik_independence_candidate_factorizes() {
        use crate::dist_copulas::DistCopulaFamily;
        use rand::SeedableRng;
        // With an independence top edge the density term is the sum of the
        // two pair densities, so the log-likelihood is the pair data terms
        // plus marginal terms minus the trivariate normalizer.
        let sub = VineSpec::d_vine(
            vec![0, 1, 2],
            vec![clayton(2.0), clayton(3.0)],
            vec![vec![DistCopulaFamily::Independence]],
        )
        .unwrap();
        let margins = vec![StableParams::new(0.5, 1.0).unwrap(); 3];
        let obs = vec![vec![0.01, 0.02, 0.015], vec![0.5, 0.003, 0.2]];
        let eps = 1e-3;
        let horizon = 1.0;
        let mc = 50_000;

        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let got = higher_loglik(&sub, &margins, &obs, eps, horizon, mc, &mut rng).unwrap();
        // Same seed, same surface.
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let again = higher_loglik(&sub, &margins, &obs, eps, horizon, mc, &mut rng).unwrap();
        assert_eq!(got, again);

        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let rates: Vec<f64> = margins
            .iter()
            .map(|p| tail_integral(p, eps).unwrap())
            .collect();
        let normalizer = Plcc::new(&sub)
            .unwrap()
            .value_mc(&rates, mc, &mut rng)
            .unwrap()
            .estimate;
        let mut expected = -horizon * normalizer;
        for row in &obs {
            for (&x, p) in row.iter().zip(&margins) {
                expected += log_levy_density(p, x).unwrap();
            }
            let g: Vec<f64> = row
                .iter()
                .zip(&margins)
                .map(|(&x, p)| tail_integral(p, x).unwrap())
                .collect();
            expected += clayton(2.0).log_density(g[0], g[1]).unwrap();
            expected += clayton(3.0).log_density(g[1], g[2]).unwrap();
        }
        assert!(
            (got - expected).abs() < 1e-10,
            "got={got}, expected={expected}"
        );
    }

    #[test]
    fn sequential_fit_two_dims_equals_direct_tree1_fit() {
        let spec = VineSpec::d_vine(vec![0, 1], vec![clayton(2.0)], vec![]).unwrap();
        let plcc = Plcc::new(&spec).unwrap();
        let m = vec![StableParams::new(0.5, 1.0).unwrap(); 2];
        let eps = 1e-4;
        let tau = choose_truncation(&m, eps, 10.0).unwrap();
        let series = simulate_series(&plcc, &m, 1.0, tau, 11).unwrap();
        let options = FitOptions::default();
        let report = sequential_fit(&series, &spec, eps, &options).unwrap();

        let fit_a = {
            let sizes: Vec<f64> = observe(&series, eps, &[0])
                .unwrap()
                .events(&series)
                .map(|ev| ev.sizes[0])
                .collect();
            fit_marginal(&sizes, 1.0, eps).unwrap().params
        };
        let fit_b = {
            let sizes: Vec<f64> = observe(&series, eps, &[1])
                .unwrap()
                .events(&series)
                .map(|ev| ev.sizes[1])
                .collect();
            fit_marginal(&sizes, 1.0, eps).unwrap().params
        };
        let pairs: Vec<(f64, f64)> = observe(&series, eps, &[0, 1])
            .unwrap()
            .events(&series)
            .map(|ev| (ev.sizes[0], ev.sizes[1]))
            .collect();
        let direct =
            fit_tree1_edge(&clayton(1.0), (&fit_a, &fit_b), &pairs, eps, 1.0, &options).unwrap();
        assert_eq!(report.tree1()[0].param, Some(direct.family.param()));
        assert_eq!(report.tree1()[0].loglik, Some(direct.loglik));
        assert_eq!(report.trees.len(), 1);
    }

    #[test]
    fn unfitted_prerequisites_propagate() {
        use crate::dist_copulas::DistCopulaFamily;
        // A horizon so short that co-jumps are too few to fit anything.
        let spec = VineSpec::d_vine(
            vec![0, 1, 2],
            vec![clayton(5.0), clayton(5.0)],
            vec![vec![DistCopulaFamily::gaussian(0.8).unwrap()]],
        )
        .unwrap();
        let plcc = Plcc::new(&spec).unwrap();
        let m = vec![StableParams::new(0.5, 1.0).unwrap(); 3];
        let series = simulate_series(&plcc, &m, 1e-3, 1000.0, 3).unwrap();
        let report = sequential_fit(&series, &spec, 1e-2, &FitOptions::default()).unwrap();
        assert!(report.marginals.iter().any(|r| !r.fitted));
        assert!(report.tree1().iter().all(|r| !r.fitted));
        let tree2 = &report.higher()[0];
        assert!(!tree2[0].fitted);
        assert!(tree2[0].note.is_some());
    }

    #[test]
    fn prerequisite_indexing_matches_sub_vine_shape() {
        // D-vine (3, 1) in d = 5 depends on tree-1 edges 1..=3 and tree-2
        // edges 1..=2.
        let deps = prerequisite_edges(VineKind::DVine, 3, 1);
        assert!(deps.contains(&(1, 1)) && deps.contains(&(1, 3)));
        assert!(deps.contains(&(2, 1)) && deps.contains(&(2, 2)));
        assert!(!deps.contains(&(1, 0)) && !deps.contains(&(2, 0)));
        // C-vine (3, 1) depends on tree-1 edges {0, 1, 3} and tree-2 {0, 2}.
        let deps = prerequisite_edges(VineKind::CVine, 3, 1);
        assert!(deps.contains(&(1, 0)) && deps.contains(&(1, 1)) && deps.contains(&(1, 3)));
        assert!(deps.contains(&(2, 0)) && deps.contains(&(2, 2)));
        assert!(!deps.contains(&(1, 2)) && !deps.contains(&(2, 1)));
    }
}
