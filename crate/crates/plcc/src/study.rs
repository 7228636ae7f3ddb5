//! Replication study harness.
//!
//! Runs `reps` independent simulate-then-estimate cycles of a scenario and
//! aggregates per-tree jump counts, means, bias and RMSE. Replicates draw
//! from independent substreams of one master seed and run in parallel;
//! aggregation is order-independent (results are collected per replicate
//! index, then reduced with compensated summation).

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist_copulas::DistCopulaFamily;
use crate::error::{Error, Result};
use crate::estimate::{sequential_fit, EstimationReport, FitOptions};
use crate::levy_copulas::LevyCopulaFamily;
use crate::marginals::StableParams;
use crate::real::Real;
use crate::simulate::{choose_truncation, simulate_series, truncation_loss_mc};
use crate::vine::{Plcc, VineSpec};

/// Built-in dependence scenarios of the five-dimensional study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// High dependence: D-vine, Clayton theta 5, Gaussian rho 0.8.
    H,
    /// Medium dependence: D-vine, Clayton theta 2, Gaussian rho 0.3.
    M,
    /// Low dependence: C-vine, Clayton theta 1, Gaussian rho -0.2.
    L,
}

impl Scenario {
    pub const DIM: usize = 5;

    pub fn theta(self) -> f64 {
        match self {
            Scenario::H => 5.0,
            Scenario::M => 2.0,
            Scenario::L => 1.0,
        }
    }

    pub fn rho(self) -> f64 {
        match self {
            Scenario::H => 0.8,
            Scenario::M => 0.3,
            Scenario::L => -0.2,
        }
    }

    /// True value of the parameters fitted in `tree` (1-based).
    pub fn true_value(self, tree: usize) -> f64 {
        if tree == 1 {
            self.theta()
        } else {
            self.rho()
        }
    }

    pub fn margins<R: Real>(self) -> Vec<StableParams<R>> {
        vec![
            StableParams {
                alpha: R::half(),
                beta: R::one()
            };
            Self::DIM
        ]
    }

    /// The scenario skeleton: a D-vine for H and M, a C-vine for L (the
    /// star shape handles low dependence better numerically).
    pub fn vine_spec<R: Real>(self) -> VineSpec<R> {
        let d = Self::DIM;
        let tree1 =
            vec![LevyCopulaFamily::clayton(R::of(self.theta())).expect("positive theta"); d - 1];
        let higher: Vec<Vec<DistCopulaFamily<R>>> = (2..d)
            .map(|t| vec![DistCopulaFamily::gaussian(R::of(self.rho())).expect("valid rho"); d - t])
            .collect();
        let order = (0..d).collect();
        match self {
            Scenario::H | Scenario::M => {
                VineSpec::d_vine(order, tree1, higher).expect("well-formed scenario")
            }
            Scenario::L => VineSpec::c_vine(order, tree1, higher).expect("well-formed scenario"),
        }
    }

    /// Truncation safety factor keeping the marginal observation bias of the
    /// non-leading dimensions negligible. Weak dependence spreads tail mass
    /// far along the first coordinate, so the low-dependence scenario needs
    /// a much larger factor than the default 10.
    pub fn recommended_safety(self) -> f64 {
        match self {
            Scenario::H | Scenario::M => 10.0,
            Scenario::L => 200.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H" => Ok(Scenario::H),
            "M" => Ok(Scenario::M),
            "L" => Ok(Scenario::L),
            other => Err(Error::domain(
                "Scenario::parse",
                format!("unknown scenario {other:?}; expected H, M or L"),
            )),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::H => write!(f, "H"),
            Scenario::M => write!(f, "M"),
            Scenario::L => write!(f, "L"),
        }
    }
}

/// Full configuration of one study run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenario: Scenario,
    pub epsilon: f64,
    pub horizon: f64,
    pub reps: usize,
    pub seed: u64,
    pub safety: f64,
    pub mc_samples: usize,
}

impl StudyConfig {
    /// Desk-scale defaults for a scenario: 100 replicates, horizon 1,
    /// threshold `1e-6`, scenario-appropriate truncation safety.
    pub fn for_scenario(scenario: Scenario) -> Self {
        StudyConfig {
            scenario,
            epsilon: 1e-6,
            horizon: 1.0,
            reps: 100,
            seed: 1,
            safety: scenario.recommended_safety(),
            mc_samples: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::domain(
                "StudyConfig",
                "reps must be >= 1".to_string(),
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::domain(
                "StudyConfig",
                "epsilon must be > 0".to_string(),
            ));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::domain(
                "StudyConfig",
                "horizon must be > 0".to_string(),
            ));
        }
        if !(self.safety >= 1.0) {
            return Err(Error::domain(
                "StudyConfig",
                "safety must be >= 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Aggregated row of the study table, one per tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRow {
    pub tree: usize,
    /// Mean observation count per edge of the tree.
    pub jumps: f64,
    pub true_value: f64,
    pub mean: f64,
    pub bias: f64,
    pub rmse: f64,
    /// Edge fits that entered the aggregation.
    pub fitted: usize,
    /// Edge fits skipped because the edge could not be fitted.
    pub unfitted: usize,
}

/// One raw estimate, for histogramming.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawEstimate {
    pub rep: usize,
    pub tree: usize,
    pub edge: usize,
    pub estimate: f64,
}

/// Study output: the per-tree table plus every raw estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub rows: Vec<TreeRow>,
    pub raw: Vec<RawEstimate>,
}

/// Runs the full simulate/estimate study described by `config`.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let spec: VineSpec<f64> = config.scenario.vine_spec();
    let margins = config.scenario.margins::<f64>();
    let reports = run_replicates(config, &spec, &margins)?;
    aggregate(config, reports)
}

/// Simulates and estimates every replicate, in parallel, each on its own
/// random substream.
fn run_replicates(
    config: &StudyConfig,
    spec: &VineSpec<f64>,
    margins: &[StableParams<f64>],
) -> Result<Vec<EstimationReport<f64>>> {
    let plcc = Plcc::new(spec)?;
    let tau = choose_truncation(margins, config.epsilon, config.safety)?;
    (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let sim_seed = replicate_seed(config.seed, rep);
            let series = simulate_series(&plcc, margins, config.horizon, tau, sim_seed)?;
            let options = FitOptions {
                mc_samples: config.mc_samples,
                mc_seed: sim_seed ^ 0x9e37_79b9_7f4a_7c15,
                ..FitOptions::default()
            };
            sequential_fit(&series, spec, config.epsilon, &options)
        })
        .collect()
}

/// Deterministic per-replicate seed derived from the master seed.
/// SplitMix64 step, so neighbouring replicates decorrelate fully.
pub fn replicate_seed(master: u64, rep: usize) -> u64 {
    let mut z = master.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(rep as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn aggregate(config: &StudyConfig, reports: Vec<EstimationReport<f64>>) -> Result<StudyResult> {
    let d = Scenario::DIM;
    let mut rows = Vec::with_capacity(d - 1);
    let mut raw = Vec::new();
    for tree in 1..d {
        let true_value = config.scenario.true_value(tree);
        let mut count_sum = Kahan::new();
        let mut count_n = 0usize;
        let mut est_sum = Kahan::new();
        let mut sq_sum = Kahan::new();
        let mut fitted = 0usize;
        let mut unfitted = 0usize;
        for (rep, report) in reports.iter().enumerate() {
            for (edge, record) in report.trees[tree - 1].iter().enumerate() {
                count_sum.add(record.count as f64);
                count_n += 1;
                match record.param {
                    Some(p) if record.fitted => {
                        est_sum.add(p);
                        sq_sum.add((p - true_value) * (p - true_value));
                        fitted += 1;
                        raw.push(RawEstimate {
                            rep,
                            tree,
                            edge,
                            estimate: p,
                        });
                    }
                    _ => unfitted += 1,
                }
            }
        }
        let mean = if fitted > 0 {
            est_sum.sum() / fitted as f64
        } else {
            f64::NAN
        };
        let rmse = if fitted > 0 {
            (sq_sum.sum() / fitted as f64).sqrt()
        } else {
            f64::NAN
        };
        rows.push(TreeRow {
            tree,
            jumps: count_sum.sum() / count_n.max(1) as f64,
            true_value,
            mean,
            bias: mean - true_value,
            rmse,
            fitted,
            unfitted,
        });
    }
    Ok(StudyResult {
        config: config.clone(),
        rows,
        raw,
    })
}

/// Monte Carlo estimate of the per-dimension truncation loss of the study
/// configuration, reported so a run can confirm the safety factor suffices.
pub fn truncation_diagnostic(config: &StudyConfig, samples: usize) -> Result<Vec<f64>> {
    let spec: VineSpec<f64> = config.scenario.vine_spec();
    let margins = config.scenario.margins::<f64>();
    let plcc = Plcc::new(&spec)?;
    let tau = choose_truncation(&margins, config.epsilon, config.safety)?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed ^ 0x7454_5254_4c4f_5353);
    (0..Scenario::DIM)
        .map(|dim| {
            truncation_loss_mc(&plcc, &margins, tau, config.epsilon, dim, samples, &mut rng)
                .map(|est| est.estimate)
        })
        .collect()
}

/// Neumaier compensated accumulator.
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn new() -> Self {
        Kahan { sum: 0.0, c: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.c
    }
}
