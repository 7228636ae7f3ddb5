//! Validated pair Lévy copula evaluator.
//!
//! [`Plcc`] stores the typed edge tables of a validated [`VineSpec`] and
//! implements, over vine positions `0..d`:
//!
//! * the conditional CDF of the next coordinate given all previous ones,
//!   built by nesting distributional `h` functions over the vine with the
//!   Lévy conditional at the tree-1 leaf;
//! * its inverse, which unwinds the same nest with `h` inverses and finishes
//!   with the Lévy conditional inverse (this is the simulation chain);
//! * the log density as the product of tree-1 Lévy densities and higher-tree
//!   copula densities evaluated at conditional CDF values (the middle margins
//!   are Lebesgue, so no extra marginal factors appear);
//! * an unbiased Monte Carlo estimator of the copula value on a `d`-box,
//!   anchored on the Lebesgue margin of the first coordinate.

use rand::Rng;

use crate::dist_copulas::DistCopulaFamily;
use crate::error::{Error, Result};
use crate::levy_copulas::LevyCopulaFamily;
use crate::real::Real;

use super::{VineKind, VineSpec};

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate<R> {
    pub estimate: R,
    pub std_error: R,
}

/// Validated pair Lévy copula construction.
#[derive(Debug, Clone)]
pub struct Plcc<R> {
    kind: VineKind,
    order: Vec<usize>,
    /// Tree-1 edges in position space: D-vine edge `i` couples positions
    /// `(i, i+1)`, C-vine edge `i` couples `(0, i+1)`.
    levy: Vec<LevyCopulaFamily<R>>,
    /// `dist[t-2][i]` is edge `i` of tree `t`.
    dist: Vec<Vec<DistCopulaFamily<R>>>,
}

use crate::real::clamp_open_unit as open_unit;

/// Uniform draw clamped away from {0, 1}.
fn draw_open01<R: Real, G: Rng + ?Sized>(rng: &mut G) -> R {
    open_unit(R::of(rng.random::<f64>()))
}

/// Dense triangular tables of D-vine conditionals over `n` positions:
/// `fwd(s, t) = F(value_t | values s..t-1)` and
/// `bwd(s, t) = F(value_s | values s+1..t)`.
struct Triangle<R> {
    n: usize,
    fwd: Vec<R>,
    bwd: Vec<R>,
}

impl<R: Real> Triangle<R> {
    fn idx(&self, s: usize, t: usize) -> usize {
        s * self.n + t
    }
    fn fwd(&self, s: usize, t: usize) -> R {
        self.fwd[self.idx(s, t)]
    }
    fn bwd(&self, s: usize, t: usize) -> R {
        self.bwd[self.idx(s, t)]
    }
}

impl<R: Real> Plcc<R> {
    /// Validates the skeleton and builds the evaluator.
    pub fn new(spec: &VineSpec<R>) -> Result<Self> {
        if let Err(violations) = spec.validate() {
            return Err(Error::InvalidVine(violations));
        }
        let levy = spec
            .tree1
            .iter()
            .map(|f| f.as_levy().expect("validated tree-1 edge"))
            .collect::<Result<Vec<_>>>()?;
        let dist = spec
            .higher_trees
            .iter()
            .map(|tree| {
                tree.iter()
                    .map(|e| e.family.as_dist().expect("validated higher edge"))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Plcc {
            kind: spec.kind,
            order: spec.order.clone(),
            levy,
            dist,
        })
    }

    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn kind(&self) -> VineKind {
        self.kind
    }

    /// Dimension labels in simulation order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Tree-1 edge `i` in position space.
    pub fn levy_edge(&self, i: usize) -> &LevyCopulaFamily<R> {
        &self.levy[i]
    }

    /// Edge `i` of tree `t` (1-based, `t >= 2`).
    pub fn dist_edge(&self, tree: usize, i: usize) -> &DistCopulaFamily<R> {
        &self.dist[tree - 2][i]
    }

    /// The edge of the last tree, present for `d >= 3`.
    pub fn top_edge(&self) -> Option<&DistCopulaFamily<R>> {
        self.dist.last().map(|tree| &tree[0])
    }

    /// Copy of the construction with the top edge family replaced.
    pub(crate) fn with_top_edge(&self, family: DistCopulaFamily<R>) -> Plcc<R> {
        let mut out = self.clone();
        if let Some(tree) = out.dist.last_mut() {
            tree[0] = family;
        }
        out
    }

    fn check_given(&self, op: &'static str, given: &[R]) -> Result<()> {
        let m = given.len();
        if m == 0 || m >= self.dim() {
            return Err(Error::domain(
                op,
                format!(
                    "conditioning on {m} values in a {}-dimensional vine",
                    self.dim()
                ),
            ));
        }
        for &g in given {
            if !(g > R::zero()) || !g.is_finite() {
                return Err(Error::domain(
                    op,
                    format!("conditioning values must be positive and finite, got {g}"),
                ));
            }
        }
        Ok(())
    }

    /// Conditional CDF of the coordinate at position `given.len()` given the
    /// first `given.len()` coordinates, evaluated at `value`.
    pub fn cond_cdf(&self, given: &[R], value: R) -> Result<R> {
        self.check_given("cond_cdf", given)?;
        if value.is_nan() || value < R::zero() {
            return Err(Error::domain(
                "cond_cdf",
                format!("target value must be >= 0, got {value}"),
            ));
        }
        match self.kind {
            VineKind::DVine => self.dvine_cond(given, value),
            VineKind::CVine => self.cvine_cond(given, value),
        }
    }

    /// Inverse of [`Self::cond_cdf`] in the target value.
    pub fn cond_cdf_inv(&self, given: &[R], w: R) -> Result<R> {
        self.check_given("cond_cdf_inv", given)?;
        if !(w > R::zero() && w < R::one()) {
            return Err(Error::domain(
                "cond_cdf_inv",
                format!("probability must lie in (0, 1), got {w}"),
            ));
        }
        match self.kind {
            VineKind::DVine => self.dvine_cond_inv(given, w),
            VineKind::CVine => self.cvine_cond_inv(given, w),
        }
    }

    // ----- D-vine recursions -------------------------------------------------

    fn dvine_triangle(&self, vals: &[R]) -> Result<Triangle<R>> {
        let n = vals.len();
        let mut tri = Triangle {
            n,
            fwd: vec![R::nan(); n * n],
            bwd: vec![R::nan(); n * n],
        };
        for len in 1..n {
            for s in 0..n - len {
                let t = s + len;
                let (f, b) = if len == 1 {
                    (
                        self.levy[s].conditional(vals[s], vals[t])?,
                        self.levy[s].conditional(vals[t], vals[s])?,
                    )
                } else {
                    let e = &self.dist[len - 2][s];
                    let prev_f = tri.fwd(s + 1, t);
                    let prev_b = tri.bwd(s, t - 1);
                    (
                        e.h_func(prev_f, open_unit(prev_b))?,
                        e.h_func(prev_b, open_unit(prev_f))?,
                    )
                };
                let i = tri.idx(s, t);
                tri.fwd[i] = f;
                tri.bwd[i] = b;
            }
        }
        Ok(tri)
    }

    /// Forward chain `F(value | positions from..m-1)` down to `from`,
    /// using a precomputed triangle over the given values.
    fn dvine_fwd_chain(&self, tri: &Triangle<R>, given: &[R], value: R, from: usize) -> Result<R> {
        let m = given.len();
        let mut x = self.levy[m - 1].conditional(given[m - 1], value)?;
        for s in (from..m - 1).rev() {
            let e = &self.dist[m - s - 2][s];
            x = e.h_func(x, open_unit(tri.bwd(s, m - 1)))?;
        }
        Ok(x)
    }

    fn dvine_cond(&self, given: &[R], value: R) -> Result<R> {
        let m = given.len();
        if m == 1 {
            return self.levy[0].conditional(given[0], value);
        }
        let tri = self.dvine_triangle(given)?;
        let inner = self.dvine_fwd_chain(&tri, given, value, 1)?;
        let e = &self.dist[m - 2][0];
        e.h_func(inner, open_unit(tri.bwd(0, m - 1)))
    }

    fn dvine_cond_inv(&self, given: &[R], w: R) -> Result<R> {
        let m = given.len();
        if m == 1 {
            return self.levy[0].conditional_inv(given[0], w);
        }
        let tri = self.dvine_triangle(given)?;
        let mut x = w;
        for s in 0..m - 1 {
            let e = &self.dist[m - s - 2][s];
            x = e.h_inv(open_unit(x), open_unit(tri.bwd(s, m - 1)))?;
        }
        self.levy[m - 1].conditional_inv(given[m - 1], open_unit(x))
    }

    // ----- C-vine recursions -------------------------------------------------

    /// `roots[k] = F(value_k | values 0..k-1)` for `k >= 1`.
    fn cvine_roots(&self, vals: &[R]) -> Result<Vec<R>> {
        let n = vals.len();
        let mut roots = vec![R::nan(); n];
        for k in 1..n {
            let mut x = self.levy[k - 1].conditional(vals[0], vals[k])?;
            for j in 1..k {
                let e = &self.dist[j - 1][k - j - 1];
                x = e.h_func(x, open_unit(roots[j]))?;
            }
            roots[k] = x;
        }
        Ok(roots)
    }

    /// Target chain `F(value | positions 0..=upto)` for the position after
    /// the given block.
    fn cvine_target_chain(&self, roots: &[R], given: &[R], value: R, upto: usize) -> Result<R> {
        let m = given.len();
        let mut x = self.levy[m - 1].conditional(given[0], value)?;
        for k in 1..=upto {
            let e = &self.dist[k - 1][m - k - 1];
            x = e.h_func(x, open_unit(roots[k]))?;
        }
        Ok(x)
    }

    fn cvine_cond(&self, given: &[R], value: R) -> Result<R> {
        let m = given.len();
        let roots = self.cvine_roots(given)?;
        self.cvine_target_chain(&roots, given, value, m - 1)
    }

    fn cvine_cond_inv(&self, given: &[R], w: R) -> Result<R> {
        let m = given.len();
        let roots = self.cvine_roots(given)?;
        let mut x = w;
        for k in (1..m).rev() {
            let e = &self.dist[k - 1][m - k - 1];
            x = e.h_inv(open_unit(x), open_unit(roots[k]))?;
        }
        self.levy[m - 1].conditional_inv(given[0], open_unit(x))
    }

    /// Arguments `(a, b)` of the top-edge `h` function such that for
    /// `given.len() == d - 1`:
    /// `cond_cdf(given, value) = top.h_func(b, a)`.
    ///
    /// Both depend only on edges below the top, which is what lets the
    /// sequential estimator reuse them across candidate top parameters.
    pub(crate) fn top_h_args(&self, given: &[R], value: R) -> Result<(R, R)> {
        let m = given.len();
        debug_assert_eq!(m, self.dim() - 1);
        debug_assert!(m >= 2, "top edge exists only for d >= 3");
        match self.kind {
            VineKind::DVine => {
                let tri = self.dvine_triangle(given)?;
                let b = self.dvine_fwd_chain(&tri, given, value, 1)?;
                Ok((tri.bwd(0, m - 1), b))
            }
            VineKind::CVine => {
                let roots = self.cvine_roots(given)?;
                let b = self.cvine_target_chain(&roots, given, value, m - 2)?;
                Ok((roots[m - 1], b))
            }
        }
    }

    // ----- density -----------------------------------------------------------

    /// Log density of the copula measure at `u`, indexed by dimension label.
    ///
    /// Equals the sum of tree-1 Lévy log densities and higher-tree copula
    /// log densities evaluated at the conditional CDF values.
    pub fn log_density(&self, u: &[R]) -> Result<R> {
        let d = self.dim();
        if u.len() != d {
            return Err(Error::domain(
                "plcc_log_density",
                format!("expected {d} coordinates, got {}", u.len()),
            ));
        }
        for &x in u {
            if !(x > R::zero()) || !x.is_finite() {
                return Err(Error::domain(
                    "plcc_log_density",
                    format!("coordinates must be positive and finite, got {x}"),
                ));
            }
        }
        let vals: Vec<R> = self.order.iter().map(|&dim| u[dim]).collect();
        match self.kind {
            VineKind::DVine => {
                let mut acc = R::zero();
                for i in 0..d - 1 {
                    acc = acc + self.levy[i].log_density(vals[i], vals[i + 1])?;
                }
                if d >= 3 {
                    let tri = self.dvine_triangle(&vals)?;
                    for t in 2..d {
                        for i in 0..d - t {
                            let e = &self.dist[t - 2][i];
                            let a = open_unit(tri.bwd(i, i + t - 1));
                            let b = open_unit(tri.fwd(i + 1, i + t));
                            acc = acc + e.log_density(a, b)?;
                        }
                    }
                }
                Ok(acc)
            }
            VineKind::CVine => {
                let mut acc = R::zero();
                for j in 1..d {
                    acc = acc + self.levy[j - 1].log_density(vals[0], vals[j])?;
                }
                if d >= 3 {
                    // cc[j][k] = F(value_j | values 0..k), built column by column.
                    let mut cc = vec![vec![R::nan(); d]; d];
                    for j in 1..d {
                        cc[j][0] = self.levy[j - 1].conditional(vals[0], vals[j])?;
                    }
                    for k in 1..d - 1 {
                        for j in k + 1..d {
                            let e = &self.dist[k - 1][j - k - 1];
                            acc = acc
                                + e.log_density(open_unit(cc[k][k - 1]), open_unit(cc[j][k - 1]))?;
                            cc[j][k] = e.h_func(cc[j][k - 1], open_unit(cc[k][k - 1]))?;
                        }
                    }
                }
                Ok(acc)
            }
        }
    }

    // ----- Monte Carlo value -------------------------------------------------

    /// Monte Carlo estimate of the copula value (the measure of the box
    /// `[0, u_1] x ... x [0, u_d]`), with `u` indexed by dimension label and
    /// infinite coordinates taking their margin limits.
    ///
    /// The estimator draws the first coordinate uniformly on its Lebesgue
    /// margin and the remaining ones through the conditional chain, so it is
    /// unbiased for any sample count. Trailing infinite coordinates reduce to
    /// the margin sub-vine exactly; a D-vine with leading infinite
    /// coordinates is evaluated through its reversal. For a C-vine with an
    /// infinite root the chain is anchored at the second position, which
    /// requires that coordinate to be finite.
    pub fn value_mc<G: Rng + ?Sized>(
        &self,
        u: &[R],
        samples: usize,
        rng: &mut G,
    ) -> Result<McEstimate<R>> {
        let d = self.dim();
        if u.len() != d {
            return Err(Error::domain(
                "plcc_value_mc",
                format!("expected {d} coordinates, got {}", u.len()),
            ));
        }
        if samples == 0 {
            return Err(Error::domain(
                "plcc_value_mc",
                "need at least one sample".to_string(),
            ));
        }
        for &x in u {
            if x.is_nan() || x < R::zero() {
                return Err(Error::domain(
                    "plcc_value_mc",
                    format!("coordinates must be >= 0, got {x}"),
                ));
            }
        }
        if u.iter().all(|x| x.is_infinite()) {
            return Err(Error::domain(
                "plcc_value_mc",
                "all coordinates are infinite; the copula mass is infinite".to_string(),
            ));
        }
        let vals: Vec<R> = self.order.iter().map(|&dim| u[dim]).collect();
        self.value_mc_positions(&vals, samples, rng)
    }

    fn value_mc_positions<G: Rng + ?Sized>(
        &self,
        vals: &[R],
        samples: usize,
        rng: &mut G,
    ) -> Result<McEstimate<R>> {
        let d = self.dim();
        // Trailing infinite coordinates: the prefix sub-vine is the exact margin.
        let keep = vals
            .iter()
            .rposition(|x| x.is_finite())
            .expect("at least one finite coordinate")
            + 1;
        if keep < d {
            return self
                .prefix(keep)
                .value_mc_positions(&vals[..keep], samples, rng);
        }
        if d == 1 {
            return Ok(McEstimate {
                estimate: vals[0],
                std_error: R::zero(),
            });
        }
        if vals[0].is_infinite() {
            return match self.kind {
                VineKind::DVine => {
                    let rev: Vec<R> = vals.iter().rev().copied().collect();
                    self.reversed().value_mc_positions(&rev, samples, rng)
                }
                VineKind::CVine => self.value_mc_anchored_at_1(vals, samples, rng),
            };
        }
        let anchor = vals[0];
        if anchor == R::zero() {
            return Ok(McEstimate {
                estimate: R::zero(),
                std_error: R::zero(),
            });
        }
        let mut hits = 0usize;
        let mut gamma: Vec<R> = Vec::with_capacity(d);
        for _ in 0..samples {
            gamma.clear();
            gamma.push(anchor * draw_open01(rng));
            let mut inside = true;
            for j in 1..d {
                let w = draw_open01(rng);
                let g = match self.kind {
                    VineKind::DVine => self.dvine_cond_inv(&gamma[..j], w)?,
                    VineKind::CVine => self.cvine_cond_inv(&gamma[..j], w)?,
                };
                if !(g <= vals[j]) {
                    inside = false;
                    break;
                }
                gamma.push(g);
            }
            if inside {
                hits += 1;
            }
        }
        Ok(indicator_estimate(anchor, hits, samples))
    }

    /// C-vine box mass with an infinite root coordinate: anchor the uniform
    /// draw on position 1 and draw the root from the tree-1 conditional.
    fn value_mc_anchored_at_1<G: Rng + ?Sized>(
        &self,
        vals: &[R],
        samples: usize,
        rng: &mut G,
    ) -> Result<McEstimate<R>> {
        let d = self.dim();
        let anchor = vals[1];
        if anchor.is_infinite() {
            return Err(Error::Unsupported(
                "C-vine Monte Carlo value with infinite root and infinite second coordinate; \
                 reorder the vine so a finite coordinate leads"
                    .to_string(),
            ));
        }
        if anchor == R::zero() {
            return Ok(McEstimate {
                estimate: R::zero(),
                std_error: R::zero(),
            });
        }
        let mut hits = 0usize;
        let mut gamma: Vec<R> = Vec::with_capacity(d);
        for _ in 0..samples {
            let g1 = anchor * draw_open01(rng);
            let g0 = self.levy[0].conditional_inv(g1, draw_open01(rng))?;
            gamma.clear();
            gamma.push(g0);
            gamma.push(g1);
            let mut inside = true;
            for j in 2..d {
                let w = draw_open01(rng);
                let g = self.cvine_cond_inv(&gamma[..j], w)?;
                if !(g <= vals[j]) {
                    inside = false;
                    break;
                }
                gamma.push(g);
            }
            if inside {
                hits += 1;
            }
        }
        Ok(indicator_estimate(anchor, hits, samples))
    }

    /// Margin sub-vine over the first `k` positions.
    fn prefix(&self, k: usize) -> Plcc<R> {
        Plcc {
            kind: self.kind,
            order: self.order[..k].to_vec(),
            levy: self.levy[..k.saturating_sub(1)].to_vec(),
            dist: (2..k).map(|t| self.dist[t - 2][..k - t].to_vec()).collect(),
        }
    }

    /// D-vine with the position order reversed; the edge set is unchanged
    /// because both shipped families are exchangeable.
    fn reversed(&self) -> Plcc<R> {
        debug_assert_eq!(self.kind, VineKind::DVine);
        Plcc {
            kind: self.kind,
            order: self.order.iter().rev().copied().collect(),
            levy: self.levy.iter().rev().cloned().collect(),
            dist: self
                .dist
                .iter()
                .map(|tree| tree.iter().rev().cloned().collect())
                .collect(),
        }
    }
}

fn indicator_estimate<R: Real>(anchor: R, hits: usize, samples: usize) -> McEstimate<R> {
    let m = R::from_usize(samples).expect("sample count fits scalar");
    let p = R::from_usize(hits).expect("hit count fits scalar") / m;
    McEstimate {
        estimate: anchor * p,
        std_error: anchor * (p * (R::one() - p) / m).sqrt(),
    }
}
