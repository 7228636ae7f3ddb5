//! Vine skeletons for pair Lévy copula constructions.
//!
//! A `d`-dimensional construction arranges `d - 1` bivariate Lévy copulas in
//! the first tree and `(d-1)(d-2)/2` bivariate distributional copulas in the
//! higher trees of a D-vine or C-vine. [`VineSpec`] is the declarative,
//! serializable skeleton; [`Plcc`] is the validated evaluator carrying the
//! conditional-CDF recursions, the log density, and Monte Carlo evaluation of
//! the copula value.

mod plcc;

pub use plcc::{McEstimate, Plcc};

use serde::{Deserialize, Serialize};

use crate::dist_copulas::DistCopulaFamily;
use crate::error::{Error, Result};
use crate::levy_copulas::LevyCopulaFamily;
use crate::real::Real;

/// Vine arrangement of the pairwise building blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VineKind {
    /// Dimensions form a line; each tree links nearest neighbours.
    #[serde(rename = "d-vine")]
    DVine,
    /// All edges attach to one root dimension (the first entry of `order`).
    #[serde(rename = "c-vine")]
    CVine,
}

/// Bivariate family tag as it appears in a serialized skeleton.
///
/// Tree-1 edges must carry Lévy copula families, higher trees distributional
/// families; [`VineSpec::validate`] reports any mix-up as a violation instead
/// of panicking, so mistyped configuration files surface cleanly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub enum EdgeFamily<R> {
    Clayton { theta: R },
    Gaussian { rho: R },
    Independence,
}

impl<R: Real> EdgeFamily<R> {
    pub fn kind_name(&self) -> &'static str {
        match self {
            EdgeFamily::Clayton { .. } => "clayton",
            EdgeFamily::Gaussian { .. } => "gaussian",
            EdgeFamily::Independence => "independence",
        }
    }

    /// Scalar parameter, if the family has one.
    pub fn param(&self) -> Option<R> {
        match self {
            EdgeFamily::Clayton { theta } => Some(*theta),
            EdgeFamily::Gaussian { rho } => Some(*rho),
            EdgeFamily::Independence => None,
        }
    }

    pub fn with_param(&self, value: R) -> Self {
        match self {
            EdgeFamily::Clayton { .. } => EdgeFamily::Clayton { theta: value },
            EdgeFamily::Gaussian { .. } => EdgeFamily::Gaussian { rho: value },
            EdgeFamily::Independence => EdgeFamily::Independence,
        }
    }

    fn as_levy(&self) -> Option<Result<LevyCopulaFamily<R>>> {
        match self {
            EdgeFamily::Clayton { theta } => Some(LevyCopulaFamily::clayton(*theta)),
            _ => None,
        }
    }

    fn as_dist(&self) -> Option<Result<DistCopulaFamily<R>>> {
        match self {
            EdgeFamily::Gaussian { rho } => Some(DistCopulaFamily::gaussian(*rho)),
            EdgeFamily::Independence => Some(Ok(DistCopulaFamily::Independence)),
            EdgeFamily::Clayton { .. } => None,
        }
    }
}

impl<R> From<LevyCopulaFamily<R>> for EdgeFamily<R> {
    fn from(f: LevyCopulaFamily<R>) -> Self {
        match f {
            LevyCopulaFamily::Clayton(p) => EdgeFamily::Clayton { theta: p.theta },
        }
    }
}

impl<R> From<DistCopulaFamily<R>> for EdgeFamily<R> {
    fn from(f: DistCopulaFamily<R>) -> Self {
        match f {
            DistCopulaFamily::Gaussian(p) => EdgeFamily::Gaussian { rho: p.rho },
            DistCopulaFamily::Independence => EdgeFamily::Independence,
        }
    }
}

/// A higher-tree edge together with its conditioned pair and conditioning
/// set, stated in dimension labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub struct DistEdgeSpec<R> {
    #[serde(flatten)]
    pub family: EdgeFamily<R>,
    pub conditioned: (usize, usize),
    pub conditioning: Vec<usize>,
}

/// Declarative vine skeleton.
///
/// `order` lists dimension labels in simulation order: for a D-vine the line
/// from left to right, for a C-vine the root first. Tree 1 edge `i` couples
/// positions `(i, i+1)` (D-vine) or `(0, i+1)` (C-vine); higher trees follow
/// the usual proximity structure induced by the kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Serialize",
    deserialize = "R: serde::de::DeserializeOwned"
))]
pub struct VineSpec<R> {
    pub kind: VineKind,
    pub order: Vec<usize>,
    pub tree1: Vec<EdgeFamily<R>>,
    pub higher_trees: Vec<Vec<DistEdgeSpec<R>>>,
}

/// One structural defect found by [`VineSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum VineViolation {
    DimensionTooSmall {
        d: usize,
    },
    OrderNotPermutation {
        order: Vec<usize>,
    },
    TreeCount {
        expected: usize,
        found: usize,
    },
    EdgeCount {
        tree: usize,
        expected: usize,
        found: usize,
    },
    WrongFamilyKind {
        tree: usize,
        edge: usize,
        found: &'static str,
    },
    ConditionedMismatch {
        tree: usize,
        edge: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    ConditioningMismatch {
        tree: usize,
        edge: usize,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    BadParam {
        tree: usize,
        edge: usize,
        msg: String,
    },
}

impl std::fmt::Display for VineViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VineViolation::DimensionTooSmall { d } => {
                write!(f, "dimension must be at least 2, got {d}")
            }
            VineViolation::OrderNotPermutation { order } => {
                write!(f, "order {order:?} is not a permutation of 0..d")
            }
            VineViolation::TreeCount { expected, found } => {
                write!(f, "expected {expected} higher trees, found {found}")
            }
            VineViolation::EdgeCount { tree, expected, found } => {
                write!(f, "tree {tree}: expected {expected} edges, found {found}")
            }
            VineViolation::WrongFamilyKind { tree, edge, found } => {
                if *tree == 1 {
                    write!(f, "tree 1 edge {edge}: {found} is not a Lévy copula family")
                } else {
                    write!(f, "tree {tree} edge {edge}: {found} is not a distributional family")
                }
            }
            VineViolation::ConditionedMismatch { tree, edge, expected, found } => write!(
                f,
                "tree {tree} edge {edge}: conditioned pair {found:?} does not match the vine structure (expected {expected:?})"
            ),
            VineViolation::ConditioningMismatch { tree, edge, expected, found } => write!(
                f,
                "tree {tree} edge {edge}: conditioning set {found:?} does not match the vine structure (expected {expected:?})"
            ),
            VineViolation::BadParam { tree, edge, msg } => {
                write!(f, "tree {tree} edge {edge}: {msg}")
            }
        }
    }
}

impl<R: Real> VineSpec<R> {
    /// Number of dimensions.
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    /// D-vine skeleton over `order` with canonical edge annotations.
    pub fn d_vine(
        order: Vec<usize>,
        tree1: Vec<LevyCopulaFamily<R>>,
        higher: Vec<Vec<DistCopulaFamily<R>>>,
    ) -> Result<Self> {
        Self::build(VineKind::DVine, order, tree1, higher)
    }

    /// C-vine skeleton over `order` (root first) with canonical annotations.
    pub fn c_vine(
        order: Vec<usize>,
        tree1: Vec<LevyCopulaFamily<R>>,
        higher: Vec<Vec<DistCopulaFamily<R>>>,
    ) -> Result<Self> {
        Self::build(VineKind::CVine, order, tree1, higher)
    }

    fn build(
        kind: VineKind,
        order: Vec<usize>,
        tree1: Vec<LevyCopulaFamily<R>>,
        higher: Vec<Vec<DistCopulaFamily<R>>>,
    ) -> Result<Self> {
        let mut spec = VineSpec {
            kind,
            order,
            tree1: tree1.into_iter().map(EdgeFamily::from).collect(),
            higher_trees: Vec::new(),
        };
        for (t_idx, families) in higher.into_iter().enumerate() {
            let tree = t_idx + 2;
            let edges = families
                .into_iter()
                .enumerate()
                .map(|(e, fam)| DistEdgeSpec {
                    family: EdgeFamily::from(fam),
                    conditioned: spec.canonical_conditioned(tree, e),
                    conditioning: spec.canonical_conditioning(tree, e),
                })
                .collect();
            spec.higher_trees.push(edges);
        }
        match spec.validate() {
            Ok(()) => Ok(spec),
            Err(violations) => Err(Error::InvalidVine(violations)),
        }
    }

    /// Conditioned pair of tree `t` edge `e` implied by kind and order
    /// (dimension labels). Tree numbering is 1-based, `t >= 2`.
    fn canonical_conditioned(&self, tree: usize, edge: usize) -> (usize, usize) {
        match self.kind {
            VineKind::DVine => (self.order[edge], self.order[edge + tree]),
            VineKind::CVine => (self.order[tree - 1], self.order[tree + edge]),
        }
    }

    /// Conditioning set of tree `t` edge `e` implied by kind and order.
    fn canonical_conditioning(&self, tree: usize, edge: usize) -> Vec<usize> {
        match self.kind {
            VineKind::DVine => self.order[edge + 1..edge + tree].to_vec(),
            VineKind::CVine => self.order[..tree - 1].to_vec(),
        }
    }

    /// Structural validation: edge counts, typing, proximity annotations and
    /// parameter ranges. Returns every violation found.
    pub fn validate(&self) -> std::result::Result<(), Vec<VineViolation>> {
        let mut violations = Vec::new();
        let d = self.dim();
        if d < 2 {
            violations.push(VineViolation::DimensionTooSmall { d });
            return Err(violations);
        }
        let mut seen = vec![false; d];
        let mut perm_ok = true;
        for &label in &self.order {
            if label >= d || seen[label] {
                perm_ok = false;
                break;
            }
            seen[label] = true;
        }
        if !perm_ok {
            violations.push(VineViolation::OrderNotPermutation {
                order: self.order.clone(),
            });
            return Err(violations);
        }

        if self.tree1.len() != d - 1 {
            violations.push(VineViolation::EdgeCount {
                tree: 1,
                expected: d - 1,
                found: self.tree1.len(),
            });
        }
        for (e, fam) in self.tree1.iter().enumerate() {
            match fam.as_levy() {
                None => violations.push(VineViolation::WrongFamilyKind {
                    tree: 1,
                    edge: e,
                    found: fam.kind_name(),
                }),
                Some(Err(err)) => violations.push(VineViolation::BadParam {
                    tree: 1,
                    edge: e,
                    msg: err.to_string(),
                }),
                Some(Ok(_)) => {}
            }
        }

        if self.higher_trees.len() != d - 2 {
            violations.push(VineViolation::TreeCount {
                expected: d - 2,
                found: self.higher_trees.len(),
            });
        }
        for (t_idx, edges) in self.higher_trees.iter().enumerate() {
            let tree = t_idx + 2;
            if tree > d - 1 {
                continue;
            }
            if edges.len() != d - tree {
                violations.push(VineViolation::EdgeCount {
                    tree,
                    expected: d - tree,
                    found: edges.len(),
                });
                continue;
            }
            for (e, edge) in edges.iter().enumerate() {
                match edge.family.as_dist() {
                    None => violations.push(VineViolation::WrongFamilyKind {
                        tree,
                        edge: e,
                        found: edge.family.kind_name(),
                    }),
                    Some(Err(err)) => violations.push(VineViolation::BadParam {
                        tree,
                        edge: e,
                        msg: err.to_string(),
                    }),
                    Some(Ok(_)) => {}
                }
                let expected_pair = self.canonical_conditioned(tree, e);
                if !same_pair(edge.conditioned, expected_pair) {
                    violations.push(VineViolation::ConditionedMismatch {
                        tree,
                        edge: e,
                        expected: expected_pair,
                        found: edge.conditioned,
                    });
                }
                let expected_set = self.canonical_conditioning(tree, e);
                if !same_set(&edge.conditioning, &expected_set) {
                    violations.push(VineViolation::ConditioningMismatch {
                        tree,
                        edge: e,
                        expected: expected_set,
                        found: edge.conditioning.clone(),
                    });
                }
            }
        }

        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Replaces the parameter of tree-1 edge `e`.
    pub fn set_tree1_param(&mut self, e: usize, value: R) {
        self.tree1[e] = self.tree1[e].with_param(value);
    }

    /// Replaces the parameter of higher tree `t` (1-based, `t >= 2`) edge `e`.
    pub fn set_higher_param(&mut self, tree: usize, e: usize, value: R) {
        let fam = &mut self.higher_trees[tree - 2][e].family;
        *fam = fam.with_param(value);
    }

    /// Extracts the sub-vine whose top edge is tree `t` (1-based, `t >= 2`)
    /// edge `e`, relabelled to dimensions `0..t+1`.
    ///
    /// Returns the sub-skeleton together with the parent dimension label of
    /// each sub-dimension. Lower-tree parameters are copied as-is, so a
    /// partially fitted parent produces a partially fitted sub-vine.
    pub fn sub_vine(&self, tree: usize, e: usize) -> Result<(VineSpec<R>, Vec<usize>)> {
        let d = self.dim();
        if !(2..=d - 1).contains(&tree) || e >= d - tree {
            return Err(Error::Internal(format!(
                "sub_vine: no edge ({tree}, {e}) in a {d}-dimensional vine"
            )));
        }
        let m = tree + 1;
        // Parent positions participating in the sub-vine, in parent order.
        let positions: Vec<usize> = match self.kind {
            VineKind::DVine => (e..=e + tree).collect(),
            VineKind::CVine => (0..tree).chain(std::iter::once(tree + e)).collect(),
        };
        let dims: Vec<usize> = positions.iter().map(|&p| self.order[p]).collect();

        let tree1: Vec<EdgeFamily<R>> = match self.kind {
            VineKind::DVine => self.tree1[e..e + tree].to_vec(),
            VineKind::CVine => {
                let mut v: Vec<EdgeFamily<R>> = (1..tree).map(|p| self.tree1[p - 1]).collect();
                v.push(self.tree1[tree + e - 1]);
                v
            }
        };
        let mut sub = VineSpec {
            kind: self.kind,
            order: (0..m).collect(),
            tree1,
            higher_trees: Vec::new(),
        };
        for s in 2..m {
            let parent_tree = &self.higher_trees[s - 2];
            let families: Vec<EdgeFamily<R>> = match self.kind {
                VineKind::DVine => (0..m - s).map(|q| parent_tree[e + q].family).collect(),
                VineKind::CVine => {
                    let mut v: Vec<EdgeFamily<R>> =
                        (0..tree - s).map(|q| parent_tree[q].family).collect();
                    v.push(parent_tree[tree + e - s].family);
                    v
                }
            };
            let edges = families
                .into_iter()
                .enumerate()
                .map(|(q, family)| DistEdgeSpec {
                    family,
                    conditioned: sub.canonical_conditioned(s, q),
                    conditioning: sub.canonical_conditioning(s, q),
                })
                .collect();
            sub.higher_trees.push(edges);
        }
        debug_assert!(sub.validate().is_ok());
        Ok((sub, dims))
    }
}

fn same_pair(a: (usize, usize), b: (usize, usize)) -> bool {
    a == b || (a.1, a.0) == b
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clayton(theta: f64) -> LevyCopulaFamily<f64> {
        LevyCopulaFamily::clayton(theta).unwrap()
    }

    fn gauss(rho: f64) -> DistCopulaFamily<f64> {
        DistCopulaFamily::gaussian(rho).unwrap()
    }

    #[test]
    fn three_dim_d_vine_validates() {
        let spec = VineSpec::d_vine(
            vec![0, 1, 2],
            vec![clayton(1.0), clayton(1.0)],
            vec![vec![gauss(0.8)]],
        )
        .unwrap();
        assert!(spec.validate().is_ok());
        assert_eq!(spec.dim(), 3);
        assert_eq!(spec.higher_trees[0][0].conditioned, (0, 2));
        assert_eq!(spec.higher_trees[0][0].conditioning, vec![1]);
    }

    #[test]
    fn four_dim_d_vine_has_figure_structure() {
        // Edges {c01, c12, c23; C02|1, C13|2; C03|12}.
        let spec = VineSpec::d_vine(
            vec![0, 1, 2, 3],
            vec![clayton(1.0), clayton(2.0), clayton(3.0)],
            vec![vec![gauss(0.1), gauss(0.2)], vec![gauss(0.3)]],
        )
        .unwrap();
        assert!(spec.validate().is_ok());
        assert_eq!(spec.higher_trees[0][0].conditioned, (0, 2));
        assert_eq!(spec.higher_trees[0][1].conditioned, (1, 3));
        assert_eq!(spec.higher_trees[1][0].conditioned, (0, 3));
        assert_eq!(spec.higher_trees[1][0].conditioning, vec![1, 2]);
    }

    #[test]
    fn c_vine_annotations_star_around_root() {
        let spec = VineSpec::c_vine(
            vec![0, 1, 2, 3],
            vec![clayton(1.0), clayton(1.0), clayton(1.0)],
            vec![vec![gauss(0.1), gauss(0.1)], vec![gauss(0.1)]],
        )
        .unwrap();
        assert_eq!(spec.higher_trees[0][0].conditioned, (1, 2));
        assert_eq!(spec.higher_trees[0][1].conditioned, (1, 3));
        assert_eq!(spec.higher_trees[0][0].conditioning, vec![0]);
        assert_eq!(spec.higher_trees[1][0].conditioned, (2, 3));
        assert_eq!(spec.higher_trees[1][0].conditioning, vec![0, 1]);
    }

    #[test]
    fn gaussian_in_tree1_is_a_violation() {
        let mut spec = VineSpec::d_vine(
            vec![0, 1, 2, 3, 4],
            vec![clayton(5.0); 4],
            vec![
                vec![gauss(0.8); 3],
                vec![gauss(0.8); 2],
                vec![gauss(0.8); 1],
            ],
        )
        .unwrap();
        spec.tree1[2] = EdgeFamily::Gaussian { rho: 0.8 };
        let violations = spec.validate().unwrap_err();
        assert!(violations.iter().any(|v| matches!(
            v,
            VineViolation::WrongFamilyKind {
                tree: 1,
                edge: 2,
                found: "gaussian"
            }
        )));
    }

    #[test]
    fn clayton_in_higher_tree_is_a_violation() {
        let mut spec = VineSpec::d_vine(
            vec![0, 1, 2],
            vec![clayton(1.0), clayton(1.0)],
            vec![vec![gauss(0.5)]],
        )
        .unwrap();
        spec.higher_trees[0][0].family = EdgeFamily::Clayton { theta: 1.0 };
        let violations = spec.validate().unwrap_err();
        assert!(violations.iter().any(|v| matches!(
            v,
            VineViolation::WrongFamilyKind {
                tree: 2,
                edge: 0,
                ..
            }
        )));
    }

    #[test]
    fn edge_count_and_annotation_violations() {
        let mut spec = VineSpec::d_vine(
            vec![0, 1, 2, 3],
            vec![clayton(1.0); 3],
            vec![vec![gauss(0.2), gauss(0.2)], vec![gauss(0.2)]],
        )
        .unwrap();
        spec.tree1.pop();
        spec.higher_trees[0][1].conditioned = (0, 3);
        spec.higher_trees[1][0].conditioning = vec![2, 3];
        let violations = spec.validate().unwrap_err();
        assert!(violations.iter().any(|v| matches!(
            v,
            VineViolation::EdgeCount {
                tree: 1,
                expected: 3,
                found: 2
            }
        )));
        assert!(violations.iter().any(|v| matches!(
            v,
            VineViolation::ConditionedMismatch {
                tree: 2,
                edge: 1,
                ..
            }
        )));
        assert!(violations.iter().any(|v| matches!(
            v,
            VineViolation::ConditioningMismatch {
                tree: 3,
                edge: 0,
                ..
            }
        )));
    }

    #[test]
    fn bad_params_are_reported_not_panicked() {
        let mut spec = VineSpec::d_vine(
            vec![0, 1, 2],
            vec![clayton(1.0), clayton(1.0)],
            vec![vec![gauss(0.5)]],
        )
        .unwrap();
        spec.tree1[0] = EdgeFamily::Clayton { theta: -1.0 };
        spec.higher_trees[0][0].family = EdgeFamily::Gaussian { rho: 1.5 };
        let violations = spec.validate().unwrap_err();
        assert_eq!(
            violations
                .iter()
                .filter(|v| matches!(v, VineViolation::BadParam { .. }))
                .count(),
            2
        );
    }

    #[test]
    fn order_must_be_permutation() {
        let spec = VineSpec::<f64> {
            kind: VineKind::DVine,
            order: vec![0, 0, 2],
            tree1: vec![EdgeFamily::Clayton { theta: 1.0 }; 2],
            higher_trees: vec![],
        };
        let violations = spec.validate().unwrap_err();
        assert!(matches!(
            violations[0],
            VineViolation::OrderNotPermutation { .. }
        ));
    }

    #[test]
    fn two_dim_vine_is_legal() {
        let spec = VineSpec::d_vine(vec![0, 1], vec![clayton(2.0)], vec![]).unwrap();
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn serde_round_trip_is_canonical() {
        let spec = VineSpec::d_vine(
            vec![0, 1, 2],
            vec![clayton(5.0), clayton(5.0)],
            vec![vec![gauss(0.8)]],
        )
        .unwrap();
        let json = serde_json::to_string_pretty(&spec).unwrap();
        assert!(json.contains("\"family\": \"clayton\""));
        assert!(json.contains("\"theta\": 5.0"));
        assert!(json.contains("\"d-vine\""));
        let back: VineSpec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let json2 = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(json, json2);
    }

    #[test]
    fn sub_vine_of_d_vine_is_the_contiguous_block() {
        let spec = VineSpec::d_vine(
            vec![4, 3, 2, 1, 0],
            vec![clayton(1.0), clayton(2.0), clayton(3.0), clayton(4.0)],
            vec![
                vec![gauss(0.1), gauss(0.2), gauss(0.3)],
                vec![gauss(0.4), gauss(0.5)],
                vec![gauss(0.6)],
            ],
        )
        .unwrap();
        let (sub, dims) = spec.sub_vine(2, 1).unwrap();
        assert_eq!(dims, vec![3, 2, 1]);
        assert_eq!(sub.dim(), 3);
        assert_eq!(sub.tree1[0].param(), Some(2.0));
        assert_eq!(sub.tree1[1].param(), Some(3.0));
        assert_eq!(sub.higher_trees[0][0].family.param(), Some(0.2));
        assert!(sub.validate().is_ok());

        let (sub, dims) = spec.sub_vine(4, 0).unwrap();
        assert_eq!(dims, vec![4, 3, 2, 1, 0]);
        assert_eq!(sub.higher_trees[2][0].family.param(), Some(0.6));
    }

    #[test]
    fn sub_vine_of_c_vine_keeps_root_block() {
        let spec = VineSpec::c_vine(
            vec![0, 1, 2, 3],
            vec![clayton(1.0), clayton(2.0), clayton(3.0)],
            vec![vec![gauss(0.1), gauss(0.2)], vec![gauss(0.3)]],
        )
        .unwrap();
        // Top edge (2, 1) couples dims (1, 3) given {0}.
        let (sub, dims) = spec.sub_vine(2, 1).unwrap();
        assert_eq!(dims, vec![0, 1, 3]);
        assert_eq!(sub.tree1[0].param(), Some(1.0));
        assert_eq!(sub.tree1[1].param(), Some(3.0));
        assert_eq!(sub.higher_trees[0][0].family.param(), Some(0.2));
        assert!(sub.validate().is_ok());

        let (sub, dims) = spec.sub_vine(3, 0).unwrap();
        assert_eq!(dims, vec![0, 1, 2, 3]);
        assert_eq!(sub.higher_trees[1][0].family.param(), Some(0.3));
    }
}
