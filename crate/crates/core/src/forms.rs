//! Restricted Dirichlet form, variance on a monotone set, restriction to the
//! two slices of the last coordinate, and the two decomposition identities.
//!
//! All expectations are under the uniform measure on the set. Sums run in
//! ascending point-index order with compensated accumulation.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cube::{split, CubePoint, MonotoneSet, SplitPair};
use crate::error::{Error, Result};
use crate::sum::{self, CompensatedSum};

/// Default relative tolerance for identity checks.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Absolute floor under the denominator of a relative residual.
pub const ABS_FLOOR: f64 = 1e-14;

/// A real function on the members of a monotone set, stored in ascending
/// member order.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFunction {
    set: Arc<MonotoneSet>,
    values: Vec<f64>,
}

impl SetFunction {
    pub fn new(set: Arc<MonotoneSet>, values: Vec<f64>) -> Result<Self> {
        if values.len() != set.size() {
            return Err(Error::InvalidArgument(format!(
                "function has {} values but the set has {} members",
                values.len(),
                set.size()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at member {i}")));
        }
        Ok(Self { set, values })
    }

    pub fn from_fn(set: Arc<MonotoneSet>, f: impl Fn(CubePoint) -> f64) -> Result<Self> {
        let values = (0..set.size()).map(|r| f(set.point(r))).collect();
        Self::new(set, values)
    }

    pub fn constant(set: Arc<MonotoneSet>, c: f64) -> Result<Self> {
        let m = set.size();
        Self::new(set, vec![c; m])
    }

    /// `f(x) = x_coord` (0-based coordinate).
    pub fn dictator(set: Arc<MonotoneSet>, coord: usize) -> Result<Self> {
        if coord >= set.dim() {
            return Err(Error::InvalidArgument(format!("coordinate {coord} out of range")));
        }
        Self::from_fn(set, |x| x.coord(coord) as u8 as f64)
    }

    /// `f(x) = |x|`.
    pub fn weight(set: Arc<MonotoneSet>) -> Result<Self> {
        Self::from_fn(set, |x| x.weight() as f64)
    }

    pub fn indicator(set: Arc<MonotoneSet>, point: u32) -> Result<Self> {
        Self::from_fn(set, |x| (x.index() == point as u64) as u8 as f64)
    }

    /// Independent uniform values in `[-1, 1]`.
    pub fn random(set: Arc<MonotoneSet>, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..set.size()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        Self::new(set, values)
    }

    pub fn from_description(set: Arc<MonotoneSet>, desc: &FunctionDescription) -> Result<Self> {
        match desc {
            FunctionDescription::Dictator { coord } => {
                if *coord == 0 || *coord > set.dim() {
                    return Err(Error::InvalidArgument(format!("coordinate {coord} not in 1..={}", set.dim())));
                }
                Self::dictator(set, coord - 1)
            }
            FunctionDescription::Weight => Self::weight(set),
            FunctionDescription::Indicator { point } => {
                if point.dim() != set.dim() {
                    return Err(Error::InvalidArgument(format!("point {point} has the wrong dimension")));
                }
                Self::indicator(set, point.index() as u32)
            }
            FunctionDescription::Random { seed } => Self::random(set, *seed),
        }
    }

    pub fn set(&self) -> &Arc<MonotoneSet> {
        &self.set
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at a point, if the point is a member.
    pub fn at(&self, index: u32) -> Option<f64> {
        self.set.rank(index).map(|r| self.values[r])
    }

    /// `E_{x~A}[f(x)]`.
    pub fn mean(&self) -> f64 {
        sum::sum(self.values.iter().copied()) / self.values.len() as f64
    }
}

/// Text form of a function, resolved against a set at run time.
///
/// ```text
/// dictator i     f(x) = x_i, i in 1..=n
/// weight         f(x) = |x|
/// indicator p    f = 1 at binary point p, 0 elsewhere
/// random seed    i.i.d. uniform values in [-1, 1]
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctionDescription {
    Dictator { coord: usize },
    Weight,
    Indicator { point: CubePoint },
    Random { seed: u64 },
}

impl FromStr for FunctionDescription {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let arg = |what: &str| toks.get(1).copied().ok_or_else(|| Error::Parse(format!("missing {what}")));
        let desc = match toks.first().copied() {
            Some("dictator") => {
                let coord = arg("coordinate")?;
                Self::Dictator { coord: coord.parse().map_err(|_| Error::Parse(format!("invalid coordinate {coord:?}")))? }
            }
            Some("weight") => Self::Weight,
            Some("indicator") => Self::Indicator { point: CubePoint::from_binary(arg("point")?)? },
            Some("random") => {
                let seed = arg("seed")?;
                Self::Random { seed: seed.parse().map_err(|_| Error::Parse(format!("invalid seed {seed:?}")))? }
            }
            Some(other) => return Err(Error::Parse(format!("unknown function {other:?}"))),
            None => return Err(Error::Parse("empty function description".into())),
        };
        let expected = if desc == Self::Weight { 1 } else { 2 };
        if toks.len() != expected {
            return Err(Error::Parse(format!("wrong number of tokens in {s:?}")));
        }
        Ok(desc)
    }
}

impl fmt::Display for FunctionDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dictator { coord } => write!(f, "dictator {coord}"),
            Self::Weight => f.write_str("weight"),
            Self::Indicator { point } => write!(f, "indicator {point}"),
            Self::Random { seed } => write!(f, "random {seed}"),
        }
    }
}

/// `E_A(f) = 1/4 * sum_i E_{x~A}[(f(x) - f(x^i))^2 * 1{x^i in A}]`.
pub fn dirichlet_form(f: &SetFunction) -> f64 {
    let set = &f.set;
    let mut acc = CompensatedSum::new();
    for (r, &x) in set.members().iter().enumerate() {
        for i in 0..set.dim() {
            if let Some(s) = set.rank(x ^ (1 << i)) {
                let d = f.values[r] - f.values[s];
                acc.add(d * d);
            }
        }
    }
    acc.value() / (4.0 * set.size() as f64)
}

/// `Var_A[f]`, computed in two passes.
pub fn variance(f: &SetFunction) -> f64 {
    let mean = f.mean();
    sum::sum(f.values.iter().map(|v| (v - mean) * (v - mean))) / f.values.len() as f64
}

/// `Var_A[f] / E_A(f)`, or `None` when the Dirichlet form vanishes.
pub fn poincare_ratio(f: &SetFunction) -> Option<f64> {
    let e = dirichlet_form(f);
    (e > 0.0).then(|| variance(f) / e)
}

/// `f0(x') = f(x', 0)` on `A0` and `f1(x') = f(x', 1)` on `A1`.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub split: SplitPair,
    /// `f0`; `None` when `A0` is empty.
    pub lower: Option<SetFunction>,
    pub upper: SetFunction,
}

impl Restriction {
    /// `mu0 = E_{A0}[f0]`.
    pub fn mean0(&self) -> Option<f64> {
        self.lower.as_ref().map(SetFunction::mean)
    }

    /// `mu1 = E_{A1}[f1]`.
    pub fn mean1(&self) -> f64 {
        self.upper.mean()
    }

    /// `f1` evaluated on the members of `A0` (which all lie in `A1`), in
    /// ascending order.
    pub fn upper_on_lower(&self) -> Vec<f64> {
        let Some(lower) = &self.lower else { return Vec::new() };
        lower
            .set
            .members()
            .iter()
            .map(|&x| self.upper.at(x).expect("A0 is contained in A1"))
            .collect()
    }
}

pub fn restrict(f: &SetFunction) -> Result<Restriction> {
    let split = split(&f.set)?;
    let cut = f.set.members().partition_point(|&x| x < 1 << (f.set.dim() - 1));
    let lower = match &split.lower {
        Some(a0) => Some(SetFunction::new(a0.clone(), f.values[..cut].to_vec())?),
        None => None,
    };
    let upper = SetFunction::new(split.upper.clone(), f.values[cut..].to_vec())?;
    Ok(Restriction { split, lower, upper })
}

/// A named summand of one side of an identity.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Term {
    pub name: &'static str,
    pub value: f64,
}

/// Both sides of an identity evaluated by independent code paths.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DecompositionReport {
    pub lhs: f64,
    pub terms: Vec<Term>,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub tol: f64,
    /// Residual between the two written forms of the variance cross
    /// coefficient; only set by the variance check.
    pub coefficient_residual: Option<f64>,
    pub passed: bool,
}

impl DecompositionReport {
    fn new(lhs: f64, terms: Vec<Term>, tol: f64, coefficient_residual: Option<f64>) -> Self {
        let rhs = sum::sum(terms.iter().map(|t| t.value));
        let residual = (lhs - rhs).abs();
        let relative_residual = relative(residual, lhs);
        let passed = relative_residual <= tol && coefficient_residual.is_none_or(|c| c <= tol);
        Self { lhs, terms, rhs, residual, relative_residual, tol, coefficient_residual, passed }
    }
}

/// `residual / max(|reference|, ABS_FLOOR)`.
pub fn relative(residual: f64, reference: f64) -> f64 {
    residual / reference.abs().max(ABS_FLOOR)
}

/// `E_A(f) = (a1/2a) E_{A1}(f1) + (a0/2a) E_{A0}(f0) + (a0/4a) E_{A0}[(f0 - f1)^2]`.
///
/// The left side is the global sum over `A`; the right side is assembled
/// from the restrictions. A violation is returned as data.
pub fn check_dirichlet_decomposition(f: &SetFunction, tol: f64) -> Result<DecompositionReport> {
    let r = restrict(f)?;
    let a = f.set.density();
    let (a0, a1) = (r.split.a0(), r.split.a1());
    let upper_term = a1 / (2.0 * a) * dirichlet_form(&r.upper);
    let (lower_term, cross_term) = match &r.lower {
        Some(f0) => {
            let f1_on_a0 = r.upper_on_lower();
            let gap = sum::sum(f0.values.iter().zip(&f1_on_a0).map(|(x, y)| (x - y) * (x - y)))
                / f0.values.len() as f64;
            (a0 / (2.0 * a) * dirichlet_form(f0), a0 / (4.0 * a) * gap)
        }
        None => (0.0, 0.0),
    };
    let terms = vec![
        Term { name: "upper_form", value: upper_term },
        Term { name: "lower_form", value: lower_term },
        Term { name: "cross_edges", value: cross_term },
    ];
    Ok(DecompositionReport::new(dirichlet_form(f), terms, tol, None))
}

/// The two written forms of the variance cross coefficient,
/// `(a1 a0^2 + a0 a1^2) / (8 a^3)` and `a1 a0 / (a0 + a1)^2` with
/// `a = (a0 + a1) / 2`.
pub fn variance_cross_coefficients(a0: f64, a1: f64) -> (f64, f64) {
    let a = (a0 + a1) / 2.0;
    let cubic = (a1 * a0 * a0 + a0 * a1 * a1) / (8.0 * a * a * a);
    let rational = a1 * a0 / ((a0 + a1) * (a0 + a1));
    (cubic, rational)
}

/// `Var_A[f] = (a1/2a) Var_{A1}[f1] + (a0/2a) Var_{A0}[f0] + a1 a0/(a0+a1)^2 (mu1 - mu0)^2`.
///
/// Also checks that both written forms of the cross coefficient agree.
pub fn check_variance_decomposition(f: &SetFunction, tol: f64) -> Result<DecompositionReport> {
    let r = restrict(f)?;
    let a = f.set.density();
    let (a0, a1) = (r.split.a0(), r.split.a1());
    let upper_term = a1 / (2.0 * a) * variance(&r.upper);
    let (lower_term, between_term, coef_residual) = match &r.lower {
        Some(f0) => {
            let (cubic, rational) = variance_cross_coefficients(a0, a1);
            let dm = r.mean1() - f0.mean();
            (a0 / (2.0 * a) * variance(f0), rational * dm * dm, relative((cubic - rational).abs(), rational))
        }
        None => (0.0, 0.0, 0.0),
    };
    let terms = vec![
        Term { name: "upper_variance", value: upper_term },
        Term { name: "lower_variance", value: lower_term },
        Term { name: "between_means", value: between_term },
    ];
    Ok(DecompositionReport::new(variance(f), terms, tol, Some(coef_residual)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::threshold_set;

    fn arc(s: MonotoneSet) -> Arc<MonotoneSet> {
        Arc::new(s)
    }

    #[test]
    fn constant_function_has_zero_form_and_variance() {
        let f = SetFunction::constant(arc(threshold_set(4, 2).unwrap()), 3.5).unwrap();
        assert_eq!(dirichlet_form(&f), 0.0);
        assert_eq!(variance(&f), 0.0);
        assert_eq!(poincare_ratio(&f), None);
    }

    #[test]
    fn dictator_on_square() {
        // 8 directed pairs, 4 cross coordinate 1, each contributing 1
        let f = SetFunction::dictator(arc(MonotoneSet::full(2).unwrap()), 1).unwrap();
        assert_eq!(dirichlet_form(&f), 0.25);
        assert_eq!(variance(&f), 0.25);
    }

    #[test]
    fn singleton_has_no_energy() {
        let f = SetFunction::random(arc(threshold_set(3, 3).unwrap()), 1).unwrap();
        assert_eq!(dirichlet_form(&f), 0.0);
        assert_eq!(variance(&f), 0.0);
    }

    #[test]
    fn variance_of_0123() {
        let f = SetFunction::new(arc(threshold_set(3, 2).unwrap()), vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        // mean 1.5, second moment 14/4 = 3.5
        assert_eq!(variance(&f), 3.5 - 2.25);
    }

    #[test]
    fn rejects_bad_values() {
        let set = arc(threshold_set(3, 2).unwrap());
        assert!(SetFunction::new(set.clone(), vec![0.0; 3]).is_err());
        assert!(SetFunction::new(set, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn restriction_examples() {
        let f = SetFunction::constant(arc(threshold_set(3, 2).unwrap()), 2.0).unwrap();
        let r = restrict(&f).unwrap();
        assert_eq!((r.mean0(), r.mean1()), (Some(2.0), 2.0));

        let top = SetFunction::dictator(arc(MonotoneSet::full(3).unwrap()), 2).unwrap();
        let r = restrict(&top).unwrap();
        assert!(r.lower.as_ref().unwrap().values().iter().all(|&v| v == 0.0));
        assert!(r.upper.values().iter().all(|&v| v == 1.0));

        // f = |x| on {|x| >= 2}: f1 = |x'| + 1 on {|x'| >= 1}, f0 = |x'| on {11}
        let w = SetFunction::weight(arc(threshold_set(3, 2).unwrap())).unwrap();
        let r = restrict(&w).unwrap();
        assert_eq!(**r.upper.set(), threshold_set(2, 1).unwrap());
        assert_eq!(r.upper.values(), &[2.0, 2.0, 3.0]);
        assert_eq!(r.lower.as_ref().unwrap().values(), &[2.0]);
        assert!(restrict(&SetFunction::weight(arc(MonotoneSet::full(1).unwrap())).unwrap()).is_err());
    }

    #[test]
    fn dirichlet_decomposition_hand_values() {
        // top dictator on Q_3: only the cross term survives
        let f = SetFunction::dictator(arc(MonotoneSet::full(3).unwrap()), 2).unwrap();
        let rep = check_dirichlet_decomposition(&f, DEFAULT_REL_TOL).unwrap();
        assert_eq!(rep.lhs, 0.25);
        assert_eq!(rep.terms.iter().map(|t| t.value).collect::<Vec<_>>(), vec![0.0, 0.0, 0.25]);
        assert!(rep.passed);
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn decompositions_on_seeded_random_functions() {
        let f = SetFunction::random(arc(threshold_set(4, 2).unwrap()), 42).unwrap();
        assert!(check_dirichlet_decomposition(&f, DEFAULT_REL_TOL).unwrap().relative_residual < 1e-12);
        let g = SetFunction::random(arc(MonotoneSet::random(5, 4, 11).unwrap()), 5).unwrap();
        let rep = check_variance_decomposition(&g, DEFAULT_REL_TOL).unwrap();
        assert!(rep.relative_residual < 1e-12, "{rep:?}");
        assert!(rep.coefficient_residual.unwrap() < 1e-12);
    }

    #[test]
    fn decomposition_with_empty_lower_slice() {
        let f = SetFunction::random(arc(threshold_set(4, 4).unwrap()), 3).unwrap();
        let rep = check_variance_decomposition(&f, DEFAULT_REL_TOL).unwrap();
        assert!(rep.passed);
        let set = arc(crate::cube::make_upset(4, &[CubePoint::from_binary("1001").unwrap()]).unwrap());
        let f = SetFunction::random(set, 9).unwrap();
        assert!(restrict(&f).unwrap().lower.is_none());
        assert!(check_dirichlet_decomposition(&f, DEFAULT_REL_TOL).unwrap().passed);
        assert!(check_variance_decomposition(&f, DEFAULT_REL_TOL).unwrap().passed);
    }

    #[test]
    fn constant_function_decompositions_vanish() {
        let f = SetFunction::constant(arc(threshold_set(4, 1).unwrap()), -1.0).unwrap();
        for rep in [
            check_dirichlet_decomposition(&f, DEFAULT_REL_TOL).unwrap(),
            check_variance_decomposition(&f, DEFAULT_REL_TOL).unwrap(),
        ] {
            assert_eq!((rep.lhs, rep.rhs, rep.residual), (0.0, 0.0, 0.0));
            assert!(rep.passed);
        }
    }

    #[test]
    fn cross_coefficient_forms_agree() {
        let (cubic, rational) = variance_cross_coefficients(0.3, 0.7);
        assert!((cubic - 0.21).abs() < 1e-15);
        assert!((rational - 0.21).abs() < 1e-15);
    }

    #[test]
    fn poincare_ratio_examples() {
        let f = SetFunction::dictator(arc(MonotoneSet::full(3).unwrap()), 0).unwrap();
        assert_eq!(poincare_ratio(&f), Some(1.0));
        // indicator of the centre of the star {|x| >= 2}: Var 3/16, E 3/8
        let g = SetFunction::indicator(arc(threshold_set(3, 2).unwrap()), 0b111).unwrap();
        assert_eq!(variance(&g), 3.0 / 16.0);
        assert_eq!(dirichlet_form(&g), 3.0 / 8.0);
        assert_eq!(poincare_ratio(&g), Some(0.5));
    }

    #[test]
    fn function_descriptions() {
        let set = arc(MonotoneSet::full(3).unwrap());
        let d: FunctionDescription = "dictator 1".parse().unwrap();
        let f = SetFunction::from_description(set.clone(), &d).unwrap();
        assert_eq!(f, SetFunction::dictator(set.clone(), 0).unwrap());
        let d: FunctionDescription = "indicator 101".parse().unwrap();
        assert_eq!(SetFunction::from_description(set.clone(), &d).unwrap().at(0b101), Some(1.0));
        assert_eq!("random 7".parse::<FunctionDescription>().unwrap().to_string(), "random 7");
        assert_eq!("weight".parse::<FunctionDescription>().unwrap(), FunctionDescription::Weight);
        for bad in ["", "weight 2", "dictator", "dictator x", "indicator 12", "gauss 1"] {
            assert!(bad.parse::<FunctionDescription>().is_err(), "{bad:?}");
        }
        let d: FunctionDescription = "dictator 4".parse().unwrap();
        assert!(SetFunction::from_description(set, &d).is_err());
    }
}
