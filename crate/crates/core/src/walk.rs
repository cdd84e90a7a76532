//! The censored random walk on a monotone set: from `x`, hold with
//! probability `theta`, otherwise flip a uniform coordinate and move only if
//! the neighbor stays in the set.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{CubePoint, Membership, MonotoneSet};
use crate::error::{Error, Result};
use crate::spectral::{self, InducedLaplacian, SolverMethod};
use crate::sum::CompensatedSum;

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_EPSILON: f64 = 0.25;
/// Largest set scanned from every start.
pub const EXHAUSTIVE_CAP: usize = 4096;
/// Largest set whose gap is cross-checked by a dense eigensolve of `P`.
pub const DIRECT_GAP_CAP: usize = 2048;
pub const GAP_AGREEMENT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta must lie in [0, 1), got {theta}")));
    }
    Ok(())
}

/// Probability mass over the members of a set, by rank.
#[derive(Debug, Clone, PartialEq)]
pub struct DistVector(Vec<f64>);

impl DistVector {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::EmptySet);
        }
        if mass.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument("mass must be finite and nonnegative".into()));
        }
        let total = crate::sum::sum(mass.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("mass sums to {total}, not 1")));
        }
        Ok(Self(mass))
    }

    pub fn point_mass(size: usize, rank: usize) -> Self {
        let mut v = vec![0.0; size];
        v[rank] = 1.0;
        Self(v)
    }

    pub fn uniform(size: usize) -> Self {
        Self(vec![1.0 / size as f64; size])
    }

    pub fn mass(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        crate::sum::sum(self.0.iter().copied())
    }

    /// Half the L1 distance.
    pub fn tv(&self, other: &DistVector) -> f64 {
        tv_between(&self.0, &other.0)
    }

    pub fn tv_to_uniform(&self) -> f64 {
        tv_to_uniform(&self.0)
    }
}

fn tv_between(p: &[f64], q: &[f64]) -> f64 {
    let mut s = CompensatedSum::new();
    s.extend(p.iter().zip(q).map(|(a, b)| (a - b).abs()));
    s.value() / 2.0
}

fn tv_to_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    let mut s = CompensatedSum::new();
    s.extend(p.iter().map(|a| (a - u).abs()));
    s.value() / 2.0
}

/// Transition kernel with holding probability `theta`. Adjacent members
/// exchange mass at rate `(1 - theta) / n` in both directions, so the uniform
/// law is stationary and the chain is reversible.
#[derive(Debug, Clone)]
pub struct CensoredKernel {
    set: Arc<MonotoneSet>,
    laplacian: InducedLaplacian,
    theta: f64,
    stay: Vec<f64>,
}

impl CensoredKernel {
    pub fn new(set: Arc<MonotoneSet>, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let laplacian = InducedLaplacian::new(&set);
        let q = (1.0 - theta) / set.dim() as f64;
        let stay = (0..set.size()).map(|r| 1.0 - laplacian.degree(r) as f64 * q).collect();
        Ok(Self { set, laplacian, theta, stay })
    }

    pub fn set(&self) -> &Arc<MonotoneSet> {
        &self.set
    }

    pub fn laplacian(&self) -> &InducedLaplacian {
        &self.laplacian
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn size(&self) -> usize {
        self.set.size()
    }

    /// Probability of each accepted move, `(1 - theta) / n`.
    pub fn move_prob(&self) -> f64 {
        (1.0 - self.theta) / self.set.dim() as f64
    }

    /// `P(x, y)` by member rank.
    pub fn transition(&self, x: usize, y: usize) -> f64 {
        if x == y {
            self.stay[x]
        } else if self.laplacian.neighbors(x).contains(&(y as u32)) {
            self.move_prob()
        } else {
            0.0
        }
    }

    /// `out = p P`.
    pub fn step_into(&self, p: &[f64], out: &mut [f64]) {
        let q = self.move_prob();
        for (r, o) in out.iter_mut().enumerate() {
            let inflow: f64 = self.laplacian.neighbors(r).iter().map(|&s| p[s as usize]).sum();
            *o = self.stay[r] * p[r] + q * inflow;
        }
    }

    pub fn step(&self, dist: &DistVector) -> DistVector {
        let mut out = vec![0.0; self.size()];
        self.step_into(dist.mass(), &mut out);
        DistVector(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.size();
        let q = self.move_prob();
        let mut p = DMatrix::zeros(m, m);
        for r in 0..m {
            p[(r, r)] = self.stay[r];
            for &s in self.laplacian.neighbors(r) {
                p[(r, s as usize)] = q;
            }
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StartPolicy {
    /// Every member is tried as a start; the result is exact.
    Exhaustive,
    /// Minimal elements and all-ones only; the result is a lower estimate of
    /// the worst case.
    Heuristic,
}

impl StartPolicy {
    pub fn for_size(size: usize) -> Self {
        if size <= EXHAUSTIVE_CAP {
            Self::Exhaustive
        } else {
            Self::Heuristic
        }
    }
}

impl std::fmt::Display for StartPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Exhaustive => "exhaustive",
            Self::Heuristic => "heuristic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TmixResult {
    pub epsilon: f64,
    pub t_mix: u64,
    pub policy: StartPolicy,
    pub starts: usize,
    /// A start attaining `t_mix`.
    pub worst_start: String,
    /// Every start's distance to uniform was non-increasing.
    pub tv_monotone: bool,
}

/// First `t` with `TV(delta_x P^t, uniform) <= epsilon`, plus whether the
/// distance sequence was non-increasing.
fn hitting_time(kernel: &CensoredKernel, start: usize, epsilon: f64, max_steps: u64) -> Result<(u64, bool)> {
    let m = kernel.size();
    let mut p = vec![0.0; m];
    p[start] = 1.0;
    let mut next = vec![0.0; m];
    let mut tv = tv_to_uniform(&p);
    let mut monotone = true;
    let mut t = 0;
    while tv > epsilon {
        if t == max_steps {
            return Err(Error::MixingCap(max_steps));
        }
        kernel.step_into(&p, &mut next);
        std::mem::swap(&mut p, &mut next);
        let d = tv_to_uniform(&p);
        monotone &= d <= tv + 1e-15;
        tv = d;
        t += 1;
    }
    Ok((t, monotone))
}

/// Minimal `t` with worst-start distance to uniform at most `epsilon`.
/// Distance to stationarity is non-increasing from every start, so the
/// worst-start time is the largest per-start hitting time.
pub fn exact_tmix(kernel: &CensoredKernel, epsilon: f64, policy: StartPolicy, max_steps: u64) -> Result<TmixResult> {
    check_epsilon(epsilon)?;
    let set = kernel.set();
    let starts: Vec<usize> = match policy {
        StartPolicy::Exhaustive => {
            if set.size() > EXHAUSTIVE_CAP {
                return Err(Error::InvalidArgument(format!(
                    "exhaustive scan limited to {EXHAUSTIVE_CAP} members, set has {}",
                    set.size()
                )));
            }
            (0..set.size()).collect()
        }
        StartPolicy::Heuristic => {
            let mut s: Vec<usize> =
                set.minimal_elements().iter().map(|&x| set.rank(x).expect("minimal elements are members")).collect();
            s.push(set.size() - 1);
            s.sort_unstable();
            s.dedup();
            s
        }
    };
    let times: Vec<(u64, bool)> =
        starts.par_iter().map(|&r| hitting_time(kernel, r, epsilon, max_steps)).collect::<Result<_>>()?;
    let (worst, _) = times.iter().enumerate().max_by_key(|(i, (t, _))| (*t, std::cmp::Reverse(*i))).expect("non-empty");
    Ok(TmixResult {
        epsilon,
        t_mix: times[worst].0,
        policy,
        starts: starts.len(),
        worst_start: set.point(starts[worst]).to_string(),
        tv_monotone: times.iter().all(|t| t.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainGap {
    /// `(1 - theta) lambda2 / n`
    pub gap: f64,
    pub lambda2: f64,
    /// `1 - (second largest eigenvalue of P)`, when computed.
    pub direct: Option<f64>,
}

pub fn chain_gap(kernel: &CensoredKernel) -> Result<ChainGap> {
    let pair = spectral::lambda2(kernel.laplacian(), SolverMethod::Auto, spectral::DEFAULT_TOL)?;
    let gap = (1.0 - kernel.theta()) * pair.value / kernel.set().dim() as f64;
    let direct = if kernel.size() <= DIRECT_GAP_CAP {
        let mut ev: Vec<f64> = SymmetricEigen::new(kernel.to_dense()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        let d = 1.0 - ev[1];
        if (d - gap).abs() > GAP_AGREEMENT_TOL {
            return Err(Error::GapMismatch { laplacian: gap, direct: d });
        }
        Some(d)
    } else {
        None
    };
    Ok(ChainGap { gap, lambda2: pair.value, direct })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TmixBounds {
    /// `ln(1 / (epsilon * pi_min))`
    pub log_factor: f64,
    /// `1 / gap`
    pub t_rel: f64,
    /// Relaxation-time bound from the Poincaré inequality with constant 2:
    /// `n / ((1 - theta)(1 - sqrt(1 - a)))`.
    pub t_rel_poincare: f64,
    pub spectral: u64,
    pub poincare: u64,
}

/// `ceil(ln(1 / (epsilon pi_min)) t_rel)` with the computed gap and with the
/// Poincaré lower bound on the gap. `gap` may be passed in to avoid
/// recomputing it.
pub fn tmix_bound(kernel: &CensoredKernel, epsilon: f64, gap: Option<f64>) -> Result<TmixBounds> {
    check_epsilon(epsilon)?;
    if kernel.theta() < 0.5 {
        return Err(Error::LazinessRequired(kernel.theta()));
    }
    let set = kernel.set();
    if set.size() == 1 {
        return Ok(TmixBounds { log_factor: 0.0, t_rel: 0.0, t_rel_poincare: 0.0, spectral: 0, poincare: 0 });
    }
    let gap = match gap {
        Some(g) => g,
        None => chain_gap(kernel)?.gap,
    };
    let log_factor = (set.size() as f64 / epsilon).ln();
    let t_rel = 1.0 / gap;
    let t_rel_poincare = set.dim() as f64 * spectral::bound_fp(set.density()) / (1.0 - kernel.theta());
    Ok(TmixBounds {
        log_factor,
        t_rel,
        t_rel_poincare,
        spectral: (log_factor * t_rel).ceil() as u64,
        poincare: (log_factor * t_rel_poincare).ceil() as u64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingReport {
    pub set: String,
    pub dim: usize,
    pub size: usize,
    pub density: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub t_mix: u64,
    pub start_policy: StartPolicy,
    pub worst_start: String,
    pub gap: f64,
    pub gap_direct: Option<f64>,
    pub t_rel: f64,
    pub pi_min: f64,
    pub bound_spectral: u64,
    pub bound_poincare: u64,
    pub tv_monotone: bool,
    /// `t_mix <= bound_spectral <= bound_poincare`, only asserted for an
    /// exhaustive scan.
    pub ordered: bool,
}

pub fn mixing_report(set: Arc<MonotoneSet>, label: &str, theta: f64, epsilon: f64) -> Result<MixingReport> {
    let kernel = CensoredKernel::new(set.clone(), theta)?;
    let tm = exact_tmix(&kernel, epsilon, StartPolicy::for_size(set.size()), DEFAULT_MAX_STEPS)?;
    let gap = if set.size() > 1 { Some(chain_gap(&kernel)?) } else { None };
    let bounds = tmix_bound(&kernel, epsilon, gap.map(|g| g.gap))?;
    let ordered = tm.policy == StartPolicy::Heuristic
        || (tm.t_mix <= bounds.spectral && bounds.spectral <= bounds.poincare);
    Ok(MixingReport {
        set: label.to_string(),
        dim: set.dim(),
        size: set.size(),
        density: set.density(),
        theta,
        epsilon,
        t_mix: tm.t_mix,
        start_policy: tm.policy,
        worst_start: tm.worst_start,
        gap: gap.map_or(0.0, |g| g.gap),
        gap_direct: gap.and_then(|g| g.direct),
        t_rel: bounds.t_rel,
        pi_min: 1.0 / set.size() as f64,
        bound_spectral: bounds.spectral,
        bound_poincare: bounds.poincare,
        tv_monotone: tm.tv_monotone,
        ordered,
    })
}

/// Statistics of one simulated trajectory. The tail is the second half of
/// the run (steps `steps/2 + 1 ..= steps`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStats {
    pub final_point: String,
    #[serde(skip)]
    pub final_index: u64,
    pub coord_means: Vec<f64>,
    /// Mean of `coord_means`, i.e. tail average of `|x| / n`.
    pub weight_fraction: f64,
    pub accepted: u64,
    pub rejected: u64,
    pub held: u64,
    pub tail_len: u64,
}

/// Runs one chain of the censored walk against a membership oracle. `chain`
/// selects an independent stream of the seeded generator.
pub fn simulate(oracle: &dyn Membership, start: CubePoint, steps: u64, theta: f64, seed: u64, chain: u64) -> Result<ChainStats> {
    check_theta(theta)?;
    let n = oracle.dim();
    if start.dim() != n {
        return Err(Error::InvalidArgument(format!("start has dimension {}, set has {n}", start.dim())));
    }
    if !oracle.contains_index(start.index()) {
        return Err(Error::StartNotInSet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    let mut x = start.index();
    let burn = steps / 2;
    let mut counts = vec![0u64; n];
    let (mut accepted, mut rejected, mut held) = (0, 0, 0);
    let tally = |x: u64, counts: &mut [u64]| {
        for (i, c) in counts.iter_mut().enumerate() {
            *c += x >> i & 1;
        }
    };
    if steps == 0 {
        tally(x, &mut counts);
    }
    for t in 1..=steps {
        if rng.gen::<f64>() < theta {
            held += 1;
        } else {
            let y = x ^ (1u64 << rng.gen_range(0..n));
            if oracle.contains_index(y) {
                x = y;
                accepted += 1;
            } else {
                rejected += 1;
            }
        }
        if t > burn {
            tally(x, &mut counts);
        }
    }
    let tail_len = (steps - burn).max(1);
    let coord_means: Vec<f64> = counts.iter().map(|&c| c as f64 / tail_len as f64).collect();
    let weight_fraction = coord_means.iter().sum::<f64>() / n as f64;
    Ok(ChainStats {
        final_point: CubePoint::new(n, x)?.to_string(),
        final_index: x,
        coord_means,
        weight_fraction,
        accepted,
        rejected,
        held,
        tail_len,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub dim: usize,
    pub chains: usize,
    pub steps: u64,
    pub theta: f64,
    pub seed: u64,
    pub start: String,
    /// Across-chain mean of each tail coordinate mean.
    pub coord_means: Vec<f64>,
    /// Standard error of each entry of `coord_means`.
    pub coord_std_errors: Vec<f64>,
    pub weight_fraction: f64,
    pub weight_fraction_se: f64,
    pub final_points: Vec<String>,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = crate::sum::sum(xs.iter().copied()) / k;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = crate::sum::sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (k - 1.0);
    (mean, (var / k).sqrt())
}

pub fn simulate_chains(
    oracle: &dyn Membership,
    start: CubePoint,
    steps: u64,
    chains: usize,
    theta: f64,
    seed: u64,
) -> Result<SimulationSummary> {
    if chains == 0 {
        return Err(Error::InvalidArgument("need at least one chain".into()));
    }
    let runs: Vec<ChainStats> =
        (0..chains).into_par_iter().map(|c| simulate(oracle, start, steps, theta, seed, c as u64)).collect::<Result<_>>()?;
    let n = oracle.dim();
    let (coord_means, coord_std_errors) = (0..n)
        .map(|i| mean_and_se(&runs.iter().map(|r| r.coord_means[i]).collect::<Vec<_>>()))
        .unzip();
    let (weight_fraction, weight_fraction_se) = mean_and_se(&runs.iter().map(|r| r.weight_fraction).collect::<Vec<_>>());
    Ok(SimulationSummary {
        dim: n,
        chains,
        steps,
        theta,
        seed,
        start: start.to_string(),
        coord_means,
        coord_std_errors,
        weight_fraction,
        weight_fraction_se,
        final_points: runs.into_iter().map(|r| r.final_point).collect(),
    })
}

/// One row of the majority-set scaling table. The first eleven fields form
/// the CSV schema; the rest expose the factors of the bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub k: usize,
    pub size: usize,
    pub density: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub tmix_exact: u64,
    pub tmix_policy: StartPolicy,
    pub gap: f64,
    pub bound_spectral: u64,
    pub bound_poincare: u64,
    pub log_factor: f64,
    pub t_rel: f64,
    pub t_rel_poincare: f64,
    /// `bound_poincare / (n^2 ln(2^n / epsilon))`
    pub poincare_normalized: f64,
    pub ordered: bool,
}

/// Mixing table for the majority sets `threshold(n, (n + 1) / 2)`, odd `n`.
pub fn scaling_experiment(ns: &[usize], theta: f64, epsilon: f64) -> Result<Vec<ScalingRow>> {
    check_epsilon(epsilon)?;
    if let Some(n) = ns.iter().find(|&&n| n % 2 == 0) {
        return Err(Error::InvalidArgument(format!("majority needs odd n, got {n}")));
    }
    ns.iter()
        .map(|&n| {
            let k = n.div_ceil(2);
            let set = Arc::new(MonotoneSet::threshold(n, k)?);
            let r = mixing_report(set, &format!("threshold {n} {k}"), theta, epsilon)?;
            let kernel_bounds = (r.size as f64 / epsilon).ln();
            let t_rel_poincare = n as f64 * spectral::bound_fp(r.density) / (1.0 - theta);
            let norm = (n * n) as f64 * (n as f64 * std::f64::consts::LN_2 - epsilon.ln());
            Ok(ScalingRow {
                n,
                k,
                size: r.size,
                density: r.density,
                theta,
                epsilon,
                tmix_exact: r.t_mix,
                tmix_policy: r.start_policy,
                gap: r.gap,
                bound_spectral: r.bound_spectral,
                bound_poincare: r.bound_poincare,
                log_factor: kernel_bounds,
                t_rel: r.t_rel,
                t_rel_poincare,
                poincare_normalized: r.bound_poincare as f64 / norm,
                ordered: r.ordered && r.tv_monotone,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{enumerate_monotone, threshold_set, MembershipOracle};

    fn kernel(set: MonotoneSet, theta: f64) -> CensoredKernel {
        CensoredKernel::new(Arc::new(set), theta).unwrap()
    }

    #[test]
    fn two_state_chain() {
        let k = kernel(MonotoneSet::full(1).unwrap(), 0.0);
        assert_eq!(k.step(&DistVector::point_mass(2, 0)).mass(), &[0.0, 1.0]);
        let k = kernel(MonotoneSet::full(1).unwrap(), 0.5);
        assert_eq!(k.step(&DistVector::point_mass(2, 0)).mass(), &[0.5, 0.5]);
        let r = exact_tmix(&k, 0.25, StartPolicy::Exhaustive, 100).unwrap();
        assert_eq!(r.t_mix, 1);
    }

    #[test]
    fn singleton_is_frozen() {
        let k = kernel(threshold_set(3, 3).unwrap(), 0.0);
        let d = DistVector::point_mass(1, 0);
        assert_eq!(k.step(&d), d);
        assert_eq!(exact_tmix(&k, 0.25, StartPolicy::Exhaustive, 10).unwrap().t_mix, 0);
        let b = tmix_bound(&kernel(threshold_set(3, 3).unwrap(), 0.5), 0.25, None).unwrap();
        assert_eq!((b.spectral, b.poincare), (0, 0));
    }

    #[test]
    fn stationarity_and_mass() {
        for a in enumerate_monotone(4).unwrap().chain((0..100).map(|s| MonotoneSet::random(8, 3, s).unwrap())) {
            let k = kernel(a, 0.3);
            let u = DistVector::uniform(k.size());
            let next = k.step(&u);
            assert!(next.tv(&u) <= 1e-13);
            let p = k.step(&DistVector::point_mass(k.size(), 0));
            assert!((p.total() - 1.0).abs() <= 1e-13);
        }
    }

    #[test]
    fn reversible_and_stochastic() {
        let k = kernel(MonotoneSet::random(6, 4, 11).unwrap(), 0.5);
        let p = k.to_dense();
        for x in 0..k.size() {
            assert!((p.row(x).sum() - 1.0).abs() < 1e-15);
            for y in 0..k.size() {
                assert_eq!(p[(x, y)], p[(y, x)]);
                assert_eq!(p[(x, y)], k.transition(x, y));
            }
        }
    }

    #[test]
    fn periodic_chain_hits_cap() {
        let k = kernel(MonotoneSet::full(2).unwrap(), 0.0);
        assert_eq!(exact_tmix(&k, 0.25, StartPolicy::Exhaustive, 50), Err(Error::MixingCap(50)));
    }

    #[test]
    fn epsilon_and_theta_validated() {
        let k = kernel(MonotoneSet::full(2).unwrap(), 0.5);
        assert!(exact_tmix(&k, 0.0, StartPolicy::Exhaustive, 10).is_err());
        assert!(exact_tmix(&k, 1.0, StartPolicy::Exhaustive, 10).is_err());
        assert!(CensoredKernel::new(Arc::new(MonotoneSet::full(2).unwrap()), 1.0).is_err());
        let lazy_less = kernel(MonotoneSet::full(2).unwrap(), 0.25);
        assert_eq!(tmix_bound(&lazy_less, 0.25, None), Err(Error::LazinessRequired(0.25)));
    }

    #[test]
    fn gap_examples() {
        let g = chain_gap(&kernel(MonotoneSet::full(2).unwrap(), 0.5)).unwrap();
        assert!((g.gap - 0.5).abs() < 1e-12 && g.direct.is_some());
        let g = chain_gap(&kernel(threshold_set(3, 2).unwrap(), 0.5)).unwrap();
        assert!((g.gap - 1.0 / 6.0).abs() < 1e-12);
        let g = chain_gap(&kernel(threshold_set(3, 2).unwrap(), 0.999)).unwrap();
        assert!(g.gap < 1e-3);
    }

    #[test]
    fn bound_examples() {
        let k = kernel(threshold_set(3, 2).unwrap(), 0.5);
        let b = tmix_bound(&k, 0.25, None).unwrap();
        assert_eq!(b.spectral, 17);
        assert!((b.log_factor - 16f64.ln()).abs() < 1e-14);
        let t = exact_tmix(&k, 0.25, StartPolicy::Exhaustive, 1000).unwrap();
        assert!(t.t_mix <= 17 && t.tv_monotone);
        assert!(b.spectral <= b.poincare);

        let k = kernel(MonotoneSet::full(3).unwrap(), 0.5);
        assert_eq!(tmix_bound(&k, 0.25, None).unwrap().spectral, 11);
    }

    #[test]
    fn heuristic_starts() {
        let k = kernel(threshold_set(5, 3).unwrap(), 0.5);
        let h = exact_tmix(&k, 0.25, StartPolicy::Heuristic, 1000).unwrap();
        let e = exact_tmix(&k, 0.25, StartPolicy::Exhaustive, 1000).unwrap();
        assert_eq!(h.starts, 11);
        assert!(h.t_mix <= e.t_mix);
    }

    #[test]
    fn simulation_stays_in_set_and_is_deterministic() {
        let oracle = MembershipOracle::threshold(12, 6).unwrap();
        let start = CubePoint::all_ones(12).unwrap();
        let a = simulate_chains(&oracle, start, 2000, 8, 0.5, 7).unwrap();
        let b = simulate_chains(&oracle, start, 2000, 8, 0.5, 7).unwrap();
        assert_eq!(a, b);
        for p in &a.final_points {
            assert!(p.chars().filter(|&c| c == '1').count() >= 6);
        }
        let c = simulate_chains(&oracle, start, 2000, 8, 0.5, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn simulation_on_singleton_is_constant() {
        let set = threshold_set(4, 4).unwrap();
        let s = simulate(&set, CubePoint::all_ones(4).unwrap(), 500, 0.0, 1, 0).unwrap();
        assert_eq!(s.accepted, 0);
        assert!(s.coord_means.iter().all(|&m| m == 1.0));
        let err = simulate(&set, CubePoint::new(4, 3).unwrap(), 10, 0.0, 1, 0);
        assert_eq!(err, Err(Error::StartNotInSet));
    }

    #[test]
    fn full_cube_weight_near_half() {
        let oracle = MembershipOracle::threshold(10, 0).unwrap();
        let s = simulate_chains(&oracle, CubePoint::new(10, 0).unwrap(), 20_000, 16, 0.5, 3).unwrap();
        assert!((s.weight_fraction * 10.0 - 5.0).abs() < 0.2, "{}", s.weight_fraction);
    }

    #[test]
    fn small_scaling_table() {
        let rows = scaling_experiment(&[3, 5, 7], 0.5, 0.25).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r.ordered && r.tmix_policy == StartPolicy::Exhaustive);
            assert!(r.tmix_exact <= r.bound_spectral && r.bound_spectral <= r.bound_poincare);
        }
        assert!(scaling_experiment(&[4], 0.5, 0.25).is_err());
    }
}
