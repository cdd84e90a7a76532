//! Numeric certification of the scalar inequalities in the induction step:
//! the five-point inequality, positive semidefiniteness of the 2x2 matrix `G`,
//! the two square-root identities, the discriminant bound, the averaging
//! (Jensen) reduction, and a search for the largest feasible constant `c`.
//!
//! Notation: `a = (a0 + a1) / 2`, `u = sqrt(1 - a)`, `s = sqrt(1 - a0)`,
//! `t = sqrt(1 - a1)`, so `0 <= t <= u <= s <= 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{self, SetFunction};

/// The constant used by the induction.
pub const DEFAULT_C: f64 = 0.5;
/// Points per axis of the default `(a0, a1)` grid.
pub const DEFAULT_GRID: usize = 1001;
pub const DEFAULT_SEED: u64 = 0x5EED_2025;
pub const DEFAULT_DRAWS: usize = 1_000_000;
/// Slack for `Delta <= 0` and `margin >= 0` style checks.
pub const SIGN_SLACK: f64 = 1e-12;

const CHUNK: usize = 4096;

fn check_densities(a0: f64, a1: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a0) || !(0.0..=1.0).contains(&a1) || a0 > a1 {
        return Err(Error::InvalidArgument(format!("need 0 <= a0 <= a1 <= 1, got a0 = {a0}, a1 = {a1}")));
    }
    Ok(())
}

/// Scalars `(a0, a1, alpha, beta, gamma, c)` of the piecewise-constant
/// reduction: `alpha` is `f1` on `A0`, `beta` is `f1` on `A1 \ A0`, `gamma`
/// is `f0` on `A0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InductionParams {
    pub a0: f64,
    pub a1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: f64,
}

impl InductionParams {
    pub fn new(a0: f64, a1: f64, alpha: f64, beta: f64, gamma: f64, c: f64) -> Result<Self> {
        check_densities(a0, a1)?;
        if ![alpha, beta, gamma, c].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite parameter".into()));
        }
        Ok(Self { a0, a1, alpha, beta, gamma, c })
    }

    pub fn a(&self) -> f64 {
        (self.a0 + self.a1) / 2.0
    }

    pub fn s(&self) -> f64 {
        (1.0 - self.a0).sqrt()
    }

    pub fn t(&self) -> f64 {
        (1.0 - self.a1).sqrt()
    }

    pub fn u(&self) -> f64 {
        (1.0 - self.a()).sqrt()
    }

    /// `T = (alpha - beta) / (alpha - gamma) * (a1 - a0)`, undefined when
    /// `alpha = gamma`.
    pub fn t_value(&self) -> Option<f64> {
        (self.alpha != self.gamma).then(|| (self.alpha - self.beta) / (self.alpha - self.gamma) * (self.a1 - self.a0))
    }
}

/// `lhs >= rhs - 1e-12 * max(|lhs|, |rhs|, 1)`.
pub fn holds_with_tol(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - SIGN_SLACK * lhs.abs().max(rhs.abs()).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FivePoint {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `c (u - t)(a1 - a0)(alpha - beta)^2 + (a1/2)(gamma - alpha)^2
///   >= c/(a1 + a0) (1 - u) [a1 (beta - gamma) + a0 (alpha - beta)]^2`.
pub fn five_point(p: &InductionParams) -> Result<FivePoint> {
    if p.a0 + p.a1 <= 0.0 {
        return Err(Error::DegenerateDensities);
    }
    let (u, t) = (p.u(), p.t());
    let ab = p.alpha - p.beta;
    let ga = p.gamma - p.alpha;
    let lhs = p.c * (u - t) * (p.a1 - p.a0) * ab * ab + p.a1 / 2.0 * ga * ga;
    let mix = p.a1 * (p.beta - p.gamma) + p.a0 * ab;
    let rhs = p.c / (p.a1 + p.a0) * (1.0 - u) * mix * mix;
    Ok(FivePoint { lhs, rhs, holds: holds_with_tol(lhs, rhs) })
}

/// The symmetric matrix `G` of the averaging lemma (built for `c = 1/2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GMatrix {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl GMatrix {
    pub fn new(a0: f64, a1: f64) -> Result<Self> {
        check_densities(a0, a1)?;
        let u = (1.0 - (a0 + a1) / 2.0).sqrt();
        let (s, t) = ((1.0 - a0).sqrt(), (1.0 - a1).sqrt());
        Ok(Self { g11: a0 * (u - s + 1.0) / 2.0, g12: a0 / 2.0, g22: a0 * (u - t + 1.0) / 2.0 })
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn trace(&self) -> f64 {
        self.g11 + self.g22
    }

    /// Quadratic form `b^T G b`.
    pub fn form(&self, b0: f64, b1: f64) -> f64 {
        self.g11 * b0 * b0 + 2.0 * self.g12 * b0 * b1 + self.g22 * b1 * b1
    }
}

/// `(u - s + 1)(u - t + 1) - 1` in product form and in the factored form
/// `-(s + t - 2)(sqrt(2) sqrt(s^2 + t^2) - s - t) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdMargin {
    pub product: f64,
    pub factored: f64,
}

impl PsdMargin {
    pub fn forms_agree(&self) -> bool {
        (self.product - self.factored).abs() <= SIGN_SLACK
    }
}

/// Margin whose nonnegativity (times `a0^2 / 4`) is `det G >= 0`.
pub fn g_psd_margin(a0: f64, a1: f64) -> Result<PsdMargin> {
    check_densities(a0, a1)?;
    let (s, t) = ((1.0 - a0).sqrt(), (1.0 - a1).sqrt());
    let u = (1.0 - (a0 + a1) / 2.0).sqrt();
    let product = (u - s + 1.0) * (u - t + 1.0) - 1.0;
    let factored = -0.5 * (s + t - 2.0) * (std::f64::consts::SQRT_2 * (s * s + t * t).sqrt() - s - t);
    Ok(PsdMargin { product, factored })
}

/// Coefficients of the quadratic in `T` left after dividing the reduced
/// inequality by `(alpha - gamma)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadCoeffs {
    /// `c (1 - t)`
    pub coef_a: f64,
    /// `2 c (u + t) a1`
    pub coef_b: f64,
    /// `a1 (1 + u - c a1)(u + t)`
    pub coef_c: f64,
}

impl QuadCoeffs {
    pub fn new(a0: f64, a1: f64, c: f64) -> Result<Self> {
        check_densities(a0, a1)?;
        let u = (1.0 - (a0 + a1) / 2.0).sqrt();
        let t = (1.0 - a1).sqrt();
        Ok(Self {
            coef_a: c * (1.0 - t),
            coef_b: 2.0 * c * (u + t) * a1,
            coef_c: a1 * (1.0 + u - c * a1) * (u + t),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.coef_a * x + self.coef_b) * x + self.coef_c
    }

    pub fn discriminant(&self) -> f64 {
        self.coef_b * self.coef_b - 4.0 * self.coef_a * self.coef_c
    }
}

/// The un-normalized quadratic form in `(alpha, beta, gamma)`:
/// `A (a1-a0)^2 (alpha-beta)^2 + B (a1-a0)(alpha-beta)(alpha-gamma) + C (alpha-gamma)^2`.
pub fn reduced_quadratic(p: &InductionParams) -> Result<f64> {
    let q = QuadCoeffs::new(p.a0, p.a1, p.c)?;
    let x = (p.a1 - p.a0) * (p.alpha - p.beta);
    let y = p.alpha - p.gamma;
    Ok(q.coef_a * x * x + q.coef_b * x * y + q.coef_c * y * y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Discriminant {
    /// `B^2 - 4AC`
    pub delta: f64,
    /// `(1 + u)(2 c a1 - 2 + 2t)`, a positive multiple of `delta` whenever
    /// `a1 (u + t) > 0`. At `c = 1/2` this is `(1 + u)(a1 - 2 + 2 sqrt(1 - a1))`.
    pub reduced: f64,
    pub signs_agree: bool,
}

pub fn discriminant(a0: f64, a1: f64, c: f64) -> Result<Discriminant> {
    let q = QuadCoeffs::new(a0, a1, c)?;
    let delta = q.discriminant();
    let u = (1.0 - (a0 + a1) / 2.0).sqrt();
    let t = (1.0 - a1).sqrt();
    let reduced = (1.0 + u) * (2.0 * c * a1 - 2.0 + 2.0 * t);
    let signs_agree = delta.abs() <= SIGN_SLACK || reduced.abs() <= SIGN_SLACK || (delta > 0.0) == (reduced > 0.0);
    Ok(Discriminant { delta, reduced, signs_agree })
}

/// Residuals of `u - t = (a1 - a0) / (2 (u + t))` and
/// `1 - u = (a1 + a0) / (2 (1 + u))`, each measured against the magnitude of
/// the operands (`max(1, u + t)`), since `u - t` itself may cancel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqrtResiduals {
    pub first: f64,
    pub second: f64,
}

pub fn sqrt_identities(a0: f64, a1: f64) -> Result<SqrtResiduals> {
    check_densities(a0, a1)?;
    let u = (1.0 - (a0 + a1) / 2.0).sqrt();
    let t = (1.0 - a1).sqrt();
    let first_rhs = if u + t > 0.0 { (a1 - a0) / (2.0 * (u + t)) } else { 0.0 };
    let first = ((u - t) - first_rhs).abs() / (u + t).max(1.0);
    let second = ((1.0 - u) - (a1 + a0) / (2.0 * (1.0 + u))).abs();
    Ok(SqrtResiduals { first, second })
}

/// Left and right sides of the pre-reduction five-point inequality for an
/// actual function and for its piecewise average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JensenReport {
    pub c: f64,
    pub params: InductionParams,
    pub lhs_full: f64,
    pub lhs_averaged: f64,
    pub rhs_full: f64,
    pub rhs_averaged: f64,
    /// `|Var_{A1}[avg f1] - (a1 a0 - a0^2)/a1^2 (alpha - beta)^2|`
    pub variance_closed_form_residual: f64,
    /// `Var_{A0}[avg f0]`, zero up to rounding.
    pub lower_variance_averaged: f64,
    /// Residual between the averaged sides and `(a0/a1)` times the scalar
    /// five-point sides.
    pub five_point_residual: f64,
    pub holds: bool,
}

fn five_point_sides(c: f64, a0: f64, a1: f64, var1: f64, var0: f64, gap: f64, dmean: f64) -> (f64, f64) {
    let a = (a0 + a1) / 2.0;
    let u = (1.0 - a).sqrt();
    let (s, t) = ((1.0 - a0).sqrt(), (1.0 - a1).sqrt());
    let lhs = c * a1 * (u - t) * var1 + c * a0 * (u - s) * var0 + a0 / 2.0 * gap;
    let rhs = c * a1 * a0 / (a0 + a1) * (1.0 - u) * dmean * dmean;
    (lhs, rhs)
}

/// Replaces `f1` by its means on `A0` and `A1 \ A0` and `f0` by its mean on
/// `A0`, then compares both sides of
/// `c a1 (u-t) Var[f1] + c a0 (u-s) Var[f0] + (a0/2) E_{A0}[(f0-f1)^2]
///   >= c a1 a0/(a0+a1) (1-u)(mu1 - mu0)^2`.
pub fn jensen_reduction_check(f: &SetFunction, c: f64) -> Result<JensenReport> {
    let r = forms::restrict(f)?;
    let f0 = r
        .lower
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("A0 is empty; the reduction is vacuous".into()))?;
    let (a0, a1) = (r.split.a0(), r.split.a1());
    let f1_on_a0 = r.upper_on_lower();
    let gap = |g0: &[f64], g1: &[f64]| crate::sum::sum(g0.iter().zip(g1).map(|(x, y)| (x - y) * (x - y))) / g0.len() as f64;

    let (mu0, mu1) = (f0.mean(), r.mean1());
    let (lhs_full, rhs_full) = five_point_sides(
        c,
        a0,
        a1,
        forms::variance(&r.upper),
        forms::variance(f0),
        gap(f0.values(), &f1_on_a0),
        mu1 - mu0,
    );

    let a0_set = f0.set();
    let alpha = crate::sum::sum(f1_on_a0.iter().copied()) / f1_on_a0.len() as f64;
    let outside: Vec<f64> = r
        .upper
        .set()
        .members()
        .iter()
        .zip(r.upper.values())
        .filter(|(x, _)| !a0_set.contains(**x))
        .map(|(_, &v)| v)
        .collect();
    let beta = if outside.is_empty() { alpha } else { crate::sum::sum(outside.iter().copied()) / outside.len() as f64 };
    let gamma = mu0;

    let avg_f1 = SetFunction::from_fn(r.upper.set().clone(), |x| if a0_set.contains(x.index() as u32) { alpha } else { beta })?;
    let avg_f0 = SetFunction::constant(a0_set.clone(), gamma)?;
    let var1 = forms::variance(&avg_f1);
    let var0 = forms::variance(&avg_f0);
    let (lhs_averaged, rhs_averaged) = five_point_sides(
        c,
        a0,
        a1,
        var1,
        var0,
        (gamma - alpha) * (gamma - alpha),
        avg_f1.mean() - avg_f0.mean(),
    );

    let closed = (a1 * a0 - a0 * a0) / (a1 * a1) * (alpha - beta) * (alpha - beta);
    let params = InductionParams::new(a0, a1, alpha, beta, gamma, c)?;
    let fp = five_point(&params)?;
    let scale = a0 / a1;
    let five_point_residual = (fp.lhs * scale - lhs_averaged).abs().max((fp.rhs * scale - rhs_averaged).abs());

    Ok(JensenReport {
        c,
        params,
        lhs_full,
        lhs_averaged,
        rhs_full,
        rhs_averaged,
        variance_closed_form_residual: (var1 - closed).abs(),
        lower_variance_averaged: var0,
        five_point_residual,
        holds: lhs_averaged <= lhs_full + SIGN_SLACK,
    })
}

/// Values `0, 1/(points-1), ..., 1`.
fn axis(points: usize) -> Vec<f64> {
    let d = (points - 1) as f64;
    (0..points).map(|i| i as f64 / d).collect()
}

fn check_grid(points: usize) -> Result<()> {
    if points < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points per axis, got {points}")));
    }
    Ok(())
}

/// Summary of `G` over the triangular grid `0 <= a0 <= a1 <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdGridSummary {
    pub points: usize,
    pub min_margin: f64,
    pub argmin: (f64, f64),
    pub min_det: f64,
    pub min_trace: f64,
    pub max_form_gap: f64,
}

pub fn psd_grid(points: usize) -> Result<PsdGridSummary> {
    check_grid(points)?;
    let xs = axis(points);
    let rows: Vec<PsdGridSummary> = (0..points)
        .into_par_iter()
        .map(|i| {
            let mut row = PsdGridSummary {
                points: 0,
                min_margin: f64::INFINITY,
                argmin: (0.0, 0.0),
                min_det: f64::INFINITY,
                min_trace: f64::INFINITY,
                max_form_gap: 0.0,
            };
            for &a1 in &xs[i..] {
                let a0 = xs[i];
                let m = g_psd_margin(a0, a1).expect("grid point is valid");
                let g = GMatrix::new(a0, a1).expect("grid point is valid");
                row.points += 1;
                if m.product < row.min_margin {
                    row.min_margin = m.product;
                    row.argmin = (a0, a1);
                }
                row.min_det = row.min_det.min(g.det());
                row.min_trace = row.min_trace.min(g.trace());
                row.max_form_gap = row.max_form_gap.max((m.product - m.factored).abs());
            }
            row
        })
        .collect();
    Ok(rows.into_iter().reduce(|acc, r| PsdGridSummary {
        points: acc.points + r.points,
        min_margin: acc.min_margin.min(r.min_margin),
        argmin: if r.min_margin < acc.min_margin { r.argmin } else { acc.argmin },
        min_det: acc.min_det.min(r.min_det),
        min_trace: acc.min_trace.min(r.min_trace),
        max_form_gap: acc.max_form_gap.max(r.max_form_gap),
    }).expect("grid is non-empty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscriminantGridSummary {
    pub points: usize,
    pub c: f64,
    pub max_delta: f64,
    pub argmax: (f64, f64),
    /// Grid points with `delta > SIGN_SLACK`.
    pub violations: usize,
    pub sign_disagreements: usize,
}

pub fn discriminant_grid(points: usize, c: f64) -> Result<DiscriminantGridSummary> {
    check_grid(points)?;
    let xs = axis(points);
    let rows: Vec<DiscriminantGridSummary> = (0..points)
        .into_par_iter()
        .map(|i| {
            let mut row = DiscriminantGridSummary {
                points: 0,
                c,
                max_delta: f64::NEG_INFINITY,
                argmax: (0.0, 0.0),
                violations: 0,
                sign_disagreements: 0,
            };
            for &a1 in &xs[i..] {
                let d = discriminant(xs[i], a1, c).expect("grid point is valid");
                row.points += 1;
                if d.delta > row.max_delta {
                    row.max_delta = d.delta;
                    row.argmax = (xs[i], a1);
                }
                row.violations += (d.delta > SIGN_SLACK) as usize;
                row.sign_disagreements += (!d.signs_agree) as usize;
            }
            row
        })
        .collect();
    Ok(rows.into_iter().reduce(|acc, r| DiscriminantGridSummary {
        points: acc.points + r.points,
        c,
        max_delta: acc.max_delta.max(r.max_delta),
        argmax: if r.max_delta > acc.max_delta { r.argmax } else { acc.argmax },
        violations: acc.violations + r.violations,
        sign_disagreements: acc.sign_disagreements + r.sign_disagreements,
    }).expect("grid is non-empty"))
}

/// Draw `k` of a seeded sweep. Chunk `j` of `CHUNK` draws uses stream `j` of
/// the generator, so results do not depend on the thread count.
fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// `(a0 <= a1)` uniform on the triangle, `alpha, beta, gamma` uniform in `[-1, 1]`.
fn draw_params(rng: &mut ChaCha8Rng, c: f64) -> InductionParams {
    let (x, y): (f64, f64) = (rng.gen(), rng.gen());
    let (a0, a1) = if x <= y { (x, y) } else { (y, x) };
    InductionParams {
        a0,
        a1,
        alpha: rng.gen_range(-1.0..=1.0),
        beta: rng.gen_range(-1.0..=1.0),
        gamma: rng.gen_range(-1.0..=1.0),
        c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FivePointSweep {
    pub draws: usize,
    pub seed: u64,
    pub c: f64,
    pub violations: usize,
    /// Smallest `lhs - rhs` seen.
    pub min_margin: f64,
    /// First violating draw (lowest draw index).
    pub witness: Option<InductionParams>,
}

pub fn five_point_sweep(draws: usize, seed: u64, c: f64) -> FivePointSweep {
    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<(usize, f64, Option<InductionParams>)> = (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = chunk_rng(seed, j);
            let n = CHUNK.min(draws - j * CHUNK);
            let (mut bad, mut min_margin, mut witness) = (0usize, f64::INFINITY, None);
            for _ in 0..n {
                let p = draw_params(&mut rng, c);
                let Ok(fp) = five_point(&p) else { continue };
                min_margin = min_margin.min(fp.lhs - fp.rhs);
                if !fp.holds {
                    bad += 1;
                    witness.get_or_insert(p);
                }
            }
            (bad, min_margin, witness)
        })
        .collect();
    let mut out = FivePointSweep { draws, seed, c, violations: 0, min_margin: f64::INFINITY, witness: None };
    for (bad, m, w) in parts {
        out.violations += bad;
        out.min_margin = out.min_margin.min(m);
        if out.witness.is_none() {
            out.witness = w;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticSweep {
    pub pairs: usize,
    pub per_pair: usize,
    pub c: f64,
    pub violations: usize,
    /// Smallest value of the quadratic divided by `max(1, |A T^2|, |B T|, |C|)`.
    pub min_scaled_value: f64,
}

/// Checks `A T^2 + B T + C >= 0` on Cauchy-distributed `T` (plus the vertex
/// `-B / 2A`) for random `(a0, a1)` pairs.
pub fn quadratic_sweep(pairs: usize, per_pair: usize, seed: u64, c: f64) -> QuadraticSweep {
    let parts: Vec<(usize, f64)> = (0..pairs)
        .into_par_iter()
        .map(|j| {
            let mut rng = chunk_rng(seed, j);
            let p = draw_params(&mut rng, c);
            let q = QuadCoeffs::new(p.a0, p.a1, c).expect("drawn densities are valid");
            let vertex = (q.coef_a > 0.0).then(|| -q.coef_b / (2.0 * q.coef_a));
            let mut bad = 0;
            let mut min_scaled = f64::INFINITY;
            let ts = (0..per_pair)
                .map(|_| (std::f64::consts::PI * (rng.gen::<f64>() - 0.5)).tan())
                .chain(vertex);
            for x in ts {
                let v = q.eval(x);
                let scale = (q.coef_a * x * x).abs().max((q.coef_b * x).abs()).max(q.coef_c.abs()).max(1.0);
                min_scaled = min_scaled.min(v / scale);
                bad += (v < -SIGN_SLACK * scale) as usize;
            }
            (bad, min_scaled)
        })
        .collect();
    QuadraticSweep {
        pairs,
        per_pair,
        c,
        violations: parts.iter().map(|p| p.0).sum(),
        min_scaled_value: parts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
    }
}

/// Why a candidate constant failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibilityWitness {
    Discriminant { a0: f64, a1: f64, delta: f64 },
    FivePoint { params: InductionParams },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityConfig {
    pub grid: usize,
    pub sweep_draws: usize,
    pub seed: u64,
    /// Bisection stops once the bracket is narrower than this.
    pub tol: f64,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID, sweep_draws: 100_000, seed: DEFAULT_SEED, tol: 1e-6 }
    }
}

/// `None` if `Delta(a0, a1, c) <= SIGN_SLACK` on the whole grid and the
/// five-point inequality holds on the seeded sweep; otherwise a witness.
pub fn feasibility(c: f64, cfg: &FeasibilityConfig) -> Result<Option<FeasibilityWitness>> {
    let g = discriminant_grid(cfg.grid, c)?;
    if g.violations > 0 {
        return Ok(Some(FeasibilityWitness::Discriminant { a0: g.argmax.0, a1: g.argmax.1, delta: g.max_delta }));
    }
    let sweep = five_point_sweep(cfg.sweep_draws, cfg.seed, c);
    Ok(sweep.witness.map(|params| FeasibilityWitness::FivePoint { params }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub best_c: f64,
    /// Smallest constant shown infeasible, with its witness.
    pub infeasible_c: f64,
    pub witness: FeasibilityWitness,
    pub iterations: usize,
    pub config: FeasibilityConfig,
}

/// Bisection for the largest `c` passing [`feasibility`].
pub fn best_feasible_c(cfg: &FeasibilityConfig) -> Result<FeasibilityReport> {
    if cfg.grid < 100 {
        return Err(Error::InvalidArgument(format!("grid resolution {} below 100", cfg.grid)));
    }
    let (mut lo, mut hi) = (0.0, 2.0);
    let mut witness = None;
    // grow the bracket until the upper end fails
    while witness.is_none() {
        witness = feasibility(hi, cfg)?;
        if witness.is_none() {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::InvalidArgument("no infeasible constant found".into()));
            }
        }
    }
    let mut witness = witness.expect("loop exits with a witness");
    let mut iterations = 0;
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        match feasibility(mid, cfg)? {
            None => lo = mid,
            Some(w) => {
                hi = mid;
                witness = w;
            }
        }
        iterations += 1;
    }
    Ok(FeasibilityReport { best_c: lo, infeasible_c: hi, witness, iterations, config: *cfg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{threshold_set, MonotoneSet};
    use std::sync::Arc;

    fn params(a0: f64, a1: f64, alpha: f64, beta: f64, gamma: f64) -> InductionParams {
        InductionParams::new(a0, a1, alpha, beta, gamma, DEFAULT_C).unwrap()
    }

    #[test]
    fn five_point_plug_in() {
        // u = sqrt(1/4) = 1/2, t = 0: lhs = 0.5*0.5*0.5*1 + 0 = 0.125
        // rhs = 0.5/1.5 * 0.5 * [1*(1-0) + 0.5*(0-1)]^2 = 1/24
        let fp = five_point(&params(0.5, 1.0, 0.0, 1.0, 0.0)).unwrap();
        assert!((fp.lhs - 0.125).abs() < 1e-15);
        assert!((fp.rhs - 1.0 / 24.0).abs() < 1e-15);
        assert!(fp.holds);
    }

    #[test]
    fn five_point_equal_densities_vanish() {
        let fp = five_point(&params(0.4, 0.4, 0.3, 0.3, 0.3)).unwrap();
        assert_eq!((fp.lhs, fp.rhs), (0.0, 0.0));
        // alpha = gamma, any beta: the mean difference a1 (alpha - gamma) vanishes too
        let fp = five_point(&params(0.4, 0.4, 0.3, -0.9, 0.3)).unwrap();
        assert_eq!((fp.lhs, fp.rhs), (0.0, 0.0));
    }

    #[test]
    fn five_point_degenerate_densities() {
        assert_eq!(five_point(&params(0.0, 0.0, 1.0, 0.0, 0.0)), Err(Error::DegenerateDensities));
        assert!(InductionParams::new(0.6, 0.5, 0.0, 0.0, 0.0, 0.5).is_err());
        assert!(InductionParams::new(0.1, 1.5, 0.0, 0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn quadratic_is_scaled_five_point_gap() {
        // (alpha-gamma)^2 q(T) = 2 (u + t)(1 + u)(lhs - rhs)
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let c = rng.gen_range(0.1..1.5);
            let p = draw_params(&mut rng, c);
            let fp = five_point(&p).unwrap();
            let q = reduced_quadratic(&p).unwrap();
            let scaled = 2.0 * (p.u() + p.t()) * (1.0 + p.u()) * (fp.lhs - fp.rhs);
            assert!((q - scaled).abs() <= 1e-12 * q.abs().max(1.0), "{p:?}: {q} vs {scaled}");
            if let Some(x) = p.t_value() {
                let qc = QuadCoeffs::new(p.a0, p.a1, p.c).unwrap();
                let y = p.alpha - p.gamma;
                assert!((qc.eval(x) * y * y - q).abs() <= 1e-9 * q.abs().max(1.0));
            }
        }
    }

    #[test]
    fn psd_margin_examples() {
        let m = g_psd_margin(1.0, 1.0).unwrap();
        assert_eq!((m.product, m.factored), (0.0, 0.0));
        let m = g_psd_margin(0.0, 0.0).unwrap();
        assert_eq!(m.product, 0.0);
        assert!(m.forms_agree());
        let m = g_psd_margin(0.0, 0.64).unwrap();
        let u = (1.0f64 - 0.32).sqrt();
        assert!((m.product - (u * (u - 0.6 + 1.0) - 1.0)).abs() < 1e-15);
        assert!(g_psd_margin(0.7, 0.2).is_err());
    }

    #[test]
    fn g_matrix_det_is_scaled_margin() {
        for &(a0, a1) in &[(0.1, 0.9), (0.5, 0.5), (0.3, 1.0), (0.0, 0.2)] {
            let g = GMatrix::new(a0, a1).unwrap();
            let m = g_psd_margin(a0, a1).unwrap();
            assert!((g.det() - a0 * a0 / 4.0 * m.product).abs() < 1e-15);
            assert!(g.trace() >= 0.0);
        }
    }

    #[test]
    fn psd_grid_small() {
        let g = psd_grid(101).unwrap();
        assert_eq!(g.points, 101 * 102 / 2);
        assert!(g.min_margin >= -SIGN_SLACK);
        assert!(g.min_det >= -SIGN_SLACK && g.min_trace >= 0.0);
        assert!(g.max_form_gap <= 1e-12);
    }

    #[test]
    fn discriminant_examples() {
        let d = discriminant(0.0, 0.0, 0.5).unwrap();
        assert_eq!(d.delta, 0.0);
        let d = discriminant(0.5, 0.5, 0.5).unwrap();
        let factor = 0.5 - 2.0 + 2.0f64.sqrt();
        assert!((factor + 0.0858).abs() < 1e-4);
        assert!((d.reduced - (1.0 + 0.5f64.sqrt()) * factor).abs() < 1e-15);
        assert!(d.delta < 0.0 && d.signs_agree);
    }

    #[test]
    fn discriminant_closed_form() {
        // Delta = 2 c a1 (u + t) * reduced
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5000 {
            let c = rng.gen_range(0.0..3.0);
            let p = draw_params(&mut rng, c);
            let d = discriminant(p.a0, p.a1, p.c).unwrap();
            let expected = 2.0 * p.c * p.a1 * (p.u() + p.t()) * d.reduced;
            assert!((d.delta - expected).abs() <= 1e-12 * expected.abs().max(1.0));
            assert!(d.signs_agree);
        }
    }

    #[test]
    fn discriminant_grid_at_half() {
        let g = discriminant_grid(201, 0.5).unwrap();
        assert_eq!(g.violations, 0);
        assert_eq!(g.sign_disagreements, 0);
        assert!(g.max_delta <= SIGN_SLACK);
        assert!(discriminant_grid(201, 2.0).unwrap().violations > 0);
    }

    #[test]
    fn sqrt_identity_examples() {
        let r = sqrt_identities(0.3, 0.3).unwrap();
        assert_eq!(r.first, 0.0);
        let r = sqrt_identities(0.0, 1.0).unwrap();
        assert!(r.first < 1e-15 && r.second < 1e-15);
        let r = sqrt_identities(1.0, 1.0).unwrap();
        assert_eq!((r.first, r.second), (0.0, 0.0));
    }

    #[test]
    fn five_point_sweep_is_thread_count_independent() {
        let a = five_point_sweep(20_000, 9, 0.5);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| five_point_sweep(20_000, 9, 0.5));
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
    }

    #[test]
    fn quadratic_sweep_nonnegative() {
        let q = quadratic_sweep(20, 2000, 3, 0.5);
        assert_eq!(q.violations, 0);
    }

    #[test]
    fn feasibility_monotone_in_c() {
        let cfg = FeasibilityConfig { grid: 201, sweep_draws: 5000, ..Default::default() };
        let verdicts: Vec<bool> =
            [0.1, 0.3, 0.5, 0.7, 1.0, 2.0].iter().map(|&c| feasibility(c, &cfg).unwrap().is_none()).collect();
        assert_eq!(verdicts, vec![true, true, true, false, false, false]);
        let Some(FeasibilityWitness::Discriminant { delta, .. }) = feasibility(2.0, &cfg).unwrap() else {
            panic!("expected a discriminant witness at c = 2");
        };
        assert!(delta > 0.0);
    }

    #[test]
    fn best_c_on_coarse_grid() {
        let cfg = FeasibilityConfig { grid: 101, sweep_draws: 5000, tol: 1e-7, ..Default::default() };
        let r = best_feasible_c(&cfg).unwrap();
        // Delta <= 0 iff c a1 <= 1 - sqrt(1 - a1); the binding grid point is a1 = 1/100
        let bound = 1.0 / (1.0 + (1.0f64 - 0.01).sqrt());
        assert!(r.best_c >= 0.5 && (r.best_c - bound).abs() < 1e-6, "{r:?}");
        assert!(best_feasible_c(&FeasibilityConfig { grid: 50, ..cfg }).is_err());
    }

    #[test]
    fn jensen_piecewise_constant_is_fixed_point() {
        let set = Arc::new(threshold_set(4, 2).unwrap());
        let f = SetFunction::from_fn(set, |x| match (x.coord(3), x.weight() >= 3) {
            (false, _) => 0.25,
            (true, true) => -1.0,
            (true, false) => 2.0,
        })
        .unwrap();
        let r = jensen_reduction_check(&f, 0.5).unwrap();
        assert!((r.lhs_full - r.lhs_averaged).abs() < 1e-15);
        assert!(r.holds);
    }

    #[test]
    fn jensen_random_functions() {
        let set = Arc::new(threshold_set(4, 2).unwrap());
        for seed in 0..100 {
            let f = SetFunction::random(set.clone(), seed).unwrap();
            let r = jensen_reduction_check(&f, 0.5).unwrap();
            assert!(r.holds, "{r:?}");
            assert!((r.rhs_full - r.rhs_averaged).abs() < 1e-14);
            assert!(r.variance_closed_form_residual < 1e-14);
            assert!(r.lower_variance_averaged.abs() < 1e-15);
            assert!(r.five_point_residual < 1e-14);
        }
    }

    #[test]
    fn jensen_requires_nonempty_lower_slice() {
        let f = SetFunction::random(Arc::new(threshold_set(3, 3).unwrap()), 1).unwrap();
        assert!(jensen_reduction_check(&f, 0.5).is_err());
        let f = SetFunction::random(Arc::new(MonotoneSet::full(1).unwrap()), 1).unwrap();
        assert!(jensen_reduction_check(&f, 0.5).is_err());
    }
}
