//! Induced-subgraph Laplacian on a monotone set, its second eigenvalue, and
//! the optimal Poincaré constant `C* = 2 / lambda2`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::MonotoneSet;
use crate::error::{Error, Result};
use crate::forms::SetFunction;

/// Largest set handed to the dense eigensolver under [`SolverMethod::Auto`].
pub const DENSE_CUTOFF: usize = 1024;
/// Default eigen-residual target `||Lv - lambda v|| / ||v||`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Relative slack when comparing the constant against the bounds.
pub const CERT_REL_TOL: f64 = 1e-9;

const MAX_RESTARTS: usize = 500;
const KRYLOV_DIM: usize = 80;
/// Cap on Krylov basis storage, in f64 entries.
const KRYLOV_BUDGET: usize = 1 << 25;
const PAR_ROWS: usize = 1 << 14;

/// Degree-minus-adjacency matrix of the subgraph of the cube induced on a
/// set, indexed by member rank (ascending cube index).
#[derive(Debug, Clone)]
pub struct InducedLaplacian {
    dim: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl InducedLaplacian {
    pub fn new(set: &MonotoneSet) -> Self {
        let n = set.dim();
        let mut offsets = Vec::with_capacity(set.size() + 1);
        let mut neighbors = Vec::with_capacity(set.size() * n / 2);
        offsets.push(0);
        for &x in set.members() {
            for i in 0..n {
                if let Some(r) = set.rank(x ^ (1 << i)) {
                    neighbors.push(r as u32);
                }
            }
            offsets.push(neighbors.len());
        }
        Self { dim: n, offsets, neighbors }
    }

    /// Cube dimension of the underlying set.
    pub fn cube_dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn degree(&self, rank: usize) -> usize {
        self.offsets[rank + 1] - self.offsets[rank]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.size()).map(|r| self.degree(r)).max().unwrap_or(0)
    }

    pub fn neighbors(&self, rank: usize) -> &[u32] {
        &self.neighbors[self.offsets[rank]..self.offsets[rank + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    fn row(&self, r: usize, v: &[f64]) -> f64 {
        let nb = self.neighbors(r);
        nb.len() as f64 * v[r] - nb.iter().map(|&s| v[s as usize]).sum::<f64>()
    }

    /// `out = L v`.
    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.size());
        assert_eq!(out.len(), self.size());
        if self.size() >= PAR_ROWS {
            out.par_chunks_mut(PAR_ROWS / 4).enumerate().for_each(|(c, chunk)| {
                let base = c * (PAR_ROWS / 4);
                for (k, o) in chunk.iter_mut().enumerate() {
                    *o = self.row(base + k, v);
                }
            });
        } else {
            for (r, o) in out.iter_mut().enumerate() {
                *o = self.row(r, v);
            }
        }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size()];
        self.apply_into(v, &mut out);
        out
    }

    /// `v^T L v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        crate::sum::sum(self.apply(v).iter().zip(v).map(|(a, b)| a * b))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.size();
        let mut d = DMatrix::zeros(m, m);
        for r in 0..m {
            d[(r, r)] = self.degree(r) as f64;
            for &s in self.neighbors(r) {
                d[(r, s as usize)] = -1.0;
            }
        }
        d
    }

    pub fn is_connected(&self) -> bool {
        let m = self.size();
        if m == 0 {
            return true;
        }
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(r) = stack.pop() {
            for &s in self.neighbors(r) {
                if !seen[s as usize] {
                    seen[s as usize] = true;
                    count += 1;
                    stack.push(s as usize);
                }
            }
        }
        count == m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    #[default]
    Auto,
    Dense,
    Iterative,
}

impl std::fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Auto => "auto",
            Self::Dense => "dense",
            Self::Iterative => "iterative",
        })
    }
}

impl std::str::FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "dense" => Ok(Self::Dense),
            "iterative" => Ok(Self::Iterative),
            _ => Err(Error::Parse(format!("unknown solver method {s:?}"))),
        }
    }
}

/// Second-smallest eigenpair; `vector` is mean-zero with unit norm.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    /// `Dense` or `Iterative`, never `Auto`.
    pub method: SolverMethod,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(v: &mut [f64]) {
    let m = crate::sum::sum(v.iter().copied()) / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

fn scale(v: &mut [f64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

/// `(rayleigh quotient, ||Lv - qv||)` for a unit vector.
fn rayleigh(l: &InducedLaplacian, v: &[f64]) -> (f64, f64) {
    let lv = l.apply(v);
    let q = dot(&lv, v);
    let r = lv.iter().zip(v).map(|(a, b)| (a - q * b) * (a - q * b)).sum::<f64>().sqrt();
    (q, r)
}

/// Smallest eigenvalue of `L` on the mean-zero subspace.
pub fn lambda2(l: &InducedLaplacian, method: SolverMethod, tol: f64) -> Result<Eigenpair> {
    match l.size() {
        0 => return Err(Error::EmptySet),
        1 => return Err(Error::Singleton),
        _ => {}
    }
    if !l.is_connected() {
        return Err(Error::Disconnected);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let dense = match method {
        SolverMethod::Auto => l.size() <= DENSE_CUTOFF,
        SolverMethod::Dense => true,
        SolverMethod::Iterative => false,
    };
    if dense {
        Ok(dense_lambda2(l))
    } else {
        lanczos_lambda2(l, tol)
    }
}

fn dense_lambda2(l: &InducedLaplacian) -> Eigenpair {
    let eig = SymmetricEigen::new(l.to_dense());
    let mut order: Vec<usize> = (0..l.size()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    // index 0 is the constant vector; connectivity makes it simple
    let k = order[1];
    let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    remove_mean(&mut v);
    let nv = norm(&v);
    scale(&mut v, 1.0 / nv);
    let (value, residual) = rayleigh(l, &v);
    Eigenpair { value, vector: v, residual, method: SolverMethod::Dense, iterations: 0 }
}

/// Restarted Lanczos with full reorthogonalization on `sigma I - L`
/// restricted to mean-zero vectors, where `sigma = 2 * max degree` bounds the
/// spectrum. The top Ritz pair of that operator is the wanted pair of `L`.
fn lanczos_lambda2(l: &InducedLaplacian, tol: f64) -> Result<Eigenpair> {
    let m = l.size();
    let sigma = 2.0 * l.max_degree() as f64;
    let kdim = KRYLOV_DIM.min(m - 1).min((KRYLOV_BUDGET / m).max(8));

    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_2050);
    let mut start: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    remove_mean(&mut start);
    let s = norm(&start);
    scale(&mut start, 1.0 / s);

    let mut lv = vec![0.0; m];
    let mut last_residual = f64::INFINITY;
    for restart in 0..MAX_RESTARTS {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(kdim);
        let mut beta: Vec<f64> = Vec::with_capacity(kdim);
        loop {
            let j = basis.len() - 1;
            l.apply_into(&basis[j], &mut lv);
            let mut w: Vec<f64> = basis[j].iter().zip(&lv).map(|(q, x)| sigma * q - x).collect();
            remove_mean(&mut w);
            alpha.push(dot(&w, &basis[j]));
            // two passes of Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = norm(&w);
            if basis.len() == kdim || b <= 1e-13 * sigma {
                break;
            }
            beta.push(b);
            scale(&mut w, 1.0 / b);
            basis.push(w);
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| match i.abs_diff(j) {
            0 => alpha[i],
            1 => beta[i.min(j)],
            _ => 0.0,
        });
        let eig = SymmetricEigen::new(t);
        let top = (0..k).max_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j])).expect("k >= 1");
        let y = eig.eigenvectors.column(top);
        let mut x = vec![0.0; m];
        for (q, &c) in basis.iter().zip(y.iter()) {
            x.iter_mut().zip(q).for_each(|(a, b)| *a += c * b);
        }
        remove_mean(&mut x);
        let nx = norm(&x);
        scale(&mut x, 1.0 / nx);
        let (value, residual) = rayleigh(l, &x);
        last_residual = residual;
        if residual <= tol {
            return Ok(Eigenpair { value, vector: x, residual, method: SolverMethod::Iterative, iterations: restart + 1 });
        }
        start = x;
    }
    Err(Error::NoConvergence { iterations: MAX_RESTARTS, residual: last_residual })
}

/// `1 / (1 - sqrt(1 - a))`, written as `(1 + sqrt(1 - a)) / a`.
pub fn bound_fp(density: f64) -> f64 {
    (1.0 + (1.0 - density).sqrt()) / density
}

/// Twice [`bound_fp`].
pub fn bound_ours(density: f64) -> f64 {
    2.0 * bound_fp(density)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralResult {
    pub dim: usize,
    pub size: usize,
    pub density: f64,
    pub lambda2: f64,
    pub cstar: f64,
    pub bound_fp: f64,
    pub bound_ours: f64,
    pub method: SolverMethod,
    pub residual: f64,
}

impl SpectralResult {
    /// `cstar <= bound_fp` up to [`CERT_REL_TOL`].
    pub fn certified(&self) -> bool {
        self.cstar <= self.bound_fp * (1.0 + CERT_REL_TOL)
    }
}

pub fn poincare_constant(set: &MonotoneSet) -> Result<SpectralResult> {
    poincare_constant_with(set, SolverMethod::Auto, DEFAULT_TOL).map(|(r, _)| r)
}

pub fn poincare_constant_with(set: &MonotoneSet, method: SolverMethod, tol: f64) -> Result<(SpectralResult, Eigenpair)> {
    let l = InducedLaplacian::new(set);
    let pair = lambda2(&l, method, tol)?;
    let a = set.density();
    let result = SpectralResult {
        dim: set.dim(),
        size: set.size(),
        density: a,
        lambda2: pair.value,
        cstar: 2.0 / pair.value,
        bound_fp: bound_fp(a),
        bound_ours: bound_ours(a),
        method: pair.method,
        residual: pair.residual,
    };
    Ok((result, pair))
}

/// Per-set verdict for both bounds. `bound - cstar` is the slack.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremCertificate {
    pub dim: usize,
    pub size: usize,
    pub density: f64,
    /// `None` for a singleton, where the constant is 0 by convention.
    pub lambda2: Option<f64>,
    pub cstar: f64,
    pub bound_fp: f64,
    pub bound_ours: f64,
    pub slack_fp: f64,
    pub slack_ours: f64,
    pub pass_fp: bool,
    pub pass_ours: bool,
    pub method: Option<SolverMethod>,
    pub residual: f64,
    /// `Var / E` of the witness.
    pub witness_ratio: Option<f64>,
    /// Extremal eigenvector, by member rank.
    #[serde(skip)]
    pub witness: Option<Vec<f64>>,
}

impl TheoremCertificate {
    pub fn passed(&self) -> bool {
        self.pass_fp && self.pass_ours
    }
}

pub fn verify_theorem(set: &MonotoneSet) -> Result<TheoremCertificate> {
    verify_theorem_with(set, SolverMethod::Auto, DEFAULT_TOL)
}

pub fn verify_theorem_with(set: &MonotoneSet, method: SolverMethod, tol: f64) -> Result<TheoremCertificate> {
    let a = set.density();
    let (fp, ours) = (bound_fp(a), bound_ours(a));
    let pass = |cstar: f64, bound: f64| cstar <= bound * (1.0 + CERT_REL_TOL);
    if set.size() == 1 {
        return Ok(TheoremCertificate {
            dim: set.dim(),
            size: 1,
            density: a,
            lambda2: None,
            cstar: 0.0,
            bound_fp: fp,
            bound_ours: ours,
            slack_fp: fp,
            slack_ours: ours,
            pass_fp: true,
            pass_ours: true,
            method: None,
            residual: 0.0,
            witness_ratio: None,
            witness: None,
        });
    }
    let (r, pair) = poincare_constant_with(set, method, tol)?;
    let f = SetFunction::new(std::sync::Arc::new(set.clone()), pair.vector.clone())?;
    Ok(TheoremCertificate {
        dim: r.dim,
        size: r.size,
        density: a,
        lambda2: Some(r.lambda2),
        cstar: r.cstar,
        bound_fp: fp,
        bound_ours: ours,
        slack_fp: fp - r.cstar,
        slack_ours: ours - r.cstar,
        pass_fp: pass(r.cstar, fp),
        pass_ours: pass(r.cstar, ours),
        method: Some(r.method),
        residual: r.residual,
        witness_ratio: crate::forms::poincare_ratio(&f),
        witness: Some(pair.vector),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::{enumerate_monotone, threshold_set, CubePoint};
    use crate::forms;
    use std::sync::Arc;

    fn set(s: &str) -> MonotoneSet {
        s.parse::<crate::cube::SetDescription>().unwrap().build().unwrap()
    }

    #[test]
    fn singleton_laplacian() {
        let l = InducedLaplacian::new(&threshold_set(3, 3).unwrap());
        assert_eq!(l.size(), 1);
        assert_eq!(l.to_dense(), DMatrix::zeros(1, 1));
        assert_eq!(lambda2(&l, SolverMethod::Auto, DEFAULT_TOL).unwrap_err(), Error::Singleton);
    }

    #[test]
    fn square_is_four_cycle() {
        let l = InducedLaplacian::new(&MonotoneSet::full(2).unwrap());
        assert!((0..4).all(|r| l.degree(r) == 2));
        assert_eq!(l.edge_count(), 4);
    }

    #[test]
    fn threshold_three_two_is_star() {
        let a = threshold_set(3, 2).unwrap();
        let l = InducedLaplacian::new(&a);
        // members 011, 101, 110, 111; the centre is rank 3
        assert_eq!(a.members(), &[0b011, 0b101, 0b110, 0b111]);
        assert_eq!(l.degree(3), 3);
        assert_eq!(l.neighbors(3), &[2, 1, 0]);
        assert!((0..3).all(|r| l.neighbors(r) == [3]));
    }

    #[test]
    fn laplacian_structure() {
        for a in enumerate_monotone(4).unwrap() {
            let l = InducedLaplacian::new(&a);
            let d = l.to_dense();
            assert_eq!(d, d.transpose());
            for r in 0..l.size() {
                assert!(l.degree(r) <= 4);
                assert_eq!(d.row(r).sum(), 0.0);
            }
            assert!(l.is_connected());
        }
    }

    #[test]
    fn quadratic_form_matches_dirichlet() {
        let a = Arc::new(set("tribes 6 2"));
        let l = InducedLaplacian::new(&a);
        for seed in 0..10 {
            let f = SetFunction::random(a.clone(), seed).unwrap();
            let via_l = l.quadratic_form(f.values()) / (2.0 * a.size() as f64);
            let e = forms::dirichlet_form(&f);
            assert!((via_l - e).abs() <= 1e-12 * e);
        }
    }

    #[test]
    fn lambda2_examples() {
        let cases = [(MonotoneSet::full(3).unwrap(), 2.0), (threshold_set(3, 2).unwrap(), 1.0), (set("upset 2 01"), 2.0)];
        for (a, expected) in cases {
            let l = InducedLaplacian::new(&a);
            for method in [SolverMethod::Dense, SolverMethod::Iterative] {
                let p = lambda2(&l, method, DEFAULT_TOL).unwrap();
                assert!((p.value - expected).abs() < 1e-12, "{method}: {}", p.value);
                assert!(p.residual <= DEFAULT_TOL);
            }
        }
    }

    #[test]
    fn poincare_constant_examples() {
        let r = poincare_constant(&MonotoneSet::full(3).unwrap()).unwrap();
        assert!((r.cstar - 1.0).abs() < 1e-12 && r.bound_fp == 1.0 && r.certified());

        let r = poincare_constant(&threshold_set(3, 2).unwrap()).unwrap();
        assert!((r.cstar - 2.0).abs() < 1e-12);
        assert!((r.bound_fp - 1.0 / (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert!((r.bound_fp - 3.4142).abs() < 1e-4);
        assert_eq!(r.bound_ours, 2.0 * r.bound_fp);

        let half = MonotoneSet::dictator(4, 3).unwrap();
        let r = poincare_constant(&half).unwrap();
        assert!((r.cstar - 1.0).abs() < 1e-12);
        assert!((r.bound_fp - 3.4142).abs() < 1e-4);
    }

    #[test]
    fn bound_fp_stable_form() {
        for a in [1e-9f64, 1e-3, 0.25, 0.5, 0.999, 1.0] {
            let naive = 1.0 / (1.0 - (1.0 - a).sqrt());
            assert!((bound_fp(a) - naive).abs() <= 1e-6 * naive);
        }
    }

    #[test]
    fn witness_on_full_cube_is_level_one() {
        let c = verify_theorem(&MonotoneSet::full(4).unwrap()).unwrap();
        assert!(c.passed());
        assert!((c.witness_ratio.unwrap() - 1.0).abs() < 1e-9);
        // level-one vectors are affine in the coordinates: v(x) = sum_i w_i (2 x_i - 1)
        let v = c.witness.unwrap();
        let w: Vec<f64> = (0..4).map(|i| (v[1 << i] - v[0]) / 2.0).collect();
        for x in 0..16u64 {
            let p = CubePoint::new(4, x).unwrap();
            let affine: f64 = (0..4).map(|i| w[i] * if p.coord(i) { 1.0 } else { -1.0 }).sum();
            assert!((affine - v[x as usize]).abs() < 1e-9);
        }
    }

    #[test]
    fn singleton_passes_vacuously() {
        let c = verify_theorem(&threshold_set(4, 4).unwrap()).unwrap();
        assert_eq!(c.cstar, 0.0);
        assert!(c.passed() && c.lambda2.is_none());
    }

    #[test]
    fn all_sets_dimension_three() {
        let mut n = 0;
        for a in enumerate_monotone(3).unwrap() {
            let c = verify_theorem(&a).unwrap();
            assert!(c.passed(), "{:?}", a.members());
            if let Some(r) = c.witness_ratio {
                assert!((r - c.cstar).abs() <= 1e-9 * c.cstar);
            }
            n += 1;
        }
        assert_eq!(n, 19);
    }

    #[test]
    fn dense_and_iterative_agree() {
        for a in [threshold_set(9, 4).unwrap(), set("tribes 10 3"), MonotoneSet::random(10, 6, 3).unwrap()] {
            let l = InducedLaplacian::new(&a);
            if l.size() < 256 {
                continue;
            }
            let d = lambda2(&l, SolverMethod::Dense, DEFAULT_TOL).unwrap();
            let i = lambda2(&l, SolverMethod::Iterative, DEFAULT_TOL).unwrap();
            assert!((d.value - i.value).abs() <= 1e-8, "{} vs {}", d.value, i.value);
        }
    }
}
