//! Numerical convex-roof estimation.
//!
//! Every size-`n` pure-state decomposition of a rank-`r` state `ρ = Σ_k λ_k
//! |e_k⟩⟨e_k|` has the form `|ψ̃_i⟩ = Σ_k U_ik √λ_k |e_k⟩` for an `n × r`
//! isometry `U` (the mixer). The search runs over the first `r` columns of an
//! `n × n` unitary, updated by left multiplication with `exp(αD)` for
//! anti-Hermitian `D`, using finite-difference gradients in the Lie algebra,
//! Polak–Ribière conjugate directions and Armijo backtracking. Each restart
//! starts from an independent Haar-random unitary (restart 0 starts from the
//! eigen-decomposition), and the smallest value found is returned together
//! with the ensemble that attains it, so the result is always a constructive
//! upper bound on the convex roof.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::haar::{derive_seed, haar_unitary_with, rng_from_seed};
use crate::linalg::{is_incoherent, BRANCH_TOL};
use crate::measures::Functional;
use crate::state::{sorted_eigen, DensityMatrix, Ensemble, PureState, RANK_TOL};
use crate::C64;

/// Largest default ensemble size.
pub const MAX_DEFAULT_ENSEMBLE: usize = 16;
/// Column orthonormality tolerance for mixers.
pub const ISOMETRY_TOL: f64 = 1e-10;

const FD_STEP: f64 = 1e-6;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct RoofConfig {
    /// Number of ensemble members; `None` selects `rank²` capped at
    /// [`MAX_DEFAULT_ENSEMBLE`].
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    pub step_tolerance: f64,
    pub seed: u64,
}

impl Default for RoofConfig {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 32,
            max_iters: 2000,
            step_tolerance: 1e-10,
            seed: 0,
        }
    }
}

impl RoofConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_ensemble_size(mut self, n: usize) -> Self {
        self.ensemble_size = Some(n);
        self
    }
}

pub fn default_ensemble_size(rank: usize) -> usize {
    (rank * rank).min(MAX_DEFAULT_ENSEMBLE).max(rank)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoofResult {
    /// `Σ p_i C(ψ_i)` of `ensemble`; an upper bound on the convex roof.
    pub value: f64,
    pub ensemble: Ensemble,
    pub converged: bool,
    pub iterations_used: usize,
    /// Index of the restart that produced `ensemble`.
    pub best_restart: usize,
}

/// Eigen-data scaled for building decompositions: `vectors[k] = √λ_k e_k`.
struct ScaledEigenbasis {
    dim: usize,
    vectors: Vec<Vec<C64>>,
}

impl ScaledEigenbasis {
    fn new(rho: &DensityMatrix) -> Self {
        let (vals, vecs) = sorted_eigen(rho.matrix());
        let vectors = vals
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > RANK_TOL)
            .map(|(k, &l)| vecs.column(k).iter().map(|z| z * l.sqrt()).collect())
            .collect();
        Self {
            dim: rho.dim(),
            vectors,
        }
    }

    fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// Writes `Σ_k coeff(k) √λ_k e_k` into `out`.
    fn combine(&self, coeff: impl Fn(usize) -> C64, out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (k, v) in self.vectors.iter().enumerate() {
            let c = coeff(k);
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
    }

    /// Ensemble from the first `rank` columns of `mixer`.
    fn ensemble(&self, mixer: &DMatrix<C64>) -> Result<Ensemble> {
        let mut buf = vec![C64::new(0.0, 0.0); self.dim];
        let mut members = Vec::with_capacity(mixer.nrows());
        for i in 0..mixer.nrows() {
            self.combine(|k| mixer[(i, k)], &mut buf);
            let p: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
            if p >= BRANCH_TOL {
                let s = 1.0 / p.sqrt();
                let v = DVector::from_iterator(self.dim, buf.iter().map(|z| z * s));
                members.push((p, PureState::from_vector_unchecked(v)));
            }
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        for m in &mut members {
            m.0 /= total;
        }
        Ensemble::new(members)
    }
}

fn isometry_deviation(mixer: &DMatrix<C64>) -> f64 {
    let r = mixer.ncols();
    (mixer.adjoint() * mixer - DMatrix::<C64>::identity(r, r)).norm()
}

/// Builds the ensemble `|ψ̃_i⟩ = Σ_k U_ik √λ_k |e_k⟩` for an `n × r` mixer with
/// orthonormal columns, `r = rank(ρ)`. Members with weight below `1e-14` are
/// dropped.
pub fn decomposition_from_mixer(rho: &DensityMatrix, mixer: &DMatrix<C64>) -> Result<Ensemble> {
    let basis = ScaledEigenbasis::new(rho);
    if mixer.ncols() != basis.rank() || mixer.nrows() < basis.rank() {
        return Err(Error::RankMismatch {
            rank: basis.rank(),
            columns: mixer.ncols(),
        });
    }
    let dev = isometry_deviation(mixer);
    if dev > ISOMETRY_TOL {
        return Err(Error::NonIsometricMixer(dev));
    }
    basis.ensemble(mixer)
}

/// `Σ_i p_i C(ψ_i)` over an ensemble.
pub fn ensemble_value(functional: impl Into<Functional>, ensemble: &Ensemble) -> f64 {
    let f = functional.into();
    ensemble
        .members()
        .iter()
        .map(|(p, s)| p * f.evaluate(s.amplitudes()))
        .sum()
}

struct Objective<'a> {
    functional: Functional,
    basis: &'a ScaledEigenbasis,
    n: usize,
}

impl Objective<'_> {
    fn member(&self, row: impl Fn(usize) -> C64, buf: &mut [C64]) -> f64 {
        self.basis.combine(row, buf);
        self.functional.weighted(buf)
    }

    fn total(&self, u: &DMatrix<C64>, buf: &mut [C64]) -> f64 {
        (0..self.n).map(|i| self.member(|k| u[(i, k)], buf)).sum()
    }

    /// Directional derivatives along the anti-Hermitian basis
    /// `{i E_kk} ∪ {E_kl - E_lk} ∪ {i(E_kl + E_lk)}`, ordered as in [`Self::direction`].
    fn gradient(&self, u: &DMatrix<C64>, buf: &mut [C64]) -> Vec<f64> {
        let n = self.n;
        let i_unit = C64::new(0.0, 1.0);
        let h = FD_STEP;
        let mut grad = Vec::with_capacity(n * n);
        for k in 0..n {
            let plus = self.member(|m| u[(k, m)] * (C64::new(1.0, 0.0) + i_unit * h), buf);
            let minus = self.member(|m| u[(k, m)] * (C64::new(1.0, 0.0) - i_unit * h), buf);
            grad.push((plus - minus) / (2.0 * h));
        }
        for k in 0..n {
            for l in (k + 1)..n {
                for imag in [false, true] {
                    let mut diff = 0.0;
                    for sign in [1.0, -1.0] {
                        let e = sign * h;
                        let (vk, vl) = if imag {
                            (
                                self.member(|m| u[(k, m)] + i_unit * e * u[(l, m)], buf),
                                self.member(|m| u[(l, m)] + i_unit * e * u[(k, m)], buf),
                            )
                        } else {
                            (
                                self.member(|m| u[(k, m)] + e * u[(l, m)], buf),
                                self.member(|m| u[(l, m)] - e * u[(k, m)], buf),
                            )
                        };
                        diff += sign * (vk + vl);
                    }
                    grad.push(diff / (2.0 * h));
                }
            }
        }
        grad
    }

    /// Anti-Hermitian matrix with coordinates `coeffs` in the gradient basis.
    fn direction(&self, coeffs: &[f64]) -> DMatrix<C64> {
        let n = self.n;
        let mut d = DMatrix::<C64>::zeros(n, n);
        let mut it = coeffs.iter();
        for k in 0..n {
            d[(k, k)] = C64::new(0.0, *it.next().unwrap());
        }
        for k in 0..n {
            for l in (k + 1)..n {
                let re = *it.next().unwrap();
                let im = *it.next().unwrap();
                d[(k, l)] += C64::new(re, im);
                d[(l, k)] += C64::new(-re, im);
            }
        }
        d
    }
}

/// `exp(αD)·U` for a fixed anti-Hermitian `D`, reusing one eigendecomposition
/// across step sizes.
struct Geodesic {
    vecs: DMatrix<C64>,
    vals: Vec<f64>,
    projected: DMatrix<C64>,
}

impl Geodesic {
    fn new(d: &DMatrix<C64>, u: &DMatrix<C64>) -> Self {
        // D = iH with H Hermitian.
        let h = d * C64::new(0.0, -1.0);
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let (vals, vecs) = sorted_eigen(&h);
        let projected = vecs.adjoint() * u;
        Self { vecs, vals, projected }
    }

    fn at(&self, alpha: f64) -> DMatrix<C64> {
        let phases = DVector::from_iterator(
            self.vals.len(),
            self.vals.iter().map(|&l| C64::from_polar(1.0, alpha * l)),
        );
        &self.vecs * DMatrix::from_diagonal(&phases) * &self.projected
    }
}

struct RestartOutcome {
    mixer: DMatrix<C64>,
    converged: bool,
    iterations: usize,
}

fn descend(objective: &Objective<'_>, mut u: DMatrix<C64>, config: &RoofConfig) -> RestartOutcome {
    let mut buf = vec![C64::new(0.0, 0.0); objective.basis.dim];
    let mut value = objective.total(&u, &mut buf);
    let mut alpha: f64 = 1.0;
    let mut prev_grad: Option<Vec<f64>> = None;
    let mut prev_dir: Vec<f64> = Vec::new();
    let dims = objective.n * objective.n;
    for iter in 0..config.max_iters {
        let grad = objective.gradient(&u, &mut buf);
        let gg: f64 = grad.iter().map(|g| g * g).sum();
        if gg == 0.0 || !gg.is_finite() {
            return RestartOutcome {
                mixer: u,
                converged: true,
                iterations: iter,
            };
        }
        let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
        if let Some(pg) = &prev_grad {
            if iter % dims != 0 {
                let num: f64 = grad.iter().zip(pg).map(|(g, p)| g * (g - p)).sum();
                let den: f64 = pg.iter().map(|p| p * p).sum();
                let beta = (num / den).max(0.0);
                if beta.is_finite() {
                    for (d, p) in dir.iter_mut().zip(&prev_dir) {
                        *d += beta * p;
                    }
                }
            }
        }
        let mut slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if slope >= 0.0 {
            dir = grad.iter().map(|g| -g).collect();
            slope = -gg;
        }
        let geodesic = Geodesic::new(&objective.direction(&dir), &u);
        let mut step = (alpha * 2.0).min(1e3);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let candidate = geodesic.at(step);
            let v = objective.total(&candidate, &mut buf);
            if v <= value + ARMIJO * step * slope {
                accepted = Some((candidate, v));
                break;
            }
            step *= 0.5;
        }
        let Some((candidate, v)) = accepted else {
            return RestartOutcome {
                mixer: u,
                converged: true,
                iterations: iter + 1,
            };
        };
        let improvement = value - v;
        u = candidate;
        value = v;
        alpha = step;
        prev_grad = Some(grad);
        prev_dir = dir;
        if improvement < config.step_tolerance {
            return RestartOutcome {
                mixer: u,
                converged: true,
                iterations: iter + 1,
            };
        }
    }
    RestartOutcome {
        mixer: u,
        converged: false,
        iterations: config.max_iters,
    }
}

/// Upper bound on the convex roof of `functional` at `rho`, attained by the
/// returned ensemble.
///
/// Rank-one inputs return the pure-state value and incoherent inputs return
/// the diagonal decomposition (value 0) without searching. Restarts are
/// independent and run in parallel; the result is the minimum over restarts
/// with ties broken by the lowest restart index, so it is deterministic and
/// non-increasing in `config.restarts`.
pub fn convex_roof_upper_bound(
    functional: impl Into<Functional>,
    rho: &DensityMatrix,
    config: &RoofConfig,
) -> Result<RoofResult> {
    let functional = functional.into();
    let basis = ScaledEigenbasis::new(rho);
    let rank = basis.rank();
    let n = config.ensemble_size.unwrap_or_else(|| default_ensemble_size(rank));
    if n < rank {
        return Err(Error::EnsembleTooSmall { size: n, rank });
    }
    if config.restarts == 0 {
        return Err(Error::InvalidEnsemble("at least one restart is required".into()));
    }

    let direct = |ensemble: Ensemble| RoofResult {
        value: ensemble_value(functional, &ensemble),
        ensemble,
        converged: true,
        iterations_used: 0,
        best_restart: 0,
    };
    if rank == 1 {
        return Ok(direct(basis.ensemble(&DMatrix::identity(1, 1))?));
    }
    if is_incoherent(rho, 1e-14) {
        let members = rho
            .populations()
            .into_iter()
            .enumerate()
            .filter(|&(_, p)| p >= BRANCH_TOL)
            .map(|(i, p)| (p, PureState::basis(rho.dim(), i)))
            .collect::<Vec<_>>();
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        let members = members.into_iter().map(|(p, s)| (p / total, s)).collect();
        return Ok(direct(Ensemble::new(members)?));
    }

    let objective = Objective {
        functional,
        basis: &basis,
        n,
    };
    let outcomes: Vec<(f64, RestartOutcome, Ensemble)> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let start = if restart == 0 {
                DMatrix::identity(n, n)
            } else {
                haar_unitary_with(n, &mut rng_from_seed(derive_seed(config.seed, restart as u64)))
            };
            let outcome = descend(&objective, start, config);
            let mixer = outcome.mixer.columns(0, rank).into_owned();
            let ensemble = basis.ensemble(&mixer)?;
            Ok((ensemble_value(functional, &ensemble), outcome, ensemble))
        })
        .collect::<Result<_>>()?;

    let (best_restart, (value, outcome, ensemble)) = outcomes
        .into_iter()
        .enumerate()
        .reduce(|best, cur| if cur.1 .0 < best.1 .0 { cur } else { best })
        .expect("restarts >= 1");
    Ok(RoofResult {
        value,
        ensemble,
        converged: outcome.converged,
        iterations_used: outcome.iterations,
        best_restart,
    })
}
