//! Brute-force search over the unitary group.
//!
//! Used to certify analytic bounds from below: Haar sampling followed by
//! derivative-free refinement with random single-plane perturbations. A
//! Levenberg-Marquardt least-squares driver on a re-centred exponential chart
//! is provided for feasibility problems (residual vectors that vanish on the
//! feasible set).
//!
//! Every restart draws from its own ChaCha stream `(seed, index)`, so results
//! do not depend on thread scheduling.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::state::{conjugate, exp_hermitian, CMatrix, DensityMatrix, UnitaryMatrix, C64};
use crate::thermal::ThermalState;

const INITIAL_STEP: f64 = 0.3;
const MIN_STEP: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SearchConfig {
    pub samples: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Admissibility slack around the energy budget.
    pub energy_window: f64,
    pub refine_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { samples: 10_000, restarts: 8, seed: 0, energy_window: 1e-3, refine_iters: 2_000 }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.energy_window.is_nan() || self.energy_window <= 0.0 {
            return Err(Error::InvalidConfig("energy window must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best_value: f64,
    pub best_unitary: UnitaryMatrix,
    pub evaluations: usize,
    pub admissible_fraction: f64,
    /// Objective after every refinement iteration of the winning restart.
    pub history: Vec<f64>,
}

/// Independent random stream `index` derived from `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitaryMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::new_unchecked(q)
}

/// Left-multiplies `u` by `exp(-i φ n·σ)` acting on levels `j` and `k`.
fn plane_perturbation(u: &UnitaryMatrix, j: usize, k: usize, n: [f64; 3], phi: f64) -> UnitaryMatrix {
    let (s, c) = phi.sin_cos();
    let i = C64::new(0.0, 1.0);
    let m00 = C64::new(c, 0.0) - i * s * n[2];
    let m11 = C64::new(c, 0.0) + i * s * n[2];
    let m01 = -i * s * C64::new(n[0], -n[1]);
    let m10 = -i * s * C64::new(n[0], n[1]);
    let mut out = u.entries().clone();
    let (rj, rk) = (u.entries().row(j).clone_owned(), u.entries().row(k).clone_owned());
    out.set_row(j, &(&rj * m00 + &rk * m01));
    out.set_row(k, &(rj * m10 + rk * m11));
    UnitaryMatrix::new_unchecked(out)
}

#[derive(Clone, Debug)]
pub struct RefineOutcome {
    pub unitary: UnitaryMatrix,
    pub value: f64,
    pub evaluations: usize,
    pub history: Vec<f64>,
}

/// Derivative-free ascent from `start`: random single-plane perturbations,
/// accepted only if admissible and strictly improving, with the step halved
/// after a run of failures. The objective is nondecreasing along `history`.
pub fn refine<F, A, R>(
    objective: &F,
    admissible: &A,
    t: &ThermalState,
    start: UnitaryMatrix,
    iters: usize,
    rng: &mut R,
) -> Result<RefineOutcome>
where
    F: Fn(&DensityMatrix) -> f64,
    A: Fn(&DensityMatrix) -> bool,
    R: Rng + ?Sized,
{
    let d = start.dim();
    let mut u = start;
    let mut value = objective(&conjugate(t.state(), &u)?);
    let mut history = Vec::with_capacity(iters + 1);
    history.push(value);
    let mut evaluations = 1;
    let mut step = INITIAL_STEP;
    let patience = 2 * d * d;
    let mut failures = 0;
    for _ in 0..iters {
        if step < MIN_STEP {
            break;
        }
        let j = rng.random_range(0..d);
        let mut k = rng.random_range(0..d - 1);
        if k >= j {
            k += 1;
        }
        let raw: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let n = raw.map(|x| x / norm);
        let mut improved = false;
        for sign in [1.0, -1.0] {
            let cand = plane_perturbation(&u, j, k, n, sign * step);
            let rho = conjugate(t.state(), &cand)?;
            evaluations += 1;
            if !admissible(&rho) {
                continue;
            }
            let v = objective(&rho);
            if v > value {
                u = cand;
                value = v;
                improved = true;
                break;
            }
        }
        if improved {
            failures = 0;
        } else {
            failures += 1;
            if failures >= patience {
                step *= 0.5;
                failures = 0;
            }
        }
        history.push(value);
    }
    Ok(RefineOutcome { unitary: u, value, evaluations, history })
}

/// Best admissible objective value over Haar samples and refined restarts.
pub fn maximize_over_unitaries<F, A>(
    objective: F,
    t: &ThermalState,
    admissible: A,
    cfg: &SearchConfig,
) -> Result<SearchResult>
where
    F: Fn(&DensityMatrix) -> f64 + Sync,
    A: Fn(&DensityMatrix) -> bool + Sync,
{
    cfg.validate()?;
    let d = t.dim();
    let mut rng = stream(cfg.seed, 0);
    let mut candidates: Vec<(f64, usize, UnitaryMatrix)> = Vec::new();
    for i in 0..cfg.samples {
        let u = haar_unitary(d, &mut rng);
        let rho = conjugate(t.state(), &u)?;
        if admissible(&rho) {
            candidates.push((objective(&rho), i, u));
        }
    }
    if candidates.is_empty() {
        return Err(Error::NoAdmissibleSample(cfg.samples));
    }
    let admissible_fraction = candidates.len() as f64 / cfg.samples as f64;
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let (best_value, _, best_sample) = candidates[0].clone();
    let mut result = SearchResult {
        best_value,
        best_unitary: best_sample,
        evaluations: cfg.samples,
        admissible_fraction,
        history: vec![best_value],
    };
    let starts: Vec<(usize, UnitaryMatrix)> = candidates
        .into_iter()
        .take(cfg.restarts)
        .enumerate()
        .map(|(r, (_, _, u))| (r, u))
        .collect();
    let refined: Vec<(usize, RefineOutcome)> = starts
        .into_par_iter()
        .map(|(r, u)| {
            let mut rng = stream(cfg.seed, r as u64 + 1);
            refine(&objective, &admissible, t, u, cfg.refine_iters, &mut rng).map(|o| (r, o))
        })
        .collect::<Result<_>>()?;
    for (_, outcome) in refined {
        result.evaluations += outcome.evaluations;
        // restarts are in index order, so ties keep the lower index
        if outcome.value > result.best_value || result.history.len() == 1 && outcome.value >= result.best_value {
            result.best_value = outcome.value;
            result.best_unitary = outcome.unitary;
            result.history = outcome.history;
        }
    }
    Ok(result)
}

const SAMPLE_CHUNK: usize = 4096;
const SAMPLE_STREAM_BASE: u64 = 1 << 32;

/// Admissible sample: the Haar unitary and the final state it produces.
#[derive(Clone, Debug)]
pub struct Sample {
    pub unitary: UnitaryMatrix,
    pub state: DensityMatrix,
}

/// The first `wanted` admissible Haar samples in draw order, drawing at most
/// `max_draws`. Chunks of draws are generated in parallel, chunk `c` from
/// stream `(seed, 2^32 + c)`. Also returns the number of draws consumed.
pub fn sample_admissible<A>(
    t: &ThermalState,
    admissible: A,
    wanted: usize,
    max_draws: usize,
    seed: u64,
) -> Result<(Vec<Sample>, usize)>
where
    A: Fn(&DensityMatrix) -> bool + Sync,
{
    let d = t.dim();
    let batch = rayon::current_num_threads().max(1) * 4;
    let chunks = max_draws.div_ceil(SAMPLE_CHUNK);
    let mut found = Vec::with_capacity(wanted);
    let mut drawn = 0;
    let mut next = 0;
    while found.len() < wanted && next < chunks {
        let end = (next + batch).min(chunks);
        let results: Vec<(usize, Vec<(usize, Sample)>)> = (next..end)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream(seed, SAMPLE_STREAM_BASE + c as u64);
                let size = SAMPLE_CHUNK.min(max_draws - c * SAMPLE_CHUNK);
                let mut hits = Vec::new();
                for i in 0..size {
                    let unitary = haar_unitary(d, &mut rng);
                    let state = conjugate(t.state(), &unitary)?;
                    if admissible(&state) {
                        hits.push((i, Sample { unitary, state }));
                    }
                }
                Ok((size, hits))
            })
            .collect::<Result<_>>()?;
        for (size, hits) in results {
            for (i, s) in hits {
                if found.len() < wanted {
                    found.push(s);
                    if found.len() == wanted {
                        drawn += i + 1;
                    }
                }
            }
            if found.len() < wanted {
                drawn += size;
            } else {
                break;
            }
        }
        next = end;
    }
    Ok((found, drawn))
}

/// Predicate accepting final states whose energy lies within `window` of
/// `E_T + delta_e`.
pub fn energy_window(t: &ThermalState, delta_e: f64, window: f64) -> impl Fn(&DensityMatrix) -> bool + Sync + '_ {
    let target = t.energy() + delta_e;
    move |rho: &DensityMatrix| (t.hamiltonian().expectation(&rho.diagonal()) - target).abs() <= window
}

/// Orthonormal basis of `d x d` Hermitian matrices (trace inner product).
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(j, j)] = C64::new(1.0, 0.0);
        basis.push(m);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = C64::new(r, 0.0);
            sym[(k, j)] = C64::new(r, 0.0);
            basis.push(sym);
            let mut anti = CMatrix::zeros(d, d);
            anti[(j, k)] = C64::new(0.0, -r);
            anti[(k, j)] = C64::new(0.0, r);
            basis.push(anti);
        }
    }
    basis
}

#[derive(Clone, Debug)]
pub struct LeastSquaresOutcome {
    pub unitary: UnitaryMatrix,
    /// Sum of squared residuals at `unitary`.
    pub cost: f64,
    pub iterations: usize,
}

/// Levenberg-Marquardt minimisation of `Σ r(U)²` over unitaries.
///
/// The chart `x ↦ exp(i Σ x_a G_a) U` is re-centred at the current iterate
/// each step; the Jacobian uses central differences.
pub fn least_squares_over_unitaries<R>(
    residual: R,
    start: UnitaryMatrix,
    max_iters: usize,
) -> Result<LeastSquaresOutcome>
where
    R: Fn(&UnitaryMatrix) -> Vec<f64>,
{
    const H: f64 = 1e-6;
    let d = start.dim();
    let basis = hermitian_basis(d);
    let n = basis.len();
    let mut shifts = Vec::with_capacity(n);
    for g in &basis {
        shifts.push((exp_hermitian(g, -H)?, exp_hermitian(g, H)?));
    }
    let cost_of = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();

    let mut u = start;
    let mut r = residual(&u);
    let mut cost = cost_of(&r);
    let mut mu: Option<f64> = None;
    let mut iterations = 0;
    while iterations < max_iters && cost > 1e-28 {
        iterations += 1;
        let m = r.len();
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for (a, (plus, minus)) in shifts.iter().enumerate() {
            let rp = residual(&plus.compose(&u)?);
            let rm = residual(&minus.compose(&u)?);
            for i in 0..m {
                jac[(i, a)] = (rp[i] - rm[i]) / (2.0 * H);
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * rv;
        let lambda = mu.get_or_insert_with(|| 1e-3 * jtj.diagonal().amax().max(1e-12));
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += *lambda;
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&grad))) else {
                *lambda *= 4.0;
                continue;
            };
            let gen = basis
                .iter()
                .zip(step.iter())
                .fold(CMatrix::zeros(d, d), |acc, (g, x)| acc + g * C64::new(*x, 0.0));
            let cand = exp_hermitian(&gen, -1.0)?.compose(&u)?;
            let rc = residual(&cand);
            let cc = cost_of(&rc);
            if cc < cost {
                u = cand;
                r = rc;
                cost = cc;
                *lambda = (*lambda / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            *lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    Ok(LeastSquaresOutcome { unitary: u, cost, iterations })
}
