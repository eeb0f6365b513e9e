//! Total correlation on noninteracting composites, its comparison with
//! coherence at a fixed energy budget, and the two-qubit no-go search.
//!
//! Joint operators live in tensor order (subsystem 0 leftmost). The joint
//! Hamiltonian handed to the single-system machinery is the energy-sorted
//! version; `CompositeSystem::permutation` maps sorted indices back.

use rayon::prelude::*;
use serde::Serialize;

use crate::coherence::relative_entropy_of_coherence;
use crate::constrained::{constrained_bound, constrained_optimum, ConstrainedReport, EnergyBudget};
use crate::error::{Error, Result};
use crate::search::{haar_unitary, least_squares_over_unitaries, stream};
use crate::state::{
    conjugate, dephase, kron, partial_trace, trace_norm, von_neumann_entropy, CMatrix, DensityMatrix,
    UnitaryMatrix, C64, MAX_DIM,
};
use crate::thermal::{gibbs_state, Beta, Hamiltonian, ThermalState};

/// Convergence threshold on the squared residual of least-squares searches.
const LSQ_CONVERGED: f64 = 1e-24;
const LSQ_ITERS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct CompositeSystem {
    locals: Vec<Hamiltonian>,
    dims: Vec<usize>,
    tensor_energies: Vec<f64>,
    /// `order[s]` is the tensor index of the `s`-th lowest joint level.
    order: Vec<usize>,
    joint: Hamiltonian,
}

impl CompositeSystem {
    pub fn new(locals: Vec<Hamiltonian>) -> Result<Self> {
        if !(2..=3).contains(&locals.len()) {
            return Err(Error::InvalidConfig(format!(
                "need 2 or 3 subsystems, got {}",
                locals.len()
            )));
        }
        let dims: Vec<usize> = locals.iter().map(Hamiltonian::dim).collect();
        if let Some(&d) = dims.iter().find(|&&d| d > 3) {
            return Err(Error::InvalidDimension(d));
        }
        let total: usize = dims.iter().product();
        if total > MAX_DIM {
            return Err(Error::InvalidDimension(total));
        }
        let mut tensor_energies = vec![0.0; total];
        for (idx, e) in tensor_energies.iter_mut().enumerate() {
            let mut rest = idx;
            for (h, &d) in locals.iter().zip(&dims).rev() {
                *e += h.energies()[rest % d];
                rest /= d;
            }
        }
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by(|&a, &b| tensor_energies[a].total_cmp(&tensor_energies[b]).then(a.cmp(&b)));
        let joint = Hamiltonian::new(order.iter().map(|&i| tensor_energies[i]).collect())?;
        Ok(Self { locals, dims, tensor_energies, order, joint })
    }

    /// Two qubits with gaps `e_a` and `e_b`.
    pub fn two_qubits(e_a: f64, e_b: f64) -> Result<Self> {
        Self::new(vec![Hamiltonian::new(vec![0.0, e_a])?, Hamiltonian::new(vec![0.0, e_b])?])
    }

    pub fn locals(&self) -> &[Hamiltonian] {
        &self.locals
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn joint_dim(&self) -> usize {
        self.tensor_energies.len()
    }

    pub fn tensor_energies(&self) -> &[f64] {
        &self.tensor_energies
    }

    /// Joint Hamiltonian with levels in ascending order.
    pub fn sorted_hamiltonian(&self) -> &Hamiltonian {
        &self.joint
    }

    /// `P` with `P|s⟩ = |order[s]⟩`, taking sorted-basis operators to tensor order.
    pub fn permutation(&self) -> UnitaryMatrix {
        UnitaryMatrix::permutation(&self.order).expect("order is a permutation")
    }

    /// Joint thermal state in the sorted basis.
    pub fn thermal(&self, beta: Beta) -> ThermalState {
        gibbs_state(&self.joint, beta)
    }

    /// Joint thermal state in tensor order.
    pub fn tensor_thermal(&self, beta: Beta) -> DensityMatrix {
        let mut m = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for h in &self.locals {
            m = kron(&m, gibbs_state(h, beta).state().entries());
        }
        DensityMatrix::new_unchecked(m)
    }

    /// `P U P^dag`.
    pub fn to_tensor_order(&self, u_sorted: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        let p = self.permutation();
        p.compose(u_sorted)?.compose(&p.dagger())
    }

    /// Average energy of a tensor-order state.
    pub fn energy(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.joint_dim() {
            return Err(Error::DimensionMismatch { expected: self.joint_dim(), found: rho.dim() });
        }
        Ok(rho.diagonal().iter().zip(&self.tensor_energies).map(|(p, e)| p * e).sum())
    }

    fn marginals(&self, rho: &DensityMatrix) -> Result<Vec<DensityMatrix>> {
        (0..self.dims.len()).map(|i| partial_trace(rho, &self.dims, i)).collect()
    }
}

/// `Σ_i S(ρ^i) - S(ρ)` in bits.
pub fn mutual_information(rho: &DensityMatrix, sys: &CompositeSystem) -> Result<f64> {
    let mut total = -von_neumann_entropy(rho)?;
    for m in sys.marginals(rho)? {
        total += von_neumann_entropy(&m)?;
    }
    Ok(total.max(0.0))
}

/// Maximal total correlation for the budget: every marginal ends thermal at
/// the common `T'` fixed by the joint energy constraint.
pub fn max_correlation_bound(sys: &CompositeSystem, beta: Beta, budget: EnergyBudget) -> Result<f64> {
    let t = sys.thermal(beta);
    let (beta_prime, _) = constrained_bound(&t, budget)?;
    Ok(sys
        .locals
        .iter()
        .map(|h| gibbs_state(h, beta_prime).entropy() - gibbs_state(h, beta).entropy())
        .sum::<f64>()
        .max(0.0))
}

/// Coherence and correlation created by a given unitary next to both maxima.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub delta_e: f64,
    pub i_max: f64,
    pub c_max: f64,
    /// `C_r` of the final state.
    pub coherence: f64,
    /// Total correlation of the final state.
    pub correlation: f64,
    pub energy_cost: f64,
}

/// Evaluates a tensor-order unitary that must spend the budget within 1e-6.
pub fn coherence_correlation_tradeoff(
    sys: &CompositeSystem,
    beta: Beta,
    budget: EnergyBudget,
    u: &UnitaryMatrix,
) -> Result<ComparisonReport> {
    let t = sys.thermal(beta);
    let rho = sys.tensor_thermal(beta);
    let rho_f = conjugate(&rho, u)?;
    let energy_cost = sys.energy(&rho_f)? - sys.energy(&rho)?;
    if (energy_cost - budget.delta_e()).abs() > 1e-6 {
        return Err(Error::EnergyMismatch { spent: energy_cost, budget: budget.delta_e() });
    }
    Ok(ComparisonReport {
        delta_e: budget.delta_e(),
        i_max: max_correlation_bound(sys, beta, budget)?,
        c_max: constrained_bound(&t, budget)?.1,
        coherence: relative_entropy_of_coherence(&rho_f)?,
        correlation: mutual_information(&rho_f, sys)?,
        energy_cost,
    })
}

/// Maximal-coherence rotation for the joint system, in tensor order.
pub fn max_coherence_rotation(
    sys: &CompositeSystem,
    beta: Beta,
    budget: EnergyBudget,
) -> Result<(UnitaryMatrix, ConstrainedReport)> {
    let report = constrained_optimum(&sys.thermal(beta), budget)?;
    Ok((sys.to_tensor_order(&report.plan.composed)?, report))
}

/// Real and imaginary parts of the upper triangle of `a - b`.
fn upper_residuals(a: &CMatrix, b: &CMatrix, out: &mut Vec<f64>) {
    for i in 0..a.nrows() {
        out.push(a[(i, i)].re - b[(i, i)].re);
        for j in i + 1..a.ncols() {
            let z = a[(i, j)] - b[(i, j)];
            out.push(z.re);
            out.push(z.im);
        }
    }
}

fn hot_marginals(sys: &CompositeSystem, beta_prime: Beta) -> Vec<DensityMatrix> {
    sys.locals.iter().map(|h| gibbs_state(h, beta_prime).state().clone()).collect()
}

#[derive(Clone, Debug)]
pub struct CorrelatingUnitary {
    pub unitary: UnitaryMatrix,
    /// Sum of squared marginal residuals.
    pub residual: f64,
    pub attempt: usize,
}

/// A tensor-order unitary whose final marginals are all thermal at the `T'`
/// of the budget, found by least squares from Haar starts. Such a unitary
/// attains the correlation bound.
pub fn correlating_unitary(
    sys: &CompositeSystem,
    beta: Beta,
    budget: EnergyBudget,
    attempts: usize,
    seed: u64,
) -> Result<CorrelatingUnitary> {
    let (beta_prime, _) = constrained_bound(&sys.thermal(beta), budget)?;
    let rho = sys.tensor_thermal(beta);
    let targets = hot_marginals(sys, beta_prime);
    let residual = |u: &UnitaryMatrix| {
        let rho_f = conjugate(&rho, u).expect("dimensions checked");
        let mut out = Vec::new();
        for (m, t) in sys.marginals(&rho_f).expect("dimensions checked").iter().zip(&targets) {
            upper_residuals(m.entries(), t.entries(), &mut out);
        }
        out
    };
    let mut best: Option<CorrelatingUnitary> = None;
    for attempt in 0..attempts {
        let start = haar_unitary(sys.joint_dim(), &mut stream(seed, attempt as u64));
        let out = least_squares_over_unitaries(residual, start, LSQ_ITERS)?;
        if best.as_ref().is_none_or(|b| out.cost < b.residual) {
            best = Some(CorrelatingUnitary { unitary: out.unitary, residual: out.cost, attempt });
        }
        if out.cost <= LSQ_CONVERGED {
            break;
        }
    }
    match best {
        Some(b) if b.residual <= LSQ_CONVERGED => Ok(b),
        _ => Err(Error::ConvergenceFailure),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NogoRestart {
    pub restart: usize,
    /// `diagonal_deviation + marginal_deviation`.
    pub deviation: f64,
    /// `‖dephase(ρ_f) - ρ_T'‖₁`.
    pub diagonal_deviation: f64,
    /// `‖ρ^A_f ⊗ ρ^B_f - ρ^A_T' ⊗ ρ^B_T'‖₁`.
    pub marginal_deviation: f64,
    pub energy_cost: f64,
}

#[derive(Clone, Debug)]
pub struct NogoReport {
    pub delta_e: f64,
    pub beta_prime: Beta,
    pub min_deviation: f64,
    pub best_restart: usize,
    pub argmin: UnitaryMatrix,
    pub restarts: Vec<NogoRestart>,
}

/// Searches for a two-qubit unitary that makes the final diagonal thermal at
/// `T'` and both final marginals thermal at `T'` at once. Each restart runs a
/// least-squares descent from a Haar start drawn from stream `(seed, r)`; the
/// energy constraint enters as a penalty residual.
pub fn verify_two_qubit_nogo(
    sys: &CompositeSystem,
    beta: Beta,
    budget: EnergyBudget,
    attempts: usize,
    seed: u64,
) -> Result<NogoReport> {
    if sys.dims() != [2, 2] {
        return Err(Error::InvalidConfig("the no-go search needs exactly two qubits".into()));
    }
    if beta.is_infinite_temperature() {
        return Err(Error::InfiniteTemperatureSource);
    }
    if attempts == 0 {
        return Err(Error::InvalidConfig("attempts must be at least 1".into()));
    }
    let (beta_prime, _) = constrained_bound(&sys.thermal(beta), budget)?;
    let rho = sys.tensor_thermal(beta);
    let e0 = sys.energy(&rho)?;
    let target = sys.tensor_thermal(beta_prime);
    let target_diag = target.diagonal();
    let targets = hot_marginals(sys, beta_prime);
    let residual = |u: &UnitaryMatrix| {
        let rho_f = conjugate(&rho, u).expect("dimensions checked");
        let mut out: Vec<f64> = rho_f.diagonal().iter().zip(&target_diag).map(|(a, b)| a - b).collect();
        for (m, t) in sys.marginals(&rho_f).expect("dimensions checked").iter().zip(&targets) {
            upper_residuals(m.entries(), t.entries(), &mut out);
        }
        out.push(sys.energy(&rho_f).expect("dimensions checked") - e0 - budget.delta_e());
        out
    };
    let outcomes: Vec<(NogoRestart, UnitaryMatrix)> = (0..attempts)
        .into_par_iter()
        .map(|r| {
            let start = haar_unitary(4, &mut stream(seed, r as u64));
            let out = least_squares_over_unitaries(residual, start, LSQ_ITERS)?;
            let rho_f = conjugate(&rho, &out.unitary)?;
            let diagonal_deviation = trace_norm(&(dephase(&rho_f).entries() - target.entries()))?;
            let m = sys.marginals(&rho_f)?;
            let product = kron(m[0].entries(), m[1].entries());
            let marginal_deviation = trace_norm(&(product - target.entries()))?;
            let row = NogoRestart {
                restart: r,
                deviation: diagonal_deviation + marginal_deviation,
                diagonal_deviation,
                marginal_deviation,
                energy_cost: sys.energy(&rho_f)? - e0,
            };
            Ok((row, out.unitary))
        })
        .collect::<Result<_>>()?;
    let (best_restart, argmin) = outcomes
        .iter()
        .min_by(|a, b| a.0.deviation.total_cmp(&b.0.deviation).then(a.0.restart.cmp(&b.0.restart)))
        .map(|(row, u)| (row.restart, u.clone()))
        .expect("attempts >= 1");
    let restarts: Vec<NogoRestart> = outcomes.into_iter().map(|(row, _)| row).collect();
    Ok(NogoReport {
        delta_e: budget.delta_e(),
        beta_prime,
        min_deviation: restarts[best_restart].deviation,
        best_restart,
        argmin,
        restarts,
    })
}

/// Two-qubit state supported on the diagonal and anti-diagonal, with `Y` at
/// `(0, 3)` and `X` at `(1, 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct XState {
    diag: [f64; 4],
    y: C64,
    x: C64,
}

impl XState {
    pub fn new(diag: [f64; 4], y: C64, x: C64) -> Result<Self> {
        let tol = crate::state::VALIDITY_TOL;
        if diag.iter().any(|&p| !p.is_finite() || p < -tol) {
            return Err(Error::InvalidState("negative diagonal entry".into()));
        }
        if (diag.iter().sum::<f64>() - 1.0).abs() > tol {
            return Err(Error::InvalidState("trace differs from 1".into()));
        }
        if y.norm_sqr() > diag[0] * diag[3] + tol || x.norm_sqr() > diag[1] * diag[2] + tol {
            return Err(Error::InvalidState("anti-diagonal too large for positivity".into()));
        }
        Ok(Self { diag, y, x })
    }

    /// Reads an X-state off a density matrix whose other entries are below `tol`.
    pub fn from_density(rho: &DensityMatrix, tol: f64) -> Result<Self> {
        if rho.dim() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: rho.dim() });
        }
        if x_leakage(rho) > tol {
            return Err(Error::InvalidState("entries outside the X pattern".into()));
        }
        let m = rho.entries();
        Self::new([m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re], m[(0, 3)], m[(1, 2)])
    }

    pub fn diag(&self) -> [f64; 4] {
        self.diag
    }

    pub fn y(&self) -> C64 {
        self.y
    }

    pub fn x(&self) -> C64 {
        self.x
    }

    pub fn to_density(&self) -> DensityMatrix {
        let mut m = CMatrix::zeros(4, 4);
        for (i, &p) in self.diag.iter().enumerate() {
            m[(i, i)] = C64::new(p, 0.0);
        }
        m[(0, 3)] = self.y;
        m[(3, 0)] = self.y.conj();
        m[(1, 2)] = self.x;
        m[(2, 1)] = self.x.conj();
        DensityMatrix::new_unchecked(m)
    }

    /// Closed-form `[λ1, λ2, λ3, λ4]`; `λ1 ≥ λ4` come from the outer block
    /// and `λ2 ≥ λ3` from the inner one.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let [a, b, c, d] = self.diag;
        let outer = (((a - d) / 2.0).powi(2) + self.y.norm_sqr()).sqrt();
        let inner = (((b - c) / 2.0).powi(2) + self.x.norm_sqr()).sqrt();
        [(a + d) / 2.0 + outer, (b + c) / 2.0 + inner, (b + c) / 2.0 - inner, (a + d) / 2.0 - outer]
    }
}

/// Largest modulus outside the diagonal and anti-diagonal of a 4x4 state.
pub fn x_leakage(rho: &DensityMatrix) -> f64 {
    let m = rho.entries();
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j && i + j != 3 {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Largest modulus of a two-qubit unitary connecting span{|00⟩,|11⟩} with
/// span{|01⟩,|10⟩}.
pub fn block_leakage(u: &UnitaryMatrix) -> f64 {
    let m = u.entries();
    let outer = [0, 3];
    let inner = [1, 2];
    let mut worst: f64 = 0.0;
    for &i in &outer {
        for &j in &inner {
            worst = worst.max(m[(i, j)].norm()).max(m[(j, i)].norm());
        }
    }
    worst
}

/// Infeasibility certificates for the eigenvalue matching of an X-state with
/// thermal marginals `diag{q, 1-q}` against the spectrum of `ρ_p ⊗ ρ_p`.
#[derive(Clone, Debug, Serialize)]
pub struct CaseAnalysisReport {
    pub p: f64,
    pub q: f64,
    /// `q(1-q) - p(1-p)`: must vanish for `λ2 = λ3 = p(1-p)`.
    pub case1_residual: f64,
    /// Case 1 holds only at `q = p`, i.e. no change at all.
    pub case1_identity_only: bool,
    /// `M - 1` where `M` is forced by `λ1 = p(1-p)`; `M >= 1` is required.
    pub case2_slack: f64,
    /// `|X|` forced by `λ2 = λ4 = p(1-p)`; must be nonnegative.
    pub case3_slack: f64,
    pub all_infeasible: bool,
}

pub fn xstate_eigen_cases(p: f64, q: f64) -> Result<CaseAnalysisReport> {
    if !(0.5 < q && q <= p && p < 1.0) {
        return Err(Error::DomainError(format!("need 1/2 < q <= p < 1, got p = {p}, q = {q}")));
    }
    let pp = p * (1.0 - p);
    let qq = q * (1.0 - q);
    let case1_residual = qq - pp;
    let case1_identity_only = (p - q).abs() <= 1e-12;
    let a = (q * q + (1.0 - q) * (1.0 - q)) / 2.0;
    let b = (2.0 * q - 1.0) / 2.0;
    let case2_slack = (pp - a) / b - 1.0;
    let case3_slack = pp - qq;
    let case1_infeasible = !case1_identity_only && case1_residual.abs() > 1e-15;
    Ok(CaseAnalysisReport {
        p,
        q,
        case1_residual,
        case1_identity_only,
        case2_slack,
        case3_slack,
        all_infeasible: case1_infeasible && case2_slack < 0.0 && case3_slack < 0.0,
    })
}
