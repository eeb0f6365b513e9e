//! Coherence creation under an energy budget.
//!
//! The optimal final diagonal is the Gibbs diagonal at the hotter temperature
//! `T'` fixed by the budget. It is reached by a chain of at most `d - 1` real
//! plane rotations: each step mixes one level holding too much population
//! with one holding too little and pins one of them to its target. Pinned
//! levels are never touched again, so the two levels of every later step
//! still have a vanishing off-diagonal element and each angle follows from a
//! convex combination of the two current populations.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coherence::{coherence_bound, relative_entropy_of_coherence};
use crate::error::{Error, Result};
use crate::state::{conjugate, CMatrix, DensityMatrix, UnitaryMatrix, C64, VALIDITY_TOL};
use crate::thermal::{beta_for_energy, gibbs_populations, Beta, ThermalState};

/// Populations closer than this to their target count as pinned.
const PIN_TOL: f64 = 1e-12;
/// Budgets above `W_max` by at most this much are clamped.
const BUDGET_CLAMP: f64 = 1e-12;

/// Energy available to the unitary, `0 <= ΔE <= W_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyBudget {
    delta_e: f64,
}

impl EnergyBudget {
    /// Validates against the maximal useful work of `t`.
    pub fn new(delta_e: f64, t: &ThermalState) -> Result<Self> {
        let max = t.max_work();
        if delta_e.is_nan() || delta_e < 0.0 || delta_e > max + BUDGET_CLAMP {
            return Err(Error::BudgetOutOfRange { delta_e, max });
        }
        Ok(Self { delta_e: delta_e.min(max) })
    }

    /// The budget that reaches infinite temperature.
    pub fn maximal(t: &ThermalState) -> Self {
        Self { delta_e: t.max_work() }
    }

    pub fn zero() -> Self {
        Self { delta_e: 0.0 }
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }
}

/// A single embedded plane rotation. For `axes = (a, b)` the matrix equals the
/// identity except `G[a][a] = G[b][b] = cos θ`, `G[a][b] = -sin θ` and
/// `G[b][a] = sin θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GivensStep {
    pub axes: (usize, usize),
    pub angle: f64,
}

impl GivensStep {
    pub fn matrix(&self, d: usize) -> DMatrix<f64> {
        let (a, b) = self.axes;
        let (s, c) = self.angle.sin_cos();
        let mut g = DMatrix::identity(d, d);
        g[(a, a)] = c;
        g[(b, b)] = c;
        g[(a, b)] = -s;
        g[(b, a)] = s;
        g
    }
}

/// Ordered rotation steps and their product (last step applied last).
#[derive(Clone, Debug)]
pub struct RotationPlan {
    pub steps: Vec<GivensStep>,
    pub composed: UnitaryMatrix,
}

impl RotationPlan {
    pub fn identity(d: usize) -> Self {
        Self { steps: Vec::new(), composed: UnitaryMatrix::identity(d) }
    }

    pub fn from_steps(d: usize, steps: Vec<GivensStep>) -> Result<Self> {
        if let Some(bad) = steps.iter().find(|s| s.axes.0 >= d || s.axes.1 >= d || s.axes.0 == s.axes.1) {
            return Err(Error::InvalidConfig(format!("bad rotation axes {:?} for d = {d}", bad.axes)));
        }
        let composed = steps
            .iter()
            .fold(DMatrix::identity(d, d), |acc, s| s.matrix(d) * acc);
        Ok(Self { steps, composed: UnitaryMatrix::from_real(&composed)? })
    }

    pub fn dim(&self) -> usize {
        self.composed.dim()
    }
}

/// Result of an energy-constrained protocol.
#[derive(Clone, Debug)]
pub struct ConstrainedReport {
    pub target_beta_prime: Beta,
    /// `S(ρ_T') - S(ρ_T)`.
    pub bound: f64,
    pub achieved_c_r: f64,
    /// Energy spent, `Tr[H ρ_f] - E_T`.
    pub achieved_energy: f64,
    pub plan: RotationPlan,
    pub final_state: DensityMatrix,
}

impl ConstrainedReport {
    pub fn gap(&self) -> f64 {
        self.bound - self.achieved_c_r
    }
}

/// Hotter inverse temperature reached with `budget` and the coherence bound
/// `S(ρ_T') - S(ρ_T)` it implies.
pub fn constrained_bound(t: &ThermalState, budget: EnergyBudget) -> Result<(Beta, f64)> {
    let max = t.max_work();
    let delta_e = budget.delta_e();
    if delta_e < 0.0 || delta_e > max + BUDGET_CLAMP {
        return Err(Error::BudgetOutOfRange { delta_e, max });
    }
    if delta_e == 0.0 {
        return Ok((t.beta(), 0.0));
    }
    if delta_e >= max {
        return Ok((Beta::InfiniteTemperature, coherence_bound(t)));
    }
    let h = t.hamiltonian();
    let beta_prime = beta_for_energy(h, t.energy() + delta_e)?;
    let hot = gibbs_populations(h, beta_prime);
    let bound = crate::state::shannon_entropy(&hot) - t.entropy();
    Ok((beta_prime, bound.max(0.0)))
}

/// `x ≺ y`: descending partial sums of `x` never exceed those of `y`.
pub fn check_majorization(x: &[f64], y: &[f64]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    for v in [x, y] {
        if v.iter().any(|p| !p.is_finite() || *p < -VALIDITY_TOL) {
            return Err(Error::NotAProbabilityVector(format!("{v:?}")));
        }
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > VALIDITY_TOL {
            return Err(Error::NotAProbabilityVector(format!("sums to {total}")));
        }
    }
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (xs, ys) = (sorted(x), sorted(y));
    let (mut sx, mut sy) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        sx += a;
        sy += b;
        if sx > sy + PIN_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Plane-rotation steps taking the diagonal state `initial` to one whose
/// diagonal is `target`.
///
/// Requires `target` to be non-increasing and its index-order partial sums to
/// be dominated by those of `initial` (which is majorization once both are
/// sorted the same way). Returns at most `d - 1` steps.
pub fn givens_chain(initial: &[f64], target: &[f64]) -> Result<Vec<GivensStep>> {
    let d = initial.len();
    if target.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: target.len() });
    }
    if target.windows(2).any(|w| w[1] > w[0] + PIN_TOL) {
        return Err(Error::NotMajorized);
    }
    let total_gap: f64 = initial.iter().sum::<f64>() - target.iter().sum::<f64>();
    if total_gap.abs() > VALIDITY_TOL {
        return Err(Error::NotMajorized);
    }
    let mut y = initial.to_vec();
    let slack = |y: &[f64], m: usize| -> f64 {
        y[..=m].iter().sum::<f64>() - target[..=m].iter().sum::<f64>()
    };
    if (0..d).any(|m| slack(&y, m) < -PIN_TOL) {
        return Err(Error::NotMajorized);
    }

    let mut steps = Vec::new();
    while steps.len() < d {
        let over: Vec<usize> = (0..d).filter(|&i| y[i] - target[i] > PIN_TOL).collect();
        let under: Vec<usize> = (0..d).filter(|&i| target[i] - y[i] > PIN_TOL).collect();
        let (Some(&lowest_over), Some(&highest_under)) = (over.first(), under.last()) else {
            break;
        };
        // Outermost pair first. Its move is admissible when no partial sum in
        // between would drop below the target; this always holds for a pair
        // of Gibbs diagonals. Otherwise use the innermost adjacent pair.
        let outer_delta = (y[lowest_over] - target[lowest_over])
            .min(target[highest_under] - y[highest_under]);
        let outer_ok = lowest_over < highest_under
            && (lowest_over..highest_under).all(|m| slack(&y, m) >= outer_delta - PIN_TOL);
        let (j, k) = if outer_ok {
            (lowest_over, highest_under)
        } else {
            let j = *over.last().unwrap();
            let k = *under.iter().find(|&&k| k > j).ok_or(Error::NotMajorized)?;
            (j, k)
        };
        let excess = y[j] - target[j];
        let deficit = target[k] - y[k];
        let delta = excess.min(deficit);
        let spread = y[j] - y[k];
        if spread <= 0.0 {
            return Err(Error::NotMajorized);
        }
        let sin2 = (delta / spread).clamp(0.0, 1.0);
        steps.push(GivensStep { axes: (j, k), angle: sin2.sqrt().asin() });
        if excess <= deficit {
            y[j] = target[j];
            y[k] += excess;
        } else {
            y[k] = target[k];
            y[j] -= deficit;
        }
        if (excess - deficit).abs() <= PIN_TOL {
            y[j] = target[j];
            y[k] = target[k];
        }
    }
    debug_assert!(steps.len() < d.max(1));
    Ok(steps)
}

/// Real orthogonal `R` with `dephase(R ρ_T R^T) = ρ_T'`.
pub fn synthesize_rotation(t: &ThermalState, beta_prime: Beta) -> Result<RotationPlan> {
    let d = t.dim();
    if beta_prime == t.beta() {
        return Ok(RotationPlan::identity(d));
    }
    if beta_prime.value() > t.beta().value() {
        return Err(Error::NotMajorized);
    }
    let target = gibbs_populations(t.hamiltonian(), beta_prime);
    let steps = givens_chain(t.populations(), &target)?;
    RotationPlan::from_steps(d, steps)
}

fn report_for(t: &ThermalState, beta_prime: Beta, bound: f64, plan: RotationPlan) -> Result<ConstrainedReport> {
    let final_state = conjugate(t.state(), &plan.composed)?;
    let achieved_c_r = relative_entropy_of_coherence(&final_state)?;
    let achieved_energy = t.hamiltonian().expectation(&final_state.diagonal()) - t.energy();
    Ok(ConstrainedReport {
        target_beta_prime: beta_prime,
        bound,
        achieved_c_r,
        achieved_energy,
        plan,
        final_state,
    })
}

/// Maximal coherence for the budget, any dimension.
pub fn constrained_optimum(t: &ThermalState, budget: EnergyBudget) -> Result<ConstrainedReport> {
    let (beta_prime, bound) = constrained_bound(t, budget)?;
    let plan = synthesize_rotation(t, beta_prime)?;
    report_for(t, beta_prime, bound, plan)
}

/// Closed-form qubit protocol: one rotation with
/// `θ = arccos sqrt((p + q - 1) / (2p - 1))`, `q = p - ΔE / E`.
pub fn qubit_protocol(t: &ThermalState, budget: EnergyBudget) -> Result<ConstrainedReport> {
    if t.dim() != 2 {
        return Err(Error::InvalidDimension(t.dim()));
    }
    let p = t.populations()[0];
    let polarization = 2.0 * p - 1.0;
    if polarization <= VALIDITY_TOL {
        return Err(Error::InfiniteTemperatureSource);
    }
    let (beta_prime, bound) = constrained_bound(t, budget)?;
    let gap = t.hamiltonian().energies()[1] - t.hamiltonian().energies()[0];
    let q = p - budget.delta_e() / gap;
    let theta = ((p + q - 1.0) / polarization).clamp(0.0, 1.0).sqrt().acos();
    let plan = RotationPlan::from_steps(2, vec![GivensStep { axes: (0, 1), angle: theta }])?;
    report_for(t, beta_prime, bound, plan)
}

/// Generators of the two qutrit rotations: `J1` couples levels 0 and 2,
/// `J2` couples levels 0 and 1.
pub fn qutrit_generators() -> (CMatrix, CMatrix) {
    let z = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let j1 = CMatrix::from_row_slice(3, 3, &[z, z, i, z, z, z, -i, z, z]);
    let j2 = CMatrix::from_row_slice(3, 3, &[z, -i, z, i, z, z, z, z, z]);
    (j1, j2)
}

/// `exp(-iθJ)` for a generator with `J³ = J`: `I - i sinθ J + (cosθ - 1) J²`.
pub fn rotation_from_generator(generator: &CMatrix, angle: f64) -> UnitaryMatrix {
    let d = generator.nrows();
    let j2 = generator * generator;
    let (s, c) = angle.sin_cos();
    let m = CMatrix::identity(d, d) - generator * C64::new(0.0, s) + j2 * C64::new(c - 1.0, 0.0);
    UnitaryMatrix::new_unchecked(m)
}

/// Angles of the two-rotation qutrit protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QutritAngles {
    pub alpha: f64,
    pub delta: f64,
}

fn acos_sqrt_checked(ratio: f64, what: &str) -> Result<f64> {
    if !(-PIN_TOL..=1.0 + PIN_TOL).contains(&ratio) {
        return Err(Error::ValidityConditionViolated(format!(
            "{what}: cos² = {ratio} outside [0, 1]"
        )));
    }
    Ok(ratio.clamp(0.0, 1.0).sqrt().acos())
}

/// Closed-form angles for the qutrit protocol.
///
/// Requires `E_1 > ⟨E⟩_T`. The middle level may lose population on the way
/// to `T'`; the error is only raised when a rotation angle has no solution.
pub fn qutrit_angles(t: &ThermalState, beta_prime: Beta) -> Result<QutritAngles> {
    if t.dim() != 3 {
        return Err(Error::InvalidDimension(t.dim()));
    }
    let e1 = t.hamiltonian().energies()[1];
    if e1 <= t.energy() {
        return Err(Error::ValidityConditionViolated(format!(
            "E_1 = {e1} does not exceed the thermal energy {}",
            t.energy()
        )));
    }
    let pops = t.populations();
    let (p, q) = (pops[0], pops[2]);
    let middle = 1.0 - p - q;
    let hot = gibbs_populations(t.hamiltonian(), beta_prime);
    let (p_new, q_new) = (hot[0], hot[2]);
    let alpha = acos_sqrt_checked((p - q_new) / (p - q), "first rotation")?;
    let carrier = p - (q_new - q);
    let denom = carrier - middle;
    let delta = if denom.abs() <= PIN_TOL {
        0.0
    } else {
        acos_sqrt_checked((p_new - middle) / denom, "second rotation")?
    };
    Ok(QutritAngles { alpha, delta })
}

/// Two successive rotations `R2(δ) R1(α)` with `R_k = exp(-i angle J_k)`.
pub fn qutrit_protocol(t: &ThermalState, budget: EnergyBudget) -> Result<ConstrainedReport> {
    if t.dim() != 3 {
        return Err(Error::InvalidDimension(t.dim()));
    }
    let (beta_prime, bound) = constrained_bound(t, budget)?;
    let QutritAngles { alpha, delta } = qutrit_angles(t, beta_prime)?;
    let (j1, j2) = qutrit_generators();
    let r1 = rotation_from_generator(&j1, alpha);
    let r2 = rotation_from_generator(&j2, delta);
    let composed = r2.compose(&r1)?;
    let plan = RotationPlan {
        // exp(-iαJ1) has +sin α at (0, 2), i.e. axes (2, 0) in GivensStep terms
        steps: vec![
            GivensStep { axes: (2, 0), angle: alpha },
            GivensStep { axes: (0, 1), angle: delta },
        ],
        composed: UnitaryMatrix::new(composed.entries().clone())?,
    };
    report_for(t, beta_prime, bound, plan)
}
