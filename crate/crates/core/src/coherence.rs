//! Relative entropy of coherence, the maximally coherent basis and the
//! unconstrained optimal unitary together with its energy cost.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{
    check_dims, conjugate, dephase, shannon_entropy, von_neumann_entropy, DensityMatrix,
    UnitaryMatrix, CMatrix, C64, MAX_DIM,
};
use crate::thermal::ThermalState;

/// Outcome of applying a unitary to a thermal state.
#[derive(Clone, Debug, Serialize)]
pub struct CoherenceReport {
    /// Coherence created, bits.
    pub c_r: f64,
    /// `log2 d - S(ρ_T)`.
    pub bound: f64,
    /// `bound - c_r`.
    pub gap: f64,
    /// Energy injected by the unitary.
    pub energy_cost: f64,
}

/// `C_r(ρ) = S(dephase ρ) - S(ρ)` in bits.
pub fn relative_entropy_of_coherence(rho: &DensityMatrix) -> Result<f64> {
    let dephased = shannon_entropy(&dephase(rho).diagonal());
    Ok(dephased - von_neumann_entropy(rho)?)
}

fn check_dim(d: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

/// The states `|φ_j⟩ = Z^j |φ⟩` where `|φ⟩` is the uniform superposition and
/// `Z = Σ_m e^{2πi m/d} |m⟩⟨m|`. Component 0 of every vector is real positive.
pub fn maximally_coherent_basis(d: usize) -> Result<Vec<DVector<C64>>> {
    check_dim(d)?;
    let amp = 1.0 / (d as f64).sqrt();
    Ok((0..d)
        .map(|j| {
            DVector::from_iterator(
                d,
                (0..d).map(|m| C64::from_polar(amp, TAU * ((j * m) % d) as f64 / d as f64)),
            )
        })
        .collect())
}

/// `U = Σ_j |φ_j⟩⟨j|`: maps every energy eigenstate to a maximally coherent state.
pub fn max_coherence_unitary(d: usize) -> Result<UnitaryMatrix> {
    let basis = maximally_coherent_basis(d)?;
    let mut m = CMatrix::zeros(d, d);
    for (j, phi) in basis.iter().enumerate() {
        m.set_column(j, phi);
    }
    UnitaryMatrix::new(m)
}

/// `M_ij = |⟨i|U|j⟩|²`, the doubly stochastic map induced on diagonals.
pub fn induced_doubly_stochastic(u: &UnitaryMatrix) -> DMatrix<f64> {
    u.entries().map(|z| z.norm_sqr())
}

/// Diagonal of `U diag(p) U^dag`.
pub(crate) fn transformed_populations(u: &UnitaryMatrix, populations: &[f64]) -> Vec<f64> {
    let m = induced_doubly_stochastic(u);
    (m * DVector::from_column_slice(populations)).iter().copied().collect()
}

/// `W = Tr[H (V ρ_T V^dag - ρ_T)]`.
pub fn energy_cost(v: &UnitaryMatrix, t: &ThermalState) -> Result<f64> {
    check_dims(t.dim(), v.dim())?;
    let h = t.hamiltonian();
    let after = transformed_populations(v, t.populations());
    Ok(h.expectation(&after) - h.expectation(t.populations()))
}

/// `log2 d - S(ρ_T)`.
pub fn coherence_bound(t: &ThermalState) -> f64 {
    (t.dim() as f64).log2() - t.entropy()
}

/// Coherence, bound, gap and energy for `V ρ_T V^dag`.
pub fn coherence_report(v: &UnitaryMatrix, t: &ThermalState) -> Result<CoherenceReport> {
    let rho_f = conjugate(t.state(), v)?;
    let c_r = relative_entropy_of_coherence(&rho_f)?;
    let bound = coherence_bound(t);
    Ok(CoherenceReport { c_r, bound, gap: bound - c_r, energy_cost: energy_cost(v, t)? })
}

/// Report for the maximal-coherence unitary.
pub fn max_coherence_report(t: &ThermalState) -> Result<CoherenceReport> {
    coherence_report(&max_coherence_unitary(t.dim())?, t)
}
