//! Hamiltonians, Gibbs states and temperature/energy bookkeeping (`k_B = 1`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{check_dims, shannon_entropy, DensityMatrix, MAX_DIM};

const BISECTION_MAX_ITER: usize = 200;
const BRACKET_MAX_DOUBLINGS: usize = 1100;

/// Diagonal Hamiltonian given by its ascending energy levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Hamiltonian {
    energies: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        let d = energies.len();
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidHamiltonian(format!(
                "dimension {d} outside 2..={MAX_DIM}"
            )));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidHamiltonian("non-finite energy".into()));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidHamiltonian("energies must be ascending".into()));
        }
        Ok(Self { energies })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn trace(&self) -> f64 {
        self.energies.iter().sum()
    }

    /// Average energy of the maximally mixed state, `Tr[H] / d`.
    pub fn infinite_temperature_energy(&self) -> f64 {
        self.trace() / self.dim() as f64
    }

    /// Energy expectation of a population vector.
    pub fn expectation(&self, populations: &[f64]) -> f64 {
        self.energies.iter().zip(populations).map(|(e, p)| e * p).sum()
    }
}

impl TryFrom<Vec<f64>> for Hamiltonian {
    type Error = Error;

    fn try_from(energies: Vec<f64>) -> Result<Self> {
        Self::new(energies)
    }
}

impl From<Hamiltonian> for Vec<f64> {
    fn from(h: Hamiltonian) -> Self {
        h.energies
    }
}

/// Inverse temperature. `β = 0` is represented exactly by
/// [`Beta::InfiniteTemperature`]; zero temperature is not representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Beta {
    Finite(f64),
    InfiniteTemperature,
}

impl Beta {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 || beta.is_infinite() {
            return Err(Error::InvalidBeta(beta));
        }
        if beta == 0.0 {
            Ok(Beta::InfiniteTemperature)
        } else {
            Ok(Beta::Finite(beta))
        }
    }

    /// Numeric value, `0.0` at infinite temperature.
    pub fn value(self) -> f64 {
        match self {
            Beta::Finite(b) => b,
            Beta::InfiniteTemperature => 0.0,
        }
    }

    pub fn is_infinite_temperature(self) -> bool {
        matches!(self, Beta::InfiniteTemperature)
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::InfiniteTemperature => f.write_str("inf"),
        }
    }
}

/// Accepts a non-negative real or `inf` (infinite temperature, `β = 0`).
impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Beta::InfiniteTemperature);
        }
        let v: f64 = s.parse().map_err(|_| Error::InvalidBeta(f64::NAN))?;
        Beta::new(v)
    }
}

impl Serialize for Beta {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// A Gibbs state `e^{-βH} / Z`.
#[derive(Clone, Debug)]
pub struct ThermalState {
    hamiltonian: Hamiltonian,
    beta: Beta,
    populations: Vec<f64>,
    log_partition: f64,
    state: DensityMatrix,
}

impl ThermalState {
    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn partition_function(&self) -> f64 {
        self.log_partition.exp()
    }

    pub fn log_partition_function(&self) -> f64 {
        self.log_partition
    }

    /// Average energy `E_T`.
    pub fn energy(&self) -> f64 {
        self.hamiltonian.expectation(&self.populations)
    }

    /// Entropy in bits.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.populations)
    }

    /// Energy needed to reach the maximally mixed diagonal, `Tr[H]/d - E_T`.
    pub fn max_work(&self) -> f64 {
        (self.hamiltonian.infinite_temperature_energy() - self.energy()).max(0.0)
    }
}

/// Occupations `e^{-βE_j} / Z`, computed with energies shifted by `-E_0`.
pub fn gibbs_populations(h: &Hamiltonian, beta: Beta) -> Vec<f64> {
    let b = beta.value();
    let e0 = h.ground_energy();
    let weights: Vec<f64> = h.energies().iter().map(|e| (-b * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

pub fn gibbs_state(h: &Hamiltonian, beta: Beta) -> ThermalState {
    let b = beta.value();
    let e0 = h.ground_energy();
    let shifted_z: f64 = h.energies().iter().map(|e| (-b * (e - e0)).exp()).sum();
    let populations = gibbs_populations(h, beta);
    let state = DensityMatrix::from_diagonal(&populations)
        .expect("Gibbs populations form a valid state");
    ThermalState {
        hamiltonian: h.clone(),
        beta,
        log_partition: shifted_z.ln() - b * e0,
        populations,
        state,
    }
}

/// Average energy of the Gibbs state at `beta`.
pub fn thermal_energy(h: &Hamiltonian, beta: Beta) -> f64 {
    h.expectation(&gibbs_populations(h, beta))
}

/// `Tr[H rho]`; only the diagonal of `rho` contributes.
pub fn average_energy(rho: &DensityMatrix, h: &Hamiltonian) -> Result<f64> {
    check_dims(h.dim(), rho.dim())?;
    Ok(h.expectation(&rho.diagonal()))
}

/// Inverse temperature whose Gibbs state has average energy `target`.
///
/// Bisection on `[0, β_hi]`, doubling `β_hi` from 1 until the target is
/// bracketed. A target equal to `Tr[H]/d` (within 1e-12 relative) returns
/// infinite temperature.
pub fn beta_for_energy(h: &Hamiltonian, target: f64) -> Result<Beta> {
    let e0 = h.ground_energy();
    let e_inf = h.infinite_temperature_energy();
    let out_of_range = || Error::EnergyOutOfRange { target, min: e0, max: e_inf };
    if target.is_nan() {
        return Err(out_of_range());
    }
    let slack = 1e-12 * e_inf.abs().max(1.0);
    if (target - e_inf).abs() <= slack {
        return Ok(Beta::InfiniteTemperature);
    }
    if target > e_inf || target <= e0 {
        return Err(out_of_range());
    }
    let energy_at = |b: f64| thermal_energy(h, Beta::Finite(b));

    let mut hi = 1.0;
    let mut doublings = 0;
    while energy_at(hi) > target {
        hi *= 2.0;
        doublings += 1;
        if doublings > BRACKET_MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::ConvergenceFailure);
        }
    }
    let mut lo = 0.0;
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // energy decreases in beta
        if energy_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    Beta::new(b).map_err(|_| Error::ConvergenceFailure)
}

/// `∂p_j/∂T = -(⟨E⟩_T - E_j) p_j / T²` at `T = 1/β`.
pub fn population_temperature_derivative(h: &Hamiltonian, beta: f64, j: usize) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidBeta(beta));
    }
    if j >= h.dim() {
        return Err(Error::IndexOutOfRange { index: j, dim: h.dim() });
    }
    let pops = gibbs_populations(h, Beta::Finite(beta));
    let mean = h.expectation(&pops);
    Ok(-(mean - h.energies()[j]) * beta * beta * pops[j])
}
