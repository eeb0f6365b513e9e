use thermocoh::constrained::EnergyBudget;
use thermocoh::correlation::{block_leakage, verify_two_qubit_nogo, x_leakage, CompositeSystem};
use thermocoh::state::{conjugate, partial_trace};
use thermocoh::thermal::Beta;

fn equal_qubits() -> (CompositeSystem, Beta) {
    (CompositeSystem::two_qubits(1.0, 1.0).unwrap(), Beta::Finite(3f64.ln()))
}

#[test]
fn nogo_holds_for_small_budgets() {
    let (sys, beta) = equal_qubits();
    let t = sys.thermal(beta);
    for delta_e in [0.05, 0.1, 0.2, 0.28] {
        let r = verify_two_qubit_nogo(&sys, beta, EnergyBudget::new(delta_e, &t).unwrap(), 32, 2).unwrap();
        assert!(r.min_deviation > 1e-3, "dE = {delta_e}: {}", r.min_deviation);
    }
}

/// Above ΔE ≈ 0.29605 (p = 0.75) a unitary makes the diagonal and both
/// marginals thermal at once. The witness is not an X-state.
#[test]
fn simultaneous_optimum_exists_for_large_budgets() {
    let (sys, beta) = equal_qubits();
    let t = sys.thermal(beta);
    for delta_e in [0.3, 0.4, 0.5] {
        let r = verify_two_qubit_nogo(&sys, beta, EnergyBudget::new(delta_e, &t).unwrap(), 32, 2).unwrap();
        assert!(r.min_deviation < 1e-9, "dE = {delta_e}: {}", r.min_deviation);
    }
    let r = verify_two_qubit_nogo(&sys, beta, EnergyBudget::new(0.3, &t).unwrap(), 16, 1).unwrap();
    let rho_f = conjugate(&sys.tensor_thermal(beta), &r.argmin).unwrap();
    let q = [0.6, 0.4];
    let expect = [q[0] * q[0], q[0] * q[1], q[1] * q[0], q[1] * q[1]];
    for (a, b) in rho_f.diagonal().iter().zip(expect) {
        assert!((a - b).abs() < 1e-9);
    }
    for k in 0..2 {
        let m = partial_trace(&rho_f, &[2, 2], k).unwrap();
        assert!((m.entries()[(0, 0)].re - 0.6).abs() < 1e-9);
        assert!(m.entries()[(0, 1)].norm() < 1e-9);
    }
    assert!(x_leakage(&rho_f) > 1e-2);
}

#[test]
fn nogo_search_is_reproducible() {
    let (sys, beta) = equal_qubits();
    let t = sys.thermal(beta);
    let budget = EnergyBudget::new(0.2, &t).unwrap();
    let a = verify_two_qubit_nogo(&sys, beta, budget, 8, 5).unwrap();
    let b = verify_two_qubit_nogo(&sys, beta, budget, 8, 5).unwrap();
    assert_eq!(a.min_deviation, b.min_deviation);
    assert_eq!(a.argmin, b.argmin);
}

/// Minimisers of the no-go deviation for unequal gaps are not block diagonal
/// on span{|00⟩,|11⟩} ⊕ span{|01⟩,|10⟩}.
#[test]
fn nogo_minimisers_mix_blocks_for_unequal_gaps() {
    let sys = CompositeSystem::two_qubits(1.0, 0.6).unwrap();
    let beta = Beta::Finite(3f64.ln());
    let t = sys.thermal(beta);
    for delta_e in [0.1, 0.2] {
        let r = verify_two_qubit_nogo(&sys, beta, EnergyBudget::new(delta_e, &t).unwrap(), 16, 1).unwrap();
        assert!(block_leakage(&r.argmin) > 1e-3, "dE = {delta_e}");
    }
}
