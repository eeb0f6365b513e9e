use proptest::prelude::*;

use thermocoh::coherence::{
    coherence_bound, energy_cost, induced_doubly_stochastic, max_coherence_report, relative_entropy_of_coherence,
};
use thermocoh::constrained::{check_majorization, constrained_bound, constrained_optimum, EnergyBudget};
use thermocoh::correlation::{max_correlation_bound, mutual_information, CompositeSystem};
use thermocoh::search::{haar_unitary, stream};
use thermocoh::state::{conjugate, dephase, shannon_entropy, von_neumann_entropy, DensityMatrix};
use thermocoh::thermal::{beta_for_energy, gibbs_populations, gibbs_state, thermal_energy, Beta, Hamiltonian};

fn hamiltonian(max_dim: usize) -> impl Strategy<Value = Hamiltonian> {
    prop::collection::vec(0.05f64..2.0, 1..max_dim).prop_map(|gaps| {
        let mut e = vec![0.0];
        for g in gaps {
            e.push(e.last().unwrap() + g);
        }
        Hamiltonian::new(e).unwrap()
    })
}

fn beta() -> impl Strategy<Value = Beta> {
    (0.05f64..5.0).prop_map(Beta::Finite)
}

/// Random mixed state: Haar rotation of a random spectrum.
fn random_state(d: usize, seed: u64, weights: &[f64]) -> DensityMatrix {
    let total: f64 = weights.iter().take(d).sum();
    let p: Vec<f64> = weights.iter().take(d).map(|w| w / total).collect();
    let diag = DensityMatrix::from_diagonal(&p).unwrap();
    conjugate(&diag, &haar_unitary(d, &mut stream(seed, 0))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coherence_is_bounded_and_dephasing_idempotent(
        d in 2usize..=6,
        seed in any::<u64>(),
        weights in prop::collection::vec(0.01f64..1.0, 6),
    ) {
        let rho = random_state(d, seed, &weights);
        let c = relative_entropy_of_coherence(&rho).unwrap();
        prop_assert!(c >= -1e-10);
        prop_assert!(c <= (d as f64).log2() + 1e-10);
        let once = dephase(&rho);
        prop_assert_eq!(dephase(&once), once.clone());
        prop_assert!(relative_entropy_of_coherence(&once).unwrap().abs() < 1e-10);
    }

    #[test]
    fn entropy_is_unitarily_invariant(d in 2usize..=6, seed in any::<u64>(), weights in prop::collection::vec(0.01f64..1.0, 6)) {
        let rho = random_state(d, seed, &weights);
        let u = haar_unitary(d, &mut stream(seed, 1));
        let a = von_neumann_entropy(&rho).unwrap();
        let b = von_neumann_entropy(&conjugate(&rho, &u).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn induced_map_is_doubly_stochastic(d in 2usize..=8, seed in any::<u64>()) {
        let m = induced_doubly_stochastic(&haar_unitary(d, &mut stream(seed, 0)));
        for i in 0..d {
            prop_assert!((m.row(i).sum() - 1.0).abs() < 1e-12);
            prop_assert!((m.column(i).sum() - 1.0).abs() < 1e-12);
        }
        prop_assert!(m.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn thermal_states_are_passive(h in hamiltonian(8), b in beta(), seed in any::<u64>()) {
        let t = gibbs_state(&h, b);
        let u = haar_unitary(h.dim(), &mut stream(seed, 0));
        prop_assert!(energy_cost(&u, &t).unwrap() >= -1e-12);
    }

    #[test]
    fn populations_decrease_with_energy(h in hamiltonian(8), b in beta()) {
        let p = gibbs_populations(&h, b);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn beta_inversion_roundtrip(h in hamiltonian(8), b in 0.05f64..5.0) {
        let e = thermal_energy(&h, Beta::Finite(b));
        let back = beta_for_energy(&h, e).unwrap();
        let again = thermal_energy(&h, back);
        prop_assert!((again - e).abs() < 1e-10 * e.abs().max(1.0));
    }

    #[test]
    fn maximal_coherence_saturates(h in hamiltonian(8), b in beta()) {
        let t = gibbs_state(&h, b);
        let r = max_coherence_report(&t).unwrap();
        prop_assert!(r.gap.abs() < 1e-8);
        prop_assert!((r.energy_cost - t.max_work()).abs() < 1e-10);
    }

    #[test]
    fn constrained_optimum_meets_bound(h in hamiltonian(8), b in beta(), fraction in 0.0f64..=1.0) {
        let t = gibbs_state(&h, b);
        let budget = EnergyBudget::new(fraction * t.max_work(), &t).unwrap();
        let r = constrained_optimum(&t, budget).unwrap();
        prop_assert!(r.plan.steps.len() < h.dim());
        prop_assert!(r.plan.composed.imaginary_residual() == 0.0);
        prop_assert!(r.plan.composed.residual() < 1e-10);
        prop_assert!(r.gap().abs() < 1e-8);
        prop_assert!((r.achieved_energy - budget.delta_e()).abs() < 1e-8);
        prop_assert!(r.bound <= coherence_bound(&t) + 1e-10);
    }

    #[test]
    fn bound_is_monotone_in_budget(h in hamiltonian(6), b in beta(), x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let t = gibbs_state(&h, b);
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let (_, a) = constrained_bound(&t, EnergyBudget::new(lo * t.max_work(), &t).unwrap()).unwrap();
        let (_, c) = constrained_bound(&t, EnergyBudget::new(hi * t.max_work(), &t).unwrap()).unwrap();
        prop_assert!(a <= c + 1e-12);
    }

    #[test]
    fn hotter_thermal_states_are_majorized(h in hamiltonian(8), b in 0.1f64..5.0, factor in 0.0f64..1.0) {
        let cold = gibbs_populations(&h, Beta::Finite(b));
        let hot = gibbs_populations(&h, Beta::new(b * factor).unwrap());
        prop_assert!(check_majorization(&hot, &cold).unwrap());
    }

    #[test]
    fn coherence_below_max_entropy_at_same_energy(h in hamiltonian(6), b in beta(), seed in any::<u64>()) {
        // any final state is dephased to a diagonal no more entropic than the
        // Gibbs state at the same energy
        let t = gibbs_state(&h, b);
        let u = haar_unitary(h.dim(), &mut stream(seed, 0));
        let rho = conjugate(t.state(), &u).unwrap();
        let diag = rho.diagonal();
        let e = h.expectation(&diag);
        let max_entropy = if e >= h.infinite_temperature_energy() - 1e-12 {
            (h.dim() as f64).log2()
        } else {
            shannon_entropy(&gibbs_populations(&h, beta_for_energy(&h, e).unwrap()))
        };
        prop_assert!(shannon_entropy(&diag) <= max_entropy + 1e-10);
    }

    #[test]
    fn correlation_bound_equals_coherence_bound(
        locals in prop::collection::vec(hamiltonian(3), 2..=3),
        b in beta(),
        fraction in 0.0f64..=1.0,
    ) {
        prop_assume!(locals.iter().map(Hamiltonian::dim).product::<usize>() <= 16);
        let sys = CompositeSystem::new(locals).unwrap();
        let t = sys.thermal(b);
        let budget = EnergyBudget::new(fraction * t.max_work(), &t).unwrap();
        let i = max_correlation_bound(&sys, b, budget).unwrap();
        let (_, c) = constrained_bound(&t, budget).unwrap();
        prop_assert!((i - c).abs() < 1e-10);
    }

    #[test]
    fn mutual_information_nonnegative(seed in any::<u64>(), weights in prop::collection::vec(0.01f64..1.0, 4)) {
        let sys = CompositeSystem::two_qubits(1.0, 0.5).unwrap();
        let rho = random_state(4, seed, &weights);
        let i = mutual_information(&rho, &sys).unwrap();
        prop_assert!((0.0..=2.0 + 1e-10).contains(&i));
    }
}
