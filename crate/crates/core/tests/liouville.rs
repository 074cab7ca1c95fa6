use ddq::dynamics::{initial_state, propagate_with, thermal_state, uniform_times, QubitState};
use ddq::linalg::eigenvalues;
use ddq::liouville::{build_block, liouvillian, number_superoperator, split_blocks, BasisPair, BlockDump};
use ddq::{HilbertSpec, SystemParams};
use proptest::prelude::*;

fn params(g: f64, gamma: f64, n_bar: f64) -> SystemParams {
    SystemParams::new(1.525, g, gamma, n_bar).unwrap()
}

#[test]
fn unitary_generator_has_imaginary_spectrum() {
    let spec = HilbertSpec::new(3).unwrap();
    let l = liouvillian(&params(0.0112, 0.0, 0.3), spec).unwrap();
    for z in eigenvalues(&l.matrix).unwrap() {
        assert!(z.re.abs() < 1e-12);
    }
}

#[test]
fn qubit_coherence_sector_is_never_mixed() {
    let spec = HilbertSpec::new(5).unwrap();
    let l = liouvillian(&params(0.0112, 0.02, 0.4), spec).unwrap();
    let sector = |i: usize| {
        let p = BasisPair::from_index(spec, i);
        p.ket.0.occupation() as i64 - p.bra.0.occupation() as i64
    };
    let n = l.dim();
    for i in 0..n {
        for j in 0..n {
            if sector(i) != sector(j) {
                assert_eq!(l.matrix[(i, j)].norm(), 0.0);
            }
        }
    }
}

#[test]
fn block_dump_layout() {
    let spec = HilbertSpec::new(2).unwrap();
    let b = build_block(&params(0.0112, 3.53e-4, 0.0), spec, 1);
    let dump: BlockDump = b.to_dump();
    assert_eq!(dump.d, 1);
    assert_eq!(dump.basis.len(), 4);
    assert_eq!(dump.entries.len(), 16);
    assert!(dump.basis.contains(&[1, 0, 0, 0]));
}

#[test]
fn hermiticity_is_preserved() {
    let spec = HilbertSpec::new(4).unwrap();
    let p = params(0.0112, 0.01, 0.3);
    let l = liouvillian(&p, spec).unwrap();
    let q = QubitState::from_bloch(0.2, 0.7, -0.1).unwrap();
    let rho0 = initial_state(&q, &thermal_state(p.n_bar, spec.s).unwrap()).unwrap();
    let traj = propagate_with(&l, &rho0, &uniform_times(3000.0, 61), true).unwrap();
    for rho in traj.states.unwrap() {
        assert!(rho.hermiticity_error() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generator_invariants(g in 0.0f64..0.02, gamma in 0.0f64..0.05, n_bar in 0.0f64..1.5, s in 2usize..6) {
        let spec = HilbertSpec::new(s).unwrap();
        let p = params(g, gamma, n_bar);
        let l = liouvillian(&p, spec).unwrap();
        prop_assert!(l.trace_defect() <= 1e-10);
        let n = number_superoperator(spec);
        prop_assert!(l.commutator_norm(&n) <= 1e-10);
        let blocks = split_blocks(&l, &n).unwrap();
        for b in &blocks {
            let direct = build_block(&p, spec, b.d);
            prop_assert!((&direct.matrix - &b.matrix).max_abs() <= 1e-14);
            for pair in &b.basis {
                prop_assert_eq!(pair.charge(), b.d);
            }
        }
        for z in eigenvalues(&l.matrix).unwrap() {
            prop_assert!(z.re <= 1e-10);
        }
    }
}
