//! Property tests over random chains.

use std::sync::Arc;

use proptest::prelude::*;
use qst_core::chain::{sample_positions, CouplingMap, DisorderSpec};
use qst_core::dynamics::{eigenmodes, participation_ratio, propagator, ResonantModeChoice};
use qst_core::ed::{channel_fidelity, diagnostics, SectorHamiltonian, Step};
use qst_core::fidelity::{
    error_budget, f_double_swap, f_encoded, f_remote_z, f_single_swap, optimal_coupling, EncodedVariant,
};

fn chain(bonds: &[f64]) -> CouplingMap {
    let mut m = CouplingMap::new(bonds.len() + 1);
    for (i, &v) in bonds.iter().enumerate() {
        m.set(i, i + 1, v);
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagator_is_unitary_and_symmetric(bonds in prop::collection::vec(0.05f64..2.0, 2..20), t in 0.0f64..200.0) {
        let m = propagator(&chain(&bonds).to_matrix(), t).unwrap();
        prop_assert!(m.unitarity_error() < 1e-10);
        prop_assert!(m.symmetry_error() < 1e-10);
    }

    #[test]
    fn fidelities_lie_in_unit_interval(bonds in prop::collection::vec(0.05f64..2.0, 2..20), t in 0.0f64..200.0, parity in -1.0f64..1.0) {
        let m = propagator(&chain(&bonds).to_matrix(), t).unwrap();
        let strong = f_encoded(&m, EncodedVariant::Strong);
        let weak = f_encoded(&m, EncodedVariant::Weak);
        for f in [f_double_swap(&m), f_single_swap(&m, parity), weak, strong, f_remote_z(&m).unwrap()] {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f), "{f}");
        }
        prop_assert!(strong >= weak - 1e-12);
        prop_assert!(f_single_swap(&m, 0.0) <= 2.0 / 3.0 + 1e-12);
    }

    #[test]
    fn optimal_coupling_minimizes_budget(bonds in prop::collection::vec(0.5f64..1.5, 6..14), t1 in 1e3f64..1e7) {
        let modes = eigenmodes(&chain(&bonds).to_matrix()).unwrap();
        let n = modes.len();
        let z = n / 2;
        prop_assume!(modes.psi_left(z).abs() > 1e-3 && modes.psi_right(z).abs() > 1e-3);
        let (gl, _) = optimal_coupling(&modes, z, n, t1).unwrap();
        let eps = |g: f64| error_budget(&modes, &ResonantModeChoice::matched(&modes, z, g).unwrap(), n, t1).unwrap().total;
        let best = eps(gl);
        for i in 0..100 {
            let g = gl * 10f64.powf(-1.0 + 2.0 * i as f64 / 99.0);
            prop_assert!(best <= eps(g) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn participation_ratio_is_bounded(bonds in prop::collection::vec(0.05f64..2.0, 1..30)) {
        let modes = eigenmodes(&chain(&bonds).to_matrix()).unwrap();
        for k in 0..modes.len() {
            let pr = participation_ratio(&modes.mode(k));
            prop_assert!(pr >= 1.0 - 1e-9 && pr <= modes.len() as f64 + 1e-9);
        }
    }

    #[test]
    fn sampled_gaps_respect_floor(seed in any::<u64>(), stream in 0u64..1000, sigma in 0.0f64..8.0) {
        let spec = DisorderSpec::new(10.0, sigma, seed);
        let r = sample_positions(&spec, 20, stream);
        prop_assert!(r.gaps().iter().all(|&g| g >= 0.2 * 10.0));
        prop_assert_eq!(r.positions.clone(), sample_positions(&spec, 20, stream).positions);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The traced chain is maximally mixed, so a z flip on any chain site
    /// before the evolution leaves the channel unchanged.
    #[test]
    fn traced_sites_admit_rebasing(bonds in prop::collection::vec(0.1f64..1.5, 3..6), t in 0.0f64..20.0, flips in prop::collection::vec(any::<bool>(), 5)) {
        let map = chain(&bonds);
        let sp = Arc::new(SectorHamiltonian::build(&map, None).unwrap().diagonalize());
        let base = channel_fidelity(&diagnostics::double_swap(sp.clone(), t)).unwrap();
        let mut c = diagnostics::double_swap(sp, t);
        let sites: Vec<usize> = (1..c.n).filter(|&q| flips[q - 1]).collect();
        c.steps = sites.iter().map(|&q| Step::PauliZ(q)).chain([Step::Evolve(0)]).collect();
        let flipped = channel_fidelity(&c).unwrap();
        prop_assert!((base.fidelity - flipped.fidelity).abs() < 1e-12);
        for i in 0..3 {
            prop_assert!(flipped.pauli_transfer[i][i].abs() <= 2.0 + 1e-12);
        }
    }

    #[test]
    fn sector_unitaries_stay_unitary(bonds in prop::collection::vec(0.1f64..1.5, 2..7), t in 0.0f64..50.0) {
        let sp = SectorHamiltonian::build(&chain(&bonds), None).unwrap().diagonalize();
        let u = sp.unitary(t);
        for w in 0..=bonds.len() + 1 {
            let b = u.block(w);
            let d = b.adjoint() * &b;
            for i in 0..d.nrows() {
                for j in 0..d.ncols() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((d[(i, j)].re - want).abs() < 1e-12 && d[(i, j)].im.abs() < 1e-12);
                }
            }
        }
    }
}
