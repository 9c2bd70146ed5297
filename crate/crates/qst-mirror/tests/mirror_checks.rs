use std::time::Instant;

use proptest::prelude::*;
use qst_mirror::dense::{dense_unitary_check, DenseState};
use qst_mirror::lattice::{directed_swap_programs, q_l_program, route, LatticeMap, Move, Site};
use qst_mirror::mirror::{conjugation_tableau, site_actions, verify_mirror};
use qst_mirror::program::apply_in_place;
use qst_mirror::{clifford_apply, mirror_program, propagated_swap, LocalGate, PulseProgram, Tableau};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GATES: [LocalGate; 8] = [
    LocalGate::X,
    LocalGate::Y,
    LocalGate::Z,
    LocalGate::H,
    LocalGate::S,
    LocalGate::Sdg,
    LocalGate::SqrtX,
    LocalGate::SqrtXdg,
];

fn random_program(n: usize, layers: usize, rng: &mut ChaCha8Rng) -> PulseProgram {
    let mut p = PulseProgram::new(n);
    for _ in 0..layers {
        match rng.random_range(0..3) {
            0 => {
                let sites: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
                p.global(*GATES.choose(rng).unwrap(), &sites);
            }
            1 => {
                let edges: Vec<(usize, usize)> = (0..rng.random_range(1..4))
                    .map(|_| {
                        let a = rng.random_range(0..n);
                        let b = (a + rng.random_range(1..n)) % n;
                        (a, b)
                    })
                    .collect();
                p.cz(&edges);
            }
            _ => {
                p.local(rng.random_range(0..n), *GATES.choose(rng).unwrap());
            }
        }
    }
    p
}

/// Every stabilizer row of the tableau has expectation +1 in the dense state.
fn stabilizers_hold(t: &Tableau, s: &DenseState) -> bool {
    let n = t.n_qubits();
    (n..2 * n).all(|i| (s.expectation(&t.row(i)).re - 1.0).abs() < 1e-10)
}

#[test]
fn tableau_matches_dense_on_random_layers() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let p = random_program(8, 200, &mut rng);
        let t = clifford_apply(Tableau::new(8), &p).unwrap();
        assert!(t.is_valid());
        let mut s = DenseState::zero(8).unwrap();
        s.apply(&p).unwrap();
        assert!(stabilizers_hold(&t, &s));
    }
}

#[test]
fn dense_unitary_check_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let p = random_program(8, 100, &mut rng);
        let r = dense_unitary_check(&p, 8).unwrap();
        assert!(r.max_deviation < 1e-12, "{}", r.max_deviation);
    }
}

#[test]
fn mirror_property_up_to_64_sites() {
    for n in 1..=64 {
        let actions = verify_mirror(n).unwrap();
        for (i, a) in actions.iter().enumerate() {
            assert_eq!(a.target, n - 1 - i);
        }
    }
}

#[test]
fn mirror_dense_up_to_10_sites() {
    for n in 1..=10 {
        let p = mirror_program(n).unwrap();
        let r = dense_unitary_check(&p, n).unwrap();
        assert!(r.max_deviation < 1e-12, "n = {n}: {}", r.max_deviation);
        let t = conjugation_tableau(&p, n).unwrap();
        let acts = site_actions(&t, &(0..n).collect::<Vec<_>>());
        assert!(acts.iter().enumerate().all(|(i, a)| a.unwrap().target == n - 1 - i));
    }
}

#[test]
fn mirror_on_random_stabilizer_states() {
    let n = 10;
    let mirror = mirror_program(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let prep = random_program(n, 60, &mut rng);
        let mut t = Tableau::new(n);
        apply_in_place(&mut t, &prep).unwrap();
        apply_in_place(&mut t, &mirror).unwrap();
        let mut s = DenseState::zero(n).unwrap();
        s.apply(&prep).unwrap();
        s.apply(&mirror).unwrap();
        assert!(stabilizers_hold(&t, &s));
    }
}

#[test]
fn mirror_512_is_fast() {
    let start = Instant::now();
    let actions = verify_mirror(512).unwrap();
    assert_eq!(actions[0].target, 511);
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn propagated_swap_on_16_site_chain() {
    for n in 1..16 {
        let p = propagated_swap(n, 16).unwrap();
        let t = conjugation_tableau(&p, 16).unwrap();
        let acts = site_actions(&t, &(0..16).collect::<Vec<_>>());
        for (i, a) in acts.iter().enumerate() {
            let want = if i == n - 1 {
                n
            } else if i == n {
                n - 1
            } else {
                i
            };
            assert_eq!(a.unwrap().target, want, "pair {n}, site {i}");
        }
        // twice: only single-qubit Cliffords remain
        let mut twice = p.clone();
        twice.then(&p);
        let t2 = conjugation_tableau(&twice, 16).unwrap();
        assert!(site_actions(&t2, &(0..16).collect::<Vec<_>>()).iter().enumerate().all(|(i, a)| a.unwrap().target == i));
    }
}

#[test]
fn propagated_swap_dense_with_corrections() {
    let p = propagated_swap(2, 4).unwrap();
    let r = dense_unitary_check(&p, 4).unwrap();
    assert!(r.max_deviation < 1e-12);
    let t = conjugation_tableau(&p, 4).unwrap();
    let acts = site_actions(&t, &[0, 1, 2, 3]);
    assert_eq!(acts[1].unwrap().target, 2);
    assert_eq!(acts[2].unwrap().target, 1);
    // the transported states: |ψ⟩ on qubit 1 arrives on qubit 2 up to the reported correction
    for a in acts.iter().flatten() {
        assert_ne!(a.x_image.1, a.z_image.1);
    }
}

/// Where each of `sites` ends up after `program`.
fn permutation(program: &PulseProgram, n: usize, sites: &[usize]) -> Vec<usize> {
    let t = conjugation_tableau(program, n).unwrap();
    site_actions(&t, sites).iter().map(|a| a.unwrap().target).collect()
}

#[test]
fn directed_swaps_reach_every_neighbour_pair() {
    // register at column 2: one impurity on the left, two on the right
    let lattice = LatticeMap::parse("R.R..R").unwrap();
    let ds = directed_swap_programs(&lattice, (0, 2)).unwrap();
    assert!(!ds.mirrored_left);
    let n = lattice.n_sites();
    let (a, b, c) = (1usize, 3usize, 4usize);
    assert_eq!(permutation(&ds.q_m, n, &[a, b, c]), vec![b, a, c]);
    assert_eq!(permutation(&ds.q_l, n, &[a, b, c]), vec![a, c, b]);
    // words in Q_M, Q_L place every pair of the three impurities next to the register
    let words: [&[&PulseProgram]; 6] = [
        &[],
        &[&ds.q_m],
        &[&ds.q_l],
        &[&ds.q_m, &ds.q_l],
        &[&ds.q_l, &ds.q_m],
        &[&ds.q_m, &ds.q_l, &ds.q_m],
    ];
    let mut pairs = std::collections::BTreeSet::new();
    let mut perms = std::collections::BTreeSet::new();
    for w in words {
        let mut p = PulseProgram::new(n);
        for q in w {
            p.then(q);
        }
        let img = permutation(&p, n, &[a, b, c]);
        perms.insert(img.clone());
        // which impurity now sits on each side of the register
        let left = [a, b, c][img.iter().position(|&s| s == a).unwrap()];
        let right = [a, b, c][img.iter().position(|&s| s == b).unwrap()];
        pairs.insert((left.min(right), left.max(right)));
    }
    assert_eq!(perms.len(), 6);
    assert_eq!(pairs.len(), 3);
}

#[test]
fn q_l_search_reports_cycle_count() {
    // left chain of 3 mirrors after 4 cycles while a single impurity is untouched
    let lattice = LatticeMap::parse("R...R.R").unwrap();
    let (_, mirrored_left, k) = q_l_program(&lattice, (0, 4)).unwrap();
    assert!(mirrored_left);
    assert_eq!(k, 4);
}

fn holey_lattice() -> LatticeMap {
    let text = "\
R..R..R.
R.#R....
R..R.#.R
R.......
R#.R..R.
R....#R.
R..R..R#
R..#..R.
";
    LatticeMap::parse(text).unwrap()
}

#[test]
fn route_across_holey_lattice() {
    let l = holey_lattice();
    let holes = (0..l.n_sites()).filter(|&q| l.kind(l.site(q)) == qst_mirror::lattice::SiteKind::Hole).count();
    assert!((5..=7).contains(&holes));
    let start = Instant::now();
    for (src, dst) in [((0, 0), (7, 7)), ((7, 0), (0, 7)), ((3, 4), (6, 1))] {
        let plan = route(&l, src, dst).unwrap();
        assert_eq!(plan.path.first(), Some(&src));
        assert_eq!(plan.path.last(), Some(&dst));
        let manhattan = src.0.abs_diff(dst.0) + src.1.abs_diff(dst.1);
        assert!(plan.moves.len() >= manhattan);
        for w in plan.path.windows(2) {
            assert_eq!(w[0].0.abs_diff(w[1].0) + w[0].1.abs_diff(w[1].1), 1);
        }
    }
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn straight_route_uses_in_row_swaps() {
    let l = LatticeMap::parse("R...R\n.....").unwrap();
    let plan = route(&l, (0, 0), (0, 3)).unwrap();
    assert_eq!(plan.moves.len(), 3);
    assert!(plan.moves.iter().all(|m| matches!(m, Move::InRow { row: 0, .. })));
}

#[test]
fn blocked_row_detours_through_next_row() {
    let l = LatticeMap::parse("R.#.R\nR...R").unwrap();
    let plan = route(&l, (0, 1), (0, 3)).unwrap();
    let inter = plan.moves.iter().filter(|m| matches!(m, Move::InterRow { .. })).count();
    assert_eq!(inter, 2);
    assert_eq!(plan.moves.len(), 4);
}

#[test]
fn disconnected_destination_is_an_error() {
    let l = LatticeMap::parse("R.#.R").unwrap();
    assert!(route(&l, (0, 0), (0, 4)).is_err());
    assert!(route(&l, (0, 0), (0, 2)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_programs_keep_tableau_valid(seed in any::<u64>(), n in 2usize..12, layers in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(n, layers, &mut rng);
        let t = clifford_apply(Tableau::new(n), &p).unwrap();
        prop_assert!(t.is_valid());
        let mut back = p.clone();
        back.then(&p.inverse());
        prop_assert_eq!(clifford_apply(Tableau::new(n), &back).unwrap(), Tableau::new(n));
    }

    #[test]
    fn routes_transport_planted_paulis(seed in any::<u64>()) {
        let l = holey_lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let open: Vec<Site> = (0..l.n_sites()).map(|q| l.site(q)).filter(|&s| l.kind(s) != qst_mirror::lattice::SiteKind::Hole).collect();
        let src = *open.choose(&mut rng).unwrap();
        let dst = *open.choose(&mut rng).unwrap();
        // route() itself fails unless X and Z at src arrive as single-site Paulis at dst
        let plan = route(&l, src, dst).unwrap();
        prop_assert_eq!(plan.layers, plan.program.depth());
    }
}
