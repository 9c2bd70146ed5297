//! Mirror, propagated-swap and lattice-routing checks by Pauli conjugation,
//! with dense-unitary cross-checks on small registers.

use std::collections::BTreeSet;

use qst_mirror::dense::{dense_unitary_check, DENSE_CAP};
use qst_mirror::lattice::{route, LatticeMap};
use qst_mirror::mirror::{conjugation_tableau, mirror_program, propagated_swap, site_actions, verify_mirror, SiteAction};
use qst_mirror::{MirrorError, Pauli};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::table::{Cell, Outcome, ResultTable};

/// `X→X',Z→Z'` with signs, e.g. `X→-Z,Z→X`.
pub fn correction_label(a: &SiteAction) -> String {
    let part = |(neg, p): (bool, Pauli)| format!("{}{}", if neg { "-" } else { "" }, p.symbol());
    format!("X->{},Z->{}", part(a.x_image), part(a.z_image))
}

fn labels<'a>(actions: impl IntoIterator<Item = &'a SiteAction>) -> String {
    actions.into_iter().map(correction_label).collect::<BTreeSet<_>>().into_iter().collect::<Vec<_>>().join(" ")
}

/// Expected image of chain site `i` under the swap of 1-based pair `n`.
fn swapped(i: usize, n: usize) -> usize {
    match i {
        _ if i + 1 == n => n,
        _ if i == n => n - 1,
        _ => i,
    }
}

pub fn run_mirror_verify(config: &ExperimentConfig) -> Result<Outcome> {
    let m = &config.mirror;
    let mut mirrors = ResultTable::new(
        "mirror",
        &["sites", "verified", "plain_sites", "corrections", "layers", "dense_checked", "dense_max_deviation"],
    );
    for &n in &m.sizes {
        let actions = verify_mirror(n)?;
        let program = mirror_program(n)?;
        let plain = actions.iter().filter(|a| a.is_plain()).count();
        let dense = if n <= m.dense_max.min(DENSE_CAP) {
            Some(dense_unitary_check(&program, n)?.max_deviation)
        } else {
            None
        };
        mirrors.push(vec![
            n.into(),
            true.into(),
            plain.into(),
            labels(&actions).into(),
            program.depth().into(),
            dense.is_some().into(),
            dense.into(),
        ]);
    }

    let len = m.swap_chain;
    let sites: Vec<usize> = (0..len).collect();
    let mut swaps = ResultTable::new(
        "swap",
        &["chain", "pair", "sites_permuted", "twice_identity_map", "corrections_a", "corrections_b", "layers", "dense_max_deviation"],
    );
    for n in 1..len {
        let p = propagated_swap(n, len)?;
        let acts = site_actions(&conjugation_tableau(&p, len)?, &sites);
        let permuted = acts.iter().enumerate().all(|(i, a)| a.is_some_and(|a| a.target == swapped(i, n)));
        let mut twice = p.clone();
        twice.then(&p);
        let back = site_actions(&conjugation_tableau(&twice, len)?, &sites)
            .iter()
            .enumerate()
            .all(|(i, a)| a.is_some_and(|a| a.target == i));
        let dense = if len <= m.dense_max.min(DENSE_CAP) {
            Some(dense_unitary_check(&p, len)?.max_deviation)
        } else {
            None
        };
        swaps.push(vec![
            len.into(),
            n.into(),
            permuted.into(),
            back.into(),
            acts[n - 1].as_ref().map(correction_label).into(),
            acts[n].as_ref().map(correction_label).into(),
            p.depth().into(),
            dense.into(),
        ]);
    }
    // small register with a dense check regardless of the chain length
    let p = propagated_swap(2, 4)?;
    let acts = site_actions(&conjugation_tableau(&p, 4)?, &[0, 1, 2, 3]);
    swaps.push(vec![
        4usize.into(),
        2usize.into(),
        acts.iter().enumerate().all(|(i, a)| a.is_some_and(|a| a.target == swapped(i, 2))).into(),
        Cell::Empty,
        acts[1].as_ref().map(correction_label).into(),
        acts[2].as_ref().map(correction_label).into(),
        p.depth().into(),
        dense_unitary_check(&p, 4)?.max_deviation.into(),
    ]);

    let mut lattice = LatticeMap::parse(&config.lattice_text()?)?;
    lattice.distinct_spacing = m.distinct_spacing;
    let mut routes = ResultTable::new(
        "routes",
        &["src_row", "src_col", "dst_row", "dst_col", "status", "moves", "in_row", "inter_row", "layers", "x_arrives", "z_arrives", "error"],
    );
    let mut failures = 0;
    for &[[sr, sc], [dr, dc]] in &m.routes {
        let mut row: Vec<Cell> = vec![sr.into(), sc.into(), dr.into(), dc.into()];
        match route(&lattice, (sr, sc), (dr, dc)) {
            Ok(plan) => {
                let t = conjugation_tableau(&plan.program, lattice.n_sites())?;
                let (qs, qd) = (lattice.index((sr, sc)), lattice.index((dr, dc)));
                let arrives = |p: Pauli| t.image(qs, p).single_site().map(|s| s.0) == Some(qd);
                let in_row = plan.moves.iter().filter(|m| matches!(m, qst_mirror::lattice::Move::InRow { .. })).count();
                row.extend([
                    "ok".into(),
                    plan.moves.len().into(),
                    in_row.into(),
                    (plan.moves.len() - in_row).into(),
                    plan.layers.into(),
                    arrives(Pauli::X).into(),
                    arrives(Pauli::Z).into(),
                    Cell::Empty,
                ]);
            }
            Err(e @ (MirrorError::NoRoute(_) | MirrorError::SiteOutOfRange { .. })) => {
                failures += 1;
                row.extend(["error".into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, e.to_string().into()]);
            }
            Err(e) => return Err(e.into()),
        }
        routes.push(row);
    }

    Ok(Outcome {
        tables: vec![mirrors, swaps, routes],
        notes: vec![
            "corrections: single-qubit Clifford left on the transported qubit, as images of X and Z".into(),
            format!("dense unitary checks up to {} qubits", m.dense_max.min(DENSE_CAP)),
            format!(
                "lattice {}x{}; inter-row neighbours {}",
                lattice.rows,
                lattice.cols,
                if m.distinct_spacing { "couple vertically" } else { "disabled" }
            ),
        ],
        summary: json!({ "route_failures": failures }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_verifies_everything() {
        let mut c = ExperimentConfig::default();
        c.mirror.sizes = vec![1, 2, 5, 8, 64];
        let o = run_mirror_verify(&c).unwrap();
        let mirror = o.table("mirror").unwrap();
        assert_eq!(mirror.rows.len(), 5);
        assert!(mirror.floats("dense_max_deviation").iter().all(|d| *d < 1e-10));
        let swap = o.table("swap").unwrap();
        let col = swap.column("sites_permuted").unwrap();
        assert!(swap.rows.iter().all(|r| r[col] == Cell::Bool(true)));
        let routes = o.table("routes").unwrap();
        let status = routes.column("status").unwrap();
        assert!(routes.rows.iter().all(|r| r[status] == Cell::from("ok")));
    }

    #[test]
    fn unreachable_route_is_reported_not_fatal() {
        let mut c = ExperimentConfig::default();
        c.mirror.sizes = vec![2];
        c.mirror.lattice = Some("R.#.\nR.#R\n".into());
        c.mirror.routes = vec![[[0, 0], [0, 3]], [[0, 0], [1, 1]]];
        let o = run_mirror_verify(&c).unwrap();
        let routes = o.table("routes").unwrap();
        let status = routes.column("status").unwrap();
        assert_eq!(routes.rows[0][status], Cell::from("error"));
        assert_eq!(routes.rows[1][status], Cell::from("ok"));
        assert_eq!(o.summary["route_failures"], 1);
    }

    #[test]
    fn swapped_index_map() {
        assert_eq!((0..4).map(|i| swapped(i, 2)).collect::<Vec<_>>(), vec![0, 2, 1, 3]);
    }
}
