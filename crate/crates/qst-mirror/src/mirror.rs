//! Mirror and swap composites built from global Hadamard / controlled-phase
//! cycles, and their verification by Pauli conjugation.

use crate::error::{MirrorError, Result};
use crate::program::{apply_in_place, mirror_cycle, path_edges, LocalGate, PulseProgram};
use crate::tableau::{Pauli, Tableau};

/// Where a site's `X` and `Z` end up when both land on one common site.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteAction {
    pub source: usize,
    pub target: usize,
    /// Sign (`true` = negative) and factor of the image of `X`.
    pub x_image: (bool, Pauli),
    pub z_image: (bool, Pauli),
}

impl SiteAction {
    /// The image is the bare transported Pauli (no local correction).
    pub fn is_plain(&self) -> bool {
        self.x_image == (false, Pauli::X) && self.z_image == (false, Pauli::Z)
    }
}

/// Reads the action on `X_q`, `Z_q` for each `q` in `sites`; `None` when an
/// image spreads over several qubits or the two images land apart.
pub fn site_actions(t: &Tableau, sites: &[usize]) -> Vec<Option<SiteAction>> {
    sites
        .iter()
        .map(|&q| {
            let (sx, px) = {
                let r = t.image_x(q);
                (r.negative, r.single_site()?)
            };
            let (sz, pz) = {
                let r = t.image_z(q);
                (r.negative, r.single_site()?)
            };
            (px.0 == pz.0).then_some(SiteAction {
                source: q,
                target: px.0,
                x_image: (sx, px.1),
                z_image: (sz, pz.1),
            })
        })
        .collect()
}

/// Applies `program` to an identity tableau of `n` qubits.
pub fn conjugation_tableau(program: &PulseProgram, n: usize) -> Result<Tableau> {
    let mut t = Tableau::new(n);
    apply_in_place(&mut t, program)?;
    Ok(t)
}

/// Checks that every site in `sites` is sent to `expected(site)` up to a
/// single-qubit Clifford; returns the actions found.
pub fn check_site_map(t: &Tableau, sites: &[usize], expected: impl Fn(usize) -> usize) -> Result<Vec<SiteAction>> {
    site_actions(t, sites)
        .into_iter()
        .zip(sites)
        .map(|(a, &q)| match a {
            Some(a) if a.target == expected(q) => Ok(a),
            Some(a) => Err(MirrorError::Verification(format!(
                "site {q} maps to {} instead of {}",
                a.target,
                expected(q)
            ))),
            None => Err(MirrorError::Verification(format!(
                "site {q} maps to {} / {}",
                t.image_x(q),
                t.image_z(q)
            ))),
        })
        .collect()
}

/// `(H̃ · C̃P)^(n+1)` on a chain of `n` sites `0..n`.
pub fn mirror_program(n: usize) -> Result<PulseProgram> {
    if n == 0 {
        return Err(MirrorError::IndexOutOfRange { index: 0, len: 0 });
    }
    let sites: Vec<usize> = (0..n).collect();
    Ok(mirror_on(n, &sites))
}

/// Mirror cycles on an arbitrary path of sites within `total` qubits.
pub fn mirror_on(total: usize, sites: &[usize]) -> PulseProgram {
    mirror_cycle(total, sites).repeated(sites.len() + 1)
}

/// Conjugates every `X_i`, `Z_i` through the mirror of length `n` and
/// returns the local corrections; errors unless site `i` lands on `n-1-i`.
pub fn verify_mirror(n: usize) -> Result<Vec<SiteAction>> {
    let p = mirror_program(n)?;
    let t = conjugation_tableau(&p, n)?;
    let sites: Vec<usize> = (0..n).collect();
    check_site_map(&t, &sites, |i| n - 1 - i)
}

/// Swap of chain positions `n`, `n+1` (1-based) on a chain of `len` sites
/// whose first site is locally addressable.
pub fn propagated_swap(n: usize, len: usize) -> Result<PulseProgram> {
    let chain: Vec<usize> = (0..len).collect();
    propagated_swap_on(len, &chain, n)
}

/// [`propagated_swap`] on the path `chain` inside a register of `total`
/// qubits; `chain[0]` receives the local pulse. The program is verified by
/// Pauli conjugation before it is returned.
///
/// With `Q = H̃·C̃P`, `k = n − 1`, `U_p = C̃P·X₁·C̃P` and
/// `U = Q_k† U_p Q_k`, the sequence is `H̃ U H̃ X̃ U Z̃ H̃ U H̃` (right to left).
/// The local pulse `X₁` and the global `X̃`, `Z̃` are quarter turns.
pub fn propagated_swap_on(total: usize, chain: &[usize], n: usize) -> Result<PulseProgram> {
    let len = chain.len();
    if n == 0 || n >= len {
        return Err(MirrorError::IndexOutOfRange { index: n, len });
    }
    let edges = path_edges(chain);
    let qk = mirror_cycle(total, chain).repeated(n - 1);
    let mut up = PulseProgram::new(total);
    up.cz(&edges).local(chain[0], LocalGate::SqrtX).cz(&edges);
    let mut u = qk.clone();
    u.then(&up).then(&qk.inverse());

    let mut p = PulseProgram::new(total);
    p.global(LocalGate::H, chain)
        .then(&u)
        .global(LocalGate::H, chain)
        .global(LocalGate::S, chain)
        .then(&u)
        .global(LocalGate::SqrtX, chain)
        .global(LocalGate::H, chain)
        .then(&u)
        .global(LocalGate::H, chain);

    let t = conjugation_tableau(&p, total)?;
    check_site_map(&t, chain, |q| {
        let i = chain.iter().position(|&c| c == q).expect("site on chain");
        match i {
            i if i == n - 1 => chain[n],
            i if i == n => chain[n - 1],
            _ => q,
        }
    })?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_mirror_is_local() {
        let a = verify_mirror(1).unwrap();
        assert_eq!(a[0].target, 0);
    }

    #[test]
    fn mirror_of_four() {
        let t = conjugation_tableau(&mirror_program(4).unwrap(), 4).unwrap();
        assert_eq!(t.image_x(0).single_site().unwrap().0, 3);
        for i in 0..4 {
            assert_eq!(t.image_z(i).single_site().unwrap().0, 3 - i);
        }
    }

    #[test]
    fn small_mirrors_need_no_corrections() {
        for n in 1..=8 {
            assert!(verify_mirror(n).unwrap().iter().all(SiteAction::is_plain), "n = {n}");
        }
    }

    #[test]
    fn propagated_swap_edge_cases() {
        assert!(propagated_swap(1, 2).is_ok());
        assert!(propagated_swap(0, 4).is_err());
        assert!(propagated_swap(4, 4).is_err());
        let p = propagated_swap(1, 4).unwrap();
        let t = conjugation_tableau(&p, 4).unwrap();
        assert_eq!(t.image_x(0).single_site().unwrap().0, 1);
        assert_eq!(t.image_x(2).single_site().unwrap().0, 2);
    }
}
