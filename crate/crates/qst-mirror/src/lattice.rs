//! 2D register/impurity lattices with missing sites, directed swaps around a
//! register, and routing of quantum information along arbitrary paths.
//!
//! Text format: one character per site, one line per row; `R` register,
//! `.` impurity, `#` hole. Blank lines and trailing whitespace are ignored.
//! Site `(row, col)` is qubit `row * cols + col`.

use std::collections::VecDeque;

use crate::error::{MirrorError, Result};
use crate::mirror::{check_site_map, conjugation_tableau, mirror_on, propagated_swap_on, site_actions};
use crate::program::{mirror_cycle, LocalGate, PulseProgram};
use crate::tableau::{Pauli, Tableau};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteKind {
    Register,
    Impurity,
    Hole,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeMap {
    pub rows: usize,
    pub cols: usize,
    kinds: Vec<SiteKind>,
    /// Row and column neighbour distances differ, so intra-row couplings
    /// refocus during inter-row operations.
    pub distinct_spacing: bool,
}

pub type Site = (usize, usize);

impl LatticeMap {
    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
        if lines.is_empty() {
            return Err(MirrorError::Lattice("empty lattice".into()));
        }
        let cols = lines[0].chars().count();
        let mut kinds = Vec::with_capacity(lines.len() * cols);
        for (r, line) in lines.iter().enumerate() {
            if line.chars().count() != cols {
                return Err(MirrorError::Lattice(format!("row {r} has {} sites, expected {cols}", line.chars().count())));
            }
            for (c, ch) in line.chars().enumerate() {
                kinds.push(match ch {
                    'R' => SiteKind::Register,
                    '.' => SiteKind::Impurity,
                    '#' => SiteKind::Hole,
                    other => return Err(MirrorError::Lattice(format!("unknown site '{other}' at ({r}, {c})"))),
                });
            }
        }
        Ok(LatticeMap {
            rows: lines.len(),
            cols,
            kinds,
            distinct_spacing: true,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, (r, c): Site) -> usize {
        r * self.cols + c
    }

    pub fn site(&self, q: usize) -> Site {
        (q / self.cols, q % self.cols)
    }

    pub fn kind(&self, (r, c): Site) -> SiteKind {
        self.kinds[r * self.cols + c]
    }

    pub fn contains(&self, (r, c): Site) -> bool {
        r < self.rows && c < self.cols
    }

    /// Registers are individually addressable; impurities only globally.
    pub fn locally_addressable(&self, s: Site) -> bool {
        self.kind(s) == SiteKind::Register
    }

    /// Non-hole neighbours, in-row first.
    pub fn neighbours(&self, (r, c): Site) -> Vec<Site> {
        let mut out = Vec::with_capacity(4);
        if c > 0 {
            out.push((r, c - 1));
        }
        if c + 1 < self.cols {
            out.push((r, c + 1));
        }
        if self.distinct_spacing {
            if r > 0 {
                out.push((r - 1, c));
            }
            if r + 1 < self.rows {
                out.push((r + 1, c));
            }
        }
        out.retain(|&s| self.kind(s) != SiteKind::Hole);
        out
    }

    /// Impurities running away from `(r, c)` in direction `step` until a
    /// hole, register or the lattice edge.
    fn impurity_run(&self, (r, c): Site, step: isize) -> Vec<Site> {
        let mut out = Vec::new();
        let mut col = c as isize + step;
        while col >= 0 && (col as usize) < self.cols && self.kind((r, col as usize)) == SiteKind::Impurity {
            out.push((r, col as usize));
            col += step;
        }
        out
    }

    /// The contiguous non-hole run of row `r` containing column `c`
    /// includes a register, so in-row propagated swaps are available.
    pub fn run_has_register(&self, (r, c): Site) -> bool {
        let open = |col: usize| self.kind((r, col)) != SiteKind::Hole;
        let mut lo = c;
        while lo > 0 && open(lo - 1) {
            lo -= 1;
        }
        let mut hi = c;
        while hi + 1 < self.cols && open(hi + 1) {
            hi += 1;
        }
        (lo..=hi).any(|col| self.kind((r, col)) == SiteKind::Register)
    }

    fn check_site(&self, s: Site) -> Result<()> {
        if !self.contains(s) {
            return Err(MirrorError::Lattice(format!("site {s:?} outside the {}x{} lattice", self.rows, self.cols)));
        }
        Ok(())
    }
}

/// Three-site mirror `{a, R, b}` plus the asymmetric mirror around a
/// register.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectedSwaps {
    /// Swaps the two impurities adjacent to the register.
    pub q_m: PulseProgram,
    /// Mirrors the impurity chain on one side while the other refocuses.
    pub q_l: PulseProgram,
    pub left: Vec<Site>,
    pub right: Vec<Site>,
    /// Side whose chain is mirrored by `q_l` (`true` = left).
    pub mirrored_left: bool,
    /// Number of `H̃·C̃P` cycles in `q_l`.
    pub cycles: usize,
}

/// `Q_M`: `(H̃·C̃P)⁴` on the three-site path `a — R — b`.
pub fn q_m_program(lattice: &LatticeMap, register: Site) -> Result<PulseProgram> {
    let (left, right) = register_chains(lattice, register)?;
    let (a, b) = match (left.first(), right.first()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => {
            return Err(MirrorError::AsymmetryUnavailable(format!(
                "register {register:?} needs impurities on both sides"
            )))
        }
    };
    let path = [lattice.index(a), lattice.index(register), lattice.index(b)];
    let p = mirror_on(lattice.n_sites(), &path);
    let t = conjugation_tableau(&p, lattice.n_sites())?;
    check_site_map(&t, &path, |q| {
        if q == path[0] {
            path[2]
        } else if q == path[2] {
            path[0]
        } else {
            q
        }
    })?;
    Ok(p)
}

fn register_chains(lattice: &LatticeMap, register: Site) -> Result<(Vec<Site>, Vec<Site>)> {
    lattice.check_site(register)?;
    if lattice.kind(register) != SiteKind::Register {
        return Err(MirrorError::Lattice(format!("{register:?} is not a register")));
    }
    Ok((lattice.impurity_run(register, -1), lattice.impurity_run(register, 1)))
}

/// `Q_L`: the smallest number of `H̃·C̃P` cycles, applied to both impurity
/// chains with the register as an unpulsed boundary, after which one chain
/// is mirrored and the other is back to its sites up to local Cliffords.
pub fn q_l_program(lattice: &LatticeMap, register: Site) -> Result<(PulseProgram, bool, usize)> {
    let (left, right) = register_chains(lattice, register)?;
    if left.is_empty() || right.is_empty() {
        return Err(MirrorError::AsymmetryUnavailable(format!(
            "register {register:?} has a hole or edge on one side"
        )));
    }
    if left.len() == right.len() {
        return Err(MirrorError::AsymmetryUnavailable(format!(
            "chains around {register:?} both have {} impurities",
            left.len()
        )));
    }
    let n = lattice.n_sites();
    let l: Vec<usize> = left.iter().map(|&s| lattice.index(s)).collect();
    let r: Vec<usize> = right.iter().map(|&s| lattice.index(s)).collect();
    let mut cycle = mirror_cycle(n, &l);
    cycle.then(&mirror_cycle(n, &r));
    let mut t = Tableau::new(n);
    let limit = 4 * (l.len() + 1) * (r.len() + 1);
    let mirrored = |t: &Tableau, c: &[usize]| {
        c.len() >= 2
            && site_actions(t, c)
                .iter()
                .enumerate()
                .all(|(i, a)| a.is_some_and(|a| a.target == c[c.len() - 1 - i]))
    };
    let local = |t: &Tableau, c: &[usize]| site_actions(t, c).iter().zip(c).all(|(a, &q)| a.is_some_and(|a| a.target == q));
    for k in 1..=limit {
        crate::program::apply_in_place(&mut t, &cycle)?;
        for (m, other, is_left) in [(&l, &r, true), (&r, &l, false)] {
            if mirrored(&t, m) && local(&t, other) {
                return Ok((cycle.repeated(k), is_left, k));
            }
        }
    }
    Err(MirrorError::AsymmetryUnavailable(format!(
        "no cycle count up to {limit} mirrors one chain ({} / {} impurities) while refocusing the other",
        l.len(),
        r.len()
    )))
}

pub fn directed_swap_programs(lattice: &LatticeMap, register: Site) -> Result<DirectedSwaps> {
    let q_m = q_m_program(lattice, register)?;
    let (q_l, mirrored_left, cycles) = q_l_program(lattice, register)?;
    let (left, right) = register_chains(lattice, register)?;
    Ok(DirectedSwaps {
        q_m,
        q_l,
        left,
        right,
        mirrored_left,
        cycles,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Move {
    /// Propagated swap of two horizontally adjacent sites.
    InRow { row: usize, from: usize, to: usize },
    /// Swap of two vertically adjacent sites in the same column.
    InterRow { col: usize, from: usize, to: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoutePlan {
    pub path: Vec<Site>,
    pub moves: Vec<Move>,
    pub program: PulseProgram,
    /// Pulse layers of the compiled program.
    pub layers: usize,
}

/// Shortest path from `src` to `dst` (breadth first, in-row neighbours
/// explored first; in-row steps only in runs holding a register) compiled
/// into swaps, then verified by transporting `X`
/// and `Z` planted at `src`.
pub fn route(lattice: &LatticeMap, src: Site, dst: Site) -> Result<RoutePlan> {
    for s in [src, dst] {
        lattice.check_site(s)?;
        if lattice.kind(s) == SiteKind::Hole {
            return Err(MirrorError::NoRoute(format!("{s:?} is a hole")));
        }
    }
    let n = lattice.n_sites();
    if src == dst {
        return Ok(RoutePlan {
            path: vec![src],
            moves: vec![],
            program: PulseProgram::new(n),
            layers: 0,
        });
    }
    let path = bfs(lattice, src, dst).ok_or_else(|| MirrorError::NoRoute(format!("{dst:?} unreachable from {src:?}")))?;
    let mut program = PulseProgram::new(n);
    let mut moves = Vec::with_capacity(path.len() - 1);
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.0 == b.0 {
            moves.push(Move::InRow {
                row: a.0,
                from: a.1,
                to: b.1,
            });
            program.then(&in_row_swap(lattice, a, b)?);
        } else {
            moves.push(Move::InterRow {
                col: a.1,
                from: a.0,
                to: b.0,
            });
            program.then(&inter_row_swap(n, lattice.index(a), lattice.index(b)));
        }
    }
    let t = conjugation_tableau(&program, n)?;
    let (qs, qd) = (lattice.index(src), lattice.index(dst));
    for p in [Pauli::X, Pauli::Z] {
        let img = t.image(qs, p);
        if img.single_site().map(|s| s.0) != Some(qd) {
            return Err(MirrorError::Verification(format!("{}{qs} arrives as {img}", p.symbol())));
        }
    }
    let layers = program.depth();
    Ok(RoutePlan {
        path,
        moves,
        program,
        layers,
    })
}

fn bfs(lattice: &LatticeMap, src: Site, dst: Site) -> Option<Vec<Site>> {
    let mut prev: Vec<Option<Site>> = vec![None; lattice.n_sites()];
    let mut seen = vec![false; lattice.n_sites()];
    let mut queue = VecDeque::from([src]);
    seen[lattice.index(src)] = true;
    while let Some(s) = queue.pop_front() {
        if s == dst {
            let mut path = vec![dst];
            let mut cur = dst;
            while let Some(p) = prev[lattice.index(cur)] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for nb in lattice.neighbours(s) {
            if nb.0 == s.0 && !lattice.run_has_register(s) {
                continue;
            }
            let i = lattice.index(nb);
            if !seen[i] {
                seen[i] = true;
                prev[i] = Some(s);
                queue.push_back(nb);
            }
        }
    }
    None
}

/// Propagated swap of `a`, `b` in one row, using the nearest register of
/// their contiguous run as the addressable boundary.
fn in_row_swap(lattice: &LatticeMap, a: Site, b: Site) -> Result<PulseProgram> {
    let row = a.0;
    let (lo, hi) = (a.1.min(b.1), a.1.max(b.1));
    let open = |c: usize| lattice.kind((row, c)) != SiteKind::Hole;
    let mut start = lo;
    while start > 0 && open(start - 1) {
        start -= 1;
    }
    let mut end = hi;
    while end + 1 < lattice.cols && open(end + 1) {
        end += 1;
    }
    let boundary = (start..=end)
        .filter(|&c| lattice.locally_addressable((row, c)))
        .min_by_key(|&c| if c <= lo { lo - c } else { c - hi })
        .ok_or_else(|| MirrorError::NoRoute(format!("row {row} columns {start}..={end} have no register boundary")))?;
    let cols: Vec<usize> = if boundary <= lo {
        (boundary..=hi).collect()
    } else {
        (lo..=boundary).rev().collect()
    };
    let chain: Vec<usize> = cols.iter().map(|&c| lattice.index((row, c))).collect();
    // 1-based index of the first site of the pair along the chain
    let first = if boundary <= lo {
        lo - boundary + 1
    } else {
        boundary - hi + 1
    };
    propagated_swap_on(lattice.n_sites(), &chain, first)
}

/// `SWAP = CNOT·CNOT·CNOT` with each CNOT written as `H CZ H`.
pub fn inter_row_swap(n: usize, a: usize, b: usize) -> PulseProgram {
    let mut p = PulseProgram::new(n);
    for target in [b, a, b] {
        p.local(target, LocalGate::H).cz(&[(a, b)]).local(target, LocalGate::H);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_neighbours() {
        let l = LatticeMap::parse("R.#\n..R\n").unwrap();
        assert_eq!((l.rows, l.cols), (2, 3));
        assert_eq!(l.kind((0, 2)), SiteKind::Hole);
        assert_eq!(l.neighbours((0, 1)), vec![(0, 0), (1, 1)]);
        assert!(LatticeMap::parse("R.\n.").is_err());
        assert!(LatticeMap::parse("Rx").is_err());
    }

    #[test]
    fn inter_row_swap_is_plain_swap() {
        let t = conjugation_tableau(&inter_row_swap(2, 0, 1), 2).unwrap();
        let acts = site_actions(&t, &[0, 1]);
        assert_eq!(acts[0].unwrap().target, 1);
        assert!(acts.iter().all(|a| a.unwrap().is_plain()));
    }

    #[test]
    fn q_l_rejects_symmetric_and_one_sided() {
        let sym = LatticeMap::parse("R..R..R").unwrap();
        assert!(matches!(q_l_program(&sym, (0, 3)), Err(MirrorError::AsymmetryUnavailable(_))));
        let hole = LatticeMap::parse("R#R..R").unwrap();
        assert!(matches!(q_l_program(&hole, (0, 2)), Err(MirrorError::AsymmetryUnavailable(_))));
        assert!(q_m_program(&hole, (0, 2)).is_err());
    }

    #[test]
    fn same_site_route_is_empty() {
        let l = LatticeMap::parse("R..").unwrap();
        let p = route(&l, (0, 1), (0, 1)).unwrap();
        assert!(p.moves.is_empty());
        assert_eq!(p.layers, 0);
    }
}
