//! Pulse programs: time-ordered layers of global and local Clifford pulses.

use crate::error::{MirrorError, Result};
use crate::tableau::Tableau;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalGate {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    /// Quarter turn about x, `√X = H S H`.
    SqrtX,
    SqrtXdg,
}

impl LocalGate {
    pub fn inverse(self) -> LocalGate {
        match self {
            LocalGate::S => LocalGate::Sdg,
            LocalGate::Sdg => LocalGate::S,
            LocalGate::SqrtX => LocalGate::SqrtXdg,
            LocalGate::SqrtXdg => LocalGate::SqrtX,
            g => g,
        }
    }

    pub fn apply(self, t: &mut Tableau, q: usize) -> Result<()> {
        match self {
            LocalGate::X => t.x(q),
            LocalGate::Y => t.y(q),
            LocalGate::Z => t.z(q),
            LocalGate::H => t.h(q),
            LocalGate::S => t.s(q),
            LocalGate::Sdg => t.sdg(q),
            LocalGate::SqrtX => t.sqrt_x(q),
            LocalGate::SqrtXdg => t.sqrt_x_dg(q),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Layer {
    /// The same single-qubit pulse on every listed site.
    Global { gate: LocalGate, sites: Vec<usize> },
    /// Controlled phase on every listed edge.
    GlobalCz { edges: Vec<(usize, usize)> },
    Local { site: usize, gate: LocalGate },
    Repeat { block: Vec<Layer>, count: usize },
}

impl Layer {
    fn inverse(&self) -> Layer {
        match self {
            Layer::Global { gate, sites } => Layer::Global {
                gate: gate.inverse(),
                sites: sites.clone(),
            },
            Layer::GlobalCz { edges } => Layer::GlobalCz { edges: edges.clone() },
            Layer::Local { site, gate } => Layer::Local {
                site: *site,
                gate: gate.inverse(),
            },
            Layer::Repeat { block, count } => Layer::Repeat {
                block: block.iter().rev().map(Layer::inverse).collect(),
                count: *count,
            },
        }
    }

    fn depth(&self) -> usize {
        match self {
            Layer::Repeat { block, count } => count * block.iter().map(Layer::depth).sum::<usize>(),
            _ => 1,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let site = |s: usize| {
            if s < n {
                Ok(())
            } else {
                Err(MirrorError::SiteOutOfRange { site: s, n })
            }
        };
        match self {
            Layer::Global { sites, .. } => sites.iter().try_for_each(|&s| site(s)),
            Layer::GlobalCz { edges } => edges.iter().try_for_each(|&(a, b)| {
                site(a)?;
                site(b)?;
                if a == b {
                    return Err(MirrorError::InvalidGate(format!("CZ edge ({a}, {b})")));
                }
                Ok(())
            }),
            Layer::Local { site: s, .. } => site(*s),
            Layer::Repeat { block, .. } => block.iter().try_for_each(|l| l.validate(n)),
        }
    }

    fn apply(&self, t: &mut Tableau) -> Result<()> {
        match self {
            Layer::Global { gate, sites } => sites.iter().try_for_each(|&q| gate.apply(t, q)),
            Layer::GlobalCz { edges } => edges.iter().try_for_each(|&(a, b)| t.cz(a, b)),
            Layer::Local { site, gate } => gate.apply(t, *site),
            Layer::Repeat { block, count } => {
                for _ in 0..*count {
                    block.iter().try_for_each(|l| l.apply(t))?;
                }
                Ok(())
            }
        }
    }
}

/// Ordered layers on `n` qubits; the first layer acts first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PulseProgram {
    pub n: usize,
    pub layers: Vec<Layer>,
}

impl PulseProgram {
    pub fn new(n: usize) -> Self {
        PulseProgram { n, layers: Vec::new() }
    }

    pub fn push(&mut self, layer: Layer) -> &mut Self {
        self.layers.push(layer);
        self
    }

    pub fn global(&mut self, gate: LocalGate, sites: &[usize]) -> &mut Self {
        self.push(Layer::Global {
            gate,
            sites: sites.to_vec(),
        })
    }

    pub fn cz(&mut self, edges: &[(usize, usize)]) -> &mut Self {
        self.push(Layer::GlobalCz { edges: edges.to_vec() })
    }

    pub fn local(&mut self, site: usize, gate: LocalGate) -> &mut Self {
        self.push(Layer::Local { site, gate })
    }

    /// Appends `other` (which then acts after `self`).
    pub fn then(&mut self, other: &PulseProgram) -> &mut Self {
        self.n = self.n.max(other.n);
        self.layers.extend(other.layers.iter().cloned());
        self
    }

    pub fn repeated(&self, count: usize) -> PulseProgram {
        PulseProgram {
            n: self.n,
            layers: vec![Layer::Repeat {
                block: self.layers.clone(),
                count,
            }],
        }
    }

    pub fn inverse(&self) -> PulseProgram {
        PulseProgram {
            n: self.n,
            layers: self.layers.iter().rev().map(Layer::inverse).collect(),
        }
    }

    /// Number of pulse layers after expanding repeats.
    pub fn depth(&self) -> usize {
        self.layers.iter().map(Layer::depth).sum()
    }

    pub fn validate(&self) -> Result<()> {
        self.layers.iter().try_for_each(|l| l.validate(self.n))
    }

    /// Every elementary gate in time order, repeats expanded.
    pub fn flatten(&self) -> Vec<Gate> {
        fn walk(layers: &[Layer], out: &mut Vec<Gate>) {
            for l in layers {
                match l {
                    Layer::Global { gate, sites } => out.extend(sites.iter().map(|&q| Gate::One(*gate, q))),
                    Layer::GlobalCz { edges } => out.extend(edges.iter().map(|&(a, b)| Gate::Cz(a, b))),
                    Layer::Local { site, gate } => out.push(Gate::One(*gate, *site)),
                    Layer::Repeat { block, count } => {
                        for _ in 0..*count {
                            walk(block, out);
                        }
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.layers, &mut out);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    One(LocalGate, usize),
    Cz(usize, usize),
}

/// Conjugates every row of `state` by the program.
pub fn clifford_apply(mut state: Tableau, program: &PulseProgram) -> Result<Tableau> {
    apply_in_place(&mut state, program)?;
    Ok(state)
}

pub fn apply_in_place(state: &mut Tableau, program: &PulseProgram) -> Result<()> {
    if program.n > state.n_qubits() {
        return Err(MirrorError::SiteOutOfRange {
            site: program.n - 1,
            n: state.n_qubits(),
        });
    }
    program.validate()?;
    program.layers.iter().try_for_each(|l| l.apply(state))
}

/// Path edges `(s_0, s_1), (s_1, s_2), …`.
pub fn path_edges(sites: &[usize]) -> Vec<(usize, usize)> {
    sites.windows(2).map(|w| (w[0], w[1])).collect()
}

/// One mirror cycle `Q = H̃ · C̃P` on a path: controlled phases along the
/// path, then Hadamards on every site.
pub fn mirror_cycle(n: usize, sites: &[usize]) -> PulseProgram {
    let mut p = PulseProgram::new(n);
    p.cz(&path_edges(sites)).global(LocalGate::H, sites);
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_program_is_identity() {
        let t = clifford_apply(Tableau::new(4), &PulseProgram::new(4)).unwrap();
        assert_eq!(t, Tableau::new(4));
    }

    #[test]
    fn double_x_is_identity() {
        let mut p = PulseProgram::new(2);
        p.local(1, LocalGate::X).local(1, LocalGate::X);
        assert_eq!(clifford_apply(Tableau::new(2), &p).unwrap(), Tableau::new(2));
    }

    #[test]
    fn inverse_undoes_program() {
        let mut p = PulseProgram::new(3);
        p.cz(&[(0, 1), (1, 2)])
            .global(LocalGate::SqrtX, &[0, 1, 2])
            .local(2, LocalGate::S)
            .push(Layer::Repeat {
                block: mirror_cycle(3, &[0, 1, 2]).layers,
                count: 2,
            });
        let mut q = p.clone();
        q.then(&p.inverse());
        assert_eq!(clifford_apply(Tableau::new(3), &q).unwrap(), Tableau::new(3));
        assert_eq!(p.depth(), 3 + 4);
    }

    #[test]
    fn out_of_range_sites_rejected() {
        let mut p = PulseProgram::new(2);
        p.local(2, LocalGate::H);
        assert!(matches!(
            clifford_apply(Tableau::new(2), &p),
            Err(MirrorError::SiteOutOfRange { site: 2, n: 2 })
        ));
        let mut p = PulseProgram::new(2);
        p.cz(&[(1, 1)]);
        assert!(p.validate().is_err());
    }
}
