//! Dense state-vector simulation, used as an independent oracle for the
//! tableau engine. Qubit `q` is bit `q` of the basis index.

use num_complex::Complex64 as C64;

use crate::error::{MirrorError, Result};
use crate::program::{Gate, LocalGate, PulseProgram};
use crate::tableau::{Pauli, PauliString, Tableau};

pub const DENSE_CAP: usize = 12;

fn matrix(g: LocalGate) -> [[C64; 2]; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    match g {
        LocalGate::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
        LocalGate::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
        LocalGate::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
        LocalGate::H => [[c(r, 0.), c(r, 0.)], [c(r, 0.), c(-r, 0.)]],
        LocalGate::S => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., 1.)]],
        LocalGate::Sdg => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., -1.)]],
        LocalGate::SqrtX => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        LocalGate::SqrtXdg => [[c(0.5, -0.5), c(0.5, 0.5)], [c(0.5, 0.5), c(0.5, -0.5)]],
    }
}

/// A state vector over `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    pub n: usize,
    pub amp: Vec<C64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n > DENSE_CAP {
            return Err(MirrorError::DenseCap { n, cap: DENSE_CAP });
        }
        let mut amp = vec![C64::new(0.0, 0.0); 1 << n];
        amp[index] = C64::new(1.0, 0.0);
        Ok(DenseState { n, amp })
    }

    pub fn apply_gate(&mut self, g: Gate) {
        match g {
            Gate::One(gate, q) => {
                let m = matrix(gate);
                let bit = 1usize << q;
                for i in 0..self.amp.len() {
                    if i & bit == 0 {
                        let (a, b) = (self.amp[i], self.amp[i | bit]);
                        self.amp[i] = m[0][0] * a + m[0][1] * b;
                        self.amp[i | bit] = m[1][0] * a + m[1][1] * b;
                    }
                }
            }
            Gate::Cz(a, b) => {
                let mask = 1usize << a | 1 << b;
                for (i, v) in self.amp.iter_mut().enumerate() {
                    if i & mask == mask {
                        *v = -*v;
                    }
                }
            }
        }
    }

    pub fn apply(&mut self, program: &PulseProgram) -> Result<()> {
        if program.n > self.n {
            return Err(MirrorError::SiteOutOfRange {
                site: program.n - 1,
                n: self.n,
            });
        }
        program.validate()?;
        for g in program.flatten() {
            self.apply_gate(g);
        }
        Ok(())
    }

    pub fn apply_pauli(&self, p: &PauliString) -> DenseState {
        let mut out = self.clone();
        for &(q, op) in &p.ops {
            let g = match op {
                Pauli::I => continue,
                Pauli::X => LocalGate::X,
                Pauli::Y => LocalGate::Y,
                Pauli::Z => LocalGate::Z,
            };
            out.apply_gate(Gate::One(g, q));
        }
        if p.negative {
            out.amp.iter_mut().for_each(|v| *v = -*v);
        }
        out
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, p: &PauliString) -> C64 {
        let pv = self.apply_pauli(p);
        self.amp.iter().zip(&pv.amp).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &DenseState) -> f64 {
        self.amp.iter().zip(&other.amp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Outcome of comparing tableau predictions with the exact unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseReport {
    pub n: usize,
    /// `max |U P − P' U|` over all generators `P ∈ {X_q, Z_q}` with tableau
    /// images `P'`.
    pub max_deviation: f64,
    /// Largest deviation of `U` from the identity.
    pub identity_deviation: f64,
}

/// Builds `U` column by column and checks `U P U† = P'` for every generator.
pub fn dense_unitary_check(program: &PulseProgram, n: usize) -> Result<DenseReport> {
    if n > DENSE_CAP {
        return Err(MirrorError::DenseCap { n, cap: DENSE_CAP });
    }
    let tab = crate::program::clifford_apply(Tableau::new(n), program)?;
    let gates = program.flatten();
    let dim = 1usize << n;
    let columns: Vec<DenseState> = (0..dim)
        .map(|c| {
            let mut s = DenseState::basis(n, c)?;
            gates.iter().for_each(|&g| s.apply_gate(g));
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut identity_deviation: f64 = 0.0;
    for (c, col) in columns.iter().enumerate() {
        for (r, v) in col.amp.iter().enumerate() {
            let want = if r == c { 1.0 } else { 0.0 };
            identity_deviation = identity_deviation.max((v - want).norm());
        }
    }
    let mut max_deviation: f64 = 0.0;
    for q in 0..n {
        for (p, image) in [(Pauli::X, tab.image_x(q)), (Pauli::Z, tab.image_z(q))] {
            let gen = PauliString::single(q, p);
            for c in 0..dim {
                // U P |c⟩ = phase · U |c'⟩
                let pc = DenseState::basis(n, c)?.apply_pauli(&gen);
                let (idx, ph) = pc
                    .amp
                    .iter()
                    .enumerate()
                    .find(|(_, v)| v.norm() > 0.5)
                    .map(|(i, v)| (i, *v))
                    .expect("Pauli maps a basis state to a basis state");
                let lhs: Vec<C64> = columns[idx].amp.iter().map(|v| v * ph).collect();
                let rhs = columns[c].apply_pauli(&image);
                let d = lhs.iter().zip(&rhs.amp).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                max_deviation = max_deviation.max(d);
            }
        }
    }
    Ok(DenseReport {
        n,
        max_deviation,
        identity_deviation,
    })
}
