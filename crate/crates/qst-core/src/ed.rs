//! Exact many-body engine for spin-½ XX networks.
//!
//! Hamiltonians `H = Σ J_ij (σ⁺_i σ⁻_j + h.c.) + Σ h_i n_i` conserve the
//! number of up spins, so they are stored as dense blocks per Hamming-weight
//! sector. Basis states are bitmasks with bit `q` set when qubit `q` is `|↑⟩`.
//!
//! Channel fidelities are evaluated by brute force: every basis configuration
//! of the traced qubits is propagated through a [`ChannelCircuit`] for both
//! input basis states, and the Pauli transfer matrix
//! `T_ij = Tr[σ_i E(σ_j)]` is accumulated exactly. Batches of states are
//! stored transposed (one state per row) so that a sector block acts on a
//! gathered set of contiguous columns with real matrix products.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::chain::{CouplingMap, RangeRule};
use crate::error::{QstError, Result};
use crate::fidelity::DecodeTarget;
use crate::C64;

pub const DEFAULT_QUBIT_CAP: usize = 14;

/// Basis states of one Hamming-weight sector and its dense block.
#[derive(Clone, Debug)]
pub struct Sector {
    pub weight: usize,
    pub states: Vec<u32>,
    pub block: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct SectorHamiltonian {
    n: usize,
    sectors: Vec<Sector>,
    /// Position of every basis state inside its sector.
    position: Vec<u32>,
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Bytes needed to hold every dense sector block of `n` qubits.
pub fn sector_memory_estimate(n: usize) -> u64 {
    (0..=n).map(|w| binomial(n, w).pow(2) * 8).sum()
}

impl SectorHamiltonian {
    pub fn build(j: &CouplingMap, fields: Option<&[f64]>) -> Result<Self> {
        Self::build_with_cap(j, fields, DEFAULT_QUBIT_CAP)
    }

    pub fn build_with_cap(j: &CouplingMap, fields: Option<&[f64]>, cap: usize) -> Result<Self> {
        let n = j.n_sites();
        if n > cap {
            return Err(QstError::Resource {
                what: format!("{n}-qubit sector Hamiltonian"),
                required_bytes: sector_memory_estimate(n),
                cap,
            });
        }
        if let Some(h) = fields {
            if h.len() != n {
                return Err(QstError::InvalidSpec(format!("{} fields for {n} qubits", h.len())));
            }
        }
        let mut states: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
        let mut position = vec![0u32; 1 << n];
        for s in 0..(1u32 << n) {
            let w = s.count_ones() as usize;
            position[s as usize] = states[w].len() as u32;
            states[w].push(s);
        }
        let sectors = states
            .into_iter()
            .enumerate()
            .map(|(weight, st)| {
                let d = st.len();
                let mut block = DMatrix::zeros(d, d);
                for (p, &s) in st.iter().enumerate() {
                    if let Some(h) = fields {
                        block[(p, p)] = (0..n).filter(|&q| s >> q & 1 == 1).map(|q| h[q]).sum();
                    }
                    for &(a, b, v) in j.pairs() {
                        // σ⁺_a σ⁻_b + σ⁺_b σ⁻_a connects states differing by a hop a↔b
                        if (s >> a & 1) != (s >> b & 1) {
                            let t = s ^ (1 << a) ^ (1 << b);
                            block[(position[t as usize] as usize, p)] += v;
                        }
                    }
                }
                Sector { weight, states: st, block }
            })
            .collect();
        Ok(SectorHamiltonian { n, sectors, position })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector_dims(&self) -> Vec<usize> {
        self.sectors.iter().map(|s| s.states.len()).collect()
    }

    pub fn diagonalize(&self) -> SectorSpectrum {
        let blocks: Vec<(Vec<f64>, DMatrix<f64>)> = self
            .sectors
            .par_iter()
            .map(|s| {
                let eig = s.block.clone().symmetric_eigen();
                (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
            })
            .collect();
        SectorSpectrum {
            n: self.n,
            states: self.sectors.iter().map(|s| s.states.clone()).collect(),
            position: self.position.clone(),
            blocks,
        }
    }
}

/// Per-sector eigendecomposition, reusable for any evolution time.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    n: usize,
    states: Vec<Vec<u32>>,
    position: Vec<u32>,
    blocks: Vec<(Vec<f64>, DMatrix<f64>)>,
}

/// `exp(-iHt)` per sector, split into real and imaginary parts.
#[derive(Clone, Debug)]
pub struct SectorUnitaries {
    pub t: f64,
    pub re: Vec<DMatrix<f64>>,
    pub im: Vec<DMatrix<f64>>,
}

impl SectorUnitaries {
    pub fn block(&self, w: usize) -> DMatrix<C64> {
        self.re[w].zip_map(&self.im[w], C64::new)
    }
}

impl SectorSpectrum {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn sector_states(&self, w: usize) -> &[u32] {
        &self.states[w]
    }

    /// Every many-body energy, ascending.
    pub fn energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.blocks.iter().flat_map(|b| b.0.iter().copied()).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn unitary(&self, t: f64) -> SectorUnitaries {
        let (re, im): (Vec<_>, Vec<_>) = self
            .blocks
            .iter()
            .map(|(e, v)| {
                let mut vc = v.clone();
                let mut vs = v.clone();
                for (k, &x) in e.iter().enumerate() {
                    let (s, c) = (x * t).sin_cos();
                    vc.column_mut(k).scale_mut(c);
                    vs.column_mut(k).scale_mut(-s);
                }
                (&vc * v.transpose(), &vs * v.transpose())
            })
            .unzip();
        SectorUnitaries { t, re, im }
    }
}

/// Sector-wise `exp(-iHt)`.
pub fn exact_unitary(h: &SectorHamiltonian, t: f64) -> SectorUnitaries {
    h.diagonalize().unitary(t)
}

/// Evolution of a subset of qubits under a sector Hamiltonian defined on
/// them; the remaining qubits are idle.
#[derive(Clone, Debug)]
pub struct Leg {
    /// Global qubit index of every local qubit of `spectrum`.
    pub sites: Vec<usize>,
    pub spectrum: Arc<SectorSpectrum>,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// NOT on `target` when `control` is `|↑⟩` (`on_up`) or `|↓⟩`.
    Cnot { control: usize, target: usize, on_up: bool },
    PauliZ(usize),
    /// Apply leg number `k` of the circuit.
    Evolve(usize),
}

/// A factor of the traced initial state: a probability distribution over
/// basis configurations of a group of qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct RestGroup {
    pub qubits: Vec<usize>,
    /// `(probability, bits)` with bit `k` of `bits` for `qubits[k]`.
    pub mixture: Vec<(f64, u32)>,
}

impl RestGroup {
    pub fn up(q: usize) -> Self {
        RestGroup { qubits: vec![q], mixture: vec![(1.0, 1)] }
    }

    pub fn down(q: usize) -> Self {
        RestGroup { qubits: vec![q], mixture: vec![(1.0, 0)] }
    }

    pub fn mixed(q: usize) -> Self {
        RestGroup {
            qubits: vec![q],
            mixture: vec![(0.5, 0), (0.5, 1)],
        }
    }

    /// Equal mixture of `|↓↓⟩` and `|↑↑⟩` on a pair.
    pub fn logical_pair(a: usize, b: usize) -> Self {
        RestGroup {
            qubits: vec![a, b],
            mixture: vec![(0.5, 0b00), (0.5, 0b11)],
        }
    }
}

/// A single-qubit channel realised by a circuit on `n` qubits.
#[derive(Clone, Debug)]
pub struct ChannelCircuit {
    pub n: usize,
    pub input: usize,
    pub output: usize,
    pub rest: Vec<RestGroup>,
    pub legs: Vec<Leg>,
    pub steps: Vec<Step>,
    /// Ideal channel is `σᶻ` rather than the identity.
    pub target_z: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelResult {
    pub fidelity: f64,
    /// Fidelity after the best `z` rotation on the output qubit.
    pub fidelity_phase_corrected: f64,
    /// `T[i][j] = Tr[σ_i E(σ_j)]`, `i, j ∈ {x, y, z}`.
    pub pauli_transfer: [[f64; 3]; 3],
}

impl ChannelResult {
    /// Diagonal traces `Tr[σ_i E(σ_i)]`.
    pub fn traces(&self) -> [f64; 3] {
        [self.pauli_transfer[0][0], self.pauli_transfer[1][1], self.pauli_transfer[2][2]]
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Precomputed index maps of a leg on the full register.
struct LegMap {
    active_mask: usize,
    /// Global offsets of each sector's local basis states.
    scatter: Vec<Vec<usize>>,
    /// Global offsets of every idle configuration.
    idle_bases: Vec<usize>,
    unitaries: SectorUnitaries,
}

impl LegMap {
    fn new(leg: &Leg, n: usize) -> Result<Self> {
        let m = leg.spectrum.n_qubits();
        if leg.sites.len() != m || leg.sites.iter().any(|&q| q >= n) {
            return Err(QstError::InvalidSpec("leg sites do not match its Hamiltonian".into()));
        }
        let spread = |local: u32| -> usize {
            leg.sites
                .iter()
                .enumerate()
                .filter(|&(k, _)| local >> k & 1 == 1)
                .fold(0usize, |acc, (_, &q)| acc | 1 << q)
        };
        let active_mask = leg.sites.iter().fold(0usize, |a, &q| a | 1 << q);
        let idle: Vec<usize> = (0..n).filter(|q| active_mask >> q & 1 == 0).collect();
        let idle_bases = (0..1usize << idle.len())
            .map(|x| idle.iter().enumerate().filter(|&(k, _)| x >> k & 1 == 1).fold(0, |a, (_, &q)| a | 1 << q))
            .collect();
        let scatter = (0..=m)
            .map(|w| leg.spectrum.sector_states(w).iter().map(|&s| spread(s)).collect())
            .collect();
        Ok(LegMap {
            active_mask,
            scatter,
            idle_bases,
            unitaries: leg.spectrum.unitary(leg.time),
        })
    }

    /// Sector and in-sector position of the active part of a global index.
    fn locate(&self, leg: &Leg, j: usize) -> (usize, usize) {
        let local = leg
            .sites
            .iter()
            .enumerate()
            .filter(|&(_, &q)| j >> q & 1 == 1)
            .fold(0u32, |a, (k, _)| a | 1 << k);
        (local.count_ones() as usize, leg.spectrum.position[local as usize] as usize)
    }
}

/// A batch of states, one per row.
enum Batch {
    /// Every state is a single basis vector with an amplitude.
    Basis(Vec<(usize, C64)>),
    Dense { re: DMatrix<f64>, im: DMatrix<f64> },
}

impl Batch {
    fn rows(&self) -> usize {
        match self {
            Batch::Basis(v) => v.len(),
            Batch::Dense { re, .. } => re.nrows(),
        }
    }

    fn permute(&mut self, dim: usize, f: impl Fn(usize) -> usize) {
        match self {
            Batch::Basis(v) => v.iter_mut().for_each(|e| e.0 = f(e.0)),
            Batch::Dense { re, im } => {
                let mut nr = re.clone();
                let mut ni = im.clone();
                for j in 0..dim {
                    let k = f(j);
                    nr.set_column(k, &re.column(j));
                    ni.set_column(k, &im.column(j));
                }
                *re = nr;
                *im = ni;
            }
        }
    }

    fn apply_z(&mut self, q: usize) {
        match self {
            Batch::Basis(v) => v.iter_mut().filter(|e| e.0 >> q & 1 == 1).for_each(|e| e.1 = -e.1),
            Batch::Dense { re, im } => {
                for j in 0..re.ncols() {
                    if j >> q & 1 == 1 {
                        re.column_mut(j).neg_mut();
                        im.column_mut(j).neg_mut();
                    }
                }
            }
        }
    }

    fn evolve(self, leg: &Leg, map: &LegMap, dim: usize) -> Batch {
        match self {
            Batch::Basis(v) => {
                let rows = v.len();
                let mut re = DMatrix::zeros(rows, dim);
                let mut im = DMatrix::zeros(rows, dim);
                for (r, &(j, amp)) in v.iter().enumerate() {
                    let (w, p) = map.locate(leg, j);
                    let base = j & !map.active_mask;
                    let (ur, ui) = (&map.unitaries.re[w], &map.unitaries.im[w]);
                    for (q, &off) in map.scatter[w].iter().enumerate() {
                        let u = C64::new(ur[(q, p)], ui[(q, p)]);
                        let z = amp * u;
                        re[(r, base | off)] = z.re;
                        im[(r, base | off)] = z.im;
                    }
                }
                Batch::Dense { re, im }
            }
            Batch::Dense { mut re, mut im } => {
                let rows = re.nrows();
                for (w, offs) in map.scatter.iter().enumerate() {
                    let d = offs.len();
                    let (ur, ui) = (&map.unitaries.re[w], &map.unitaries.im[w]);
                    let mut br = DMatrix::zeros(rows, d);
                    let mut bi = DMatrix::zeros(rows, d);
                    let mut or = DMatrix::zeros(rows, d);
                    let mut oi = DMatrix::zeros(rows, d);
                    for &base in &map.idle_bases {
                        let mut nonzero = false;
                        for (q, &off) in offs.iter().enumerate() {
                            let col = base | off;
                            br.set_column(q, &re.column(col));
                            bi.set_column(q, &im.column(col));
                            nonzero |= br.column(q).iter().chain(bi.column(q).iter()).any(|x| *x != 0.0);
                        }
                        if !nonzero {
                            continue;
                        }
                        // rows are states: ψ'ᵀ = ψᵀ Uᵀ and U is symmetric
                        or.gemm(1.0, &br, ur, 0.0);
                        or.gemm(-1.0, &bi, ui, 1.0);
                        oi.gemm(1.0, &br, ui, 0.0);
                        oi.gemm(1.0, &bi, ur, 1.0);
                        for (q, &off) in offs.iter().enumerate() {
                            let col = base | off;
                            re.set_column(col, &or.column(q));
                            im.set_column(col, &oi.column(q));
                        }
                    }
                }
                Batch::Dense { re, im }
            }
        }
    }

    fn amplitude(&self, r: usize, j: usize) -> C64 {
        match self {
            Batch::Basis(v) => {
                if v[r].0 == j {
                    v[r].1
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            Batch::Dense { re, im } => C64::new(re[(r, j)], im[(r, j)]),
        }
    }
}

/// Fidelity from a Pauli transfer matrix; `target_z` compares with `σᶻ`.
fn fidelities(t: &[[f64; 3]; 3], target_z: bool) -> (f64, f64) {
    let s = if target_z { [-1.0, -1.0, 1.0] } else { [1.0; 3] };
    let f = 0.5 + (s[0] * t[0][0] + s[1] * t[1][1] + s[2] * t[2][2]) / 12.0;
    let rotated = (t[0][0] + t[1][1]).hypot(t[0][1] - t[1][0]);
    (f, 0.5 + (t[2][2] + rotated) / 12.0)
}

fn rest_configurations(c: &ChannelCircuit) -> Vec<(f64, usize)> {
    let mut configs = vec![(1.0, 0usize)];
    for g in &c.rest {
        let mut next = Vec::with_capacity(configs.len() * g.mixture.len());
        for &(w, bits) in &configs {
            for &(p, local) in &g.mixture {
                let spread = g
                    .qubits
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| local >> k & 1 == 1)
                    .fold(0usize, |a, (_, &q)| a | 1 << q);
                next.push((w * p, bits | spread));
            }
        }
        configs = next;
    }
    configs.retain(|c| c.0 != 0.0);
    configs
}

fn validate_circuit(c: &ChannelCircuit) -> Result<()> {
    if c.n > DEFAULT_QUBIT_CAP {
        return Err(QstError::Resource {
            what: format!("{}-qubit channel evaluation", c.n),
            required_bytes: (1u64 << c.n) * 16 * 2 * 1024,
            cap: DEFAULT_QUBIT_CAP,
        });
    }
    let mut seen = vec![false; c.n];
    for q in std::iter::once(c.input).chain(c.rest.iter().flat_map(|g| g.qubits.iter().copied())) {
        if q >= c.n || seen[q] {
            return Err(QstError::InvalidSpec(format!("qubit {q} assigned twice or out of range")));
        }
        seen[q] = true;
    }
    if seen.iter().any(|s| !s) || c.output >= c.n {
        return Err(QstError::InvalidSpec("every qubit needs an initial state".into()));
    }
    for s in &c.steps {
        match *s {
            Step::Cnot { control, target, .. } if control >= c.n || target >= c.n || control == target => {
                return Err(QstError::InvalidSpec("bad CNOT".into()))
            }
            Step::PauliZ(q) if q >= c.n => return Err(QstError::InvalidSpec("bad Z".into())),
            Step::Evolve(k) if k >= c.legs.len() => return Err(QstError::InvalidSpec("unknown leg".into())),
            _ => {}
        }
    }
    Ok(())
}

/// Exact average fidelity of a single-qubit channel over the full basis of
/// the traced qubits.
pub fn channel_fidelity(c: &ChannelCircuit) -> Result<ChannelResult> {
    validate_circuit(c)?;
    let dim = 1usize << c.n;
    let maps: Vec<LegMap> = c.legs.iter().map(|l| LegMap::new(l, c.n)).collect::<Result<_>>()?;
    let configs = rest_configurations(c);
    let threads = rayon::current_num_threads().max(1);
    let per_chunk = ((1usize << 23) / dim / threads / 2).clamp(1, 4096);
    let chunks: Vec<&[(f64, usize)]> = configs.chunks(per_chunk).collect();
    let partial: Vec<[[[C64; 2]; 2]; 3]> = chunks
        .par_iter()
        .map(|chunk| {
            let rows: Vec<(usize, C64)> = chunk
                .iter()
                .flat_map(|&(_, bits)| [(bits, C64::new(1.0, 0.0)), (bits | 1 << c.input, C64::new(1.0, 0.0))])
                .collect();
            let mut batch = Batch::Basis(rows);
            for step in &c.steps {
                match *step {
                    Step::Cnot { control, target, on_up } => {
                        let want = usize::from(on_up);
                        batch.permute(dim, |j| if j >> control & 1 == want { j ^ 1 << target } else { j });
                    }
                    Step::PauliZ(q) => batch.apply_z(q),
                    Step::Evolve(k) => batch = batch.evolve(&c.legs[k], &maps[k], dim),
                }
            }
            debug_assert_eq!(batch.rows(), 2 * chunk.len());
            output_moments(&batch, chunk, c.output, dim)
        })
        .collect();
    // ordered compensated reduction
    let mut acc = [[[(Kahan::default(), Kahan::default()); 2]; 2]; 3];
    for p in &partial {
        for i in 0..3 {
            for a in 0..2 {
                for b in 0..2 {
                    acc[i][a][b].0.add(p[i][a][b].re);
                    acc[i][a][b].1.add(p[i][a][b].im);
                }
            }
        }
    }
    let g = |i: usize, a: usize, b: usize| C64::new(acc[i][a][b].0.sum, acc[i][a][b].1.sum);
    // ⟨a|σ_j|b⟩ with bit 1 = |↑⟩
    let i_ = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let sigma = [
        [[zero, one], [one, zero]],
        [[zero, i_], [-i_, zero]],
        [[-one, zero], [zero, one]],
    ];
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, s) in sigma.iter().enumerate() {
            let mut v = C64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    v += s[a][b] * g(i, a, b);
                }
            }
            row[j] = v.re;
        }
    }
    let (fidelity, fidelity_phase_corrected) = fidelities(&t, c.target_z);
    Ok(ChannelResult {
        fidelity,
        fidelity_phase_corrected,
        pauli_transfer: t,
    })
}

/// `Σ_r w_r ⟨ψ_{b,r}| σ_i |ψ_{a,r}⟩` on the output qubit for one chunk.
fn output_moments(batch: &Batch, chunk: &[(f64, usize)], out: usize, dim: usize) -> [[[C64; 2]; 2]; 3] {
    let zero = C64::new(0.0, 0.0);
    let i_ = C64::new(0.0, 1.0);
    let mut g = [[[zero; 2]; 2]; 3];
    let bit = 1usize << out;
    for (r, &(w, _)) in chunk.iter().enumerate() {
        let rows = [2 * r, 2 * r + 1];
        let support: Vec<usize> = match batch {
            Batch::Basis(v) => {
                let mut s = vec![v[rows[0]].0, v[rows[1]].0, v[rows[0]].0 ^ bit, v[rows[1]].0 ^ bit];
                s.sort_unstable();
                s.dedup();
                s
            }
            Batch::Dense { .. } => (0..dim).collect(),
        };
        let mut local = [[[zero; 2]; 2]; 3];
        for &j in &support {
            let up = j & bit != 0;
            for a in 0..2 {
                let pa = batch.amplitude(rows[a], j);
                let pf = batch.amplitude(rows[a], j ^ bit);
                // (σ ψ_a)[j] for x, y, z
                let sx = pf;
                let sy = if up { -i_ * pf } else { i_ * pf };
                let sz = if up { pa } else { -pa };
                for b in 0..2 {
                    let cb = batch.amplitude(rows[b], j).conj();
                    if cb == zero {
                        continue;
                    }
                    local[0][a][b] += cb * sx;
                    local[1][a][b] += cb * sy;
                    local[2][a][b] += cb * sz;
                }
            }
        }
        for i in 0..3 {
            for a in 0..2 {
                for b in 0..2 {
                    g[i][a][b] += local[i][a][b] * w;
                }
            }
        }
    }
    g
}

/// The paired (two-qubit encoded) transfer protocol.
///
/// Qubits are ordered `{0_a, 0_b, 1..N, (N+1)_b, (N+1)_a}`. The logical
/// basis is `|↓↓⟩, |↑↑⟩`; `0_b` starts in `|↑⟩` and the encoding CNOT flips
/// it when `0_a` is `|↓⟩`. Leg `a` acts on `{0_a, 1..N, (N+1)_a}` and then
/// leg `b` on `{0_b, 1..N, (N+1)_b}`, both with `leg_couplings` over their
/// `N + 2` local sites; the other pair is idle. The decoding CNOT flips the
/// non-target qubit of the receiving pair when the target is `|↓⟩`.
#[derive(Clone, Debug)]
pub struct ProtocolSpec {
    pub n_chain: usize,
    pub leg_couplings: CouplingMap,
    /// On-site energies over the leg sites (`N + 2`), if any.
    pub leg_fields: Option<Vec<f64>>,
    pub t_a: f64,
    pub t_b: f64,
    pub decode: DecodeTarget,
    pub model: Option<RangeRule>,
}

impl ProtocolSpec {
    pub fn new(n_chain: usize, leg_couplings: CouplingMap, t: f64) -> Self {
        ProtocolSpec {
            n_chain,
            leg_couplings,
            leg_fields: None,
            t_a: t,
            t_b: t,
            decode: DecodeTarget::RegisterB,
            model: None,
        }
    }

    pub fn total_qubits(&self) -> usize {
        self.n_chain + 4
    }

    pub fn site_a0(&self) -> usize {
        0
    }
    pub fn site_b0(&self) -> usize {
        1
    }
    pub fn site_bn(&self) -> usize {
        self.n_chain + 2
    }
    pub fn site_an(&self) -> usize {
        self.n_chain + 3
    }

    fn validate(&self) -> Result<()> {
        if self.leg_couplings.n_sites() != self.n_chain + 2 {
            return Err(QstError::InvalidSpec(format!(
                "leg couplings cover {} sites, legs need {}",
                self.leg_couplings.n_sites(),
                self.n_chain + 2
            )));
        }
        if self.total_qubits() > DEFAULT_QUBIT_CAP {
            return Err(QstError::Resource {
                what: format!("{}-qubit paired protocol", self.total_qubits()),
                required_bytes: sector_memory_estimate(self.n_chain + 2) + (1u64 << self.total_qubits()) * 16 * 1024,
                cap: DEFAULT_QUBIT_CAP,
            });
        }
        Ok(())
    }
}

/// Builds the sector spectrum shared by both legs.
pub fn leg_spectrum(protocol: &ProtocolSpec) -> Result<Arc<SectorSpectrum>> {
    protocol.validate()?;
    let h = SectorHamiltonian::build(&protocol.leg_couplings, protocol.leg_fields.as_deref())?;
    Ok(Arc::new(h.diagonalize()))
}

/// Gate/evolution list of the paired protocol: encode, leg a, leg b, decode.
pub fn encoded_protocol_unitary(protocol: &ProtocolSpec) -> Result<ChannelCircuit> {
    let spectrum = leg_spectrum(protocol)?;
    encoded_circuit_with_spectrum(protocol, spectrum)
}

/// As [`encoded_protocol_unitary`] with a precomputed leg spectrum, for
/// scans over evolution times.
pub fn encoded_circuit_with_spectrum(protocol: &ProtocolSpec, spectrum: Arc<SectorSpectrum>) -> Result<ChannelCircuit> {
    protocol.validate()?;
    let n = protocol.n_chain;
    let chain: Vec<usize> = (2..n + 2).collect();
    let (a0, b0, bn, an) = (protocol.site_a0(), protocol.site_b0(), protocol.site_bn(), protocol.site_an());
    let leg_sites = |first: usize, last: usize| {
        let mut s = vec![first];
        s.extend(&chain);
        s.push(last);
        s
    };
    let legs = vec![
        Leg {
            sites: leg_sites(a0, an),
            spectrum: spectrum.clone(),
            time: protocol.t_a,
        },
        Leg {
            sites: leg_sites(b0, bn),
            spectrum,
            time: protocol.t_b,
        },
    ];
    let (decode_step, output) = match protocol.decode {
        DecodeTarget::RegisterB => (
            Step::Cnot {
                control: bn,
                target: an,
                on_up: false,
            },
            bn,
        ),
        DecodeTarget::RegisterA => (
            Step::Cnot {
                control: an,
                target: bn,
                on_up: false,
            },
            an,
        ),
    };
    let mut rest = vec![RestGroup::up(b0)];
    rest.extend(chain.iter().map(|&q| RestGroup::mixed(q)));
    rest.push(RestGroup::logical_pair(bn, an));
    Ok(ChannelCircuit {
        n: protocol.total_qubits(),
        input: a0,
        output,
        rest,
        legs,
        steps: vec![
            Step::Cnot {
                control: a0,
                target: b0,
                on_up: false,
            },
            Step::Evolve(0),
            Step::Evolve(1),
            decode_step,
        ],
        target_z: false,
    })
}

/// Exact channel of the paired protocol, with timing.
#[derive(Clone, Debug)]
pub struct ExactChannelResult {
    pub channel: ChannelResult,
    pub model: Option<RangeRule>,
    pub total_qubits: usize,
    pub wall_time_s: f64,
}

impl ExactChannelResult {
    pub fn fidelity(&self) -> f64 {
        self.channel.fidelity
    }
}

pub fn exact_channel_fidelity(protocol: &ProtocolSpec) -> Result<ExactChannelResult> {
    let start = Instant::now();
    let circuit = encoded_protocol_unitary(protocol)?;
    let channel = channel_fidelity(&circuit)?;
    Ok(ExactChannelResult {
        channel,
        model: protocol.model,
        total_qubits: protocol.total_qubits(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Single-leg circuits on `N + 2` qubits `{0, 1..N, N+1}` for the
/// diagnostic channels.
pub mod diagnostics {
    use super::*;

    fn full_leg(spectrum: Arc<SectorSpectrum>, time: f64) -> Leg {
        Leg {
            sites: (0..spectrum.n_qubits()).collect(),
            spectrum,
            time,
        }
    }

    /// Register 0 evolved for `time` (twice the swap time for the
    /// double-swap), everything else maximally mixed.
    pub fn double_swap(spectrum: Arc<SectorSpectrum>, time: f64) -> ChannelCircuit {
        let n = spectrum.n_qubits();
        ChannelCircuit {
            n,
            input: 0,
            output: 0,
            rest: (1..n).map(RestGroup::mixed).collect(),
            legs: vec![full_leg(spectrum, time)],
            steps: vec![Step::Evolve(0)],
            target_z: false,
        }
    }

    /// Transfer from `N+1` to `0` with sites `0..=N` prepared by `rest`.
    pub fn single_swap(spectrum: Arc<SectorSpectrum>, time: f64, rest: Vec<RestGroup>) -> ChannelCircuit {
        let n = spectrum.n_qubits();
        ChannelCircuit {
            n,
            input: n - 1,
            output: 0,
            rest,
            legs: vec![full_leg(spectrum, time)],
            steps: vec![Step::Evolve(0)],
            target_z: false,
        }
    }

    /// Swap, `σᶻ` on `N+1`, swap back.
    pub fn remote_z(spectrum: Arc<SectorSpectrum>, time: f64) -> ChannelCircuit {
        let n = spectrum.n_qubits();
        ChannelCircuit {
            n,
            input: 0,
            output: 0,
            rest: (1..n).map(RestGroup::mixed).collect(),
            legs: vec![full_leg(spectrum, time)],
            steps: vec![Step::Evolve(0), Step::PauliZ(n - 1), Step::Evolve(0)],
            target_z: true,
        }
    }
}
