//! Quadratic dynamics: eigenmodes, propagators and the resonant-mode picture.
//!
//! Every quadratic Hamiltonian handled here is real symmetric, so a single
//! symmetric eigendecomposition `K = V E Vᵀ` gives `M(t) = V e^{-iEt} Vᵀ`
//! for any number of times. `M` is then complex symmetric as well as unitary.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::chain::{build_bdg_matrix, ChainSpec, ModelKind};
use crate::error::{QstError, Result};
use crate::fidelity;
use crate::C64;

/// Energy gaps below this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
/// End amplitudes below this cannot carry a transfer.
pub const END_AMPLITUDE_TOL: f64 = 1e-12;

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(QstError::MalformedInput(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
    }
    for i in 0..m.nrows() {
        for j in 0..i {
            if m[(i, j)] != m[(j, i)] {
                return Err(QstError::MalformedInput(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Ascending eigen-decomposition with each eigenvector's largest-magnitude
/// component made positive (first such index on ties).
fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vecs = DMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (c, &k) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        let top = col.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let lead = col.iter().position(|x| x.abs() >= top * (1.0 - 1e-12)).unwrap_or(0);
        let s = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        vecs.set_column(c, &(col * s));
        vals.push(eig.eigenvalues[k]);
    }
    (vals, vecs)
}

/// Eigenmodes of a chain: energies ascending, mode `k` in column `k`.
#[derive(Clone, Debug)]
pub struct EigenmodeSet {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenmodeSet {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `ψ_{k,L}`: amplitude of mode `k` on the first chain site.
    pub fn psi_left(&self, k: usize) -> f64 {
        self.vectors[(0, k)]
    }

    /// `ψ_{k,R}`: amplitude of mode `k` on the last chain site.
    pub fn psi_right(&self, k: usize) -> f64 {
        self.vectors[(self.len() - 1, k)]
    }

    pub fn mode(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }

    /// Smallest distance from `ε_k` to any other energy.
    pub fn isolation(&self, k: usize) -> f64 {
        self.energies
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, e)| (e - self.energies[k]).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn eigenmodes(chain_matrix: &DMatrix<f64>) -> Result<EigenmodeSet> {
    check_symmetric(chain_matrix)?;
    let (energies, vectors) = sorted_eigen(chain_matrix);
    Ok(EigenmodeSet { energies, vectors })
}

/// Eigenmodes of the chain block of a spec (registers removed).
pub fn chain_eigenmodes(spec: &ChainSpec) -> Result<EigenmodeSet> {
    eigenmodes(&crate::chain::chain_matrix(spec)?)
}

/// `M = exp(-iKt)` together with its time.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub m: DMatrix<C64>,
    pub t: f64,
}

impl Propagator {
    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    /// Index of the right register, `N+1`.
    pub fn last(&self) -> usize {
        self.dim() - 1
    }

    pub fn unitarity_error(&self) -> f64 {
        let d = self.m.adjoint() * &self.m - DMatrix::<C64>::identity(self.dim(), self.dim());
        d.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn symmetry_error(&self) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..self.dim() {
            for j in 0..i {
                e = e.max((self.m[(i, j)] - self.m[(j, i)]).norm());
            }
        }
        e
    }
}

/// One decomposition of `K`, reused for any number of evolution times.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl SpectralPropagator {
    pub fn new(k: &DMatrix<f64>) -> Result<Self> {
        check_symmetric(k)?;
        let eig = SymmetricEigen::new(k.clone());
        Ok(SpectralPropagator {
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn at(&self, t: f64) -> Propagator {
        let v = &self.vectors;
        let mut vc = v.clone();
        let mut vs = v.clone();
        for (k, &e) in self.energies.iter().enumerate() {
            let (s, c) = (e * t).sin_cos();
            vc.column_mut(k).scale_mut(c);
            vs.column_mut(k).scale_mut(-s);
        }
        let re = &vc * v.transpose();
        let im = &vs * v.transpose();
        let m = re.zip_map(&im, C64::new);
        Propagator { m, t }
    }
}

pub fn propagator(k: &DMatrix<f64>, t: f64) -> Result<Propagator> {
    if !t.is_finite() {
        return Err(QstError::MalformedInput("evolution time must be finite".into()));
    }
    Ok(SpectralPropagator::new(k)?.at(t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModeStrategy {
    /// Use mode index `z` (0-based, ascending energy).
    Fixed(usize),
    /// Minimize the off-resonant plus decoherence budget over every usable
    /// mode. With finite `t1` each mode gets its optimal coupling (capped by
    /// the supplied maximum); with `t1 = ∞` every mode uses the maximum.
    MinErrorBudget { t1: f64 },
}

/// Selected transfer mode with matched register couplings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonantModeChoice {
    pub z: usize,
    pub g_left: f64,
    pub g_right: f64,
    /// `t_z = g_L|ψ_{z,L}| = g_R|ψ_{z,R}|`.
    pub t_z: f64,
    /// `τ = π / (√2 t_z)`.
    pub tau: f64,
}

impl ResonantModeChoice {
    /// Couples the registers to mode `z` with `g_left` and derives `g_right`
    /// from the matching condition.
    pub fn matched(modes: &EigenmodeSet, z: usize, g_left: f64) -> Result<Self> {
        check_transfer_mode(modes, z)?;
        let (l, r) = (modes.psi_left(z).abs(), modes.psi_right(z).abs());
        let t_z = g_left * l;
        Ok(ResonantModeChoice {
            z,
            g_left,
            g_right: t_z / r,
            t_z,
            tau: transfer_time(t_z),
        })
    }
}

pub fn transfer_time(t_z: f64) -> f64 {
    std::f64::consts::PI / (std::f64::consts::SQRT_2 * t_z)
}

fn check_transfer_mode(modes: &EigenmodeSet, z: usize) -> Result<()> {
    if z >= modes.len() {
        return Err(QstError::NoTransferringMode(format!("mode {z} out of range for {} modes", modes.len())));
    }
    let (l, r) = (modes.psi_left(z).abs(), modes.psi_right(z).abs());
    if l < END_AMPLITUDE_TOL || r < END_AMPLITUDE_TOL {
        return Err(QstError::NoTransferringMode(format!(
            "mode {z} has end amplitudes ({l:.3e}, {r:.3e})"
        )));
    }
    if modes.len() > 1 && modes.isolation(z) < DEGENERACY_TOL {
        return Err(QstError::DegenerateSpectrum(format!("mode {z} is degenerate with a neighbour")));
    }
    Ok(())
}

pub fn select_resonant_mode(modes: &EigenmodeSet, g_left_max: f64, strategy: ModeStrategy) -> Result<ResonantModeChoice> {
    match strategy {
        ModeStrategy::Fixed(z) => ResonantModeChoice::matched(modes, z, g_left_max),
        ModeStrategy::MinErrorBudget { t1 } => {
            let n = modes.len();
            let mut best: Option<(f64, f64, ResonantModeChoice)> = None;
            for z in 0..n {
                if check_transfer_mode(modes, z).is_err() {
                    continue;
                }
                let g = if t1.is_finite() {
                    fidelity::optimal_coupling(modes, z, n, t1)?.0.min(g_left_max)
                } else {
                    g_left_max
                };
                let choice = ResonantModeChoice::matched(modes, z, g)?;
                let eps = fidelity::error_budget(modes, &choice, n, t1)?.total;
                let energy = modes.energies[z].abs();
                let better = match &best {
                    None => true,
                    Some((be, bz, _)) => eps < *be || (eps == *be && energy < *bz),
                };
                if better {
                    best = Some((eps, energy, choice));
                }
            }
            best.map(|b| b.2)
                .ok_or_else(|| QstError::NoTransferringMode("every mode has a vanishing end amplitude or is degenerate".into()))
        }
    }
}

/// `N_PR = 1 / Σ|ψ_i|⁴`.
pub fn participation_ratio(psi: &[f64]) -> f64 {
    1.0 / psi.iter().map(|x| x.powi(4)).sum::<f64>()
}

/// Orthogonal BdG diagonalization with rows `2k`, `2k+1` holding the
/// coefficients of `d_k`, `d_k†` on `φ = (c, c†)`; `O A Oᵀ = diag(ε_0, -ε_0, ε_1, -ε_1, …)`.
#[derive(Clone, Debug)]
pub struct BdGDiagonalization {
    pub o: DMatrix<f64>,
    /// Non-negative quasi-particle energies, ascending.
    pub energies: Vec<f64>,
}

impl BdGDiagonalization {
    pub fn modes(&self) -> usize {
        self.energies.len()
    }

    /// The interleaved diagonal `(ε_0, -ε_0, ε_1, -ε_1, …)`.
    pub fn lambda(&self) -> Vec<f64> {
        self.energies.iter().flat_map(|&e| [e, -e]).collect()
    }

    /// Coefficient of `c_j + c_j†` in `d_k`, the amplitude through which a
    /// register attached at site `j` tunnels into mode `k`.
    pub fn end_amplitude(&self, k: usize, j: usize) -> f64 {
        let m = self.modes();
        self.o[(2 * k, j)] + self.o[(2 * k, m + j)]
    }
}

/// Swaps the particle and hole halves of a BdG vector.
fn particle_hole(w: &DVector<f64>) -> DVector<f64> {
    let m = w.len() / 2;
    DVector::from_fn(2 * m, |i, _| w[(i + m) % (2 * m)])
}

pub fn bdg_diagonalize(a: &DMatrix<f64>) -> Result<BdGDiagonalization> {
    check_symmetric(a)?;
    if a.nrows() % 2 != 0 {
        return Err(QstError::MalformedInput("BdG matrix must have even dimension".into()));
    }
    let m = a.nrows() / 2;
    let (vals, vecs) = sorted_eigen(a);
    let scale = vals.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    for i in 0..m {
        if (vals[i] + vals[2 * m - 1 - i]).abs() > 1e-8 * scale {
            return Err(QstError::MalformedInput(format!(
                "spectrum not symmetric: {} vs {}",
                vals[i],
                vals[2 * m - 1 - i]
            )));
        }
    }
    // Near-zero pairs (Majorana end modes) are nearly degenerate, so the
    // solver's vectors mix ±ε. Rebuild that subspace from its particle-hole
    // even and odd halves and pair them through the SVD of the even→odd
    // block of A: d = (e + o)/√2 with eᵀ A o = ε ≥ 0.
    let near_tol = 1e-4 * scale;
    let mut rows: Vec<(f64, DVector<f64>)> = Vec::with_capacity(m);
    let near: Vec<usize> = (0..2 * m).filter(|&i| vals[i].abs() < near_tol).collect();
    if !near.is_empty() {
        let mut even: Vec<DVector<f64>> = Vec::new();
        let mut odd: Vec<DVector<f64>> = Vec::new();
        for &i in &near {
            let w = vecs.column(i).into_owned();
            let ph = particle_hole(&w);
            for (set, cand) in [(&mut even, &w + &ph), (&mut odd, &w - &ph)] {
                let mut c = cand;
                for _ in 0..2 {
                    for b in set.iter() {
                        let p = b.dot(&c);
                        c -= b * p;
                    }
                }
                let norm = c.norm();
                if norm > 1e-6 {
                    set.push(c / norm);
                }
            }
        }
        if even.len() != odd.len() || 2 * even.len() != near.len() {
            return Err(QstError::MalformedInput("near-zero subspace is not particle-hole closed".into()));
        }
        let e = DMatrix::from_columns(&even);
        let od = DMatrix::from_columns(&odd);
        let block = e.transpose() * a * &od;
        let svd = block.svd(true, true);
        let (u, vt) = match (svd.u, svd.v_t) {
            (Some(u), Some(vt)) => (u, vt),
            _ => return Err(QstError::MalformedInput("SVD of the near-zero block failed".into())),
        };
        for k in 0..even.len() {
            let ek = &e * u.column(k);
            let ok = &od * vt.row(k).transpose();
            rows.push((svd.singular_values[k], (ek + ok) / std::f64::consts::SQRT_2));
        }
    }
    for i in m..2 * m {
        if vals[i].abs() >= near_tol {
            rows.push((vals[i], vecs.column(i).into_owned()));
        }
    }
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut o = DMatrix::zeros(2 * m, 2 * m);
    let mut energies = Vec::with_capacity(m);
    for (k, (e, w)) in rows.iter().enumerate() {
        o.set_row(2 * k, &w.transpose());
        o.set_row(2 * k + 1, &particle_hole(w).transpose());
        energies.push(*e);
    }
    let err = (&o * o.transpose() - DMatrix::<f64>::identity(2 * m, 2 * m)).amax();
    if err > 1e-10 {
        return Err(QstError::MalformedInput(format!("BdG transformation not orthogonal ({err:.2e})")));
    }
    Ok(BdGDiagonalization { o, energies })
}

/// Outcome of evolving the full register–chain–register BdG dynamics for
/// the three-mode swap time.
#[derive(Clone, Debug)]
pub struct SwapCheck {
    pub mode: usize,
    pub mode_energy: f64,
    pub tunneling: f64,
    pub tau: f64,
    /// Coefficients of `(c_0, c_0†)` (columns) in `(c_{N+1}(τ), c_{N+1}†(τ))` (rows).
    pub exchange_block: [[C64; 2]; 2],
    /// Largest modulus in the exchange block.
    pub exchange_amplitude: f64,
    /// Weight of `c_0(τ)` outside the registers and the resonant mode.
    pub leakage: f64,
}

/// Tunes both registers to `ε_z`, couples them with `g_left`, `g_right` and
/// evolves for `τ = π/(√2 g_L |u + v|)` (or for `time` when given), where
/// `u + v` is the weight of `c_1 + c_1†` in `d_z`.
pub fn bdg_effective_swap_check(spec: &ChainSpec, z: usize, time: Option<f64>) -> Result<SwapCheck> {
    if spec.model != ModelKind::Tfim {
        return Err(QstError::InvalidSpec("swap check needs an Ising chain".into()));
    }
    let n = spec.n;
    let chain = bdg_diagonalize(&build_bdg_matrix(spec, false)?)?;
    if z >= chain.modes() {
        return Err(QstError::NoTransferringMode(format!("mode {z} out of range")));
    }
    let eps = chain.energies[z];
    let tunneling = spec.g_left * chain.end_amplitude(z, 0).abs();
    let tau = time.unwrap_or_else(|| transfer_time(tunneling));
    let mut tuned = spec.clone();
    tuned.register_field = eps;
    let a = build_bdg_matrix(&tuned, true)?;
    let mm = n + 2;
    let (c0, cn, c0d, cnd) = (0, n + 1, mm, mm + n + 1);
    if !tau.is_finite() {
        return Ok(SwapCheck {
            mode: z,
            mode_energy: eps,
            tunneling,
            tau,
            exchange_block: [[C64::new(0.0, 0.0); 2]; 2],
            exchange_amplitude: 0.0,
            leakage: 0.0,
        });
    }
    // Heisenberg evolution φ(t) = exp(-2iAt) φ
    let w = SpectralPropagator::new(&a)?.at(2.0 * tau).m;
    let exchange_block = [[w[(cn, c0)], w[(cn, c0d)]], [w[(cnd, c0)], w[(cnd, c0d)]]];
    let exchange_amplitude = exchange_block.iter().flatten().fold(0.0f64, |a, x| a.max(x.norm()));
    // target subspace: register operators plus d_z, d_z† embedded in the full basis
    let mut targets: Vec<DVector<f64>> = [c0, cn, c0d, cnd]
        .iter()
        .map(|&i| {
            let mut v = DVector::zeros(2 * mm);
            v[i] = 1.0;
            v
        })
        .collect();
    for row in [2 * z, 2 * z + 1] {
        let mut v = DVector::zeros(2 * mm);
        for j in 0..n {
            v[1 + j] = chain.o[(row, j)];
            v[mm + 1 + j] = chain.o[(row, n + j)];
        }
        targets.push(v);
    }
    let traj = w.row(c0);
    let kept: f64 = targets
        .iter()
        .map(|t| traj.iter().zip(t.iter()).map(|(a, &b)| a * b).sum::<C64>().norm_sqr())
        .sum();
    let total: f64 = traj.iter().map(|x| x.norm_sqr()).sum();
    Ok(SwapCheck {
        mode: z,
        mode_energy: eps,
        tunneling,
        tau,
        exchange_block,
        exchange_amplitude,
        leakage: (total - kept).max(0.0),
    })
}

/// Oscillator-chain transfer figures of merit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BosonicTransfer {
    /// `M_{N+1,0}`; an ideal swap gives `-1`.
    pub amplitude: C64,
    /// `ε = 1 - |M_{N+1,0}|²`.
    pub epsilon: f64,
    /// `⟨n_ε⟩`, the `M`-weighted mean occupation of the leaked modes.
    pub leaked_occupation: f64,
    /// Occupation of the target register after transfer.
    pub n_out: f64,
}

/// `occupations[i-1]` is the thermal occupation of mode `i` for `i = 1..=N+1`
/// (chain sites and the target register), all except the source.
pub fn bosonic_swap_and_thermal_error(m: &Propagator, n_source: f64, occupations: &[f64]) -> Result<BosonicTransfer> {
    let last = m.last();
    if occupations.len() != last {
        return Err(QstError::MalformedInput(format!(
            "{} occupations for {} non-source modes",
            occupations.len(),
            last
        )));
    }
    let amplitude = m.get(last, 0);
    let epsilon = (1.0 - amplitude.norm_sqr()).max(0.0);
    let leaked: f64 = (1..=last).map(|i| m.get(last, i).norm_sqr() * occupations[i - 1]).sum();
    let leaked_occupation = if epsilon > 0.0 { leaked / epsilon } else { 0.0 };
    Ok(BosonicTransfer {
        amplitude,
        epsilon,
        leaked_occupation,
        n_out: (1.0 - epsilon) * n_source + epsilon * leaked_occupation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_single_particle_matrix, chain_matrix, CouplingPattern};
    use std::f64::consts::PI;

    fn uniform_chain(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 })
    }

    #[test]
    fn uniform_three_site_energies() {
        let modes = eigenmodes(&uniform_chain(3)).unwrap();
        let s2 = 2f64.sqrt();
        for (e, x) in modes.energies.iter().zip([-s2, 0.0, s2]) {
            assert!((e - x).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_modes_are_sines() {
        let n = 9;
        let modes = eigenmodes(&uniform_chain(n)).unwrap();
        let norm = (2.0 / (n as f64 + 1.0)).sqrt();
        for k in 0..n {
            // ascending energy 2cos(qπ/(N+1)) means q = N - k
            let q = (n - k) as f64;
            let v = modes.mode(k);
            let s: Vec<f64> = (1..=n).map(|i| norm * (i as f64 * q * PI / (n as f64 + 1.0)).sin()).collect();
            let sign = if v.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            for (a, b) in v.iter().zip(&s) {
                assert!((a - sign * b).abs() < 1e-10);
            }
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_convention_largest_positive() {
        let modes = eigenmodes(&uniform_chain(6)).unwrap();
        for k in 0..6 {
            let v = modes.mode(k);
            let top = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let lead = v.iter().position(|x| x.abs() >= top * (1.0 - 1e-12)).unwrap();
            assert!(v[lead] > 0.0);
        }
    }

    #[test]
    fn identity_at_zero_time() {
        let k = build_single_particle_matrix(&ChainSpec::uniform(ModelKind::Xx, 5, 1.0, 0.3)).unwrap();
        let p = propagator(&k, 0.0).unwrap();
        assert!((p.m.clone() - DMatrix::<C64>::identity(7, 7)).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn engineered_revival() {
        for n in [4, 9, 20, 51] {
            let h = (n as f64 + 1.0) / 2.0;
            let k = build_single_particle_matrix(&ChainSpec::engineered(n, h)).unwrap();
            let p = propagator(&k, 2.0 * PI).unwrap();
            let dev = (p.m - DMatrix::<C64>::identity(n + 2, n + 2)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
            assert!(dev < 1e-10, "N = {n}: {dev}");
        }
    }

    #[test]
    fn odd_uniform_picks_zero_mode() {
        let n = 11;
        let g = 0.02;
        let modes = eigenmodes(&uniform_chain(n)).unwrap();
        let z = (n - 1) / 2;
        assert!(modes.energies[z].abs() < 1e-12);
        let choice = select_resonant_mode(&modes, g, ModeStrategy::Fixed(z)).unwrap();
        let expected = ((n + 1) as f64).sqrt() * PI / (2.0 * g);
        assert!((choice.tau - expected).abs() < 1e-9 * expected);
        assert!((choice.g_left - choice.g_right).abs() < 1e-14);
        assert!((choice.t_z - choice.g_right * modes.psi_right(z).abs()).abs() < 1e-12);
    }

    #[test]
    fn vanishing_end_amplitude_rejected() {
        let modes = EigenmodeSet {
            energies: vec![-1.0, 1.0],
            vectors: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
        };
        assert!(matches!(
            select_resonant_mode(&modes, 0.1, ModeStrategy::Fixed(0)),
            Err(QstError::NoTransferringMode(_))
        ));
        assert!(select_resonant_mode(&modes, 0.1, ModeStrategy::MinErrorBudget { t1: f64::INFINITY }).is_err());
    }

    #[test]
    fn degenerate_candidate_refused() {
        let modes = EigenmodeSet {
            energies: vec![0.5, 0.5],
            vectors: DMatrix::from_row_slice(2, 2, &[0.6, 0.8, 0.8, -0.6]),
        };
        assert!(matches!(
            select_resonant_mode(&modes, 0.1, ModeStrategy::Fixed(0)),
            Err(QstError::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn participation_ratio_limits() {
        assert_eq!(participation_ratio(&[0.0, 1.0, 0.0]), 1.0);
        let u = vec![0.5; 4];
        assert!((participation_ratio(&u) - 4.0).abs() < 1e-14);
        let modes = eigenmodes(&uniform_chain(11)).unwrap();
        // every mode except the one at q = (N+1)/2 is generic
        for k in [0, 1, 2, 3, 4, 6, 7, 8, 9, 10] {
            assert!((participation_ratio(&modes.mode(k)) - 8.0).abs() < 1e-8);
        }
    }

    fn tfim(n: usize, b: f64, g: f64) -> ChainSpec {
        ChainSpec::uniform(ModelKind::Tfim, n, 1.0, g).with_fields(b, 0.0)
    }

    /// Roots of `B sin((N+1)q) = κ sin(Nq)` on `(0, π)` by bisection.
    fn quantized_energies(n: usize, b: f64) -> Vec<f64> {
        let f = |q: f64| b * ((n + 1) as f64 * q).sin() - (n as f64 * q).sin();
        let steps = 20_000;
        let mut roots = Vec::new();
        for s in 0..steps {
            let (mut lo, mut hi) = (PI * s as f64 / steps as f64 + 1e-9, PI * (s + 1) as f64 / steps as f64 - 1e-9);
            if f(lo) * f(hi) < 0.0 {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(lo) * f(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        let mut e: Vec<f64> = roots.iter().map(|q| (1.0 + b * b - 2.0 * b * q.cos()).sqrt()).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn bdg_spectrum_matches_open_chain_quantization() {
        let n = 8;
        let b = 2.0;
        let d = bdg_diagonalize(&build_bdg_matrix(&tfim(n, b, 0.0), false).unwrap()).unwrap();
        let exact = quantized_energies(n, b);
        assert_eq!(exact.len(), n);
        for (a, e) in d.energies.iter().zip(&exact) {
            assert!((a - e).abs() < 1e-10, "{a} vs {e}");
        }
    }

    #[test]
    fn bdg_zero_field_has_exact_zero_mode() {
        let d = bdg_diagonalize(&build_bdg_matrix(&tfim(8, 0.0, 0.0), false).unwrap()).unwrap();
        assert!(d.energies[0].abs() < 1e-12);
        assert!(d.energies[1..].iter().all(|e| (e - 1.0).abs() < 1e-10));
        let a = build_bdg_matrix(&tfim(8, 0.0, 0.0), false).unwrap();
        let lam = &d.o * a * d.o.transpose();
        let want = DMatrix::from_diagonal(&DVector::from_vec(d.lambda()));
        assert!((lam - want).amax() < 1e-10);
    }

    #[test]
    fn bdg_diagonalizes_with_interleaved_layout() {
        let a = build_bdg_matrix(&tfim(7, 1.7, 0.0), false).unwrap();
        let d = bdg_diagonalize(&a).unwrap();
        let lam = &d.o * &a * d.o.transpose();
        let want = DMatrix::from_diagonal(&DVector::from_vec(d.lambda()));
        assert!((lam - want).amax() < 1e-10);
    }

    #[test]
    fn bdg_uniform_end_amplitudes_mirror() {
        let d = bdg_diagonalize(&build_bdg_matrix(&tfim(7, 2.0, 0.0), false).unwrap()).unwrap();
        for k in 0..7 {
            // reflection maps u_j to ±u_{m-1-j} and v_j to ∓v_{m-1-j}
            assert!((d.o[(2 * k, 0)].abs() - d.o[(2 * k, 6)].abs()).abs() < 1e-10);
            assert!((d.o[(2 * k, 7)].abs() - d.o[(2 * k, 13)].abs()).abs() < 1e-10);
        }
    }

    #[test]
    fn bdg_split_majorana_pair_is_orthogonal() {
        let (n, b) = (20, 0.5);
        let a = build_bdg_matrix(&tfim(n, b, 0.0), false).unwrap();
        let d = bdg_diagonalize(&a).unwrap();
        let lam = &d.o * &a * d.o.transpose();
        let want = DMatrix::from_diagonal(&DVector::from_vec(d.lambda()));
        assert!((lam - want).amax() < 1e-10);
        assert!(d.energies[0] > 0.0 && d.energies[0] < 1e-5, "{}", d.energies[0]);
        // bulk modes: the n - 1 real roots of the quantisation condition
        let bulk = quantized_energies(n, b);
        assert_eq!(bulk.len(), n - 1);
        for (x, e) in d.energies[1..].iter().zip(&bulk) {
            assert!((x - e).abs() < 1e-10, "{x} vs {e}");
        }
    }

    #[test]
    fn majorana_mode_does_not_transfer() {
        let spec = tfim(20, 0.5, 0.02);
        let chk = bdg_effective_swap_check(&spec, 0, None).unwrap();
        assert!(chk.exchange_amplitude < 1e-3, "{}", chk.exchange_amplitude);
    }

    #[test]
    fn asymmetric_spectrum_rejected() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        assert!(matches!(bdg_diagonalize(&a), Err(QstError::MalformedInput(_))));
    }

    #[test]
    fn weak_coupling_swap_is_near_ideal() {
        let spec = tfim(7, 2.0, 0.02);
        for z in 0..7 {
            let chk = bdg_effective_swap_check(&spec, z, None).unwrap();
            assert!(chk.exchange_amplitude > 0.99, "mode {z}: {}", chk.exchange_amplitude);
            assert!(chk.leakage < 2e-2, "mode {z}: {}", chk.leakage);
        }
    }

    #[test]
    fn uncoupled_registers_stay_put() {
        let spec = tfim(7, 2.0, 0.0);
        let chk = bdg_effective_swap_check(&spec, 3, Some(50.0)).unwrap();
        assert!(chk.exchange_amplitude < 1e-14);
    }

    #[test]
    fn zero_field_bdg_reproduces_xx_amplitudes() {
        // Without the pairing block (J only on hopping) the BdG particle block
        // is K/2, so exp(-2iAt) restricted to particles equals exp(-iKt).
        let n = 5;
        let spec = ChainSpec::uniform(ModelKind::Xx, n, 1.0, 0.3).with_fields(0.4, 0.1);
        let k = build_single_particle_matrix(&spec).unwrap();
        let mut a = DMatrix::zeros(2 * (n + 2), 2 * (n + 2));
        a.view_mut((0, 0), (n + 2, n + 2)).copy_from(&(&k * 0.5));
        a.view_mut((n + 2, n + 2), (n + 2, n + 2)).copy_from(&(&k * -0.5));
        let t = 3.7;
        let w = propagator(&a, 2.0 * t).unwrap();
        let m = propagator(&k, t).unwrap();
        for i in 0..n + 2 {
            for j in 0..n + 2 {
                assert!((w.get(i, j) - m.get(i, j)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn mirror_pattern_end_amplitudes_match() {
        let mut spec = ChainSpec::uniform(ModelKind::Xx, 6, 1.0, 0.1);
        spec.pattern = CouplingPattern::Explicit(vec![0.7, 1.2, 0.4, 1.2, 0.7]);
        let modes = eigenmodes(&chain_matrix(&spec).unwrap()).unwrap();
        for k in 0..6 {
            assert!((modes.psi_left(k).abs() - modes.psi_right(k).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn bosonic_zero_temperature_limit() {
        let n = 9;
        let spec = ChainSpec::uniform(ModelKind::Bosonic, n, 1.0, 0.01);
        let modes = chain_eigenmodes(&spec).unwrap();
        let choice = select_resonant_mode(&modes, 0.01, ModeStrategy::Fixed(4)).unwrap();
        let m = propagator(&build_single_particle_matrix(&spec).unwrap(), choice.tau).unwrap();
        let out = bosonic_swap_and_thermal_error(&m, 3.0, &vec![0.0; n + 1]).unwrap();
        assert!((out.n_out - (1.0 - out.epsilon) * 3.0).abs() < 1e-14);
        assert!((out.epsilon - (1.0 - m.get(n + 1, 0).norm_sqr())).abs() < 1e-15);
        assert!(out.amplitude.re < -0.999);
    }
}
