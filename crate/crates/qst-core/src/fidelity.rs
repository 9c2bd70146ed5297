//! Closed-form channel fidelities and error estimates from propagator elements.
//!
//! All channel fidelities are average fidelities
//! `F = 1/2 + (1/12) Σ_i Tr[σ_i E(σ_i)]` written in terms of `M = exp(-iKt)`
//! of the nearest-neighbour XX (free-fermion) bus. Site `0` is the left
//! register and `N+1` the right one.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::dynamics::{EigenmodeSet, Propagator, ResonantModeChoice};
use crate::error::{QstError, Result};
use crate::C64;

/// Out-and-back transfer of register 0 (use `M` at twice the swap time):
/// `1/2 + (2 Re M₀₀ + |M₀₀|²)/6`.
pub fn f_double_swap(m: &Propagator) -> f64 {
    let m00 = m.get(0, 0);
    0.5 + (2.0 * m00.re + m00.norm_sqr()) / 6.0
}

/// One-way transfer between the registers with chain parity
/// `P = Tr[ρ Π_{l=0}^{N} (-σᶻ_l)]` (zero for an unpolarized chain).
pub fn f_single_swap(m: &Propagator, parity: f64) -> f64 {
    let a = m.get(0, m.last());
    0.5 + (2.0 * a.re * parity + a.norm_sqr()) / 6.0
}

/// One-way transfer through a polarized chain followed by the optimal phase
/// gate on the receiver: `1/2 + (2|M_{0,N+1}| + |M_{0,N+1}|²)/6`.
pub fn f_single_swap_phase_corrected(m: &Propagator) -> f64 {
    let a = m.get(0, m.last()).norm();
    0.5 + (2.0 * a + a * a) / 6.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodedVariant {
    /// Uses `Re[M_{0,N+1}² - M₀₀ M_{N+1,N+1}]`: no correction after transfer.
    Weak,
    /// Uses `|M_{0,N+1}² - M₀₀ M_{N+1,N+1}|`: a logical phase gate is applied
    /// after transfer.
    Strong,
}

/// Which qubit of the receiving pair holds the decoded state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeTarget {
    /// `(N+1)_b`, the qubit that travelled last; keeps the relay term.
    RegisterB,
    /// `(N+1)_a`; loses the `|Σ M_{N+1,i} M_{i,0}|²` term.
    RegisterA,
}

/// `Σ_{i=1}^{N} M_{N+1,i} M_{i,0}`, the two-step relay through the chain.
pub fn relay_amplitude(m: &Propagator) -> C64 {
    let last = m.last();
    (1..last).map(|i| m.get(last, i) * m.get(i, 0)).sum()
}

/// Paired-protocol fidelity, decoding into `(N+1)_b`.
pub fn f_encoded(m: &Propagator, variant: EncodedVariant) -> f64 {
    f_encoded_with_decode(m, variant, DecodeTarget::RegisterB)
}

pub fn f_encoded_with_decode(m: &Propagator, variant: EncodedVariant, decode: DecodeTarget) -> f64 {
    let last = m.last();
    let elements = EncodedElements {
        m0n: m.get(0, last),
        m00: m.get(0, 0),
        mnn: m.get(last, last),
        relay: relay_amplitude(m),
    };
    elements.fidelity(variant, decode)
}

/// The four propagator quantities the paired-protocol fidelity depends on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodedElements {
    pub m0n: C64,
    pub m00: C64,
    pub mnn: C64,
    /// [`relay_amplitude`].
    pub relay: C64,
}

impl EncodedElements {
    pub fn fidelity(&self, variant: EncodedVariant, decode: DecodeTarget) -> f64 {
        let a = self.m0n;
        let det = a * a - self.m00 * self.mnn;
        let overlap = match variant {
            EncodedVariant::Weak => det.re,
            EncodedVariant::Strong => det.norm(),
        };
        let relay = match decode {
            DecodeTarget::RegisterB => self.relay.norm_sqr(),
            DecodeTarget::RegisterA => 0.0,
        };
        0.5 + (2.0 * a.norm_sqr() * overlap + a.norm_sqr() + relay) / 6.0
    }
}

/// Swap, `σᶻ` on register `N+1`, swap back; the ideal channel is `σᶻ` on
/// register 0. Needs `M` complex symmetric.
pub fn f_remote_z(m: &Propagator) -> Result<f64> {
    let asym = m.symmetry_error();
    if asym > 1e-8 {
        return Err(QstError::MalformedInput(format!("propagator not symmetric ({asym:.2e})")));
    }
    let x = remote_z_overlap(m);
    Ok(0.5 + (x.norm_sqr() - 2.0 * x.re) / 6.0)
}

/// `⟨0|M S M|0⟩` with `S = diag(1, …, 1, -1)`.
pub fn remote_z_overlap(m: &Propagator) -> C64 {
    let last = m.last();
    (0..=last)
        .map(|j| {
            let s = if j == last { -1.0 } else { 1.0 };
            m.get(0, j) * m.get(j, 0) * s
        })
        .sum()
}

/// All analytic fidelities of one bus. `F_DS` uses the out-and-back
/// propagator, the others the one-way propagator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityReport {
    pub f_ds: f64,
    pub f_ss: f64,
    pub f_enc: f64,
    pub f_z: f64,
    pub parity: f64,
    pub m00: C64,
    pub m0n: C64,
    pub mnn: C64,
    pub relay: C64,
}

impl FidelityReport {
    pub fn new(one_way: &Propagator, round_trip: &Propagator, parity: f64, variant: EncodedVariant) -> Result<Self> {
        let last = one_way.last();
        Ok(FidelityReport {
            f_ds: f_double_swap(round_trip),
            f_ss: f_single_swap(one_way, parity),
            f_enc: f_encoded(one_way, variant),
            f_z: f_remote_z(one_way)?,
            parity,
            m00: one_way.get(0, 0),
            m0n: one_way.get(0, last),
            mnn: one_way.get(last, last),
            relay: relay_amplitude(one_way),
        })
    }
}

/// Off-resonant leakage plus register decoherence for one resonant mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorBudget {
    pub off_resonant: f64,
    pub decoherence: f64,
    pub total: f64,
    /// Contribution of every mode (zero at the resonant one).
    pub per_mode: Vec<f64>,
}

fn gaps(modes: &EigenmodeSet, z: usize) -> Result<Vec<f64>> {
    let ez = modes.energies[z];
    let d: Vec<f64> = modes.energies.iter().map(|e| e - ez).collect();
    for (k, &x) in d.iter().enumerate() {
        if k != z && x == 0.0 {
            return Err(QstError::DegenerateSpectrum(format!("mode {k} is degenerate with mode {z}")));
        }
    }
    Ok(d)
}

/// `ε = Σ_{k≠z} (g_L²ψ_{k,L}² + g_R²ψ_{k,R}²)/Δ_k² + N τ / T₁` with `Δ_k = ε_k - ε_z`.
pub fn error_budget(modes: &EigenmodeSet, choice: &ResonantModeChoice, n: usize, t1: f64) -> Result<ErrorBudget> {
    if !(t1 > 0.0) {
        return Err(QstError::InvalidSpec("T1 must be positive or infinite".into()));
    }
    let z = choice.z;
    let d = gaps(modes, z)?;
    let per_mode: Vec<f64> = (0..modes.len())
        .map(|k| {
            if k == z {
                0.0
            } else {
                (choice.g_left.powi(2) * modes.psi_left(k).powi(2) + choice.g_right.powi(2) * modes.psi_right(k).powi(2))
                    / d[k].powi(2)
            }
        })
        .collect();
    let off_resonant: f64 = per_mode.iter().sum();
    let decoherence = if t1.is_infinite() { 0.0 } else { n as f64 * choice.tau / t1 };
    Ok(ErrorBudget {
        off_resonant,
        decoherence,
        total: off_resonant + decoherence,
        per_mode,
    })
}

/// `S_z = Σ_{k≠z} [ψ_{k,L}² + (ψ_{z,L}/ψ_{z,R})² ψ_{k,R}²] / Δ_k²`, the
/// off-resonant error per unit `g_L²` once `g_R` is matched.
pub fn off_resonant_sum(modes: &EigenmodeSet, z: usize) -> Result<f64> {
    let d = gaps(modes, z)?;
    let ratio = (modes.psi_left(z) / modes.psi_right(z)).powi(2);
    Ok((0..modes.len())
        .filter(|&k| k != z)
        .map(|k| (modes.psi_left(k).powi(2) + ratio * modes.psi_right(k).powi(2)) / d[k].powi(2))
        .sum())
}

/// Stationary point of the error budget in `g_L`:
/// `g_L = (N π / (2√2 T₁ |ψ_{z,L}| S_z))^{1/3}`, with `g_R` matched.
pub fn optimal_coupling(modes: &EigenmodeSet, z: usize, n: usize, t1: f64) -> Result<(f64, f64)> {
    if !(t1 > 0.0 && t1.is_finite()) {
        return Err(QstError::InvalidSpec("optimal coupling needs a finite positive T1".into()));
    }
    let s = off_resonant_sum(modes, z)?;
    let l = modes.psi_left(z).abs();
    let r = modes.psi_right(z).abs();
    if l == 0.0 || r == 0.0 {
        return Err(QstError::NoTransferringMode(format!("mode {z} has a vanishing end amplitude")));
    }
    let gl = (n as f64 * PI / (2.0 * SQRT_2 * t1 * l * s)).cbrt();
    Ok((gl, gl * l / r))
}

/// Weak-coupling estimates for the uniform XX bus (`κ = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbativeEstimate {
    pub n: usize,
    pub g: f64,
    /// Resonant mode, 1-based as `z = (N+1)/2` (odd) or `N/2` (even).
    pub z: usize,
    /// One-way transfer time.
    pub time: f64,
    /// Register detuning `δ` relative to `Δ_z`; zero for odd `N`.
    pub delta: f64,
    /// Register on-site energy to place in `K` (`Δ_z + δ`).
    pub register_energy: f64,
    /// Predicted `1 - |M_{0,N+1}|²` at `time`.
    pub transfer_infidelity: f64,
    /// Predicted `1 - M₀₀` at `2·time` (odd `N` only).
    pub return_infidelity: Option<f64>,
    /// `g < 1/√N`, the validity range of the expansion.
    pub in_regime: bool,
}

fn gap_and_rate(n: usize, g: f64, k: usize) -> (f64, f64) {
    let q = PI * k as f64 / (n as f64 + 1.0);
    (2.0 * q.cos(), 2.0 * g / (n as f64 + 1.0).sqrt() * q.sin())
}

pub fn perturbative_infidelity(n: usize, g: f64) -> PerturbativeEstimate {
    let in_regime = g < 1.0 / (n as f64).sqrt();
    if n % 2 == 1 {
        let z = n.div_ceil(2);
        let time = (n as f64 + 1.0).sqrt() * PI / (2.0 * g);
        let sign_z = if z % 2 == 0 { 1.0 } else { -1.0 };
        let transfer_infidelity = 2.0
            * (1..z)
                .map(|k| {
                    let (d, om) = gap_and_rate(n, g, k);
                    let sk = if k % 2 == 0 { 1.0 } else { -1.0 };
                    (om / d).powi(2) * (1.0 + sk * sign_z * (d * time).cos())
                })
                .sum::<f64>();
        PerturbativeEstimate {
            n,
            g,
            z,
            time,
            delta: 0.0,
            register_energy: 0.0,
            transfer_infidelity,
            return_infidelity: Some(return_estimate(n, g, 2.0 * time)),
            in_regime,
        }
    } else {
        let z = n / 2;
        let (dz, omz) = gap_and_rate(n, g, z);
        let time = PI / omz;
        let mut delta = 0.0;
        let mut est = 0.0;
        for k in (1..=n).filter(|&k| k != z) {
            let (d, om) = gap_and_rate(n, g, k);
            let dt = d - dz;
            let parity = if (k + z) % 2 == 0 { 1.0 } else { -1.0 };
            delta += (1.0 - 3.0 * parity) / 2.0 * om * om / dt;
            est += (om / dt).powi(2) * (1.0 + parity * (dt * time).cos());
        }
        PerturbativeEstimate {
            n,
            g,
            z,
            time,
            delta,
            register_energy: dz + delta,
            transfer_infidelity: est,
            return_infidelity: None,
            in_regime,
        }
    }
}

fn return_estimate(n: usize, g: f64, t: f64) -> f64 {
    let z = n.div_ceil(2);
    (1..z)
        .map(|k| {
            let (d, om) = gap_and_rate(n, g, k);
            (om / d).powi(2) * (1.0 - (d * t).cos())
        })
        .sum()
}

/// `1 - M₀₀` for odd `N`, evaluated at the round-trip time `√(N+1) π / g`
/// where the resonant doublet has returned to register 0.
pub fn perturbative_m00(n: usize, g: f64) -> Result<f64> {
    perturbative_m00_at(n, g, (n as f64 + 1.0).sqrt() * PI / g)
}

/// [`perturbative_m00`] evaluated at an arbitrary time `t`.
pub fn perturbative_m00_at(n: usize, g: f64, t: f64) -> Result<f64> {
    if n % 2 == 0 {
        return Err(QstError::InvalidSpec("the return-amplitude estimate is derived for odd N".into()));
    }
    Ok(return_estimate(n, g, t))
}
