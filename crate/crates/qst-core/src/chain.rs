//! Chain descriptions and the matrices built from them.
//!
//! A bus consists of `N` chain sites flanked by two registers. Site indices
//! in the single-particle matrix run `0..=N+1`, with `0` and `N+1` the
//! registers and `1..=N` the chain. Coupling patterns describe the `N-1`
//! chain bonds; the register bonds are `g_left` and `g_right`.
//!
//! Three model kinds share the same description:
//!
//! - `Xx`: `H = Σ J_ij (σ⁺_i σ⁻_j + h.c.) + Σ h_i n_i`, quadratic after
//!   Jordan–Wigner only when every coupling is nearest neighbour.
//! - `Tfim`: `H = -Σ J_i σˣ_i σˣ_{i+1} + Σ B_i σᶻ_i`, quadratic with pairing.
//! - `Bosonic`: `H = Σ ω_i a†_i a_i + Σ J_ij (a†_i a_j + h.c.)`, quadratic for
//!   any range.
//!
//! Positions-based patterns are in nanometres and converted with
//! `J = κ_ref (d_ref / r)³`; inside the engine `κ_ref = 1`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{QstError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Xx,
    Tfim,
    Bosonic,
}

/// Which pairs of a positions-based pattern carry a coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeRule {
    NearestNeighbor,
    FullDipolar,
    /// Full dipolar with every `|i-j| = 2` pair removed.
    NnnCancelled,
}

impl RangeRule {
    pub fn keeps(self, separation: usize) -> bool {
        match self {
            RangeRule::NearestNeighbor => separation == 1,
            RangeRule::FullDipolar => separation >= 1,
            RangeRule::NnnCancelled => separation >= 1 && separation != 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            RangeRule::NearestNeighbor => "nn",
            RangeRule::FullDipolar => "dipolar",
            RangeRule::NnnCancelled => "nnn_cancelled",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingPattern {
    Uniform(f64),
    /// `J_i = ½√((i+1)(N+1-i))` over all `N+1` bonds including the register
    /// bonds; see [`engineered_couplings`].
    Engineered,
    /// Nearest-neighbour chain bonds `J_1..J_{N-1}`.
    Explicit(Vec<f64>),
    /// Chain-site coordinates in nanometres.
    FromPositions {
        positions: Vec<f64>,
        rule: RangeRule,
    },
}

/// Physical scales used to translate engine units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Units {
    /// Bare coupling `κ_ref` in kHz, read as a rate: `1/κ_ref` is the time unit.
    pub kappa_ref_khz: f64,
    /// Spacing at which the dipolar coupling equals `κ_ref`.
    pub d_ref_nm: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            kappa_ref_khz: 50.0,
            d_ref_nm: 10.0,
        }
    }
}

impl Units {
    /// Milliseconds to engine time (`κ_ref · t`).
    pub fn ms_to_internal(&self, ms: f64) -> f64 {
        ms * self.kappa_ref_khz
    }

    pub fn internal_to_ms(&self, t: f64) -> f64 {
        t / self.kappa_ref_khz
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub model: ModelKind,
    /// Number of chain sites, registers excluded.
    pub n: usize,
    pub pattern: CouplingPattern,
    pub g_left: f64,
    pub g_right: f64,
    /// On-site energy of both registers (`B'` for the Ising chain, `ω'` for
    /// oscillators, detuning for the XX chain).
    pub register_field: f64,
    /// Uniform on-site energy of the chain sites (`h`, `B` or `ω`).
    pub field: f64,
    #[serde(default)]
    pub units: Units,
}

impl ChainSpec {
    pub fn uniform(model: ModelKind, n: usize, kappa: f64, g: f64) -> Self {
        ChainSpec {
            model,
            n,
            pattern: CouplingPattern::Uniform(kappa),
            g_left: g,
            g_right: g,
            register_field: 0.0,
            field: 0.0,
            units: Units::default(),
        }
    }

    /// Engineered XX chain of `n` sites between two registers, with a uniform
    /// field `h` on all `n + 2` sites and register bonds `J_0 = J_N`.
    pub fn engineered(n: usize, h: f64) -> Self {
        let j = engineered_couplings(n);
        ChainSpec {
            model: ModelKind::Xx,
            n,
            pattern: CouplingPattern::Engineered,
            g_left: j[0],
            g_right: j[n],
            register_field: h,
            field: h,
            units: Units::default(),
        }
    }

    pub fn with_fields(mut self, field: f64, register_field: f64) -> Self {
        self.field = field;
        self.register_field = register_field;
        self
    }

    pub fn with_registers(mut self, g_left: f64, g_right: f64) -> Self {
        self.g_left = g_left;
        self.g_right = g_right;
        self
    }

    pub fn total_sites(&self) -> usize {
        self.n + 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(QstError::InvalidSpec("chain length must be at least 1".into()));
        }
        if !(self.g_left >= 0.0 && self.g_right >= 0.0) {
            return Err(QstError::InvalidSpec("register couplings must be non-negative".into()));
        }
        if !(self.units.kappa_ref_khz > 0.0 && self.units.d_ref_nm > 0.0) {
            return Err(QstError::InvalidSpec("unit scales must be positive".into()));
        }
        match &self.pattern {
            CouplingPattern::Uniform(k) if !k.is_finite() => {
                Err(QstError::InvalidSpec("uniform coupling must be finite".into()))
            }
            CouplingPattern::Explicit(j) if j.len() + 1 != self.n => Err(QstError::InvalidSpec(
                format!("explicit pattern has {} bonds, chain of {} needs {}", j.len(), self.n, self.n - 1),
            )),
            CouplingPattern::FromPositions { positions, .. } => {
                if positions.len() != self.n {
                    return Err(QstError::InvalidSpec(format!(
                        "{} positions given for {} chain sites",
                        positions.len(),
                        self.n
                    )));
                }
                if positions.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(QstError::InvalidSpec("positions must be strictly increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Couplings among chain sites only, indexed `0..n` (chain-local).
    pub fn chain_couplings(&self) -> Result<CouplingMap> {
        self.validate()?;
        let n = self.n;
        let mut map = CouplingMap::new(n);
        match &self.pattern {
            CouplingPattern::Uniform(k) => {
                for i in 0..n.saturating_sub(1) {
                    map.set(i, i + 1, *k);
                }
            }
            CouplingPattern::Engineered => {
                let j = engineered_couplings(n);
                for i in 0..n.saturating_sub(1) {
                    map.set(i, i + 1, j[i + 1]);
                }
            }
            CouplingPattern::Explicit(j) => {
                for (i, &v) in j.iter().enumerate() {
                    map.set(i, i + 1, v);
                }
            }
            CouplingPattern::FromPositions { positions, rule } => {
                map = couplings_from_positions(positions, *rule, 1.0, self.units.d_ref_nm);
            }
        }
        Ok(map)
    }

    /// Nearest-neighbour chain bonds `J_1..J_{N-1}`; errors if the pattern
    /// carries longer-range terms.
    pub fn nn_bonds(&self) -> Result<Vec<f64>> {
        let map = self.chain_couplings()?;
        if !map.is_nearest_neighbor() {
            return Err(QstError::NotQuadratic("a long-range spin pattern".into()));
        }
        Ok((0..self.n.saturating_sub(1)).map(|i| map.get(i, i + 1)).collect())
    }
}

/// Symmetric pair couplings over `n` sites, stored as `(i, j, J)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingMap {
    n: usize,
    pairs: Vec<(usize, usize, f64)>,
}

impl CouplingMap {
    pub fn new(n: usize) -> Self {
        CouplingMap { n, pairs: Vec::new() }
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// Sets `J_ij` (order of `i`, `j` irrelevant); zero removes the pair.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j && i < self.n && j < self.n, "pair ({i}, {j}) invalid for {} sites", self.n);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.pairs.retain(|&(x, y, _)| (x, y) != (a, b));
        if value != 0.0 {
            self.pairs.push((a, b, value));
            self.pairs.sort_by_key(|&(x, y, _)| (x, y));
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.pairs
            .iter()
            .find(|&&(x, y, _)| (x, y) == (a, b))
            .map_or(0.0, |p| p.2)
    }

    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    pub fn is_nearest_neighbor(&self) -> bool {
        self.pairs.iter().all(|&(i, j, _)| j == i + 1)
    }

    /// Dense symmetric matrix with zero diagonal.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.pairs {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        CouplingMap {
            n: self.n,
            pairs: self.pairs.iter().map(|&(i, j, v)| (i, j, v * s)).collect(),
        }
    }
}

/// `J_i = ½√((i+1)(N+1-i))` for `i = 0..=N`, the bonds of an `N+2` site chain
/// whose single-particle spectrum is evenly spaced.
pub fn engineered_couplings(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| 0.5 * (((i + 1) * (n + 1 - i)) as f64).sqrt())
        .collect()
}

/// `J_ij = κ_ref (d_ref / |x_i - x_j|)³` for every pair kept by `rule`.
pub fn couplings_from_positions(positions: &[f64], rule: RangeRule, kappa_ref: f64, d_ref: f64) -> CouplingMap {
    let n = positions.len();
    let mut map = CouplingMap::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rule.keeps(j - i) {
                let r = (positions[j] - positions[i]).abs();
                map.pairs.push((i, j, kappa_ref * (d_ref / r).powi(3)));
            }
        }
    }
    map
}

/// Which leg pairs involving a register carry a coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegisterRange {
    /// Each register couples with `g` to its adjacent chain site only.
    EndOnly,
    /// Every pair touching a register couples as `g/r³` (subject to the
    /// range rule), including register to register.
    Dipolar,
}

/// Couplings of one transfer leg: `n + 2` equally spaced sites (unit
/// spacing), chain pairs `κ/r³` filtered by `rule`, registers per
/// [`RegisterRange::EndOnly`].
pub fn leg_couplings(n: usize, kappa: f64, g: f64, rule: RangeRule) -> CouplingMap {
    leg_couplings_with(n, kappa, g, rule, RegisterRange::EndOnly)
}

pub fn leg_couplings_with(n: usize, kappa: f64, g: f64, rule: RangeRule, registers: RegisterRange) -> CouplingMap {
    let m = n + 2;
    let mut map = CouplingMap::new(m);
    for i in 0..m {
        for j in i + 1..m {
            let r = j - i;
            let touches_register = i == 0 || j == m - 1;
            let value = match (touches_register, registers) {
                (false, _) if rule.keeps(r) => kappa / (r as f64).powi(3),
                (true, RegisterRange::EndOnly) if r == 1 => g,
                (true, RegisterRange::Dipolar) if rule.keeps(r) => g / (r as f64).powi(3),
                _ => continue,
            };
            map.pairs.push((i, j, value));
        }
    }
    map
}

/// Gaussian implantation straggle of the inter-site spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub mean_spacing_nm: f64,
    pub sigma_nm: f64,
    pub min_spacing_fraction: f64,
    pub master_seed: u64,
}

impl DisorderSpec {
    pub fn new(mean_spacing_nm: f64, sigma_nm: f64, master_seed: u64) -> Self {
        DisorderSpec {
            mean_spacing_nm,
            sigma_nm,
            min_spacing_fraction: 0.2,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_spacing_nm > 0.0) || !(self.sigma_nm >= 0.0) {
            return Err(QstError::InvalidSpec("spacing must be positive and straggle non-negative".into()));
        }
        if !(self.min_spacing_fraction > 0.0 && self.min_spacing_fraction < 1.0) {
            return Err(QstError::InvalidSpec("min_spacing_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionsRealization {
    pub positions: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl PositionsRealization {
    pub fn gaps(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Draws `n_sites` positions starting at 0 whose gaps are independent
/// `N(d, σ_d)` variates, redrawn while below `min_spacing_fraction · d`.
///
/// Each `(master_seed, stream)` pair addresses its own ChaCha20 stream, so a
/// realization does not depend on which others were drawn before it.
pub fn sample_positions(spec: &DisorderSpec, n_sites: usize, stream: u64) -> PositionsRealization {
    assert!(n_sites >= 2, "need at least two sites");
    let d = spec.mean_spacing_nm;
    let floor = spec.min_spacing_fraction * d;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.master_seed);
    rng.set_stream(stream);
    let normal = Normal::new(d, spec.sigma_nm).expect("finite straggle");
    let mut positions = Vec::with_capacity(n_sites);
    let mut x = 0.0;
    positions.push(x);
    for _ in 1..n_sites {
        let gap = loop {
            let g = normal.sample(&mut rng);
            if g >= floor {
                break g;
            }
        };
        x += gap;
        positions.push(x);
    }
    PositionsRealization {
        positions,
        seed: spec.master_seed,
        stream,
    }
}

/// Real symmetric single-particle matrix `K` over `0..=N+1`.
///
/// Valid for `Xx` with nearest-neighbour couplings and for `Bosonic` with any
/// range. Registers couple only to their adjacent chain site.
pub fn build_single_particle_matrix(spec: &ChainSpec) -> Result<DMatrix<f64>> {
    let chain = match spec.model {
        ModelKind::Tfim => {
            return Err(QstError::NotQuadratic(
                "the Ising chain has pairing terms; build its BdG matrix instead".into(),
            ))
        }
        ModelKind::Xx => {
            let map = spec.chain_couplings()?;
            if !map.is_nearest_neighbor() {
                return Err(QstError::NotQuadratic("a long-range XX chain".into()));
            }
            map
        }
        ModelKind::Bosonic => spec.chain_couplings()?,
    };
    let n = spec.n;
    let mut k = DMatrix::zeros(n + 2, n + 2);
    for &(i, j, v) in chain.pairs() {
        k[(i + 1, j + 1)] = v;
        k[(j + 1, i + 1)] = v;
    }
    k[(0, 1)] = spec.g_left;
    k[(1, 0)] = spec.g_left;
    k[(n, n + 1)] = spec.g_right;
    k[(n + 1, n)] = spec.g_right;
    for i in 1..=n {
        k[(i, i)] = spec.field;
    }
    k[(0, 0)] = spec.register_field;
    k[(n + 1, n + 1)] = spec.register_field;
    Ok(k)
}

/// Chain-only block of `K` (sites `1..=N`, reindexed from 0).
pub fn chain_matrix(spec: &ChainSpec) -> Result<DMatrix<f64>> {
    let k = build_single_particle_matrix(spec)?;
    Ok(k.view((1, 1), (spec.n, spec.n)).into_owned())
}

/// BdG matrix `A` of the transverse-field Ising chain in the basis
/// `φ = (c_1..c_m, c†_1..c†_m)`, normalised so that its eigenvalues are
/// `±ε_k` and Heisenberg evolution reads `φ(t) = exp(-2iAt) φ`.
///
/// With `with_registers` the registers are appended at both ends (`m = N+2`,
/// bonds `g_left`, `g_right`, field `register_field`); otherwise `m = N`.
pub fn build_bdg_matrix(spec: &ChainSpec, with_registers: bool) -> Result<DMatrix<f64>> {
    if spec.model != ModelKind::Tfim {
        return Err(QstError::InvalidSpec("BdG matrices are built for the Ising chain only".into()));
    }
    let bonds = spec.nn_bonds()?;
    let (bonds, fields): (Vec<f64>, Vec<f64>) = if with_registers {
        let mut b = vec![spec.g_left];
        b.extend(&bonds);
        b.push(spec.g_right);
        let mut f = vec![spec.register_field];
        f.extend(std::iter::repeat_n(spec.field, spec.n));
        f.push(spec.register_field);
        (b, f)
    } else {
        (bonds, vec![spec.field; spec.n])
    };
    Ok(bdg_from_bonds(&bonds, &fields))
}

/// `A` for `H = -Σ J_i σˣ_i σˣ_{i+1} + Σ h_i σᶻ_i` with `bonds.len() + 1 == fields.len()`.
pub fn bdg_from_bonds(bonds: &[f64], fields: &[f64]) -> DMatrix<f64> {
    let m = fields.len();
    assert_eq!(bonds.len() + 1, m, "bond count must be one less than site count");
    let mut a = DMatrix::zeros(2 * m, 2 * m);
    for (i, &h) in fields.iter().enumerate() {
        a[(i, i)] = h;
        a[(m + i, m + i)] = -h;
    }
    for (i, &j) in bonds.iter().enumerate() {
        let half = 0.5 * j;
        // hopping block
        a[(i, i + 1)] = -half;
        a[(i + 1, i)] = -half;
        a[(m + i, m + i + 1)] = half;
        a[(m + i + 1, m + i)] = half;
        // pairing block Δ (antisymmetric) and its transpose
        a[(i, m + i + 1)] = -half;
        a[(i + 1, m + i)] = half;
        a[(m + i + 1, i)] = -half;
        a[(m + i, i + 1)] = half;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engineered_small_cases() {
        let j2 = engineered_couplings(2);
        let s3 = 3f64.sqrt() / 2.0;
        assert_eq!(j2.len(), 3);
        assert!((j2[0] - s3).abs() < 1e-15 && (j2[1] - 1.0).abs() < 1e-15 && (j2[2] - s3).abs() < 1e-15);
        let j3 = engineered_couplings(3);
        let s6 = 6f64.sqrt() / 2.0;
        for (a, b) in j3.iter().zip([1.0, s6, s6, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn engineered_mirror_symmetric() {
        for n in [0, 1, 7, 50, 10_000] {
            let j = engineered_couplings(n);
            for i in 0..=n {
                assert_eq!(j[i], j[n - i]);
            }
        }
    }

    #[test]
    fn uniform_k_structure() {
        let spec = ChainSpec::uniform(ModelKind::Xx, 3, 1.0, 0.1);
        let k = build_single_particle_matrix(&spec).unwrap();
        let off: Vec<f64> = (0..4).map(|i| k[(i, i + 1)]).collect();
        assert_eq!(off, vec![0.1, 1.0, 1.0, 0.1]);
        for i in 0..5 {
            for j in 0..5 {
                if (i as i64 - j as i64).abs() > 1 {
                    assert_eq!(k[(i, j)], 0.0);
                }
            }
        }
        assert_eq!(k, k.transpose());
    }

    #[test]
    fn zero_register_coupling_decouples() {
        let k = build_single_particle_matrix(&ChainSpec::uniform(ModelKind::Xx, 4, 1.0, 0.0)).unwrap();
        for j in 1..6 {
            assert_eq!(k[(0, j)], 0.0);
            assert_eq!(k[(5, j - 1)], 0.0);
        }
    }

    #[test]
    fn tfim_rejected_for_k() {
        let spec = ChainSpec::uniform(ModelKind::Tfim, 4, 1.0, 0.1);
        assert!(matches!(build_single_particle_matrix(&spec), Err(QstError::NotQuadratic(_))));
    }

    #[test]
    fn long_range_xx_is_not_quadratic_but_bosonic_is() {
        let mut spec = ChainSpec::uniform(ModelKind::Xx, 4, 1.0, 0.1);
        spec.pattern = CouplingPattern::FromPositions {
            positions: vec![0.0, 10.0, 20.0, 30.0],
            rule: RangeRule::FullDipolar,
        };
        assert!(build_single_particle_matrix(&spec).is_err());
        spec.model = ModelKind::Bosonic;
        let k = build_single_particle_matrix(&spec).unwrap();
        assert!((k[(1, 3)] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn reference_gap_and_cube_law() {
        let map = couplings_from_positions(&[0.0, 10.0, 30.0], RangeRule::FullDipolar, 50.0, 10.0);
        assert!((map.get(0, 1) - 50.0).abs() < 1e-12);
        assert!((map.get(1, 2) - 50.0 / 8.0).abs() < 1e-12);
        assert!((map.get(0, 2) - 50.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn nnn_cancelled_drops_only_second_neighbours() {
        let pos: Vec<f64> = (0..6).map(|i| 10.0 * i as f64).collect();
        let map = couplings_from_positions(&pos, RangeRule::NnnCancelled, 1.0, 10.0);
        assert_eq!(map.get(0, 2), 0.0);
        assert_eq!(map.get(1, 3), 0.0);
        assert!(map.get(0, 1) > 0.0);
        assert!((map.get(0, 3) - 1.0 / 27.0).abs() < 1e-15);
        let nn = couplings_from_positions(&pos, RangeRule::NearestNeighbor, 1.0, 10.0);
        assert!(nn.is_nearest_neighbor());
        assert_eq!(nn.pairs().len(), 5);
    }

    #[test]
    fn zero_straggle_gives_exact_spacing() {
        let spec = DisorderSpec::new(10.0, 0.0, 7);
        let p = sample_positions(&spec, 20, 3);
        assert!(p.gaps().iter().all(|&g| g == 10.0));
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let spec = DisorderSpec::new(10.0, 2.0, 99);
        assert_eq!(sample_positions(&spec, 30, 5), sample_positions(&spec, 30, 5));
        assert_ne!(sample_positions(&spec, 30, 5), sample_positions(&spec, 30, 6));
    }

    #[test]
    fn clamp_respected() {
        let spec = DisorderSpec::new(10.0, 8.0, 1);
        for s in 0..50 {
            assert!(sample_positions(&spec, 40, s).gaps().iter().all(|&g| g >= 2.0));
        }
    }

    #[test]
    fn explicit_pattern_length_checked() {
        let mut spec = ChainSpec::uniform(ModelKind::Xx, 4, 1.0, 0.1);
        spec.pattern = CouplingPattern::Explicit(vec![1.0, 1.0]);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn bdg_is_symmetric_with_paired_spectrum() {
        let a = bdg_from_bonds(&[1.0, 0.7, 1.3], &[2.0, 1.5, 0.4, 1.1]);
        assert_eq!(a, a.transpose());
        let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for i in 0..4 {
            assert!((ev[i] + ev[7 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn leg_register_ranges() {
        let end = leg_couplings(4, 1.0, 0.5, RangeRule::FullDipolar);
        assert_eq!(end.get(0, 1), 0.5);
        assert_eq!(end.get(0, 2), 0.0);
        assert_eq!(end.get(0, 5), 0.0);
        assert!((end.get(1, 3) - 0.125).abs() < 1e-15);
        let all = leg_couplings_with(4, 1.0, 0.5, RangeRule::NnnCancelled, RegisterRange::Dipolar);
        assert_eq!(all.get(0, 2), 0.0);
        assert!((all.get(0, 3) - 0.5 / 27.0).abs() < 1e-15);
        assert!((all.get(0, 5) - 0.5 / 125.0).abs() < 1e-15);
        assert_eq!(all.get(2, 4), 0.0);
        assert!(leg_couplings(4, 1.0, 0.5, RangeRule::NearestNeighbor).is_nearest_neighbor());
    }
}
