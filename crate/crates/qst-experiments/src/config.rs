//! Run configuration: one TOML document with a section per experiment.
//!
//! Every field has a default, so an empty document is a valid configuration.
//! Unknown keys are rejected. Physical inputs are in the units named by the
//! field (`_nm`, `_ms`, `_khz`); everything else is in units of the bare
//! chain coupling `κ` and `1/κ`.

use std::path::{Path, PathBuf};

use qst_core::chain::{RangeRule, RegisterRange, Units};
use qst_core::fidelity::EncodedVariant;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ExpError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DisorderSweep,
    StrongScan,
    DipolarEd,
    Perturbative,
    Bosonic,
    MirrorVerify,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DisorderSweep => "disorder-sweep",
            ExperimentKind::StrongScan => "strong-scan",
            ExperimentKind::DipolarEd => "dipolar-ed",
            ExperimentKind::Perturbative => "perturbative",
            ExperimentKind::Bosonic => "bosonic",
            ExperimentKind::MirrorVerify => "mirror-verify",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// When set, the document may only be run by the matching subcommand.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    pub seed: u64,
    pub realizations: usize,
    pub units: UnitsConfig,
    pub output: OutputConfig,
    pub disorder: DisorderConfig,
    pub strong: StrongConfig,
    pub dipolar: DipolarConfig,
    pub perturbative: PerturbativeConfig,
    pub bosonic: BosonicConfig,
    pub mirror: MirrorConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: None,
            seed: 20_240_601,
            realizations: 200,
            units: UnitsConfig::default(),
            output: OutputConfig::default(),
            disorder: DisorderConfig::default(),
            strong: StrongConfig::default(),
            dipolar: DipolarConfig::default(),
            perturbative: PerturbativeConfig::default(),
            bosonic: BosonicConfig::default(),
            mirror: MirrorConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitsConfig {
    pub kappa_ref_khz: f64,
    pub d_ref_nm: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        let u = Units::default();
        UnitsConfig {
            kappa_ref_khz: u.kappa_ref_khz,
            d_ref_nm: u.d_ref_nm,
        }
    }
}

impl UnitsConfig {
    pub fn units(&self) -> Units {
        Units {
            kappa_ref_khz: self.kappa_ref_khz,
            d_ref_nm: self.d_ref_nm,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderConfig {
    pub n: Vec<usize>,
    /// Gaussian straggle of the inter-site spacing.
    pub sigma_d_nm: Vec<f64>,
    /// Register depolarization times; `inf` is allowed.
    pub t1_ms: Vec<f64>,
    /// Upper bound on the optimised register coupling.
    pub g_max: f64,
    /// Register coupling used when `T1 = inf`, where the budget has no
    /// interior optimum.
    pub g_weak: f64,
    /// Gaps below this fraction of the mean spacing are redrawn.
    pub min_spacing_fraction: f64,
    pub pr_bins: usize,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        // σ_κ/κ = 0, 0.1, …, 0.5 through σ_κ ≈ 3κ σ_d / d at d = 10 nm
        let sigma_d_nm = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5].iter().map(|f| f * 10.0 / 3.0).collect();
        DisorderConfig {
            n: vec![11, 51],
            sigma_d_nm,
            t1_ms: vec![10.0, 50.0, 200.0, 1000.0, 5000.0, f64::INFINITY],
            g_max: 1.0,
            g_weak: 1e-3,
            min_spacing_fraction: 0.2,
            pr_bins: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrongConfig {
    pub n: Vec<usize>,
    pub g_range: [f64; 2],
    pub g_steps: usize,
    /// Search window for the transfer time, in units of `N/κ`.
    pub t_window: [f64; 2],
    /// Coarse time samples per chain site.
    pub t_points_per_site: usize,
    pub refine_levels: usize,
    /// Chain lengths entering the power-law fit (inclusive).
    pub fit_range: [usize; 2],
    pub variant: EncodedVariant,
}

impl Default for StrongConfig {
    fn default() -> Self {
        StrongConfig {
            n: vec![2, 3, 5, 10, 15, 20, 30, 40, 50, 60, 70, 80, 90, 100],
            g_range: [0.3, 1.5],
            g_steps: 121,
            t_window: [0.5, 1.7],
            t_points_per_site: 40,
            refine_levels: 8,
            fit_range: [10, 100],
            variant: EncodedVariant::Strong,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DipolarConfig {
    /// Total spins including both register pairs (`N + 4`).
    pub n_total: Vec<usize>,
    pub models: Vec<RangeRule>,
    pub registers: RegisterRange,
    pub g_range: [f64; 2],
    /// Search window for each leg's evolution time, in units of `N/κ`.
    pub t_window: [f64; 2],
    /// Starting points taken from the nearest-neighbour landscape.
    pub seeds: usize,
    /// Half-widths of the first exact-diagonalization search box.
    pub box_half_width: [f64; 2],
    pub box_points: [usize; 2],
    pub refine_levels: usize,
}

impl Default for DipolarConfig {
    fn default() -> Self {
        DipolarConfig {
            n_total: vec![6, 8, 10, 12],
            models: vec![RangeRule::NearestNeighbor, RangeRule::NnnCancelled, RangeRule::FullDipolar],
            registers: RegisterRange::EndOnly,
            g_range: [0.3, 1.3],
            t_window: [0.5, 2.5],
            seeds: 2,
            box_half_width: [0.15, 1.0],
            box_points: [7, 9],
            refine_levels: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbativeConfig {
    pub n: Vec<usize>,
    pub g_min: f64,
    pub g_max: f64,
    /// Log-spaced samples between `g_min` and `g_max`.
    pub points: usize,
}

impl Default for PerturbativeConfig {
    fn default() -> Self {
        PerturbativeConfig {
            n: vec![51],
            g_min: 1e-3,
            g_max: 0.5,
            points: 121,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BosonicConfig {
    pub n: usize,
    /// Register couplings at `kT = ω`.
    pub g: Vec<f64>,
    pub kt_over_omega: Vec<f64>,
    /// Occupation of the source oscillator.
    pub source_occupation: f64,
}

impl Default for BosonicConfig {
    fn default() -> Self {
        BosonicConfig {
            n: 9,
            g: vec![0.01, 0.02, 0.04],
            kt_over_omega: vec![1.0, 10.0, 100.0],
            source_occupation: 0.0,
        }
    }
}

/// Default routing lattice: 8×8 with six holes.
pub const DEFAULT_LATTICE: &str = "\
R..R..R.
R.#R....
R..R.#.R
R.......
R#.R..R.
R....#R.
R..R..R#
R..#..R.
";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MirrorConfig {
    pub sizes: Vec<usize>,
    /// Mirrors up to this size are also checked with the dense simulator.
    pub dense_max: usize,
    pub swap_chain: usize,
    /// Lattice text (`R` register, `.` impurity, `#` hole, one row per line).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<String>,
    /// Read the lattice from a file instead; relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice_file: Option<PathBuf>,
    /// Consecutive rows only interact vertically when their spacing differs
    /// from the in-row spacing.
    pub distinct_spacing: bool,
    /// `[[src_row, src_col], [dst_row, dst_col]]` pairs.
    pub routes: Vec<[[usize; 2]; 2]>,
}

impl Default for MirrorConfig {
    fn default() -> Self {
        MirrorConfig {
            sizes: (0..10).map(|k| 1usize << k).collect(),
            dense_max: 10,
            swap_chain: 16,
            lattice: None,
            lattice_file: None,
            distinct_spacing: true,
            routes: vec![[[0, 0], [7, 7]], [[7, 0], [0, 7]], [[3, 4], [6, 1]], [[0, 1], [2, 6]]],
        }
    }
}

fn non_empty<T>(v: &[T], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(ExpError::Config(format!("{what} must not be empty")));
    }
    Ok(())
}

fn positive(x: f64, what: &str) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(ExpError::Config(format!("{what} must be positive and finite, got {x}")));
    }
    Ok(())
}

fn ordered(r: [f64; 2], what: &str) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] > 0.0 && r[1] > r[0]) {
        return Err(ExpError::Config(format!("{what} must be an increasing positive pair, got {r:?}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ExpError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file; a relative `lattice_file` is
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExpError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(f) = &cfg.mirror.lattice_file {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.mirror.lattice_file = Some(dir.join(f));
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| ExpError::Encode(e.to_string()))
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(ExpError::Config("realizations must be at least 1".into()));
        }
        positive(self.units.kappa_ref_khz, "units.kappa_ref_khz")?;
        positive(self.units.d_ref_nm, "units.d_ref_nm")?;

        let d = &self.disorder;
        non_empty(&d.n, "disorder.n")?;
        non_empty(&d.sigma_d_nm, "disorder.sigma_d_nm")?;
        non_empty(&d.t1_ms, "disorder.t1_ms")?;
        if d.n.iter().any(|&n| n < 2) {
            return Err(ExpError::Config("disorder.n entries must be at least 2".into()));
        }
        if d.sigma_d_nm.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(ExpError::Config("disorder.sigma_d_nm entries must be finite and non-negative".into()));
        }
        if d.t1_ms.iter().any(|t| !(*t > 0.0)) {
            return Err(ExpError::Config("disorder.t1_ms entries must be positive".into()));
        }
        positive(d.g_max, "disorder.g_max")?;
        positive(d.g_weak, "disorder.g_weak")?;
        if !(d.min_spacing_fraction > 0.0 && d.min_spacing_fraction < 1.0) {
            return Err(ExpError::Config("disorder.min_spacing_fraction must lie in (0, 1)".into()));
        }
        if d.pr_bins == 0 {
            return Err(ExpError::Config("disorder.pr_bins must be at least 1".into()));
        }

        let s = &self.strong;
        non_empty(&s.n, "strong.n")?;
        if s.n.iter().any(|&n| n < 1) {
            return Err(ExpError::Config("strong.n entries must be at least 1".into()));
        }
        ordered(s.g_range, "strong.g_range")?;
        ordered(s.t_window, "strong.t_window")?;
        if s.g_steps < 3 || s.t_points_per_site == 0 {
            return Err(ExpError::Config("strong grids need at least 3 couplings and 1 time per site".into()));
        }
        if s.fit_range[0] > s.fit_range[1] {
            return Err(ExpError::Config("strong.fit_range must be ordered".into()));
        }

        let p = &self.dipolar;
        non_empty(&p.n_total, "dipolar.n_total")?;
        non_empty(&p.models, "dipolar.models")?;
        if p.n_total.iter().any(|&n| n < 5) {
            return Err(ExpError::Config("dipolar.n_total entries must be at least 5 (one chain site)".into()));
        }
        ordered(p.g_range, "dipolar.g_range")?;
        ordered(p.t_window, "dipolar.t_window")?;
        positive(p.box_half_width[0], "dipolar.box_half_width[0]")?;
        positive(p.box_half_width[1], "dipolar.box_half_width[1]")?;
        if p.seeds == 0 || p.box_points.iter().any(|&k| k < 3) {
            return Err(ExpError::Config("dipolar needs at least one seed and 3 points per box axis".into()));
        }

        let q = &self.perturbative;
        non_empty(&q.n, "perturbative.n")?;
        if q.n.iter().any(|&n| n < 2) {
            return Err(ExpError::Config("perturbative.n entries must be at least 2".into()));
        }
        ordered([q.g_min, q.g_max], "perturbative g_min/g_max")?;
        if q.points < 2 {
            return Err(ExpError::Config("perturbative.points must be at least 2".into()));
        }

        let b = &self.bosonic;
        if b.n == 0 {
            return Err(ExpError::Config("bosonic.n must be at least 1".into()));
        }
        non_empty(&b.g, "bosonic.g")?;
        non_empty(&b.kt_over_omega, "bosonic.kt_over_omega")?;
        for &g in &b.g {
            positive(g, "bosonic.g")?;
        }
        for &x in &b.kt_over_omega {
            positive(x, "bosonic.kt_over_omega")?;
        }
        if !(b.source_occupation >= 0.0 && b.source_occupation.is_finite()) {
            return Err(ExpError::Config("bosonic.source_occupation must be non-negative".into()));
        }

        let m = &self.mirror;
        non_empty(&m.sizes, "mirror.sizes")?;
        if m.sizes.contains(&0) {
            return Err(ExpError::Config("mirror.sizes entries must be at least 1".into()));
        }
        if m.swap_chain < 2 {
            return Err(ExpError::Config("mirror.swap_chain must be at least 2".into()));
        }
        if m.lattice.is_some() && m.lattice_file.is_some() {
            return Err(ExpError::Config("give mirror.lattice or mirror.lattice_file, not both".into()));
        }
        Ok(())
    }

    /// Checks that this document may be run as `kind`.
    pub fn check_kind(&self, kind: ExperimentKind) -> Result<()> {
        match self.kind {
            Some(k) if k != kind => Err(ExpError::Config(format!(
                "config is for {}, not {}",
                k.name(),
                kind.name()
            ))),
            _ => Ok(()),
        }
    }

    /// The lattice text to route on.
    pub fn lattice_text(&self) -> Result<String> {
        match (&self.mirror.lattice, &self.mirror.lattice_file) {
            (Some(t), _) => Ok(t.clone()),
            (None, Some(f)) => {
                std::fs::read_to_string(f).map_err(|e| ExpError::Config(format!("{}: {e}", f.display())))
            }
            (None, None) => Ok(DEFAULT_LATTICE.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn default_round_trips() {
        let c = ExperimentConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
        assert!(text.contains("inf"));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(ExperimentConfig::from_toml("sede = 3"), Err(ExpError::Config(_))));
        assert!(ExperimentConfig::from_toml("[disorder]\nsigma = [1.0]").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        for doc in [
            "realizations = 0",
            "[disorder]\nsigma_d_nm = []",
            "[disorder]\nt1_ms = [0.0]",
            "[strong]\ng_range = [1.0, 0.5]",
            "[dipolar]\nn_total = [4]",
            "[bosonic]\nkt_over_omega = [-1.0]",
            "[mirror]\nsizes = [0]",
        ] {
            assert!(matches!(ExperimentConfig::from_toml(doc), Err(ExpError::Config(_))), "{doc}");
        }
    }

    #[test]
    fn kind_mismatch_is_config_error() {
        let c = ExperimentConfig::from_toml("kind = \"bosonic\"").unwrap();
        assert!(c.check_kind(ExperimentKind::Bosonic).is_ok());
        assert_eq!(c.check_kind(ExperimentKind::StrongScan).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        b.seed += 1;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }
}
