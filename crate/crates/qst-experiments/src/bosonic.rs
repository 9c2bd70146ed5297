//! Oscillator bus at finite temperature: swap amplitude, leaked noise and the
//! `g → g√(ω/kT)` rescaling.
//!
//! All chain oscillators and the target share the occupation `kT/ω`; the
//! registers sit at the chain frequency, which is taken as the frame
//! frequency, and couple to the middle mode of an odd chain.

use qst_core::chain::{build_single_particle_matrix, chain_matrix, ChainSpec, ModelKind};
use qst_core::dynamics::{bosonic_swap_and_thermal_error, eigenmodes, propagator, BosonicTransfer, ResonantModeChoice};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::error::{ExpError, Result};
use crate::table::{Outcome, ResultTable};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BosonicPoint {
    pub g: f64,
    pub kt_over_omega: f64,
    pub tau: f64,
    pub transfer: BosonicTransfer,
}

impl BosonicPoint {
    /// `ε ⟨n_ε⟩`, the thermal noise added to the target.
    pub fn excess_noise(&self) -> f64 {
        self.transfer.epsilon * self.transfer.leaked_occupation
    }
}

pub fn evaluate(n: usize, g: f64, kt_over_omega: f64, source_occupation: f64) -> Result<BosonicPoint> {
    if n % 2 == 0 {
        return Err(ExpError::Config("the bosonic demo needs an odd chain (zero-energy middle mode)".into()));
    }
    let spec = ChainSpec::uniform(ModelKind::Bosonic, n, 1.0, g);
    let modes = eigenmodes(&chain_matrix(&spec)?)?;
    let choice = ResonantModeChoice::matched(&modes, (n - 1) / 2, g)?;
    let spec = spec.with_registers(choice.g_left, choice.g_right);
    let m = propagator(&build_single_particle_matrix(&spec)?, choice.tau)?;
    let transfer = bosonic_swap_and_thermal_error(&m, source_occupation, &vec![kt_over_omega; n + 1])?;
    Ok(BosonicPoint {
        g,
        kt_over_omega,
        tau: choice.tau,
        transfer,
    })
}

pub fn run_bosonic_demo(config: &ExperimentConfig) -> Result<Outcome> {
    let b = &config.bosonic;
    let mut table = ResultTable::new(
        "thermal",
        &[
            "g_ref", "kt_over_omega", "rescaled", "g", "tau", "amplitude_re", "amplitude_im", "epsilon", "epsilon_over_g2",
            "leaked_occupation", "excess_noise", "excess_ratio_to_kt1", "n_out", "seed", "stream",
        ],
    );
    let mut spreads = Vec::new();
    for &g_ref in &b.g {
        for rescaled in [false, true] {
            let reference = evaluate(b.n, g_ref, 1.0, b.source_occupation)?.excess_noise();
            let mut ratios = Vec::new();
            for &x in &b.kt_over_omega {
                let g = if rescaled { g_ref / x.sqrt() } else { g_ref };
                let p = evaluate(b.n, g, x, b.source_occupation)?;
                let ratio = p.excess_noise() / reference;
                ratios.push(ratio);
                table.push(vec![
                    g_ref.into(),
                    x.into(),
                    rescaled.into(),
                    g.into(),
                    p.tau.into(),
                    p.transfer.amplitude.re.into(),
                    p.transfer.amplitude.im.into(),
                    p.transfer.epsilon.into(),
                    (p.transfer.epsilon / (g * g)).into(),
                    p.transfer.leaked_occupation.into(),
                    p.excess_noise().into(),
                    ratio.into(),
                    p.transfer.n_out.into(),
                    config.seed.into(),
                    0usize.into(),
                ]);
            }
            let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            spreads.push(json!({
                "g_ref": g_ref,
                "rescaled": rescaled,
                "max_ratio_to_kt1": hi,
                "min_ratio_to_kt1": lo,
            }));
        }
    }
    Ok(Outcome {
        tables: vec![table],
        notes: vec![
            format!("N = {}, registers resonant with the middle mode, tau_B = pi / (sqrt(2) t_z)", b.n),
            "occupation kT/omega on every chain oscillator and on the target; excess_noise = epsilon * <n_eps>".into(),
        ],
        summary: json!({ "excess_noise_spread": spreads }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_amplitude_is_minus_one() {
        let p = evaluate(9, 0.01, 1.0, 0.0).unwrap();
        assert!(p.transfer.amplitude.re < -0.999);
        assert!(p.transfer.amplitude.im.abs() < 1e-10);
    }

    #[test]
    fn zero_temperature_keeps_source_population() {
        let p = evaluate(9, 0.02, 1e-300, 2.0).unwrap();
        assert!((p.transfer.n_out - (1.0 - p.transfer.epsilon) * 2.0).abs() < 1e-12);
    }

    #[test]
    fn noise_grows_with_temperature_at_fixed_g() {
        let a = evaluate(9, 0.01, 1.0, 0.0).unwrap().excess_noise();
        let b = evaluate(9, 0.01, 100.0, 0.0).unwrap().excess_noise();
        assert!((b / a - 100.0).abs() < 1e-8);
    }

    #[test]
    fn even_chain_rejected() {
        assert!(evaluate(8, 0.01, 1.0, 0.0).is_err());
    }
}
