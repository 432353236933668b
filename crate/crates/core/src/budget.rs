//! End-to-end efficiency chain, Q-requirement inversion and noise floors.

use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use crate::constants::{angular_frequency, BOLTZMANN, PLANCK, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyChain {
    pub eta_zpl: f64,
    pub eta_dfg: f64,
    pub eta_spatial: f64,
    pub eta_tot: f64,
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::contract(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// `η_tot = η_ZPL · η_DFG · η_spatial`.
pub fn efficiency_chain(eta_zpl: f64, eta_dfg: f64, eta_spatial: f64) -> Result<EfficiencyChain> {
    unit_interval("eta_zpl", eta_zpl)?;
    unit_interval("eta_dfg", eta_dfg)?;
    unit_interval("eta_spatial", eta_spatial)?;
    Ok(EfficiencyChain { eta_zpl, eta_dfg, eta_spatial, eta_tot: eta_zpl * eta_dfg * eta_spatial })
}

/// Smallest Q giving `sin²(g_eff Q/ω1) = target`: `Q = ω1 arcsin(√target)/g_eff`.
pub fn required_q(target: f64, g_eff: f64, wavelength_nm: f64) -> Result<f64> {
    if target >= 1.0 {
        return Err(Error::Unreachable(target));
    }
    if !(target >= 0.0) {
        return Err(Error::contract(format!("target efficiency {target} must be non-negative")));
    }
    if !(g_eff > 0.0) {
        return Err(Error::contract("g_eff must be positive"));
    }
    Ok(angular_frequency(wavelength_nm) * target.sqrt().asin() / g_eff)
}

/// `f_R ≈ g_R I L_z`, with `g_R` in cm/GW, `I` in W/cm² and `L_z` in µm.
pub fn raman_fraction(gain_cm_per_gw: f64, intensity_w_cm2: f64, length_um: f64) -> f64 {
    let gain_m_per_w = gain_cm_per_gw * 1e-2 / 1e9;
    let intensity_w_m2 = intensity_w_cm2 * 1e4;
    let length_m = length_um * 1e-6;
    gain_m_per_w * intensity_w_m2 * length_m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leakage {
    pub power_w: f64,
    pub photon_rate: f64,
}

/// Residual pump after `extinction_db` of filtering, and its photon flux.
pub fn pump_leakage(power_w: f64, extinction_db: f64, wavelength_nm: f64) -> Leakage {
    let residual = power_w * 10f64.powf(-extinction_db / 10.0);
    let photon_energy = PLANCK * SPEED_OF_LIGHT / (wavelength_nm * 1e-9);
    Leakage { power_w: residual, photon_rate: residual / photon_energy }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalOccupancy {
    pub log10: f64,
    /// `10^log10`, which underflows to zero far below the f64 range.
    pub linear: f64,
}

/// Boltzmann factor `exp(−hc/(λ k_B T))`, evaluated in log space.
pub fn thermal_occupancy(wavelength_nm: f64, temperature_k: f64) -> Result<ThermalOccupancy> {
    if !(temperature_k > 0.0) {
        return Err(Error::contract("temperature must be positive"));
    }
    let x = PLANCK * SPEED_OF_LIGHT / (wavelength_nm * 1e-9 * BOLTZMANN * temperature_k);
    let log10 = -x / LN_10;
    Ok(ThermalOccupancy { log10, linear: 10f64.powf(log10) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub raman_fraction: f64,
    pub leakage_power_w: f64,
    pub leakage_photon_rate: f64,
    pub thermal: ThermalOccupancy,
}
