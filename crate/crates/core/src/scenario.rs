//! Scenario configuration: one strict document describing the device, pump,
//! hardware and analysis settings. Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::farfield::{CoherencePair, FarFieldModel, GridSpec, Normalization};
use crate::materials::{Chi2Tensor, MaterialTable};
use crate::pumpdesign::{PumpDesign, PumpHardware};
use crate::selection::{ResonatorSpec, WgmMode};

pub const PRESETS: [&str; 2] = ["paper-defaults", "high-q"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub resonator: ResonatorSpec,
    pub mode: WgmMode,
    #[serde(default)]
    pub write_in: WriteInConfig,
    pub pump: PumpConfig,
    #[serde(default)]
    pub hardware: PumpHardware,
    #[serde(default)]
    pub materials: MaterialsConfig,
    #[serde(default)]
    pub coupling: CouplingConfig,
    #[serde(default)]
    pub farfield: FarFieldConfig,
    #[serde(default)]
    pub feasibility: FeasibilityConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub jitter: JitterConfig,
}

/// The SFG write-in device differs from the read-out disk in radius and
/// signal wavelength; other geometry is shared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WriteInConfig {
    pub radius_um: f64,
    pub signal_nm: f64,
    pub n_core: f64,
    pub n_out: f64,
}

impl Default for WriteInConfig {
    fn default() -> Self {
        Self { radius_um: 1.66, signal_nm: 737.0, n_core: 2.4, n_out: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub sites: u32,
    /// Design harmonic ℓ (fringe order `2|M − ℓN|`).
    pub harmonic: i64,
    pub qplate_charge: i64,
    pub input_helicity: i64,
    pub annulus_radius_um: f64,
    pub waist_um: f64,
    pub total_power_mw: f64,
    /// Λ of the power-scaling law, s⁻¹·√(m²/W).
    pub lambda_scaling: f64,
}

impl PumpConfig {
    pub fn design(&self) -> PumpDesign {
        PumpDesign {
            total_charge: self.harmonic.abs() * self.sites as i64,
            qplate_charge: self.qplate_charge,
            input_helicity: self.input_helicity,
            annulus_radius_um: self.annulus_radius_um,
            waist_um: self.waist_um,
            total_power_mw: self.total_power_mw,
            sites: self.sites,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_path: Option<String>,
    pub d22_pm_per_v: f64,
    pub d31_pm_per_v: f64,
    pub chi_iso_pm_per_v: f64,
}

impl Default for MaterialsConfig {
    fn default() -> Self {
        Self { table_path: None, d22_pm_per_v: 2.1, d31_pm_per_v: -4.3, chi_iso_pm_per_v: 45.0 }
    }
}

impl MaterialsConfig {
    pub fn tensor(&self) -> Result<Chi2Tensor> {
        Chi2Tensor::new(self.d22_pm_per_v * 1e-12, self.d31_pm_per_v * 1e-12, self.chi_iso_pm_per_v * 1e-12)
            .map_err(|_| Error::config("materials.chi_iso_pm_per_v", "must be positive"))
    }

    /// The configured table, resolved relative to `base` when the path is relative.
    pub fn table(&self, base: Option<&Path>) -> Result<MaterialTable> {
        match &self.table_path {
            None => Ok(MaterialTable::builtin()),
            Some(p) => {
                let path = Path::new(p);
                let full = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.to_path_buf(),
                };
                MaterialTable::load(&full)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    /// Bright-mode rate `g_eff/2π` in MHz; derived from the power-scaling law when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_eff_mhz: Option<f64>,
    /// Interaction time; the cavity lifetime `Q/ω1` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_time_s: Option<f64>,
    #[serde(default = "one")]
    pub n_in: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldConfig {
    pub grid: GridSpec,
    pub model: FarFieldModel,
    pub normalization: Normalization,
    pub envelope: f64,
    /// `[R+, R−, L+, L−]`; the coupling report's populations when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub populations: Option<[f64; 4]>,
    /// Override for the pure-state coherences.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_r: Option<CoherencePair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence_l: Option<CoherencePair>,
    pub fringe_ring_deg: f64,
    pub collection_na: f64,
}

impl Default for FarFieldConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            model: FarFieldModel::Full,
            normalization: Normalization::Peak,
            envelope: 1.0,
            populations: None,
            coherence_r: None,
            coherence_l: None,
            fringe_ring_deg: 10.0,
            collection_na: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityConfig {
    /// When set, `M = round(2πR n_eff / λ_res)` replaces the mode's order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_eff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance_nm: Option<f64>,
    /// Light-line wavelength; the DFG output λ3 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission_nm: Option<f64>,
    pub sites_min: u32,
    pub sites_max: u32,
    pub ell_min: i64,
    pub ell_max: i64,
    /// Grid pitch for the addressable-site count.
    pub address_pitch_um: f64,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        Self {
            n_eff: None,
            resonance_nm: None,
            emission_nm: None,
            sites_min: 1,
            sites_max: 40,
            ell_min: -3,
            ell_max: 3,
            address_pitch_um: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub eta_zpl: f64,
    pub eta_spatial: f64,
    pub target_eta_dfg: f64,
    pub raman_gain_cm_per_gw: f64,
    /// Raman interaction length; the LiNbO₃ thickness when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raman_length_um: Option<f64>,
    pub extinction_db: f64,
    pub temperature_k: f64,
    pub detuning_ghz: f64,
    pub linewidth_ghz: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            eta_zpl: 0.99,
            eta_spatial: 0.70,
            target_eta_dfg: 0.1,
            raman_gain_cm_per_gw: 5.0,
            raman_length_um: None,
            extinction_db: 130.0,
            temperature_k: 5.0,
            detuning_ghz: 100.0,
            linewidth_ghz: 400.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JitterConfig {
    pub sigma_deg: f64,
    pub trials: u32,
}

impl Default for JitterConfig {
    fn default() -> Self {
        Self { sigma_deg: 5.0, trials: 1000 }
    }
}

impl Scenario {
    /// The read-out device with the 23-site pump at 1623 nm.
    pub fn paper_defaults() -> Self {
        Self {
            name: "paper-defaults".into(),
            seed: 0,
            resonator: ResonatorSpec::read_out_device(),
            mode: WgmMode { azimuthal_order: 21, radial_order: 1, longitudinal_order: 2, wavelength_nm: 736.0 },
            write_in: WriteInConfig::default(),
            pump: PumpConfig {
                sites: 23,
                harmonic: 1,
                qplate_charge: 5,
                input_helicity: 1,
                annulus_radius_um: 1.3,
                waist_um: 0.6,
                total_power_mw: 45.0,
                lambda_scaling: 230.0,
            },
            hardware: PumpHardware::default(),
            materials: MaterialsConfig::default(),
            coupling: CouplingConfig { g_eff_mhz: Some(60.0), interaction_time_s: None, n_in: 1.0 },
            farfield: FarFieldConfig::default(),
            feasibility: FeasibilityConfig::default(),
            budget: BudgetConfig::default(),
            jitter: JitterConfig::default(),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "paper-defaults" => Ok(Self::paper_defaults()),
            "high-q" => {
                let mut s = Self::paper_defaults();
                s.name = "high-q".into();
                s.resonator.quality_factor = 2.2e6;
                Ok(s)
            }
            other => {
                Err(Error::config("preset", format!("unknown preset `{other}`; available: {}", PRESETS.join(", "))))
            }
        }
    }

    /// Parses TOML, or JSON when `json` is set, and validates the result.
    pub fn parse(text: &str, json: bool) -> Result<Self> {
        let s: Scenario = if json {
            serde_json::from_str(text).map_err(|e| Error::config(format!("line {}", e.line()), e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::config("toml", e.to_string().trim_end().to_string()))?
        };
        s.validate()?;
        Ok(s)
    }

    /// Loads a scenario file; `.json` selects JSON, anything else TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        Self::parse(&text, json)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.resonator.validate().map_err(|e| prefix("resonator", e))?;
        self.mode.validate().map_err(|e| prefix("mode", e))?;
        self.hardware.validate()?;
        self.pump.design().validate()?;
        if self.pump.harmonic == 0 {
            return Err(Error::config("pump.harmonic", "must be non-zero"));
        }
        if !(self.pump.lambda_scaling > 0.0) {
            return Err(Error::config("pump.lambda_scaling", "must be positive"));
        }
        if self.hardware.pump_nm <= self.mode.wavelength_nm {
            return Err(Error::config(
                "hardware.pump_nm",
                format!("must exceed the signal wavelength {} nm for DFG", self.mode.wavelength_nm),
            ));
        }
        let w = &self.write_in;
        if !(w.radius_um > 0.0 && w.signal_nm > 0.0) {
            return Err(Error::config("write_in", "radius_um and signal_nm must be positive"));
        }
        if !(w.n_out >= 1.0 && w.n_core > w.n_out) {
            return Err(Error::config("write_in.n_core", "need n_core > n_out ≥ 1"));
        }
        if w.signal_nm >= self.hardware.pump_nm {
            return Err(Error::config("write_in.signal_nm", "must be shorter than the pump wavelength"));
        }
        self.materials.tensor()?;
        let c = &self.coupling;
        if let Some(g) = c.g_eff_mhz {
            if !(g > 0.0) {
                return Err(Error::config("coupling.g_eff_mhz", "must be positive"));
            }
        }
        if let Some(t) = c.interaction_time_s {
            if !(t >= 0.0) {
                return Err(Error::config("coupling.interaction_time_s", "must be non-negative"));
            }
        }
        if !(c.n_in >= 0.0) {
            return Err(Error::config("coupling.n_in", "must be non-negative"));
        }
        let f = &self.farfield;
        f.grid.validate()?;
        if !(f.envelope >= 0.0) {
            return Err(Error::config("farfield.envelope", "must be non-negative"));
        }
        if let Some(p) = f.populations {
            if p.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::config("farfield.populations", "must be non-negative"));
            }
        }
        if !(f.fringe_ring_deg > 0.0 && f.fringe_ring_deg <= f.grid.theta_max_deg) {
            return Err(Error::config("farfield.fringe_ring_deg", "must lie in (0, theta_max_deg]"));
        }
        if !(f.collection_na > 0.0 && f.collection_na <= 1.0) {
            return Err(Error::config("farfield.collection_na", "must lie in (0, 1]"));
        }
        let fe = &self.feasibility;
        if fe.sites_min == 0 || fe.sites_min > fe.sites_max {
            return Err(Error::config("feasibility.sites_min", "need 1 ≤ sites_min ≤ sites_max"));
        }
        if fe.ell_min > fe.ell_max {
            return Err(Error::config("feasibility.ell_min", "need ell_min ≤ ell_max"));
        }
        if !(fe.address_pitch_um > 0.0) {
            return Err(Error::config("feasibility.address_pitch_um", "must be positive"));
        }
        for (key, v) in [
            ("feasibility.n_eff", fe.n_eff),
            ("feasibility.resonance_nm", fe.resonance_nm),
            ("feasibility.emission_nm", fe.emission_nm),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::config(key, "must be positive"));
                }
            }
        }
        let b = &self.budget;
        for (key, v) in [("budget.eta_zpl", b.eta_zpl), ("budget.eta_spatial", b.eta_spatial)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(key, format!("must lie in [0, 1], got {v}")));
            }
        }
        if !(b.target_eta_dfg > 0.0 && b.target_eta_dfg < 1.0) {
            return Err(Error::config("budget.target_eta_dfg", "must lie in (0, 1)"));
        }
        for (key, v) in [
            ("budget.raman_gain_cm_per_gw", b.raman_gain_cm_per_gw),
            ("budget.extinction_db", b.extinction_db),
            ("budget.detuning_ghz", b.detuning_ghz),
        ] {
            if !(v >= 0.0) {
                return Err(Error::config(key, "must be non-negative"));
            }
        }
        if !(b.temperature_k > 0.0) {
            return Err(Error::config("budget.temperature_k", "must be positive"));
        }
        if !(b.linewidth_ghz > 0.0) {
            return Err(Error::config("budget.linewidth_ghz", "must be positive"));
        }
        if let Some(l) = b.raman_length_um {
            if !(l >= 0.0) {
                return Err(Error::config("budget.raman_length_um", "must be non-negative"));
            }
        }
        if self.jitter.trials < 100 {
            return Err(Error::config("jitter.trials", "must be at least 100"));
        }
        if !(self.jitter.sigma_deg >= 0.0) {
            return Err(Error::config("jitter.sigma_deg", "must be non-negative"));
        }
        Ok(())
    }

    /// The write-in resonator: read-out geometry with the write-in radius and indices.
    pub fn write_in_resonator(&self) -> ResonatorSpec {
        ResonatorSpec {
            radius_um: self.write_in.radius_um,
            n_core: self.write_in.n_core,
            n_out: self.write_in.n_out,
            ..self.resonator
        }
    }

    /// A copy with the dotted `path` set to `value`, re-validated.
    pub fn with_parameter(&self, path: &str, value: &Value) -> Result<Self> {
        let mut doc = serde_json::to_value(self).expect("scenario serialises to JSON");
        let segments: Vec<&str> = path.split('.').collect();
        if segments.iter().any(|s| s.is_empty()) {
            return Err(Error::config(path, "malformed parameter path"));
        }
        let (last, parents) = segments.split_last().expect("non-empty path");
        let mut node = &mut doc;
        for seg in parents {
            node = node
                .get_mut(*seg)
                .filter(|n| n.is_object())
                .ok_or_else(|| Error::config(path, format!("unknown parameter path (no section `{seg}`)")))?;
        }
        let obj = node.as_object_mut().ok_or_else(|| Error::config(path, "unknown parameter path"))?;
        obj.insert((*last).to_string(), value.clone());
        let updated: Scenario = serde_json::from_value(doc).map_err(|e| {
            let msg = e.to_string();
            if msg.contains("unknown field") {
                Error::config(path, "unknown parameter path")
            } else {
                Error::config(path, msg)
            }
        })?;
        updated.validate()?;
        Ok(updated)
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::Config { path, reason } => Error::Config { path: format!("{section}.{path}"), reason },
        other => other,
    }
}
