//! Command drivers: each turns a [`Scenario`] into a serialisable report,
//! plus the warnings raised by the documented open questions it touches.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::budget::{
    efficiency_chain, pump_leakage, raman_fraction, required_q, thermal_occupancy, EfficiencyChain, NoiseReport,
};
use crate::coupling::{
    cavity_interaction_time, geff_from_power, rabi_efficiency, split_by_tensor, CouplingReport, PowerScaling,
};
use crate::error::{Error, Result};
use crate::farfield::{
    intensity_isotropic, intensity_map, phase_jitter_peak_drop, spatial_efficiency, EmissionState, FarFieldDesign,
    FarFieldGrid, FarFieldModel, IsotropicOrders, JitterDesign, JitterResult, Normalization,
};
use crate::materials::{contract_tensor, CircularCoefficients, MaterialTable};
use crate::pumpdesign::{
    addressable_sites, detuning_efficiency, diffraction_limited_waist_um, feasibility_map, na_required,
    pump_na_fraction, pupil_cutoff, qplate_min_charge, site_intensity, steering_span, FeasibilityInputs,
    FeasibilityRecord, PupilCutoff, SiteIntensity,
};
use crate::scenario::Scenario;
use crate::selection::{
    dfg_channel_set, dfg_output_wavelength, dfg_window, effective_index, fringe_order, sfg_channel_set, sfg_window,
    ChannelSet, Direction, EmissionOrders, FringeOrder, Helicity,
};

pub const TOOL_NAME: &str = "vbg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// The only report key whose value depends on wall-clock time.
pub const TIMESTAMP_KEY: &str = "generated_unix_s";

/// Quoted values that this crate does not recompute: full-wave spectra and
/// measured collection figures.
pub const REFERENCE_CONSTANTS: [ReferenceConstant; 6] = [
    ReferenceConstant {
        name: "classical_conversion_efficiency",
        value: 0.17,
        unit: "",
        note: "full-wave read-out simulation",
    },
    ReferenceConstant { name: "neighbour_mode_nm", value: 730.0, unit: "nm", note: "full-wave read-out spectrum" },
    ReferenceConstant { name: "neighbour_mode_nm", value: 747.0, unit: "nm", note: "full-wave read-out spectrum" },
    ReferenceConstant { name: "neighbour_mode_nm", value: 751.0, unit: "nm", note: "full-wave read-out spectrum" },
    ReferenceConstant {
        name: "spatial_coupling_headline",
        value: 0.93,
        unit: "",
        note: "quoted collection efficiency for N = 23",
    },
    ReferenceConstant {
        name: "spatial_coupling_budget",
        value: 0.70,
        unit: "",
        note: "collection efficiency used in the budget",
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceConstant {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
    pub note: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub id: String,
    pub message: String,
}

impl Warning {
    fn new(id: &str, message: impl Into<String>) -> Self {
        Self { id: id.to_string(), message: message.into() }
    }
}

/// Open-question identifiers that warnings may carry.
pub const WARNING_IDS: [&str; 12] = [
    "OQ-CHI-ISO",
    "OQ-ORDER-SIGN",
    "OQ-KERR",
    "OQ-NORM",
    "OQ-VPHI",
    "OQ-SPATIAL",
    "OQ-ENVELOPE",
    "OQ-NA-REQ",
    "OQ-QPLATE",
    "OQ-ISITE",
    "OQ-EXTINCTION",
    "OQ-FULLWAVE",
];

/// Envelope written for every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: String,
    pub scenario: Scenario,
    pub result: Value,
    pub warnings: Vec<Warning>,
    pub generated_unix_s: u64,
}

impl RunReport {
    pub fn new(
        command: &str,
        scenario: &Scenario,
        result: Value,
        warnings: Vec<Warning>,
        generated_unix_s: u64,
    ) -> Self {
        Self {
            tool: TOOL_NAME,
            version: VERSION,
            schema_version: REPORT_SCHEMA_VERSION,
            command: command.to_string(),
            scenario: scenario.clone(),
            result,
            warnings,
            generated_unix_s,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

fn warn_chi_iso(s: &Scenario, out: &mut Vec<Warning>) -> Result<()> {
    let t = s.materials.tensor()?;
    let rms = contract_tensor(&t).rms();
    if (t.chi_iso - rms).abs() > 0.01 * rms {
        out.push(Warning::new(
            "OQ-CHI-ISO",
            format!(
                "chi_iso = {:.3e} m/V differs from the RMS {:.3e} m/V of the circular d coefficients; both are kept",
                t.chi_iso, rms
            ),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexLookup {
    pub material: String,
    pub wavelength_nm: f64,
    pub index: f64,
}

fn index_lookups(table: &MaterialTable, wavelengths: &[f64]) -> Vec<IndexLookup> {
    let materials: Vec<String> = table.materials().map(str::to_string).collect();
    let mut out = Vec::new();
    for m in &materials {
        for &w in wavelengths {
            if let Ok(index) = table.lookup_index(m, w) {
                out.push(IndexLookup { material: m.clone(), wavelength_nm: w, index });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfgWindowEntry {
    pub direction: Direction,
    pub helicity: Helicity,
    pub ells: Vec<i64>,
    pub orders: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SfgWindowEntry {
    pub direction: Direction,
    pub helicity: Helicity,
    pub ells: Vec<i64>,
    pub guided_orders: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadOutSection {
    pub output_nm: f64,
    pub n_eff: f64,
    pub light_line_order: f64,
    pub windows: Vec<DfgWindowEntry>,
    pub channels: ChannelSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WriteInSection {
    pub signal_nm: f64,
    pub telecom_nm: f64,
    pub radius_um: f64,
    pub windows: Vec<SfgWindowEntry>,
    pub guided_orders: Vec<u32>,
    pub channels: ChannelSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSection {
    pub m_wgm: u32,
    pub sites: u32,
    pub harmonic: i64,
    pub fringe: FringeOrder,
    pub emission_orders: EmissionOrders,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaterialsSection {
    pub indices: Vec<IndexLookup>,
    pub circular: CircularCoefficients,
    pub circular_rms_m_per_v: f64,
    pub chi_iso_m_per_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub read_out: ReadOutSection,
    pub write_in: WriteInSection,
    pub design: DesignSection,
    pub materials: MaterialsSection,
}

pub fn run_selection(s: &Scenario, base: Option<&Path>) -> Result<(SelectionReport, Vec<Warning>)> {
    let mode = s.mode;
    let pump_nm = s.hardware.pump_nm;
    let spec = s.resonator;
    let sites = s.pump.sites;
    let dfg = dfg_channel_set(&spec, &mode, sites, pump_nm)?;
    dfg.verify(&spec)?;
    let mut windows = Vec::new();
    for direction in Direction::ALL {
        for helicity in Helicity::ALL {
            let ells = dfg_window(&spec, mode.azimuthal_order, sites, dfg.output_nm, direction, helicity);
            let orders = ells
                .iter()
                .map(|&l| crate::selection::dfg_order(mode.azimuthal_order, sites, l, direction, helicity))
                .collect();
            windows.push(DfgWindowEntry { direction, helicity, ells, orders });
        }
    }
    let read_out = ReadOutSection {
        output_nm: dfg.output_nm,
        n_eff: effective_index(mode.azimuthal_order, mode.wavelength_nm, spec.radius_um),
        light_line_order: 2.0 * PI * spec.radius_um / (dfg.output_nm * 1e-3),
        windows,
        channels: dfg,
    };

    let w_spec = s.write_in_resonator();
    let w_mode = crate::selection::WgmMode { wavelength_nm: s.write_in.signal_nm, ..mode };
    let sfg = sfg_channel_set(&w_spec, &w_mode, sites, pump_nm)?;
    sfg.verify(&w_spec)?;
    let mut sfg_windows = Vec::new();
    for direction in Direction::ALL {
        for helicity in Helicity::ALL {
            let sol = sfg_window(&w_spec, sites, s.write_in.signal_nm, direction, helicity);
            sfg_windows.push(SfgWindowEntry {
                direction,
                helicity,
                ells: sol.iter().map(|p| p.0).collect(),
                guided_orders: sol.iter().map(|p| p.1).collect(),
            });
        }
    }
    let mut guided: Vec<u32> = sfg_windows.iter().flat_map(|w| w.guided_orders.iter().copied()).collect();
    guided.sort_unstable();
    guided.dedup();
    let write_in = WriteInSection {
        signal_nm: s.write_in.signal_nm,
        telecom_nm: sfg.output_nm,
        radius_um: w_spec.radius_um,
        windows: sfg_windows,
        guided_orders: guided,
        channels: sfg,
    };

    let design = DesignSection {
        m_wgm: mode.azimuthal_order,
        sites,
        harmonic: s.pump.harmonic,
        fringe: fringe_order(mode.azimuthal_order, sites, s.pump.harmonic),
        emission_orders: EmissionOrders::for_design(mode.azimuthal_order, sites, s.pump.harmonic),
    };

    let table = s.materials.table(base)?;
    let tensor = s.materials.tensor()?;
    let circular = contract_tensor(&tensor);
    let materials = MaterialsSection {
        indices: index_lookups(&table, &[mode.wavelength_nm, read_out.output_nm, pump_nm]),
        circular,
        circular_rms_m_per_v: circular.rms(),
        chi_iso_m_per_v: tensor.chi_iso,
    };

    let mut warnings = Vec::new();
    warn_chi_iso(s, &mut warnings)?;
    warnings.push(Warning::new(
        "OQ-ORDER-SIGN",
        "harmonic signs follow the window inequalities (CW channels use −ℓ, CCW +ℓ); the design harmonic is reported as |ℓ|",
    ));
    warnings.push(Warning::new(
        "OQ-KERR",
        "pump-induced Kerr-like shifts of the write-in azimuthal order are not modelled",
    ));
    Ok((SelectionReport { read_out, write_in, design, materials }, warnings))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GEffSource {
    Config,
    PowerScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeSource {
    Config,
    CavityLifetime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSection {
    pub g_eff_source: GEffSource,
    pub g_eff_rad_s: f64,
    pub g_eff_power_scaling_rad_s: f64,
    pub time_source: TimeSource,
    pub interaction_time_s: f64,
    pub eta_dfg: f64,
    pub channels: CouplingReport,
}

pub fn coupling_section(s: &Scenario) -> Result<CouplingSection> {
    let power = geff_from_power(&PowerScaling {
        lambda: s.pump.lambda_scaling,
        total_power_w: s.pump.total_power_mw * 1e-3,
        sites: s.pump.sites,
        waist_um: s.pump.waist_um,
    })?;
    let (g_eff_source, g) = match s.coupling.g_eff_mhz {
        Some(mhz) => (GEffSource::Config, 2.0 * PI * mhz * 1e6),
        None => (GEffSource::PowerScaling, power),
    };
    let (time_source, t) = match s.coupling.interaction_time_s {
        Some(t) => (TimeSource::Config, t),
        None => (TimeSource::CavityLifetime, cavity_interaction_time(s.resonator.quality_factor, s.mode.wavelength_nm)),
    };
    let coeffs = contract_tensor(&s.materials.tensor()?);
    let pair = split_by_tensor(g, &coeffs);
    let channels = CouplingReport::new(pair, pair, t, s.coupling.n_in)?;
    Ok(CouplingSection {
        g_eff_source,
        g_eff_rad_s: g,
        g_eff_power_scaling_rad_s: power,
        time_source,
        interaction_time_s: t,
        eta_dfg: rabi_efficiency(g, t),
        channels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatialSection {
    pub na: f64,
    pub value: f64,
    pub grid_theta_max_deg: f64,
    pub reference_budget: f64,
    pub reference_headline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FarFieldReport {
    pub model: FarFieldModel,
    pub design: FarFieldDesign,
    pub orders: [i64; 4],
    pub populations: [f64; 4],
    pub fringe_ring_deg: f64,
    pub fringe_count: u32,
    pub expected_fringe_order: u32,
    pub on_axis_bright: bool,
    pub peak_raw: f64,
    pub spatial: SpatialSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter: Option<JitterResult>,
    pub seed: u64,
}

pub struct FarFieldOutput {
    pub grid: FarFieldGrid,
    pub report: FarFieldReport,
}

fn build_grid(
    s: &Scenario,
    design: &FarFieldDesign,
    model: FarFieldModel,
    spec: &crate::farfield::GridSpec,
    populations: [f64; 4],
) -> Result<FarFieldGrid> {
    let f = &s.farfield;
    match model {
        FarFieldModel::Full => {
            let mut state = EmissionState::coherent(&design.orders(), populations);
            if let Some(c) = f.coherence_r {
                state.coherence_r = c;
            }
            if let Some(c) = f.coherence_l {
                state.coherence_l = c;
            }
            intensity_map(design, &state, spec, f.envelope, f.normalization)
        }
        FarFieldModel::Isotropic => {
            let orders = IsotropicOrders::for_design(design.m_wgm, design.sites);
            let amplitude = f.envelope * populations.iter().sum::<f64>() / 4.0;
            intensity_isotropic(design, &orders, spec, amplitude, f.normalization)
        }
    }
}

pub fn run_farfield(s: &Scenario, model: Option<FarFieldModel>) -> Result<(FarFieldOutput, Vec<Warning>)> {
    let model = model.unwrap_or(s.farfield.model);
    let output_nm = dfg_output_wavelength(s.mode.wavelength_nm, s.hardware.pump_nm)?;
    let design = FarFieldDesign {
        m_wgm: s.mode.azimuthal_order,
        sites: s.pump.sites,
        ell: s.pump.harmonic,
        output_nm,
        radius_um: s.resonator.radius_um,
    };
    let populations = match s.farfield.populations {
        Some(p) => p,
        None => coupling_section(s)?.channels.populations(),
    };
    let mut grid = build_grid(s, &design, model, &s.farfield.grid, populations)?;
    grid.metadata.seed = Some(s.seed);
    let hemisphere = build_grid(s, &design, model, &s.farfield.grid.hemisphere(), populations)?;
    let spatial = SpatialSection {
        na: s.farfield.collection_na,
        value: spatial_efficiency(&hemisphere, s.farfield.collection_na)?,
        grid_theta_max_deg: 90.0,
        reference_budget: 0.70,
        reference_headline: 0.93,
    };
    let fringe_order = fringe_order(design.m_wgm, design.sites, design.ell);
    let orders = design.orders();
    let jitter = if model == FarFieldModel::Full && orders.as_array().contains(&0) {
        Some(phase_jitter_peak_drop(
            s.jitter.sigma_deg,
            s.jitter.trials,
            &JitterDesign { m_wgm: design.m_wgm, sites: design.sites, ell: design.ell },
            s.seed,
        )?)
    } else {
        None
    };
    let report = FarFieldReport {
        model,
        design,
        orders: grid.metadata.orders,
        populations,
        fringe_ring_deg: s.farfield.fringe_ring_deg,
        fringe_count: grid.fringe_count(s.farfield.fringe_ring_deg)?,
        expected_fringe_order: fringe_order.delta_m,
        on_axis_bright: grid.on_axis_bright(),
        peak_raw: grid.peak_raw,
        spatial,
        jitter,
        seed: s.seed,
    };
    let mut warnings = vec![Warning::new(
        "OQ-SPATIAL",
        format!(
            "collection efficiency inside NA {} is {:.4} for this paraxial pattern; the quoted figures 0.93 and 0.70 are kept as references",
            spatial.na, spatial.value
        ),
    )];
    if s.farfield.normalization == Normalization::Raw || s.farfield.envelope != 1.0 {
        warnings.push(Warning::new(
            "OQ-ENVELOPE",
            "absolute intensities depend on an envelope whose prefactor is not uniquely defined; only normalised shapes are meaningful",
        ));
    }
    warnings.push(Warning::new(
        "OQ-FULLWAVE",
        "full-wave spectra and measured collection figures are reference constants and are not recomputed",
    ));
    Ok((FarFieldOutput { grid, report }, warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardwareSection {
    pub pump_charge: i64,
    pub na_required: f64,
    pub na_required_reference: f64,
    pub pupil: PupilCutoff,
    pub qplate_charge: i64,
    pub qplate_min_charge: u32,
    pub slm_charge: i64,
    pub na_phase: f64,
    pub eta_pump: f64,
    pub eta_pump_without_qplate: f64,
    pub steering_span_mm: f64,
    pub address_pitch_um: f64,
    pub addressable_sites: u64,
    pub diffraction_limited_waist_um: f64,
    pub site_intensity: SiteIntensity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub m_wgm: u32,
    pub m_from_n_eff: bool,
    pub emission_nm: f64,
    pub na: f64,
    pub radius_um: f64,
    pub sites_range: [u32; 2],
    pub ell_range: [i64; 2],
    pub cells: usize,
    pub radiative_cells: usize,
    pub highlighted: Vec<[i64; 2]>,
    pub hardware: HardwareSection,
}

pub struct FeasibilityOutput {
    pub records: Vec<FeasibilityRecord>,
    pub report: FeasibilityReport,
}

pub fn hardware_section(s: &Scenario) -> HardwareSection {
    let hw = &s.hardware;
    let design = s.pump.design();
    let r0 = design.annulus_radius_um;
    let m = design.total_charge;
    let k0 = hw.k0();
    let span = steering_span(hw.focal_length_mm, hw.na_cap);
    HardwareSection {
        pump_charge: m,
        na_required: na_required(m, hw.pump_nm, r0),
        na_required_reference: 2.8,
        pupil: pupil_cutoff(hw),
        qplate_charge: design.qplate_charge,
        qplate_min_charge: qplate_min_charge(m, k0, r0, hw.na_cap),
        slm_charge: design.slm_charge(),
        na_phase: na_required(design.slm_charge(), hw.pump_nm, r0),
        eta_pump: pump_na_fraction(design.slm_charge(), r0, k0, hw.na_cap),
        eta_pump_without_qplate: pump_na_fraction(m, r0, k0, hw.na_cap),
        steering_span_mm: span,
        address_pitch_um: s.feasibility.address_pitch_um,
        addressable_sites: addressable_sites(span, s.feasibility.address_pitch_um),
        diffraction_limited_waist_um: diffraction_limited_waist_um(hw.pump_nm, hw.na_cap),
        site_intensity: site_intensity(design.total_power_mw * 1e-3, design.sites, design.waist_um),
    }
}

fn hardware_warnings(h: &HardwareSection, out: &mut Vec<Warning>) {
    out.push(Warning::new(
        "OQ-NA-REQ",
        format!(
            "NA_req = |m|λp/(2πr0) = {:.3} for m = {}; the quoted reference is {:.1}",
            h.na_required, h.pump_charge, h.na_required_reference
        ),
    ));
    if (h.qplate_charge.max(0) as u32) < h.qplate_min_charge {
        out.push(Warning::new(
            "OQ-QPLATE",
            format!(
                "configured q-plate charge {} is below q_min = {} from the formula; the residual SLM charge {} still exceeds the objective NA",
                h.qplate_charge, h.qplate_min_charge, h.slm_charge
            ),
        ));
    }
    out.push(Warning::new(
        "OQ-ISITE",
        format!(
            "per-site intensity is {:.3e} W/cm² without and {:.3e} W/cm² with the Gaussian factor 2; both conventions are reported",
            h.site_intensity.without_factor_two, h.site_intensity.gaussian_peak
        ),
    ));
}

pub fn run_feasibility(s: &Scenario) -> Result<(FeasibilityOutput, Vec<Warning>)> {
    let f = &s.feasibility;
    let output_nm = dfg_output_wavelength(s.mode.wavelength_nm, s.hardware.pump_nm)?;
    let resonance_nm = f.resonance_nm.unwrap_or(s.mode.wavelength_nm);
    let (m_wgm, m_from_n_eff) = match f.n_eff {
        Some(n) => ((2.0 * PI * s.resonator.radius_um * n / (resonance_nm * 1e-3)).round() as u32, true),
        None => (s.mode.azimuthal_order, false),
    };
    let inputs = FeasibilityInputs {
        m_wgm,
        radius_um: s.resonator.radius_um,
        emission_nm: f.emission_nm.unwrap_or(output_nm),
        na: s.hardware.na_cap,
        pump_nm: s.hardware.pump_nm,
        annulus_radius_um: s.pump.annulus_radius_um,
        qplate_charge: s.pump.qplate_charge,
        input_helicity: s.pump.input_helicity,
    };
    let records = feasibility_map(&inputs, f.sites_min..=f.sites_max, f.ell_min..=f.ell_max)?;
    let highlighted = records.iter().filter(|r| r.delta_m_pm2).map(|r| [r.sites as i64, r.ell]).collect();
    let hardware = hardware_section(s);
    let mut warnings = Vec::new();
    hardware_warnings(&hardware, &mut warnings);
    let report = FeasibilityReport {
        m_wgm,
        m_from_n_eff,
        emission_nm: inputs.emission_nm,
        na: inputs.na,
        radius_um: inputs.radius_um,
        sites_range: [f.sites_min, f.sites_max],
        ell_range: [f.ell_min, f.ell_max],
        cells: records.len(),
        radiative_cells: records.iter().filter(|r| r.radiative).count(),
        highlighted,
        hardware,
    };
    Ok((FeasibilityOutput { records, report }, warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: &'static str,
    pub value: f64,
    pub unit: &'static str,
    pub formula: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementSection {
    pub target_eta_dfg: f64,
    pub required_q: f64,
    pub required_g_eff_at_fixed_q_rad_s: f64,
    pub chain_at_target: EfficiencyChain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseInputs {
    pub raman_gain_cm_per_gw: f64,
    pub raman_intensity_w_cm2: f64,
    pub raman_length_um: f64,
    pub pump_power_w: f64,
    pub extinction_db: f64,
    pub pump_nm: f64,
    pub thermal_wavelength_nm: f64,
    pub temperature_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub coupling: CouplingSection,
    pub efficiency: EfficiencyChain,
    pub requirement: RequirementSection,
    pub detuning_ghz: f64,
    pub linewidth_ghz: f64,
    pub eta_dfg_at_detuning: f64,
    pub noise_inputs: NoiseInputs,
    pub noise: NoiseReport,
    pub site_intensity: SiteIntensity,
    pub quantities: Vec<Quantity>,
    pub reference_constants: Vec<ReferenceConstant>,
}

pub fn run_budget(s: &Scenario) -> Result<(BudgetReport, Vec<Warning>)> {
    let b = &s.budget;
    let coupling = coupling_section(s)?;
    let efficiency = efficiency_chain(b.eta_zpl, coupling.eta_dfg, b.eta_spatial)?;
    let q = required_q(b.target_eta_dfg, coupling.g_eff_rad_s, s.mode.wavelength_nm)?;
    let requirement = RequirementSection {
        target_eta_dfg: b.target_eta_dfg,
        required_q: q,
        required_g_eff_at_fixed_q_rad_s: b.target_eta_dfg.sqrt().asin() / coupling.interaction_time_s,
        chain_at_target: efficiency_chain(b.eta_zpl, b.target_eta_dfg, b.eta_spatial)?,
    };
    let power_w = s.pump.total_power_mw * 1e-3;
    let sites = site_intensity(power_w, s.pump.sites, s.pump.waist_um);
    let noise_inputs = NoiseInputs {
        raman_gain_cm_per_gw: b.raman_gain_cm_per_gw,
        raman_intensity_w_cm2: sites.without_factor_two,
        raman_length_um: b.raman_length_um.unwrap_or(s.resonator.linbo3_thickness_nm * 1e-3),
        pump_power_w: power_w,
        extinction_db: b.extinction_db,
        pump_nm: s.hardware.pump_nm,
        thermal_wavelength_nm: s.mode.wavelength_nm,
        temperature_k: b.temperature_k,
    };
    let leak = pump_leakage(power_w, b.extinction_db, s.hardware.pump_nm);
    let noise = NoiseReport {
        raman_fraction: raman_fraction(
            b.raman_gain_cm_per_gw,
            noise_inputs.raman_intensity_w_cm2,
            noise_inputs.raman_length_um,
        ),
        leakage_power_w: leak.power_w,
        leakage_photon_rate: leak.photon_rate,
        thermal: thermal_occupancy(s.mode.wavelength_nm, b.temperature_k)?,
    };
    let eta_dfg_at_detuning = detuning_efficiency(coupling.eta_dfg, b.detuning_ghz, b.linewidth_ghz)?;
    let quantities = vec![
        Quantity {
            name: "interaction_time",
            value: coupling.interaction_time_s,
            unit: "s",
            formula: "T = Q/ω1",
            reference_value: Some(3.9e-13),
        },
        Quantity {
            name: "eta_dfg",
            value: coupling.eta_dfg,
            unit: "",
            formula: "η = sin²(g_eff T)",
            reference_value: Some(2.2e-8),
        },
        Quantity {
            name: "eta_tot",
            value: efficiency.eta_tot,
            unit: "",
            formula: "η_tot = η_ZPL η_DFG η_spatial",
            reference_value: Some(1.5e-8),
        },
        Quantity {
            name: "required_q",
            value: q,
            unit: "",
            formula: "Q = ω1 arcsin(√η*)/g_eff",
            reference_value: Some(2.2e6),
        },
        Quantity {
            name: "eta_tot_at_target",
            value: requirement.chain_at_target.eta_tot,
            unit: "",
            formula: "η_tot = η_ZPL η* η_spatial",
            reference_value: Some(0.069),
        },
        Quantity {
            name: "g_eff_power_scaling",
            value: coupling.g_eff_power_scaling_rad_s,
            unit: "rad/s",
            formula: "G = Λ √(N P_tot)/w0",
            reference_value: Some(2.0 * PI * 60e6),
        },
        Quantity {
            name: "raman_fraction",
            value: noise.raman_fraction,
            unit: "",
            formula: "f_R = g_R I L_z",
            reference_value: Some(3e-8),
        },
        Quantity {
            name: "leakage_power",
            value: noise.leakage_power_w,
            unit: "W",
            formula: "P 10^(−dB/10)",
            reference_value: Some(4e-15),
        },
        Quantity {
            name: "leakage_photon_rate",
            value: noise.leakage_photon_rate,
            unit: "1/s",
            formula: "P_res λ/(hc)",
            reference_value: Some(3.7e4),
        },
        Quantity {
            name: "thermal_log10",
            value: noise.thermal.log10,
            unit: "",
            formula: "log10 exp(−hc/(λ k_B T))",
            reference_value: Some(-80.0),
        },
        Quantity {
            name: "eta_dfg_at_detuning",
            value: eta_dfg_at_detuning,
            unit: "",
            formula: "η0/(1 + (2Δ/κ)²)",
            reference_value: None,
        },
    ];
    let mut warnings = Vec::new();
    warn_chi_iso(s, &mut warnings)?;
    warnings.push(Warning::new(
        "OQ-NORM",
        match coupling.g_eff_source {
            GEffSource::Config => {
                "mode normalisations are not known numerically; g_eff is taken from the configured rate"
            }
            GEffSource::PowerScaling => {
                "mode normalisations are not known numerically; g_eff follows the power-scaling law"
            }
        },
    ));
    if coupling.time_source == TimeSource::Config {
        warnings.push(Warning::new(
            "OQ-VPHI",
            "interaction time supplied directly; the azimuthal group velocity is not modelled",
        ));
    }
    warnings.push(Warning::new(
        "OQ-SPATIAL",
        format!("η_spatial = {} taken from config; the headline collection figure is 0.93", b.eta_spatial),
    ));
    warnings.push(Warning::new(
        "OQ-ISITE",
        format!(
            "Raman estimate uses the per-site intensity {:.3e} W/cm² without the Gaussian factor 2 ({:.3e} W/cm² with it)",
            sites.without_factor_two, sites.gaussian_peak
        ),
    ));
    warnings.push(Warning::new(
        "OQ-EXTINCTION",
        format!(
            "leakage evaluated at {} dB; the quoted residual of 4e-15 W from 45 mW implies about 130 dB, while the stated filter spec is > 120 dB",
            b.extinction_db
        ),
    ));
    Ok((
        BudgetReport {
            coupling,
            efficiency,
            requirement,
            detuning_ghz: b.detuning_ghz,
            linewidth_ghz: b.linewidth_ghz,
            eta_dfg_at_detuning,
            noise_inputs,
            noise,
            site_intensity: sites,
            quantities,
            reference_constants: REFERENCE_CONSTANTS.to_vec(),
        },
        warnings,
    ))
}

/// Scalars recorded per sweep point in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub delta_m: u32,
    pub on_axis: bool,
    pub dfg_output_nm: f64,
    pub g_eff_rad_s: f64,
    pub g_eff_power_scaling_rad_s: f64,
    pub eta_dfg: f64,
    pub eta_tot: f64,
}

pub fn sweep_summary(s: &Scenario) -> Result<SweepSummary> {
    let fringe = fringe_order(s.mode.azimuthal_order, s.pump.sites, s.pump.harmonic);
    let coupling = coupling_section(s)?;
    let chain = efficiency_chain(s.budget.eta_zpl, coupling.eta_dfg, s.budget.eta_spatial)?;
    Ok(SweepSummary {
        delta_m: fringe.delta_m,
        on_axis: fringe.on_axis,
        dfg_output_nm: dfg_output_wavelength(s.mode.wavelength_nm, s.hardware.pump_nm)?,
        g_eff_rad_s: coupling.g_eff_rad_s,
        g_eff_power_scaling_rad_s: coupling.g_eff_power_scaling_rad_s,
        eta_dfg: coupling.eta_dfg,
        eta_tot: chain.eta_tot,
    })
}

/// Serialises any report section to a JSON value.
pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report section serialises")
}

/// Fails unless every warning carries a documented identifier.
pub fn check_warning_ids(warnings: &[Warning]) -> Result<()> {
    for w in warnings {
        if !WARNING_IDS.contains(&w.id.as_str()) {
            return Err(Error::contract(format!("undocumented warning id {}", w.id)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_defaults() {
        let (r, w) = run_selection(&Scenario::paper_defaults(), None).unwrap();
        for e in &r.read_out.windows {
            let expect = if e.direction == Direction::Cw { vec![-1] } else { vec![1] };
            assert_eq!(e.ells, expect);
        }
        assert_eq!(r.write_in.guided_orders, vec![21, 25]);
        assert!((r.read_out.output_nm - 1346.706).abs() < 1e-3);
        assert_eq!(r.design.fringe, FringeOrder { delta_m: 4, on_axis: true });
        check_warning_ids(&w).unwrap();
        assert!(w.iter().any(|x| x.id == "OQ-CHI-ISO"));
    }

    #[test]
    fn budget_defaults_and_high_q() {
        let (r, w) = run_budget(&Scenario::paper_defaults()).unwrap();
        assert!((r.efficiency.eta_tot - 1.5e-8).abs() < 0.1 * 1.5e-8);
        assert!(!w.is_empty());
        check_warning_ids(&w).unwrap();
        let (h, _) = run_budget(&Scenario::preset("high-q").unwrap()).unwrap();
        assert!((h.efficiency.eta_tot - 0.069).abs() < 0.05 * 0.069, "{}", h.efficiency.eta_tot);
        let mut zero = Scenario::paper_defaults();
        zero.budget.eta_spatial = 0.0;
        assert_eq!(run_budget(&zero).unwrap().0.efficiency.eta_tot, 0.0);
        assert!((r.requirement.required_g_eff_at_fixed_q_rad_s / (2.0 * PI) - 131e9).abs() < 2e9);
    }

    #[test]
    fn farfield_defaults() {
        let (out, w) = run_farfield(&Scenario::paper_defaults(), None).unwrap();
        assert!(out.report.on_axis_bright);
        assert_eq!(out.report.fringe_count, 4);
        assert!(out.report.jitter.unwrap().mean_drop < 0.03);
        assert!(out.report.spatial.value > 0.0 && out.report.spatial.value <= 1.0);
        check_warning_ids(&w).unwrap();
    }

    #[test]
    fn farfield_zero_population_override() {
        let mut s = Scenario::paper_defaults();
        s.farfield.populations = Some([0.0; 4]);
        let (out, _) = run_farfield(&s, None).unwrap();
        assert!(out.grid.intensity.iter().all(|&v| v == 0.0));
        assert_eq!(out.report.spatial.value, 0.0);
    }

    #[test]
    fn feasibility_defaults() {
        let (out, w) = run_feasibility(&Scenario::paper_defaults()).unwrap();
        assert!(out.report.highlighted.contains(&[23, -1]));
        assert!(out.report.highlighted.contains(&[23, 1]));
        assert_eq!(out.report.hardware.addressable_sites, 81225);
        check_warning_ids(&w).unwrap();
        assert!(w.iter().any(|x| x.id == "OQ-QPLATE"));
    }

    #[test]
    fn power_sweep_ratio() {
        let s = Scenario::paper_defaults();
        let a = sweep_summary(&s.with_parameter("pump.total_power_mw", &Value::from(45.0)).unwrap()).unwrap();
        let b = sweep_summary(&s.with_parameter("pump.total_power_mw", &Value::from(180.0)).unwrap()).unwrap();
        assert!((b.g_eff_power_scaling_rad_s / a.g_eff_power_scaling_rad_s - 2.0).abs() < 1e-12);
    }
}
