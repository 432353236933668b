//! Shared inputs for the criterion benches.

use std::f64::consts::PI;

use vbg_core::constants::wavenumber_per_um;
use vbg_core::coupling::OverlapInputs;
use vbg_core::farfield::{EmissionState, FarFieldDesign};
use vbg_core::pumpdesign::FeasibilityInputs;
use vbg_core::report::coupling_section;
use vbg_core::Scenario;

pub fn overlap_inputs() -> OverlapInputs {
    OverlapInputs {
        k1: 1.54 * wavenumber_per_um(736.0),
        k2: wavenumber_per_um(1623.0),
        k3: wavenumber_per_um(1346.7),
        orders: (21, 23, 0),
        r_max_um: 2.0,
        delta_kz: 0.0,
        l_z_um: 0.28,
        delta_m: 0,
        phi_span: 2.0 * PI,
        phi_start: 0.0,
    }
}

/// The N = 23 read-out design and its coherent emission state.
pub fn farfield_case() -> (FarFieldDesign, EmissionState) {
    let s = Scenario::paper_defaults();
    let design =
        FarFieldDesign { m_wgm: 21, sites: 23, ell: 1, output_nm: 1346.7057, radius_um: s.resonator.radius_um };
    let pops = coupling_section(&s).expect("default coupling").channels.populations();
    let state = EmissionState::coherent(&design.orders(), pops);
    (design, state)
}

pub fn feasibility_inputs() -> FeasibilityInputs {
    let s = Scenario::paper_defaults();
    FeasibilityInputs {
        m_wgm: 21,
        radius_um: s.resonator.radius_um,
        emission_nm: 1346.7057,
        na: s.hardware.na_cap,
        pump_nm: s.hardware.pump_nm,
        annulus_radius_um: s.pump.annulus_radius_um,
        qplate_charge: s.pump.qplate_charge,
        input_helicity: s.pump.input_helicity,
    }
}
