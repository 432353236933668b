//! Pump-hardware feasibility: numerical-aperture budgets, SLM/pupil cutoffs,
//! q-plate offload, the (N, ℓ) feasibility map, steering span, per-site
//! intensity and the detuning response.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::wavenumber_per_um;
use crate::error::{Error, Result};
use crate::quadrature::trapezoid_uniform;
use crate::selection::Direction;
use crate::special::bessel_j;

pub const FEASIBILITY_CSV_HEADER: &str = "N,ell,m_primes,radiative,eta_pump,delta_m_pm2";

/// Trapezoid nodes per integral in [`pump_na_fraction`].
const NA_FRACTION_POINTS: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpHardware {
    pub pump_nm: f64,
    pub pixel_pitch_um: f64,
    pub demagnification: f64,
    pub focal_length_mm: f64,
    pub na_cap: f64,
    pub max_pupil_mm: f64,
    pub refresh_hz: f64,
}

impl Default for PumpHardware {
    fn default() -> Self {
        Self {
            pump_nm: 1623.0,
            pixel_pitch_um: 12.5,
            demagnification: 40.0,
            focal_length_mm: 1.5,
            na_cap: 0.95,
            max_pupil_mm: 6.0,
            refresh_hz: 60.0,
        }
    }
}

impl PumpHardware {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("pump_nm", self.pump_nm),
            ("pixel_pitch_um", self.pixel_pitch_um),
            ("demagnification", self.demagnification),
            ("focal_length_mm", self.focal_length_mm),
            ("na_cap", self.na_cap),
            ("max_pupil_mm", self.max_pupil_mm),
            ("refresh_hz", self.refresh_hz),
        ];
        for (key, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("hardware.{key}"), format!("must be positive, got {v}")));
            }
        }
        if self.na_cap > 1.0 {
            return Err(Error::config("hardware.na_cap", "an air objective cannot exceed NA = 1"));
        }
        Ok(())
    }

    /// Pump wavenumber `k0 = 2π/λ_p` in rad/µm.
    pub fn k0(&self) -> f64 {
        wavenumber_per_um(self.pump_nm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpDesign {
    /// Total helical charge `m` delivered to the annulus.
    pub total_charge: i64,
    pub qplate_charge: i64,
    /// Input helicity σ, ±1.
    pub input_helicity: i64,
    pub annulus_radius_um: f64,
    pub waist_um: f64,
    pub total_power_mw: f64,
    pub sites: u32,
}

impl PumpDesign {
    /// `m_SLM = m − 2σq`.
    pub fn slm_charge(&self) -> i64 {
        self.total_charge - 2 * self.input_helicity * self.qplate_charge
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_helicity.abs() != 1 {
            return Err(Error::config("pump.input_helicity", "must be +1 or -1"));
        }
        for (key, v) in [
            ("pump.annulus_radius_um", self.annulus_radius_um),
            ("pump.waist_um", self.waist_um),
            ("pump.total_power_mw", self.total_power_mw),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        if self.sites == 0 {
            return Err(Error::config("pump.sites", "must be at least 1"));
        }
        Ok(())
    }
}

/// Smallest Gaussian waist the objective can form, `λ_p/(π·NA)`, in µm.
pub fn diffraction_limited_waist_um(pump_nm: f64, na: f64) -> f64 {
    pump_nm * 1e-3 / (PI * na)
}

/// `NA_req = |m| λ_p / (2π r0)`.
pub fn na_required(m: i64, pump_nm: f64, r0_um: f64) -> f64 {
    debug_assert!(r0_um > 0.0);
    m.unsigned_abs() as f64 * pump_nm * 1e-3 / (2.0 * PI * r0_um)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffLimit {
    Objective,
    Slm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PupilCutoff {
    /// `k0·NA_cap`, rad/µm.
    pub k_opt: f64,
    /// `π/(p/D)` for the demagnified sample-plane pixel, rad/µm.
    pub k_slm: f64,
    pub k_c: f64,
    pub limited_by: CutoffLimit,
}

/// `k_c = min(k_opt, k_SLM)`.
pub fn pupil_cutoff(hw: &PumpHardware) -> PupilCutoff {
    let k_opt = hw.k0() * hw.na_cap;
    let k_slm = PI * hw.demagnification / hw.pixel_pitch_um;
    let (k_c, limited_by) = if k_opt <= k_slm { (k_opt, CutoffLimit::Objective) } else { (k_slm, CutoffLimit::Slm) };
    PupilCutoff { k_opt, k_slm, k_c, limited_by }
}

/// `q_min = ⌈(|m| − k0 r0 NA_cap)/2⌉₊`.
pub fn qplate_min_charge(m: i64, k0: f64, r0_um: f64, na_cap: f64) -> u32 {
    let excess = (m.unsigned_abs() as f64 - k0 * r0_um * na_cap) / 2.0;
    excess.ceil().max(0.0) as u32
}

/// Fraction of the angular-spectrum power `∫J_m²(κr0) κ dκ` of a charge-`m`
/// annulus that lies inside `κ ≤ k0·NA`, relative to all propagating
/// components `κ ≤ k0`.
pub fn pump_na_fraction(m: i64, r0_um: f64, k0: f64, na: f64) -> f64 {
    debug_assert!(r0_um > 0.0 && k0 > 0.0);
    let na = na.clamp(0.0, 1.0);
    let order = m as i32;
    let weight = |kappa: f64| kappa * bessel_j(order, kappa * r0_um).powi(2);
    let total = trapezoid_uniform(weight, 0.0, k0, NA_FRACTION_POINTS);
    if total == 0.0 {
        return 0.0;
    }
    if na == 1.0 {
        return 1.0;
    }
    if na == 0.0 {
        return 0.0;
    }
    (trapezoid_uniform(weight, 0.0, k0 * na, NA_FRACTION_POINTS) / total).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityInputs {
    pub m_wgm: u32,
    pub radius_um: f64,
    /// Emission wavelength setting the light line `|m′|/R < k0·NA`.
    pub emission_nm: f64,
    pub na: f64,
    pub pump_nm: f64,
    pub annulus_radius_um: f64,
    /// q-plate charge and input helicity used to reduce each harmonic before
    /// the pump fraction is evaluated.
    pub qplate_charge: i64,
    pub input_helicity: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityRecord {
    pub sites: u32,
    pub ell: i64,
    /// `[ℓN + M + 2, ℓN + M − 2, ℓN − M + 2, ℓN − M − 2]`.
    pub m_primes: [i64; 4],
    pub radiative: bool,
    /// Direction whose output pair radiates; CW is preferred when both do.
    pub radiative_direction: Option<Direction>,
    pub slm_charge: i64,
    pub eta_pump: f64,
    pub delta_m_pm2: bool,
}

impl FeasibilityRecord {
    pub fn csv_row(&self) -> String {
        let m = self.m_primes;
        format!(
            "{},{},{};{};{};{},{},{},{}",
            self.sites, self.ell, m[0], m[1], m[2], m[3], self.radiative, self.eta_pump, self.delta_m_pm2
        )
    }
}

/// One record per `(N, ℓ)`. A cell is radiative when, for some direction
/// `d`, both outputs `ℓN + dM ± 2` satisfy `|m′|/R < k0·NA`; it is a
/// `Δm = ±2` highlight when that radiating pair contains `m′ = 0`.
pub fn feasibility_map(
    inputs: &FeasibilityInputs,
    sites: std::ops::RangeInclusive<u32>,
    ells: std::ops::RangeInclusive<i64>,
) -> Result<Vec<FeasibilityRecord>> {
    if sites.is_empty() || ells.is_empty() {
        return Err(Error::contract("feasibility ranges must be non-empty"));
    }
    if *sites.start() == 0 {
        return Err(Error::contract("feasibility N range must start at 1 or above"));
    }
    let bound = wavenumber_per_um(inputs.emission_nm) * inputs.na * inputs.radius_um;
    let k0_pump = wavenumber_per_um(inputs.pump_nm);
    let m = inputs.m_wgm as i64;
    let cells: Vec<(u32, i64)> = sites.flat_map(|n| ells.clone().map(move |l| (n, l))).collect();
    let slm = |n: u32, ell: i64| (ell * n as i64).abs() - 2 * inputs.input_helicity * inputs.qplate_charge;
    // many cells share a charge, and the pump fraction dominates the cost
    let mut charges: Vec<i64> = cells.iter().map(|&(n, l)| slm(n, l)).collect();
    charges.sort_unstable();
    charges.dedup();
    let fractions: BTreeMap<i64, f64> = charges
        .into_par_iter()
        .map(|q| (q, pump_na_fraction(q, inputs.annulus_radius_um, k0_pump, inputs.na)))
        .collect();
    let records = cells
        .into_iter()
        .map(|(n, ell)| {
            let base = ell * n as i64;
            let m_primes = [base + m + 2, base + m - 2, base - m + 2, base - m - 2];
            let radiates = |pair: &[i64]| pair.iter().all(|&v| (v.unsigned_abs() as f64) < bound);
            let radiative_direction = if radiates(&m_primes[..2]) {
                Some(Direction::Cw)
            } else if radiates(&m_primes[2..]) {
                Some(Direction::Ccw)
            } else {
                None
            };
            let delta_m_pm2 = match radiative_direction {
                Some(Direction::Cw) => m_primes[..2].contains(&0),
                Some(Direction::Ccw) => m_primes[2..].contains(&0),
                None => false,
            };
            let slm_charge = slm(n, ell);
            FeasibilityRecord {
                sites: n,
                ell,
                m_primes,
                radiative: radiative_direction.is_some(),
                radiative_direction,
                slm_charge,
                eta_pump: fractions[&slm_charge],
                delta_m_pm2,
            }
        })
        .collect();
    Ok(records)
}

pub fn feasibility_csv(records: &[FeasibilityRecord]) -> String {
    let mut out = String::from(FEASIBILITY_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Lateral steering span `Δx_max = 2 f NA`, in mm.
pub fn steering_span(focal_length_mm: f64, na: f64) -> f64 {
    2.0 * focal_length_mm * na
}

/// `⌊Δx_max / pitch⌋²`. A relative slack of 1e−9 absorbs rounding in the
/// span so that exact multiples of the pitch are not lost.
pub fn addressable_sites(span_mm: f64, pitch_um: f64) -> u64 {
    let per_axis = (span_mm * 1e3 / pitch_um * (1.0 + 1e-9)).floor() as u64;
    per_axis * per_axis
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteIntensity {
    pub per_site_power_w: f64,
    /// `(P_tot/N)/(πw0²)`, W/cm².
    pub without_factor_two: f64,
    /// `2(P_tot/N)/(πw0²)`, the Gaussian peak convention, W/cm².
    pub gaussian_peak: f64,
}

pub fn site_intensity(total_power_w: f64, sites: u32, waist_um: f64) -> SiteIntensity {
    debug_assert!(sites > 0 && waist_um > 0.0);
    let per_site = total_power_w / sites as f64;
    let area_cm2 = PI * (waist_um * 1e-4).powi(2);
    SiteIntensity {
        per_site_power_w: per_site,
        without_factor_two: per_site / area_cm2,
        gaussian_peak: 2.0 * per_site / area_cm2,
    }
}

/// `η(Δ) = η0 / (1 + (2Δ/κ)²)`.
pub fn detuning_efficiency(eta0: f64, detuning: f64, linewidth: f64) -> Result<f64> {
    if !(linewidth > 0.0) {
        return Err(Error::contract("linewidth must be positive"));
    }
    Ok(eta0 / (1.0 + (2.0 * detuning / linewidth).powi(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn read_out_inputs() -> FeasibilityInputs {
        FeasibilityInputs {
            m_wgm: 21,
            radius_um: 1.6,
            emission_nm: 1346.706,
            na: 0.95,
            pump_nm: 1623.0,
            annulus_radius_um: 1.3,
            qplate_charge: 5,
            input_helicity: 1,
        }
    }

    #[test]
    fn na_required_values() {
        assert_eq!(na_required(0, 1623.0, 1.3), 0.0);
        assert!((na_required(23, 1623.0, 2.1) - 2.829).abs() < 1e-3);
        assert!((na_required(23, 1623.0, 1.3) / na_required(23, 1623.0, 2.6) - 2.0).abs() < 1e-14);
        assert_eq!(na_required(-23, 1623.0, 1.3), na_required(23, 1623.0, 1.3));
    }

    #[test]
    fn pupil_cutoffs() {
        let hw = PumpHardware::default();
        let c = pupil_cutoff(&hw);
        assert!((c.k_opt - 3.677).abs() < 1e-3);
        assert!((c.k_slm - 10.053).abs() < 1e-3);
        assert_eq!(c.limited_by, CutoffLimit::Objective);
        assert_eq!(c.k_c, c.k_opt);
        let doubled = pupil_cutoff(&PumpHardware { demagnification: 80.0, ..hw });
        assert!((doubled.k_slm / c.k_slm - 2.0).abs() < 1e-14);
        assert_eq!(doubled.k_opt, c.k_opt);
        let huge = pupil_cutoff(&PumpHardware { na_cap: 1e6, ..hw });
        assert_eq!(huge.limited_by, CutoffLimit::Slm);
        assert_eq!(huge.k_c, huge.k_slm);
    }

    #[test]
    fn qplate_examples() {
        let k0 = wavenumber_per_um(1623.0);
        assert_eq!(qplate_min_charge(23, k0, 1.3, 0.95), 10);
        assert_eq!(qplate_min_charge(4, k0, 1.3, 0.95), 0);
    }

    #[test]
    fn na_fraction_values() {
        let k0 = wavenumber_per_um(1623.0);
        assert_eq!(pump_na_fraction(13, 1.3, k0, 1.0), 1.0);
        let f13 = pump_na_fraction(13, 1.3, k0, 0.95);
        assert!((f13 - 0.258749).abs() < 1e-4, "{f13}");
        assert!((pump_na_fraction(13, 1.6, k0, 0.95) - 0.270676).abs() < 1e-4);
        assert!((pump_na_fraction(23, 1.3, k0, 0.95) - 0.0896).abs() < 1e-3);
        assert!((pump_na_fraction(0, 1e-6, k0, 0.5) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn feasibility_examples() {
        let map = feasibility_map(&read_out_inputs(), 1..=40, -3..=3).unwrap();
        let find = |n: u32, l: i64| map.iter().find(|r| r.sites == n && r.ell == l).unwrap();
        let design = find(23, -1);
        assert!(design.m_primes.contains(&0));
        assert!(design.radiative && design.delta_m_pm2);
        assert_eq!(design.radiative_direction, Some(Direction::Cw));
        assert_eq!(design.slm_charge, 13);
        assert!((design.eta_pump - 0.258749).abs() < 1e-4);
        let ccw = find(23, 1);
        assert!(ccw.delta_m_pm2);
        assert_eq!(ccw.radiative_direction, Some(Direction::Ccw));
        assert!(!find(21, 1).delta_m_pm2);
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 5..=4;
        assert!(feasibility_map(&read_out_inputs(), empty, 0..=1).is_err());
    }

    #[test]
    fn feasibility_csv_layout() {
        let map = feasibility_map(&read_out_inputs(), 23..=23, -1..=-1).unwrap();
        let csv = feasibility_csv(&map);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(FEASIBILITY_CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("23,-1,0;-4;-42;-46,true,"));
    }

    #[test]
    fn steering_and_sites() {
        let span = steering_span(1.5, 0.95);
        assert!((span - 2.85).abs() < 1e-12);
        assert_eq!(addressable_sites(span, 10.0), 81225);
        assert_eq!(addressable_sites(2.85, 2850.0), 1);
        assert_eq!(addressable_sites(2.0 * 2.85, 10.0), 4 * 81225);
    }

    #[test]
    fn site_intensity_conventions() {
        let s = site_intensity(0.18, 23, 0.6);
        assert!((s.without_factor_two - 6.92e5).abs() < 0.01e5);
        assert_eq!(s.gaussian_peak, 2.0 * s.without_factor_two);
        let b = site_intensity(0.045, 23, 0.6);
        assert!((b.gaussian_peak - 3.46e5).abs() < 0.01e5);
        assert_eq!(site_intensity(0.0, 23, 0.6).gaussian_peak, 0.0);
    }

    #[test]
    fn detuning_examples() {
        assert_eq!(detuning_efficiency(0.7, 0.0, 400.0).unwrap(), 0.7);
        assert!((detuning_efficiency(1.0, 200.0, 400.0).unwrap() - 0.5).abs() < 1e-15);
        for i in 0..=100 {
            assert!(detuning_efficiency(1.0, i as f64, 400.0).unwrap() > 0.5);
        }
        assert!(detuning_efficiency(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn diffraction_limit() {
        assert!((diffraction_limited_waist_um(1623.0, 0.95) - 0.5438).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn qplate_matches_direct_search(m in -60i64..60, r0 in 0.5f64..3.0, na in 0.2f64..1.0) {
            let pump_nm = 1623.0;
            let k0 = wavenumber_per_um(pump_nm);
            // with less than one unit of charge in reach, parity can leave no solution
            prop_assume!(k0 * r0 * na >= 1.0);
            let q = qplate_min_charge(m, k0, r0, na) as i64;
            let fits = |q: i64| na_required(m.abs() - 2 * q, pump_nm, r0) <= na;
            let direct = (0..=60).find(|&q| fits(q)).unwrap();
            prop_assert_eq!(q, direct);
        }

        #[test]
        fn na_fraction_monotone(m in 0i64..30, r0 in 0.5f64..2.5, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let k0 = wavenumber_per_um(1623.0);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(pump_na_fraction(m, r0, k0, lo) <= pump_na_fraction(m, r0, k0, hi) + 1e-12);
        }

        #[test]
        fn qplate_monotone_in_na(m in 0i64..60, r0 in 0.5f64..3.0, a in 0.1f64..1.0, b in 0.1f64..1.0) {
            let k0 = wavenumber_per_um(1623.0);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(qplate_min_charge(m, k0, r0, hi) <= qplate_min_charge(m, k0, r0, lo));
        }

        #[test]
        fn radiative_flags_match_brute_force(n in 1u32..60, ell in -4i64..=4) {
            let inp = read_out_inputs();
            let rec = feasibility_map(&inp, n..=n, ell..=ell).unwrap()[0];
            let k = 2.0 * PI / (inp.emission_nm * 1e-3) * inp.na;
            let ok = |a: i64| (a.abs() as f64) / inp.radius_um < k;
            let mp = [ell * n as i64 + 21 + 2, ell * n as i64 + 21 - 2, ell * n as i64 - 21 + 2, ell * n as i64 - 21 - 2];
            prop_assert_eq!(rec.m_primes, mp);
            prop_assert_eq!(rec.radiative, (ok(mp[0]) && ok(mp[1])) || (ok(mp[2]) && ok(mp[3])));
        }
    }
}
