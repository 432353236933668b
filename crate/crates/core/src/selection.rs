//! Azimuthal selection rules for the read-out (DFG) and write-in (SFG)
//! processes, and the light-line windows that decide which orders radiate
//! or stay guided.
//!
//! Orders follow one convention throughout: a pump harmonic `ℓ` acting on a
//! WGM of order `M` travelling in direction `d = ±1` (CW/CCW) produces
//! `m = ℓN + d·M + σ·2`, with `σ = +1` for RHCP and `−1` for LHCP.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::wavenumber_per_um;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSpec {
    pub radius_um: f64,
    pub width_nm: f64,
    pub diamond_thickness_nm: f64,
    pub linbo3_thickness_nm: f64,
    pub n_core: f64,
    pub n_out: f64,
    pub quality_factor: f64,
}

impl ResonatorSpec {
    /// R = 1.6 µm hybrid diamond / LiNbO₃ disk with Q ≈ 10³.
    pub fn read_out_device() -> Self {
        Self {
            radius_um: 1.6,
            width_nm: 200.0,
            diamond_thickness_nm: 100.0,
            linbo3_thickness_nm: 280.0,
            n_core: 2.4,
            n_out: 1.0,
            quality_factor: 1e3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("radius_um", self.radius_um),
            ("width_nm", self.width_nm),
            ("diamond_thickness_nm", self.diamond_thickness_nm),
            ("linbo3_thickness_nm", self.linbo3_thickness_nm),
            ("quality_factor", self.quality_factor),
        ];
        for (key, v) in positive {
            if !(v > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.n_out >= 1.0) {
            return Err(Error::config("n_out", format!("must be at least 1, got {}", self.n_out)));
        }
        if !(self.n_core > self.n_out) {
            return Err(Error::config("n_core", format!("must exceed n_out ({}), got {}", self.n_out, self.n_core)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WgmMode {
    pub azimuthal_order: u32,
    pub radial_order: u32,
    pub longitudinal_order: u32,
    pub wavelength_nm: f64,
}

impl WgmMode {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength_nm > 0.0) {
            return Err(Error::config("wavelength_nm", format!("must be positive, got {}", self.wavelength_nm)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Dfg,
    Sfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Cw,
    Ccw,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Cw, Direction::Ccw];

    pub fn sign(self) -> i64 {
        match self {
            Direction::Cw => 1,
            Direction::Ccw => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Helicity {
    R,
    L,
}

impl Helicity {
    pub const ALL: [Helicity; 2] = [Helicity::R, Helicity::L];

    /// `σ_s`: +1 for RHCP, −1 for LHCP.
    pub fn sigma(self) -> i64 {
        match self {
            Helicity::R => 1,
            Helicity::L => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub process: Process,
    pub direction: Direction,
    pub helicity: Helicity,
    pub ell: i64,
    /// Radiated (DFG) or guided (SFG) azimuthal order.
    pub m: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub process: Process,
    pub sites: u32,
    pub mode: WgmMode,
    pub pump_nm: f64,
    pub output_nm: f64,
    pub channels: Vec<Channel>,
}

/// `λ3 = 1/(1/λ1 − 1/λ2)`.
pub fn dfg_output_wavelength(signal_nm: f64, pump_nm: f64) -> Result<f64> {
    if !(signal_nm > 0.0 && pump_nm > signal_nm) {
        return Err(Error::InvalidDfg { signal_nm, pump_nm });
    }
    Ok(1.0 / (1.0 / signal_nm - 1.0 / pump_nm))
}

/// `λ1 = 1/(1/λ2 + 1/λ3)`; inverse of [`dfg_output_wavelength`] at fixed pump.
pub fn sfg_output_wavelength(pump_nm: f64, telecom_nm: f64) -> f64 {
    1.0 / (1.0 / pump_nm + 1.0 / telecom_nm)
}

/// `n_eff ≈ Mλ1/(2πR)`.
pub fn effective_index(azimuthal_order: u32, wavelength_nm: f64, radius_um: f64) -> f64 {
    azimuthal_order as f64 * wavelength_nm * 1e-3 / (2.0 * PI * radius_um)
}

/// `m = ℓN + d·M + σ·2`, the DFG radiated order.
pub fn dfg_order(m_wgm: u32, sites: u32, ell: i64, direction: Direction, helicity: Helicity) -> i64 {
    ell * sites as i64 + direction.sign() * m_wgm as i64 + 2 * helicity.sigma()
}

/// Integers strictly inside `(lo, hi)` that also pass `accept`.
fn integers_between(lo: f64, hi: f64, accept: impl Fn(i64) -> bool) -> Vec<i64> {
    if !(lo < hi) {
        return Vec::new();
    }
    let first = lo.floor() as i64;
    let last = hi.ceil() as i64;
    (first..=last).filter(|&l| accept(l)).collect()
}

/// Harmonics `ℓ` for which the DFG order satisfies `|m| < 2πR/λ3`.
pub fn dfg_window(
    spec: &ResonatorSpec,
    m_wgm: u32,
    sites: u32,
    output_nm: f64,
    direction: Direction,
    helicity: Helicity,
) -> Vec<i64> {
    assert!(sites >= 1, "pump needs at least one site");
    let bound = 2.0 * PI * spec.radius_um / (output_nm * 1e-3);
    let offset = (direction.sign() * m_wgm as i64 + 2 * helicity.sigma()) as f64;
    let n = sites as f64;
    integers_between((-bound - offset) / n, (bound - offset) / n, |ell| {
        (dfg_order(m_wgm, sites, ell, direction, helicity) as f64).abs() < bound
    })
}

/// SFG harmonics whose guided order `M = |ℓN + σ·2|` obeys
/// `k0·n_out < M/R < k0·n_core`, paired with that `M`.
pub fn sfg_window(
    spec: &ResonatorSpec,
    sites: u32,
    signal_nm: f64,
    direction: Direction,
    helicity: Helicity,
) -> Vec<(i64, u32)> {
    assert!(sites >= 1, "pump needs at least one site");
    let k0r = wavenumber_per_um(signal_nm) * spec.radius_um;
    let (outer, inner) = (k0r * spec.n_out, k0r * spec.n_core);
    let shift = (2 * helicity.sigma()) as f64;
    let n = sites as f64;
    let (lo, hi) = match direction {
        Direction::Cw => ((outer - shift) / n, (inner - shift) / n),
        Direction::Ccw => ((-inner - shift) / n, (-outer - shift) / n),
    };
    let guided_order = |ell: i64| direction.sign() * (ell * sites as i64 + 2 * helicity.sigma());
    integers_between(lo, hi, |ell| {
        let m = guided_order(ell) as f64;
        m > outer && m < inner
    })
    .into_iter()
    .map(|ell| (ell, guided_order(ell).unsigned_abs() as u32))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FringeOrder {
    pub delta_m: u32,
    pub on_axis: bool,
}

/// Azimuthal fringe order `Δm = 2|M − ℓN|`; emission is bright on axis
/// exactly when `|M − ℓN| = 2`.
pub fn fringe_order(m_wgm: u32, sites: u32, ell: i64) -> FringeOrder {
    let mismatch = (m_wgm as i64 - ell * sites as i64).unsigned_abs();
    FringeOrder { delta_m: 2 * mismatch as u32, on_axis: mismatch == 2 }
}

/// The four radiated orders of a design with dominant harmonic `|ℓ|`:
/// CW channels take harmonic `−ℓ`, CCW channels `+ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmissionOrders {
    pub r_plus: i64,
    pub r_minus: i64,
    pub l_plus: i64,
    pub l_minus: i64,
}

impl EmissionOrders {
    pub fn for_design(m_wgm: u32, sites: u32, ell: i64) -> Self {
        Self {
            r_plus: dfg_order(m_wgm, sites, -ell, Direction::Cw, Helicity::R),
            r_minus: dfg_order(m_wgm, sites, ell, Direction::Ccw, Helicity::R),
            l_plus: dfg_order(m_wgm, sites, -ell, Direction::Cw, Helicity::L),
            l_minus: dfg_order(m_wgm, sites, ell, Direction::Ccw, Helicity::L),
        }
    }

    pub fn as_array(&self) -> [i64; 4] {
        [self.r_plus, self.r_minus, self.l_plus, self.l_minus]
    }

    /// `m₋ − m₊` for the RHCP pair.
    pub fn delta_m_r(&self) -> i64 {
        self.r_minus - self.r_plus
    }

    pub fn delta_m_l(&self) -> i64 {
        self.l_minus - self.l_plus
    }
}

/// All radiative DFG channels of the read-out process.
pub fn dfg_channel_set(spec: &ResonatorSpec, mode: &WgmMode, sites: u32, pump_nm: f64) -> Result<ChannelSet> {
    let output_nm = dfg_output_wavelength(mode.wavelength_nm, pump_nm)?;
    let mut channels = Vec::new();
    for direction in Direction::ALL {
        for helicity in Helicity::ALL {
            for ell in dfg_window(spec, mode.azimuthal_order, sites, output_nm, direction, helicity) {
                channels.push(Channel {
                    process: Process::Dfg,
                    direction,
                    helicity,
                    ell,
                    m: dfg_order(mode.azimuthal_order, sites, ell, direction, helicity),
                });
            }
        }
    }
    Ok(ChannelSet { process: Process::Dfg, sites, mode: *mode, pump_nm, output_nm, channels })
}

/// All guided SFG channels of the write-in process. `mode.wavelength_nm` is
/// the upconverted signal λ1; the telecom input follows from energy conservation.
pub fn sfg_channel_set(spec: &ResonatorSpec, mode: &WgmMode, sites: u32, pump_nm: f64) -> Result<ChannelSet> {
    let telecom_nm = dfg_output_wavelength(mode.wavelength_nm, pump_nm)?;
    let mut channels = Vec::new();
    for direction in Direction::ALL {
        for helicity in Helicity::ALL {
            for (ell, m) in sfg_window(spec, sites, mode.wavelength_nm, direction, helicity) {
                channels.push(Channel { process: Process::Sfg, direction, helicity, ell, m: m as i64 });
            }
        }
    }
    Ok(ChannelSet { process: Process::Sfg, sites, mode: *mode, pump_nm, output_nm: telecom_nm, channels })
}

impl ChannelSet {
    /// Re-checks energy conservation (0.1 %) and each channel's window.
    pub fn verify(&self, spec: &ResonatorSpec) -> Result<()> {
        let (l1, l2, l3) = (self.mode.wavelength_nm, self.pump_nm, self.output_nm);
        let residual = ((1.0 / l1 - 1.0 / l2) - 1.0 / l3).abs() / (1.0 / l3);
        if residual > 1e-3 {
            return Err(Error::contract(format!("energy conservation violated by {residual:e}")));
        }
        for c in &self.channels {
            let ok = match self.process {
                Process::Dfg => {
                    let bound = 2.0 * PI * spec.radius_um / (l3 * 1e-3);
                    c.m == dfg_order(self.mode.azimuthal_order, self.sites, c.ell, c.direction, c.helicity)
                        && (c.m as f64).abs() < bound
                }
                Process::Sfg => {
                    let k0r = wavenumber_per_um(l1) * spec.radius_um;
                    let signed = c.direction.sign() * (c.ell * self.sites as i64 + 2 * c.helicity.sigma());
                    signed == c.m && (c.m as f64) > k0r * spec.n_out && (c.m as f64) < k0r * spec.n_core
                }
            };
            if !ok {
                return Err(Error::contract(format!("channel {c:?} is outside its window")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write_in_device() -> ResonatorSpec {
        ResonatorSpec { radius_um: 1.66, ..ResonatorSpec::read_out_device() }
    }

    #[test]
    fn dfg_wavelengths() {
        assert!((dfg_output_wavelength(736.0, 1623.0).unwrap() - 1346.9).abs() < 0.5);
        assert!((dfg_output_wavelength(500.0, 1000.0).unwrap() - 1000.0).abs() < 1e-9);
        // 1/(1/739 − 1/1623) evaluated by hand: 1356.78 nm
        assert!((dfg_output_wavelength(739.0, 1623.0).unwrap() - 1356.784).abs() < 1e-3);
        assert!(matches!(dfg_output_wavelength(1623.0, 736.0), Err(Error::InvalidDfg { .. })));
        assert!(dfg_output_wavelength(800.0, 800.0).is_err());
    }

    #[test]
    fn effective_index_values() {
        assert!((effective_index(21, 736.0, 1.6) - 1.537).abs() < 1e-3);
        assert_eq!(effective_index(0, 736.0, 1.6), 0.0);
        assert!((effective_index(23, 736.0, 1.6) - 1.684).abs() < 1e-3);
    }

    #[test]
    fn read_out_windows() {
        let spec = ResonatorSpec::read_out_device();
        for h in Helicity::ALL {
            assert_eq!(dfg_window(&spec, 21, 23, 1347.0, Direction::Cw, h), vec![-1]);
            assert_eq!(dfg_window(&spec, 21, 23, 1347.0, Direction::Ccw, h), vec![1]);
        }
    }

    #[test]
    fn vanishing_radius_has_no_window() {
        // N = 25 leaves no order at m = 0, which alone would survive a vanishing window
        let spec = ResonatorSpec { radius_um: 1e-9, ..ResonatorSpec::read_out_device() };
        for d in Direction::ALL {
            for h in Helicity::ALL {
                assert!(dfg_window(&spec, 21, 25, 1347.0, d, h).is_empty());
            }
        }
    }

    #[test]
    fn write_in_windows() {
        let spec = write_in_device();
        assert_eq!(sfg_window(&spec, 23, 737.0, Direction::Cw, Helicity::R), vec![(1, 25)]);
        assert_eq!(sfg_window(&spec, 23, 737.0, Direction::Cw, Helicity::L), vec![(1, 21)]);
        let ccw: Vec<_> = Helicity::ALL.iter().flat_map(|&h| sfg_window(&spec, 23, 737.0, Direction::Ccw, h)).collect();
        assert_eq!(ccw, vec![(-1, 21), (-1, 25)]);
    }

    #[test]
    fn equal_indices_close_the_guided_window() {
        let spec = ResonatorSpec { n_core: 1.0, ..write_in_device() };
        for d in Direction::ALL {
            for h in Helicity::ALL {
                assert!(sfg_window(&spec, 23, 737.0, d, h).is_empty());
            }
        }
    }

    #[test]
    fn fringe_orders() {
        assert_eq!(fringe_order(21, 23, 1), FringeOrder { delta_m: 4, on_axis: true });
        assert_eq!(fringe_order(21, 25, 1), FringeOrder { delta_m: 8, on_axis: false });
        assert_eq!(fringe_order(21, 21, 1), FringeOrder { delta_m: 0, on_axis: false });
    }

    #[test]
    fn channel_sets_verify() {
        let spec = ResonatorSpec::read_out_device();
        let mode = WgmMode { azimuthal_order: 21, radial_order: 1, longitudinal_order: 2, wavelength_nm: 736.0 };
        let set = dfg_channel_set(&spec, &mode, 23, 1623.0).unwrap();
        set.verify(&spec).unwrap();
        let ms: Vec<_> = set.channels.iter().map(|c| (c.direction, c.helicity, c.ell, c.m)).collect();
        assert_eq!(
            ms,
            vec![
                (Direction::Cw, Helicity::R, -1, 0),
                (Direction::Cw, Helicity::L, -1, -4),
                (Direction::Ccw, Helicity::R, 1, 4),
                (Direction::Ccw, Helicity::L, 1, 0),
            ]
        );

        let wi = write_in_device();
        let mode = WgmMode { wavelength_nm: 737.0, ..mode };
        let set = sfg_channel_set(&wi, &mode, 23, 1623.0).unwrap();
        set.verify(&wi).unwrap();
        assert_eq!(set.channels.len(), 4);
    }

    #[test]
    fn spec_validation() {
        assert!(ResonatorSpec::read_out_device().validate().is_ok());
        let bad = ResonatorSpec { n_core: 1.0, n_out: 1.0, ..ResonatorSpec::read_out_device() };
        assert!(bad.validate().is_err());
        let bad = ResonatorSpec { radius_um: 0.0, ..ResonatorSpec::read_out_device() };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn orders_mirror_under_harmonic_flip(m in 0u32..80, n in 1u32..80, ell in -5i64..5) {
            let rp = dfg_order(m, n, ell, Direction::Cw, Helicity::R);
            let lp = dfg_order(m, n, ell, Direction::Cw, Helicity::L);
            prop_assert_eq!(rp, -dfg_order(m, n, -ell, Direction::Ccw, Helicity::L));
            prop_assert_eq!(lp, -dfg_order(m, n, -ell, Direction::Ccw, Helicity::R));
        }

        #[test]
        fn window_is_exact(m in 0u32..60, n in 1u32..60, radius in 0.2f64..6.0, out in 900.0f64..1800.0) {
            let spec = ResonatorSpec { radius_um: radius, ..ResonatorSpec::read_out_device() };
            let bound = 2.0 * PI * radius / (out * 1e-3);
            for d in Direction::ALL {
                for h in Helicity::ALL {
                    let allowed = dfg_window(&spec, m, n, out, d, h);
                    for &l in &allowed {
                        prop_assert!((dfg_order(m, n, l, d, h) as f64).abs() < bound);
                    }
                    // neighbours just outside the returned range fail the inequality
                    let lo = allowed.first().copied().unwrap_or(0);
                    let hi = allowed.last().copied().unwrap_or(0);
                    for l in (lo - 3)..=(hi + 3) {
                        if !allowed.contains(&l) {
                            prop_assert!((dfg_order(m, n, l, d, h) as f64).abs() >= bound);
                        }
                    }
                }
            }
        }

        #[test]
        fn guided_orders_respect_light_lines(n in 1u32..60, radius in 0.5f64..4.0, signal in 600.0f64..900.0) {
            let spec = ResonatorSpec { radius_um: radius, ..ResonatorSpec::read_out_device() };
            let k0 = wavenumber_per_um(signal);
            for d in Direction::ALL {
                for h in Helicity::ALL {
                    for (_, m) in sfg_window(&spec, n, signal, d, h) {
                        let kappa = m as f64 / radius;
                        prop_assert!(kappa > k0 * spec.n_out && kappa < k0 * spec.n_core);
                    }
                }
            }
        }

        #[test]
        fn dfg_then_sfg_is_identity(signal in 400.0f64..1000.0, extra in 1.0f64..2000.0) {
            let pump = signal + extra;
            let telecom = dfg_output_wavelength(signal, pump).unwrap();
            let back = sfg_output_wavelength(pump, telecom);
            prop_assert!((back - signal).abs() <= 1e-9 * signal);
        }
    }
}
