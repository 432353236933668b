//! Overlap integrals, bright-supermode assembly and the lossless
//! beam-splitter conversion dynamics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{angular_frequency, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::error::{Error, Result};
use crate::materials::CircularCoefficients;
use crate::quadrature::{integrate_or_fail, AdaptiveOptions};
use crate::special::{bessel_j, sinc};

/// Weights must sum to one within this tolerance.
const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapInputs {
    /// Transverse wavenumbers in rad/µm of the WGM, pump and output fields.
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Bessel orders `(M, P, m)`.
    pub orders: (i32, i32, i32),
    pub r_max_um: f64,
    pub delta_kz: f64,
    pub l_z_um: f64,
    pub delta_m: i64,
    /// Angular extent Φ0 of the interaction, in (0, 2π].
    pub phi_span: f64,
    pub phi_start: f64,
}

impl OverlapInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_max_um >= 0.0) {
            return Err(Error::contract("r_max must be non-negative"));
        }
        if !(self.l_z_um > 0.0) {
            return Err(Error::contract("L_z must be positive"));
        }
        if !(self.phi_span > 0.0 && self.phi_span <= 2.0 * PI) {
            return Err(Error::contract("Φ0 must lie in (0, 2π]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialOverlap {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

/// `∫₀^r_max ρ J_M(k1ρ) J_P(k2ρ) J_m(k3ρ) dρ` by adaptive Gauss–Kronrod.
///
/// The absolute tolerance is 1e−10 of the integrand's sampled peak.
pub fn radial_overlap(input: &OverlapInputs) -> Result<RadialOverlap> {
    let (m1, m2, m3) = input.orders;
    if m1 < 0 || m2 < 0 || m3 < 0 {
        return Err(Error::contract("radial overlap orders must be non-negative"));
    }
    if input.k1 < 0.0 || input.k2 < 0.0 || input.k3 < 0.0 {
        return Err(Error::contract("radial overlap wavenumbers must be non-negative"));
    }
    if !(input.r_max_um >= 0.0) {
        return Err(Error::contract("r_max must be non-negative"));
    }
    if input.r_max_um == 0.0 {
        return Ok(RadialOverlap { value: 0.0, error_estimate: 0.0, converged: true });
    }
    let (k1, k2, k3) = (input.k1, input.k2, input.k3);
    let integrand = |rho: f64| rho * bessel_j(m1, k1 * rho) * bessel_j(m2, k2 * rho) * bessel_j(m3, k3 * rho);
    // roughly one panel per half-period of the fastest oscillation
    let total_k = k1 + k2 + k3;
    let panels = ((total_k * input.r_max_um / PI).ceil() as usize).clamp(8, 4096);
    let opts = AdaptiveOptions { initial_panels: panels, ..AdaptiveOptions::default() };
    let r = integrate_or_fail(integrand, 0.0, input.r_max_um, opts)?;
    Ok(RadialOverlap { value: r.value, error_estimate: r.error_estimate, converged: r.converged })
}

/// `L_z sinc(Δk_z L_z/2) e^{iΔk_z L_z/2}`, in µm.
pub fn axial_overlap(delta_kz: f64, l_z_um: f64) -> Complex64 {
    let half = 0.5 * delta_kz * l_z_um;
    Complex64::from_polar(l_z_um * sinc(half), half)
}

/// `Φ0 sinc(ΔmΦ0/2) e^{iΔm(φ0+Φ0/2)}`. A full ring returns the exact
/// Kronecker delta `2π δ_{Δm,0}`.
pub fn azimuthal_overlap(delta_m: i64, phi_span: f64, phi_start: f64) -> Complex64 {
    if phi_span == 2.0 * PI {
        return if delta_m == 0 { Complex64::new(2.0 * PI, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let dm = delta_m as f64;
    Complex64::from_polar(phi_span * sinc(0.5 * dm * phi_span), dm * (phi_start + 0.5 * phi_span))
}

/// Opaque normalisation scalars for assembling a microscopic coupling from
/// first principles. None of them is known numerically for the reference
/// device, so the power-scaling route is the quantitative one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPrefactors {
    pub pump_amplitude: Complex64,
    pub wgm_normalization: f64,
    pub output_normalization: f64,
    pub sites: u32,
}

impl CouplingPrefactors {
    /// `C₀ = ε₀N/(8πħ)`.
    pub fn c0(&self) -> f64 {
        VACUUM_PERMITTIVITY * self.sites as f64 / (8.0 * PI * HBAR)
    }

    /// `g = C₀ d_s α* 𝒩₁ 𝒩₃ I_ρ I_z I_φ`.
    pub fn channel_coupling(&self, d_s: Complex64, radial: f64, axial: Complex64, azimuthal: Complex64) -> Complex64 {
        self.c0()
            * d_s
            * self.pump_amplitude.conj()
            * self.wgm_normalization
            * self.output_normalization
            * radial
            * axial
            * azimuthal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrightMode {
    pub g_eff: f64,
    pub w_r: f64,
    pub w_l: f64,
}

/// `g_eff = √(|g_R|²+|g_L|²)` and the channel weights `|g_s|²/g_eff²`.
pub fn bright_mode(g_r: Complex64, g_l: Complex64) -> Result<BrightMode> {
    let (pr, pl) = (g_r.norm_sqr(), g_l.norm_sqr());
    let total = pr + pl;
    if total == 0.0 {
        return Err(Error::DegenerateBrightMode);
    }
    Ok(BrightMode { g_eff: total.sqrt(), w_r: pr / total, w_l: pl / total })
}

/// Splits a bright-mode rate into RHCP/LHCP couplings in proportion to the
/// circular tensor coefficients, assuming equal spatial overlaps.
pub fn split_by_tensor(g_eff: f64, coeffs: &CircularCoefficients) -> (Complex64, Complex64) {
    let norm = (coeffs.d_r.norm_sqr() + coeffs.d_l.norm_sqr()).sqrt();
    if norm == 0.0 {
        let half = g_eff / 2f64.sqrt();
        return (Complex64::new(half, 0.0), Complex64::new(half, 0.0));
    }
    (coeffs.d_r * (g_eff / norm), coeffs.d_l * (g_eff / norm))
}

/// `η = sin²(g_eff T)`.
pub fn rabi_efficiency(g_eff: f64, time_s: f64) -> f64 {
    (g_eff * time_s).sin().powi(2)
}

/// `n_i = w_i η n_in`.
pub fn channel_populations(weights: &[f64], eta: f64, n_in: f64) -> Result<Vec<f64>> {
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::contract(format!("channel weights sum to {sum}, not 1")));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::contract("channel weights must be non-negative"));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::contract(format!("efficiency {eta} outside [0, 1]")));
    }
    if !(n_in >= 0.0) {
        return Err(Error::contract("input photon number must be non-negative"));
    }
    Ok(weights.iter().map(|w| w * eta * n_in).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerScaling {
    /// Λ in s⁻¹·√(m²/W).
    pub lambda: f64,
    pub total_power_w: f64,
    pub sites: u32,
    pub waist_um: f64,
}

/// `G_eff = Λ √(N P_tot)/w0`, in rad/s.
pub fn geff_from_power(s: &PowerScaling) -> Result<f64> {
    if !(s.lambda > 0.0 && s.total_power_w > 0.0 && s.sites > 0 && s.waist_um > 0.0) {
        return Err(Error::contract("power scaling inputs must all be positive"));
    }
    Ok(s.lambda * (s.sites as f64 * s.total_power_w).sqrt() / (s.waist_um * 1e-6))
}

/// Cavity lifetime `T = Q/ω1 = Qλ1/(2πc)`.
pub fn cavity_interaction_time(quality_factor: f64, wavelength_nm: f64) -> f64 {
    debug_assert!(quality_factor > 0.0 && wavelength_nm > 0.0);
    quality_factor / angular_frequency(wavelength_nm)
}

/// `T = L_φ / v_φ` for an azimuthal interaction length and group velocity.
pub fn interaction_time_from_length(length_m: f64, group_velocity_m_s: f64) -> f64 {
    length_m / group_velocity_m_s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub g_r: Complex64,
    pub g_l: Complex64,
    pub g_eff: f64,
    pub w_r: f64,
    pub w_l: f64,
    pub eta: f64,
    pub n_r: f64,
    pub n_l: f64,
}

/// Couplings, weights, efficiencies and populations for the CW and CCW manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub interaction_time_s: f64,
    pub n_in: f64,
    pub cw: DirectionReport,
    pub ccw: DirectionReport,
}

fn direction_report(g_r: Complex64, g_l: Complex64, time_s: f64, n_in: f64) -> Result<DirectionReport> {
    let bright = bright_mode(g_r, g_l)?;
    let eta = rabi_efficiency(bright.g_eff, time_s);
    let pops = channel_populations(&[bright.w_r, bright.w_l], eta, n_in)?;
    Ok(DirectionReport {
        g_r,
        g_l,
        g_eff: bright.g_eff,
        w_r: bright.w_r,
        w_l: bright.w_l,
        eta,
        n_r: pops[0],
        n_l: pops[1],
    })
}

impl CouplingReport {
    pub fn new(
        cw: (Complex64, Complex64),
        ccw: (Complex64, Complex64),
        interaction_time_s: f64,
        n_in: f64,
    ) -> Result<Self> {
        Ok(Self {
            interaction_time_s,
            n_in,
            cw: direction_report(cw.0, cw.1, interaction_time_s, n_in)?,
            ccw: direction_report(ccw.0, ccw.1, interaction_time_s, n_in)?,
        })
    }

    /// Populations ordered `[R+, R−, L+, L−]`.
    pub fn populations(&self) -> [f64; 4] {
        [self.cw.n_r, self.ccw.n_r, self.cw.n_l, self.ccw.n_l]
    }
}

/// Speed of light, re-exported for group-velocity conversions in callers.
pub const C: f64 = SPEED_OF_LIGHT;
