//! CODATA 2018 exact and recommended values, SI units.

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Angular frequency in rad/s of light with vacuum wavelength `wavelength_nm`.
pub fn angular_frequency(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
}

/// Vacuum wavenumber in rad/µm.
pub fn wavenumber_per_um(wavelength_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI / (wavelength_nm * 1e-3)
}
