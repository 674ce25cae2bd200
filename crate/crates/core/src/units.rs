//! Physical constants and unit conversions. Everything inside the crate is SI.

use std::f64::consts::LN_10;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Supported wavelength window for the fibre profiles.
pub const BAND_MIN_M: f64 = 1260e-9;
pub const BAND_MAX_M: f64 = 1675e-9;

#[inline]
pub fn wavelength_to_freq(lambda_m: f64) -> f64 {
    SPEED_OF_LIGHT / lambda_m
}

#[inline]
pub fn freq_to_wavelength(freq_hz: f64) -> f64 {
    SPEED_OF_LIGHT / freq_hz
}

/// dB/km to linear power attenuation in 1/m.
#[inline]
pub fn db_per_km_to_per_m(alpha_db_km: f64) -> f64 {
    alpha_db_km * LN_10 / 1e4
}

#[inline]
pub fn per_m_to_db_per_km(alpha_per_m: f64) -> f64 {
    alpha_per_m * 1e4 / LN_10
}

#[inline]
pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

#[inline]
pub fn watt_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// ps/(nm km) to s/m^2.
pub const PS_NM_KM: f64 = 1e-6;
/// ps/(nm^2 km) to s/m^3.
pub const PS_NM2_KM: f64 = 1e3;
/// ps/(nm^3 km) to s/m^4.
pub const PS_NM3_KM: f64 = 1e12;
/// ps^2/km to s^2/m.
pub const PS2_KM: f64 = 1e-27;
/// ps^3/km to s^3/m.
pub const PS3_KM: f64 = 1e-39;
/// ps^4/km to s^4/m.
pub const PS4_KM: f64 = 1e-51;
/// 1/(W km) to 1/(W m).
pub const PER_W_KM: f64 = 1e-3;
