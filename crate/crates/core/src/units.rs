//! dB / linear conversions used throughout the link budget.

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1000.0).log10()
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Bits in `mb` megabytes. `binary` selects 2^20 bytes per MB instead of 10^6.
pub fn megabytes_to_bits(mb: f64, binary: bool) -> f64 {
    let bytes_per_mb = if binary { 1_048_576.0 } else { 1_000_000.0 };
    mb * bytes_per_mb * 8.0
}
