//! Float kernels routed through `libm`.
//!
//! Native `f64` methods live in `std` (unavailable under `no_std`) and their
//! last-ulp behavior varies by platform libm. Routing everything through the
//! pure-Rust `libm` port keeps the whole crate's arithmetic reproducible
//! bit-for-bit, which the trace-determinism contracts rely on.

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
