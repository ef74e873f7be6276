//! Scalar math routed through `libm`.
//!
//! Inherent `f64` methods like `exp` live in `std`, not `core`, so the crate
//! calls these shims instead. Routing every build through `libm` also keeps
//! results bit-identical between `std` and `no_std` builds.

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub(crate) fn powi(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

pub(crate) const PI: f64 = core::f64::consts::PI;
