//! Float math shim: `std` intrinsics when available, `libm` otherwise.

#![allow(dead_code)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("apeps-core needs either the `std` or the `libm` feature");

macro_rules! shim {
    ($name:ident, $libm:ident $(,$arg:ident)+) => {
        #[cfg(feature = "std")]
        #[inline]
        pub fn $name($($arg: f64),+) -> f64 {
            shim!(@std $name $(,$arg)+)
        }
        #[cfg(not(feature = "std"))]
        #[inline]
        pub fn $name($($arg: f64),+) -> f64 {
            libm::$libm($($arg),+)
        }
    };
    (@std $name:ident, $a:ident) => { f64::$name($a) };
    (@std $name:ident, $a:ident, $b:ident) => { f64::$name($a, $b) };
}

shim!(exp, exp, x);
shim!(ln, log, x);
shim!(log10, log10, x);
shim!(sqrt, sqrt, x);
shim!(floor, floor, x);
shim!(ceil, ceil, x);
shim!(round, round, x);
shim!(abs, fabs, x);
shim!(sin, sin, x);
shim!(cos, cos, x);
shim!(powf, pow, x, y);

/// Linear power ratio to decibels. Zero maps to negative infinity.
#[inline]
pub fn ratio_to_db(ratio: f64) -> f64 {
    10.0 * log10(ratio)
}

/// Decibels to linear power ratio.
#[inline]
pub fn db_to_ratio(db: f64) -> f64 {
    powf(10.0, db / 10.0)
}
