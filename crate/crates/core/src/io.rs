//! Text formatting shared by CSV writers, manifests, and rule labels.

/// Formats a real with 17 significant digits in scientific notation.
///
/// 17 digits round-trip any f64 exactly, so files written with this
/// formatter re-parse to bit-identical values and byte-identical reruns.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats an f64 that carries an integer quantity (voter counts on a sweep
/// axis) without an exponent, falling back to [`format_real`] otherwise.
pub fn format_count(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 9e15 {
        format!("{}", x as i64)
    } else {
        format_real(x)
    }
}
