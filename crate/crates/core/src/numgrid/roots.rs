//! Bracketed root finding.

use super::NumError;

/// Absolute tolerance on the abscissa.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Root of `f` inside `bracket` by a secant/bisection hybrid.
///
/// Secant steps are taken while they stay inside the current bracket; every
/// third step bisects unless the bracket has already halved since the last
/// check, which bounds the iteration count by that of plain bisection.
pub fn find_root<F>(f: F, bracket: (f64, f64)) -> Result<f64, NumError>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let mut fa = f(a);
    let mut fb = f(b);
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(NumError::NoSignChange { lo: a, hi: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumError::NoSignChange { lo: a, hi: b });
    }
    let mut checkpoint = b - a;
    for iter in 1..=400 {
        let width = b - a;
        if width <= ROOT_TOLERANCE {
            break;
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let force_bisect = iter % 3 == 0 && width > 0.5 * checkpoint;
        if iter % 3 == 0 {
            checkpoint = width;
        }
        let x = if !force_bisect && secant > a && secant < b { secant } else { 0.5 * (a + b) };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}
