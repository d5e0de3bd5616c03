use crate::error::{Error, Result};

/// Absolute tolerance used by [`quad`].
pub const QUAD_TOLERANCE: f64 = 1e-10;

const MAX_DEPTH: u32 = 50;

/// Adaptive Simpson quadrature of `f` over `[a, b]` (either orientation).
pub fn quad<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64) -> Result<f64> {
    quad_tol(f, a, b, QUAD_TOLERANCE)
}

pub fn quad_tol<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let eval = |x: f64| -> Result<f64> {
        let y = f(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Domain(format!("integrand not finite at {x}")))
        }
    };
    let fa = eval(a)?;
    let fb = eval(b)?;
    let m = 0.5 * (a + b);
    let fm = eval(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&eval, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    Ok(simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand() {
        assert!((quad(|_| Ok(1.0), 0.0, 0.7).unwrap() - 0.7).abs() < 1e-14);
    }

    #[test]
    fn reciprocal_exponential() {
        let v = quad(|x: f64| Ok((-x).exp()), 0.0, 1.0).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn reciprocal_cosh() {
        let v = quad(|x: f64| Ok(1.0 / x.cosh()), 0.0, 1.0).unwrap();
        assert!((v - 2.0 * (0.5f64).tanh().atan()).abs() < 1e-9);
    }

    #[test]
    fn reversed_interval_negates() {
        let a = quad(|x: f64| Ok(x * x), 0.0, 2.0).unwrap();
        let b = quad(|x: f64| Ok(x * x), 2.0, 0.0).unwrap();
        assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn pole_is_domain_error() {
        assert!(matches!(
            quad(|x: f64| Ok(1.0 / x), 0.0, 1.0),
            Err(Error::Domain(_))
        ));
    }
}
