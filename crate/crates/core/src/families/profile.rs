//! Riccati profile fields `y(u,v)` with `y_u = q₀(u) + q₁(u)·y + q₂(u)·y²` and `y(u₀,v) = y₀(v)`.
//!
//! The coefficients depend on u only, so one fundamental matrix `Φ(u)` of the linear system
//! `w′ = [[q₁, q₀], [−q₂, 0]]·w`, `Φ(u₀) = I`, serves every v-line:
//! `y = (Φ₁₁y₀ + Φ₁₂)/(Φ₂₁y₀ + Φ₂₂)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprlang::Expr;
use crate::immersion::Rect;
use crate::numkit::DensePath;
use crate::spaceforms::SpaceFormModel;
use crate::spacetime::Warping;

type Coefficients = dyn Fn(f64) -> Result<[f64; 3]> + Send + Sync;

/// Samples per axis used to locate the valid rectangle.
const SCAN_V_SAMPLES: usize = 81;

/// Largest magnitude a profile may reach inside the valid rectangle.
const PROFILE_BOUND: f64 = 1e3;

/// Smooth profile over a rectangle, with the sub-rectangle where it stays regular.
#[derive(Clone)]
pub struct ProfileField {
    pub name: String,
    fundamental: Arc<DensePath>,
    initial: Expr,
    d_initial: Expr,
    coefficients: Arc<Coefficients>,
    pub u0: f64,
    /// Requested rectangle.
    pub requested: Rect,
    /// Sub-rectangle containing `u₀` on which the profile is finite, regular and keeps the
    /// required signs.
    pub valid: Rect,
}

impl std::fmt::Debug for ProfileField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProfileField")
            .field("name", &self.name)
            .field("u0", &self.u0)
            .field("requested", &self.requested)
            .field("valid", &self.valid)
            .finish()
    }
}

/// Sign choice in the profile equation of the S³₁/E³₁ (−) and H³₁ (+) umbilic families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileSign {
    Minus,
    Plus,
}

impl ProfileField {
    fn matrix(&self, u: f64) -> Result<[f64; 4]> {
        let m = self.fundamental.eval(u)?;
        Ok([m[0], m[1], m[2], m[3]])
    }

    pub fn value(&self, u: f64, v: f64) -> Result<f64> {
        let m = self.matrix(u)?;
        let y0 = self.initial.eval(v)?;
        let den = m[2] * y0 + m[3];
        if den == 0.0 {
            return Err(Error::Domain(format!(
                "profile `{}` has a pole at ({u}, {v})",
                self.name
            )));
        }
        Ok((m[0] * y0 + m[1]) / den)
    }

    /// `y_u` from the equation itself.
    pub fn d_u(&self, u: f64, v: f64) -> Result<f64> {
        let y = self.value(u, v)?;
        let q = (self.coefficients)(u)?;
        Ok(q[0] + q[1] * y + q[2] * y * y)
    }

    /// `y_v = det Φ / (Φ₂₁y₀ + Φ₂₂)² · y₀′(v)`.
    pub fn d_v(&self, u: f64, v: f64) -> Result<f64> {
        let m = self.matrix(u)?;
        let y0 = self.initial.eval(v)?;
        let den = m[2] * y0 + m[3];
        Ok((m[0] * m[3] - m[1] * m[2]) / (den * den) * self.d_initial.eval(v)?)
    }

    /// `y_u` from the derivative of the interpolated fundamental matrix, independent of the
    /// equation.
    pub fn d_u_interpolated(&self, u: f64, v: f64) -> Result<f64> {
        let m = self.matrix(u)?;
        let dm = self.fundamental.eval_derivative(u)?;
        let y0 = self.initial.eval(v)?;
        let num = m[0] * y0 + m[1];
        let den = m[2] * y0 + m[3];
        Ok(((dm[0] * y0 + dm[1]) * den - num * (dm[2] * y0 + dm[3])) / (den * den))
    }

    /// Largest `|y_u − rhs(u, y)|` over a sample grid of `rect`, with `y_u` from
    /// [`ProfileField::d_u_interpolated`].
    pub fn residual(&self, rect: &Rect, nu: usize, nv: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for j in 0..nv {
            let v = rect.v.0 + (rect.v.1 - rect.v.0) * j as f64 / (nv.max(2) - 1) as f64;
            for i in 0..nu {
                let u = rect.u.0 + (rect.u.1 - rect.u.0) * i as f64 / (nu.max(2) - 1) as f64;
                worst = worst.max((self.d_u_interpolated(u, v)? - self.d_u(u, v)?).abs());
            }
        }
        Ok(worst)
    }

    pub fn is_clipped(&self) -> bool {
        self.valid != self.requested
    }
}

/// Solve a Riccati profile over `rect` from `y(u₀, v) = initial(v)`.
///
/// `nonvanishing` additionally requires `y ≠ 0`; `y_v ≠ 0` is always required.
pub fn solve_riccati_profile(
    name: &str,
    coefficients: impl Fn(f64) -> Result<[f64; 3]> + Send + Sync + 'static,
    initial: &Expr,
    u0: f64,
    rect: Rect,
    step: f64,
    nonvanishing: bool,
) -> Result<ProfileField> {
    if !rect.is_valid() || !(rect.u.0 <= u0 && u0 <= rect.u.1) {
        return Err(Error::Contract(format!(
            "profile `{name}`: base point {u0} outside the u-range [{}, {}]",
            rect.u.0, rect.u.1
        )));
    }
    let d_initial = initial.differentiate();
    let mut prev_sign: Option<(f64, f64)> = None;
    for j in 0..SCAN_V_SAMPLES {
        let v = rect.v.0 + (rect.v.1 - rect.v.0) * j as f64 / (SCAN_V_SAMPLES - 1) as f64;
        let y0 = initial.eval(v)?;
        let dy0 = d_initial.eval(v)?;
        if dy0 == 0.0 || (nonvanishing && y0 == 0.0) {
            return Err(Error::Assumption(format!(
                "profile `{name}`: initial data must have non-vanishing derivative{} on the v-range",
                if nonvanishing { " and value" } else { "" }
            )));
        }
        let s = (y0.signum(), dy0.signum());
        if let Some(p) = prev_sign {
            if p.1 != s.1 || (nonvanishing && p.0 != s.0) {
                return Err(Error::Assumption(format!(
                    "profile `{name}`: initial data changes sign on the v-range"
                )));
            }
        }
        prev_sign = Some(s);
    }

    let coefficients: Arc<Coefficients> = Arc::new(coefficients);
    let coef = coefficients.clone();
    let rhs = move |u: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        let [q0, q1, q2] = coef(u)?;
        // columns of Φ evolve independently: (Φ₁ⱼ, Φ₂ⱼ)′ = M·(Φ₁ⱼ, Φ₂ⱼ)
        out[0] = q1 * y[0] + q0 * y[2];
        out[1] = q1 * y[1] + q0 * y[3];
        out[2] = -q2 * y[0];
        out[3] = -q2 * y[1];
        Ok(())
    };
    let outcome = DensePath::integrate(rhs, u0, &[1.0, 0.0, 0.0, 1.0], rect.u.0, rect.u.1, step)?;
    let fundamental = Arc::new(outcome.path);
    let mut field = ProfileField {
        name: name.to_string(),
        fundamental: fundamental.clone(),
        initial: initial.clone(),
        d_initial,
        coefficients,
        u0,
        requested: rect,
        valid: Rect::new(outcome.valid, rect.v),
    };

    // walk outwards from u₀ along the knots; stop before the first irregular column
    let knots: Vec<f64> = fundamental.knots().to_vec();
    let base = knots
        .iter()
        .position(|&t| t == u0)
        .unwrap_or_else(|| knots.partition_point(|&t| t < u0).min(knots.len() - 1));
    let regular = |u: f64| -> bool {
        (0..SCAN_V_SAMPLES).all(|j| {
            let v = rect.v.0 + (rect.v.1 - rect.v.0) * j as f64 / (SCAN_V_SAMPLES - 1) as f64;
            let (Ok(m), Ok(y0)) = (field.matrix(u), field.initial.eval(v)) else {
                return false;
            };
            let den = m[2] * y0 + m[3];
            let y = (m[0] * y0 + m[1]) / den;
            let det = m[0] * m[3] - m[1] * m[2];
            den > 0.0
                && y.is_finite()
                && y.abs() < PROFILE_BOUND
                && det > 0.0
                && (!nonvanishing || (y * y0 > 0.0 && y.abs() > 1.0 / PROFILE_BOUND))
        })
    };
    let mut hi = base;
    while hi + 1 < knots.len() && regular(knots[hi + 1]) {
        hi += 1;
    }
    let mut lo = base;
    while lo > 0 && regular(knots[lo - 1]) {
        lo -= 1;
    }
    if hi == lo {
        return Err(Error::Integration(format!(
            "profile `{name}` is irregular next to u0 = {u0}"
        )));
    }
    // back off one knot from an irregular neighbour
    let lo_u = if lo > 0 {
        knots[(lo + 1).min(base)]
    } else {
        knots[lo]
    };
    let hi_u = if hi + 1 < knots.len() {
        knots[hi.saturating_sub(1).max(base)]
    } else {
        knots[hi]
    };
    field.valid = Rect::new((lo_u, hi_u), rect.v);
    Ok(field)
}

/// Profile `A` of the umbilic families:
/// `A_u = ∓A²/(2r²f²a′) − a′(A² + 1)/2` (sign `Minus` for S³₁ and E³₁, `Plus` for H³₁);
/// `negated` flips the whole right-hand side, which is the profile of the branch
/// `s₂ = a − 2·atan(s₁)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_profile_a(
    sign: ProfileSign,
    r: f64,
    warping: Arc<Warping>,
    a: &Expr,
    a0: &Expr,
    u0: f64,
    rect: Rect,
    step: f64,
    negated: bool,
) -> Result<ProfileField> {
    let da = a.differentiate();
    let s = match sign {
        ProfileSign::Minus => -1.0,
        ProfileSign::Plus => 1.0,
    };
    let flip = if negated { -1.0 } else { 1.0 };
    let coef = move |u: f64| -> Result<[f64; 3]> {
        let ap = da.eval(u)?;
        if ap == 0.0 {
            return Err(Error::Assumption(format!("a′ vanishes at u = {u}")));
        }
        let f = warping.f(u)?;
        Ok([
            flip * (-0.5 * ap),
            0.0,
            flip * (s / (2.0 * r * r * f * f * ap) - 0.5 * ap),
        ])
    };
    solve_riccati_profile("A", coef, a0, u0, rect, step, true)
}

/// Profile `V` of null-scroll families with `b` and `U` given as functions of u:
/// `V_u = (U′V²(b² + c) + 1/(f²U′))/2`.
#[allow(clippy::too_many_arguments)]
pub fn solve_profile_v_with(
    u_prime: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    b_of_u: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    model: SpaceFormModel,
    warping: Arc<Warping>,
    v0: &Expr,
    u0: f64,
    rect: Rect,
    step: f64,
) -> Result<ProfileField> {
    let c = model.c();
    let coef = move |u: f64| -> Result<[f64; 3]> {
        let up = u_prime(u)?;
        if up == 0.0 {
            return Err(Error::Assumption(format!("U′ vanishes at u = {u}")));
        }
        let f = warping.f(u)?;
        let b = b_of_u(u)?;
        Ok([1.0 / (2.0 * f * f * up), 0.0, 0.5 * up * (b * b + c)])
    };
    solve_riccati_profile("V", coef, v0, u0, rect, step, false)
}

/// [`solve_profile_v_with`] for `U(u)` and `b(U)` given as expressions.
#[allow(clippy::too_many_arguments)]
pub fn solve_profile_v(
    u_map: &Expr,
    b: &Expr,
    model: SpaceFormModel,
    warping: Arc<Warping>,
    v0: &Expr,
    u0: f64,
    rect: Rect,
    step: f64,
) -> Result<ProfileField> {
    let du = u_map.differentiate();
    let bu = b.compose(u_map);
    solve_profile_v_with(
        move |u| du.eval(u),
        move |u| bu.eval(u),
        model,
        warping,
        v0,
        u0,
        rect,
        step,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;
    use crate::numkit::{derivative, integrate_ode, quad};

    fn rect() -> Rect {
        Rect::new((-0.5, 0.5), (-0.5, 0.5))
    }

    #[test]
    fn profile_a_residual_is_small() {
        let w = Arc::new(Warping::new("exp", (-1.0, 1.0), 0.0).unwrap());
        let p = solve_profile_a(
            ProfileSign::Minus,
            0.5,
            w,
            &parse("u").unwrap(),
            &parse("1+v").unwrap(),
            0.0,
            Rect::new((-0.5, 0.5), (-0.4, 0.4)),
            1e-3,
            false,
        )
        .unwrap();
        let res = p.residual(&p.valid, 41, 41).unwrap();
        assert!(res < 1e-7, "residual {res:e}");
        // A ≡ const is never a solution
        assert!((p.value(0.3, 0.0).unwrap() - p.value(0.0, 0.0).unwrap()).abs() > 1e-3);
    }

    #[test]
    fn profile_matches_direct_integration_per_line() {
        let w = Arc::new(Warping::new("cosh", (-1.0, 1.0), 0.0).unwrap());
        let a = parse("u+0.2*u^2").unwrap();
        let p = solve_profile_a(
            ProfileSign::Plus,
            1.5,
            w.clone(),
            &a,
            &parse("1+0.3*v").unwrap(),
            0.0,
            rect(),
            1e-3,
            false,
        )
        .unwrap();
        let da = a.differentiate();
        for v in [-0.4, 0.1, 0.5] {
            let path = integrate_ode(
                |u: f64, y: &[f64], out: &mut [f64]| {
                    let ap = da.eval(u)?;
                    let f = w.f(u)?;
                    out[0] =
                        y[0] * y[0] / (2.0 * 2.25 * f * f * ap) - 0.5 * ap * (y[0] * y[0] + 1.0);
                    Ok(())
                },
                &[1.0 + 0.3 * v],
                (0.0, 0.5),
                1e-3,
            )
            .unwrap();
            assert!((path.last()[0] - p.value(0.5, v).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn v_derivative_matches_difference() {
        let w = Arc::new(Warping::new("exp", (-1.0, 1.0), 0.0).unwrap());
        let p = solve_profile_v(
            &parse("u").unwrap(),
            &parse("0.4+0.2*U^2").unwrap(),
            SpaceFormModel::de_sitter(),
            w,
            &parse("1+0.3*v").unwrap(),
            0.0,
            rect(),
            1e-3,
        )
        .unwrap();
        let fd = derivative(|v| p.value(0.3, v), 0.2, 1e-3).unwrap();
        assert!((fd - p.d_v(0.3, 0.2).unwrap()).abs() < 1e-9);
        assert!(
            (p.d_u(0.3, 0.2).unwrap() - derivative(|u| p.value(u, 0.2), 0.3, 1e-3).unwrap()).abs()
                < 1e-8
        );
    }

    #[test]
    fn decoupled_profile_matches_quadrature() {
        // c = 0, b = 0: V = V₀(v) + ∫ 1/(2f²U′) du
        let w = Arc::new(Warping::new("exp", (-1.0, 1.0), 0.0).unwrap());
        let p = solve_profile_v(
            &parse("2*u").unwrap(),
            &parse("0").unwrap(),
            SpaceFormModel::minkowski(),
            w.clone(),
            &parse("1+0.3*v").unwrap(),
            0.0,
            rect(),
            1e-3,
        )
        .unwrap();
        let q = quad(|u| Ok(1.0 / (4.0 * w.f(u)?.powi(2))), 0.0, 0.4).unwrap();
        assert!((p.value(0.4, 0.1).unwrap() - (1.03 + q)).abs() < 1e-8);
    }

    #[test]
    fn blowup_clips_the_valid_rectangle() {
        // y_u = y² from y₀ = 2 + v has a pole at u = 1/(2 + v)
        let p = solve_riccati_profile(
            "y",
            |_| Ok([0.0, 0.0, 1.0]),
            &parse("2+v").unwrap(),
            0.0,
            Rect::new((0.0, 1.0), (0.0, 0.5)),
            1e-3,
            false,
        )
        .unwrap();
        assert!(p.is_clipped());
        assert!(p.valid.u.1 < 0.4 && p.valid.u.1 > 0.3, "{:?}", p.valid);
    }

    #[test]
    fn constant_initial_data_rejected() {
        let r = solve_riccati_profile(
            "y",
            |_| Ok([1.0, 0.0, 0.0]),
            &parse("1").unwrap(),
            0.0,
            rect(),
            1e-3,
            false,
        );
        assert!(matches!(r, Err(Error::Assumption(_))));
    }
}
