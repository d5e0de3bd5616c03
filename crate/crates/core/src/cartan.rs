//! Null scrolls: Cartan frame integration along null curves, null-scroll charts and the
//! closed-form flat B-scroll of E³₁ and flat null scroll of H³₁.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprlang::Expr;
use crate::immersion::{Rect, SpaceFormSurface};
use crate::numkit::{DensePath, Vector};
use crate::spaceforms::SpaceFormModel;

/// Largest Gram-constraint drift accepted at the end of an integration.
pub const CARTAN_DRIFT_LIMIT: f64 = 1e-6;

/// Cartan frame `{A, B; C}` along a null curve `α`: `⟨A,B⟩ = −1`, `⟨C,C⟩ = 1`, all other
/// products zero, and for c ≠ 0 also `⟨α,α⟩ = 1/c`, `α ⟂ A, B, C`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartanState {
    pub alpha: Vector,
    pub a: Vector,
    pub b: Vector,
    pub c: Vector,
}

impl CartanState {
    fn to_state(self) -> Vec<f64> {
        let mut s = Vec::with_capacity(4 * self.alpha.len());
        for v in [self.alpha, self.a, self.b, self.c] {
            s.extend_from_slice(v.as_slice());
        }
        s
    }

    fn from_state(s: &[f64], n: usize) -> Self {
        let part = |i: usize| Vector::from_slice(&s[i * n..(i + 1) * n]);
        Self {
            alpha: part(0),
            a: part(1),
            b: part(2),
            c: part(3),
        }
    }

    /// Largest deviation over the Gram constraints (seven, or ten for c ≠ 0).
    pub fn gram_residual(&self, model: &SpaceFormModel) -> f64 {
        let g = |x: &Vector, y: &Vector| model.g(x, y);
        let mut r = [
            g(&self.a, &self.a),
            g(&self.b, &self.b),
            g(&self.a, &self.b) + 1.0,
            g(&self.c, &self.c) - 1.0,
            g(&self.c, &self.a),
            g(&self.c, &self.b),
            0.0,
        ]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
        if model.c() != 0.0 {
            for x in [
                g(&self.alpha, &self.alpha) - 1.0 / model.c(),
                g(&self.alpha, &self.a),
                g(&self.alpha, &self.b),
                g(&self.alpha, &self.c),
            ] {
                r = r.max(x.abs());
            }
        }
        r
    }
}

/// Fixed initial state satisfying all invariants.
pub fn canonical_initial_frame(model: SpaceFormModel) -> CartanState {
    let s = 1.0 / SQRT_2;
    let v = Vector::from_slice;
    match model.c_int() {
        0 => CartanState {
            alpha: v(&[0.0, 0.0, 0.0]),
            a: v(&[s, s, 0.0]),
            b: v(&[s, -s, 0.0]),
            c: v(&[0.0, 0.0, 1.0]),
        },
        1 => CartanState {
            alpha: v(&[0.0, 1.0, 0.0, 0.0]),
            a: v(&[s, 0.0, s, 0.0]),
            b: v(&[s, 0.0, -s, 0.0]),
            c: v(&[0.0, 0.0, 0.0, 1.0]),
        },
        _ => CartanState {
            alpha: v(&[1.0, 0.0, 0.0, 0.0]),
            a: v(&[0.0, s, s, 0.0]),
            b: v(&[0.0, s, -s, 0.0]),
            c: v(&[0.0, 0.0, 0.0, 1.0]),
        },
    }
}

/// Integrated Cartan frame along a parameter interval.
#[derive(Clone, Debug)]
pub struct CartanPath {
    pub model: SpaceFormModel,
    path: Arc<DensePath>,
    /// Largest Gram-constraint residual over the integration knots.
    pub drift: f64,
}

impl CartanPath {
    pub fn eval(&self, t: f64) -> Result<CartanState> {
        Ok(CartanState::from_state(
            &self.path.eval(t)?,
            self.model.ambient_dim(),
        ))
    }

    pub fn range(&self) -> (f64, f64) {
        self.path.range()
    }

    /// States at the integration knots.
    pub fn samples(&self) -> Vec<(f64, CartanState)> {
        let n = self.model.ambient_dim();
        self.path
            .knots()
            .iter()
            .zip(self.path.knot_values())
            .map(|(t, y)| (*t, CartanState::from_state(y, n)))
            .collect()
    }
}

/// Integrate `α′ = A, A′ = aC, B′ = bC + cα, C′ = bA + aB` (flat ambient derivatives) with
/// `a`, `b` expressions of the curve parameter U, from `init` at `t0` over `span`.
pub fn integrate_cartan_frame(
    a: &Expr,
    b: &Expr,
    model: SpaceFormModel,
    init: CartanState,
    t0: f64,
    span: (f64, f64),
    step: f64,
) -> Result<CartanPath> {
    let (a, b) = (a.clone(), b.clone());
    integrate_cartan_with(model, init, t0, span, step, move |t| {
        Ok((1.0, a.eval(t)?, b.eval(t)?))
    })
}

/// Cartan system along a reparametrization: `coef(t) = (dU/dt, a, b)` and every right-hand
/// side is multiplied by `dU/dt`.
pub fn integrate_cartan_with(
    model: SpaceFormModel,
    init: CartanState,
    t0: f64,
    span: (f64, f64),
    step: f64,
    coef: impl Fn(f64) -> Result<(f64, f64, f64)>,
) -> Result<CartanPath> {
    let n = model.ambient_dim();
    if init.alpha.len() != n || init.a.len() != n || init.b.len() != n || init.c.len() != n {
        return Err(Error::Dimension(format!(
            "Cartan state must have {n} coordinates per vector"
        )));
    }
    let r0 = init.gram_residual(&model);
    if r0 > 1e-10 {
        return Err(Error::Contract(format!(
            "initial Cartan state violates its invariants by {r0:e}"
        )));
    }
    let c = model.c();
    let rhs = |t: f64, y: &[f64], out: &mut [f64]| -> Result<()> {
        let (speed, a, b) = coef(t)?;
        for i in 0..n {
            let (al, aa, bb, cc) = (y[i], y[n + i], y[2 * n + i], y[3 * n + i]);
            out[i] = speed * aa;
            out[n + i] = speed * a * cc;
            out[2 * n + i] = speed * (b * cc + c * al);
            out[3 * n + i] = speed * (b * aa + a * bb);
        }
        Ok(())
    };
    let outcome = DensePath::integrate(rhs, t0, &init.to_state(), span.0, span.1, step)?;
    if outcome.valid != span {
        return Err(Error::Integration(format!(
            "Cartan frame diverged; integrated only on [{}, {}]",
            outcome.valid.0, outcome.valid.1
        )));
    }
    let drift = outcome
        .path
        .knot_values()
        .iter()
        .map(|y| CartanState::from_state(y, n).gram_residual(&model))
        .fold(0.0, f64::max);
    if drift > CARTAN_DRIFT_LIMIT {
        return Err(Error::Integration(format!(
            "Cartan invariants drifted by {drift:e}"
        )));
    }
    Ok(CartanPath {
        model,
        path: Arc::new(outcome.path),
        drift,
    })
}

/// Null scroll `(U, V) ↦ α(U) + V·B(U)` over an integrated frame.
pub fn null_scroll_chart(name: &str, path: CartanPath, v_range: (f64, f64)) -> SpaceFormSurface {
    let domain = Rect::new(path.range(), v_range);
    let model = path.model;
    SpaceFormSurface::new(name, model, domain, move |u, v| {
        let s = path.eval(u)?;
        Ok(s.alpha + s.b * v)
    })
}

/// Flat B-scroll of E³₁ with `b = 0`, `a = 1`.
pub fn flat_bscroll_e31(u: f64, v: f64) -> Vector {
    let k = 1.0 / (6.0 * SQRT_2);
    Vector::from_slice(&[
        k * (u.powi(3) + 6.0 * u + 6.0 * v),
        k * 3.0 * SQRT_2 * u * u,
        k * (u.powi(3) - 6.0 * u + 6.0 * v),
    ])
}

/// Flat null scroll of H³₁ with parameter k.
pub fn flat_nullscroll_h31(k: f64, u: f64, v: f64) -> Vector {
    let w = u - 2.0 * k * k * v;
    let (sn, cs) = (u / k).sin_cos();
    let d = 2.0 * SQRT_2 * k * k;
    Vector::from_slice(&[
        (w * cs - 2.0 * k * sn) / (2.0 * k),
        -((2.0 * k.powi(3) + k) * cs + w * sn) / d,
        (k * (2.0 * k * k - 1.0) * cs - w * sn) / d,
        w * cs / (2.0 * k),
    ])
}

/// Cartan frame of [`flat_nullscroll_h31`] along `V = 0`: `α = ψ`, `A = ψ_U`, `B = ψ_V`,
/// `C = ψ_UV + ψ`. The frame data are `a = −1/k²`, `b = 1`.
pub fn flat_nullscroll_h31_frame(k: f64, u: f64) -> CartanState {
    let (sn, cs) = (u / k).sin_cos();
    let d = 2.0 * SQRT_2 * k * k;
    let alpha = flat_nullscroll_h31(k, u, 0.0);
    let a = Vector::from_slice(&[
        (-cs - u * sn / k) / (2.0 * k),
        -(-2.0 * k * k * sn + u * cs / k) / d,
        (-2.0 * k * k * sn - u * cs / k) / d,
        (cs - u * sn / k) / (2.0 * k),
    ]);
    let b = Vector::from_slice(&[-k * cs, sn / SQRT_2, sn / SQRT_2, -k * cs]);
    let b_u = Vector::from_slice(&[sn, cs / (SQRT_2 * k), cs / (SQRT_2 * k), sn]);
    CartanState {
        alpha,
        a,
        b,
        c: b_u + alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::parse;

    fn expr(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn canonical_frames_satisfy_invariants() {
        for m in [
            SpaceFormModel::minkowski(),
            SpaceFormModel::de_sitter(),
            SpaceFormModel::anti_de_sitter(),
        ] {
            assert!(canonical_initial_frame(m).gram_residual(&m) < 1e-15);
        }
        let m = SpaceFormModel::minkowski();
        let s = canonical_initial_frame(m);
        assert!((m.g(&s.a, &s.b) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn trivial_flow_is_a_straight_line() {
        let m = SpaceFormModel::minkowski();
        let init = canonical_initial_frame(m);
        let path =
            integrate_cartan_frame(&expr("0"), &expr("0"), m, init, 0.0, (0.0, 1.0), 1e-2).unwrap();
        let s = path.eval(0.7).unwrap();
        assert!((s.alpha - (init.alpha + init.a * 0.7)).max_abs() < 1e-14);
        assert!((s.c - init.c).max_abs() < 1e-14);
    }

    #[test]
    fn closed_form_frame_is_a_cartan_frame() {
        let m = SpaceFormModel::anti_de_sitter();
        for u in [0.0, 0.4, 1.0] {
            assert!(flat_nullscroll_h31_frame(0.7, u).gram_residual(&m) < 1e-13);
        }
    }

    #[test]
    fn integrated_h31_frame_matches_closed_form() {
        let k = 0.7;
        let m = SpaceFormModel::anti_de_sitter();
        let a = Expr::constant(-1.0 / (k * k));
        let path = integrate_cartan_frame(
            &a,
            &Expr::constant(1.0),
            m,
            flat_nullscroll_h31_frame(k, 0.0),
            0.0,
            (0.0, 1.0),
            1e-3,
        )
        .unwrap();
        assert!(path.drift < 1e-9, "drift {}", path.drift);
        let mut err = 0.0f64;
        for i in 0..=50 {
            let u = i as f64 / 50.0;
            let s = path.eval(u).unwrap();
            let e = flat_nullscroll_h31_frame(k, u);
            for (x, y) in [(s.alpha, e.alpha), (s.a, e.a), (s.b, e.b), (s.c, e.c)] {
                err = err.max((x - y).max_abs());
            }
        }
        assert!(err < 1e-6, "frame error {err:e}");
    }

    #[test]
    fn flat_scrolls_pass_through_origin_and_are_members() {
        assert_eq!(flat_bscroll_e31(0.0, 0.0).max_abs(), 0.0);
        let m = SpaceFormModel::anti_de_sitter();
        for (u, v) in [(0.0, 0.0), (0.3, -0.7), (1.0, 1.0)] {
            assert!(m.membership_residual(&flat_nullscroll_h31(0.7, u, v)) < 1e-12);
        }
    }

    #[test]
    fn flat_scrolls_have_zero_curvature() {
        let e = SpaceFormSurface::new(
            "bscroll",
            SpaceFormModel::minkowski(),
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            |u, v| Ok(flat_bscroll_e31(u, v)),
        );
        let h = SpaceFormSurface::new(
            "h31",
            SpaceFormModel::anti_de_sitter(),
            Rect::new((-0.2, 1.2), (-1.2, 1.2)),
            |u, v| Ok(flat_nullscroll_h31(0.7, u, v)),
        );
        for (u, v) in [(0.1, 0.2), (0.5, -0.5), (0.9, 0.8)] {
            assert!(e.gaussian_curvature(u, v).unwrap().abs() < 1e-4);
            assert!(h.gaussian_curvature(u, v).unwrap().abs() < 1e-4);
        }
    }

    #[test]
    fn scroll_shape_operator_in_null_basis() {
        // wrt {∂V, ∂U}: [[b, a + V b′], [0, b]] up to the normal orientation
        let m = SpaceFormModel::de_sitter();
        let (a, b) = (expr("1"), expr("0.4+0.2*z^2"));
        let path = integrate_cartan_frame(
            &a,
            &b,
            m,
            canonical_initial_frame(m),
            0.0,
            (-1.0, 1.0),
            1e-3,
        )
        .unwrap();
        let chart = null_scroll_chart("scroll", path, (-1.0, 1.0));
        for (u, v) in [(0.2, 0.3), (-0.4, -0.5)] {
            assert!(chart.model.membership_residual(&chart.eval(u, v).unwrap()) < 1e-8);
            let s = chart.shape(u, v).unwrap().shape;
            // permute to the basis (∂V, ∂U)
            let w = [[s.get(1, 1), s.get(1, 0)], [s.get(0, 1), s.get(0, 0)]];
            let bb = 0.4 + 0.2 * u * u;
            let expected = [[bb, 1.0 + v * 0.4 * u], [0.0, bb]];
            let sign = if w[0][0] * bb > 0.0 { 1.0 } else { -1.0 };
            for i in 0..2 {
                for j in 0..2 {
                    assert!((sign * w[i][j] - expected[i][j]).abs() < 1e-4, "{w:?}");
                }
            }
        }
    }
}
