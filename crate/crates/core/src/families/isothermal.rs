//! Changes of parameters `(u,v) ↦ (U,V)` turning the null coordinates of a space-form surface
//! with metric `−(dU dV + dV dU)` into the generated metric `−du²/f² + (du dv + dv du)/f`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{derivative, Mat2};
use crate::spacetime::Warping;

/// Which coordinate absorbs the `v` direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsothermalKind {
    /// `U = F/(2c₁) − v/c₁ + c₂`, `V = c₁F`.
    Remark,
    /// `U = c₁F + c₂`, `V = (F − 2v)/(2c₁)`.
    Swapped,
}

/// Null-coordinate change built on `F(z) = ∫ dz/f`.
#[derive(Clone, Debug)]
pub struct IsothermalMap {
    pub kind: IsothermalKind,
    pub c1: f64,
    pub c2: f64,
    pub warping: Arc<Warping>,
}

impl IsothermalMap {
    pub fn new(kind: IsothermalKind, c1: f64, c2: f64, warping: Arc<Warping>) -> Result<Self> {
        if c1 == 0.0 || !c1.is_finite() || !c2.is_finite() {
            return Err(Error::Assumption(format!(
                "isothermal map needs c1 ≠ 0, got {c1}"
            )));
        }
        Ok(Self {
            kind,
            c1,
            c2,
            warping,
        })
    }

    /// `(U, V)` at `(u, v)`.
    pub fn map(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        let big_f = self.warping.F(u)?;
        let (c1, c2) = (self.c1, self.c2);
        Ok(match self.kind {
            IsothermalKind::Remark => (big_f / (2.0 * c1) - v / c1 + c2, c1 * big_f),
            IsothermalKind::Swapped => (c1 * big_f + c2, (big_f - 2.0 * v) / (2.0 * c1)),
        })
    }

    /// Jacobian `[[U_u, U_v], [V_u, V_v]]` in closed form.
    pub fn jacobian(&self, u: f64) -> Result<Mat2> {
        let f = self.warping.f(u)?;
        let c1 = self.c1;
        Ok(match self.kind {
            IsothermalKind::Remark => Mat2::new(1.0 / (2.0 * c1 * f), -1.0 / c1, c1 / f, 0.0),
            IsothermalKind::Swapped => Mat2::new(c1 / f, 0.0, 1.0 / (2.0 * c1 * f), -1.0 / c1),
        })
    }

    /// Jacobian by fourth-order differences of [`IsothermalMap::map`].
    pub fn jacobian_fd(&self, u: f64, v: f64, h: f64) -> Result<Mat2> {
        let uu = derivative(|x| Ok(self.map(x, v)?.0), u, h)?;
        let uv = derivative(|y| Ok(self.map(u, y)?.0), v, h)?;
        let vu = derivative(|x| Ok(self.map(x, v)?.1), u, h)?;
        let vv = derivative(|y| Ok(self.map(u, y)?.1), v, h)?;
        Ok(Mat2::new(uu, uv, vu, vv))
    }

    /// Metric `−du²/f² + (du dv + dv du)/f` expected after the change.
    pub fn target(&self, u: f64) -> Result<Mat2> {
        let f = self.warping.f(u)?;
        Ok(Mat2::new(-1.0 / (f * f), 1.0 / f, 1.0 / f, 0.0))
    }

    /// `|Jᵀ·G·J − target|` with `G = −(dU dV + dV dU)`, using the difference Jacobian.
    pub fn pullback_residual(&self, u: f64, v: f64, h: f64) -> Result<f64> {
        let j = self.jacobian_fd(u, v, h)?;
        Ok(pullback(&j).dist(&self.target(u)?))
    }
}

/// `Jᵀ·[[0, −1], [−1, 0]]·J`.
pub fn pullback(j: &Mat2) -> Mat2 {
    let g = Mat2::new(0.0, -1.0, -1.0, 0.0);
    j.transpose().mul(&g).mul(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warping() -> Arc<Warping> {
        Arc::new(Warping::new("exp", (-1.0, 1.0), 0.0).unwrap())
    }

    #[test]
    fn closed_form_jacobians_pull_back_to_target() {
        for kind in [IsothermalKind::Remark, IsothermalKind::Swapped] {
            let m = IsothermalMap::new(kind, 1.3, -0.2, warping()).unwrap();
            for u in [-0.5, 0.0, 0.7] {
                let r = pullback(&m.jacobian(u).unwrap()).dist(&m.target(u).unwrap());
                assert!(r < 1e-14, "{kind:?} {r:e}");
                assert!(
                    (m.jacobian(u).unwrap().det().abs() - 1.0 / m.warping.f(u).unwrap()).abs()
                        < 1e-14
                );
            }
        }
    }

    #[test]
    fn difference_jacobian_agrees() {
        let m = IsothermalMap::new(IsothermalKind::Remark, 0.8, 0.1, warping()).unwrap();
        let d = m
            .jacobian_fd(0.3, -0.2, 1e-3)
            .unwrap()
            .dist(&m.jacobian(0.3).unwrap());
        assert!(d < 1e-10, "{d:e}");
        assert!(m.pullback_residual(0.3, -0.2, 1e-3).unwrap() < 1e-10);
    }

    #[test]
    fn zero_c1_rejected() {
        assert!(IsothermalMap::new(IsothermalKind::Swapped, 0.0, 0.0, warping()).is_err());
    }
}
