use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::numkit::linalg::{AmbientVector, Vector};

/// Default base step for [`jet2`]. Both derivative orders use one Richardson level over
/// the stencils at `h` and `2h`, so the balance point sits near ε^{1/5}–ε^{1/6} rather than
/// the plain-central-difference ε^{1/3}.
pub const DEFAULT_JET_STEP: f64 = 2e-3;

/// Values that can be differentiated by finite differences.
pub trait JetValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn all_finite(&self) -> bool;
}

impl JetValue for f64 {
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl JetValue for Vector {
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl JetValue for AmbientVector {
    fn all_finite(&self) -> bool {
        self.coords.is_finite()
    }
}

/// Second-order jet of a map `(u,v) ↦ T`.
#[derive(Clone, Copy, Debug)]
pub struct Jet2<T> {
    pub value: T,
    pub d_u: T,
    pub d_v: T,
    pub d_uu: T,
    pub d_uv: T,
    pub d_vv: T,
}

impl<T: JetValue> Jet2<T> {
    /// Derivative along the coordinate direction `i` (0 = u, 1 = v).
    pub fn first(&self, i: usize) -> T {
        if i == 0 {
            self.d_u
        } else {
            self.d_v
        }
    }

    /// Second derivative `∂_i ∂_j`.
    pub fn second(&self, i: usize, j: usize) -> T {
        match (i, j) {
            (0, 0) => self.d_uu,
            (1, 1) => self.d_vv,
            _ => self.d_uv,
        }
    }

    pub fn map<S: JetValue>(&self, f: impl Fn(&T) -> S) -> Jet2<S> {
        Jet2 {
            value: f(&self.value),
            d_u: f(&self.d_u),
            d_v: f(&self.d_v),
            d_uu: f(&self.d_uu),
            d_uv: f(&self.d_uv),
            d_vv: f(&self.d_vv),
        }
    }
}

/// Second-order jet by central differences.
///
/// First derivatives: central differences at `h` and `2h` combined by one Richardson step.
/// Second derivatives: the 3-point (pure) and 4-corner (mixed) stencils at `h` and `2h`,
/// also Richardson-combined, so the whole jet is fourth-order accurate. The per-axis step
/// is `step·max(1,|coordinate|)`.
pub fn jet2<T, F>(map: F, at: (f64, f64), step: f64) -> Result<Jet2<T>>
where
    T: JetValue,
    F: Fn(f64, f64) -> Result<T>,
{
    let hu = step * at.0.abs().max(1.0);
    let hv = step * at.1.abs().max(1.0);
    jet2_steps(map, at, hu, hv)
}

/// Like [`jet2`], but shrinks the per-axis step so that the widest stencil stays inside
/// `[u0,u1] × [v0,v1]`.
pub fn jet2_within<T, F>(
    map: F,
    at: (f64, f64),
    step: f64,
    u_range: (f64, f64),
    v_range: (f64, f64),
) -> Result<Jet2<T>>
where
    T: JetValue,
    F: Fn(f64, f64) -> Result<T>,
{
    let mut hu = step * at.0.abs().max(1.0);
    let mut hv = step * at.1.abs().max(1.0);
    let room_u = (at.0 - u_range.0).min(u_range.1 - at.0);
    let room_v = (at.1 - v_range.0).min(v_range.1 - at.1);
    if room_u < 2.0 * hu {
        hu = room_u / 2.0;
    }
    if room_v < 2.0 * hv {
        hv = room_v / 2.0;
    }
    if hu <= step * 1e-3 || hv <= step * 1e-3 {
        return Err(Error::Domain(format!(
            "no room for a difference stencil at ({}, {})",
            at.0, at.1
        )));
    }
    jet2_steps(map, at, hu, hv)
}

fn jet2_steps<T, F>(map: F, at: (f64, f64), hu: f64, hv: f64) -> Result<Jet2<T>>
where
    T: JetValue,
    F: Fn(f64, f64) -> Result<T>,
{
    if !(hu > 0.0 && hv > 0.0) {
        return Err(Error::Domain("jet step must be positive".into()));
    }
    let (u, v) = at;
    let ev = |du: f64, dv: f64| -> Result<T> {
        let x = map(u + du, v + dv)?;
        if x.all_finite() {
            Ok(x)
        } else {
            Err(Error::NonFinite { du, dv })
        }
    };

    let f0 = ev(0.0, 0.0)?;
    let up1 = ev(hu, 0.0)?;
    let um1 = ev(-hu, 0.0)?;
    let up2 = ev(2.0 * hu, 0.0)?;
    let um2 = ev(-2.0 * hu, 0.0)?;
    let vp1 = ev(0.0, hv)?;
    let vm1 = ev(0.0, -hv)?;
    let vp2 = ev(0.0, 2.0 * hv)?;
    let vm2 = ev(0.0, -2.0 * hv)?;
    let pp1 = ev(hu, hv)?;
    let pm1 = ev(hu, -hv)?;
    let mp1 = ev(-hu, hv)?;
    let mm1 = ev(-hu, -hv)?;
    let pp2 = ev(2.0 * hu, 2.0 * hv)?;
    let pm2 = ev(2.0 * hu, -2.0 * hv)?;
    let mp2 = ev(-2.0 * hu, 2.0 * hv)?;
    let mm2 = ev(-2.0 * hu, -2.0 * hv)?;

    let rich = |fine: T, coarse: T| fine * (4.0 / 3.0) - coarse * (1.0 / 3.0);

    let d_u = rich((up1 - um1) * (0.5 / hu), (up2 - um2) * (0.25 / hu));
    let d_v = rich((vp1 - vm1) * (0.5 / hv), (vp2 - vm2) * (0.25 / hv));
    let d_uu = rich(
        (up1 - f0 * 2.0 + um1) * (1.0 / (hu * hu)),
        (up2 - f0 * 2.0 + um2) * (0.25 / (hu * hu)),
    );
    let d_vv = rich(
        (vp1 - f0 * 2.0 + vm1) * (1.0 / (hv * hv)),
        (vp2 - f0 * 2.0 + vm2) * (0.25 / (hv * hv)),
    );
    let d_uv = rich(
        (pp1 - pm1 - mp1 + mm1) * (0.25 / (hu * hv)),
        (pp2 - pm2 - mp2 + mm2) * (0.0625 / (hu * hv)),
    );
    Ok(Jet2 {
        value: f0,
        d_u,
        d_v,
        d_uu,
        d_uv,
        d_vv,
    })
}

/// Fourth-order central derivative of a scalar function of one variable.
pub fn derivative<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let a = f(x + h)?;
    let b = f(x - h)?;
    let c = f(x + 2.0 * h)?;
    let d = f(x - 2.0 * h)?;
    let r = (8.0 * (a - b) - (c - d)) / (12.0 * h);
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::NonFinite { du: h, dv: 0.0 })
    }
}
