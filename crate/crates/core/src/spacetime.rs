//! The warped product `L³₁(c) ×_f I` with metric `f(z)²g_c + dz²`.
//!
//! Points and vectors are stored as lifted coordinate vectors: the space-form coordinates
//! followed by the `z` coordinate.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exprlang::{parse, Expr};
use crate::numkit::{AmbientVector, DensePath, Vector};
use crate::spaceforms::{Ambient, SpaceFormModel};

/// Number of samples used to check `f > 0` on the interval.
pub const POSITIVITY_SAMPLES: usize = 1024;

/// Step of the dense integration of `F' = 1/f`.
const F_TABLE_STEP: f64 = 1e-3;

/// Warping function with its derivatives, interval and base point of `F`.
#[derive(Clone, Debug)]
pub struct Warping {
    source: String,
    f: Expr,
    df: Expr,
    ddf: Expr,
    interval: (f64, f64),
    z0: f64,
    primitive: Arc<DensePath>,
}

impl Warping {
    /// Build from an expression or a catalog shortcut: `one`, `exp`, `cosh`, `linear(a,b)`
    /// (the last meaning `a + b·z`).
    pub fn new(text: &str, interval: (f64, f64), z0: f64) -> Result<Self> {
        let f = Self::resolve(text)?;
        Self::from_expr(text.trim(), f, interval, z0)
    }

    pub fn one() -> Self {
        Self::new("one", (-1.0, 1.0), 0.0).expect("f = 1 is a valid warping")
    }

    fn resolve(text: &str) -> Result<Expr> {
        let s = text.trim();
        let text = match s {
            "one" => "1".to_string(),
            "exp" => "exp(z)".to_string(),
            "cosh" => "cosh(z)".to_string(),
            _ if s.starts_with("linear(") && s.ends_with(')') => {
                let args: Vec<&str> = s["linear(".len()..s.len() - 1].split(',').collect();
                if args.len() != 2 {
                    return Err(Error::config("warping.f", "linear(a,b) takes two numbers"));
                }
                let num = |t: &str| {
                    t.trim().parse::<f64>().map_err(|_| {
                        Error::config("warping.f", format!("`{}` is not a number", t.trim()))
                    })
                };
                format!("{} + {}*z", num(args[0])?, num(args[1])?)
            }
            _ => s.to_string(),
        };
        parse(&text)
    }

    fn from_expr(source: &str, f: Expr, interval: (f64, f64), z0: f64) -> Result<Self> {
        let (lo, hi) = interval;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::config(
                "warping.interval",
                format!("invalid interval [{lo}, {hi}]"),
            ));
        }
        if !(lo <= z0 && z0 <= hi) {
            return Err(Error::config(
                "warping.z0",
                format!("z0 = {z0} outside [{lo}, {hi}]"),
            ));
        }
        for i in 0..POSITIVITY_SAMPLES {
            let z = lo + (hi - lo) * i as f64 / (POSITIVITY_SAMPLES - 1) as f64;
            match f.eval(z) {
                Ok(v) if v > 0.0 => {}
                Ok(v) => {
                    return Err(Error::config(
                        "warping.f",
                        format!("f must be positive on I, f({z}) = {v}"),
                    ))
                }
                Err(e) => {
                    return Err(Error::config(
                        "warping.f",
                        format!("f not evaluable at {z}: {e}"),
                    ))
                }
            }
        }
        let df = f.differentiate();
        let ddf = df.differentiate();
        let inv = f.clone();
        let outcome = DensePath::integrate(
            move |t: f64, _y: &[f64], out: &mut [f64]| {
                out[0] = 1.0 / inv.eval(t)?;
                Ok(())
            },
            z0,
            &[0.0],
            lo,
            hi,
            F_TABLE_STEP,
        )?;
        if outcome.valid != (lo, hi) {
            return Err(Error::config("warping.f", "F could not be tabulated on I"));
        }
        Ok(Self {
            source: source.to_string(),
            f,
            df,
            ddf,
            interval,
            z0,
            primitive: Arc::new(outcome.path),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }

    pub fn derivative_expr(&self) -> &Expr {
        &self.df
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn f(&self, z: f64) -> Result<f64> {
        self.f.eval(z)
    }

    pub fn df(&self, z: f64) -> Result<f64> {
        self.df.eval(z)
    }

    pub fn ddf(&self, z: f64) -> Result<f64> {
        self.ddf.eval(z)
    }

    /// `(f, f', f'')` at `z`.
    pub fn values(&self, z: f64) -> Result<(f64, f64, f64)> {
        Ok((self.f(z)?, self.df(z)?, self.ddf(z)?))
    }

    /// `F(z) = ∫_{z0}^{z} dξ / f(ξ)`, defined on `I`.
    #[allow(non_snake_case)]
    pub fn F(&self, z: f64) -> Result<f64> {
        let (lo, hi) = self.interval;
        if !(lo <= z && z <= hi) {
            return Err(Error::Domain(format!(
                "F evaluated at {z} outside [{lo}, {hi}]"
            )));
        }
        Ok(self.primitive.eval(z)?[0])
    }
}

/// Point of the warped product: a point of the space form and a height `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub base: AmbientVector,
    pub z: f64,
}

impl SpacetimePoint {
    pub fn lifted(&self) -> Vector {
        self.base.coords.extended(self.z)
    }
}

/// Tangent vector `X = (X̄, X₄)` with `X̄` tangent to the space form and `X₄ = ⟨X, ∂z⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimeVector {
    pub bar: AmbientVector,
    pub x4: f64,
}

impl SpacetimeVector {
    pub fn new(bar: AmbientVector, x4: f64) -> Self {
        Self { bar, x4 }
    }

    /// `∂/∂z` at a point of the given model.
    pub fn d_z(model: &SpaceFormModel) -> Self {
        Self {
            bar: AmbientVector::zeros(model.signature()),
            x4: 1.0,
        }
    }

    pub fn lifted(&self) -> Vector {
        self.bar.coords.extended(self.x4)
    }

    pub fn from_lifted(v: &Vector, model: &SpaceFormModel) -> Self {
        let n = model.ambient_dim();
        Self {
            bar: AmbientVector {
                coords: v.head(n),
                signature: model.signature(),
            },
            x4: v[n],
        }
    }
}

/// Components `(X̄, X₄)` of a vector.
pub fn split(x: &SpacetimeVector) -> (AmbientVector, f64) {
    (x.bar, x.x4)
}

/// The warped product together with its model and warping.
#[derive(Clone, Debug)]
pub struct Spacetime {
    pub model: SpaceFormModel,
    pub warping: Arc<Warping>,
}

impl Spacetime {
    pub fn new(model: SpaceFormModel, warping: Warping) -> Self {
        Self {
            model,
            warping: Arc::new(warping),
        }
    }

    pub fn base_dim(&self) -> usize {
        self.model.ambient_dim()
    }

    fn fz(&self, z: f64) -> (f64, f64, f64) {
        let w = &self.warping;
        (w.f.eval_raw(z), w.df.eval_raw(z), w.ddf.eval_raw(z))
    }

    /// `g_c` on the space-form parts of lifted vectors.
    #[inline]
    pub fn g_bar(&self, x: &Vector, y: &Vector) -> f64 {
        let n = self.base_dim();
        let sig = self.model.signature();
        let mut s = 0.0;
        for i in 0..n {
            s += sig.sign(i) * x[i] * y[i];
        }
        s
    }

    /// `f(z)²g_c(X̄,Ȳ) + X₄Y₄` on lifted vectors at height `z`.
    #[inline]
    pub fn inner_z(&self, z: f64, x: &Vector, y: &Vector) -> f64 {
        let f = self.warping.f.eval_raw(z);
        let n = self.base_dim();
        f * f * self.g_bar(x, y) + x[n] * y[n]
    }

    /// Diagonal of the metric in lifted coordinates.
    pub fn metric_diagonal(&self, z: f64) -> Vector {
        let n = self.base_dim();
        let f = self.warping.f.eval_raw(z);
        let sig = self.model.signature();
        let mut d = Vector::zeros(n + 1);
        for i in 0..n {
            d[i] = sig.sign(i) * f * f;
        }
        d[n] = 1.0;
        d
    }

    /// Typed metric evaluation at a point.
    pub fn metric(
        &self,
        x: &SpacetimeVector,
        y: &SpacetimeVector,
        p: &SpacetimePoint,
    ) -> Result<f64> {
        if x.bar.signature != self.model.signature() || y.bar.signature != self.model.signature() {
            return Err(Error::Dimension(
                "vector signature does not match the model".into(),
            ));
        }
        let f = self.warping.f(p.z)?;
        Ok(f * f * self.model.g(&x.bar.coords, &y.bar.coords) + x.x4 * y.x4)
    }

    /// Connection term for lifted tangent vectors at `p`:
    /// `∇̃_X Y = D_X Y + (c g_c(X̄,Ȳ)x̄ + (f'/f)(X₄Ȳ + Y₄X̄), −f f' g_c(X̄,Ȳ))`.
    pub fn gamma(&self, p: &Vector, x: &Vector, y: &Vector) -> Vector {
        let n = self.base_dim();
        let (f, df, _) = self.fz(p[n]);
        let gxy = self.g_bar(x, y);
        let c = self.model.c();
        let k = df / f;
        let mut out = Vector::zeros(n + 1);
        for i in 0..n {
            out[i] = c * gxy * p[i] + k * (x[n] * y[i] + y[n] * x[i]);
        }
        out[n] = -f * df * gxy;
        out
    }

    /// Levi-Civita connection from a flat derivative of `Y` along `X`.
    pub fn connection(
        &self,
        p: &SpacetimePoint,
        x: &SpacetimeVector,
        y: &SpacetimeVector,
        flat_derivative: &SpacetimeVector,
    ) -> SpacetimeVector {
        let r = flat_derivative.lifted() + self.gamma(&p.lifted(), &x.lifted(), &y.lifted());
        SpacetimeVector::from_lifted(&r, &self.model)
    }

    /// Closed-form curvature on lifted vectors. With `k = (c − f'²)/f²` and `⟨,⟩` the warped
    /// metric:
    /// `R(X,Y)Z = k(⟨Ȳ,Z̄⟩X̄ − ⟨X̄,Z̄⟩Ȳ)
    ///   + (f''/f)(X₄Z₄Ȳ − Y₄Z₄X̄ + (Y₄⟨X̄,Z̄⟩ − X₄⟨Ȳ,Z̄⟩)∂z)`.
    pub fn curvature_lifted(&self, p: &Vector, x: &Vector, y: &Vector, z: &Vector) -> Vector {
        let n = self.base_dim();
        let (f, df, ddf) = self.fz(p[n]);
        let c = self.model.c();
        let k = (c - df * df) / (f * f);
        let q = ddf / f;
        let f2 = f * f;
        let yz = f2 * self.g_bar(y, z);
        let xz = f2 * self.g_bar(x, z);
        let (x4, y4, z4) = (x[n], y[n], z[n]);
        let mut out = Vector::zeros(n + 1);
        for i in 0..n {
            out[i] = k * (yz * x[i] - xz * y[i]) + q * (x4 * z4 * y[i] - y4 * z4 * x[i]);
        }
        out[n] = q * (y4 * xz - x4 * yz);
        out
    }

    /// Typed closed-form curvature.
    pub fn curvature(
        &self,
        x: &SpacetimeVector,
        y: &SpacetimeVector,
        z: &SpacetimeVector,
        p: &SpacetimePoint,
    ) -> SpacetimeVector {
        let r = self.curvature_lifted(&p.lifted(), &x.lifted(), &y.lifted(), &z.lifted());
        SpacetimeVector::from_lifted(&r, &self.model)
    }

    /// Curvature by nested finite differences of the connection.
    pub fn curvature_fd(
        &self,
        x: &SpacetimeVector,
        y: &SpacetimeVector,
        z: &SpacetimeVector,
        p: &SpacetimePoint,
    ) -> SpacetimeVector {
        let r = crate::spaceforms::fd_curvature(
            self,
            &p.lifted(),
            &x.lifted(),
            &y.lifted(),
            &z.lifted(),
        );
        SpacetimeVector::from_lifted(&r, &self.model)
    }

    /// Random point with base coordinates near the model's base point and `z ∈ (−0.8, 0.8)`.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Vector {
        let n = self.base_dim();
        let mut p = Vector::zeros(n + 1);
        for i in 0..n {
            p[i] = rng.gen_range(-0.6..0.6);
        }
        match self.model.c_int() {
            1 => p[1] += 1.2,
            -1 => p[0] += 1.2,
            _ => {}
        }
        p[n] = rng.gen_range(-0.8..0.8);
        Ambient::retract(self, &p)
    }

    /// Random tangent vector at `p` with coordinates in `(−1, 1)` before projection.
    pub fn random_tangent<R: Rng>(&self, p: &Vector, rng: &mut R) -> Vector {
        let mut v = Vector::zeros(self.base_dim() + 1);
        for i in 0..v.len() {
            v[i] = rng.gen_range(-1.0..1.0);
        }
        Ambient::project(self, p, &v)
    }

    /// Lifted `(x̄, 0)` for c ≠ 0: the normal of the space form inside its flat ambient.
    pub fn constraint_normal(&self, p: &Vector) -> Option<Vector> {
        if self.model.c() == 0.0 {
            None
        } else {
            Some(p.head(self.base_dim()).extended(0.0))
        }
    }
}

impl Ambient for Spacetime {
    fn dim(&self) -> usize {
        self.base_dim() + 1
    }

    fn inner_at(&self, p: &Vector, x: &Vector, y: &Vector) -> f64 {
        self.inner_z(p[self.base_dim()], x, y)
    }

    fn christoffel(&self, p: &Vector, x: &Vector, y: &Vector) -> Vector {
        self.gamma(p, x, y)
    }

    fn project(&self, p: &Vector, x: &Vector) -> Vector {
        let n = self.base_dim();
        self.model.project(&p.head(n), &x.head(n)).extended(x[n])
    }

    fn retract(&self, q: &Vector) -> Vector {
        let n = self.base_dim();
        self.model.retract(&q.head(n)).extended(q[n])
    }

    fn curvature(&self, p: &Vector, x: &Vector, y: &Vector, z: &Vector) -> Result<Vector> {
        Ok(self.curvature_lifted(p, x, y, z))
    }
}
