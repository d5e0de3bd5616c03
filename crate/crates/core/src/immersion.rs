//! Time-like surfaces in the warped product: induced metric, adapted pseudo-orthonormal
//! frame `{T, U; e₃, e₄}`, second fundamental form, shape operators, curvatures and the
//! coefficients of the generating surface.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{complement_covector, jet2_within, Jet2, Mat2, Vector, DEFAULT_JET_STEP};
use crate::spaceforms::{Ambient, SpaceFormModel};
use crate::spacetime::{Spacetime, SpacetimePoint, SpacetimeVector};

/// `|⟨T,T⟩|` above this (with `⟨T,U⟩ = −1`) means T is not light-like.
pub const LIGHTLIKE_TOLERANCE: f64 = 1e-6;

/// Step of the outer differences taken over point analyses.
pub const OUTER_STEP: f64 = 5e-3;

/// Step of the differences of the frame along linearized jets.
const FRAME_STEP: f64 = 1e-3;

/// Parameter rectangle `[u0,u1] × [v0,v1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Rect {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Self {
        Self { u, v }
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.u.0 <= u && u <= self.u.1 && self.v.0 <= v && v <= self.v.1
    }

    pub fn padded(&self, pad: f64) -> Rect {
        Rect::new(
            (self.u.0 - pad, self.u.1 + pad),
            (self.v.0 - pad, self.v.1 + pad),
        )
    }

    pub fn intersect(&self, o: &Rect) -> Option<Rect> {
        let r = Rect::new(
            (self.u.0.max(o.u.0), self.u.1.min(o.u.1)),
            (self.v.0.max(o.v.0), self.v.1.min(o.v.1)),
        );
        (r.u.0 < r.u.1 && r.v.0 < r.v.1).then_some(r)
    }

    pub fn is_valid(&self) -> bool {
        self.u.0 < self.u.1 && self.v.0 < self.v.1
    }
}

/// Regular sampling grid over a rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rect: Rect,
    pub nu: usize,
    pub nv: usize,
}

impl Grid {
    pub fn new(rect: Rect, nu: usize, nv: usize) -> Self {
        Self { rect, nu, nv }
    }

    fn coord(range: (f64, f64), n: usize, i: usize) -> f64 {
        if n <= 1 {
            0.5 * (range.0 + range.1)
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
        }
    }

    pub fn u_at(&self, i: usize) -> f64 {
        Self::coord(self.rect.u, self.nu, i)
    }

    pub fn v_at(&self, j: usize) -> f64 {
        Self::coord(self.rect.v, self.nv, j)
    }

    /// Grid points in v-major order (v outer loop, u inner loop).
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.nu * self.nv);
        for j in 0..self.nv {
            for i in 0..self.nu {
                out.push((self.u_at(i), self.v_at(j)));
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

type ChartMap = dyn Fn(f64, f64) -> Result<Vector> + Send + Sync;

/// Parametrized surface `(u,v) ↦ (φ̄(u,v), z(u,v))` in the warped product.
#[derive(Clone)]
pub struct SurfaceChart {
    pub name: String,
    pub spacetime: Spacetime,
    /// Rectangle on which the map may be evaluated (analysis rectangles sit inside it).
    pub domain: Rect,
    /// Declares the chart to be of generated form `φ = (φ̃(u,v), u)`.
    pub generated: bool,
    map: Arc<ChartMap>,
}

impl std::fmt::Debug for SurfaceChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceChart")
            .field("name", &self.name)
            .field("c", &self.spacetime.model.c())
            .field("domain", &self.domain)
            .field("generated", &self.generated)
            .finish()
    }
}

impl SurfaceChart {
    pub fn new(
        name: impl Into<String>,
        spacetime: Spacetime,
        domain: Rect,
        generated: bool,
        map: impl Fn(f64, f64) -> Result<Vector> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            spacetime,
            domain,
            generated,
            map: Arc::new(map),
        }
    }

    /// Lift a surface of the space form to the generated chart `(φ̃(u,v), u)`.
    pub fn generated_from(
        name: impl Into<String>,
        spacetime: Spacetime,
        domain: Rect,
        base: impl Fn(f64, f64) -> Result<Vector> + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, spacetime, domain, true, move |u, v| {
            Ok(base(u, v)?.extended(u))
        })
    }

    pub fn model(&self) -> SpaceFormModel {
        self.spacetime.model
    }

    /// Lifted coordinates at `(u,v)`.
    pub fn eval(&self, u: f64, v: f64) -> Result<Vector> {
        let p = (self.map)(u, v)?;
        if p.len() != self.spacetime.base_dim() + 1 {
            return Err(Error::Dimension(format!(
                "chart `{}` returned {} coordinates",
                self.name,
                p.len()
            )));
        }
        Ok(p)
    }

    pub fn point(&self, u: f64, v: f64) -> Result<SpacetimePoint> {
        let p = self.eval(u, v)?;
        let n = self.spacetime.base_dim();
        Ok(SpacetimePoint {
            base: crate::numkit::AmbientVector {
                coords: p.head(n),
                signature: self.model().signature(),
            },
            z: p[n],
        })
    }

    pub fn jet(&self, u: f64, v: f64) -> Result<Jet2<Vector>> {
        jet2_within(
            |a, b| self.eval(a, b),
            (u, v),
            DEFAULT_JET_STEP,
            self.domain.u,
            self.domain.v,
        )
    }

    /// `|⟨φ̄,φ̄⟩ − 1/c|` at a point.
    pub fn membership_residual(&self, u: f64, v: f64) -> Result<f64> {
        let p = self.eval(u, v)?;
        Ok(self
            .model()
            .membership_residual(&p.head(self.spacetime.base_dim())))
    }
}

/// Causal character of the induced metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Causal {
    Lorentzian,
    Riemannian,
    Degenerate,
}

/// Induced metric `g_ij = ⟨φ_i, φ_j⟩` and its character.
pub fn induced_metric(st: &Spacetime, jet: &Jet2<Vector>) -> (Mat2, Causal) {
    let z = jet.value[st.base_dim()];
    let g = |a: &Vector, b: &Vector| st.inner_z(z, a, b);
    let m = Mat2::new(
        g(&jet.d_u, &jet.d_u),
        g(&jet.d_u, &jet.d_v),
        g(&jet.d_v, &jet.d_u),
        g(&jet.d_v, &jet.d_v),
    );
    let scale = g(&jet.d_u, &jet.d_u)
        .abs()
        .max(g(&jet.d_v, &jet.d_v).abs())
        .max(m.get(0, 1).abs());
    let det = m.det();
    let character = if det.abs() <= 1e-12 * scale * scale || scale == 0.0 {
        Causal::Degenerate
    } else if det < 0.0 {
        Causal::Lorentzian
    } else {
        Causal::Riemannian
    };
    (m, character)
}

/// Adapted frame in lifted coordinates, with the coordinate coefficients of `T` and `U`.
#[derive(Clone, Copy, Debug)]
pub struct AdaptedFrame {
    pub t: Vector,
    pub u: Vector,
    pub e3: Vector,
    pub e4: Vector,
    /// `T = t_coef[0]·φ_u + t_coef[1]·φ_v`.
    pub t_coef: [f64; 2],
    /// `U = u_coef[0]·φ_u + u_coef[1]·φ_v`.
    pub u_coef: [f64; 2],
}

impl AdaptedFrame {
    pub fn vectors(&self) -> [Vector; 4] {
        [self.t, self.u, self.e3, self.e4]
    }

    /// Typed components `(T, U, e₃, e₄)`.
    pub fn typed(&self, model: &SpaceFormModel) -> [SpacetimeVector; 4] {
        self.vectors()
            .map(|v| SpacetimeVector::from_lifted(&v, model))
    }

    /// Residuals of `⟨T,T⟩=0, ⟨U,U⟩=0, ⟨T,U⟩=−1, ⟨e₃,e₃⟩=1, ⟨e₄,e₄⟩=1, ⟨e₃,e₄⟩=0`.
    pub fn invariant_residuals(&self, st: &Spacetime, z: f64) -> [f64; 6] {
        let g = |a: &Vector, b: &Vector| st.inner_z(z, a, b);
        [
            g(&self.t, &self.t).abs(),
            g(&self.u, &self.u).abs(),
            (g(&self.t, &self.u) + 1.0).abs(),
            (g(&self.e3, &self.e3) - 1.0).abs(),
            (g(&self.e4, &self.e4) - 1.0).abs(),
            g(&self.e3, &self.e4).abs(),
        ]
    }

    /// Largest tangent/normal cross product `⟨X, ξ⟩` for `X ∈ {T,U}`, `ξ ∈ {e₃,e₄}`.
    pub fn cross_residual(&self, st: &Spacetime, z: f64) -> f64 {
        let g = |a: &Vector, b: &Vector| st.inner_z(z, a, b);
        [
            g(&self.t, &self.e3),
            g(&self.t, &self.e4),
            g(&self.u, &self.e3),
            g(&self.u, &self.e4),
        ]
        .iter()
        .fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Adapted frame from a point and the two coordinate tangents.
///
/// `T` is the tangential part of `∂z` (2×2 Gram solve), `U` the other null direction
/// normalized by `⟨T,U⟩ = −1`, `e₃ = ∂z − T`, and `e₄` the unit normal completing the frame
/// with `det(T, U, e₃, [x̂,] e₄) > 0`, where `x̂ = (x̄, 0)` is included for c ≠ 0.
pub fn frame_from_tangents(
    st: &Spacetime,
    p: &Vector,
    pu: &Vector,
    pv: &Vector,
) -> Result<AdaptedFrame> {
    build_frame(st, p, pu, pv, true)
}

fn build_frame(
    st: &Spacetime,
    p: &Vector,
    pu: &Vector,
    pv: &Vector,
    check_null: bool,
) -> Result<AdaptedFrame> {
    let n = st.base_dim();
    let z = p[n];
    let g = |a: &Vector, b: &Vector| st.inner_z(z, a, b);
    let m = Mat2::new(g(pu, pu), g(pu, pv), g(pv, pu), g(pv, pv));
    let scale = m.max_abs();
    if !(scale > 0.0) || m.det().abs() <= 1e-12 * scale * scale {
        return Err(Error::Geometry("degenerate induced metric".into()));
    }
    if m.det() > 0.0 {
        return Err(Error::NotInScope(
            "induced metric is Riemannian; a time-like surface is required".into(),
        ));
    }
    let inv = m
        .inverse()
        .ok_or_else(|| Error::Geometry("degenerate induced metric".into()))?;
    let t_coef = inv.apply([pu[n], pv[n]]);
    let t = *pu * t_coef[0] + *pv * t_coef[1];
    let tangent_scale = pu.max_abs().max(pv.max_abs()).max(1.0);
    if t.max_abs() <= 1e-12 * tangent_scale {
        return Err(Error::Assumption("T = (∂/∂z)ᵀ vanishes".into()));
    }
    let dz = Vector::basis(n + 1, n);
    let e3 = dz - t;
    if e3.max_abs() <= 1e-12 {
        return Err(Error::Assumption("η = (∂/∂z)^⊥ vanishes".into()));
    }
    let tt = g(&t, &t);
    if check_null && tt.abs() > LIGHTLIKE_TOLERANCE {
        return Err(Error::NotInScope(format!(
            "light-like T required, ⟨T,T⟩ = {tt:e}"
        )));
    }
    let (tu, tv) = (g(&t, pu), g(&t, pv));
    let (w, w_coef, tw) = if tu.abs() >= tv.abs() {
        (*pu, [1.0, 0.0], tu)
    } else {
        (*pv, [0.0, 1.0], tv)
    };
    let a = -1.0 / tw;
    let b = -a * g(&w, &w) / (2.0 * tw);
    let u = w * a + t * b;
    let u_coef = [a * w_coef[0] + b * t_coef[0], a * w_coef[1] + b * t_coef[1]];

    let mut spanning = vec![t, u, e3];
    if let Some(xh) = st.constraint_normal(p) {
        spanning.push(xh);
    }
    let w_low = complement_covector(&spanning, n + 1);
    let diag = st.metric_diagonal(z);
    let mut e4 = Vector::zeros(n + 1);
    for i in 0..=n {
        e4[i] = w_low[i] / diag[i];
    }
    let norm2 = g(&e4, &e4);
    if !(norm2 > 0.0) {
        return Err(Error::Geometry(
            "normal complement is not space-like".into(),
        ));
    }
    let e4 = e4 * (1.0 / norm2.sqrt());
    Ok(AdaptedFrame {
        t,
        u,
        e3,
        e4,
        t_coef,
        u_coef,
    })
}

/// Adapted frame of a chart at `(u,v)`.
pub fn adapted_frame(chart: &SurfaceChart, u: f64, v: f64) -> Result<AdaptedFrame> {
    let jet = chart.jet(u, v)?;
    frame_from_tangents(&chart.spacetime, &jet.value, &jet.d_u, &jet.d_v)
}

/// Second fundamental form components and the derived operators in the basis `{T, U}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ShapeData {
    /// `(h³₁₁, h³₁₂, h³₂₂)` with indices 1 = T, 2 = U.
    pub h3: [f64; 3],
    /// `(h⁴₁₁, h⁴₁₂, h⁴₂₂)`.
    pub h4: [f64; 3],
    pub a_e3: Mat2,
    pub a_e4: Mat2,
    pub a_h: Mat2,
    /// Components of the mean curvature vector along `(e₃, e₄)`.
    pub mean: [f64; 2],
}

impl ShapeData {
    /// Operators from the `h` components. Column j is the image of the j-th basis vector of
    /// `{T, U}`, fixed by `⟨A_ξX, Y⟩ = ⟨h(X,Y), ξ⟩`.
    pub fn from_h(h3: [f64; 3], h4: [f64; 3]) -> Self {
        let op = |h: [f64; 3]| Mat2::new(-h[1], -h[2], -h[0], -h[1]);
        let a_e3 = op(h3);
        let a_e4 = op(h4);
        // H = ½ g^{ij} h_ij = −h(T,U) in the pseudo-orthonormal frame
        let mean = [-h3[1], -h4[1]];
        let a_h = a_e3.scale(mean[0]).add(&a_e4.scale(mean[1]));
        Self {
            h3,
            h4,
            a_e3,
            a_e4,
            a_h,
            mean,
        }
    }

    /// `h^a(X,Y)` for `a ∈ {3,4}` (index 0 or 1) and `X, Y ∈ {T, U}` (index 0 or 1).
    pub fn h(&self, a: usize, x: usize, y: usize) -> f64 {
        let comps = if a == 0 { &self.h3 } else { &self.h4 };
        comps[x + y]
    }

    pub fn norm(&self) -> f64 {
        self.a_e3.max_abs().max(self.a_e4.max_abs())
    }
}

/// Coefficients of the generating surface `M̂ ⊂ L³₁(c)` of a generated chart.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GeneratorCoefficients {
    /// `E = f²·g_c(φ̃_u, φ̃_v)`, the induced `g_uv`.
    pub e: f64,
    pub e_u: f64,
    pub e_v: f64,
    /// `h_i = g_c(∇_{∂i}∂j φ̃, Ñ)` for `uu`, `uv`, `vv`, with `Ñ = f·ē₄`.
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

/// First derivatives of the frame along `∂u` (index 0) and `∂v` (index 1).
#[derive(Clone, Copy, Debug)]
pub struct FrameDerivative {
    pub t: Vector,
    pub u: Vector,
    pub e3: Vector,
    pub e4: Vector,
    pub t_coef: [f64; 2],
    pub u_coef: [f64; 2],
}

/// Everything computable from the second jet at one parameter point.
#[derive(Clone, Debug)]
pub struct PointAnalysis {
    pub uv: (f64, f64),
    pub jet: Jet2<Vector>,
    pub metric: Mat2,
    pub frame: AdaptedFrame,
    pub frame_derivative: [FrameDerivative; 2],
    /// `h^a_ij = ⟨∇̃_{∂i}∂j, e_a⟩` in coordinates, indexed `[a−3][i][j]`.
    pub h_coord: [[[f64; 2]; 2]; 2],
    pub shape: ShapeData,
    /// Christoffel symbols `Γ^k_ij` of the induced metric, indexed `[k][i][j]`.
    pub christoffel: [[[f64; 2]; 2]; 2],
    /// `ω(∂k) = ⟨∇̃_{∂k} e₃, e₄⟩`.
    pub omega: [f64; 2],
    /// `(f, f', f'')` at the point.
    pub warp: (f64, f64, f64),
    /// Derivatives `∂_k g_uv` of the induced metric.
    pub d_guv: [f64; 2],
    pub generator: Option<GeneratorCoefficients>,
}

impl PointAnalysis {
    pub fn z(&self) -> f64 {
        self.jet.value[self.jet.value.len() - 1]
    }

    /// `∇̃_{∂i} ∂j = φ_ij + Γ(φ_i, φ_j)`.
    pub fn covariant_coordinate(st: &Spacetime, jet: &Jet2<Vector>, i: usize, j: usize) -> Vector {
        jet.second(i, j) + st.gamma(&jet.value, &jet.first(i), &jet.first(j))
    }
}

fn frame_derivatives(st: &Spacetime, jet: &Jet2<Vector>) -> Result<[FrameDerivative; 2]> {
    let mut out = Vec::with_capacity(2);
    for k in 0..2 {
        let dir = jet.first(k);
        let du_dir = jet.second(0, k);
        let dv_dir = jet.second(1, k);
        let scale = dir
            .max_abs()
            .max(du_dir.max_abs())
            .max(dv_dir.max_abs())
            .max(1.0);
        let s = FRAME_STEP / scale;
        // the linearized jet leaves the null constraint at second order in t
        let at = |t: f64| {
            build_frame(
                st,
                &(jet.value + dir * t),
                &(jet.d_u + du_dir * t),
                &(jet.d_v + dv_dir * t),
                false,
            )
        };
        let (p1, m1, p2, m2) = (at(s)?, at(-s)?, at(2.0 * s)?, at(-2.0 * s)?);
        let d = |f: &dyn Fn(&AdaptedFrame) -> Vector| {
            (f(&p1) - f(&m1)) * (8.0 / (12.0 * s)) - (f(&p2) - f(&m2)) * (1.0 / (12.0 * s))
        };
        let dc = |f: &dyn Fn(&AdaptedFrame) -> [f64; 2]| {
            let g = |fr: &AdaptedFrame| Vector::from_slice(&f(fr));
            let v = (g(&p1) - g(&m1)) * (8.0 / (12.0 * s)) - (g(&p2) - g(&m2)) * (1.0 / (12.0 * s));
            [v[0], v[1]]
        };
        out.push(FrameDerivative {
            t: d(&|f| f.t),
            u: d(&|f| f.u),
            e3: d(&|f| f.e3),
            e4: d(&|f| f.e4),
            t_coef: dc(&|f| f.t_coef),
            u_coef: dc(&|f| f.u_coef),
        });
    }
    Ok([out[0], out[1]])
}

/// Intrinsic data `(g, Γ^k_ij)` of a surface jet in any ambient.
pub fn intrinsic_christoffels<A: Ambient + ?Sized>(
    amb: &A,
    jet: &Jet2<Vector>,
) -> Result<(Mat2, [[[f64; 2]; 2]; 2])> {
    let p = &jet.value;
    let g = |a: &Vector, b: &Vector| amb.inner_at(p, a, b);
    let m = Mat2::new(
        g(&jet.d_u, &jet.d_u),
        g(&jet.d_u, &jet.d_v),
        g(&jet.d_v, &jet.d_u),
        g(&jet.d_v, &jet.d_v),
    );
    let inv = m
        .inverse()
        .ok_or_else(|| Error::Geometry("degenerate induced metric".into()))?;
    let mut lower = [[[0.0; 2]; 2]; 2]; // [l][i][j] = ⟨∇_i ∂_j, ∂_l⟩
    for i in 0..2 {
        for j in 0..2 {
            let cov = jet.second(i, j) + amb.christoffel(p, &jet.first(i), &jet.first(j));
            for (l, low) in lower.iter_mut().enumerate() {
                low[i][j] = g(&cov, &jet.first(l));
            }
        }
    }
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for (k, gk) in gamma.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                gk[i][j] = inv.get(k, 0) * lower[0][i][j] + inv.get(k, 1) * lower[1][i][j];
            }
        }
    }
    Ok((m, gamma))
}

/// Gaussian curvature from the metric at the point and first derivatives of the
/// Christoffel symbols: `K = ⟨R(∂u,∂v)∂v, ∂u⟩ / det g`.
pub fn gaussian_curvature_from(
    metric: &Mat2,
    gamma: &[[[f64; 2]; 2]; 2],
    d_gamma: &[[[[f64; 2]; 2]; 2]; 2],
) -> Result<f64> {
    // R(∂1,∂2)∂2 = (∂1Γ^m_22 − ∂2Γ^m_12 + Γ^p_22 Γ^m_1p − Γ^p_12 Γ^m_2p) ∂m
    let mut r = [0.0; 2];
    for (m, rm) in r.iter_mut().enumerate() {
        let mut s = d_gamma[0][m][1][1] - d_gamma[1][m][0][1];
        for p in 0..2 {
            s += gamma[p][1][1] * gamma[m][0][p] - gamma[p][0][1] * gamma[m][1][p];
        }
        *rm = s;
    }
    let num = metric.get(0, 0) * r[0] + metric.get(0, 1) * r[1];
    let det = metric.det();
    if det.abs() < 1e-14 * metric.max_abs().powi(2).max(1e-300) {
        return Err(Error::Geometry(
            "degenerate metric in curvature quotient".into(),
        ));
    }
    Ok(num / det)
}

/// Point analysis at `(u,v)`.
pub fn analyze_point(chart: &SurfaceChart, u: f64, v: f64) -> Result<PointAnalysis> {
    let st = &chart.spacetime;
    let n = st.base_dim();
    let jet = chart.jet(u, v)?;
    let frame = frame_from_tangents(st, &jet.value, &jet.d_u, &jet.d_v)?;
    let frame_derivative = frame_derivatives(st, &jet)?;
    let z = jet.value[n];
    let g = |a: &Vector, b: &Vector| st.inner_z(z, a, b);
    let (metric, _) = induced_metric(st, &jet);

    let mut h_coord = [[[0.0; 2]; 2]; 2];
    let mut cov = [[Vector::zeros(n + 1); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            cov[i][j] = PointAnalysis::covariant_coordinate(st, &jet, i, j);
            h_coord[0][i][j] = g(&cov[i][j], &frame.e3);
            h_coord[1][i][j] = g(&cov[i][j], &frame.e4);
        }
    }
    let contract = |a: usize, x: &[f64; 2], y: &[f64; 2]| {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += x[i] * y[j] * h_coord[a][i][j];
            }
        }
        s
    };
    let (tc, uc) = (&frame.t_coef, &frame.u_coef);
    let comps = |a| {
        [
            contract(a, tc, tc),
            contract(a, tc, uc),
            contract(a, uc, uc),
        ]
    };
    let shape = ShapeData::from_h(comps(0), comps(1));

    let (_, christoffel) = intrinsic_christoffels(st, &jet)?;

    let mut omega = [0.0; 2];
    for (k, om) in omega.iter_mut().enumerate() {
        let nabla = frame_derivative[k].e3 + st.gamma(&jet.value, &jet.first(k), &frame.e3);
        *om = g(&nabla, &frame.e4);
    }

    let warp = st.warping.values(z)?;
    let mut d_guv = [0.0; 2];
    for (k, d) in d_guv.iter_mut().enumerate() {
        *d = g(&cov[k][0], &jet.d_v) + g(&jet.d_u, &cov[k][1]);
    }

    let generator = if chart.generated {
        let f = warp.0;
        let (zu, zv) = (jet.d_u[n], jet.d_v[n]);
        let e = metric.get(0, 1) - zu * zv;
        let e_u = d_guv[0] - jet.d_uu[n] * zv - zu * jet.d_uv[n];
        let e_v = d_guv[1] - jet.d_uv[n] * zv - zu * jet.d_vv[n];
        let e4bar = frame.e4.head(n);
        let proj = |x: &Vector| f * st.g_bar(&x.head(n), &e4bar);
        Some(GeneratorCoefficients {
            e,
            e_u,
            e_v,
            h1: proj(&jet.d_uu),
            h2: proj(&jet.d_uv),
            h3: proj(&jet.d_vv),
        })
    } else {
        None
    };

    Ok(PointAnalysis {
        uv: (u, v),
        jet,
        metric,
        frame,
        frame_derivative,
        h_coord,
        shape,
        christoffel,
        omega,
        warp,
        d_guv,
        generator,
    })
}

/// Analysis at a point together with quantities needing one more derivative, obtained by
/// fourth-order differences of point analyses at `(u ± δ, v)`, `(u ± 2δ, v)` and likewise in v.
#[derive(Clone, Debug)]
pub struct LocalAnalysis {
    pub point: PointAnalysis,
    /// Gaussian curvature of the induced metric.
    pub gauss_k: f64,
    /// `⟨R^⊥(T,U)e₃, e₄⟩`.
    pub normal_curvature: f64,
    /// Derivatives of the frame functions `h^a(X,Y)` along `T` and `U`, indexed
    /// `[a−3][direction: 0 = T, 1 = U][component 11, 12, 22]`.
    pub dh: [[[f64; 3]; 2]; 2],
    /// `ω(T)` and `ω(U)`.
    pub omega_frame: [f64; 2],
    /// `∇_U T` of the induced connection, as a lifted vector.
    pub nabla_u_t: Vector,
    /// `U(f|_M)`.
    pub u_of_f: f64,
}

fn outer_step(chart: &SurfaceChart, x: f64, range: (f64, f64)) -> Result<f64> {
    let room = (x - range.0).min(range.1 - x) - 4.0 * DEFAULT_JET_STEP * x.abs().max(1.0);
    let d = OUTER_STEP.min(room / 2.0);
    if d < 1e-4 {
        return Err(Error::Domain(format!(
            "chart `{}`: no room for outer differences at {x}",
            chart.name
        )));
    }
    Ok(d)
}

fn d4(vals: [f64; 4], h: f64) -> f64 {
    // offsets −2h, −h, +h, +2h
    (8.0 * (vals[2] - vals[1]) - (vals[3] - vals[0])) / (12.0 * h)
}

/// Full local analysis at `(u,v)`.
pub fn analyze_local(chart: &SurfaceChart, u: f64, v: f64) -> Result<LocalAnalysis> {
    let point = analyze_point(chart, u, v)?;
    let du = outer_step(chart, u, chart.domain.u)?;
    let dv = outer_step(chart, v, chart.domain.v)?;
    let offs = [-2.0, -1.0, 1.0, 2.0];
    let mut nu = Vec::with_capacity(4);
    let mut nv = Vec::with_capacity(4);
    for o in offs {
        nu.push(analyze_point(chart, u + o * du, v)?);
        nv.push(analyze_point(chart, u, v + o * dv)?);
    }
    let deriv = |f: &dyn Fn(&PointAnalysis) -> f64| -> [f64; 2] {
        [
            d4([f(&nu[0]), f(&nu[1]), f(&nu[2]), f(&nu[3])], du),
            d4([f(&nv[0]), f(&nv[1]), f(&nv[2]), f(&nv[3])], dv),
        ]
    };

    let mut d_gamma = [[[[0.0; 2]; 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let d = deriv(&|p: &PointAnalysis| p.christoffel[k][i][j]);
                d_gamma[0][k][i][j] = d[0];
                d_gamma[1][k][i][j] = d[1];
            }
        }
    }
    let gauss_k = gaussian_curvature_from(&point.metric, &point.christoffel, &d_gamma)?;

    let tc = point.frame.t_coef;
    let uc = point.frame.u_coef;
    let d_omega_v = deriv(&|p: &PointAnalysis| p.omega[1]);
    let d_omega_u = deriv(&|p: &PointAnalysis| p.omega[0]);
    let curl = d_omega_v[0] - d_omega_u[1];
    let normal_curvature = curl * (tc[0] * uc[1] - tc[1] * uc[0]);

    let mut dh = [[[0.0; 3]; 2]; 2];
    for (a, dha) in dh.iter_mut().enumerate() {
        for c in 0..3 {
            let d = deriv(&|p: &PointAnalysis| {
                if a == 0 {
                    p.shape.h3[c]
                } else {
                    p.shape.h4[c]
                }
            });
            dha[0][c] = tc[0] * d[0] + tc[1] * d[1];
            dha[1][c] = uc[0] * d[0] + uc[1] * d[1];
        }
    }

    let omega_frame = [
        tc[0] * point.omega[0] + tc[1] * point.omega[1],
        uc[0] * point.omega[0] + uc[1] * point.omega[1],
    ];

    // ∇_U T = U(t^k)∂k + t^j u^i Γ^k_ij ∂k
    let fd = &point.frame_derivative;
    let mut nabla_coef = [0.0; 2];
    for (k, nc) in nabla_coef.iter_mut().enumerate() {
        let mut s = uc[0] * fd[0].t_coef[k] + uc[1] * fd[1].t_coef[k];
        for i in 0..2 {
            for j in 0..2 {
                s += uc[i] * tc[j] * point.christoffel[k][i][j];
            }
        }
        *nc = s;
    }
    let nabla_u_t = point.jet.d_u * nabla_coef[0] + point.jet.d_v * nabla_coef[1];

    let n = chart.spacetime.base_dim();
    let z_along_u = uc[0] * point.jet.d_u[n] + uc[1] * point.jet.d_v[n];
    let u_of_f = point.warp.1 * z_along_u;

    Ok(LocalAnalysis {
        point,
        gauss_k,
        normal_curvature,
        dh,
        omega_frame,
        nabla_u_t,
        u_of_f,
    })
}

/// Gaussian curvature of a chart at `(u,v)`.
pub fn gaussian_curvature(chart: &SurfaceChart, u: f64, v: f64) -> Result<f64> {
    Ok(analyze_local(chart, u, v)?.gauss_k)
}

/// Normal curvature `⟨R^⊥(T,U)e₃, e₄⟩` of a chart at `(u,v)`.
pub fn normal_curvature(chart: &SurfaceChart, u: f64, v: f64) -> Result<f64> {
    Ok(analyze_local(chart, u, v)?.normal_curvature)
}

/// Shape data of a chart at `(u,v)`.
pub fn fundamental_forms(chart: &SurfaceChart, u: f64, v: f64) -> Result<ShapeData> {
    let jet = chart.jet(u, v)?;
    let st = &chart.spacetime;
    let frame = frame_from_tangents(st, &jet.value, &jet.d_u, &jet.d_v)?;
    let z = jet.value[st.base_dim()];
    let mut hc = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let cov = PointAnalysis::covariant_coordinate(st, &jet, i, j);
            hc[0][i][j] = st.inner_z(z, &cov, &frame.e3);
            hc[1][i][j] = st.inner_z(z, &cov, &frame.e4);
        }
    }
    let contract = |a: usize, x: &[f64; 2], y: &[f64; 2]| {
        (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| x[i] * y[j] * hc[a][i][j])
            .sum::<f64>()
    };
    let (t, uu) = (&frame.t_coef, &frame.u_coef);
    Ok(ShapeData::from_h(
        [contract(0, t, t), contract(0, t, uu), contract(0, uu, uu)],
        [contract(1, t, t), contract(1, t, uu), contract(1, uu, uu)],
    ))
}

/// Generator coefficients of a generated chart at `(u,v)`.
pub fn generator_coefficients(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
) -> Result<GeneratorCoefficients> {
    let n = chart.spacetime.base_dim();
    let p = chart.eval(u, v)?;
    if !chart.generated || (p[n] - u).abs() > 1e-10 {
        return Err(Error::Contract(format!(
            "chart `{}` is not of generated form (z ≠ u)",
            chart.name
        )));
    }
    let a = analyze_point(chart, u, v)?;
    a.generator
        .ok_or_else(|| Error::Contract("generator data unavailable".into()))
}

/// Surface of the space form itself, `(U,V) ↦ ψ(U,V) ∈ L³₁(c)`.
#[derive(Clone)]
pub struct SpaceFormSurface {
    pub name: String,
    pub model: SpaceFormModel,
    pub domain: Rect,
    map: Arc<ChartMap>,
}

/// Metric, unit normal, second fundamental form and shape operator of a space-form surface.
#[derive(Clone, Copy, Debug)]
pub struct SpaceFormShape {
    pub metric: Mat2,
    pub normal: Vector,
    pub second: Mat2,
    /// `S = g⁻¹·II`, columns the images of `∂_1, ∂_2`.
    pub shape: Mat2,
}

impl SpaceFormSurface {
    pub fn new(
        name: impl Into<String>,
        model: SpaceFormModel,
        domain: Rect,
        map: impl Fn(f64, f64) -> Result<Vector> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            model,
            domain,
            map: Arc::new(map),
        }
    }

    pub fn eval(&self, a: f64, b: f64) -> Result<Vector> {
        (self.map)(a, b)
    }

    pub fn jet(&self, a: f64, b: f64) -> Result<Jet2<Vector>> {
        jet2_within(
            |x, y| self.eval(x, y),
            (a, b),
            DEFAULT_JET_STEP,
            self.domain.u,
            self.domain.v,
        )
    }

    /// Shape data with the normal `Ñ ∝ g_c⁻¹·det(ψ_1, ψ_2, [ψ,] ·)`.
    pub fn shape(&self, a: f64, b: f64) -> Result<SpaceFormShape> {
        let jet = self.jet(a, b)?;
        let m = &self.model;
        let n = m.ambient_dim();
        let g = |x: &Vector, y: &Vector| m.g(x, y);
        let metric = Mat2::new(
            g(&jet.d_u, &jet.d_u),
            g(&jet.d_u, &jet.d_v),
            g(&jet.d_v, &jet.d_u),
            g(&jet.d_v, &jet.d_v),
        );
        let mut spanning = vec![jet.d_u, jet.d_v];
        if m.c() != 0.0 {
            spanning.push(jet.value);
        }
        let w = complement_covector(&spanning, n);
        let sig = m.signature();
        let mut normal = Vector::zeros(n);
        for i in 0..n {
            normal[i] = w[i] * sig.sign(i);
        }
        let nn = g(&normal, &normal);
        if !(nn > 0.0) {
            return Err(Error::Geometry("surface normal is not space-like".into()));
        }
        let normal = normal * (1.0 / nn.sqrt());
        let second = Mat2::new(
            g(&jet.d_uu, &normal),
            g(&jet.d_uv, &normal),
            g(&jet.d_uv, &normal),
            g(&jet.d_vv, &normal),
        );
        let inv = metric
            .inverse()
            .ok_or_else(|| Error::Geometry("degenerate metric".into()))?;
        Ok(SpaceFormShape {
            metric,
            normal,
            second,
            shape: inv.mul(&second),
        })
    }

    /// Intrinsic Gaussian curvature by outer differences of the Christoffel symbols.
    pub fn gaussian_curvature(&self, a: f64, b: f64) -> Result<f64> {
        let christ = |x: f64, y: f64| intrinsic_christoffels(&self.model, &self.jet(x, y)?);
        let (metric, gamma) = christ(a, b)?;
        let room = |x: f64, r: (f64, f64)| {
            let d = OUTER_STEP
                .min(((x - r.0).min(r.1 - x) - 4.0 * DEFAULT_JET_STEP * x.abs().max(1.0)) / 2.0);
            if d < 1e-4 {
                Err(Error::Domain(format!(
                    "surface `{}`: no room at {x}",
                    self.name
                )))
            } else {
                Ok(d)
            }
        };
        let da = room(a, self.domain.u)?;
        let db = room(b, self.domain.v)?;
        let offs = [-2.0, -1.0, 1.0, 2.0];
        let mut ga = Vec::new();
        let mut gb = Vec::new();
        for o in offs {
            ga.push(christ(a + o * da, b)?.1);
            gb.push(christ(a, b + o * db)?.1);
        }
        let mut d_gamma = [[[[0.0; 2]; 2]; 2]; 2];
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    d_gamma[0][k][i][j] = d4(
                        [
                            ga[0][k][i][j],
                            ga[1][k][i][j],
                            ga[2][k][i][j],
                            ga[3][k][i][j],
                        ],
                        da,
                    );
                    d_gamma[1][k][i][j] = d4(
                        [
                            gb[0][k][i][j],
                            gb[1][k][i][j],
                            gb[2][k][i][j],
                            gb[3][k][i][j],
                        ],
                        db,
                    );
                }
            }
        }
        gaussian_curvature_from(&metric, &gamma, &d_gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::Warping;

    fn minkowski(f: &str) -> Spacetime {
        Spacetime::new(
            SpaceFormModel::minkowski(),
            Warping::new(f, (-1.0, 1.0), 0.0).unwrap(),
        )
    }

    fn cylinder_chart(st: Spacetime) -> SurfaceChart {
        // a generated chart over a non-degenerate Lorentzian surface of E³₁
        SurfaceChart::generated_from("test", st, Rect::new((-0.6, 0.6), (-0.6, 0.6)), |u, v| {
            Ok(Vector::from_slice(&[
                u + 2.0 * v,
                (u - v).cos(),
                (u - v).sin(),
            ]))
        })
    }

    #[test]
    fn generated_metric_has_null_v_direction() {
        let chart = cylinder_chart(minkowski("exp"));
        let jet = chart.jet(0.1, 0.2).unwrap();
        let (g, c) = induced_metric(&chart.spacetime, &jet);
        assert_eq!(c, Causal::Lorentzian);
        let f = 0.1f64.exp();
        // φ̃_v = (2, sin, −cos)·… ⟨φ̃_v,φ̃_v⟩ = −4 + 1 = −3, so g_vv = −3f²
        assert!((g.get(1, 1) + 3.0 * f * f).abs() < 1e-8);
    }

    #[test]
    fn frame_invariants_on_generated_null_chart() {
        let st = minkowski("cosh");
        let w = st.warping.clone();
        let chart = SurfaceChart::generated_from(
            "cone",
            st.clone(),
            Rect::new((-0.6, 0.6), (-0.6, 0.6)),
            move |u, v| Ok(Vector::from_slice(&[w.F(u)? - v, v.cos(), v.sin()])),
        );
        let a = analyze_point(&chart, 0.2, 0.3).unwrap();
        let res = a.frame.invariant_residuals(&st, a.z());
        assert!(res.iter().all(|r| *r < 1e-8), "{res:?}");
        assert!(a.frame.cross_residual(&st, a.z()) < 1e-8);
        // T = (1/E)∂_v and U = −∂_u
        let e = a.generator.unwrap().e;
        assert!((a.frame.t_coef[0]).abs() < 1e-8);
        assert!((a.frame.t_coef[1] - 1.0 / e).abs() < 1e-8);
        assert!((a.frame.u_coef[0] + 1.0).abs() < 1e-8 && a.frame.u_coef[1].abs() < 1e-8);
        assert!(
            (a.frame.e3[3] - 1.0).abs() < 1e-10,
            "{}",
            a.frame.e3[3] - 1.0
        );
    }

    #[test]
    fn horizontal_slice_rejected() {
        let st = minkowski("exp");
        let chart = SurfaceChart::new(
            "slice",
            st,
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            false,
            |u, v| Ok(Vector::from_slice(&[u, v, 0.0, 0.0])),
        );
        assert!(matches!(
            adapted_frame(&chart, 0.0, 0.0),
            Err(Error::Assumption(_))
        ));
        let riem = SurfaceChart::new(
            "riem",
            minkowski("exp"),
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            false,
            |u, v| Ok(Vector::from_slice(&[0.0, u, v, 0.3])),
        );
        let (_, c) = induced_metric(&riem.spacetime, &riem.jet(0.0, 0.0).unwrap());
        assert_eq!(c, Causal::Riemannian);
    }

    #[test]
    fn vertical_cylinder_rejected() {
        let st = minkowski("exp");
        let chart = SurfaceChart::new(
            "cyl",
            st,
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            false,
            |u, v| Ok(Vector::from_slice(&[u, 0.0, 0.0, v])),
        );
        assert!(matches!(
            adapted_frame(&chart, 0.0, 0.0),
            Err(Error::Assumption(_))
        ));
    }

    #[test]
    fn spacelike_t_is_out_of_scope() {
        let st = minkowski("exp");
        let chart = SurfaceChart::new(
            "tilted",
            st,
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            false,
            |u, v| Ok(Vector::from_slice(&[u, 0.0, v, 0.5 * v])),
        );
        assert!(matches!(
            adapted_frame(&chart, 0.0, 0.0),
            Err(Error::NotInScope(_))
        ));
    }

    #[test]
    fn grid_order_is_v_major() {
        let g = Grid::new(Rect::new((0.0, 1.0), (0.0, 2.0)), 3, 2);
        let p = g.points();
        assert_eq!(p[0], (0.0, 0.0));
        assert_eq!(p[1], (0.5, 0.0));
        assert_eq!(p[3], (0.0, 2.0));
    }

    #[test]
    fn plane_in_minkowski_is_flat() {
        let s = SpaceFormSurface::new(
            "plane",
            SpaceFormModel::minkowski(),
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            |a, b| Ok(Vector::from_slice(&[a, b, 0.3 * a])),
        );
        assert!(s.gaussian_curvature(0.1, 0.2).unwrap().abs() < 1e-8);
        assert!(s.shape(0.1, 0.2).unwrap().shape.max_abs() < 1e-8);
    }
}
