//! Constructors of every catalog family.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::sync::Arc;

use super::isothermal::{IsothermalKind, IsothermalMap};
use super::profile::{solve_profile_a, solve_profile_v_with, ProfileField, ProfileSign};
use super::{
    Branch, Claim, ClaimValue, Comparison, Family, FamilyConfig, FamilyId, NativeChart, Observable,
    PAD,
};
use crate::cartan::{
    canonical_initial_frame, flat_bscroll_e31, flat_nullscroll_h31, integrate_cartan_with,
    CartanPath,
};
use crate::error::{Error, Result};
use crate::exprlang::{parse, Expr};
use crate::immersion::{Grid, Rect, SpaceFormSurface, SurfaceChart};
use crate::numkit::{derivative, DensePath, Mat2, Vector};
use crate::spaceforms::SpaceFormModel;
use crate::spacetime::{Spacetime, Warping};

/// Absolute tolerance of pointwise claims.
const CLAIM_TOLERANCE: f64 = 1e-5;

/// Absolute tolerance of curvature claims, which need one more derivative.
const CURVATURE_TOLERANCE: f64 = 1e-4;

/// Samples used to check conditions on profile functions.
const CONDITION_SAMPLES: usize = 201;

type Map = Arc<dyn Fn(f64, f64) -> Result<Vector> + Send + Sync>;
type Scalar = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Build the chart, grid and claims of a configured family.
pub fn build_family(cfg: &FamilyConfig) -> Result<Family> {
    let b = Builder::new(cfg)?;
    match b.id {
        FamilyId::ClassAS31 => umbilic(b, Umbilic::S31, false),
        FamilyId::ClassAH31 => umbilic(b, Umbilic::H31, false),
        FamilyId::ClassAE31 => umbilic(b, Umbilic::E31, false),
        FamilyId::GeneratorUmbilicS31 => umbilic(b, Umbilic::S31, true),
        FamilyId::GeneratorUmbilicH31 => umbilic(b, Umbilic::H31, true),
        FamilyId::GeneratorUmbilicE31 => umbilic(b, Umbilic::E31, true),
        FamilyId::ClassAH31Quadric => quadric(b),
        FamilyId::ClassANullScroll
        | FamilyId::PseudoE31NullScroll
        | FamilyId::PseudoS31NullScroll => null_scroll(b),
        FamilyId::PseudoE31BScroll => bscroll(b),
        FamilyId::PseudoE31Cone => cone(b),
        FamilyId::PseudoS31Torus => torus(b),
        FamilyId::TotUmbH31 => totally_umbilical(b),
        FamilyId::GeneratorUmbilicH31Flat
        | FamilyId::GeneratorScrollE31Flat
        | FamilyId::GeneratorScrollH31Flat => flat_generator(b),
        FamilyId::PerturbedE31Cylinder => perturbed(b),
    }
}

struct Builder {
    id: FamilyId,
    cfg: FamilyConfig,
    model: SpaceFormModel,
    warping: Arc<Warping>,
    rect: Rect,
    padded: Rect,
    u0: f64,
    step: f64,
}

impl Builder {
    fn new(cfg: &FamilyConfig) -> Result<Self> {
        let id = cfg.id()?;
        let c = cfg.c.unwrap_or(id.curvatures()[0]);
        if !id.curvatures().contains(&c) {
            return Err(Error::config(
                "c",
                format!("{id} is defined for c ∈ {:?}, got {c}", id.curvatures()),
            ));
        }
        let model = SpaceFormModel::new(c).map_err(|e| Error::config("c", e.to_string()))?;
        let w = &cfg.warping;
        let warping = Arc::new(Warping::new(&w.f, (w.interval[0], w.interval[1]), w.z0)?);

        for name in ["r", "k", "k2", "theta", "a", "c1", "c2", "c3"] {
            if let Some(x) = cfg.params.get(name) {
                if !id.parameters().iter().any(|(p, _)| *p == name) {
                    return Err(Error::config(
                        format!("params.{name}"),
                        format!("not a parameter of {id}"),
                    ));
                }
                if !x.is_finite() {
                    return Err(Error::config(format!("params.{name}"), "must be finite"));
                }
            }
        }
        for name in ["a", "b", "U", "A0", "V0", "b1", "b2"] {
            if cfg.profiles.get(name).is_some() && !id.profiles().iter().any(|(p, _)| *p == name) {
                return Err(Error::config(
                    format!("profiles.{name}"),
                    format!("not a profile of {id}"),
                ));
            }
        }
        if cfg.branch == Branch::Atan && !id.has_branches() {
            return Err(Error::config(
                "branch",
                format!("{id} has no alternate branch"),
            ));
        }

        let g = &cfg.grid;
        if !(g.u[0] < g.u[1])
            || !(g.v[0] < g.v[1])
            || !g.u.iter().chain(&g.v).all(|x| x.is_finite())
        {
            return Err(Error::config(
                "grid",
                "ranges must be finite and increasing",
            ));
        }
        if g.nu < 2 || g.nv < 2 {
            return Err(Error::config(
                "grid.nu",
                "grids need at least 2 points per axis",
            ));
        }
        if !(g.step > 0.0 && g.step <= 0.1) {
            return Err(Error::config(
                "grid.step",
                format!("step must lie in (0, 0.1], got {}", g.step),
            ));
        }
        let rect = Rect::new((g.u[0], g.u[1]), (g.v[0], g.v[1]));
        let padded = rect.padded(PAD);
        let (lo, hi) = warping.interval();
        if padded.u.0 < lo || padded.u.1 > hi {
            return Err(Error::config(
                "grid.u",
                format!("u-range widened by {PAD} must lie inside I = [{lo}, {hi}]"),
            ));
        }
        let u0 = g.u0.unwrap_or(0.5 * (rect.u.0 + rect.u.1));
        if !(rect.u.0 <= u0 && u0 <= rect.u.1) {
            return Err(Error::config(
                "grid.u0",
                "base point must lie in the u-range",
            ));
        }
        Ok(Self {
            id,
            cfg: cfg.clone(),
            model,
            warping,
            rect,
            padded,
            u0,
            step: g.step,
        })
    }

    fn param(&self, name: &str) -> f64 {
        self.cfg.params.get(name).unwrap_or_else(|| {
            self.id
                .parameters()
                .iter()
                .find(|(p, _)| *p == name)
                .map(|(_, d)| *d)
                .unwrap_or(0.0)
        })
    }

    fn profile(&self, name: &str) -> Result<Expr> {
        let default = self
            .id
            .profiles()
            .iter()
            .find(|(p, _)| *p == name)
            .map(|(_, d)| *d)
            .unwrap_or("0");
        let text = self.cfg.profiles.get(name).unwrap_or(default);
        parse(text).map_err(|e| Error::config(format!("profiles.{name}"), e.to_string()))
    }

    /// Fail with a config error at `path` unless `check` holds on samples of `range`.
    fn require(
        &self,
        path: &str,
        range: (f64, f64),
        message: &str,
        check: impl Fn(f64) -> Result<bool>,
    ) -> Result<()> {
        for i in 0..CONDITION_SAMPLES {
            let x = range.0 + (range.1 - range.0) * i as f64 / (CONDITION_SAMPLES - 1) as f64;
            match check(x) {
                Ok(true) => {}
                Ok(false) => return Err(Error::config(path, format!("{message} (fails at {x})"))),
                Err(e) => return Err(Error::config(path, format!("{message}: {e}"))),
            }
        }
        Ok(())
    }

    fn spacetime(&self) -> Spacetime {
        Spacetime {
            model: self.model,
            warping: self.warping.clone(),
        }
    }

    fn finish(self, map: Map, valid: Rect, extras: Extras) -> Result<Family> {
        let mut warnings = Vec::new();
        let clip = |lo: f64, hi: f64, vlo: f64, vhi: f64, plo: f64, phi: f64| {
            let a = if vlo <= plo + 1e-12 {
                lo
            } else {
                lo.max(vlo + PAD)
            };
            let b = if vhi >= phi - 1e-12 {
                hi
            } else {
                hi.min(vhi - PAD)
            };
            (a, b)
        };
        let gu = clip(
            self.rect.u.0,
            self.rect.u.1,
            valid.u.0,
            valid.u.1,
            self.padded.u.0,
            self.padded.u.1,
        );
        let gv = clip(
            self.rect.v.0,
            self.rect.v.1,
            valid.v.0,
            valid.v.1,
            self.padded.v.0,
            self.padded.v.1,
        );
        let grid_rect = Rect::new(gu, gv);
        if !grid_rect.is_valid() {
            return Err(Error::Integration(format!(
                "{}: profiles are regular only on u ∈ [{}, {}], too small for the grid",
                self.id, valid.u.0, valid.u.1
            )));
        }
        if grid_rect != self.rect {
            warnings.push(format!(
                "{}: analysis grid clipped to u ∈ [{}, {}], v ∈ [{}, {}]",
                self.id, gu.0, gu.1, gv.0, gv.1
            ));
        }
        let chart_map = map.clone();
        let chart =
            SurfaceChart::generated_from(self.id.as_str(), self.spacetime(), valid, move |u, v| {
                chart_map(u, v)
            });
        let generator =
            SpaceFormSurface::new(self.id.as_str(), self.model, valid, move |u, v| map(u, v));
        let grid = Grid::new(grid_rect, self.cfg.grid.nu, self.cfg.grid.nv);
        Ok(Family {
            id: self.id,
            config: self.cfg,
            chart,
            generator,
            grid,
            valid,
            warnings,
            claims: extras.claims,
            native: extras.native,
            cartan: extras.cartan,
            profile: extras.profile,
        })
    }
}

#[derive(Default)]
struct Extras {
    claims: Vec<Claim>,
    native: Option<NativeChart>,
    cartan: Option<CartanPath>,
    profile: Option<ProfileField>,
}

fn scalar(x: f64) -> Result<ClaimValue> {
    Ok(ClaimValue::Scalar(x))
}

fn vector(xs: &[f64]) -> Result<ClaimValue> {
    Ok(ClaimValue::Vector(Vector::from_slice(xs)))
}

fn matrix(a: f64, b: f64, c: f64, d: f64) -> Result<ClaimValue> {
    Ok(ClaimValue::Matrix(Mat2::new(a, b, c, d)))
}

fn exact(
    quantity: &str,
    observable: Observable,
    expected: impl Fn(f64, f64) -> Result<ClaimValue> + Send + Sync + 'static,
) -> Claim {
    let tol = if observable.is_expensive() {
        CURVATURE_TOLERANCE
    } else {
        CLAIM_TOLERANCE
    };
    Claim::new(quantity, observable, Comparison::Exact, tol, expected)
}

fn up_to_sign(
    quantity: &str,
    observable: Observable,
    expected: impl Fn(f64, f64) -> Result<ClaimValue> + Send + Sync + 'static,
) -> Claim {
    Claim::new(
        quantity,
        observable,
        Comparison::UpToSign,
        CLAIM_TOLERANCE,
        expected,
    )
}

fn informative(
    quantity: &str,
    observable: Observable,
    expected: impl Fn(f64, f64) -> Result<ClaimValue> + Send + Sync + 'static,
) -> Claim {
    Claim::new(
        quantity,
        observable,
        Comparison::Informative,
        CLAIM_TOLERANCE,
        expected,
    )
}

/// Bounding rectangle of `coords` over samples of `rect`.
fn native_domain(coords: &dyn Fn(f64, f64) -> Result<(f64, f64)>, rect: &Rect) -> Result<Rect> {
    let n = 21;
    let (mut a, mut b) = (
        (f64::INFINITY, f64::NEG_INFINITY),
        (f64::INFINITY, f64::NEG_INFINITY),
    );
    for j in 0..n {
        for i in 0..n {
            let u = rect.u.0 + (rect.u.1 - rect.u.0) * i as f64 / (n - 1) as f64;
            let v = rect.v.0 + (rect.v.1 - rect.v.0) * j as f64 / (n - 1) as f64;
            let (x, y) = coords(u, v)?;
            a = (a.0.min(x), a.1.max(x));
            b = (b.0.min(y), b.1.max(y));
        }
    }
    Ok(Rect::new(a, b))
}

/// Solve `g(x) = target` for increasing or decreasing `g` on `[lo, hi]`.
fn invert_monotone(g: &dyn Fn(f64) -> Result<f64>, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a)? - target, g(b)? - target);
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::Domain(format!(
            "{target} outside the range of the map on [{lo}, {hi}]"
        )));
    }
    let increasing = gb > ga;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m)? - target;
        if (gm < 0.0) == increasing {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

// ----------------------------------------------------------------------------------------
// Umbilic class A families and their native charts.

#[derive(Clone, Copy, PartialEq, Eq)]
enum Umbilic {
    S31,
    H31,
    E31,
}

/// Generator point from the profile `A` and the rotation angle `s₂`.
fn umbilic_point(kind: Umbilic, r: f64, a: f64, s2: f64) -> Vector {
    let (sn, cs) = s2.sin_cos();
    match kind {
        Umbilic::S31 => Vector::from_slice(&[
            r / a,
            r * (cs / a - sn),
            r * (sn / a + cs),
            (1.0 - r * r).sqrt(),
        ]),
        Umbilic::H31 => Vector::from_slice(&[
            r * (cs / a - sn),
            r * (sn / a + cs),
            r / a,
            (r * r - 1.0).sqrt(),
        ]),
        Umbilic::E31 => Vector::from_slice(&[r / a, r * (cs / a - sn), r * (sn / a + cs)]),
    }
}

/// Native parametrization of the umbilic surface by `(s₁, s₂)`.
fn umbilic_native(kind: Umbilic, r: f64, s1: f64, s2: f64) -> Vector {
    let (sn, cs) = s2.sin_cos();
    let (sh, ch) = (s1.sinh(), s1.cosh());
    match kind {
        Umbilic::S31 => {
            Vector::from_slice(&[r * sh, r * ch * cs, r * ch * sn, (1.0 - r * r).sqrt()])
        }
        Umbilic::H31 => {
            Vector::from_slice(&[r * ch * cs, r * ch * sn, r * sh, (r * r - 1.0).sqrt()])
        }
        Umbilic::E31 => Vector::from_slice(&[r * sh, r * ch * cs, r * ch * sn]),
    }
}

/// Native coordinates `s₁ = asinh(1/A)`, `s₂ = a + atan(A)` (shifted by π for `A < 0`).
fn umbilic_native_coords(a_value: f64, a_profile: f64) -> (f64, f64) {
    let shift = if a_profile < 0.0 { PI } else { 0.0 };
    (
        (1.0 / a_profile).asinh(),
        a_value + a_profile.atan() + shift,
    )
}

fn umbilic(b: Builder, kind: Umbilic, native: bool) -> Result<Family> {
    let r = b.param("r");
    let ok = match kind {
        Umbilic::S31 => r > 0.0 && r < 1.0,
        Umbilic::H31 => r > 1.0,
        Umbilic::E31 => r > 0.0,
    };
    if !ok {
        let need = match kind {
            Umbilic::S31 => "0 < r < 1",
            Umbilic::H31 => "r > 1",
            Umbilic::E31 => "r > 0",
        };
        return Err(Error::config(
            "params.r",
            format!("{} needs {need}, got {r}", b.id),
        ));
    }
    let a = b.profile("a")?;
    let da = a.differentiate();
    let dda = da.differentiate();
    b.require("profiles.a", b.padded.u, "a′ must not vanish", |u| {
        Ok(da.eval(u)? != 0.0)
    })?;
    let a0 = b.profile("A0")?;
    let sign = if kind == Umbilic::H31 {
        ProfileSign::Plus
    } else {
        ProfileSign::Minus
    };
    let atan = b.cfg.branch == Branch::Atan;
    let prof = solve_profile_a(
        sign,
        r,
        b.warping.clone(),
        &a,
        &a0,
        b.u0,
        b.padded,
        b.step,
        atan,
    )
    .map_err(|e| match e {
        Error::Assumption(m) => Error::config("profiles.A0", m),
        e => e,
    })?;
    let valid = prof.valid;

    let (p, ax) = (prof.clone(), a.clone());
    let map: Map = if native {
        Arc::new(move |u, v| {
            let (s1, s2) = umbilic_native_coords(ax.eval(u)?, p.value(u, v)?);
            Ok(umbilic_native(kind, r, s1, s2))
        })
    } else {
        Arc::new(move |u, v| {
            let av = p.value(u, v)?;
            let s2 = if atan {
                ax.eval(u)? - 2.0 * av.atan()
            } else {
                ax.eval(u)?
            };
            Ok(umbilic_point(kind, r, av, s2))
        })
    };

    let mut claims = Vec::new();
    let curvature = match kind {
        Umbilic::H31 => -1.0 / (r * r),
        _ => 1.0 / (r * r),
    };
    claims.push(exact("generator_K", Observable::GeneratorK, move |_, _| {
        scalar(curvature)
    }));
    let w = b.warping.clone();
    if native {
        let (p, ax) = (prof.clone(), a.clone());
        claims.push(exact("chart_point", Observable::ChartPoint, move |u, v| {
            Ok(ClaimValue::Vector(umbilic_point(
                kind,
                r,
                p.value(u, v)?,
                ax.eval(u)?,
            )))
        }));
        claims.push(exact("base_K", Observable::BaseK, move |_, _| {
            scalar(curvature)
        }));
    } else if !atan {
        let (p, da2, w2) = (prof.clone(), da.clone(), w.clone());
        let e_sign = if kind == Umbilic::H31 { -1.0 } else { 1.0 };
        claims.push(exact("E", Observable::InducedE, move |u, v| {
            let av = p.value(u, v)?;
            scalar(e_sign * r * r * w2.f(u)?.powi(2) * da2.eval(u)? * p.d_v(u, v)? / (av * av))
        }));
        let w2 = w.clone();
        let h4 = move |u: f64| -> Result<f64> {
            let f = w2.f(u)?;
            Ok(match kind {
                Umbilic::S31 => -(1.0 - r * r).sqrt() / (r * f),
                Umbilic::H31 => (r * r - 1.0).sqrt() / (r * f),
                Umbilic::E31 => -1.0 / (r * f),
            })
        };
        claims.push(up_to_sign("h4", Observable::H4, move |u, _| {
            let x = h4(u)?;
            vector(&[0.0, x, x])
        }));
        let (w2, ax, da2) = (w.clone(), a.clone(), da.clone());
        claims.push(exact("e3", Observable::FrameE3, move |u, _| {
            let s = r * w2.f(u)?.powi(2) * da2.eval(u)?;
            let (sn, cs) = ax.eval(u)?.sin_cos();
            match kind {
                Umbilic::S31 => vector(&[1.0 / s, cs / s, sn / s, 0.0, 1.0]),
                Umbilic::H31 => vector(&[-cs / s, -sn / s, -1.0 / s, 0.0, 1.0]),
                Umbilic::E31 => vector(&[1.0 / s, cs / s, sn / s, 1.0]),
            }
        }));
        let (w2, ax, p) = (w.clone(), a.clone(), prof.clone());
        claims.push(up_to_sign("e4", Observable::FrameE4, move |u, v| {
            let f = w2.f(u)?;
            let av = p.value(u, v)?;
            let (sn, cs) = ax.eval(u)?.sin_cos();
            match kind {
                Umbilic::S31 => {
                    let q = (1.0 - r * r).sqrt();
                    let s = q / (f * av);
                    vector(&[
                        -s,
                        s * (av * sn - cs),
                        s * (-av * cs - sn),
                        s * r * av / q,
                        0.0,
                    ])
                }
                Umbilic::H31 => {
                    let q = (r * r - 1.0).sqrt();
                    let s = q / (f * av);
                    vector(&[
                        s * (cs - av * sn),
                        s * (av * cs + sn),
                        s,
                        s * r * av / q,
                        0.0,
                    ])
                }
                Umbilic::E31 => {
                    let s = 1.0 / (f * av);
                    vector(&[s, s * (cs - av * sn), s * (av * cs + sn), 0.0])
                }
            }
        }));
        if kind == Umbilic::S31 {
            let (w2, p, da2, dda2) = (w.clone(), prof.clone(), da.clone(), dda.clone());
            claims.push(informative(
                "A_e3_12",
                Observable::ShapeE3UpperRight,
                move |u, v| {
                    let (f, fp, _) = w2.values(u)?;
                    let ap = da2.eval(u)?;
                    scalar(ap / p.value(u, v)? + fp / f + dda2.eval(u)? / ap)
                },
            ));
            // E_u/E − f′/f with E = r²f²a′A_v/A², A_uv by differences of A_v
            let (w2, p, da2, dda2) = (w.clone(), prof.clone(), da.clone(), dda.clone());
            claims.push(informative(
                "A_e3_12_from_E",
                Observable::ShapeE3UpperRight,
                move |u, v| {
                    let (f, fp, _) = w2.values(u)?;
                    let ap = da2.eval(u)?;
                    let h = 1e-3 * (p.valid.u.1 - p.valid.u.0);
                    let a_uv = derivative(|x| p.d_v(x, v), u, h)?;
                    let e_u_over_e = 2.0 * fp / f + dda2.eval(u)? / ap + a_uv / p.d_v(u, v)?
                        - 2.0 * p.d_u(u, v)? / p.value(u, v)?;
                    scalar(e_u_over_e - fp / f)
                },
            ));
        }
    }

    let native_chart = if native {
        let (p, ax) = (prof.clone(), a.clone());
        let coords = move |u: f64, v: f64| Ok(umbilic_native_coords(ax.eval(u)?, p.value(u, v)?));
        let domain = native_domain(&coords, &valid)?;
        let surface = SpaceFormSurface::new(b.id.as_str(), b.model, domain, move |s1, s2| {
            Ok(umbilic_native(kind, r, s1, s2))
        });
        Some(NativeChart::new(surface, coords))
    } else {
        None
    };
    b.finish(
        map,
        valid,
        Extras {
            claims,
            native: native_chart,
            cartan: None,
            profile: Some(prof),
        },
    )
}

// ----------------------------------------------------------------------------------------
// Closed-form H³₁ families.

/// Flat quadric `((U+V)/√2, a(2UV−1) − 1/(4a), a(2UV−1) + 1/(4a), (U−V)/√2)` of H³₁.
pub fn flat_quadric_h31(a: f64, u: f64, v: f64) -> Vector {
    let m = a * (2.0 * u * v - 1.0);
    Vector::from_slice(&[
        (u + v) / SQRT_2,
        m - 1.0 / (4.0 * a),
        m + 1.0 / (4.0 * a),
        (u - v) / SQRT_2,
    ])
}

fn nonzero(b: &Builder, name: &str) -> Result<f64> {
    let x = b.param(name);
    if x == 0.0 {
        return Err(Error::config(
            format!("params.{name}"),
            format!("{name} must be non-zero"),
        ));
    }
    Ok(x)
}

fn quadric(b: Builder) -> Result<Family> {
    let a = nonzero(&b, "a")?;
    let c1 = nonzero(&b, "c1")?;
    let c2 = b.param("c2");
    let w = b.warping.clone();
    let w2 = w.clone();
    let map: Map = Arc::new(move |u, v| {
        let big_f = w2.F(u)?;
        let q = a * (c1 * big_f + c2) * (2.0 * v - big_f) / c1;
        let d = 2.0 * SQRT_2 * c1;
        Ok(Vector::from_slice(&[
            (2.0 * c1 * c1 * big_f + 2.0 * c2 * c1 + big_f - 2.0 * v) / d,
            -q - a - 1.0 / (4.0 * a),
            -q - a + 1.0 / (4.0 * a),
            ((2.0 * c1 * c1 - 1.0) * big_f + 2.0 * (c1 * c2 + v)) / d,
        ]))
    });
    let iso = IsothermalMap::new(IsothermalKind::Swapped, c1, c2, w.clone())?;
    let mut claims = vec![
        flat_metric_claim(&w),
        exact("generator_K", Observable::GeneratorK, |_, _| scalar(0.0)),
        exact("chart_point", Observable::ChartPoint, move |u, v| {
            let (big_u, big_v) = iso.map(u, v)?;
            Ok(ClaimValue::Vector(flat_quadric_h31(a, big_u, big_v)))
        }),
    ];
    let w2 = w.clone();
    claims.push(exact("A_e3", Observable::ShapeE3, move |u, _| {
        let (f, fp, _) = w2.values(u)?;
        matrix(-fp / f, 0.0, 0.0, -fp / f)
    }));
    let w2 = w.clone();
    claims.push(informative(
        "A_e3_positive_dlogf",
        Observable::ShapeE3,
        move |u, _| {
            let (f, fp, _) = w2.values(u)?;
            matrix(fp / f, 0.0, 0.0, fp / f)
        },
    ));
    let w2 = w.clone();
    claims.push(up_to_sign("A_e4", Observable::ShapeE4, move |u, _| {
        let f = w2.f(u)?;
        matrix(1.0 / f, 1.0 / f, 0.0, 1.0 / f)
    }));
    let w2 = w.clone();
    claims.push(exact("e3", Observable::FrameE3, move |u, _| {
        let f = w2.f(u)?;
        let s = 1.0 / (SQRT_2 * c1 * f);
        let m = 2.0 * SQRT_2 * a * (c1 * w2.F(u)? + c2);
        vector(&[s, s * m, s * m, -s, 1.0])
    }));
    let valid = b.padded;
    b.finish(
        map,
        valid,
        Extras {
            claims,
            ..Extras::default()
        },
    )
}

fn totally_umbilical(b: Builder) -> Result<Family> {
    let k = nonzero(&b, "k")?;
    let k2 = b.param("k2");
    let w = b.warping.clone();
    let w2 = w.clone();
    let map: Map = Arc::new(move |u, v| {
        let th = w2.F(u)? + k2 / k;
        let q = 2.0 * k * v + k2;
        let (sn, cs) = th.sin_cos();
        let d = 2.0 * SQRT_2 * k * k;
        Ok(Vector::from_slice(&[
            (q * cs - 2.0 * k * sn) / (2.0 * k),
            (-k * (2.0 * k * k + 1.0) * cs - q * sn) / d,
            (k * (2.0 * k * k - 1.0) * cs - q * sn) / d,
            q * cs / (2.0 * k),
        ]))
    });
    let iso = IsothermalMap::new(IsothermalKind::Swapped, k, k2, w.clone())?;
    let mut claims = vec![
        flat_metric_claim(&w),
        exact("chart_point", Observable::ChartPoint, move |u, v| {
            let (big_u, big_v) = iso.map(u, v)?;
            Ok(ClaimValue::Vector(flat_nullscroll_h31(k, big_u, big_v)))
        }),
    ];
    let w2 = w.clone();
    claims.push(exact("A_e3", Observable::ShapeE3, move |u, _| {
        let (f, fp, _) = w2.values(u)?;
        matrix(-fp / f, 0.0, 0.0, -fp / f)
    }));
    let w2 = w.clone();
    claims.push(up_to_sign("A_e4", Observable::ShapeE4, move |u, _| {
        let f = w2.f(u)?;
        matrix(1.0 / f, 0.0, 0.0, 1.0 / f)
    }));
    let valid = b.padded;
    b.finish(
        map,
        valid,
        Extras {
            claims,
            ..Extras::default()
        },
    )
}

/// `E = f`, the induced `g_uv` of every chart built with a null-coordinate change.
fn flat_metric_claim(w: &Arc<Warping>) -> Claim {
    let w = w.clone();
    exact("E", Observable::InducedE, move |u, _| scalar(w.f(u)?))
}

fn flat_generator(b: Builder) -> Result<Family> {
    let c1 = nonzero(&b, "c1")?;
    let c2 = b.param("c2");
    let base: Arc<dyn Fn(f64, f64) -> Vector + Send + Sync> = match b.id {
        FamilyId::GeneratorUmbilicH31Flat => {
            let a = nonzero(&b, "a")?;
            Arc::new(move |x, y| flat_quadric_h31(a, x, y))
        }
        FamilyId::GeneratorScrollH31Flat => {
            let k = nonzero(&b, "k")?;
            Arc::new(move |x, y| flat_nullscroll_h31(k, x, y))
        }
        _ => Arc::new(flat_bscroll_e31),
    };
    let iso = IsothermalMap::new(IsothermalKind::Remark, c1, c2, b.warping.clone())?;
    let (iso2, base2) = (iso.clone(), base.clone());
    let map: Map = Arc::new(move |u, v| {
        let (x, y) = iso2.map(u, v)?;
        Ok(base2(x, y))
    });
    let valid = b.padded;
    let iso2 = iso.clone();
    let coords = move |u: f64, v: f64| iso2.map(u, v);
    let domain = native_domain(&coords, &valid)?;
    let surface = SpaceFormSurface::new(b.id.as_str(), b.model, domain, move |x, y| Ok(base(x, y)));
    let claims = vec![
        flat_metric_claim(&b.warping),
        exact("generator_K", Observable::GeneratorK, |_, _| scalar(0.0)),
        exact("base_K", Observable::BaseK, |_, _| scalar(0.0)),
    ];
    b.finish(
        map,
        valid,
        Extras {
            claims,
            native: Some(NativeChart::new(surface, coords)),
            ..Extras::default()
        },
    )
}

// ----------------------------------------------------------------------------------------
// Null scrolls.

struct ScrollCoefficients {
    /// `U′(u)`.
    up: Scalar,
    /// `U″(u)`.
    upp: Scalar,
    /// `a(U(u))`.
    a: Scalar,
    /// `b(U(u))`.
    b: Scalar,
    /// `(db/dU)(U(u))`.
    db: Scalar,
}

fn scroll_coefficients(b: &Builder, u_map: &Expr) -> Result<ScrollCoefficients> {
    let du = u_map.differentiate();
    let ddu = du.differentiate();
    let (d1, d2) = (du.clone(), ddu.clone());
    let up: Scalar = Arc::new(move |u| d1.eval(u));
    let upp: Scalar = Arc::new(move |u| d2.eval(u));
    let w = b.warping.clone();
    Ok(match b.id {
        FamilyId::ClassANullScroll => {
            let a = b.profile("a")?;
            let bb = b.profile("b")?;
            let db = bb.differentiate().compose(u_map);
            let (a, bb) = (a.compose(u_map), bb.compose(u_map));
            ScrollCoefficients {
                up,
                upp,
                a: Arc::new(move |u| a.eval(u)),
                b: Arc::new(move |u| bb.eval(u)),
                db: Arc::new(move |u| db.eval(u)),
            }
        }
        FamilyId::PseudoE31NullScroll => {
            let c3 = nonzero(b, "c3")?;
            let (w1, w2, w3) = (w.clone(), w.clone(), w.clone());
            let (d1, d2, d3) = (du.clone(), ddu.clone(), du.clone());
            ScrollCoefficients {
                up,
                upp,
                a: Arc::new(move |u| {
                    let (f, fp, _) = w1.values(u)?;
                    let (p, pp) = (d1.eval(u)?, d2.eval(u)?);
                    Ok((-c3 * c3 * f * f * p + f * fp * pp + fp * fp * p)
                        / (c3 * f.powi(3) * p.powi(3)))
                }),
                b: Arc::new(move |u| Ok(c3 * w2.f(u)?)),
                db: Arc::new(move |u| Ok(c3 * w3.df(u)? / d3.eval(u)?)),
            }
        }
        _ => {
            let c3 = b.param("c3");
            let w0 = w.clone();
            b.require("params.c3", b.padded.u, "c₃f² > 1 is required", |u| {
                Ok(c3 * w0.f(u)?.powi(2) > 1.0)
            })?;
            let (w1, w2, w3) = (w.clone(), w.clone(), w.clone());
            let (d1, d2, d3) = (du.clone(), ddu.clone(), du.clone());
            ScrollCoefficients {
                up,
                upp,
                a: Arc::new(move |u| {
                    let (f, fp, _) = w1.values(u)?;
                    let (p, pp) = (d1.eval(u)?, d2.eval(u)?);
                    let s = (c3 * f * f - 1.0).sqrt();
                    Ok((p * (-c3 * f * f + fp * fp + 1.0) + f * fp * pp) / (f * f * s * p.powi(3)))
                }),
                b: Arc::new(move |u| Ok((c3 * w2.f(u)?.powi(2) - 1.0).sqrt())),
                db: Arc::new(move |u| {
                    let (f, fp, _) = w3.values(u)?;
                    Ok(c3 * f * fp / (c3 * f * f - 1.0).sqrt() / d3.eval(u)?)
                }),
            }
        }
    })
}

fn null_scroll(b: Builder) -> Result<Family> {
    let u_map = b.profile("U")?;
    let du = u_map.differentiate();
    b.require("profiles.U", b.padded.u, "U′ must not vanish", |u| {
        Ok(du.eval(u)? != 0.0)
    })?;
    let co = scroll_coefficients(&b, &u_map)?;
    let model = b.model;
    let c = model.c();
    let (up, ca, cb) = (co.up.clone(), co.a.clone(), co.b.clone());
    let cartan = integrate_cartan_with(
        model,
        canonical_initial_frame(model),
        b.u0,
        b.padded.u,
        b.step,
        move |u| Ok((up(u)?, ca(u)?, cb(u)?)),
    )?;
    let v0 = b.profile("V0")?;
    let (up, cb) = (co.up.clone(), co.b.clone());
    let prof = solve_profile_v_with(
        move |u| up(u),
        move |u| cb(u),
        model,
        b.warping.clone(),
        &v0,
        b.u0,
        b.padded,
        b.step,
    )
    .map_err(|e| match e {
        Error::Assumption(m) => Error::config("profiles.V0", m),
        e => e,
    })?;
    let valid = prof.valid;
    let (path, p) = (cartan.clone(), prof.clone());
    let map: Map = Arc::new(move |u, v| {
        let s = path.eval(u)?;
        Ok(s.alpha + s.b * p.value(u, v)?)
    });

    let w = b.warping.clone();
    let mut claims = Vec::new();
    let (w2, p, up) = (w.clone(), prof.clone(), co.up.clone());
    claims.push(exact("E", Observable::InducedE, move |u, v| {
        scalar(-up(u)? * w2.f(u)?.powi(2) * p.d_v(u, v)?)
    }));
    let (w2, p, up, upp, cb) = (
        w.clone(),
        prof.clone(),
        co.up.clone(),
        co.upp.clone(),
        co.b.clone(),
    );
    claims.push(exact("A_e3", Observable::ShapeE3, move |u, v| {
        let (f, fp, _) = w2.values(u)?;
        let (d1, d2, bv, vv) = (up(u)?, upp(u)?, cb(u)?, p.value(u, v)?);
        let off = (fp * d1 + f * ((bv * bv + c) * vv * d1 * d1 + d2)) / (f * d1);
        matrix(-fp / f, off, 0.0, -fp / f)
    }));
    let (w2, p, up, ca, cb, cdb) = (
        w.clone(),
        prof.clone(),
        co.up.clone(),
        co.a.clone(),
        co.b.clone(),
        co.db.clone(),
    );
    claims.push(up_to_sign("A_e4", Observable::ShapeE4, move |u, v| {
        let f = w2.f(u)?;
        let (d1, av, bv, dbv, vv) = (up(u)?, ca(u)?, cb(u)?, cdb(u)?, p.value(u, v)?);
        let off = (f * f * (av + vv * dbv) * d1 * d1 + bv) / f;
        matrix(bv / f, off, 0.0, bv / f)
    }));
    let (w2, path, up) = (w.clone(), cartan.clone(), co.up.clone());
    claims.push(exact("e3", Observable::FrameE3, move |u, _| {
        let s = up(u)? * w2.f(u)?.powi(2);
        Ok(ClaimValue::Vector(
            (path.eval(u)?.b * (1.0 / s)).extended(1.0),
        ))
    }));
    let (w2, path, p, cb) = (w.clone(), cartan.clone(), prof.clone(), co.b.clone());
    claims.push(up_to_sign("e4", Observable::FrameE4, move |u, v| {
        let s = path.eval(u)?;
        let x = s.b * (p.value(u, v)? * cb(u)?) + s.c;
        Ok(ClaimValue::Vector((x * (1.0 / w2.f(u)?)).extended(0.0)))
    }));
    let (p, ca, cb, cdb) = (prof.clone(), co.a.clone(), co.b.clone(), co.db.clone());
    claims.push(up_to_sign(
        "base_shape",
        Observable::BaseShape,
        move |u, v| {
            let bv = cb(u)?;
            matrix(bv, ca(u)? + p.value(u, v)? * cdb(u)?, 0.0, bv)
        },
    ));
    if b.id == FamilyId::PseudoE31NullScroll {
        let (w2, c3) = (w.clone(), b.param("c3"));
        claims.push(exact("A_H", Observable::MeanShape, move |u, _| {
            let (f, fp, _) = w2.values(u)?;
            let l = c3 * c3 + fp * fp / (f * f);
            matrix(l, 0.0, 0.0, l)
        }));
    }

    // native chart (V, U) ↦ α(U) + V·B(U), with u recovered from U by bisection
    let (ux, p) = (u_map.clone(), prof.clone());
    let coords = move |u: f64, v: f64| Ok((p.value(u, v)?, ux.eval(u)?));
    let domain = native_domain(&coords, &valid)?;
    let (ux, path, urange) = (u_map.clone(), cartan.clone(), valid.u);
    let surface = SpaceFormSurface::new(b.id.as_str(), model, domain, move |x, y| {
        let u = invert_monotone(&|t| ux.eval(t), y, urange.0, urange.1)?;
        let s = path.eval(u)?;
        Ok(s.alpha + s.b * x)
    });
    b.finish(
        map,
        valid,
        Extras {
            claims,
            native: Some(NativeChart::new(surface, coords)),
            cartan: Some(cartan),
            profile: Some(prof),
        },
    )
}

// ----------------------------------------------------------------------------------------
// Remaining E³₁ and S³₁ families.

fn bscroll(b: Builder) -> Result<Family> {
    let c1 = nonzero(&b, "c1")?;
    let c2 = b.param("c2");
    let w = b.warping.clone();
    let w2 = w.clone();
    let map: Map = Arc::new(move |u, v| {
        let big_f = w2.F(u)?;
        let m = c1 * big_f + c2;
        let t = (3.0 * big_f - 6.0 * v) / c1;
        let d = 6.0 * SQRT_2;
        Ok(Vector::from_slice(&[
            (m.powi(3) + 6.0 * m + t) / d,
            m * m / 2.0,
            (m.powi(3) - 6.0 * m + t) / d,
        ]))
    });
    let iso = IsothermalMap::new(IsothermalKind::Swapped, c1, c2, w.clone())?;
    let mut claims = vec![
        flat_metric_claim(&w),
        exact("chart_point", Observable::ChartPoint, move |u, v| {
            let (x, y) = iso.map(u, v)?;
            Ok(ClaimValue::Vector(flat_bscroll_e31(x, y)))
        }),
    ];
    claims.push(mean_square_claim(&w));
    let valid = b.padded;
    b.finish(
        map,
        valid,
        Extras {
            claims,
            ..Extras::default()
        },
    )
}

/// `A_H = (f′/f)²·Id`.
fn mean_square_claim(w: &Arc<Warping>) -> Claim {
    let w = w.clone();
    exact("A_H", Observable::MeanShape, move |u, _| {
        let (f, fp, _) = w.values(u)?;
        let l = (fp / f).powi(2);
        matrix(l, 0.0, 0.0, l)
    })
}

fn cone(b: Builder) -> Result<Family> {
    let b1 = b.profile("b1")?;
    let b2 = b.profile("b2")?;
    let (d1, d2) = (b1.differentiate(), b2.differentiate());
    b.require(
        "profiles.b1",
        b.padded.v,
        "b₁′² + b₂′² = 1 is required",
        |v| Ok((d1.eval(v)?.powi(2) + d2.eval(v)?.powi(2) - 1.0).abs() < 1e-9),
    )?;
    let w = b.warping.clone();
    let w2 = w.clone();
    let map: Map = Arc::new(move |u, v| {
        Ok(Vector::from_slice(&[
            w2.F(u)? - v,
            b1.eval(v)?,
            b2.eval(v)?,
        ]))
    });
    let claims = vec![flat_metric_claim(&w), mean_square_claim(&w)];
    let valid = b.padded;
    b.finish(
        map,
        valid,
        Extras {
            claims,
            ..Extras::default()
        },
    )
}

fn torus(b: Builder) -> Result<Family> {
    let th = b.param("theta");
    if !(th > 0.0 && th < FRAC_PI_4) {
        return Err(Error::config(
            "params.theta",
            format!("θ must lie in (0, π/4), got {th}"),
        ));
    }
    let c2 = b.param("c2");
    let (sn, cs) = th.sin_cos();
    let sec2 = 1.0 / (2.0 * th).cos();
    let rs = sec2.sqrt();
    let w = b.warping.clone();
    let w2 = w.clone();
    let angles = move |u: f64, v: f64| -> Result<(f64, f64)> {
        let big_f = w2.F(u)?;
        let a1 = -c2 / (cs * SQRT_2) - big_f * cs * rs + v / (cs * rs);
        let a2 = -c2 / (sn * SQRT_2) + big_f * sn * rs + v / (sn * rs);
        Ok((a1, a2))
    };
    let ang = angles.clone();
    let map: Map = Arc::new(move |u, v| {
        let (a1, a2) = ang(u, v)?;
        Ok(Vector::from_slice(&[
            -cs * a1.sinh(),
            cs * a1.cosh(),
            sn * a2.cos(),
            -sn * a2.sin(),
        ]))
    });
    let native_map = move |x: f64, y: f64| {
        let p = (x + y) / (SQRT_2 * cs);
        let q = (x - y) / (SQRT_2 * sn);
        Vector::from_slice(&[cs * p.sinh(), cs * p.cosh(), sn * q.cos(), sn * q.sin()])
    };
    let ang = angles.clone();
    let coords = move |u: f64, v: f64| -> Result<(f64, f64)> {
        let (a1, a2) = ang(u, v)?;
        let (s, d) = (-SQRT_2 * cs * a1, -SQRT_2 * sn * a2);
        Ok(((s + d) / 2.0, (s - d) / 2.0))
    };
    let valid = b.padded;
    let domain = native_domain(&coords, &valid)?;
    let surface = SpaceFormSurface::new(b.id.as_str(), b.model, domain, move |x, y| {
        Ok(native_map(x, y))
    });
    let k1 = cs / sn - sn / cs;
    let csc2 = 1.0 / (2.0 * th).sin();
    let mut claims = vec![
        flat_metric_claim(&w),
        exact("generator_K", Observable::GeneratorK, |_, _| scalar(0.0)),
        exact("base_K", Observable::BaseK, |_, _| scalar(0.0)),
        up_to_sign("base_shape", Observable::BaseShape, move |_, _| {
            matrix(0.5 * k1, -csc2, -csc2, 0.5 * k1)
        }),
    ];
    let w2 = w.clone();
    claims.push(informative(
        "generator_shape_uv",
        Observable::GeneratorShape,
        move |u, _| {
            let f = w2.f(u)?;
            matrix(0.0, k1 * f, -1.0 / (2.0 * f * k1), k1)
        },
    ));
    b.finish(
        map,
        valid,
        Extras {
            claims,
            native: Some(NativeChart::new(surface, coords)),
            ..Extras::default()
        },
    )
}

fn perturbed(b: Builder) -> Result<Family> {
    let w = b.warping.clone();
    let (lo, hi) = w.interval();
    let wi = w.clone();
    let outcome = DensePath::integrate(
        move |t: f64, _y: &[f64], out: &mut [f64]| {
            out[0] = 1.0 / wi.f(t)?.powi(2);
            Ok(())
        },
        w.z0(),
        &[0.0],
        lo,
        hi,
        b.step,
    )?;
    if outcome.valid != (lo, hi) {
        return Err(Error::Integration(
            "∫ dz/f² could not be tabulated on I".into(),
        ));
    }
    let g = Arc::new(outcome.path);
    let map: Map = Arc::new(move |u, v| {
        let gu = g.eval(u)?[0];
        let t = (u - gu + 2.0 * v) / 2.0;
        Ok(Vector::from_slice(&[
            (u + gu - 2.0 * v) / 2.0,
            t.cos(),
            t.sin(),
        ]))
    });
    let w2 = w.clone();
    let claims = vec![exact("E", Observable::InducedE, move |u, _| {
        scalar(w2.f(u)?.powi(2))
    })];
    let valid = b.padded;
    b.finish(
        map,
        valid,
        Extras {
            claims,
            ..Extras::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(id: FamilyId) -> Family {
        build_family(&FamilyConfig::new(id)).unwrap_or_else(|e| panic!("{id}: {e}"))
    }

    #[test]
    fn every_family_builds_with_defaults() {
        for id in FamilyId::ALL {
            let fam = build(id);
            assert!(fam.chart.generated);
            let (u, v) = fam.grid.points()[fam.grid.len() / 2];
            assert!(fam.chart.membership_residual(u, v).unwrap() < 1e-10, "{id}");
            assert_eq!(fam.chart.eval(u, v).unwrap().last(), u);
        }
    }

    #[test]
    fn nullscroll_builds_for_every_c() {
        for c in [-1, 0, 1] {
            let fam =
                build_family(&FamilyConfig::new(FamilyId::ClassANullScroll).with_c(c)).unwrap();
            assert_eq!(fam.chart.model().c_int(), c);
            assert!(fam.cartan.as_ref().unwrap().drift < 1e-9);
        }
    }

    #[test]
    fn parameter_domains_enforced() {
        let mut cfg = FamilyConfig::new(FamilyId::TotUmbH31);
        cfg.params.k = Some(0.0);
        assert!(
            matches!(build_family(&cfg), Err(Error::Config { path, .. }) if path == "params.k")
        );
        let mut cfg = FamilyConfig::new(FamilyId::ClassAS31);
        cfg.params.r = Some(1.5);
        assert!(
            matches!(build_family(&cfg), Err(Error::Config { path, .. }) if path == "params.r")
        );
        let mut cfg = FamilyConfig::new(FamilyId::PseudoS31NullScroll);
        cfg.params.c3 = Some(0.5);
        assert!(
            matches!(build_family(&cfg), Err(Error::Config { path, .. }) if path == "params.c3")
        );
        let mut cfg = FamilyConfig::new(FamilyId::PseudoE31Cone);
        cfg.profiles.b1 = Some("2*cos(v)".into());
        assert!(
            matches!(build_family(&cfg), Err(Error::Config { path, .. }) if path == "profiles.b1")
        );
        let mut cfg = FamilyConfig::new(FamilyId::PseudoS31Torus);
        cfg.params.theta = Some(1.0);
        assert!(
            matches!(build_family(&cfg), Err(Error::Config { path, .. }) if path == "params.theta")
        );
        let cfg = FamilyConfig::new(FamilyId::ClassAE31).with_c(1);
        assert!(matches!(build_family(&cfg), Err(Error::Config { path, .. }) if path == "c"));
    }

    #[test]
    fn unused_settings_rejected() {
        let mut cfg = FamilyConfig::new(FamilyId::PseudoE31Cone);
        cfg.params.r = Some(1.0);
        assert!(
            matches!(build_family(&cfg), Err(Error::Config { path, .. }) if path == "params.r")
        );
        let mut cfg = FamilyConfig::new(FamilyId::ClassAE31);
        cfg.branch = Branch::Atan;
        assert!(matches!(build_family(&cfg), Err(Error::Config { path, .. }) if path == "branch"));
        let mut cfg = FamilyConfig::new(FamilyId::ClassAE31);
        cfg.grid.u = [-0.98, 0.5];
        assert!(matches!(build_family(&cfg), Err(Error::Config { path, .. }) if path == "grid.u"));
    }

    #[test]
    fn monotone_inversion() {
        let x = invert_monotone(&|t| Ok(t * t * t + t), 0.5, -1.0, 1.0).unwrap();
        assert!((x * x * x + x - 0.5).abs() < 1e-14);
        let x = invert_monotone(&|t| Ok(-2.0 * t), 0.5, -1.0, 1.0).unwrap();
        assert!((x + 0.25).abs() < 1e-15);
    }

    #[test]
    fn quadric_is_a_member_of_h31() {
        let m = SpaceFormModel::anti_de_sitter();
        for (a, u, v) in [(1.0, 0.3, -0.2), (0.5, -1.0, 2.0)] {
            assert!(m.membership_residual(&flat_quadric_h31(a, u, v)) < 1e-13);
        }
    }
}
