//! Property predicates on charts, each computed directly from the shape operators and, on
//! generated charts, through the generator coefficients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::Family;
use crate::immersion::{
    analyze_local, analyze_point, induced_metric, Grid, LocalAnalysis, PointAnalysis, SurfaceChart,
};
use crate::numkit::{Jet2, Mat2, Vector};
use crate::spacetime::Spacetime;

/// A residual below `PASS_FACTOR·(norm + 1)` passes.
pub const PASS_FACTOR: f64 = 1e-5;

/// A residual above this fails; between the two bounds the verdict is indeterminate.
pub const FAIL_THRESHOLD: f64 = 1e-3;

/// `|H|` below this makes pseudo-umbilicity undefined.
pub const VANISHING_MEAN: f64 = 1e-9;

/// Outcome of a single check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
    Informative,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
            Verdict::Informative => "informative",
        }
    }

    /// Three-way threshold on a residual measured against a local scale.
    pub fn from_residual(residual: f64, norm: f64) -> Verdict {
        if !residual.is_finite() {
            Verdict::Fail
        } else if residual < PASS_FACTOR * (norm + 1.0) {
            Verdict::Pass
        } else if residual > FAIL_THRESHOLD {
            Verdict::Fail
        } else {
            Verdict::Indeterminate
        }
    }

    /// Combination over grid points: any failure fails, then any doubt is indeterminate.
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut out = Verdict::Pass;
        for v in verdicts {
            match v {
                Verdict::Fail => return Verdict::Fail,
                Verdict::Indeterminate => out = Verdict::Indeterminate,
                _ => {}
            }
        }
        out
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Property of a surface decided by this module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    LightlikeT,
    ClassA,
    PseudoUmbilical,
    TotallyUmbilical,
    FlatNormalBundle,
}

impl Property {
    pub const ALL: [Property; 5] = [
        Property::LightlikeT,
        Property::ClassA,
        Property::PseudoUmbilical,
        Property::TotallyUmbilical,
        Property::FlatNormalBundle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::LightlikeT => "lightlike_t",
            Property::ClassA => "class_a",
            Property::PseudoUmbilical => "pseudo_umbilical",
            Property::TotallyUmbilical => "totally_umbilical",
            Property::FlatNormalBundle => "flat_normal_bundle",
        }
    }

    pub fn parse(s: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

/// Largest residual of one route over a grid, with the local scale at that point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RouteResult {
    pub residual: f64,
    pub norm: f64,
    pub verdict: Verdict,
    /// Grid point where the scaled residual is largest.
    pub at: (f64, f64),
}

impl RouteResult {
    fn collect(samples: &[(f64, f64, (f64, f64))]) -> RouteResult {
        let verdict = Verdict::all(samples.iter().map(|s| Verdict::from_residual(s.0, s.1)));
        let worst = samples
            .iter()
            .copied()
            .fold(None::<(f64, f64, (f64, f64))>, |acc, s| match acc {
                Some(a) if a.0 / (a.1 + 1.0) >= s.0 / (s.1 + 1.0) => Some(a),
                _ => Some(s),
            })
            .unwrap_or((0.0, 0.0, (0.0, 0.0)));
        RouteResult {
            residual: worst.0,
            norm: worst.1,
            verdict,
            at: worst.2,
        }
    }
}

/// Verdict of a property with its direct and (on generated charts) criterion routes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub verdict: Verdict,
    pub direct: RouteResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<RouteResult>,
    /// Set when the property is undefined somewhere (pseudo-umbilicity with `H = 0`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
}

impl PropertyReport {
    /// Whether the routes are consistent: neither passes where the other fails. An
    /// indeterminate route is consistent with either outcome.
    pub fn routes_agree(&self) -> bool {
        self.criterion.as_ref().is_none_or(|c| {
            !matches!(
                (c.verdict, self.direct.verdict),
                (Verdict::Pass, Verdict::Fail) | (Verdict::Fail, Verdict::Pass)
            )
        })
    }
}

/// `‖A − ½tr(A)·Id‖` (entrywise maximum).
pub fn umbilicity_residual(a: &Mat2) -> f64 {
    a.sub(&Mat2::scalar(0.5 * a.trace())).max_abs()
}

/// Residuals of every property at one point, computed from a point analysis (and the normal
/// curvature when available).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointResiduals {
    pub uv: (f64, f64),
    pub norm: f64,
    pub lightlike_t: f64,
    pub class_a: f64,
    pub class_a_criterion: Option<f64>,
    pub pseudo_umbilical: f64,
    pub pseudo_norm: f64,
    pub pseudo_criterion: Option<f64>,
    pub mean_norm: f64,
    pub totally_umbilical: f64,
    pub totally_criterion: Option<f64>,
    pub flat_normal: Option<f64>,
    pub flat_criterion: Option<f64>,
}

/// Residuals at a point. `normal_curvature` is the direct flat-normal residual when known.
pub fn point_residuals(p: &PointAnalysis, normal_curvature: Option<f64>) -> PointResiduals {
    let s = &p.shape;
    let norm = s.norm();
    let (f, fp, _) = p.warp;
    let class_a = s.a_e3.get(1, 0).abs().max(s.a_e4.get(1, 0).abs());
    let mean_norm = s.mean[0].abs().max(s.mean[1].abs());
    let pseudo = umbilicity_residual(&s.a_h);
    let total = umbilicity_residual(&s.a_e3).max(umbilicity_residual(&s.a_e4));
    let (ca, pc, tc, fc) = match &p.generator {
        Some(g) => {
            let log = fp / f - g.e_u / g.e;
            (
                Some(g.h3.abs()),
                // off-diagonal entries of A_H: −f²h₂h₃/E³ and (Ef′² − E_u f f′ − f⁴h₁h₂)/(Ef²)
                Some(
                    (f * f * g.h2 * g.h3 / g.e.powi(3)).abs().max(
                        ((g.h1 * g.h2 * f.powi(4) + g.e_u * f * fp - g.e * fp * fp)
                            / (g.e * f * f))
                            .abs(),
                    ),
                ),
                Some(log.abs().max(g.h1.abs()).max(g.h3.abs())),
                Some((g.h3 * log).abs()),
            )
        }
        None => (None, None, None, None),
    };
    PointResiduals {
        uv: p.uv,
        norm,
        lightlike_t: 0.0,
        class_a,
        class_a_criterion: ca,
        pseudo_umbilical: pseudo,
        pseudo_norm: s.a_h.max_abs(),
        pseudo_criterion: pc,
        mean_norm,
        totally_umbilical: total,
        totally_criterion: tc,
        flat_normal: normal_curvature.map(f64::abs),
        flat_criterion: fc,
    }
}

/// `|⟨T,T⟩|` from the induced metric and `z_u, z_v`, with `T` the gradient of `z|_M`;
/// fails on the excluded cases `T = 0` and `η = 0`.
pub fn lightlike_from(st: &Spacetime, jet: &Jet2<Vector>, metric: &Mat2) -> Result<f64> {
    let n = st.base_dim();
    let dz = [jet.d_u[n], jet.d_v[n]];
    if dz[0].abs().max(dz[1].abs()) < 1e-12 {
        return Err(Error::Assumption("T vanishes".into()));
    }
    let inv = metric
        .inverse()
        .ok_or_else(|| Error::Geometry("degenerate induced metric".into()))?;
    let t = inv.apply(dz);
    let tt = t[0] * dz[0] + t[1] * dz[1];
    if (tt - 1.0).abs() < 1e-12 {
        return Err(Error::Assumption("∂z is tangent (η = 0)".into()));
    }
    Ok(tt.abs())
}

/// `|⟨T,T⟩|` of a chart at `(u,v)`.
pub fn lightlike_residual(chart: &SurfaceChart, u: f64, v: f64) -> Result<f64> {
    let jet = chart.jet(u, v)?;
    let (g, _) = induced_metric(&chart.spacetime, &jet);
    lightlike_from(&chart.spacetime, &jet, &g)
        .map_err(|e| Error::Assumption(format!("at ({u}, {v}): {e}")))
}

/// Residuals of a local analysis, the normal curvature included.
pub fn local_residuals(chart: &SurfaceChart, l: &LocalAnalysis) -> Result<PointResiduals> {
    let mut r = point_residuals(&l.point, Some(l.normal_curvature));
    r.lightlike_t = lightlike_from(&chart.spacetime, &l.point.jet, &l.point.metric)?;
    Ok(r)
}

/// Local analyses over a grid, in grid order.
pub fn grid_locals(chart: &SurfaceChart, grid: &Grid) -> Result<Vec<LocalAnalysis>> {
    grid.points()
        .par_iter()
        .map(|&(u, v)| analyze_local(chart, u, v))
        .collect()
}

/// Per-point residuals over a grid, in grid order. With `with_normal_curvature` each point
/// also gets the outer-difference normal curvature.
pub fn grid_residuals(
    chart: &SurfaceChart,
    grid: &Grid,
    with_normal_curvature: bool,
) -> Result<Vec<PointResiduals>> {
    grid.points()
        .par_iter()
        .map(|&(u, v)| {
            if with_normal_curvature {
                local_residuals(chart, &analyze_local(chart, u, v)?)
            } else {
                let p = analyze_point(chart, u, v)?;
                let mut r = point_residuals(&p, None);
                r.lightlike_t = lightlike_from(&chart.spacetime, &p.jet, &p.metric)?;
                Ok(r)
            }
        })
        .collect()
}

/// Property verdicts from per-point residuals.
pub fn property_report(property: Property, rs: &[PointResiduals]) -> PropertyReport {
    let route = |f: &dyn Fn(&PointResiduals) -> Option<(f64, f64)>| -> Option<RouteResult> {
        let samples: Option<Vec<_>> = rs.iter().map(|r| f(r).map(|(x, n)| (x, n, r.uv))).collect();
        samples.map(|s| RouteResult::collect(&s))
    };
    let (direct, criterion, status) = match property {
        Property::LightlikeT => (route(&|r| Some((r.lightlike_t, 0.0))), None, None),
        Property::ClassA => (
            route(&|r| Some((r.class_a, r.norm))),
            route(&|r| r.class_a_criterion.map(|x| (x, r.norm))),
            None,
        ),
        Property::PseudoUmbilical => {
            let undefined = rs.iter().filter(|r| r.mean_norm < VANISHING_MEAN).count();
            (
                route(&|r| Some((r.pseudo_umbilical, r.pseudo_norm))),
                route(&|r| r.pseudo_criterion.map(|x| (x, r.pseudo_norm))),
                (undefined > 0).then(|| format!("H = 0 at {undefined} grid points: undefined")),
            )
        }
        Property::TotallyUmbilical => (
            route(&|r| Some((r.totally_umbilical, r.norm))),
            route(&|r| r.totally_criterion.map(|x| (x, r.norm))),
            None,
        ),
        Property::FlatNormalBundle => (
            route(&|r| r.flat_normal.map(|x| (x, r.norm))),
            route(&|r| r.flat_criterion.map(|x| (x, r.norm))),
            None,
        ),
    };
    let (direct, criterion) = match (direct, criterion) {
        (Some(d), c) => (d, c),
        // normal curvature not computed: the criterion route stands in
        (None, Some(c)) => (c, None),
        (None, None) => (
            RouteResult {
                residual: f64::NAN,
                norm: 0.0,
                verdict: Verdict::Indeterminate,
                at: (0.0, 0.0),
            },
            None,
        ),
    };
    let verdict = if status.is_some() {
        Verdict::Indeterminate
    } else {
        direct.verdict
    };
    PropertyReport {
        property,
        verdict,
        direct,
        criterion,
        status,
    }
}

fn report_for(chart: &SurfaceChart, grid: &Grid, property: Property) -> Result<PropertyReport> {
    let rs = grid_residuals(chart, grid, property == Property::FlatNormalBundle)?;
    Ok(property_report(property, &rs))
}

/// `⟨T,T⟩ = 0` over the grid.
pub fn is_lightlike_t(chart: &SurfaceChart, grid: &Grid) -> Result<PropertyReport> {
    report_for(chart, grid, Property::LightlikeT)
}

/// `T` is an eigenvector of `A_{e₃}` and `A_{e₄}`; criterion `h₃ = 0`.
pub fn is_class_a(chart: &SurfaceChart, grid: &Grid) -> Result<PropertyReport> {
    report_for(chart, grid, Property::ClassA)
}

/// `A_H ∝ Id`; criterion `h₂h₃ = 0` and `h₁h₂f⁴ + E_u f f′ − E f′² = 0`.
pub fn is_pseudo_umbilical(chart: &SurfaceChart, grid: &Grid) -> Result<PropertyReport> {
    report_for(chart, grid, Property::PseudoUmbilical)
}

/// `A_{e₃}, A_{e₄} ∝ Id`; criterion `f′/f − E_u/E = h₁ = h₃ = 0`.
pub fn is_totally_umbilical(chart: &SurfaceChart, grid: &Grid) -> Result<PropertyReport> {
    report_for(chart, grid, Property::TotallyUmbilical)
}

/// `R^⊥ = 0`; criterion `h₃(f′/f − E_u/E) = 0`.
pub fn has_flat_normal_bundle(chart: &SurfaceChart, grid: &Grid) -> Result<PropertyReport> {
    report_for(chart, grid, Property::FlatNormalBundle)
}

/// Umbilicity along the normal field `ξ = a·e₃ + b·e₄`, with `(a, b) = xi(point)` and the
/// field normalized where it does not vanish.
pub fn umbilical_along(
    chart: &SurfaceChart,
    grid: &Grid,
    xi: impl Fn(&PointAnalysis) -> [f64; 2] + Sync,
) -> Result<RouteResult> {
    let samples: Vec<(f64, f64, (f64, f64))> = grid
        .points()
        .par_iter()
        .map(|&(u, v)| {
            let p = analyze_point(chart, u, v)?;
            let [a, b] = xi(&p);
            let n = a.hypot(b);
            let (a, b) = if n > VANISHING_MEAN {
                (a / n, b / n)
            } else {
                (a, b)
            };
            let op = p.shape.a_e3.scale(a).add(&p.shape.a_e4.scale(b));
            Ok((umbilicity_residual(&op), op.max_abs(), (u, v)))
        })
        .collect::<Result<_>>()?;
    Ok(RouteResult::collect(&samples))
}

/// Canonical form of a self-adjoint operator of a Lorentzian plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "form")]
pub enum CanonicalForm {
    /// Diagonalizable with real eigenvalues `λ₁ ≤ λ₂`.
    I { lambda1: f64, lambda2: f64 },
    /// Complex eigenvalues `λ ± iμ`, `μ > 0`.
    II { lambda: f64, mu: f64 },
    /// Double eigenvalue `λ` with a single null eigendirection.
    III { lambda: f64 },
}

/// Classify `a` (columns the images of the basis vectors) with respect to `metric`.
pub fn shape_canonical_form(a: &Mat2, metric: &Mat2) -> Result<CanonicalForm> {
    let scale = a.max_abs().max(1.0) * metric.max_abs().max(1.0);
    let ga = metric.mul(a);
    let asym = (ga.get(0, 1) - ga.get(1, 0)).abs();
    if asym > 1e-6 * scale {
        return Err(Error::Contract(format!(
            "operator is not self-adjoint (asymmetry {asym:e})"
        )));
    }
    if metric.det() >= 0.0 {
        return Err(Error::Contract("metric is not Lorentzian".into()));
    }
    let tr = a.trace();
    let disc = tr * tr - 4.0 * a.det();
    let tol = 1e-8 * a.max_abs().max(1.0).powi(2);
    Ok(if disc > tol {
        let r = disc.sqrt();
        CanonicalForm::I {
            lambda1: 0.5 * (tr - r),
            lambda2: 0.5 * (tr + r),
        }
    } else if disc < -tol {
        CanonicalForm::II {
            lambda: 0.5 * tr,
            mu: 0.5 * (-disc).sqrt(),
        }
    } else {
        let l = 0.5 * tr;
        if a.sub(&Mat2::scalar(l)).max_abs() < 1e-6 * a.max_abs().max(1.0) {
            CanonicalForm::I {
                lambda1: l,
                lambda2: l,
            }
        } else {
            CanonicalForm::III { lambda: l }
        }
    })
}

/// Operators at one grid point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShapeSample {
    pub u: f64,
    pub v: f64,
    pub a_e3: [[f64; 2]; 2],
    pub a_e4: [[f64; 2]; 2],
    pub a_h: [[f64; 2]; 2],
}

/// Everything `analyze` reports for one family.
#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub family: String,
    pub c: i32,
    pub warping: String,
    pub grid: Grid,
    pub warnings: Vec<String>,
    pub properties: Vec<PropertyReport>,
    /// Largest of the six frame inner-product residuals over the grid.
    pub frame_invariant_max: f64,
    pub shape_samples: Vec<ShapeSample>,
}

impl ClassificationReport {
    pub fn verdict(&self, p: Property) -> Option<Verdict> {
        self.properties
            .iter()
            .find(|r| r.property == p)
            .map(|r| r.verdict)
    }
}

/// Five fixed sample points: the centre and the four corners of the inner half.
pub fn sample_points(grid: &Grid) -> [(f64, f64); 5] {
    let (u, v) = (grid.rect.u, grid.rect.v);
    let (cu, cv) = (0.5 * (u.0 + u.1), 0.5 * (v.0 + v.1));
    let (hu, hv) = (0.25 * (u.1 - u.0), 0.25 * (v.1 - v.0));
    [
        (cu, cv),
        (cu - hu, cv - hv),
        (cu + hu, cv - hv),
        (cu - hu, cv + hv),
        (cu + hu, cv + hv),
    ]
}

/// All property verdicts of a family on its grid.
pub fn classify_family(family: &Family) -> Result<ClassificationReport> {
    let locals = grid_locals(&family.chart, &family.grid)?;
    classify_with(family, &locals)
}

/// Classification from precomputed local analyses of the family grid.
pub fn classify_with(family: &Family, locals: &[LocalAnalysis]) -> Result<ClassificationReport> {
    let chart = &family.chart;
    let rs = locals
        .iter()
        .map(|l| local_residuals(chart, l))
        .collect::<Result<Vec<_>>>()?;
    let properties = Property::ALL
        .into_iter()
        .map(|p| property_report(p, &rs))
        .collect();
    let frame_invariant_max = locals
        .iter()
        .flat_map(|l| {
            l.point
                .frame
                .invariant_residuals(&chart.spacetime, l.point.z())
        })
        .fold(0.0, f64::max);
    let shape_samples = sample_points(&family.grid)
        .into_iter()
        .map(|(u, v)| {
            let p = analyze_point(chart, u, v)?;
            Ok(ShapeSample {
                u,
                v,
                a_e3: p.shape.a_e3.0,
                a_e4: p.shape.a_e4.0,
                a_h: p.shape.a_h.0,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ClassificationReport {
        family: family.id.as_str().to_string(),
        c: chart.model().c_int(),
        warping: family.config.warping.f.clone(),
        grid: family.grid,
        warnings: family.warnings.clone(),
        properties,
        frame_invariant_max,
        shape_samples,
    })
}
