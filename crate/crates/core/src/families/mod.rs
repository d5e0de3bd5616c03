//! Catalog of explicit surface families, their configuration schema and the closed-form
//! claims attached to each of them.

pub mod catalog;
pub mod isothermal;
pub mod profile;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cartan::CartanPath;
use crate::classify::Verdict;
use crate::error::{Error, Result};
use crate::immersion::{Grid, Rect, SpaceFormSurface, SurfaceChart};
use crate::numkit::{Mat2, Vector};

pub use catalog::build_family;
pub use isothermal::{IsothermalKind, IsothermalMap};
pub use profile::{
    solve_profile_a, solve_profile_v, solve_profile_v_with, solve_riccati_profile, ProfileField,
    ProfileSign,
};

/// Margin added around the requested rectangle so that jets and outer differences at the
/// grid boundary stay inside the chart.
pub const PAD: f64 = 0.05;

/// Identifier of a catalog family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FamilyId {
    ClassAS31,
    ClassAH31,
    ClassAH31Quadric,
    ClassAE31,
    ClassANullScroll,
    PseudoE31BScroll,
    PseudoE31NullScroll,
    PseudoE31Cone,
    PseudoS31NullScroll,
    PseudoS31Torus,
    TotUmbH31,
    GeneratorUmbilicS31,
    GeneratorUmbilicH31,
    GeneratorUmbilicH31Flat,
    GeneratorUmbilicE31,
    GeneratorScrollE31Flat,
    GeneratorScrollH31Flat,
    PerturbedE31Cylinder,
}

impl FamilyId {
    pub const ALL: [FamilyId; 18] = [
        FamilyId::ClassAS31,
        FamilyId::ClassAH31,
        FamilyId::ClassAH31Quadric,
        FamilyId::ClassAE31,
        FamilyId::ClassANullScroll,
        FamilyId::PseudoE31BScroll,
        FamilyId::PseudoE31NullScroll,
        FamilyId::PseudoE31Cone,
        FamilyId::PseudoS31NullScroll,
        FamilyId::PseudoS31Torus,
        FamilyId::TotUmbH31,
        FamilyId::GeneratorUmbilicS31,
        FamilyId::GeneratorUmbilicH31,
        FamilyId::GeneratorUmbilicH31Flat,
        FamilyId::GeneratorUmbilicE31,
        FamilyId::GeneratorScrollE31Flat,
        FamilyId::GeneratorScrollH31Flat,
        FamilyId::PerturbedE31Cylinder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::ClassAS31 => "classA/s31",
            FamilyId::ClassAH31 => "classA/h31",
            FamilyId::ClassAH31Quadric => "classA/h31-quadric",
            FamilyId::ClassAE31 => "classA/e31",
            FamilyId::ClassANullScroll => "classA/nullscroll",
            FamilyId::PseudoE31BScroll => "pseudoumb/e31-bscroll",
            FamilyId::PseudoE31NullScroll => "pseudoumb/e31-nullscroll",
            FamilyId::PseudoE31Cone => "pseudoumb/e31-cone",
            FamilyId::PseudoS31NullScroll => "pseudoumb/s31-nullscroll",
            FamilyId::PseudoS31Torus => "pseudoumb/s31-torus",
            FamilyId::TotUmbH31 => "totumb/h31",
            FamilyId::GeneratorUmbilicS31 => "generator/umbilic-s31",
            FamilyId::GeneratorUmbilicH31 => "generator/umbilic-h31",
            FamilyId::GeneratorUmbilicH31Flat => "generator/umbilic-h31-flat",
            FamilyId::GeneratorUmbilicE31 => "generator/umbilic-e31",
            FamilyId::GeneratorScrollE31Flat => "generator/scroll-e31-flat",
            FamilyId::GeneratorScrollH31Flat => "generator/scroll-h31-flat",
            FamilyId::PerturbedE31Cylinder => "perturbed/e31-cylinder",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        FamilyId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::config("family", format!("unknown family `{s}`")))
    }

    /// Admissible values of `c`; the first is the default.
    pub fn curvatures(self) -> &'static [i32] {
        match self {
            FamilyId::ClassAS31
            | FamilyId::PseudoS31NullScroll
            | FamilyId::PseudoS31Torus
            | FamilyId::GeneratorUmbilicS31 => &[1],
            FamilyId::ClassAH31
            | FamilyId::ClassAH31Quadric
            | FamilyId::TotUmbH31
            | FamilyId::GeneratorUmbilicH31
            | FamilyId::GeneratorUmbilicH31Flat
            | FamilyId::GeneratorScrollH31Flat => &[-1],
            FamilyId::ClassANullScroll => &[0, -1, 1],
            _ => &[0],
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FamilyId::ClassAS31 => "class A surface over a totally umbilic surface of S³₁, profile A from a Riccati equation",
            FamilyId::ClassAH31 => "class A surface over a totally umbilic surface of H³₁, profile A from a Riccati equation",
            FamilyId::ClassAH31Quadric => "class A surface over the flat quadric of H³₁ in closed form",
            FamilyId::ClassAE31 => "class A surface over a pseudo-sphere of E³₁, profile A from a Riccati equation",
            FamilyId::ClassANullScroll => "class A surface over a null scroll, Cartan frame and profile V integrated in u",
            FamilyId::PseudoE31BScroll => "pseudo-umbilical surface over the flat B-scroll of E³₁",
            FamilyId::PseudoE31NullScroll => "pseudo-umbilical surface over a null scroll of E³₁ with b = c₃f",
            FamilyId::PseudoE31Cone => "pseudo-umbilical, not class A: (F(u) − v, b₁(v), b₂(v), u)",
            FamilyId::PseudoS31NullScroll => "pseudo-umbilical surface over a null scroll of S³₁ with b = √(c₃f² − 1)",
            FamilyId::PseudoS31Torus => "pseudo-umbilical surface over the flat Lorentzian torus of S³₁",
            FamilyId::TotUmbH31 => "totally umbilical surface over the flat null scroll of H³₁",
            FamilyId::GeneratorUmbilicS31 => "totally umbilic surface of S³₁ in its native chart, recomposed as a generated chart",
            FamilyId::GeneratorUmbilicH31 => "totally umbilic surface of H³₁ in its native chart, recomposed as a generated chart",
            FamilyId::GeneratorUmbilicH31Flat => "flat quadric of H³₁ composed with the null-coordinate change",
            FamilyId::GeneratorUmbilicE31 => "pseudo-sphere of E³₁ in its native chart, recomposed as a generated chart",
            FamilyId::GeneratorScrollE31Flat => "flat B-scroll of E³₁ composed with the null-coordinate change",
            FamilyId::GeneratorScrollH31Flat => "flat null scroll of H³₁ composed with the null-coordinate change",
            FamilyId::PerturbedE31Cylinder => "generated cylinder of E³₁ with E = f², neither class A nor normally flat",
        }
    }

    /// Numeric parameters read by the family, with defaults.
    pub fn parameters(self) -> &'static [(&'static str, f64)] {
        match self {
            FamilyId::ClassAS31 | FamilyId::ClassAE31 => &[("r", 0.6)],
            FamilyId::GeneratorUmbilicS31 | FamilyId::GeneratorUmbilicE31 => &[("r", 0.6)],
            FamilyId::ClassAH31 | FamilyId::GeneratorUmbilicH31 => &[("r", 1.5)],
            FamilyId::ClassAH31Quadric | FamilyId::GeneratorUmbilicH31Flat => {
                &[("a", 1.0), ("c1", 1.0), ("c2", 0.0)]
            }
            FamilyId::PseudoE31BScroll | FamilyId::GeneratorScrollE31Flat => {
                &[("c1", 1.0), ("c2", 0.0)]
            }
            FamilyId::GeneratorScrollH31Flat => &[("k", 0.7), ("c1", 1.0), ("c2", 0.0)],
            FamilyId::PseudoE31NullScroll => &[("c3", 0.9)],
            FamilyId::PseudoS31NullScroll => &[("c3", 4.0)],
            FamilyId::PseudoS31Torus => &[("theta", std::f64::consts::FRAC_PI_6), ("c2", 0.0)],
            FamilyId::TotUmbH31 => &[("k", 1.0), ("k2", 0.0)],
            FamilyId::ClassANullScroll
            | FamilyId::PseudoE31Cone
            | FamilyId::PerturbedE31Cylinder => &[],
        }
    }

    /// Profile functions read by the family, with defaults.
    pub fn profiles(self) -> &'static [(&'static str, &'static str)] {
        match self {
            FamilyId::ClassAS31
            | FamilyId::ClassAH31
            | FamilyId::ClassAE31
            | FamilyId::GeneratorUmbilicS31
            | FamilyId::GeneratorUmbilicH31
            | FamilyId::GeneratorUmbilicE31 => &[("a", "u"), ("A0", "1+0.3*v")],
            FamilyId::ClassANullScroll => &[
                ("U", "u"),
                ("a", "1"),
                ("b", "0.4+0.2*U^2"),
                ("V0", "1+0.3*v"),
            ],
            FamilyId::PseudoE31NullScroll => &[("U", "u"), ("V0", "1+0.3*v")],
            // V₀ = 1 + 0.3v reaches the Riccati pole inside the default grid here
            FamilyId::PseudoS31NullScroll => &[("U", "u"), ("V0", "0.3*v")],
            FamilyId::PseudoE31Cone => &[("b1", "cos(v)"), ("b2", "sin(v)")],
            _ => &[],
        }
    }

    /// Whether the alternate `atan` branch is available.
    pub fn has_branches(self) -> bool {
        matches!(self, FamilyId::ClassAS31 | FamilyId::ClassAH31)
    }
}

impl std::fmt::Display for FamilyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Machine-readable description of a catalog entry.
#[derive(Clone, Debug, Serialize)]
pub struct FamilySchema {
    pub id: &'static str,
    pub c: Vec<i32>,
    pub description: &'static str,
    pub params: BTreeMap<&'static str, f64>,
    pub profiles: BTreeMap<&'static str, &'static str>,
    pub branches: Vec<&'static str>,
}

/// Schemas of every catalog family, in catalog order.
pub fn catalog_schemas() -> Vec<FamilySchema> {
    FamilyId::ALL
        .into_iter()
        .map(|id| FamilySchema {
            id: id.as_str(),
            c: id.curvatures().to_vec(),
            description: id.description(),
            params: id.parameters().iter().copied().collect(),
            profiles: id.profiles().iter().copied().collect(),
            branches: if id.has_branches() {
                vec!["primary", "atan"]
            } else {
                vec!["primary"]
            },
        })
        .collect()
}

fn default_f() -> String {
    "exp(z)".into()
}

fn default_interval() -> [f64; 2] {
    [-1.0, 1.0]
}

fn default_range() -> [f64; 2] {
    [-0.5, 0.5]
}

fn default_count() -> usize {
    21
}

fn default_step() -> f64 {
    1e-3
}

/// `[warping]` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpingConfig {
    #[serde(default = "default_f")]
    pub f: String,
    #[serde(default = "default_interval")]
    pub interval: [f64; 2],
    #[serde(default)]
    pub z0: f64,
}

impl Default for WarpingConfig {
    fn default() -> Self {
        Self {
            f: default_f(),
            interval: default_interval(),
            z0: 0.0,
        }
    }
}

/// `[params]` table; absent entries take the family defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c3: Option<f64>,
}

impl Params {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "r" => self.r,
            "k" => self.k,
            "k2" => self.k2,
            "theta" => self.theta,
            "a" => self.a,
            "c1" => self.c1,
            "c2" => self.c2,
            "c3" => self.c3,
            _ => None,
        }
    }

    /// Sets a parameter by name; false for an unknown name.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "r" => &mut self.r,
            "k" => &mut self.k,
            "k2" => &mut self.k2,
            "theta" => &mut self.theta,
            "a" => &mut self.a,
            "c1" => &mut self.c1,
            "c2" => &mut self.c2,
            "c3" => &mut self.c3,
            _ => return false,
        };
        *slot = Some(value);
        true
    }
}

/// `[profiles]` table of expression strings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profiles {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(default, rename = "U", skip_serializing_if = "Option::is_none")]
    pub u_map: Option<String>,
    #[serde(default, rename = "A0", skip_serializing_if = "Option::is_none")]
    pub a0: Option<String>,
    #[serde(default, rename = "V0", skip_serializing_if = "Option::is_none")]
    pub v0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b2: Option<String>,
}

impl Profiles {
    pub fn get(&self, name: &str) -> Option<&str> {
        match name {
            "a" => self.a.as_deref(),
            "b" => self.b.as_deref(),
            "U" => self.u_map.as_deref(),
            "A0" => self.a0.as_deref(),
            "V0" => self.v0.as_deref(),
            "b1" => self.b1.as_deref(),
            "b2" => self.b2.as_deref(),
            _ => None,
        }
    }
}

/// `[grid]` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_range")]
    pub u: [f64; 2],
    #[serde(default = "default_range")]
    pub v: [f64; 2],
    #[serde(default = "default_count")]
    pub nu: usize,
    #[serde(default = "default_count")]
    pub nv: usize,
    /// RK4 step of every profile and frame integration.
    #[serde(default = "default_step")]
    pub step: f64,
    /// Base point of the u-integrations; the centre of the u-range when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            u: default_range(),
            v: default_range(),
            nu: default_count(),
            nv: default_count(),
            step: default_step(),
            u0: None,
        }
    }
}

/// Solution branch of the umbilic class A families.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    #[default]
    Primary,
    Atan,
}

/// Complete description of one family instance, read from TOML or JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<i32>,
    #[serde(default)]
    pub warping: WarpingConfig,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub profiles: Profiles,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub branch: Branch,
    /// Expected verdicts keyed by quantity, checked by fixture suites.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expect: BTreeMap<String, Verdict>,
}

impl FamilyConfig {
    /// Defaults for a family.
    pub fn new(id: FamilyId) -> Self {
        Self {
            family: id.as_str().to_string(),
            c: None,
            warping: WarpingConfig::default(),
            params: Params::default(),
            profiles: Profiles::default(),
            grid: GridConfig::default(),
            branch: Branch::Primary,
            expect: BTreeMap::new(),
        }
    }

    pub fn with_warping(mut self, f: &str) -> Self {
        self.warping.f = f.to_string();
        self
    }

    pub fn with_c(mut self, c: i32) -> Self {
        self.c = Some(c);
        self
    }

    pub fn id(&self) -> Result<FamilyId> {
        FamilyId::parse(&self.family)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| Error::config("", e.message().to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(
                if path == "." { String::new() } else { path },
                e.inner().message().to_string(),
            )
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(
                if path == "." { String::new() } else { path },
                e.inner().to_string(),
            )
        })
    }

    /// Read a `.toml` or `.json` file, chosen by extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            Some("json") => Self::from_json_str(&text),
            _ => Err(Error::config(
                "",
                format!(
                    "{}: config files must end in .toml or .json",
                    path.display()
                ),
            )),
        }
    }
}

/// Value of an observable at a grid point.
#[derive(Clone, Debug, PartialEq)]
pub enum ClaimValue {
    Scalar(f64),
    Matrix(Mat2),
    Vector(Vector),
}

impl ClaimValue {
    fn entries(&self) -> Vec<f64> {
        match self {
            ClaimValue::Scalar(x) => vec![*x],
            ClaimValue::Matrix(m) => vec![m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]],
            ClaimValue::Vector(v) => v.to_vec(),
        }
    }

    /// Largest entrywise difference; with `up_to_sign` the smaller of `|x − y|` and
    /// `|x + y|`.
    pub fn distance(&self, other: &ClaimValue, up_to_sign: bool) -> Result<f64> {
        let (a, b) = (self.entries(), other.entries());
        if a.len() != b.len() {
            return Err(Error::Dimension(format!(
                "claim values of sizes {} and {}",
                a.len(),
                b.len()
            )));
        }
        let d = |s: f64| {
            a.iter()
                .zip(&b)
                .map(|(x, y)| (x - s * y).abs())
                .fold(0.0, f64::max)
        };
        Ok(if up_to_sign {
            d(1.0).min(d(-1.0))
        } else {
            d(1.0)
        })
    }
}

/// Numerical quantity a claim is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `E`, the induced `g_uv`.
    InducedE,
    /// `A_{e₃}` in the frame `{T, U}`.
    ShapeE3,
    /// `A_{e₄}` in the frame `{T, U}`.
    ShapeE4,
    /// Upper-right entry of `A_{e₃}`.
    ShapeE3UpperRight,
    /// `A_H`.
    MeanShape,
    /// `(h⁴₁₁, h⁴₁₂, h⁴₂₂)`.
    H4,
    /// `e₃` as a lifted vector.
    FrameE3,
    /// `e₄` as a lifted vector.
    FrameE4,
    /// Gaussian curvature of the generator `φ̃(u,v)`.
    GeneratorK,
    /// Shape operator of the generator with respect to `{∂u, ∂v}`.
    GeneratorShape,
    /// Generator point `φ̃(u,v)`.
    ChartPoint,
    /// Gaussian curvature of the base surface in its native chart.
    BaseK,
    /// Shape operator of the base surface in its native chart.
    BaseShape,
}

impl Observable {
    /// Whether evaluation needs outer differences (and is therefore sampled sparsely).
    pub fn is_expensive(self) -> bool {
        matches!(self, Observable::GeneratorK | Observable::BaseK)
    }
}

/// How a claim is compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Exact,
    /// Equal up to an overall sign, for quantities depending on the orientation of `e₄`.
    UpToSign,
    /// Reported without verdict: the stated closed form is known to be inconsistent.
    Informative,
}

type Expected = dyn Fn(f64, f64) -> Result<ClaimValue> + Send + Sync;

/// A closed-form statement about a family, evaluated on its grid.
#[derive(Clone)]
pub struct Claim {
    pub quantity: String,
    pub observable: Observable,
    pub comparison: Comparison,
    pub tolerance: f64,
    expected: Arc<Expected>,
}

impl std::fmt::Debug for Claim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Claim")
            .field("quantity", &self.quantity)
            .field("observable", &self.observable)
            .field("comparison", &self.comparison)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl Claim {
    pub fn new(
        quantity: impl Into<String>,
        observable: Observable,
        comparison: Comparison,
        tolerance: f64,
        expected: impl Fn(f64, f64) -> Result<ClaimValue> + Send + Sync + 'static,
    ) -> Self {
        Self {
            quantity: quantity.into(),
            observable,
            comparison,
            tolerance,
            expected: Arc::new(expected),
        }
    }

    pub fn expected(&self, u: f64, v: f64) -> Result<ClaimValue> {
        (self.expected)(u, v)
    }
}

type NativeCoords = dyn Fn(f64, f64) -> Result<(f64, f64)> + Send + Sync;

/// Base surface in its own parametrization, with the map from chart to native coordinates.
#[derive(Clone)]
pub struct NativeChart {
    pub surface: SpaceFormSurface,
    coords: Arc<NativeCoords>,
}

impl NativeChart {
    pub fn new(
        surface: SpaceFormSurface,
        coords: impl Fn(f64, f64) -> Result<(f64, f64)> + Send + Sync + 'static,
    ) -> Self {
        Self {
            surface,
            coords: Arc::new(coords),
        }
    }

    pub fn coords(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        (self.coords)(u, v)
    }
}

/// A constructed family: its chart, analysis grid and claims.
#[derive(Clone)]
pub struct Family {
    pub id: FamilyId,
    pub config: FamilyConfig,
    pub chart: SurfaceChart,
    /// The generator `φ̃(u,v)` as a surface of the space form.
    pub generator: SpaceFormSurface,
    pub grid: Grid,
    /// Rectangle on which every profile and frame integration is regular.
    pub valid: Rect,
    pub warnings: Vec<String>,
    pub claims: Vec<Claim>,
    pub native: Option<NativeChart>,
    pub cartan: Option<CartanPath>,
    pub profile: Option<ProfileField>,
}

impl std::fmt::Debug for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Family")
            .field("id", &self.id)
            .field("chart", &self.chart)
            .field("grid", &self.grid)
            .field("valid", &self.valid)
            .field("warnings", &self.warnings)
            .field("claims", &self.claims)
            .finish()
    }
}

impl Family {
    /// Label `family[c=…]` used in reports.
    pub fn label(&self) -> String {
        format!("{}[c={}]", self.id, self.chart.model().c_int())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_defaults() {
        let cfg = FamilyConfig::from_toml_str("family = \"classA/e31\"\n").unwrap();
        assert_eq!(cfg.warping.f, "exp(z)");
        assert_eq!(cfg.grid.nu, 21);
        assert_eq!(cfg.grid.step, 1e-3);
        assert_eq!(cfg.id().unwrap(), FamilyId::ClassAE31);
    }

    #[test]
    fn unknown_key_reports_path() {
        let err =
            FamilyConfig::from_toml_str("family = \"classA/e31\"\n[params]\nrr = 1\n").unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "params.rr"),
            e => panic!("{e:?}"),
        }
        let err =
            FamilyConfig::from_json_str(r#"{"family": "x", "grid": {"nu": "a"}}"#).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "grid.nu"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn json_and_toml_agree() {
        let t = FamilyConfig::from_toml_str(
            "family = \"totumb/h31\"\n[params]\nk = 2\n[profiles]\nU = \"u\"\n[expect]\nclass_a = \"pass\"\n",
        )
        .unwrap();
        let j = FamilyConfig::from_json_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(t, j);
        assert_eq!(j.profiles.get("U"), Some("u"));
        assert_eq!(j.expect["class_a"], Verdict::Pass);
    }

    #[test]
    fn every_id_round_trips() {
        for id in FamilyId::ALL {
            assert_eq!(FamilyId::parse(id.as_str()).unwrap(), id);
        }
        assert!(FamilyId::parse("nope").is_err());
        assert_eq!(catalog_schemas().len(), 18);
    }

    #[test]
    fn up_to_sign_distance() {
        let a = ClaimValue::Vector(Vector::from_slice(&[1.0, -2.0]));
        let b = ClaimValue::Vector(Vector::from_slice(&[-1.0, 2.0]));
        assert_eq!(a.distance(&b, true).unwrap(), 0.0);
        assert_eq!(a.distance(&b, false).unwrap(), 4.0);
    }
}
