//! Lorentzian space forms E³₁ (c=0), S³₁ ⊂ E⁴₁ (c=1) and H³₁ ⊂ E⁴₂ (c=-1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{inner, AmbientVector, Signature, Vector};

/// Relative tolerance for tangency of vectors passed to the connection.
pub const TANGENCY_TOLERANCE: f64 = 1e-8;

/// Embedded model of a three-dimensional Lorentzian space form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceFormModel {
    c: i8,
}

impl SpaceFormModel {
    pub fn new(c: i32) -> Result<Self> {
        match c {
            -1..=1 => Ok(Self { c: c as i8 }),
            _ => Err(Error::Domain(format!(
                "curvature constant must be -1, 0 or 1, got {c}"
            ))),
        }
    }

    pub const fn minkowski() -> Self {
        Self { c: 0 }
    }

    pub const fn de_sitter() -> Self {
        Self { c: 1 }
    }

    pub const fn anti_de_sitter() -> Self {
        Self { c: -1 }
    }

    pub fn c(&self) -> f64 {
        self.c as f64
    }

    pub fn c_int(&self) -> i32 {
        self.c as i32
    }

    /// Signature of the flat ambient space the model sits in.
    pub fn signature(&self) -> Signature {
        match self.c {
            0 => Signature {
                negatives: 1,
                positives: 2,
            },
            1 => Signature {
                negatives: 1,
                positives: 3,
            },
            _ => Signature {
                negatives: 2,
                positives: 2,
            },
        }
    }

    /// Number of ambient coordinates (3 or 4).
    pub fn ambient_dim(&self) -> usize {
        self.signature().dim()
    }

    pub fn name(&self) -> &'static str {
        match self.c {
            0 => "E31",
            1 => "S31",
            _ => "H31",
        }
    }

    /// `g_c` applied to raw coordinates.
    #[inline]
    pub fn g(&self, a: &Vector, b: &Vector) -> f64 {
        self.signature().inner(a, b)
    }

    fn check_dim(&self, v: &AmbientVector) -> Result<()> {
        if v.signature != self.signature() {
            return Err(Error::Dimension(format!(
                "vector with signature {} used in model {}",
                v.signature,
                self.name()
            )));
        }
        Ok(())
    }

    /// `|⟨x,x⟩ − 1/c| ≤ tol` for c ≠ 0; every point belongs to E³₁.
    pub fn check_membership(&self, x: &AmbientVector, tol: f64) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.membership_residual(&x.coords) <= tol)
    }

    pub fn membership_residual(&self, x: &Vector) -> f64 {
        if self.c == 0 {
            0.0
        } else {
            (self.g(x, x) - 1.0 / self.c()).abs()
        }
    }

    /// Levi-Civita connection of the model: `D_X Y + c⟨X,Y⟩x`.
    pub fn spaceform_connection(
        &self,
        flat_derivative: &AmbientVector,
        x: &AmbientVector,
        big_x: &AmbientVector,
        big_y: &AmbientVector,
    ) -> Result<AmbientVector> {
        for v in [flat_derivative, x, big_x, big_y] {
            self.check_dim(v)?;
        }
        if self.c == 0 {
            return Ok(*flat_derivative);
        }
        for (name, v) in [("X", big_x), ("Y", big_y)] {
            let scale = v.coords.max_abs().max(1.0) * x.coords.max_abs().max(1.0);
            if inner(v, x)?.abs() > TANGENCY_TOLERANCE * scale {
                return Err(Error::Geometry(format!(
                    "{name} is not tangent to {} at the base point",
                    self.name()
                )));
            }
        }
        Ok(*flat_derivative + *x * (self.c() * inner(big_x, big_y)?))
    }

    /// Constant-curvature tensor `c(⟨Y,Z⟩X − ⟨X,Z⟩Y)`.
    pub fn spaceform_curvature(
        &self,
        big_x: &AmbientVector,
        big_y: &AmbientVector,
        big_z: &AmbientVector,
    ) -> Result<AmbientVector> {
        for v in [big_x, big_y, big_z] {
            self.check_dim(v)?;
        }
        let c = self.c();
        Ok(*big_x * (c * inner(big_y, big_z)?) - *big_y * (c * inner(big_x, big_z)?))
    }

    /// Tangential projection at `x`.
    pub fn project(&self, x: &Vector, v: &Vector) -> Vector {
        if self.c == 0 {
            *v
        } else {
            *v - *x * (self.g(v, x) * self.c())
        }
    }

    /// Nearest point of the model along the radial direction.
    pub fn retract(&self, x: &Vector) -> Vector {
        if self.c == 0 {
            return *x;
        }
        let q = self.g(x, x) * self.c();
        if q > 0.0 {
            *x * (1.0 / q.sqrt())
        } else {
            *x
        }
    }
}

/// A semi-Riemannian manifold realized in flat coordinates, with enough structure for
/// connection and curvature computations on raw coordinate vectors.
pub trait Ambient: Sync {
    /// Number of coordinates of points and vectors.
    fn dim(&self) -> usize;

    /// Metric at `p`.
    fn inner_at(&self, p: &Vector, x: &Vector, y: &Vector) -> f64;

    /// Correction term: `∇_X Y = D_X Y + Γ_p(X,Y)` for tangent vectors at `p`.
    fn christoffel(&self, p: &Vector, x: &Vector, y: &Vector) -> Vector;

    /// Projection of a coordinate vector onto the tangent space at `p`.
    fn project(&self, p: &Vector, x: &Vector) -> Vector;

    /// Map a nearby coordinate point back onto the manifold.
    fn retract(&self, q: &Vector) -> Vector;

    /// Closed-form curvature `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`.
    fn curvature(&self, p: &Vector, x: &Vector, y: &Vector, z: &Vector) -> Result<Vector>;
}

impl Ambient for SpaceFormModel {
    fn dim(&self) -> usize {
        self.ambient_dim()
    }

    fn inner_at(&self, _p: &Vector, x: &Vector, y: &Vector) -> f64 {
        self.g(x, y)
    }

    fn christoffel(&self, p: &Vector, x: &Vector, y: &Vector) -> Vector {
        *p * (self.c() * self.g(x, y))
    }

    fn project(&self, p: &Vector, x: &Vector) -> Vector {
        SpaceFormModel::project(self, p, x)
    }

    fn retract(&self, q: &Vector) -> Vector {
        SpaceFormModel::retract(self, q)
    }

    fn curvature(&self, _p: &Vector, x: &Vector, y: &Vector, z: &Vector) -> Result<Vector> {
        let c = self.c();
        Ok(*x * (c * self.g(y, z)) - *y * (c * self.g(x, z)))
    }
}

/// Step used by [`fd_curvature`] for both difference levels.
pub const FD_CURVATURE_STEP: f64 = 1e-3;

/// Curvature by nested finite differences of the connection, extending tangent vectors at
/// `p` to fields by projecting them as constants onto nearby tangent spaces.
pub fn fd_curvature<A: Ambient + ?Sized>(
    amb: &A,
    p: &Vector,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Vector {
    let h = FD_CURVATURE_STEP;
    let field = |q: &Vector, v: &Vector| amb.project(q, v);
    // ∇_{A(q)} B(q) for fields A, B given as closures of the base point
    let covariant = |q: &Vector, a: &dyn Fn(&Vector) -> Vector, b: &dyn Fn(&Vector) -> Vector| {
        let dir = a(q);
        let d = derivative_along(amb, q, &dir, b, h);
        d + amb.christoffel(q, &dir, &b(q))
    };
    let fx = |q: &Vector| field(q, x);
    let fy = |q: &Vector| field(q, y);
    let fz = |q: &Vector| field(q, z);
    let nabla_y_z = |q: &Vector| covariant(q, &fy, &fz);
    let nabla_x_z = |q: &Vector| covariant(q, &fx, &fz);
    let bracket = |q: &Vector| covariant(q, &fx, &fy) - covariant(q, &fy, &fx);
    let t1 = covariant(p, &fx, &nabla_y_z);
    let t2 = covariant(p, &fy, &nabla_x_z);
    let t3 = covariant(p, &bracket, &fz);
    t1 - t2 - t3
}

/// Fourth-order central derivative of `field` along the curve `retract(q + t·dir)`.
fn derivative_along<A: Ambient + ?Sized>(
    amb: &A,
    q: &Vector,
    dir: &Vector,
    field: &dyn Fn(&Vector) -> Vector,
    h: f64,
) -> Vector {
    let at = |t: f64| field(&amb.retract(&(*q + *dir * t)));
    (at(h) - at(-h)) * (8.0 / (12.0 * h)) - (at(2.0 * h) - at(-2.0 * h)) * (1.0 / (12.0 * h))
}
