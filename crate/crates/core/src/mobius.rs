//! Möbius transformations `f(z) = (az + b) / (cz + d)` of the extended
//! complex plane and, through stereographic projection, of the sphere.
//!
//! Matrices are kept unnormalised: `λ·M` and `M` describe the same map for
//! any non-zero complex `λ`, so comparisons go through
//! [`MobiusMatrix::approx_eq_projective`].

use core::f64::consts::FRAC_PI_2;
use core::ops::{Mul, Range};

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{ComplexPoint, IndexMap, SpherePoint, SphericalCoord};

/// `|ad - bc|` at or below this is treated as singular.
pub const SINGULAR_DETERMINANT: f64 = 1e-12;
/// `|cz + d|` below this maps `z` to infinity.
pub const POLE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Default for MobiusMatrix {
    fn default() -> Self {
        Self::IDENTITY
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl MobiusMatrix {
    pub const IDENTITY: MobiusMatrix = MobiusMatrix {
        a: ONE,
        b: ZERO,
        c: ZERO,
        d: ONE,
    };

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let m = Self { a, b, c, d };
        let det = m.determinant();
        if !(det.norm() > SINGULAR_DETERMINANT) {
            return Err(Error::SingularMatrix);
        }
        Ok(m)
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// Rotation about the polar axis by `beta`: multiplies `z` by `e^{iβ}`,
    /// i.e. adds `beta` to every longitude.
    pub fn horizontal_rotation(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::NonFiniteAngle(beta));
        }
        let (sin, cos) = Float::sin_cos(beta);
        Ok(Self {
            a: Complex64::new(cos, sin),
            b: ZERO,
            c: ZERO,
            d: ONE,
        })
    }

    /// Rotation about the `y` axis by `gamma`; points on the `θ = 0`
    /// meridian gain `gamma` of latitude.
    pub fn vertical_rotation(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::NonFiniteAngle(gamma));
        }
        let (sin, cos) = Float::sin_cos(gamma / 2.0);
        Ok(Self {
            a: Complex64::new(cos, 0.0),
            b: Complex64::new(sin, 0.0),
            c: Complex64::new(-sin, 0.0),
            d: Complex64::new(cos, 0.0),
        })
    }

    /// Scaling `z ↦ s z`; fixes both poles.
    pub fn zoom(s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidZoom(s));
        }
        Ok(Self {
            a: Complex64::new(s, 0.0),
            b: ZERO,
            c: ZERO,
            d: ONE,
        })
    }

    /// Horizontal rotation, then vertical rotation, then zoom.
    pub fn from_command(cmd: &UserCommand) -> Result<Self> {
        let horizontal = Self::horizontal_rotation(cmd.beta)?;
        let vertical = Self::vertical_rotation(cmd.gamma)?;
        let zoom = Self::zoom(cmd.s)?;
        Ok(zoom.compose(&vertical.compose(&horizontal)))
    }

    /// Rotation taking `center` to the North pole.
    pub fn rotation_to_north(center: SphericalCoord) -> Result<Self> {
        let center = center.normalized();
        let horizontal = Self::horizontal_rotation(-center.theta)?;
        let vertical = Self::vertical_rotation(FRAC_PI_2 - center.phi)?;
        Ok(vertical.compose(&horizontal))
    }

    /// Zoom with level `s` about `center` instead of the North pole:
    /// `R⁻¹ · zoom(s) · R` with `R` the rotation taking `center` to the
    /// North pole. `center` is a fixed point of the resulting map.
    pub fn zoom_at(center: SphericalCoord, s: f64) -> Result<Self> {
        let zoom = Self::zoom(s)?;
        let r = Self::rotation_to_north(center)?;
        Ok(r.inverse().compose(&zoom).compose(&r))
    }

    /// Matrix product `self · other`: applies `other` first.
    pub fn compose(&self, other: &MobiusMatrix) -> MobiusMatrix {
        MobiusMatrix {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// Adjugate `(d, -b, -c, a)`; the inverse map up to scale.
    pub fn inverse(&self) -> MobiusMatrix {
        MobiusMatrix {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn scaled(&self, lambda: Complex64) -> MobiusMatrix {
        MobiusMatrix {
            a: self.a * lambda,
            b: self.b * lambda,
            c: self.c * lambda,
            d: self.d * lambda,
        }
    }

    /// Scales so that `ad - bc = 1` (one of the two square-root choices).
    pub fn normalized(&self) -> MobiusMatrix {
        self.scaled(self.determinant().sqrt().inv())
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Equality as maps: `other = λ·self` for some complex `λ`, with entries
    /// compared relative to the largest entry.
    pub fn approx_eq_projective(&self, other: &MobiusMatrix, tol: f64) -> bool {
        let lhs = self.entries();
        let rhs = other.entries();
        let pivot = (0..4)
            .max_by(|&i, &j| lhs[i].norm().total_cmp(&lhs[j].norm()))
            .unwrap_or(0);
        if lhs[pivot].norm() == 0.0 || rhs[pivot].norm() == 0.0 {
            return false;
        }
        let scale_l = lhs[pivot].norm();
        let scale_r = rhs[pivot].norm();
        // Bring both onto a common normalisation before comparing.
        let phase = rhs[pivot] / lhs[pivot];
        let phase = phase / phase.norm();
        lhs.iter().zip(rhs.iter()).all(|(l, r)| {
            let l = l * phase / scale_l;
            let r = r / scale_r;
            (l - r).norm() <= tol
        })
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        Self::IDENTITY.approx_eq_projective(self, tol)
    }

    /// `f(z)`. The pole of `f` and `f(∞) = a/c` with `c = 0` both give ∞.
    #[inline]
    pub fn apply(&self, z: ComplexPoint) -> ComplexPoint {
        if z.at_infinity {
            if self.c.norm() < POLE_THRESHOLD {
                return ComplexPoint::INFINITY;
            }
            let w = self.a / self.c;
            return ComplexPoint::new(w.re, w.im);
        }
        let z = Complex64::new(z.re, z.im);
        let den = self.c * z + self.d;
        if den.norm() < POLE_THRESHOLD {
            return ComplexPoint::INFINITY;
        }
        let w = (self.a * z + self.b) / den;
        if !(w.re.is_finite() && w.im.is_finite()) {
            return ComplexPoint::INFINITY;
        }
        ComplexPoint::new(w.re, w.im)
    }

    /// The induced map on the sphere.
    #[inline]
    pub fn apply_sphere(&self, p: SpherePoint) -> SpherePoint {
        self.apply(p.stereographic()).to_sphere()
    }

    /// The induced map on longitude/latitude.
    #[inline]
    pub fn apply_spherical(&self, c: SphericalCoord) -> SphericalCoord {
        self.apply_sphere(c.to_sphere()).to_spherical_unchecked()
    }
}

impl Mul for MobiusMatrix {
    type Output = MobiusMatrix;

    fn mul(self, rhs: MobiusMatrix) -> MobiusMatrix {
        self.compose(&rhs)
    }
}

/// A navigation request: horizontal rotation `beta`, vertical rotation
/// `gamma` (radians) and zoom level `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserCommand {
    pub beta: f64,
    pub gamma: f64,
    pub s: f64,
}

impl Default for UserCommand {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl UserCommand {
    pub const IDENTITY: UserCommand = UserCommand {
        beta: 0.0,
        gamma: 0.0,
        s: 1.0,
    };

    pub fn new(beta: f64, gamma: f64, s: f64) -> Result<Self> {
        let cmd = Self { beta, gamma, s };
        cmd.validate()?;
        Ok(cmd)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() {
            return Err(Error::NonFiniteAngle(self.beta));
        }
        if !self.gamma.is_finite() {
            return Err(Error::NonFiniteAngle(self.gamma));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::InvalidZoom(self.s));
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Result<MobiusMatrix> {
        MobiusMatrix::from_command(self)
    }
}

/// Pushes every entry of `map` through the sphere map induced by `m`.
pub fn transform_index_map(map: &IndexMap, m: &MobiusMatrix) -> IndexMap {
    let mut out = map.clone();
    transform_coords(m, map.as_slice(), out.as_mut_slice());
    out
}

/// Row-range form of [`transform_index_map`]: writes the transformed rows
/// `rows` of `map` into `out`, which holds exactly those rows.
pub fn transform_index_map_rows(
    map: &IndexMap,
    m: &MobiusMatrix,
    rows: Range<usize>,
    out: &mut [SphericalCoord],
) {
    transform_coords(m, map.rows(rows), out);
}

fn transform_coords(m: &MobiusMatrix, input: &[SphericalCoord], out: &mut [SphericalCoord]) {
    assert_eq!(input.len(), out.len(), "output buffer does not match rows");
    for (dst, src) in out.iter_mut().zip(input) {
        *dst = m.apply_spherical(*src);
    }
}
