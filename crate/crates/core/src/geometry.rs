//! Coordinate spaces and the projections between them.
//!
//! * [`SphericalCoord`]: longitude `theta` and latitude `phi` in radians.
//! * [`SpherePoint`]: a point on the unit (Riemann) sphere.
//! * [`ComplexPoint`]: a point of the extended complex plane, reached from
//!   the sphere by stereographic projection from the North pole `(0, 0, 1)`.
//!
//! ERP rasters use pixel centres: row 0 is the northernmost row and
//! column 0 starts at longitude `-π`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};
use core::ops::Range;

use num_traits::Float;

use crate::error::{Error, Result};

/// Maximum deviation from unit norm accepted by [`SpherePoint::to_spherical`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// Wraps a longitude into `[-π, π)`.
#[inline]
pub fn wrap_longitude(theta: f64) -> f64 {
    if (-PI..PI).contains(&theta) {
        return theta;
    }
    let wrapped = theta - TAU * Float::floor((theta + PI) / TAU);
    // `floor` can leave the value a rounding step outside the interval.
    if wrapped >= PI {
        wrapped - TAU
    } else if wrapped < -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SphericalCoord {
    /// Longitude, radians.
    pub theta: f64,
    /// Latitude, radians; positive towards the North pole.
    pub phi: f64,
}

impl SphericalCoord {
    pub const fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Brings the coordinate into the canonical ranges `theta ∈ [-π, π)`,
    /// `phi ∈ [-π/2, π/2]`. Latitudes past a pole are reflected over it,
    /// which moves the longitude by `π`.
    pub fn normalized(self) -> Self {
        let mut theta = self.theta;
        let mut phi = self.phi;
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&phi) {
            // Fold onto (-π, π] first, then reflect.
            phi = wrap_longitude(phi);
            if phi > FRAC_PI_2 {
                phi = PI - phi;
                theta += PI;
            } else if phi < -FRAC_PI_2 {
                phi = -PI - phi;
                theta += PI;
            }
        }
        Self {
            theta: wrap_longitude(theta),
            phi,
        }
    }

    /// Spherical projection onto the unit sphere.
    #[inline]
    pub fn to_sphere(self) -> SpherePoint {
        let (sin_phi, cos_phi) = Float::sin_cos(self.phi);
        let (sin_theta, cos_theta) = Float::sin_cos(self.theta);
        SpherePoint {
            x: cos_phi * cos_theta,
            y: cos_phi * sin_theta,
            z: sin_phi,
        }
    }

    /// Great-circle distance in radians.
    pub fn angle_to(self, other: SphericalCoord) -> f64 {
        self.to_sphere().angle_to(other.to_sphere())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpherePoint {
    pub const NORTH_POLE: SpherePoint = SpherePoint {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };
    pub const SOUTH_POLE: SpherePoint = SpherePoint {
        x: 0.0,
        y: 0.0,
        z: -1.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: SpherePoint) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: SpherePoint) -> SpherePoint {
        SpherePoint {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        Float::sqrt(self.dot(self))
    }

    pub fn scale(self, k: f64) -> SpherePoint {
        SpherePoint::new(self.x * k, self.y * k, self.z * k)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: SpherePoint) -> SpherePoint {
        SpherePoint::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    /// Returns `None` for the zero vector.
    pub fn normalized(self) -> Option<SpherePoint> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    /// Angle subtended at the origin, accurate for both tiny and near-π angles.
    #[inline]
    pub fn angle_to(self, other: SpherePoint) -> f64 {
        Float::atan2(self.cross(other).norm(), self.dot(other))
    }

    /// Inverse spherical projection.
    ///
    /// Longitude uses the two-argument arctangent so every quadrant is
    /// recovered; at the poles, where longitude is undefined, it is `0`.
    pub fn to_spherical(self) -> Result<SphericalCoord> {
        let norm = self.norm();
        if !(Float::abs(norm - 1.0) <= UNIT_NORM_TOLERANCE) {
            return Err(Error::NonUnitPoint { norm });
        }
        Ok(self.to_spherical_unchecked())
    }

    /// [`to_spherical`](Self::to_spherical) without the unit-norm check.
    #[inline]
    pub fn to_spherical_unchecked(self) -> SphericalCoord {
        let phi = Float::asin(self.z.clamp(-1.0, 1.0));
        let theta = if self.x == 0.0 && self.y == 0.0 {
            0.0
        } else {
            wrap_longitude(Float::atan2(self.y, self.x))
        };
        SphericalCoord { theta, phi }
    }

    /// Stereographic projection from the North pole onto the plane `z = 0`.
    #[inline]
    pub fn stereographic(self) -> ComplexPoint {
        let denom = 1.0 - self.z;
        if denom <= 0.0 {
            return ComplexPoint::INFINITY;
        }
        ComplexPoint::new(self.x / denom, self.y / denom)
    }
}

/// A point of the extended complex plane `x' + i y'`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexPoint {
    pub re: f64,
    pub im: f64,
    /// When set, `re` and `im` carry no meaning.
    pub at_infinity: bool,
}

impl ComplexPoint {
    pub const INFINITY: ComplexPoint = ComplexPoint {
        re: 0.0,
        im: 0.0,
        at_infinity: true,
    };

    pub const fn new(re: f64, im: f64) -> Self {
        Self {
            re,
            im,
            at_infinity: false,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.at_infinity
    }

    /// Inverse stereographic projection.
    #[inline]
    pub fn to_sphere(self) -> SpherePoint {
        if self.at_infinity {
            return SpherePoint::NORTH_POLE;
        }
        let r2 = self.re * self.re + self.im * self.im;
        if !r2.is_finite() {
            return SpherePoint::NORTH_POLE;
        }
        let denom = 1.0 + r2;
        SpherePoint {
            x: 2.0 * self.re / denom,
            y: 2.0 * self.im / denom,
            z: (r2 - 1.0) / denom,
        }
    }
}

/// Longitude/latitude of the centre of pixel `(row, col)` in an `height x width` ERP raster.
#[inline]
pub fn pixel_center(height: usize, width: usize, row: usize, col: usize) -> SphericalCoord {
    SphericalCoord {
        theta: TAU * (col as f64 + 0.5) / width as f64 - PI,
        phi: FRAC_PI_2 - PI * (row as f64 + 0.5) / height as f64,
    }
}

/// Continuous `(row, col)` position of a coordinate in an ERP raster; the
/// exact inverse of [`pixel_center`]. The column is not wrapped.
#[inline]
pub fn spherical_to_pixel(coord: SphericalCoord, height: usize, width: usize) -> (f64, f64) {
    let row = (FRAC_PI_2 - coord.phi) * height as f64 / PI - 0.5;
    let col = (coord.theta + PI) * width as f64 / TAU - 0.5;
    (row, col)
}

pub(crate) fn check_erp(height: usize, width: usize) -> Result<()> {
    if height < 2 || width != 2 * height {
        return Err(Error::NotEquirectangular { height, width });
    }
    Ok(())
}

/// A grid of spherical coordinates, stored row-major.
///
/// For ERP grids entry `(i, j)` is the centre of pixel `(i, j)`; for
/// perspective views it is the direction seen through that view pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    height: usize,
    width: usize,
    coords: Vec<SphericalCoord>,
}

impl IndexMap {
    pub fn from_vec(height: usize, width: usize, coords: Vec<SphericalCoord>) -> Result<Self> {
        if coords.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected: (height, width, 1),
                found: (coords.len(), 1, 1),
            });
        }
        Ok(Self {
            height,
            width,
            coords,
        })
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> SphericalCoord,
    ) -> Self {
        let mut coords = Vec::with_capacity(height * width);
        for row in 0..height {
            for col in 0..width {
                coords.push(f(row, col));
            }
        }
        Self {
            height,
            width,
            coords,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> SphericalCoord {
        self.coords[row * self.width + col]
    }

    pub fn as_slice(&self) -> &[SphericalCoord] {
        &self.coords
    }

    pub fn as_mut_slice(&mut self) -> &mut [SphericalCoord] {
        &mut self.coords
    }

    /// Entries of rows `rows`, row-major.
    pub fn rows(&self, rows: Range<usize>) -> &[SphericalCoord] {
        &self.coords[rows.start * self.width..rows.end * self.width]
    }

    pub fn into_vec(self) -> Vec<SphericalCoord> {
        self.coords
    }
}

/// Pixel-centre index map of an `height x width` ERP raster.
pub fn erp_grid(height: usize, width: usize) -> Result<IndexMap> {
    check_erp(height, width)?;
    Ok(IndexMap::from_fn(height, width, |row, col| {
        pixel_center(height, width, row, col)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_4;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn assert_point(p: SpherePoint, x: f64, y: f64, z: f64) {
        assert!(
            close(p.x, x, 1e-12) && close(p.y, y, 1e-12) && close(p.z, z, 1e-12),
            "{p:?} != ({x}, {y}, {z})"
        );
    }

    #[test]
    fn spherical_projection_examples() {
        assert_point(SphericalCoord::new(0.0, 0.0).to_sphere(), 1.0, 0.0, 0.0);
        assert_point(
            SphericalCoord::new(FRAC_PI_2, 0.0).to_sphere(),
            0.0,
            1.0,
            0.0,
        );
        assert_point(
            SphericalCoord::new(1.234, FRAC_PI_2).to_sphere(),
            0.0,
            0.0,
            1.0,
        );
    }

    #[test]
    fn inverse_spherical_projection_examples() {
        let c = SpherePoint::new(0.0, 1.0, 0.0).to_spherical().unwrap();
        assert!(close(c.theta, FRAC_PI_2, 1e-15) && c.phi == 0.0);

        // atan(y/x) would give 0 here.
        let c = SpherePoint::new(-1.0, 0.0, 0.0).to_spherical().unwrap();
        assert_eq!(c.theta, -PI);
        assert_eq!(c.phi, 0.0);

        let c = SpherePoint::new(0.0, 0.0, -1.0).to_spherical().unwrap();
        assert_eq!(c.theta, 0.0);
        assert!(close(c.phi, -FRAC_PI_2, 1e-15));
    }

    #[test]
    fn inverse_spherical_rejects_non_unit() {
        let err = SpherePoint::new(0.0, 2.0, 0.0).to_spherical().unwrap_err();
        assert!(matches!(err, Error::NonUnitPoint { .. }));
        assert!(SpherePoint::new(0.0, 0.0, 0.0).to_spherical().is_err());
        assert!(SpherePoint::new(f64::NAN, 0.0, 0.0).to_spherical().is_err());
        assert!(SpherePoint::new(1.0 + 5e-7, 0.0, 0.0)
            .to_spherical()
            .is_ok());
    }

    #[test]
    fn stereographic_examples() {
        let south = SpherePoint::SOUTH_POLE.stereographic();
        assert!(!south.at_infinity && south.re == 0.0 && south.im == 0.0);
        let eq = SpherePoint::new(1.0, 0.0, 0.0).stereographic();
        assert_eq!((eq.re, eq.im), (1.0, 0.0));
        assert!(SpherePoint::NORTH_POLE.stereographic().at_infinity);
    }

    #[test]
    fn inverse_stereographic_examples() {
        assert_point(ComplexPoint::new(0.0, 0.0).to_sphere(), 0.0, 0.0, -1.0);
        assert_point(ComplexPoint::INFINITY.to_sphere(), 0.0, 0.0, 1.0);
        assert_point(ComplexPoint::new(1.0, 0.0).to_sphere(), 1.0, 0.0, 0.0);
        assert_point(ComplexPoint::new(1e200, 1e200).to_sphere(), 0.0, 0.0, 1.0);
    }

    #[test]
    fn erp_grid_examples() {
        let g = erp_grid(2, 4).unwrap();
        let c = g.get(0, 0);
        assert!(close(c.theta, -3.0 * FRAC_PI_4, 1e-15) && close(c.phi, FRAC_PI_4, 1e-15));
        let c = g.get(1, 3);
        assert!(close(c.theta, 3.0 * FRAC_PI_4, 1e-15) && close(c.phi, -FRAC_PI_4, 1e-15));

        let big = erp_grid(1024, 2048).unwrap();
        assert_eq!((big.height(), big.width()), (1024, 2048));
        assert_eq!(big.as_slice().len(), 1024 * 2048);
    }

    #[test]
    fn erp_grid_rejects_bad_dimensions() {
        assert!(matches!(
            erp_grid(2, 5),
            Err(Error::NotEquirectangular { .. })
        ));
        assert!(erp_grid(1, 2).is_err());
        assert!(erp_grid(0, 0).is_err());
    }

    #[test]
    fn spherical_to_pixel_examples() {
        let (r, c) = spherical_to_pixel(SphericalCoord::new(-3.0 * FRAC_PI_4, FRAC_PI_4), 2, 4);
        assert!(close(r, 0.0, 1e-15) && close(c, 0.0, 1e-15));
        let (r, c) = spherical_to_pixel(SphericalCoord::new(0.0, 0.0), 2, 4);
        assert_eq!((r, c), (0.5, 1.5));
        let (_, c) = spherical_to_pixel(SphericalCoord::new(PI - 1e-12, 0.0), 2, 4);
        assert!(close(c, 3.5, 1e-9));
    }

    #[test]
    fn grid_and_pixel_mapping_are_inverse() {
        for (h, w) in [(2, 4), (7, 14), (64, 128), (512, 1024)] {
            let g = erp_grid(h, w).unwrap();
            for row in 0..h {
                for col in (0..w).step_by(1 + w / 37) {
                    let (r, c) = spherical_to_pixel(g.get(row, col), h, w);
                    assert!(
                        (r - row as f64).abs() < 1e-12,
                        "{h}x{w} ({row},{col}) -> {r}"
                    );
                    assert!(
                        (c - col as f64).abs() < 1e-12,
                        "{h}x{w} ({row},{col}) -> {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn wrap_longitude_ranges() {
        assert_eq!(wrap_longitude(PI), -PI);
        assert_eq!(wrap_longitude(-PI), -PI);
        assert!(close(wrap_longitude(3.0 * PI + 0.5), -PI + 0.5, 1e-12));
        assert!(close(wrap_longitude(-7.0 * PI - 0.25), PI - 0.25, 1e-12));
        for k in -50..50 {
            let t = wrap_longitude(k as f64 * 0.7317);
            assert!((-PI..PI).contains(&t));
        }
    }

    #[test]
    fn normalized_reflects_over_pole() {
        let c = SphericalCoord::new(0.25, FRAC_PI_2 + 0.1).normalized();
        assert!(close(c.phi, FRAC_PI_2 - 0.1, 1e-12));
        assert!(close(c.theta, 0.25 + PI - TAU, 1e-12));
        let c = SphericalCoord::new(0.0, -FRAC_PI_2 - 0.2).normalized();
        assert!(close(c.phi, -FRAC_PI_2 + 0.2, 1e-12));
        assert!(close(c.theta, -PI, 1e-12));
    }

    #[test]
    fn stereographic_modulus_on_meridian() {
        // |stp(sp(θ, φ))| = tan(π/4 + φ/2)
        for i in 0..200 {
            let phi = -1.5 + 3.0 * i as f64 / 199.0;
            let theta = 0.37 * i as f64 - 3.0;
            let z = SphericalCoord::new(theta, phi).to_sphere().stereographic();
            let modulus = (z.re * z.re + z.im * z.im).sqrt();
            let expected = (FRAC_PI_4 + phi / 2.0).tan();
            assert!(
                (modulus - expected).abs() <= 1e-9 * expected.max(1.0),
                "{phi}"
            );
        }
    }
}
