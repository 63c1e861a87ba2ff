use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A Cartesian point was expected on the unit sphere.
    NonUnitPoint {
        norm: f64,
    },
    /// ERP rasters must satisfy `width == 2 * height` with `height >= 2`.
    NotEquirectangular {
        height: usize,
        width: usize,
    },
    /// Two rasters (or a raster and its sample buffer) disagree in shape.
    ShapeMismatch {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },
    /// Zoom level must be strictly positive and finite.
    InvalidZoom(f64),
    /// A rotation angle was NaN or infinite.
    NonFiniteAngle(f64),
    /// Möbius matrix with `|ad - bc|` at or below the singularity threshold.
    SingularMatrix,
    /// Slerp between (near-)antipodal points has no unique geodesic.
    DegenerateGeodesic {
        angle: f64,
    },
    /// Up/down-sampling factor outside the supported set.
    UnsupportedFactor(usize),
    InvalidCamera(&'static str),
    /// Raster too small for the requested operation.
    TooSmall {
        height: usize,
        width: usize,
        min: usize,
    },
    NonFiniteSample,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonUnitPoint { norm } => {
                write!(f, "point is not on the unit sphere (norm {norm})")
            }
            Error::NotEquirectangular { height, width } => write!(
                f,
                "equirectangular raster must have width = 2 * height and height >= 2, got {height}x{width}"
            ),
            Error::ShapeMismatch { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}x{}, found {}x{}x{}",
                expected.0, expected.1, expected.2, found.0, found.1, found.2
            ),
            Error::InvalidZoom(s) => write!(f, "zoom level must satisfy s > 0, got {s}"),
            Error::NonFiniteAngle(a) => write!(f, "rotation angle must be finite, got {a}"),
            Error::SingularMatrix => write!(f, "Möbius matrix is singular (ad - bc = 0)"),
            Error::DegenerateGeodesic { angle } => write!(
                f,
                "slerp endpoints are antipodal (angle {angle} rad); geodesic is not unique"
            ),
            Error::UnsupportedFactor(k) => {
                write!(f, "unsupported scale factor {k}; expected one of 1, 2, 4, 8, 16")
            }
            Error::InvalidCamera(why) => write!(f, "invalid camera: {why}"),
            Error::TooSmall { height, width, min } => write!(
                f,
                "raster {height}x{width} is too small; both sides must be at least {min}"
            ),
            Error::NonFiniteSample => write!(f, "raster contains a non-finite sample"),
        }
    }
}

impl core::error::Error for Error {}
