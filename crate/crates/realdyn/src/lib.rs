//! Real entropy of real rational maps restricted to the circle `R ∪ {∞}`.

pub mod blaschke;
pub mod chart;
pub mod degree;
pub mod entropy;
pub mod error;
pub mod families;
pub mod julia;
pub mod kneading;
pub mod poly;
pub mod realmap;
pub mod roots;
pub mod scalar;
pub mod sturm;

pub use chart::CirclePoint;
pub use error::{Error, ErrorKind, Result};
pub use poly::Poly;
pub use realmap::{make_map, FixedPoint, MobiusReal, RealPolynomial, RealRationalMap, Symmetry};
pub use scalar::{RealFloat, Scalar};

pub type Rational = num_rational::BigRational;
pub type QPoly = Poly<Rational>;
pub type Poly64 = Poly<f64>;
pub type Poly32 = Poly<f32>;
pub type Point64 = CirclePoint<f64>;
pub type Point32 = CirclePoint<f32>;
