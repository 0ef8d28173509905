//! Transfer operators attached to rational maps of the Riemann sphere.

pub mod branches;
pub mod eigen;
pub mod ergodic;
pub mod error;
pub mod field;
pub mod hol;
pub mod julia;
pub mod lattes;
pub mod linalg;
pub mod operators;
pub mod poly;
pub mod quadrature;
pub mod rational;
pub mod rng;
pub mod roots;
pub mod sphere;

pub use error::{Error, Result};
pub use field::Field;
pub use num_complex::Complex64;
pub use poly::Polynomial;
pub use rational::{CriticalData, RationalMap};
pub use sphere::{MoebiusTransform, SpherePoint};
pub use rng::RandomStream;
