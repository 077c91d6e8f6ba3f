//! Exact-arithmetic certification of the constants behind a stable-hypersurface
//! curvature argument: the two-variable quadratic minimum, the pointwise
//! curvature constant `epsilon(n)`, the mu-bubble chain, the De Giorgi
//! iteration constants, and a parameter search that recertifies its output.

pub mod bubble;
pub mod certificate;
pub mod curvature;
pub mod error;
pub mod hiprec;
pub mod iteration;
pub mod optimizer;
pub mod params;
pub mod pipeline;
pub mod quadratic;
pub mod rational;
pub mod report;
pub mod sampling;
pub mod surd;

pub use certificate::{exit_code, Certificate};
pub use error::{Error, Result};
pub use params::{reference_row, ParamSet, ReferenceRow};
pub use pipeline::Settings;
pub use rational::Rational;
pub use surd::{QuadSurd, SurdSum};
