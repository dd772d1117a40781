//! Closed-form checks of the analytical side: exponent feasibility, the
//! forcing lower bound, interpolation arithmetic and the BBM limit.

mod bbm;
mod feasibility;
mod lower_bound;
pub mod quadrature;
mod verify;

pub use bbm::{bbm_limit_check, richardson_at_one, scaled_seminorm, BbmField, BbmReport, BbmRow};
pub use feasibility::{feasibility_check, feasibility_threshold, interpolation_exponent, FeasibilityQuery, Interpolation};
pub use lower_bound::{gaussian_radial_moment, lower_bound_value, LowerBoundParams, RadialMoment};
pub use verify::{bbm_fields, format_table, run_verification, to_csv, Check, BBM_ORDERS};
