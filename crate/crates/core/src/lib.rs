//! Exact computational toolkit for torus-bundle groups `Z^2 x| Z`.
//!
//! The crate builds up, layer by layer:
//!
//! * [`group`] — checked integer arithmetic for the semidirect product law,
//!   matrix powers and word evaluation;
//! * [`cayley`] — generating sets, neighbor expansion, breadth-first ball
//!   enumeration with exact word lengths, growth series and a textual ball
//!   cache format;
//! * [`domain`] — finite multiplicity domains, their mass, boundary edges
//!   and gradient;
//! * [`transport`] — the transport functional over a ball, its exact
//!   averaging lower bound and word-length upper bound;
//! * [`profiler`] — sweeps of domain families into (gradient, mass) profile
//!   points and the least-squares exponent fits.
//!
//! Everything up to the fitting layer is exact integer or rational
//! arithmetic; floating point only enters when estimating exponents.

pub mod cayley;
pub mod domain;
pub mod error;
pub mod group;
pub mod profiler;
mod textio;
pub mod transport;

pub use cayley::{
    custom_generators, default_generators, enumerate_ball, enumerate_ball_capped, growth_series,
    growth_series_capped, neighbors, read_ball_cache, word_length, write_ball_cache, CayleyBall,
    GeneratorSet, DEFAULT_ELEMENT_CAP,
};
pub use domain::{
    from_ball, from_box, gradient, random_connected, read_domain_file, translate_left,
    varopoulos_boundary, write_domain_file, BoundaryEdge, Domain,
};
pub use error::{Error, Result};
pub use group::{
    Gen, Geometry, GroupElement, GroupKind, Letter, SL2Matrix, TorusBundleGroup, Word,
};
pub use profiler::{
    fit_loglog_slope, fit_nlogn_ratios, growth_exponent, growth_rate, isoperimetric_profile,
    profile_report, write_profile_csv, DomainFamily, ExponentClaim, ProfileParams, ProfilePoint,
    ProfileReport,
};
pub use transport::{
    average_transport, find_witness, select_radius, select_radius_capped, transport,
    transport_set_difference, verify_bounds, verify_bounds_capped, Rational, TransportReport,
    WitnessInfo,
};
