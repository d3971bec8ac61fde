//! Decay-estimate certification: majorants, matched data, sweeps and the
//! supporting integral and kernel bounds.

mod bound;
mod profiles;

pub use bound::{bound_expr, format_rational, parse_rational, Case, DecayBound, LogKind};
pub use profiles::{data_sum, make_profile, validate_envelope, ProfileKind};
mod sweep;

pub use sweep::{fit_lines, sweep, verify_decay, Line, LineFit, SweepPoint, SweepReport, SweepSpec};
mod lemmas;

pub use lemmas::{
    check_estimate, check_near_origin, check_origin_energy, check_ts1, check_ts2, ts1_bound, ts1_integral, ts2_bound,
    ts2_integral, Branch, ConstantFit, Estimate, IntegralCheck, Sampling, LOG_SLOPE_TOL, MAX_GROWTH,
};
mod majorant;

pub use majorant::{check_region_majorant, split_cutoff, MajorantFit, Region};
