//! Quantitative functionals on solution paths: Euler residuals, weak-strong
//! stability reports, growth bounds and residual radii, Cauchy matrices,
//! Young-measure pairings for empirical measures, and vanishing-viscosity
//! tables.

mod bounds;
mod dissipation;
mod report;
mod residual;
mod stability;
mod young;

pub use bounds::{
    calibrate_constant, growth_bound, radius_from_rate, residual_radius, BoundParams, GrowthData, GrowthSample,
    RadiusVariant,
};
pub use dissipation::{
    anomalous_dissipation_series, scalar_dissipation_series, DissipationRow, ResolutionSchedule, SeriesOptions,
};
pub use report::{
    write_dissipation_csv, write_radii_csv, write_stability_csv, RadiusRow, DISSIPATION_HEADER, RADII_HEADER,
    STABILITY_HEADER,
};
pub use residual::{euler_residual, strain_negative_part_sup};
pub use stability::{cauchy_matrix, weak_strong_report, StabilityReport, STABILITY_TOL};
pub use young::{
    concentration_defect, energy_functional, ensemble_pairing, ensemble_variance, jensen_gap, jensen_gap_fields,
    young_pairing, PointValues, TestIntegrand,
};
