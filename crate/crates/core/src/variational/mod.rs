//! The variational layer: sections, the 4-form density, action, first
//! variation, field-equation residuals, invariance and bracket-identity
//! checkers, and the ansatz solver.

mod action;
pub mod density;
mod einstein;
mod invariance;
mod quadrature;
mod section;
mod solver;

pub use action::{
    action_derivative_fd, action_value, boundary_current, boundary_term, curvature_form, dtheta_contraction,
    first_variation, residual_a, residual_b, residual_b_with_scale, residual_report, theta_pullback, ActionValue,
    FirstVariation, Norms, ResidualReport, ThetaDensity,
};
pub use einstein::{calibrate_constant, einstein_oracle, MetricField, EINSTEIN_CONSTANT};
pub use invariance::{density_law_check, bracket_identity_check, DensityLawOutcome, BracketOutcome, DENSITY_LAW_TOL, BRACKET_TOL};
pub use quadrature::{gauss_legendre, integrate, integrate_face, Box4};
pub use section::{bump, spin_generator, DeformationField, Section, SectionJet, SpinExprs, SpinSource};
pub use solver::{solve_ansatz, SolveOptions, SolveOutcome};
