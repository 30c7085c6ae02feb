//! Convergence studies, commutator checks and efficiency comparisons.

mod commutator;
mod convergence;
mod efficiency;
mod fit;
mod reference;

pub use commutator::{commutator_check, fd_lie_bracket, CommutatorReport, FD_DELTA};
pub use convergence::{convergence_study, ConvergenceReport, StudyConfig, REFERENCE_MARGIN, ROUNDING_REL};
pub use efficiency::{
    efficiency_compare, smallest_necessary_step, write_efficiency_csv, EfficiencyRow, EFFICIENCY_HEADER,
};
pub use fit::{fit_slope, SlopeFit, MIN_FIT_POINTS};
pub use reference::{reference_multi, reference_scheme, reference_solution, Reference, MAX_REFERENCE_STEPS};
