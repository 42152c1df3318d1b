//! Numerical checks of the geometric identities, reported per sample plan.

pub mod checks;
pub mod report;
pub mod transport;

pub use checks::{
    check_ambient_conditions, check_bach_vanishing, check_coordinate_equivalence, check_dilation, check_einstein, check_homothety_gradient,
    check_killing_lift, check_normal_form, check_special_killing, negative_control, perturbed_patch, AmbientChecks, NormalFormComparison,
    Tolerance, CONTROL_EPSILONS,
};
pub use report::{CheckReport, ToleranceTier, CSV_HEADER};
pub use transport::{check_drag_lemma, check_transverse_holonomy, euler_field_and_flow, holonomy_algebra_estimate, TransportProbe};
