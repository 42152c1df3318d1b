//! Metrics built from Einstein factors: cones, the ambient metric, Poincaré
//! interiors, special Killing forms and iterated products.

pub mod ambient;
pub mod cone;
pub mod killing;
pub mod normal_form;
pub mod poincare;
pub mod recursion;

pub use ambient::{ambient_metric, ambient_metric_solved, ProductAmbientSpec};
pub use cone::{cone_coords, cone_product, metric_cone, metric_cone_with_lambda, ConeDirection, ConeProductSpec, ConeSpec};
pub use killing::{killing_cone_lift, special_killing_form, KillingFormSpec, KillingLift};
pub use normal_form::{ricci_normal_form, MetricFamily, NormalForm};
pub use poincare::{ambient_from_poincare, poincare_metric, AmbientFromPoincare, PoincareInterval, PoincareSpec};
pub use recursion::{multi_subproduct, MultiSubProductSpec};
