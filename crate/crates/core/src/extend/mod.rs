//! Extension operators and extension-cost certificates.
//!
//! * [`reflect`]: half-space reflection, which costs exactly a factor `2^{1/p}`;
//! * [`lipschitz`]: McShane extension of Lipschitz functions on planar sets;
//! * [`variational`]: minimal-norm `p = 2` extensions of hat functions off the
//!   rhomb, solved on the apex-rescaled disc `U`;
//! * [`sweep`]: per-`m` cost ratios (variational for `p = 2`, coarea lower
//!   bounds for `p = 1`) and their fitted growth exponent.

pub mod lipschitz;
pub mod reflect;
pub mod sweep;
pub mod variational;

pub use lipschitz::McShaneExtension;
pub use reflect::{reflect_gradient, reflect_halfspace, reflection_norms, ReflectionReport};
pub use sweep::{coarea_cost_bound, extension_ratio_sweep, CostMethod, SweepRow, SweepTable};
pub use variational::{min_norm_extension_p2, ExtensionCostCertificate, ExtensionProblem, GridSpec};
