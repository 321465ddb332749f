//! BV calculus at computable scale.
//!
//! * [`line`]: BV functions on a line, Skorohod derivatives against positive
//!   densities, and `Λf = ϱ f'`;
//! * [`measure`]: vector measures with variation and semivariation;
//! * [`family`]: planar functions carried line by line, integration by parts,
//!   `Λ I_U` for convex `U`, and extension by zero;
//! * [`chain`]: the chain rule with jump quotients;
//! * [`closedness`]: norm-bounded pointwise limits;
//! * [`mnorm`]: the `M`-norm over a direction net.

pub mod chain;
pub mod closedness;
pub mod family;
pub mod line;
pub mod measure;
pub mod mnorm;

pub use chain::{chain_rule, ChainRule};
pub use closedness::{bv_norm_1d, closedness_harness, BvNorm1d, ClosednessReport};
pub use family::{
    extend_by_zero, ibp_residual, indicator_line_measure, indicator_variation, lambda_indicator_convex, Bump1d, IbpReport,
    IndicatorLambda, LineFrame, LineMeasureFn, PlanarBv, TestFunction, ZeroExtension, ZeroExtensionReport,
};
pub use line::{lambda_1d, skorohod_derivative_1d, Bv1d, Continuous, Density1d, GaussianLine, Jump, SharedDensity};
pub use measure::{AcPart, Atom, FinVectorMeasure, Semivariation};
pub use mnorm::{direction_net, m_norm, MNormRecord};
