//! Risk-neutral densities from implied-vol smiles and the credit-risk
//! signal derived from them.

mod credit;
mod density;
mod pricing;
mod spline;

pub use credit::{credit_signals, CreditRiskPoint, DEFAULT_TAIL_PROB};
pub use density::{extract_distribution, pdf_from_cdf, sanitize_cdf, RiskNeutralDistribution, StrikeGrid};
pub use pricing::bs_call;
pub use spline::{detect_clamps, fit_vol_curve, VolCurve, FLAT_TOLERANCE};
