//! End-to-end numerical experiments: propagation of chaos, empirical
//! measure rates, the martingale term `G^N` and exponential-moment audits.

mod chaos;
mod fournier;
mod gn;
mod moments;

pub use chaos::{run_chaos, run_chaos_with_flow, ChaosOptions, ChaosPoint, ChaosResult, ChaosRow, WindowPrediction};
pub use fournier::{run_fournier_check, FournierPoint, FournierResult, REFERENCE_SIZE};
pub use gn::{run_gn_rate, GnPoint, GnRateResult};
pub use moments::{run_moment_audit, MomentAudit, MomentCurve};

use crate::analysis::{fit_power_law, PowerLawFit};

/// Power-law fit of `ys` against `xs`, or `None` when some `y` is zero.
pub(crate) fn slope_or_none(xs: &[f64], ys: &[f64]) -> Option<PowerLawFit> {
    fit_power_law(xs, ys).ok()
}
