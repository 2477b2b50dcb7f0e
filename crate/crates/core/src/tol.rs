//! Numerical tolerances shared across modules.

use std::sync::OnceLock;

/// Absolute tolerance on time orderings.
pub const EPS_T: f64 = 1e-9;

/// Mixed state tolerance: absolute part.
pub const STATE_ATOL: f64 = 1e-6;
/// Mixed state tolerance: relative part.
pub const STATE_RTOL: f64 = 1e-9;

/// Terminal error allowed by rendezvous verification.
pub const VERIFY_ATOL: f64 = 1e-4;
pub const VERIFY_RTOL: f64 = 1e-6;

/// Fuel overshoot allowed anywhere a budget is checked.
pub const EPS_FUEL: f64 = 1e-6;

/// Default factor for the geometric slack; `FUELCON_EPS` overrides it.
pub const DEFAULT_EPS_G: f64 = 1e-6;

static EPS_G: OnceLock<f64> = OnceLock::new();

/// Factor used by [`eps_g`], read once from `FUELCON_EPS` if set to a positive number.
pub fn eps_g_factor() -> f64 {
    *EPS_G.get_or_init(|| {
        std::env::var("FUELCON_EPS")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|e| e.is_finite() && *e > 0.0)
            .unwrap_or(DEFAULT_EPS_G)
    })
}

/// Geometric membership slack for coordinates of the given magnitude.
pub fn eps_g(scale: f64) -> f64 {
    eps_g_factor() * (1.0 + scale.abs())
}

/// Mixed tolerance for comparing values of magnitude `scale`.
pub fn state_tol(scale: f64) -> f64 {
    STATE_ATOL + STATE_RTOL * scale.abs()
}

pub fn verify_tol(scale: f64) -> f64 {
    VERIFY_ATOL + VERIFY_RTOL * scale.abs()
}

/// Verification tolerance for a plan of horizon `tf`, floored at the resolution of
/// absolute switch times in f64 (phase durations are quantized at `ulp(tf)`).
pub fn verify_tol_at(scale: f64, tf: f64) -> f64 {
    verify_tol(scale) + f64::EPSILON * tf * tf
}
