//! M/D/1 waiting times, the staffing-rate inversion and channel demand
//! composition. Rates are customers per second, durations seconds.

use crate::error::{Error, Result};

/// Mean time in queue of an M/D/1 queue with service time `1 / mu`
/// (Pollaczek–Khinchine with zero service variance).
pub fn mdl_queue_wait(lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda >= 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "lambda = {lambda}, mu = {mu}"
        )));
    }
    if lambda >= mu {
        return Err(Error::UnstableSystem { lambda, mu });
    }
    Ok(lambda / (2.0 * mu * (mu - lambda)))
}

/// Service rate that makes `mdl_queue_wait(lambda_a, mu) == t_a`:
/// the positive root of `mu^2 - lambda_a * mu - lambda_a / (2 t_a) = 0`.
pub fn required_service_rate(lambda_a: f64, t_a: f64) -> Result<f64> {
    if !(lambda_a > 0.0 && lambda_a.is_finite()) {
        return Err(Error::DegenerateInput(format!(
            "live-agent demand {lambda_a} must be positive"
        )));
    }
    if !(t_a > 0.0) || t_a.is_nan() {
        return Err(Error::DegenerateInput(format!(
            "target time {t_a} must be positive"
        )));
    }
    Ok((lambda_a + (lambda_a * lambda_a + 2.0 * lambda_a / t_a).sqrt()) / 2.0)
}

/// Splits total demand: `(lambda_a, lambda_b)` where the live agent sees
/// direct customers plus chatbot failures.
pub fn channel_demands(lambda_total: f64, rho_b: f64, p_b: f64) -> (f64, f64) {
    let lambda_b = lambda_total * rho_b;
    let lambda_a = lambda_total * (1.0 - rho_b) + lambda_b * (1.0 - p_b);
    (lambda_a, lambda_b)
}
