use super::RiskModel;
use crate::{Error, Result};

/// Laplace exponent of the risk surplus, defined through
/// E e^{θ(R_t − x)} = e^{t ψ(θ)}:
///
///   ψ(θ) = cθ − λ + λ exp(−λ + λ Σ_j α_j δ_j / (δ_j + θ)) + ½σ²θ².
pub fn psi_r(model: &RiskModel, theta: f64) -> Result<f64> {
    if theta.is_nan() || theta < 0.0 {
        return Err(Error::Domain(format!(
            "psi is evaluated for theta >= 0, got {theta}"
        )));
    }
    let lambda = model.lambda();
    let inner: f64 = model
        .claims()
        .iter()
        .map(|&(alpha, delta)| alpha * delta / (delta + theta))
        .sum();
    Ok(
        model.c() * theta + lambda * (lambda * (inner - 1.0)).exp() - lambda
            + 0.5 * model.sigma() * model.sigma() * theta * theta,
    )
}

/// Right derivative ψ'(0⁺) = c − λ² Σ_j α_j/δ_j, the long-run drift of the
/// surplus. Positive exactly when the net-profit condition holds.
pub fn psi_r_derivative_at_zero(model: &RiskModel) -> f64 {
    model.drift()
}

/// Φ(q), the largest nonnegative root of ψ(θ) = q, by bracket expansion and
/// bisection to 1e−12 absolute. Under the net-profit condition Φ(0) = 0.
pub fn phi_q(model: &RiskModel, q: f64) -> Result<f64> {
    if q.is_nan() || q < 0.0 {
        return Err(Error::Domain(format!("q must be nonnegative, got {q}")));
    }
    if q == 0.0 && psi_r_derivative_at_zero(model) >= 0.0 {
        // psi is convex with psi(0) = 0; a nonnegative slope at 0 makes 0 the
        // largest root.
        return Ok(0.0);
    }
    // f(theta) = psi(theta) - q has f(infinity) > 0 and exactly one sign
    // change on (0, infinity) in the remaining cases (convexity).
    let f = |theta: f64| psi_r(model, theta).map(|v| v - q);
    let mut hi = 1.0;
    let mut guard = 0;
    while f(hi)? <= 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::NonConvergence(
                "bracket expansion for Phi(q) exceeded 2^200".into(),
            ));
        }
    }
    let mut lo = 0.0;
    // When q = 0 and the drift is negative, f(0) = 0 is itself a root but not
    // the largest; step past the dip to keep f(lo) < 0.
    if q == 0.0 {
        let mut step = hi / 2.0;
        while f(step)? >= 0.0 {
            step /= 2.0;
            if step < 1e-300 {
                return Ok(0.0);
            }
        }
        lo = step;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
