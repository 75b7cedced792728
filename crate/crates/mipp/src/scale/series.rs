use super::exponent::{phi_q, psi_r, psi_r_derivative_at_zero};
use super::kernel::{conv_exponential, conv_trapezoid, cumulative_trapezoid, kernel_tables, Grid};
use super::RiskModel;
use crate::{Error, Result};

/// Cap on the number of series terms before reporting non-convergence.
const MAX_TERMS: usize = 500;
/// A scale-function value below this floor makes ratios of the table
/// meaningless.
const VALUE_FLOOR: f64 = 1e-300;

/// W^{(q)} sampled on a uniform grid, with truncation diagnostics.
#[derive(Debug, Clone)]
pub struct ScaleTable {
    pub grid: Grid,
    pub q: f64,
    pub values: Vec<f64>,
    pub terms_used: usize,
    /// Factorial bound on the sup-norm of the omitted series tail.
    pub series_tail_bound: f64,
}

impl ScaleTable {
    /// W at an arbitrary abscissa inside the grid, by linear interpolation.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || x < 0.0 || x > self.grid.x_max() {
            return Err(Error::Domain(format!(
                "x = {x} outside the tabulated range [0, {}]",
                self.grid.x_max()
            )));
        }
        let pos = x / self.grid.h();
        let lo = pos.floor() as usize;
        if lo + 1 >= self.values.len() {
            return Ok(*self.values.last().unwrap());
        }
        let w = pos - lo as f64;
        Ok(self.values[lo] * (1.0 - w) + self.values[lo + 1] * w)
    }
}

/// The scale function W^{(q)} of the risk model on the given grid, through
/// the convolution series
///
///   W^{(q)} = (1/c) · π ∗ Σ_{n≥0} Ϝ^{∗n} ∗ F_{n+1}     (σ > 0)
///   Ŵ^{(q)} = (1/c) · π ∗ Σ_{n≥0} Ϝ^{∗n}               (σ = 0)
///
/// with F_{n+1} the Erlang(n+1, 2c/σ²) density. The global 1/c factor makes
/// the series satisfy the defining Laplace identity
/// ∫ e^{−βx} W^{(q)}(x) dx = 1/(ψ(β) − q), which
/// [`laplace_identity_residual`] certifies numerically.
///
/// Terms are built incrementally: each term is the previous one convolved
/// once with Ϝ and, for σ > 0, once with the exponential density of rate
/// 2c/σ² (Erlang(n+1) being the (n+1)-fold exponential convolution; this
/// smoothing step is evaluated by an exact integrating-factor recurrence, so
/// stiff rates at small σ cost no accuracy). Accumulation stops when the
/// sup-norm of the newest term drops below tol·c; the factorial envelope
/// (K·x_max)^n/n!, K = sup|Ϝ|, certifies the recorded tail bound.
pub fn scale_function(model: &RiskModel, q: f64, grid: Grid, tol: f64) -> Result<ScaleTable> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tol must be positive, got {tol}")));
    }
    let kernels = kernel_tables(model, q, grid)?;
    let digamma = &kernels.digamma_values;
    let c = model.c();
    let sigma = model.sigma();
    let m = grid.len();
    let h = grid.h();

    let smoothing_rate = if sigma > 0.0 {
        Some(2.0 * c / (sigma * sigma))
    } else {
        None
    };
    // Leading term: pi * F_1 = 1 - e^{-rx} for sigma > 0, pi itself for sigma = 0.
    let mut term: Vec<f64> = match smoothing_rate {
        Some(r) => (0..m).map(|k| -f64::exp_m1(-r * grid.x(k))).collect(),
        None => vec![1.0; m],
    };
    let mut values = term.clone();
    let mut terms_used = 1;
    let stop = tol * c;
    loop {
        let sup = term.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
        if sup < stop {
            break;
        }
        if terms_used >= MAX_TERMS {
            return Err(Error::NonConvergence(format!(
                "series did not reach tol*c = {stop:e} within {MAX_TERMS} terms (last sup-norm {sup:e})"
            )));
        }
        term = conv_trapezoid(&term, digamma, h);
        if let Some(r) = smoothing_rate {
            term = conv_exponential(&term, r, h);
        }
        for (v, t) in values.iter_mut().zip(&term) {
            *v += t;
        }
        terms_used += 1;
    }
    for v in values.iter_mut() {
        *v /= c;
    }

    // Factorial tail: sum_{k >= terms_used} (K x_max)^k / k!, normalized by c.
    // The envelope peaks at k ~ z <= e^z, so no overflow care is needed here.
    let k_sup = digamma.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let z = k_sup * grid.x_max();
    let mut t = 1.0;
    for j in 1..=terms_used {
        t *= z / j as f64;
    }
    let mut tail = 0.0;
    for k in terms_used..terms_used + 4000 {
        tail += t;
        t *= z / (k as f64 + 1.0);
        if k as f64 > z && t < tail * 1e-18 {
            break;
        }
    }
    Ok(ScaleTable {
        grid,
        q,
        values,
        terms_used,
        series_tail_bound: tail / c,
    })
}

/// Probability that the surplus started at x never goes below zero:
/// ψ'(0⁺)·W(x), clamped to [0, 1]. Requires the net-profit condition; when it
/// fails, survival is 0 for every x and the computation is refused with a
/// NetProfit error rather than evaluated through W.
pub fn survival_probability(model: &RiskModel, x: f64, grid: Grid, tol: f64) -> Result<f64> {
    model.require_net_profit()?;
    let table = scale_function(model, 0.0, grid, tol)?;
    survival_from_table(model, &table, x)
}

/// Survival probability read from a precomputed q = 0 table of the same
/// model (avoids rebuilding the series when many abscissae are queried).
pub fn survival_from_table(model: &RiskModel, table: &ScaleTable, x: f64) -> Result<f64> {
    model.require_net_profit()?;
    if table.q != 0.0 {
        return Err(Error::Domain("survival needs the q = 0 scale table".into()));
    }
    let drift = psi_r_derivative_at_zero(model);
    Ok((drift * table.value_at(x)?).clamp(0.0, 1.0))
}

/// Probability that the surplus started at x ever goes below zero:
/// 1 − survival_probability.
pub fn ruin_probability(model: &RiskModel, x: f64, grid: Grid, tol: f64) -> Result<f64> {
    Ok(1.0 - survival_probability(model, x, grid, tol)?)
}

/// Two-sided exit probability E_x[e^{−q τ_a⁺}; τ_a⁺ < τ_0⁻] = W^{(q)}(x)/W^{(q)}(a)
/// for 0 ≤ x ≤ a.
pub fn two_sided_exit(
    model: &RiskModel,
    q: f64,
    x: f64,
    a: f64,
    grid: Grid,
    tol: f64,
) -> Result<f64> {
    if !(0.0..=a).contains(&x) {
        return Err(Error::Domain(format!("need 0 <= x <= a, got x={x}, a={a}")));
    }
    if a > grid.x_max() {
        return Err(Error::Domain(format!(
            "upper level a={a} beyond the grid range {}",
            grid.x_max()
        )));
    }
    let table = scale_function(model, q, grid, tol)?;
    let denom = table.value_at(a)?;
    if denom < VALUE_FLOOR {
        return Err(Error::Degenerate(format!(
            "W^{{(q)}}(a) = {denom:e} below the numeric floor"
        )));
    }
    Ok(table.value_at(x)? / denom)
}

/// Relative residual of the defining Laplace identity at transform
/// abscissa θ > Φ(q):
///
///   | ∫_0^∞ e^{−θx} W^{(q)}(x) dx − 1/(ψ(θ) − q) | · (ψ(θ) − q)
///
/// with the integral taken by the trapezoid rule on the grid and the
/// truncated domain beyond x_max bounded analytically through W's growth
/// order e^{Φ(q)x} (growth constant estimated from the last decade of the
/// table).
pub fn laplace_identity_residual(
    model: &RiskModel,
    q: f64,
    theta: f64,
    grid: Grid,
    tol: f64,
) -> Result<f64> {
    let phi = phi_q(model, q)?;
    if theta <= phi {
        return Err(Error::Domain(format!(
            "transform diverges: theta = {theta} must exceed Phi(q) = {phi}"
        )));
    }
    let table = scale_function(model, q, grid, tol)?;
    laplace_residual_from_table(model, &table, phi, theta)
}

/// As [`laplace_identity_residual`] but reusing a precomputed table of the
/// same model; `phi` must be Φ(table.q).
pub fn laplace_residual_from_table(
    model: &RiskModel,
    table: &ScaleTable,
    phi: f64,
    theta: f64,
) -> Result<f64> {
    if theta <= phi {
        return Err(Error::Domain(format!(
            "transform diverges: theta = {theta} must exceed Phi(q) = {phi}"
        )));
    }
    let grid = table.grid;
    let integrand: Vec<f64> = (0..grid.len())
        .map(|k| (-theta * grid.x(k)).exp() * table.values[k])
        .collect();
    let quad = *cumulative_trapezoid(&integrand, grid.h()).last().unwrap();
    // Growth constant from the last decade of the table: W(x) <= C e^{phi x}.
    let start = grid.len() - (grid.len() / 10).max(2);
    let growth_const = (start..grid.len())
        .map(|k| table.values[k] * (-phi * grid.x(k)).exp())
        .fold(0.0f64, f64::max);
    let tail = growth_const * (-(theta - phi) * grid.x_max()).exp() / (theta - phi);
    let target = 1.0 / (psi_r(model, theta)? - table.q);
    Ok(((quad + tail) - target).abs() / target)
}

/// Expected drift E[R_1 − x] of the surplus over one time unit, by the Wald
/// identity: c − λ²·E\[ξ\] = c − λ²/δ. Stated for single-exponential claims.
pub fn expected_drift(model: &RiskModel) -> Result<f64> {
    if model.claims().len() != 1 {
        return Err(Error::Domain(
            "expected drift identity stated for single-exponential claims".into(),
        ));
    }
    Ok(model.drift())
}

/// Alternative drift expression c − exp(−λ + λ e^{−λ + λ/δ}), which treats
/// the expected claim sum as an iterated exponential instead of applying the
/// Wald identity. Exposed for comparison with [`expected_drift`]: the two
/// coincide at λ = δ but differ in general.
pub fn expected_drift_iterated_exponential(model: &RiskModel) -> Result<f64> {
    if model.claims().len() != 1 {
        return Err(Error::Domain(
            "expression stated for single-exponential claims".into(),
        ));
    }
    let lambda = model.lambda();
    let delta = model.claims()[0].1;
    Ok(model.c() - (-lambda + lambda * (-lambda + lambda / delta).exp()).exp())
}
