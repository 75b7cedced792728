//! Analytic scale function of the MIPP-driven risk surplus
//!
//!   R_t = c t − Σ_{i=1}^{V_t^{(2)}} ξ_i + σ W_t,
//!
//! where the ξ_i are exponential-mixture claims, via the truncated Bessel-kernel
//! convolution series, plus survival/ruin and two-sided exit probabilities. The
//! defining Laplace identity ∫ e^{−βx} W^{(q)}(x) dx = 1/(ψ(β) − q) is exposed
//! as a residual so every table can certify itself.

mod bessel;
mod exponent;
mod kernel;
mod series;

pub use bessel::bessel_i1;
pub use exponent::{phi_q, psi_r, psi_r_derivative_at_zero};
pub use kernel::{
    conv_exponential, conv_trapezoid, cumulative_trapezoid, kernel_tables, Grid, KernelTable,
};
pub use series::{
    expected_drift, expected_drift_iterated_exponential, laplace_identity_residual,
    laplace_residual_from_table, ruin_probability, scale_function, survival_from_table,
    survival_probability, two_sided_exit, ScaleTable,
};

use crate::{Error, Result};

/// The risk model: premium rate c, Brownian volatility σ, MIPP claim-arrival
/// intensity λ and an exponential-mixture claim law Σ_j α_j δ_j e^{−δ_j x}.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskModel {
    c: f64,
    sigma: f64,
    lambda: f64,
    claims: Vec<(f64, f64)>,
}

impl RiskModel {
    /// Single-exponential claims with rate δ.
    pub fn single(c: f64, sigma: f64, lambda: f64, delta: f64) -> Result<Self> {
        RiskModel::mixture(c, sigma, lambda, vec![(1.0, delta)])
    }

    /// Mixture claims given as (weight α_j, rate δ_j) pairs; weights must be
    /// positive and sum to 1 within 1e−12.
    pub fn mixture(c: f64, sigma: f64, lambda: f64, claims: Vec<(f64, f64)>) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::Domain(format!(
                "premium rate c must be positive, got {c}"
            )));
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Domain(format!(
                "sigma must be nonnegative, got {sigma}"
            )));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if claims.is_empty() {
            return Err(Error::Domain(
                "claim mixture must have at least one component".into(),
            ));
        }
        let mut weight_sum = 0.0;
        for &(alpha, delta) in &claims {
            if !alpha.is_finite() || alpha <= 0.0 {
                return Err(Error::Domain(format!(
                    "mixture weight must be positive, got {alpha}"
                )));
            }
            if !delta.is_finite() || delta <= 0.0 {
                return Err(Error::Domain(format!(
                    "mixture rate must be positive, got {delta}"
                )));
            }
            weight_sum += alpha;
        }
        if (weight_sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "mixture weights must sum to 1 within 1e-12, got {weight_sum}"
            )));
        }
        Ok(RiskModel {
            c,
            sigma,
            lambda,
            claims,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// (weight, rate) pairs of the claim mixture.
    pub fn claims(&self) -> &[(f64, f64)] {
        &self.claims
    }

    /// Mean of one claim, Σ α_j / δ_j.
    pub fn mean_claim(&self) -> f64 {
        self.claims.iter().map(|&(a, d)| a / d).sum()
    }

    /// Drift of the surplus, c − λ²·E\[ξ\]; the net-profit condition requires
    /// this to be strictly positive (single-exponential case: cδ > λ²).
    pub fn drift(&self) -> f64 {
        self.c - self.lambda * self.lambda * self.mean_claim()
    }

    /// Err(NetProfit) when the net-profit condition fails.
    pub fn require_net_profit(&self) -> Result<()> {
        let drift = self.drift();
        if drift <= 0.0 {
            return Err(Error::NetProfit { drift });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_is_one_component_mixture() {
        let m = RiskModel::single(2.0, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(m.claims(), &[(1.0, 1.0)]);
        assert!((m.mean_claim() - 1.0).abs() < 1e-15);
        assert!((m.drift() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixture_validation() {
        assert!(RiskModel::mixture(2.0, 0.5, 1.0, vec![(0.5, 1.0), (0.4, 2.0)]).is_err());
        assert!(RiskModel::mixture(2.0, 0.5, 1.0, vec![(0.5, 1.0), (0.5, -2.0)]).is_err());
        assert!(RiskModel::mixture(2.0, 0.5, 1.0, vec![]).is_err());
        assert!(RiskModel::mixture(-1.0, 0.5, 1.0, vec![(1.0, 1.0)]).is_err());
        assert!(RiskModel::mixture(2.0, -0.5, 1.0, vec![(1.0, 1.0)]).is_err());
        assert!(RiskModel::mixture(2.0, 0.5, 1.0, vec![(0.5, 1.0), (0.5, 2.0)]).is_ok());
    }

    #[test]
    fn net_profit_condition() {
        // c delta > lambda^2 holds: 2*1 > 1.
        assert!(RiskModel::single(2.0, 0.5, 1.0, 1.0)
            .unwrap()
            .require_net_profit()
            .is_ok());
        // 0.5*1 < 1: refused with the drift attached.
        let bad = RiskModel::single(0.5, 0.0, 1.0, 1.0).unwrap();
        match bad.require_net_profit() {
            Err(Error::NetProfit { drift }) => assert!((drift + 0.5).abs() < 1e-15),
            other => panic!("expected NetProfit error, got {other:?}"),
        }
    }
}
