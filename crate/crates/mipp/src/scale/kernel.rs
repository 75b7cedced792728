use super::bessel::bessel_i1;
use super::RiskModel;
use crate::{Error, Result};

/// Uniform evaluation grid x_k = k·h, k = 0..m−1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    h: f64,
    m: usize,
}

impl Grid {
    pub fn new(h: f64, m: usize) -> Result<Self> {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::Domain(format!(
                "grid step must be positive, got {h}"
            )));
        }
        if m < 2 {
            return Err(Error::Domain(format!(
                "grid needs at least 2 points, got {m}"
            )));
        }
        Ok(Grid { h, m })
    }

    /// Grid covering [0, x_max] with step h (x_max rounded up to a node).
    pub fn covering(h: f64, x_max: f64) -> Result<Self> {
        if !x_max.is_finite() || x_max <= 0.0 {
            return Err(Error::Domain(format!(
                "x_max must be positive, got {x_max}"
            )));
        }
        Grid::new(h, (x_max / h).ceil() as usize + 1)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    pub fn x_max(&self) -> f64 {
        (self.m - 1) as f64 * self.h
    }

    /// Index of the node nearest to x (x must lie on or inside the grid).
    pub fn index_of(&self, x: f64) -> Result<usize> {
        if x < 0.0 || x > self.x_max() + 0.5 * self.h {
            return Err(Error::Domain(format!(
                "x = {x} outside the grid [0, {}]",
                self.x_max()
            )));
        }
        Ok(((x / self.h).round() as usize).min(self.m - 1))
    }
}

/// Trapezoid-rule convolution (f∗g)(x_k) = ∫_0^{x_k} f(u) g(x_k−u) du on the
/// shared uniform grid; exact zero at k = 0.
pub fn conv_trapezoid(f: &[f64], g: &[f64], h: f64) -> Vec<f64> {
    let m = f.len().min(g.len());
    let mut out = vec![0.0; m];
    for k in 1..m {
        let mut acc = 0.5 * (f[0] * g[k] + f[k] * g[0]);
        for i in 1..k {
            acc += f[i] * g[k - i];
        }
        out[k] = acc * h;
    }
    out
}

/// Running integral ∫_0^{x_k} f by the trapezoid rule (the convolution with
/// the unit step π).
pub fn cumulative_trapezoid(f: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    let mut acc = 0.0;
    for k in 1..f.len() {
        acc += 0.5 * h * (f[k - 1] + f[k]);
        out[k] = acc;
    }
    out
}

/// Convolution with the exponential density r e^{−rx}, i.e. g = f ∗ Exp(r),
/// evaluated exactly for piecewise-linear f through the integrating-factor
/// step of g' = r(f − g), g(0) = 0. Unconditionally stable in r·h, which
/// keeps small-σ Erlang smoothing accurate on a fixed grid.
pub fn conv_exponential(f: &[f64], r: f64, h: f64) -> Vec<f64> {
    let rh = r * h;
    let decay = (-rh).exp();
    // phi0 = ∫_0^h r e^{-r(h-s)} ds, phi1 = ∫_0^h r e^{-r(h-s)} s/h ds.
    let phi0 = -f64::exp_m1(-rh);
    let phi1 = 1.0 - phi0 / rh;
    let mut out = vec![0.0; f.len()];
    for k in 1..f.len() {
        out[k] = out[k - 1] * decay + f[k - 1] * (phi0 - phi1) + f[k] * phi1;
    }
    out
}

/// Grid tables of the compound-claim kernel G and of the signed series kernel
/// Ϝ(z) = ((λ(1−e^{−λ})+q)/c)·π(z) − (λe^{−λ}/c)·(π∗G)(z).
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub grid: Grid,
    /// G(x_k); for a single exponential claim with rate δ this is
    /// e^{−δx}√(δλ)·I₁(2√(δλx))/√x, finite at 0 with G(0) = δλ.
    pub g_values: Vec<f64>,
    /// Ϝ(x_k); signed, not a probability density.
    pub digamma_values: Vec<f64>,
}

/// One mixture component's kernel: a = λ α δ gives
/// G_i(x) = e^{−δx} √a I₁(2√(ax)) / √x, with the x → 0 limit a.
fn component_kernel(grid: &Grid, lambda: f64, alpha: f64, delta: f64) -> Vec<f64> {
    let a = lambda * alpha * delta;
    (0..grid.len())
        .map(|k| {
            let x = grid.x(k);
            if x == 0.0 {
                a
            } else {
                (-delta * x).exp() * a.sqrt() * bessel_i1(2.0 * (a * x).sqrt()) / x.sqrt()
            }
        })
        .collect()
}

/// Tabulate G and Ϝ on the grid for discount rate q.
///
/// The mixture kernel is the inclusion expansion Σ G_i + Σ G_i∗G_j + …,
/// accumulated iteratively as P ← P + G_i + P∗G_i (N convolutions instead of
/// 2^N − 1 explicit terms); π∗G is the running integral of G.
pub fn kernel_tables(model: &RiskModel, q: f64, grid: Grid) -> Result<KernelTable> {
    if q.is_nan() || q < 0.0 {
        return Err(Error::Domain(format!("q must be nonnegative, got {q}")));
    }
    let lambda = model.lambda();
    let mut g_values: Vec<f64> = vec![0.0; grid.len()];
    for &(alpha, delta) in model.claims() {
        let gi = component_kernel(&grid, lambda, alpha, delta);
        let cross = conv_trapezoid(&g_values, &gi, grid.h());
        for k in 0..grid.len() {
            g_values[k] += gi[k] + cross[k];
        }
    }
    let pi_g = cumulative_trapezoid(&g_values, grid.h());
    let head = (lambda * (-f64::exp_m1(-lambda)) + q) / model.c();
    let tail_coeff = lambda * (-lambda).exp() / model.c();
    let digamma_values = pi_g.iter().map(|&v| head - tail_coeff * v).collect();
    Ok(KernelTable {
        grid,
        g_values,
        digamma_values,
    })
}
