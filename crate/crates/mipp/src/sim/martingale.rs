use rayon::prelude::*;

use super::mipp_path::simulate_mipp;
use super::stream::StreamSeed;
use crate::dist::{char_exponent, MippParams};
use crate::{Error, Result};

/// Which martingale to average at time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MartingaleKind {
    /// V_t − λⁿ t; expectation 0.
    Linear,
    /// (V_t − λⁿ t)² − Var(V_1)·t with Var(V_1) = λⁿ(1−λⁿ)/(1−λ), or n·t at
    /// λ = 1; expectation 0.
    Quadratic,
    /// e^{αt + βV_t} + (−α + λ − λ E e^{βV_1^{(n−1)}}) ∫_0^t e^{αs + βV_s} ds,
    /// a unit-mean martingale for every real (α, β). The integral is evaluated
    /// in closed form on each constant segment of the path, so there is no
    /// quadrature error.
    Exponential { alpha: f64, beta: f64 },
}

/// Empirical mean and standard error of the chosen martingale at time `t`
/// over `n_paths` independent paths (stream ids 0..n_paths under
/// `master_seed`). The per-path values are reduced in index order, so the
/// result is independent of thread count.
pub fn martingale_check(
    kind: MartingaleKind,
    params: &MippParams,
    t: f64,
    n_paths: u64,
    master_seed: u64,
) -> Result<(f64, f64)> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if n_paths == 0 {
        return Err(Error::Domain("n_paths must be >= 1".into()));
    }
    let lambda = params.lambda();
    let n = params.n();
    let mean_rate = lambda.powi(n as i32);
    let var_rate = if (lambda - 1.0).abs() < 1e-8 {
        n as f64
    } else {
        mean_rate * crate::special::one_minus_pow(lambda, n as f64)
            / crate::special::one_minus_pow(lambda, 1.0)
    };
    // The drift coefficient of the exponential kind: -alpha + lambda - lambda
    // E e^{beta V_1^{(n-1)}} = -alpha - l_n(beta).
    let exp_coeff = match kind {
        MartingaleKind::Exponential { alpha, beta } => {
            Some((alpha, beta, -alpha - char_exponent(params, beta)?))
        }
        _ => None,
    };

    let values: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut stream = StreamSeed::new(master_seed, i).stream();
            let path = simulate_mipp(params, t, &mut stream)
                .expect("t validated above, simulation cannot fail");
            match kind {
                MartingaleKind::Linear => path.terminal_value() as f64 - mean_rate * t,
                MartingaleKind::Quadratic => {
                    let m = path.terminal_value() as f64 - mean_rate * t;
                    m * m - var_rate * t
                }
                MartingaleKind::Exponential { .. } => {
                    let (alpha, beta, coeff) = exp_coeff.unwrap();
                    exponential_value(&path, t, alpha, beta, coeff)
                }
            }
        })
        .collect();

    let mean = values.iter().sum::<f64>() / n_paths as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (n_paths as f64 - 1.0).max(1.0);
    Ok((mean, (var / n_paths as f64).sqrt()))
}

/// e^{αt + βV_t} + coeff · Σ_segments e^{βv} (e^{α t_hi} − e^{α t_lo}) / α,
/// with the α = 0 segment integral degenerating to e^{βv} (t_hi − t_lo).
fn exponential_value(path: &crate::sim::Path, t: f64, alpha: f64, beta: f64, coeff: f64) -> f64 {
    let mut integral = 0.0;
    let mut seg_start = 0.0;
    let mut value = 0u64;
    let segment = |v: u64, lo: f64, hi: f64| {
        if alpha == 0.0 {
            (beta * v as f64).exp() * (hi - lo)
        } else {
            (beta * v as f64).exp() * ((alpha * hi).exp() - (alpha * lo).exp()) / alpha
        }
    };
    for (&jt, &js) in path.jump_times.iter().zip(&path.jump_sizes) {
        integral += segment(value, seg_start, jt);
        seg_start = jt;
        value += js;
    }
    integral += segment(value, seg_start, t);
    (alpha * t + beta * value as f64).exp() + coeff * integral
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(lambda: f64, n: u32) -> MippParams {
        MippParams::new(lambda, n).unwrap()
    }

    #[test]
    fn linear_martingale_centred() {
        let (mean, se) =
            martingale_check(MartingaleKind::Linear, &p(1.0, 2), 1.0, 50_000, 42).unwrap();
        assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn quadratic_martingale_centred_lambda_one() {
        let (mean, se) =
            martingale_check(MartingaleKind::Quadratic, &p(1.0, 2), 1.0, 50_000, 43).unwrap();
        assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn quadratic_martingale_centred_lambda_half() {
        let (mean, se) =
            martingale_check(MartingaleKind::Quadratic, &p(0.5, 3), 2.0, 50_000, 44).unwrap();
        assert!(mean.abs() < 4.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn exponential_martingale_unit_mean() {
        // alpha chosen so alpha + lambda - lambda E e^{beta V_1^{(n-1)}} = 0,
        // i.e. alpha = l_n(beta); Eq-(66) value must average to 1.
        let params = p(1.0, 2);
        let beta = -0.5;
        let alpha = char_exponent(&params, beta).unwrap();
        let kind = MartingaleKind::Exponential { alpha, beta };
        let (mean, se) = martingale_check(kind, &params, 1.0, 50_000, 45).unwrap();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn exponential_martingale_unit_mean_generic_alpha_beta() {
        // Unit mean holds for every (alpha, beta), not only the tuned pair.
        let params = p(1.0, 2);
        let kind = MartingaleKind::Exponential {
            alpha: 0.2,
            beta: -0.3,
        };
        let (mean, se) = martingale_check(kind, &params, 1.0, 50_000, 46).unwrap();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn reduction_is_thread_count_independent() {
        let params = p(1.0, 2);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                martingale_check(MartingaleKind::Linear, &params, 1.0, 5_000, 7).unwrap()
            })
        };
        assert_eq!(run(1), run(4));
    }
}
