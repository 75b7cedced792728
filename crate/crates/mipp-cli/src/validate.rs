//! The `validate` battery: every invariant of the distribution, simulation
//! and scale-function modules, each reported by name with its measured value
//! and threshold.

use mipp::dist::{
    char_exponent, char_exponent_tilted, first_jump_pmf, joint_mgf_first_jump, levy_measure,
    moment_bell, moments_closed, pmf, q_sequence, raw_moments_closed, sojourn_rate, MippParams,
};
use mipp::scale::{
    kernel_tables, phi_q, psi_r, scale_function, two_sided_exit, Grid, RiskModel, ScaleTable,
};
use mipp::sim::{brownian_first_passage, estimate_ruin, sample_v1, simulate_mipp, StreamSeed};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    fn within(name: &'static str, measured: f64, threshold: f64) -> Self {
        CheckResult {
            name,
            measured,
            threshold,
            pass: measured <= threshold,
        }
    }

    fn strictly_below(name: &'static str, measured: f64, threshold: f64) -> Self {
        CheckResult {
            name,
            measured,
            threshold,
            pass: measured < threshold,
        }
    }
}

/// Numeric controls for the battery; defaults follow the CLI defaults.
#[derive(Debug, Clone, Copy)]
pub struct ValidateSettings {
    pub h: f64,
    pub xmax: f64,
    pub tol: f64,
    pub eps: f64,
    pub paths: u64,
    pub seed: u64,
}

pub fn run_validation(
    model: &RiskModel,
    s: &ValidateSettings,
) -> Result<Vec<CheckResult>, mipp::Error> {
    let mut out = Vec::new();
    dist_checks(&mut out)?;
    sim_checks(&mut out, s)?;
    scale_checks(&mut out, model, s)?;
    cli_checks(&mut out, model, s)?;
    Ok(out)
}

const LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];
const TIMES: [f64; 3] = [0.5, 1.0, 2.0];

fn dist_checks(out: &mut Vec<CheckResult>) -> Result<(), mipp::Error> {
    let eps = 1e-13;

    let mut worst_norm = 0.0f64;
    let mut worst_mean = 0.0f64;
    let mut worst_var = 0.0f64;
    for n in 1..=4u32 {
        for &lambda in &LAMBDAS {
            let params = MippParams::new(lambda, n)?;
            for &t in &TIMES {
                let table = pmf(&params, t, eps)?;
                let total: f64 = table.masses().iter().sum::<f64>() + table.tail_bound();
                worst_norm = worst_norm.max((total - 1.0).abs());
                let mean_exact = lambda.powi(n as i32) * t;
                worst_mean = worst_mean.max((table.mean() - mean_exact).abs() / mean_exact);
                if (lambda - 1.0).abs() > 1e-8 {
                    let var_exact = moments_closed(&params, t)?.variance;
                    worst_var = worst_var.max((table.variance() - var_exact).abs() / var_exact);
                }
            }
        }
    }
    out.push(CheckResult::within("dist/normalization", worst_norm, 1e-12));
    out.push(CheckResult::within("dist/mean-identity", worst_mean, 1e-6));
    out.push(CheckResult::within(
        "dist/variance-identity",
        worst_var,
        1e-6,
    ));

    let mut worst_zero = 0.0f64;
    for n in 1..=4u32 {
        for &lambda in &LAMBDAS {
            let params = MippParams::new(lambda, n)?;
            let table = pmf(&params, 1.0, eps)?;
            let q_n = q_sequence(lambda, n)?.q(n);
            worst_zero = worst_zero.max((table.mass(0) - (1.0 - q_n)).abs());
        }
    }
    out.push(CheckResult::within(
        "dist/zero-state-identity",
        worst_zero,
        1e-10,
    ));

    let at_one = moments_closed(&MippParams::new(1.0, 2)?, 1.0)?;
    let mut worst_branch = 0.0f64;
    for &lambda in &[1.0 - 1e-5, 1.0 + 1e-5] {
        let near = moments_closed(&MippParams::new(lambda, 2)?, 1.0)?;
        for (a, b) in [
            (near.mean, at_one.mean),
            (near.variance, at_one.variance),
            (near.skewness, at_one.skewness),
            (near.kurtosis, at_one.kurtosis),
        ] {
            worst_branch = worst_branch.max((a - b).abs() / b.abs());
        }
    }
    out.push(CheckResult::within(
        "dist/branch-continuity",
        worst_branch,
        1e-3,
    ));

    let mut worst_bell = 0.0f64;
    for &(lambda, n, t) in &[(0.5, 2u32, 1.0), (2.0, 2, 0.5)] {
        let params = MippParams::new(lambda, n)?;
        let raw = raw_moments_closed(&params, t)?;
        for m in 1..=4u32 {
            let bell = moment_bell(&params, t, m, 1e-13)?;
            worst_bell = worst_bell.max((bell - raw[m as usize]).abs() / raw[m as usize]);
        }
    }
    out.push(CheckResult::within(
        "dist/bell-consistency",
        worst_bell,
        1e-8,
    ));

    let mut worst_tilt = 0.0f64;
    for &(lambda, n) in &[(0.5, 2u32), (1.0, 3)] {
        let params = MippParams::new(lambda, n)?;
        for &theta in &[-0.7, -0.3, 0.2] {
            worst_tilt = worst_tilt.max(char_exponent_tilted(&params, theta, 0.0)?.abs());
            let identity = char_exponent(&params, -0.4 + theta)? - char_exponent(&params, theta)?;
            worst_tilt =
                worst_tilt.max((char_exponent_tilted(&params, theta, -0.4)? - identity).abs());
        }
        let plain = levy_measure(&params, 0.0, 32)?;
        let tilted = levy_measure(&params, -0.3, 32)?;
        for (a, b) in tilted.masses.iter().zip(plain.masses.iter()) {
            worst_tilt = worst_tilt.max((a.mass - (-0.3 * a.k as f64).exp() * b.mass).abs());
        }
    }
    out.push(CheckResult::within("dist/tilt-identities", worst_tilt, 0.0));

    let mut worst_exponent = 0.0f64;
    for &(lambda, n) in &[(0.5, 2u32), (1.0, 2), (0.5, 3), (1.0, 3)] {
        let params = MippParams::new(lambda, n)?;
        let table = pmf(&params, 1.0, 1e-12)?;
        for &theta in &[-1.0, -0.5] {
            let lhs: f64 = table
                .masses()
                .iter()
                .enumerate()
                .map(|(k, &p)| p * (theta * k as f64).exp())
                .sum();
            let rhs = char_exponent(&params, theta)?.exp();
            let excess = ((lhs - rhs).abs() - table.tail_bound()).max(0.0);
            worst_exponent = worst_exponent.max(excess);
        }
    }
    out.push(CheckResult::within(
        "dist/exponent-consistency",
        worst_exponent,
        1e-8,
    ));

    let mut worst_marginal = 0.0f64;
    for &(lambda, n) in &[(0.5, 2u32), (1.0, 2), (1.0, 3)] {
        let params = MippParams::new(lambda, n)?;
        let rate = sojourn_rate(&params);
        for &s1 in &[-2.0, -1.0, -0.25, 0.0, 0.4 * rate] {
            let got = joint_mgf_first_jump(&params, s1, 0.0)?;
            let exact = rate / (rate - s1);
            worst_marginal = worst_marginal.max((got - exact).abs() / exact);
        }
    }
    out.push(CheckResult::within(
        "dist/mgf-marginal",
        worst_marginal,
        1e-15,
    ));
    Ok(())
}

fn sim_checks(out: &mut Vec<CheckResult>, s: &ValidateSettings) -> Result<(), mipp::Error> {
    let n_draws = s.paths.max(1000);

    // Determinism across thread counts, for both path and estimator levels.
    let params = MippParams::new(1.0, 3)?;
    let path_a = simulate_mipp(&params, 50.0, &mut StreamSeed::new(s.seed, 17).stream())?;
    let path_b = simulate_mipp(&params, 50.0, &mut StreamSeed::new(s.seed, 17).stream())?;
    let model = RiskModel::single(2.0, 0.5, 1.0, 1.0)?;
    let est = |threads: usize| -> Result<_, mipp::Error> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| estimate_ruin(&model, 1.0, 2_000, 1e-4, s.seed))
    };
    let det_ok = path_a == path_b && est(1)? == est(4)?;
    out.push(CheckResult::within(
        "sim/determinism",
        if det_ok { 0.0 } else { 1.0 },
        0.0,
    ));

    // Distributional match of sampled V(1) against the exact law.
    let mut worst_tv = 0.0f64;
    for &lambda in &[0.5, 1.0] {
        for n in 1..=3u32 {
            let exact = pmf(&MippParams::new(lambda, n)?, 1.0, 1e-12)?;
            let mut stream = StreamSeed::new(s.seed, 100 + n as u64).stream();
            let mut counts = vec![0u64; exact.masses().len() + 1];
            for _ in 0..n_draws {
                let k = sample_v1(lambda, n, &mut stream) as usize;
                let slot = k.min(counts.len() - 1);
                counts[slot] += 1;
            }
            let tv: f64 = counts
                .iter()
                .enumerate()
                .map(|(k, &cnt)| (cnt as f64 / n_draws as f64 - exact.mass(k)).abs())
                .sum::<f64>()
                / 2.0;
            worst_tv = worst_tv.max(tv);
        }
    }
    out.push(CheckResult::within(
        "sim/distributional-match",
        worst_tv,
        0.01,
    ));

    // Sojourn law: mean and variance of inter-jump times at depth 3.
    let params3 = MippParams::new(1.0, 3)?;
    let rate = sojourn_rate(&params3);
    let mut gaps = Vec::with_capacity(n_draws as usize);
    let mut sid = 0u64;
    while (gaps.len() as u64) < n_draws {
        let mut stream = StreamSeed::new(s.seed, 200 + sid).stream();
        let path = simulate_mipp(&params3, 4000.0, &mut stream)?;
        let mut prev = 0.0;
        for &jt in &path.jump_times {
            gaps.push(jt - prev);
            prev = jt;
        }
        sid += 1;
    }
    gaps.truncate(n_draws as usize);
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (n - 1.0);
    let z_mean = (mean - 1.0 / rate).abs() / ((1.0 / rate) / n.sqrt());
    // Var(S^2) for Exp = 8/(rate^4 n).
    let z_var = (var - 1.0 / (rate * rate)).abs() / ((8.0 / n).sqrt() / (rate * rate));
    out.push(CheckResult::within(
        "sim/sojourn-law",
        z_mean.max(z_var),
        4.0,
    ));

    // First-jump size law at depth 2: the first positive depth-1 increment.
    let exact_first = first_jump_pmf(&MippParams::new(1.0, 2)?, 1e-12)?;
    let mut stream = StreamSeed::new(s.seed, 300).stream();
    let mut counts = vec![0u64; exact_first.masses().len() + 1];
    for _ in 0..n_draws {
        let k = loop {
            let k = sample_v1(1.0, 1, &mut stream);
            if k > 0 {
                break k as usize;
            }
        };
        let slot = k.min(counts.len() - 1);
        counts[slot] += 1;
    }
    let tv_first: f64 = counts
        .iter()
        .enumerate()
        .map(|(k, &cnt)| (cnt as f64 / n_draws as f64 - exact_first.mass(k)).abs())
        .sum::<f64>()
        / 2.0;
    out.push(CheckResult::within("sim/first-jump-size", tv_first, 0.01));

    // Brownian-bridge crossing against the closed-form passage probability.
    let (c, sigma, x0, horizon) = (0.3, 1.0, 0.8, 2.0);
    let hits = (0..n_draws)
        .filter(|&i| {
            let mut stream = StreamSeed::new(s.seed, 400 + i).stream();
            brownian_first_passage(c, sigma, x0, horizon, &mut stream).expect("valid inputs")
        })
        .count() as f64;
    let p_hat = hits / n_draws as f64;
    let std_norm = Normal::new(0.0, 1.0).expect("unit normal");
    let srt = sigma * horizon.sqrt();
    let exact = std_norm.cdf((-x0 - c * horizon) / srt)
        + (-2.0 * c * x0 / (sigma * sigma)).exp() * std_norm.cdf((-x0 + c * horizon) / srt);
    let se = (exact * (1.0 - exact) / n_draws as f64).sqrt();
    out.push(CheckResult::within(
        "sim/bridge-correctness",
        (p_hat - exact).abs(),
        3.0 * se,
    ));
    Ok(())
}

fn scale_checks(
    out: &mut Vec<CheckResult>,
    model: &RiskModel,
    s: &ValidateSettings,
) -> Result<(), mipp::Error> {
    let grid = Grid::covering(s.h, s.xmax)?;

    let mut worst_mono = 0.0f64;
    let mut worst_laplace = 0.0f64;
    for &q in &[0.0, 0.1] {
        let table = scale_function(model, q, grid, s.tol)?;
        for w in table.values.windows(2) {
            worst_mono = worst_mono.max(w[0] - w[1]);
        }
        let phi = phi_q(model, q)?;
        for &off in &[1.0, 2.0, 4.0] {
            let r = mipp::scale::laplace_residual_from_table(model, &table, phi, phi + off)?;
            worst_laplace = worst_laplace.max(r);
        }
    }
    out.push(CheckResult::within("scale/monotonicity", worst_mono, 1e-10));
    out.push(CheckResult::within(
        "scale/laplace-identity",
        worst_laplace,
        5e-3,
    ));

    // Boundary values of the leading term.
    let small = Grid::covering(1e-2, 2.0)?;
    let with_noise = scale_function(model, 0.0, small, s.tol)?;
    let driftless = RiskModel::mixture(model.c(), 0.0, model.lambda(), model.claims().to_vec())?;
    let without_noise = scale_function(&driftless, 0.0, small, s.tol)?;
    let boundary_err = if model.sigma() > 0.0 {
        with_noise.values[0]
            .abs()
            .max((without_noise.values[0] - 1.0 / model.c()).abs())
    } else {
        (with_noise.values[0] - 1.0 / model.c()).abs()
    };
    out.push(CheckResult::within("scale/boundary", boundary_err, 1e-15));

    // sigma -> 0: sup distance on [0.2, 3] strictly decreasing.
    let window = Grid::covering(1e-3, 3.0)?;
    let limit = scale_function(&driftless, 0.0, window, s.tol)?;
    let from = window.index_of(0.2)?;
    let sup_dist = |table: &ScaleTable| -> f64 {
        (from..window.len())
            .map(|k| (table.values[k] - limit.values[k]).abs())
            .fold(0.0f64, f64::max)
    };
    let mut ratios = 0.0f64;
    let mut prev = f64::NAN;
    for &sigma in &[0.2, 0.1, 0.05] {
        let m = RiskModel::mixture(model.c(), sigma, model.lambda(), model.claims().to_vec())?;
        let d = sup_dist(&scale_function(&m, 0.0, window, s.tol)?);
        if prev.is_finite() {
            ratios = ratios.max(d / prev);
        }
        prev = d;
    }
    out.push(CheckResult::strictly_below(
        "scale/sigma-zero-consistency",
        ratios,
        1.0,
    ));

    // Exit-probability monotonicity in x, a and q.
    let exit_grid = Grid::covering(5e-3, 5.0)?;
    let mut worst_exit = 0.0f64;
    let exits_q0: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&x| two_sided_exit(model, 0.0, x, 3.0, exit_grid, s.tol))
        .collect::<Result<_, _>>()?;
    for w in exits_q0.windows(2) {
        worst_exit = worst_exit.max(w[0] - w[1]);
    }
    let wider = two_sided_exit(model, 0.0, 1.0, 4.0, exit_grid, s.tol)?;
    worst_exit = worst_exit.max(wider - exits_q0[1]);
    let discounted = two_sided_exit(model, 0.5, 1.0, 3.0, exit_grid, s.tol)?;
    worst_exit = worst_exit.max(discounted - exits_q0[1]);
    out.push(CheckResult::within(
        "scale/exit-monotonicity",
        worst_exit,
        1e-12,
    ));

    // Root certification psi(Phi(q)) = q.
    let mut worst_root = 0.0f64;
    for &q in &[0.0, 0.1, 1.0] {
        let phi = phi_q(model, q)?;
        worst_root = worst_root.max((psi_r(model, phi)? - q).abs());
    }
    out.push(CheckResult::within(
        "scale/root-certification",
        worst_root,
        1e-10,
    ));

    // A one-component mixture reproduces the single-exponential table.
    let degenerate_grid = Grid::covering(1e-2, 5.0)?;
    let delta0 = model.claims()[0].1;
    let single = RiskModel::single(model.c(), model.sigma(), model.lambda(), delta0)?;
    let as_mixture = RiskModel::mixture(
        model.c(),
        model.sigma(),
        model.lambda(),
        vec![(1.0, delta0)],
    )?;
    let table_single = scale_function(&single, 0.0, degenerate_grid, s.tol)?;
    let table_mix = scale_function(&as_mixture, 0.0, degenerate_grid, s.tol)?;
    let worst_degenerate = table_single
        .values
        .iter()
        .zip(&table_mix.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    out.push(CheckResult::within(
        "scale/mixture-degeneracy",
        worst_degenerate,
        1e-12,
    ));

    // Kernel sanity rolled into the battery: G(0) equals the component limit.
    let ker = kernel_tables(model, 0.0, degenerate_grid)?;
    let expected_g0: f64 = if model.claims().len() == 1 {
        model.lambda() * model.claims()[0].0 * model.claims()[0].1
    } else {
        model
            .claims()
            .iter()
            .map(|&(a, d)| model.lambda() * a * d)
            .sum()
    };
    out.push(CheckResult::within(
        "scale/kernel-origin",
        (ker.g_values[0] - expected_g0).abs(),
        1e-12,
    ));
    Ok(())
}

fn cli_checks(
    out: &mut Vec<CheckResult>,
    model: &RiskModel,
    s: &ValidateSettings,
) -> Result<(), mipp::Error> {
    // Byte-identical artifacts when rendered twice from the same inputs.
    let grid = Grid::covering(5e-3, 5.0)?;
    let render = || -> Result<String, mipp::Error> {
        let table = scale_function(model, 0.0, grid, s.tol)?;
        Ok(crate::run::render_scale_csv(&table))
    };
    let first = render()?;
    let second = render()?;
    out.push(CheckResult::within(
        "cli/artifact-determinism",
        if first == second { 0.0 } else { 1.0 },
        0.0,
    ));

    // Header row, newline discipline and 17-digit floats.
    let mut format_ok = first.ends_with('\n') && !first.contains('\r');
    let mut lines = first.lines();
    format_ok &= lines.next() == Some("x,W");
    for line in lines.take(50) {
        for field in line.split(',') {
            let digits = field
                .split('e')
                .next()
                .unwrap_or("")
                .chars()
                .filter(|c| c.is_ascii_digit())
                .count();
            format_ok &= digits == 17 && field.parse::<f64>().is_ok();
        }
    }
    out.push(CheckResult::within(
        "cli/csv-format",
        if format_ok { 0.0 } else { 1.0 },
        0.0,
    ));
    Ok(())
}
