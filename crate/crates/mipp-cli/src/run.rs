use crate::config::{Command, ConfigError, RunConfig};
use crate::csvfmt::{format_float, write_artifact};
use crate::validate::{run_validation, ValidateSettings};

use mipp::dist::{first_jump_pmf, moment_bell, moments_closed, pmf, sojourn_rate, MippParams};
use mipp::scale::{
    laplace_residual_from_table, phi_q, scale_function, survival_from_table, Grid, RiskModel,
    ScaleTable,
};
use mipp::sim::{estimate_ruin, simulate_risk_traced, StreamSeed};

/// Failure modes of a run, carrying the exit code contract:
/// configuration errors exit 2, computation errors exit 3, a validation run
/// with failing checks exits 1.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Computation(String),
    ChecksFailed(usize),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<mipp::Error> for RunError {
    fn from(e: mipp::Error) -> Self {
        RunError::Computation(e.to_string())
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Computation(_) => 3,
            RunError::ChecksFailed(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Computation(msg) => write!(f, "computation error: {msg}"),
            RunError::ChecksFailed(n) => {
                write!(f, "validation failed: {n} check(s) out of tolerance")
            }
        }
    }
}

fn risk_model(cfg: &RunConfig) -> Result<RiskModel, RunError> {
    RiskModel::mixture(
        cfg.c.expect("checked by resolve"),
        cfg.sigma.expect("checked by resolve"),
        cfg.lambda.expect("checked by resolve"),
        cfg.claims.clone().expect("checked by resolve"),
    )
    .map_err(RunError::from)
}

fn mipp_params(cfg: &RunConfig) -> Result<MippParams, RunError> {
    MippParams::new(
        cfg.lambda.expect("checked by resolve"),
        cfg.n.expect("checked by resolve"),
    )
    .map_err(RunError::from)
}

/// Execute the command and write its artifacts; returns the artifact paths.
pub fn run(cfg: &RunConfig) -> Result<Vec<String>, RunError> {
    let mut written = Vec::new();
    match cfg.command {
        Command::Pmf => {
            let table = pmf(&mipp_params(cfg)?, cfg.t.unwrap(), cfg.eps)?;
            let mut body = String::from("k,probability\n");
            for (k, &p) in table.masses().iter().enumerate() {
                body.push_str(&format!("{k},{}\n", format_float(p)));
            }
            emit(&cfg.out, &body, &mut written)?;
        }
        Command::Moments => {
            let params = mipp_params(cfg)?;
            let t = cfg.t.unwrap();
            let closed = moments_closed(&params, t)?;
            let raw: Vec<f64> = (0..=4u32)
                .map(|m| moment_bell(&params, t, m, cfg.eps))
                .collect::<Result<_, _>>()?;
            let var = raw[2] - raw[1] * raw[1];
            let mu3 = raw[3] - 3.0 * raw[1] * raw[2] + 2.0 * raw[1].powi(3);
            let mu4 = raw[4] - 4.0 * raw[1] * raw[3] + 6.0 * raw[1] * raw[1] * raw[2]
                - 3.0 * raw[1].powi(4);
            let rows = [
                ("mean", closed.mean, raw[1]),
                ("variance", closed.variance, var),
                ("skewness", closed.skewness, mu3 / var.powf(1.5)),
                ("kurtosis", closed.kurtosis, mu4 / (var * var)),
            ];
            let mut body = String::from("moment,closed_form,bell_check\n");
            for (name, c, b) in rows {
                body.push_str(&format!("{name},{},{}\n", format_float(c), format_float(b)));
            }
            emit(&cfg.out, &body, &mut written)?;
        }
        Command::Jumps => {
            let params = mipp_params(cfg)?;
            let table = first_jump_pmf(&params, cfg.eps)?;
            let mut body = format!("# sojourn_rate = {}\n", format_float(sojourn_rate(&params)));
            body.push_str("k,first_jump_probability\n");
            for (k, &p) in table.masses().iter().enumerate() {
                body.push_str(&format!("{k},{}\n", format_float(p)));
            }
            emit(&cfg.out, &body, &mut written)?;
        }
        Command::Simulate => {
            let model = risk_model(cfg)?;
            let x = cfg.x.as_ref().unwrap()[0];
            let mut stream = StreamSeed::new(cfg.seed, 0).stream();
            let (_, rows) = simulate_risk_traced(&model, x, cfg.a, cfg.t.unwrap(), &mut stream)?;
            let mut body = String::from("t,event,surplus\n");
            for row in rows {
                body.push_str(&format!(
                    "{},{},{}\n",
                    format_float(row.t),
                    row.event.label(),
                    format_float(row.surplus)
                ));
            }
            emit(&cfg.out, &body, &mut written)?;
        }
        Command::Scale => {
            let model = risk_model(cfg)?;
            let grid = Grid::covering(cfg.h, cfg.xmax)?;
            let table = scale_function(&model, cfg.q, grid, cfg.tol)?;
            emit(&cfg.out, &render_scale_csv(&table), &mut written)?;
            if let Some(thetas) = &cfg.theta {
                let phi = phi_q(&model, cfg.q)?;
                let mut body = String::from("theta,residual\n");
                for &theta in thetas {
                    let r = laplace_residual_from_table(&model, &table, phi, theta)?;
                    body.push_str(&format!("{},{}\n", format_float(theta), format_float(r)));
                }
                let stem = cfg.out.strip_suffix(".csv").unwrap_or(&cfg.out);
                emit(&format!("{stem}_laplace.csv"), &body, &mut written)?;
            }
        }
        Command::Ruin => {
            let model = risk_model(cfg)?;
            model.require_net_profit()?;
            let xs = cfg.x.as_ref().unwrap();
            check_on_grid(xs, cfg.xmax)?;
            let grid = Grid::covering(cfg.h, cfg.xmax)?;
            let table = scale_function(&model, 0.0, grid, cfg.tol)?;
            let mut body = if cfg.mc {
                String::from("x,analytic_survival,analytic_ruin,mc_ruin,mc_stderr\n")
            } else {
                String::from("x,analytic_survival,analytic_ruin\n")
            };
            for (i, &x) in xs.iter().enumerate() {
                let survival = survival_from_table(&model, &table, x)?;
                if cfg.mc {
                    let est = estimate_ruin(
                        &model,
                        x,
                        cfg.paths,
                        cfg.barrier_eps,
                        cfg.seed.wrapping_add(i as u64),
                    )?;
                    body.push_str(&format!(
                        "{},{},{},{},{}\n",
                        format_float(x),
                        format_float(survival),
                        format_float(1.0 - survival),
                        format_float(est.p_hat),
                        format_float(est.stderr)
                    ));
                } else {
                    body.push_str(&format!(
                        "{},{},{}\n",
                        format_float(x),
                        format_float(survival),
                        format_float(1.0 - survival)
                    ));
                }
            }
            emit(&cfg.out, &body, &mut written)?;
        }
        Command::Exit => {
            let model = risk_model(cfg)?;
            let a = cfg.a.unwrap();
            if a > cfg.xmax {
                return Err(RunError::Config(ConfigError(format!(
                    "key `a`: barrier {a} lies beyond xmax = {}",
                    cfg.xmax
                ))));
            }
            let grid = Grid::covering(cfg.h, cfg.xmax)?;
            let table = scale_function(&model, cfg.q, grid, cfg.tol)?;
            let denom = table.value_at(a)?;
            if denom < 1e-300 {
                return Err(RunError::Computation(format!(
                    "W(a) = {denom:e} below the numeric floor at a = {a}"
                )));
            }
            let mut body = String::from("x,a,q,probability\n");
            for &x in cfg.x.as_ref().unwrap() {
                if x > a {
                    return Err(RunError::Config(ConfigError(format!(
                        "key `x`: entry {x} exceeds the barrier a = {a}"
                    ))));
                }
                let p = table.value_at(x)? / denom;
                body.push_str(&format!(
                    "{},{},{},{}\n",
                    format_float(x),
                    format_float(a),
                    format_float(cfg.q),
                    format_float(p)
                ));
            }
            emit(&cfg.out, &body, &mut written)?;
        }
        Command::Validate => {
            let model = risk_model(cfg)?;
            let settings = ValidateSettings {
                h: cfg.h,
                xmax: cfg.xmax,
                tol: cfg.tol,
                eps: cfg.eps,
                paths: cfg.paths,
                seed: cfg.seed,
            };
            let results = run_validation(&model, &settings)?;
            let mut body = String::from("check,measured,threshold,pass\n");
            for r in &results {
                body.push_str(&format!(
                    "{},{},{},{}\n",
                    r.name,
                    format_float(r.measured),
                    format_float(r.threshold),
                    r.pass
                ));
                eprintln!(
                    "{:32} {} (measured {:.3e}, threshold {:.3e})",
                    r.name,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.measured,
                    r.threshold
                );
            }
            emit(&cfg.out, &body, &mut written)?;
            let failures = results.iter().filter(|r| !r.pass).count();
            if failures > 0 {
                return Err(RunError::ChecksFailed(failures));
            }
        }
    }
    Ok(written)
}

fn check_on_grid(xs: &[f64], xmax: f64) -> Result<(), RunError> {
    for &x in xs {
        if x > xmax {
            return Err(RunError::Config(ConfigError(format!(
                "key `x`: entry {x} lies beyond xmax = {xmax}"
            ))));
        }
    }
    Ok(())
}

fn emit(path: &str, content: &str, written: &mut Vec<String>) -> Result<(), RunError> {
    write_artifact(path, content)
        .map_err(|e| RunError::Computation(format!("writing `{path}`: {e}")))?;
    if path != "-" {
        written.push(path.to_string());
    }
    Ok(())
}

/// The `scale` artifact body: plot-ready x,W rows at 17 significant digits.
pub fn render_scale_csv(table: &ScaleTable) -> String {
    let mut body = String::from("x,W\n");
    for k in 0..table.grid.len() {
        body.push_str(&format!(
            "{},{}\n",
            format_float(table.grid.x(k)),
            format_float(table.values[k])
        ));
    }
    body
}
