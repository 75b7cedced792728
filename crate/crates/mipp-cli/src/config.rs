use std::collections::BTreeMap;
use std::fmt;

/// Configuration keys, in canonical (sorted) order. Flags mirror these
/// one-to-one (`--lambda`, `--n`, ...); unknown keys are rejected.
pub const KEYS: &[&str] = &[
    "a",
    "barrier_eps",
    "c",
    "delta",
    "eps",
    "h",
    "lambda",
    "mc",
    "mixture",
    "n",
    "out",
    "paths",
    "q",
    "seed",
    "sigma",
    "t",
    "theta",
    "tol",
    "x",
    "xmax",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Pmf,
    Moments,
    Jumps,
    Simulate,
    Scale,
    Ruin,
    Exit,
    Validate,
}

impl Command {
    pub fn parse(word: &str) -> Option<Command> {
        Some(match word {
            "pmf" => Command::Pmf,
            "moments" => Command::Moments,
            "jumps" => Command::Jumps,
            "simulate" => Command::Simulate,
            "scale" => Command::Scale,
            "ruin" => Command::Ruin,
            "exit" => Command::Exit,
            "validate" => Command::Validate,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Pmf => "pmf",
            Command::Moments => "moments",
            Command::Jumps => "jumps",
            Command::Simulate => "simulate",
            Command::Scale => "scale",
            Command::Ruin => "ruin",
            Command::Exit => "exit",
            Command::Validate => "validate",
        }
    }
}

/// A configuration problem; maps to exit code 2. The message always names
/// the offending key or token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type KeyMap = BTreeMap<String, String>;

/// Parse `key=value` config text: one pair per line, blank lines and lines
/// starting with `#` ignored. Unknown and duplicate keys are errors.
pub fn parse_config_text(text: &str) -> Result<KeyMap, ConfigError> {
    let mut map = KeyMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError(format!(
                "line {}: expected key=value, got `{line}`",
                idx + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError(format!(
                "unknown key `{key}` on line {}",
                idx + 1
            )));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError(format!(
                "duplicate key `{key}` on line {}",
                idx + 1
            )));
        }
    }
    Ok(map)
}

/// Parsed command line: the command word, flag overrides, an optional config
/// file path and the print-config switch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliArgs {
    pub command: Command,
    pub flags: KeyMap,
    pub config_path: Option<String>,
    pub print_config: bool,
}

/// Parse argv (without the program name): `<command> [--key value | --key=value]...`
/// plus `--config <path>` and `--print-config`. Flags take precedence over
/// file values; boolean flags (`--mc`, `--print-config`) take no value.
pub fn parse_cli_args(argv: &[String]) -> Result<CliArgs, ConfigError> {
    let mut it = argv.iter().peekable();
    let command_word = it.next().ok_or_else(|| {
        ConfigError(
            "missing command (pmf, moments, jumps, simulate, scale, ruin, exit, validate)".into(),
        )
    })?;
    let command = Command::parse(command_word)
        .ok_or_else(|| ConfigError(format!("unknown command `{command_word}`")))?;

    let mut flags = KeyMap::new();
    let mut config_path = None;
    let mut print_config = false;
    while let Some(arg) = it.next() {
        let body = arg
            .strip_prefix("--")
            .ok_or_else(|| ConfigError(format!("expected a --flag, got `{arg}`")))?;
        let (key, inline_value) = match body.split_once('=') {
            Some((k, v)) => (k, Some(v.to_string())),
            None => (body, None),
        };
        match key {
            "print-config" => {
                if inline_value.is_some() {
                    return Err(ConfigError("`print-config` takes no value".into()));
                }
                print_config = true;
                continue;
            }
            "config" => {
                let value = take_value(key, inline_value, &mut it)?;
                if config_path.replace(value).is_some() {
                    return Err(ConfigError("duplicate flag `config`".into()));
                }
                continue;
            }
            "mc" => {
                if inline_value.is_some() {
                    return Err(ConfigError("`mc` is a switch and takes no value".into()));
                }
                if flags.insert("mc".into(), "true".into()).is_some() {
                    return Err(ConfigError("duplicate flag `mc`".into()));
                }
                continue;
            }
            _ => {}
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError(format!("unknown flag `{key}`")));
        }
        let value = take_value(key, inline_value, &mut it)?;
        if flags.insert(key.to_string(), value).is_some() {
            return Err(ConfigError(format!("duplicate flag `{key}`")));
        }
    }
    Ok(CliArgs {
        command,
        flags,
        config_path,
        print_config,
    })
}

fn take_value(
    key: &str,
    inline: Option<String>,
    it: &mut std::iter::Peekable<std::slice::Iter<'_, String>>,
) -> Result<String, ConfigError> {
    if let Some(v) = inline {
        return Ok(v);
    }
    match it.next() {
        Some(v) => Ok(v.clone()),
        None => Err(ConfigError(format!("flag `{key}` is missing its value"))),
    }
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub lambda: Option<f64>,
    pub n: Option<u32>,
    pub t: Option<f64>,
    pub c: Option<f64>,
    pub sigma: Option<f64>,
    /// Claim mixture as (weight, rate) pairs; a bare `delta` key is the
    /// single-component shorthand.
    pub claims: Option<Vec<(f64, f64)>>,
    pub q: f64,
    pub h: f64,
    pub xmax: f64,
    pub tol: f64,
    pub eps: f64,
    pub barrier_eps: f64,
    pub paths: u64,
    pub seed: u64,
    pub x: Option<Vec<f64>>,
    pub a: Option<f64>,
    pub theta: Option<Vec<f64>>,
    pub out: String,
    pub mc: bool,
}

/// Merge file values and flag overrides (flags win), validate every value,
/// and apply defaults.
pub fn resolve(command: Command, file: &KeyMap, flags: &KeyMap) -> Result<RunConfig, ConfigError> {
    let mut merged = file.clone();
    for (k, v) in flags {
        merged.insert(k.clone(), v.clone());
    }
    let get = |key: &str| merged.get(key).map(|s| s.as_str());

    let lambda = parse_opt_f64(get("lambda"), "lambda", |v| v > 0.0, "must be > 0")?;
    let n = match get("n") {
        None => None,
        Some(raw) => {
            let v: u32 = raw
                .parse()
                .map_err(|_| ConfigError(format!("key `n`: malformed integer `{raw}`")))?;
            if v < 1 {
                return Err(ConfigError("key `n`: must be >= 1".into()));
            }
            Some(v)
        }
    };
    let t = parse_opt_f64(get("t"), "t", |v| v > 0.0, "must be > 0")?;
    let c = parse_opt_f64(get("c"), "c", |v| v > 0.0, "must be > 0")?;
    let sigma = parse_opt_f64(get("sigma"), "sigma", |v| v >= 0.0, "must be >= 0")?;
    let delta = parse_opt_f64(get("delta"), "delta", |v| v > 0.0, "must be > 0")?;
    let mixture = match get("mixture") {
        None => None,
        Some(raw) => Some(parse_mixture(raw)?),
    };
    if delta.is_some() && mixture.is_some() {
        return Err(ConfigError(
            "keys `delta` and `mixture` are mutually exclusive".into(),
        ));
    }
    let claims = match (delta, mixture) {
        (Some(d), None) => Some(vec![(1.0, d)]),
        (None, Some(m)) => Some(m),
        (None, None) => None,
        _ => unreachable!(),
    };

    let q = parse_opt_f64(get("q"), "q", |v| v >= 0.0, "must be >= 0")?.unwrap_or(0.0);
    let h = parse_opt_f64(get("h"), "h", |v| v > 0.0, "must be > 0")?.unwrap_or(1e-3);
    let xmax = parse_opt_f64(get("xmax"), "xmax", |v| v > 0.0, "must be > 0")?.unwrap_or(20.0);
    let tol = parse_opt_f64(get("tol"), "tol", |v| v > 0.0, "must be > 0")?.unwrap_or(1e-8);
    let eps = parse_opt_f64(
        get("eps"),
        "eps",
        |v| v > 0.0 && v < 1.0,
        "must lie in (0,1)",
    )?
    .unwrap_or(1e-10);
    let barrier_eps = parse_opt_f64(
        get("barrier_eps"),
        "barrier_eps",
        |v| v > 0.0 && v < 1.0,
        "must lie in (0,1)",
    )?
    .unwrap_or(1e-4);
    let paths = match get("paths") {
        None => 100_000,
        Some(raw) => {
            let v: u64 = raw
                .parse()
                .map_err(|_| ConfigError(format!("key `paths`: malformed integer `{raw}`")))?;
            if v < 1 {
                return Err(ConfigError("key `paths`: must be >= 1".into()));
            }
            v
        }
    };
    let seed = match get("seed") {
        None => 42,
        Some(raw) => raw
            .parse::<u64>()
            .map_err(|_| ConfigError(format!("key `seed`: malformed integer `{raw}`")))?,
    };
    let x = match get("x") {
        None => None,
        Some(raw) => Some(parse_f64_list(
            raw,
            "x",
            |v| v >= 0.0,
            "entries must be >= 0",
        )?),
    };
    let a = parse_opt_f64(get("a"), "a", |v| v > 0.0, "must be > 0")?;
    let theta = match get("theta") {
        None => None,
        Some(raw) => Some(parse_f64_list(
            raw,
            "theta",
            |v| v.is_finite(),
            "entries must be finite",
        )?),
    };
    let out = merged
        .get("out")
        .cloned()
        .unwrap_or_else(|| format!("{}.csv", command.name()));
    if out.is_empty() {
        return Err(ConfigError("key `out`: path must not be empty".into()));
    }
    let mc = match get("mc") {
        None => false,
        Some("true") => true,
        Some("false") => false,
        Some(other) => {
            return Err(ConfigError(format!(
                "key `mc`: expected true or false, got `{other}`"
            )))
        }
    };

    let config = RunConfig {
        command,
        lambda,
        n,
        t,
        c,
        sigma,
        claims,
        q,
        h,
        xmax,
        tol,
        eps,
        barrier_eps,
        paths,
        seed,
        x,
        a,
        theta,
        out,
        mc,
    };
    config.check_required()?;
    Ok(config)
}

impl RunConfig {
    fn check_required(&self) -> Result<(), ConfigError> {
        let need = |ok: bool, key: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError(format!(
                    "command `{}` requires key `{key}`",
                    self.command.name()
                )))
            }
        };
        match self.command {
            Command::Pmf | Command::Moments => {
                need(self.lambda.is_some(), "lambda")?;
                need(self.n.is_some(), "n")?;
                need(self.t.is_some(), "t")
            }
            Command::Jumps => {
                need(self.lambda.is_some(), "lambda")?;
                need(self.n.is_some(), "n")
            }
            Command::Simulate => {
                self.require_risk_model()?;
                need(self.t.is_some(), "t")?;
                match &self.x {
                    Some(xs) if xs.len() == 1 => Ok(()),
                    Some(_) => Err(ConfigError(
                        "command `simulate` requires key `x` to hold a single value".into(),
                    )),
                    None => Err(ConfigError("command `simulate` requires key `x`".into())),
                }
            }
            Command::Scale | Command::Validate => self.require_risk_model(),
            Command::Ruin => {
                self.require_risk_model()?;
                need(self.x.is_some(), "x")
            }
            Command::Exit => {
                self.require_risk_model()?;
                need(self.x.is_some(), "x")?;
                need(self.a.is_some(), "a")
            }
        }
    }

    fn require_risk_model(&self) -> Result<(), ConfigError> {
        for (present, key) in [
            (self.lambda.is_some(), "lambda"),
            (self.c.is_some(), "c"),
            (self.sigma.is_some(), "sigma"),
            (self.claims.is_some(), "delta (or mixture)"),
        ] {
            if !present {
                return Err(ConfigError(format!(
                    "command `{}` requires key `{key}`",
                    self.command.name()
                )));
            }
        }
        Ok(())
    }

    /// Canonical `key=value` rendering of the effective configuration, one
    /// key per line in sorted order; only keys with a value appear.
    pub fn canonical_text(&self) -> String {
        let ff = crate::csvfmt::format_float;
        let mut lines: Vec<(String, String)> = Vec::new();
        lines.push(("command".into(), self.command.name().into()));
        if let Some(v) = self.a {
            lines.push(("a".into(), ff(v)));
        }
        lines.push(("barrier_eps".into(), ff(self.barrier_eps)));
        if let Some(v) = self.c {
            lines.push(("c".into(), ff(v)));
        }
        if let Some(claims) = &self.claims {
            let body: Vec<String> = claims
                .iter()
                .map(|&(a, d)| format!("{}:{}", ff(a), ff(d)))
                .collect();
            lines.push(("mixture".into(), body.join(",")));
        }
        lines.push(("eps".into(), ff(self.eps)));
        lines.push(("h".into(), ff(self.h)));
        if let Some(v) = self.lambda {
            lines.push(("lambda".into(), ff(v)));
        }
        lines.push(("mc".into(), self.mc.to_string()));
        if let Some(v) = self.n {
            lines.push(("n".into(), v.to_string()));
        }
        lines.push(("out".into(), self.out.clone()));
        lines.push(("paths".into(), self.paths.to_string()));
        lines.push(("q".into(), ff(self.q)));
        lines.push(("seed".into(), self.seed.to_string()));
        if let Some(v) = self.sigma {
            lines.push(("sigma".into(), ff(v)));
        }
        if let Some(v) = self.t {
            lines.push(("t".into(), ff(v)));
        }
        if let Some(list) = &self.theta {
            let body: Vec<String> = list.iter().map(|&v| ff(v)).collect();
            lines.push(("theta".into(), body.join(",")));
        }
        lines.push(("tol".into(), ff(self.tol)));
        if let Some(list) = &self.x {
            let body: Vec<String> = list.iter().map(|&v| ff(v)).collect();
            lines.push(("x".into(), body.join(",")));
        }
        lines.push(("xmax".into(), ff(self.xmax)));
        lines.sort();
        let mut out = String::new();
        for (k, v) in lines {
            out.push_str(&k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}

fn parse_f64_value(raw: &str, key: &str) -> Result<f64, ConfigError> {
    let v: f64 = raw
        .parse()
        .map_err(|_| ConfigError(format!("key `{key}`: malformed number `{raw}`")))?;
    if !v.is_finite() {
        return Err(ConfigError(format!(
            "key `{key}`: value must be finite, got `{raw}`"
        )));
    }
    Ok(v)
}

fn parse_opt_f64(
    raw: Option<&str>,
    key: &str,
    ok: impl Fn(f64) -> bool,
    constraint: &str,
) -> Result<Option<f64>, ConfigError> {
    match raw {
        None => Ok(None),
        Some(raw) => {
            let v = parse_f64_value(raw, key)?;
            if !ok(v) {
                return Err(ConfigError(format!("key `{key}`: {constraint}, got {raw}")));
            }
            Ok(Some(v))
        }
    }
}

fn parse_f64_list(
    raw: &str,
    key: &str,
    ok: impl Fn(f64) -> bool,
    constraint: &str,
) -> Result<Vec<f64>, ConfigError> {
    let mut out = Vec::new();
    for piece in raw.split(',') {
        let v = parse_f64_value(piece.trim(), key)?;
        if !ok(v) {
            return Err(ConfigError(format!(
                "key `{key}`: {constraint}, got {piece}"
            )));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(ConfigError(format!("key `{key}`: list must not be empty")));
    }
    Ok(out)
}

/// Mixture syntax `a1:d1,a2:d2,...`; weights must be positive and sum to 1
/// within 1e-12, rates must be positive.
pub fn parse_mixture(raw: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    let mut out = Vec::new();
    for piece in raw.split(',') {
        let (a, d) = piece.trim().split_once(':').ok_or_else(|| {
            ConfigError(format!(
                "key `mixture`: expected weight:rate, got `{piece}`"
            ))
        })?;
        let alpha = parse_f64_value(a.trim(), "mixture")?;
        let delta = parse_f64_value(d.trim(), "mixture")?;
        if alpha <= 0.0 {
            return Err(ConfigError(format!(
                "key `mixture`: weight must be > 0, got {alpha}"
            )));
        }
        if delta <= 0.0 {
            return Err(ConfigError(format!(
                "key `mixture`: rate must be > 0, got {delta}"
            )));
        }
        out.push((alpha, delta));
    }
    let total: f64 = out.iter().map(|&(a, _)| a).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(ConfigError(format!(
            "key `mixture`: weights must sum to 1 within 1e-12, got {total}"
        )));
    }
    Ok(out)
}
