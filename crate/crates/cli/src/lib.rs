//! Configuration, command bodies and table emission for the `frobthresh` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use frobthresh_core::arith::is_prime;
use frobthresh_core::engine::{degenerate_pfaffian, DegenerationReport};
use frobthresh_core::linalg::DEFAULT_MEMORY_CAP;
use frobthresh_core::{
    compute_report, indeg_annihilator, threshold_table, EngineError, Family, FamilyRange, FamilySpec,
    ModularPolynomial, Monomial, ThresholdReport, VariableLayout,
};
use thiserror::Error;

pub const MIN_MEMORY_CAP: u64 = 64 << 20;

pub const CSV_HEADER: &str =
    "family,m,n,p,s,q,v,indeg_ann,v_over_q,lower_bound,theorem_c,upper_bound_vq,bounds_ok,wall_ms";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("memory guardrail: {0}")]
    Guardrail(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Guardrail(_) => 4,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e.guardrail_estimate() {
            Some(_) => CliError::Guardrail(e.to_string()),
            None => CliError::Usage(e.to_string()),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Markdown,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(usage(format!("unknown format '{other}'"))),
        }
    }
}

/// Settings for a table run. Later sources override earlier ones:
/// defaults, config file, environment, flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub ranges: Vec<FamilyRange>,
    pub primes: Vec<u32>,
    pub s_max: u32,
    pub threads: Option<usize>,
    pub mem_cap: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub timings: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ranges: Vec::new(),
            primes: vec![2],
            s_max: 1,
            threads: None,
            mem_cap: DEFAULT_MEMORY_CAP,
            format: Format::Csv,
            output: None,
            timings: true,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.primes.is_empty() {
            return Err(usage("at least one prime is required"));
        }
        if let Some(p) = self.primes.iter().find(|&&p| !is_prime(p as u64)) {
            return Err(usage(format!("{p} is not prime")));
        }
        if self.s_max == 0 {
            return Err(usage("s_max must be at least 1"));
        }
        if self.mem_cap < MIN_MEMORY_CAP {
            return Err(usage(format!("memory cap must be at least {MIN_MEMORY_CAP} bytes")));
        }
        if self.threads == Some(0) {
            return Err(usage("thread count must be at least 1"));
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {}: expected key = value", lineno + 1)))?;
            self.apply(key.trim(), value.trim()).map_err(|e| usage(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.apply_file_text(&text)
    }

    pub fn apply_env(&mut self) -> Result<(), CliError> {
        self.apply_env_from(|k| std::env::var(k).ok())
    }

    pub fn apply_env_from(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), CliError> {
        if let Some(v) = get("FROBTHRESH_THREADS") {
            self.apply("threads", &v)?;
        }
        if let Some(v) = get("FROBTHRESH_MEM_CAP") {
            self.apply("mem_cap", &v)?;
        }
        Ok(())
    }

    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "families" | "family" => {
                self.ranges = if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(';').map(parse_family_range).collect::<Result<_, _>>()?
                };
            }
            "primes" => self.primes = parse_list(value)?,
            "s_max" => self.s_max = parse_num(value)?,
            "threads" => self.threads = Some(parse_num(value)?),
            "mem_cap" => self.mem_cap = parse_bytes(value)?,
            "format" => self.format = value.parse()?,
            "output" => self.output = Some(PathBuf::from(value)),
            "timings" => self.timings = parse_bool(value)?,
            other => return Err(usage(format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, CliError> {
    s.trim().parse().map_err(|_| usage(format!("'{s}' is not a valid number")))
}

fn parse_bool(s: &str) -> Result<bool, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(usage(format!("'{s}' is not a boolean"))),
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(parse_num).collect()
}

/// Byte count with optional `K`, `M`, `G` (binary) suffix.
pub fn parse_bytes(s: &str) -> Result<u64, CliError> {
    let t = s.trim().to_ascii_uppercase();
    let t = t.strip_suffix("IB").or_else(|| t.strip_suffix('B')).unwrap_or(&t);
    let (digits, shift) = match t.chars().last() {
        Some('K') => (&t[..t.len() - 1], 10),
        Some('M') => (&t[..t.len() - 1], 20),
        Some('G') => (&t[..t.len() - 1], 30),
        _ => (t, 0),
    };
    let base: u64 = parse_num(digits)?;
    base.checked_mul(1 << shift).ok_or_else(|| usage(format!("'{s}' overflows")))
}

/// `family:sizes` where sizes is a comma list of `n`, `a-b` or `mxn`.
pub fn parse_family_range(s: &str) -> Result<FamilyRange, CliError> {
    let (name, sizes) = s.trim().split_once(':').ok_or_else(|| usage(format!("'{s}': expected family:sizes")))?;
    let family: Family = name.parse()?;
    let mut out = Vec::new();
    for part in sizes.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if let Some((m, n)) = part.split_once('x') {
            out.push((parse_num(m)?, parse_num(n)?));
        } else if let Some((a, b)) = part.split_once('-') {
            let (a, b): (usize, usize) = (parse_num(a)?, parse_num(b)?);
            out.extend((a..=b).map(|n| (n, n)));
        } else {
            let n = parse_num(part)?;
            out.push((n, n));
        }
    }
    if out.is_empty() {
        return Err(usage(format!("'{s}': no sizes")));
    }
    Ok(FamilyRange { family, sizes: out })
}

/// `FamilySpec` from positional sizes: one value for square families, `m n` otherwise.
pub fn spec_from_args(family: Family, sizes: &[usize], p: u32, s: u32) -> Result<FamilySpec, CliError> {
    let (m, n) = match sizes {
        [n] => (*n, *n),
        [m, n] => (*m, *n),
        _ => return Err(usage("expected one size n or two sizes m n")),
    };
    Ok(FamilySpec::new(family, m, n, p, s)?)
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn csv_row(r: &ThresholdReport, timings: bool) -> String {
    let s = &r.spec;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        s.family,
        s.m,
        s.n,
        s.p,
        s.s,
        r.q,
        opt(r.v),
        opt(r.indeg_ann),
        opt(r.ratio()),
        opt(r.lower_bound),
        r.theorem_c,
        r.upper_bound_vq,
        r.bounds_ok(),
        if timings { r.wall_ms } else { 0 },
    )
}

pub fn render_csv(reports: &[ThresholdReport], timings: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&csv_row(r, timings));
        out.push('\n');
    }
    out
}

pub fn render_json(reports: &[ThresholdReport], timings: bool) -> String {
    let mut reports = reports.to_vec();
    if !timings {
        reports.iter_mut().for_each(|r| r.wall_ms = 0);
    }
    let mut s = serde_json::to_string_pretty(&reports).expect("reports serialize");
    s.push('\n');
    s
}

pub fn render_markdown(reports: &[ThresholdReport]) -> String {
    let mut out = String::from("| family | size | p | q | v | v/q | c(R) | -a(R) | bound on v | ok |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for r in reports {
        let s = &r.spec;
        let size = if s.family == Family::MaximalMinors { format!("{}x{}", s.m, s.n) } else { s.n.to_string() };
        let v = match (r.v, r.skipped) {
            (Some(v), _) => v.to_string(),
            (None, Some(est)) => format!("skipped (~{est} B)"),
            (None, None) => String::new(),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            s.family,
            size,
            s.p,
            r.q,
            v,
            opt(r.ratio()),
            r.theorem_c,
            opt(r.lower_bound),
            r.upper_bound_vq,
            if r.bounds_ok() { "yes" } else { "no" },
        );
    }
    out
}

pub fn render(reports: &[ThresholdReport], format: Format, timings: bool) -> String {
    match format {
        Format::Csv => render_csv(reports, timings),
        Format::Json => render_json(reports, timings),
        Format::Markdown => render_markdown(reports),
    }
}

/// Rendered output plus the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emitted {
    pub text: String,
    pub exit_code: i32,
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| usage(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn skipped_exit(reports: &[ThresholdReport]) -> i32 {
    if reports.iter().any(ThresholdReport::is_skipped) {
        4
    } else {
        0
    }
}

pub fn cmd_vr(spec: &FamilySpec, mem_cap: u64, format: Format) -> Result<Emitted, CliError> {
    frobthresh_core::linalg::set_memory_cap(mem_cap);
    let report = compute_report(spec, mem_cap)?;
    let reports = [report];
    Ok(Emitted { text: render(&reports, format, true), exit_code: skipped_exit(&reports) })
}

/// Runs the table and writes it to the configured output (or returns it for stdout).
pub fn cmd_scan(config: &RunConfig) -> Result<Emitted, CliError> {
    config.validate()?;
    frobthresh_core::linalg::set_memory_cap(config.mem_cap);
    let reports =
        with_pool(config.threads, || threshold_table(&config.ranges, &config.primes, config.s_max, config.mem_cap))??;
    let text = render(&reports, config.format, config.timings);
    let exit_code = skipped_exit(&reports);
    match &config.output {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(Emitted { text: String::new(), exit_code })
        }
        None => Ok(Emitted { text, exit_code }),
    }
}

fn layout_for(family: Family, n: usize) -> Result<VariableLayout, CliError> {
    match family {
        Family::Generic => Ok(VariableLayout::generic(n, n)),
        Family::Symmetric => Ok(VariableLayout::symmetric(n)),
        Family::Pfaffian => Ok(VariableLayout::skew(n)),
        other => Err(usage(format!("{other} is not a hypersurface family"))),
    }
}

/// `f^{q/2 - 1} x11^{q/2}` in `S / m^[q]`.
pub fn char2_symmetric_witness(f: &ModularPolynomial, q: u32) -> Result<ModularPolynomial, EngineError> {
    let x11 = ModularPolynomial::from_monomial(f.p(), Monomial::variable(f.nvars(), 0), 1);
    let g = f.pow_reduce(q / 2 - 1, q)?.mul_reduce(&x11.pow_reduce(q / 2, q)?, q)?;
    Ok(g)
}

pub fn cmd_annihilator(family: Family, n: usize, p: u32, s: u32) -> Result<Emitted, CliError> {
    let layout = layout_for(family, n)?;
    let spec = FamilySpec::square(family, n, p, s)?;
    let q = spec.q() as u32;
    let f = frobthresh_core::build_family_polynomial(&layout, p).map_err(EngineError::from)?;
    let ann = indeg_annihilator(&f, p, s)?;
    let labels = layout.labels();
    let annihilates = f.mul_reduce(&ann.witness, q).map_err(EngineError::from)?.is_zero();
    let mut text = String::new();
    let _ = writeln!(text, "ring: {spec}");
    let _ = writeln!(text, "f = {}", f.fmt_with(labels));
    let _ = writeln!(text, "indeg_ann = {}", ann.degree);
    let _ = writeln!(text, "witness = {}", ann.witness.fmt_with(labels));
    let _ = writeln!(text, "witness_nonzero = {}", !ann.witness.is_zero());
    let _ = writeln!(text, "witness_annihilates = {annihilates}");
    let mut ok = annihilates && !ann.witness.is_zero();
    if family == Family::Symmetric && p == 2 {
        let g = char2_symmetric_witness(&f, q)?;
        let deg_g = n as u32 * (q / 2 - 1) + q / 2;
        let g_kills = f.mul_reduce(&g, q).map_err(EngineError::from)?.is_zero();
        let _ = writeln!(text, "closed_form_degree = {deg_g}");
        let _ = writeln!(text, "closed_form_nonzero = {}", !g.is_zero());
        let _ = writeln!(text, "closed_form_annihilates = {g_kills}");
        let _ = writeln!(text, "indeg_at_most_closed_form = {}", ann.degree <= deg_g);
        ok &= !g.is_zero() && g_kills && ann.degree <= deg_g;
    }
    let _ = writeln!(text, "verified = {ok}");
    Ok(Emitted { text, exit_code: 0 })
}

pub fn render_degeneration(rep: &DegenerationReport) -> String {
    let mut text = String::from("t,v,indeg_ann\n");
    for row in &rep.rows {
        let _ = writeln!(text, "{},{},{}", row.t, row.v, row.indeg);
    }
    let direct = rep.v_at(0).expect("t = 0 present");
    let _ = writeln!(
        text,
        "additivity: v(0) = {} + {} = {} (direct {direct})",
        rep.block_part,
        rep.determinant_part,
        rep.composed_v0()
    );
    let _ = writeln!(text, "constant_off_zero = {}", rep.constant_off_zero);
    let _ = writeln!(text, "semicontinuous = {}", rep.semicontinuous);
    let _ = writeln!(text, "additive = {}", rep.additive);
    text
}

pub fn cmd_degenerate(n: usize, p: u32, s: u32, t_values: Option<&[u32]>) -> Result<Emitted, CliError> {
    let all: Vec<u32> = (0..p).collect();
    let rep = degenerate_pfaffian(n, p, s, t_values.unwrap_or(&all))?;
    Ok(Emitted { text: render_degeneration(&rep), exit_code: 0 })
}
