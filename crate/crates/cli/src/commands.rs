use std::fs;
use std::path::{Path, PathBuf};

use gchan_core::channel::ChannelError;
use gchan_core::fockoracle::{self, OracleError};
use gchan_core::interpbound::{self, SuiteConfig};
use gchan_core::thermal;
use gchan_core::{ChannelParams, CpReport, ExtReal};
use gchan_core::matcore::c;
use rayon::prelude::*;
use thiserror::Error;

use crate::output::{self, Cell, Report, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("channel is not completely positive: min eigenvalues {:.6e}, {:.6e}", .0.min_eig_first, .0.min_eig_second)]
    NotCp(CpReport),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::NotCp(_) => 2,
        }
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::NotCompletelyPositive(r) => CliError::NotCp(r),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<interpbound::MapError> for CliError {
    fn from(e: interpbound::MapError) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub struct LoadedChannel {
    pub source: String,
    pub params: ChannelParams,
    pub cp: CpReport,
}

pub fn load_channel(path: &Path) -> Result<LoadedChannel> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let params = ChannelParams::from_json_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    from_params(path.display().to_string(), params)
}

fn from_params(source: String, params: ChannelParams) -> Result<LoadedChannel> {
    let cp = params.cp_check()?;
    if !cp.is_cp {
        return Err(CliError::NotCp(cp));
    }
    Ok(LoadedChannel { source, params, cp })
}

fn check_grid(name: &str, grid: &[f64], min: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(CliError::Input(format!("{name} must not be empty")));
    }
    if let Some(x) = grid.iter().find(|x| x.is_nan() || **x < min || !x.is_finite()) {
        return Err(CliError::Input(format!("{name} entry {x} is out of range (need finite >= {min})")));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if p == 1.0 || (p - 1.0 >= gchan_core::channel::MIN_P_MINUS_ONE && p.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Input(format!("p = {p}: expected p = 1 or p - 1 >= 1e-6")))
    }
}

fn channel_meta(report: &mut Report, ch: &LoadedChannel) {
    report.set("channel", &ch.source);
    report.set("modes", ch.params.modes());
    report.set("cp", ch.cp);
}

fn rel_dist(x: f64, target: f64) -> f64 {
    (x - target).abs() / target.abs().max(1.0)
}

pub fn norm(ch: &LoadedChannel, p_grid: &[f64]) -> Result<Report> {
    check_grid("p grid", p_grid, 1.0)?;
    p_grid.iter().try_for_each(|&p| check_p(p))?;
    let mut table = Table::new(&["p", "norm", "bounded"]);
    for &p in p_grid {
        let value = ch.params.schatten_norm_analytic(p)?;
        table.push(vec![p.into(), value.into(), value.is_finite().into()]);
    }
    let mut report = Report::with_table("norm", table);
    channel_meta(&mut report, ch);
    report.set("invertible", ch.params.is_invertible()?);
    report.set("det_gram", ch.params.gram_determinant()?);
    Ok(report)
}

pub struct ConvergeOptions<'a> {
    pub e_grid: &'a [f64],
    pub p_grid: &'a [f64],
    pub q: Option<f64>,
}

pub fn converge(ch: &LoadedChannel, opts: &ConvergeOptions) -> Result<Report> {
    check_grid("p grid", opts.p_grid, 1.0)?;
    match opts.q {
        None => converge_ratio(ch, opts),
        Some(q) => converge_divergence(ch, opts, q),
    }
}

fn converge_ratio(ch: &LoadedChannel, opts: &ConvergeOptions) -> Result<Report> {
    check_grid("E grid", opts.e_grid, 0.0)?;
    if let Some(p) = opts.p_grid.iter().find(|&&p| check_p(p).is_err() || p == 1.0) {
        return Err(CliError::Input(format!("p = {p}: the norm ratio needs p - 1 >= 1e-6")));
    }
    let gain_limit = ch.params.entropy_gain_bound()?;
    let cells: Vec<(f64, f64)> = opts
        .p_grid
        .iter()
        .flat_map(|&p| opts.e_grid.iter().map(move |&e| (p, e)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(p, e)| -> Result<Vec<Cell>> {
            let ratio = thermal::norm_ratio(&ch.params, e, p)?;
            let limit = ch.params.schatten_norm_analytic(p)?;
            let gain = thermal::entropy_gain(&ch.params, e)?;
            Ok(vec![
                p.into(),
                e.into(),
                ratio.into(),
                limit.into(),
                gain.into(),
                gain_limit.into(),
                gain_limit.finite().map(|t| rel_dist(gain, t)).into(),
                limit.finite().map(|t| rel_dist(ratio, t)).into(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "p",
        "E",
        "norm_ratio",
        "norm_limit",
        "entropy_gain",
        "gain_limit",
        "gain_rel_dist",
        "rel_dist",
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    let mut report = Report::with_table("converge", table);
    channel_meta(&mut report, ch);
    Ok(report)
}

fn converge_divergence(ch: &LoadedChannel, opts: &ConvergeOptions, q: f64) -> Result<Report> {
    check_grid("E grid", opts.e_grid, f64::MIN_POSITIVE)?;
    if let Some(p) = opts.p_grid.iter().find(|&&p| !(q >= 1.0 && q < p)) {
        return Err(CliError::Input(format!("need 1 <= q < p, got q = {q}, p = {p}")));
    }
    let s = ch.params.modes() as f64;
    let mut table = Table::new(&["p", "q", "E", "cross_ratio", "slope", "slope_target", "rel_dist"]);
    let mut fits = Vec::new();
    for &p in opts.p_grid {
        let target = s * (1.0 / q - 1.0 / p);
        let ratios = opts
            .e_grid
            .par_iter()
            .map(|&e| thermal::cross_norm_ratio(&ch.params, e, p, q))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        for (i, (&e, &r)) in opts.e_grid.iter().zip(&ratios).enumerate() {
            let slope = (i > 0).then(|| {
                thermal::loglog_slope(&opts.e_grid[i - 1..=i], &ratios[i - 1..=i]).unwrap_or(f64::NAN)
            });
            table.push(vec![
                p.into(),
                q.into(),
                e.into(),
                r.into(),
                slope.into(),
                target.into(),
                slope.map(|x| rel_dist(x, target)).into(),
            ]);
        }
        let fitted = thermal::loglog_slope(opts.e_grid, &ratios);
        fits.push(serde_json::json!({
            "p": p,
            "q": q,
            "fitted_slope": fitted.map_or(serde_json::Value::Null, serde_json::Value::from),
            "slope_target": target,
            "rel_dist": fitted.map_or(serde_json::Value::Null, |x| rel_dist(x, target).into()),
        }));
    }
    let mut report = Report::with_table("converge", table);
    channel_meta(&mut report, ch);
    report.set("fits", fits);
    Ok(report)
}

pub struct OracleOptions {
    pub e: f64,
    pub p: f64,
    pub tol: f64,
    pub cutoff: Option<usize>,
}

pub fn oracle(ch: &LoadedChannel, opts: &OracleOptions) -> Result<Report> {
    check_grid("E", &[opts.e], 0.0)?;
    check_p(opts.p)?;
    if opts.tol.is_nan() || opts.tol < 0.0 {
        return Err(CliError::Input(format!("tolerance {} must be >= 0", opts.tol)));
    }
    let modes = ch.params.mode_diagonal().ok_or(OracleError::NotModeDiagonal)?;
    let cutoff = opts.cutoff.unwrap_or_else(|| fockoracle::thermal_cutoff(opts.e));
    if cutoff == 0 {
        return Err(CliError::Input("cutoff must be at least 1".into()));
    }
    let cutoffs_in = vec![cutoff; modes.len()];
    let channel = fockoracle::gaussian_channel(&ch.params, &cutoffs_in)?;
    let rho = fockoracle::thermal_product(&vec![opts.e; modes.len()], &cutoffs_in)?;
    let input_tail = 1.0 - rho.trace();
    let out = fockoracle::apply_channel(&channel, &rho)?;
    let numeric = fockoracle::schatten_norm_numeric(&out, opts.p);
    let analytic = thermal::output_schatten_norm(&ch.params, opts.e, opts.p)?;
    let discrepancy = (numeric - analytic).abs();
    let eps = channel.tail_bound();
    let allowed = opts.tol + eps;
    let pass = discrepancy <= allowed;

    let mut table = Table::new(&["E", "p", "analytic", "numeric", "discrepancy", "eps", "allowed", "pass"]);
    table.push(vec![
        opts.e.into(),
        opts.p.into(),
        analytic.into(),
        numeric.into(),
        discrepancy.into(),
        eps.into(),
        allowed.into(),
        pass.into(),
    ]);
    let mut report = Report::with_table("oracle", table);
    channel_meta(&mut report, ch);
    let decomposition: Vec<_> = modes
        .iter()
        .map(|&(k2, mu)| {
            let (eta, gain) = fockoracle::single_mode_decompose(k2, mu)?;
            Ok(serde_json::json!({ "k_abs2": k2, "mu": mu, "eta": eta, "gain": gain }))
        })
        .collect::<std::result::Result<_, OracleError>>()?;
    report.set("decomposition", decomposition);
    report.set("cutoffs_in", channel.cutoffs_in());
    report.set("cutoffs_out", channel.cutoffs_out());
    report.set("input_tail", input_tail);
    report.set("kraus_tail", channel.tail_bound());
    if !pass {
        report.exit_code = 3;
        let spectrum = thermal::output_spectrum(&ch.params, opts.e)?;
        report.diagnostics = Some(format!(
            "oracle mismatch: |numeric - analytic| = {} > allowed {}\n  analytic = {}\n  numeric  = {}\n  \
             output occupations = {:?}\n  cutoffs in/out = {:?} / {:?}\n  input tail = {}, kraus tail = {}\n  \
             output trace = {}\n  channel = {}",
            output::fmt_f64(discrepancy),
            output::fmt_f64(allowed),
            output::fmt_f64(analytic),
            output::fmt_f64(numeric),
            spectrum.as_slice(),
            channel.cutoffs_in(),
            channel.cutoffs_out(),
            output::fmt_f64(input_tail),
            output::fmt_f64(channel.tail_bound()),
            output::fmt_f64(out.trace()),
            output::to_json(&ch.params.to_spec()),
        ));
    }
    Ok(report)
}

pub fn entropy(ch: &LoadedChannel, e_grid: &[f64], tol: f64) -> Result<Report> {
    check_grid("E grid", e_grid, 0.0)?;
    let bound = ch.params.entropy_gain_bound()?;
    let gains = e_grid
        .par_iter()
        .map(|&e| thermal::entropy_gain(&ch.params, e))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["E", "entropy_gain", "bound", "margin", "ok"]);
    let mut violations = Vec::new();
    for (&e, &gain) in e_grid.iter().zip(&gains) {
        let margin = gain - bound.to_f64();
        let ok = match bound {
            ExtReal::Finite(b) => gain >= b - tol,
            ExtReal::NegInfinity => true,
            ExtReal::PosInfinity => false,
        };
        if !ok {
            violations.push(format!("E = {}: gain {} < bound {}", e, output::fmt_f64(gain), bound));
        }
        table.push(vec![e.into(), gain.into(), bound.into(), margin.into(), ok.into()]);
    }
    let mut report = Report::with_table("entropy", table);
    channel_meta(&mut report, ch);
    report.set("violations", violations.len());
    if !violations.is_empty() {
        report.exit_code = 3;
        report.diagnostics = Some(format!("entropy gain below bound:\n  {}", violations.join("\n  ")));
    }
    Ok(report)
}

pub fn interp(config: &SuiteConfig, counterexample_file: &Path) -> Result<Report> {
    if config.d_max == 0 || config.n_maps == 0 {
        return Err(CliError::Input("d-max and n-maps must be at least 1".into()));
    }
    if let Some(p) = config.p_grid.iter().find(|&&p| !(p > 1.0 && p.is_finite())) {
        return Err(CliError::Input(format!("p = {p}: the interpolation bound needs p > 1")));
    }
    let suite = interpbound::run_suite(config)?;
    let mut table = Table::new(&["index", "dim", "kraus_count", "pre_transpose", "p", "lower", "rhs", "slack"]);
    for m in &suite.maps {
        for r in &m.rows {
            table.push(vec![
                m.index.into(),
                m.dim.into(),
                m.kraus_count.into(),
                m.pre_transpose.into(),
                r.p.into(),
                r.lower.into(),
                r.rhs.into(),
                r.slack.into(),
            ]);
        }
    }
    let mut report = Report::with_table("interp", table);
    report.set("config", config);
    report.set("min_slack", suite.min_slack);
    report.set("max_slack", suite.max_slack);
    report.set("violation_count", suite.violation_count);
    if suite.violation_count > 0 {
        fs::write(counterexample_file, output::to_json(&suite.counterexamples) + "\n")
            .map_err(|e| CliError::Input(format!("{}: {e}", counterexample_file.display())))?;
        report.set("counterexample_file", counterexample_file.display().to_string());
        report.exit_code = 4;
        report.diagnostics = Some(format!(
            "{} interpolation-bound violation(s); witnesses written to {}",
            suite.violation_count,
            counterexample_file.display()
        ));
    }
    Ok(report)
}

/// Channel from a file or from scalar single-mode parameters.
pub fn channel_source(file: Option<PathBuf>, k2: Option<f64>, mu: Option<f64>) -> Result<LoadedChannel> {
    match (file, k2, mu) {
        (Some(path), None, None) => load_channel(&path),
        (None, Some(k2), Some(mu)) => {
            if !(k2 >= 0.0 && k2.is_finite() && mu.is_finite()) {
                return Err(CliError::Input(format!("invalid scalar channel |K|^2 = {k2}, mu = {mu}")));
            }
            from_params(format!("k2={k2},mu={mu}"), ChannelParams::single_mode(c(k2.sqrt()), mu))
        }
        _ => Err(CliError::Input("give either a channel file or both --k2 and --mu".into())),
    }
}
