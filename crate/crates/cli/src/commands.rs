//! Command implementations. All output goes through one buffered writer so a
//! run either emits its complete result or fails with a nonzero exit code:
//! 0 success, 2 argument error, 3 resource-cap error, 4 internal consistency
//! failure.

use std::collections::BTreeMap;
use std::io::Write;

use serde_json::json;
use thiserror::Error;

use treespan_core::closedform::{f_numeric, phi, series_f_trunc, series_phi_trunc, GfPoint};
use treespan_core::combinatorics::rational_to_f64;
use treespan_core::moments::{expectation_y_exact, variance_y_exact};
use treespan_core::exactdist::ExactDistError;
use treespan_core::moments::{quasi_power_model, MomentReport, MomentsError};
use treespan_core::stats::{ks_pmf_vs_normal, quasi_power_ratio, GofReport, Normalization, StatsError};
use treespan_core::treesim::{run_batch, run_batch_split, SimSummary, TreeSimError};
use treespan_core::{Kind, MqsBatchSummary, WeightedDistTable};

use crate::cache;
use crate::{
    CenterArg, Cli, Command, DistArgs, GfCheckArgs, GofArgs, GofSource, MethodArg, MomentSource,
    MomentsArgs, MqsRunArgs, OutFormat, QuasipowerArgs, SimulateArgs,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Args(String),
    #[error("{0}")]
    ResourceCap(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("{0}")]
    Internal(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Args(_) => 2,
            CliError::ResourceCap(_) => 3,
            CliError::Consistency(_) => 4,
            CliError::Internal(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<ExactDistError> for CliError {
    fn from(e: ExactDistError) -> Self {
        match e {
            ExactDistError::BudgetExceeded { .. } | ExactDistError::TooLargeForBruteForce { .. } => {
                CliError::ResourceCap(e.to_string())
            }
            ExactDistError::PMaxExceedsNMax { .. }
            | ExactDistError::OutOfRange { .. }
            | ExactDistError::InvalidParameters(_) => CliError::Args(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<MomentsError> for CliError {
    fn from(e: MomentsError) -> Self {
        match e {
            MomentsError::Table(t) => t.into(),
            MomentsError::POutOfRange { .. } | MomentsError::NoAsymptoticForm { .. } => {
                CliError::Args(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<TreeSimError> for CliError {
    fn from(e: TreeSimError) -> Self {
        CliError::Args(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Table(t) => t.into(),
            StatsError::Moments(m) => m.into(),
            StatsError::DomainViolation(_) | StatsError::NonPositiveScale(_) => {
                CliError::Args(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text.as_bytes())?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn emit_json(cli: &Cli, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    emit(cli, &text)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Dist(args) => cmd_dist(cli, args),
        Command::Moments(args) => cmd_moments(cli, args),
        Command::Simulate(args) => cmd_simulate(cli, args),
        Command::MqsRun(args) => cmd_mqs_run(cli, args),
        Command::Gof(args) => cmd_gof(cli, args),
        Command::Quasipower(args) => cmd_quasipower(cli, args),
        Command::GfCheck(args) => cmd_gf_check(cli, args),
    }
}

fn load_table(cli: &Cli, kind: Kind, n: usize, p: usize) -> Result<WeightedDistTable, CliError> {
    let dir = cache::resolve_dir(cli.cache_dir.as_deref());
    cache::load_or_build(kind, n, p, dir.as_deref())
}

fn cmd_dist(cli: &Cli, args: &DistArgs) -> Result<(), CliError> {
    if args.p > args.n || args.n == 0 {
        return Err(CliError::Args(format!(
            "need 1 <= p <= n, got n = {}, p = {}",
            args.n, args.p
        )));
    }
    let kind = args.kind.to_kind();
    let table = load_table(cli, kind, args.n, args.p)?;
    let pmf = table.pmf(args.n, args.p)?;
    match cli.format {
        OutFormat::Csv => {
            let mut out = String::from("m,num,den,prob\n");
            for (m, w) in &pmf {
                out.push_str(&format!(
                    "{m},{},{},{}\n",
                    w.numer(),
                    w.denom(),
                    rational_to_f64(w)
                ));
            }
            emit(cli, &out)
        }
        OutFormat::Json => {
            let rows: Vec<serde_json::Value> = pmf
                .iter()
                .map(|(m, w)| {
                    json!({
                        "m": m,
                        "num": w.numer().to_string(),
                        "den": w.denom().to_string(),
                        "prob": rational_to_f64(w),
                    })
                })
                .collect();
            emit_json(
                cli,
                &json!({
                    "kind": kind.as_str(),
                    "n": args.n,
                    "p": args.p,
                    "pmf": rows,
                }),
            )
        }
    }
}

fn cmd_moments(cli: &Cli, args: &MomentsArgs) -> Result<(), CliError> {
    if args.p == 0 || args.p > args.n {
        return Err(CliError::Args(format!(
            "need 1 <= p <= n, got n = {}, p = {}",
            args.n, args.p
        )));
    }
    let want_table = matches!(args.source, MomentSource::Table | MomentSource::Both) || args.verify;
    let want_closed = matches!(args.source, MomentSource::ClosedForm | MomentSource::Both);

    let mut reports: Vec<MomentReport> = Vec::new();
    let mut verified: Option<bool> = None;
    let mut y_table_report: Option<MomentReport> = None;
    if want_table {
        let x = load_table(cli, Kind::X, args.n, args.p)?;
        let y = load_table(cli, Kind::Y, args.n, args.p)?;
        reports.push(MomentReport::from_table(&x, args.n, args.p)?);
        y_table_report = Some(MomentReport::from_table(&y, args.n, args.p)?);
    }
    if want_closed {
        reports.push(MomentReport::y_from_closed_forms(args.n, args.p)?);
    } else if let Some(r) = y_table_report.clone() {
        reports.push(r);
    }
    if args.verify {
        let closed = MomentReport::y_from_closed_forms(args.n, args.p)?;
        let table = y_table_report.expect("built above");
        let ok = closed.mean_exact == table.mean_exact
            && closed.variance_exact == table.variance_exact;
        if !ok {
            return Err(CliError::Consistency(format!(
                "closed-form moments disagree with table moments at (n, p) = ({}, {}): \
                 mean {} vs {}, variance {} vs {}",
                args.n,
                args.p,
                closed.mean_exact,
                table.mean_exact,
                closed.variance_exact,
                table.variance_exact
            )));
        }
        verified = Some(true);
    }

    match cli.format {
        OutFormat::Csv => {
            let mut out = String::from(MomentReport::CSV_HEADER);
            out.push('\n');
            for r in &reports {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
            emit(cli, &out)
        }
        OutFormat::Json => {
            let rows: Vec<serde_json::Value> =
                reports.iter().map(MomentReport::to_json_value).collect();
            emit_json(
                cli,
                &json!({
                    "n": args.n,
                    "p": args.p,
                    "reports": rows,
                    "verified": verified,
                }),
            )
        }
    }
}

fn pick_method(method: MethodArg, n: usize) -> MethodArg {
    match method {
        MethodArg::Auto => {
            if n <= 1000 {
                MethodArg::Tree
            } else {
                MethodArg::Split
            }
        }
        other => other,
    }
}

fn run_sim(n: usize, p: usize, trials: u64, seed: u64, method: MethodArg) -> Result<SimSummary, CliError> {
    match pick_method(method, n) {
        MethodArg::Tree => Ok(run_batch(n, p, trials, seed)?),
        MethodArg::Split => Ok(run_batch_split(n, p, trials, seed)?),
        MethodArg::Auto => unreachable!("resolved above"),
    }
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<(), CliError> {
    let summary = run_sim(args.n, args.p, args.trials, args.seed, args.method)?;
    match cli.format {
        OutFormat::Csv => emit(cli, &summary.to_csv()),
        OutFormat::Json => {
            let value =
                serde_json::to_value(&summary).map_err(|e| CliError::Internal(e.to_string()))?;
            emit_json(cli, &value)
        }
    }
}

fn cmd_mqs_run(cli: &Cli, args: &MqsRunArgs) -> Result<(), CliError> {
    let summary: MqsBatchSummary = match (&args.ranks, args.p) {
        (Some(ranks), None) => {
            treespan_core::mqs::run_mqs_batch(args.n, Some(ranks), 0, args.trials, args.seed)
        }
        (None, Some(p)) => treespan_core::mqs::run_mqs_batch(args.n, None, p, args.trials, args.seed),
        (Some(_), Some(_)) => {
            return Err(CliError::Args("--p and --ranks are mutually exclusive".into()))
        }
        (None, None) => return Err(CliError::Args("one of --p or --ranks is required".into())),
    }
    .map_err(|e| CliError::Args(e.to_string()))?;
    if !summary.found_verified {
        return Err(CliError::Consistency(
            "a selection run returned wrong order statistics".into(),
        ));
    }
    match cli.format {
        OutFormat::Csv => emit(cli, &summary.to_csv()),
        OutFormat::Json => {
            let value =
                serde_json::to_value(&summary).map_err(|e| CliError::Internal(e.to_string()))?;
            emit_json(cli, &value)
        }
    }
}

/// Exact-pmf comparison is included automatically while the table stays
/// inside the default build budget.
const GOF_EXACT_N_CAP: usize = 160;
const GOF_EXACT_P_CAP: usize = 5;
/// Rational closed-form moments stay fast up to here.
const EXACT_CENTER_Y_CAP: usize = 5000;

fn exact_normalization(cli: &Cli, kind: Kind, n: usize, p: usize) -> Result<Normalization, CliError> {
    match kind {
        Kind::Y => {
            if n > EXACT_CENTER_Y_CAP {
                return Err(CliError::Args(format!(
                    "--center exact supports the span size up to n = {EXACT_CENTER_Y_CAP}, got {n}"
                )));
            }
            let mean = rational_to_f64(&expectation_y_exact(n, p)?);
            let var = rational_to_f64(&variance_y_exact(n, p)?);
            Ok(Normalization::from_moments(mean, var))
        }
        Kind::X => {
            let table = load_table(cli, Kind::X, n, p)?;
            let m = table.moments_from_table(n, p)?;
            Ok(Normalization::from_moments(
                rational_to_f64(&m.mean),
                rational_to_f64(&m.variance),
            ))
        }
    }
}

fn cmd_gof(cli: &Cli, args: &GofArgs) -> Result<(), CliError> {
    let kind = args.kind.to_kind();
    if args.source == GofSource::Exact {
        return gof_exact(cli, args, kind);
    }
    let trials = args
        .trials
        .ok_or_else(|| CliError::Args("--trials is required with --source sim".into()))?;
    let summary = run_sim(args.n, args.p, trials, args.seed, args.method)?;
    let hist = match kind {
        Kind::X => &summary.hist_x,
        Kind::Y => &summary.hist_y,
    };
    let normalization = match args.center {
        CenterArg::Limit => Normalization::limit_law(args.n, args.p),
        CenterArg::Moments => match kind {
            Kind::X => Normalization::from_moments(summary.sample_mean_x, summary.sample_var_x),
            Kind::Y => Normalization::from_moments(summary.sample_mean_y, summary.sample_var_y),
        },
        CenterArg::Exact => exact_normalization(cli, kind, args.n, args.p)?,
    };
    let exact_pmf: Option<BTreeMap<usize, f64>> =
        if args.n <= GOF_EXACT_N_CAP && args.p <= GOF_EXACT_P_CAP {
            let table = load_table(cli, kind, args.n, args.p)?;
            Some(
                table
                    .pmf(args.n, args.p)?
                    .into_iter()
                    .map(|(m, r)| (m, rational_to_f64(&r)))
                    .collect(),
            )
        } else {
            None
        };
    let report = GofReport::compute(kind, args.n, args.p, hist, normalization, exact_pmf.as_ref())?;
    match cli.format {
        OutFormat::Csv => {
            let mut out = String::from(GofReport::CSV_HEADER);
            out.push('\n');
            out.push_str(&report.csv_row());
            out.push('\n');
            emit(cli, &out)
        }
        OutFormat::Json => {
            let value =
                serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
            emit_json(cli, &value)
        }
    }
}

/// Goodness of fit of the exact table distribution itself: the true KS
/// distance to the normal limit, free of sampling noise.
fn gof_exact(cli: &Cli, args: &GofArgs, kind: Kind) -> Result<(), CliError> {
    let table = load_table(cli, kind, args.n, args.p)?;
    let pmf: BTreeMap<usize, f64> = table
        .pmf(args.n, args.p)?
        .into_iter()
        .map(|(m, r)| (m, rational_to_f64(&r)))
        .collect();
    let normalization = match args.center {
        CenterArg::Limit => Normalization::limit_law(args.n, args.p),
        CenterArg::Moments | CenterArg::Exact => {
            let m = table.moments_from_table(args.n, args.p)?;
            Normalization::from_moments(rational_to_f64(&m.mean), rational_to_f64(&m.variance))
        }
    };
    let ks = ks_pmf_vs_normal(&pmf, normalization.center, normalization.scale)?;
    let report = GofReport {
        kind,
        n: args.n,
        p: args.p,
        trials: 0,
        normalization,
        ks_distance: ks,
        tv_distance: None,
        chi_square_stat: None,
    };
    match cli.format {
        OutFormat::Csv => {
            let mut out = String::from(GofReport::CSV_HEADER);
            out.push('\n');
            out.push_str(&report.csv_row());
            out.push('\n');
            emit(cli, &out)
        }
        OutFormat::Json => {
            let value =
                serde_json::to_value(&report).map_err(|e| CliError::Internal(e.to_string()))?;
            emit_json(cli, &value)
        }
    }
}

fn cmd_quasipower(cli: &Cli, args: &QuasipowerArgs) -> Result<(), CliError> {
    if args.n_list.is_empty() {
        return Err(CliError::Args("--n-list must not be empty".into()));
    }
    let kind = args.kind.to_kind();
    let n_max = *args.n_list.iter().max().expect("nonempty");
    for &n in &args.n_list {
        if args.p > n {
            return Err(CliError::Args(format!("p = {} exceeds n = {n}", args.p)));
        }
    }
    let model = quasi_power_model(kind, args.p)?;
    let table = load_table(cli, kind, n_max, args.p)?;
    let mut rows: Vec<(usize, f64)> = Vec::with_capacity(args.n_list.len());
    for &n in &args.n_list {
        rows.push((n, quasi_power_ratio(&table, &model, n, args.p, args.s)?));
    }
    match cli.format {
        OutFormat::Csv => {
            let mut out = String::from("kind,p,s,n,ratio\n");
            for (n, ratio) in &rows {
                out.push_str(&format!("{},{},{},{n},{ratio}\n", kind, args.p, args.s));
            }
            emit(cli, &out)
        }
        OutFormat::Json => {
            let json_rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|(n, ratio)| json!({ "n": n, "ratio": ratio }))
                .collect();
            emit_json(
                cli,
                &json!({
                    "kind": kind.as_str(),
                    "p": args.p,
                    "s": args.s,
                    "rows": json_rows,
                }),
            )
        }
    }
}

fn cmd_gf_check(cli: &Cli, args: &GfCheckArgs) -> Result<(), CliError> {
    let pt = GfPoint::from_real(args.z, args.u, args.v);
    let phi_closed = phi(&pt).map_err(|e| CliError::Args(e.to_string()))?;
    let phi_series = series_phi_trunc(&pt, args.trunc, args.ptrunc);
    let phi_residual = (phi_closed - phi_series).norm() / phi_closed.norm().max(f64::MIN_POSITIVE);
    let f_closed = f_numeric(&pt).map_err(|e| CliError::Args(e.to_string()))?;
    let f_series = series_f_trunc(&pt, args.trunc, args.ptrunc);
    let f_residual = (f_closed - f_series).norm() / f_closed.norm().max(f64::MIN_POSITIVE);

    match cli.format {
        OutFormat::Csv => {
            let mut out = String::from("field,value\n");
            for (name, value) in [
                ("phi_re", phi_closed.re),
                ("phi_im", phi_closed.im),
                ("phi_series_re", phi_series.re),
                ("phi_series_im", phi_series.im),
                ("phi_rel_residual", phi_residual),
                ("f_re", f_closed.re),
                ("f_im", f_closed.im),
                ("f_series_re", f_series.re),
                ("f_series_im", f_series.im),
                ("f_rel_residual", f_residual),
            ] {
                out.push_str(&format!("{name},{value}\n"));
            }
            emit(cli, &out)
        }
        OutFormat::Json => emit_json(
            cli,
            &json!({
                "z": args.z,
                "u": args.u,
                "v": args.v,
                "trunc": args.trunc,
                "ptrunc": args.ptrunc,
                "phi": { "re": phi_closed.re, "im": phi_closed.im },
                "phi_series": { "re": phi_series.re, "im": phi_series.im },
                "phi_rel_residual": phi_residual,
                "f": { "re": f_closed.re, "im": f_closed.im },
                "f_series": { "re": f_series.re, "im": f_series.im },
                "f_rel_residual": f_residual,
            }),
        ),
    }
}
