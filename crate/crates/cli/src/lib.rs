//! Command-line front end.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns
//! the exit status together with what should go to stdout and stderr, so
//! the binary and the tests share one code path.
//!
//! Exit status is 0 on success, 2 for usage errors and 1 for errors raised
//! while reading data or running a model. Failures produce exactly one
//! stderr line of the form `error[<kind>]: <message>`.

mod report;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use sparse_sarima::decomposition::decompose;
use sparse_sarima::diagnostics::{residual_diagnostics, DEFAULT_MAX_LAG};
use sparse_sarima::forecasting::{accuracy, forecast};
use sparse_sarima::identification::{acf, adf_test, pacf, AdfType, PValueBound};
use sparse_sarima::impact::{loss_against, LossReport};
use sparse_sarima::ingest::{parse_csv, Column};
use sparse_sarima::sarima::{candidate_models, fit, simulate, CoefficientSet, FittedModel, SarimaSpec};
use sparse_sarima::series::difference_chain;
use sparse_sarima::{Error, MonthIndex, MonthlySeries};

pub use report::{format_number, Format};
use report::{key_values, render, Cell, Table};

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// `YYYY-MM:YYYY-MM`, both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: MonthIndex,
    pub end: MonthIndex,
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected YYYY-MM:YYYY-MM, got '{s}'"))?;
        let start: MonthIndex = a.parse().map_err(|e: Error| e.to_string())?;
        let end: MonthIndex = b.parse().map_err(|e: Error| e.to_string())?;
        if end < start {
            return Err(format!("window {s} ends before it starts"));
        }
        Ok(Window { start, end })
    }
}

#[derive(Parser, Debug)]
#[command(name = "sarima", version, about = "Sparse seasonal ARIMA modeling of monthly series")]
struct Cli {
    /// Output layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// CSV file with year, month and traffic columns.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Traffic column to model.
    #[arg(long, default_value = "total")]
    column: Column,
    /// Restrict the data to a window, e.g. 2009-01:2018-12.
    #[arg(long)]
    train: Option<Window>,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Model in (p,d,q)x(P,D,Q)s[pins] notation.
    #[arg(long)]
    spec: Option<String>,
    /// Load a saved model document instead of fitting.
    #[arg(long, conflicts_with = "spec")]
    model: Option<PathBuf>,
    /// Write the fitted model document to this path.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Correlograms and Dickey-Fuller tests of a (differenced) series.
    Identify {
        #[command(flatten)]
        data: DataArgs,
        /// Ordinary differences applied first.
        #[arg(long, default_value_t = 0)]
        d: usize,
        /// Seasonal differences applied after the ordinary ones.
        #[arg(long, default_value_t = 0)]
        seasonal_d: usize,
        #[arg(long, default_value_t = 12)]
        period: usize,
        #[arg(long, default_value_t = 36)]
        max_lag: usize,
        /// Largest augmentation lag of the Dickey-Fuller regressions.
        #[arg(long, default_value_t = 4)]
        adf_lags: usize,
    },
    /// Maximum-likelihood fit with coefficient table and information criteria.
    Fit {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Residual diagnostics of a fitted model.
    Diagnose {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_LAG)]
        max_lag: usize,
    },
    /// Point forecasts and prediction intervals.
    Forecast {
        #[command(flatten)]
        model: ModelArgs,
        /// Forecast horizon in months.
        #[arg(long = "horizon", visible_alias = "h")]
        horizon: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.80,0.95")]
        levels: Vec<f64>,
    },
    /// Out-of-sample accuracy of several models over a test window.
    Accuracy {
        #[command(flatten)]
        data: DataArgs,
        /// Evaluation window, e.g. 2019-01:2019-07.
        #[arg(long)]
        test: Window,
        /// Models to compare; defaults to the eight built-in candidates.
        #[arg(long)]
        spec: Vec<String>,
    },
    /// Classical additive decomposition.
    Decompose {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 12)]
        period: usize,
    },
    /// Counterfactual loss after a training cut-off.
    Impact {
        #[command(flatten)]
        model: ModelArgs,
        /// Last training month; ignored when --model is given.
        #[arg(long)]
        train_end: Option<MonthIndex>,
        #[arg(long = "horizon", visible_alias = "h")]
        horizon: usize,
    },
    /// Simulate a series from a model with given coefficients.
    Simulate {
        #[arg(long)]
        spec: String,
        /// Free coefficients in slot order (ar, ma, sar, sma).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coef: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "2000-01")]
        start: MonthIndex,
    },
}

/// Failure of a subcommand, rendered as one stderr line.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }

    fn line(&self) -> String {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage", m.clone()),
            Failure::Io(m) => ("io", m.clone()),
            Failure::Domain(e) => (error_kind(e), e.to_string()),
        };
        format!("error[{kind}]: {}\n", single_line(&message))
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Length { .. } => "length",
        Error::Range(_) => "range",
        Error::Context(_) => "context",
        Error::Degenerate(_) => "degenerate",
        Error::Numerical(_) => "numerical",
        Error::Likelihood(_) => "likelihood",
        Error::Fit { .. } => "fit",
        Error::Simulation(_) => "simulation",
        Error::Parse { .. } => "parse",
        Error::Validation(_) => "validation",
        Error::Ingestion(_) => "ingestion",
        Error::Cell { .. } => "cell",
        Error::Document(_) => "document",
    }
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Runs one command line; `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome { code: 0, stdout: e.to_string(), stderr: String::new() };
            }
            let rendered = e.to_string();
            let first = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let f = Failure::Usage(first.to_string());
            return Outcome { code: f.code(), stdout: String::new(), stderr: f.line() };
        }
    };
    let name = command_name(&cli.command);
    match execute(cli.command) {
        Ok(tables) => Outcome { code: 0, stdout: render(name, &tables, cli.format), stderr: String::new() },
        Err(f) => Outcome { code: f.code(), stdout: String::new(), stderr: f.line() },
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Identify { .. } => "identify",
        Command::Fit { .. } => "fit",
        Command::Diagnose { .. } => "diagnose",
        Command::Forecast { .. } => "forecast",
        Command::Accuracy { .. } => "accuracy",
        Command::Decompose { .. } => "decompose",
        Command::Impact { .. } => "impact",
        Command::Simulate { .. } => "simulate",
    }
}

struct Loaded {
    series: MonthlySeries,
    notes: Vec<String>,
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_full(data: &DataArgs) -> Result<Loaded, Failure> {
    let path = data.input.as_ref().ok_or_else(|| Failure::Usage("--input is required".into()))?;
    let ingested = parse_csv(&read_file(path)?)?;
    Ok(Loaded { series: ingested.series(data.column)?, notes: ingested.notes })
}

fn load(data: &DataArgs) -> Result<Loaded, Failure> {
    let mut loaded = load_full(data)?;
    if let Some(w) = data.train {
        loaded.series = loaded.series.slice(w.start, w.end)?;
    }
    Ok(loaded)
}

fn notes_table(notes: &[String]) -> Option<Table> {
    if notes.is_empty() {
        return None;
    }
    let mut t = Table::new("notes", ["note"]);
    for n in notes {
        t.push(vec![n.as_str().into()]);
    }
    Some(t)
}

fn parse_spec(text: &str) -> Result<SarimaSpec, Failure> {
    Ok(text.parse::<SarimaSpec>()?)
}

fn with_notes(mut tables: Vec<Table>, notes: &[String]) -> Vec<Table> {
    tables.extend(notes_table(notes));
    tables
}

/// Loads `--model` or fits `--spec` on the input window; saves if asked.
fn obtain_model(args: &ModelArgs) -> Result<(FittedModel, Vec<String>), Failure> {
    let (model, notes) = match (&args.model, &args.spec) {
        (Some(path), _) => {
            let text = String::from_utf8(read_file(path)?)
                .map_err(|_| Failure::Io(format!("{}: not UTF-8", path.display())))?;
            (FittedModel::from_document(&text)?, Vec::new())
        }
        (None, Some(spec)) => {
            let spec = parse_spec(spec)?;
            let loaded = load(&args.data)?;
            (fit(&spec, &loaded.series)?, loaded.notes)
        }
        (None, None) => return Err(Failure::Usage("either --spec or --model is required".into())),
    };
    if let Some(path) = &args.save_model {
        std::fs::write(path, model.to_document()).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok((model, notes))
}

fn execute(command: Command) -> Result<Vec<Table>, Failure> {
    match command {
        Command::Identify { data, d, seasonal_d, period, max_lag, adf_lags } => {
            identify(&data, d, seasonal_d, period, max_lag, adf_lags)
        }
        Command::Fit { model } => {
            let (m, notes) = obtain_model(&model)?;
            Ok(with_notes(fit_tables(&m), &notes))
        }
        Command::Diagnose { model, max_lag } => {
            let (m, notes) = obtain_model(&model)?;
            Ok(with_notes(diagnose_tables(&m, max_lag)?, &notes))
        }
        Command::Forecast { model, horizon, levels } => {
            let (m, notes) = obtain_model(&model)?;
            Ok(with_notes(vec![forecast_table(&m, horizon, &levels)?], &notes))
        }
        Command::Accuracy { data, test, spec } => accuracy_tables(&data, test, &spec),
        Command::Decompose { data, period } => {
            let loaded = load(&data)?;
            Ok(with_notes(decompose_tables(&loaded.series, period)?, &loaded.notes))
        }
        Command::Impact { model, train_end, horizon } => impact_tables(&model, train_end, horizon),
        Command::Simulate { spec, coef, sigma2, n, seed, start } => {
            let spec = parse_spec(&spec)?;
            let c = CoefficientSet::from_free(&spec, &coef)?;
            let y = simulate(&spec, &c, sigma2, n, seed)?.rebased(start);
            let mut t = Table::new("simulation", ["month", "value"]);
            for (m, v) in y.months().zip(y.values()) {
                t.push(vec![m.to_string().into(), (*v).into()]);
            }
            Ok(vec![t])
        }
    }
}

fn bound_text(b: Option<PValueBound>) -> Cell {
    match b {
        Some(PValueBound::AtMost) => "at_most".into(),
        Some(PValueBound::AtLeast) => "at_least".into(),
        None => Cell::Missing,
    }
}

fn identify(
    data: &DataArgs,
    d: usize,
    seasonal_d: usize,
    period: usize,
    max_lag: usize,
    adf_lags: usize,
) -> Result<Vec<Table>, Failure> {
    let loaded = load(data)?;
    let (x, _) = difference_chain(&loaded.series, d, seasonal_d, period)?;
    let mut tables = Vec::new();
    for (name, result) in [("acf", acf(&x, max_lag)?), ("pacf", pacf(&x, max_lag)?)] {
        let mut t = Table::new(name, ["lag", "value", "band"]);
        for (lag, v) in result.lags.iter().zip(&result.values) {
            t.push(vec![(*lag).into(), (*v).into(), result.band.into()]);
        }
        tables.push(t);
    }
    let mut adf = Table::new("adf", ["type", "lag", "statistic", "p_value", "p_bound"]);
    for kind in AdfType::ALL {
        for r in adf_test(&x, adf_lags, kind)? {
            adf.push(vec![
                (kind.number() as usize).into(),
                r.lag.into(),
                r.statistic.into(),
                r.p_value.into(),
                bound_text(r.bound),
            ]);
        }
    }
    tables.push(adf);
    tables.push(key_values(
        "series",
        vec![
            ("start", x.start().to_string().into()),
            ("end", x.end().to_string().into()),
            ("length", x.len().into()),
        ],
    ));
    Ok(with_notes(tables, &loaded.notes))
}

fn fit_tables(m: &FittedModel) -> Vec<Table> {
    let mut coef = Table::new("coefficients", ["slot", "estimate", "std_error", "significant", "masked"]);
    for e in m.estimates() {
        let sig = e.is_significant().map_or(Cell::Missing, Cell::from);
        coef.push(vec![e.slot.to_string().into(), e.value.into(), e.std_error.into(), sig, e.masked.into()]);
    }
    let summary = key_values(
        "summary",
        vec![
            ("spec", m.spec().to_string().into()),
            ("train_start", m.train().start().to_string().into()),
            ("train_end", m.train().end().to_string().into()),
            ("n_effective", m.n_effective().into()),
            ("parameters", m.parameter_count().into()),
            ("sigma2", m.sigma2().into()),
            ("loglik", m.loglik().into()),
            ("aic", m.aic().into()),
            ("bic", m.bic().into()),
            ("aicc", m.aicc().into()),
        ],
    );
    let mut starts = Table::new("starts", ["label", "initial_loglik", "final_loglik", "converged"]);
    for s in m.starts() {
        starts.push(vec![
            s.label.as_str().into(),
            s.initial_loglik.into(),
            s.final_loglik.into(),
            s.converged.into(),
        ]);
    }
    vec![coef, summary, starts]
}

fn diagnose_tables(m: &FittedModel, max_lag: usize) -> Result<Vec<Table>, Failure> {
    let d = residual_diagnostics(m, max_lag)?;
    let mut lb = Table::new("ljung_box", ["lag", "statistic", "p_value"]);
    for ((lag, q), p) in d.ljung_box.lags.iter().zip(&d.ljung_box.statistics).zip(&d.ljung_box.p_values) {
        lb.push(vec![(*lag).into(), (*q).into(), (*p).into()]);
    }
    let n = &d.normality;
    let normality = key_values(
        "normality",
        vec![
            ("n", n.n.into()),
            ("shapiro_w", n.shapiro_w.into()),
            ("shapiro_p", n.shapiro_p.into()),
            ("jarque_bera", n.jb_stat.into()),
            ("jarque_bera_p", n.jb_p.into()),
            ("skewness", n.skewness.into()),
            ("kurtosis", n.kurtosis.into()),
        ],
    );
    let mut racf = Table::new("residual_acf", ["lag", "value", "band"]);
    for (lag, v) in d.residual_acf.lags.iter().zip(&d.residual_acf.values) {
        racf.push(vec![(*lag).into(), (*v).into(), d.residual_acf.band.into()]);
    }
    let mut qq = Table::new("qq", ["theoretical", "sample"]);
    for (a, b) in &d.qq {
        qq.push(vec![(*a).into(), (*b).into()]);
    }
    Ok(vec![lb, normality, racf, qq])
}

fn level_label(level: f64) -> String {
    let pct = format!("{}", (level * 1000.0).round() / 10.0);
    pct.replace('.', "_")
}

fn forecast_table(m: &FittedModel, horizon: usize, levels: &[f64]) -> Result<Table, Failure> {
    let f = forecast(m, horizon, levels)?;
    let mut columns = vec!["month".to_string(), "point".into(), "se".into()];
    for band in &f.intervals {
        let l = level_label(band.level);
        columns.push(format!("lower_{l}"));
        columns.push(format!("upper_{l}"));
    }
    let mut t = Table::new("forecast", columns);
    for k in 0..f.horizon {
        let mut row: Vec<Cell> = vec![f.months[k].to_string().into(), f.point[k].into(), f.se[k].into()];
        for band in &f.intervals {
            row.push(band.lower[k].into());
            row.push(band.upper[k].into());
        }
        t.push(row);
    }
    Ok(t)
}

fn accuracy_tables(data: &DataArgs, test: Window, specs: &[String]) -> Result<Vec<Table>, Failure> {
    let full = load_full(data)?;
    let train = match data.train {
        Some(w) => full.series.slice(w.start, w.end)?,
        None => full.series.slice(full.series.start(), test.start.add_months(-1))?,
    };
    let truth = full.series.slice(test.start, test.end)?;
    let named: Vec<(String, SarimaSpec)> = if specs.is_empty() {
        candidate_models().into_iter().map(|(n, s)| (n.to_string(), s)).collect()
    } else {
        specs.iter().map(|s| Ok((s.clone(), parse_spec(s)?))).collect::<Result<_, Failure>>()?
    };
    let fits: Vec<Result<FittedModel, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = named.iter().map(|(_, spec)| scope.spawn(|| fit(spec, &train))).collect();
        handles.into_iter().map(|h| h.join().expect("fit thread panicked")).collect()
    });
    let mut models = Vec::with_capacity(fits.len());
    for ((name, _), r) in named.iter().zip(fits) {
        let m = r.map_err(|e| match e {
            Error::Fit { message, best } => Error::Fit { message: format!("{name}: {message}"), best },
            other => other,
        })?;
        models.push((name.as_str(), m));
    }
    let refs: Vec<(&str, &FittedModel)> = models.iter().map(|(n, m)| (*n, m)).collect();
    let table = accuracy(&refs, &truth)?;
    let best = table.best().map(|r| r.name.clone());

    let mut metrics = Table::new("accuracy", ["model", "spec", "mse", "rmse", "mae", "aic", "bic", "best"]);
    for (row, (_, m)) in table.rows.iter().zip(&models) {
        metrics.push(vec![
            row.name.as_str().into(),
            m.spec().to_string().into(),
            row.metrics.mse.into(),
            row.metrics.rmse.into(),
            row.metrics.mae.into(),
            m.aic().into(),
            m.bic().into(),
            (best.as_deref() == Some(row.name.as_str())).into(),
        ]);
    }
    let mut columns = vec!["month".to_string(), "actual".into()];
    columns.extend(table.rows.iter().map(|r| r.name.clone()));
    let mut points = Table::new("forecasts", columns);
    for (k, (month, actual)) in truth.months().zip(truth.values()).enumerate() {
        let mut row: Vec<Cell> = vec![month.to_string().into(), (*actual).into()];
        row.extend(table.rows.iter().map(|r| Cell::Num(r.forecast[k])));
        points.push(row);
    }
    Ok(with_notes(vec![metrics, points], &full.notes))
}

const MONTH_ABBR: [&str; 12] = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];

fn decompose_tables(series: &MonthlySeries, period: usize) -> Result<Vec<Table>, Failure> {
    let d = decompose(series, period)?;
    let mut parts = Table::new("decomposition", ["month", "observed", "trend", "seasonal", "remainder"]);
    for (k, month) in series.months().enumerate() {
        parts.push(vec![
            month.to_string().into(),
            d.observed[k].into(),
            d.trend[k].into(),
            d.seasonal[k].into(),
            d.remainder[k].into(),
        ]);
    }
    let ranking = d.ranking();
    let mut idx = Table::new("seasonal_indices", ["position", "label", "index", "rank"]);
    for (j, v) in d.seasonal_indices.iter().enumerate() {
        let label: Cell = if period == 12 { MONTH_ABBR[j].into() } else { Cell::Missing };
        let rank = ranking.iter().position(|&r| r == j).unwrap() + 1;
        idx.push(vec![j.into(), label, (*v).into(), rank.into()]);
    }
    Ok(vec![parts, idx])
}

fn loss_tables(r: &LossReport, m: &FittedModel) -> Vec<Table> {
    let mut t = Table::new("impact", ["month", "actual", "predicted", "loss", "retained"]);
    for k in 0..r.months.len() {
        t.push(vec![
            r.months[k].to_string().into(),
            r.actual[k].into(),
            r.predicted[k].into(),
            r.loss[k].into(),
            r.retained[k].into(),
        ]);
    }
    t.push(vec![
        "aggregate".into(),
        r.aggregate_actual.into(),
        r.aggregate_predicted.into(),
        r.aggregate_loss.into(),
        r.aggregate_retained.into(),
    ]);
    let mut coef = Table::new("coefficients", ["slot", "estimate", "std_error"]);
    for e in m.estimates() {
        coef.push(vec![e.slot.to_string().into(), e.value.into(), e.std_error.into()]);
    }
    let summary = key_values(
        "model",
        vec![
            ("spec", m.spec().to_string().into()),
            ("train_start", m.train().start().to_string().into()),
            ("train_end", m.train().end().to_string().into()),
            ("sigma2", m.sigma2().into()),
            ("aic", m.aic().into()),
            ("bic", m.bic().into()),
        ],
    );
    vec![t, coef, summary]
}

/// With `--spec`, the model is fitted from the first loaded month through
/// `--train-end`; with `--model` the saved training window decides.
fn impact_tables(args: &ModelArgs, train_end: Option<MonthIndex>, horizon: usize) -> Result<Vec<Table>, Failure> {
    if horizon == 0 {
        return Err(Failure::Usage("--horizon must be positive".into()));
    }
    let full = load_full(&args.data)?;
    let series = match args.data.train {
        Some(w) => full.series.slice(w.start, full.series.end())?,
        None => full.series.clone(),
    };
    let model = if args.model.is_some() {
        obtain_model(args)?.0
    } else {
        let spec = args
            .spec
            .as_deref()
            .ok_or_else(|| Failure::Usage("either --spec or --model is required".into()))?;
        let end = train_end.ok_or_else(|| Failure::Usage("--train-end is required with --spec".into()))?;
        let m = fit(&parse_spec(spec)?, &series.slice(series.start(), end)?)?;
        if let Some(path) = &args.save_model {
            std::fs::write(path, m.to_document()).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        }
        m
    };
    let first = model.train().end().add_months(1);
    let last = first.add_months(horizon as i64 - 1);
    if last > series.end() {
        return Err(Failure::Domain(Error::Range(format!(
            "impact window {first}..{last} extends past the data ending {}",
            series.end()
        ))));
    }
    let report = loss_against(&model, &series.slice(first, last)?)?;
    Ok(with_notes(loss_tables(&report, &model), &full.notes))
}
