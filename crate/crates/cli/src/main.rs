//! `walkscan`: detect and characterize random-walk structure in daily
//! operational series.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 numeric degeneracy.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use walkscan_core::error::Error;
use walkscan_core::fractal::{calibrate, compare_ds, CalibrationEnsemble};
use walkscan_core::ingest::{self, CsvSchema, GapMode};
use walkscan_core::noise::{brownian_noise, white_noise, NoiseKind, NoiseSpec};
use walkscan_core::pipeline::{emit_plot_data, run_pipeline, AnalysisConfig};
use walkscan_core::rng::Mt19937;
use walkscan_core::series::is_missing;
use walkscan_core::spectral::{analyze_series, WindowKind};
use walkscan_core::stats::{hl_location, jarque_bera, jarque_bera_gel, runs_test, smirnov_test};
use walkscan_core::synthetic::demo_hospital_csv;
use walkscan_core::TimeSeries;

#[derive(Parser)]
#[command(
    name = "walkscan",
    version,
    about = "Random-walk detection in daily operational time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Hann,
    Hamming,
}

impl From<WindowArg> for WindowKind {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::Hann => WindowKind::Hann,
            WindowArg::Hamming => WindowKind::Hamming,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum GapArg {
    /// Divide the bracketing change by the number of missing days.
    Paper,
    /// Divide by the number of spanned one-day intervals.
    Span,
}

impl From<GapArg> for GapMode {
    fn from(g: GapArg) -> Self {
        match g {
            GapArg::Paper => GapMode::MissingDays,
            GapArg::Span => GapMode::SpanIntervals,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SimKind {
    White,
    Brownian,
    Cauchy,
    /// Synthetic hospital export with baked-in artefacts.
    Hospital,
}

#[derive(Args, Clone)]
struct SchemaArgs {
    /// Name of the date column.
    #[arg(long, default_value = "date")]
    date_column: String,
    /// Admissions column (omit if absent).
    #[arg(long, default_value = "adm")]
    adm_column: String,
    /// Discharges column (omit if absent).
    #[arg(long, default_value = "dis")]
    dis_column: String,
    /// Inpatients column (omit if absent).
    #[arg(long, default_value = "inp")]
    inp_column: String,
    /// Field delimiter.
    #[arg(long, default_value = ",")]
    delimiter: char,
    /// Accept mm/dd/yyyy dates instead of ISO-8601.
    #[arg(long)]
    mdy_dates: bool,
    /// Bed capacity of the facility.
    #[arg(long, default_value_t = 192.0)]
    bed_capacity: f64,
}

impl SchemaArgs {
    fn to_schema(&self) -> CsvSchema {
        let opt = |s: &str| {
            if s.is_empty() {
                None
            } else {
                Some(s.to_string())
            }
        };
        CsvSchema {
            date: self.date_column.clone(),
            adm: opt(&self.adm_column),
            dis: opt(&self.dis_column),
            inp: opt(&self.inp_column),
            delimiter: self.delimiter as u8,
            mdy_dates: self.mdy_dates,
            bed_capacity: self.bed_capacity,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a CSV export, apply corrections, write the corrected CSV and a
    /// JSON-lines corrections log.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Corrected CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Corrections log (JSON lines).
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = GapArg::Paper)]
        gap_intervals: GapArg,
        /// January-1 plausibility threshold; defaults to twice the bed
        /// capacity.
        #[arg(long)]
        new_year_threshold: Option<f64>,
        #[command(flatten)]
        schema: SchemaArgs,
    },
    /// Per-series nonparametric statistics plus a pairwise Smirnov matrix.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long, value_enum, default_value_t = GapArg::Paper)]
        gap_intervals: GapArg,
        #[arg(long)]
        new_year_threshold: Option<f64>,
        #[command(flatten)]
        schema: SchemaArgs,
    },
    /// Simulate a reference ensemble and write its summary as JSON.
    Calibrate {
        #[arg(long, value_enum)]
        kind: CalKind,
        /// Traces in the ensemble.
        #[arg(long, default_value_t = 100)]
        m: usize,
        /// Points per trace.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20260810)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream_base: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two ensemble JSON files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Generate reference noise traces (CSV, one column per trace).
    Simulate {
        #[arg(long, value_enum)]
        kind: SimKind,
        /// Points per trace.
        #[arg(long, default_value_t = 1329)]
        n: usize,
        /// Number of traces.
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Innovation standard deviation (white/brownian) or Cauchy scale.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 20260810)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream_base: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral density of one column: CSV out plus a JSON slope summary.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        /// Column to analyze.
        #[arg(long)]
        column: String,
        #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
        window: WindowArg,
        /// Spectrum CSV output; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Slope summary JSON output.
        #[arg(long)]
        slope_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = GapArg::Paper)]
        gap_intervals: GapArg,
        #[arg(long)]
        new_year_threshold: Option<f64>,
        #[command(flatten)]
        schema: SchemaArgs,
    },
    /// Full pipeline: correct, characterize, calibrate, classify; writes
    /// report.json and plot-ready CSVs.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 20260810)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream_base: u64,
        /// Traces per calibration ensemble.
        #[arg(long, default_value_t = 100)]
        m: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
        window: WindowArg,
        #[arg(long, value_enum, default_value_t = GapArg::Paper)]
        gap_intervals: GapArg,
        #[arg(long)]
        new_year_threshold: Option<f64>,
        /// Series to include in the plot files (default: all).
        #[arg(long)]
        series: Vec<String>,
        #[command(flatten)]
        schema: SchemaArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CalKind {
    White,
    Brownian,
}

impl From<CalKind> for NoiseKind {
    fn from(k: CalKind) -> Self {
        match k {
            CalKind::White => NoiseKind::White,
            CalKind::Brownian => NoiseKind::Brownian,
        }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Corrected bundle series, in (label, series) pairs, using the pipeline's
/// correction settings.
fn load_corrected(
    input: &Path,
    schema: &CsvSchema,
    gap: GapMode,
    threshold: Option<f64>,
) -> anyhow::Result<Vec<TimeSeries>> {
    let bundle = ingest::load_csv(input, schema)?;
    let threshold = threshold.unwrap_or(2.0 * bundle.bed_capacity);
    let mut out = Vec::new();
    for series in [&bundle.adm, &bundle.dis, &bundle.inp] {
        if series.values.iter().all(|v| is_missing(*v)) {
            continue;
        }
        let (mut fixed, _) = ingest::correct_new_year(series, threshold)?;
        for g in &bundle.gaps {
            let (filled, _) = ingest::fill_gap(&fixed, g.start, g.end, gap)?;
            fixed = filled;
        }
        out.push(fixed);
    }
    Ok(out)
}

fn cmd_ingest(
    input: &Path,
    out: &Path,
    log: Option<&Path>,
    gap: GapMode,
    threshold: Option<f64>,
    schema: &CsvSchema,
) -> anyhow::Result<()> {
    let bundle = ingest::load_csv(input, schema)?;
    let threshold = threshold.unwrap_or(2.0 * bundle.bed_capacity);
    let mut corrections = Vec::new();
    let mut corrected = Vec::new();
    for series in [&bundle.adm, &bundle.dis, &bundle.inp] {
        // a slot absent from the file stays all-missing and uncorrected
        if series.values.iter().all(|v| is_missing(*v)) {
            corrected.push(series.clone());
            continue;
        }
        let (mut fixed, mut log) = ingest::correct_new_year(series, threshold)?;
        corrections.append(&mut log);
        for g in &bundle.gaps {
            let (filled, mut log) = ingest::fill_gap(&fixed, g.start, g.end, gap)?;
            corrections.append(&mut log);
            fixed = filled;
        }
        corrected.push(fixed);
    }

    let mut csv = String::from("date,adm,dis,inp\n");
    for i in 0..corrected[0].len() {
        csv.push_str(&corrected[0].date_at(i).to_string());
        for series in &corrected {
            csv.push(',');
            if !is_missing(series.values[i]) {
                csv.push_str(&format!("{}", series.values[i]));
            }
        }
        csv.push('\n');
    }
    std::fs::write(out, csv)?;

    for w in &bundle.warnings {
        eprintln!("warning: {w}");
    }
    let log_text = ingest::corrections_to_jsonl(&corrections)?;
    match log {
        Some(path) => std::fs::write(path, log_text)?,
        None => eprint!("{log_text}"),
    }
    eprintln!(
        "wrote {} rows, {} corrections",
        corrected[0].len(),
        corrections.len()
    );
    Ok(())
}

fn cmd_analyze(
    input: &Path,
    format: FormatArg,
    schema: &CsvSchema,
    gap: GapMode,
    threshold: Option<f64>,
) -> anyhow::Result<()> {
    let series = load_corrected(input, schema, gap, threshold)?;
    if matches!(format, FormatArg::Csv) {
        let mut out =
            String::from("label,n,median,ci_low,ci_high,n_runs,p_rrd,p_fewer,jb_p,rjb_p\n");
        for s in &series {
            let loc = hl_location(&s.values)?;
            let runs = runs_test(&s.values)?;
            let (_, jb_p) = jarque_bera(&s.values)?;
            let (_, rjb_p) = jarque_bera_gel(&s.values)?;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                s.label,
                s.len(),
                loc.median,
                loc.ci_low,
                loc.ci_high,
                runs.n_runs,
                runs.p_rrd,
                runs.p_fewer,
                jb_p,
                rjb_p
            ));
        }
        print!("{out}");
        return Ok(());
    }
    let mut blocks = serde_json::Map::new();
    for s in &series {
        let location = hl_location(&s.values)?;
        let runs = runs_test(&s.values)?;
        let (jb_stat, jb_p) = jarque_bera(&s.values)?;
        let (rjb_stat, rjb_p) = jarque_bera_gel(&s.values)?;
        blocks.insert(
            s.label.clone(),
            serde_json::json!({
                "n": s.len(),
                "location": location,
                "runs": runs,
                "normality": {
                    "jb_stat": jb_stat, "jb_p": jb_p,
                    "rjb_stat": rjb_stat, "rjb_p": rjb_p,
                },
            }),
        );
    }
    let mut matrix = Vec::new();
    for i in 0..series.len() {
        for j in i + 1..series.len() {
            let (d, p) = smirnov_test(&series[i].values, &series[j].values)?;
            matrix.push(serde_json::json!({
                "a": series[i].label, "b": series[j].label, "d": d, "p": p,
            }));
        }
    }
    let doc = serde_json::json!({ "series": blocks, "smirnov": matrix });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn cmd_calibrate(
    kind: NoiseKind,
    m: usize,
    n: usize,
    seed: u64,
    stream_base: u64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let ensemble = calibrate(kind, m, n, seed, stream_base)?;
    let text = format!("{}\n", serde_json::to_string_pretty(&ensemble)?);
    write_or_print(out, &text)
}

fn cmd_compare(a: &Path, b: &Path, alpha: f64) -> anyhow::Result<()> {
    let ea: CalibrationEnsemble = serde_json::from_str(&std::fs::read_to_string(a)?)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", a.display())))?;
    let eb: CalibrationEnsemble = serde_json::from_str(&std::fs::read_to_string(b)?)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", b.display())))?;
    if ea.n != eb.n {
        eprintln!(
            "note: ensembles have different lengths ({} vs {}); dimension \
             estimates at different N are not comparable",
            ea.n, eb.n
        );
    }
    let result = compare_ds(&ea, &eb)?;
    let doc = serde_json::json!({
        "a": { "kind": ea.kind, "mean_ds": ea.mean_ds, "var_total": ea.var_total },
        "b": { "kind": eb.kind, "mean_ds": eb.mean_ds, "var_total": eb.var_total },
        "comparison": result,
        "significant_at_alpha": result.significant_at(alpha),
        "alpha": alpha,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(())
}

fn cmd_simulate(
    kind: SimKind,
    n: usize,
    m: usize,
    sigma: f64,
    seed: u64,
    stream_base: u64,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    if matches!(kind, SimKind::Hospital) {
        return write_or_print(out, &demo_hospital_csv(seed));
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(m);
    for k in 0..m {
        let stream = stream_base + k as u64;
        let trace = match kind {
            SimKind::White => {
                let spec = NoiseSpec {
                    innovation: walkscan_core::noise::Innovation::Gaussian { sigma },
                    ..NoiseSpec::gaussian(NoiseKind::White, n, seed, stream)
                };
                white_noise(&spec)?.values
            }
            SimKind::Brownian => {
                let spec = NoiseSpec {
                    innovation: walkscan_core::noise::Innovation::Gaussian { sigma },
                    ..NoiseSpec::gaussian(NoiseKind::Brownian, n, seed, stream)
                };
                brownian_noise(&spec)?.values
            }
            SimKind::Cauchy => {
                let mut gen = Mt19937::seed(seed, stream);
                (0..n)
                    .map(|_| gen.cauchy_sample(0.0, sigma))
                    .collect::<walkscan_core::Result<Vec<f64>>>()?
            }
            SimKind::Hospital => unreachable!(),
        };
        columns.push(trace);
    }
    let mut text = String::from("t");
    for k in 0..m {
        text.push_str(&format!(",trace{k}"));
    }
    text.push('\n');
    for i in 0..n {
        text.push_str(&format!("{i}"));
        for column in &columns {
            text.push_str(&format!(",{}", column[i]));
        }
        text.push('\n');
    }
    write_or_print(out, &text)
}

#[allow(clippy::too_many_arguments)]
fn cmd_spectrum(
    input: &Path,
    column: &str,
    window: WindowKind,
    out: Option<&Path>,
    slope_out: Option<&Path>,
    schema: &CsvSchema,
    gap: GapMode,
    threshold: Option<f64>,
) -> anyhow::Result<()> {
    let mut schema = schema.clone();
    // route the requested column through a known slot
    let want_label = if schema.adm.as_deref() == Some(column) {
        "Adm"
    } else if schema.dis.as_deref() == Some(column) {
        "Dis"
    } else {
        schema.inp = Some(column.to_string());
        "InP"
    };
    let series = load_corrected(input, &schema, gap, threshold)?;
    let target = series
        .iter()
        .find(|s| s.label == want_label)
        .ok_or_else(|| Error::InvalidParameter(format!("column '{column}' not found")))?;

    let (spectrum, slope) = analyze_series(target, window)?;
    let mut csv = String::from("frequency,amplitude,power\n");
    for ((f, a), p) in spectrum
        .frequencies
        .iter()
        .zip(&spectrum.amplitude)
        .zip(&spectrum.power)
    {
        csv.push_str(&format!("{f},{a},{p}\n"));
    }
    write_or_print(out, &csv)?;

    let summary = serde_json::json!({
        "column": column,
        "window": spectrum.window,
        "n_padded": spectrum.n_padded,
        "power_loglog_slope": slope.beta,
        "slope_ci": [slope.beta_ci.0, slope.beta_ci.1],
        "intercept": slope.alpha,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&summary)?);
    match slope_out {
        Some(path) => std::fs::write(path, text)?,
        None => eprint!("{text}"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_report(
    input: &Path,
    out_dir: &Path,
    config: AnalysisConfig,
    series: Vec<String>,
) -> anyhow::Result<()> {
    let output = run_pipeline(&config, input)?;
    let selected = if series.is_empty() {
        output.series.iter().map(|s| s.label.clone()).collect()
    } else {
        series
    };
    let files = emit_plot_data(&output, &selected, out_dir)?;
    for w in &output.report.warnings {
        eprintln!("warning: {w}");
    }
    for c in &output.report.classifications {
        eprintln!(
            "{:>6}: D_s = {:.5} +/- {:.5}  -> {}",
            c.label,
            output
                .report
                .series
                .iter()
                .find(|s| s.label == c.label)
                .map(|s| s.fractal.d_s)
                .unwrap_or(f64::NAN),
            output
                .report
                .series
                .iter()
                .find(|s| s.label == c.label)
                .map(|s| s.fractal.var_ds.sqrt())
                .unwrap_or(f64::NAN),
            match c.verdict {
                walkscan_core::pipeline::SeriesClass::RandomWalkLike => "random-walk-like",
                walkscan_core::pipeline::SeriesClass::WhiteLike => "white-like",
                walkscan_core::pipeline::SeriesClass::Other => "other",
                walkscan_core::pipeline::SeriesClass::Ambiguous => "ambiguous",
            }
        );
    }
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Ingest {
            input,
            out,
            log,
            gap_intervals,
            new_year_threshold,
            schema,
        } => cmd_ingest(
            &input,
            &out,
            log.as_deref(),
            gap_intervals.into(),
            new_year_threshold,
            &schema.to_schema(),
        ),
        Command::Analyze {
            input,
            format,
            gap_intervals,
            new_year_threshold,
            schema,
        } => cmd_analyze(
            &input,
            format,
            &schema.to_schema(),
            gap_intervals.into(),
            new_year_threshold,
        ),
        Command::Calibrate {
            kind,
            m,
            n,
            seed,
            stream_base,
            out,
        } => cmd_calibrate(kind.into(), m, n, seed, stream_base, out.as_deref()),
        Command::Compare { a, b, alpha } => cmd_compare(&a, &b, alpha),
        Command::Simulate {
            kind,
            n,
            m,
            sigma,
            seed,
            stream_base,
            out,
        } => cmd_simulate(kind, n, m, sigma, seed, stream_base, out.as_deref()),
        Command::Spectrum {
            input,
            column,
            window,
            out,
            slope_out,
            gap_intervals,
            new_year_threshold,
            schema,
        } => cmd_spectrum(
            &input,
            &column,
            window.into(),
            out.as_deref(),
            slope_out.as_deref(),
            &schema.to_schema(),
            gap_intervals.into(),
            new_year_threshold,
        ),
        Command::Report {
            input,
            out_dir,
            seed,
            stream_base,
            m,
            alpha,
            window,
            gap_intervals,
            new_year_threshold,
            series,
            schema,
        } => cmd_report(
            &input,
            &out_dir,
            AnalysisConfig {
                seed,
                stream_base,
                calibration_m: m,
                alpha,
                window: window.into(),
                gap_mode: gap_intervals.into(),
                new_year_threshold,
                schema: schema.to_schema(),
            },
            series,
        ),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let degenerate = err
                .downcast_ref::<Error>()
                .map(Error::is_degeneracy)
                .unwrap_or(false);
            if degenerate {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
