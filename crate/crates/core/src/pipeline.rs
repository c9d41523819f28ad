//! End-to-end orchestration: load, correct, derive, estimate, calibrate,
//! classify, report.
//!
//! The reference ensembles are always simulated at the analyzed series
//! length; dimension estimates at different lengths are not comparable, so
//! the ruler is rebuilt per input rather than cached across datasets.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fractal::{
    calibrate, compare_ds, estimate, CalibrationEnsemble, FractalEstimate, SignificanceResult,
};
use crate::ingest::{
    correct_new_year, daily_net, difference, fill_gap, load_csv, reconstruct_walk, Correction,
    CsvSchema, GapMode, HospitalBundle,
};
use crate::noise::NoiseKind;
use crate::series::{is_missing, TimeSeries};
use crate::spectral::{analyze_series, Spectrum, WindowKind};
use crate::stats::{
    hl_location, jarque_bera, jarque_bera_gel, runs_test, smirnov_test, LocationEstimate,
    RunsResult,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub seed: u64,
    pub stream_base: u64,
    /// Traces per calibration ensemble.
    pub calibration_m: usize,
    pub alpha: f64,
    pub window: WindowKind,
    pub gap_mode: GapMode,
    /// Defaults to twice the bed capacity when unset.
    pub new_year_threshold: Option<f64>,
    pub schema: CsvSchema,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            seed: 20260810,
            stream_base: 0,
            calibration_m: 100,
            alpha: 0.05,
            window: WindowKind::Hann,
            gap_mode: GapMode::MissingDays,
            new_year_threshold: None,
            schema: CsvSchema::default(),
        }
    }
}

impl AnalysisConfig {
    fn validate(&self) -> Result<()> {
        if self.calibration_m < 2 {
            return Err(Error::InvalidParameter("calibration needs M >= 2".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0 / 6.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1/6], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Hex digest of the canonical JSON encoding.
    pub fn hash(&self) -> Result<String> {
        let encoded = serde_json::to_string(self)?;
        let digest = Sha256::digest(encoded.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormalityBlock {
    pub jb_stat: f64,
    pub jb_p: f64,
    pub rjb_stat: f64,
    pub rjb_p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub label: String,
    pub n: usize,
    pub location: LocationEstimate,
    pub runs: RunsResult,
    pub normality: NormalityBlock,
    pub fractal: FractalEstimate,
    pub spectral_slope: f64,
    pub spectral_slope_ci: (f64, f64),
}

/// Classification against the two reference ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesClass {
    /// Indistinguishable from the Brownian ruler, distinguishable from the
    /// white one.
    RandomWalkLike,
    /// The reverse.
    WhiteLike,
    /// Distinguishable from both.
    Other,
    /// Distinguishable from neither.
    Ambiguous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub label: String,
    pub vs_white: SignificanceResult,
    pub vs_brownian: SignificanceResult,
    pub verdict: SeriesClass,
}

pub fn classify(
    vs_white: &SignificanceResult,
    vs_brownian: &SignificanceResult,
    alpha: f64,
) -> SeriesClass {
    match (
        vs_white.significant_at(alpha),
        vs_brownian.significant_at(alpha),
    ) {
        (true, false) => SeriesClass::RandomWalkLike,
        (false, true) => SeriesClass::WhiteLike,
        (true, true) => SeriesClass::Other,
        (false, false) => SeriesClass::Ambiguous,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    #[serde(flatten)]
    pub result: SignificanceResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub kind: NoiseKind,
    pub m: usize,
    pub n: usize,
    pub master_seed: u64,
    pub stream_base: u64,
    pub mean_ds: f64,
    pub var_between: f64,
    pub var_total: f64,
}

impl From<&CalibrationEnsemble> for EnsembleSummary {
    fn from(e: &CalibrationEnsemble) -> Self {
        Self {
            kind: e.kind,
            m: e.m,
            n: e.n,
            master_seed: e.master_seed,
            stream_base: e.stream_base,
            mean_ds: e.mean_ds,
            var_between: e.var_between,
            var_total: e.var_total,
        }
    }
}

/// Consistency check between the occupancy changes and the rebuilt walk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkCheck {
    /// Smirnov distance and probability between the daily occupancy change
    /// and the daily admission-discharge imbalance.
    pub smirnov_d: f64,
    pub smirnov_p: f64,
    /// Dimension comparison between occupancy and the walk rebuilt from the
    /// imbalance.
    pub inp_vs_walk: SignificanceResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream_base: u64,
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub provenance: Provenance,
    pub warnings: Vec<String>,
    pub corrections: Vec<Correction>,
    pub series: Vec<SeriesSummary>,
    pub classifications: Vec<Classification>,
    pub pairwise: Vec<PairComparison>,
    pub walk_check: WalkCheck,
    pub white_ensemble: EnsembleSummary,
    pub brownian_ensemble: EnsembleSummary,
}

/// Report plus the data needed to draw it.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: AnalysisReport,
    pub series: Vec<TimeSeries>,
    pub spectra: Vec<(String, Spectrum)>,
    pub white: CalibrationEnsemble,
    pub brownian: CalibrationEnsemble,
}

fn correct_series(
    series: &TimeSeries,
    bundle: &HospitalBundle,
    config: &AnalysisConfig,
    corrections: &mut Vec<Correction>,
) -> Result<TimeSeries> {
    let threshold = config
        .new_year_threshold
        .unwrap_or(2.0 * bundle.bed_capacity);
    let (mut fixed, log) = correct_new_year(series, threshold)
        .map_err(|e| e.in_series(&series.label, "year-boundary correction of"))?;
    corrections.extend(log);
    for gap in &bundle.gaps {
        let (filled, log) = fill_gap(&fixed, gap.start, gap.end, config.gap_mode)
            .map_err(|e| e.in_series(&series.label, "gap fill of"))?;
        corrections.extend(log);
        fixed = filled;
    }
    if fixed.values.iter().copied().any(is_missing) {
        return Err(Error::Degenerate(format!(
            "series '{}' still has missing values after corrections",
            fixed.label
        )));
    }
    Ok(fixed)
}

/// Run the full analysis on an already loaded bundle.
pub fn run_pipeline_on_bundle(
    config: &AnalysisConfig,
    bundle: &HospitalBundle,
) -> Result<PipelineOutput> {
    config.validate()?;
    for (name, series) in [
        ("adm", &bundle.adm),
        ("dis", &bundle.dis),
        ("inp", &bundle.inp),
    ] {
        if series.values.iter().copied().all(is_missing) {
            return Err(Error::InvalidParameter(format!(
                "the full report needs admissions, discharges and inpatients; \
                 column '{name}' is absent or empty"
            )));
        }
    }
    let mut corrections = Vec::new();

    let inp = correct_series(&bundle.inp, bundle, config, &mut corrections)?;
    let adm = correct_series(&bundle.adm, bundle, config, &mut corrections)?;
    let dis = correct_series(&bundle.dis, bundle, config, &mut corrections)?;

    let dinp = difference(&inp)?;
    let ddiad = daily_net(&adm, &dis)?;
    let mut xi = reconstruct_walk(&ddiad, 0.0);
    xi.label = "Xi".into();

    let observed = vec![inp, adm, dis, dinp, ddiad, xi];
    let n = observed[0].len();

    // reference rulers, one stream per trace, rebuilt at the observed length
    let m = config.calibration_m;
    let white = calibrate(NoiseKind::White, m, n, config.seed, config.stream_base)?;
    let brownian = calibrate(
        NoiseKind::Brownian,
        m,
        n,
        config.seed,
        config.stream_base + m as u64,
    )?;

    let mut summaries = Vec::new();
    let mut estimates: BTreeMap<String, FractalEstimate> = BTreeMap::new();
    let mut spectra = Vec::new();
    for series in &observed {
        let ctx = |step: &'static str| {
            let label = series.label.clone();
            move |e: Error| e.in_series(&label, step)
        };
        let fractal = estimate(series).map_err(ctx("fractal dimension of"))?;
        estimates.insert(series.label.clone(), fractal);
        let (spectrum, slope) =
            analyze_series(series, config.window).map_err(ctx("spectral density of"))?;
        let (jb_stat, jb_p) = jarque_bera(&series.values).map_err(ctx("normality of"))?;
        let (rjb_stat, rjb_p) =
            jarque_bera_gel(&series.values).map_err(ctx("robust normality of"))?;
        summaries.push(SeriesSummary {
            label: series.label.clone(),
            n: series.len(),
            location: hl_location(&series.values).map_err(ctx("location of"))?,
            runs: runs_test(&series.values).map_err(ctx("runs test of"))?,
            normality: NormalityBlock {
                jb_stat,
                jb_p,
                rjb_stat,
                rjb_p,
            },
            fractal,
            spectral_slope: slope.beta,
            spectral_slope_ci: slope.beta_ci,
        });
        spectra.push((series.label.clone(), spectrum));
    }

    let mut classifications = Vec::new();
    for series in &observed {
        let est = &estimates[&series.label];
        let vs_white = compare_ds(est, &white)?;
        let vs_brownian = compare_ds(est, &brownian)?;
        classifications.push(Classification {
            label: series.label.clone(),
            verdict: classify(&vs_white, &vs_brownian, config.alpha),
            vs_white,
            vs_brownian,
        });
    }

    // every pair of observed series and rulers, upper triangle
    let mut pairwise = Vec::new();
    let mut columns: Vec<(String, f64, f64)> = observed
        .iter()
        .map(|s| {
            let e = &estimates[&s.label];
            (s.label.clone(), e.d_s, e.var_ds)
        })
        .collect();
    columns.push(("brownian".into(), brownian.mean_ds, brownian.var_total));
    columns.push(("white".into(), white.mean_ds, white.var_total));
    for i in 0..columns.len() {
        for j in i + 1..columns.len() {
            let result = crate::fractal::compare_ds_values(
                columns[i].1,
                columns[i].2,
                columns[j].1,
                columns[j].2,
            )?;
            pairwise.push(PairComparison {
                a: columns[i].0.clone(),
                b: columns[j].0.clone(),
                result,
            });
        }
    }

    let (smirnov_d, smirnov_p) = smirnov_test(&observed[3].values, &observed[4].values)?;
    let inp_vs_walk = compare_ds(&estimates["InP"], &estimates["Xi"])?;

    let report = AnalysisReport {
        provenance: Provenance {
            seed: config.seed,
            stream_base: config.stream_base,
            config_hash: config.hash()?,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        warnings: bundle.warnings.clone(),
        corrections,
        series: summaries,
        classifications,
        pairwise,
        walk_check: WalkCheck {
            smirnov_d,
            smirnov_p,
            inp_vs_walk,
        },
        white_ensemble: EnsembleSummary::from(&white),
        brownian_ensemble: EnsembleSummary::from(&brownian),
    };

    Ok(PipelineOutput {
        report,
        series: observed,
        spectra,
        white,
        brownian,
    })
}

/// Load a CSV export and run the full analysis.
pub fn run_pipeline(config: &AnalysisConfig, input: &Path) -> Result<PipelineOutput> {
    let bundle = load_csv(input, &config.schema)?;
    run_pipeline_on_bundle(config, &bundle)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn fmt_cell(v: f64) -> String {
    if is_missing(v) {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Write the report plus plot-ready CSV files. `selected` filters which
/// series get trace/CDF/spectrum files; when it is empty only the report
/// JSON is written. Returns the written paths.
pub fn emit_plot_data(
    output: &PipelineOutput,
    selected: &[String],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let report_path = dir.join("report.json");
    write_text(
        &report_path,
        &format!("{}\n", serde_json::to_string_pretty(&output.report)?),
    )?;
    written.push(report_path);

    if selected.is_empty() {
        return Ok(written);
    }
    let chosen: Vec<&TimeSeries> = output
        .series
        .iter()
        .filter(|s| selected.iter().any(|l| l == &s.label))
        .collect();
    if chosen.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no series match the selection {selected:?}"
        )));
    }

    // traces: one row per day, one column per selected series
    let mut traces = String::from("day,date");
    for s in &chosen {
        traces.push(',');
        traces.push_str(&s.label);
    }
    traces.push('\n');
    let n = chosen[0].len();
    for i in 0..n {
        traces.push_str(&format!("{},{}", i, chosen[0].date_at(i)));
        for s in &chosen {
            traces.push(',');
            traces.push_str(&fmt_cell(s.values[i]));
        }
        traces.push('\n');
    }
    let traces_path = dir.join("traces.csv");
    write_text(&traces_path, &traces)?;
    written.push(traces_path);

    // empirical distribution functions, long format
    let mut ecdf = String::from("label,value,cum_prob\n");
    for s in &chosen {
        let f = crate::stats::Ecdf::new(&s.values)?;
        for (x, p) in f.steps() {
            ecdf.push_str(&format!("{},{},{}\n", s.label, x, p));
        }
    }
    let ecdf_path = dir.join("ecdf.csv");
    write_text(&ecdf_path, &ecdf)?;
    written.push(ecdf_path);

    // spectra, long format
    let mut spectra = String::from("label,frequency,amplitude,power\n");
    for (label, spectrum) in &output.spectra {
        if !selected.iter().any(|l| l == label) {
            continue;
        }
        for ((f, a), p) in spectrum
            .frequencies
            .iter()
            .zip(&spectrum.amplitude)
            .zip(&spectrum.power)
        {
            spectra.push_str(&format!("{label},{f},{a},{p}\n"));
        }
    }
    let spectra_path = dir.join("spectra.csv");
    write_text(&spectra_path, &spectra)?;
    written.push(spectra_path);

    // per-trace calibration estimates, for histogram plots
    let mut ensembles = String::from("kind,trace,stream,d_s,var_ds\n");
    for ens in [&output.white, &output.brownian] {
        for (k, (d, v)) in ens.estimates.iter().zip(&ens.trace_variances).enumerate() {
            ensembles.push_str(&format!(
                "{},{},{},{},{}\n",
                ens.kind,
                k,
                ens.stream_base + k as u64,
                d,
                v
            ));
        }
    }
    let ens_path = dir.join("ensembles.csv");
    write_text(&ens_path, &ensembles)?;
    written.push(ens_path);

    Ok(written)
}
