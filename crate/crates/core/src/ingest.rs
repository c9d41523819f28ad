//! Loading daily operational series and building derived sequences.
//!
//! The corrections applied here mirror the quirks of real export pipelines:
//! a year-boundary counter bug that dumps absurd totals on January 1, and
//! holes in the export that are closed by spreading the bracketing change
//! evenly over the missing days. Every modification is logged.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{is_missing, TimeSeries, MISSING};

/// One calendar day of hospital-wide counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub admissions: f64,
    pub discharges: f64,
    pub inpatients: f64,
}

/// Column mapping and parsing options for [`load_csv`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub date: String,
    pub adm: Option<String>,
    pub dis: Option<String>,
    pub inp: Option<String>,
    /// Field delimiter, comma by default.
    pub delimiter: u8,
    /// Accept mm/dd/yyyy dates instead of ISO-8601.
    pub mdy_dates: bool,
    pub bed_capacity: f64,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            date: "date".into(),
            adm: Some("adm".into()),
            dis: Some("dis".into()),
            inp: Some("inp".into()),
            delimiter: b',',
            mdy_dates: false,
            bed_capacity: 192.0,
        }
    }
}

impl CsvSchema {
    fn parse_date(&self, text: &str) -> Option<NaiveDate> {
        let fmt = if self.mdy_dates {
            "%m/%d/%Y"
        } else {
            "%Y-%m-%d"
        };
        NaiveDate::parse_from_str(text.trim(), fmt).ok()
    }
}

/// Contiguous block of missing days, as inclusive indices into the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub start: usize,
    pub end: usize,
}

impl Gap {
    /// Number of missing days; never zero by construction.
    pub fn missing_days(&self) -> usize {
        self.end - self.start + 1
    }
}

/// Per-unit series: inpatients and mean length of stay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSeries {
    pub inpatients: TimeSeries,
    pub mean_stay: TimeSeries,
}

/// Everything loaded from one export file. All member series share `t0` and
/// length; dates are contiguous, with missing days carried as markers plus a
/// [`Gap`] entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HospitalBundle {
    pub adm: TimeSeries,
    pub dis: TimeSeries,
    pub inp: TimeSeries,
    pub units: BTreeMap<String, UnitSeries>,
    pub bed_capacity: f64,
    pub gaps: Vec<Gap>,
    /// Suspicious but tolerated raw values (occupancy above capacity,
    /// negative counts). Raw data may contain artefacts; they are corrected
    /// downstream, not rejected here.
    pub warnings: Vec<String>,
}

impl HospitalBundle {
    /// Row view over the hospital-wide columns.
    pub fn records(&self) -> impl Iterator<Item = DailyRecord> + '_ {
        (0..self.inp.len()).map(|i| DailyRecord {
            date: self.inp.date_at(i),
            admissions: self.adm.values[i],
            discharges: self.dis.values[i],
            inpatients: self.inp.values[i],
        })
    }
}

/// One logged modification, serialized as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub index: usize,
    pub date: NaiveDate,
    pub series: String,
    pub old: f64,
    pub new: f64,
    pub rule: String,
}

/// How the daily change assigned to a gap is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// Divide the bracketing change by the number of missing days.
    MissingDays,
    /// Divide by the number of one-day intervals spanning the hole
    /// (missing days + 1), which makes the exit change equal the fill.
    SpanIntervals,
}

/// Load a daily export. Dates must be strictly increasing; holes are kept as
/// missing markers and reported in `gaps` so [`fill_gap`] can close them.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<HospitalBundle> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);

    let date_col = col(&schema.date).ok_or_else(|| {
        Error::InvalidParameter(format!("date column '{}' not found", schema.date))
    })?;
    let adm_col = schema.adm.as_deref().and_then(col);
    let dis_col = schema.dis.as_deref().and_then(col);
    let inp_col = schema.inp.as_deref().and_then(col);
    if adm_col.is_none() && dis_col.is_none() && inp_col.is_none() {
        return Err(Error::InvalidParameter(
            "schema must name at least one value column present in the file".into(),
        ));
    }

    // unit columns follow the "<label>_inp" / "<label>_los" convention
    let mut unit_cols: BTreeMap<String, (Option<usize>, Option<usize>)> = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        if let Some(label) = h.strip_suffix("_inp") {
            if Some(h) != schema.inp.as_deref() {
                unit_cols.entry(label.to_string()).or_default().0 = Some(i);
            }
        } else if let Some(label) = h.strip_suffix("_los") {
            unit_cols.entry(label.to_string()).or_default().1 = Some(i);
        }
    }

    let parse_value = |field: &str, row: usize, name: &str| -> Result<f64> {
        let t = field.trim();
        if t.is_empty() {
            return Ok(MISSING);
        }
        t.parse::<f64>().map_err(|_| Error::MalformedRow {
            row,
            message: format!("cannot parse '{t}' in column '{name}'"),
        })
    };

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut adm: Vec<f64> = Vec::new();
    let mut dis: Vec<f64> = Vec::new();
    let mut inp: Vec<f64> = Vec::new();
    let mut units: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut gaps: Vec<Gap> = Vec::new();

    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 2; // 1-based, counting the header line
        let date_text = record.get(date_col).unwrap_or("");
        let date = schema.parse_date(date_text).ok_or(Error::MalformedRow {
            row,
            message: format!("cannot parse date '{date_text}'"),
        })?;

        if let Some(prev) = dates.last().copied() {
            let jump = (date - prev).num_days();
            if jump <= 0 {
                return Err(Error::NonMonotoneDates { row, date });
            }
            if jump > 1 {
                // hole: insert marker days so the bundle stays contiguous
                let start = dates.len();
                for k in 1..jump {
                    dates.push(prev + chrono::Days::new(k as u64));
                    adm.push(MISSING);
                    dis.push(MISSING);
                    inp.push(MISSING);
                    for (v_inp, v_los) in units.values_mut() {
                        v_inp.push(MISSING);
                        v_los.push(MISSING);
                    }
                }
                gaps.push(Gap {
                    start,
                    end: dates.len() - 1,
                });
            }
        }

        let get = |c: Option<usize>, name: &str| -> Result<f64> {
            match c {
                Some(i) => parse_value(record.get(i).unwrap_or(""), row, name),
                None => Ok(MISSING),
            }
        };
        dates.push(date);
        adm.push(get(adm_col, "adm")?);
        dis.push(get(dis_col, "dis")?);
        inp.push(get(inp_col, "inp")?);
        for (label, (c_inp, c_los)) in &unit_cols {
            let entry = units.entry(label.clone()).or_default();
            entry.0.push(get(*c_inp, label)?);
            entry.1.push(get(*c_los, label)?);
        }
    }

    if dates.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two rows of data".into(),
        ));
    }
    let t0 = dates[0];

    let mut warnings = Vec::new();
    for (i, v) in inp.iter().enumerate() {
        if !is_missing(*v) && *v > schema.bed_capacity {
            warnings.push(format!(
                "inpatients {} above bed capacity {} on {}",
                v, schema.bed_capacity, dates[i]
            ));
        }
    }
    for (name, vals) in [("adm", &adm), ("dis", &dis), ("inp", &inp)] {
        for (i, v) in vals.iter().enumerate() {
            if !is_missing(*v) && *v < 0.0 {
                warnings.push(format!("negative {} value {} on {}", name, v, dates[i]));
            }
        }
    }

    let unit_map = units
        .into_iter()
        .map(|(label, (v_inp, v_los))| {
            let inpatients = TimeSeries::new(format!("{label}_inp"), t0, v_inp);
            let stay_sums = TimeSeries::new(format!("{label}_los"), t0, v_los);
            let mean = mean_stay(&stay_sums, &inpatients)?;
            Ok((
                label,
                UnitSeries {
                    inpatients,
                    mean_stay: mean,
                },
            ))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    Ok(HospitalBundle {
        adm: TimeSeries::new("Adm", t0, adm),
        dis: TimeSeries::new("Dis", t0, dis),
        inp: TimeSeries::new("InP", t0, inp),
        units: unit_map,
        bed_capacity: schema.bed_capacity,
        gaps,
        warnings,
    })
}

/// Replace implausible January-1 totals by the mean of December 31 and
/// January 2. Only values strictly above `threshold` are touched.
pub fn correct_new_year(
    series: &TimeSeries,
    threshold: f64,
) -> Result<(TimeSeries, Vec<Correction>)> {
    if series.len() < 3 {
        return Err(Error::InvalidParameter(
            "new-year correction needs at least 3 points".into(),
        ));
    }
    let mut out = series.clone();
    let mut log = Vec::new();
    for i in 0..series.len() {
        let date = series.date_at(i);
        if !(date.month() == 1 && date.day() == 1) {
            continue;
        }
        let v = series.values[i];
        if is_missing(v) || v <= threshold {
            continue;
        }
        if i == 0 || i + 1 >= series.len() {
            return Err(Error::BoundaryCorrection { index: i });
        }
        // a missing neighbour (hole next to the outlier) cannot average
        if is_missing(series.values[i - 1]) || is_missing(series.values[i + 1]) {
            return Err(Error::BoundaryCorrection { index: i });
        }
        let replacement = (series.values[i - 1] + series.values[i + 1]) / 2.0;
        out.values[i] = replacement;
        log.push(Correction {
            index: i,
            date,
            series: series.label.clone(),
            old: v,
            new: replacement,
            rule: "new-year-average".into(),
        });
    }
    Ok((out, log))
}

/// Close a hole by assigning every missing day the same daily change and
/// cumulating levels from the last known value before the gap.
pub fn fill_gap(
    series: &TimeSeries,
    gap_start: usize,
    gap_end: usize,
    mode: GapMode,
) -> Result<(TimeSeries, Vec<Correction>)> {
    if gap_end < gap_start {
        return Err(Error::InvalidParameter("gap_end before gap_start".into()));
    }
    if gap_start == 0 || gap_end + 1 >= series.len() {
        return Err(Error::GapAtBoundary);
    }
    let before = series.values[gap_start - 1];
    let after = series.values[gap_end + 1];
    if is_missing(before) || is_missing(after) {
        return Err(Error::GapAtBoundary);
    }
    let g = (gap_end - gap_start + 1) as f64;
    let denominator = match mode {
        GapMode::MissingDays => g,
        GapMode::SpanIntervals => g + 1.0,
    };
    let change = (after - before) / denominator;

    let mut out = series.clone();
    let mut log = Vec::new();
    for (j, i) in (gap_start..=gap_end).enumerate() {
        let level = before + change * (j as f64 + 1.0);
        log.push(Correction {
            index: i,
            date: series.date_at(i),
            series: series.label.clone(),
            old: series.values[i],
            new: level,
            rule: "gap-fill".into(),
        });
        out.values[i] = level;
    }
    Ok((out, log))
}

/// Daily differences: `out[0] = 0`, `out[t] = y[t] - y[t-1]`.
pub fn difference(series: &TimeSeries) -> Result<TimeSeries> {
    if series.len() < 2 {
        return Err(Error::InvalidParameter(
            "difference needs at least 2 points".into(),
        ));
    }
    let mut values = Vec::with_capacity(series.len());
    values.push(0.0);
    for i in 1..series.len() {
        values.push(series.values[i] - series.values[i - 1]);
    }
    Ok(series.derived(format!("D{}", series.label), values))
}

/// Same-day admissions minus discharges. The sign is chosen so that the
/// cumulative sum tracks occupancy.
pub fn daily_net(adm: &TimeSeries, dis: &TimeSeries) -> Result<TimeSeries> {
    if !adm.aligned_with(dis) {
        return Err(Error::Misaligned(format!(
            "'{}' ({} from {}) vs '{}' ({} from {})",
            adm.label,
            adm.len(),
            adm.t0,
            dis.label,
            dis.len(),
            dis.t0
        )));
    }
    let values = adm
        .values
        .iter()
        .zip(&dis.values)
        .map(|(a, d)| a - d)
        .collect();
    Ok(adm.derived("DDiAd", values))
}

/// Rebuild a level series from daily net changes:
/// `walk[0] = offset`, `walk[i] = walk[i-1] + net[i]` for `i >= 1`.
/// The first net value is not consumed.
pub fn reconstruct_walk(net: &TimeSeries, offset: f64) -> TimeSeries {
    let mut values = Vec::with_capacity(net.len());
    values.push(offset);
    for i in 1..net.len() {
        values.push(values[i - 1] + net.values[i]);
    }
    net.derived(format!("Xi({})", net.label), values)
}

/// Mean stay per day: `stay_sums[d] / counts[d]`. Days with a zero count get
/// the missing marker instead of a division blow-up.
pub fn mean_stay(stay_sums: &TimeSeries, patient_counts: &TimeSeries) -> Result<TimeSeries> {
    if !stay_sums.aligned_with(patient_counts) {
        return Err(Error::Misaligned(format!(
            "'{}' vs '{}'",
            stay_sums.label, patient_counts.label
        )));
    }
    let mut values = Vec::with_capacity(stay_sums.len());
    for (i, (&s, &c)) in stay_sums
        .values
        .iter()
        .zip(&patient_counts.values)
        .enumerate()
    {
        if is_missing(s) || is_missing(c) {
            values.push(MISSING);
        } else if c < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "negative patient count {c} at index {i}"
            )));
        } else if c == 0.0 {
            values.push(MISSING);
        } else {
            values.push(s / c);
        }
    }
    Ok(stay_sums.derived(format!("MeanStay({})", stay_sums.label), values))
}

/// Serialize corrections as JSON lines, one record per modification.
pub fn corrections_to_jsonl(corrections: &[Correction]) -> Result<String> {
    let mut out = String::new();
    for c in corrections {
        out.push_str(&serde_json::to_string(c)?);
        out.push('\n');
    }
    Ok(out)
}
