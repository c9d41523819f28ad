//! Synthetic hospital fixtures.
//!
//! Real admission ledgers are not redistributable, so a seeded stand-in at
//! the same scale (192 beds, ~1300 days) ships with the tool: occupancy is
//! a bounded integer random walk driven by the daily admission-discharge
//! imbalance, optionally with the two classic export artefacts baked in
//! (year-boundary spikes and a nine-day hole).

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::ingest::HospitalBundle;
use crate::rng::{Mt19937, NormalSource};
use crate::series::TimeSeries;

/// Stream ids reserved for fixture generation, far away from the
/// calibration streams.
const STREAM_NET: u64 = 9101;
const STREAM_EXTRA: u64 = 9102;
const STREAM_UNITS: u64 = 9103;

/// Clean real-valued conserving bundle: occupancy is exactly the running
/// sum of the admission-discharge imbalance, whose innovations are unit
/// Gaussians. No artefacts, no rounding.
pub fn conserving_bundle(n: usize, seed: u64) -> HospitalBundle {
    let mut net_src = NormalSource::new(Mt19937::seed(seed, STREAM_NET));
    let mut extra = Mt19937::seed(seed, STREAM_EXTRA);

    let net: Vec<f64> = (0..n).map(|_| net_src.draw()).collect();
    let mut inp = Vec::with_capacity(n);
    inp.push(150.0);
    for i in 1..n {
        inp.push(inp[i - 1] + net[i]);
    }
    let adm: Vec<f64> = net
        .iter()
        .map(|v| 6.0 + v.abs() + extra.uniform01())
        .collect();
    let dis: Vec<f64> = adm.iter().zip(&net).map(|(a, v)| a - v).collect();

    let t0 = crate::series::synthetic_epoch();
    HospitalBundle {
        adm: TimeSeries::new("Adm", t0, adm),
        dis: TimeSeries::new("Dis", t0, dis),
        inp: TimeSeries::new("InP", t0, inp),
        units: BTreeMap::new(),
        bed_capacity: 192.0,
        gaps: Vec::new(),
        warnings: Vec::new(),
    }
}

fn push_row(out: &mut String, date: NaiveDate, cells: &[f64]) {
    out.push_str(&date.format("%Y-%m-%d").to_string());
    for c in cells {
        out.push(',');
        out.push_str(&format!("{c}"));
    }
    out.push('\n');
}

/// Integer-valued demo export at the published scale: 1329 days from
/// 2014-05-01, 192 beds, two service units, a nine-day hole in 2014 and
/// corrupted January-1 totals in 2015 and 2016.
pub fn demo_hospital_csv(seed: u64) -> String {
    let n = 1329usize;
    let t0 = NaiveDate::from_ymd_opt(2014, 5, 1).unwrap();
    let mut net_src = NormalSource::new(Mt19937::seed(seed, STREAM_NET));
    let mut extra = Mt19937::seed(seed, STREAM_EXTRA);
    let mut unit_src = NormalSource::new(Mt19937::seed(seed, STREAM_UNITS));

    // continuous walk mapped onto the occupancy band and quantized to whole
    // patients; the affine map preserves the walk structure and the
    // rounding reproduces the heavy ties of a narrow integer census
    let mut walk = Vec::with_capacity(n);
    let mut acc = 0.0;
    for _ in 0..n {
        acc += net_src.draw();
        walk.push(acc);
    }
    let w_min = walk.iter().cloned().fold(f64::INFINITY, f64::min);
    let w_max = walk.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let occupancy: Vec<f64> = walk
        .iter()
        .map(|w| 104.0 + ((w - w_min) / (w_max - w_min) * 82.0).round())
        .collect();

    let mut fru = 24.0f64;
    let mut ccu = 62.0f64;

    let mut out = String::from("date,adm,dis,inp,fru_inp,fru_los,ccu_inp,ccu_los\n");
    for i in 0..n {
        let date = t0 + chrono::Days::new(i as u64);

        let level = occupancy[i];
        let step = if i == 0 {
            0.0
        } else {
            level - occupancy[i - 1]
        };

        let base = (extra.uniform01() * 7.0).floor();
        let mut adm = step.max(0.0) + base;
        let mut dis = adm - step;

        fru = (fru + unit_src.draw().round()).clamp(6.0, 40.0);
        ccu = (ccu + unit_src.draw().round()).clamp(30.0, 90.0);
        let fru_los = (fru * (25.0 + 2.0 * unit_src.draw())).round();
        let ccu_los = (ccu * (55.0 + 3.0 * unit_src.draw())).round();

        // nine-day export hole, 2014-05-29 through 2014-06-06
        if (28..=36).contains(&i) {
            continue;
        }
        // year-boundary counter bug
        if date == NaiveDate::from_ymd_opt(2015, 1, 1).unwrap() {
            adm = 950.0;
        }
        if date == NaiveDate::from_ymd_opt(2016, 1, 1).unwrap() {
            dis = 931.0;
        }

        push_row(
            &mut out,
            date,
            &[adm, dis, level, fru, fru_los, ccu, ccu_los],
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest;

    #[test]
    fn conserving_bundle_identity_holds() {
        let bundle = conserving_bundle(300, 20260810);
        let net = ingest::daily_net(&bundle.adm, &bundle.dis).unwrap();
        let dinp = ingest::difference(&bundle.inp).unwrap();
        for i in 1..300 {
            assert!((dinp.values[i] - net.values[i]).abs() < 1e-9, "day {i}");
        }
    }

    #[test]
    fn demo_csv_is_deterministic_and_holed() {
        let a = demo_hospital_csv(20260810);
        let b = demo_hospital_csv(20260810);
        assert_eq!(a, b);
        assert_ne!(a, demo_hospital_csv(1));
        // 1329 days minus the 9 missing rows, plus header
        assert_eq!(a.lines().count(), 1 + 1329 - 9);
        assert!(a.contains("2015-01-01,950"));
        assert!(!a.contains("2014-05-29"));
    }
}
