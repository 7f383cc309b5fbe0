//! CSV and JSON writers for every report, plus the feature-table reader.
//!
//! Writers take an optional comment emitted as a leading `# ...` line, which
//! the CLI uses to stamp each file with its run hash. Readers skip such lines.

use std::io::{Read, Write};

use serde::Serialize;

use crate::attitude::{EulerAngles, EulerSeries};
use crate::features::{GaitFeatureVector, FEATURE_NAMES};
use crate::ml::ClassificationReport;
use crate::pipeline::TrialFeatures;
use crate::segmentation::GaitEvent;
use crate::stats::{RadarReport, StatsReport};
use crate::{Error, Result};

fn writer<W: Write>(mut out: W, comment: Option<&str>) -> Result<csv::Writer<W>> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    Ok(csv::Writer::from_writer(out))
}

fn num(v: f64) -> String {
    v.to_string()
}

/// `t, roll_deg, pitch_deg, yaw_deg, innovation_norm` (innovation in rad).
pub fn write_attitude_csv<W: Write>(out: W, euler: &EulerSeries, comment: Option<&str>) -> Result<()> {
    let mut w = writer(out, comment)?;
    w.write_record(["t", "roll_deg", "pitch_deg", "yaw_deg", "innovation_norm"])?;
    for ((t, e), nu) in euler.t.iter().zip(&euler.angles).zip(&euler.innovation_norm) {
        w.write_record([*t, e.roll.to_degrees(), e.pitch.to_degrees(), e.yaw.to_degrees(), *nu].map(num))?;
    }
    w.flush()?;
    Ok(())
}

/// Ground-truth attitude, `t, roll, pitch, yaw` in radians.
pub fn write_truth_csv<W: Write>(out: W, t: &[f64], euler: &[EulerAngles], comment: Option<&str>) -> Result<()> {
    let mut w = writer(out, comment)?;
    w.write_record(["t", "roll", "pitch", "yaw"])?;
    for (t, e) in t.iter().zip(euler) {
        w.write_record([*t, e.roll, e.pitch, e.yaw].map(num))?;
    }
    w.flush()?;
    Ok(())
}

/// `t, kind`.
pub fn write_events_csv<W: Write>(out: W, events: &[GaitEvent], comment: Option<&str>) -> Result<()> {
    let mut w = writer(out, comment)?;
    w.write_record(["t", "kind"])?;
    for e in events {
        w.write_record([num(e.t), e.kind.as_str().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `subject_id, leg, group`, then the twelve features.
pub fn write_features_csv<W: Write>(out: W, rows: &[TrialFeatures], comment: Option<&str>) -> Result<()> {
    let mut w = writer(out, comment)?;
    w.write_record(["subject_id", "leg", "group"].into_iter().chain(FEATURE_NAMES))?;
    for r in rows {
        let head = [r.subject_id.clone(), r.leg.as_str().into(), r.group.as_str().into()];
        w.write_record(head.into_iter().chain(r.features.to_array().map(num)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features_csv<R: Read>(input: R) -> Result<Vec<TrialFeatures>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse { line: 1, msg: format!("feature table lacks column '{name}'") })
    };
    let (sid, leg, group) = (col("subject_id")?, col("leg")?, col("group")?);
    let features = FEATURE_NAMES.iter().map(|n| col(n)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse { line, msg: "short row".into() });
        let mut values = [0.0; 12];
        for (v, &i) in values.iter_mut().zip(&features) {
            let s = field(i)?;
            *v = s.trim().parse().map_err(|_| Error::Parse { line, msg: format!("'{s}' is not a number") })?;
        }
        out.push(TrialFeatures {
            subject_id: field(sid)?.to_string(),
            leg: field(leg)?.parse().map_err(|e: Error| Error::Parse { line, msg: e.to_string() })?,
            group: field(group)?.parse().map_err(|e: Error| Error::Parse { line, msg: e.to_string() })?,
            features: GaitFeatureVector::from_array(values),
        });
    }
    Ok(out)
}

/// One row per feature: mean and SD per summarised group, then the p-value
/// and test name of every comparison.
pub fn write_stats_csv<W: Write>(out: W, report: &StatsReport, comment: Option<&str>) -> Result<()> {
    let mut w = writer(out, comment)?;
    let mut header = vec!["feature".to_string()];
    for g in &report.groups {
        header.push(format!("{}_mean", g.group));
        header.push(format!("{}_sd", g.group));
    }
    for c in &report.comparisons {
        header.push(format!("p_{c}"));
        header.push(format!("test_{c}"));
    }
    w.write_record(&header)?;
    for (j, f) in report.features.iter().enumerate() {
        let mut row = vec![f.clone()];
        for g in &report.groups {
            row.push(num(g.mean[j]));
            row.push(num(g.sd[j]));
        }
        for c in &report.comparisons {
            let cell = report.cell(f, c);
            row.push(cell.map_or(String::new(), |c| num(c.p)));
            row.push(cell.map_or(String::new(), |c| c.test.clone()));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `group, OFF`, then the standardized mean of every feature.
pub fn write_radar_csv<W: Write>(out: W, radar: &RadarReport, comment: Option<&str>) -> Result<()> {
    let mut w = writer(out, comment)?;
    w.write_record(["group".to_string(), "OFF".to_string()].into_iter().chain(radar.features.iter().cloned()))?;
    for (g, means) in &radar.means {
        w.write_record([g.clone(), num(radar.offsets[g])].into_iter().chain(means.iter().map(|&v| num(v))))?;
    }
    w.flush()?;
    Ok(())
}

/// `rank, feature, importance`.
pub fn write_importance_csv<W: Write>(out: W, ranking: &[(String, f64)], comment: Option<&str>) -> Result<()> {
    let mut w = writer(out, comment)?;
    w.write_record(["rank", "feature", "importance"])?;
    for (i, (f, v)) in ranking.iter().enumerate() {
        w.write_record([(i + 1).to_string(), f.clone(), num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// `task, classifier, accuracy, precision, recall, f1` (fold means).
pub fn write_classification_csv<W: Write>(
    out: W,
    reports: &[ClassificationReport],
    comment: Option<&str>,
) -> Result<()> {
    let mut w = writer(out, comment)?;
    w.write_record(["task", "classifier", "accuracy", "precision", "recall", "f1"])?;
    for r in reports {
        let m = r.aggregate;
        let head = [r.task.as_str().to_string(), r.classifier.as_str().to_string()];
        w.write_record(head.into_iter().chain([m.accuracy, m.precision, m.recall, m.f1].map(num)))?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
