//! Trial ingestion: CSV samples plus a key-value sidecar, normalised to SI units.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, GRAVITY};

/// Accelerometer full-scale range of the reference hardware, ±8 g.
pub const ACC_RANGE: f64 = 8.0 * GRAVITY;
/// Gyroscope full-scale range of the reference hardware, ±1000 °/s.
pub const GYRO_RANGE: f64 = 1000.0 * std::f64::consts::PI / 180.0;
pub const NOMINAL_RATE_HZ: f64 = 100.0;
/// Shortest trial accepted for analysis (phase-space reconstruction needs it).
pub const MIN_TRIAL_SECONDS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leg {
    Left,
    Right,
}

impl Leg {
    pub fn as_str(self) -> &'static str {
        match self {
            Leg::Left => "left",
            Leg::Right => "right",
        }
    }

    pub fn other(self) -> Leg {
        match self {
            Leg::Left => Leg::Right,
            Leg::Right => Leg::Left,
        }
    }
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Leg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Leg::Left),
            "right" | "r" => Ok(Leg::Right),
            other => Err(Error::Validation(format!("unknown leg '{other}'"))),
        }
    }
}

/// Gait pattern group. The numeric label is the one used by the classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "LDH_healthy_side")]
    LdhHealthySide,
    #[serde(rename = "LDH_affected_side")]
    LdhAffectedSide,
    #[serde(rename = "control")]
    Control,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::LdhHealthySide, Group::LdhAffectedSide, Group::Control];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::LdhHealthySide => "LDH_healthy_side",
            Group::LdhAffectedSide => "LDH_affected_side",
            Group::Control => "control",
        }
    }

    /// Short column code used in reports (LDHH, LDHE, H).
    pub fn code(self) -> &'static str {
        match self {
            Group::LdhHealthySide => "LDHH",
            Group::LdhAffectedSide => "LDHE",
            Group::Control => "H",
        }
    }

    pub fn label(self) -> usize {
        match self {
            Group::LdhHealthySide => 0,
            Group::LdhAffectedSide => 1,
            Group::Control => 2,
        }
    }

    pub fn from_label(label: usize) -> Option<Group> {
        Group::ALL.get(label).copied()
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "LDH_healthy_side" | "LDHH" => Ok(Group::LdhHealthySide),
            "LDH_affected_side" | "LDHE" => Ok(Group::LdhAffectedSide),
            "control" | "H" => Ok(Group::Control),
            other => Err(Error::Validation(format!("unknown group '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AccUnit {
    #[serde(rename = "g")]
    G,
    #[default]
    #[serde(rename = "m/s^2", alias = "m/s2", alias = "m/s²")]
    MetersPerSecondSquared,
}

impl AccUnit {
    /// Multiplier taking a value in this unit to m/s².
    pub fn to_si(self) -> f64 {
        match self {
            AccUnit::G => GRAVITY,
            AccUnit::MetersPerSecondSquared => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AccUnit::G => "g",
            AccUnit::MetersPerSecondSquared => "m/s^2",
        }
    }
}

impl FromStr for AccUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "g" => Ok(AccUnit::G),
            "m/s^2" | "m/s2" | "m/s²" => Ok(AccUnit::MetersPerSecondSquared),
            other => Err(Error::Validation(format!("unsupported acceleration unit '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GyroUnit {
    #[serde(rename = "deg/s", alias = "°/s")]
    DegPerSec,
    #[default]
    #[serde(rename = "rad/s")]
    RadPerSec,
}

impl GyroUnit {
    pub fn to_si(self) -> f64 {
        match self {
            GyroUnit::DegPerSec => std::f64::consts::PI / 180.0,
            GyroUnit::RadPerSec => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GyroUnit::DegPerSec => "deg/s",
            GyroUnit::RadPerSec => "rad/s",
        }
    }
}

impl FromStr for GyroUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "deg/s" | "°/s" | "dps" => Ok(GyroUnit::DegPerSec),
            "rad/s" => Ok(GyroUnit::RadPerSec),
            other => Err(Error::Validation(format!("unsupported gyroscope unit '{other}'"))),
        }
    }
}

/// What the time column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeColumn {
    #[default]
    Seconds,
    /// Integer sample index; `t = index / sample_rate_hz`.
    SampleIndex,
}

impl FromStr for TimeColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "seconds" | "s" => Ok(TimeColumn::Seconds),
            "sample_index" | "index" => Ok(TimeColumn::SampleIndex),
            other => Err(Error::Validation(format!("unknown time column kind '{other}'"))),
        }
    }
}

/// One IMU reading in SI units (m/s², rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    pub acc: [f64; 3],
    pub gyro: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub subject_id: String,
    pub leg: Leg,
    pub group: Group,
    pub sample_rate_hz: f64,
}

/// One subject-leg recording. Samples are strictly increasing in time.
#[derive(Debug, Clone, PartialEq)]
pub struct ImuTrial {
    pub meta: TrialMeta,
    samples: Vec<ImuSample>,
}

impl ImuTrial {
    pub fn new(meta: TrialMeta, samples: Vec<ImuSample>) -> Result<Self> {
        if !(meta.sample_rate_hz.is_finite() && meta.sample_rate_hz > 0.0) {
            return Err(Error::Validation(format!("sample rate must be positive, got {}", meta.sample_rate_hz)));
        }
        if samples.is_empty() {
            return Err(Error::Validation("trial has no samples".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.t >= 0.0) {
                return Err(Error::Validation(format!("sample {i}: invalid timestamp {}", s.t)));
            }
            if s.acc.iter().chain(s.gyro.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("sample {i}: non-finite reading")));
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(Error::Validation(format!(
                    "timestamps not strictly increasing at sample {i} ({} after {})",
                    s.t,
                    samples[i - 1].t
                )));
            }
        }
        Ok(Self { meta, samples })
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Same metadata, different samples.
    pub fn with_samples(&self, samples: Vec<ImuSample>) -> Result<Self> {
        Self::new(self.meta.clone(), samples)
    }

    /// Checks the invariants the analysis chain relies on: enough data for
    /// phase-space reconstruction and a sampling interval close to nominal.
    pub fn check_analysis_ready(&self) -> Result<()> {
        let min_len = (MIN_TRIAL_SECONDS * self.meta.sample_rate_hz).round() as usize;
        if self.samples.len() < min_len || self.duration() + 1.0 / self.meta.sample_rate_hz < MIN_TRIAL_SECONDS - 1e-9 {
            return Err(Error::Validation(format!(
                "trial too short: {} samples / {:.2} s, need {MIN_TRIAL_SECONDS} s",
                self.samples.len(),
                self.duration()
            )));
        }
        let report = check_rate(self)?;
        let expected = 1.0 / self.meta.sample_rate_hz;
        if (report.median_dt - expected).abs() > 0.1 * expected {
            return Err(Error::Validation(format!(
                "median sample interval {:.5} s deviates more than 10% from 1/{} Hz",
                report.median_dt, self.meta.sample_rate_hz
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnNames {
    pub t: String,
    pub ax: String,
    pub ay: String,
    pub az: String,
    pub gx: String,
    pub gy: String,
    pub gz: String,
}

impl Default for ColumnNames {
    fn default() -> Self {
        Self {
            t: "t".into(),
            ax: "ax".into(),
            ay: "ay".into(),
            az: "az".into(),
            gx: "gx".into(),
            gy: "gy".into(),
            gz: "gz".into(),
        }
    }
}

impl ColumnNames {
    fn as_array(&self) -> [&str; 7] {
        [&self.t, &self.ax, &self.ay, &self.az, &self.gx, &self.gy, &self.gz]
    }
}

/// How to read trial files. Sidecar values take precedence over these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub columns: ColumnNames,
    pub acc_unit: AccUnit,
    pub gyro_unit: GyroUnit,
    pub time_column: TimeColumn,
    pub sample_rate_hz: f64,
    pub subject_id: Option<String>,
    pub leg: Option<Leg>,
    pub group: Option<Group>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            columns: ColumnNames::default(),
            acc_unit: AccUnit::default(),
            gyro_unit: GyroUnit::default(),
            time_column: TimeColumn::default(),
            sample_rate_hz: NOMINAL_RATE_HZ,
            subject_id: None,
            leg: None,
            group: None,
        }
    }
}

/// Parsed sidecar metadata (`key = value` or `key: value`, `#` comments).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sidecar {
    pub subject_id: Option<String>,
    pub leg: Option<Leg>,
    pub group: Option<Group>,
    pub sample_rate_hz: Option<f64>,
    pub acc_unit: Option<AccUnit>,
    pub gyro_unit: Option<GyroUnit>,
    pub time_column: Option<TimeColumn>,
}

impl Sidecar {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Sidecar::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').or_else(|| line.split_once(':')).ok_or_else(|| Error::Parse {
                line: lineno as u64 + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let value = value.trim().trim_matches('"');
            let wrap = |e: Error| Error::Parse { line: lineno as u64 + 1, msg: e.to_string() };
            match key.trim() {
                "subject_id" => out.subject_id = Some(value.to_string()),
                "leg" => out.leg = Some(value.parse().map_err(wrap)?),
                "group" => out.group = Some(value.parse().map_err(wrap)?),
                "sample_rate_hz" => {
                    out.sample_rate_hz = Some(value.parse().map_err(|_| Error::Parse {
                        line: lineno as u64 + 1,
                        msg: format!("bad sample rate '{value}'"),
                    })?)
                }
                "acc_unit" => out.acc_unit = Some(value.parse().map_err(wrap)?),
                "gyro_unit" => out.gyro_unit = Some(value.parse().map_err(wrap)?),
                "time_column" => out.time_column = Some(value.parse().map_err(wrap)?),
                // unknown keys are tolerated so sidecars can carry extra notes
                _ => {}
            }
        }
        Ok(out)
    }

    pub fn render(meta: &TrialMeta, acc_unit: AccUnit, gyro_unit: GyroUnit) -> String {
        format!(
            "subject_id = {}\nleg = {}\ngroup = {}\nsample_rate_hz = {}\nacc_unit = {}\ngyro_unit = {}\n",
            meta.subject_id,
            meta.leg,
            meta.group,
            meta.sample_rate_hz,
            acc_unit.as_str(),
            gyro_unit.as_str()
        )
    }
}

/// Sidecar path for a trial CSV: `walk.csv` → `walk.meta`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta")
}

/// Reads `path` and its sidecar (if present) into a validated trial.
pub fn parse_trial(path: &Path, schema: &IngestConfig) -> Result<ImuTrial> {
    let sidecar_file = sidecar_path(path);
    let sidecar =
        if sidecar_file.exists() { Sidecar::parse(&fs::read_to_string(&sidecar_file)?)? } else { Sidecar::default() };
    let file = fs::File::open(path)?;
    let fallback_id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "unknown".into());
    parse_trial_reader(file, schema, &sidecar, &fallback_id)
}

pub fn parse_trial_reader<R: Read>(
    reader: R,
    schema: &IngestConfig,
    sidecar: &Sidecar,
    fallback_subject: &str,
) -> Result<ImuTrial> {
    let sample_rate_hz = sidecar.sample_rate_hz.unwrap_or(schema.sample_rate_hz);
    let acc_unit = sidecar.acc_unit.unwrap_or(schema.acc_unit);
    let gyro_unit = sidecar.gyro_unit.unwrap_or(schema.gyro_unit);
    let time_column = sidecar.time_column.unwrap_or(schema.time_column);
    let meta = TrialMeta {
        subject_id: sidecar
            .subject_id
            .clone()
            .or_else(|| schema.subject_id.clone())
            .unwrap_or_else(|| fallback_subject.to_string()),
        leg: sidecar
            .leg
            .or(schema.leg)
            .ok_or_else(|| Error::Validation("leg not given in sidecar or config".into()))?,
        group: sidecar
            .group
            .or(schema.group)
            .ok_or_else(|| Error::Validation("group not given in sidecar or config".into()))?,
        sample_rate_hz,
    };
    let samples = parse_samples(reader, &schema.columns, acc_unit, gyro_unit, time_column, sample_rate_hz)?;
    ImuTrial::new(meta, samples)
}

/// Parses the sample table only. Units are converted to SI; ordering is not checked here.
pub fn parse_samples<R: Read>(
    reader: R,
    columns: &ColumnNames,
    acc_unit: AccUnit,
    gyro_unit: GyroUnit,
    time_column: TimeColumn,
    sample_rate_hz: f64,
) -> Result<Vec<ImuSample>> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(columns.as_array()) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column '{name}' in header") })?;
    }
    let acc_scale = acc_unit.to_si();
    let gyro_scale = gyro_unit.to_si();
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let mut vals = [0.0f64; 7];
        for (v, &col) in vals.iter_mut().zip(idx.iter()) {
            let cell = record.get(col).ok_or_else(|| Error::Parse {
                line,
                msg: format!("row has {} cells, expected column {}", record.len(), col + 1),
            })?;
            *v = cell.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("non-numeric cell '{cell}'") })?;
        }
        let t = match time_column {
            TimeColumn::Seconds => vals[0],
            TimeColumn::SampleIndex => vals[0] / sample_rate_hz,
        };
        samples.push(ImuSample {
            t,
            acc: [vals[1] * acc_scale, vals[2] * acc_scale, vals[3] * acc_scale],
            gyro: [vals[4] * gyro_scale, vals[5] * gyro_scale, vals[6] * gyro_scale],
        });
    }
    if samples.is_empty() {
        return Err(Error::Validation("file contains no samples".into()));
    }
    Ok(samples)
}

/// Writes the trial as CSV (default column names, SI units) plus its sidecar.
/// `header_comment` lines are emitted as `# ...` before the header.
pub fn write_trial(path: &Path, trial: &ImuTrial, header_comment: Option<&str>) -> Result<()> {
    let mut out = fs::File::create(path)?;
    write_trial_csv(&mut out, trial, header_comment)?;
    fs::write(sidecar_path(path), Sidecar::render(&trial.meta, AccUnit::MetersPerSecondSquared, GyroUnit::RadPerSec))?;
    Ok(())
}

pub fn write_trial_csv<W: Write>(out: &mut W, trial: &ImuTrial, header_comment: Option<&str>) -> Result<()> {
    if let Some(c) = header_comment {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ColumnNames::default().as_array())?;
    for s in trial.samples() {
        w.write_record(
            [s.t, s.acc[0], s.acc[1], s.acc[2], s.gyro[0], s.gyro[1], s.gyro[2]].iter().map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gap {
    /// Index of the first sample after the gap.
    pub index: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub nominal_rate_hz: f64,
    pub median_dt: f64,
    pub gaps: Vec<Gap>,
}

/// Sampling-rate summary. A gap is any interval longer than 1.5 sample periods.
pub fn check_rate(trial: &ImuTrial) -> Result<RateReport> {
    let s = trial.samples();
    if s.len() < 2 {
        return Err(Error::Validation("rate check needs at least 2 samples".into()));
    }
    let dts: Vec<f64> = s.windows(2).map(|w| w[1].t - w[0].t).collect();
    let mut sorted = dts.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median_dt = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    let limit = 1.5 / trial.meta.sample_rate_hz;
    let gaps = dts.iter().enumerate().filter(|(_, &dt)| dt > limit).map(|(i, &dt)| Gap { index: i + 1, dt }).collect();
    Ok(RateReport { nominal_rate_hz: trial.meta.sample_rate_hz, median_dt, gaps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Ax,
    Ay,
    Az,
    Gx,
    Gy,
    Gz,
}

impl Channel {
    pub const ALL: [Channel; 6] = [Channel::Ax, Channel::Ay, Channel::Az, Channel::Gx, Channel::Gy, Channel::Gz];

    pub fn read(self, s: &ImuSample) -> f64 {
        match self {
            Channel::Ax => s.acc[0],
            Channel::Ay => s.acc[1],
            Channel::Az => s.acc[2],
            Channel::Gx => s.gyro[0],
            Channel::Gy => s.gyro[1],
            Channel::Gz => s.gyro[2],
        }
    }

    pub fn is_acc(self) -> bool {
        matches!(self, Channel::Ax | Channel::Ay | Channel::Az)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeFlag {
    pub index: usize,
    pub channel: Channel,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct QualityReport {
    pub out_of_range: Vec<RangeFlag>,
}

/// Flags readings beyond the sensor range. Nothing is removed.
pub fn quality_report(trial: &ImuTrial) -> QualityReport {
    let mut out_of_range = Vec::new();
    for (index, s) in trial.samples().iter().enumerate() {
        for channel in Channel::ALL {
            let value = channel.read(s);
            let limit = if channel.is_acc() { ACC_RANGE } else { GYRO_RANGE };
            if value.abs() > limit {
                out_of_range.push(RangeFlag { index, channel, value });
            }
        }
    }
    QualityReport { out_of_range }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> TrialMeta {
        TrialMeta { subject_id: "S01".into(), leg: Leg::Left, group: Group::Control, sample_rate_hz: 100.0 }
    }

    fn uniform(n: usize) -> Vec<ImuSample> {
        (0..n).map(|i| ImuSample { t: i as f64 * 0.01, acc: [0.0, 0.0, GRAVITY], gyro: [0.0; 3] }).collect()
    }

    #[test]
    fn converts_g_and_degrees() {
        let csv = "t,ax,ay,az,gx,gy,gz\n0.00, 0, 0, 1, 0, 0, 0\n";
        let s = parse_samples(
            csv.as_bytes(),
            &ColumnNames::default(),
            AccUnit::G,
            GyroUnit::DegPerSec,
            TimeColumn::Seconds,
            100.0,
        )
        .unwrap();
        assert_eq!(s[0].acc, [0.0, 0.0, 9.80665]);
        assert_eq!(s[0].gyro, [0.0; 3]);
    }

    #[test]
    fn rejects_decreasing_time() {
        let csv = "t,ax,ay,az,gx,gy,gz\n0.01,0,0,1,0,0,0\n0.00,0,0,1,0,0,0\n";
        let sidecar = Sidecar { leg: Some(Leg::Left), group: Some(Group::Control), ..Default::default() };
        let err = parse_trial_reader(csv.as_bytes(), &IngestConfig::default(), &sidecar, "x").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn empty_file_is_validation_error() {
        let csv = "t,ax,ay,az,gx,gy,gz\n";
        let sidecar = Sidecar { leg: Some(Leg::Left), group: Some(Group::Control), ..Default::default() };
        let err = parse_trial_reader(csv.as_bytes(), &IngestConfig::default(), &sidecar, "x").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn non_numeric_cell_reports_line() {
        let csv = "t,ax,ay,az,gx,gy,gz\n0,0,0,1,0,0,0\n0.01,0,abc,1,0,0,0\n";
        let err = parse_samples(
            csv.as_bytes(),
            &ColumnNames::default(),
            AccUnit::G,
            GyroUnit::RadPerSec,
            TimeColumn::Seconds,
            100.0,
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn sample_index_time_column() {
        let csv = "idx,ax,ay,az,gx,gy,gz\n0,0,0,1,0,0,0\n1,0,0,1,0,0,0\n2,0,0,1,0,0,0\n";
        let cols = ColumnNames { t: "idx".into(), ..Default::default() };
        let s = parse_samples(csv.as_bytes(), &cols, AccUnit::G, GyroUnit::RadPerSec, TimeColumn::SampleIndex, 50.0)
            .unwrap();
        assert_eq!(s[2].t, 0.04);
    }

    #[test]
    fn unit_conversion_is_linear() {
        let in_g = "t,ax,ay,az,gx,gy,gz\n0,0.3,-1.2,0.9,10,20,-30\n";
        let pre = format!("t,ax,ay,az,gx,gy,gz\n0,{},{},{},10,20,-30\n", 0.3 * GRAVITY, -1.2 * GRAVITY, 0.9 * GRAVITY);
        let a = parse_samples(
            in_g.as_bytes(),
            &ColumnNames::default(),
            AccUnit::G,
            GyroUnit::DegPerSec,
            TimeColumn::Seconds,
            100.0,
        )
        .unwrap();
        let b = parse_samples(
            pre.as_bytes(),
            &ColumnNames::default(),
            AccUnit::MetersPerSecondSquared,
            GyroUnit::DegPerSec,
            TimeColumn::Seconds,
            100.0,
        )
        .unwrap();
        for k in 0..3 {
            assert!((a[0].acc[k] - b[0].acc[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn sidecar_parsing() {
        let text = "# trial notes\nsubject_id = P07\nleg: right\ngroup = LDH_affected_side\nsample_rate_hz = 100\nacc_unit = g\ngyro_unit = deg/s\n";
        let s = Sidecar::parse(text).unwrap();
        assert_eq!(s.subject_id.as_deref(), Some("P07"));
        assert_eq!(s.leg, Some(Leg::Right));
        assert_eq!(s.group, Some(Group::LdhAffectedSide));
        assert_eq!(s.acc_unit, Some(AccUnit::G));
        assert_eq!(s.gyro_unit, Some(GyroUnit::DegPerSec));
        assert!(Sidecar::parse("leg = sideways").is_err());
    }

    #[test]
    fn rate_report_uniform() {
        let trial = ImuTrial::new(meta(), uniform(200)).unwrap();
        let r = check_rate(&trial).unwrap();
        assert!((r.median_dt - 0.01).abs() < 1e-12);
        assert!(r.gaps.is_empty());
    }

    #[test]
    fn rate_report_single_gap() {
        let mut s = uniform(100);
        s.remove(40);
        let trial = ImuTrial::new(meta(), s).unwrap();
        let r = check_rate(&trial).unwrap();
        assert_eq!(r.gaps.len(), 1);
        assert_eq!(r.gaps[0].index, 40);
        assert!((r.gaps[0].dt - 0.02).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_is_flagged_not_removed() {
        let mut s = uniform(10);
        s[3].acc[0] = 9.0 * GRAVITY;
        s[5].gyro[2] = -20.0;
        let trial = ImuTrial::new(meta(), s).unwrap();
        let q = quality_report(&trial);
        assert_eq!(q.out_of_range.len(), 2);
        assert_eq!(trial.len(), 10);
        assert_eq!(q.out_of_range[0].channel, Channel::Ax);
    }

    #[test]
    fn short_trial_not_analysis_ready() {
        let trial = ImuTrial::new(meta(), uniform(250)).unwrap();
        assert!(trial.check_analysis_ready().is_err());
        let trial = ImuTrial::new(meta(), uniform(300)).unwrap();
        trial.check_analysis_ready().unwrap();
    }
}
