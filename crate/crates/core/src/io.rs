//! Configuration files and dataset output.
//!
//! Configs are TOML. Every table rejects unknown keys; missing values fall
//! back to the defaults in [`crate::experiments`]. Outputs are plain text:
//! a flat `key = value` summary and comma-separated tables whose leading
//! `#` lines carry units and the generating config.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Value;

use crate::error::{Error, Result};
use crate::experiments::{
    GridSpec, ScenarioConfig, SweepAxis, SweepParam, SweepSpec, SweepTable, DEFAULT_DT, DEFAULT_T_MAX, DEFAULT_X0,
};
use crate::observables::RunSummary;
use crate::physics::{BeamShape, BeamSpec, PhysicalConstants, SolitonSpec};
use crate::propagator::{ObservableSchedule, StopReason, StopRule, TimeParams};

const UNITS: &str = "m = hbar = g = 1; lengths in x units, times in t units, densities per unit length";

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    constants: RawConstants,
    soliton: Option<RawSoliton>,
    beam: Option<RawBeam>,
    #[serde(default)]
    time: RawTime,
    #[serde(default)]
    observe: RawObserve,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x_min: Option<f64>,
    x_max: Option<f64>,
    n: Option<i64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    mass: Option<f64>,
    hbar: Option<f64>,
    g: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSoliton {
    v: Option<f64>,
    x0: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeam {
    kind: Option<String>,
    gamma: Option<f64>,
    w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loss_rate_eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quiet_window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObserve {
    snapshot_stride: Option<i64>,
    com_stride: Option<i64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Vec<RawAxis>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    param: String,
    values: Vec<f64>,
}

/// A parsed config file: one scenario, or a sweep around a base scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigFile {
    Scenario(ScenarioConfig),
    Sweep(SweepSpec),
}

impl ConfigFile {
    pub fn base_mut(&mut self) -> &mut ScenarioConfig {
        match self {
            ConfigFile::Scenario(c) => c,
            ConfigFile::Sweep(s) => &mut s.base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConfigFile::Scenario(c) => c.validate(),
            ConfigFile::Sweep(s) => {
                s.base.validate()?;
                s.validate()
            }
        }
    }
}

fn require<T>(value: Option<T>, field: &str) -> Result<T> {
    value.ok_or_else(|| Error::invalid(field, "missing"))
}

fn forbid<T>(value: &Option<T>, field: &str, kind: &str) -> Result<()> {
    match value {
        Some(_) => Err(Error::invalid(field, format!("not used by beam kind `{kind}`"))),
        None => Ok(()),
    }
}

fn stride(value: Option<i64>, default: usize, field: &str) -> Result<usize> {
    match value {
        None => Ok(default),
        Some(v) if v >= 0 => Ok(v as usize),
        Some(v) => Err(Error::invalid(field, format!("must be >= 0, got {v}"))),
    }
}

impl RawConfig {
    fn into_config(self) -> Result<ConfigFile> {
        let grid = GridSpec {
            x_min: self.grid.x_min.unwrap_or(GridSpec::default().x_min),
            x_max: self.grid.x_max.unwrap_or(GridSpec::default().x_max),
            n: match self.grid.n {
                None => GridSpec::default().n,
                Some(n) if n >= 2 && (n as u64).is_power_of_two() => n as usize,
                Some(n) => return Err(Error::invalid("grid.n", format!("{n} is not a power of two >= 2"))),
            },
        };
        if !(grid.x_min.is_finite() && grid.x_max.is_finite() && grid.x_max > grid.x_min) {
            return Err(Error::invalid("grid.x_max", "need finite x_min < x_max"));
        }
        let defaults = PhysicalConstants::default();
        let constants = PhysicalConstants {
            mass: self.constants.mass.unwrap_or(defaults.mass),
            hbar: self.constants.hbar.unwrap_or(defaults.hbar),
            g: self.constants.g.unwrap_or(defaults.g),
        };
        constants.validate()?;

        let soliton = require(self.soliton, "soliton")?;
        let soliton = SolitonSpec::normalized(
            require(soliton.v, "soliton.v")?,
            soliton.x0.unwrap_or(DEFAULT_X0),
            &constants,
        );

        let beam = require(self.beam, "beam")?;
        let kind = require(beam.kind.clone(), "beam.kind")?;
        let gamma = require(beam.gamma, "beam.gamma")?;
        let w = require(beam.w, "beam.w")?;
        let shape = match kind.as_str() {
            "gaussian" => {
                forbid(&beam.x_l, "beam.x_l", &kind)?;
                forbid(&beam.x_r, "beam.x_r", &kind)?;
                forbid(&beam.u, "beam.u", &kind)?;
                BeamShape::Gaussian {
                    center: require(beam.x_b, "beam.x_b")?,
                    w,
                }
            }
            "flat_top" => {
                forbid(&beam.x_b, "beam.x_b", &kind)?;
                forbid(&beam.u, "beam.u", &kind)?;
                BeamShape::FlatTop {
                    left: require(beam.x_l, "beam.x_l")?,
                    right: require(beam.x_r, "beam.x_r")?,
                    w,
                }
            }
            "moving_gaussian" => {
                forbid(&beam.x_l, "beam.x_l", &kind)?;
                forbid(&beam.x_r, "beam.x_r", &kind)?;
                BeamShape::MovingGaussian {
                    center0: require(beam.x_b, "beam.x_b")?,
                    w,
                    velocity: require(beam.u, "beam.u")?,
                }
            }
            other => {
                return Err(Error::invalid(
                    "beam.kind",
                    format!("`{other}` is not one of gaussian, flat_top, moving_gaussian"),
                ))
            }
        };
        let beam = BeamSpec { gamma, shape };
        beam.validate()?;

        let dt = self.time.dt.unwrap_or(DEFAULT_DT);
        let auto_keys =
            self.time.loss_rate_eps.is_some() || self.time.quiet_window.is_some() || self.time.t_max.is_some();
        let stop = match self.time.t_final {
            Some(t) if auto_keys => {
                let _ = t;
                return Err(Error::invalid(
                    "time.t_final",
                    "a fixed end time cannot be combined with loss_rate_eps/quiet_window/t_max",
                ));
            }
            Some(t) => StopRule::Fixed(t),
            None => {
                let StopRule::Auto {
                    loss_rate_eps,
                    quiet_window,
                    t_max,
                } = TimeParams::auto(dt, DEFAULT_T_MAX).stop
                else {
                    unreachable!()
                };
                StopRule::Auto {
                    loss_rate_eps: self.time.loss_rate_eps.unwrap_or(loss_rate_eps),
                    quiet_window: self.time.quiet_window.unwrap_or(quiet_window),
                    t_max: self.time.t_max.unwrap_or(t_max),
                }
            }
        };
        let time = TimeParams { dt, stop };
        time.validate()?;

        let defaults = ObservableSchedule::default();
        let observe = ObservableSchedule {
            snapshot_stride: stride(
                self.observe.snapshot_stride,
                defaults.snapshot_stride,
                "observe.snapshot_stride",
            )?,
            com_stride: stride(self.observe.com_stride, defaults.com_stride, "observe.com_stride")?,
            incoming: defaults.incoming,
        };

        let base = ScenarioConfig {
            label: self.label.unwrap_or_else(|| "scenario".to_string()),
            grid,
            constants,
            soliton,
            beam,
            time,
            observe,
        };
        base.validate()?;

        match self.sweep {
            None => Ok(ConfigFile::Scenario(base)),
            Some(sweep) => {
                let axes = sweep
                    .axis
                    .into_iter()
                    .map(|a| {
                        let param = SweepParam::parse(&a.param).ok_or_else(|| {
                            Error::invalid("sweep.axis.param", format!("`{}` is not one of w, gamma, v", a.param))
                        })?;
                        Ok(SweepAxis {
                            param,
                            values: a.values,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let spec = SweepSpec { base, axes };
                spec.validate()?;
                Ok(ConfigFile::Sweep(spec))
            }
        }
    }

    fn from_scenario(c: &ScenarioConfig) -> Self {
        let mut beam = RawBeam {
            gamma: Some(c.beam.gamma),
            w: Some(c.beam.shape.w()),
            ..RawBeam::default()
        };
        match c.beam.shape {
            BeamShape::Gaussian { center, .. } => {
                beam.kind = Some("gaussian".into());
                beam.x_b = Some(center);
            }
            BeamShape::FlatTop { left, right, .. } => {
                beam.kind = Some("flat_top".into());
                beam.x_l = Some(left);
                beam.x_r = Some(right);
            }
            BeamShape::MovingGaussian { center0, velocity, .. } => {
                beam.kind = Some("moving_gaussian".into());
                beam.x_b = Some(center0);
                beam.u = Some(velocity);
            }
        }
        let time = match c.time.stop {
            StopRule::Fixed(t) => RawTime {
                dt: Some(c.time.dt),
                t_final: Some(t),
                ..RawTime::default()
            },
            StopRule::Auto {
                loss_rate_eps,
                quiet_window,
                t_max,
            } => RawTime {
                dt: Some(c.time.dt),
                t_final: None,
                loss_rate_eps: Some(loss_rate_eps),
                quiet_window: Some(quiet_window),
                t_max: Some(t_max),
            },
        };
        RawConfig {
            label: Some(c.label.clone()),
            grid: RawGrid {
                x_min: Some(c.grid.x_min),
                x_max: Some(c.grid.x_max),
                n: Some(c.grid.n as i64),
            },
            constants: RawConstants {
                mass: Some(c.constants.mass),
                hbar: Some(c.constants.hbar),
                g: Some(c.constants.g),
            },
            soliton: Some(RawSoliton {
                v: Some(c.soliton.velocity),
                x0: Some(c.soliton.x0),
            }),
            beam: Some(beam),
            time,
            observe: RawObserve {
                snapshot_stride: Some(c.observe.snapshot_stride as i64),
                com_stride: Some(c.observe.com_stride as i64),
            },
            sweep: None,
        }
    }
}

/// Parses and validates a TOML config.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw.into_config()
}

pub fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Canonical TOML for a config with every default spelled out.
pub fn config_to_toml(config: &ConfigFile) -> String {
    let raw = match config {
        ConfigFile::Scenario(c) => RawConfig::from_scenario(c),
        ConfigFile::Sweep(s) => {
            let mut raw = RawConfig::from_scenario(&s.base);
            raw.sweep = Some(RawSweep {
                axis: s
                    .axes
                    .iter()
                    .map(|a| RawAxis {
                        param: a.param.name().to_string(),
                        values: a.values.clone(),
                    })
                    .collect(),
            });
            raw
        }
    };
    toml::to_string(&raw).expect("config structs always serialize")
}

/// `key = value` lines with dotted keys, one per leaf of `value`.
fn flatten(prefix: &str, value: &Value, out: &mut Vec<String>) {
    match value {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        leaf => out.push(format!("{prefix} = {leaf}")),
    }
}

fn config_echo(config: &ConfigFile) -> Vec<String> {
    let value: Value = toml::from_str(&config_to_toml(config)).expect("canonical config parses");
    let mut lines = Vec::new();
    flatten("config", &value, &mut lines);
    lines
}

/// Recovers the config embedded in a summary file.
pub fn config_from_summary(text: &str) -> Result<ConfigFile> {
    let value: toml::Table = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let config = value
        .get("config")
        .ok_or_else(|| Error::Parse("summary has no config echo".into()))?;
    let text = toml::to_string(config).map_err(|e| Error::Parse(e.to_string()))?;
    parse_config(&text)
}

/// What a run or sweep writes to disk.
#[derive(Debug, Clone)]
pub enum OutputBundle<'a> {
    Run {
        config: &'a ScenarioConfig,
        summary: &'a RunSummary,
    },
    Sweep {
        spec: &'a SweepSpec,
        table: &'a SweepTable,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub dir: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::FixedTime => "fixed_time",
        StopReason::Quiescent => "quiescent",
        StopReason::TimeLimit => "time_limit",
    }
}

fn header(kind: &str, echo: &[String], columns: &str) -> String {
    let mut s = format!("# zeno-soliton {kind}\n# units: {UNITS}\n# columns: {columns}\n");
    for line in echo {
        let _ = writeln!(s, "# {line}");
    }
    let _ = writeln!(s, "{columns}");
    s
}

fn record_line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key} = {value}");
}

fn summary_text(config: &ScenarioConfig, s: &RunSummary, echo: &[String]) -> String {
    let mut out = String::new();
    record_line(&mut out, "format", "\"zeno-soliton run summary v1\"");
    record_line(&mut out, "units", format!("\"{UNITS}\""));
    record_line(&mut out, "label", Value::String(s.label.clone()));
    record_line(&mut out, "p_refl", s.p_refl);
    record_line(&mut out, "transmitted", s.transmitted);
    record_line(&mut out, "surviving_final", s.final_surviving());
    record_line(&mut out, "t_final", s.t_final_used);
    record_line(&mut out, "stop", format!("\"{}\"", stop_name(s.stop)));
    record_line(&mut out, "boundary", s.boundary);
    record_line(&mut out, "soliton_width", config.soliton.width(&config.constants));
    if let Some(v) = s.fitted_out_velocity {
        record_line(&mut out, "out_velocity", v);
    }
    if let Some(f) = s.fitted_sech {
        record_line(&mut out, "sech_amplitude", f.amplitude);
        record_line(&mut out, "sech_width", f.width);
        record_line(&mut out, "sech_center", f.center);
        record_line(&mut out, "sech_residual", f.residual);
        record_line(&mut out, "sech_converged", f.converged);
        record_line(&mut out, "solitonic", f.is_solitonic());
    }
    if let Some(c) = &s.closest_encounter {
        record_line(&mut out, "closest_encounter_t", c.t);
    }
    for line in echo {
        let _ = writeln!(out, "{line}");
    }
    out
}

fn run_files(config: &ScenarioConfig, s: &RunSummary) -> Result<Vec<(String, String)>> {
    let echo = config_echo(&ConfigFile::Scenario(config.clone()));
    let grid = config.grid.build()?;
    let x = grid.positions();

    let mut heat = header("heatmap", &echo, "t,x,density");
    for snap in &s.snapshots {
        for (xj, rho) in x.iter().zip(&snap.density) {
            let _ = writeln!(heat, "{},{},{:e}", snap.t, xj, rho);
        }
    }

    let mut survival = header("surviving fraction", &echo, "t,surviving_fraction");
    let stride = config.observe.com_stride.max(1);
    let last = s.surviving_series.len().saturating_sub(1);
    for (i, (t, n)) in s.surviving_series.iter().enumerate() {
        if i % stride == 0 || i == last {
            let _ = writeln!(survival, "{t},{n}");
        }
    }

    let mut com = header("center of mass", &echo, "t,com_total,com_incoming,beam_edge");
    for c in &s.com_series {
        let incoming = c.incoming.map_or(String::from("nan"), |v| v.to_string());
        let _ = writeln!(com, "{},{},{},{}", c.t, c.total, incoming, c.beam_edge);
    }

    let mut profiles = header(
        "profiles",
        &echo,
        "x,beam_final,density_final,amplitude_final,density_closest,amplitude_closest",
    );
    let closest = s.closest_encounter.as_ref();
    for (j, &xj) in x.iter().enumerate() {
        let rho = s.final_field.psi[j].norm_sqr();
        let rc = closest.map_or(f64::NAN, |c| c.density[j]);
        let _ = writeln!(
            profiles,
            "{},{:e},{:e},{:e},{:e},{:e}",
            xj,
            config.beam.profile(xj, s.t_final_used),
            rho,
            rho.sqrt(),
            rc,
            rc.sqrt()
        );
    }

    Ok(vec![
        ("summary.toml".into(), summary_text(config, s, &echo)),
        ("heatmap.csv".into(), heat),
        ("survival.csv".into(), survival),
        ("com.csv".into(), com),
        ("profiles.csv".into(), profiles),
    ])
}

fn sweep_files(spec: &SweepSpec, table: &SweepTable) -> Vec<(String, String)> {
    let echo = config_echo(&ConfigFile::Sweep(spec.clone()));
    let names: Vec<&str> = spec.axes.iter().map(|a| a.param.name()).collect();
    let columns = format!("{},p_refl,surviving,t_final,stop,error", names.join(","));
    let mut csv = header("sweep", &echo, &columns);
    let mut failures = 0;
    for cell in &table.cells {
        let values: Vec<String> = cell.values.iter().map(|v| v.to_string()).collect();
        match &cell.outcome {
            Ok(r) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},",
                    values.join(","),
                    r.p_refl,
                    r.surviving,
                    r.t_final,
                    stop_name(r.stop)
                );
            }
            Err(e) => {
                failures += 1;
                let _ = writeln!(
                    csv,
                    "{},nan,nan,nan,failed,\"{}\"",
                    values.join(","),
                    e.replace('"', "'")
                );
            }
        }
    }
    let mut summary = String::new();
    record_line(&mut summary, "format", "\"zeno-soliton sweep summary v1\"");
    record_line(&mut summary, "units", format!("\"{UNITS}\""));
    record_line(&mut summary, "label", Value::String(table.label.clone()));
    record_line(&mut summary, "cells", table.cells.len());
    record_line(&mut summary, "failed_cells", failures);
    for line in &echo {
        let _ = writeln!(summary, "{line}");
    }
    vec![("summary.toml".into(), summary), ("sweep.csv".into(), csv)]
}

/// Writes the bundle into `dir` (created if needed) plus a `manifest.txt`
/// listing each file's SHA-256.
pub fn write_outputs(bundle: &OutputBundle<'_>, dir: &Path) -> Result<Manifest> {
    let files = match bundle {
        OutputBundle::Run { config, summary } => run_files(config, summary)?,
        OutputBundle::Sweep { spec, table } => sweep_files(spec, table),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(&name);
        fs::write(&path, contents.as_bytes()).map_err(|e| Error::io(&path, e))?;
        entries.push(ManifestEntry {
            file: name,
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
        });
    }
    entries.sort_by(|a, b| a.file.cmp(&b.file));
    let mut manifest = String::new();
    for e in &entries {
        let _ = writeln!(manifest, "{}  {}", e.sha256, e.file);
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(Manifest {
        dir: dir.to_path_buf(),
        entries,
    })
}
