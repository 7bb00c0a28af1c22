//! Scenario presets, the sweep engine and the moving-beam stopping driver.

use crate::error::{Error, Result};
use crate::exec::{map_ordered, with_threads, Exec};
use crate::grid::SpatialGrid;
use crate::observables::{self, RunSummary};
use crate::physics::{init_soliton, BeamShape, BeamSpec, PhysicalConstants, SolitonSpec};
use crate::propagator::{ObservableSchedule, Propagator, Side, StopReason, TimeParams};

pub const DEFAULT_DT: f64 = 0.005;
pub const DEFAULT_N: usize = 4096;
pub const DEFAULT_EXTENT: (f64, f64) = (-40.0, 40.0);
pub const DEFAULT_X0: f64 = 10.0;
pub const DEFAULT_T_MAX: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: DEFAULT_EXTENT.0,
            x_max: DEFAULT_EXTENT.1,
            n: DEFAULT_N,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.x_min, self.x_max, self.n)
    }
}

/// A fully specified single run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub label: String,
    pub grid: GridSpec,
    pub constants: PhysicalConstants,
    pub soliton: SolitonSpec,
    pub beam: BeamSpec,
    pub time: TimeParams,
    pub observe: ObservableSchedule,
}

impl ScenarioConfig {
    /// Default grid, time stepping and observables around a given soliton
    /// velocity and beam.
    pub fn new(label: impl Into<String>, velocity: f64, beam: BeamSpec) -> Self {
        let constants = PhysicalConstants::default();
        Self {
            label: label.into(),
            grid: GridSpec::default(),
            constants,
            soliton: SolitonSpec::normalized(velocity, DEFAULT_X0, &constants),
            beam,
            time: TimeParams::auto(DEFAULT_DT, DEFAULT_T_MAX),
            observe: ObservableSchedule::default(),
        }
    }

    pub fn with_grid(mut self, x_min: f64, x_max: f64, n: usize) -> Self {
        self.grid = GridSpec { x_min, x_max, n };
        self
    }

    pub fn with_time(mut self, time: TimeParams) -> Self {
        self.time = time;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.soliton.x0 = x0;
        self
    }

    /// Side of the beam the soliton starts on.
    pub fn incoming_side(&self) -> Side {
        let (lo, _) = self.beam.shape.core(0.0);
        if self.soliton.x0 >= lo {
            Side::Right
        } else {
            Side::Left
        }
    }

    /// Gap between the soliton center and the nearest beam core edge at `t = 0`.
    pub fn initial_gap(&self) -> f64 {
        let (lo, hi) = self.beam.shape.core(0.0);
        match self.incoming_side() {
            Side::Right => self.soliton.x0 - hi,
            Side::Left => lo - self.soliton.x0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.beam.validate()?;
        self.time.validate()?;
        if !self.soliton.velocity.is_finite() {
            return Err(Error::invalid("soliton.v", "must be finite"));
        }
        if !self.soliton.x0.is_finite() {
            return Err(Error::invalid("soliton.x0", "must be finite"));
        }
        let width = self.soliton.width(&self.constants);
        if self.initial_gap() < 5.0 * width {
            return Err(Error::invalid(
                "soliton.x0",
                format!(
                    "soliton starts {:.3} from the beam; need at least 5 widths ({:.3})",
                    self.initial_gap(),
                    5.0 * width
                ),
            ));
        }
        Ok(())
    }

    fn labeled(&self, e: Error) -> Error {
        Error::Scenario {
            label: self.label.clone(),
            source: Box::new(e),
        }
    }
}

/// Runs one scenario with the default execution strategy.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunSummary> {
    run_scenario_with(config, Exec::default())
}

pub fn run_scenario_with(config: &ScenarioConfig, exec: Exec) -> Result<RunSummary> {
    run_inner(config, exec).map_err(|e| config.labeled(e))
}

fn run_inner(config: &ScenarioConfig, exec: Exec) -> Result<RunSummary> {
    config.validate()?;
    let grid = config.grid.build()?;
    let consts = config.constants;
    let field = init_soliton(&grid, &config.soliton, &consts)?;
    let side = config.incoming_side();
    let probes = ObservableSchedule {
        incoming: Some(side),
        ..config.observe
    };
    let mut prop = Propagator::new(&grid, config.time.dt, consts)?.with_exec(exec);
    let traj = prop.evolve(field, &config.time, &config.beam, &probes)?;

    let t_final = traj.t_final();
    let (lo, hi) = config.beam.shape.core(t_final);
    let boundary = match side {
        Side::Right => hi,
        Side::Left => lo,
    }
    .clamp(grid.x_min(), grid.x_max());
    let p_refl = observables::fraction_on_side(&grid, &traj.field, boundary, side)?;
    let transmitted = traj.final_norm() - p_refl;

    let width = config.soliton.width(&consts);
    let fitted_out_velocity = outgoing_velocity(&traj.com, width, config.soliton.velocity);
    let region = match side {
        Side::Right => (boundary, grid.x_max()),
        Side::Left => (grid.x_min(), boundary),
    };
    let fitted_sech = observables::fit_sech(&grid, &traj.field, region).ok();

    Ok(RunSummary {
        label: config.label.clone(),
        p_refl,
        transmitted,
        surviving_series: traj.norms,
        com_series: traj.com,
        snapshots: traj.snapshots,
        closest_encounter: traj.closest_encounter,
        t_final_used: t_final,
        stop: traj.stop,
        boundary,
        fitted_out_velocity,
        fitted_sech,
        final_field: traj.field,
    })
}

/// Time of closest approach between the incoming-side packet and the beam.
pub fn closest_encounter_time(com: &[crate::propagator::ComSample]) -> Option<f64> {
    com.iter()
        .filter_map(|s| s.incoming.map(|c| (s.t, (c - s.beam_edge).abs())))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, _)| t)
}

/// COM velocity of the incoming-side packet, fitted from one soliton width
/// of travel after the closest encounter to the end of the run.
fn outgoing_velocity(com: &[crate::propagator::ComSample], width: f64, v_in: f64) -> Option<f64> {
    let t_contact = closest_encounter_time(com)?;
    let speed = v_in.abs();
    if speed == 0.0 {
        return None;
    }
    let t_end = com.last()?.t;
    let series = observables::incoming_com_series(com);
    observables::com_velocity(&series, (t_contact + width / speed, t_end)).ok()
}

/// Sech fits of the incoming-side packet for every snapshot taken after the
/// packet has moved one soliton width away from its closest encounter.
pub fn post_encounter_fits(config: &ScenarioConfig, summary: &RunSummary) -> Result<Vec<(f64, observables::SechFit)>> {
    let grid = config.grid.build()?;
    let Some(t_contact) = closest_encounter_time(&summary.com_series) else {
        return Ok(Vec::new());
    };
    let speed = config.soliton.velocity.abs().max(f64::MIN_POSITIVE);
    let t_start = t_contact + config.soliton.width(&config.constants) / speed;
    let side = config.incoming_side();
    let mut fits = Vec::new();
    for snap in summary.snapshots.iter().filter(|s| s.t >= t_start) {
        let (lo, hi) = config.beam.shape.core(snap.t);
        let region = match side {
            Side::Right => (hi, grid.x_max()),
            Side::Left => (grid.x_min(), lo),
        };
        let field = crate::physics::WaveField {
            psi: snap.density.iter().map(|r| r.sqrt().into()).collect(),
            t: snap.t,
        };
        if let Ok(fit) = observables::fit_sech(&grid, &field, region) {
            fits.push((snap.t, fit));
        }
    }
    Ok(fits)
}

/// Drives a moving-beam scenario and reports the outgoing COM velocity.
pub fn stop_soliton(config: &ScenarioConfig) -> Result<RunSummary> {
    stop_soliton_with(config, Exec::default())
}

pub fn stop_soliton_with(config: &ScenarioConfig, exec: Exec) -> Result<RunSummary> {
    if !matches!(config.beam.shape, BeamShape::MovingGaussian { .. }) {
        return Err(config.labeled(Error::invalid("beam.kind", "stopping needs a moving_gaussian beam")));
    }
    let summary = run_scenario_with(config, exec)?;
    if summary.fitted_out_velocity.is_none() {
        log::warn!("{}: too few post-encounter samples for a velocity fit", config.label);
    }
    Ok(summary)
}

/// Scenario parameter a sweep axis can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    /// Beam edge sharpness `w`.
    W,
    Gamma,
    /// Soliton velocity (signed).
    Velocity,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::W => "w",
            SweepParam::Gamma => "gamma",
            SweepParam::Velocity => "v",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "w" => Some(SweepParam::W),
            "gamma" => Some(SweepParam::Gamma),
            "v" => Some(SweepParam::Velocity),
            _ => None,
        }
    }

    pub fn apply(self, config: &mut ScenarioConfig, value: f64) {
        match self {
            SweepParam::W => match &mut config.beam.shape {
                BeamShape::Gaussian { w, .. } | BeamShape::FlatTop { w, .. } | BeamShape::MovingGaussian { w, .. } => {
                    *w = value
                }
            },
            SweepParam::Gamma => config.beam.gamma = value,
            SweepParam::Velocity => config.soliton.velocity = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub axes: Vec<SweepAxis>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::invalid(
                "sweep.axes",
                format!("need 1 or 2 axes, got {}", self.axes.len()),
            ));
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(Error::invalid("sweep.axes", "both axes vary the same parameter"));
        }
        for axis in &self.axes {
            let field = format!("sweep.{}", axis.param.name());
            if axis.values.is_empty() {
                return Err(Error::invalid(field, "no values"));
            }
            for &v in &axis.values {
                let ok = match axis.param {
                    SweepParam::W => v.is_finite() && v > 0.0,
                    SweepParam::Gamma => v.is_finite() && v >= 0.0,
                    SweepParam::Velocity => v.is_finite(),
                };
                if !ok {
                    return Err(Error::invalid(field, format!("bad value {v}")));
                }
            }
        }
        Ok(())
    }

    /// Cells in row-major axis order.
    pub fn cells(&self) -> Vec<(Vec<usize>, ScenarioConfig)> {
        let mut out = vec![(Vec::new(), self.base.clone())];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|(idx, cfg)| {
                    axis.values.iter().enumerate().map(move |(i, &v)| {
                        let mut cfg = cfg.clone();
                        axis.param.apply(&mut cfg, v);
                        let mut idx = idx.clone();
                        idx.push(i);
                        (idx, cfg)
                    })
                })
                .collect();
        }
        for (idx, cfg) in &mut out {
            let tag: Vec<String> = idx
                .iter()
                .zip(&self.axes)
                .map(|(&i, a)| format!("{}={}", a.param.name(), a.values[i]))
                .collect();
            cfg.label = format!("{}[{}]", self.base.label, tag.join(","));
            cfg.observe.snapshot_stride = 0;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub p_refl: f64,
    pub surviving: f64,
    pub t_final: f64,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub index: Vec<usize>,
    pub values: Vec<f64>,
    pub outcome: std::result::Result<CellResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub label: String,
    pub axes: Vec<SweepAxis>,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    /// `p_refl` values in cell order, `None` for failed cells.
    pub fn p_refl(&self) -> Vec<Option<f64>> {
        self.cells
            .iter()
            .map(|c| c.outcome.as_ref().ok().map(|r| r.p_refl))
            .collect()
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    run_sweep_with(spec, Exec::default(), None)
}

/// Runs every cell independently; failures are recorded per cell and the
/// table is always in axis order.
pub fn run_sweep_with(spec: &SweepSpec, exec: Exec, threads: Option<usize>) -> Result<SweepTable> {
    spec.validate()?;
    let cells = spec.cells();
    let outcomes = with_threads(threads, || {
        map_ordered(exec, &cells, |(_, cfg)| {
            // cells already run in parallel; keep each one sequential inside
            run_scenario_with(cfg, Exec::Sequential)
                .map(|s| CellResult {
                    p_refl: s.p_refl,
                    surviving: s.final_surviving(),
                    t_final: s.t_final_used,
                    stop: s.stop,
                })
                .map_err(|e| e.to_string())
        })
    });
    let cells = cells
        .into_iter()
        .zip(outcomes)
        .map(|((index, _), outcome)| {
            let values = index.iter().zip(&spec.axes).map(|(&i, a)| a.values[i]).collect();
            if let Err(e) = &outcome {
                log::warn!("sweep cell {index:?} failed: {e}");
            }
            SweepCell { index, values, outcome }
        })
        .collect();
    Ok(SweepTable {
        label: spec.base.label.clone(),
        axes: spec.axes.clone(),
        cells,
    })
}

/// A preset is either one run or a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Scenario(ScenarioConfig),
    Sweep(SweepSpec),
}

pub const FIGURE_NAMES: &[&str] = &[
    "fig1", "fig2a", "fig2b", "fig2c", "fig2d", "fig2e", "fig2f", "fig2g", "fig2h", "fig2i", "fig2j", "fig3",
];

const FIG1_V: f64 = -0.45553;
const W_AXIS: [f64; 8] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
const GAMMA_AXIS: [f64; 8] = [25.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 400.0];
const V_AXIS: [f64; 8] = [-0.0625, -0.125, -0.25, -0.375, -0.5, -0.75, -1.0, -1.5];

/// Wide domain for runs with fast solitons, so neither the reflected nor the
/// transmitted packet wraps around before the run settles.
fn fast(config: ScenarioConfig) -> ScenarioConfig {
    config.with_grid(-80.0, 80.0, 8192)
}

/// Long domain for the slow contactless-reflection run.
fn slow(config: ScenarioConfig) -> ScenarioConfig {
    config.with_grid(-60.0, 60.0, 8192)
}

fn sweep(label: &str, base: ScenarioConfig, axes: Vec<(SweepParam, &[f64])>) -> Preset {
    let mut base = base;
    base.label = label.to_string();
    Preset::Sweep(SweepSpec {
        base,
        axes: axes
            .into_iter()
            .map(|(param, values)| SweepAxis {
                param,
                values: values.to_vec(),
            })
            .collect(),
    })
}

/// Full-resolution versions of the contour sweeps are available through
/// [`figure_preset_full`].
pub fn figure_preset(name: &str) -> Result<Vec<Preset>> {
    preset(name, false)
}

/// Like [`figure_preset`] but with 32×32 contour grids for fig2d–f.
pub fn figure_preset_full(name: &str) -> Result<Vec<Preset>> {
    preset(name, true)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn preset(name: &str, full: bool) -> Result<Vec<Preset>> {
    let gauss = |gamma, w| BeamSpec::gaussian(gamma, -5.0, w);
    let contour = |coarse: &[f64], lo: f64, hi: f64| -> Vec<f64> {
        if full {
            linspace(lo, hi, 32)
        } else {
            coarse.to_vec()
        }
    };
    let presets = match name {
        "fig1" => vec![
            Preset::Scenario(fast(ScenarioConfig::new(
                "fig1b (w=0.8, gamma=50 assumed)",
                FIG1_V,
                gauss(50.0, 0.8),
            ))),
            Preset::Scenario(fast(ScenarioConfig::new(
                "fig1c (w=0.8, gamma=100 assumed)",
                FIG1_V,
                gauss(100.0, 0.8),
            ))),
            Preset::Scenario(fast(ScenarioConfig::new(
                "fig1d (w=0.1, gamma=100 assumed)",
                FIG1_V,
                gauss(100.0, 0.1),
            ))),
        ],
        "fig2a" => vec![sweep(
            "fig2a",
            ScenarioConfig::new("", -0.25, gauss(400.0, 0.1)),
            vec![(SweepParam::W, &W_AXIS)],
        )],
        "fig2b" => vec![sweep(
            "fig2b",
            ScenarioConfig::new("", -0.25, gauss(400.0, 0.1)),
            vec![(SweepParam::Gamma, &GAMMA_AXIS)],
        )],
        "fig2c" => vec![sweep(
            "fig2c",
            fast(ScenarioConfig::new("", -0.25, gauss(400.0, 0.1))),
            vec![(SweepParam::Velocity, &V_AXIS)],
        )],
        "fig2d" => {
            let w = contour(&W_AXIS, 0.1, 0.8);
            let v = contour(&V_AXIS, -0.0625, -1.5);
            vec![sweep(
                "fig2d",
                fast(ScenarioConfig::new("", -0.25, gauss(400.0, 0.1))),
                vec![(SweepParam::W, &w), (SweepParam::Velocity, &v)],
            )]
        }
        "fig2e" => {
            let w = contour(&W_AXIS, 0.1, 0.8);
            let g = contour(&GAMMA_AXIS, 25.0, 400.0);
            vec![sweep(
                "fig2e",
                ScenarioConfig::new("", -0.25, gauss(400.0, 0.1)),
                vec![(SweepParam::W, &w), (SweepParam::Gamma, &g)],
            )]
        }
        "fig2f" => {
            let v = contour(&V_AXIS, -0.0625, -1.5);
            let g = contour(&GAMMA_AXIS, 25.0, 400.0);
            vec![sweep(
                "fig2f",
                fast(ScenarioConfig::new("", -0.25, gauss(400.0, 0.1))),
                vec![(SweepParam::Velocity, &v), (SweepParam::Gamma, &g)],
            )]
        }
        "fig2g" => vec![Preset::Scenario(fast(ScenarioConfig::new(
            "fig2g",
            -1.51241,
            gauss(25.0, 0.1),
        )))],
        "fig2h" | "fig2i" => {
            let mut cfg = slow(ScenarioConfig::new(
                name,
                -0.015625,
                BeamSpec::gaussian(100.0, -7.0, 0.1),
            ));
            cfg.time = TimeParams::auto(DEFAULT_DT, 4000.0);
            cfg.observe.snapshot_stride = 4000;
            vec![Preset::Scenario(cfg)]
        }
        "fig2j" => vec![
            Preset::Scenario(ScenarioConfig::new(
                "fig2j flat-top",
                -0.25,
                BeamSpec::flat_top(200.0, -6.0, -5.0, 0.1),
            )),
            Preset::Scenario(ScenarioConfig::new("fig2j gaussian w=0.1", -0.25, gauss(200.0, 0.1))),
            Preset::Scenario(ScenarioConfig::new("fig2j gaussian w=0.8", -0.25, gauss(200.0, 0.8))),
        ],
        "fig3" => vec![Preset::Scenario(stopping_config(-0.25, 0.5))],
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(presets)
}

/// Moving-beam scenario with beam velocity `ratio · v`. `ratio = 0.5`
/// is the stopping configuration: the beam travels with the soliton at half
/// its speed, so the soliton reflects to rest in the lab frame.
pub fn stopping_config(v: f64, ratio: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        format!("fig3 moving beam (u = {ratio} v)"),
        v,
        BeamSpec::moving(100.0, -5.0, 0.1, ratio * v),
    )
    .with_grid(-80.0, 40.0, 8192)
    .with_time(TimeParams::fixed(DEFAULT_DT, 300.0));
    cfg.observe.snapshot_stride = 2000;
    cfg
}
