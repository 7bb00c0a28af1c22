//! Symmetric split-step integrator for the dissipative attractive GPE
//!
//! ```text
//! iħ ∂ψ/∂t = -(ħ²/2m) ∂²ψ/∂x² - g|ψ|²ψ - iγΓ(x,t)ψ
//! ```
//!
//! Each step is a spectral kinetic half-step, an exact pointwise
//! nonlinear-plus-loss substep over the full `dt`, and a second kinetic
//! half-step. With `Γ` frozen over the step the pointwise equation has the
//! closed form `ρ(τ) = ρ0 e^{-aτ}`, `φ(τ) = (g/ħ) ρ0 (1 - e^{-aτ}) / a`,
//! `a = 2γΓ/ħ`, so stiff `γ` imposes no step-size limit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{for_each_indexed, Exec};
use crate::grid::SpatialGrid;
use crate::observables;
use crate::physics::{BeamSpec, PhysicalConstants, WaveField};

/// When to end an evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    Fixed(f64),
    /// Stop once the relative loss rate `|dN/dt|/N` has stayed below
    /// `loss_rate_eps` for a trailing `quiet_window` and the packet is
    /// receding from the beam.
    Auto {
        loss_rate_eps: f64,
        quiet_window: f64,
        t_max: f64,
    },
}

impl StopRule {
    pub fn horizon(&self) -> f64 {
        match *self {
            StopRule::Fixed(t) => t,
            StopRule::Auto { t_max, .. } => t_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeParams {
    pub dt: f64,
    pub stop: StopRule,
}

impl TimeParams {
    pub fn fixed(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            stop: StopRule::Fixed(t_final),
        }
    }

    pub fn auto(dt: f64, t_max: f64) -> Self {
        Self {
            dt,
            stop: StopRule::Auto {
                loss_rate_eps: 1e-6,
                quiet_window: 20.0,
                t_max,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("time.dt", format!("must be positive, got {}", self.dt)));
        }
        match self.stop {
            StopRule::Fixed(t) if !(t.is_finite() && t > 0.0) => {
                Err(Error::invalid("time.t_final", format!("must be positive, got {t}")))
            }
            StopRule::Auto {
                loss_rate_eps,
                quiet_window,
                t_max,
            } => {
                if !(loss_rate_eps.is_finite() && loss_rate_eps > 0.0) {
                    Err(Error::invalid("time.loss_rate_eps", "must be positive"))
                } else if !(quiet_window.is_finite() && quiet_window > 0.0) {
                    Err(Error::invalid("time.quiet_window", "must be positive"))
                } else if !(t_max.is_finite() && t_max >= quiet_window) {
                    Err(Error::invalid("time.t_max", "must be >= quiet_window"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Which side of the beam the soliton starts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// What to record while evolving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSchedule {
    /// Steps between density snapshots; zero disables snapshots.
    pub snapshot_stride: usize,
    /// Steps between center-of-mass samples; zero disables them.
    pub com_stride: usize,
    /// Incoming side of the beam. COM samples of that side and the
    /// closest-encounter capture need it.
    pub incoming: Option<Side>,
}

impl Default for ObservableSchedule {
    fn default() -> Self {
        Self {
            snapshot_stride: 2000,
            com_stride: 100,
            incoming: Some(Side::Right),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComSample {
    pub t: f64,
    /// COM over the whole domain.
    pub total: f64,
    /// COM over the incoming side of the beam, absent when that side is empty.
    pub incoming: Option<f64>,
    /// Beam edge bounding the incoming side.
    pub beam_edge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FixedTime,
    Quiescent,
    TimeLimit,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub field: WaveField,
    /// `(t, N(t))` after every step, starting with the initial state.
    pub norms: Vec<(f64, f64)>,
    pub snapshots: Vec<Snapshot>,
    pub com: Vec<ComSample>,
    /// Density at the COM sample where the incoming-side packet came closest
    /// to the beam.
    pub closest_encounter: Option<Snapshot>,
    pub steps: usize,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn t_final(&self) -> f64 {
        self.field.t
    }

    pub fn final_norm(&self) -> f64 {
        self.norms.last().map_or(0.0, |p| p.1)
    }
}

/// Reusable split-step integrator bound to one grid and step size.
pub struct Propagator<'g> {
    grid: &'g SpatialGrid,
    dt: f64,
    consts: PhysicalConstants,
    /// `e^{-iħk²dt/(4m)} / n`, the `1/n` undoing the unnormalized FFT pair.
    kinetic_half: Vec<Complex64>,
    scratch: Vec<Complex64>,
    cached: Option<(BeamSpec, Vec<(f64, f64)>)>,
    exec: Exec,
}

impl<'g> Propagator<'g> {
    pub fn new(grid: &'g SpatialGrid, dt: f64, consts: PhysicalConstants) -> Result<Self> {
        consts.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid("time.dt", format!("must be positive, got {dt}")));
        }
        let kmax = grid.k_max();
        let kinetic_phase = consts.hbar * kmax * kmax * dt / (2.0 * consts.mass);
        if kinetic_phase > std::f64::consts::FRAC_PI_4 {
            log::debug!("kinetic phase per step {kinetic_phase:.3} exceeds π/4; consider a smaller dt");
        }
        let inv_n = 1.0 / grid.n() as f64;
        let kinetic_half = grid
            .wavenumbers()
            .iter()
            .map(|&k| Complex64::from_polar(inv_n, -consts.hbar * k * k * dt / (4.0 * consts.mass)))
            .collect();
        Ok(Self {
            grid,
            dt,
            consts,
            kinetic_half,
            scratch: vec![Complex64::default(); grid.scratch_len()],
            cached: None,
            exec: Exec::default(),
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.grid
    }

    fn kinetic_half_step(&mut self, psi: &mut [Complex64]) {
        self.grid.fft_forward(psi, &mut self.scratch);
        let phases = &self.kinetic_half;
        for_each_indexed(self.exec, psi, |j, z| *z *= phases[j]);
        self.grid.fft_inverse(psi, &mut self.scratch);
    }

    /// Per-point `(e^{-a dt/2}, (1 - e^{-a dt})/a)` for a frozen profile.
    fn loss_factors(&self, beam: &BeamSpec, t_mid: f64) -> Vec<(f64, f64)> {
        let dt = self.dt;
        let rate_scale = 2.0 * beam.gamma / self.consts.hbar;
        self.grid
            .positions()
            .iter()
            .map(|&x| loss_factor(rate_scale * beam.profile(x, t_mid), dt))
            .collect()
    }

    fn potential_substep(&mut self, psi: &mut [Complex64], beam: &BeamSpec, t: f64) {
        let nonlinear = self.consts.g / self.consts.hbar;
        if beam.shape.is_static() {
            let stale = !matches!(&self.cached, Some((b, _)) if b == beam);
            if stale {
                self.cached = Some((*beam, self.loss_factors(beam, 0.0)));
            }
            let factors = &self.cached.as_ref().expect("cache filled above").1;
            for_each_indexed(self.exec, psi, |j, z| {
                let (damp, tau) = factors[j];
                let phase = nonlinear * z.norm_sqr() * tau;
                *z *= Complex64::from_polar(damp, phase);
            });
        } else {
            let t_mid = t + 0.5 * self.dt;
            let dt = self.dt;
            let rate_scale = 2.0 * beam.gamma / self.consts.hbar;
            let x = self.grid.positions();
            for_each_indexed(self.exec, psi, |j, z| {
                let (damp, tau) = loss_factor(rate_scale * beam.profile(x[j], t_mid), dt);
                let phase = nonlinear * z.norm_sqr() * tau;
                *z *= Complex64::from_polar(damp, phase);
            });
        }
    }

    /// Advances `field` by one Strang step.
    pub fn step(&mut self, field: &mut WaveField, beam: &BeamSpec) -> Result<()> {
        self.grid.check_len(field.psi.len())?;
        let t = field.t;
        self.kinetic_half_step(&mut field.psi);
        self.potential_substep(&mut field.psi, beam, t);
        self.kinetic_half_step(&mut field.psi);
        field.t = t + self.dt;
        Ok(())
    }

    /// Repeatedly steps `field` until the stop rule fires, recording the
    /// observables requested by `probes`.
    pub fn evolve(
        &mut self,
        mut field: WaveField,
        time: &TimeParams,
        beam: &BeamSpec,
        probes: &ObservableSchedule,
    ) -> Result<Trajectory> {
        time.validate()?;
        beam.validate()?;
        self.grid.check_len(field.psi.len())?;
        if (time.dt - self.dt).abs() > 1e-15 * self.dt {
            return Err(Error::invalid("time.dt", "does not match the propagator step"));
        }
        let grid = self.grid;
        let dx = grid.dx();
        let t0 = field.t;
        let horizon = time.stop.horizon();
        let total_steps = ((horizon - t0) / self.dt - 1e-9).ceil().max(0.0) as usize;

        let mut norms = Vec::with_capacity(total_steps.min(1 << 22) + 1);
        let mut snapshots = Vec::new();
        let mut com = Vec::new();
        let mut closest: Option<(f64, Snapshot)> = None;
        let mut min_gap = f64::INFINITY;
        let mut current_gap = f64::INFINITY;

        let mut norm = observables::norm_of(&field.psi, dx);
        norms.push((field.t, norm));

        let record = |field: &WaveField,
                      step: usize,
                      snapshots: &mut Vec<Snapshot>,
                      com: &mut Vec<ComSample>,
                      closest: &mut Option<(f64, Snapshot)>,
                      min_gap: &mut f64,
                      current_gap: &mut f64| {
            if probes.snapshot_stride > 0 && step.is_multiple_of(probes.snapshot_stride) {
                snapshots.push(Snapshot {
                    t: field.t,
                    density: field.density(),
                });
            }
            if probes.com_stride > 0 && step.is_multiple_of(probes.com_stride) {
                let sample = com_sample(grid, field, beam, probes.incoming);
                if let (Some(side), Some(c)) = (probes.incoming, sample.incoming) {
                    let gap = match side {
                        Side::Right => c - sample.beam_edge,
                        Side::Left => sample.beam_edge - c,
                    };
                    *current_gap = gap;
                    if gap < *min_gap {
                        *min_gap = gap;
                        *closest = Some((
                            gap,
                            Snapshot {
                                t: field.t,
                                density: field.density(),
                            },
                        ));
                    }
                }
                com.push(sample);
            }
        };

        record(
            &field,
            0,
            &mut snapshots,
            &mut com,
            &mut closest,
            &mut min_gap,
            &mut current_gap,
        );

        let mut last_loud = t0;
        let mut stop = StopReason::TimeLimit;
        let mut step_count = 0usize;
        while step_count < total_steps {
            self.step(&mut field, beam)?;
            step_count += 1;
            let new_norm = observables::norm_of(&field.psi, dx);
            if !new_norm.is_finite() {
                return Err(Error::BlowUp { t: field.t });
            }
            norms.push((field.t, new_norm));
            record(
                &field,
                step_count,
                &mut snapshots,
                &mut com,
                &mut closest,
                &mut min_gap,
                &mut current_gap,
            );

            if let StopRule::Auto {
                loss_rate_eps,
                quiet_window,
                ..
            } = time.stop
            {
                let rate = (norm - new_norm).abs() / (new_norm.max(f64::MIN_POSITIVE) * self.dt);
                if rate > loss_rate_eps {
                    last_loud = field.t;
                }
                let quiet = field.t - t0 >= quiet_window && field.t - last_loud >= quiet_window;
                let receding = probes.incoming.is_none() || current_gap > min_gap + 1.0;
                if quiet && receding {
                    stop = StopReason::Quiescent;
                    norm = new_norm;
                    break;
                }
            }
            norm = new_norm;
        }
        if matches!(time.stop, StopRule::Fixed(_)) {
            stop = StopReason::FixedTime;
        }
        // make sure the final state is always present in the series
        if probes.snapshot_stride > 0 && !step_count.is_multiple_of(probes.snapshot_stride) {
            snapshots.push(Snapshot {
                t: field.t,
                density: field.density(),
            });
        }
        if probes.com_stride > 0 && !step_count.is_multiple_of(probes.com_stride) {
            com.push(com_sample(grid, &field, beam, probes.incoming));
        }
        let _ = norm;
        Ok(Trajectory {
            field,
            norms,
            snapshots,
            com,
            closest_encounter: closest.map(|(_, s)| s),
            steps: step_count,
            stop,
        })
    }
}

fn loss_factor(rate: f64, dt: f64) -> (f64, f64) {
    if rate > 0.0 {
        ((-0.5 * rate * dt).exp(), -(-rate * dt).exp_m1() / rate)
    } else {
        (1.0, dt)
    }
}

fn com_sample(grid: &SpatialGrid, field: &WaveField, beam: &BeamSpec, incoming: Option<Side>) -> ComSample {
    let (lo, hi) = beam.shape.core(field.t);
    let total = observables::com_unchecked(grid, &field.psi, grid.x_min(), grid.x_max()).unwrap_or(f64::NAN);
    let (edge, region) = match incoming {
        Some(Side::Left) => (lo, Some((grid.x_min(), lo))),
        Some(Side::Right) => (hi, Some((hi, grid.x_max()))),
        None => (hi, None),
    };
    let incoming = region.and_then(|(a, b)| {
        let n_total = observables::norm_of(&field.psi, grid.dx());
        let (n_region, c) = observables::region_moments(grid, &field.psi, a, b);
        (n_region >= 1e-6 * n_total && n_region > 0.0).then_some(c)
    });
    ComSample {
        t: field.t,
        total,
        incoming,
        beam_edge: edge,
    }
}
