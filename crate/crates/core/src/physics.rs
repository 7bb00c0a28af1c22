//! Physical model: constants, the bright-soliton initial state, and the
//! electron-beam dissipation profiles.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

/// `m`, `ħ` and the attractive coupling `g`. All default to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub mass: f64,
    pub hbar: f64,
    pub g: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
            g: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("constants.mass", self.mass),
            ("constants.hbar", self.hbar),
            ("constants.g", self.g),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }

    /// Amplitude of the unit-norm bright soliton, `√(g m) / (2ħ)`.
    pub fn unit_norm_amplitude(&self) -> f64 {
        (self.g * self.mass).sqrt() / (2.0 * self.hbar)
    }
}

/// A bright soliton `A e^{ikx} sech[κ(x - x0 - vt)]` with `κ = A√(gm)/ħ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonSpec {
    pub velocity: f64,
    pub x0: f64,
    pub amplitude: f64,
}

impl SolitonSpec {
    /// Soliton carrying unit norm in the continuum.
    pub fn normalized(velocity: f64, x0: f64, consts: &PhysicalConstants) -> Self {
        Self {
            velocity,
            x0,
            amplitude: consts.unit_norm_amplitude(),
        }
    }

    /// Inverse width `κ` of the sech envelope.
    pub fn inverse_width(&self, consts: &PhysicalConstants) -> f64 {
        self.amplitude * (consts.g * consts.mass).sqrt() / consts.hbar
    }

    pub fn width(&self, consts: &PhysicalConstants) -> f64 {
        1.0 / self.inverse_width(consts)
    }

    /// Continuum norm `2A²/κ`.
    pub fn continuum_norm(&self, consts: &PhysicalConstants) -> f64 {
        2.0 * self.amplitude * self.amplitude / self.inverse_width(consts)
    }
}

/// Exact travelling bright soliton of the loss-free equation.
pub fn analytic_soliton(x: f64, t: f64, spec: &SolitonSpec, consts: &PhysicalConstants) -> Complex64 {
    let PhysicalConstants { mass, hbar, g } = *consts;
    let a = spec.amplitude;
    let v = spec.velocity;
    let kappa = spec.inverse_width(consts);
    let envelope = a / (kappa * (x - spec.x0 - v * t)).cosh();
    let phase = mass * v * x / hbar - t * (0.5 * mass * v * v - 0.5 * g * a * a) / hbar;
    Complex64::from_polar(envelope, phase)
}

/// Complex amplitudes on a grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub psi: Vec<Complex64>,
    pub t: f64,
}

impl WaveField {
    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.psi.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Samples the soliton at `t = 0` and rescales it to unit discrete norm.
pub fn init_soliton(grid: &SpatialGrid, spec: &SolitonSpec, consts: &PhysicalConstants) -> Result<WaveField> {
    consts.validate()?;
    if !(spec.amplitude.is_finite() && spec.amplitude > 0.0) {
        return Err(Error::InitialState(format!(
            "amplitude must be positive, got {}",
            spec.amplitude
        )));
    }
    if !spec.velocity.is_finite() {
        return Err(Error::InitialState("velocity is not finite".into()));
    }
    if !grid.contains(spec.x0) {
        return Err(Error::OutsideDomain {
            x: spec.x0,
            x_min: grid.x_min(),
            x_max: grid.x_max(),
        });
    }
    let width = spec.width(consts);
    if 20.0 * width > grid.length() {
        return Err(Error::InitialState(format!(
            "soliton width {width} is too large for a domain of length {}",
            grid.length()
        )));
    }
    let margin = (spec.x0 - grid.x_min()).min(grid.x_max() - spec.x0);
    if margin < 10.0 * width {
        return Err(Error::InitialState(format!(
            "x0 = {} leaves {margin} to the boundary; need 10 widths ({})",
            spec.x0,
            10.0 * width
        )));
    }

    let mut psi: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|&x| analytic_soliton(x, 0.0, spec, consts))
        .collect();
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dx();
    let scale = 1.0 / norm.sqrt();
    psi.iter_mut().for_each(|c| *c *= scale);
    Ok(WaveField { psi, t: 0.0 })
}

/// Spatial envelope of the electron beam, valued in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamShape {
    /// `exp(-((x - center)/w)²)`.
    Gaussian { center: f64, w: f64 },
    /// Unit plateau on `[left, right)` with Gaussian flanks of sharpness `w`.
    FlatTop { left: f64, right: f64, w: f64 },
    /// Gaussian whose center moves as `center0 + velocity·t`.
    MovingGaussian { center0: f64, w: f64, velocity: f64 },
}

impl BeamShape {
    pub fn w(&self) -> f64 {
        match *self {
            BeamShape::Gaussian { w, .. } | BeamShape::FlatTop { w, .. } | BeamShape::MovingGaussian { w, .. } => w,
        }
    }

    pub fn is_static(&self) -> bool {
        !matches!(self, BeamShape::MovingGaussian { velocity, .. } if *velocity != 0.0)
    }

    pub fn profile(&self, x: f64, t: f64) -> f64 {
        let gauss = |d: f64, w: f64| (-(d / w) * (d / w)).exp();
        match *self {
            BeamShape::Gaussian { center, w } => gauss(x - center, w),
            BeamShape::FlatTop { left, right, w } => {
                if x < left {
                    gauss(x - left, w)
                } else if x < right {
                    1.0
                } else {
                    gauss(x - right, w)
                }
            }
            BeamShape::MovingGaussian { center0, w, velocity } => gauss(x - (center0 + velocity * t), w),
        }
    }

    /// Interval `[lo, hi]` where the profile equals one at time `t`.
    pub fn core(&self, t: f64) -> (f64, f64) {
        match *self {
            BeamShape::Gaussian { center, .. } => (center, center),
            BeamShape::FlatTop { left, right, .. } => (left, right),
            BeamShape::MovingGaussian { center0, velocity, .. } => {
                let c = center0 + velocity * t;
                (c, c)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.w();
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::invalid("beam.w", format!("must be positive, got {w}")));
        }
        match *self {
            BeamShape::Gaussian { center, .. } if !center.is_finite() => {
                Err(Error::invalid("beam.x_b", "must be finite"))
            }
            BeamShape::FlatTop { left, right, .. } if !(left.is_finite() && right.is_finite() && left < right) => Err(
                Error::invalid("beam.x_r", format!("need x_l < x_r, got x_l = {left}, x_r = {right}")),
            ),
            BeamShape::MovingGaussian { center0, velocity, .. } if !(center0.is_finite() && velocity.is_finite()) => {
                Err(Error::invalid(
                    "beam.velocity",
                    "beam start and velocity must be finite",
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Beam shape together with the dissipation strength `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub gamma: f64,
    pub shape: BeamShape,
}

impl BeamSpec {
    pub fn gaussian(gamma: f64, center: f64, w: f64) -> Self {
        Self {
            gamma,
            shape: BeamShape::Gaussian { center, w },
        }
    }

    pub fn flat_top(gamma: f64, left: f64, right: f64, w: f64) -> Self {
        Self {
            gamma,
            shape: BeamShape::FlatTop { left, right, w },
        }
    }

    pub fn moving(gamma: f64, center0: f64, w: f64, velocity: f64) -> Self {
        Self {
            gamma,
            shape: BeamShape::MovingGaussian { center0, w, velocity },
        }
    }

    pub fn profile(&self, x: f64, t: f64) -> f64 {
        self.shape.profile(x, t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::invalid(
                "beam.gamma",
                format!("must be >= 0, got {}", self.gamma),
            ));
        }
        self.shape.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn discrete_norm(grid: &SpatialGrid, f: &WaveField) -> f64 {
        f.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dx()
    }

    #[test]
    fn unit_amplitude_normalizes_continuum() {
        let s = SolitonSpec::normalized(-0.25, 10.0, &unit());
        assert_eq!(s.amplitude, 0.5);
        assert_eq!(s.width(&unit()), 2.0);
        assert_relative_eq!(s.continuum_norm(&unit()), 1.0);
        let c = PhysicalConstants {
            mass: 2.0,
            hbar: 0.7,
            g: 3.0,
        };
        let s = SolitonSpec::normalized(0.1, 0.0, &c);
        assert_relative_eq!(s.continuum_norm(&c), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn init_soliton_peak_norm_and_phase() {
        let grid = SpatialGrid::new(-40.0, 40.0, 4096).unwrap();
        let spec = SolitonSpec::normalized(-0.25, 10.0, &unit());
        let f = init_soliton(&grid, &spec, &unit()).unwrap();
        assert_relative_eq!(discrete_norm(&grid, &f), 1.0, epsilon = 1e-12);
        let j = grid.first_index_at_or_after(10.0);
        assert_eq!(grid.positions()[j], 10.0);
        assert_relative_eq!(f.psi[j].norm(), 0.5, epsilon = 1e-9);
        let dphi = (f.psi[j + 1] / f.psi[j]).arg();
        assert_relative_eq!(dphi, -0.25 * grid.dx(), epsilon = 1e-12);
    }

    #[test]
    fn init_soliton_rejects_bad_placement() {
        let grid = SpatialGrid::new(-40.0, 40.0, 1024).unwrap();
        let c = unit();
        assert!(matches!(
            init_soliton(&grid, &SolitonSpec::normalized(0.0, 50.0, &c), &c),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(matches!(
            init_soliton(&grid, &SolitonSpec::normalized(0.0, 35.0, &c), &c),
            Err(Error::InitialState(_))
        ));
        let wide = SolitonSpec {
            velocity: 0.0,
            x0: 0.0,
            amplitude: 0.01,
        };
        assert!(matches!(init_soliton(&grid, &wide, &c), Err(Error::InitialState(_))));
    }

    #[test]
    fn analytic_soliton_values() {
        let c = unit();
        let s = SolitonSpec::normalized(-0.25, 10.0, &c);
        let z = analytic_soliton(10.0, 0.0, &s, &c);
        assert_relative_eq!(z.norm(), 0.5);
        assert_relative_eq!(z.arg(), -2.5, epsilon = 1e-14);

        let still = SolitonSpec::normalized(0.0, 0.0, &c);
        for t in [0.5, 3.0, 7.0] {
            let z = analytic_soliton(0.0, t, &still, &c);
            let expected = Complex64::from_polar(0.5, t / 8.0);
            assert_relative_eq!(z.re, expected.re, epsilon = 1e-14);
            assert_relative_eq!(z.im, expected.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn gaussian_profile_values() {
        let b = BeamShape::Gaussian { center: -5.0, w: 0.1 };
        assert_eq!(b.profile(-5.0, 0.0), 1.0);
        assert_relative_eq!(b.profile(-4.9, 0.0), (-1.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(b.profile(-5.1, 0.0), 0.367879, epsilon = 1e-6);
    }

    #[test]
    fn flat_top_profile_values() {
        let b = BeamShape::FlatTop {
            left: -6.0,
            right: -5.0,
            w: 0.1,
        };
        assert_eq!(b.profile(-5.5, 0.0), 1.0);
        assert_eq!(b.profile(-6.0, 0.0), 1.0);
        assert_eq!(b.profile(-5.0, 0.0), 1.0);
        assert_relative_eq!(b.profile(-4.9, 0.0), (-1.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(b.profile(-6.1, 0.0), (-1.0f64).exp(), epsilon = 1e-12);
        // continuity from either side
        assert_relative_eq!(b.profile(-6.0 - 1e-9, 0.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.profile(-5.0 + 1e-9, 0.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn moving_profile_center_follows_velocity() {
        let v = -0.25;
        let b = BeamShape::MovingGaussian {
            center0: -5.0,
            w: 0.1,
            velocity: -v / 2.0,
        };
        assert_eq!(b.core(100.0), (7.5, 7.5));
        assert_eq!(b.profile(7.5, 100.0), 1.0);
        assert!(!b.is_static());
        assert!(BeamShape::MovingGaussian {
            center0: 0.0,
            w: 1.0,
            velocity: 0.0
        }
        .is_static());
    }

    #[test]
    fn beam_validation() {
        assert!(BeamSpec::gaussian(-1.0, 0.0, 0.1).validate().is_err());
        assert!(BeamSpec::gaussian(1.0, 0.0, -0.1).validate().is_err());
        assert!(BeamSpec::flat_top(1.0, -5.0, -6.0, 0.1).validate().is_err());
        assert!(BeamSpec::flat_top(1.0, -6.0, -5.0, 0.1).validate().is_ok());
    }

    fn any_shape() -> impl Strategy<Value = BeamShape> {
        prop_oneof![
            (-20.0..20.0f64, 0.01..2.0f64).prop_map(|(center, w)| BeamShape::Gaussian { center, w }),
            (-20.0..20.0f64, 0.01..5.0f64, 0.01..2.0f64).prop_map(|(left, len, w)| BeamShape::FlatTop {
                left,
                right: left + len,
                w
            }),
            (-20.0..20.0f64, 0.01..2.0f64, -1.0..1.0f64).prop_map(|(center0, w, velocity)| BeamShape::MovingGaussian {
                center0,
                w,
                velocity
            }),
        ]
    }

    proptest! {
        #[test]
        fn profile_is_bounded(shape in any_shape(), t in 0.0..500.0f64) {
            for j in 0..2000 {
                let x = -60.0 + 0.06 * j as f64;
                let p = shape.profile(x, t);
                prop_assert!((0.0..=1.0).contains(&p));
            }
            let (lo, hi) = shape.core(t);
            prop_assert_eq!(shape.profile(lo, t), 1.0);
            prop_assert!(shape.profile(0.5 * (lo + hi), t) == 1.0);
        }

        #[test]
        fn init_norm_is_exact(v in -2.0..2.0f64, x0 in -15.0..15.0f64, log_n in 9u32..13) {
            let grid = SpatialGrid::new(-40.0, 40.0, 1 << log_n).unwrap();
            let c = unit();
            let f = init_soliton(&grid, &SolitonSpec::normalized(v, x0, &c), &c).unwrap();
            prop_assert!((discrete_norm(&grid, &f) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn envelope_travels(x in -10.0..10.0f64, t in 0.0..20.0f64, dt in 0.0..20.0f64) {
            let c = unit();
            let s = SolitonSpec::normalized(-0.25, 0.0, &c);
            let a = analytic_soliton(x, t, &s, &c).norm();
            let b = analytic_soliton(x + s.velocity * dt, t + dt, &s, &c).norm();
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
